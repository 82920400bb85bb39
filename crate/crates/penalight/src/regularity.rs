//! Separation-condition verification: minimum-norm point of a convex hull,
//! Gordan alternative certificates, LICQ / MFCQ checks, and the combined
//! verdict over sampled terminal probes.
//!
//! The central quantity is the distance from the origin to the convex hull
//! of the terminal-penalty subdifferential generators; the condition holds
//! when that distance stays above a positive threshold at every infeasible
//! probe near the admissible set.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::penalty::{phi_term, phi_term_subdifferential};

/// Verdict threshold: the condition holds when the minimal hull distance
/// over all infeasible probes exceeds this.
pub const USC_TOL: f64 = 1e-6;

/// Distances above this certify the direction branch of the Gordan
/// alternative; below a tenth of it, the weights branch. In between the
/// certificate is refused as borderline.
pub const GORDAN_TOL: f64 = 1e-9;

/// Column-rank threshold factor for the LICQ check.
const RANK_TOL: f64 = 1e-10;

/// Wolfe duality-gap termination factor.
const WOLFE_GAP_TOL: f64 = 1e-12;

/// Weight clean-up threshold inside the min-norm iteration.
const WEIGHT_EPS: f64 = 1e-12;

/// Major-cycle cap for the min-norm iteration.
const MAX_MAJOR_CYCLES: usize = 10_000;

/// Finite generator set of a convex hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    pub generators: Vec<DVector<f64>>,
}

impl Hull {
    pub fn new(generators: Vec<DVector<f64>>) -> Self {
        Hull { generators }
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Minimum-norm point of a convex hull with its convex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormResult {
    pub point: DVector<f64>,
    /// Convex coefficients over the full generator list (zeros off the
    /// final corral); nonnegative, summing to one.
    pub weights: Vec<f64>,
    pub distance: f64,
}

/// One branch of the Gordan alternative for a finite vector set.
#[derive(Debug, Clone, PartialEq)]
pub enum GordanCertificate {
    /// A direction with strictly negative inner product against every vector.
    Direction(DVector<f64>),
    /// Nonnegative weights, not all zero, combining the vectors to zero.
    Weights(Vec<f64>),
}

impl GordanCertificate {
    /// Numerically verify the defining inequalities of the populated branch.
    pub fn validates(&self, vectors: &[DVector<f64>], tol: f64) -> bool {
        match self {
            GordanCertificate::Direction(d) => {
                vectors.iter().all(|a| a.dot(d) < 0.0) && (d.norm() - 1.0).abs() < 1e-8
            }
            GordanCertificate::Weights(w) => {
                if w.len() != vectors.len() || w.iter().any(|&wi| wi < -tol) {
                    return false;
                }
                let total: f64 = w.iter().sum();
                if total <= tol {
                    return false;
                }
                let mut combo = DVector::zeros(vectors[0].len());
                for (wi, a) in w.iter().zip(vectors) {
                    combo += a * *wi;
                }
                let scale = vectors.iter().map(|a| a.norm()).fold(0.0, f64::max).max(1.0);
                combo.norm() <= tol * scale
            }
        }
    }
}

/// Minimum-norm point of the affine hull of the chosen generators; the
/// returned barycentric weights may be negative.
fn affine_min_norm(gens: &[DVector<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    if k == 1 {
        return vec![1.0];
    }
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for (a, &ia) in corral.iter().enumerate() {
        for (b, &ib) in corral.iter().enumerate() {
            kkt[(a, b)] = gens[ia].dot(&gens[ib]);
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let solved = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .or_else(|| kkt.svd(true, true).solve(&rhs, 1e-14).ok());
    match solved {
        Some(sol) => sol.rows(0, k).iter().copied().collect(),
        // Fully degenerate subproblem: fall back to the current corral
        // barycenter, which the line search will then prune.
        None => vec![1.0 / k as f64; k],
    }
}

fn combination(gens: &[DVector<f64>], corral: &[usize], w: &[f64]) -> DVector<f64> {
    let mut p = DVector::zeros(gens[0].len());
    for (&i, &wi) in corral.iter().zip(w) {
        p += &gens[i] * wi;
    }
    p
}

fn full_weights(n: usize, corral: &[usize], w: &[f64]) -> Vec<f64> {
    let mut full = vec![0.0; n];
    for (&i, &wi) in corral.iter().zip(w) {
        full[i] += wi.max(0.0);
    }
    let total: f64 = full.iter().sum();
    if total > 0.0 {
        for v in &mut full {
            *v /= total;
        }
    }
    full
}

/// Minimum-norm point of `co(generators)` by Wolfe's corral iteration.
///
/// Terminates when the duality gap `<p, p - g_i>` drops below
/// `1e-12 (1 + |p|^2)` for every generator; the entering generator is the
/// one of smallest inner product with the current point, ties broken by
/// lowest index.
pub fn min_norm_point(hull: &Hull) -> Result<MinNormResult> {
    if hull.is_empty() {
        return Err(Error::EmptyHull);
    }
    let gens = &hull.generators;
    let dim = gens[0].len();
    if gens.iter().any(|g| g.len() != dim || !g.iter().all(|v| v.is_finite())) {
        return Err(Error::InvalidArgument(
            "hull generators must be finite and of equal dimension".into(),
        ));
    }

    let start = (0..gens.len())
        .min_by(|&a, &b| gens[a].norm_squared().total_cmp(&gens[b].norm_squared()))
        .expect("nonempty hull");
    let mut corral = vec![start];
    let mut weights = vec![1.0];
    let mut point = gens[start].clone();

    let finish = |corral: &[usize], weights: &[f64]| -> MinNormResult {
        let full = full_weights(gens.len(), corral, weights);
        let mut point = DVector::zeros(dim);
        for (g, &wi) in gens.iter().zip(&full) {
            point += g * wi;
        }
        let distance = point.norm();
        MinNormResult { point, weights: full, distance }
    };

    for _ in 0..MAX_MAJOR_CYCLES {
        let norm_sq = point.norm_squared();
        let mut entering = 0;
        let mut min_ip = f64::INFINITY;
        for (i, g) in gens.iter().enumerate() {
            let ip = point.dot(g);
            if ip < min_ip {
                min_ip = ip;
                entering = i;
            }
        }
        if norm_sq - min_ip <= WOLFE_GAP_TOL * (1.0 + norm_sq) {
            return Ok(finish(&corral, &weights));
        }
        if corral.contains(&entering) {
            // The best candidate is already in the corral; the remaining gap
            // is below what the arithmetic can resolve.
            return Ok(finish(&corral, &weights));
        }
        corral.push(entering);
        weights.push(0.0);

        loop {
            let affine = affine_min_norm(gens, &corral);
            if affine.iter().all(|&v| v > WEIGHT_EPS) {
                weights = affine;
                break;
            }
            let mut theta = 1.0f64;
            for (w, v) in weights.iter().zip(&affine) {
                if *v <= WEIGHT_EPS && (w - v).abs() > 0.0 {
                    theta = theta.min(w / (w - v));
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (w, v) in weights.iter_mut().zip(&affine) {
                *w += theta * (v - *w);
            }
            let keep: Vec<usize> =
                (0..corral.len()).filter(|&i| weights[i] > WEIGHT_EPS).collect();
            if keep.is_empty() {
                // Numerical collapse; keep the largest weight.
                let best = (0..corral.len())
                    .max_by(|&a, &b| weights[a].total_cmp(&weights[b]))
                    .unwrap();
                corral = vec![corral[best]];
                weights = vec![1.0];
                break;
            }
            corral = keep.iter().map(|&i| corral[i]).collect();
            weights = keep.iter().map(|&i| weights[i]).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            if corral.len() == 1 {
                break;
            }
        }
        point = combination(gens, &corral, &weights);
    }
    Err(Error::MinNormStalled { best: finish(&corral, &weights) })
}

/// Certificate for the Gordan alternative over a finite vector set,
/// computed from the minimum-norm point of the hull: a positive distance
/// yields the separating direction `-p / |p|`; a vanishing one yields the
/// convex weights witnessing `0` in the hull.
pub fn gordan_certificate(vectors: &[DVector<f64>]) -> Result<GordanCertificate> {
    if vectors.is_empty() {
        return Err(Error::EmptyHull);
    }
    let res = min_norm_point(&Hull::new(vectors.to_vec()))?;
    if res.distance > GORDAN_TOL {
        Ok(GordanCertificate::Direction(-&res.point / res.distance))
    } else if res.distance < GORDAN_TOL / 10.0 {
        Ok(GordanCertificate::Weights(res.weights))
    } else {
        Err(Error::BorderlineCertificate { distance: res.distance })
    }
}

/// Linear-independence check on equality-constraint gradients via
/// column-pivoted QR. Returns `(holds, rank)`; an empty list holds
/// trivially with rank zero.
pub fn check_licq(eq_grads: &[DVector<f64>]) -> (bool, usize) {
    if eq_grads.is_empty() {
        return (true, 0);
    }
    let n = eq_grads[0].len();
    let k = eq_grads.len();
    let mat = DMatrix::from_fn(n, k, |i, j| eq_grads[j][i]);
    let max_col_norm = eq_grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if max_col_norm == 0.0 {
        return (false, 0);
    }
    let r = mat.col_piv_qr().r();
    let threshold = RANK_TOL * max_col_norm;
    let rank = (0..r.nrows().min(r.ncols())).filter(|&i| r[(i, i)].abs() > threshold).count();
    (rank == k, rank)
}

/// Existence of a direction strictly decreasing every listed gradient,
/// decided through the hull distance: the condition holds exactly when the
/// origin stays out of the gradient hull. Returns the separating witness
/// when it holds; an empty list holds vacuously.
pub fn check_mfcq(ineq_grads: &[DVector<f64>]) -> Result<(bool, Option<DVector<f64>>)> {
    if ineq_grads.is_empty() {
        return Ok((true, None));
    }
    match gordan_certificate(ineq_grads)? {
        GordanCertificate::Direction(d) => Ok((true, Some(d))),
        GordanCertificate::Weights(_) => Ok((false, None)),
    }
}

/// Classical-condition applicability marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalCq {
    Applicable,
    /// Some active constraint lacks a classical gradient; LICQ/MFCQ are not
    /// defined, though the hull distance itself remains computable from
    /// piecewise gradients.
    NonsmoothNotApplicableClassically,
}

/// Separation verdict over the sampled probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UscVerdict {
    Holds,
    Fails,
}

/// Result of [`usc_verdict`]: the minimal hull distance over infeasible
/// probes, the verdict, classical cross-checks at feasible probes, and the
/// active sets seen at the minimizing probe.
#[derive(Debug, Clone)]
pub struct UscReport {
    /// Minimal distance from the origin to the terminal subdifferential
    /// hull over all probes with positive terminal penalty.
    pub distance: f64,
    pub verdict: UscVerdict,
    pub classical: ClassicalCq,
    /// LICQ over the equality gradients at feasible probes (holds, rank),
    /// aggregated as worst case.
    pub licq: Option<(bool, usize)>,
    /// MFCQ over the active inequality gradients at feasible probes, with a
    /// separating witness when it holds.
    pub mfcq: Option<(bool, Option<DVector<f64>>)>,
    /// Mixed-constraint direction test: inequality gradients projected onto
    /// the nullspace of the equality gradients, then the MFCQ test there.
    pub mixed_direction: Option<(bool, Option<DVector<f64>>)>,
    /// Active sets at the distance-minimizing probe.
    pub active_eq: Vec<usize>,
    pub active_ineq: Vec<usize>,
    pub probes_evaluated: usize,
    pub infeasible_probes: usize,
    pub notes: Vec<String>,
}

/// Evaluate the separation condition over caller-supplied probe points
/// `(x_T, T)`. Probes with positive terminal penalty contribute hull
/// distances; feasible probes contribute classical LICQ/MFCQ cross-checks.
/// Errors when no probe is infeasible, since the condi­tion is only
/// informative away from the admissible set.
pub fn usc_verdict(
    spec: &ProblemSpec,
    probe_points: &[(DVector<f64>, f64)],
    tol_active: f64,
) -> Result<UscReport> {
    let mut distance = f64::INFINITY;
    let mut active_at_min: (Vec<usize>, Vec<usize>) = (vec![], vec![]);
    let mut infeasible = 0usize;
    let mut nonsmooth_active = false;
    let mut licq: Option<(bool, usize)> = None;
    let mut mfcq: Option<(bool, Option<DVector<f64>>)> = None;
    let mut mixed: Option<(bool, Option<DVector<f64>>)> = None;
    let mut notes = Vec::new();

    for (x, t) in probe_points {
        let (value, active_eq, active_ineq) = phi_term(spec, x, *t, tol_active);
        let any_nonsmooth = active_eq.iter().any(|&k| !spec.eq_constraints[k].smooth)
            || active_ineq.iter().any(|&j| !spec.ineq_constraints[j].smooth);
        nonsmooth_active |= any_nonsmooth;

        if value > tol_active {
            infeasible += 1;
            let hull = phi_term_subdifferential(spec, x, *t, tol_active)?;
            let res = min_norm_point(&hull)?;
            if res.distance < distance {
                distance = res.distance;
                active_at_min = (active_eq, active_ineq);
            }
        } else if !any_nonsmooth {
            let eq_grads: Vec<DVector<f64>> = spec
                .eq_constraints
                .iter()
                .map(|c| c.grad(x, *t))
                .collect::<Result<_>>()?;
            let (holds, rank) = check_licq(&eq_grads);
            licq = Some(match licq {
                Some((h0, r0)) => (h0 && holds, r0.min(rank)),
                None => (holds, rank),
            });

            let act_grads: Vec<DVector<f64>> = active_ineq
                .iter()
                .map(|&j| spec.ineq_constraints[j].grad(x, *t))
                .collect::<Result<_>>()?;
            match check_mfcq(&act_grads) {
                Ok((holds, witness)) => {
                    mfcq = Some(match mfcq.take() {
                        Some((h0, w0)) => (h0 && holds, if holds { witness } else { w0 }),
                        None => (holds, witness),
                    });
                }
                Err(Error::BorderlineCertificate { distance }) => {
                    notes.push(format!(
                        "classical inequality check refused at a feasible probe: hull \
                         distance {distance:.3e} is borderline"
                    ));
                }
                Err(other) => return Err(other),
            }

            if !eq_grads.is_empty() && !act_grads.is_empty() {
                let projected = project_out(&act_grads, &eq_grads);
                match check_mfcq(&projected) {
                    Ok(res) => mixed = Some(res),
                    Err(Error::BorderlineCertificate { .. }) => {
                        notes.push("mixed-constraint direction test borderline; skipped".into())
                    }
                    Err(other) => return Err(other),
                }
            }
        }
    }

    if infeasible == 0 {
        return Err(Error::InsufficientProbes);
    }
    if spec.eq_constraints.is_empty() && !spec.ineq_constraints.is_empty() {
        notes.push(
            "inequality-only problem: at feasible probes the zero vector is itself a \
             subgradient of the max, though the generator list excludes it"
                .into(),
        );
    }
    let verdict = if distance > USC_TOL { UscVerdict::Holds } else { UscVerdict::Fails };
    Ok(UscReport {
        distance,
        verdict,
        classical: if nonsmooth_active {
            ClassicalCq::NonsmoothNotApplicableClassically
        } else {
            ClassicalCq::Applicable
        },
        licq,
        mfcq,
        mixed_direction: mixed,
        active_eq: active_at_min.0,
        active_ineq: active_at_min.1,
        probes_evaluated: probe_points.len(),
        infeasible_probes: infeasible,
        notes,
    })
}

/// Project each vector onto the orthogonal complement of the span of
/// `basis_vectors` (via an orthonormal basis from the SVD).
fn project_out(vectors: &[DVector<f64>], basis_vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if basis_vectors.is_empty() {
        return vectors.to_vec();
    }
    let n = basis_vectors[0].len();
    let mat = DMatrix::from_fn(n, basis_vectors.len(), |i, j| basis_vectors[j][i]);
    let svd = mat.svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * sigma_max.max(1.0))
        .count();
    vectors
        .iter()
        .map(|v| {
            let mut out = v.clone();
            for c in 0..rank {
                let q = u.column(c);
                let coeff = q.dot(v);
                out -= DVector::from_column_slice(q.as_slice()) * coeff;
            }
            out
        })
        .collect()
}

/// Probe radii for the default sampler.
pub const PROBE_RADII: [f64; 3] = [1e-3, 1e-2, 1e-1];

/// Probes per radius for the default sampler.
pub const PROBES_PER_RADIUS: usize = 20;

/// Default probe sampler: each reference endpoint itself, plus Gaussian
/// perturbations of its state at three radii. The terminal time of each
/// reference is kept.
pub fn sample_probes(
    reference_endpoints: &[(DVector<f64>, f64)],
    seed: u64,
) -> Vec<(DVector<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::new();
    for (x, t) in reference_endpoints {
        probes.push((x.clone(), *t));
        for &radius in &PROBE_RADII {
            for _ in 0..PROBES_PER_RADIUS {
                let noise = DVector::from_fn(x.len(), |_, _| gaussian(&mut rng) * radius);
                probes.push((x + noise, *t));
            }
        }
    }
    probes
}

/// Standard normal draw by Box–Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
