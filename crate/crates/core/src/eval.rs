//! Experiment metrics (correct-edges-vs-K curves, two-release evaluation)
//! and numeric diagnostics for the recovery-error theory: label-dependent
//! error, the Monte Carlo slope check relating it to the plain recovery
//! error, and the closed-form bound components.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::ScoreMatrix;
use crate::error::{Error, Result};
use crate::graph::{Network, ObservationMask};
use crate::pipeline::PredictionSet;

/// Correct-prediction counts at a list of budgets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationCurve {
    pub ks: Vec<usize>,
    pub correct: Vec<usize>,
    /// p(p-1)/2 for the evaluated graph, for fraction-of-pairs axes.
    pub total_pairs: usize,
}

/// For each K in `ks`, counts how many of the first K predictions are true
/// edges that were not already observed.
pub fn correct_curve(
    pred: &PredictionSet,
    truth: &Network,
    mask: &ObservationMask,
    ks: &[usize],
) -> Result<EvaluationCurve> {
    if ks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParam("budgets must be sorted ascending".into()));
    }
    if let Some(&max_k) = ks.last() {
        if max_k > pred.len() {
            return Err(Error::InvalidParam(format!(
                "budget {max_k} exceeds the {} predictions",
                pred.len()
            )));
        }
    }
    let entries = pred.entries();
    let mut correct = Vec::with_capacity(ks.len());
    let mut hits = 0usize;
    let mut cursor = 0usize;
    for &k in ks {
        while cursor < k {
            let e = &entries[cursor];
            if truth.contains(e.u, e.v) && !mask.contains(e.u, e.v) {
                hits += 1;
            }
            cursor += 1;
        }
        correct.push(hits);
    }
    let p = truth.p();
    Ok(EvaluationCurve {
        ks: ks.to_vec(),
        correct,
        total_pairs: p * (p - 1) / 2,
    })
}

/// Fraction of edges that exist only in the newer release recovered by the
/// top-K predictions (nodes restricted to the older release).
pub fn release_eval(old: &Network, new: &Network, pred: &PredictionSet, k: usize) -> Result<f64> {
    let p_old = old.p();
    let new_only: Vec<(usize, usize)> = new
        .edges()
        .filter(|&(u, v)| u < p_old && v < p_old && !old.contains(u, v))
        .collect();
    if new_only.is_empty() {
        return Err(Error::InvalidParam(
            "the newer release adds no edges over the older one".into(),
        ));
    }
    for (u, v) in old.edges() {
        if !new.contains(u, v) {
            return Err(Error::InvalidParam(format!(
                "older-release edge ({u},{v}) missing from the newer release"
            )));
        }
    }
    let recovered = pred
        .entries()
        .iter()
        .take(k)
        .filter(|e| new_only.contains(&(e.u, e.v)))
        .count();
    Ok(recovered as f64 / new_only.len() as f64)
}

/// The default release-eval budget: 0.05 * p(p-1)/2 of the older release.
pub fn default_release_budget(p_old: usize) -> usize {
    (0.05 * (p_old * (p_old - 1) / 2) as f64).round() as usize
}

fn thresholded(x: &ScoreMatrix, q: f64) -> Vec<bool> {
    let p = x.p();
    let mut t = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            t.push(x.get(i, j) > q);
        }
    }
    t
}

/// Reweighted 0/1 error of thr(X) against the observed mask, summed over the
/// full matrix (both symmetric positions count, matching the sum_ij
/// convention; unordered-pair counts are half of this).
pub fn label_dependent_error(
    x: &ScoreMatrix,
    mask: &ObservationMask,
    rho: f64,
    q: f64,
) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParam(format!("q must lie in (0,1), got {q}")));
    }
    if x.p() != mask.p() {
        return Err(Error::DimensionMismatch("score/mask size mismatch".into()));
    }
    let p = x.p();
    let mut total = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let predicted = x.get(i, j) > q;
            let observed = mask.contains(i, j);
            if !predicted && observed {
                total += 1.0 - rho / 2.0;
            } else if predicted && !observed {
                total += rho / 2.0;
            }
        }
    }
    Ok(total)
}

/// Exact recovery error of a fixed matrix against the true adjacency,
/// counted over the full matrix.
pub fn recovery_error(x: &ScoreMatrix, truth: &Network, q: f64) -> usize {
    let p = x.p();
    let mut mistakes = 0usize;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let predicted = x.get(i, j) > q;
            if predicted != truth.contains(i, j) {
                mistakes += 1;
            }
        }
    }
    mistakes
}

/// Result of the Monte Carlo affinity check.
#[derive(Debug, Clone)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// (exact recovery error, mean sampled label-dependent error) pairs.
    pub points: Vec<(f64, f64)>,
}

/// Estimates E_Omega[R_rho(X; Omega)] for each fixed candidate matrix by
/// sampling masks from the true edge set at rate rho, and regresses it
/// against the exact recovery error R(X). The expected slope is rho/2.
pub fn lemma_a1_check(
    truth: &Network,
    rho: f64,
    q: f64,
    candidates: &[ScoreMatrix],
    n_samples: usize,
    seed: u64,
) -> Result<SlopeEstimate> {
    if candidates.len() < 3 {
        return Err(Error::InvalidParam("need at least 3 candidate matrices".into()));
    }
    if n_samples < 1000 {
        return Err(Error::InvalidParam("need at least 1000 samples".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParam(format!("rho must lie in (0,1), got {rho}")));
    }
    let p = truth.p();
    for c in candidates {
        if c.p() != p {
            return Err(Error::DimensionMismatch("candidate size mismatch".into()));
        }
    }

    let edges: Vec<(usize, usize)> = truth.edges().collect();
    let thresholds: Vec<Vec<bool>> = candidates.iter().map(|c| thresholded(c, q)).collect();
    // Per candidate: thr at each true edge, and the constant contribution of
    // non-edge pairs (their Omega entry is always 0).
    let edge_thr: Vec<Vec<bool>> = thresholds
        .iter()
        .map(|t| edges.iter().map(|&(u, v)| t[u * p + v]).collect())
        .collect();
    let nonedge_pos: Vec<f64> = thresholds
        .iter()
        .map(|t| {
            let mut count = 0usize;
            for i in 0..p {
                for j in 0..p {
                    if i != j && t[i * p + j] && !truth.contains(i, j) {
                        count += 1;
                    }
                }
            }
            count as f64 * (rho / 2.0)
        })
        .collect();

    let sample = |s: usize| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
        let kept: Vec<bool> = (0..edges.len()).map(|_| rng.gen::<f64>() < rho).collect();
        edge_thr
            .iter()
            .zip(&nonedge_pos)
            .map(|(thr, base)| {
                let mut total = *base;
                for (&keep, &predicted) in kept.iter().zip(thr) {
                    // both symmetric positions of the pair contribute
                    if keep && !predicted {
                        total += 2.0 * (1.0 - rho / 2.0);
                    } else if !keep && predicted {
                        total += 2.0 * (rho / 2.0);
                    }
                }
                total
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let per_sample: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n_samples).into_par_iter().map(sample).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_sample: Vec<Vec<f64>> = (0..n_samples).map(sample).collect();

    let mut means = vec![0.0; candidates.len()];
    for row in &per_sample {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n_samples as f64;
    }

    let points: Vec<(f64, f64)> = candidates
        .iter()
        .zip(&means)
        .map(|(c, &m)| (recovery_error(c, truth, q) as f64, m))
        .collect();

    let n = points.len() as f64;
    let mean_r = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_r) * (p.0 - mean_r)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParam(
            "all candidates have identical recovery error".into(),
        ));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_r) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    Ok(SlopeEstimate {
        slope,
        intercept: mean_y - slope * mean_r,
        points,
    })
}

/// gamma = max(1/q^2, 1/((3-2 rho)(q - (2-rho)/(3-2 rho))^2)), defined for
/// 0 < q < (2-rho)/(3-2 rho).
pub fn gamma(q: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParam(format!("rho must lie in (0,1], got {rho}")));
    }
    let pivot = (2.0 - rho) / (3.0 - 2.0 * rho);
    if !(q > 0.0 && q < pivot) {
        return Err(Error::InvalidParam(format!(
            "q must lie in (0, {pivot}), got {q}"
        )));
    }
    let first = 1.0 / (q * q);
    let second = 1.0 / ((3.0 - 2.0 * rho) * (q - pivot) * (q - pivot));
    Ok(first.max(second))
}

/// Inputs to the recovery-error bound.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    /// Nuclear-norm bound on the matrix class.
    pub t: f64,
    /// Prior bound on the matrix class.
    pub r: f64,
    /// Total degree, twice the edge count.
    pub s: f64,
    pub d_star_max: f64,
    pub d_max: f64,
    pub alpha: f64,
    pub rho: f64,
    pub q: f64,
    pub delta: f64,
    /// The universal constant in the spectral term; not specified by the
    /// theory, so it must be supplied (1.0 is a conventional placeholder).
    pub c_universal: f64,
}

/// The bound's pieces and total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBreakdown {
    pub gamma: f64,
    pub a_term: f64,
    pub b_term: f64,
    pub deviation: f64,
    pub bound: f64,
}

/// The nuclear-norm complexity term A = t C (2 sqrt(d*_max) + s^(1/4)).
pub fn bound_a_term(t: f64, c_universal: f64, d_star_max: f64, s: f64) -> f64 {
    t * c_universal * (2.0 * d_star_max.sqrt() + s.powf(0.25))
}

/// The prior complexity term B = r * log2(d_max + 1)^alpha.
pub fn bound_b_term(r: f64, d_max: f64, alpha: f64) -> f64 {
    r * (d_max + 1.0).log2().powf(alpha)
}

/// The concentration term sqrt(s * ln(2/delta) / 2), natural log.
pub fn deviation_term(s: f64, delta: f64) -> f64 {
    (s * (2.0 / delta).ln() / 2.0).sqrt()
}

/// Full right-hand side: (4 gamma (2-rho)/rho)(2 min(A,B) + deviation).
pub fn bound_value(inputs: &BoundInputs) -> Result<BoundBreakdown> {
    let BoundInputs {
        t,
        r,
        s,
        d_star_max,
        d_max,
        alpha,
        rho,
        q,
        delta,
        c_universal,
    } = *inputs;
    for (name, v) in [
        ("t", t),
        ("r", r),
        ("s", s),
        ("d_star_max", d_star_max),
        ("d_max", d_max),
        ("alpha", alpha),
        ("c_universal", c_universal),
    ] {
        if !(v > 0.0) {
            return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
        }
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!("delta must lie in (0,1), got {delta}")));
    }
    let g = gamma(q, rho)?;
    let a_term = bound_a_term(t, c_universal, d_star_max, s);
    let b_term = bound_b_term(r, d_max, alpha);
    let deviation = deviation_term(s, delta);
    let bound = 4.0 * g * (2.0 - rho) / rho * (2.0 * a_term.min(b_term) + deviation);
    Ok(BoundBreakdown {
        gamma: g,
        a_term,
        b_term,
        deviation,
        bound,
    })
}
