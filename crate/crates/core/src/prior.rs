//! Node-specific degree prior: ranked per-row coefficients, prior evaluation,
//! the value-rearrangement construction, and the coefficient-gap bound.
//!
//! For a node with target degree d, the k-th strongest candidate edge is
//! charged (H_k/H_d)^alpha with H_k = ln(k+1), so coefficients cross 1.0
//! exactly at rank d: slots up to the target degree are cheap and slots
//! beyond it grow increasingly expensive.

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::pipeline::DegreeTarget;

/// Below this, alpha is treated as the exact L1 limit (all coefficients 1).
pub const ALPHA_L1_LIMIT: f64 = 1e-6;

/// H_k = ln(k+1) for rank k >= 1; strictly increasing in k.
pub fn h_value(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParam(format!("rank k must be >= 1, got {k}")));
    }
    Ok(((k + 1) as f64).ln())
}

/// Per-node penalty coefficients b(k) = (H_k / H_{d'})^alpha for k = 1..p-1.
///
/// Strictly increasing for alpha > 0 with b(d') = 1 exactly; the alpha -> 0
/// limit is the all-ones vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    b: Vec<f64>,
}

impl CoefficientVector {
    pub fn values(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

/// Builds the coefficient vector for one node with amplified degree
/// `d_amplified` on a p-node graph.
pub fn coefficients(d_amplified: usize, alpha: f64, p: usize) -> Result<CoefficientVector> {
    if p < 2 {
        return Err(Error::InvalidParam("need at least two nodes".into()));
    }
    if d_amplified < 1 || d_amplified > p - 1 {
        return Err(Error::InvalidParam(format!(
            "degree {d_amplified} out of range [1, {}]",
            p - 1
        )));
    }
    if alpha < 0.0 {
        return Err(Error::InvalidParam(format!("alpha must be >= 0, got {alpha}")));
    }
    let b = if alpha <= ALPHA_L1_LIMIT {
        vec![1.0; p - 1]
    } else {
        let h_d = h_value(d_amplified)?;
        (1..p)
            .map(|k| (h_value(k).expect("k >= 1") / h_d).powf(alpha))
            .collect()
    };
    Ok(CoefficientVector { b })
}

/// Degree-prior hyperparameters plus the per-node degree targets.
#[derive(Debug, Clone)]
pub struct PriorConfig {
    pub alpha: f64,
    pub c: f64,
    pub degrees: DegreeTarget,
}

impl PriorConfig {
    pub fn new(alpha: f64, c: f64, degrees: DegreeTarget) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::InvalidParam(format!("alpha must be >= 0, got {alpha}")));
        }
        if c < 1.0 {
            return Err(Error::InvalidParam(format!(
                "amplification factor c must be >= 1, got {c}"
            )));
        }
        let p = degrees.p();
        for (i, &dp) in degrees.amplified().iter().enumerate() {
            if dp < 1 || dp > p - 1 {
                return Err(Error::InvalidParam(format!(
                    "amplified degree {dp} at node {i} out of range [1, {}]",
                    p - 1
                )));
            }
        }
        Ok(Self { alpha, c, degrees })
    }

    pub fn p(&self) -> usize {
        self.degrees.p()
    }

    /// Coefficient vector for node `i`, built from its amplified degree.
    pub fn coefficients_for(&self, i: usize) -> CoefficientVector {
        coefficients(self.degrees.amplified()[i], self.alpha, self.p())
            .expect("validated at construction")
    }
}

fn check_square(x: &Array2<f64>, p: usize) -> Result<()> {
    if x.nrows() != p || x.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "expected {p}x{p} matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

fn check_symmetric_nonneg(x: &Array2<f64>) -> Result<()> {
    let p = x.nrows();
    let mut asym2 = 0.0;
    let mut norm2 = 0.0;
    for i in 0..p {
        for j in 0..p {
            let v = x[[i, j]];
            if !v.is_finite() {
                return Err(Error::NonFinite("prior input"));
            }
            norm2 += v * v;
            if i != j {
                if v < 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "negative entry {v} at ({i},{j})"
                    )));
                }
                let d = v - x[[j, i]];
                asym2 += d * d;
            }
        }
    }
    if asym2.sqrt() > 1e-9 * norm2.sqrt().max(1.0) {
        return Err(Error::InvalidParam("asymmetric input matrix".into()));
    }
    Ok(())
}

/// S_H(X, d, alpha) = sum_i sum_k b_i(k) X_{i,[k]} where X_{i,[k]} is the
/// k-th largest off-diagonal entry of row i and b_i is built from d[i].
pub fn evaluate_prior_with_degrees(x: &Array2<f64>, d: &[usize], alpha: f64) -> Result<f64> {
    let p = d.len();
    check_square(x, p)?;
    check_symmetric_nonneg(x)?;
    let mut total = 0.0;
    let mut row = Vec::with_capacity(p.saturating_sub(1));
    for i in 0..p {
        let b = coefficients(d[i], alpha, p)?;
        row.clear();
        for j in 0..p {
            if j != i {
                row.push(x[[i, j]]);
            }
        }
        row.sort_by(|a, b| b.total_cmp(a));
        total += row.iter().zip(b.values()).map(|(v, c)| v * c).sum::<f64>();
    }
    Ok(total)
}

/// Prior value using the config's amplified degrees.
pub fn evaluate_prior(x: &Array2<f64>, config: &PriorConfig) -> Result<f64> {
    evaluate_prior_with_degrees(x, config.degrees.amplified(), config.alpha)
}

/// Gap between the penalty coefficients at ranks t+delta and t:
/// (H_{t+delta}^alpha - H_t^alpha) / H_{d'}^alpha.
///
/// For alpha <= 1 the gap is bounded by [`coefficient_gap_bound`]; for
/// alpha > 1 that bound can be exceeded (e.g. t=1,delta=1), so it is only
/// asserted in the provable range.
pub fn coefficient_gap(
    t: usize,
    delta: usize,
    d_amplified: usize,
    alpha: f64,
    p: usize,
) -> Result<f64> {
    if t < 1 || t + delta > p - 1 {
        return Err(Error::InvalidParam(format!(
            "ranks t={t}, t+delta={} out of range [1, {}]",
            t + delta,
            p - 1
        )));
    }
    if d_amplified < 1 || d_amplified > p - 1 {
        return Err(Error::InvalidParam(format!("degree {d_amplified} out of range")));
    }
    if delta == 0 || alpha <= ALPHA_L1_LIMIT {
        return Ok(0.0);
    }
    let h_d = h_value(d_amplified)?;
    let gap = (h_value(t + delta)?.powf(alpha) - h_value(t)?.powf(alpha)) / h_d.powf(alpha);
    if alpha <= 1.0 {
        debug_assert!(gap <= coefficient_gap_bound(delta, d_amplified, alpha)? + 1e-12);
    }
    Ok(gap)
}

/// The closed-form gap bound (ln(delta+1)/ln(d'+1))^alpha.
pub fn coefficient_gap_bound(delta: usize, d_amplified: usize, alpha: f64) -> Result<f64> {
    if delta == 0 {
        return Ok(0.0);
    }
    Ok((((delta + 1) as f64).ln() / ((d_amplified + 1) as f64).ln()).powf(alpha))
}

/// Deterministic Havel-Hakimi realization of a degree sequence; errors when
/// the sequence is not graphical.
fn havel_hakimi(d: &[usize]) -> Result<BTreeSet<(usize, usize)>> {
    let p = d.len();
    let mut residual = d.to_vec();
    let mut edges = BTreeSet::new();
    loop {
        let u = (0..p)
            .max_by_key(|&i| (residual[i], std::cmp::Reverse(i)))
            .expect("nonempty");
        if residual[u] == 0 {
            break;
        }
        let need = residual[u];
        residual[u] = 0;
        let mut partners: Vec<usize> = (0..p).filter(|&v| v != u && residual[v] > 0).collect();
        partners.sort_by_key(|&v| (std::cmp::Reverse(residual[v]), v));
        if partners.len() < need {
            return Err(Error::InfeasibleDegrees(
                "degree sequence is not graphical".into(),
            ));
        }
        for &v in partners.iter().take(need) {
            residual[v] -= 1;
            edges.insert(if u < v { (u, v) } else { (v, u) });
        }
    }
    Ok(edges)
}

/// Greedy placement: assign slots to the descending value sequence, always
/// choosing the empty pair (i,j) minimizing b_i(A_i+1) + b_j(A_j+1), ties by
/// lexicographically smallest (i,j). When `top_k_edges` is given, the first
/// `k_edges` placements are restricted to that edge set.
fn greedy_placement(
    p: usize,
    k_edges: usize,
    tables: &[CoefficientVector],
    top_k_edges: Option<&BTreeSet<(usize, usize)>>,
) -> (Vec<(usize, usize)>, Vec<usize>) {
    let n_slots = p * (p - 1) / 2;
    let mut filled = vec![false; p * p];
    let mut counts = vec![0usize; p];
    let mut order = Vec::with_capacity(n_slots);
    let mut degrees_at_k = vec![0usize; p];

    for s in 0..n_slots {
        let restrict = top_k_edges.filter(|_| s < k_edges);
        let mut best: Option<(f64, (usize, usize))> = None;
        let mut consider = |i: usize, j: usize| {
            if filled[i * p + j] {
                return;
            }
            let sum = tables[i].values()[counts[i]] + tables[j].values()[counts[j]];
            let better = match best {
                None => true,
                Some((bs, bp)) => sum < bs || (sum == bs && (i, j) < bp),
            };
            if better {
                best = Some((sum, (i, j)));
            }
        };
        match restrict {
            Some(edges) => {
                for &(i, j) in edges {
                    consider(i, j);
                }
            }
            None => {
                for i in 0..p {
                    for j in (i + 1)..p {
                        consider(i, j);
                    }
                }
            }
        }
        let (_, (i, j)) = best.expect("an empty slot always exists");
        filled[i * p + j] = true;
        counts[i] += 1;
        counts[j] += 1;
        order.push((i, j));
        if s + 1 == k_edges {
            degrees_at_k.copy_from_slice(&counts);
        }
    }
    (order, degrees_at_k)
}

/// Rearranges the entries of a symmetric nonnegative matrix so that its
/// top-K entries induce the target degree sequence while never increasing
/// the degree prior.
///
/// Sorts the upper-diagonal entries descending and re-places them greedily
/// by smallest coefficient sum. Tie patterns among equal coefficients can
/// trap the plain greedy with all remaining capacity on already-filled
/// slots; when that happens the first K placements are re-run restricted to
/// a Havel-Hakimi realization of the target degrees, which cannot collide.
pub fn rearrange(
    x: &Array2<f64>,
    target_degrees: &[usize],
    k_edges: usize,
    alpha: f64,
) -> Result<Array2<f64>> {
    let p = target_degrees.len();
    check_square(x, p)?;
    check_symmetric_nonneg(x)?;
    let total: usize = target_degrees.iter().sum();
    if total != 2 * k_edges {
        return Err(Error::InfeasibleDegrees(format!(
            "sum of degrees {total} != 2K = {}",
            2 * k_edges
        )));
    }
    for (i, &di) in target_degrees.iter().enumerate() {
        if di < 1 || di > p - 1 {
            return Err(Error::InfeasibleDegrees(format!(
                "degree {di} at node {i} out of range [1, {}]",
                p - 1
            )));
        }
    }

    let mut values = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            values.push(x[[i, j]]);
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));

    let tables: Vec<CoefficientVector> = target_degrees
        .iter()
        .map(|&di| coefficients(di, alpha, p))
        .collect::<Result<_>>()?;

    let (mut order, degrees_at_k) = greedy_placement(p, k_edges, &tables, None);
    if degrees_at_k != target_degrees {
        let realization = havel_hakimi(target_degrees)?;
        let (fallback, fallback_deg) = greedy_placement(p, k_edges, &tables, Some(&realization));
        debug_assert_eq!(fallback_deg, target_degrees);
        order = fallback;
    }

    let mut out = Array2::zeros((p, p));
    for (s, &(i, j)) in order.iter().enumerate() {
        out[[i, j]] = values[s];
        out[[j, i]] = values[s];
    }
    Ok(out)
}
