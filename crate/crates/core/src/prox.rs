//! Exact prox of the sorted increasing-weight penalty under a nonnegativity
//! constraint: min_{x >= 0} (1/2)||x - a||^2 + tau * sum_k b(k) x_[k],
//! where x_[k] is the k-th largest entry of x and b is nondecreasing.
//!
//! An optimal solution orders x like a (swapping two out-of-order entries
//! never increases the quadratic term and leaves the sorted penalty
//! unchanged), so the problem reduces to an isotonic regression on the
//! shifted values a_(i) - tau*b(i), solved by pool-adjacent-violators.

use crate::error::{Error, Result};

/// One per-node subproblem.
#[derive(Debug, Clone)]
pub struct ProxProblem {
    a: Vec<f64>,
    b: Vec<f64>,
    tau: f64,
}

impl ProxProblem {
    pub fn new(a: Vec<f64>, b: Vec<f64>, tau: f64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "a has length {}, b has length {}",
                a.len(),
                b.len()
            )));
        }
        if tau < 0.0 {
            return Err(Error::InvalidParam(format!("tau must be >= 0, got {tau}")));
        }
        if b.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParam("weights must be nondecreasing".into()));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prox problem"));
        }
        Ok(Self { a, b, tau })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Pool-adjacent-violators projection onto nonincreasing sequences,
/// in place over (value, width) blocks.
fn pav_nonincreasing(t: &[f64], out: &mut Vec<f64>) {
    // (sum, count) per merged block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(t.len());
    for &v in t {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s2, c2) = blocks[blocks.len() - 1];
            let (s1, c1) = blocks[blocks.len() - 2];
            if s2 / c2 as f64 > s1 / c1 as f64 {
                blocks.pop();
                let last = blocks.last_mut().unwrap();
                *last = (s1 + s2, c1 + c2);
            } else {
                break;
            }
        }
    }
    out.clear();
    for (s, c) in blocks {
        let mean = s / c as f64;
        out.extend(std::iter::repeat(mean).take(c));
    }
}

/// Exact minimizer; O(n log n).
pub fn prox(problem: &ProxProblem) -> Vec<f64> {
    prox_raw(&problem.a, &problem.b, problem.tau)
}

pub(crate) fn prox_raw(a: &[f64], b: &[f64], tau: f64) -> Vec<f64> {
    let n = a.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]).then(i.cmp(&j)));
    let shifted: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(rank, &idx)| a[idx] - tau * b[rank])
        .collect();
    let mut fitted = Vec::new();
    pav_nonincreasing(&shifted, &mut fitted);
    let mut x = vec![0.0; n];
    for (rank, &idx) in order.iter().enumerate() {
        x[idx] = fitted[rank].max(0.0);
    }
    x
}

/// (1/2)||x - a||^2 + tau * sum_k b(k) x_[k], the eta-factored objective.
pub fn prox_objective(problem: &ProxProblem, x: &[f64]) -> Result<f64> {
    if x.len() != problem.len() {
        return Err(Error::DimensionMismatch(format!(
            "x has length {}, problem has length {}",
            x.len(),
            problem.len()
        )));
    }
    let quad: f64 = x
        .iter()
        .zip(&problem.a)
        .map(|(xi, ai)| (xi - ai) * (xi - ai))
        .sum();
    let mut sorted = x.to_vec();
    sorted.sort_by(|u, v| v.total_cmp(u));
    let penalty: f64 = sorted.iter().zip(&problem.b).map(|(xi, bi)| xi * bi).sum();
    Ok(0.5 * quad + problem.tau * penalty)
}

/// Solves a batch of independent subproblems, in parallel when the
/// `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn prox_batch(problems: &[ProxProblem]) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    problems.par_iter().map(prox).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn prox_batch(problems: &[ProxProblem]) -> Vec<Vec<f64>> {
    prox_batch_sequential(problems)
}

/// Sequential reference path for the batch solver.
pub fn prox_batch_sequential(problems: &[ProxProblem]) -> Vec<Vec<f64>> {
    problems.iter().map(prox).collect()
}
