//! Weighted symmetric nonnegative matrix tri-factorization: find U >= 0 and
//! symmetric S >= 0 approximately minimizing sum_ij W_ij((USU^T)_ij - T_ij)^2.
//!
//! Multiplicative updates with an objective-damping fallback: whenever an
//! update would increase the weighted objective it is blended halfway back
//! toward the previous iterate (and finally reverted), so the recorded
//! objective trace never increases.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;
const MAX_HALVINGS: usize = 20;

/// Nonnegative factors (U: p x k, S: k x k symmetric) of X ~ U S U^T.
#[derive(Debug, Clone)]
pub struct FactorPair {
    u: Array2<f64>,
    s: Array2<f64>,
}

impl FactorPair {
    pub fn new(u: Array2<f64>, s: Array2<f64>) -> Result<Self> {
        if s.nrows() != s.ncols() || u.ncols() != s.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "U is {}x{}, S is {}x{}",
                u.nrows(),
                u.ncols(),
                s.nrows(),
                s.ncols()
            )));
        }
        if u.iter().chain(s.iter()).any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParam(
                "factor entries must be finite and nonnegative".into(),
            ));
        }
        let asym = s
            .indexed_iter()
            .map(|((i, j), &v)| (v - s[[j, i]]).abs())
            .fold(0.0f64, f64::max);
        if asym > 0.0 {
            return Err(Error::InvalidParam("S must be exactly symmetric".into()));
        }
        Ok(Self { u, s })
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn s(&self) -> &Array2<f64> {
        &self.s
    }

    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    /// U S U^T. The floating-point product can drift from symmetry by an
    /// ulp, so the symmetric part is returned.
    pub fn reconstruct(&self) -> Array2<f64> {
        let raw = self.u.dot(&self.s).dot(&self.u.t());
        0.5 * (&raw + &raw.t())
    }
}

/// Elementwise weights and target for the factorization.
#[derive(Debug, Clone)]
pub struct WeightedTarget {
    w: Array2<f64>,
    t: Array2<f64>,
}

impl WeightedTarget {
    pub fn new(w: Array2<f64>, t: Array2<f64>) -> Result<Self> {
        if w.dim() != t.dim() || w.nrows() != w.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "W is {:?}, T is {:?}",
                w.dim(),
                t.dim()
            )));
        }
        if w.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParam("weights must be strictly positive".into()));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("factorization target"));
        }
        for i in 0..w.nrows() {
            for j in (i + 1)..w.ncols() {
                if w[[i, j]] != w[[j, i]] || t[[i, j]] != t[[j, i]] {
                    return Err(Error::InvalidParam("W and T must be symmetric".into()));
                }
            }
        }
        Ok(Self { w, t })
    }

    pub fn p(&self) -> usize {
        self.w.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn target(&self) -> &Array2<f64> {
        &self.t
    }
}

/// sum_ij W_ij ((U S U^T)_ij - T_ij)^2.
pub fn weighted_objective(wt: &WeightedTarget, f: &FactorPair) -> Result<f64> {
    if f.u.nrows() != wt.p() {
        return Err(Error::DimensionMismatch(format!(
            "factors have {} rows, target has {}",
            f.u.nrows(),
            wt.p()
        )));
    }
    let recon = f.reconstruct();
    Ok(objective_of(wt, &recon))
}

fn objective_of(wt: &WeightedTarget, recon: &Array2<f64>) -> f64 {
    let mut total = 0.0;
    for ((i, j), &w) in wt.w.indexed_iter() {
        let d = recon[[i, j]] - wt.t[[i, j]];
        total += w * d * d;
    }
    total
}

/// Factorization result with the per-iteration objective trace.
#[derive(Debug, Clone)]
pub struct FactorizeOutcome {
    pub factors: FactorPair,
    /// Objective after iteration 0 (initialization) and after each update.
    pub objectives: Vec<f64>,
}

fn random_init(wt: &WeightedTarget, k: usize, seed: u64) -> FactorPair {
    let p = wt.p();
    let mean_t = (wt.t.sum() / (p * p) as f64).max(0.0);
    let scale = (mean_t / k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Array2::from_shape_fn((p, k), |_| (rng.gen::<f64>() * scale).max(EPS));
    // Exact zeros are absorbing under multiplicative updates, and a diagonal
    // S would pin U S U^T to the PSD cone; keep every entry positive.
    let s = Array2::from_shape_fn((k, k), |(a, b)| {
        let base = if a == b { 0.9 } else { 0.1 };
        (base * mean_t).max(EPS)
    });
    FactorPair { u, s }
}

/// Blends `cand` halfway back toward `prev` until the objective is no worse
/// than `reference`; reverts entirely after MAX_HALVINGS.
fn damp<F: Fn(&Array2<f64>) -> f64>(
    prev: &Array2<f64>,
    mut cand: Array2<f64>,
    reference: f64,
    objective: F,
) -> (Array2<f64>, f64) {
    let mut obj = objective(&cand);
    let mut halvings = 0;
    while obj > reference && halvings < MAX_HALVINGS {
        cand = 0.5 * &cand + 0.5 * prev;
        obj = objective(&cand);
        halvings += 1;
    }
    if obj > reference {
        (prev.clone(), reference)
    } else {
        (cand, obj)
    }
}

/// Runs `iters` multiplicative updates from `init` (or a seeded random
/// initialization). The returned objective trace is nonincreasing.
pub fn factorize(
    wt: &WeightedTarget,
    k: usize,
    iters: usize,
    seed: u64,
    init: Option<FactorPair>,
) -> Result<FactorizeOutcome> {
    if k < 1 || iters < 1 {
        return Err(Error::InvalidParam("rank and iteration count must be >= 1".into()));
    }
    let p = wt.p();
    let start = match init {
        Some(f) => {
            if f.u.nrows() != p || f.rank() != k {
                return Err(Error::DimensionMismatch(format!(
                    "init factors are {}x{}, expected {}x{}",
                    f.u.nrows(),
                    f.rank(),
                    p,
                    k
                )));
            }
            f
        }
        None => random_init(wt, k, seed),
    };

    let wt_prod = &wt.w * &wt.t;
    let mut u = start.u;
    let mut s = start.s;
    let mut obj = objective_of(wt, &u.dot(&s).dot(&u.t()));
    let mut trace = vec![obj];

    for _ in 0..iters {
        // U-step. U enters the objective quadratically, so the plain
        // multiplicative ratio overshoots; the square root is the usual
        // damping for symmetric factors, and the halving fallback certifies
        // descent.
        let us = u.dot(&s);
        let recon = us.dot(&u.t());
        let weighted_recon = &wt.w * &recon;
        let num = wt_prod.dot(&us).mapv(|v| v.max(0.0));
        let den = weighted_recon.dot(&us) + EPS;
        let cand_u = &u * &(&num / &den).mapv(f64::sqrt);
        let (new_u, new_obj) = damp(&u, cand_u, obj, |cu| {
            objective_of(wt, &cu.dot(&s).dot(&cu.t()))
        });
        u = new_u;
        obj = new_obj;

        // S-step
        let recon = u.dot(&s).dot(&u.t());
        let weighted_recon = &wt.w * &recon;
        let num = u.t().dot(&wt_prod).dot(&u).mapv(|v| v.max(0.0));
        let den = u.t().dot(&weighted_recon).dot(&u) + EPS;
        let cand_s = &s * &(&num / &den);
        let cand_s = 0.5 * (&cand_s + &cand_s.t());
        let (new_s, new_obj) = damp(&s, cand_s, obj, |cs| {
            objective_of(wt, &u.dot(cs).dot(&u.t()))
        });
        s = new_s;
        obj = new_obj;

        trace.push(obj);
    }

    // exact symmetry can drift through damping arithmetic; restore it
    let s = 0.5 * (&s + &s.t().to_owned());
    Ok(FactorizeOutcome {
        factors: FactorPair { u, s },
        objectives: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;
    use rand::Rng;

    fn ones_weight(p: usize) -> Array2<f64> {
        Array2::from_elem((p, p), 1.0)
    }

    fn random_nonneg_vec(p: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
        Array1::from_shape_fn(p, |_| rng.gen_range(0.1..1.0))
    }

    #[test]
    fn exact_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = 8;
        let u = random_nonneg_vec(p, &mut rng);
        let t = Array2::from_shape_fn((p, p), |(i, j)| u[i] * u[j]);
        let wt = WeightedTarget::new(ones_weight(p), t).unwrap();
        let init = FactorPair::new(
            Array2::from_shape_fn((p, 1), |(i, _)| u[i]),
            Array2::from_elem((1, 1), 1.0),
        )
        .unwrap();
        let out = factorize(&wt, 1, 10, 0, Some(init.clone())).unwrap();
        let obj = weighted_objective(&wt, &out.factors).unwrap();
        assert_abs_diff_eq!(obj, 0.0, epsilon = 1e-15);
        for (a, b) in out.factors.u().iter().zip(init.u().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_target_descends() {
        let p = 10;
        // arbitrary symmetric positive weights
        let w = Array2::from_shape_fn((p, p), |(i, j)| 0.3 + ((i * j + i + j) % 5) as f64 * 0.2);
        let wt = WeightedTarget::new(w, Array2::zeros((p, p))).unwrap();
        let out = factorize(&wt, 3, 50, 1, None).unwrap();
        assert!(out.objectives.last().unwrap() <= out.objectives.first().unwrap());
    }

    #[test]
    fn monotone_descent_random_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = 20;
        let mut t = Array2::zeros((p, p));
        for i in 0..p {
            for j in (i + 1)..p {
                let v: f64 = rng.gen_range(-0.2..1.0);
                t[[i, j]] = v;
                t[[j, i]] = v;
            }
        }
        let mut w = Array2::from_elem((p, p), 0.1);
        for i in 0..p {
            for j in (i + 1)..p {
                let v: f64 = rng.gen_range(0.1..1.0);
                w[[i, j]] = v;
                w[[j, i]] = v;
            }
        }
        let wt = WeightedTarget::new(w, t).unwrap();
        let out = factorize(&wt, 4, 60, 7, None).unwrap();
        for pair in out.objectives.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-8, "ascent: {} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn objective_examples() {
        let p = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_nonneg_vec(p, &mut rng);
        let t = Array2::from_shape_fn((p, p), |(i, j)| u[i] * u[j]);
        let wt = WeightedTarget::new(ones_weight(p), t.clone()).unwrap();
        let perfect = FactorPair::new(
            Array2::from_shape_fn((p, 1), |(i, _)| u[i]),
            Array2::from_elem((1, 1), 1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(weighted_objective(&wt, &perfect).unwrap(), 0.0, epsilon = 1e-20);

        let zero = FactorPair::new(Array2::zeros((p, 1)), Array2::zeros((1, 1))).unwrap();
        let expect: f64 = t.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(weighted_objective(&wt, &zero).unwrap(), expect, epsilon = 1e-12);

        let doubled = WeightedTarget::new(2.0 * ones_weight(p), t).unwrap();
        assert_abs_diff_eq!(
            weighted_objective(&doubled, &zero).unwrap(),
            2.0 * expect,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rank_one_recovery() {
        let p = 12;
        let mut hits = 0;
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let u = random_nonneg_vec(p, &mut rng);
            let t = Array2::from_shape_fn((p, p), |(i, j)| u[i] * u[j]);
            let norm: f64 = t.iter().map(|v| v * v).sum();
            let wt = WeightedTarget::new(ones_weight(p), t).unwrap();
            let out = factorize(&wt, 1, 500, seed, None).unwrap();
            let obj = weighted_objective(&wt, &out.factors).unwrap();
            if obj / norm <= 1e-3 {
                hits += 1;
            }
        }
        assert!(hits >= 4, "rank-1 recovery in only {hits}/5 seeds");
    }

    #[test]
    fn nonnegative_and_symmetric_iterates() {
        let p = 9;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut t = Array2::zeros((p, p));
        for i in 0..p {
            for j in (i + 1)..p {
                let v: f64 = rng.gen_range(-0.5..1.0);
                t[[i, j]] = v;
                t[[j, i]] = v;
            }
        }
        let wt = WeightedTarget::new(ones_weight(p), t).unwrap();
        let out = factorize(&wt, 3, 40, 9, None).unwrap();
        assert!(out.factors.u().iter().all(|&v| v >= 0.0));
        assert!(out.factors.s().iter().all(|&v| v >= 0.0));
        let recon = out.factors.reconstruct();
        for i in 0..p {
            for j in 0..p {
                assert!((recon[[i, j]] - recon[[j, i]]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(WeightedTarget::new(Array2::zeros((3, 3)), Array2::zeros((3, 3))).is_err());
        let w = ones_weight(3);
        assert!(WeightedTarget::new(w.clone(), Array2::zeros((4, 4))).is_err());
        let wt = WeightedTarget::new(w, Array2::zeros((3, 3))).unwrap();
        assert!(factorize(&wt, 0, 5, 0, None).is_err());
        let bad_init = FactorPair::new(Array2::zeros((2, 2)), Array2::zeros((2, 2))).unwrap();
        assert!(factorize(&wt, 2, 5, 0, Some(bad_init)).is_err());
    }
}
