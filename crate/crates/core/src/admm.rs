//! ADMM solver for the prior-regularized completion objective: alternates a
//! weighted tri-factorization step, a symmetric prox step solved by dual
//! decomposition into per-node subproblems, and a scaled dual update.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::ObservationMask;
use crate::prior::{CoefficientVector, PriorConfig};
use crate::prox::prox_raw;
use crate::trifactor::{factorize, FactorPair, WeightedTarget};

/// Symmetric nonnegative score matrix with a zero diagonal; edges are read
/// off its largest upper-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    x: Array2<f64>,
}

impl ScoreMatrix {
    /// Validates the invariants: square, entries finite and >= 0, diagonal
    /// exactly zero, symmetric to 1e-9 relative Frobenius tolerance.
    pub fn new(x: Array2<f64>) -> Result<Self> {
        if x.nrows() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "score matrix is {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let p = x.nrows();
        let mut asym2 = 0.0;
        let mut norm2 = 0.0;
        for i in 0..p {
            if x[[i, i]] != 0.0 {
                return Err(Error::InvalidParam(format!(
                    "diagonal entry at ({i},{i}) must be zero"
                )));
            }
            for j in 0..p {
                let v = x[[i, j]];
                if !v.is_finite() {
                    return Err(Error::NonFinite("score matrix"));
                }
                if v < 0.0 {
                    return Err(Error::InvalidParam(format!("negative score at ({i},{j})")));
                }
                norm2 += v * v;
                let d = v - x[[j, i]];
                asym2 += d * d;
            }
        }
        if asym2.sqrt() > 1e-9 * norm2.sqrt().max(1.0) {
            return Err(Error::InvalidParam("score matrix is asymmetric".into()));
        }
        Ok(Self { x })
    }

    /// Symmetrizes, clamps negatives, zeroes the diagonal.
    pub fn from_raw(x: &Array2<f64>) -> Result<Self> {
        let mut sym = 0.5 * (x + &x.t());
        sym.mapv_inplace(|v| v.max(0.0));
        for i in 0..sym.nrows() {
            sym[[i, i]] = 0.0;
        }
        Self::new(sym)
    }

    pub fn p(&self) -> usize {
        self.x.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[[i, j]]
    }
}

/// Solver parameters. `dual_step` defaults to eta/2.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Loss weight parameter in (0,1).
    pub rho: f64,
    /// Prior strength, >= 0.
    pub lambda: f64,
    /// ADMM penalty, > 0.
    pub eta: f64,
    /// Factorization rank.
    pub rank: usize,
    pub outer_iters: usize,
    pub inner_factorize_iters: usize,
    pub dual_iters: usize,
    pub dual_step: f64,
    pub tol_primal: f64,
    /// Tolerance on the dual residual eta*||X_{t+1} - X_t||/max(1,||X||);
    /// the split constraint alone can be satisfied far from the optimum.
    pub tol_dual: f64,
    pub tol_sym: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 0.3,
            lambda: 0.1,
            eta: 1.0,
            rank: 40,
            outer_iters: 50,
            inner_factorize_iters: 30,
            dual_iters: 20,
            dual_step: 0.25,
            tol_primal: 1e-4,
            tol_dual: 1e-2,
            tol_sym: 1e-4,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParam(format!("rho must lie in (0,1), got {}", self.rho)));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParam("lambda must be >= 0".into()));
        }
        if self.eta <= 0.0 || self.dual_step <= 0.0 {
            return Err(Error::InvalidParam("eta and dual_step must be > 0".into()));
        }
        if self.tol_primal <= 0.0 || self.tol_dual <= 0.0 || self.tol_sym <= 0.0 {
            return Err(Error::InvalidParam("tolerances must be > 0".into()));
        }
        if self.rank < 1 || self.outer_iters < 1 || self.inner_factorize_iters < 1 || self.dual_iters < 1
        {
            return Err(Error::InvalidParam("iteration counts and rank must be >= 1".into()));
        }
        Ok(())
    }
}

/// The two-level loss weights M: 1 - rho/2 on observed pairs, rho/2 on
/// unobserved pairs, 0 on the diagonal.
#[derive(Debug, Clone)]
pub struct LossWeights {
    m: Array2<f64>,
}

impl LossWeights {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.m
    }
}

pub fn build_loss_weights(mask: &ObservationMask, rho: f64) -> Result<LossWeights> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParam(format!("rho must lie in (0,1), got {rho}")));
    }
    let p = mask.p();
    let mut m = Array2::from_elem((p, p), rho / 2.0);
    for i in 0..p {
        m[[i, i]] = 0.0;
    }
    for (u, v) in mask.observed() {
        m[[u, v]] = 1.0 - rho / 2.0;
        m[[v, u]] = 1.0 - rho / 2.0;
    }
    Ok(LossWeights { m })
}

fn frob(x: &Array2<f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// (eta/2)||X - A||_F^2 + lambda * S_H(X, d', alpha); the objective that
/// [`solve_step_two`] approximately minimizes over symmetric nonnegative X.
pub fn step_two_objective(
    x: &ScoreMatrix,
    a: &Array2<f64>,
    prior: &PriorConfig,
    lambda: f64,
    eta: f64,
) -> Result<f64> {
    let diff = x.matrix() - a;
    let quad = 0.5 * eta * diff.iter().map(|v| v * v).sum::<f64>();
    let penalty = crate::prior::evaluate_prior(x.matrix(), prior)?;
    Ok(quad + lambda * penalty)
}

fn prox_all_columns(
    aprime: &Array2<f64>,
    tables: &[CoefficientVector],
    tau: f64,
) -> Vec<Vec<f64>> {
    let p = aprime.nrows();
    let column = |i: usize| {
        let mut a_col = Vec::with_capacity(p - 1);
        for j in 0..p {
            if j != i {
                a_col.push(aprime[[j, i]]);
            }
        }
        prox_raw(&a_col, tables[i].values(), tau)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..p).into_par_iter().map(column).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..p).map(column).collect()
    }
}

/// Approximately solves min_{X>=0} (eta/2)||X - A||_F^2 + lambda S_H(X)
/// subject to X = X^T, by dual decomposition: each node's column is an
/// independent prox problem, and a Lagrangian matrix B absorbs the asymmetry
/// residual. Returns the symmetrized, clamped, zero-diagonal result.
pub fn solve_step_two(
    a: &Array2<f64>,
    prior: &PriorConfig,
    lambda: f64,
    eta: f64,
    dual_iters: usize,
    dual_step: f64,
    tol_sym: f64,
) -> Result<ScoreMatrix> {
    let p = prior.p();
    if a.nrows() != p || a.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, prior expects {p}x{p}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("step-two input"));
    }
    if lambda < 0.0 || eta <= 0.0 || dual_step <= 0.0 || tol_sym <= 0.0 || dual_iters < 1 {
        return Err(Error::InvalidParam("step-two parameters out of range".into()));
    }

    if lambda == 0.0 {
        // the prox degenerates to a projection and the constrained minimizer
        // is the clamped symmetric part of A
        return ScoreMatrix::from_raw(a);
    }

    let tau = lambda / eta;
    let tables: Vec<CoefficientVector> = (0..p).map(|i| prior.coefficients_for(i)).collect();
    let mut b = Array2::<f64>::zeros((p, p));
    let mut x = Array2::<f64>::zeros((p, p));

    for _ in 0..dual_iters {
        let aprime = a - &((&b - &b.t()) / eta);
        let columns = prox_all_columns(&aprime, &tables, tau);
        for (i, col) in columns.iter().enumerate() {
            let mut idx = 0;
            for j in 0..p {
                if j != i {
                    x[[j, i]] = col[idx];
                    idx += 1;
                }
            }
            x[[i, i]] = 0.0;
        }
        let asym = &x - &x.t();
        let res = frob(&asym) / frob(&x).max(1.0);
        if res <= tol_sym {
            break;
        }
        b = b + dual_step * &asym;
    }

    ScoreMatrix::from_raw(&x)
}

/// Result of a full ADMM run.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub scores: ScoreMatrix,
    /// Whether the primal residual reached `tol_primal`.
    pub converged: bool,
    /// Off-diagonal relative residual ||USU^T - X|| / max(1, ||X||) per
    /// outer iteration.
    pub primal_residuals: Vec<f64>,
}

/// Runs the outer ADMM loop on an observation mask. Deterministic given the
/// config seed; non-convergence is reported in the outcome, not an error.
pub fn fit(mask: &ObservationMask, prior: &PriorConfig, config: &SolverConfig) -> Result<FitOutcome> {
    config.validate()?;
    let p = mask.p();
    if prior.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "prior covers {} nodes, mask has {p}",
            prior.p()
        )));
    }

    let loss = build_loss_weights(mask, config.rho)?;
    let m = loss.matrix();
    let eta = config.eta;
    // Combined Step One weights and the observed-part numerator. The
    // diagonal keeps weight eta/2 with target 0, softly shrinking the
    // factorization diagonal; the hard X = USU^T coupling is applied to
    // off-diagonal entries only, since a nonnegative tri-factorization with
    // positive diag(S) cannot have an exactly zero diagonal.
    let w = m + eta / 2.0;
    let mut m_omega = Array2::<f64>::zeros((p, p));
    for (u, v) in mask.observed() {
        m_omega[[u, v]] = 1.0 - config.rho / 2.0;
        m_omega[[v, u]] = 1.0 - config.rho / 2.0;
    }

    let mut x = Array2::<f64>::zeros((p, p));
    let mut z = Array2::<f64>::zeros((p, p));
    let mut factors: Option<FactorPair> = None;
    let mut residuals = Vec::with_capacity(config.outer_iters);
    let mut converged = false;

    for iter in 0..config.outer_iters {
        let y = &x - &z;
        let target = (&m_omega + &(eta / 2.0 * &y)) / &w;
        let wt = WeightedTarget::new(w.clone(), target)?;
        let outcome = factorize(
            &wt,
            config.rank,
            config.inner_factorize_iters,
            config.seed,
            factors.take(),
        )?;
        let recon = outcome.factors.reconstruct();
        factors = Some(outcome.factors);

        let a = &recon + &z;
        let scores = solve_step_two(
            &a,
            prior,
            config.lambda,
            eta,
            config.dual_iters,
            config.dual_step,
            config.tol_sym,
        )?;
        let x_prev = x;
        x = scores.matrix().clone();

        let mut res2 = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    let d = recon[[i, j]] - x[[i, j]];
                    res2 += d * d;
                }
            }
        }
        let scale = frob(&x).max(1.0);
        let res = res2.sqrt() / scale;
        residuals.push(res);

        z = &z + &recon - &x;
        for i in 0..p {
            z[[i, i]] = 0.0;
        }

        // The split constraint can be met long before the loss has settled
        // (with lambda = 0 the prox step satisfies it immediately), so
        // require the dual residual eta*||X - X_prev|| to be small as well.
        let dual_res = eta * frob(&(&x - &x_prev)) / scale;
        if iter > 0 && res <= config.tol_primal && dual_res <= config.tol_dual {
            converged = true;
            break;
        }
    }

    Ok(FitOutcome {
        scores: ScoreMatrix::new(x)?,
        converged,
        primal_residuals: residuals,
    })
}
