//! End-to-end inference: degree estimation from the observed network,
//! amplification, method dispatch, top-K edge extraction, and
//! cross-validation over (rho, lambda, c, alpha).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::{fit, ScoreMatrix, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::ObservationMask;
use crate::prior::PriorConfig;

/// Per-node degree estimates: the base estimate d and the amplified
/// d'_i = min(ceil(c * d_i), p-1) actually used by the prior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeTarget {
    d: Vec<usize>,
    d_amplified: Vec<usize>,
}

impl DegreeTarget {
    /// Applies the amplification factor to base estimates. Base degrees may
    /// exceed p-1 (ceiling arithmetic); the amplified ones are capped.
    pub fn with_amplification(d: Vec<usize>, c: f64, p: usize) -> Result<Self> {
        if d.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "degree vector has length {}, expected {p}",
                d.len()
            )));
        }
        if d.iter().any(|&di| di < 1) {
            return Err(Error::InvalidParam("base degree estimates must be >= 1".into()));
        }
        let d_amplified = amplify(&d, c, p)?;
        Ok(Self { d, d_amplified })
    }

    pub fn p(&self) -> usize {
        self.d.len()
    }

    pub fn base(&self) -> &[usize] {
        &self.d
    }

    pub fn amplified(&self) -> &[usize] {
        &self.d_amplified
    }
}

/// d_i = ceil((2 o_i / sum_j o_j) * K), floored at 1 so isolated observed
/// nodes still get a coefficient vector.
pub fn estimate_degrees(o: &[usize], k: usize) -> Result<Vec<usize>> {
    let total: usize = o.iter().sum();
    if total == 0 {
        return Err(Error::EmptyObservation);
    }
    if k < 1 {
        return Err(Error::InvalidParam("target edge count K must be >= 1".into()));
    }
    Ok(o.iter()
        .map(|&oi| {
            let est = (2.0 * oi as f64 / total as f64 * k as f64).ceil() as usize;
            est.max(1)
        })
        .collect())
}

/// Elementwise min(ceil(c * d_i), p-1).
pub fn amplify(d: &[usize], c: f64, p: usize) -> Result<Vec<usize>> {
    if c < 1.0 {
        return Err(Error::InvalidParam(format!("amplification c must be >= 1, got {c}")));
    }
    Ok(d.iter()
        .map(|&di| ((c * di as f64).ceil() as usize).min(p - 1))
        .collect())
}

/// Which estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Tri-factorization alone (lambda = 0).
    Tri,
    /// Tri-factorization with the L1 penalty (all prior coefficients 1).
    TriL1,
    /// Tri-factorization with the learned, amplified degree prior.
    TriDegree,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Tri => "tri",
            Method::TriL1 => "tri_l1",
            Method::TriDegree => "tri_degree",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tri" => Ok(Method::Tri),
            "tri_l1" => Ok(Method::TriL1),
            "tri_degree" => Ok(Method::TriDegree),
            other => Err(Error::InvalidParam(format!("unknown method {other:?}"))),
        }
    }
}

/// The model hyperparameters swept by cross-validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub rho: f64,
    pub lambda: f64,
    pub c: f64,
    pub alpha: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            rho: 0.3,
            lambda: 0.1,
            c: 1.5,
            alpha: 1.0,
        }
    }
}

/// One scored unobserved pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub u: usize,
    pub v: usize,
    pub score: f64,
}

/// Ranked predictions over pairs outside the observation mask: scores
/// nonincreasing, ties broken by lexicographic (u, v).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    entries: Vec<Prediction>,
}

impl PredictionSet {
    pub fn from_entries(entries: Vec<Prediction>) -> Result<Self> {
        for w in entries.windows(2) {
            let ordered = w[0].score > w[1].score
                || (w[0].score == w[1].score && (w[0].u, w[0].v) < (w[1].u, w[1].v));
            if !ordered {
                return Err(Error::InvalidParam("predictions are not strictly ranked".into()));
            }
        }
        if entries.iter().any(|e| e.u >= e.v) {
            return Err(Error::InvalidParam("prediction pairs must satisfy u < v".into()));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Prediction> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &[Prediction] {
        &self.entries
    }
}

/// Top-k upper-diagonal pairs of a score matrix by (score desc, pair asc),
/// optionally skipping pairs present in a mask.
pub fn top_k_pairs(
    scores: &ScoreMatrix,
    k: usize,
    exclude: Option<&ObservationMask>,
) -> Vec<Prediction> {
    let p = scores.p();
    let mut all: Vec<Prediction> = Vec::with_capacity(p * (p - 1) / 2);
    for u in 0..p {
        for v in (u + 1)..p {
            if let Some(mask) = exclude {
                if mask.contains(u, v) {
                    continue;
                }
            }
            all.push(Prediction {
                u,
                v,
                score: scores.get(u, v),
            });
        }
    }
    all.sort_by(|a, b| b.score.total_cmp(&a.score).then((a.u, a.v).cmp(&(b.u, b.v))));
    all.truncate(k);
    all
}

fn available_pairs(mask: &ObservationMask) -> usize {
    let p = mask.p();
    p * (p - 1) / 2 - mask.num_observed()
}

/// Builds the per-method prior and solver configuration and runs the ADMM
/// fit, returning the top-K unobserved pairs. Tri ignores the prior
/// (lambda = 0); TriL1 forces the alpha -> 0 coefficient limit.
pub fn infer(
    mask: &ObservationMask,
    k: usize,
    method: Method,
    hyper: &Hyperparams,
    base: &SolverConfig,
    seed: u64,
) -> Result<PredictionSet> {
    let outcome = infer_scores(mask, k, method, hyper, base, seed)?;
    Ok(outcome.predictions)
}

/// Full inference output: ranked predictions plus the underlying scores and
/// solver diagnostics.
#[derive(Debug, Clone)]
pub struct InferOutcome {
    pub predictions: PredictionSet,
    pub scores: ScoreMatrix,
    pub converged: bool,
    pub primal_residuals: Vec<f64>,
}

pub fn infer_scores(
    mask: &ObservationMask,
    k: usize,
    method: Method,
    hyper: &Hyperparams,
    base: &SolverConfig,
    seed: u64,
) -> Result<InferOutcome> {
    if k < 1 {
        return Err(Error::InvalidParam("prediction budget K must be >= 1".into()));
    }
    let avail = available_pairs(mask);
    if k > avail {
        return Err(Error::InvalidParam(format!(
            "K = {k} exceeds the {avail} unobserved pairs"
        )));
    }
    let p = mask.p();
    let o = mask.observed_degrees();
    let d = estimate_degrees(&o, k)?;

    let (lambda, alpha, c) = match method {
        Method::Tri => (0.0, 0.0, 1.0),
        Method::TriL1 => (hyper.lambda, 0.0, 1.0),
        Method::TriDegree => (hyper.lambda, hyper.alpha, hyper.c),
    };
    let degrees = DegreeTarget::with_amplification(d, c, p)?;
    let prior = PriorConfig::new(alpha, c, degrees)?;
    let config = SolverConfig {
        rho: hyper.rho,
        lambda,
        seed,
        ..base.clone()
    };
    let out = fit(mask, &prior, &config)?;
    let predictions = PredictionSet::from_entries(top_k_pairs(&out.scores, k, Some(mask)))?;
    Ok(InferOutcome {
        predictions,
        scores: out.scores,
        converged: out.converged,
        primal_residuals: out.primal_residuals,
    })
}

/// The cross-validation grid; cells are visited in nested
/// rho -> lambda -> c -> alpha order.
#[derive(Debug, Clone)]
pub struct HyperGrid {
    pub rho_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub c_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub holdout_fraction: f64,
    pub n_seeds: usize,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            rho_values: vec![0.1, 0.3, 0.5],
            lambda_values: vec![0.01, 0.1, 1.0],
            c_values: vec![1.0, 1.5, 2.0],
            alpha_values: vec![0.5, 1.0, 2.0],
            holdout_fraction: 0.1,
            n_seeds: 5,
        }
    }
}

impl HyperGrid {
    fn validate(&self) -> Result<()> {
        if self.rho_values.is_empty()
            || self.lambda_values.is_empty()
            || self.c_values.is_empty()
            || self.alpha_values.is_empty()
        {
            return Err(Error::InvalidParam("grid value lists must be nonempty".into()));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::InvalidParam("holdout_fraction must lie in (0,1)".into()));
        }
        if self.n_seeds < 1 {
            return Err(Error::InvalidParam("n_seeds must be >= 1".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Hyperparams> {
        let mut out = Vec::new();
        for &rho in &self.rho_values {
            for &lambda in &self.lambda_values {
                for &c in &self.c_values {
                    for &alpha in &self.alpha_values {
                        out.push(Hyperparams { rho, lambda, c, alpha });
                    }
                }
            }
        }
        out
    }
}

/// Scores of one grid cell across splits.
#[derive(Debug, Clone)]
pub struct CvCell {
    pub hyper: Hyperparams,
    /// Tuning-set hits per split seed.
    pub scores: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub best: Hyperparams,
    pub cells: Vec<CvCell>,
    /// False when any inner fit stopped at the iteration cap.
    pub all_converged: bool,
}

fn split_observed(
    mask: &ObservationMask,
    holdout_fraction: f64,
    seed: u64,
) -> Result<(ObservationMask, Vec<(usize, usize)>)> {
    let edges: Vec<(usize, usize)> = mask.observed().collect();
    let n = edges.len();
    let h = ((holdout_fraction * n as f64).ceil() as usize).max(1);
    if h >= n {
        return Err(Error::DegenerateSplit(format!(
            "holdout of {h} edges would empty the {n}-edge train set"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // partial Fisher-Yates: the first h entries become the tuning set
    for i in 0..h {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }
    let tuning: Vec<(usize, usize)> = order[..h].iter().map(|&i| edges[i]).collect();
    let train_edges: Vec<(usize, usize)> = order[h..].iter().map(|&i| edges[i]).collect();
    let train = ObservationMask::new(mask.p(), train_edges)?;
    Ok((train, tuning))
}

fn score_cell(
    mask: &ObservationMask,
    k: usize,
    method: Method,
    hyper: &Hyperparams,
    base: &SolverConfig,
    grid: &HyperGrid,
    cell_seed: u64,
) -> Result<(Vec<f64>, bool)> {
    let mut seed_rng = ChaCha8Rng::seed_from_u64(cell_seed);
    let mut scores = Vec::with_capacity(grid.n_seeds);
    let mut all_converged = true;
    for _ in 0..grid.n_seeds {
        let split_seed: u64 = seed_rng.gen();
        let fit_seed: u64 = seed_rng.gen();
        let (train, tuning) = split_observed(mask, grid.holdout_fraction, split_seed)?;
        let out = infer_scores(&train, k, method, hyper, base, fit_seed)?;
        all_converged &= out.converged;
        let k_prime = tuning.len();
        let hits = out
            .predictions
            .entries()
            .iter()
            .take(k_prime)
            .filter(|p| tuning.contains(&(p.u, p.v)))
            .count();
        scores.push(hits as f64);
    }
    Ok((scores, all_converged))
}

/// Grid search: for every cell and split, hold out observed edges, fit on
/// the remainder, and count tuning edges among the top-K' predictions
/// (K' = tuning-set size). Returns per-cell scores and the argmax cell,
/// ties broken by smaller (lambda, c, alpha, rho).
pub fn cross_validate(
    mask: &ObservationMask,
    k: usize,
    grid: &HyperGrid,
    method: Method,
    base: &SolverConfig,
    master_seed: u64,
) -> Result<CvOutcome> {
    grid.validate()?;
    let cells = grid.cells();
    let work = |(idx, hyper): (usize, &Hyperparams)| -> Result<(CvCell, bool)> {
        let cell_seed = master_seed.wrapping_add(idx as u64);
        let (scores, converged) = score_cell(mask, k, method, hyper, base, grid, cell_seed)?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        Ok((
            CvCell {
                hyper: *hyper,
                scores,
                mean,
            },
            converged,
        ))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(CvCell, bool)>> = {
        use rayon::prelude::*;
        cells.par_iter().enumerate().map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(CvCell, bool)>> = cells.iter().enumerate().map(work).collect();

    let pairs: Vec<(CvCell, bool)> = results.into_iter().collect::<Result<_>>()?;
    let all_converged = pairs.iter().all(|(_, c)| *c);
    let cells: Vec<CvCell> = pairs.into_iter().map(|(c, _)| c).collect();
    let best = cells
        .iter()
        .max_by(|a, b| {
            a.mean.total_cmp(&b.mean).then_with(|| {
                let ka = (a.hyper.lambda, a.hyper.c, a.hyper.alpha, a.hyper.rho);
                let kb = (b.hyper.lambda, b.hyper.c, b.hyper.alpha, b.hyper.rho);
                // smaller tuple wins the tie, so reverse for max_by
                kb.partial_cmp(&ka).unwrap()
            })
        })
        .expect("grid is nonempty")
        .hyper;
    Ok(CvOutcome {
        best,
        cells,
        all_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Network;

    fn small_solver() -> SolverConfig {
        SolverConfig {
            rank: 6,
            outer_iters: 15,
            inner_factorize_iters: 20,
            dual_iters: 10,
            ..Default::default()
        }
    }

    #[test]
    fn degree_estimates_match_formula() {
        assert_eq!(estimate_degrees(&[2, 2, 1, 1], 3).unwrap(), vec![2, 2, 1, 1]);
        assert_eq!(estimate_degrees(&[1, 1], 1).unwrap(), vec![1, 1]);
        assert_eq!(estimate_degrees(&[3, 1, 1, 1], 4).unwrap(), vec![4, 2, 2, 2]);
        // isolated observed node floors at 1
        assert_eq!(estimate_degrees(&[2, 0, 2], 2).unwrap(), vec![2, 1, 2]);
        assert!(estimate_degrees(&[0, 0], 3).is_err());
    }

    #[test]
    fn degree_sum_at_least_twice_k() {
        let o = vec![5, 3, 2, 2, 1, 1];
        for k in 1..12 {
            let d = estimate_degrees(&o, k).unwrap();
            assert!(d.iter().sum::<usize>() >= 2 * k, "K={k}");
        }
    }

    #[test]
    fn amplify_examples() {
        assert_eq!(amplify(&[4, 2, 2, 2], 1.5, 4).unwrap(), vec![3, 3, 3, 3]);
        assert_eq!(amplify(&[1, 2, 3], 1.0, 10).unwrap(), vec![1, 2, 3]);
        assert_eq!(amplify(&[1, 2, 3], 1e9, 10).unwrap(), vec![9, 9, 9]);
        assert!(amplify(&[1], 0.5, 2).is_err());
    }

    #[test]
    fn missing_clique_edge_ranks_first() {
        // 6-clique with one edge held out: completion must put it on top
        let p = 6;
        let all: Vec<_> = (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
            .collect();
        let observed: Vec<_> = all.iter().copied().filter(|&e| e != (1, 4)).collect();
        let mask = ObservationMask::new(p, observed).unwrap();
        let preds = infer(
            &mask,
            1,
            Method::Tri,
            &Hyperparams::default(),
            &SolverConfig {
                rank: 6,
                outer_iters: 25,
                inner_factorize_iters: 60,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        assert_eq!((preds.entries()[0].u, preds.entries()[0].v), (1, 4));
    }

    #[test]
    fn tri_ranking_ignores_prior_hypers() {
        let net = crate::graph::generate_power_law(25, 2, 1).unwrap();
        let mask = crate::graph::sample_observations(
            &net,
            &crate::graph::SamplingSpec::uniform(0.85, 2),
        )
        .unwrap();
        let base = small_solver();
        let a = infer(&mask, 10, Method::Tri, &Hyperparams::default(), &base, 7).unwrap();
        let wild = Hyperparams {
            rho: Hyperparams::default().rho,
            lambda: 9.0,
            c: 3.0,
            alpha: 4.0,
        };
        let b = infer(&mask, 10, Method::Tri, &wild, &base, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn k_too_large_rejected() {
        let mask = ObservationMask::new(4, [(0, 1)]).unwrap();
        let err = infer(
            &mask,
            6,
            Method::Tri,
            &Hyperparams::default(),
            &small_solver(),
            0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn predictions_exclude_observed_and_are_ranked() {
        let net = crate::graph::generate_power_law(20, 2, 5).unwrap();
        let mask = crate::graph::sample_observations(
            &net,
            &crate::graph::SamplingSpec::uniform(0.8, 3),
        )
        .unwrap();
        let preds = infer(
            &mask,
            15,
            Method::TriDegree,
            &Hyperparams::default(),
            &small_solver(),
            1,
        )
        .unwrap();
        assert_eq!(preds.len(), 15);
        for p in preds.iter() {
            assert!(!mask.contains(p.u, p.v));
            assert!(p.u < p.v);
        }
        for w in preds.entries().windows(2) {
            assert!(w[0].score >= w[1].score);
        }
    }

    #[test]
    fn cv_single_cell_returns_it() {
        let net = crate::graph::generate_power_law(18, 2, 4).unwrap();
        let mask = crate::graph::sample_observations(
            &net,
            &crate::graph::SamplingSpec::uniform(0.9, 1),
        )
        .unwrap();
        let grid = HyperGrid {
            rho_values: vec![0.3],
            lambda_values: vec![0.1],
            c_values: vec![1.5],
            alpha_values: vec![1.0],
            holdout_fraction: 0.15,
            n_seeds: 2,
        };
        let out = cross_validate(&mask, 20, &grid, Method::TriDegree, &small_solver(), 9).unwrap();
        assert_eq!(out.cells.len(), 1);
        assert_eq!(out.best, out.cells[0].hyper);
    }

    #[test]
    fn cv_reproducible_and_partitioned() {
        let net = crate::graph::generate_power_law(16, 2, 8).unwrap();
        let mask = crate::graph::sample_observations(
            &net,
            &crate::graph::SamplingSpec::uniform(0.9, 2),
        )
        .unwrap();
        let grid = HyperGrid {
            rho_values: vec![0.3, 0.5],
            lambda_values: vec![0.1],
            c_values: vec![1.0],
            alpha_values: vec![1.0],
            holdout_fraction: 0.2,
            n_seeds: 2,
        };
        let base = small_solver();
        let a = cross_validate(&mask, 15, &grid, Method::TriDegree, &base, 17).unwrap();
        let b = cross_validate(&mask, 15, &grid, Method::TriDegree, &base, 17).unwrap();
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert_eq!(ca.scores, cb.scores);
        }
        assert_eq!(a.best, b.best);

        // split really partitions the observed set
        let (train, tuning) = split_observed(&mask, 0.2, 123).unwrap();
        let total = train.num_observed() + tuning.len();
        assert_eq!(total, mask.num_observed());
        for e in tuning {
            assert!(!train.contains(e.0, e.1));
            assert!(mask.contains(e.0, e.1));
        }
    }

    #[test]
    fn split_rejects_degenerate() {
        let mask = ObservationMask::new(3, [(0, 1)]).unwrap();
        assert!(split_observed(&mask, 0.9, 0).is_err());
    }

    #[test]
    fn top_k_pairs_exclusion() {
        let net = Network::new(4, [(0, 1)]).unwrap();
        let _ = net;
        let mask = ObservationMask::new(4, [(0, 1)]).unwrap();
        let mut m = ndarray::Array2::zeros((4, 4));
        for (i, j, v) in [(0usize, 1usize, 0.9), (0, 2, 0.8), (1, 2, 0.7)] {
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
        let scores = ScoreMatrix::new(m).unwrap();
        let with_mask = top_k_pairs(&scores, 2, Some(&mask));
        assert_eq!((with_mask[0].u, with_mask[0].v), (0, 2));
        let without = top_k_pairs(&scores, 2, None);
        assert_eq!((without[0].u, without[0].v), (0, 1));
    }
}
