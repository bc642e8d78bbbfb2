//! Edge-sampling protocols: uniform, hub-over-sampled, hub-under-sampled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Network, ObservationMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    Uniform,
    /// Edges adjacent to hubs kept at a higher rate than the rest.
    Over,
    /// Edges adjacent to hubs kept at a lower rate than the rest.
    Under,
}

/// How to sample observed edges from a ground-truth network.
#[derive(Debug, Clone, Copy)]
pub struct SamplingSpec {
    pub mode: SamplingMode,
    /// Keep probability for edges adjacent to at least one hub.
    pub rate_hub: f64,
    /// Keep probability for all other edges.
    pub rate_nonhub: f64,
    /// Fraction of nodes counted as hubs (by degree, ties by id).
    pub hub_fraction: f64,
    pub seed: u64,
}

impl SamplingSpec {
    pub fn uniform(rate: f64, seed: u64) -> Self {
        Self {
            mode: SamplingMode::Uniform,
            rate_hub: rate,
            rate_nonhub: rate,
            hub_fraction: 0.2,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, r) in [("rate_hub", self.rate_hub), ("rate_nonhub", self.rate_nonhub)] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidParam(format!("{name} must lie in (0,1], got {r}")));
            }
        }
        if self.mode == SamplingMode::Uniform && self.rate_hub != self.rate_nonhub {
            return Err(Error::InvalidParam(
                "uniform mode requires rate_hub == rate_nonhub".into(),
            ));
        }
        if !(self.hub_fraction > 0.0 && self.hub_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "hub_fraction must lie in (0,1), got {}",
                self.hub_fraction
            )));
        }
        Ok(())
    }
}

/// Per-class kept/total counts from one sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingReport {
    pub hub_kept: usize,
    pub hub_total: usize,
    pub nonhub_kept: usize,
    pub nonhub_total: usize,
}

/// Keeps each edge independently: hub-adjacent edges with probability
/// `rate_hub`, others with `rate_nonhub`. Deterministic given the seed.
pub fn sample_observations(net: &Network, spec: &SamplingSpec) -> Result<ObservationMask> {
    sample_observations_with_report(net, spec).map(|(mask, _)| mask)
}

/// As [`sample_observations`], also returning per-class counts.
pub fn sample_observations_with_report(
    net: &Network,
    spec: &SamplingSpec,
) -> Result<(ObservationMask, SamplingReport)> {
    spec.validate()?;
    let hubs = net.hub_set(spec.hub_fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut kept = Vec::new();
    let mut report = SamplingReport {
        hub_kept: 0,
        hub_total: 0,
        nonhub_kept: 0,
        nonhub_total: 0,
    };
    // Iteration order over edges is sorted, so draws line up deterministically.
    for (u, v) in net.edges() {
        let hub_adjacent = hubs.contains(&u) || hubs.contains(&v);
        let rate = if hub_adjacent { spec.rate_hub } else { spec.rate_nonhub };
        let keep = rng.gen::<f64>() < rate;
        if hub_adjacent {
            report.hub_total += 1;
            report.hub_kept += keep as usize;
        } else {
            report.nonhub_total += 1;
            report.nonhub_kept += keep as usize;
        }
        if keep {
            kept.push((u, v));
        }
    }
    let mask = ObservationMask::new(net.p(), kept)?;
    Ok((mask, report))
}
