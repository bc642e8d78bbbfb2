//! Preferential-attachment generator for heavy-tailed synthetic networks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Network;

/// Generates a connected preferential-attachment graph: an initial clique on
/// `m` nodes, then each new node attaches to `m` distinct existing nodes
/// chosen proportionally to degree. Edge count is m·(p−m) + C(m,2).
/// Deterministic given `seed`.
pub fn generate_power_law(p: usize, m: usize, seed: u64) -> Result<Network> {
    if m < 1 {
        return Err(Error::InvalidParam("edges-per-node m must be >= 1".into()));
    }
    if p < m + 1 {
        return Err(Error::InvalidParam(format!(
            "node count p={p} must be at least m+1={}",
            m + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m * (p - m) + m * (m - 1) / 2);
    // One entry per edge endpoint; sampling from it is degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();

    for u in 0..m {
        for v in (u + 1)..m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }

    for new_node in m..p {
        let mut targets = Vec::with_capacity(m);
        while targets.len() < m {
            let candidate = if endpoints.is_empty() {
                // m=1 bootstrap: the single-node "clique" has no edges yet.
                rng.gen_range(0..new_node)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if !targets.contains(&candidate) {
                targets.push(candidate);
            }
        }
        for &t in &targets {
            edges.push((t, new_node));
            endpoints.push(t);
            endpoints.push(new_node);
        }
    }

    Network::new(p, edges)
}
