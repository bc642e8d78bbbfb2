//! Undirected graphs, observation masks, file I/O, synthetic generation and
//! the three edge-sampling protocols.

mod generate;
mod io;
mod sampling;

pub use generate::generate_power_law;
pub use io::{load_edge_list, load_mask, save_edge_list, save_mask};
pub use sampling::{
    sample_observations, sample_observations_with_report, SamplingMode, SamplingReport,
    SamplingSpec,
};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// An unordered node pair with `a < b`.
pub type Edge = (usize, usize);

/// Normalizes an unordered pair, rejecting self-loops.
pub fn edge(u: usize, v: usize) -> Result<Edge> {
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    Ok(if u < v { (u, v) } else { (v, u) })
}

/// A ground-truth undirected simple graph on nodes `0..p`.
///
/// The implied adjacency matrix is symmetric 0/1 with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    p: usize,
    edges: BTreeSet<Edge>,
}

impl Network {
    /// Builds a network from an edge iterator. Duplicate and reversed pairs
    /// collapse to one edge; self-loops and out-of-range ids are rejected.
    pub fn new(p: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParam("node count p must be positive".into()));
        }
        let mut edges = BTreeSet::new();
        for (u, v) in pairs {
            let e = edge(u, v)?;
            if e.1 >= p {
                return Err(Error::NodeOutOfRange { id: e.1, p });
            }
            edges.insert(e);
        }
        Ok(Self { p, edges })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        match edge(u, v) {
            Ok(e) => self.edges.contains(&e),
            Err(_) => false,
        }
    }

    /// Per-node degree vector.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.p];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// The ⌈hub_fraction·p⌉ nodes of highest degree, ties broken by lower id.
    pub fn hub_set(&self, hub_fraction: f64) -> Result<BTreeSet<usize>> {
        if !(hub_fraction > 0.0 && hub_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "hub_fraction must lie in (0,1), got {hub_fraction}"
            )));
        }
        let degrees = self.degrees();
        let mut order: Vec<usize> = (0..self.p).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(degrees[i]), i));
        let count = (hub_fraction * self.p as f64).ceil() as usize;
        Ok(order.into_iter().take(count).collect())
    }
}

/// The set of observed edges Ω, a subset of some network's edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    p: usize,
    observed: BTreeSet<Edge>,
}

impl ObservationMask {
    pub fn new(p: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let net = Network::new(p, pairs)?;
        Ok(Self {
            p: net.p,
            observed: net.edges,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_observed(&self) -> usize {
        self.observed.len()
    }

    pub fn observed(&self) -> impl Iterator<Item = Edge> + '_ {
        self.observed.iter().copied()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        match edge(u, v) {
            Ok(e) => self.observed.contains(&e),
            Err(_) => false,
        }
    }

    pub fn is_subset_of(&self, net: &Network) -> bool {
        self.observed.iter().all(|e| net.edges.contains(e))
    }

    /// Observed degree vector o with o_i = number of observed pairs at node i.
    pub fn observed_degrees(&self) -> Vec<usize> {
        let mut o = vec![0usize; self.p];
        for &(u, v) in &self.observed {
            o[u] += 1;
            o[v] += 1;
        }
        o
    }
}
