//! Shared test oracles. Each one is written independently of the library
//! path it checks: the prox oracle enumerates rank assignments with its own
//! quadratic-time isotonic pass, and the step-two oracle is a plain
//! projected subgradient loop.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netprior::graph::Network;
use netprior::prior::PriorConfig;

/// All permutations of 0..n in a deterministic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut perm = rest.clone();
            perm.insert(pos, n - 1);
            out.push(perm);
        }
    }
    out
}

/// Repeated-scan isotonic fit to a nonincreasing sequence (O(n^2)).
fn isotonic_nonincreasing_slow(t: &[f64]) -> Vec<f64> {
    let mut groups: Vec<Vec<usize>> = (0..t.len()).map(|i| vec![i]).collect();
    loop {
        let mut merged = false;
        for g in 0..groups.len().saturating_sub(1) {
            let mean = |grp: &[usize]| grp.iter().map(|&i| t[i]).sum::<f64>() / grp.len() as f64;
            if mean(&groups[g + 1]) > mean(&groups[g]) {
                let tail = groups.remove(g + 1);
                groups[g].extend(tail);
                merged = true;
                break;
            }
        }
        if !merged {
            return groups
                .iter()
                .flat_map(|grp| {
                    let mean = grp.iter().map(|&i| t[i]).sum::<f64>() / grp.len() as f64;
                    std::iter::repeat(mean).take(grp.len())
                })
                .collect();
        }
    }
}

/// Objective (1/2)||x-a||^2 + tau * sum_k b(k) x_[k], computed directly.
pub fn prox_objective_direct(a: &[f64], b: &[f64], tau: f64, x: &[f64]) -> f64 {
    let quad: f64 = x.iter().zip(a).map(|(xi, ai)| (xi - ai) * (xi - ai)).sum();
    let mut sorted = x.to_vec();
    sorted.sort_by(|u, v| v.total_cmp(u));
    let pen: f64 = sorted.iter().zip(b).map(|(xi, bi)| xi * bi).sum();
    0.5 * quad + tau * pen
}

/// Global minimum objective by brute force over all n! rank assignments,
/// solving each order-constrained quadratic with the slow isotonic pass and
/// clamping at zero.
pub fn prox_brute_force(a: &[f64], b: &[f64], tau: f64) -> f64 {
    let n = a.len();
    let mut best = f64::INFINITY;
    for perm in permutations(n) {
        let t: Vec<f64> = (0..n).map(|rank| a[perm[rank]] - tau * b[rank]).collect();
        let y = isotonic_nonincreasing_slow(&t);
        let mut x = vec![0.0; n];
        for rank in 0..n {
            x[perm[rank]] = y[rank].max(0.0);
        }
        let obj = prox_objective_direct(a, b, tau, &x);
        if obj < best {
            best = obj;
        }
    }
    best
}

/// Projected subgradient descent on
/// (eta/2)||X - A||_F^2 + lambda * S_H(X, d', alpha)
/// over symmetric nonnegative zero-diagonal matrices. Returns the best
/// objective value seen.
pub fn step_two_subgradient_oracle(
    a: &Array2<f64>,
    prior: &PriorConfig,
    lambda: f64,
    eta: f64,
    iters: usize,
    step0: f64,
) -> f64 {
    let p = a.nrows();
    let tables: Vec<Vec<f64>> = (0..p)
        .map(|i| prior.coefficients_for(i).values().to_vec())
        .collect();

    let objective = |x: &Array2<f64>| -> f64 {
        let mut quad = 0.0;
        for i in 0..p {
            for j in 0..p {
                let d = x[[i, j]] - a[[i, j]];
                quad += d * d;
            }
        }
        let mut pen = 0.0;
        for i in 0..p {
            let mut row: Vec<f64> = (0..p).filter(|&j| j != i).map(|j| x[[i, j]]).collect();
            row.sort_by(|u, v| v.total_cmp(u));
            pen += row.iter().zip(&tables[i]).map(|(v, c)| v * c).sum::<f64>();
        }
        0.5 * eta * quad + lambda * pen
    };

    // start from the projection of A
    let mut x = Array2::zeros((p, p));
    for i in 0..p {
        for j in 0..p {
            if i != j {
                x[[i, j]] = (0.5 * (a[[i, j]] + a[[j, i]])).max(0.0);
            }
        }
    }
    let mut best = objective(&x);

    let mut order: Vec<usize> = Vec::with_capacity(p - 1);
    for t in 0..iters {
        // subgradient of the sorted penalty: rank-k off-diagonal entry of
        // row i picks up coefficient b_i(k)
        let mut grad = Array2::<f64>::zeros((p, p));
        for i in 0..p {
            order.clear();
            order.extend((0..p).filter(|&j| j != i));
            order.sort_by(|&u, &v| x[[i, v]].total_cmp(&x[[i, u]]).then(u.cmp(&v)));
            for (rank, &j) in order.iter().enumerate() {
                grad[[i, j]] += lambda * tables[i][rank];
            }
        }
        for i in 0..p {
            for j in 0..p {
                grad[[i, j]] += eta * (x[[i, j]] - a[[i, j]]);
            }
        }
        let step = step0 / ((t + 1) as f64).sqrt();
        let raw = &x - &(step * &grad);
        // project: symmetrize, clamp, zero diagonal
        for i in 0..p {
            for j in 0..p {
                x[[i, j]] = if i == j {
                    0.0
                } else {
                    (0.5 * (raw[[i, j]] + raw[[j, i]])).max(0.0)
                };
            }
        }
        let obj = objective(&x);
        if obj < best {
            best = obj;
        }
    }
    best
}

/// Random simple graph on p nodes with exactly k edges and minimum degree
/// at least 1 (degree sequences of such graphs are feasible rearrangement
/// targets).
pub fn random_graph_min_degree_one(p: usize, k: usize, rng: &mut ChaCha8Rng) -> Network {
    let all_pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
        .collect();
    assert!(k <= all_pairs.len());
    assert!(2 * k >= p, "need at least p/2 edges for min degree 1");
    loop {
        let mut pairs = all_pairs.clone();
        for i in 0..k {
            let j = rng.gen_range(i..pairs.len());
            pairs.swap(i, j);
        }
        let net = Network::new(p, pairs[..k].iter().copied()).unwrap();
        if net.degrees().iter().all(|&d| d >= 1) {
            return net;
        }
    }
}

/// Symmetric nonnegative matrix with zero diagonal and i.i.d. U(0,1)
/// off-diagonal entries.
pub fn random_symmetric(p: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut x = Array2::zeros((p, p));
    for i in 0..p {
        for j in (i + 1)..p {
            let v: f64 = rng.gen();
            x[[i, j]] = v;
            x[[j, i]] = v;
        }
    }
    x
}

/// Degrees of the K largest upper-diagonal entries (value desc, pair asc).
pub fn top_k_degrees(x: &Array2<f64>, k: usize) -> Vec<usize> {
    let p = x.nrows();
    let mut slots: Vec<((usize, usize), f64)> = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            slots.push(((i, j), x[[i, j]]));
        }
    }
    slots.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut deg = vec![0usize; p];
    for &((i, j), _) in slots.iter().take(k) {
        deg[i] += 1;
        deg[j] += 1;
    }
    deg
}
