#![allow(dead_code)]

use confnet_core::graph::DirectedGraph;
use confnet_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reflexive-transitive closure by repeated relaxation.
pub fn reachability(g: &DirectedGraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for (i, j) in g.edges() {
        r[i][j] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Mutual-reachability classes, each sorted, listed by smallest member.
pub fn brute_classes(g: &DirectedGraph) -> Vec<Vec<usize>> {
    let r = reachability(g);
    let n = g.n();
    let mut done = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if done[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| r[i][j] && r[j][i]).collect();
        for &j in &class {
            done[j] = true;
        }
        out.push(class);
    }
    out
}

/// `(essential, inessential)` from the textbook definition: `i` is essential
/// when every `j` reachable from `i` can reach `i` back.
pub fn brute_classification(g: &DirectedGraph) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let r = reachability(g);
    let n = g.n();
    let (mut ess, mut iness) = (Vec::new(), Vec::new());
    for class in brute_classes(g) {
        let i = class[0];
        if (0..n).all(|j| !r[i][j] || r[j][i]) {
            ess.push(class);
        } else {
            iness.push(class);
        }
    }
    (ess, iness)
}

pub fn sorted_classes(mut v: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for c in &mut v {
        c.sort_unstable();
    }
    v.sort();
    v
}

/// Random digraph on `n` vertices with edge probability `p`.
pub fn random_digraph(r: &mut impl Rng, n: usize, p: f64) -> DirectedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if r.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).unwrap()
}

/// Random weights on the edges of `g`, rows normalised; rows without edges
/// get a self-loop.
pub fn stochastic_on(r: &mut impl Rng, g: &DirectedGraph) -> Matrix {
    let n = g.n();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        let succ = g.successors(i);
        if succ.is_empty() {
            m.set(i, i, 1.0);
            continue;
        }
        let w: Vec<f64> = succ.iter().map(|_| 0.1 + r.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        for (&j, wj) in succ.iter().zip(w) {
            m.set(i, j, wj / s);
        }
    }
    m
}

/// A matrix whose only essential class is a `d`-periodic block on the first
/// `d * group` agents (groups feed each other cyclically, no self-loops),
/// followed by `followers` agents that point into the block.
pub fn periodic_block_matrix(r: &mut impl Rng, d: usize, group: usize, followers: usize) -> Matrix {
    let core = d * group;
    let n = core + followers;
    let mut edges = Vec::new();
    for k in 0..d {
        let next = (k + 1) % d;
        for a in 0..group {
            for b in 0..group {
                edges.push((k * group + a, next * group + b));
            }
        }
    }
    for f in core..n {
        edges.push((f, f));
        edges.push((f, r.random_range(0..core)));
        if f > core && r.random::<f64>() < 0.5 {
            edges.push((f, r.random_range(core..f)));
        }
    }
    stochastic_on(r, &DirectedGraph::from_edges(n, edges).unwrap())
}

/// Every agent reaches `hub` through a random in-tree, the hub keeps a
/// self-loop, plus sparse random extra edges. Column `hub` of `A^depth` is
/// then strictly positive.
pub fn rooted_matrix(r: &mut impl Rng, n: usize) -> Matrix {
    let hub = r.random_range(0..n);
    let mut order: Vec<usize> = (0..n).filter(|&i| i != hub).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, r.random_range(0..=i));
    }
    let mut edges = vec![(hub, hub)];
    let mut placed = vec![hub];
    for &v in &order {
        let parent = placed[r.random_range(0..placed.len())];
        edges.push((v, parent));
        placed.push(v);
    }
    for i in 0..n {
        if r.random::<f64>() < 0.5 {
            edges.push((i, i));
        }
        if r.random::<f64>() < 0.3 {
            edges.push((i, r.random_range(0..n)));
        }
    }
    stochastic_on(r, &DirectedGraph::from_edges(n, edges).unwrap())
}

/// Independent check of the block-triangular shape: nothing to the right of
/// any diagonal block, and nothing at all outside the essential blocks' rows.
pub fn check_block_shape(permuted: &Matrix, blocks: &[std::ops::Range<usize>], g: usize) -> Result<(), String> {
    for (k, b) in blocks.iter().enumerate() {
        for i in b.clone() {
            for j in 0..permuted.n() {
                let w = permuted.get(i, j);
                if w <= 0.0 {
                    continue;
                }
                if j >= b.end {
                    return Err(format!("block {k} row {i} has weight right of the diagonal at {j}"));
                }
                if k < g && j < b.start {
                    return Err(format!("essential block {k} row {i} leaks to {j}"));
                }
            }
        }
    }
    Ok(())
}

/// `(m2, m3, m4)` central moments by the one-pass online update (Terriberry),
/// a different route from two-pass summation.
pub fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let (mut n, mut mean, mut s2, mut s3, mut s4) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    for &v in x {
        let n1 = n;
        n += 1.0;
        let delta = v - mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term = delta * dn * n1;
        mean += dn;
        s4 += term * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * s2 - 4.0 * dn * s3;
        s3 += term * dn * (n - 2.0) - 3.0 * dn * s2;
        s2 += term;
    }
    (s2 / n, s3 / n, s4 / n)
}
