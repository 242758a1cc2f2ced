use alloc::vec;
use alloc::vec::Vec;

use super::{DirectedGraph, POSITIVE_WEIGHT_THRESHOLD};
use crate::matrix::Matrix;

/// True iff every vertex reaches every other. The empty graph is not
/// strongly connected; a single vertex is, with or without a self-loop.
pub fn is_strongly_connected(graph: &DirectedGraph) -> bool {
    let n = graph.n();
    if n == 0 {
        return false;
    }
    let all_reached = |g: &DirectedGraph| {
        let mut mark = vec![false; n];
        mark[0] = true;
        let mut todo = vec![0];
        let mut count = 1;
        while let Some(v) = todo.pop() {
            for &w in g.successors(v) {
                if !mark[w] {
                    mark[w] = true;
                    count += 1;
                    todo.push(w);
                }
            }
        }
        count == n
    };
    all_reached(graph) && all_reached(&graph.transpose())
}

/// Irreducible iff the positivity pattern is strongly connected.
pub fn is_irreducible(matrix: &Matrix) -> bool {
    is_strongly_connected(&DirectedGraph::from_matrix(matrix, POSITIVE_WEIGHT_THRESHOLD))
}

/// Period (index of imprimitivity) of a strongly connected graph: the gcd of
/// all cycle lengths, computed from BFS levels as the gcd of
/// `level(u) + 1 - level(v)` over edges `u -> v`. `None` when the graph is
/// not strongly connected or has no edges (no cycles at all).
pub fn period(graph: &DirectedGraph) -> Option<usize> {
    if !is_strongly_connected(graph) || graph.edge_count() == 0 {
        return None;
    }
    let n = graph.n();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue: Vec<usize> = vec![0];
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        for &w in graph.successors(v) {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push(w);
            }
        }
    }
    let mut d = 0usize;
    for (u, v) in graph.edges() {
        d = gcd(d, level[u] + 1 - level[v]);
    }
    Some(d)
}

/// Primitive iff some power is strictly positive, equivalently irreducible
/// with period one. Powers need not be formed: for primitive matrices the
/// Wielandt bound `n^2 - 2n + 2` is reached, and imprimitive ones never
/// become positive.
pub fn is_primitive(matrix: &Matrix) -> bool {
    period(&DirectedGraph::from_matrix(matrix, POSITIVE_WEIGHT_THRESHOLD)) == Some(1)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
