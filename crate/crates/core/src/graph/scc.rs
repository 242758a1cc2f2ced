use alloc::vec;
use alloc::vec::Vec;

use super::{DirectedGraph, GraphError};

/// The strongly connected components of a digraph.
///
/// Classes are listed sinks-first: whenever an edge leads from class `a` to
/// a different class `b`, `b` appears before `a`. Members of each class are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccPartition {
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
}

impl SccPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

const UNVISITED: usize = usize::MAX;

/// Tarjan's algorithm with an explicit call stack, so deep graphs cannot
/// overflow the native stack. Runs in `O(|V| + |E|)`.
pub fn scc(graph: &DirectedGraph) -> SccPartition {
    let n = graph.n();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0usize;

    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![UNVISITED; n];

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, 0));

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            let succ = graph.successors(v);
            if frame.1 < succ.len() {
                let w = succ[frame.1];
                frame.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }

            call.pop();
            if low[v] == index[v] {
                let id = classes.len();
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    class_of[w] = id;
                    members.push(w);
                    if w == v {
                        break;
                    }
                }
                members.sort_unstable();
                classes.push(members);
            }
            if let Some(&(u, _)) = call.last() {
                low[u] = low[u].min(low[v]);
            }
        }
    }

    SccPartition { classes, class_of }
}

/// The DAG obtained by contracting each class of an SCC partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondensationDag {
    /// Members of each node, indexed like the partition's classes.
    pub nodes: Vec<Vec<usize>>,
    /// Sorted, duplicate-free cross-class edges.
    pub edges: Vec<(usize, usize)>,
    successors: Vec<Vec<usize>>,
}

impl CondensationDag {
    pub fn successors(&self, node: usize) -> &[usize] {
        &self.successors[node]
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.successors[node].len()
    }

    /// Nodes with no outgoing edge.
    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&k| self.successors[k].is_empty())
    }

    /// Kahn's algorithm; `None` if a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let m = self.nodes.len();
        let mut indeg = vec![0usize; m];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut ready: Vec<usize> = (0..m).filter(|&k| indeg[k] == 0).collect();
        let mut order = Vec::with_capacity(m);
        while let Some(k) = ready.pop() {
            order.push(k);
            for &b in &self.successors[k] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
        (order.len() == m).then_some(order)
    }
}

/// Contracts `partition` over `graph`.
///
/// The partition must be the SCC partition of the graph: it has to cover
/// every vertex exactly once, each class must be strongly connected on its
/// own, and the contracted graph must be acyclic (otherwise two classes
/// could be merged).
pub fn condensation(
    graph: &DirectedGraph,
    partition: &SccPartition,
) -> Result<CondensationDag, GraphError> {
    let n = graph.n();
    if partition.class_of.len() != n {
        return Err(GraphError::InconsistentPartition("class_of does not cover every vertex"));
    }
    let mut seen = vec![false; n];
    for (id, members) in partition.classes.iter().enumerate() {
        if members.is_empty() {
            return Err(GraphError::InconsistentPartition("empty class"));
        }
        for &v in members {
            if v >= n || seen[v] {
                return Err(GraphError::InconsistentPartition("classes are not disjoint"));
            }
            if partition.class_of[v] != id {
                return Err(GraphError::InconsistentPartition("class_of disagrees with classes"));
            }
            seen[v] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(GraphError::InconsistentPartition("classes do not cover every vertex"));
    }

    for members in &partition.classes {
        if !class_is_strongly_connected(graph, &partition.class_of, members) {
            return Err(GraphError::InconsistentPartition("a class is not strongly connected"));
        }
    }

    let m = partition.classes.len();
    let mut successors = vec![Vec::new(); m];
    for (i, j) in graph.edges() {
        let (a, b) = (partition.class_of[i], partition.class_of[j]);
        if a != b {
            successors[a].push(b);
        }
    }
    for s in &mut successors {
        s.sort_unstable();
        s.dedup();
    }
    let edges = successors
        .iter()
        .enumerate()
        .flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
        .collect();

    let dag = CondensationDag { nodes: partition.classes.clone(), edges, successors };
    if dag.topological_order().is_none() {
        return Err(GraphError::InconsistentPartition("contracted graph has a cycle"));
    }
    Ok(dag)
}

/// Forward and backward search from the first member, restricted to the class.
fn class_is_strongly_connected(graph: &DirectedGraph, class_of: &[usize], members: &[usize]) -> bool {
    let id = class_of[members[0]];
    let within = |v: usize| class_of[v] == id;
    let reach = |forward: bool| -> usize {
        let mut mark = vec![false; graph.n()];
        let mut todo = vec![members[0]];
        mark[members[0]] = true;
        let mut count = 1;
        while let Some(v) = todo.pop() {
            if forward {
                for &w in graph.successors(v) {
                    if within(w) && !mark[w] {
                        mark[w] = true;
                        count += 1;
                        todo.push(w);
                    }
                }
            } else {
                for &u in members {
                    if !mark[u] && graph.has_edge(u, v) {
                        mark[u] = true;
                        count += 1;
                        todo.push(u);
                    }
                }
            }
        }
        count
    };
    reach(true) == members.len() && reach(false) == members.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn oracle_classes(g: &DirectedGraph) -> BTreeSet<Vec<usize>> {
        let n = g.n();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
            let mut todo = vec![i];
            while let Some(v) = todo.pop() {
                for &w in g.successors(v) {
                    if !row[w] {
                        row[w] = true;
                        todo.push(w);
                    }
                }
            }
        }
        (0..n)
            .map(|i| (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect())
            .collect()
    }

    fn classes_set(p: &SccPartition) -> BTreeSet<Vec<usize>> {
        p.classes.iter().cloned().collect()
    }

    #[test]
    fn small_example() {
        // 1->2, 2->1, 2->3 in one-based labels
        let g = DirectedGraph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        let p = scc(&g);
        assert_eq!(classes_set(&p), oracle_classes(&g));
        assert_eq!(p.classes, vec![vec![2], vec![0, 1]]);

        let dag = condensation(&g, &p).unwrap();
        assert_eq!(dag.edges, vec![(1, 0)]);
        assert_eq!(dag.sinks().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn singleton_and_complete() {
        let p = scc(&DirectedGraph::empty(1));
        assert_eq!(p.classes, vec![vec![0]]);

        let complete =
            DirectedGraph::from_edges(5, (0..5).flat_map(|i| (0..5).map(move |j| (i, j)))).unwrap();
        let p = scc(&complete);
        assert_eq!(p.classes, vec![vec![0, 1, 2, 3, 4]]);
        let dag = condensation(&complete, &p).unwrap();
        assert!(dag.edges.is_empty());
        assert_eq!(dag.nodes.len(), 1);

        assert!(scc(&DirectedGraph::empty(0)).is_empty());
    }

    #[test]
    fn edgeless_condenses_to_isolated_nodes() {
        let g = DirectedGraph::empty(3);
        let dag = condensation(&g, &scc(&g)).unwrap();
        assert_eq!(dag.nodes.len(), 3);
        assert!(dag.edges.is_empty());
    }

    #[test]
    fn sinks_come_first() {
        let g = DirectedGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let p = scc(&g);
        assert_eq!(p.classes, vec![vec![3], vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn deep_chain_does_not_recurse() {
        let n = 200_000;
        let g = DirectedGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap();
        assert_eq!(scc(&g).len(), 1);
    }

    #[test]
    fn inconsistent_partitions_are_rejected() {
        let g = DirectedGraph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        // {0}, {1}, {2}: {0} and {1} could merge
        let split = SccPartition { classes: vec![vec![0], vec![1], vec![2]], class_of: vec![0, 1, 2] };
        assert!(condensation(&g, &split).is_err());
        // {0,1,2}: 2 cannot reach back
        let merged = SccPartition { classes: vec![vec![0, 1, 2]], class_of: vec![0, 0, 0] };
        assert!(condensation(&g, &merged).is_err());
        // missing vertex
        let partial = SccPartition { classes: vec![vec![0, 1]], class_of: vec![0, 0, 0] };
        assert!(condensation(&g, &partial).is_err());
    }

    #[test]
    fn exhaustive_three_vertex_graphs() {
        // all 2^9 patterns including self-loops
        for mask in 0u32..512 {
            let edges = (0..9).filter(|b| mask >> b & 1 == 1).map(|b| (b / 3, b % 3));
            let g = DirectedGraph::from_edges(3, edges).unwrap();
            let p = scc(&g);
            assert_eq!(classes_set(&p), oracle_classes(&g), "mask {mask}");
            let dag = condensation(&g, &p).unwrap();
            assert!(dag.topological_order().is_some());
            for &(a, b) in &dag.edges {
                assert!(b < a, "sinks-first order violated for mask {mask}");
            }
        }
    }
}
