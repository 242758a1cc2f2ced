use alloc::vec;
use alloc::vec::Vec;

use super::{scc, DirectedGraph, POSITIVE_WEIGHT_THRESHOLD};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AgentRole {
    /// Member of a class no confidence weight leaves (opinion leader).
    Essential,
    /// Member of a class with weight on some other class (opinion follower).
    Inessential,
}

/// Refinement of [`AgentRole`] by the shape of the agent's class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Mindedness {
    /// Essential, and every member trusts every other member directly.
    ClosedMinded,
    /// Essential, but the class subgraph is not complete.
    ModerateMinded,
    /// Inessential.
    OpenMinded,
}

impl AgentRole {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentRole::Essential => "essential",
            AgentRole::Inessential => "inessential",
        }
    }
}

impl Mindedness {
    pub fn as_str(self) -> &'static str {
        match self {
            Mindedness::ClosedMinded => "closed-minded",
            Mindedness::ModerateMinded => "moderate-minded",
            Mindedness::OpenMinded => "open-minded",
        }
    }
}

/// Partition of agents into essential and inessential classes.
///
/// Both class lists are ordered by their smallest member; members are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AgentClassification {
    pub essential: Vec<Vec<usize>>,
    pub inessential: Vec<Vec<usize>>,
    pub label_of: Vec<AgentRole>,
    pub refined_label_of: Vec<Mindedness>,
}

impl AgentClassification {
    /// Number of essential classes.
    pub fn g(&self) -> usize {
        self.essential.len()
    }

    pub fn n(&self) -> usize {
        self.label_of.len()
    }

    pub fn essential_agent_count(&self) -> usize {
        self.essential.iter().map(Vec::len).sum()
    }

    pub fn is_essential(&self, agent: usize) -> bool {
        self.label_of[agent] == AgentRole::Essential
    }

    /// Essential classes largest first; ties go to the class with the
    /// smaller first member.
    pub fn essential_by_size(&self) -> Vec<&[usize]> {
        let mut classes: Vec<&[usize]> = self.essential.iter().map(Vec::as_slice).collect();
        classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        classes
    }

    /// All inessential agents, ascending.
    pub fn inessential_agents(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.is_essential(i)).collect()
    }
}

/// Classifies agents from the positivity pattern of `matrix`.
pub fn classify(matrix: &Matrix) -> AgentClassification {
    classify_graph(&DirectedGraph::from_matrix(matrix, POSITIVE_WEIGHT_THRESHOLD))
}

/// A class is essential iff it is a sink of the condensation. Self-loops
/// never leave a class, so they cannot affect the verdict.
pub fn classify_graph(graph: &DirectedGraph) -> AgentClassification {
    let n = graph.n();
    let partition = scc(graph);

    let mut essential = Vec::new();
    let mut inessential = Vec::new();
    let mut label_of = vec![AgentRole::Inessential; n];
    let mut refined_label_of = vec![Mindedness::OpenMinded; n];

    for (id, members) in partition.classes.iter().enumerate() {
        let is_sink = members
            .iter()
            .all(|&v| graph.successors(v).iter().all(|&w| partition.class_of[w] == id));
        if is_sink {
            let refined = if is_complete(graph, members) {
                Mindedness::ClosedMinded
            } else {
                Mindedness::ModerateMinded
            };
            for &v in members {
                label_of[v] = AgentRole::Essential;
                refined_label_of[v] = refined;
            }
            essential.push(members.clone());
        } else {
            inessential.push(members.clone());
        }
    }
    essential.sort_unstable_by_key(|c| c[0]);
    inessential.sort_unstable_by_key(|c| c[0]);

    AgentClassification { essential, inessential, label_of, refined_label_of }
}

/// Every ordered pair of distinct members has an edge; self-loops ignored.
fn is_complete(graph: &DirectedGraph, members: &[usize]) -> bool {
    members.iter().all(|&u| {
        let succ = graph.successors(u);
        members.iter().all(|&v| v == u || succ.binary_search(&v).is_ok())
    })
}
