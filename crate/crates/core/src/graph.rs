//! Undirected labeled graph view of a sentence.
//!
//! Tokens are nodes; dependency arcs become undirected edges that still
//! remember which endpoint was the head. Multiple edges between the same
//! pair of tokens are kept — a basic `conj` arc and an enhanced `conj:and`
//! arc over the same pair are two distinct edges.

use thiserror::Error;

use crate::annotation::Sentence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} is out of range 1..={node_count}")]
    NodeOutOfRange { node: usize, node_count: usize },
}

/// An undirected edge carrying its dependency label and original direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Head endpoint of the original arc.
    pub head: usize,
    /// Dependent endpoint of the original arc.
    pub dependent: usize,
    /// Label as annotated, e.g. `"nmod:of"`.
    pub raw_label: String,
    /// Label up to the first colon, e.g. `"nmod"`.
    pub base_type: String,
    /// Enhancement word after the first colon, if any.
    pub connector: Option<String>,
}

impl Edge {
    /// The endpoint that is not `node`.
    ///
    /// Callers must pass one of the edge's endpoints.
    pub fn other(&self, node: usize) -> usize {
        if node == self.head {
            self.dependent
        } else {
            debug_assert_eq!(node, self.dependent);
            self.head
        }
    }

    /// Whether `node` is an endpoint of this edge.
    pub fn touches(&self, node: usize) -> bool {
        self.head == node || self.dependent == node
    }
}

/// Adjacency-indexed undirected graph over a sentence's tokens.
#[derive(Debug, Clone)]
pub struct SentenceGraph {
    node_count: usize,
    edges: Vec<Edge>,
    /// For each node (1-based), indices into `edges`, ordered by
    /// (other endpoint, label) for deterministic traversal.
    adjacency: Vec<Vec<usize>>,
}

/// Builds the undirected graph for a sentence.
///
/// Root arcs (head 0) are not part of the graph: node ids range over the
/// sentence's token indices only.
pub fn build_graph(sentence: &Sentence) -> SentenceGraph {
    let node_count = sentence.tokens.len();
    let mut edges = Vec::new();
    for arc in &sentence.arcs {
        if arc.head == 0 {
            continue;
        }
        edges.push(Edge {
            head: arc.head,
            dependent: arc.dependent,
            raw_label: arc.raw_label.clone(),
            base_type: arc.base_type.clone(),
            connector: arc.connector.clone(),
        });
    }
    let mut adjacency = vec![Vec::new(); node_count + 1];
    for (edge_index, edge) in edges.iter().enumerate() {
        adjacency[edge.head].push(edge_index);
        if edge.dependent != edge.head {
            adjacency[edge.dependent].push(edge_index);
        }
    }
    for (node, incident) in adjacency.iter_mut().enumerate() {
        incident.sort_by(|&a, &b| {
            let ea = &edges[a];
            let eb = &edges[b];
            (ea.other(node), &ea.raw_label, a).cmp(&(eb.other(node), &eb.raw_label, b))
        });
    }
    SentenceGraph {
        node_count,
        edges,
        adjacency,
    }
}

impl SentenceGraph {
    /// Number of nodes (== number of tokens in the sentence).
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// All edges, in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges incident to `node`, ordered by (other endpoint, label).
    ///
    /// `node` must be a 1-based token index; 0 and out-of-range indices are
    /// contract violations.
    pub fn incident_edges(&self, node: usize) -> Result<Vec<&Edge>, GraphError> {
        if node == 0 || node > self.node_count {
            return Err(GraphError::NodeOutOfRange {
                node,
                node_count: self.node_count,
            });
        }
        Ok(self.adjacency[node]
            .iter()
            .map(|&i| &self.edges[i])
            .collect())
    }
}
