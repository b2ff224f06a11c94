//! Simple undirected graphs with stable edge identifiers.
//!
//! Edge ids are assigned by position in the lexicographically sorted list of
//! `(min, max)` endpoint pairs, so any party that knows the edge list derives
//! identical ids with zero communication. All graph values are immutable
//! after construction and all operations here are pure.

mod generate;
mod io;
mod metrics;

pub use generate::{generate, GraphKind, GraphSpec};
pub use io::{from_edge_list_text, from_json, to_edge_list_text, to_json};
pub use metrics::{
    ball_volume_profile, bfs_dist, conductance, conductance_estimate, diameter, edge_connectivity,
    ConductanceReport,
};

use crate::util::BitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = u32;
pub type EdgeId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("node id {0} out of range (n = {1})")]
    NodeOutOfRange(NodeId, u32),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("exact conductance limited to n <= {limit}, got n = {n}")]
    TooLargeForExact { n: u32, limit: u32 },
    #[error("infeasible generator parameters: {0}")]
    InfeasibleParams(String),
    #[error("malformed graph text: {0}")]
    Parse(String),
}

/// Immutable simple undirected graph.
#[derive(Clone, Debug)]
pub struct Graph {
    n: u32,
    /// Sorted `(u, v)` pairs with `u < v`; index is the [`EdgeId`].
    edges: Vec<(NodeId, NodeId)>,
    /// Per-node list of `(neighbor, edge id)`.
    adj: Vec<Vec<(NodeId, EdgeId)>>,
    /// Generator provenance, when the graph came from [`generate`].
    spec: Option<GraphSpec>,
}

impl Graph {
    /// Builds a graph from an edge list, validating simplicity and range.
    pub fn from_edges(n: u32, edges: &[(NodeId, NodeId)]) -> Result<Graph, GraphError> {
        let mut norm: Vec<(NodeId, NodeId)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= n {
                return Err(GraphError::NodeOutOfRange(a, n));
            }
            if b >= n {
                return Err(GraphError::NodeOutOfRange(b, n));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); n as usize];
        for (eid, &(u, v)) in norm.iter().enumerate() {
            adj[u as usize].push((v, eid as EdgeId));
            adj[v as usize].push((u, eid as EdgeId));
        }
        Ok(Graph {
            n,
            edges: norm,
            adj,
            spec: None,
        })
    }

    pub(crate) fn with_spec(mut self, spec: GraphSpec) -> Graph {
        self.spec = Some(spec);
        self
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.edges.len() as u32
    }

    #[inline]
    pub fn edge(&self, eid: EdgeId) -> (NodeId, NodeId) {
        self.edges[eid as usize]
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok().map(|i| i as EdgeId)
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adj[u as usize]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> u32 {
        self.adj[u as usize].len() as u32
    }

    #[inline]
    pub fn other_endpoint(&self, eid: EdgeId, u: NodeId) -> NodeId {
        let (a, b) = self.edges[eid as usize];
        if a == u {
            b
        } else {
            a
        }
    }

    pub fn spec(&self) -> Option<&GraphSpec> {
        self.spec.as_ref()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let empty = EdgeSet::empty(self.m());
        bfs_dist(self, 0, &empty).iter().all(Option::is_some)
    }

    /// Total volume 2m: the sum of all degrees.
    pub fn total_volume(&self) -> u64 {
        2 * self.m() as u64
    }
}

/// A set of edge ids, used for fault sets and cut candidates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    bits: BitSet,
    ids: Vec<EdgeId>,
}

impl EdgeSet {
    pub fn empty(m: u32) -> EdgeSet {
        EdgeSet {
            bits: BitSet::new(m as usize),
            ids: Vec::new(),
        }
    }

    /// Builds a set from ids, which must all be `< m`. Duplicates collapse.
    pub fn from_ids(m: u32, ids: &[EdgeId]) -> Result<EdgeSet, GraphError> {
        let mut set = EdgeSet::empty(m);
        for &id in ids {
            if id >= m {
                return Err(GraphError::NodeOutOfRange(id, m));
            }
            if set.bits.insert(id as usize) {
                set.ids.push(id);
            }
        }
        set.ids.sort_unstable();
        Ok(set)
    }

    #[inline]
    pub fn contains(&self, id: EdgeId) -> bool {
        self.bits.contains(id as usize)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[EdgeId] {
        &self.ids
    }
}

/// Cut statistics: boundary size, the volumes of both sides, and the
/// conductance value they determine.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CutStats {
    /// Number of edges crossing the cut.
    pub boundary: u64,
    /// Volume (sum of degrees) of the chosen side.
    pub vol_s: u64,
    /// Volume of the complement side.
    pub vol_comp: u64,
}

impl CutStats {
    pub fn conductance(&self) -> f64 {
        let denom = self.vol_s.min(self.vol_comp);
        if denom == 0 {
            f64::INFINITY
        } else {
            self.boundary as f64 / denom as f64
        }
    }

    /// Exact comparison of two conductance values via cross-multiplication.
    pub fn conductance_lt(&self, other: &CutStats) -> bool {
        let a = self.boundary as u128 * other.vol_s.min(other.vol_comp) as u128;
        let b = other.boundary as u128 * self.vol_s.min(self.vol_comp) as u128;
        a < b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_ids_are_sorted_pair_positions() {
        let g = Graph::from_edges(4, &[(2, 3), (0, 1), (1, 2), (3, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert_eq!(g.edge_id(3, 0), Some(1));
        assert_eq!(g.edge_id(0, 2), None);
        assert_eq!(g.other_endpoint(2, 2), 1);
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(matches!(
            Graph::from_edges(3, &[(1, 1)]),
            Err(GraphError::SelfLoop(1))
        ));
        assert!(matches!(
            Graph::from_edges(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 5)]),
            Err(GraphError::NodeOutOfRange(5, 2))
        ));
    }
}
