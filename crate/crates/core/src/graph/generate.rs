//! Deterministic graph generators. `generate` is a pure function of
//! `(kind, params, seed)`: two calls yield identical edge lists.

use super::{Graph, GraphError, NodeId};
use crate::util::derive_seed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Cycle { n: u32 },
    Circulant { n: u32, offsets: Vec<u32> },
    Hypercube { dim: u32 },
    Torus { rows: u32, cols: u32, chords: bool },
    RandomRegular { n: u32, d: u32 },
    Complete { n: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(flatten)]
    pub kind: GraphKind,
    #[serde(default)]
    pub seed: u64,
}

impl GraphSpec {
    pub fn new(kind: GraphKind, seed: u64) -> GraphSpec {
        GraphSpec { kind, seed }
    }
}

pub fn generate(spec: &GraphSpec) -> Result<Graph, GraphError> {
    let g = match &spec.kind {
        GraphKind::Cycle { n } => cycle(*n)?,
        GraphKind::Circulant { n, offsets } => circulant(*n, offsets)?,
        GraphKind::Hypercube { dim } => hypercube(*dim)?,
        GraphKind::Torus { rows, cols, chords } => torus(*rows, *cols, *chords)?,
        GraphKind::RandomRegular { n, d } => random_regular(*n, *d, spec.seed)?,
        GraphKind::Complete { n } => complete(*n)?,
    };
    Ok(g.with_spec(spec.clone()))
}

fn cycle(n: u32) -> Result<Graph, GraphError> {
    circulant(n, &[1])
}

fn circulant(n: u32, offsets: &[u32]) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InfeasibleParams(format!(
            "circulant needs n >= 3, got {n}"
        )));
    }
    let mut edges = Vec::new();
    for &off in offsets {
        if off == 0 || off >= n || (off > n / 2) {
            return Err(GraphError::InfeasibleParams(format!(
                "circulant offset {off} out of range for n = {n}"
            )));
        }
        for u in 0..n {
            let v = (u + off) % n;
            // Offset n/2 on even n would emit each chord twice.
            if off * 2 == n && u >= n / 2 {
                continue;
            }
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

fn hypercube(dim: u32) -> Result<Graph, GraphError> {
    if dim == 0 || dim > 16 {
        return Err(GraphError::InfeasibleParams(format!(
            "hypercube dimension {dim} out of range"
        )));
    }
    let n = 1u32 << dim;
    let mut edges = Vec::new();
    for u in 0..n {
        for b in 0..dim {
            let v = u ^ (1 << b);
            if u < v {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

fn torus(rows: u32, cols: u32, chords: bool) -> Result<Graph, GraphError> {
    if rows < 3 || cols < 3 {
        return Err(GraphError::InfeasibleParams(format!(
            "torus needs rows, cols >= 3, got {rows}x{cols}"
        )));
    }
    let id = |r: u32, c: u32| -> NodeId { r * cols + c };
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            edges.push((id(r, c), id(r, (c + 1) % cols)));
            edges.push((id(r, c), id((r + 1) % rows, c)));
            if chords {
                edges.push((id(r, c), id((r + 1) % rows, (c + 1) % cols)));
            }
        }
    }
    Graph::from_edges(rows * cols, &edges)
}

fn complete(n: u32) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::InfeasibleParams(format!(
            "complete graph needs n >= 2, got {n}"
        )));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

/// Random d-regular graph: pairing model, then double-edge swaps until the
/// multigraph is simple, retried until connected.
fn random_regular(n: u32, d: u32, seed: u64) -> Result<Graph, GraphError> {
    if d >= n || (n as u64 * d as u64) % 2 != 0 || d == 0 {
        return Err(GraphError::InfeasibleParams(format!(
            "random_regular infeasible: n = {n}, d = {d}"
        )));
    }
    const MAX_ATTEMPTS: u64 = 200;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x7265_6775, attempt]));
        let mut stubs: Vec<NodeId> = (0..n)
            .flat_map(|u| std::iter::repeat_n(u, d as usize))
            .collect();
        stubs.shuffle(&mut rng);
        let mut pairs: Vec<(NodeId, NodeId)> = stubs
            .chunks_exact(2)
            .map(|p| (p[0], p[1]))
            .collect();
        if !repair_to_simple(&mut pairs, &mut rng) {
            continue;
        }
        let g = Graph::from_edges(n, &pairs)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::InfeasibleParams(format!(
        "random_regular(n = {n}, d = {d}) produced no simple connected graph"
    )))
}

/// Degree-preserving double-edge swaps until no self-loops or parallel
/// edges remain. Returns false if the pass budget runs out.
fn repair_to_simple(pairs: &mut [(NodeId, NodeId)], rng: &mut ChaCha8Rng) -> bool {
    use rand::Rng;
    use std::collections::HashMap;
    for _pass in 0..200 {
        let mut seen: HashMap<(NodeId, NodeId), usize> = HashMap::new();
        let mut bad: Vec<usize> = Vec::new();
        for (idx, &(a, b)) in pairs.iter().enumerate() {
            if a == b {
                bad.push(idx);
                continue;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key, idx).is_some() {
                bad.push(idx);
            }
        }
        if bad.is_empty() {
            return true;
        }
        for idx in bad {
            let other = rng.random_range(0..pairs.len());
            if other == idx {
                continue;
            }
            // (a,b),(c,d) -> (a,d),(c,b)
            let (a, b) = pairs[idx];
            let (c, d) = pairs[other];
            pairs[idx] = (a, d);
            pairs[other] = (c, b);
        }
    }
    false
}
