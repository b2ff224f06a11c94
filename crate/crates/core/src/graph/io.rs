//! Graph serialization: the `n m` / `u v` edge-list text format and a JSON
//! variant carrying generator provenance.

use super::{Graph, GraphError, GraphSpec, NodeId};
use serde::{Deserialize, Serialize};

/// Text format: a `n m` header line, then one `u v` line per edge in edge-id
/// order.
pub fn to_edge_list_text(g: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", g.n(), g.m()));
    for &(u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn from_edge_list_text(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| GraphError::Parse("empty input".into()))?;
    let mut parts = header.split_whitespace();
    let n: u32 = parse_field(parts.next(), "n")?;
    let m: usize = parse_field(parts.next(), "m")?;
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(m);
    for line in lines {
        let mut parts = line.split_whitespace();
        let u: u32 = parse_field(parts.next(), "u")?;
        let v: u32 = parse_field(parts.next(), "v")?;
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(GraphError::Parse(format!(
            "header claims {m} edges, found {}",
            edges.len()
        )));
    }
    Graph::from_edges(n, &edges)
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, name: &str) -> Result<T, GraphError> {
    tok.ok_or_else(|| GraphError::Parse(format!("missing field {name}")))?
        .parse()
        .map_err(|_| GraphError::Parse(format!("bad field {name}")))
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: u32,
    m: u32,
    edges: Vec<(NodeId, NodeId)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<GraphSpec>,
}

pub fn to_json(g: &Graph) -> String {
    serde_json::to_string_pretty(&GraphJson {
        n: g.n(),
        m: g.m(),
        edges: g.edges().to_vec(),
        generator: g.spec().cloned(),
    })
    .expect("graph serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<Graph, GraphError> {
    let parsed: GraphJson =
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let g = Graph::from_edges(parsed.n, &parsed.edges)?;
    Ok(match parsed.generator {
        Some(spec) => g.with_spec(spec),
        None => g,
    })
}
