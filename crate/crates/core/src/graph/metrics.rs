//! Distance, connectivity, and conductance computations.

use super::{CutStats, EdgeId, EdgeSet, Graph, GraphError, NodeId};
use std::collections::VecDeque;

/// Exact hop distances from `src` in `g` with `forbidden` edges removed.
/// Unreachable nodes come back as `None`; unreachability is a value here,
/// not an error.
pub fn bfs_dist(g: &Graph, src: NodeId, forbidden: &EdgeSet) -> Vec<Option<u32>> {
    assert!(src < g.n(), "source {src} out of range");
    let mut dist = vec![None; g.n() as usize];
    let mut queue = VecDeque::new();
    dist[src as usize] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize].unwrap();
        for &(v, eid) in g.neighbors(u) {
            if forbidden.contains(eid) || dist[v as usize].is_some() {
                continue;
            }
            dist[v as usize] = Some(du + 1);
            queue.push_back(v);
        }
    }
    dist
}

/// Maximum hop distance over all pairs. Errors when `g` is disconnected.
pub fn diameter(g: &Graph) -> Result<u32, GraphError> {
    let empty = EdgeSet::empty(g.m());
    let mut best = 0;
    for src in 0..g.n() {
        for d in bfs_dist(g, src, &empty) {
            match d {
                Some(d) => best = best.max(d),
                None => return Err(GraphError::Disconnected),
            }
        }
    }
    Ok(best)
}

/// Exact edge connectivity: unit-capacity max-flow from node 0 to every
/// other node, taking the minimum. Returns 0 for disconnected graphs.
pub fn edge_connectivity(g: &Graph) -> u32 {
    if g.n() <= 1 {
        return 0;
    }
    if !g.is_connected() {
        return 0;
    }
    let mut best = u32::MAX;
    for sink in 1..g.n() {
        best = best.min(max_flow_unit(g, 0, sink));
        if best == 0 {
            break;
        }
    }
    best
}

/// Dinic max-flow with unit capacities on both directions of every edge.
fn max_flow_unit(g: &Graph, s: NodeId, t: NodeId) -> u32 {
    // Arc representation: 2 arcs per undirected edge, each of capacity 1,
    // paired with its reverse.
    let n = g.n() as usize;
    let m = g.m() as usize;
    // cap[2e] = capacity u->v remaining, cap[2e+1] = v->u remaining.
    let mut cap = vec![1i8; 2 * m];
    let mut level = vec![-1i32; n];
    let mut iter_at = vec![0usize; n];
    let mut flow = 0;
    loop {
        // BFS levels on the residual graph.
        level.fill(-1);
        level[s as usize] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &(v, eid) in g.neighbors(u) {
                let arc = arc_index(g, eid, u);
                if cap[arc] > 0 && level[v as usize] < 0 {
                    level[v as usize] = level[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[t as usize] < 0 {
            return flow;
        }
        iter_at.fill(0);
        while dfs_augment(g, s, t, &mut cap, &level, &mut iter_at) {
            flow += 1;
        }
    }
}

#[inline]
fn arc_index(g: &Graph, eid: EdgeId, from: NodeId) -> usize {
    let (u, _) = g.edge(eid);
    if from == u {
        2 * eid as usize
    } else {
        2 * eid as usize + 1
    }
}

fn dfs_augment(
    g: &Graph,
    u: NodeId,
    t: NodeId,
    cap: &mut [i8],
    level: &[i32],
    iter_at: &mut [usize],
) -> bool {
    if u == t {
        return true;
    }
    while iter_at[u as usize] < g.neighbors(u).len() {
        let (v, eid) = g.neighbors(u)[iter_at[u as usize]];
        let arc = arc_index(g, eid, u);
        if cap[arc] > 0 && level[v as usize] == level[u as usize] + 1 {
            if dfs_augment(g, v, t, cap, level, iter_at) {
                cap[arc] -= 1;
                cap[arc ^ 1] += 1;
                return true;
            }
        }
        iter_at[u as usize] += 1;
    }
    false
}

/// Upper bound on the node count for exact conductance enumeration.
pub const EXACT_CONDUCTANCE_LIMIT: u32 = 20;

/// Exact minimum conductance over all nonempty proper subsets, by
/// enumerating all cuts. Limited to small graphs.
pub fn conductance(g: &Graph) -> Result<CutStats, GraphError> {
    if g.n() > EXACT_CONDUCTANCE_LIMIT {
        return Err(GraphError::TooLargeForExact {
            n: g.n(),
            limit: EXACT_CONDUCTANCE_LIMIT,
        });
    }
    if g.n() < 2 || g.m() == 0 {
        return Err(GraphError::Disconnected);
    }
    let n = g.n() as usize;
    let deg: Vec<u64> = (0..g.n()).map(|u| g.degree(u) as u64).collect();
    let total: u64 = deg.iter().sum();
    let mut best: Option<CutStats> = None;
    // Fix node 0 on the S side to halve the enumeration; conductance is
    // symmetric in S and its complement.
    for mask in 0u32..(1 << (n - 1)) {
        let side = (mask << 1) | 1;
        if side == (1u32 << n) - 1 {
            continue; // proper subsets only
        }
        let mut vol_s = 0u64;
        for u in 0..n {
            if side >> u & 1 == 1 {
                vol_s += deg[u];
            }
        }
        let vol_comp = total - vol_s;
        if vol_s == 0 || vol_comp == 0 {
            continue;
        }
        let mut boundary = 0u64;
        for &(u, v) in g.edges() {
            if (side >> u & 1) != (side >> v & 1) {
                boundary += 1;
            }
        }
        let cand = CutStats {
            boundary,
            vol_s,
            vol_comp,
        };
        if best.as_ref().is_none_or(|b| cand.conductance_lt(b)) {
            best = Some(cand);
        }
    }
    best.ok_or(GraphError::Disconnected)
}

#[derive(Clone, Debug, serde::Serialize)]
pub enum ConductanceReport {
    Exact(CutStats),
    /// Upper bound only, from singleton and BFS-ball sweep cuts; flagged so
    /// downstream consumers never mistake it for the exact value.
    Estimate {
        upper: CutStats,
    },
}

/// Exact conductance when feasible, otherwise a flagged upper-bound
/// estimate from sweep cuts.
pub fn conductance_estimate(g: &Graph) -> Result<ConductanceReport, GraphError> {
    match conductance(g) {
        Ok(stats) => Ok(ConductanceReport::Exact(stats)),
        Err(GraphError::TooLargeForExact { .. }) => {
            let deg: Vec<u64> = (0..g.n()).map(|u| g.degree(u) as u64).collect();
            let total: u64 = deg.iter().sum();
            let empty = EdgeSet::empty(g.m());
            let mut best: Option<CutStats> = None;
            for w in 0..g.n() {
                // Sweep the BFS order from w: prefixes are candidate cuts.
                let dist = bfs_dist(g, w, &empty);
                let mut order: Vec<NodeId> = (0..g.n()).collect();
                order.sort_by_key(|&u| (dist[u as usize].unwrap_or(u32::MAX), u));
                let mut in_s = vec![false; g.n() as usize];
                let mut vol_s = 0u64;
                let mut boundary = 0i64;
                for &u in order.iter().take(g.n() as usize - 1) {
                    in_s[u as usize] = true;
                    vol_s += deg[u as usize];
                    for &(v, _) in g.neighbors(u) {
                        boundary += if in_s[v as usize] { -1 } else { 1 };
                    }
                    let vol_comp = total - vol_s;
                    if vol_s == 0 || vol_comp == 0 {
                        continue;
                    }
                    let cand = CutStats {
                        boundary: boundary as u64,
                        vol_s,
                        vol_comp,
                    };
                    if best.as_ref().is_none_or(|b| cand.conductance_lt(b)) {
                        best = Some(cand);
                    }
                }
            }
            Ok(ConductanceReport::Estimate {
                upper: best.ok_or(GraphError::Disconnected)?,
            })
        }
        Err(e) => Err(e),
    }
}

/// Volume profile of balls around `w`: `vol(B_0), vol(B_1), ...` up to the
/// radius where the ball volume reaches the total volume `2m`.
pub fn ball_volume_profile(g: &Graph, w: NodeId) -> Vec<u64> {
    let empty = EdgeSet::empty(g.m());
    let dist = bfs_dist(g, w, &empty);
    let total = g.total_volume();
    let max_r = dist.iter().flatten().copied().max().unwrap_or(0);
    let mut profile = Vec::new();
    let mut vol = 0u64;
    let mut by_r: Vec<u64> = vec![0; max_r as usize + 1];
    for u in 0..g.n() {
        if let Some(d) = dist[u as usize] {
            by_r[d as usize] += g.degree(u) as u64;
        }
    }
    for r in 0..=max_r {
        vol += by_r[r as usize];
        profile.push(vol);
        if vol == total {
            break;
        }
    }
    profile
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind, GraphSpec};

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn k4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn bfs_on_path() {
        let g = path3();
        let d = bfs_dist(&g, 0, &EdgeSet::empty(g.m()));
        assert_eq!(d, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn bfs_forced_detour_on_triangle() {
        let g = triangle();
        let forbidden = EdgeSet::from_ids(g.m(), &[g.edge_id(0, 1).unwrap()]).unwrap();
        let d = bfs_dist(&g, 0, &forbidden);
        assert_eq!(d[1], Some(2));
    }

    #[test]
    fn bfs_unreachable_is_a_value() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let d = bfs_dist(&g, 0, &EdgeSet::empty(g.m()));
        assert_eq!(d[2], None);
    }

    #[test]
    fn diameters() {
        assert_eq!(diameter(&k4()).unwrap(), 1);
        let c8 = generate(&GraphSpec::new(GraphKind::Cycle { n: 8 }, 0)).unwrap();
        assert_eq!(diameter(&c8).unwrap(), 4);
        let disc = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(matches!(diameter(&disc), Err(GraphError::Disconnected)));
    }

    #[test]
    fn circulant_diameter_matches_all_pairs_oracle() {
        let g = generate(&GraphSpec::new(
            GraphKind::Circulant {
                n: 16,
                offsets: vec![1, 2],
            },
            0,
        ))
        .unwrap();
        // Independent oracle: max over all sources of max BFS distance.
        let empty = EdgeSet::empty(g.m());
        let mut oracle = 0;
        for s in 0..g.n() {
            for d in bfs_dist(&g, s, &empty) {
                oracle = oracle.max(d.unwrap());
            }
        }
        assert_eq!(diameter(&g).unwrap(), oracle);
        assert_eq!(oracle, 4);
    }

    #[test]
    fn edge_connectivity_known_values() {
        assert_eq!(edge_connectivity(&k4()), 3);
        let c8 = generate(&GraphSpec::new(GraphKind::Cycle { n: 8 }, 0)).unwrap();
        assert_eq!(edge_connectivity(&c8), 2);
        let q4 = generate(&GraphSpec::new(GraphKind::Hypercube { dim: 4 }, 0)).unwrap();
        assert_eq!(edge_connectivity(&q4), 4);
        let disc = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(edge_connectivity(&disc), 0);
    }

    #[test]
    fn conductance_k4() {
        // Brute force over all 2^4 - 2 cuts gives 2/3: balanced cuts have
        // boundary 4 over volume 6, unbalanced 3 over 3.
        let stats = conductance(&k4()).unwrap();
        assert_eq!((stats.boundary, stats.vol_s.min(stats.vol_comp)), (4, 6));
    }

    #[test]
    fn conductance_c4_and_k2() {
        let c4 = generate(&GraphSpec::new(GraphKind::Cycle { n: 4 }, 0)).unwrap();
        let stats = conductance(&c4).unwrap();
        assert_eq!(stats.conductance(), 0.5);
        let k2 = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let stats = conductance(&k2).unwrap();
        assert_eq!(stats.conductance(), 1.0);
    }

    #[test]
    fn conductance_guard() {
        let g = generate(&GraphSpec::new(GraphKind::Cycle { n: 24 }, 0)).unwrap();
        assert!(matches!(
            conductance(&g),
            Err(GraphError::TooLargeForExact { n: 24, .. })
        ));
        assert!(matches!(
            conductance_estimate(&g),
            Ok(ConductanceReport::Estimate { .. })
        ));
    }

    #[test]
    fn ball_profile_c8_and_k4() {
        let c8 = generate(&GraphSpec::new(GraphKind::Cycle { n: 8 }, 0)).unwrap();
        let profile = ball_volume_profile(&c8, 3);
        assert_eq!(profile[0], 2);
        assert_eq!(profile[1], 6);
        let k4 = k4();
        let profile = ball_volume_profile(&k4, 0);
        assert_eq!(profile[1], 12); // 2|E|
    }
}
