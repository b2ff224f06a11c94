//! Covering-family verification oracles.
//!
//! `verify_strict` checks the path-containment form: for every `(u, v, E')`
//! with `|E'| <= k` and every simple `u`-`v` path of length at most `L` in
//! `g \ E'`, some subgraph contains the whole path and excludes `E'`.
//! `verify_relaxed` checks the distance form: some subgraph excludes `E'`
//! and has `dist(u, v) <= L` (directed distances for the directed flavor).
//! Pairs disconnected by `E'` itself are vacuous in both forms.

use super::{CoveringError, CoveringFamily, FamilyParams};
use crate::graph::{bfs_dist, EdgeId, EdgeSet, Graph, NodeId};
use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverCounterexample {
    pub u: NodeId,
    pub v: NodeId,
    pub faults: Vec<EdgeId>,
    /// Uncovered witness path (strict mode only).
    pub path: Option<Vec<EdgeId>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverVerdict {
    pub ok: bool,
    pub counterexample: Option<CoverCounterexample>,
    pub triples_checked: u64,
}

impl CoverVerdict {
    fn pass(triples: u64) -> CoverVerdict {
        CoverVerdict {
            ok: true,
            counterexample: None,
            triples_checked: triples,
        }
    }

    fn fail(cx: CoverCounterexample, triples: u64) -> CoverVerdict {
        CoverVerdict {
            ok: false,
            counterexample: Some(cx),
            triples_checked: triples,
        }
    }
}

const STRICT_MAX_N: u32 = 10;
const STRICT_MAX_K: u32 = 2;

/// Enumerates every fault set of size `0..=k` and every simple path of
/// length at most `min(L, n-1)` avoiding it. Guarded to small instances;
/// simple paths cannot exceed `n - 1` edges, which keeps enumeration
/// feasible at any `L`.
pub fn verify_strict(
    fam: &CoveringFamily,
    g: &Graph,
    l: u32,
    k: u32,
) -> Result<CoverVerdict, CoveringError> {
    if g.n() > STRICT_MAX_N || k > STRICT_MAX_K {
        return Err(CoveringError::Guard(format!(
            "strict verification limited to n <= {STRICT_MAX_N}, k <= {STRICT_MAX_K}; got n = {}, k = {k}",
            g.n()
        )));
    }
    let cap = l.min(g.n().saturating_sub(1)).max(1);
    let mut triples = 0u64;
    for faults in fault_sets(g.m(), k) {
        let verdict = match &fam.params {
            FamilyParams::Hash { .. } => strict_hash_one(fam, g, cap, &faults, &mut triples),
            _ => strict_generic_one(fam, g, cap, &faults, &mut triples),
        };
        if let Some(cx) = verdict {
            return Ok(CoverVerdict::fail(cx, triples));
        }
    }
    Ok(CoverVerdict::pass(triples))
}

/// All subsets of `0..m` with size `0..=k`, smallest sizes first.
fn fault_sets(m: u32, k: u32) -> Vec<Vec<EdgeId>> {
    let mut out = vec![vec![]];
    if k >= 1 {
        out.extend((0..m).map(|e| vec![e]));
    }
    if k >= 2 {
        for a in 0..m {
            for b in (a + 1)..m {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

struct PathDfs<'a> {
    g: &'a Graph,
    faults: &'a [EdgeId],
    cap: u32,
    on_path: Vec<bool>,
    path: Vec<EdgeId>,
}

impl PathDfs<'_> {
    /// Walks every simple path from `u`; `step` sees each pushed edge and
    /// answers whether the current path is still covered. Returns the first
    /// failing path, as (endpoint, edges).
    fn run<S>(&mut self, u: NodeId, step: &mut S) -> Option<(NodeId, Vec<EdgeId>)>
    where
        S: FnMut(&[EdgeId], EdgeId, bool) -> bool,
    {
        self.on_path[u as usize] = true;
        let result = self.descend(u, step);
        self.on_path[u as usize] = false;
        result
    }

    fn descend<S>(&mut self, at: NodeId, step: &mut S) -> Option<(NodeId, Vec<EdgeId>)>
    where
        S: FnMut(&[EdgeId], EdgeId, bool) -> bool,
    {
        if self.path.len() as u32 == self.cap {
            return None;
        }
        for idx in 0..self.g.neighbors(at).len() {
            let (next, eid) = self.g.neighbors(at)[idx];
            if self.on_path[next as usize] || self.faults.contains(&eid) {
                continue;
            }
            let toward_high = next > at;
            let covered = step(&self.path, eid, toward_high);
            self.path.push(eid);
            if !covered {
                return Some((next, self.path.clone()));
            }
            self.on_path[next as usize] = true;
            let found = self.descend(next, step);
            self.on_path[next as usize] = false;
            self.path.pop();
            if found.is_some() {
                return found;
            }
            // The caller's state is stack-shaped; tell it to pop.
            step(&self.path, eid, toward_high);
        }
        None
    }
}

/// Hash-flavor strict check for one fault set. A subgraph `(h, i)` avoids
/// `E'` only when `h` maps all of `E'` to the common value `i`; a path stays
/// covered while some such `h` maps no path edge to that value.
fn strict_hash_one(
    fam: &CoveringFamily,
    g: &Graph,
    cap: u32,
    faults: &[EdgeId],
    triples: &mut u64,
) -> Option<CoverCounterexample> {
    let (h_size, q) = match fam.params {
        FamilyParams::Hash { h_size, q, .. } => (h_size, q),
        _ => unreachable!(),
    };
    if faults.is_empty() {
        // Need some (h, i) with i unused by the path; path lengths are
        // capped at n-1, so q > cap makes every path covered.
        if q > cap {
            return None;
        }
        return strict_generic_one(fam, g, cap, faults, triples);
    }
    // h is valid when it maps every fault edge to one common value.
    let valid: Vec<u32> = (0..h_size)
        .filter(|&h| {
            let v0 = fam.hash_value(faults[0], h);
            faults.iter().all(|&e| fam.hash_value(e, h) == v0)
        })
        .collect();
    let words = (h_size as usize).div_ceil(64);
    let mut valid_mask = vec![0u64; words];
    for &h in &valid {
        valid_mask[h as usize / 64] |= 1 << (h % 64);
    }
    // collide[e] = set of valid h with h(e) equal to h's fault value.
    let mut collide = vec![0u64; g.m() as usize * words];
    for e in 0..g.m() {
        for &h in &valid {
            if fam.hash_value(e, h) == fam.hash_value(faults[0], h) {
                collide[e as usize * words + h as usize / 64] |= 1 << (h % 64);
            }
        }
    }
    let mut hit_stack: Vec<Vec<u64>> = vec![vec![0u64; words]];
    let mut dfs = PathDfs {
        g,
        faults,
        cap,
        on_path: vec![false; g.n() as usize],
        path: Vec::new(),
    };
    for u in 0..g.n() {
        hit_stack.truncate(1);
        hit_stack[0].fill(0);
        let mut count = 0u64;
        let found = dfs.run(u, &mut |path: &[EdgeId], eid: EdgeId, _dir| {
            let depth = path.len();
            if depth + 1 < hit_stack.len() {
                // Pop notification.
                hit_stack.truncate(depth + 1);
                return true;
            }
            count += 1;
            let mut next = hit_stack[depth].clone();
            let base = eid as usize * words;
            for (w, c) in next.iter_mut().zip(&collide[base..base + words]) {
                *w |= c;
            }
            // Covered while some valid h has no path edge on its value.
            let covered = next
                .iter()
                .zip(&valid_mask)
                .any(|(hit, valid)| valid & !hit != 0);
            hit_stack.push(next);
            covered
        });
        *triples += count;
        if let Some((v, path)) = found {
            return Some(CoverCounterexample {
                u,
                v,
                faults: faults.to_vec(),
                path: Some(path),
            });
        }
    }
    None
}

/// Generic strict check: per-edge presence bitmasks over all subgraphs,
/// intersected along each path. Practical for the small-`ell` flavors.
fn strict_generic_one(
    fam: &CoveringFamily,
    g: &Graph,
    cap: u32,
    faults: &[EdgeId],
    triples: &mut u64,
) -> Option<CoverCounterexample> {
    let ell = fam.ell as usize;
    let words = ell.div_ceil(64);
    let directed = fam.is_directed();
    // presence[e][dir] — directed flavors distinguish traversal direction.
    let dirs = if directed { 2 } else { 1 };
    let mut presence = vec![0u64; g.m() as usize * dirs * words];
    for e in 0..g.m() {
        for d in 0..dirs {
            for i in 0..fam.ell {
                let present = if directed {
                    fam.contains_arc(e, d == 1, i)
                } else {
                    fam.contains(e, i)
                };
                if present {
                    presence[(e as usize * dirs + d) * words + i as usize / 64] |=
                        1 << (i % 64);
                }
            }
        }
    }
    let mut avoid = vec![!0u64; words];
    if ell % 64 != 0 {
        avoid[words - 1] = (1u64 << (ell % 64)) - 1;
    }
    for &e in faults {
        for w in 0..words {
            let mut present_any = presence[(e as usize * dirs) * words + w];
            if directed {
                present_any |= presence[(e as usize * dirs + 1) * words + w];
            }
            avoid[w] &= !present_any;
        }
    }
    if avoid.iter().all(|&w| w == 0) {
        // No subgraph avoids this fault set: any surviving edge is an
        // uncovered length-1 path.
        if let Some(e) = (0..g.m()).find(|e| !faults.contains(e)) {
            let (u, v) = g.edge(e);
            return Some(CoverCounterexample {
                u,
                v,
                faults: faults.to_vec(),
                path: Some(vec![e]),
            });
        }
        return None;
    }
    let mut mask_stack: Vec<Vec<u64>> = vec![avoid.clone()];
    let mut dfs = PathDfs {
        g,
        faults,
        cap,
        on_path: vec![false; g.n() as usize],
        path: Vec::new(),
    };
    for u in 0..g.n() {
        mask_stack.truncate(1);
        mask_stack[0].copy_from_slice(&avoid);
        let mut count = 0u64;
        let found = dfs.run(u, &mut |path: &[EdgeId], eid: EdgeId, toward_high| {
            let depth = path.len();
            if depth + 1 < mask_stack.len() {
                mask_stack.truncate(depth + 1);
                return true;
            }
            count += 1;
            let mut next = mask_stack[depth].clone();
            let slot = if directed && toward_high { 1 } else { 0 };
            let base = (eid as usize * dirs + slot) * words;
            for (w, p) in next.iter_mut().zip(&presence[base..base + words]) {
                *w &= p;
            }
            let covered = next.iter().any(|&w| w != 0);
            mask_stack.push(next);
            covered
        });
        *triples += count;
        if let Some((v, path)) = found {
            return Some(CoverCounterexample {
                u,
                v,
                faults: faults.to_vec(),
                path: Some(path),
            });
        }
    }
    None
}

/// Relaxed verification: enumerate every fault set of size `0..=k`
/// (budgeted), and require for every still-connected ordered pair a
/// subgraph avoiding the faults with distance at most `L`.
pub fn verify_relaxed(
    fam: &CoveringFamily,
    g: &Graph,
    l: u32,
    k: u32,
    budget: u64,
) -> Result<CoverVerdict, CoveringError> {
    let m = g.m() as u64;
    let mut needed = 1u64;
    let mut choose = 1u64;
    for j in 1..=k as u64 {
        choose = choose * (m + 1 - j) / j;
        needed += choose;
    }
    if needed > budget {
        return Err(CoveringError::Budget { needed, budget });
    }
    let n = g.n() as usize;
    let ell = fam.ell as usize;
    let words = ell.div_ceil(64);
    let directed = fam.is_directed();
    // present_any[e]: subgraphs containing e in any direction (what P2 must
    // exclude).
    let mut present_any = vec![0u64; g.m() as usize * words];
    for e in 0..g.m() {
        for i in 0..fam.ell {
            let any = if directed {
                fam.contains_arc(e, false, i) || fam.contains_arc(e, true, i)
            } else {
                fam.contains(e, i)
            };
            if any {
                present_any[e as usize * words + i as usize / 64] |= 1 << (i % 64);
            }
        }
    }
    let mut full = vec![!0u64; words];
    if ell % 64 != 0 {
        full[words - 1] = (1u64 << (ell % 64)) - 1;
    }
    // Pair coverage per subgraph, computed lazily and cached.
    let mut pair_cache: Vec<Option<Vec<u64>>> = vec![None; ell];
    let pair_words = (n * n).div_ceil(64);
    let mut triples = 0u64;
    for faults in fault_sets(g.m(), k) {
        let mut avoid = full.clone();
        for &e in &faults {
            for w in 0..words {
                avoid[w] &= !present_any[e as usize * words + w];
            }
        }
        // Required: ordered pairs still connected in g \ E'.
        let fault_set = EdgeSet::from_ids(g.m(), &faults).expect("fault ids in range");
        let mut required = vec![0u64; pair_words];
        for u in 0..g.n() {
            let dist = bfs_dist(g, u, &fault_set);
            for v in 0..g.n() {
                if u != v && dist[v as usize].is_some() {
                    let bit = u as usize * n + v as usize;
                    required[bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        triples += required.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        let mut covered = vec![0u64; pair_words];
        let mut done = required
            .iter()
            .zip(&covered)
            .all(|(r, c)| r & !c == 0);
        'subgraphs: for w in 0..words {
            let mut bits = avoid[w];
            while bits != 0 {
                let i = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if i >= ell {
                    break;
                }
                let pairs = pair_cache[i].get_or_insert_with(|| {
                    subgraph_pairs_within(fam, g, i as u32, l, directed)
                });
                for (c, p) in covered.iter_mut().zip(pairs.iter()) {
                    *c |= p;
                }
                done = required.iter().zip(&covered).all(|(r, c)| r & !c == 0);
                if done {
                    break 'subgraphs;
                }
            }
        }
        if !done {
            let missing = required
                .iter()
                .zip(&covered)
                .enumerate()
                .find_map(|(wi, (r, c))| {
                    let rem = r & !c;
                    (rem != 0).then(|| wi * 64 + rem.trailing_zeros() as usize)
                })
                .expect("some pair is uncovered");
            return Ok(CoverVerdict::fail(
                CoverCounterexample {
                    u: (missing / n) as NodeId,
                    v: (missing % n) as NodeId,
                    faults,
                    path: None,
                },
                triples,
            ));
        }
    }
    Ok(CoverVerdict::pass(triples))
}

/// Bitmask over ordered pairs `(u, v)` with `dist_{G_i}(u, v) <= l`.
fn subgraph_pairs_within(
    fam: &CoveringFamily,
    g: &Graph,
    i: u32,
    l: u32,
    directed: bool,
) -> Vec<u64> {
    let n = g.n() as usize;
    let mut pairs = vec![0u64; (n * n).div_ceil(64)];
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for u in 0..g.n() {
        dist.fill(u32::MAX);
        dist[u as usize] = 0;
        queue.clear();
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            if dx == l {
                continue;
            }
            for &(y, eid) in g.neighbors(x) {
                if dist[y as usize] != u32::MAX {
                    continue;
                }
                let present = if directed {
                    fam.contains_arc(eid, y > x, i)
                } else {
                    fam.contains(eid, i)
                };
                if present {
                    dist[y as usize] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        for v in 0..n {
            if v != u as usize && dist[v] != u32::MAX {
                let bit = u as usize * n + v;
                pairs[bit / 64] |= 1 << (bit % 64);
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{
        build_expander_family, build_hash_family, build_sampled_family, FamilyConstants,
        FamilyParams,
    };
    use crate::graph::{diameter, generate, GraphKind, GraphSpec};

    fn whole_graph_family(g: &Graph) -> CoveringFamily {
        CoveringFamily {
            params: FamilyParams::Sampled { l: 1, k: 0 },
            seed: 0,
            ell: 1,
            m: g.m(),
        }
    }

    #[test]
    fn trivial_family_covers_k0() {
        let g = generate(&GraphSpec::new(GraphKind::Complete { n: 4 }, 0)).unwrap();
        let fam = whole_graph_family(&g);
        let verdict = verify_strict(&fam, &g, 3, 0).unwrap();
        assert!(verdict.ok);
    }

    #[test]
    fn trivial_family_fails_k1() {
        // {g} with k = 1 cannot avoid any edge.
        let g = generate(&GraphSpec::new(GraphKind::Complete { n: 4 }, 0)).unwrap();
        let fam = whole_graph_family(&g);
        let verdict = verify_strict(&fam, &g, 3, 1).unwrap();
        assert!(!verdict.ok);
        let cx = verdict.counterexample.unwrap();
        assert_eq!(cx.faults.len(), 1);
    }

    #[test]
    fn hash_family_covers_k4_l1() {
        // L = 1 on K4: for every (u, v, e) with e off the edge (u, v), some
        // subgraph contains (u, v) and omits e.
        let g = generate(&GraphSpec::new(GraphKind::Complete { n: 4 }, 0)).unwrap();
        for seed in 0..25 {
            let fam = build_hash_family(&g, 1, seed, &FamilyConstants::default());
            let verdict = verify_strict(&fam, &g, 1, 1).unwrap();
            assert!(verdict.ok, "seed {seed}: {:?}", verdict.counterexample);
        }
    }

    #[test]
    fn hash_family_covers_c6_l6_k1() {
        let g = generate(&GraphSpec::new(
            GraphKind::Circulant {
                n: 6,
                offsets: vec![1],
            },
            0,
        ))
        .unwrap();
        let fam = build_hash_family(&g, 6, 3, &FamilyConstants::default());
        let verdict = verify_strict(&fam, &g, 6, 1).unwrap();
        assert!(verdict.ok, "{:?}", verdict.counterexample);
    }

    #[test]
    fn sampled_family_covers_c8_l8_k1() {
        let g = generate(&GraphSpec::new(GraphKind::Cycle { n: 8 }, 0)).unwrap();
        let fam =
            build_sampled_family(&g, 8, 1, 11, &FamilyConstants::default()).unwrap();
        let verdict = verify_strict(&fam, &g, 8, 1).unwrap();
        assert!(verdict.ok, "{:?}", verdict.counterexample);
    }

    #[test]
    fn strict_guard_rejects_large_instances() {
        let g = generate(&GraphSpec::new(GraphKind::Cycle { n: 16 }, 0)).unwrap();
        let fam = whole_graph_family(&g);
        assert!(matches!(
            verify_strict(&fam, &g, 3, 0),
            Err(CoveringError::Guard(_))
        ));
    }

    #[test]
    fn relaxed_whole_graph_diameter() {
        let g = generate(&GraphSpec::new(GraphKind::Cycle { n: 8 }, 0)).unwrap();
        let fam = whole_graph_family(&g);
        let d = diameter(&g).unwrap();
        assert!(verify_relaxed(&fam, &g, d, 0, 10_000).unwrap().ok);
        assert!(!verify_relaxed(&fam, &g, d - 1, 0, 10_000).unwrap().ok);
    }

    #[test]
    fn relaxed_budget_guard() {
        let g = generate(&GraphSpec::new(GraphKind::Cycle { n: 8 }, 0)).unwrap();
        let fam = whole_graph_family(&g);
        assert!(matches!(
            verify_relaxed(&fam, &g, 4, 2, 3),
            Err(CoveringError::Budget { .. })
        ));
    }

    #[test]
    fn relaxed_expander_family_on_regular_graph() {
        let g = generate(&GraphSpec::new(GraphKind::RandomRegular { n: 64, d: 12 }, 5)).unwrap();
        let fam = build_expander_family(&g, 1, 23, false, &FamilyConstants::default());
        // L generous for a 12-regular expander-ish fixture.
        let verdict = verify_relaxed(&fam, &g, 10, 1, 1_000_000).unwrap();
        assert!(verdict.ok, "{:?}", verdict.counterexample);
    }

    #[test]
    fn relaxed_disconnecting_fault_sets_are_vacuous() {
        // C4 with k = 2: opposite-edge pairs disconnect u from v; those
        // triples are skipped, the rest must be covered by the whole graph
        // at L = n.
        let g = generate(&GraphSpec::new(GraphKind::Cycle { n: 4 }, 0)).unwrap();
        let fam = whole_graph_family(&g);
        // k = 1 keeps connectivity (cycle minus one edge is a path): the
        // whole-graph family contains every fault edge, so it must fail.
        let verdict = verify_relaxed(&fam, &g, 4, 1, 10_000).unwrap();
        assert!(!verdict.ok);
    }
}
