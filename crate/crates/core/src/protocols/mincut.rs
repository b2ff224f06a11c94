//! Minimum edge cut of a path collection: the smallest set of edges
//! intersecting every path. Acceptance in the general-t protocol requires
//! this value to reach `t` over the stored evidence paths.
//!
//! Path edges are abstract endpoint pairs as received (contents may be
//! adversarially corrupted); pairs compare unordered.

use crate::protocols::ProtocolError;

/// Unordered node pair as carried in heard bundles.
pub type PathEdge = (u32, u32);

#[inline]
fn norm(e: PathEdge) -> PathEdge {
    (e.0.min(e.1), e.0.max(e.1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MincutOutcome {
    /// True iff no edge set of size `t - 1` drawn from the union of path
    /// edges intersects every path, i.e. the min cut is at least `t`.
    pub meets_threshold: bool,
    /// Exact smallest hitting-set size, when computed. `None` for an empty
    /// path or when the search cap was reached.
    pub exact: Option<u32>,
}

/// Exact decision procedure, enumerating hitting sets in increasing size
/// with branch pruning. Guarded to `t <= 4`.
pub fn mincut_paths(paths: &[Vec<PathEdge>], t: u32) -> Result<MincutOutcome, ProtocolError> {
    if t > 4 {
        return Err(ProtocolError::MincutGuard(t));
    }
    if paths.is_empty() {
        // Vacuously hit by the empty set.
        return Ok(MincutOutcome {
            meets_threshold: t == 0,
            exact: Some(0),
        });
    }
    if paths.iter().any(Vec::is_empty) {
        // An empty path cannot be hit by any edge set: the cut is unbounded.
        return Ok(MincutOutcome {
            meets_threshold: true,
            exact: None,
        });
    }
    let normalized: Vec<Vec<PathEdge>> = paths
        .iter()
        .map(|p| {
            let mut q: Vec<PathEdge> = p.iter().map(|&e| norm(e)).collect();
            q.sort_unstable();
            q.dedup();
            q
        })
        .collect();
    let exact = exact_mincut(&normalized, normalized.len() as u32);
    Ok(MincutOutcome {
        meets_threshold: exact.map(|x| x >= t).unwrap_or(true),
        exact,
    })
}

/// Fast threshold-only form for the protocol hot path: true iff the min cut
/// is at least `t` (searches hitting sets of size `< t` only).
pub fn mincut_meets(paths: &[Vec<PathEdge>], t: u32) -> bool {
    if t == 0 {
        return true;
    }
    if paths.is_empty() {
        return false;
    }
    if paths.iter().any(Vec::is_empty) {
        return true;
    }
    let normalized: Vec<Vec<PathEdge>> = paths
        .iter()
        .map(|p| {
            let mut q: Vec<PathEdge> = p.iter().map(|&e| norm(e)).collect();
            q.sort_unstable();
            q.dedup();
            q
        })
        .collect();
    !(0..t).any(|size| hits_within(&normalized, &mut Vec::new(), size))
}

fn exact_mincut(paths: &[Vec<PathEdge>], cap: u32) -> Option<u32> {
    (0..=cap).find(|&size| hits_within(paths, &mut Vec::new(), size))
}

/// Is there a hitting set of exactly `budget` more edges? Branch on the
/// edges of the first unhit path.
fn hits_within(paths: &[Vec<PathEdge>], chosen: &mut Vec<PathEdge>, budget: u32) -> bool {
    let unhit = paths
        .iter()
        .find(|p| !p.iter().any(|e| chosen.contains(e)));
    let Some(path) = unhit else {
        return true;
    };
    if budget == 0 {
        return false;
    }
    for &e in path {
        chosen.push(e);
        if hits_within(paths, chosen, budget - 1) {
            chosen.pop();
            return true;
        }
        chosen.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_paths_value_equals_count() {
        let paths = vec![
            vec![(0, 1), (1, 2)],
            vec![(3, 4), (4, 5)],
            vec![(6, 7), (7, 8)],
        ];
        let out = mincut_paths(&paths, 3).unwrap();
        assert_eq!(out.exact, Some(3));
        assert!(out.meets_threshold);
        assert!(!mincut_paths(&paths, 4).unwrap().meets_threshold);
    }

    #[test]
    fn shared_edge_collapses_to_one() {
        let paths = vec![
            vec![(0, 1), (1, 2)],
            vec![(5, 0), (1, 0), (9, 9)],
            vec![(0, 1)],
        ];
        let out = mincut_paths(&paths, 2).unwrap();
        assert_eq!(out.exact, Some(1));
        assert!(!out.meets_threshold);
    }

    #[test]
    fn unordered_pair_identity() {
        // (1,0) and (0,1) are the same edge.
        let paths = vec![vec![(1, 0)], vec![(0, 1)]];
        assert_eq!(mincut_paths(&paths, 2).unwrap().exact, Some(1));
    }

    #[test]
    fn empty_collection_and_empty_path() {
        let out = mincut_paths(&[], 1).unwrap();
        assert_eq!(out.exact, Some(0));
        assert!(!out.meets_threshold);
        let out = mincut_paths(&[vec![]], 4).unwrap();
        assert!(out.meets_threshold);
        assert_eq!(out.exact, None);
    }

    #[test]
    fn guard_rejects_large_t() {
        assert!(mincut_paths(&[vec![(0, 1)]], 5).is_err());
    }

    #[test]
    fn meets_matches_exact_on_random_collections() {
        use crate::util::mix64;
        let mut state = 99u64;
        let mut rand = move || {
            state = mix64(state);
            state
        };
        for _ in 0..300 {
            let np = 1 + (rand() % 6) as usize;
            let paths: Vec<Vec<PathEdge>> = (0..np)
                .map(|_| {
                    let len = 1 + (rand() % 8) as usize;
                    (0..len)
                        .map(|_| ((rand() % 9) as u32, (rand() % 9) as u32))
                        .filter(|&(a, b)| a != b)
                        .collect()
                })
                .collect();
            if paths.iter().any(Vec::is_empty) {
                continue;
            }
            let exact = mincut_paths(&paths, 4).unwrap().exact.unwrap();
            for t in 0..=4 {
                assert_eq!(mincut_meets(&paths, t), exact >= t, "t={t} paths={paths:?}");
            }
        }
    }
}
