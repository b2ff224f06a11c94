//! Covering families of subgraphs, locally computable from a shared seed.
//!
//! A family `{G_1..G_ell}` is an `(L,k)` cover when for every node pair, every
//! fault set of at most `k` edges, and every length-`L` path avoiding the
//! faults, some subgraph contains the path and excludes the fault set (strict
//! form), or gives distance at most `L` while excluding the faults (relaxed
//! form). Membership of an edge in a subgraph is a pure function of
//! `(seed, params, edge identity, index)`, so both endpoints derive it with
//! zero communication.
//!
//! Three constructions:
//!   * hash-indexed subgraphs `G_{h,i} = {e : h(e) != i}` over seeded
//!     pseudorandom functions `[m] -> [q]` — bounded width `|H|` by
//!     construction;
//!   * fault-tolerant sampling with keep probability `1 - k/(L+k)`;
//!   * expander edge sampling with keep probability `min(1, gamma/t)`,
//!     undirected or per-direction (the directed flavor samples each edge
//!     direction independently).

mod verify;

pub use verify::{verify_relaxed, verify_strict, CoverCounterexample, CoverVerdict};

use crate::graph::{EdgeId, Graph};
use crate::util::mix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoveringError {
    #[error("family size {computed} exceeds cap {cap}; use the hash flavor or a smaller k")]
    EllExceedsCap { computed: u64, cap: u64 },
    #[error("verification guard violated: {0}")]
    Guard(String),
    #[error("enumeration budget exceeded: needs {needed}, budget {budget}")]
    Budget { needed: u64, budget: u64 },
}

/// Construction constants, all exposed in configuration. `a1`/`a2` size the
/// hash family (`H = a1 * L * ceil(log2 m)`, `q = a2 * L`), with `h_min` and
/// `q_min` as floors so small-`L` instances stay covered; `b` scales the
/// sampled-family cardinality; `c_f` and `gamma` size the expander flavor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConstants {
    pub a1: f64,
    pub a2: f64,
    pub h_min: u32,
    pub q_min: u32,
    pub b: f64,
    pub ell_cap: u64,
    pub c_f: f64,
    pub gamma: f64,
}

impl Default for FamilyConstants {
    fn default() -> Self {
        FamilyConstants {
            a1: 4.0,
            a2: 2.0,
            h_min: 1,
            q_min: 2,
            b: 3.0,
            ell_cap: 4_000_000,
            c_f: 6.0,
            gamma: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Hash,
    Sampled,
    ExpanderUndirected,
    ExpanderDirected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "kebab-case")]
pub enum FamilyParams {
    /// `G_{h,i}` contains every edge `e` with `h(e) != i`; index `idx`
    /// decodes as `h = idx / q`, `i = idx % q`.
    Hash { l: u32, h_size: u32, q: u32 },
    /// Subgraph `i` keeps each edge independently with probability
    /// `1 - k/(l+k)`; `k = 0` degenerates to the single subgraph `g`.
    Sampled { l: u32, k: u32 },
    ExpanderUndirected { t: u32, gamma: f64 },
    ExpanderDirected { t: u32, gamma: f64 },
}

/// Family descriptor: `{flavor params, seed, ell, m}` reconstructs
/// membership bit-exactly. No explicit subgraph lists are ever serialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringFamily {
    #[serde(flatten)]
    pub params: FamilyParams,
    pub seed: u64,
    pub ell: u32,
    /// Edge-id universe size of the graph the family was built for.
    pub m: u32,
}

const LABEL_HASH: u64 = 0x6861_7368; // "hash"
const LABEL_SAMP: u64 = 0x7361_6d70; // "samp"
const LABEL_EXPA: u64 = 0x6578_7061; // "expa"

#[inline]
fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl CoveringFamily {
    pub fn flavor(&self) -> Flavor {
        match self.params {
            FamilyParams::Hash { .. } => Flavor::Hash,
            FamilyParams::Sampled { .. } => Flavor::Sampled,
            FamilyParams::ExpanderUndirected { .. } => Flavor::ExpanderUndirected,
            FamilyParams::ExpanderDirected { .. } => Flavor::ExpanderDirected,
        }
    }

    pub fn is_directed(&self) -> bool {
        matches!(self.params, FamilyParams::ExpanderDirected { .. })
    }

    /// Hash value `h(e)` in `[q]` for hash-flavor families.
    #[inline]
    pub fn hash_value(&self, e: EdgeId, h: u32) -> u32 {
        match self.params {
            FamilyParams::Hash { q, .. } => {
                (mix64(mix64(self.seed ^ LABEL_HASH ^ h as u64) ^ e as u64) % q as u64) as u32
            }
            _ => panic!("hash_value on non-hash family"),
        }
    }

    /// Undirected membership: for the directed flavor an edge counts as
    /// present only when both directions are present.
    #[inline]
    pub fn contains(&self, e: EdgeId, i: u32) -> bool {
        debug_assert!(i < self.ell && e < self.m);
        match self.params {
            FamilyParams::Hash { q, .. } => self.hash_value(e, i / q) != i % q,
            FamilyParams::Sampled { l, k } => {
                if k == 0 {
                    return true;
                }
                let keep = 1.0 - k as f64 / (l as f64 + k as f64);
                unit_interval(mix64(
                    mix64(self.seed ^ LABEL_SAMP ^ i as u64) ^ e as u64,
                )) < keep
            }
            FamilyParams::ExpanderUndirected { t, gamma } => {
                let p = (gamma / t as f64).min(1.0);
                unit_interval(mix64(
                    mix64(self.seed ^ LABEL_EXPA ^ i as u64) ^ e as u64,
                )) < p
            }
            FamilyParams::ExpanderDirected { .. } => {
                self.contains_arc(e, false, i) && self.contains_arc(e, true, i)
            }
        }
    }

    /// Directed membership of one edge direction. `toward_high` selects the
    /// arc pointing at the higher-id endpoint; the sampling decision belongs
    /// to the arc's head and the two directions are independent. Undirected
    /// flavors answer for the whole edge.
    #[inline]
    pub fn contains_arc(&self, e: EdgeId, toward_high: bool, i: u32) -> bool {
        match self.params {
            FamilyParams::ExpanderDirected { t, gamma } => {
                let p = (gamma / t as f64).min(1.0);
                let dir = 1 + toward_high as u64;
                unit_interval(mix64(
                    mix64(self.seed ^ LABEL_EXPA ^ (i as u64) ^ (dir << 40)) ^ e as u64,
                )) < p
            }
            _ => self.contains(e, i),
        }
    }

    /// Indices of the subgraphs an edge is absent from. For the directed
    /// flavor, absence of either direction counts.
    pub fn absent_indices(&self, e: EdgeId) -> Vec<u32> {
        match self.params {
            FamilyParams::Hash { q, h_size, .. } => (0..h_size)
                .map(|h| h * q + self.hash_value(e, h))
                .collect(),
            _ => (0..self.ell).filter(|&i| !self.contains(e, i)).collect(),
        }
    }

    /// Maximum, over edges, of the number of subgraphs avoiding that edge.
    /// Exactly `h_size` for the hash flavor by construction.
    pub fn width(&self) -> u32 {
        match self.params {
            FamilyParams::Hash { h_size, .. } => h_size,
            _ => (0..self.m)
                .map(|e| self.absent_indices(e).len() as u32)
                .max()
                .unwrap_or(0),
        }
    }

    pub fn to_descriptor_json(&self) -> String {
        serde_json::to_string(self).expect("family descriptor serialization cannot fail")
    }

    pub fn from_descriptor_json(text: &str) -> Result<CoveringFamily, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[inline]
fn log2_ceil(x: u32) -> u32 {
    if x <= 1 {
        0
    } else {
        32 - (x - 1).leading_zeros()
    }
}

/// Hash-indexed `(L,1)` covering family: `H_size * q` subgraphs
/// `G_{h,i} = {e : h(e) != i}` over seeded pseudorandom functions.
pub fn build_hash_family(
    g: &Graph,
    l: u32,
    seed: u64,
    c: &FamilyConstants,
) -> CoveringFamily {
    assert!(l >= 1, "L must be at least 1");
    let m = g.m().max(1);
    let h_size = ((c.a1 * l as f64 * log2_ceil(m) as f64).ceil() as u32).max(c.h_min).max(1);
    let q = ((c.a2 * l as f64).ceil() as u32).max(c.q_min).max(2);
    CoveringFamily {
        params: FamilyParams::Hash { l, h_size, q },
        seed,
        ell: h_size * q,
        m: g.m(),
    }
}

/// Fault-tolerant sampled `(L,k)` family; each subgraph keeps every edge
/// independently with probability `1 - k/(L+k)`.
pub fn build_sampled_family(
    g: &Graph,
    l: u32,
    k: u32,
    seed: u64,
    c: &FamilyConstants,
) -> Result<CoveringFamily, CoveringError> {
    assert!(l >= 1, "L must be at least 1");
    let ell = if k == 0 {
        1u64
    } else {
        let n = g.n().max(2) as f64;
        let kf = k as f64;
        (c.b * kf.exp() * (l as f64 / kf).powi(k as i32) * kf * n.ln()).ceil() as u64
    };
    if ell > c.ell_cap {
        return Err(CoveringError::EllExceedsCap {
            computed: ell,
            cap: c.ell_cap,
        });
    }
    Ok(CoveringFamily {
        params: FamilyParams::Sampled { l, k },
        seed,
        ell: ell.max(1) as u32,
        m: g.m(),
    })
}

/// Expander sampled family: `ceil(c_f * t * ln n)` subgraphs, each keeping
/// edges (or edge directions, in the directed flavor) with probability
/// `min(1, gamma/t)`.
pub fn build_expander_family(
    g: &Graph,
    t: u32,
    seed: u64,
    directed: bool,
    c: &FamilyConstants,
) -> CoveringFamily {
    assert!(t >= 1, "t must be at least 1");
    let n = g.n().max(2) as f64;
    let ell = ((c.c_f * t as f64 * n.ln()).ceil() as u32).max(1);
    let params = if directed {
        FamilyParams::ExpanderDirected { t, gamma: c.gamma }
    } else {
        FamilyParams::ExpanderUndirected { t, gamma: c.gamma }
    };
    CoveringFamily {
        params,
        seed,
        ell,
        m: g.m(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind, GraphSpec};

    fn k4() -> Graph {
        generate(&GraphSpec::new(GraphKind::Complete { n: 4 }, 0)).unwrap()
    }

    #[test]
    fn hash_family_ell_formula() {
        // D' = 4, L = 7 D' = 28, m = 32: ell = (a1*28*5) * (a2*28).
        let g = generate(&GraphSpec::new(
            GraphKind::Circulant {
                n: 16,
                offsets: vec![1, 2],
            },
            0,
        ))
        .unwrap();
        assert_eq!(g.m(), 32);
        let fam = build_hash_family(&g, 28, 1, &FamilyConstants::default());
        match fam.params {
            FamilyParams::Hash { h_size, q, .. } => {
                assert_eq!(h_size, 4 * 28 * 5);
                assert_eq!(q, 2 * 28);
                assert_eq!(fam.ell, h_size * q);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn hash_width_is_h_size_and_absences_match() {
        let g = k4();
        for seed in 0..20 {
            let fam = build_hash_family(&g, 3, seed, &FamilyConstants::default());
            let h_size = match fam.params {
                FamilyParams::Hash { h_size, .. } => h_size,
                _ => unreachable!(),
            };
            assert_eq!(fam.width(), h_size);
            // An edge is absent exactly from the subgraphs (h, h(e)).
            for e in 0..g.m() {
                let brute: Vec<u32> =
                    (0..fam.ell).filter(|&i| !fam.contains(e, i)).collect();
                let mut direct = fam.absent_indices(e);
                direct.sort_unstable();
                assert_eq!(brute, direct);
                assert_eq!(brute.len() as u32, h_size);
            }
        }
    }

    #[test]
    fn sampled_degenerate_k0_is_whole_graph() {
        let g = k4();
        let fam =
            build_sampled_family(&g, 5, 0, 9, &FamilyConstants::default()).unwrap();
        assert_eq!(fam.ell, 1);
        assert!((0..g.m()).all(|e| fam.contains(e, 0)));
        assert_eq!(fam.width(), 0);
    }

    #[test]
    fn sampled_cap_is_enforced() {
        let g = k4();
        let tight = FamilyConstants {
            ell_cap: 10,
            ..FamilyConstants::default()
        };
        assert!(matches!(
            build_sampled_family(&g, 100, 2, 0, &tight),
            Err(CoveringError::EllExceedsCap { .. })
        ));
    }

    #[test]
    fn sampled_inclusion_probability_matches_formula() {
        // keep = 1 - k/(L+k); measure over many (i, e) probes.
        let g = generate(&GraphSpec::new(GraphKind::RandomRegular { n: 64, d: 6 }, 1)).unwrap();
        let fam =
            build_sampled_family(&g, 18, 2, 42, &FamilyConstants::default()).unwrap();
        let total = fam.ell as u64 * g.m() as u64;
        let present: u64 = (0..fam.ell)
            .map(|i| (0..g.m()).filter(|&e| fam.contains(e, i)).count() as u64)
            .sum();
        let keep = 1.0 - 2.0 / 20.0;
        let observed = present as f64 / total as f64;
        assert!(
            (observed - keep).abs() < 0.01,
            "observed {observed}, expected {keep}"
        );
    }

    #[test]
    fn directed_flavor_directions_independent() {
        let g = generate(&GraphSpec::new(GraphKind::RandomRegular { n: 64, d: 8 }, 3)).unwrap();
        let fam = build_expander_family(&g, 1, 5, true, &FamilyConstants::default());
        // p = 1/2 per direction: both-directions fraction concentrates near
        // p^2 = 1/4.
        let mut both = 0u64;
        let mut total = 0u64;
        for i in 0..fam.ell {
            for e in 0..g.m() {
                total += 1;
                if fam.contains_arc(e, false, i) && fam.contains_arc(e, true, i) {
                    both += 1;
                }
            }
        }
        let frac = both as f64 / total as f64;
        assert!((frac - 0.25).abs() < 0.02, "both-direction fraction {frac}");
    }

    #[test]
    fn membership_is_deterministic_and_local() {
        let g = k4();
        let fam = build_expander_family(&g, 2, 11, true, &FamilyConstants::default());
        let fam2 = CoveringFamily::from_descriptor_json(&fam.to_descriptor_json()).unwrap();
        assert_eq!(fam, fam2);
        for i in 0..fam.ell {
            for e in 0..g.m() {
                for dir in [false, true] {
                    assert_eq!(fam.contains_arc(e, dir, i), fam2.contains_arc(e, dir, i));
                }
            }
        }
    }

    #[test]
    fn expander_avoidance_probability_lower_bound() {
        // For fixed E' with |E'| = 2t, Pr[E' disjoint from G_i] >= (1-p)^{4t}
        // >= e^{-5} for the directed flavor.
        let g = generate(&GraphSpec::new(GraphKind::RandomRegular { n: 64, d: 8 }, 3)).unwrap();
        let t = 2u32;
        let fam = build_expander_family(&g, t, 17, true, &FamilyConstants::default());
        let faults: Vec<EdgeId> = vec![0, 7, 13, 21]; // |E'| = 2t = 4
        let mut avoided = 0u64;
        for i in 0..fam.ell {
            if faults.iter().all(|&e| {
                !fam.contains_arc(e, false, i) && !fam.contains_arc(e, true, i)
            }) {
                avoided += 1;
            }
        }
        let frac = avoided as f64 / fam.ell as f64;
        let bound = (-5.0f64).exp();
        // ell is small; allow sampling noise around (1-p)^{4t} = 0.316.
        assert!(
            frac > bound,
            "avoidance fraction {frac} under e^-5 = {bound}"
        );
    }
}
