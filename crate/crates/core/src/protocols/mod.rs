//! Broadcast protocol state machines.
//!
//! * [`bb1_known`] — broadcast against a single adversarial edge given a
//!   linear diameter estimate: indexed flooding over a covering family,
//!   then an acceptance phase that cross-checks accept tokens against
//!   stored flood messages.
//! * [`bb1_unknown`] — the diameter-oblivious doubling wrapper: repeated
//!   applications with doubling estimates, a not-done back-broadcast from
//!   uninformed nodes, and a termination broadcast, which also yields a
//!   linear diameter estimate.
//! * [`bbt`] — broadcast against `t` adversarial edges: sequential
//!   iterations flooding heard bundles (message plus delivery path), with
//!   acceptance gated by the min-cut of the stored path collection.
//! * [`bbt_unknown`] — the doubling wrapper over `bbt`.
//! * [`expander_broadcast`] — `bbt` over a directed sampled family with
//!   conductance-derived path budgets.

mod bb1;
mod bbt;
mod bbt_doubling;
mod doubling;
mod expander;
mod mincut;

pub use bb1::{Bb1Known, Bb1Params};
pub use bbt::{Bbt, BbtParams, Bundle};
pub use bbt_doubling::{BbtFamilyPlan, BbtUnknown, BbtUnknownParams};
pub use doubling::{Bb1Unknown, Bb1UnknownParams};
pub use expander::{expander_broadcast, ExpanderParams};
pub use mincut::{mincut_paths, MincutOutcome, PathEdge};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("family/parameter mismatch: {0}")]
    FamilyMismatch(String),
    #[error("mincut guard: t = {0} exceeds the exact-enumeration bound 4")]
    MincutGuard(u32),
    #[error("invalid protocol parameter: {0}")]
    InvalidParam(String),
}

/// Round-budget constants shared by the protocols; all config-exposed.
/// Phase lengths are part of the protocol: nodes count rounds locally.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProtocolConstants {
    /// Flooding-phase budget multiplier: `R1 = c1 * (L * width + ell)`.
    pub c1: u64,
    /// Acceptance-phase budget multiplier: `R2 = c2 * L`.
    pub c2: u64,
    /// Heard-bundle iteration budget multiplier: each of the `ell`
    /// iterations runs `c3 * L` rounds.
    pub c3: u64,
    /// Scale of the second-step family in the general-t doubling wrapper:
    /// the not-done broadcast runs over a `(c_step2 * t * L_i, 2t)` family.
    pub c_step2: u64,
    /// Expander path budget: `L = ceil(c_l * ln n / phi)`.
    pub c_l: f64,
    /// Cap on doubling applications (diameter guesses up to `2^i_max`).
    pub i_max: u32,
}

impl Default for ProtocolConstants {
    fn default() -> Self {
        ProtocolConstants {
            c1: 4,
            c2: 2,
            c3: 3,
            c_step2: 4,
            c_l: 2.0,
            i_max: 16,
        }
    }
}
