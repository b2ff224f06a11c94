//! Simulator and protocol library for broadcast in the adversarial CONGEST
//! model: a synchronous network in which a computationally unbounded,
//! rushing adversary fully controls the messages on a fixed set of `t`
//! edges, while every other edge carries at most `O(log n)` bits per
//! direction per round.
//!
//! The crate provides:
//!
//! * [`graph`] — simple undirected graphs with stable edge identifiers,
//!   deterministic generators, and the metric computations (distances,
//!   edge connectivity, conductance) the protocols and their verification
//!   oracles rely on;
//! * [`covering`] — locally computable covering families of subgraphs
//!   (hash-indexed, fault-tolerant sampled, and expander-sampled flavors)
//!   together with strict and relaxed verification oracles;
//! * [`engine`] — the deterministic round executor: honest emissions,
//!   rushing adversary consultation, delivery, bandwidth enforcement and
//!   transcript recording;
//! * [`adversary`] — a suite of attack strategies (silent, echo, bit-flip,
//!   forged floods/accepts/path bundles, scripted schedules);
//! * [`protocols`] — the broadcast state machines: single-edge broadcast
//!   with a known diameter bound, its diameter-oblivious doubling wrapper,
//!   the general-`t` heard-bundle protocol with path min-cut acceptance,
//!   its doubling wrapper, and the expander broadcast over directed
//!   sampled families;
//! * [`config`] / [`harness`] — experiment configuration, batch runs,
//!   sweeps, and CSV/JSON report emission used by the `congest-sim` CLI.

pub mod adversary;
pub mod config;
pub mod covering;
pub mod engine;
pub mod graph;
pub mod harness;
pub mod protocols;
pub mod util;

pub use graph::{EdgeId, EdgeSet, Graph, NodeId};
