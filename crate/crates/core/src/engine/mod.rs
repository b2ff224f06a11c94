//! Deterministic synchronous round executor for the adversarial CONGEST
//! model.
//!
//! One round: (1) every awake honest node emits at most one message per
//! incident edge direction from its state; (2) the adversary sees the full
//! view including this round's honest emissions (rushing) and chooses what
//! both directions of every faulty edge deliver — silence, faithful
//! forwarding, or fabrication; (3) delivery; (4) state transitions.
//! Non-faulty edges always deliver exactly what was sent. Honest bandwidth
//! violations are fatal (a protocol bug); adversary messages are truncated
//! to the bit budget and dropped if undecodable.
//!
//! The executor may fast-forward over rounds in which no honest node is
//! scheduled to emit and the adversary declared itself inactive; protocol
//! state machines are functions of absolute round numbers, so the skip is
//! exact.

mod message;
mod transcript;

pub use message::{bandwidth_bits, ceil_log2, ControlKind, Envelope, Message, MessageWidths, Value};
pub use transcript::{Transcript, TranscriptRecord};

use crate::covering::CoveringFamily;
use crate::graph::{EdgeId, EdgeSet, Graph, NodeId};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("fault set has {got} edges, bound is t = {bound}")]
    TooManyFaults { got: usize, bound: u32 },
    #[error("honest node {node} emitted {bits} bits on edge {eid} (budget {budget})")]
    HonestBandwidth {
        node: NodeId,
        eid: EdgeId,
        bits: u32,
        budget: u32,
    },
    #[error("subgraph index needs {needed} bits, only {available} available at beta")]
    IndexWidth { needed: u32, available: u32 },
    #[error("protocol configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Bandwidth-bounded: one message of at most B bits per direction per
    /// round.
    Congest,
    /// Unbounded per-direction message lists; protocols may flood all
    /// subgraphs simultaneously.
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WakeMode {
    Simultaneous,
    Triggered,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub t: u32,
    pub beta: u32,
    pub mode: ChannelMode,
    pub wake: WakeMode,
    pub record_transcript: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            t: 1,
            beta: 8,
            mode: ChannelMode::Congest,
            wake: WakeMode::Simultaneous,
            record_transcript: false,
        }
    }
}

/// Phase window in a protocol's public schedule; adversaries know the
/// protocol and therefore its schedule.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseWindow {
    pub label: String,
    pub start: u64,
    pub end: u64,
    pub kind: PhaseKind,
    /// Subgraph count of the execution this window belongs to.
    pub ell: u32,
    pub domain: Vec<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Flood,
    Accept,
    Notify,
    Idle,
}

/// Public protocol identity and parameters, visible to the adversary.
#[derive(Clone, Debug)]
pub struct ProtocolInfo {
    pub name: String,
    pub source: NodeId,
    pub source_active: bool,
    pub t: u32,
    /// Largest subgraph count across the protocol's executions.
    pub max_ell: u32,
    /// Largest heard-bundle length the protocol will accept.
    pub len_cap: u32,
    pub phases: Vec<PhaseWindow>,
}

impl ProtocolInfo {
    pub fn phase_at(&self, round: u64) -> Option<&PhaseWindow> {
        self.phases
            .iter()
            .find(|w| w.start <= round && round < w.end)
    }
}

/// Outgoing emissions of one round.
#[derive(Default)]
pub struct SendBuf {
    items: Vec<(NodeId, EdgeId, Envelope)>,
}

impl SendBuf {
    pub fn push(&mut self, from: NodeId, eid: EdgeId, env: Envelope) {
        self.items.push((from, eid, env));
    }

    pub fn items(&self) -> &[(NodeId, EdgeId, Envelope)] {
        &self.items
    }

    pub fn clear_items(&mut self) {
        self.items.clear();
    }

    fn clear(&mut self) {
        self.items.clear();
    }
}

/// Node state machines driven by the engine. One value owns all per-node
/// state for a run; locality is preserved by construction (state changes
/// only through `deliver` and round arithmetic).
pub trait Protocol {
    fn info(&self) -> &ProtocolInfo;
    /// Hard round horizon; the engine aborts with a liveness failure beyond
    /// it.
    fn horizon(&self) -> u64;
    fn emit(&mut self, round: u64, out: &mut SendBuf);
    fn deliver(&mut self, round: u64, to: NodeId, from: NodeId, eid: EdgeId, env: &Envelope);
    fn end_round(&mut self, round: u64);
    fn complete(&self) -> bool;
    /// Earliest round `>= after` in which this protocol may emit or change
    /// state spontaneously. `None` means never (only deliveries would
    /// matter, and there are none without emissions).
    fn next_busy_round(&self, after: u64) -> Option<u64>;
    fn outputs(&self) -> Vec<Option<Value>>;
    /// The value every honest node must output, or `None` when the honest
    /// source never initiates (then nobody may output anything).
    fn expected_output(&self) -> Option<Value>;
    fn phase_rounds(&self) -> Vec<(String, u64)>;
    fn diameter_estimate(&self) -> Option<u64> {
        None
    }
    fn queue_report(&self) -> Option<QueueDelayReport> {
        None
    }
}

/// Everything the adversary sees when choosing its round-`r` messages:
/// topology, protocol identity and schedule, the covering family
/// descriptor, all node coin seeds, the transcript so far, and — rushing —
/// the honest emissions of the current round.
pub struct AdversaryView<'a> {
    pub graph: &'a Graph,
    pub faulty: &'a EdgeSet,
    pub family: Option<&'a CoveringFamily>,
    pub info: &'a ProtocolInfo,
    pub coin_seeds: &'a [u64],
    pub round: u64,
    pub honest_sends: &'a [(NodeId, EdgeId, Envelope)],
    pub transcript: &'a Transcript,
    pub mode: ChannelMode,
    pub bandwidth: u32,
}

impl AdversaryView<'_> {
    /// Honest emissions on one direction of one faulty edge this round.
    pub fn honest_on(&self, eid: EdgeId, from: NodeId) -> Vec<Envelope> {
        self.honest_sends
            .iter()
            .filter(|(f, e, _)| *f == from && *e == eid)
            .map(|(_, _, env)| *env)
            .collect()
    }
}

/// Messages the adversary places on one direction of one faulty edge.
pub struct ArcDelivery {
    pub from: NodeId,
    pub eid: EdgeId,
    pub envs: Vec<Envelope>,
}

/// A decision rule emitting messages on the faulty edge directions each
/// round, with full knowledge of the transcript and node coins.
pub trait AdversaryStrategy {
    fn name(&self) -> &'static str;
    fn begin(&mut self, _view_graph: &Graph, _faulty: &EdgeSet, _info: &ProtocolInfo) {}
    fn act(&mut self, view: &AdversaryView<'_>) -> Vec<ArcDelivery>;
    /// Earliest round `>= after` at which the strategy may act without
    /// seeing honest traffic. `None` = only reacts to honest traffic.
    fn next_active_round(&self, _after: u64) -> Option<u64> {
        None
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QueueDelayEntry {
    pub node: NodeId,
    pub index: u32,
    /// Delivery-path hop count.
    pub eta: u32,
    /// Total rounds the message waited in intermediate queues.
    pub delay: u64,
    /// Arrival round relative to the flooding-phase start.
    pub arrival: u64,
}

#[derive(Clone, Debug, Serialize, Default)]
pub struct QueueDelayReport {
    pub width: u32,
    pub entries: Vec<QueueDelayEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub outputs: Vec<Option<Value>>,
    pub rounds_used: u64,
    pub horizon: u64,
    pub completed: bool,
    pub safety: bool,
    pub liveness: bool,
    pub phase_rounds: Vec<(String, u64)>,
    pub diameter_estimate: Option<u64>,
    pub honest_messages: u64,
    pub adversary_messages: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queue_delay: Option<QueueDelayReport>,
    /// Full transcript, only retained when recording was requested.
    #[serde(skip)]
    pub transcript_out: Option<Transcript>,
}

/// Runs a protocol against an adversary controlling the edges of `faults`.
pub fn run(
    g: &Graph,
    family: Option<&CoveringFamily>,
    protocol: &mut dyn Protocol,
    adversary: &mut dyn AdversaryStrategy,
    faults: &EdgeSet,
    coin_seeds: &[u64],
    cfg: &EngineConfig,
) -> Result<RunReport, EngineError> {
    if faults.len() > cfg.t as usize {
        return Err(EngineError::TooManyFaults {
            got: faults.len(),
            bound: cfg.t,
        });
    }
    let info = protocol.info().clone();
    let budget = bandwidth_bits(cfg.beta, g.n());
    let widths = MessageWidths::new(g.n(), info.max_ell, info.len_cap);
    if cfg.mode == ChannelMode::Congest {
        let needed = widths.encoded_bits(&Message::Flood {
            value: Value::Zero,
            index: 0,
        });
        if needed > budget {
            return Err(EngineError::IndexWidth {
                needed,
                available: budget,
            });
        }
        let header_bits = widths.encoded_bits(&Message::HeardHeader {
            value: Value::Zero,
            len: 0,
        });
        if header_bits > budget {
            return Err(EngineError::IndexWidth {
                needed: header_bits,
                available: budget,
            });
        }
    }

    let mut transcript = Transcript::new(cfg.record_transcript);
    let mut sends = SendBuf::default();
    let horizon = protocol.horizon();
    adversary.begin(g, faults, &info);

    let mut honest_messages = 0u64;
    let mut adversary_messages = 0u64;
    let mut round = 0u64;
    let mut completed_at: Option<u64> = None;

    while round < horizon {
        sends.clear();
        protocol.emit(round, &mut sends);

        for &(from, eid, ref env) in sends.items() {
            let bits = widths.encoded_bits(&env.msg);
            if cfg.mode == ChannelMode::Congest && bits > budget {
                return Err(EngineError::HonestBandwidth {
                    node: from,
                    eid,
                    bits,
                    budget,
                });
            }
        }

        let overrides = {
            let view = AdversaryView {
                graph: g,
                faulty: faults,
                family,
                info: &info,
                coin_seeds,
                round,
                honest_sends: sends.items(),
                transcript: &transcript,
                mode: cfg.mode,
                bandwidth: budget,
            };
            adversary.act(&view)
        };

        // Honest deliveries: everything not on a faulty edge.
        for &(from, eid, ref env) in sends.items() {
            honest_messages += 1;
            if faults.contains(eid) {
                transcript.record_sent_only(round, from, g.other_endpoint(eid, from), eid, env);
                continue;
            }
            let to = g.other_endpoint(eid, from);
            transcript.record_delivered(round, from, to, eid, env);
            protocol.deliver(round, to, from, eid, env);
        }

        // Adversary deliveries: it fully controls both directions of every
        // faulty edge; unlisted directions stay silent.
        for delivery in overrides {
            debug_assert!(
                faults.contains(delivery.eid),
                "adversary wrote on non-faulty edge {}",
                delivery.eid
            );
            if !faults.contains(delivery.eid) {
                continue;
            }
            let to = g.other_endpoint(delivery.eid, delivery.from);
            let limit = if cfg.mode == ChannelMode::Congest {
                1
            } else {
                usize::MAX
            };
            for env in delivery.envs.into_iter().take(limit) {
                // The adversary cannot exceed the model: its messages are
                // truncated to the budget; an undecodable remainder is lost.
                let env = if cfg.mode == ChannelMode::Congest {
                    let (bits, size) = widths.encode(&env.msg);
                    if size > budget {
                        match widths.decode(bits, budget) {
                            Some(msg) => Envelope { index: env.index, msg },
                            None => continue,
                        }
                    } else {
                        env
                    }
                } else {
                    env
                };
                adversary_messages += 1;
                transcript.record_adversary(round, delivery.from, to, delivery.eid, &env);
                protocol.deliver(round, to, delivery.from, delivery.eid, &env);
            }
        }

        protocol.end_round(round);
        if protocol.complete() {
            completed_at = Some(round + 1);
            break;
        }

        let next = round + 1;
        let protocol_busy = protocol.next_busy_round(next);
        let adversary_busy = adversary.next_active_round(next);
        round = match (protocol_busy, adversary_busy) {
            (Some(p), Some(a)) => next.max(p.min(a)),
            (Some(p), None) => next.max(p),
            // Without honest emissions there is no traffic to react to;
            // a traffic-reactive adversary stays quiet until the protocol
            // wakes.
            (None, Some(a)) => next.max(a),
            (None, None) => horizon,
        };
    }

    let outputs = protocol.outputs();
    let completed = completed_at.is_some();
    let rounds_used = completed_at.unwrap_or(horizon);
    let expected = protocol.expected_output();
    let safety = match expected {
        Some(v) => outputs.iter().all(|o| o.is_none() || *o == Some(v)),
        None => outputs.iter().all(Option::is_none),
    };
    let liveness = match expected {
        Some(v) => completed && outputs.iter().all(|o| *o == Some(v)),
        None => true,
    };
    Ok(RunReport {
        outputs,
        rounds_used,
        horizon,
        completed,
        safety,
        liveness,
        phase_rounds: protocol.phase_rounds(),
        diameter_estimate: protocol.diameter_estimate(),
        honest_messages,
        adversary_messages,
        queue_delay: protocol.queue_report(),
        transcript_out: None,
    }
    .with_transcript(transcript, cfg.record_transcript))
}

impl RunReport {
    fn with_transcript(mut self, t: Transcript, keep: bool) -> RunReport {
        if keep {
            self.transcript_out = Some(t);
        }
        self
    }
}

/// Convenience wrapper: LOCAL-mode execution of the same protocol
/// semantics with unbounded per-direction message lists.
pub fn run_local_mode(
    g: &Graph,
    family: Option<&CoveringFamily>,
    protocol: &mut dyn Protocol,
    adversary: &mut dyn AdversaryStrategy,
    faults: &EdgeSet,
    coin_seeds: &[u64],
    cfg: &EngineConfig,
) -> Result<RunReport, EngineError> {
    let cfg = EngineConfig {
        mode: ChannelMode::Local,
        ..cfg.clone()
    };
    run(g, family, protocol, adversary, faults, coin_seeds, &cfg)
}
