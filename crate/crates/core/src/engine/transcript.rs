//! Transcript of a run: per round, per directed edge, what was sent and
//! what was delivered. On non-faulty edges the two coincide and one record
//! carries both; on faulty edges honest emissions append sent-only records
//! and adversary deliveries append delivered-only records, so every
//! delivered message is attributable to a sender or adversary decision.
//!
//! Dump format is JSON lines, one record per message; `replay` re-executes
//! a configuration and compares transcripts byte for byte.

use super::message::Envelope;
use crate::graph::{EdgeId, NodeId};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub round: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub edge: EdgeId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sent: Option<Envelope>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delivered: Option<Envelope>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    recording: bool,
    records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn new(recording: bool) -> Transcript {
        Transcript {
            recording,
            records: Vec::new(),
        }
    }

    pub fn is_recording(&self) -> bool {
        self.recording
    }

    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    pub(super) fn record_delivered(
        &mut self,
        round: u64,
        from: NodeId,
        to: NodeId,
        edge: EdgeId,
        env: &Envelope,
    ) {
        if self.recording {
            self.records.push(TranscriptRecord {
                round,
                from,
                to,
                edge,
                sent: Some(*env),
                delivered: Some(*env),
            });
        }
    }

    pub(super) fn record_sent_only(
        &mut self,
        round: u64,
        from: NodeId,
        to: NodeId,
        edge: EdgeId,
        env: &Envelope,
    ) {
        if self.recording {
            self.records.push(TranscriptRecord {
                round,
                from,
                to,
                edge,
                sent: Some(*env),
                delivered: None,
            });
        }
    }

    pub(super) fn record_adversary(
        &mut self,
        round: u64,
        from: NodeId,
        to: NodeId,
        edge: EdgeId,
        env: &Envelope,
    ) {
        if self.recording {
            self.records.push(TranscriptRecord {
                round,
                from,
                to,
                edge,
                sent: None,
                delivered: Some(*env),
            });
        }
    }

    /// JSON-lines dump, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("transcript record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Transcript, serde_json::Error> {
        let mut records = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(line)?);
        }
        Ok(Transcript {
            recording: true,
            records,
        })
    }
}
