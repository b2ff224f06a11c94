//! Broadcast against a single adversarial edge with a known diameter bound.
//!
//! Phase 1 (flooding): `ell` pipelined sub-algorithms, one per family
//! subgraph. The source sends `(m0, i)` in round `i`; a node receiving
//! `(m', i)` over an edge of `G_i` for the first time stores it and
//! forwards it to all neighbors, draining its queue in subgraph-index
//! order, at most one message per round. Phase 2 (acceptance): the source
//! sends `accept(m0)`; a node accepts `m'` once it both stored some
//! `(m', i)` and received `accept(m')` over an edge absent from that same
//! `G_i`, then relays the accept token.

use crate::covering::CoveringFamily;
use crate::engine::{
    Envelope, Message, PhaseKind, PhaseWindow, Protocol, ProtocolInfo, QueueDelayEntry,
    QueueDelayReport, SendBuf, Value,
};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::protocols::ProtocolError;
use crate::util::BitSet;

/// Admitted broadcast symbols of one execution: the payload plus, for data
/// executions, the opposite bit. Messages outside the domain are ignored,
/// mirroring the per-index two-message accounting of the flooding phase.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Domain {
    payload: Value,
    sibling: Option<Value>,
}

impl Domain {
    pub(crate) fn for_payload(payload: Value) -> Domain {
        match payload {
            Value::Zero | Value::One => Domain {
                payload,
                sibling: Some(payload.flipped()),
            },
            other => Domain {
                payload: other,
                sibling: None,
            },
        }
    }

    #[inline]
    pub(crate) fn slot(&self, v: Value) -> Option<usize> {
        if v == self.payload {
            Some(0)
        } else if self.sibling == Some(v) {
            Some(1)
        } else {
            None
        }
    }

    #[inline]
    fn value(&self, slot: usize) -> Value {
        if slot == 0 {
            self.payload
        } else {
            self.sibling.expect("slot 1 only exists with a sibling")
        }
    }

    pub(crate) fn values(&self) -> Vec<Value> {
        match self.sibling {
            Some(s) => vec![self.payload, s],
            None => vec![self.payload],
        }
    }

    pub(crate) fn payload_value(&self) -> Value {
        self.payload
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct InstrSlot {
    recv: u32,
    send: u32,
    pred: u32,
}

const UNSET: u32 = u32::MAX;

struct ExecNode {
    stored: BitSet,
    pending: BitSet,
    /// Lower bound on the smallest pending bit; keeps queue pops O(1)
    /// amortized under the mostly-increasing arrival order.
    watermark: usize,
    accepted: Option<Value>,
    accept_round: Option<u64>,
    accept_pending: bool,
    /// Origination offsets when this node is a source (normally `[0]`;
    /// triggered wake-up can add a second).
    offsets: Vec<u64>,
    /// Originations due but displaced by an earlier-due index this round.
    backlog: Vec<u32>,
    in_agenda: bool,
    instr: Option<Vec<InstrSlot>>,
}

impl ExecNode {
    fn has_flood_work(&self) -> bool {
        self.pending.next_set_bit(self.watermark).is_some()
    }
}

/// One flooding/acceptance execution, embedded at an absolute start round.
/// Used directly by the known-diameter protocol and re-instantiated per
/// application by the doubling wrapper.
pub(crate) struct Bb1Exec {
    fam: CoveringFamily,
    pub(crate) r1: u64,
    pub(crate) r2: u64,
    start: u64,
    domain: Domain,
    ell: u32,
    /// Flattened absent-subgraph lists, `width` entries per edge.
    absent: Vec<u32>,
    width: u32,
    nodes: Vec<ExecNode>,
    source_list: Vec<NodeId>,
    agenda: Vec<NodeId>,
    scratch: Vec<NodeId>,
    instrument: bool,
}

impl Bb1Exec {
    pub(crate) fn new(
        g: &Graph,
        fam: CoveringFamily,
        payload: Value,
        sources: &[(NodeId, u64)],
        r1: u64,
        r2: u64,
        start: u64,
        instrument: bool,
    ) -> Bb1Exec {
        let ell = fam.ell;
        let width = fam.width();
        let mut absent = Vec::with_capacity(g.m() as usize * width as usize);
        for e in 0..g.m() {
            let mut list = fam.absent_indices(e);
            debug_assert!(list.len() as u32 <= width);
            list.resize(width as usize, u32::MAX);
            absent.extend_from_slice(&list);
        }
        let domain = Domain::for_payload(payload);
        let slots = domain.values().len();
        let mut nodes: Vec<ExecNode> = (0..g.n())
            .map(|_| ExecNode {
                stored: BitSet::new(ell as usize * slots),
                pending: BitSet::new(ell as usize * slots),
                watermark: 0,
                accepted: None,
                accept_round: None,
                accept_pending: false,
                offsets: Vec::new(),
                backlog: Vec::new(),
                in_agenda: false,
                instr: instrument
                    .then(|| vec![InstrSlot { recv: UNSET, send: UNSET, pred: UNSET }; ell as usize * slots]),
            })
            .collect();
        let mut agenda = Vec::new();
        let mut source_list = Vec::new();
        for &(s, off) in sources {
            nodes[s as usize].offsets.push(off);
            if !source_list.contains(&s) {
                source_list.push(s);
            }
            if !nodes[s as usize].in_agenda {
                nodes[s as usize].in_agenda = true;
                agenda.push(s);
            }
        }
        Bb1Exec {
            fam,
            r1,
            r2,
            start,
            domain,
            ell,
            absent,
            width,
            nodes,
            source_list,
            agenda,
            scratch: Vec::new(),
            instrument,
        }
    }

    pub(crate) fn total_rounds(&self) -> u64 {
        self.r1 + self.r2
    }

    pub(crate) fn end(&self) -> u64 {
        self.start + self.total_rounds()
    }

    pub(crate) fn accepted(&self, node: NodeId) -> Option<Value> {
        self.nodes[node as usize].accepted
    }

    pub(crate) fn accept_round(&self, node: NodeId) -> Option<u64> {
        self.nodes[node as usize].accept_round
    }

    pub(crate) fn is_source(&self, node: NodeId) -> bool {
        !self.nodes[node as usize].offsets.is_empty()
    }

    /// Registers a (possibly additional) origination offset mid-run;
    /// triggered wake-up uses this when a step-done notification arrives.
    pub(crate) fn add_source(&mut self, node: NodeId, offset: u64) {
        let entry = &mut self.nodes[node as usize];
        if entry.offsets.contains(&offset) || entry.offsets.len() >= 2 {
            return;
        }
        entry.offsets.push(offset);
        if !self.source_list.contains(&node) {
            self.source_list.push(node);
        }
        if !entry.in_agenda {
            entry.in_agenda = true;
            self.agenda.push(node);
        }
    }

    /// Stored `(value, index)` pairs of a node, for audits.
    pub(crate) fn stored_pairs(&self, node: NodeId) -> Vec<(Value, u32)> {
        let slots = self.domain.values().len();
        self.nodes[node as usize]
            .stored
            .iter()
            .map(|idx2| {
                (
                    self.domain.value(idx2 % slots),
                    (idx2 / slots) as u32,
                )
            })
            .collect()
    }

    #[inline]
    fn slots(&self) -> usize {
        if self.domain.sibling.is_some() {
            2
        } else {
            1
        }
    }

    #[inline]
    fn idx2(&self, index: u32, slot: usize) -> usize {
        index as usize * self.slots() + slot
    }

    fn agenda_add(&mut self, node: NodeId) {
        if !self.nodes[node as usize].in_agenda {
            self.nodes[node as usize].in_agenda = true;
            self.agenda.push(node);
        }
    }

    pub(crate) fn emit(&mut self, g: &Graph, round: u64, out: &mut SendBuf) {
        if round < self.start || round >= self.end() {
            return;
        }
        let rel = round - self.start;
        if rel == self.r1 {
            // Sources emit the accept token at the phase boundary even if
            // their origination schedule drained them from the agenda.
            for si in 0..self.source_list.len() {
                let s = self.source_list[si];
                self.agenda_add(s);
            }
        }
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.clear();
        scratch.append(&mut self.agenda);
        for &u in &scratch {
            self.nodes[u as usize].in_agenda = false;
            let msg = self.node_emission(u, rel);
            if let Some(msg) = msg {
                for &(_, eid) in g.neighbors(u) {
                    out.push(u, eid, Envelope::plain(msg));
                }
            }
            if self.node_has_work(u, rel + 1) {
                self.agenda_add(u);
            }
        }
        self.scratch = scratch;
    }

    /// The single message node `u` puts on all its incident directions this
    /// round, if any. Scheduled source originations take the emission slot;
    /// sources do not relay during the flooding phase.
    fn node_emission(&mut self, u: NodeId, rel: u64) -> Option<Message> {
        let slots = self.slots();
        let node = &mut self.nodes[u as usize];
        if rel < self.r1 {
            if !node.offsets.is_empty() {
                // Originations due this round, plus any displaced earlier.
                let mut due: Option<u32> = node.backlog.iter().copied().min();
                for &o in &node.offsets {
                    if rel >= o && rel - o < self.ell as u64 {
                        let idx = (rel - o) as u32;
                        if due.is_none_or(|d| idx < d) {
                            if let Some(d) = due {
                                if !node.backlog.contains(&d) {
                                    node.backlog.push(d);
                                }
                            }
                            due = Some(idx);
                        } else if !node.backlog.contains(&idx) {
                            node.backlog.push(idx);
                        }
                    }
                }
                let idx = due?;
                node.backlog.retain(|&b| b != idx);
                let bit = idx as usize * slots;
                node.stored.insert(bit);
                if let Some(instr) = node.instr.as_mut() {
                    if instr[bit].recv == UNSET {
                        instr[bit].recv = rel as u32;
                    }
                    instr[bit].send = rel as u32;
                }
                return Some(Message::Flood {
                    value: self.domain.payload,
                    index: idx,
                });
            }
            // Relay: lowest pending (value, index), index-ordered.
            let bit = node.pending.next_set_bit(node.watermark)?;
            node.pending.remove(bit);
            node.watermark = bit;
            if let Some(instr) = node.instr.as_mut() {
                instr[bit].send = rel as u32;
            }
            let index = (bit / slots) as u32;
            let value = self.domain.value(bit % slots);
            return Some(Message::Flood { value, index });
        }
        // Acceptance phase.
        if rel == self.r1 && !node.offsets.is_empty() {
            node.accepted = Some(self.domain.payload);
            node.accept_round.get_or_insert(rel);
            return Some(Message::Accept {
                value: self.domain.payload,
            });
        }
        if node.accept_pending {
            node.accept_pending = false;
            return Some(Message::Accept {
                value: node.accepted.expect("accept_pending implies accepted"),
            });
        }
        None
    }

    fn node_has_work(&self, u: NodeId, rel_next: u64) -> bool {
        let node = &self.nodes[u as usize];
        if node.accept_pending {
            return true;
        }
        if !node.offsets.is_empty() {
            if rel_next == self.r1 {
                // The accept token is owed at the phase boundary.
                return true;
            }
            if rel_next < self.r1 {
                return !node.backlog.is_empty()
                    || node.offsets.iter().any(|&o| rel_next < o + self.ell as u64);
            }
            return false;
        }
        rel_next < self.r1 && node.has_flood_work()
    }

    pub(crate) fn deliver(
        &mut self,
        round: u64,
        to: NodeId,
        _from: NodeId,
        eid: EdgeId,
        env: &Envelope,
    ) {
        if round < self.start || round >= self.end() {
            return;
        }
        let rel = round - self.start;
        match env.msg {
            Message::Flood { value, index } if rel < self.r1 => {
                if index >= self.ell {
                    return;
                }
                let Some(slot) = self.domain.slot(value) else {
                    return;
                };
                if !self.fam.contains(eid, index) {
                    return;
                }
                let bit = self.idx2(index, slot);
                let is_source = !self.nodes[to as usize].offsets.is_empty();
                let node = &mut self.nodes[to as usize];
                if node.stored.insert(bit) {
                    if let Some(instr) = node.instr.as_mut() {
                        instr[bit].recv = rel as u32;
                        instr[bit].pred = eid;
                    }
                    if !is_source {
                        node.pending.insert(bit);
                        if bit < node.watermark {
                            node.watermark = bit;
                        }
                        self.agenda_add(to);
                    }
                } else if let Some(instr) = self.nodes[to as usize].instr.as_mut() {
                    // Simultaneous first receipts count once; the recorded
                    // predecessor is the lowest incident edge id.
                    if instr[bit].recv == rel as u32 && instr[bit].send == UNSET && eid < instr[bit].pred
                    {
                        instr[bit].pred = eid;
                    }
                }
            }
            Message::Accept { value } if rel >= self.r1 => {
                let Some(slot) = self.domain.slot(value) else {
                    return;
                };
                let node = &self.nodes[to as usize];
                if node.accepted.is_some() || !node.offsets.is_empty() {
                    return;
                }
                // Accept m' iff some stored (m', i) has this arrival edge
                // absent from G_i.
                let base = eid as usize * self.width as usize;
                let found = self.absent[base..base + self.width as usize]
                    .iter()
                    .take_while(|&&i| i != u32::MAX)
                    .any(|&i| node.stored.contains(self.idx2(i, slot)));
                if found {
                    let node = &mut self.nodes[to as usize];
                    node.accepted = Some(value);
                    node.accept_round = Some(rel);
                    node.accept_pending = true;
                    self.agenda_add(to);
                }
            }
            _ => {}
        }
    }

    pub(crate) fn next_busy(&self, after: u64) -> Option<u64> {
        if after >= self.end() {
            return None;
        }
        if !self.agenda.is_empty() {
            return Some(after.max(self.start));
        }
        let rel = after.saturating_sub(self.start);
        let mut best: Option<u64> = None;
        let mut consider = |abs: u64| {
            if abs >= after && abs < self.end() && best.is_none_or(|b| abs < b) {
                best = Some(abs);
            }
        };
        for &u in &self.source_list {
            let node = &self.nodes[u as usize];
            for &o in &node.offsets {
                if rel < o + self.ell as u64 {
                    consider(self.start + o.max(rel));
                }
            }
            consider(self.start + self.r1);
        }
        best
    }

    /// Queue-delay instrumentation: for each eligible `(node, index)` pair
    /// carrying the payload, walk the recorded delivery path back to a
    /// source, summing the rounds spent waiting in intermediate queues.
    pub(crate) fn queue_report(&self, g: &Graph) -> QueueDelayReport {
        let mut entries = Vec::new();
        if !self.instrument {
            return QueueDelayReport {
                width: self.width,
                entries,
            };
        }
        let slots = self.slots();
        for v in 0..g.n() {
            if self.is_source(v) {
                continue;
            }
            let node = &self.nodes[v as usize];
            let Some(instr) = node.instr.as_ref() else {
                continue;
            };
            for index in 0..self.ell {
                let bit = index as usize * slots;
                if !node.stored.contains(bit) {
                    continue;
                }
                let arrival = instr[bit].recv as u64;
                let mut eta = 0u32;
                let mut delay = 0u64;
                let mut at = v;
                let mut ok = true;
                loop {
                    let slot = &self.nodes[at as usize].instr.as_ref().unwrap()[bit];
                    if slot.pred == UNSET {
                        // Source origination.
                        ok = self.is_source(at);
                        break;
                    }
                    let pred = g.other_endpoint(slot.pred, at);
                    eta += 1;
                    if pred == at || eta > g.n() {
                        ok = false;
                        break;
                    }
                    at = pred;
                    if self.is_source(at) {
                        break;
                    }
                    let pslot = &self.nodes[at as usize].instr.as_ref().unwrap()[bit];
                    if pslot.send == UNSET || pslot.recv == UNSET {
                        ok = false;
                        break;
                    }
                    delay += (pslot.send - pslot.recv) as u64;
                }
                if ok && eta > 0 {
                    entries.push(QueueDelayEntry {
                        node: v,
                        index,
                        eta,
                        delay,
                        arrival,
                    });
                }
            }
        }
        QueueDelayReport {
            width: self.width,
            entries,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Bb1Params {
    /// Path-length budget; the family must be an `(L,1)` cover at this L.
    pub l: u32,
    pub c1: u64,
    pub c2: u64,
    pub m0: Value,
    pub source: NodeId,
    pub source_active: bool,
    pub instrument: bool,
}

/// Known-diameter broadcast protocol over a given `(L,1)` covering family.
pub struct Bb1Known<'g> {
    g: &'g Graph,
    exec: Bb1Exec,
    info: ProtocolInfo,
    m0: Value,
    source_active: bool,
    done: bool,
}

impl<'g> Bb1Known<'g> {
    pub fn new(
        g: &'g Graph,
        fam: &CoveringFamily,
        params: &Bb1Params,
    ) -> Result<Bb1Known<'g>, ProtocolError> {
        if fam.m != g.m() {
            return Err(ProtocolError::FamilyMismatch(format!(
                "family built for m = {}, graph has m = {}",
                fam.m,
                g.m()
            )));
        }
        if let crate::covering::FamilyParams::Hash { l, .. } = fam.params {
            if l != params.l {
                return Err(ProtocolError::FamilyMismatch(format!(
                    "family L = {l} but protocol L = {}",
                    params.l
                )));
            }
        }
        let width = fam.width() as u64;
        let ell = fam.ell as u64;
        let r1 = params.c1 * (params.l as u64 * width + ell);
        let r2 = params.c2 * params.l as u64;
        let sources: Vec<(NodeId, u64)> = if params.source_active {
            vec![(params.source, 0)]
        } else {
            vec![]
        };
        let exec = Bb1Exec::new(
            g,
            fam.clone(),
            params.m0,
            &sources,
            r1,
            r2,
            0,
            params.instrument,
        );
        let domain = Domain::for_payload(params.m0);
        let info = ProtocolInfo {
            name: "bb1_known".into(),
            source: params.source,
            source_active: params.source_active,
            t: 1,
            max_ell: fam.ell,
            len_cap: 1,
            phases: vec![
                PhaseWindow {
                    label: "flood".into(),
                    start: 0,
                    end: r1,
                    kind: PhaseKind::Flood,
                    ell: fam.ell,
                    domain: domain.values(),
                },
                PhaseWindow {
                    label: "accept".into(),
                    start: r1,
                    end: r1 + r2,
                    kind: PhaseKind::Accept,
                    ell: fam.ell,
                    domain: domain.values(),
                },
            ],
        };
        Ok(Bb1Known {
            g,
            exec,
            info,
            m0: params.m0,
            source_active: params.source_active,
            done: false,
        })
    }

    pub fn accept_round(&self, node: NodeId) -> Option<u64> {
        self.exec.accept_round(node)
    }

    /// Stored `(value, index)` pairs, for transcript audits.
    pub fn stored_pairs(&self, node: NodeId) -> Vec<(Value, u32)> {
        self.exec.stored_pairs(node)
    }

    pub fn family_width(&self) -> u32 {
        self.exec.width
    }
}

impl Protocol for Bb1Known<'_> {
    fn info(&self) -> &ProtocolInfo {
        &self.info
    }

    fn horizon(&self) -> u64 {
        self.exec.total_rounds()
    }

    fn emit(&mut self, round: u64, out: &mut SendBuf) {
        self.exec.emit(self.g, round, out);
    }

    fn deliver(&mut self, round: u64, to: NodeId, from: NodeId, eid: EdgeId, env: &Envelope) {
        self.exec.deliver(round, to, from, eid, env);
    }

    fn end_round(&mut self, round: u64) {
        if round + 1 >= self.exec.total_rounds() {
            self.done = true;
        }
    }

    fn complete(&self) -> bool {
        self.done
    }

    fn next_busy_round(&self, after: u64) -> Option<u64> {
        // The final round must be simulated so completion is observed.
        let last = self.exec.total_rounds() - 1;
        match self.exec.next_busy(after) {
            Some(r) => Some(r.min(last)),
            None => (after <= last).then_some(last),
        }
    }

    fn outputs(&self) -> Vec<Option<Value>> {
        (0..self.g.n()).map(|u| self.exec.accepted(u)).collect()
    }

    fn expected_output(&self) -> Option<Value> {
        self.source_active.then_some(self.m0)
    }

    fn phase_rounds(&self) -> Vec<(String, u64)> {
        vec![
            ("flood".into(), self.exec.r1),
            ("accept".into(), self.exec.r2),
        ]
    }

    fn queue_report(&self) -> Option<QueueDelayReport> {
        self.exec
            .instrument
            .then(|| self.exec.queue_report(self.g))
    }
}
