//! Broadcast against `t` adversarial edges via heard bundles.
//!
//! Phase 1 floods over the family subgraphs, one iteration per subgraph
//! (sequential in CONGEST; simultaneous in LOCAL mode, where messages carry
//! their subgraph index explicitly). A bundle is a header `heard(m, len)`
//! followed by `len` edge messages on consecutive rounds over the same
//! edge, listing the claimed delivery path nearest-edge-first. A node
//! adopts the first header arriving over a subgraph member edge, appends
//! the arrival edge, and pipelines header-then-edges to all neighbors;
//! exactly one bundle per node per iteration, and framing violations void
//! the bundle.
//!
//! Phase 2 propagates accept tokens from the source; a node accepts `m'`
//! when the stored `m'`-bundles whose claimed paths exclude the arrival
//! edge have a path min-cut of at least `t`. With a directed family, a
//! node only adopts bundles arriving over incoming directions it sampled
//! into the subgraph, and the min-cut filter excludes both directions of
//! the arrival edge (endpoint pairs compare unordered).

use super::bb1::Domain;
use super::mincut::{mincut_meets, PathEdge};
use crate::covering::CoveringFamily;
use crate::engine::{
    ChannelMode, Envelope, Message, PhaseKind, PhaseWindow, Protocol, ProtocolInfo, SendBuf,
    Value,
};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::protocols::ProtocolError;

/// A completed stored bundle: the claimed path in arrival order (the edge
/// incident to this node first, then each received pair).
#[derive(Clone, Debug)]
pub struct Bundle {
    pub value: Value,
    pub index: u32,
    pub path_rev: Vec<PathEdge>,
}

#[derive(Clone, Debug)]
struct Adopt {
    value: Value,
    eid: EdgeId,
    /// Subgraph index this adoption belongs to; a slot holding a previous
    /// iteration's adoption is free for the current one.
    index: u32,
    /// Iteration-local round the header arrived.
    header_at: u64,
    expected: u32,
    /// Received path pairs; slot 0 is the arrival edge, known at adoption.
    path_rev: Vec<PathEdge>,
    voided: bool,
    archived: bool,
}

struct BbtNode {
    /// Per-index adoption state; CONGEST reuses slot of the running
    /// iteration, LOCAL keeps all of them.
    adopts: Vec<Option<Adopt>>,
    archive: Vec<Bundle>,
    accepted: Option<Value>,
    accept_round: Option<u64>,
    accept_pending: bool,
    /// (round, index) forwarding agenda for LOCAL mode.
    due: std::collections::VecDeque<(u64, u32)>,
}

pub(crate) struct BbtExec {
    fam: CoveringFamily,
    t: u32,
    iter_len: u64,
    pub(crate) phase1: u64,
    pub(crate) phase2: u64,
    start: u64,
    mode: ChannelMode,
    domain: Domain,
    directed: bool,
    sources: Vec<NodeId>,
    is_source: Vec<bool>,
    multi_origin: bool,
    len_cap: u32,
    nodes: Vec<BbtNode>,
    /// CONGEST forwarding agenda for the running iteration.
    active: Vec<NodeId>,
    active_flag: Vec<bool>,
}

impl BbtExec {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        g: &Graph,
        fam: CoveringFamily,
        l: u32,
        t: u32,
        c3: u64,
        payload: Value,
        sources: &[NodeId],
        start: u64,
        mode: ChannelMode,
    ) -> BbtExec {
        let iter_len = c3 * l as u64;
        let phase1 = match mode {
            ChannelMode::Congest => fam.ell as u64 * iter_len,
            ChannelMode::Local => iter_len,
        };
        let phase2 = c3 * l as u64;
        let directed = fam.is_directed();
        let slots = match mode {
            ChannelMode::Congest => 1,
            ChannelMode::Local => fam.ell as usize,
        };
        let mut is_source = vec![false; g.n() as usize];
        for &s in sources {
            is_source[s as usize] = true;
        }
        let nodes = (0..g.n())
            .map(|_| BbtNode {
                adopts: vec![None; slots],
                archive: Vec::new(),
                accepted: None,
                accept_round: None,
                accept_pending: false,
                due: std::collections::VecDeque::new(),
            })
            .collect();
        BbtExec {
            fam,
            t,
            iter_len,
            phase1,
            phase2,
            start,
            mode,
            domain: Domain::for_payload(payload),
            directed,
            sources: sources.to_vec(),
            is_source,
            multi_origin: sources.len() > 1,
            len_cap: (iter_len.saturating_sub(2) as u32).max(1),
            nodes,
            active: Vec::new(),
            active_flag: vec![false; g.n() as usize],
        }
    }

    pub(crate) fn total_rounds(&self) -> u64 {
        self.phase1 + self.phase2
    }

    pub(crate) fn end(&self) -> u64 {
        self.start + self.total_rounds()
    }

    pub(crate) fn len_cap(&self) -> u32 {
        self.len_cap
    }

    pub(crate) fn accepted(&self, node: NodeId) -> Option<Value> {
        self.nodes[node as usize].accepted
    }

    pub(crate) fn accept_round(&self, node: NodeId) -> Option<u64> {
        self.nodes[node as usize].accept_round
    }

    pub(crate) fn bundles(&self, node: NodeId) -> &[Bundle] {
        &self.nodes[node as usize].archive
    }

    pub(crate) fn is_source(&self, node: NodeId) -> bool {
        self.is_source[node as usize]
    }

    #[inline]
    fn slot_of(&self, index: u32) -> usize {
        match self.mode {
            ChannelMode::Congest => 0,
            ChannelMode::Local => index as usize,
        }
    }

    fn activate(&mut self, node: NodeId) {
        if !self.active_flag[node as usize] {
            self.active_flag[node as usize] = true;
            self.active.push(node);
        }
    }

    /// Membership of the arc `from -> to` over `eid` in subgraph `index`.
    #[inline]
    fn arc_member(&self, g: &Graph, eid: EdgeId, to: NodeId, index: u32) -> bool {
        if self.directed {
            let (_, hi) = g.edge(eid);
            self.fam.contains_arc(eid, to == hi, index)
        } else {
            self.fam.contains(eid, index)
        }
    }

    pub(crate) fn emit(&mut self, g: &Graph, round: u64, out: &mut SendBuf) {
        if round < self.start || round >= self.end() {
            return;
        }
        let rel = round - self.start;
        if rel < self.phase1 {
            match self.mode {
                ChannelMode::Congest => self.emit_congest_flood(g, rel, out),
                ChannelMode::Local => self.emit_local_flood(g, rel, out),
            }
        } else {
            let rel2 = rel - self.phase1;
            if rel2 == 0 {
                for si in 0..self.sources.len() {
                    let s = self.sources[si];
                    let node = &mut self.nodes[s as usize];
                    node.accepted = Some(self.domain.payload_value());
                    node.accept_round.get_or_insert(rel);
                    for &(_, eid) in g.neighbors(s) {
                        out.push(
                            s,
                            eid,
                            Envelope::plain(Message::Accept {
                                value: self.domain.payload_value(),
                            }),
                        );
                    }
                }
            }
            // Fresh acceptors relay the token once.
            let mut relays = std::mem::take(&mut self.active);
            for u in relays.drain(..) {
                self.active_flag[u as usize] = false;
                let node = &mut self.nodes[u as usize];
                if node.accept_pending {
                    node.accept_pending = false;
                    let value = node.accepted.expect("accept_pending implies accepted");
                    for &(_, eid) in g.neighbors(u) {
                        out.push(u, eid, Envelope::plain(Message::Accept { value }));
                    }
                }
            }
            self.active = relays;
        }
    }

    fn emit_congest_flood(&mut self, g: &Graph, rel: u64, out: &mut SendBuf) {
        let iter = rel / self.iter_len;
        let in_iter = rel % self.iter_len;
        if in_iter == 0 {
            // New iteration: stale adoptions are superseded by the index
            // tag; clear the forwarding agenda.
            self.active.clear();
            self.active_flag.fill(false);
            for si in 0..self.sources.len() {
                let s = self.sources[si];
                for &(_, eid) in g.neighbors(s) {
                    out.push(
                        s,
                        eid,
                        Envelope::plain(Message::HeardHeader {
                            value: self.domain.payload_value(),
                            len: 0,
                        }),
                    );
                }
            }
            return;
        }
        let mut forwarding = std::mem::take(&mut self.active);
        let mut still = Vec::new();
        for u in forwarding.drain(..) {
            self.active_flag[u as usize] = false;
            if let Some(msg) = self.next_stream_message(u, 0, iter as u32, in_iter) {
                for &(_, eid) in g.neighbors(u) {
                    out.push(u, eid, Envelope::plain(msg));
                }
            }
            if self.stream_continues(u, 0, iter as u32, in_iter + 1) {
                self.active_flag[u as usize] = true;
                still.push(u);
            }
        }
        self.active = forwarding;
        self.active.append(&mut still);
    }

    /// The message a forwarding node owes at iteration-local round
    /// `in_iter`, given header adoption at `header_at`: position
    /// `pos = in_iter - header_at - 1`, 0 = header, `k >= 1` = path pair
    /// `k-1` in arrival order.
    fn next_stream_message(
        &mut self,
        u: NodeId,
        slot: usize,
        index: u32,
        in_iter: u64,
    ) -> Option<Message> {
        let node = &mut self.nodes[u as usize];
        let adopt = node.adopts[slot].as_mut()?;
        if adopt.voided || adopt.index != index {
            return None;
        }
        let pos = in_iter.checked_sub(adopt.header_at + 1)?;
        let total = adopt.expected as u64 + 2; // header + (expected + 1) pairs
        if pos >= total {
            return None;
        }
        if pos == 0 {
            return Some(Message::HeardHeader {
                value: adopt.value,
                len: adopt.expected + 1,
            });
        }
        let k = (pos - 1) as usize;
        if k < adopt.path_rev.len() {
            let (a, b) = adopt.path_rev[k];
            Some(Message::HeardEdge { a, b })
        } else {
            // The incoming stream stalled: void the bundle mid-forward.
            adopt.voided = true;
            None
        }
    }

    fn stream_continues(&self, u: NodeId, slot: usize, index: u32, in_iter_next: u64) -> bool {
        let node = &self.nodes[u as usize];
        let Some(adopt) = node.adopts[slot].as_ref() else {
            return false;
        };
        if adopt.voided || adopt.index != index {
            return false;
        }
        let total = adopt.expected as u64 + 2;
        in_iter_next < adopt.header_at + 1 + total
    }

    fn emit_local_flood(&mut self, g: &Graph, rel: u64, out: &mut SendBuf) {
        if rel == 0 {
            for si in 0..self.sources.len() {
                let s = self.sources[si];
                for index in 0..self.fam.ell {
                    for &(_, eid) in g.neighbors(s) {
                        out.push(
                            s,
                            eid,
                            Envelope::indexed(
                                index,
                                Message::HeardHeader {
                                    value: self.domain.payload_value(),
                                    len: 0,
                                },
                            ),
                        );
                    }
                }
            }
        }
        for u in 0..g.n() {
            loop {
                let node = &mut self.nodes[u as usize];
                match node.due.front() {
                    Some(&(r, _)) if r == rel => {}
                    _ => break,
                }
                let (_, index) = node.due.pop_front().unwrap();
                let slot = index as usize;
                if let Some(msg) = self.next_stream_message(u, slot, index, rel) {
                    for &(_, eid) in g.neighbors(u) {
                        out.push(u, eid, Envelope::indexed(index, msg));
                    }
                    // Schedule the next position.
                    if self.stream_continues(u, slot, index, rel + 1) {
                        self.nodes[u as usize].due.push_back((rel + 1, index));
                    }
                }
            }
        }
    }

    pub(crate) fn deliver(
        &mut self,
        g: &Graph,
        round: u64,
        to: NodeId,
        from: NodeId,
        eid: EdgeId,
        env: &Envelope,
    ) {
        if round < self.start || round >= self.end() {
            return;
        }
        let rel = round - self.start;
        if rel < self.phase1 {
            let (index, in_iter) = match self.mode {
                ChannelMode::Congest => ((rel / self.iter_len) as u32, rel % self.iter_len),
                ChannelMode::Local => match env.index {
                    Some(i) if i < self.fam.ell => (i, rel),
                    _ => return,
                },
            };
            match env.msg {
                Message::HeardHeader { value, len } => {
                    self.on_header(g, to, from, eid, index, in_iter, value, len, rel)
                }
                Message::HeardEdge { a, b } => self.on_edge(to, eid, index, in_iter, (a, b)),
                _ => {}
            }
        } else {
            if let Message::Accept { value } = env.msg {
                self.on_accept(to, from, value, rel);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn on_header(
        &mut self,
        g: &Graph,
        to: NodeId,
        from: NodeId,
        eid: EdgeId,
        index: u32,
        in_iter: u64,
        value: Value,
        len: u32,
        _rel: u64,
    ) {
        if self.is_source[to as usize] {
            return;
        }
        if self.domain.slot(value).is_none() || len > self.len_cap {
            return;
        }
        // A zero-length header claims origination; only the declared
        // source may originate in single-origin executions.
        if len == 0 && !self.multi_origin && !self.is_source[from as usize] {
            return;
        }
        if !self.arc_member(g, eid, to, index) {
            return;
        }
        let slot = self.slot_of(index);
        if self.nodes[to as usize].adopts[slot]
            .as_ref()
            .is_some_and(|a| a.index == index)
        {
            return;
        }
        let mut path_rev = Vec::with_capacity(len as usize + 1);
        path_rev.push((from, to));
        let adopt = Adopt {
            value,
            eid,
            index,
            header_at: in_iter,
            expected: len,
            path_rev,
            voided: false,
            archived: false,
        };
        self.nodes[to as usize].adopts[slot] = Some(adopt);
        if len == 0 {
            self.archive_if_complete(to, slot, index);
        }
        match self.mode {
            ChannelMode::Congest => self.activate(to),
            ChannelMode::Local => {
                let rel_next = in_iter + 1;
                self.nodes[to as usize].due.push_back((rel_next, index));
            }
        }
    }

    fn on_edge(&mut self, to: NodeId, eid: EdgeId, index: u32, in_iter: u64, pair: PathEdge) {
        let slot = self.slot_of(index);
        let node = &mut self.nodes[to as usize];
        let Some(adopt) = node.adopts[slot].as_mut() else {
            return;
        };
        if adopt.voided || adopt.archived || adopt.eid != eid || adopt.index != index {
            return;
        }
        let got = (adopt.path_rev.len() - 1) as u32;
        // Pairs must arrive on consecutive rounds over the adopted edge.
        if got >= adopt.expected || in_iter != adopt.header_at + 1 + got as u64 {
            adopt.voided = true;
            return;
        }
        adopt.path_rev.push(pair);
        if adopt.path_rev.len() as u32 == adopt.expected + 1 {
            self.archive_if_complete(to, slot, index);
        }
    }

    fn archive_if_complete(&mut self, to: NodeId, slot: usize, index: u32) {
        let node = &mut self.nodes[to as usize];
        if let Some(adopt) = node.adopts[slot].as_mut() {
            if !adopt.voided && !adopt.archived {
                adopt.archived = true;
                node.archive.push(Bundle {
                    value: adopt.value,
                    index,
                    path_rev: adopt.path_rev.clone(),
                });
            }
        }
    }

    fn on_accept(&mut self, to: NodeId, from: NodeId, value: Value, rel: u64) {
        if self.domain.slot(value).is_none() {
            return;
        }
        let node = &self.nodes[to as usize];
        if node.accepted.is_some() || self.is_source[to as usize] {
            return;
        }
        let banned = (to.min(from), to.max(from));
        let paths: Vec<Vec<PathEdge>> = node
            .archive
            .iter()
            .filter(|b| {
                b.value == value
                    && !b
                        .path_rev
                        .iter()
                        .any(|&(a, c)| (a.min(c), a.max(c)) == banned)
            })
            .map(|b| b.path_rev.clone())
            .collect();
        if mincut_meets(&paths, self.t) {
            let node = &mut self.nodes[to as usize];
            node.accepted = Some(value);
            node.accept_round = Some(rel);
            node.accept_pending = true;
            self.activate(to);
        }
    }

    pub(crate) fn next_busy(&self, after: u64) -> Option<u64> {
        if after >= self.end() {
            return None;
        }
        if !self.active.is_empty() || self.nodes.iter().any(|n| !n.due.is_empty()) {
            return Some(after.max(self.start));
        }
        let rel = after.saturating_sub(self.start);
        let mut best: Option<u64> = None;
        let mut consider = |abs: u64| {
            if abs >= after && abs < self.end() {
                if best.is_none_or(|b| abs < b) {
                    best = Some(abs);
                }
            }
        };
        if !self.sources.is_empty() {
            if rel < self.phase1 {
                match self.mode {
                    ChannelMode::Congest => {
                        // Next iteration start at or after `rel`.
                        let iter = rel.div_ceil(self.iter_len);
                        let next_start = iter * self.iter_len;
                        if rel % self.iter_len == 0 {
                            consider(self.start + rel);
                        } else if next_start < self.phase1 {
                            consider(self.start + next_start);
                        }
                    }
                    ChannelMode::Local => consider(self.start),
                }
            }
            consider(self.start + self.phase1);
        }
        best
    }
}

#[derive(Clone, Debug)]
pub struct BbtParams {
    pub l: u32,
    pub t: u32,
    pub c3: u64,
    pub m0: Value,
    pub source: NodeId,
    pub source_active: bool,
    pub mode: ChannelMode,
}

/// Single general-t broadcast over a given `(L, 2t)` covering family.
pub struct Bbt<'g> {
    g: &'g Graph,
    exec: BbtExec,
    info: ProtocolInfo,
    m0: Value,
    source_active: bool,
    done: bool,
}

impl<'g> Bbt<'g> {
    pub fn new(
        g: &'g Graph,
        fam: &CoveringFamily,
        params: &BbtParams,
    ) -> Result<Bbt<'g>, ProtocolError> {
        if fam.m != g.m() {
            return Err(ProtocolError::FamilyMismatch(format!(
                "family built for m = {}, graph has m = {}",
                fam.m,
                g.m()
            )));
        }
        if params.t == 0 {
            return Err(ProtocolError::InvalidParam("t must be at least 1".into()));
        }
        let sources: Vec<NodeId> = if params.source_active {
            vec![params.source]
        } else {
            vec![]
        };
        let exec = BbtExec::new(
            g,
            fam.clone(),
            params.l,
            params.t,
            params.c3,
            params.m0,
            &sources,
            0,
            params.mode,
        );
        let domain = Domain::for_payload(params.m0);
        let info = ProtocolInfo {
            name: "bbt".into(),
            source: params.source,
            source_active: params.source_active,
            t: params.t,
            max_ell: fam.ell,
            len_cap: exec.len_cap(),
            phases: vec![
                PhaseWindow {
                    label: "flood".into(),
                    start: 0,
                    end: exec.phase1,
                    kind: PhaseKind::Flood,
                    ell: fam.ell,
                    domain: domain.values(),
                },
                PhaseWindow {
                    label: "accept".into(),
                    start: exec.phase1,
                    end: exec.phase1 + exec.phase2,
                    kind: PhaseKind::Accept,
                    ell: fam.ell,
                    domain: domain.values(),
                },
            ],
        };
        Ok(Bbt {
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

    pub fn bundles(&self, node: NodeId) -> &[Bundle] {
        self.exec.bundles(node)
    }
}

impl Protocol for Bbt<'_> {
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
        self.exec.deliver(self.g, round, to, from, eid, env);
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
            ("flood".into(), self.exec.phase1),
            ("accept".into(), self.exec.phase2),
        ]
    }
}
