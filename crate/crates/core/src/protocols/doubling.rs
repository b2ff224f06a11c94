//! Diameter-oblivious broadcast against one adversarial edge.
//!
//! Application `i` runs three sub-executions on a common round grid, with
//! diameter guess `D_i = 2^i`:
//!   1. the data broadcast at estimate `D_i` (path budget `7 D_i`);
//!   2. a not-done broadcast at estimate `9 D_i`: every node that did not
//!      accept in step 1 broadcasts the designated marker as one of many
//!      simultaneous sources;
//!   3. a termination window at estimate `28 D_i`: if the source accepted
//!      no marker, it broadcasts the termination message; nodes accepting
//!      it finish with their last accepted data bit and the diameter
//!      estimate `D_i`. The window is always scheduled — nodes cannot know
//!      whether the source accepted the marker — and is idle when unused.
//!
//! Under triggered wake-up, step-2 sources are only the non-acceptors that
//! received a step-done notification from an accepting neighbor; duplicate
//! notifications at two distinct rounds re-trigger the broadcast at both
//! offsets.

use super::bb1::{Bb1Exec, Domain};
use crate::covering::{build_hash_family, CoveringFamily, FamilyConstants};
use crate::engine::{
    ControlKind, Envelope, Message, PhaseKind, PhaseWindow, Protocol, ProtocolInfo, SendBuf,
    Value, WakeMode,
};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::protocols::{ProtocolConstants, ProtocolError};
use crate::util::derive_seed;

#[derive(Clone, Debug)]
pub struct Bb1UnknownParams {
    pub m0: Value,
    pub source: NodeId,
    pub source_active: bool,
    pub constants: ProtocolConstants,
    pub family_constants: FamilyConstants,
    pub family_seed: u64,
    pub wake: WakeMode,
    pub instrument: bool,
}

#[derive(Clone, Copy, Debug)]
struct StageBudget {
    l: u32,
    r1: u64,
    r2: u64,
}

#[derive(Clone, Copy, Debug)]
struct AppSchedule {
    start: u64,
    step1: StageBudget,
    /// One extra round between steps for the step-done notification
    /// (triggered wake-up only).
    notify_round: Option<u64>,
    step2_start: u64,
    step2: StageBudget,
    mt_start: u64,
    mt: StageBudget,
    end: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum Stage {
    Step1,
    Notify,
    Step2,
    Termination,
}

pub struct Bb1Unknown<'g> {
    g: &'g Graph,
    params: Bb1UnknownParams,
    schedule: Vec<AppSchedule>,
    info: ProtocolInfo,
    app: usize,
    stage: Stage,
    exec: Option<Bb1Exec>,
    /// Nodes that have accepted the broadcast payload in any application
    /// so far; the complement broadcasts the not-done marker.
    accepted_data: Vec<bool>,
    last_data: Vec<Option<Value>>,
    terminated: Vec<bool>,
    estimate: Vec<Option<u64>>,
    /// Distinct step-done trigger rounds per node (capped at two).
    triggers: Vec<Vec<u64>>,
    source_got_mark: bool,
    any_terminated: bool,
    emit_buf: SendBuf,
    done: bool,
    phase_rounds: Vec<(String, u64)>,
}

fn stage_budget(
    g: &Graph,
    estimate: u64,
    c: &ProtocolConstants,
    fc: &FamilyConstants,
    seed: u64,
) -> (StageBudget, CoveringFamily) {
    let l = (7 * estimate) as u32;
    let fam = build_hash_family(g, l, seed, fc);
    let width = fam.width() as u64;
    let budget = StageBudget {
        l,
        r1: c.c1 * (l as u64 * width + fam.ell as u64),
        r2: c.c2 * l as u64,
    };
    (budget, fam)
}

impl<'g> Bb1Unknown<'g> {
    pub fn new(g: &'g Graph, params: Bb1UnknownParams) -> Result<Bb1Unknown<'g>, ProtocolError> {
        if params.source >= g.n() {
            return Err(ProtocolError::InvalidParam(format!(
                "source {} out of range",
                params.source
            )));
        }
        let c = &params.constants;
        let notify = params.wake == WakeMode::Triggered;
        let mut schedule = Vec::new();
        let mut phases = Vec::new();
        let mut at = 0u64;
        let mut max_ell = 2;
        for i in 0..=c.i_max {
            let d_i = 1u64 << i;
            let start = at;
            let (step1, fam1) = stage_budget(g, d_i, c, &params.family_constants, 0);
            let (step2, fam2) = stage_budget(g, 9 * d_i, c, &params.family_constants, 0);
            let (mt, fam3) = stage_budget(g, 28 * d_i, c, &params.family_constants, 0);
            max_ell = max_ell.max(fam1.ell).max(fam2.ell).max(fam3.ell);
            let mut cursor = start;
            let step1_span = step1.r1 + step1.r2;
            push_exec_phases(
                &mut phases,
                &format!("app{i}/data"),
                cursor,
                &step1,
                fam1.ell,
                Domain::for_payload(params.m0).values(),
            );
            cursor += step1_span;
            let notify_round = notify.then_some(cursor);
            if notify {
                phases.push(PhaseWindow {
                    label: format!("app{i}/notify"),
                    start: cursor,
                    end: cursor + 1,
                    kind: PhaseKind::Notify,
                    ell: 0,
                    domain: vec![],
                });
                cursor += 1;
            }
            let step2_start = cursor;
            push_exec_phases(
                &mut phases,
                &format!("app{i}/notdone"),
                cursor,
                &step2,
                fam2.ell,
                vec![Value::Mark],
            );
            cursor += step2.r1 + step2.r2;
            let mt_start = cursor;
            push_exec_phases(
                &mut phases,
                &format!("app{i}/termination"),
                cursor,
                &mt,
                fam3.ell,
                vec![Value::Term],
            );
            cursor += mt.r1 + mt.r2;
            schedule.push(AppSchedule {
                start,
                step1,
                notify_round,
                step2_start,
                step2,
                mt_start,
                mt,
                end: cursor,
            });
            at = cursor;
            if d_i >= 2 * g.n() as u64 {
                break;
            }
        }
        let info = ProtocolInfo {
            name: "bb1_unknown".into(),
            source: params.source,
            source_active: params.source_active,
            t: 1,
            max_ell,
            len_cap: 1,
            phases,
        };
        let n = g.n() as usize;
        let mut proto = Bb1Unknown {
            g,
            params,
            schedule,
            info,
            app: 0,
            stage: Stage::Step1,
            exec: None,
            accepted_data: vec![false; n],
            last_data: vec![None; n],
            terminated: vec![false; n],
            estimate: vec![None; n],
            triggers: vec![Vec::new(); n],
            source_got_mark: false,
            any_terminated: false,
            emit_buf: SendBuf::default(),
            done: false,
            phase_rounds: Vec::new(),
        };
        proto.start_step1();
        Ok(proto)
    }

    fn fam_seed(&self, app: usize, stage: u64) -> u64 {
        derive_seed(self.params.family_seed, &[app as u64, stage])
    }

    fn current(&self) -> &AppSchedule {
        &self.schedule[self.app]
    }

    fn start_step1(&mut self) {
        let sched = *self.current();
        let fam = build_hash_family(
            self.g,
            sched.step1.l,
            self.fam_seed(self.app, 1),
            &self.params.family_constants,
        );
        let sources: Vec<(NodeId, u64)> = if self.params.source_active
            && !self.terminated[self.params.source as usize]
        {
            vec![(self.params.source, 0)]
        } else {
            vec![]
        };
        self.stage = Stage::Step1;
        self.exec = Some(Bb1Exec::new(
            self.g,
            fam,
            self.params.m0,
            &sources,
            sched.step1.r1,
            sched.step1.r2,
            sched.start,
            self.params.instrument,
        ));
    }

    fn start_step2(&mut self) {
        let sched = *self.current();
        let fam = build_hash_family(
            self.g,
            sched.step2.l,
            self.fam_seed(self.app, 2),
            &self.params.family_constants,
        );
        // Simultaneous wake-up: every non-acceptor broadcasts the marker.
        // Triggered wake-up: only those notified (sources join on
        // notification receipt).
        let sources: Vec<(NodeId, u64)> = match self.params.wake {
            WakeMode::Simultaneous => (0..self.g.n())
                .filter(|&u| !self.accepted_data[u as usize] && !self.terminated[u as usize])
                .map(|u| (u, 0))
                .collect(),
            WakeMode::Triggered => (0..self.g.n())
                .filter(|&u| {
                    !self.accepted_data[u as usize]
                        && !self.terminated[u as usize]
                        && !self.triggers[u as usize].is_empty()
                })
                .map(|u| (u, 0))
                .collect(),
        };
        self.stage = Stage::Step2;
        self.exec = Some(Bb1Exec::new(
            self.g,
            fam,
            Value::Mark,
            &sources,
            sched.step2.r1,
            sched.step2.r2,
            sched.step2_start,
            false,
        ));
    }

    fn start_termination(&mut self) {
        let sched = *self.current();
        let fam = build_hash_family(
            self.g,
            sched.mt.l,
            self.fam_seed(self.app, 3),
            &self.params.family_constants,
        );
        let sources: Vec<(NodeId, u64)> = if self.params.source_active
            && !self.source_got_mark
            && !self.terminated[self.params.source as usize]
        {
            vec![(self.params.source, 0)]
        } else {
            vec![]
        };
        self.stage = Stage::Termination;
        self.exec = Some(Bb1Exec::new(
            self.g,
            fam,
            Value::Term,
            &sources,
            sched.mt.r1,
            sched.mt.r2,
            sched.mt_start,
            false,
        ));
    }
}

fn push_exec_phases(
    phases: &mut Vec<PhaseWindow>,
    label: &str,
    start: u64,
    budget: &StageBudget,
    ell: u32,
    domain: Vec<Value>,
) {
    phases.push(PhaseWindow {
        label: format!("{label}/flood"),
        start,
        end: start + budget.r1,
        kind: PhaseKind::Flood,
        ell,
        domain: domain.clone(),
    });
    phases.push(PhaseWindow {
        label: format!("{label}/accept"),
        start: start + budget.r1,
        end: start + budget.r1 + budget.r2,
        kind: PhaseKind::Accept,
        ell,
        domain,
    });
}

impl Protocol for Bb1Unknown<'_> {
    fn info(&self) -> &ProtocolInfo {
        &self.info
    }

    fn horizon(&self) -> u64 {
        self.schedule.last().map(|s| s.end).unwrap_or(0)
    }

    fn emit(&mut self, round: u64, out: &mut SendBuf) {
        if self.done {
            return;
        }
        if self.stage == Stage::Notify {
            // Accepting nodes tell their neighbors step 1 has ended.
            for u in 0..self.g.n() {
                if self.accepted_data[u as usize] && !self.terminated[u as usize] {
                    for &(_, eid) in self.g.neighbors(u) {
                        out.push(
                            u,
                            eid,
                            Envelope::plain(Message::Control {
                                kind: ControlKind::StepDone,
                            }),
                        );
                    }
                }
            }
            return;
        }
        if let Some(exec) = self.exec.as_mut() {
            if !self.any_terminated {
                exec.emit(self.g, round, out);
                return;
            }
            // Terminated nodes halt: drop their emissions.
            self.emit_buf.clear_items();
            exec.emit(self.g, round, &mut self.emit_buf);
            for &(from, eid, env) in self.emit_buf.items() {
                if !self.terminated[from as usize] {
                    out.push(from, eid, env);
                }
            }
        }
    }

    fn deliver(&mut self, round: u64, to: NodeId, from: NodeId, eid: EdgeId, env: &Envelope) {
        if self.done || self.terminated[to as usize] {
            return;
        }
        if let Message::Control {
            kind: ControlKind::StepDone,
        } = env.msg
        {
            if self.params.wake == WakeMode::Triggered && !self.accepted_data[to as usize] {
                let sched = *self.current();
                let in_window = sched
                    .notify_round
                    .is_some_and(|nr| round >= nr && round < sched.mt_start);
                if in_window {
                    let trig = &mut self.triggers[to as usize];
                    if !trig.contains(&round) && trig.len() < 2 {
                        trig.push(round);
                        if self.stage == Stage::Step2 {
                            let offset = (round + 1).saturating_sub(sched.step2_start);
                            if let Some(exec) = self.exec.as_mut() {
                                exec.add_source(to, offset);
                            }
                        }
                    }
                }
            }
            return;
        }
        if let Some(exec) = self.exec.as_mut() {
            exec.deliver(round, to, from, eid, env);
        }
    }

    fn end_round(&mut self, round: u64) {
        if self.done {
            return;
        }
        let sched = *self.current();
        let next = round + 1;
        // Step-1 end: harvest per-application acceptance.
        let step1_end = sched.start + sched.step1.r1 + sched.step1.r2;
        if next == step1_end {
            let exec = self.exec.as_ref().expect("step1 exec");
            for u in 0..self.g.n() {
                if let Some(v) = exec.accepted(u) {
                    if !self.terminated[u as usize] {
                        self.accepted_data[u as usize] = true;
                        self.last_data[u as usize] = Some(v);
                    }
                }
            }
            self.phase_rounds
                .push((format!("app{}/data", self.app), step1_end - sched.start));
            if sched.notify_round.is_some() {
                self.stage = Stage::Notify;
                self.exec = None;
            } else {
                self.start_step2();
            }
            return;
        }
        if self.stage == Stage::Notify && Some(round) == sched.notify_round {
            self.start_step2();
            return;
        }
        let step2_end = sched.step2_start + sched.step2.r1 + sched.step2.r2;
        if next == step2_end && self.stage == Stage::Step2 {
            let exec = self.exec.as_ref().expect("step2 exec");
            self.source_got_mark =
                exec.accepted(self.params.source) == Some(Value::Mark)
                    && !exec.is_source(self.params.source);
            self.phase_rounds
                .push((format!("app{}/notdone", self.app), step2_end - sched.step2_start));
            self.start_termination();
            return;
        }
        if next == sched.end {
            let exec = self.exec.as_ref().expect("termination exec");
            let d_i = 1u64 << self.app;
            for u in 0..self.g.n() {
                if self.terminated[u as usize] {
                    continue;
                }
                if exec.accepted(u) == Some(Value::Term) {
                    self.terminated[u as usize] = true;
                    self.any_terminated = true;
                    self.estimate[u as usize] = Some(d_i);
                }
            }
            self.phase_rounds
                .push((format!("app{}/termination", self.app), sched.end - sched.mt_start));
            if (0..self.g.n() as usize).all(|u| self.terminated[u]) {
                self.done = true;
                return;
            }
            if self.app + 1 < self.schedule.len() {
                self.app += 1;
                self.triggers.iter_mut().for_each(Vec::clear);
                self.source_got_mark = false;
                self.start_step1();
            } else {
                // Horizon: the engine will report the liveness failure.
                self.exec = None;
            }
        }
    }

    fn complete(&self) -> bool {
        self.done
    }

    fn next_busy_round(&self, after: u64) -> Option<u64> {
        if self.done {
            return None;
        }
        let sched = self.current();
        // Stage boundaries must be simulated: transitions happen in
        // end_round of the boundary's predecessor.
        let step1_end = sched.start + sched.step1.r1 + sched.step1.r2;
        let step2_end = sched.step2_start + sched.step2.r1 + sched.step2.r2;
        let boundaries = [
            step1_end.saturating_sub(1),
            sched.notify_round.unwrap_or(u64::MAX),
            step2_end.saturating_sub(1),
            sched.end.saturating_sub(1),
        ];
        let next_boundary = boundaries
            .iter()
            .copied()
            .filter(|&b| b != u64::MAX && b >= after)
            .min();
        let exec_busy = self.exec.as_ref().and_then(|e| e.next_busy(after));
        match (exec_busy, next_boundary) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, b) => b,
        }
    }

    fn outputs(&self) -> Vec<Option<Value>> {
        self.last_data.clone()
    }

    fn expected_output(&self) -> Option<Value> {
        self.params.source_active.then_some(self.params.m0)
    }

    fn phase_rounds(&self) -> Vec<(String, u64)> {
        self.phase_rounds.clone()
    }

    fn diameter_estimate(&self) -> Option<u64> {
        self.estimate[self.params.source as usize]
            .or_else(|| self.estimate.iter().flatten().next().copied())
    }

    fn queue_report(&self) -> Option<crate::engine::QueueDelayReport> {
        None
    }
}

impl Bb1Unknown<'_> {
    /// Per-node diameter estimates, for agreement checks.
    pub fn estimates(&self) -> &[Option<u64>] {
        &self.estimate
    }

    pub fn terminated(&self) -> &[bool] {
        &self.terminated
    }

    /// Index of the application currently executing (or just finished).
    pub fn current_app(&self) -> usize {
        self.app
    }
}
