//! Diameter-oblivious broadcast against `t` adversarial edges.
//!
//! Application `i` uses `L_i = (6t+2) * D_i` with `D_i = 2^i`: first the
//! data broadcast over an `(L_i, 2t)` family, then the non-acceptors
//! broadcast the not-done marker over a `(c_step2 * t * L_i, 2t)` family,
//! then a waiting window of exactly one such broadcast's budget (tau_i):
//! if the source accepted no marker it broadcasts the termination message
//! there; nodes accepting it finish with their last accepted data bit.

use super::bb1::Domain;
use super::bbt::BbtExec;
use crate::covering::{
    build_expander_family, build_sampled_family, CoveringError, CoveringFamily, FamilyConstants,
};
use crate::engine::{
    ChannelMode, Envelope, PhaseKind, PhaseWindow, Protocol, ProtocolInfo, SendBuf, Value,
};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::protocols::{ProtocolConstants, ProtocolError};
use crate::util::derive_seed;

/// Which covering-family construction each application uses. The sampled
/// flavor realizes the generic size bound and explodes for k = 2t >= 4;
/// the expander flavor keeps `ell = O(t log n)` and relaxed coverage on
/// well-connected fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BbtFamilyPlan {
    Sampled,
    Expander,
}

#[derive(Clone, Debug)]
pub struct BbtUnknownParams {
    pub m0: Value,
    pub source: NodeId,
    pub source_active: bool,
    pub t: u32,
    pub plan: BbtFamilyPlan,
    pub constants: ProtocolConstants,
    pub family_constants: FamilyConstants,
    pub family_seed: u64,
}

#[derive(Clone, Copy, Debug)]
struct AppSchedule {
    start: u64,
    l1: u32,
    step2_start: u64,
    l2: u32,
    /// tau_i window: one full second-step budget.
    wait_start: u64,
    end: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum Stage {
    Step1,
    Step2,
    Wait,
}

pub struct BbtUnknown<'g> {
    g: &'g Graph,
    params: BbtUnknownParams,
    schedule: Vec<AppSchedule>,
    info: ProtocolInfo,
    app: usize,
    stage: Stage,
    exec: Option<BbtExec>,
    /// Cumulative acceptance of the broadcast payload across applications.
    accepted_data: Vec<bool>,
    last_data: Vec<Option<Value>>,
    terminated: Vec<bool>,
    estimate: Vec<Option<u64>>,
    source_got_mark: bool,
    any_terminated: bool,
    emit_buf: SendBuf,
    done: bool,
    phase_rounds: Vec<(String, u64)>,
}

impl<'g> BbtUnknown<'g> {
    pub fn new(g: &'g Graph, params: BbtUnknownParams) -> Result<BbtUnknown<'g>, ProtocolError> {
        if params.source >= g.n() {
            return Err(ProtocolError::InvalidParam(format!(
                "source {} out of range",
                params.source
            )));
        }
        if params.t == 0 {
            return Err(ProtocolError::InvalidParam("t must be at least 1".into()));
        }
        let c = params.constants;
        let t = params.t as u64;
        let mut schedule = Vec::new();
        let mut phases = Vec::new();
        let mut max_ell = 2u32;
        let mut at = 0u64;
        for i in 0..=c.i_max {
            let d_i = 1u64 << i;
            let l1 = ((6 * t + 2) * d_i) as u32;
            let l2 = (c.c_step2 * t * l1 as u64) as u32;
            let fam1 = build_family(g, &params, l1, 0)?;
            let fam2 = build_family(g, &params, l2, 0)?;
            max_ell = max_ell.max(fam1.ell).max(fam2.ell);
            let b1 = fam1.ell as u64 * c.c3 * l1 as u64 + c.c3 * l1 as u64;
            let b2 = fam2.ell as u64 * c.c3 * l2 as u64 + c.c3 * l2 as u64;
            let start = at;
            let step2_start = start + b1;
            let wait_start = step2_start + b2;
            let end = wait_start + b2;
            push_phases(&mut phases, i, start, b1, fam1.ell, &params, step2_start, b2, fam2.ell, wait_start);
            schedule.push(AppSchedule {
                start,
                l1,
                step2_start,
                l2,
                wait_start,
                end,
            });
            at = end;
            if d_i >= 2 * g.n() as u64 {
                break;
            }
        }
        let len_cap = schedule
            .iter()
            .map(|s| c.c3 * s.l2 as u64)
            .max()
            .unwrap_or(2) as u32;
        let info = ProtocolInfo {
            name: "bbt_unknown".into(),
            source: params.source,
            source_active: params.source_active,
            t: params.t,
            max_ell,
            len_cap,
            phases,
        };
        let n = g.n() as usize;
        let mut proto = BbtUnknown {
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
            source_got_mark: false,
            any_terminated: false,
            emit_buf: SendBuf::default(),
            done: false,
            phase_rounds: Vec::new(),
        };
        proto.start_step1()?;
        Ok(proto)
    }

    fn start_step1(&mut self) -> Result<(), ProtocolError> {
        let sched = self.schedule[self.app];
        let fam = build_family(
            self.g,
            &self.params,
            sched.l1,
            derive_seed(self.params.family_seed, &[self.app as u64, 1]),
        )?;
        let sources: Vec<NodeId> = if self.params.source_active
            && !self.terminated[self.params.source as usize]
        {
            vec![self.params.source]
        } else {
            vec![]
        };
        self.stage = Stage::Step1;
        self.exec = Some(BbtExec::new(
            self.g,
            fam,
            sched.l1,
            self.params.t,
            self.params.constants.c3,
            self.params.m0,
            &sources,
            sched.start,
            ChannelMode::Congest,
        ));
        Ok(())
    }

    fn start_step2(&mut self) {
        let sched = self.schedule[self.app];
        let fam = build_family(
            self.g,
            &self.params,
            sched.l2,
            derive_seed(self.params.family_seed, &[self.app as u64, 2]),
        )
        .expect("step-2 family was feasible at schedule build time");
        let sources: Vec<NodeId> = (0..self.g.n())
            .filter(|&u| !self.accepted_data[u as usize] && !self.terminated[u as usize])
            .collect();
        self.stage = Stage::Step2;
        self.exec = Some(BbtExec::new(
            self.g,
            fam,
            sched.l2,
            self.params.t,
            self.params.constants.c3,
            Value::Mark,
            &sources,
            sched.step2_start,
            ChannelMode::Congest,
        ));
    }

    fn start_wait(&mut self) {
        let sched = self.schedule[self.app];
        let fam = build_family(
            self.g,
            &self.params,
            sched.l2,
            derive_seed(self.params.family_seed, &[self.app as u64, 3]),
        )
        .expect("termination family was feasible at schedule build time");
        let sources: Vec<NodeId> = if self.params.source_active
            && !self.source_got_mark
            && !self.terminated[self.params.source as usize]
        {
            vec![self.params.source]
        } else {
            vec![]
        };
        self.stage = Stage::Wait;
        self.exec = Some(BbtExec::new(
            self.g,
            fam,
            sched.l2,
            self.params.t,
            self.params.constants.c3,
            Value::Term,
            &sources,
            sched.wait_start,
            ChannelMode::Congest,
        ));
    }

    /// Index of the application currently executing (or just finished).
    pub fn current_app(&self) -> usize {
        self.app
    }

    pub fn estimates(&self) -> &[Option<u64>] {
        &self.estimate
    }
}

fn build_family(
    g: &Graph,
    params: &BbtUnknownParams,
    l: u32,
    seed: u64,
) -> Result<CoveringFamily, ProtocolError> {
    match params.plan {
        BbtFamilyPlan::Sampled => {
            build_sampled_family(g, l, 2 * params.t, seed, &params.family_constants).map_err(
                |e| match e {
                    CoveringError::EllExceedsCap { computed, cap } => {
                        ProtocolError::FamilyMismatch(format!(
                            "sampled family at L = {l}, k = {} needs {computed} subgraphs \
                             (cap {cap}); use the expander plan",
                            2 * params.t
                        ))
                    }
                    other => ProtocolError::FamilyMismatch(other.to_string()),
                },
            )
        }
        BbtFamilyPlan::Expander => Ok(build_expander_family(
            g,
            params.t,
            seed,
            false,
            &params.family_constants,
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn push_phases(
    phases: &mut Vec<PhaseWindow>,
    app: u32,
    start: u64,
    b1: u64,
    ell1: u32,
    params: &BbtUnknownParams,
    step2_start: u64,
    b2: u64,
    ell2: u32,
    wait_start: u64,
) {
    phases.push(PhaseWindow {
        label: format!("app{app}/data"),
        start,
        end: start + b1,
        kind: PhaseKind::Flood,
        ell: ell1,
        domain: Domain::for_payload(params.m0).values(),
    });
    phases.push(PhaseWindow {
        label: format!("app{app}/notdone"),
        start: step2_start,
        end: step2_start + b2,
        kind: PhaseKind::Flood,
        ell: ell2,
        domain: vec![Value::Mark],
    });
    phases.push(PhaseWindow {
        label: format!("app{app}/wait"),
        start: wait_start,
        end: wait_start + b2,
        kind: PhaseKind::Flood,
        ell: ell2,
        domain: vec![Value::Term],
    });
}

impl Protocol for BbtUnknown<'_> {
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
        if let Some(exec) = self.exec.as_mut() {
            if !self.any_terminated {
                exec.emit(self.g, round, out);
                return;
            }
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
        if let Some(exec) = self.exec.as_mut() {
            exec.deliver(self.g, round, to, from, eid, env);
        }
    }

    fn end_round(&mut self, round: u64) {
        if self.done {
            return;
        }
        let sched = self.schedule[self.app];
        let next = round + 1;
        if next == sched.step2_start {
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
                .push((format!("app{}/data", self.app), sched.step2_start - sched.start));
            self.start_step2();
            return;
        }
        if next == sched.wait_start && self.stage == Stage::Step2 {
            let exec = self.exec.as_ref().expect("step2 exec");
            self.source_got_mark = exec.accepted(self.params.source) == Some(Value::Mark)
                && !exec.is_source(self.params.source);
            self.phase_rounds.push((
                format!("app{}/notdone", self.app),
                sched.wait_start - sched.step2_start,
            ));
            self.start_wait();
            return;
        }
        if next == sched.end {
            let exec = self.exec.as_ref().expect("wait exec");
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
                .push((format!("app{}/wait", self.app), sched.end - sched.wait_start));
            if (0..self.g.n() as usize).all(|u| self.terminated[u]) {
                self.done = true;
                return;
            }
            if self.app + 1 < self.schedule.len() {
                self.app += 1;
                self.source_got_mark = false;
                self.start_step1()
                    .expect("schedule-time family feasibility covers all applications");
            } else {
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
        let sched = self.schedule[self.app];
        let boundaries = [
            sched.step2_start.saturating_sub(1),
            sched.wait_start.saturating_sub(1),
            sched.end.saturating_sub(1),
        ];
        let next_boundary = boundaries.iter().copied().filter(|&b| b >= after).min();
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
}
