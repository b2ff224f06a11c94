//! Experiment harness: fixture generation, batch runs across seeds and
//! fault sets, metric sweeps, covering-family verification, and CSV/JSON
//! report emission. Identical configuration and seeds reproduce every
//! output byte.

use crate::adversary::{make_strategy, Scripted, StrategyKind};
use crate::config::{
    BbtPlanChoice, ConfigError, ExperimentConfig, FamilyFlavorChoice, FaultMode, ProtocolKind,
    VerifyMode,
};
use crate::covering::{
    build_expander_family, build_hash_family, build_sampled_family, verify_relaxed,
    verify_strict, CoverVerdict, CoveringError, CoveringFamily,
};
use crate::engine::{run, EngineConfig, EngineError, Protocol, RunReport, Transcript, Value};
use crate::graph::{diameter, generate, EdgeId, EdgeSet, Graph, GraphError};
use crate::protocols::{
    expander_broadcast, Bb1Known, Bb1Params, Bb1Unknown, Bb1UnknownParams, Bbt, BbtParams,
    BbtUnknown, BbtUnknownParams, ExpanderParams, ProtocolError,
};
use crate::util::derive_seed;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub candidate: u32,
    pub seed: u64,
    pub faults: Vec<EdgeId>,
    pub adversary: String,
    pub report: RunReport,
}

#[derive(Serialize)]
pub struct BatchReport {
    pub config: ExperimentConfig,
    pub graph_n: u32,
    pub graph_m: u32,
    pub fixture_diameter: Option<u32>,
    pub records: Vec<TrialRecord>,
    pub all_safe: bool,
    pub all_live: bool,
}

pub const CSV_HEADER: &str = "schema_version,trial,candidate,graph,protocol,adversary,seed,\
faults,rounds,completed,safety,liveness,diameter_estimate";

pub fn summary_csv(batch: &BatchReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let graph_label = serde_json::to_string(&batch.config.graph.kind)
        .unwrap_or_default()
        .replace(',', ";")
        .replace('"', "'");
    for r in &batch.records {
        let faults = r
            .faults
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("+");
        out.push_str(&format!(
            "{},{},{},{},{:?},{},{},{},{},{},{},{},{}\n",
            batch.config.schema_version,
            r.trial,
            r.candidate,
            graph_label,
            batch.config.protocol.kind,
            r.adversary,
            r.seed,
            faults,
            r.report.rounds_used,
            r.report.completed,
            r.report.safety,
            r.report.liveness,
            r.report
                .diameter_estimate
                .map(|d| d.to_string())
                .unwrap_or_default(),
        ));
    }
    out
}

/// Derived per-trial seeds: reproducible from the master seed alone.
pub fn trial_seed(cfg: &ExperimentConfig, trial: u32) -> u64 {
    derive_seed(cfg.master_seed, &[0x7472_6961, trial as u64])
}

fn fault_candidates(
    cfg: &ExperimentConfig,
    g: &Graph,
    seed: u64,
) -> Result<Vec<Vec<EdgeId>>, HarnessError> {
    let count = cfg.faults.count.unwrap_or(cfg.protocol.t) as usize;
    match cfg.faults.mode {
        FaultMode::Explicit => Ok(vec![cfg.faults.edges.clone()]),
        FaultMode::Random => Ok(vec![sample_edges(g, count, derive_seed(seed, &[0xfa]))]),
        FaultMode::WorstOf => Ok((0..cfg.faults.k)
            .map(|c| sample_edges(g, count, derive_seed(seed, &[0xfa, c as u64])))
            .collect()),
    }
}

fn sample_edges(g: &Graph, count: usize, seed: u64) -> Vec<EdgeId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = count.min(g.m() as usize);
    sample(&mut rng, g.m() as usize, count)
        .into_iter()
        .map(|i| i as EdgeId)
        .collect()
}

/// L parameter the protocol will use, deriving the fixture diameter when
/// no estimate is configured.
fn protocol_l(cfg: &ExperimentConfig, g: &Graph) -> Result<(u64, u32), HarnessError> {
    let d = match cfg.protocol.d_estimate {
        Some(d) => d,
        None => diameter(g)? as u64,
    };
    let t = cfg.protocol.t as u64;
    let l = cfg
        .protocol
        .l
        .unwrap_or(((6 * t + 2) * d) as u32);
    Ok((d, l))
}

fn build_single_family(
    cfg: &ExperimentConfig,
    g: &Graph,
    l: u32,
    seed: u64,
) -> Result<CoveringFamily, HarnessError> {
    let fc = &cfg.protocol.family.constants;
    let fam_l = cfg.protocol.family.l.unwrap_or(l);
    let k = cfg.protocol.family.k.unwrap_or(2 * cfg.protocol.t);
    Ok(match cfg.protocol.family.flavor {
        FamilyFlavorChoice::Hash => build_hash_family(g, fam_l, seed, fc),
        FamilyFlavorChoice::Sampled => build_sampled_family(g, fam_l, k, seed, fc)?,
        FamilyFlavorChoice::ExpanderUndirected => {
            build_expander_family(g, cfg.protocol.t, seed, false, fc)
        }
        FamilyFlavorChoice::ExpanderDirected => {
            build_expander_family(g, cfg.protocol.t, seed, true, fc)
        }
    })
}

/// Runs one (trial, fault-candidate) simulation.
pub fn run_single(
    cfg: &ExperimentConfig,
    g: &Graph,
    seed: u64,
    fault_ids: &[EdgeId],
) -> Result<(RunReport, String), HarnessError> {
    let faults = EdgeSet::from_ids(g.m(), fault_ids)?;
    let engine_cfg = EngineConfig {
        t: cfg.protocol.t.max(faults.len() as u32),
        beta: cfg.engine.beta,
        mode: cfg.engine.mode,
        wake: cfg.engine.wake,
        record_transcript: cfg.engine.record_transcript,
    };
    let coin_seeds: Vec<u64> = (0..g.n())
        .map(|u| derive_seed(seed, &[0xc0, u as u64]))
        .collect();
    let m0 = Value::bit(cfg.protocol.m0);
    let wrong = m0.flipped();
    let fam_seed = derive_seed(cfg.protocol.family.seed, &[seed]);

    let build_and_run = |protocol: &mut dyn Protocol,
                             fam: Option<&CoveringFamily>|
     -> Result<(RunReport, String), HarnessError> {
        let mut strategy = match (cfg.adversary.kind, &cfg.adversary.schedule_path) {
            (StrategyKind::DelayStress, _) | (_, None) => make_strategy(
                cfg.adversary.kind,
                wrong,
                g,
                fam,
                &faults,
                protocol.info(),
            ),
            (_, Some(path)) => {
                let text = std::fs::read_to_string(path)?;
                let t = Transcript::from_jsonl(&text).map_err(ConfigError::Parse)?;
                Box::new(Scripted::from_transcript(&t, &faults))
            }
        };
        let name = strategy.name().to_string();
        let report = run(
            g,
            fam,
            protocol,
            strategy.as_mut(),
            &faults,
            &coin_seeds,
            &engine_cfg,
        )?;
        Ok((report, name))
    };

    match cfg.protocol.kind {
        ProtocolKind::Bb1Known => {
            let (d, _) = protocol_l(cfg, g)?;
            let l = 7 * d as u32;
            let fam = build_single_family(cfg, g, l, fam_seed)?;
            let params = Bb1Params {
                l,
                c1: cfg.protocol.constants.c1,
                c2: cfg.protocol.constants.c2,
                m0,
                source: cfg.protocol.source,
                source_active: cfg.protocol.source_active,
                instrument: cfg.engine.instrument,
            };
            let mut proto = Bb1Known::new(g, &fam, &params)?;
            build_and_run(&mut proto, Some(&fam))
        }
        ProtocolKind::Bb1Unknown => {
            let params = Bb1UnknownParams {
                m0,
                source: cfg.protocol.source,
                source_active: cfg.protocol.source_active,
                constants: cfg.protocol.constants,
                family_constants: cfg.protocol.family.constants.clone(),
                family_seed: fam_seed,
                wake: cfg.engine.wake,
                instrument: cfg.engine.instrument,
            };
            let mut proto = Bb1Unknown::new(g, params)?;
            build_and_run(&mut proto, None)
        }
        ProtocolKind::Bbt => {
            let (_, l) = protocol_l(cfg, g)?;
            let fam = build_single_family(cfg, g, l, fam_seed)?;
            let params = BbtParams {
                l,
                t: cfg.protocol.t,
                c3: cfg.protocol.constants.c3,
                m0,
                source: cfg.protocol.source,
                source_active: cfg.protocol.source_active,
                mode: cfg.engine.mode,
            };
            let mut proto = Bbt::new(g, &fam, &params)?;
            build_and_run(&mut proto, Some(&fam))
        }
        ProtocolKind::BbtUnknown => {
            let params = BbtUnknownParams {
                m0,
                source: cfg.protocol.source,
                source_active: cfg.protocol.source_active,
                t: cfg.protocol.t,
                plan: match cfg.protocol.plan {
                    BbtPlanChoice::Sampled => crate::protocols::BbtFamilyPlan::Sampled,
                    BbtPlanChoice::Expander => crate::protocols::BbtFamilyPlan::Expander,
                },
                constants: cfg.protocol.constants,
                family_constants: cfg.protocol.family.constants.clone(),
                family_seed: fam_seed,
            };
            let mut proto = BbtUnknown::new(g, params)?;
            build_and_run(&mut proto, None)
        }
        ProtocolKind::Expander => {
            let phi = cfg.protocol.phi_estimate.ok_or_else(|| {
                ConfigError::Field {
                    field: "protocol.phi_estimate".into(),
                    msg: "required for the expander protocol".into(),
                }
            })?;
            let params = ExpanderParams {
                m0,
                source: cfg.protocol.source,
                source_active: cfg.protocol.source_active,
                t: cfg.protocol.t,
                phi_estimate: phi,
                constants: cfg.protocol.constants,
                family_constants: cfg.protocol.family.constants.clone(),
                family_seed: fam_seed,
            };
            let (mut proto, fam) = expander_broadcast(g, &params)?;
            build_and_run(&mut proto, Some(&fam))
        }
    }
}

/// Runs all trials of a configuration; in worst-of mode every candidate
/// fault set is executed and recorded.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<BatchReport, HarnessError> {
    let g = generate(&cfg.graph)?;
    let fixture_diameter = diameter(&g).ok();
    let mut records = Vec::new();
    for trial in 0..cfg.trials.max(1) {
        let seed = trial_seed(cfg, trial);
        let candidates = fault_candidates(cfg, &g, seed)?;
        for (cand, fault_ids) in candidates.iter().enumerate() {
            let (report, adversary) = run_single(cfg, &g, seed, fault_ids)?;
            records.push(TrialRecord {
                trial,
                candidate: cand as u32,
                seed,
                faults: fault_ids.clone(),
                adversary,
                report,
            });
        }
    }
    let all_safe = records.iter().all(|r| r.report.safety);
    let all_live = records.iter().all(|r| r.report.liveness);
    Ok(BatchReport {
        config: cfg.clone(),
        graph_n: g.n(),
        graph_m: g.m(),
        fixture_diameter,
        records,
        all_safe,
        all_live,
    })
}

/// Worst-case view of one trial: any verdict failure dominates, then the
/// maximal round count.
pub fn worst_of_trial(records: &[TrialRecord], trial: u32) -> Option<&TrialRecord> {
    records
        .iter()
        .filter(|r| r.trial == trial)
        .max_by_key(|r| {
            let failed = !(r.report.safety && r.report.liveness);
            (failed, r.report.rounds_used)
        })
}

#[derive(Serialize)]
pub struct SweepRow {
    pub value: String,
    pub trials: u32,
    pub median_rounds: u64,
    pub max_rounds: u64,
    pub safety_pass: u32,
    pub liveness_pass: u32,
}

#[derive(Serialize)]
pub struct SweepReport {
    pub param: String,
    pub rows: Vec<SweepRow>,
    pub all_pass: bool,
}

pub fn run_sweep(
    base: &ExperimentConfig,
    param: &str,
    values: &[String],
) -> Result<SweepReport, HarnessError> {
    let mut rows = Vec::new();
    let mut all_pass = true;
    for value in values {
        let mut cfg = base.clone();
        cfg.apply_override(param, value)?;
        let batch = run_batch(&cfg)?;
        // Per-trial worst rounds, then median over trials.
        let mut per_trial: Vec<u64> = (0..cfg.trials.max(1))
            .filter_map(|t| worst_of_trial(&batch.records, t).map(|r| r.report.rounds_used))
            .collect();
        per_trial.sort_unstable();
        let median = per_trial
            .get(per_trial.len() / 2)
            .copied()
            .unwrap_or_default();
        let max = per_trial.last().copied().unwrap_or_default();
        let safety_pass = batch.records.iter().filter(|r| r.report.safety).count() as u32;
        let liveness_pass = batch.records.iter().filter(|r| r.report.liveness).count() as u32;
        all_pass &= batch.all_safe && batch.all_live;
        rows.push(SweepRow {
            value: value.clone(),
            trials: cfg.trials,
            median_rounds: median,
            max_rounds: max,
            safety_pass,
            liveness_pass,
        });
    }
    Ok(SweepReport {
        param: param.to_string(),
        rows,
        all_pass,
    })
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("value,trials,median_rounds,max_rounds,safety_pass,liveness_pass\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.value, r.trials, r.median_rounds, r.max_rounds, r.safety_pass, r.liveness_pass
        ));
    }
    out
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub mode: VerifyMode,
    pub l: u32,
    pub k: u32,
    pub seeds: u32,
    pub passes: u32,
    pub first_failure: Option<String>,
}

/// Builds the configured family per seed and runs the requested oracle.
pub fn verify_cover(cfg: &ExperimentConfig) -> Result<VerifyReport, HarnessError> {
    let g = generate(&cfg.graph)?;
    let d = diameter(&g)? as u32;
    let l = cfg.verify.l.unwrap_or(7 * d);
    let k = cfg.verify.k.unwrap_or(1);
    let mut passes = 0;
    let mut first_failure = None;
    for s in 0..cfg.verify.seeds.max(1) {
        let seed = derive_seed(cfg.protocol.family.seed, &[0xc0fe, s as u64]);
        let fam = build_single_family(cfg, &g, l, seed)?;
        let verdict: CoverVerdict = match cfg.verify.mode {
            VerifyMode::Strict => verify_strict(&fam, &g, l, k)?,
            VerifyMode::Relaxed => verify_relaxed(&fam, &g, l, k, cfg.verify.budget)?,
        };
        if verdict.ok {
            passes += 1;
        } else if first_failure.is_none() {
            first_failure = verdict.counterexample.map(|cx| {
                format!(
                    "seed {seed}: (u = {}, v = {}, faults = {:?})",
                    cx.u, cx.v, cx.faults
                )
            });
        }
    }
    Ok(VerifyReport {
        mode: cfg.verify.mode,
        l,
        k,
        seeds: cfg.verify.seeds.max(1),
        passes,
        first_failure,
    })
}

/// Re-executes a configuration's trial 0 with transcript recording and
/// compares against a previously dumped transcript, byte for byte.
pub fn run_replay(cfg: &ExperimentConfig, recorded_jsonl: &str) -> Result<bool, HarnessError> {
    let mut cfg = cfg.clone();
    cfg.engine.record_transcript = true;
    cfg.trials = 1;
    let g = generate(&cfg.graph)?;
    let seed = trial_seed(&cfg, 0);
    let candidates = fault_candidates(&cfg, &g, seed)?;
    let (report, _) = run_single(&cfg, &g, seed, &candidates[0])?;
    let fresh = report
        .transcript_out
        .as_ref()
        .map(Transcript::to_jsonl)
        .unwrap_or_default();
    Ok(fresh == recorded_jsonl)
}

/// Writes the standard output files: resolved config, per-trial reports,
/// and the aggregate CSV. Reports are always written, pass or fail.
pub fn write_outputs(batch: &BatchReport, dir: &std::path::Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.json"), batch.config.to_json())?;
    for r in &batch.records {
        let name = format!("trial_{:04}_{}.json", r.trial, r.candidate);
        std::fs::write(
            dir.join(name),
            serde_json::to_string_pretty(r).expect("record serializes"),
        )?;
        if let Some(t) = &r.report.transcript_out {
            let name = format!("transcript_{:04}_{}.jsonl", r.trial, r.candidate);
            std::fs::write(dir.join(name), t.to_jsonl())?;
        }
    }
    std::fs::write(dir.join("summary.csv"), summary_csv(batch))?;
    Ok(())
}
