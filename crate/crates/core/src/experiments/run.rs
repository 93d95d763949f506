//! Experiment execution. Each runner returns its result files in memory;
//! the coordinator writes them and records checksums.

use std::io::Write as _;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::config::*;
use super::manifest::{unix_now, OutputChecksum, RunManifest, RunStatus};
use super::{bundled_corpus, sha256_hex, RunError};
use crate::agent::export::{trace_log_bytes, write_trace_csv};
use crate::agent::{
    check_autonomy_conditions, replay_witnesses, run_coupled, run_coupled_with_hook, Agent, AutonomySummary,
    CoupledState, EcaEnvironment, EnvHook, ReactiveAgent, Singleton, TableAgent,
};
use crate::automata::{enumerate_two_state_two_symbol, load_corpus, CorpusEntry, EcaRow, EcaRule, Verdict};
use crate::embedding::{embedding_equivalence_check, halting_sweep, EpKind};
use crate::info::{
    autonomy_index, complexity_curve, environment_conditional_entropy, irreducibility_score, CoinFlipNoise,
    ComplexityCurve, EntropyReport, Lzmw, MiReport,
};
use crate::predict::{efficiency_sweep, write_curves_csv, write_sweep_csv, CaSystem};
use crate::seeds::{derive_seed, rng_for};

struct Output {
    name: String,
    bytes: Vec<u8>,
}

impl Output {
    fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }

    fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        Self::new(name, bytes)
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(RunError::runtime)?;
    for r in rows {
        w.write_record(&r).map_err(RunError::runtime)?;
    }
    w.into_inner().map_err(RunError::runtime)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// SHA-256 of the canonical JSON form of the config, so formatting and
/// comments in the file do not matter.
pub fn config_hash(config: &ExperimentConfig) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("config serializes"))
}

macro_rules! with_agent {
    ($built:expr, $a:ident => $body:expr) => {
        match $built {
            BuiltAgent::Reactive($a) => $body,
            BuiltAgent::Counter($a) => $body,
            BuiltAgent::Table($a) => $body,
        }
    };
}

/// Per-experiment labels mixed into the master seed.
const STREAM_ECA: u64 = 1;
const STREAM_COMPLEXITY: u64 = 2;
const STREAM_AUTONOMY: u64 = 3;

/// Runs `config` into `out` and returns the finalized manifest. The manifest
/// is on disk before any result is written; on failure it records the cause.
pub fn run_experiment(config: &ExperimentConfig, out: &Path, master_seed: u64) -> Result<RunManifest, RunError> {
    std::fs::create_dir_all(out).map_err(|e| RunError::io(out, e))?;
    let mut manifest = RunManifest::start(config.id(), config_hash(config), master_seed);
    manifest.write(out)?;
    info!("{} seed={} config={}", config.id(), master_seed, manifest.config_hash);

    let result = execute(config, master_seed, &manifest.config_hash).and_then(|mut files| {
        files.sort_by(|a, b| a.name.cmp(&b.name));
        files
            .into_iter()
            .map(|f| {
                let path = out.join(&f.name);
                std::fs::write(&path, &f.bytes).map_err(|e| RunError::io(&path, e))?;
                Ok(OutputChecksum { file: f.name, bytes: f.bytes.len() as u64, sha256: sha256_hex(&f.bytes) })
            })
            .collect::<Result<Vec<_>, RunError>>()
    });
    manifest.finished_unix = Some(unix_now());
    match result {
        Ok(outputs) => {
            manifest.outputs = outputs;
            manifest.status = RunStatus::Completed;
            manifest.write(out)?;
            info!("wrote {} files to {}", manifest.outputs.len(), out.display());
            Ok(manifest)
        }
        Err(e) => {
            manifest.status = RunStatus::Failed { cause: e.to_string() };
            manifest.write(out)?;
            Err(e)
        }
    }
}

fn execute(config: &ExperimentConfig, seed: u64, hash: &str) -> Result<Vec<Output>, RunError> {
    match config {
        ExperimentConfig::EcaRun(c) => eca_run(c, seed, hash),
        ExperimentConfig::EmbedCheck(c) => embed_check(c),
        ExperimentConfig::PredictSweep(c) => predict_sweep(c, seed),
        ExperimentConfig::ComplexitySweep(c) => complexity_sweep(c, seed),
        ExperimentConfig::HaltingSweep(c) => halting(c),
        ExperimentConfig::AutonomyReport(c) => autonomy_report(c, seed),
    }
}

fn initial_row(init: InitialRow, width: usize, seed: u64) -> EcaRow {
    match init {
        InitialRow::Random => EcaRow::random(width, &mut rng_for(seed, &[])).expect("validated width"),
        InitialRow::Single => {
            let mut row = EcaRow::zeros(width).expect("validated width");
            row.set(width / 2, true);
            row
        }
    }
}

fn spacetime(rows: impl Iterator<Item = EcaRow>) -> Vec<u8> {
    let mut out = Vec::new();
    for row in rows {
        let line: String = row.bits().map(|b| if b { '#' } else { '.' }).collect();
        writeln!(out, "{line}").expect("vec write");
    }
    out
}

fn eca_run(c: &EcaRunConfig, master: u64, hash: &str) -> Result<Vec<Output>, RunError> {
    let jobs: Vec<(EcaRule, u64)> = c.rules.iter().flat_map(|&r| (0..c.seeds).map(move |k| (r, k))).collect();
    let per_job: Vec<Vec<Output>> = jobs
        .par_iter()
        .map(|&(rule, k)| {
            let seed = derive_seed(master, &[STREAM_ECA, u64::from(rule.index()), k]);
            let env = EcaEnvironment::new(u32::from(rule.index()), c.width).map_err(RunError::runtime)?;
            let row = initial_row(c.init, c.width, seed);
            let stem = format!("rule{}-seed{k}", rule.index());
            with_agent!(c.agent.build(), a => {
                let goal = |s: &_, e: &EcaRow| a.goal(s, e);
                let trace = run_coupled(&a, &env, CoupledState::initial(Default::default(), row), c.steps, Some(&goal), false)
                    .map_err(RunError::runtime)?
                    .with_provenance(seed, hash);
                let mut csv = Vec::new();
                write_trace_csv(&trace, &mut csv).map_err(RunError::runtime)?;
                let mut files = vec![
                    Output::new(format!("trace-{stem}.csv"), csv),
                    Output::new(format!("spacetime-{stem}.txt"), spacetime(trace.records.iter().map(|r| r.env.clone()))),
                ];
                if c.binary_log {
                    files.push(Output::new(format!("trace-{stem}.alt"), trace_log_bytes(&trace)));
                }
                Ok(files)
            })
        })
        .collect::<Result<_, RunError>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

fn verdict_str(v: Option<Verdict>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct EmbedSummary {
    budget: u64,
    machines: usize,
    passed: usize,
    failed: Vec<String>,
}

fn embed_check(c: &EmbedCheckConfig) -> Result<Vec<Output>, RunError> {
    let corpus: Vec<CorpusEntry> = match &c.corpus_dir {
        Some(dir) => load_corpus(dir).map_err(RunError::runtime)?,
        None => bundled_corpus(),
    };
    let mut jobs: Vec<(&str, CorpusEntry)> = corpus.into_iter().map(|e| ("corpus", e)).collect();
    if c.enumeration {
        jobs.extend(
            enumerate_two_state_two_symbol()
                .into_iter()
                .map(|(name, machine)| ("enumeration", CorpusEntry { name, machine, input: Vec::new() })),
        );
    }
    let reports = jobs
        .par_iter()
        .map(|(_, e)| embedding_equivalence_check(&e.machine, &e.input, c.budget).map_err(RunError::runtime))
        .collect::<Result<Vec<_>, _>>()?;
    let failed: Vec<String> =
        jobs.iter().zip(&reports).filter(|(_, r)| !r.passed).map(|((_, e), _)| e.name.clone()).collect();
    if !failed.is_empty() {
        warn!("{} machines diverged from direct simulation", failed.len());
    }
    let rows = jobs.iter().zip(&reports).map(|((source, e), r)| {
        vec![
            source.to_string(),
            e.name.clone(),
            r.passed.to_string(),
            r.steps_checked.to_string(),
            opt(r.halting_step),
            opt(r.embedded_halting_step),
            verdict_str(r.verdict),
            opt(r.divergence.as_ref().map(|d| d.step)),
            r.divergence.as_ref().map(|d| d.reason.clone()).unwrap_or_default(),
        ]
    });
    let csv = csv_bytes(
        &[
            "source",
            "machine",
            "passed",
            "steps_checked",
            "halting_step",
            "embedded_halting_step",
            "verdict",
            "divergence_step",
            "divergence_reason",
        ],
        rows,
    )?;
    let summary = EmbedSummary { budget: c.budget, machines: jobs.len(), passed: jobs.len() - failed.len(), failed };
    Ok(vec![Output::new("embed-check.csv", csv), Output::json("embed-check-summary.json", &summary)])
}

fn predict_sweep(c: &PredictSweepConfig, master: u64) -> Result<Vec<Output>, RunError> {
    let systems = c
        .rules
        .iter()
        .map(|r| CaSystem::new(u32::from(r.index()), c.width))
        .collect::<Result<Vec<_>, _>>()
        .map_err(RunError::runtime)?;
    let (rows, curves) =
        efficiency_sweep(&systems, &c.predictors, &c.horizons, c.seeds, master).map_err(RunError::runtime)?;
    let mut r = Vec::new();
    write_sweep_csv(&rows, &mut r).map_err(RunError::runtime)?;
    let mut k = Vec::new();
    write_curves_csv(&curves, &mut k).map_err(RunError::runtime)?;
    Ok(vec![Output::new("predict-rows.csv", r), Output::new("predict-curves.csv", k)])
}

fn complexity_sweep(c: &ComplexitySweepConfig, master: u64) -> Result<Vec<Output>, RunError> {
    let prefixes: Vec<u64> = (c.stride..=c.steps).step_by(c.stride as usize).collect();
    let mut series: Vec<(String, Option<EcaRule>)> =
        c.rules.iter().map(|r| (format!("rule{}", r.index()), Some(*r))).collect();
    if c.constant_trace {
        series.push(("constant".into(), None));
    }
    let jobs: Vec<(usize, u64)> = (0..series.len()).flat_map(|i| (0..c.seeds).map(move |k| (i, k))).collect();
    let curves: Vec<ComplexityCurve> = jobs
        .par_iter()
        .map(|&(i, k)| {
            // every series of one seed starts from the same row
            let row = initial_row(InitialRow::Random, c.width, derive_seed(master, &[STREAM_COMPLEXITY, k]));
            let compressor = Lzmw::default();
            let curve = match series[i].1 {
                Some(rule) => {
                    let env = EcaEnvironment::new(u32::from(rule.index()), c.width).map_err(RunError::runtime)?;
                    let agent = ReactiveAgent::new(0, crate::agent::CellAction::Noop);
                    let trace = run_coupled(&agent, &env, CoupledState::initial(Singleton, row), c.steps, None, false)
                        .map_err(RunError::runtime)?;
                    complexity_curve(&trace, &prefixes, &compressor)
                }
                None => {
                    let env = EcaEnvironment::new(204, c.width).map_err(RunError::runtime)?;
                    let trace = run_coupled(
                        &TableAgent::identity(1),
                        &env,
                        CoupledState::initial(0, row),
                        c.steps,
                        None,
                        false,
                    )
                    .map_err(RunError::runtime)?;
                    complexity_curve(&trace, &prefixes, &compressor)
                }
            };
            curve.map_err(RunError::runtime)
        })
        .collect::<Result<_, _>>()?;

    let reference = series.iter().position(|s| s.1 == Some(c.reference_rule)).expect("validated reference rule");
    let by_job = |i: usize, k: u64| &curves[i * c.seeds as usize + k as usize];
    let mut long = Vec::new();
    let mut summary = Vec::new();
    for (&(i, k), curve) in jobs.iter().zip(&curves) {
        for p in &curve.points {
            long.push(vec![series[i].0.clone(), k.to_string(), p.t.to_string(), p.khat_bits.to_string()]);
        }
        summary.push(vec![
            series[i].0.clone(),
            k.to_string(),
            curve.compressor.clone(),
            format!("{:.6}", curve.slope),
            format!("{:.6}", curve.intercept),
            format!("{:.6}", curve.residual),
            format!("{:.6}", irreducibility_score(curve, by_job(reference, k))),
        ]);
    }
    Ok(vec![
        Output::new("complexity-curves.csv", csv_bytes(&["series", "seed", "t", "khat_bits"], long)?),
        Output::new(
            "complexity-summary.csv",
            csv_bytes(&["series", "seed", "compressor", "slope", "intercept", "residual", "score"], summary)?,
        ),
    ])
}

#[derive(Serialize)]
struct HaltingSummary {
    budget: u64,
    machines: usize,
    reached: usize,
    unknown: usize,
    disagreements: Vec<String>,
}

fn halting(c: &HaltingSweepConfig) -> Result<Vec<Output>, RunError> {
    let rows = halting_sweep(c.budget).map_err(RunError::runtime)?;
    let reached = rows.iter().filter(|r| matches!(r.ep, EpKind::Reached { .. })).count();
    let disagreements: Vec<String> = rows.iter().filter(|r| !r.agree).map(|r| r.machine.clone()).collect();
    let csv = csv_bytes(
        &["machine", "budget", "outcome", "t", "direct_halting_step", "verdict", "agree"],
        rows.iter().map(|r| {
            let (outcome, t) = match r.ep {
                EpKind::Reached { t } => ("reached", t.to_string()),
                EpKind::Unknown { .. } => ("unknown", String::new()),
            };
            vec![
                r.machine.clone(),
                r.budget.to_string(),
                outcome.into(),
                t,
                opt(r.direct_halting_step),
                verdict_str(r.verdict),
                r.agree.to_string(),
            ]
        }),
    )?;
    let summary = HaltingSummary {
        budget: c.budget,
        machines: rows.len(),
        reached,
        unknown: rows.len() - reached,
        disagreements,
    };
    Ok(vec![Output::new("halting.csv", csv), Output::json("halting-summary.json", &summary)])
}

#[derive(Serialize)]
struct AgentReport {
    agent: String,
    conditions: AutonomySummary,
    witnesses_replay: bool,
    information: MiReport,
    lambda_e: EntropyReport,
}

fn autonomy_report(c: &AutonomyReportConfig, master: u64) -> Result<Vec<Output>, RunError> {
    let env = EcaEnvironment::new(u32::from(c.rule.index()), c.width).map_err(RunError::runtime)?;
    let reports: Vec<AgentReport> = c
        .agents
        .par_iter()
        .enumerate()
        .map(|(i, choice)| {
            let seed = derive_seed(master, &[STREAM_AUTONOMY, i as u64]);
            with_agent!(choice.build(), a => {
                let report = check_autonomy_conditions(&a, &env, c.probe_budget, seed).map_err(RunError::runtime)?;
                let witnesses_replay = replay_witnesses(&a, &env, &report).map_err(RunError::runtime)?;
                let row = initial_row(InitialRow::Random, c.width, seed);
                let s0 = CoupledState::initial(Default::default(), row);
                let mut noise = c.noise_cell.map(|cell| CoinFlipNoise::new(cell, seed));
                let mut none = crate::agent::coupled::NoHook;
                let hook: &mut dyn EnvHook<EcaRow> = match noise.as_mut() {
                    Some(n) => n,
                    None => &mut none,
                };
                let trace = run_coupled_with_hook(&a, &env, s0, c.steps, None, false, hook).map_err(RunError::runtime)?;
                Ok(AgentReport {
                    agent: choice.id(),
                    conditions: report.summary(),
                    witnesses_replay,
                    information: autonomy_index(&trace, &c.grain).map_err(RunError::runtime)?,
                    lambda_e: environment_conditional_entropy(&trace, &c.grain).map_err(RunError::runtime)?,
                })
            })
        })
        .collect::<Result<_, RunError>>()?;
    let csv = csv_bytes(
        &[
            "agent",
            "internal_state_independence",
            "generative",
            "coupling",
            "witnesses_replay",
            "i_agent_to_env",
            "i_env_to_agent",
            "autonomy_index",
            "lambda_e_bits",
            "samples",
            "grain",
        ],
        reports.iter().map(|r| {
            vec![
                r.agent.clone(),
                r.conditions.internal_state_independence.status.to_string(),
                r.conditions.generative.status.to_string(),
                r.conditions.coupling.status.to_string(),
                r.witnesses_replay.to_string(),
                format!("{:.6}", r.information.i_agent_to_env),
                format!("{:.6}", r.information.i_env_to_agent),
                format!("{:.6}", r.information.autonomy_index),
                format!("{:.6}", r.lambda_e.bits),
                r.information.samples.to_string(),
                r.information.grain.clone(),
            ]
        }),
    )?;
    Ok(vec![Output::new("autonomy.csv", csv), Output::json("autonomy.json", &reports)])
}
