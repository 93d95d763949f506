//! Acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails. Thresholds are pinned below.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::time::Instant;

use autonomy_lab::agent::{
    check_autonomy_conditions, replay_witnesses, run_coupled, run_coupled_with_hook, CellAction, ConditionStatus,
    CounterAgent, CoupledState, EcaEnvironment, ReactiveAgent, Singleton, TableAgent,
};
use autonomy_lab::automata::{
    dfa_language_empty, dfa_reachable, enumerate_two_state_two_symbol, tm_run_bounded, Dfa, EcaRow, RunOutcome,
};
use autonomy_lab::embedding::{embedding_equivalence_check, halting_sweep, EpKind};
use autonomy_lab::experiments::{bundled_corpus, parse_config, run_experiment, ExperimentId, RunManifest};
use autonomy_lab::info::{
    autonomy_index, complexity_curve, environment_conditional_entropy, CoarseGrainer, CoinFlipNoise, ComplexityCurve,
    Lzmw,
};
use autonomy_lab::predict::{
    initial_row, predict, BudgetPolicy, BudgetScale, CaSystem, PredictorKind, PredictorSpec, CHANCE_BAND,
};
use autonomy_lab::seeds::rng_for;

const MASTER_SEED: u64 = 20_241_016;

const EMBED_BUDGET: u64 = 10_000;
const HALT_BUDGET: u64 = 10_000;
const HALT_BUDGET_LONG: u64 = 100_000;

const DFA_COUNT: usize = 500;
const DFA_MAX_STATES: usize = 50;

const PREDICT_WIDTH: usize = 64;
const PREDICT_SEEDS: u64 = 30;
const PREDICT_MAX_T: u64 = 1024;
const FIXED_R: u64 = 256;
const CHANCE_FROM_T: u64 = 512;
/// Shortcut cost at the longest horizon must stay below this share of the
/// cost of full simulation.
const SUBLINEAR_SHARE: f64 = 0.1;

const CURVE_WIDTH: usize = 64;
const CURVE_STEPS: u64 = 2000;
const CURVE_STRIDE: u64 = 50;
const CURVE_SEEDS: u64 = 3;
const SLOPE_RATIO: f64 = 10.0;
const CONSTANT_SLOPE_MAX: f64 = 0.05;

const CAL_SAMPLES: u64 = 10_000;
const CAL_TOL: f64 = 0.05;

const AUTONOMY_WIDTH: usize = 16;
const PROBE_BUDGET: u64 = 4096;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- 1

fn embedding_soundness() -> Verdict {
    let mut machines: Vec<(String, _, Vec<_>)> =
        enumerate_two_state_two_symbol().into_iter().map(|(n, tm)| (n, tm, Vec::new())).collect();
    machines.extend(bundled_corpus().into_iter().map(|e| (e.name, e.machine, e.input)));
    let total = machines.len();
    let mut failures = Vec::new();
    for (name, tm, input) in &machines {
        match embedding_equivalence_check(tm, input, EMBED_BUDGET) {
            Ok(r) if r.passed && r.halting_step == r.embedded_halting_step => {}
            Ok(r) => failures.push(format!("{name}: {:?}", r.divergence)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    verdict(
        failures.is_empty() && total == 6561 + 10,
        format!(
            "{}/{total} machines agree step by step at budget {EMBED_BUDGET}{}",
            total - failures.len(),
            failures.first().map(|f| format!(", first failure {f}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- 2

fn halting_correspondence() -> Verdict {
    let machines: HashMap<String, _> = enumerate_two_state_two_symbol().into_iter().collect();
    let short = halting_sweep(HALT_BUDGET).expect("sweep runs");
    let mut mismatches = 0usize;
    let mut reached = 0usize;
    for row in &short {
        let direct = match tm_run_bounded(&machines[&row.machine], &[], HALT_BUDGET).expect("bounded run") {
            RunOutcome::Halted { at_step, .. } => Some(at_step),
            RunOutcome::OutOfBudget { .. } => None,
        };
        let semi = match row.ep {
            EpKind::Reached { t } => Some(t),
            EpKind::Unknown { .. } => None,
        };
        reached += usize::from(semi.is_some());
        mismatches += usize::from(semi != direct);
    }
    let long = halting_sweep(HALT_BUDGET_LONG).expect("sweep runs");
    let mut flipped = 0usize;
    let mut illegal = 0usize;
    for (a, b) in short.iter().zip(&long) {
        match (a.ep, b.ep) {
            _ if a.machine != b.machine => illegal += 1,
            (EpKind::Reached { t: x }, EpKind::Reached { t: y }) if x == y => {}
            (EpKind::Unknown { .. }, EpKind::Unknown { .. }) => {}
            (EpKind::Unknown { .. }, EpKind::Reached { t }) if t > HALT_BUDGET => flipped += 1,
            _ => illegal += 1,
        }
    }
    verdict(
        mismatches == 0 && illegal == 0 && short.len() == long.len(),
        format!(
            "{} machines, {reached} reached at {HALT_BUDGET}, {mismatches} disagree with direct runs; \
             at {HALT_BUDGET_LONG} {flipped} unknown became reached, {illegal} other changes",
            short.len()
        ),
    )
}

// ---------------------------------------------------------------- 3

fn bfs(dfa: &Dfa, from: u32) -> Vec<bool> {
    let mut seen = vec![false; dfa.state_count()];
    let mut queue = VecDeque::from([from]);
    seen[from as usize] = true;
    while let Some(q) = queue.pop_front() {
        for a in 0..dfa.symbol_count() as u32 {
            let n = dfa.next(q, a);
            if !seen[n as usize] {
                seen[n as usize] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}

fn decidable_contrast() -> Verdict {
    let mut rng = rng_for(MASTER_SEED, &[3]);
    let mut wrong = 0usize;
    let mut pairs = 0usize;
    let mut empty = 0usize;
    for i in 0..DFA_COUNT {
        let n = 1 + i % DFA_MAX_STATES;
        let symbols = 1 + i % 3;
        let locality = (i % 4 != 0).then_some(1 + i % 5);
        let accept = [0.0, 0.02, 0.1, 0.3][i % 4];
        let dfa = Dfa::random(n, symbols, locality, accept, &mut rng);
        let reach: Vec<Vec<bool>> = (0..n as u32).map(|q| bfs(&dfa, q)).collect();
        for q1 in 0..n as u32 {
            for q2 in 0..n as u32 {
                pairs += 1;
                if dfa_reachable(&dfa, q1, q2).expect("states exist") != reach[q1 as usize][q2 as usize] {
                    wrong += 1;
                }
            }
        }
        let oracle_empty = !dfa.accepting_states().any(|q| reach[dfa.start() as usize][q as usize]);
        empty += usize::from(oracle_empty);
        wrong += usize::from(dfa_language_empty(&dfa) != oracle_empty);
    }
    verdict(
        wrong == 0 && empty > 0 && empty < DFA_COUNT,
        format!("{DFA_COUNT} DFAs up to {DFA_MAX_STATES} states, {pairs} reachability pairs, {empty} empty languages, {wrong} disagreements"),
    )
}

// ---------------------------------------------------------------- 4

fn naive_evolve(row: &EcaRow, rule: u8, t: u64) -> Vec<bool> {
    let mut cells: Vec<bool> = row.bits().collect();
    let w = cells.len();
    for _ in 0..t {
        cells = (0..w)
            .map(|i| {
                let n = (usize::from(cells[(i + w - 1) % w]) << 2)
                    | (usize::from(cells[i]) << 1)
                    | usize::from(cells[(i + 1) % w]);
                rule >> n & 1 == 1
            })
            .collect();
    }
    cells
}

fn prediction() -> Verdict {
    let horizons: Vec<u64> = (0..=10).map(|k| 1u64 << k).filter(|&t| t <= PREDICT_MAX_T).collect();

    let r90 = CaSystem::new(90, PREDICT_WIDTH).unwrap();
    let shortcut = PredictorSpec::new(PredictorKind::AdditiveShortcut, BudgetPolicy::Scaled(BudgetScale::LogHorizon));
    let mut shortcut_ok = true;
    let mut worst_share: f64 = 0.0;
    for &t in &horizons {
        for seed in 0..PREDICT_SEEDS {
            let s0 = initial_row(&r90, MASTER_SEED, seed);
            let p = predict(&shortcut, &r90, &s0, t, seed).expect("shortcut applies to rule 90");
            let exact: Vec<bool> = p.state.bits().collect();
            shortcut_ok &= exact == naive_evolve(&s0, 90, t) && p.spent <= p.budget;
            if t == PREDICT_MAX_T {
                worst_share = worst_share.max(p.spent as f64 / (PREDICT_WIDTH as u64 * t) as f64);
            }
        }
    }

    let r110 = CaSystem::new(110, PREDICT_WIDTH).unwrap();
    let fixed = [
        PredictorKind::Frozen,
        PredictorKind::ChanceBaseline,
        PredictorKind::TruncatedSimulator,
        PredictorKind::CoarseSimulator,
    ];
    let mut outside = Vec::new();
    let mut means = Vec::new();
    for kind in fixed {
        let spec = PredictorSpec::fixed(kind, FIXED_R);
        for &t in horizons.iter().filter(|&&t| t >= CHANCE_FROM_T) {
            let mut sum = 0.0;
            for seed in 0..PREDICT_SEEDS {
                let s0 = initial_row(&r110, MASTER_SEED, seed);
                let p = predict(&spec, &r110, &s0, t, seed).expect("fixed-budget predictors always answer");
                let truth = naive_evolve(&s0, 110, t);
                let agree = p.state.bits().zip(&truth).filter(|(a, b)| a == *b).count();
                sum += agree as f64 / PREDICT_WIDTH as f64;
            }
            let mean = sum / PREDICT_SEEDS as f64;
            means.push(format!("{}@{t}={mean:.3}", kind.id()));
            if !(CHANCE_BAND.0..=CHANCE_BAND.1).contains(&mean) {
                outside.push(format!("{}@{t}", kind.id()));
            }
        }
    }
    verdict(
        shortcut_ok && worst_share < SUBLINEAR_SHARE && outside.is_empty(),
        format!(
            "rule 90 shortcut exact up to t={PREDICT_MAX_T}: {shortcut_ok}, cost share at t={PREDICT_MAX_T} {worst_share:.4}; \
             rule 110 r={FIXED_R} means {}",
            means.join(" ")
        ),
    )
}

// ---------------------------------------------------------------- 5

fn curve_for(rule: Option<u32>, seed: u64, prefixes: &[u64]) -> ComplexityCurve {
    let mut rng = rng_for(MASTER_SEED, &[5, seed]);
    let row = EcaRow::random(CURVE_WIDTH, &mut rng).unwrap();
    match rule {
        Some(rule) => {
            let env = EcaEnvironment::new(rule, CURVE_WIDTH).unwrap();
            let agent = ReactiveAgent::new(0, CellAction::Noop);
            let trace =
                run_coupled(&agent, &env, CoupledState::initial(Singleton, row), CURVE_STEPS, None, false).unwrap();
            complexity_curve(&trace, prefixes, &Lzmw::default()).unwrap()
        }
        None => {
            // identity rule with a frozen agent: nothing ever changes
            let env = EcaEnvironment::new(204, CURVE_WIDTH).unwrap();
            let trace =
                run_coupled(&TableAgent::identity(1), &env, CoupledState::initial(0, row), CURVE_STEPS, None, false)
                    .unwrap();
            complexity_curve(&trace, prefixes, &Lzmw::default()).unwrap()
        }
    }
}

fn information_generation() -> Verdict {
    let prefixes: Vec<u64> = (CURVE_STRIDE..=CURVE_STEPS).step_by(CURVE_STRIDE as usize).collect();
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in 0..CURVE_SEEDS {
        let slope = |rule| curve_for(rule, seed, &prefixes).slope;
        let (s0, s255, s30, s110, sc) =
            (slope(Some(0)), slope(Some(255)), slope(Some(30)), slope(Some(110)), slope(None));
        let floor = s0.max(s255);
        ok &= s110 >= SLOPE_RATIO * floor && s30 >= SLOPE_RATIO * floor && sc < CONSTANT_SLOPE_MAX;
        lines.push(format!("seed {seed}: 0={s0:.4} 255={s255:.4} 30={s30:.2} 110={s110:.2} constant={sc:.4}"));
    }
    verdict(ok, format!("slopes in bits/step, {}", lines.join("; ")))
}

// ---------------------------------------------------------------- 6

fn calibration() -> Verdict {
    let width = 16;
    let row = |seed| EcaRow::random(width, &mut rng_for(MASTER_SEED, &[6, seed])).unwrap();

    let mut det = Vec::new();
    for rule in [30, 90, 110] {
        let env = EcaEnvironment::new(rule, width).unwrap();
        let trace = run_coupled(
            &TableAgent::alternator(),
            &env,
            CoupledState::initial(0, row(rule.into())),
            CAL_SAMPLES,
            None,
            false,
        )
        .unwrap();
        det.push(environment_conditional_entropy(&trace, &CoarseGrainer::Identity).unwrap().bits);
    }
    let det_ok = det.iter().all(|b| *b == 0.0);

    let env = EcaEnvironment::new(204, width).unwrap();
    let noisy = |agent: &TableAgent, cell, seed| {
        let s0 = CoupledState::initial(0, row(seed));
        run_coupled_with_hook(agent, &env, s0, CAL_SAMPLES, None, false, &mut CoinFlipNoise::new(cell, seed)).unwrap()
    };
    let lambda =
        environment_conditional_entropy(&noisy(&TableAgent::identity(1), 5, 1), &CoarseGrainer::Identity).unwrap().bits;
    let bit0 = CoarseGrainer::WindowProjection { start: 0, len: 1 };
    let decoupled = autonomy_index(&noisy(&TableAgent::alternator(), 0, 2), &bit0).unwrap();
    let copy = autonomy_index(&noisy(&TableAgent::copier(1, 0), 1, 3), &bit0).unwrap();

    let ok = det_ok
        && (lambda - 1.0).abs() <= CAL_TOL
        && decoupled.i_agent_to_env <= CAL_TOL
        && decoupled.i_env_to_agent <= CAL_TOL
        && (copy.i_agent_to_env - 1.0).abs() <= CAL_TOL;
    verdict(
        ok,
        format!(
            "deterministic lambda {det:?}; noisy lambda {lambda:.4}; decoupled MI {:.4}/{:.4}; copy channel {:.4} bits",
            decoupled.i_agent_to_env, decoupled.i_env_to_agent, copy.i_agent_to_env
        ),
    )
}

// ---------------------------------------------------------------- 7

fn autonomy_predicates() -> Verdict {
    let env = EcaEnvironment::new(110, AUTONOMY_WIDTH).unwrap();
    let reactive = ReactiveAgent::new(0, CellAction::Noop);
    let r = check_autonomy_conditions(&reactive, &env, PROBE_BUDGET, MASTER_SEED).unwrap();
    let counter = CounterAgent::new(0, true);
    let c = check_autonomy_conditions(&counter, &env, PROBE_BUDGET, MASTER_SEED).unwrap();
    let replays = replay_witnesses(&counter, &env, &c).unwrap();
    let all = [&c.internal_state_independence.status, &c.generative.status, &c.coupling.status];
    let ok = r.internal_state_independence.status == ConditionStatus::ProvenFalse
        && all.iter().all(|s| **s == ConditionStatus::Witnessed)
        && replays;
    verdict(
        ok,
        format!(
            "reactive condition 1 {}; counter {}/{}/{}, witnesses replay: {replays}",
            r.internal_state_independence.status, all[0], all[1], all[2]
        ),
    )
}

// ---------------------------------------------------------------- 8

fn determinism() -> Verdict {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let tmp = tempfile::tempdir().unwrap();
    let mut diffs = Vec::new();
    let mut files = 0usize;
    for id in ExperimentId::ALL {
        let config = parse_config(&configs.join(format!("{id}.toml"))).expect("shipped config parses");
        let runs: Vec<RunManifest> = ["a", "b"]
            .iter()
            .map(|tag| {
                let out = tmp.path().join(format!("{id}-{tag}"));
                let m = run_experiment(&config, &out, MASTER_SEED).expect("experiment runs");
                assert!(m.verify(&out).unwrap().is_empty(), "{id} manifest does not match its files");
                m
            })
            .collect();
        files += runs[0].outputs.len();
        if runs[0].outputs != runs[1].outputs || runs[0].config_hash != runs[1].config_hash {
            diffs.push(id.to_string());
        }
    }
    verdict(
        diffs.is_empty() && files > 0,
        format!(
            "{} experiments run twice, {files} output files compared by sha256, differing: {diffs:?}",
            ExperimentId::ALL.len()
        ),
    )
}

fn main() {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check); 8] = [
        ("embedding soundness", embedding_soundness),
        ("halting correspondence", halting_correspondence),
        ("decidable contrast", decidable_contrast),
        ("reducible vs irreducible prediction", prediction),
        ("information generation", information_generation),
        ("entropy and MI calibration", calibration),
        ("autonomy predicates", autonomy_predicates),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "criterion {} {name}: {} ({:.1}s) {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
