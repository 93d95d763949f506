//! Resource-bounded prediction of CA rows and prediction efficiency.
//!
//! The resource unit is one cell-window evaluation: computing one output cell
//! from its three-cell neighbourhood. A full row update of width `W` costs `W`.

mod sweep;

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{eca_step, AutomataError, EcaRow, EcaRule};
use crate::canonical::{short_hash, Canonical};
use crate::seeds::rng_for;

pub use sweep::{
    efficiency_sweep, initial_row, write_curves_csv, write_sweep_csv, CurvePoint, EfficiencyCurve, SweepRow,
};

/// Accuracy interval treated as indistinguishable from guessing on binary rows.
pub const CHANCE_BAND: (f64, f64) = (0.4, 0.6);

/// Normalized Hamming distance between canonical byte strings. The shorter
/// input is padded with a sentinel that never matches, so every padded bit
/// counts as a difference.
pub fn state_distance(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len().max(b.len());
    if n == 0 {
        return 0.0;
    }
    let common = a.len().min(b.len());
    let differing: u32 = a[..common].iter().zip(&b[..common]).map(|(x, y)| (x ^ y).count_ones()).sum();
    let padded = 8 * (n - common) as u64;
    (u64::from(differing) + padded) as f64 / (8 * n) as f64
}

/// Normalized Hamming distance over the `width` cells of two rows.
pub fn row_distance(a: &EcaRow, b: &EcaRow) -> f64 {
    a.hamming(b) as f64 / a.width() as f64
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("predictor {predictor} is inapplicable: {reason}")]
    Inapplicable { predictor: String, reason: String },
    #[error("{predictor} needs {needed} evaluations, budget is {budget}")]
    OverBudget { predictor: String, needed: u64, budget: u64 },
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Counts cell evaluations against a budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceMeter {
    budget: u64,
    spent: u64,
}

impl ResourceMeter {
    pub fn new(budget: u64) -> Self {
        Self { budget, spent: 0 }
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.spent
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    /// Charges `n` units if they fit; otherwise charges nothing.
    pub fn try_charge(&mut self, n: u64) -> bool {
        if n <= self.remaining() {
            self.spent += n;
            true
        } else {
            false
        }
    }
}

/// A periodic CA of fixed rule and width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaSystem {
    pub rule: EcaRule,
    pub width: usize,
}

impl CaSystem {
    pub fn new(rule_index: u32, width: usize) -> Result<Self, PredictError> {
        EcaRow::zeros(width)?;
        Ok(Self { rule: EcaRule::new(rule_index)?, width })
    }

    pub fn id(&self) -> String {
        format!("rule{}-w{}", self.rule.index(), self.width)
    }

    /// Ground truth: `t` exact steps.
    pub fn actual(&self, s0: &EcaRow, t: u64) -> EcaRow {
        crate::automata::eca_evolve(s0, &self.rule, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictorKind {
    Frozen,
    ChanceBaseline,
    TruncatedSimulator,
    CoarseSimulator,
    AdditiveShortcut,
    ExactSimulator,
}

impl PredictorKind {
    pub fn id(self) -> &'static str {
        match self {
            PredictorKind::Frozen => "frozen",
            PredictorKind::ChanceBaseline => "chance-baseline",
            PredictorKind::TruncatedSimulator => "truncated-simulator",
            PredictorKind::CoarseSimulator => "coarse-simulator",
            PredictorKind::AdditiveShortcut => "additive-shortcut",
            PredictorKind::ExactSimulator => "exact-simulator",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// How the budget `r` is chosen for a given horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetPolicy {
    Fixed(u64),
    Scaled(BudgetScale),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetScale {
    /// `W · ⌈log2(t + 1)⌉`
    LogHorizon,
    /// `W · t`
    LinearHorizon,
}

impl BudgetPolicy {
    pub fn budget(&self, width: usize, t: u64) -> u64 {
        match *self {
            BudgetPolicy::Fixed(r) => r,
            BudgetPolicy::Scaled(BudgetScale::LogHorizon) => width as u64 * u64::from(64 - t.leading_zeros()),
            BudgetPolicy::Scaled(BudgetScale::LinearHorizon) => width as u64 * t,
        }
    }
}

impl fmt::Display for BudgetPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetPolicy::Fixed(r) => write!(f, "{r}"),
            BudgetPolicy::Scaled(BudgetScale::LogHorizon) => f.write_str("log-horizon"),
            BudgetPolicy::Scaled(BudgetScale::LinearHorizon) => f.write_str("linear-horizon"),
        }
    }
}

fn default_factor() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSpec {
    pub kind: PredictorKind,
    pub budget: BudgetPolicy,
    /// Block size of the coarse simulator.
    #[serde(default = "default_factor")]
    pub factor: usize,
}

impl PredictorSpec {
    pub fn new(kind: PredictorKind, budget: BudgetPolicy) -> Self {
        Self { kind, budget, factor: default_factor() }
    }

    pub fn fixed(kind: PredictorKind, r: u64) -> Self {
        Self::new(kind, BudgetPolicy::Fixed(r))
    }

    /// e.g. `truncated-simulator@256`.
    pub fn label(&self) -> String {
        format!("{}@{}", self.kind, self.budget)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub state: EcaRow,
    pub spent: u64,
    pub budget: u64,
}

/// Predicts the row after `t` steps from `s0` within the spec's budget.
pub fn predict(
    spec: &PredictorSpec,
    system: &CaSystem,
    s0: &EcaRow,
    t: u64,
    seed: u64,
) -> Result<Prediction, PredictError> {
    if s0.width() != system.width {
        return Err(PredictError::InvalidArgument(format!(
            "row width {} differs from system width {}",
            s0.width(),
            system.width
        )));
    }
    let budget = spec.budget.budget(system.width, t);
    let mut meter = ResourceMeter::new(budget);
    let w = system.width as u64;
    let state = match spec.kind {
        PredictorKind::Frozen => s0.clone(),
        PredictorKind::ChanceBaseline => {
            let mut rng = rng_for(seed, &[0xc4a2ce, t]);
            EcaRow::random(system.width, &mut rng as &mut dyn RngCore)?
        }
        PredictorKind::TruncatedSimulator => {
            let mut row = s0.clone();
            let mut steps = 0;
            while steps < t && meter.try_charge(w) {
                row = eca_step(&row, &system.rule);
                steps += 1;
            }
            row
        }
        PredictorKind::CoarseSimulator => coarse(system, s0, t, spec.factor, &mut meter)?,
        PredictorKind::AdditiveShortcut => shortcut(system, s0, t, &mut meter)?,
        PredictorKind::ExactSimulator => {
            let needed = t.saturating_mul(w);
            if !meter.try_charge(needed) {
                return Err(PredictError::OverBudget { predictor: spec.kind.id().into(), needed, budget });
            }
            system.actual(s0, t)
        }
    };
    debug_assert!(meter.spent() <= budget);
    Ok(Prediction { state, spent: meter.spent(), budget })
}

/// Block-majority down-sampling; ties go to the block's first cell.
fn downsample(row: &EcaRow, factor: usize) -> Result<EcaRow, AutomataError> {
    let bits: Vec<bool> = (0..row.width() / factor)
        .map(|b| {
            let ones = (0..factor).filter(|&j| row.get(b * factor + j)).count();
            match (2 * ones).cmp(&factor) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => row.get(b * factor),
            }
        })
        .collect();
    EcaRow::from_bits(&bits)
}

fn upsample(row: &EcaRow, factor: usize) -> Result<EcaRow, AutomataError> {
    let bits: Vec<bool> = (0..row.width() * factor).map(|i| row.get(i / factor)).collect();
    EcaRow::from_bits(&bits)
}

fn coarse(
    system: &CaSystem,
    s0: &EcaRow,
    t: u64,
    factor: usize,
    meter: &mut ResourceMeter,
) -> Result<EcaRow, PredictError> {
    let inapplicable = |reason: String| PredictError::Inapplicable { predictor: "coarse-simulator".into(), reason };
    if factor < 2 || !system.width.is_multiple_of(factor) || system.width / factor < EcaRow::MIN_WIDTH {
        return Err(inapplicable(format!("factor {factor} must divide width {} into at least 3 blocks", system.width)));
    }
    let mut row = downsample(s0, factor)?;
    let cw = row.width() as u64;
    let mut steps = 0;
    while steps < t && meter.try_charge(cw) {
        row = eca_step(&row, &system.rule);
        steps += 1;
    }
    Ok(upsample(&row, factor)?)
}

/// Linear rules satisfy `L^(2^k) = a·S^(2^k) + b·I + c·S^(-2^k)` over GF(2), so
/// `L^t` is one such sparse operator per set bit of `t`.
fn shortcut(system: &CaSystem, s0: &EcaRow, t: u64, meter: &mut ResourceMeter) -> Result<EcaRow, PredictError> {
    let (a, b, c) = system.rule.linear_coefficients().ok_or_else(|| PredictError::Inapplicable {
        predictor: "additive-shortcut".into(),
        reason: format!("rule {} is not additive", system.rule.index()),
    })?;
    let w = system.width;
    let needed = u64::from(t.count_ones()) * w as u64;
    if !meter.try_charge(needed) {
        return Err(PredictError::OverBudget {
            predictor: "additive-shortcut".into(),
            needed,
            budget: meter.remaining() + meter.spent(),
        });
    }
    let mut row = s0.clone();
    for k in 0..64 {
        if t >> k & 1 == 0 {
            continue;
        }
        // 2^k mod w without overflow
        let shift = (0..k).fold(1 % w, |acc, _| (acc * 2) % w);
        let mut next = EcaRow::zeros(w)?;
        if a {
            next = next.xor(&row.rotated(shift));
        }
        if b {
            next = next.xor(&row);
        }
        if c {
            next = next.xor(&row.rotated((w - shift) % w));
        }
        row = next;
    }
    Ok(row)
}

/// `η`, or a marker when the budget is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta {
    Defined(f64),
    Undefined,
}

impl Eta {
    pub fn of(numerator: f64, r: u64) -> Self {
        if r == 0 {
            Eta::Undefined
        } else {
            Eta::Defined(numerator / r as f64)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Eta::Defined(v) => Some(v),
            Eta::Undefined => None,
        }
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Defined(v) => write!(f, "{v}"),
            Eta::Undefined => f.write_str("undef"),
        }
    }
}

impl Serialize for Eta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Eta::Defined(v) => s.serialize_f64(*v),
            Eta::Undefined => s.serialize_str("undef"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub predictor: String,
    pub s0_hash: String,
    pub t: u64,
    pub r: u64,
    pub resources_spent: u64,
    pub distance: f64,
    pub accuracy: f64,
    pub eta_distance: Eta,
    pub eta_accuracy: Eta,
}

/// Scores a prediction against the exact state.
pub fn prediction_efficiency(
    predictor: &str,
    s0: &EcaRow,
    t: u64,
    prediction: &Prediction,
    actual: &EcaRow,
) -> PredictionReport {
    let distance = row_distance(&prediction.state, actual);
    let accuracy = 1.0 - distance;
    PredictionReport {
        predictor: predictor.to_string(),
        s0_hash: short_hash(&s0.canonical_bytes()),
        t,
        r: prediction.budget,
        resources_spent: prediction.spent,
        distance,
        accuracy,
        eta_distance: Eta::of(distance, prediction.budget),
        eta_accuracy: Eta::of(accuracy, prediction.budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row(width: usize, seed: u64) -> EcaRow {
        EcaRow::random(width, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn distance_examples() {
        let x = [0b1010_0101u8, 7];
        assert_eq!(state_distance(&x, &x), 0.0);
        assert_eq!(state_distance(&[0x00], &[0xff]), 1.0);
        let r = |s| EcaRow::parse(s).unwrap();
        assert_eq!(row_distance(&r("0101"), &r("0111")), 0.25);
        assert_eq!(row_distance(&r("0000"), &r("1111")), 1.0);
        // padding always counts
        assert_eq!(state_distance(&[1], &[1, 0]), 0.5);
        assert_eq!(state_distance(&[], &[]), 0.0);
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in proptest::collection::vec(any::<u8>(), 6),
                                b in proptest::collection::vec(any::<u8>(), 6),
                                c in proptest::collection::vec(any::<u8>(), 6)) {
            let d = state_distance;
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &b) == 0.0, a == b);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
            prop_assert!((0.0..=1.0).contains(&d(&a, &b)));
        }

        #[test]
        fn every_predictor_stays_within_budget(seed in any::<u64>(), t in 0u64..300, r in 0u64..2000) {
            let sys = CaSystem::new(90, 64).unwrap();
            let s0 = row(64, seed);
            for kind in [PredictorKind::Frozen, PredictorKind::ChanceBaseline, PredictorKind::TruncatedSimulator,
                         PredictorKind::CoarseSimulator, PredictorKind::AdditiveShortcut, PredictorKind::ExactSimulator] {
                if let Ok(p) = predict(&PredictorSpec::fixed(kind, r), &sys, &s0, t, seed) {
                    prop_assert!(p.spent <= r, "{} spent {} of {}", kind, p.spent, r);
                }
            }
        }
    }

    #[test]
    fn frozen_costs_nothing() {
        let sys = CaSystem::new(110, 64).unwrap();
        let s0 = row(64, 1);
        let p = predict(&PredictorSpec::fixed(PredictorKind::Frozen, 0), &sys, &s0, 99, 0).unwrap();
        assert_eq!(p.state, s0);
        assert_eq!(p.spent, 0);
        let rep = prediction_efficiency("frozen", &s0, 99, &p, &sys.actual(&s0, 99));
        assert_eq!(rep.eta_distance, Eta::Undefined);
        assert_eq!(rep.eta_accuracy.to_string(), "undef");
    }

    #[test]
    fn exact_simulator_is_ground_truth() {
        let sys = CaSystem::new(110, 64).unwrap();
        let s0 = row(64, 2);
        let spec = PredictorSpec::fixed(PredictorKind::ExactSimulator, 50 * 64);
        let p = predict(&spec, &sys, &s0, 50, 0).unwrap();
        assert_eq!(row_distance(&p.state, &sys.actual(&s0, 50)), 0.0);
        assert!(matches!(predict(&spec, &sys, &s0, 51, 0), Err(PredictError::OverBudget { .. })));
    }

    #[test]
    fn shortcut_matches_full_simulation() {
        for rule in [0u32, 60, 90, 102, 150, 170, 204, 240] {
            let sys = CaSystem::new(rule, 64).unwrap();
            let s0 = row(64, u64::from(rule));
            for t in [0u64, 1, 2, 3, 63, 64, 100, 1023, 1024] {
                let p = predict(
                    &PredictorSpec::new(PredictorKind::AdditiveShortcut, BudgetPolicy::Scaled(BudgetScale::LogHorizon)),
                    &sys,
                    &s0,
                    t,
                    0,
                )
                .unwrap();
                assert_eq!(p.state, sys.actual(&s0, t), "rule {rule} t {t}");
                assert!(p.spent <= 64 * 11);
            }
        }
        // widths that are not powers of two exercise the shift reduction
        let sys = CaSystem::new(90, 37).unwrap();
        let s0 = row(37, 5);
        let p = predict(&PredictorSpec::fixed(PredictorKind::AdditiveShortcut, 10_000), &sys, &s0, 777, 0).unwrap();
        assert_eq!(p.state, sys.actual(&s0, 777));
    }

    #[test]
    fn shortcut_rejects_nonlinear_rules() {
        let sys = CaSystem::new(110, 64).unwrap();
        let err = predict(&PredictorSpec::fixed(PredictorKind::AdditiveShortcut, 1 << 20), &sys, &row(64, 1), 10, 0);
        assert!(matches!(err, Err(PredictError::Inapplicable { .. })));
    }

    #[test]
    fn truncated_freezes_after_budget() {
        let sys = CaSystem::new(30, 64).unwrap();
        let s0 = row(64, 3);
        let p = predict(&PredictorSpec::fixed(PredictorKind::TruncatedSimulator, 256), &sys, &s0, 1000, 0).unwrap();
        assert_eq!(p.spent, 256);
        assert_eq!(p.state, sys.actual(&s0, 4));
    }

    #[test]
    fn coarse_round_trip_and_budget() {
        let s0 = EcaRow::parse("1111000011010010").unwrap();
        assert_eq!(downsample(&s0, 4).unwrap().to_string(), "1010");
        // 2-2 ties take the first cell
        assert_eq!(downsample(&EcaRow::parse("100101101001").unwrap(), 4).unwrap().to_string(), "101");
        assert_eq!(upsample(&EcaRow::parse("101").unwrap(), 2).unwrap().to_string(), "110011");
        let sys = CaSystem::new(110, 64).unwrap();
        let p = predict(&PredictorSpec::fixed(PredictorKind::CoarseSimulator, 256), &sys, &row(64, 4), 100, 0).unwrap();
        assert_eq!(p.spent, 256);
        let odd = CaSystem::new(110, 30).unwrap();
        assert!(predict(&PredictorSpec::fixed(PredictorKind::CoarseSimulator, 256), &odd, &row(30, 4), 5, 0).is_err());
    }

    #[test]
    fn chance_baseline_is_seeded() {
        let sys = CaSystem::new(110, 64).unwrap();
        let s0 = row(64, 5);
        let spec = PredictorSpec::fixed(PredictorKind::ChanceBaseline, 0);
        assert_eq!(predict(&spec, &sys, &s0, 10, 1).unwrap(), predict(&spec, &sys, &s0, 10, 1).unwrap());
        assert_ne!(predict(&spec, &sys, &s0, 10, 1).unwrap(), predict(&spec, &sys, &s0, 10, 2).unwrap());
    }

    #[test]
    fn efficiency_arithmetic() {
        let s0 = EcaRow::parse("0000000000").unwrap();
        let perfect = Prediction { state: s0.clone(), spent: 100, budget: 100 };
        let rep = prediction_efficiency("x", &s0, 1, &perfect, &s0);
        assert_eq!(rep.eta_distance, Eta::Defined(0.0));
        assert_eq!(rep.eta_accuracy, Eta::Defined(0.01));
        let half = Prediction { state: EcaRow::parse("1111100000").unwrap(), spent: 10, budget: 10 };
        let rep = prediction_efficiency("x", &s0, 1, &half, &s0);
        assert_eq!(rep.distance, 0.5);
        assert_eq!(rep.eta_distance, Eta::Defined(0.05));
        assert_eq!(rep.eta_accuracy, Eta::Defined(0.05));
    }

    #[test]
    fn exact_eta_accuracy_decays_as_one_over_t() {
        let sys = CaSystem::new(110, 64).unwrap();
        let s0 = row(64, 6);
        let spec = PredictorSpec::new(PredictorKind::ExactSimulator, BudgetPolicy::Scaled(BudgetScale::LinearHorizon));
        for t in [1u64, 10, 100] {
            let p = predict(&spec, &sys, &s0, t, 0).unwrap();
            let rep = prediction_efficiency("exact", &s0, t, &p, &sys.actual(&s0, t));
            assert_eq!(rep.eta_accuracy, Eta::Defined(1.0 / (64 * t) as f64));
        }
    }
}
