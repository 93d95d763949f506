//! TOML experiment configurations.
//!
//! Every file names its experiment with a top-level `experiment = "<id>"` key;
//! the remaining keys depend on the experiment and all have defaults except
//! where noted. Unknown keys are rejected. Errors carry the line and the field
//! they refer to whenever one can be identified.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{CellAction, CounterAgent, ReactiveAgent, TableAgent};
use crate::automata::EcaRule;
use crate::info::CoarseGrainer;
use crate::predict::{BudgetPolicy, BudgetScale, PredictorKind, PredictorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    EcaRun,
    EmbedCheck,
    PredictSweep,
    ComplexitySweep,
    HaltingSweep,
    AutonomyReport,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::EcaRun,
        ExperimentId::EmbedCheck,
        ExperimentId::PredictSweep,
        ExperimentId::ComplexitySweep,
        ExperimentId::HaltingSweep,
        ExperimentId::AutonomyReport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::EcaRun => "eca-run",
            ExperimentId::EmbedCheck => "embed-check",
            ExperimentId::PredictSweep => "predict-sweep",
            ExperimentId::ComplexitySweep => "complexity-sweep",
            ExperimentId::HaltingSweep => "halting-sweep",
            ExperimentId::AutonomyReport => "autonomy-report",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| format!("unknown experiment id `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { path: None, line: None, column: None, field: None, message: message.into() }
    }

    fn at(mut self, text: &str, field: &str) -> Self {
        self.line = locate_key(text, field);
        self.field = Some(field.to_string());
        self
    }

    fn from_toml(text: &str, e: &toml::de::Error) -> Self {
        let mut err = ConfigError::new(e.message().trim());
        if let Some(span) = e.span() {
            let (line, column) = line_col(text, span.start);
            err.line = Some(line);
            err.column = Some(column);
            err.field = text.lines().nth(line - 1).and_then(key_of_line);
        }
        err
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.path {
            write!(f, "{}", p.display())?;
            if let Some(l) = self.line {
                write!(f, ":{l}")?;
                if let Some(c) = self.column {
                    write!(f, ":{c}")?;
                }
            }
            f.write_str(": ")?;
        } else if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

fn key_of_line(line: &str) -> Option<String> {
    let (key, _) = line.split_once('=')?;
    let key = key.trim();
    (!key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c))).then(|| key.to_string())
}

/// 1-based line of the first `key = …` assignment.
fn locate_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| key_of_line(l).as_deref() == Some(key)).map(|i| i + 1)
}

/// Agent families selectable from a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AgentChoice {
    /// Single-state agent that never acts.
    None,
    Counter {
        #[serde(default)]
        probe: usize,
        #[serde(default = "yes")]
        toggles: bool,
    },
    Identity {
        #[serde(default = "two")]
        states: u32,
    },
    Alternator,
    Clamp {
        #[serde(default = "two")]
        states: u32,
        #[serde(default)]
        target: u32,
    },
    Copier {
        #[serde(default)]
        probe: usize,
        #[serde(default)]
        out_cell: u64,
    },
}

fn yes() -> bool {
    true
}

fn two() -> u32 {
    2
}

impl AgentChoice {
    pub fn id(&self) -> String {
        match *self {
            AgentChoice::None => "none".into(),
            AgentChoice::Counter { probe, toggles } => {
                format!("counter-p{probe}{}", if toggles { "-toggles" } else { "" })
            }
            AgentChoice::Identity { states } => format!("identity-{states}"),
            AgentChoice::Alternator => "alternator".into(),
            AgentChoice::Clamp { states, target } => format!("clamp-{states}-to-{target}"),
            AgentChoice::Copier { probe, out_cell } => format!("copier-{probe}-to-{out_cell}"),
        }
    }

    fn validate(&self, width: usize) -> Result<(), String> {
        let in_row = |cell: usize, what: &str| {
            if cell < width {
                Ok(())
            } else {
                Err(format!("agent {}: {what} {cell} is outside a row of width {width}", self.id()))
            }
        };
        match *self {
            AgentChoice::Counter { probe, .. } => in_row(probe, "probe"),
            AgentChoice::Copier { probe, out_cell } => {
                in_row(probe, "probe")?;
                in_row(out_cell as usize, "output cell")
            }
            AgentChoice::Identity { states } | AgentChoice::Clamp { states, .. } if states == 0 => {
                Err(format!("agent {} needs at least one state", self.id()))
            }
            AgentChoice::Clamp { states, target } if target >= states => {
                Err(format!("agent {}: target must be below the state count", self.id()))
            }
            _ => Ok(()),
        }
    }
}

/// A concrete agent built from an [`AgentChoice`].
pub enum BuiltAgent {
    Reactive(ReactiveAgent),
    Counter(CounterAgent),
    Table(TableAgent),
}

impl AgentChoice {
    pub fn build(&self) -> BuiltAgent {
        match *self {
            AgentChoice::None => BuiltAgent::Reactive(ReactiveAgent::new(0, CellAction::Noop)),
            AgentChoice::Counter { probe, toggles } => BuiltAgent::Counter(CounterAgent::new(probe, toggles)),
            AgentChoice::Identity { states } => BuiltAgent::Table(TableAgent::identity(states)),
            AgentChoice::Alternator => BuiltAgent::Table(TableAgent::alternator()),
            AgentChoice::Clamp { states, target } => {
                BuiltAgent::Table(TableAgent::clamp(states, target).expect("validated clamp parameters"))
            }
            AgentChoice::Copier { probe, out_cell } => BuiltAgent::Table(TableAgent::copier(probe, out_cell)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialRow {
    /// Uniform random cells drawn from the seed.
    #[default]
    Random,
    /// One live cell in the middle.
    Single,
}

fn rules(list: &[u32]) -> Vec<EcaRule> {
    list.iter().map(|&r| EcaRule::new(r).expect("default rule is valid")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EcaRunConfig {
    pub rules: Vec<EcaRule>,
    pub width: usize,
    pub steps: u64,
    /// Initial rows per rule.
    pub seeds: u64,
    pub init: InitialRow,
    pub agent: AgentChoice,
    /// Also write the binary trace log.
    pub binary_log: bool,
}

impl Default for EcaRunConfig {
    fn default() -> Self {
        Self {
            rules: rules(&[30, 90, 110]),
            width: 64,
            steps: 256,
            seeds: 1,
            init: InitialRow::Random,
            agent: AgentChoice::None,
            binary_log: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedCheckConfig {
    /// Directory of machine files, relative to the config file. The bundled
    /// corpus is used when absent.
    pub corpus: Option<PathBuf>,
    /// Also check every 2-state 2-symbol machine on the blank tape.
    pub enumeration: bool,
    pub budget: u64,
    #[serde(skip)]
    pub corpus_dir: Option<PathBuf>,
}

impl Default for EmbedCheckConfig {
    fn default() -> Self {
        Self { corpus: None, enumeration: true, budget: 10_000, corpus_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictSweepConfig {
    pub rules: Vec<EcaRule>,
    pub width: usize,
    pub horizons: Vec<u64>,
    pub seeds: u64,
    pub predictors: Vec<PredictorSpec>,
}

impl Default for PredictSweepConfig {
    fn default() -> Self {
        let r = 256;
        Self {
            rules: rules(&[90, 110]),
            width: 64,
            horizons: (0..=10).map(|k| 1 << k).collect(),
            seeds: 30,
            predictors: vec![
                PredictorSpec::fixed(PredictorKind::Frozen, r),
                PredictorSpec::fixed(PredictorKind::ChanceBaseline, r),
                PredictorSpec::fixed(PredictorKind::TruncatedSimulator, r),
                PredictorSpec::fixed(PredictorKind::CoarseSimulator, r),
                PredictorSpec::new(PredictorKind::AdditiveShortcut, BudgetPolicy::Scaled(BudgetScale::LogHorizon)),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexitySweepConfig {
    pub rules: Vec<EcaRule>,
    pub width: usize,
    pub steps: u64,
    /// Distance between measured prefix lengths.
    pub stride: u64,
    pub seeds: u64,
    /// Rule whose curve normalizes the irreducibility score.
    pub reference_rule: EcaRule,
    /// Add a fixed-point trace (identity agent, rule 204) as a control.
    pub constant_trace: bool,
}

impl Default for ComplexitySweepConfig {
    fn default() -> Self {
        Self {
            rules: rules(&[0, 30, 90, 110, 255]),
            width: 64,
            steps: 2000,
            stride: 50,
            seeds: 1,
            reference_rule: EcaRule::new(0).expect("rule 0"),
            constant_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HaltingSweepConfig {
    pub budget: u64,
}

impl Default for HaltingSweepConfig {
    fn default() -> Self {
        Self { budget: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutonomyReportConfig {
    pub rule: EcaRule,
    pub width: usize,
    pub agents: Vec<AgentChoice>,
    pub probe_budget: u64,
    /// Length of the trace used for the information measures.
    pub steps: u64,
    pub grain: CoarseGrainer,
    /// Cell receiving a fair coin after every environment step.
    pub noise_cell: Option<usize>,
}

impl Default for AutonomyReportConfig {
    fn default() -> Self {
        Self {
            rule: EcaRule::new(110).expect("rule 110"),
            width: 16,
            agents: vec![
                AgentChoice::None,
                AgentChoice::Counter { probe: 0, toggles: true },
                AgentChoice::Alternator,
                AgentChoice::Clamp { states: 4, target: 0 },
                AgentChoice::Copier { probe: 1, out_cell: 0 },
            ],
            probe_budget: 4096,
            steps: 10_000,
            grain: CoarseGrainer::default(),
            noise_cell: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    EcaRun(EcaRunConfig),
    EmbedCheck(EmbedCheckConfig),
    PredictSweep(PredictSweepConfig),
    ComplexitySweep(ComplexitySweepConfig),
    HaltingSweep(HaltingSweepConfig),
    AutonomyReport(AutonomyReportConfig),
}

#[derive(Deserialize)]
struct Header {
    experiment: ExperimentId,
}

/// Parses `text` as the body of an experiment file; `experiment` is removed
/// before the body is read so the body structs can reject unknown keys.
fn body<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ConfigError> {
    // blank out the header line so spans still point into the original text
    let masked: String = text
        .split_inclusive('\n')
        .map(|l| {
            if key_of_line(l).as_deref() == Some("experiment") {
                l.chars()
                    .map(|c| if c == '\n' || c == '\r' { c.to_string() } else { " ".repeat(c.len_utf8()) })
                    .collect()
            } else {
                l.to_string()
            }
        })
        .collect();
    toml::from_str(&masked).map_err(|e| ConfigError::from_toml(text, &e))
}

fn check_range(text: &str, field: &str, value: u64, lo: u64, hi: u64) -> Result<(), ConfigError> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(ConfigError::new(format!("{value} is outside {lo}..={hi}")).at(text, field))
    }
}

fn check_width(text: &str, width: usize) -> Result<(), ConfigError> {
    check_range(text, "width", width as u64, 3, 1 << 16)
}

fn check_non_empty<T>(text: &str, field: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(ConfigError::new("must not be empty").at(text, field))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn id(&self) -> ExperimentId {
        match self {
            ExperimentConfig::EcaRun(_) => ExperimentId::EcaRun,
            ExperimentConfig::EmbedCheck(_) => ExperimentId::EmbedCheck,
            ExperimentConfig::PredictSweep(_) => ExperimentId::PredictSweep,
            ExperimentConfig::ComplexitySweep(_) => ExperimentId::ComplexitySweep,
            ExperimentConfig::HaltingSweep(_) => ExperimentId::HaltingSweep,
            ExperimentConfig::AutonomyReport(_) => ExperimentId::AutonomyReport,
        }
    }

    /// Defaults for an experiment, as if the file held only the header.
    pub fn defaults(id: ExperimentId) -> Self {
        match id {
            ExperimentId::EcaRun => ExperimentConfig::EcaRun(EcaRunConfig::default()),
            ExperimentId::EmbedCheck => ExperimentConfig::EmbedCheck(EmbedCheckConfig::default()),
            ExperimentId::PredictSweep => ExperimentConfig::PredictSweep(PredictSweepConfig::default()),
            ExperimentId::ComplexitySweep => ExperimentConfig::ComplexitySweep(ComplexitySweepConfig::default()),
            ExperimentId::HaltingSweep => ExperimentConfig::HaltingSweep(HaltingSweepConfig::default()),
            ExperimentId::AutonomyReport => ExperimentConfig::AutonomyReport(AutonomyReportConfig::default()),
        }
    }

    /// Parses and validates a config. Relative paths resolve against
    /// `base_dir`.
    pub fn parse_str(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let header: Header =
            toml::from_str::<toml::Table>(text).map_err(|e| ConfigError::from_toml(text, &e)).and_then(|table| {
                if !table.contains_key("experiment") {
                    return Err(ConfigError {
                        field: Some("experiment".into()),
                        ..ConfigError::new("missing experiment id")
                    });
                }
                toml::from_str(text).map_err(|e| ConfigError::from_toml(text, &e))
            })?;
        let config = match header.experiment {
            ExperimentId::EcaRun => {
                let c: EcaRunConfig = body(text)?;
                check_non_empty(text, "rules", &c.rules)?;
                check_width(text, c.width)?;
                check_range(text, "steps", c.steps, 1, 1_000_000)?;
                check_range(text, "seeds", c.seeds, 1, 10_000)?;
                c.agent.validate(c.width).map_err(|m| ConfigError::new(m).at(text, "agent"))?;
                ExperimentConfig::EcaRun(c)
            }
            ExperimentId::EmbedCheck => {
                let mut c: EmbedCheckConfig = body(text)?;
                check_range(text, "budget", c.budget, 1, 100_000_000)?;
                if let Some(rel) = &c.corpus {
                    let dir = base_dir.join(rel);
                    if !dir.is_dir() {
                        return Err(ConfigError::new(format!("corpus directory not found: {}", dir.display()))
                            .at(text, "corpus"));
                    }
                    c.corpus_dir = Some(dir);
                }
                ExperimentConfig::EmbedCheck(c)
            }
            ExperimentId::PredictSweep => {
                let c: PredictSweepConfig = body(text)?;
                check_non_empty(text, "rules", &c.rules)?;
                check_width(text, c.width)?;
                check_non_empty(text, "horizons", &c.horizons)?;
                check_non_empty(text, "predictors", &c.predictors)?;
                if c.horizons.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::new("must be strictly ascending").at(text, "horizons"));
                }
                check_range(text, "horizons", *c.horizons.last().expect("non-empty"), 1, 1 << 20)?;
                check_range(text, "seeds", c.seeds, 1, 10_000)?;
                ExperimentConfig::PredictSweep(c)
            }
            ExperimentId::ComplexitySweep => {
                let c: ComplexitySweepConfig = body(text)?;
                check_non_empty(text, "rules", &c.rules)?;
                check_width(text, c.width)?;
                check_range(text, "steps", c.steps, 2, 100_000)?;
                check_range(text, "stride", c.stride, 1, c.steps / 2)?;
                check_range(text, "seeds", c.seeds, 1, 1000)?;
                if !c.rules.contains(&c.reference_rule) {
                    return Err(ConfigError::new(format!("rule {} is not among `rules`", c.reference_rule.index()))
                        .at(text, "reference_rule"));
                }
                ExperimentConfig::ComplexitySweep(c)
            }
            ExperimentId::HaltingSweep => {
                let c: HaltingSweepConfig = body(text)?;
                check_range(text, "budget", c.budget, 1, 100_000_000)?;
                ExperimentConfig::HaltingSweep(c)
            }
            ExperimentId::AutonomyReport => {
                let c: AutonomyReportConfig = body(text)?;
                check_width(text, c.width)?;
                check_non_empty(text, "agents", &c.agents)?;
                check_range(text, "probe_budget", c.probe_budget, 1, 100_000_000)?;
                check_range(text, "steps", c.steps, 1, 10_000_000)?;
                c.grain.validate().map_err(|e| ConfigError::new(e.to_string()).at(text, "grain"))?;
                if let Some(cell) = c.noise_cell {
                    check_range(text, "noise_cell", cell as u64, 0, c.width as u64 - 1)?;
                }
                for a in &c.agents {
                    a.validate(c.width).map_err(|m| ConfigError::new(m).at(text, "agents"))?;
                }
                ExperimentConfig::AutonomyReport(c)
            }
        };
        Ok(config)
    }

    /// Applies a command-line budget override. Only experiments with a
    /// budget accept one.
    pub fn with_budget(mut self, budget: u64) -> Result<Self, ConfigError> {
        if budget == 0 {
            return Err(ConfigError { field: Some("budget".into()), ..ConfigError::new("budget must be at least 1") });
        }
        match &mut self {
            ExperimentConfig::EmbedCheck(c) => c.budget = budget,
            ExperimentConfig::HaltingSweep(c) => c.budget = budget,
            ExperimentConfig::AutonomyReport(c) => c.probe_budget = budget,
            other => {
                return Err(ConfigError::new(format!("--budget does not apply to {}", other.id())));
            }
        }
        Ok(self)
    }
}

/// Reads and validates the config file at `path`.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: Some(path.to_path_buf()),
        ..ConfigError::new(format!("cannot read config: {e}"))
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    ExperimentConfig::parse_str(&text, base).map_err(|e| ConfigError { path: Some(path.to_path_buf()), ..e })
}
