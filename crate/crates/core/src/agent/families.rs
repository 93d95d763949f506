//! Built-in agent and environment families.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{Agent, ComplexityClass, Environment, ModelError, StateSpace};
use crate::automata::{eca_step, EcaRow, EcaRule};
use crate::canonical::Canonical;

/// Action on a CA row. Cell indices wrap modulo the width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "op")]
pub enum CellAction {
    Noop,
    Toggle { cell: u64 },
    Set { cell: u64, value: bool },
}

impl CellAction {
    pub fn apply(&self, row: &mut EcaRow) {
        let w = row.width() as u64;
        match *self {
            CellAction::Noop => {}
            CellAction::Toggle { cell } => row.flip((cell % w) as usize),
            CellAction::Set { cell, value } => row.set((cell % w) as usize, value),
        }
    }
}

impl fmt::Display for CellAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellAction::Noop => f.write_str("noop"),
            CellAction::Toggle { cell } => write!(f, "toggle:{cell}"),
            CellAction::Set { cell, value } => write!(f, "set:{cell}={}", u8::from(*value)),
        }
    }
}

impl Canonical for CellAction {
    fn encode(&self, out: &mut Vec<u8>) {
        match *self {
            CellAction::Noop => out.push(0),
            CellAction::Toggle { cell } => {
                out.push(1);
                cell.encode(out);
            }
            CellAction::Set { cell, value } => {
                out.push(2);
                cell.encode(out);
                value.encode(out);
            }
        }
    }
}

/// Periodic CA environment: apply the agent's action, then one rule step.
#[derive(Debug, Clone, PartialEq)]
pub struct EcaEnvironment {
    rule: EcaRule,
    width: usize,
}

impl EcaEnvironment {
    pub fn new(rule_index: u32, width: usize) -> Result<Self, ModelError> {
        EcaRow::zeros(width)?;
        Ok(Self { rule: EcaRule::new(rule_index)?, width })
    }

    pub fn rule(&self) -> EcaRule {
        self.rule
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

impl Environment for EcaEnvironment {
    type State = EcaRow;
    type Action = CellAction;

    fn transition(&self, mut state: EcaRow, action: &CellAction) -> Result<EcaRow, ModelError> {
        if state.width() != self.width {
            return Err(ModelError::InvalidArgument(format!(
                "row width {} does not match environment width {}",
                state.width(),
                self.width
            )));
        }
        action.apply(&mut state);
        Ok(eca_step(&state, &self.rule))
    }

    fn complexity_class(&self) -> ComplexityClass {
        ComplexityClass::EcaRule(self.rule.index())
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::binary(self.width)
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> EcaRow {
        EcaRow::random(self.width, rng).expect("width validated at construction")
    }
}

fn read_probe(env: &EcaRow, probe: usize) -> bool {
    env.get(probe % env.width())
}

/// The only state of a single-state agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Singleton;

impl fmt::Display for Singleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("*")
    }
}

impl Canonical for Singleton {
    fn encode(&self, _out: &mut Vec<u8>) {}
}

/// Single-state agent: reads one cell and always emits the same action.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactiveAgent {
    probe: usize,
    action: CellAction,
}

impl ReactiveAgent {
    pub fn new(probe: usize, action: CellAction) -> Self {
        Self { probe, action }
    }
}

impl Agent<EcaEnvironment> for ReactiveAgent {
    type State = Singleton;
    type Input = bool;

    fn perceive(&self, env: &EcaRow) -> bool {
        read_probe(env, self.probe)
    }

    fn generate(&self, _state: &Singleton, _input: &bool) -> Result<Singleton, ModelError> {
        Ok(Singleton)
    }

    fn act(&self, _state: &Singleton) -> Result<CellAction, ModelError> {
        Ok(self.action)
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(1)
    }

    fn declares_generative(&self) -> bool {
        false
    }

    fn sample_state(&self, _rng: &mut dyn RngCore) -> Singleton {
        Singleton
    }
}

/// `s_A` counts steps; input is one probed cell, which the counter ignores.
/// When `toggles` is set the agent flips cell `s_A mod width` each step.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterAgent {
    probe: usize,
    toggles: bool,
    sample_range: u64,
}

impl CounterAgent {
    pub fn new(probe: usize, toggles: bool) -> Self {
        Self { probe, toggles, sample_range: 1 << 16 }
    }
}

impl Agent<EcaEnvironment> for CounterAgent {
    type State = u64;
    type Input = bool;

    fn perceive(&self, env: &EcaRow) -> bool {
        read_probe(env, self.probe)
    }

    fn generate(&self, state: &u64, _input: &bool) -> Result<u64, ModelError> {
        state
            .checked_add(1)
            .ok_or_else(|| ModelError::SpecificationGap { state: state.to_string(), detail: "counter overflow".into() })
    }

    fn act(&self, state: &u64) -> Result<CellAction, ModelError> {
        Ok(if self.toggles { CellAction::Toggle { cell: *state } } else { CellAction::Noop })
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Countable
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> u64 {
        rng.random_range(0..self.sample_range)
    }
}

/// Finite agent given by explicit tables over a one-bit input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableAgent {
    probe: usize,
    /// `next[s] = [T_A(s, 0), T_A(s, 1)]`
    next: Vec<[u32; 2]>,
    actions: Vec<CellAction>,
    #[serde(default)]
    goal_states: Vec<u32>,
}

impl TableAgent {
    pub fn new(probe: usize, next: Vec<[u32; 2]>, actions: Vec<CellAction>) -> Result<Self, ModelError> {
        let n = next.len();
        if n == 0 {
            return Err(ModelError::InvalidArgument("table agent needs at least one state".into()));
        }
        if actions.len() != n {
            return Err(ModelError::InvalidArgument(format!("{} actions for {} states", actions.len(), n)));
        }
        if let Some(bad) = next.iter().flatten().find(|&&q| q as usize >= n) {
            return Err(ModelError::InvalidArgument(format!("transition target {bad} outside 0..{n}")));
        }
        Ok(Self { probe, next, actions, goal_states: Vec::new() })
    }

    pub fn with_goal(mut self, states: Vec<u32>) -> Self {
        self.goal_states = states;
        self
    }

    /// `T_A(s, i) = s` with no-op actions.
    pub fn identity(n: u32) -> Self {
        Self::new(0, (0..n).map(|s| [s, s]).collect(), vec![CellAction::Noop; n as usize]).expect("valid table")
    }

    /// Two-cycle 0 → 1 → 0 ignoring input.
    pub fn alternator() -> Self {
        Self::new(0, vec![[1, 1], [0, 0]], vec![CellAction::Noop; 2]).expect("valid table")
    }

    /// Every state moves to `target` regardless of input.
    pub fn clamp(n: u32, target: u32) -> Result<Self, ModelError> {
        Self::new(0, vec![[target, target]; n as usize], vec![CellAction::Noop; n as usize])
    }

    /// Stores the probed bit and writes it into `out_cell` next step.
    pub fn copier(probe: usize, out_cell: u64) -> Self {
        Self::new(
            probe,
            vec![[0, 1], [0, 1]],
            vec![CellAction::Set { cell: out_cell, value: false }, CellAction::Set { cell: out_cell, value: true }],
        )
        .expect("valid table")
    }

    pub fn state_count(&self) -> u32 {
        self.next.len() as u32
    }

    fn row(&self, s: u32) -> Result<&[u32; 2], ModelError> {
        self.next
            .get(s as usize)
            .ok_or_else(|| ModelError::SpecificationGap { state: s.to_string(), detail: "state outside table".into() })
    }
}

impl Agent<EcaEnvironment> for TableAgent {
    type State = u32;
    type Input = bool;

    fn perceive(&self, env: &EcaRow) -> bool {
        read_probe(env, self.probe)
    }

    fn generate(&self, state: &u32, input: &bool) -> Result<u32, ModelError> {
        Ok(self.row(*state)?[usize::from(*input)])
    }

    fn act(&self, state: &u32) -> Result<CellAction, ModelError> {
        self.actions
            .get(*state as usize)
            .copied()
            .ok_or_else(|| ModelError::SpecificationGap { state: state.to_string(), detail: "no action".into() })
    }

    fn goal(&self, state: &u32, _env: &EcaRow) -> bool {
        self.goal_states.contains(state)
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(self.next.len() as u128)
    }

    fn declares_generative(&self) -> bool {
        // g ignores s_A when every row is the same
        self.next.windows(2).any(|w| w[0] != w[1])
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> u32 {
        rng.random_range(0..self.state_count())
    }
}
