//! Minimal agents and environments.
//!
//! An [`Environment`] owns a state space `S_E` and a transition
//! `T_E: S_E × O_A → S_E`. An [`Agent`] over that environment owns `S_A`, the
//! input map `I_A: S_E → I`, the transition `T_A: S_A × I → S_A` built on a
//! distinguished generative component `g`, the output map `O_A: S_A → O_A`
//! and a goal test over `S_A × S_E`.
//!
//! Both sides advance synchronously from the same time-`t` snapshot; see
//! [`coupled::coupled_step`].

pub mod autonomy;
pub mod closure;
pub mod coupled;
pub mod export;
pub mod families;

use std::fmt;

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::automata::AutomataError;
use crate::canonical::Canonical;

pub use autonomy::{
    check_autonomy_conditions, replay_witnesses, AutonomyReport, AutonomySummary, ConditionStatus, ConditionSummary,
    PairWitness,
};
pub use closure::{
    core_stability_probe, env_update_map, perturbation_sensitivity, SensitivityReport, StabilityOutcome,
};
pub use coupled::{
    advance, coupled_step, run_coupled, run_coupled_with_hook, CoupledState, CoupledTrace, EnvHook, StepRecord,
    TraceRecord,
};
pub use families::{CellAction, CounterAgent, EcaEnvironment, ReactiveAgent, Singleton, TableAgent};

/// Everything a state, input or action must support: cloning, comparison,
/// display and a canonical byte form.
pub trait StateValue: Clone + PartialEq + fmt::Debug + fmt::Display + Canonical {}

impl<T: Clone + PartialEq + fmt::Debug + fmt::Display + Canonical> StateValue for T {}

/// Size descriptor of a state space. Finite sizes saturate at `u128::MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateSpace {
    Finite(u128),
    Countable,
}

impl StateSpace {
    pub fn binary(bits: usize) -> Self {
        StateSpace::Finite(if bits >= 128 { u128::MAX } else { 1u128 << bits })
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self, StateSpace::Finite(1))
    }
}

/// Informational label `C(E)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComplexityClass {
    Finite,
    EcaRule(u8),
    TuringTape,
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexityClass::Finite => f.write_str("finite"),
            ComplexityClass::EcaRule(r) => write!(f, "ca-rule-{r}"),
            ComplexityClass::TuringTape => f.write_str("tm-tape"),
        }
    }
}

pub trait Environment {
    type State: StateValue;
    type Action: StateValue;

    /// `T_E`. Takes the state by value so large tapes are updated in place.
    fn transition(&self, state: Self::State, action: &Self::Action) -> Result<Self::State, ModelError>;

    fn complexity_class(&self) -> ComplexityClass;

    fn state_space(&self) -> StateSpace;

    /// Draws a state for witness searches.
    fn sample_state(&self, rng: &mut dyn RngCore) -> Self::State;
}

pub trait Agent<E: Environment> {
    type State: StateValue;
    type Input: StateValue;

    /// `I_A`.
    fn perceive(&self, env: &E::State) -> Self::Input;

    /// The generative component `g`.
    fn generate(&self, state: &Self::State, input: &Self::Input) -> Result<Self::State, ModelError>;

    /// `T_A`, composed from [`Agent::generate`].
    fn transition(&self, state: &Self::State, input: &Self::Input) -> Result<Self::State, ModelError> {
        self.generate(state, input)
    }

    /// `O_A`.
    fn act(&self, state: &Self::State) -> Result<E::Action, ModelError>;

    /// Membership in the goal set `G`.
    fn goal(&self, state: &Self::State, env: &E::State) -> bool {
        let _ = (state, env);
        false
    }

    fn state_space(&self) -> StateSpace;

    /// Whether `g` is declared to depend on the agent state. Agents whose `g`
    /// is a constant (or ignores `s_A`) return false.
    fn declares_generative(&self) -> bool {
        true
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> Self::State;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("transition undefined on reached state {state}: {detail}")]
    SpecificationGap { state: String, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
}
