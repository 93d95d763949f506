//! Compiling a Turing machine and its input into an agent coupled to a tape
//! environment, so that one coupled step performs exactly one machine step.
//!
//! The environment holds the sparse tape and the head position. The agent
//! holds `φ(q)` together with the symbol currently under the head, and it
//! perceives the two cells adjacent to the head. Under synchronous update the
//! action `O_A(s_A(t))` must already encode `δ(q, σ)`, so the agent carries σ
//! and learns the next one from the neighbour in the direction it moves.

mod check;
mod semi;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::agent::{Agent, ComplexityClass, CoupledState, Environment, ModelError, StateSpace};
use crate::automata::tm::EffectiveTransition;
use crate::automata::{AutomataError, Move, StateId, Symbol, Tape, TapeConfiguration, TuringMachine};
use crate::canonical::Canonical;

pub use check::{embedding_equivalence_check, equivalence_check_system, Divergence, EquivalenceReport};
pub use semi::{ep_semi_decide, halting_sweep, EpKind, EpOutcome, HaltingRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state map is not injective: states {0} and {1} share an id")]
    NotInjective(u32, u32),
    #[error("state map covers {got} states, machine has {expected}")]
    MapSize { expected: usize, got: usize },
    #[error("agent control {0} is not the image of any machine state")]
    UnknownControl(u32),
}

/// Injective `φ: Q → agent control ids`. Tape cells map to themselves and the
/// action codec is the identity on `(write, move)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingMap {
    phi: Vec<u32>,
    inverse: BTreeMap<u32, StateId>,
}

impl EmbeddingMap {
    /// `φ(q) = 2q + 1`.
    pub fn standard(n_states: usize) -> Self {
        Self::from_table((0..n_states as u32).map(|q| 2 * q + 1).collect()).expect("odd ids are distinct")
    }

    pub fn from_table(phi: Vec<u32>) -> Result<Self, EmbeddingError> {
        let mut inverse = BTreeMap::new();
        for (q, &id) in phi.iter().enumerate() {
            if let Some(prev) = inverse.insert(id, StateId(q as u32)) {
                return Err(EmbeddingError::NotInjective(prev.0, q as u32));
            }
        }
        Ok(Self { phi, inverse })
    }

    pub fn phi(&self, q: StateId) -> u32 {
        self.phi[q.0 as usize]
    }

    pub fn decode_state(&self, control: u32) -> Result<StateId, EmbeddingError> {
        self.inverse.get(&control).copied().ok_or(EmbeddingError::UnknownControl(control))
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Whether distinct states receive distinct ids.
    pub fn is_injective(&self) -> bool {
        self.inverse.len() == self.phi.len()
    }
}

/// Agent state: `φ(q)` and the symbol under the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TmControl {
    pub control: u32,
    pub current: Symbol,
}

impl fmt::Display for TmControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.control, self.current.0)
    }
}

impl Canonical for TmControl {
    fn encode(&self, out: &mut Vec<u8>) {
        self.control.encode(out);
        self.current.0.encode(out);
    }
}

/// `I_A`: the cells left and right of the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Neighbors {
    pub left: Symbol,
    pub right: Symbol,
}

impl fmt::Display for Neighbors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.left.0, self.right.0)
    }
}

impl Canonical for Neighbors {
    fn encode(&self, out: &mut Vec<u8>) {
        self.left.0.encode(out);
        self.right.0.encode(out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TapeAction {
    Noop,
    WriteMove { write: Symbol, direction: Move },
}

impl fmt::Display for TapeAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TapeAction::Noop => f.write_str("-"),
            TapeAction::WriteMove { write, direction } => write!(f, "{}{}", write.0, direction.letter()),
        }
    }
}

impl Canonical for TapeAction {
    fn encode(&self, out: &mut Vec<u8>) {
        match self {
            TapeAction::Noop => out.push(0),
            TapeAction::WriteMove { write, direction } => {
                out.push(match direction {
                    Move::Left => 1,
                    Move::Right => 2,
                });
                write.0.encode(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapeState {
    pub tape: Tape,
    pub head: i64,
}

impl fmt::Display for TapeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "head={} cells=", self.head)?;
        let cells: Vec<String> = self.tape.cells().map(|(i, s)| format!("{i}:{}", s.0)).collect();
        write!(f, "[{}]", cells.join(","))
    }
}

impl Canonical for TapeState {
    fn encode(&self, out: &mut Vec<u8>) {
        self.tape.encode(out);
        leb128::write::signed(out, self.head).expect("vec write");
    }
}

/// `T_E`: write under the head, then move it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapeEnvironment {
    blank: Symbol,
    n_symbols: u32,
}

impl TapeEnvironment {
    pub fn new(blank: Symbol, n_symbols: u32) -> Self {
        Self { blank, n_symbols }
    }
}

impl Environment for TapeEnvironment {
    type State = TapeState;
    type Action = TapeAction;

    fn transition(&self, mut state: TapeState, action: &TapeAction) -> Result<TapeState, ModelError> {
        if let TapeAction::WriteMove { write, direction } = *action {
            state.tape.write(state.head, write);
            state.head += direction.offset();
        }
        Ok(state)
    }

    fn complexity_class(&self) -> ComplexityClass {
        ComplexityClass::TuringTape
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Countable
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> TapeState {
        let mut tape = Tape::new(self.blank);
        for cell in -8..8 {
            tape.write(cell, Symbol(rng.random_range(0..self.n_symbols)));
        }
        TapeState { tape, head: rng.random_range(-8..8) }
    }
}

/// The finite control, compiled from `δ` and `φ`.
#[derive(Debug, Clone)]
pub struct TmAgent {
    tm: Arc<TuringMachine>,
    map: Arc<EmbeddingMap>,
    // forward ids used when emitting the next control; normally map.phi
    emit: Vec<u32>,
}

impl TmAgent {
    fn state_of(&self, s: &TmControl) -> Result<StateId, ModelError> {
        self.map.decode_state(s.control).map_err(|_| ModelError::SpecificationGap {
            state: s.to_string(),
            detail: "control id is not the image of a machine state".into(),
        })
    }

    pub fn machine(&self) -> &TuringMachine {
        &self.tm
    }
}

impl Agent<TapeEnvironment> for TmAgent {
    type State = TmControl;
    type Input = Neighbors;

    fn perceive(&self, env: &TapeState) -> Neighbors {
        Neighbors { left: env.tape.read(env.head - 1), right: env.tape.read(env.head + 1) }
    }

    fn generate(&self, s: &TmControl, input: &Neighbors) -> Result<TmControl, ModelError> {
        let q = self.state_of(s)?;
        if self.tm.is_halting(q) {
            return Ok(*s);
        }
        Ok(match self.tm.effective_transition(q, s.current) {
            EffectiveTransition::Defined(t) => TmControl {
                control: self.emit[t.next.0 as usize],
                current: match t.direction {
                    Move::Left => input.left,
                    Move::Right => input.right,
                },
            },
            EffectiveTransition::ImplicitReject => {
                TmControl { control: self.emit[self.tm.reject().0 as usize], current: s.current }
            }
        })
    }

    fn act(&self, s: &TmControl) -> Result<TapeAction, ModelError> {
        let q = self.state_of(s)?;
        if self.tm.is_halting(q) {
            return Ok(TapeAction::Noop);
        }
        Ok(match self.tm.effective_transition(q, s.current) {
            EffectiveTransition::Defined(t) => TapeAction::WriteMove { write: t.write, direction: t.direction },
            EffectiveTransition::ImplicitReject => TapeAction::Noop,
        })
    }

    fn goal(&self, s: &TmControl, _env: &TapeState) -> bool {
        s.control == self.map.phi(self.tm.accept())
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(self.tm.state_count() as u128 * self.tm.symbol_count() as u128)
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> TmControl {
        let q = rng.random_range(0..self.tm.state_count() as u32);
        TmControl {
            control: self.map.phi(StateId(q)),
            current: Symbol(rng.random_range(0..self.tm.symbol_count() as u32)),
        }
    }
}

pub type EmbeddedState = CoupledState<TmControl, TapeState>;

#[derive(Debug, Clone)]
pub struct EmbeddedSystem {
    pub agent: TmAgent,
    pub env: TapeEnvironment,
    pub s0: EmbeddedState,
    pub map: Arc<EmbeddingMap>,
    pub machine: Arc<TuringMachine>,
    pub input: Vec<Symbol>,
}

pub fn build_embedded_machine(tm: &TuringMachine, input: &[Symbol]) -> Result<EmbeddedSystem, EmbeddingError> {
    build_with_map(tm, input, EmbeddingMap::standard(tm.state_count()))
}

pub fn build_with_map(
    tm: &TuringMachine,
    input: &[Symbol],
    map: EmbeddingMap,
) -> Result<EmbeddedSystem, EmbeddingError> {
    if map.len() != tm.state_count() {
        return Err(EmbeddingError::MapSize { expected: tm.state_count(), got: map.len() });
    }
    if !map.is_injective() {
        return Err(EmbeddingError::NotInjective(0, 0));
    }
    let cfg = tm.initial_configuration(input)?;
    let machine = Arc::new(tm.clone());
    let map = Arc::new(map);
    let agent = TmAgent { tm: machine.clone(), map: map.clone(), emit: map.phi.clone() };
    let env = TapeEnvironment::new(tm.blank(), tm.symbol_count() as u32);
    let s0 = CoupledState::initial(
        TmControl { control: map.phi(cfg.state), current: cfg.tape.read(cfg.head) },
        TapeState { tape: cfg.tape, head: cfg.head },
    );
    Ok(EmbeddedSystem { agent, env, s0, map, machine, input: input.to_vec() })
}

impl EmbeddedSystem {
    /// Reads the machine configuration back out of a coupled state.
    pub fn decode(&self, cs: &EmbeddedState) -> Result<TapeConfiguration, EmbeddingError> {
        Ok(TapeConfiguration {
            tape: cs.env.tape.clone(),
            head: cs.env.head,
            state: self.map.decode_state(cs.agent.control)?,
            steps_elapsed: cs.t,
        })
    }

    /// `P_halt`: the agent sits at the image of the accept or reject state.
    pub fn halting_property(&self) -> impl Fn(&TmControl, &TapeState) -> bool + Send + Sync + 'static {
        let accept = self.map.phi(self.machine.accept());
        let reject = self.map.phi(self.machine.reject());
        move |s: &TmControl, _e: &TapeState| s.control == accept || s.control == reject
    }

    /// Test fixture: make the agent emit `control` whenever it enters `q`,
    /// while decoding keeps the original map.
    #[doc(hidden)]
    pub fn corrupt_agent_phi(&mut self, q: StateId, control: u32) {
        self.agent.emit[q.0 as usize] = control;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{coupled_step, run_coupled};
    use crate::automata::{from_standard_text, tm_step, StepResult};

    #[test]
    fn start_in_accept_satisfies_goal() {
        let tm = from_standard_text("1RB---_0LA1RZ").unwrap();
        let mut parts = tm.parts();
        parts.start = parts.accept;
        let tm = TuringMachine::new(parts).unwrap();
        let sys = build_embedded_machine(&tm, &[]).unwrap();
        assert!(sys.agent.goal(&sys.s0.agent, &sys.s0.env));
        assert!(sys.halting_property()(&sys.s0.agent, &sys.s0.env));
    }

    #[test]
    fn busy_beaver_tapes_match_step_by_step() {
        let tm = from_standard_text("1RB1LB_1LA1RZ").unwrap();
        let sys = build_embedded_machine(&tm, &[]).unwrap();
        let p = sys.halting_property();
        assert!(!p(&sys.s0.agent, &sys.s0.env));
        let mut cs = sys.s0.clone();
        let mut cfg = tm.initial_configuration(&[]).unwrap();
        for _ in 0..6 {
            cs = coupled_step(&sys.agent, &sys.env, &cs).unwrap().next;
            cfg = match tm_step(&tm, &cfg).unwrap() {
                StepResult::Next(c) => c,
                StepResult::Halt(_) => unreachable!(),
            };
            assert_eq!(sys.decode(&cs).unwrap(), cfg);
        }
        assert_eq!(cfg.tape.non_blank_count(), 4);
        assert!(p(&cs.agent, &cs.env));
        assert!(sys.agent.goal(&cs.agent, &cs.env));
    }

    #[test]
    fn looping_machine_walks_right() {
        let tm = from_standard_text("0RA---").unwrap();
        let sys = build_embedded_machine(&tm, &[]).unwrap();
        let trace = run_coupled(&sys.agent, &sys.env, sys.s0.clone(), 40, None, false).unwrap();
        for r in &trace.records {
            assert_eq!(r.env.head, r.t as i64);
        }
    }

    #[test]
    fn maps_are_checked() {
        assert!(matches!(EmbeddingMap::from_table(vec![1, 3, 1]), Err(EmbeddingError::NotInjective(0, 2))));
        let tm = from_standard_text("1RB1LB_1LA1RZ").unwrap();
        let small = EmbeddingMap::from_table(vec![1, 2]).unwrap();
        assert!(build_with_map(&tm, &[], small).is_err());
        assert!(build_embedded_machine(&tm, &[Symbol(7)]).is_err());
    }

    #[test]
    fn any_injective_map_embeds_faithfully() {
        let tm = from_standard_text("1RB1LB_1LA1RZ").unwrap();
        let map = EmbeddingMap::from_table(vec![40, 7, 1000, 3]).unwrap();
        let sys = build_with_map(&tm, &[], map).unwrap();
        let report = equivalence_check_system(&sys, 100).unwrap();
        assert!(report.passed);
        assert_eq!(report.halting_step, Some(6));
    }
}
