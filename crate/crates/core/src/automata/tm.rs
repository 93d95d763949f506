//! Deterministic single-tape Turing machines over a sparse, two-way infinite tape.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AutomataError;
use crate::canonical::Canonical;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    Left,
    Right,
}

impl Move {
    pub fn offset(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Right => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub next: StateId,
    pub write: Symbol,
    pub direction: Move,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        })
    }
}

/// The raw parts of a machine, validated by [`TuringMachine::new`].
#[derive(Debug, Clone)]
pub struct MachineParts {
    pub state_names: Vec<String>,
    pub symbol_names: Vec<String>,
    pub input_alphabet: Vec<Symbol>,
    pub blank: Symbol,
    pub start: StateId,
    pub accept: StateId,
    pub reject: StateId,
    pub delta: BTreeMap<(StateId, Symbol), Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    state_names: Vec<String>,
    symbol_names: Vec<String>,
    input_alphabet: Vec<Symbol>,
    blank: Symbol,
    start: StateId,
    accept: StateId,
    reject: StateId,
    delta: BTreeMap<(StateId, Symbol), Transition>,
    // dense copy of `delta`, indexed by state * |Γ| + symbol
    table: Vec<Option<Transition>>,
}

impl TuringMachine {
    pub fn new(parts: MachineParts) -> Result<Self, AutomataError> {
        let MachineParts { state_names, symbol_names, mut input_alphabet, blank, start, accept, reject, delta } = parts;
        let n_states = state_names.len() as u32;
        let n_symbols = symbol_names.len() as u32;
        let bad = |msg: String| Err(AutomataError::InvalidMachine(msg));

        if n_states == 0 {
            return bad("state set is empty".into());
        }
        if has_duplicates(&state_names) {
            return bad("state names are not unique".into());
        }
        if has_duplicates(&symbol_names) {
            return bad("tape symbols are not unique".into());
        }
        for (label, q) in [("start", start), ("accept", accept), ("reject", reject)] {
            if q.0 >= n_states {
                return bad(format!("{label} state {} is not in the state set", q.0));
            }
        }
        if accept == reject {
            return bad("accept and reject states coincide".into());
        }
        if blank.0 >= n_symbols {
            return bad("blank is not a tape symbol".into());
        }
        input_alphabet.sort();
        input_alphabet.dedup();
        for s in &input_alphabet {
            if s.0 >= n_symbols {
                return bad(format!("input symbol {} is not a tape symbol", s.0));
            }
            if *s == blank {
                return bad("blank belongs to the input alphabet".into());
            }
        }
        let mut table = vec![None; (n_states * n_symbols) as usize];
        for (&(q, s), t) in &delta {
            if q.0 >= n_states || s.0 >= n_symbols {
                return bad(format!("transition source ({}, {}) is outside Q x Γ", q.0, s.0));
            }
            if q == accept || q == reject {
                return bad(format!("transition defined on halting state {}", state_names[q.0 as usize]));
            }
            if t.next.0 >= n_states {
                return bad(format!("transition target {} is not a state", t.next.0));
            }
            if t.write.0 >= n_symbols {
                return bad(format!("transition writes unknown symbol {}", t.write.0));
            }
            table[(q.0 * n_symbols + s.0) as usize] = Some(*t);
        }
        Ok(Self { state_names, symbol_names, input_alphabet, blank, start, accept, reject, delta, table })
    }

    pub fn parts(&self) -> MachineParts {
        MachineParts {
            state_names: self.state_names.clone(),
            symbol_names: self.symbol_names.clone(),
            input_alphabet: self.input_alphabet.clone(),
            blank: self.blank,
            start: self.start,
            accept: self.accept,
            reject: self.reject,
            delta: self.delta.clone(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn symbol_count(&self) -> usize {
        self.symbol_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn symbol_names(&self) -> &[String] {
        &self.symbol_names
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q.0 as usize]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        &self.symbol_names[s.0 as usize]
    }

    pub fn input_alphabet(&self) -> &[Symbol] {
        &self.input_alphabet
    }

    pub fn blank(&self) -> Symbol {
        self.blank
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn accept(&self) -> StateId {
        self.accept
    }

    pub fn reject(&self) -> StateId {
        self.reject
    }

    pub fn delta(&self) -> &BTreeMap<(StateId, Symbol), Transition> {
        &self.delta
    }

    pub fn is_halting(&self, q: StateId) -> bool {
        q == self.accept || q == self.reject
    }

    pub fn halting_verdict(&self, q: StateId) -> Option<Verdict> {
        if q == self.accept {
            Some(Verdict::Accept)
        } else if q == self.reject {
            Some(Verdict::Reject)
        } else {
            None
        }
    }

    pub fn contains_state(&self, q: StateId) -> bool {
        (q.0 as usize) < self.state_names.len()
    }

    pub fn contains_symbol(&self, s: Symbol) -> bool {
        (s.0 as usize) < self.symbol_names.len()
    }

    /// The δ entry for `(q, s)`, if defined.
    pub fn transition(&self, q: StateId, s: Symbol) -> Option<Transition> {
        if !self.contains_state(q) || !self.contains_symbol(s) {
            return None;
        }
        self.table[(q.0 as usize) * self.symbol_names.len() + s.0 as usize]
    }

    /// The transition actually taken from a non-halting `(q, s)`: the δ entry, or
    /// the implicit move to reject (tape and head untouched) when δ is undefined.
    pub fn effective_transition(&self, q: StateId, s: Symbol) -> EffectiveTransition {
        match self.transition(q, s) {
            Some(t) => EffectiveTransition::Defined(t),
            None => EffectiveTransition::ImplicitReject,
        }
    }

    pub fn symbol_by_name(&self, name: &str) -> Option<Symbol> {
        self.symbol_names.iter().position(|n| n == name).map(|i| Symbol(i as u32))
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    /// Resolves input symbol names, rejecting anything outside Σ.
    pub fn parse_input<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Symbol>, AutomataError> {
        names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                self.symbol_by_name(n)
                    .filter(|s| self.input_alphabet.contains(s))
                    .ok_or_else(|| AutomataError::InvalidInput(format!("symbol {n:?} is not in the input alphabet")))
            })
            .collect()
    }

    pub fn check_input(&self, input: &[Symbol]) -> Result<(), AutomataError> {
        match input.iter().find(|s| !self.input_alphabet.contains(s)) {
            Some(s) => Err(AutomataError::InvalidInput(format!("symbol id {} is not in the input alphabet", s.0))),
            None => Ok(()),
        }
    }

    /// Initial configuration: input at cells `0..|w|`, head on cell 0, start state.
    pub fn initial_configuration(&self, input: &[Symbol]) -> Result<TapeConfiguration, AutomataError> {
        self.check_input(input)?;
        let mut tape = Tape::new(self.blank);
        for (i, &s) in input.iter().enumerate() {
            tape.write(i as i64, s);
        }
        Ok(TapeConfiguration { tape, head: 0, state: self.start, steps_elapsed: 0 })
    }

    /// Applies one transition in place. Returns the verdict without touching the
    /// configuration when it is already in a halting state.
    pub fn advance(&self, cfg: &mut TapeConfiguration) -> Result<Option<Verdict>, AutomataError> {
        if !self.contains_state(cfg.state) {
            return Err(AutomataError::MalformedConfiguration(format!("state {} is not in Q", cfg.state.0)));
        }
        if let Some(v) = self.halting_verdict(cfg.state) {
            return Ok(Some(v));
        }
        let read = cfg.tape.read(cfg.head);
        if !self.contains_symbol(read) {
            return Err(AutomataError::MalformedConfiguration(format!(
                "cell {} holds symbol {} outside the tape alphabet",
                cfg.head, read.0
            )));
        }
        match self.effective_transition(cfg.state, read) {
            EffectiveTransition::Defined(t) => {
                cfg.tape.write(cfg.head, t.write);
                cfg.head += t.direction.offset();
                cfg.state = t.next;
            }
            EffectiveTransition::ImplicitReject => cfg.state = self.reject,
        }
        cfg.steps_elapsed += 1;
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveTransition {
    Defined(Transition),
    ImplicitReject,
}

fn has_duplicates(names: &[String]) -> bool {
    let mut sorted: Vec<&String> = names.iter().collect();
    sorted.sort();
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Sparse tape: only non-blank cells are stored.
///
/// The tape also carries an order-independent content fingerprint (a wrapping
/// sum of mixed `(cell, symbol)` pairs) so two tapes can be compared in O(1)
/// with overwhelming confidence; [`PartialEq`] still compares cell by cell.
#[derive(Clone)]
pub struct Tape {
    cells: BTreeMap<i64, Symbol>,
    blank: Symbol,
    fingerprint: u64,
}

impl Tape {
    pub fn new(blank: Symbol) -> Self {
        Self { cells: BTreeMap::new(), blank, fingerprint: 0 }
    }

    pub fn blank(&self) -> Symbol {
        self.blank
    }

    pub fn read(&self, cell: i64) -> Symbol {
        self.cells.get(&cell).copied().unwrap_or(self.blank)
    }

    pub fn write(&mut self, cell: i64, symbol: Symbol) {
        let old = if symbol == self.blank { self.cells.remove(&cell) } else { self.cells.insert(cell, symbol) };
        if let Some(old) = old {
            self.fingerprint = self.fingerprint.wrapping_sub(cell_mix(cell, old));
        }
        if symbol != self.blank {
            self.fingerprint = self.fingerprint.wrapping_add(cell_mix(cell, symbol));
        }
    }

    /// Non-blank cells in ascending index order.
    pub fn cells(&self) -> impl Iterator<Item = (i64, Symbol)> + '_ {
        self.cells.iter().map(|(&i, &s)| (i, s))
    }

    pub fn non_blank_count(&self) -> usize {
        self.cells.len()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// O(1) probabilistic equality: same blank, cell count and fingerprint.
    pub fn likely_equal(&self, other: &Tape) -> bool {
        self.blank == other.blank && self.cells.len() == other.cells.len() && self.fingerprint == other.fingerprint
    }

    /// Extent `[min, max]` of non-blank cells, if any.
    pub fn extent(&self) -> Option<(i64, i64)> {
        let lo = *self.cells.keys().next()?;
        let hi = *self.cells.keys().next_back()?;
        Some((lo, hi))
    }
}

fn cell_mix(cell: i64, symbol: Symbol) -> u64 {
    let mut z =
        (cell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(symbol.0).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl PartialEq for Tape {
    fn eq(&self, other: &Self) -> bool {
        self.blank == other.blank && self.cells == other.cells
    }
}

impl Eq for Tape {}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.cells.iter().map(|(i, s)| (i, s.0))).finish()
    }
}

impl Canonical for Tape {
    fn encode(&self, out: &mut Vec<u8>) {
        let mut buf = Vec::with_capacity(8 + self.cells.len() * 4);
        leb128::write::unsigned(&mut buf, u64::from(self.blank.0)).expect("vec write");
        leb128::write::unsigned(&mut buf, self.cells.len() as u64).expect("vec write");
        for (&i, &s) in &self.cells {
            leb128::write::signed(&mut buf, i).expect("vec write");
            leb128::write::unsigned(&mut buf, u64::from(s.0)).expect("vec write");
        }
        out.extend(buf);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapeConfiguration {
    pub tape: Tape,
    pub head: i64,
    pub state: StateId,
    pub steps_elapsed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next(TapeConfiguration),
    Halt(Verdict),
}

/// One transition, as a pure function of the configuration.
pub fn tm_step(tm: &TuringMachine, cfg: &TapeConfiguration) -> Result<StepResult, AutomataError> {
    if let Some(v) = tm.contains_state(cfg.state).then(|| tm.halting_verdict(cfg.state)).flatten() {
        return Ok(StepResult::Halt(v));
    }
    let mut next = cfg.clone();
    tm.advance(&mut next)?;
    Ok(StepResult::Next(next))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Halted { at_step: u64, verdict: Verdict },
    OutOfBudget { final_cfg: TapeConfiguration },
}

impl RunOutcome {
    pub fn halting_step(&self) -> Option<u64> {
        match self {
            RunOutcome::Halted { at_step, .. } => Some(*at_step),
            RunOutcome::OutOfBudget { .. } => None,
        }
    }
}

/// Runs at most `budget` transitions from the initial configuration on `input`.
pub fn tm_run_bounded(tm: &TuringMachine, input: &[Symbol], budget: u64) -> Result<RunOutcome, AutomataError> {
    if budget == 0 {
        return Err(AutomataError::InvalidInput("budget must be at least 1".into()));
    }
    let mut cfg = tm.initial_configuration(input)?;
    loop {
        if let Some(verdict) = tm.halting_verdict(cfg.state) {
            return Ok(RunOutcome::Halted { at_step: cfg.steps_elapsed, verdict });
        }
        if cfg.steps_elapsed >= budget {
            return Ok(RunOutcome::OutOfBudget { final_cfg: cfg });
        }
        tm.advance(&mut cfg)?;
    }
}
