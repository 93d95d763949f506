//! Executable substrates: elementary cellular automata, Turing machines and
//! finite automata.

pub mod dfa;
pub mod eca;
pub mod encoding;
pub mod spec_file;
pub mod standard;
pub mod tm;

use thiserror::Error;

pub use dfa::{dfa_language_empty, dfa_reachable, Dfa};
pub use eca::{eca_evolve, eca_step, EcaRow, EcaRule};
pub use encoding::{decode_tm_with_input, encode_tm_with_input};
pub use spec_file::{load_corpus, CorpusEntry, TmSpecFile};
pub use standard::{enumerate_two_state_two_symbol, from_standard_text, to_standard_text};
pub use tm::{
    tm_run_bounded, tm_step, MachineParts, Move, RunOutcome, StateId, StepResult, Symbol, Tape, TapeConfiguration,
    Transition, TuringMachine, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomataError {
    #[error("rule index {0} is outside 0..=255")]
    RuleOutOfRange(u32),
    #[error("row width {0} is below the minimum of 3")]
    WidthTooSmall(usize),
    #[error("invalid cell character {0:?}")]
    BadCell(char),
    #[error("packed row of width {width} needs {} bytes, got {bytes}", width.div_ceil(8))]
    PackedLength { width: usize, bytes: usize },
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("malformed configuration: {0}")]
    MalformedConfiguration(String),
    #[error("rejected input: {0}")]
    InvalidInput(String),
    #[error("unknown state {0}")]
    UnknownState(u32),
    #[error("bad encoding: {0}")]
    Encoding(String),
    #[error("machine spec file: {0}")]
    SpecFile(String),
}
