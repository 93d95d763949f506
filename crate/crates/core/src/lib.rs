//! A desk-scale laboratory for minimal agents coupled to computational
//! environments.
//!
//! * [`automata`]: elementary CA, Turing machines, DFAs, machine encodings.
//! * [`agent`]: agent/environment contracts, the synchronous coupled stepper,
//!   autonomy predicates and closure probes.
//! * [`embedding`]: compiling a Turing machine into an agent that uses its
//!   environment as tape, plus the bounded halting semi-decision.
//! * [`predict`]: resource-bounded predictors and prediction efficiency.
//! * [`info`]: entropy and mutual-information estimators and compression-based
//!   complexity curves.
//! * [`experiments`]: configuration, seeded runs, manifests and CSV output.

pub mod agent;
pub mod automata;
pub mod canonical;
pub mod embedding;
pub mod experiments;
pub mod info;
pub mod predict;
pub mod seeds;
