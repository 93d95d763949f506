//! TOML machine description files.
//!
//! ```toml
//! name = "unary-increment"          # optional
//! states = ["scan", "done", "no"]
//! input_alphabet = ["1"]
//! tape_alphabet = ["_", "1"]
//! blank = "_"
//! start = "scan"
//! accept = "done"
//! reject = "no"
//! delta = [
//!   ["scan", "1", "scan", "1", "R"],
//!   ["scan", "_", "done", "1", "R"],
//! ]
//! input = ["1", "1"]                # optional, defaults to the empty word
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tm::{MachineParts, Move, StateId, Symbol, Transition, TuringMachine};
use super::AutomataError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: Vec<String>,
    pub input_alphabet: Vec<String>,
    pub tape_alphabet: Vec<String>,
    pub blank: String,
    pub start: String,
    pub accept: String,
    pub reject: String,
    pub delta: Vec<[String; 5]>,
    #[serde(default)]
    pub input: Vec<String>,
}

impl TmSpecFile {
    pub fn parse(text: &str) -> Result<Self, AutomataError> {
        toml::from_str(text).map_err(|e| AutomataError::SpecFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, AutomataError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| AutomataError::SpecFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| AutomataError::SpecFile(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec file serializes")
    }

    pub fn build(&self) -> Result<(TuringMachine, Vec<Symbol>), AutomataError> {
        let state = |name: &str| -> Result<StateId, AutomataError> {
            self.states
                .iter()
                .position(|s| s == name)
                .map(|i| StateId(i as u32))
                .ok_or_else(|| AutomataError::InvalidMachine(format!("unknown state {name:?}")))
        };
        let symbol = |name: &str| -> Result<Symbol, AutomataError> {
            self.tape_alphabet
                .iter()
                .position(|s| s == name)
                .map(|i| Symbol(i as u32))
                .ok_or_else(|| AutomataError::InvalidMachine(format!("unknown tape symbol {name:?}")))
        };
        let mut delta = BTreeMap::new();
        for [from, read, next, write, mv] in &self.delta {
            let direction = match mv.as_str() {
                "L" => Move::Left,
                "R" => Move::Right,
                other => return Err(AutomataError::InvalidMachine(format!("move must be L or R, got {other:?}"))),
            };
            let key = (state(from)?, symbol(read)?);
            let t = Transition { next: state(next)?, write: symbol(write)?, direction };
            if delta.insert(key, t).is_some() {
                return Err(AutomataError::InvalidMachine(format!("duplicate transition for ({from}, {read})")));
            }
        }
        let tm = TuringMachine::new(MachineParts {
            state_names: self.states.clone(),
            symbol_names: self.tape_alphabet.clone(),
            input_alphabet: self.input_alphabet.iter().map(|s| symbol(s)).collect::<Result<_, _>>()?,
            blank: symbol(&self.blank)?,
            start: state(&self.start)?,
            accept: state(&self.accept)?,
            reject: state(&self.reject)?,
            delta,
        })?;
        let input = tm.parse_input(&self.input)?;
        Ok((tm, input))
    }

    pub fn from_machine(tm: &TuringMachine, input: &[Symbol], name: Option<String>) -> Self {
        let sym = |s: Symbol| tm.symbol_name(s).to_string();
        let st = |q: StateId| tm.state_name(q).to_string();
        Self {
            name,
            states: tm.state_names().to_vec(),
            input_alphabet: tm.input_alphabet().iter().map(|&s| sym(s)).collect(),
            tape_alphabet: tm.symbol_names().to_vec(),
            blank: sym(tm.blank()),
            start: st(tm.start()),
            accept: st(tm.accept()),
            reject: st(tm.reject()),
            delta: tm
                .delta()
                .iter()
                .map(|(&(q, s), t)| [st(q), sym(s), st(t.next), sym(t.write), t.direction.letter().to_string()])
                .collect(),
            input: input.iter().map(|&s| sym(s)).collect(),
        }
    }
}

/// A named machine with its input word.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub machine: TuringMachine,
    pub input: Vec<Symbol>,
}

/// Loads every `*.toml` machine in `dir`, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, AutomataError> {
    let read = std::fs::read_dir(dir).map_err(|e| AutomataError::SpecFile(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> =
        read.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "toml")).collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let spec = TmSpecFile::load(&p)?;
            let (machine, input) =
                spec.build().map_err(|e| AutomataError::SpecFile(format!("{}: {e}", p.display())))?;
            let name = spec
                .name
                .clone()
                .unwrap_or_else(|| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
            Ok(CorpusEntry { name, machine, input })
        })
        .collect()
}
