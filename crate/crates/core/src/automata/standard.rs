//! Compact text notation for small machines, e.g. `1RB1LB_1LA1RZ`.
//!
//! States are `A`, `B`, … in order; each state lists one `write move next` triple
//! per symbol `0`, `1`, …. `Z` (or `H`) as the next state means halt-and-accept;
//! `---` leaves the entry undefined, which rejects. Symbol `0` is the blank.

use std::collections::BTreeMap;

use super::tm::{MachineParts, Move, StateId, Symbol, Transition, TuringMachine};
use super::AutomataError;

pub const ACCEPT_NAME: &str = "Z";
pub const REJECT_NAME: &str = "reject";

pub fn from_standard_text(text: &str) -> Result<TuringMachine, AutomataError> {
    let bad = |msg: String| AutomataError::InvalidMachine(format!("{text:?}: {msg}"));
    let rows: Vec<&str> = text.trim().split('_').collect();
    let n_states = rows.len();
    if n_states == 0 || n_states > 25 {
        return Err(bad("expected 1 to 25 states".into()));
    }
    let row_len = rows[0].len();
    if row_len == 0 || !row_len.is_multiple_of(3) || rows.iter().any(|r| r.len() != row_len) {
        return Err(bad("rows must hold one 3-character triple per symbol".into()));
    }
    let n_symbols = row_len / 3;
    if n_symbols > 10 {
        return Err(bad("at most 10 symbols".into()));
    }
    let accept = StateId(n_states as u32);
    let reject = StateId(n_states as u32 + 1);
    let mut delta = BTreeMap::new();
    for (q, row) in rows.iter().enumerate() {
        let bytes = row.as_bytes();
        for s in 0..n_symbols {
            let triple = &bytes[3 * s..3 * s + 3];
            if triple == b"---" {
                continue;
            }
            let write = (triple[0] as char)
                .to_digit(10)
                .filter(|&d| (d as usize) < n_symbols)
                .ok_or_else(|| bad(format!("bad write symbol in {:?}", String::from_utf8_lossy(triple))))?;
            let direction = match triple[1] {
                b'L' => Move::Left,
                b'R' => Move::Right,
                _ => return Err(bad(format!("bad move in {:?}", String::from_utf8_lossy(triple)))),
            };
            let next = match triple[2] {
                b'Z' | b'H' => accept,
                c @ b'A'..=b'Y' if usize::from(c - b'A') < n_states => StateId(u32::from(c - b'A')),
                _ => return Err(bad(format!("bad next state in {:?}", String::from_utf8_lossy(triple)))),
            };
            delta.insert((StateId(q as u32), Symbol(s as u32)), Transition { next, write: Symbol(write), direction });
        }
    }
    let mut state_names: Vec<String> = (0..n_states).map(|q| ((b'A' + q as u8) as char).to_string()).collect();
    state_names.push(ACCEPT_NAME.into());
    state_names.push(REJECT_NAME.into());
    TuringMachine::new(MachineParts {
        state_names,
        symbol_names: (0..n_symbols).map(|s| s.to_string()).collect(),
        input_alphabet: (1..n_symbols as u32).map(Symbol).collect(),
        blank: Symbol(0),
        start: StateId(0),
        accept,
        reject,
        delta,
    })
}

/// Renders a machine in compact notation when it has that shape
/// (states `A..` followed by accept and reject, digit symbols with blank `0`).
pub fn to_standard_text(tm: &TuringMachine) -> Option<String> {
    let n = tm.state_count().checked_sub(2)?;
    if tm.accept() != StateId(n as u32) || tm.reject() != StateId(n as u32 + 1) || tm.start() != StateId(0) {
        return None;
    }
    if tm.blank() != Symbol(0) || tm.symbol_names().iter().enumerate().any(|(i, s)| *s != i.to_string()) {
        return None;
    }
    let mut rows = Vec::with_capacity(n);
    for q in 0..n as u32 {
        let mut row = String::new();
        for s in 0..tm.symbol_count() as u32 {
            match tm.transition(StateId(q), Symbol(s)) {
                None => row.push_str("---"),
                Some(t) => {
                    row.push_str(&t.write.0.to_string());
                    row.push(t.direction.letter());
                    if t.next == tm.accept() {
                        row.push('Z');
                    } else if t.next == tm.reject() {
                        return None;
                    } else {
                        row.push((b'A' + t.next.0 as u8) as char);
                    }
                }
            }
        }
        rows.push(row);
    }
    Some(rows.join("_"))
}

/// Every 2-state 2-symbol machine where each entry is one of the eight
/// `write move next` triples over `{A, B}` or the halting triple `1RZ`:
/// 9^4 = 6561 machines, in lexicographic option order.
pub fn enumerate_two_state_two_symbol() -> Vec<(String, TuringMachine)> {
    let mut options: Vec<String> = Vec::with_capacity(9);
    for write in ['0', '1'] {
        for mv in ['L', 'R'] {
            for next in ['A', 'B'] {
                options.push(format!("{write}{mv}{next}"));
            }
        }
    }
    options.push("1RZ".into());
    let mut out = Vec::with_capacity(6561);
    for a0 in &options {
        for a1 in &options {
            for b0 in &options {
                for b1 in &options {
                    let text = format!("{a0}{a1}_{b0}{b1}");
                    let tm = from_standard_text(&text).expect("enumerated machine is well formed");
                    out.push((text, tm));
                }
            }
        }
    }
    out
}
