//! Canonical self-delimiting byte encoding of a machine together with its input.
//!
//! Layout, all integers unsigned LEB128:
//!
//! ```text
//! "TMW1"
//! states:   count, then per state: byte length, UTF-8 name
//! start, accept, reject
//! alphabet: count, then per tape symbol: byte length, UTF-8 name
//! blank
//! sigma:    count, then input symbol ids ascending
//! delta:    count, then rows sorted by (state, read): state, read, next, write, move (0 = L, 1 = R)
//! input:    length, then symbol ids
//! ```

use std::collections::BTreeMap;
use std::io::{Cursor, Read};

use super::tm::{MachineParts, Move, StateId, Symbol, Transition, TuringMachine};
use super::AutomataError;

pub const MAGIC: &[u8; 4] = b"TMW1";

pub fn encode_tm_with_input(tm: &TuringMachine, input: &[Symbol]) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    let uint = |out: &mut Vec<u8>, v: u64| {
        leb128::write::unsigned(out, v).expect("vec write");
    };
    let text = |out: &mut Vec<u8>, s: &str| {
        leb128::write::unsigned(out, s.len() as u64).expect("vec write");
        out.extend_from_slice(s.as_bytes());
    };

    uint(&mut out, tm.state_count() as u64);
    for name in tm.state_names() {
        text(&mut out, name);
    }
    for q in [tm.start(), tm.accept(), tm.reject()] {
        uint(&mut out, u64::from(q.0));
    }
    uint(&mut out, tm.symbol_count() as u64);
    for name in tm.symbol_names() {
        text(&mut out, name);
    }
    uint(&mut out, u64::from(tm.blank().0));
    uint(&mut out, tm.input_alphabet().len() as u64);
    for s in tm.input_alphabet() {
        uint(&mut out, u64::from(s.0));
    }
    uint(&mut out, tm.delta().len() as u64);
    // BTreeMap iteration is already sorted by (state, symbol)
    for (&(q, s), t) in tm.delta() {
        uint(&mut out, u64::from(q.0));
        uint(&mut out, u64::from(s.0));
        uint(&mut out, u64::from(t.next.0));
        uint(&mut out, u64::from(t.write.0));
        uint(&mut out, matches!(t.direction, Move::Right) as u64);
    }
    uint(&mut out, input.len() as u64);
    for s in input {
        uint(&mut out, u64::from(s.0));
    }
    out
}

pub fn decode_tm_with_input(bytes: &[u8]) -> Result<(TuringMachine, Vec<Symbol>), AutomataError> {
    let mut cur = Cursor::new(bytes);
    let mut magic = [0u8; 4];
    cur.read_exact(&mut magic).map_err(|_| enc_err("truncated magic"))?;
    if &magic != MAGIC {
        return Err(enc_err("bad magic"));
    }
    let n_states = read_count(&mut cur, bytes.len())?;
    let state_names = (0..n_states).map(|_| read_text(&mut cur)).collect::<Result<Vec<_>, _>>()?;
    let start = StateId(read_u32(&mut cur)?);
    let accept = StateId(read_u32(&mut cur)?);
    let reject = StateId(read_u32(&mut cur)?);
    let n_symbols = read_count(&mut cur, bytes.len())?;
    let symbol_names = (0..n_symbols).map(|_| read_text(&mut cur)).collect::<Result<Vec<_>, _>>()?;
    let blank = Symbol(read_u32(&mut cur)?);
    let n_sigma = read_count(&mut cur, bytes.len())?;
    let input_alphabet = (0..n_sigma).map(|_| read_u32(&mut cur).map(Symbol)).collect::<Result<Vec<_>, _>>()?;
    let n_delta = read_count(&mut cur, bytes.len())?;
    let mut delta = BTreeMap::new();
    let mut last: Option<(StateId, Symbol)> = None;
    for _ in 0..n_delta {
        let key = (StateId(read_u32(&mut cur)?), Symbol(read_u32(&mut cur)?));
        if last.is_some_and(|l| l >= key) {
            return Err(enc_err("delta rows not strictly sorted"));
        }
        last = Some(key);
        let next = StateId(read_u32(&mut cur)?);
        let write = Symbol(read_u32(&mut cur)?);
        let direction = match read_u32(&mut cur)? {
            0 => Move::Left,
            1 => Move::Right,
            _ => return Err(enc_err("bad move code")),
        };
        delta.insert(key, Transition { next, write, direction });
    }
    let n_input = read_count(&mut cur, bytes.len())?;
    let input = (0..n_input).map(|_| read_u32(&mut cur).map(Symbol)).collect::<Result<Vec<_>, _>>()?;
    if cur.position() as usize != bytes.len() {
        return Err(enc_err("trailing bytes"));
    }
    let sorted = input_alphabet.windows(2).all(|w| w[0] < w[1]);
    if !sorted {
        return Err(enc_err("input alphabet not strictly ascending"));
    }
    let tm = TuringMachine::new(MachineParts {
        state_names,
        symbol_names,
        input_alphabet,
        blank,
        start,
        accept,
        reject,
        delta,
    })?;
    tm.check_input(&input)?;
    Ok((tm, input))
}

fn enc_err(msg: &str) -> AutomataError {
    AutomataError::Encoding(msg.to_string())
}

fn read_u64(cur: &mut Cursor<&[u8]>) -> Result<u64, AutomataError> {
    leb128::read::unsigned(cur).map_err(|e| AutomataError::Encoding(e.to_string()))
}

fn read_u32(cur: &mut Cursor<&[u8]>) -> Result<u32, AutomataError> {
    u32::try_from(read_u64(cur)?).map_err(|_| enc_err("integer exceeds 32 bits"))
}

/// A count can never exceed the remaining byte budget; guards huge allocations.
fn read_count(cur: &mut Cursor<&[u8]>, total: usize) -> Result<usize, AutomataError> {
    let n = read_u64(cur)?;
    if n > total as u64 {
        return Err(enc_err("count exceeds payload size"));
    }
    Ok(n as usize)
}

fn read_text(cur: &mut Cursor<&[u8]>) -> Result<String, AutomataError> {
    let len = read_count(cur, cur.get_ref().len())?;
    let mut buf = vec![0u8; len];
    cur.read_exact(&mut buf).map_err(|_| enc_err("truncated name"))?;
    String::from_utf8(buf).map_err(|_| enc_err("name is not UTF-8"))
}
