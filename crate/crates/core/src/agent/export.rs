//! Trace export: a CSV summary and a binary full-state log.
//!
//! Binary log layout (integers unsigned LEB128):
//!
//! ```text
//! "ALT1" seed config_hash_len config_hash record_count
//! per record: t, prop (0 none, 1 false, 2 true), then length-prefixed
//!             canonical bytes of s_A, s_E, i_A, o_A
//! ```

use std::io::Write;

use super::coupled::CoupledTrace;
use crate::canonical::{short_hash, Canonical};

pub const LOG_MAGIC: &[u8; 4] = b"ALT1";

pub const CSV_HEADER: [&str; 6] = ["t", "s_A_hash", "s_E_hash", "i_A", "o_A", "prop"];

fn prop_text(p: Option<bool>) -> &'static str {
    match p {
        None => "",
        Some(true) => "1",
        Some(false) => "0",
    }
}

pub fn write_trace_csv<SA, SE, I, O, W>(trace: &CoupledTrace<SA, SE, I, O>, out: W) -> Result<(), csv::Error>
where
    SA: Canonical,
    SE: Canonical,
    I: std::fmt::Display,
    O: std::fmt::Display,
    W: Write,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.t.to_string(),
            short_hash(&r.agent.canonical_bytes()),
            short_hash(&r.env.canonical_bytes()),
            r.input.to_string(),
            r.action.to_string(),
            prop_text(r.prop).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_log_bytes<SA, SE, I, O>(trace: &CoupledTrace<SA, SE, I, O>) -> Vec<u8>
where
    SA: Canonical,
    SE: Canonical,
    I: Canonical,
    O: Canonical,
{
    let mut out = LOG_MAGIC.to_vec();
    let uint = |out: &mut Vec<u8>, v: u64| {
        leb128::write::unsigned(out, v).expect("vec write");
    };
    let blob = |out: &mut Vec<u8>, bytes: &[u8]| {
        leb128::write::unsigned(out, bytes.len() as u64).expect("vec write");
        out.extend_from_slice(bytes);
    };
    uint(&mut out, trace.seed);
    blob(&mut out, trace.config_hash.as_bytes());
    uint(&mut out, trace.records.len() as u64);
    for r in &trace.records {
        uint(&mut out, r.t);
        out.push(match r.prop {
            None => 0,
            Some(false) => 1,
            Some(true) => 2,
        });
        blob(&mut out, &r.agent.canonical_bytes());
        blob(&mut out, &r.env.canonical_bytes());
        blob(&mut out, &r.input.canonical_bytes());
        blob(&mut out, &r.action.canonical_bytes());
    }
    out
}

/// One decoded record of the binary log, states left as canonical bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub t: u64,
    pub prop: Option<bool>,
    pub agent: Vec<u8>,
    pub env: Vec<u8>,
    pub input: Vec<u8>,
    pub action: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLog {
    pub seed: u64,
    pub config_hash: String,
    pub records: Vec<RawRecord>,
}

pub fn read_trace_log(bytes: &[u8]) -> Result<RawLog, String> {
    let mut cur = std::io::Cursor::new(bytes);
    let mut magic = [0u8; 4];
    std::io::Read::read_exact(&mut cur, &mut magic).map_err(|_| "truncated log".to_string())?;
    if &magic != LOG_MAGIC {
        return Err("bad log magic".into());
    }
    let uint = |cur: &mut std::io::Cursor<&[u8]>| leb128::read::unsigned(cur).map_err(|e| e.to_string());
    let blob = |cur: &mut std::io::Cursor<&[u8]>| -> Result<Vec<u8>, String> {
        let n = leb128::read::unsigned(cur).map_err(|e| e.to_string())? as usize;
        let start = cur.position() as usize;
        let end = start.checked_add(n).filter(|&e| e <= cur.get_ref().len()).ok_or("truncated blob")?;
        cur.set_position(end as u64);
        Ok(cur.get_ref()[start..end].to_vec())
    };
    let seed = uint(&mut cur)?;
    let config_hash = String::from_utf8(blob(&mut cur)?).map_err(|_| "config hash is not UTF-8")?;
    let n = uint(&mut cur)?;
    let mut records = Vec::new();
    for _ in 0..n {
        let t = uint(&mut cur)?;
        let mut flag = [0u8; 1];
        std::io::Read::read_exact(&mut cur, &mut flag).map_err(|_| "truncated record")?;
        let prop = match flag[0] {
            0 => None,
            1 => Some(false),
            2 => Some(true),
            _ => return Err("bad prop flag".into()),
        };
        records.push(RawRecord {
            t,
            prop,
            agent: blob(&mut cur)?,
            env: blob(&mut cur)?,
            input: blob(&mut cur)?,
            action: blob(&mut cur)?,
        });
    }
    if cur.position() as usize != bytes.len() {
        return Err("trailing bytes in log".into());
    }
    Ok(RawLog { seed, config_hash, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::coupled::{run_coupled, CoupledState};
    use crate::agent::families::{CounterAgent, EcaEnvironment};
    use crate::automata::EcaRow;

    fn sample_trace() -> crate::agent::coupled::TraceOf<CounterAgent, EcaEnvironment> {
        let env = EcaEnvironment::new(110, 12).unwrap();
        let agent = CounterAgent::new(2, true);
        let even = |a: &u64, _: &EcaRow| a.is_multiple_of(2);
        run_coupled(
            &agent,
            &env,
            CoupledState::initial(1, EcaRow::parse("000001000000").unwrap()),
            4,
            Some(&even),
            false,
        )
        .unwrap()
        .with_provenance(42, "abc")
    }

    #[test]
    fn csv_has_one_row_per_record() {
        let trace = sample_trace();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,s_A_hash,s_E_hash,i_A,o_A,prop");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("0,") && lines[1].ends_with(",toggle:1,0"));
        assert!(lines[2].ends_with(",toggle:2,1"));
    }

    #[test]
    fn binary_log_round_trips_and_is_deterministic() {
        let trace = sample_trace();
        let bytes = trace_log_bytes(&trace);
        assert_eq!(bytes, trace_log_bytes(&sample_trace()));
        let log = read_trace_log(&bytes).unwrap();
        assert_eq!(log.seed, 42);
        assert_eq!(log.config_hash, "abc");
        assert_eq!(log.records.len(), 5);
        for (raw, r) in log.records.iter().zip(&trace.records) {
            assert_eq!(raw.env, r.env.canonical_bytes());
            assert_eq!(raw.agent, r.agent.canonical_bytes());
            assert_eq!(raw.prop, r.prop);
        }
        assert!(read_trace_log(&bytes[..bytes.len() - 1]).is_err());
    }
}
