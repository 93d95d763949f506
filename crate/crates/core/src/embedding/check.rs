//! Lockstep comparison of an embedded machine against direct simulation.
//!
//! State, head and step counters are compared at every step. Tapes are
//! compared by fingerprint and cell count at every step and cell by cell at
//! t = 0, at every power of two, and at the final step.

use serde::Serialize;

use super::{build_embedded_machine, EmbeddedState, EmbeddedSystem, EmbeddingError};
use crate::agent::{advance, Agent};
use crate::automata::{tm_run_bounded, Symbol, TapeConfiguration, TuringMachine, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub step: u64,
    pub reason: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub passed: bool,
    pub budget: u64,
    pub steps_checked: u64,
    /// First step at which the direct machine is halted.
    pub halting_step: Option<u64>,
    /// First step at which the halting property holds on the embedding.
    pub embedded_halting_step: Option<u64>,
    pub verdict: Option<Verdict>,
    pub divergence: Option<Divergence>,
}

pub fn embedding_equivalence_check(
    tm: &TuringMachine,
    input: &[Symbol],
    budget: u64,
) -> Result<EquivalenceReport, EmbeddingError> {
    equivalence_check_system(&build_embedded_machine(tm, input)?, budget)
}

fn describe_cfg(tm: &TuringMachine, cfg: &TapeConfiguration) -> String {
    let cells: Vec<String> = cfg.tape.cells().map(|(i, s)| format!("{i}:{}", tm.symbol_name(s))).collect();
    format!("t={} q={} head={} tape=[{}]", cfg.steps_elapsed, tm.state_name(cfg.state), cfg.head, cells.join(","))
}

fn describe_embedded(sys: &EmbeddedSystem, cs: &EmbeddedState) -> String {
    match sys.decode(cs) {
        Ok(cfg) => describe_cfg(&sys.machine, &cfg),
        Err(e) => format!("t={} undecodable: {e}", cs.t),
    }
}

fn compare(sys: &EmbeddedSystem, cfg: &TapeConfiguration, cs: &EmbeddedState, exact: bool) -> Option<String> {
    if cs.t != cfg.steps_elapsed {
        return Some(format!("step counters differ: {} coupled vs {} direct", cs.t, cfg.steps_elapsed));
    }
    match sys.map.decode_state(cs.agent.control) {
        Ok(q) if q == cfg.state => {}
        Ok(q) => {
            return Some(format!(
                "state {} decoded, expected {}",
                sys.machine.state_name(q),
                sys.machine.state_name(cfg.state)
            ))
        }
        Err(e) => return Some(e.to_string()),
    }
    if cs.env.head != cfg.head {
        return Some(format!("head at {}, expected {}", cs.env.head, cfg.head));
    }
    let tapes_match = if exact { cs.env.tape == cfg.tape } else { cs.env.tape.likely_equal(&cfg.tape) };
    if !tapes_match {
        return Some("tape contents differ".into());
    }
    if cs.agent.current != cs.env.tape.read(cs.env.head) {
        return Some("agent's cached symbol disagrees with the cell under the head".into());
    }
    None
}

pub fn equivalence_check_system(sys: &EmbeddedSystem, budget: u64) -> Result<EquivalenceReport, EmbeddingError> {
    if budget == 0 {
        return Err(EmbeddingError::Automata(crate::automata::AutomataError::InvalidInput(
            "budget must be at least 1".into(),
        )));
    }
    let tm = &*sys.machine;
    let p_halt = sys.halting_property();
    let mut cfg = tm.initial_configuration(&sys.input)?;
    let mut cs = sys.s0.clone();
    let mut embedded_halting_step = None;
    let mut halting_step = None;
    let mut verdict = None;
    let diverge = |step: u64, reason: String, cfg: &TapeConfiguration, cs: &EmbeddedState| Divergence {
        step,
        reason,
        expected: describe_cfg(tm, cfg),
        actual: describe_embedded(sys, cs),
    };

    let mut t = 0u64;
    let divergence = loop {
        let halted = tm.halting_verdict(cfg.state);
        let last = halted.is_some() || t == budget;
        let exact = last || t == 0 || t.is_power_of_two();
        if let Some(reason) = compare(sys, &cfg, &cs, exact) {
            break Some(diverge(t, reason, &cfg, &cs));
        }
        if embedded_halting_step.is_none() && p_halt(&cs.agent, &cs.env) {
            embedded_halting_step = Some(t);
        }
        if embedded_halting_step.is_some() != halted.is_some() {
            break Some(diverge(t, "halting property disagrees with the direct run".into(), &cfg, &cs));
        }
        if let Some(v) = halted {
            halting_step = Some(t);
            verdict = Some(v);
            if sys.agent.goal(&cs.agent, &cs.env) != (v == Verdict::Accept) {
                break Some(diverge(t, "goal set disagrees with the verdict".into(), &cfg, &cs));
            }
            break None;
        }
        if last {
            break None;
        }
        tm.advance(&mut cfg)?;
        cs = advance(&sys.agent, &sys.env, cs)?.next;
        t += 1;
    };

    // an independent bounded run must report the same halting step
    let divergence = divergence.or_else(|| {
        let direct = tm_run_bounded(tm, &sys.input, budget).ok()?.halting_step();
        (direct != halting_step).then(|| Divergence {
            step: t,
            reason: format!("bounded run halts at {direct:?}, lockstep at {halting_step:?}"),
            expected: String::new(),
            actual: String::new(),
        })
    });

    Ok(EquivalenceReport {
        passed: divergence.is_none(),
        budget,
        steps_checked: t,
        halting_step,
        embedded_halting_step,
        verdict,
        divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{from_standard_text, StateId};

    #[test]
    fn corrupted_phi_is_caught_when_the_state_is_entered() {
        // B is first entered at step 1
        let tm = from_standard_text("1RB1LB_1LA1RZ").unwrap();
        let mut sys = build_embedded_machine(&tm, &[]).unwrap();
        let phi_a = sys.map.phi(StateId(0));
        sys.corrupt_agent_phi(StateId(1), phi_a);
        let report = equivalence_check_system(&sys, 100).unwrap();
        assert!(!report.passed);
        let d = report.divergence.unwrap();
        assert_eq!(d.step, 1);
        assert!(d.reason.contains("state A decoded, expected B"), "{}", d.reason);
    }

    #[test]
    fn unknown_control_is_reported() {
        let tm = from_standard_text("1RB1LB_1LA1RZ").unwrap();
        let mut sys = build_embedded_machine(&tm, &[]).unwrap();
        sys.corrupt_agent_phi(StateId(2), 999);
        let d = equivalence_check_system(&sys, 100).unwrap().divergence.unwrap();
        assert_eq!(d.step, 6);
    }

    #[test]
    fn machine_without_transitions_passes() {
        let tm = from_standard_text("------").unwrap();
        let report = embedding_equivalence_check(&tm, &[], 10).unwrap();
        assert!(report.passed);
        assert_eq!(report.halting_step, Some(1));
        assert_eq!(report.verdict, Some(Verdict::Reject));

        let mut parts = tm.parts();
        parts.start = parts.accept;
        let at_accept = TuringMachine::new(parts).unwrap();
        let report = embedding_equivalence_check(&at_accept, &[], 10).unwrap();
        assert!(report.passed);
        assert_eq!(report.steps_checked, 0);
        assert_eq!(report.halting_step, Some(0));
    }

    #[test]
    fn non_halting_runs_to_budget() {
        let tm = from_standard_text("1LB0RB_1RA0LA").unwrap();
        let report = embedding_equivalence_check(&tm, &[], 1000).unwrap();
        assert!(report.passed);
        assert_eq!(report.steps_checked, 1000);
        assert_eq!(report.halting_step, None);
    }
}
