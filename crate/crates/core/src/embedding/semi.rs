//! Bounded semi-decision of "the coupled system eventually satisfies P".
//!
//! The search enumerates t = 0, 1, … and only ever answers positively. When
//! the budget runs out the answer is `Unknown`, never "no".

use rayon::prelude::*;
use serde::Serialize;

use super::{build_embedded_machine, EmbeddingError};
use crate::agent::{advance, Agent, CoupledState, Environment, ModelError};
use crate::automata::{enumerate_two_state_two_symbol, tm_run_bounded, RunOutcome, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EpKind {
    Reached { t: u64 },
    Unknown { budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpOutcome {
    pub kind: EpKind,
    pub property: String,
    /// Coupled transitions evaluated.
    pub spent: u64,
}

impl EpOutcome {
    pub fn reached(&self) -> Option<u64> {
        match self.kind {
            EpKind::Reached { t } => Some(t),
            EpKind::Unknown { .. } => None,
        }
    }
}

pub fn ep_semi_decide<A, E>(
    agent: &A,
    env: &E,
    s0: CoupledState<A::State, E::State>,
    prop: &dyn Fn(&A::State, &E::State) -> bool,
    property: &str,
    budget: u64,
) -> Result<EpOutcome, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    if budget == 0 {
        return Err(ModelError::InvalidArgument("budget must be at least 1".into()));
    }
    let start = s0.t;
    let mut cs = s0;
    loop {
        let spent = cs.t - start;
        if prop(&cs.agent, &cs.env) {
            return Ok(EpOutcome { kind: EpKind::Reached { t: spent }, property: property.to_string(), spent });
        }
        if spent >= budget {
            return Ok(EpOutcome { kind: EpKind::Unknown { budget }, property: property.to_string(), spent });
        }
        cs = advance(agent, env, cs)?.next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HaltingRow {
    pub machine: String,
    pub budget: u64,
    pub ep: EpKind,
    pub direct_halting_step: Option<u64>,
    pub verdict: Option<Verdict>,
    pub agree: bool,
}

/// Semi-decides halting for every 2-state 2-symbol machine on the blank tape
/// and cross-checks each answer against a direct bounded run.
pub fn halting_sweep(budget: u64) -> Result<Vec<HaltingRow>, EmbeddingError> {
    enumerate_two_state_two_symbol()
        .par_iter()
        .map(|(name, tm)| {
            let sys = build_embedded_machine(tm, &[])?;
            let p = sys.halting_property();
            let ep = ep_semi_decide(&sys.agent, &sys.env, sys.s0.clone(), &p, "halt", budget)?;
            let (direct, verdict) = match tm_run_bounded(tm, &[], budget)? {
                RunOutcome::Halted { at_step, verdict } => (Some(at_step), Some(verdict)),
                RunOutcome::OutOfBudget { .. } => (None, None),
            };
            Ok(HaltingRow {
                machine: name.clone(),
                budget,
                ep: ep.kind,
                direct_halting_step: direct,
                verdict,
                agree: ep.reached() == direct,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::from_standard_text;

    fn semi(text: &str, budget: u64) -> EpOutcome {
        let tm = from_standard_text(text).unwrap();
        let sys = build_embedded_machine(&tm, &[]).unwrap();
        let p = sys.halting_property();
        ep_semi_decide(&sys.agent, &sys.env, sys.s0.clone(), &p, "halt", budget).unwrap()
    }

    #[test]
    fn busy_beaver_reached_at_six() {
        let out = semi("1RB1LB_1LA1RZ", 100);
        assert_eq!(out.kind, EpKind::Reached { t: 6 });
        assert_eq!(out.spent, 6);
    }

    #[test]
    fn looping_machine_stays_unknown() {
        let out = semi("0RA---", 10_000);
        assert_eq!(out.kind, EpKind::Unknown { budget: 10_000 });
        assert_eq!(out.spent, 10_000);
    }

    #[test]
    fn property_at_start_is_reached_at_zero() {
        let tm = from_standard_text("0RA---").unwrap();
        let sys = build_embedded_machine(&tm, &[]).unwrap();
        let out = ep_semi_decide(&sys.agent, &sys.env, sys.s0.clone(), &|_, _| true, "true", 1).unwrap();
        assert_eq!(out.kind, EpKind::Reached { t: 0 });
    }

    #[test]
    fn monotone_in_budget() {
        for budget in [6, 7, 50, 1000] {
            assert_eq!(semi("1RB1LB_1LA1RZ", budget).kind, EpKind::Reached { t: 6 });
        }
        assert_eq!(semi("1RB1LB_1LA1RZ", 5).kind, EpKind::Unknown { budget: 5 });
    }
}
