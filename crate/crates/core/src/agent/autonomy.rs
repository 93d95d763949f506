//! Bounded witness search for the three autonomy conditions.
//!
//! Each condition is existential, so a search can only ever produce a witness
//! or run out of budget. A condition is reported proven false only when the
//! declared structure rules every witness out (a singleton state space, or an
//! undeclared generative component).

use rand::RngCore;
use serde::Serialize;

use super::coupled::{coupled_step, CoupledState};
use super::{Agent, Environment, ModelError};
use crate::canonical::short_hash;
use crate::seeds::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionStatus {
    Witnessed,
    NoWitnessWithinBudget,
    ProvenFalse,
}

impl std::fmt::Display for ConditionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConditionStatus::Witnessed => "witnessed",
            ConditionStatus::NoWitnessWithinBudget => "no-witness-within-budget",
            ConditionStatus::ProvenFalse => "proven-false",
        })
    }
}

impl ConditionStatus {
    pub fn holds(self) -> bool {
        self == ConditionStatus::Witnessed
    }
}

/// Two coupled states started side by side. What must differ between their
/// successors depends on the condition.
#[derive(Debug, Clone, PartialEq)]
pub struct PairWitness<SA, SE> {
    pub first: CoupledState<SA, SE>,
    pub second: CoupledState<SA, SE>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult<W> {
    pub status: ConditionStatus,
    pub witness: Option<W>,
    pub evidence: String,
    pub probes: u64,
}

impl<W> ConditionResult<W> {
    pub fn holds(&self) -> bool {
        self.status.holds()
    }

    fn proven_false(evidence: impl Into<String>) -> Self {
        Self { status: ConditionStatus::ProvenFalse, witness: None, evidence: evidence.into(), probes: 0 }
    }

    fn exhausted(probes: u64) -> Self {
        Self {
            status: ConditionStatus::NoWitnessWithinBudget,
            witness: None,
            evidence: format!("no witness found within budget of {probes} probes"),
            probes,
        }
    }
}

/// Condition 3 needs both directions of the coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingWitness<SA, SE> {
    /// Same agent state, environments whose inputs differ.
    pub perception: PairWitness<SA, SE>,
    /// Same environment, agent states whose actions yield different environments.
    pub action: PairWitness<SA, SE>,
}

type PairResult<SA, SE> = ConditionResult<PairWitness<SA, SE>>;
type CouplingResult<SA, SE> = ConditionResult<CouplingWitness<SA, SE>>;

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomyReport<SA, SE> {
    pub internal_state_independence: ConditionResult<PairWitness<SA, SE>>,
    pub generative: ConditionResult<PairWitness<SA, SE>>,
    pub coupling: ConditionResult<CouplingWitness<SA, SE>>,
    pub probe_budget: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub holds: bool,
    pub status: ConditionStatus,
    pub evidence: String,
    pub probes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutonomySummary {
    pub internal_state_independence: ConditionSummary,
    pub generative: ConditionSummary,
    pub coupling: ConditionSummary,
    pub probe_budget: u64,
    pub seed: u64,
}

impl<SA, SE> AutonomyReport<SA, SE> {
    pub fn summary(&self) -> AutonomySummary {
        fn s<W>(c: &ConditionResult<W>) -> ConditionSummary {
            ConditionSummary { holds: c.holds(), status: c.status, evidence: c.evidence.clone(), probes: c.probes }
        }
        AutonomySummary {
            internal_state_independence: s(&self.internal_state_independence),
            generative: s(&self.generative),
            coupling: s(&self.coupling),
            probe_budget: self.probe_budget,
            seed: self.seed,
        }
    }
}

fn describe<SA: std::fmt::Display, SE: crate::canonical::Canonical>(cs: &CoupledState<SA, SE>) -> String {
    format!("(s_A={}, s_E#{})", cs.agent, short_hash(&cs.env.canonical_bytes()))
}

/// Searches for witnesses of the three conditions using at most
/// `probe_budget` sampled pairs per condition.
pub fn check_autonomy_conditions<A, E>(
    agent: &A,
    env: &E,
    probe_budget: u64,
    seed: u64,
) -> Result<AutonomyReport<A::State, E::State>, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    if probe_budget == 0 {
        return Err(ModelError::InvalidArgument("probe budget must be at least 1".into()));
    }
    let singleton = agent.state_space().is_singleton();

    let internal_state_independence = if singleton {
        ConditionResult::proven_false("agent state space is a singleton; no two states can differ")
    } else {
        search_pairs(
            agent,
            env,
            probe_budget,
            &mut rng_for(seed, &[1]),
            |a, e, rng| {
                let env_state = e.sample_state(rng);
                let first = CoupledState::initial(a.sample_state(rng), env_state.clone());
                let second = CoupledState::initial(a.sample_state(rng), env_state);
                (first.agent != second.agent).then_some(PairWitness { first, second })
            },
            |a, e, w| agent_successors_differ(a, e, w),
        )?
    };

    let generative = if !agent.declares_generative() {
        ConditionResult::proven_false("agent declares no state-dependent generative component")
    } else if singleton {
        ConditionResult::proven_false("agent state space is a singleton; g cannot vary")
    } else {
        search_pairs(
            agent,
            env,
            probe_budget,
            &mut rng_for(seed, &[2]),
            |a, e, rng| {
                let env_state = e.sample_state(rng);
                let first = CoupledState::initial(a.sample_state(rng), env_state.clone());
                let second = CoupledState::initial(a.sample_state(rng), env_state);
                (first.agent != second.agent).then_some(PairWitness { first, second })
            },
            |a, _e, w| generative_differs(a, w),
        )?
    };

    let coupling = search_coupling(agent, env, probe_budget, singleton, &mut rng_for(seed, &[3]))?;

    Ok(AutonomyReport { internal_state_independence, generative, coupling, probe_budget, seed })
}

fn search_pairs<A, E, G, C>(
    agent: &A,
    env: &E,
    budget: u64,
    rng: &mut dyn RngCore,
    mut propose: G,
    check: C,
) -> Result<PairResult<A::State, E::State>, ModelError>
where
    E: Environment,
    A: Agent<E>,
    G: FnMut(&A, &E, &mut dyn RngCore) -> Option<PairWitness<A::State, E::State>>,
    C: Fn(&A, &E, &PairWitness<A::State, E::State>) -> Result<bool, ModelError>,
{
    for probe in 1..=budget {
        if let Some(w) = propose(agent, env, rng) {
            if check(agent, env, &w)? {
                let evidence =
                    format!("{} and {} share input, successors differ", describe(&w.first), describe(&w.second));
                return Ok(ConditionResult {
                    status: ConditionStatus::Witnessed,
                    witness: Some(w),
                    evidence,
                    probes: probe,
                });
            }
        }
    }
    Ok(ConditionResult::exhausted(budget))
}

fn search_coupling<A, E>(
    agent: &A,
    env: &E,
    budget: u64,
    singleton: bool,
    rng: &mut dyn RngCore,
) -> Result<CouplingResult<A::State, E::State>, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    let mut perception = None;
    let mut action = None;
    let mut used = 0;
    for probe in 1..=budget {
        used = probe;
        if perception.is_none() {
            let s = agent.sample_state(rng);
            let w = PairWitness {
                first: CoupledState::initial(s.clone(), env.sample_state(rng)),
                second: CoupledState::initial(s, env.sample_state(rng)),
            };
            if perception_differs(agent, env, &w)? {
                perception = Some(w);
            }
        }
        if action.is_none() && !singleton {
            let e = env.sample_state(rng);
            let w = PairWitness {
                first: CoupledState::initial(agent.sample_state(rng), e.clone()),
                second: CoupledState::initial(agent.sample_state(rng), e),
            };
            if action_alters_env(agent, env, &w)? {
                action = Some(w);
            }
        }
        if perception.is_some() && action.is_some() {
            break;
        }
    }
    Ok(match (perception, action) {
        (Some(p), Some(a)) => {
            let evidence = format!(
                "input differs between {} and {}; action of {} vs {} changes s_E",
                describe(&p.first),
                describe(&p.second),
                describe(&a.first),
                describe(&a.second)
            );
            ConditionResult {
                status: ConditionStatus::Witnessed,
                witness: Some(CouplingWitness { perception: p, action: a }),
                evidence,
                probes: used,
            }
        }
        (_, None) if singleton => ConditionResult::proven_false(
            "agent state space is a singleton; O_A is constant so the action channel is inert",
        ),
        (p, a) => {
            let mut c = ConditionResult::exhausted(budget);
            let missing: Vec<&str> =
                [p.is_none().then_some("perception"), a.is_none().then_some("action")].into_iter().flatten().collect();
            c.evidence = format!("{}; channel(s) never exercised: {}", c.evidence, missing.join(", "));
            c
        }
    })
}

fn agent_successors_differ<A, E>(agent: &A, env: &E, w: &PairWitness<A::State, E::State>) -> Result<bool, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    let a = coupled_step(agent, env, &w.first)?;
    let b = coupled_step(agent, env, &w.second)?;
    Ok(a.input == b.input && w.first.agent != w.second.agent && a.next.agent != b.next.agent)
}

fn generative_differs<A, E>(agent: &A, w: &PairWitness<A::State, E::State>) -> Result<bool, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    let i1 = agent.perceive(&w.first.env);
    let i2 = agent.perceive(&w.second.env);
    if i1 != i2 {
        return Ok(false);
    }
    Ok(agent.generate(&w.first.agent, &i1)? != agent.generate(&w.second.agent, &i2)?)
}

fn perception_differs<A, E>(agent: &A, env: &E, w: &PairWitness<A::State, E::State>) -> Result<bool, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    let a = coupled_step(agent, env, &w.first)?;
    let b = coupled_step(agent, env, &w.second)?;
    Ok(w.first.agent == w.second.agent && a.input != b.input)
}

fn action_alters_env<A, E>(agent: &A, env: &E, w: &PairWitness<A::State, E::State>) -> Result<bool, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    let a = coupled_step(agent, env, &w.first)?;
    let b = coupled_step(agent, env, &w.second)?;
    Ok(w.first.env == w.second.env && a.action != b.action && a.next.env != b.next.env)
}

/// Re-derives every witnessed condition through [`coupled_step`]. Returns
/// false if any claimed witness fails to reproduce its inequality.
pub fn replay_witnesses<A, E>(
    agent: &A,
    env: &E,
    report: &AutonomyReport<A::State, E::State>,
) -> Result<bool, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    let mut ok = true;
    if report.internal_state_independence.holds() {
        ok &= match &report.internal_state_independence.witness {
            Some(w) => agent_successors_differ(agent, env, w)?,
            None => false,
        };
    }
    if report.generative.holds() {
        ok &= match &report.generative.witness {
            Some(w) => generative_differs(agent, w)? && agent_successors_differ(agent, env, w)?,
            None => false,
        };
    }
    if report.coupling.holds() {
        ok &= match &report.coupling.witness {
            Some(w) => perception_differs(agent, env, &w.perception)? && action_alters_env(agent, env, &w.action)?,
            None => false,
        };
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::families::{CellAction, CounterAgent, EcaEnvironment, ReactiveAgent, TableAgent};

    #[test]
    fn reactive_agent_fails_independence_by_proof() {
        let env = EcaEnvironment::new(110, 16).unwrap();
        let agent = ReactiveAgent::new(0, CellAction::Noop);
        let report = check_autonomy_conditions(&agent, &env, 200, 1).unwrap();
        assert_eq!(report.internal_state_independence.status, ConditionStatus::ProvenFalse);
        assert_eq!(report.generative.status, ConditionStatus::ProvenFalse);
        assert_eq!(report.coupling.status, ConditionStatus::ProvenFalse);
    }

    #[test]
    fn counter_on_rule_110_passes_with_replayable_witnesses() {
        let env = EcaEnvironment::new(110, 16).unwrap();
        let agent = CounterAgent::new(3, true);
        let report = check_autonomy_conditions(&agent, &env, 200, 7).unwrap();
        assert!(report.internal_state_independence.holds());
        assert!(report.generative.holds());
        assert!(report.coupling.holds());
        assert!(replay_witnesses(&agent, &env, &report).unwrap());
    }

    #[test]
    fn inert_action_channel_is_not_witnessed() {
        // rule 0 erases every action, and the agent never acts anyway
        let env = EcaEnvironment::new(0, 16).unwrap();
        let agent = CounterAgent::new(0, false);
        let report = check_autonomy_conditions(&agent, &env, 100, 3).unwrap();
        assert_eq!(report.coupling.status, ConditionStatus::NoWitnessWithinBudget);
        assert!(report.coupling.evidence.contains("action"));
    }

    #[test]
    fn tampered_witness_fails_replay() {
        let env = EcaEnvironment::new(110, 16).unwrap();
        let agent = CounterAgent::new(3, true);
        let mut report = check_autonomy_conditions(&agent, &env, 200, 7).unwrap();
        let w = report.internal_state_independence.witness.as_mut().unwrap();
        w.second.agent = w.first.agent;
        assert!(!replay_witnesses(&agent, &env, &report).unwrap());
    }

    #[test]
    fn clamp_agent_has_no_generative_component() {
        let env = EcaEnvironment::new(110, 16).unwrap();
        let agent = TableAgent::clamp(4, 0).unwrap();
        let report = check_autonomy_conditions(&agent, &env, 50, 1).unwrap();
        assert_eq!(report.generative.status, ConditionStatus::ProvenFalse);
        assert_eq!(report.internal_state_independence.status, ConditionStatus::NoWitnessWithinBudget);
    }

    #[test]
    fn zero_budget_rejected() {
        let env = EcaEnvironment::new(110, 16).unwrap();
        assert!(check_autonomy_conditions(&CounterAgent::new(0, true), &env, 0, 1).is_err());
    }
}
