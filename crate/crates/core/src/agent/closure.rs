//! Empirical probes of operational closure: sensitivity of the environment
//! update to small perturbations, and return of the agent to a core set.

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use super::coupled::{advance, StateOf};
use super::{Agent, EcaEnvironment, Environment, ModelError};
use crate::automata::EcaRow;
use crate::canonical::Canonical;
use crate::predict::state_distance;
use crate::seeds::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    /// Largest number of flipped cells in a perturbation.
    pub radius: usize,
    /// `radius` expressed in the normalized distance.
    pub delta: f64,
    pub trials: u64,
    /// Max observed output distance.
    pub eps_hat: f64,
}

/// Samples `trials` perturbations `e'` of `e` flipping between 1 and
/// `radius` distinct cells and reports the largest
/// `state_distance(T_S(e), T_S(e'))`.
pub fn perturbation_sensitivity(
    ts: &dyn Fn(&EcaRow) -> Result<EcaRow, ModelError>,
    e: &EcaRow,
    radius: usize,
    trials: u64,
    seed: u64,
) -> Result<SensitivityReport, ModelError> {
    let width = e.width();
    if radius == 0 || radius > width {
        return Err(ModelError::InvalidArgument(format!("radius must be in 1..={width}, got {radius}")));
    }
    let mut rng = rng_for(seed, &[0x5e75]);
    let base = ts(e)?.canonical_bytes();
    let mut eps_hat: f64 = 0.0;
    for _ in 0..trials {
        let k = rng.random_range(1..=radius);
        let mut perturbed = e.clone();
        for i in sample(&mut rng, width, k) {
            perturbed.flip(i);
        }
        eps_hat = eps_hat.max(state_distance(&base, &ts(&perturbed)?.canonical_bytes()));
    }
    let delta = state_distance(&e.canonical_bytes(), &{
        let mut far = e.clone();
        (0..radius).for_each(|i| far.flip(i));
        far.canonical_bytes()
    });
    Ok(SensitivityReport { radius, delta, trials, eps_hat })
}

/// `e ↦ T_E(e, O_A(s))`: the environment half of the coupled map with the
/// agent state held fixed.
pub fn env_update_map<'a, A>(
    agent: &'a A,
    env: &'a EcaEnvironment,
    s: &'a A::State,
) -> impl Fn(&EcaRow) -> Result<EcaRow, ModelError> + 'a
where
    A: Agent<EcaEnvironment>,
{
    move |e: &EcaRow| env.transition(e.clone(), &agent.act(s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum StabilityOutcome {
    ReturnTime { t: u64 },
    Diverged { horizon: u64 },
}

/// Applies `perturb` to the agent state of `s0`, then runs the coupled
/// dynamics until the agent re-enters `core` or `horizon` steps pass.
pub fn core_stability_probe<A, E>(
    agent: &A,
    env: &E,
    core: &dyn Fn(&A::State) -> bool,
    s0: StateOf<A, E>,
    perturb: &dyn Fn(A::State) -> A::State,
    horizon: u64,
) -> Result<StabilityOutcome, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    if !core(&s0.agent) {
        return Err(ModelError::InvalidArgument(format!("initial agent state {} is outside the core", s0.agent)));
    }
    let mut cs = s0;
    cs.agent = perturb(cs.agent);
    for t in 0..=horizon {
        if core(&cs.agent) {
            return Ok(StabilityOutcome::ReturnTime { t });
        }
        if t < horizon {
            cs = advance(agent, env, cs)?.next;
        }
    }
    Ok(StabilityOutcome::Diverged { horizon })
}
