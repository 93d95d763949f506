//! Synchronous coupled dynamics:
//!
//! ```text
//! s_A(t+1) = T_A(s_A(t), I_A(s_E(t)))
//! s_E(t+1) = T_E(s_E(t), O_A(s_A(t)))
//! ```
//!
//! Input and action are both extracted from the time-`t` snapshot before
//! either side moves, so evaluation order inside a step cannot leak information.

use serde::Serialize;

use super::{Agent, Environment, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledState<SA, SE> {
    pub agent: SA,
    pub env: SE,
    pub t: u64,
}

impl<SA, SE> CoupledState<SA, SE> {
    pub fn initial(agent: SA, env: SE) -> Self {
        Self { agent, env, t: 0 }
    }
}

/// One step together with the input and action that drove it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<SA, SE, I, O> {
    pub input: I,
    pub action: O,
    pub next: CoupledState<SA, SE>,
}

pub type StateOf<A, E> = CoupledState<<A as Agent<E>>::State, <E as Environment>::State>;
pub type RecordOf<A, E> =
    StepRecord<<A as Agent<E>>::State, <E as Environment>::State, <A as Agent<E>>::Input, <E as Environment>::Action>;

/// Advances `cs` by one step, consuming it.
pub fn advance<A, E>(agent: &A, env: &E, cs: StateOf<A, E>) -> Result<RecordOf<A, E>, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    let input = agent.perceive(&cs.env);
    let action = agent.act(&cs.agent)?;
    let next_agent = agent.transition(&cs.agent, &input)?;
    let next_env = env.transition(cs.env, &action)?;
    Ok(StepRecord { input, action, next: CoupledState { agent: next_agent, env: next_env, t: cs.t + 1 } })
}

/// One step as a pure function of `cs`.
pub fn coupled_step<A, E>(agent: &A, env: &E, cs: &StateOf<A, E>) -> Result<RecordOf<A, E>, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    advance(agent, env, cs.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<SA, SE, I, O> {
    pub t: u64,
    pub agent: SA,
    pub env: SE,
    /// `I_A(s_E(t))`
    pub input: I,
    /// `O_A(s_A(t))`
    pub action: O,
    pub prop: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledTrace<SA, SE, I, O> {
    pub records: Vec<TraceRecord<SA, SE, I, O>>,
    pub first_hit: Option<u64>,
    pub seed: u64,
    pub config_hash: String,
}

pub type TraceOf<A, E> =
    CoupledTrace<<A as Agent<E>>::State, <E as Environment>::State, <A as Agent<E>>::Input, <E as Environment>::Action>;

impl<SA, SE, I, O> CoupledTrace<SA, SE, I, O> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn with_provenance(mut self, seed: u64, config_hash: impl Into<String>) -> Self {
        self.seed = seed;
        self.config_hash = config_hash.into();
        self
    }
}

/// Perturbs the environment after each transition. Noise enters the coupled
/// dynamics only through this hook.
pub trait EnvHook<SE> {
    /// Called with the freshly computed `s_E(t)`.
    fn after_transition(&mut self, t: u64, env: &mut SE);
}

pub struct NoHook;

impl<SE> EnvHook<SE> for NoHook {
    fn after_transition(&mut self, _t: u64, _env: &mut SE) {}
}

pub type Property<'a, SA, SE> = &'a dyn Fn(&SA, &SE) -> bool;

/// Iterates the coupled dynamics for `horizon` steps, recording every state.
pub fn run_coupled<A, E>(
    agent: &A,
    env: &E,
    s0: StateOf<A, E>,
    horizon: u64,
    prop: Option<Property<'_, A::State, E::State>>,
    early_stop: bool,
) -> Result<TraceOf<A, E>, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    run_coupled_with_hook(agent, env, s0, horizon, prop, early_stop, &mut NoHook)
}

pub fn run_coupled_with_hook<A, E>(
    agent: &A,
    env: &E,
    s0: StateOf<A, E>,
    horizon: u64,
    prop: Option<Property<'_, A::State, E::State>>,
    early_stop: bool,
    hook: &mut dyn EnvHook<E::State>,
) -> Result<TraceOf<A, E>, ModelError>
where
    E: Environment,
    A: Agent<E>,
{
    if horizon == 0 {
        return Err(ModelError::InvalidArgument("horizon must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(horizon as usize + 1);
    let mut first_hit = None;
    let mut current = s0;
    loop {
        let holds = prop.map(|p| p(&current.agent, &current.env));
        if holds == Some(true) && first_hit.is_none() {
            first_hit = Some(current.t);
        }
        let input = agent.perceive(&current.env);
        let action = agent.act(&current.agent)?;
        let t = current.t;
        let done = t >= horizon || (early_stop && first_hit.is_some());
        let next = if done {
            None
        } else {
            let next_agent = agent.transition(&current.agent, &input)?;
            let mut next_env = env.transition(current.env.clone(), &action)?;
            hook.after_transition(t + 1, &mut next_env);
            Some(CoupledState { agent: next_agent, env: next_env, t: t + 1 })
        };
        records.push(TraceRecord { t, agent: current.agent, env: current.env, input, action, prop: holds });
        match next {
            Some(n) => current = n,
            None => break,
        }
    }
    Ok(CoupledTrace { records, first_hit, seed: 0, config_hash: String::new() })
}
