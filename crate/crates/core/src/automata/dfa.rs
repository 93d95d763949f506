//! Deterministic finite automata and their decidable questions.
//!
//! Neither decider takes a budget: both finish after at most one scan of every
//! edge reachable from the query state, O(|Q|·|Σ|) work.

use rand::Rng;

use super::AutomataError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    n_states: usize,
    n_symbols: usize,
    // delta[q * n_symbols + a]
    delta: Vec<u32>,
    start: u32,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn new(
        n_states: usize,
        n_symbols: usize,
        delta: Vec<u32>,
        start: u32,
        accepting: &[u32],
    ) -> Result<Self, AutomataError> {
        if n_states == 0 || n_symbols == 0 {
            return Err(AutomataError::InvalidInput("a DFA needs at least one state and one symbol".into()));
        }
        if delta.len() != n_states * n_symbols {
            return Err(AutomataError::InvalidInput(format!(
                "transition table has {} entries, expected |Q|·|Σ| = {}",
                delta.len(),
                n_states * n_symbols
            )));
        }
        if let Some(bad) = delta.iter().find(|&&q| q as usize >= n_states) {
            return Err(AutomataError::UnknownState(*bad));
        }
        if start as usize >= n_states {
            return Err(AutomataError::UnknownState(start));
        }
        let mut acc = vec![false; n_states];
        for &q in accepting {
            *acc.get_mut(q as usize).ok_or(AutomataError::UnknownState(q))? = true;
        }
        Ok(Self { n_states, n_symbols, delta, start, accepting: acc })
    }

    /// Random total DFA. `locality` > 0 confines each edge to a window of
    /// states around its source, which yields disconnected regions often.
    pub fn random(
        n_states: usize,
        n_symbols: usize,
        locality: Option<usize>,
        accept_prob: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let delta = (0..n_states * n_symbols)
            .map(|i| {
                let q = i / n_symbols;
                match locality {
                    Some(w) => {
                        let lo = q.saturating_sub(w);
                        let hi = (q + w).min(n_states - 1);
                        // half the edges are self-loops, which keeps regions apart
                        if rng.random_bool(0.5) {
                            q as u32
                        } else {
                            rng.random_range(lo..=hi) as u32
                        }
                    }
                    None => rng.random_range(0..n_states) as u32,
                }
            })
            .collect();
        let accepting: Vec<u32> = (0..n_states as u32).filter(|_| rng.random_bool(accept_prob)).collect();
        let start = rng.random_range(0..n_states) as u32;
        Self::new(n_states, n_symbols, delta, start, &accepting).expect("generated DFA is well formed")
    }

    pub fn state_count(&self) -> usize {
        self.n_states
    }

    pub fn symbol_count(&self) -> usize {
        self.n_symbols
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn is_accepting(&self, q: u32) -> bool {
        self.accepting.get(q as usize).copied().unwrap_or(false)
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = u32> + '_ {
        self.accepting.iter().enumerate().filter(|(_, &a)| a).map(|(q, _)| q as u32)
    }

    pub fn next(&self, q: u32, symbol: u32) -> u32 {
        self.delta[q as usize * self.n_symbols + symbol as usize]
    }

    /// δ* over a word.
    pub fn run(&self, from: u32, word: &[u32]) -> u32 {
        word.iter().fold(from, |q, &a| self.next(q, a))
    }

    pub fn accepts(&self, word: &[u32]) -> bool {
        self.is_accepting(self.run(self.start, word))
    }

    fn check_state(&self, q: u32) -> Result<(), AutomataError> {
        if (q as usize) < self.n_states {
            Ok(())
        } else {
            Err(AutomataError::UnknownState(q))
        }
    }

    /// States reachable from `from` (including itself), by depth-first search.
    pub fn reachable_from(&self, from: u32) -> Result<Vec<bool>, AutomataError> {
        self.check_state(from)?;
        let mut seen = vec![false; self.n_states];
        let mut stack = vec![from];
        seen[from as usize] = true;
        while let Some(q) = stack.pop() {
            let row = &self.delta[q as usize * self.n_symbols..(q as usize + 1) * self.n_symbols];
            for &r in row {
                if !seen[r as usize] {
                    seen[r as usize] = true;
                    stack.push(r);
                }
            }
        }
        Ok(seen)
    }
}

/// Whether some word drives `q1` to `q2`.
pub fn dfa_reachable(dfa: &Dfa, q1: u32, q2: u32) -> Result<bool, AutomataError> {
    dfa.check_state(q2)?;
    Ok(dfa.reachable_from(q1)?[q2 as usize])
}

/// Whether the accepted language is empty.
pub fn dfa_language_empty(dfa: &Dfa) -> bool {
    let seen = dfa.reachable_from(dfa.start).expect("start state is valid");
    !seen.iter().zip(&dfa.accepting).any(|(&r, &a)| r && a)
}
