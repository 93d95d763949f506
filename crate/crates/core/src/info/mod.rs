//! Plug-in entropy and mutual-information estimators over coupled traces, and
//! compression-based complexity curves.
//!
//! Estimators are maximum likelihood with no bias correction. States are
//! first reduced to symbols by a [`CoarseGrainer`]; symbols are interned in
//! order of first appearance so every sum runs in a fixed order and results
//! are bit-for-bit reproducible.

mod curve;
mod lzmw;

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{CoupledTrace, EnvHook};
use crate::automata::EcaRow;
use crate::canonical::Canonical;
use crate::seeds::rng_for;

pub use curve::{
    complexity_curve, irreducibility_score, least_squares, write_curve_csv, ComplexityCurve, KhatPoint, C_SLACK_BITS,
    SLOPE_FLOOR,
};
pub use lzmw::Lzmw;

#[derive(Debug, thiserror::Error)]
pub enum InfoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("corrupt compressed stream: {0}")]
    Corrupt(String),
}

/// Output of a [`Compressor`]: the packed stream and its exact length in bits
/// before byte padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compressed {
    pub bits: u64,
    pub bytes: Vec<u8>,
}

/// Any lossless coder. `decompress(compress(x).bytes) == x` must hold.
pub trait Compressor: Send + Sync {
    fn id(&self) -> String;
    fn compress(&self, data: &[u8]) -> Compressed;
    fn decompress(&self, data: &[u8]) -> Result<Vec<u8>, InfoError>;
}

/// Compressed length in bits under the built-in coder.
pub fn compress_bound(payload: &[u8]) -> u64 {
    Lzmw::default().compress(payload).bits
}

const fn default_k() -> u32 {
    8
}

/// Reduces a state's canonical bytes to a symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoarseGrainer {
    Identity,
    /// Top `k` bits of the SHA-256 of the canonical bytes.
    HashToKBits {
        #[serde(default = "default_k")]
        k: u32,
    },
    /// Bits `start..start+len` of the canonical bytes, least significant bit
    /// of each byte first. For ECA rows bit `i` is cell `i`.
    WindowProjection {
        start: usize,
        len: usize,
    },
}

impl Default for CoarseGrainer {
    fn default() -> Self {
        CoarseGrainer::HashToKBits { k: default_k() }
    }
}

impl CoarseGrainer {
    pub fn validate(&self) -> Result<(), InfoError> {
        match *self {
            CoarseGrainer::Identity => Ok(()),
            CoarseGrainer::HashToKBits { k } if (1..=64).contains(&k) => Ok(()),
            CoarseGrainer::WindowProjection { len, .. } if (1..=64).contains(&len) => Ok(()),
            ref g => Err(InfoError::InvalidInput(format!("grain {} needs a width in 1..=64", g.id()))),
        }
    }

    pub fn id(&self) -> String {
        match *self {
            CoarseGrainer::Identity => "identity".into(),
            CoarseGrainer::HashToKBits { k } => format!("hash-{k}"),
            CoarseGrainer::WindowProjection { start, len } => format!("window-{start}+{len}"),
        }
    }

    pub fn symbol(&self, bytes: &[u8]) -> Vec<u8> {
        match *self {
            CoarseGrainer::Identity => bytes.to_vec(),
            CoarseGrainer::HashToKBits { k } => {
                let digest = Sha256::digest(bytes);
                let head = u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"));
                (head >> (64 - k)).to_le_bytes().to_vec()
            }
            CoarseGrainer::WindowProjection { start, len } => {
                let mut v = 0u64;
                for j in 0..len {
                    let bit = start + j;
                    let b = bytes.get(bit / 8).map_or(0, |byte| (byte >> (bit % 8)) & 1);
                    v |= u64::from(b) << j;
                }
                v.to_le_bytes().to_vec()
            }
        }
    }
}

/// Maps values to dense ids in order of first appearance.
fn intern<T: Eq + Hash + Clone>(values: impl IntoIterator<Item = T>) -> (Vec<u32>, usize) {
    let mut ids: HashMap<T, u32> = HashMap::new();
    let seq = values
        .into_iter()
        .map(|v| {
            let next = ids.len() as u32;
            *ids.entry(v).or_insert(next)
        })
        .collect();
    (seq, ids.len())
}

fn entropy_of_counts(counts: &[u64], n: u64) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        // p·log2(1/p) rather than −p·log2(p) keeps a certain outcome at +0
        .map(|&c| c as f64 / n * (n / c as f64).log2())
        .sum()
}

fn entropy_of_ids(ids: &[u32], alphabet: usize) -> f64 {
    let mut counts = vec![0u64; alphabet];
    ids.iter().for_each(|&i| counts[i as usize] += 1);
    entropy_of_counts(&counts, ids.len() as u64)
}

/// Plug-in Shannon entropy in bits.
pub fn empirical_entropy<T: Eq + Hash + Clone>(symbols: &[T]) -> Result<f64, InfoError> {
    if symbols.is_empty() {
        return Err(InfoError::InvalidInput("entropy of an empty sequence".into()));
    }
    let (ids, k) = intern(symbols.iter().cloned());
    Ok(entropy_of_ids(&ids, k))
}

/// Plug-in `H(Y | X)`, computed group by group so that a `Y` determined by
/// `X` gives exactly zero.
pub fn conditional_entropy<X, Y>(xs: &[X], ys: &[Y]) -> Result<f64, InfoError>
where
    X: Eq + Hash + Clone,
    Y: Eq + Hash + Clone,
{
    check_paired(xs.len(), ys.len())?;
    let (xi, nx) = intern(xs.iter().cloned());
    let (yi, ny) = intern(ys.iter().cloned());
    Ok(conditional_of_ids(&xi, nx, &yi, ny))
}

fn conditional_of_ids(xi: &[u32], nx: usize, yi: &[u32], _ny: usize) -> f64 {
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); nx];
    for (&x, &y) in xi.iter().zip(yi) {
        groups[x as usize].push(y);
    }
    let n = xi.len() as f64;
    groups
        .iter()
        .map(|g| {
            let (ids, k) = intern(g.iter().copied());
            g.len() as f64 / n * entropy_of_ids(&ids, k)
        })
        .sum()
}

/// Plug-in `I(X; Y) = H(Y) − H(Y | X)`, clamped at zero.
pub fn mutual_information<X, Y>(xs: &[X], ys: &[Y]) -> Result<f64, InfoError>
where
    X: Eq + Hash + Clone,
    Y: Eq + Hash + Clone,
{
    check_paired(xs.len(), ys.len())?;
    let (xi, nx) = intern(xs.iter().cloned());
    let (yi, ny) = intern(ys.iter().cloned());
    Ok((entropy_of_ids(&yi, ny) - conditional_of_ids(&xi, nx, &yi, ny)).max(0.0))
}

fn check_paired(a: usize, b: usize) -> Result<(), InfoError> {
    if a != b {
        return Err(InfoError::InvalidInput(format!("paired sequences differ in length: {a} vs {b}")));
    }
    if a == 0 {
        return Err(InfoError::InvalidInput("no samples".into()));
    }
    Ok(())
}

fn check_trace_len(n: usize) -> Result<(), InfoError> {
    if n < 2 {
        return Err(InfoError::InvalidInput(format!("need a trace of at least 2 records, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub bits: f64,
    pub samples: u64,
    pub grain: String,
}

/// `H(S_E(t+1) | S_E(t), O_A(t))` over consecutive trace records. Actions
/// are never coarse-grained.
pub fn environment_conditional_entropy<SA, SE, I, O>(
    trace: &CoupledTrace<SA, SE, I, O>,
    grain: &CoarseGrainer,
) -> Result<EntropyReport, InfoError>
where
    SE: Canonical,
    O: Canonical,
{
    grain.validate()?;
    check_trace_len(trace.len())?;
    let env: Vec<Vec<u8>> = trace.records.iter().map(|r| grain.symbol(&r.env.canonical_bytes())).collect();
    let given: Vec<(Vec<u8>, Vec<u8>)> =
        trace.records.iter().zip(&env).map(|(r, e)| (e.clone(), r.action.canonical_bytes())).collect();
    let n = trace.len() - 1;
    Ok(EntropyReport { bits: conditional_entropy(&given[..n], &env[1..])?, samples: n as u64, grain: grain.id() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiReport {
    /// `I(S_A(t); S_E(t+1))`
    pub i_agent_to_env: f64,
    /// `I(S_E(t); S_A(t+1))`
    pub i_env_to_agent: f64,
    /// `i_agent_to_env − i_env_to_agent`
    pub autonomy_index: f64,
    pub samples: u64,
    pub grain: String,
}

/// Lagged mutual information in both directions. The same grain is applied
/// to agent and environment states.
pub fn autonomy_index<SA, SE, I, O>(
    trace: &CoupledTrace<SA, SE, I, O>,
    grain: &CoarseGrainer,
) -> Result<MiReport, InfoError>
where
    SA: Canonical,
    SE: Canonical,
{
    grain.validate()?;
    check_trace_len(trace.len())?;
    let a: Vec<Vec<u8>> = trace.records.iter().map(|r| grain.symbol(&r.agent.canonical_bytes())).collect();
    let e: Vec<Vec<u8>> = trace.records.iter().map(|r| grain.symbol(&r.env.canonical_bytes())).collect();
    let n = trace.len() - 1;
    let i_agent_to_env = mutual_information(&a[..n], &e[1..])?;
    let i_env_to_agent = mutual_information(&e[..n], &a[1..])?;
    Ok(MiReport {
        i_agent_to_env,
        i_env_to_agent,
        autonomy_index: i_agent_to_env - i_env_to_agent,
        samples: n as u64,
        grain: grain.id(),
    })
}

/// Environment hook that XORs a fair coin into one cell after every
/// transition.
#[derive(Debug, Clone)]
pub struct CoinFlipNoise {
    cell: usize,
    rng: ChaCha8Rng,
}

impl CoinFlipNoise {
    pub fn new(cell: usize, seed: u64) -> Self {
        Self { cell, rng: rng_for(seed, &[0xc01f]) }
    }
}

impl EnvHook<EcaRow> for CoinFlipNoise {
    fn after_transition(&mut self, _t: u64, env: &mut EcaRow) {
        if self.rng.random::<bool>() {
            env.flip(self.cell % env.width());
        }
    }
}
