//! Seeded instance generation and the canonical small fixtures.
//!
//! Generation is a pure function of the configuration. The generator pins
//! its algorithm so fixtures stay stable: a ChaCha8 stream seeded from the
//! 64-bit seed, quotas and endowment sizes drawn with `gen_range`, and
//! permutations produced by an explicit Fisher-Yates shuffle (`gen_range`
//! over a shrinking prefix). Identical configurations yield identical
//! instances on every platform.

use crate::model::{CapInstance, NetworkInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Network,
    Cap,
}

/// Configuration for one generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub kind: GenKind,
    pub agents: usize,
    /// Upper bound for quotas (network) or endowment sizes (cap); at least 1.
    pub max_share: usize,
    pub seed: u64,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("agent count must be at least 1")]
    NoAgents,
    #[error("max quota / endowment size must be at least 1")]
    ZeroShare,
    #[error("config kind does not match the requested instance family")]
    KindMismatch,
}

fn shuffled(rng: &mut ChaCha8Rng, universe: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..universe).collect();
    for i in (1..universe).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}

/// Quotas uniform in `[1, max_share]` (capped at `n`), preferences
/// independent uniform permutations of the agents.
pub fn random_network_instance(cfg: &GenConfig) -> Result<NetworkInstance, GenError> {
    if cfg.kind != GenKind::Network {
        return Err(GenError::KindMismatch);
    }
    if cfg.agents == 0 {
        return Err(GenError::NoAgents);
    }
    if cfg.max_share == 0 {
        return Err(GenError::ZeroShare);
    }
    let n = cfg.agents;
    let hi = cfg.max_share.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let quotas: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=hi)).collect();
    let preferences: Vec<Vec<usize>> = (0..n).map(|_| shuffled(&mut rng, n)).collect();
    Ok(NetworkInstance::new(quotas, preferences).expect("generated instances are valid"))
}

/// Endowment sizes uniform in `[1, max_share]`, items `0..m` dealt to agents
/// in order, preferences uniform permutations of the items.
pub fn random_cap_instance(cfg: &GenConfig) -> Result<CapInstance, GenError> {
    if cfg.kind != GenKind::Cap {
        return Err(GenError::KindMismatch);
    }
    if cfg.agents == 0 {
        return Err(GenError::NoAgents);
    }
    if cfg.max_share == 0 {
        return Err(GenError::ZeroShare);
    }
    let n = cfg.agents;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=cfg.max_share)).collect();
    let mut next = 0usize;
    let endowments: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&s| {
            let items = (next..next + s).collect();
            next += s;
            items
        })
        .collect();
    let m = next;
    let preferences: Vec<Vec<usize>> = (0..n).map(|_| shuffled(&mut rng, m)).collect();
    Ok(CapInstance::new(endowments, preferences).expect("generated instances are valid"))
}

/// A published small fixture. For ids 1 and 2 the interesting claims hold
/// for every preference profile, so the orders here are placeholders and
/// `preferences_pinned` is false for every agent; fixture 3 pins agent 0's
/// order (she prefers her own item) while agent 1's stays arbitrary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub instance: NetworkInstance,
    /// Per-agent: whether the fixture's claims depend on this agent's order.
    pub preferences_pinned: Vec<bool>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("unknown fixture id {0}; known ids are 1, 2, 3")]
pub struct UnknownExample(pub usize);

/// The three quota fixtures: (1,3,3), (1,4,4,4), and the two-agent instance
/// with quotas (1,2) whose core is a single network. Unpinned preferences
/// default to the identity order.
pub fn example_instance(id: usize) -> Result<Fixture, UnknownExample> {
    let identity = |n: usize| -> Vec<Vec<usize>> { (0..n).map(|_| (0..n).collect()).collect() };
    match id {
        1 => Ok(Fixture {
            instance: NetworkInstance::new(vec![1, 3, 3], identity(3)).unwrap(),
            preferences_pinned: vec![false; 3],
        }),
        2 => Ok(Fixture {
            instance: NetworkInstance::new(vec![1, 4, 4, 4], identity(4)).unwrap(),
            preferences_pinned: vec![false; 4],
        }),
        3 => Ok(Fixture {
            instance: NetworkInstance::new(vec![1, 2], vec![vec![0, 1], vec![0, 1]]).unwrap(),
            preferences_pinned: vec![true, false],
        }),
        other => Err(UnknownExample(other)),
    }
}
