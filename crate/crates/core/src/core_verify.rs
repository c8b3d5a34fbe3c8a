//! Blocking-coalition search, core membership, and exhaustive core
//! enumeration for both problem families.
//!
//! The bundle-versus-item comparison is the unilateral hyper-relation: a
//! bundle dominates a candidate item when the candidate is already in the
//! bundle or every held item is preferred to it. On an empty bundle the
//! universal clause is vacuously true, which makes an empty-handed agent
//! impossible to improve — and therefore unable to join a blocking
//! coalition. Whether that reading is wanted depends on the application, so
//! the network blocking entry points take an [`EmptyBundlePolicy`]:
//!
//! * [`EmptyBundlePolicy::Dominates`] applies the hyper-relation literally.
//! * [`EmptyBundlePolicy::Improvable`] treats an agent with spare quota and
//!   an empty bundle as strictly improvable by any item, so she can claim
//!   her own item in a deviation. Agents with zero quota can never join a
//!   coalition under this policy (they cannot consume anything).
//!
//! The two policies agree on every network whose bundles are all non-empty,
//! and in particular on every solver output with positive quotas.
//!
//! Allocation problems differ: items are rival, so a coalition can only
//! redistribute what it can actually deliver. A CAP deviation assigns each
//! member an item that the supplying member is endowed with *and still
//! holds*, and every member must strictly prefer the item she receives to
//! the one she surrenders. Feasible allocations never have empty bundles, so
//! no policy knob applies on this side.

use crate::model::{
    is_feasible_allocation, is_feasible_network, Allocation, AgentId, CapInstance,
    DirectedNetwork, ItemId, NetworkInstance, Preference,
};
use itertools::Itertools;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyBundlePolicy {
    /// An empty bundle dominates every candidate (vacuous universal clause).
    Dominates,
    /// An empty-handed agent with positive quota counts as improvable.
    #[default]
    Improvable,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("coalition must be non-empty")]
    EmptyCoalition,
    #[error("coalition contains duplicate agent {0}")]
    DuplicateMember(AgentId),
    #[error("coalition references agent {id} out of range (n={n})")]
    MemberOutOfRange { id: AgentId, n: usize },
    #[error("permutation is not a bijection on the coalition")]
    NotABijection,
    #[error("model error: {0}")]
    Model(#[from] crate::model::ModelError),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("search space too large: at least {candidates} candidate networks, cap is {cap}")]
    TooLarge { candidates: u128, cap: u64 },
    #[error("enumeration supports at most {max} agents, instance has {n}")]
    TooManyAgents { n: usize, max: usize },
    #[error("model error: {0}")]
    Model(#[from] crate::model::ModelError),
}

/// Proof that a network is blocked: a coalition, a permutation of it, and
/// witnesses. Member `coalition[t]` would receive the item of
/// `receives_from[t]`; `witness[t]` is a held item the received one strictly
/// beats (`None` only for empty-handed members under the improvable policy).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingCertificate {
    pub coalition: Vec<AgentId>,
    pub receives_from: Vec<AgentId>,
    pub witnesses: Vec<Option<AgentId>>,
}

/// CAP analog: an enactable exchange. Member `coalition[t]` surrenders
/// `gives_item[t]` — an item she is endowed with and still holds — and
/// receives `receives_item[t]`, the item surrendered by `receives_from[t]`;
/// every member strictly prefers what she receives to what she gives. The
/// surrendered item doubles as the witness: it is a held item the received
/// one beats, so no member's bundle dominates her assigned item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapBlockingCertificate {
    pub coalition: Vec<AgentId>,
    pub receives_from: Vec<AgentId>,
    pub receives_item: Vec<ItemId>,
    pub gives_item: Vec<ItemId>,
}

/// The hyper-relation test: does `bundle` dominate `candidate` under `pref`?
///
/// True iff the candidate is in the bundle, or every bundle element is weakly
/// preferred to it. An empty bundle dominates everything (vacuously).
/// Candidate and bundle ids must lie in the preference's universe.
pub fn dominates(pref: &Preference, bundle: &BTreeSet<usize>, candidate: usize) -> bool {
    if bundle.contains(&candidate) {
        return true;
    }
    let c = pref.rank_unchecked(candidate);
    bundle.iter().all(|&k| pref.rank_unchecked(k) < c)
}

/// A member's verdict for one proposed deviation target.
enum MemberGain<W> {
    /// The member's bundle dominates the target; the deviation fails.
    Dominated,
    /// The target strictly improves on the witness (a held item it beats).
    Improves(Option<W>),
}

fn network_member_gain(
    inst: &NetworkInstance,
    net: &DirectedNetwork,
    member: AgentId,
    target: AgentId,
    policy: EmptyBundlePolicy,
) -> MemberGain<AgentId> {
    let bundle = net.consumed(member);
    if bundle.is_empty() {
        return match policy {
            EmptyBundlePolicy::Dominates => MemberGain::Dominated,
            EmptyBundlePolicy::Improvable if inst.quota(member) >= 1 => {
                MemberGain::Improves(None)
            }
            EmptyBundlePolicy::Improvable => MemberGain::Dominated,
        };
    }
    let pref = inst.preference(member);
    if dominates(pref, bundle, target) {
        return MemberGain::Dominated;
    }
    // Not dominated and non-empty: the worst held item is strictly beaten.
    let witness = bundle
        .iter()
        .copied()
        .max_by_key(|&k| pref.rank_unchecked(k))
        .expect("bundle is non-empty");
    MemberGain::Improves(Some(witness))
}

fn check_coalition_shape(
    n: usize,
    coalition: &[AgentId],
    permutation: &[AgentId],
) -> Result<(), VerifyError> {
    if coalition.is_empty() {
        return Err(VerifyError::EmptyCoalition);
    }
    let mut seen = BTreeSet::new();
    for &a in coalition {
        if a >= n {
            return Err(VerifyError::MemberOutOfRange { id: a, n });
        }
        if !seen.insert(a) {
            return Err(VerifyError::DuplicateMember(a));
        }
    }
    if permutation.len() != coalition.len() {
        return Err(VerifyError::NotABijection);
    }
    let images: BTreeSet<AgentId> = permutation.iter().copied().collect();
    if images != seen {
        return Err(VerifyError::NotABijection);
    }
    Ok(())
}

/// Evaluates one candidate deviation: coalition members `coalition[t]`
/// receiving the item of `permutation[t]`. Returns a certificate iff no
/// member's bundle dominates her assigned item.
pub fn check_blocking(
    inst: &NetworkInstance,
    net: &DirectedNetwork,
    coalition: &[AgentId],
    permutation: &[AgentId],
    policy: EmptyBundlePolicy,
) -> Result<Option<BlockingCertificate>, VerifyError> {
    check_coalition_shape(inst.agent_count(), coalition, permutation)?;
    if net.agent_count() != inst.agent_count() {
        return Err(crate::model::ModelError::AgentCountMismatch {
            expected: inst.agent_count(),
            got: net.agent_count(),
        }
        .into());
    }
    let mut witnesses = Vec::with_capacity(coalition.len());
    for (&member, &target) in coalition.iter().zip(permutation) {
        match network_member_gain(inst, net, member, target, policy) {
            MemberGain::Dominated => return Ok(None),
            MemberGain::Improves(w) => witnesses.push(w),
        }
    }
    Ok(Some(BlockingCertificate {
        coalition: coalition.to_vec(),
        receives_from: permutation.to_vec(),
        witnesses,
    }))
}

/// Exhaustive blocking search: coalitions in increasing size, members in
/// lexicographic order, permutations in lexicographic order; the first
/// certificate found is returned. `max_coalition_size` of `None` means up to
/// all agents.
pub fn find_blocking_coalition(
    inst: &NetworkInstance,
    net: &DirectedNetwork,
    max_coalition_size: Option<usize>,
    policy: EmptyBundlePolicy,
) -> Result<Option<BlockingCertificate>, VerifyError> {
    let n = inst.agent_count();
    if net.agent_count() != n {
        return Err(crate::model::ModelError::AgentCountMismatch {
            expected: n,
            got: net.agent_count(),
        }
        .into());
    }
    let bound = max_coalition_size.unwrap_or(n).min(n);
    for size in 1..=bound {
        for coalition in (0..n).combinations(size) {
            for permutation in coalition.iter().copied().permutations(size) {
                if let Some(cert) =
                    check_blocking(inst, net, &coalition, &permutation, policy)?
                {
                    return Ok(Some(cert));
                }
            }
        }
    }
    Ok(None)
}

/// Core membership: feasible and unblocked by any coalition.
pub fn in_core(
    inst: &NetworkInstance,
    net: &DirectedNetwork,
    policy: EmptyBundlePolicy,
) -> bool {
    match is_feasible_network(inst, net) {
        Ok(true) => {}
        _ => return false,
    }
    matches!(find_blocking_coalition(inst, net, None, policy), Ok(None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeasibilityMode {
    /// Feasible and balanced (in-degree equals out-degree everywhere).
    #[default]
    Balanced,
    /// Every network with `|A(i)| <= q(i)`.
    All,
}

/// Options for exhaustive enumeration. `candidate_cap` bounds the raw search
/// space (the product over agents of their bundle choices) before any
/// filtering; enumeration refuses to start above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub mode: FeasibilityMode,
    pub policy: EmptyBundlePolicy,
    pub candidate_cap: u64,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            mode: FeasibilityMode::Balanced,
            policy: EmptyBundlePolicy::default(),
            candidate_cap: 10_000_000,
        }
    }
}

/// Number of candidate networks the enumeration would visit.
pub fn candidate_count(inst: &NetworkInstance) -> u128 {
    let n = inst.agent_count();
    let mut total: u128 = 1;
    for agent in 0..n {
        let choices = subsets_up_to(n, inst.quota(agent));
        total = total.saturating_mul(choices);
    }
    total
}

fn subsets_up_to(n: usize, q: usize) -> u128 {
    let mut sum: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=q.min(n) {
        if k > 0 {
            binom = binom.saturating_mul((n - k + 1) as u128) / k as u128;
        }
        sum = sum.saturating_add(binom);
    }
    sum
}

/// Lazily yields every feasible network of the instance, in a fixed
/// deterministic order, filtered by `mode`. Construction refuses when the
/// raw candidate count exceeds `candidate_cap`.
pub struct FeasibleNetworks<'a> {
    inst: &'a NetworkInstance,
    mode: FeasibilityMode,
    /// Per-agent candidate bundles, as bitmasks in ascending numeric order.
    choices: Vec<Vec<u64>>,
    odometer: Vec<usize>,
    done: bool,
}

impl<'a> FeasibleNetworks<'a> {
    pub fn new(
        inst: &'a NetworkInstance,
        mode: FeasibilityMode,
        candidate_cap: u64,
    ) -> Result<Self, EnumerateError> {
        let count = candidate_count(inst);
        if count > candidate_cap as u128 {
            return Err(EnumerateError::TooLarge { candidates: count, cap: candidate_cap });
        }
        let n = inst.agent_count();
        if n > 63 {
            return Err(EnumerateError::TooManyAgents { n, max: 63 });
        }
        let choices = (0..n)
            .map(|agent| {
                let q = inst.quota(agent).min(n);
                let mut masks: Vec<u64> = (0..=q)
                    .flat_map(|k| {
                        (0..n).combinations(k).map(|combo| {
                            combo.iter().fold(0u64, |mask, &j| mask | (1u64 << j))
                        })
                    })
                    .collect();
                masks.sort_unstable();
                masks
            })
            .collect();
        Ok(Self { inst, mode, choices, odometer: vec![0; n], done: false })
    }
}

impl Iterator for FeasibleNetworks<'_> {
    type Item = DirectedNetwork;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.inst.agent_count();
        while !self.done {
            let masks: Vec<u64> = self
                .odometer
                .iter()
                .zip(&self.choices)
                .map(|(&k, c)| c[k])
                .collect();

            // Advance the odometer for the next call.
            let mut pos = n;
            loop {
                if pos == 0 {
                    self.done = true;
                    break;
                }
                pos -= 1;
                self.odometer[pos] += 1;
                if self.odometer[pos] < self.choices[pos].len() {
                    break;
                }
                self.odometer[pos] = 0;
            }

            let balanced_ok = match self.mode {
                FeasibilityMode::All => true,
                FeasibilityMode::Balanced => {
                    let mut indeg = vec![0usize; n];
                    for &mask in &masks {
                        let mut m = mask;
                        while m != 0 {
                            let j = m.trailing_zeros() as usize;
                            indeg[j] += 1;
                            m &= m - 1;
                        }
                    }
                    masks
                        .iter()
                        .zip(&indeg)
                        .all(|(&mask, &d)| mask.count_ones() as usize == d)
                }
            };
            if !balanced_ok {
                continue;
            }
            let rows: Vec<Vec<usize>> = masks
                .iter()
                .map(|&mask| {
                    let mut row = Vec::new();
                    let mut m = mask;
                    while m != 0 {
                        row.push(m.trailing_zeros() as usize);
                        m &= m - 1;
                    }
                    row
                })
                .collect();
            return Some(DirectedNetwork::new(rows).expect("masks are in range"));
        }
        None
    }
}

/// Enumerates the core: every network passing the mode filter and unblocked
/// under the chosen policy, in enumeration order.
pub fn enumerate_core(
    inst: &NetworkInstance,
    options: &EnumerateOptions,
) -> Result<Vec<DirectedNetwork>, EnumerateError> {
    let nets = FeasibleNetworks::new(inst, options.mode, options.candidate_cap)?;
    Ok(nets.filter(|net| in_core(inst, net, options.policy)).collect())
}

/// Searches for a workable item exchange along one permutation cycle.
///
/// `members[t]` receives the item surrendered by `members[t+1]` (wrapping).
/// Each member's surrendered item must come from her deliverable pool (items
/// both endowed to her and still held) and every member must strictly prefer
/// what she receives to what she surrenders. Pools are scanned in ascending
/// item order, so the first solution is canonical.
fn cycle_exchange(
    inst: &CapInstance,
    pools: &[Vec<ItemId>],
    members: &[AgentId],
    chosen: &mut Vec<ItemId>,
) -> bool {
    let t = chosen.len();
    if t == members.len() {
        // Close the cycle: the last member receives the first surrender.
        let last = members[t - 1];
        let pref = inst.preference(last);
        return pref.rank_unchecked(chosen[0]) < pref.rank_unchecked(chosen[t - 1]);
    }
    for &candidate in &pools[t] {
        if t > 0 {
            // members[t-1] receives candidate and surrenders chosen[t-1].
            let pref = inst.preference(members[t - 1]);
            if pref.rank_unchecked(candidate) >= pref.rank_unchecked(chosen[t - 1]) {
                continue;
            }
        }
        chosen.push(candidate);
        if cycle_exchange(inst, pools, members, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Evaluates one CAP deviation `(coalition, permutation)`: a blocking
/// exchange must be enactable, so each member surrenders an item she is both
/// endowed with and still holds, and receives the surrender of the member
/// the permutation assigns to her — strictly preferring it to what she gave.
pub fn cap_check_blocking(
    inst: &CapInstance,
    alloc: &Allocation,
    coalition: &[AgentId],
    permutation: &[AgentId],
) -> Result<Option<CapBlockingCertificate>, VerifyError> {
    check_coalition_shape(inst.agent_count(), coalition, permutation)?;
    if alloc.agent_count() != inst.agent_count() {
        return Err(crate::model::ModelError::AgentCountMismatch {
            expected: inst.agent_count(),
            got: alloc.agent_count(),
        }
        .into());
    }
    // A member assigned to herself cannot strictly gain.
    if coalition.iter().zip(permutation).any(|(a, b)| a == b) {
        return Ok(None);
    }
    let index_of = |agent: AgentId| coalition.iter().position(|&a| a == agent).unwrap();
    let mut gives: Vec<Option<ItemId>> = vec![None; coalition.len()];
    let mut visited = vec![false; coalition.len()];
    for start in 0..coalition.len() {
        if visited[start] {
            continue;
        }
        // Walk the permutation cycle: member -> the member she receives from.
        let mut members = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            members.push(coalition[cur]);
            cur = index_of(permutation[cur]);
        }
        let pools: Vec<Vec<ItemId>> = members
            .iter()
            .map(|&m| {
                inst.endowment(m)
                    .iter()
                    .copied()
                    .filter(|g| alloc.bundle(m).contains(g))
                    .collect()
            })
            .collect();
        if pools.iter().any(Vec::is_empty) {
            return Ok(None);
        }
        let mut chosen = Vec::with_capacity(members.len());
        if !cycle_exchange(inst, &pools, &members, &mut chosen) {
            return Ok(None);
        }
        for (&m, &item) in members.iter().zip(&chosen) {
            gives[index_of(m)] = Some(item);
        }
    }
    let gives: Vec<ItemId> = gives.into_iter().map(Option::unwrap).collect();
    let receives: Vec<ItemId> = permutation.iter().map(|&src| gives[index_of(src)]).collect();
    Ok(Some(CapBlockingCertificate {
        coalition: coalition.to_vec(),
        receives_from: permutation.to_vec(),
        receives_item: receives,
        gives_item: gives,
    }))
}

/// Exhaustive CAP blocking search with the same ordering contract as
/// [`find_blocking_coalition`].
pub fn cap_find_blocking(
    inst: &CapInstance,
    alloc: &Allocation,
    max_coalition_size: Option<usize>,
) -> Result<Option<CapBlockingCertificate>, VerifyError> {
    let n = inst.agent_count();
    if alloc.agent_count() != n {
        return Err(crate::model::ModelError::AgentCountMismatch {
            expected: n,
            got: alloc.agent_count(),
        }
        .into());
    }
    let bound = max_coalition_size.unwrap_or(n).min(n);
    for size in 1..=bound {
        for coalition in (0..n).combinations(size) {
            for permutation in coalition.iter().copied().permutations(size) {
                if let Some(cert) = cap_check_blocking(inst, alloc, &coalition, &permutation)? {
                    return Ok(Some(cert));
                }
            }
        }
    }
    Ok(None)
}

/// CAP core membership: feasible (exclusive, exact quotas) and unblocked.
pub fn cap_in_core(inst: &CapInstance, alloc: &Allocation) -> bool {
    match is_feasible_allocation(inst, alloc) {
        Ok(true) => {}
        _ => return false,
    }
    matches!(cap_find_blocking(inst, alloc, None), Ok(None))
}
