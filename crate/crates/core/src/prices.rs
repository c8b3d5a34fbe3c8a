//! Stage-indexed personalized prices for solver outcomes, and the checks the
//! construction is supposed to satisfy.
//!
//! Stage prices descend from the final stage: the last stage costs 1 and
//! every earlier stage costs one more than the sum of all later prices,
//! which closes to `p_k = 2^(K-k)`. The price an agent pays for an item is
//! the stage price of the stage she received it at; an item's market price
//! is the minimum anyone paid for it. Prices are exact integers (arbitrary
//! precision), never floats: the properties below are exact inequalities and
//! equalities.

use crate::model::{AgentId, DirectedNetwork, ItemId, NetworkInstance};
use crate::ttc_network::StageTrace;
use num_bigint::BigUint;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PriceError {
    #[error("duplicate transfer of item {item} to agent {agent} in trace")]
    DuplicateTransfer { agent: AgentId, item: ItemId },
    #[error("transfer at stage {stage} outside 1..={stages}")]
    StageOutOfRange { stage: usize, stages: usize },
    #[error("price table does not match the network: {0}")]
    TableMismatch(String),
}

/// Stage prices, personalized prices, and market prices for one solver run.
///
/// `personalized` is keyed by `(agent, item)` and defined exactly for the
/// pairs that traded. Items nobody received carry no market price; checks
/// treat them as unobtainable (infinitely expensive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceTable {
    pub stage_prices: Vec<BigUint>,
    pub personalized: BTreeMap<(AgentId, ItemId), BigUint>,
    pub market: BTreeMap<ItemId, BigUint>,
}

/// The unique sequence with `p_K = 1` and each earlier price exceeding the
/// sum of all later ones by exactly one; equivalently `p_k = 2^(K-k)`.
/// `stage_prices(0)` is empty: no transfers, no prices.
pub fn stage_prices(stages: usize) -> Vec<BigUint> {
    let one = BigUint::from(1u32);
    (0..stages).map(|k| &one << (stages - 1 - k)).collect()
}

/// Prices every transfer of the trace: the payer's personalized price is the
/// stage price of the stage she received the item at, and each item's market
/// price is the minimum over its receivers.
pub fn personalized_prices(trace: &StageTrace) -> Result<PriceTable, PriceError> {
    let prices = stage_prices(trace.stages);
    let mut personalized = BTreeMap::new();
    let mut market: BTreeMap<ItemId, BigUint> = BTreeMap::new();
    for t in &trace.transfers {
        if t.stage == 0 || t.stage > trace.stages {
            return Err(PriceError::StageOutOfRange { stage: t.stage, stages: trace.stages });
        }
        let price = prices[t.stage - 1].clone();
        if personalized.insert((t.receiver, t.item), price.clone()).is_some() {
            return Err(PriceError::DuplicateTransfer { agent: t.receiver, item: t.item });
        }
        market
            .entry(t.item)
            .and_modify(|p| {
                if price < *p {
                    *p = price.clone();
                }
            })
            .or_insert(price);
    }
    Ok(PriceTable { stage_prices: prices, personalized, market })
}

/// One verified condition: whether it held, with a description of every
/// failure found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub passed: bool,
    pub counterexamples: Vec<String>,
}

impl CheckResult {
    fn from_failures(counterexamples: Vec<String>) -> Self {
        Self { passed: counterexamples.is_empty(), counterexamples }
    }
}

/// Pass/fail per condition, with counterexamples.
///
/// * `consistency` — the table is well-formed for the network: stage prices
///   satisfy the descending recurrence, every personalized price is a stage
///   price, the market map is the per-item minimum of the personalized
///   entries, and entries exist exactly for held items.
/// * `aggregate_bound` — for every agent and unheld item `j` with a
///   non-empty set of held items she likes less than `j`, the market price
///   of `j` exceeds the total she paid for that set.
/// * `order_consistency` — for every held item `j` and unheld `h` preferred
///   to `j`, the market price of `h` exceeds the price paid for `j`.
/// * `payment_balance` — per agent, payments made equal payments received.
///
/// Items without a market price satisfy the bound checks vacuously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceReport {
    pub consistency: CheckResult,
    pub aggregate_bound: CheckResult,
    pub order_consistency: CheckResult,
    pub payment_balance: CheckResult,
}

impl PriceReport {
    pub fn all_passed(&self) -> bool {
        self.consistency.passed
            && self.aggregate_bound.passed
            && self.order_consistency.passed
            && self.payment_balance.passed
    }
}

/// Checks the table against the network it was built for. Errors only when
/// the table's domain does not match the network at all; value-level damage
/// is reported, not raised.
pub fn verify_price_properties(
    inst: &NetworkInstance,
    net: &DirectedNetwork,
    table: &PriceTable,
) -> Result<PriceReport, PriceError> {
    let n = inst.agent_count();
    if net.agent_count() != n {
        return Err(PriceError::TableMismatch(format!(
            "network has {} agents, instance has {n}",
            net.agent_count()
        )));
    }
    for (agent, set) in net.assignments().iter().enumerate() {
        for &item in set {
            if !table.personalized.contains_key(&(agent, item)) {
                return Err(PriceError::TableMismatch(format!(
                    "no personalized price for held item {item} of agent {agent}"
                )));
            }
        }
    }
    for &(agent, item) in table.personalized.keys() {
        if agent >= n || !net.consumed(agent).contains(&item) {
            return Err(PriceError::TableMismatch(format!(
                "personalized price for ({agent}, {item}) but agent {agent} does not hold \
                 item {item}"
            )));
        }
    }

    let mut consistency = Vec::new();
    // Descending recurrence, equivalent to each stage price strictly
    // exceeding the sum of all later ones.
    let mut suffix = BigUint::from(0u32);
    for (k, p) in table.stage_prices.iter().enumerate().rev() {
        let expected = &suffix + 1u32;
        if *p != expected {
            consistency.push(format!(
                "stage price p_{} = {p} but the recurrence requires {expected}",
                k + 1
            ));
        }
        suffix += p;
    }
    for ((agent, item), price) in &table.personalized {
        if !table.stage_prices.contains(price) {
            consistency.push(format!(
                "personalized price {price} of ({agent}, {item}) is not a stage price"
            ));
        }
    }
    let mut expected_market: BTreeMap<ItemId, BigUint> = BTreeMap::new();
    for (&(_, item), price) in &table.personalized {
        expected_market
            .entry(item)
            .and_modify(|p| {
                if price < p {
                    *p = price.clone();
                }
            })
            .or_insert_with(|| price.clone());
    }
    if expected_market != table.market {
        consistency.push(
            "market prices are not the per-item minimum of personalized prices".to_string(),
        );
    }

    let mut aggregate = Vec::new();
    let mut order = Vec::new();
    let mut balance = Vec::new();
    for agent in 0..n {
        let pref = inst.preference(agent);
        let held = net.consumed(agent);
        for j in 0..n {
            if held.contains(&j) {
                continue;
            }
            // Held items the agent likes strictly less than unheld j.
            let worse_than_j: Vec<AgentId> = held
                .iter()
                .copied()
                .filter(|&h| pref.rank_unchecked(j) < pref.rank_unchecked(h))
                .collect();
            if !worse_than_j.is_empty() {
                if let Some(pj) = table.market.get(&j) {
                    let paid: BigUint = worse_than_j
                        .iter()
                        .map(|&h| table.personalized[&(agent, h)].clone())
                        .sum();
                    if *pj <= paid {
                        aggregate.push(format!(
                            "agent {agent}, item {j}: market price {pj} does not exceed the \
                             {paid} paid for less preferred holdings {worse_than_j:?}"
                        ));
                    }
                }
            }
            for &j_held in held {
                if pref.rank_unchecked(j) < pref.rank_unchecked(j_held) {
                    if let Some(ph) = table.market.get(&j) {
                        let paid = &table.personalized[&(agent, j_held)];
                        if ph <= paid {
                            order.push(format!(
                                "agent {agent}: unheld item {j} is preferred to held item \
                                 {j_held} but p({j}) = {ph} <= p_{agent}({j_held}) = {paid}"
                            ));
                        }
                    }
                }
            }
        }
        let made: BigUint = held.iter().map(|&j| table.personalized[&(agent, j)].clone()).sum();
        let received: BigUint = net
            .assignments()
            .iter()
            .enumerate()
            .filter(|(_, set)| set.contains(&agent))
            .map(|(payer, _)| table.personalized[&(payer, agent)].clone())
            .sum();
        if made != received {
            balance.push(format!(
                "agent {agent} pays {made} but receives {received}"
            ));
        }
    }

    Ok(PriceReport {
        consistency: CheckResult::from_failures(consistency),
        aggregate_bound: CheckResult::from_failures(aggregate),
        order_consistency: CheckResult::from_failures(order),
        payment_balance: CheckResult::from_failures(balance),
    })
}
