//! Domain types shared by the network and combinatorial allocation problems:
//! agents, preferences, quotas, networks, endowments and bundles, plus the
//! feasibility predicates over them.
//!
//! Agents and items are dense 0-based indices. File formats may attach string
//! labels; internally everything is an index so rank lookups are O(1).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Dense 0-based agent index.
pub type AgentId = usize;
/// Dense 0-based item index (for network problems, items coincide with agents).
pub type ItemId = usize;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("id {id} out of range (universe size {universe})")]
    IdOutOfRange { id: usize, universe: usize },
    #[error("expected {expected} agents, got {got}")]
    AgentCountMismatch { expected: usize, got: usize },
    #[error("duplicate id {id} in assignment of agent {agent}")]
    DuplicateAssignment { agent: AgentId, id: usize },
}

/// A broken instance invariant. Violations are data: validation reports all
/// of them instead of failing on the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// The agent the rule is about, when it is about one.
    pub agent: Option<AgentId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub struct InvalidInstance {
    pub violations: Vec<Violation>,
}

impl fmt::Display for InvalidInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance: ")?;
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A strict linear order over a dense id universe, most preferred first.
///
/// Every id in `[0, universe)` appears exactly once; ties and omissions are
/// rejected at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Preference {
    order: Vec<usize>,
    rank_of: Vec<usize>,
}

impl Preference {
    /// Builds a preference from an explicit order, checking that it is a
    /// permutation of `0..universe`.
    pub fn new(order: Vec<usize>, universe: usize) -> Result<Self, InvalidInstance> {
        let violations = permutation_violations(&order, universe, None);
        if !violations.is_empty() {
            return Err(InvalidInstance { violations });
        }
        Ok(Self::new_unchecked(order))
    }

    pub(crate) fn new_unchecked(order: Vec<usize>) -> Self {
        let mut rank_of = vec![0usize; order.len()];
        for (pos, &id) in order.iter().enumerate() {
            rank_of[id] = pos;
        }
        Self { order, rank_of }
    }

    /// Position of `x` in the order; 0 is most preferred.
    /// `rank(a) < rank(b)` iff `a` is strictly preferred to `b`.
    pub fn rank(&self, x: usize) -> Result<usize, ModelError> {
        self.rank_of.get(x).copied().ok_or(ModelError::IdOutOfRange {
            id: x,
            universe: self.rank_of.len(),
        })
    }

    /// Rank lookup for ids already known to be in range.
    #[inline]
    pub(crate) fn rank_unchecked(&self, x: usize) -> usize {
        self.rank_of[x]
    }

    /// `a` weakly preferred to `b` (equality allowed; the order is strict, so
    /// weak and strict coincide whenever `a != b`).
    #[inline]
    pub fn weakly_prefers(&self, a: usize, b: usize) -> bool {
        self.rank_of[a] <= self.rank_of[b]
    }

    /// The order as a slice, most preferred first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn universe(&self) -> usize {
        self.order.len()
    }
}

fn permutation_violations(
    order: &[usize],
    universe: usize,
    agent: Option<AgentId>,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let who = match agent {
        Some(a) => format!("preference of agent {a}"),
        None => "preference".to_string(),
    };
    if order.len() != universe {
        violations.push(Violation {
            agent,
            message: format!("{who} has length {} but universe size is {universe}", order.len()),
        });
    }
    let mut seen = vec![false; universe];
    for &id in order {
        if id >= universe {
            violations.push(Violation {
                agent,
                message: format!("id {id} out of range in {who} (universe size {universe})"),
            });
        } else if seen[id] {
            violations.push(Violation {
                agent,
                message: format!("duplicate id {id} in {who}"),
            });
        } else {
            seen[id] = true;
        }
    }
    if order.len() == universe {
        for (id, present) in seen.iter().enumerate() {
            if !present && violations.iter().all(|v| !v.message.contains("duplicate")) {
                violations.push(Violation {
                    agent,
                    message: format!("{who} omits id {id}"),
                });
                break;
            }
        }
    }
    violations
}

/// A directed network problem with quotas: `n` agents, each owning one item
/// with capacity `q(i)`, and a strict linear order over all agents' items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkInstance {
    quotas: Vec<usize>,
    preferences: Vec<Preference>,
}

impl NetworkInstance {
    pub fn new(quotas: Vec<usize>, preferences: Vec<Vec<usize>>) -> Result<Self, InvalidInstance> {
        let violations = Self::validate(&quotas, &preferences);
        if !violations.is_empty() {
            return Err(InvalidInstance { violations });
        }
        let preferences = preferences.into_iter().map(Preference::new_unchecked).collect();
        Ok(Self { quotas, preferences })
    }

    /// Checks the instance invariants on raw parts, reporting every broken
    /// rule with the agent it concerns.
    pub fn validate(quotas: &[usize], preferences: &[Vec<usize>]) -> Vec<Violation> {
        let n = quotas.len();
        let mut violations = Vec::new();
        if n == 0 {
            violations.push(Violation {
                agent: None,
                message: "instance must have at least one agent".to_string(),
            });
            return violations;
        }
        if preferences.len() != n {
            violations.push(Violation {
                agent: None,
                message: format!("expected {n} preference orders, got {}", preferences.len()),
            });
        }
        for (agent, &q) in quotas.iter().enumerate() {
            if q > n {
                violations.push(Violation {
                    agent: Some(agent),
                    message: format!("q({agent})={q} exceeds n={n}"),
                });
            }
        }
        for (agent, order) in preferences.iter().enumerate() {
            violations.extend(permutation_violations(order, n, Some(agent)));
        }
        violations
    }

    pub fn agent_count(&self) -> usize {
        self.quotas.len()
    }

    pub fn quota(&self, agent: AgentId) -> usize {
        self.quotas[agent]
    }

    pub fn quotas(&self) -> &[usize] {
        &self.quotas
    }

    pub fn preference(&self, agent: AgentId) -> &Preference {
        &self.preferences[agent]
    }

    pub fn preferences(&self) -> &[Preference] {
        &self.preferences
    }
}

/// A directed network: for each agent, the set of agents whose items she
/// consumes. A link can be a loop. Ids are validated against the number of
/// rows at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedNetwork {
    assignments: Vec<BTreeSet<AgentId>>,
}

impl DirectedNetwork {
    /// Builds a network from per-agent consumption lists. Duplicate entries
    /// and out-of-range ids are rejected.
    pub fn new(rows: Vec<Vec<AgentId>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let mut assignments = Vec::with_capacity(n);
        for (agent, row) in rows.into_iter().enumerate() {
            let mut set = BTreeSet::new();
            for id in row {
                if id >= n {
                    return Err(ModelError::IdOutOfRange { id, universe: n });
                }
                if !set.insert(id) {
                    return Err(ModelError::DuplicateAssignment { agent, id });
                }
            }
            assignments.push(set);
        }
        Ok(Self { assignments })
    }

    pub fn from_sets(assignments: Vec<BTreeSet<AgentId>>) -> Result<Self, ModelError> {
        let n = assignments.len();
        for set in &assignments {
            if let Some(&id) = set.iter().next_back() {
                if id >= n {
                    return Err(ModelError::IdOutOfRange { id, universe: n });
                }
            }
        }
        Ok(Self { assignments })
    }

    pub fn agent_count(&self) -> usize {
        self.assignments.len()
    }

    /// The set of agents whose items `agent` consumes.
    pub fn consumed(&self, agent: AgentId) -> &BTreeSet<AgentId> {
        &self.assignments[agent]
    }

    pub fn assignments(&self) -> &[BTreeSet<AgentId>] {
        &self.assignments
    }

    /// Number of agents consuming each agent's item.
    pub fn indegrees(&self) -> Vec<usize> {
        let mut indeg = vec![0usize; self.assignments.len()];
        for set in &self.assignments {
            for &j in set {
                indeg[j] += 1;
            }
        }
        indeg
    }
}

/// Feasibility in the quota sense: `|A(i)| <= q(i)` for every agent.
pub fn is_feasible_network(
    inst: &NetworkInstance,
    net: &DirectedNetwork,
) -> Result<bool, ModelError> {
    if net.agent_count() != inst.agent_count() {
        return Err(ModelError::AgentCountMismatch {
            expected: inst.agent_count(),
            got: net.agent_count(),
        });
    }
    Ok(net
        .assignments
        .iter()
        .zip(inst.quotas.iter())
        .all(|(set, &q)| set.len() <= q))
}

/// Balance: the number of links terminating at each agent equals the number
/// emanating from her, i.e. `indeg(i) = |A(i)|`. Loops count toward both.
pub fn is_balanced(net: &DirectedNetwork) -> bool {
    let indeg = net.indegrees();
    net.assignments
        .iter()
        .zip(indeg.iter())
        .all(|(set, &d)| set.len() == d)
}

/// A combinatorial allocation problem: `m` labeled items partitioned into
/// non-empty endowments `S(i)`, preferences over items, and derived quotas
/// `q(i) = |S(i)|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapInstance {
    item_count: usize,
    endowments: Vec<BTreeSet<ItemId>>,
    owner_of: Vec<AgentId>,
    preferences: Vec<Preference>,
}

impl CapInstance {
    pub fn new(
        endowments: Vec<Vec<ItemId>>,
        preferences: Vec<Vec<usize>>,
    ) -> Result<Self, InvalidInstance> {
        let violations = Self::validate(&endowments, &preferences);
        if !violations.is_empty() {
            return Err(InvalidInstance { violations });
        }
        let item_count: usize = endowments.iter().map(|s| s.len()).sum();
        let mut owner_of = vec![0usize; item_count];
        let endowments: Vec<BTreeSet<ItemId>> = endowments
            .into_iter()
            .enumerate()
            .map(|(agent, items)| {
                for &g in &items {
                    owner_of[g] = agent;
                }
                items.into_iter().collect()
            })
            .collect();
        let preferences = preferences.into_iter().map(Preference::new_unchecked).collect();
        Ok(Self { item_count, endowments, owner_of, preferences })
    }

    pub fn validate(endowments: &[Vec<ItemId>], preferences: &[Vec<usize>]) -> Vec<Violation> {
        let n = endowments.len();
        let mut violations = Vec::new();
        if n == 0 {
            violations.push(Violation {
                agent: None,
                message: "instance must have at least one agent".to_string(),
            });
            return violations;
        }
        let m: usize = endowments.iter().map(|s| s.len()).sum();
        let mut owner = vec![None::<AgentId>; m];
        for (agent, items) in endowments.iter().enumerate() {
            if items.is_empty() {
                violations.push(Violation {
                    agent: Some(agent),
                    message: format!("endowment S({agent}) is empty"),
                });
            }
            for &g in items {
                if g >= m {
                    violations.push(Violation {
                        agent: Some(agent),
                        message: format!(
                            "item {g} out of range in endowment S({agent}) (items are 0..{m})"
                        ),
                    });
                } else if let Some(other) = owner[g] {
                    violations.push(Violation {
                        agent: Some(agent),
                        message: format!("item {g} appears in both S({other}) and S({agent})"),
                    });
                } else {
                    owner[g] = Some(agent);
                }
            }
        }
        // With m = total endowment size, in-range + disjoint implies the union
        // covers 0..m exactly; any gap shows up as an out-of-range or overlap.
        if preferences.len() != n {
            violations.push(Violation {
                agent: None,
                message: format!("expected {n} preference orders, got {}", preferences.len()),
            });
        }
        for (agent, order) in preferences.iter().enumerate() {
            violations.extend(permutation_violations(order, m, Some(agent)));
        }
        violations
    }

    pub fn agent_count(&self) -> usize {
        self.endowments.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn endowment(&self, agent: AgentId) -> &BTreeSet<ItemId> {
        &self.endowments[agent]
    }

    pub fn endowments(&self) -> &[BTreeSet<ItemId>] {
        &self.endowments
    }

    /// Original endower of an item; fixed for the life of the instance.
    pub fn owner(&self, item: ItemId) -> AgentId {
        self.owner_of[item]
    }

    /// Derived quota `q(i) = |S(i)|`.
    pub fn quota(&self, agent: AgentId) -> usize {
        self.endowments[agent].len()
    }

    pub fn preference(&self, agent: AgentId) -> &Preference {
        &self.preferences[agent]
    }

    pub fn preferences(&self) -> &[Preference] {
        &self.preferences
    }
}

/// An allocation of items to agents. Exclusivity and quota exactness are
/// checked by [`is_feasible_allocation`], not by the container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    bundles: Vec<BTreeSet<ItemId>>,
}

impl Allocation {
    pub fn new(rows: Vec<Vec<ItemId>>) -> Result<Self, ModelError> {
        let mut bundles = Vec::with_capacity(rows.len());
        for (agent, row) in rows.into_iter().enumerate() {
            let mut set = BTreeSet::new();
            for id in row {
                if !set.insert(id) {
                    return Err(ModelError::DuplicateAssignment { agent, id });
                }
            }
            bundles.push(set);
        }
        Ok(Self { bundles })
    }

    pub fn from_sets(bundles: Vec<BTreeSet<ItemId>>) -> Self {
        Self { bundles }
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: AgentId) -> &BTreeSet<ItemId> {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[BTreeSet<ItemId>] {
        &self.bundles
    }
}

/// CAP feasibility: bundles pairwise disjoint and `|A(i)| = q(i)` exactly
/// (equality, unlike the network problem's upper bound).
pub fn is_feasible_allocation(
    inst: &CapInstance,
    alloc: &Allocation,
) -> Result<bool, ModelError> {
    if alloc.agent_count() != inst.agent_count() {
        return Err(ModelError::AgentCountMismatch {
            expected: inst.agent_count(),
            got: alloc.agent_count(),
        });
    }
    let m = inst.item_count();
    let mut taken = vec![false; m];
    for (agent, bundle) in alloc.bundles.iter().enumerate() {
        if bundle.len() != inst.quota(agent) {
            return Ok(false);
        }
        for &g in bundle {
            if g >= m {
                return Err(ModelError::IdOutOfRange { id: g, universe: m });
            }
            if taken[g] {
                return Ok(false);
            }
            taken[g] = true;
        }
    }
    Ok(true)
}
