//! Staged top-trading-cycles solver for directed network problems with
//! quotas.
//!
//! Each stage, every active agent points at the owner of her most preferred
//! remaining item; every cycle in the resulting pointer graph trades, each
//! member receiving the item of the agent she points at (a length-1 cycle
//! means she receives her own item). Receivers strike the received item's
//! owner from their own lists and reduce their quota; agents whose quota hits
//! zero withdraw and are struck from every remaining list. An agent whose
//! list empties while her quota is still open can never trade again, so she
//! is likewise struck everywhere; that keeps the pointer graph total over
//! active agents and guarantees a cycle every stage.

use crate::model::{AgentId, InvalidInstance, NetworkInstance};
use std::collections::BTreeSet;

/// One completed transfer: `receiver` obtained `item` at `stage` (1-based).
///
/// For network problems the item id is the id of its owning agent; for
/// allocation problems it is an item id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transfer {
    pub receiver: AgentId,
    pub item: usize,
    pub stage: usize,
}

/// The complete record of a solver run: every transfer in execution order,
/// plus the index of the last stage at which any transfer occurred (0 when
/// nothing traded).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StageTrace {
    pub transfers: Vec<Transfer>,
    pub stages: usize,
}

impl StageTrace {
    /// Transfers of one stage, in execution order.
    pub fn stage(&self, stage: usize) -> impl Iterator<Item = &Transfer> {
        self.transfers.iter().filter(move |t| t.stage == stage)
    }
}

/// Every cycle of the functional graph described by `pointers`, where
/// `pointers[i]` is the agent `i` currently points at (`None` when `i` is not
/// pointing). Cycles are vertex-disjoint; agents on chains that dead-end at a
/// non-pointing agent (or an out-of-range target) belong to no cycle.
///
/// Each cycle is listed in pointer order and rotated to start at its smallest
/// member; cycles are sorted by that first member, so the result is
/// canonical.
pub fn find_cycles(pointers: &[Option<AgentId>]) -> Vec<Vec<AgentId>> {
    let n = pointers.len();
    // 0 = unvisited, 1 = on the current walk, 2 = settled
    let mut state = vec![0u8; n];
    let mut walk_pos = vec![usize::MAX; n];
    let mut cycles = Vec::new();

    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            state[cur] = 1;
            walk_pos[cur] = path.len();
            path.push(cur);
            match pointers[cur] {
                Some(next) if next < n => {
                    if state[next] == 1 {
                        // Revisited a node on this walk: the suffix is a cycle.
                        let mut cycle = path[walk_pos[next]..].to_vec();
                        let min_pos = cycle
                            .iter()
                            .enumerate()
                            .min_by_key(|(_, &a)| a)
                            .map(|(k, _)| k)
                            .unwrap();
                        cycle.rotate_left(min_pos);
                        cycles.push(cycle);
                        break;
                    }
                    if state[next] == 2 {
                        break;
                    }
                    cur = next;
                }
                _ => break,
            }
        }
        for &a in &path {
            state[a] = 2;
        }
    }

    cycles.sort_by_key(|c| c[0]);
    cycles
}

struct SolverState<'a> {
    inst: &'a NetworkInstance,
    /// Cursor into each agent's preference order; entries before it are used up.
    cursor: Vec<usize>,
    /// Owners struck from every list (withdrawn or retired agents).
    struck_everywhere: Vec<bool>,
    /// Per-agent owners struck from her own list (items she already received).
    own_strikes: Vec<Vec<AgentId>>,
    remaining_quota: Vec<usize>,
    active: Vec<bool>,
    received: Vec<Vec<AgentId>>,
}

impl<'a> SolverState<'a> {
    fn new(inst: &'a NetworkInstance) -> Self {
        let n = inst.agent_count();
        let mut state = Self {
            inst,
            cursor: vec![0; n],
            struck_everywhere: vec![false; n],
            own_strikes: vec![Vec::new(); n],
            remaining_quota: inst.quotas().to_vec(),
            active: vec![true; n],
            received: vec![Vec::new(); n],
        };
        for agent in 0..n {
            if inst.quota(agent) == 0 {
                state.active[agent] = false;
                state.struck_everywhere[agent] = true;
            }
        }
        state
    }

    /// Head of `agent`'s remaining list, advancing the cursor past struck
    /// owners. `None` means the list is empty.
    fn head(&mut self, agent: AgentId) -> Option<AgentId> {
        let order = self.inst.preference(agent).order();
        while self.cursor[agent] < order.len() {
            let target = order[self.cursor[agent]];
            if !self.struck_everywhere[target] && !self.own_strikes[agent].contains(&target) {
                return Some(target);
            }
            self.cursor[agent] += 1;
        }
        None
    }

    /// Retires agents that can no longer trade (empty list) until stable.
    /// Retired agents keep what they received but are struck from every list.
    fn retire_dead_ends(&mut self) {
        loop {
            let mut changed = false;
            for agent in 0..self.active.len() {
                if self.active[agent] && self.head(agent).is_none() {
                    self.active[agent] = false;
                    self.struck_everywhere[agent] = true;
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn any_active(&self) -> bool {
        self.active.iter().any(|&a| a)
    }
}

/// Runs the staged procedure and returns the resulting network together with
/// its stage trace. The output is feasible, balanced, and core stable.
pub fn solve_network(
    inst: &NetworkInstance,
) -> Result<(crate::model::DirectedNetwork, StageTrace), InvalidInstance> {
    // Instances are validated at construction; re-check cheap global shape
    // only in debug builds.
    debug_assert!(NetworkInstance::validate(
        inst.quotas(),
        &inst.preferences().iter().map(|p| p.order().to_vec()).collect::<Vec<_>>()
    )
    .is_empty());

    let n = inst.agent_count();
    let mut state = SolverState::new(inst);
    let mut trace = StageTrace::default();
    let mut pointers: Vec<Option<AgentId>> = vec![None; n];

    let mut stage = 0usize;
    loop {
        state.retire_dead_ends();
        if !state.any_active() {
            break;
        }
        stage += 1;

        for (agent, slot) in pointers.iter_mut().enumerate() {
            *slot = if state.active[agent] { state.head(agent) } else { None };
        }
        let cycles = find_cycles(&pointers);
        debug_assert!(!cycles.is_empty(), "an active pointer graph always has a cycle");

        for cycle in &cycles {
            let k = cycle.len();
            for (pos, &receiver) in cycle.iter().enumerate() {
                let item = cycle[(pos + 1) % k];
                trace.transfers.push(Transfer { receiver, item, stage });
                state.received[receiver].push(item);
                state.own_strikes[receiver].push(item);
                state.remaining_quota[receiver] -= 1;
            }
        }
        for cycle in &cycles {
            for &agent in cycle {
                if state.remaining_quota[agent] == 0 {
                    state.active[agent] = false;
                    state.struck_everywhere[agent] = true;
                }
            }
        }
    }

    trace.stages = stage;
    let assignments: Vec<BTreeSet<AgentId>> = state
        .received
        .iter()
        .map(|items| items.iter().copied().collect())
        .collect();
    let net = crate::model::DirectedNetwork::from_sets(assignments)
        .expect("solver only assigns in-range agents");
    Ok((net, trace))
}
