//! Staged trading procedure for combinatorial allocation problems with
//! exclusive allocations.
//!
//! The stage loop mirrors the network solver with two substitutions: an
//! active agent points at the original endower of her most preferred
//! remaining unallocated item (herself, if that item is her own) and, in a
//! completed cycle, receives exactly that item; and after each cycle every
//! transferred item is struck from every remaining list — items, not owners,
//! are struck. Each cycle membership simultaneously fills one quota slot and
//! gives up one endowed item, so remaining quota always equals remaining
//! endowment size and the procedure ends with every quota exactly filled.

use crate::model::{AgentId, Allocation, CapInstance, InvalidInstance, ItemId};
use crate::ttc_network::{find_cycles, StageTrace, Transfer};
use std::collections::BTreeSet;

struct CapState<'a> {
    inst: &'a CapInstance,
    cursor: Vec<usize>,
    item_struck: Vec<bool>,
    remaining_quota: Vec<usize>,
    active: Vec<bool>,
    received: Vec<Vec<ItemId>>,
}

impl<'a> CapState<'a> {
    fn new(inst: &'a CapInstance) -> Self {
        let n = inst.agent_count();
        Self {
            inst,
            cursor: vec![0; n],
            item_struck: vec![false; inst.item_count()],
            remaining_quota: (0..n).map(|i| inst.quota(i)).collect(),
            active: vec![true; n],
            received: vec![Vec::new(); n],
        }
    }

    /// Most preferred item not yet transferred. While any quota is open the
    /// untransferred items are exactly the coalition of remaining
    /// endowments, so an active agent always has a head.
    fn head_item(&mut self, agent: AgentId) -> Option<ItemId> {
        let order = self.inst.preference(agent).order();
        while self.cursor[agent] < order.len() {
            let item = order[self.cursor[agent]];
            if !self.item_struck[item] {
                return Some(item);
            }
            self.cursor[agent] += 1;
        }
        None
    }

    fn any_active(&self) -> bool {
        self.active.iter().any(|&a| a)
    }
}

/// Runs the staged procedure and returns the allocation with its stage
/// trace. The output is exclusive, fills every quota exactly, partitions the
/// item set, and is core stable.
pub fn solve_cap(inst: &CapInstance) -> Result<(Allocation, StageTrace), InvalidInstance> {
    let n = inst.agent_count();
    let mut state = CapState::new(inst);
    let mut trace = StageTrace::default();
    let mut pointers: Vec<Option<AgentId>> = vec![None; n];
    let mut heads: Vec<Option<ItemId>> = vec![None; n];

    let mut stage = 0usize;
    while state.any_active() {
        stage += 1;
        for agent in 0..n {
            if state.active[agent] {
                let item = state.head_item(agent);
                debug_assert!(item.is_some(), "open quotas leave untransferred items");
                heads[agent] = item;
                pointers[agent] = item.map(|g| state.inst.owner(g));
            } else {
                heads[agent] = None;
                pointers[agent] = None;
            }
        }
        let cycles = find_cycles(&pointers);
        debug_assert!(!cycles.is_empty());

        for cycle in &cycles {
            for &receiver in cycle {
                let item = heads[receiver].expect("cycle members point at their head item");
                trace.transfers.push(Transfer { receiver, item, stage });
                state.received[receiver].push(item);
                state.item_struck[item] = true;
                state.remaining_quota[receiver] -= 1;
                if state.remaining_quota[receiver] == 0 {
                    state.active[receiver] = false;
                }
            }
        }
    }

    trace.stages = stage;
    debug_assert!(state.remaining_quota.iter().all(|&r| r == 0));
    let bundles: Vec<BTreeSet<ItemId>> = state
        .received
        .iter()
        .map(|items| items.iter().copied().collect())
        .collect();
    Ok((Allocation::from_sets(bundles), trace))
}
