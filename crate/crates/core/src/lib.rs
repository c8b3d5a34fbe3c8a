//! Solver and verifier for directed network problems with quotas and for
//! combinatorial allocation problems restricted to exclusive allocations.
//!
//! Both families admit core stable outcomes, and this crate computes them
//! with a staged top-trading-cycles procedure: agents point at the owner of
//! their most preferred remaining item, every pointer cycle trades, and
//! quotas shrink until nobody can trade. Alongside the solver it provides
//!
//! * exhaustive blocking-coalition search and core membership checks (the
//!   independent oracle that makes solver outputs checkable at small scale),
//! * brute-force core enumeration over feasible (optionally balanced)
//!   networks,
//! * stage-indexed personalized and market prices for solver outcomes, with
//!   verification of the exact bounds they satisfy,
//! * seeded deterministic instance generation and canonical JSON file
//!   formats, used by the `ttcnet` command-line tool.

pub mod core_verify;
pub mod format;
pub mod instance_gen;
pub mod model;
pub mod prices;
pub mod ttc_cap;
pub mod ttc_network;

pub use core_verify::{
    cap_find_blocking, cap_in_core, check_blocking, dominates, enumerate_core,
    find_blocking_coalition, in_core, BlockingCertificate, CapBlockingCertificate,
    EmptyBundlePolicy, EnumerateOptions, FeasibilityMode,
};
pub use model::{
    is_balanced, is_feasible_allocation, is_feasible_network, Allocation, AgentId, CapInstance,
    DirectedNetwork, ItemId, NetworkInstance, Preference,
};
pub use prices::{personalized_prices, stage_prices, verify_price_properties, PriceTable};
pub use ttc_cap::solve_cap;
pub use ttc_network::{find_cycles, solve_network, StageTrace, Transfer};
