//! Explicit query-cost accounting.

use serde::{Deserialize, Serialize};

/// Accumulated cost units of one simulated run.
///
/// Counters only ever grow. `qsve_query_units` adds `‖A‖_F / δ` per
/// singular value estimation, the polylog-free cost unit of that subroutine.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    qsve_query_units: f64,
    qsve_invocations: u64,
    tree_queries: u64,
    tree_builds: u64,
    tree_build_cost: u64,
    walk_applications: u64,
    amplification_rounds: u64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge_qsve(&mut self, units: f64) {
        debug_assert!(units >= 0.0);
        self.qsve_query_units += units.max(0.0);
        self.qsve_invocations += 1;
    }

    pub fn charge_tree_queries(&mut self, count: u64) {
        self.tree_queries += count;
    }

    pub fn record_tree_build(&mut self, node_writes: u64) {
        self.tree_builds += 1;
        self.tree_build_cost += node_writes;
    }

    pub fn charge_walk_applications(&mut self, count: u64) {
        self.walk_applications += count;
    }

    pub fn charge_amplification(&mut self, rounds: u64) {
        self.amplification_rounds += rounds;
    }

    pub fn qsve_query_units(&self) -> f64 {
        self.qsve_query_units
    }

    pub fn qsve_invocations(&self) -> u64 {
        self.qsve_invocations
    }

    pub fn tree_queries(&self) -> u64 {
        self.tree_queries
    }

    pub fn tree_builds(&self) -> u64 {
        self.tree_builds
    }

    pub fn tree_build_cost(&self) -> u64 {
        self.tree_build_cost
    }

    pub fn walk_applications(&self) -> u64 {
        self.walk_applications
    }

    pub fn amplification_rounds(&self) -> u64 {
        self.amplification_rounds
    }

    /// Folds another ledger into this one.
    pub fn absorb(&mut self, other: &CostLedger) {
        self.qsve_query_units += other.qsve_query_units;
        self.qsve_invocations += other.qsve_invocations;
        self.tree_queries += other.tree_queries;
        self.tree_builds += other.tree_builds;
        self.tree_build_cost += other.tree_build_cost;
        self.walk_applications += other.walk_applications;
        self.amplification_rounds += other.amplification_rounds;
    }
}
