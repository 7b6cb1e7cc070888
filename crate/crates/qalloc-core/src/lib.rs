//! Batch allocation of client quantum circuits across a simulated quantum
//! cloud, plus qubit-level partitioning and benchmark harness.
//!
//! The pipeline has three stages:
//!
//! 1. [`allocation`] solves the resource-allocation game: given per-client
//!    qubit demands and per-node capacities with linear cost functions, it
//!    produces an integer allocation matrix (qubits per client per node)
//!    and can certify equilibrium and price-of-anarchy properties.
//! 2. [`grouping`] realizes that matrix as concrete qubit sets per node,
//!    choosing subsets that keep as many two-qubit gates local as possible.
//! 3. [`harness`] drives seeded end-to-end experiments against round-robin
//!    and random baselines ([`baselines`]) and writes CSV/JSON metrics.
//!
//! [`circuit`] supplies the three benchmark circuit families (GHZ, QFT,
//! Deutsch-Jozsa) and the weighted interaction graphs everything runs on.

pub mod allocation;
pub mod baselines;
pub mod circuit;
pub mod error;
pub mod grouping;
pub mod harness;
pub mod rng;

pub use allocation::{
    allocate, client_cost, exhaustive_min_allocation, optimal_loads, poa_certificate,
    system_cost, verify_nash, AllocationMatrix, AllocationStrategy, CostModel, DemandVector,
    Deviation, LoadUnit, LoadVector, NashCertificate, NodeSpec,
};
pub use baselines::{
    kernighan_lin_bisect, kl_partition, random_allocate, recursive_partition,
    round_robin_allocate, KlBisection,
};
pub use circuit::{
    generate_dj, generate_ghz, generate_qft, CircuitSpec, Gate, InteractionGraph,
};
pub use error::{Error, Result};
pub use grouping::{
    count_remote_gates, partition_report, pragm_partition, select_max_weight_subset,
    select_max_weight_subset_within, PartitionMatrix, PartitionReport, SubsetMode,
};
pub use harness::{
    build_cloud, run_experiment, run_trial, sample_workload, AllocatorArm, ArmSelection,
    CircuitKind, ExperimentConfig, ExperimentResult, MetricsRecord,
};
pub use rng::RngStream;
