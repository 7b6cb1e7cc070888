//! Experiment orchestration: builds seeded clouds and workloads, runs the
//! game-theoretic allocator against the round-robin and random arms on
//! identical inputs, and emits per-trial metrics as CSV plus an aggregate
//! JSON summary.

use std::fmt;
use std::path::Path;

use rand::Rng;

use crate::allocation::{
    allocate, system_cost, AllocationMatrix, AllocationStrategy, CostModel, DemandVector,
    LoadUnit, NodeSpec,
};
use crate::baselines::{kl_partition, random_allocate, round_robin_allocate};
use crate::circuit::{generate_dj, generate_ghz, generate_qft, CircuitSpec};
use crate::error::{Error, Result};
use crate::grouping::{partition_report, pragm_partition, PartitionMatrix, PartitionReport, SubsetMode};
use crate::rng::RngStream;

/// Benchmark circuit families available to a workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitKind {
    Qft,
    Dj,
    Ghz,
}

impl CircuitKind {
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "qft" => Ok(CircuitKind::Qft),
            "dj" => Ok(CircuitKind::Dj),
            "ghz" => Ok(CircuitKind::Ghz),
            other => Err(Error::Config(format!(
                "unknown circuit kind `{other}` (expected qft, dj, or ghz)"
            ))),
        }
    }

    /// Generates a circuit of exactly `width` qubits of this kind.
    pub fn generate(self, width: u32) -> Result<CircuitSpec> {
        match self {
            CircuitKind::Qft => generate_qft(width as usize),
            CircuitKind::Ghz => generate_ghz(width as usize),
            CircuitKind::Dj => {
                if width < 2 {
                    return Err(Error::invalid(
                        "dj circuits need a width of at least 2 (inputs plus ancilla)",
                    ));
                }
                generate_dj(width as usize - 1)
            }
        }
    }
}

impl fmt::Display for CircuitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            CircuitKind::Qft => "qft",
            CircuitKind::Dj => "dj",
            CircuitKind::Ghz => "ghz",
        };
        write!(f, "{token}")
    }
}

/// The three comparison arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocatorArm {
    Pragm,
    RoundRobin,
    Random,
}

impl AllocatorArm {
    pub const ALL: [AllocatorArm; 3] = [
        AllocatorArm::Pragm,
        AllocatorArm::RoundRobin,
        AllocatorArm::Random,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AllocatorArm::Pragm => "pragm",
            AllocatorArm::RoundRobin => "rr",
            AllocatorArm::Random => "random",
        }
    }
}

impl fmt::Display for AllocatorArm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Which arms an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmSelection {
    All,
    One(AllocatorArm),
}

impl ArmSelection {
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "all" => Ok(ArmSelection::All),
            "pragm" => Ok(ArmSelection::One(AllocatorArm::Pragm)),
            "rr" => Ok(ArmSelection::One(AllocatorArm::RoundRobin)),
            "random" => Ok(ArmSelection::One(AllocatorArm::Random)),
            other => Err(Error::Config(format!(
                "unknown allocator `{other}` (expected all, pragm, rr, or random)"
            ))),
        }
    }

    pub fn arms(self) -> Vec<AllocatorArm> {
        match self {
            ArmSelection::All => AllocatorArm::ALL.to_vec(),
            ArmSelection::One(arm) => vec![arm],
        }
    }
}

/// How often a trial redraws capacities before giving up on feasibility.
pub const FEASIBILITY_RETRIES: usize = 100;

/// Everything a seeded experiment needs. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub num_nodes: usize,
    pub capacity_range: (u32, u32),
    pub num_circuits: usize,
    pub width_range: (u32, u32),
    pub circuit_pool: Vec<CircuitKind>,
    pub cost_coefficient: f64,
    pub load_unit: LoadUnit,
    pub allocator: ArmSelection,
    pub trials: usize,
}

impl Default for ExperimentConfig {
    /// The reference setting: a 20-node cloud with capacities in [9, 19],
    /// eight circuits of widths in [30, 40] drawn from all three families,
    /// uniform coefficient 100.
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            num_nodes: 20,
            capacity_range: (9, 19),
            num_circuits: 8,
            width_range: (30, 40),
            circuit_pool: vec![CircuitKind::Qft, CircuitKind::Dj, CircuitKind::Ghz],
            cost_coefficient: 100.0,
            load_unit: LoadUnit::RawQubits,
            allocator: ArmSelection::All,
            trials: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_nodes == 0 {
            return Err(Error::Config("num_nodes must be at least 1".into()));
        }
        if self.num_circuits == 0 {
            return Err(Error::Config("num_circuits must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.capacity_range.0 == 0 || self.capacity_range.0 > self.capacity_range.1 {
            return Err(Error::Config(format!(
                "capacity_range ({}, {}) is empty or starts at zero",
                self.capacity_range.0, self.capacity_range.1
            )));
        }
        if self.width_range.0 == 0 || self.width_range.0 > self.width_range.1 {
            return Err(Error::Config(format!(
                "width_range ({}, {}) is empty or starts at zero",
                self.width_range.0, self.width_range.1
            )));
        }
        if self.circuit_pool.is_empty() {
            return Err(Error::Config("circuit_pool must not be empty".into()));
        }
        if !(self.cost_coefficient > 0.0) {
            return Err(Error::Config("cost_coefficient must be positive".into()));
        }
        Ok(())
    }

    /// Parses the flat `key = value` config format. Every field has a
    /// default (see [`ExperimentConfig::default`]); unknown keys are
    /// rejected. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            match key {
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| bad(format!("bad seed `{value}`")))?
                }
                "num_nodes" => {
                    cfg.num_nodes = value
                        .parse()
                        .map_err(|_| bad(format!("bad num_nodes `{value}`")))?
                }
                "capacity_range" => cfg.capacity_range = parse_range(value).map_err(bad)?,
                "num_circuits" => {
                    cfg.num_circuits = value
                        .parse()
                        .map_err(|_| bad(format!("bad num_circuits `{value}`")))?
                }
                "width_range" => cfg.width_range = parse_range(value).map_err(bad)?,
                "circuit_pool" => {
                    let kinds: Result<Vec<CircuitKind>> = value
                        .split(',')
                        .map(|t| CircuitKind::parse(t.trim()))
                        .collect();
                    cfg.circuit_pool = kinds.map_err(|e| bad(e.to_string()))?;
                }
                "cost_coefficient" => {
                    cfg.cost_coefficient = value
                        .parse()
                        .map_err(|_| bad(format!("bad cost_coefficient `{value}`")))?
                }
                "load_unit" => {
                    cfg.load_unit = match value {
                        "raw" => LoadUnit::RawQubits,
                        "percent" => LoadUnit::PercentOfCapacity,
                        other => {
                            return Err(bad(format!(
                                "unknown load_unit `{other}` (expected raw or percent)"
                            )))
                        }
                    }
                }
                "allocator" => {
                    cfg.allocator = ArmSelection::parse(value).map_err(|e| bad(e.to_string()))?
                }
                "trials" => {
                    cfg.trials = value
                        .parse()
                        .map_err(|_| bad(format!("bad trials `{value}`")))?
                }
                other => return Err(bad(format!("unknown config key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cost_model(&self) -> CostModel {
        CostModel {
            load_unit: self.load_unit,
        }
    }
}

fn parse_range(value: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = value
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{value}`"))?;
    let lo: u32 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad range bound `{lo}`"))?;
    let hi: u32 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad range bound `{hi}`"))?;
    Ok((lo, hi))
}

/// One arm's metrics for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub allocator: AllocatorArm,
    pub seed: u64,
    pub m: usize,
    /// `f_k(X_k)` per node.
    pub per_node_cost: Vec<f64>,
    /// System cost `sum_k X_k * f_k(X_k)`.
    pub total_cost: f64,
    pub max_node_cost: f64,
    /// Total partitions across circuits divided by `m`.
    pub normalized_partitions: f64,
    /// Total remote gates across circuits divided by `m`.
    pub normalized_remote_gates: f64,
}

/// Full artifacts of one arm in one trial, for inspection beyond metrics.
#[derive(Debug, Clone)]
pub struct ArmOutcome {
    pub arm: AllocatorArm,
    pub matrix: AllocationMatrix,
    pub partition: PartitionMatrix,
    pub reports: Vec<PartitionReport>,
    pub record: MetricsRecord,
}

/// One trial's inputs and every arm's outcome.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub cloud: Vec<NodeSpec>,
    pub workload: Vec<CircuitSpec>,
    pub arms: Vec<ArmOutcome>,
}

/// Draws a cloud: `num_nodes` nodes with capacities uniform in the
/// inclusive capacity range and a uniform cost coefficient.
pub fn build_cloud(cfg: &ExperimentConfig, rng: &mut RngStream) -> Vec<NodeSpec> {
    let (lo, hi) = cfg.capacity_range;
    (0..cfg.num_nodes)
        .map(|k| {
            let capacity = rng.gen_range(lo..=hi);
            NodeSpec::new(k, capacity, cfg.cost_coefficient)
                .expect("validated config yields valid nodes")
        })
        .collect()
}

/// Draws a workload: `num_circuits` circuits, kind uniform over the pool,
/// width uniform in the inclusive width range.
pub fn sample_workload(cfg: &ExperimentConfig, rng: &mut RngStream) -> Result<Vec<CircuitSpec>> {
    let (lo, hi) = cfg.width_range;
    (0..cfg.num_circuits)
        .map(|id| {
            let kind = cfg.circuit_pool[rng.gen_range(0..cfg.circuit_pool.len())];
            let width = rng.gen_range(lo..=hi);
            Ok(kind.generate(width)?.with_id(id))
        })
        .collect()
}

/// Runs one trial: draws a workload and a cloud, redrawing both up to
/// [`FEASIBILITY_RETRIES`] times until total demand fits total capacity,
/// then runs every selected arm on the identical inputs.
///
/// Arms consume independent substreams of the trial stream, so adding or
/// removing an arm never perturbs the others.
pub fn run_trial_detailed(cfg: &ExperimentConfig, rng: &RngStream) -> Result<TrialOutcome> {
    cfg.validate()?;
    let seed = rng.seed();
    let model = cfg.cost_model();

    let mut workload_rng = rng.substream(0);
    let mut cloud_rng = rng.substream(1);
    let mut workload = sample_workload(cfg, &mut workload_rng)?;
    let mut demands =
        DemandVector::new(workload.iter().map(|c| c.num_qubits() as u32).collect())?;
    let mut cloud = build_cloud(cfg, &mut cloud_rng);
    let mut attempts = 1;
    while demands.check_feasible(&cloud).is_err() {
        if attempts >= FEASIBILITY_RETRIES {
            demands.check_feasible(&cloud)?;
        }
        workload = sample_workload(cfg, &mut workload_rng)?;
        demands = DemandVector::new(workload.iter().map(|c| c.num_qubits() as u32).collect())?;
        cloud = build_cloud(cfg, &mut cloud_rng);
        attempts += 1;
    }

    let mut arms = Vec::new();
    for arm in cfg.allocator.arms() {
        let (matrix, partition) = match arm {
            AllocatorArm::Pragm => {
                let matrix = pragm_arm_allocate(&demands, &cloud, &model)?;
                let partition = pragm_partition(&matrix, &workload, SubsetMode::Greedy)?;
                (matrix, partition)
            }
            AllocatorArm::RoundRobin => {
                let matrix = round_robin_allocate(&demands, &cloud, 0)?;
                let mut kl_rng = rng.substream(3);
                let partition = kl_partition(&matrix, &workload, &mut kl_rng)?;
                (matrix, partition)
            }
            AllocatorArm::Random => {
                let mut alloc_rng = rng.substream(2);
                let matrix = random_allocate(&demands, &cloud, &mut alloc_rng)?;
                let mut kl_rng = rng.substream(4);
                let partition = kl_partition(&matrix, &workload, &mut kl_rng)?;
                (matrix, partition)
            }
        };
        matrix.validate(&demands, &cloud)?;
        partition.validate(&matrix, &workload)?;
        let reports = partition_report(&partition, &workload)?;
        let record = metrics_record(arm, seed, cfg, &matrix, &reports, &model, &cloud);
        arms.push(ArmOutcome {
            arm,
            matrix,
            partition,
            reports,
            record,
        });
    }
    Ok(TrialOutcome {
        seed,
        cloud,
        workload,
        arms,
    })
}

/// Qubits a single client may be placed above the equilibrium budgets.
/// Each overflow unit trades a couple of load units of system cost for a
/// chance to shave one partition off a circuit.
const ARM_OVERFLOW_CAP: u32 = 3;

/// Allocation used by the game-theoretic arm: column loads from the
/// water-filling equilibrium (integerized by largest remainder, exactly as
/// [`AllocationStrategy::MinCost`]), rows arranged to minimize partitions.
///
/// Clients are placed in descending-demand order. Each client gets the
/// smallest node subset whose budgets cover it, where up to
/// [`ARM_OVERFLOW_CAP`] qubits may spill above budget into raw capacity;
/// among subsets of that size, the one needing the least overflow wins,
/// then the least budget waste, then the lexicographically smallest
/// indices. The bounded overflow keeps the system cost within a whisker of
/// the `MinCost` optimum while circuits span markedly fewer nodes.
fn pragm_arm_allocate(
    demands: &DemandVector,
    nodes: &[NodeSpec],
    model: &CostModel,
) -> Result<AllocationMatrix> {
    demands.check_feasible(nodes)?;
    let total = demands.total();
    let loads = crate::allocation::optimal_loads(total as f64, nodes, model)?;
    let mut budget = crate::allocation::largest_remainder_budgets(&loads.loads, total, nodes);
    let mut raw: Vec<u32> = nodes.iter().map(|n| n.capacity).collect();

    let mut order: Vec<usize> = (0..demands.len()).collect();
    order.sort_by(|&a, &b| demands.get(b).cmp(&demands.get(a)).then(a.cmp(&b)));

    let mut rows = vec![vec![0u32; nodes.len()]; demands.len()];
    for &j in &order {
        let need = demands.get(j);
        let subset = min_count_subset(need, &budget, &raw, ARM_OVERFLOW_CAP).ok_or_else(|| {
            Error::invalid(format!("capacity exhausted while placing client {j}"))
        })?;
        // budget portions first, then overflow into raw headroom
        let mut remaining = need;
        for &k in &subset {
            let take = remaining.min(budget[k].min(raw[k]));
            rows[j][k] += take;
            budget[k] -= take;
            raw[k] -= take;
            remaining -= take;
        }
        for &k in &subset {
            if remaining == 0 {
                break;
            }
            let take = remaining.min(raw[k]);
            rows[j][k] += take;
            raw[k] -= take;
            remaining -= take;
        }
        if remaining > 0 {
            return Err(Error::invalid(format!(
                "capacity exhausted while placing client {j}"
            )));
        }
    }
    let matrix = AllocationMatrix::new(rows)?;
    debug_assert!(matrix.validate(demands, nodes).is_ok());
    Ok(matrix)
}

/// Smallest node subset (by count) whose budgets plus at most
/// `overflow_cap` units of raw headroom cover `need`. Ties break by least
/// overflow, then least budget waste, then lexicographic node indices.
/// Falls back to unlimited overflow when the cap admits no subset at all.
fn min_count_subset(
    need: u32,
    budget: &[u32],
    raw: &[u32],
    overflow_cap: u32,
) -> Option<Vec<usize>> {
    let open: Vec<usize> = (0..raw.len()).filter(|&k| raw[k] > 0).collect();
    if open.is_empty() {
        return None;
    }

    struct Search<'a> {
        open: &'a [usize],
        need: u32,
        budget: &'a [u32],
        raw: &'a [u32],
        cap: u32,
        subset: Vec<usize>,
        best: Option<(u32, u32, Vec<usize>)>,
    }

    impl Search<'_> {
        fn descend(&mut self, start: usize, t: usize) {
            if self.subset.len() == t {
                let raw_sum: u64 = self.subset.iter().map(|&k| self.raw[k] as u64).sum();
                if raw_sum < self.need as u64 {
                    return;
                }
                let budget_sum: u64 = self
                    .subset
                    .iter()
                    .map(|&k| self.budget[k].min(self.raw[k]) as u64)
                    .sum();
                let overflow = (self.need as u64).saturating_sub(budget_sum) as u32;
                if overflow > self.cap {
                    return;
                }
                let waste = budget_sum.saturating_sub(self.need as u64) as u32;
                if self
                    .best
                    .as_ref()
                    .map_or(true, |(o, w, _)| (overflow, waste) < (*o, *w))
                {
                    self.best = Some((overflow, waste, self.subset.clone()));
                }
                return;
            }
            for i in start..self.open.len() {
                if self.open.len() - i < t - self.subset.len() {
                    break;
                }
                self.subset.push(self.open[i]);
                self.descend(i + 1, t);
                self.subset.pop();
            }
        }
    }

    for t in 1..=open.len() {
        let mut search = Search {
            open: &open,
            need,
            budget,
            raw,
            cap: overflow_cap,
            subset: Vec::with_capacity(t),
            best: None,
        };
        search.descend(0, t);
        if let Some((_, _, subset)) = search.best {
            return Some(subset);
        }
    }
    if overflow_cap < u32::MAX {
        // no subset fits within the cap; cost matters less than feasibility
        return min_count_subset(need, budget, raw, u32::MAX);
    }
    None
}

/// [`run_trial_detailed`] reduced to the per-arm metrics.
pub fn run_trial(cfg: &ExperimentConfig, rng: &RngStream) -> Result<Vec<MetricsRecord>> {
    Ok(run_trial_detailed(cfg, rng)?
        .arms
        .into_iter()
        .map(|a| a.record)
        .collect())
}

fn metrics_record(
    arm: AllocatorArm,
    seed: u64,
    cfg: &ExperimentConfig,
    matrix: &AllocationMatrix,
    reports: &[PartitionReport],
    model: &CostModel,
    cloud: &[NodeSpec],
) -> MetricsRecord {
    let loads = matrix.loads();
    let per_node_cost: Vec<f64> = cloud
        .iter()
        .zip(&loads)
        .map(|(node, &x)| model.node_cost(node, x as f64))
        .collect();
    let max_node_cost = per_node_cost.iter().cloned().fold(0.0, f64::max);
    let m = cfg.num_circuits as f64;
    let partitions: usize = reports.iter().map(|r| r.partition_count).sum();
    let remote: u64 = reports.iter().map(|r| r.remote_gate_weight).sum();
    MetricsRecord {
        allocator: arm,
        seed,
        m: cfg.num_circuits,
        per_node_cost,
        total_cost: system_cost(matrix, model, cloud),
        max_node_cost,
        normalized_partitions: partitions as f64 / m,
        normalized_remote_gates: remote as f64 / m,
    }
}

/// Mean/min/max of one metric across trials.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    fn of(values: impl Iterator<Item = f64>) -> Stats {
        let values: Vec<f64> = values.collect();
        let n = values.len().max(1) as f64;
        Stats {
            mean: values.iter().sum::<f64>() / n,
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Aggregate of one arm across an experiment's trials.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ArmSummary {
    pub allocator: String,
    pub m: usize,
    pub trials: usize,
    pub total_cost: Stats,
    pub max_node_cost: Stats,
    pub normalized_partitions: Stats,
    pub normalized_remote_gates: Stats,
}

/// All records of a seeded experiment plus per-arm aggregates.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<MetricsRecord>,
    pub summaries: Vec<ArmSummary>,
}

/// Runs `cfg.trials` seeded trials (trial `t` uses seed `cfg.seed + t`) and
/// aggregates mean/min/max per metric per arm.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut records = Vec::new();
    for trial in 0..cfg.trials {
        let rng = RngStream::for_trial(cfg.seed, trial as u64);
        records.extend(run_trial(cfg, &rng)?);
    }
    let summaries = summarize(&records, cfg);
    Ok(ExperimentResult { records, summaries })
}

fn summarize(records: &[MetricsRecord], cfg: &ExperimentConfig) -> Vec<ArmSummary> {
    cfg.allocator
        .arms()
        .into_iter()
        .map(|arm| {
            let rows: Vec<&MetricsRecord> =
                records.iter().filter(|r| r.allocator == arm).collect();
            ArmSummary {
                allocator: arm.label().to_string(),
                m: cfg.num_circuits,
                trials: rows.len(),
                total_cost: Stats::of(rows.iter().map(|r| r.total_cost)),
                max_node_cost: Stats::of(rows.iter().map(|r| r.max_node_cost)),
                normalized_partitions: Stats::of(rows.iter().map(|r| r.normalized_partitions)),
                normalized_remote_gates: Stats::of(
                    rows.iter().map(|r| r.normalized_remote_gates),
                ),
            }
        })
        .collect()
}

impl ExperimentResult {
    /// CSV with one trial-level row (node fields `-`) and one row per node
    /// for each record. Row order follows the trial/arm execution order, so
    /// identical configs and seeds produce byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "allocator,seed,m,node_id,per_node_cost,total_cost,max_node_cost,normalized_partitions,normalized_remote_gates\n",
        );
        for r in &self.records {
            let tail = format!(
                "{},{},{},{}",
                r.total_cost, r.max_node_cost, r.normalized_partitions, r.normalized_remote_gates
            );
            out.push_str(&format!(
                "{},{},{},-,-,{}\n",
                r.allocator, r.seed, r.m, tail
            ));
            for (k, cost) in r.per_node_cost.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.allocator, r.seed, r.m, k, cost, tail
                ));
            }
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summaries).expect("summaries always serialize")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }

    pub fn write_summary(&self, path: &Path) -> Result<()> {
        write_file(path, &self.summary_json())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            seed: 7,
            num_nodes: 4,
            capacity_range: (5, 9),
            num_circuits: 3,
            width_range: (3, 6),
            circuit_pool: vec![CircuitKind::Qft, CircuitKind::Dj, CircuitKind::Ghz],
            cost_coefficient: 100.0,
            load_unit: LoadUnit::RawQubits,
            allocator: ArmSelection::All,
            trials: 2,
        }
    }

    #[test]
    fn cloud_capacities_respect_the_range() {
        let cfg = ExperimentConfig::default();
        let mut rng = RngStream::new(3);
        let cloud = build_cloud(&cfg, &mut rng);
        assert_eq!(cloud.len(), 20);
        assert!(cloud.iter().all(|n| (9..=19).contains(&n.capacity)));
    }

    #[test]
    fn degenerate_capacity_range_is_constant() {
        let cfg = ExperimentConfig {
            capacity_range: (11, 11),
            ..ExperimentConfig::default()
        };
        let mut rng = RngStream::new(3);
        assert!(build_cloud(&cfg, &mut rng).iter().all(|n| n.capacity == 11));
    }

    #[test]
    fn cloud_is_reproducible() {
        let cfg = ExperimentConfig::default();
        let a = build_cloud(&cfg, &mut RngStream::new(5));
        let b = build_cloud(&cfg, &mut RngStream::new(5));
        assert_eq!(a, b);
    }

    #[test]
    fn workload_widths_respect_the_range() {
        let cfg = ExperimentConfig::default();
        let mut rng = RngStream::new(11);
        let workload = sample_workload(&cfg, &mut rng).unwrap();
        assert_eq!(workload.len(), 8);
        assert!(workload
            .iter()
            .all(|c| (30..=40).contains(&c.num_qubits())));
    }

    #[test]
    fn single_kind_pool_is_honored() {
        let cfg = ExperimentConfig {
            circuit_pool: vec![CircuitKind::Ghz],
            ..ExperimentConfig::default()
        };
        let mut rng = RngStream::new(2);
        let workload = sample_workload(&cfg, &mut rng).unwrap();
        // GHZ interaction graphs are paths: edges = qubits - 1
        assert!(workload
            .iter()
            .all(|c| c.two_qubit_gate_count() == c.num_qubits() as u64 - 1));
    }

    #[test]
    fn workload_is_reproducible() {
        let cfg = ExperimentConfig::default();
        let a = sample_workload(&cfg, &mut RngStream::new(5)).unwrap();
        let b = sample_workload(&cfg, &mut RngStream::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_circuit_on_one_node_is_equal_across_arms() {
        let cfg = ExperimentConfig {
            seed: 3,
            num_nodes: 2,
            capacity_range: (10, 10),
            num_circuits: 1,
            width_range: (4, 4),
            circuit_pool: vec![CircuitKind::Ghz],
            ..ExperimentConfig::default()
        };
        let records = run_trial(&cfg, &RngStream::new(cfg.seed)).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert_eq!(r.normalized_partitions, 1.0);
            assert_eq!(r.normalized_remote_gates, 0.0);
            assert_eq!(r.total_cost, records[0].total_cost);
        }
    }

    #[test]
    fn trial_metrics_are_internally_consistent() {
        let cfg = tiny_config();
        let outcome = run_trial_detailed(&cfg, &RngStream::new(cfg.seed)).unwrap();
        for arm in &outcome.arms {
            let r = &arm.record;
            let max = r.per_node_cost.iter().cloned().fold(0.0, f64::max);
            assert_eq!(r.max_node_cost, max);
            let partitions: usize = arm.reports.iter().map(|x| x.partition_count).sum();
            assert_eq!(
                r.normalized_partitions,
                partitions as f64 / cfg.num_circuits as f64
            );
            for (report, circuit) in arm.reports.iter().zip(&outcome.workload) {
                assert_eq!(
                    report.local_gate_weight + report.remote_gate_weight,
                    circuit.two_qubit_gate_count()
                );
            }
        }
    }

    #[test]
    fn experiment_csv_is_deterministic() {
        let cfg = tiny_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.summary_json(), b.summary_json());
    }

    #[test]
    fn csv_shape_matches_contract() {
        let cfg = ExperimentConfig {
            trials: 1,
            allocator: ArmSelection::One(AllocatorArm::RoundRobin),
            ..tiny_config()
        };
        let result = run_experiment(&cfg).unwrap();
        let csv = result.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        // header + 1 trial row + one row per node
        assert_eq!(lines.len(), 1 + 1 + cfg.num_nodes);
        assert!(lines[0].starts_with("allocator,seed,m,node_id,per_node_cost"));
        assert!(lines[1].starts_with("rr,7,3,-,-,"));
        assert!(lines[2].starts_with("rr,7,3,0,"));
    }

    #[test]
    fn config_parsing_round_trip() {
        let text = "\
# reference run
seed = 42
num_nodes = 10
capacity_range = 5, 9
num_circuits = 4
width_range = 6,12
circuit_pool = ghz, qft
cost_coefficient = 50
load_unit = percent
allocator = rr
trials = 3
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.num_nodes, 10);
        assert_eq!(cfg.capacity_range, (5, 9));
        assert_eq!(cfg.width_range, (6, 12));
        assert_eq!(cfg.circuit_pool, vec![CircuitKind::Ghz, CircuitKind::Qft]);
        assert_eq!(cfg.load_unit, LoadUnit::PercentOfCapacity);
        assert_eq!(cfg.allocator, ArmSelection::One(AllocatorArm::RoundRobin));
        assert_eq!(cfg.trials, 3);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::parse("bogus = 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("allocator = fastest\n"),
            Err(Error::Parse { .. })
        ));
        assert!(ExperimentConfig::parse("trials = 0\n").is_err());
        assert!(ExperimentConfig::parse("capacity_range = 9\n").is_err());
    }

    #[test]
    fn infeasible_setup_errors_after_retries() {
        let cfg = ExperimentConfig {
            num_nodes: 1,
            capacity_range: (1, 1),
            num_circuits: 1,
            width_range: (5, 5),
            circuit_pool: vec![CircuitKind::Ghz],
            ..ExperimentConfig::default()
        };
        match run_trial(&cfg, &RngStream::new(0)) {
            Err(Error::Infeasible { .. }) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }
}
