//! The resource-allocation game: cost model, water-filling load optimizer,
//! integer allocation strategies, and equilibrium/optimality certificates.
//!
//! A cloud is a list of [`NodeSpec`]s with linear per-node cost functions
//! `f_k(x) = a_k * x`. Clients bring integer qubit demands. An
//! [`AllocationMatrix`] assigns each client an integer number of qubits per
//! node subject to exact row sums (demand) and column caps (capacity).
//! System cost is `sum_k X_k * f_k(X_k)` over column loads `X_k`, which for
//! linear costs is a separable convex quadratic — so the load profile that
//! minimizes it has a closed-form KKT water-filling solution, and the
//! equilibrium of the selfish-client game coincides with that optimum.

use crate::error::{Error, Result};

/// One quantum node: qubit capacity and linear cost coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: usize,
    pub capacity: u32,
    pub cost_coefficient: f64,
}

impl NodeSpec {
    pub fn new(id: usize, capacity: u32, cost_coefficient: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid(format!("node {id}: capacity must be >= 1")));
        }
        if !(cost_coefficient > 0.0) || !cost_coefficient.is_finite() {
            return Err(Error::invalid(format!(
                "node {id}: cost coefficient must be positive and finite"
            )));
        }
        Ok(NodeSpec {
            id,
            capacity,
            cost_coefficient,
        })
    }
}

/// What the per-node cost function is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LoadUnit {
    /// `f_k(x) = a_k * x` with `x` the allocated qubits.
    #[serde(rename = "raw")]
    RawQubits,
    /// `f_k(x) = a_k * (100 * x / m_k)`, i.e. percent utilization.
    #[serde(rename = "percent")]
    PercentOfCapacity,
}

impl Default for LoadUnit {
    fn default() -> Self {
        LoadUnit::RawQubits
    }
}

/// Per-node cost evaluation. The coefficients themselves live on the nodes;
/// the model fixes the unit `f` is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CostModel {
    pub load_unit: LoadUnit,
}

impl CostModel {
    pub fn raw() -> Self {
        CostModel {
            load_unit: LoadUnit::RawQubits,
        }
    }

    pub fn percent() -> Self {
        CostModel {
            load_unit: LoadUnit::PercentOfCapacity,
        }
    }

    /// `f_k` evaluated at a load of `x` raw qubits on `node`.
    pub fn node_cost(&self, node: &NodeSpec, x: f64) -> f64 {
        match self.load_unit {
            LoadUnit::RawQubits => node.cost_coefficient * x,
            LoadUnit::PercentOfCapacity => {
                node.cost_coefficient * (100.0 * x / node.capacity as f64)
            }
        }
    }

    /// Coefficient `c_k` such that `x * f_k(x) = c_k * x^2`.
    pub fn quadratic_coefficient(&self, node: &NodeSpec) -> f64 {
        match self.load_unit {
            LoadUnit::RawQubits => node.cost_coefficient,
            LoadUnit::PercentOfCapacity => node.cost_coefficient * 100.0 / node.capacity as f64,
        }
    }
}

/// One positive integer demand per client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVector {
    demands: Vec<u32>,
}

impl DemandVector {
    pub fn new(demands: Vec<u32>) -> Result<Self> {
        if demands.is_empty() {
            return Err(Error::invalid("demand vector must not be empty"));
        }
        if let Some(i) = demands.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!("client {i}: demand must be >= 1")));
        }
        Ok(DemandVector { demands })
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn get(&self, client: usize) -> u32 {
        self.demands[client]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.demands
    }

    pub fn total(&self) -> u64 {
        self.demands.iter().map(|&d| d as u64).sum()
    }

    /// Errors unless total demand fits in total capacity.
    pub fn check_feasible(&self, nodes: &[NodeSpec]) -> Result<()> {
        let capacity: u64 = nodes.iter().map(|n| n.capacity as u64).sum();
        let demand = self.total();
        if demand > capacity {
            return Err(Error::infeasible(demand as f64, capacity as f64));
        }
        Ok(())
    }
}

/// Integer qubits-per-node assignment: rows are clients, columns are nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationMatrix {
    rows: Vec<Vec<u32>>,
}

impl AllocationMatrix {
    /// Wraps a rectangular, nonempty matrix.
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::invalid("allocation matrix must be nonempty"));
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::invalid("allocation matrix rows differ in length"));
        }
        Ok(AllocationMatrix { rows })
    }

    pub fn num_clients(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, client: usize, node: usize) -> u32 {
        self.rows[client][node]
    }

    pub fn row(&self, client: usize) -> &[u32] {
        &self.rows[client]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Column load `X_k`: qubits placed on node `k` across all clients.
    pub fn column_load(&self, node: usize) -> u64 {
        self.rows.iter().map(|r| r[node] as u64).sum()
    }

    pub fn loads(&self) -> Vec<u64> {
        (0..self.num_nodes()).map(|k| self.column_load(k)).collect()
    }

    /// Checks the game constraints exactly: every row sums to its client's
    /// demand and every column load fits its node's capacity.
    pub fn validate(&self, demands: &DemandVector, nodes: &[NodeSpec]) -> Result<()> {
        if self.num_clients() != demands.len() {
            return Err(Error::invalid(format!(
                "matrix has {} rows for {} clients",
                self.num_clients(),
                demands.len()
            )));
        }
        if self.num_nodes() != nodes.len() {
            return Err(Error::invalid(format!(
                "matrix has {} columns for {} nodes",
                self.num_nodes(),
                nodes.len()
            )));
        }
        for (j, row) in self.rows.iter().enumerate() {
            let sum: u64 = row.iter().map(|&g| g as u64).sum();
            if sum != demands.get(j) as u64 {
                return Err(Error::invalid(format!(
                    "client {j}: row sums to {sum}, demand is {}",
                    demands.get(j)
                )));
            }
        }
        for (k, node) in nodes.iter().enumerate() {
            let load = self.column_load(k);
            if load > node.capacity as u64 {
                return Err(Error::invalid(format!(
                    "node {k}: load {load} exceeds capacity {}",
                    node.capacity
                )));
            }
        }
        Ok(())
    }

    /// CSV rendering: one row per client, one column per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|g| g.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Per-node real-valued loads.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    pub loads: Vec<f64>,
}

impl LoadVector {
    pub fn total(&self) -> f64 {
        self.loads.iter().sum()
    }
}

/// Tolerance on the water-filling sum constraint.
const WATERFILL_TOL: f64 = 1e-9;

/// Minimizes `sum_k c_k * X_k^2` subject to `sum X_k = total_demand` and
/// `0 <= X_k <= m_k`, where `c_k` folds the cost coefficient and load unit
/// so the objective equals the system cost of the load profile.
///
/// Solved in closed form from the KKT conditions: `X_k = clamp(lambda /
/// (2 c_k), 0, m_k)` for a water level `lambda` found by bisection on the
/// monotone total-load function.
pub fn optimal_loads(
    total_demand: f64,
    nodes: &[NodeSpec],
    model: &CostModel,
) -> Result<LoadVector> {
    if nodes.is_empty() {
        return Err(Error::invalid("optimal_loads: no nodes"));
    }
    if !(total_demand > 0.0) || !total_demand.is_finite() {
        return Err(Error::invalid(
            "optimal_loads: total demand must be positive and finite",
        ));
    }
    let caps: Vec<f64> = nodes.iter().map(|n| n.capacity as f64).collect();
    let coeffs: Vec<f64> = nodes
        .iter()
        .map(|n| model.quadratic_coefficient(n))
        .collect();
    let capacity: f64 = caps.iter().sum();
    if total_demand > capacity + WATERFILL_TOL {
        return Err(Error::infeasible(total_demand, capacity));
    }

    let fill = |lambda: f64| -> Vec<f64> {
        coeffs
            .iter()
            .zip(&caps)
            .map(|(&c, &m)| (lambda / (2.0 * c)).clamp(0.0, m))
            .collect()
    };

    let mut lo = 0.0_f64;
    let mut hi = coeffs
        .iter()
        .zip(&caps)
        .map(|(&c, &m)| 2.0 * c * m)
        .fold(0.0_f64, f64::max);
    // lambda = hi saturates every node, so the target is bracketed.
    let mut loads = fill(hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        loads = fill(mid);
        let total: f64 = loads.iter().sum();
        if (total - total_demand).abs() <= WATERFILL_TOL {
            return Ok(LoadVector { loads });
        }
        if total < total_demand {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let total: f64 = loads.iter().sum();
    if (total - total_demand).abs() <= 1e-6 {
        // demand == total capacity pins lambda at the bracket edge
        return Ok(LoadVector { loads: fill(hi) });
    }
    Err(Error::invalid(format!(
        "optimal_loads: bisection failed to meet demand {total_demand} (got {total})"
    )))
}

/// How [`allocate`] arranges client rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationStrategy {
    /// Integerize the optimal load profile into per-node budgets, then fill
    /// client rows into those budgets in ascending node-cost order.
    MinCost,
    /// Concentrate each client on as few nodes as possible, choosing nodes
    /// by ascending marginal cost, before cost balance.
    SparseThenCost,
}

/// Computes a feasible integer allocation matrix for the given demands.
///
/// `MinCost` reproduces the cost-optimal load profile up to integer
/// rounding: column budgets come from [`optimal_loads`] via
/// largest-remainder apportionment, then clients fill the budgets greedily
/// in ascending `(cost coefficient, node index)` order.
///
/// `SparseThenCost` processes clients in descending-demand order and places
/// each on as few nodes as it can: repeatedly pick the node minimizing
/// `a_k * (current load + remaining demand)` among nodes with residual
/// capacity (ties to the lower index) and fill its residual capacity before
/// opening another node.
pub fn allocate(
    demands: &DemandVector,
    nodes: &[NodeSpec],
    model: &CostModel,
    strategy: AllocationStrategy,
) -> Result<AllocationMatrix> {
    if nodes.is_empty() {
        return Err(Error::invalid("allocate: no nodes"));
    }
    demands.check_feasible(nodes)?;
    let matrix = match strategy {
        AllocationStrategy::MinCost => allocate_min_cost(demands, nodes, model)?,
        AllocationStrategy::SparseThenCost => allocate_sparse(demands, nodes)?,
    };
    debug_assert!(matrix.validate(demands, nodes).is_ok());
    Ok(matrix)
}

fn allocate_min_cost(
    demands: &DemandVector,
    nodes: &[NodeSpec],
    model: &CostModel,
) -> Result<AllocationMatrix> {
    let total = demands.total();
    let loads = optimal_loads(total as f64, nodes, model)?;
    let budgets = largest_remainder_budgets(&loads.loads, total, nodes);

    // ascending (coefficient, index): cheap nodes soak up rows first
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        nodes[a]
            .cost_coefficient
            .partial_cmp(&nodes[b].cost_coefficient)
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut remaining = budgets;
    let mut rows = vec![vec![0u32; nodes.len()]; demands.len()];
    for (j, row) in rows.iter_mut().enumerate() {
        let mut need = demands.get(j);
        for &k in &order {
            if need == 0 {
                break;
            }
            let take = need.min(remaining[k]);
            if take > 0 {
                row[k] = take;
                remaining[k] -= take;
                need -= take;
            }
        }
        if need > 0 {
            return Err(Error::invalid(format!(
                "allocate: budgets exhausted with {need} qubits unplaced for client {j}"
            )));
        }
    }
    AllocationMatrix::new(rows)
}

/// Rounds real column loads to integer budgets summing exactly to `total`:
/// floor everything, then hand the leftover units to the largest fractional
/// parts (ties to the lower node index). A node at its capacity has
/// fractional part zero, so the extra unit never breaches a cap.
pub(crate) fn largest_remainder_budgets(loads: &[f64], total: u64, nodes: &[NodeSpec]) -> Vec<u32> {
    let mut budgets: Vec<u32> = Vec::with_capacity(loads.len());
    let mut fracs: Vec<(usize, f64)> = Vec::with_capacity(loads.len());
    let mut assigned: u64 = 0;
    for (k, &x) in loads.iter().enumerate() {
        let floor = x.floor().min(nodes[k].capacity as f64).max(0.0) as u32;
        budgets.push(floor);
        assigned += floor as u64;
        fracs.push((k, x - floor as f64));
    }
    fracs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut leftover = total.saturating_sub(assigned);
    for (k, _) in fracs {
        if leftover == 0 {
            break;
        }
        if budgets[k] < nodes[k].capacity {
            budgets[k] += 1;
            leftover -= 1;
        }
    }
    budgets
}

fn allocate_sparse(demands: &DemandVector, nodes: &[NodeSpec]) -> Result<AllocationMatrix> {
    let mut order: Vec<usize> = (0..demands.len()).collect();
    order.sort_by(|&a, &b| demands.get(b).cmp(&demands.get(a)).then(a.cmp(&b)));

    let mut load = vec![0u64; nodes.len()];
    let mut residual: Vec<u32> = nodes.iter().map(|n| n.capacity).collect();
    let mut rows = vec![vec![0u32; nodes.len()]; demands.len()];
    for &j in &order {
        let mut need = demands.get(j);
        while need > 0 {
            let mut best: Option<(f64, usize)> = None;
            for (k, node) in nodes.iter().enumerate() {
                if residual[k] == 0 {
                    continue;
                }
                let score = node.cost_coefficient * (load[k] as f64 + need as f64);
                match best {
                    Some((s, _)) if s <= score => {}
                    _ => best = Some((score, k)),
                }
            }
            let (_, k) = best.ok_or_else(|| {
                Error::invalid(format!(
                    "allocate: no residual capacity left for client {j}"
                ))
            })?;
            let take = need.min(residual[k]);
            rows[j][k] += take;
            residual[k] -= take;
            load[k] += take as u64;
            need -= take;
        }
    }
    AllocationMatrix::new(rows)
}

/// Eq.-style client cost: the sum of `f_k(X_k)` over every node the client
/// actually occupies (indicator on `g_i(q_k) > 0`).
pub fn client_cost(
    matrix: &AllocationMatrix,
    client: usize,
    model: &CostModel,
    nodes: &[NodeSpec],
) -> Result<f64> {
    if client >= matrix.num_clients() {
        return Err(Error::invalid(format!(
            "client index {client} out of range for {} clients",
            matrix.num_clients()
        )));
    }
    if matrix.num_nodes() != nodes.len() {
        return Err(Error::invalid("matrix width does not match node list"));
    }
    let loads = matrix.loads();
    Ok(nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| matrix.get(client, k) > 0)
        .map(|(k, node)| model.node_cost(node, loads[k] as f64))
        .sum())
}

/// Total system cost `sum_k X_k * f_k(X_k)`; for linear costs in raw qubits
/// this is `sum_k a_k * X_k^2`.
pub fn system_cost(matrix: &AllocationMatrix, model: &CostModel, nodes: &[NodeSpec]) -> f64 {
    assert_eq!(
        matrix.num_nodes(),
        nodes.len(),
        "matrix width does not match node list"
    );
    matrix
        .loads()
        .iter()
        .zip(nodes)
        .map(|(&x, node)| x as f64 * model.node_cost(node, x as f64))
        .sum()
}

/// A strictly improving unilateral deviation, if one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub row: Vec<u32>,
    pub cost: f64,
}

/// Outcome of checking one client's equilibrium condition.
#[derive(Debug, Clone, PartialEq)]
pub struct NashCertificate {
    pub client: usize,
    pub current_cost: f64,
    /// True when no alternative row strictly lowers the client's cost.
    pub is_equilibrium: bool,
    pub best_deviation: Option<Deviation>,
}

/// Enumeration guard shared by the exact certificates.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Exhaustively checks whether `client` can lower its own cost by changing
/// its row, holding everyone else fixed. Alternative rows range over all
/// compositions of the client's demand across nodes within the capacity
/// left by the other clients; refuses when that space exceeds
/// [`ENUMERATION_LIMIT`].
pub fn verify_nash(
    matrix: &AllocationMatrix,
    client: usize,
    nodes: &[NodeSpec],
    model: &CostModel,
) -> Result<NashCertificate> {
    if client >= matrix.num_clients() {
        return Err(Error::invalid(format!(
            "client index {client} out of range"
        )));
    }
    if matrix.num_nodes() != nodes.len() {
        return Err(Error::invalid("matrix width does not match node list"));
    }
    let demand: u32 = matrix.row(client).iter().sum();
    let loads = matrix.loads();
    // capacity available to this client on each node, own share included
    let avail: Vec<u32> = nodes
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let others = loads[k] - matrix.get(client, k) as u64;
            (n.capacity as u64 - others) as u32
        })
        .collect();

    let count = count_bounded_compositions(demand, &avail);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }

    let current_cost = client_cost(matrix, client, model, nodes)?;
    let others: Vec<u64> = loads
        .iter()
        .zip(matrix.row(client))
        .map(|(&x, &own)| x - own as u64)
        .collect();

    let mut best: Option<Deviation> = None;
    let mut row = vec![0u32; nodes.len()];
    enumerate_compositions(demand, &avail, &mut row, 0, &mut |candidate| {
        let cost: f64 = candidate
            .iter()
            .enumerate()
            .filter(|&(_, &g)| g > 0)
            .map(|(k, &g)| model.node_cost(&nodes[k], (others[k] + g as u64) as f64))
            .sum();
        let beats_current = cost < current_cost - 1e-9;
        let beats_best = best.as_ref().map_or(true, |b| cost < b.cost - 1e-12);
        if beats_current && beats_best {
            best = Some(Deviation {
                row: candidate.to_vec(),
                cost,
            });
        }
    });

    Ok(NashCertificate {
        client,
        current_cost,
        is_equilibrium: best.is_none(),
        best_deviation: best,
    })
}

/// Number of ways to write `total` as an ordered sum over `bounds.len()`
/// parts with part `k` at most `bounds[k]`. Saturating; compared against
/// [`ENUMERATION_LIMIT`] before any enumeration.
fn count_bounded_compositions(total: u32, bounds: &[u32]) -> u128 {
    // DP over nodes; ways[t] = compositions of t using the prefix
    let t = total as usize;
    let mut ways = vec![0u128; t + 1];
    ways[0] = 1;
    for &b in bounds {
        let mut next = vec![0u128; t + 1];
        // prefix sums keep this O(total) per node
        let mut window: u128 = 0;
        for target in 0..=t {
            window = window.saturating_add(ways[target]);
            if target > b as usize {
                window = window.saturating_sub(ways[target - b as usize - 1]);
            }
            next[target] = window;
        }
        ways = next;
    }
    ways[t]
}

fn enumerate_compositions(
    remaining: u32,
    bounds: &[u32],
    row: &mut Vec<u32>,
    index: usize,
    visit: &mut impl FnMut(&[u32]),
) {
    if index == bounds.len() {
        if remaining == 0 {
            visit(row);
        }
        return;
    }
    let tail: u64 = bounds[index + 1..].iter().map(|&b| b as u64).sum();
    let lo = (remaining as u64).saturating_sub(tail) as u32;
    let hi = remaining.min(bounds[index]);
    for g in lo..=hi {
        row[index] = g;
        enumerate_compositions(remaining - g, bounds, row, index + 1, visit);
    }
    row[index] = 0;
}

/// Exhaustive integer optimum: the feasible allocation matrix minimizing
/// system cost, found by enumerating every bounded row composition. The
/// first minimizer in row-major lexicographic order wins, so the result is
/// deterministic. Refuses when the search space exceeds
/// [`ENUMERATION_LIMIT`].
pub fn exhaustive_min_allocation(
    demands: &DemandVector,
    nodes: &[NodeSpec],
    model: &CostModel,
) -> Result<(AllocationMatrix, f64)> {
    demands.check_feasible(nodes)?;
    let caps: Vec<u32> = nodes.iter().map(|n| n.capacity).collect();
    let mut space: u128 = 1;
    for j in 0..demands.len() {
        space = space.saturating_mul(count_bounded_compositions(demands.get(j), &caps));
    }
    if space > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count: space,
            limit: ENUMERATION_LIMIT,
        });
    }

    struct Search<'a> {
        demands: &'a DemandVector,
        nodes: &'a [NodeSpec],
        model: &'a CostModel,
        rows: Vec<Vec<u32>>,
        best: Option<(Vec<Vec<u32>>, f64)>,
    }

    impl Search<'_> {
        fn descend(&mut self, client: usize, residual: &[u32]) {
            if client == self.demands.len() {
                let matrix = AllocationMatrix::new(self.rows.clone()).expect("rectangular");
                let cost = system_cost(&matrix, self.model, self.nodes);
                if self.best.as_ref().map_or(true, |(_, c)| cost < *c) {
                    self.best = Some((self.rows.clone(), cost));
                }
                return;
            }
            let mut row = vec![0u32; residual.len()];
            let mut candidates: Vec<Vec<u32>> = Vec::new();
            enumerate_compositions(
                self.demands.get(client),
                residual,
                &mut row,
                0,
                &mut |r| candidates.push(r.to_vec()),
            );
            for candidate in candidates {
                let next: Vec<u32> = residual
                    .iter()
                    .zip(&candidate)
                    .map(|(&r, &g)| r - g)
                    .collect();
                self.rows.push(candidate);
                self.descend(client + 1, &next);
                self.rows.pop();
            }
        }
    }

    let mut search = Search {
        demands,
        nodes,
        model,
        rows: Vec::new(),
        best: None,
    };
    search.descend(0, &caps);
    let (rows, cost) = search
        .best
        .ok_or_else(|| Error::infeasible(demands.total() as f64, 0.0))?;
    Ok((AllocationMatrix::new(rows)?, cost))
}

/// Price-of-anarchy certificate: the ratio of `matrix`'s system cost to the
/// exhaustive integer optimum. Always >= 1 for a feasible matrix; for
/// linear costs an equilibrium allocation stays within 4/3.
pub fn poa_certificate(
    matrix: &AllocationMatrix,
    demands: &DemandVector,
    nodes: &[NodeSpec],
    model: &CostModel,
) -> Result<f64> {
    matrix.validate(demands, nodes)?;
    let (_, optimum) = exhaustive_min_allocation(demands, nodes, model)?;
    Ok(system_cost(matrix, model, nodes) / optimum)
}
