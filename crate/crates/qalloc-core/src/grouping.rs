//! Turning an allocation matrix into concrete qubit placements.
//!
//! The allocation game only fixes how many qubits of each circuit land on
//! each node. This module picks which qubits: for every nonzero cell it
//! selects the subset of the still-unassigned qubits with the most internal
//! gate weight, so as many two-qubit gates as possible stay local to one
//! node.

use std::collections::BTreeSet;

use serde_json::json;

use crate::allocation::AllocationMatrix;
use crate::circuit::{CircuitSpec, InteractionGraph};
use crate::error::{Error, Result};

/// How [`select_max_weight_subset`] searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetMode {
    /// Seed with the heaviest edge, then grow by best marginal weight.
    Greedy,
    /// Try every subset; refuses beyond [`SUBSET_ENUMERATION_LIMIT`].
    Exhaustive,
}

/// Guard on `C(|V|, m)` for exhaustive subset search.
pub const SUBSET_ENUMERATION_LIMIT: u128 = 100_000;

/// Picks `m` vertices of `g` maximizing internal edge weight.
///
/// Exhaustive mode returns the true maximum, breaking ties toward the
/// lexicographically smallest sorted vertex list. Greedy mode seeds with
/// the endpoints of the maximum-weight edge (ties toward the smallest
/// pair), repeatedly adds the vertex with the highest weight into the
/// current set (ties toward the lowest index), and pads with the
/// lowest-index unused vertices when no edges remain to guide it.
pub fn select_max_weight_subset(
    g: &InteractionGraph,
    m: usize,
    mode: SubsetMode,
) -> Result<Vec<usize>> {
    let all: Vec<usize> = (0..g.num_vertices()).collect();
    select_max_weight_subset_within(g, &all, m, mode)
}

/// [`select_max_weight_subset`] restricted to the induced subgraph on
/// `candidates` (original vertex labels are kept).
pub fn select_max_weight_subset_within(
    g: &InteractionGraph,
    candidates: &[usize],
    m: usize,
    mode: SubsetMode,
) -> Result<Vec<usize>> {
    let mut sorted: Vec<usize> = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != candidates.len() {
        return Err(Error::invalid("candidate vertices must be distinct"));
    }
    if let Some(&v) = sorted.iter().find(|&&v| v >= g.num_vertices()) {
        return Err(Error::invalid(format!(
            "vertex {v} out of range for {} vertices",
            g.num_vertices()
        )));
    }
    if m > sorted.len() {
        return Err(Error::invalid(format!(
            "cannot select {m} vertices from {} candidates",
            sorted.len()
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    match mode {
        SubsetMode::Exhaustive => select_exhaustive(g, &sorted, m),
        SubsetMode::Greedy => Ok(select_greedy(g, &sorted, m)),
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

fn select_exhaustive(g: &InteractionGraph, candidates: &[usize], m: usize) -> Result<Vec<usize>> {
    let count = binomial(candidates.len(), m);
    if count > SUBSET_ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: SUBSET_ENUMERATION_LIMIT,
        });
    }

    // lexicographic combination walk; strict improvement keeps the first
    // (smallest) subset among ties
    let n = candidates.len();
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: Option<(u64, Vec<usize>)> = None;
    loop {
        let subset: Vec<usize> = idx.iter().map(|&i| candidates[i]).collect();
        let weight = g.subgraph_weight(&subset)?;
        if best.as_ref().map_or(true, |(w, _)| weight > *w) {
            best = Some((weight, subset));
        }
        // advance to the next combination
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(best.expect("at least one combination visited").1);
            }
            i -= 1;
            if idx[i] != i + n - m {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn select_greedy(g: &InteractionGraph, candidates: &[usize], m: usize) -> Vec<usize> {
    let in_candidates = {
        let set: BTreeSet<usize> = candidates.iter().copied().collect();
        move |v: usize| set.contains(&v)
    };

    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut used = vec![false; g.num_vertices()];

    if m >= 2 {
        // heaviest candidate-internal edge; BTreeMap order makes the first
        // maximal edge the lexicographically smallest pair
        let mut seed: Option<(u64, usize, usize)> = None;
        for (u, v, w) in g.edges() {
            if in_candidates(u) && in_candidates(v) && seed.as_ref().map_or(true, |(bw, _, _)| w > *bw)
            {
                seed = Some((w, u, v));
            }
        }
        if let Some((_, u, v)) = seed {
            chosen.push(u);
            chosen.push(v);
            used[u] = true;
            used[v] = true;
        }
    }

    while chosen.len() < m {
        let mut best: Option<(u64, usize)> = None;
        for &v in candidates {
            if used[v] {
                continue;
            }
            let gain: u64 = chosen.iter().map(|&u| g.weight(u, v)).sum();
            if best.as_ref().map_or(true, |(bg, _)| gain > *bg) {
                best = Some((gain, v));
            }
        }
        let (_, v) = best.expect("m <= candidate count");
        chosen.push(v);
        used[v] = true;
    }
    chosen.sort_unstable();
    chosen
}

/// Concrete qubit placement realizing an [`AllocationMatrix`]: cell `(j, k)`
/// holds the sorted qubit indices of circuit `j` assigned to node `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatrix {
    cells: Vec<Vec<Vec<usize>>>,
}

impl PartitionMatrix {
    pub fn num_clients(&self) -> usize {
        self.cells.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.cells.first().map_or(0, |r| r.len())
    }

    pub fn cell(&self, client: usize, node: usize) -> &[usize] {
        &self.cells[client][node]
    }

    pub fn row(&self, client: usize) -> &[Vec<usize>] {
        &self.cells[client]
    }

    /// Number of nodes circuit `client` is spread across.
    pub fn partition_count(&self, client: usize) -> usize {
        self.cells[client].iter().filter(|c| !c.is_empty()).count()
    }

    /// Checks the realization invariants: cell sizes match the allocation
    /// matrix and every row is a disjoint cover of its circuit's qubits.
    pub fn validate(&self, matrix: &AllocationMatrix, circuits: &[CircuitSpec]) -> Result<()> {
        if self.num_clients() != matrix.num_clients() || self.num_nodes() != matrix.num_nodes() {
            return Err(Error::invalid("partition shape does not match allocation"));
        }
        for (j, circuit) in circuits.iter().enumerate() {
            let mut seen = vec![false; circuit.num_qubits()];
            for (k, cell) in self.cells[j].iter().enumerate() {
                if cell.len() != matrix.get(j, k) as usize {
                    return Err(Error::invalid(format!(
                        "cell ({j}, {k}) holds {} qubits, allocation says {}",
                        cell.len(),
                        matrix.get(j, k)
                    )));
                }
                for &q in cell {
                    if q >= circuit.num_qubits() || seen[q] {
                        return Err(Error::invalid(format!(
                            "cell ({j}, {k}): qubit {q} out of range or duplicated"
                        )));
                    }
                    seen[q] = true;
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::invalid(format!(
                    "circuit {j}: some qubits were never assigned"
                )));
            }
        }
        Ok(())
    }

    /// JSON rendering: rows keyed by client id, nonempty cells keyed by node
    /// index, values sorted qubit arrays.
    pub fn to_json(&self, client_ids: &[usize]) -> serde_json::Value {
        let mut rows = serde_json::Map::new();
        for (j, row) in self.cells.iter().enumerate() {
            let id = client_ids.get(j).copied().unwrap_or(j);
            let mut cells = serde_json::Map::new();
            for (k, cell) in row.iter().enumerate() {
                if !cell.is_empty() {
                    cells.insert(k.to_string(), json!(cell));
                }
            }
            rows.insert(id.to_string(), serde_json::Value::Object(cells));
        }
        serde_json::Value::Object(rows)
    }

    pub(crate) fn from_cells(cells: Vec<Vec<Vec<usize>>>) -> Self {
        PartitionMatrix { cells }
    }
}

/// Per-circuit placement quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct PartitionReport {
    pub partition_count: usize,
    pub local_gate_weight: u64,
    pub remote_gate_weight: u64,
}

/// Realizes an allocation matrix as qubit sets, maximizing local gates.
///
/// Per circuit, nodes are visited in ascending index over the nonzero
/// entries of its row. A cell equal to the whole remainder is assigned
/// outright; otherwise the max-internal-weight subset of the remaining
/// qubits is selected (per `mode`) and removed.
pub fn pragm_partition(
    matrix: &AllocationMatrix,
    circuits: &[CircuitSpec],
    mode: SubsetMode,
) -> Result<PartitionMatrix> {
    if matrix.num_clients() != circuits.len() {
        return Err(Error::invalid(format!(
            "allocation has {} rows for {} circuits",
            matrix.num_clients(),
            circuits.len()
        )));
    }
    let mut cells = Vec::with_capacity(circuits.len());
    for (j, circuit) in circuits.iter().enumerate() {
        let row_sum: u64 = matrix.row(j).iter().map(|&g| g as u64).sum();
        if row_sum != circuit.num_qubits() as u64 {
            return Err(Error::invalid(format!(
                "circuit {j}: row sums to {row_sum}, circuit has {} qubits",
                circuit.num_qubits()
            )));
        }
        let graph = circuit.interaction_graph();
        let mut remaining: Vec<usize> = (0..circuit.num_qubits()).collect();
        let mut row: Vec<Vec<usize>> = vec![Vec::new(); matrix.num_nodes()];
        for k in 0..matrix.num_nodes() {
            let size = matrix.get(j, k) as usize;
            if size == 0 {
                continue;
            }
            let cell = if size == remaining.len() {
                std::mem::take(&mut remaining)
            } else {
                let subset = select_max_weight_subset_within(&graph, &remaining, size, mode)?;
                remaining.retain(|v| !subset.contains(v));
                subset
            };
            row[k] = cell;
        }
        cells.push(row);
    }
    Ok(PartitionMatrix::from_cells(cells))
}

/// Total weight of edges crossing between different sets of a row.
///
/// The sets must be pairwise disjoint and together cover every vertex.
/// Local plus remote weight always equals the graph's total weight.
pub fn count_remote_gates(cells: &[Vec<usize>], g: &InteractionGraph) -> Result<u64> {
    let mut owner: Vec<Option<usize>> = vec![None; g.num_vertices()];
    for (set_idx, cell) in cells.iter().enumerate() {
        for &v in cell {
            if v >= g.num_vertices() {
                return Err(Error::invalid(format!(
                    "vertex {v} out of range for {} vertices",
                    g.num_vertices()
                )));
            }
            if owner[v].is_some() {
                return Err(Error::invalid(format!("vertex {v} appears in two sets")));
            }
            owner[v] = Some(set_idx);
        }
    }
    if let Some(v) = owner.iter().position(|o| o.is_none()) {
        return Err(Error::invalid(format!("vertex {v} is not covered")));
    }
    Ok(g.edges()
        .filter(|&(u, v, _)| owner[u] != owner[v])
        .map(|(_, _, w)| w)
        .sum())
}

/// Per-circuit partition counts and local/remote gate weights for a
/// realized partition matrix.
pub fn partition_report(
    partition: &PartitionMatrix,
    circuits: &[CircuitSpec],
) -> Result<Vec<PartitionReport>> {
    if partition.num_clients() != circuits.len() {
        return Err(Error::invalid("partition rows do not match circuits"));
    }
    let mut reports = Vec::with_capacity(circuits.len());
    for (j, circuit) in circuits.iter().enumerate() {
        let graph = circuit.interaction_graph();
        let remote = count_remote_gates(partition.row(j), &graph)?;
        let mut local: u64 = 0;
        for cell in partition.row(j) {
            local += graph.subgraph_weight(cell)?;
        }
        debug_assert_eq!(local + remote, graph.total_weight());
        reports.push(PartitionReport {
            partition_count: partition.partition_count(j),
            local_gate_weight: local,
            remote_gate_weight: remote,
        });
    }
    Ok(reports)
}
