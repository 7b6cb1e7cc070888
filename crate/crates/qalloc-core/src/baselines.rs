//! Comparison arms: round-robin and random allocators, and a Kernighan-Lin
//! partitioner that realizes their allocation rows.
//!
//! Both allocators fill each visited node's residual capacity as far as it
//! goes before moving on, which is what makes them cheap to run and
//! expensive to pay for: high-capacity nodes soak up load and their
//! quadratic cost spikes.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::allocation::{AllocationMatrix, DemandVector, NodeSpec};
use crate::circuit::{CircuitSpec, InteractionGraph};
use crate::error::{Error, Result};
use crate::grouping::PartitionMatrix;
use crate::rng::RngStream;

/// Places circuits in input order, starting each at the cursor node and
/// filling residual capacities circularly. The cursor then advances to the
/// node after the last one used, so consecutive circuits land on different
/// nodes even when capacity remains.
pub fn round_robin_allocate(
    demands: &DemandVector,
    nodes: &[NodeSpec],
    cursor: usize,
) -> Result<AllocationMatrix> {
    if nodes.is_empty() {
        return Err(Error::invalid("round_robin_allocate: no nodes"));
    }
    demands.check_feasible(nodes)?;
    let q = nodes.len();
    let mut residual: Vec<u32> = nodes.iter().map(|n| n.capacity).collect();
    let mut rows = vec![vec![0u32; q]; demands.len()];
    let mut cursor = cursor % q;
    for (j, row) in rows.iter_mut().enumerate() {
        let mut need = demands.get(j);
        let mut position = cursor;
        let mut last_used = None;
        while need > 0 {
            let take = need.min(residual[position]);
            if take > 0 {
                row[position] += take;
                residual[position] -= take;
                need -= take;
                last_used = Some(position);
            }
            if need > 0 {
                position = (position + 1) % q;
            }
        }
        if let Some(last) = last_used {
            cursor = (last + 1) % q;
        }
    }
    let matrix = AllocationMatrix::new(rows)?;
    debug_assert!(matrix.validate(demands, nodes).is_ok());
    Ok(matrix)
}

/// Places each circuit by repeatedly drawing a uniformly random node with
/// residual capacity and filling it as far as it goes.
pub fn random_allocate(
    demands: &DemandVector,
    nodes: &[NodeSpec],
    rng: &mut RngStream,
) -> Result<AllocationMatrix> {
    if nodes.is_empty() {
        return Err(Error::invalid("random_allocate: no nodes"));
    }
    demands.check_feasible(nodes)?;
    let mut residual: Vec<u32> = nodes.iter().map(|n| n.capacity).collect();
    let mut rows = vec![vec![0u32; nodes.len()]; demands.len()];
    for (j, row) in rows.iter_mut().enumerate() {
        let mut need = demands.get(j);
        while need > 0 {
            let open: Vec<usize> = (0..nodes.len()).filter(|&k| residual[k] > 0).collect();
            let k = open[rng.gen_range(0..open.len())];
            let take = need.min(residual[k]);
            row[k] += take;
            residual[k] -= take;
            need -= take;
        }
    }
    let matrix = AllocationMatrix::new(rows)?;
    debug_assert!(matrix.validate(demands, nodes).is_ok());
    Ok(matrix)
}

/// Result of one Kernighan-Lin bisection, with the cut weights before and
/// after refinement so monotone improvement is checkable per call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KlBisection {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub cut_weight: u64,
    pub initial_cut_weight: u64,
}

/// Classic Kernighan-Lin bisection into parts of the given (possibly
/// unequal) sizes.
///
/// Starts from a seeded random split, then repeats full passes of
/// gain-ordered pair swaps with locking, committing the best prefix of each
/// pass, until passes stop helping. Pair swaps preserve the part sizes
/// exactly, so unequal sizes need no special handling beyond capping each
/// pass at `min(s1, s2)` swaps. Zero-gain prefixes are committed for a
/// bounded number of consecutive passes; that walks the plateaus unequal
/// splits produce (a segment sliding along a path) without ever making the
/// cut worse. The returned cut is never worse than the initial split's.
pub fn kernighan_lin_bisect(
    g: &InteractionGraph,
    sizes: (usize, usize),
    rng: &mut RngStream,
) -> Result<KlBisection> {
    let all: Vec<usize> = (0..g.num_vertices()).collect();
    kl_bisect_subset(g, &all, sizes, rng)
}

/// [`kernighan_lin_bisect`] restricted to the induced subgraph on
/// `candidates` (original vertex labels are kept).
fn kl_bisect_subset(
    g: &InteractionGraph,
    candidates: &[usize],
    sizes: (usize, usize),
    rng: &mut RngStream,
) -> Result<KlBisection> {
    let (s1, s2) = sizes;
    if s1 + s2 != candidates.len() {
        return Err(Error::invalid(format!(
            "kernighan_lin_bisect: sizes {s1}+{s2} do not match {} vertices",
            candidates.len()
        )));
    }
    let n = candidates.len();
    if s1 == 0 || s2 == 0 {
        let mut side: Vec<usize> = candidates.to_vec();
        side.sort_unstable();
        let (left, right) = if s1 == 0 {
            (Vec::new(), side)
        } else {
            (side, Vec::new())
        };
        return Ok(KlBisection {
            left,
            right,
            cut_weight: 0,
            initial_cut_weight: 0,
        });
    }

    // local adjacency over the candidate set
    let mut local_of = std::collections::BTreeMap::new();
    for (i, &v) in candidates.iter().enumerate() {
        local_of.insert(v, i);
    }
    let mut w = vec![vec![0u64; n]; n];
    for (u, v, weight) in g.edges() {
        if let (Some(&a), Some(&b)) = (local_of.get(&u), local_of.get(&v)) {
            w[a][b] = weight;
            w[b][a] = weight;
        }
    }

    // seeded random split of the requested sizes
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut in_left = vec![false; n];
    for &i in order.iter().take(s1) {
        in_left[i] = true;
    }

    let cut = |in_left: &[bool]| -> u64 {
        let mut total = 0;
        for a in 0..n {
            for b in a + 1..n {
                if in_left[a] != in_left[b] {
                    total += w[a][b];
                }
            }
        }
        total
    };

    let initial_cut_weight = cut(&in_left);
    let mut current_cut = initial_cut_weight;
    let swaps_per_pass = s1.min(s2);
    let plateau_cap = n;
    let mut plateau_passes = 0;

    loop {
        // D[i] = external weight - internal weight for vertex i
        let mut d = vec![0i64; n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    let x = w[a][b] as i64;
                    if in_left[a] != in_left[b] {
                        d[a] += x;
                    } else {
                        d[a] -= x;
                    }
                }
            }
        }

        let mut locked = vec![false; n];
        let mut swaps: Vec<(usize, usize, i64)> = Vec::with_capacity(swaps_per_pass);
        for _ in 0..swaps_per_pass {
            let mut best: Option<(i64, usize, usize)> = None;
            for a in 0..n {
                if locked[a] || !in_left[a] {
                    continue;
                }
                for b in 0..n {
                    if locked[b] || in_left[b] {
                        continue;
                    }
                    let gain = d[a] + d[b] - 2 * w[a][b] as i64;
                    if best.map_or(true, |(g, _, _)| gain > g) {
                        best = Some((gain, a, b));
                    }
                }
            }
            let (gain, a, b) = match best {
                Some(t) => t,
                None => break,
            };
            locked[a] = true;
            locked[b] = true;
            swaps.push((a, b, gain));
            for x in 0..n {
                if locked[x] {
                    continue;
                }
                if in_left[x] {
                    d[x] += 2 * w[x][a] as i64 - 2 * w[x][b] as i64;
                } else {
                    d[x] += 2 * w[x][b] as i64 - 2 * w[x][a] as i64;
                }
            }
        }

        // longest best prefix of the tentative swap sequence
        let mut best_total = 0i64;
        let mut best_len = 0usize;
        let mut running = 0i64;
        for (i, &(_, _, gain)) in swaps.iter().enumerate() {
            running += gain;
            if running >= best_total {
                best_total = running;
                best_len = i + 1;
            }
        }
        if best_len == 0 {
            break;
        }
        if best_total > 0 {
            plateau_passes = 0;
        } else {
            plateau_passes += 1;
            if plateau_passes > plateau_cap {
                break;
            }
        }
        for &(a, b, _) in swaps.iter().take(best_len) {
            in_left.swap(a, b);
        }
        current_cut = (current_cut as i64 - best_total) as u64;
        debug_assert_eq!(current_cut, cut(&in_left));
    }

    let mut left: Vec<usize> = (0..n).filter(|&i| in_left[i]).map(|i| candidates[i]).collect();
    let mut right: Vec<usize> = (0..n)
        .filter(|&i| !in_left[i])
        .map(|i| candidates[i])
        .collect();
    left.sort_unstable();
    right.sort_unstable();
    Ok(KlBisection {
        left,
        right,
        cut_weight: current_cut,
        initial_cut_weight,
    })
}

/// Splits a graph into parts of the given sizes by recursive KL bisection:
/// the size list is halved (first half versus rest, in list order), the
/// vertex set is bisected accordingly, and each side recurses. Returned
/// sets match `target_sizes` in order.
pub fn recursive_partition(
    g: &InteractionGraph,
    target_sizes: &[usize],
    rng: &mut RngStream,
) -> Result<Vec<Vec<usize>>> {
    let total: usize = target_sizes.iter().sum();
    if total != g.num_vertices() {
        return Err(Error::invalid(format!(
            "recursive_partition: sizes sum to {total}, graph has {} vertices",
            g.num_vertices()
        )));
    }
    if target_sizes.is_empty() {
        return Err(Error::invalid("recursive_partition: no target sizes"));
    }
    let all: Vec<usize> = (0..g.num_vertices()).collect();
    recursive_split(g, &all, target_sizes, rng)
}

fn recursive_split(
    g: &InteractionGraph,
    candidates: &[usize],
    targets: &[usize],
    rng: &mut RngStream,
) -> Result<Vec<Vec<usize>>> {
    if targets.len() == 1 {
        let mut set = candidates.to_vec();
        set.sort_unstable();
        return Ok(vec![set]);
    }
    let mid = targets.len() / 2;
    let left_size: usize = targets[..mid].iter().sum();
    let right_size: usize = targets[mid..].iter().sum();
    let bisection = kl_bisect_subset(g, candidates, (left_size, right_size), rng)?;
    let mut out = recursive_split(g, &bisection.left, &targets[..mid], rng)?;
    out.extend(recursive_split(g, &bisection.right, &targets[mid..], rng)?);
    Ok(out)
}

/// Realizes an allocation matrix with KL partitioning: per circuit, the
/// nonzero row entries (in node order) become the target sizes of a
/// recursive bisection. This is how the baseline arms place qubits.
pub fn kl_partition(
    matrix: &AllocationMatrix,
    circuits: &[CircuitSpec],
    rng: &mut RngStream,
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
        let used: Vec<usize> = (0..matrix.num_nodes())
            .filter(|&k| matrix.get(j, k) > 0)
            .collect();
        let sizes: Vec<usize> = used.iter().map(|&k| matrix.get(j, k) as usize).collect();
        let graph = circuit.interaction_graph();
        let sets = if used.len() <= 1 {
            vec![(0..circuit.num_qubits()).collect::<Vec<usize>>()]
        } else {
            recursive_partition(&graph, &sizes, rng)?
        };
        let mut row: Vec<Vec<usize>> = vec![Vec::new(); matrix.num_nodes()];
        for (&k, set) in used.iter().zip(sets) {
            row[k] = set;
        }
        cells.push(row);
    }
    Ok(PartitionMatrix::from_cells(cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate_ghz, generate_qft};
    use crate::grouping::count_remote_gates;

    fn uniform_nodes(caps: &[u32]) -> Vec<NodeSpec> {
        caps.iter()
            .enumerate()
            .map(|(k, &m)| NodeSpec::new(k, m, 100.0).unwrap())
            .collect()
    }

    fn path(n: usize) -> InteractionGraph {
        generate_ghz(n).unwrap().interaction_graph()
    }

    #[test]
    fn round_robin_fits_on_first_node() {
        let demands = DemandVector::new(vec![4]).unwrap();
        let m = round_robin_allocate(&demands, &uniform_nodes(&[9, 9]), 0).unwrap();
        assert_eq!(m.rows(), &[vec![4, 0]]);
    }

    #[test]
    fn round_robin_spills_over() {
        let demands = DemandVector::new(vec![12]).unwrap();
        let m = round_robin_allocate(&demands, &uniform_nodes(&[9, 9]), 0).unwrap();
        assert_eq!(m.rows(), &[vec![9, 3]]);
    }

    #[test]
    fn round_robin_advances_between_circuits() {
        let demands = DemandVector::new(vec![4, 4]).unwrap();
        let m = round_robin_allocate(&demands, &uniform_nodes(&[9, 9]), 0).unwrap();
        assert_eq!(m.rows(), &[vec![4, 0], vec![0, 4]]);
    }

    #[test]
    fn round_robin_skips_full_nodes() {
        let demands = DemandVector::new(vec![9, 5, 4]).unwrap();
        let m = round_robin_allocate(&demands, &uniform_nodes(&[9, 9]), 0).unwrap();
        assert_eq!(m.rows(), &[vec![9, 0], vec![0, 5], vec![0, 4]]);
    }

    #[test]
    fn round_robin_is_deterministic() {
        let demands = DemandVector::new(vec![7, 3, 8]).unwrap();
        let nodes = uniform_nodes(&[5, 6, 7]);
        let a = round_robin_allocate(&demands, &nodes, 1).unwrap();
        let b = round_robin_allocate(&demands, &nodes, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_on_single_node_matches_round_robin() {
        let demands = DemandVector::new(vec![3, 4]).unwrap();
        let nodes = uniform_nodes(&[10]);
        let mut rng = RngStream::new(5);
        let r = random_allocate(&demands, &nodes, &mut rng).unwrap();
        let rr = round_robin_allocate(&demands, &nodes, 0).unwrap();
        assert_eq!(r, rr);
    }

    #[test]
    fn random_fills_everything_when_tight() {
        let demands = DemandVector::new(vec![6, 6, 6]).unwrap();
        let nodes = uniform_nodes(&[6, 6, 6]);
        let mut rng = RngStream::new(123);
        let m = random_allocate(&demands, &nodes, &mut rng).unwrap();
        assert_eq!(m.loads(), vec![6, 6, 6]);
    }

    #[test]
    fn random_is_reproducible_for_a_fixed_stream() {
        let demands = DemandVector::new(vec![12]).unwrap();
        let nodes = uniform_nodes(&[9, 9]);
        let m1 = random_allocate(&demands, &nodes, &mut RngStream::new(0)).unwrap();
        let m2 = random_allocate(&demands, &nodes, &mut RngStream::new(0)).unwrap();
        assert_eq!(m1, m2);
        // frozen regression vector for seed 0
        assert_eq!(m1.rows(), &[vec![3, 9]]);
    }

    #[test]
    fn kl_reaches_the_path_optimum() {
        let g = path(6);
        for seed in 0..20 {
            let r = kernighan_lin_bisect(&g, (3, 3), &mut RngStream::new(seed)).unwrap();
            assert_eq!(r.cut_weight, 1, "seed {seed}: {:?} | {:?}", r.left, r.right);
            assert!(r.cut_weight <= r.initial_cut_weight);
        }
    }

    #[test]
    fn kl_on_an_edgeless_graph() {
        let g = InteractionGraph::new(5).unwrap();
        let r = kernighan_lin_bisect(&g, (2, 3), &mut RngStream::new(1)).unwrap();
        assert_eq!(r.cut_weight, 0);
        assert_eq!(r.left.len(), 2);
        assert_eq!(r.right.len(), 3);
    }

    #[test]
    fn kl_on_k4_cuts_four() {
        let g = generate_qft(4).unwrap().interaction_graph();
        let r = kernighan_lin_bisect(&g, (2, 2), &mut RngStream::new(3)).unwrap();
        assert_eq!(r.cut_weight, 4);
    }

    #[test]
    fn kl_size_mismatch_rejected() {
        let g = path(5);
        assert!(kernighan_lin_bisect(&g, (2, 2), &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn recursive_single_target_is_identity() {
        let g = path(6);
        let sets = recursive_partition(&g, &[6], &mut RngStream::new(0)).unwrap();
        assert_eq!(sets, vec![vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn recursive_path_into_three() {
        let g = path(9);
        for seed in 0..10 {
            let sets = recursive_partition(&g, &[3, 3, 3], &mut RngStream::new(seed)).unwrap();
            let cells: Vec<Vec<usize>> = sets.clone();
            let cut = count_remote_gates(&cells, &g).unwrap();
            assert_eq!(cut, 2, "seed {seed}: {sets:?}");
        }
    }

    #[test]
    fn recursive_isolating_one_vertex() {
        let g = generate_qft(5).unwrap().interaction_graph();
        let sets = recursive_partition(&g, &[4, 1], &mut RngStream::new(7)).unwrap();
        assert_eq!(sets[1].len(), 1);
        let isolated = sets[1][0];
        let cut = count_remote_gates(&sets, &g).unwrap();
        assert_eq!(cut, g.weighted_degree(isolated));
    }

    #[test]
    fn kl_partition_realizes_rows() {
        let circuits = vec![
            generate_ghz(6).unwrap().with_id(0),
            generate_qft(4).unwrap().with_id(1),
        ];
        let demands = DemandVector::new(vec![6, 4]).unwrap();
        let nodes = uniform_nodes(&[5, 5, 5]);
        let matrix = round_robin_allocate(&demands, &nodes, 0).unwrap();
        let p = kl_partition(&matrix, &circuits, &mut RngStream::new(9)).unwrap();
        p.validate(&matrix, &circuits).unwrap();
    }
}
