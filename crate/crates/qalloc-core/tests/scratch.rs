use qalloc_core::harness::{
    run_experiment, AllocatorArm, ArmSelection, CircuitKind, ExperimentConfig,
};
use qalloc_core::LoadUnit;

fn sweep_config(m: usize, widths: (u32, u32), seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        num_nodes: 20,
        capacity_range: (9, 19),
        num_circuits: m,
        width_range: widths,
        circuit_pool: vec![CircuitKind::Qft, CircuitKind::Dj, CircuitKind::Ghz],
        cost_coefficient: 100.0,
        load_unit: LoadUnit::RawQubits,
        allocator: ArmSelection::All,
        trials: 10,
    }
}

#[test]
fn probe_sweep() {
    for base_seed in [1u64, 40, 1000] {
        println!("=== base seed {base_seed} ===");
        for (m, widths) in [(8, (30, 40)), (10, (23, 33)), (14, (15, 25))] {
            let cfg = sweep_config(m, widths, base_seed);
            let start = std::time::Instant::now();
            let result = run_experiment(&cfg).unwrap();
            let elapsed = start.elapsed();
            let get = |arm: AllocatorArm| {
                result
                    .summaries
                    .iter()
                    .find(|s| s.allocator == arm.label())
                    .unwrap()
                    .clone()
            };
            let pragm = get(AllocatorArm::Pragm);
            let rr = get(AllocatorArm::RoundRobin);
            let random = get(AllocatorArm::Random);
            let red_rand = (random.total_cost.mean - pragm.total_cost.mean) / random.total_cost.mean;
            let red_rr = (rr.total_cost.mean - pragm.total_cost.mean) / rr.total_cost.mean;
            println!(
                "m={m}: cost pragm {:.0} rr {:.0} random {:.0} | red vs random {:.1}% vs rr {:.1}% | parts pragm {:.2} rr {:.2} rnd {:.2} | remote pragm {:.2} rr {:.2} rnd {:.2} | maxcost pragm {:.0} rr {:.0} rnd {:.0} | {:?}",
                pragm.total_cost.mean, rr.total_cost.mean, random.total_cost.mean,
                100.0 * red_rand, 100.0 * red_rr,
                pragm.normalized_partitions.mean, rr.normalized_partitions.mean, random.normalized_partitions.mean,
                pragm.normalized_remote_gates.mean, rr.normalized_remote_gates.mean, random.normalized_remote_gates.mean,
                pragm.max_node_cost.mean, rr.max_node_cost.mean, random.max_node_cost.mean,
                elapsed,
            );
        }
    }
}
