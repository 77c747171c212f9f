use treepar::bench::{
    affinity_sweep, bench_csv, coefficient_of_variation, games_per_second_probe, probe_csv_header, run_bandwidth,
    run_kernel, second_move_position, tree_size_probe, Benchmark, ElementType, KernelSpec, BENCH_CSV_HEADER,
};
use treepar::core::{AffinityPolicy, Budget, Cell, Point, SearchConfig};

fn small(element_type: ElementType, threads: usize) -> KernelSpec {
    KernelSpec {
        array_length: 4096,
        repetitions: 500,
        ..KernelSpec::compute(element_type, threads)
    }
}

#[test]
fn kernels_verify_their_checksums() {
    for ty in [ElementType::Int32, ElementType::Float64] {
        for threads in [1, 3] {
            let r = run_kernel(&small(ty, threads)).unwrap();
            assert!(r.checksum_ok);
            assert_eq!(r.ops, 4096 * 500);
            assert!(r.ops_per_sec > 0.0);
        }
    }
    let int = run_kernel(&small(ElementType::Int32, 2)).unwrap();
    // Every c[j] ends at 2 * repetitions.
    assert_eq!(int.checksum, (4096 * 2 * 500) as f64);
}

#[test]
fn bandwidth_counts_four_accesses_per_element() {
    let spec = KernelSpec {
        array_length: 1 << 16,
        repetitions: 4,
        ..KernelSpec::bandwidth(1)
    };
    let r = run_bandwidth(&spec).unwrap();
    assert!(r.checksum_ok);
    let expected = (1u64 << 16) as f64 * 4.0 * 4.0 * 8.0 / r.elapsed_secs;
    assert!((r.bytes_per_sec / expected - 1.0).abs() < 1e-9);
}

#[test]
fn sweep_covers_every_combination() {
    let policies = [AffinityPolicy::None, AffinityPolicy::Compact];
    let results = affinity_sweep(Benchmark::Kernel, &small(ElementType::Int32, 1), &[1, 2], &policies).unwrap();
    assert_eq!(results.len(), 4);
    let csv = bench_csv(&results);
    assert_eq!(csv.lines().next(), Some(BENCH_CSV_HEADER));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn variation_of_constant_samples_is_zero() {
    assert_eq!(coefficient_of_variation(&[3.0; 5]), 0.0);
    let cv = coefficient_of_variation(&[1.0, 2.0, 3.0]);
    assert!((cv - 0.5).abs() < 1e-15);
}

#[test]
fn probes_start_after_the_center_stone() {
    let board = second_move_position(9).unwrap();
    assert_eq!(board.cell(Point::new(4, 4)), Cell::Black);
    assert_eq!(board.stone_count(), 1);
    let config = SearchConfig {
        budget: Budget::Playouts(2000),
        seed: 4,
        ..SearchConfig::default()
    };
    let tree = tree_size_probe(&config, &board).unwrap();
    assert_eq!(tree.playouts, 2000);
    assert_eq!(tree.nodes, tree.walked_nodes);
    let again = games_per_second_probe(&config, &board).unwrap();
    assert_eq!(
        (again.nodes, again.chosen_move.clone()),
        (tree.nodes, tree.chosen_move.clone())
    );
    let header = probe_csv_header(config.budget);
    let row = tree.csv_row(&config);
    assert_eq!(header.split(',').count(), row.split(',').count());
    assert!(row.starts_with("1,2000,2000,"));
}
