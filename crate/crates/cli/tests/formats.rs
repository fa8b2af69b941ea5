use ilqgames::scenarios::make_hallway_3p;
use ilqgames::{solve, DerivativeMode, Initialization};
use ilqgames_cli::bench::{bench_one, read_csv, write_csv, BenchOptions, BENCH_SCHEMA};
use ilqgames_cli::document::{Corridor, PlanarLayout, SCHEMA_VERSION};
use ilqgames_cli::plot::{plot_rows, read_plot_csv, write_plot_csv};
use ilqgames_cli::{BenchmarkRecord, TrajectoryDocument};
use proptest::prelude::*;

fn any_float() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 8.0),
        Just(f64::MAX),
    ]
}

fn document() -> impl Strategy<Value = TrajectoryDocument> {
    (1usize..4, 1usize..3, 1usize..6, 1usize..5).prop_flat_map(|(players, m, horizon, per_player)| {
        let n = 4 * players.max(per_player);
        (
            prop::collection::vec(prop::collection::vec(any_float(), n), horizon + 1),
            prop::collection::vec(prop::collection::vec(any_float(), players * m), horizon),
            prop::collection::vec(any_float(), players),
            prop::collection::vec((any_float(), any_float()), players),
            any::<bool>(),
            0.001..1.0f64,
        )
            .prop_map(move |(states, controls, costs, goals, planar, dt)| TrajectoryDocument {
                schema_version: SCHEMA_VERSION,
                scenario: "generated".into(),
                num_players: players,
                state_dim: n,
                control_dims: vec![m; players],
                horizon,
                dt,
                mode: DerivativeMode::Manual,
                converged: planar,
                iterations: horizon,
                termination: "converged".into(),
                solve_time_ms: dt * 7.0,
                player_costs: costs,
                layout: planar.then(|| PlanarLayout {
                    position_indices: (0..players).map(|i| 4 * i).collect(),
                    heading_indices: (0..players).map(|i| 4 * i + 2).collect(),
                    goals: goals.iter().map(|&(x, y)| [x, y]).collect(),
                    corridor: Some(Corridor {
                        y_min: -1.0,
                        y_max: 1.0,
                        x_min: goals[0].0,
                        x_max: goals[0].1,
                    }),
                }),
                states,
                controls,
            })
    })
}

fn bits(rows: &[Vec<f64>]) -> Vec<Vec<u64>> {
    rows.iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect()
}

proptest! {
    #[test]
    fn documents_round_trip_bit_exactly(doc in document()) {
        prop_assert!(doc.validate().is_ok());
        let back = TrajectoryDocument::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(bits(&back.states), bits(&doc.states));
        prop_assert_eq!(bits(&back.controls), bits(&doc.controls));
        prop_assert_eq!(&back, &doc);
    }

    #[test]
    fn plot_positions_round_trip_bit_exactly(doc in document()) {
        prop_assume!(doc.layout.is_some());
        let rows = plot_rows(&doc).unwrap();
        let mut csv = Vec::new();
        write_plot_csv(&mut csv, &rows).unwrap();
        let back = read_plot_csv(std::str::from_utf8(&csv).unwrap()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            prop_assert_eq!((a.x.to_bits(), a.y.to_bits()), (b.x.to_bits(), b.y.to_bits()));
            prop_assert_eq!(a.heading.map(f64::to_bits), b.heading.map(f64::to_bits));
        }
    }

    #[test]
    fn bench_records_round_trip(mean in 0.0..1e4f64, std in 0.0..1e3f64, hits in 0usize..=20) {
        let record = BenchmarkRecord {
            schema: BENCH_SCHEMA.into(),
            problem: "lq2p2d".into(),
            variant: "MD".into(),
            players: 2,
            state_dim: 2,
            horizon: 100,
            repetitions: 5,
            mean_ms: mean,
            std_ms: std,
            solver_mean_ms: mean * 0.99,
            samples: 20,
            converged_fraction: hits as f64 / 20.0,
            jitter: 0.2,
        };
        let mut csv = Vec::new();
        write_csv(&mut csv, std::slice::from_ref(&record)).unwrap();
        let back = read_csv(std::str::from_utf8(&csv).unwrap()).unwrap();
        prop_assert_eq!(back, vec![record]);
    }
}

#[test]
fn document_matches_the_solve() {
    let s = make_hallway_3p();
    let result = solve(&s.problem, Initialization::zero(&s.problem, s.initial_state.clone()), &s.solver).unwrap();
    let doc = TrajectoryDocument::from_solve(&s, DerivativeMode::Manual, &result);
    doc.validate().unwrap();
    assert_eq!(doc.player_costs, result.player_costs);
    for (row, x) in doc.states.iter().zip(&result.trajectory.states) {
        assert_eq!(row.as_slice(), x.as_slice());
    }
    let traces = doc.positions(1).unwrap();
    assert_eq!(traces.len(), 101);
    assert_eq!(traces[0], [6.0, 0.0]);
}

#[test]
fn harness_timing_matches_the_solver_clock() {
    let options = BenchOptions {
        reps: 5,
        samples: 1,
        ..BenchOptions::default()
    };
    for problem in ["lq2p2d", "nonlinear3p12d"] {
        let r = bench_one(problem, DerivativeMode::Manual, &options).unwrap();
        let overhead = (r.mean_ms - r.solver_mean_ms).abs() / r.mean_ms;
        assert!(overhead <= 0.05, "{problem}: harness {} ms vs solver {} ms", r.mean_ms, r.solver_mean_ms);
    }
}

#[test]
fn lq_benchmark_is_faster_and_always_converges() {
    let options = BenchOptions {
        reps: 3,
        samples: 20,
        ..BenchOptions::default()
    };
    let lq = bench_one("lq2p2d", DerivativeMode::Manual, &options).unwrap();
    let nonlinear = bench_one("nonlinear3p12d", DerivativeMode::Manual, &options).unwrap();
    assert_eq!(lq.converged_fraction, 1.0);
    assert!(lq.mean_ms < nonlinear.mean_ms);
}
