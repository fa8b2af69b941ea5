//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Every tolerance and time budget lives in
//! the constants below.

use std::time::{Duration, Instant};

use ilqgames::derivatives::{quadraticize_terminal, LinearDynamics, LqStage};
use ilqgames::scenarios::{builtin_config, make_freespace_5p, make_hallway_3p, make_lq_benchmark, ScenarioConfig, ScenarioDefinition};
use ilqgames::{
    best_response, linearize_step, quadraticize_stage, solve, solve_lq_game, solve_lq_game_with_values, stage_expansion, AffineStrategy,
    ControlPartition, DerivativeMode, DerivativeProvider, FeedbackStrategies, Initialization, LQApproximation, PlayerIndex,
    QuadraticPlayerCost, SolveResult, TerminalQuadratic,
};
use ilqgames_cli::bench::{bench_one, read_csv, write_csv, BenchOptions};
use ilqgames_cli::TrajectoryDocument;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LQR_CASES: usize = 50;
const LQR_REL_TOL: f64 = 1e-9;
const LQR_BUDGET: Duration = Duration::from_secs(1);

const NASH_CASES: usize = 20;
const NASH_TOL: f64 = 1e-6;
const NASH_BUDGET: Duration = Duration::from_secs(5);

const DERIV_POINTS: usize = 100;
const MD_AD_TOL: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-6;

const VARIANT_TOL: f64 = 1e-6;

const LQ_MAX_ITERATIONS: usize = 2;
const LQ_SAMPLES: usize = 20;

const HALLWAY_MAX_ITERATIONS: usize = 100;
const HALLWAY_SAMPLES: usize = 20;
const HALLWAY_MIN_FRACTION: f64 = 0.8;
const HALLWAY_SWEEP_BUDGET: Duration = Duration::from_secs(60);

const FREESPACE_BUDGET: Duration = Duration::from_secs(30);

const SINGLE_SOLVE_BUDGET: Duration = Duration::from_millis(100);

const SEED: u64 = 20_190_914;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn solve_from(s: &ScenarioDefinition, x0: DVector<f64>, mode: DerivativeMode) -> SolveResult {
    let config = s.solver.clone().with_derivatives(mode);
    solve(&s.problem, Initialization::zero(&s.problem, x0), &config).expect("solve runs")
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn psd(rng: &mut ChaCha8Rng, k: usize, shift: f64) -> DMatrix<f64> {
    let m = uniform(rng, k, k);
    m.transpose() * &m + DMatrix::identity(k, k) * shift
}

fn vector(rng: &mut ChaCha8Rng, k: usize) -> DVector<f64> {
    DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random time-varying LQ game with `Q ⪰ 0`, `R_ii ≻ 0` and `R_ij ⪰ 0`.
fn random_game(rng: &mut ChaCha8Rng, dims: &[usize], n: usize, horizon: usize) -> LQApproximation {
    let partition = ControlPartition::new(dims.to_vec()).unwrap();
    let m = partition.total();
    let stages = (0..horizon)
        .map(|_| LqStage {
            dynamics: LinearDynamics {
                a: uniform(rng, n, n),
                b: uniform(rng, n, m),
            },
            costs: (0..dims.len())
                .map(|i| QuadraticPlayerCost {
                    q: psd(rng, n, 0.0),
                    l: vector(rng, n),
                    r: dims.iter().enumerate().map(|(j, &d)| psd(rng, d, if i == j { 0.1 } else { 0.0 })).collect(),
                    r_lin: dims.iter().map(|&d| vector(rng, d)).collect(),
                })
                .collect(),
        })
        .collect();
    let terminal = (0..dims.len())
        .map(|_| TerminalQuadratic {
            q: psd(rng, n, 0.0),
            l: vector(rng, n),
        })
        .collect();
    LQApproximation { partition, stages, terminal }
}

/// Backward Riccati recursion for one player facing affine dynamics
/// `x' = A x + B u + c` and stage cost `½xᵀQx + lᵀx + ½uᵀRu + rᵀu`.
/// Returns `(K_t, k_t)` of the optimal law `u = −K x − k`.
struct RiccatiStage {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DVector<f64>,
    q: DMatrix<f64>,
    l: DVector<f64>,
    r: DMatrix<f64>,
    r_lin: DVector<f64>,
}

fn riccati(stages: &[RiccatiStage], q_final: &DMatrix<f64>, l_final: &DVector<f64>) -> Vec<(DMatrix<f64>, DVector<f64>)> {
    let mut s = q_final.clone();
    let mut s_lin = l_final.clone();
    let mut out = Vec::with_capacity(stages.len());
    for st in stages.iter().rev() {
        let drift = &s_lin + &s * &st.c;
        let h = &st.r + st.b.transpose() * &s * &st.b;
        let g = st.b.transpose() * &s * &st.a;
        let chol = h.clone().cholesky().expect("R + BᵀSB is positive definite");
        let k = chol.solve(&g);
        let kk = chol.solve(&(st.b.transpose() * &drift + &st.r_lin));
        s_lin = &st.l + st.a.transpose() * &drift - g.transpose() * &kk;
        s = &st.q + st.a.transpose() * &s * &st.a - g.transpose() * &k;
        s = (&s + s.transpose()) * 0.5;
        out.push((k, kk));
    }
    out.reverse();
    out
}

fn max_abs_mat(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

fn max_abs_vec(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..LQR_CASES {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=2);
        let horizon = rng.gen_range(1..=10);
        let game = random_game(&mut rng, &[m], n, horizon);
        let strategies = solve_lq_game(&game).map_err(|e| e.to_string())?;
        let stages: Vec<RiccatiStage> = game
            .stages
            .iter()
            .map(|st| RiccatiStage {
                a: st.dynamics.a.clone(),
                b: st.dynamics.b.clone(),
                c: DVector::zeros(n),
                q: st.costs[0].q.clone(),
                l: st.costs[0].l.clone(),
                r: st.costs[0].r[0].clone(),
                r_lin: st.costs[0].r_lin[0].clone(),
            })
            .collect();
        let oracle = riccati(&stages, &game.terminal[0].q, &game.terminal[0].l);
        let gains: Vec<_> = oracle.iter().map(|(k, _)| k.clone()).collect();
        let offsets: Vec<_> = oracle.iter().map(|(_, k)| k.clone()).collect();
        let gain_scale = gains.iter().map(|k| k.amax()).fold(f64::MIN_POSITIVE, f64::max);
        let offset_scale = offsets.iter().map(|k| k.amax()).fold(f64::MIN_POSITIVE, f64::max);
        worst = worst
            .max(max_abs_mat(&strategies.gains, &gains) / gain_scale)
            .max(max_abs_vec(&strategies.offsets, &offsets) / offset_scale);
    }
    let elapsed = started.elapsed();
    check(
        worst <= LQR_REL_TOL && elapsed < LQR_BUDGET,
        format!("{LQR_CASES} problems, worst relative error {worst:.2e} (tol {LQR_REL_TOL:.0e}), {elapsed:.2?} (budget {LQR_BUDGET:?})"),
    )
}

/// Best response of `player` computed by the Riccati oracle, with the other
/// players' strategies folded into the dynamics and the cost.
fn oracle_best_response(game: &LQApproximation, strategies: &FeedbackStrategies, player: usize) -> AffineStrategy {
    let part = &game.partition;
    let n = game.stages[0].dynamics.a.nrows();
    let stages: Vec<RiccatiStage> = game
        .stages
        .iter()
        .enumerate()
        .map(|(t, st)| {
            let cost = &st.costs[player];
            let mut a = st.dynamics.a.clone();
            let mut c = DVector::zeros(n);
            let mut q = cost.q.clone();
            let mut l = cost.l.clone();
            for j in (0..part.num_players()).filter(|&j| j != player) {
                let bj = st.dynamics.input(part, j);
                let pj = strategies.gains[t].rows(part.offset(j), part.dim(j)).into_owned();
                let aj = strategies.offsets[t].rows(part.offset(j), part.dim(j)).into_owned();
                // u_j = −P_j x − α_j
                a -= &bj * &pj;
                c -= &bj * &aj;
                q += pj.transpose() * &cost.r[j] * &pj;
                l += pj.transpose() * (&cost.r[j] * &aj - &cost.r_lin[j]);
            }
            RiccatiStage {
                a,
                b: st.dynamics.input(part, player),
                c,
                q,
                l,
                r: cost.r[player].clone(),
                r_lin: cost.r_lin[player].clone(),
            }
        })
        .collect();
    let oracle = riccati(&stages, &game.terminal[player].q, &game.terminal[player].l);
    AffineStrategy {
        gains: oracle.iter().map(|(k, _)| k.clone()).collect(),
        offsets: oracle.iter().map(|(_, k)| k.clone()).collect(),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let started = Instant::now();
    let (mut worst_library, mut worst_oracle): (f64, f64) = (0.0, 0.0);
    for case in 0..NASH_CASES {
        let players = if case % 2 == 0 { 2 } else { 3 };
        let dims: Vec<usize> = (0..players).map(|_| rng.gen_range(1..=2)).collect();
        let n = rng.gen_range(1..=4);
        let horizon = rng.gen_range(1..=10);
        let game = random_game(&mut rng, &dims, n, horizon);
        let strategies = solve_lq_game(&game).map_err(|e| e.to_string())?;
        for i in 0..players {
            let own = strategies.player(i);
            let br = best_response(&game, &strategies, PlayerIndex::new(i, players).unwrap()).map_err(|e| e.to_string())?;
            worst_library = worst_library.max(br.max_abs_difference(&own));
            worst_oracle = worst_oracle.max(oracle_best_response(&game, &strategies, i).max_abs_difference(&own));
        }
    }
    let elapsed = started.elapsed();
    check(
        worst_library <= NASH_TOL && worst_oracle <= NASH_TOL && elapsed < NASH_BUDGET,
        format!(
            "{NASH_CASES} games, best_response deviation {worst_library:.2e}, independent LQR deviation {worst_oracle:.2e} (tol {NASH_TOL:.0e}), {elapsed:.2?} (budget {NASH_BUDGET:?})"
        ),
    )
}

fn random_hallway_point(rng: &mut ChaCha8Rng, s: &ScenarioDefinition) -> (DVector<f64>, DVector<f64>, usize) {
    let mut x = DVector::zeros(s.problem.state_dim());
    for p in 0..s.problem.num_players() {
        x[4 * p] = rng.gen_range(-7.0..7.0);
        x[4 * p + 1] = rng.gen_range(-1.8..1.8);
        x[4 * p + 2] = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        x[4 * p + 3] = rng.gen_range(-0.5..3.0);
    }
    let u = DVector::from_fn(s.problem.control_dim(), |_, _| rng.gen_range(-2.0..2.0));
    (x, u, rng.gen_range(0..s.problem.horizon()))
}

fn criterion_3() -> Outcome {
    let s = make_hallway_3p();
    let p = &s.problem;
    let md = DerivativeProvider::Manual;
    let ad = DerivativeProvider::Automatic;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let (mut md_ad, mut fd): (f64, f64) = (0.0, 0.0);
    let central = |f: &dyn Fn(f64) -> DVector<f64>| (f(FD_STEP) - f(-FD_STEP)) / (2.0 * FD_STEP);

    for _ in 0..DERIV_POINTS {
        let (x, u, k) = random_hallway_point(&mut rng, &s);
        let t = p.time(k);
        let (lin_md, lin_ad) = (linearize_step(p, &md, &x, &u, k).unwrap(), linearize_step(p, &ad, &x, &u, k).unwrap());
        md_ad = md_ad.max((&lin_md.a - &lin_ad.a).amax()).max((&lin_md.b - &lin_ad.b).amax());
        for j in 0..x.len() {
            let col = central(&|h| {
                let mut xh = x.clone();
                xh[j] += h;
                p.step(&xh, &u, k).unwrap()
            });
            fd = fd.max((col - lin_ad.a.column(j)).amax());
        }
        for j in 0..u.len() {
            let col = central(&|h| {
                let mut uh = u.clone();
                uh[j] += h;
                p.step(&x, &uh, k).unwrap()
            });
            fd = fd.max((col - lin_ad.b.column(j)).amax());
        }

        for i in 0..p.num_players() {
            let (q_md, q_ad) = (quadraticize_stage(p, &md, i, &x, &u, k).unwrap(), quadraticize_stage(p, &ad, i, &x, &u, k).unwrap());
            md_ad = md_ad.max((&q_md.q - &q_ad.q).amax()).max((&q_md.l - &q_ad.l).amax());
            md_ad = md_ad.max(max_abs_mat(&q_md.r, &q_ad.r)).max(max_abs_vec(&q_md.r_lin, &q_ad.r_lin));
            let (t_md, t_ad) = (quadraticize_terminal(p, &md, i, &x).unwrap(), quadraticize_terminal(p, &ad, i, &x).unwrap());
            md_ad = md_ad.max((&t_md.q - &t_ad.q).amax()).max((&t_md.l - &t_ad.l).amax());

            // Raw AD expansion against central differences: gradient of
            // the cost, Hessian as the derivative of the gradient.
            let raw = stage_expansion(p, &ad, i, &x, &u, k).unwrap();
            let raw_md = stage_expansion(p, &md, i, &x, &u, k).unwrap();
            md_ad = md_ad.max((&raw.hess_x - &raw_md.hess_x).amax()).max((&raw.grad_x - &raw_md.grad_x).amax());
            md_ad = md_ad.max((&raw.hess_u - &raw_md.hess_u).amax()).max((&raw.grad_u - &raw_md.grad_u).amax());
            let cost = &p.costs()[i];
            for j in 0..x.len() {
                let g = central(&|h| {
                    let mut xh = x.clone();
                    xh[j] += h;
                    DVector::from_element(1, cost.stage(xh.as_slice(), u.as_slice(), t))
                });
                fd = fd.max((g[0] - raw.grad_x[j]).abs());
                let hcol = central(&|h| {
                    let mut xh = x.clone();
                    xh[j] += h;
                    stage_expansion(p, &ad, i, &xh, &u, k).unwrap().grad_x
                });
                fd = fd.max((hcol - raw.hess_x.column(j)).amax());
            }
            for j in 0..u.len() {
                let g = central(&|h| {
                    let mut uh = u.clone();
                    uh[j] += h;
                    DVector::from_element(1, cost.stage(x.as_slice(), uh.as_slice(), t))
                });
                fd = fd.max((g[0] - raw.grad_u[j]).abs());
                let hcol = central(&|h| {
                    let mut uh = u.clone();
                    uh[j] += h;
                    stage_expansion(p, &ad, i, &x, &uh, k).unwrap().grad_u
                });
                fd = fd.max((hcol - raw.hess_u.column(j)).amax());
            }
            for j in 0..x.len() {
                let g = central(&|h| {
                    let mut xh = x.clone();
                    xh[j] += h;
                    DVector::from_element(1, cost.terminal(xh.as_slice()))
                });
                fd = fd.max((g[0] - t_ad.l[j]).abs());
            }
        }
    }
    check(
        md_ad <= MD_AD_TOL && fd <= FD_TOL,
        format!("{DERIV_POINTS} points, MD vs AD {md_ad:.2e} (tol {MD_AD_TOL:.0e}), AD vs central differences {fd:.2e} (tol {FD_TOL:.0e})"),
    )
}

fn criterion_4() -> Outcome {
    let s = make_hallway_3p();
    let md = solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
    let ad = solve_from(&s, s.initial_state.clone(), DerivativeMode::Automatic);
    let diff = md.trajectory.max_state_difference(&ad.trajectory);
    check(
        md.converged && ad.converged && diff <= VARIANT_TOL,
        format!(
            "MD {} iterations, AD {} iterations, trajectories differ by {diff:.2e} (tol {VARIANT_TOL:.0e})",
            md.iterations, ad.iterations
        ),
    )
}

fn criterion_5() -> Outcome {
    let s = make_lq_benchmark();
    let canonical = solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
    let options = BenchOptions {
        reps: 5,
        samples: LQ_SAMPLES,
        seed: SEED,
        ..BenchOptions::default()
    };
    let lq = bench_one("lq2p2d", DerivativeMode::Manual, &options).map_err(|e| e.to_string())?;
    let nonlinear = bench_one("nonlinear3p12d", DerivativeMode::Manual, &BenchOptions { samples: 1, ..options }).map_err(|e| e.to_string())?;
    check(
        canonical.converged && canonical.iterations <= LQ_MAX_ITERATIONS && lq.converged_fraction == 1.0 && lq.mean_ms < nonlinear.mean_ms,
        format!(
            "{} iterations (max {LQ_MAX_ITERATIONS}), converged fraction {:.2} over {LQ_SAMPLES} samples, MD mean {:.3} ms vs nonlinear {:.3} ms",
            canonical.iterations, lq.converged_fraction, lq.mean_ms, nonlinear.mean_ms
        ),
    )
}

fn collision_free(s: &ScenarioDefinition, r: &SolveResult) -> bool {
    s.min_pairwise_distance(&r.trajectory).is_some_and(|d| d > s.collision_threshold)
}

fn criterion_6() -> Outcome {
    let s = make_hallway_3p();
    let canonical = solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
    let dmin = s.min_pairwise_distance(&canonical.trajectory).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let started = Instant::now();
    let mut good = 0;
    for _ in 0..HALLWAY_SAMPLES {
        let r = solve_from(&s, s.sample_initial_state(&mut rng), DerivativeMode::Manual);
        if r.converged && collision_free(&s, &r) {
            good += 1;
        }
    }
    let elapsed = started.elapsed();
    let fraction = good as f64 / HALLWAY_SAMPLES as f64;
    check(
        canonical.converged
            && canonical.iterations <= HALLWAY_MAX_ITERATIONS
            && dmin > s.collision_threshold
            && fraction >= HALLWAY_MIN_FRACTION
            && elapsed < HALLWAY_SWEEP_BUDGET,
        format!(
            "canonical: {} iterations, min distance {dmin:.3} m (threshold {}); converged collision-free {good}/{HALLWAY_SAMPLES} = {fraction:.2} (min {HALLWAY_MIN_FRACTION}); sweep {elapsed:.2?} (budget {HALLWAY_SWEEP_BUDGET:?})",
            canonical.iterations, s.collision_threshold
        ),
    )
}

fn criterion_7() -> Outcome {
    let s = make_freespace_5p();
    let started = Instant::now();
    let r = solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
    let elapsed = started.elapsed();
    let dmin = s.min_pairwise_distance(&r.trajectory).unwrap();
    check(
        r.converged && dmin > s.collision_threshold && elapsed < FREESPACE_BUDGET,
        format!(
            "{} iterations, min distance {dmin:.3} m (threshold {}), {elapsed:.2?} (budget {FREESPACE_BUDGET:?})",
            r.iterations, s.collision_threshold
        ),
    )
}

fn criterion_8() -> Outcome {
    let s = make_hallway_3p();
    solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
    let started = Instant::now();
    let r = solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
    let elapsed = started.elapsed();
    check(
        r.converged && elapsed < SINGLE_SOLVE_BUDGET,
        format!("MD hallway solve {elapsed:.2?} ({} iterations, budget {SINGLE_SOLVE_BUDGET:?})", r.iterations),
    )
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let mut fail = |what: &str| failures.push(what.to_owned());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);

    for _ in 0..20 {
        let dims: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=2)).collect();
        let n = rng.gen_range(1..=4);
        let horizon = rng.gen_range(1..=10);
        let game = random_game(&mut rng, &dims, n, horizon);
        let (strategies, values) = solve_lq_game_with_values(&game).unwrap();
        if values.iter().flatten().any(|v| (&v.z - v.z.transpose()).amax() > 1e-10) {
            fail("value matrices symmetric");
        }
        if solve_lq_game(&game).unwrap() != strategies {
            fail("LQ solve deterministic");
        }
        let c = rng.gen_range(0.1..10.0);
        let mut scaled = game.clone();
        scaled.stages.iter_mut().flat_map(|s| s.costs.iter_mut()).for_each(|q| q.scale(c));
        scaled.terminal.iter_mut().for_each(|t| {
            t.q *= c;
            t.l *= c;
        });
        let rescaled = solve_lq_game(&scaled).unwrap();
        let scale = strategies.gains.iter().map(|p| p.amax()).chain(strategies.offsets.iter().map(|a| a.amax())).fold(1.0, f64::max);
        if rescaled.max_abs_difference(&strategies) > 1e-9 * scale {
            fail("strategies invariant to cost scaling");
        }
    }

    for s in [make_lq_benchmark(), make_hallway_3p()] {
        let a = solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
        let b = solve_from(&s, s.initial_state.clone(), DerivativeMode::Manual);
        if !s.problem.is_feasible(&a.trajectory, 1e-10) {
            fail("solve result feasible");
        }
        if a.trajectory != b.trajectory || a.strategies != b.strategies || a.diagnostics != b.diagnostics {
            fail("iLQ solve deterministic");
        }
        let again = solve(&s.problem, Initialization::Trajectory(a.trajectory.clone()), &s.solver).unwrap();
        if again.iterations != 1 || again.trajectory.max_state_difference(&a.trajectory) >= s.solver.tolerance {
            fail("converged solution is a fixed point");
        }
        let doc = TrajectoryDocument::from_solve(&s, DerivativeMode::Manual, &a);
        if TrajectoryDocument::from_json(&doc.to_json()).ok().as_ref() != Some(&doc) {
            fail("trajectory document round trip");
        }
    }

    for name in ["lq2p2d", "hallway3", "freespace5"] {
        let config = builtin_config(name).unwrap();
        if ScenarioConfig::from_toml_str(&config.to_toml_string()).ok().as_ref() != Some(&config) {
            fail("scenario config round trip");
        }
    }

    let record = bench_one("lq2p2d", DerivativeMode::Automatic, &BenchOptions { reps: 2, samples: 2, ..BenchOptions::default() }).unwrap();
    let mut csv = Vec::new();
    write_csv(&mut csv, std::slice::from_ref(&record)).unwrap();
    if read_csv(std::str::from_utf8(&csv).unwrap()).ok() != Some(vec![record]) {
        fail("benchmark CSV round trip");
    }

    check(
        failures.is_empty(),
        if failures.is_empty() {
            "symmetry, scale equivariance, feasibility, fixed point, determinism and serialization round trips hold (full property suites run with the unit and integration tests)".into()
        } else {
            format!("violated: {}", failures.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("LQR reduction oracle", criterion_1),
        ("Nash best-response certificate", criterion_2),
        ("derivative cross-check", criterion_3),
        ("solver-variant equivalence", criterion_4),
        ("LQ one-shot", criterion_5),
        ("hallway behaviour", criterion_6),
        ("free-space scenario", criterion_7),
        ("performance smoke", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (index, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (status, detail) = match outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed += 1;
                ("FAIL", detail)
            }
        };
        println!("criterion {} [{status}] {name}: {detail}", index + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
