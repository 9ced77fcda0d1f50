//! End-to-end acceptance checks. Each test prints one `criterion N: PASS`
//! line with the measured margin; a failed assertion marks the criterion as
//! not met.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use hlipwalk::batch::run_scenarios;
use hlipwalk::geom::{linear_map, minkowski_sum, mrpi_outer, support, Zonotope};
use hlipwalk::hlip::{
    dlqr_gain, make_params, s2s_matrices, spectral_radius, HlipParams, LqrWeights,
};
use hlipwalk::planner::{make_path, sample_reference};
use hlipwalk::qp::{kkt_residual, solve_qp, QpProblem, QpStatus};
use hlipwalk::sim::{run_scenario, Plane, ScenarioConfig, ScenarioResult, SurrogateModelConfig};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn load_config(name: &str) -> ScenarioConfig {
    let text = fs::read_to_string(config_path(name)).unwrap();
    let cfg: ScenarioConfig = serde_json::from_str(&text).unwrap();
    cfg.validate().unwrap();
    cfg
}

/// Independent one-step oracle: impact relabeling, constant-velocity double
/// support, then RK4 integration of the pendulum through single support.
fn flow_oracle_step(x: &Vector3<f64>, u: f64, params: &HlipParams) -> Vector3<f64> {
    let (c, p, v) = (x[0], x[1], x[2]);
    let mut pp = p - u;
    let mut vv = v;
    pp += vv * params.t_dsp;
    let lam2 = params.lambda * params.lambda;
    let n = 4000;
    let h = params.t_ssp / n as f64;
    for _ in 0..n {
        let f = |p: f64, v: f64| (v, lam2 * p);
        let (k1p, k1v) = f(pp, vv);
        let (k2p, k2v) = f(pp + 0.5 * h * k1p, vv + 0.5 * h * k1v);
        let (k3p, k3v) = f(pp + 0.5 * h * k2p, vv + 0.5 * h * k2v);
        let (k4p, k4v) = f(pp + h * k3p, vv + h * k3v);
        pp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        vv += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    Vector3::new(c + u + (pp - p), pp, vv)
}

#[test]
fn criterion_1_s2s_matrices_match_flow_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut max_err = 0.0f64;
    for _ in 0..1000 {
        let z0 = rng.random_range(0.6..1.4);
        let g = rng.random_range(9.0..10.5);
        let t_ssp = rng.random_range(0.2..0.5);
        let t_dsp = rng.random_range(0.0..0.15);
        let params = make_params(z0, g, t_ssp, t_dsp).unwrap();
        let m = s2s_matrices(&params);
        let x = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let u = rng.random_range(-0.8..0.8);
        let predicted = m.a * x + m.b * u;
        let oracle = flow_oracle_step(&x, u, &params);
        max_err = max_err.max((predicted - oracle).amax());
    }
    let elapsed = start.elapsed();
    assert!(max_err < 1e-8, "max error {max_err:.3e} exceeds 1e-8");
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "criterion 1: PASS — 1000 random steps, max |closed form - RK4 oracle| = {max_err:.3e} in {elapsed:?}"
    );
}

#[test]
fn criterion_2_lqr_stabilizes_the_error_dynamics() {
    let params = make_params(1.0, 9.81, 0.35, 0.05).unwrap();
    let m = s2s_matrices(&params);
    let k = dlqr_gain(&m.a, &m.b, &LqrWeights::default()).unwrap();
    let acl = m.a + m.b * k;
    let rho = spectral_radius(&acl);
    assert!(rho < 1.0, "spectral radius {rho} not below 1");

    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut e = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        for _ in 0..50 {
            e = acl * e;
        }
        worst = worst.max(e.amax());
    }
    assert!(worst < 1e-6, "worst residual error {worst:.3e} after 50 steps");
    println!(
        "criterion 2: PASS — spectral radius {rho:.4}, worst |e| after 50 steps = {worst:.3e} over 100 starts"
    );
}

/// Brute-force reference: try every active set of one-sided constraints, keep
/// the feasible KKT point with the lowest objective.
fn enumerate_qp(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    sides: &[(DVector<f64>, f64)],
) -> Option<(DVector<f64>, f64)> {
    let n = f.len();
    let m = sides.len();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for mask in 0..(1u32 << m) {
        let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if active.len() > n {
            continue;
        }
        let s = active.len();
        let mut kkt = DMatrix::zeros(n + s, n + s);
        kkt.view_mut((0, 0), (n, n)).copy_from(h);
        for (row, &i) in active.iter().enumerate() {
            for col in 0..n {
                kkt[(n + row, col)] = sides[i].0[col];
                kkt[(col, n + row)] = sides[i].0[col];
            }
        }
        let mut rhs = DVector::zeros(n + s);
        for i in 0..n {
            rhs[i] = -f[i];
        }
        for (row, &i) in active.iter().enumerate() {
            rhs[n + row] = sides[i].1;
        }
        let lu = kkt.clone().full_piv_lu();
        let sol = match lu.solve(&rhs) {
            Some(v) => v,
            None => continue,
        };
        if ((&kkt * &sol) - &rhs).amax() > 1e-7 {
            continue;
        }
        let z = sol.rows(0, n).into_owned();
        let feasible = sides
            .iter()
            .all(|(a, b)| a.dot(&z) <= b + 1e-8);
        let duals_ok = (0..s).all(|row| sol[n + row] >= -1e-8);
        if !feasible || !duals_ok {
            continue;
        }
        let obj = 0.5 * (z.transpose() * h * &z)[0] + f.dot(&z);
        if best.as_ref().map_or(true, |(_, b)| obj < *b) {
            best = Some((z, obj));
        }
    }
    best
}

#[test]
fn criterion_3_qp_solver_matches_active_set_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut max_obj_gap = 0.0f64;
    let mut max_kkt = 0.0f64;
    for case in 0..50 {
        let n = rng.random_range(2..=6usize);
        let m_sides = rng.random_range(1..=8usize);
        let mm = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let h = &mm.transpose() * &mm + DMatrix::identity(n, n) * 0.5;
        let f = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let z_feas = DVector::from_fn(n, |_, _| rng.random_range(-0.5..0.5));

        // sides are a_i^T z <= b_i; rows of the two-sided problem pick a
        // direction at random so both bound kinds are exercised
        let mut sides = Vec::with_capacity(m_sides);
        let mut a_in = DMatrix::zeros(m_sides, n);
        let mut lb = DVector::from_element(m_sides, f64::NEG_INFINITY);
        let mut ub = DVector::from_element(m_sides, f64::INFINITY);
        for i in 0..m_sides {
            let a = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let slack = rng.random_range(0.05..1.0);
            let val = a.dot(&z_feas);
            a_in.row_mut(i).copy_from(&a.transpose());
            if rng.random_range(0.0..1.0) < 0.5 {
                ub[i] = val + slack;
                sides.push((a, val + slack));
            } else {
                lb[i] = val - slack;
                sides.push((-a, -(val - slack)));
            }
        }

        let p = QpProblem::inequality_constrained(h.clone(), f.clone(), a_in, lb, ub).unwrap();
        let sol = solve_qp(&p, None, 1e-10, 2000);
        assert_eq!(sol.status, QpStatus::Optimal, "case {case} not optimal");
        let kkt = kkt_residual(&p, &sol);
        max_kkt = max_kkt.max(kkt);

        let (_, best_obj) = enumerate_qp(&h, &f, &sides).expect("oracle found no optimum");
        let gap = (p.objective(&sol.z) - best_obj).abs();
        max_obj_gap = max_obj_gap.max(gap);
        assert!(gap < 1e-6, "case {case}: objective gap {gap:.3e}");
        assert!(kkt <= 1e-8, "case {case}: KKT residual {kkt:.3e}");
    }
    println!(
        "criterion 3: PASS — 50 random QPs, max objective gap {max_obj_gap:.3e}, max KKT residual {max_kkt:.3e}"
    );
}

fn certificate_directions() -> Vec<[f64; 3]> {
    let mut dirs = Vec::with_capacity(26);
    for sx in [-1.0, 0.0, 1.0] {
        for sy in [-1.0, 0.0, 1.0] {
            for sz in [-1.0, 0.0, 1.0] {
                let n = f64::sqrt(sx * sx + sy * sy + sz * sz);
                if n > 0.0 {
                    dirs.push([sx / n, sy / n, sz / n]);
                }
            }
        }
    }
    dirs
}

fn max_certificate_residual(acl: &Matrix3<f64>, w: &Zonotope, e: &Zonotope) -> f64 {
    let acl_dyn = DMatrix::from_column_slice(3, 3, acl.as_slice());
    let pushed = minkowski_sum(&linear_map(&acl_dyn, e).unwrap(), w).unwrap();
    certificate_directions()
        .iter()
        .map(|d| support(&pushed, d).unwrap() - support(e, d).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_4_rpi_certificate_and_geometric_series() {
    // contraction by 0.5 of a unit box has the closed-form invariant set 2*box
    let half = Matrix3::identity() * 0.5;
    let unit_box = Zonotope::new(
        vec![0.0; 3],
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
    )
    .unwrap();
    let e_box = mrpi_outer(&half, &unit_box, 1e-3).unwrap();
    let mut worst_ratio = 0.0f64;
    for i in 0..3 {
        let mut d = [0.0; 3];
        d[i] = 1.0;
        for sign in [1.0, -1.0] {
            let dir = [d[0] * sign, d[1] * sign, d[2] * sign];
            let s = support(&e_box, &dir).unwrap();
            let ratio = s / 2.0;
            assert!(
                (0.999..=1.05).contains(&ratio),
                "support {s} along axis {i} is off the 1/(1-0.5) closed form"
            );
            worst_ratio = worst_ratio.max((ratio - 1.0).abs());
        }
    }

    // certificate on the walking closed loop with a measured-scale W
    let params = make_params(1.0, 9.81, 0.35, 0.05).unwrap();
    let m = s2s_matrices(&params);
    let k = dlqr_gain(&m.a, &m.b, &LqrWeights::default()).unwrap();
    let acl = m.a + m.b * k;
    let w = Zonotope::new(
        vec![0.0016, 0.0027, 0.0119],
        vec![
            vec![0.022, 0.0, 0.0],
            vec![0.0, 0.034, 0.0],
            vec![0.0, 0.0, 0.113],
        ],
    )
    .unwrap();
    let e_set = mrpi_outer(&acl, &w, 1e-3).unwrap();
    let residual = max_certificate_residual(&acl, &w, &e_set);
    assert!(
        residual <= 1e-3,
        "certificate residual {residual:.3e} exceeds 1e-3"
    );
    println!(
        "criterion 4: PASS — geometric-series deviation {worst_ratio:.2}% of closed form, walking certificate residual {residual:.3e} over 26 directions",
    );
}

#[test]
fn criterion_5_step_errors_stay_inside_the_invariant_set() {
    let start = Instant::now();
    let calibration = load_config("calibration.json");
    let cal = run_scenario(&calibration, None).unwrap();
    assert!(cal.summary.failure.is_none());
    let w = cal.disturbance_w.clone().expect("calibration produced no W");

    let mut cfg = load_config("cardioid.json");
    cfg.disturbance_w = Some(w);
    let seeds: Vec<u64> = (2000..2020).collect();
    let results = run_scenarios(&cfg, &seeds);

    let mut counts = [[0usize; 2]; 2]; // [plane][inside?]
    for res in &results {
        let r = res.as_ref().expect("seeded run failed");
        assert!(!r.summary.fell, "a seeded run fell");
        for s in &r.steps {
            if let Some(inside) = s.e_in_set {
                let p = match s.plane {
                    Plane::X => 0,
                    Plane::Y => 1,
                };
                counts[p][usize::from(inside)] += 1;
            }
        }
    }
    let frac = |p: usize| {
        let total = counts[p][0] + counts[p][1];
        counts[p][1] as f64 / total as f64
    };
    let (fx, fy) = (frac(0), frac(1));
    let elapsed = start.elapsed();
    assert!(fx >= 0.99, "plane x containment {fx:.4} below 0.99");
    assert!(fy >= 0.99, "plane y containment {fy:.4} below 0.99");
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "criterion 5: PASS — containment in 1.05*E over 20 runs: plane x {fx:.4}, plane y {fy:.4}, in {elapsed:?}"
    );
}

/// Per-tick planar distance between the logged COM and the desired path.
fn tracking_errors(cfg: &ScenarioConfig, result: &ScenarioResult) -> Vec<(f64, f64)> {
    let path = make_path(&cfg.path, cfg.speed.v_max, cfg.speed.accel).unwrap();
    result
        .trajectory
        .iter()
        .map(|s| {
            let r = sample_reference(&path, s.t);
            (
                s.t,
                f64::hypot(s.com[0] - r.r[0], s.com[1] - r.r[1]),
            )
        })
        .collect()
}

fn max_heading_rate(result: &ScenarioResult) -> f64 {
    let mut worst = 0.0f64;
    for pair in result.trajectory.windows(2) {
        let dt = pair[1].t - pair[0].t;
        if dt > 5e-4 {
            worst = worst.max((pair[1].heading - pair[0].heading).abs() / dt);
        }
    }
    worst
}

#[test]
fn criterion_6_tracking_across_all_path_shapes() {
    let max_rate_deg = 45.0f64.to_radians();
    let mut rates = Vec::new();

    for name in ["circle.json", "cardioid.json"] {
        let cfg = load_config(name);
        let r = run_scenario(&cfg, None).unwrap();
        assert!(!r.summary.fell && r.summary.failure.is_none(), "{name} did not complete");
        assert!(
            r.summary.rms_position_error < 0.15,
            "{name}: rms {:.4} not below 0.15",
            r.summary.rms_position_error
        );
        rates.push((cfg.name.clone(), max_heading_rate(&r)));
    }

    for name in ["sinusoid.json", "square.json"] {
        let cfg = load_config(name);
        let r = run_scenario(&cfg, None).unwrap();
        assert!(!r.summary.fell && r.summary.failure.is_none(), "{name} did not complete");
        rates.push((cfg.name.clone(), max_heading_rate(&r)));
    }

    let square = load_config("square.json");
    let path = make_path(&square.path, square.speed.v_max, square.speed.accel).unwrap();
    let corners = path.corner_events();
    assert!(!corners.is_empty(), "square path has no corner events");
    let mut worst_corner_speed = 0.0f64;
    for ev in corners {
        for t in [ev.t_start, 0.5 * (ev.t_start + ev.t_end), ev.t_end] {
            let r = sample_reference(&path, t);
            worst_corner_speed = worst_corner_speed.max(f64::hypot(r.rdot[0], r.rdot[1]));
        }
    }
    assert!(
        worst_corner_speed < 1e-6,
        "corner speed {worst_corner_speed:.3e} not below 1e-6"
    );

    let worst_rate = rates
        .iter()
        .map(|(_, r)| *r)
        .fold(0.0f64, f64::max);
    assert!(
        worst_rate <= max_rate_deg + 1e-9,
        "heading rate {:.3} deg/s exceeds 45 deg/s",
        worst_rate.to_degrees()
    );
    println!(
        "criterion 6: PASS — all four shapes complete; worst corner speed {worst_corner_speed:.2e} m/s, max heading rate {:.1} deg/s",
        worst_rate.to_degrees()
    );
}

#[test]
fn criterion_7_obstacle_clearance_and_rejoin() {
    let cfg = load_config("sinusoid_obstacle.json");
    let r = run_scenario(&cfg, None).unwrap();
    assert!(!r.summary.fell && r.summary.failure.is_none());
    let obs = &cfg.obstacles[0];
    let min_clearance = r
        .trajectory
        .iter()
        .map(|s| f64::hypot(s.com[0] - obs.x, s.com[1] - obs.y))
        .fold(f64::INFINITY, f64::min);
    assert!(
        min_clearance >= obs.clearance - 0.02,
        "clearance {min_clearance:.4} dips below {} - 0.02",
        obs.clearance
    );

    let errors = tracking_errors(&cfg, &r);
    let t_last = errors.last().unwrap().0;
    let tail: Vec<f64> = errors
        .iter()
        .filter(|(t, _)| *t >= 0.75 * t_last)
        .map(|(_, e)| *e)
        .collect();
    let rms = (tail.iter().map(|e| e * e).sum::<f64>() / tail.len() as f64).sqrt();
    assert!(rms < 0.15, "final-quarter rms {rms:.4} not below 0.15");
    println!(
        "criterion 7: PASS — min clearance {min_clearance:.4} m (required {:.2}), rejoin rms {rms:.4} m",
        obs.clearance - 0.02
    );
}

#[test]
fn criterion_8_push_recovery() {
    let cfg = load_config("push.json");
    let r = run_scenario(&cfg, None).unwrap();
    assert!(!r.summary.fell && r.summary.failure.is_none(), "walker fell under the push");
    let push = &cfg.pushes[0];
    let push_end = push.t_start + push.duration;
    let t_sum = cfg.hlip.t_ssp + cfg.hlip.t_dsp;

    let errors = tracking_errors(&cfg, &r);
    let last_bad = errors
        .iter()
        .filter(|(_, e)| *e > 0.1)
        .map(|(t, _)| *t)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        last_bad > push.t_start,
        "push too weak to perturb tracking beyond 0.1 m"
    );
    let steps_to_recover = (last_bad - push_end) / t_sum;
    assert!(
        steps_to_recover <= 12.0,
        "recovered only after {steps_to_recover:.1} steps"
    );
    println!(
        "criterion 8: PASS — 200 N x 0.1 s push rejected; back within 0.1 m after {steps_to_recover:.1} steps, no fall"
    );
}

#[test]
fn criterion_9_exact_surrogate_reproduces_the_plan() {
    let mut cfg = load_config("circle.json");
    cfg.model = SurrogateModelConfig::exact();
    let r = run_scenario(&cfg, None).unwrap();
    assert!(!r.summary.fell && r.summary.failure.is_none());

    let mut max_w = 0.0f64;
    let mut max_state_gap = 0.0f64;
    let mut tested = 0;
    for s in &r.steps {
        if let Some(w) = s.w {
            max_w = max_w.max(w.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            tested += 1;
        }
        max_state_gap = max_state_gap
            .max((s.robot.c - s.reference.c).abs())
            .max((s.robot.p - s.reference.p).abs())
            .max((s.robot.v - s.reference.v).abs());
    }
    assert!(tested > 0, "no disturbance samples logged");
    assert!(max_w < 1e-6, "max |w| = {max_w:.3e} not below 1e-6");
    assert!(
        max_state_gap < 1e-5,
        "robot deviates from the plan by {max_state_gap:.3e}"
    );
    println!(
        "criterion 9: PASS — exact surrogate: max |w| = {max_w:.2e}, max plan deviation {max_state_gap:.2e}"
    );
}

#[test]
fn criterion_10_reruns_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_hlipwalk");
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    for out in [&out1, &out2] {
        let status = Command::new(bin)
            .arg("run")
            .arg(config_path("cardioid.json"))
            .arg("--out")
            .arg(out)
            .arg("--seed")
            .arg("7")
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in ["trajectory.csv", "steps.csv"] {
        let a = fs::read(out1.join(file)).unwrap();
        let b = fs::read(out2.join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    println!("criterion 10: PASS — identical config and seed give byte-identical trajectory.csv and steps.csv");
}
