//! Acceptance campaign. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

#[allow(dead_code)]
#[path = "../../core/tests/common/rs_oracle.rs"]
mod rs_oracle;
#[allow(dead_code)]
#[path = "../../core/tests/common/tip_oracle.rs"]
mod tip_oracle;

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use parkrrt::{
    euclidean_dist, load_scenario, opt_path_dijkstra, opt_path_smart, path_cost, percentile, plan, rs_distance,
    rs_path, rs_sample, run_trials, write_csv, CostMode, Direction, NNConfig, NNIndex, OptContext, Planner,
    PlannerConfig, Pose, ScenarioSpec, SegmentKind, TrialRecord,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TMAX: f64 = 10.0;

thread_local! {
    static START: Instant = Instant::now();
}

fn scenario(name: &str) -> ScenarioSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn config(cost_mode: CostMode) -> PlannerConfig {
    PlannerConfig {
        tmax: TMAX,
        cost_mode,
        ..PlannerConfig::default()
    }
}

/// 95th percentile of time-to-first-path over the trials that found one;
/// infinite when none did.
fn time_p95(records: &[TrialRecord]) -> f64 {
    let times: Vec<f64> = records.iter().filter(|r| r.goal_found).map(|r| r.time_s).collect();
    percentile(&times, 95.0).unwrap_or(f64::INFINITY)
}

fn success_rate(records: &[TrialRecord]) -> f64 {
    records.iter().filter(|r| r.goal_found).count() as f64 / records.len() as f64
}

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    eprintln!(
        "[{:>6.1} s] criterion {name} done",
        START.with(|t| t.elapsed().as_secs_f64())
    );
    Outcome { name, pass, detail }
}

/// One no-obstacle trial with Euclidean NN and Dijkstra, plus the costs the
/// other two optimizer settings reach on the same raw path.
struct NoObstacleTrial {
    record: TrialRecord,
    smart_cost: Option<f64>,
}

fn no_obstacle_campaign(spec: &ScenarioSpec, n: u64) -> Vec<NoObstacleTrial> {
    let base = config(CostMode::Euclidean);
    (0..n)
        .map(|seed| {
            let scenario = spec.instantiate(seed).unwrap();
            let cfg = PlannerConfig {
                rng_seed: seed,
                ..base.clone()
            };
            let started = Instant::now();
            let res = plan(&scenario, &spec.car, &cfg).unwrap();
            let time_s = if res.goal_found {
                res.elapsed_to_first_path
            } else {
                started.elapsed().as_secs_f64()
            };
            let smart_cost = res.goal_found.then(|| {
                let ctx = OptContext {
                    car: &spec.car,
                    obstacles: &scenario.obstacles,
                    radius: spec.car.turning_radius,
                    step: cfg.steer_step,
                };
                opt_path_smart(&res.raw_path, ctx).cost
            });
            NoObstacleTrial {
                record: TrialRecord {
                    seed,
                    goal_found: res.goal_found,
                    time_s,
                    pre_cost: res.pre_opt_cost,
                    post_cost: res.post_opt_cost,
                    iterations: res.iterations,
                    nn_mode: cfg.cost_mode,
                    opt_mode: cfg.opt_mode,
                },
                smart_cost,
            }
        })
        .collect()
}

fn criterion_1(trials: &[NoObstacleTrial]) -> Outcome {
    let records: Vec<TrialRecord> = trials.iter().map(|t| t.record.clone()).collect();
    let rate = success_rate(&records);
    let p95 = time_p95(&records);
    outcome(
        "1 success and speed (no obstacle)",
        rate >= 0.95 && p95 < 1.0,
        format!(
            "{} trials, success {:.1}% (need >= 95%), time p95 {p95:.3} s (need < 1.0 s)",
            records.len(),
            100.0 * rate
        ),
    )
}

fn criterion_2(spec: &ScenarioSpec, euclid: &[TrialRecord]) -> Outcome {
    let n = euclid.len();
    let run = |mode| run_trials(spec, &config(mode), n, 0, workers()).unwrap().0;
    let flat = run(CostMode::ReedsSheppFlatHeading);
    let rs = run(CostMode::ReedsShepp);
    let (pe, pf, pr) = (time_p95(euclid), time_p95(&flat), time_p95(&rs));
    let timeouts = rs.iter().filter(|r| !r.goal_found).count();
    let pass = pe < pf && pf < pr && (timeouts > 0 || pr >= 10.0 * pe);
    outcome(
        "2 nn-cost ordering",
        pass,
        format!(
            "{n} trials each, time p95 euclidean {pe:.3} s < rs-flat {pf:.3} s < rs {pr:.3} s; \
             rs timeouts {timeouts}, rs/euclidean {:.1}x (need a timeout or >= 10x); success {:.0}% / {:.0}% / {:.0}%",
            pr / pe,
            100.0 * success_rate(euclid),
            100.0 * success_rate(&flat),
            100.0 * success_rate(&rs)
        ),
    )
}

fn criterion_3(trials: &[NoObstacleTrial]) -> Outcome {
    let ok: Vec<&NoObstacleTrial> = trials.iter().filter(|t| t.record.goal_found).collect();
    let none: Vec<f64> = ok.iter().map(|t| t.record.pre_cost.unwrap()).collect();
    let smart: Vec<f64> = ok.iter().map(|t| t.smart_cost.unwrap()).collect();
    let dij: Vec<f64> = ok.iter().map(|t| t.record.post_cost.unwrap()).collect();
    let (pn, ps, pd) = (
        percentile(&none, 95.0).unwrap(),
        percentile(&smart, 95.0).unwrap(),
        percentile(&dij, 95.0).unwrap(),
    );
    let ratio = pd / pn;
    outcome(
        "3 optimizer ordering",
        pd < ps && ps < pn && ratio <= 0.90,
        format!(
            "{} successful trials, cost p95 dijkstra {pd:.3} m < smart {ps:.3} m < none {pn:.3} m; \
             dijkstra/none {ratio:.3} (need <= 0.90)",
            ok.len()
        ),
    )
}

fn criterion_4(trials: &[NoObstacleTrial]) -> Outcome {
    let ratios: Vec<f64> = trials
        .iter()
        .filter(|t| t.record.goal_found)
        .map(|t| t.record.post_cost.unwrap() / t.record.pre_cost.unwrap())
        .collect();
    let strong = ratios.iter().filter(|&&r| r <= 0.85).count() as f64 / ratios.len() as f64;
    outcome(
        "4 per-trial optimization strength",
        strong >= 0.95,
        format!(
            "post <= 0.85 pre in {:.1}% of {} successes (need >= 95%); post/pre median {:.3}, p5 {:.3}, min {:.3}",
            100.0 * strong,
            ratios.len(),
            percentile(&ratios, 50.0).unwrap(),
            percentile(&ratios, 5.0).unwrap(),
            ratios.iter().cloned().fold(f64::INFINITY, f64::min)
        ),
    )
}

fn criterion_5() -> Outcome {
    let run = |name| {
        let spec = scenario(name);
        run_trials(&spec, &config(CostMode::Euclidean), 100, 0, workers())
            .unwrap()
            .0
    };
    let one = run("parallel-obstacle-1");
    let two = run("parallel-obstacle-2");
    let (r1, r2) = (success_rate(&one), success_rate(&two));
    let (p1, p2) = (time_p95(&one), time_p95(&two));
    let never_worse = one
        .iter()
        .chain(&two)
        .filter(|r| r.goal_found)
        .all(|r| r.post_cost.unwrap() <= r.pre_cost.unwrap());
    outcome(
        "5 obstacle presets",
        r1 >= 0.90 && r2 >= 0.90 && p2 >= p1 && never_worse,
        format!(
            "success {:.0}% / {:.0}% (need >= 90%), time p95 preset 2 {p2:.3} s >= preset 1 {p1:.3} s, \
             post <= pre in every success: {never_worse}",
            100.0 * r1,
            100.0 * r2
        ),
    )
}

fn scan_nearest(poses: &[Pose], q: &Pose, mode: CostMode, radius: f64) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, p) in poses.iter().enumerate() {
        let c = mode.cost(p, q, radius);
        if c < best.0 {
            best = (c, i);
        }
    }
    best.1
}

fn criterion_6() -> Outcome {
    const RADIUS: f64 = 10.82;
    let modes = [
        CostMode::Euclidean,
        CostMode::ReedsShepp,
        CostMode::ReedsSheppFlatHeading,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    let instances = 10_000;
    for k in 0..instances {
        let lattice = k % 2 == 0;
        let y_min = rng.gen_range(-2.0..1.0);
        let y_max = y_min + rng.gen_range(0.5..8.0);
        let iystep = [0.25, 0.7, 1.0, 2.5][k % 4];
        let mode = modes[k % 3];
        let pose = |rng: &mut ChaCha8Rng| {
            if lattice {
                let y = (rng.gen_range(y_min - 1.0..y_max + 1.0_f64) * 2.0).round() / 2.0;
                Pose::new(
                    rng.gen_range(-4..=4) as f64 * 0.5,
                    y,
                    rng.gen_range(0..4) as f64 * TAU / 4.0,
                )
            } else {
                Pose::new(
                    rng.gen_range(-8.0..8.0),
                    rng.gen_range(y_min - 1.0..y_max + 1.0),
                    rng.gen_range(0.0..TAU),
                )
            }
        };
        let mut index = NNIndex::new(NNConfig::new(iystep, y_min, y_max, mode).unwrap(), RADIUS);
        let poses: Vec<Pose> = (0..rng.gen_range(1..40)).map(|_| pose(&mut rng)).collect();
        for (i, p) in poses.iter().enumerate() {
            index.add(i, *p);
        }
        let q = pose(&mut rng);
        let dist = if lattice {
            [0.5, 1.0, 2.0, 3.0][k % 4]
        } else {
            rng.gen_range(0.1..6.0)
        };
        let near: Vec<usize> = (0..poses.len())
            .filter(|&i| mode.cost(&poses[i], &q, RADIUS) < dist)
            .collect();
        let ok = index.nearest(&q).ok() == Some(scan_nearest(&poses, &q, CostMode::Euclidean, RADIUS))
            && modes
                .iter()
                .all(|&m| index.nearest_with_cost(&q, m, RADIUS).ok() == Some(scan_nearest(&poses, &q, m, RADIUS)))
            && index.near_nodes(&q, dist) == near;
        failures += !ok as usize;
    }
    outcome(
        "6 nn-index exactness",
        failures == 0,
        format!("{instances} instances against a linear scan, {failures} failures"),
    )
}

/// End pose of a path integrated segment by segment in closed form.
fn integrate(path: &parkrrt::RSPath) -> Pose {
    let r = path.turning_radius;
    let (mut x, mut y, mut th) = (path.start.x, path.start.y, path.start.theta);
    for s in &path.segments {
        let d = if s.direction == Direction::Forward {
            s.length
        } else {
            -s.length
        };
        match s.kind {
            SegmentKind::Straight => {
                x += d * th.cos();
                y += d * th.sin();
            }
            SegmentKind::Left => {
                let phi = d / r;
                x += r * ((th + phi).sin() - th.sin());
                y += r * (th.cos() - (th + phi).cos());
                th += phi;
            }
            SegmentKind::Right => {
                let phi = d / r;
                x += r * (th.sin() - (th - phi).sin());
                y += r * ((th - phi).cos() - th.cos());
                th -= phi;
            }
        }
    }
    Pose::new(x, y, th)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pose = |rng: &mut ChaCha8Rng| {
        Pose::new(
            rng.gen_range(-15.0..15.0),
            rng.gen_range(-15.0..15.0),
            rng.gen_range(0.0..TAU),
        )
    };
    let radius = 10.82;
    let mut problems = Vec::new();
    let (mut worst_oracle, mut worst_swap, mut worst_end) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..1000 {
        let (a, b) = (pose(&mut rng), pose(&mut rng));
        if rs_distance(&a, &a, radius) != 0.0 {
            problems.push(format!("pair {k}: d(a, a) != 0"));
        }
        let d = rs_distance(&a, &b, radius);
        if d < euclidean_dist(&a, &b) - 1e-9 {
            problems.push(format!("pair {k}: below euclidean"));
        }
        worst_swap = worst_swap.max((d - rs_distance(&b, &a, radius)).abs());
        if k < 200 {
            let o = rs_oracle::oracle_distance((a.x, a.y, a.theta), (b.x, b.y, b.theta), radius);
            worst_oracle = worst_oracle.max((d - o).abs());
        }
        let path = rs_path(&a, &b, radius);
        let end = integrate(&path);
        let last = rs_sample(&path, 0.2).last().unwrap().0;
        worst_end = worst_end.max(euclidean_dist(&end, &b)).max(euclidean_dist(&last, &b));
    }
    let pass = problems.is_empty() && worst_swap <= 1e-9 && worst_oracle <= 1e-6 && worst_end <= 1e-5;
    let mut detail = format!(
        "1000 pairs; swap asymmetry {worst_swap:.1e} (<= 1e-9), oracle deviation on 200 pairs {worst_oracle:.1e} \
         (<= 1e-6), endpoint error {worst_end:.1e} m (<= 1e-5)"
    );
    if !problems.is_empty() {
        detail += &format!("; {}", problems.join(", "));
    }
    outcome("7 reeds-shepp correctness", pass, detail)
}

fn criterion_8() -> Outcome {
    let car = tip_oracle::car();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let inst = tip_oracle::instance(&mut rng, &car, 12);
        let input = path_cost(&inst.path, car.turning_radius);
        let dij = opt_path_dijkstra(&inst.path, tip_oracle::ctx(&car, &inst.obstacles)).cost;
        let smart = opt_path_smart(&inst.path, tip_oracle::ctx(&car, &inst.obstacles)).cost;
        let oracle = tip_oracle::exhaustive_minimum(&inst, &car).min(input);
        worst = worst.max((dij - oracle).abs());
        if (dij - oracle).abs() > 1e-6 || dij > smart || smart > input {
            failures += 1;
        }
    }
    outcome(
        "8 dijkstra optimality on tips",
        failures == 0,
        format!("100 instances, {failures} failures, worst deviation from exhaustive search {worst:.1e} m"),
    )
}

fn criterion_9(spec: &ScenarioSpec) -> Outcome {
    let capped = PlannerConfig {
        rng_seed: 9,
        max_iterations: Some(200),
        ..config(CostMode::Euclidean)
    };
    let tree = || {
        let mut p = Planner::new(&spec.scenario, &spec.car, &capped).unwrap();
        p.run();
        p.tree()
            .nodes()
            .iter()
            .map(|n| {
                (
                    n.pose.x.to_bits(),
                    n.pose.y.to_bits(),
                    n.pose.theta.to_bits(),
                    n.ccost.to_bits(),
                    n.parent,
                )
            })
            .collect::<Vec<_>>()
    };
    let (ta, tb) = (tree(), tree());
    let trees_equal = ta == tb;

    // capped trials so that no row depends on the wall clock
    let bench = PlannerConfig {
        max_iterations: Some(300),
        ..config(CostMode::Euclidean)
    };
    let csv = || {
        let mut buf = Vec::new();
        write_csv(&run_trials(spec, &bench, 8, 0, 1).unwrap().0, &mut buf).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                cols.remove(2);
                cols.join(",")
            })
            .collect::<Vec<_>>()
    };
    let csv_equal = csv() == csv();
    outcome(
        "9 determinism",
        trees_equal && csv_equal,
        format!(
            "capped tree of {} nodes bit-identical: {trees_equal}; CSV identical apart from time_s: {csv_equal}",
            ta.len()
        ),
    )
}

fn main() -> ExitCode {
    START.with(|_| ());
    let spec = scenario("parallel-no-obstacle");

    let mut results = vec![criterion_6(), criterion_7(), criterion_8(), criterion_9(&spec)];
    let trials = no_obstacle_campaign(&spec, 200);
    results.push(criterion_1(&trials));
    results.push(criterion_3(&trials));
    results.push(criterion_4(&trials));
    let euclid: Vec<TrialRecord> = trials.iter().take(100).map(|t| t.record.clone()).collect();
    results.push(criterion_2(&spec, &euclid));
    results.push(criterion_5());

    results.sort_by_key(|o| o.name);
    let failed: Vec<&Outcome> = results.iter().filter(|o| !o.pass).collect();
    for o in &results {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    if failed.is_empty() {
        println!(
            "all {} criteria pass ({:.0} s)",
            results.len(),
            START.with(|t| t.elapsed().as_secs_f64())
        );
        ExitCode::SUCCESS
    } else {
        println!(
            "{} of {} criteria fail ({:.0} s)",
            failed.len(),
            results.len(),
            START.with(|t| t.elapsed().as_secs_f64())
        );
        ExitCode::FAILURE
    }
}
