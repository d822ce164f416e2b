//! Scenario files, benchmark campaigns, statistics and SVG output.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, PlanError, ScenarioFileError};
use crate::geometry::{collide_pose, Car, CircleObstacle, Obstacles, Pose, SegmentObstacle};
use crate::nn_index::CostMode;
use crate::optimize::{OptMode, Waypoint};
use crate::planner::{plan, PlannerConfig, Scenario, Tree};
use crate::reeds_shepp::steer;

/// Rejection-sampling attempts before an obstacle placement gives up.
const PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseFile {
    x: f64,
    y: f64,
    theta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarFile {
    length: f64,
    width: f64,
    turning_radius: f64,
    wheelbase: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleFile {
    x: f64,
    y: f64,
    r: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentFile {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    bounds: BoundsFile,
    init: PoseFile,
    goal: PoseFile,
    car: CarFile,
    #[serde(default)]
    circles: Vec<CircleFile>,
    #[serde(default)]
    segments: Vec<SegmentFile>,
    random_obstacle: Option<ObstacleStrip>,
}

/// Region where a random circle obstacle is dropped for each trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleStrip {
    pub diameter: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// A loaded scenario file: fixed geometry plus an optional random obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub car: Car,
    pub random_obstacle: Option<ObstacleStrip>,
}

impl ScenarioSpec {
    /// Scenario used by the trial with `seed`.
    pub fn instantiate(&self, seed: u64) -> Result<Scenario, PlanError> {
        match &self.random_obstacle {
            None => Ok(self.scenario.clone()),
            Some(strip) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                // keep obstacle draws apart from the planner's stream
                rng.set_stream(1);
                make_obstacle_scenario(&self.scenario, &self.car, strip, &mut rng)
            }
        }
    }
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioSpec, ScenarioFileError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioFileError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    let invalid = |source: PlanError| ScenarioFileError::Invalid {
        path: origin.to_string(),
        source,
    };
    let car = Car {
        length: file.car.length,
        width: file.car.width,
        turning_radius: file.car.turning_radius,
        wheelbase: file.car.wheelbase,
    };
    let mut obstacles = Obstacles::default();
    for c in &file.circles {
        obstacles
            .circles
            .push(CircleObstacle::new(c.x, c.y, c.r).map_err(|e| invalid(e.into()))?);
    }
    for s in &file.segments {
        obstacles
            .segments
            .push(SegmentObstacle::new(s.x1, s.y1, s.x2, s.y2).map_err(|e| invalid(e.into()))?);
    }
    let scenario = Scenario {
        x_min: file.bounds.x_min,
        x_max: file.bounds.x_max,
        y_min: file.bounds.y_min,
        y_max: file.bounds.y_max,
        init: Pose::new(file.init.x, file.init.y, file.init.theta),
        goal: Pose::new(file.goal.x, file.goal.y, file.goal.theta),
        obstacles,
    };
    scenario.validate(&car).map_err(invalid)?;
    if let Some(strip) = &file.random_obstacle {
        let ok = strip.diameter > 0.0 && strip.x_min < strip.x_max && strip.y_min < strip.y_max;
        if !ok {
            return Err(invalid(PlanError::InvalidScenario(
                "random_obstacle needs diameter > 0 and a non-empty strip".into(),
            )));
        }
    }
    Ok(ScenarioSpec {
        scenario,
        car,
        random_obstacle: file.random_obstacle,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec, ScenarioFileError> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: origin.clone(),
        source,
    })?;
    parse_scenario(&text, &origin)
}

/// Adds one circle, uniform over `strip`, placed so that init and goal stay
/// collision-free.
pub fn make_obstacle_scenario<R: Rng + ?Sized>(
    base: &Scenario,
    car: &Car,
    strip: &ObstacleStrip,
    rng: &mut R,
) -> Result<Scenario, PlanError> {
    let r = strip.diameter / 2.0;
    for _ in 0..PLACEMENT_ATTEMPTS {
        let x = rng.gen_range(strip.x_min..=strip.x_max);
        let y = rng.gen_range(strip.y_min..=strip.y_max);
        let circle = CircleObstacle::new(x, y, r)?;
        let probe = Obstacles {
            circles: vec![circle],
            segments: Vec::new(),
        };
        if collide_pose(&base.init, car, &probe) || collide_pose(&base.goal, car, &probe) {
            continue;
        }
        let mut out = base.clone();
        out.obstacles.circles.push(circle);
        return Ok(out);
    }
    Err(PlanError::InvalidScenario(
        "no obstacle placement keeps init and goal free".into(),
    ))
}

/// One benchmark repetition; serialized as one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub goal_found: bool,
    pub time_s: f64,
    pub pre_cost: Option<f64>,
    pub post_cost: Option<f64>,
    pub iterations: u64,
    pub nn_mode: CostMode,
    pub opt_mode: OptMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    /// Percentiles over successful trials; `None` when there are none.
    pub time_p50: Option<f64>,
    pub time_p95: Option<f64>,
    pub pre_cost_p95: Option<f64>,
    pub cost_p50: Option<f64>,
    pub cost_p95: Option<f64>,
}

impl Summary {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        writeln!(
            f,
            "trials {}  success {} ({:.1}%)",
            self.trials,
            self.successes,
            100.0 * self.success_rate()
        )?;
        writeln!(f, "time_s     p50 {}  p95 {}", show(self.time_p50), show(self.time_p95))?;
        write!(
            f,
            "post_cost  p50 {}  p95 {}  (pre_cost p95 {})",
            show(self.cost_p50),
            show(self.cost_p95),
            show(self.pre_cost_p95)
        )
    }
}

/// Nearest-rank percentile: the `ceil(p/100 * n)`-th smallest value.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, BenchError> {
    if values.is_empty() {
        return Err(BenchError::EmptySample);
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(BenchError::BadPercentile(p));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

pub fn summarize(records: &[TrialRecord]) -> Summary {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.goal_found).collect();
    let times: Vec<f64> = ok.iter().map(|r| r.time_s).collect();
    let pre: Vec<f64> = ok.iter().filter_map(|r| r.pre_cost).collect();
    let post: Vec<f64> = ok.iter().filter_map(|r| r.post_cost).collect();
    let pct = |v: &[f64], p| percentile(v, p).ok();
    Summary {
        trials: records.len(),
        successes: ok.len(),
        time_p50: pct(&times, 50.0),
        time_p95: pct(&times, 95.0),
        pre_cost_p95: pct(&pre, 95.0),
        cost_p50: pct(&post, 50.0),
        cost_p95: pct(&post, 95.0),
    }
}

pub fn run_trial(spec: &ScenarioSpec, config: &PlannerConfig, seed: u64) -> Result<TrialRecord, PlanError> {
    let scenario = spec.instantiate(seed)?;
    let config = PlannerConfig {
        rng_seed: seed,
        ..config.clone()
    };
    let started = Instant::now();
    let res = plan(&scenario, &spec.car, &config)?;
    let time_s = if res.goal_found {
        res.elapsed_to_first_path
    } else {
        started.elapsed().as_secs_f64()
    };
    Ok(TrialRecord {
        seed,
        goal_found: res.goal_found,
        time_s,
        pre_cost: res.pre_opt_cost,
        post_cost: res.post_opt_cost,
        iterations: res.iterations,
        nn_mode: config.cost_mode,
        opt_mode: config.opt_mode,
    })
}

/// Runs seeds `seed0 .. seed0 + n_trials` on `parallelism` workers; records
/// come back in seed order.
pub fn run_trials(
    spec: &ScenarioSpec,
    config: &PlannerConfig,
    n_trials: usize,
    seed0: u64,
    parallelism: usize,
) -> Result<(Vec<TrialRecord>, Summary), BenchError> {
    if n_trials == 0 {
        return Err(BenchError::NoTrials);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let records = pool.install(|| {
        (0..n_trials as u64)
            .into_par_iter()
            .map(|k| run_trial(spec, config, seed0 + k))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let summary = summarize(&records);
    Ok((records, summary))
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record([
            "seed",
            "goal_found",
            "time_s",
            "pre_cost",
            "post_cost",
            "iterations",
            "nn_mode",
            "opt_mode",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<TrialRecord>, _>>()?;
    Ok(rows)
}

/// Pixels per meter in rendered figures.
pub const SVG_SCALE: f64 = 50.0;
const SVG_MARGIN: f64 = 1.0;

/// Options for [`render_svg`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SvgLayers<'a> {
    pub tree: Option<&'a Tree>,
    pub path: Option<&'a [Waypoint]>,
    pub opath: Option<&'a [Waypoint]>,
    /// Sampling step for tree edges; defaults to 0.2 m when zero.
    pub steer_step: f64,
}

struct Canvas {
    x0: f64,
    y1: f64,
}

impl Canvas {
    fn x(&self, x: f64) -> f64 {
        (x - self.x0) * SVG_SCALE
    }

    fn y(&self, y: f64) -> f64 {
        (self.y1 - y) * SVG_SCALE
    }

    fn points<'p>(&self, poses: impl IntoIterator<Item = &'p Pose>) -> String {
        let mut s = String::new();
        for p in poses {
            if !s.is_empty() {
                s.push(' ');
            }
            let _ = write!(s, "{:.3},{:.3}", self.x(p.x), self.y(p.y));
        }
        s
    }
}

/// Draws the scenario with hatched obstacles, U-shaped car frames with a
/// cross at init and goal, gray tree edges, the raw path in orange and the
/// optimized path in blue.
pub fn render_svg(scenario: &Scenario, car: &Car, layers: SvgLayers<'_>) -> String {
    let cv = Canvas {
        x0: scenario.x_min - SVG_MARGIN,
        y1: scenario.y_max + SVG_MARGIN,
    };
    let width = (scenario.x_max - scenario.x_min + 2.0 * SVG_MARGIN) * SVG_SCALE;
    let height = (scenario.y_max - scenario.y_min + 2.0 * SVG_MARGIN) * SVG_SCALE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    s.push_str(concat!(
        r#"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
        r#"<line x1="0" y1="0" x2="0" y2="6" stroke="black" stroke-width="1"/></pattern></defs>"#,
        "\n"
    ));
    s.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    s.push('\n');
    let _ = writeln!(
        s,
        r##"<rect class="bounds" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#ddd" stroke-dasharray="4 4"/>"##,
        cv.x(scenario.x_min),
        cv.y(scenario.y_max),
        (scenario.x_max - scenario.x_min) * SVG_SCALE,
        (scenario.y_max - scenario.y_min) * SVG_SCALE
    );
    if let Some(tree) = layers.tree {
        let step = if layers.steer_step > 0.0 {
            layers.steer_step
        } else {
            0.2
        };
        for node in tree.nodes() {
            let Some(parent) = node.parent else { continue };
            let samples = steer(&tree.node(parent).pose, &node.pose, car.turning_radius, step);
            let _ = writeln!(
                s,
                r##"<polyline class="tree" points="{}" fill="none" stroke="#aaa" stroke-width="0.5"/>"##,
                cv.points(samples.iter().map(|p| &p.0))
            );
        }
    }
    for c in &scenario.obstacles.circles {
        let _ = writeln!(
            s,
            r#"<circle class="obstacle" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="url(#hatch)" stroke="black"/>"#,
            cv.x(c.x),
            cv.y(c.y),
            c.r * SVG_SCALE
        );
    }
    for g in &scenario.obstacles.segments {
        let _ = writeln!(
            s,
            r#"<line class="obstacle" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="2"/>"#,
            cv.x(g.x1),
            cv.y(g.y1),
            cv.x(g.x2),
            cv.y(g.y2)
        );
    }
    for (class, path, color) in [("path", layers.path, "orange"), ("opath", layers.opath, "blue")] {
        if let Some(path) = path {
            let _ = writeln!(
                s,
                r#"<polyline class="{class}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                cv.points(path.iter().map(|w| &w.pose))
            );
        }
    }
    for pose in [&scenario.init, &scenario.goal] {
        draw_frame(&mut s, &cv, pose, car);
    }
    s.push_str("</svg>\n");
    s
}

/// U-shaped outline open at the rear, plus a cross at the reference point.
fn draw_frame(s: &mut String, cv: &Canvas, pose: &Pose, car: &Car) {
    let (sin, cos) = pose.theta.sin_cos();
    let at = |lx: f64, ly: f64| Pose::new(pose.x + cos * lx - sin * ly, pose.y + sin * lx + cos * ly, 0.0);
    let rear = -car.rear_overhang();
    let front = car.front_reach();
    let half = car.width / 2.0;
    let outline = [at(rear, half), at(front, half), at(front, -half), at(rear, -half)];
    let _ = writeln!(
        s,
        r#"<polyline class="frame" points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        cv.points(outline.iter())
    );
    let (x, y, d) = (cv.x(pose.x), cv.y(pose.y), 4.0);
    let _ = writeln!(
        s,
        r#"<path class="cross" d="M{:.3},{:.3}L{:.3},{:.3}M{:.3},{:.3}L{:.3},{:.3}" stroke="red" stroke-width="1.5"/>"#,
        x - d,
        y - d,
        x + d,
        y + d,
        x - d,
        y + d,
        x + d,
        y - d
    );
}
