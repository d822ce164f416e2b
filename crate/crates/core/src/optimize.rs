//! Post-optimization of a found path over its tip nodes.
//!
//! Tips are the initial pose, every cusp (a pose where the drive direction
//! reverses) and the final pose. Any two tips `i < j` may be joined directly
//! by the shortest Reeds-Shepp curve when that curve is collision-free; two
//! consecutive tips can always fall back to the original stretch of path
//! between them. [`opt_path_dijkstra`] finds the cheapest chain of such
//! connections, [`opt_path_smart`] is the greedy goal-to-init pruning pass
//! used as a baseline.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::geometry::{collide_path, Car, Obstacles, Pose};
use crate::reeds_shepp::{rs_distance, rs_path, rs_sample, Direction};

/// Costs below the input cost by less than this do not count as improvement.
pub const IMPROVEMENT_SLACK: f64 = 1e-9;

/// A pose on a path with the drive direction used to reach it (`None` for
/// the initial pose).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub pose: Pose,
    pub direction: Option<Direction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptMode {
    None,
    Smart,
    Dijkstra,
}

impl OptMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OptMode::None => "none",
            OptMode::Smart => "smart",
            OptMode::Dijkstra => "dijkstra",
        }
    }
}

impl std::fmt::Display for OptMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(OptMode::None),
            "smart" => Ok(OptMode::Smart),
            "dijkstra" => Ok(OptMode::Dijkstra),
            other => Err(format!("unknown optimizer `{other}` (none|smart|dijkstra)")),
        }
    }
}

/// Everything the optimizers need to steer and collision-check.
#[derive(Debug, Clone, Copy)]
pub struct OptContext<'a> {
    pub car: &'a Car,
    pub obstacles: &'a Obstacles,
    pub radius: f64,
    /// Sampling step used to sweep steered connections.
    pub step: f64,
}

/// Outcome of an optimization pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub improved: bool,
    pub path: Vec<Waypoint>,
    pub cost: f64,
}

/// Path cost: sum of Reeds-Shepp distances between consecutive poses.
pub fn path_cost(path: &[Waypoint], radius: f64) -> f64 {
    path.windows(2)
        .map(|w| rs_distance(&w[0].pose, &w[1].pose, radius))
        .sum()
}

/// Indices of the tips: first pose, cusps, last pose.
pub fn find_tips(path: &[Waypoint]) -> Vec<usize> {
    if path.is_empty() {
        return Vec::new();
    }
    let last = path.len() - 1;
    let mut tips = vec![0];
    for i in 1..last {
        if let (Some(a), Some(b)) = (path[i].direction, path[i + 1].direction) {
            if a != b {
                tips.push(i);
            }
        }
    }
    if last > 0 {
        tips.push(last);
    }
    tips
}

/// One usable connection between two tips.
#[derive(Debug, Clone)]
enum Link {
    /// Direct shortest curve.
    Direct(Vec<(Pose, Direction)>),
    /// The original stretch of the input path.
    Original,
}

struct TipGraph<'p, 'c> {
    path: &'p [Waypoint],
    tips: Vec<usize>,
    ctx: OptContext<'c>,
}

impl<'p, 'c> TipGraph<'p, 'c> {
    fn new(path: &'p [Waypoint], ctx: OptContext<'c>) -> Self {
        Self {
            tips: find_tips(path),
            path,
            ctx,
        }
    }

    fn pose(&self, tip: usize) -> &Pose {
        &self.path[self.tips[tip]].pose
    }

    fn direct_cost(&self, i: usize, j: usize) -> f64 {
        rs_distance(self.pose(i), self.pose(j), self.ctx.radius)
    }

    /// Samples of the direct curve when it is collision-free.
    fn direct_samples(&self, i: usize, j: usize) -> Option<Vec<(Pose, Direction)>> {
        let samples = rs_sample(&rs_path(self.pose(i), self.pose(j), self.ctx.radius), self.ctx.step);
        let hit = collide_path(samples[1..].iter().map(|s| &s.0), self.ctx.car, self.ctx.obstacles);
        (!hit).then_some(samples)
    }

    fn original_cost(&self, i: usize) -> f64 {
        path_cost(&self.path[self.tips[i]..=self.tips[i + 1]], self.ctx.radius)
    }

    /// Cheapest usable link `i -> j`, if any; `cost_cap` lets callers skip
    /// the collision sweep when the link could not improve anything.
    fn link(&self, i: usize, j: usize, cost_cap: f64) -> Option<(f64, Link)> {
        let direct = self.direct_cost(i, j);
        let fallback = (j == i + 1).then(|| self.original_cost(i));
        if direct < cost_cap && fallback.is_none_or(|f| direct <= f) {
            if let Some(samples) = self.direct_samples(i, j) {
                return Some((direct, Link::Direct(samples)));
            }
        }
        match fallback {
            Some(f) if f < cost_cap => Some((f, Link::Original)),
            _ => None,
        }
    }

    fn assemble(&self, chain: &[(usize, Link)]) -> Vec<Waypoint> {
        let mut out = vec![self.path[0]];
        let mut from = 0;
        for (to, link) in chain {
            match link {
                Link::Direct(samples) => out.extend(samples[1..].iter().map(|&(pose, d)| Waypoint {
                    pose,
                    direction: Some(d),
                })),
                Link::Original => out.extend_from_slice(&self.path[self.tips[from] + 1..=self.tips[*to]]),
            }
            from = *to;
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Queued {
    cost: f64,
    tip: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    // min-heap on cost, then on tip index
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.tip.cmp(&self.tip))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn finish(path: &[Waypoint], original: f64, candidate: Option<(f64, Vec<Waypoint>)>) -> Optimized {
    match candidate {
        Some((cost, opath)) if cost < original - IMPROVEMENT_SLACK => Optimized {
            improved: true,
            path: opath,
            cost,
        },
        _ => Optimized {
            improved: false,
            path: path.to_vec(),
            cost: original,
        },
    }
}

/// Shortest chain of tip connections by Dijkstra's algorithm.
pub fn opt_path_dijkstra(path: &[Waypoint], ctx: OptContext<'_>) -> Optimized {
    let original = path_cost(path, ctx.radius);
    let graph = TipGraph::new(path, ctx);
    let m = graph.tips.len();
    if m < 2 {
        return finish(path, original, None);
    }
    let goal = m - 1;
    let mut ccost = vec![f64::INFINITY; m];
    let mut parent: Vec<Option<(usize, Link)>> = vec![None; m];
    let mut done = vec![false; m];
    let mut queue = BinaryHeap::new();
    ccost[0] = 0.0;
    queue.push(Queued { cost: 0.0, tip: 0 });
    while let Some(Queued { cost, tip: i }) = queue.pop() {
        if done[i] || cost > ccost[i] {
            continue;
        }
        done[i] = true;
        if i == goal {
            break;
        }
        for j in i + 1..m {
            if done[j] {
                continue;
            }
            let cap = ccost[j] - cost;
            if let Some((w, link)) = graph.link(i, j, cap) {
                let c = cost + w;
                if c < ccost[j] {
                    ccost[j] = c;
                    parent[j] = Some((i, link));
                    queue.push(Queued { cost: c, tip: j });
                }
            }
        }
    }
    if !ccost[goal].is_finite() {
        // unreachable with a valid input, whose consecutive links always exist
        return finish(path, original, None);
    }
    let mut chain = Vec::new();
    let mut at = goal;
    while at != 0 {
        let (from, link) = parent[at].take().expect("settled tip has a parent");
        chain.push((at, link));
        at = from;
    }
    chain.reverse();
    finish(path, original, Some((ccost[goal], graph.assemble(&chain))))
}

/// Greedy pruning: from the goal tip backwards, jump to the earliest tip
/// that connects directly.
pub fn opt_path_smart(path: &[Waypoint], ctx: OptContext<'_>) -> Optimized {
    let original = path_cost(path, ctx.radius);
    let graph = TipGraph::new(path, ctx);
    let m = graph.tips.len();
    if m < 2 {
        return finish(path, original, None);
    }
    let mut chain = Vec::new();
    let mut total = 0.0;
    let mut j = m - 1;
    while j > 0 {
        let (i, (w, link)) = (0..j)
            .find_map(|i| graph.link(i, j, f64::INFINITY).map(|l| (i, l)))
            .expect("consecutive tips always link");
        total += w;
        chain.push((j, link));
        j = i;
    }
    chain.reverse();
    finish(path, original, Some((total, graph.assemble(&chain))))
}

/// Runs the selected optimizer; [`OptMode::None`] returns the input.
pub fn optimize(mode: OptMode, path: &[Waypoint], ctx: OptContext<'_>) -> Optimized {
    match mode {
        OptMode::None => Optimized {
            improved: false,
            path: path.to_vec(),
            cost: path_cost(path, ctx.radius),
        },
        OptMode::Smart => opt_path_smart(path, ctx),
        OptMode::Dijkstra => opt_path_dijkstra(path, ctx),
    }
}
