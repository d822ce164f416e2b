//! RRT* with per-iteration goal expansion.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::PlanError;
use crate::geometry::{angle_diff, collide_pose, euclidean_dist, Car, Obstacles, Pose};
use crate::nn_index::{CostMode, NNConfig, NNIndex};
use crate::optimize::{optimize, OptContext, OptMode, Waypoint};
use crate::reeds_shepp::{rs_distance, rs_lower_bound, rs_path, steer, Direction, RSPath, RSSamples};

/// Search space, terminal poses and obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub init: Pose,
    pub goal: Pose,
    pub obstacles: Obstacles,
}

impl Scenario {
    pub fn contains(&self, p: &Pose) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn validate(&self, car: &Car) -> Result<(), PlanError> {
        car.validate()?;
        let bounds = [self.x_min, self.x_max, self.y_min, self.y_max];
        if bounds.iter().any(|v| !v.is_finite()) {
            return Err(PlanError::InvalidScenario("bounds must be finite".into()));
        }
        if self.x_min >= self.x_max {
            return Err(PlanError::InvalidScenario("x_min must be below x_max".into()));
        }
        if self.y_min >= self.y_max {
            return Err(PlanError::InvalidScenario("y_min must be below y_max".into()));
        }
        if !self.init.is_finite() || !self.contains(&self.init) {
            return Err(PlanError::InvalidScenario("init pose outside bounds".into()));
        }
        if !self.goal.is_finite() || !self.contains(&self.goal) {
            return Err(PlanError::InvalidScenario("goal pose outside bounds".into()));
        }
        if collide_pose(&self.init, car, &self.obstacles) {
            return Err(PlanError::InvalidScenario("init pose collides with an obstacle".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Wall-clock budget in seconds.
    pub tmax: f64,
    pub gfdist: f64,
    pub gfangle: f64,
    /// Neighborhood radius for connect and rewire.
    pub near_dist: f64,
    /// Pose spacing along steered curves.
    pub steer_step: f64,
    pub rng_seed: u64,
    pub cost_mode: CostMode,
    /// Bucket height of the nearest-neighbor index.
    pub iystep: f64,
    pub opt_mode: OptMode,
    /// Stops after this many outer iterations regardless of time.
    pub max_iterations: Option<u64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            tmax: 10.0,
            gfdist: 0.05,
            gfangle: PI / 32.0,
            near_dist: 3.0,
            steer_step: 0.2,
            rng_seed: 0,
            cost_mode: CostMode::Euclidean,
            iystep: 1.0,
            opt_mode: OptMode::Dijkstra,
            max_iterations: None,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        let positive = [
            ("tmax", self.tmax),
            ("gfdist", self.gfdist),
            ("gfangle", self.gfangle),
            ("near_dist", self.near_dist),
            ("steer_step", self.steer_step),
            ("iystep", self.iystep),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PlanError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub pose: Pose,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Cumulative Reeds-Shepp cost from the root.
    pub ccost: f64,
    /// Drive direction on the edge arriving at this node.
    pub direction: Option<Direction>,
}

/// Node arena; ids are insertion order and the root is id 0.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
    index: NNIndex,
}

impl Tree {
    fn new(root: Pose, index: NNIndex) -> Self {
        let mut tree = Self {
            nodes: Vec::new(),
            index,
        };
        tree.push(Node {
            pose: root,
            parent: None,
            children: Vec::new(),
            ccost: 0.0,
            direction: None,
        });
        tree
    }

    fn push(&mut self, node: Node) -> usize {
        let id = self.nodes.len();
        if let Some(p) = node.parent {
            self.nodes[p].children.push(id);
        }
        self.index.add(id, node.pose);
        self.nodes.push(node);
        id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index(&self) -> &NNIndex {
        &self.index
    }

    /// Node ids from the root to `id`.
    pub fn lineage(&self, id: usize) -> Vec<usize> {
        let mut ids = vec![id];
        let mut at = id;
        while let Some(p) = self.nodes[at].parent {
            ids.push(p);
            at = p;
        }
        ids.reverse();
        ids
    }

    fn reparent(&mut self, id: usize, parent: usize, ccost: f64, direction: Direction) {
        if let Some(old) = self.nodes[id].parent {
            self.nodes[old].children.retain(|&c| c != id);
        }
        self.nodes[parent].children.push(id);
        let delta = self.nodes[id].ccost - ccost;
        let node = &mut self.nodes[id];
        node.parent = Some(parent);
        node.ccost = ccost;
        node.direction = Some(direction);
        let mut stack = node.children.clone();
        while let Some(c) = stack.pop() {
            self.nodes[c].ccost -= delta;
            stack.extend_from_slice(&self.nodes[c].children);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub goal_found: bool,
    /// Final (optimized) path, empty when no path was found.
    pub path: Vec<Waypoint>,
    /// Path extracted from the tree before optimization.
    pub raw_path: Vec<Waypoint>,
    pub pre_opt_cost: Option<f64>,
    pub post_opt_cost: Option<f64>,
    /// Seconds until the goal was reached (or until giving up).
    pub elapsed_to_first_path: f64,
    pub iterations: u64,
}

/// Connect candidate keyed by cost (exact or lower bound), then position.
#[derive(Clone, Copy)]
struct Candidate {
    key: f64,
    k: usize,
    exact: bool,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // reversed for a min-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then_with(|| other.k.cmp(&self.k))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn random_sample<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Pose {
    let x = rng.gen_range(scenario.x_min..=scenario.x_max);
    let y = rng.gen_range(scenario.y_min..=scenario.y_max);
    let theta = rng.gen_range(0.0..TAU);
    Pose::new(x, y, theta)
}

pub fn is_near(a: &Pose, b: &Pose, gfdist: f64, gfangle: f64) -> bool {
    euclidean_dist(a, b) < gfdist && angle_diff(a.theta, b.theta) < gfangle
}

/// Incremental planner; [`plan`] drives it until the goal or the budget.
#[derive(Debug, Clone)]
pub struct Planner {
    scenario: Scenario,
    car: Car,
    config: PlannerConfig,
    tree: Tree,
    rng: ChaCha8Rng,
    goal_nodes: Vec<usize>,
    iterations: u64,
}

impl Planner {
    pub fn new(scenario: &Scenario, car: &Car, config: &PlannerConfig) -> Result<Self, PlanError> {
        scenario.validate(car)?;
        config.validate()?;
        let nn = NNConfig::new(config.iystep, scenario.y_min, scenario.y_max, config.cost_mode)
            .map_err(|e| PlanError::InvalidConfig(e.to_string()))?;
        let tree = Tree::new(scenario.init, NNIndex::new(nn, car.turning_radius));
        let mut planner = Self {
            scenario: scenario.clone(),
            car: *car,
            config: config.clone(),
            tree,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            goal_nodes: Vec::new(),
            iterations: 0,
        };
        planner.note_goal(0);
        Ok(planner)
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn car(&self) -> &Car {
        &self.car
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn goal_found(&self) -> bool {
        !self.goal_nodes.is_empty()
    }

    /// Nodes that satisfied the goal test, in discovery order.
    pub fn goal_nodes(&self) -> &[usize] {
        &self.goal_nodes
    }

    /// Goal node with the lowest current cost; the first one wins ties.
    pub fn best_goal(&self) -> Option<usize> {
        self.goal_nodes
            .iter()
            .copied()
            .min_by(|&a, &b| self.tree.nodes[a].ccost.total_cmp(&self.tree.nodes[b].ccost))
    }

    fn radius(&self) -> f64 {
        self.car.turning_radius
    }

    fn note_goal(&mut self, id: usize) -> bool {
        let near = is_near(
            &self.tree.nodes[id].pose,
            &self.scenario.goal,
            self.config.gfdist,
            self.config.gfangle,
        );
        if near {
            self.goal_nodes.push(id);
        }
        near
    }

    /// Arrival direction if the sampled curve, apart from its first pose,
    /// is collision-free.
    fn free_sweep(&self, path: &RSPath) -> Option<Direction> {
        let mut last = Direction::Forward;
        for (pose, dir) in RSSamples::new(path, self.config.steer_step).skip(1) {
            if collide_pose(&pose, &self.car, &self.scenario.obstacles) {
                return None;
            }
            last = dir;
        }
        Some(last)
    }

    /// Links `pose` under the candidate with the lowest `ccost + rs_distance`
    /// whose sweep is collision-free; ties go to the earlier candidate.
    /// Exact distances are computed lazily in lower-bound order.
    pub fn connect(&mut self, pose: Pose, candidates: &[usize]) -> Option<usize> {
        let r = self.radius();
        let mut paths: Vec<Option<RSPath>> = vec![None; candidates.len()];
        let mut heap: BinaryHeap<Candidate> = candidates
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let node = &self.tree.nodes[c];
                Candidate {
                    key: node.ccost + rs_lower_bound(&node.pose, &pose, r),
                    k,
                    exact: false,
                }
            })
            .collect();
        while let Some(top) = heap.pop() {
            let parent = candidates[top.k];
            let node = &self.tree.nodes[parent];
            if !top.exact {
                let path = rs_path(&node.pose, &pose, r);
                heap.push(Candidate {
                    key: node.ccost + path.length,
                    exact: true,
                    ..top
                });
                paths[top.k] = Some(path);
                continue;
            }
            let path = paths[top.k].take().expect("exact candidates carry their path");
            if let Some(direction) = self.free_sweep(&path) {
                return Some(self.tree.push(Node {
                    pose,
                    parent: Some(parent),
                    children: Vec::new(),
                    ccost: top.key,
                    direction: Some(direction),
                }));
            }
        }
        None
    }

    /// Re-parents each candidate under `id` when that is strictly cheaper.
    pub fn rewire(&mut self, id: usize, candidates: &[usize]) {
        let r = self.radius();
        for &n in candidates {
            if n == id || self.tree.nodes[id].parent == Some(n) {
                continue;
            }
            let (from, to) = (&self.tree.nodes[id], &self.tree.nodes[n]);
            if from.ccost + rs_lower_bound(&from.pose, &to.pose, r) >= to.ccost {
                continue;
            }
            let path = rs_path(&from.pose, &to.pose, r);
            let via = from.ccost + path.length;
            if via >= to.ccost {
                continue;
            }
            if let Some(direction) = self.free_sweep(&path) {
                self.tree.reparent(n, id, via, direction);
            }
        }
    }

    /// Steers every node in `from` toward the goal, chaining free samples.
    fn expand_to_goal(&mut self, from: &[usize]) -> bool {
        let r = self.radius();
        for &start in from {
            let samples = steer(
                &self.tree.nodes[start].pose,
                &self.scenario.goal,
                r,
                self.config.steer_step,
            );
            let mut pn = start;
            for &(pose, direction) in &samples[1..] {
                if collide_pose(&pose, &self.car, &self.scenario.obstacles) {
                    break;
                }
                let prev = &self.tree.nodes[pn];
                let ccost = prev.ccost + rs_distance(&prev.pose, &pose, r);
                pn = self.tree.push(Node {
                    pose,
                    parent: Some(pn),
                    children: Vec::new(),
                    ccost,
                    direction: Some(direction),
                });
                if self.note_goal(pn) {
                    return true;
                }
            }
        }
        false
    }

    /// One outer iteration; returns true when a goal node was inserted.
    pub fn iterate(&mut self) -> bool {
        self.iterations += 1;
        let r = self.radius();
        let sample = random_sample(&self.scenario, &mut self.rng);
        let nearest = self
            .tree
            .index
            .nearest_with_cost(&sample, self.config.cost_mode, r)
            .expect("tree holds the root");
        let chain = steer(&self.tree.nodes[nearest].pose, &sample, r, self.config.steer_step);
        let mut added = Vec::new();
        let mut pn = nearest;
        for &(pose, _) in &chain[1..] {
            let mut candidates = vec![pn];
            candidates.extend(
                self.tree
                    .index
                    .near_nodes(&pose, self.config.near_dist)
                    .into_iter()
                    .filter(|&n| n != pn),
            );
            let Some(id) = self.connect(pose, &candidates) else {
                break;
            };
            self.rewire(id, &candidates);
            added.push(id);
            if self.note_goal(id) {
                return true;
            }
            pn = id;
        }
        self.expand_to_goal(&added)
    }

    /// Dense init-to-node path: every edge re-sampled at `steer_step`.
    pub fn extract_path(&self, id: usize) -> Vec<Waypoint> {
        let ids = self.tree.lineage(id);
        let mut path = vec![Waypoint {
            pose: self.tree.nodes[ids[0]].pose,
            direction: None,
        }];
        let r = self.radius();
        for w in ids.windows(2) {
            let (a, b) = (&self.tree.nodes[w[0]].pose, &self.tree.nodes[w[1]].pose);
            path.extend(
                steer(a, b, r, self.config.steer_step)
                    .into_iter()
                    .skip(1)
                    .map(|(pose, d)| Waypoint {
                        pose,
                        direction: Some(d),
                    }),
            );
        }
        path
    }

    fn budget_left(&self, started: Instant, budget: Duration) -> bool {
        let capped = self.config.max_iterations.is_some_and(|cap| self.iterations >= cap);
        !capped && started.elapsed() < budget
    }

    /// Iterates until a goal node exists, the budget runs out or the
    /// iteration cap is hit.
    pub fn run(&mut self) -> f64 {
        let started = Instant::now();
        let budget = Duration::from_secs_f64(self.config.tmax);
        while !self.goal_found() && self.budget_left(started, budget) {
            self.iterate();
        }
        started.elapsed().as_secs_f64()
    }

    /// Extracts and optimizes the path to the best goal node.
    pub fn finish(&self, elapsed: f64) -> PlanResult {
        let Some(goal) = self.best_goal() else {
            return PlanResult {
                goal_found: false,
                path: Vec::new(),
                raw_path: Vec::new(),
                pre_opt_cost: None,
                post_opt_cost: None,
                elapsed_to_first_path: elapsed,
                iterations: self.iterations,
            };
        };
        let raw = self.extract_path(goal);
        let pre = self.tree.nodes[goal].ccost;
        let ctx = OptContext {
            car: &self.car,
            obstacles: &self.scenario.obstacles,
            radius: self.radius(),
            step: self.config.steer_step,
        };
        let out = optimize(self.config.opt_mode, &raw, ctx);
        let post = if out.improved { out.cost.min(pre) } else { pre };
        PlanResult {
            goal_found: true,
            path: if out.improved { out.path } else { raw.clone() },
            raw_path: raw,
            pre_opt_cost: Some(pre),
            post_opt_cost: Some(post),
            elapsed_to_first_path: elapsed,
            iterations: self.iterations,
        }
    }
}

/// Plans from the scenario's init pose to its goal pose.
pub fn plan(scenario: &Scenario, car: &Car, config: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let mut planner = Planner::new(scenario, car, config)?;
    let elapsed = planner.run();
    Ok(planner.finish(elapsed))
}
