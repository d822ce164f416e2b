//! Nearest-neighbor index that buckets nodes by their y coordinate.
//!
//! Queries start in the bucket holding the query and widen one ring of
//! buckets at a time. A bucket is skipped once the y-gap between it and the
//! query exceeds the best cost found so far; every supported cost is bounded
//! below by that gap, so the result equals a linear scan, including the
//! first-inserted tie-break.

use serde::{Deserialize, Serialize};

use crate::error::IndexError;
use crate::geometry::{euclidean_dist, Pose};
use crate::reeds_shepp::rs_distance;

const BOUND_SLACK: f64 = 1e-9;

/// Cost used to rank nodes against a query pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostMode {
    #[serde(rename = "euclidean")]
    Euclidean,
    #[serde(rename = "rs")]
    ReedsShepp,
    /// Reeds-Shepp length with the node heading replaced by the query heading.
    #[serde(rename = "rs-flat")]
    ReedsSheppFlatHeading,
}

impl CostMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CostMode::Euclidean => "euclidean",
            CostMode::ReedsShepp => "rs",
            CostMode::ReedsSheppFlatHeading => "rs-flat",
        }
    }

    /// Cost from a node at `node` to `query`.
    pub fn cost(self, node: &Pose, query: &Pose, radius: f64) -> f64 {
        match self {
            CostMode::Euclidean => euclidean_dist(node, query),
            CostMode::ReedsShepp => rs_distance(node, query, radius),
            CostMode::ReedsSheppFlatHeading => {
                let flat = Pose {
                    theta: query.theta,
                    ..*node
                };
                rs_distance(&flat, query, radius)
            }
        }
    }
}

impl std::fmt::Display for CostMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(CostMode::Euclidean),
            "rs" => Ok(CostMode::ReedsShepp),
            "rs-flat" => Ok(CostMode::ReedsSheppFlatHeading),
            other => Err(format!("unknown cost mode `{other}` (euclidean|rs|rs-flat)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NNConfig {
    /// Bucket height in meters.
    pub iystep: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub cost_mode: CostMode,
}

impl NNConfig {
    pub fn new(iystep: f64, y_min: f64, y_max: f64, cost_mode: CostMode) -> Result<Self, IndexError> {
        if !(iystep > 0.0) || !iystep.is_finite() {
            return Err(IndexError::InvalidConfig(format!(
                "iystep must be positive, got {iystep}"
            )));
        }
        if !(y_max > y_min) || !y_min.is_finite() || !y_max.is_finite() {
            return Err(IndexError::InvalidConfig(format!(
                "y_max ({y_max}) must exceed y_min ({y_min})"
            )));
        }
        Ok(Self {
            iystep,
            y_min,
            y_max,
            cost_mode,
        })
    }

    pub fn bucket_count(&self) -> usize {
        (((self.y_max - self.y_min) / self.iystep).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    seq: usize,
    id: usize,
    pose: Pose,
}

/// Best candidate so far: cost, then insertion sequence.
#[derive(Clone, Copy)]
struct Best {
    cost: f64,
    seq: usize,
    id: usize,
}

impl Best {
    fn none() -> Self {
        Best {
            cost: f64::INFINITY,
            seq: usize::MAX,
            id: usize::MAX,
        }
    }

    #[inline]
    fn beaten_by(&self, cost: f64, seq: usize) -> bool {
        cost < self.cost || (cost == self.cost && seq < self.seq)
    }
}

#[derive(Debug, Clone)]
pub struct NNIndex {
    config: NNConfig,
    radius: f64,
    buckets: Vec<Vec<Entry>>,
    len: usize,
}

impl NNIndex {
    /// `radius` is the turning radius used by the Reeds-Shepp cost modes.
    pub fn new(config: NNConfig, radius: f64) -> Self {
        Self {
            buckets: vec![Vec::new(); config.bucket_count()],
            config,
            radius,
            len: 0,
        }
    }

    pub fn config(&self) -> &NNConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bucket for a y coordinate, clamped to the index extent.
    pub fn bucket_of(&self, y: f64) -> usize {
        let raw = ((y - self.config.y_min) / self.config.iystep).floor();
        if raw <= 0.0 || raw.is_nan() {
            0
        } else {
            (raw as usize).min(self.buckets.len() - 1)
        }
    }

    /// Node ids per bucket, in insertion order.
    pub fn bucket_ids(&self) -> Vec<Vec<usize>> {
        self.buckets.iter().map(|b| b.iter().map(|e| e.id).collect()).collect()
    }

    pub fn add(&mut self, id: usize, pose: Pose) {
        let b = self.bucket_of(pose.y);
        self.buckets[b].push(Entry {
            seq: self.len,
            id,
            pose,
        });
        self.len += 1;
    }

    /// Lower bounds on |Δy| between `y` and any node stored `ring` buckets
    /// above and below bucket `iy`.
    #[inline]
    fn ring_bounds(&self, iy: usize, ring: usize, y: f64) -> (f64, f64) {
        let s = self.config.iystep;
        let y0 = self.config.y_min;
        let above = y0 + (iy + ring) as f64 * s - y;
        let below = y - (y0 + (iy as f64 - ring as f64 + 1.0) * s);
        // bucket edges are recomputed here, so leave room for rounding
        (above - BOUND_SLACK, below - BOUND_SLACK)
    }

    fn scan(&self, bucket: usize, query: &Pose, mode: CostMode, radius: f64, best: &mut Best) {
        for e in &self.buckets[bucket] {
            let lower = euclidean_dist(&e.pose, query);
            let cost = match mode {
                CostMode::Euclidean => lower,
                _ => {
                    // Reeds-Shepp length never undercuts the straight line;
                    // the slack absorbs rounding in that comparison
                    if lower > best.cost + 1e-9 * (1.0 + best.cost) {
                        continue;
                    }
                    mode.cost(&e.pose, query, radius)
                }
            };
            if best.beaten_by(cost, e.seq) {
                *best = Best {
                    cost,
                    seq: e.seq,
                    id: e.id,
                };
            }
        }
    }

    /// Nearest node by Euclidean distance.
    pub fn nearest(&self, query: &Pose) -> Result<usize, IndexError> {
        self.nearest_with_cost(query, CostMode::Euclidean, self.radius)
    }

    /// Node minimizing `mode` cost to `query`; ties go to the earliest insert.
    pub fn nearest_with_cost(&self, query: &Pose, mode: CostMode, radius: f64) -> Result<usize, IndexError> {
        if self.is_empty() {
            return Err(IndexError::Empty);
        }
        let n = self.buckets.len();
        let iy = self.bucket_of(query.y);
        let mut best = Best::none();
        self.scan(iy, query, mode, radius, &mut best);
        for ring in 1.. {
            let (above, below) = self.ring_bounds(iy, ring, query.y);
            let up = iy + ring < n && above <= best.cost;
            if up {
                self.scan(iy + ring, query, mode, radius, &mut best);
            }
            let down = ring <= iy && below <= best.cost;
            if down {
                self.scan(iy - ring, query, mode, radius, &mut best);
            }
            if !up && !down {
                debug_assert!(iy + ring >= n || above > best.cost);
                debug_assert!(ring > iy || below > best.cost);
                break;
            }
        }
        Ok(best.id)
    }

    /// All nodes whose configured cost to `query` is below `dist`, in
    /// insertion order.
    pub fn near_nodes(&self, query: &Pose, dist: f64) -> Vec<usize> {
        self.near_nodes_with_cost(query, dist)
            .into_iter()
            .map(|(id, _)| id)
            .collect()
    }

    /// Like [`near_nodes`](Self::near_nodes) but also returns each cost.
    pub fn near_nodes_with_cost(&self, query: &Pose, dist: f64) -> Vec<(usize, f64)> {
        if self.is_empty() {
            return Vec::new();
        }
        let mode = self.config.cost_mode;
        let n = self.buckets.len();
        let iy = self.bucket_of(query.y);
        let mut hits: Vec<(usize, usize, f64)> = Vec::new();
        let mut collect = |bucket: usize| {
            for e in &self.buckets[bucket] {
                let lower = euclidean_dist(&e.pose, query);
                if lower >= dist + 1e-9 * (1.0 + dist) {
                    continue;
                }
                let cost = match mode {
                    CostMode::Euclidean => lower,
                    _ => mode.cost(&e.pose, query, self.radius),
                };
                if cost < dist {
                    hits.push((e.seq, e.id, cost));
                }
            }
        };
        collect(iy);
        for ring in 1.. {
            let (above, below) = self.ring_bounds(iy, ring, query.y);
            let up = iy + ring < n && above < dist;
            let down = ring <= iy && below < dist;
            if up {
                collect(iy + ring);
            }
            if down {
                collect(iy - ring);
            }
            if !up && !down {
                break;
            }
        }
        hits.sort_unstable_by_key(|h| h.0);
        hits.into_iter().map(|(_, id, c)| (id, c)).collect()
    }
}
