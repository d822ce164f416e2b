//! Reeds-Shepp shortest paths for a car that drives both forward and
//! backward with a bounded turning radius.
//!
//! The solver evaluates 18 base word families, each under time flip and
//! reflection (44 candidate evaluations covering the 48 canonical words), in
//! a fixed order and keeps the first strictly shortest one. Lengths handled internally are in units of the
//! turning radius; everything public is in meters.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, Pose};

/// Tolerance (unit radius) for accepting a slightly negative arc or straight
/// parameter. Round-off in the frame change reaches ~1e-14 for poses a few
/// centimeters apart, so a tighter bound drops the true word for them.
const ZERO: f64 = 1e-10;

/// Number of candidate words evaluated per query.
pub const WORD_COUNT: usize = 44;

/// Segments shorter than this (meters) produce no sample of their own.
const MIN_SAMPLED_SEGMENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RSSegment {
    pub kind: SegmentKind,
    pub direction: Direction,
    /// Arc length in meters.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSPath {
    pub start: Pose,
    pub goal: Pose,
    pub turning_radius: f64,
    pub segments: Vec<RSSegment>,
    /// Total length in meters, bit-identical to [`rs_distance`].
    pub length: f64,
    /// Position of the chosen word in the evaluation order, `0..WORD_COUNT`.
    pub word: usize,
}

impl RSPath {
    pub fn total_length(&self) -> f64 {
        self.length
    }
}

use SegmentKind::{Left as L, Right as R, Straight as S};

/// Base families; unused trailing slots are never read because their
/// lengths are zero.
const FAMILIES: [[SegmentKind; 5]; 18] = [
    [L, R, L, S, S],
    [R, L, R, S, S],
    [L, R, L, R, S],
    [R, L, R, L, S],
    [L, R, S, L, S],
    [R, L, S, R, S],
    [L, S, R, L, S],
    [R, S, L, R, S],
    [L, R, S, R, S],
    [R, L, S, L, S],
    [R, S, R, L, S],
    [L, S, L, R, S],
    [L, S, R, S, S],
    [R, S, L, S, S],
    [L, S, L, S, S],
    [R, S, R, S, S],
    [L, R, S, L, R],
    [R, L, S, R, L],
];

/// Best word found so far, lengths signed and in units of the radius.
#[derive(Clone, Copy)]
struct Word {
    family: usize,
    lengths: [f64; 5],
    total: f64,
    index: usize,
}

struct Search {
    best: Word,
    next_index: usize,
}

impl Search {
    fn new() -> Self {
        Self {
            best: Word {
                family: 0,
                lengths: [0.0; 5],
                total: f64::INFINITY,
                index: 0,
            },
            next_index: 0,
        }
    }

    /// Registers candidate number `next_index`, keeping it only when strictly
    /// shorter than the incumbent.
    fn offer(&mut self, ok: bool, family: usize, lengths: [f64; 5]) {
        let index = self.next_index;
        self.next_index += 1;
        if !ok {
            return;
        }
        let total: f64 = lengths.iter().map(|l| l.abs()).sum();
        if total < self.best.total {
            self.best = Word {
                family,
                lengths,
                total,
                index,
            };
        }
    }
}

/// Wraps into `[-π, π]`.
#[inline]
fn mod2pi(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let mut v = x;
    while v > PI {
        v -= TAU;
    }
    while v < -PI {
        v += TAU;
    }
    v
}

#[inline]
fn polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

#[inline]
fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = mod2pi(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 { mod2pi(t1 + PI) } else { mod2pi(t1) };
    (tau, mod2pi(tau - u + v - phi))
}

// Each primitive solves one base family for a goal (x, y, phi) expressed in
// the start frame and scaled to unit radius.

fn lp_sp_lp(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let (u, t) = polar(x - sp, y - 1.0 + cp);
    if t >= -ZERO {
        let v = mod2pi(phi - t);
        if v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_sp_rp(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let (u1, t1) = polar(x + sp, y - 1.0 - cp);
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let theta = 2.0_f64.atan2(u);
        let t = mod2pi(t1 + theta);
        let v = mod2pi(t - phi);
        if t >= -ZERO && v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_l(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let xi = x - sp;
    let eta = y - 1.0 + cp;
    let (u1, theta) = polar(xi, eta);
    if u1 <= 4.0 {
        let u = -2.0 * (0.25 * u1).asin();
        let t = mod2pi(theta + 0.5 * u + PI);
        let v = mod2pi(phi - t + u);
        if t >= -ZERO && u <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rup_lum_rm(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let xi = x + sp;
    let eta = y - 1.0 - cp;
    let rho = 0.25 * (2.0 + xi.hypot(eta));
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rum_lum_rp(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let xi = x + sp;
    let eta = y - 1.0 - cp;
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -FRAC_PI_2 {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

fn lp_rm_sm_lm(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let xi = x - sp;
    let eta = y - 1.0 + cp;
    let (rho, theta) = polar(xi, eta);
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = mod2pi(theta + r.atan2(-2.0));
        let v = mod2pi(phi - FRAC_PI_2 - t);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_sm_rm(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let xi = x + sp;
    let eta = y - 1.0 - cp;
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = mod2pi(t + FRAC_PI_2 - phi);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_s_lm_rp(x: f64, y: f64, phi: f64, sp: f64, cp: f64) -> Option<(f64, f64, f64)> {
    let xi = x + sp;
    let eta = y - 1.0 - cp;
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= ZERO {
            let t = mod2pi(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = mod2pi(t - phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

/// Goal in the start frame with the sine and cosine of its heading.
#[derive(Clone, Copy)]
struct Goal {
    x: f64,
    y: f64,
    phi: f64,
    sp: f64,
    cp: f64,
}

type Primitive = fn(f64, f64, f64, f64, f64) -> Option<(f64, f64, f64)>;

/// Evaluates a primitive on the goal and its three symmetric images
/// (time flip, reflection, both) and hands the mapped words to the search.
fn four_ways<F>(search: &mut Search, prim: Primitive, g: Goal, fam: [usize; 2], map: F)
where
    F: Fn(f64, f64, f64) -> [f64; 5],
{
    let Goal { x, y, phi, sp, cp } = g;
    let variants = [
        (x, y, phi, sp, 1.0, fam[0]),
        (-x, y, -phi, -sp, -1.0, fam[0]),
        (x, -y, -phi, -sp, 1.0, fam[1]),
        (-x, -y, phi, sp, -1.0, fam[1]),
    ];
    for (vx, vy, vphi, vsp, sign, family) in variants {
        match prim(vx, vy, vphi, vsp, cp) {
            Some((t, u, v)) => {
                let mut l = map(t, u, v);
                for e in l.iter_mut() {
                    *e *= sign;
                }
                search.offer(true, family, l);
            }
            None => search.offer(false, family, [0.0; 5]),
        }
    }
}

fn solve(x: f64, y: f64, phi: f64) -> Word {
    let mut s = Search::new();
    let h = FRAC_PI_2;
    let (sp, cp) = phi.sin_cos();
    let g = Goal { x, y, phi, sp, cp };
    // goal seen from the end pose, for words read backwards
    let b = Goal {
        x: x * cp + y * sp,
        y: x * sp - y * cp,
        ..g
    };

    // C S C
    four_ways(&mut s, lp_sp_lp, g, [14, 15], |t, u, v| [t, u, v, 0.0, 0.0]);
    four_ways(&mut s, lp_sp_rp, g, [12, 13], |t, u, v| [t, u, v, 0.0, 0.0]);

    // C C C, forward then backward-reading
    four_ways(&mut s, lp_rm_l, g, [0, 1], |t, u, v| [t, u, v, 0.0, 0.0]);
    four_ways(&mut s, lp_rm_l, b, [0, 1], |t, u, v| [v, u, t, 0.0, 0.0]);

    // C C C C
    four_ways(&mut s, lp_rup_lum_rm, g, [2, 3], |t, u, v| [t, u, -u, v, 0.0]);
    four_ways(&mut s, lp_rum_lum_rp, g, [2, 3], |t, u, v| [t, u, u, v, 0.0]);

    // C C S C and C S C C
    four_ways(&mut s, lp_rm_sm_lm, g, [4, 5], |t, u, v| [t, -h, u, v, 0.0]);
    four_ways(&mut s, lp_rm_sm_rm, g, [8, 9], |t, u, v| [t, -h, u, v, 0.0]);
    four_ways(&mut s, lp_rm_sm_lm, b, [6, 7], |t, u, v| [v, u, -h, t, 0.0]);
    four_ways(&mut s, lp_rm_sm_rm, b, [10, 11], |t, u, v| [v, u, -h, t, 0.0]);

    // C C S C C
    four_ways(&mut s, lp_rm_s_lm_rp, g, [16, 17], |t, u, v| [t, -h, u, -h, v]);

    debug_assert_eq!(s.next_index, WORD_COUNT);
    s.best
}

/// Goal pose expressed in the start frame, scaled to unit radius.
#[inline]
fn canonical(a: &Pose, b: &Pose, radius: f64) -> (f64, f64, f64) {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let (s, c) = a.theta.sin_cos();
    (
        (c * dx + s * dy) / radius,
        (-s * dx + c * dy) / radius,
        b.theta - a.theta,
    )
}

/// Shortest Reeds-Shepp path from `a` to `b` with minimum turning radius
/// `radius`. Ties between equally long words go to the earliest one.
pub fn rs_path(a: &Pose, b: &Pose, radius: f64) -> RSPath {
    debug_assert!(radius > 0.0);
    let (x, y, phi) = canonical(a, b, radius);
    let word = solve(x, y, phi);
    let kinds = FAMILIES[word.family];
    let segments = kinds
        .iter()
        .zip(word.lengths)
        .take(word_len(&word))
        // a parameter inside the tolerance band is round-off, not a move
        .map(|(&kind, l)| if l.abs() < ZERO { (kind, 0.0) } else { (kind, l) })
        .map(|(kind, l)| RSSegment {
            kind,
            direction: if l < 0.0 {
                Direction::Backward
            } else {
                Direction::Forward
            },
            length: l.abs() * radius,
        })
        .collect();
    RSPath {
        start: *a,
        goal: *b,
        turning_radius: radius,
        segments,
        length: word.total * radius,
        word: word.index,
    }
}

/// Number of meaningful slots: up to the last non-zero length.
fn word_len(word: &Word) -> usize {
    word.lengths.iter().rposition(|l| *l != 0.0).map_or(0, |i| i + 1)
}

/// Length of the shortest Reeds-Shepp path, in meters.
pub fn rs_distance(a: &Pose, b: &Pose, radius: f64) -> f64 {
    let (x, y, phi) = canonical(a, b, radius);
    solve(x, y, phi).total * radius
}

/// Cheap lower bound on [`rs_distance`], never above the exact value.
///
/// Three facts bound the length `L`: it is at least the straight-line
/// distance; heading only changes along arcs, at rate `1 / radius`; and a
/// lateral offset `y` needs turning, since `|sin θ(s)|` is at most both
/// `s / radius` and `|sin φ| + (L - s) / radius`. Integrating the latter gives
/// `|y| / radius ≤ l² / 4 + σ l / 2 - σ² / 4` for `l = L / radius > σ`
/// (`σ = |sin φ|`), and `l² / 2` below. The offset is taken in both end frames.
pub fn rs_lower_bound(a: &Pose, b: &Pose, radius: f64) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let (sa, ca) = a.theta.sin_cos();
    let (sb, cb) = b.theta.sin_cos();
    let lateral = (-sa * dx + ca * dy).abs().max((-sb * dx + cb * dy).abs()) / radius;
    let sigma = (b.theta - a.theta).sin().abs();
    let turn = if 2.0 * lateral <= sigma * sigma {
        (2.0 * lateral).sqrt()
    } else {
        (2.0 * sigma * sigma + 4.0 * lateral).sqrt() - sigma
    };
    let bound = dx
        .hypot(dy)
        .max(radius * angle_diff(a.theta, b.theta))
        .max(radius * turn);
    bound - 1e-9 * (1.0 + bound)
}

/// Moves `distance` meters (signed by `direction`) along one segment kind.
pub fn advance(pose: &Pose, kind: SegmentKind, direction: Direction, distance: f64, radius: f64) -> Pose {
    let d = direction.sign() * distance;
    match kind {
        SegmentKind::Straight => {
            let (s, c) = pose.theta.sin_cos();
            Pose::new(pose.x + d * c, pose.y + d * s, pose.theta)
        }
        SegmentKind::Left => {
            let v = d / radius;
            let th = pose.theta;
            Pose::new(
                pose.x + radius * ((th + v).sin() - th.sin()),
                pose.y + radius * (th.cos() - (th + v).cos()),
                th + v,
            )
        }
        SegmentKind::Right => {
            let v = d / radius;
            let th = pose.theta;
            Pose::new(
                pose.x + radius * (th.sin() - (th - v).sin()),
                pose.y + radius * ((th - v).cos() - th.cos()),
                th - v,
            )
        }
    }
}

/// Samples the path at arc-length spacing of at most `step`.
///
/// Every segment endpoint is emitted, and each pose carries the drive
/// direction of the segment it closes (the start pose takes the direction of
/// the first segment). The final pose is the path goal.
pub fn rs_sample(path: &RSPath, step: f64) -> Vec<(Pose, Direction)> {
    RSSamples::new(path, step).collect()
}

/// Lazy form of [`rs_sample`], yielding the same poses.
#[derive(Debug, Clone)]
pub struct RSSamples<'a> {
    path: &'a RSPath,
    step: f64,
    /// Index of the last segment long enough to be sampled.
    last_live: Option<usize>,
    started: bool,
    seg: usize,
    seg_start: Pose,
    k: usize,
    n: usize,
}

impl<'a> RSSamples<'a> {
    pub fn new(path: &'a RSPath, step: f64) -> Self {
        debug_assert!(step > 0.0);
        Self {
            path,
            step,
            last_live: path.segments.iter().rposition(|s| s.length >= MIN_SAMPLED_SEGMENT),
            started: false,
            seg: 0,
            seg_start: path.start,
            k: 0,
            n: 0,
        }
    }
}

impl Iterator for RSSamples<'_> {
    type Item = (Pose, Direction);

    fn next(&mut self) -> Option<Self::Item> {
        let path = self.path;
        if !self.started {
            self.started = true;
            let first_dir = path
                .segments
                .iter()
                .find(|s| s.length >= MIN_SAMPLED_SEGMENT)
                .map_or(Direction::Forward, |s| s.direction);
            return Some((path.start, first_dir));
        }
        loop {
            let last_live = self.last_live?;
            if self.seg > last_live {
                return None;
            }
            let seg = &path.segments[self.seg];
            if self.k < self.n {
                self.k += 1;
                let pose = if self.seg == last_live && self.k == self.n {
                    path.goal
                } else {
                    let s = seg.length * self.k as f64 / self.n as f64;
                    advance(&self.seg_start, seg.kind, seg.direction, s, path.turning_radius)
                };
                return Some((pose, seg.direction));
            }
            if self.n > 0 || seg.length < MIN_SAMPLED_SEGMENT {
                // segment finished or skipped; move to the next one
                self.seg_start = advance(
                    &self.seg_start,
                    seg.kind,
                    seg.direction,
                    seg.length,
                    path.turning_radius,
                );
                self.seg += 1;
                self.k = 0;
                self.n = 0;
                continue;
            }
            self.n = ((seg.length / self.step) - 1e-9).ceil().max(1.0) as usize;
        }
    }
}

/// Convenience: shortest path from `a` to `b`, sampled.
pub fn steer(a: &Pose, b: &Pose, radius: f64, step: f64) -> Vec<(Pose, Direction)> {
    rs_sample(&rs_path(a, b, radius), step)
}
