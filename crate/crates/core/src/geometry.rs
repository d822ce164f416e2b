//! Poses, obstacles, the car footprint and the collision predicates shared by
//! the planner and the path optimizers.
//!
//! A pose anchors the car at the midpoint of its rear axle. The footprint is
//! the `length x width` rectangle around it, with the overhang beyond the
//! wheelbase split evenly between the rear and the front.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round tiny negative inputs up to exactly TAU
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Absolute heading difference on the circle, in `[0, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

/// Car configuration in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    /// Builds a pose with the heading wrapped into `[0, 2π)`.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Planar distance between the pose positions; headings are ignored.
pub fn euclidean_dist(a: &Pose, b: &Pose) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleObstacle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl CircleObstacle {
    pub fn new(x: f64, y: f64, r: f64) -> Result<Self, GeometryError> {
        if !(r > 0.0) || !x.is_finite() || !y.is_finite() || !r.is_finite() {
            return Err(GeometryError::InvalidCircle { x, y, r });
        }
        Ok(Self { x, y, r })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentObstacle {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl SegmentObstacle {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        let finite = [x1, y1, x2, y2].iter().all(|v| v.is_finite());
        if !finite || (x1 == x2 && y1 == y2) {
            return Err(GeometryError::InvalidSegment { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }
}

/// Vehicle dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Car {
    pub length: f64,
    pub width: f64,
    pub turning_radius: f64,
    pub wheelbase: f64,
}

impl Car {
    pub fn new(length: f64, width: f64, turning_radius: f64, wheelbase: f64) -> Result<Self, GeometryError> {
        let car = Self {
            length,
            width,
            turning_radius,
            wheelbase,
        };
        car.validate()?;
        Ok(car)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.wheelbase > 0.0) || !(self.length > self.wheelbase) {
            return Err(GeometryError::InvalidCar("length > wheelbase > 0 must hold".into()));
        }
        if !(self.width > 0.0) {
            return Err(GeometryError::InvalidCar("width must be positive".into()));
        }
        if !(self.turning_radius > 0.0) || !self.turning_radius.is_finite() {
            return Err(GeometryError::InvalidCar("turning radius must be positive".into()));
        }
        Ok(())
    }

    /// Maximum curvature, `1 / turning_radius`.
    pub fn curvature(&self) -> f64 {
        1.0 / self.turning_radius
    }

    /// Distance from the rear axle to the rear bumper.
    pub fn rear_overhang(&self) -> f64 {
        (self.length - self.wheelbase) / 2.0
    }

    /// Distance from the rear axle to the front bumper.
    pub fn front_reach(&self) -> f64 {
        self.wheelbase + self.rear_overhang()
    }
}

/// Corners of the oriented car rectangle, counter-clockwise starting at the
/// rear right corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub corners: [(f64, f64); 4],
}

pub fn footprint(pose: &Pose, car: &Car) -> Footprint {
    let (s, c) = pose.theta.sin_cos();
    let rear = -car.rear_overhang();
    let front = car.front_reach();
    let half = car.width / 2.0;
    let local = [(rear, -half), (front, -half), (front, half), (rear, half)];
    let mut corners = [(0.0, 0.0); 4];
    for (out, (lx, ly)) in corners.iter_mut().zip(local) {
        *out = (pose.x + c * lx - s * ly, pose.y + s * lx + c * ly);
    }
    Footprint { corners }
}

/// Circle and segment obstacles of a scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Obstacles {
    pub circles: Vec<CircleObstacle>,
    pub segments: Vec<SegmentObstacle>,
}

impl Obstacles {
    pub fn is_empty(&self) -> bool {
        self.circles.is_empty() && self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.circles.len() + self.segments.len()
    }
}

/// The footprint expressed as an axis-aligned box in the car frame, plus the
/// transform into that frame.
struct CarFrame {
    x: f64,
    y: f64,
    sin: f64,
    cos: f64,
    x_lo: f64,
    x_hi: f64,
    half_w: f64,
}

impl CarFrame {
    fn new(pose: &Pose, car: &Car) -> Self {
        let (sin, cos) = pose.theta.sin_cos();
        Self {
            x: pose.x,
            y: pose.y,
            sin,
            cos,
            x_lo: -car.rear_overhang(),
            x_hi: car.front_reach(),
            half_w: car.width / 2.0,
        }
    }

    #[inline]
    fn to_local(&self, px: f64, py: f64) -> (f64, f64) {
        let dx = px - self.x;
        let dy = py - self.y;
        (self.cos * dx + self.sin * dy, -self.sin * dx + self.cos * dy)
    }

    fn hits_circle(&self, c: &CircleObstacle) -> bool {
        let (lx, ly) = self.to_local(c.x, c.y);
        // reference point strictly inside the circle
        if lx * lx + ly * ly < c.r * c.r {
            return true;
        }
        let qx = lx.clamp(self.x_lo, self.x_hi) - lx;
        let qy = ly.clamp(-self.half_w, self.half_w) - ly;
        qx * qx + qy * qy <= c.r * c.r
    }

    /// Liang-Barsky clip of the segment against the box.
    fn hits_segment(&self, s: &SegmentObstacle) -> bool {
        let (ax, ay) = self.to_local(s.x1, s.y1);
        let (bx, by) = self.to_local(s.x2, s.y2);
        let dx = bx - ax;
        let dy = by - ay;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let checks = [
            (-dx, ax - self.x_lo),
            (dx, self.x_hi - ax),
            (-dy, ay + self.half_w),
            (dy, self.half_w - ay),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// True when the car at `pose` overlaps any obstacle, or its reference point
/// lies strictly inside a circle obstacle.
pub fn collide_pose(pose: &Pose, car: &Car, obstacles: &Obstacles) -> bool {
    let frame = CarFrame::new(pose, car);
    obstacles.circles.iter().any(|c| frame.hits_circle(c)) || obstacles.segments.iter().any(|s| frame.hits_segment(s))
}

/// True when any pose of the sequence collides.
pub fn collide_path<'a, I>(path: I, car: &Car, obstacles: &Obstacles) -> bool
where
    I: IntoIterator<Item = &'a Pose>,
{
    if obstacles.is_empty() {
        return false;
    }
    path.into_iter().any(|p| collide_pose(p, car, obstacles))
}
