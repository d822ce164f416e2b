//! Random optimizer instances and an exhaustive tip-subsequence oracle.

use std::f64::consts::TAU;

use parkrrt::{
    collide_path, find_tips, path_cost, rs_distance, rs_path, rs_sample, Car, CircleObstacle, Obstacles, OptContext,
    Pose, Waypoint,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 0.2;

pub fn car() -> Car {
    Car::new(3.760, 1.625, 10.820, 2.450).unwrap()
}

pub struct Instance {
    pub path: Vec<Waypoint>,
    pub obstacles: Obstacles,
}

/// A collision-free path through random via poses among random circles,
/// with at most `max_tips` tips.
pub fn instance(rng: &mut ChaCha8Rng, car: &Car, max_tips: usize) -> Instance {
    loop {
        let obstacles = Obstacles {
            circles: (0..rng.gen_range(0..6))
                .map(|_| {
                    CircleObstacle::new(
                        rng.gen_range(-15.0..15.0),
                        rng.gen_range(-15.0..15.0),
                        rng.gen_range(0.3..2.5),
                    )
                    .unwrap()
                })
                .collect(),
            segments: vec![],
        };
        let vias: Vec<Pose> = (0..rng.gen_range(2..6))
            .map(|_| {
                Pose::new(
                    rng.gen_range(-12.0..12.0),
                    rng.gen_range(-12.0..12.0),
                    rng.gen_range(0.0..TAU),
                )
            })
            .collect();
        let mut path = vec![Waypoint {
            pose: vias[0],
            direction: None,
        }];
        for w in vias.windows(2) {
            let samples = rs_sample(&rs_path(&w[0], &w[1], car.turning_radius), STEP);
            path.extend(samples[1..].iter().map(|&(pose, d)| Waypoint {
                pose,
                direction: Some(d),
            }));
        }
        let tips = find_tips(&path).len();
        let free = !collide_path(path.iter().map(|w| &w.pose), car, &obstacles);
        if free && tips <= max_tips {
            return Instance { path, obstacles };
        }
    }
}

pub fn ctx<'a>(car: &'a Car, obstacles: &'a Obstacles) -> OptContext<'a> {
    OptContext {
        car,
        obstacles,
        radius: car.turning_radius,
        step: STEP,
    }
}

/// Minimum over every increasing tip subsequence from first to last tip.
/// A hop between tips uses the direct curve when its sweep is free; a hop
/// between neighboring tips may also follow the input path.
pub fn exhaustive_minimum(inst: &Instance, car: &Car) -> f64 {
    let tips = find_tips(&inst.path);
    let m = tips.len();
    let r = car.turning_radius;
    let hop = |i: usize, j: usize| -> f64 {
        let (a, b) = (&inst.path[tips[i]].pose, &inst.path[tips[j]].pose);
        let sweep: Vec<Pose> = rs_sample(&rs_path(a, b, r), STEP)
            .into_iter()
            .skip(1)
            .map(|s| s.0)
            .collect();
        let direct = if collide_path(&sweep, car, &inst.obstacles) {
            f64::INFINITY
        } else {
            rs_distance(a, b, r)
        };
        if j == i + 1 {
            direct.min(path_cost(&inst.path[tips[i]..=tips[j]], r))
        } else {
            direct
        }
    };
    let mut best = f64::INFINITY;
    for mask in 0u32..1 << (m - 2) {
        let mut chosen = vec![0];
        chosen.extend((1..m - 1).filter(|k| mask >> (k - 1) & 1 == 1));
        chosen.push(m - 1);
        let cost: f64 = chosen.windows(2).map(|w| hop(w[0], w[1])).sum();
        best = best.min(cost);
    }
    best
}
