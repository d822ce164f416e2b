//! Independent Reeds-Shepp evaluator used as a test oracle.
//!
//! Written from the twelve base formulas with permissive parameter signs: a
//! negative parameter simply reverses the gear of that element. Every
//! candidate is integrated and discarded unless it lands on the goal, so the
//! minimum is always the length of a feasible curvature-bounded path.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Steer {
    L,
    S,
    R,
}

#[derive(Clone, Copy, Debug)]
pub struct Elem {
    pub param: f64,
    pub steer: Steer,
    pub forward: bool,
}

fn el(param: f64, steer: Steer, forward: bool) -> Elem {
    if param >= 0.0 {
        Elem { param, steer, forward }
    } else {
        Elem {
            param: -param,
            steer,
            forward: !forward,
        }
    }
}

/// Wraps into [-π, π).
fn m(a: f64) -> f64 {
    let mut t = a.rem_euclid(TAU);
    if t >= PI {
        t -= TAU;
    }
    t
}

fn r(x: f64, y: f64) -> (f64, f64) {
    ((x * x + y * y).sqrt(), y.atan2(x))
}

use Steer::{L, R, S};

fn p1(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (u, t) = r(x - phi.sin(), y - 1.0 + phi.cos());
    let v = m(phi - t);
    Some(vec![el(t, L, true), el(u, S, true), el(v, L, true)])
}

fn p2(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, t1) = r(x + phi.sin(), y - 1.0 - phi.cos());
    if rho * rho < 4.0 {
        return None;
    }
    let u = (rho * rho - 4.0).sqrt();
    let t = m(t1 + 2.0_f64.atan2(u));
    let v = m(t - phi);
    Some(vec![el(t, L, true), el(u, S, true), el(v, R, true)])
}

fn p3(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x - phi.sin(), y - 1.0 + phi.cos());
    if rho > 4.0 {
        return None;
    }
    let a = (rho / 4.0).acos();
    let t = m(th + FRAC_PI_2 + a);
    let u = m(PI - 2.0 * a);
    let v = m(phi - t - u);
    Some(vec![el(t, L, true), el(u, R, false), el(v, L, true)])
}

fn p4(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x - phi.sin(), y - 1.0 + phi.cos());
    if rho > 4.0 {
        return None;
    }
    let a = (rho / 4.0).acos();
    let t = m(th + FRAC_PI_2 + a);
    let u = m(PI - 2.0 * a);
    let v = m(t + u - phi);
    Some(vec![el(t, L, true), el(u, R, false), el(v, L, false)])
}

fn p5(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x - phi.sin(), y - 1.0 + phi.cos());
    if rho > 4.0 || rho == 0.0 {
        return None;
    }
    let u = (1.0 - rho * rho / 8.0).acos();
    let a = (2.0 * u.sin() / rho).clamp(-1.0, 1.0).asin();
    let t = m(th + FRAC_PI_2 - a);
    let v = m(t - u - phi);
    Some(vec![el(t, L, true), el(u, R, true), el(v, L, false)])
}

fn p6(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x + phi.sin(), y - 1.0 - phi.cos());
    if rho > 4.0 {
        return None;
    }
    let (t, u, v);
    if rho <= 2.0 {
        let a = ((rho + 2.0) / 4.0).acos();
        t = m(th + FRAC_PI_2 + a);
        u = m(a);
        v = m(phi - t + 2.0 * u);
    } else {
        let a = ((rho - 2.0) / 4.0).acos();
        t = m(th + FRAC_PI_2 - a);
        u = m(PI - a);
        v = m(phi - t + 2.0 * u);
    }
    Some(vec![el(t, L, true), el(u, R, true), el(u, L, false), el(v, R, false)])
}

fn p7(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = (20.0 - rho * rho) / 16.0;
    if rho > 6.0 || !(0.0..=1.0).contains(&u1) || rho == 0.0 {
        return None;
    }
    let u = u1.acos();
    let a = (2.0 * u.sin() / rho).clamp(-1.0, 1.0).asin();
    let t = m(th + FRAC_PI_2 + a);
    let v = m(t - phi);
    Some(vec![el(t, L, true), el(u, R, false), el(u, L, false), el(v, R, true)])
}

fn p8(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x - phi.sin(), y - 1.0 + phi.cos());
    if rho < 2.0 {
        return None;
    }
    let u = (rho * rho - 4.0).sqrt() - 2.0;
    let a = 2.0_f64.atan2(u + 2.0);
    let t = m(th + FRAC_PI_2 + a);
    let v = m(t - phi + FRAC_PI_2);
    Some(vec![
        el(t, L, true),
        el(FRAC_PI_2, R, false),
        el(u, S, false),
        el(v, L, false),
    ])
}

fn p9(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x - phi.sin(), y - 1.0 + phi.cos());
    if rho < 2.0 {
        return None;
    }
    let u = (rho * rho - 4.0).sqrt() - 2.0;
    let a = (u + 2.0).atan2(2.0);
    let t = m(th + FRAC_PI_2 - a);
    let v = m(t - phi - FRAC_PI_2);
    Some(vec![
        el(t, L, true),
        el(u, S, true),
        el(FRAC_PI_2, R, true),
        el(v, L, false),
    ])
}

fn p10(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x + phi.sin(), y - 1.0 - phi.cos());
    if rho < 2.0 {
        return None;
    }
    let t = m(th + FRAC_PI_2);
    let u = rho - 2.0;
    let v = m(phi - t - FRAC_PI_2);
    Some(vec![
        el(t, L, true),
        el(FRAC_PI_2, R, false),
        el(u, S, false),
        el(v, R, false),
    ])
}

fn p11(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x + phi.sin(), y - 1.0 - phi.cos());
    if rho < 2.0 {
        return None;
    }
    let t = m(th);
    let u = rho - 2.0;
    let v = m(phi - t - FRAC_PI_2);
    Some(vec![
        el(t, L, true),
        el(u, S, true),
        el(FRAC_PI_2, L, true),
        el(v, R, false),
    ])
}

fn p12(x: f64, y: f64, phi: f64) -> Option<Vec<Elem>> {
    let (rho, th) = r(x + phi.sin(), y - 1.0 - phi.cos());
    if rho < 4.0 {
        return None;
    }
    let u = (rho * rho - 4.0).sqrt() - 4.0;
    let a = 2.0_f64.atan2(u + 4.0);
    let t = m(th + FRAC_PI_2 + a);
    let v = m(t - phi);
    Some(vec![
        el(t, L, true),
        el(FRAC_PI_2, R, false),
        el(u, S, false),
        el(FRAC_PI_2, L, false),
        el(v, R, true),
    ])
}

fn timeflip(p: Vec<Elem>) -> Vec<Elem> {
    p.into_iter()
        .map(|e| Elem {
            forward: !e.forward,
            ..e
        })
        .collect()
}

fn reflect(p: Vec<Elem>) -> Vec<Elem> {
    p.into_iter()
        .map(|e| Elem {
            steer: match e.steer {
                L => R,
                R => L,
                S => S,
            },
            ..e
        })
        .collect()
}

/// Integrates a unit-radius word from the origin.
pub fn integrate_unit(word: &[Elem]) -> (f64, f64, f64) {
    let (mut x, mut y, mut th) = (0.0_f64, 0.0_f64, 0.0_f64);
    for e in word {
        let d = if e.forward { e.param } else { -e.param };
        match e.steer {
            S => {
                x += d * th.cos();
                y += d * th.sin();
            }
            L => {
                x += (th + d).sin() - th.sin();
                y += th.cos() - (th + d).cos();
                th += d;
            }
            R => {
                x += th.sin() - (th - d).sin();
                y += (th - d).cos() - th.cos();
                th -= d;
            }
        }
    }
    (x, y, th)
}

/// All feasible candidate words (unit radius) for the goal `(x, y, phi)` in
/// the start frame.
pub fn candidates(x: f64, y: f64, phi: f64) -> Vec<Vec<Elem>> {
    type F = fn(f64, f64, f64) -> Option<Vec<Elem>>;
    let fns: [F; 12] = [p1, p2, p3, p4, p5, p6, p7, p8, p9, p10, p11, p12];
    let mut out = Vec::new();
    for f in fns {
        let raw = [
            f(x, y, phi),
            f(-x, y, -phi).map(timeflip),
            f(x, -y, -phi).map(reflect),
            f(-x, -y, phi).map(timeflip).map(reflect),
        ];
        for w in raw.into_iter().flatten() {
            if w.iter().any(|e| !e.param.is_finite()) {
                continue;
            }
            let (ex, ey, eth) = integrate_unit(&w);
            let dth = (eth - phi).rem_euclid(TAU);
            let dth = dth.min(TAU - dth);
            if (ex - x).hypot(ey - y) < 1e-7 && dth < 1e-7 {
                out.push(w);
            }
        }
    }
    out
}

/// Shortest feasible candidate length between two poses `(x, y, theta)`.
pub fn oracle_distance(a: (f64, f64, f64), b: (f64, f64, f64), radius: f64) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (s, c) = a.2.sin_cos();
    let x = (c * dx + s * dy) / radius;
    let y = (-s * dx + c * dy) / radius;
    let phi = b.2 - a.2;
    candidates(x, y, phi)
        .iter()
        .map(|w| w.iter().map(|e| e.param).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        * radius
}
