//! Exact coordinate minimization for objectives that are trigonometric of
//! degree one in every coordinate, `f = a + b cos t + c sin t`. Every
//! parameter of a circuit built from `exp(-i t P / 2)` gates with Pauli `P`
//! has this form, so two probes at `t +- pi/2` pin down the whole slice.
//!
//! Coordinates are swept in order, starting from a seeded offset; keeping
//! gates of one qubit adjacent lets consecutive rotations line up exactly.
//! A point where no coordinate moves can still be a saddle, so any budget
//! left after the sweeps stall goes to the quadratic-model method.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{quadratic, OptimizerConfig, Search};

/// Slices whose amplitude is below this fraction of their offset count as flat.
const FLAT: f64 = 1e-12;

pub(super) fn minimize<F>(search: &mut Search<F>, x0: &[f64], f0: f64, config: &OptimizerConfig, rng: &mut ChaCha8Rng)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f0;
    let offset = rng.random_range(0..n);
    loop {
        let mut largest = 0.0f64;
        for k in (0..n).map(|i| (i + offset) % n) {
            if search.budget_left() < 2 {
                return;
            }
            let t0 = x[k];
            x[k] = t0 + FRAC_PI_2;
            let plus = search.eval(&x);
            x[k] = t0 - FRAC_PI_2;
            let minus = search.eval(&x);
            // f(t0 + u) = a + b cos u + c sin u
            let a = 0.5 * (plus + minus);
            let (b, c) = (fx - a, 0.5 * (plus - minus));
            let r = b.hypot(c);
            if !r.is_finite() || r <= FLAT * a.abs().max(1.0) {
                x[k] = t0;
                continue;
            }
            let u = (-c).atan2(-b);
            x[k] = wrap(t0 + u);
            fx = a - r;
            largest = largest.max(u.abs());
        }
        if search.exhausted() {
            return;
        }
        // Re-anchor on a real evaluation so rounding in the fits cannot drift.
        fx = search.eval(&x);
        if largest <= config.rho_end {
            break;
        }
    }
    if !search.exhausted() {
        quadratic::minimize(search, &x, fx, config, rng);
    }
}

/// Maps an angle into `(-pi, pi]`.
fn wrap(t: f64) -> f64 {
    let w = t.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}
