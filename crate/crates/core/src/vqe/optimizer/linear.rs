//! Linear models over a simplex, in the style of COBYLA without constraints.
//!
//! The simplex holds `n + 1` points. Each iteration fits the linear
//! interpolant through them and steps down its gradient from the best point,
//! then swaps the trial point into the simplex. When a step fails and the
//! simplex is well shaped, `rho` is halved, down to `rho_end`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{argmin, dot, invert, norm, sub, OptimizerConfig, Search};

// A vertex farther than this many `rho` from the best point is replaced.
const FAR: f64 = 2.1;
// A vertex closer than this many `rho` to the face spanned by the others is replaced.
const FLAT: f64 = 0.25;

/// Best point plus `n` edge vectors `d_k` to the other vertices, with the
/// columns `m_k` of the inverse of the edge matrix (`d_i . m_k = [i == k]`).
struct Simplex {
    base: Vec<f64>,
    f_base: f64,
    edges: Vec<Vec<f64>>,
    values: Vec<f64>,
    inverse: Vec<Vec<f64>>,
    updates: usize,
}

impl Simplex {
    /// Recomputes the inverse from scratch; `false` when the edges are degenerate.
    fn refactor(&mut self) -> bool {
        self.updates = 0;
        match invert(&self.edges) {
            Some(rows) => {
                let n = self.edges.len();
                self.inverse = (0..n).map(|k| (0..n).map(|i| rows[i][k]).collect()).collect();
                true
            }
            None => false,
        }
    }

    fn gradient(&self) -> Vec<f64> {
        let n = self.edges.len();
        let mut g = vec![0.0; n];
        for (m, &f) in self.inverse.iter().zip(&self.values) {
            let df = f - self.f_base;
            for (gi, mi) in g.iter_mut().zip(m) {
                *gi += mi * df;
            }
        }
        g
    }

    /// Swaps edge `k` for `edge`, keeping the inverse current (Sherman–Morrison).
    fn replace(&mut self, k: usize, edge: Vec<f64>, value: f64) {
        let lambda = dot(&edge, &self.inverse[k]);
        let mk: Vec<f64> = self.inverse[k].iter().map(|m| m / lambda).collect();
        for c in 0..self.inverse.len() {
            if c != k {
                let t = dot(&edge, &self.inverse[c]);
                if t != 0.0 {
                    for (mc, m) in self.inverse[c].iter_mut().zip(&mk) {
                        *mc -= t * m;
                    }
                }
            }
        }
        self.inverse[k] = mk;
        self.edges[k] = edge;
        self.values[k] = value;
        self.updates += 1;
    }

    /// Makes vertex `k` the base point.
    fn rebase(&mut self, k: usize) {
        let dk = self.edges[k].clone();
        for (i, edge) in self.edges.iter_mut().enumerate() {
            if i != k {
                for (e, d) in edge.iter_mut().zip(&dk) {
                    *e -= d;
                }
            }
        }
        self.edges[k] = dk.iter().map(|d| -d).collect();
        for (b, d) in self.base.iter_mut().zip(&dk) {
            *b += d;
        }
        let n = self.edges.len();
        let mut sum = vec![0.0; n];
        for m in &self.inverse {
            for (s, x) in sum.iter_mut().zip(m) {
                *s -= x;
            }
        }
        self.inverse[k] = sum;
        std::mem::swap(&mut self.f_base, &mut self.values[k]);
    }

    fn point(&self, edge: &[f64]) -> Vec<f64> {
        self.base.iter().zip(edge).map(|(b, d)| b + d).collect()
    }
}

/// Runs from `x0`, whose value is already `search`'s first evaluation.
pub(super) fn minimize<F>(search: &mut Search<F>, x0: &[f64], f0: f64, config: &OptimizerConfig, rng: &mut ChaCha8Rng)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut rho = config.rho_start;
    let mut simplex = Simplex {
        base: x0.to_vec(),
        f_base: f0,
        edges: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        inverse: Vec::new(),
        updates: 0,
    };
    for i in 0..n {
        if search.exhausted() {
            return;
        }
        let mut edge = vec![0.0; n];
        edge[i] = if rng.random::<bool>() { rho } else { -rho };
        simplex.values.push(search.eval(&simplex.point(&edge)));
        simplex.edges.push(edge);
    }
    simplex.refactor();
    if let Some(k) = argmin(&simplex.values).filter(|&k| simplex.values[k] < simplex.f_base) {
        simplex.rebase(k);
    }

    // Step radius; grows past `rho` while the linear model predicts well.
    let mut delta = rho;
    let max_delta = 4.0 * config.rho_start;
    while !search.exhausted() {
        if simplex.updates >= 2 * n && !simplex.refactor() {
            // Collapsed simplex: rebuild it around the best point.
            for i in 0..n {
                if search.exhausted() {
                    return;
                }
                let mut edge = vec![0.0; n];
                edge[i] = rho;
                simplex.values[i] = search.eval(&simplex.point(&edge));
                simplex.edges[i] = edge;
            }
            if !simplex.refactor() {
                break;
            }
            if let Some(k) = argmin(&simplex.values).filter(|&k| simplex.values[k] < simplex.f_base) {
                simplex.rebase(k);
            }
            continue;
        }

        let gradient = simplex.gradient();
        let gnorm = norm(&gradient);
        if gnorm > 0.0 && gnorm.is_finite() {
            let step: Vec<f64> = gradient.iter().map(|g| -delta * g / gnorm).collect();
            let ft = search.eval(&simplex.point(&step));
            let improved = ft < simplex.f_base;
            let ratio = (simplex.f_base - ft) / (delta * gnorm);
            if ratio >= 0.7 {
                delta = (2.0 * delta).min(max_delta);
            } else if ratio < 0.1 {
                delta = (0.5 * delta).max(rho);
            }
            // An improving point replaces the vertex the step leans on most,
            // weighted by distance from the trial. A failed one may only
            // replace a vertex lying outside the step radius, so repeated
            // failures cannot cycle without shrinking `rho`.
            let mut drop = None;
            let mut score_max = 0.0;
            for k in 0..n {
                let lambda = dot(&simplex.inverse[k], &step).abs();
                let score = if improved {
                    let distance = norm(&sub(&simplex.edges[k], &step)) / rho;
                    lambda * distance.max(1.0).powi(2)
                } else {
                    let distance = norm(&simplex.edges[k]) / delta;
                    if distance <= 1.01 || lambda < 0.1 {
                        continue;
                    }
                    lambda * distance.powi(2)
                };
                if score > score_max {
                    score_max = score;
                    drop = Some(k);
                }
            }
            if let Some(k) = drop {
                simplex.replace(k, step, ft);
                if improved {
                    simplex.rebase(k);
                }
            }
            if improved || drop.is_some() || delta > rho {
                continue;
            }
        }
        if search.exhausted() {
            break;
        }

        // Failed step: repair geometry first, otherwise refine the radius.
        let (far, far_distance) = simplex
            .edges
            .iter()
            .map(|e| norm(e))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, d)| if d > acc.1 { (k, d) } else { acc });
        let (flat, flat_distance) = simplex
            .inverse
            .iter()
            .map(|m| 1.0 / norm(m))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, d)| if d < acc.1 { (k, d) } else { acc });
        let repair = if far_distance > FAR * rho {
            Some(far)
        } else if flat_distance < FLAT * rho {
            Some(flat)
        } else {
            None
        };
        match repair {
            Some(k) => {
                // Move vertex k off the face of the others, downhill on the model.
                let direction = &simplex.inverse[k];
                let scale = rho / norm(direction);
                let sign = if dot(&gradient, direction) > 0.0 { -1.0 } else { 1.0 };
                let edge: Vec<f64> = direction.iter().map(|d| sign * scale * d).collect();
                let value = search.eval(&simplex.point(&edge));
                simplex.replace(k, edge, value);
                if value < simplex.f_base {
                    simplex.rebase(k);
                }
            }
            None if rho <= config.rho_end => break,
            None => {
                rho *= 0.5;
                if rho <= 1.5 * config.rho_end {
                    rho = config.rho_end;
                }
                delta = rho;
            }
        }
    }
}
