//! Quadratic interpolation models in the style of NEWUOA.
//!
//! The model interpolates the objective at `m = 2n + 1` points. When a point
//! is swapped out, the model changes by the quadratic of least Hessian
//! Frobenius norm that restores interpolation; the inverse `H` of the KKT
//! matrix of that problem is updated in `O(m^2)` per swap. Trust-region
//! steps come from truncated conjugate gradients on the model.

#![allow(clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{argmin, dot, invert, norm, sub, OptimizerConfig, Search};

struct Model {
    n: usize,
    m: usize,
    origin: Vec<f64>,
    /// Interpolation points as displacements from `origin`.
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    kopt: usize,
    constant: f64,
    /// Model gradient at `origin`.
    gradient: Vec<f64>,
    /// Hessian = `hessian + sum_j pq[j] points[j] points[j]^T`.
    hessian: Vec<Vec<f64>>,
    pq: Vec<f64>,
    /// Inverse KKT matrix: rows `0..m` multipliers, `m` constant, `m+1..` gradient.
    h: Vec<Vec<f64>>,
    updates: usize,
}

impl Model {
    fn new(origin: Vec<f64>, points: Vec<Vec<f64>>, values: Vec<f64>) -> Option<Self> {
        let n = origin.len();
        let m = points.len();
        let mut model = Model {
            n,
            m,
            origin,
            points,
            kopt: argmin(&values).expect("points"),
            values,
            constant: 0.0,
            gradient: vec![0.0; n],
            hessian: vec![vec![0.0; n]; n],
            pq: vec![0.0; m],
            h: Vec::new(),
            updates: 0,
        };
        model.refactor()?;
        Some(model)
    }

    fn opt(&self) -> &[f64] {
        &self.points[self.kopt]
    }

    fn f_opt(&self) -> f64 {
        self.values[self.kopt]
    }

    fn hess_vec(&self, d: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.hessian.iter().map(|row| dot(row, d)).collect();
        for (p, v) in self.pq.iter().zip(&self.points) {
            if *p != 0.0 {
                let t = p * dot(v, d);
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += t * vi;
                }
            }
        }
        out
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.constant + dot(&self.gradient, x) + 0.5 * dot(x, &self.hess_vec(x))
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        self.gradient.iter().zip(self.hess_vec(x)).map(|(g, b)| g + b).collect()
    }

    /// Column `w` of the KKT matrix for a point `x`.
    fn w(&self, x: &[f64]) -> Vec<f64> {
        let mut w: Vec<f64> = self.points.iter().map(|v| 0.5 * dot(v, x).powi(2)).collect();
        w.push(1.0);
        w.extend_from_slice(x);
        w
    }

    fn h_times(&self, w: &[f64]) -> Vec<f64> {
        self.h.iter().map(|row| dot(row, w)).collect()
    }

    /// Rebuilds `H` from scratch and restores exact interpolation.
    fn refactor(&mut self) -> Option<()> {
        let (m, q) = (self.m, self.m + self.n + 1);
        let mut kkt = vec![vec![0.0; q]; q];
        for i in 0..m {
            for j in 0..=i {
                let a = 0.5 * dot(&self.points[i], &self.points[j]).powi(2);
                kkt[i][j] = a;
                kkt[j][i] = a;
            }
            kkt[i][m] = 1.0;
            kkt[m][i] = 1.0;
            for k in 0..self.n {
                kkt[i][m + 1 + k] = self.points[i][k];
                kkt[m + 1 + k][i] = self.points[i][k];
            }
        }
        self.h = invert(&kkt)?;
        self.updates = 0;
        let residuals: Vec<f64> = (0..m).map(|j| self.values[j] - self.value(&self.points[j])).collect();
        for (t, r) in residuals.into_iter().enumerate() {
            self.add_lagrange(t, r);
        }
        Some(())
    }

    /// Adds `r` times the Lagrange function of point `t` to the model.
    fn add_lagrange(&mut self, t: usize, r: f64) {
        if r == 0.0 {
            return;
        }
        let m = self.m;
        for j in 0..m {
            self.pq[j] += r * self.h[j][t];
        }
        self.constant += r * self.h[m][t];
        for i in 0..self.n {
            self.gradient[i] += r * self.h[m + 1 + i][t];
        }
    }

    /// Value of the Lagrange function of point `t` at `x`.
    fn lagrange(&self, t: usize, x: &[f64]) -> f64 {
        let m = self.m;
        let mut value = self.h[m][t];
        for i in 0..self.n {
            value += self.h[m + 1 + i][t] * x[i];
        }
        for (j, v) in self.points.iter().enumerate() {
            value += 0.5 * self.h[j][t] * dot(v, x).powi(2);
        }
        value
    }

    fn lagrange_gradient(&self, t: usize, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut g: Vec<f64> = (0..self.n).map(|i| self.h[m + 1 + i][t]).collect();
        for (j, v) in self.points.iter().enumerate() {
            let c = self.h[j][t] * dot(v, x);
            for (gi, vi) in g.iter_mut().zip(v) {
                *gi += c * vi;
            }
        }
        g
    }

    fn fold(&mut self, j: usize) {
        let p = std::mem::take(&mut self.pq[j]);
        if p != 0.0 {
            let v = &self.points[j];
            for (row, vi) in self.hessian.iter_mut().zip(v) {
                for (h, vk) in row.iter_mut().zip(v) {
                    *h += p * vi * vk;
                }
            }
        }
    }

    /// Which point a new point `x` should replace.
    fn choose_drop(&self, x: &[f64], improved: bool, delta: f64) -> usize {
        let w = self.w(x);
        let hw = self.h_times(&w);
        let beta = 0.5 * dot(x, x).powi(2) - dot(&w, &hw);
        let mut best = (self.kopt, f64::NEG_INFINITY);
        for k in 0..self.m {
            if k == self.kopt && !improved {
                continue;
            }
            let denominator = (self.h[k][k] * beta + hw[k] * hw[k]).abs();
            let distance = dot(&sub(&self.points[k], self.opt()), &sub(&self.points[k], self.opt()));
            let score = denominator * (distance / (delta * delta)).max(1.0).powi(2);
            if score > best.1 {
                best = (k, score);
            }
        }
        best.0
    }

    /// Swaps point `t` for `x` with value `f`. Returns `None` if the
    /// interpolation system became singular.
    fn replace(&mut self, t: usize, x: Vec<f64>, f: f64) -> Option<()> {
        let residual = f - self.value(&x);
        let w = self.w(&x);
        let hw = self.h_times(&w);
        let alpha = self.h[t][t];
        let tau = hw[t];
        let beta = 0.5 * dot(&x, &x).powi(2) - dot(&w, &hw);
        let sigma = alpha * beta + tau * tau;
        self.fold(t);
        self.points[t] = x;
        self.values[t] = f;
        if f < self.f_opt() || t == self.kopt {
            self.kopt = argmin(&self.values).expect("points");
        }
        if sigma.abs() <= 1e-10 * (alpha.abs() * beta.abs() + tau * tau) || self.updates >= self.m {
            return self.refactor();
        }
        let het = self.h[t].clone();
        let mut u: Vec<f64> = hw.iter().map(|v| -v).collect();
        u[t] += 1.0;
        for (i, row) in self.h.iter_mut().enumerate() {
            for (j, hij) in row.iter_mut().enumerate() {
                *hij += (alpha * u[i] * u[j] - beta * het[i] * het[j] + tau * (het[i] * u[j] + u[i] * het[j])) / sigma;
            }
        }
        self.updates += 1;
        self.add_lagrange(t, residual);
        Some(())
    }

    /// Moves the origin to the best point to keep the KKT system well scaled.
    fn shift(&mut self) -> Option<()> {
        let s = self.opt().to_vec();
        for j in 0..self.m {
            self.fold(j);
        }
        self.gradient = self.gradient_at(&s);
        self.constant = self.value(&s);
        for (o, si) in self.origin.iter_mut().zip(&s) {
            *o += si;
        }
        for v in &mut self.points {
            for (vi, si) in v.iter_mut().zip(&s) {
                *vi -= si;
            }
        }
        self.refactor()
    }

    fn absolute(&self, x: &[f64]) -> Vec<f64> {
        self.origin.iter().zip(x).map(|(o, d)| o + d).collect()
    }

    fn farthest(&self) -> (usize, f64) {
        let opt = self.opt();
        self.points
            .iter()
            .map(|v| norm(&sub(v, opt)))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (k, d)| if d > a.1 { (k, d) } else { a })
    }

    /// Approximately minimizes the model within `delta` of the best point
    /// by truncated conjugate gradients.
    fn trust_step(&self, delta: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.n;
        let g = self.gradient_at(self.opt());
        let gnorm = norm(&g);
        let mut d = vec![0.0; n];
        if gnorm == 0.0 || !gnorm.is_finite() {
            // Stationary model: leave along a random direction if it curves down.
            let mut p: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let pn = norm(&p);
            p.iter_mut().for_each(|x| *x *= delta / pn);
            if dot(&p, &self.hess_vec(&p)) < 0.0 {
                return p;
            }
            return d;
        }
        let mut r = g;
        let mut p: Vec<f64> = r.iter().map(|x| -x).collect();
        let mut rr = dot(&r, &r);
        for _ in 0..2 * n {
            let bp = self.hess_vec(&p);
            let kappa = dot(&p, &bp);
            let to_boundary = |d: &[f64], p: &[f64]| {
                let (a, b, c) = (dot(p, p), 2.0 * dot(d, p), dot(d, d) - delta * delta);
                (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a)
            };
            if kappa <= 0.0 {
                let tau = to_boundary(&d, &p);
                return d.iter().zip(&p).map(|(x, y)| x + tau * y).collect();
            }
            let alpha = rr / kappa;
            let next: Vec<f64> = d.iter().zip(&p).map(|(x, y)| x + alpha * y).collect();
            if norm(&next) >= delta {
                let tau = to_boundary(&d, &p);
                return d.iter().zip(&p).map(|(x, y)| x + tau * y).collect();
            }
            d = next;
            for (ri, bi) in r.iter_mut().zip(&bp) {
                *ri += alpha * bi;
            }
            let rr_next = dot(&r, &r);
            if rr_next.sqrt() <= 1e-10 * gnorm {
                break;
            }
            let beta = rr_next / rr;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = -ri + beta * *pi;
            }
            rr = rr_next;
        }
        d
    }
}

/// Evaluates the initial `2n + 1` point design around `center`.
fn design<F>(
    search: &mut Search<F>,
    center: &[f64],
    f_center: f64,
    rho: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Model>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = center.len();
    let mut points = vec![vec![0.0; n]];
    let mut values = vec![f_center];
    for i in 0..n {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let mut first = vec![0.0; n];
        first[i] = sign * rho;
        if search.exhausted() {
            return None;
        }
        let f1 = search.eval(&offset(center, &first));
        // Continue downhill if the first probe improved, otherwise look back.
        let mut second = vec![0.0; n];
        second[i] = if f1 < f_center { 2.0 * sign * rho } else { -sign * rho };
        if search.exhausted() {
            return None;
        }
        let f2 = search.eval(&offset(center, &second));
        points.push(first);
        values.push(f1);
        points.push(second);
        values.push(f2);
    }
    Model::new(center.to_vec(), points, values)
}

fn offset(x: &[f64], d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + b).collect()
}

/// Runs from `x0`, whose value is already `search`'s first evaluation.
pub(super) fn minimize<F>(search: &mut Search<F>, x0: &[f64], f0: f64, config: &OptimizerConfig, rng: &mut ChaCha8Rng)
where
    F: FnMut(&[f64]) -> f64,
{
    let mut rho = config.rho_start;
    let mut delta = rho;
    let Some(mut model) = design(search, x0, f0, rho, rng) else {
        return;
    };

    // Shrinks `rho` on NEWUOA's schedule; false once `rho_end` is done.
    let reduce = |rho: &mut f64, delta: &mut f64| {
        if *rho <= config.rho_end {
            return false;
        }
        let ratio = *rho / config.rho_end;
        let next = if ratio > 250.0 {
            0.1 * *rho
        } else if ratio > 16.0 {
            (*rho * config.rho_end).sqrt()
        } else {
            config.rho_end
        };
        *delta = (0.5 * *rho).max(next);
        *rho = next;
        true
    };

    while !search.exhausted() {
        let d = model.trust_step(delta, rng);
        let dnorm = norm(&d);
        let opt = model.opt().to_vec();
        let x = offset(&opt, &d);
        let predicted = model.value(&opt) - model.value(&x);

        let mut poor = true;
        let mut step_taken = false;
        if dnorm >= 0.5 * rho && predicted > 0.0 {
            step_taken = true;
            if dot(&d, &d) <= 1e-3 * dot(&opt, &opt) && model.shift().is_none() {
                break;
            }
            let opt = model.opt().to_vec();
            let x = offset(&opt, &d);
            let f_opt = model.f_opt();
            let f = search.eval(&model.absolute(&x));
            let ratio = (f_opt - f) / predicted;
            delta = if ratio <= 0.1 {
                0.5 * dnorm
            } else if ratio <= 0.7 {
                (0.5 * delta).max(dnorm)
            } else {
                (0.5 * delta).max(2.0 * dnorm)
            };
            if delta <= 1.5 * rho {
                delta = rho;
            }
            poor = ratio < 0.1;
            let t = model.choose_drop(&x, f < f_opt, delta);
            if model.replace(t, x, f).is_none() {
                break;
            }
        }
        if !poor || search.exhausted() {
            continue;
        }

        // Poor or no step: fix a far point first, then refine the resolution.
        let (far, distance) = model.farthest();
        let limit = if step_taken { 2.0 * delta } else { 2.0 * rho };
        if distance > limit {
            let radius = (0.1 * distance).min(0.5 * delta).max(rho);
            let opt = model.opt().to_vec();
            let toward: Vec<f64> = sub(&model.points[far], &opt);
            let mut best: Option<(Vec<f64>, f64)> = None;
            for direction in [model.lagrange_gradient(far, &opt), toward] {
                let length = norm(&direction);
                if length == 0.0 || !length.is_finite() {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    let candidate: Vec<f64> =
                        opt.iter().zip(&direction).map(|(o, v)| o + sign * radius * v / length).collect();
                    let size = model.lagrange(far, &candidate).abs();
                    if best.as_ref().is_none_or(|b| size > b.1) {
                        best = Some((candidate, size));
                    }
                }
            }
            let Some((x, _)) = best else { break };
            let f = search.eval(&model.absolute(&x));
            if model.replace(far, x, f).is_none() {
                break;
            }
        } else if (!step_taken || delta.max(dnorm) <= rho) && !reduce(&mut rho, &mut delta) {
            break;
        }
    }
}
