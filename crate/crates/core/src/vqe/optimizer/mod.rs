//! Derivative-free local minimization under a trust radius `rho` that
//! shrinks from `rho_start` to `rho_end`.

mod linear;
mod quadratic;
mod sinusoidal;

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Quadratic interpolation models on `2n + 1` points, updated by least
    /// Frobenius-norm change of the Hessian (NEWUOA-style).
    Quadratic,
    /// Linear interpolation on an `n + 1` point simplex (COBYLA-style).
    Linear,
    /// Exact minimization along one coordinate at a time, assuming every
    /// coordinate slice is `a + b cos t + c sin t` (true for rotation-gate
    /// circuit parameters). Not meaningful for other objectives.
    Sinusoidal,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quadratic => "quadratic",
            Method::Linear => "linear",
            Method::Sinusoidal => "sinusoidal",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Method::Quadratic),
            "linear" => Ok(Method::Linear),
            "sinusoidal" => Ok(Method::Sinusoidal),
            other => Err(Error::Validation(format!("unknown optimizer method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub rho_start: f64,
    pub rho_end: f64,
    pub max_evaluations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Quadratic,
            rho_start: 0.5,
            rho_end: 1e-4,
            max_evaluations: 2000,
        }
    }
}

impl OptimizerConfig {
    /// Defaults for ansatz parameters: the budget and radii of [`Default`]
    /// with [`Method::Sinusoidal`].
    pub fn vqe() -> Self {
        OptimizerConfig {
            method: Method::Sinusoidal,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_parameters: Vec<f64>,
    pub best_value: f64,
    /// Best value seen after each evaluation; the first entry is `f(x0)`.
    pub history: Vec<f64>,
}

impl OptimizationResult {
    pub fn evaluations(&self) -> usize {
        self.history.len()
    }
}

/// Counts evaluations and tracks the best point seen.
pub(super) struct Search<F> {
    objective: F,
    budget: usize,
    history: Vec<f64>,
    best: f64,
    best_x: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Search<F> {
    pub(super) fn exhausted(&self) -> bool {
        self.history.len() >= self.budget
    }

    pub(super) fn budget_left(&self) -> usize {
        self.budget.saturating_sub(self.history.len())
    }

    pub(super) fn eval(&mut self, x: &[f64]) -> f64 {
        let value = (self.objective)(x);
        // NaN never improves the best value, so history stays monotone.
        if self.history.is_empty() || value < self.best {
            self.best = value;
            self.best_x = x.to_vec();
        }
        self.history.push(self.best);
        value
    }
}

/// Minimizes `objective` from `x0` within `config.max_evaluations` calls.
/// The seed only orients the initial design, so results are reproducible per seed.
pub fn optimize<F>(objective: F, x0: &[f64], config: &OptimizerConfig, seed: u64) -> OptimizationResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut search = Search {
        objective,
        budget: config.max_evaluations.max(1),
        history: Vec::new(),
        best: f64::INFINITY,
        best_x: x0.to_vec(),
    };
    let f0 = search.eval(x0);
    if !x0.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match config.method {
            Method::Quadratic => quadratic::minimize(&mut search, x0, f0, config, &mut rng),
            Method::Linear => linear::minimize(&mut search, x0, f0, config, &mut rng),
            Method::Sinusoidal => sinusoidal::minimize(&mut search, x0, f0, config, &mut rng),
        }
    }
    OptimizationResult {
        best_parameters: search.best_x,
        best_value: search.best,
        history: search.history,
    }
}

pub(super) fn argmin(values: &[f64]) -> Option<usize> {
    // First index wins ties so the choice is stable.
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

pub(super) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gauss–Jordan inverse with partial pivoting; `None` when numerically singular.
pub(super) fn invert(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = rows.len();
    let scale = rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let factor = a[i][col];
                if factor != 0.0 {
                    for j in 0..n {
                        a[i][j] -= factor * a[col][j];
                        inv[i][j] -= factor * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}
