//! Partial DQES: score every 3-qubit MUB state embedded on every choice of
//! three qubits (the rest `|0>`), then start VQE from the lowest-energy ones
//! and compare against random and all-zero starts.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::encoder::{encode_efficient, Layout};
use crate::error::{Error, Result};
use crate::graph::ProblemInstance;
use crate::ising::{to_ising, IsingPolynomial};
use crate::oracle::{solve_exact_tsp, validate_bitstring, Decoding};
use crate::quantum::{build_mubs_3q, embed_index, MAX_QUBITS};
use crate::rational::{self, Rational};
use crate::vqe::{run_vqe, AnsatzConfig, Entangler, InitialState, OptimizerConfig, Target, VqeTrace};
use crate::vqe::{DEFAULT_LAYERS, DEFAULT_TOLERANCE};

/// Energies closer than this share a rank.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeRecord {
    pub positions: [usize; 3],
    pub basis: usize,
    pub element: usize,
    pub energy: f64,
    /// Dense rank by energy, 1 for the lowest.
    pub rank: usize,
}

impl LandscapeRecord {
    pub fn initial_state(&self) -> InitialState {
        InitialState::Mub {
            basis: self.basis,
            element: self.element,
            positions: self.positions,
        }
    }
}

/// Energies of all `C(n, 3) * 72` embedded MUB states, ordered by
/// positions (lexicographic), then basis, then element.
pub fn compute_landscape(ising: &IsingPolynomial) -> Result<Vec<LandscapeRecord>> {
    let n = ising.variable_count();
    if n < 3 {
        return Err(Error::Precondition(format!("landscape needs at least 3 qubits, got {n}")));
    }
    let diagonal = ising.diagonal(MAX_QUBITS)?;
    let library = build_mubs_3q();
    let placements: Vec<[usize; 3]> = (0..n).combinations(3).map(|c| [c[0], c[1], c[2]]).collect();
    let mut records: Vec<LandscapeRecord> = placements
        .par_iter()
        .flat_map_iter(|&positions| {
            let diagonal = &diagonal;
            library.iter().map(move |(basis, element, state)| {
                // The embedded state has support on 8 basis states only.
                let energy = state
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(local, a)| a.norm_sqr() * diagonal[embed_index(local, positions)])
                    .sum();
                LandscapeRecord {
                    positions,
                    basis,
                    element,
                    energy,
                    rank: 0,
                }
            })
        })
        .collect();

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].energy.total_cmp(&records[b].energy));
    let mut rank = 0;
    let mut anchor = f64::NEG_INFINITY;
    for i in order {
        if records[i].energy - anchor > RANK_TOLERANCE {
            rank += 1;
            anchor = records[i].energy;
        }
        records[i].rank = rank;
    }
    Ok(records)
}

/// The `k` lowest-energy records; equal energies keep landscape order.
pub fn best_k(records: &[LandscapeRecord], k: usize) -> Result<Vec<LandscapeRecord>> {
    if k == 0 || k > records.len() {
        return Err(Error::Validation(format!("k must be in 1..={}, got {k}", records.len())));
    }
    let mut sorted: Vec<&LandscapeRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(sorted.into_iter().take(k).cloned().collect())
}

/// `index,positions,basis,element,energy`, positions joined by `-`.
pub fn landscape_csv(records: &[LandscapeRecord]) -> String {
    let mut out = String::from("index,positions,basis,element,energy\n");
    for (i, r) in records.iter().enumerate() {
        let [a, b, c] = r.positions;
        out.push_str(&format!("{i},{a}-{b}-{c},{},{},{}\n", r.basis, r.element, r.energy));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentMode {
    Zeros,
    BestMubs { k: usize },
    Random { k: usize },
}

impl fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentMode::Zeros => f.write_str("zeros"),
            ExperimentMode::BestMubs { k } => write!(f, "best-mubs:{k}"),
            ExperimentMode::Random { k } => write!(f, "random:{k}"),
        }
    }
}

impl FromStr for ExperimentMode {
    type Err = Error;

    /// Accepts `zeros`, `best-mubs:K` and `random:K` (`_` or a space may replace `-`/`:`).
    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('_', "-");
        let (name, k) = match normalized.split_once([':', ' ', '=']) {
            Some((name, k)) => (name.trim(), Some(k.trim())),
            None => (normalized.as_str(), None),
        };
        let count = |k: Option<&str>| -> Result<usize> {
            let k = k.ok_or_else(|| Error::Validation(format!("`{name}` needs a run count, e.g. `{name}:10`")))?;
            match k.parse::<usize>() {
                Ok(k) if k > 0 => Ok(k),
                _ => Err(Error::Validation(format!("run count must be a positive integer, got `{k}`"))),
            }
        };
        match name {
            "zeros" if k.is_none() => Ok(ExperimentMode::Zeros),
            "best-mubs" | "mubs" => Ok(ExperimentMode::BestMubs { k: count(k)? }),
            "random" => Ok(ExperimentMode::Random { k: count(k)? }),
            _ => Err(Error::Validation(format!("unknown initialization `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub layers: usize,
    pub entangler: Entangler,
    pub optimizer: OptimizerConfig,
    /// Relative tolerance against `B * C_opt` for calling a run converged.
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            layers: DEFAULT_LAYERS,
            entangler: Entangler::LinearRzz,
            optimizer: OptimizerConfig::vqe(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trace: VqeTrace,
    /// The final most probable bitstring read as a tour.
    pub decoding: Decoding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub mode: ExperimentMode,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub qubits: usize,
    pub optimal_cost: Rational,
    /// `B * C_opt`, the energy a converged run must reach.
    pub target_energy: f64,
    pub runs: Vec<RunReport>,
}

impl ExperimentReport {
    pub fn converged_count(&self) -> usize {
        self.runs.iter().filter(|r| r.trace.converged == Some(true)).count()
    }

    /// Mean evaluations to convergence over converged runs.
    pub fn mean_iterations_to_convergence(&self) -> Option<f64> {
        let hits: Vec<usize> = self.runs.iter().filter_map(|r| r.trace.iterations_to_convergence).collect();
        (!hits.is_empty()).then(|| hits.iter().sum::<usize>() as f64 / hits.len() as f64)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mode": self.mode,
            "seed": self.seed,
            "config": self.config,
            "qubits": self.qubits,
            "optimal_cost": rational::to_json(&self.optimal_cost),
            "target_energy": self.target_energy,
            "runs_total": self.runs.len(),
            "converged_count": self.converged_count(),
            "mean_iterations_to_convergence": self.mean_iterations_to_convergence(),
            "runs": self.runs.iter().map(|r| {
                let mut trace = r.trace.to_json();
                trace["decoded"] = r.decoding.to_json();
                trace
            }).collect::<Vec<_>>(),
        })
    }
}

/// Encodes `instance` with the efficient layout and runs a VQE batch.
/// Run `i` uses optimizer seed `seed + i`; random starts draw their state
/// from the same seed.
pub fn run_experiment(
    instance: &ProblemInstance,
    mode: ExperimentMode,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    let ising = to_ising(&encode_efficient(instance)?);
    let n = ising.variable_count();
    let optimal_cost = solve_exact_tsp(instance)?
        .optimal_cost
        .ok_or_else(|| Error::Validation("instance has no valid tour".into()))?;
    let target_energy = rational::to_f64(&(instance.penalty_b() * optimal_cost));
    let ansatz = AnsatzConfig::new(n, config.layers, config.entangler)?;

    let inits: Vec<InitialState> = match mode {
        ExperimentMode::Zeros => vec![InitialState::Zeros],
        ExperimentMode::BestMubs { k } => best_k(&compute_landscape(&ising)?, k)?
            .iter()
            .map(LandscapeRecord::initial_state)
            .collect(),
        ExperimentMode::Random { k } => (0..k as u64)
            .map(|i| InitialState::Random {
                seed: seed.wrapping_add(i),
            })
            .collect(),
    };
    let target = Target {
        energy: target_energy,
        tolerance: config.tolerance,
    };
    let runs = inits
        .par_iter()
        .enumerate()
        .map(|(i, init)| {
            let trace = run_vqe(&ising, init, &ansatz, &config.optimizer, seed.wrapping_add(i as u64), Some(target))?;
            let decoding = validate_bitstring(instance, Layout::Efficient, &trace.best_bitstring)?;
            Ok(RunReport { trace, decoding })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        mode,
        seed,
        config: *config,
        qubits: n,
        optimal_cost,
        target_energy,
        runs,
    })
}
