//! Variational ground-state search: an identity-at-zero layered ansatz,
//! exact state-vector energies and the derivative-free [`optimize`] loop.

mod optimizer;

pub use optimizer::{optimize, Method, OptimizationResult, OptimizerConfig};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::ising::IsingPolynomial;
use crate::quantum::{build_mubs_3q, embed_state, expectation_with_diagonal, Gate, QuantumState, BASIS_COUNT, BASIS_SIZE};

/// Relative tolerance used to call a run converged.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_LAYERS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// `Rzz` on neighbours `(q, q + 1)`.
    LinearRzz,
    /// Linear plus the closing pair `(n - 1, 0)` when `n > 2`.
    RingRzz,
}

impl Entangler {
    pub fn as_str(self) -> &'static str {
        match self {
            Entangler::LinearRzz => "linear_rzz",
            Entangler::RingRzz => "ring_rzz",
        }
    }
}

impl FromStr for Entangler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear_rzz" | "linear" => Ok(Entangler::LinearRzz),
            "ring_rzz" | "ring" => Ok(Entangler::RingRzz),
            other => Err(Error::Validation(format!("unknown entangler `{other}`"))),
        }
    }
}

/// Layers of `Ry Rz` on every qubit followed by `Rzz` entanglers, closed by
/// one more `Ry Rz` layer. Every gate is `exp(-i theta G / 2)`, so all-zero
/// parameters give the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub qubits: usize,
    pub layers: usize,
    pub entangler: Entangler,
}

impl AnsatzConfig {
    pub fn new(qubits: usize, layers: usize, entangler: Entangler) -> Result<Self> {
        if qubits == 0 || layers == 0 {
            return Err(Error::Validation("ansatz needs at least one qubit and one layer".into()));
        }
        Ok(AnsatzConfig {
            qubits,
            layers,
            entangler,
        })
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.qubits;
        let mut pairs: Vec<_> = (0..n.saturating_sub(1)).map(|q| (q, q + 1)).collect();
        if self.entangler == Entangler::RingRzz && n > 2 {
            pairs.push((n - 1, 0));
        }
        pairs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers * (2 * self.qubits + self.pairs().len()) + 2 * self.qubits
    }

    /// Applies the circuit to `state` in place.
    pub fn apply(&self, state: &mut QuantumState, parameters: &[f64]) -> Result<()> {
        if state.qubit_count() != self.qubits || parameters.len() != self.parameter_count() {
            return Err(Error::Validation(format!(
                "ansatz expects {} qubits and {} parameters, got {} and {}",
                self.qubits,
                self.parameter_count(),
                state.qubit_count(),
                parameters.len()
            )));
        }
        self.apply_unchecked(state, parameters);
        Ok(())
    }

    fn apply_unchecked(&self, state: &mut QuantumState, parameters: &[f64]) {
        let pairs = self.pairs();
        let mut theta = parameters.iter().copied();
        let rotations = |state: &mut QuantumState, theta: &mut dyn Iterator<Item = f64>| {
            for q in 0..self.qubits {
                state.apply_unchecked(Gate::Ry(q, theta.next().expect("parameter")));
                state.apply_unchecked(Gate::Rz(q, theta.next().expect("parameter")));
            }
        };
        for _ in 0..self.layers {
            rotations(state, &mut theta);
            for &(a, b) in &pairs {
                state.apply_unchecked(Gate::Rzz(a, b, theta.next().expect("parameter")));
            }
        }
        rotations(state, &mut theta);
    }
}

/// Where a VQE run starts before the ansatz is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Zeros,
    /// Haar-random single-qubit states, one per qubit, drawn from `seed`.
    Random { seed: u64 },
    /// A 3-qubit MUB state on `positions`, other qubits `|0>`.
    Mub {
        basis: usize,
        element: usize,
        positions: [usize; 3],
    },
}

impl InitialState {
    pub fn prepare(&self, n: usize) -> Result<QuantumState> {
        match *self {
            InitialState::Zeros => QuantumState::zeros(n),
            InitialState::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut state = QuantumState::zeros(n)?;
                for q in 0..n {
                    // Polar angle with cos uniform in [-1, 1] covers the Bloch sphere evenly.
                    let alpha = (1.0 - 2.0 * rng.random::<f64>()).acos();
                    let beta = 2.0 * PI * rng.random::<f64>();
                    state.apply(Gate::Ry(q, alpha))?;
                    state.apply(Gate::Rz(q, beta))?;
                }
                Ok(state)
            }
            InitialState::Mub {
                basis,
                element,
                positions,
            } => {
                if basis >= BASIS_COUNT || element >= BASIS_SIZE {
                    return Err(Error::Validation(format!("no MUB state ({basis}, {element})")));
                }
                embed_state(build_mubs_3q().state(basis, element), positions, n)
            }
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Zeros => write!(f, "zeros"),
            InitialState::Random { seed } => write!(f, "random(seed={seed})"),
            InitialState::Mub {
                basis,
                element,
                positions,
            } => write!(f, "mub(basis={basis}, element={element}, positions={positions:?})"),
        }
    }
}

/// Known ground energy and the relative tolerance for calling a run converged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub energy: f64,
    pub tolerance: f64,
}

impl Target {
    pub fn new(energy: f64) -> Self {
        Target {
            energy,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// `|e - energy| <= tolerance * max(1, |energy|)`
    pub fn reached(&self, e: f64) -> bool {
        (e - self.energy).abs() <= self.tolerance * self.energy.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeTrace {
    pub init: InitialState,
    pub seed: u64,
    /// Best energy after each objective evaluation; entry 0 is the initial state's energy.
    pub energies: Vec<f64>,
    pub final_energy: f64,
    pub final_parameters: Vec<f64>,
    /// Most probable measurement outcome of the final state.
    pub best_bitstring: Bitstring,
    /// `None` when no target was supplied.
    pub converged: Option<bool>,
    /// Evaluations used before the best energy first met the target.
    pub iterations_to_convergence: Option<usize>,
}

impl VqeTrace {
    pub fn initial_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn evaluations(&self) -> usize {
        self.energies.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "init": self.init,
            "seed": self.seed,
            "energies": self.energies,
            "initial_energy": self.initial_energy(),
            "final_energy": self.final_energy,
            "evaluations": self.evaluations(),
            "converged": self.converged,
            "iterations_to_convergence": self.iterations_to_convergence,
            "best_bitstring": self.best_bitstring.to_string(),
            "final_parameters": self.final_parameters,
        })
    }
}

/// Runs VQE on the diagonal Hamiltonian `ising` from `init`, starting at all-zero parameters.
pub fn run_vqe(
    ising: &IsingPolynomial,
    init: &InitialState,
    ansatz: &AnsatzConfig,
    config: &OptimizerConfig,
    seed: u64,
    target: Option<Target>,
) -> Result<VqeTrace> {
    let n = ising.variable_count();
    if ansatz.qubits != n {
        return Err(Error::Validation(format!(
            "ansatz has {} qubits, Hamiltonian has {n} spins",
            ansatz.qubits
        )));
    }
    let diagonal = ising.diagonal(crate::quantum::MAX_QUBITS)?;
    let initial = init.prepare(n)?;
    let state_at = |theta: &[f64]| {
        let mut state = initial.clone();
        ansatz.apply_unchecked(&mut state, theta);
        state
    };
    let result = optimize(
        |theta| expectation_with_diagonal(&diagonal, &state_at(theta)),
        &vec![0.0; ansatz.parameter_count()],
        config,
        seed,
    );
    let final_state = state_at(&result.best_parameters);
    let converged = target.map(|t| t.reached(result.best_value));
    let iterations_to_convergence =
        target.and_then(|t| result.history.iter().position(|&e| t.reached(e)));
    Ok(VqeTrace {
        init: *init,
        seed,
        final_energy: result.best_value,
        best_bitstring: Bitstring::from_index(final_state.most_probable(), n),
        final_parameters: result.best_parameters,
        energies: result.history,
        converged,
        iterations_to_convergence,
    })
}
