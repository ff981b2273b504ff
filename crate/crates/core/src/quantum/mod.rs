//! Dense state-vector simulation, 3-qubit mutually unbiased bases and
//! expectation values of diagonal Ising Hamiltonians.

mod mub;

pub use mub::{build_mubs_3q, MubBasis, MubLibrary, Pauli, BASIS_COUNT, BASIS_SIZE};

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ising::IsingPolynomial;

/// Largest qubit count a dense state may have.
pub const MAX_QUBITS: usize = 24;

/// Allowed deviation of a state's squared norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Unit-norm amplitude vector over `n` qubits; bit `i` of an index is qubit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "state vector",
            size: n,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

impl QuantumState {
    /// `|0...0>` on `n` qubits.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        check_qubits(n)?;
        if index >> n != 0 {
            return Err(Error::Validation(format!("basis index {index} needs more than {n} qubits")));
        }
        let mut amplitudes = vec![ZERO; 1 << n];
        amplitudes[index as usize] = ONE;
        Ok(QuantumState { n, amplitudes })
    }

    /// Wraps `amplitudes`, whose length must be a power of two and whose norm must be 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::Validation(format!(
                "{} amplitudes is not a power of two",
                amplitudes.len()
            )));
        }
        let n = amplitudes.len().trailing_zeros() as usize;
        check_qubits(n)?;
        let state = QuantumState { n, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(state)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amplitudes[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        assert_eq!(self.n, other.n, "inner product of states of different sizes");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &QuantumState) -> f64 {
        assert_eq!(self.n, other.n, "distance between states of different sizes");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// Number of amplitudes that are exactly nonzero.
    pub fn support_size(&self) -> usize {
        self.amplitudes.iter().filter(|a| **a != ZERO).count()
    }

    /// Basis index with the largest probability; ties go to the lowest index.
    pub fn most_probable(&self) -> u64 {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > best.1 {
                best = (i, p);
            }
        }
        best.0 as u64
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: Gate) {
        let amps = &mut self.amplitudes;
        match gate {
            Gate::H(q) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                apply_1q(amps, q, [[h, h], [h, -h]]);
            }
            Gate::S(q) => phase_1q(amps, q, ONE, Complex64::i()),
            Gate::X(q) => {
                let bit = 1 << q;
                for i in 0..amps.len() {
                    if i & bit == 0 {
                        amps.swap(i, i | bit);
                    }
                }
            }
            Gate::Ry(q, theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
                apply_1q(amps, q, [[c, -s], [s, c]]);
            }
            Gate::Rz(q, theta) => {
                let minus = Complex64::from_polar(1.0, -theta / 2.0);
                phase_1q(amps, q, minus, minus.conj());
            }
            Gate::Cx(control, target) => {
                let (c, t) = (1 << control, 1 << target);
                for i in 0..amps.len() {
                    if i & c != 0 && i & t == 0 {
                        amps.swap(i, i | t);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let mask = (1 << a) | (1 << b);
                for (i, amp) in amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Rzz(a, b, theta) => {
                let same = Complex64::from_polar(1.0, -theta / 2.0);
                let differ = same.conj();
                let (a, b) = (1 << a, 1 << b);
                for (i, amp) in amps.iter_mut().enumerate() {
                    *amp *= if (i & a == 0) == (i & b == 0) { same } else { differ };
                }
            }
        }
    }
}

fn apply_1q(amps: &mut [Complex64], q: usize, m: [[Complex64; 2]; 2]) {
    let bit = 1 << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn phase_1q(amps: &mut [Complex64], q: usize, p0: Complex64, p1: Complex64) {
    let bit = 1 << q;
    for (i, amp) in amps.iter_mut().enumerate() {
        *amp *= if i & bit == 0 { p0 } else { p1 };
    }
}

/// Gates of the simulator. Rotations are `exp(-i theta G / 2)` for `G` in
/// `{Y, Z, Z⊗Z}`, so every rotation is the identity at `theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    /// `(control, target)`
    Cx(usize, usize),
    Cz(usize, usize),
    Ry(usize, f64),
    Rz(usize, f64),
    Rzz(usize, usize, f64),
}

impl Gate {
    fn check(&self, n: usize) -> Result<()> {
        let (qubits, two): ([usize; 2], bool) = match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Ry(q, _) | Gate::Rz(q, _) => ([q, q], false),
            Gate::Cx(a, b) | Gate::Cz(a, b) | Gate::Rzz(a, b, _) => ([a, b], true),
        };
        if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
            return Err(Error::Validation(format!("qubit {q} out of range for {n} qubits")));
        }
        if two && qubits[0] == qubits[1] {
            return Err(Error::Validation(format!(
                "two-qubit gate on repeated qubit {}",
                qubits[0]
            )));
        }
        Ok(())
    }
}

/// Returns `gate` applied to a copy of `state`.
pub fn apply_gate(state: &QuantumState, gate: Gate) -> Result<QuantumState> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Places the 3-qubit `local` state on `positions` of an `n`-qubit register
/// whose other qubits are `|0>`. Bit `k` of a local index maps to qubit `positions[k]`.
pub fn embed_state(local: &QuantumState, positions: [usize; 3], n: usize) -> Result<QuantumState> {
    if local.qubit_count() != 3 {
        return Err(Error::Validation(format!(
            "embedded state must have 3 qubits, got {}",
            local.qubit_count()
        )));
    }
    check_qubits(n)?;
    if let Some(&p) = positions.iter().find(|&&p| p >= n) {
        return Err(Error::Validation(format!("position {p} out of range for {n} qubits")));
    }
    if positions[0] == positions[1] || positions[0] == positions[2] || positions[1] == positions[2] {
        return Err(Error::Validation(format!("positions {positions:?} are not distinct")));
    }
    let mut amplitudes = vec![ZERO; 1 << n];
    for (local_index, &amp) in local.amplitudes().iter().enumerate() {
        amplitudes[embed_index(local_index, positions)] = amp;
    }
    Ok(QuantumState { n, amplitudes })
}

pub(crate) fn embed_index(local_index: usize, positions: [usize; 3]) -> usize {
    (0..3)
        .filter(|k| local_index >> k & 1 == 1)
        .map(|k| 1 << positions[k])
        .sum()
}

/// `<state| H |state>` for the diagonal Hamiltonian `ising`.
///
/// Basis energies are exact; only the probability-weighted sum is floating point.
pub fn expectation(ising: &IsingPolynomial, state: &QuantumState) -> Result<f64> {
    if ising.variable_count() != state.qubit_count() {
        return Err(Error::Validation(format!(
            "Hamiltonian has {} spins, state has {} qubits",
            ising.variable_count(),
            state.qubit_count()
        )));
    }
    let compiled = ising.compile();
    let scale = compiled.scale() as f64;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != ZERO)
        .map(|(z, a)| a.norm_sqr() * (compiled.scaled_value(z as u64) as f64 / scale))
        .sum())
}

/// Expectation against a precomputed diagonal, as returned by [`IsingPolynomial::diagonal`].
pub fn expectation_with_diagonal(diagonal: &[f64], state: &QuantumState) -> f64 {
    assert_eq!(diagonal.len(), state.amplitudes.len(), "diagonal size mismatch");
    state
        .amplitudes
        .iter()
        .zip(diagonal)
        .map(|(a, e)| a.norm_sqr() * e)
        .sum()
}
