use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::QuantumState;
use crate::error::{Error, Result};

pub const BASIS_COUNT: usize = 9;
pub const BASIS_SIZE: usize = 8;

const CLASS_TABLE: &str = include_str!("../../data/mub_classes_3q.txt");

/// A tensor product of single-qubit Pauli operators; character `j` acts on qubit `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pauli(Vec<u8>);

impl Pauli {
    pub fn qubit_count(&self) -> usize {
        self.0.len()
    }

    /// `P |psi>` for a state vector over `qubit_count()` qubits.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(amplitudes.len(), 1 << self.0.len(), "Pauli size mismatch");
        let mut flip = 0usize;
        for (j, &op) in self.0.iter().enumerate() {
            if op == b'X' || op == b'Y' {
                flip |= 1 << j;
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); amplitudes.len()];
        for (z, &amp) in amplitudes.iter().enumerate() {
            // Phase picked up by |z> under each factor: Z|1> = -|1>, Y|0> = i|1>, Y|1> = -i|0>.
            let mut phase = Complex64::new(1.0, 0.0);
            for (j, &op) in self.0.iter().enumerate() {
                let one = z >> j & 1 == 1;
                match (op, one) {
                    (b'Z', true) => phase = -phase,
                    (b'Y', false) => phase *= Complex64::i(),
                    (b'Y', true) => phase *= -Complex64::i(),
                    _ => {}
                }
            }
            out[z ^ flip] += phase * amp;
        }
        out
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || !s.bytes().all(|c| b"IXYZ".contains(&c)) {
            return Err(Error::Validation(format!("`{s}` is not a Pauli string")));
        }
        Ok(Pauli(s.as_bytes().to_vec()))
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(std::str::from_utf8(&self.0).expect("ASCII Pauli string"))
    }
}

/// One basis: the joint eigenbasis of a maximal commuting class of 7 Paulis.
#[derive(Debug, Clone)]
pub struct MubBasis {
    class: Vec<Pauli>,
    states: Vec<QuantumState>,
}

impl MubBasis {
    /// The 7 commuting Paulis; the first three are the generators.
    pub fn class(&self) -> &[Pauli] {
        &self.class
    }

    /// Class written as space-separated Pauli strings.
    pub fn label(&self) -> String {
        self.class.iter().map(Pauli::to_string).collect::<Vec<_>>().join(" ")
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn state(&self, element: usize) -> &QuantumState {
        &self.states[element]
    }
}

/// The 9 mutually unbiased bases of 3 qubits, 8 states each.
#[derive(Debug, Clone)]
pub struct MubLibrary {
    bases: Vec<MubBasis>,
}

impl MubLibrary {
    pub fn bases(&self) -> &[MubBasis] {
        &self.bases
    }

    pub fn basis(&self, basis: usize) -> &MubBasis {
        &self.bases[basis]
    }

    pub fn state(&self, basis: usize, element: usize) -> &QuantumState {
        self.bases[basis].state(element)
    }

    /// `(basis, element, state)` in basis-then-element order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &QuantumState)> {
        self.bases
            .iter()
            .enumerate()
            .flat_map(|(b, basis)| basis.states.iter().enumerate().map(move |(e, s)| (b, e, s)))
    }
}

/// The shared library built from the shipped class table.
pub fn build_mubs_3q() -> &'static MubLibrary {
    static LIBRARY: OnceLock<MubLibrary> = OnceLock::new();
    LIBRARY.get_or_init(|| parse_library(CLASS_TABLE).expect("shipped MUB class table is valid"))
}

fn parse_library(text: &str) -> Result<MubLibrary> {
    let bases = text
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty() && !line.trim_start().starts_with('#'))
        .map(|(i, line)| {
            let class = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<Vec<Pauli>>>()
                .map_err(|e| Error::parse(format!("line {}", i + 1), e.to_string()))?;
            if class.len() != 7 || class.iter().any(|p| p.qubit_count() != 3) {
                return Err(Error::parse(
                    format!("line {}", i + 1),
                    "expected 7 three-qubit Pauli strings",
                ));
            }
            let states = (0..BASIS_SIZE)
                .map(|element| eigenstate(&class[..3], element))
                .collect::<Result<Vec<_>>>()?;
            Ok(MubBasis { class, states })
        })
        .collect::<Result<Vec<_>>>()?;
    if bases.len() != BASIS_COUNT {
        return Err(Error::parse("class table", format!("expected {BASIS_COUNT} classes, found {}", bases.len())));
    }
    Ok(MubLibrary { bases })
}

/// Joint eigenstate of `generators` with eigenvalue `-1` exactly for the set bits of `element`.
fn eigenstate(generators: &[Pauli], element: usize) -> Result<QuantumState> {
    let project = |v: Vec<Complex64>| {
        generators.iter().enumerate().fold(v, |v, (k, p)| {
            let sign = if element >> k & 1 == 1 { -1.0 } else { 1.0 };
            let pv = p.apply(&v);
            v.iter().zip(pv).map(|(a, b)| (a + b * sign) * 0.5).collect()
        })
    };
    for seed in 0..BASIS_SIZE {
        let mut v = vec![Complex64::new(0.0, 0.0); BASIS_SIZE];
        v[seed] = Complex64::new(1.0, 0.0);
        let v = project(v);
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        // Snap numerical noise so zero amplitudes are exactly zero and the
        // phase reference is the first genuinely nonzero amplitude.
        let v: Vec<Complex64> = v
            .into_iter()
            .map(|a| {
                let a = a / norm;
                Complex64::new(snap(a.re), snap(a.im))
            })
            .collect();
        let first = v.iter().find(|a| a.norm_sqr() > 0.0).copied().expect("nonzero vector");
        let phase = first.conj() / first.norm();
        let v: Vec<Complex64> = v.into_iter().map(|a| a * phase).collect();
        return QuantumState::from_amplitudes(v);
    }
    Err(Error::Precondition(format!("generators have no joint eigenstate for element {element}")))
}

fn snap(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}
