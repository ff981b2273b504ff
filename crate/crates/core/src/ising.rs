//! Spin form of the quadratic penalty Hamiltonians.
//!
//! Substituting `x = (1 - s) / 2` keeps every term, constant included, so
//! the Ising energy of a configuration equals the binary value exactly and
//! the ground energy of a safe TSP encoding is `B` times the optimal cost.
//! Spin `+1` is bit 0, matching the Pauli-Z eigenvalue of `|0>`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bits::Bitstring;
use crate::encoder::{Layout, PseudoBooleanPolynomial, VariableIndex};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Default limit on the number of spins [`IsingPolynomial::spectrum`] enumerates.
pub const DEFAULT_SPECTRUM_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsingPolynomial {
    layout: Layout,
    nodes: usize,
    constant: Rational,
    fields: BTreeMap<usize, Rational>,
    couplings: BTreeMap<(usize, usize), Rational>,
}

impl IsingPolynomial {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn variable_count(&self) -> usize {
        self.layout.variable_count(self.nodes)
    }

    pub fn variable_order(&self) -> Vec<VariableIndex> {
        self.layout.variable_order(self.nodes)
    }

    pub fn constant(&self) -> Rational {
        self.constant
    }

    pub fn fields(&self) -> impl Iterator<Item = (usize, Rational)> + '_ {
        self.fields.iter().map(|(&i, &h)| (i, h))
    }

    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), Rational)> + '_ {
        self.couplings.iter().map(|(&k, &j)| (k, j))
    }

    pub fn field(&self, i: usize) -> Rational {
        self.fields.get(&i).copied().unwrap_or_else(Rational::zero)
    }

    pub fn coupling(&self, i: usize, j: usize) -> Rational {
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or_else(Rational::zero)
    }

    /// Energy of the computational-basis state `bits`, with `s_i = 1 - 2 bit_i`.
    pub fn energy_of_bitstring(&self, bits: &Bitstring) -> Result<Rational> {
        if bits.len() != self.variable_count() {
            return Err(Error::Validation(format!(
                "bitstring has {} bits, Hamiltonian has {} spins",
                bits.len(),
                self.variable_count()
            )));
        }
        let spin = |i: usize| if bits.get(i) { -1 } else { 1 };
        let mut energy = self.constant;
        for (&i, &h) in &self.fields {
            energy += h * spin(i);
        }
        for (&(i, j), &c) in &self.couplings {
            energy += c * (spin(i) * spin(j));
        }
        Ok(energy)
    }

    /// Integer-scaled evaluator over basis-state indices. Panics above 64 spins.
    pub fn compile(&self) -> CompiledIsing {
        assert!(self.variable_count() <= 64, "compiled evaluation is limited to 64 spins");
        let scale = rational::common_denominator(
            std::iter::once(&self.constant)
                .chain(self.fields.values())
                .chain(self.couplings.values()),
        );
        CompiledIsing {
            scale,
            constant: rational::scaled(&self.constant, scale),
            fields: self
                .fields
                .iter()
                .map(|(&i, h)| (1u64 << i, rational::scaled(h, scale)))
                .collect(),
            couplings: self
                .couplings
                .iter()
                .map(|(&(i, j), c)| ((1u64 << i) | (1u64 << j), rational::scaled(c, scale)))
                .collect(),
        }
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        let n = self.variable_count();
        if n > cap.min(40) {
            return Err(Error::SizeCap {
                what: "spin enumeration",
                size: n,
                cap: cap.min(40),
            });
        }
        Ok(())
    }

    /// All `2^n` basis energies as `f64`, indexed by basis state.
    pub fn diagonal(&self, cap: usize) -> Result<Vec<f64>> {
        self.check_cap(cap)?;
        let compiled = self.compile();
        let scale = compiled.scale as f64;
        Ok((0..1u64 << self.variable_count())
            .into_par_iter()
            .map(|z| compiled.scaled_value(z) as f64 / scale)
            .collect())
    }

    /// Every basis energy, ascending, ties broken by basis index.
    pub fn spectrum(&self, cap: usize) -> Result<Vec<SpectrumEntry>> {
        self.check_cap(cap)?;
        let compiled = self.compile();
        let mut scaled: Vec<(i64, u64)> = (0..1u64 << self.variable_count())
            .into_par_iter()
            .map(|z| (compiled.scaled_value(z), z))
            .collect();
        scaled.par_sort_unstable();
        let n = self.variable_count();
        Ok(scaled
            .into_iter()
            .map(|(value, index)| SpectrumEntry {
                index,
                bits: n,
                energy: Rational::new(value, compiled.scale),
            })
            .collect())
    }

    /// Minimum energy and all basis states attaining it.
    pub fn ground_states(&self, cap: usize) -> Result<(Rational, Vec<u64>)> {
        self.check_cap(cap)?;
        let compiled = self.compile();
        let (min, states) = (0..1u64 << self.variable_count())
            .into_par_iter()
            .fold(
                || (i64::MAX, Vec::new()),
                |(min, mut states), z| {
                    let e = compiled.scaled_value(z);
                    if e < min {
                        (e, vec![z])
                    } else {
                        if e == min {
                            states.push(z);
                        }
                        (min, states)
                    }
                },
            )
            .reduce(
                || (i64::MAX, Vec::new()),
                |a, b| match a.0.cmp(&b.0) {
                    std::cmp::Ordering::Less => a,
                    std::cmp::Ordering::Greater => b,
                    std::cmp::Ordering::Equal => {
                        let mut states = a.1;
                        states.extend(b.1);
                        (a.0, states)
                    }
                },
            );
        let mut states = states;
        states.sort_unstable();
        Ok((Rational::new(min, compiled.scale), states))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "constant": rational::to_json(&self.constant),
            "fields": self.fields.iter()
                .map(|(&i, h)| json!([i, rational::to_json(h)]))
                .collect::<Vec<_>>(),
            "couplings": self.couplings.iter()
                .map(|(&(i, j), c)| json!([i, j, rational::to_json(c)]))
                .collect::<Vec<_>>(),
            "n": self.variable_count(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub index: u64,
    bits: usize,
    pub energy: Rational,
}

impl SpectrumEntry {
    pub fn bitstring(&self) -> Bitstring {
        Bitstring::from_index(self.index, self.bits)
    }
}

/// Writes a spectrum as `bitstring,energy` CSV rows.
pub fn spectrum_csv(entries: &[SpectrumEntry]) -> String {
    let mut out = String::from("bitstring,energy\n");
    for entry in entries {
        out.push_str(&format!("{},{}\n", entry.bitstring(), rational::format(&entry.energy)));
    }
    out
}

#[derive(Debug, Clone)]
pub struct CompiledIsing {
    scale: i64,
    constant: i64,
    fields: Vec<(u64, i64)>,
    couplings: Vec<(u64, i64)>,
}

impl CompiledIsing {
    pub fn scaled_value(&self, index: u64) -> i64 {
        let mut value = self.constant;
        for &(mask, h) in &self.fields {
            value += if index & mask == 0 { h } else { -h };
        }
        for &(mask, c) in &self.couplings {
            // Product of two spins is -1 exactly when one of the bits is set.
            value += if (index & mask).count_ones() == 1 { -c } else { c };
        }
        value
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn energy(&self, index: u64) -> Rational {
        Rational::new(self.scaled_value(index), self.scale)
    }
}

/// Rewrites `poly` over spins via `x = (1 - s) / 2`, gathering like terms
/// and keeping the constant.
pub fn to_ising(poly: &PseudoBooleanPolynomial) -> IsingPolynomial {
    let half = Rational::new(1, 2);
    let quarter = Rational::new(1, 4);
    let mut ising = IsingPolynomial {
        layout: poly.layout(),
        nodes: poly.nodes(),
        constant: poly.constant(),
        fields: BTreeMap::new(),
        couplings: BTreeMap::new(),
    };
    for (i, a) in poly.linear() {
        // a x = a/2 - (a/2) s
        ising.constant += a * half;
        accumulate(&mut ising.fields, i, -a * half);
    }
    for ((i, j), q) in poly.quadratic() {
        // q x y = q/4 (1 - s - s' + s s')
        ising.constant += q * quarter;
        accumulate(&mut ising.fields, i, -q * quarter);
        accumulate(&mut ising.fields, j, -q * quarter);
        accumulate(&mut ising.couplings, (i, j), q * quarter);
    }
    ising
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, c: Rational) {
    if c.is_zero() {
        return;
    }
    match map.entry(key) {
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
    }
}
