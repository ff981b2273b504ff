use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Value};

use super::layout::{Layout, VariableIndex};
use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A quadratic pseudo-Boolean polynomial over the `x[v,t]` variables of a
/// layout. Keys are bit positions; zero coefficients are never stored and
/// quadratic keys always satisfy `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoBooleanPolynomial {
    layout: Layout,
    nodes: usize,
    constant: Rational,
    linear: BTreeMap<usize, Rational>,
    quadratic: BTreeMap<(usize, usize), Rational>,
}

impl PseudoBooleanPolynomial {
    pub fn new(layout: Layout, nodes: usize) -> Self {
        Self {
            layout,
            nodes,
            constant: Rational::zero(),
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        }
    }

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

    pub fn linear(&self) -> impl Iterator<Item = (usize, Rational)> + '_ {
        self.linear.iter().map(|(&i, &c)| (i, c))
    }

    pub fn quadratic(&self) -> impl Iterator<Item = ((usize, usize), Rational)> + '_ {
        self.quadratic.iter().map(|(&k, &c)| (k, c))
    }

    pub fn linear_coefficient(&self, bit: usize) -> Rational {
        self.linear.get(&bit).copied().unwrap_or_else(Rational::zero)
    }

    pub fn quadratic_coefficient(&self, i: usize, j: usize) -> Rational {
        self.quadratic
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or_else(Rational::zero)
    }

    /// Highest total degree of a stored term.
    pub fn degree(&self) -> usize {
        if !self.quadratic.is_empty() {
            2
        } else if !self.linear.is_empty() {
            1
        } else {
            0
        }
    }

    pub fn bit(&self, var: VariableIndex) -> usize {
        self.layout
            .bit_of(self.nodes, var)
            .unwrap_or_else(|| panic!("{var} is not a {} variable for N={}", self.layout, self.nodes))
    }

    pub fn add_constant(&mut self, c: Rational) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, bit: usize, c: Rational) {
        accumulate(&mut self.linear, bit, c);
    }

    /// Adds `c * x_i * x_j`; `i == j` folds into the linear term since `x^2 = x`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: Rational) {
        if i == j {
            self.add_linear(i, c);
        } else {
            accumulate(&mut self.quadratic, (i.min(j), i.max(j)), c);
        }
    }

    /// Adds `scale * (offset + sum_k a_k x_k)^2`, expanded with `x^2 = x`.
    pub fn add_squared(&mut self, scale: Rational, offset: Rational, terms: &[(usize, Rational)]) {
        self.add_constant(scale * offset * offset);
        for (k, &(i, a)) in terms.iter().enumerate() {
            self.add_linear(i, scale * (a * a + Rational::from_integer(2) * offset * a));
            for &(j, b) in &terms[k + 1..] {
                self.add_quadratic(i, j, scale * Rational::from_integer(2) * a * b);
            }
        }
    }

    pub fn evaluate(&self, bits: &Bitstring) -> Result<Rational> {
        if bits.len() != self.variable_count() {
            return Err(Error::Validation(format!(
                "bitstring has {} bits, polynomial has {} variables",
                bits.len(),
                self.variable_count()
            )));
        }
        let mut value = self.constant;
        for (&i, &c) in &self.linear {
            if bits.get(i) {
                value += c;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if bits.get(i) && bits.get(j) {
                value += c;
            }
        }
        Ok(value)
    }

    /// Integer-scaled copy for fast exact evaluation on basis-state indices.
    /// Panics above 64 variables.
    pub fn compile(&self) -> CompiledPolynomial {
        assert!(self.variable_count() <= 64, "compiled evaluation is limited to 64 variables");
        let scale = rational::common_denominator(
            std::iter::once(&self.constant)
                .chain(self.linear.values())
                .chain(self.quadratic.values()),
        );
        CompiledPolynomial {
            scale,
            constant: rational::scaled(&self.constant, scale),
            linear: self
                .linear
                .iter()
                .map(|(&i, c)| (1u64 << i, rational::scaled(c, scale)))
                .collect(),
            quadratic: self
                .quadratic
                .iter()
                .map(|(&(i, j), c)| ((1u64 << i) | (1u64 << j), rational::scaled(c, scale)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let order = self.variable_order();
        json!({
            "layout": self.layout.as_str(),
            "nodes": self.nodes,
            "constant": rational::to_json(&self.constant),
            "linear": self.linear.iter()
                .map(|(&i, c)| json!([order[i], rational::to_json(c)]))
                .collect::<Vec<_>>(),
            "quadratic": self.quadratic.iter()
                .map(|(&(i, j), c)| json!([order[i], order[j], rational::to_json(c)]))
                .collect::<Vec<_>>(),
        })
    }
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

/// A polynomial with coefficients multiplied by a common denominator so that
/// evaluation on a basis index is plain integer arithmetic.
#[derive(Debug, Clone)]
pub struct CompiledPolynomial {
    scale: i64,
    constant: i64,
    linear: Vec<(u64, i64)>,
    quadratic: Vec<(u64, i64)>,
}

impl CompiledPolynomial {
    /// Value times [`CompiledPolynomial::scale`].
    pub fn scaled_value(&self, index: u64) -> i64 {
        let mut value = self.constant;
        for &(mask, c) in &self.linear {
            if index & mask != 0 {
                value += c;
            }
        }
        for &(mask, c) in &self.quadratic {
            if index & mask == mask {
                value += c;
            }
        }
        value
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn value(&self, index: u64) -> Rational {
        Rational::new(self.scaled_value(index), self.scale)
    }
}
