use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which `x[v,t]` variables a bitstring carries and in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// `N x N` table, `v, t in 1..=N`, step `N+1` identified with step 1.
    Full,
    /// Same variables as [`Layout::Full`], Hamiltonian pins node 1 to step 1.
    FixedStartFull,
    /// `(N-1) x (N-1)` table, `v, t in 2..=N`; node 1 is implicit at step 1.
    Efficient,
    /// `N x (N+1)` table with an explicit return column. Used only for
    /// decoding hand-written tables, never produced by an encoder.
    ExtendedCycle,
}

impl Layout {
    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Full => "full",
            Layout::FixedStartFull => "fixed_start_full",
            Layout::Efficient => "efficient",
            Layout::ExtendedCycle => "extended_cycle",
        }
    }

    fn first_node(self) -> usize {
        match self {
            Layout::Efficient => 2,
            _ => 1,
        }
    }

    fn steps(self, nodes: usize) -> std::ops::RangeInclusive<usize> {
        match self {
            Layout::Full | Layout::FixedStartFull => 1..=nodes,
            Layout::Efficient => 2..=nodes,
            Layout::ExtendedCycle => 1..=nodes + 1,
        }
    }

    fn row_width(self, nodes: usize) -> usize {
        let steps = self.steps(nodes);
        (steps.end() + 1).saturating_sub(*steps.start())
    }

    pub fn variable_count(self, nodes: usize) -> usize {
        let rows = (nodes + 1).saturating_sub(self.first_node());
        rows * self.row_width(nodes)
    }

    /// Bit position of `x[v,t]`, or `None` if the layout has no such variable.
    ///
    /// Full layouts use `(v-1)*N + (t-1)`, the efficient layout
    /// `(v-2)*(N-1) + (t-2)`.
    pub fn bit_of(self, nodes: usize, var: VariableIndex) -> Option<usize> {
        let steps = self.steps(nodes);
        if var.v < self.first_node() || var.v > nodes || !steps.contains(&var.t) {
            return None;
        }
        Some((var.v - self.first_node()) * self.row_width(nodes) + (var.t - steps.start()))
    }

    pub fn variable_at(self, nodes: usize, bit: usize) -> Option<VariableIndex> {
        if bit >= self.variable_count(nodes) {
            return None;
        }
        let width = self.row_width(nodes);
        Some(VariableIndex {
            v: bit / width + self.first_node(),
            t: bit % width + self.steps(nodes).start(),
        })
    }

    /// All variables in bit order.
    pub fn variable_order(self, nodes: usize) -> Vec<VariableIndex> {
        (0..self.variable_count(nodes))
            .map(|bit| self.variable_at(nodes, bit).expect("bit in range"))
            .collect()
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Layout::Full),
            "fixed" | "fixed_start" | "fixed_start_full" => Ok(Layout::FixedStartFull),
            "efficient" => Ok(Layout::Efficient),
            "extended" | "extended_cycle" => Ok(Layout::ExtendedCycle),
            other => Err(Error::Validation(format!("unknown layout `{other}`"))),
        }
    }
}

/// The binary variable `x[v,t]`: node `v` is visited at step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct VariableIndex {
    pub v: usize,
    pub t: usize,
}

impl VariableIndex {
    pub fn new(v: usize, t: usize) -> Self {
        VariableIndex { v, t }
    }
}

impl From<(usize, usize)> for VariableIndex {
    fn from((v, t): (usize, usize)) -> Self {
        VariableIndex { v, t }
    }
}

impl From<VariableIndex> for (usize, usize) {
    fn from(var: VariableIndex) -> Self {
        (var.v, var.t)
    }
}

impl fmt::Display for VariableIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x[{},{}]", self.v, self.t)
    }
}
