//! Classical ground truth: exhaustive tour enumeration and table decoding.
//!
//! Nothing here looks at a Hamiltonian; the checks work directly on the
//! graph so they can certify the encoders independently.

use std::fmt;

use itertools::Itertools;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bits::Bitstring;
use crate::encoder::{Layout, VariableIndex};
use crate::error::{Error, Result};
use crate::graph::{ProblemInstance, Variant};
use crate::rational::{self, Rational};

/// Largest instance [`solve_exact_tsp`] will enumerate.
pub const MAX_EXACT_NODES: usize = 13;

/// A visiting order. Cycles are rotated to start at node 1; the return to
/// the first node is implied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: Rational,
    pub valid: bool,
    pub closed: bool,
}

impl Tour {
    /// Builds a tour from any permutation, rotating cycles to start at node 1.
    /// `valid` is false when a step has no edge; such steps add no cost.
    pub fn evaluate(instance: &ProblemInstance, order: &[usize], closed: bool) -> Tour {
        let order = if closed {
            let start = order.iter().position(|&v| v == 1).unwrap_or(0);
            order[start..].iter().chain(&order[..start]).copied().collect()
        } else {
            order.to_vec()
        };
        let mut cost = Rational::zero();
        let mut valid = true;
        for (from, to) in steps(&order, closed) {
            match instance.arc_cost(from, to) {
                Some(c) => cost += c,
                None => valid = false,
            }
        }
        Tour {
            order,
            cost,
            valid,
            closed,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order,
            "path": self.to_string(),
            "cost": rational::to_json(&self.cost),
            "valid": self.valid,
        })
    }
}

impl fmt::Display for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut nodes: Vec<String> = self.order.iter().map(|v| v.to_string()).collect();
        if self.closed {
            if let Some(first) = self.order.first() {
                nodes.push(first.to_string());
            }
        }
        f.write_str(&nodes.join("-"))
    }
}

fn steps(order: &[usize], closed: bool) -> Vec<(usize, usize)> {
    let mut out: Vec<_> = order.windows(2).map(|w| (w[0], w[1])).collect();
    if closed && order.len() > 1 {
        out.push((order[order.len() - 1], order[0]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    /// `None` when the graph has no Hamiltonian cycle.
    pub optimal_cost: Option<Rational>,
    /// Every optimal tour, in lexicographic order of the visiting sequence.
    pub tours: Vec<Tour>,
}

impl ExactSolution {
    pub fn to_json(&self) -> Value {
        json!({
            "optimal_cost": self.optimal_cost.as_ref().map(rational::to_json),
            "tours": self.tours.iter().map(Tour::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Enumerates all `(N-1)!` cycles starting at node 1 and returns every
/// minimum-cost valid one. Both directions of an undirected optimum are
/// reported as separate tours.
pub fn solve_exact_tsp(instance: &ProblemInstance) -> Result<ExactSolution> {
    let n = instance.node_count();
    if n > MAX_EXACT_NODES {
        return Err(Error::SizeCap {
            what: "exact TSP enumeration",
            size: n,
            cap: MAX_EXACT_NODES,
        });
    }
    if n == 1 {
        return Ok(ExactSolution {
            optimal_cost: Some(Rational::zero()),
            tours: vec![Tour::evaluate(instance, &[1], true)],
        });
    }

    // Split on the second node so branches can run in parallel while the
    // merged output stays in lexicographic order.
    let branches: Vec<(Option<Rational>, Vec<Vec<usize>>)> = (2..=n)
        .into_par_iter()
        .map(|second| {
            let rest: Vec<usize> = (2..=n).filter(|&v| v != second).collect();
            let mut best: Option<Rational> = None;
            let mut argmin = Vec::new();
            for perm in rest.iter().copied().permutations(rest.len()) {
                let mut order = Vec::with_capacity(n);
                order.push(1);
                order.push(second);
                order.extend(perm);
                let Some(cost) = cycle_cost(instance, &order) else {
                    continue;
                };
                match best {
                    Some(b) if cost > b => {}
                    Some(b) if cost == b => argmin.push(order),
                    _ => {
                        best = Some(cost);
                        argmin = vec![order];
                    }
                }
            }
            (best, argmin)
        })
        .collect();

    let optimal_cost = branches.iter().filter_map(|(c, _)| *c).min();
    let tours = match optimal_cost {
        None => Vec::new(),
        Some(best) => branches
            .into_iter()
            .filter(|(c, _)| *c == Some(best))
            .flat_map(|(_, orders)| orders)
            .map(|order| Tour::evaluate(instance, &order, true))
            .collect(),
    };
    Ok(ExactSolution {
        optimal_cost,
        tours,
    })
}

fn cycle_cost(instance: &ProblemInstance, order: &[usize]) -> Option<Rational> {
    steps(order, true)
        .into_iter()
        .try_fold(Rational::zero(), |acc, (from, to)| {
            instance.arc_cost(from, to).map(|c| acc + c)
        })
}

/// One broken constraint of an assignment table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Node `node` is visited `count` times instead of once.
    Row { node: usize, count: usize },
    /// Step `step` holds `count` nodes instead of one.
    Column { step: usize, count: usize },
    /// Moving `from` (at `step`) to `to` uses an edge the graph lacks.
    MissingEdge { from: usize, to: usize, step: usize },
    /// A fixed-start table does not place node 1 at step 1.
    StartNotFixed,
    /// The explicit return column of an extended table disagrees with step 1.
    ReturnMismatch {
        step: usize,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Row { node, count } => write!(f, "row v={node} has {count} occupied cells"),
            Violation::Column { step, count } => {
                write!(f, "column t={step} has {count} occupied cells")
            }
            Violation::MissingEdge { from, to, step } => {
                write!(f, "step {step}: no edge from node {from} to node {to}")
            }
            Violation::StartNotFixed => f.write_str("node 1 is not at step 1"),
            Violation::ReturnMismatch {
                step,
                expected,
                found,
            } => write!(
                f,
                "column t={step} holds nodes {found:?} but step 1 holds {expected:?}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
    /// The visiting order, when rows and columns are one-hot.
    pub order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoding {
    Valid(Tour),
    Invalid(ViolationReport),
}

impl Decoding {
    pub fn is_valid(&self) -> bool {
        matches!(self, Decoding::Valid(_))
    }

    pub fn tour(&self) -> Option<&Tour> {
        match self {
            Decoding::Valid(t) => Some(t),
            Decoding::Invalid(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Decoding::Valid(tour) => json!({ "valid": true, "tour": tour.to_json() }),
            Decoding::Invalid(report) => json!({
                "valid": false,
                "violations": report.violations,
                "messages": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "order": report.order,
            }),
        }
    }
}

/// Rebuilds the visit table from `bits`, completing the efficient layout
/// with node 1 at step 1, and checks one-hot rows and columns and every
/// step (including the implicit return for cycles). No repair is attempted.
pub fn validate_bitstring(
    instance: &ProblemInstance,
    layout: Layout,
    bits: &Bitstring,
) -> Result<Decoding> {
    let n = instance.node_count();
    let expected = layout.variable_count(n);
    if bits.len() != expected {
        return Err(Error::Validation(format!(
            "{layout} layout for N={n} needs {expected} bits, got {}",
            bits.len()
        )));
    }

    // table[v-1][t-1] over steps 1..=N; the extended return column is kept apart.
    let mut table = vec![vec![false; n]; n];
    let mut return_column = vec![false; n];
    if layout == Layout::Efficient {
        table[0][0] = true;
    }
    for (bit, var) in layout.variable_order(n).into_iter().enumerate() {
        if !bits.get(bit) {
            continue;
        }
        if var.t == n + 1 {
            return_column[var.v - 1] = true;
        } else {
            table[var.v - 1][var.t - 1] = true;
        }
    }
    debug_assert!(layout != Layout::Efficient || table[0][1..].iter().all(|&b| !b));

    let mut violations = Vec::new();
    if layout == Layout::FixedStartFull && !table[0][0] {
        violations.push(Violation::StartNotFixed);
    }
    let mut one_hot = true;
    for v in 1..=n {
        let count = table[v - 1].iter().filter(|&&b| b).count();
        one_hot &= count == 1;
        // In an extended table the starting node legitimately occupies two cells.
        let (count, expected) = if layout == Layout::ExtendedCycle {
            let starts = usize::from(table[v - 1][0]);
            (count + usize::from(return_column[v - 1]), 1 + starts)
        } else {
            (count, 1)
        };
        if count != expected {
            violations.push(Violation::Row { node: v, count });
        }
    }
    for t in 1..=n {
        let count = (0..n).filter(|&v| table[v][t - 1]).count();
        if count != 1 {
            one_hot = false;
            violations.push(Violation::Column { step: t, count });
        }
    }
    if layout == Layout::ExtendedCycle {
        let first: Vec<usize> = (1..=n).filter(|&v| table[v - 1][0]).collect();
        let last: Vec<usize> = (1..=n).filter(|&v| return_column[v - 1]).collect();
        if first != last {
            violations.push(Violation::ReturnMismatch {
                step: n + 1,
                expected: first,
                found: last,
            });
        }
    }

    let order: Option<Vec<usize>> = one_hot.then(|| {
        (0..n)
            .map(|t| (1..=n).find(|&v| table[v - 1][t]).expect("one-hot column"))
            .collect()
    });

    let closed = instance.variant() != Variant::HamiltonianPath;
    if let Some(order) = &order {
        for (t, (from, to)) in steps(order, closed).into_iter().enumerate() {
            if !instance.has_arc(from, to) {
                violations.push(Violation::MissingEdge {
                    from,
                    to,
                    step: t + 1,
                });
            }
        }
    }

    if violations.is_empty() {
        let order = order.expect("valid tables are one-hot");
        Ok(Decoding::Valid(Tour::evaluate(instance, &order, closed)))
    } else {
        Ok(Decoding::Invalid(ViolationReport { violations, order }))
    }
}

/// Bitstring of a visiting order in `layout`; the inverse of a successful
/// [`validate_bitstring`]. For the efficient layout `order` must start at node 1.
pub fn encode_order(instance: &ProblemInstance, layout: Layout, order: &[usize]) -> Result<Bitstring> {
    let n = instance.node_count();
    if order.len() != n || !order.iter().copied().sorted().eq(1..=n) {
        return Err(Error::Validation(format!("{order:?} is not a permutation of 1..={n}")));
    }
    let mut bits = Bitstring::zeros(layout.variable_count(n));
    let mut set = |v: usize, t: usize| -> Result<()> {
        match layout.bit_of(n, VariableIndex::new(v, t)) {
            Some(bit) => {
                bits.set(bit, true);
                Ok(())
            }
            None if layout == Layout::Efficient && v == 1 && t == 1 => Ok(()),
            None => Err(Error::Validation(format!(
                "order {order:?} cannot be written in the {layout} layout"
            ))),
        }
    };
    for (t, &v) in order.iter().enumerate() {
        set(v, t + 1)?;
    }
    if layout == Layout::ExtendedCycle {
        set(order[0], n + 1)?;
    }
    Ok(bits)
}
