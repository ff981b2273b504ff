//! Penalty Hamiltonians over the binary visit variables `x[v,t]`.
//!
//! Every encoder emits one transition term `x[u,t] * x[w,t+1]` per ordered
//! pair of distinct nodes, so an undirected edge contributes both of its
//! orientations. Missing steps are penalised with `A`, existing ones are
//! charged `B * cost`.

mod layout;
mod penalties;
mod polynomial;

pub use layout::{Layout, VariableIndex};
pub use penalties::{
    audit_penalties, penalty_conditions, suggest_penalties, AuditReport, PenaltyConditions,
    PenaltyMode, DEFAULT_AUDIT_CAP,
};
pub use polynomial::{CompiledPolynomial, PseudoBooleanPolynomial};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{ProblemInstance, Variant};
use crate::rational::{int, Rational};

/// Row and column one-hot penalties of a table whose nodes are `node_range`
/// and whose steps are `step_range`, weighted by `a`.
fn add_one_hot_penalties(
    poly: &mut PseudoBooleanPolynomial,
    a: Rational,
    node_range: std::ops::RangeInclusive<usize>,
    step_range: std::ops::RangeInclusive<usize>,
) {
    for v in node_range.clone() {
        let row: Vec<_> = step_range
            .clone()
            .map(|t| (poly.bit(VariableIndex::new(v, t)), int(-1)))
            .collect();
        poly.add_squared(a, int(1), &row);
    }
    for t in step_range {
        let column: Vec<_> = node_range
            .clone()
            .map(|v| (poly.bit(VariableIndex::new(v, t)), int(-1)))
            .collect();
        poly.add_squared(a, int(1), &column);
    }
}

/// Consecutive step pairs `(t, t+1)` of the full table; cycles wrap `N -> 1`.
fn full_steps(nodes: usize, wrap: bool) -> Vec<(usize, usize)> {
    let mut steps: Vec<_> = (1..nodes).map(|t| (t, t + 1)).collect();
    if wrap && nodes > 1 {
        steps.push((nodes, 1));
    }
    steps
}

/// Weight of the step `from -> to`: `A` when the arc is missing, otherwise
/// `B * cost` (or nothing when costs are not part of the objective).
fn step_weight(instance: &ProblemInstance, from: usize, to: usize, with_cost: bool) -> Rational {
    match instance.arc_cost(from, to) {
        None => instance.penalty_a(),
        Some(cost) if with_cost => instance.penalty_b() * cost,
        Some(_) => Rational::zero(),
    }
}

fn add_full_transitions(poly: &mut PseudoBooleanPolynomial, instance: &ProblemInstance, wrap: bool, with_cost: bool) {
    let n = instance.node_count();
    for u in 1..=n {
        for w in (1..=n).filter(|&w| w != u) {
            let weight = step_weight(instance, u, w, with_cost);
            if weight.is_zero() {
                continue;
            }
            for &(t, next) in &full_steps(n, wrap) {
                let i = poly.bit(VariableIndex::new(u, t));
                let j = poly.bit(VariableIndex::new(w, next));
                poly.add_quadratic(i, j, weight);
            }
        }
    }
}

fn build_full(instance: &ProblemInstance, layout: Layout, with_cost: bool) -> PseudoBooleanPolynomial {
    let n = instance.node_count();
    let mut poly = PseudoBooleanPolynomial::new(layout, n);
    add_one_hot_penalties(&mut poly, instance.penalty_a(), 1..=n, 1..=n);
    let wrap = instance.variant() != Variant::HamiltonianPath;
    add_full_transitions(&mut poly, instance, wrap, with_cost);
    poly
}

/// Constraint Hamiltonian `H_A` on the full `N x N` layout.
///
/// For paths the transition sum stops at step `N-1`; cycles and TSP wrap
/// step `N` back to step 1.
pub fn encode_cycle_hamiltonian(instance: &ProblemInstance) -> PseudoBooleanPolynomial {
    build_full(instance, Layout::Full, false)
}

/// `H_A + H_B` on the full layout.
pub fn encode_tsp_hamiltonian(instance: &ProblemInstance) -> Result<PseudoBooleanPolynomial> {
    require_variant(instance, &[Variant::Tsp], "TSP Hamiltonian")?;
    Ok(build_full(instance, Layout::Full, true))
}

/// The cycle or TSP Hamiltonian plus `A * (1 - x[1,1])^2`, which pins node 1 to step 1.
pub fn encode_fixed_start(instance: &ProblemInstance) -> Result<PseudoBooleanPolynomial> {
    require_variant(
        instance,
        &[Variant::Tsp, Variant::HamiltonianCycle],
        "fixed-start Hamiltonian",
    )?;
    let with_cost = instance.variant() == Variant::Tsp;
    let mut poly = build_full(instance, Layout::FixedStartFull, with_cost);
    let start = poly.bit(VariableIndex::new(1, 1));
    poly.add_squared(instance.penalty_a(), int(1), &[(start, int(-1))]);
    Ok(poly)
}

/// Qubit-efficient TSP Hamiltonian over the `(N-1)^2` variables
/// `x[v,t]`, `v, t in 2..=N`.
///
/// Node 1 sits at step 1 (and at the identified step `N+1`), so its
/// outgoing step becomes a linear term on column 2 and its incoming step a
/// linear term on column `N`.
pub fn encode_efficient(instance: &ProblemInstance) -> Result<PseudoBooleanPolynomial> {
    require_variant(instance, &[Variant::Tsp], "efficient TSP Hamiltonian")?;
    let n = instance.node_count();
    if n < 2 {
        return Err(Error::Precondition(
            "the efficient layout needs at least 2 nodes".into(),
        ));
    }
    let mut poly = PseudoBooleanPolynomial::new(Layout::Efficient, n);
    add_one_hot_penalties(&mut poly, instance.penalty_a(), 2..=n, 2..=n);

    // Steps between two free nodes, t = 2..N-1.
    for u in 2..=n {
        for w in (2..=n).filter(|&w| w != u) {
            let weight = step_weight(instance, u, w, true);
            if weight.is_zero() {
                continue;
            }
            for t in 2..n {
                let i = poly.bit(VariableIndex::new(u, t));
                let j = poly.bit(VariableIndex::new(w, t + 1));
                poly.add_quadratic(i, j, weight);
            }
        }
    }

    // Leaving node 1 at step 1 and returning to it after step N.
    for v in 2..=n {
        let out_weight = step_weight(instance, 1, v, true);
        poly.add_linear(poly.bit(VariableIndex::new(v, 2)), out_weight);
        let in_weight = step_weight(instance, v, 1, true);
        poly.add_linear(poly.bit(VariableIndex::new(v, n)), in_weight);
    }
    Ok(poly)
}

/// Builds the Hamiltonian for `layout`: the cycle/path constraint
/// Hamiltonian or the TSP Hamiltonian on the full layout, the fixed-start
/// variant, or the efficient encoding.
pub fn encode(instance: &ProblemInstance, layout: Layout) -> Result<PseudoBooleanPolynomial> {
    match layout {
        Layout::Full if instance.variant() == Variant::Tsp => encode_tsp_hamiltonian(instance),
        Layout::Full => Ok(encode_cycle_hamiltonian(instance)),
        Layout::FixedStartFull => encode_fixed_start(instance),
        Layout::Efficient => encode_efficient(instance),
        Layout::ExtendedCycle => Err(Error::Precondition(
            "the extended-cycle layout is decode-only".into(),
        )),
    }
}

fn require_variant(instance: &ProblemInstance, allowed: &[Variant], what: &str) -> Result<()> {
    if allowed.contains(&instance.variant()) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} is not defined for variant `{}`",
            instance.variant()
        )))
    }
}

#[cfg(test)]
mod tests;
