use super::*;
use crate::bits::Bitstring;
use crate::graph::ProblemInstance;
use crate::oracle::{encode_order, solve_exact_tsp, validate_bitstring};
use crate::rational::int;
use proptest::prelude::*;

fn instance(n: usize, directed: bool, variant: Variant, edges: &[(usize, usize, i64)], a: i64, b: i64) -> ProblemInstance {
    ProblemInstance::new(
        n,
        directed,
        variant,
        edges.iter().map(|&(u, v, c)| (u, v, int(c))),
        int(a),
        int(b),
    )
    .unwrap()
}

fn counter_example(a: i64) -> ProblemInstance {
    instance(4, false, Variant::Tsp, &[(1, 2, 1), (2, 3, 1), (3, 4, 1), (1, 3, 10), (2, 4, 10)], a, 1)
}

fn landscape() -> ProblemInstance {
    instance(4, false, Variant::Tsp, &[(1, 2, 1), (2, 3, 9), (3, 4, 5), (1, 4, 10), (1, 3, 4), (2, 4, 3)], 11, 1)
}

fn complete4() -> ProblemInstance {
    instance(4, false, Variant::Tsp, &[(1, 2, 1), (2, 3, 3), (3, 4, 8), (1, 4, 5), (1, 3, 1), (2, 4, 2)], 9, 1)
}

fn directed_cycle_graph() -> ProblemInstance {
    instance(
        4,
        true,
        Variant::HamiltonianCycle,
        &[(2, 1, 1), (1, 4, 1), (4, 3, 1), (3, 2, 1), (2, 4, 1), (3, 1, 1)],
        1,
        0,
    )
}

/// Direct evaluation of the penalty sums on an `N x N` table, written
/// independently of the polynomial expansion.
fn table_value(inst: &ProblemInstance, table: &[Vec<bool>], with_cost: bool, fixed_start: bool) -> Rational {
    let n = inst.node_count();
    let x = |v: usize, t: usize| i64::from(table[v - 1][t - 1]);
    let a = inst.penalty_a();
    let mut h = Rational::zero();
    if fixed_start {
        h += a * int((1 - x(1, 1)).pow(2));
    }
    for v in 1..=n {
        h += a * int((1 - (1..=n).map(|t| x(v, t)).sum::<i64>()).pow(2));
    }
    for t in 1..=n {
        h += a * int((1 - (1..=n).map(|v| x(v, t)).sum::<i64>()).pow(2));
    }
    let last = if inst.variant() == Variant::HamiltonianPath { n - 1 } else { n };
    for u in 1..=n {
        for v in 1..=n {
            if u == v {
                continue;
            }
            let occupancy: i64 = (1..=last).map(|t| x(u, t) * x(v, t % n + 1)).sum();
            match inst.arc_cost(u, v) {
                None => h += a * int(occupancy),
                Some(c) if with_cost => h += inst.penalty_b() * c * int(occupancy),
                Some(_) => {}
            }
        }
    }
    h
}

fn full_table(n: usize, index: u64) -> Vec<Vec<bool>> {
    (0..n)
        .map(|v| (0..n).map(|t| (index >> (v * n + t)) & 1 == 1).collect())
        .collect()
}

/// Completes an efficient-layout assignment with node 1 at step 1.
fn completed_table(n: usize, index: u64) -> Vec<Vec<bool>> {
    let mut table = vec![vec![false; n]; n];
    table[0][0] = true;
    for v in 2..=n {
        for t in 2..=n {
            table[v - 1][t - 1] = (index >> ((v - 2) * (n - 1) + (t - 2))) & 1 == 1;
        }
    }
    table
}

fn table_index(table: &[Vec<bool>]) -> u64 {
    let n = table.len();
    let mut index = 0;
    for (v, row) in table.iter().enumerate() {
        for (t, &set) in row.iter().enumerate() {
            if set {
                index |= 1 << (v * n + t);
            }
        }
    }
    index
}

#[test]
fn directed_cycle_table_has_zero_energy() {
    let inst = directed_cycle_graph();
    let h = encode_cycle_hamiltonian(&inst);
    // x[1,2], x[2,1], x[3,4], x[4,3]: cycle 2-1-4-3-2.
    let bits = encode_order(&inst, Layout::Full, &[2, 1, 4, 3]).unwrap();
    assert_eq!(h.evaluate(&bits).unwrap(), int(0));
}

#[test]
fn all_zero_assignment_pays_every_one_hot_term() {
    let h = encode_cycle_hamiltonian(&landscape().with_penalties(int(1), int(1)).unwrap());
    assert_eq!(h.evaluate(&Bitstring::zeros(16)).unwrap(), int(8));
}

#[test]
fn expansion_matches_table_sums() {
    for inst in [counter_example(11), landscape(), directed_cycle_graph()] {
        let with_cost = inst.variant() == Variant::Tsp;
        let plain = encode(&inst, Layout::Full).unwrap().compile();
        let fixed = encode_fixed_start(&inst).unwrap().compile();
        for index in 0..1u64 << 16 {
            let table = full_table(4, index);
            assert_eq!(plain.value(index), table_value(&inst, &table, with_cost, false));
            assert_eq!(fixed.value(index), table_value(&inst, &table, with_cost, true));
        }
    }
}

#[test]
fn path_variant_has_no_wrap_terms() {
    let inst = directed_cycle_graph().with_variant(Variant::HamiltonianPath).unwrap();
    let h = encode_cycle_hamiltonian(&inst).compile();
    for index in (0..1u64 << 16).step_by(7) {
        assert_eq!(h.value(index), table_value(&inst, &full_table(4, index), false, false));
    }
    // The path 2-1-4-3 is valid with or without the closing edge.
    let bits = encode_order(&inst, Layout::Full, &[2, 1, 4, 3]).unwrap();
    assert_eq!(encode_cycle_hamiltonian(&inst).evaluate(&bits).unwrap(), int(0));
}

#[test]
fn zero_set_is_exactly_the_hamiltonian_cycles() {
    for inst in [
        counter_example(11).with_variant(Variant::HamiltonianCycle).unwrap(),
        directed_cycle_graph(),
    ] {
        let h = encode_cycle_hamiltonian(&inst).compile();
        let mut zeros = 0;
        for index in 0..1u64 << 16 {
            let valid = validate_bitstring(&inst, Layout::Full, &Bitstring::from_index(index, 16))
                .unwrap()
                .is_valid();
            let value = h.value(index);
            assert!(value >= int(0));
            assert_eq!(value == int(0), valid, "index {index}");
            zeros += u32::from(valid);
        }
        assert!(zeros > 0);
    }
}

#[test]
fn tsp_value_of_complete_graph_optimum() {
    let inst = complete4();
    let h = encode_tsp_hamiltonian(&inst).unwrap();
    // Optimal table: 3-1-4-2.
    let bits = encode_order(&inst, Layout::Full, &[3, 1, 4, 2]).unwrap();
    assert_eq!(h.evaluate(&bits).unwrap(), int(11));
    assert_eq!(encode_cycle_hamiltonian(&inst).evaluate(&bits).unwrap(), int(0));
    assert_eq!(solve_exact_tsp(&inst).unwrap().optimal_cost, Some(int(11)));
}

#[test]
fn counter_example_values() {
    let inst = counter_example(11);
    let h = encode_tsp_hamiltonian(&inst).unwrap();
    let broken = encode_order(&inst, Layout::Full, &[1, 2, 3, 4]).unwrap();
    assert_eq!(h.evaluate(&broken).unwrap(), int(14));
    let valid = encode_order(&inst, Layout::Full, &[1, 2, 4, 3]).unwrap();
    assert_eq!(h.evaluate(&valid).unwrap(), int(22));
}

#[test]
fn tsp_encoders_require_tsp_variant() {
    let inst = directed_cycle_graph();
    assert!(matches!(encode_tsp_hamiltonian(&inst), Err(Error::Precondition(_))));
    assert!(matches!(encode_efficient(&inst), Err(Error::Precondition(_))));
    assert!(encode_fixed_start(&inst).is_ok());
    let path = inst.with_variant(Variant::HamiltonianPath).unwrap();
    assert!(matches!(encode_fixed_start(&path), Err(Error::Precondition(_))));
}

#[test]
fn fixed_start_term() {
    let inst = complete4();
    let plain = encode_tsp_hamiltonian(&inst).unwrap();
    let fixed = encode_fixed_start(&inst).unwrap();
    assert_eq!(fixed.layout(), Layout::FixedStartFull);

    let starts_at_one = encode_order(&inst, Layout::Full, &[1, 4, 2, 3]).unwrap();
    assert_eq!(fixed.evaluate(&starts_at_one).unwrap(), plain.evaluate(&starts_at_one).unwrap());

    let shifted = encode_order(&inst, Layout::Full, &[3, 1, 4, 2]).unwrap();
    assert_eq!(
        fixed.evaluate(&shifted).unwrap(),
        plain.evaluate(&shifted).unwrap() + inst.penalty_a()
    );
}

#[test]
fn fixed_start_keeps_the_minimum() {
    for inst in [complete4(), landscape(), counter_example(41)] {
        let plain = encode_tsp_hamiltonian(&inst).unwrap().compile();
        let fixed = encode_fixed_start(&inst).unwrap().compile();
        let min = |p: &CompiledPolynomial| (0..1u64 << 16).map(|i| p.value(i)).min().unwrap();
        assert_eq!(min(&plain), min(&fixed));
    }
}

#[test]
fn efficient_variable_count_and_landscape_optimum() {
    let inst = landscape();
    let h = encode_efficient(&inst).unwrap();
    assert_eq!(h.variable_count(), 9);
    let mut bits = Bitstring::zeros(9);
    for (v, t) in [(2, 2), (4, 3), (3, 4)] {
        bits.set(h.bit(VariableIndex::new(v, t)), true);
    }
    assert_eq!(h.evaluate(&bits).unwrap(), int(13));
    // The constraint part vanishes: the value does not depend on A.
    let heavier = encode_efficient(&inst.with_penalties(int(1000), int(1)).unwrap()).unwrap();
    assert_eq!(heavier.evaluate(&bits).unwrap(), int(13));
    let doubled = encode_efficient(&inst.with_penalties(int(11), int(2)).unwrap()).unwrap();
    assert_eq!(doubled.evaluate(&bits).unwrap(), int(26));
}

fn assert_master_equivalence(inst: &ProblemInstance, indices: impl Iterator<Item = u64>) {
    let n = inst.node_count();
    let efficient = encode_efficient(inst).unwrap().compile();
    let fixed = encode_fixed_start(inst).unwrap();
    assert_eq!(fixed.variable_count(), n * n);
    for index in indices {
        let table = completed_table(n, index);
        let full_bits = Bitstring::from_index(table_index(&table), n * n);
        assert_eq!(
            efficient.value(index),
            fixed.evaluate(&full_bits).unwrap(),
            "assignment {index:#b}"
        );
    }
}

#[test]
fn efficient_equals_fixed_start_on_every_assignment() {
    for inst in [landscape(), counter_example(11), complete4()] {
        assert_master_equivalence(&inst, 0..1u64 << 9);
    }
    let directed = instance(
        4,
        true,
        Variant::Tsp,
        &[(1, 2, 3), (2, 3, 1), (3, 1, 2), (1, 4, 7), (4, 2, 5), (3, 4, 2)],
        20,
        2,
    );
    assert_master_equivalence(&directed, 0..1u64 << 9);
    for n in [2, 3] {
        let pairs: Vec<_> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v, (u + v) as i64))).collect();
        let small = instance(n, false, Variant::Tsp, &pairs, 30, 1);
        assert_master_equivalence(&small, 0..1u64 << ((n - 1) * (n - 1)));
    }
}

#[test]
fn efficient_boundary_terms_for_missing_node_one_edges() {
    // Node 1 lacks edges to 4 in the counter example: x[4,2] and x[4,4] carry A.
    let inst = counter_example(11);
    let h = encode_efficient(&inst).unwrap();
    assert_eq!(h.linear_coefficient(h.bit(VariableIndex::new(4, 2))), int(11) - int(22));
    // x[2,2] leaves node 1 along cost 1: linear = -2A (one-hot) + B*1.
    assert_eq!(h.linear_coefficient(h.bit(VariableIndex::new(2, 2))), int(-22) + int(1));
}

#[test]
fn suggested_penalties() {
    let ce = counter_example(11);
    assert_eq!(suggest_penalties(&ce, PenaltyMode::Lucas).unwrap(), (int(11), int(1)));
    assert_eq!(suggest_penalties(&ce, PenaltyMode::Safe).unwrap(), (int(41), int(1)));

    let single = instance(2, false, Variant::Tsp, &[(1, 2, 0)], 1, 1);
    assert_eq!(suggest_penalties(&single, PenaltyMode::Lucas).unwrap(), (int(1), int(1)));
    assert_eq!(suggest_penalties(&single, PenaltyMode::Safe).unwrap(), (int(1), int(1)));

    let empty = instance(3, false, Variant::Tsp, &[], 1, 1);
    assert!(matches!(suggest_penalties(&empty, PenaltyMode::Lucas), Err(Error::Precondition(_))));
}

#[test]
fn penalty_condition_flags() {
    let c = penalty_conditions(&counter_example(11));
    assert_eq!(c, PenaltyConditions { lucas: true, safe: false });
    let c = penalty_conditions(&counter_example(41));
    assert_eq!(c, PenaltyConditions { lucas: true, safe: true });
    let c = penalty_conditions(&counter_example(10));
    assert_eq!(c, PenaltyConditions { lucas: false, safe: false });
}

#[test]
fn audit_counter_example_with_lucas_penalties() {
    let report = audit_penalties(&counter_example(11), DEFAULT_AUDIT_CAP).unwrap();
    assert_eq!(report.variables, 16);
    assert_eq!(report.minimum, int(14));
    assert!(!report.minimum_is_valid());
    assert!(!report.all_minimizers_valid);
    assert_eq!(report.best_valid_value, Some(int(22)));
}

#[test]
fn audit_counter_example_with_safe_penalties() {
    let report = audit_penalties(&counter_example(41), DEFAULT_AUDIT_CAP).unwrap();
    assert_eq!(report.minimum, int(22));
    assert!(report.minimum_is_valid());
    assert!(report.all_minimizers_valid);
    assert_eq!(report.minimizer_decoding.tour().unwrap().cost, int(22));
}

#[test]
fn audit_complete_graph_with_lucas_penalties() {
    let inst = complete4();
    let (a, b) = suggest_penalties(&inst, PenaltyMode::Lucas).unwrap();
    let report = audit_penalties(&inst.with_penalties(a, b).unwrap(), DEFAULT_AUDIT_CAP).unwrap();
    assert!(report.all_minimizers_valid);
    assert_eq!(report.minimum, int(11));
    // 4 rotations x 2 directions of the optimal cycle.
    assert_eq!(report.minimizer_count, 8);
}

#[test]
fn audit_size_cap() {
    let pairs: Vec<_> = (1..=5).flat_map(|u| (u + 1..=5).map(move |v| (u, v, 1))).collect();
    let inst = instance(5, false, Variant::Tsp, &pairs, 5, 1);
    assert!(matches!(audit_penalties(&inst, 24), Err(Error::SizeCap { size: 25, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn efficient_equals_fixed_start_for_five_nodes(
        costs in proptest::collection::vec(proptest::option::weighted(0.8, 0i64..12), 10),
        samples in proptest::collection::vec(0u64..1 << 16, 64),
    ) {
        let pairs: Vec<_> = (1..=5usize).flat_map(|u| (u + 1..=5).map(move |v| (u, v))).collect();
        let edges: Vec<_> = pairs.iter().zip(&costs)
            .filter_map(|(&(u, v), c)| c.map(|c| (u, v, c)))
            .collect();
        let inst = instance(5, false, Variant::Tsp, &edges, 50, 1);
        assert_master_equivalence(&inst, samples.into_iter());
    }

    #[test]
    fn polynomials_are_quadratic(
        n in 2usize..6,
        directed in any::<bool>(),
        mask in any::<u32>(),
    ) {
        let pairs: Vec<_> = (1..=n)
            .flat_map(|u| (1..=n).map(move |v| (u, v)))
            .filter(|&(u, v)| if directed { u != v } else { u < v })
            .collect();
        let edges: Vec<_> = pairs.iter().enumerate()
            .filter(|(i, _)| mask >> (i % 32) & 1 == 1)
            .map(|(i, &(u, v))| (u, v, i as i64))
            .collect();
        let inst = instance(n, directed, Variant::Tsp, &edges, 7, 1);
        for layout in [Layout::Full, Layout::FixedStartFull, Layout::Efficient] {
            prop_assert!(encode(&inst, layout).unwrap().degree() <= 2);
        }
    }
}
