//! Acceptance checks: one PASS/FAIL line per criterion, with wall time
//! against the criterion's budget. Exits non-zero if any check fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsp_dqes::dqes::{compute_landscape, run_experiment, ExperimentConfig, ExperimentMode};
use tsp_dqes::encoder::{
    audit_penalties, encode_efficient, encode_fixed_start, encode_tsp_hamiltonian, suggest_penalties, Layout,
    PenaltyMode, DEFAULT_AUDIT_CAP,
};
use tsp_dqes::ising::to_ising;
use tsp_dqes::oracle::{solve_exact_tsp, validate_bitstring, Decoding};
use tsp_dqes::quantum::{build_mubs_3q, QuantumState};
use tsp_dqes::rational::{int, to_f64};
use tsp_dqes::vqe::{run_vqe, AnsatzConfig, Entangler, InitialState, OptimizerConfig, Target};
use tsp_dqes::{load_instance, Bitstring, Format, ProblemInstance, Variant};

/// Seeds tried for the all-zeros start; at least one must converge.
const ZEROS_SEEDS: [u64; 3] = [0, 1, 2];
/// Base seed of the best-MUB and random batches.
const BATCH_SEED: u64 = 0;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> ProblemInstance {
    let path = root().join("fixtures").join(name);
    load_instance(std::fs::File::open(&path).unwrap(), Format::from_path(&path)).unwrap()
}

fn check(ok: bool, message: String) -> Result<String, String> {
    if ok {
        Ok(message)
    } else {
        Err(message)
    }
}

fn counter_example_minimum() -> Result<String, String> {
    let report = audit_penalties(&fixture("counter_example.txt"), DEFAULT_AUDIT_CAP).map_err(|e| e.to_string())?;
    let best = solve_exact_tsp(&fixture("counter_example.txt")).unwrap().optimal_cost;
    check(
        report.minimum == int(14) && !report.minimum_is_valid() && best == Some(int(22)),
        format!(
            "minimum {} (valid: {}), best tour {:?}",
            report.minimum,
            report.minimum_is_valid(),
            best.map(|c| c.to_string())
        ),
    )
}

fn safe_penalties() -> Result<String, String> {
    let instance = fixture("counter_example.txt").with_penalties(int(41), int(1)).unwrap();
    let report = audit_penalties(&instance, DEFAULT_AUDIT_CAP).map_err(|e| e.to_string())?;
    let cost = report.minimizer_decoding.tour().map(|t| t.cost);
    check(
        report.minimum_is_valid() && cost == Some(int(22)),
        format!("minimum {} decodes to tour cost {:?}", report.minimum, cost.map(|c| c.to_string())),
    )
}

fn complete_graph_property() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for case in 0..50 {
        let n = rng.random_range(3..=4usize);
        let edges: Vec<(usize, usize, _)> = (1..=n)
            .flat_map(|u| (u + 1..=n).map(move |v| (u, v)))
            .map(|(u, v)| (u, v, int(rng.random_range(1..=10))))
            .collect();
        let instance = ProblemInstance::new(n, false, Variant::Tsp, edges, int(1), int(1)).unwrap();
        let (a, b) = suggest_penalties(&instance, PenaltyMode::Lucas).unwrap();
        let instance = instance.with_penalties(a, b).unwrap();
        let report = audit_penalties(&instance, DEFAULT_AUDIT_CAP).unwrap();
        let optimum = solve_exact_tsp(&instance).unwrap().optimal_cost;
        let decoded = report.minimizer_decoding.tour().map(|t| t.cost);
        if decoded.is_none() || decoded != optimum || report.minimum != b * optimum.unwrap() {
            failures.push(case);
        }
    }
    check(failures.is_empty(), format!("50 instances, failing cases {failures:?}"))
}

fn qubit_reduction() -> Result<String, String> {
    let instance = fixture("landscape.txt");
    let efficient = encode_efficient(&instance).unwrap().compile();
    let fixed = encode_fixed_start(&instance).unwrap().compile();
    let variables = Layout::Efficient.variable_count(4);
    // Complete each efficient assignment with x[1,1] = 1 and the rest of row and column 1 zero.
    let order = Layout::Efficient.variable_order(4);
    let start = Layout::Full.bit_of(4, (1, 1).into()).unwrap();
    let mismatches = (0..1u64 << variables)
        .filter(|&z| {
            let mut full = 1u64 << start;
            for (bit, var) in order.iter().enumerate() {
                if z >> bit & 1 == 1 {
                    full |= 1 << Layout::Full.bit_of(4, *var).unwrap();
                }
            }
            efficient.value(z) != fixed.value(full)
        })
        .count();
    check(
        variables == 9 && mismatches == 0,
        format!("{variables} variables, {mismatches} of 512 assignments differ"),
    )
}

fn ising_equivalence() -> Result<String, String> {
    let mut mismatches = 0;
    for name in ["landscape.txt", "counter_example.txt"] {
        let poly = encode_tsp_hamiltonian(&fixture(name)).unwrap();
        let binary = poly.compile();
        let spin = to_ising(&poly).compile();
        mismatches += (0..1u64 << 16).filter(|&z| binary.value(z) != spin.energy(z)).count();
    }
    check(mismatches == 0, format!("2 x 65536 assignments, {mismatches} differ"))
}

fn ground_truth() -> Result<String, String> {
    let instance = fixture("landscape.txt");
    let ising = to_ising(&encode_efficient(&instance).unwrap());
    let (ground, states) = ising.ground_states(24).unwrap();
    let mut tours: Vec<String> = states
        .iter()
        .filter_map(|&z| match validate_bitstring(&instance, Layout::Efficient, &Bitstring::from_index(z, 9)) {
            Ok(Decoding::Valid(t)) => Some(t.to_string()),
            _ => None,
        })
        .collect();
    tours.sort();
    check(
        states.len() == 2 && tours == ["1-2-4-3-1", "1-3-4-2-1"] && ground == instance.penalty_b() * int(13),
        format!("{} ground states at {ground}: {tours:?}", states.len()),
    )
}

fn mub_properties() -> Result<String, String> {
    let library = build_mubs_3q();
    let states: Vec<_> = library.iter().collect();
    let mut worst_within = 0.0f64;
    let mut worst_across = 0.0f64;
    let mut cross_pairs = 0;
    for &(b1, e1, s1) in &states {
        for &(b2, e2, s2) in &states {
            let overlap = s1.inner(s2).norm_sqr();
            if b1 == b2 && e1 != e2 {
                worst_within = worst_within.max(overlap);
            } else if b1 != b2 {
                worst_across = worst_across.max((overlap - 0.125).abs());
                cross_pairs += 1;
            }
        }
    }
    check(
        library.bases().len() == 9
            && library.bases().iter().all(|b| b.states().len() == 8)
            && worst_within < 1e-10
            && worst_across < 1e-10
            && cross_pairs == 72 * 64,
        format!("9x8 states, max within-basis overlap {worst_within:.1e}, max cross deviation {worst_across:.1e} over {cross_pairs} pairs"),
    )
}

fn landscape() -> Result<String, String> {
    let ising = to_ising(&encode_efficient(&fixture("landscape.txt")).unwrap());
    let ground = to_f64(&ising.ground_states(24).unwrap().0);
    let records = compute_landscape(&ising).unwrap();
    let min = records.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min);
    let mut patterns: Vec<u64> = records
        .iter()
        .filter(|r| (r.energy - min).abs() <= 1e-9)
        .filter_map(|r| {
            let state = r.initial_state().prepare(9).unwrap();
            (state.support_size() == 1).then(|| state.most_probable())
        })
        .collect();
    patterns.sort();
    patterns.dedup();
    check(
        records.len() == 6048 && (min - ground).abs() <= 1e-9 && patterns.len() == 2,
        format!("{} records, minimum {min} (ground {ground}), {} basis patterns", records.len(), patterns.len()),
    )
}

fn vqe_from_zeros() -> Result<String, String> {
    let ising = to_ising(&encode_efficient(&fixture("landscape.txt")).unwrap());
    let ansatz = AnsatzConfig::new(9, 2, Entangler::LinearRzz).unwrap();
    let outcomes: Vec<String> = ZEROS_SEEDS
        .iter()
        .map(|&seed| {
            let trace = run_vqe(&ising, &InitialState::Zeros, &ansatz, &OptimizerConfig::vqe(), seed, Some(Target::new(13.0))).unwrap();
            let ok = trace.converged == Some(true) && trace.evaluations() <= 2000;
            format!("seed {seed}: {:.6}{}", trace.final_energy, if ok { " converged" } else { "" })
        })
        .collect();
    check(outcomes.iter().any(|o| o.ends_with("converged")), outcomes.join(", "))
}

fn mub_vs_random() -> Result<String, String> {
    let instance = fixture("landscape.txt");
    let config = ExperimentConfig::default();
    let mubs = run_experiment(&instance, ExperimentMode::BestMubs { k: 10 }, &config, BATCH_SEED).unwrap();
    let random = run_experiment(&instance, ExperimentMode::Random { k: 10 }, &config, BATCH_SEED).unwrap();
    let mean = |m: Option<f64>| m.map_or("n/a".to_string(), |m| format!("{m:.1}"));
    check(
        mubs.converged_count() >= 3 && random.converged_count() >= 1,
        format!(
            "best MUBs {}/10 (mean evaluations {}), random {}/10 (mean evaluations {})",
            mubs.converged_count(),
            mean(mubs.mean_iterations_to_convergence()),
            random.converged_count(),
            mean(random.mean_iterations_to_convergence())
        ),
    )
}

fn identity_at_zero() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ansatz = AnsatzConfig::new(9, 2, Entangler::LinearRzz).unwrap();
    let zeros = vec![0.0; ansatz.parameter_count()];
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut amps: Vec<Complex64> =
            (0..512).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let psi = QuantumState::from_amplitudes(amps).unwrap();
        let mut out = psi.clone();
        ansatz.apply(&mut out, &zeros).unwrap();
        worst = worst.max(out.distance(&psi));
    }
    check(worst < 1e-10, format!("100 random states, max distance {worst:.1e}"))
}

fn cli_determinism() -> Result<String, String> {
    let fixture = root().join("fixtures/landscape.txt");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_tsp-dqes"))
            .args(["--log-level", "warn", "vqe"])
            .arg(&fixture)
            .args(["--init", "best-mubs", "10", "--seed", "7", "--no-timestamp"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    check(
        a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout,
        format!("two reports of {} bytes, identical: {}", a.stdout.len(), a.stdout == b.stdout),
    )
}

fn main() {
    type Criterion = (&'static str, u64, fn() -> Result<String, String>);
    let criteria: [Criterion; 12] = [
        ("counter-example minimum is an invalid 14, best tour 22", 5, counter_example_minimum),
        ("safe penalties (A=41) make the minimum a valid tour of cost 22", 5, safe_penalties),
        ("complete graphs with lucas penalties: minimum is an optimal tour", 120, complete_graph_property),
        ("efficient encoding has 9 qubits and matches the fixed-start Hamiltonian", 1, qubit_reduction),
        ("binary and Ising values agree on all 2^16 full-layout assignments", 10, ising_equivalence),
        ("two ground states, tours 1-2-4-3-1 and 1-3-4-2-1, energy B*13", 1, ground_truth),
        ("9 mutually unbiased bases of 8 states", 1, mub_properties),
        ("6048 landscape records, minimum at the ground energy on 2 patterns", 30, landscape),
        ("VQE from |0...0> converges to 13 for a documented seed", 60, vqe_from_zeros),
        ("best-MUB batch >= 3/10 and random batch >= 1/10 converge", 600, mub_vs_random),
        ("ansatz is the identity at zero parameters", 1, identity_at_zero),
        ("vqe command is deterministic for fixed flags and seed", 120, cli_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, budget, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let (status, detail) = match &outcome {
            Ok(d) if in_time => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; over the {budget} s budget")),
            Err(d) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2}: {status} [{:>7.2} s / {budget} s] {name} -- {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
