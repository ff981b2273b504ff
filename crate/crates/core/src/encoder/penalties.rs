use std::str::FromStr;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{encode_tsp_hamiltonian, Layout};
use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::graph::ProblemInstance;
use crate::oracle::{validate_bitstring, Decoding, Tour};
use crate::rational::{self, int, Rational};

/// Default limit on the number of full-layout variables [`audit_penalties`] enumerates.
pub const DEFAULT_AUDIT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyMode {
    /// `A = max(c) + 1`, `B = 1`: satisfies `0 < B max(c) < A`.
    Lucas,
    /// `A = N max(c) + 1`, `B = 1`: satisfies `0 < N B max(c) < A`.
    Safe,
}

impl FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lucas" => Ok(PenaltyMode::Lucas),
            "safe" => Ok(PenaltyMode::Safe),
            other => Err(Error::Validation(format!("unknown penalty mode `{other}`"))),
        }
    }
}

/// Closed-form `(A, B)` for `mode`.
pub fn suggest_penalties(instance: &ProblemInstance, mode: PenaltyMode) -> Result<(Rational, Rational)> {
    let max_cost = instance
        .max_cost()
        .ok_or_else(|| Error::Precondition("penalties need at least one edge".into()))?;
    let b = int(1);
    let a = match mode {
        PenaltyMode::Lucas => b * max_cost + 1,
        PenaltyMode::Safe => int(instance.node_count() as i64) * b * max_cost + 1,
    };
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PenaltyConditions {
    /// `0 < B max(c) < A`
    pub lucas: bool,
    /// `0 < N B max(c) < A`
    pub safe: bool,
}

/// Which of the two sufficient-looking conditions the instance's penalties meet.
///
/// With all costs zero the left inequality cannot hold; the conditions are
/// then reported as met whenever `A, B > 0`.
pub fn penalty_conditions(instance: &ProblemInstance) -> PenaltyConditions {
    let a = instance.penalty_a();
    let b = instance.penalty_b();
    let max_cost = instance.max_cost().unwrap_or_else(Rational::zero);
    let n = int(instance.node_count() as i64);
    let holds = |lhs: Rational| {
        if max_cost.is_zero() {
            a.is_positive() && b.is_positive()
        } else {
            lhs.is_positive() && lhs < a
        }
    };
    PenaltyConditions {
        lucas: holds(b * max_cost),
        safe: holds(n * b * max_cost),
    }
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub variables: usize,
    pub penalty_a: Rational,
    pub penalty_b: Rational,
    /// Exhaustive minimum of the full-layout TSP Hamiltonian.
    pub minimum: Rational,
    /// Lowest-index assignment achieving [`AuditReport::minimum`].
    pub minimizer: Bitstring,
    pub minimizer_count: u64,
    pub minimizer_decoding: Decoding,
    pub all_minimizers_valid: bool,
    /// Lowest Hamiltonian value over assignments that decode to valid tours.
    pub best_valid_value: Option<Rational>,
    pub best_valid_tour: Option<Tour>,
    pub conditions: PenaltyConditions,
}

impl AuditReport {
    pub fn minimum_is_valid(&self) -> bool {
        self.minimizer_decoding.is_valid()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "variables": self.variables,
            "penalty_a": rational::to_json(&self.penalty_a),
            "penalty_b": rational::to_json(&self.penalty_b),
            "minimum": rational::to_json(&self.minimum),
            "minimizer": self.minimizer.to_string(),
            "minimizer_count": self.minimizer_count,
            "minimum_is_valid": self.minimum_is_valid(),
            "all_minimizers_valid": self.all_minimizers_valid,
            "minimizer_decoding": self.minimizer_decoding.to_json(),
            "best_valid_value": self.best_valid_value.as_ref().map(rational::to_json),
            "best_valid_tour": self.best_valid_tour.as_ref().map(Tour::to_json),
            "lucas_condition": self.conditions.lucas,
            "safe_condition": self.conditions.safe,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct ChunkSummary {
    min: i64,
    argmin: u64,
    count: u64,
    invalid_minimizer: bool,
    best_valid: Option<(i64, u64)>,
}

/// Brute-forces the full-layout TSP Hamiltonian and reports whether its
/// global minimum is a valid tour.
pub fn audit_penalties(instance: &ProblemInstance, cap: usize) -> Result<AuditReport> {
    let poly = encode_tsp_hamiltonian(instance)?;
    let n = instance.node_count();
    let variables = poly.variable_count();
    if variables > cap.min(63) {
        return Err(Error::SizeCap {
            what: "penalty audit enumeration",
            size: variables,
            cap: cap.min(63),
        });
    }
    let compiled = poly.compile();
    let total: u64 = 1 << variables;
    let chunk = (total / 256).max(1);

    let is_valid = |index: u64| {
        index.count_ones() as usize == n
            && validate_bitstring(instance, Layout::Full, &Bitstring::from_index(index, variables))
                .map(|d| d.is_valid())
                .unwrap_or(false)
    };

    let summaries: Vec<ChunkSummary> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut s = ChunkSummary {
                min: i64::MAX,
                argmin: 0,
                count: 0,
                invalid_minimizer: false,
                best_valid: None,
            };
            for index in c * chunk..((c + 1) * chunk).min(total) {
                let value = compiled.scaled_value(index);
                if value < s.min {
                    s.min = value;
                    s.argmin = index;
                    s.count = 1;
                    s.invalid_minimizer = !is_valid(index);
                } else if value == s.min {
                    s.count += 1;
                    s.invalid_minimizer |= !is_valid(index);
                }
                let improves = s.best_valid.is_none_or(|(best, _)| value < best);
                if improves && is_valid(index) {
                    s.best_valid = Some((value, index));
                }
            }
            s
        })
        .collect();

    let min = summaries.iter().map(|s| s.min).min().expect("non-empty enumeration");
    let winners: Vec<&ChunkSummary> = summaries.iter().filter(|s| s.min == min).collect();
    let argmin = winners[0].argmin;
    let best_valid = summaries
        .iter()
        .filter_map(|s| s.best_valid)
        .min_by_key(|&(value, index)| (value, index));

    let scale = compiled.scale();
    let minimizer = Bitstring::from_index(argmin, variables);
    Ok(AuditReport {
        variables,
        penalty_a: instance.penalty_a(),
        penalty_b: instance.penalty_b(),
        minimum: Rational::new(min, scale),
        minimizer_decoding: validate_bitstring(instance, Layout::Full, &minimizer)?,
        minimizer,
        minimizer_count: winners.iter().map(|s| s.count).sum(),
        all_minimizers_valid: winners.iter().all(|s| !s.invalid_minimizer),
        best_valid_value: best_valid.map(|(value, _)| Rational::new(value, scale)),
        best_valid_tour: best_valid.and_then(|(_, index)| {
            validate_bitstring(instance, Layout::Full, &Bitstring::from_index(index, variables))
                .ok()
                .and_then(|d| d.tour().cloned())
        }),
        conditions: penalty_conditions(instance),
    })
}
