//! Exact rational scalars used for costs, penalties and polynomial
//! coefficients, plus their text and JSON representations.
//!
//! Integral values are written as plain integers, everything else as
//! `"p/q"` strings. Inputs additionally accept finite decimals (`2.5`).

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde_json::Value;

pub type Rational = num_rational::Ratio<i64>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"7"`, `"-3/4"` or a finite decimal such as `"2.125"`.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let whole: i64 = if whole_digits.is_empty() {
            0
        } else {
            whole_digits.parse().ok()?
        };
        let scale = 10i64.checked_pow(frac.len() as u32)?;
        let frac: i64 = frac.parse().ok()?;
        let magnitude = whole.checked_mul(scale)?.checked_add(frac)?;
        let num = if negative { -magnitude } else { magnitude };
        return Some(Rational::new(num, scale));
    }
    text.parse::<i64>().ok().map(Rational::from_integer)
}

pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_json(r: &Rational) -> Value {
    if r.is_integer() {
        Value::from(*r.numer())
    } else {
        Value::from(format(r))
    }
}

pub fn from_json(value: &Value) -> Option<Rational> {
    match value {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(int(i))
            } else {
                // serde_json prints the shortest round-tripping decimal.
                parse(&n.to_string())
            }
        }
        Value::String(s) => parse(s),
        _ => None,
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values
        .into_iter()
        .fold(1i64, |acc, r| acc.lcm(r.denom()))
}

/// `r * scale` as an integer; `scale` must be a multiple of the denominator.
pub(crate) fn scaled(r: &Rational, scale: i64) -> i64 {
    debug_assert!(scale % r.denom() == 0);
    r.numer() * (scale / r.denom())
}
