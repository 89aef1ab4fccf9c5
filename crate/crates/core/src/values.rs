use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

/// Builds `num/den` as a [`Rational`].
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"`, `"a"` or a finite decimal such as `"0.3"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidValues(format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidValues(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int = if int.is_empty() || int == "-" {
            "0"
        } else {
            int
        };
        let whole = BigInt::from_str(int).map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mut digits = BigInt::from_str(frac).map_err(|_| bad())?;
        if negative {
            digits = -digits;
        }
        return Ok(Rational::new(whole * &scale + digits, scale));
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Target values `α_i`: positive, summing to exactly one, each at most `1/2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueVector {
    values: Vec<Rational>,
}

impl ValueVector {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        check_distribution(&values)?;
        let half = ratio(1, 2);
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| **v > half) {
            return Err(Error::InvalidValues(format!(
                "value {v} of target {i} exceeds 1/2"
            )));
        }
        Ok(Self { values })
    }

    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let values = items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, target: usize) -> &Rational {
        &self.values[target]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.values.iter()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Least common multiple of the denominators.
    pub fn common_denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.values
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
    }
}

impl fmt::Display for ValueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Checks that `values` is a non-empty probability vector with positive entries.
pub(crate) fn check_distribution(values: &[Rational]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidValues("no targets".into()));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_positive()) {
        return Err(Error::InvalidValues(format!(
            "value {v} of target {i} is not positive"
        )));
    }
    let total: Rational = values.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidValues(format!(
            "values sum to {total}, not 1"
        )));
    }
    Ok(())
}
