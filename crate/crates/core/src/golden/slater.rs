//! Closed-form gap law of the Golden Ratio rotation.
//!
//! For an interval of length `p ≤ 1/2`, let `k` be the smallest integer with
//! `(1/φ)^(k+1) ≤ p`. Returns to the interval take `F_{k+1}`, `F_{k+2}` or
//! `F_{k+3}` steps, and the gap straddling a stationary time has
//!
//! ```text
//! P(Z = F_{k+1}) = F_{k+1} · (p - (1/φ)^(k+1))
//! P(Z = F_{k+2}) = F_{k+2} · (p - (1/φ)^(k+2))
//! P(Z = F_{k+3}) = F_{k+3} · ((1/φ)^k - p)
//! ```

use num_traits::Signed;

use super::fib::fib_u64;
use super::quad::QuadIrr;
use crate::error::{Error, Result};
use crate::gaps::GapDistribution;
use crate::values::{ratio, Rational};

/// Three-point gap distribution on consecutive Fibonacci numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlaterDistribution {
    k: usize,
    support: [u64; 3],
    probabilities: [QuadIrr; 3],
}

fn check_range(p: &QuadIrr) -> Result<()> {
    if !p.signum().is_gt() || *p > QuadIrr::rational(ratio(1, 2)) {
        return Err(Error::Precondition(format!(
            "frequency {p} outside (0, 1/2]"
        )));
    }
    Ok(())
}

/// Smallest `k` with `(1/φ)^(k+1) ≤ p`, for `0 < p ≤ 1/2`.
pub fn slater_level(p: &QuadIrr) -> Result<usize> {
    check_range(p)?;
    let inv = QuadIrr::inv_phi();
    let mut power = inv.clone(); // (1/φ)^(k+1) at k = 0
    let mut k = 0;
    while power > *p {
        power = &power * &inv;
        k += 1;
    }
    Ok(k)
}

impl SlaterDistribution {
    /// Gap law for an interval of length `p`; `p` may lie in `Q(√5)`.
    pub fn for_value(p: &QuadIrr) -> Result<Self> {
        let k = slater_level(p)?;
        let inv = QuadIrr::inv_phi();
        let f = |j: usize| QuadIrr::rational(ratio(fib_u64(j) as i64, 1));
        let probabilities = [
            f(k + 1) * (p - inv.pow(k as u32 + 1)),
            f(k + 2) * (p - inv.pow(k as u32 + 2)),
            f(k + 3) * (inv.pow(k as u32) - p),
        ];
        let total = probabilities.iter().fold(QuadIrr::zero(), |acc, x| acc + x);
        if total != QuadIrr::one() || probabilities.iter().any(QuadIrr::is_negative) {
            return Err(Error::InvalidDistribution(format!(
                "three-gap probabilities {probabilities:?} do not form a distribution"
            )));
        }
        Ok(Self {
            k,
            support: [fib_u64(k + 1), fib_u64(k + 2), fib_u64(k + 3)],
            probabilities,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn support(&self) -> [u64; 3] {
        self.support
    }

    pub fn probabilities(&self) -> &[QuadIrr; 3] {
        &self.probabilities
    }

    pub fn probabilities_f64(&self) -> [f64; 3] {
        self.probabilities.clone().map(|p| p.to_f64())
    }

    pub fn to_gap_distribution(&self) -> Result<GapDistribution<f64>> {
        GapDistribution::new(self.support.to_vec(), self.probabilities_f64().to_vec())
    }
}

/// Closed-form gap law of an interval of rational length `p ∈ (0, 1/2]`.
pub fn slater_distribution(p: &Rational) -> Result<SlaterDistribution> {
    if !p.is_positive() {
        return Err(Error::Precondition(format!(
            "frequency {p} outside (0, 1/2]"
        )));
    }
    SlaterDistribution::for_value(&QuadIrr::from(p))
}

/// Quasi-regularity bound `F_{k+3}/F_{k+1}` of a target with frequency `p`.
pub fn golden_quasi_regularity(p: &Rational) -> Result<Rational> {
    let k = slater_level(&QuadIrr::from(p))?;
    Ok(ratio(fib_u64(k + 3) as i64, fib_u64(k + 1) as i64))
}
