//! Unbiased randomized rounding of a probability vector onto dyadic
//! interval endpoints.
//!
//! Each value `p_i` is assigned the interval `[2^-m_i, 2^(1-m_i)]` containing
//! it. Pairs of interior coordinates are repeatedly moved in opposite
//! directions until at most one coordinate is strictly inside its interval.
//! Every move preserves the sum and the expectation of both coordinates.
//!
//! Pair order: the two lowest-indexed interior coordinates are always
//! rounded first, so sampling and exact enumeration walk the same tree.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::values::{Rational, ValueVector};

/// Largest vector length accepted by [`enumerate_outcomes`].
pub const MAX_ENUMERATION_TARGETS: usize = 20;

/// `2^-m` as a rational.
pub fn pow2_neg(m: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << m as usize)
}

/// Whether `x` is a (positive, possibly negative-exponent) power of two.
pub fn is_power_of_two(x: &Rational) -> bool {
    fn pow2(n: &BigInt) -> bool {
        n.is_positive() && (n & (n - BigInt::one())).is_zero()
    }
    x.is_positive()
        && (x.numer().is_one() && pow2(x.denom()) || x.denom().is_one() && pow2(x.numer()))
}

/// The dyadic interval `[2^-m, 2^(1-m)]` with `2^-m ≤ p < 2^(1-m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicInterval {
    pub m: u32,
    pub lo: Rational,
    pub hi: Rational,
}

impl DyadicInterval {
    pub fn containing(p: &Rational) -> Result<Self> {
        if !p.is_positive() || *p > Rational::one() {
            return Err(Error::Precondition(format!("{p} is not in (0, 1]")));
        }
        let mut m = 0;
        while *p < pow2_neg(m) {
            m += 1;
        }
        Ok(Self {
            m,
            lo: pow2_neg(m),
            hi: pow2_neg(m) * BigInt::from(2),
        })
    }

    pub fn is_interior(&self, x: &Rational) -> bool {
        self.lo < *x && *x < self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }
}

pub fn dyadic_intervals(p: &ValueVector) -> Result<Vec<DyadicInterval>> {
    p.iter().map(DyadicInterval::containing).collect()
}

/// One branch of a rounding step: the new pair and its probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepBranch {
    pub p_i: Rational,
    pub p_j: Rational,
    pub probability: Rational,
}

/// The two outcomes of rounding an interior pair.
///
/// With `ε` the distance of each coordinate above its lower endpoint,
/// `δ_i = min(ε_i, r_j - ℓ_j - ε_j)` and `δ_j = min(ε_j, r_i - ℓ_i - ε_i)`:
/// `(p_i - δ_i, p_j + δ_i)` with probability `δ_j/(δ_i+δ_j)`, otherwise
/// `(p_i + δ_j, p_j - δ_j)`.
pub fn round_step(
    p_i: &Rational,
    p_j: &Rational,
    interval_i: &DyadicInterval,
    interval_j: &DyadicInterval,
) -> Result<[StepBranch; 2]> {
    if !interval_i.is_interior(p_i) || !interval_j.is_interior(p_j) {
        return Err(Error::Precondition(format!(
            "round_step needs interior coordinates, got {p_i} and {p_j}"
        )));
    }
    let eps_i = p_i - &interval_i.lo;
    let eps_j = p_j - &interval_j.lo;
    let room_i = &interval_i.hi - p_i;
    let room_j = &interval_j.hi - p_j;
    let delta_i = eps_i.min(room_j);
    let delta_j = eps_j.min(room_i);
    let total = &delta_i + &delta_j;
    let down = &delta_j / &total;
    let up = &delta_i / &total;
    Ok([
        StepBranch {
            p_i: p_i - &delta_i,
            p_j: p_j + &delta_i,
            probability: down,
        },
        StepBranch {
            p_i: p_i + &delta_j,
            p_j: p_j - &delta_j,
            probability: up,
        },
    ])
}

/// Bernoulli draw with exact rational success probability, resolved against a
/// uniform 128-bit dyadic fraction.
pub fn bernoulli<R: Rng + ?Sized>(probability: &Rational, rng: &mut R) -> bool {
    let u = BigInt::from(BigUint::from(rng.gen::<u128>()));
    // u / 2^128 < num / den
    (u * probability.denom()) < (probability.numer() << 128usize)
}

/// Samples one branch of [`round_step`].
pub fn sample_round_step<R: Rng + ?Sized>(
    p_i: &Rational,
    p_j: &Rational,
    interval_i: &DyadicInterval,
    interval_j: &DyadicInterval,
    rng: &mut R,
) -> Result<StepBranch> {
    let [down, up] = round_step(p_i, p_j, interval_i, interval_j)?;
    Ok(if bernoulli(&down.probability, rng) {
        down
    } else {
        up
    })
}

/// A rounded vector and the probability of producing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingOutcome {
    pub q: Vec<Rational>,
    pub weight: Rational,
}

impl RoundingOutcome {
    /// Index of the coordinate left strictly inside its interval, if any.
    pub fn interior_index(&self, intervals: &[DyadicInterval]) -> Option<usize> {
        self.q
            .iter()
            .zip(intervals)
            .position(|(q, iv)| iv.is_interior(q))
    }
}

fn interior_pair(q: &[Rational], intervals: &[DyadicInterval]) -> Option<(usize, usize)> {
    let mut it = q
        .iter()
        .zip(intervals)
        .enumerate()
        .filter(|(_, (x, iv))| iv.is_interior(x))
        .map(|(i, _)| i);
    Some((it.next()?, it.next()?))
}

/// Draws a rounded vector; `weight` is the probability of the path taken.
pub fn round_to_dyadic<R: Rng + ?Sized>(p: &ValueVector, rng: &mut R) -> Result<RoundingOutcome> {
    let intervals = dyadic_intervals(p)?;
    let mut q = p.as_slice().to_vec();
    let mut weight = Rational::one();
    while let Some((i, j)) = interior_pair(&q, &intervals) {
        let branch = sample_round_step(&q[i], &q[j], &intervals[i], &intervals[j], rng)?;
        weight *= &branch.probability;
        q[i] = branch.p_i;
        q[j] = branch.p_j;
    }
    Ok(RoundingOutcome { q, weight })
}

/// Every rounded vector with its exact probability.
///
/// Identical vectors reached along different paths are merged; outcomes are
/// listed in depth-first order of the rounding tree, "down" branch first.
pub fn enumerate_outcomes(p: &ValueVector) -> Result<Vec<RoundingOutcome>> {
    if p.len() > MAX_ENUMERATION_TARGETS {
        return Err(Error::TooManyCoordinates(p.len()));
    }
    let intervals = dyadic_intervals(p)?;
    let mut outcomes: Vec<RoundingOutcome> = Vec::new();
    let mut index: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut stack = vec![(p.as_slice().to_vec(), Rational::one())];
    while let Some((q, weight)) = stack.pop() {
        match interior_pair(&q, &intervals) {
            Some((i, j)) => {
                let branches = round_step(&q[i], &q[j], &intervals[i], &intervals[j])?;
                for b in branches.into_iter().rev() {
                    if b.probability.is_zero() {
                        continue;
                    }
                    let mut next = q.clone();
                    next[i] = b.p_i;
                    next[j] = b.p_j;
                    stack.push((next, &weight * &b.probability));
                }
            }
            None => match index.get(&q) {
                Some(&k) => outcomes[k].weight += weight,
                None => {
                    index.insert(q.clone(), outcomes.len());
                    outcomes.push(RoundingOutcome { q, weight });
                }
            },
        }
    }
    Ok(outcomes)
}
