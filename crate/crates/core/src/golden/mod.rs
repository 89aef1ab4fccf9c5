//! The Golden Ratio rotation schedule.
//!
//! The unit circle is cut into consecutive half-open intervals
//! `[P_i, P_{i+1})` of lengths `p_i`. At step `t` the defender visits the
//! target whose interval contains `(λ + tφ) mod 1` for a uniform phase `λ`.
//!
//! The phase is a lazily extended bit string: only a dyadic interval
//! `[ℓ/2^k, (ℓ+1)/2^k)` is committed, and a new bit is drawn only when the
//! rotated interval straddles a boundary. Each decision is therefore exact
//! and never revised by later bits.

mod fib;
mod quad;
mod slater;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

pub use fib::{compare_phi, fib, fib_u64};
pub use quad::QuadIrr;
pub use slater::{golden_quasi_regularity, slater_distribution, slater_level, SlaterDistribution};

use crate::error::{Error, Result};
use crate::values::{Rational, ValueVector};

/// Fixed-point scale of the fast membership filter.
const FIXED_BITS: u64 = 128;

/// `floor(2^128 · (φ - 1))`.
fn inv_phi_fixed() -> u128 {
    let one = BigUint::one() << FIXED_BITS as usize;
    let s = (BigUint::from(5u32) << (2 * FIXED_BITS) as usize).sqrt();
    ((s - one) >> 1usize).to_u128().expect("fraction below one")
}

/// Stepping cursor of the Golden Ratio schedule.
#[derive(Clone, Debug)]
pub struct GoldenState {
    boundaries: Vec<Rational>,
    /// `floor(P_i · 2^128)` for `i < n`.
    boundaries_fixed: Vec<u128>,
    phase: BigUint,
    bits: u64,
    step: u64,
    inv_phi: u128,
}

impl GoldenState {
    /// Starts at `t = 0` with no phase bits committed.
    ///
    /// Frequencies must be positive and sum to one; unlike a
    /// [`ValueVector`] an entry may exceed one half.
    pub fn new(frequencies: &[Rational]) -> Result<Self> {
        Self::with_phase(frequencies, BigUint::zero(), 0)
    }

    pub fn from_values(values: &ValueVector) -> Result<Self> {
        Self::new(values.as_slice())
    }

    /// Starts with the phase committed to `[ℓ/2^bits, (ℓ+1)/2^bits)`.
    pub fn with_phase(frequencies: &[Rational], prefix: BigUint, bits: u64) -> Result<Self> {
        if frequencies.is_empty() || frequencies.iter().any(|p| !p.is_positive()) {
            return Err(Error::InvalidValues("frequencies must be positive".into()));
        }
        let total: Rational = frequencies.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidValues(format!(
                "frequencies sum to {total}, not 1"
            )));
        }
        if prefix.bits() > bits {
            return Err(Error::InvalidValues(format!(
                "phase prefix {prefix} exceeds {bits} bits"
            )));
        }
        let mut boundaries = Vec::with_capacity(frequencies.len() + 1);
        let mut acc = Rational::zero();
        boundaries.push(acc.clone());
        for p in frequencies {
            acc += p;
            boundaries.push(acc.clone());
        }
        let boundaries_fixed = boundaries[..frequencies.len()]
            .iter()
            .map(|b| {
                let scaled = (b.numer() << FIXED_BITS as usize) / b.denom();
                scaled.to_u128().expect("boundary below one")
            })
            .collect();
        Ok(Self {
            boundaries,
            boundaries_fixed,
            phase: prefix,
            bits,
            step: 0,
            inv_phi: inv_phi_fixed(),
        })
    }

    pub fn targets(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// `P_0 = 0 < P_1 < … < P_n = 1`.
    pub fn boundaries(&self) -> &[Rational] {
        &self.boundaries
    }

    /// Committed phase prefix `ℓ` and its length `k` in bits.
    pub fn phase(&self) -> (&BigUint, u64) {
        (&self.phase, self.bits)
    }

    /// Index of the next step.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Target visited at the current step; advances the cursor.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let target = match self.resolve_fixed() {
            Some(i) => i,
            None => self.resolve_exact(rng),
        };
        self.step += 1;
        target
    }

    /// The next `steps` visits.
    pub fn trajectory<R: Rng + ?Sized>(&mut self, steps: usize, rng: &mut R) -> Vec<usize> {
        (0..steps).map(|_| self.step(rng)).collect()
    }

    fn extend<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.phase <<= 1usize;
        if rng.gen::<bool>() {
            self.phase += 1u32;
        }
        self.bits += 1;
    }

    /// Membership decided in 128-bit fixed point, or `None` when the
    /// rounding margin touches a boundary.
    fn resolve_fixed(&self) -> Option<usize> {
        if self.bits == 0 || self.bits > FIXED_BITS {
            return None;
        }
        let shift = FIXED_BITS - self.bits;
        let lambda = self.phase.to_u128()? << shift;
        // The true value of t(φ-1)·2^128 mod 2^128 lies in [rot, rot + t).
        let rot = self.inv_phi.wrapping_mul(self.step as u128);
        let lo = lambda.wrapping_add(rot);
        let span = (1u128 << shift).checked_add(self.step as u128 + 1)?;
        let hi = lo.checked_add(span)?;
        // floor(P_i·2^128) < lo guarantees P_i ≤ point.
        let i = self
            .boundaries_fixed
            .partition_point(|&b| b < lo)
            .checked_sub(1)?;
        match self.boundaries_fixed.get(i + 1) {
            Some(&next) if hi > next => None,
            _ => Some(i),
        }
    }

    fn resolve_exact<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let n = self.targets();
        let rotation = QuadIrr::phi() * QuadIrr::rational(Rational::from_integer(self.step.into()));
        loop {
            let scale = num_bigint::BigInt::one() << self.bits as usize;
            let lambda = Rational::new(self.phase.clone().into(), scale.clone());
            let y = QuadIrr::from(lambda) + &rotation;
            let a = &y - QuadIrr::rational(Rational::from_integer(y.floor()));
            let i = self.boundaries[..n].partition_point(|b| QuadIrr::from(b) <= a) - 1;
            let hi = a + QuadIrr::rational(Rational::new(num_bigint::BigInt::one(), scale));
            if hi <= QuadIrr::from(&self.boundaries[i + 1]) {
                return i;
            }
            self.extend(rng);
        }
    }
}
