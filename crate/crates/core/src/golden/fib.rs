use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Fibonacci numbers with `F_0 = 0`, `F_1 = 1`.
pub fn fib(k: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::zero(), BigUint::one());
    for _ in 0..k {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

/// `F_k` as a machine integer; panics past `F_93`.
pub fn fib_u64(k: usize) -> u64 {
    fib(k).to_u64().expect("Fibonacci number exceeds u64")
}

/// Sign of `N/D - φ`, exactly.
///
/// `φ` is the positive root of `x² - x - 1`, so for `N ≥ 0` the sign of
/// `N/D - φ` is the sign of `N² - ND - D²`. The result is never `Equal`.
pub fn compare_phi(n: &BigInt, d: &BigInt) -> Result<Ordering> {
    if !d.is_positive() {
        return Err(Error::Precondition(format!(
            "denominator {d} must be positive"
        )));
    }
    if n.is_negative() {
        return Ok(Ordering::Less);
    }
    let s = n * n - n * d - d * d;
    Ok(match s.sign() {
        num_bigint::Sign::Plus => Ordering::Greater,
        num_bigint::Sign::Minus => Ordering::Less,
        num_bigint::Sign::NoSign => unreachable!("φ is irrational"),
    })
}
