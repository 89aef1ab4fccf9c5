//! Proptest generators shared by unit tests.

use num_bigint::BigInt;
use proptest::prelude::*;

use crate::values::{Rational, ValueVector};

/// Value vectors of `2..=max_n` targets with denominators below `20·max_n`.
pub fn value_vectors(max_n: usize) -> impl Strategy<Value = ValueVector> {
    prop::collection::vec(1u32..20, 2..=max_n)
        .prop_filter("no weight above half the total", |w| {
            let total: u32 = w.iter().sum();
            w.iter().all(|&x| 2 * x <= total)
        })
        .prop_map(|w| {
            let total: u32 = w.iter().sum();
            let values = w
                .iter()
                .map(|&x| Rational::new(BigInt::from(x), BigInt::from(total)))
                .collect();
            ValueVector::new(values).expect("filtered to valid values")
        })
}
