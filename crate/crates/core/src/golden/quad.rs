//! Exact arithmetic in `Q(√5)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::values::{ratio, Rational};

/// The number `a + b·√5` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadIrr {
    pub a: Rational,
    pub b: Rational,
}

impl QuadIrr {
    pub fn new(a: Rational, b: Rational) -> Self {
        Self { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        Self {
            a,
            b: Rational::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn sqrt5() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    /// `φ = (1 + √5)/2`.
    pub fn phi() -> Self {
        Self::new(ratio(1, 2), ratio(1, 2))
    }

    /// `1/φ = φ - 1 = (√5 - 1)/2`.
    pub fn inv_phi() -> Self {
        Self::new(ratio(-1, 2), ratio(1, 2))
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate `a - b·√5`.
    pub fn conjugate(&self) -> Self {
        Self::new(self.a.clone(), -self.b.clone())
    }

    /// Field norm `a² - 5b²`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * BigInt::from(5)
    }

    /// Exact sign, by case analysis on the signs of `a` and `b` and comparing
    /// `a²` with `5b²` when they differ.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        match (sa, sb) {
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (x, y) if x == y => x,
            // a and b have opposite signs: a + b√5 has the sign of the larger magnitude.
            (x, _) => match self.norm().cmp(&Rational::zero()) {
                Ordering::Greater => x,
                Ordering::Less => x.reverse(),
                Ordering::Equal => unreachable!("√5 is irrational"),
            },
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn inverse(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero in Q(√5)");
        Self::new(&self.a / &n, -&self.b / &n)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        let guess = self.to_f64().floor();
        let mut n = if guess.is_finite() {
            BigInt::from(guess as i128)
        } else {
            self.a.floor().to_integer()
        };
        // Correct the floating guess exactly.
        while self < &Self::rational(Rational::from_integer(n.clone())) {
            n -= 1;
        }
        while self >= &Self::rational(Rational::from_integer(&n + 1)) {
            n += 1;
        }
        n
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * 5f64.sqrt()
    }
}

impl PartialOrd for QuadIrr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadIrr {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl From<Rational> for QuadIrr {
    fn from(a: Rational) -> Self {
        Self::rational(a)
    }
}

impl From<&Rational> for QuadIrr {
    fn from(a: &Rational) -> Self {
        Self::rational(a.clone())
    }
}

impl fmt::Display for QuadIrr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.b.is_negative() {
            write!(f, "{} - {}√5", self.a, -self.b.clone())
        } else {
            write!(f, "{} + {}√5", self.a, self.b)
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, |$x:ident, $y:ident| $body:expr) => {
        impl<'a, 'b> $trait<&'b QuadIrr> for &'a QuadIrr {
            type Output = QuadIrr;
            fn $method(self, rhs: &'b QuadIrr) -> QuadIrr {
                let ($x, $y) = (self, rhs);
                $body
            }
        }
        impl $trait<QuadIrr> for QuadIrr {
            type Output = QuadIrr;
            fn $method(self, rhs: QuadIrr) -> QuadIrr {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $trait<&'b QuadIrr> for QuadIrr {
            type Output = QuadIrr;
            fn $method(self, rhs: &'b QuadIrr) -> QuadIrr {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<QuadIrr> for &'a QuadIrr {
            type Output = QuadIrr;
            fn $method(self, rhs: QuadIrr) -> QuadIrr {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x, y| QuadIrr::new(&x.a + &y.a, &x.b + &y.b));
forward_binop!(Sub, sub, |x, y| QuadIrr::new(&x.a - &y.a, &x.b - &y.b));
forward_binop!(Mul, mul, |x, y| QuadIrr::new(
    &x.a * &y.a + &x.b * &y.b * BigInt::from(5),
    &x.a * &y.b + &x.b * &y.a
));
forward_binop!(Div, div, |x, y| x * &y.inverse());

impl Neg for QuadIrr {
    type Output = QuadIrr;
    fn neg(self) -> QuadIrr {
        QuadIrr::new(-self.a, -self.b)
    }
}
