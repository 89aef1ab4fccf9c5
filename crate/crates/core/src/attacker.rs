//! Attacker best responses.
//!
//! Attacking target `i` for duration `t` succeeds when the defender does not
//! return within `t`, so the attacker's utility is `u(t) = α_i·t·(1 - F_i(t))`.
//! On each linear piece `F(t) = c + s·t` this is a concave quadratic with
//! vertex `(1 - c)/(2s)`; the global maximum is among the clamped vertices
//! and piece endpoints. Past the largest gap `F = 1` and `u = 0`.

use std::f64::consts::E;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::gaps::{GapDistribution, PiecewiseLinearCdf};
use crate::golden::{fib, slater_level, QuadIrr, SlaterDistribution};
use crate::scalar::Scalar;
use crate::values::{ratio, Rational};

/// Attacker's optimal duration against one target.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackerResponse {
    pub target: usize,
    pub t_star: f64,
    pub utility: f64,
    /// `utility / (1/4)`; one at the value of the game.
    pub ratio_to_quarter: f64,
}

impl AttackerResponse {
    fn new(target: usize, t_star: f64, utility: f64) -> Self {
        Self {
            target,
            t_star,
            utility,
            ratio_to_quarter: 4.0 * utility,
        }
    }
}

/// Maximizer `(t*, u(t*))` of `α·t·(1 - F(t))`, smallest `t*` on ties.
///
/// Exact when `W` is [`Rational`]: every candidate is rational.
pub fn maximize_utility<W: Scalar>(value: &W, cdf: &PiecewiseLinearCdf<W>) -> (W, W) {
    let utility = |t: &W, f: &W| value.clone() * t.clone() * (W::one() - f.clone());
    let mut best = (W::zero(), W::zero());
    let mut consider = |t: W, f: W| {
        let u = utility(&t, &f);
        if u > best.1 {
            best = (t, u);
        }
    };
    for piece in cdf.breakpoints().windows(2) {
        let ((x0, f0), (x1, f1)) = (&piece[0], &piece[1]);
        let slope = (f1.clone() - f0.clone()) / (x1.clone() - x0.clone());
        consider(x0.clone(), f0.clone());
        if slope > W::zero() {
            let intercept = f0.clone() - slope.clone() * x0.clone();
            let two = W::one() + W::one();
            let vertex = (W::one() - intercept.clone()) / (two * slope.clone());
            if vertex > *x0 && vertex < *x1 {
                let f = intercept + slope * vertex.clone();
                consider(vertex, f);
            }
        }
        consider(x1.clone(), f1.clone());
    }
    best
}

/// Best response against target `target` of value `value` with CDF `cdf`.
pub fn best_response<W: Scalar>(
    target: usize,
    value: &W,
    cdf: &PiecewiseLinearCdf<W>,
) -> AttackerResponse {
    let (t, u) = maximize_utility(value, cdf);
    AttackerResponse::new(target, t.as_f64(), u.as_f64())
}

/// The two closed-form utility bounds against a three-point gap law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreePointBound {
    /// `α·E/4`, the utility against a regular schedule.
    pub u1: f64,
    /// Vertex utility on the piece `[x1, x2]`.
    pub u2: f64,
    pub max: f64,
}

fn check_spacing(x: [u64; 3]) -> Result<()> {
    if !(x[0] > 0 && x[0] < x[1] && x[1] < x[2] && x[1] <= 2 * x[0] && x[2] <= 2 * x[1]) {
        return Err(Error::Precondition(format!(
            "gaps {x:?} must satisfy x1 < x2 < x3, x2 ≤ 2·x1, x3 ≤ 2·x2"
        )));
    }
    Ok(())
}

/// Upper bound `max(u1*, u2*)` on the attacker's utility against gaps
/// `x` with probabilities `probs`.
///
/// With `q_j = P(Z = x_j)·E/x_j`, `u2* = (α/4)·(E - q1·x1)²/(E·(1 - q1))`,
/// taken as zero when `q1 = 1`.
pub fn three_point_utility(alpha: f64, x: [u64; 3], probs: [f64; 3]) -> Result<ThreePointBound> {
    check_spacing(x)?;
    let dist = GapDistribution::new(x.to_vec(), probs.to_vec())?;
    let e = dist.expected_absence();
    let q1 = dist.defender_weights()[0];
    let u1 = alpha * e / 4.0;
    let u2 = if q1 >= 1.0 {
        0.0
    } else {
        alpha / 4.0 * (e - q1 * x[0] as f64).powi(2) / (e * (1.0 - q1))
    };
    Ok(ThreePointBound {
        u1,
        u2,
        max: u1.max(u2),
    })
}

/// Exact `u2*/u1* = (E - q1·x1)²/(E²·(1 - q1))` for a three-point law in `Q(√5)`.
pub fn three_point_ratio_exact(x: [u64; 3], probs: &[QuadIrr; 3]) -> Result<QuadIrr> {
    check_spacing(x)?;
    let xs = x.map(|g| QuadIrr::rational(ratio(g as i64, 1)));
    let p = probs
        .iter()
        .zip(&xs)
        .fold(QuadIrr::zero(), |acc, (pr, xj)| acc + pr / xj);
    if !p.signum().is_gt() {
        return Err(Error::InvalidDistribution("zero visit frequency".into()));
    }
    let e = p.inverse();
    let q1 = &probs[0] * &e / &xs[0];
    let rest = QuadIrr::one() - &q1;
    if !rest.signum().is_gt() {
        return Ok(QuadIrr::zero());
    }
    let gap = &e - &q1 * &xs[0];
    Ok(&gap * &gap / (&e * &e * rest))
}

/// `α·(1/φ)^(k+1)·(F_{k+2} + φ·F_{k+1} - α·φ^(k+1)·F_{k+1})²`, the ratio
/// `u2*/u1*` of the Golden Ratio gap law at level `k` as a function of `α = p`.
pub fn fibonacci_ratio(k: usize, alpha: &QuadIrr) -> QuadIrr {
    let phi = QuadIrr::phi();
    let f = |j: usize| QuadIrr::rational(Rational::from_integer(BigInt::from(fib(j))));
    let inner = f(k + 2) + &phi * f(k + 1) - alpha * phi.pow(k as u32 + 1) * f(k + 1);
    alpha * QuadIrr::inv_phi().pow(k as u32 + 1) * &inner * &inner
}

/// Stationary point `α = (F_{k+2} + φ·F_{k+1})/(3·φ^(k+1)·F_{k+1})` of
/// [`fibonacci_ratio`] at level `k`.
pub fn fibonacci_ratio_candidate(k: usize) -> QuadIrr {
    let phi = QuadIrr::phi();
    let f = |j: usize| QuadIrr::rational(Rational::from_integer(BigInt::from(fib(j))));
    (f(k + 2) + &phi * f(k + 1))
        / (QuadIrr::rational(ratio(3, 1)) * phi.pow(k as u32 + 1) * f(k + 1))
}

/// Largest attacker-to-optimum ratio against the Golden Ratio schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenWorstCase {
    pub alpha: f64,
    pub ratio: f64,
    pub k: usize,
    /// The maximizer in closed form, when it is an exact candidate.
    pub alpha_exact: Option<QuadIrr>,
}

/// Grid resolution of [`golden_ratio_worstcase`].
pub const GOLDEN_GRID_STEP: f64 = 1e-5;
/// Levels searched for exact stationary points.
pub const GOLDEN_MAX_LEVEL: usize = 30;

/// `u2*/u1*` of the three-point law with `p = α`, in floating point.
pub fn golden_ratio_at(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::Precondition(format!(
            "value {alpha} outside (0, 1/2]"
        )));
    }
    let inv = 1.0 / ((1.0 + 5f64.sqrt()) / 2.0);
    let mut k = 0;
    while inv.powi(k as i32 + 1) > alpha {
        k += 1;
    }
    let x =
        [fib(k + 1), fib(k + 2), fib(k + 3)].map(|f| f.to_string().parse::<u64>().expect("small"));
    let probs = [
        x[0] as f64 * (alpha - inv.powi(k as i32 + 1)),
        x[1] as f64 * (alpha - inv.powi(k as i32 + 2)),
        x[2] as f64 * (inv.powi(k as i32) - alpha),
    ]
    .map(|p| p.max(0.0));
    let total: f64 = probs.iter().sum();
    let probs = probs.map(|p| p / total);
    let bound = three_point_utility(alpha, x, probs)?;
    Ok(bound.u2 / bound.u1)
}

/// `1 - 1/φ`: values at or below it have gap laws at level `k ≥ 2`.
pub const SMALL_VALUE_BOUND: f64 = 0.381_966_011_250_105_1;

/// Worst case over `α ∈ (0, 1/2]`.
///
/// The top level `k = 1` (gaps 1, 2, 3) dominates, peaking near
/// `α ≈ 0.4607`; see [`golden_ratio_worstcase_within`] for smaller values.
pub fn golden_ratio_worstcase() -> GoldenWorstCase {
    golden_ratio_worstcase_within(0.5)
}

/// Sweeps `α` over `(0, max_alpha]` on a `1e-5` grid together with the
/// exact stationary points of every level `k ≤ 30` lying inside their level.
pub fn golden_ratio_worstcase_within(max_alpha: f64) -> GoldenWorstCase {
    let mut best = GoldenWorstCase {
        alpha: max_alpha,
        ratio: f64::NEG_INFINITY,
        k: 0,
        alpha_exact: None,
    };
    let steps = (0.5 / GOLDEN_GRID_STEP).round() as i64;
    for j in 1..=steps {
        let alpha = j as f64 * GOLDEN_GRID_STEP;
        if alpha > max_alpha {
            break;
        }
        if let Ok(r) = golden_ratio_at(alpha) {
            if r > best.ratio {
                let k = slater_level(&QuadIrr::rational(ratio(j, steps * 2))).unwrap_or(0);
                best = GoldenWorstCase {
                    alpha,
                    ratio: r,
                    k,
                    alpha_exact: None,
                };
            }
        }
    }
    for k in 1..=GOLDEN_MAX_LEVEL {
        let alpha = fibonacci_ratio_candidate(k);
        if alpha.to_f64() > max_alpha
            || alpha > QuadIrr::rational(ratio(1, 2))
            || slater_level(&alpha).ok() != Some(k)
        {
            continue;
        }
        let Ok(law) = SlaterDistribution::for_value(&alpha) else {
            continue;
        };
        let Ok(exact) = three_point_ratio_exact(law.support(), law.probabilities()) else {
            continue;
        };
        let r = exact.to_f64();
        if r > best.ratio {
            best = GoldenWorstCase {
                alpha: alpha.to_f64(),
                ratio: r,
                k,
                alpha_exact: Some(alpha),
            };
        }
    }
    best
}

/// Relaxed best response `(t*, utility)` against i.i.d. visits with
/// probability `p ∈ (0, 1)` per step: `t* = -1/ln(1 - p)`, `u = p·t*/e`.
pub fn iid_attack(p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!(
            "probability {p} outside (0, 1)"
        )));
    }
    let t_star = -1.0 / (-p).ln_1p();
    Ok((t_star, p * t_star / E))
}

/// Best response against the i.i.d. schedule visiting with probability `p = α`.
pub fn iid_best_response(target: usize, p: f64) -> Result<AttackerResponse> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Precondition(format!("value {p} outside (0, 1/2]")));
    }
    let (t, u) = iid_attack(p)?;
    Ok(AttackerResponse::new(target, t, u))
}

/// Supremum over `p` of the i.i.d. ratio, approached as `p → 0`.
pub fn iid_worst_ratio() -> f64 {
    (1..=80)
        .map(|j| 0.5 * 0.8f64.powi(j))
        .filter(|&p| p >= 1e-8)
        .filter_map(|p| iid_best_response(0, p).ok())
        .map(|r| r.ratio_to_quarter)
        .fold(f64::NEG_INFINITY, f64::max)
}
