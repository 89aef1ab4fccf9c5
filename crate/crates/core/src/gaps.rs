//! Time-between-visits distributions and the attacker-facing return-time CDF.
//!
//! A [`GapDistribution`] is the law of the gap straddling a stationary random
//! time, which is size-biased relative to the per-cycle gap frequencies: a gap
//! of length `g` occurring `c` times per period of length `T` has probability
//! `g·c/T`. Conditioned on the straddling gap `Z`, the return time is uniform
//! on `[0, Z]`, so the return-time CDF is `F(t) = E[min(1, t/Z)]`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::{trajectory_gaps, PeriodicSequence};
use crate::values::Rational;

/// Distribution of the time between visits `Z` as seen at a stationary time.
#[derive(Clone, Debug, PartialEq)]
pub struct GapDistribution<W: Scalar = Rational> {
    support: Vec<u64>,
    probabilities: Vec<W>,
    frequency: W,
}

impl<W: Scalar> GapDistribution<W> {
    /// Builds a distribution from a strictly ascending positive support and
    /// non-negative probabilities summing to one.
    ///
    /// The visit frequency is derived as `Σ P(Z=x)/x`, which for a sequence
    /// equals the fraction of steps spent on the target.
    pub fn new(support: Vec<u64>, probabilities: Vec<W>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != probabilities.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} probabilities",
                support.len(),
                probabilities.len()
            )));
        }
        if support[0] == 0 || support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "support must be positive and strictly ascending".into(),
            ));
        }
        if probabilities.iter().any(Scalar::is_negative_scalar) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total = probabilities
            .iter()
            .fold(W::zero(), |acc, p| acc + p.clone());
        if !total.is_unit() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total:?}"
            )));
        }
        let frequency = support
            .iter()
            .zip(&probabilities)
            .fold(W::zero(), |acc, (&x, p)| acc + p.clone() / W::from_count(x));
        Ok(Self {
            support,
            probabilities,
            frequency,
        })
    }

    /// Size-biased distribution of a multiset of gaps given as `(gap, count)`.
    pub fn from_gap_counts(counts: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
        for (g, c) in counts {
            if c > 0 {
                *merged.entry(g).or_default() += c;
            }
        }
        let total = merged.iter().fold(W::zero(), |acc, (&g, &c)| {
            acc + W::from_count(g) * W::from_count(c)
        });
        if total.is_zero() {
            return Err(Error::InvalidDistribution("no gaps observed".into()));
        }
        let probabilities = merged
            .iter()
            .map(|(&g, &c)| W::from_count(g) * W::from_count(c) / total.clone())
            .collect();
        Self::new(merged.into_keys().collect(), probabilities)
    }

    /// Convex combination of distributions, e.g. over the components of a
    /// randomized sequence. Weights must sum to one.
    pub fn mixture<'a>(components: impl IntoIterator<Item = (W, &'a Self)>) -> Result<Self>
    where
        W: 'a,
    {
        let mut merged: BTreeMap<u64, W> = BTreeMap::new();
        for (w, d) in components {
            for (&x, p) in d.support.iter().zip(&d.probabilities) {
                let slot = merged.entry(x).or_insert_with(W::zero);
                *slot = slot.clone() + w.clone() * p.clone();
            }
        }
        merged.retain(|_, p| !p.is_zero());
        let (support, probabilities) = merged.into_iter().unzip();
        Self::new(support, probabilities)
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[W] {
        &self.probabilities
    }

    /// Visit frequency `p`, equal to `F(1)`.
    pub fn frequency(&self) -> &W {
        &self.frequency
    }

    /// Expected defender absence `E = 1/p`.
    pub fn expected_absence(&self) -> W {
        W::one() / self.frequency.clone()
    }

    /// Per-cycle (defender-side) gap frequencies `q_j = P(Z=x_j)·E/x_j`.
    pub fn defender_weights(&self) -> Vec<W> {
        let e = self.expected_absence();
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(&x, p)| p.clone() * e.clone() / W::from_count(x))
            .collect()
    }

    pub fn min_gap(&self) -> u64 {
        self.support[0]
    }

    pub fn max_gap(&self) -> u64 {
        *self.support.last().expect("non-empty support")
    }

    pub fn to_f64(&self) -> GapDistribution<f64> {
        GapDistribution {
            support: self.support.clone(),
            probabilities: self.probabilities.iter().map(Scalar::as_f64).collect(),
            frequency: self.frequency.as_f64(),
        }
    }

    /// Return-time CDF `F(t) = E[min(1, t/Z)]`, linear between support points.
    pub fn cdf(&self) -> PiecewiseLinearCdf<W> {
        // Σ_{x_i ≤ t} P_i is accumulated left to right, Σ_{x_i > t} P_i/x_i right to left.
        let m = self.support.len();
        let mut tail = vec![W::zero(); m + 1];
        for j in (0..m).rev() {
            tail[j] = tail[j + 1].clone()
                + self.probabilities[j].clone() / W::from_count(self.support[j]);
        }
        let mut points = Vec::with_capacity(m + 1);
        points.push((W::zero(), W::zero()));
        let mut head = W::zero();
        for j in 0..m {
            head = head + self.probabilities[j].clone();
            let x = W::from_count(self.support[j]);
            let value = if j + 1 == m {
                W::one()
            } else {
                head.clone() + x.clone() * tail[j + 1].clone()
            };
            points.push((x, value));
        }
        PiecewiseLinearCdf { points }
    }
}

/// Gap distribution of `target` in a uniformly shifted periodic sequence.
pub fn empirical_gap_distribution(
    seq: &PeriodicSequence,
    target: usize,
) -> Result<GapDistribution<Rational>> {
    if target >= seq.targets() || seq.count(target) == 0 {
        return Err(Error::TargetNeverVisited(target));
    }
    let gaps = seq.cyclic_gaps(target)?;
    GapDistribution::from_gap_counts(gaps.into_iter().map(|g| (g, 1)))
}

/// Gap distribution of `target` from the complete gaps of a finite trajectory.
///
/// Weighting every complete gap by its length is the census of the gap
/// straddling each covered time step.
pub fn trajectory_gap_distribution<W: Scalar>(
    entries: &[usize],
    target: usize,
) -> Result<GapDistribution<W>> {
    let gaps = trajectory_gaps(entries, target);
    if gaps.is_empty() {
        return Err(Error::TargetNeverVisited(target));
    }
    GapDistribution::from_gap_counts(gaps.into_iter().map(|g| (g, 1)))
}

/// Continuous piecewise linear CDF through `(0, 0), …, (x_max, 1)`, constant
/// one afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearCdf<W: Scalar = f64> {
    points: Vec<(W, W)>,
}

impl<W: Scalar> PiecewiseLinearCdf<W> {
    pub fn new(points: Vec<(W, W)>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidDistribution(msg.to_string()));
        match (points.first(), points.last()) {
            (Some(first), Some(last)) if points.len() >= 2 => {
                if !first.0.is_zero() || !first.1.is_zero() {
                    return bad("CDF must start at (0, 0)");
                }
                if !last.1.is_unit() {
                    return bad("CDF must end at 1");
                }
            }
            _ => return bad("CDF needs at least two breakpoints"),
        }
        if points
            .windows(2)
            .any(|w| w[0].0 >= w[1].0 || w[0].1 > w[1].1)
        {
            return bad("breakpoints must be strictly ascending in t and non-decreasing in F");
        }
        Ok(Self { points })
    }

    pub fn breakpoints(&self) -> &[(W, W)] {
        &self.points
    }

    pub fn x_max(&self) -> &W {
        &self.points.last().expect("non-empty").0
    }

    /// Slope of each linear piece, left to right.
    pub fn slopes(&self) -> Vec<W> {
        self.points
            .windows(2)
            .map(|w| (w[1].1.clone() - w[0].1.clone()) / (w[1].0.clone() - w[0].0.clone()))
            .collect()
    }

    /// Whether slopes are non-increasing (exactly, or within `tol` for floats).
    pub fn is_concave_within(&self, tol: f64) -> bool {
        self.slopes()
            .windows(2)
            .all(|s| s[1] <= s[0] || (s[1].as_f64() - s[0].as_f64()) <= tol)
    }

    pub fn eval(&self, t: &W) -> W {
        if *t <= W::zero() {
            return W::zero();
        }
        if t >= self.x_max() {
            return W::one();
        }
        let idx = self.points.partition_point(|(x, _)| x <= t);
        let (x0, f0) = &self.points[idx - 1];
        let (x1, f1) = &self.points[idx];
        f0.clone()
            + (f1.clone() - f0.clone()) * (t.clone() - x0.clone()) / (x1.clone() - x0.clone())
    }

    /// Convex combination of CDFs, evaluated on the union of their breakpoints.
    pub fn mixture<'a>(components: &[(W, &'a Self)]) -> Result<Self>
    where
        W: 'a,
    {
        let mut ts: Vec<W> = components
            .iter()
            .flat_map(|(_, c)| c.points.iter().map(|(t, _)| t.clone()))
            .collect();
        ts.sort_by(|a, b| a.partial_cmp(b).expect("comparable breakpoints"));
        ts.dedup();
        let points = ts
            .into_iter()
            .map(|t| {
                let f = components
                    .iter()
                    .fold(W::zero(), |acc, (w, c)| acc + w.clone() * c.eval(&t));
                (t, f)
            })
            .collect();
        Self::new(points)
    }

    pub fn to_f64(&self) -> PiecewiseLinearCdf<f64> {
        PiecewiseLinearCdf {
            points: self
                .points
                .iter()
                .map(|(t, f)| (t.as_f64(), f.as_f64()))
                .collect(),
        }
    }
}

impl PiecewiseLinearCdf<f64> {
    pub fn eval_f64(&self, t: f64) -> f64 {
        self.eval(&t)
    }
}
