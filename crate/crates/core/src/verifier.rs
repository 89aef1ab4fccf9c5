//! Quasi-regularity measurement, optimality certificates and cross-checks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::attacker::{
    best_response, golden_ratio_worstcase, golden_ratio_worstcase_within, iid_worst_ratio,
    maximize_utility, AttackerResponse, SMALL_VALUE_BOUND,
};
use crate::dyadic::OptimalSampler;
use crate::error::{Error, Result};
use crate::gaps::{empirical_gap_distribution, PiecewiseLinearCdf};
use crate::golden::{slater_distribution, GoldenState};
use crate::scalar::Scalar;
use crate::sequence::{trajectory_gaps, PeriodicSequence};
use crate::values::{ratio, Rational, ValueVector};

/// Slack allowed above `1/4` when certifying.
pub const CERTIFY_TOLERANCE: f64 = 1e-9;

/// Longest-to-shortest gap ratio `K` and per-target gap ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiRegularity {
    pub k: Rational,
    pub ranges: Vec<(u64, u64)>,
}

fn from_ranges(ranges: Vec<(u64, u64)>) -> QuasiRegularity {
    let k = ranges
        .iter()
        .map(|&(lo, hi)| ratio(hi as i64, lo as i64))
        .max()
        .unwrap_or_else(Rational::one);
    QuasiRegularity { k, ranges }
}

/// `K` over the cyclic gaps of a periodic sequence.
pub fn quasi_regularity(seq: &PeriodicSequence) -> Result<QuasiRegularity> {
    let ranges = (0..seq.targets())
        .map(|i| seq.gap_range(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(from_ranges(ranges))
}

/// `K` of a random sequence from realizations: gap ranges are pooled over
/// all sequences before taking ratios.
pub fn pooled_quasi_regularity<'a>(
    seqs: impl IntoIterator<Item = &'a PeriodicSequence>,
) -> Result<QuasiRegularity> {
    let mut ranges: Vec<(u64, u64)> = Vec::new();
    for seq in seqs {
        let here = quasi_regularity(seq)?.ranges;
        if ranges.is_empty() {
            ranges = here;
        } else if ranges.len() != here.len() {
            return Err(Error::InvalidSequence(
                "sequences over different target counts".into(),
            ));
        } else {
            for (r, h) in ranges.iter_mut().zip(here) {
                *r = (r.0.min(h.0), r.1.max(h.1));
            }
        }
    }
    if ranges.is_empty() {
        return Err(Error::InvalidSequence("no sequences".into()));
    }
    Ok(from_ranges(ranges))
}

/// `K` over the complete gaps of a finite trajectory.
pub fn trajectory_quasi_regularity(entries: &[usize], targets: usize) -> Result<QuasiRegularity> {
    let ranges = (0..targets)
        .map(|i| {
            let gaps = trajectory_gaps(entries, i);
            match (gaps.iter().min(), gaps.iter().max()) {
                (Some(&lo), Some(&hi)) => Ok((lo, hi)),
                _ => Err(Error::TargetNeverVisited(i)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(from_ranges(ranges))
}

/// Per-target outcome of [`certify_optimal`].
#[derive(Clone, Debug, PartialEq)]
pub struct TargetCertificate {
    pub target: usize,
    pub frequency: Rational,
    /// Smallest and largest gap over all sequences of the mixture.
    pub gap_range: (u64, u64),
    /// All gaps lie in `[m/(m+1)·E, m·E]` for some real `m`, with `E = 1/α`.
    pub gap_condition: bool,
    /// Exact best-response utility against the mixture.
    pub utility: Rational,
    pub response: AttackerResponse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub targets: Vec<TargetCertificate>,
    /// Human-readable descriptions of every failed check.
    pub violations: Vec<String>,
    /// Frequencies exact and every utility at most `1/4 + 1e-9`.
    pub certified: bool,
}

impl Certificate {
    pub fn max_ratio(&self) -> f64 {
        self.targets
            .iter()
            .map(|t| t.response.ratio_to_quarter)
            .fold(0.0, f64::max)
    }
}

/// Checks a weighted mixture of uniformly shifted periodic sequences.
pub fn certify_optimal(
    alpha: &ValueVector,
    mixture: &[(Rational, PeriodicSequence)],
) -> Result<Certificate> {
    let total: Rational = mixture.iter().map(|(w, _)| w.clone()).sum();
    if !total.is_one() {
        return Err(Error::InvalidDistribution(format!(
            "mixture weights sum to {total}"
        )));
    }
    if let Some((_, s)) = mixture.iter().find(|(_, s)| s.targets() != alpha.len()) {
        return Err(Error::InvalidSequence(format!(
            "sequence over {} targets for {} values",
            s.targets(),
            alpha.len()
        )));
    }
    let quarter = ratio(1, 4);
    let slack = Rational::from_float(CERTIFY_TOLERANCE).expect("finite");
    let mut violations = Vec::new();
    let mut targets = Vec::with_capacity(alpha.len());
    for (i, value) in alpha.iter().enumerate() {
        let mut frequency = Rational::zero();
        let mut cdfs = Vec::with_capacity(mixture.len());
        let (mut gmin, mut gmax) = (u64::MAX, 0);
        for (w, seq) in mixture {
            let dist = empirical_gap_distribution(seq, i)?;
            frequency += w * dist.frequency();
            gmin = gmin.min(dist.min_gap());
            gmax = gmax.max(dist.max_gap());
            cdfs.push((w.clone(), dist.cdf()));
        }
        if &frequency != value {
            violations.push(format!(
                "target {i}: frequency {frequency} differs from value {value}"
            ));
        }
        // The smallest admissible m is gmax/E; the lower end m/(m+1)·E is then gmax·E/(gmax + E).
        let e = value.recip();
        let gmax_r = Rational::from_integer(BigInt::from(gmax));
        let floor = &gmax_r * &e / (&gmax_r + &e);
        let gap_condition = Rational::from_integer(BigInt::from(gmin)) >= floor;
        if !gap_condition {
            violations.push(format!(
                "target {i}: gap {gmin} below {floor} required by largest gap {gmax}"
            ));
        }
        let refs: Vec<(Rational, &PiecewiseLinearCdf<Rational>)> =
            cdfs.iter().map(|(w, c)| (w.clone(), c)).collect();
        let cdf = PiecewiseLinearCdf::mixture(&refs)?;
        let (t_star, utility) = maximize_utility(value, &cdf);
        if utility > &quarter + &slack {
            violations.push(format!(
                "target {i}: attacker utility {} exceeds 1/4 at t = {}",
                utility.as_f64(),
                t_star.as_f64()
            ));
        }
        let response = AttackerResponse {
            target: i,
            t_star: t_star.as_f64(),
            utility: utility.as_f64(),
            ratio_to_quarter: 4.0 * utility.as_f64(),
        };
        targets.push(TargetCertificate {
            target: i,
            frequency,
            gap_range: (gmin, gmax),
            gap_condition,
            utility,
            response,
        });
    }
    let certified = targets
        .iter()
        .zip(alpha.iter())
        .all(|(t, v)| &t.frequency == v && t.utility <= &quarter + &slack);
    Ok(Certificate {
        targets,
        violations,
        certified,
    })
}

/// Outcome of [`slater_crosscheck`].
#[derive(Clone, Debug, PartialEq)]
pub struct SlaterCheck {
    pub k: usize,
    pub expected_support: [u64; 3],
    pub observed_support: Vec<u64>,
    /// Observed gaps are a subset of the expected three.
    pub support_ok: bool,
    pub total_variation: f64,
}

/// Length-weighted census of complete gaps, as `gap → probability`.
pub fn size_biased_census(gaps: &[u64]) -> BTreeMap<u64, f64> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &g in gaps {
        *counts.entry(g).or_default() += g;
    }
    let total: u64 = counts.values().sum();
    counts
        .into_iter()
        .map(|(g, c)| (g, c as f64 / total as f64))
        .collect()
}

/// Total variation distance between the gap census of a `steps`-long
/// Golden Ratio trajectory on `{[0, p), [p, 1)}` and the closed form.
///
/// Every complete gap is counted once per covered step, which is the
/// straddling gap of each time in the trajectory.
pub fn slater_crosscheck<R: Rng + ?Sized>(
    p: &Rational,
    steps: usize,
    rng: &mut R,
) -> Result<SlaterCheck> {
    let law = slater_distribution(p)?;
    let mut state = GoldenState::new(&[p.clone(), Rational::one() - p])?;
    let entries = state.trajectory(steps, rng);
    let census = size_biased_census(&trajectory_gaps(&entries, 0));
    let expected = law.support();
    let probs = law.probabilities_f64();
    let observed_support: Vec<u64> = census.keys().copied().collect();
    let support_ok = observed_support.iter().all(|g| expected.contains(g));
    let mut tv = 0.0;
    for (x, p) in expected.iter().zip(probs) {
        tv += (census.get(x).copied().unwrap_or(0.0) - p).abs();
    }
    tv += census
        .iter()
        .filter(|(g, _)| !expected.contains(g))
        .map(|(_, q)| q)
        .sum::<f64>();
    Ok(SlaterCheck {
        k: law.k(),
        expected_support: expected,
        observed_support,
        support_ok,
        total_variation: tv / 2.0,
    })
}

/// Attacker utility when the schedule's phase is known: attacking right
/// after a visit lasts the whole following gap.
pub fn fixed_phase_utility(alpha: &ValueVector, seq: &PeriodicSequence) -> Result<f64> {
    let mut best = 0.0f64;
    for (i, a) in alpha.to_f64().into_iter().enumerate() {
        let (_, hi) = seq.gap_range(i)?;
        best = best.max(a * hi as f64);
    }
    Ok(best)
}

/// Best response of every target against a shift-invariant mixture.
pub fn mixture_responses(
    alpha: &ValueVector,
    mixture: &[(Rational, PeriodicSequence)],
) -> Result<Vec<AttackerResponse>> {
    Ok(certify_optimal(alpha, mixture)?
        .targets
        .into_iter()
        .map(|t| t.response)
        .collect())
}

/// One row of [`ratio_table`].
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub strategy: &'static str,
    pub ratio: f64,
}

/// Worst-case attacker utility relative to the optimum `1/4` per strategy.
pub fn ratio_table() -> Result<Vec<RatioRow>> {
    let values = ValueVector::parse(&["1/2", "1/3", "1/6"])?;
    let mixture = OptimalSampler::new(values.clone())?.exact_mixture()?;
    let cert = certify_optimal(&values, &mixture)?;
    if !cert.certified {
        return Err(Error::Precondition(format!(
            "optimal mixture not certified: {:?}",
            cert.violations
        )));
    }
    Ok(vec![
        RatioRow {
            strategy: "optimal (dyadic rounding)",
            ratio: cert.max_ratio(),
        },
        RatioRow {
            strategy: "golden ratio, values <= 1-1/phi",
            ratio: golden_ratio_worstcase_within(SMALL_VALUE_BOUND).ratio,
        },
        RatioRow {
            strategy: "golden ratio, values <= 1/2",
            ratio: golden_ratio_worstcase().ratio,
        },
        RatioRow {
            strategy: "i.i.d.",
            ratio: iid_worst_ratio(),
        },
    ])
}

/// Best response against the CDF of a sampled trajectory.
pub fn trajectory_response(
    target: usize,
    value: f64,
    entries: &[usize],
) -> Result<AttackerResponse> {
    let dist = crate::gaps::trajectory_gap_distribution::<f64>(entries, target)?;
    Ok(best_response(target, &value, &dist.cdf()))
}
