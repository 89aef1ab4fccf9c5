//! The optimal randomized schedule: round the values onto dyadic interval
//! endpoints, interleave the rounded frequencies into a periodic sequence, and
//! start it at a uniformly random phase.
//!
//! Every sampled sequence visits target `i` with gaps in `[2^(m_i-1), 2^m_i]`
//! and the rounding is unbiased, so the randomized sequence is
//! 2-quasi-regular with frequencies equal to the values.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rounding::{self, is_power_of_two, DyadicInterval, RoundingOutcome};
use crate::sequence::PeriodicSequence;
use crate::values::{ratio, Rational, ValueVector};

/// A probability vector whose entries are powers of two except possibly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicVector {
    q: Vec<Rational>,
    special: Option<usize>,
}

impl DyadicVector {
    pub fn new(q: Vec<Rational>) -> Result<Self> {
        crate::values::check_distribution(&q)?;
        let mut non_powers = q.iter().enumerate().filter(|(_, x)| !is_power_of_two(x));
        let special = non_powers.next().map(|(i, _)| i);
        if let Some((j, _)) = non_powers.next() {
            return Err(Error::Precondition(format!(
                "entries {} and {j} are both not powers of two",
                special.unwrap_or_default()
            )));
        }
        // The remaining entries are dyadic and sum with the special one to 1,
        // so the special entry is dyadic as well and the recursion terminates.
        Ok(Self { q, special })
    }

    pub fn entries(&self) -> &[Rational] {
        &self.q
    }

    /// The entry that is not a power of two, if any.
    pub fn special(&self) -> Option<usize> {
        self.special
    }

    /// Writes the special entry as `2^-m - ε` with `0 ≤ ε < 2^-(m+1)`.
    pub fn special_decomposition(&self) -> Option<(u32, Rational)> {
        let i = self.special?;
        let q = &self.q[i];
        let mut m = 0;
        while *q <= rounding::pow2_neg(m + 1) {
            m += 1;
        }
        Some((m, rounding::pow2_neg(m) - q))
    }
}

/// Indices of a submultiset of powers of two summing exactly to `target`.
///
/// Requires `max(items) ≤ target ≤ Σ items` with `target` a power of two.
/// Items are taken greedily, largest first (ties by index).
pub fn subset_with_sum(items: &[Rational], target: &Rational) -> Result<Vec<usize>> {
    if !is_power_of_two(target) {
        return Err(Error::Precondition(format!(
            "target {target} is not a power of two"
        )));
    }
    if let Some(x) = items.iter().find(|x| !is_power_of_two(x)) {
        return Err(Error::Precondition(format!(
            "item {x} is not a power of two"
        )));
    }
    let total: Rational = items.iter().sum();
    if items.iter().any(|x| x > target) || total < *target {
        return Err(Error::Precondition(format!(
            "need max(items) ≤ {target} ≤ Σ items = {total}"
        )));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].cmp(&items[a]).then(a.cmp(&b)));
    let mut chosen = Vec::new();
    let mut sum = Rational::zero();
    for i in order {
        if &sum + &items[i] <= *target {
            sum += &items[i];
            chosen.push(i);
            if sum == *target {
                chosen.sort_unstable();
                return Ok(chosen);
            }
        }
    }
    Err(Error::Precondition(format!("no exact cover of {target}")))
}

/// Alternates two sequences slot by slot, repeating the shorter one.
fn interleave(odd: &[usize], even: &[usize]) -> Vec<usize> {
    let len = odd.len().max(even.len());
    (0..len)
        .flat_map(|t| [odd[t % odd.len()], even[t % even.len()]])
        .collect()
}

fn double(items: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
    let two = BigInt::from(2);
    items.iter().map(|(i, q)| (*i, q * &two)).collect()
}

/// Regular schedule of `(target, frequency)` pairs whose frequencies are
/// powers of two summing to one; each target recurs every `1/frequency`.
fn regular_schedule(items: &[(usize, Rational)]) -> Result<Vec<usize>> {
    if let [(target, q)] = items {
        debug_assert!(q.is_one());
        return Ok(vec![*target]);
    }
    let values: Vec<Rational> = items.iter().map(|(_, q)| q.clone()).collect();
    let half = subset_with_sum(&values, &ratio(1, 2))?;
    let (chosen, rest): (Vec<_>, Vec<_>) = items
        .iter()
        .enumerate()
        .partition(|(k, _)| half.binary_search(k).is_ok());
    let strip = |v: Vec<(usize, &(usize, Rational))>| {
        v.into_iter().map(|(_, x)| x.clone()).collect::<Vec<_>>()
    };
    let odd = regular_schedule(&double(&strip(chosen)))?;
    let even = regular_schedule(&double(&strip(rest)))?;
    Ok(interleave(&odd, &even))
}

/// Schedule where `special` may be any dyadic frequency; its gaps come out as
/// `2^m` or `2^(m+1)` with `2^-(m+1) < q ≤ 2^-m`, all other targets are regular.
fn one_nonpower_schedule(items: &[(usize, Rational)], special: usize) -> Result<Vec<usize>> {
    let pos = match items.iter().position(|(t, _)| *t == special) {
        Some(p) if !is_power_of_two(&items[p].1) => p,
        _ => return regular_schedule(items),
    };
    let q = &items[pos].1;
    let half = ratio(1, 2);
    if *q > half {
        // Special target takes every odd slot; the excess goes into the even half.
        let mut rest: Vec<(usize, Rational)> = items.to_vec();
        rest[pos].1 = q - &half;
        rest.retain(|(_, x)| !x.is_zero());
        let even = one_nonpower_schedule(&double(&rest), special)?;
        return Ok(interleave(&[special], &even));
    }
    let others: Vec<(usize, Rational)> = items
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != pos)
        .map(|(_, x)| x.clone())
        .collect();
    let values: Vec<Rational> = others.iter().map(|(_, x)| x.clone()).collect();
    let subset = subset_with_sum(&values, &half)?;
    let chosen: Vec<(usize, Rational)> = subset.iter().map(|&k| others[k].clone()).collect();
    let rest: Vec<(usize, Rational)> = items
        .iter()
        .filter(|(t, _)| !chosen.iter().any(|(c, _)| c == t))
        .cloned()
        .collect();
    let odd = regular_schedule(&double(&chosen))?;
    let even = one_nonpower_schedule(&double(&rest), special)?;
    Ok(interleave(&odd, &even))
}

fn labelled(q: &[Rational]) -> Vec<(usize, Rational)> {
    q.iter().cloned().enumerate().collect()
}

/// Regular sequence for a vector of powers of two: target `i` recurs every
/// `1/q_i` steps and the period is `max_i 1/q_i`.
pub fn schedule_all_powers(q: &[Rational]) -> Result<PeriodicSequence> {
    let v = DyadicVector::new(q.to_vec())?;
    if let Some(i) = v.special() {
        return Err(Error::Precondition(format!(
            "entry {} of target {i} is not a power of two",
            q[i]
        )));
    }
    PeriodicSequence::new(regular_schedule(&labelled(q))?, q.len())
}

/// Periodic sequence with exact frequencies `q`: regular gaps `1/q_i` for
/// power-of-two entries, gaps in `{2^m, 2^(m+1)}` for the special entry.
pub fn schedule_one_nonpower(q: &DyadicVector) -> Result<PeriodicSequence> {
    let items = labelled(&q.q);
    let entries = match q.special {
        Some(s) => one_nonpower_schedule(&items, s)?,
        None => regular_schedule(&items)?,
    };
    PeriodicSequence::new(entries, q.q.len())
}

/// One draw of the optimal randomized sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleSample {
    pub rounding: RoundingOutcome,
    /// Sequence before the random cyclic shift.
    pub base: PeriodicSequence,
    pub shift: usize,
}

impl ScheduleSample {
    pub fn sequence(&self) -> PeriodicSequence {
        self.base.shifted(self.shift)
    }
}

/// Sampler for the optimal 2-quasi-regular randomized sequence.
#[derive(Clone, Debug)]
pub struct OptimalSampler {
    values: ValueVector,
    intervals: Vec<DyadicInterval>,
}

impl OptimalSampler {
    pub fn new(values: ValueVector) -> Result<Self> {
        let intervals = rounding::dyadic_intervals(&values)?;
        Ok(Self { values, intervals })
    }

    pub fn values(&self) -> &ValueVector {
        &self.values
    }

    /// `[2^-m_i, 2^(1-m_i)]` for each target; gaps lie in `[2^(m_i-1), 2^m_i]`.
    pub fn intervals(&self) -> &[DyadicInterval] {
        &self.intervals
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ScheduleSample> {
        let rounding = rounding::round_to_dyadic(&self.values, rng)?;
        let base = schedule_one_nonpower(&DyadicVector::new(rounding.q.clone())?)?;
        let shift = rng.gen_range(0..base.period());
        Ok(ScheduleSample {
            rounding,
            base,
            shift,
        })
    }

    /// The full mixture: every rounding outcome with its probability and its
    /// (unshifted) sequence.
    pub fn exact_mixture(&self) -> Result<Vec<(Rational, PeriodicSequence)>> {
        rounding::enumerate_outcomes(&self.values)?
            .into_iter()
            .map(|o| {
                let seq = schedule_one_nonpower(&DyadicVector::new(o.q)?)?;
                Ok((o.weight, seq))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rats(xs: &[(i64, i64)]) -> Vec<Rational> {
        xs.iter().map(|&(a, b)| ratio(a, b)).collect()
    }

    fn sorted_gaps(s: &PeriodicSequence, t: usize) -> Vec<u64> {
        let mut g = s.cyclic_gaps(t).unwrap();
        g.sort_unstable();
        g.dedup();
        g
    }

    #[test]
    fn subset_sum_examples() {
        let s = rats(&[(1, 2)]);
        assert_eq!(subset_with_sum(&s, &ratio(1, 2)).unwrap(), vec![0]);

        let s = rats(&[(1, 4), (1, 4), (1, 8), (1, 8)]);
        let chosen = subset_with_sum(&s, &ratio(1, 2)).unwrap();
        let sum: Rational = chosen.iter().map(|&i| &s[i]).sum();
        assert_eq!(sum, ratio(1, 2));

        let s = rats(&[(1, 4), (1, 8), (1, 8)]);
        assert_eq!(subset_with_sum(&s, &ratio(1, 2)).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn subset_sum_preconditions() {
        assert!(subset_with_sum(&rats(&[(1, 4)]), &ratio(1, 2)).is_err());
        assert!(subset_with_sum(&rats(&[(1, 1), (1, 4)]), &ratio(1, 2)).is_err());
        assert!(subset_with_sum(&rats(&[(3, 8), (1, 4)]), &ratio(1, 2)).is_err());
        assert!(subset_with_sum(&rats(&[(1, 4), (1, 4)]), &ratio(3, 8)).is_err());
    }

    #[test]
    fn all_powers_are_regular() {
        let s = schedule_all_powers(&rats(&[(1, 1)])).unwrap();
        assert_eq!(s.entries(), &[0]);
        let s = schedule_all_powers(&rats(&[(1, 2), (1, 2)])).unwrap();
        assert_eq!(s.entries(), &[0, 1]);
        let s = schedule_all_powers(&rats(&[(1, 2), (1, 4), (1, 4)])).unwrap();
        assert_eq!(s.entries(), &[0, 1, 0, 2]);

        let q = rats(&[(1, 8), (1, 4), (1, 16), (1, 2), (1, 16)]);
        let s = schedule_all_powers(&q).unwrap();
        assert_eq!(s.period(), 16);
        for (i, qi) in q.iter().enumerate() {
            let expected = (qi.denom() / qi.numer())
                .to_string()
                .parse::<u64>()
                .unwrap();
            assert_eq!(sorted_gaps(&s, i), vec![expected]);
        }
        assert!(schedule_all_powers(&rats(&[(3, 8), (5, 8)])).is_err());
    }

    #[test]
    fn one_nonpower_gap_sets() {
        let q = DyadicVector::new(rats(&[(3, 8), (1, 4), (1, 4), (1, 8)])).unwrap();
        assert_eq!(q.special(), Some(0));
        assert_eq!(q.special_decomposition(), Some((1, ratio(1, 8))));
        let s = schedule_one_nonpower(&q).unwrap();
        assert!(sorted_gaps(&s, 0).iter().all(|g| [2, 4].contains(g)));
        assert_eq!(sorted_gaps(&s, 1), vec![4]);
        assert_eq!(sorted_gaps(&s, 2), vec![4]);
        assert_eq!(sorted_gaps(&s, 3), vec![8]);
        for i in 0..4 {
            assert_eq!(&s.frequency(i), &q.entries()[i]);
        }

        let q = DyadicVector::new(rats(&[(7, 16), (1, 4), (1, 4), (1, 16)])).unwrap();
        let s = schedule_one_nonpower(&q).unwrap();
        assert!(sorted_gaps(&s, 0).iter().all(|g| [2, 4].contains(g)));
        assert_eq!(s.frequency(0), ratio(7, 16));
        assert_eq!(sorted_gaps(&s, 3), vec![16]);
    }

    #[test]
    fn special_above_one_half() {
        let q = DyadicVector::new(rats(&[(1, 8), (5, 8), (1, 4)])).unwrap();
        assert_eq!(q.special(), Some(1));
        let s = schedule_one_nonpower(&q).unwrap();
        assert!(sorted_gaps(&s, 1).iter().all(|g| [1, 2].contains(g)));
        assert_eq!(s.frequency(1), ratio(5, 8));
        assert_eq!(sorted_gaps(&s, 0), vec![8]);
        assert_eq!(sorted_gaps(&s, 2), vec![4]);
    }

    #[test]
    fn degenerate_special_is_regular() {
        let q = DyadicVector::new(rats(&[(1, 2), (1, 4), (1, 4)])).unwrap();
        assert_eq!(q.special(), None);
        let s = schedule_one_nonpower(&q).unwrap();
        assert_eq!(sorted_gaps(&s, 0), vec![2]);
    }

    #[test]
    fn dyadic_vector_rejects_two_non_powers() {
        assert!(DyadicVector::new(rats(&[(3, 8), (3, 8), (1, 4)])).is_err());
        assert!(DyadicVector::new(rats(&[(1, 2), (1, 4)])).is_err());
    }

    #[test]
    fn two_equal_values_give_alternation() {
        let sampler = OptimalSampler::new(ValueVector::parse(&["1/2", "1/2"]).unwrap()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..10 {
            let s = sampler.sample(&mut rng).unwrap();
            assert_eq!(s.base.entries(), &[0, 1]);
            assert_eq!(sorted_gaps(&s.sequence(), 0), vec![2]);
        }
    }

    #[test]
    fn uniform_quarter_values() {
        let sampler =
            OptimalSampler::new(ValueVector::parse(&["1/4", "1/4", "1/4", "1/4"]).unwrap())
                .unwrap();
        let mixture = sampler.exact_mixture().unwrap();
        assert_eq!(mixture.len(), 1);
        for t in 0..4 {
            assert_eq!(sorted_gaps(&mixture[0].1, t), vec![4]);
        }
    }

    #[test]
    fn half_third_sixth_samples_are_two_quasi_regular() {
        let values = ValueVector::parse(&["1/2", "1/3", "1/6"]).unwrap();
        let sampler = OptimalSampler::new(values.clone()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..200 {
            let sample = sampler.sample(&mut rng).unwrap();
            let seq = sample.sequence();
            for (t, iv) in sampler.intervals().iter().enumerate() {
                let (lo, hi) = seq.gap_range(t).unwrap();
                assert!(hi <= 2 * lo);
                assert!(lo >= 1 << (iv.m - 1) && hi <= 1 << iv.m);
                assert_eq!(seq.frequency(t), sample.rounding.q[t]);
            }
        }
        let mixture = sampler.exact_mixture().unwrap();
        for t in 0..3 {
            let f: Rational = mixture.iter().map(|(w, s)| w * s.frequency(t)).sum();
            assert_eq!(&f, values.get(t));
        }
    }
}

#[cfg(test)]
mod properties {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::testing::value_vectors;

    proptest! {
        #[test]
        fn samples_are_two_quasi_regular(p in value_vectors(6), seed in any::<u64>()) {
            let sampler = OptimalSampler::new(p.clone()).unwrap();
            let draw = sampler.sample(&mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            let seq = draw.sequence();
            for (i, iv) in sampler.intervals().iter().enumerate() {
                let (lo, hi) = seq.gap_range(i).unwrap();
                prop_assert!(hi <= 2 * lo);
                prop_assert_eq!(seq.frequency(i), draw.rounding.q[i].clone());
                prop_assert!(Rational::from_integer(BigInt::from(lo)) >= iv.hi.recip());
                prop_assert!(Rational::from_integer(BigInt::from(hi)) <= iv.lo.recip());
            }
        }
    }
}
