use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::values::Rational;

/// One period of a deterministic defender sequence over targets `0..targets`.
///
/// The defender visits `entries[t mod period]` at integer time `t`; a
/// uniformly random cyclic shift turns it into a shift-invariant strategy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicSequence {
    entries: Vec<usize>,
    targets: usize,
}

impl PeriodicSequence {
    /// Every target in `0..targets` must occur at least once per period.
    pub fn new(entries: Vec<usize>, targets: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSequence("empty period".into()));
        }
        let mut seen = vec![false; targets];
        for &e in &entries {
            if e >= targets {
                return Err(Error::InvalidSequence(format!(
                    "entry {e} out of range for {targets} targets"
                )));
            }
            seen[e] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::TargetNeverVisited(missing));
        }
        Ok(Self { entries, targets })
    }

    pub fn period(&self) -> usize {
        self.entries.len()
    }

    pub fn targets(&self) -> usize {
        self.targets
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn count(&self, target: usize) -> usize {
        self.entries.iter().filter(|&&e| e == target).count()
    }

    pub fn frequency(&self, target: usize) -> Rational {
        Rational::new(
            BigInt::from(self.count(target)),
            BigInt::from(self.period()),
        )
    }

    /// Gaps between consecutive visits to `target`, wrapping around the period.
    pub fn cyclic_gaps(&self, target: usize) -> Result<Vec<u64>> {
        let visits: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter_map(|(t, &e)| (e == target).then_some(t))
            .collect();
        let (&first, &last) = match (visits.first(), visits.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::TargetNeverVisited(target)),
        };
        let mut gaps: Vec<u64> = visits.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
        gaps.push((first + self.period() - last) as u64);
        Ok(gaps)
    }

    /// `(min, max)` cyclic gap of `target`.
    pub fn gap_range(&self, target: usize) -> Result<(u64, u64)> {
        let gaps = self.cyclic_gaps(target)?;
        let min = *gaps.iter().min().expect("at least one gap");
        let max = *gaps.iter().max().expect("at least one gap");
        Ok((min, max))
    }

    /// The sequence started `shift` steps later.
    pub fn shifted(&self, shift: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.rotate_left(shift % self.period());
        Self {
            entries,
            targets: self.targets,
        }
    }
}

/// Complete gaps between consecutive visits to `target` in a finite trajectory.
///
/// The partial stretches before the first and after the last visit are dropped.
pub fn trajectory_gaps(entries: &[usize], target: usize) -> Vec<u64> {
    let mut gaps = Vec::new();
    let mut last = None;
    for (t, &e) in entries.iter().enumerate() {
        if e == target {
            if let Some(prev) = last {
                gaps.push((t - prev) as u64);
            }
            last = Some(t);
        }
    }
    gaps
}


#[cfg(test)]
mod properties {
    use proptest::prelude::*;

    use super::*;

    fn sequences() -> impl Strategy<Value = PeriodicSequence> {
        (1usize..5)
            .prop_flat_map(|n| (Just(n), prop::collection::vec(0..n, n..40)))
            .prop_map(|(n, mut entries)| {
                entries[..n]
                    .iter_mut()
                    .enumerate()
                    .for_each(|(i, e)| *e = i);
                PeriodicSequence::new(entries, n).unwrap()
            })
    }

    proptest! {
        #[test]
        fn cyclic_gaps_cover_the_period(seq in sequences(), shift in 0usize..100) {
            for i in 0..seq.targets() {
                let gaps = seq.cyclic_gaps(i).unwrap();
                prop_assert_eq!(gaps.len(), seq.count(i));
                prop_assert_eq!(gaps.iter().sum::<u64>(), seq.period() as u64);
                let mut a = gaps;
                let mut b = seq.shifted(shift).cyclic_gaps(i).unwrap();
                a.sort_unstable();
                b.sort_unstable();
                prop_assert_eq!(a, b);
            }
        }
    }
}
