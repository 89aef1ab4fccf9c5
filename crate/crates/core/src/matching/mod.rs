//! Periodic schedules from perfect matchings on the circle.
//!
//! With `M` the common denominator of the values and `A_i = M·α_i`, target
//! `i` owns `A_i` visit tokens at positions `(θ_i + j/A_i) mod 1` for a
//! uniform offset `θ_i`. Slot `t` sits at `t/M`. A token and a slot are
//! joined when their circle distance is at most
//! `δ = (1/M)·√(n·ln M / 2)`, and a perfect matching assigns each slot a
//! visit. Matched tokens move by at most `δ`, so consecutive visits to `i`
//! are between `M/A_i - 2δM` and `M/A_i + 2δM` slots apart.

mod hopcroft_karp;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

pub use hopcroft_karp::maximum_matching;

use crate::error::{Error, Result};
use crate::rng;
use crate::sequence::PeriodicSequence;
use crate::values::{Rational, ValueVector};

/// Largest period handled.
pub const MAX_SLOTS: u64 = 1 << 20;
/// Default number of independent offset draws.
pub const DEFAULT_MAX_RETRIES: u32 = 16;

/// Matching radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Radius {
    /// `δ = (1/M)·√(n·ln M / 2)` with the natural logarithm.
    Formula,
    /// A fixed rational radius.
    Exact(Rational),
}

/// The `j`-th visit token of `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token {
    pub target: usize,
    pub index: u64,
}

/// Slots, tokens and offsets of one draw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotInstance {
    m: u64,
    counts: Vec<u64>,
    /// `θ_i · 2^64`.
    offsets: Vec<u64>,
    radius: Radius,
}

impl SlotInstance {
    /// Instance with explicit offsets `θ_i = offsets[i] / 2^64`.
    pub fn with_offsets(alpha: &ValueVector, offsets: Vec<u64>) -> Result<Self> {
        if offsets.len() != alpha.len() {
            return Err(Error::InvalidValues(format!(
                "{} offsets for {} targets",
                offsets.len(),
                alpha.len()
            )));
        }
        let m = alpha
            .common_denominator()
            .to_u64()
            .filter(|&m| m <= MAX_SLOTS)
            .ok_or_else(|| Error::Precondition(format!("period exceeds {MAX_SLOTS} slots")))?;
        let counts = alpha
            .iter()
            .map(|a| {
                let scaled = a * Rational::from_integer(BigInt::from(m));
                scaled.to_integer().to_u64().expect("A_i ≤ M")
            })
            .collect();
        Ok(Self {
            m,
            counts,
            offsets,
            radius: Radius::Formula,
        })
    }

    pub fn with_radius(mut self, radius: Radius) -> Self {
        self.radius = radius;
        self
    }

    /// `M`.
    pub fn slots(&self) -> u64 {
        self.m
    }

    /// `A_i`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn offset(&self, target: usize) -> Rational {
        Rational::new(BigInt::from(self.offsets[target]), BigInt::one() << 64usize)
    }

    pub fn targets(&self) -> usize {
        self.counts.len()
    }

    pub fn delta(&self) -> f64 {
        match &self.radius {
            Radius::Formula => {
                let m = self.m as f64;
                (self.targets() as f64 * m.ln() / 2.0).sqrt() / m
            }
            Radius::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn tokens(&self) -> Vec<Token> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(target, &a)| (0..a).map(move |index| Token { target, index }))
            .collect()
    }

    /// `(θ_i + j/A_i) mod 1`.
    pub fn position(&self, token: Token) -> Rational {
        let x = self.offset(token.target)
            + Rational::new(
                BigInt::from(token.index),
                BigInt::from(self.counts[token.target]),
            );
        let whole = x.floor();
        x - whole
    }

    /// Whether the circle distance from `token` to slot `t` is at most `δ`.
    pub fn adjacent(&self, token: Token, slot: u64) -> bool {
        let here = Rational::new(BigInt::from(slot), BigInt::from(self.m));
        let diff = (self.position(token) - here).abs();
        let d = diff.clone().min(Rational::one() - diff);
        match &self.radius {
            Radius::Exact(r) => d <= *r,
            Radius::Formula => {
                let m = Rational::from_integer(BigInt::from(self.m));
                let n = Rational::from_integer(BigInt::from(self.targets()));
                let lhs = Rational::from_integer(BigInt::from(2)) * &d * &d * &m * &m / n;
                ln_at_least(self.m, &lhs)
            }
        }
    }

    /// Allowed cyclic gap range of `target`, `M/A_i ∓ 2δM`.
    pub fn gap_bounds(&self, target: usize) -> (f64, f64) {
        let centre = self.m as f64 / self.counts[target] as f64;
        let spread = 2.0 * self.delta() * self.m as f64;
        (centre - spread, centre + spread)
    }
}

/// Draws uniform 64-bit dyadic offsets.
pub fn build_instance<R: Rng + ?Sized>(alpha: &ValueVector, rng: &mut R) -> Result<SlotInstance> {
    let offsets = (0..alpha.len()).map(|_| rng.gen::<u64>()).collect();
    SlotInstance::with_offsets(alpha, offsets)
}

/// Whether `ln m ≥ x`, decided exactly.
fn ln_at_least(m: u64, x: &Rational) -> bool {
    let xf = x.to_f64().unwrap_or(f64::INFINITY);
    let lf = (m as f64).ln();
    if xf < lf * (1.0 - 1e-12) {
        return true;
    }
    if xf > lf * (1.0 + 1e-12) + 1e-300 {
        return false;
    }
    if m == 1 {
        return *x <= Rational::zero();
    }
    // ln m is transcendental for m ≥ 2, so the bracket eventually separates.
    let mut terms = 16;
    loop {
        let (lo, hi) = ln_bracket(m, terms);
        if *x <= lo {
            return true;
        }
        if *x > hi {
            return false;
        }
        terms *= 2;
    }
}

/// Bounds on `atanh(z) = Σ z^(2j+1)/(2j+1)` for `0 ≤ z < 1` from `terms` terms.
fn atanh_bracket(z: &Rational, terms: usize) -> (Rational, Rational) {
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = Rational::zero();
    for j in 0..terms {
        sum += &power / Rational::from_integer(BigInt::from(2 * j + 1));
        power = &power * &z2;
    }
    let tail =
        &power / (Rational::from_integer(BigInt::from(2 * terms + 1)) * (Rational::one() - z2));
    (sum.clone(), sum + tail)
}

/// Rational bounds `lo ≤ ln m ≤ hi` for `m ≥ 1`.
fn ln_bracket(m: u64, terms: usize) -> (Rational, Rational) {
    // m = 2^k · r with 1 ≤ r < 2; ln 2 = 2·atanh(1/3), ln r = 2·atanh((r-1)/(r+1)).
    let k = 63 - m.leading_zeros() as usize;
    let r = Rational::new(BigInt::from(m), BigInt::one() << k);
    let z = (&r - Rational::one()) / (&r + Rational::one());
    let (l2_lo, l2_hi) = atanh_bracket(&Rational::new(BigInt::one(), BigInt::from(3)), terms);
    let (lr_lo, lr_hi) = atanh_bracket(&z, terms);
    let two_k = Rational::from_integer(BigInt::from(2 * k));
    let two = Rational::from_integer(BigInt::from(2));
    (&two_k * l2_lo + &two * lr_lo, two_k * l2_hi + two * lr_hi)
}

/// Tokens and, per token, the adjacent slots.
#[derive(Clone, Debug)]
pub struct SlotGraph {
    pub slots: u64,
    pub tokens: Vec<Token>,
    pub adjacency: Vec<Vec<usize>>,
}

impl SlotGraph {
    pub fn degree(&self, token: usize) -> usize {
        self.adjacency[token].len()
    }

    /// Tokens adjacent to each slot.
    pub fn slot_adjacency(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.slots as usize];
        for (u, slots) in self.adjacency.iter().enumerate() {
            for &t in slots {
                out[t].push(u);
            }
        }
        out
    }
}

pub fn build_graph(inst: &SlotInstance) -> SlotGraph {
    let m = inst.m as i128;
    let delta = inst.delta();
    let tokens = inst.tokens();
    let adjacency = tokens
        .iter()
        .map(|&token| {
            let x = inst.position(token).to_f64().unwrap_or(0.0);
            let lo = ((x - delta) * m as f64).floor() as i128 - 1;
            let hi = ((x + delta) * m as f64).ceil() as i128 + 1;
            let mut slots: Vec<usize> = if hi - lo + 1 >= m {
                (0..inst.m as usize).collect()
            } else {
                (lo..=hi).map(|t| t.rem_euclid(m) as usize).collect()
            };
            slots.retain(|&t| inst.adjacent(token, t as u64));
            slots.sort_unstable();
            slots.dedup();
            slots
        })
        .collect();
    SlotGraph {
        slots: inst.m,
        tokens,
        adjacency,
    }
}

/// Maximum matching of a slot graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingResult {
    /// Token assigned to each slot.
    pub assignment: Vec<Option<Token>>,
    pub success: bool,
}

impl MatchingResult {
    /// The visit sequence of a perfect matching.
    pub fn sequence(&self, targets: usize) -> Option<PeriodicSequence> {
        if !self.success {
            return None;
        }
        let entries = self
            .assignment
            .iter()
            .map(|t| t.map(|t| t.target))
            .collect::<Option<Vec<_>>>()?;
        PeriodicSequence::new(entries, targets).ok()
    }
}

pub fn find_perfect_matching(graph: &SlotGraph) -> MatchingResult {
    let pairs = maximum_matching(graph.slots as usize, &graph.adjacency);
    let mut assignment = vec![None; graph.slots as usize];
    for (u, slot) in pairs.iter().enumerate() {
        if let Some(t) = slot {
            assignment[*t] = Some(graph.tokens[u]);
        }
    }
    let success =
        graph.tokens.len() == graph.slots as usize && assignment.iter().all(Option::is_some);
    MatchingResult {
        assignment,
        success,
    }
}

/// First cyclic slot interval `(start, length)` with fewer adjacent tokens
/// than slots.
pub fn hall_violation_interval(graph: &SlotGraph) -> Option<(usize, usize)> {
    let m = graph.slots as usize;
    let by_slot = graph.slot_adjacency();
    for start in 0..m {
        let mut seen = vec![false; graph.tokens.len()];
        let mut neighbours = 0;
        for len in 1..=m {
            for &u in &by_slot[(start + len - 1) % m] {
                if !seen[u] {
                    seen[u] = true;
                    neighbours += 1;
                }
            }
            if neighbours < len {
                return Some((start, len));
            }
        }
    }
    None
}

/// `α_i ≤ ε/(4+2ε)·√(2/(n·ln M))` for every target.
pub fn precondition_holds(alpha: &ValueVector, epsilon: f64) -> bool {
    let m = alpha.common_denominator().to_f64().unwrap_or(f64::INFINITY);
    let n = alpha.len() as f64;
    let bound = epsilon / (4.0 + 2.0 * epsilon) * (2.0 / (n * m.ln())).sqrt();
    alpha.to_f64().iter().all(|&a| a <= bound)
}

/// A successful matching schedule.
#[derive(Clone, Debug)]
pub struct MatchingSchedule {
    pub sequence: PeriodicSequence,
    pub instance: SlotInstance,
    /// Draws used, including the successful one.
    pub attempts: u32,
    /// Whether the values are small enough for the `1 + ε` gap guarantee.
    pub precondition: bool,
}

/// Draws offsets from stream `1 + r` of `seed` on retry `r` until a perfect
/// matching exists.
pub fn matching_schedule(
    alpha: &ValueVector,
    epsilon: f64,
    seed: u64,
    max_retries: u32,
) -> Result<MatchingSchedule> {
    if max_retries == 0 {
        return Err(Error::Precondition(
            "at least one attempt is required".into(),
        ));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Precondition(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    for retry in 0..max_retries {
        let instance = build_instance(alpha, &mut rng::matching_retry(seed, retry))?;
        let result = find_perfect_matching(&build_graph(&instance));
        if let Some(sequence) = result.sequence(alpha.len()) {
            return Ok(MatchingSchedule {
                sequence,
                instance,
                attempts: retry + 1,
                precondition: precondition_holds(alpha, epsilon),
            });
        }
    }
    Err(Error::RetriesExhausted {
        attempts: max_retries as usize,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::values::ratio;

    fn uniform(n: i64) -> ValueVector {
        ValueVector::new(vec![ratio(1, n); n as usize]).unwrap()
    }

    #[test]
    fn instance_sizes() {
        let alpha = ValueVector::parse(&["1/2", "1/3", "1/6"]).unwrap();
        let inst = build_instance(&alpha, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!(inst.slots(), 6);
        assert_eq!(inst.counts(), &[3, 2, 1]);
        let inst = build_instance(&uniform(4), &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!(inst.counts(), &[1, 1, 1, 1]);
        let want = (4.0 * 4f64.ln() / 2.0).sqrt() / 4.0;
        assert!((inst.delta() - want).abs() < 1e-15);
    }

    #[test]
    fn ln_bracket_contains_ln() {
        for m in [2u64, 3, 6, 64, 1000, 12345] {
            let (lo, hi) = ln_bracket(m, 24);
            let l = (m as f64).ln();
            assert!(lo.to_f64().unwrap() <= l + 1e-15 && l <= hi.to_f64().unwrap() + 1e-15);
            assert!((&hi - &lo).to_f64().unwrap() < 1e-12);
        }
    }

    #[test]
    fn ln_comparison_near_the_boundary() {
        // 19/7 < e < 87/32; ln 15 = 2.70805...
        let below = Rational::new(BigInt::from(2708050), BigInt::from(1000000));
        let above = Rational::new(BigInt::from(2708051), BigInt::from(1000000));
        assert!(ln_at_least(15, &below));
        assert!(!ln_at_least(15, &above));
        // Closer than the float filter can resolve.
        let tiny = Rational::new(BigInt::one(), BigInt::from(10).pow(30));
        assert!(ln_at_least(15, &(ln_bracket(15, 64).0 - &tiny)));
        assert!(!ln_at_least(15, &(ln_bracket(15, 64).1 + &tiny)));
    }

    #[test]
    fn large_radius_gives_complete_graph() {
        let alpha = ValueVector::parse(&["1/2", "1/3", "1/6"]).unwrap();
        let inst = build_instance(&alpha, &mut ChaCha20Rng::seed_from_u64(2))
            .unwrap()
            .with_radius(Radius::Exact(ratio(1, 2)));
        let g = build_graph(&inst);
        assert!((0..g.tokens.len()).all(|u| g.degree(u) == 6));
        assert!(find_perfect_matching(&g).success);
    }

    #[test]
    fn zero_degree_token_fails() {
        let alpha = ValueVector::parse(&["1/2", "1/2"]).unwrap();
        // Offset 1/4 puts target 0's token at 1/4; slots at 0 and 1/2.
        let inst = SlotInstance::with_offsets(&alpha, vec![1 << 62, 0])
            .unwrap()
            .with_radius(Radius::Exact(ratio(1, 8)));
        let g = build_graph(&inst);
        assert_eq!(g.degree(0), 0);
        let r = find_perfect_matching(&g);
        assert!(!r.success);
        assert!(hall_violation_interval(&g).is_some());
    }

    #[test]
    fn token_degrees_follow_the_radius() {
        let alpha = uniform(64);
        for seed in 0..5 {
            let inst = build_instance(&alpha, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            let g = build_graph(&inst);
            let base = (2.0 * inst.delta() * 64.0).floor() as usize;
            for u in 0..g.tokens.len() {
                assert!(
                    (base..=base + 2).contains(&g.degree(u)),
                    "degree {}",
                    g.degree(u)
                );
            }
        }
    }

    #[test]
    fn successful_schedules_meet_the_gap_bounds() {
        let alpha = uniform(64);
        assert!(precondition_holds(&alpha, 2.0));
        let s = matching_schedule(&alpha, 2.0, 9, DEFAULT_MAX_RETRIES).unwrap();
        assert!(s.precondition);
        for i in 0..64 {
            assert_eq!(s.sequence.frequency(i), ratio(1, 64));
            let (lo, hi) = s.instance.gap_bounds(i);
            for g in s.sequence.cyclic_gaps(i).unwrap() {
                assert!(lo <= g as f64 && g as f64 <= hi);
            }
        }
    }

    #[test]
    fn mixed_values_schedule() {
        let alpha =
            ValueVector::parse(&["1/4", "1/4", "1/8", "1/8", "1/12", "1/12", "1/12"]).unwrap();
        let s = matching_schedule(&alpha, 1.0, 3, DEFAULT_MAX_RETRIES).unwrap();
        assert_eq!(s.sequence.period(), 24);
        for (i, a) in alpha.iter().enumerate() {
            assert_eq!(&s.sequence.frequency(i), a);
        }
    }

    #[test]
    fn failures_coincide_with_deficient_intervals() {
        let alpha = ValueVector::parse(&["1/2", "1/3", "1/6"]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (mut failures, mut successes) = (0, 0);
        for _ in 0..300 {
            let inst = build_instance(&alpha, &mut rng)
                .unwrap()
                .with_radius(Radius::Exact(ratio(1, 10)));
            let g = build_graph(&inst);
            let ok = find_perfect_matching(&g).success;
            assert_eq!(ok, hall_violation_interval(&g).is_none());
            if ok {
                successes += 1;
            } else {
                failures += 1;
            }
        }
        assert!(failures > 0 && successes > 0);
    }

    #[test]
    fn retries_are_bounded() {
        assert!(matching_schedule(&uniform(4), 1.0, 0, 0).is_err());
        assert!(matching_schedule(&uniform(4), 0.0, 0, 4).is_err());
    }
}
