//! Schedule artifacts and the `generate` command.

use num_traits::{One, ToPrimitive};
use patrol_core::dyadic::OptimalSampler;
use patrol_core::golden::GoldenState;
use patrol_core::matching::{matching_schedule, DEFAULT_MAX_RETRIES};
use patrol_core::values::parse_rational;
use patrol_core::verifier::{
    pooled_quasi_regularity, trajectory_quasi_regularity, QuasiRegularity,
};
use patrol_core::{rng, PeriodicSequence, Rational, ValueVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{parse_values, Config, MixtureMode, Strategy, Values};
use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "patrol-schedule/1";
pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_EPSILON: f64 = 1.0;
/// Cap on sampled dyadic draws per artifact.
pub const MAX_SAMPLES: usize = 100_000;
/// Cap on trajectory length per artifact.
pub const MAX_STEPS: usize = 100_000_000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture_mode: Option<MixtureMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Matching draws used, including the successful one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precondition: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<u64>>,
    /// Committed binary prefix of the golden phase, as a decimal integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_prefix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_bits: Option<u64>,
    /// Set when a single golden value was completed by a filler target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_target: Option<bool>,
}

/// One periodic sequence of a randomized schedule, played with a uniform
/// cyclic shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: String,
    pub period: usize,
    pub entries: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounding: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapStatistics {
    pub target: usize,
    pub frequency: f64,
    pub min_gap: u64,
    pub max_gap: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KRecord {
    pub exact: String,
    pub value: f64,
}

impl From<&QuasiRegularity> for KRecord {
    fn from(q: &QuasiRegularity) -> Self {
        Self {
            exact: q.k.to_string(),
            value: q.k.to_f64().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    pub format: String,
    pub generator: String,
    pub strategy: Strategy,
    pub values: Vec<String>,
    pub seed: u64,
    pub parameters: Parameters,
    #[serde(default)]
    pub components: Vec<Component>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<usize>>,
    pub gap_statistics: Vec<GapStatistics>,
    pub quasi_regularity: KRecord,
}

fn component(weight: Rational, seq: &PeriodicSequence) -> Component {
    Component {
        weight: weight.to_string(),
        period: seq.period(),
        entries: seq.entries().to_vec(),
        rounding: None,
        shift: None,
    }
}

fn component_statistics(
    targets: usize,
    components: &[(Rational, PeriodicSequence)],
) -> CliResult<(Vec<GapStatistics>, KRecord)> {
    let k = pooled_quasi_regularity(components.iter().map(|(_, s)| s))?;
    let stats = (0..targets)
        .map(|i| {
            let freq: Rational = components.iter().map(|(w, s)| w * s.frequency(i)).sum();
            GapStatistics {
                target: i,
                frequency: freq.to_f64().unwrap_or(f64::NAN),
                min_gap: k.ranges[i].0,
                max_gap: k.ranges[i].1,
            }
        })
        .collect();
    Ok((stats, KRecord::from(&k)))
}

fn trajectory_statistics(
    targets: usize,
    entries: &[usize],
) -> CliResult<(Vec<GapStatistics>, KRecord)> {
    let k = trajectory_quasi_regularity(entries, targets)
        .map_err(|e| CliError::Input(format!("{e} with a complete gap; increase steps")))?;
    let stats = (0..targets)
        .map(|i| GapStatistics {
            target: i,
            frequency: entries.iter().filter(|&&x| x == i).count() as f64 / entries.len() as f64,
            min_gap: k.ranges[i].0,
            max_gap: k.ranges[i].1,
        })
        .collect();
    Ok((stats, KRecord::from(&k)))
}

/// Golden frequencies; a lone value `p` is completed by a filler target `1 - p`.
fn golden_frequencies(raw: &[serde_json::Value]) -> CliResult<(Vec<Rational>, bool)> {
    if let [serde_json::Value::String(s)] = raw {
        let p = parse_rational(s)?;
        if p <= Rational::from_integer(0.into()) || p >= Rational::one() {
            return Err(CliError::Input(format!(
                "single value {p} must lie in (0, 1)"
            )));
        }
        let rest = Rational::one() - &p;
        return Ok((vec![p, rest], true));
    }
    match parse_values(Strategy::Golden, raw)? {
        Values::Exact(v) => Ok((v.as_slice().to_vec(), false)),
        Values::Float(_) => unreachable!("golden values are exact"),
    }
}

fn exact_values(strategy: Strategy, raw: &[serde_json::Value]) -> CliResult<ValueVector> {
    match parse_values(strategy, raw)? {
        Values::Exact(v) => Ok(v),
        Values::Float(_) => unreachable!("{strategy:?} values are exact"),
    }
}

fn check_steps(steps: usize) -> CliResult<usize> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(CliError::Input(format!(
            "steps {steps} outside 1..={MAX_STEPS}"
        )));
    }
    Ok(steps)
}

/// Builds the artifact for `config`; the result depends only on the config.
pub fn generate(config: &Config, seed: u64) -> CliResult<Artifact> {
    let mut parameters = Parameters::default();
    let mut components = Vec::new();
    let mut trajectory = None;
    let (labels, (gap_statistics, quasi_regularity)) = match config.strategy {
        Strategy::Dyadic => {
            let values = exact_values(Strategy::Dyadic, &config.values)?;
            let sampler = OptimalSampler::new(values.clone())?;
            let mode = config.mixture_mode.unwrap_or(MixtureMode::Sampled);
            parameters.mixture_mode = Some(mode);
            let mixture = match mode {
                MixtureMode::Exact => {
                    let mixture = sampler.exact_mixture()?;
                    components = mixture
                        .iter()
                        .map(|(w, s)| component(w.clone(), s))
                        .collect();
                    mixture
                }
                MixtureMode::Sampled => {
                    let samples = config.samples.unwrap_or(1);
                    if samples == 0 || samples > MAX_SAMPLES {
                        return Err(CliError::Input(format!(
                            "samples {samples} outside 1..={MAX_SAMPLES}"
                        )));
                    }
                    parameters.samples = Some(samples);
                    let weight = Rational::new(1.into(), (samples as i64).into());
                    let mut mixture = Vec::with_capacity(samples);
                    for s in 0..samples {
                        let draw = sampler.sample(&mut rng::sample(seed, s as u32))?;
                        let seq = draw.sequence();
                        let mut c = component(weight.clone(), &seq);
                        c.rounding = Some(draw.rounding.q.iter().map(|q| q.to_string()).collect());
                        c.shift = Some(draw.shift);
                        components.push(c);
                        mixture.push((weight.clone(), seq));
                    }
                    mixture
                }
            };
            (
                Values::Exact(values.clone()).labels(),
                component_statistics(values.len(), &mixture)?,
            )
        }
        Strategy::Matching => {
            let values = exact_values(Strategy::Matching, &config.values)?;
            let epsilon = config.epsilon.unwrap_or(DEFAULT_EPSILON);
            let schedule = matching_schedule(&values, epsilon, seed, DEFAULT_MAX_RETRIES)?;
            parameters.epsilon = Some(epsilon);
            parameters.attempts = Some(schedule.attempts);
            parameters.precondition = Some(schedule.precondition);
            parameters.slots = Some(schedule.instance.slots());
            parameters.offsets = Some(schedule.instance.offsets().to_vec());
            let mixture = vec![(Rational::one(), schedule.sequence)];
            components = mixture
                .iter()
                .map(|(w, s)| component(w.clone(), s))
                .collect();
            (
                Values::Exact(values.clone()).labels(),
                component_statistics(values.len(), &mixture)?,
            )
        }
        Strategy::Golden => {
            let (freqs, complement) = golden_frequencies(&config.values)?;
            let steps = check_steps(config.steps.unwrap_or(DEFAULT_STEPS))?;
            let mut state = GoldenState::new(&freqs)?;
            let entries = state.trajectory(steps, &mut rng::primary(seed));
            let (prefix, bits) = state.phase();
            parameters.steps = Some(steps);
            parameters.phase_prefix = Some(prefix.to_string());
            parameters.phase_bits = Some(bits);
            parameters.complement_target = complement.then_some(true);
            let stats = trajectory_statistics(freqs.len(), &entries)?;
            trajectory = Some(entries);
            (freqs.iter().map(|f| f.to_string()).collect(), stats)
        }
        Strategy::Iid => {
            let values = parse_values(Strategy::Iid, &config.values)?;
            let steps = check_steps(config.steps.unwrap_or(DEFAULT_STEPS))?;
            parameters.steps = Some(steps);
            let probs = values.to_f64();
            let mut r = rng::primary(seed);
            let entries: Vec<usize> = (0..steps)
                .map(|_| {
                    let u: f64 = r.gen();
                    let mut acc = 0.0;
                    probs
                        .iter()
                        .position(|p| {
                            acc += p;
                            u < acc
                        })
                        .unwrap_or(probs.len() - 1)
                })
                .collect();
            let stats = trajectory_statistics(probs.len(), &entries)?;
            trajectory = Some(entries);
            (values.labels(), stats)
        }
    };
    Ok(Artifact {
        format: FORMAT.into(),
        generator: rng::GENERATOR.into(),
        strategy: config.strategy,
        values: labels,
        seed,
        parameters,
        components,
        trajectory,
        gap_statistics,
        quasi_regularity,
    })
}
