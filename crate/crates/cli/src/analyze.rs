//! The `analyze` command: attacker best responses against a schedule artifact.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive};
use patrol_core::attacker::best_response;
use patrol_core::gaps::{empirical_gap_distribution, trajectory_gap_distribution};
use patrol_core::sequence::trajectory_gaps;
use patrol_core::values::parse_rational;
use patrol_core::verifier::{
    certify_optimal, pooled_quasi_regularity, trajectory_quasi_regularity,
};
use patrol_core::{GapDistribution, PeriodicSequence, Rational, ValueVector};
use serde::Serialize;

use crate::artifact::{Artifact, KRecord, FORMAT};
use crate::config::Strategy;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub gap: u64,
    /// Occurrences of the gap, summed over components or along the trajectory.
    pub count: u64,
    /// Size-biased probability that a uniform time lies in a gap of this length.
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetAnalysis {
    pub target: usize,
    pub value: String,
    pub gaps: Vec<GapRow>,
    pub t_star: f64,
    pub utility: f64,
    pub ratio_to_quarter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Analysis {
    pub format: &'static str,
    pub strategy: Strategy,
    pub targets: Vec<TargetAnalysis>,
    pub quasi_regularity: KRecord,
    pub max_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<String>>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn rows(counts: &BTreeMap<u64, u64>, dist: &GapDistribution<f64>) -> Vec<GapRow> {
    dist.support()
        .iter()
        .zip(dist.probabilities())
        .map(|(&gap, &probability)| GapRow {
            gap,
            count: counts.get(&gap).copied().unwrap_or(0),
            probability,
        })
        .collect()
}

fn count_gaps(gaps: impl IntoIterator<Item = u64>, into: &mut BTreeMap<u64, u64>) {
    for g in gaps {
        *into.entry(g).or_default() += 1;
    }
}

fn check_entries(entries: &[usize], targets: usize) -> CliResult<()> {
    if entries.is_empty() {
        return Err(bad("empty schedule"));
    }
    if let Some(&x) = entries.iter().find(|&&x| x >= targets) {
        return Err(bad(format!("entry {x} names no target (have {targets})")));
    }
    Ok(())
}

fn analyze_components(artifact: &Artifact) -> CliResult<Analysis> {
    let values = ValueVector::parse(&artifact.values)?;
    let n = values.len();
    let mut mixture: Vec<(Rational, PeriodicSequence)> = Vec::new();
    for (j, c) in artifact.components.iter().enumerate() {
        check_entries(&c.entries, n)?;
        if c.period != c.entries.len() {
            return Err(bad(format!(
                "component {j}: period {} but {} entries",
                c.period,
                c.entries.len()
            )));
        }
        let weight = parse_rational(&c.weight)?;
        mixture.push((weight, PeriodicSequence::new(c.entries.clone(), n)?));
    }
    let total: Rational = mixture.iter().map(|(w, _)| w.clone()).sum();
    if !total.is_one() {
        return Err(bad(format!("component weights sum to {total}, not 1")));
    }
    let cert = certify_optimal(&values, &mixture)?;
    let k = pooled_quasi_regularity(mixture.iter().map(|(_, s)| s))?;
    let mut targets = Vec::with_capacity(n);
    for (t, value) in cert.targets.iter().zip(values.iter()) {
        let mut counts = BTreeMap::new();
        let mut dists = Vec::with_capacity(mixture.len());
        for (w, seq) in &mixture {
            count_gaps(seq.cyclic_gaps(t.target)?, &mut counts);
            dists.push((w.clone(), empirical_gap_distribution(seq, t.target)?));
        }
        let dist = GapDistribution::mixture(dists.iter().map(|(w, d)| (w.clone(), d)))?;
        targets.push(TargetAnalysis {
            target: t.target,
            value: value.to_string(),
            gaps: rows(&counts, &dist.to_f64()),
            t_star: t.response.t_star,
            utility: t.response.utility,
            ratio_to_quarter: t.response.ratio_to_quarter,
        });
    }
    Ok(Analysis {
        format: "patrol-analysis/1",
        strategy: artifact.strategy,
        targets,
        quasi_regularity: KRecord::from(&k),
        max_ratio: cert.max_ratio(),
        certified: Some(cert.certified),
        violations: Some(cert.violations),
    })
}

fn analyze_trajectory(artifact: &Artifact, entries: &[usize]) -> CliResult<Analysis> {
    let values = artifact
        .values
        .iter()
        .map(|s| {
            let v = parse_rational(s)
                .ok()
                .and_then(|r| r.to_f64())
                .or_else(|| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("cannot parse value {s:?}")))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("value {s} must be positive")))
            }
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(bad("no values"));
    }
    check_entries(entries, values.len())?;
    let k = trajectory_quasi_regularity(entries, values.len())?;
    let mut targets = Vec::with_capacity(values.len());
    for (i, (&value, label)) in values.iter().zip(&artifact.values).enumerate() {
        let mut counts = BTreeMap::new();
        count_gaps(trajectory_gaps(entries, i), &mut counts);
        let dist = trajectory_gap_distribution::<f64>(entries, i)?;
        let r = best_response(i, &value, &dist.cdf());
        targets.push(TargetAnalysis {
            target: i,
            value: label.clone(),
            gaps: rows(&counts, &dist),
            t_star: r.t_star,
            utility: r.utility,
            ratio_to_quarter: r.ratio_to_quarter,
        });
    }
    let max_ratio = targets
        .iter()
        .map(|t| t.ratio_to_quarter)
        .fold(0.0, f64::max);
    Ok(Analysis {
        format: "patrol-analysis/1",
        strategy: artifact.strategy,
        targets,
        quasi_regularity: KRecord::from(&k),
        max_ratio,
        certified: None,
        violations: None,
    })
}

pub fn analyze(artifact: &Artifact) -> CliResult<Analysis> {
    if artifact.format != FORMAT {
        return Err(bad(format!(
            "unsupported format {:?}, expected {FORMAT:?}",
            artifact.format
        )));
    }
    match (&artifact.trajectory, artifact.components.is_empty()) {
        (Some(entries), true) => analyze_trajectory(artifact, entries),
        (None, false) => analyze_components(artifact),
        (None, true) => Err(bad("empty schedule")),
        (Some(_), false) => Err(bad("artifact has both components and a trajectory")),
    }
}

/// Gap histogram with header `target,gap,count,probability`.
pub fn write_csv<W: std::io::Write>(analysis: &Analysis, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["target", "gap", "count", "probability"])?;
    for t in &analysis.targets {
        for g in &t.gaps {
            w.write_record([
                t.target.to_string(),
                g.gap.to_string(),
                g.count.to_string(),
                g.probability.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
