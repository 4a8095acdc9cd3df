//! Descriptive summaries, one-sample t-tests and Bonferroni-adjusted pairwise comparisons.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use super::ratings::RatingRecord;

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no records to summarise")]
    NoRecords,
    #[error("no grouping factors given")]
    NoFactors,
    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),
    #[error("pairwise comparison needs at least two groups, got {0}")]
    TooFewGroups(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    AngularVelocity,
    Delay,
    Location,
    Spacing,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::AngularVelocity => "omega",
            Factor::Delay => "delay",
            Factor::Location => "location",
            Factor::Spacing => "spacing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Continuity,
    Pleasantness,
}

impl Measure {
    pub fn of(self, record: &RatingRecord) -> f64 {
        match self {
            Measure::Continuity => record.continuity as f64,
            Measure::Pleasantness => record.pleasantness as f64,
        }
    }
}

/// One factor level: sorts by `order`, displays as `label`.
#[derive(Debug, Clone, Serialize)]
pub struct Level {
    pub factor: Factor,
    pub label: String,
    #[serde(skip)]
    order: f64,
}

impl Level {
    pub fn of(factor: Factor, record: &RatingRecord) -> Self {
        let c = &record.trial.condition;
        let (label, order) = match factor {
            Factor::AngularVelocity => (c.angular_velocity.to_string(), c.angular_velocity.value()),
            Factor::Delay => {
                let pct = (c.delay_fraction * 100.0 * 1e6).round() / 1e6;
                (format!("{pct}%"), c.delay_fraction)
            }
            Factor::Location => match c.location {
                Some(l) => (l.as_str().to_string(), l as u8 as f64),
                None => ("-".to_string(), -1.0),
            },
            Factor::Spacing => (format!("{}mm", c.spacing_mm), c.spacing_mm),
        };
        Level {
            factor,
            label,
            order,
        }
    }
}

impl PartialEq for Level {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Level {}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        self.factor
            .cmp(&other.factor)
            .then(self.order.total_cmp(&other.order))
            .then_with(|| self.label.cmp(&other.label))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation over √n; `None` when n = 1.
    pub std_error: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub key: Vec<Level>,
    pub summary: Summary,
}

impl GroupSummary {
    pub fn label(&self) -> String {
        self.key
            .iter()
            .map(|l| format!("{}={}", l.factor.name(), l.label))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance (n − 1 denominator).
fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn summarize_values(values: &[f64]) -> Result<Summary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::NoRecords);
    }
    let n = values.len();
    let std_error = (n > 1).then(|| (variance(values) / n as f64).sqrt());
    Ok(Summary {
        mean: mean(values),
        std_error,
        n,
    })
}

/// Groups `records` by the levels of `group_by` and summarises `measure` within each group.
pub fn summarize(
    records: &[RatingRecord],
    group_by: &[Factor],
    measure: Measure,
) -> Result<Vec<GroupSummary>, StatsError> {
    if records.is_empty() {
        return Err(StatsError::NoRecords);
    }
    if group_by.is_empty() {
        return Err(StatsError::NoFactors);
    }
    let groups = group_values(records, group_by, measure);
    groups
        .into_iter()
        .map(|(key, values)| {
            Ok(GroupSummary {
                key,
                summary: summarize_values(&values)?,
            })
        })
        .collect()
}

fn group_values(
    records: &[RatingRecord],
    group_by: &[Factor],
    measure: Measure,
) -> BTreeMap<Vec<Level>, Vec<f64>> {
    let mut groups: BTreeMap<Vec<Level>, Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = group_by.iter().map(|&f| Level::of(f, r)).collect();
        groups.entry(key).or_default().push(measure.of(r));
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

/// Two-sided p-value for a Student-t statistic.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

pub fn one_sample_t(values: &[f64], mu0: f64) -> Result<TTest, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::Degenerate("fewer than two values"));
    }
    let var = variance(values);
    if var.is_nan() || var <= 0.0 {
        return Err(StatsError::Degenerate("zero variance"));
    }
    let n = values.len() as f64;
    let t = (mean(values) - mu0) / (var / n).sqrt();
    let df = n - 1.0;
    Ok(TTest {
        t,
        df,
        p: student_t_two_sided(t, df),
    })
}

/// Welch's unequal-variance two-sample t-test.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::Degenerate("fewer than two values in a group"));
    }
    let va = variance(a) / a.len() as f64;
    let vb = variance(b) / b.len() as f64;
    let se2 = va + vb;
    if se2.is_nan() || se2 <= 0.0 {
        return Err(StatsError::Degenerate("zero variance in both groups"));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    Ok(TTest {
        t,
        df,
        p: student_t_two_sided(t, df),
    })
}

/// Paired t-test on `a[i] − b[i]`.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::Degenerate("paired samples differ in length"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    one_sample_t(&diffs, 0.0)
}

pub fn bonferroni(p: f64, comparisons: usize) -> f64 {
    (p * comparisons as f64).min(1.0)
}

/// Values for one group, optionally keyed (e.g. by participant) for pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGroup {
    pub label: String,
    pub values: Vec<f64>,
    pub keys: Option<Vec<String>>,
}

impl LabeledGroup {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
            keys: None,
        }
    }

    pub fn keyed(label: impl Into<String>, values: Vec<f64>, keys: Vec<String>) -> Self {
        Self {
            label: label.into(),
            values,
            keys: Some(keys),
        }
    }

    fn by_key(&self) -> Option<BTreeMap<&str, f64>> {
        let keys = self.keys.as_ref()?;
        if keys.len() != self.values.len() {
            return None;
        }
        let map: BTreeMap<&str, f64> = keys
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
            .collect();
        (map.len() == keys.len()).then_some(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMethod {
    Paired,
    Welch,
}

impl fmt::Display for PairMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairMethod::Paired => "paired",
            PairMethod::Welch => "welch",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub test: TTest,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResult {
    pub a: usize,
    pub b: usize,
    pub method: PairMethod,
    #[serde(serialize_with = "serialize_outcome")]
    pub outcome: Result<PairComparison, StatsError>,
}

fn serialize_outcome<S: serde::Serializer>(
    outcome: &Result<PairComparison, StatsError>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match outcome {
        Ok(c) => c.serialize(s),
        Err(e) => s.collect_str(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseMatrix {
    pub labels: Vec<String>,
    pub comparisons: usize,
    pub pairs: Vec<PairResult>,
}

impl PairwiseMatrix {
    /// Adjusted p for groups `i` and `j` in either order, if that pair was testable.
    pub fn adjusted(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs
            .iter()
            .find(|p| p.a == a && p.b == b)
            .and_then(|p| p.outcome.as_ref().ok())
            .map(|c| c.adjusted_p)
    }
}

/// Tests every unordered pair of groups and applies the Bonferroni correction over all pairs.
///
/// A pair is compared with a paired t-test when both groups carry the same set of unique keys,
/// and with Welch's test otherwise. Degenerate pairs are reported in place.
pub fn pairwise_bonferroni(groups: &[LabeledGroup]) -> Result<PairwiseMatrix, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    let m = groups.len() * (groups.len() - 1) / 2;
    let mut pairs = Vec::with_capacity(m);
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (ga, gb) = (&groups[i], &groups[j]);
            let keyed = match (ga.by_key(), gb.by_key()) {
                (Some(ka), Some(kb))
                    if ka.keys().collect::<BTreeSet<_>>() == kb.keys().collect::<BTreeSet<_>>() =>
                {
                    Some((ka, kb))
                }
                _ => None,
            };
            let (method, test) = match keyed {
                Some((ka, kb)) => {
                    let a: Vec<f64> = ka.values().copied().collect();
                    let b: Vec<f64> = kb.values().copied().collect();
                    (PairMethod::Paired, paired_t(&a, &b))
                }
                None => (PairMethod::Welch, welch_t(&ga.values, &gb.values)),
            };
            let outcome = test.map(|test| {
                let adjusted_p = bonferroni(test.p, m);
                PairComparison {
                    test,
                    raw_p: test.p,
                    adjusted_p,
                    significant: adjusted_p < ALPHA,
                }
            });
            pairs.push(PairResult {
                a: i,
                b: j,
                method,
                outcome,
            });
        }
    }
    Ok(PairwiseMatrix {
        labels: groups.iter().map(|g| g.label.clone()).collect(),
        comparisons: m,
        pairs,
    })
}

/// Builds one group per level of `factor`. With two or more participants the values are
/// per-participant means keyed by participant (for paired tests); otherwise raw ratings.
pub fn groups_by_factor(
    records: &[RatingRecord],
    factor: Factor,
    measure: Measure,
) -> Vec<LabeledGroup> {
    let participants: BTreeSet<u32> = records.iter().map(|r| r.participant).collect();
    let mut cells: BTreeMap<Level, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for r in records {
        cells
            .entry(Level::of(factor, r))
            .or_default()
            .entry(r.participant)
            .or_default()
            .push(measure.of(r));
    }
    cells
        .into_iter()
        .map(|(level, by_participant)| {
            if participants.len() >= 2 {
                let (keys, values) = by_participant
                    .into_iter()
                    .map(|(p, v)| (p.to_string(), mean(&v)))
                    .unzip();
                LabeledGroup::keyed(level.label, values, keys)
            } else {
                LabeledGroup::new(
                    level.label,
                    by_participant.into_values().flatten().collect(),
                )
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn summary_examples() {
        let s = summarize_values(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((s.mean, s.std_error, s.n), (5.0, Some(0.0), 3));
        let s = summarize_values(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_relative_eq!(s.std_error.unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(summarize_values(&[4.0]).unwrap().std_error, None);
        assert_eq!(summarize_values(&[]), Err(StatsError::NoRecords));
    }

    #[test]
    fn one_sample_examples() {
        let r = one_sample_t(&[-1.0, 0.0, 1.0], 0.0).unwrap();
        assert_eq!(r.t, 0.0);
        assert_relative_eq!(r.p, 1.0, epsilon = 1e-12);
        // Closed form for df = 2: p = 1 − t / sqrt(t² + 2).
        let r = one_sample_t(&[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_relative_eq!(r.t, 12f64.sqrt(), epsilon = 1e-12);
        assert_eq!(r.df, 2.0);
        assert_relative_eq!(r.p, 1.0 - r.t / (r.t * r.t + 2.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(r.p, 0.0742, epsilon = 1e-4);
        assert_eq!(
            one_sample_t(&[5.0, 5.0, 5.0], 0.0),
            Err(StatsError::Degenerate("zero variance"))
        );
        assert!(one_sample_t(&[1.0], 0.0).is_err());
    }

    #[test]
    fn welch_example() {
        // Equal variances and sizes: df = 4, t = −10/sqrt(2/3); p from df-4 closed form.
        let r = welch_t(&[1.0, 2.0, 3.0], &[11.0, 12.0, 13.0]).unwrap();
        assert_relative_eq!(r.t, -10.0 / (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(r.df, 4.0, epsilon = 1e-12);
        let t = r.t.abs();
        let x = t / (t * t + 4.0).sqrt();
        let closed = 1.0 - x * (1.5 - 0.5 * x * x);
        assert_relative_eq!(r.p, closed, epsilon = 1e-12);
        assert_relative_eq!(r.p, 0.000_255_2, epsilon = 1e-7);
    }

    #[test]
    fn bonferroni_cap() {
        assert_relative_eq!(bonferroni(0.01, 15), 0.15, epsilon = 1e-15);
        assert_eq!(bonferroni(0.2, 15), 1.0);
    }

    #[test]
    fn pairwise_methods() {
        let same = pairwise_bonferroni(&[
            LabeledGroup::new("a", vec![1.0, 2.0, 3.0]),
            LabeledGroup::new("b", vec![1.0, 2.0, 3.0]),
        ])
        .unwrap();
        let c = same.pairs[0].outcome.as_ref().unwrap();
        assert_eq!(same.pairs[0].method, PairMethod::Welch);
        assert_relative_eq!(c.raw_p, 1.0, epsilon = 1e-12);
        assert_eq!(c.adjusted_p, 1.0);

        let keys = || vec!["p1".to_string(), "p2".into(), "p3".into()];
        let keyed = pairwise_bonferroni(&[
            LabeledGroup::keyed("a", vec![1.0, 2.0, 3.0], keys()),
            LabeledGroup::keyed("b", vec![1.0, 2.0, 3.0], keys()),
            LabeledGroup::keyed("c", vec![2.0, 4.0, 5.0], keys()),
        ])
        .unwrap();
        assert_eq!(keyed.comparisons, 3);
        assert_eq!(keyed.pairs[0].method, PairMethod::Paired);
        assert!(matches!(
            keyed.pairs[0].outcome,
            Err(StatsError::Degenerate(_))
        ));
        // a − c = (−1, −2, −2)
        let ac = keyed.pairs[1].outcome.as_ref().unwrap();
        let direct = one_sample_t(&[-1.0, -2.0, -2.0], 0.0).unwrap();
        assert_eq!(ac.test, direct);
        assert_eq!(keyed.adjusted(2, 0), Some(bonferroni(direct.p, 3)));

        assert_eq!(
            pairwise_bonferroni(&[LabeledGroup::new("x", vec![1.0, 2.0])]),
            Err(StatsError::TooFewGroups(1))
        );
    }
}
