//! Consensus-based gender inference from name-gender sources.
//!
//! A response matrix stores binary votes (0 = male, 1 = female) from N
//! sources over M name keys. EM jointly estimates a per-name female
//! posterior (`pgf`) and a per-source competence; predictions then apply
//! either the pgf-only rule or the default uncertainty-threshold rule.

mod em;
mod normalize;

pub use em::{em_fit, posterior_given_competences, uncertainty, EmFit};
pub use normalize::normalize_name;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::GenderLabel;
use crate::error::{Error, Result};
use crate::tsv;

/// Default tau grid used by threshold tuning: 0.02 to 0.30 in 0.02 steps.
pub const DEFAULT_TAU_GRID: [f64; 15] = [
    0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18, 0.20, 0.22, 0.24, 0.26, 0.28, 0.30,
];

/// Prediction rule selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMethod {
    /// Classify only when uncertainty is at or below tau; otherwise unknown.
    Default,
    /// Always classify found names by `pgf >= 0.5`.
    PgfOnly,
}

/// Classifier settings; all ranges are checked by [`ClassifierConfig::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub tau: f64,
    pub method: PredictionMethod,
    pub improvement_enabled: bool,
    pub em_tolerance: f64,
    pub em_max_iters: usize,
    pub competence_epsilon: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            tau: 0.2,
            method: PredictionMethod::Default,
            improvement_enabled: true,
            em_tolerance: 1e-6,
            em_max_iters: 1000,
            competence_epsilon: 1e-3,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.tau) {
            return Err(Error::Config(format!("tau {} outside [0, 0.5]", self.tau)));
        }
        if !(self.em_tolerance > 0.0) {
            return Err(Error::Config("em_tolerance must be positive".into()));
        }
        if self.em_max_iters == 0 {
            return Err(Error::Config("em_max_iters must be positive".into()));
        }
        if !(self.competence_epsilon > 0.0 && self.competence_epsilon < 0.5) {
            return Err(Error::Config(
                "competence_epsilon must lie in (0, 0.5)".into(),
            ));
        }
        Ok(())
    }
}

/// One vote: a source's 0/1 gender call for a name key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixRow {
    pub source: String,
    pub name: String,
    pub vote: u8,
}

/// Binary votes from N sources over M name keys. Absent entries mean the
/// source has no answer for that name. Sources and names are kept sorted
/// so all derived iteration orders are deterministic.
#[derive(Debug, Clone)]
pub struct SourceResponseMatrix {
    sources: Vec<String>,
    names: Vec<String>,
    by_name: Vec<Vec<(usize, u8)>>,
    by_source: Vec<Vec<(usize, u8)>>,
}

impl SourceResponseMatrix {
    /// Build from raw (source, name, vote) rows. Name keys are normalized
    /// with [`normalize_name`] under the same improvement flag that will be
    /// used for lookups, so enabling the improvement can only rewrite keys
    /// toward dictionary-form names (matches never decrease).
    pub fn from_rows(rows: Vec<MatrixRow>, improvement_enabled: bool) -> Result<Self> {
        let mut votes: BTreeMap<(String, String), u8> = BTreeMap::new();
        for row in rows {
            if row.vote > 1 {
                return Err(Error::Integrity(format!(
                    "vote {} for ({}, {}) is not 0 or 1",
                    row.vote, row.source, row.name
                )));
            }
            let key = normalize_name(&row.name, improvement_enabled);
            if key.is_empty() {
                return Err(Error::Integrity(format!(
                    "matrix name {:?} normalizes to an empty key",
                    row.name
                )));
            }
            match votes.insert((row.source.clone(), key.clone()), row.vote) {
                Some(previous) if previous != row.vote => {
                    return Err(Error::Integrity(format!(
                        "conflicting votes for ({}, {key})",
                        row.source
                    )));
                }
                _ => {}
            }
        }
        let sources: Vec<String> = votes
            .keys()
            .map(|(s, _)| s.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let names: Vec<String> = votes
            .keys()
            .map(|(_, n)| n.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let source_index: BTreeMap<&String, usize> =
            sources.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let name_index: BTreeMap<&String, usize> =
            names.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut by_name = vec![Vec::new(); names.len()];
        let mut by_source = vec![Vec::new(); sources.len()];
        for ((source, name), vote) in &votes {
            let s = source_index[source];
            let n = name_index[name];
            by_name[n].push((s, *vote));
            by_source[s].push((n, *vote));
        }
        Ok(SourceResponseMatrix {
            sources,
            names,
            by_name,
            by_source,
        })
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, key: &str) -> bool {
        self.names.binary_search_by(|n| n.as_str().cmp(key)).is_ok()
    }

    pub fn votes_for_name(&self, name_idx: usize) -> &[(usize, u8)] {
        &self.by_name[name_idx]
    }

    pub fn votes_for_source(&self, source_idx: usize) -> &[(usize, u8)] {
        &self.by_source[source_idx]
    }

    /// Flip every vote (0 <-> 1). Under the posterior/competence equations
    /// this maps every pgf to 1 - pgf and leaves competences unchanged.
    pub fn flipped(&self) -> Self {
        let flip = |pairs: &Vec<Vec<(usize, u8)>>| {
            pairs
                .iter()
                .map(|v| v.iter().map(|&(i, x)| (i, 1 - x)).collect())
                .collect()
        };
        SourceResponseMatrix {
            sources: self.sources.clone(),
            names: self.names.clone(),
            by_name: flip(&self.by_name),
            by_source: flip(&self.by_source),
        }
    }
}

/// Load a response matrix TSV (`source_id`, `name`, `vote`).
pub fn load_response_matrix(path: &Path, improvement_enabled: bool) -> Result<SourceResponseMatrix> {
    let rows = tsv::read_rows(path, &["source_id", "name", "vote"])?;
    let mut parsed = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        let vote: u8 = fields[2]
            .parse()
            .ok()
            .filter(|v| *v <= 1)
            .ok_or_else(|| {
                Error::parse(path, line, format!("vote {:?} is not 0 or 1", fields[2]))
            })?;
        parsed.push(MatrixRow {
            source: fields[0].clone(),
            name: fields[1].clone(),
            vote,
        });
    }
    SourceResponseMatrix::from_rows(parsed, improvement_enabled)
}

/// Predicted label for a name key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Female,
    Male,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Female => "female",
            Label::Male => "male",
            Label::Unknown => "unknown",
        }
    }
}

impl From<GenderLabel> for Label {
    fn from(g: GenderLabel) -> Self {
        match g {
            GenderLabel::Male => Label::Male,
            GenderLabel::Female => Label::Female,
        }
    }
}

/// Fitted estimate and predicted label for one name key. `pgf` and
/// `uncertainty` are `None` exactly when the name was not found in the
/// matrix (and for such names the label is always `Unknown`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusEstimate {
    pub name: String,
    pub pgf: Option<f64>,
    pub uncertainty: Option<f64>,
    pub label: Label,
}

/// Apply the configured prediction rule to one name key.
///
/// * pgf-only: female iff `pgf >= 0.5`, male otherwise; unknown only when
///   the name is not in the estimates.
/// * default: if `u <= tau` classify by `pgf >= 0.5`; if `u > tau` or the
///   name is not found, unknown.
pub fn predict(
    name: &str,
    estimates: &BTreeMap<String, f64>,
    config: &ClassifierConfig,
) -> ConsensusEstimate {
    let Some(&pgf) = estimates.get(name) else {
        return ConsensusEstimate {
            name: name.to_string(),
            pgf: None,
            uncertainty: None,
            label: Label::Unknown,
        };
    };
    let u = uncertainty(pgf);
    let by_pgf = if pgf >= 0.5 { Label::Female } else { Label::Male };
    let label = match config.method {
        PredictionMethod::PgfOnly => by_pgf,
        PredictionMethod::Default => {
            if u <= config.tau {
                by_pgf
            } else {
                Label::Unknown
            }
        }
    };
    ConsensusEstimate {
        name: name.to_string(),
        pgf: Some(pgf),
        uncertainty: Some(u),
        label,
    }
}

/// Accuracy and coverage of a prediction set against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    /// Names with an `unknown` prediction (c_u).
    pub unclassified: usize,
    /// Names with a male/female prediction (c).
    pub classified: usize,
    /// Correct predictions among the classified (p).
    pub correct: usize,
    /// p / (c_u + c).
    pub accuracy: f64,
    /// p / c; absent when nothing was classified.
    pub classified_accuracy: Option<f64>,
    /// c / (c_u + c).
    pub coverage: f64,
}

/// Score predictions against a truth table covering every evaluated name.
pub fn evaluate(
    predictions: &BTreeMap<String, ConsensusEstimate>,
    truth: &BTreeMap<String, GenderLabel>,
) -> Result<EvaluationReport> {
    if predictions.is_empty() {
        return Err(Error::Degenerate("no predictions to evaluate".into()));
    }
    let mut unclassified = 0usize;
    let mut classified = 0usize;
    let mut correct = 0usize;
    for (name, estimate) in predictions {
        let Some(&actual) = truth.get(name) else {
            return Err(Error::Integrity(format!(
                "prediction for {name:?} has no ground-truth label"
            )));
        };
        match estimate.label {
            Label::Unknown => unclassified += 1,
            label => {
                classified += 1;
                if label == Label::from(actual) {
                    correct += 1;
                }
            }
        }
    }
    let total = (unclassified + classified) as f64;
    Ok(EvaluationReport {
        unclassified,
        classified,
        correct,
        accuracy: correct as f64 / total,
        classified_accuracy: if classified > 0 {
            Some(correct as f64 / classified as f64)
        } else {
            None
        },
        coverage: classified as f64 / total,
    })
}

/// Result of the coverage-driven threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub tau: f64,
    /// False when no grid value reached the target; `tau` is then the
    /// largest grid value.
    pub target_met: bool,
    /// (tau, coverage) for every grid point, in grid order.
    pub coverage_by_tau: Vec<(f64, f64)>,
}

/// Find the smallest grid tau whose coverage strictly exceeds
/// `target_coverage`. Coverage counts found names with `u <= tau`; names
/// not found in the matrix sit in the denominator only.
pub fn tune_threshold(
    estimates: &BTreeMap<String, f64>,
    not_found: usize,
    target_coverage: f64,
    grid: &[f64],
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::Config("tau grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("tau grid must be sorted ascending".into()));
    }
    if !(target_coverage > 0.0 && target_coverage <= 1.0) {
        return Err(Error::Config("target coverage must lie in (0, 1]".into()));
    }
    let denominator = estimates.len() + not_found;
    if denominator == 0 {
        return Err(Error::Degenerate("no names to tune over".into()));
    }
    let uncertainties: Vec<f64> = estimates.values().map(|&pgf| uncertainty(pgf)).collect();
    let mut coverage_by_tau = Vec::with_capacity(grid.len());
    let mut chosen = None;
    for &tau in grid {
        let covered = uncertainties.iter().filter(|&&u| u <= tau).count();
        let coverage = covered as f64 / denominator as f64;
        coverage_by_tau.push((tau, coverage));
        if chosen.is_none() && coverage > target_coverage {
            chosen = Some(tau);
        }
    }
    Ok(match chosen {
        Some(tau) => TuneResult {
            tau,
            target_met: true,
            coverage_by_tau,
        },
        None => TuneResult {
            tau: *grid.last().unwrap(),
            target_met: false,
            coverage_by_tau,
        },
    })
}

/// Overwrite predictions with ground-truth labels (keyed by name key).
/// Overridden entries get `u = 0` and a pgf of exactly 0 or 1; entries for
/// truth names missing from the predictions are inserted. Everything else
/// is untouched.
pub fn integrate_ground_truth(
    mut predictions: BTreeMap<String, ConsensusEstimate>,
    truth_by_key: &BTreeMap<String, GenderLabel>,
) -> BTreeMap<String, ConsensusEstimate> {
    for (key, &label) in truth_by_key {
        let pgf = match label {
            GenderLabel::Female => 1.0,
            GenderLabel::Male => 0.0,
        };
        predictions.insert(
            key.clone(),
            ConsensusEstimate {
                name: key.clone(),
                pgf: Some(pgf),
                uncertainty: Some(0.0),
                label: label.into(),
            },
        );
    }
    predictions
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(method: PredictionMethod, tau: f64) -> ClassifierConfig {
        ClassifierConfig {
            tau,
            method,
            ..ClassifierConfig::default()
        }
    }

    #[test]
    fn pgf_half_is_female_under_pgf_only() {
        let mut estimates = BTreeMap::new();
        estimates.insert("kim gray".to_string(), 0.5);
        let e = predict("kim gray", &estimates, &config(PredictionMethod::PgfOnly, 0.2));
        assert_eq!(e.label, Label::Female);
    }

    #[test]
    fn default_method_returns_unknown_above_tau() {
        let mut estimates = BTreeMap::new();
        estimates.insert("kim gray".to_string(), 0.7);
        let e = predict("kim gray", &estimates, &config(PredictionMethod::Default, 0.2));
        assert_eq!(e.label, Label::Unknown);
        assert!((e.uncertainty.unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn missing_name_is_unknown_under_both_methods() {
        let estimates = BTreeMap::new();
        for method in [PredictionMethod::Default, PredictionMethod::PgfOnly] {
            let e = predict("absent name", &estimates, &config(method, 0.2));
            assert_eq!(e.label, Label::Unknown);
            assert_eq!(e.pgf, None);
        }
    }

    #[test]
    fn tau_half_classifies_every_found_name() {
        let mut estimates = BTreeMap::new();
        for (i, pgf) in [0.0, 0.1, 0.5, 0.77, 1.0].iter().enumerate() {
            estimates.insert(format!("n{i}"), *pgf);
        }
        let cfg = config(PredictionMethod::Default, 0.5);
        for name in estimates.keys() {
            assert_ne!(predict(name, &estimates, &cfg).label, Label::Unknown);
        }
    }

    #[test]
    fn evaluate_counts_and_formulas() {
        let mut predictions = BTreeMap::new();
        let mut truth = BTreeMap::new();
        // 10 names: 8 classified, 7 of those correct, 2 unknown.
        for i in 0..10 {
            let name = format!("n{i:02}");
            let label = match i {
                0 | 1 => Label::Unknown,
                2 => Label::Male, // wrong, truth says female
                _ => Label::Female,
            };
            predictions.insert(
                name.clone(),
                ConsensusEstimate {
                    name: name.clone(),
                    pgf: Some(0.9),
                    uncertainty: Some(0.1),
                    label,
                },
            );
            truth.insert(name, GenderLabel::Female);
        }
        let report = evaluate(&predictions, &truth).unwrap();
        assert_eq!(report.unclassified, 2);
        assert_eq!(report.classified, 8);
        assert_eq!(report.correct, 7);
        assert!((report.accuracy - 0.7).abs() < 1e-12);
        assert!((report.classified_accuracy.unwrap() - 0.875).abs() < 1e-12);
        assert!((report.coverage - 0.8).abs() < 1e-12);
    }

    #[test]
    fn evaluate_all_unknown_reports_absent_classified_accuracy() {
        let mut predictions = BTreeMap::new();
        let mut truth = BTreeMap::new();
        for i in 0..3 {
            let name = format!("n{i}");
            predictions.insert(
                name.clone(),
                ConsensusEstimate {
                    name: name.clone(),
                    pgf: None,
                    uncertainty: None,
                    label: Label::Unknown,
                },
            );
            truth.insert(name, GenderLabel::Male);
        }
        let report = evaluate(&predictions, &truth).unwrap();
        assert_eq!(report.accuracy, 0.0);
        assert_eq!(report.classified_accuracy, None);
        assert_eq!(report.coverage, 0.0);
    }

    #[test]
    fn evaluate_requires_truth_for_every_name() {
        let mut predictions = BTreeMap::new();
        predictions.insert(
            "nobody".to_string(),
            ConsensusEstimate {
                name: "nobody".to_string(),
                pgf: Some(0.9),
                uncertainty: Some(0.1),
                label: Label::Female,
            },
        );
        let truth = BTreeMap::new();
        assert!(evaluate(&predictions, &truth).is_err());
    }

    #[test]
    fn tune_picks_smallest_grid_value_when_all_certain() {
        let mut estimates = BTreeMap::new();
        for i in 0..5 {
            estimates.insert(format!("n{i}"), 1.0); // u = 0 for everyone
        }
        let result = tune_threshold(&estimates, 0, 0.85, &DEFAULT_TAU_GRID).unwrap();
        assert_eq!(result.tau, DEFAULT_TAU_GRID[0]);
        assert!(result.target_met);
    }

    #[test]
    fn tune_flags_unreachable_target() {
        let mut estimates = BTreeMap::new();
        estimates.insert("n0".to_string(), 1.0);
        // 1 found of 10 names: coverage can never exceed 0.85.
        let result = tune_threshold(&estimates, 9, 0.85, &DEFAULT_TAU_GRID).unwrap();
        assert!(!result.target_met);
        assert_eq!(result.tau, 0.30);
    }

    #[test]
    fn integration_overrides_and_inserts() {
        let mut predictions = BTreeMap::new();
        predictions.insert(
            "ada law".to_string(),
            ConsensusEstimate {
                name: "ada law".to_string(),
                pgf: Some(0.95),
                uncertainty: Some(0.05),
                label: Label::Female,
            },
        );
        predictions.insert(
            "kim gray".to_string(),
            ConsensusEstimate {
                name: "kim gray".to_string(),
                pgf: Some(0.55),
                uncertainty: Some(0.45),
                label: Label::Unknown,
            },
        );
        let mut truth = BTreeMap::new();
        truth.insert("kim gray".to_string(), GenderLabel::Male);
        truth.insert("ada law".to_string(), GenderLabel::Female);
        truth.insert("new name".to_string(), GenderLabel::Female);
        let merged = integrate_ground_truth(predictions, &truth);
        assert_eq!(merged["kim gray"].label, Label::Male);
        assert_eq!(merged["kim gray"].uncertainty, Some(0.0));
        assert_eq!(merged["kim gray"].pgf, Some(0.0));
        assert_eq!(merged["ada law"].label, Label::Female);
        assert_eq!(merged["ada law"].uncertainty, Some(0.0));
        assert_eq!(merged["new name"].label, Label::Female);
        assert_eq!(merged.len(), 3);
    }

    #[test]
    fn matrix_rejects_conflicting_votes() {
        let rows = vec![
            MatrixRow {
                source: "s1".into(),
                name: "Ada Law".into(),
                vote: 1,
            },
            MatrixRow {
                source: "s1".into(),
                name: "ada law".into(),
                vote: 0,
            },
        ];
        assert!(SourceResponseMatrix::from_rows(rows, false).is_err());
    }

    #[test]
    fn matrix_normalizes_keys_with_the_lookup_flag() {
        let rows = vec![MatrixRow {
            source: "s1".into(),
            name: "J. Ada Law".into(),
            vote: 1,
        }];
        let improved = SourceResponseMatrix::from_rows(rows.clone(), true).unwrap();
        assert!(improved.contains("ada law"));
        let plain = SourceResponseMatrix::from_rows(rows, false).unwrap();
        assert!(plain.contains("j. ada law"));
        assert!(!plain.contains("ada law"));
    }
}
