//! Consensus estimation: per-name posterior and the EM loop that
//! alternates posterior updates with per-source competence updates.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{ClassifierConfig, SourceResponseMatrix};

/// Posterior probability that one name's consensus gender is female, given
/// each responding source's vote and competence. The two hypothesis
/// products run only over sources that actually voted on this name.
///
/// `votes` pairs a source index (into `competences`) with a 0/1 vote.
/// Competences must already be clamped inside (0, 1).
pub fn posterior_given_competences(votes: &[(usize, u8)], competences: &[f64]) -> Result<f64> {
    if votes.is_empty() {
        return Err(Error::Degenerate("no votes for name".into()));
    }
    let mut female = 1.0_f64;
    let mut male = 1.0_f64;
    for &(source, vote) in votes {
        let c = competences[source];
        let x = f64::from(vote);
        female *= x * c + (1.0 - x) * (1.0 - c);
        male *= x * (1.0 - c) + (1.0 - x) * c;
    }
    Ok(female / (female + male))
}

/// Distance from maximal ambiguity: `u = 0.5 - |0.5 - pgf|`.
pub fn uncertainty(pgf: f64) -> f64 {
    0.5 - (0.5 - pgf).abs()
}

/// Converged (or iteration-capped) EM estimates.
#[derive(Debug, Clone)]
pub struct EmFit {
    /// Female-consensus posterior per name key.
    pub pgf: BTreeMap<String, f64>,
    /// Per-source competence, aligned with the matrix source order.
    pub competences: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration cap was hit first; the estimates are
    /// still usable, the flag just records it.
    pub converged: bool,
}

fn clamp(c: f64, epsilon: f64) -> f64 {
    c.clamp(epsilon, 1.0 - epsilon)
}

/// Fit consensus posteriors and source competences by EM.
///
/// Every competence starts at 0.75 (above chance, below certainty) and the
/// initial posteriors come from one E-step. Each round then recomputes
/// competences from the posteriors (averaging only over names the source
/// answered) and posteriors from the competences, until the largest
/// posterior change drops below `em_tolerance` or `em_max_iters` rounds
/// have run. Deterministic for fixed inputs and config.
pub fn em_fit(matrix: &SourceResponseMatrix, config: &ClassifierConfig) -> Result<EmFit> {
    config.validate()?;
    let n_sources = matrix.sources().len();
    let n_names = matrix.names().len();
    if n_sources == 0 || n_names == 0 {
        return Err(Error::Degenerate(
            "response matrix needs at least one source and one name".into(),
        ));
    }

    let eps = config.competence_epsilon;
    let mut competences = vec![clamp(0.75, eps); n_sources];
    let mut posteriors = vec![0.0_f64; n_names];
    for (name_idx, z) in posteriors.iter_mut().enumerate() {
        *z = posterior_given_competences(matrix.votes_for_name(name_idx), &competences)?;
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.em_max_iters {
        iterations += 1;

        // M-step: competence is the mean agreement with the consensus,
        // over the names this source answered.
        for (source_idx, c) in competences.iter_mut().enumerate() {
            let votes = matrix.votes_for_source(source_idx);
            debug_assert!(!votes.is_empty());
            let mut agreement = 0.0;
            for &(name_idx, vote) in votes {
                let z = posteriors[name_idx];
                let x = f64::from(vote);
                agreement += x * z + (1.0 - x) * (1.0 - z);
            }
            *c = clamp(agreement / votes.len() as f64, eps);
        }

        // E-step: refresh every posterior from the new competences.
        let mut max_delta = 0.0_f64;
        for (name_idx, z) in posteriors.iter_mut().enumerate() {
            let updated =
                posterior_given_competences(matrix.votes_for_name(name_idx), &competences)?;
            max_delta = max_delta.max((updated - *z).abs());
            *z = updated;
        }

        if max_delta < config.em_tolerance {
            converged = true;
            break;
        }
    }

    let pgf = matrix
        .names()
        .iter()
        .cloned()
        .zip(posteriors.iter().copied())
        .collect();
    Ok(EmFit {
        pgf,
        competences,
        iterations,
        converged,
    })
}
