//! Publication corpus: loading, validation, identity resolution.
//!
//! The corpus file is JSON Lines: one object per line with fields
//! `id`, `venue`, `year`, `title`, `authors` (ordered, first author first)
//! and optional `citations`. Loading is fail-fast: any integrity violation
//! rejects the whole file with a line-precise error, because every
//! downstream statistic assumes a clean corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::tsv;

/// One publication, exactly as curated upstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub venue: String,
    pub year: i32,
    pub title: String,
    /// Raw author strings in published order; index 0 is the first author.
    pub authors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub citations: Option<u64>,
}

/// Inclusive year range a venue is configured for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VenueYears {
    pub inception: i32,
    pub end: i32,
}

pub type VenueConfig = BTreeMap<String, VenueYears>;

/// Binary gender label used by the ground-truth table and the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderLabel {
    Male,
    Female,
}

impl GenderLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Male => "male",
            GenderLabel::Female => "female",
        }
    }
}

/// Ground-truth gender labels keyed by canonical author name.
pub type GroundTruth = BTreeMap<String, GenderLabel>;

/// Mapping from every raw author string in the corpus to one canonical name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdentityTable {
    raw_to_canonical: BTreeMap<String, String>,
    canonicals: BTreeSet<String>,
}

impl IdentityTable {
    pub fn canonical(&self, raw: &str) -> Option<&str> {
        self.raw_to_canonical.get(raw).map(|s| s.as_str())
    }

    pub fn canonicals(&self) -> impl Iterator<Item = &str> {
        self.canonicals.iter().map(|s| s.as_str())
    }

    pub fn canonical_count(&self) -> usize {
        self.canonicals.len()
    }
}

/// The loaded, validated corpus shared read-only by all analytics.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub papers: Vec<PaperRecord>,
    pub identities: IdentityTable,
    pub ground_truth: Option<GroundTruth>,
    pub venue_config: VenueConfig,
}

/// Canonical-name normalization for identity resolution: trim, collapse
/// internal whitespace, Unicode NFC. Display case and diacritics are kept.
pub fn canonical_name(raw: &str) -> String {
    let collapsed: Vec<&str> = raw.split_whitespace().collect();
    collapsed.join(" ").nfc().collect()
}

impl Corpus {
    /// Canonical author names of a paper, in published order.
    pub fn paper_authors(&self, paper: &PaperRecord) -> Vec<String> {
        paper
            .authors
            .iter()
            .map(|raw| {
                self.identities
                    .canonical(raw)
                    .expect("corpus invariant: every raw author resolves")
                    .to_string()
            })
            .collect()
    }

    /// Serialize back to the corpus JSONL schema (round-trips with
    /// [`load_corpus`]).
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for paper in &self.papers {
            let line = serde_json::to_string(paper)
                .map_err(|e| Error::Config(format!("serialize paper {}: {e}", paper.id)))?;
            out.push_str(&line);
            out.push('\n');
        }
        Ok(out)
    }
}

fn validate_paper(paper: &PaperRecord, config: &VenueConfig) -> std::result::Result<(), String> {
    if paper.id.is_empty() {
        return Err("empty paper id".into());
    }
    if paper.title.trim().is_empty() {
        return Err(format!("paper {}: empty title", paper.id));
    }
    if paper.authors.is_empty() {
        return Err(format!("paper {}: empty author list", paper.id));
    }
    for a in &paper.authors {
        if canonical_name(a).is_empty() {
            return Err(format!("paper {}: blank author name", paper.id));
        }
    }
    let Some(years) = config.get(&paper.venue) else {
        return Err(format!(
            "paper {}: venue {:?} not in venue config",
            paper.id, paper.venue
        ));
    };
    if paper.year < years.inception || paper.year > years.end {
        return Err(format!(
            "paper {}: year {} outside configured {}..{} for venue {}",
            paper.id, paper.year, years.inception, years.end, paper.venue
        ));
    }
    Ok(())
}

/// Load and validate the corpus file. Row count equals the number of
/// schema-valid records; any violation rejects the whole file.
pub fn load_corpus(papers_path: &Path, config: &VenueConfig) -> Result<Corpus> {
    let file = fs::File::open(papers_path).map_err(|e| Error::io(papers_path, e))?;
    let reader = BufReader::new(file);
    let mut papers = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(papers_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let paper: PaperRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(papers_path, idx + 1, format!("malformed record: {e}")))?;
        validate_paper(&paper, config).map_err(|m| Error::parse(papers_path, idx + 1, m))?;
        if !seen_ids.insert(paper.id.clone()) {
            return Err(Error::parse(
                papers_path,
                idx + 1,
                format!("duplicate paper id {:?}", paper.id),
            ));
        }
        papers.push(paper);
    }
    let identities = build_identities(&papers, &BTreeMap::new());
    Ok(Corpus {
        papers,
        identities,
        ground_truth: None,
        venue_config: config.clone(),
    })
}

fn build_identities(papers: &[PaperRecord], alias_map: &BTreeMap<String, String>) -> IdentityTable {
    let mut table = IdentityTable::default();
    for paper in papers {
        for raw in &paper.authors {
            let normalized = canonical_name(raw);
            let canonical = alias_map
                .get(&normalized)
                .cloned()
                .unwrap_or(normalized);
            table.canonicals.insert(canonical.clone());
            table.raw_to_canonical.insert(raw.clone(), canonical);
        }
    }
    table
}

/// Load an alias map file (`raw_name` -> `canonical_name` TSV). Raw names
/// are matched after canonical-name normalization of both columns.
pub fn load_alias_map(path: &Path) -> Result<BTreeMap<String, String>> {
    let rows = tsv::read_rows(path, &["raw_name", "canonical_name"])?;
    let mut map = BTreeMap::new();
    for (line, fields) in rows {
        let raw = canonical_name(&fields[0]);
        let canon = canonical_name(&fields[1]);
        if raw.is_empty() || canon.is_empty() {
            return Err(Error::parse(path, line, "blank name in alias map"));
        }
        if let Some(previous) = map.insert(raw.clone(), canon.clone()) {
            if previous != canon {
                return Err(Error::parse(
                    path,
                    line,
                    format!("raw name {raw:?} mapped to both {previous:?} and {canon:?}"),
                ));
            }
        }
    }
    Ok(map)
}

/// Re-resolve author identities, optionally through an explicit alias map.
/// Without aliases this is normalization only; distinct normalized strings
/// stay distinct identities. Idempotent.
pub fn resolve_identities(corpus: &Corpus, alias_map: Option<&BTreeMap<String, String>>) -> Corpus {
    let empty = BTreeMap::new();
    let identities = build_identities(&corpus.papers, alias_map.unwrap_or(&empty));
    Corpus {
        identities,
        ..corpus.clone()
    }
}

/// Outcome of merging a citations file into the corpus.
#[derive(Debug, Clone, Default)]
pub struct CitationMerge {
    /// Ids present in the citations file but absent from the corpus.
    /// Reported, never silently dropped.
    pub unknown_ids: Vec<String>,
    /// Number of papers that received a citation count.
    pub merged: usize,
}

/// Merge a citations TSV (`paper_id` -> `citations`) into the corpus.
/// Papers absent from the file keep `citations = None`.
pub fn merge_citations(corpus: &Corpus, citations_path: &Path) -> Result<(Corpus, CitationMerge)> {
    let rows = tsv::read_rows(citations_path, &["paper_id", "citations"])?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (line, fields) in rows {
        let id = fields[0].clone();
        if fields[1].starts_with('-') {
            return Err(Error::parse(
                citations_path,
                line,
                format!("negative citation count for {id:?}"),
            ));
        }
        let count: u64 = fields[1].parse().map_err(|_| {
            Error::parse(
                citations_path,
                line,
                format!("bad citation count {:?} for {id:?}", fields[1]),
            )
        })?;
        if let Some(previous) = counts.insert(id.clone(), count) {
            if previous != count {
                return Err(Error::parse(
                    citations_path,
                    line,
                    format!("conflicting citation counts for {id:?}: {previous} vs {count}"),
                ));
            }
        }
    }
    let mut corpus = corpus.clone();
    let mut report = CitationMerge::default();
    let known: BTreeSet<&str> = corpus.papers.iter().map(|p| p.id.as_str()).collect();
    for id in counts.keys() {
        if !known.contains(id.as_str()) {
            report.unknown_ids.push(id.clone());
        }
    }
    for paper in &mut corpus.papers {
        if let Some(&count) = counts.get(&paper.id) {
            paper.citations = Some(count);
            report.merged += 1;
        }
    }
    Ok((corpus, report))
}

/// Load the ground-truth gender table (`name`, `gender` TSV with labels
/// `male`/`female`), keyed by canonical name.
pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    let rows = tsv::read_rows(path, &["name", "gender"])?;
    let mut table = GroundTruth::new();
    for (line, fields) in rows {
        let name = canonical_name(&fields[0]);
        if name.is_empty() {
            return Err(Error::parse(path, line, "blank name"));
        }
        let label = match fields[1].as_str() {
            "male" => GenderLabel::Male,
            "female" => GenderLabel::Female,
            other => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("unknown gender label {other:?} (expected male or female)"),
                ));
            }
        };
        if let Some(previous) = table.insert(name.clone(), label) {
            if previous != label {
                return Err(Error::parse(
                    path,
                    line,
                    format!("conflicting gender labels for {name:?}"),
                ));
            }
        }
    }
    Ok(table)
}
