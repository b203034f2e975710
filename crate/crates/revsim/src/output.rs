//! Bit-stable serialization of experiment results.
//!
//! Layout under the output root, for replicate NN:
//!
//! ```text
//! manifest.json                     config echo, seed, version, file list
//! summary.json                      all replicate summaries + aggregate
//! replicate_NN/authors.csv          population dump
//! replicate_NN/journals.csv         population dump + impact
//! replicate_NN/manuscripts.csv      one row per manuscript per setting
//! replicate_NN/summary.json         this replicate's summaries/comparison
//! replicate_NN/plot_author_publications.csv    (both settings only)
//! replicate_NN/plot_author_mean_impact.csv     (both settings only)
//! replicate_NN/plot_months_to_publication.csv
//! replicate_NN/plot_journal_publications.csv   (both settings only)
//! ```
//!
//! Reals are serialized with 17 significant digits so parsing them back
//! reproduces the exact f64; all writers are deterministic, making output
//! bundles byte-identical for identical (config, seed).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::experiment::ReplicateResult;
use crate::metrics::{ComparisonReport, Outcome, RunSummary};
use crate::population::AgentProfile;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot serialize {what}: {source}")]
    Json {
        what: String,
        source: serde_json::Error,
    },
}

/// 17 significant digits: enough for exact f64 round-trips.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Paths emitted by one experiment, relative to `root`.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub root: PathBuf,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a SimConfig,
    files: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub replicate: u32,
    pub cs: Option<RunSummary>,
    #[serde(rename = "as")]
    pub as_run: Option<RunSummary>,
    pub comparison: Option<ComparisonReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(MeanStd {
        mean,
        std: var.sqrt(),
    })
}

/// Across-replicate dispersion of the headline scalars of one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineStats {
    pub publication_fraction_resolved: Option<MeanStd>,
    pub mean_months_to_publication: Option<MeanStd>,
    pub mean_reviews_per_resolved: Option<MeanStd>,
}

fn headline(summaries: &[&RunSummary]) -> Option<HeadlineStats> {
    if summaries.is_empty() {
        return None;
    }
    let fractions: Vec<f64> = summaries
        .iter()
        .map(|s| s.publication_fraction_resolved)
        .collect();
    let months: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.months_to_publication.map(|t| t.mean))
        .collect();
    let reviews: Vec<f64> = summaries
        .iter()
        .map(|s| s.reviews_mean_per_resolved)
        .collect();
    Some(HeadlineStats {
        publication_fraction_resolved: mean_std(&fractions),
        mean_months_to_publication: mean_std(&months),
        mean_reviews_per_resolved: mean_std(&reviews),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub replicates: Vec<ReplicateSummary>,
    pub aggregate_cs: Option<HeadlineStats>,
    pub aggregate_as: Option<HeadlineStats>,
}

type Rows = Vec<Vec<String>>;

struct Writer {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn write(&mut self, rel: &Path, contents: &[u8]) -> Result<(), OutputError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| OutputError::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
        fs::write(&path, contents).map_err(|source| OutputError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.files.push(rel.to_path_buf());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, rel: &Path, what: &str, value: &T) -> Result<(), OutputError> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|source| OutputError::Json {
                what: what.to_string(),
                source,
            })?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    fn write_csv(&mut self, rel: &Path, rows: &Rows) -> Result<(), OutputError> {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.write_record(row).expect("in-memory csv write");
            }
            w.flush().expect("in-memory csv flush");
        }
        self.write(rel, &buf)
    }
}

fn agent_row(agent: &AgentProfile, impact: Option<f64>) -> Vec<String> {
    let mut row = vec![
        agent.id.to_string(),
        agent.kind.label().to_string(),
        agent.archetype.label().to_string(),
        fmt_real(agent.topic.alpha()),
        fmt_real(agent.topic.beta()),
        fmt_real(agent.quality.alpha()),
        fmt_real(agent.quality.beta()),
        fmt_real(agent.novelty.alpha()),
        fmt_real(agent.novelty.beta()),
    ];
    if let Some(impact) = impact {
        row.push(fmt_real(impact));
    }
    row
}

const AGENT_HEADER: [&str; 9] = [
    "id",
    "kind",
    "archetype",
    "alpha_topic",
    "beta_topic",
    "alpha_quality",
    "beta_quality",
    "alpha_novelty",
    "beta_novelty",
];

const MANUSCRIPT_HEADER: [&str; 15] = [
    "id",
    "author_id",
    "setting",
    "t",
    "q0",
    "n0",
    "q_final",
    "n_final",
    "k",
    "created_month",
    "outcome",
    "outcome_month",
    "journal_id",
    "n_reviews",
    "n_rejections",
];

fn manuscript_rows(result: &ReplicateResult) -> Rows {
    let mut rows = vec![MANUSCRIPT_HEADER.iter().map(|s| s.to_string()).collect()];
    for run in [&result.cs, &result.as_run].into_iter().flatten() {
        for o in &run.outcomes {
            let (label, month, journal) = match o.outcome {
                Outcome::Published { journal_id, month } => {
                    ("published", Some(month), Some(journal_id))
                }
                Outcome::Abandoned { month } => ("abandoned", Some(month), None),
                Outcome::InFlight => ("in_flight", None, None),
            };
            rows.push(vec![
                o.id.to_string(),
                o.author_id.to_string(),
                o.setting.label().to_string(),
                fmt_real(o.topic),
                fmt_real(o.initial_quality),
                fmt_real(o.initial_novelty),
                fmt_real(o.final_quality),
                fmt_real(o.final_novelty),
                o.revision_count.to_string(),
                o.created_month.to_string(),
                label.to_string(),
                month.map(|m| m.to_string()).unwrap_or_default(),
                journal.map(|j| j.to_string()).unwrap_or_default(),
                o.reviews_assigned.to_string(),
                o.rejections.to_string(),
            ]);
        }
    }
    rows
}

fn author_panel_rows(result: &ReplicateResult) -> Option<(Rows, Rows)> {
    let (cs, as_run) = (result.cs.as_ref()?, result.as_run.as_ref()?);
    let mut pubs = vec![vec![
        "author_id".to_string(),
        "cs_publications".to_string(),
        "as_publications".to_string(),
    ]];
    let mut impact = vec![vec![
        "author_id".to_string(),
        "cs_mean_impact".to_string(),
        "as_mean_impact".to_string(),
    ]];
    for (c, a) in cs
        .summary
        .per_author
        .iter()
        .zip(&as_run.summary.per_author)
    {
        pubs.push(vec![
            c.author_id.to_string(),
            c.publications.to_string(),
            a.publications.to_string(),
        ]);
        impact.push(vec![
            c.author_id.to_string(),
            fmt_real(c.mean_impact.unwrap_or(0.0)),
            fmt_real(a.mean_impact.unwrap_or(0.0)),
        ]);
    }
    Some((pubs, impact))
}

fn months_panel_rows(result: &ReplicateResult) -> Rows {
    let mut rows = vec![vec!["setting".to_string(), "months".to_string()]];
    for run in [&result.cs, &result.as_run].into_iter().flatten() {
        for o in &run.outcomes {
            if let Some(months) = o.months_to_publication() {
                rows.push(vec![o.setting.label().to_string(), months.to_string()]);
            }
        }
    }
    rows
}

fn journal_panel_rows(result: &ReplicateResult) -> Option<Rows> {
    let (cs, as_run) = (result.cs.as_ref()?, result.as_run.as_ref()?);
    let mut rows = vec![vec![
        "journal_id".to_string(),
        "impact".to_string(),
        "impact_quartile".to_string(),
        "cs_publications".to_string(),
        "as_publications".to_string(),
    ]];
    for (c, a) in cs
        .summary
        .per_journal
        .iter()
        .zip(&as_run.summary.per_journal)
    {
        rows.push(vec![
            c.journal_id.to_string(),
            fmt_real(c.impact),
            c.quartile.to_string(),
            c.publications.to_string(),
            a.publications.to_string(),
        ]);
    }
    Some(rows)
}

/// Writes the complete bundle for one experiment. The manifest goes last
/// and lists every other file.
pub fn write_outputs(
    out_dir: &Path,
    cfg: &SimConfig,
    results: &[ReplicateResult],
) -> Result<OutputBundle, OutputError> {
    let mut w = Writer {
        root: out_dir.to_path_buf(),
        files: Vec::new(),
    };

    let mut replicate_summaries = Vec::new();
    for result in results {
        let dir = PathBuf::from(format!("replicate_{:02}", result.replicate));

        let mut author_rows = vec![AGENT_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        author_rows.extend(result.population.authors.iter().map(|a| agent_row(a, None)));
        w.write_csv(&dir.join("authors.csv"), &author_rows)?;

        let mut journal_header: Vec<String> =
            AGENT_HEADER.iter().map(|s| s.to_string()).collect();
        journal_header.push("impact".to_string());
        let mut journal_rows = vec![journal_header];
        journal_rows.extend(
            result
                .population
                .journals
                .iter()
                .zip(&result.journal_impacts)
                .map(|(j, &impact)| agent_row(j, Some(impact))),
        );
        w.write_csv(&dir.join("journals.csv"), &journal_rows)?;

        w.write_csv(&dir.join("manuscripts.csv"), &manuscript_rows(result))?;

        if let Some((pubs, impact)) = author_panel_rows(result) {
            w.write_csv(&dir.join("plot_author_publications.csv"), &pubs)?;
            w.write_csv(&dir.join("plot_author_mean_impact.csv"), &impact)?;
        }
        w.write_csv(
            &dir.join("plot_months_to_publication.csv"),
            &months_panel_rows(result),
        )?;
        if let Some(rows) = journal_panel_rows(result) {
            w.write_csv(&dir.join("plot_journal_publications.csv"), &rows)?;
        }

        let replicate_summary = ReplicateSummary {
            replicate: result.replicate,
            cs: result.cs.as_ref().map(|r| r.summary.clone()),
            as_run: result.as_run.as_ref().map(|r| r.summary.clone()),
            comparison: result.comparison.clone(),
        };
        w.write_json(&dir.join("summary.json"), "replicate summary", &replicate_summary)?;
        replicate_summaries.push(replicate_summary);
    }

    let cs_refs: Vec<&RunSummary> = replicate_summaries
        .iter()
        .filter_map(|r| r.cs.as_ref())
        .collect();
    let as_refs: Vec<&RunSummary> = replicate_summaries
        .iter()
        .filter_map(|r| r.as_run.as_ref())
        .collect();
    let experiment = ExperimentSummary {
        aggregate_cs: headline(&cs_refs),
        aggregate_as: headline(&as_refs),
        replicates: replicate_summaries,
    };
    w.write_json(Path::new("summary.json"), "experiment summary", &experiment)?;

    let mut files: Vec<String> = w
        .files
        .iter()
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    files.sort();
    let manifest = Manifest {
        tool: "revsim",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        files,
    };
    w.write_json(Path::new("manifest.json"), "manifest", &manifest)?;

    Ok(OutputBundle {
        root: w.root,
        files: w.files,
    })
}
