//! Relevance judgments and retrieval metrics.
//!
//! Each judged actor contributes one precision/recall pair; report averages
//! are unweighted means over the actors for which a metric is defined.
//! Page identifiers that parse as URLs are canonicalized (scheme and host
//! lowercased, fragment stripped) before set comparisons.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terminal state of the extraction pipeline for one actor, as recorded
/// alongside its judgments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    NoCluster,
    SingleCluster,
    MultiKeyword,
}

/// Ground truth and system output for one actor.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentSet {
    pub actor_label: String,
    pub relevant: BTreeSet<String>,
    pub retrieved: Vec<String>,
    pub outcome: Option<Outcome>,
}

impl JudgmentSet {
    /// Canonicalizes all page identifiers and drops duplicate retrieved
    /// entries (first occurrence wins).
    pub fn new(
        actor_label: &str,
        relevant: impl IntoIterator<Item = String>,
        retrieved: impl IntoIterator<Item = String>,
        outcome: Option<Outcome>,
    ) -> Self {
        let relevant = relevant.into_iter().map(|id| canonicalize_id(&id)).collect();
        let mut seen = BTreeSet::new();
        let retrieved = retrieved
            .into_iter()
            .map(|id| canonicalize_id(&id))
            .filter(|id| seen.insert(id.clone()))
            .collect();
        JudgmentSet {
            actor_label: actor_label.to_string(),
            relevant,
            retrieved,
            outcome,
        }
    }
}

/// Lowercases scheme and host and strips the fragment of anything that
/// parses as an absolute URL; opaque identifiers pass through unchanged.
pub fn canonicalize_id(id: &str) -> String {
    if !id.contains("://") {
        return id.to_string();
    }
    match url::Url::parse(id) {
        Ok(mut u) => {
            u.set_fragment(None);
            u.to_string()
        }
        Err(_) => id.to_string(),
    }
}

#[derive(Debug, Deserialize)]
struct RawJudgment {
    actor: String,
    relevant: Vec<String>,
    retrieved: Vec<String>,
    #[serde(default)]
    outcome: Option<Outcome>,
}

/// Reads a JSON-lines judgments file.
pub fn load_judgments(path: &Path) -> Result<Vec<JudgmentSet>> {
    let data = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawJudgment = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(JudgmentSet::new(
            &raw.actor,
            raw.relevant,
            raw.retrieved,
            raw.outcome,
        ));
    }
    Ok(out)
}

/// Precision and recall for one actor. Either is `None` when its
/// denominator is empty (nothing retrieved, or no relevant pages known).
pub fn precision_recall(j: &JudgmentSet) -> (Option<f64>, Option<f64>) {
    let retrieved: BTreeSet<&str> = j.retrieved.iter().map(String::as_str).collect();
    let overlap = retrieved
        .iter()
        .filter(|id| j.relevant.contains(**id))
        .count() as f64;
    let precision = if retrieved.is_empty() {
        None
    } else {
        Some(overlap / retrieved.len() as f64)
    };
    let recall = if j.relevant.is_empty() {
        None
    } else {
        Some(overlap / j.relevant.len() as f64)
    };
    (precision, recall)
}

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&precision) && (0.0..=1.0).contains(&recall));
    if precision + recall == 0.0 {
        return 0.0;
    }
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActorMetrics {
    pub actor: String,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f_measure: Option<f64>,
}

/// Distribution of pipeline outcomes across judged actors.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OutcomeHistogram {
    pub no_cluster: usize,
    pub single_cluster: usize,
    pub multi_keyword: usize,
    /// Judgments that carry no outcome annotation.
    pub unspecified: usize,
}

impl OutcomeHistogram {
    pub fn specified(&self) -> usize {
        self.no_cluster + self.single_cluster + self.multi_keyword
    }

    /// Percentages of (no cluster, single cluster, multi keyword) over the
    /// annotated judgments, or `None` when nothing is annotated.
    pub fn percentages(&self) -> Option<(f64, f64, f64)> {
        let total = self.specified();
        if total == 0 {
            return None;
        }
        let pct = |n: usize| 100.0 * n as f64 / total as f64;
        Some((
            pct(self.no_cluster),
            pct(self.single_cluster),
            pct(self.multi_keyword),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Per-actor rows, sorted by actor label.
    pub per_actor: Vec<ActorMetrics>,
    pub mean_recall: Option<f64>,
    pub mean_precision: Option<f64>,
    pub mean_f_measure: Option<f64>,
    /// Actors excluded from the precision average (nothing retrieved).
    pub excluded_from_precision: usize,
    /// Actors excluded from the recall average (no relevant pages known).
    pub excluded_from_recall: usize,
    pub outcomes: OutcomeHistogram,
}

/// Scores every judgment set and aggregates. Fails only when not a single
/// metric is defined anywhere.
pub fn evaluate(judgments: &[JudgmentSet]) -> Result<EvalReport> {
    if judgments.is_empty() {
        return Err(Error::EmptyReport("no judgment sets supplied".into()));
    }
    let mut per_actor: Vec<ActorMetrics> = judgments
        .iter()
        .map(|j| {
            let (precision, recall) = precision_recall(j);
            let f = match (precision, recall) {
                (Some(p), Some(r)) => Some(f_measure(p, r)),
                _ => None,
            };
            ActorMetrics {
                actor: j.actor_label.clone(),
                recall,
                precision,
                f_measure: f,
            }
        })
        .collect();
    per_actor.sort_by(|a, b| a.actor.cmp(&b.actor));

    let mean = |values: Vec<f64>| {
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };
    let mean_recall = mean(per_actor.iter().filter_map(|m| m.recall).collect());
    let mean_precision = mean(per_actor.iter().filter_map(|m| m.precision).collect());
    let mean_f_measure = mean(per_actor.iter().filter_map(|m| m.f_measure).collect());
    if mean_recall.is_none() && mean_precision.is_none() {
        return Err(Error::EmptyReport(
            "every judgment set has empty relevant and retrieved lists".into(),
        ));
    }

    let mut outcomes = OutcomeHistogram::default();
    for j in judgments {
        match j.outcome {
            Some(Outcome::NoCluster) => outcomes.no_cluster += 1,
            Some(Outcome::SingleCluster) => outcomes.single_cluster += 1,
            Some(Outcome::MultiKeyword) => outcomes.multi_keyword += 1,
            None => outcomes.unspecified += 1,
        }
    }

    Ok(EvalReport {
        excluded_from_precision: per_actor.iter().filter(|m| m.precision.is_none()).count(),
        excluded_from_recall: per_actor.iter().filter(|m| m.recall.is_none()).count(),
        per_actor,
        mean_recall,
        mean_precision,
        mean_f_measure,
        outcomes,
    })
}

impl EvalReport {
    /// Plain-text table: one row per actor plus the averages, percentages
    /// to one decimal, undefined cells dashed.
    pub fn to_text_table(&self) -> String {
        let name_width = self
            .per_actor
            .iter()
            .map(|m| m.actor.len())
            .chain(std::iter::once("average".len()))
            .max()
            .unwrap_or(7);
        let cell = |v: Option<f64>| match v {
            Some(x) => format!("{:>9.1}%", 100.0 * x),
            None => format!("{:>10}", "-"),
        };
        let mut out = String::new();
        out.push_str(&format!(
            "{:<name_width$}  {:>10}  {:>10}  {:>10}\n",
            "actor", "recall", "precision", "f-measure"
        ));
        for m in &self.per_actor {
            out.push_str(&format!(
                "{:<name_width$}  {}  {}  {}\n",
                m.actor,
                cell(m.recall),
                cell(m.precision),
                cell(m.f_measure)
            ));
        }
        out.push_str(&format!(
            "{:<name_width$}  {}  {}  {}\n",
            "average",
            cell(self.mean_recall),
            cell(self.mean_precision),
            cell(self.mean_f_measure)
        ));
        if self.excluded_from_precision > 0 {
            out.push_str(&format!(
                "note: {} actor(s) excluded from the precision average (nothing retrieved)\n",
                self.excluded_from_precision
            ));
        }
        if self.excluded_from_recall > 0 {
            out.push_str(&format!(
                "note: {} actor(s) excluded from the recall average (no relevant pages)\n",
                self.excluded_from_recall
            ));
        }
        if let Some((no, one, multi)) = self.outcomes.percentages() {
            out.push_str(&format!(
                "outcomes: no cluster {} ({:.2}%); one cluster {} ({:.2}%); two or more keywords {} ({:.2}%)\n",
                self.outcomes.no_cluster,
                no,
                self.outcomes.single_cluster,
                one,
                self.outcomes.multi_keyword,
                multi
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn judgment(relevant: Vec<String>, retrieved: Vec<String>) -> JudgmentSet {
        JudgmentSet::new("actor", relevant, retrieved, None)
    }

    #[test]
    fn perfect_retrieval_scores_one_one() {
        let j = judgment(ids("d", 5), ids("d", 5));
        assert_eq!(precision_recall(&j), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn disjoint_retrieval_scores_zero_zero() {
        let j = judgment(ids("rel", 5), ids("ret", 5));
        assert_eq!(precision_recall(&j), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn partial_overlap_divides_by_each_denominator() {
        // 10 relevant, 20 retrieved, 5 shared: precision 0.25, recall 0.5.
        let relevant = ids("shared", 5).into_iter().chain(ids("rel", 5)).collect();
        let retrieved = ids("shared", 5).into_iter().chain(ids("ret", 15)).collect();
        let j = judgment(relevant, retrieved);
        let (p, r) = precision_recall(&j);
        assert_eq!(p, Some(0.25));
        assert_eq!(r, Some(0.5));
    }

    #[test]
    fn empty_denominators_are_undefined_not_zero() {
        let j = judgment(ids("rel", 3), vec![]);
        assert_eq!(precision_recall(&j), (None, Some(0.0)));
        let j = judgment(vec![], ids("ret", 3));
        assert_eq!(precision_recall(&j), (Some(0.0), None));
    }

    #[test]
    fn f_measure_is_the_harmonic_mean() {
        assert_eq!(f_measure(1.0, 1.0), 1.0);
        assert_eq!(f_measure(0.0, 0.7), 0.0);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
        let f = f_measure(0.295, 0.458);
        assert!((f - 0.359).abs() < 5e-4);
        assert_eq!(format!("{:.1}%", 100.0 * f), "35.9%");
    }

    #[test]
    fn url_ids_are_canonicalized_and_deduplicated() {
        assert_eq!(
            canonicalize_id("HTTP://Example.COM/Page#frag"),
            "http://example.com/Page"
        );
        assert_eq!(canonicalize_id("d_17"), "d_17");
        let j = judgment(
            vec!["http://example.com/Page".into()],
            vec![
                "HTTP://EXAMPLE.com/Page#a".into(),
                "http://example.com/Page#b".into(),
            ],
        );
        assert_eq!(j.retrieved.len(), 1);
        assert_eq!(precision_recall(&j), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn averages_are_unweighted_means() {
        let a = JudgmentSet::new("a", ids("x", 5), ids("x", 5), None);
        // 2 of 5 relevant found, retrieved half junk: recall 0.4, precision 0.5.
        let relevant: Vec<String> = ids("y", 5);
        let retrieved = vec!["y0".to_string(), "y1".to_string(), "z0".into(), "z1".into()];
        let b = JudgmentSet::new("b", relevant, retrieved, None);
        let report = evaluate(&[a, b]).unwrap();
        assert_eq!(report.mean_recall, Some((1.0 + 0.4) / 2.0));
        assert_eq!(report.mean_precision, Some((1.0 + 0.5) / 2.0));
    }

    #[test]
    fn single_judgment_averages_equal_the_row() {
        let j = JudgmentSet::new("a", ids("x", 4), ids("x", 2), None);
        let report = evaluate(&[j]).unwrap();
        assert_eq!(report.mean_recall, report.per_actor[0].recall);
        assert_eq!(report.mean_precision, report.per_actor[0].precision);
        assert_eq!(report.mean_f_measure, report.per_actor[0].f_measure);
    }

    #[test]
    fn undefined_rows_are_excluded_with_counts() {
        let a = JudgmentSet::new("a", ids("x", 5), ids("x", 5), None);
        let no_retrieved = JudgmentSet::new("b", ids("x", 5), vec![], None);
        let report = evaluate(&[a, no_retrieved]).unwrap();
        assert_eq!(report.mean_precision, Some(1.0));
        assert_eq!(report.excluded_from_precision, 1);
        assert_eq!(report.excluded_from_recall, 0);
    }

    #[test]
    fn report_is_invariant_under_input_order() {
        let a = JudgmentSet::new("a", ids("x", 5), ids("x", 3), None);
        let b = JudgmentSet::new("b", ids("y", 4), ids("y", 4), None);
        let fwd = evaluate(&[a.clone(), b.clone()]).unwrap();
        let rev = evaluate(&[b, a]).unwrap();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn all_undefined_judgments_cannot_be_reported() {
        let j = JudgmentSet::new("a", vec![], vec![], None);
        assert!(matches!(
            evaluate(&[j]),
            Err(Error::EmptyReport(_))
        ));
        assert!(matches!(evaluate(&[]), Err(Error::EmptyReport(_))));
    }

    #[test]
    fn outcome_histogram_counts_annotations() {
        let mk = |name: &str, outcome| {
            JudgmentSet::new(name, ids("x", 2), ids("x", 2), outcome)
        };
        let report = evaluate(&[
            mk("a", Some(Outcome::NoCluster)),
            mk("b", Some(Outcome::MultiKeyword)),
            mk("c", Some(Outcome::MultiKeyword)),
            mk("d", None),
        ])
        .unwrap();
        assert_eq!(report.outcomes.no_cluster, 1);
        assert_eq!(report.outcomes.multi_keyword, 2);
        assert_eq!(report.outcomes.unspecified, 1);
        let (no, one, multi) = report.outcomes.percentages().unwrap();
        assert!((no - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(one, 0.0);
        assert!((multi - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn judgment_files_roundtrip_with_line_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            r#"{{"actor":"a","relevant":["d1"],"retrieved":["d1","d2"],"outcome":"multi-keyword"}}"#
        )
        .unwrap();
        writeln!(f, r#"{{"actor":"b","relevant":[],"retrieved":["d3"]}}"#).unwrap();
        f.flush().unwrap();
        let judgments = load_judgments(f.path()).unwrap();
        assert_eq!(judgments.len(), 2);
        assert_eq!(judgments[0].outcome, Some(Outcome::MultiKeyword));
        assert_eq!(judgments[1].outcome, None);

        writeln!(f, r#"{{"actor":"c","relevant":"#).unwrap();
        f.flush().unwrap();
        match load_judgments(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn text_table_mirrors_the_metrics() {
        let j = JudgmentSet::new(
            "abdullah mohd zin",
            ids("r", 1000),
            ids("r", 458)
                .into_iter()
                .chain(ids("junk", 542))
                .collect::<Vec<_>>(),
            Some(Outcome::MultiKeyword),
        );
        // recall 458/1000, precision 458/1000: f = 0.458.
        let report = evaluate(&[j]).unwrap();
        let table = report.to_text_table();
        assert!(table.contains("abdullah mohd zin"), "{table}");
        assert!(table.contains("45.8%"), "{table}");
        assert!(table.contains("average"), "{table}");
        assert!(table.contains("(100.00%)"), "{table}");
    }
}
