//! Report assembly and emission: JSON (full precision), markdown (3-decimal
//! tables), and CSV plot data (6 significant digits), all stamped with a
//! provenance block so every published number traces to exact inputs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::composite::{MissingPolicy, WeightScheme};
use crate::dataset::{deal_flag, Dataset, DimensionId, OutcomeLabel, TrustStage};
use crate::error::{Error, Result};
use crate::stats;
use crate::weights::SchemeEvaluation;

/// Ties a report to its exact inputs: content hashes, the echoed run
/// configuration, and the toolkit version. Deliberately carries no wall-clock
/// timestamp so identical runs emit identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub toolkit_version: String,
    /// Input label → SHA-256 of content (the built-in fixture reports its
    /// embedded checksum).
    pub inputs: BTreeMap<String, String>,
    pub config: serde_json::Value,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config: serde_json::Value, seed: u64) -> Self {
        Provenance {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: BTreeMap::new(),
            config,
            seed,
        }
    }

    pub fn add_file(&mut self, label: &str, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        self.inputs.insert(label.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn add_builtin_fixture(&mut self) {
        self.inputs.insert(
            "builtin:phase1".to_string(),
            crate::dataset::fixture::CHECKSUM.to_string(),
        );
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// 6 significant digits, plain decimal notation; used for CSV emission.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(5 - mag);
    let rounded = (x * scale).round() / scale;
    format!("{rounded}")
}

/// 3-decimal fixed formatting for markdown tables.
pub fn fmt3(x: f64) -> String {
    if x.is_nan() {
        return "-".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.3}")
}

pub fn fmt3_opt(x: Option<f64>) -> String {
    x.map(fmt3).unwrap_or_else(|| "-".into())
}

/// Renders a pipe-table; every row must match the header arity.
pub fn md_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str("| ");
    out.push_str(&headers.join(" | "));
    out.push_str(" |\n|");
    for _ in headers {
        out.push_str("---|");
    }
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        out.push_str("| ");
        out.push_str(&row.join(" | "));
        out.push_str(" |\n");
    }
    out
}

/// Serializes any report to deterministic pretty JSON (struct order + BTreeMap
/// keys; no timestamps anywhere).
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------
// Correlation battery
// ---------------------------------------------------------------------------

/// One row of the dimension-outcome battery. Degenerate dimensions carry an
/// error string instead of aborting the whole report.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionRow {
    pub dimension: String,
    pub name: String,
    /// Complete cases for this dimension.
    pub n: usize,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub p_bonferroni: Option<f64>,
    pub cohens_d: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositeRow {
    pub scheme: String,
    pub policy: MissingPolicy,
    pub n: usize,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub cohens_d: Option<f64>,
    pub error: Option<String>,
}

/// The full correlate output: per-dimension Spearman/Bonferroni/Cohen's d
/// against the outcome encoding, plus the composite row under the configured
/// scheme, sorted by |ρ| descending.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub provenance: Provenance,
    /// Records excluded as trust collapse (T6) before analysis.
    pub t6_excluded: usize,
    pub n: usize,
    pub bonferroni_m: usize,
    pub rows: Vec<DimensionRow>,
    pub composite: CompositeRow,
}

/// Builds the correlate report from an already-T6-filtered dataset view.
pub fn build_correlation_report(
    view: &Dataset,
    t6_excluded: usize,
    scheme: &WeightScheme,
    policy: MissingPolicy,
    bonferroni_m: usize,
    provenance: Provenance,
) -> Result<CorrelationReport> {
    let outcomes = crate::dataset::encode_outcomes(view)?;

    let mut rows = Vec::with_capacity(7);
    for dim in DimensionId::ALL {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut deal_group = Vec::new();
        let mut nodeal_group = Vec::new();
        for (r, y) in view.records.iter().zip(&outcomes) {
            if let Some(v) = r.scores.get(&dim).and_then(|s| s.value()) {
                xs.push(f64::from(v));
                ys.push(*y);
                if deal_flag(r)? {
                    deal_group.push(f64::from(v));
                } else {
                    nodeal_group.push(f64::from(v));
                }
            }
        }
        let row = match stats::spearman(&xs, &ys, Some(bonferroni_m)) {
            Ok(c) => {
                let d = stats::cohens_d(&deal_group, &nodeal_group)
                    .ok()
                    .map(|e| e.d);
                DimensionRow {
                    dimension: dim.code().into(),
                    name: dim.display_name().into(),
                    n: xs.len(),
                    rho: Some(c.rho),
                    p: Some(c.p_uncorrected),
                    p_bonferroni: c.p_bonferroni,
                    cohens_d: d,
                    error: None,
                }
            }
            Err(e) => DimensionRow {
                dimension: dim.code().into(),
                name: dim.display_name().into(),
                n: xs.len(),
                rho: None,
                p: None,
                p_bonferroni: None,
                cohens_d: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    rows.sort_by(|a, b| {
        let ka = a.rho.map(f64::abs).unwrap_or(-1.0);
        let kb = b.rho.map(f64::abs).unwrap_or(-1.0);
        kb.partial_cmp(&ka)
            .expect("finite")
            .then_with(|| a.dimension.cmp(&b.dimension))
    });

    let composite = build_composite_row(view, scheme, policy)?;

    Ok(CorrelationReport {
        provenance,
        t6_excluded,
        n: view.records.len(),
        bonferroni_m,
        rows,
        composite,
    })
}

fn build_composite_row(
    view: &Dataset,
    scheme: &WeightScheme,
    policy: MissingPolicy,
) -> Result<CompositeRow> {
    use crate::composite::{composite, CompositeValue};

    let mut values = Vec::new();
    let mut outcomes = Vec::new();
    let mut deal_group = Vec::new();
    let mut nodeal_group = Vec::new();
    let encoded = crate::dataset::encode_outcomes(view)?;
    for (r, y) in view.records.iter().zip(&encoded) {
        let c = composite(&r.scores, scheme, policy)?;
        if let CompositeValue::Score(v) = c.value {
            values.push(v);
            outcomes.push(*y);
            if deal_flag(r)? {
                deal_group.push(v);
            } else {
                nodeal_group.push(v);
            }
        }
    }
    Ok(match stats::spearman(&values, &outcomes, None) {
        Ok(c) => CompositeRow {
            scheme: scheme.name.clone(),
            policy,
            n: values.len(),
            rho: Some(c.rho),
            p: Some(c.p_uncorrected),
            cohens_d: stats::cohens_d(&deal_group, &nodeal_group)
                .ok()
                .map(|e| e.d),
            error: None,
        },
        Err(e) => CompositeRow {
            scheme: scheme.name.clone(),
            policy,
            n: values.len(),
            rho: None,
            p: None,
            cohens_d: None,
            error: Some(e.to_string()),
        },
    })
}

impl CorrelationReport {
    pub fn to_markdown(&self) -> String {
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{} {}", r.dimension, r.name),
                    r.n.to_string(),
                    fmt3_opt(r.rho),
                    fmt3_opt(r.p),
                    fmt3_opt(r.p_bonferroni),
                    fmt3_opt(r.cohens_d),
                    r.error.clone().unwrap_or_default(),
                ]
            })
            .collect();
        rows.push(vec![
            format!("Composite ({})", self.composite.scheme),
            self.composite.n.to_string(),
            fmt3_opt(self.composite.rho),
            fmt3_opt(self.composite.p),
            "-".into(),
            fmt3_opt(self.composite.cohens_d),
            self.composite.error.clone().unwrap_or_default(),
        ]);
        let mut out = String::from("# Dimension-outcome correlation\n\n");
        out.push_str(&format!(
            "n = {} (T6 excluded: {}), Bonferroni m = {}\n\n",
            self.n, self.t6_excluded, self.bonferroni_m
        ));
        out.push_str(&md_table(
            &["Dimension", "n", "rho", "p", "p_bonf", "Cohen's d", "note"],
            &rows,
        ));
        out
    }

    /// CSV of (dimension, rho, p, p_bonf, d) suitable for bar-chart plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dimension,rho,p,p_bonf,cohens_d\n");
        let cell = |v: Option<f64>| v.map(sig6).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.dimension,
                cell(r.rho),
                cell(r.p),
                cell(r.p_bonferroni),
                cell(r.cohens_d),
            ));
        }
        out.push_str(&format!(
            "composite,{},{},,{}\n",
            cell(self.composite.rho),
            cell(self.composite.p),
            cell(self.composite.cohens_d),
        ));
        out
    }
}

// ---------------------------------------------------------------------------
// Scheme comparison rendering
// ---------------------------------------------------------------------------

/// Scheme-comparison report in the published table's layout: one row per
/// scheme with its per-dimension percentages and criterion validity.
#[derive(Debug, Clone, Serialize)]
pub struct SchemeComparisonReport {
    pub provenance: Provenance,
    pub evaluations: Vec<SchemeEvaluationRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeEvaluationRow {
    pub scheme: String,
    pub weights: BTreeMap<DimensionId, f64>,
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

impl SchemeComparisonReport {
    pub fn new(
        provenance: Provenance,
        evals: &[SchemeEvaluation],
        schemes: &[WeightScheme],
    ) -> Self {
        let rows = evals
            .iter()
            .map(|e| {
                let weights = schemes
                    .iter()
                    .find(|s| s.name == e.scheme)
                    .map(|s| s.weights.clone())
                    .unwrap_or_default();
                SchemeEvaluationRow {
                    scheme: e.scheme.clone(),
                    weights,
                    rho: e.rho,
                    p: e.p,
                    n: e.n,
                }
            })
            .collect();
        SchemeComparisonReport {
            provenance,
            evaluations: rows,
        }
    }

    pub fn to_markdown(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .evaluations
            .iter()
            .map(|r| {
                let mut cells = vec![r.scheme.clone()];
                for dim in DimensionId::ALL {
                    let w = r.weights.get(&dim).copied().unwrap_or(0.0);
                    cells.push(if w.fract() == 0.0 {
                        format!("{}", w as i64)
                    } else {
                        format!("{w}")
                    });
                }
                cells.push(fmt3(r.rho));
                cells.push(fmt3(r.p));
                cells.push(r.n.to_string());
                cells
            })
            .collect();
        let mut out = String::from("# Weight scheme comparison\n\n");
        out.push_str(&md_table(
            &[
                "Scheme", "D1", "D2", "D3", "D4", "D5", "D6", "D7", "rho", "p", "n",
            ],
            &rows,
        ));
        out
    }
}

// ---------------------------------------------------------------------------
// Desync rendering
// ---------------------------------------------------------------------------

/// Markdown emission for the behavior-trust desynchronization report.
pub fn desync_to_markdown(report: &crate::funnel::DesyncReport) -> String {
    let rows: Vec<Vec<String>> = report
        .groups
        .iter()
        .map(|(agent, g)| {
            vec![
                agent.to_string(),
                g.n.to_string(),
                fmt3(g.mean_transitions),
                format!("{:.0}%", g.f6_reach_rate * 100.0),
                fmt3(g.mean_f6_messages),
            ]
        })
        .collect();
    let mut out = String::from("# Behavior-trust desynchronization\n\n");
    out.push_str(&md_table(
        &[
            "Group",
            "n",
            "Mean stage transitions",
            "F6 reach rate",
            "Mean messages at F6",
        ],
        &rows,
    ));
    out
}

/// CSV matrix of (max funnel stage × final trust stage) counts.
pub fn desync_matrix_csv(report: &crate::funnel::DesyncReport) -> String {
    let mut out = String::from("max_stage,T0,T1,T2,T3,T4,T5,T6\n");
    for (f, row) in report.matrix.iter().enumerate() {
        out.push_str(&format!(
            "F{},{}\n",
            f + 1,
            row.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Outcome helpers shared by CLI commands
// ---------------------------------------------------------------------------

/// Splits composite values into deal / no-deal groups and returns their means.
pub fn group_means(
    view: &Dataset,
    scheme: &WeightScheme,
    policy: MissingPolicy,
) -> Result<(f64, f64)> {
    use crate::composite::{composite, CompositeValue};
    let mut deal = Vec::new();
    let mut nodeal = Vec::new();
    for r in &view.records {
        let c = composite(&r.scores, scheme, policy)?;
        if let CompositeValue::Score(v) = c.value {
            if deal_flag(r)? {
                deal.push(v);
            } else {
                nodeal.push(v);
            }
        }
    }
    if deal.is_empty() || nodeal.is_empty() {
        return Err(Error::Data("a group is empty; cannot compute means".into()));
    }
    Ok((
        deal.iter().sum::<f64>() / deal.len() as f64,
        nodeal.iter().sum::<f64>() / nodeal.len() as f64,
    ))
}

/// Counts T6 records (the ones the analysis view excludes).
pub fn count_t6(d: &Dataset) -> usize {
    d.records
        .iter()
        .filter(|r| matches!(r.outcome, OutcomeLabel::TrustProxy(TrustStage::T6)))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::builtin_scheme;
    use crate::dataset::{builtin_phase1, phase1_analysis_view};

    #[test]
    fn sig6_shapes() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(0.6788669), "0.678867");
        assert_eq!(sig6(-1.347127), "-1.34713");
        assert_eq!(sig6(123456789.0), "123457000");
        assert_eq!(sig6(0.00012345678), "0.000123457");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn correlate_report_on_fixture() {
        let d = builtin_phase1();
        let view = phase1_analysis_view(&d);
        let scheme = builtin_scheme("v2.0_current").unwrap();
        let mut prov = Provenance::new(serde_json::json!({"test": true}), 42);
        prov.add_builtin_fixture();
        let report = build_correlation_report(
            &view,
            1,
            &scheme,
            MissingPolicy::ProportionalReweight,
            7,
            prov,
        )
        .unwrap();
        assert_eq!(report.n, 14);
        assert_eq!(report.t6_excluded, 1);
        // sorted by |rho| desc: D3 first
        assert_eq!(report.rows[0].dimension, "D3");
        let d3 = &report.rows[0];
        assert!((d3.rho.unwrap() - 0.678669).abs() < 1e-4);
        assert!((d3.p.unwrap() - 0.007618).abs() < 1e-4);
        assert!((d3.p_bonferroni.unwrap() - 0.053325).abs() < 1e-4);
        let comp = &report.composite;
        assert!((comp.rho.unwrap() - 0.355129).abs() < 1e-4);

        // markdown and csv render with all rows
        let md = report.to_markdown();
        assert!(md.contains("D3 Pacing Strategy"));
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 9); // header + 7 dims + composite
    }

    #[test]
    fn correlate_single_record_degenerates_gracefully() {
        let d = builtin_phase1();
        let one = Dataset {
            records: vec![d.records[0].clone()],
            transcripts: None,
            provenance: "test".into(),
        };
        let scheme = builtin_scheme("v2.0_current").unwrap();
        let prov = Provenance::new(serde_json::json!({}), 42);
        let report = build_correlation_report(
            &one,
            0,
            &scheme,
            MissingPolicy::ProportionalReweight,
            7,
            prov,
        )
        .unwrap();
        assert!(report.rows.iter().all(|r| r.error.is_some()));
        assert!(report.composite.error.is_some());
    }

    #[test]
    fn json_is_deterministic() {
        let d = builtin_phase1();
        let view = phase1_analysis_view(&d);
        let scheme = builtin_scheme("v2.0_current").unwrap();
        let build = || {
            let prov = Provenance::new(serde_json::json!({"seed": 42}), 42);
            let r = build_correlation_report(
                &view,
                1,
                &scheme,
                MissingPolicy::ProportionalReweight,
                7,
                prov,
            )
            .unwrap();
            to_json(&r).unwrap()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn group_means_fixture() {
        let view = phase1_analysis_view(&builtin_phase1());
        let scheme = builtin_scheme("v2.0_current").unwrap();
        let (deal, nodeal) =
            group_means(&view, &scheme, MissingPolicy::ProportionalReweight).unwrap();
        assert!((deal - 2.483333).abs() < 1e-4);
        assert!((nodeal - 2.695455).abs() < 1e-4);
    }
}
