//! Three-layer evaluation pipeline: L3 safety hard gate, L2 quality scoring,
//! L1 business metrics, GO/NO-GO decisions, and cycle comparison reports.
//!
//! L1 metrics never gate anything and the type carries no decision field:
//! business numbers are the criterion the other layers answer to.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::composite::{apply_caps, composite, BehaviorSignals, MissingPolicy, WeightScheme};
use crate::dataset::{Dataset, DimensionId};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// L3: safety hard gate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseResult {
    Pass,
    Fail,
}

/// One P0 safety case result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct P0Case {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub result: CaseResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Go,
    NoGo,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Go => f.write_str("GO"),
            Verdict::NoGo => f.write_str("NO-GO"),
        }
    }
}

/// L3 outcome. The decision is Go iff every case passed; pass counting is
/// exact integer arithmetic.
#[derive(Debug, Clone, Serialize)]
pub struct L3Result {
    pub total: usize,
    pub passed: usize,
    pub pass_rate: f64,
    pub failed_ids: Vec<String>,
    pub decision: Verdict,
}

/// Evaluates the P0 case set. Any failure means NO-GO.
pub fn l3_evaluate(cases: &[P0Case]) -> Result<L3Result> {
    if cases.is_empty() {
        return Err(Error::Data("empty P0 case set".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for c in cases {
        if !seen.insert(c.id.as_str()) {
            return Err(Error::DuplicateId(c.id.clone()));
        }
    }
    let passed = cases
        .iter()
        .filter(|c| c.result == CaseResult::Pass)
        .count();
    let failed_ids: Vec<String> = cases
        .iter()
        .filter(|c| c.result == CaseResult::Fail)
        .map(|c| c.id.clone())
        .collect();
    let decision = if passed == cases.len() {
        Verdict::Go
    } else {
        Verdict::NoGo
    };
    Ok(L3Result {
        total: cases.len(),
        passed,
        pass_rate: passed as f64 / cases.len() as f64,
        failed_ids,
        decision,
    })
}

/// Loads a P0 results file: `{"config": "B", "cases": [{"id": "S31",
/// "pass": true}, ...]}`. Returns the config name and the case list.
pub fn load_p0_file(path: impl AsRef<Path>) -> Result<(String, Vec<P0Case>)> {
    #[derive(Deserialize)]
    struct RawCase {
        id: String,
        #[serde(default)]
        description: String,
        pass: bool,
    }
    #[derive(Deserialize)]
    struct RawFile {
        config: String,
        cases: Vec<RawCase>,
    }
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let raw: RawFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(&display, 1, "-", e.to_string()))?;
    let cases = raw
        .cases
        .into_iter()
        .map(|c| P0Case {
            id: c.id,
            description: c.description,
            result: if c.pass {
                CaseResult::Pass
            } else {
                CaseResult::Fail
            },
        })
        .collect();
    Ok((raw.config, cases))
}

// ---------------------------------------------------------------------------
// L2: quality scoring
// ---------------------------------------------------------------------------

/// L2 outcome: per-dimension means over present scores, plus the mean
/// composite under the named scheme (caps applied when signals are given).
#[derive(Debug, Clone, Serialize)]
pub struct L2Result {
    pub n: usize,
    pub scheme: String,
    /// Mean across evaluated conversations per dimension; `None` when every
    /// record marks the dimension N/A.
    pub dimension_means: BTreeMap<DimensionId, Option<f64>>,
    /// Mean of per-conversation composite totals; `None` when no record
    /// produced a score (e.g. complete-case excluded all).
    pub weighted_total: Option<f64>,
    /// Whether behavioral caps were applied.
    pub capped: bool,
}

/// Scores a dataset: dimension means, then per-conversation composites with
/// optional per-conversation behavioral caps, averaged into the weighted
/// total.
pub fn l2_evaluate(
    d: &Dataset,
    scheme: &WeightScheme,
    policy: MissingPolicy,
    signals: Option<&BTreeMap<String, BehaviorSignals>>,
) -> Result<L2Result> {
    if d.records.is_empty() {
        return Err(Error::Data("empty dataset".into()));
    }

    let mut dimension_means = BTreeMap::new();
    for dim in DimensionId::ALL {
        let values: Vec<f64> = d
            .records
            .iter()
            .filter_map(|r| r.scores.get(&dim).and_then(|s| s.value()))
            .map(f64::from)
            .collect();
        let mean = if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        };
        dimension_means.insert(dim, mean);
    }

    let mut totals = Vec::new();
    for r in &d.records {
        let c = composite(&r.scores, scheme, policy)?;
        let Some(value) = c.value.score() else {
            continue;
        };
        let total = match signals.and_then(|s| s.get(&r.id)) {
            Some(sig) => apply_caps(&r.scores, &c, sig)?.capped_total,
            None => value,
        };
        totals.push(total);
    }
    let weighted_total = if totals.is_empty() {
        None
    } else {
        Some(totals.iter().sum::<f64>() / totals.len() as f64)
    };

    Ok(L2Result {
        n: d.records.len(),
        scheme: scheme.name.clone(),
        dimension_means,
        weighted_total,
        capped: signals.is_some(),
    })
}

// ---------------------------------------------------------------------------
// L1 and the decision
// ---------------------------------------------------------------------------

/// Free-form labeled business metrics, attached to reports verbatim.
/// Deliberately carries no gating logic.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct L1Metrics(pub BTreeMap<String, f64>);

/// The three-layer decision.
#[derive(Debug, Clone, Serialize)]
pub struct GateDecision {
    pub l3: L3Result,
    pub l2: L2Result,
    pub l1: Option<L1Metrics>,
    pub verdict: Verdict,
    pub rationale: String,
}

/// Combines the layers: any L3 failure forces NO-GO regardless of L2; a full
/// L3 pass goes GO with the L2 summary as rationale.
pub fn decide(l3: L3Result, l2: L2Result, l1: Option<L1Metrics>) -> GateDecision {
    let (verdict, rationale) = match l3.decision {
        Verdict::NoGo => (
            Verdict::NoGo,
            format!(
                "P0 pass rate {:.1}% with failed cases [{}]; safety gate overrides quality",
                l3.pass_rate * 100.0,
                l3.failed_ids.join(", ")
            ),
        ),
        Verdict::Go => match l2.weighted_total {
            Some(total) => (
                Verdict::Go,
                format!(
                    "all {} P0 cases pass; weighted total {:.2} under scheme {}",
                    l3.total, total, l2.scheme
                ),
            ),
            None => (
                Verdict::Go,
                format!(
                    "all {} P0 cases pass; warning: no scoreable conversations for L2",
                    l3.total
                ),
            ),
        },
    };
    GateDecision {
        l3,
        l2,
        l1,
        verdict,
        rationale,
    }
}

// ---------------------------------------------------------------------------
// Cycle reports
// ---------------------------------------------------------------------------

/// One configuration under evaluation: its P0 results and scored dataset.
#[derive(Debug, Clone)]
pub struct ConfigRun {
    pub name: String,
    pub cases: Vec<P0Case>,
    pub dataset: Dataset,
    pub signals: Option<BTreeMap<String, BehaviorSignals>>,
}

/// One row of the cycle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CycleRow {
    pub config: String,
    pub pass_rate: f64,
    pub decision: Verdict,
    pub failed_ids: Vec<String>,
    pub d3_mean: Option<f64>,
    pub weighted_total: Option<f64>,
    /// Deltas against the named baseline config.
    pub d3_delta: Option<f64>,
    pub total_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub baseline: String,
    pub rows: Vec<CycleRow>,
}

impl CycleReport {
    pub fn to_markdown(&self) -> String {
        use crate::report::{fmt3, md_table};
        let fmt_opt = |v: Option<f64>| v.map(fmt3).unwrap_or_else(|| "-".into());
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.config.clone(),
                    format!("{:.1}%", r.pass_rate * 100.0),
                    r.decision.to_string(),
                    fmt_opt(r.d3_mean),
                    fmt_opt(r.d3_delta),
                    fmt_opt(r.weighted_total),
                    fmt_opt(r.total_delta),
                    if r.failed_ids.is_empty() {
                        "none".into()
                    } else {
                        r.failed_ids.join(", ")
                    },
                ]
            })
            .collect();
        let mut out = format!(
            "# Cycle comparison (baseline: {})\n\n",
            self.baseline
        );
        out.push_str(&md_table(
            &[
                "Config",
                "P0 pass rate",
                "Decision",
                "D3 mean",
                "D3 vs baseline",
                "Weighted total",
                "Total vs baseline",
                "Failed cases",
            ],
            &rows,
        ));
        out
    }
}

/// Compares configurations against a named baseline: P0 pass rate and
/// decision, D3 mean, weighted total, and deltas. Rows are ordered by config
/// name for determinism.
pub fn cycle_report(
    runs: &[ConfigRun],
    scheme: &WeightScheme,
    policy: MissingPolicy,
    baseline: &str,
) -> Result<CycleReport> {
    if runs.is_empty() {
        return Err(Error::Data("no configurations to compare".into()));
    }
    if !runs.iter().any(|r| r.name == baseline) {
        return Err(Error::Invalid(format!(
            "unknown baseline config {baseline:?}"
        )));
    }

    struct Computed {
        l3: L3Result,
        l2: L2Result,
    }
    let mut computed: BTreeMap<&str, Computed> = BTreeMap::new();
    for run in runs {
        let l3 = l3_evaluate(&run.cases)?;
        let l2 = l2_evaluate(&run.dataset, scheme, policy, run.signals.as_ref())?;
        computed.insert(&run.name, Computed { l3, l2 });
    }

    let base = &computed[baseline];
    let base_d3 = base.l2.dimension_means[&DimensionId::D3];
    let base_total = base.l2.weighted_total;

    let rows = computed
        .iter()
        .map(|(name, c)| {
            let d3_mean = c.l2.dimension_means[&DimensionId::D3];
            CycleRow {
                config: (*name).to_string(),
                pass_rate: c.l3.pass_rate,
                decision: c.l3.decision,
                failed_ids: c.l3.failed_ids.clone(),
                d3_mean,
                weighted_total: c.l2.weighted_total,
                d3_delta: match (d3_mean, base_d3) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                },
                total_delta: match (c.l2.weighted_total, base_total) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                },
            }
        })
        .collect();

    Ok(CycleReport {
        baseline: baseline.to_string(),
        rows,
    })
}
