//! Scheme registry, scheme-vs-outcome evaluation, exhaustive weight search on
//! the percentage grid, and temporal k-fold cross-validation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::composite::{
    builtin_scheme, builtin_schemes, composite, equal_scheme, CompositeValue, MissingPolicy,
    WeightScheme,
};
use crate::dataset::{encode_outcomes, Dataset, DimensionId};
use crate::error::{Error, Result};
use crate::stats;

/// One scheme's criterion validity against the dataset's outcome encoding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeEvaluation {
    pub scheme: String,
    pub rho: f64,
    pub p: f64,
    /// Records actually used after policy filtering.
    pub n: usize,
    pub policy: MissingPolicy,
}

/// Finds a scheme by name among the built-ins.
pub fn find_scheme(name: &str) -> Option<WeightScheme> {
    builtin_scheme(name)
}

fn collect_pairs(
    d: &Dataset,
    scheme: &WeightScheme,
    policy: MissingPolicy,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if d.records.is_empty() {
        return Err(Error::Data("empty dataset".into()));
    }
    let outcomes = encode_outcomes(d)?;
    let mut xs = Vec::with_capacity(d.records.len());
    let mut ys = Vec::with_capacity(d.records.len());
    for (record, y) in d.records.iter().zip(outcomes) {
        let c = composite(&record.scores, scheme, policy)?;
        if let CompositeValue::Score(v) = c.value {
            xs.push(v);
            ys.push(y);
        }
        // Excluded records simply drop out under complete-case
    }
    if xs.is_empty() {
        return Err(Error::Data(
            "no records remain after missing-data policy filtering".into(),
        ));
    }
    Ok((xs, ys))
}

/// Computes each record's composite under the scheme, then Spearman against
/// the outcome encoding (TL ordinal after T6 exclusion, or 0/1 conversion).
pub fn evaluate_scheme(
    d: &Dataset,
    scheme: &WeightScheme,
    policy: MissingPolicy,
) -> Result<SchemeEvaluation> {
    let (xs, ys) = collect_pairs(d, scheme, policy)?;
    let r = stats::spearman(&xs, &ys, None)?;
    Ok(SchemeEvaluation {
        scheme: scheme.name.clone(),
        rho: r.rho,
        p: r.p_uncorrected,
        n: r.n,
        policy,
    })
}

/// Evaluates several schemes and sorts by descending ρ, ties broken by name.
pub fn compare_schemes(
    d: &Dataset,
    schemes: &[WeightScheme],
    policy: MissingPolicy,
) -> Result<Vec<SchemeEvaluation>> {
    let mut evals = schemes
        .iter()
        .map(|s| evaluate_scheme(d, s, policy))
        .collect::<Result<Vec<_>>>()?;
    evals.sort_by(|a, b| {
        b.rho
            .partial_cmp(&a.rho)
            .expect("finite rho")
            .then_with(|| a.scheme.cmp(&b.scheme))
    });
    Ok(evals)
}

/// Evaluates all six built-in schemes.
pub fn compare_builtin_schemes(
    d: &Dataset,
    policy: MissingPolicy,
) -> Result<Vec<SchemeEvaluation>> {
    compare_schemes(d, &builtin_schemes(), policy)
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

/// Configuration for the exhaustive weight-grid search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Percentage granularity; must divide 100.
    pub step: u32,
    /// Optional per-dimension (min, max) percentage bounds.
    pub bounds: Option<BTreeMap<DimensionId, (f64, f64)>>,
    pub policy: MissingPolicy,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            step: 5,
            bounds: None,
            policy: MissingPolicy::ProportionalReweight,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if self.step == 0 || !100u32.is_multiple_of(self.step) {
            return Err(Error::Invalid(format!(
                "step {} must divide 100",
                self.step
            )));
        }
        if let Some(bounds) = &self.bounds {
            for (dim, (lo, hi)) in bounds {
                if lo > hi || *lo < 0.0 || *hi > 100.0 {
                    return Err(Error::Invalid(format!(
                        "infeasible bounds for {dim}: ({lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Search output: the best scheme, its evaluation, and enumeration counters.
#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub scheme: WeightScheme,
    pub evaluation: SchemeEvaluation,
    pub vectors_evaluated: u64,
    pub vectors_skipped: u64,
}

struct GridState<'a> {
    step: u32,
    lo: [u32; 7],
    hi: [u32; 7],
    records: &'a [[Option<u8>; 7]],
    outcome_ranks: &'a [f64],
    policy: MissingPolicy,
    best: Option<(f64, [u32; 7])>,
    evaluated: u64,
    skipped: u64,
}

impl GridState<'_> {
    /// Spearman ρ of composites against the outcome encoding; `None` when
    /// composites are constant or a record loses all weight. The composite
    /// accumulation mirrors [`composite`]'s term order bit for bit, so the
    /// search and `evaluate_scheme` agree on tie structure.
    fn rho_for(&self, weights: &[u32; 7]) -> Option<f64> {
        let w: [f64; 7] = std::array::from_fn(|i| weights[i] as f64);
        let total: f64 = w.iter().sum();

        let mut xs = Vec::with_capacity(self.records.len());
        let mut ys = Vec::with_capacity(self.records.len());
        for (ri, rec) in self.records.iter().enumerate() {
            let value = match self.policy {
                MissingPolicy::ProportionalReweight => {
                    let mut used = 0.0;
                    for i in 0..7 {
                        if rec[i].is_some() {
                            used += w[i];
                        }
                    }
                    if used <= 0.0 {
                        return None;
                    }
                    let mut acc = 0.0;
                    for i in 0..7 {
                        if let Some(v) = rec[i] {
                            acc += v as f64 * (w[i] / used);
                        }
                    }
                    acc
                }
                MissingPolicy::CompleteCase => {
                    if (0..7).any(|i| rec[i].is_none() && w[i] > 0.0) {
                        continue; // record drops out under complete-case
                    }
                    let mut acc = 0.0;
                    for i in 0..7 {
                        if let Some(v) = rec[i] {
                            acc += v as f64 * (w[i] / total);
                        }
                    }
                    acc
                }
                MissingPolicy::Impute(fill) => {
                    let mut acc = 0.0;
                    for i in 0..7 {
                        let v = rec[i].map(f64::from).unwrap_or(fill);
                        acc += v * (w[i] / total);
                    }
                    acc
                }
            };
            xs.push(value);
            ys.push(self.outcome_ranks[ri]);
        }
        if xs.len() < 3 {
            return None;
        }
        let rx = stats::rank_average_ties(&xs).ok()?;
        // complete-case changes which records survive per weight vector, so
        // its outcome ranks must be rebuilt; otherwise they are precomputed
        let ry = if matches!(self.policy, MissingPolicy::CompleteCase) {
            stats::rank_average_ties(&ys).ok()?
        } else {
            ys
        };
        pearson_or_none(&rx, &ry)
    }

    fn consider(&mut self, weights: &[u32; 7]) {
        match self.rho_for(weights) {
            Some(rho) => {
                self.evaluated += 1;
                // strict improvement keeps the lexicographically smallest
                // vector among ties (enumeration is lexicographic)
                let better = match &self.best {
                    None => true,
                    Some((best_rho, _)) => rho > *best_rho,
                };
                if better {
                    self.best = Some((rho, *weights));
                }
            }
            None => self.skipped += 1,
        }
    }

    fn enumerate(&mut self, dim: usize, remaining: u32, current: &mut [u32; 7]) {
        if dim == 6 {
            if remaining >= self.lo[6] && remaining <= self.hi[6] && remaining.is_multiple_of(self.step) {
                current[6] = remaining;
                self.consider(&{ *current });
            }
            return;
        }
        let min_rest: u32 = self.lo[dim + 1..7].iter().sum();
        let mut w = self.lo[dim];
        while w <= self.hi[dim].min(remaining) {
            if remaining - w >= min_rest {
                current[dim] = w;
                self.enumerate(dim + 1, remaining - w, current);
            }
            w += self.step;
        }
    }
}

fn pearson_or_none(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Exhaustively enumerates all weight vectors on the step-grid summing to 100
/// within bounds and returns the argmax-ρ scheme. Deterministic: enumeration
/// is lexicographic and ties keep the lexicographically smallest vector.
pub fn search_weights(d: &Dataset, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if d.records.is_empty() {
        return Err(Error::Data("empty dataset".into()));
    }
    let outcomes = encode_outcomes(d)?;

    // snap bounds onto the grid
    let mut lo = [0u32; 7];
    let mut hi = [100u32; 7];
    if let Some(bounds) = &cfg.bounds {
        for (dim, (l, h)) in bounds {
            let i = dim.index();
            lo[i] = (l / cfg.step as f64).ceil() as u32 * cfg.step;
            hi[i] = (h / cfg.step as f64).floor() as u32 * cfg.step;
            if lo[i] > hi[i] {
                return Err(Error::Invalid(format!(
                    "bounds for {dim} admit no grid point"
                )));
            }
        }
    }
    if lo.iter().sum::<u32>() > 100 {
        return Err(Error::Invalid("bounds exceed 100% in total".into()));
    }

    let records: Vec<[Option<u8>; 7]> = d
        .records
        .iter()
        .map(|r| {
            std::array::from_fn(|i| {
                r.scores
                    .get(&DimensionId::ALL[i])
                    .and_then(|s| s.value())
            })
        })
        .collect();

    // under proportional/impute policies every record survives, so outcome
    // ranks can be precomputed once
    let outcome_ranks = match cfg.policy {
        MissingPolicy::CompleteCase => outcomes.clone(),
        _ => stats::rank_average_ties(&outcomes)?,
    };

    let mut state = GridState {
        step: cfg.step,
        lo,
        hi,
        records: &records,
        outcome_ranks: &outcome_ranks,
        policy: cfg.policy,
        best: None,
        evaluated: 0,
        skipped: 0,
    };
    let mut current = [0u32; 7];
    state.enumerate(0, 100, &mut current);

    let (_, best_weights) = state.best.ok_or_else(|| {
        Error::Data("grid search found no evaluable weight vector".into())
    })?;

    let weights_f: [f64; 7] = std::array::from_fn(|i| best_weights[i] as f64);
    let scheme = WeightScheme::new("searched", weights_f);
    let evaluation = evaluate_scheme(d, &scheme, cfg.policy)?;
    Ok(SearchResult {
        scheme,
        evaluation,
        vectors_evaluated: state.evaluated,
        vectors_skipped: state.skipped,
    })
}

// ---------------------------------------------------------------------------
// Temporal cross-validation
// ---------------------------------------------------------------------------

/// Temporal CV configuration: contiguous chronological folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CVConfig {
    pub folds: usize,
}

impl Default for CVConfig {
    fn default() -> Self {
        CVConfig { folds: 4 }
    }
}

/// Per-fold outcome. Folds whose test split cannot produce a correlation are
/// flagged and excluded from the aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test_n: usize,
    /// Absent when the training split could not support a search.
    pub trained_scheme: Option<WeightScheme>,
    pub trained_rho: Option<f64>,
    pub equal_rho: Option<f64>,
    pub skipped: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CVResult {
    pub folds: Vec<FoldOutcome>,
    pub evaluated_folds: usize,
    pub mean_trained_rho: f64,
    pub sd_trained_rho: f64,
    pub mean_equal_rho: f64,
    pub sd_equal_rho: f64,
    pub mean_delta_rho: f64,
    /// Folds where the trained scheme beat equal weights.
    pub wins: usize,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Splits `n` items into `folds` contiguous chunks, sizes differing by at
/// most one, earlier folds larger. Returns (start, end) index pairs.
pub fn contiguous_folds(n: usize, folds: usize) -> Vec<(usize, usize)> {
    let base = n / folds;
    let rem = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for i in 0..folds {
        let size = base + usize::from(i < rem);
        out.push((start, start + size));
        start += size;
    }
    out
}

/// Temporal k-fold CV: records sorted by `chrono_index`, split into contiguous
/// folds; per fold, weights are grid-searched on the complement and evaluated
/// on the fold, alongside the equal-weight baseline.
pub fn temporal_cv(d: &Dataset, cfg: &CVConfig, search: &SearchConfig) -> Result<CVResult> {
    if cfg.folds < 2 {
        return Err(Error::Invalid("folds must be >= 2".into()));
    }
    if d.records.len() < cfg.folds * 2 {
        return Err(Error::Data(format!(
            "need at least {} records for {} folds",
            cfg.folds * 2,
            cfg.folds
        )));
    }

    let mut sorted = d.clone();
    sorted.records.sort_by_key(|r| r.chrono_index);
    let spans = contiguous_folds(sorted.records.len(), cfg.folds);

    let equal = equal_scheme();
    let mut folds = Vec::with_capacity(cfg.folds);
    let mut trained_rhos = Vec::new();
    let mut equal_rhos = Vec::new();
    let mut deltas = Vec::new();
    let mut wins = 0;

    for (i, (start, end)) in spans.iter().enumerate() {
        let test = Dataset {
            records: sorted.records[*start..*end].to_vec(),
            transcripts: None,
            provenance: format!("{}#fold{}", sorted.provenance, i),
        };
        let mut train_records = sorted.records[..*start].to_vec();
        train_records.extend_from_slice(&sorted.records[*end..]);
        let train = Dataset {
            records: train_records,
            transcripts: None,
            provenance: format!("{}#train{}", sorted.provenance, i),
        };

        let searched = match search_weights(&train, search) {
            Ok(s) => s,
            Err(e) => {
                folds.push(FoldOutcome {
                    fold: i,
                    test_n: end - start,
                    trained_scheme: None,
                    trained_rho: None,
                    equal_rho: None,
                    skipped: true,
                    note: Some(format!("training search failed: {e}")),
                });
                continue;
            }
        };
        let trained_eval = evaluate_scheme(&test, &searched.scheme, search.policy);
        let equal_eval = evaluate_scheme(&test, &equal, search.policy);

        match (&trained_eval, &equal_eval) {
            (Ok(t), Ok(e)) => {
                trained_rhos.push(t.rho);
                equal_rhos.push(e.rho);
                deltas.push(t.rho - e.rho);
                if t.rho > e.rho {
                    wins += 1;
                }
                folds.push(FoldOutcome {
                    fold: i,
                    test_n: end - start,
                    trained_scheme: Some(searched.scheme),
                    trained_rho: Some(t.rho),
                    equal_rho: Some(e.rho),
                    skipped: false,
                    note: None,
                });
            }
            (t, e) => {
                let note = [t.as_ref().err(), e.as_ref().err()]
                    .iter()
                    .flatten()
                    .map(|err| err.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                folds.push(FoldOutcome {
                    fold: i,
                    test_n: end - start,
                    trained_scheme: Some(searched.scheme),
                    trained_rho: t.as_ref().ok().map(|v| v.rho),
                    equal_rho: e.as_ref().ok().map(|v| v.rho),
                    skipped: true,
                    note: Some(note),
                });
            }
        }
    }

    let (mean_trained, sd_trained) = mean_sd(&trained_rhos);
    let (mean_equal, sd_equal) = mean_sd(&equal_rhos);
    let (mean_delta, _) = mean_sd(&deltas);

    Ok(CVResult {
        evaluated_folds: trained_rhos.len(),
        folds,
        mean_trained_rho: mean_trained,
        sd_trained_rho: sd_trained,
        mean_equal_rho: mean_equal,
        sd_equal_rho: sd_equal,
        mean_delta_rho: mean_delta,
        wins,
    })
}
