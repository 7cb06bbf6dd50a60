//! Weighted composite scores under missing-data policies, the built-in weight
//! schemes, and the behavioral hard-cap engine.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{DimensionId, DimensionScore, ScoreMap};
use crate::error::{Error, Result};
use crate::validation::ValidationReport;

// ---------------------------------------------------------------------------
// Weight schemes
// ---------------------------------------------------------------------------

/// A named mapping of dimensions to percentage weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub name: String,
    /// Percentages, nominally summing to 100. Schemes flagged `unnormalized`
    /// are used after normalization.
    pub weights: BTreeMap<DimensionId, f64>,
    #[serde(default)]
    pub unnormalized: bool,
}

impl WeightScheme {
    pub fn new(name: impl Into<String>, percents: [f64; 7]) -> Self {
        let mut weights = BTreeMap::new();
        for (dim, w) in DimensionId::ALL.iter().zip(percents) {
            weights.insert(*dim, w);
        }
        WeightScheme {
            name: name.into(),
            weights,
            unnormalized: false,
        }
    }

    pub fn weight(&self, dim: DimensionId) -> f64 {
        self.weights.get(&dim).copied().unwrap_or(0.0)
    }

    fn weight_sum(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Weights normalized to sum 1 over all dimensions.
    pub fn normalized(&self) -> Result<BTreeMap<DimensionId, f64>> {
        let report = scheme_validate(self);
        if !report.is_clean() {
            let msg = report
                .errors()
                .map(|f| f.message.clone())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Scheme {
                name: self.name.clone(),
                message: msg,
            });
        }
        let sum = self.weight_sum();
        Ok(self
            .weights
            .iter()
            .map(|(d, w)| (*d, w / sum))
            .collect())
    }
}

/// Checks a scheme: negative weights and zero sums are errors; a sum other
/// than 100 is auto-normalizable and therefore only a warning.
pub fn scheme_validate(scheme: &WeightScheme) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (dim, w) in &scheme.weights {
        if *w < 0.0 {
            report.error(format!("weight for {dim} is negative ({w})"));
        }
        if !w.is_finite() {
            report.error(format!("weight for {dim} is not finite"));
        }
    }
    let sum = scheme.weight_sum();
    if sum <= 0.0 {
        report.error("weights sum to zero");
    } else if (sum - 100.0).abs() > 1e-9 {
        report.warning(format!("sum {sum}, normalized"));
    }
    report
}

/// The six built-in schemes, under their published names.
pub fn builtin_schemes() -> Vec<WeightScheme> {
    vec![
        WeightScheme::new("conversion_informed", [10.0, 10.0, 40.0, 15.0, 0.0, 15.0, 10.0]),
        WeightScheme::new("d3_boosted_40", [10.0, 10.0, 40.0, 15.0, 10.0, 10.0, 5.0]),
        WeightScheme::new("d3_boosted_30", [10.0, 15.0, 30.0, 15.0, 10.0, 10.0, 10.0]),
        WeightScheme::new("d5_removed", [15.0, 15.0, 20.0, 15.0, 0.0, 20.0, 15.0]),
        WeightScheme::new("v2.0_current", [20.0, 20.0, 20.0, 15.0, 10.0, 10.0, 5.0]),
        WeightScheme {
            unnormalized: true, // 7 x 14 = 98; used after normalization
            ..WeightScheme::new("v1_equal", [14.0; 7])
        },
    ]
}

/// Looks up a built-in scheme by name.
pub fn builtin_scheme(name: &str) -> Option<WeightScheme> {
    builtin_schemes().into_iter().find(|s| s.name == name)
}

/// Uniform 1/7 weights; the equal-weight baseline used by cross-validation.
pub fn equal_scheme() -> WeightScheme {
    let mut s = WeightScheme::new("equal", [100.0 / 7.0; 7]);
    s.unnormalized = true;
    s
}

/// Loads a scheme from JSON: `{"name": ..., "weights": {"D1": 20, ...}}`.
pub fn load_scheme(path: impl AsRef<Path>) -> Result<WeightScheme> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let scheme: WeightScheme = serde_json::from_str(&text)
        .map_err(|e| Error::parse(&display, 1, "-", e.to_string()))?;
    let report = scheme_validate(&scheme);
    if !report.is_clean() {
        return Err(Error::Scheme {
            name: scheme.name,
            message: report
                .errors()
                .map(|f| f.message.clone())
                .collect::<Vec<_>>()
                .join("; "),
        });
    }
    Ok(scheme)
}

// ---------------------------------------------------------------------------
// Composite computation
// ---------------------------------------------------------------------------

/// How to handle N/A dimension scores when computing a composite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "value", rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Drop N/A dimensions and renormalize the remaining weights.
    ProportionalReweight,
    /// Exclude the whole record when any positively weighted dimension is N/A.
    CompleteCase,
    /// Replace N/A scores with a fixed value in [1, 5].
    Impute(f64),
}

impl MissingPolicy {
    pub fn validate(self) -> Result<()> {
        if let MissingPolicy::Impute(v) = self {
            if !(1.0..=5.0).contains(&v) {
                return Err(Error::Invalid(format!("impute value {v} outside 1..=5")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CompositeValue {
    Score(f64),
    /// Complete-case policy rejected this record.
    Excluded,
}

impl CompositeValue {
    pub fn score(self) -> Option<f64> {
        match self {
            CompositeValue::Score(v) => Some(v),
            CompositeValue::Excluded => None,
        }
    }
}

/// A computed composite: the value, the effective per-dimension weights that
/// produced it (summing to 1 over the dimensions actually used), and which
/// dimensions were missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeScore {
    pub value: CompositeValue,
    pub effective_weights: BTreeMap<DimensionId, f64>,
    pub missing: BTreeSet<DimensionId>,
}

/// Weighted composite of one conversation's scores under a scheme and
/// missing-data policy.
///
/// The sum accumulates `score · (weight / weight_sum)` term by term in
/// dimension order; downstream rank ties therefore depend on these exact
/// double-precision values, which is the standard pipeline the published
/// figures come from.
pub fn composite(
    scores: &ScoreMap,
    scheme: &WeightScheme,
    policy: MissingPolicy,
) -> Result<CompositeScore> {
    policy.validate()?;
    let report = scheme_validate(scheme);
    if !report.is_clean() {
        return Err(Error::Scheme {
            name: scheme.name.clone(),
            message: report
                .errors()
                .map(|f| f.message.clone())
                .collect::<Vec<_>>()
                .join("; "),
        });
    }

    let missing: BTreeSet<DimensionId> = DimensionId::ALL
        .iter()
        .filter(|d| matches!(scores.get(d), Some(DimensionScore::NotApplicable) | None))
        .copied()
        .collect();

    let raw = |dim: DimensionId| scheme.weight(dim);
    let total_weight: f64 = DimensionId::ALL.iter().map(|d| raw(*d)).sum();

    match policy {
        MissingPolicy::ProportionalReweight => {
            let present_weight: f64 = DimensionId::ALL
                .iter()
                .filter(|d| !missing.contains(d))
                .map(|d| raw(*d))
                .sum();
            if present_weight <= 0.0 {
                return Err(Error::Invalid(
                    "all positively weighted dimensions are N/A".into(),
                ));
            }
            let mut acc = 0.0;
            let mut effective = BTreeMap::new();
            for dim in DimensionId::ALL {
                if missing.contains(&dim) {
                    continue;
                }
                let ew = raw(dim) / present_weight;
                effective.insert(dim, ew);
                let v = scores[&dim].value().expect("present dimension") as f64;
                acc += v * ew;
            }
            Ok(CompositeScore {
                value: CompositeValue::Score(acc),
                effective_weights: effective,
                missing,
            })
        }
        MissingPolicy::CompleteCase => {
            let blocking = missing.iter().any(|d| raw(*d) > 0.0);
            if blocking {
                return Ok(CompositeScore {
                    value: CompositeValue::Excluded,
                    effective_weights: BTreeMap::new(),
                    missing,
                });
            }
            let mut acc = 0.0;
            let mut effective = BTreeMap::new();
            for dim in DimensionId::ALL {
                let ew = raw(dim) / total_weight;
                effective.insert(dim, ew);
                if let Some(v) = scores.get(&dim).and_then(|s| s.value()) {
                    acc += v as f64 * ew;
                }
            }
            Ok(CompositeScore {
                value: CompositeValue::Score(acc),
                effective_weights: effective,
                missing,
            })
        }
        MissingPolicy::Impute(fill) => {
            let mut acc = 0.0;
            let mut effective = BTreeMap::new();
            for dim in DimensionId::ALL {
                let ew = raw(dim) / total_weight;
                effective.insert(dim, ew);
                let v = scores
                    .get(&dim)
                    .and_then(|s| s.value())
                    .map(f64::from)
                    .unwrap_or(fill);
                acc += v * ew;
            }
            Ok(CompositeScore {
                value: CompositeValue::Score(acc),
                effective_weights: effective,
                missing,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Hard caps
// ---------------------------------------------------------------------------

/// Behavioral signals extracted from a transcript; inputs to the cap rules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorSignals {
    pub rejection_count: u32,
    pub continued_after_rejection: bool,
    pub same_message_streak_days: u32,
    pub purchase_link_on_every_message: bool,
}

/// The four hard-cap rules, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapRule {
    /// Same message on 3+ consecutive days: D3 capped at 2.
    SameMessageStreak,
    /// 3+ rejections, agent continues: D3 capped at 1, total at 2.4.
    RejectionsThreeContinued,
    /// 5+ rejections, agent continues: D3 capped at 1, total at 2.0.
    RejectionsFiveContinued,
    /// Purchase link on every message: D3 capped at 2.
    PurchaseLinkEveryMessage,
}

impl CapRule {
    fn d3_cap(self) -> u8 {
        match self {
            CapRule::SameMessageStreak | CapRule::PurchaseLinkEveryMessage => 2,
            CapRule::RejectionsThreeContinued | CapRule::RejectionsFiveContinued => 1,
        }
    }

    fn total_cap(self) -> Option<f64> {
        match self {
            CapRule::RejectionsThreeContinued => Some(2.4),
            CapRule::RejectionsFiveContinued => Some(2.0),
            CapRule::SameMessageStreak | CapRule::PurchaseLinkEveryMessage => None,
        }
    }

    fn triggered(self, s: &BehaviorSignals) -> bool {
        match self {
            CapRule::SameMessageStreak => s.same_message_streak_days >= 3,
            CapRule::RejectionsThreeContinued => {
                s.rejection_count >= 3 && s.continued_after_rejection
            }
            CapRule::RejectionsFiveContinued => {
                s.rejection_count >= 5 && s.continued_after_rejection
            }
            CapRule::PurchaseLinkEveryMessage => s.purchase_link_on_every_message,
        }
    }

    const ALL: [CapRule; 4] = [
        CapRule::SameMessageStreak,
        CapRule::RejectionsThreeContinued,
        CapRule::RejectionsFiveContinued,
        CapRule::PurchaseLinkEveryMessage,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CappedScore {
    /// D3 before capping; `None` when D3 was N/A (then only total caps apply).
    pub original_d3: Option<u8>,
    pub capped_d3: Option<u8>,
    pub original_total: f64,
    pub capped_total: f64,
    pub applied_rules: Vec<CapRule>,
}

/// Applies the hard-cap rules to a computed composite. Rules accumulate and
/// the most restrictive cap wins. When D3 is capped below its original value,
/// the total is first recomputed with the capped D3 (using the composite's
/// effective weights), then any total cap is applied.
pub fn apply_caps(
    scores: &ScoreMap,
    composite: &CompositeScore,
    signals: &BehaviorSignals,
) -> Result<CappedScore> {
    let original_total = composite.value.score().ok_or_else(|| {
        Error::Invalid("cannot apply caps to an excluded composite".into())
    })?;

    let applied: Vec<CapRule> = CapRule::ALL
        .iter()
        .filter(|r| r.triggered(signals))
        .copied()
        .collect();

    let original_d3 = scores
        .get(&DimensionId::D3)
        .and_then(|s| s.value());

    let d3_cap = applied.iter().map(|r| r.d3_cap()).min();
    let total_cap = applied.iter().filter_map(|r| r.total_cap()).fold(
        None,
        |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))),
    );

    let capped_d3 = match (original_d3, d3_cap) {
        (Some(d3), Some(cap)) => Some(d3.min(cap)),
        (Some(d3), None) => Some(d3),
        (None, _) => None,
    };

    let mut total = original_total;
    if let (Some(orig), Some(capped)) = (original_d3, capped_d3) {
        if capped < orig {
            let w3 = composite
                .effective_weights
                .get(&DimensionId::D3)
                .copied()
                .unwrap_or(0.0);
            total += w3 * (f64::from(capped) - f64::from(orig));
        }
    }
    if let Some(cap) = total_cap {
        total = total.min(cap);
    }

    Ok(CappedScore {
        original_d3,
        capped_d3,
        original_total,
        capped_total: total,
        applied_rules: applied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::scores_from_values;

    fn v20() -> WeightScheme {
        builtin_scheme("v2.0_current").unwrap()
    }

    fn scores_with_na(values: [Option<u8>; 7]) -> ScoreMap {
        let mut m = ScoreMap::new();
        for (dim, v) in DimensionId::ALL.iter().zip(values) {
            let s = match v {
                Some(x) => DimensionScore::Value(x),
                None => DimensionScore::NotApplicable,
            };
            m.insert(*dim, s);
        }
        m
    }

    #[test]
    fn fixture_rows_reproduce() {
        let h1 = scores_from_values([3, 3, 3, 4, 4, 5, 3]).unwrap();
        let c = composite(&h1, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        assert!((c.value.score().unwrap() - 3.45).abs() < 1e-12);

        let a1 = scores_from_values([1, 1, 1, 1, 2, 2, 2]).unwrap();
        let c = composite(&a1, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        assert!((c.value.score().unwrap() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn constant_scores_with_na_stay_constant() {
        let s = scores_with_na([Some(3), Some(3), Some(3), Some(3), None, Some(3), Some(3)]);
        for scheme in builtin_schemes() {
            let c = composite(&s, &scheme, MissingPolicy::ProportionalReweight).unwrap();
            assert!((c.value.score().unwrap() - 3.0).abs() < 1e-12, "{}", scheme.name);
        }
    }

    #[test]
    fn proportional_reweight_hand_oracle() {
        // (4,2,4,2,NA,4,2) under v2.0: remaining weight 0.90
        let s = scores_with_na([
            Some(4),
            Some(2),
            Some(4),
            Some(2),
            None,
            Some(4),
            Some(2),
        ]);
        let c = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        let hand = (0.20 * 4.0 + 0.20 * 2.0 + 0.20 * 4.0 + 0.15 * 2.0 + 0.10 * 4.0 + 0.05 * 2.0)
            / 0.90;
        assert!((c.value.score().unwrap() - hand).abs() < 1e-12);
        assert_eq!(c.missing.len(), 1);
        let wsum: f64 = c.effective_weights.values().sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_case_excludes_only_on_positive_weight() {
        let s = scores_with_na([
            Some(3),
            Some(3),
            Some(3),
            Some(3),
            None,
            Some(3),
            Some(3),
        ]);
        let c = composite(&s, &v20(), MissingPolicy::CompleteCase).unwrap();
        assert_eq!(c.value, CompositeValue::Excluded);

        // conversion_informed weights D5 at zero, so a missing D5 is harmless
        let ci = builtin_scheme("conversion_informed").unwrap();
        let c = composite(&s, &ci, MissingPolicy::CompleteCase).unwrap();
        assert!((c.value.score().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn impute_replaces_na() {
        let s = scores_with_na([
            Some(3),
            Some(3),
            Some(3),
            Some(3),
            None,
            Some(3),
            Some(3),
        ]);
        let c = composite(&s, &v20(), MissingPolicy::Impute(3.0)).unwrap();
        assert!((c.value.score().unwrap() - 3.0).abs() < 1e-12);
        assert!(composite(&s, &v20(), MissingPolicy::Impute(9.0)).is_err());
    }

    #[test]
    fn no_missing_makes_policies_agree() {
        let s = scores_from_values([4, 2, 5, 1, 3, 2, 4]).unwrap();
        let a = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        let b = composite(&s, &v20(), MissingPolicy::Impute(1.0)).unwrap();
        let c = composite(&s, &v20(), MissingPolicy::CompleteCase).unwrap();
        let va = a.value.score().unwrap();
        assert!((va - b.value.score().unwrap()).abs() < 1e-12);
        assert!((va - c.value.score().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn composite_scale_invariance_and_bounds() {
        let s = scores_from_values([4, 2, 5, 1, 3, 2, 4]).unwrap();
        let base = v20();
        let mut doubled = base.clone();
        for w in doubled.weights.values_mut() {
            *w *= 2.0;
        }
        doubled.unnormalized = true;
        let a = composite(&s, &base, MissingPolicy::ProportionalReweight).unwrap();
        let b = composite(&s, &doubled, MissingPolicy::ProportionalReweight).unwrap();
        assert!((a.value.score().unwrap() - b.value.score().unwrap()).abs() < 1e-12);
        // within [min present score, max present score]
        let v = a.value.score().unwrap();
        assert!((1.0..=5.0).contains(&v));
    }

    #[test]
    fn all_positive_weights_na_errors() {
        let s = scores_with_na([None, None, None, None, Some(3), None, None]);
        // conversion_informed gives D5 zero weight, so everything weighted is NA
        let ci = builtin_scheme("conversion_informed").unwrap();
        assert!(composite(&s, &ci, MissingPolicy::ProportionalReweight).is_err());
    }

    #[test]
    fn scheme_validation_findings() {
        let mut report = scheme_validate(&builtin_scheme("v1_equal").unwrap());
        assert!(report.is_clean());
        assert!(report
            .findings
            .iter()
            .any(|f| f.message.contains("sum 98")));

        report = scheme_validate(&builtin_scheme("conversion_informed").unwrap());
        assert!(report.is_empty());

        let bad = WeightScheme::new("bad", [-5.0, 20.0, 20.0, 20.0, 20.0, 20.0, 5.0]);
        report = scheme_validate(&bad);
        assert!(!report.is_clean());
    }

    #[test]
    fn caps_noop_without_signals() {
        let s = scores_from_values([3, 3, 4, 3, 3, 3, 3]).unwrap();
        let c = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        let capped = apply_caps(&s, &c, &BehaviorSignals::default()).unwrap();
        assert!(capped.applied_rules.is_empty());
        assert_eq!(capped.original_total, capped.capped_total);
        assert_eq!(capped.original_d3, capped.capped_d3);
    }

    #[test]
    fn five_rejections_cap_total_at_2() {
        let s = scores_from_values([3, 3, 3, 3, 3, 3, 3]).unwrap();
        let c = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        assert!((c.value.score().unwrap() - 3.0).abs() < 1e-12);
        let signals = BehaviorSignals {
            rejection_count: 5,
            continued_after_rejection: true,
            ..Default::default()
        };
        let capped = apply_caps(&s, &c, &signals).unwrap();
        assert_eq!(capped.capped_d3, Some(1));
        assert!((capped.capped_total - 2.0).abs() < 1e-12);
        assert!(capped
            .applied_rules
            .contains(&CapRule::RejectionsFiveContinued));
    }

    #[test]
    fn recompute_then_clamp_hand_oracle() {
        // D3 = 4, all other dims 3, v2.0: total 3.2; capped D3 = 1 recomputes
        // to 3.2 + 0.2*(1-4) = 2.6, then clamps at 2.4
        let s = scores_from_values([3, 3, 4, 3, 3, 3, 3]).unwrap();
        let c = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        assert!((c.value.score().unwrap() - 3.2).abs() < 1e-12);
        let signals = BehaviorSignals {
            rejection_count: 3,
            continued_after_rejection: true,
            ..Default::default()
        };
        let capped = apply_caps(&s, &c, &signals).unwrap();
        assert!((capped.capped_total - 2.4).abs() < 1e-12);
        assert_eq!(capped.capped_d3, Some(1));
    }

    #[test]
    fn caps_monotone_in_rejection_count() {
        let s = scores_from_values([4, 4, 5, 4, 4, 4, 4]).unwrap();
        let c = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        let mut prev = f64::INFINITY;
        for rejections in 0..8 {
            let signals = BehaviorSignals {
                rejection_count: rejections,
                continued_after_rejection: true,
                ..Default::default()
            };
            let capped = apply_caps(&s, &c, &signals).unwrap();
            assert!(capped.capped_total <= prev + 1e-12);
            prev = capped.capped_total;
        }
    }

    #[test]
    fn caps_idempotent() {
        let s = scores_from_values([4, 4, 5, 4, 4, 4, 4]).unwrap();
        let c = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        let signals = BehaviorSignals {
            rejection_count: 3,
            continued_after_rejection: true,
            same_message_streak_days: 4,
            ..Default::default()
        };
        let once = apply_caps(&s, &c, &signals).unwrap();

        // re-apply on the capped state
        let mut capped_scores = s.clone();
        capped_scores.insert(
            DimensionId::D3,
            DimensionScore::Value(once.capped_d3.unwrap()),
        );
        let recomposed = CompositeScore {
            value: CompositeValue::Score(once.capped_total),
            effective_weights: c.effective_weights.clone(),
            missing: c.missing.clone(),
        };
        let twice = apply_caps(&capped_scores, &recomposed, &signals).unwrap();
        assert_eq!(once.capped_d3, twice.capped_d3);
        assert!((once.capped_total - twice.capped_total).abs() < 1e-12);
    }

    #[test]
    fn streak_and_link_rules_cap_d3_only() {
        let s = scores_from_values([4, 4, 5, 4, 4, 4, 4]).unwrap();
        let c = composite(&s, &v20(), MissingPolicy::ProportionalReweight).unwrap();
        let base = c.value.score().unwrap();
        let signals = BehaviorSignals {
            same_message_streak_days: 3,
            ..Default::default()
        };
        let capped = apply_caps(&s, &c, &signals).unwrap();
        assert_eq!(capped.capped_d3, Some(2));
        // recompute only, no total clamp
        assert!((capped.capped_total - (base + 0.2 * (2.0 - 5.0))).abs() < 1e-12);

        let signals = BehaviorSignals {
            purchase_link_on_every_message: true,
            ..Default::default()
        };
        let capped = apply_caps(&s, &c, &signals).unwrap();
        assert_eq!(capped.capped_d3, Some(2));
    }

    #[test]
    fn scheme_json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scheme.json");
        std::fs::write(
            &path,
            r#"{"name":"custom","weights":{"D1":20,"D2":20,"D3":20,"D4":15,"D5":10,"D6":10,"D7":5}}"#,
        )
        .unwrap();
        let s = load_scheme(&path).unwrap();
        assert_eq!(s.name, "custom");
        assert_eq!(s.weight(DimensionId::D4), 15.0);
    }
}
