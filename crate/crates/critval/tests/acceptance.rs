//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//!
//! Criterion 5 (the published six-scheme table) is expected to stay red on
//! three rows: those values are not derivable from the published per-dimension
//! scores under any standard Spearman pipeline (see the per-row output for
//! the exact deltas). The other criteria must pass.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use critval::composite::{
    apply_caps, builtin_scheme, composite, BehaviorSignals, MissingPolicy,
};
use critval::dataset::{
    builtin_phase1, deal_flag, phase1_analysis_view, scores_from_values, AgentType,
    ConversationRecord, Dataset, DimensionId, Message, OutcomeLabel, Role, Transcript,
    TrustStage,
};
use critval::funnel::{
    behavior_signals, default_rules, gate_permitted, FunnelStage, TrustGatePolicy,
};
use critval::gate::{decide, l2_evaluate, l3_evaluate, CaseResult, P0Case, Verdict};
use critval::stats;
use critval::weights::{evaluate_scheme, temporal_cv, CVConfig, SearchConfig};

const POLICY: MissingPolicy = MissingPolicy::ProportionalReweight;

fn fixture14() -> Dataset {
    phase1_analysis_view(&builtin_phase1())
}

fn pass(criterion: &str, detail: &str) {
    println!("[PASS] {criterion}: {detail}");
}

// -------------------------------------------------------------------------
// Fixture reproduction (criteria 1-6)
// -------------------------------------------------------------------------

#[test]
fn criterion_01_composite_totals_match_published_table() {
    let d = builtin_phase1();
    let scheme = builtin_scheme("v2.0_current").unwrap();
    for (record, row) in d.records.iter().zip(critval::dataset::fixture::ROWS.iter()) {
        let c = composite(&record.scores, &scheme, POLICY).unwrap();
        let value = c.value.score().unwrap();
        let rounded = (value * 100.0).round() / 100.0;
        assert_eq!(
            (rounded * 100.0).round() as i64,
            (row.v2_0 * 100.0).round() as i64,
            "composite for {} drifted: {} vs {}",
            row.id,
            rounded,
            row.v2_0
        );
    }
    pass("criterion 1", "all 15 v2.0 composite totals exact at 2 decimals");
}

fn dimension_column(view: &Dataset, dim: DimensionId) -> (Vec<f64>, Vec<f64>) {
    let outcomes = critval::dataset::encode_outcomes(view).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (r, y) in view.records.iter().zip(outcomes) {
        if let Some(v) = r.scores.get(&dim).and_then(|s| s.value()) {
            xs.push(f64::from(v));
            ys.push(y);
        }
    }
    (xs, ys)
}

#[test]
fn criterion_02_d3_correlation() {
    let view = fixture14();
    let (x, y) = dimension_column(&view, DimensionId::D3);
    let r = stats::spearman(&x, &y, Some(7)).unwrap();
    assert!((r.rho - 0.679).abs() <= 0.005, "rho = {}", r.rho);
    assert!(
        (r.p_uncorrected - 0.008).abs() <= 0.002,
        "p = {}",
        r.p_uncorrected
    );
    let bonf = r.p_bonferroni.unwrap();
    assert!((bonf - 0.054).abs() <= 0.01, "p_bonf = {bonf}");
    pass(
        "criterion 2",
        &format!(
            "D3 rho {:.4}, p {:.4}, p_bonf {:.4}",
            r.rho, r.p_uncorrected, bonf
        ),
    );
}

#[test]
fn criterion_03_composite_correlation() {
    let view = fixture14();
    let scheme = builtin_scheme("v2.0_current").unwrap();
    let e = evaluate_scheme(&view, &scheme, POLICY).unwrap();
    assert!((e.rho - 0.355).abs() <= 0.005, "rho = {}", e.rho);
    assert!((e.p - 0.213).abs() <= 0.01, "p = {}", e.p);
    pass(
        "criterion 3",
        &format!("composite rho {:.4}, p {:.4}", e.rho, e.p),
    );
}

#[test]
fn criterion_04_d5_and_d1() {
    let view = fixture14();
    let (x5, y5) = dimension_column(&view, DimensionId::D5);
    let r5 = stats::spearman(&x5, &y5, None).unwrap();
    assert!((r5.rho - -0.284).abs() <= 0.005, "D5 rho = {}", r5.rho);

    let mut deal_group = Vec::new();
    let mut nodeal_group = Vec::new();
    for r in &view.records {
        let v = f64::from(r.scores[&DimensionId::D5].value().unwrap());
        if deal_flag(r).unwrap() {
            deal_group.push(v);
        } else {
            nodeal_group.push(v);
        }
    }
    let effect = stats::cohens_d(&deal_group, &nodeal_group).unwrap();
    assert!((effect.d - -1.35).abs() <= 0.01, "D5 d = {}", effect.d);

    let (x1, y1) = dimension_column(&view, DimensionId::D1);
    let r1 = stats::spearman(&x1, &y1, None).unwrap();
    assert!((r1.rho - 0.146).abs() <= 0.005, "D1 rho = {}", r1.rho);
    pass(
        "criterion 4",
        &format!(
            "D5 rho {:.4}, D5 d {:.4}, D1 rho {:.4}",
            r5.rho, effect.d, r1.rho
        ),
    );
}

#[test]
fn criterion_05_published_scheme_table() {
    // Published six-scheme column and ordering.
    let published: [(&str, f64, f64); 6] = [
        ("conversion_informed", 0.607, 0.021),
        ("d3_boosted_40", 0.570, 0.033),
        ("d3_boosted_30", 0.478, 0.084),
        ("d5_removed", 0.465, 0.094),
        ("v2.0_current", 0.355, 0.213),
        ("v1_equal", 0.282, 0.329),
    ];
    let view = fixture14();
    let mut failures = Vec::new();
    for (name, rho, p) in published {
        let scheme = builtin_scheme(name).unwrap();
        let e = evaluate_scheme(&view, &scheme, POLICY).unwrap();
        let rho_ok = (e.rho - rho).abs() <= 0.005;
        let p_ok = (e.p - p).abs() <= 0.01;
        let status = if rho_ok && p_ok { "ok" } else { "DRIFT" };
        println!(
            "  scheme {name}: published rho {rho:.3} / computed {:.4}, published p {p:.3} / computed {:.4} [{status}]",
            e.rho, e.p
        );
        if !(rho_ok && p_ok) {
            failures.push(format!(
                "{name}: computed rho {:.4} vs published {rho:.3}",
                e.rho
            ));
        }
    }

    let evals =
        critval::weights::compare_builtin_schemes(&view, POLICY).unwrap();
    let computed_order: Vec<&str> = evals.iter().map(|e| e.scheme.as_str()).collect();
    let published_order: Vec<&str> = published.iter().map(|(n, _, _)| *n).collect();
    if computed_order != published_order {
        failures.push(format!(
            "ordering: computed {computed_order:?} vs published {published_order:?}"
        ));
    }

    if failures.is_empty() {
        pass("criterion 5", "all six published scheme values and ordering");
    } else {
        println!(
            "[FAIL] criterion 5: {} of 6 published rows are not derivable from the published per-conversation scores (documented data discrepancy): {}",
            failures.len().saturating_sub(usize::from(failures.iter().any(|f| f.starts_with("ordering")))),
            failures.join("; ")
        );
        panic!(
            "published scheme table not reproducible from published data: {}",
            failures.join("; ")
        );
    }
}

#[test]
fn criterion_06_group_means() {
    let view = fixture14();
    let scheme = builtin_scheme("v2.0_current").unwrap();
    let mut deal = Vec::new();
    let mut nodeal = Vec::new();
    for r in &view.records {
        let c = composite(&r.scores, &scheme, POLICY).unwrap();
        let v = c.value.score().unwrap();
        if deal_flag(r).unwrap() {
            deal.push(v);
        } else {
            nodeal.push(v);
        }
    }
    let deal_mean = deal.iter().sum::<f64>() / deal.len() as f64;
    let nodeal_mean = nodeal.iter().sum::<f64>() / nodeal.len() as f64;
    assert!((deal_mean - 2.48).abs() <= 0.005, "deal mean {deal_mean}");
    assert!(
        (nodeal_mean - 2.70).abs() <= 0.005,
        "no-deal mean {nodeal_mean}"
    );
    pass(
        "criterion 6",
        &format!("deal {deal_mean:.4} / no-deal {nodeal_mean:.4}"),
    );
}

// -------------------------------------------------------------------------
// Statistical kernel properties (criteria 7-9)
// -------------------------------------------------------------------------

#[test]
fn criterion_07_exact_permutation_agreement_and_monotone_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7001);
    let mut p_t = Vec::new();
    let mut p_exact = Vec::new();
    let mut trials = 0;
    while trials < 200 {
        let n = rng.gen_range(5..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let Ok(t_approx) = stats::spearman(&x, &y, None) else {
            continue; // constant draw; resample
        };
        let exact = stats::spearman_exact(&x, &y, None).unwrap();
        p_t.push(t_approx.p_uncorrected);
        p_exact.push(exact.p_uncorrected);
        trials += 1;
    }
    let agreement = stats::spearman(&p_t, &p_exact, None).unwrap();
    assert!(
        agreement.rho > 0.99,
        "significance-ordering agreement rho = {}",
        agreement.rho
    );

    // rho invariant under random strictly monotone transforms, exactly
    for trial in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(7100 + trial);
        let n = rng.gen_range(5..=12);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=5) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=5) as f64).collect();
        let Ok(base) = stats::spearman(&x, &y, None) else {
            continue;
        };
        // build a random strictly increasing map over the observed values
        let mut levels: Vec<i64> = x.iter().map(|v| *v as i64).collect();
        levels.sort_unstable();
        levels.dedup();
        let mut mapped_values = BTreeMap::new();
        let mut acc = rng.gen_range(-5.0..5.0);
        for level in levels {
            acc += rng.gen_range(0.1..3.0);
            mapped_values.insert(level, acc);
        }
        let tx: Vec<f64> = x.iter().map(|v| mapped_values[&(*v as i64)]).collect();
        let transformed = stats::spearman(&tx, &y, None).unwrap();
        assert_eq!(
            base.rho.to_bits(),
            transformed.rho.to_bits(),
            "monotone transform changed rho"
        );
    }
    pass(
        "criterion 7",
        &format!(
            "t-approx vs exact permutation ordering rho {:.4} over 200 instances; 100 monotone transforms exact",
            agreement.rho
        ),
    );
}

/// Concave log-likelihood grid maximization, refined to an effective step of
/// 0.005 over [-10, 10]^2 (the refinement is exact for concave objectives).
fn grid_oracle(x: &[f64], y: &[f64]) -> (f64, f64) {
    let ll = |b0: f64, b1: f64| -> f64 {
        let mut acc = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            let eta = b0 + b1 * xi;
            // stable log(1+exp)
            let lse = if eta > 35.0 {
                eta
            } else if eta < -35.0 {
                0.0
            } else {
                eta.exp().ln_1p()
            };
            acc += yi * eta - lse;
        }
        acc
    };
    let mut center = (0.0f64, 0.0f64);
    let mut half_range = 10.0f64;
    let mut step = 0.5f64;
    loop {
        let mut best = (f64::NEG_INFINITY, center);
        let steps = (2.0 * half_range / step).round() as i64;
        for i in 0..=steps {
            let b0 = center.0 - half_range + i as f64 * step;
            for j in 0..=steps {
                let b1 = center.1 - half_range + j as f64 * step;
                let v = ll(b0, b1);
                if v > best.0 {
                    best = (v, (b0, b1));
                }
            }
        }
        center = best.1;
        if step <= 0.005 {
            return center;
        }
        half_range = step * 1.1;
        step /= 10.0;
    }
}

#[test]
fn criterion_08_logistic_against_grid_oracle() {
    let mut produced = 0;
    let mut seed = 8000u64;
    while produced < 20 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 8;
        let x: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-2.0f64..2.0).round() + rng.gen_range(-0.25..0.25))
            .collect();
        let b0 = rng.gen_range(-1.0..1.0);
        let b1 = rng.gen_range(-1.5..1.5);
        let y: Vec<f64> = x
            .iter()
            .map(|xi| {
                let p = 1.0 / (1.0 + (-(b0 + b1 * xi)).exp());
                if rng.gen_bool(p) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let design: Vec<Vec<f64>> = x.iter().map(|v| vec![1.0, *v]).collect();
        let Ok(fit) = stats::logistic_fit(&design, &y) else {
            continue; // single class; resample
        };
        if !fit.converged || fit.coefficients.iter().any(|c| c.abs() > 8.0) {
            continue; // near-separated instance; resample deterministically
        }

        let (o0, o1) = grid_oracle(&x, &y);
        assert!(
            (fit.coefficients[0] - o0).abs() <= 0.01,
            "intercept {} vs oracle {o0}",
            fit.coefficients[0]
        );
        assert!(
            (fit.coefficients[1] - o1).abs() <= 0.01,
            "slope {} vs oracle {o1}",
            fit.coefficients[1]
        );

        // analytic score max-norm below 1e-6, and the finite-difference
        // gradient agrees with it to 1e-4 relative
        let score = fit.score(&design, &y);
        for s in &score {
            assert!(s.abs() < 1e-6, "score component {s}");
        }
        let ll_at = |beta: &[f64]| -> f64 {
            let mut acc = 0.0;
            for (row, yi) in design.iter().zip(&y) {
                let eta = row[0] * beta[0] + row[1] * beta[1];
                let lse = if eta > 35.0 { eta } else { eta.exp().ln_1p() };
                acc += yi * eta - lse;
            }
            acc
        };
        let h = 1e-5;
        for j in 0..2 {
            let mut up = fit.coefficients.clone();
            up[j] += h;
            let mut down = fit.coefficients.clone();
            down[j] -= h;
            let fd = (ll_at(&up) - ll_at(&down)) / (2.0 * h);
            let scale = fd.abs().max(score[j].abs()).max(1e-4);
            assert!(
                (fd - score[j]).abs() <= 1e-4 * scale.max(1.0),
                "fd {fd} vs analytic {}",
                score[j]
            );
        }

        for w in fit.ll_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "log-likelihood decreased");
        }
        assert_eq!(
            fit.aic,
            2.0 * fit.coefficients.len() as f64 - 2.0 * fit.log_likelihood,
            "AIC identity"
        );
        produced += 1;
    }
    pass(
        "criterion 8",
        "20 tiny instances match the grid oracle within 0.01; score < 1e-6; LL monotone; AIC exact",
    );
}

#[test]
fn criterion_09_partial_spearman_and_vif() {
    // orthogonal covariate: partial equals plain within 1e-9
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
    let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 7.0];
    let z = [1.0, 2.0, 2.0, 1.0, 1.0, 2.0, 2.0, 1.0];
    let plain = stats::spearman(&x, &y, None).unwrap();
    let partial = stats::partial_spearman(&x, &y, &z).unwrap();
    assert!((plain.rho - partial.rho).abs() < 1e-9);

    // degenerate covariates must error
    assert!(stats::partial_spearman(&x, &y, &[3.0; 8]).is_err());
    assert!(stats::partial_spearman(&x, &y, &x).is_err());

    // VIF: exactly 1 for orthogonal designs, infinity marker for collinear
    let orthogonal: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            vec![
                if i % 2 == 0 { 1.0 } else { -1.0 },
                if (i / 2) % 2 == 0 { 1.0 } else { -1.0 },
            ]
        })
        .collect();
    let r = stats::vif(&orthogonal).unwrap();
    assert!((r.vif[0] - 1.0).abs() < 1e-9);
    assert!((r.vif[1] - 1.0).abs() < 1e-9);

    let collinear: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let v = i as f64;
            vec![v, 3.0 * v]
        })
        .collect();
    let r = stats::vif(&collinear).unwrap();
    assert!(r.vif.iter().all(|v| v.is_infinite()));
    pass(
        "criterion 9",
        "partial == plain under orthogonality; degenerate covariates error; VIF 1 / inf",
    );
}

// -------------------------------------------------------------------------
// Cap engine (criterion 10)
// -------------------------------------------------------------------------

#[test]
fn criterion_10_cap_engine_on_authored_transcripts() {
    let rules = default_rules();
    let scheme = builtin_scheme("v2.0_current").unwrap();

    let agent = |text: &str| Message {
        role: Role::Agent,
        text: text.into(),
        timestamp: None,
        contains_purchase_link: None,
    };
    let user = |text: &str| Message {
        role: Role::User,
        text: text.into(),
        timestamp: None,
        contains_purchase_link: None,
    };

    // authored transcript: three rejections, agent keeps pushing price
    let make_transcript = |rejections: usize| {
        let mut messages = Vec::new();
        for _ in 0..rejections {
            messages.push(agent("我们的服务包括一对一红娘"));
            messages.push(user("不需要"));
        }
        messages.push(agent("现在下单优惠价999元/月"));
        Transcript {
            id: "authored".into(),
            agent_type: AgentType::Ai,
            messages,
        }
    };

    let scores = scores_from_values([3, 3, 3, 3, 3, 3, 3]).unwrap();
    let c = composite(&scores, &scheme, POLICY).unwrap();

    let s3 = behavior_signals(&make_transcript(3), &rules.rejections, &rules.links);
    assert_eq!(s3.rejection_count, 3);
    assert!(s3.continued_after_rejection);
    let capped3 = apply_caps(&scores, &c, &s3).unwrap();
    assert!(capped3.capped_total <= 2.4 + 1e-12);
    assert_eq!(capped3.capped_d3, Some(1));

    let s5 = behavior_signals(&make_transcript(5), &rules.rejections, &rules.links);
    assert_eq!(s5.rejection_count, 5);
    let capped5 = apply_caps(&scores, &c, &s5).unwrap();
    assert!((capped5.capped_total - 2.0).abs() < 1e-12);

    // monotone in rejection_count across random score maps
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..50 {
        let values: [u8; 7] = std::array::from_fn(|_| rng.gen_range(1..=5));
        let scores = scores_from_values(values).unwrap();
        let c = composite(&scores, &scheme, POLICY).unwrap();
        let mut prev = f64::INFINITY;
        for rejections in 0..9 {
            let signals = BehaviorSignals {
                rejection_count: rejections,
                continued_after_rejection: true,
                ..Default::default()
            };
            let capped = apply_caps(&scores, &c, &signals).unwrap();
            assert!(
                capped.capped_total <= prev + 1e-12,
                "cap not monotone at {rejections}"
            );
            prev = capped.capped_total;
        }
    }

    // idempotence on the authored case
    let once = capped5;
    let mut capped_scores = scores.clone();
    capped_scores.insert(
        DimensionId::D3,
        critval::dataset::DimensionScore::new(once.capped_d3.unwrap()).unwrap(),
    );
    let recomposed = critval::composite::CompositeScore {
        value: critval::composite::CompositeValue::Score(once.capped_total),
        effective_weights: c.effective_weights.clone(),
        missing: c.missing.clone(),
    };
    let twice = apply_caps(&capped_scores, &recomposed, &s5).unwrap();
    assert_eq!(once.capped_d3, twice.capped_d3);
    assert!((once.capped_total - twice.capped_total).abs() < 1e-12);

    pass(
        "criterion 10",
        "caps monotone, idempotent; authored transcripts hit 2.4 and 2.0 bounds",
    );
}

// -------------------------------------------------------------------------
// Trust Gate (criterion 11)
// -------------------------------------------------------------------------

#[test]
fn criterion_11_trust_gate_table_and_monotonicity() {
    let policy = TrustGatePolicy::default();
    // the published permit table: (trust, permitted stages)
    let table: [(TrustStage, [bool; 6]); 6] = [
        (TrustStage::T0, [true, false, false, false, false, false]),
        (TrustStage::T1, [true, true, false, false, false, false]),
        (TrustStage::T2, [true, true, true, true, false, false]),
        (TrustStage::T3, [true, true, true, true, true, false]),
        (TrustStage::T4, [true, true, true, true, true, true]),
        (TrustStage::T5, [true, true, true, true, true, true]),
    ];
    for (trust, permits) in table {
        for (stage, expected) in FunnelStage::ALL.iter().zip(permits) {
            let got = gate_permitted(trust, *stage, &policy).unwrap();
            assert_eq!(got, expected, "gate({trust}, {stage})");
        }
    }

    // monotonicity across randomized pairs: raising trust never revokes
    let mut rng = ChaCha8Rng::seed_from_u64(1100);
    for _ in 0..1000 {
        let t_low = TrustStage::ALL[rng.gen_range(0..6)];
        let t_high = TrustStage::ALL[rng.gen_range(0..6)];
        let (t_low, t_high) = if t_low <= t_high {
            (t_low, t_high)
        } else {
            (t_high, t_low)
        };
        let stage = FunnelStage::ALL[rng.gen_range(0..6)];
        let low_ok = gate_permitted(t_low, stage, &policy).unwrap();
        let high_ok = gate_permitted(t_high, stage, &policy).unwrap();
        assert!(!low_ok || high_ok, "raising {t_low}->{t_high} revoked {stage}");
    }
    pass(
        "criterion 11",
        "all six published gate rows reproduced; monotone over 1000 random pairs",
    );
}

// -------------------------------------------------------------------------
// Temporal CV (criterion 12)
// -------------------------------------------------------------------------

fn synthetic_dataset(
    n: usize,
    rng: &mut ChaCha8Rng,
    outcome_of: impl Fn(&mut ChaCha8Rng, &[u8; 7]) -> OutcomeLabel,
) -> Dataset {
    let records = (0..n)
        .map(|i| {
            let mut values: [u8; 7] = std::array::from_fn(|_| rng.gen_range(1..=5));
            // keep D3 spread over the full range for the planted variant
            values[2] = rng.gen_range(1..=5);
            let outcome = outcome_of(rng, &values);
            ConversationRecord {
                id: format!("S{i}"),
                agent_type: AgentType::Human,
                scores: scores_from_values(values).unwrap(),
                outcome,
                message_count: 0,
                chrono_index: i as u32,
                phase_tag: String::new(),
            }
        })
        .collect();
    Dataset {
        records,
        transcripts: None,
        provenance: "synthetic".into(),
    }
}

#[test]
fn criterion_12_temporal_cv_planted_signal_and_noise() {
    // planted: outcome = D3 exactly (stage ordinal == D3 score)
    let mut rng = ChaCha8Rng::seed_from_u64(1200);
    let planted = synthetic_dataset(20, &mut rng, |_, values| {
        let stage = match values[2] {
            1 => TrustStage::T1,
            2 => TrustStage::T2,
            3 => TrustStage::T3,
            4 => TrustStage::T4,
            _ => TrustStage::T5,
        };
        OutcomeLabel::TrustProxy(stage)
    });
    let search = SearchConfig {
        step: 25,
        bounds: None,
        policy: POLICY,
    };
    let r = temporal_cv(&planted, &CVConfig { folds: 4 }, &search).unwrap();
    assert_eq!(r.evaluated_folds, 4);
    assert_eq!(r.wins, 4, "trained must beat equal in every fold");
    for fold in &r.folds {
        let trained = fold.trained_rho.unwrap();
        assert!(
            (trained - 1.0).abs() < 1e-12,
            "planted-signal fold rho {trained}"
        );
        assert!(fold.equal_rho.unwrap() < 1.0);
    }

    // seeded noise: outcome independent of all scores; n matches the
    // published CV design (60 conversations, folds of 15)
    let mut deltas = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let noise = synthetic_dataset(60, &mut rng, |rng, _| {
            OutcomeLabel::Converted(rng.gen_bool(0.5))
        });
        let r = temporal_cv(&noise, &CVConfig { folds: 4 }, &search).unwrap();
        if r.evaluated_folds > 0 && r.mean_delta_rho.is_finite() {
            deltas.push(r.mean_delta_rho);
        }
    }
    assert!(deltas.len() >= 95, "too many degenerate seeds");
    let mean_delta = deltas.iter().sum::<f64>() / deltas.len() as f64;
    assert!(
        mean_delta.abs() < 0.05,
        "noise-data mean delta rho = {mean_delta}"
    );
    pass(
        "criterion 12",
        &format!(
            "planted signal wins 4/4 folds at rho 1.0; noise |mean delta| = {:.4} over {} seeds",
            mean_delta.abs(),
            deltas.len()
        ),
    );
}

// -------------------------------------------------------------------------
// Gate decisions (criterion 13)
// -------------------------------------------------------------------------

#[test]
fn criterion_13_gate_decisions() {
    let scheme = builtin_scheme("v2.0_current").unwrap();
    let d = builtin_phase1();
    let cases = |failed: &[&str]| -> Vec<P0Case> {
        (0..18)
            .map(|i| {
                let id = format!("S{}", 30 + i);
                let result = if failed.contains(&id.as_str()) {
                    CaseResult::Fail
                } else {
                    CaseResult::Pass
                };
                P0Case {
                    id,
                    description: String::new(),
                    result,
                }
            })
            .collect()
    };

    // Config-A-shaped: one P0 failure, higher quality score -> NO-GO
    let mut boosted = d.clone();
    for r in &mut boosted.records {
        for dim in DimensionId::ALL {
            let v = r.scores[&dim].value().unwrap();
            r.scores.insert(
                dim,
                critval::dataset::DimensionScore::new((v + 1).min(5)).unwrap(),
            );
        }
    }
    let l3_a = l3_evaluate(&cases(&["S31"])).unwrap();
    assert!((l3_a.pass_rate - 0.944).abs() < 1e-3);
    let l2_a = l2_evaluate(&boosted, &scheme, POLICY, None).unwrap();
    let l3_b = l3_evaluate(&cases(&[])).unwrap();
    let l2_b = l2_evaluate(&d, &scheme, POLICY, None).unwrap();
    assert!(l2_a.weighted_total.unwrap() > l2_b.weighted_total.unwrap());

    let decision_a = decide(l3_a, l2_a, None);
    assert_eq!(decision_a.verdict, Verdict::NoGo);
    assert!(decision_a.rationale.contains("S31"));
    let decision_b = decide(l3_b, l2_b, None);
    assert_eq!(decision_b.verdict, Verdict::Go);

    // safety dominance under randomized L2 values
    let mut rng = ChaCha8Rng::seed_from_u64(1300);
    for _ in 0..200 {
        let total_cases = rng.gen_range(1..=30);
        let fail_count = rng.gen_range(0..=total_cases);
        let cases: Vec<P0Case> = (0..total_cases)
            .map(|i| P0Case {
                id: format!("S{i}"),
                description: String::new(),
                result: if i < fail_count {
                    CaseResult::Fail
                } else {
                    CaseResult::Pass
                },
            })
            .collect();
        let l3 = l3_evaluate(&cases).unwrap();
        let mut means = BTreeMap::new();
        for dim in DimensionId::ALL {
            means.insert(dim, Some(rng.gen_range(1.0..=5.0)));
        }
        let l2 = critval::gate::L2Result {
            n: 10,
            scheme: "v2.0_current".into(),
            dimension_means: means,
            weighted_total: Some(rng.gen_range(1.0..=5.0)),
            capped: false,
        };
        let decision = decide(l3, l2, None);
        if fail_count > 0 {
            assert_eq!(decision.verdict, Verdict::NoGo, "safety must dominate");
        } else {
            assert_eq!(decision.verdict, Verdict::Go);
        }
    }
    pass(
        "criterion 13",
        "P0 failure forces NO-GO over higher L2; all-pass is GO; 200 randomized trials",
    );
}

// -------------------------------------------------------------------------
// reproduce-phase1 CLI (criterion 14)
// -------------------------------------------------------------------------

#[test]
fn criterion_14_reproduce_cli_detects_perturbation() {
    let bin = env!("CARGO_BIN_EXE_critval");
    let dir = tempfile::tempdir().unwrap();

    let clean = std::process::Command::new(bin)
        .args(["reproduce-phase1", "--out"])
        .arg(dir.path().join("clean"))
        .env("CRITVAL_NO_COLOR", "1")
        .output()
        .expect("run binary");
    assert!(
        clean.status.success(),
        "clean reproduce failed: {}",
        String::from_utf8_lossy(&clean.stdout)
    );

    let perturbed = std::process::Command::new(bin)
        .args(["reproduce-phase1", "--perturb", "H1:D3:+1", "--out"])
        .arg(dir.path().join("perturbed"))
        .env("CRITVAL_NO_COLOR", "1")
        .output()
        .expect("run binary");
    assert_eq!(
        perturbed.status.code(),
        Some(1),
        "perturbed fixture must exit nonzero"
    );
    let stdout = String::from_utf8_lossy(&perturbed.stdout);
    assert!(
        stdout.contains("composite_v20[H1]"),
        "drifted statistic must be named"
    );
    pass(
        "criterion 14",
        "clean checkout exits 0; one-point perturbation exits 1 naming the statistic",
    );
}
