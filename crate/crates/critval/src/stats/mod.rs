//! Statistical kernel: tie-aware Spearman with t-approximate and exact
//! permutation p-values, Bonferroni correction, Cohen's d, partial rank
//! correlation, IRLS logistic regression, and variance inflation factors.
//!
//! Every operation is a pure function of its inputs; nothing here holds
//! shared mutable state, so concurrent use is unrestricted.

pub mod linalg;
mod logistic;
pub mod special;

pub use logistic::{logistic_fit, LogisticFit};

use serde::Serialize;

/// Errors from the statistical kernel.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("{0} is constant; statistic undefined")]
    ConstantInput(&'static str),

    #[error("degenerate residuals after removing covariate; correlation undefined")]
    DegenerateResiduals,

    #[error("pooled standard deviation is zero")]
    ZeroPooledSd,

    #[error("outcome contains a single class")]
    SingleClass,

    #[error("design matrix is rank-deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("exact permutation p-value limited to n <= {max}, got {got}")]
    PermutationTooLarge { max: usize, got: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// How a correlation p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PMethod {
    /// Two-sided t approximation on the given degrees of freedom.
    TApprox { df: usize },
    /// Exact two-sided permutation test over all n! orderings.
    ExactPermutation { permutations: u64 },
}

/// Rank-correlation output. `n` is the raw sample size; the degrees of
/// freedom actually used live in [`PMethod`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_uncorrected: f64,
    pub p_bonferroni: Option<f64>,
    pub n: usize,
    pub method: PMethod,
}

/// Cohen's d with pooled standard deviation (n-1 denominators).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectSize {
    pub d: f64,
    pub n1: usize,
    pub n2: usize,
    pub mean1: f64,
    pub mean2: f64,
    pub pooled_sd: f64,
}

/// Variance inflation factors, one per predictor column.
/// Perfect collinearity is reported as `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollinearityReport {
    pub vif: Vec<f64>,
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().any(|v| !v.is_finite()) {
        Err(StatsError::NonFinite)
    } else {
        Ok(())
    }
}

/// Average ranks 1..=n; tied values share the arithmetic mean of their
/// rank positions.
pub fn rank_average_ties(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    check_finite(values)?;
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // positions i..=j are a tie block; ranks are 1-based
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    Ok(ranks)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
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
    if sxx <= 0.0 {
        return Err(StatsError::ConstantInput("x"));
    }
    if syy <= 0.0 {
        return Err(StatsError::ConstantInput("y"));
    }
    // identical sequences must give exactly 1 (rank vectors are equal, not
    // merely proportional, whenever x and y order identically with ties)
    if x == y {
        return Ok(1.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn t_approx_p(rho: f64, df: usize) -> f64 {
    if rho.abs() >= 1.0 - 1e-12 {
        return 0.0;
    }
    let t = rho * ((df as f64) / (1.0 - rho * rho)).sqrt();
    special::t_two_sided_p(t, df)
}

/// Bonferroni correction: `min(1, m · p)`.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

/// Tie-aware Spearman rank correlation with a two-sided t-approximate
/// p-value on n-2 degrees of freedom. `bonferroni_m`, when given, fills
/// the corrected p.
pub fn spearman(
    x: &[f64],
    y: &[f64],
    bonferroni_m: Option<usize>,
) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFew {
            needed: 3,
            got: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let rx = rank_average_ties(x)?;
    let ry = rank_average_ties(y)?;
    let rho = pearson(&rx, &ry)?;
    let n = x.len();
    let p = t_approx_p(rho, n - 2);
    Ok(CorrelationResult {
        rho,
        p_uncorrected: p,
        p_bonferroni: bonferroni_m.map(|m| bonferroni(p, m)),
        n,
        method: PMethod::TApprox { df: n - 2 },
    })
}

const EXACT_PERMUTATION_MAX_N: usize = 10;

/// Spearman with an exact two-sided permutation p-value over all n!
/// orderings of `y` (n ≤ 10; cost grows factorially). The count is
/// deterministic: p = #\{perm : |ρ_perm| ≥ |ρ_observed|\} / n!.
pub fn spearman_exact(
    x: &[f64],
    y: &[f64],
    bonferroni_m: Option<usize>,
) -> Result<CorrelationResult, StatsError> {
    let base = spearman(x, y, None)?;
    let n = x.len();
    if n > EXACT_PERMUTATION_MAX_N {
        return Err(StatsError::PermutationTooLarge {
            max: EXACT_PERMUTATION_MAX_N,
            got: n,
        });
    }

    let rx = rank_average_ties(x)?;
    let ry = rank_average_ties(y)?;
    let nf = n as f64;
    let mx = rx.iter().sum::<f64>() / nf;
    let my = ry.iter().sum::<f64>() / nf;
    let cx: Vec<f64> = rx.iter().map(|v| v - mx).collect();
    let sx = cx.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sy = ry.iter().map(|v| (v - my) * (v - my)).sum::<f64>().sqrt();

    // Only the cross-term varies under permutation; |rho| >= |rho_obs| is
    // equivalent to |dot(cx, ry_perm)| >= |rho_obs| * sx * sy.
    let threshold = base.rho.abs() * sx * sy - 1e-9;

    let mut perm: Vec<usize> = (0..n).collect();
    let mut counter = vec![0usize; n];
    let mut total: u64 = 0;
    let mut extreme: u64 = 0;

    let mut eval = |perm: &[usize]| {
        let mut dot = 0.0;
        for (i, &pi) in perm.iter().enumerate() {
            dot += cx[i] * ry[pi];
        }
        total += 1;
        if dot.abs() >= threshold {
            extreme += 1;
        }
    };

    // Heap's algorithm, iterative
    eval(&perm);
    let mut i = 0;
    while i < n {
        if counter[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counter[i], i);
            }
            eval(&perm);
            counter[i] += 1;
            i = 0;
        } else {
            counter[i] = 0;
            i += 1;
        }
    }

    let p = extreme as f64 / total as f64;
    Ok(CorrelationResult {
        rho: base.rho,
        p_uncorrected: p,
        p_bonferroni: bonferroni_m.map(|m| bonferroni(p, m)),
        n,
        method: PMethod::ExactPermutation { permutations: total },
    })
}

/// Cohen's d: (mean1 - mean2) / pooled SD, sample variances with n-1
/// denominators.
pub fn cohens_d(group1: &[f64], group2: &[f64]) -> Result<EffectSize, StatsError> {
    if group1.len() < 2 || group2.len() < 2 {
        return Err(StatsError::TooFew {
            needed: 2,
            got: group1.len().min(group2.len()),
        });
    }
    check_finite(group1)?;
    check_finite(group2)?;
    let n1 = group1.len() as f64;
    let n2 = group2.len() as f64;
    let mean1 = group1.iter().sum::<f64>() / n1;
    let mean2 = group2.iter().sum::<f64>() / n2;
    let var1 = group1.iter().map(|v| (v - mean1).powi(2)).sum::<f64>() / (n1 - 1.0);
    let var2 = group2.iter().map(|v| (v - mean2).powi(2)).sum::<f64>() / (n2 - 1.0);
    let pooled = (((n1 - 1.0) * var1 + (n2 - 1.0) * var2) / (n1 + n2 - 2.0)).sqrt();
    if pooled == 0.0 {
        return Err(StatsError::ZeroPooledSd);
    }
    Ok(EffectSize {
        d: (mean1 - mean2) / pooled,
        n1: group1.len(),
        n2: group2.len(),
        mean1,
        mean2,
        pooled_sd: pooled,
    })
}

/// Partial Spearman correlation of x and y given one covariate: all three are
/// rank-transformed, the covariate's ranks are regressed out of the x- and
/// y-ranks by least squares (with intercept), and the residuals' Pearson
/// correlation is returned with a t-approximate p on n-3 degrees of freedom.
pub fn partial_spearman(
    x: &[f64],
    y: &[f64],
    covariate: &[f64],
) -> Result<CorrelationResult, StatsError> {
    let n = x.len();
    if y.len() != n {
        return Err(StatsError::LengthMismatch(n, y.len()));
    }
    if covariate.len() != n {
        return Err(StatsError::LengthMismatch(n, covariate.len()));
    }
    if n < 4 {
        return Err(StatsError::TooFew { needed: 4, got: n });
    }
    check_finite(x)?;
    check_finite(y)?;
    check_finite(covariate)?;

    let rx = rank_average_ties(x)?;
    let ry = rank_average_ties(y)?;
    let rz = rank_average_ties(covariate)?;

    let nf = n as f64;
    let mz = rz.iter().sum::<f64>() / nf;
    let szz = rz.iter().map(|v| (v - mz) * (v - mz)).sum::<f64>();
    if szz <= 0.0 {
        return Err(StatsError::ConstantInput("covariate"));
    }

    let residuals = |r: &[f64]| -> Vec<f64> {
        let mr = r.iter().sum::<f64>() / nf;
        let cov = r
            .iter()
            .zip(&rz)
            .map(|(a, z)| (a - mr) * (z - mz))
            .sum::<f64>();
        let slope = cov / szz;
        r.iter()
            .zip(&rz)
            .map(|(a, z)| a - (mr + slope * (z - mz)))
            .collect()
    };

    let ex = residuals(&rx);
    let ey = residuals(&ry);

    let sxx = ex.iter().map(|v| v * v).sum::<f64>();
    let syy = ey.iter().map(|v| v * v).sum::<f64>();
    // residual variance collapses when x (or y) is an affine function of the
    // covariate's ranks; the partial correlation is undefined there
    let scale = nf * nf; // rank magnitudes are O(n)
    if sxx <= 1e-12 * scale || syy <= 1e-12 * scale {
        return Err(StatsError::DegenerateResiduals);
    }

    let r = (ex
        .iter()
        .zip(&ey)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / (sxx.sqrt() * syy.sqrt()))
    .clamp(-1.0, 1.0);

    let df = n - 3;
    let p = if r.abs() >= 1.0 - 1e-12 {
        0.0
    } else {
        let t = r * ((df as f64) / (1.0 - r * r)).sqrt();
        special::t_two_sided_p(t, df)
    };

    Ok(CorrelationResult {
        rho: r,
        p_uncorrected: p,
        p_bonferroni: None,
        n,
        method: PMethod::TApprox { df },
    })
}

/// Variance inflation factors. `design` is observation-major (each inner
/// vector is one observation's predictor values, no intercept column).
/// VIF_j = 1/(1-R²_j) from regressing predictor j on the others plus an
/// intercept; perfect collinearity yields `f64::INFINITY`.
pub fn vif(design: &[Vec<f64>]) -> Result<CollinearityReport, StatsError> {
    let n = design.len();
    let k = design.first().map_or(0, |r| r.len());
    if k < 2 {
        return Err(StatsError::Invalid(
            "vif needs at least 2 predictors".into(),
        ));
    }
    if n < k + 2 {
        return Err(StatsError::TooFew { needed: k + 2, got: n });
    }
    for row in design {
        if row.len() != k {
            return Err(StatsError::LengthMismatch(k, row.len()));
        }
        check_finite(row)?;
    }

    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let yj: Vec<f64> = design.iter().map(|r| r[j]).collect();
        let myj = yj.iter().sum::<f64>() / n as f64;
        let sst: f64 = yj.iter().map(|v| (v - myj) * (v - myj)).sum();
        if sst <= 0.0 {
            return Err(StatsError::ConstantInput("predictor"));
        }

        let rows: Vec<Vec<f64>> = design
            .iter()
            .map(|r| {
                let mut row = Vec::with_capacity(k);
                row.push(1.0);
                for (jj, v) in r.iter().enumerate() {
                    if jj != j {
                        row.push(*v);
                    }
                }
                row
            })
            .collect();
        let x = linalg::Matrix::from_rows(&rows);
        match linalg::ols(&x, &yj) {
            Ok(beta) => {
                let fitted = x.mat_vec(&beta);
                let sse: f64 = yj
                    .iter()
                    .zip(&fitted)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let r2 = 1.0 - sse / sst;
                if 1.0 - r2 <= 1e-12 {
                    out.push(f64::INFINITY);
                } else {
                    out.push(1.0 / (1.0 - r2));
                }
            }
            // the other predictors are themselves collinear; predictor j is
            // perfectly explained in the limit
            Err(linalg::LinalgError::Singular { .. }) => out.push(f64::INFINITY),
        }
    }
    Ok(CollinearityReport { vif: out })
}
