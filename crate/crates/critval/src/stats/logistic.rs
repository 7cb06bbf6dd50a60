//! Maximum-likelihood logistic regression via iteratively reweighted least
//! squares, with Wald standard errors, odds-ratio confidence intervals, and
//! AIC. Step-halving keeps the log-likelihood non-decreasing per iteration.

use serde::Serialize;

use super::linalg::{self, LinalgError, Matrix};
use super::special;
use super::StatsError;

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-8;
/// |coefficient| beyond this is treated as quasi-separation.
const SEPARATION_BOUND: f64 = 15.0;
const WALD_Z: f64 = 1.959964;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticFit {
    /// Coefficients in design-column order; column 0 is the intercept.
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// exp(coefficient) per non-intercept column.
    pub odds_ratios: Vec<f64>,
    /// 95% Wald bounds on the odds ratios (non-intercept columns).
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Two-sided Wald p-values, one per coefficient (intercept included).
    pub p_values: Vec<f64>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood after each iteration; non-decreasing by construction.
    pub ll_trace: Vec<f64>,
    /// True when a singular weighted system needed a ridge fallback.
    pub ridged: bool,
}

impl LogisticFit {
    /// Analytic score Xᵀ(y - μ) at the fitted coefficients.
    pub fn score(&self, design: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let x = Matrix::from_rows(design);
        let eta = x.mat_vec(&self.coefficients);
        let resid: Vec<f64> = eta
            .iter()
            .zip(y)
            .map(|(e, yi)| yi - sigmoid(*e))
            .collect();
        Matrix::xtv(&x, &resid)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(x: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    let eta = x.mat_vec(beta);
    let mut ll = 0.0;
    for (e, yi) in eta.iter().zip(y) {
        // log(sigmoid) computed stably: -ln(1 + exp(-e)) etc.
        let log_mu = -ln_1p_exp(-e);
        let log_1m = -ln_1p_exp(*e);
        ll += yi * log_mu + (1.0 - yi) * log_1m;
    }
    ll
}

fn ln_1p_exp(z: f64) -> f64 {
    if z > 35.0 {
        z
    } else if z < -35.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

/// Detects rank deficiency of the design and names the offending column.
fn check_rank(x: &Matrix) -> Result<(), StatsError> {
    let xtx = Matrix::xtwx(x, &vec![1.0; x.rows]);
    match linalg::invert(&xtx) {
        Ok(_) => Ok(()),
        Err(LinalgError::Singular { column }) => Err(StatsError::RankDeficient { column }),
    }
}

/// Fits a logistic regression of `y` (0/1) on `design` (observation-major,
/// intercept column included as column 0).
///
/// Convergence: max |Δcoefficient| < 1e-8 or 100 iterations. Non-convergence
/// and quasi-separation (any |coefficient| > 15) set `converged = false`,
/// never silently. A singular weighted system falls back to a 1e-10 ridge
/// and sets `ridged`.
pub fn logistic_fit(design: &[Vec<f64>], y: &[f64]) -> Result<LogisticFit, StatsError> {
    let n = design.len();
    let k = design.first().map_or(0, |r| r.len());
    if k == 0 {
        return Err(StatsError::Invalid("empty design".into()));
    }
    if y.len() != n {
        return Err(StatsError::LengthMismatch(n, y.len()));
    }
    if n < k + 1 {
        return Err(StatsError::TooFew { needed: k + 1, got: n });
    }
    for row in design {
        if row.len() != k {
            return Err(StatsError::LengthMismatch(k, row.len()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(StatsError::Invalid("y must be 0/1".into()));
    }
    let ones = y.iter().filter(|v| **v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(StatsError::SingleClass);
    }

    let x = Matrix::from_rows(design);
    check_rank(&x)?;

    let mut beta = vec![0.0; k];
    let mut ll = log_likelihood(&x, y, &beta);
    let mut ll_trace = Vec::with_capacity(16);
    let mut converged = false;
    let mut ridged = false;
    let mut iterations = 0;

    for iter in 1..=MAX_ITER {
        iterations = iter;
        let eta = x.mat_vec(&beta);
        let mu: Vec<f64> = eta.iter().map(|e| sigmoid(*e)).collect();
        let w: Vec<f64> = mu.iter().map(|m| (m * (1.0 - m)).max(1e-12)).collect();
        let resid: Vec<f64> = y.iter().zip(&mu).map(|(yi, mi)| yi - mi).collect();

        let info = Matrix::xtwx(&x, &w);
        let grad = Matrix::xtv(&x, &resid);

        let step = match linalg::solve(&info, &grad) {
            Ok(s) => s,
            Err(LinalgError::Singular { .. }) => {
                ridged = true;
                let mut ridged_info = info.clone();
                for j in 0..k {
                    ridged_info[(j, j)] += 1e-10;
                }
                linalg::solve(&ridged_info, &grad)
                    .map_err(|e| match e {
                        LinalgError::Singular { column } => {
                            StatsError::RankDeficient { column }
                        }
                    })?
            }
        };

        // step-halving keeps the per-iteration log-likelihood monotone
        let mut scale = 1.0;
        let mut candidate;
        let mut new_ll;
        loop {
            candidate = beta
                .iter()
                .zip(&step)
                .map(|(b, s)| b + scale * s)
                .collect::<Vec<f64>>();
            new_ll = log_likelihood(&x, y, &candidate);
            if new_ll >= ll - 1e-12 || scale < 1e-8 {
                break;
            }
            scale *= 0.5;
        }

        let max_delta = beta
            .iter()
            .zip(&candidate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        beta = candidate;
        ll = new_ll.max(ll);
        ll_trace.push(ll);

        if max_delta < TOL {
            converged = true;
            break;
        }
    }

    if beta.iter().any(|b| b.abs() > SEPARATION_BOUND) {
        converged = false;
    }

    // observed information at the optimum; SEs from its inverse diagonal
    let eta = x.mat_vec(&beta);
    let w: Vec<f64> = eta
        .iter()
        .map(|e| {
            let m = sigmoid(*e);
            (m * (1.0 - m)).max(1e-12)
        })
        .collect();
    let info = Matrix::xtwx(&x, &w);
    let cov = match linalg::invert(&info) {
        Ok(c) => c,
        Err(LinalgError::Singular { .. }) => {
            ridged = true;
            let mut ridged_info = info.clone();
            for j in 0..k {
                ridged_info[(j, j)] += 1e-10;
            }
            linalg::invert(&ridged_info).map_err(|e| match e {
                LinalgError::Singular { column } => StatsError::RankDeficient { column },
            })?
        }
    };

    let standard_errors: Vec<f64> = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let p_values: Vec<f64> = beta
        .iter()
        .zip(&standard_errors)
        .map(|(b, se)| {
            if *se <= 0.0 {
                1.0
            } else {
                special::normal_two_sided_p(b / se)
            }
        })
        .collect();
    let odds_ratios: Vec<f64> = beta[1..].iter().map(|b| b.exp()).collect();
    let ci_low: Vec<f64> = beta[1..]
        .iter()
        .zip(&standard_errors[1..])
        .map(|(b, se)| (b - WALD_Z * se).exp())
        .collect();
    let ci_high: Vec<f64> = beta[1..]
        .iter()
        .zip(&standard_errors[1..])
        .map(|(b, se)| (b + WALD_Z * se).exp())
        .collect();

    let aic = 2.0 * k as f64 - 2.0 * ll;

    Ok(LogisticFit {
        coefficients: beta,
        standard_errors,
        odds_ratios,
        ci_low,
        ci_high,
        p_values,
        log_likelihood: ll,
        aic,
        converged,
        iterations,
        ll_trace,
        ridged,
    })
}
