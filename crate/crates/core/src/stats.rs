//! Cross-cluster independence test and count regression.
//!
//! The regression is an NB2 negative binomial GLM with log link
//! (variance μ + μ²/θ), fitted by alternating Fisher-scoring IRLS for the
//! coefficients with a Newton search for θ on the log scale.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::{digamma, ln_gamma};
use thiserror::Error;

use crate::corpus::{RateMetrics, VideoMetadata};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("contingency table has a zero margin")]
    ZeroMargin,
    #[error("need at least {need} observations, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("mean is zero")]
    ZeroMean,
    #[error("column {0:?} is constant; the design is rank deficient")]
    ConstantColumn(String),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("{0} responses for {1} design rows")]
    LengthMismatch(usize, usize),
    #[error("response {0} is not a non-negative integer count")]
    BadResponse(f64),
    #[error("{kind} labels take {levels} levels; exactly two are supported")]
    TooManyLevels { kind: &'static str, levels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(rows: [[u64; 2]; 2]) -> Self {
        Self {
            a: rows[0][0],
            b: rows[0][1],
            c: rows[1][0],
            d: rows[1][1],
        }
    }

    /// Cross-tabulates two binary labelings (values 0 and 1).
    pub fn from_labels(rows: &[usize], cols: &[usize]) -> Result<Self, StatsError> {
        if rows.len() != cols.len() {
            return Err(StatsError::LengthMismatch(rows.len(), cols.len()));
        }
        let mut t = [[0u64; 2]; 2];
        for (&r, &c) in rows.iter().zip(cols) {
            if r > 1 || c > 1 {
                return Err(StatsError::TooManyLevels {
                    kind: "cross-tab",
                    levels: r.max(c) + 1,
                });
            }
            t[r][c] += 1;
        }
        Ok(Self::new(t))
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn transpose(&self) -> Self {
        Self {
            a: self.a,
            b: self.c,
            c: self.b,
            d: self.d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub yates_applied: bool,
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_df1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        erfc((x / 2.0).sqrt())
    }
}

/// Pearson test of independence. With `yates`, each |O − E| is reduced
/// by 0.5 (never below zero).
pub fn chi_square_2x2(t: &ContingencyTable2x2, yates: bool) -> Result<ChiSquareResult, StatsError> {
    let obs = [t.a as f64, t.b as f64, t.c as f64, t.d as f64];
    let rows = [obs[0] + obs[1], obs[2] + obs[3]];
    let cols = [obs[0] + obs[2], obs[1] + obs[3]];
    if rows.iter().chain(&cols).any(|m| *m == 0.0) {
        return Err(StatsError::ZeroMargin);
    }
    let n = rows[0] + rows[1];
    let correction = if yates { 0.5 } else { 0.0 };
    let statistic: f64 = (0..4)
        .map(|i| {
            let e = rows[i / 2] * cols[i % 2] / n;
            let dev = ((obs[i] - e).abs() - correction).max(0.0);
            dev * dev / e
        })
        .sum();
    Ok(ChiSquareResult {
        statistic,
        df: 1,
        p_value: chi2_df1_sf(statistic).clamp(0.0, 1.0),
        yates_applied: yates,
    })
}

/// Sample variance over mean; above 1 indicates overdispersion.
pub fn dispersion_check(y: &[f64]) -> Result<f64, StatsError> {
    if y.len() < 2 {
        return Err(StatsError::TooFew {
            need: 2,
            got: y.len(),
        });
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(StatsError::ZeroMean);
    }
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var / mean)
}

/// Regression design with named columns; the first is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn intercept_only(n: usize) -> Self {
        Self {
            names: vec!["(Intercept)".into()],
            rows: vec![vec![1.0]; n],
        }
    }

    /// Intercept plus the given predictor columns.
    pub fn with_columns(columns: &[(&str, &[f64])]) -> Self {
        let n = columns.first().map_or(0, |c| c.1.len());
        let mut names = vec!["(Intercept)".to_string()];
        names.extend(columns.iter().map(|c| c.0.to_string()));
        let rows = (0..n)
            .map(|i| {
                std::iter::once(1.0)
                    .chain(columns.iter().map(|c| c.1[i]))
                    .collect()
            })
            .collect();
        Self { names, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.names.len()
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| self.rows[i][j])
    }
}

/// Indicator coding of two binary cluster labelings plus their product.
/// The indicator is 1 for the non-reference level.
pub fn build_design<L: PartialEq + Clone + fmt::Debug>(
    standard: &[L],
    slang: &[L],
    reference_standard: &L,
    reference_slang: &L,
) -> Result<DesignMatrix, StatsError> {
    if standard.len() != slang.len() {
        return Err(StatsError::LengthMismatch(standard.len(), slang.len()));
    }
    fn indicator<L: PartialEq + Clone>(
        labels: &[L],
        reference: &L,
        kind: &'static str,
    ) -> Result<Vec<f64>, StatsError> {
        let mut levels: Vec<&L> = vec![reference];
        for l in labels {
            if !levels.contains(&l) {
                levels.push(l);
            }
        }
        if levels.len() > 2 {
            return Err(StatsError::TooManyLevels {
                kind,
                levels: levels.len(),
            });
        }
        Ok(labels
            .iter()
            .map(|l| if l == reference { 0.0 } else { 1.0 })
            .collect())
    }
    let s = indicator(standard, reference_standard, "standard")?;
    let g = indicator(slang, reference_slang, "slang")?;
    let inter: Vec<f64> = s.iter().zip(&g).map(|(a, b)| a * b).collect();
    Ok(DesignMatrix::with_columns(&[
        ("standard", &s),
        ("slang", &g),
        ("standard:slang", &inter),
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Response {
    Views,
    Engagement,
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Views => "views",
            Self::Engagement => "engagement",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseMode {
    /// Per-100-day rate rounded half up to a count.
    Rounded,
    /// Raw count with log(days_active / 100) as offset.
    Offset,
}

pub fn response_from_rates(r: &RateMetrics, which: Response) -> u64 {
    let v = match which {
        Response::Views => r.views_per_100d,
        Response::Engagement => r.engagement,
    };
    (v + 0.5).floor() as u64
}

/// Raw count and exposure offset for the offset formulation.
pub fn offset_response(m: &VideoMetadata, which: Response) -> (u64, f64) {
    let count = match which {
        Response::Views => m.views,
        Response::Engagement => m.likes + m.dislikes + m.comments,
    };
    (count, (m.days_active / 100.0).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbConfig {
    pub max_outer: usize,
    pub tol: f64,
    pub theta_bounds: (f64, f64),
}

impl Default for NbConfig {
    fn default() -> Self {
        Self {
            max_outer: 100,
            tol: 1e-8,
            theta_bounds: (1e-4, 1e6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NbFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub theta: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood after each outer iteration.
    pub loglik_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    /// exp(β)
    pub rate_ratio: f64,
    /// 1 / exp(β)
    pub inverse_rate_ratio: f64,
}

impl NbFit {
    /// Estimates on the log scale with Wald z tests and rate ratios.
    pub fn coefficient_table(&self) -> Vec<CoefficientRow> {
        self.names
            .iter()
            .zip(&self.coefficients)
            .zip(&self.std_errors)
            .map(|((name, &b), &se)| {
                let z = b / se;
                CoefficientRow {
                    name: name.clone(),
                    estimate: b,
                    std_error: se,
                    z,
                    p: erfc(z.abs() / std::f64::consts::SQRT_2),
                    rate_ratio: b.exp(),
                    inverse_rate_ratio: inverse_rate_ratio(b),
                }
            })
            .collect()
    }
}

pub fn rate_ratio(beta: f64) -> f64 {
    beta.exp()
}

/// 1 / exp(β): the factor by which the reference level exceeds the other.
pub fn inverse_rate_ratio(beta: f64) -> f64 {
    1.0 / beta.exp()
}

pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x
        + x2 / 2.0
        + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

fn nb_loglik(y: &[f64], mu: &[f64], theta: f64) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            let mut l = ln_gamma(y + theta) - ln_gamma(theta) - ln_gamma(y + 1.0)
                + theta * (theta / (theta + m)).ln();
            if y > 0.0 {
                l += y * (m / (theta + m)).ln();
            }
            l
        })
        .sum()
}

fn poisson_loglik(y: &[f64], mu: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| y * m.ln() - m - ln_gamma(y + 1.0))
        .sum()
}

struct Problem<'a> {
    y: &'a [f64],
    x: DMatrix<f64>,
    offset: Vec<f64>,
}

impl Problem<'_> {
    fn mu(&self, beta: &DVector<f64>) -> Vec<f64> {
        let eta = &self.x * beta;
        eta.iter()
            .zip(&self.offset)
            .map(|(e, o)| (e + o).clamp(-700.0, 700.0).exp())
            .collect()
    }

    /// Weighted least squares step from working weights `w` and response `z`.
    fn wls(&self, w: &[f64], z: &[f64]) -> Result<DVector<f64>, StatsError> {
        let p = self.x.ncols();
        let mut xtwx = DMatrix::zeros(p, p);
        let mut xtwz = DVector::zeros(p);
        for i in 0..self.x.nrows() {
            let row = self.x.row(i);
            for a in 0..p {
                let wa = w[i] * row[a];
                xtwz[a] += wa * z[i];
                for b in 0..p {
                    xtwx[(a, b)] += wa * row[b];
                }
            }
        }
        xtwx.cholesky()
            .map(|c| c.solve(&xtwz))
            .ok_or(StatsError::RankDeficient)
    }

    /// Fisher-scoring IRLS for β at fixed θ (θ = ∞ gives Poisson), with
    /// step halving so the likelihood never drops.
    fn irls(&self, beta: &mut DVector<f64>, theta: Option<f64>) -> Result<f64, StatsError> {
        let ll = |mu: &[f64]| match theta {
            Some(t) => nb_loglik(self.y, mu, t),
            None => poisson_loglik(self.y, mu),
        };
        let mut mu = self.mu(beta);
        let mut cur = ll(&mu);
        for _ in 0..100 {
            let eta: Vec<f64> = mu
                .iter()
                .zip(&self.offset)
                .map(|(m, o)| m.ln() - o)
                .collect();
            let w: Vec<f64> = mu
                .iter()
                .map(|&m| match theta {
                    Some(t) => m / (1.0 + m / t),
                    None => m,
                })
                .collect();
            let z: Vec<f64> = (0..mu.len())
                .map(|i| eta[i] + (self.y[i] - mu[i]) / mu[i])
                .collect();
            let target = self.wls(&w, &z)?;
            let mut step = &target - &*beta;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = &*beta + &step;
                let cmu = self.mu(&cand);
                let cll = ll(&cmu);
                if cll.is_finite() && cll >= cur - 1e-12 * cur.abs().max(1.0) {
                    let delta = step.amax();
                    *beta = cand;
                    mu = cmu;
                    cur = cll.max(cur);
                    accepted = true;
                    if delta < 1e-12 {
                        return Ok(cur);
                    }
                    break;
                }
                step /= 2.0;
            }
            if !accepted {
                break;
            }
        }
        Ok(cur)
    }
}

fn theta_score(y: &[f64], mu: &[f64], theta: f64) -> (f64, f64) {
    let mut g = 0.0;
    let mut h = 0.0;
    for (&y, &m) in y.iter().zip(mu) {
        let tm = theta + m;
        g += digamma(y + theta) - digamma(theta) + theta.ln() + 1.0 - tm.ln() - (y + theta) / tm;
        h += trigamma(y + theta) - trigamma(theta) + 1.0 / theta - 2.0 / tm
            + (y + theta) / (tm * tm);
    }
    (g, h)
}

/// Maximises the NB likelihood in θ at fixed μ, working on log θ.
fn update_theta(y: &[f64], mu: &[f64], theta: f64, bounds: (f64, f64)) -> f64 {
    let (lo, hi) = (bounds.0.ln(), bounds.1.ln());
    let mut s = theta.ln().clamp(lo, hi);
    let mut cur = nb_loglik(y, mu, s.exp());
    for _ in 0..50 {
        let t = s.exp();
        let (g, h) = theta_score(y, mu, t);
        let gs = t * g;
        let hs = t * t * h + t * g;
        let mut step = if hs < 0.0 {
            -gs / hs
        } else {
            gs.signum() * 1.0
        };
        step = step.clamp(-5.0, 5.0);
        let mut moved = false;
        for _ in 0..40 {
            let cand = (s + step).clamp(lo, hi);
            let cll = nb_loglik(y, mu, cand.exp());
            if cll.is_finite() && cll >= cur {
                moved = (cand - s).abs() > 0.0;
                let done = (cand - s).abs() < 1e-12;
                s = cand;
                cur = cll;
                if done {
                    return s.exp();
                }
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    s.exp()
}

fn check_inputs(y: &[f64], x: &DesignMatrix, offset: Option<&[f64]>) -> Result<(), StatsError> {
    if y.len() != x.nrows() {
        return Err(StatsError::LengthMismatch(y.len(), x.nrows()));
    }
    if let Some(o) = offset {
        if o.len() != y.len() {
            return Err(StatsError::LengthMismatch(o.len(), y.len()));
        }
    }
    if y.len() < x.ncols() + 1 {
        return Err(StatsError::TooFew {
            need: x.ncols() + 1,
            got: y.len(),
        });
    }
    if let Some(&bad) = y
        .iter()
        .find(|v| !(v.is_finite() && **v >= 0.0 && v.fract() == 0.0))
    {
        return Err(StatsError::BadResponse(bad));
    }
    for (j, name) in x.names.iter().enumerate().skip(1) {
        let first = x.rows[0][j];
        if x.rows.iter().all(|r| r[j] == first) {
            return Err(StatsError::ConstantColumn(name.clone()));
        }
    }
    let m = x.to_matrix();
    if (m.transpose() * &m).cholesky().is_none() {
        return Err(StatsError::RankDeficient);
    }
    Ok(())
}

fn initial_beta(prob: &Problem) -> Result<DVector<f64>, StatsError> {
    let z: Vec<f64> = prob
        .y
        .iter()
        .zip(&prob.offset)
        .map(|(y, o)| (y + 0.1).ln() - o)
        .collect();
    let w: Vec<f64> = prob.y.iter().map(|y| y + 0.1).collect();
    prob.wls(&w, &z)
}

/// Poisson GLM with log link, by IRLS.
pub fn poisson_regression(
    y: &[f64],
    x: &DesignMatrix,
    offset: Option<&[f64]>,
) -> Result<(Vec<f64>, f64), StatsError> {
    check_inputs(y, x, offset)?;
    let prob = Problem {
        y,
        x: x.to_matrix(),
        offset: offset.map_or_else(|| vec![0.0; y.len()], <[f64]>::to_vec),
    };
    let mut beta = initial_beta(&prob)?;
    let ll = prob.irls(&mut beta, None)?;
    Ok((beta.iter().copied().collect(), ll))
}

/// NB2 regression of counts `y` on `x`, optionally with a log-exposure offset.
///
/// Standard errors come from the observed information for β at the
/// optimum. A fit that does not meet the tolerance within `max_outer`
/// iterations is returned with `converged = false`.
pub fn nb_regression(
    y: &[f64],
    x: &DesignMatrix,
    offset: Option<&[f64]>,
    cfg: &NbConfig,
) -> Result<NbFit, StatsError> {
    check_inputs(y, x, offset)?;
    let prob = Problem {
        y,
        x: x.to_matrix(),
        offset: offset.map_or_else(|| vec![0.0; y.len()], <[f64]>::to_vec),
    };

    let mut beta = initial_beta(&prob)?;
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let s2 = y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>() / (n - 1.0);
    let mut theta =
        (ybar * ybar / (s2 - ybar).max(1e-6)).clamp(cfg.theta_bounds.0, cfg.theta_bounds.1);

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_outer {
        iterations += 1;
        let prev_beta = beta.clone();
        let prev_theta = theta;
        prob.irls(&mut beta, Some(theta))?;
        let mu = prob.mu(&beta);
        theta = update_theta(y, &mu, theta, cfg.theta_bounds);
        trace.push(nb_loglik(y, &mu, theta));
        let db = (&beta - &prev_beta).amax();
        let dt = (theta.ln() - prev_theta.ln()).abs();
        if db < cfg.tol && dt < cfg.tol {
            converged = true;
            break;
        }
    }

    let mu = prob.mu(&beta);
    let p = x.ncols();
    let mut info = DMatrix::zeros(p, p);
    for i in 0..y.len() {
        let w = theta * mu[i] * (theta + y[i]) / (theta + mu[i]).powi(2);
        let row = prob.x.row(i);
        for a in 0..p {
            for b in 0..p {
                info[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    let std_errors = match info.cholesky() {
        Some(c) => c
            .inverse()
            .diagonal()
            .iter()
            .map(|v: &f64| v.sqrt())
            .collect(),
        None => vec![f64::NAN; p],
    };

    Ok(NbFit {
        names: x.names.clone(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        theta,
        log_likelihood: nb_loglik(y, &mu, theta),
        converged,
        iterations,
        loglik_trace: trace,
    })
}
