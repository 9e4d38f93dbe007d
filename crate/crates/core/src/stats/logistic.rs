//! Single-feature logistic regression fitted by Newton-Raphson (IRLS).

use std::io::{self, BufRead, Write};

use statrs::function::erf::erfc;
use thiserror::Error;

use crate::features::{Feature, LabeledExample};

const MAX_ITERATIONS: usize = 100;
const LOGLIK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Converged,
    /// The classes are (quasi-)separated by the feature. The coefficients
    /// drift toward infinity; the model still ranks correctly.
    Separated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficient: f64,
    /// Standard error of the coefficient.
    pub std_error: f64,
    pub intercept_std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub status: FitStatus,
    pub iterations: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 2 examples, found {0}")]
    TooFewExamples(usize),
    #[error("both classes must be present")]
    SingleClass,
    #[error("feature values must be finite")]
    NonFinite,
    #[error("no convergence after {0} iterations")]
    NotConverged(usize),
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood of `labels` under `intercept + coefficient·x`.
pub fn log_likelihood(intercept: f64, coefficient: f64, xs: &[f64], labels: &[bool]) -> f64 {
    xs.iter()
        .zip(labels)
        .map(|(&x, &y)| {
            let eta = intercept + coefficient * x;
            if y {
                -softplus(-eta)
            } else {
                -softplus(eta)
            }
        })
        .sum()
}

/// Analytic gradient of [`log_likelihood`] with respect to (intercept, coefficient).
pub fn gradient(intercept: f64, coefficient: f64, xs: &[f64], labels: &[bool]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (&x, &y) in xs.iter().zip(labels) {
        let r = f64::from(u8::from(y)) - sigmoid(intercept + coefficient * x);
        g[0] += r;
        g[1] += r * x;
    }
    g
}

/// Fisher information (= observed information for the logit link).
fn information(intercept: f64, coefficient: f64, xs: &[f64]) -> [f64; 3] {
    let mut info = [0.0; 3];
    for &x in xs {
        let p = sigmoid(intercept + coefficient * x);
        let w = p * (1.0 - p);
        info[0] += w;
        info[1] += w * x;
        info[2] += w * x * x;
    }
    info
}

fn is_separated(xs: &[f64], labels: &[bool]) -> bool {
    let mut pos = (f64::INFINITY, f64::NEG_INFINITY);
    let mut neg = (f64::INFINITY, f64::NEG_INFINITY);
    for (&x, &y) in xs.iter().zip(labels) {
        let r = if y { &mut pos } else { &mut neg };
        r.0 = r.0.min(x);
        r.1 = r.1.max(x);
    }
    neg.1 <= pos.0 || pos.1 <= neg.0
}

/// Maximum-likelihood fit of `label ~ intercept + coefficient·x`.
///
/// Features are centered and scaled internally; returned coefficients and
/// standard errors are on the original scale.
pub fn fit(xs: &[f64], labels: &[bool]) -> Result<LogisticModel, FitError> {
    assert_eq!(xs.len(), labels.len());
    let n = xs.len();
    if n < 2 {
        return Err(FitError::TooFewExamples(n));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == n {
        return Err(FitError::SingleClass);
    }
    let base = positives as f64 / n as f64;
    let base_logit = (base / (1.0 - base)).ln();

    let mean = xs.iter().sum::<f64>() / n as f64;
    let scale = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if scale == 0.0 || !scale.is_finite() {
        return Ok(LogisticModel {
            intercept: base_logit,
            coefficient: 0.0,
            std_error: f64::INFINITY,
            intercept_std_error: f64::INFINITY,
            z: 0.0,
            p_value: 1.0,
            status: FitStatus::Converged,
            iterations: 0,
        });
    }
    let zs: Vec<f64> = xs.iter().map(|x| (x - mean) / scale).collect();
    let separated = is_separated(xs, labels);

    let mut b = [base_logit, 0.0];
    let mut ll = log_likelihood(b[0], b[1], &zs, labels);
    let mut converged = false;
    let mut polish = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = gradient(b[0], b[1], &zs, labels);
        let info = information(b[0], b[1], &zs);
        let det = info[0] * info[2] - info[1] * info[1];
        if !(det > 0.0) || !det.is_finite() {
            break;
        }
        let step = [
            (info[2] * g[0] - info[1] * g[1]) / det,
            (info[0] * g[1] - info[1] * g[0]) / det,
        ];
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = [b[0] + t * step[0], b[1] + t * step[1]];
            let cand_ll = log_likelihood(cand[0], cand[1], &zs, labels);
            if cand_ll.is_finite() && cand_ll >= ll - 1e-12 * ll.abs() {
                accepted = Some((cand, cand_ll));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cand_ll)) = accepted else {
            converged = true;
            break;
        };
        let improvement = cand_ll - ll;
        b = cand;
        ll = cand_ll;
        if polish {
            converged = true;
            break;
        }
        if improvement < LOGLIK_TOLERANCE {
            // One more Newton step drives the gradient to rounding level.
            polish = true;
        }
    }

    if !converged && !separated {
        return Err(FitError::NotConverged(iterations));
    }

    let info = information(b[0], b[1], &zs);
    let det = info[0] * info[2] - info[1] * info[1];
    // Inverse information on the scaled axis, then mapped back through
    // intercept = b0 - b1·mean/scale.
    let (var0, var1, cov) = if det > 0.0 {
        (info[2] / det, info[0] / det, -info[1] / det)
    } else {
        (f64::INFINITY, f64::INFINITY, 0.0)
    };
    let coefficient = b[1] / scale;
    let intercept = b[0] - b[1] * mean / scale;
    let std_error = var1.sqrt() / scale;
    let shift = mean / scale;
    let intercept_std_error = (var0 + shift * shift * var1 - 2.0 * shift * cov).max(0.0).sqrt();
    let z = if std_error.is_finite() && std_error > 0.0 {
        coefficient.abs() / std_error
    } else {
        0.0
    };
    Ok(LogisticModel {
        intercept,
        coefficient,
        std_error,
        intercept_std_error,
        z,
        p_value: erfc(z / std::f64::consts::SQRT_2),
        status: if separated { FitStatus::Separated } else { FitStatus::Converged },
        iterations,
    })
}

/// Fit one feature column of labeled examples.
pub fn fit_logistic(examples: &[LabeledExample], feature: Feature) -> Result<LogisticModel, FitError> {
    let xs: Vec<f64> = examples.iter().map(|e| e.features.get(feature)).collect();
    let ys: Vec<bool> = examples.iter().map(|e| e.friend).collect();
    fit(&xs, &ys)
}

impl LogisticModel {
    /// Linear predictor; monotone in the probability.
    pub fn score(&self, x: f64) -> f64 {
        self.intercept + self.coefficient * x
    }

    pub fn probability(&self, x: f64) -> f64 {
        sigmoid(self.score(x))
    }

    pub fn write<W: Write>(&self, mut w: W, feature: Feature) -> io::Result<()> {
        writeln!(w, "latent-ties logistic v1")?;
        writeln!(w, "feature\t{feature}")?;
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.intercept, self.coefficient, self.std_error, self.intercept_std_error, self.z, self.p_value
        )
    }

    pub fn read<R: BufRead>(reader: R) -> io::Result<(Feature, LogisticModel)> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let lines: Vec<String> = reader.lines().collect::<io::Result<_>>()?;
        if lines.first().map(String::as_str) != Some("latent-ties logistic v1") {
            return Err(bad("not a logistic model file"));
        }
        let feature = lines
            .get(1)
            .and_then(|l| l.strip_prefix("feature\t"))
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| bad("missing feature line"))?;
        let nums: Vec<f64> = lines
            .get(2)
            .ok_or_else(|| bad("missing coefficients"))?
            .split('\t')
            .map(|v| v.parse().map_err(|_| bad("bad number")))
            .collect::<io::Result<_>>()?;
        if nums.len() != 6 {
            return Err(bad("expected 6 numbers"));
        }
        Ok((
            feature,
            LogisticModel {
                intercept: nums[0],
                coefficient: nums[1],
                std_error: nums[2],
                intercept_std_error: nums[3],
                z: nums[4],
                p_value: nums[5],
                status: FitStatus::Converged,
                iterations: 0,
            },
        ))
    }
}
