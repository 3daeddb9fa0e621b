use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFew(usize),
    #[error("lengths differ: {0} levels, {1} values")]
    Length(usize, usize),
    #[error("non-positive value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },
}

/// Least-squares fit of `log d = exponent · log m + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log–log fit.
    pub residual: f64,
    /// Standard error of the exponent (zero for an exact fit or 2 points).
    pub std_error: f64,
}

impl RateFit {
    /// `e^{intercept}`, the constant in `d ≈ C m^{exponent}`.
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }
}

pub fn fit_rate(ms: &[f64], distances: &[f64]) -> Result<RateFit, FitError> {
    if ms.len() != distances.len() {
        return Err(FitError::Length(ms.len(), distances.len()));
    }
    if ms.len() < 3 {
        return Err(FitError::TooFew(ms.len()));
    }
    for (index, &value) in ms.iter().chain(distances).enumerate() {
        if !(value > 0.0) {
            return Err(FitError::NonPositive { index: index % ms.len(), value });
        }
    }
    let x: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let y: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = x.iter().zip(&y).map(|(xi, yi)| (yi - intercept - exponent * xi).powi(2)).sum();
    let std_error = if x.len() > 2 { (ss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateFit { exponent, intercept, residual: (ss / n).sqrt(), std_error })
}
