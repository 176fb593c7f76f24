use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::SweepRecord;

/// Order parameter values below this count as disordered.
pub const ORDER_THRESHOLD: f64 = 1e-4;

/// Fewest points accepted in the log-log window.
const MIN_FIT_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderParameter {
    M,
    Ms,
}

impl OrderParameter {
    pub fn of(self, record: &SweepRecord) -> f64 {
        match self {
            Self::M => record.m,
            Self::Ms => record.ms,
        }
    }
}

impl FromStr for OrderParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "m" => Ok(Self::M),
            "ms" | "m_s" => Ok(Self::Ms),
            other => Err(Error::Config(format!("unknown order parameter '{other}' (expected m or ms)"))),
        }
    }
}

impl fmt::Display for OrderParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::M => "m",
            Self::Ms => "ms",
        })
    }
}

/// Range of `|λ − λ_c|` used for the exponent regression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitWindow {
    pub min: f64,
    pub max: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { min: 0.01, max: 0.1 }
    }
}

impl FitWindow {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min > 0.0 && max > min) {
            return Err(Error::Config(format!("fit window needs 0 < min < max, got [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    fn contains(&self, d: f64) -> bool {
        d >= self.min - 1e-12 && d <= self.max + 1e-12
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalFit {
    pub which: OrderParameter,
    pub lambda_c: f64,
    /// Adjacent λ values straddling the threshold.
    pub bracket: [f64; 2],
    pub beta: f64,
    pub amplitude: f64,
    pub window: FitWindow,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `y = A x^β` on log-log axes; returns `(β, A, R²)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit(format!("need at least two paired points, got {} and {}", xs.len(), ys.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Fit("power-law fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((beta, intercept.exp(), r_squared))
}

/// Locates the transition where `which` crosses [`ORDER_THRESHOLD`] and fits
/// the exponent on the ordered side.
///
/// Records flagged as not converged are ignored. With several crossings the
/// first in increasing λ is used.
pub fn fit_critical(records: &[SweepRecord], which: OrderParameter, window: FitWindow) -> Result<CriticalFit> {
    let mut pts: Vec<(f64, f64)> =
        records.iter().filter(|r| r.converged).map(|r| (r.lambda, which.of(r))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);

    let ordered = |v: f64| v >= ORDER_THRESHOLD;
    let k = pts
        .windows(2)
        .position(|w| ordered(w[0].1) != ordered(w[1].1))
        .ok_or(Error::NoTransition)?;
    let (lo, hi) = (pts[k].0, pts[k + 1].0);
    let lambda_c = 0.5 * (lo + hi);
    // ordered below the transition for a decreasing order parameter
    let ordered_below = ordered(pts[k].1);

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &(l, v) in &pts {
        let on_side = if ordered_below { l < lambda_c } else { l > lambda_c };
        let d = (l - lambda_c).abs();
        if on_side && ordered(v) && window.contains(d) {
            xs.push(d);
            ys.push(v);
        }
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "only {} ordered points with |λ − λc| in [{}, {}], need {MIN_FIT_POINTS}",
            xs.len(),
            window.min,
            window.max
        )));
    }
    let (beta, amplitude, r_squared) = fit_power_law(&xs, &ys)?;
    Ok(CriticalFit { which, lambda_c, bracket: [lo, hi], beta, amplitude, window, r_squared, points: xs.len() })
}
