use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{NelderMead, VariationalFunctional};
use crate::error::{Error, Result};
use crate::model::{AnsatzKind, DissipativeModel};

/// One-parameter family along which the norm is expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandauDirection {
    /// Uniform ansatz with in-plane length `φ`; `α_z` relaxes.
    InPlane,
    /// Bipartite ansatz with `(α_{A,z} − α_{B,z})/2 = φ`; the common
    /// z-component and the in-plane components relax.
    StaggeredZ,
}

impl FromStr for LandauDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "in-plane" | "inplane" | "m" => Ok(Self::InPlane),
            "staggered-z" | "staggered" | "ms" => Ok(Self::StaggeredZ),
            other => Err(Error::Config(format!("unknown direction '{other}' (expected in-plane or staggered-z)"))),
        }
    }
}

impl fmt::Display for LandauDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::InPlane => "in-plane",
            Self::StaggeredZ => "staggered-z",
        })
    }
}

/// `‖ρ̇‖(φ) ≈ u0 + u2 φ² + u4 φ⁴` on `[0, φ_max]`.
#[derive(Clone, Debug, Serialize)]
pub struct LandauFit {
    pub direction: LandauDirection,
    pub u0: f64,
    pub u2: f64,
    pub u4: f64,
    pub phi_grid: Vec<f64>,
    pub norms: Vec<f64>,
    /// Root-mean-square deviation of the fit from the sampled norms.
    pub residual: f64,
}

impl LandauFit {
    pub fn eval(&self, phi: f64) -> f64 {
        let p2 = phi * phi;
        self.u0 + self.u2 * p2 + self.u4 * p2 * p2
    }
}

const OUTSIDE_PENALTY: f64 = 1e3;

fn ball_excess(v: &[f64; 3]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).max(0.0)
}

/// Sublattice vectors for order parameter `phi` and relaxed coordinates `x`.
fn family(direction: LandauDirection, phi: f64, x: &[f64]) -> ([f64; 3], [f64; 3]) {
    match direction {
        LandauDirection::InPlane => {
            let a = [phi, 0.0, x[0]];
            (a, a)
        }
        LandauDirection::StaggeredZ => ([x[1], 0.0, x[0] + phi], [x[2], x[3], x[0] - phi]),
    }
}

/// Norm at fixed `phi`, minimized over the remaining ansatz parameters.
fn conditional_minimum(
    functional: &VariationalFunctional,
    direction: LandauDirection,
    phi: f64,
    warm: &[f64],
) -> (f64, Vec<f64>) {
    let objective = |x: &[f64]| {
        let (a, b) = family(direction, phi, x);
        let excess = ball_excess(&a) + ball_excess(&b);
        if excess > 0.0 {
            return OUTSIDE_PENALTY * (1.0 + excess);
        }
        functional.norm(&a, &b)
    };
    let nm = NelderMead { initial_step: 0.05, max_iter: 20_000, ..Default::default() };
    let zero = vec![0.0; warm.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in [warm, &zero] {
        let first = nm.minimize(objective, |_| {}, start);
        let out = nm.minimize(objective, |_| {}, &first.best);
        if best.as_ref().is_none_or(|b| out.value < b.0) {
            best = Some((out.value, out.best));
        }
    }
    best.expect("two starts")
}

/// Samples the norm along `direction` for `φ ∈ [0, phi_max]` and fits the
/// even quartic by least squares.
pub fn landau_expansion(
    model: &DissipativeModel,
    direction: LandauDirection,
    phi_max: f64,
    samples: usize,
) -> Result<LandauFit> {
    if samples < 5 {
        return Err(Error::Config(format!("need at least 5 samples, got {samples}")));
    }
    if !(phi_max > 0.0 && phi_max <= 1.0) {
        return Err(Error::Config(format!("phi_max must lie in (0, 1], got {phi_max}")));
    }
    let functional = VariationalFunctional::new(model);
    if direction == LandauDirection::StaggeredZ {
        functional.check_kind(AnsatzKind::Bipartite)?;
    }
    let relaxed = match direction {
        LandauDirection::InPlane => 1,
        LandauDirection::StaggeredZ => 4,
    };

    let phi_grid: Vec<f64> = (0..samples).map(|i| phi_max * i as f64 / (samples - 1) as f64).collect();
    let mut norms = Vec::with_capacity(samples);
    let mut warm = vec![0.0; relaxed];
    for &phi in &phi_grid {
        let (value, x) = conditional_minimum(&functional, direction, phi, &warm);
        norms.push(value);
        warm = x;
    }

    // scaled design matrix keeps the columns comparable
    let s = phi_max * phi_max;
    let design = DMatrix::from_fn(samples, 3, |r, c| (phi_grid[r] * phi_grid[r] / s).powi(c as i32));
    let rhs = DVector::from_vec(norms.clone());
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-10 * smax) {
        return Err(Error::Fit(format!("ill-conditioned Landau fit (singular values {smin:.3e}/{smax:.3e})")));
    }
    let coef = svd.solve(&rhs, 1e-14).map_err(|e| Error::Fit(e.to_string()))?;
    let fitted = &design * &coef;
    let residual = ((&fitted - &rhs).norm_squared() / samples as f64).sqrt();
    Ok(LandauFit { direction, u0: coef[0], u2: coef[1] / s, u4: coef[2] / (s * s), phi_grid, norms, residual })
}

/// Bisects the sign change of `u2(λ)` between `lo` and `hi`.
pub fn u2_root<F>(
    build: F,
    direction: LandauDirection,
    phi_max: f64,
    samples: usize,
    (mut lo, mut hi): (f64, f64),
    tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<DissipativeModel>,
{
    let u2 = |l: f64| -> Result<f64> { Ok(landau_expansion(&build(l)?, direction, phi_max, samples)?.u2) };
    let (mut flo, fhi) = (u2(lo)?, u2(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoTransition);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = u2(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
