//! Independent reference values: closed-form free-boson correlators, direct
//! mode resummation of a field chain, and two-point exponent fits.

use num::complex::Complex64;
use serde::Serialize;

use crate::bounds::{linear_fit, LinearFit};
use crate::error::{Error, Result};
use crate::field::PrimaryFieldModes;
use crate::regularize::LevelVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    ClosedForm,
    ModeResummation,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub value: Complex64,
    pub method: OracleMethod,
    /// Highest intermediate level summed over.
    pub truncation: Option<usize>,
    pub tail_estimate: Option<f64>,
}

/// Π_{i<j} (z_i − z_j)^{α_i α_j} for a neutral charge configuration, zero
/// otherwise. Fractional powers use the principal branch.
pub fn free_boson_n_point(charges: &[f64], points: &[Complex64]) -> Result<Complex64> {
    if charges.len() != points.len() {
        return Err(Error::ShapeMismatch(format!("{} charges at {} points", charges.len(), points.len())));
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() == 0.0 {
                return Err(Error::InvalidParameter(format!("points {i} and {j} coincide")));
            }
        }
    }
    if charges.iter().sum::<f64>().abs() > 1e-12 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            acc *= (points[i] - points[j]).powf(charges[i] * charges[j]);
        }
    }
    Ok(acc)
}

/// The same correlator on the mapped grid θ_j = e^{−d_0} q^j, where every
/// separation is a positive real.
pub fn free_boson_on_grid(charges: &[f64], d: f64, d0: f64) -> Result<f64> {
    let pts: Vec<f64> = (1..=charges.len()).map(|j| (-(d0 + j as f64 * d)).exp()).collect();
    if pts.windows(2).any(|w| !(w[0] - w[1] > 0.0)) {
        return Err(Error::InvalidParameter("mapped separations must be positive".into()));
    }
    let z: Vec<Complex64> = pts.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let v = free_boson_n_point(charges, &z)?;
    debug_assert!(v.im.abs() <= 1e-12 * v.re.abs().max(1e-300));
    Ok(v.re)
}

/// One factor of a resummed chain: the field blocks, the component used
/// and the insertion point.
pub struct ChainFactor<'a> {
    pub modes: &'a PrimaryFieldModes,
    pub component: usize,
    pub point: f64,
}

fn chain_value(factors: &[ChainFactor<'_>], left: usize, right: usize, max_level: usize) -> Result<f64> {
    let n = factors.len();
    let last = &factors[n - 1];
    let mut x: LevelVector = vec![nalgebra::DVector::zeros(last.modes.source_dims[0])];
    x[0][right] = 1.0;
    for (j, f) in factors.iter().enumerate().rev() {
        let top = if j == 0 { 0 } else { max_level };
        let mut y: LevelVector = (0..=top).map(|t| nalgebra::DVector::zeros(f.modes.target_dims[t])).collect();
        for (s, xs) in x.iter().enumerate() {
            for (t, yt) in y.iter_mut().enumerate() {
                let b = f.modes.block(f.component, t, s)?;
                let zpow = f.point.powf(t as f64 - s as f64 - f.modes.h_phi);
                yt.gemv(zpow, b, xs, 1.0);
            }
        }
        x = y;
    }
    Ok(x[0][left])
}

/// ⟨v_0|φ_1(z_1) ⋯ φ_n(z_n)|v_n⟩ summed over intermediate levels ≤ R.
/// The tail estimate is the level-R contribution continued geometrically
/// with the largest ratio z_{j+1}/z_j.
pub fn mode_resummation(factors: &[ChainFactor<'_>], left: usize, right: usize, r: usize) -> Result<OracleResult> {
    if factors.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    for f in factors {
        if f.modes.window.target_max < r || f.modes.window.source_max < r || f.modes.window.band.is_some() {
            return Err(Error::CutoffExceeded {
                requested: r,
                cutoff: f.modes.window.target_max.min(f.modes.window.source_max),
            });
        }
    }
    if factors.iter().any(|f| f.modes.structural_zero) {
        return Ok(OracleResult {
            value: Complex64::new(0.0, 0.0),
            method: OracleMethod::ModeResummation,
            truncation: Some(r),
            tail_estimate: Some(0.0),
        });
    }
    let v = chain_value(factors, left, right, r)?;
    let tail = if r == 0 || factors.len() == 1 {
        0.0
    } else {
        let prev = chain_value(factors, left, right, r - 1)?;
        let ratio = factors.windows(2).map(|w| w[1].point / w[0].point).fold(0.0, f64::max);
        (v - prev).abs() * ratio / (1.0 - ratio)
    };
    Ok(OracleResult {
        value: Complex64::new(v, 0.0),
        method: OracleMethod::ModeResummation,
        truncation: Some(r),
        tail_estimate: Some(tail),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoPointSample {
    pub spacing: f64,
    pub value: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub two_h: f64,
    pub stderr: f64,
    pub fit: LinearFit,
}

/// Fits ln|F| against ln(q − q²), q = e^{−d}; the slope is −2h.
pub fn two_point_exponent_fit(samples: &[TwoPointSample]) -> Result<ExponentFit> {
    if samples.len() < 5 {
        return Err(Error::InvalidParameter("exponent fit needs at least 5 spacings".into()));
    }
    if let Some(s) = samples.iter().find(|s| !s.converged) {
        return Err(Error::InvalidParameter(format!("value at spacing {} is not converged", s.spacing)));
    }
    let x: Vec<f64> = samples
        .iter()
        .map(|s| {
            let q = (-s.spacing).exp();
            (q - q * q).ln()
        })
        .collect();
    let y: Vec<f64> = samples.iter().map(|s| s.value.abs().ln()).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(ExponentFit {
        two_h: -fit.slope,
        stderr: fit.slope_stderr,
        fit,
    })
}
