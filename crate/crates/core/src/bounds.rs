//! Multipartition counting, the Siegel-type bound, the bond-dimension bound
//! and the inversion of the error bound into bond-dimension scaling laws.

use std::f64::consts::PI;

use num::bigint::BigUint;
use num::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regularize::{error_bound_chain, error_bound_single};

/// p(m, d) for m ≤ m_max, d ≤ d_max from Π_k (1 − x^k)^{−d}.
#[derive(Clone, Debug)]
pub struct PartitionTable {
    m_max: usize,
    /// `columns[d][m]`
    columns: Vec<Vec<BigUint>>,
}

impl PartitionTable {
    pub fn new(m_max: usize, d_max: usize) -> Self {
        let mut columns = Vec::with_capacity(d_max + 1);
        let mut unit = vec![BigUint::zero(); m_max + 1];
        unit[0] = BigUint::one();
        columns.push(unit);
        if d_max >= 1 {
            let mut p = vec![BigUint::zero(); m_max + 1];
            p[0] = BigUint::one();
            for part in 1..=m_max {
                for m in part..=m_max {
                    let add = p[m - part].clone();
                    p[m] += add;
                }
            }
            columns.push(p);
        }
        for _ in 2..=d_max {
            let next = convolve(columns.last().unwrap(), &columns[1], m_max);
            columns.push(next);
        }
        Self { m_max, columns }
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn d_max(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn get(&self, m: usize, d: usize) -> Option<&BigUint> {
        self.columns.get(d).and_then(|c| c.get(m))
    }

    pub fn column(&self, d: usize) -> Option<&[BigUint]> {
        self.columns.get(d).map(|c| c.as_slice())
    }
}

fn convolve(a: &[BigUint], b: &[BigUint], m_max: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); m_max + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(m_max + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Number of d-component multipartitions of m.
pub fn multipartition_count(m: usize, d: usize) -> BigUint {
    PartitionTable::new(m, d).get(m, d).cloned().unwrap_or_default()
}

/// log of the Siegel-type bound, 2π√(d m / 6).
pub fn log_siegel_bound(m: usize, d: usize) -> f64 {
    2.0 * PI * ((d * m) as f64 / 6.0).sqrt()
}

/// exp(2π√(d m / 6)).
pub fn siegel_bound(m: usize, d: usize) -> f64 {
    log_siegel_bound(m, d).exp()
}

/// Natural log of a big integer, accurate far beyond f64 range.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct BondDimBound {
    /// Natural log of the bound (finite even where the value overflows).
    pub log_value: f64,
    pub value: f64,
    /// Set for N = 0, where the closed form vanishes and 1 is reported.
    pub degenerate: bool,
}

/// dim_g · n · N · exp(2π√(n N dim_g / 6)), evaluated in the log domain.
pub fn bond_dim_bound(n: usize, trunc: usize, dim_g: usize) -> BondDimBound {
    if n == 0 || trunc == 0 || dim_g == 0 {
        return BondDimBound {
            log_value: 0.0,
            value: 1.0,
            degenerate: true,
        };
    }
    let nn = (n * trunc) as f64;
    let log_value = ((dim_g as f64) * nn).ln() + 2.0 * PI * (nn * dim_g as f64 / 6.0).sqrt();
    BondDimBound {
        log_value,
        value: log_value.exp(),
        degenerate: false,
    }
}

/// Σ_{m ≤ reach} p(m, dim_g) · irrep_dim: the raw-state count that bounds
/// the dimension of the weight-≤-reach subspace.
pub fn raw_state_count(reach: usize, dim_g: usize, irrep_dim: usize) -> BigUint {
    let t = PartitionTable::new(reach, dim_g);
    let col = t.column(dim_g).unwrap();
    col.iter().fold(BigUint::zero(), |a, x| a + x) * BigUint::from(irrep_dim)
}

/// Ordinary least squares y ≈ slope·x + intercept with standard errors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub residual_rms: f64,
    pub points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidParameter("linear fit needs ≥ 2 paired points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("linear fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = if n > 2 { ss / (nf - 2.0) } else { 0.0 };
    let slope_stderr = (s2 / sxx).sqrt();
    let intercept_stderr = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        residual_rms: (ss / nf).sqrt(),
        points: n,
    })
}

/// Norm data entering the inversion of the chain bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormInputs {
    /// b̂(√q), before the safety factor.
    pub b_sqrt_q: f64,
    /// max(‖W_q‖, ‖W_q^N‖) estimate used for the spectator operators.
    pub b_q: f64,
    pub safety: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub n: usize,
    pub truncation: usize,
    pub log_chain_bound: f64,
    pub log_bond_bound: f64,
    pub actual_bond_dim: Option<u128>,
}

/// Empirical scaling model; κ and γ(ε) are fitted stand-ins for the
/// unspecified constants of the scaling laws.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingModel {
    pub n: usize,
    pub d: f64,
    pub dim_g: usize,
    pub rows: Vec<ScalingRow>,
    /// N_min against ln(1/ε); slope ≈ 4/d.
    pub truncation_fit: LinearFit,
    /// ln D_bound against ln(1/ε); slope = κ C_V n / d.
    pub log_bond_fit: LinearFit,
    pub kappa: f64,
    /// ln D_actual against ln(1/ε) where actual dimensions are available.
    pub actual_bond_fit: Option<LinearFit>,
}

/// ln of the chain bound n ε_1(N) b^{n−1} for n identical regularized
/// fields at q = e^{−d}; logs keep large n finite.
pub fn identical_chain_log_bound(q: f64, n: usize, trunc: usize, norms: &NormInputs) -> f64 {
    let eps = error_bound_single(q, trunc, norms.safety * norms.b_sqrt_q);
    (n as f64).ln() + eps.ln() + (n as f64 - 1.0) * norms.b_q.ln()
}

/// Chain bound for n identical regularized fields at q = e^{−d}.
pub fn identical_chain_bound(q: f64, n: usize, trunc: usize, norms: &NormInputs) -> f64 {
    let eps = error_bound_single(q, trunc, norms.safety * norms.b_sqrt_q);
    error_bound_chain(&vec![eps; n], &vec![norms.b_q; n])
}

/// Smallest N with chain bound ≤ ε. Errors if the bound ever increases in N.
pub fn minimal_truncation(q: f64, n: usize, eps: f64, norms: &NormInputs) -> Result<usize> {
    let target = eps.ln();
    let mut prev = f64::INFINITY;
    for trunc in 0..1_000_000 {
        let b = identical_chain_log_bound(q, n, trunc, norms);
        if b > prev {
            return Err(Error::InvalidParameter(format!("chain bound increased at N = {trunc}")));
        }
        if b <= target {
            return Ok(trunc);
        }
        prev = b;
    }
    Err(Error::NonConvergence {
        iterations: 1_000_000,
        last_change: prev,
    })
}

/// Inverts the chain bound over ε at fixed (n, d); `d` is the exponent of
/// the regularization parameter q = e^{−d}. `actual_dims(L)` may supply the
/// cumulative graded dimension Σ_{m ≤ L} d_m.
pub fn invert_bounds_to_scaling(
    eps: &[f64],
    n: usize,
    d: f64,
    dim_g: usize,
    norms: &NormInputs,
    actual_dims: Option<&dyn Fn(usize) -> Option<u128>>,
) -> Result<ScalingModel> {
    if eps.len() < 2 {
        return Err(Error::InvalidParameter("need at least two ε targets".into()));
    }
    let (lo, hi) = eps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    if !(lo > 0.0) || hi / lo < 100.0 {
        return Err(Error::InvalidParameter("ε targets must be positive and span ≥ 2 decades".into()));
    }
    let q = (-d).exp();
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        let trunc = minimal_truncation(q, n, e, norms)?;
        rows.push(ScalingRow {
            eps: e,
            n,
            truncation: trunc,
            log_chain_bound: identical_chain_log_bound(q, n, trunc, norms),
            log_bond_bound: bond_dim_bound(n, trunc, dim_g).log_value,
            actual_bond_dim: actual_dims.and_then(|f| f(n * trunc)),
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| (1.0 / r.eps).ln()).collect();
    let truncation_fit = linear_fit(&x, &rows.iter().map(|r| r.truncation as f64).collect::<Vec<_>>())?;
    let log_bond_fit = linear_fit(&x, &rows.iter().map(|r| r.log_bond_bound).collect::<Vec<_>>())?;
    let kappa = log_bond_fit.slope * d / (dim_g as f64 * n as f64);
    let actual: Vec<(f64, f64)> = rows
        .iter()
        .zip(&x)
        .filter_map(|(r, &xi)| r.actual_bond_dim.map(|a| (xi, (a as f64).ln())))
        .collect();
    let actual_bond_fit = if actual.len() >= 2 {
        let (ax, ay): (Vec<f64>, Vec<f64>) = actual.into_iter().unzip();
        linear_fit(&ax, &ay).ok()
    } else {
        None
    };
    Ok(ScalingModel {
        n,
        d,
        dim_g,
        rows,
        truncation_fit,
        log_bond_fit,
        kappa,
        actual_bond_fit,
    })
}

/// Fixed-ε regime: for each n, the minimal N and ln D_bound; the fit of
/// ln D_bound against √(nN) has slope → 2π√(dim_g/6).
pub fn fixed_eps_scaling(eps: f64, ns: &[usize], d: f64, dim_g: usize, norms: &NormInputs) -> Result<(Vec<ScalingRow>, LinearFit)> {
    let q = (-d).exp();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let trunc = minimal_truncation(q, n, eps, norms)?;
        rows.push(ScalingRow {
            eps,
            n,
            truncation: trunc,
            log_chain_bound: identical_chain_log_bound(q, n, trunc, norms),
            log_bond_bound: bond_dim_bound(n, trunc, dim_g).log_value,
            actual_bond_dim: None,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| ((r.n * r.truncation) as f64).sqrt()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log_bond_bound).collect();
    let fit = linear_fit(&x, &y)?;
    Ok((rows, fit))
}

/// Fixed-ε regime over chain lengths whose √(nN) falls in [lo, hi], where
/// the logarithmic prefactor of the bound no longer hides the slope.
/// Spectator norms below 1 are raised to 1; otherwise the chain bound decays
/// in n and long chains need no truncation at all.
pub fn fixed_eps_scaling_window(eps: f64, d: f64, dim_g: usize, norms: &NormInputs, lo: f64, hi: f64) -> Result<(Vec<ScalingRow>, LinearFit)> {
    let norms = &NormInputs {
        b_q: norms.b_q.max(1.0),
        ..*norms
    };
    let q = (-d).exp();
    let mut ns = Vec::new();
    let mut n = 1usize;
    while n < 100_000_000 {
        let trunc = minimal_truncation(q, n, eps, norms)?;
        let x = ((n * trunc) as f64).sqrt();
        if x > hi {
            break;
        }
        if x >= lo {
            ns.push(n);
        }
        n = (n + 1).max((n as f64 * 1.15).ceil() as usize);
    }
    if ns.len() < 3 {
        return Err(Error::InvalidParameter(format!("fewer than 3 chain lengths with √(nN) in [{lo}, {hi}]")));
    }
    fixed_eps_scaling(eps, &ns, d, dim_g, norms)
}
