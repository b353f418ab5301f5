//! Regularized fields W_q = q^{L0} φ(1) q^{L0}, their grade-shift truncation
//! W_q^N, operator-norm estimates, and the replacement error bounds.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::AlgebraData;
use crate::error::{Error, Result};
use crate::field::PrimaryFieldModes;
use crate::linalg::largest_singular_value;
use crate::scalar::Scalar;

/// A vector stored level by level; entry m lives on level m.
pub type LevelVector = Vec<DVector<f64>>;

pub fn level_norm(x: &[DVector<f64>]) -> f64 {
    x.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt()
}

/// Which grade shifts δ = s − t take part in an operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    All,
    /// |δ| ≤ N
    Keep(usize),
    /// |δ| > N
    Discard(usize),
}

impl Band {
    pub fn includes(&self, t: usize, s: usize) -> bool {
        let d = t.abs_diff(s);
        match *self {
            Band::All => true,
            Band::Keep(n) => d <= n,
            Band::Discard(n) => d > n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegularizedField {
    pub modes: Arc<PrimaryFieldModes>,
    pub q: f64,
    pub source_weight: f64,
    pub target_weight: f64,
}

/// Regularizes a field at parameter q ∈ (0, 1).
pub fn regularize(alg: &AlgebraData, modes: Arc<PrimaryFieldModes>, q: f64) -> Result<RegularizedField> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("regularization needs 0 < q < 1, got {q}")));
    }
    let source_weight = crate::algebra::conformal_weight(alg, &modes.spec.source)?.to_f64();
    let target_weight = crate::algebra::conformal_weight(alg, &modes.spec.target)?.to_f64();
    Ok(RegularizedField {
        modes,
        q,
        source_weight,
        target_weight,
    })
}

impl RegularizedField {
    pub fn components(&self) -> usize {
        self.modes.components()
    }

    pub fn target_max(&self) -> usize {
        self.modes.window.target_max
    }

    pub fn source_max(&self) -> usize {
        self.modes.window.source_max
    }

    /// q^{wt_target + t} q^{wt_source + s}
    pub fn scale(&self, t: usize, s: usize) -> f64 {
        self.q.powf(self.target_weight + t as f64 + self.source_weight + s as f64)
    }

    fn selected(&self, v: usize, t: usize, s: usize, band: Band) -> Result<Option<&DMatrix<f64>>> {
        if !band.includes(t, s) {
            return Ok(None);
        }
        self.modes.block(v, t, s).map(Some)
    }

    /// Regularized block (t, s) of component v.
    pub fn block(&self, v: usize, t: usize, s: usize) -> Result<DMatrix<f64>> {
        Ok(self.modes.block(v, t, s)? * self.scale(t, s))
    }

    /// y = W x restricted to target levels ≤ target_max and the band.
    pub fn apply(&self, v: usize, x: &[DVector<f64>], band: Band, target_max: usize) -> Result<LevelVector> {
        let dims = &self.modes.target_dims;
        if target_max >= dims.len() {
            return Err(Error::CutoffExceeded {
                requested: target_max,
                cutoff: dims.len() - 1,
            });
        }
        let mut y: LevelVector = (0..=target_max).map(|t| DVector::zeros(dims[t])).collect();
        for (s, xs) in x.iter().enumerate() {
            if xs.iter().all(|&c| c == 0.0) {
                continue;
            }
            for (t, yt) in y.iter_mut().enumerate() {
                if let Some(b) = self.selected(v, t, s, band)? {
                    yt.gemv(self.scale(t, s), b, xs, 1.0);
                }
            }
        }
        Ok(y)
    }

    /// y = Wᵀ x restricted to source levels ≤ source_max and the band.
    pub fn apply_transpose(&self, v: usize, x: &[DVector<f64>], band: Band, source_max: usize) -> Result<LevelVector> {
        let dims = &self.modes.source_dims;
        if source_max >= dims.len() {
            return Err(Error::CutoffExceeded {
                requested: source_max,
                cutoff: dims.len() - 1,
            });
        }
        let mut y: LevelVector = (0..=source_max).map(|s| DVector::zeros(dims[s])).collect();
        for (t, xt) in x.iter().enumerate() {
            if xt.iter().all(|&c| c == 0.0) {
                continue;
            }
            for (s, ys) in y.iter_mut().enumerate() {
                if let Some(b) = self.selected(v, t, s, band)? {
                    ys.gemv_tr(self.scale(t, s), b, xt, 1.0);
                }
            }
        }
        Ok(y)
    }

    /// Dense matrix over target levels ≤ t_max, source levels ≤ s_max.
    pub fn dense(&self, v: usize, t_max: usize, s_max: usize, band: Band) -> Result<DMatrix<f64>> {
        let td = &self.modes.target_dims;
        let sd = &self.modes.source_dims;
        if t_max >= td.len() || s_max >= sd.len() {
            return Err(Error::CutoffExceeded {
                requested: t_max.max(s_max),
                cutoff: (td.len() - 1).min(sd.len() - 1),
            });
        }
        let rows: usize = td[..=t_max].iter().sum();
        let cols: usize = sd[..=s_max].iter().sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for t in 0..=t_max {
            let mut c0 = 0;
            for s in 0..=s_max {
                if let Some(b) = self.selected(v, t, s, band)? {
                    let mut view = out.view_mut((r0, c0), (td[t], sd[s]));
                    view.copy_from(b);
                    view *= self.scale(t, s);
                }
                c0 += sd[s];
            }
            r0 += td[t];
        }
        Ok(out)
    }

    pub fn truncate(&self, n: usize) -> TruncatedField {
        TruncatedField {
            field: self.clone(),
            n,
        }
    }
}

/// W_q^N: blocks with |δ| > N removed.
#[derive(Clone, Debug)]
pub struct TruncatedField {
    pub field: RegularizedField,
    pub n: usize,
}

impl TruncatedField {
    pub fn apply(&self, v: usize, x: &[DVector<f64>], target_max: usize) -> Result<LevelVector> {
        self.field.apply(v, x, Band::Keep(self.n), target_max)
    }

    pub fn apply_transpose(&self, v: usize, x: &[DVector<f64>], source_max: usize) -> Result<LevelVector> {
        self.field.apply_transpose(v, x, Band::Keep(self.n), source_max)
    }

    pub fn dense(&self, v: usize, t_max: usize, s_max: usize) -> Result<DMatrix<f64>> {
        self.field.dense(v, t_max, s_max, Band::Keep(self.n))
    }
}

/// Norm estimate on a ladder of cutoffs; a lower bound on the true norm.
#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// (cutoff, largest singular value) per rung
    pub rungs: Vec<(usize, f64)>,
    /// Relative increment between the last two rungs.
    pub increment: f64,
    /// Increment ratios between successive rungs.
    pub convergence_ratios: Vec<f64>,
    pub iterations: usize,
    pub lower_bound: bool,
}

impl NormEstimate {
    pub fn converged(&self, rel: f64) -> bool {
        self.increment < rel
    }
}

/// Largest singular value of the field restricted to levels ≤ M on both
/// sides, for each M of the ladder.
pub fn estimate_norm(field: &RegularizedField, v: usize, band: Band, ladder: &[usize]) -> Result<NormEstimate> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("cutoff ladder must be nonempty and increasing".into()));
    }
    let mut rungs = Vec::with_capacity(ladder.len());
    let mut iterations = 0;
    for &m in ladder {
        let a = field.dense(v, m.min(field.target_max()), m.min(field.source_max()), band)?;
        let p = largest_singular_value(&a, 1e-13, 200_000)?;
        iterations += p.iterations;
        rungs.push((m, p.value));
    }
    // singular values of nested submatrices never decrease
    for i in 1..rungs.len() {
        rungs[i].1 = rungs[i].1.max(rungs[i - 1].1);
    }
    let value = rungs.last().unwrap().1;
    let increment = if rungs.len() >= 2 {
        let prev = rungs[rungs.len() - 2].1;
        (value - prev) / value.max(f64::MIN_POSITIVE)
    } else {
        f64::INFINITY
    };
    let diffs: Vec<f64> = rungs.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let convergence_ratios = diffs.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    Ok(NormEstimate {
        value,
        rungs,
        increment,
        convergence_ratios,
        iterations,
        lower_bound: true,
    })
}

/// Per-operator replacement bound q^{N/4} √3 b(√q) / (1 − √q).
pub fn error_bound_single(q: f64, n: usize, b_sqrt_q: f64) -> f64 {
    q.powf(n as f64 / 4.0) * 3f64.sqrt() * b_sqrt_q / (1.0 - q.sqrt())
}

/// Telescoped chain bound Σ_j ε_j Π_{i≠j} ‖W_i‖.
pub fn error_bound_chain(eps: &[f64], norms: &[f64]) -> f64 {
    assert_eq!(eps.len(), norms.len(), "one norm per operator");
    (0..eps.len())
        .map(|j| eps[j] * norms.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, b)| b).product::<f64>())
        .sum()
}

/// Uniform random unit vector on the span of levels ≤ `levels`.
pub fn random_unit_vector<R: Rng + ?Sized>(dims: &[usize], levels: usize, rng: &mut R) -> LevelVector {
    let mut x: LevelVector = dims[..=levels]
        .iter()
        .map(|&d| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let n = level_norm(&x);
    for v in &mut x {
        *v /= n;
    }
    x
}

/// max over samples of ‖(W − W^N) v‖ for random unit v on source levels
/// ≤ `levels`, evaluated from the discarded blocks directly.
pub fn measure_replacement_error<R: Rng + ?Sized>(
    field: &RegularizedField,
    v: usize,
    n: usize,
    levels: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if levels > field.source_max() {
        return Err(Error::CutoffExceeded {
            requested: levels,
            cutoff: field.source_max(),
        });
    }
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = random_unit_vector(&field.modes.source_dims, levels, rng);
        let y = field.apply(v, &x, Band::Discard(n), field.target_max())?;
        worst = worst.max(level_norm(&y));
    }
    Ok(worst)
}
