//! Primary fields as grade-resolved blocks between two graded modules.
//!
//! `F_v[t][s]` is the part of φ_v(1) mapping level s of the source module to
//! level t of the target module, in orthonormal level bases; the grade shift
//! is δ = s − t. At argument z the block picks up z^{t − s − h_φ}.
//!
//! The blocks obey the current commutation rule
//!   a(n) F_v[t+n, s] − F_v[t, s−n] a(n) = F_{ρ(a)v}[t, s],
//! which determines them from the level-0 intertwiner.

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{conformal_weight, fusion_allowed, integrable, AlgebraData, AlgebraKind, HighestWeight};
use crate::error::{Error, Result};
use crate::irrep::{intertwiner, FiniteIrrep};
use crate::module::GradedModule;
use crate::scalar::{Rational, Scalar};

/// A primary field φ: V_field ⊗ M_source → M_target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimaryFieldSpec {
    pub source: HighestWeight,
    pub field: HighestWeight,
    pub target: HighestWeight,
    /// Component of V_field used when a single operator is needed; 0 is
    /// the highest-weight component.
    #[serde(default)]
    pub component: usize,
}

impl PrimaryFieldSpec {
    pub fn new(source: HighestWeight, field: HighestWeight, target: HighestWeight) -> Self {
        Self {
            source,
            field,
            target,
            component: 0,
        }
    }

    pub fn with_component(mut self, component: usize) -> Self {
        self.component = component;
        self
    }

    pub fn check(&self, alg: &AlgebraData) -> Result<()> {
        for w in [&self.source, &self.field, &self.target] {
            if !integrable(alg, w) {
                return Err(Error::NotIntegrable {
                    weight: w.to_string(),
                    level: alg.level,
                });
            }
        }
        if self.component >= self.field.irrep_dim() {
            return Err(Error::InvalidParameter(format!(
                "component {} of a {}-dimensional charge representation",
                self.component,
                self.field.irrep_dim()
            )));
        }
        Ok(())
    }

    pub fn allowed(&self, alg: &AlgebraData) -> bool {
        fusion_allowed(alg, &self.source, &self.target, &self.field)
    }

    /// h_φ = wt source + wt field − wt target.
    pub fn scaling_dimension(&self, alg: &AlgebraData) -> Result<Rational> {
        Ok(conformal_weight(alg, &self.source)? + conformal_weight(alg, &self.field)? - conformal_weight(alg, &self.target)?)
    }

    /// wt of the charge representation, the weight entering covariance.
    pub fn field_weight(&self, alg: &AlgebraData) -> Result<Rational> {
        conformal_weight(alg, &self.field)
    }
}

/// Range of blocks kept: target levels ≤ `target_max`, source levels ≤
/// `source_max`, and |t − s| ≤ `band` when set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub target_max: usize,
    pub source_max: usize,
    pub band: Option<usize>,
}

impl Window {
    pub fn square(m: usize) -> Self {
        Self {
            target_max: m,
            source_max: m,
            band: None,
        }
    }

    pub fn contains(&self, t: usize, s: usize) -> bool {
        t <= self.target_max && s <= self.source_max && self.band.is_none_or(|b| t.abs_diff(s) <= b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Recursive,
    ClosedForm,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimaryFieldModes {
    pub spec: PrimaryFieldSpec,
    pub window: Window,
    pub construction: Construction,
    /// Set when the fusion rules forbid the field; all blocks are zero.
    pub structural_zero: bool,
    pub h_phi: f64,
    pub target_dims: Vec<usize>,
    pub source_dims: Vec<usize>,
    /// `blocks[v][t][s]`, `None` outside the band.
    blocks: Vec<Vec<Vec<Option<DMatrix<f64>>>>>,
}

impl PrimaryFieldModes {
    pub fn components(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, v: usize, t: usize, s: usize) -> Result<&DMatrix<f64>> {
        let outside = || Error::OutsideWindow {
            target: t,
            source_level: s,
            max_target: self.window.target_max,
            max_source: self.window.source_max,
        };
        if !self.window.contains(t, s) {
            return Err(outside());
        }
        self.blocks
            .get(v)
            .ok_or_else(|| Error::InvalidParameter(format!("component {v} of {}", self.blocks.len())))?[t][s]
            .as_ref()
            .ok_or_else(outside)
    }

    /// Block with grade shift δ = s − t acting on source level s.
    pub fn shift_block(&self, v: usize, delta: i64, s: usize) -> Result<&DMatrix<f64>> {
        let t = s as i64 - delta;
        if t < 0 {
            return Err(Error::InvalidParameter(format!("grade shift {delta} from level {s} leaves the module")));
        }
        self.block(v, t as usize, s)
    }

    /// Stacked matrix over target levels ≤ t_max and source levels ≤ s_max.
    pub fn dense(&self, v: usize, t_max: usize, s_max: usize) -> Result<DMatrix<f64>> {
        let rows: usize = self.target_dims[..=t_max].iter().sum();
        let cols: usize = self.source_dims[..=s_max].iter().sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for t in 0..=t_max {
            let mut c0 = 0;
            for s in 0..=s_max {
                if self.window.contains(t, s) {
                    let b = self.block(v, t, s)?;
                    out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
                } else if self.window.band.is_none() {
                    return Err(Error::OutsideWindow {
                        target: t,
                        source_level: s,
                        max_target: self.window.target_max,
                        max_source: self.window.source_max,
                    });
                }
                c0 += self.source_dims[s];
            }
            r0 += self.target_dims[t];
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .map(|b| b.amax())
            .fold(0.0, f64::max)
    }

    /// Restricts to a smaller window.
    pub fn restrict(&self, window: Window) -> Result<Self> {
        let mut out = self.clone();
        for t in 0..=self.window.target_max {
            for s in 0..=self.window.source_max {
                if !window.contains(t, s) {
                    for v in &mut out.blocks {
                        v[t][s] = None;
                    }
                } else if !self.window.contains(t, s) {
                    return Err(Error::OutsideWindow {
                        target: t,
                        source_level: s,
                        max_target: self.window.target_max,
                        max_source: self.window.source_max,
                    });
                }
            }
        }
        for v in &mut out.blocks {
            v.truncate(window.target_max + 1);
            for row in v.iter_mut() {
                row.truncate(window.source_max + 1);
            }
        }
        out.target_dims.truncate(window.target_max + 1);
        out.source_dims.truncate(window.source_max + 1);
        out.window = window;
        Ok(out)
    }

    /// Scales every block by a constant; used for normalization controls.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for b in out.blocks.iter_mut().flatten().flatten().flatten() {
            *b *= factor;
        }
        out
    }
}

fn check_modules(alg: &AlgebraData, spec: &PrimaryFieldSpec, source: &GradedModule, target: &GradedModule, window: &Window) -> Result<()> {
    spec.check(alg)?;
    if source.weight() != &spec.source || target.weight() != &spec.target {
        return Err(Error::ChainMismatch(format!(
            "field {} → {} given modules {} → {}",
            spec.source,
            spec.target,
            source.weight(),
            target.weight()
        )));
    }
    if window.target_max > target.cutoff() {
        return Err(Error::CutoffExceeded {
            requested: window.target_max,
            cutoff: target.cutoff(),
        });
    }
    if window.source_max > source.cutoff() {
        return Err(Error::CutoffExceeded {
            requested: window.source_max,
            cutoff: source.cutoff(),
        });
    }
    Ok(())
}

fn zero_blocks(components: usize, window: &Window, tdims: &[usize], sdims: &[usize]) -> Vec<Vec<Vec<Option<DMatrix<f64>>>>> {
    (0..components)
        .map(|_| {
            (0..=window.target_max)
                .map(|t| {
                    (0..=window.source_max)
                        .map(|s| window.contains(t, s).then(|| DMatrix::zeros(tdims[t], sdims[s])))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Modes p used to peel a level: g(−1) generates simple-algebra modules,
/// the Heisenberg module needs every a(−p).
fn peel_modes(alg: &AlgebraData, level: usize) -> Vec<usize> {
    match alg.kind {
        AlgebraKind::Simple => vec![1],
        AlgebraKind::Heisenberg => (1..=level).collect(),
    }
}

/// Cholesky factor of Σ_{c,p} a_c(p)ᵀ a_c(p) on level m (m ≥ 1).
fn peel_gram(module: &GradedModule, m: usize) -> Result<Cholesky<f64, Dyn>> {
    let alg = module.algebra();
    let d = module.graded_dimension(m)?;
    let mut g = DMatrix::zeros(d, d);
    for c in 0..alg.dim {
        for p in peel_modes(alg, m) {
            let l = module.lowering(c, p, m)?.to_dense();
            g += l.tr_mul(&l);
        }
    }
    Cholesky::new(g).ok_or(Error::IntegrabilityViolation { level: m, pivot: 0.0 })
}

/// Builds all blocks in the window from the commutation rule: source levels
/// are peeled at target level 0, target levels above.
pub fn build_mode_blocks(
    alg: &AlgebraData,
    spec: &PrimaryFieldSpec,
    source: &GradedModule,
    target: &GradedModule,
    window: Window,
) -> Result<PrimaryFieldModes> {
    check_modules(alg, spec, source, target, &window)?;
    let full = Window {
        band: None,
        ..window
    };
    let tdims: Vec<usize> = target.graded_dimensions()[..=full.target_max].to_vec();
    let sdims: Vec<usize> = source.graded_dimensions()[..=full.source_max].to_vec();
    let ncomp = spec.field.irrep_dim();
    let h_phi = spec.scaling_dimension(alg)?.to_f64();
    let Some(tw) = intertwiner(alg, &spec.source, &spec.field, &spec.target)?.filter(|_| spec.allowed(alg)) else {
        return Ok(PrimaryFieldModes {
            spec: spec.clone(),
            window,
            construction: Construction::Recursive,
            structural_zero: true,
            h_phi,
            blocks: zero_blocks(ncomp, &window, &tdims, &sdims),
            target_dims: tdims,
            source_dims: sdims,
        });
    };
    let rho = FiniteIrrep::new(alg, &spec.field)?.ortho;
    // ρ(c) as (u, coefficient) lists per (c, v)
    let action: Vec<Vec<Vec<(usize, f64)>>> = (0..alg.dim)
        .map(|c| {
            (0..ncomp)
                .map(|v| (0..ncomp).filter(|&u| rho[c][(u, v)] != 0.0).map(|u| (u, rho[c][(u, v)])).collect())
                .collect()
        })
        .collect();
    let combine = |blocks: &Vec<Vec<Vec<DMatrix<f64>>>>, c: usize, v: usize, t: usize, s: usize| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(tdims[t], sdims[s]);
        for &(u, x) in &action[c][v] {
            out += &blocks[u][t][s] * x;
        }
        out
    };

    // blocks[v][t][s]
    let mut blocks: Vec<Vec<Vec<DMatrix<f64>>>> = vec![Vec::with_capacity(full.target_max + 1); ncomp];
    let source_chol: Vec<Option<Cholesky<f64, Dyn>>> = (0..=full.source_max)
        .map(|s| if s == 0 { Ok(None) } else { peel_gram(source, s).map(Some) })
        .collect::<Result<_>>()?;

    // target level 0: F_v[0,s] G_s = −Σ σ_c F_{ρ(c)v}[0, s−p] τc(p)
    for v in 0..ncomp {
        blocks[v].push(vec![tw.ortho[v].clone()]);
    }
    for s in 1..=full.source_max {
        let mut new = Vec::with_capacity(ncomp);
        for v in 0..ncomp {
            let mut x = DMatrix::zeros(tdims[0], sdims[s]);
            for c in 0..alg.dim {
                let tc = alg.tau(c);
                for p in peel_modes(alg, s) {
                    let f = combine(&blocks, c, v, 0, s - p);
                    x -= source.lowering(tc, p, s)?.left_mul(&f) * alg.sigma(c);
                }
            }
            let y = source_chol[s].as_ref().unwrap().solve(&x.transpose());
            new.push(y.transpose());
        }
        for (v, b) in new.into_iter().enumerate() {
            blocks[v][0].push(b);
        }
    }

    // target levels t ≥ 1: c(p) F_v[t,s] = F_{ρ(c)v}[t−p, s] + F_v[t−p, s−p] c(p)
    for t in 1..=full.target_max {
        let chol = peel_gram(target, t)?;
        let modes = peel_modes(alg, t);
        let row: Vec<Vec<DMatrix<f64>>> = (0..=full.source_max)
            .into_par_iter()
            .map(|s| -> Result<Vec<DMatrix<f64>>> {
                let mut out = Vec::with_capacity(ncomp);
                for v in 0..ncomp {
                    let mut x = DMatrix::zeros(tdims[t], sdims[s]);
                    for c in 0..alg.dim {
                        for &p in &modes {
                            let mut rhs = combine(&blocks, c, v, t - p, s);
                            if s >= p {
                                rhs += source.lowering(c, p, s)?.left_mul(&blocks[v][t - p][s - p]);
                            }
                            x += target.lowering(c, p, t)?.tr_mul(&rhs);
                        }
                    }
                    out.push(chol.solve(&x));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for v in 0..ncomp {
            blocks[v].push(row.iter().map(|r| r[v].clone()).collect());
        }
    }

    let blocks = blocks
        .into_iter()
        .map(|bv| {
            bv.into_iter()
                .enumerate()
                .map(|(t, row)| row.into_iter().enumerate().map(|(s, b)| window.contains(t, s).then_some(b)).collect())
                .collect()
        })
        .collect();
    Ok(PrimaryFieldModes {
        spec: spec.clone(),
        window,
        construction: Construction::Recursive,
        structural_zero: false,
        h_phi,
        target_dims: tdims,
        source_dims: sdims,
        blocks,
    })
}

/// ⟨l| e^{x b†} e^{−x b} |m⟩ for one oscillator in the normalized basis.
fn single_mode(l: u32, m: u32, x: f64) -> f64 {
    let lf = |n: u32| (1..=n).map(|i| i as f64).product::<f64>();
    let pref = (lf(l) * lf(m)).sqrt();
    (0..=l.min(m))
        .map(|j| {
            let a = l - j;
            let b = m - j;
            let sign = if b % 2 == 0 { 1.0 } else { -1.0 };
            sign * x.powi((a + b) as i32) / (lf(a) * lf(b) * lf(j))
        })
        .sum::<f64>()
        * pref
}

/// Heisenberg vertex operator V_α(1) = exp(α Σ a(−n)/(n kκ)) exp(−α Σ a(n)/(n kκ))
/// in the Fock bases, mode by mode.
pub fn build_vertex_operator_blocks(
    alg: &AlgebraData,
    spec: &PrimaryFieldSpec,
    source: &GradedModule,
    target: &GradedModule,
    window: Window,
) -> Result<PrimaryFieldModes> {
    if alg.kind != AlgebraKind::Heisenberg || !source.is_fock() || !target.is_fock() {
        return Err(Error::Unsupported("vertex operators need Heisenberg Fock modules".into()));
    }
    check_modules(alg, spec, source, target, &window)?;
    let tdims: Vec<usize> = target.graded_dimensions()[..=window.target_max].to_vec();
    let sdims: Vec<usize> = source.graded_dimensions()[..=window.source_max].to_vec();
    let h_phi = spec.scaling_dimension(alg)?.to_f64();
    if !spec.allowed(alg) {
        return Ok(PrimaryFieldModes {
            spec: spec.clone(),
            window,
            construction: Construction::ClosedForm,
            structural_zero: true,
            h_phi,
            blocks: zero_blocks(1, &window, &tdims, &sdims),
            target_dims: tdims,
            source_dims: sdims,
        });
    }
    let alpha = spec.field.charge_value().map(|c| c.to_f64()).unwrap_or(0.0);
    let kk = alg.level as f64 * alg.kappa[0][0].to_f64();
    let top = window.target_max.max(window.source_max).max(1);
    let x: Vec<f64> = (1..=top).map(|n| alpha / (n as f64 * kk).sqrt()).collect();
    let mut table: HashMap<(usize, u32, u32), f64> = HashMap::new();
    for n in 1..=top {
        let kmax = (top / n) as u32;
        for l in 0..=kmax {
            for m in 0..=kmax {
                table.insert((n, l, m), single_mode(l, m, x[n - 1]));
            }
        }
    }
    let element = |lo: &[u32], mo: &[u32]| -> f64 {
        let len = lo.len().max(mo.len());
        let mut acc = 1.0;
        for n in 1..=len {
            let l = lo.get(n - 1).copied().unwrap_or(0);
            let m = mo.get(n - 1).copied().unwrap_or(0);
            acc *= table[&(n, l, m)];
            if acc == 0.0 {
                break;
            }
        }
        acc
    };
    let blocks: Vec<Vec<Option<DMatrix<f64>>>> = (0..=window.target_max)
        .into_par_iter()
        .map(|t| {
            let ts = target.fock_states(t).unwrap();
            (0..=window.source_max)
                .map(|s| {
                    window.contains(t, s).then(|| {
                        let ss = source.fock_states(s).unwrap();
                        DMatrix::from_fn(tdims[t], sdims[s], |i, j| element(&ts[i], &ss[j]))
                    })
                })
                .collect()
        })
        .collect();
    Ok(PrimaryFieldModes {
        spec: spec.clone(),
        window,
        construction: Construction::ClosedForm,
        structural_zero: false,
        h_phi,
        target_dims: tdims,
        source_dims: sdims,
        blocks: vec![blocks],
    })
}

/// Largest elementwise deviation between two constructions of the same field.
pub fn cross_validate(a: &PrimaryFieldModes, b: &PrimaryFieldModes) -> Result<f64> {
    if a.components() != b.components() || a.target_dims != b.target_dims || a.source_dims != b.source_dims {
        return Err(Error::ShapeMismatch("field windows differ".into()));
    }
    let mut worst: f64 = 0.0;
    for v in 0..a.components() {
        for t in 0..a.target_dims.len() {
            for s in 0..a.source_dims.len() {
                match (a.window.contains(t, s), b.window.contains(t, s)) {
                    (true, true) => worst = worst.max((a.block(v, t, s)? - b.block(v, t, s)?).amax()),
                    (false, false) => {}
                    _ => return Err(Error::ShapeMismatch(format!("block ({t},{s}) present in one window only"))),
                }
            }
        }
    }
    Ok(worst)
}

/// Largest residual of a(n) F_v[t+n, s] − F_v[t, s−n] a(n) − F_{ρ(a)v}[t, s]
/// over all blocks whose terms lie in the window, relative to the largest
/// block entry.
pub fn commutation_residual(
    alg: &AlgebraData,
    modes: &PrimaryFieldModes,
    source: &GradedModule,
    target: &GradedModule,
    a: usize,
    n: i64,
) -> Result<f64> {
    let rho = FiniteIrrep::new(alg, &modes.spec.field)?.ortho;
    let w = modes.window;
    let mut worst: f64 = 0.0;
    for t in 0..=w.target_max {
        for s in 0..=w.source_max {
            if !w.contains(t, s) {
                continue;
            }
            let tn = t as i64 + n;
            let sn = s as i64 - n;
            let left_ok = tn < 0 || (tn as usize <= w.target_max && w.contains(tn as usize, s));
            let right_ok = sn < 0 || (sn as usize <= w.source_max && w.contains(t, sn as usize));
            if !left_ok || !right_ok {
                continue;
            }
            for v in 0..modes.components() {
                let mut r = DMatrix::zeros(modes.target_dims[t], modes.source_dims[s]);
                if tn >= 0 {
                    r += target.mode_matrix(a, n, tn as usize)? * modes.block(v, tn as usize, s)?;
                }
                if sn >= 0 {
                    r -= modes.block(v, t, sn as usize)? * source.mode_matrix(a, n, s)?;
                }
                for u in 0..modes.components() {
                    let x = rho[a][(u, v)];
                    if x != 0.0 {
                        r -= modes.block(u, t, s)? * x;
                    }
                }
                if r.len() > 0 {
                    worst = worst.max(r.amax());
                }
            }
        }
    }
    Ok(worst / modes.max_abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::NumericMode;
    use crate::scalar::rat_int;

    fn heis(c: i64, m: usize) -> GradedModule {
        GradedModule::build(&AlgebraData::heisenberg(), &HighestWeight::charge(rat_int(c)), m, NumericMode::Float).unwrap()
    }

    #[test]
    fn vertex_operator_first_order_terms() {
        let alg = AlgebraData::heisenberg();
        let spec = PrimaryFieldSpec::new(HighestWeight::charge(rat_int(0)), HighestWeight::charge(rat_int(1)), HighestWeight::charge(rat_int(1)));
        let f = build_vertex_operator_blocks(&alg, &spec, &heis(0, 3), &heis(1, 3), Window::square(3)).unwrap();
        assert_eq!(f.block(0, 0, 0).unwrap()[(0, 0)], 1.0);
        assert!((f.block(0, 1, 0).unwrap()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((f.block(0, 0, 1).unwrap()[(0, 0)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_closed_form_for_vertex_operators() {
        let alg = AlgebraData::heisenberg();
        let spec = PrimaryFieldSpec::new(HighestWeight::charge(rat_int(-1)), HighestWeight::charge(rat_int(1)), HighestWeight::charge(rat_int(0)));
        let (s, t) = (heis(-1, 6), heis(0, 6));
        let a = build_mode_blocks(&alg, &spec, &s, &t, Window::square(6)).unwrap();
        let b = build_vertex_operator_blocks(&alg, &spec, &s, &t, Window::square(6)).unwrap();
        assert!(cross_validate(&a, &b).unwrap() < 1e-10);
        assert!(cross_validate(&a.scaled(1.5), &b).unwrap() > 0.1);
    }

    #[test]
    fn singlet_field_blocks() {
        let alg = AlgebraData::su2(1);
        let half = GradedModule::build(&alg, &HighestWeight::spin(1), 4, NumericMode::Float).unwrap();
        let vac = GradedModule::build(&alg, &HighestWeight::spin(0), 4, NumericMode::Float).unwrap();
        let spec = PrimaryFieldSpec::new(HighestWeight::spin(1), HighestWeight::spin(1), HighestWeight::spin(0));
        let f = build_mode_blocks(&alg, &spec, &half, &vac, Window::square(4)).unwrap();
        assert!(!f.structural_zero);
        assert_eq!(f.block(0, 0, 0).unwrap()[(0, 1)], 1.0);
        for a in 0..3 {
            for n in -2..=2 {
                let r = commutation_residual(&alg, &f, &half, &vac, a, n).unwrap();
                assert!(r < 1e-12, "a={a} n={n} residual {r}");
            }
        }
    }

    #[test]
    fn level_forbidden_fusion_is_structural_zero() {
        let alg = AlgebraData::su2(1);
        let half = GradedModule::build(&alg, &HighestWeight::spin(1), 2, NumericMode::Float).unwrap();
        let spec = PrimaryFieldSpec::new(HighestWeight::spin(1), HighestWeight::spin(1), HighestWeight::spin(1));
        let f = build_mode_blocks(&alg, &spec, &half, &half, Window::square(2)).unwrap();
        assert!(f.structural_zero);
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn window_errors() {
        let alg = AlgebraData::heisenberg();
        let spec = PrimaryFieldSpec::new(HighestWeight::charge(rat_int(0)), HighestWeight::charge(rat_int(1)), HighestWeight::charge(rat_int(1)));
        let w = Window {
            target_max: 3,
            source_max: 3,
            band: Some(1),
        };
        let f = build_vertex_operator_blocks(&alg, &spec, &heis(0, 3), &heis(1, 3), w).unwrap();
        assert!(matches!(f.block(0, 3, 0), Err(Error::OutsideWindow { .. })));
        assert!(matches!(
            build_vertex_operator_blocks(&alg, &spec, &heis(0, 3), &heis(1, 3), Window::square(4)),
            Err(Error::CutoffExceeded { .. })
        ));
    }
}
