//! Matrix product assembly of chiral correlators on equispaced insertions.
//!
//! Insertions z_j = j d + d_0 are mapped by θ(z) = e^{−z} to θ_j = e^{−d_0} q^j
//! with q = e^{−d}. With the per-site parameter s = e^{−d/2},
//!   F(θ_1, …, θ_n) = Π_j θ_j^{−h_j} · ⟨v_0| W_s^{(1)} ⋯ W_s^{(n)} |v_n⟩,
//! where h_j is the weight of the j-th charge representation. Each W_s^{(j)}
//! is replaced by its truncation W_s^{(j),N} and projected onto the levels
//! the contraction can reach.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{conformal_weight, AlgebraData, AlgebraKind, HighestWeight};
use crate::character;
use crate::error::{Error, Result};
use crate::field::{build_mode_blocks, build_vertex_operator_blocks, Construction, PrimaryFieldModes, PrimaryFieldSpec, Window};
use crate::module::{GradedModule, NumericMode};
use crate::regularize::{error_bound_chain, error_bound_single, estimate_norm, regularize, Band, LevelVector, NormEstimate, RegularizedField, TruncatedField};
use crate::scalar::Scalar;

/// Safety factor applied to b̂(√q) in the single-step bound.
pub const NORM_SAFETY: f64 = 2.0;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Insertions {
    pub q: f64,
    /// Regularization parameter of each site, e^{−d/2}.
    pub site_parameter: f64,
    /// θ(z_j), j = 1..n
    pub points: Vec<f64>,
    /// Π_j θ_j^{−h_j}
    pub prefactor: f64,
}

/// Maps z_j = j d + d_0 through θ(z) = e^{−z}.
pub fn map_insertions(d: f64, d0: f64, weights: &[f64]) -> Result<Insertions> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {d}")));
    }
    if !(d0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("offset must be nonnegative, got {d0}")));
    }
    let q = (-d).exp();
    let points: Vec<f64> = (1..=weights.len()).map(|j| (-(d0 + j as f64 * d)).exp()).collect();
    let log_pref: f64 = weights.iter().enumerate().map(|(i, h)| h * (d0 + (i + 1) as f64 * d)).sum();
    Ok(Insertions {
        q,
        site_parameter: (-d / 2.0).exp(),
        points,
        prefactor: log_pref.exp(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    /// Bond j keeps levels ≤ min(jN, (n−j)N), all the contraction can reach.
    #[default]
    TwoSided,
    /// Every inner bond keeps levels ≤ nN.
    Uniform,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Boundary {
    /// ⟨1| … |1⟩ with vacuum modules at both ends.
    #[default]
    Vacuum,
    /// Level-0 components of V_{μ_0} and V_{μ_n}.
    LevelZero { left: usize, right: usize },
    /// Trace over the projected bond space; needs μ_0 = μ_n.
    Trace,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldInsertion {
    pub charge: HighestWeight,
    #[serde(default)]
    pub component: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelatorRequest {
    pub algebra: AlgebraData,
    /// φ_1, …, φ_n; φ_j maps M_{μ_j} to M_{μ_{j−1}}.
    pub fields: Vec<FieldInsertion>,
    /// μ_0, …, μ_n
    pub modules: Vec<HighestWeight>,
    pub spacing: f64,
    #[serde(default)]
    pub offset: f64,
    pub truncation: usize,
    pub cutoff: usize,
    #[serde(default)]
    pub projection: Projection,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub mode: NumericMode,
    /// Defaults to the closed form for Heisenberg fields.
    #[serde(default)]
    pub construction: Option<Construction>,
    /// Cutoff ladder for the norm estimates behind the certified bound.
    #[serde(default)]
    pub norm_ladder: Option<Vec<usize>>,
}

impl CorrelatorRequest {
    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidParameter("no field insertions".into()));
        }
        if self.modules.len() != n + 1 {
            return Err(Error::ChainMismatch(format!("{} fields need {} modules, got {}", n, n + 1, self.modules.len())));
        }
        match self.boundary {
            Boundary::Vacuum => {
                if !self.modules[0].is_vacuum() || !self.modules[n].is_vacuum() {
                    return Err(Error::ChainMismatch("vacuum boundaries need μ_0 = μ_n = 0".into()));
                }
            }
            Boundary::LevelZero { left, right } => {
                if left >= self.modules[0].irrep_dim() || right >= self.modules[n].irrep_dim() {
                    return Err(Error::InvalidParameter("boundary component out of range".into()));
                }
            }
            Boundary::Trace => {
                if self.modules[0] != self.modules[n] {
                    return Err(Error::ChainMismatch("trace boundaries need μ_0 = μ_n".into()));
                }
            }
        }
        for (j, f) in self.fields.iter().enumerate() {
            if f.component >= f.charge.irrep_dim() {
                return Err(Error::InvalidParameter(format!("component {} of field {}", f.component, j + 1)));
            }
        }
        let need = *self.reaches().iter().max().unwrap();
        if self.cutoff < need {
            return Err(Error::CutoffExceeded {
                requested: need,
                cutoff: self.cutoff,
            });
        }
        Ok(())
    }

    /// Largest level kept on each bond 0..=n.
    pub fn reaches(&self) -> Vec<usize> {
        bond_reaches(self.n(), self.truncation, self.projection, self.boundary)
    }

    pub fn field_spec(&self, j: usize) -> PrimaryFieldSpec {
        PrimaryFieldSpec::new(self.modules[j + 1].clone(), self.fields[j].charge.clone(), self.modules[j].clone())
            .with_component(self.fields[j].component)
    }

    pub fn weights(&self) -> Result<Vec<f64>> {
        self.fields.iter().map(|f| conformal_weight(&self.algebra, &f.charge).map(|r| r.to_f64())).collect()
    }

    fn construction(&self) -> Construction {
        self.construction.unwrap_or(match self.algebra.kind {
            AlgebraKind::Heisenberg => Construction::ClosedForm,
            AlgebraKind::Simple => Construction::Recursive,
        })
    }
}

pub fn bond_reaches(n: usize, trunc: usize, projection: Projection, boundary: Boundary) -> Vec<usize> {
    (0..=n)
        .map(|j| match (projection, boundary) {
            (_, Boundary::Trace) => n * trunc,
            (Projection::Uniform, _) if j == 0 || j == n => 0,
            (Projection::Uniform, _) => n * trunc,
            (Projection::TwoSided, _) => (j * trunc).min((n - j) * trunc),
        })
        .collect()
}

/// Modules and fields shared between requests.
#[derive(Clone, Default)]
pub struct Workspace {
    modules: HashMap<(HighestWeight, usize), Arc<GradedModule>>,
    fields: HashMap<String, Arc<PrimaryFieldModes>>,
    norms: HashMap<String, NormEstimate>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_module(&mut self, module: GradedModule) -> Arc<GradedModule> {
        let m = Arc::new(module);
        self.modules.insert((m.weight().clone(), m.cutoff()), m.clone());
        m
    }

    pub fn modules(&self) -> impl Iterator<Item = &Arc<GradedModule>> {
        self.modules.values()
    }

    pub fn module(&mut self, alg: &AlgebraData, w: &HighestWeight, cutoff: usize, mode: NumericMode) -> Result<Arc<GradedModule>> {
        if let Some(m) = self.modules.get(&(w.clone(), cutoff)) {
            return Ok(m.clone());
        }
        // any larger module will do
        if let Some(m) = self.modules.iter().filter(|((x, c), _)| x == w && *c >= cutoff).map(|(_, m)| m).next() {
            return Ok(m.clone());
        }
        Ok(self.insert_module(GradedModule::build(alg, w, cutoff, mode)?))
    }

    pub fn field(
        &mut self,
        alg: &AlgebraData,
        spec: &PrimaryFieldSpec,
        source: &GradedModule,
        target: &GradedModule,
        window: Window,
        construction: Construction,
    ) -> Result<Arc<PrimaryFieldModes>> {
        let key = serde_json::to_string(&(spec, window, construction, source.cutoff(), target.cutoff()))?;
        if let Some(f) = self.fields.get(&key) {
            return Ok(f.clone());
        }
        let f = Arc::new(match construction {
            Construction::ClosedForm => build_vertex_operator_blocks(alg, spec, source, target, window)?,
            Construction::Recursive => build_mode_blocks(alg, spec, source, target, window)?,
        });
        self.fields.insert(key, f.clone());
        Ok(f)
    }
}

impl Workspace {
    /// Norm estimate of a regularized field, memoized per field, q, band and ladder.
    pub fn norm(&mut self, field: &RegularizedField, v: usize, band: Band, ladder: &[usize]) -> Result<NormEstimate> {
        let m = &field.modes;
        let key = serde_json::to_string(&(&m.spec, m.window, m.construction, &m.target_dims, &m.source_dims, field.q.to_bits(), v, format!("{band:?}"), ladder))?;
        if let Some(e) = self.norms.get(&key) {
            return Ok(e.clone());
        }
        let e = estimate_norm(field, v, band, ladder)?;
        self.norms.insert(key, e.clone());
        Ok(e)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SiteCertificate {
    pub eps: f64,
    pub norm: f64,
    pub norm_truncated: f64,
    pub b_sqrt: NormEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub sites: Vec<SiteCertificate>,
    /// Chain bound on ⟨v_0|W⋯W|v_n⟩ − ⟨v_0|W^N⋯W^N|v_n⟩.
    pub chain_bound: f64,
    /// Chain bound times the covariance prefactor.
    pub certified_bound: f64,
    pub safety: f64,
}

#[derive(Clone, Debug)]
pub struct MpsApproximation {
    pub insertions: Insertions,
    pub truncation: usize,
    pub projection: Projection,
    pub boundary: Boundary,
    pub reaches: Vec<usize>,
    /// Dimension of the projected space on each bond.
    pub bond_dims: Vec<usize>,
    pub sites: Vec<TruncatedField>,
    pub components: Vec<usize>,
    pub structural_zero: bool,
    /// Contraction value without the prefactor.
    pub raw_value: f64,
    /// raw_value × prefactor
    pub value: f64,
    pub certificate: Option<Certificate>,
}

fn unit_at_level_zero(dims: &[usize], reach: usize, comp: usize) -> LevelVector {
    let mut x: LevelVector = dims[..=reach].iter().map(|&d| DVector::zeros(d)).collect();
    x[0][comp] = 1.0;
    x
}

impl MpsApproximation {
    pub fn n(&self) -> usize {
        self.sites.len()
    }

    /// Largest bond dimension along the chain.
    pub fn bond_dim(&self) -> usize {
        *self.bond_dims.iter().max().unwrap_or(&1)
    }

    fn bond_level_dims(&self, j: usize) -> &[usize] {
        if j < self.n() {
            &self.sites[j].field.modes.target_dims
        } else {
            &self.sites[j - 1].field.modes.source_dims
        }
    }

    fn boundary_components(&self) -> (usize, usize) {
        match self.boundary {
            Boundary::LevelZero { left, right } => (left, right),
            _ => (0, 0),
        }
    }

    /// Applies W^{(1),N} ⋯ W^{(n),N} with projections to a vector on bond n.
    pub fn apply_chain(&self, x: &[DVector<f64>]) -> Result<LevelVector> {
        let mut x = x.to_vec();
        for j in (1..=self.n()).rev() {
            x = self.sites[j - 1].apply(self.components[j - 1], &x, self.reaches[j - 1])?;
        }
        Ok(x)
    }

    pub fn contract_right_to_left(&self) -> Result<f64> {
        if self.structural_zero {
            return Ok(0.0);
        }
        if self.boundary == Boundary::Trace {
            return self.trace_value();
        }
        let (l, r) = self.boundary_components();
        let n = self.n();
        let x = unit_at_level_zero(self.bond_level_dims(n), self.reaches[n], r);
        Ok(self.apply_chain(&x)?[0][l])
    }

    pub fn contract_left_to_right(&self) -> Result<f64> {
        if self.structural_zero {
            return Ok(0.0);
        }
        if self.boundary == Boundary::Trace {
            return self.trace_value();
        }
        let (l, r) = self.boundary_components();
        let mut y = unit_at_level_zero(self.bond_level_dims(0), self.reaches[0], l);
        for j in 1..=self.n() {
            y = self.sites[j - 1].apply_transpose(self.components[j - 1], &y, self.reaches[j])?;
        }
        Ok(y[0][r])
    }

    fn trace_value(&self) -> Result<f64> {
        let n = self.n();
        let dims = self.bond_level_dims(n).to_vec();
        let reach = self.reaches[n];
        let offs: Vec<(usize, usize)> = (0..=reach).flat_map(|m| (0..dims[m]).map(move |i| (m, i))).collect();
        let parts: Vec<f64> = offs
            .par_iter()
            .map(|&(m, i)| -> Result<f64> {
                let mut x: LevelVector = dims[..=reach].iter().map(|&d| DVector::zeros(d)).collect();
                x[m][i] = 1.0;
                let y = self.apply_chain(&x)?;
                Ok(y.get(m).map_or(0.0, |v| v[i]))
            })
            .collect::<Result<_>>()?;
        Ok(parts.iter().sum())
    }

    /// Explicit tensor A^j_k = P W^{(j),N}(k) P, j = 1..n.
    pub fn tensor(&self, j: usize, k: usize) -> Result<DMatrix<f64>> {
        self.sites[j - 1].dense(k, self.reaches[j - 1], self.reaches[j])
    }

    /// Boundary vector on bond j (0 or n) in the stacked basis.
    pub fn boundary_vector(&self, j: usize) -> DVector<f64> {
        let (l, r) = self.boundary_components();
        let mut v = DVector::zeros(self.bond_dims[j]);
        v[if j == 0 { l } else { r }] = 1.0;
        v
    }

    /// ⟨v_0| A^1 ⋯ A^n |v_n⟩ from explicit dense tensors.
    pub fn direct_product_value(&self) -> Result<f64> {
        if self.structural_zero {
            return Ok(0.0);
        }
        let mut acc = self.tensor(1, self.components[0])?;
        for j in 2..=self.n() {
            acc = acc * self.tensor(j, self.components[j - 1])?;
        }
        if self.boundary == Boundary::Trace {
            return Ok(acc.trace());
        }
        Ok((self.boundary_vector(0).transpose() * acc * self.boundary_vector(self.n()))[(0, 0)])
    }

    /// Writes a little-endian header length (u64), a JSON header, then every
    /// tensor A^j_k as row-major little-endian f64, ordered by j then k.
    pub fn export(&self, path: &Path) -> Result<()> {
        let mut shapes = Vec::new();
        let mut payload: Vec<u8> = Vec::new();
        for j in 1..=self.n() {
            let comps = self.sites[j - 1].field.components();
            for k in 0..comps {
                let a = self.tensor(j, k)?;
                shapes.push(serde_json::json!({"site": j, "component": k, "rows": a.nrows(), "cols": a.ncols()}));
                for r in 0..a.nrows() {
                    for c in 0..a.ncols() {
                        payload.extend_from_slice(&a[(r, c)].to_le_bytes());
                    }
                }
            }
        }
        let header = serde_json::json!({
            "format": "wzw-mps-tensors/1",
            "byte_order": "little-endian",
            "layout": "row-major f64, tensors ordered by site then component",
            "q": self.insertions.q,
            "site_parameter": self.insertions.site_parameter,
            "truncation": self.truncation,
            "prefactor": self.insertions.prefactor,
            "error_bound": self.certificate.as_ref().map(|c| c.certified_bound),
            "bond_dims": self.bond_dims,
            "reaches": self.reaches,
            "components": self.components,
            "value": self.value,
            "tensors": shapes,
        });
        let h = serde_json::to_vec(&header)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(&(h.len() as u64).to_le_bytes())?;
        f.write_all(&h)?;
        f.write_all(&payload)?;
        f.flush()?;
        Ok(())
    }
}

/// Builds every module and field of the request and contracts the chain.
pub fn assemble_mps(req: &CorrelatorRequest, ws: &mut Workspace) -> Result<MpsApproximation> {
    req.validate()?;
    let alg = &req.algebra;
    let n = req.n();
    let reaches = req.reaches();
    let weights = req.weights()?;
    let ins = map_insertions(req.spacing, req.offset, &weights)?;
    let construction = req.construction();
    let mut mods = Vec::with_capacity(n + 1);
    for w in &req.modules {
        mods.push(ws.module(alg, w, req.cutoff, req.mode)?);
    }
    let bond_dims = (0..=n).map(|j| mods[j].cumulative_dim(reaches[j])).collect::<Result<Vec<_>>>()?;
    let mut sites = Vec::with_capacity(n);
    let mut structural_zero = false;
    for j in 0..n {
        let spec = req.field_spec(j);
        let window = Window {
            target_max: reaches[j],
            source_max: reaches[j + 1],
            band: match construction {
                Construction::ClosedForm => Some(req.truncation),
                Construction::Recursive => None,
            },
        };
        let modes = ws.field(alg, &spec, &mods[j + 1], &mods[j], window, construction)?;
        structural_zero |= modes.structural_zero;
        let w = regularize(alg, modes, ins.site_parameter)?;
        sites.push(w.truncate(req.truncation));
    }
    let mut mps = MpsApproximation {
        insertions: ins,
        truncation: req.truncation,
        projection: req.projection,
        boundary: req.boundary,
        reaches,
        bond_dims,
        sites,
        components: req.fields.iter().map(|f| f.component).collect(),
        structural_zero,
        raw_value: 0.0,
        value: 0.0,
        certificate: None,
    };
    mps.raw_value = mps.contract_right_to_left()?;
    mps.value = mps.raw_value * mps.insertions.prefactor;
    Ok(mps)
}

/// Default cutoff ladder: up to three rungs, the top one keeping the dense
/// field matrices below `max_dim` rows and columns.
pub fn default_norm_ladder(source: &GradedModule, target: &GradedModule, max_dim: usize) -> Vec<usize> {
    let top_cut = source.cutoff().min(target.cutoff());
    let mut top = 0;
    for m in 0..=top_cut {
        if source.cumulative_dim(m).unwrap() <= max_dim && target.cumulative_dim(m).unwrap() <= max_dim {
            top = m;
        }
    }
    let mut ladder: Vec<usize> = [top.saturating_sub(4), top.saturating_sub(2), top].into_iter().collect();
    ladder.dedup();
    ladder
}

/// Norm estimates and the chain bound for the request's fields.
pub fn certify(req: &CorrelatorRequest, ws: &mut Workspace) -> Result<Certificate> {
    req.validate()?;
    let alg = &req.algebra;
    let weights = req.weights()?;
    let ins = map_insertions(req.spacing, req.offset, &weights)?;
    let s = ins.site_parameter;
    let construction = req.construction();
    let mut sites = Vec::with_capacity(req.n());
    for j in 0..req.n() {
        let spec = req.field_spec(j);
        let src = ws.module(alg, &req.modules[j + 1], req.cutoff, req.mode)?;
        let tgt = ws.module(alg, &req.modules[j], req.cutoff, req.mode)?;
        let ladder = match &req.norm_ladder {
            Some(l) => l.clone(),
            None => default_norm_ladder(&src, &tgt, 2500),
        };
        let top = *ladder.last().ok_or_else(|| Error::InvalidParameter("empty norm ladder".into()))?;
        let modes = ws.field(alg, &spec, &src, &tgt, Window::square(top), construction)?;
        let comp = spec.component;
        let w = regularize(alg, modes.clone(), s)?;
        let w_sqrt = regularize(alg, modes, s.sqrt())?;
        let b_sqrt = ws.norm(&w_sqrt, comp, Band::All, &ladder)?;
        let norm = ws.norm(&w, comp, Band::All, &[top])?.value;
        let norm_truncated = ws.norm(&w, comp, Band::Keep(req.truncation), &[top])?.value;
        sites.push(SiteCertificate {
            eps: error_bound_single(s, req.truncation, NORM_SAFETY * b_sqrt.value),
            norm,
            norm_truncated,
            b_sqrt,
        });
    }
    let eps: Vec<f64> = sites.iter().map(|c| c.eps).collect();
    let norms: Vec<f64> = sites.iter().map(|c| c.norm.max(c.norm_truncated)).collect();
    let chain_bound = error_bound_chain(&eps, &norms);
    Ok(Certificate {
        sites,
        chain_bound,
        certified_bound: chain_bound * ins.prefactor,
        safety: NORM_SAFETY,
    })
}

/// Value of the renormalized correlator with its certified bound.
pub fn evaluate_renormalized(req: &CorrelatorRequest, ws: &mut Workspace) -> Result<MpsApproximation> {
    let mut mps = assemble_mps(req, ws)?;
    mps.certificate = Some(certify(req, ws)?);
    Ok(mps)
}

/// Full-CFT value Tr[Ω_0 E_1 ∘ ⋯ ∘ E_n(Ω_n)] with E_j(X) = Σ_k A^j_k X A^j_kᵀ.
#[derive(Clone, Debug, Serialize)]
pub struct FcsApproximation {
    pub raw_value: f64,
    /// raw_value × prefactor²
    pub value: f64,
    pub bond_dims: Vec<usize>,
}

impl FcsApproximation {
    /// E_j(X) for the chain's site j.
    pub fn channel(mps: &MpsApproximation, j: usize, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let comps = mps.sites[j - 1].field.components();
        let mut out = DMatrix::zeros(mps.bond_dims[j - 1], mps.bond_dims[j - 1]);
        for k in 0..comps {
            let a = mps.tensor(j, k)?;
            if a.ncols() != x.nrows() {
                return Err(Error::ShapeMismatch(format!("Kraus operator {}x{} on {}x{}", a.nrows(), a.ncols(), x.nrows(), x.ncols())));
            }
            out += &a * x * a.transpose();
        }
        Ok(out)
    }
}

pub fn fcs_evaluate(mps: &MpsApproximation) -> Result<FcsApproximation> {
    if mps.boundary == Boundary::Trace {
        return Err(Error::Unsupported("finitely correlated evaluation needs open boundaries".into()));
    }
    let n = mps.n();
    let vn = mps.boundary_vector(n);
    let mut x = &vn * vn.transpose();
    for j in (1..=n).rev() {
        x = FcsApproximation::channel(mps, j, &x)?;
    }
    let v0 = mps.boundary_vector(0);
    let raw = (v0.transpose() * x * v0)[(0, 0)];
    Ok(FcsApproximation {
        raw_value: raw,
        value: raw * mps.insertions.prefactor.powi(2),
        bond_dims: mps.bond_dims.clone(),
    })
}

/// Σ_{m ≤ level} d_m: the built module supplies levels up to its cutoff, the
/// character beyond. Overlapping levels must agree.
pub fn cumulative_dimension(alg: &AlgebraData, weight: &HighestWeight, module: Option<&GradedModule>, level: usize) -> Result<u128> {
    let chars = character::graded_dimensions(alg, weight, level)?;
    let mut total = 0u128;
    for (m, &c) in chars.iter().enumerate() {
        if let Some(md) = module.filter(|md| m <= md.cutoff()) {
            let d = md.graded_dimension(m)? as u128;
            if d != c {
                return Err(Error::InvalidParameter(format!("level {m}: module dimension {d} differs from character {c}")));
            }
        }
        total += c;
    }
    Ok(total)
}
