use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use wzw_mps::field::Construction;
use wzw_mps::module::NumericMode;
use wzw_mps::mps::{bond_reaches, Boundary, CorrelatorRequest, FieldInsertion, Projection};
use wzw_mps::scalar::Scalar;
use wzw_mps::{AlgebraData, AlgebraKind, HighestWeight};

/// One JSON document describing a run; every CLI flag overrides one key.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// "heisenberg", "su2", or a path to an algebra JSON file.
    pub algebra: String,
    pub level: u32,
    /// Charge labels of φ_1..φ_n.
    pub fields: Vec<String>,
    /// Physical component of each field; missing entries are 0.
    pub components: Vec<usize>,
    /// μ_0..μ_n; derived when empty.
    pub modules: Vec<String>,
    pub boundary: Boundary,
    pub projection: Projection,
    pub d: f64,
    pub d0: f64,
    pub truncation: usize,
    /// Module cutoff M; defaults to the largest bond reach over the run.
    pub cutoff: Option<usize>,
    pub construction: Option<Construction>,
    pub norm_ladder: Option<Vec<usize>>,
    pub certify: bool,
    pub d_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    /// Chain lengths for the bond-dimension tables.
    pub sites_grid: Vec<usize>,
    pub mmax: usize,
    pub dmax: usize,
    /// Random unit vectors per replacement-error measurement.
    pub samples: usize,
    pub output: PathBuf,
    pub module_cache: Option<PathBuf>,
    pub mode: NumericMode,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub memory_budget_mb: f64,
    pub export: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algebra: "heisenberg".into(),
            level: 1,
            fields: vec!["1".into(), "-1".into()],
            components: Vec::new(),
            modules: Vec::new(),
            boundary: Boundary::Vacuum,
            projection: Projection::TwoSided,
            d: 1.0,
            d0: 0.0,
            truncation: 8,
            cutoff: None,
            construction: None,
            norm_ladder: None,
            certify: true,
            d_grid: vec![0.5, 1.0, 2.0],
            n_grid: vec![2, 4, 6, 8, 10, 12],
            eps_grid: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8],
            sites_grid: vec![2, 3, 4],
            mmax: 500,
            dmax: 8,
            samples: 100,
            output: PathBuf::from("out"),
            module_cache: None,
            mode: NumericMode::Float,
            seed: 0,
            jobs: None,
            memory_budget_mb: 4096.0,
            export: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| wzw_mps::Error::InvalidParameter(format!("config {}: {e}", p.display())).into())
            }
        }
    }

    pub fn algebra_data(&self) -> anyhow::Result<AlgebraData> {
        match self.algebra.as_str() {
            "heisenberg" | "su2" => Ok(AlgebraData::preset(&self.algebra, self.level)?),
            path => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading algebra file {path}"))?;
                let v: serde_json::Value = serde_json::from_str(&text).map_err(wzw_mps::Error::from)?;
                Ok(AlgebraData::from_json(&v)?)
            }
        }
    }

    /// Grid checks; runs refuse empty sweeps.
    pub fn check_grids(&self) -> anyhow::Result<()> {
        if self.d_grid.is_empty() || self.n_grid.is_empty() || self.eps_grid.is_empty() || self.sites_grid.is_empty() {
            return Err(wzw_mps::Error::InvalidParameter("sweep grids must be nonempty".into()).into());
        }
        Ok(())
    }

    pub fn field_weights(&self, alg: &AlgebraData) -> anyhow::Result<Vec<HighestWeight>> {
        self.fields.iter().map(|s| Ok(HighestWeight::parse_for(alg, s)?)).collect()
    }

    /// μ_0..μ_n: given explicitly, or by charge conservation from a vacuum
    /// right end (Heisenberg), or alternating 0, 1/2 for spin-1/2 chains.
    pub fn module_weights(&self, alg: &AlgebraData) -> anyhow::Result<Vec<HighestWeight>> {
        if !self.modules.is_empty() {
            return self.modules.iter().map(|s| Ok(HighestWeight::parse_for(alg, s)?)).collect();
        }
        let fields = self.field_weights(alg)?;
        let n = fields.len();
        match alg.kind {
            AlgebraKind::Heisenberg => {
                let mut mu = vec![HighestWeight::vacuum(alg); n + 1];
                for j in (1..=n).rev() {
                    let c = mu[j].charge_value().unwrap() + fields[j - 1].charge_value().unwrap();
                    mu[j - 1] = HighestWeight::charge(c);
                }
                Ok(mu)
            }
            AlgebraKind::Simple => {
                if n % 2 == 0 && fields.iter().all(|f| f.twice_spin() == Some(1)) {
                    Ok((0..=n).map(|j| HighestWeight::spin((j % 2) as u32)).collect())
                } else {
                    Err(wzw_mps::Error::ChainMismatch("modules must be given for this field chain".into()).into())
                }
            }
        }
    }

    /// Smallest cutoff serving every truncation in `truncations`.
    pub fn cutoff_for(&self, truncations: &[usize]) -> usize {
        let n = self.fields.len();
        let need = truncations
            .iter()
            .map(|&t| bond_reaches(n, t, self.projection, self.boundary).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0);
        self.cutoff.unwrap_or(need)
    }

    pub fn request(&self, alg: &AlgebraData, d: f64, truncation: usize, cutoff: usize) -> anyhow::Result<CorrelatorRequest> {
        let fields = self.field_weights(alg)?;
        let req = CorrelatorRequest {
            algebra: alg.clone(),
            fields: fields
                .into_iter()
                .enumerate()
                .map(|(j, charge)| FieldInsertion {
                    charge,
                    component: self.components.get(j).copied().unwrap_or(0),
                })
                .collect(),
            modules: self.module_weights(alg)?,
            spacing: d,
            offset: self.d0,
            truncation,
            cutoff,
            projection: self.projection,
            boundary: self.boundary,
            mode: self.mode,
            construction: self.construction,
            norm_ladder: self.norm_ladder.clone(),
        };
        req.validate()?;
        Ok(req)
    }

    /// Charges as floats when the chain admits the closed-form oracle.
    pub fn oracle_charges(&self, alg: &AlgebraData) -> anyhow::Result<Option<Vec<f64>>> {
        if alg.kind != AlgebraKind::Heisenberg || self.boundary == Boundary::Trace {
            return Ok(None);
        }
        let mu = self.module_weights(alg)?;
        if !mu[0].is_vacuum() || !mu[mu.len() - 1].is_vacuum() {
            return Ok(None);
        }
        if let Boundary::LevelZero { left, right } = self.boundary {
            if left != 0 || right != 0 {
                return Ok(None);
            }
        }
        let w = self.field_weights(alg)?;
        Ok(Some(w.iter().map(|h| h.charge_value().unwrap().to_f64()).collect()))
    }
}

/// Flag overrides, applied on top of the config file.
#[derive(clap::Args, Clone, Debug, Default)]
pub struct Overrides {
    /// JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub algebra: Option<String>,
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Comma-separated charge labels
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub fields: Option<Vec<String>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub components: Option<Vec<usize>>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub modules: Option<Vec<String>>,
    /// vacuum, level-zero or trace
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    /// two-sided or uniform
    #[arg(long, global = true)]
    pub projection: Option<String>,
    #[arg(long, global = true)]
    pub d: Option<f64>,
    #[arg(long, global = true)]
    pub d0: Option<f64>,
    #[arg(long = "truncation", short = 'N', global = true)]
    pub truncation: Option<usize>,
    #[arg(long, short = 'M', global = true)]
    pub cutoff: Option<usize>,
    /// recursive or closed-form
    #[arg(long, global = true)]
    pub construction: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub norm_ladder: Option<Vec<usize>>,
    /// Skip the norm estimates behind the certified bound
    #[arg(long, global = true)]
    pub no_certify: bool,
    #[arg(long, global = true, value_delimiter = ',')]
    pub d_grid: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub sites_grid: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub mmax: Option<usize>,
    #[arg(long, global = true)]
    pub dmax: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub module_cache: Option<PathBuf>,
    /// rational or float
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub memory_budget_mb: Option<f64>,
    /// Write the MPS tensors to this file
    #[arg(long, global = true)]
    pub export: Option<PathBuf>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, v: serde_json::Value) -> anyhow::Result<T> {
    serde_json::from_value(v.clone()).map_err(|_| wzw_mps::Error::InvalidParameter(format!("unknown {what} {v}")).into())
}

impl Overrides {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = RunConfig::load(self.config.as_deref())?;
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    c.$f = v.clone();
                }
            )*};
        }
        set!(algebra, level, fields, components, modules, d, d0, truncation, d_grid, n_grid, eps_grid, sites_grid, mmax, dmax, samples, output, seed, memory_budget_mb);
        if self.cutoff.is_some() {
            c.cutoff = self.cutoff;
        }
        if self.norm_ladder.is_some() {
            c.norm_ladder = self.norm_ladder.clone();
        }
        if self.module_cache.is_some() {
            c.module_cache = self.module_cache.clone();
        }
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        if self.export.is_some() {
            c.export = self.export.clone();
        }
        if self.no_certify {
            c.certify = false;
        }
        if let Some(b) = &self.boundary {
            c.boundary = match b.as_str() {
                "level-zero" => Boundary::LevelZero { left: 0, right: 0 },
                other => parse_enum("boundary", serde_json::json!({ "kind": other }))?,
            };
        }
        if let Some(p) = &self.projection {
            c.projection = parse_enum("projection", serde_json::json!(p))?;
        }
        if let Some(k) = &self.construction {
            c.construction = Some(parse_enum("construction", serde_json::json!(k))?);
        }
        if let Some(m) = &self.mode {
            c.mode = m.parse()?;
        }
        if c.fields.is_empty() {
            bail!(wzw_mps::Error::InvalidParameter("no fields given".into()));
        }
        Ok(c)
    }
}
