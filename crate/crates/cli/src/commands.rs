use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use wzw_mps::bounds::{
    bond_dim_bound, fixed_eps_scaling_window, invert_bounds_to_scaling, ln_biguint, log_siegel_bound, raw_state_count, NormInputs,
    PartitionTable,
};
use wzw_mps::cache::{hash_json, Cache};
use wzw_mps::character;
use wzw_mps::field::{Construction, PrimaryFieldSpec, Window};
use wzw_mps::module::GradedModule;
use wzw_mps::mps::{
    assemble_mps, certify, cumulative_dimension, default_norm_ladder, CorrelatorRequest, Workspace, NORM_SAFETY,
};
use wzw_mps::oracle::{free_boson_on_grid, two_point_exponent_fit, TwoPointSample};
use wzw_mps::regularize::{estimate_norm, measure_replacement_error, regularize, Band};
use wzw_mps::{AlgebraData, AlgebraKind, Error, HighestWeight};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped into every output.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
}

impl Meta {
    /// The hash ignores keys that do not change results.
    pub fn new(cfg: &RunConfig) -> anyhow::Result<Self> {
        let mut c = cfg.clone();
        c.output = Default::default();
        c.jobs = None;
        c.module_cache = None;
        c.export = None;
        Ok(Self {
            config_hash: hash_json(&c)?,
            seed: cfg.seed,
            version: VERSION,
        })
    }
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(dir.join(name), format!("{text}\n"))?;
    // a closed stdout (e.g. piped into head) is not an error
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(())
}

/// Writes rows with the provenance columns appended.
fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>], meta: &Meta) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(name))?;
    let mut h: Vec<&str> = header.to_vec();
    h.extend(["config_hash", "seed", "version"]);
    w.write_record(&h)?;
    for r in rows {
        let mut r = r.clone();
        r.extend([meta.config_hash.clone(), meta.seed.to_string(), meta.version.to_string()]);
        w.write_record(&r)?;
    }
    w.flush()?;
    eprintln!("wrote {}", dir.join(name).display());
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn level_dims(alg: &AlgebraData, w: &HighestWeight, reach: usize) -> Vec<f64> {
    match character::graded_dimensions(alg, w, reach) {
        Ok(d) => d.into_iter().map(|x| x as f64).collect(),
        Err(_) => {
            let t = PartitionTable::new(reach, alg.dim);
            t.column(alg.dim).unwrap().iter().map(|x| ln_biguint(x).exp() * w.irrep_dim() as f64).collect()
        }
    }
}

/// Bytes needed by the modules and field blocks of `req`, from graded
/// dimensions (the character where known, raw multipartition counts
/// otherwise).
pub fn memory_estimate(req: &CorrelatorRequest) -> f64 {
    let alg = &req.algebra;
    let reaches = req.reaches();
    let mut bytes = 0.0;
    let mut seen = Vec::new();
    for w in &req.modules {
        if seen.contains(&w) {
            continue;
        }
        seen.push(w);
        let d = level_dims(alg, w, req.cutoff);
        bytes += match alg.kind {
            AlgebraKind::Heisenberg => d.iter().enumerate().map(|(m, x)| x * (m as f64 + 1.0) * 24.0).sum::<f64>(),
            AlgebraKind::Simple => {
                let g = alg.dim as f64;
                (1..d.len()).map(|m| (g * d[m - 1]).powi(2) * 8.0 + g * d[m] * (d[m - 1] + d[m]) * 8.0).sum()
            }
        };
    }
    for j in 0..req.n() {
        let t: f64 = level_dims(alg, &req.modules[j], reaches[j]).iter().sum();
        let s: f64 = level_dims(alg, &req.modules[j + 1], reaches[j + 1]).iter().sum();
        bytes += t * s * 8.0 * req.fields[j].charge.irrep_dim() as f64;
    }
    bytes
}

fn preflight(cfg: &RunConfig, req: &CorrelatorRequest) -> anyhow::Result<f64> {
    let mb = memory_estimate(req) / (1024.0 * 1024.0);
    if mb > cfg.memory_budget_mb {
        return Err(Error::InvalidParameter(format!(
            "estimated memory {mb:.0} MB exceeds the budget of {:.0} MB",
            cfg.memory_budget_mb
        ))
        .into());
    }
    Ok(mb)
}

#[derive(Clone, Debug, Serialize)]
struct ModuleSummary {
    weight: String,
    cutoff: usize,
    graded_dims: Vec<usize>,
    character_dims: Option<Vec<u128>>,
    matches_character: Option<bool>,
    cache_key: Option<String>,
    cache_hit: bool,
    content_hash: String,
    build_seconds: f64,
}

/// Builds (or loads) every module of the chain into a fresh workspace.
fn prepare_workspace(cfg: &RunConfig, alg: &AlgebraData, weights: &[HighestWeight], cutoff: usize) -> anyhow::Result<(Workspace, Vec<ModuleSummary>)> {
    let cache = cfg.module_cache.as_ref().map(Cache::new).transpose()?;
    let mut ws = Workspace::new();
    let mut out = Vec::new();
    let mut seen = Vec::new();
    for w in weights {
        if seen.contains(&w) {
            continue;
        }
        seen.push(w);
        let t = Instant::now();
        let build = || GradedModule::build(alg, w, cutoff, cfg.mode);
        let (module, key, hit) = match &cache {
            Some(c) => {
                let key = Cache::key("module", &(alg.to_json(), w.to_string(), alg.level, cutoff, cfg.mode))?;
                let (m, hit) = c.get_or_build(&key, build)?;
                (m, Some(key), hit)
            }
            None => (build()?, None, false),
        };
        let graded_dims = module.graded_dimensions();
        let character_dims = character::graded_dimensions(alg, w, cutoff).ok();
        let matches_character = character_dims
            .as_ref()
            .map(|c| c.len() == graded_dims.len() && c.iter().zip(&graded_dims).all(|(a, &b)| *a == b as u128));
        out.push(ModuleSummary {
            weight: w.to_string(),
            cutoff,
            graded_dims,
            character_dims,
            matches_character,
            cache_key: key,
            cache_hit: hit,
            content_hash: hash_json(&module)?,
            build_seconds: t.elapsed().as_secs_f64(),
        });
        ws.insert_module(module);
    }
    Ok((ws, out))
}

pub fn module_build(cfg: &RunConfig) -> anyhow::Result<()> {
    let meta = Meta::new(cfg)?;
    let alg = cfg.algebra_data()?;
    let cutoff = cfg.cutoff_for(&[cfg.truncation]);
    let req = cfg.request(&alg, cfg.d, cfg.truncation, cutoff)?;
    let mb = preflight(cfg, &req)?;
    let (mut ws, modules) = prepare_workspace(cfg, &alg, &req.modules, cutoff)?;
    let mps = assemble_mps(&req, &mut ws)?;
    let fields: Vec<_> = mps
        .sites
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let m = &s.field.modes;
            json!({
                "site": j + 1,
                "spec": m.spec,
                "window": m.window,
                "construction": m.construction,
                "structural_zero": m.structural_zero,
                "h_phi": m.h_phi,
            })
        })
        .collect();
    let summary = json!({
        "algebra": alg.name,
        "level": alg.level,
        "cutoff": cutoff,
        "estimated_memory_mb": mb,
        "modules": modules,
        "fields": fields,
        "meta": meta,
    });
    if modules.iter().any(|m| m.matches_character == Some(false)) {
        write_json(&cfg.output, "module_build.json", &summary)?;
        return Err(Error::InvalidParameter("graded dimensions disagree with the character".into()).into());
    }
    write_json(&cfg.output, "module_build.json", &summary)
}

pub fn correlator(cfg: &RunConfig) -> anyhow::Result<()> {
    let meta = Meta::new(cfg)?;
    let alg = cfg.algebra_data()?;
    let cutoff = cfg.cutoff_for(&[cfg.truncation]);
    let req = cfg.request(&alg, cfg.d, cfg.truncation, cutoff)?;
    preflight(cfg, &req)?;
    let t0 = Instant::now();
    let (mut ws, _) = prepare_workspace(cfg, &alg, &req.modules, cutoff)?;
    let t1 = Instant::now();
    let mut mps = assemble_mps(&req, &mut ws)?;
    let t2 = Instant::now();
    if cfg.certify {
        mps.certificate = Some(certify(&req, &mut ws)?);
    }
    let t3 = Instant::now();
    if let Some(path) = &cfg.export {
        mps.export(path)?;
    }
    let cert = mps.certificate.as_ref();
    let result = json!({
        "value_re": mps.value,
        "value_im": 0.0,
        "raw_value": mps.raw_value,
        "certified_bound": cert.map(|c| c.certified_bound),
        "chain_bound": cert.map(|c| c.chain_bound),
        "site_bounds": cert.map(|c| c.sites.iter().map(|s| s.eps).collect::<Vec<_>>()),
        "norm_safety": NORM_SAFETY,
        "bond_dim": mps.bond_dim(),
        "bond_dims": mps.bond_dims,
        "reaches": mps.reaches,
        "prefactor": mps.insertions.prefactor,
        "q": mps.insertions.q,
        "site_parameter": mps.insertions.site_parameter,
        "truncation": cfg.truncation,
        "cutoff": cutoff,
        "structural_zero": mps.structural_zero,
        "timings": {
            "modules_s": (t1 - t0).as_secs_f64(),
            "assemble_s": (t2 - t1).as_secs_f64(),
            "certify_s": (t3 - t2).as_secs_f64(),
            "total_s": (t3 - t0).as_secs_f64(),
        },
        "meta": meta,
    });
    write_json(&cfg.output, "correlator.json", &result)
}

fn construction(req: &CorrelatorRequest) -> Construction {
    req.construction.unwrap_or(match req.algebra.kind {
        AlgebraKind::Heisenberg => Construction::ClosedForm,
        AlgebraKind::Simple => Construction::Recursive,
    })
}

struct SweepRow {
    d: f64,
    trunc: usize,
    value: f64,
    oracle: Option<f64>,
    eps_max: Option<f64>,
    chain_bound: Option<f64>,
    bond_dim: usize,
    cumulative: u128,
    bond_bound: f64,
    site_parameter: f64,
    b_sqrt: Option<f64>,
    measured_replacement: Option<f64>,
}

fn sweep_point(cfg: &RunConfig, alg: &AlgebraData, ws: &mut Workspace, d: f64, trunc: usize, cutoff: usize, index: u64) -> anyhow::Result<SweepRow> {
    let req = cfg.request(alg, d, trunc, cutoff)?;
    let mut mps = assemble_mps(&req, ws)?;
    if cfg.certify {
        mps.certificate = Some(certify(&req, ws)?);
    }
    let oracle = match cfg.oracle_charges(alg)? {
        Some(ch) => Some(free_boson_on_grid(&ch, d, cfg.d0)?),
        None => None,
    };
    let j = (0..=req.n()).max_by_key(|&j| mps.bond_dims[j]).unwrap();
    let module = ws.module(alg, &req.modules[j], cutoff, cfg.mode)?;
    let cumulative = cumulative_dimension(alg, &req.modules[j], Some(&module), mps.reaches[j])?;
    // the assembled sites only hold the kept band; measure on a full window
    let levels = cutoff / 2;
    let measured_replacement = if cfg.samples > 0 {
        let src = ws.module(alg, &req.modules[1], cutoff, cfg.mode)?;
        let tgt = ws.module(alg, &req.modules[0], cutoff, cfg.mode)?;
        let window = Window {
            target_max: cutoff,
            source_max: levels,
            band: None,
        };
        let modes = ws.field(alg, &req.field_spec(0), &src, &tgt, window, construction(&req))?;
        let site = regularize(alg, modes, mps.insertions.site_parameter)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index));
        Some(measure_replacement_error(&site, mps.components[0], trunc, levels, cfg.samples, &mut rng)?)
    } else {
        None
    };
    let cert = mps.certificate.as_ref();
    Ok(SweepRow {
        d,
        trunc,
        value: mps.value,
        oracle,
        eps_max: cert.map(|c| c.sites.iter().map(|s| s.eps).fold(0.0, f64::max)),
        chain_bound: cert.map(|c| c.certified_bound),
        bond_dim: mps.bond_dim(),
        cumulative,
        bond_bound: bond_dim_bound(req.n(), trunc, alg.dim).value,
        site_parameter: mps.insertions.site_parameter,
        b_sqrt: cert.map(|c| c.sites[0].b_sqrt.value),
        measured_replacement,
    })
}

pub fn convergence(cfg: &RunConfig) -> anyhow::Result<()> {
    cfg.check_grids()?;
    let meta = Meta::new(cfg)?;
    let alg = cfg.algebra_data()?;
    let cutoff = cfg.cutoff_for(&cfg.n_grid);
    let n_max = *cfg.n_grid.iter().max().unwrap();
    let d_min = cfg.d_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let probe = cfg.request(&alg, d_min, n_max, cutoff)?;
    preflight(cfg, &probe)?;
    let (ws, _) = prepare_workspace(cfg, &alg, &probe.modules, cutoff)?;
    // one worker per spacing, so fields and norms are shared along N
    let per_d: Vec<Vec<SweepRow>> = cfg
        .d_grid
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut ws = ws.clone();
            cfg.n_grid
                .iter()
                .enumerate()
                .map(|(k, &n)| sweep_point(cfg, &alg, &mut ws, d, n, cutoff, (i * cfg.n_grid.len() + k) as u64))
                .collect::<anyhow::Result<Vec<_>>>()
        })
        .collect::<anyhow::Result<_>>()?;
    let rows: Vec<SweepRow> = per_d.into_iter().flatten().collect();
    let conv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.d),
                fmt((-r.d).exp()),
                r.trunc.to_string(),
                fmt(r.value),
                fmt(0.0),
                opt(r.oracle),
                opt(r.oracle.map(|_| 0.0)),
                opt(r.oracle.map(|o| (r.value - o).abs())),
                opt(r.eps_max),
                opt(r.chain_bound),
                r.bond_dim.to_string(),
                r.cumulative.to_string(),
                fmt(r.bond_bound),
            ]
        })
        .collect();
    write_csv(
        &cfg.output,
        "convergence.csv",
        &[
            "d", "q", "N", "value_re", "value_im", "oracle_re", "oracle_im", "measured_error", "eq5_bound", "chain_bound", "bond_dim",
            "cumulative_dim", "bond_dim_bound",
        ],
        &conv,
        &meta,
    )?;
    let repl: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.site_parameter),
                r.trunc.to_string(),
                opt(r.measured_replacement),
                opt(r.eps_max),
                opt(r.chain_bound),
                opt(r.b_sqrt),
                cutoff.to_string(),
            ]
        })
        .collect();
    write_csv(
        &cfg.output,
        "replacement.csv",
        &["q", "N", "measured_error", "eq5_bound", "chain_bound", "norm_estimate", "cutoff"],
        &repl,
        &meta,
    )
}

/// b̂(√q) and max(‖W_q‖, ‖W_q^N‖ over the N grid) for the first field.
fn measure_norms(cfg: &RunConfig, alg: &AlgebraData, ws: &mut Workspace, d: f64, cutoff: usize) -> anyhow::Result<NormInputs> {
    let req = cfg.request(alg, d, 0, cutoff)?;
    let spec: PrimaryFieldSpec = req.field_spec(0);
    let src = ws.module(alg, &req.modules[1], cutoff, cfg.mode)?;
    let tgt = ws.module(alg, &req.modules[0], cutoff, cfg.mode)?;
    let ladder = cfg.norm_ladder.clone().unwrap_or_else(|| default_norm_ladder(&src, &tgt, 2500));
    let top = *ladder.last().unwrap();
    let modes = ws.field(alg, &spec, &src, &tgt, Window::square(top), construction(&req))?;
    let q = (-d).exp();
    let w_sqrt = regularize(alg, Arc::clone(&modes), q.sqrt())?;
    let w = regularize(alg, modes, q)?;
    let b_sqrt_q = estimate_norm(&w_sqrt, spec.component, Band::All, &ladder)?.value;
    let mut b_q = estimate_norm(&w, spec.component, Band::All, &[top])?.value;
    for &n in &cfg.n_grid {
        b_q = b_q.max(estimate_norm(&w, spec.component, Band::Keep(n), &[top])?.value);
    }
    Ok(NormInputs {
        b_sqrt_q,
        b_q,
        safety: NORM_SAFETY,
    })
}

pub fn bounds(cfg: &RunConfig) -> anyhow::Result<()> {
    cfg.check_grids()?;
    let meta = Meta::new(cfg)?;
    let alg = cfg.algebra_data()?;
    let table = PartitionTable::new(cfg.mmax, cfg.dmax);
    let mut rows = Vec::new();
    for d in 1..=cfg.dmax {
        for m in 0..=cfg.mmax {
            let p = table.get(m, d).unwrap();
            let lp = ln_biguint(p);
            let lb = log_siegel_bound(m, d);
            rows.push(vec![m.to_string(), d.to_string(), p.to_string(), fmt(lp), fmt(lb), (lp <= lb).to_string()]);
        }
    }
    write_csv(&cfg.output, "partitions.csv", &["m", "d", "count", "log_count", "log_bound", "holds"], &rows, &meta)?;

    let vacuum = HighestWeight::vacuum(&alg);
    let mut rows = Vec::new();
    for &n in &cfg.sites_grid {
        for &trunc in &cfg.n_grid {
            let b = bond_dim_bound(n, trunc, alg.dim);
            let actual = cumulative_dimension(&alg, &vacuum, None, n * trunc).ok();
            let raw = raw_state_count(n * trunc, alg.dim, 1);
            rows.push(vec![
                n.to_string(),
                trunc.to_string(),
                alg.dim.to_string(),
                fmt(b.log_value),
                fmt(b.value),
                b.degenerate.to_string(),
                actual.map(|a| a.to_string()).unwrap_or_default(),
                raw.to_string(),
            ]);
        }
    }
    write_csv(
        &cfg.output,
        "bond_bounds.csv",
        &["n", "N", "dim_g", "log_bound", "bound", "degenerate", "actual_dim", "raw_state_count"],
        &rows,
        &meta,
    )?;

    let cutoff = cfg.cutoff.unwrap_or(12);
    let req = cfg.request(&alg, 1.0, 0, cutoff)?;
    let (mut ws, _) = prepare_workspace(cfg, &alg, &req.modules[..2], cutoff)?;
    let eps_min = cfg.eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut rows = Vec::new();
    let mut fits = BTreeMap::new();
    for &d in &cfg.d_grid {
        let norms = measure_norms(cfg, &alg, &mut ws, d, cutoff)?;
        let actual = |level: usize| cumulative_dimension(&alg, &vacuum, None, level).ok();
        let mut per_n = Vec::new();
        for &n in &cfg.sites_grid {
            let model = invert_bounds_to_scaling(&cfg.eps_grid, n, d, alg.dim, &norms, Some(&actual))?;
            for r in &model.rows {
                rows.push(vec![
                    fmt(d),
                    fmt(r.eps),
                    r.n.to_string(),
                    r.truncation.to_string(),
                    fmt(r.log_chain_bound),
                    fmt(r.log_bond_bound),
                    r.actual_bond_dim.map(|a| a.to_string()).unwrap_or_default(),
                ]);
            }
            per_n.push(json!({
                "n": n,
                "truncation_slope": model.truncation_fit.slope,
                "expected_slope": 4.0 / d,
                "truncation_fit": model.truncation_fit,
                "log_bond_fit": model.log_bond_fit,
                "kappa": model.kappa,
                "actual_bond_fit": model.actual_bond_fit,
            }));
        }
        let fixed = fixed_eps_scaling_window(eps_min, d, alg.dim, &norms, 50.0, 300.0).map(|(r, fit)| {
            json!({
                "eps": eps_min,
                "chain_lengths": r.iter().map(|x| x.n).collect::<Vec<_>>(),
                "fit": fit,
                "expected_slope": 2.0 * std::f64::consts::PI * (alg.dim as f64 / 6.0).sqrt(),
            })
        });
        fits.insert(
            format!("{d}"),
            json!({
                "norms": norms,
                "fixed_n": per_n,
                "fixed_eps": fixed.unwrap_or_else(|e| json!({ "error": e.to_string() })),
            }),
        );
    }
    write_csv(
        &cfg.output,
        "scaling.csv",
        &["d", "eps", "n", "N_min", "log_chain_bound", "log_bond_bound", "actual_bond_dim"],
        &rows,
        &meta,
    )?;
    write_json(&cfg.output, "fits.json", &json!({ "fits": fits, "meta": meta }))
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: Option<f64>,
    reference: Option<f64>,
    deviation: Option<f64>,
    tolerance: f64,
    passed: bool,
    note: Option<String>,
}

impl Check {
    fn compare(name: &str, value: f64, reference: f64, tolerance: f64, relative: bool) -> Self {
        let dev = if relative { ((value - reference) / reference).abs() } else { (value - reference).abs() };
        Check {
            name: name.into(),
            value: Some(value),
            reference: Some(reference),
            deviation: Some(dev),
            tolerance,
            passed: dev <= tolerance,
            note: None,
        }
    }

    fn failed(name: &str, tolerance: f64, e: anyhow::Error) -> Self {
        Check {
            name: name.into(),
            value: None,
            reference: None,
            deviation: None,
            tolerance,
            passed: false,
            note: Some(e.to_string()),
        }
    }
}

fn heisenberg_config(charges: &[&str]) -> RunConfig {
    RunConfig {
        algebra: "heisenberg".into(),
        fields: charges.iter().map(|s| s.to_string()).collect(),
        ..RunConfig::default()
    }
}

fn two_point_samples(cfg: &RunConfig, spacings: &[f64], n_low: usize, n_high: usize) -> anyhow::Result<Vec<TwoPointSample>> {
    let alg = cfg.algebra_data()?;
    let cutoff = cfg.cutoff_for(&[n_high]);
    let req = cfg.request(&alg, 1.0, n_high, cutoff)?;
    let (ws, _) = prepare_workspace(cfg, &alg, &req.modules, cutoff)?;
    spacings
        .par_iter()
        .map(|&d| {
            let mut ws = ws.clone();
            let hi = assemble_mps(&cfg.request(&alg, d, n_high, cutoff)?, &mut ws)?.value;
            let lo = assemble_mps(&cfg.request(&alg, d, n_low, cutoff)?, &mut ws)?.value;
            Ok(TwoPointSample {
                spacing: d,
                value: hi,
                converged: ((hi - lo) / hi).abs() < 1e-4,
            })
        })
        .collect()
}

/// Oracle-vs-pipeline comparisons on fixed reference instances.
pub fn verify(cfg: &RunConfig) -> anyhow::Result<bool> {
    let meta = Meta::new(cfg)?;
    let mut checks = Vec::new();
    let spacings = [1.0, 1.25, 1.5, 2.0, 2.5, 3.0];

    for (charges, tol) in [(&["1", "-1"][..], 1e-3), (&["1", "-1", "1", "-1"][..], 1e-2)] {
        let name = format!("free boson {}-point, d = 1, N = 12", charges.len());
        let c = RunConfig {
            cutoff: Some(30),
            truncation: 12,
            ..heisenberg_config(charges)
        };
        let run = || -> anyhow::Result<(f64, f64, Option<f64>)> {
            let alg = c.algebra_data()?;
            let req = c.request(&alg, 1.0, 12, 30)?;
            let (mut ws, _) = prepare_workspace(&c, &alg, &req.modules, 30)?;
            let mut mps = assemble_mps(&req, &mut ws)?;
            if charges.len() == 2 {
                mps.certificate = Some(certify(&req, &mut ws)?);
            }
            let oracle = free_boson_on_grid(&charges.iter().map(|s| s.parse().unwrap()).collect::<Vec<f64>>(), 1.0, 0.0)?;
            Ok((mps.value, oracle, mps.certificate.map(|x| x.certified_bound)))
        };
        match run() {
            Ok((v, o, bound)) => {
                checks.push(Check::compare(&name, v, o, tol, true));
                if let Some(b) = bound {
                    let mut ch = Check::compare("certified bound dominates the 2-point deviation", (v - o).abs(), 0.0, b, false);
                    ch.note = Some(format!("bound {b:e}"));
                    checks.push(ch);
                }
            }
            Err(e) => checks.push(Check::failed(&name, tol, e)),
        }
    }

    let fits = [
        ("heisenberg 2h for charge 1", heisenberg_config(&["1", "-1"]), 1.0, 14, 16),
        (
            "su(2)_1 2h for spin 1/2",
            RunConfig {
                algebra: "su2".into(),
                fields: vec!["1/2".into(), "1/2".into()],
                components: vec![1, 0],
                ..RunConfig::default()
            },
            0.5,
            8,
            10,
        ),
    ];
    for (name, c, expected, lo, hi) in fits {
        match two_point_samples(&c, &spacings, lo, hi).and_then(|s| Ok(two_point_exponent_fit(&s)?)) {
            Ok(f) => checks.push(Check::compare(name, f.two_h, expected, 0.01, false)),
            Err(e) => checks.push(Check::failed(name, 0.01, e)),
        }
    }

    let zero = RunConfig {
        algebra: "su2".into(),
        fields: vec!["1/2".into(), "1/2".into()],
        modules: vec!["0".into(), "0".into(), "0".into()],
        truncation: 2,
        ..RunConfig::default()
    };
    let z = (|| -> anyhow::Result<(f64, bool)> {
        let alg = zero.algebra_data()?;
        let req = zero.request(&alg, 1.0, 2, 2)?;
        let mps = assemble_mps(&req, &mut Workspace::new())?;
        Ok((mps.value, mps.structural_zero))
    })();
    match z {
        Ok((v, flag)) => {
            let mut ch = Check::compare("fusion-forbidden chain is exactly zero", v, 0.0, 0.0, false);
            ch.passed &= flag;
            checks.push(ch);
        }
        Err(e) => checks.push(Check::failed("fusion-forbidden chain is exactly zero", 0.0, e)),
    }

    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    write_json(&cfg.output, "verify.json", &json!({ "passed": passed, "checks": checks, "meta": meta }))?;
    Ok(passed)
}
