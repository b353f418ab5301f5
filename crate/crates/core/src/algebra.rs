//! Lie-algebraic input data: structure constants, invariant form, adjoint
//! map and level, plus weight labels and the integrability/fusion gates.

use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rat, rat_int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Simple,
    Heisenberg,
}

/// Generators e_0..e_{dim-1} with `[e_a, e_b] = Σ_c f[a][b][c] e_c`,
/// invariant form `kappa`, and `e_a(n)† = sign · e_{τ(a)}(−n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraData {
    pub name: String,
    pub kind: AlgebraKind,
    pub dim: usize,
    pub structure: Vec<Vec<Vec<Rational>>>,
    pub kappa: Vec<Vec<Rational>>,
    pub adjoint: Vec<(usize, i8)>,
    pub level: u32,
}

impl AlgebraData {
    pub fn heisenberg() -> Self {
        Self {
            name: "heisenberg".into(),
            kind: AlgebraKind::Heisenberg,
            dim: 1,
            structure: vec![vec![vec![rat_int(0)]]],
            kappa: vec![vec![rat_int(1)]],
            adjoint: vec![(0, 1)],
            level: 1,
        }
    }

    /// su(2) in the basis (J3, J+, J−) with κ(J3,J3) = 1/2, κ(J±,J∓) = 1.
    pub fn su2(level: u32) -> Self {
        let z = || rat_int(0);
        let mut f = vec![vec![vec![z(); 3]; 3]; 3];
        f[0][1][1] = rat_int(1);
        f[1][0][1] = rat_int(-1);
        f[0][2][2] = rat_int(-1);
        f[2][0][2] = rat_int(1);
        f[1][2][0] = rat_int(2);
        f[2][1][0] = rat_int(-2);
        let mut kappa = vec![vec![z(); 3]; 3];
        kappa[0][0] = rat(1, 2);
        kappa[1][2] = rat_int(1);
        kappa[2][1] = rat_int(1);
        Self {
            name: "su2".into(),
            kind: AlgebraKind::Simple,
            dim: 3,
            structure: f,
            kappa,
            adjoint: vec![(0, 1), (2, 1), (1, 1)],
            level,
        }
    }

    pub fn preset(name: &str, level: u32) -> Result<Self> {
        match name {
            "heisenberg" => {
                let mut a = Self::heisenberg();
                a.level = level;
                Ok(a)
            }
            "su2" => Ok(Self::su2(level)),
            other => Err(Error::InvalidAlgebra(format!("unknown preset '{other}'"))),
        }
    }

    /// Whether the data is the su(2) basis this crate knows irreps for.
    pub fn is_su2(&self) -> bool {
        let p = Self::su2(self.level);
        self.kind == AlgebraKind::Simple
            && self.structure == p.structure
            && self.kappa == p.kappa
            && self.adjoint == p.adjoint
    }

    pub fn tau(&self, a: usize) -> usize {
        self.adjoint[a].0
    }

    pub fn sigma(&self, a: usize) -> f64 {
        self.adjoint[a].1 as f64
    }

    /// Nonzero structure constants of `[e_a, e_b]` as (c, coefficient).
    pub fn bracket(&self, a: usize, b: usize) -> Vec<(usize, Rational)> {
        self.structure[a][b]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| (c, v.clone()))
            .collect()
    }

    /// Canonical JSON encoding, also used for cache keys.
    pub fn to_json(&self) -> Value {
        let r = |x: &Rational| Value::String(x.to_string());
        serde_json::json!({
            "name": self.name,
            "kind": self.kind,
            "dim": self.dim,
            "f": self.structure.iter().map(|a| a.iter().map(|b| b.iter().map(r).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "kappa": self.kappa.iter().map(|a| a.iter().map(r).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "adjoint": self.adjoint.iter().map(|(t, s)| serde_json::json!([t, s])).collect::<Vec<_>>(),
            "level": self.level,
        })
    }

    /// Reads `{kind, dim, f, kappa, adjoint, level}`. Entries may be numbers
    /// or rational strings; `adjoint` entries are an index or `[index, sign]`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidAlgebra(m.to_string());
        let kind: AlgebraKind = serde_json::from_value(v.get("kind").cloned().ok_or_else(|| bad("missing kind"))?)
            .map_err(|e| bad(&format!("kind: {e}")))?;
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing dim"))? as usize;
        let level = v.get("level").and_then(Value::as_u64).unwrap_or(1) as u32;
        let num = |x: &Value| -> Result<Rational> {
            match x {
                Value::Number(n) => n
                    .as_i64()
                    .map(rat_int)
                    .or_else(|| n.as_f64().and_then(crate::scalar::decimal_to_rational))
                    .ok_or_else(|| bad("non-rational number")),
                Value::String(s) => parse_rational(s).ok_or_else(|| bad(&format!("bad rational '{s}'"))),
                _ => Err(bad("expected number")),
            }
        };
        let arr = |x: Option<&Value>, what: &str| -> Result<Vec<Value>> {
            x.and_then(Value::as_array).cloned().ok_or_else(|| bad(&format!("missing {what}")))
        };
        let mut structure = Vec::with_capacity(dim);
        for a in arr(v.get("f"), "f")? {
            let mut row = Vec::with_capacity(dim);
            for b in arr(Some(&a), "f row")? {
                row.push(arr(Some(&b), "f entry")?.iter().map(num).collect::<Result<Vec<_>>>()?);
            }
            structure.push(row);
        }
        let kappa = arr(v.get("kappa"), "kappa")?
            .iter()
            .map(|row| arr(Some(row), "kappa row")?.iter().map(num).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let adjoint = arr(v.get("adjoint"), "adjoint")?
            .iter()
            .map(|e| match e {
                Value::Number(n) => n.as_u64().map(|t| (t as usize, 1i8)).ok_or_else(|| bad("adjoint index")),
                Value::Array(p) if p.len() == 2 => {
                    let t = p[0].as_u64().ok_or_else(|| bad("adjoint index"))? as usize;
                    let s = p[1].as_i64().ok_or_else(|| bad("adjoint sign"))?;
                    if s != 1 && s != -1 {
                        return Err(bad("adjoint sign must be ±1"));
                    }
                    Ok((t, s as i8))
                }
                _ => Err(bad("adjoint entry")),
            })
            .collect::<Result<Vec<_>>>()?;
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or(match kind {
                AlgebraKind::Heisenberg => "heisenberg",
                AlgebraKind::Simple => "custom",
            })
            .to_string();
        let alg = Self {
            name,
            kind,
            dim,
            structure,
            kappa,
            adjoint,
            level,
        };
        alg.check_shapes()?;
        Ok(alg)
    }

    fn check_shapes(&self) -> Result<()> {
        let d = self.dim;
        let ok = d > 0
            && self.structure.len() == d
            && self.structure.iter().all(|r| r.len() == d && r.iter().all(|c| c.len() == d))
            && self.kappa.len() == d
            && self.kappa.iter().all(|r| r.len() == d)
            && self.adjoint.len() == d
            && self.adjoint.iter().all(|&(t, _)| t < d);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidAlgebra(format!("array shapes inconsistent with dim {d}")))
        }
    }
}

impl Serialize for AlgebraData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        AlgebraData::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// One checked identity in a validation report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn into_result(self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::InvalidAlgebra(format!(
                "{} failed: {}",
                c.name,
                c.detail.clone().unwrap_or_default()
            ))),
        }
    }
}

/// Checks every identity the affine commutator relies on, exactly.
pub fn validate_algebra(alg: &AlgebraData) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, failure: Option<String>| {
        checks.push(CheckOutcome {
            name,
            passed: failure.is_none(),
            detail: failure,
        })
    };
    if let Err(e) = alg.check_shapes() {
        push("shapes", Some(e.to_string()));
        return ValidationReport { checks };
    }
    let d = alg.dim;
    let f = &alg.structure;
    let k = &alg.kappa;

    let mut fail = None;
    'anti: for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                if f[a][b][c] != -f[b][a][c].clone() {
                    fail = Some(format!("f[{a}][{b}][{c}] != -f[{b}][{a}][{c}]"));
                    break 'anti;
                }
            }
        }
    }
    push("antisymmetry", fail);

    // [a,[b,c]] + [b,[c,a]] + [c,[a,b]] = 0
    let mut fail = None;
    'jacobi: for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let mut s = Rational::zero();
                    for x in 0..d {
                        s += f[b][c][x].clone() * f[a][x][e].clone();
                        s += f[c][a][x].clone() * f[b][x][e].clone();
                        s += f[a][b][x].clone() * f[c][x][e].clone();
                    }
                    if !s.is_zero() {
                        fail = Some(format!("generators ({a},{b},{c}), component {e}: residual {s}"));
                        break 'jacobi;
                    }
                }
            }
        }
    }
    push("jacobi", fail);

    let mut fail = None;
    'sym: for a in 0..d {
        for b in 0..d {
            if k[a][b] != k[b][a] {
                fail = Some(format!("kappa[{a}][{b}] != kappa[{b}][{a}]"));
                break 'sym;
            }
        }
    }
    push("form_symmetry", fail);

    // κ([a,b],c) + κ(b,[a,c]) = 0
    let mut fail = None;
    'inv: for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut s = Rational::zero();
                for x in 0..d {
                    s += f[a][b][x].clone() * k[x][c].clone();
                    s += f[a][c][x].clone() * k[b][x].clone();
                }
                if !s.is_zero() {
                    fail = Some(format!("generators ({a},{b},{c}): residual {s}"));
                    break 'inv;
                }
            }
        }
    }
    push("form_invariance", fail);

    let mut fail = None;
    for a in 0..d {
        let (t, s) = alg.adjoint[a];
        let (tt, ts) = alg.adjoint[t];
        if tt != a || s * ts != 1 {
            fail = Some(format!("adjoint of generator {a} is not an involution"));
            break;
        }
    }
    push("adjoint_involution", fail);

    // [a(n), b(m)]† = [b(m)†, a(n)†] fixes how τ acts on brackets and on κ.
    let mut fail = None;
    'adj: for a in 0..d {
        for b in 0..d {
            let (ta, sa) = alg.adjoint[a];
            let (tb, sb) = alg.adjoint[b];
            let sab = rat_int((sa * sb) as i64);
            for e in 0..d {
                let mut lhs = Rational::zero();
                for c in 0..d {
                    if alg.adjoint[c].0 == e {
                        lhs += f[a][b][c].clone() * rat_int(alg.adjoint[c].1 as i64);
                    }
                }
                let rhs = sab.clone() * f[tb][ta][e].clone();
                if lhs != rhs {
                    fail = Some(format!("bracket of ({a},{b}) not compatible with adjoint at component {e}"));
                    break 'adj;
                }
            }
            if k[a][b] != sab.clone() * k[tb][ta].clone() {
                fail = Some(format!("kappa({a},{b}) not compatible with adjoint"));
                break 'adj;
            }
        }
    }
    push("adjoint_compatibility", fail);

    if alg.kind == AlgebraKind::Heisenberg {
        let ok = d == 1 && f[0][0][0].is_zero() && k[0][0].is_one();
        push(
            "heisenberg_shape",
            (!ok).then(|| "heisenberg requires dim 1, f = 0, kappa = 1".to_string()),
        );
    }
    push("level", (alg.level == 0).then(|| "level must be positive".to_string()));

    ValidationReport { checks }
}

/// Highest-weight label: an su(2) spin (stored as 2j) or a Heisenberg charge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HighestWeight {
    Spin { twice_j: u32 },
    Charge(Rational),
}

impl HighestWeight {
    pub fn spin(twice_j: u32) -> Self {
        HighestWeight::Spin { twice_j }
    }

    pub fn charge(r: Rational) -> Self {
        HighestWeight::Charge(r)
    }

    pub fn charge_value(&self) -> Option<&Rational> {
        match self {
            HighestWeight::Charge(c) => Some(c),
            HighestWeight::Spin { .. } => None,
        }
    }

    pub fn twice_spin(&self) -> Option<u32> {
        match self {
            HighestWeight::Spin { twice_j } => Some(*twice_j),
            HighestWeight::Charge(_) => None,
        }
    }

    pub fn vacuum(alg: &AlgebraData) -> Self {
        match alg.kind {
            AlgebraKind::Heisenberg => HighestWeight::Charge(Rational::zero()),
            AlgebraKind::Simple => HighestWeight::Spin { twice_j: 0 },
        }
    }

    pub fn is_vacuum(&self) -> bool {
        match self {
            HighestWeight::Spin { twice_j } => *twice_j == 0,
            HighestWeight::Charge(c) => c.is_zero(),
        }
    }

    /// Parses a bare label ("1/2", "-1", "0.5") in the convention of `alg`.
    pub fn parse_for(alg: &AlgebraData, s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(w) = s.parse::<HighestWeight>() {
            return Ok(w);
        }
        let r = parse_rational(s).ok_or_else(|| Error::InvalidParameter(format!("bad weight label '{s}'")))?;
        match alg.kind {
            AlgebraKind::Heisenberg => Ok(HighestWeight::Charge(r)),
            AlgebraKind::Simple => {
                let twice = r * rat_int(2);
                if !twice.is_integer() || twice.is_negative() {
                    return Err(Error::InvalidParameter(format!("'{s}' is not a spin")));
                }
                let t = twice.to_integer();
                Ok(HighestWeight::Spin {
                    twice_j: u32::try_from(t).map_err(|_| Error::InvalidParameter(format!("spin '{s}' too large")))?,
                })
            }
        }
    }

    /// Dimension of the finite irrep V_λ.
    pub fn irrep_dim(&self) -> usize {
        match self {
            HighestWeight::Spin { twice_j } => *twice_j as usize + 1,
            HighestWeight::Charge(_) => 1,
        }
    }
}

impl fmt::Display for HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HighestWeight::Spin { twice_j } if twice_j % 2 == 0 => write!(f, "spin:{}", twice_j / 2),
            HighestWeight::Spin { twice_j } => write!(f, "spin:{}/2", twice_j),
            HighestWeight::Charge(c) => write!(f, "charge:{c}"),
        }
    }
}

impl FromStr for HighestWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad weight label '{s}'"));
        let (tag, val) = s.split_once(':').ok_or_else(bad)?;
        let r = parse_rational(val).ok_or_else(bad)?;
        match tag.trim() {
            "spin" => {
                let twice = r * rat_int(2);
                if !twice.is_integer() || twice.is_negative() {
                    return Err(bad());
                }
                Ok(HighestWeight::Spin {
                    twice_j: u32::try_from(twice.to_integer()).map_err(|_| bad())?,
                })
            }
            "charge" => Ok(HighestWeight::Charge(r)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for HighestWeight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for HighestWeight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_kind(alg: &AlgebraData, w: &HighestWeight) -> Result<()> {
    match (alg.kind, w) {
        (AlgebraKind::Heisenberg, HighestWeight::Charge(_)) => Ok(()),
        (AlgebraKind::Simple, HighestWeight::Spin { .. }) if alg.is_su2() => Ok(()),
        (AlgebraKind::Simple, HighestWeight::Spin { .. }) => Err(Error::Unsupported(
            "weight labels are only implemented for the su(2) basis".into(),
        )),
        _ => Err(Error::InvalidParameter(format!("weight {w} does not match algebra {}", alg.name))),
    }
}

/// ⟨θ, λ⟩ ≤ k; always true for the Heisenberg algebra.
pub fn integrable(alg: &AlgebraData, w: &HighestWeight) -> bool {
    match w {
        HighestWeight::Spin { twice_j } => *twice_j <= alg.level,
        HighestWeight::Charge(_) => true,
    }
}

/// L0 eigenvalue of the highest-weight vector.
pub fn conformal_weight(alg: &AlgebraData, w: &HighestWeight) -> Result<Rational> {
    check_kind(alg, w)?;
    if !integrable(alg, w) {
        return Err(Error::NotIntegrable {
            weight: w.to_string(),
            level: alg.level,
        });
    }
    match w {
        HighestWeight::Spin { twice_j } => {
            let t = *twice_j as i64;
            // j(j+1)/(k+2) with j = t/2
            Ok(rat(t * (t + 2), 4 * (alg.level as i64 + 2)))
        }
        HighestWeight::Charge(c) => {
            let denom = rat_int(2 * alg.level as i64) * alg.kappa[0][0].clone();
            Ok(c.clone() * c.clone() / denom)
        }
    }
}

/// Whether a nonzero primary field with charge `field` maps M_source → M_target.
pub fn fusion_allowed(alg: &AlgebraData, source: &HighestWeight, target: &HighestWeight, field: &HighestWeight) -> bool {
    match (source, target, field) {
        (
            HighestWeight::Spin { twice_j: j1 },
            HighestWeight::Spin { twice_j: j2 },
            HighestWeight::Spin { twice_j: j3 },
        ) => {
            let (j1, j2, j3, k) = (*j1 as i64, *j2 as i64, *j3 as i64, alg.level as i64);
            if j1 > k || j2 > k || j3 > k {
                return false;
            }
            (j1 + j2 + j3) % 2 == 0 && (j1 - j3).abs() <= j2 && j2 <= (j1 + j3).min(2 * k - j1 - j3)
        }
        (HighestWeight::Charge(a), HighestWeight::Charge(b), HighestWeight::Charge(c)) => {
            b.clone() == a.clone() + c.clone()
        }
        _ => false,
    }
}
