//! Finite-dimensional irreps V_λ and the g-intertwiner V_field ⊗ V_source → V_target.
//!
//! su(2) irreps use the ladder basis v_i = (J−)^i v_top, which keeps every
//! matrix element rational; `ortho` holds the same generators in the
//! orthonormal basis e_i = v_i / ‖v_i‖.

use nalgebra::DMatrix;
use num::Signed;

use crate::algebra::{AlgebraData, AlgebraKind, HighestWeight};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{rat, rat_int, Rational, Scalar};

#[derive(Clone, Debug)]
pub struct FiniteIrrep {
    pub weight: HighestWeight,
    pub dim: usize,
    /// ρ(e_a) in the ladder basis; column j is the image of v_j.
    pub ladder: Vec<Mat<Rational>>,
    /// ⟨v_i, v_i⟩ of the (orthogonal) ladder basis.
    pub norms: Vec<Rational>,
    /// ρ(e_a) in the orthonormal basis.
    pub ortho: Vec<DMatrix<f64>>,
}

impl FiniteIrrep {
    pub fn new(alg: &AlgebraData, weight: &HighestWeight) -> Result<Self> {
        match (alg.kind, weight) {
            (AlgebraKind::Heisenberg, HighestWeight::Charge(c)) => {
                let m = Mat::from_fn(1, 1, |_, _| c.clone());
                Ok(Self {
                    weight: weight.clone(),
                    dim: 1,
                    ortho: vec![m.to_f64()],
                    ladder: vec![m],
                    norms: vec![rat_int(1)],
                })
            }
            (AlgebraKind::Simple, HighestWeight::Spin { twice_j }) if alg.is_su2() => Ok(Self::su2(*twice_j)),
            (AlgebraKind::Simple, HighestWeight::Spin { .. }) => {
                Err(Error::Unsupported("irreps are only implemented for the su(2) basis".into()))
            }
            _ => Err(Error::InvalidParameter(format!(
                "weight {weight} does not match algebra {}",
                alg.name
            ))),
        }
    }

    fn su2(t: u32) -> Self {
        let n = t as usize + 1;
        let t = t as i64;
        let c = |i: usize| rat_int(i as i64 * (t - i as i64 + 1));
        let j3 = Mat::from_fn(n, n, |r, col| if r == col { rat(t - 2 * r as i64, 2) } else { rat_int(0) });
        let jp = Mat::from_fn(n, n, |r, col| if col == r + 1 { c(col) } else { rat_int(0) });
        let jm = Mat::from_fn(n, n, |r, col| if r == col + 1 { rat_int(1) } else { rat_int(0) });
        let mut norms = vec![rat_int(1)];
        for i in 1..n {
            let prev = norms[i - 1].clone();
            norms.push(c(i) * prev);
        }
        let ladder = vec![j3, jp, jm];
        let sq: Vec<f64> = norms.iter().map(|x| x.to_f64().sqrt()).collect();
        let ortho = ladder
            .iter()
            .map(|m| DMatrix::from_fn(n, n, |r, col| m.get(r, col).to_f64() * sq[r] / sq[col]))
            .collect();
        Self {
            weight: HighestWeight::Spin { twice_j: t as u32 },
            dim: n,
            ladder,
            norms,
            ortho,
        }
    }
}

/// Intertwiner t: V_field ⊗ V_source → V_target.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    /// `exact[v]` has entries ⟨v_target_i, t(v_field_v ⊗ v_source_j)⟩ in ladder bases.
    pub exact: Vec<Mat<Rational>>,
    /// Orthonormal-basis blocks, scaled so the reference amplitude is 1.
    pub ortho: Vec<DMatrix<f64>>,
    /// (field component, source component) of the unit-normalized amplitude
    /// with the top target component.
    pub reference: (usize, usize),
}

/// Builds the intertwiner by the ladder-operator recursion for the
/// highest-weight vector of V_target inside V_field ⊗ V_source.
/// Returns `None` when the tensor product does not contain V_target.
pub fn intertwiner(alg: &AlgebraData, source: &HighestWeight, field: &HighestWeight, target: &HighestWeight) -> Result<Option<Intertwiner>> {
    let r1 = FiniteIrrep::new(alg, source)?;
    let r3 = FiniteIrrep::new(alg, field)?;
    let r2 = FiniteIrrep::new(alg, target)?;
    if alg.kind == AlgebraKind::Heisenberg {
        let (HighestWeight::Charge(a), HighestWeight::Charge(b), HighestWeight::Charge(c)) = (source, target, field) else {
            unreachable!()
        };
        if b.clone() != a.clone() + c.clone() {
            return Ok(None);
        }
        return Ok(Some(Intertwiner {
            exact: vec![Mat::identity(1)],
            ortho: vec![DMatrix::identity(1, 1)],
            reference: (0, 0),
        }));
    }
    let (t1, t3, t2) = (r1.dim as i64 - 1, r3.dim as i64 - 1, r2.dim as i64 - 1);
    if (t1 + t2 + t3) % 2 != 0 || t2 < (t1 - t3).abs() || t2 > t1 + t3 {
        return Ok(None);
    }
    let s = ((t3 + t1 - t2) / 2) as usize;
    let c1 = |b: usize| rat_int(b as i64 * (t1 - b as i64 + 1));
    let c3 = |a: usize| rat_int(a as i64 * (t3 - a as i64 + 1));

    // w = Σ_a coef[a] v3_a ⊗ v1_{s−a}, killed by J+ ⊗ 1 + 1 ⊗ J+
    let mut w = Mat::<Rational>::zeros(r3.dim, r1.dim);
    let mut coef = rat_int(1);
    w.set(0, s, coef.clone());
    for a in 0..s {
        coef = -coef * c1(s - a) / c3(a + 1);
        w.set(a + 1, s - a - 1, coef.clone());
    }

    let mut exact = vec![Mat::<Rational>::zeros(r2.dim, r1.dim); r3.dim];
    let mut cur = w;
    for i in 0..r2.dim {
        for v in 0..r3.dim {
            for j in 0..r1.dim {
                let x = cur.get(v, j);
                if !x.is_zero() {
                    exact[v].set(i, j, x.clone() * r3.norms[v].clone() * r1.norms[j].clone());
                }
            }
        }
        // apply Δ(J−)
        let mut next = Mat::<Rational>::zeros(r3.dim, r1.dim);
        for v in 0..r3.dim {
            for j in 0..r1.dim {
                let x = cur.get(v, j).clone();
                if x.is_zero() {
                    continue;
                }
                if v + 1 < r3.dim {
                    let y = next.get(v + 1, j).clone() + x.clone();
                    next.set(v + 1, j, y);
                }
                if j + 1 < r1.dim {
                    let y = next.get(v, j + 1).clone() + x;
                    next.set(v, j + 1, y);
                }
            }
        }
        cur = next;
    }

    let sq = |n: &[Rational]| n.iter().map(|x| x.to_f64().sqrt()).collect::<Vec<_>>();
    let (s1, s2, s3) = (sq(&r1.norms), sq(&r2.norms), sq(&r3.norms));
    let mut ortho: Vec<DMatrix<f64>> = exact
        .iter()
        .enumerate()
        .map(|(v, m)| DMatrix::from_fn(r2.dim, r1.dim, |i, j| m.get(i, j).to_f64() / (s2[i] * s3[v] * s1[j])))
        .collect();
    let amp = ortho[0][(0, s)];
    debug_assert!(exact[0].get(0, s).is_positive());
    for m in &mut ortho {
        *m /= amp;
    }
    Ok(Some(Intertwiner {
        exact,
        ortho,
        reference: (0, s),
    }))
}
