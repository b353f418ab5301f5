//! Raw PBW construction: decorated monomials b_1(−m_1)…b_k(−m_k)v_i, their
//! normal-ordered mode action, and the contravariant Gram matrix.
//!
//! Everything here is exact and exponential in the level; it serves small
//! levels and cross-checks the level-by-level construction in `module`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::algebra::{AlgebraData, HighestWeight};
use crate::error::{Error, Result};
use crate::irrep::FiniteIrrep;
use crate::linalg::{inverse_sqrt, pivoted_selection, Mat};
use crate::scalar::{rat_int, Rational, Scalar};

/// One factor b(−m) of a decoration: (m, generator index b).
pub type Factor = (u32, usize);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState {
    /// Index into the ladder basis of V_λ.
    pub hw: usize,
    /// Factors sorted descending by (mode, generator).
    pub decoration: Vec<Factor>,
}

impl BasisState {
    pub fn level(&self) -> u32 {
        self.decoration.iter().map(|f| f.0).sum()
    }
}

pub type RawVector = BTreeMap<BasisState, Rational>;

fn add_to(v: &mut RawVector, s: BasisState, c: Rational) {
    if c.is_zero() {
        return;
    }
    match v.entry(s) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// All canonical decorations of total level `m` (multipartitions of m with
/// `dim` colours).
pub fn decorations(dim: usize, m: u32) -> Vec<Vec<Factor>> {
    fn rec(rem: u32, max: Factor, dim: usize, cur: &mut Vec<Factor>, out: &mut Vec<Vec<Factor>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for mode in (1..=rem.min(max.0)).rev() {
            let top_gen = if mode == max.0 { max.1 } else { dim - 1 };
            for g in (0..=top_gen).rev() {
                cur.push((mode, g));
                rec(rem - mode, (mode, g), dim, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(m, (m, dim.saturating_sub(1)), dim, &mut Vec::new(), &mut out);
    out
}

/// Canonical monomial basis of level `m`; count = p(m, dim g) · dim V_λ.
pub fn enumerate_basis(alg: &AlgebraData, weight: &HighestWeight, m: u32) -> Vec<BasisState> {
    let decs = decorations(alg.dim, m);
    let mut out = Vec::with_capacity(decs.len() * weight.irrep_dim());
    for d in decs {
        for hw in 0..weight.irrep_dim() {
            out.push(BasisState {
                hw,
                decoration: d.clone(),
            });
        }
    }
    out
}

/// Exact PBW realization of the module generated from V_λ.
#[derive(Clone, Debug)]
pub struct RawModule {
    pub alg: AlgebraData,
    pub irrep: FiniteIrrep,
}

impl RawModule {
    pub fn new(alg: &AlgebraData, weight: &HighestWeight) -> Result<Self> {
        Ok(Self {
            alg: alg.clone(),
            irrep: FiniteIrrep::new(alg, weight)?,
        })
    }

    /// Applies a(n) to a vector, returning the normal-ordered result.
    pub fn act(&self, a: usize, n: i64, v: &RawVector) -> RawVector {
        let mut out = RawVector::new();
        for (s, c) in v {
            for (t, x) in self.act_monomial(a, n, &s.decoration, s.hw) {
                add_to(&mut out, t, x * c.clone());
            }
        }
        out
    }

    fn act_monomial(&self, a: usize, n: i64, word: &[Factor], hw: usize) -> RawVector {
        let mut out = RawVector::new();
        let Some((&(m1, b1), rest)) = word.split_first() else {
            if n < 0 {
                out.insert(
                    BasisState {
                        hw,
                        decoration: vec![(-n as u32, a)],
                    },
                    rat_int(1),
                );
            } else if n == 0 {
                let rho = &self.irrep.ladder[a];
                for r in 0..self.irrep.dim {
                    add_to(
                        &mut out,
                        BasisState {
                            hw: r,
                            decoration: vec![],
                        },
                        rho.get(r, hw).clone(),
                    );
                }
            }
            return out;
        };
        if n < 0 && (-n as u32, a) >= (m1, b1) {
            let mut d = Vec::with_capacity(word.len() + 1);
            d.push((-n as u32, a));
            d.extend_from_slice(word);
            out.insert(BasisState { hw, decoration: d }, rat_int(1));
            return out;
        }
        // a(n) b1(−m1) R = b1(−m1) a(n) R + [a,b1](n − m1) R + δ_{n,m1} n k κ(a,b1) R
        for (s, c) in self.act_monomial(a, n, rest, hw) {
            for (t, x) in self.act_monomial(b1, -(m1 as i64), &s.decoration, s.hw) {
                add_to(&mut out, t, x * c.clone());
            }
        }
        for (cgen, f) in self.alg.bracket(a, b1) {
            for (t, x) in self.act_monomial(cgen, n - m1 as i64, rest, hw) {
                add_to(&mut out, t, x * f.clone());
            }
        }
        if n == m1 as i64 {
            let central = rat_int(n * self.alg.level as i64) * self.alg.kappa[a][b1].clone();
            add_to(
                &mut out,
                BasisState {
                    hw,
                    decoration: rest.to_vec(),
                },
                central,
            );
        }
        out
    }

    /// Contravariant pairing ⟨u, v⟩, peeling factors of `u` with
    /// b(−m)† = σ τ(b)(m).
    pub fn pair(&self, u: &BasisState, v: &RawVector) -> Rational {
        match u.decoration.split_first() {
            None => v
                .iter()
                .filter(|(s, _)| s.decoration.is_empty() && s.hw == u.hw)
                .map(|(_, c)| c.clone() * self.irrep.norms[u.hw].clone())
                .fold(Rational::zero(), |a, b| a + b),
            Some((&(m, b), rest)) => {
                let (tb, sign) = self.alg.adjoint[b];
                let lowered = self.act(tb, m as i64, v);
                let inner = BasisState {
                    hw: u.hw,
                    decoration: rest.to_vec(),
                };
                self.pair(&inner, &lowered) * rat_int(sign as i64)
            }
        }
    }

    pub fn gram(&self, states: &[BasisState]) -> Mat<Rational> {
        let n = states.len();
        let mut g = Mat::zeros(n, n);
        for j in 0..n {
            let v: RawVector = [(states[j].clone(), rat_int(1))].into_iter().collect();
            for i in 0..=j {
                let x = self.pair(&states[i], &v);
                g.set(i, j, x.clone());
                g.set(j, i, x);
            }
        }
        g
    }

    /// Gram matrix, exact rank and orthonormal quotient basis at level `m`.
    pub fn gram_and_quotient(&self, m: u32) -> Result<RawLevel> {
        let states = enumerate_basis(&self.alg, &self.irrep.weight, m);
        let gram = self.gram(&states);
        let sel = pivoted_selection(&gram);
        if let Some(p) = sel.negative {
            return Err(Error::IntegrabilityViolation { level: m as usize, pivot: p });
        }
        let mut pivots = sel.pivots.clone();
        pivots.sort_unstable();
        let h = gram.select(&pivots, &pivots).to_f64();
        let q = inverse_sqrt(&h)?;
        let mut quotient = DMatrix::zeros(states.len(), pivots.len());
        for (r, &p) in pivots.iter().enumerate() {
            for c in 0..pivots.len() {
                quotient[(p, c)] = q[(r, c)];
            }
        }
        Ok(RawLevel {
            rank: pivots.len(),
            states,
            gram,
            pivots,
            quotient,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RawLevel {
    pub states: Vec<BasisState>,
    pub gram: Mat<Rational>,
    pub rank: usize,
    pub pivots: Vec<usize>,
    /// Columns are orthonormal quotient vectors in raw coordinates.
    pub quotient: DMatrix<f64>,
}

impl RawLevel {
    pub fn gram_f64(&self) -> DMatrix<f64> {
        self.gram.to_f64()
    }

    pub fn max_abs_gram(&self) -> f64 {
        self.gram.max_abs().to_f64()
    }
}
