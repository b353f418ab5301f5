//! Graded dimensions from characters, independent of any module construction.
//!
//! su(2)_k uses the Weyl–Kac formula
//!   χ_j = Σ_n q^{(k+2)n² + (2j+1)n} (z^{A_n} − z^{−A_n}) / ((z − z⁻¹) Π_m (1−q^m)(1−z²q^m)(1−z⁻²q^m)),
//! with A_n = 2j+1 + 2(k+2)n and z-exponents counting 2·J3.
//! The Heisenberg Fock module has d_m = p(m).

use std::collections::BTreeMap;

use crate::algebra::{AlgebraData, AlgebraKind, HighestWeight};
use crate::error::{Error, Result};

type Laurent = BTreeMap<i64, i128>;

fn mul_series(a: &[Laurent], b: &[Laurent], order: usize) -> Vec<Laurent> {
    let mut out = vec![Laurent::new(); order + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_empty() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            for (ex, cx) in x {
                for (ey, cy) in y {
                    *out[i + j].entry(ex + ey).or_insert(0) += cx * cy;
                }
            }
        }
    }
    for l in &mut out {
        l.retain(|_, c| *c != 0);
    }
    out
}

/// 1/(1 − z^e q^m) truncated at q-order `order`.
fn geometric(e: i64, m: usize, order: usize) -> Vec<Laurent> {
    let mut out = vec![Laurent::new(); order + 1];
    let mut k = 0usize;
    while k * m <= order {
        out[k * m].insert(e * k as i64, 1);
        k += 1;
    }
    out
}

/// Level-m weight multiplicities of the su(2)_k module of spin j, m ≤ order.
/// Keys are 2·J3 eigenvalues.
pub fn su2_weight_multiplicities(level: u32, twice_j: u32, order: usize) -> Vec<Laurent> {
    let k2 = level as i64 + 2;
    let tj = twice_j as i64;
    let mut num = vec![Laurent::new(); order + 1];
    let span = order as i64 + 2;
    for n in -span..=span {
        let qe = k2 * n * n + (tj + 1) * n;
        if qe < 0 || qe as usize > order {
            continue;
        }
        let a = tj + 1 + 2 * k2 * n;
        // (z^a − z^−a)/(z − z⁻¹)
        let (sign, aa) = if a >= 0 { (1i128, a) } else { (-1, -a) };
        let mut e = aa - 1;
        while aa > 0 && e >= -(aa - 1) {
            *num[qe as usize].entry(e).or_insert(0) += sign;
            e -= 2;
        }
    }
    let mut acc = num;
    for m in 1..=order {
        acc = mul_series(&acc, &geometric(0, m, order), order);
        acc = mul_series(&acc, &geometric(2, m, order), order);
        acc = mul_series(&acc, &geometric(-2, m, order), order);
    }
    acc
}

/// Ordinary partition numbers p(0..=order).
pub fn partition_numbers(order: usize) -> Vec<u128> {
    let mut p = vec![0u128; order + 1];
    p[0] = 1;
    for part in 1..=order {
        for m in part..=order {
            p[m] += p[m - part];
        }
    }
    p
}

/// Graded dimensions d_0..=d_order of the irreducible module.
pub fn graded_dimensions(alg: &AlgebraData, weight: &HighestWeight, order: usize) -> Result<Vec<u128>> {
    match (alg.kind, weight) {
        (AlgebraKind::Heisenberg, HighestWeight::Charge(_)) => Ok(partition_numbers(order)),
        (AlgebraKind::Simple, HighestWeight::Spin { twice_j }) if alg.is_su2() => {
            if *twice_j > alg.level {
                return Err(Error::NotIntegrable {
                    weight: weight.to_string(),
                    level: alg.level,
                });
            }
            su2_weight_multiplicities(alg.level, *twice_j, order)
                .iter()
                .map(|l| {
                    let s: i128 = l.values().sum();
                    u128::try_from(s).map_err(|_| Error::InvalidParameter("negative character coefficient".into()))
                })
                .collect()
        }
        _ => Err(Error::Unsupported(format!("no character formula for {weight} of {}", alg.name))),
    }
}
