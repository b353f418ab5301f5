use proptest::prelude::*;
use wzw_mps::bounds::{identical_chain_bound, identical_chain_log_bound, invert_bounds_to_scaling, minimal_truncation, NormInputs};
use wzw_mps::field::{Construction, PrimaryFieldSpec, Window};
use wzw_mps::module::NumericMode;
use wzw_mps::mps::{assemble_mps, map_insertions, Boundary, CorrelatorRequest, FieldInsertion, Projection, Workspace};
use wzw_mps::oracle::{free_boson_n_point, free_boson_on_grid};
use wzw_mps::regularize::{error_bound_chain, error_bound_single, regularize, Band};
use wzw_mps::scalar::rat_int;
use wzw_mps::{AlgebraData, Error, HighestWeight};

use num::complex::Complex64;

fn charge(c: i64) -> HighestWeight {
    HighestWeight::charge(rat_int(c))
}

fn two_point(d: f64, d0: f64, n: usize, boundary: Boundary) -> CorrelatorRequest {
    CorrelatorRequest {
        algebra: AlgebraData::heisenberg(),
        fields: vec![
            FieldInsertion { charge: charge(1), component: 0 },
            FieldInsertion { charge: charge(-1), component: 0 },
        ],
        modules: vec![charge(0), charge(-1), charge(0)],
        spacing: d,
        offset: d0,
        truncation: n,
        cutoff: 16,
        projection: Projection::TwoSided,
        boundary,
        mode: NumericMode::Float,
        construction: None,
        norm_ladder: None,
    }
}

fn su2_two_point(n: usize, mode: NumericMode) -> CorrelatorRequest {
    let h = HighestWeight::spin(1);
    CorrelatorRequest {
        algebra: AlgebraData::su2(1),
        fields: vec![FieldInsertion { charge: h.clone(), component: 1 }, FieldInsertion { charge: h.clone(), component: 0 }],
        modules: vec![HighestWeight::spin(0), h, HighestWeight::spin(0)],
        spacing: 1.0,
        offset: 0.0,
        truncation: n,
        cutoff: 4,
        projection: Projection::TwoSided,
        boundary: Boundary::Vacuum,
        mode,
        construction: Some(Construction::Recursive),
        norm_ladder: None,
    }
}

#[test]
fn level_zero_boundary_on_vacuum_matches_vacuum() {
    let mut ws = Workspace::new();
    let a = assemble_mps(&two_point(1.0, 0.0, 6, Boundary::Vacuum), &mut ws).unwrap();
    let b = assemble_mps(&two_point(1.0, 0.0, 6, Boundary::LevelZero { left: 0, right: 0 }), &mut ws).unwrap();
    assert_eq!(a.value, b.value);
}

#[test]
fn trace_boundary_adds_excited_states() {
    let mut ws = Workspace::new();
    let open = assemble_mps(&two_point(1.0, 0.0, 4, Boundary::Vacuum), &mut ws).unwrap();
    let tr = assemble_mps(&two_point(1.0, 0.0, 4, Boundary::Trace), &mut ws).unwrap();
    assert!(tr.raw_value.is_finite());
    assert!(tr.raw_value != open.raw_value);
}

#[test]
fn charge_violation_is_a_structural_zero() {
    let mut req = two_point(1.0, 0.0, 4, Boundary::Vacuum);
    req.modules[1] = charge(2);
    let mps = assemble_mps(&req, &mut Workspace::new()).unwrap();
    assert!(mps.structural_zero);
    assert_eq!(mps.value, 0.0);
    let mut req = two_point(1.0, 0.0, 4, Boundary::Vacuum);
    req.spacing = -1.0;
    assert!(matches!(assemble_mps(&req, &mut Workspace::new()), Err(Error::InvalidParameter(_))));
}

#[test]
fn rational_and_float_pipelines_agree() {
    let mut ws = Workspace::new();
    let a = assemble_mps(&su2_two_point(3, NumericMode::Rational), &mut ws).unwrap();
    let b = assemble_mps(&su2_two_point(3, NumericMode::Float), &mut ws).unwrap();
    assert!((a.value - b.value).abs() <= 1e-10 * b.value.abs());
}

#[test]
fn uniform_projection_reproduces_two_sided() {
    let mut ws = Workspace::new();
    let mut req = two_point(1.0, 0.0, 4, Boundary::Vacuum);
    let a = assemble_mps(&req, &mut ws).unwrap();
    req.projection = Projection::Uniform;
    let b = assemble_mps(&req, &mut ws).unwrap();
    assert!(b.bond_dim() >= a.bond_dim());
    assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs());
}

#[test]
fn bands_partition_the_field() {
    let alg = AlgebraData::heisenberg();
    let mut ws = Workspace::new();
    let s = ws.module(&alg, &charge(0), 10, NumericMode::Float).unwrap();
    let t = ws.module(&alg, &charge(1), 10, NumericMode::Float).unwrap();
    let spec = PrimaryFieldSpec::new(charge(0), charge(1), charge(1));
    let modes = ws
        .field(&alg, &spec, &s, &t, Window { target_max: 10, source_max: 10, band: None }, Construction::ClosedForm)
        .unwrap();
    let w = regularize(&alg, modes, 0.6).unwrap();
    let full = w.dense(0, 10, 10, Band::All).unwrap();
    let mut last = f64::INFINITY;
    for n in 0..10 {
        let keep = w.truncate(n).dense(0, 10, 10).unwrap();
        let drop = w.dense(0, 10, 10, Band::Discard(n)).unwrap();
        assert!((&keep + &drop - &full).amax() == 0.0);
        let r = drop.norm();
        assert!(r <= last);
        last = r;
    }
}

proptest! {
    #[test]
    fn single_bound_decays_in_truncation(q in 0.01f64..0.95, n in 0usize..200, b in 0.1f64..10.0) {
        let a = error_bound_single(q, n, b);
        let c = error_bound_single(q, n + 4, b);
        prop_assert!((c / a - q).abs() < 1e-9);
    }

    #[test]
    fn chain_bound_matches_closed_form(q in 0.05f64..0.9, n in 1usize..12, trunc in 0usize..40, b in 0.5f64..3.0, bq in 0.5f64..3.0) {
        let norms = NormInputs { b_sqrt_q: b, b_q: bq, safety: 2.0 };
        let lin = identical_chain_bound(q, n, trunc, &norms);
        let eps = error_bound_single(q, trunc, 2.0 * b);
        prop_assert!((error_bound_chain(&vec![eps; n], &vec![bq; n]) - lin).abs() <= 1e-12 * lin);
        prop_assert!((identical_chain_log_bound(q, n, trunc, &norms) - lin.ln()).abs() < 1e-9);
    }

    #[test]
    fn truncation_slope_is_inverse_in_d(d in 0.3f64..4.0, n in 2usize..6) {
        let eps: Vec<f64> = (2..=12).map(|k| 10f64.powi(-k)).collect();
        let norms = NormInputs { b_sqrt_q: 1.0, b_q: 1.0, safety: 2.0 };
        let a = invert_bounds_to_scaling(&eps, n, d, 1, &norms, None).unwrap();
        let b = invert_bounds_to_scaling(&eps, n, 2.0 * d, 1, &norms, None).unwrap();
        prop_assert!((a.truncation_fit.slope - 4.0 / d).abs() < 0.1 * 4.0 / d + 0.5);
        prop_assert!((b.truncation_fit.slope / a.truncation_fit.slope - 0.5).abs() < 0.1);
        let t = minimal_truncation((-d).exp(), n, 1e-6, &norms).unwrap();
        prop_assert!(identical_chain_bound((-d).exp(), n, t, &norms) <= 1e-6 * (1.0 + 1e-9));
    }

    #[test]
    fn offset_rescales_the_grid(d in 0.2f64..3.0, d0 in 0.0f64..3.0) {
        let charges = [1.0, -2.0, 1.0];
        let a = free_boson_on_grid(&charges, d, 0.0).unwrap();
        let b = free_boson_on_grid(&charges, d, d0).unwrap();
        // degree Σ_{i<j} α_i α_j = −3
        prop_assert!((b / a - (3.0 * d0).exp()).abs() <= 1e-9 * (3.0 * d0).exp());
        let h = [0.5, 2.0, 0.5];
        let i0 = map_insertions(d, 0.0, &h).unwrap();
        let i1 = map_insertions(d, d0, &h).unwrap();
        // the prefactor absorbs the same factor
        prop_assert!((i1.prefactor / i0.prefactor * a / b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_is_symmetric_up_to_sign(x in proptest::collection::vec(-3.0f64..3.0, 4), y in proptest::collection::vec(-3.0f64..3.0, 4)) {
        let z: Vec<Complex64> = x.iter().zip(&y).map(|(&a, &b)| Complex64::new(a, b)).collect();
        prop_assume!((0..4).all(|i| (i + 1..4).all(|j| (z[i] - z[j]).norm() > 1e-3)));
        let charges = [1.0, -1.0, 2.0, -2.0];
        let a = free_boson_n_point(&charges, &z).unwrap();
        let perm = [2, 0, 3, 1];
        let b = free_boson_n_point(&perm.map(|i| charges[i]), &perm.map(|i| z[i])).unwrap();
        prop_assert!((a.norm() - b.norm()).abs() <= 1e-9 * a.norm());
        prop_assert_eq!(free_boson_n_point(&[1.0, 1.0], &z[..2]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn offset_is_covariant_in_the_pipeline(d0 in 0.0f64..2.0) {
        let mut ws = Workspace::new();
        let a = assemble_mps(&two_point(1.0, 0.0, 8, Boundary::Vacuum), &mut ws).unwrap();
        let b = assemble_mps(&two_point(1.0, d0, 8, Boundary::Vacuum), &mut ws).unwrap();
        let e0 = free_boson_on_grid(&[1.0, -1.0], 1.0, 0.0).unwrap();
        let e1 = free_boson_on_grid(&[1.0, -1.0], 1.0, d0).unwrap();
        prop_assert!(((b.value / a.value) / (e1 / e0) - 1.0).abs() < 1e-3);
    }
}
