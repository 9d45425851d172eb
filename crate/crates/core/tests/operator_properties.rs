use fham_core::grid::{Field, Grid1D};
use fham_core::operator::{Backend, DiscreteOperator};
use fham_core::spectral::{apply_power, pair_inner, split_pair, PairField};
use proptest::prelude::*;

fn operator(n: usize, s: f64, backend: Backend) -> DiscreteOperator {
    DiscreteOperator::assemble(&Grid1D::new(-1.0, 1.0, n).unwrap(), s, backend).unwrap()
}

fn field(values: &[f64]) -> Field {
    Field::from_column_slice(values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nonnegative_data_gives_nonnegative_solution(
        s in 0.05f64..1.0,
        data in prop::collection::vec(0.0f64..1.0, 24),
    ) {
        let op = operator(24, s, Backend::Restricted);
        let u = op.solve(&field(&data)).unwrap();
        prop_assert!(u.min() >= -1e-12 * u.amax());
    }

    #[test]
    fn comparison_principle(
        s in 0.05f64..1.0,
        low in prop::collection::vec(-1.0f64..1.0, 20),
        bump in prop::collection::vec(0.0f64..1.0, 20),
    ) {
        let op = operator(20, s, Backend::Restricted);
        let f1 = field(&low);
        let f2 = &f1 + field(&bump);
        let d = op.solve(&f2).unwrap() - op.solve(&f1).unwrap();
        prop_assert!(d.min() >= -1e-12 * d.amax().max(1.0));
    }

    #[test]
    fn inverse_is_self_adjoint(
        s in 0.05f64..1.0,
        a in prop::collection::vec(-1.0f64..1.0, 16),
        b in prop::collection::vec(-1.0f64..1.0, 16),
        spectral in any::<bool>(),
    ) {
        let backend = if spectral { Backend::Spectral } else { Backend::Restricted };
        let op = operator(16, s, backend);
        let (f, g) = (field(&a), field(&b));
        let lhs = op.grid.inner(&g, &op.solve(&f).unwrap());
        let rhs = op.grid.inner(&f, &op.solve(&g).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn fractional_powers_compose(
        s in 0.1f64..1.0,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        data in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let op = operator(16, s, Backend::Restricted);
        let sd = op.eigendecompose();
        let u = field(&data);
        let ab = apply_power(&sd, a, &apply_power(&sd, b, &u).unwrap()).unwrap();
        let direct = apply_power(&sd, a + b, &u).unwrap();
        prop_assert!((&ab - &direct).norm() <= 1e-10 * direct.norm());
    }

    #[test]
    fn splitting_is_orthogonal_and_complete(
        s in 0.1f64..1.0,
        frac in 0.05f64..0.95,
        us in prop::collection::vec(-1.0f64..1.0, 12),
        vs in prop::collection::vec(-1.0f64..1.0, 12),
    ) {
        let op = operator(12, s, Backend::Restricted);
        let sd = op.eigendecompose();
        let alpha = frac * 2.0 * s;
        let z = PairField::new(field(&us), field(&vs)).unwrap();
        let (plus, minus) = split_pair(&sd, alpha, &z).unwrap();
        prop_assert!(plus.add(&minus).sub(&z).amax() <= 1e-12 * (1.0 + z.amax()));
        let cross = pair_inner(&sd, alpha, &plus, &minus).unwrap();
        let norm = pair_inner(&sd, alpha, &z, &z).unwrap();
        prop_assert!(cross.abs() <= 1e-9 * norm);
    }
}

#[test]
fn backends_agree_at_unit_order() {
    let r = operator(40, 1.0, Backend::Restricted);
    let s = operator(40, 1.0, Backend::Spectral);
    assert!((&r.matrix - &s.matrix).amax() <= 1e-8 * r.matrix.amax());
}

#[test]
fn torsion_converges_toward_closed_form_for_several_orders() {
    for &s in &[0.3, 0.5, 0.8] {
        let mut errs = Vec::new();
        for &n in &[64, 128, 256] {
            let op = operator(n, s, Backend::Restricted);
            let exact = fham_core::operator::torsion_exact(&op.grid, s);
            let err = (op.torsion() - &exact).norm() / exact.norm();
            errs.push(err);
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "s = {s}: {errs:?}");
    }
}
