use num_traits::{Signed, Zero};
use proptest::prelude::*;

use psop_core::classify::{
    classify, classify_hat_power_bounded_finite, GridParams, Property, Status,
};
use psop_core::laurent::{laurent_coeffs, symbol_split, HoloSymbol, Intended};
use psop_core::num::rat_to_f64;
use psop_core::operators::{cesaro_mean, orbit, power_apply};
use psop_core::oracle::{dense_apply, dense_power, element_vector, replay_verdict, DenseTrunc};
use psop_core::spaces::{ln_basis_norm, stability_constant};
use psop_core::symbols::{conv_power, conv_power_iterated, convolve, ell1_norm, power_envelope};
use psop_core::{Coeffs, Element, Exec, ExponentSequence, Rational, Scalar, SpaceSpec, Symbol};

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=9).prop_map(|(p, q)| Rational::new(p.into(), q.into()))
}

fn rationals(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), 1..=max_len)
}

fn finite(max_len: usize) -> impl Strategy<Value = Symbol> {
    rationals(max_len).prop_map(|v| Symbol::Finite(Coeffs::Exact(v)))
}

fn element(max_len: usize) -> impl Strategy<Value = Element> {
    rationals(max_len).prop_map(|v| Element::finite(Coeffs::Exact(v)))
}

fn space() -> impl Strategy<Value = SpaceSpec> {
    prop_oneof![
        Just(SpaceSpec::lambda1_linear()),
        Just(SpaceSpec::lambda_inf_linear())
    ]
}

fn exact(s: &Symbol, n: usize) -> Vec<Rational> {
    let mut v = s.prefix(n).to_exact().unwrap();
    v.resize(n, Rational::zero());
    v
}

fn small_grid() -> GridParams {
    GridParams {
        n: 32,
        k: 16,
        p: 4,
        q: 8,
        tol: 1e-9,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_positive_and_monotone(s in space(), n in 1usize..400, k in 1u32..30) {
        let (w, w1) = (s.weight(n, k), s.weight(n, k + 1));
        prop_assert!(w > 0.0);
        prop_assert!(w1 >= w);
    }

    #[test]
    fn basis_seminorm_is_weight(s in space(), n in 1usize..400, k in 1u32..16) {
        let nb = s.seminorm(&Element::basis(n), k).unwrap();
        prop_assert_eq!(nb.ln_value, s.ln_weight(n, k));
        prop_assert_eq!(nb.ln_tail, f64::NEG_INFINITY);
    }

    #[test]
    fn seminorm_homogeneous_and_subadditive(s in space(), x in element(12), y in element(12), c in rational(), k in 1u32..6) {
        let norm = |e: &Element| s.seminorm(e, k).unwrap().value();
        let cx = x.scale(&Scalar::Exact(c.clone()));
        let lhs = norm(&cx);
        let rhs = rat_to_f64(&c.abs()) * norm(&x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        let n = x.len().max(y.len());
        let sum = x.padded(n).add(&y.padded(n)).unwrap();
        prop_assert!(norm(&sum) <= (norm(&x) + norm(&y)) * (1.0 + 1e-12));
    }

    #[test]
    fn stability_prefix_within_analytic_bound(d in 1u32..5, n in 2usize..2000) {
        for alpha in [ExponentSequence::linear(), ExponentSequence::root(d).unwrap()] {
            let c = stability_constant(&alpha, n);
            prop_assert!(c.certified);
            prop_assert!(c.prefix_sup <= c.m as f64 + 1e-12);
        }
    }

    #[test]
    fn convolution_commutative_associative(a in finite(8), b in finite(8), c in finite(8)) {
        let n = 32;
        prop_assert_eq!(exact(&convolve(&a, &b, n), n), exact(&convolve(&b, &a, n), n));
        let l = convolve(&convolve(&a, &b, n), &c, n);
        let r = convolve(&a, &convolve(&b, &c, n), n);
        prop_assert_eq!(exact(&l, n), exact(&r, n));
        let delta = Symbol::from_ints(&[1]);
        prop_assert_eq!(exact(&convolve(&delta, &a, n), n), exact(&a, n));
        prop_assert_eq!(exact(&convolve(&a, &delta, n), n), exact(&a, n));
    }

    #[test]
    fn binary_splitting_power(a in finite(4), k in 1usize..=32) {
        let n = 4 * k;
        prop_assert_eq!(exact(&conv_power(&a, k, n).unwrap(), n), exact(&conv_power_iterated(&a, k, n).unwrap(), n));
    }

    #[test]
    fn young_inequality(a in finite(10), b in finite(10)) {
        let ab = convolve(&a, &b, 64);
        let lhs = ell1_norm(&ab).unwrap().exact.unwrap();
        let rhs = ell1_norm(&a).unwrap().exact.unwrap() * ell1_norm(&b).unwrap().exact.unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn geometric_power_envelope(cn in -4i64..=4, rn in -7i64..=7, k in 1usize..=8) {
        prop_assume!(cn != 0 && rn != 0);
        let (c, r) = (cn as f64 / 4.0, rn as f64 / 8.0);
        let g = Symbol::geometric(Scalar::ratio(cn, 4), Scalar::ratio(rn, 8));
        let env = power_envelope(g.tail_cert().envelope().unwrap(), k).unwrap();
        let alpha = ExponentSequence::linear();
        for m in 0..=128usize {
            // c^k·C(m+k−1, k−1)·r^m
            let binom: f64 = (1..k).map(|j| (m + j) as f64 / j as f64).product();
            let coeff = c.abs().powi(k as i32) * binom * r.abs().powi(m as i32);
            prop_assert!(coeff.ln() <= env.ln_bound(&alpha, m) + 1e-12, "m = {}", m);
        }
    }

    #[test]
    fn cesaro_within_orbit_max(s in space(), theta in finite(3), x in element(4), k in 1usize..8, p in 1u32..5) {
        let op = psop_core::operators::OperatorSpec::hat(s.clone(), theta).unwrap();
        let mean = s.seminorm(&cesaro_mean(&op, k, &x).unwrap(), p).unwrap().upper();
        let max = (1..=k).map(|m| s.seminorm(&power_apply(&op, m, &x).unwrap(), p).unwrap().upper()).fold(0.0, f64::max);
        prop_assert!(mean <= max * (1.0 + 1e-12));
        let rec = orbit(&op, &x, k, &[p]).unwrap();
        prop_assert!(rec.triangle_ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hierarchy_and_replay(s in space(), theta in finite(3)) {
        let op = psop_core::operators::OperatorSpec::hat(s, theta).unwrap();
        let props = [Property::Topologizable, Property::MTopologizable, Property::PowerBounded];
        let g = small_grid();
        let v = classify(&op, &props, &g, Exec::Sequential).unwrap();
        let st = |p: Property| v.iter().find(|x| x.property == p).unwrap().status;
        if st(Property::PowerBounded) == Status::Holds {
            prop_assert_eq!(st(Property::MTopologizable), Status::Holds);
        }
        if st(Property::MTopologizable) == Status::Holds {
            prop_assert_eq!(st(Property::Topologizable), Status::Holds);
        }
        let big = classify(&op, &props, &g.doubled(), Exec::Sequential).unwrap();
        for (a, b) in v.iter().zip(&big) {
            if a.is_decisive() && b.is_decisive() {
                prop_assert_eq!(a.status, b.status);
            }
            if a.is_decisive() {
                prop_assert!(replay_verdict(a).unwrap());
            }
        }
    }

    #[test]
    fn power_bounded_orbits_stay_below_double_grade(theta in finite(3)) {
        let l1 = SpaceSpec::lambda1_linear();
        let g = small_grid();
        let v = classify_hat_power_bounded_finite(&l1, &theta, &g).unwrap();
        if v.status == Status::Holds {
            let op = psop_core::operators::OperatorSpec::hat(l1.clone(), theta).unwrap();
            let grades: Vec<u32> = (1..=g.p).collect();
            for n in 1..=8 {
                let rec = orbit(&op, &Element::basis(n), g.k, &grades).unwrap();
                for r in &rec.rows {
                    let bound = ln_basis_norm(&l1, n, 2.0 * r.p as f64) + g.tol.ln_1p();
                    prop_assert!(r.norm.ln_upper() <= bound);
                }
            }
        }
    }

    #[test]
    fn main_path_matches_dense(s in space(), theta in finite(5), beta in finite(5), x in element(12)) {
        let op = psop_core::operators::OperatorSpec::toeplitz(s, theta, beta, None).unwrap();
        let y = op.apply(&x).unwrap();
        let n = 32;
        let want = dense_apply(&DenseTrunc::from_op(&op, n).unwrap(), &element_vector(&x, n).unwrap()).unwrap();
        prop_assert_eq!(element_vector(&y, n).unwrap(), want);
    }

    #[test]
    fn triangular_truncation_commutes_with_power(theta in finite(4), k in 1usize..=16) {
        let n = 24;
        let hat = DenseTrunc::from_symbols(Some(&theta), None, n).unwrap();
        let sym = conv_power(&theta, k, n).unwrap();
        prop_assert_eq!(dense_power(&hat, k).unwrap().m, DenseTrunc::from_symbols(Some(&sym), None, n).unwrap().m);
    }

    #[test]
    fn toeplitz_leading_block_stable(theta in finite(3), beta in finite(3), k in 1usize..=8) {
        let n = 16;
        let small = DenseTrunc::from_symbols(Some(&theta), Some(&beta), n).unwrap();
        let large = DenseTrunc::from_symbols(Some(&theta), Some(&beta), 2 * n).unwrap();
        let a = dense_power(&small, k).unwrap().block(n / 2).unwrap();
        let b = dense_power(&large, k).unwrap().block(n / 2).unwrap();
        prop_assert_eq!(a.m, b.m);
    }

    #[test]
    fn monomial_quadrature(m in -6i32..=6, r in 0.05f64..=2.0, extra in 0usize..3) {
        let mut num = vec![0.0; m.max(0) as usize + 1];
        let mut den = vec![0.0; (-m).max(0) as usize + 1];
        *num.last_mut().unwrap() = 1.0;
        *den.last_mut().unwrap() = 1.0;
        let f = HoloSymbol::rational(num, den, 0.0, f64::INFINITY, Intended::Entire).unwrap();
        let samples = (4 * m.unsigned_abs() as usize + 4) << extra;
        let c = laurent_coeffs(&f, r, m as i64 - 2, m as i64 + 2, Some(samples)).unwrap();
        for n in c.indices() {
            let want = if n == m as i64 { 1.0 } else { 0.0 };
            prop_assert!((c.get(n).unwrap() - want).norm() <= 1e-13, "n = {}", n);
        }
    }

    #[test]
    fn radius_independence(pole in 1.5f64..4.0, a in -2.0f64..2.0, r1 in 0.2f64..0.6, r2 in 0.7f64..1.2) {
        let f = HoloSymbol::rational(vec![1.0, a], vec![pole, -1.0], 0.0, pole, Intended::Disc).unwrap();
        let x = laurent_coeffs(&f, r1, -3, 16, None).unwrap();
        let y = laurent_coeffs(&f, r2, -3, 16, None).unwrap();
        for n in x.indices() {
            let gap = (x.get(n).unwrap() - y.get(n).unwrap()).norm();
            prop_assert!(gap <= x.err_at(n).unwrap() + y.err_at(n).unwrap(), "n = {}", n);
        }
    }

    #[test]
    fn split_reassembles(pole in 1.5f64..4.0, b1 in -1.0f64..1.0, b2 in -1.0f64..1.0) {
        let f = HoloSymbol::black_box(move |z| 1.0 / (pole - z) + b1 / z + b2 / (z * z), 0.0, pole, Intended::Disc).unwrap();
        let c = laurent_coeffs(&f, 0.9, -6, 6, None).unwrap();
        let s = symbol_split(&c).unwrap();
        let m = psop_core::operators::toeplitz_matrix(&s.theta, &s.beta, 7).unwrap();
        for i in 0..7i64 {
            for j in 0..7i64 {
                let want = c.get(i - j).unwrap().re;
                let tol = 10.0 * c.err_at(i - j).unwrap() + 1e-14;
                prop_assert!((m.get(i as usize, j as usize).to_f64() - want).abs() <= tol, "({}, {})", i, j);
            }
        }
    }
}
