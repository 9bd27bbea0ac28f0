use polysigma::closed_forms;
use polysigma::matrix::{self, DenseMatrix, C64};
use polysigma::oracle;
use polysigma::phase::{
    full_nary_mul, het_nary_mul, het_querelement_general, Family, FullGroup, HetGroup, PauliGroup, PhasedFull, Q12,
};
use polysigma::sigma;
use polysigma::su2::{self, PolyadicSU2Element, SU2Params, Side};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dense(dim: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let rows = v.chunks(dim).map(|r| r.iter().map(|(a, b)| C64::new(*a, *b)).collect()).collect();
        DenseMatrix::from_rows(rows).unwrap()
    })
}

fn moduli() -> impl Strategy<Value = u32> {
    prop::sample::select(Q12.to_vec())
}

fn element(n: usize, seed: u64) -> PolyadicSU2Element {
    PolyadicSU2Element::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermitian_is_an_involution(a in dense(4)) {
        prop_assert_eq!(matrix::hermitian(&matrix::hermitian(&a)), a);
    }

    #[test]
    fn det_is_multiplicative(a in dense(4), b in dense(4)) {
        let lhs = matrix::det(&matrix::mat_mul(&a, &b).unwrap());
        let rhs = matrix::det(&a) * matrix::det(&b);
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn pauli_products_match_oracle(q in moduli(), a in any::<usize>(), b in any::<usize>()) {
        let g = PauliGroup::new(q).unwrap();
        let f = [g.label(a % g.order()), g.label(b % g.order())];
        prop_assert!(oracle::product_deviation(&f, &g.mul(&f)) <= 1e-12);
    }

    #[test]
    fn full_products_match_oracle_and_closed_form(q in moduli(), n in 3usize..6, idx in prop::collection::vec(any::<usize>(), 5)) {
        let g = FullGroup::new(n, q).unwrap();
        let f: Vec<PhasedFull> = idx[..n].iter().map(|i| g.label(i % g.order())).collect();
        let p = full_nary_mul(&f, n).unwrap();
        prop_assert!(oracle::product_deviation(&f, &p) <= 1e-12);
        if n == 3 {
            prop_assert_eq!(closed_forms::phased_full_triple(&f[0], &f[1], &f[2]).unwrap(), p);
        }
    }

    #[test]
    fn het_products_match_oracle(q in moduli(), n in 3usize..6, idx in prop::collection::vec(any::<usize>(), 5)) {
        let g = HetGroup::new(n, q).unwrap();
        let f: Vec<_> = idx[..n].iter().map(|i| g.label(i % g.order())).collect();
        let p = het_nary_mul(&f, n).unwrap();
        prop_assert!(oracle::product_deviation(&f, &p) <= 1e-12);
    }

    #[test]
    fn het_querelement_solves_its_equation(q in moduli(), n in 3usize..6, i in any::<usize>(), pos in 0usize..5) {
        let g = HetGroup::new(n, q).unwrap();
        let a = g.label(i % g.order());
        let mut f = vec![a.clone(); n];
        f[pos % n] = het_querelement_general(&a);
        prop_assert_eq!(het_nary_mul(&f, n).unwrap(), a);
    }

    #[test]
    fn full_group_is_totally_associative(q in moduli(), idx in prop::collection::vec(any::<usize>(), 5)) {
        let g = FullGroup::new(3, q).unwrap();
        let f: Vec<PhasedFull> = idx.iter().map(|i| g.label(i % g.order())).collect();
        let m = |s: &[PhasedFull]| full_nary_mul(s, 3).unwrap();
        let left = m(&[m(&f[0..3]), f[3], f[4]]);
        prop_assert_eq!(left, m(&[f[0], m(&f[1..4]), f[4]]));
        prop_assert_eq!(left, m(&[f[0], f[1], m(&f[2..5])]));
    }

    #[test]
    fn commutator_antisymmetric_anticommutator_symmetric(a in dense(4), b in dense(4), c in dense(4)) {
        let com = sigma::ternary_commutator(&a, &b, &c).unwrap();
        let swapped = sigma::ternary_commutator(&b, &a, &c).unwrap();
        prop_assert!(com.add(&swapped).unwrap().max_deviation(&DenseMatrix::zeros(4)) <= 1e-12);
        let anti = sigma::ternary_anticommutator(&a, &b, &c).unwrap();
        prop_assert!(anti.max_deviation(&sigma::ternary_anticommutator(&c, &a, &b).unwrap()) <= 1e-12);
        prop_assert!(anti.max_deviation(&sigma::ternary_anticommutator(&a, &c, &b).unwrap()) <= 1e-12);
    }

    #[test]
    fn restricted_elements_are_closed(n in 3usize..6, seeds in prop::collection::vec(any::<u64>(), 5)) {
        let ms: Vec<_> = seeds[..n]
            .iter()
            .map(|s| {
                let p = SU2Params::random(&mut ChaCha8Rng::seed_from_u64(*s));
                PolyadicSU2Element::restricted(n, p).unwrap().to_matrix()
            })
            .collect();
        let p = su2::nary_product(&ms, n).unwrap();
        let first = *p.block(0);
        prop_assert!(p.blocks().iter().all(|b| b.max_deviation(&first) <= 1e-12));
        prop_assert!((first.det() - C64::new(1.0, 0.0)).norm() <= 1e-10);
    }

    #[test]
    fn identities_need_unit_coefficient_product(n in 3usize..6, seed in any::<u64>(), raw in prop::collection::vec(0.25f64..4.0, 4)) {
        let mut coeffs = raw[..n - 2].to_vec();
        coeffs.push(1.0 / coeffs.iter().product::<f64>());
        let m = element(n, seed).to_matrix();
        for side in [Side::Left, Side::Right] {
            let id = su2::polyadic_identity(n, side, coeffs.clone()).unwrap();
            let mut f = vec![id; n];
            match side {
                Side::Left => f[n - 1] = m.clone(),
                Side::Right => f[0] = m.clone(),
            }
            prop_assert!(su2::nary_product(&f, n).unwrap().max_deviation(&m) <= 1e-12);
        }
        let mut bad = coeffs.clone();
        bad[0] *= 2.0;
        prop_assert!(su2::polyadic_identity(n, Side::Left, bad).is_err());
    }

    #[test]
    fn querelement_at_every_position(n in 2usize..7, seed in any::<u64>()) {
        let m = element(n.max(3), seed).to_matrix();
        let n = m.arity();
        let qm = su2::querelement(&m).unwrap();
        for pos in 0..n {
            let mut f = vec![m.clone(); n];
            f[pos] = qm.clone();
            prop_assert!(su2::nary_product(&f, n).unwrap().max_deviation(&m) <= 1e-12);
        }
    }

    #[test]
    fn expansion_resums_exactly(n in 2usize..6, seed in any::<u64>()) {
        let e = element(n, seed);
        let back = sigma::resum(n, &sigma::expand(&e)).unwrap();
        prop_assert!(back.max_deviation(&e.to_matrix().dense()) <= 1e-15);
        prop_assert!(sigma::hadamard_decompose(&e).reconstruct().unwrap().max_deviation(&e.to_matrix().dense()) <= 1e-15);
    }
}
