use nalgebra::DMatrix;
use proptest::prelude::*;
use refined_young::fuzz::trial_rng;
use refined_young::hs::hs_chain_terms;
use refined_young::scalar::squared_bounds;
use refined_young::{
    random_orthogonal, random_spd, refined_lower, refined_upper, scalar_chain, HsInstance, HsNorms,
    Mutation, OperatorPair, ScalarPair, SpdMatrix, Weight,
};

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1.0)
}

fn positive() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn one_by_one_operator_matches_scalar(a in positive(), b in positive(), v in 0.001f64..0.999) {
        prop_assume!(rel(a, b) > 1e-9);
        let p = ScalarPair::new(a, b).unwrap();
        let w = Weight::new(v).unwrap();
        let pair = OperatorPair::new(
            SpdMatrix::from_diagonal(&[a]).unwrap(),
            SpdMatrix::from_diagonal(&[b]).unwrap(),
        ).unwrap();
        let ev = pair.evaluate(&w, Mutation::None).unwrap();
        let chain = scalar_chain(&p, &w, p.kappa_quarter(), Mutation::None);
        for (k, term) in ev.terms.iter().enumerate() {
            prop_assert!(rel(term[(0, 0)], chain[k]) < 1e-12, "term {k}");
        }
        prop_assert!(rel(ev.terms[4][(0, 0)], refined_lower(&p, &w).rhs) < 1e-12);
        prop_assert!(rel(ev.terms[6][(0, 0)], refined_upper(&p, &w).rhs) < 1e-12);
    }

    #[test]
    fn one_by_one_hs_matches_squared_bounds(a in positive(), b in positive(), v in 0.001f64..0.999) {
        let p = ScalarPair::new(a, b).unwrap();
        let w = Weight::new(v).unwrap();
        let inst = HsInstance::new(
            SpdMatrix::from_diagonal(&[a]).unwrap(),
            SpdMatrix::from_diagonal(&[b]).unwrap(),
            DMatrix::from_element(1, 1, 1.0),
            w,
        ).unwrap();
        let norms = HsNorms::compute(&inst, Mutation::None).unwrap();
        let terms = hs_chain_terms(&inst, &norms, Mutation::None);
        let sq = squared_bounds(&p, &w);
        prop_assert!(rel(terms[4], sq.lower.rhs) < 1e-12);
        prop_assert!(rel(terms[5], sq.lower.lhs) < 1e-12);
        prop_assert!(rel(terms[6], sq.upper.rhs) < 1e-12);
    }

    #[test]
    fn hs_norms_are_unitarily_invariant(seed in any::<u64>(), n in 1usize..6, v in 0.01f64..0.99) {
        let mut rng = trial_rng(seed, 0);
        let a = random_spd(&mut rng, n, (0.1, 10.0)).unwrap();
        let b = random_spd(&mut rng, n, (0.1, 10.0)).unwrap();
        let x = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let u = random_orthogonal(&mut rng, n);
        let q = random_orthogonal(&mut rng, n);
        let w = Weight::new(v).unwrap();
        let base = HsNorms::compute(&HsInstance::new(a.clone(), b.clone(), x.clone(), w).unwrap(), Mutation::None).unwrap();
        let ua = SpdMatrix::new(&u * a.entries() * u.transpose()).unwrap();
        let qb = SpdMatrix::new(&q * b.entries() * q.transpose()).unwrap();
        let ux = &u * &x * q.transpose();
        let moved = HsNorms::compute(&HsInstance::new(ua, qb, ux, w).unwrap(), Mutation::None).unwrap();
        for (x, y) in [
            (base.arith_sq, moved.arith_sq),
            (base.diff_sq, moved.diff_sq),
            (base.geo_sq, moved.geo_sq),
            (base.mid_a_sq, moved.mid_a_sq),
            (base.mid_b_sq, moved.mid_b_sq),
            (base.kappa, moved.kappa),
        ] {
            prop_assert!(rel(x, y) < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn operator_chain_survives_orthogonal_conjugation(seed in any::<u64>(), v in 0.01f64..0.99) {
        let (a, b) = refined_young::gen_sandwich_pair(3, 0.2, seed).unwrap();
        let u = random_orthogonal(&mut trial_rng(seed, 1), 3);
        let ca = a.congruence(&u.transpose()).unwrap();
        let cb = b.congruence(&u.transpose()).unwrap();
        let w = Weight::new(v).unwrap();
        let c1 = OperatorPair::new(a, b).unwrap().chain(&w, Mutation::None).unwrap();
        let c2 = OperatorPair::new(ca, cb).unwrap().chain(&w, Mutation::None).unwrap();
        prop_assert!(c1.all_hold && c2.all_hold);
        for (x, y) in c1.values.iter().zip(&c2.values) {
            prop_assert!(rel(*x, *y) < 1e-9);
        }
    }
}
