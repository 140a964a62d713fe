use std::collections::BTreeMap;

use compartdb::algebra::groebner::is_groebner_basis;
use compartdb::algebra::linalg::bareiss_determinant;
use compartdb::algebra::{
    buchberger, normal_form, Fp, Monomial, MonomialOrder, MultiPoly, PrimeField,
};
use compartdb::db::Database;
use compartdb::identifiability::{
    assess, assess_model, groebner_classify, jacobian_test, random_point, trial_rng,
    AssessConfig, FiberMethod, IdStatus, JacobianVerdict,
};
use compartdb::ioeq::{cofactor_determinant, model_coefficient_map};
use compartdb::model::{canonicalize, parse_model, relabel_result, Model, Permutation};
use proptest::prelude::*;

const P: u64 = 2_147_483_647;

fn field() -> PrimeField {
    PrimeField::new(P).unwrap()
}

fn arb_model(max_n: usize) -> impl Strategy<Value = Model> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1);
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), pairs),
                0..(1u16 << n),
                0..n,
                0..(1u16 << n),
            )
        })
        .prop_map(|(n, bits, inputs, output, leaks)| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .collect();
            let edges: Vec<(usize, usize)> = pairs
                .into_iter()
                .zip(bits)
                .filter_map(|(e, b)| b.then_some(e))
                .collect();
            let set = |m: u16| (0..n).filter(|i| m & (1 << i) != 0).collect::<Vec<_>>();
            Model::new(n, &edges, &set(inputs), &[output], &set(leaks)).unwrap()
        })
}

fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn arb_model_and_perm(max_n: usize) -> impl Strategy<Value = (Model, Permutation)> {
    arb_model(max_n).prop_flat_map(|m| (Just(m), arb_perm(m.n())))
}

fn arb_poly(nvars: usize, max_deg: u16, max_terms: usize) -> impl Strategy<Value = MultiPoly<Fp>> {
    proptest::collection::vec(
        (proptest::collection::vec(0..=max_deg, nvars), 0..P),
        0..=max_terms,
    )
    .prop_map(move |terms| {
        let f = field();
        MultiPoly::from_terms(
            nvars,
            terms
                .into_iter()
                .map(|(e, c)| (Monomial::from_exponents(&e), f.elem(c))),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_idempotent_and_class_invariant((m, p) in arb_model_and_perm(5)) {
        let c = canonicalize(&m);
        prop_assert_eq!(canonicalize(&c.canonical).key, c.key.clone());
        prop_assert_eq!(m.relabel(&c.permutation).unwrap(), c.canonical);
        let moved = m.relabel(&p).unwrap();
        prop_assert_eq!(canonicalize(&moved).key, c.key);
    }

    #[test]
    fn distinct_keys_mean_non_isomorphic(a in arb_model(3), b in arb_model(3)) {
        let isomorphic = a.n() == b.n()
            && all_perms(a.n()).iter().any(|p| a.relabel(p).unwrap() == b);
        prop_assert_eq!(isomorphic, canonicalize(&a).key == canonicalize(&b).key);
    }

    #[test]
    fn relabeling_is_a_group_action(
        (m, p, q) in arb_model(5).prop_flat_map(|m| (Just(m), arb_perm(m.n()), arb_perm(m.n())))
    ) {
        prop_assert_eq!(m.relabel(&Permutation::identity(m.n())).unwrap(), m);
        let twice = m.relabel(&p).unwrap().relabel(&q).unwrap();
        prop_assert_eq!(twice, m.relabel(&q.after(&p)).unwrap());
        prop_assert_eq!(m.relabel(&p).unwrap().relabel(&p.inverse()).unwrap(), m);
    }

    #[test]
    fn model_strings_round_trip(m in arb_model(6)) {
        prop_assert_eq!(parse_model(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn polynomial_ring_axioms(
        a in arb_poly(3, 3, 5),
        b in arb_poly(3, 3, 5),
        c in arb_poly(3, 3, 5),
    ) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        let one = MultiPoly::constant(3, field().one());
        prop_assert_eq!(a.mul(&one), a.clone());
    }

    #[test]
    fn derivative_product_rule(a in arb_poly(3, 3, 4), b in arb_poly(3, 3, 4), v in 0..3usize) {
        let lhs = a.mul(&b).partial_derivative(v);
        let rhs = a.partial_derivative(v).mul(&b).add(&a.mul(&b.partial_derivative(v)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn buchberger_output_is_a_basis_of_the_ideal(
        gens in proptest::collection::vec(arb_poly(3, 2, 3), 1..4)
    ) {
        let ord = MonomialOrder::Grevlex;
        let gb = buchberger(&gens, ord);
        prop_assert!(is_groebner_basis(&gb, ord));
        for g in &gens {
            prop_assert!(normal_form(g, &gb, ord).is_zero());
        }
    }

    #[test]
    fn cofactor_expansion_matches_bareiss(
        n in 1..=5usize,
        entries in proptest::collection::vec(0..P, 25),
    ) {
        let f = field();
        let rows: Vec<Vec<Fp>> = (0..n).map(|i| (0..n).map(|j| f.elem(entries[i * 5 + j])).collect()).collect();
        let polys: Vec<Vec<MultiPoly<Fp>>> = rows
            .iter()
            .map(|r| r.iter().map(|v| MultiPoly::constant(1, *v)).collect())
            .collect();
        let cof = cofactor_determinant(&polys, &f.one());
        let value = cof.evaluate(&[f.zero()]).unwrap();
        prop_assert_eq!(value, bareiss_determinant(&rows).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn assessment_is_equivariant((m, p) in arb_model_and_perm(3)) {
        prop_assume!(m.weakly_connected() && m.all_reach_output());
        let cfg = AssessConfig::default();
        let direct = assess_model(&m.relabel(&p).unwrap(), &cfg).unwrap();
        let moved = relabel_result(&assess_model(&m, &cfg).unwrap(), &p);
        prop_assert_eq!(direct, moved);
    }

    #[test]
    fn published_statuses_do_not_depend_on_the_seed(m in arb_model(3), seed in any::<u64>()) {
        let a = assess_model(&m, &AssessConfig::default()).unwrap();
        let b = assess_model(&m, &AssessConfig { seed, ..AssessConfig::default() }).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn full_and_sliced_fibers_agree(m in arb_model(3)) {
        let sliced = assess_model(&m, &AssessConfig::default()).unwrap();
        let full = assess_model(&m, &AssessConfig { method: FiberMethod::Full, ..AssessConfig::default() }).unwrap();
        prop_assert_eq!(sliced, full);
    }

    #[test]
    fn jacobian_and_groebner_agree_on_non_identifiability(m in arb_model(3)) {
        let f = field();
        let c: Vec<MultiPoly<Fp>> = model_coefficient_map(&m)
            .coefficients
            .iter()
            .map(|q| q.map_coefficients(|x| f.from_rational(x)).unwrap())
            .collect();
        let cfg = AssessConfig { method: FiberMethod::Full, ..AssessConfig::default() };
        let mut rng = trial_rng(&m.encode(), 0, 1);
        let point = random_point(f, m.num_params(), &mut rng);
        let jac = jacobian_test(&c, &point).unwrap();
        if let Ok(gro) = groebner_classify(&c, &point, &cfg, &mut rng) {
            for (j, g) in jac.iter().zip(&gro) {
                prop_assert_eq!(*j == JacobianVerdict::NonIdentifiable, *g == IdStatus::NonIdentifiable);
            }
        }
    }

    #[test]
    fn lookup_is_coherent_with_relabeling((m, p) in arb_model_and_perm(3)) {
        let cfg = AssessConfig::default();
        let db = Database::from_records([assess(&m, &cfg).unwrap()]);
        let base = db.get(&m).unwrap();
        prop_assert_eq!(db.get(&m.relabel(&p).unwrap()).unwrap(), relabel_result(&base, &p));
        let statuses: BTreeMap<_, _> = base;
        prop_assert_eq!(statuses, assess_model(&m, &cfg).unwrap());
    }
}

fn all_perms(n: usize) -> Vec<Permutation> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Permutation>) {
        if prefix.len() == n {
            out.push(Permutation::from_images(prefix.clone()).unwrap());
            return;
        }
        for v in 0..n {
            if !prefix.contains(&v) {
                prefix.push(v);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}
