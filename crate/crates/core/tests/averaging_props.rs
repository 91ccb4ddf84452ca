use std::collections::BTreeMap;

use fbound_core::averaging::{m_n_apply, m_n_coeff, m_n_coeff_via, CoeffRoute, VertexFunction};
use fbound_core::boundary::{Cylinder, StepFunction};
use fbound_core::exact::{QuadExt, Rational};
use fbound_core::word::{enumerate_prefixed, enumerate_sphere, Rank, ReducedWord};
use proptest::prelude::*;

fn rank(r: i64) -> Rank {
    Rank::new(r).unwrap()
}

fn step(r: Rank, depth: usize, vals: &[i64]) -> StepFunction {
    let words: Vec<ReducedWord> = enumerate_sphere(r, depth).collect();
    let q = r.q();
    StepFunction::from_fn(r, depth, |x| {
        let i = words.iter().position(|w| w == x).unwrap();
        QuadExt::from_int(vals[i % vals.len()], q)
    })
    .unwrap()
}

fn word_of(r: Rank, len: usize, pick: usize) -> ReducedWord {
    let all: Vec<ReducedWord> = enumerate_sphere(r, len).collect();
    all[pick % all.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mn_one_is_self_adjoint(
        r in 2i64..=3, n in 1usize..=4, dg in 0usize..=2, dh in 0usize..=2,
        gv in prop::collection::vec(-3i64..=3, 1..6),
        hv in prop::collection::vec(-3i64..=3, 1..6),
    ) {
        let r = rank(r);
        let one = VertexFunction::constant(1);
        let g = step(r, dg, &gv);
        let h = step(r, dh, &hv);
        prop_assert_eq!(m_n_coeff(&one, n, &g, &h).unwrap(), m_n_coeff(&one, n, &h, &g).unwrap());
    }

    #[test]
    fn positive_inputs_give_positive_output(
        r in 2i64..=3, n in 1usize..=4, len in 1usize..=2, pick in 0usize..100,
        gv in prop::collection::vec(0i64..=4, 1..6), use_chi in any::<bool>(),
    ) {
        let r = rank(r);
        let f = if use_chi {
            VertexFunction::chi(word_of(r, len, pick)).unwrap()
        } else {
            VertexFunction::constant(2)
        };
        let g = step(r, 1, &gv);
        prop_assert!(m_n_apply(&f, n, &g).unwrap().is_nonnegative());
    }

    #[test]
    fn coefficient_is_linear_in_f(
        n in 1usize..=4, alpha in -3i64..=3, len in 1usize..=2, pick in 0usize..100,
        tv in prop::collection::vec(-2i64..=2, 1..5),
    ) {
        let r = rank(2);
        let f1 = VertexFunction::chi(word_of(r, len, pick)).unwrap();
        let words: Vec<ReducedWord> = enumerate_sphere(r, n).collect();
        let f2 = VertexFunction::FiniteSupport(
            words.iter().enumerate()
                .map(|(i, w)| (w.clone(), Rational::from_integer(tv[i % tv.len()].into())))
                .collect(),
        );
        let a = Rational::from_integer(alpha.into());
        let combined: BTreeMap<ReducedWord, Rational> = words
            .iter()
            .map(|w| (w.clone(), &a * f1.chi_eval(w) + f2.chi_eval(w)))
            .collect();
        let f = VertexFunction::FiniteSupport(combined);
        let g = StepFunction::indicator(r, &"b".parse::<Cylinder>().unwrap()).unwrap();
        let h = step(r, 1, &[1, 2, 0, -1]);
        let lhs = m_n_coeff(&f, n, &g, &h).unwrap();
        let rhs = m_n_coeff(&f1, n, &g, &h).unwrap().scale(&a) + m_n_coeff(&f2, n, &g, &h).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn chi_coefficient_is_dominated(
        r in 2i64..=3, n in 1usize..=4, len in 1usize..=2, pick in 0usize..100,
        gv in prop::collection::vec(-3i64..=3, 1..6),
        hv in prop::collection::vec(-3i64..=3, 1..6),
    ) {
        let r = rank(r);
        let f = VertexFunction::chi(word_of(r, len, pick)).unwrap();
        let g = step(r, 1, &gv);
        let h = step(r, 2, &hv);
        let lhs = m_n_coeff(&f, n, &g, &h).unwrap().abs();
        let rhs = m_n_coeff(&VertexFunction::constant(1), n, &g.abs(), &h.abs()).unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn prefix_partition_sums_to_chi(
        n in 2usize..=5, extra in 0usize..=1, pick in 0usize..100,
        gv in prop::collection::vec(-2i64..=2, 1..5),
    ) {
        let r = rank(2);
        let u = word_of(r, 1, pick);
        let k = (u.len() + extra).min(n);
        let g = step(r, 1, &gv);
        let h = StepFunction::indicator(r, &Cylinder::new(u.clone())).unwrap();
        let mut total = QuadExt::zero(r.q());
        for p in enumerate_prefixed(r, &u, k).unwrap() {
            total = total + m_n_coeff(&VertexFunction::chi(p).unwrap(), n, &g, &h).unwrap();
        }
        prop_assert_eq!(total, m_n_coeff(&VertexFunction::chi(u).unwrap(), n, &g, &h).unwrap());
    }

    #[test]
    fn grouped_route_matches_enumeration(
        r in 2i64..=3, n in 4usize..=7, pick in 0usize..100, hw in 0usize..100,
        gv in prop::collection::vec(-2i64..=2, 1..5),
    ) {
        let r = rank(r);
        let f = VertexFunction::chi(word_of(r, 1, pick)).unwrap();
        let g = step(r, 1, &gv);
        let h = StepFunction::indicator(r, &Cylinder::new(word_of(r, 2, hw))).unwrap();
        let a = m_n_coeff_via(&f, n, &g, &h, CoeffRoute::Grouped).unwrap();
        let b = m_n_coeff_via(&f, n, &g, &h, CoeffRoute::Enumerated).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn fn_identity_up_to_eight() {
    for r in [2, 3] {
        let r = rank(r);
        let one = StepFunction::one(r);
        for n in 1..=8 {
            let m = m_n_apply(&VertexFunction::constant(1), n, &one).unwrap();
            assert!(m.same_function(&one), "n = {n}");
        }
    }
}
