use abext::arith::{gcd, is_prime, totient};
use abext::characters::{discriminant, global_conductor, local_specs, GlobalCharacter, Place};
use abext::counting::*;
use abext::enumerate::*;
use abext::group::{abelian_groups_of_order, FiniteAbelianGroup};
use abext::interval::Interval;
use abext::specfile::{parse_specs, specs_to_json};
use abext::stats::{measure, Event};
use abext::units::unit_group;
use abext::viability::{viability_search, ViabilityStatus};
use proptest::prelude::*;
use std::sync::OnceLock;

fn grp(f: &[u64]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::new(f.to_vec()).unwrap()
}

fn small_group() -> impl Strategy<Value = FiniteAbelianGroup> {
    prop::sample::select(vec![vec![2u64], vec![3], vec![4], vec![2, 2], vec![5], vec![6], vec![8], vec![9], vec![2, 4], vec![3, 3]])
        .prop_map(|f| grp(&f))
}

fn quadratic_characters() -> &'static Vec<GlobalCharacter> {
    static CHARS: OnceLock<Vec<GlobalCharacter>> = OnceLock::new();
    CHARS.get_or_init(|| {
        let q = EnumerationQuery::new(&conductor_counting(&grp(&[2])), 3000);
        enumerate(&q).unwrap().into_iter().map(|c| c.character).collect()
    })
}

fn kronecker(d: i64, q: u64) -> i64 {
    if q == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let r = abext::arith::pow_mod(d.rem_euclid(q as i64) as u64, (q - 1) / 2, q);
    match r {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_splitting_matches_kronecker(i in 0usize..900, q in 2u64..400) {
        prop_assume!(is_prime(q));
        let chars = quadratic_characters();
        let chi = &chars[i % chars.len()];
        let f = chi.conductor().unwrap() as i64;
        prop_assume!(f % q as i64 != 0);
        let d = if chi.eval(-1).unwrap().0[0] == 0 { f } else { -f };
        let spec = chi.localize(Place::Finite(q)).unwrap();
        let splits = spec.frob.0[0] == 0;
        prop_assert_eq!(splits, kronecker(d, q) == 1, "d = {}, q = {}", d, q);
    }

    #[test]
    fn element_orders_divide_exponent(g in small_group()) {
        for x in g.elements() {
            prop_assert_eq!(g.exponent() % g.element_order(&x), 0);
        }
        prop_assert_eq!(g.elements().count() as u64, g.order());
    }

    #[test]
    fn abelian_group_types(n in 1u64..200) {
        let gs = abelian_groups_of_order(n);
        for g in &gs {
            prop_assert_eq!(g.order(), n);
        }
        let mut keys: Vec<Vec<u64>> = gs.iter().map(|g| g.factors().to_vec()).collect();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(keys.len(), gs.len());
    }

    #[test]
    fn unit_group_order_is_totient(m in 2u64..5000) {
        let u = unit_group(m).unwrap();
        prop_assert_eq!(u.orders.iter().product::<u64>(), totient(m));
        for (&g, &o) in u.generators.iter().zip(&u.orders) {
            prop_assert_eq!(gcd(g, m), 1);
            prop_assert_eq!(abext::arith::pow_mod(g, o, m), 1 % m);
        }
    }

    #[test]
    fn local_specs_partition_characters(g in small_group(), p in prop::sample::select(vec![2u64, 3, 5, 7, 13])) {
        let c = conductor_counting(&g);
        let specs = local_specs(&g, Place::Finite(p));
        let events: Vec<Event> = specs.iter().map(|s| Event::from_specs(std::slice::from_ref(s)).unwrap()).collect();
        let m = measure(&c, &[500, 2000], &events, 1).unwrap();
        let total = measure(&c, &[500, 2000], &[Event::everything()], 1).unwrap();
        for k in 0..2 {
            prop_assert_eq!(m.counts.iter().map(|r| r[k]).sum::<u64>(), total.counts[0][k]);
        }
    }

    #[test]
    fn spec_json_round_trip(g in small_group(), p in prop::sample::select(vec![2u64, 3, 5, 7]), pick in any::<prop::sample::Index>()) {
        let specs = local_specs(&g, Place::Finite(p));
        let s = specs[pick.index(specs.len())].clone();
        let back = parse_specs(&g, &specs_to_json(std::slice::from_ref(&s))).unwrap();
        prop_assert_eq!(back, vec![s]);
    }

    #[test]
    fn witnesses_localize_to_their_spec(g in small_group(), p in prop::sample::select(vec![3u64, 5, 7, 11, 13]), pick in any::<prop::sample::Index>()) {
        let specs = local_specs(&g, Place::Finite(p));
        let s = specs[pick.index(specs.len())].clone();
        let v = viability_search(&g, std::slice::from_ref(&s), 3000).unwrap();
        if let Some(w) = &v.witness {
            prop_assert_eq!(v.status, ViabilityStatus::ViableWithWitness);
            prop_assert_eq!(w.localize(Place::Finite(p)).unwrap(), s);
            prop_assert!(w.is_surjective());
            prop_assert!(w.conductor().unwrap() < 3000);
        }
    }

    #[test]
    fn counting_values_match_closed_forms(g in small_group(), pick in any::<prop::sample::Index>()) {
        let mut q = EnumerationQuery::new(&conductor_counting(&g), 1500);
        q.surjective_only = false;
        let all = enumerate(&q).unwrap();
        let chi = &all[pick.index(all.len())].character;
        prop_assert_eq!(conductor_counting(&g).evaluate(chi).unwrap(), global_conductor(chi).unwrap());
        prop_assert_eq!(discriminant_counting(&g).evaluate(chi).unwrap(), discriminant(chi).unwrap());
        let rad: u128 = chi.support().iter().map(|&p| p as u128).product();
        prop_assert_eq!(radical_counting(&g).evaluate(chi).unwrap(), rad);
    }

    #[test]
    fn interval_ops_enclose_points(a in -50.0f64..50.0, b in -50.0f64..50.0, e in 0.0f64..1.0) {
        let (x, y) = (Interval::around(a, e), Interval::around(b, e));
        prop_assert!((x + y).contains(a + b));
        prop_assert!((x - y).contains(a - b));
        prop_assert!((x * y).contains(a * b));
        prop_assert!(x.exp().contains(a.exp()));
        prop_assert!(Interval::point(a).is_subset_of(&x));
        if a.abs() > 2.0 {
            prop_assert!((x.powi(2)).contains(a * a));
        }
        if a > 2.0 {
            prop_assert!(x.ln().contains(a.ln()));
            prop_assert!(x.recip().contains(1.0 / a));
        }
    }

    #[test]
    fn interval_nesting_is_monotone(a in 0.5f64..20.0, e1 in 0.0f64..0.2, e2 in 0.0f64..0.2) {
        let (small, big) = (Interval::around(a, e1.min(e2)), Interval::around(a, e1.max(e2)));
        prop_assert!(small.is_subset_of(&big));
        prop_assert!(small.exp().is_subset_of(&big.exp()));
        prop_assert!(small.ln().is_subset_of(&big.ln()));
        prop_assert!((small * small).is_subset_of(&(big * big)));
    }
}
