//! Acceptance criteria. Every criterion runs and prints one PASS/FAIL line; the process
//! exits nonzero if any failed.

use abext::asymptotics::*;
use abext::characters::LocalSpecJson;
use abext::counting::*;
use abext::enumerate::*;
use abext::group::{abelian_groups_of_order, FiniteAbelianGroup};
use abext::stats::*;
use abext::viability::*;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

fn report(id: u32, ok: bool, detail: &str) {
    println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn grp(f: &[u64]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::new(f.to_vec()).unwrap()
}

fn oracle_groups() -> Vec<FiniteAbelianGroup> {
    [&[2][..], &[3], &[4], &[2, 2], &[8], &[9], &[2, 4]].iter().map(|f| grp(f)).collect()
}

fn threads() -> usize {
    threads_from_env()
}

fn c1_quadratic_constant() {
    let t = Instant::now();
    let target = 6.0 / (PI * PI);
    let c = conductor_counting(&grp(&[2]));
    let n = fast_count(&c, 10_000_000, 10_000_000, true).unwrap().total;
    let density = n as f64 / 1e7;
    let rel = (density - target).abs() / target;
    let k = leading_constant(&c, 1_000_000, ProductMode::Accelerated).unwrap();
    let elapsed = t.elapsed();
    let ok = rel < 0.01
        && k.value.width() < 1e-3
        && k.value.contains(target)
        && k.certified
        && elapsed < Duration::from_secs(120);
    report(
        1,
        ok,
        &format!("count/X = {density:.6} (rel {rel:.2e}), constant {} width {:.1e}, {elapsed:.2?}", k.value, k.value.width()),
    );
    assert!(ok);
}

fn c2_oracle_equivalence() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for g in oracle_groups() {
        for name in ["conductor", "radical", "discriminant"] {
            let c = counting_by_name(&g, name).unwrap();
            let mut q = EnumerationQuery::new(&c, 10_000);
            q.threads = threads();
            let slow = enumerate_tally(&q, 1).unwrap();
            let fast = fast_count(&c, 10_000, 1, true).unwrap();
            if slow != fast {
                bad.push(format!("{:?} {name}: {} vs {}", g.factors(), slow.total, fast.total));
            }
        }
    }
    let elapsed = t.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(300);
    report(2, ok, &format!("21 tallies compared bucketwise, mismatches {bad:?}, {elapsed:.2?}"));
    assert!(ok);
}

fn c3_chebotarev() {
    let c = conductor_counting(&grp(&[9]));
    let mut ok = true;
    let mut lines = Vec::new();
    for p in [2u64, 7, 19] {
        let r = chebotarev_report(&c, p, &[100_000, 1_000_000], threads()).unwrap();
        let split = |k: usize| r.points[k].rows.iter().find(|row| row.num_primes == 9).unwrap().clone();
        let (lo, hi) = (split(0), split(1));
        assert!((hi.target - 1.0 / 9.0).abs() < 1e-12, "census target at {p}");
        let err = |x: f64| (x - 1.0 / 9.0).abs() * 9.0;
        let good = err(hi.empirical) < 0.15 && err(hi.empirical) < err(lo.empirical);
        ok &= good;
        lines.push(format!("p={p}: {:.4} -> {:.4}", lo.empirical, hi.empirical));
    }
    report(3, ok, &format!("Pr(split | unramified) vs 1/9 at 1e5 -> 1e6: {}", lines.join(", ")));
    assert!(ok);
}

fn c4_ratio_law() {
    let c = conductor_counting(&grp(&[3]));
    let a = Event::new(vec![PlaceCondition::ramified(7)]).unwrap();
    let b = Event::new(vec![PlaceCondition::unramified(7)]).unwrap();
    let r = ratio_report(&c, &[100_000, 1_000_000], &a, &b, threads()).unwrap();
    let (e0, e1) = (r.points[0].relative_error, r.points[1].relative_error);
    let ok = (r.target.value - 2.0 / 7.0).abs() < 1e-12 && e1.abs() < 0.10 && r.improving;
    report(
        4,
        ok,
        &format!("ratio {:.4} -> {:.4} (target 2/7), rel err {e0:.3} -> {e1:.3}", r.points[0].empirical, r.points[1].empirical),
    );
    assert!(ok);
}

fn c5_independence() {
    let fair = conductor_counting(&grp(&[4]));
    let a = Event::new(vec![PlaceCondition::ramified(5)]).unwrap();
    let b = Event::new(vec![PlaceCondition::ramified(13)]).unwrap();
    let r = independence_report(&fair, &[100_000, 400_000, 1_600_000], &a, &b, threads()).unwrap();
    let decreasing = r.trend == "decreasing";
    let defects: Vec<String> = r.points.iter().map(|p| format!("{:.2e}", p.defect)).collect();

    // Z/9 at 19 and 37: discriminant ordering against conductor ordering, the latter at a
    // bound giving a larger sample.
    let g9 = grp(&[9]);
    let a = Event::new(vec![PlaceCondition::ramified(19)]).unwrap();
    let b = Event::new(vec![PlaceCondition::ramified(37)]).unwrap();
    let disc_bounds = [10u128.pow(34), 10u128.pow(36), 4 * 10u128.pow(37)];
    let d = independence_report(&discriminant_counting(&g9), &disc_bounds, &a, &b, threads()).unwrap();
    let f = independence_report(&conductor_counting(&g9), &[4_000_000], &a, &b, threads()).unwrap();
    let (dd, fd) = (d.points.last().unwrap().defect, f.points[0].defect);
    let ok = decreasing && dd >= 3.0 * fd;
    report(
        5,
        ok,
        &format!(
            "Z/4 defects {} ({}); Z/9 discriminant defect {dd:.4} vs conductor {fd:.4} (x{:.1})",
            defects.join(" > "),
            r.trend,
            dd / fd
        ),
    );
    assert!(ok);
}

fn c6_grunwald_wang() {
    let t = Instant::now();
    let g = grp(&[8]);
    let v = viable_specs_at_2(&g, 100_000).unwrap();
    let unram: Vec<&SpecVerdict> =
        v.iter().filter(|s| matches!(&s.spec, LocalSpecJson::Finite { level: 0, .. })).collect();
    let inviable: Vec<&SpecVerdict> = unram.iter().copied().filter(|s| !s.exact).collect();
    // Unramified inviable specs are exactly those with Frobenius of order 8.
    let orders_ok = unram.iter().all(|s| match &s.spec {
        LocalSpecJson::Finite { frob, .. } => (frob[0] % 2 == 1) == !s.exact,
        _ => false,
    });
    let agree = v.iter().all(|s| s.witness.is_none() || s.exact);
    let all_witnessed = v.iter().all(|s| s.exact == (s.status == ViabilityStatus::ViableWithWitness));
    let e = e_group(&conductor_counting(&g)).unwrap();
    let elapsed = t.elapsed();
    let ok = unram.len() == 8
        && inviable.len() == 4
        && orders_ok
        && agree
        && all_witnessed
        && e.order == 2
        && sp(&g) == 2
        && elapsed < Duration::from_secs(60);
    report(
        6,
        ok,
        &format!(
            "{} of {} unramified specs inviable, witnesses agree: {agree}, |E| = {} = Sp = {}, {elapsed:.2?}",
            inviable.len(),
            unram.len(),
            e.order,
            sp(&g)
        ),
    );
    assert!(ok);
}

fn verdict_matches(r: &S1Report) -> bool {
    let expected = if r.scaled_s1.hi < 1.0 {
        SplitVerdict::BelowOneOverP2
    } else if r.scaled_s1.lo > 1.0 {
        SplitVerdict::AboveOneOverP2
    } else {
        SplitVerdict::Inconclusive
    };
    r.verdict == expected
}

fn c7_discriminant_probability() {
    let mut ok = true;
    let mut lines = Vec::new();
    for q in [2u64, 5, 7, 11, 13] {
        let t = Instant::now();
        let r = disc_prob_s1(3, q, 100_000, WildPlaceTreatment::default(), TailBound::default()).unwrap();
        let elapsed = t.elapsed();
        ok &= verdict_matches(&r) && elapsed < Duration::from_secs(10);
        lines.push(format!("q={q} 9s1 in {} {:?} {elapsed:.1?}", r.scaled_s1, r.verdict));
    }
    let t = Instant::now();
    let r3 = disc_prob_s1(3, 3, 100_000_000, WildPlaceTreatment::default(), TailBound::default()).unwrap();
    ok &= verdict_matches(&r3) && r3.verdict == SplitVerdict::BelowOneOverP2;
    lines.push(format!("q=3 at N=1e8 9s1 in {} {:?} {:.1?}", r3.scaled_s1, r3.verdict, t.elapsed()));
    report(7, ok, &lines.join("; "));

    // Cross-check: certified verdicts under the exact local model against enumeration.
    for q in [2u64, 7, 11, 13] {
        let r = disc_prob_s1(3, q, 100_000, WildPlaceTreatment::ExactLocal, TailBound::Progression).unwrap();
        let emp = empirical_disc_prob(3, q, 10u128.pow(37), threads()).unwrap();
        let e = emp.schedule.last().unwrap().estimate.value * 9.0;
        let side = match r.verdict {
            SplitVerdict::BelowOneOverP2 => Some(e < 1.0),
            SplitVerdict::AboveOneOverP2 => Some(e > 1.0),
            SplitVerdict::Inconclusive => None,
        };
        println!(
            "INFO criterion 7 cross-check q={q}: exact-local 9s1 in {} {:?}, enumeration 9Pr = {e:.3}, same side: {side:?}",
            r.scaled_s1, r.verdict
        );
    }
    assert!(ok);
}

fn c8_fairness_table() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut groups = 0;
    for n in 2..=64u64 {
        for g in abelian_groups_of_order(n) {
            groups += 1;
            let prime_exp = abext::arith::factorize(g.exponent()).len() == 1
                && abext::arith::factorize(g.exponent())[0].1 == 1;
            if !conductor_counting(&g).is_fair() {
                bad.push(format!("{:?} conductor", g.factors()));
            }
            if !radical_counting(&g).is_fair() {
                bad.push(format!("{:?} radical", g.factors()));
            }
            if discriminant_counting(&g).is_fair() != prime_exp {
                bad.push(format!("{:?} discriminant", g.factors()));
            }
        }
    }
    for f in [&[2, 4][..], &[4, 4], &[2, 2, 8]] {
        let g = grp(f);
        for (label, reps) in [("projections", sum_of_projections(&g)), ("product", product_plus_projections(&g))] {
            if !artin_counting(&g, &reps).unwrap().is_fair() {
                bad.push(format!("{:?} artin {label}", g.factors()));
            }
        }
    }
    let elapsed = t.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(60);
    report(8, ok, &format!("{groups} groups of order 2..64 plus 6 Artin cases, failures {bad:?}, {elapsed:.2?}"));
    assert!(ok);
}

fn c9_conductor_discriminant() {
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for g in oracle_groups() {
        let n = g.order();
        let mut q = EnumerationQuery::new(&conductor_counting(&g), 10_001);
        q.surjective_only = false;
        q.threads = threads();
        for ch in enumerate(&q).unwrap() {
            for chi in ch.character.places() {
                if n % chi.prime == 0 {
                    continue;
                }
                let e = chi.image_subgroup(&g).order();
                let lhs = (chi.prime as u128).pow(chi.discriminant_exponent(&g));
                let rhs = (chi.prime as u128).pow((n - n / e) as u32);
                checked += 1;
                if lhs != rhs {
                    bad.push(format!("{:?} {}", g.factors(), ch.serialized));
                }
            }
        }
    }
    let ok = bad.is_empty() && checked > 0;
    report(9, ok, &format!("{checked} tame components checked, mismatches {}", bad.len()));
    assert!(ok);
}

fn main() {
    let criteria: [(u32, fn()); 9] = [
        (1, c1_quadratic_constant),
        (2, c2_oracle_equivalence),
        (3, c3_chebotarev),
        (4, c4_ratio_law),
        (5, c5_independence),
        (6, c6_grunwald_wang),
        (7, c7_discriminant_probability),
        (8, c8_fairness_table),
        (9, c9_conductor_discriminant),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        if std::panic::catch_unwind(run).is_err() {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
