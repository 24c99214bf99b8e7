use super::*;
use proptest::prelude::*;

fn rat(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

#[test]
fn state_counts() {
    assert_eq!(state_count(0), Count::one());
    assert_eq!(state_count(10), Count::from(1024));
    assert_eq!(state_count(8 / 2), Count::from(16));
}

#[test]
fn small_unit_values() {
    assert_eq!(small_unit_lhs(2).unwrap(), Count::from(64));
    assert_eq!(all_transformations(2).unwrap(), Count::from(256));
    assert!(small_unit_inequality_exact(2).unwrap());
    assert_eq!(small_unit_lhs(4).unwrap(), Count::pow2(36u32));
    assert_eq!(all_transformations(4).unwrap(), Count::pow2(64u32));
    assert!(matches!(
        small_unit_lhs(0),
        Err(CountingError::PreconditionViolation(_))
    ));
    assert_eq!(small_unit_lhs(3), Err(CountingError::OddEms(3)));
}

#[test]
fn small_unit_closed_form() {
    // independent route: plain exponent arithmetic
    for ems in (2..=32u64).step_by(2) {
        let lhs_exp = BigUint::from(ems / 2) * (BigUint::one() << ems) + ems;
        let rhs_exp = BigUint::from(ems) << ems;
        assert_eq!(small_unit_lhs(ems).unwrap(), Count::pow2(lhs_exp.clone()));
        assert_eq!(all_transformations(ems).unwrap(), Count::pow2(rhs_exp.clone()));
        assert_eq!(small_unit_inequality_exact(ems).unwrap(), lhs_exp < rhs_exp);
    }
}

#[test]
fn symbolic_agrees_with_exact() {
    for ems in (2..=32u64).step_by(2) {
        let symbolic = small_unit_inequality_holds(&BigRational::from_integer(ems.into())).unwrap();
        assert_eq!(symbolic, small_unit_inequality_exact(ems).unwrap(), "ems={ems}");
        assert!(symbolic);
    }
    assert!(!small_unit_inequality_holds(&rat("1")).unwrap());
    assert!(small_unit_inequality_holds(&rat("3/2")).unwrap());
    assert!(!small_unit_inequality_holds(&rat("1/2")).unwrap());
    assert!(small_unit_inequality_holds(&rat("0")).is_err());
    assert!(parse_rational("1/0").is_none());
}

#[test]
fn thread_bounds() {
    assert_eq!(thread_count_bound(1, 2, 2).unwrap(), Count::from(196));
    assert_eq!(
        thread_count_bound(5, 2, 8).unwrap(),
        Count::from(BigUint::from(450u32).pow(8))
    );
    assert_eq!(thread_count_bound(4, 3, 1).unwrap(), Count::from(9));
    assert!(thread_count_bound(0, 2, 2).is_err());
}

#[test]
fn exact_thread_counts() {
    assert_eq!(exact_thread_count(1, 1).unwrap(), Count::from(3));
    for e in 1..4 {
        assert_eq!(exact_thread_count(0, e).unwrap(), Count::from(2));
    }
    let n = exact_thread_count(3, 2).unwrap();
    assert!(n <= Count::from(196), "{n}");
    assert!(n > Count::from(5));
    assert!(matches!(
        exact_thread_count(4, 6),
        Err(CountingError::EnumerationTooLarge { .. })
    ));
}

#[test]
fn enumeration_respects_bound() {
    for n in 1..=3u64 {
        for e in 1..=3u64 {
            let Ok(exact) = exact_thread_count(n as usize, e as usize) else {
                continue;
            };
            // n·e²+2 written as (d+w)·e²+2 with d=1, w=n−1 is only valid for n ≥ 2
            let bound = Count::from((BigUint::from(n * e * e) + 2u32).pow(e as u32));
            assert!(exact <= bound, "n={n} e={e}");
        }
    }
}

fn params(k: u32, l: u32, m: u64, d: u64, e: u64, f: bool) -> RegimeParams {
    RegimeParams {
        k,
        l,
        m,
        d,
        e,
        f,
        u: 1,
        v: 1,
        ims: 0,
    }
}

#[test]
fn classification_examples() {
    let v = classify_regime(&params(1, 1, 4, 5, 8, false)).unwrap();
    assert_eq!(v.verdict, Verdict::CompleteFullUnit);
    let v = classify_regime(&params(3, 2, 2, 1, 2, true)).unwrap();
    assert_eq!(v.verdict, Verdict::IncompleteFewThreads);
    let v = classify_regime(&params(2, 1, 3, 7, 100, true)).unwrap();
    assert_eq!(v.verdict, Verdict::Unknown);
    assert!(v.checklist.iter().any(|p| !p.holds));
    // half-size unit: ems + k = 4 + 2
    let v = classify_regime(&params(2, 2, 6, 5, 8, true)).unwrap();
    assert_eq!(v.verdict, Verdict::CompleteHalfUnit);
    assert!(classify_regime(&params(0, 1, 1, 1, 1, true)).is_err());
    assert!(classify_regime(&params(1, 0, 1, 1, 1, false)).is_err());
}

#[test]
fn small_unit_regime() {
    // k=2, l=4: ems=8, m+ims=2 ≤ 4, d²=4 ≤ 256, (3·1+2)^1 = 5 ≤ 256; e=1 rules out the thread-count result
    let v = classify_regime(&params(2, 4, 2, 2, 1, true)).unwrap();
    assert_eq!(v.verdict, Verdict::IncompleteSmallUnit);
    assert!(v.checklist.iter().any(|p| p.sufficient_only && p.holds));
    let p = RegimeParams {
        ims: 3,
        ..params(2, 4, 2, 2, 1, true)
    };
    assert_eq!(classify_regime(&p).unwrap().verdict, Verdict::Unknown);
}

#[test]
fn chain_at_smallest_point() {
    let r = verify_thread_bound_chain(3, 2, 1, 2, 2).unwrap();
    assert_eq!(r.links[0].lhs, Count::from(196));
    assert_eq!(r.links[1].lhs, Count::from(256));
    assert_eq!(r.links[1].rhs, Count::from(256));
    assert!(r.links_hold());
    assert!(r.side_conditions_hold());
    assert!(r.to_string().contains("l >= 2k-4 (2 >= 2)"));
}

#[test]
fn chain_scan() {
    let reports = scan_thread_bound_chain(3..=6, 2..=8, 2);
    assert_eq!(reports.len(), 4 * 7);
    // on this grid the chain fails exactly where l < 2k-4
    for r in &reports {
        assert_eq!(r.links_hold(), r.side_conditions_hold(), "{r}");
    }
    assert_eq!(reports.iter().filter(|r| !r.links_hold()).count(), 12);
    let r = verify_thread_bound_chain(6, 2, 1, 16, 2).unwrap();
    assert!(!r.side_conditions_hold());
}

proptest! {
    #[test]
    fn verdict_implies_premises(k in 0u32..6, l in 1u32..5, m in 0u64..40, d in 1u64..10, e in 1u64..20, f: bool, ims in 0u64..4) {
        let p = RegimeParams { k, l, m, d, e, f, u: 1, v: 1, ims };
        if let Ok(v) = classify_regime(&p) {
            for premise in v.checklist.iter().filter(|p| p.verdict == v.verdict) {
                prop_assert!(premise.holds, "{}", premise.statement);
            }
        }
    }

    #[test]
    fn growing_never_turns_complete_into_incomplete(
        k in 1u32..6, l in 1u32..5, m in 0u64..40, d in 1u64..10, e in 1u64..20,
        dm in 0u64..20, dd in 0u64..6, de in 0u64..12, f: bool,
    ) {
        let p = RegimeParams { k, l, m, d, e, f, u: 1, v: 1, ims: 0 };
        let q = RegimeParams { m: m + dm, d: d + dd, e: e + de, ..p };
        let (a, b) = (classify_regime(&p).unwrap().verdict, classify_regime(&q).unwrap().verdict);
        prop_assert!(!(a.is_complete() && b.is_incomplete()), "{a:?} -> {b:?}");
    }
}
