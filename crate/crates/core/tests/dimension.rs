use cfdim::construct::{DigitRule, Magnitude};
use cfdim::dimension::*;
use cfdim::GrowthSpec;
use proptest::prelude::*;

fn spec(s: &str) -> GrowthSpec {
    s.parse().unwrap()
}

fn range(lo: u64, hi: u64) -> DigitRule {
    DigitRule::Range { lo: Magnitude::Int(lo), hi: Magnitude::Int(hi) }
}

#[test]
fn em_depth_self_consistency() {
    let d12 = estimate_em(2, 12, 1e-10).unwrap().root;
    let d18 = estimate_em(2, 18, 1e-10).unwrap().root;
    assert!((d12 - d18).abs() <= 0.002, "{d12} vs {d18}");
}

#[test]
fn em_roots_shrink_with_depth() {
    for m in 2..=4u64 {
        let roots: Vec<f64> = (4..=12).map(|d| estimate_em(m, d, 1e-11).unwrap().root).collect();
        for w in roots.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "M={m}: {roots:?}");
        }
    }
}

#[test]
fn em_inside_jarnik_bracket() {
    for m in [8u64, 16, 32] {
        let j = jarnik_bounds(m).unwrap();
        let r = estimate_em(m, 10, 1e-10).unwrap().root;
        assert!(j.lo <= r && r <= j.hi, "M={m}: {r} not in [{}, {}]", j.lo, j.hi);
    }
}

#[test]
fn jarnik_monotone() {
    let b: Vec<JarnikBounds> = (8..200).map(|m| jarnik_bounds(m).unwrap()).collect();
    for w in b.windows(2) {
        assert!(w[1].lo > w[0].lo && w[1].hi > w[0].hi);
        assert!(w[0].lo < w[0].hi);
    }
}

#[test]
fn ordering_over_fixtures() {
    for s in ["log", "pow:0.5", "lin:1", "lin:3", "nlogb:2", "exp:2", "exp:3", "alt:2,3", "alt:3,5"] {
        let sp = spec(s);
        let e = predict(&sp, Which::E, 512).unwrap().value;
        let i = predict(&sp, Which::EInf, 512).unwrap().value;
        let u = predict(&sp, Which::ESup, 512).unwrap().value;
        assert!(e.hi() <= i.lo() + 1e-12 && i.hi() <= u.hi() + 1e-12, "{s}: {e} {i} {u}");
    }
}

#[test]
fn limit_formula_meets_inf_prediction() {
    for c in [2u32, 3, 5] {
        let t = limit_formula_spec(&spec(&format!("exp:{c}")), 20).unwrap();
        let p = predict(&spec(&format!("exp:{c}")), Which::EInf, 256).unwrap();
        assert!((t.values[19] - p.value.lo()).abs() < 1e-5);
    }
}

#[test]
fn s_bracket_small_alpha() {
    let s = estimate_s(0.01, &[64], S_DEFAULT_DEPTH, 1e-8).unwrap();
    let j = jarnik_bounds(64).unwrap();
    assert!(s.lo >= j.lo - 0.005, "{} vs {}", s.lo, j.lo);
    for a in [0.5, 1.0, 4.0] {
        let b = estimate_s(a, &[8, 16], 48, 1e-8).unwrap();
        assert!(b.lo >= 0.5 && b.hi == 1.0);
    }
}

#[test]
fn cover_counts_under_bound() {
    let r = cover_upper_bound(&spec("lin:1"), 0.5, 30).unwrap();
    assert!(r.rows.iter().all(|row| row.within_bound));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn widening_a_range_raises_the_root(
        levels in prop::collection::vec((1u64..6, 0u64..4), 1..5),
        which in 0usize..4,
        extra in 1u64..4,
    ) {
        let rules: Vec<DigitRule> = levels.iter().map(|&(lo, w)| range(lo, lo + w)).collect();
        let k = which % rules.len();
        let mut wider = rules.clone();
        let (lo, w) = levels[k];
        wider[k] = range(lo, lo + w + extra);
        let a = moran_root_operator(&rules, 1e-11).unwrap().root;
        let b = moran_root_operator(&wider, 1e-11).unwrap().root;
        prop_assert!(b >= a - 1e-9);
    }

    #[test]
    fn product_brackets_list(lo in 2u64..20, w in 1u64..10) {
        let rule = range(lo, lo + w);
        let p = moran_root_product(&[rule], 1e-12).unwrap();
        let lens: Vec<f64> = (lo..=lo + w).map(|a| -((a * (a + 1)) as f64).ln()).collect();
        let l = moran_root_lengths(&lens, 1e-12).unwrap();
        prop_assert!(l.root <= p.root + 1e-9);
        prop_assert!(l.root >= p.root - p.distortion_error.unwrap() - 1e-9);
    }

    #[test]
    fn list_root_has_small_residual(lens in prop::collection::vec(0.01f64..0.5, 2..20)) {
        prop_assume!(lens.iter().sum::<f64>() < 1.0);
        let ln: Vec<f64> = lens.iter().map(|l| l.ln()).collect();
        let r = moran_root_lengths(&ln, 1e-12).unwrap();
        prop_assert!(r.residual < 1e-9);
    }
}
