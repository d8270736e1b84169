use cfdim::construct::{
    check_distortion, check_gap, eliminate_sparse, make_set, sample_point, Chooser, DistortionOptions,
    SetKind, SetParams,
};
use cfdim::{sparse_count, DigitWord};
use proptest::prelude::*;

fn em(spec: &str, m: u64, depth: usize) -> cfdim::construct::ConstructedSet {
    let params = SetParams { spec: Some(spec.parse().unwrap()), m: Some(m), ..Default::default() };
    make_set(SetKind::EMPsi, &params, depth).unwrap()
}

#[test]
fn gap_bound_on_enumerable_depths() {
    let set = em("lin:1", 2, 19);
    for n in 0..=17 {
        let r = check_gap(&set, n).unwrap();
        assert!(r.violations.is_empty(), "depth {n}: {:?}", r.violations.first());
        eprintln!(
            "n={n} parents={} pairs={} min_ratio={}",
            r.level.parents, r.level.pairs, r.level.min_ratio
        );
    }
}

#[test]
fn distortion_past_threshold_for_log() {
    let set = em("log", 2, 64);
    let opts = DistortionOptions::new(1.0);
    for n in [42, 48, 64] {
        let r = check_distortion(&set, n, &opts).unwrap();
        assert_eq!(r.n1, Some(42));
        assert!(r.level.asserted);
        assert_eq!(r.asserted_violations(), 0, "n={n}");
        eprintln!("n={n} checked={} margin={}", r.level.words_checked, r.level.min_margin);
    }
}

#[test]
fn distortion_without_threshold_is_not_asserted() {
    let set = em("lin:1", 2, 17);
    let r = check_distortion(&set, 17, &DistortionOptions::new(1.0)).unwrap();
    assert_eq!(r.n1, None);
    assert!(!r.level.asserted);
    assert_eq!(r.asserted_violations(), 0);
}

#[test]
fn e_lower_samples_follow_envelope() {
    let params = SetParams { spec: Some("exp:2".parse().unwrap()), m: Some(3), ..Default::default() };
    let set = make_set(SetKind::EPsiLower, &params, 20).unwrap();
    for chooser in [Chooser::Min, Chooser::Max, Chooser::Random(4)] {
        let p = sample_point(&set, chooser, 20).unwrap();
        for (i, d) in p.digits.iter().enumerate() {
            let psi = 2f64.powi(i as i32 + 1);
            assert!((d.ln() / psi - 1.0).abs() <= (4.0 * 3.0f64).ln() / psi);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn elimination_length(digits in prop::collection::vec(1u64..50, 0..40)) {
        let w = DigitWord::new(digits).unwrap();
        let n = w.len();
        let sparse: Vec<u64> = (1..64).map(|k| 1u64 << k).take_while(|&m| m <= n as u64).collect();
        prop_assert_eq!(eliminate_sparse(&w, &sparse).len(), n - sparse_count(n as u64) as usize);
    }

    #[test]
    fn random_samples_are_admissible(seed in any::<u64>(), m in 1u64..6, depth in 1usize..30) {
        let set = em("lin:1", m, depth);
        let p = sample_point(&set, Chooser::Random(seed), depth).unwrap();
        let w = p.word.unwrap();
        prop_assert!(set.admits(&w));
        let img = eliminate_sparse(&w, &set.sparse_indices);
        prop_assert!(img.digits().iter().all(|&a| a <= m));
    }
}
