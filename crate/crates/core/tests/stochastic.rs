use cfdim::stochastic::{draw_stream, LazyReal, DEFAULT_BIT_BUDGET};
use cfdim::{expand, Rational};
use proptest::prelude::*;

#[test]
fn deep_digits_follow_gauss_kuzmin() {
    let n = 20_000u64;
    let pos = 12;
    let mut counts = [0u64; 9];
    for i in 0..n {
        let d = draw_stream(21, i, pos, DEFAULT_BIT_BUDGET).unwrap().digits[pos - 1];
        if d < 9 {
            counts[d as usize] += 1;
        }
    }
    for k in 1..9 {
        let kf = k as f64;
        let p = (1.0 + 1.0 / (kf * (kf + 2.0))).log2();
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((counts[k] as f64 - n as f64 * p).abs() < 4.0 * sigma, "k={k} count={}", counts[k]);
    }
}

#[test]
fn draws_depend_only_on_seed_and_stream() {
    let a = draw_stream(4, 17, 300, DEFAULT_BIT_BUDGET).unwrap();
    let b = draw_stream(4, 17, 300, DEFAULT_BIT_BUDGET).unwrap();
    let c = draw_stream(4, 18, 300, DEFAULT_BIT_BUDGET).unwrap();
    assert_eq!(a.digits, b.digits);
    assert_ne!(a.digits, c.digits);
    let short = draw_stream(4, 17, 100, DEFAULT_BIT_BUDGET).unwrap();
    assert_eq!(short.digits[..], a.digits[..100]);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn enclosure_midpoint_expands_to_drawn_digits(seed in any::<u64>(), stream in 0u64..1000, n in 1usize..40) {
        let mut x = LazyReal::new(seed, stream);
        for _ in 0..n {
            x.next_digit().unwrap();
        }
        let (lo, hi) = x.enclosure();
        prop_assert!(lo < hi);
        let two = Rational::from_i64(1, 2).unwrap();
        let mid = &(&lo + &hi) * &two;
        let w = expand(&mid).unwrap();
        prop_assert!(w.len() >= n);
        prop_assert_eq!(&w.digits()[..n], x.digits());
    }
}
