use eprcommit::randomness::*;
use eprcommit::rng;
use proptest::prelude::*;
use rand::Rng;

fn uniform_bits(seed: u64, rep: u64, n: usize) -> Vec<u32> {
    let mut r = rng::stream(seed, rep, 77);
    (0..n).map(|_| r.random_range(0..2)).collect()
}

#[test]
fn chi_square_critical_values() {
    // tabulated upper quantiles
    for (df, x, alpha) in [(1.0, 6.634897, 0.01), (5.0, 15.086272, 0.01), (5.0, 11.070498, 0.05), (2.0, 9.210340, 0.01)] {
        assert!((gamma_q(df / 2.0, x / 2.0) - alpha).abs() < 1e-6, "df {df}");
    }
}

#[test]
fn seeded_bits_pass_in_at_least_98_of_100() {
    let mut mono = 0;
    let mut runs = 0;
    for rep in 0..100 {
        let bits = uniform_bits(0, rep, 10_000);
        mono += usize::from(monobit(&bits, DEFAULT_ALPHA).unwrap().pass);
        runs += usize::from(runs_test(&bits, DEFAULT_ALPHA).unwrap().pass);
    }
    assert!(mono >= 98, "monobit {mono}/100");
    assert!(runs >= 98, "runs {runs}/100");
}

#[test]
fn seeded_symbols_pass_chisq_in_at_least_98_of_100() {
    let mut ok = 0;
    for rep in 0..100 {
        let mut r = rng::stream(2, rep, 78);
        let sym: Vec<u32> = (0..1000).map(|_| r.random_range(0..6)).collect();
        ok += usize::from(chisq_uniform(&sym, 6, DEFAULT_ALPHA).unwrap().pass);
    }
    assert!(ok >= 98, "{ok}/100");
}

#[test]
fn null_rejection_rates_match_alpha() {
    let reps = 1000;
    let alpha = 0.05;
    let mut rejections = [0usize; 3];
    for rep in 0..reps {
        let bits = uniform_bits(3, rep, 1000);
        rejections[0] += usize::from(!monobit(&bits, alpha).unwrap().pass);
        let r = runs_test(&bits, alpha).unwrap();
        rejections[1] += usize::from(r.applicable && !r.pass);
        rejections[2] += usize::from(!chisq_uniform(&bits, 2, alpha).unwrap().pass);
    }
    let sigma = (alpha * (1.0 - alpha) * reps as f64).sqrt();
    for (i, &k) in rejections.iter().enumerate() {
        assert!((k as f64 - alpha * reps as f64).abs() < 3.0 * sigma, "test {i}: {k}");
    }
}

#[test]
fn binary_chisq_agrees_with_monobit() {
    let mut agree = 0;
    for rep in 0..200 {
        let bits = uniform_bits(4, rep, 500);
        let a = monobit(&bits, 0.05).unwrap().pass;
        let b = chisq_uniform(&bits, 2, 0.05).unwrap().pass;
        agree += usize::from(a == b);
    }
    assert!(agree >= 190, "{agree}/200");
}

proptest! {
    #[test]
    fn p_values_stay_in_unit_interval(bits in proptest::collection::vec(0u32..2, 100..400), alpha in 0.001f64..0.5) {
        for r in [monobit(&bits, alpha).unwrap(), runs_test(&bits, alpha).unwrap(), chisq_uniform(&bits, 2, alpha).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&r.p_value));
            if r.applicable {
                prop_assert_eq!(r.pass, r.p_value >= alpha);
            }
        }
    }

    #[test]
    fn chisq_p_in_unit_interval(sym in proptest::collection::vec(0u32..5, 25..300)) {
        let r = chisq_uniform(&sym, 5, 0.01).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }
}
