mod oracle;

use eprcommit::adversary::*;
use eprcommit::protocol::*;
use eprcommit::qsim::MeasOutcome;
use eprcommit::randomness::gamma_q;

fn small(n: usize) -> SessionConfig {
    // 10 rotational + n checks + n kept
    SessionConfig { total_pairs: 10 + 2 * n, retained: n, backend: Backend::Label, seed: 17, ..SessionConfig::default() }
}

#[test]
fn exact_flip_matches_brute_force() {
    for n in 1..=6 {
        let (flip, _) = alice_flip_exact(n).unwrap();
        assert_eq!(flip, oracle::brute_force_flip(n), "n = {n}");
        // the reversed alignment is forgeable unless Alice's data is a palindrome
        assert_eq!(flip, 1.0 - 0.5f64.powi((n / 2) as i32), "n = {n}");
    }
}

#[test]
fn exhaustive_flip_at_five_matches_exact_value() {
    let rep = estimate_alice_flip(Strategy::AliceFlipAttempt(FlipSearch::ExhaustiveSearch), &small(5), 10_000).unwrap();
    let (exact, _) = alice_flip_exact(5).unwrap();
    assert_eq!(exact, 0.75);
    assert!(rep.within(exact, 3.0), "{rep:?}");
}

#[test]
fn honest_unveil_never_flips() {
    let cfg = SessionConfig { backend: Backend::Label, ..SessionConfig::default() };
    let rep = estimate_alice_flip(Strategy::AliceFlipAttempt(FlipSearch::HonestUnveil), &cfg, 10_000).unwrap();
    assert_eq!(rep.p_hat, 0.0);
    assert!(rep.abort_rate < 0.01);
}

#[test]
fn sign_adapt_flip_rate_follows_palindrome_law() {
    for n in [2, 4, 6, 8, 20] {
        let rep = estimate_alice_flip(Strategy::AliceFlipAttempt(FlipSearch::SignAdapt), &small(n), 4000).unwrap();
        let law = 1.0 - 0.5f64.powi((n / 2) as i32);
        assert!(rep.within(law, 3.0), "n {n}: {rep:?}");
        assert!((rep.p_hat + rep.abort_rate - 1.0).abs() < 1e-12, "every failed flip aborts");
    }
}

#[test]
fn single_position_cannot_carry_a_bit() {
    let cfg = SessionConfig { total_pairs: 12, retained: 1, backend: Backend::Label, ..SessionConfig::default() };
    let rep = estimate_alice_flip(Strategy::AliceFlipAttempt(FlipSearch::ExhaustiveSearch), &cfg, 1000).unwrap();
    assert_eq!(rep.p_hat, 0.0);
    assert_eq!(rep.abort_rate, 1.0);
}

#[test]
fn bob_strategies_stay_at_one_half() {
    let cfg = SessionConfig { backend: Backend::Label, ..SessionConfig::default() };
    for s in [Strategy::HonestBaseline, Strategy::BobEarlyMeasure, Strategy::BobRandomGuess, Strategy::BobRevealParity] {
        let rep = estimate_bob_guess(s, &cfg, 10_000).unwrap();
        assert_eq!(rep.trials, 10_000);
        assert!(rep.within(0.5, 3.0), "{rep:?}");
    }
}

#[test]
fn exact_view_distance_vanishes_for_uniform_layers() {
    for n in 1..=4 {
        let d = bob_view_distance(n, &PauliWeights::default()).unwrap();
        assert!(d < 1e-12, "n {n}: {d}");
    }
}

#[test]
fn exact_view_distance_detects_unrandomized_layers() {
    // without the layer Bob holds −a: distinguishable unless a is a palindrome
    let d = bob_view_distance(2, &PauliWeights([1.0, 0.0, 0.0, 0.0])).unwrap();
    assert!((d - 0.5).abs() < 1e-12, "{d}");
    let d = bob_view_distance(3, &PauliWeights([0.4, 0.2, 0.2, 0.2])).unwrap();
    assert!(d > 1e-3);
}

struct Peek;
impl Behavior for Peek {
    fn early_measure(&self, _: usize) -> bool {
        true
    }
}

#[test]
fn sampled_views_are_commit_independent() {
    let n = 2;
    let cfg = small(n);
    let mut counts = [[0u64; 16]; 2];
    for commit in 0..2u32 {
        for i in 0..10_000u64 {
            let rec = run_session_with(&cfg, i + 20_000 * u64::from(commit), commit, 0, &mut Peek).unwrap();
            let bob = &rec.receivers[0];
            let bit = |m: MeasOutcome| usize::from(m == MeasOutcome::Minus);
            let cell = bit(bob.revealed[0]) | bit(bob.revealed[1]) << 1 | bit(bob.outcomes[0]) << 2 | bit(bob.outcomes[1]) << 3;
            counts[commit as usize][cell] += 1;
        }
    }
    let (stat, df) = oracle::two_sample_chisq(&counts[0], &counts[1]);
    let p = gamma_q(df as f64 / 2.0, stat / 2.0);
    assert!(p >= 0.01, "chi-square {stat} on {df} df, p = {p}");
}

#[test]
fn noise_dial_reduces_to_baseline_without_noise() {
    let cfg = SessionConfig { backend: Backend::Label, seed: 3, ..SessionConfig::default() };
    let a = estimate_noise_dial(Role::Bob, &cfg, 2000).unwrap();
    let b = estimate_bob_guess(Strategy::BobEarlyMeasure, &cfg, 2000).unwrap();
    assert_eq!(a.p_hat, b.p_hat);
}

#[test]
fn noise_dial_gains_nothing_at_accepted_noise() {
    let cfg = SessionConfig { backend: Backend::Label, noisy: true, p_acc: 0.1, seed: 5, ..SessionConfig::default() };
    let bob = estimate_noise_dial(Role::Bob, &cfg, 10_000).unwrap();
    assert!(bob.within(0.5, 3.0), "{bob:?}");
    let alice = estimate_noise_dial(Role::Alice, &cfg, 2000).unwrap();
    assert_eq!(alice.p_hat, 0.0);
}

#[test]
fn reports_serialize_with_the_documented_fields() {
    let rep = BiasReport::new(Strategy::BobRandomGuess, 510, 0, 1000);
    assert!((rep.epsilon_hat - 0.01).abs() < 1e-12);
    assert!((rep.ci95 - 1.96 * (0.51f64 * 0.49 / 1000.0).sqrt()).abs() < 1e-12);
}
