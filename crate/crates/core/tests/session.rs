use eprcommit::protocol::*;
use eprcommit::qsim::{MeasOutcome, PauliOp, Side};
use eprcommit::rng::{self, Stream};

fn is_palindrome(v: &[MeasOutcome]) -> bool {
    v.iter().eq(v.iter().rev())
}

#[test]
fn step_twelve_table_noiseless() {
    let cfg = SessionConfig::default();
    for (c, g, out) in [(1, 1, 1), (1, 0, 0), (0, 0, 1), (0, 1, 0)] {
        let (res, t) = run_session(&cfg, c, g).unwrap();
        assert_eq!(res.recovered, Some(c));
        assert_eq!(res.output, Some(out));
        assert_eq!(res.entanglement_check_error_rate, 0.0);
        validate(&t, 2, Naming::Session).unwrap();
    }
}

#[test]
fn commit_zero_recovers_unless_palindrome() {
    let cfg = SessionConfig { backend: Backend::Label, ..SessionConfig::default() };
    let mut aborts = 0;
    for i in 0..1000 {
        let rec = run_session_with(&cfg, i, 0, 1, &mut Honest).unwrap();
        let bob = &rec.receivers[0];
        match rec.abort {
            None => {
                assert_eq!(bob.report.as_ref().unwrap().recovered, Some(0));
                assert!(!is_palindrome(&rec.committer.outcomes[0]));
            }
            Some((Party::Bob, AbortReason::Ambiguous)) => {
                assert!(is_palindrome(&rec.committer.outcomes[0]));
                aborts += 1;
            }
            other => panic!("unexpected abort {other:?}"),
        }
    }
    // P(palindrome) = 2^-10 per session
    assert!(aborts <= 6, "{aborts} ambiguous aborts");
}

#[test]
fn identical_seeds_give_identical_transcripts() {
    let cfg = SessionConfig { seed: 99, ..SessionConfig::default() };
    let (r1, t1) = run_session(&cfg, 1, 0).unwrap();
    let (r2, t2) = run_session(&cfg, 1, 0).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(t1, t2);
    let (_, t3) = run_session(&SessionConfig { seed: 100, ..cfg }, 1, 0).unwrap();
    assert_ne!(t1, t3);
}

#[test]
fn backends_agree_on_honest_outcomes() {
    for backend in [Backend::Matrix, Backend::Label] {
        let cfg = SessionConfig { backend, seed: 5, ..SessionConfig::default() };
        let b = run_batch(&cfg, 200, InputSource::Uniform, InputSource::Uniform).unwrap();
        for s in &b.sessions {
            if !s.aborted() {
                assert_eq!(s.recovered, Some(s.committed));
                assert_eq!(s.output, Some(u32::from(s.committed == s.guessed)));
            } else {
                assert_eq!(s.abort, Some(AbortReason::Ambiguous));
            }
        }
    }
}

#[test]
fn batch_of_one_matches_single_session() {
    let cfg = SessionConfig { seed: 3, ..SessionConfig::default() };
    let b = run_batch(&cfg, 1, InputSource::Fixed(1), InputSource::Fixed(0)).unwrap();
    let (res, _) = run_session(&cfg, 1, 0).unwrap();
    assert_eq!(b.sessions, vec![res.clone()]);
    assert_eq!(b.output, res.output.into_iter().collect::<Vec<_>>());
}

#[test]
fn batch_rejects_zero_count() {
    assert!(run_batch(&SessionConfig::default(), 0, InputSource::Uniform, InputSource::Uniform).is_err());
}

#[test]
fn invalid_inputs_are_errors() {
    let cfg = SessionConfig::default();
    assert!(run_session(&cfg, 2, 0).is_err());
    assert!(run_session(&cfg, 0, 5).is_err());
    let bad = SessionConfig { retained: 50, ..SessionConfig::default() };
    assert!(run_session(&bad, 0, 0).is_err());
}

#[test]
fn fixed_commit_output_tracks_uniform_guess() {
    let cfg = SessionConfig { backend: Backend::Label, seed: 11, ..SessionConfig::default() };
    let b = run_batch(&cfg, 2000, InputSource::Fixed(0), InputSource::Uniform).unwrap();
    let ones = b.output.iter().filter(|&&o| o == 1).count() as f64;
    let n = b.output.len() as f64;
    assert!((ones / n - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
}

fn depolarized_pairs(count: usize, p: f64, seed: u64) -> MatrixBackend {
    let mut pairs = MatrixBackend::singlets(count);
    let mut r = rng::named(seed, 0, Stream::Physics);
    for pos in 0..count {
        pairs.depolarize(pos, Side::A, p, &mut r).unwrap();
        pairs.depolarize(pos, Side::B, p, &mut r).unwrap();
    }
    pairs
}

#[test]
fn singlet_check_noiseless_passes() {
    let mut pairs = MatrixBackend::singlets(30);
    let mut axes = rng::named(1, 0, Stream::Aux);
    let mut phys = rng::named(1, 0, Stream::Physics);
    let pos: Vec<usize> = (0..30).collect();
    let r = verify_singlets(&mut pairs, &pos, AxisMode::RandomAxes, 0.0, &mut axes, &mut phys).unwrap();
    assert!(r.pass);
    assert_eq!(r.error_rate, 0.0);
    assert_eq!(r.checked, 30);
}

#[test]
fn singlet_check_error_rate_under_depolarizing() {
    // ⟨σ·n ⊗ σ·n⟩ = −(1−p)² for a singlet depolarized on both sides
    let p = 0.1;
    let expected = (1.0 - (1.0 - p) * (1.0 - p)) / 2.0;
    let count = 20_000;
    let mut axes = rng::named(8, 0, Stream::Aux);
    let mut phys = rng::named(8, 1, Stream::Physics);
    let pos: Vec<usize> = (0..count).collect();
    for (mode, seed) in [(AxisMode::FixedZ, 9), (AxisMode::RandomAxes, 10)] {
        let mut pairs = depolarized_pairs(count, p, seed);
        let r = verify_singlets(&mut pairs, &pos, mode, 1.0, &mut axes, &mut phys).unwrap();
        let sigma = (expected * (1.0 - expected) / count as f64).sqrt();
        assert!((r.error_rate - expected).abs() < 3.0 * sigma, "{mode:?}: {}", r.error_rate);
    }
    let mut pairs = depolarized_pairs(200, p, 12);
    let r = verify_singlets(&mut pairs, &pos[..200], AxisMode::FixedZ, 0.0, &mut axes, &mut phys).unwrap();
    assert!(!r.pass);
}

#[test]
fn substituted_products_fail_the_check() {
    let count = 4000;
    let mut pairs = LabelBackend::singlets(count);
    let mut coin = rng::named(2, 0, Stream::Adversary);
    for pos in 0..count {
        use rand::Rng;
        pairs.set_product(pos, MeasOutcome::from_bool(coin.random()), MeasOutcome::from_bool(coin.random()));
    }
    let mut axes = rng::named(2, 0, Stream::Aux);
    let mut phys = rng::named(2, 0, Stream::Physics);
    let pos: Vec<usize> = (0..count).collect();
    let r = verify_singlets(&mut pairs, &pos, AxisMode::RandomAxes, 0.0, &mut axes, &mut phys).unwrap();
    assert!(!r.pass);
    assert!((r.error_rate - 0.5).abs() < 0.03, "{}", r.error_rate);
}

struct Tamper;
impl Behavior for Tamper {
    fn tamper_checks(&self, _: usize) -> bool {
        true
    }
}

#[test]
fn tampered_session_aborts_on_entanglement() {
    let cfg = SessionConfig::default();
    let rec = run_session_with(&cfg, 0, 1, 1, &mut Tamper).unwrap();
    assert_eq!(rec.abort, Some((Party::Bob, AbortReason::Entanglement)));
    validate(&rec.transcript, 2, Naming::Session).unwrap();
    assert_eq!(rec.transcript.last().unwrap().step, 5);
}

#[test]
fn noisy_sessions_that_complete_recover_the_commit() {
    let cfg = SessionConfig {
        noisy: true,
        p_acc: 0.1,
        total_pairs: 250,
        retained: 100,
        seed: 4,
        ..SessionConfig::default()
    };
    let b = run_batch(&cfg, 40, InputSource::Uniform, InputSource::Uniform).unwrap();
    let mut completed = 0;
    for s in &b.sessions {
        match s.abort {
            None => {
                completed += 1;
                assert_eq!(s.recovered, Some(s.committed));
                assert!(s.entanglement_check_error_rate > 0.0);
            }
            Some(r) => assert!(matches!(r, AbortReason::Entanglement | AbortReason::Mismatch | AbortReason::Ambiguous)),
        }
    }
    assert!(completed > 0);
}

struct WrongThenRight;
impl Behavior for WrongThenRight {
    fn unveil(&mut self, view: &CommitView<'_>, _: &mut rng::SimRng) -> Vec<PauliOp> {
        view.layer.iter().map(|p| p.compose(PauliOp::X)).collect()
    }
}

#[test]
fn corrected_unveil_restores_recovery() {
    let cfg = SessionConfig { seed: 21, ..SessionConfig::default() };
    let rec = run_session_with(&cfg, 0, 1, 0, &mut WrongThenRight).unwrap();
    let bob = &rec.receivers[0];
    assert_ne!(bob.report.as_ref().unwrap().recovered, Some(1));
    let fixed = bob.rematch(&rec.committer.layers[0]).unwrap();
    assert_eq!(fixed.recovered, Some(1));
    assert_eq!(fixed.mismatch[1], 0.0);
}

#[test]
fn step_order_is_legal_in_every_outcome() {
    let cfg = SessionConfig { backend: Backend::Label, ..SessionConfig::default() };
    for i in 0..50 {
        let rec = run_session_with(&cfg, i, (i % 2) as u32, 0, &mut Honest).unwrap();
        validate(&rec.transcript, 2, Naming::Session).unwrap();
        let steps: Vec<u8> = rec.transcript.entries().iter().map(|e| e.step).collect();
        assert!(steps.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn transcripts_replay_to_the_same_result() {
    use eprcommit::replay::{replay, RunOutcome, RunSpec};
    let spec = RunSpec::Session { config: SessionConfig { seed: 8, ..SessionConfig::default() }, index: 4, commit: 1, guess: 1 };
    let (outcome, t) = spec.execute().unwrap();
    assert_eq!(replay(&spec, &t).unwrap(), outcome);
    let RunOutcome::Session(res) = &outcome else { panic!() };
    assert_eq!(res.output, Some(1));

    let mut entries = t.entries().to_vec();
    if let Message::CommitReveal { outcomes } = &mut entries.iter_mut().find(|e| e.message.kind() == MessageKind::CommitReveal).unwrap().message {
        outcomes[0] = outcomes[0].flip();
    }
    assert!(replay(&spec, &Transcript::from_entries(entries)).is_err());
    let short = Transcript::from_entries(t.entries()[..t.len() - 1].to_vec());
    assert!(replay(&spec, &short).is_err());
}
