use sens_core::phase1::{Phase1Config, Procedure};
use sens_core::session::{run_batch, BatchInputs, Phase, SessionConfig};
use sens_core::simulate::{simulate_test, standard_draw, sweep, sweep_seeds, SimConfig, SweepConfig};

fn pod(seed: u64) -> SimConfig {
    SimConfig::new(SessionConfig::new(Phase1Config::new(Procedure::ThreePod, 0.0, 22.0, 3.0)).with_reso(0.0001))
        .with_sizes(6, 15)
        .with_p_lam(0.9, 1.0)
        .with_seed(seed)
}

#[test]
fn deterministic_for_fixed_seed() {
    let a = simulate_test(&pod(10)).unwrap();
    let b = simulate_test(&pod(10)).unwrap();
    assert_eq!(a.session.records(), b.session.records());
    assert_eq!(a.strengths, b.strengths);
}

#[test]
fn threshold_rule_holds() {
    for seed in 0..20 {
        let o = simulate_test(&pod(seed)).unwrap();
        for (r, s) in o.session.records().iter().zip(&o.strengths) {
            assert_eq!(r.y == 1, r.x >= *s, "seed {seed}");
        }
    }
}

#[test]
fn scaling_by_m_scales_stimuli() {
    for seed in [1, 10, 77] {
        let a = simulate_test(&pod(seed).with_dev(1.0, 1.0)).unwrap();
        let mut c10 = pod(seed).with_dev(1.0, 1.0).with_m(10.0);
        c10.session.reso = 0.0001;
        let b = simulate_test(&c10).unwrap();
        assert_eq!(a.session.records().len(), b.session.records().len());
        for (ra, rb) in a.session.records().iter().zip(b.session.records()) {
            assert_eq!(ra.y, rb.y, "seed {seed}");
            assert!((rb.tx - 10.0 * ra.tx).abs() < 1e-6 * ra.tx.abs().max(1.0), "{} vs {}", rb.tx, ra.tx);
        }
    }
}

#[test]
fn replaying_responses_reproduces_stimuli() {
    for seed in [3, 4, 5] {
        let o = simulate_test(&pod(seed)).unwrap();
        let ys: Vec<i64> = o.session.records().iter().map(|r| r.y as i64).collect();
        let inputs = BatchInputs {
            n2: Some(6),
            n3: Some(15),
            p_lam: Some((0.9, 1.0)),
        };
        let b = run_batch(o.session.config().clone(), &ys, None, inputs).unwrap().session;
        assert_eq!(b.records(), o.session.records());
    }
}

#[test]
fn negative_sizes_cap_totals() {
    let mut c = pod(8);
    c.n2 = -14;
    c.n3 = -20;
    let o = simulate_test(&c).unwrap();
    let s = &o.session;
    if !s.is_suspended() {
        assert!(s.records().len() <= 20.max(s.phase1_len()));
        assert_eq!(s.n2().unwrap() as i64, (14 - s.phase1_len() as i64).max(0));
    }
}

#[test]
fn llgo_false_stops_early() {
    let mut c = pod(11);
    c.llgo = false;
    let o = simulate_test(&c).unwrap();
    assert!(o.stopped_early);
    let ids: Vec<&str> = o.session.records().iter().map(|r| r.id.as_str()).collect();
    assert!(!ids.contains(&"I3"));
    let mut n = SimConfig::new(SessionConfig::new(Phase1Config::new(Procedure::Neyer, 0.6, 1.4, 0.1)))
        .with_sizes(6, 0)
        .with_seed(2);
    n.llgo = false;
    let o = simulate_test(&n).unwrap();
    assert_eq!(o.session.phase(), Phase::AwaitN2);
}

#[test]
fn sweep_single_trial_matches_simulate() {
    let cfg = SweepConfig {
        template: pod(0),
        n_trials: 1,
        seed0: 42,
        stride: 30,
    };
    let s = sweep(&cfg).unwrap();
    let o = simulate_test(&pod(42)).unwrap();
    let f = sens_core::numerics::fit_mle(o.session.trials());
    assert_eq!(s.rows.len(), 1);
    assert_eq!(s.rows[0].mu, f.mu);
    assert_eq!(s.rows[0].n, o.session.records().len());
}

#[test]
fn sweep_seeds_disjoint() {
    let cfg = SweepConfig {
        template: pod(0),
        n_trials: 5,
        seed0: 83,
        stride: 30,
    };
    let seeds = sweep_seeds(&cfg).unwrap();
    assert_eq!(seeds, vec![83, 113, 143, 173, 203]);
    for w in seeds.windows(2) {
        let a: Vec<f64> = (1..=40).map(|t| standard_draw(w[0], t)).collect();
        let b: Vec<f64> = (1..=40).map(|t| standard_draw(w[1], t)).collect();
        assert!(a.iter().all(|x| !b.contains(x)));
    }
    let bad = SweepConfig { stride: 0, ..cfg.clone() };
    assert!(sweep_seeds(&bad).is_err());
    let over = SweepConfig { seed0: u64::MAX - 10, ..cfg };
    assert!(sweep_seeds(&over).is_err());
}

#[test]
fn sweep_median_near_truth() {
    let cfg = SweepConfig {
        template: pod(0).with_sizes(10, 0),
        n_trials: 500,
        seed0: 1000,
        stride: 50,
    };
    let s = sweep(&cfg).unwrap();
    assert!(s.finite > 400);
    let se = s.mu_sd / (s.finite as f64).sqrt();
    // Median of a near-normal sample has standard error about 1.25 se.
    assert!((s.mu_median - s.truth.tmu).abs() < 3.0 * 1.25 * se, "{} vs {} (se {se})", s.mu_median, s.truth.tmu);
    let again = sweep(&cfg).unwrap();
    assert_eq!(s, again);
}
