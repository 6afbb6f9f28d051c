use rqproc::sim::{replication, run_study, run_study_with_threads, simulate_data, two_step_gap, DistConfig, SimConfig};
use rqproc::CliError;
use rqproc_core::ProcessKind;

fn small(dist: DistConfig, reps: usize) -> SimConfig {
    SimConfig::paper(dist, reps, 2024)
}

#[test]
fn designs_are_centered_and_redrawn() {
    let cfg = small(DistConfig::Normal, 3);
    let a = simulate_data(&cfg, 0, 0).unwrap();
    let b = simulate_data(&cfg, 1, 0).unwrap();
    for j in 1..=2 {
        let s: f64 = (0..25).map(|i| a.data.row(i)[j]).sum();
        assert!(s.abs() < 1e-12);
    }
    assert_ne!(a.data.design(), b.data.design());
    assert_eq!(a, simulate_data(&cfg, 0, 0).unwrap());
    assert!((a.shift - 5.0).abs() < 1e-12);
}

#[test]
fn fixed_design_is_shared() {
    let mut cfg = small(DistConfig::Normal, 3);
    cfg.fixed_design = true;
    let a = simulate_data(&cfg, 0, 0).unwrap();
    let b = simulate_data(&cfg, 1, 0).unwrap();
    assert_eq!(a.data.design(), b.data.design());
    assert_ne!(a.errors, b.errors);
}

#[test]
fn single_replication_without_covariates_is_the_sample_quantile_function() {
    let cfg = SimConfig {
        n: 9,
        beta0: 0.0,
        beta: vec![],
        covariate_ranges: vec![],
        error_dist: DistConfig::Normal,
        replications: 1,
        seed: 3,
        lambda_list: vec![0.5],
        alpha_grid: (1..10).map(|k| k as f64 / 10.0 - 0.05).collect(),
        z_points: 51,
        fixed_design: false,
    };
    let study = run_study(&cfg).unwrap();
    let mut e = simulate_data(&cfg, 0, 0).unwrap().errors;
    e.sort_by(f64::total_cmp);
    let sample_q: Vec<f64> = cfg.alpha_grid.iter().map(|a| e[(a * 9.0_f64).ceil() as usize - 1]).collect();
    for m in &study.quantile.methods {
        assert_eq!(m.mean, sample_q, "{}", m.label);
        assert_eq!(m.lo, m.mean);
        assert_eq!(m.hi, m.mean);
    }
    for m in &study.cdf.methods {
        for (z, f) in study.cdf.grid.iter().zip(&m.mean) {
            let ecdf = e.iter().filter(|&&x| x <= *z).count() as f64 / 9.0;
            assert!((f - ecdf).abs() < 1e-15, "{}: z={z}", m.label);
        }
    }
}

#[test]
fn replications_do_not_depend_on_count() {
    let c1 = small(DistConfig::Cauchy, 3);
    let c2 = small(DistConfig::Cauchy, 10);
    let z = c1.z_grid();
    for r in 0..3 {
        assert_eq!(replication(&c1, &z, r).unwrap(), replication(&c2, &z, r).unwrap());
    }
}

#[test]
fn study_is_bit_identical_across_runs_and_thread_counts() {
    let cfg = small(DistConfig::Gev { shape: -0.5 }, 40);
    let a = run_study_with_threads(&cfg, Some(1)).unwrap();
    let b = run_study_with_threads(&cfg, Some(3)).unwrap();
    let c = run_study(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn curves_are_monotone_and_bracketed() {
    for dist in [DistConfig::Normal, DistConfig::Cauchy, DistConfig::Gev { shape: -0.5 }] {
        let study = run_study(&small(dist, 200)).unwrap();
        for bundle in [&study.quantile, &study.cdf] {
            for m in &bundle.methods {
                assert!(m.mean.windows(2).all(|w| w[0] <= w[1]), "{dist:?} {}", m.label);
                assert!(m.lo.iter().zip(&m.hi).all(|(l, h)| l <= h));
            }
        }
        for m in &study.cdf.methods {
            assert!(m.mean.iter().all(|f| (0.0..=1.0).contains(f)));
        }
    }
}

#[test]
fn degenerate_covariate_range_fails_after_resampling() {
    let mut cfg = small(DistConfig::Normal, 2);
    cfg.covariate_ranges[0] = (1.0, 1.0);
    let e = run_study(&cfg).unwrap_err();
    assert!(matches!(e, CliError::Core(rqproc_core::Error::RankDeficient { .. })), "{e:?}");
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn averaged_and_two_step_move_closer_with_n() {
    // mean over replications of sup_α |B̃ₙ(α; 0.5) − B̄ₙ(α)|
    let grid: Vec<f64> = (10..=90).map(|k| k as f64 / 100.0).collect();
    let mean_gap = |n: usize| {
        let mut cfg = small(DistConfig::Normal, 200);
        cfg.n = n;
        let total: f64 =
            (0..200).map(|r| two_step_gap(&simulate_data(&cfg, r, 0).unwrap().data, 0.5, &grid).unwrap()).sum();
        total / 200.0
    };
    assert!(mean_gap(25) > mean_gap(100));
}

#[test]
fn estimates_carry_their_kind() {
    let cfg = small(DistConfig::Normal, 1);
    let sim = simulate_data(&cfg, 0, 0).unwrap();
    let procs = rqproc::sim::estimate_processes(&cfg, &sim).unwrap();
    let kinds: Vec<ProcessKind> = procs.iter().map(|p| p.kind()).collect();
    assert_eq!(
        kinds,
        [
            ProcessKind::Averaged,
            ProcessKind::TwoStep { lambda: 0.5 },
            ProcessKind::TwoStep { lambda: 0.9 },
            ProcessKind::Empirical
        ]
    );
    assert!(procs.iter().all(|p| p.is_monotone()));
}
