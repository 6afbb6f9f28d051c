mod common;

use common::{brute_force_rq, close, dual_vertex_max, instance, objective, rng};
use rand::Rng;
use rqproc_core::{rank_scores, rq_path, rq_process, solve_rq, RegressionData};

#[test]
fn solve_rq_matches_exact_fit_enumeration() {
    let mut r = rng(11);
    for _ in 0..300 {
        let p = r.random_range(0..=2);
        let n = r.random_range(p + 2..=10);
        let data = instance(&mut r, n, p);
        let alpha = r.random_range(0.02..0.98);
        let sol = solve_rq(&data, alpha).unwrap();
        let (best, _) = brute_force_rq(&data, alpha);
        assert!(close(sol.objective, best, 1e-9), "n={n} p={p} α={alpha}: {} vs {best}", sol.objective);
        assert!(close(objective(&data, alpha, &sol.coefficients), sol.objective, 1e-12));
        assert_eq!(sol.basis.len(), p + 1);
    }
}

#[test]
fn solution_interpolates_its_basis() {
    let mut r = rng(12);
    for _ in 0..100 {
        let data = instance(&mut r, 9, 2);
        let sol = solve_rq(&data, r.random_range(0.05..0.95)).unwrap();
        for &i in &sol.basis {
            let fit: f64 = data.row(i).iter().zip(&sol.coefficients).map(|(x, b)| x * b).sum();
            assert!((data.response()[i] - fit).abs() < 1e-10 * data.scale());
        }
    }
}

#[test]
fn primal_and_dual_optima_agree_with_vertex_enumeration() {
    // min Σρ_α = max Yᵀa − (1−α)ΣY over the dual polytope
    let mut r = rng(13);
    for _ in 0..20 {
        let data = instance(&mut r, 6, 1);
        let sum_y: f64 = data.response().iter().sum();
        for alpha in [0.1, 0.25, 0.5, 0.77] {
            let dual = dual_vertex_max(&data, alpha) - (1.0 - alpha) * sum_y;
            let sol = solve_rq(&data, alpha).unwrap();
            assert!(close(sol.objective, dual, 1e-9), "{} vs {dual}", sol.objective);
            let a = rank_scores(&data).unwrap().at(alpha).unwrap();
            let ya: f64 = a.iter().zip(data.response()).map(|(x, y)| x * y).sum();
            assert!(close(ya - (1.0 - alpha) * sum_y, dual, 1e-9));
        }
    }
}

#[test]
fn path_agrees_with_pointwise_solves() {
    let mut r = rng(14);
    for _ in 0..20 {
        let data = instance(&mut r, 6, 1);
        let path = rq_path(&data).unwrap();
        for k in 1..=50 {
            let alpha = k as f64 / 51.0;
            let iv = path.interval_at(alpha);
            let sol = solve_rq(&data, alpha).unwrap();
            let via_path = objective(&data, alpha, iv.coefficients());
            assert!(close(via_path, sol.objective, 1e-10), "α={alpha}: {via_path} vs {}", sol.objective);
        }
        for iv in path.intervals() {
            // away from breakpoints the optimum is unique
            let mid = 0.5 * (iv.lo() + iv.hi());
            let sol = solve_rq(&data, mid).unwrap();
            for (a, b) in sol.coefficients.iter().zip(iv.coefficients()) {
                assert!((a - b).abs() < 1e-8 * data.scale());
            }
        }
    }
}

#[test]
fn path_partitions_the_unit_interval() {
    let mut r = rng(15);
    for _ in 0..50 {
        let p = r.random_range(0..=3);
        let data = instance(&mut r, 30, p);
        let path = rq_path(&data).unwrap();
        let iv = path.intervals();
        assert_eq!(iv[0].lo(), 0.0);
        assert_eq!(iv[iv.len() - 1].hi(), 1.0);
        for w in iv.windows(2) {
            assert_eq!(w[0].hi(), w[1].lo());
            assert!(w[0].hi() > w[0].lo());
        }
        let q = rq_process(&data).unwrap();
        assert_eq!(q.interval_count(), iv.len());
    }
}

#[test]
fn ties_and_duplicate_rows_are_solved() {
    let rows = [[0.0], [0.0], [1.0], [1.0], [2.0], [2.0], [3.0]];
    let data = RegressionData::from_rows(&rows, vec![1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0]).unwrap();
    for k in 1..20 {
        let alpha = k as f64 / 20.0;
        let sol = solve_rq(&data, alpha).unwrap();
        let (best, _) = brute_force_rq(&data, alpha);
        assert!(close(sol.objective, best, 1e-12));
    }
    let path = rq_path(&data).unwrap();
    assert!(!path.intervals().is_empty());
}

#[test]
fn rank_deficient_design_is_rejected() {
    let rows = [[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
    let data = RegressionData::from_rows(&rows, vec![1.0, 2.0, 3.0]);
    assert!(matches!(data, Err(rqproc_core::Error::RankDeficient { rank: 2, required: 3 })));
}
