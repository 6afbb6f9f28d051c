#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rqproc_core::RegressionData;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Box-Muller, so the oracles do not share the crate's sampler.
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random instance with normal covariates and response.
pub fn instance<R: Rng>(rng: &mut R, n: usize, p: usize) -> RegressionData {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| 2.0 * normal(rng)).collect()).collect();
    let y = (0..n).map(|_| 3.0 * normal(rng) + 1.0).collect();
    RegressionData::from_rows(&rows, y).unwrap()
}

pub fn loss(alpha: f64, r: f64) -> f64 {
    if r >= 0.0 {
        alpha * r
    } else {
        (alpha - 1.0) * r
    }
}

pub fn objective(data: &RegressionData, alpha: f64, beta: &[f64]) -> f64 {
    (0..data.n())
        .map(|i| {
            let fit: f64 = data.row(i).iter().zip(beta).map(|(x, b)| x * b).sum();
            loss(alpha, data.response()[i] - fit)
        })
        .sum()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    let scale = a.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs())).max(1.0);
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            for k in c..m {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for c in (0..m).rev() {
        let s: f64 = (c + 1..m).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// All k-subsets of 0..n in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum of the check-loss objective over all exact fits through `p+1`
/// observations.
pub fn brute_force_rq(data: &RegressionData, alpha: f64) -> (f64, Vec<f64>) {
    let m = data.dim();
    let mut best = (f64::INFINITY, Vec::new());
    for h in subsets(data.n(), m) {
        let a = h.iter().map(|&i| data.row(i).to_vec()).collect();
        let b = h.iter().map(|&i| data.response()[i]).collect();
        if let Some(beta) = gauss_solve(a, b) {
            let f = objective(data, alpha, &beta);
            if f < best.0 {
                best = (f, beta);
            }
        }
    }
    best
}

/// Maximum of `Yᵀa` over the vertices of `{a ∈ [0,1]ⁿ : X*ᵀa = (1−α)X*ᵀ1}`,
/// enumerating basic index sets and bound patterns of the rest.
pub fn dual_vertex_max(data: &RegressionData, alpha: f64) -> f64 {
    let (n, m) = (data.n(), data.dim());
    let colsum: Vec<f64> = (0..m).map(|j| (0..n).map(|i| data.row(i)[j]).sum()).collect();
    let mut best = f64::NEG_INFINITY;
    for h in subsets(n, m) {
        let rest: Vec<usize> = (0..n).filter(|i| !h.contains(i)).collect();
        for mask in 0u32..(1 << rest.len()) {
            let mut a = vec![0.0; n];
            for (k, &i) in rest.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    a[i] = 1.0;
                }
            }
            // X_hᵀ a_h = (1−α) X*ᵀ1 − Σ_rest a_i x_i
            let rhs: Vec<f64> = (0..m)
                .map(|j| (1.0 - alpha) * colsum[j] - rest.iter().map(|&i| a[i] * data.row(i)[j]).sum::<f64>())
                .collect();
            let at: Vec<Vec<f64>> = (0..m).map(|j| h.iter().map(|&i| data.row(i)[j]).collect()).collect();
            let Some(ah) = gauss_solve(at, rhs) else { continue };
            if ah.iter().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
                continue;
            }
            for (k, &i) in h.iter().enumerate() {
                a[i] = ah[k];
            }
            let val: f64 = a.iter().zip(data.response()).map(|(x, y)| x * y).sum();
            best = best.max(val);
        }
    }
    best
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
