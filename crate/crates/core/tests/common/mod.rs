#![allow(clippy::needless_range_loop)]

//! Independent reference implementations used as test oracles. Nothing here
//! calls into the factorized code paths it checks.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Squared-exponential kernel written out longhand.
pub fn se_kernel(a: &[f64], b: &[f64], signal: f64, ls: &[f64]) -> f64 {
    let mut r2 = 0.0;
    for d in 0..a.len() {
        let z = (a[d] - b[d]) / ls[d];
        r2 += z * z;
    }
    signal * (-0.5 * r2).exp()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap()).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap()).unwrap();
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for r in (col + 1)..n {
            let f = m[r][col] / p;
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

pub fn gram_plus_noise(x: &[Vec<f64>], signal: f64, ls: &[f64], noise: f64) -> Vec<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(i, a)| {
            x.iter()
                .enumerate()
                .map(|(j, b)| se_kernel(a, b, signal, ls) + if i == j { noise } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Predictive mean and variance by explicit inversion of `K + σ²I`.
pub fn dense_predict(x: &[Vec<f64>], y: &[f64], signal: f64, ls: &[f64], noise: f64, xs: &[f64]) -> (f64, f64) {
    let inv = dense_inverse(&gram_plus_noise(x, signal, ls, noise));
    let kstar: Vec<f64> = x.iter().map(|xi| se_kernel(xi, xs, signal, ls)).collect();
    let n = x.len();
    let mut mean = 0.0;
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            mean += kstar[i] * inv[i][j] * y[j];
            quad += kstar[i] * inv[i][j] * kstar[j];
        }
    }
    (mean, se_kernel(xs, xs, signal, ls) - quad)
}

pub fn dense_log_marginal_likelihood(x: &[Vec<f64>], y: &[f64], signal: f64, ls: &[f64], noise: f64) -> f64 {
    let a = gram_plus_noise(x, signal, ls, noise);
    let inv = dense_inverse(&a);
    let n = x.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += y[i] * inv[i][j] * y[j];
        }
    }
    -0.5 * quad - 0.5 * determinant(&a).ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

/// Monte-Carlo estimate of E[max(f - incumbent - eps, 0)], f ~ N(mean, sd²),
/// with its standard error.
pub fn mc_expected_improvement<R: Rng>(mean: f64, sd: f64, incumbent: f64, eps: f64, draws: usize, rng: &mut R) -> (f64, f64) {
    let normal = Normal::new(mean, sd).unwrap();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let f: f64 = normal.sample(rng);
        let g = (f - incumbent - eps).max(0.0);
        sum += g;
        sum_sq += g * g;
    }
    let n = draws as f64;
    let est = sum / n;
    let var = (sum_sq / n - est * est) * n / (n - 1.0);
    (est, (var / n).sqrt())
}

/// Returns and sample statistics written directly from the definitions.
pub fn brute_returns(prices: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for t in 0..prices.len() - 1 {
        out.push(prices[t + 1] / prices[t] - 1.0);
    }
    out
}

pub fn brute_mean(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

pub fn brute_cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (brute_mean(a), brute_mean(b));
    let mut s = 0.0;
    for t in 0..a.len() {
        s += (a[t] - ma) * (b[t] - mb);
    }
    s / (a.len() as f64 - 1.0)
}

/// Sharpe ratio from explicit double sums.
pub fn brute_sharpe(w: &[f64], means: &[f64], cov: &[Vec<f64>], rf: f64) -> f64 {
    let mut ret = 0.0;
    let mut var = 0.0;
    for i in 0..w.len() {
        ret += w[i] * means[i];
        for j in 0..w.len() {
            var += w[i] * w[j] * cov[i][j];
        }
    }
    (ret - rf) / var.sqrt()
}

pub fn toy_quadratic(u: &[f64]) -> f64 {
    1.0 - u.iter().map(|x| (x - 0.5) * (x - 0.5)).sum::<f64>()
}
