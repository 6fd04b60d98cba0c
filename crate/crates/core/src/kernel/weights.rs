//! Product-integration weights for `∫ (x-s)_+^e log^c(x-s) f(s) ds` when `f`
//! is the piecewise cubic Lagrange interpolant of samples on a uniform grid.

use crate::quadrature::GaussLegendre;
use crate::scalar::Real;
use crate::special::binomial;

/// Cubic Lagrange basis on nodes {-1, 0, 1, 2}; row `i` holds the
/// coefficients of `t^0..t^3`.
const LAGRANGE: [[f64; 4]; 4] = [
    [0.0, -1.0 / 3.0, 0.5, -1.0 / 6.0],
    [1.0, -0.5, -1.0, 0.5],
    [0.0, 1.0, 0.5, -0.5],
    [0.0, -1.0 / 6.0, 0.0, 1.0 / 6.0],
];

fn lagrange_at<T: Real>(i: usize, t: T) -> T {
    let c = &LAGRANGE[i];
    ((T::c(c[3]) * t + T::c(c[2])) * t + T::c(c[1])) * t + T::c(c[0])
}

/// Coefficients of `w_i(1 - tau)` in powers of `tau`.
fn reflected_lagrange() -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for n in 0..4 {
            for k in 0..=n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                out[i][k] += LAGRANGE[i][n] * binomial(n as u64, k as u64) * sign;
            }
        }
    }
    out
}

/// Convolution weights for one exponent: `weights[c][d + 1]` multiplies the
/// sample `f_l` in the value at grid index `l + d`, for `d = -1..=d_max`.
///
/// The value at grid index `X` is `h^(e+1) sum_l f_l weights[c][X - l + 1]`
/// with the logarithm taken of the physical distance `h (X - s/h)`.
pub fn cell_weights<T: Real>(e: T, c_max: usize, log_h: T, d_max: usize, rule: &GaussLegendre<T>) -> Vec<Vec<T>> {
    let m_max = d_max + 2;
    // mu[c][i][m] for m = 0..=m_max (m = 0 is identically zero).
    let mut mu = vec![vec![vec![T::zero(); m_max + 1]; 4]; c_max + 1];

    // Cell adjacent to the singularity: exact moments of tau^(e+k) log^a tau.
    let refl = reflected_lagrange();
    let mut pow_log = vec![vec![T::zero(); c_max + 1]; 4];
    for (k, row) in pow_log.iter_mut().enumerate() {
        let s = e + T::from_int(k as i64 + 1);
        let mut fact = T::one();
        for (a, slot) in row.iter_mut().enumerate() {
            if a > 0 {
                fact = fact * T::from_int(a as i64);
            }
            let sign = if a % 2 == 0 { T::one() } else { -T::one() };
            *slot = sign * fact / s.powi(a as i32 + 1);
        }
    }
    for c in 0..=c_max {
        for i in 0..4 {
            let mut acc = T::zero();
            for k in 0..4 {
                if refl[i][k] == 0.0 {
                    continue;
                }
                let mut inner = T::zero();
                for a in 0..=c {
                    inner = inner + T::c(binomial(c as u64, a as u64)) * log_h.powi((c - a) as i32) * pow_log[k][a];
                }
                acc = acc + T::c(refl[i][k]) * inner;
            }
            mu[c][i][1] = acc;
        }
    }

    // Remaining cells are smooth: Gauss-Legendre on [0, 1].
    let nodes: Vec<(T, T, [T; 4])> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| (t, w, [lagrange_at(0, t), lagrange_at(1, t), lagrange_at(2, t), lagrange_at(3, t)]))
        .collect();
    let mut logs = vec![T::zero(); c_max + 1];
    for m in 2..=m_max {
        let mf = T::from_int(m as i64);
        for &(t, w, lw) in &nodes {
            let y = mf - t;
            let ly = y.rln();
            let base = w * (e * ly).rexp();
            let l = log_h + ly;
            let mut lp = T::one();
            for slot in logs.iter_mut() {
                *slot = base * lp;
                lp = lp * l;
            }
            for c in 0..=c_max {
                for i in 0..4 {
                    mu[c][i][m] = mu[c][i][m] + logs[c] * lw[i];
                }
            }
        }
    }

    (0..=c_max)
        .map(|c| {
            (0..=d_max + 1)
                .map(|j| {
                    let d = j as i64 - 1;
                    let mut s = T::zero();
                    for i in 0..4 {
                        let m = d + i as i64 - 1;
                        if m >= 1 {
                            s = s + mu[c][i][m as usize];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Values `sum_l f_l weights[X - l + 1]` for `X = x_first + stride * n`,
/// `n = 0..count`, with samples `f_l` starting at grid index `first`.
pub fn left_transform<T: Real>(
    samples: &[T],
    first: i64,
    weights: &[T],
    x_first: i64,
    stride: i64,
    count: usize,
) -> Vec<T> {
    let x_last = x_first + stride * (count as i64 - 1);
    let mut out = vec![T::zero(); count];
    if x_last < first - 1 || samples.is_empty() {
        return out;
    }
    let need = (x_last - first + 2) as usize;
    assert!(weights.len() >= need, "weight table too short");
    let conv = T::convolve(samples, &weights[..need]);
    for (n, slot) in out.iter_mut().enumerate() {
        let x = x_first + stride * n as i64;
        let idx = x - first + 1;
        if idx >= 0 && (idx as usize) < conv.len() {
            *slot = conv[idx as usize];
        }
    }
    out
}
