//! Cascade evaluation of the scaling function and wavelet on dyadic grids.

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Samples of `phi^(p)` and `psi^(p)` at the points `i / 2^level`.
#[derive(Clone, Debug)]
pub struct DyadicTable<T> {
    pub level: u32,
    /// Index of the first stored psi sample, i.e. `(1 - N) 2^level`.
    pub psi_first: i64,
    /// `psi[p][i]` is `psi^(p)((psi_first + i) / 2^level)`.
    pub psi: Vec<Vec<T>>,
    /// `phi[p][i]` is `phi^(p)(i / 2^level)` on `[0, 2N - 1]`.
    pub phi: Vec<Vec<T>>,
}

/// Dense Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col] == T::zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - f * v;
            }
            let v = b[col];
            b[row] = b[row] - f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

/// `phi^(p)` at the interior integers `1..=2N-2`.
fn integer_values<T: Real>(h: &[T], p: usize) -> Result<Vec<T>> {
    let len = h.len() as i64; // 2N
    let m = (len - 2) as usize;
    let lambda = T::c(0.5f64.powi(p as i32));
    let hk = |k: i64| if (0..len).contains(&k) { h[k as usize] } else { T::zero() };
    let a: Vec<Vec<T>> =
        (1..=m as i64).map(|n| (1..=m as i64).map(|c| T::SQRT_2() * hk(2 * n - c)).collect()).collect();
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let norm_row: Vec<T> = (1..=m as i64).map(|n| T::from_int(n).powi(p as i32)).collect();
    let rhs_norm = T::c(sign * factorial(p));
    let mut best: Option<(f64, Vec<T>)> = None;
    // Drop one eigen-equation in favour of the normalization; try rows until
    // the full system is satisfied.
    for drop in (0..m).rev() {
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in a.iter().enumerate() {
            if i == drop {
                continue;
            }
            let mut r = row.clone();
            r[i] = r[i] - lambda;
            rows.push(r);
            rhs.push(T::zero());
        }
        rows.push(norm_row.clone());
        rhs.push(rhs_norm);
        let Some(x) = solve_dense(rows, rhs) else { continue };
        let mut resid = 0.0f64;
        let mut scale = 0.0f64;
        for (i, row) in a.iter().enumerate() {
            let mut s = -lambda * x[i];
            for (c, &v) in row.iter().enumerate() {
                s = s + v * x[c];
            }
            resid = resid.max(s.abs().f());
            scale = scale.max(x[i].abs().f());
        }
        let rel = resid / scale.max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|(r, _)| rel < *r) {
            best = Some((rel, x));
        }
        if rel < 1e3 * T::unit_roundoff().f() {
            break;
        }
    }
    match best {
        Some((rel, x)) if rel < 1e-8 => Ok(x),
        Some((rel, _)) => Err(LabError::Factorization {
            order: h.len() / 2,
            reason: format!("cascade eigenvector residual {rel:e} for derivative {p}"),
        }),
        None => Err(LabError::Factorization { order: h.len() / 2, reason: "singular cascade system".into() }),
    }
}

/// Builds the dyadic table to `level` for derivatives `0..=max_p`.
pub fn cascade<T: Real>(h: &[T], g: &[T], g_first: i64, level: u32, max_p: usize) -> Result<DyadicTable<T>> {
    let two_n = h.len() as i64;
    let order = two_n / 2;
    let scale = 1i64 << level;
    let phi_len = ((two_n - 1) * scale + 1) as usize;
    let psi_first = (1 - order) * scale;
    let psi_len = ((2 * order - 1) * scale + 1) as usize;
    let mut phis = Vec::with_capacity(max_p + 1);
    let mut psis = Vec::with_capacity(max_p + 1);
    for p in 0..=max_p {
        let factor = T::SQRT_2() * T::c(2f64.powi(p as i32));
        let ints = integer_values(h, p)?;
        let mut phi = vec![T::zero(); phi_len];
        for (n, &v) in ints.iter().enumerate() {
            phi[(n as i64 + 1) as usize * scale as usize] = v;
        }
        for l in 1..=level {
            let stride = 1usize << (level - l);
            let mut i = stride;
            while i < phi_len {
                // odd multiples of the new stride: phi(x) = c sum h_k phi(2x - k)
                let mut s = T::zero();
                for (k, &hk) in h.iter().enumerate() {
                    let idx = 2 * i as i64 - k as i64 * scale;
                    if idx >= 0 && (idx as usize) < phi_len {
                        s = s + hk * phi[idx as usize];
                    }
                }
                phi[i] = factor * s;
                i += 2 * stride;
            }
        }
        let mut psi = vec![T::zero(); psi_len];
        for (j, out) in psi.iter_mut().enumerate() {
            let i = psi_first + j as i64;
            let mut s = T::zero();
            for (m, &gk) in g.iter().enumerate() {
                let k = g_first + m as i64;
                let idx = 2 * i - k * scale;
                if idx >= 0 && (idx as usize) < phi_len {
                    s = s + gk * phi[idx as usize];
                }
            }
            *out = factor * s;
        }
        phis.push(phi);
        psis.push(psi);
    }
    Ok(DyadicTable { level, psi_first, psi: psis, phi: phis })
}

impl<T: Real> DyadicTable<T> {
    pub fn step(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Value at the dyadic node with absolute index `i` (zero off support).
    #[inline]
    pub fn node(&self, p: usize, i: i64) -> T {
        let j = i - self.psi_first;
        if j < 0 || j as usize >= self.psi[p].len() {
            T::zero()
        } else {
            self.psi[p][j as usize]
        }
    }

    /// Cubic Lagrange interpolation through the four nearest nodes.
    pub fn interpolate(&self, p: usize, x: T) -> T {
        let scaled = x * T::c((1u64 << self.level) as f64);
        let i0 = scaled.floor();
        let t = scaled - i0;
        let i0 = i0.to_i64().unwrap_or(i64::MIN / 2);
        let w = cubic_weights(t);
        w[0] * self.node(p, i0 - 1)
            + w[1] * self.node(p, i0)
            + w[2] * self.node(p, i0 + 1)
            + w[3] * self.node(p, i0 + 2)
    }
}

/// Lagrange weights on nodes {-1, 0, 1, 2} evaluated at `t`.
#[inline]
pub fn cubic_weights<T: Real>(t: T) -> [T; 4] {
    let one = T::one();
    let two = T::c(2.0);
    let six = T::c(6.0);
    let tm1 = t - one;
    let tm2 = t - two;
    let tp1 = t + one;
    [-t * tm1 * tm2 / six, tp1 * tm1 * tm2 / two, -tp1 * t * tm2 / two, tp1 * t * tm1 / six]
}
