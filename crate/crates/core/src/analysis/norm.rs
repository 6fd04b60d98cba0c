//! Grid restriction of the Hölder-Lipschitz norm on `[-M, M] x [a, b]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::synthesis::FieldSample;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridNorm {
    pub gamma: f64,
    pub total: f64,
    /// `sup |f|`.
    pub sup: f64,
    /// `sup |f(u,v) - f(u',v)| / |u-u'|^γ`.
    pub u_holder: f64,
    /// `sup |f(u,v) - f(u,v')| / |v-v'|`.
    pub v_lipschitz: f64,
    /// `sup |f(u,v) - f(u',v) - f(u,v') + f(u',v')| / (|u-u'|^γ |v-v'|)`.
    pub mixed: f64,
}

#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// The four-term norm of `values[i][m] = f(u[i], v[m])` by enumeration of
/// all grid pairs (`0/0 = 0`).
pub fn grid_norm(u: &[f64], v: &[f64], values: &[Vec<f64>], gamma: f64) -> Result<GridNorm> {
    if values.len() != u.len() || values.iter().any(|r| r.len() != v.len()) {
        return Err(LabError::invalid("value array does not match the grid"));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(LabError::invalid(format!("gamma = {gamma} must lie in [0, 1]")));
    }
    let sup = values.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let nv = v.len();
    let v_lipschitz = values
        .iter()
        .map(|row| {
            let mut best = 0.0f64;
            for m in 0..nv {
                for m2 in m + 1..nv {
                    best = best.max(ratio((row[m] - row[m2]).abs(), (v[m] - v[m2]).abs()));
                }
            }
            best
        })
        .fold(0.0f64, f64::max);
    let (u_holder, mixed) = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let (mut hu, mut hm) = (0.0f64, 0.0f64);
            for i2 in i + 1..u.len() {
                let du = (u[i] - u[i2]).abs().powf(gamma);
                let (a, b) = (&values[i], &values[i2]);
                for m in 0..nv {
                    hu = hu.max(ratio((a[m] - b[m]).abs(), du));
                    for m2 in m + 1..nv {
                        let second = a[m] - b[m] - a[m2] + b[m2];
                        hm = hm.max(ratio(second.abs(), du * (v[m] - v[m2]).abs()));
                    }
                }
            }
            (hu, hm)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    Ok(GridNorm { gamma, total: sup + u_holder + v_lipschitz + mixed, sup, u_holder, v_lipschitz, mixed })
}

/// [`grid_norm`] of a synthesized field, with `gamma` restricted below
/// `min v - 1/alpha`.
pub fn e_gamma_grid_norm(field: &FieldSample, gamma: f64) -> Result<GridNorm> {
    let a = field.v_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = a - 1.0 / field.meta.alpha;
    if !(gamma >= 0.0 && gamma < bound) {
        return Err(LabError::invalid(format!("gamma = {gamma} must lie in [0, {bound})")));
    }
    grid_norm(&field.u_grid, &field.v_grid, &field.values, gamma)
}
