//! Summation of the truncated series from tabulated kernel rows.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::kernel::{KernelTable, VStencil};
use crate::special::binomial;
use crate::stable::CoefficientField;
use crate::wavelet::cubic_weights;

use super::export::{FieldSample, PathSample, SynthesisMeta};
use super::{HurstFunction, TruncationSpec};

/// Share of the outermost level shell above which output is flagged as not
/// yet converged.
pub const DEFAULT_SHELL_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SummationOrder {
    /// j ascending, then k ascending.
    LevelMajor,
    /// A seeded random permutation of all terms (for order-independence checks).
    Shuffled(u64),
}

/// `2^{-jv} (Psi(2^j u - k, v) - Psi(-k, v))`.
pub fn w_coefficient(table: &KernelTable, j: i64, k: i64, u: f64, v: f64) -> Result<f64> {
    let s = 2f64.powi(j as i32);
    let a = table.eval(s * u - k as f64, v, 0, 0)?;
    let b = table.eval(-(k as f64), v, 0, 0)?;
    Ok(2f64.powf(-(j as f64) * v) * (a - b))
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Default)]
struct Acc {
    sum: f64,
    comp: f64,
}

impl Acc {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += if self.sum.abs() >= x.abs() { (self.sum - t) + x } else { (x - t) + self.sum };
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Coefficients of one level over the k range any query can touch; `None`
/// when that range is too wide to draw densely (points clustered at a fine
/// level), in which case terms fetch through the field's memo.
struct Level {
    j: i64,
    scale: f64,
    lo: i64,
    coefs: Option<Vec<f64>>,
}

/// Dense blocks longer than this many entries per query point are skipped.
const DENSE_PER_POINT: i64 = 512;

pub struct Synthesizer<'a> {
    pub table: &'a KernelTable,
    pub field: &'a CoefficientField,
    pub spec: TruncationSpec,
    pub order: SummationOrder,
    pub shell_threshold: f64,
}

/// `cubic_weights(t) - cubic_weights(0)` with the factor `t` pulled out, so
/// the difference keeps full relative precision as `t -> 0`.
#[inline]
fn cubic_weight_shift(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        t * (t * t - 2.0 * t - 1.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Grid position of `x`: integer node index and fractional offset.
#[inline]
fn locate(table: &KernelTable, x: f64) -> (i64, f64) {
    let pos = (x - table.grid.x_min as f64) * (1u64 << table.grid.x_step_log2) as f64;
    let i0 = pos.floor();
    (i0 as i64, pos - i0)
}

impl<'a> Synthesizer<'a> {
    pub fn new(table: &'a KernelTable, field: &'a CoefficientField, spec: TruncationSpec) -> Result<Self> {
        spec.validate()?;
        if (table.grid.alpha - field.params.alpha).abs() > 1e-12 {
            return Err(LabError::invalid(format!(
                "kernel table built for alpha = {} but coefficients use alpha = {}",
                table.grid.alpha, field.params.alpha
            )));
        }
        Ok(Self { table, field, spec, order: SummationOrder::LevelMajor, shell_threshold: DEFAULT_SHELL_THRESHOLD })
    }

    pub fn with_order(mut self, order: SummationOrder) -> Self {
        self.order = order;
        self
    }

    fn per_step(&self) -> i64 {
        1i64 << self.table.grid.x_step_log2
    }

    /// k range where the kernel at `x = 2^j u - k` is nonzero and inside the
    /// table, given the grid position `i0` of `2^j u`.
    fn window(&self, i0: i64) -> (i64, i64) {
        let per = self.per_step();
        let nx = self.table.nx() as i64;
        let zi = self.table.zero_index();
        let k_max = self.spec.k_max();
        let lo = (i0 + 3 - nx).div_euclid(per) + i64::from((i0 + 3 - nx).rem_euclid(per) != 0);
        let hi = (i0 + 1 - zi).div_euclid(per);
        (lo.max(-k_max), hi.min(k_max))
    }

    fn levels(&self, u_lo: f64, u_hi: f64, points: usize) -> Vec<Level> {
        let dense_cap = (DENSE_PER_POINT * points as i64).max(1 << 20);
        let n = self.spec.n as i64;
        (-n..=n)
            .map(|j| {
                let scale = 2f64.powi(j as i32);
                let (a_lo, _) = self.window(locate(self.table, scale * u_lo).0);
                let (_, a_hi) = self.window(locate(self.table, scale * u_hi).0);
                let (b_lo, b_hi) = self.window(locate(self.table, 0.0).0);
                let lo = a_lo.min(b_lo);
                let hi = a_hi.max(b_hi);
                let coefs = (hi - lo < dense_cap).then(|| self.field.block(j, lo, hi));
                Level { j, scale, lo, coefs }
            })
            .collect()
    }

    /// Value at `(u, v)` and the part contributed by the outermost shell `|j| = n`.
    fn point(&self, levels: &[Level], u: f64, v: f64, st: &VStencil, q: usize) -> (f64, f64) {
        let per = self.per_step();
        let n = self.spec.n as i64;
        let rows: Vec<Vec<&[f64]>> =
            (0..=q).map(|qq| (0..st.len).map(|a| self.table.node_row(0, qq, st.first + a)).collect()).collect();
        let ln2 = std::f64::consts::LN_2;
        let (ib, _) = locate(self.table, 0.0);
        let wb = cubic_weights(0.0f64);
        let (b_lo, b_hi) = self.window(ib);

        let kernel = |i0: i64, wx: &[f64; 4], k: i64, qq: usize| -> f64 {
            let base = (i0 - per * k - 1) as usize;
            let mut s = 0.0;
            for (a, row) in rows[qq].iter().enumerate() {
                let r = &row[base..base + 4];
                s += st.weights[a] * (wx[0] * r[0] + wx[1] * r[1] + wx[2] * r[2] + wx[3] * r[3]);
            }
            s
        };

        let shuffled = matches!(self.order, SummationOrder::Shuffled(_));
        let mut terms: Vec<(f64, bool)> = Vec::new();
        let mut total = Acc::default();
        let mut shell = Acc::default();
        for lev in levels {
            // Within one cell of the origin both kernel arguments share a
            // stencil, and Psi(2^j u - k) - Psi(-k) is formed from weight
            // differences: at coarse levels the shift 2^j u would otherwise
            // vanish into the rounding of 2^j u - k.
            let shift = lev.scale * u * per as f64;
            let near = shift.abs() < 1.0;
            let (ia, wa) = if near {
                (ib, cubic_weight_shift(shift))
            } else {
                let (ia, ta) = locate(self.table, lev.scale * u);
                (ia, cubic_weights(ta))
            };
            let (a_lo, a_hi) = self.window(ia);
            // Factors C(q,p) (-log 2)^p j^p 2^{-jv} for q' = q - p.
            let base = 2f64.powf(-(lev.j as f64) * v);
            let factors: Vec<f64> = (0..=q)
                .map(|qq| {
                    let p = (q - qq) as i32;
                    binomial(q as u64, p as u64) * (-ln2 * lev.j as f64).powi(p) * base
                })
                .collect();
            let on_shell = lev.j.abs() == n;
            let mut emit = |k: i64| {
                let eps = match &lev.coefs {
                    Some(c) => c[(k - lev.lo) as usize],
                    None => self.field.coefficient(lev.j, k),
                };
                let in_a = k >= a_lo && k <= a_hi;
                let in_b = k >= b_lo && k <= b_hi;
                let mut t = 0.0;
                for (qq, f) in factors.iter().enumerate() {
                    if near {
                        t += f * kernel(ib, &wa, k, qq);
                        continue;
                    }
                    let a = if in_a { kernel(ia, &wa, k, qq) } else { 0.0 };
                    let b = if in_b { kernel(ib, &wb, k, qq) } else { 0.0 };
                    t += f * (a - b);
                }
                let term = eps * t;
                if shuffled {
                    terms.push((term, on_shell));
                } else {
                    total.add(term);
                    if on_shell {
                        shell.add(term);
                    }
                }
            };
            // Ascending k over the union of the two windows.
            let mut ranges: Vec<(i64, i64)> = [(a_lo, a_hi), (b_lo, b_hi)].into_iter().filter(|r| r.0 <= r.1).collect();
            ranges.sort_unstable();
            if ranges.len() == 2 && ranges[1].0 <= ranges[0].1 + 1 {
                ranges = vec![(ranges[0].0, ranges[0].1.max(ranges[1].1))];
            }
            for (lo, hi) in ranges {
                for k in lo..=hi {
                    emit(k);
                }
            }
        }
        if let SummationOrder::Shuffled(seed) = self.order {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u.to_bits());
            for i in (1..terms.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                terms.swap(i, j);
            }
            for (t, s) in terms {
                total.add(t);
                if s {
                    shell.add(t);
                }
            }
        }
        (total.value(), shell.value())
    }

    fn check_query(&self, q: usize, us: &[f64]) -> Result<()> {
        if q > self.table.grid.q_max {
            return Err(LabError::invalid(format!(
                "v-derivative order {q} exceeds the table's {}",
                self.table.grid.q_max
            )));
        }
        let m = self.spec.m;
        if let Some(&u) = us.iter().find(|&&u| !(u.abs() <= m)) {
            return Err(LabError::invalid(format!("grid point {u} lies outside [-M, M] with M = {m}")));
        }
        Ok(())
    }

    /// `∂_v^q X_{M,n}(u_i, v_i)` at each point, with the outermost-shell
    /// share `sup |shell| / sup |total|`.
    pub fn evaluate(&self, points: &[(f64, f64)], q: usize) -> Result<(Vec<f64>, f64)> {
        let us: Vec<f64> = points.iter().map(|p| p.0).collect();
        self.check_query(q, &us)?;
        if points.is_empty() {
            return Ok((Vec::new(), 0.0));
        }
        let stencils: Vec<VStencil> = points.iter().map(|&(_, v)| self.table.stencil(v)).collect::<Result<_>>()?;
        let u_lo = us.iter().cloned().fold(f64::INFINITY, f64::min);
        let u_hi = us.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let levels = self.levels(u_lo, u_hi, points.len());
        let out: Vec<(f64, f64)> =
            points.par_iter().zip(&stencils).map(|(&(u, v), st)| self.point(&levels, u, v, st, q)).collect();
        let sup_total = out.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
        let sup_shell = out.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
        let frac = if sup_total > 0.0 { sup_shell / sup_total } else { 0.0 };
        Ok((out.into_iter().map(|p| p.0).collect(), frac))
    }

    fn meta(&self, q: usize, shell_fraction: f64) -> SynthesisMeta {
        SynthesisMeta {
            seed: self.field.master_seed,
            alpha: self.field.params.alpha,
            beta: self.field.params.beta,
            scale: self.field.params.scale,
            coef_scale: self.field.coef_scale,
            wavelet_order: self.table.wavelet_order,
            truncation: self.spec,
            q,
            terms: self.spec.cardinality(),
            shell_fraction,
            shell_threshold: self.shell_threshold,
            truncation_warning: shell_fraction > self.shell_threshold,
            table_v_range: (self.table.grid.a, self.table.grid.b),
            table_x_max: self.table.grid.x_max as f64,
        }
    }
}

/// `∂_v^q X_{M,n}(u, v)` at explicit points.
pub fn synthesize_points(
    table: &KernelTable,
    field: &CoefficientField,
    spec: TruncationSpec,
    q: usize,
    points: &[(f64, f64)],
) -> Result<Vec<f64>> {
    Ok(Synthesizer::new(table, field, spec)?.evaluate(points, q)?.0)
}

/// `∂_v^q X_{M,n}` on the product grid `u_grid x v_grid`.
pub fn synthesize_field(
    table: &KernelTable,
    field: &CoefficientField,
    spec: TruncationSpec,
    q: usize,
    u_grid: &[f64],
    v_grid: &[f64],
) -> Result<FieldSample> {
    let s = Synthesizer::new(table, field, spec)?;
    let points: Vec<(f64, f64)> = u_grid.iter().flat_map(|&u| v_grid.iter().map(move |&v| (u, v))).collect();
    let (flat, frac) = s.evaluate(&points, q)?;
    let values = if v_grid.is_empty() {
        vec![Vec::new(); u_grid.len()]
    } else {
        flat.chunks(v_grid.len()).map(|c| c.to_vec()).collect()
    };
    Ok(FieldSample { u_grid: u_grid.to_vec(), v_grid: v_grid.to_vec(), q, values, meta: s.meta(q, frac) })
}

/// `Y(t) = X_{M,n}(t, H(t))`.
pub fn lmsm_path(
    table: &KernelTable,
    field: &CoefficientField,
    spec: TruncationSpec,
    hurst: &HurstFunction,
    t_grid: &[f64],
) -> Result<PathSample> {
    hurst.validate(field.params.alpha)?;
    let s = Synthesizer::new(table, field, spec)?;
    let points: Vec<(f64, f64)> = t_grid.iter().map(|&t| (t, hurst.eval(t))).collect();
    let (values, frac) = s.evaluate(&points, 0)?;
    Ok(PathSample { t_grid: t_grid.to_vec(), values, hurst: hurst.clone(), meta: s.meta(0, frac) })
}

/// `sup_probes |X_{M,n+1} - X_{M,n}|` for `n = 0..max_n`.
pub fn convergence_profile(
    table: &KernelTable,
    field: &CoefficientField,
    m: f64,
    max_n: u32,
    q: usize,
    probes: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let mut prev: Option<Vec<f64>> = None;
    let mut deltas = Vec::with_capacity(max_n as usize);
    for n in 0..=max_n {
        let cur = synthesize_points(table, field, TruncationSpec::new(m, n)?, q, probes)?;
        if let Some(p) = prev {
            deltas.push(p.iter().zip(&cur).fold(0.0f64, |s, (a, b)| s.max((a - b).abs())));
        }
        prev = Some(cur);
    }
    Ok(deltas)
}
