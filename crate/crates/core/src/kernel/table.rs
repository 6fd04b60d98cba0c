//! Tabulated kernel: `∂_x^p ∂_v^q Psi` on a uniform x grid and Chebyshev v
//! nodes, plus the dual kernel, with cubic interpolation in both variables.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;
use crate::wavelet::{cubic_weights, WaveletSpec};

use super::weights::{cell_weights, left_transform};
use super::{check_alpha, check_v, dual_prefactor, DEFAULT_Q_MAX, MAX_P};

pub const TABLE_MAGIC: &[u8; 8] = b"LMSMKT01";

/// Grid layout of a kernel table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableGrid {
    pub alpha: f64,
    /// v range `[a, b]`; a single node when `a == b`.
    pub a: f64,
    pub b: f64,
    pub nv: usize,
    pub x_min: i64,
    pub x_max: i64,
    /// x step is `2^-x_step_log2`.
    pub x_step_log2: u32,
    /// psi is sampled at spacing `2^-sample_level` for the product rule.
    pub sample_level: u32,
    pub p_max: usize,
    pub q_max: usize,
}

impl TableGrid {
    /// Default layout for wavelet order `order`: 33 nodes on
    /// `[1/alpha + d, 1 - d]` with `d = min(0.01, (1 - 1/alpha) / 4)`, x in
    /// `[-R-2, 64]` at step `2^-8`.
    pub fn standard(alpha: f64, order: usize) -> Self {
        let d = (0.25 * (1.0 - 1.0 / alpha)).min(0.01);
        Self {
            alpha,
            a: 1.0 / alpha + d,
            b: 1.0 - d,
            nv: 33,
            x_min: -(2 * order as i64 - 1) - 2,
            x_max: 64,
            x_step_log2: 8,
            sample_level: 10,
            p_max: 1,
            q_max: DEFAULT_Q_MAX,
        }
    }

    /// One v node; exact for constant Hurst functions.
    pub fn single(alpha: f64, v: f64, order: usize) -> Self {
        Self { a: v, b: v, nv: 1, ..Self::standard(alpha, order) }
    }

    /// Whether `v` lies in `[a, b]` up to rounding.
    pub fn covers(&self, v: f64) -> bool {
        let tol = 1e-12;
        v >= self.a - tol && v <= self.b + tol
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_v(self.a, self.alpha)?;
        check_v(self.b, self.alpha)?;
        if self.nv == 0 || (self.nv == 1) != (self.a == self.b) || self.a > self.b {
            return Err(LabError::invalid("v grid needs a < b with several nodes, or a == b with one"));
        }
        if self.p_max > MAX_P || self.q_max > 8 {
            return Err(LabError::invalid(format!("table orders p={} q={} are too large", self.p_max, self.q_max)));
        }
        if self.x_min >= self.x_max || self.x_step_log2 > self.sample_level || self.sample_level > 16 {
            return Err(LabError::invalid("inconsistent x grid"));
        }
        Ok(())
    }

    pub fn x_step(&self) -> f64 {
        0.5f64.powi(self.x_step_log2 as i32)
    }

    pub fn nx(&self) -> usize {
        ((self.x_max - self.x_min) << self.x_step_log2) as usize + 1
    }

    /// Chebyshev-Lobatto nodes in ascending order.
    pub fn v_nodes(&self) -> Vec<f64> {
        if self.nv == 1 {
            return vec![self.a];
        }
        let (mid, half) = (0.5 * (self.a + self.b), 0.5 * (self.b - self.a));
        let last = (self.nv - 1) as f64;
        (0..self.nv)
            .map(|i| match i {
                0 => self.a,
                i if i == self.nv - 1 => self.b,
                i => mid - half * (std::f64::consts::PI * i as f64 / last).cos(),
            })
            .collect()
    }
}

/// Everything in the binary container except the values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableHeader {
    pub grid: TableGrid,
    pub wavelet_order: usize,
    pub scalar: String,
    pub v_nodes: Vec<f64>,
    pub kernel_values: usize,
    pub dual_values: usize,
    /// Free-form provenance supplied by the caller.
    #[serde(default)]
    pub provenance: serde_json::Value,
}

/// Samples of `J(x) = ∫ (x-s)_+^e log^c(x-s) psi^(r)(s) ds` at
/// `x = (x_first + stride n) 2^-level`, `n = 0..count`, for `c = 0..=c_max`.
fn power_log_slices<T: Real>(
    w: &WaveletSpec<T>,
    e: T,
    c_max: usize,
    r: usize,
    reflect: bool,
    level: u32,
    x_first: i64,
    stride: i64,
    count: usize,
) -> Vec<Vec<T>> {
    let (mut first, mut samples) = w.psi_samples(r, level);
    if reflect {
        first = -(first + samples.len() as i64 - 1);
        samples.reverse();
    }
    let x_last = x_first + stride * (count as i64 - 1);
    let d_max = (x_last - first + 1).max(0) as usize;
    let log_h = -T::from_int(level as i64) * T::LN_2();
    let rule = GaussLegendre::<T>::unit(16);
    let weights = cell_weights(e, c_max, log_h, d_max, &rule);
    let scale = (-(e + T::one()) * T::from_int(level as i64) * T::LN_2()).rexp();
    weights
        .iter()
        .map(|wc| left_transform(&samples, first, wc, x_first, stride, count).into_iter().map(|v| v * scale).collect())
        .collect()
}

/// `∂_x^p ∂_v^q Psi(x, v)` for every `q <= q_max` on the grid
/// `x = (x_first + stride n) 2^-level`; returned as `[q][n]`.
pub fn kernel_slices<T: Real>(
    w: &WaveletSpec<T>,
    alpha: f64,
    v: T,
    p: usize,
    q_max: usize,
    level: u32,
    x_first: i64,
    stride: i64,
    count: usize,
) -> Result<Vec<Vec<T>>> {
    if p > MAX_P || p > w.max_derivative + 1 {
        return Err(LabError::invalid(format!("x-derivative order {p} is not available")));
    }
    let beta = v - T::one() / T::c(alpha);
    if p == 0 {
        return Ok(power_log_slices(w, beta, q_max, 0, false, level, x_first, stride, count));
    }
    let lower = power_log_slices(w, beta - T::one(), q_max, p - 1, false, level, x_first, stride, count);
    Ok((0..=q_max)
        .map(|q| {
            (0..count)
                .map(|n| {
                    let mut s = beta * lower[q][n];
                    if q > 0 {
                        s = s + T::from_int(q as i64) * lower[q - 1][n];
                    }
                    s
                })
                .collect()
        })
        .collect())
}

/// Dual kernel at `x = -(y_first + stride n) 2^-level`, i.e. on the
/// reflected grid `y = -x`.
pub fn dual_slice<T: Real>(
    w: &WaveletSpec<T>,
    alpha: f64,
    v: f64,
    level: u32,
    y_first: i64,
    stride: i64,
    count: usize,
) -> Result<Vec<T>> {
    check_v(v, alpha)?;
    if w.max_derivative < 2 {
        return Err(LabError::invalid("dual kernel needs the second derivative of psi"));
    }
    let e = T::c(1.0 / alpha - v);
    let pre = T::c(dual_prefactor(v, alpha));
    let s = power_log_slices(w, e, 0, 2, true, level, y_first, stride, count);
    Ok(s.into_iter().next().unwrap().into_iter().map(|x| x * pre).collect())
}

/// Interpolation stencil in v: node indices and Lagrange weights.
#[derive(Clone, Copy, Debug)]
pub struct VStencil {
    pub first: usize,
    pub len: usize,
    pub weights: [f64; 4],
}

/// One x-row of the table at fixed `v`, `p`, `q`.
#[derive(Clone, Debug)]
pub struct KernelRow {
    pub x_min: f64,
    pub x_max: f64,
    inv_step: f64,
    values: Vec<f64>,
    /// Row of the dual kernel, stored on the reflected coordinate.
    reflected: bool,
}

impl KernelRow {
    pub fn from_values(x_min: f64, step: f64, values: Vec<f64>, reflected: bool) -> Self {
        let x_max = x_min + step * (values.len() - 1) as f64;
        Self { x_min, x_max, inv_step: 1.0 / step, values, reflected }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        1.0 / self.inv_step
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let y = if self.reflected { -x } else { x };
        interp_row(&self.values, self.x_min, self.x_max, self.inv_step, y)
    }

    /// Value at grid index `i` (zero below the grid). Synthesis uses this
    /// when the argument lies exactly on the grid.
    #[inline]
    pub fn at(&self, i: i64) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.values.get(i as usize).copied().unwrap_or(0.0)
        }
    }
}

/// Cubic interpolation on a uniform row; zero below, `x^-2` decay above.
#[inline]
fn interp_row(vals: &[f64], x_min: f64, x_max: f64, inv_step: f64, x: f64) -> f64 {
    if x <= x_min {
        return 0.0;
    }
    if x >= x_max {
        let last = vals[vals.len() - 1];
        return last * (x_max / x).powi(2);
    }
    let pos = (x - x_min) * inv_step;
    let i0 = pos.floor();
    let t = pos - i0;
    let i0 = i0 as i64;
    let n = vals.len() as i64;
    let at = |i: i64| if i < 0 || i >= n { 0.0 } else { vals[i as usize] };
    if i0 + 2 >= n {
        // Last cell: quadratic through the three final nodes.
        let (a, b, c) = (at(n - 3), at(n - 2), at(n - 1));
        let s = t + (i0 - (n - 2)) as f64;
        return b + 0.5 * s * (c - a) + 0.5 * s * s * (a - 2.0 * b + c);
    }
    let w = cubic_weights(t);
    w[0] * at(i0 - 1) + w[1] * at(i0) + w[2] * at(i0 + 1) + w[3] * at(i0 + 2)
}

#[derive(Clone, Debug)]
pub struct KernelTable {
    pub grid: TableGrid,
    pub wavelet_order: usize,
    pub scalar: String,
    pub v_nodes: Vec<f64>,
    /// Flattened `[p][q][v][x]`.
    values: Vec<f64>,
    /// Flattened `[v][y]` with `y = -x`.
    dual: Vec<f64>,
    pub provenance: serde_json::Value,
}

/// Kernel rows `[p][q][x]` and the dual row of one v node.
type NodeRows = (Vec<Vec<Vec<f64>>>, Vec<f64>);

/// Builds a table in parallel over v nodes. Computation runs in `T`,
/// storage is `f64`.
pub fn build_kernel_table<T: Real>(w: &WaveletSpec<T>, grid: &TableGrid) -> Result<KernelTable> {
    grid.validate()?;
    if grid.sample_level > w.table.level {
        return Err(LabError::invalid("sample level exceeds the wavelet table level"));
    }
    if grid.p_max > w.max_derivative + 1 {
        return Err(LabError::invalid("wavelet table lacks the derivatives needed for p_max"));
    }
    let v_nodes = grid.v_nodes();
    let nx = grid.nx();
    let stride = 1i64 << (grid.sample_level - grid.x_step_log2);
    let x_first = grid.x_min << grid.sample_level;
    let per_v: Vec<NodeRows> = v_nodes
        .par_iter()
        .map(|&v| -> Result<_> {
            let mut rows = Vec::with_capacity(grid.p_max + 1);
            for p in 0..=grid.p_max {
                let s = kernel_slices(w, grid.alpha, T::c(v), p, grid.q_max, grid.sample_level, x_first, stride, nx)?;
                rows.push(s.into_iter().map(|r| r.into_iter().map(|x| x.f()).collect()).collect());
            }
            let d = dual_slice(w, grid.alpha, v, grid.sample_level, x_first, stride, nx)?;
            Ok((rows, d.into_iter().map(|x| x.f()).collect()))
        })
        .collect::<Result<_>>()?;

    let nv = v_nodes.len();
    let mut values = vec![0.0; (grid.p_max + 1) * (grid.q_max + 1) * nv * nx];
    let mut dual = Vec::with_capacity(nv * nx);
    for (iv, (rows, d)) in per_v.into_iter().enumerate() {
        for (p, qs) in rows.into_iter().enumerate() {
            for (q, row) in qs.into_iter().enumerate() {
                let off = ((p * (grid.q_max + 1) + q) * nv + iv) * nx;
                values[off..off + nx].copy_from_slice(&row);
            }
        }
        dual.extend(d);
    }
    // Exact zero left of the support.
    let zero_upto = ((1 - w.order as i64 - grid.x_min) << grid.x_step_log2).clamp(0, nx as i64) as usize;
    for chunk in values.chunks_mut(nx) {
        chunk[..=zero_upto.min(nx - 1)].iter_mut().for_each(|x| *x = 0.0);
    }
    let table = KernelTable {
        grid: grid.clone(),
        wavelet_order: w.order,
        scalar: T::LABEL.to_string(),
        v_nodes,
        values,
        dual,
        provenance: serde_json::Value::Null,
    };
    table.check_finite()?;
    Ok(table)
}

impl KernelTable {
    fn check_finite(&self) -> Result<()> {
        if self.values.iter().chain(&self.dual).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(LabError::Format("non-finite kernel values".into()))
        }
    }

    pub fn nx(&self) -> usize {
        self.grid.nx()
    }

    pub fn x_grid(&self) -> Vec<f64> {
        let h = self.grid.x_step();
        (0..self.nx()).map(|i| self.grid.x_min as f64 + i as f64 * h).collect()
    }

    pub fn covers(&self, v: f64) -> bool {
        self.grid.covers(v)
    }

    /// Stored samples of `∂_x^p ∂_v^q Psi(., v_iv)` on the x grid.
    pub fn node_row(&self, p: usize, q: usize, iv: usize) -> &[f64] {
        self.row_slice(p, q, iv)
    }

    /// Grid index of `x = 1 - N`; every stored kernel value at or below it is zero.
    pub fn zero_index(&self) -> i64 {
        (1 - self.wavelet_order as i64 - self.grid.x_min) << self.grid.x_step_log2
    }

    fn row_slice(&self, p: usize, q: usize, iv: usize) -> &[f64] {
        let nx = self.nx();
        let off = ((p * (self.grid.q_max + 1) + q) * self.v_nodes.len() + iv) * nx;
        &self.values[off..off + nx]
    }

    fn dual_slice(&self, iv: usize) -> &[f64] {
        let nx = self.nx();
        &self.dual[iv * nx..(iv + 1) * nx]
    }

    fn check_orders(&self, p: usize, q: usize) -> Result<()> {
        if p > self.grid.p_max || q > self.grid.q_max {
            return Err(LabError::invalid(format!(
                "table holds p <= {}, q <= {}; requested p = {p}, q = {q}",
                self.grid.p_max, self.grid.q_max
            )));
        }
        Ok(())
    }

    /// Lagrange stencil on the (up to) four nodes around `v`.
    pub fn stencil(&self, v: f64) -> Result<VStencil> {
        if !self.covers(v) {
            return Err(LabError::TableRange(v));
        }
        let nv = self.v_nodes.len();
        let len = nv.min(4);
        if nv == 1 {
            return Ok(VStencil { first: 0, len: 1, weights: [1.0, 0.0, 0.0, 0.0] });
        }
        let nodes = &self.v_nodes;
        // Index of the cell containing v, from the cosine map.
        let (mid, half) = (0.5 * (self.grid.a + self.grid.b), 0.5 * (self.grid.b - self.grid.a));
        let c = ((mid - v) / half).clamp(-1.0, 1.0);
        let mut i = (c.acos() / std::f64::consts::PI * (nv - 1) as f64).floor() as usize;
        i = i.min(nv - 2);
        while i > 0 && v < nodes[i] {
            i -= 1;
        }
        while i + 2 < nv && v > nodes[i + 1] {
            i += 1;
        }
        let first = i.saturating_sub(1).min(nv - len);
        let mut weights = [0.0; 4];
        for a in 0..len {
            let mut l = 1.0;
            for b in 0..len {
                if a != b {
                    l *= (v - nodes[first + b]) / (nodes[first + a] - nodes[first + b]);
                }
            }
            weights[a] = l;
        }
        Ok(VStencil { first, len, weights })
    }

    /// Row of `∂_x^p ∂_v^q Psi(., v)` on the table x grid.
    pub fn row(&self, v: f64, p: usize, q: usize) -> Result<KernelRow> {
        self.check_orders(p, q)?;
        let st = self.stencil(v)?;
        let mut out = vec![0.0; self.nx()];
        for a in 0..st.len {
            let w = st.weights[a];
            for (o, x) in out.iter_mut().zip(self.row_slice(p, q, st.first + a)) {
                *o += w * x;
            }
        }
        Ok(KernelRow::from_values(self.grid.x_min as f64, self.grid.x_step(), out, false))
    }

    /// Row of the dual kernel at `v`.
    pub fn dual_row(&self, v: f64) -> Result<KernelRow> {
        let st = self.stencil(v)?;
        let mut out = vec![0.0; self.nx()];
        for a in 0..st.len {
            let w = st.weights[a];
            for (o, x) in out.iter_mut().zip(self.dual_slice(st.first + a)) {
                *o += w * x;
            }
        }
        Ok(KernelRow::from_values(self.grid.x_min as f64, self.grid.x_step(), out, true))
    }

    /// `∂_x^p ∂_v^q Psi(x, v)` by cubic interpolation in both variables.
    pub fn eval(&self, x: f64, v: f64, p: usize, q: usize) -> Result<f64> {
        self.check_orders(p, q)?;
        let st = self.stencil(v)?;
        Ok(self.eval_with(&st, x, p, q))
    }

    /// As [`KernelTable::eval`] with a precomputed stencil.
    #[inline]
    pub fn eval_with(&self, st: &VStencil, x: f64, p: usize, q: usize) -> f64 {
        let (x_min, x_max, inv) = (self.grid.x_min as f64, self.grid.x_max as f64, 1.0 / self.grid.x_step());
        let mut s = 0.0;
        for a in 0..st.len {
            s += st.weights[a] * interp_row(self.row_slice(p, q, st.first + a), x_min, x_max, inv, x);
        }
        s
    }

    pub fn dual(&self, x: f64, v: f64) -> Result<f64> {
        let st = self.stencil(v)?;
        let (x_min, x_max, inv) = (self.grid.x_min as f64, self.grid.x_max as f64, 1.0 / self.grid.x_step());
        let mut s = 0.0;
        for a in 0..st.len {
            s += st.weights[a] * interp_row(self.dual_slice(st.first + a), x_min, x_max, inv, -x);
        }
        Ok(s)
    }

    /// Raw samples of the dual kernel at node `iv`, in ascending x.
    pub fn dual_node_samples(&self, iv: usize) -> Vec<(f64, f64)> {
        let h = self.grid.x_step();
        self.dual_slice(iv)
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &d)| (-(self.grid.x_min as f64 + i as f64 * h), d))
            .collect()
    }

    pub fn header(&self) -> TableHeader {
        TableHeader {
            grid: self.grid.clone(),
            wavelet_order: self.wavelet_order,
            scalar: self.scalar.clone(),
            v_nodes: self.v_nodes.clone(),
            kernel_values: self.values.len(),
            dual_values: self.dual.len(),
            provenance: self.provenance.clone(),
        }
    }

    /// Magic, little-endian header length, JSON header, then values as
    /// little-endian f64 (kernel block followed by dual block).
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = serde_json::to_vec(&self.header())?;
        out.write_all(TABLE_MAGIC)?;
        out.write_all(&(header.len() as u64).to_le_bytes())?;
        out.write_all(&header)?;
        let mut buf = Vec::with_capacity(8 * (self.values.len() + self.dual.len()));
        for x in self.values.iter().chain(&self.dual) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != TABLE_MAGIC {
            return Err(LabError::Format("bad magic bytes".into()));
        }
        let mut len = [0u8; 8];
        input.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len);
        if len > 1 << 26 {
            return Err(LabError::Format(format!("header length {len} is implausible")));
        }
        let mut hbuf = vec![0u8; len as usize];
        input.read_exact(&mut hbuf)?;
        let header: TableHeader = serde_json::from_slice(&hbuf)?;
        header.grid.validate()?;
        let nx = header.grid.nx();
        let nv = header.grid.nv;
        let want = (header.grid.p_max + 1) * (header.grid.q_max + 1) * nv * nx;
        if header.kernel_values != want || header.dual_values != nv * nx || header.v_nodes.len() != nv {
            return Err(LabError::Format("value counts do not match the grid".into()));
        }
        let mut read_block = |n: usize| -> Result<Vec<f64>> {
            let mut raw = vec![0u8; 8 * n];
            input.read_exact(&mut raw)?;
            Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        };
        let values = read_block(want)?;
        let dual = read_block(nv * nx)?;
        let table = KernelTable {
            grid: header.grid,
            wavelet_order: header.wavelet_order,
            scalar: header.scalar,
            v_nodes: header.v_nodes,
            values,
            dual,
            provenance: header.provenance,
        };
        table.check_finite()?;
        Ok(table)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}
