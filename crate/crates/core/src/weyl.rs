//! Magnetic Weyl calculus on dense kernels.
//!
//! `op^A(f)` has the midpoint kernel
//! `K(x, y) = (2 pi)^{-d} Lambda^A(x, y) int dxi e^{i xi.(x - y)} f((x + y)/2, xi)`.
//! On the grid every ordered pair `(x_i, x_j)` is labelled by `x_j` and the
//! offset `z = (i - j) h` (taken modulo `M` into `[-L, L)`), and the midpoint is
//! `x_j + z/2`, half a sample off the grid for odd offsets. The midpoint values
//! are produced by exact Fourier (trigonometric) interpolation along `u`, so the
//! map `f -> K` is a bijection whose inverse [`dequantize`] is computed exactly.
//! With the momentum grid dual to the position grid this gives
//! `||op^A(f)||_HS = (2 pi)^{-d/2} ||f||_{L^2(Xi)}` identically.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{Accum, Mat};
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::{
    japanese_bracket, transform_axis, CenteredDft, Grid, MultiIndex, PhasePoint, PhaseSpaceGrid, SampledField, Sign,
    UniformGrid,
};
use crate::io::{header_f64, header_str, header_usize, read_binary, write_binary};
use crate::magnetics::{Circulation, VectorPotential};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Pointwise evaluator `(x, xi) -> f(x, xi)`.
pub type SymbolFn = Arc<dyn Fn(&[f64], &[f64]) -> C64 + Send + Sync>;

/// Phase-space symbol: samples on a [`PhaseSpaceGrid`] plus an optional evaluator.
#[derive(Clone)]
pub struct Symbol {
    field: SampledField<PhaseSpaceGrid>,
    evaluator: Option<SymbolFn>,
    order: f64,
    rho: f64,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("grid", self.field.grid())
            .field("order", &self.order)
            .field("rho", &self.rho)
            .field("evaluator", &self.evaluator.is_some())
            .finish()
    }
}

impl Symbol {
    /// Samples `f` on the grid and keeps it as evaluator. Order 0, type (0, 0).
    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(&[f64], &[f64]) -> C64 + Send + Sync + 'static) -> Self {
        let f: SymbolFn = Arc::new(f);
        let g = f.clone();
        let field = SampledField::<PhaseSpaceGrid>::from_fn(grid, move |x, xi| g(x, xi));
        Self { field, evaluator: Some(f), order: 0.0, rho: 0.0 }
    }

    pub fn from_samples(field: SampledField<PhaseSpaceGrid>) -> Result<Self> {
        if field.data().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("symbol samples must be finite".into()));
        }
        Ok(Self { field, evaluator: None, order: 0.0, rho: 0.0 })
    }

    pub fn constant(grid: PhaseSpaceGrid, c: C64) -> Self {
        Self::from_fn(grid, move |_, _| c)
    }

    /// Declares the Hoermander class `S^m_{rho,0}`.
    pub fn with_order(mut self, m: f64, rho: f64) -> Self {
        self.order = m;
        self.rho = rho;
        self
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        self.field.grid()
    }

    pub fn samples(&self) -> &SampledField<PhaseSpaceGrid> {
        &self.field
    }

    pub fn evaluator(&self) -> Option<&SymbolFn> {
        self.evaluator.as_ref()
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<C64> {
        match &self.evaluator {
            Some(f) => Ok(f(x, xi)),
            None => Err(Error::NoEvaluator("symbol was built from samples".into())),
        }
    }

    /// The same function sampled on another grid.
    pub fn resample(&self, grid: PhaseSpaceGrid) -> Result<Symbol> {
        let f = self
            .evaluator
            .clone()
            .ok_or_else(|| Error::NoEvaluator("cannot resample a sampled symbol".into()))?;
        let g = f.clone();
        let field = SampledField::<PhaseSpaceGrid>::from_fn(grid, move |x, xi| g(x, xi));
        Ok(Self { field, evaluator: Some(f), order: self.order, rho: self.rho })
    }

    pub fn conj(&self) -> Symbol {
        let evaluator = self.evaluator.clone().map(|f| -> SymbolFn { Arc::new(move |x, xi| f(x, xi).conj()) });
        Self { field: self.field.conj(), evaluator, order: self.order, rho: self.rho }
    }

    pub fn scaled(&self, c: C64) -> Symbol {
        let evaluator = self.evaluator.clone().map(|f| -> SymbolFn { Arc::new(move |x, xi| c * f(x, xi)) });
        Self { field: self.field.scaled(c), evaluator, order: self.order, rho: self.rho }
    }

    /// `L^2(Xi)` norm with the phase-space quadrature weight.
    pub fn norm(&self) -> f64 {
        self.field.norm()
    }

    /// Relative `L^2` mass in the outer tenth of the phase-space box.
    pub fn boundary_mass(&self) -> f64 {
        let g = self.grid();
        let (lx, lp) = (0.9 * g.position().half_width(), 0.9 * g.momentum().half_width());
        let total = self.field.norm_sqr() / g.weight();
        if total == 0.0 {
            return 0.0;
        }
        let outer: f64 = self
            .field
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let p = g.point(*i);
                p.x.iter().any(|v| v.abs() > lx) || p.xi.iter().any(|v| v.abs() > lp)
            })
            .map(|(_, v)| v.norm_sqr())
            .sum();
        outer / total
    }
}

/// Dense integral kernel `K(x, y)` on `grid x grid`; `(K psi)(x) = h^d sum_y K(x, y) psi(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    grid: UniformGrid,
    kernel: Mat<C64>,
}

/// `alpha * a * b` with faer's blocked kernels.
pub(crate) fn matmul<L, R>(a: faer::MatRef<'_, L>, b: faer::MatRef<'_, R>, alpha: C64) -> Mat<C64>
where
    L: faer::traits::Conjugate<Canonical = C64>,
    R: faer::traits::Conjugate<Canonical = C64>,
{
    // Fixed-size output blocks, each multiplied sequentially, so the rounding
    // does not depend on the number of worker threads.
    const BLOCK: usize = 64;
    let (m, n) = (a.nrows(), b.ncols());
    let mut out = Mat::<C64>::zeros(m, n);
    let by_cols = n >= m;
    let len = if by_cols { n } else { m };
    let blocks: Vec<(usize, Mat<C64>)> = (0..len.div_ceil(BLOCK))
        .into_par_iter()
        .map(|i| {
            let start = i * BLOCK;
            let w = BLOCK.min(len - start);
            let (lhs, rhs) = if by_cols { (a, b.subcols(start, w)) } else { (a.subrows(start, w), b) };
            let mut blk = Mat::<C64>::zeros(lhs.nrows(), rhs.ncols());
            faer::linalg::matmul::matmul(blk.as_mut(), Accum::Replace, lhs, rhs, alpha, faer::Par::Seq);
            (start, blk)
        })
        .collect();
    for (start, blk) in blocks {
        let mut dst = if by_cols { out.as_mut().subcols_mut(start, blk.ncols()) } else { out.as_mut().subrows_mut(start, blk.nrows()) };
        dst.copy_from(&blk);
    }
    out
}

impl OperatorMatrix {
    pub fn from_kernel(grid: UniformGrid, kernel: Mat<C64>) -> Result<Self> {
        let n = grid.len();
        if kernel.nrows() != n || kernel.ncols() != n {
            return Err(Error::SampleCount { expected: n * n, found: kernel.nrows() * kernel.ncols() });
        }
        Ok(Self { grid, kernel })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(&[f64], &[f64]) -> C64) -> Self {
        let pts: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
        let kernel = Mat::from_fn(grid.len(), grid.len(), |i, j| f(&pts[i], &pts[j]));
        Self { grid, kernel }
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self { grid, kernel: Mat::zeros(grid.len(), grid.len()) }
    }

    /// Identity: kernel `h^{-d}` on the diagonal.
    pub fn identity(grid: UniformGrid) -> Self {
        let w = 1.0 / grid.weight();
        let kernel = Mat::from_fn(grid.len(), grid.len(), |i, j| if i == j { C64::new(w, 0.0) } else { ZERO });
        Self { grid, kernel }
    }

    /// `|phi><psi|`.
    pub fn rank1(phi: &SampledField<UniformGrid>, psi: &SampledField<UniformGrid>) -> Result<Self> {
        phi.check_same_grid(psi)?;
        let (a, b) = (phi.data(), psi.data());
        let kernel = Mat::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj());
        Ok(Self { grid: *phi.grid(), kernel })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &Mat<C64> {
        &self.kernel
    }

    pub fn kernel_mut(&mut self) -> &mut Mat<C64> {
        &mut self.kernel
    }

    pub fn into_kernel(self) -> Mat<C64> {
        self.kernel
    }

    fn check_grid(&self, other: &UniformGrid) -> Result<()> {
        if &self.grid != other {
            return Err(Error::GridMismatch("operators live on different grids".into()));
        }
        Ok(())
    }

    pub fn apply(&self, psi: &SampledField<UniformGrid>) -> Result<SampledField<UniformGrid>> {
        self.check_grid(psi.grid())?;
        let w = self.grid.weight();
        let v = psi.data();
        let data = (0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                let row = self.kernel.row(i);
                let mut s = ZERO;
                for (j, x) in v.iter().enumerate() {
                    s += row[j] * x;
                }
                s * w
            })
            .collect();
        SampledField::new(self.grid, data)
    }

    /// Kernel of `self o other`: `h^d K1 K2`.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_grid(&other.grid)?;
        let w = C64::new(self.grid.weight(), 0.0);
        Ok(Self { grid: self.grid, kernel: matmul(self.kernel.as_ref(), other.kernel.as_ref(), w) })
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        Self { grid: self.grid, kernel: self.kernel.adjoint().to_owned() }
    }

    pub fn scaled(&self, c: C64) -> OperatorMatrix {
        let k = &self.kernel;
        Self { grid: self.grid, kernel: Mat::from_fn(k.nrows(), k.ncols(), |i, j| c * k[(i, j)]) }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_grid(&other.grid)?;
        let (a, b) = (&self.kernel, &other.kernel);
        Ok(Self { grid: self.grid, kernel: Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + c * b[(i, j)]) })
    }

    pub fn add_assign_scaled(&mut self, c: C64, other: &OperatorMatrix) -> Result<()> {
        self.check_grid(&other.grid)?;
        let n = self.kernel.nrows();
        for j in 0..n {
            for i in 0..n {
                self.kernel[(i, j)] += c * other.kernel[(i, j)];
            }
        }
        Ok(())
    }

    /// `sqrt(sum |K|^2 h^{2d})`.
    pub fn hs_norm(&self) -> f64 {
        self.kernel.norm_l2() * self.grid.weight()
    }

    /// `Tr(A^dagger B)` with quadrature weights.
    pub fn hs_inner(&self, other: &OperatorMatrix) -> Result<C64> {
        self.check_grid(&other.grid)?;
        let n = self.kernel.nrows();
        let mut s = ZERO;
        for j in 0..n {
            for i in 0..n {
                s += self.kernel[(i, j)].conj() * other.kernel[(i, j)];
            }
        }
        Ok(s * self.grid.weight().powi(2))
    }

    /// `||self - other||_HS / ||other||_HS`.
    pub fn rel_hs_distance(&self, other: &OperatorMatrix) -> Result<f64> {
        let diff = self.axpy(C64::new(-1.0, 0.0), other)?;
        let n = other.hs_norm();
        Ok(if n == 0.0 { diff.hs_norm() } else { diff.hs_norm() / n })
    }

    /// Operator norm on `L^2` by power iteration on `K^dagger K`.
    pub fn operator_norm(&self, iterations: usize) -> f64 {
        let n = self.kernel.nrows();
        let mut v = Mat::<C64>::from_fn(n, 1, |i, _| C64::new(1.0 + (i % 7) as f64 * 0.1, 0.3 * ((i % 5) as f64)));
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let nv = v.norm_l2();
            if nv == 0.0 {
                return 0.0;
            }
            v = Mat::from_fn(n, 1, |i, _| v[(i, 0)] / nv);
            let kv = matmul(self.kernel.as_ref(), v.as_ref(), C64::new(1.0, 0.0));
            let w = matmul(self.kernel.adjoint(), kv.as_ref(), C64::new(1.0, 0.0));
            lambda = w.norm_l2();
            v = w;
        }
        lambda.sqrt() * self.grid.weight()
    }

    /// Relative HS mass of kernel entries with `|x - y|_inf > L / 2`.
    pub fn boundary_mass(&self) -> f64 {
        let total = self.kernel.norm_l2().powi(2);
        if total == 0.0 {
            return 0.0;
        }
        let pts: Vec<Vec<f64>> = (0..self.grid.len()).map(|i| self.grid.point(i)).collect();
        let lim = 0.5 * self.grid.half_width();
        let mut outer = 0.0;
        for j in 0..pts.len() {
            for i in 0..pts.len() {
                if pts[i].iter().zip(&pts[j]).any(|(a, b)| (a - b).abs() > lim) {
                    outer += self.kernel[(i, j)].norm_sqr();
                }
            }
        }
        outer / total
    }

    pub fn write_binary(&self, w: impl std::io::Write) -> Result<()> {
        let n = self.grid.len();
        let header = json!({
            "kind": "operator",
            "dimension": self.grid.dim(),
            "half_width": self.grid.half_width(),
            "points": self.grid.points(),
            "layout": "row-major",
            "shape": [n, n],
        });
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.kernel[(i, j)]);
            }
        }
        write_binary(w, &header, &data)
    }

    pub fn read_binary(r: impl std::io::Read) -> Result<Self> {
        let (h, data) = read_binary(r)?;
        if header_str(&h, "kind")? != "operator" || header_str(&h, "layout")? != "row-major" {
            return Err(Error::Format("expected a row-major operator array".into()));
        }
        let grid = UniformGrid::new(header_usize(&h, "dimension")?, header_f64(&h, "half_width")?, header_usize(&h, "points")?)?;
        let n = grid.len();
        if data.len() != n * n {
            return Err(Error::SampleCount { expected: n * n, found: data.len() });
        }
        Ok(Self { grid, kernel: Mat::from_fn(n, n, |i, j| data[i * n + j]) })
    }
}

/// Shifts a periodic `[M; d]` array so that `out[j] = in(j + shift)` (in samples),
/// exactly for integer shifts and by trigonometric interpolation otherwise.
struct Shifter {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Shifter {
    fn new(m: usize) -> Self {
        let mut p = FftPlanner::new();
        Self { m, fwd: p.plan_fft_forward(m), inv: p.plan_fft_inverse(m) }
    }

    fn shift_lane(&self, lane: &mut [C64], s: f64, buf: &mut Vec<C64>) {
        let m = self.m;
        if s.fract() == 0.0 {
            let r = (s as i64).rem_euclid(m as i64) as usize;
            buf.clear();
            buf.extend_from_slice(lane);
            for (j, v) in lane.iter_mut().enumerate() {
                *v = buf[(j + r) % m];
            }
            return;
        }
        self.fwd.process(lane);
        for (q, v) in lane.iter_mut().enumerate() {
            let qs = if q < m / 2 { q as f64 } else { q as f64 - m as f64 };
            *v *= C64::from_polar(1.0 / m as f64, 2.0 * PI * qs * s / m as f64);
        }
        self.inv.process(lane);
    }

    /// `data` is row-major `[M; d]`.
    fn shift(&self, data: &mut [C64], d: usize, shifts: &[f64]) {
        let m = self.m;
        let mut buf = Vec::with_capacity(m);
        if d == 1 {
            self.shift_lane(data, shifts[0], &mut buf);
            return;
        }
        if shifts[1] != 0.0 {
            for row in data.chunks_mut(m) {
                self.shift_lane(row, shifts[1], &mut buf);
            }
        }
        if shifts[0] != 0.0 {
            let mut col = vec![ZERO; m];
            for c in 0..m {
                for r in 0..m {
                    col[r] = data[r * m + c];
                }
                self.shift_lane(&mut col, shifts[0], &mut buf);
                for r in 0..m {
                    data[r * m + c] = col[r];
                }
            }
        }
    }
}

/// Signed per-axis offsets (in samples) of a flat offset index.
fn offsets(grid: &UniformGrid, flat: usize) -> [i64; 2] {
    let idx = grid.unflatten(flat);
    let half = (grid.points() / 2) as i64;
    [idx[0] as i64 - half, idx[1] as i64 - half]
}

/// Flat index of `x_j + offset` modulo the grid.
fn wrapped(grid: &UniformGrid, j: usize, off: &[i64; 2]) -> usize {
    let m = grid.points() as i64;
    let idx = grid.unflatten(j);
    let out: Vec<usize> = (0..grid.dim()).map(|a| (idx[a] as i64 + off[a]).rem_euclid(m) as usize).collect();
    grid.flatten(&out)
}

fn check_symbol_grid(grid: &PhaseSpaceGrid, a: &VectorPotential) -> Result<()> {
    grid.check_dual()?;
    if a.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: a.dim() });
    }
    Ok(())
}

/// `Lambda^A(x_i, x_j)` for all pairs `(i = j + offset, j)`, indexed `[j * n + z]`.
fn pair_phases(grid: &UniformGrid, a: &VectorPotential) -> Option<Vec<C64>> {
    if a.is_zero() {
        return None;
    }
    let circ = Circulation::new(a);
    let n = grid.len();
    let pts: Vec<Vec<f64>> = (0..n).map(|i| grid.point(i)).collect();
    Some(
        (0..n)
            .into_par_iter()
            .flat_map_iter(|j| {
                let pts = &pts;
                let circ = &circ;
                (0..n).map(move |z| circ.phase(&pts[wrapped(grid, j, &offsets(grid, z))], &pts[j]))
            })
            .collect(),
    )
}

/// Magnetic Weyl quantization `op^A(f)` via the midpoint kernel.
pub fn quantize(a: &VectorPotential, f: &Symbol) -> Result<OperatorMatrix> {
    let g = *f.grid();
    check_symbol_grid(&g, a)?;
    let pos = *g.position();
    let (d, m, n) = (g.dim(), g.points(), pos.len());

    // F(u, z) = (dxi / 2 pi)^d sum_xi e^{i xi.z} f(u, xi).
    let mut arr = ArrayD::from_shape_vec(IxDyn(&vec![m; 2 * d]), f.samples().data().to_vec())
        .expect("sample count matches grid");
    let mut dft = CenteredDft::new(m);
    for k in 0..d {
        transform_axis(&mut arr, d + k, Sign::Plus, &mut dft);
    }
    let scale = (g.momentum().step() / (2.0 * PI)).powi(d as i32);
    let fz: Vec<C64> = arr.iter().map(|v| v * scale).collect(); // [u * n + z]

    // G(j, z) = F(x_j + z/2, z).
    let shifter = Shifter::new(m);
    let cols: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|z| {
            let mut col: Vec<C64> = (0..n).map(|u| fz[u * n + z]).collect();
            let off = offsets(&pos, z);
            let s: Vec<f64> = off.iter().map(|o| *o as f64 / 2.0).collect();
            shifter.shift(&mut col, d, &s);
            col
        })
        .collect();
    drop(fz);

    let phases = pair_phases(&pos, a);
    let mut kernel = Mat::<C64>::zeros(n, n);
    for (z, col) in cols.iter().enumerate() {
        let off = offsets(&pos, z);
        for (j, v) in col.iter().enumerate() {
            let i = wrapped(&pos, j, &off);
            kernel[(i, j)] = match &phases {
                Some(p) => p[j * n + z] * v,
                None => *v,
            };
        }
    }
    Ok(OperatorMatrix { grid: pos, kernel })
}

/// Inverse of [`quantize`]: the magnetic Wigner transform of a kernel.
pub fn dequantize(a: &VectorPotential, op: &OperatorMatrix) -> Result<Symbol> {
    let pos = *op.grid();
    let g = PhaseSpaceGrid::new(pos);
    check_symbol_grid(&g, a)?;
    let (d, m, n) = (g.dim(), g.points(), pos.len());
    let phases = pair_phases(&pos, a);
    let shifter = Shifter::new(m);
    let cols: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|z| {
            let off = offsets(&pos, z);
            let mut col: Vec<C64> = (0..n)
                .map(|j| {
                    let v = op.kernel[(wrapped(&pos, j, &off), j)];
                    match &phases {
                        Some(p) => p[j * n + z].conj() * v,
                        None => v,
                    }
                })
                .collect();
            let s: Vec<f64> = off.iter().map(|o| -(*o as f64) / 2.0).collect();
            shifter.shift(&mut col, d, &s);
            col
        })
        .collect();
    let mut fz = vec![ZERO; n * n];
    for (z, col) in cols.into_iter().enumerate() {
        for (u, v) in col.into_iter().enumerate() {
            fz[u * n + z] = v;
        }
    }
    // f(u, xi) = h^d sum_z e^{-i xi.z} F(u, z).
    let mut arr = ArrayD::from_shape_vec(IxDyn(&vec![m; 2 * d]), fz).expect("shape");
    let mut dft = CenteredDft::new(m);
    for k in 0..d {
        transform_axis(&mut arr, d + k, Sign::Minus, &mut dft);
    }
    let w = pos.weight();
    let data = arr.iter().map(|v| v * w).collect();
    Symbol::from_samples(SampledField::new(g, data)?)
}

/// `op1 o op2`.
pub fn op_compose(op1: &OperatorMatrix, op2: &OperatorMatrix) -> Result<OperatorMatrix> {
    op1.compose(op2)
}

pub fn hs_norm(op: &OperatorMatrix) -> f64 {
    op.hs_norm()
}

/// Weyl product `f star^B g = dequantize(op^A(f) o op^A(g))`.
pub fn weyl_product(a: &VectorPotential, f: &Symbol, g: &Symbol) -> Result<Symbol> {
    dequantize(a, &quantize(a, f)?.compose(&quantize(a, g)?)?)
}

/// `(w^A(x0, xi0) psi)(y) = Lambda^A(y, y + x0) e^{-i xi0.(y + x0/2)} psi(y + x0)`.
pub fn weyl_system_apply(
    a: &VectorPotential,
    x: &PhasePoint,
    psi: &SampledField<UniformGrid>,
) -> Result<SampledField<UniformGrid>> {
    let grid = *psi.grid();
    let d = grid.dim();
    if x.dim() != d || a.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.dim() });
    }
    let l = grid.half_width();
    let total = psi.norm_sqr();
    if total > 0.0 {
        let lost: f64 = psi
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                grid.point(*i).iter().zip(&x.x).any(|(p, s)| {
                    let t = p - s;
                    !(-l..l).contains(&t)
                })
            })
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * grid.weight();
        if lost / total > 1e-20 {
            return Err(Error::SupportOverflow(format!(
                "translation by {:?} moves relative mass {:.3e} across the grid boundary",
                x.x,
                lost / total
            )));
        }
    }
    let mut data = psi.data().to_vec();
    let h = grid.step();
    let shifts: Vec<f64> = x.x.iter().map(|s| s / h).collect();
    Shifter::new(grid.points()).shift(&mut data, d, &shifts);
    let circ = Circulation::new(a);
    for (i, v) in data.iter_mut().enumerate() {
        let y = grid.point(i);
        let yx: Vec<f64> = y.iter().zip(&x.x).map(|(p, s)| p + s).collect();
        let ph: f64 = x.xi.iter().zip(y.iter().zip(&x.x)).map(|(k, (p, s))| k * (p + 0.5 * s)).sum();
        *v *= circ.phase(&y, &yx) * C64::from_polar(1.0, -ph);
    }
    SampledField::new(grid, data)
}

/// `x -> e^{i phi(x)}` as a multiplication operator.
pub fn multiplication_operator(grid: UniformGrid, f: impl Fn(&[f64]) -> C64) -> OperatorMatrix {
    let w = 1.0 / grid.weight();
    let vals: Vec<C64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
    let kernel = Mat::from_fn(grid.len(), grid.len(), |i, j| if i == j { vals[i] * w } else { ZERO });
    OperatorMatrix { grid, kernel }
}

/// Random Hilbert-Schmidt operator: sum of 5 Gaussian kernels with random
/// centres in `[-spread, spread]^d`, widths and phases, normalised to unit HS norm.
pub fn random_hs_operator(grid: UniformGrid, spread: f64, rng: &mut impl Rng) -> OperatorMatrix {
    let d = grid.dim();
    let terms: Vec<_> = (0..5)
        .map(|_| {
            let mut v = || (0..d).map(|_| rng.gen_range(-spread..=spread)).collect::<Vec<f64>>();
            let (a, b) = (v(), v());
            let mut v2 = || (0..d).map(|_| rng.gen_range(-2.0..=2.0)).collect::<Vec<f64>>();
            let (p, q) = (v2(), v2());
            let w = rng.gen_range(0.3..0.5);
            let c = C64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..2.0 * PI));
            (a, b, p, q, w, c)
        })
        .collect();
    let op = OperatorMatrix::from_fn(grid, |x, y| {
        terms
            .iter()
            .map(|(a, b, p, q, w, c)| {
                let r: f64 = x.iter().zip(a).map(|(u, v)| (u - v).powi(2)).sum::<f64>()
                    + y.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
                let ph: f64 = x.iter().zip(p).map(|(u, v)| u * v).sum::<f64>() + y.iter().zip(q).map(|(u, v)| u * v).sum::<f64>();
                c * C64::from_polar((-r / (2.0 * w * w)).exp(), ph)
            })
            .sum()
    });
    let n = op.hs_norm();
    op.scaled(C64::new(1.0 / n, 0.0))
}

/// Random Schwartz symbol: sum of 3 complex Gaussians with `x`-centres in
/// `[-spread, spread]^d`, `xi`-centres in `[-1, 1]^d` and widths in `[0.6, 1.0]`.
pub fn random_schwartz_symbol(grid: PhaseSpaceGrid, spread: f64, rng: &mut impl Rng) -> Symbol {
    let d = grid.dim();
    let terms: Vec<_> = (0..3)
        .map(|_| {
            let x0: Vec<f64> = (0..d).map(|_| rng.gen_range(-spread..=spread)).collect();
            let p0: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let (wx, wp) = (rng.gen_range(0.6..1.0), rng.gen_range(0.6..1.0));
            let c = C64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..2.0 * PI));
            (x0, p0, wx, wp, c)
        })
        .collect();
    Symbol::from_fn(grid, move |x, xi| {
        terms
            .iter()
            .map(|(x0, p0, wx, wp, c)| {
                let rx: f64 = x.iter().zip(x0).map(|(u, v)| (u - v).powi(2)).sum();
                let rp: f64 = xi.iter().zip(p0).map(|(u, v)| (u - v).powi(2)).sum();
                c * (-rx / (2.0 * wx * wx) - rp / (2.0 * wp * wp)).exp()
            })
            .sum()
    })
    .with_order(f64::NEG_INFINITY, 1.0)
}

/// Kernel of `op^A(f)` by direct quadrature over the momentum grid with exact
/// midpoints (no interpolation). The discrete `xi`-sum is `2L`-periodic in
/// `x - y`, so pairs with `|x_j - y_j| >= L` on some axis are set to zero.
pub fn quadrature_kernel(a: &VectorPotential, f: &Symbol) -> Result<OperatorMatrix> {
    let g = *f.grid();
    let eval = f.evaluator().ok_or_else(|| Error::NoEvaluator("quadrature needs an evaluator".into()))?.clone();
    let pos = *g.position();
    let circ = Circulation::new(a);
    let ps: Vec<Vec<f64>> = (0..g.momentum().len()).map(|i| g.momentum().point(i)).collect();
    let scale = g.momentum().weight() / (2.0 * PI).powi(pos.dim() as i32);
    let n = pos.len();
    let pts: Vec<Vec<f64>> = (0..n).map(|i| pos.point(i)).collect();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = &pts[i];
            pts.iter()
                .map(|y| {
                    if x.iter().zip(y).any(|(p, q)| (p - q).abs() >= pos.half_width()) {
                        return ZERO;
                    }
                    let u: Vec<f64> = x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect();
                    let s: C64 = ps
                        .iter()
                        .map(|xi| {
                            let ph: f64 = xi.iter().zip(x.iter().zip(y)).map(|(k, (p, q))| k * (p - q)).sum();
                            C64::from_polar(1.0, ph) * eval(&u, xi)
                        })
                        .sum();
                    circ.phase(x, y) * s * scale
                })
                .collect()
        })
        .collect();
    OperatorMatrix::from_kernel(pos, Mat::from_fn(n, n, |i, j| rows[i][j]))
}

/// Estimated seminorms keyed by `(a, alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoermanderReport {
    pub order: f64,
    pub rho: f64,
    pub entries: Vec<SeminormEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormEntry {
    pub a: MultiIndex,
    pub alpha: MultiIndex,
    pub value: f64,
}

/// Maximal total derivative order supported by the finite-difference stencils.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

fn stencil(p: usize) -> (&'static [f64], f64) {
    // Fourth-order centred stencils on offsets -r..=r and their denominators.
    match p {
        0 => (&[1.0], 1.0),
        1 => (&[1.0, -8.0, 0.0, 8.0, -1.0], 12.0),
        2 => (&[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0),
        3 => (&[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0),
        _ => (&[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0], 6.0),
    }
}

fn fd_step(total: usize) -> f64 {
    match total {
        0 | 1 => 1e-3,
        2 => 1e-2,
        3 => 2e-2,
        _ => 5e-2,
    }
}

/// `d_x^a d_xi^alpha f` at `(x, xi)` by tensor-product centred differences.
fn fd_derivative(f: &SymbolFn, x: &[f64], xi: &[f64], orders: &[usize]) -> C64 {
    let total: usize = orders.iter().sum();
    let delta = fd_step(total);
    let d = x.len();
    let stencils: Vec<(&[f64], f64)> = orders.iter().map(|p| stencil(*p)).collect();
    let mut idx = vec![0usize; orders.len()];
    let mut acc = ZERO;
    let mut pt = [0.0; 4];
    loop {
        let mut w = 1.0;
        for (v, (st, _)) in stencils.iter().enumerate() {
            w *= st[idx[v]];
            let r = (st.len() / 2) as f64;
            let base = if v < d { x[v] } else { xi[v - d] };
            pt[v] = base + (idx[v] as f64 - r) * delta;
        }
        if w != 0.0 {
            acc += f(&pt[..d], &pt[d..2 * d]) * w;
        }
        let mut v = 0;
        loop {
            if v == idx.len() {
                let denom: f64 = stencils.iter().map(|(_, q)| q).product::<f64>() * delta.powi(total as i32);
                return acc / denom;
            }
            idx[v] += 1;
            if idx[v] < stencils[v].0.len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
}

/// `||f||_{m,a alpha} = sup <xi>^{-m + |alpha| rho} |d_x^a d_xi^alpha f|`, estimated
/// on the symbol's grid and refined locally by pattern search around the best points.
pub fn seminorm_estimate(f: &Symbol, a: &MultiIndex, alpha: &MultiIndex) -> Result<f64> {
    let d = f.grid().dim();
    if a.dim() != d || alpha.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: a.dim() });
    }
    if a.0.iter().chain(&alpha.0).any(|v| *v < 0) {
        return Err(Error::InvalidInput("derivative orders must be nonnegative".into()));
    }
    let total = a.order() + alpha.order();
    if total > MAX_DERIVATIVE_ORDER {
        return Err(Error::DerivativeOrder(total));
    }
    let ev = f
        .evaluator()
        .cloned()
        .ok_or_else(|| Error::NoEvaluator("seminorms need pointwise evaluation".into()))?;
    let orders: Vec<usize> = a.0.iter().chain(&alpha.0).map(|v| *v as usize).collect();
    let expo = -f.order() + alpha.order() as f64 * f.rho();
    let value = |x: &[f64], xi: &[f64]| -> f64 {
        japanese_bracket(xi).powf(expo) * fd_derivative(&ev, x, xi, &orders).norm()
    };

    let g = f.grid();
    let (px, pp) = (g.position(), g.momentum());
    // Stay clear of the stencil reach at the box edge.
    let margin = 4.0 * fd_step(total);
    let stride = ((g.len() as f64 / 40_000.0).powf(1.0 / (2 * d) as f64).ceil() as usize).max(1);
    let xs: Vec<f64> = (0..px.points()).step_by(stride).map(|i| px.coord(i)).filter(|v| v.abs() < px.half_width() - margin).collect();
    let ps: Vec<f64> = (0..pp.points()).step_by(stride).map(|i| pp.coord(i)).filter(|v| v.abs() < pp.half_width() - margin).collect();
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        points = points.into_iter().flat_map(|p| xs.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }
    for _ in 0..d {
        points = points.into_iter().flat_map(|p| ps.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }
    let mut scored: Vec<(f64, Vec<f64>)> =
        points.into_par_iter().map(|p| (value(&p[..d], &p[d..]), p)).collect();
    scored.sort_by(|u, v| v.0.total_cmp(&u.0));
    let step0 = px.step().max(pp.step()) * stride as f64;
    let refined = scored
        .iter()
        .take(5)
        .map(|(v0, p)| {
            let (mut best, mut p) = (*v0, p.clone());
            let mut step = step0;
            while step > 1e-7 {
                let mut improved = false;
                for c in 0..2 * d {
                    for sgn in [-1.0, 1.0] {
                        let mut q = p.clone();
                        q[c] += sgn * step;
                        let lim = if c < d { px.half_width() } else { pp.half_width() } - margin;
                        if q[c].abs() > lim {
                            continue;
                        }
                        let v = value(&q[..d], &q[d..]);
                        if v > best {
                            best = v;
                            p = q;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            best
        })
        .fold(0.0, f64::max);
    Ok(refined)
}

/// All seminorms with `|a| + |alpha| <= max_order`.
pub fn hoermander_report(f: &Symbol, max_order: usize) -> Result<HoermanderReport> {
    let d = f.grid().dim();
    let mut entries = Vec::new();
    let mut orders: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..2 * d {
        orders = orders.into_iter().flat_map(|o| (0..=max_order as i64).map(move |v| [o.clone(), vec![v]].concat())).collect();
    }
    orders.retain(|o| o.iter().sum::<i64>() as usize <= max_order);
    orders.sort_by_key(|o| (o.iter().sum::<i64>(), o.clone()));
    for o in orders {
        let a = MultiIndex(o[..d].to_vec());
        let alpha = MultiIndex(o[d..].to_vec());
        let value = seminorm_estimate(f, &a, &alpha)?;
        entries.push(SeminormEntry { a, alpha, value });
    }
    Ok(HoermanderReport { order: f.order(), rho: f.rho(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid1(l: f64, m: usize) -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(UniformGrid::new(1, l, m).unwrap())
    }

    fn gauss_symbol(g: PhaseSpaceGrid, c: f64) -> Symbol {
        Symbol::from_fn(g, move |x, xi| {
            let r: f64 = x.iter().map(|v| (v - c) * (v - c)).sum::<f64>() + xi.iter().map(|v| v * v / 4.0).sum::<f64>();
            C64::new((-r).exp(), 0.2 * x[0] * (-r).exp())
        })
    }

    /// Kernel formula evaluated by brute-force quadrature in xi with the
    /// closed-form midpoint values (no interpolation).
    fn dense_oracle(a: &VectorPotential, g: PhaseSpaceGrid, f: impl Fn(&[f64], &[f64]) -> C64) -> OperatorMatrix {
        let pos = *g.position();
        let circ = Circulation::new(a);
        let ps: Vec<Vec<f64>> = (0..g.momentum().len()).map(|i| g.momentum().point(i)).collect();
        let dv = g.momentum().weight();
        let d = pos.dim();
        OperatorMatrix::from_fn(pos, |x, y| {
            let u: Vec<f64> = x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect();
            let s: C64 = ps
                .iter()
                .map(|xi| {
                    let ph: f64 = xi.iter().zip(x.iter().zip(y)).map(|(k, (p, q))| k * (p - q)).sum();
                    C64::from_polar(1.0, ph) * f(&u, xi)
                })
                .sum();
            // The discrete xi-sum is 2L-periodic in x - y; only the band is meaningful.
            if x.iter().zip(y).any(|(p, q)| (p - q).abs() >= pos.half_width()) {
                return ZERO;
            }
            circ.phase(x, y) * s * dv / (2.0 * PI).powi(d as i32)
        })
    }

    #[test]
    fn kernel_matches_dense_oracle() {
        let g = grid1(8.0, 64);
        let a = VectorPotential::from_coefficients(1, &[vec![0.2, 0.1, -0.05]]).unwrap();
        let f = |x: &[f64], xi: &[f64]| C64::new((-(x[0] * x[0] + xi[0] * xi[0]) / 2.0).exp(), 0.0);
        let k = quantize(&a, &Symbol::from_fn(g, f)).unwrap();
        let oracle = dense_oracle(&a, g, f);
        let mut k = k;
        for j in 0..64 {
            for i in 0..64 {
                if (i as i64 - j as i64).abs() >= 32 {
                    k.kernel_mut()[(i, j)] = ZERO;
                }
            }
        }
        let e = k.rel_hs_distance(&oracle).unwrap();
        assert!(e < 1e-10, "{e}");
    }

    #[test]
    fn kernel_matches_dense_oracle_2d() {
        let g = PhaseSpaceGrid::new(UniformGrid::new(2, 6.0, 24).unwrap());
        let a = VectorPotential::symmetric_gauge(0.5);
        let f = |x: &[f64], xi: &[f64]| {
            let r = (x[0] * x[0] + x[1] * x[1] + xi[0] * xi[0] + xi[1] * xi[1]) / 2.0;
            C64::new((-r).exp(), 0.3 * x[1] * (-r).exp())
        };
        let mut k = quantize(&a, &Symbol::from_fn(g, f)).unwrap();
        let oracle = dense_oracle(&a, g, f);
        let pos = *g.position();
        for j in 0..pos.len() {
            for i in 0..pos.len() {
                let (p, q) = (pos.point(i), pos.point(j));
                if p.iter().zip(&q).any(|(u, v)| (u - v).abs() >= pos.half_width()) {
                    k.kernel_mut()[(i, j)] = ZERO;
                }
            }
        }
        let e = k.rel_hs_distance(&oracle).unwrap();
        assert!(e < 1e-8, "{e}");
    }

    #[test]
    fn constant_symbol_gives_identity() {
        for g in [grid1(4.0, 32), PhaseSpaceGrid::new(UniformGrid::new(2, 3.0, 12).unwrap())] {
            let a = if g.dim() == 1 { VectorPotential::constant(&[0.4]).unwrap() } else { VectorPotential::symmetric_gauge(0.7) };
            let k = quantize(&a, &Symbol::constant(g, C64::new(1.0, 0.0))).unwrap();
            let id = OperatorMatrix::identity(*g.position());
            assert!(k.rel_hs_distance(&id).unwrap() < 1e-12);
            let back = dequantize(&a, &id).unwrap();
            assert!(back.samples().data().iter().all(|v| (v - 1.0).norm() < 1e-12));
        }
    }

    #[test]
    fn round_trip_unitarity_and_adjoint() {
        let g = PhaseSpaceGrid::new(UniformGrid::new(2, 5.0, 32).unwrap());
        let a = VectorPotential::symmetric_gauge(0.5);
        let f = gauss_symbol(g, 0.3);
        let k = quantize(&a, &f).unwrap();
        let back = dequantize(&a, &k).unwrap();
        assert!(back.samples().rel_distance(f.samples()).unwrap() < 1e-12);
        let ratio = k.hs_norm() / f.norm();
        assert!((ratio - 1.0 / (2.0 * PI)).abs() < 1e-12);
        let adj = dequantize(&a, &k.adjoint()).unwrap();
        let e = adj.samples().rel_distance(&f.samples().conj()).unwrap();
        assert!(e < 1e-9, "{e}");
    }

    #[test]
    fn real_symbol_is_self_adjoint() {
        let g = grid1(8.0, 96);
        let a = VectorPotential::constant(&[1.3]).unwrap();
        let f = Symbol::from_fn(g, |x, xi| C64::new((-(x[0] * x[0] + xi[0] * xi[0]) / 2.0).exp() * (1.0 + x[0]), 0.0));
        let k = quantize(&a, &f).unwrap();
        let e = k.rel_hs_distance(&k.adjoint()).unwrap();
        assert!(e < 1e-9, "{e}");
    }

    #[test]
    fn momentum_symbol_differentiates() {
        let g = grid1(8.0, 128);
        let k = quantize(&VectorPotential::zero(1), &Symbol::from_fn(g, |_, xi| C64::new(xi[0], 0.0))).unwrap();
        let psi = SampledField::<UniformGrid>::from_fn(*g.position(), |x| C64::new((-x[0] * x[0]).exp(), 0.0));
        let out = k.apply(&psi).unwrap();
        // -i d/dx e^{-x^2} = 2 i x e^{-x^2}
        let exact = SampledField::<UniformGrid>::from_fn(*g.position(), |x| C64::new(0.0, 2.0 * x[0] * (-x[0] * x[0]).exp()));
        assert!(out.rel_distance(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn moyal_product_with_linear_momentum() {
        // L = 2 pi makes sin periodic on the grid and dxi = 1/2.
        let g = grid1(2.0 * PI, 64);
        let a = VectorPotential::zero(1);
        let f = Symbol::from_fn(g, |x, _| C64::new(x[0].sin(), 0.0));
        let p = Symbol::from_fn(g, |_, xi| C64::new(xi[0], 0.0));
        let prod = weyl_product(&a, &f, &p).unwrap();
        let v = g.momentum().half_width();
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let pt = g.point(i);
            if pt.xi[0].abs() > v - 1.0 {
                continue;
            }
            let exact = C64::new(pt.x[0].sin() * pt.xi[0], 0.5 * pt.x[0].cos());
            worst = worst.max((prod.samples().data()[i] - exact).norm());
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn composition_identities() {
        let grid = UniformGrid::new(1, 4.0, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hs_operator(grid, 1.5, &mut rng);
        let b = random_hs_operator(grid, 1.5, &mut rng);
        let id = OperatorMatrix::identity(grid);
        assert!(a.compose(&id).unwrap().rel_hs_distance(&a).unwrap() < 1e-14);
        let lhs = a.compose(&b).unwrap().adjoint();
        let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
        assert!(lhs.rel_hs_distance(&rhs).unwrap() < 1e-14);
        assert!((a.hs_norm() - 1.0).abs() < 1e-12);
        assert!(a.hs_inner(&a).unwrap().re - 1.0 < 1e-12);
        assert!(a.operator_norm(100) <= a.hs_norm() + 1e-12);
    }

    #[test]
    fn hs_norm_of_rank_one_and_zero() {
        let grid = UniformGrid::new(1, 4.0, 32).unwrap();
        let phi = SampledField::<UniformGrid>::from_fn(grid, |x| C64::new((-x[0] * x[0]).exp(), x[0]));
        let psi = SampledField::<UniformGrid>::from_fn(grid, |x| C64::new(1.0 / (1.0 + x[0] * x[0]), 0.0));
        let r = OperatorMatrix::rank1(&phi, &psi).unwrap();
        assert!((r.hs_norm() - phi.norm() * psi.norm()).abs() < 1e-12);
        assert_eq!(OperatorMatrix::zeros(grid).hs_norm(), 0.0);
    }

    #[test]
    fn gauge_covariance() {
        let g = PhaseSpaceGrid::new(UniformGrid::new(2, 3.0, 12).unwrap());
        let a = VectorPotential::symmetric_gauge(0.8);
        let phi = crate::magnetics::GaugeFunction::new(
            crate::magnetics::Polynomial::new(2, vec![0.0, 0.3, -0.2, 0.1, 0.05, -0.1]).unwrap(),
        )
        .unwrap();
        let a2 = crate::magnetics::gauge_shift(&a, &phi).unwrap();
        let f = gauss_symbol(g, 0.2);
        let u = multiplication_operator(*g.position(), |x| C64::from_polar(1.0, phi.eval(x)));
        let lhs = quantize(&a2, &f).unwrap();
        let rhs = u.compose(&quantize(&a, &f).unwrap()).unwrap().compose(&u.adjoint()).unwrap();
        assert!(lhs.rel_hs_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn weyl_system_basics() {
        let grid = UniformGrid::new(1, 8.0, 128).unwrap();
        let psi = SampledField::<UniformGrid>::from_fn(grid, |x| C64::new((-x[0] * x[0]).exp(), 0.0));
        let a = VectorPotential::constant(&[0.6]).unwrap();
        let same = weyl_system_apply(&a, &PhasePoint::origin(1), &psi).unwrap();
        assert!(same.rel_distance(&psi).unwrap() < 1e-15);
        let x = PhasePoint::new(vec![0.8], vec![1.7]).unwrap();
        let out = weyl_system_apply(&a, &x, &psi).unwrap();
        assert!((out.norm() - psi.norm()).abs() < 1e-10 * psi.norm());
        let shifted = weyl_system_apply(&VectorPotential::zero(1), &PhasePoint::new(vec![0.8], vec![0.0]).unwrap(), &psi).unwrap();
        let exact = SampledField::<UniformGrid>::from_fn(grid, |y| C64::new((-(y[0] + 0.8) * (y[0] + 0.8)).exp(), 0.0));
        assert!(shifted.rel_distance(&exact).unwrap() < 1e-10);
        let edge = SampledField::<UniformGrid>::from_fn(grid, |y| C64::new((-(y[0] - 7.0).powi(2)).exp(), 0.0));
        assert!(matches!(
            weyl_system_apply(&a, &PhasePoint::new(vec![-2.0], vec![0.0]).unwrap(), &edge),
            Err(Error::SupportOverflow(_))
        ));
    }

    #[test]
    fn seminorms() {
        let g = grid1(6.0, 64);
        let one = Symbol::constant(g, C64::new(1.0, 0.0));
        for (a, al) in [(1, 0), (0, 2), (2, 2), (1, 3)] {
            let v = seminorm_estimate(&one, &MultiIndex(vec![a]), &MultiIndex(vec![al])).unwrap();
            assert!(v < 1e-8, "{a} {al} {v}");
        }
        let s = Symbol::from_fn(g, |x, xi| C64::new(x[0].sin() * xi[0].sin(), 0.0));
        let v = seminorm_estimate(&s, &MultiIndex(vec![0]), &MultiIndex(vec![0])).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
        let v2 = seminorm_estimate(&s, &MultiIndex(vec![1]), &MultiIndex(vec![1])).unwrap();
        assert!((v2 - 1.0).abs() < 1e-6, "{v2}");
        assert!(matches!(
            seminorm_estimate(&s, &MultiIndex(vec![3]), &MultiIndex(vec![2])),
            Err(Error::DerivativeOrder(5))
        ));
        let sampled = Symbol::from_samples(s.samples().clone()).unwrap();
        assert!(seminorm_estimate(&sampled, &MultiIndex(vec![0]), &MultiIndex(vec![0])).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let grid = UniformGrid::new(1, 2.0, 8).unwrap();
        let op = random_hs_operator(grid, 1.0, &mut ChaCha8Rng::seed_from_u64(1));
        let mut buf = Vec::new();
        op.write_binary(&mut buf).unwrap();
        assert_eq!(OperatorMatrix::read_binary(&buf[..]).unwrap(), op);
    }
}
