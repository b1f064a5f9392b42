//! The magnetic Gabor-Parseval frame
//! `G_{alpha,k}(x) = (2 pi)^{-d/2} Lambda^A(x, alpha) e^{i k.(x - alpha)} chi(x - alpha)`
//! over the lattice `Z^d` and integer modulations `k` (dual lattice `2 pi Z^d`).
//!
//! Frame vectors are supported in `alpha + (-1, 1)^d`, so every per-`alpha`
//! computation runs on a small local patch of the grid. The modulation sum
//! is a separable matrix transform over the patch: integer frequencies are
//! not commensurate with the grid step in general, so a plain FFT would not
//! evaluate the coefficients at the right frequencies.

use std::f64::consts::PI;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Grid, MultiIndex, SampledField, UniformGrid};
use crate::io::fmt_f64;
use crate::magnetics::{Circulation, VectorPotential};

/// Relative mass outside the safe box above which a truncation warning is issued.
pub const LEAKAGE_TOLERANCE: f64 = 1e-12;

fn bump(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step `s(u) = sigma(u) / (sigma(u) + sigma(1 - u))`, `sigma(u) = e^{-1/u}`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = bump(u);
    a / (a + bump(1.0 - u))
}

/// Window `chi(x) = prod_j chi0(x_j)` with `chi0(t) = cos((pi/2) s(|t|))` on `|t| < 1`.
///
/// `s(1 - u) = 1 - s(u)` gives `chi0(t)^2 + chi0(t - 1)^2 = 1` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    samples: Vec<f64>,
}

impl Window {
    /// Number of cached profile samples on `[-1, 1]`.
    pub const CACHED_SAMPLES: usize = 1001;

    pub fn new() -> Self {
        let n = Self::CACHED_SAMPLES;
        let samples = (0..n)
            .map(|i| Self::profile(-1.0 + 2.0 * i as f64 / (n - 1) as f64))
            .collect();
        Self { samples }
    }

    /// The 1D profile `chi0`.
    pub fn profile(t: f64) -> f64 {
        let a = t.abs();
        if a >= 1.0 {
            0.0
        } else {
            (0.5 * PI * smooth_step(a)).cos()
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|t| Self::profile(*t)).product()
    }

    /// Profile samples on an equispaced grid of `[-1, 1]` including both endpoints.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

impl Default for Window {
    fn default() -> Self {
        Self::new()
    }
}

pub fn build_window() -> Window {
    Window::new()
}

/// Frame label `(alpha, k)`; the dual-lattice point is `2 pi k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameId {
    pub alpha: MultiIndex,
    pub k: MultiIndex,
}

impl FrameId {
    pub fn new(alpha: Vec<i64>, k: Vec<i64>) -> Result<Self> {
        if alpha.len() != k.len() {
            return Err(Error::DimensionMismatch { expected: alpha.len(), found: k.len() });
        }
        Ok(Self { alpha: MultiIndex::new(alpha)?, k: MultiIndex::new(k)? })
    }
}

impl std::fmt::Display for FrameId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(alpha={}, k={})", self.alpha, self.k)
    }
}

/// Window points of one lattice coordinate along an axis, with the modulated
/// profile `e^{i k t_m} chi0(t_m)` for every `k` in `-K..=K`.
#[derive(Debug, Clone)]
struct AxisPatch {
    start: usize,
    len: usize,
    // (2K+1) x len, row-major in k.
    basis: Vec<C64>,
}

/// Random smooth wave function: sum of 3 modulated Gaussians with centres in
/// `[-spread, spread]^d`, widths in `[0.3, 0.6]` and momenta in `[-3, 3]^d`,
/// normalised in `L^2`.
pub fn random_wavefunction(grid: UniformGrid, spread: f64, rng: &mut impl Rng) -> SampledField<UniformGrid> {
    let d = grid.dim();
    let terms: Vec<_> = (0..3)
        .map(|_| {
            let c0: Vec<f64> = (0..d).map(|_| rng.gen_range(-spread..=spread)).collect();
            let p0: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..=3.0)).collect();
            let w = rng.gen_range(0.3..0.6);
            let amp = C64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..2.0 * PI));
            (c0, p0, w, amp)
        })
        .collect();
    let psi = SampledField::<UniformGrid>::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(c0, p0, w, amp)| {
                let r: f64 = x.iter().zip(c0).map(|(u, v)| (u - v).powi(2)).sum();
                let ph: f64 = x.iter().zip(p0).map(|(u, v)| u * v).sum();
                amp * C64::from_polar((-r / (2.0 * w * w)).exp(), ph)
            })
            .sum()
    });
    let n = psi.norm();
    psi.scaled(C64::new(1.0 / n, 0.0))
}

/// Truncated magnetic Gabor frame on a grid.
#[derive(Debug, Clone)]
pub struct FrameSpec {
    window: Window,
    n: usize,
    k: usize,
    grid: UniformGrid,
    potential: VectorPotential,
    patches: Vec<AxisPatch>,
    // Per alpha: (2 pi)^{-d/2} Lambda^A(x, alpha) over the local patch.
    phases: Vec<Vec<C64>>,
}

impl FrameSpec {
    pub fn new(grid: UniformGrid, n: usize, k: usize, potential: VectorPotential) -> Result<Self> {
        let d = grid.dim();
        if potential.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: potential.dim() });
        }
        let l = grid.half_width();
        if l < n as f64 + 1.0 {
            return Err(Error::InvalidFrame(format!(
                "grid half-width L = {l} must be at least N + 1 = {}",
                n + 1
            )));
        }
        let nyquist = grid.points() as f64 * PI / l;
        if 2.0 * k as f64 >= nyquist {
            return Err(Error::InvalidFrame(format!(
                "modulations unresolved: need 2K < M pi / L, got 2K = {} and M pi / L = {nyquist:.6}",
                2 * k
            )));
        }
        let kk = 2 * k + 1;
        let patches: Vec<AxisPatch> = (-(n as i64)..=n as i64)
            .map(|a| {
                let a = a as f64;
                let idx: Vec<usize> =
                    (0..grid.points()).filter(|&j| (grid.coord(j) - a).abs() < 1.0).collect();
                let start = idx[0];
                let len = idx.len();
                let mut basis = Vec::with_capacity(kk * len);
                for kv in -(k as i64)..=k as i64 {
                    for &j in &idx {
                        let t = grid.coord(j) - a;
                        basis.push(C64::from_polar(Window::profile(t), kv as f64 * t));
                    }
                }
                AxisPatch { start, len, basis }
            })
            .collect();

        let circ = Circulation::new(&potential);
        let norm = (2.0 * PI).powf(-(d as f64) / 2.0);
        let alphas = alpha_list(d, n);
        let phases = alphas
            .iter()
            .map(|alpha| {
                let pat: Vec<&AxisPatch> = alpha.iter().map(|a| &patches[(a + n as i64) as usize]).collect();
                let a: Vec<f64> = alpha.iter().map(|v| *v as f64).collect();
                patch_points(&pat)
                    .into_iter()
                    .map(|idx| {
                        let x: Vec<f64> = idx.iter().map(|j| grid.coord(*j)).collect();
                        circ.phase(&x, &a) * norm
                    })
                    .collect()
            })
            .collect();
        Ok(Self { window: Window::new(), n, k, grid, potential, patches, phases })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn lattice_truncation(&self) -> usize {
        self.n
    }

    pub fn modulation_truncation(&self) -> usize {
        self.k
    }

    pub fn potential(&self) -> &VectorPotential {
        &self.potential
    }

    /// Number of lattice points `(2N+1)^d`.
    pub fn alpha_count(&self) -> usize {
        (2 * self.n + 1).pow(self.dim() as u32)
    }

    /// Number of modulations per lattice point `(2K+1)^d`.
    pub fn k_count(&self) -> usize {
        (2 * self.k + 1).pow(self.dim() as u32)
    }

    /// Number of frame vectors in the truncation.
    pub fn len(&self) -> usize {
        self.alpha_count() * self.k_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat position of an id: alpha-major, both blocks lexicographic.
    pub fn index_of(&self, id: &FrameId) -> Result<usize> {
        let d = self.dim();
        if id.alpha.dim() != d || id.k.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: id.alpha.dim() });
        }
        let (n, k) = (self.n as i64, self.k as i64);
        if id.alpha.sup_norm() > n || id.k.sup_norm() > k {
            return Err(Error::IdOutOfRange(id.to_string()));
        }
        let ai = id.alpha.0.iter().fold(0, |acc, a| acc * (2 * n + 1) + (a + n)) as usize;
        let ki = id.k.0.iter().fold(0, |acc, v| acc * (2 * k + 1) + (v + k)) as usize;
        Ok(ai * self.k_count() + ki)
    }

    pub fn id_at(&self, index: usize) -> FrameId {
        let d = self.dim();
        let (ai, ki) = (index / self.k_count(), index % self.k_count());
        FrameId {
            alpha: MultiIndex(unflatten_centered(ai, self.n, d)),
            k: MultiIndex(unflatten_centered(ki, self.k, d)),
        }
    }

    /// All ids in flat order.
    pub fn ids(&self) -> Vec<FrameId> {
        (0..self.len()).map(|i| self.id_at(i)).collect()
    }

    /// Flat indices of the ids with `|alpha|_inf <= n_box` and `|k|_inf <= k_box`.
    pub fn box_indices(&self, n_box: usize, k_box: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let id = self.id_at(i);
                id.alpha.sup_norm() <= n_box as i64 && id.k.sup_norm() <= k_box as i64
            })
            .collect()
    }

    fn alpha_patches(&self, alpha: &[i64]) -> Vec<&AxisPatch> {
        alpha.iter().map(|a| &self.patches[(a + self.n as i64) as usize]).collect()
    }

    /// Local samples of a frame vector: grid flat indices and values.
    pub fn local_vector(&self, id: &FrameId) -> Result<(Vec<usize>, Vec<C64>)> {
        let index = self.index_of(id)?;
        let ai = index / self.k_count();
        let pats = self.alpha_patches(&id.alpha.0);
        let points = patch_points(&pats);
        let kk: Vec<usize> = id.k.0.iter().map(|v| (v + self.k as i64) as usize).collect();
        let phase = &self.phases[ai];
        let mut flat = Vec::with_capacity(points.len());
        let mut vals = Vec::with_capacity(points.len());
        for (p, idx) in points.iter().enumerate() {
            let mut v = phase[p];
            for (axis, pat) in pats.iter().enumerate() {
                v *= pat.basis[kk[axis] * pat.len + idx[axis] - pat.start];
            }
            flat.push(self.grid.flatten(idx));
            vals.push(v);
        }
        Ok((flat, vals))
    }

    /// Samples of `G_{alpha,k}` on the whole grid.
    pub fn frame_vector(&self, id: &FrameId) -> Result<SampledField<UniformGrid>> {
        let (flat, vals) = self.local_vector(id)?;
        let mut data = vec![C64::new(0.0, 0.0); self.grid.len()];
        for (i, v) in flat.into_iter().zip(vals) {
            data[i] = v;
        }
        SampledField::new(self.grid, data)
    }

    /// Dense synthesis matrix with the frame vectors as columns (grid points x ids).
    pub fn frame_matrix(&self) -> Mat<C64> {
        let cols: Vec<(Vec<usize>, Vec<C64>)> = (0..self.len())
            .into_par_iter()
            .map(|i| self.local_vector(&self.id_at(i)).expect("index in range"))
            .collect();
        let mut g = Mat::<C64>::zeros(self.grid.len(), self.len());
        for (j, (flat, vals)) in cols.into_iter().enumerate() {
            for (i, v) in flat.into_iter().zip(vals) {
                g[(i, j)] = v;
            }
        }
        g
    }

    /// Relative mass of `psi` outside the safe box `[-(N-1), N-1]^d`.
    pub fn safe_box_leakage(&self, psi: &SampledField<UniformGrid>) -> f64 {
        let total = psi.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let edge = self.n as f64 - 1.0 + 1e-12;
        let outside: f64 = psi
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.point(*i).iter().any(|x| x.abs() > edge))
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * self.grid.weight();
        outside / total
    }

    fn check_grid(&self, psi: &SampledField<UniformGrid>) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch("vector is not sampled on the frame grid".into()));
        }
        Ok(())
    }

    /// Coefficients `<G_{alpha,k}, psi>` over the truncation.
    pub fn analyze(&self, psi: &SampledField<UniformGrid>) -> Result<FrameCoefficients> {
        self.check_grid(psi)?;
        let leakage = self.safe_box_leakage(psi);
        if leakage > LEAKAGE_TOLERANCE {
            log::warn!("truncation warning: relative mass {leakage:.3e} outside the safe box");
        }
        let d = self.dim();
        let w = self.grid.weight();
        let kk = 2 * self.k + 1;
        let alphas = alpha_list(d, self.n);
        let blocks: Vec<Vec<C64>> = alphas
            .par_iter()
            .enumerate()
            .map(|(ai, alpha)| {
                let pats = self.alpha_patches(alpha);
                let phase = &self.phases[ai];
                let local: Vec<C64> = patch_points(&pats)
                    .iter()
                    .zip(phase)
                    .map(|(idx, ph)| ph.conj() * psi.data()[self.grid.flatten(idx)])
                    .collect();
                let mut out = match d {
                    1 => conj_transform(&pats[0].basis, kk, pats[0].len, &local, 1),
                    _ => {
                        let (p1, p2) = (pats[0].len, pats[1].len);
                        // local is p1 x p2; contract axis 1 then axis 0.
                        let t = conj_transform(&pats[1].basis, kk, p2, &local, p1); // p1 x kk
                        let tt = transpose(&t, p1, kk); // kk x p1
                        let u = conj_transform(&pats[0].basis, kk, p1, &tt, kk); // kk(k2) x kk(k1)
                        transpose(&u, kk, kk)
                    }
                };
                out.iter_mut().for_each(|v| *v *= w);
                out
            })
            .collect();
        Ok(FrameCoefficients {
            dim: d,
            n: self.n,
            k: self.k,
            data: blocks.concat(),
            leakage,
        })
    }

    /// `sum_id c(id) G_id` over the truncation.
    pub fn synthesize(&self, c: &FrameCoefficients) -> Result<SampledField<UniformGrid>> {
        if c.dim != self.dim() || c.n != self.n || c.k != self.k {
            return Err(Error::InvalidFrame("coefficients belong to a different truncation".into()));
        }
        let d = self.dim();
        let kk = 2 * self.k + 1;
        let nk = self.k_count();
        let alphas = alpha_list(d, self.n);
        let parts: Vec<(Vec<usize>, Vec<C64>)> = alphas
            .par_iter()
            .enumerate()
            .map(|(ai, alpha)| {
                let pats = self.alpha_patches(alpha);
                let coeffs = &c.data[ai * nk..(ai + 1) * nk];
                let local = match d {
                    1 => direct_transform(&pats[0].basis, kk, pats[0].len, coeffs, 1),
                    _ => {
                        let (p1, p2) = (pats[0].len, pats[1].len);
                        // coeffs is kk(k1) x kk(k2).
                        let t = direct_transform(&pats[1].basis, kk, p2, coeffs, kk); // k1 x p2
                        let tt = transpose(&t, kk, p2); // p2 x k1
                        let u = direct_transform(&pats[0].basis, kk, p1, &tt, p2); // p2 x p1
                        transpose(&u, p2, p1)
                    }
                };
                let points = patch_points(&pats);
                let flat = points.iter().map(|idx| self.grid.flatten(idx)).collect();
                let vals = local.iter().zip(&self.phases[ai]).map(|(v, ph)| v * ph).collect();
                (flat, vals)
            })
            .collect();
        let mut data = vec![C64::new(0.0, 0.0); self.grid.len()];
        for (flat, vals) in parts {
            for (i, v) in flat.into_iter().zip(vals) {
                data[i] += v;
            }
        }
        SampledField::new(self.grid, data)
    }

    /// `|sum |c|^2 - ||psi||^2| / ||psi||^2`.
    pub fn parseval_defect(&self, psi: &SampledField<UniformGrid>) -> Result<f64> {
        let norm = psi.norm_sqr();
        if norm == 0.0 {
            return Err(Error::InvalidInput("Parseval defect of the zero vector".into()));
        }
        let c = self.analyze(psi)?;
        Ok((c.norm_sqr() - norm).abs() / norm)
    }

    /// `<G_{id1}, G_{id2}>` by quadrature.
    pub fn gramian(&self, id1: &FrameId, id2: &FrameId) -> Result<C64> {
        let (f1, v1) = self.local_vector(id1)?;
        let (f2, v2) = self.local_vector(id2)?;
        let mut s = C64::new(0.0, 0.0);
        let mut j = 0;
        // Both index lists are increasing.
        for (i, a) in f1.iter().zip(&v1) {
            while j < f2.len() && f2[j] < *i {
                j += 1;
            }
            if j < f2.len() && f2[j] == *i {
                s += a.conj() * v2[j];
            }
        }
        Ok(s * self.grid.weight())
    }
}

/// Frame coefficients over the truncation box, in the flat id order of [`FrameSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameCoefficients {
    dim: usize,
    n: usize,
    k: usize,
    data: Vec<C64>,
    /// Relative mass of the analysed vector outside the safe box.
    pub leakage: f64,
}

impl FrameCoefficients {
    pub fn zeros(spec: &FrameSpec) -> Self {
        Self {
            dim: spec.dim(),
            n: spec.n,
            k: spec.k,
            data: vec![C64::new(0.0, 0.0); spec.len()],
            leakage: 0.0,
        }
    }

    pub fn from_data(spec: &FrameSpec, data: Vec<C64>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::SampleCount { expected: spec.len(), found: data.len() });
        }
        Ok(Self { dim: spec.dim(), n: spec.n, k: spec.k, data, leakage: 0.0 })
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.dim, self.n, self.k) != (other.dim, other.n, other.k) {
            return Err(Error::InvalidFrame("coefficients belong to different truncations".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { data, leakage: self.leakage.max(other.leakage), ..*self })
    }

    /// CSV with columns `alpha_1.., k_1.., re, im`.
    pub fn write_csv(&self, spec: &FrameSpec, mut w: impl Write) -> Result<()> {
        let d = self.dim;
        let mut header: Vec<String> = (1..=d).map(|j| format!("alpha_{j}")).collect();
        header.extend((1..=d).map(|j| format!("k_{j}")));
        header.extend(["re".to_string(), "im".to_string()]);
        writeln!(w, "{}", header.join(","))?;
        for (i, v) in self.data.iter().enumerate() {
            let id = spec.id_at(i);
            let cols: Vec<String> = id
                .alpha
                .0
                .iter()
                .chain(&id.k.0)
                .map(|a| a.to_string())
                .chain([fmt_f64(v.re), fmt_f64(v.im)])
                .collect();
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for FrameCoefficients {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

fn unflatten_centered(mut flat: usize, n: usize, d: usize) -> Vec<i64> {
    let side = 2 * n + 1;
    let mut out = vec![0i64; d];
    for j in (0..d).rev() {
        out[j] = (flat % side) as i64 - n as i64;
        flat /= side;
    }
    out
}

fn alpha_list(d: usize, n: usize) -> Vec<Vec<i64>> {
    (0..(2 * n + 1).pow(d as u32)).map(|i| unflatten_centered(i, n, d)).collect()
}

/// Row-major per-axis grid indices of a patch product.
fn patch_points(pats: &[&AxisPatch]) -> Vec<Vec<usize>> {
    match pats.len() {
        1 => (0..pats[0].len).map(|m| vec![pats[0].start + m]).collect(),
        _ => {
            let mut out = Vec::with_capacity(pats[0].len * pats[1].len);
            for m1 in 0..pats[0].len {
                for m2 in 0..pats[1].len {
                    out.push(vec![pats[0].start + m1, pats[1].start + m2]);
                }
            }
            out
        }
    }
}

/// For `rows` independent rows of `x` (length `p`): `out[r][k] = sum_m conj(b[k][m]) x[r][m]`.
fn conj_transform(b: &[C64], kk: usize, p: usize, x: &[C64], rows: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * kk];
    for r in 0..rows {
        let xr = &x[r * p..(r + 1) * p];
        for k in 0..kk {
            let br = &b[k * p..(k + 1) * p];
            out[r * kk + k] = br.iter().zip(xr).map(|(a, v)| a.conj() * v).sum();
        }
    }
    out
}

/// For `rows` rows of `c` (length `kk`): `out[r][m] = sum_k b[k][m] c[r][k]`.
fn direct_transform(b: &[C64], kk: usize, p: usize, c: &[C64], rows: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * p];
    for r in 0..rows {
        let o = &mut out[r * p..(r + 1) * p];
        for k in 0..kk {
            let ck = c[r * kk + k];
            if ck == C64::new(0.0, 0.0) {
                continue;
            }
            for (ov, bv) in o.iter_mut().zip(&b[k * p..(k + 1) * p]) {
                *ov += bv * ck;
            }
        }
    }
    out
}

fn transpose(x: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = x[r * cols + c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetics::VectorPotential;

    fn spec1(k: usize) -> FrameSpec {
        FrameSpec::new(UniformGrid::new(1, 8.0, 512).unwrap(), 7, k, VectorPotential::zero(1)).unwrap()
    }

    fn bump_psi(grid: UniformGrid, center: &[f64]) -> SampledField<UniformGrid> {
        SampledField::<UniformGrid>::from_fn(grid, |x| {
            let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
            C64::new((-r2 / 0.6).exp(), 0.3 * x[0] * (-r2 / 0.6).exp())
        })
    }

    #[test]
    fn window_conditions() {
        assert_eq!(Window::profile(0.0), 1.0);
        assert_eq!(Window::profile(1.0), 0.0);
        assert_eq!(Window::profile(-1.0), 0.0);
        let mut worst: f64 = 0.0;
        for i in 0..=10_000 {
            let t = i as f64 / 10_000.0;
            let s = Window::profile(t).powi(2) + Window::profile(t - 1.0).powi(2);
            worst = worst.max((s - 1.0).abs());
            let c = t - 0.5;
            let s3: f64 = (-1..=1).map(|g| Window::profile(c - g as f64).powi(2)).sum();
            worst = worst.max((s3 - 1.0).abs());
            assert!(Window::profile(t) >= 0.0);
        }
        assert!(worst < 1e-12, "{worst}");
        // int chi0^2 = 1: one period of the partition of unity.
        let n = 200_000;
        let q: f64 = (0..n).map(|i| Window::profile(-1.0 + 2.0 * (i as f64 + 0.5) / n as f64).powi(2)).sum::<f64>()
            * 2.0
            / n as f64;
        assert!((q - 1.0).abs() < 1e-9);
        assert_eq!(build_window().samples().len(), Window::CACHED_SAMPLES);
    }

    #[test]
    fn spec_validation() {
        let g = UniformGrid::new(1, 8.0, 512).unwrap();
        assert!(FrameSpec::new(g, 8, 16, VectorPotential::zero(1)).is_err());
        // M pi / L = 201.06
        assert!(FrameSpec::new(g, 7, 101, VectorPotential::zero(1)).is_err());
        assert!(FrameSpec::new(g, 7, 100, VectorPotential::zero(1)).is_ok());
        assert!(FrameSpec::new(g, 7, 16, VectorPotential::zero(2)).is_err());
    }

    #[test]
    fn id_indexing_round_trip() {
        let g = UniformGrid::new(2, 4.0, 48).unwrap();
        let s = FrameSpec::new(g, 2, 3, VectorPotential::symmetric_gauge(0.5)).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.index_of(&s.id_at(i)).unwrap(), i);
        }
        let bad = FrameId::new(vec![3, 0], vec![0, 0]).unwrap();
        assert!(matches!(s.index_of(&bad), Err(Error::IdOutOfRange(_))));
        assert_eq!(s.box_indices(0, 0).len(), 1);
        assert_eq!(s.box_indices(1, 1).len(), 81);
    }

    #[test]
    fn frame_vector_norm_and_modulus() {
        let s = spec1(16);
        let id0 = FrameId::new(vec![0], vec![0]).unwrap();
        let g = s.frame_vector(&id0).unwrap();
        assert!((g.norm_sqr() - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!((s.gramian(&id0, &id0).unwrap().re - 1.0 / (2.0 * PI)).abs() < 1e-12);
        let a = VectorPotential::constant(&[0.7]).unwrap();
        let sa = FrameSpec::new(*s.grid(), 7, 16, a).unwrap();
        let id = FrameId::new(vec![2], vec![-5]).unwrap();
        let g1 = sa.frame_vector(&id).unwrap();
        let g2 = s.frame_vector(&FrameId::new(vec![2], vec![0]).unwrap()).unwrap();
        for (u, v) in g1.data().iter().zip(g2.data()) {
            assert!((u.norm() - v.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_and_hermitian_gramian() {
        let s = spec1(8);
        let a = FrameId::new(vec![-1], vec![3]).unwrap();
        let b = FrameId::new(vec![1], vec![-2]).unwrap();
        let c = FrameId::new(vec![0], vec![1]).unwrap();
        assert_eq!(s.gramian(&a, &b).unwrap(), C64::new(0.0, 0.0));
        let g = s.gramian(&a, &c).unwrap();
        assert!(g.norm() > 1e-6);
        assert!((g - s.gramian(&c, &a).unwrap().conj()).norm() < 1e-16);
    }

    #[test]
    fn analysis_of_frame_vector_and_zero() {
        let s = spec1(16);
        let id0 = FrameId::new(vec![0], vec![0]).unwrap();
        let c = s.analyze(&s.frame_vector(&id0).unwrap()).unwrap();
        let i0 = s.index_of(&id0).unwrap();
        assert!((c[i0] - 1.0 / (2.0 * PI)).norm() < 1e-12);
        let z = s.analyze(&SampledField::zeros(*s.grid())).unwrap();
        assert!(z.data().iter().all(|v| v.norm() == 0.0));
        assert!(s.parseval_defect(&SampledField::zeros(*s.grid())).is_err());
    }

    #[test]
    fn analysis_matches_dense_quadrature() {
        let g = UniformGrid::new(2, 3.0, 24).unwrap();
        let s = FrameSpec::new(g, 1, 3, VectorPotential::symmetric_gauge(0.9)).unwrap();
        let psi = bump_psi(g, &[0.2, -0.1]);
        let c = s.analyze(&psi).unwrap();
        for i in (0..s.len()).step_by(7) {
            let v = s.frame_vector(&s.id_at(i)).unwrap();
            assert!((v.inner(&psi).unwrap() - c[i]).norm() < 1e-14);
        }
        let m = s.frame_matrix();
        let i = 40;
        let id = s.id_at(i);
        let v = s.frame_vector(&id).unwrap();
        for p in 0..g.len() {
            assert_eq!(m[(p, i)], v.data()[p]);
        }
    }

    #[test]
    fn parseval_and_reconstruction_one_dimension() {
        let s = spec1(48);
        let psi = bump_psi(*s.grid(), &[0.4]);
        assert!(s.parseval_defect(&psi).unwrap() < 1e-8);
        // The reconstruction error is the square root of the defect, so it
        // needs a much larger K (and a grid fine enough to resolve it).
        let fine = FrameSpec::new(UniformGrid::new(1, 6.0, 768).unwrap(), 5, 128, VectorPotential::constant(&[0.3]).unwrap()).unwrap();
        let psi = bump_psi(*fine.grid(), &[0.4]);
        let c = fine.analyze(&psi).unwrap();
        let back = fine.synthesize(&c).unwrap();
        let e = back.rel_distance(&psi).unwrap();
        assert!(e < 1e-8, "{e}");
        let again = fine.analyze(&back).unwrap();
        let diff: f64 = again.data().iter().zip(c.data()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let e2 = (diff / c.norm_sqr()).sqrt();
        assert!(e2 < 1e-8, "{e2}");
        let id = FrameId::new(vec![3], vec![2]).unwrap();
        let coarse = s.parseval_defect(&s.frame_vector(&id).unwrap()).unwrap();
        let fine_defect = fine.parseval_defect(&fine.frame_vector(&id).unwrap()).unwrap();
        assert!(coarse < 1e-8 && fine_defect < 1e-10, "{coarse} {fine_defect}");
    }

    #[test]
    fn defect_decreases_with_k() {
        let grid = UniformGrid::new(1, 8.0, 512).unwrap();
        let psi = bump_psi(grid, &[-0.3]);
        let defects: Vec<f64> = [8, 16, 32, 48]
            .iter()
            .map(|&k| FrameSpec::new(grid, 7, k, VectorPotential::zero(1)).unwrap().parseval_defect(&psi).unwrap())
            .collect();
        for w in defects.windows(2) {
            assert!(w[1] < w[0], "{defects:?}");
        }
    }

    #[test]
    fn synthesis_of_indicator_and_linearity() {
        let s = spec1(6);
        let i = s.index_of(&FrameId::new(vec![-2], vec![4]).unwrap()).unwrap();
        let mut c = FrameCoefficients::zeros(&s);
        c.data_mut()[i] = C64::new(1.0, 0.0);
        let v = s.synthesize(&c).unwrap();
        assert!(v.rel_distance(&s.frame_vector(&s.id_at(i)).unwrap()).unwrap() < 1e-15);
        let mut c2 = FrameCoefficients::zeros(&s);
        c2.data_mut()[i + 3] = C64::new(0.0, 2.0);
        let lhs = s.synthesize(&c.add(&c2).unwrap()).unwrap();
        let rhs = v.axpy(C64::new(1.0, 0.0), &s.synthesize(&c2).unwrap()).unwrap();
        assert!(lhs.rel_distance(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn leakage_is_reported() {
        let s = spec1(4);
        let psi = bump_psi(*s.grid(), &[6.5]);
        assert!(s.analyze(&psi).unwrap().leakage > 0.1);
        let inside = bump_psi(*s.grid(), &[0.0]);
        assert!(s.analyze(&inside).unwrap().leakage < 1e-12);
    }

    #[test]
    fn csv_export() {
        let s = FrameSpec::new(UniformGrid::new(1, 3.0, 32).unwrap(), 1, 1, VectorPotential::zero(1)).unwrap();
        let c = s.analyze(&bump_psi(*s.grid(), &[0.0])).unwrap();
        let mut out = Vec::new();
        c.write_csv(&s, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "alpha_1,k_1,re,im");
        assert_eq!(lines.len(), 1 + s.len());
        assert!(lines[1].starts_with("-1,-1,"));
    }
}
