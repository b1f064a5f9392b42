//! Uniform grids on configuration and phase space, sampled fields, symplectic
//! forms and the (double) symplectic Fourier transforms.
//!
//! Position grids are `x_j = -L + j h` with `h = 2L/M` and `M` even. The momentum
//! grid attached to a position grid is its exact FFT dual, `xi_b = -V + b dxi`
//! with `dxi = 2 pi / (M h) = pi / L` and `V = M dxi / 2`. Both grids have the
//! same centered form, which makes every transform below an exact involution
//! on the samples.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer multi index of length `d`, used for lattice points and derivative orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        check_dim(entries.len())?;
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Sum of absolute values, `|a|`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|v| v.unsigned_abs() as usize).sum()
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// Common interface of the grids that carry [`SampledField`]s.
pub trait Grid: Clone + PartialEq + std::fmt::Debug {
    /// Number of samples.
    fn len(&self) -> usize;
    /// Quadrature weight of a single sample.
    fn weight(&self) -> f64;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Uniform tensor grid on `[-L, L)^d` with `M` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl UniformGrid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width L must be positive and finite, got {half_width}"
            )));
        }
        if points == 0 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis M must be even and positive, got {points}"
            )));
        }
        Ok(Self { dim, half_width, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Coordinate of the `i`-th sample along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step()
    }

    /// All axis coordinates.
    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// Per-axis indices of a flat (row-major) sample index.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.points, flat % self.points]
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.points + i)
    }

    /// Coordinates of the sample with flat index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflatten(flat);
        (0..self.dim).map(|k| self.coord(idx[k])).collect()
    }

    /// The FFT-dual grid (same `M`, step `2 pi / (M h)`).
    pub fn dual(&self) -> UniformGrid {
        let step = 2.0 * PI / (self.points as f64 * self.step());
        UniformGrid {
            dim: self.dim,
            half_width: 0.5 * self.points as f64 * step,
            points: self.points,
        }
    }

    /// Nearest sample index along an axis (clamped to the grid).
    pub fn nearest(&self, t: f64) -> usize {
        let i = ((t + self.half_width) / self.step()).round();
        i.clamp(0.0, (self.points - 1) as f64) as usize
    }
}

impl Grid for UniformGrid {
    fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    fn weight(&self) -> f64 {
        self.step().powi(self.dim as i32)
    }
}

/// Position grid together with its FFT-dual momentum grid.
///
/// Samples are stored row-major over the axes `(x_1..x_d, xi_1..xi_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    position: UniformGrid,
    momentum: UniformGrid,
}

impl PhaseSpaceGrid {
    pub fn new(position: UniformGrid) -> Self {
        Self { position, momentum: position.dual() }
    }

    pub fn position(&self) -> &UniformGrid {
        &self.position
    }

    pub fn momentum(&self) -> &UniformGrid {
        &self.momentum
    }

    pub fn dim(&self) -> usize {
        self.position.dim
    }

    pub fn points(&self) -> usize {
        self.position.points
    }

    /// Flat index from position and momentum flat indices.
    pub fn flatten(&self, x_flat: usize, xi_flat: usize) -> usize {
        x_flat * self.position.len() + xi_flat
    }

    /// Position and momentum flat indices of a phase-space flat index.
    pub fn split(&self, flat: usize) -> (usize, usize) {
        let n = self.position.len();
        (flat / n, flat % n)
    }

    pub fn point(&self, flat: usize) -> PhasePoint {
        let (xf, pf) = self.split(flat);
        PhasePoint { x: self.position.point(xf), xi: self.momentum.point(pf) }
    }

    /// Checks that the momentum grid is the exact FFT dual of the position grid.
    pub fn check_dual(&self) -> Result<()> {
        let dual = self.position.dual();
        let rel = (dual.step() - self.momentum.step()).abs() / dual.step();
        if dual.points != self.momentum.points || dual.dim != self.momentum.dim || rel > 1e-14 {
            return Err(Error::GridMismatch(
                "momentum grid is not the FFT dual of the position grid".into(),
            ));
        }
        Ok(())
    }
}

impl Grid for PhaseSpaceGrid {
    fn len(&self) -> usize {
        self.position.len() * self.momentum.len()
    }

    fn weight(&self) -> f64 {
        self.position.weight() * self.momentum.weight()
    }
}

/// Doubled phase space `Xi x Xi`, samples stored with the left block major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublePhaseSpaceGrid {
    pub left: PhaseSpaceGrid,
    pub right: PhaseSpaceGrid,
}

impl DoublePhaseSpaceGrid {
    pub fn new(grid: PhaseSpaceGrid) -> Self {
        Self { left: grid, right: grid }
    }
}

impl Grid for DoublePhaseSpaceGrid {
    fn len(&self) -> usize {
        self.left.len() * self.right.len()
    }

    fn weight(&self) -> f64 {
        self.left.weight() * self.right.weight()
    }
}

/// A point `X = (x, xi)` of phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: xi.len() });
        }
        if x.iter().chain(xi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("phase-space point has non-finite entries".into()));
        }
        Ok(Self { x, xi })
    }

    pub fn origin(dim: usize) -> Self {
        Self { x: vec![0.0; dim], xi: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Complex samples of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField<G: Grid> {
    grid: G,
    data: Vec<C64>,
}

impl<G: Grid> SampledField<G> {
    pub fn new(grid: G, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::SampleCount { expected: grid.len(), found: data.len() });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: G) -> Self {
        let n = grid.len();
        Self { grid, data: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn grid(&self) -> &G {
        &self.grid
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.weight() * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Quadrature `L^2` norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other>`, antilinear in the first argument.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_grid(other)?;
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.weight())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { grid: self.grid.clone(), data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        Ok(Self { grid: self.grid.clone(), data })
    }

    /// Relative `L^2` distance `||self - other|| / ||other||`.
    pub fn rel_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.axpy(C64::new(-1.0, 0.0), other)?;
        let n = other.norm();
        Ok(if n == 0.0 { diff.norm() } else { diff.norm() / n })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl SampledField<UniformGrid> {
    pub fn from_fn(grid: UniformGrid, f: impl Fn(&[f64]) -> C64) -> Self {
        let data = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, data }
    }
}

impl SampledField<PhaseSpaceGrid> {
    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(&[f64], &[f64]) -> C64) -> Self {
        let np = grid.momentum().len();
        let xs: Vec<Vec<f64>> = (0..grid.position().len()).map(|i| grid.position().point(i)).collect();
        let ps: Vec<Vec<f64>> = (0..np).map(|i| grid.momentum().point(i)).collect();
        let mut data = Vec::with_capacity(grid.len());
        for x in &xs {
            for p in &ps {
                data.push(f(x, p));
            }
        }
        Self { grid, data }
    }
}

/// `sigma(X, Y) = xi . y - x . eta`.
pub fn symplectic_form(a: &PhasePoint, b: &PhasePoint) -> Result<f64> {
    if a.dim() != b.dim() || a.xi.len() != a.x.len() || b.xi.len() != b.x.len() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let s1: f64 = a.xi.iter().zip(&b.x).map(|(p, q)| p * q).sum();
    let s2: f64 = a.x.iter().zip(&b.xi).map(|(p, q)| p * q).sum();
    Ok(s1 - s2)
}

/// `Sigma(X, Y) = sigma(X_L, Y_L) + sigma(X_R, Y_R)` on doubled phase space.
pub fn double_symplectic_form(a: &(PhasePoint, PhasePoint), b: &(PhasePoint, PhasePoint)) -> Result<f64> {
    if a.0.dim() != a.1.dim() {
        return Err(Error::DimensionMismatch { expected: a.0.dim(), found: a.1.dim() });
    }
    Ok(symplectic_form(&a.0, &b.0)? + symplectic_form(&a.1, &b.1)?)
}

/// `<v> = sqrt(1 + |v|^2)`.
pub fn japanese_bracket(v: &[f64]) -> f64 {
    (1.0 + v.iter().map(|t| t * t).sum::<f64>()).sqrt()
}

/// Sign of the exponent of a centered transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Transform between two centered grids with `du * dv = 2 pi / M`:
/// `out_k = sum_j exp(s i u_j v_k) f_j`, unnormalized.
pub struct CenteredDft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl CenteredDft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let n = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { len, forward, inverse, scratch: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// With `u_j = -U + j du`, `v_k = -V + k dv` and `U V = pi M / 2`:
    /// `exp(s i u_j v_k) = (-1)^{M/2} (-1)^j (-1)^k exp(s 2 pi i j k / M)`.
    pub fn apply(&mut self, buf: &mut [C64], sign: Sign) {
        debug_assert_eq!(buf.len(), self.len);
        for (j, z) in buf.iter_mut().enumerate() {
            if j % 2 == 1 {
                *z = -*z;
            }
        }
        match sign {
            Sign::Minus => self.forward.process_with_scratch(buf, &mut self.scratch),
            Sign::Plus => self.inverse.process_with_scratch(buf, &mut self.scratch),
        }
        let global = if (self.len / 2) % 2 == 1 { -1.0 } else { 1.0 };
        for (k, z) in buf.iter_mut().enumerate() {
            let s = if k % 2 == 1 { -global } else { global };
            *z *= s;
        }
    }
}

/// Applies a centered transform along `axis` of a `[M; n]` array.
pub(crate) fn transform_axis(arr: &mut ArrayD<C64>, axis: usize, sign: Sign, dft: &mut CenteredDft) {
    let mut buf = vec![C64::new(0.0, 0.0); dft.len()];
    for mut lane in arr.lanes_mut(Axis(axis)) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        dft.apply(&mut buf, sign);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = *b;
        }
    }
}

/// Symplectic Fourier transform of every phase-space block of a `[M; 2 d blocks]` array.
fn symplectic_fourier_blocks(data: &[C64], m: usize, dim: usize, blocks: usize) -> Vec<C64> {
    let naxes = 2 * dim * blocks;
    let mut arr = ArrayD::from_shape_vec(IxDyn(&vec![m; naxes]), data.to_vec())
        .expect("sample count matches grid shape");
    let mut dft = CenteredDft::new(m);
    for b in 0..blocks {
        let base = 2 * dim * b;
        for j in 0..dim {
            // y_j -> xi_j carries exp(+i xi.y), eta_j -> x_j carries exp(-i x.eta).
            transform_axis(&mut arr, base + j, Sign::Plus, &mut dft);
            transform_axis(&mut arr, base + dim + j, Sign::Minus, &mut dft);
        }
    }
    // Each block now holds (xi, x); swap back to (x, xi).
    let mut perm = Vec::with_capacity(naxes);
    for b in 0..blocks {
        let base = 2 * dim * b;
        perm.extend((0..dim).map(|j| base + dim + j));
        perm.extend((0..dim).map(|j| base + j));
    }
    let scale = (m as f64).powi(-((dim * blocks) as i32));
    arr.permuted_axes(IxDyn(&perm))
        .as_standard_layout()
        .iter()
        .map(|z| z * scale)
        .collect()
}

/// Symplectic Fourier transform
/// `(F_sigma f)(X) = (2 pi)^{-d} int dY exp(i sigma(X, Y)) f(Y)` on the grid.
pub fn symplectic_fourier(f: &SampledField<PhaseSpaceGrid>) -> Result<SampledField<PhaseSpaceGrid>> {
    let g = *f.grid();
    g.check_dual()?;
    let data = symplectic_fourier_blocks(f.data(), g.points(), g.dim(), 1);
    SampledField::new(g, data)
}

/// Symplectic Fourier transform on doubled phase space with respect to `Sigma`.
pub fn double_symplectic_fourier(
    f: &SampledField<DoublePhaseSpaceGrid>,
) -> Result<SampledField<DoublePhaseSpaceGrid>> {
    let g = *f.grid();
    g.left.check_dual()?;
    g.right.check_dual()?;
    if g.left != g.right {
        return Err(Error::GridMismatch("left and right phase-space blocks differ".into()));
    }
    let data = symplectic_fourier_blocks(f.data(), g.left.points(), g.left.dim(), 2);
    SampledField::new(g, data)
}

/// Tensor product `f_L (x) f_R` sampled on doubled phase space.
pub fn tensor_product(
    left: &SampledField<PhaseSpaceGrid>,
    right: &SampledField<PhaseSpaceGrid>,
) -> SampledField<DoublePhaseSpaceGrid> {
    let grid = DoublePhaseSpaceGrid { left: *left.grid(), right: *right.grid() };
    let mut data = Vec::with_capacity(grid.len());
    for a in left.data() {
        for b in right.data() {
            data.push(a * b);
        }
    }
    SampledField { grid, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, d: usize) -> PhasePoint {
        PhasePoint {
            x: (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            xi: (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect(),
        }
    }

    #[test]
    fn symplectic_form_basics() {
        let x = PhasePoint::new(vec![1.0], vec![0.0]).unwrap();
        let y = PhasePoint::new(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(symplectic_form(&x, &y).unwrap(), -1.0);
        assert_eq!(symplectic_form(&x, &x).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let d = rng.gen_range(1..=2);
            let a = random_point(&mut rng, d);
            let b = random_point(&mut rng, d);
            let s = symplectic_form(&a, &b).unwrap();
            assert_eq!(s, -symplectic_form(&b, &a).unwrap());
            assert!(symplectic_form(&a, &a).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn symplectic_form_dimension_mismatch() {
        let a = PhasePoint::origin(1);
        let b = PhasePoint::origin(2);
        assert!(matches!(symplectic_form(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(PhasePoint::new(vec![0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn double_form_is_sum_of_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = (random_point(&mut rng, 2), random_point(&mut rng, 2));
            let b = (random_point(&mut rng, 2), random_point(&mut rng, 2));
            let s = double_symplectic_form(&a, &b).unwrap();
            let sl = symplectic_form(&a.0, &b.0).unwrap();
            let sr = symplectic_form(&a.1, &b.1).unwrap();
            assert!((s - (sl + sr)).abs() < 1e-14);
            assert!(double_symplectic_form(&a, &a).unwrap().abs() < 1e-14);
            let b0 = (b.0.clone(), PhasePoint::origin(2));
            assert_eq!(double_symplectic_form(&a, &b0).unwrap(), sl);
        }
    }

    #[test]
    fn japanese_bracket_values() {
        assert_eq!(japanese_bracket(&[0.0, 0.0]), 1.0);
        assert_eq!(japanese_bracket(&[3.0, 4.0]), 26f64.sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut vs: Vec<f64> = (0..50).map(|_| rng.gen_range(0.0..10.0)).collect();
        vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in vs.windows(2) {
            assert!(japanese_bracket(&[w[0]]) <= japanese_bracket(&[w[1]]));
        }
    }

    #[test]
    fn grid_validation() {
        assert!(UniformGrid::new(1, 8.0, 511).is_err());
        assert!(UniformGrid::new(3, 8.0, 16).is_err());
        assert!(UniformGrid::new(1, -1.0, 16).is_err());
        let g = UniformGrid::new(2, 4.0, 48).unwrap();
        assert_eq!(g.len(), 48 * 48);
        assert!((g.dual().step() - PI / 4.0).abs() < 1e-15);
        PhaseSpaceGrid::new(g).check_dual().unwrap();
    }

    /// Brute-force evaluation of the defining double sum.
    fn brute_symplectic_fourier(f: &SampledField<PhaseSpaceGrid>) -> Vec<C64> {
        let g = f.grid();
        let n = g.len();
        let norm = (2.0 * PI).powi(-(g.dim() as i32)) * g.weight();
        (0..n)
            .map(|a| {
                let xa = g.point(a);
                (0..n)
                    .map(|b| {
                        let yb = g.point(b);
                        let s = symplectic_form(&xa, &yb).unwrap();
                        C64::from_polar(1.0, s) * f.data()[b]
                    })
                    .sum::<C64>()
                    * norm
            })
            .collect()
    }

    #[test]
    fn fourier_matches_brute_force_and_is_involutive() {
        let g = PhaseSpaceGrid::new(UniformGrid::new(1, 3.0, 12).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data: Vec<C64> = (0..g.len()).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let f = SampledField::new(g, data).unwrap();
        let ff = symplectic_fourier(&f).unwrap();
        let brute = brute_symplectic_fourier(&f);
        for (a, b) in ff.data().iter().zip(&brute) {
            assert!((a - b).norm() < 1e-12);
        }
        let back = symplectic_fourier(&ff).unwrap();
        assert!(back.rel_distance(&f).unwrap() < 1e-13);
        assert!((ff.norm() - f.norm()).abs() < 1e-12 * f.norm());

        let g2 = PhaseSpaceGrid::new(UniformGrid::new(2, 2.0, 6).unwrap());
        let data: Vec<C64> = (0..g2.len()).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let f2 = SampledField::new(g2, data).unwrap();
        let ff2 = symplectic_fourier(&f2).unwrap();
        let brute2 = brute_symplectic_fourier(&f2);
        for (a, b) in ff2.data().iter().zip(&brute2) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_of_zero_is_zero() {
        let g = PhaseSpaceGrid::new(UniformGrid::new(1, 4.0, 16).unwrap());
        let z = SampledField::zeros(g);
        assert_eq!(symplectic_fourier(&z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn gaussian_maps_to_gaussian() {
        let g = PhaseSpaceGrid::new(UniformGrid::new(1, 8.0, 64).unwrap());
        let f = SampledField::<PhaseSpaceGrid>::from_fn(g, |x, p| {
            C64::new((-(x[0] * x[0] + p[0] * p[0]) / 2.0).exp(), 0.0)
        });
        let ff = symplectic_fourier(&f).unwrap();
        // Closed form: the centered Gaussian is a fixed point with ||f||^2 = pi.
        assert!((f.norm_sqr() - PI).abs() < 1e-10);
        assert!((ff.norm() - f.norm()).abs() < 1e-12);
        assert!(ff.rel_distance(&f).unwrap() < 1e-10);
    }

    #[test]
    fn double_fourier_separates_and_inverts() {
        let g = PhaseSpaceGrid::new(UniformGrid::new(1, 2.5, 8).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rand_field = || {
            let data: Vec<C64> = (0..g.len()).map(|_| C64::new(rng.gen(), rng.gen())).collect();
            SampledField::new(g, data).unwrap()
        };
        let fl = rand_field();
        let fr = rand_field();
        let ft = tensor_product(&fl, &fr);
        let lhs = double_symplectic_fourier(&ft).unwrap();
        let rhs = tensor_product(&symplectic_fourier(&fl).unwrap(), &symplectic_fourier(&fr).unwrap());
        assert!(lhs.rel_distance(&rhs).unwrap() < 1e-13);
        let back = double_symplectic_fourier(&lhs).unwrap();
        assert!(back.rel_distance(&ft).unwrap() < 1e-13);
        let z = SampledField::zeros(*ft.grid());
        assert_eq!(double_symplectic_fourier(&z).unwrap().max_abs(), 0.0);
    }
}
