//! Double symbols and magnetic super Weyl quantization.
//!
//! A double symbol `F(X_L, X_R)` is quantized through a Schmidt decomposition
//! `F = sum_j s_j f_{L,j} (x) f_{R,j}`, after which
//! `Op^A(F) g = sum_j s_j op^A(f_{L,j}) g op^A(f_{R,j})`. A direct quadrature of
//! `(2 pi)^{-2d} int dX (F_Sigma F)(X) <G, w^A(X_L) G> <G, w^A(X_R) G>` is kept
//! as an independent cross-check for super matrix elements.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::frame::{FrameId, FrameSpec};
use crate::geometry::{
    double_symplectic_fourier, DoublePhaseSpaceGrid, Grid, PhasePoint, PhaseSpaceGrid, SampledField, UniformGrid,
};
use crate::io::{header_f64, header_str, header_usize, read_binary, write_binary};
use crate::magnetics::VectorPotential;
use crate::matrixrep::{op_matrix_elements, SuperMatrixElements};
use crate::weyl::{dequantize, quantize, weyl_product, weyl_system_apply, OperatorMatrix, Symbol};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Default relative tail tolerance of Schmidt decompositions.
pub const SCHMIDT_TOLERANCE: f64 = 1e-12;
/// Relative tail tolerance used when recompressing super products.
pub const RECOMPRESSION_TOLERANCE: f64 = 1e-10;
/// Maximal Schmidt rank.
pub const RANK_CAP: usize = 64;
/// Largest dense double-symbol sample array (complex entries).
pub const MAX_DENSE_SAMPLES: usize = 1 << 26;

/// Pointwise evaluator `(x_L, xi_L, x_R, xi_R) -> F`.
pub type DoubleSymbolFn = Arc<dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> C64 + Send + Sync>;

/// Declared Hoermander order of a double symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DoubleOrder {
    /// Class `S^m`.
    Single(f64),
    /// Class `S^{m_L, m_R}`.
    Pair(f64, f64),
}

impl DoubleOrder {
    /// Whether the bounded-super-operator hypotheses (order <= 0) hold.
    pub fn is_nonpositive(&self) -> bool {
        match *self {
            Self::Single(m) => m <= 0.0,
            Self::Pair(l, r) => l <= 0.0 && r <= 0.0,
        }
    }
}

#[derive(Clone)]
enum Repr {
    Separable(Vec<(C64, Symbol, Symbol)>),
    Sampled(SampledField<DoublePhaseSpaceGrid>),
}

/// Double symbol on `PhaseSpaceGrid x PhaseSpaceGrid`.
#[derive(Clone)]
pub struct DoubleSymbol {
    grid: PhaseSpaceGrid,
    repr: Repr,
    evaluator: Option<DoubleSymbolFn>,
    order: DoubleOrder,
    rho: f64,
}

impl std::fmt::Debug for DoubleSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let repr = match &self.repr {
            Repr::Separable(t) => format!("Separable({} terms)", t.len()),
            Repr::Sampled(_) => "Sampled".to_string(),
        };
        f.debug_struct("DoubleSymbol")
            .field("grid", &self.grid)
            .field("repr", &repr)
            .field("order", &self.order)
            .field("rho", &self.rho)
            .finish()
    }
}

impl DoubleSymbol {
    /// `sum_t c_t a_t (x) b_t`.
    pub fn separable(terms: Vec<(C64, Symbol, Symbol)>) -> Result<Self> {
        let grid = *terms
            .first()
            .ok_or_else(|| Error::InvalidInput("separable double symbol needs at least one term".into()))?
            .1
            .grid();
        if terms.iter().any(|(_, a, b)| a.grid() != &grid || b.grid() != &grid) {
            return Err(Error::GridMismatch("all factors must share one phase-space grid".into()));
        }
        let evaluator = if terms.iter().all(|(_, a, b)| a.evaluator().is_some() && b.evaluator().is_some()) {
            let fs: Vec<_> = terms
                .iter()
                .map(|(c, a, b)| (*c, a.evaluator().cloned().expect("checked"), b.evaluator().cloned().expect("checked")))
                .collect();
            let f: DoubleSymbolFn = Arc::new(move |xl, pl, xr, pr| fs.iter().map(|(c, a, b)| c * a(xl, pl) * b(xr, pr)).sum());
            Some(f)
        } else {
            None
        };
        Ok(Self { grid, repr: Repr::Separable(terms), evaluator, order: DoubleOrder::Pair(0.0, 0.0), rho: 0.0 })
    }

    /// `f_L (x) f_R`.
    pub fn product(left: Symbol, right: Symbol) -> Result<Self> {
        Self::separable(vec![(ONE, left, right)])
    }

    pub fn constant(grid: PhaseSpaceGrid, c: C64) -> Self {
        let one = Symbol::constant(grid, ONE);
        Self::separable(vec![(c, one.clone(), one)]).expect("one term").with_order(DoubleOrder::Single(0.0), 0.0)
    }

    /// Dense samples of a general function; only for small grids.
    pub fn from_fn(
        grid: PhaseSpaceGrid,
        f: impl Fn(&[f64], &[f64], &[f64], &[f64]) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let n = grid.len();
        if n.saturating_mul(n) > MAX_DENSE_SAMPLES {
            return Err(Error::InvalidInput(format!("{n}^2 double-symbol samples exceed the dense limit")));
        }
        let f: DoubleSymbolFn = Arc::new(f);
        let pts: Vec<PhasePoint> = (0..n).map(|i| grid.point(i)).collect();
        let data: Vec<C64> = (0..n * n)
            .into_par_iter()
            .map(|p| {
                let (l, r) = (&pts[p / n], &pts[p % n]);
                f(&l.x, &l.xi, &r.x, &r.xi)
            })
            .collect();
        let field = SampledField::new(DoublePhaseSpaceGrid::new(grid), data)?;
        Ok(Self { grid, repr: Repr::Sampled(field), evaluator: Some(f), order: DoubleOrder::Single(0.0), rho: 0.0 })
    }

    pub fn from_samples(field: SampledField<DoublePhaseSpaceGrid>) -> Result<Self> {
        let g = *field.grid();
        if g.left != g.right {
            return Err(Error::GridMismatch("left and right phase-space blocks differ".into()));
        }
        if field.data().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("double-symbol samples must be finite".into()));
        }
        Ok(Self { grid: g.left, repr: Repr::Sampled(field), evaluator: None, order: DoubleOrder::Single(0.0), rho: 0.0 })
    }

    pub fn with_order(mut self, order: DoubleOrder, rho: f64) -> Self {
        self.order = order;
        self.rho = rho;
        self
    }

    pub fn order(&self) -> DoubleOrder {
        self.order
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn evaluator(&self) -> Option<&DoubleSymbolFn> {
        self.evaluator.as_ref()
    }

    /// Product terms when the symbol is stored in separable form.
    pub fn terms(&self) -> Option<&[(C64, Symbol, Symbol)]> {
        match &self.repr {
            Repr::Separable(t) => Some(t),
            Repr::Sampled(_) => None,
        }
    }

    pub fn eval(&self, xl: &PhasePoint, xr: &PhasePoint) -> Result<C64> {
        match &self.evaluator {
            Some(f) => Ok(f(&xl.x, &xl.xi, &xr.x, &xr.xi)),
            None => Err(Error::NoEvaluator("double symbol was built from samples".into())),
        }
    }

    /// Samples on the doubled grid (dense; small grids only).
    pub fn dense_samples(&self) -> Result<SampledField<DoublePhaseSpaceGrid>> {
        match &self.repr {
            Repr::Sampled(f) => Ok(f.clone()),
            Repr::Separable(terms) => {
                let n = self.grid.len();
                if n.saturating_mul(n) > MAX_DENSE_SAMPLES {
                    return Err(Error::InvalidInput(format!("{n}^2 double-symbol samples exceed the dense limit")));
                }
                let mut data = vec![ZERO; n * n];
                for (c, a, b) in terms {
                    let (a, b) = (a.samples().data(), b.samples().data());
                    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                        let ca = c * a[i];
                        for (v, bv) in row.iter_mut().zip(b) {
                            *v += ca * bv;
                        }
                    });
                }
                SampledField::new(DoublePhaseSpaceGrid::new(self.grid), data)
            }
        }
    }

    /// The same function sampled on another grid (needs an evaluator).
    pub fn resample(&self, grid: PhaseSpaceGrid) -> Result<Self> {
        let out = match &self.repr {
            Repr::Separable(terms) => Self::separable(
                terms.iter().map(|(c, a, b)| Ok((*c, a.resample(grid)?, b.resample(grid)?))).collect::<Result<_>>()?,
            )?,
            Repr::Sampled(_) => {
                let f = self.evaluator.clone().ok_or_else(|| Error::NoEvaluator("cannot resample samples".into()))?;
                Self::from_fn(grid, move |a, b, c, d| f(a, b, c, d))?
            }
        };
        Ok(out.with_order(self.order, self.rho))
    }

    /// Binary export of the dense samples with a 2-block header.
    pub fn write_binary(&self, w: impl std::io::Write) -> Result<()> {
        let f = self.dense_samples()?;
        let g = self.grid.position();
        let header = json!({
            "kind": "double-symbol",
            "blocks": 2,
            "dimension": g.dim(),
            "half_width": g.half_width(),
            "points": g.points(),
            "layout": "row-major (x_L, xi_L, x_R, xi_R)",
        });
        write_binary(w, &header, f.data())
    }

    pub fn read_binary(r: impl std::io::Read) -> Result<Self> {
        let (h, data) = read_binary(r)?;
        if header_str(&h, "kind")? != "double-symbol" || header_usize(&h, "blocks")? != 2 {
            return Err(Error::Format("expected a 2-block double-symbol array".into()));
        }
        let pos = UniformGrid::new(header_usize(&h, "dimension")?, header_f64(&h, "half_width")?, header_usize(&h, "points")?)?;
        let grid = DoublePhaseSpaceGrid::new(PhaseSpaceGrid::new(pos));
        Self::from_samples(SampledField::new(grid, data)?)
    }
}

/// `L(X_L, X_R) = -i (h(X_L) - h(X_R))`.
pub fn liouville_symbol(h: &Symbol) -> DoubleSymbol {
    let one = Symbol::constant(*h.grid(), ONE);
    let i = C64::new(0.0, 1.0);
    DoubleSymbol::separable(vec![(-i, h.clone(), one.clone()), (i, one, h.clone())])
        .expect("two terms on one grid")
        .with_order(DoubleOrder::Single(h.order().max(0.0)), h.rho())
}

/// `F ~ sum_j sigma_j f_{L,j} (x) f_{R,j}` with unit-norm factors.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub terms: Vec<(f64, Symbol, Symbol)>,
    /// Relative `L^2` mass of the discarded tail.
    pub tail: f64,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.0).collect()
    }

    pub fn to_double_symbol(&self, grid: PhaseSpaceGrid) -> DoubleSymbol {
        if self.terms.is_empty() {
            return DoubleSymbol::constant(grid, ZERO);
        }
        DoubleSymbol::separable(self.terms.iter().map(|(s, a, b)| (C64::new(*s, 0.0), a.clone(), b.clone())).collect())
            .expect("terms share the grid")
    }
}

/// Smallest rank whose discarded tail is below `tol` relative; values at or
/// below `floor` are rounding noise and never counted.
fn truncation_rank(sigmas: &[f64], tol: f64, floor: f64) -> (usize, f64) {
    let sigmas: Vec<f64> = sigmas.iter().copied().filter(|s| *s > floor).collect();
    let total: f64 = sigmas.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return (0, 0.0);
    }
    let mut tail = total;
    for (r, s) in sigmas.iter().enumerate() {
        if (tail / total).sqrt() <= tol {
            return (r, (tail / total).sqrt());
        }
        tail -= s * s;
    }
    (sigmas.len(), 0.0)
}

fn column_symbol(grid: PhaseSpaceGrid, m: &Mat<C64>, j: usize, scale: f64) -> Result<Symbol> {
    let data = (0..m.nrows()).map(|i| m[(i, j)] * scale).collect();
    Symbol::from_samples(SampledField::new(grid, data)?)
}

fn svd_parts(a: &Mat<C64>) -> Result<(Mat<C64>, Vec<f64>, Mat<C64>)> {
    let svd = a.thin_svd().map_err(|e| Error::InvalidInput(format!("SVD did not converge: {e:?}")))?;
    let raw: Vec<f64> = svd.S().column_vector().iter().map(|v| v.re).collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let (u, v) = (svd.U(), svd.V());
    let s = order.iter().map(|&i| raw[i]).collect();
    let u = Mat::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = Mat::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    Ok((u, s, v))
}

/// Singular value decomposition of `F` as an operator `L^2(Xi) -> L^2(Xi)`,
/// truncated at relative tail `tol`.
pub fn schmidt_decompose(f: &DoubleSymbol, tol: f64) -> Result<SchmidtDecomposition> {
    schmidt_decompose_capped(f, tol, RANK_CAP)
}

pub fn schmidt_decompose_capped(f: &DoubleSymbol, tol: f64, cap: usize) -> Result<SchmidtDecomposition> {
    let grid = f.grid;
    let n = grid.len();
    let w = grid.weight();
    let sw = w.sqrt();
    // F = U diag(s) V^T with weighted-orthonormal columns of U and V.
    let (u, s, v, scale) = match &f.repr {
        Repr::Separable(terms) => {
            let t = terms.len();
            let a = Mat::from_fn(n, t, |i, j| terms[j].1.samples().data()[i] * sw);
            let b = Mat::from_fn(n, t, |i, j| terms[j].2.samples().data()[i] * sw);
            let (ua, sa, va) = svd_parts(&a)?;
            let (ub, sb, vb) = svd_parts(&b)?;
            // F = Ua [Sa Va^H diag(c) conj(Vb) Sb] Ub^T.
            let core = Mat::from_fn(sa.len(), sb.len(), |p, q| {
                let mut acc = ZERO;
                for (j, term) in terms.iter().enumerate() {
                    acc += va[(j, p)].conj() * term.0 * vb[(j, q)].conj();
                }
                acc * sa[p] * sb[q]
            });
            let (uc, sc, vc) = svd_parts(&core)?;
            let u = &ua * &uc;
            let v = &ub * vc.conjugate();
            let scale: f64 = terms.iter().map(|(c, a, b)| c.norm() * a.norm() * b.norm()).sum();
            (u, sc, v, scale)
        }
        Repr::Sampled(field) => {
            let a = Mat::from_fn(n, n, |i, j| field.data()[i * n + j] * w);
            let scale = a.norm_l2();
            let (u, s, v) = svd_parts(&a)?;
            (u, s, v.conjugate().to_owned(), scale)
        }
    };
    let (rank, tail) = truncation_rank(&s, tol, 1e-13 * scale);
    if rank > cap {
        return Err(Error::RankExceeded { rank, cap, tail_mass: tail_of(&s, cap) });
    }
    let terms = (0..rank)
        .map(|j| Ok((s[j], column_symbol(grid, &u, j, 1.0 / sw)?, column_symbol(grid, &v, j, 1.0 / sw)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SchmidtDecomposition { terms, tail })
}

fn tail_of(s: &[f64], r: usize) -> f64 {
    let total: f64 = s.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    (s[r.min(s.len())..].iter().map(|v| v * v).sum::<f64>() / total).sqrt()
}

/// Quantized super operator `g -> sum_j s_j op^A(f_{L,j}) g op^A(f_{R,j})`.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    grid: UniformGrid,
    potential: VectorPotential,
    terms: Vec<(C64, OperatorMatrix, OperatorMatrix)>,
}

impl SuperOperator {
    pub fn new(a: &VectorPotential, f: &DoubleSymbol, tol: f64) -> Result<Self> {
        let sd = schmidt_decompose(f, tol)?;
        Self::from_schmidt(a, &sd, *f.grid().position())
    }

    pub fn from_schmidt(a: &VectorPotential, sd: &SchmidtDecomposition, grid: UniformGrid) -> Result<Self> {
        let terms = sd
            .terms
            .par_iter()
            .map(|(s, l, r)| Ok((C64::new(*s, 0.0), quantize(a, l)?, quantize(a, r)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, potential: a.clone(), terms })
    }

    /// `sum_j w_j L_j (.) R_j` from explicit operators.
    pub fn from_operators(grid: UniformGrid, a: VectorPotential, terms: Vec<(C64, OperatorMatrix, OperatorMatrix)>) -> Result<Self> {
        if terms.iter().any(|(_, l, r)| l.grid() != &grid || r.grid() != &grid) {
            return Err(Error::GridMismatch("super operator terms live on different grids".into()));
        }
        Ok(Self { grid, potential: a, terms })
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(C64, OperatorMatrix, OperatorMatrix)] {
        &self.terms
    }

    pub fn potential(&self) -> &VectorPotential {
        &self.potential
    }

    pub fn apply(&self, g: &OperatorMatrix) -> Result<OperatorMatrix> {
        if g.grid() != &self.grid {
            return Err(Error::GridMismatch("operator and super operator live on different grids".into()));
        }
        let mut out = OperatorMatrix::zeros(self.grid);
        for (w, l, r) in &self.terms {
            out.add_assign_scaled(*w, &l.compose(g)?.compose(r)?)?;
        }
        Ok(out)
    }

    /// Super matrix elements via the product rule.
    pub fn matrix_elements(&self, spec: &Arc<FrameSpec>) -> Result<SuperMatrixElements> {
        let terms = self
            .terms
            .iter()
            .map(|(w, l, r)| Ok((*w, op_matrix_elements(spec, l)?, op_matrix_elements(spec, r)?)))
            .collect::<Result<Vec<_>>>()?;
        if terms.is_empty() {
            let z = crate::matrixrep::OperatorMatrixElements::zeros(spec.clone());
            return SuperMatrixElements::product(vec![(ZERO, z.clone(), z)]);
        }
        SuperMatrixElements::product(terms)
    }
}

/// `Op^A(F) g` through the Schmidt route.
pub fn super_apply(a: &VectorPotential, f: &DoubleSymbol, g: &OperatorMatrix) -> Result<OperatorMatrix> {
    SuperOperator::new(a, f, SCHMIDT_TOLERANCE)?.apply(g)
}

/// `F <> g = dequantize(Op^A(F) op^A(g))`.
pub fn semi_super_product(a: &VectorPotential, f: &DoubleSymbol, g: &Symbol) -> Result<Symbol> {
    let out = dequantize(a, &super_apply(a, f, &quantize(a, g)?)?)?;
    let mass = out.boundary_mass();
    if mass > 1e-8 {
        log::warn!("semi-super product has relative boundary mass {mass:.3e}");
    }
    Ok(out)
}

/// `F # G` with `Op^A(F # G) = Op^A(F) Op^A(G)`, recompressed to a separable symbol.
pub fn super_product(a: &VectorPotential, f: &DoubleSymbol, g: &DoubleSymbol) -> Result<DoubleSymbol> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("double symbols live on different grids".into()));
    }
    let sf = schmidt_decompose(f, SCHMIDT_TOLERANCE)?;
    let sg = schmidt_decompose(g, SCHMIDT_TOLERANCE)?;
    if sf.terms.is_empty() || sg.terms.is_empty() {
        return Ok(DoubleSymbol::constant(*f.grid(), ZERO));
    }
    let pairs: Vec<(usize, usize)> = (0..sf.rank()).flat_map(|i| (0..sg.rank()).map(move |j| (i, j))).collect();
    let terms = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (si, fl, fr) = &sf.terms[i];
            let (tj, gl, gr) = &sg.terms[j];
            Ok((C64::new(si * tj, 0.0), weyl_product(a, fl, gl)?, weyl_product(a, gr, fr)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = DoubleSymbol::separable(terms)?;
    let sd = schmidt_decompose(&raw, RECOMPRESSION_TOLERANCE)?;
    Ok(sd.to_double_symbol(*f.grid()))
}

/// Coarse phase-space box for the direct oscillatory route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectQuadrature {
    pub half_width: f64,
    pub points: usize,
}

impl Default for DirectQuadrature {
    fn default() -> Self {
        Self { half_width: 6.0, points: 48 }
    }
}

/// Precomputed `(F_Sigma F)` on the coarse box, reusable across index octuples.
#[derive(Debug, Clone)]
pub struct DirectRoute {
    coarse: PhaseSpaceGrid,
    transform: SampledField<DoublePhaseSpaceGrid>,
}

impl DirectRoute {
    pub fn new(f: &DoubleSymbol, quad: DirectQuadrature) -> Result<Self> {
        let d = f.grid().dim();
        let coarse = PhaseSpaceGrid::new(UniformGrid::new(d, quad.half_width, quad.points)?);
        let samples = f.resample(coarse)?.dense_samples()?;
        Ok(Self { coarse, transform: double_symplectic_fourier(&samples)? })
    }

    pub fn coarse_grid(&self) -> &PhaseSpaceGrid {
        &self.coarse
    }

    /// `<G_a, w^A(X) G_b>` for all coarse points `X`.
    fn weyl_elements(&self, spec: &FrameSpec, a: &FrameId, b: &FrameId) -> Result<Vec<C64>> {
        let ga = spec.frame_vector(a)?;
        let gb = spec.frame_vector(b)?;
        let pot = spec.potential();
        (0..self.coarse.len())
            .into_par_iter()
            .map(|i| ga.inner(&weyl_system_apply(pot, &self.coarse.point(i), &gb)?))
            .collect()
    }

    /// Direct quadrature of the super element `(aL, bL, aR, bR)`.
    pub fn element(&self, spec: &FrameSpec, ids: &[FrameId; 4]) -> Result<C64> {
        let wl = self.weyl_elements(spec, &ids[0], &ids[1])?;
        let wr = self.weyl_elements(spec, &ids[2], &ids[3])?;
        let n = self.coarse.len();
        let t = self.transform.data();
        // Collected before summing so the result does not depend on scheduling.
        let parts: Vec<C64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = &t[i * n..(i + 1) * n];
                let inner: C64 = row.iter().zip(&wr).map(|(f, r)| f * r).sum();
                wl[i] * inner
            })
            .collect();
        let s: C64 = parts.iter().sum();
        let d = self.coarse.dim() as i32;
        Ok(s * self.coarse.weight().powi(2) / (2.0 * PI).powi(2 * d))
    }
}

/// One-shot direct route; see [`DirectRoute`].
pub fn superop_matrix_element_direct(
    f: &DoubleSymbol,
    spec: &FrameSpec,
    ids: &[FrameId; 4],
    quad: DirectQuadrature,
) -> Result<C64> {
    DirectRoute::new(f, quad)?.element(spec, ids)
}

/// `exp(-(|x - x0|^2 + |xi - xi0|^2) / (2 w^2))`.
pub fn gaussian_bump(grid: PhaseSpaceGrid, center: &PhasePoint, width: f64) -> Symbol {
    let c = center.clone();
    Symbol::from_fn(grid, move |x, xi| {
        let r: f64 = x.iter().zip(&c.x).chain(xi.iter().zip(&c.xi)).map(|(a, b)| (a - b) * (a - b)).sum();
        C64::new((-r / (2.0 * width * width)).exp(), 0.0)
    })
}

/// `exp(-|x|^2 / (2 s^2)) (1 + a prod_j cos(xi_j + q x_j))`: bounded with bounded
/// derivatives in `xi` (class `S^0_{0,0}`), tapered in `x` to stay on the grid.
pub fn tapered_trig(grid: PhaseSpaceGrid, taper: f64, amplitude: f64, twist: f64) -> Symbol {
    Symbol::from_fn(grid, move |x, xi| {
        let t = (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * taper * taper)).exp();
        let c: f64 = x.iter().zip(xi).map(|(p, k)| (k + twist * p).cos()).product();
        C64::new(t * (1.0 + amplitude * c), 0.0)
    })
    .with_order(0.0, 0.0)
}

/// Product of two tapered trigonometric symbols, class `S^{0,0}_{0,0}`.
pub fn double_tapered_trig(grid: PhaseSpaceGrid, taper: f64, amplitude: f64) -> DoubleSymbol {
    DoubleSymbol::product(tapered_trig(grid, taper, amplitude, 0.3), tapered_trig(grid, taper, 0.5 * amplitude, -0.2))
        .expect("one grid")
        .with_order(DoubleOrder::Pair(0.0, 0.0), 0.0)
}
