//! Matrix elements of operators and super operators with respect to the frame.
//!
//! Operator elements are `f_{a,b} = <G_a, f G_b>`, stored densely over the
//! truncated id set. Super operator elements use the canonical index order
//! `(alpha_L, beta_L, alpha_R, beta_R)`:
//! `F_{aL,bL,aR,bR} = Tr(|G_bR><G_aL| F(|G_bL><G_aR|))`. They are evaluated on
//! demand and cached; only product (Schmidt-sum) super operators have a
//! closed form in terms of operator elements.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, RwLock};

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{FrameId, FrameSpec, LEAKAGE_TOLERANCE};
use crate::geometry::{Grid, SampledField, UniformGrid};
use crate::io::fmt_f64;
use crate::weyl::{matmul, OperatorMatrix};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Default magnitude below which super elements count as zero in contractions.
pub const DEFAULT_THRESHOLD: f64 = 1e-14;
/// Default number of cached super elements.
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 20;

/// Operator elements `<G_a, op G_b>` over the truncated frame (rows `a`, columns `b`).
#[derive(Debug, Clone)]
pub struct OperatorMatrixElements {
    spec: Arc<FrameSpec>,
    data: Mat<C64>,
    /// Relative kernel mass outside the safe box when computed from an operator.
    pub leakage: f64,
}

impl OperatorMatrixElements {
    pub fn zeros(spec: Arc<FrameSpec>) -> Self {
        let n = spec.len();
        Self { spec, data: Mat::zeros(n, n), leakage: 0.0 }
    }

    pub fn from_matrix(spec: Arc<FrameSpec>, data: Mat<C64>) -> Result<Self> {
        let n = spec.len();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::SampleCount { expected: n * n, found: data.nrows() * data.ncols() });
        }
        Ok(Self { spec, data, leakage: 0.0 })
    }

    pub fn spec(&self) -> &Arc<FrameSpec> {
        &self.spec
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.data
    }

    pub fn matrix_mut(&mut self) -> &mut Mat<C64> {
        &mut self.data
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn get(&self, a: &FrameId, b: &FrameId) -> Result<C64> {
        Ok(self.data[(self.spec.index_of(a)?, self.spec.index_of(b)?)])
    }

    /// `l^2` norm of all elements.
    pub fn norm(&self) -> f64 {
        self.data.norm_l2()
    }

    /// `||E - E^dagger|| / ||E||`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return 0.0;
        }
        let diff = &self.data - self.data.adjoint();
        diff.norm_l2() / n
    }

    fn check_spec(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.spec, &other.spec) {
            return Err(Error::GridMismatch("matrix elements refer to different frames".into()));
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        let (a, b) = (&self.data, &other.data);
        let data = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + c * b[(i, j)]);
        Ok(Self { spec: self.spec.clone(), data, leakage: self.leakage.max(other.leakage) })
    }

    pub fn scaled(&self, c: C64) -> Self {
        let a = &self.data;
        Self { spec: self.spec.clone(), data: Mat::from_fn(a.nrows(), a.ncols(), |i, j| c * a[(i, j)]), leakage: self.leakage }
    }

    /// `||self - other|| / ||other||`.
    pub fn rel_distance(&self, other: &Self) -> Result<f64> {
        self.check_spec(other)?;
        let diff = &self.data - &other.data;
        let n = other.norm();
        Ok(if n == 0.0 { diff.norm_l2() } else { diff.norm_l2() / n })
    }

    /// CSV rows `alpha_out.., k_out.., alpha_in.., k_in.., re, im` for `|value| > threshold`.
    pub fn write_csv(&self, mut w: impl Write, threshold: f64) -> Result<()> {
        let d = self.spec.dim();
        let mut head = Vec::new();
        for side in ["out", "in"] {
            for p in ["alpha", "k"] {
                for a in 1..=d {
                    head.push(format!("{p}_{side}_{a}"));
                }
            }
        }
        writeln!(w, "{},re,im", head.join(","))?;
        let ids = self.spec.ids();
        for (i, a) in ids.iter().enumerate() {
            for (j, b) in ids.iter().enumerate() {
                let v = self.data[(i, j)];
                if v.norm() <= threshold {
                    continue;
                }
                let idx: Vec<String> =
                    [&a.alpha.0, &a.k.0, &b.alpha.0, &b.k.0].iter().flat_map(|v| v.iter().map(|x| x.to_string())).collect();
                writeln!(w, "{},{},{}", idx.join(","), fmt_f64(v.re), fmt_f64(v.im))?;
            }
        }
        Ok(())
    }
}

fn check_operator(spec: &FrameSpec, op: &OperatorMatrix) -> Result<()> {
    if spec.grid() != op.grid() {
        return Err(Error::GridMismatch("operator and frame live on different grids".into()));
    }
    Ok(())
}

/// Relative HS mass of the kernel with `x` or `y` outside `[-(N-1), N-1]^d`.
pub fn kernel_leakage(spec: &FrameSpec, op: &OperatorMatrix) -> f64 {
    let grid = spec.grid();
    let lim = spec.lattice_truncation() as f64 - 1.0 + 1e-12;
    let inside: Vec<bool> = (0..grid.len()).map(|i| grid.point(i).iter().all(|v| v.abs() <= lim)).collect();
    let k = op.kernel();
    let (mut total, mut outer) = (0.0, 0.0);
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            let v = k[(i, j)].norm_sqr();
            total += v;
            if !(inside[i] && inside[j]) {
                outer += v;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

/// `f_{a,b} = <G_a, op G_b> = h^{2d} (G^dagger K G)_{a,b}`.
pub fn op_matrix_elements(spec: &Arc<FrameSpec>, op: &OperatorMatrix) -> Result<OperatorMatrixElements> {
    check_operator(spec, op)?;
    let leakage = kernel_leakage(spec, op);
    if leakage > LEAKAGE_TOLERANCE {
        log::warn!("operator kernel mass {leakage:.3e} lies outside the safe box; matrix elements are truncated");
    }
    let g = spec.frame_matrix();
    let w = spec.grid().weight();
    let kg = matmul(op.kernel().as_ref(), g.as_ref(), ONE);
    let data = matmul(g.adjoint(), kg.as_ref(), C64::new(w * w, 0.0));
    Ok(OperatorMatrixElements { spec: spec.clone(), data, leakage })
}

/// `sum_{a,b} f_{a,b} |G_a><G_b|` as a dense kernel.
pub fn reconstruct_operator(elems: &OperatorMatrixElements) -> Result<OperatorMatrix> {
    let g = elems.spec.frame_matrix();
    let eg = matmul(elems.data.as_ref(), g.adjoint(), ONE);
    let k = matmul(g.as_ref(), eg.as_ref(), ONE);
    OperatorMatrix::from_kernel(*elems.spec.grid(), k)
}

/// `| ||op||_HS - ||elements||_l2 | / ||op||_HS`.
pub fn hs_isometry_check(spec: &Arc<FrameSpec>, op: &OperatorMatrix) -> Result<f64> {
    let n = op.hs_norm();
    if n == 0.0 {
        return Err(Error::InvalidInput("HS isometry check of the zero operator".into()));
    }
    let e = op_matrix_elements(spec, op)?;
    Ok((n - e.norm()).abs() / n)
}

/// Dense super operator `g -> F(g)` on kernels.
pub type SuperMap = Arc<dyn Fn(&OperatorMatrix) -> Result<OperatorMatrix> + Send + Sync>;

/// Evaluator of one super element from flat id indices `(aL, bL, aR, bR)`.
pub type SuperEvaluator = Arc<dyn Fn([usize; 4]) -> C64 + Send + Sync>;

/// How super elements are produced.
#[derive(Clone)]
pub enum SuperKind {
    /// `sum_j w_j L_j[aL, bL] R_j[aR, bR]`.
    Product(Vec<(C64, Arc<OperatorMatrixElements>, Arc<OperatorMatrixElements>)>),
    /// Arbitrary evaluator.
    Generic(SuperEvaluator),
    /// Lazy contraction `sum_{a,b} F[aL, a, b, bR] G[a, bL, aR, b]`.
    Composite(Arc<SuperMatrixElements>, Arc<SuperMatrixElements>),
}

/// On-demand super matrix elements with a thresholded, bounded cache.
pub struct SuperMatrixElements {
    spec: Arc<FrameSpec>,
    kind: SuperKind,
    threshold: f64,
    capacity: usize,
    cache: RwLock<HashMap<[usize; 4], C64>>,
}

impl std::fmt::Debug for SuperMatrixElements {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            SuperKind::Product(t) => format!("Product(rank {})", t.len()),
            SuperKind::Generic(_) => "Generic".to_string(),
            SuperKind::Composite(..) => "Composite".to_string(),
        };
        f.debug_struct("SuperMatrixElements").field("kind", &kind).field("threshold", &self.threshold).finish()
    }
}

impl SuperMatrixElements {
    pub fn new(spec: Arc<FrameSpec>, kind: SuperKind) -> Result<Self> {
        match &kind {
            SuperKind::Product(terms) => {
                if terms.iter().any(|(_, l, r)| !Arc::ptr_eq(l.spec(), &spec) || !Arc::ptr_eq(r.spec(), &spec)) {
                    return Err(Error::GridMismatch("product terms refer to a different frame".into()));
                }
            }
            SuperKind::Composite(a, b) => {
                if !Arc::ptr_eq(&a.spec, &spec) || !Arc::ptr_eq(&b.spec, &spec) {
                    return Err(Error::GridMismatch("factors refer to a different frame".into()));
                }
            }
            SuperKind::Generic(_) => {}
        }
        Ok(Self { spec, kind, threshold: DEFAULT_THRESHOLD, capacity: DEFAULT_CACHE_CAPACITY, cache: RwLock::new(HashMap::new()) })
    }

    /// `sum_j w_j L_j (x) R_j`.
    pub fn product(terms: Vec<(C64, OperatorMatrixElements, OperatorMatrixElements)>) -> Result<Self> {
        let spec = terms
            .first()
            .map(|t| t.1.spec().clone())
            .ok_or_else(|| Error::InvalidInput("product super elements need at least one term".into()))?;
        Self::new(spec, SuperKind::Product(terms.into_iter().map(|(w, l, r)| (w, Arc::new(l), Arc::new(r))).collect()))
    }

    /// Elements of the identity super operator: products of gramians.
    pub fn identity(spec: &Arc<FrameSpec>) -> Result<Self> {
        let gram = op_matrix_elements(spec, &OperatorMatrix::identity(*spec.grid()))?;
        Self::product(vec![(ONE, gram.clone(), gram)])
    }

    /// Elements of a dense super operator, evaluated in trace form.
    pub fn from_super_map(spec: Arc<FrameSpec>, f: SuperMap) -> Result<Self> {
        let s = spec.clone();
        let eval: SuperEvaluator = Arc::new(move |ids| {
            super_element_trace_form(&s, &f, &ids.map(|i| s.id_at(i))).unwrap_or_else(|e| {
                log::warn!("super element evaluation failed: {e}");
                C64::new(f64::NAN, f64::NAN)
            })
        });
        Self::new(spec, SuperKind::Generic(eval))
    }

    /// The same elements behind an opaque evaluator (forces generic contractions).
    pub fn into_lazy(self) -> Self {
        let spec = self.spec.clone();
        let inner = Arc::new(self);
        let eval: SuperEvaluator = Arc::new(move |ids| inner.element(ids));
        Self { spec, kind: SuperKind::Generic(eval), threshold: DEFAULT_THRESHOLD, capacity: DEFAULT_CACHE_CAPACITY, cache: RwLock::new(HashMap::new()) }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self.cache.write().expect("cache lock").clear();
        self
    }

    pub fn with_cache_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn spec(&self) -> &Arc<FrameSpec> {
        &self.spec
    }

    pub fn kind(&self) -> &SuperKind {
        &self.kind
    }

    pub fn cached(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    fn compute(&self, ids: [usize; 4]) -> C64 {
        let [al, bl, ar, br] = ids;
        match &self.kind {
            SuperKind::Product(terms) => terms.iter().map(|(w, l, r)| w * l.at(al, bl) * r.at(ar, br)).sum(),
            SuperKind::Generic(f) => f(ids),
            SuperKind::Composite(f, g) => {
                let n = self.spec.len();
                let mut s = ZERO;
                for a in 0..n {
                    for b in 0..n {
                        let fv = f.element([al, a, b, br]);
                        if fv == ZERO {
                            continue;
                        }
                        s += fv * g.element([a, bl, ar, b]);
                    }
                }
                s
            }
        }
    }

    /// Element at flat indices `(aL, bL, aR, bR)`; magnitudes below the threshold read as zero.
    pub fn element(&self, ids: [usize; 4]) -> C64 {
        if let Some(v) = self.cache.read().expect("cache lock").get(&ids) {
            return *v;
        }
        let mut v = self.compute(ids);
        if v.norm() < self.threshold {
            v = ZERO;
        }
        if !matches!(self.kind, SuperKind::Product(_)) {
            let mut c = self.cache.write().expect("cache lock");
            if c.len() < self.capacity {
                c.insert(ids, v);
            }
        }
        v
    }

    pub fn element_ids(&self, ids: &[FrameId; 4]) -> Result<C64> {
        let idx = [
            self.spec.index_of(&ids[0])?,
            self.spec.index_of(&ids[1])?,
            self.spec.index_of(&ids[2])?,
            self.spec.index_of(&ids[3])?,
        ];
        Ok(self.element(idx))
    }

    /// Sparse CSV of the elements with all four ids in `box_ids` and `|value| > threshold`.
    pub fn write_sparse_csv(&self, mut w: impl Write, box_ids: &[usize]) -> Result<()> {
        let d = self.spec.dim();
        let mut head = Vec::new();
        for slot in ["alpha_l", "beta_l", "alpha_r", "beta_r"] {
            for p in ["lattice", "k"] {
                for a in 1..=d {
                    head.push(format!("{slot}_{p}_{a}"));
                }
            }
        }
        writeln!(w, "{},re,im", head.join(","))?;
        let ids: Vec<FrameId> = box_ids.iter().map(|i| self.spec.id_at(*i)).collect();
        let b = box_ids.len();
        let rows: Vec<String> = (0..b * b)
            .into_par_iter()
            .flat_map_iter(|p| {
                let (i0, i1) = (p / b, p % b);
                let ids = &ids;
                (0..b * b).filter_map(move |q| {
                    let (i2, i3) = (q / b, q % b);
                    let v = self.element([box_ids[i0], box_ids[i1], box_ids[i2], box_ids[i3]]);
                    if v.norm() <= self.threshold {
                        return None;
                    }
                    let idx: Vec<String> = [i0, i1, i2, i3]
                        .iter()
                        .flat_map(|i| ids[*i].alpha.0.iter().chain(&ids[*i].k.0).map(|x| x.to_string()))
                        .collect();
                    Some(format!("{},{},{}", idx.join(","), fmt_f64(v.re), fmt_f64(v.im)))
                })
            })
            .collect();
        for r in rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    }
}

/// `Tr(|G_bR><G_aL| F(|G_bL><G_aR|)) = <G_aL, F(|G_bL><G_aR|) G_bR>`.
pub fn super_element_trace_form(spec: &FrameSpec, f: &SuperMap, ids: &[FrameId; 4]) -> Result<C64> {
    let [al, bl, ar, br] = ids.each_ref().map(|id| spec.frame_vector(id));
    let x = f(&OperatorMatrix::rank1(&bl?, &ar?)?)?;
    x.apply(&br?)?.inner(&al?)
        .map(|v: C64| v.conj())
}

/// The same element as the HS scalar product `<|G_aL><G_bR|, F(|G_bL><G_aR|)>`.
pub fn super_element_scalar_form(spec: &FrameSpec, f: &SuperMap, ids: &[FrameId; 4]) -> Result<C64> {
    let [al, bl, ar, br] = ids.each_ref().map(|id| spec.frame_vector(id));
    let x = f(&OperatorMatrix::rank1(&bl?, &ar?)?)?;
    OperatorMatrix::rank1(&al?, &br?)?.hs_inner(&x)
}

/// `(F g)_{a,b} = sum_{b',a'} F[a, b', a', b] g[b', a']`.
pub fn apply_super_via_elements(f: &SuperMatrixElements, g: &OperatorMatrixElements) -> Result<OperatorMatrixElements> {
    if !Arc::ptr_eq(&f.spec, g.spec()) {
        return Err(Error::GridMismatch("super elements and operator elements refer to different frames".into()));
    }
    let spec = f.spec.clone();
    let n = spec.len();
    let data = match &f.kind {
        SuperKind::Product(terms) => {
            // The contraction factorises into L_j g R_j.
            let mut acc = Mat::<C64>::zeros(n, n);
            for (w, l, r) in terms {
                let lg = matmul(l.matrix().as_ref(), g.matrix().as_ref(), *w);
                acc += matmul(lg.as_ref(), r.matrix().as_ref(), ONE);
            }
            acc
        }
        _ => {
            let vals: Vec<C64> = (0..n * n)
                .into_par_iter()
                .map(|p| {
                    let (a, b) = (p / n, p % n);
                    let mut s = ZERO;
                    for bp in 0..n {
                        for ap in 0..n {
                            let gv = g.at(bp, ap);
                            if gv == ZERO {
                                continue;
                            }
                            s += f.element([a, bp, ap, b]) * gv;
                        }
                    }
                    s
                })
                .collect();
            Mat::from_fn(n, n, |a, b| vals[a * n + b])
        }
    };
    Ok(OperatorMatrixElements { spec, data, leakage: g.leakage })
}

/// `(F G)_{aL,bL,aR,bR} = sum_{a,b} F[aL, a, b, bR] G[a, bL, aR, b]`.
///
/// Product factors compose to a product of rank `r_F r_G` with
/// `(f_L g_L) (x) (g_R f_R)`; anything else yields a lazy contraction.
pub fn compose_super_elements(f: &Arc<SuperMatrixElements>, g: &Arc<SuperMatrixElements>) -> Result<SuperMatrixElements> {
    if !Arc::ptr_eq(&f.spec, &g.spec) {
        return Err(Error::GridMismatch("super elements refer to different frames".into()));
    }
    if let (SuperKind::Product(ft), SuperKind::Product(gt)) = (&f.kind, &g.kind) {
        let mut terms = Vec::with_capacity(ft.len() * gt.len());
        for (wf, fl, fr) in ft {
            for (wg, gl, gr) in gt {
                let l = matmul(fl.matrix().as_ref(), gl.matrix().as_ref(), ONE);
                let r = matmul(gr.matrix().as_ref(), fr.matrix().as_ref(), ONE);
                terms.push((
                    wf * wg,
                    Arc::new(OperatorMatrixElements::from_matrix(f.spec.clone(), l)?),
                    Arc::new(OperatorMatrixElements::from_matrix(f.spec.clone(), r)?),
                ));
            }
        }
        return SuperMatrixElements::new(f.spec.clone(), SuperKind::Product(terms));
    }
    SuperMatrixElements::new(f.spec.clone(), SuperKind::Composite(f.clone(), g.clone()))
}

/// `sum_{a,b} (sum_{b',a'} F[a,b',a',b] g[b',a']) |G_a><G_b|` as a dense kernel.
pub fn super_expansion(f: &SuperMatrixElements, g: &OperatorMatrixElements) -> Result<OperatorMatrix> {
    reconstruct_operator(&apply_super_via_elements(f, g)?)
}

/// Frame vectors as sampled fields, for callers that need a few of them.
pub fn frame_vectors(spec: &FrameSpec, ids: &[usize]) -> Result<Vec<SampledField<UniformGrid>>> {
    ids.iter().map(|i| spec.frame_vector(&spec.id_at(*i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetics::VectorPotential;
    use crate::weyl::random_hs_operator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn small_spec() -> Arc<FrameSpec> {
        let grid = UniformGrid::new(1, 4.0, 64).unwrap();
        Arc::new(FrameSpec::new(grid, 2, 3, VectorPotential::constant(&[0.3]).unwrap()).unwrap())
    }

    fn random_op(spec: &FrameSpec, seed: u64) -> OperatorMatrix {
        random_hs_operator(*spec.grid(), 0.5, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn frame_projector_element_and_zero() {
        let spec = small_spec();
        let id = spec.id_at(17);
        let g = spec.frame_vector(&id).unwrap();
        let op = OperatorMatrix::rank1(&g, &g).unwrap();
        let e = op_matrix_elements(&spec, &op).unwrap();
        assert!((e.get(&id, &id).unwrap() - C64::new((2.0 * PI).powi(-2), 0.0)).norm() < 1e-12);
        let z = op_matrix_elements(&spec, &OperatorMatrix::zeros(*spec.grid())).unwrap();
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn single_element_reconstructs_rank_one() {
        let spec = small_spec();
        let mut e = OperatorMatrixElements::zeros(spec.clone());
        e.matrix_mut()[(4, 9)] = C64::new(0.5, -1.0);
        let k = reconstruct_operator(&e).unwrap();
        let (a, b) = (spec.frame_vector(&spec.id_at(4)).unwrap(), spec.frame_vector(&spec.id_at(9)).unwrap());
        let r = OperatorMatrix::rank1(&a, &b).unwrap().scaled(C64::new(0.5, -1.0));
        assert!(k.rel_hs_distance(&r).unwrap() < 1e-14);
    }

    #[test]
    fn self_adjoint_operator_has_hermitian_elements() {
        let spec = small_spec();
        let op = random_op(&spec, 5);
        let h = op.axpy(ONE, &op.adjoint()).unwrap();
        assert!(op_matrix_elements(&spec, &h).unwrap().hermitian_defect() < 1e-13);
    }

    #[test]
    fn product_elements_factorise_and_match_trace_form() {
        let spec = small_spec();
        let (l, r) = (random_op(&spec, 1), random_op(&spec, 2));
        let el = op_matrix_elements(&spec, &l).unwrap();
        let er = op_matrix_elements(&spec, &r).unwrap();
        let fe = SuperMatrixElements::product(vec![(ONE, el.clone(), er.clone())]).unwrap();
        let (l2, r2) = (l.clone(), r.clone());
        let map: SuperMap = Arc::new(move |g| l2.compose(g)?.compose(&r2));
        let dense = SuperMatrixElements::from_super_map(spec.clone(), map.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            use rand::Rng;
            let ids: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..spec.len()));
            let v = fe.element(ids);
            assert!((v - el.at(ids[0], ids[1]) * er.at(ids[2], ids[3])).norm() < 1e-15);
            let d = dense.element(ids);
            let s = super_element_scalar_form(&spec, &map, &ids.map(|i| spec.id_at(i))).unwrap();
            assert!((d - v).norm() <= 1e-9 * v.norm().max(1e-6), "{d} {v}");
            assert!((d - s).norm() <= 1e-10 * d.norm().max(1e-6));
        }
        assert!(dense.cached() > 0);
    }

    #[test]
    fn generic_and_product_contractions_agree() {
        let spec = small_spec();
        let el = op_matrix_elements(&spec, &random_op(&spec, 3)).unwrap();
        let er = op_matrix_elements(&spec, &random_op(&spec, 4)).unwrap();
        let g = op_matrix_elements(&spec, &random_op(&spec, 6)).unwrap();
        let f = SuperMatrixElements::product(vec![(C64::new(0.7, 0.2), el, er)]).unwrap();
        let fast = apply_super_via_elements(&f, &g).unwrap();
        let slow = apply_super_via_elements(&f.into_lazy(), &g).unwrap();
        assert!(slow.rel_distance(&fast).unwrap() < 1e-12);
        let zero = apply_super_via_elements(
            &SuperMatrixElements::identity(&spec).unwrap(),
            &OperatorMatrixElements::zeros(spec.clone()),
        )
        .unwrap();
        assert_eq!(zero.norm(), 0.0);
    }

    #[test]
    fn composition_of_products_matches_lazy_contraction() {
        let spec = small_spec();
        let mk = |s| op_matrix_elements(&spec, &random_op(&spec, s)).unwrap();
        let f = Arc::new(SuperMatrixElements::product(vec![(ONE, mk(1), mk(2))]).unwrap());
        let g = Arc::new(SuperMatrixElements::product(vec![(C64::new(0.0, 1.0), mk(3), mk(4))]).unwrap());
        let fast = compose_super_elements(&f, &g).unwrap();
        let lazy_f = Arc::new(SuperMatrixElements::product(vec![(ONE, mk(1), mk(2))]).unwrap().into_lazy());
        let slow = compose_super_elements(&lazy_f, &g).unwrap();
        assert!(matches!(slow.kind(), SuperKind::Composite(..)));
        for ids in [[0, 1, 2, 3], [10, 12, 7, 30], [20, 20, 20, 20]] {
            let (a, b) = (fast.element(ids), slow.element(ids));
            assert!((a - b).norm() < 1e-12 * a.norm().max(1e-3), "{a} {b}");
        }
    }

    #[test]
    fn sparse_export_lists_entries() {
        let spec = small_spec();
        let f = SuperMatrixElements::identity(&spec).unwrap();
        let mut buf = Vec::new();
        f.write_sparse_csv(&mut buf, &spec.box_indices(0, 1)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "alpha_l_lattice_1,alpha_l_k_1,beta_l_lattice_1,beta_l_k_1,alpha_r_lattice_1,alpha_r_k_1,beta_r_lattice_1,beta_r_k_1,re,im");
        assert!(lines.count() > 0);
    }
}
