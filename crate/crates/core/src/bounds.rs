//! Schur bounds, decay tables of super matrix elements and boundedness runs.
//!
//! A super operator acts on operator elements by
//! `(F g)_{a,b} = sum_{b',a'} F[a, b', a', b] g[b', a']`, so its flattened
//! kernel has rows `(a, b) = (alpha_L, beta_R)` and columns
//! `(b', a') = (beta_L, alpha_R)`. The Schur constant of that kernel bounds the
//! super operator on Hilbert-Schmidt operators through the Parseval identity.

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FrameId, FrameSpec};
use crate::geometry::japanese_bracket;
use crate::io::fmt_f64;
use crate::magnetics::VectorPotential;
use crate::matrixrep::{SuperKind, SuperMatrixElements};
use crate::superweyl::{DoubleSymbol, SuperOperator, SCHMIDT_TOLERANCE};
use crate::weyl::{matmul, random_hs_operator, OperatorMatrix};

#[cfg(test)]
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Number of power iterations for norm estimates.
pub const POWER_ITERATIONS: usize = 100;
/// Relative change between the two largest boxes that still counts as saturated.
pub const SATURATION_TOLERANCE: f64 = 0.05;

/// Row and column `l^1` sups of a kernel and an empirical `l^2` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    pub row_sup: f64,
    pub col_sup: f64,
    pub constant: f64,
    pub norm_estimate: f64,
}

fn start_vector(n: usize) -> Vec<C64> {
    (0..n).map(|i| C64::new(1.0 + 0.01 * (i % 13) as f64, 0.01 * (i % 7) as f64)).collect()
}

/// Power iteration for `||K||` given `v -> K v` and `v -> K^dagger v`.
fn power_norm(n: usize, fwd: impl Fn(&[C64]) -> Vec<C64>, adj: impl Fn(&[C64]) -> Vec<C64>) -> f64 {
    let mut v = start_vector(n);
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let w = adj(&fwd(&v));
        lambda = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w;
    }
    lambda.sqrt()
}

/// Schur test for a finite kernel.
pub fn schur_bound(k: &Mat<C64>) -> Result<SchurReport> {
    let (r, c) = (k.nrows(), k.ncols());
    if r == 0 || c == 0 {
        return Err(Error::InvalidInput("Schur test of an empty kernel".into()));
    }
    let row_sup = (0..r).map(|i| (0..c).map(|j| k[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let col_sup = (0..c).map(|j| (0..r).map(|i| k[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let col = |v: &[C64]| Mat::from_fn(v.len(), 1, |i, _| v[i]);
    let flat = |m: Mat<C64>| (0..m.nrows()).map(|i| m[(i, 0)]).collect::<Vec<_>>();
    let norm_estimate = power_norm(
        c,
        |v| flat(matmul(k.as_ref(), col(v).as_ref(), ONE)),
        |v| flat(matmul(k.adjoint(), col(v).as_ref(), ONE)),
    );
    Ok(SchurReport { row_sup, col_sup, constant: row_sup.max(col_sup), norm_estimate })
}

/// Restriction of product terms `(w, L, R)` to the rows and columns in `ids`.
fn restricted_terms(f: &SuperMatrixElements, ids: &[usize]) -> Option<Vec<(C64, Mat<C64>, Mat<C64>)>> {
    match f.kind() {
        SuperKind::Product(terms) => Some(
            terms
                .iter()
                .map(|(w, l, r)| {
                    let sub = |m: &Mat<C64>| Mat::from_fn(ids.len(), ids.len(), |i, j| m[(ids[i], ids[j])]);
                    (*w, sub(l.matrix()), sub(r.matrix()))
                })
                .collect(),
        ),
        _ => None,
    }
}

/// Schur test of the flattened super kernel with all four ids restricted to `ids`.
pub fn super_schur_bound(f: &SuperMatrixElements, ids: &[usize]) -> Result<SchurReport> {
    let b = ids.len();
    if b == 0 {
        return Err(Error::InvalidInput("Schur test over an empty index box".into()));
    }
    let thr = f.threshold();
    let clip = |v: C64| if v.norm() < thr { 0.0 } else { v.norm() };
    let (row_sup, col_sup, norm_estimate) = match restricted_terms(f, ids) {
        Some(terms) if terms.len() == 1 => {
            // Rank one: every sum factorises.
            let (w, l, r) = &terms[0];
            let abs = |m: &Mat<C64>| Mat::from_fn(b, b, |i, j| clip(m[(i, j)]));
            let (la, ra) = (abs(l), abs(r));
            let row = |m: &Mat<f64>, i: usize| (0..b).map(|j| m[(i, j)]).sum::<f64>();
            let col = |m: &Mat<f64>, j: usize| (0..b).map(|i| m[(i, j)]).sum::<f64>();
            let wn = w.norm();
            let row_sup = (0..b).map(|a| row(&la, a)).fold(0.0, f64::max) * (0..b).map(|q| col(&ra, q)).fold(0.0, f64::max) * wn;
            let col_sup = (0..b).map(|q| col(&la, q)).fold(0.0, f64::max) * (0..b).map(|a| row(&ra, a)).fold(0.0, f64::max) * wn;
            (row_sup, col_sup, structured_norm(&terms))
        }
        Some(terms) => {
            let entry = |a: usize, bp: usize, ap: usize, bb: usize| {
                clip(terms.iter().map(|(w, l, r)| w * l[(a, bp)] * r[(ap, bb)]).sum())
            };
            // Rows are (a, bb), columns (bp, ap).
            let row_sup = (0..b * b)
                .into_par_iter()
                .map(|p| {
                    let (a, bb) = (p / b, p % b);
                    (0..b * b).map(|q| entry(a, q / b, q % b, bb)).sum::<f64>()
                })
                .reduce(|| 0.0, f64::max);
            let col_sup = (0..b * b)
                .into_par_iter()
                .map(|q| {
                    let (bp, ap) = (q / b, q % b);
                    (0..b * b).map(|p| entry(p / b, bp, ap, p % b)).sum::<f64>()
                })
                .reduce(|| 0.0, f64::max);
            (row_sup, col_sup, structured_norm(&terms))
        }
        None => {
            let k = Mat::from_fn(b * b, b * b, |row, col| {
                let (a, bb) = (row / b, row % b);
                let (bp, ap) = (col / b, col % b);
                f.element([ids[a], ids[bp], ids[ap], ids[bb]])
            });
            let rep = schur_bound(&k)?;
            (rep.row_sup, rep.col_sup, rep.norm_estimate)
        }
    };
    Ok(SchurReport { row_sup, col_sup, constant: row_sup.max(col_sup), norm_estimate })
}

/// `||X -> sum_j w_j L_j X R_j||` on `b x b` coefficient arrays.
fn structured_norm(terms: &[(C64, Mat<C64>, Mat<C64>)]) -> f64 {
    let b = terms[0].1.nrows();
    let to_mat = |v: &[C64]| Mat::from_fn(b, b, |i, j| v[i * b + j]);
    let to_vec = |m: &Mat<C64>| (0..b * b).map(|p| m[(p / b, p % b)]).collect::<Vec<_>>();
    let fwd = |v: &[C64]| {
        let x = to_mat(v);
        let mut acc = Mat::<C64>::zeros(b, b);
        for (w, l, r) in terms {
            acc += matmul(matmul(l.as_ref(), x.as_ref(), *w).as_ref(), r.as_ref(), ONE);
        }
        to_vec(&acc)
    };
    let adj = |v: &[C64]| {
        let x = to_mat(v);
        let mut acc = Mat::<C64>::zeros(b, b);
        for (w, l, r) in terms {
            acc += matmul(matmul(l.adjoint(), x.as_ref(), w.conj()).as_ref(), r.adjoint(), ONE);
        }
        to_vec(&acc)
    };
    power_norm(b * b, fwd, adj)
}

/// Decay weight exponents `(n_L, n_R, n*_L, n*_R; m_L, m_R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightTuple {
    pub n_l: u32,
    pub n_r: u32,
    pub ns_l: u32,
    pub ns_r: u32,
    pub m_l: f64,
    pub m_r: f64,
}

impl WeightTuple {
    pub fn symmetric(n: u32, ns: u32) -> Self {
        Self { n_l: n, n_r: n, ns_l: ns, ns_r: ns, m_l: 0.0, m_r: 0.0 }
    }

    /// All `(n, n*)` with `n, n* <= max`, symmetric in left and right, `m = 0`.
    pub fn grid(max: u32) -> Vec<Self> {
        (0..=max).flat_map(|n| (0..=max).map(move |ns| Self::symmetric(n, ns))).collect()
    }

    fn side(a: &FrameId, b: &FrameId, n: u32, ns: u32, m: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let nu: Vec<f64> = a.alpha.0.iter().zip(&b.alpha.0).map(|(x, y)| (x - y) as f64).collect();
        let nus: Vec<f64> = a.k.0.iter().zip(&b.k.0).map(|(x, y)| tau * (y - x) as f64).collect();
        let mus: Vec<f64> = a.k.0.iter().zip(&b.k.0).map(|(x, y)| tau * (x + y) as f64).collect();
        japanese_bracket(&nu).powi(n as i32) * japanese_bracket(&nus).powi(ns as i32) * japanese_bracket(&mus).powf(-m)
    }

    /// Weight of the element `(a_L, b_L, a_R, b_R)`.
    pub fn weight(&self, ids: [&FrameId; 4]) -> f64 {
        Self::side(ids[0], ids[1], self.n_l, self.ns_l, self.m_l) * Self::side(ids[2], ids[3], self.n_r, self.ns_r, self.m_r)
    }

    pub fn label(&self) -> String {
        format!("n=({},{}) n*=({},{}) m=({},{})", self.n_l, self.n_r, self.ns_l, self.ns_r, self.m_l, self.m_r)
    }
}

/// Saturation verdict for one weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum DecayVerdict {
    Saturating { relative_change: f64 },
    Growing { relative_change: f64, rate: f64 },
}

impl DecayVerdict {
    pub fn is_saturating(&self) -> bool {
        matches!(self, Self::Saturating { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub weight: WeightTuple,
    /// Weighted sup per box, in box order.
    pub sups: Vec<f64>,
    pub monotone: bool,
}

/// Weighted sups of super elements over growing boxes `(n_box, k_box)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub boxes: Vec<(usize, usize)>,
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "n_l,n_r,ns_l,ns_r,m_l,m_r,n_box,k_box,sup")?;
        for r in &self.rows {
            for (b, s) in self.boxes.iter().zip(&r.sups) {
                let t = &r.weight;
                writeln!(w, "{},{},{},{},{},{},{},{},{}", t.n_l, t.n_r, t.ns_l, t.ns_r, fmt_f64(t.m_l), fmt_f64(t.m_r), b.0, b.1, fmt_f64(*s))?;
            }
        }
        Ok(())
    }
}

/// Weighted sups of one side's elements `|L[a, b]|` over `ids^2`.
fn side_sup(ids: &[usize], all: &[FrameId], m: &Mat<C64>, n: u32, ns: u32, mm: f64, thr: f64) -> f64 {
    ids.par_iter()
        .map(|&a| {
            ids.iter()
                .map(|&b| {
                    let v = m[(a, b)].norm();
                    if v < thr {
                        0.0
                    } else {
                        v * WeightTuple::side(&all[a], &all[b], n, ns, mm)
                    }
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Decay table of given super elements.
pub fn decay_table_from_elements(
    f: &SuperMatrixElements,
    weights: &[WeightTuple],
    boxes: &[(usize, usize)],
) -> Result<DecayReport> {
    let spec = f.spec();
    if boxes.iter().any(|&(n, k)| n > spec.lattice_truncation() || k > spec.modulation_truncation()) {
        return Err(Error::InvalidInput("decay box exceeds the frame truncation".into()));
    }
    let all = spec.ids();
    let thr = f.threshold();
    let mut rows = Vec::with_capacity(weights.len());
    for wt in weights {
        let mut sups = Vec::with_capacity(boxes.len());
        for &(nb, kb) in boxes {
            let ids = spec.box_indices(nb, kb);
            let s = match f.kind() {
                SuperKind::Product(terms) if terms.len() == 1 => {
                    let (w, l, r) = &terms[0];
                    w.norm()
                        * side_sup(&ids, &all, l.matrix(), wt.n_l, wt.ns_l, wt.m_l, 0.0)
                        * side_sup(&ids, &all, r.matrix(), wt.n_r, wt.ns_r, wt.m_r, 0.0)
                }
                _ => {
                    let b = ids.len();
                    (0..b * b)
                        .into_par_iter()
                        .map(|p| {
                            let (al, bl) = (ids[p / b], ids[p % b]);
                            let mut best: f64 = 0.0;
                            for &ar in &ids {
                                for &br in &ids {
                                    let v = f.element([al, bl, ar, br]).norm();
                                    if v >= thr {
                                        best = best.max(v * wt.weight([&all[al], &all[bl], &all[ar], &all[br]]));
                                    }
                                }
                            }
                            best
                        })
                        .reduce(|| 0.0, f64::max)
                }
            };
            sups.push(s);
        }
        let monotone = sups.windows(2).all(|w| w[1] >= w[0]);
        rows.push(DecayRow { weight: *wt, sups, monotone });
    }
    Ok(DecayReport { boxes: boxes.to_vec(), rows })
}

/// Decay table of `Op^A(F)` through the Schmidt route.
pub fn decay_table(
    a: &VectorPotential,
    f: &DoubleSymbol,
    spec: &Arc<FrameSpec>,
    weights: &[WeightTuple],
    boxes: &[(usize, usize)],
) -> Result<DecayReport> {
    let elems = SuperOperator::new(a, f, SCHMIDT_TOLERANCE)?.matrix_elements(spec)?;
    decay_table_from_elements(&elems, weights, boxes)
}

/// Saturation verdicts per weight row: the last two sups differ by less than 5%.
pub fn fit_decay(report: &DecayReport) -> Result<Vec<DecayVerdict>> {
    if report.boxes.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 boxes, got {}", report.boxes.len())));
    }
    let k = report.boxes.len();
    let size = |b: (usize, usize)| b.0.max(b.1) as f64;
    Ok(report
        .rows
        .iter()
        .map(|r| {
            let (prev, last) = (r.sups[k - 2], r.sups[k - 1]);
            let change = if last == 0.0 { 0.0 } else { (last - prev).abs() / last.abs() };
            if change < SATURATION_TOLERANCE {
                DecayVerdict::Saturating { relative_change: change }
            } else {
                let rate = (last / prev).ln() / (size(report.boxes[k - 1]) / size(report.boxes[k - 2])).ln();
                DecayVerdict::Growing { relative_change: change, rate }
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRatio {
    pub hs_in: f64,
    pub hs_out: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub trials: Vec<TrialRatio>,
    pub max_ratio: f64,
    /// Schur test over the whole truncation.
    pub schur: SchurReport,
    /// Schur constants over the growing boxes.
    pub box_constants: Vec<((usize, usize), f64)>,
    /// Relative change of the Schur constant between the two largest boxes.
    pub schur_change: f64,
}

impl BoundednessReport {
    /// `max ratio <= C + tol`.
    pub fn dominated(&self, tol: f64) -> bool {
        self.max_ratio <= self.schur.constant + tol
    }

    pub fn schur_stable(&self) -> bool {
        self.schur.constant.is_finite() && self.schur_change <= SATURATION_TOLERANCE
    }
}

/// HS ratios of `Op^A(F)` on random operators against the Schur constant of its
/// flattened super kernel.
pub fn boundedness_experiment(
    a: &VectorPotential,
    f: &DoubleSymbol,
    spec: &Arc<FrameSpec>,
    trials: usize,
    spread: f64,
    boxes: &[(usize, usize)],
    rng: &mut impl Rng,
) -> Result<BoundednessReport> {
    if !f.order().is_nonpositive() {
        return Err(Error::Hypotheses(format!(
            "declared order {:?} is positive; boundedness on Hilbert-Schmidt operators is only established for order <= 0",
            f.order()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let op = SuperOperator::new(a, f, SCHMIDT_TOLERANCE)?;
    let grid = *spec.grid();
    let gs: Vec<OperatorMatrix> = (0..trials).map(|_| random_hs_operator(grid, spread, rng)).collect();
    let results = gs
        .iter()
        .map(|g| {
            let out = op.apply(g)?;
            let (hs_in, hs_out) = (g.hs_norm(), out.hs_norm());
            Ok(TrialRatio { hs_in, hs_out, ratio: hs_out / hs_in })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = results.iter().map(|t| t.ratio).fold(0.0, f64::max);
    let elems = op.matrix_elements(spec)?;
    let all: Vec<usize> = (0..spec.len()).collect();
    let schur = super_schur_bound(&elems, &all)?;
    let box_constants = boxes
        .iter()
        .map(|&(n, k)| Ok(((n, k), super_schur_bound(&elems, &spec.box_indices(n, k))?.constant)))
        .collect::<Result<Vec<_>>>()?;
    let schur_change = match box_constants.len() {
        0 | 1 => 0.0,
        k => {
            let (p, l) = (box_constants[k - 2].1, box_constants[k - 1].1);
            if l == 0.0 {
                0.0
            } else {
                (l - p).abs() / l
            }
        }
    };
    Ok(BoundednessReport { trials: results, max_ratio, schur, box_constants, schur_change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UniformGrid;
    use crate::matrixrep::op_matrix_elements;

    #[test]
    fn schur_examples() {
        let id = Mat::<C64>::identity(4, 4);
        let r = schur_bound(&id).unwrap();
        assert_eq!(r.constant, 1.0);
        assert!((r.norm_estimate - 1.0).abs() < 1e-12);
        let p = Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO });
        let r = schur_bound(&p).unwrap();
        assert_eq!(r.constant, 1.0);
        assert!((r.norm_estimate - 1.0).abs() < 1e-12);
        assert!(schur_bound(&Mat::<C64>::zeros(0, 0)).is_err());
    }

    #[test]
    fn fit_decay_verdicts() {
        let mk = |s: Vec<f64>| DecayReport {
            boxes: vec![(1, 1), (2, 2), (3, 3)],
            rows: vec![DecayRow { weight: WeightTuple::symmetric(0, 0), monotone: true, sups: s }],
        };
        assert!(fit_decay(&mk(vec![2.0, 2.0, 2.0])).unwrap()[0].is_saturating());
        match fit_decay(&mk(vec![1.0, 2.0, 3.0])).unwrap()[0] {
            DecayVerdict::Growing { rate, .. } => assert!((rate - 1.0).abs() < 1e-12),
            v => panic!("{v:?}"),
        }
        let mut short = mk(vec![1.0, 1.0, 1.0]);
        short.boxes.pop();
        assert!(fit_decay(&short).is_err());
    }

    #[test]
    fn structured_schur_matches_dense_flattening() {
        let grid = UniformGrid::new(1, 4.0, 64).unwrap();
        let spec = Arc::new(FrameSpec::new(grid, 2, 2, VectorPotential::zero(1)).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        use rand::SeedableRng;
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| op_matrix_elements(&spec, &random_hs_operator(grid, 0.5, rng)).unwrap();
        let (l1, r1, l2, r2) = (mk(&mut rng), mk(&mut rng), mk(&mut rng), mk(&mut rng));
        let ids = spec.box_indices(1, 1);
        for terms in [vec![(ONE, l1.clone(), r1.clone())], vec![(ONE, l1, r1), (C64::new(0.0, 2.0), l2, r2)]] {
            let f = SuperMatrixElements::product(terms).unwrap();
            let fast = super_schur_bound(&f, &ids).unwrap();
            let slow = super_schur_bound(&f.into_lazy(), &ids).unwrap();
            assert!((fast.constant - slow.constant).abs() < 1e-12 * slow.constant);
            assert!((fast.norm_estimate - slow.norm_estimate).abs() < 1e-8 * slow.norm_estimate);
            assert!(fast.norm_estimate <= fast.constant + 1e-12);
        }
    }

    #[test]
    fn positive_order_is_refused() {
        let grid = UniformGrid::new(1, 4.0, 32).unwrap();
        let spec = Arc::new(FrameSpec::new(grid, 2, 2, VectorPotential::zero(1)).unwrap());
        let f = DoubleSymbol::constant(crate::geometry::PhaseSpaceGrid::new(grid), ONE)
            .with_order(crate::superweyl::DoubleOrder::Single(1.0), 0.0);
        let mut rng = rand::thread_rng();
        let r = boundedness_experiment(&VectorPotential::zero(1), &f, &spec, 1, 0.5, &[], &mut rng);
        assert!(matches!(r, Err(Error::Hypotheses(_))));
    }
}
