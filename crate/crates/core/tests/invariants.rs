//! Property tests for structural invariants that must hold on every grid.

use std::f64::consts::PI;

use faer::Mat;
use magframe::bounds::schur_bound;
use magframe::geometry::{symplectic_form, PhasePoint, PhaseSpaceGrid, SampledField, UniformGrid};
use magframe::magnetics::{circulation, VectorPotential};
use magframe::weyl::{dequantize, quantize, Symbol};
use magframe::C64;
use proptest::prelude::*;

fn grid() -> PhaseSpaceGrid {
    PhaseSpaceGrid::new(UniformGrid::new(1, 4.0, 32).unwrap())
}

fn samples(grid: PhaseSpaceGrid, re: &[f64], im: &[f64]) -> Symbol {
    let data = re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect();
    Symbol::from_samples(SampledField::new(grid, data).unwrap()).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 32 * 32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn symplectic_form_is_antisymmetric_and_bilinear(
        v in prop::collection::vec(-5.0..5.0f64, 12),
        s in -3.0..3.0f64,
    ) {
        let p = |o: usize| PhasePoint::new(v[o..o + 2].to_vec(), v[o + 2..o + 4].to_vec()).unwrap();
        let (a, b, c) = (p(0), p(4), p(8));
        let ab = symplectic_form(&a, &b).unwrap();
        prop_assert!((ab + symplectic_form(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert_eq!(symplectic_form(&a, &a).unwrap(), 0.0);
        let sum: Vec<f64> = v[0..4].iter().zip(&v[8..12]).map(|(x, y)| s * x + y).collect();
        let ac = PhasePoint::new(sum[..2].to_vec(), sum[2..].to_vec()).unwrap();
        let lhs = symplectic_form(&ac, &b).unwrap();
        let rhs = s * ab + symplectic_form(&c, &b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn quantization_is_linear(re1 in coeffs(), im1 in coeffs(), re2 in coeffs(), s in -2.0..2.0f64, a0 in -1.0..1.0f64) {
        let g = grid();
        let a = VectorPotential::constant(&[a0]).unwrap();
        let f = samples(g, &re1, &im1);
        let h = samples(g, &re2, &im1);
        let c = C64::new(s, 0.5);
        let combo = Symbol::from_samples(f.samples().axpy(c, h.samples()).unwrap()).unwrap();
        let lhs = quantize(&a, &combo).unwrap();
        let rhs = quantize(&a, &f).unwrap().axpy(c, &quantize(&a, &h).unwrap()).unwrap();
        prop_assert!(lhs.rel_hs_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn hs_ratio_is_the_same_for_every_symbol(re in coeffs(), im in coeffs(), a0 in -1.0..1.0f64) {
        let a = VectorPotential::constant(&[a0]).unwrap();
        let f = samples(grid(), &re, &im);
        let op = quantize(&a, &f).unwrap();
        let ratio = op.hs_norm() / f.norm();
        prop_assert!((ratio - (2.0 * PI).powf(-0.5)).abs() < 1e-12);
        let back = dequantize(&a, &op).unwrap();
        prop_assert!(back.samples().rel_distance(f.samples()).unwrap() < 1e-12);
    }

    #[test]
    fn circulation_is_unimodular_and_reverses(
        c in prop::collection::vec(-1.0..1.0f64, 12),
        p in prop::collection::vec(-3.0..3.0f64, 4),
    ) {
        // Degree-2 potential in two dimensions.
        let a = VectorPotential::from_coefficients(2, &[c[..6].to_vec(), c[6..].to_vec()]).unwrap();
        let (x, y) = (&p[..2], &p[2..]);
        let xy = circulation(&a, x, y).unwrap();
        let yx = circulation(&a, y, x).unwrap();
        prop_assert!((xy.norm() - 1.0).abs() < 1e-12);
        prop_assert!((xy * yx - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn schur_constant_dominates_norm(n in 2usize..30, seed in prop::collection::vec(0.0..1.0f64, 900)) {
        let m = Mat::from_fn(n, n, |i, j| C64::new(seed[i * 30 + j], 0.0));
        let r = schur_bound(&m).unwrap();
        prop_assert!(r.norm_estimate <= r.constant * (1.0 + 1e-9));
        prop_assert!(r.constant <= r.row_sup.max(r.col_sup) + 1e-12);
    }
}
