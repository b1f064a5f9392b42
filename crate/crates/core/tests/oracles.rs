//! Cross-checks of the fast routes against independent slow oracles.

use std::f64::consts::PI;
use std::sync::Arc;

use magframe::frame::{FrameId, FrameSpec};
use magframe::geometry::{PhasePoint, PhaseSpaceGrid, UniformGrid};
use magframe::magnetics::VectorPotential;
use magframe::matrixrep::{op_matrix_elements, super_expansion, SuperMatrixElements};
use magframe::superweyl::{
    gaussian_bump, liouville_symbol, DirectQuadrature, DirectRoute, DoubleSymbol, SuperOperator, SCHMIDT_TOLERANCE,
};
use magframe::weyl::{quadrature_kernel, quantize, random_hs_operator, random_schwartz_symbol};
use magframe::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

fn id(alpha: i64, k: i64) -> FrameId {
    FrameId::new(vec![alpha], vec![k]).unwrap()
}

#[test]
fn quantized_kernel_matches_direct_momentum_quadrature() {
    let grid = PhaseSpaceGrid::new(UniformGrid::new(1, 8.0, 128).unwrap());
    let mut rng = rng();
    for a in [VectorPotential::zero(1), VectorPotential::constant(&[0.7]).unwrap()] {
        for _ in 0..3 {
            let f = random_schwartz_symbol(grid, 2.0, &mut rng);
            let fast = quantize(&a, &f).unwrap();
            let slow = quadrature_kernel(&a, &f).unwrap();
            let ratio = fast.hs_norm() / f.norm();
            assert!((ratio - (2.0 * PI).powf(-0.5)).abs() < 1e-12, "{ratio}");
            let oracle = slow.hs_norm() / f.norm();
            assert!((oracle - ratio).abs() / ratio < 1e-6, "{oracle} vs {ratio}");
        }
    }
}

#[test]
fn liouville_super_operator_is_the_commutator() {
    let grid = PhaseSpaceGrid::new(UniformGrid::new(1, 6.0, 96).unwrap());
    let mut rng = rng();
    for a in [VectorPotential::zero(1), VectorPotential::constant(&[0.7]).unwrap()] {
        let h = gaussian_bump(grid, &PhasePoint::origin(1), 1.0).scaled(C64::new(1.5, 0.0));
        let op = SuperOperator::new(&a, &liouville_symbol(&h), SCHMIDT_TOLERANCE).unwrap();
        let oph = quantize(&a, &h).unwrap();
        let bound = 2.0 * oph.operator_norm(200);
        for _ in 0..3 {
            let rho = random_hs_operator(*grid.position(), 1.0, &mut rng);
            let lhs = op.apply(&rho).unwrap();
            let comm = oph.compose(&rho).unwrap().axpy(C64::new(-1.0, 0.0), &rho.compose(&oph).unwrap()).unwrap();
            let residual = lhs.axpy(C64::new(0.0, 1.0), &comm).unwrap().hs_norm() / rho.hs_norm();
            assert!(residual < 1e-10, "{residual}");
            assert!(lhs.hs_norm() <= bound * rho.hs_norm() * (1.0 + 1e-6));
        }
    }
}

#[test]
fn frame_expansion_reproduces_super_action() {
    let g = UniformGrid::new(1, 5.0, 256).unwrap();
    let grid = PhaseSpaceGrid::new(g);
    let a = VectorPotential::constant(&[0.3]).unwrap();
    let spec = Arc::new(FrameSpec::new(g, 4, 64, a.clone()).unwrap());
    let left = gaussian_bump(grid, &PhasePoint::new(vec![0.3], vec![0.0]).unwrap(), 1.0);
    let right = gaussian_bump(grid, &PhasePoint::origin(1), 1.0);
    let f = DoubleSymbol::product(left, right).unwrap();
    let op = SuperOperator::new(&a, &f, SCHMIDT_TOLERANCE).unwrap();
    let rho = random_hs_operator(g, 0.3, &mut rng());
    let exact = op.apply(&rho).unwrap();
    let expanded = super_expansion(&op.matrix_elements(&spec).unwrap(), &op_matrix_elements(&spec, &rho).unwrap()).unwrap();
    let err = expanded.rel_hs_distance(&exact).unwrap();
    assert!(err < 1e-5, "{err}");
}

#[test]
fn direct_route_of_constant_symbol_is_gram_product() {
    let g = UniformGrid::new(1, 10.0, 160).unwrap();
    let grid = PhaseSpaceGrid::new(g);
    let spec = Arc::new(FrameSpec::new(g, 2, 4, VectorPotential::zero(1)).unwrap());
    let one = DoubleSymbol::constant(grid, C64::new(1.0, 0.0));
    let route = DirectRoute::new(&one, DirectQuadrature { half_width: 6.0, points: 48 }).unwrap();
    let reference = SuperMatrixElements::identity(&spec).unwrap();
    for ids in [
        [id(0, 0), id(0, 0), id(0, 0), id(0, 0)],
        [id(0, 1), id(1, 1), id(-1, 0), id(-1, 0)],
        [id(1, -1), id(1, -1), id(0, 2), id(1, 2)],
    ] {
        let direct = route.element(&spec, &ids).unwrap();
        let exact = reference.element_ids(&ids).unwrap();
        let scale = reference.element_ids(&[id(0, 0), id(0, 0), id(0, 0), id(0, 0)]).unwrap().norm();
        assert!((direct - exact).norm() < 1e-3 * scale, "{direct} vs {exact}");
    }
}
