//! Polynomial vector potentials, magnetic fields, line-integral phases and
//! gauge transformations.
//!
//! Polynomials are stored as dense coefficient lists in graded lexicographic
//! monomial order: by total degree first, and within one degree by descending
//! power of `x_1`. For `d = 2` this reads `1, x1, x2, x1^2, x1 x2, x2^2, ...`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::check_dim;

/// Maximal total degree of a vector-potential component.
pub const MAX_POTENTIAL_DEGREE: usize = 8;

/// Exponent vectors of all monomials of total degree `<= degree`, graded lex.
pub fn monomials(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=degree as u32 {
        match dim {
            1 => out.push(vec![deg]),
            _ => {
                for j in 0..=deg {
                    out.push(vec![deg - j, j]);
                }
            }
        }
    }
    out
}

fn monomial_count(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        _ => (degree + 1) * (degree + 2) / 2,
    }
}

/// Real polynomial in `d` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: usize,
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from graded-lex coefficients; missing trailing
    /// coefficients of the last degree are treated as zero.
    pub fn new(dim: usize, mut coeffs: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        let mut degree = 0;
        while monomial_count(dim, degree) < coeffs.len() {
            degree += 1;
        }
        coeffs.resize(monomial_count(dim, degree), 0.0);
        Ok(Self { dim, coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: vec![0.0] }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self { dim, coeffs: vec![c] }
    }

    /// The coordinate function `x_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut coeffs = vec![0.0; monomial_count(dim, 1)];
        coeffs[1 + axis] = 1.0;
        Self { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn storage_degree(&self) -> usize {
        let mut deg = 0;
        while monomial_count(self.dim, deg) < self.coeffs.len() {
            deg += 1;
        }
        deg
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        let monos = monomials(self.dim, self.storage_degree());
        monos
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, _)| m.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let monos = monomials(self.dim, self.storage_degree());
        monos
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| c * m.iter().zip(x).map(|(e, v)| v.powi(*e as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, axis: usize) -> Polynomial {
        let deg = self.storage_degree();
        let monos = monomials(self.dim, deg);
        let target = monomials(self.dim, deg.saturating_sub(1));
        let mut coeffs = vec![0.0; target.len()];
        for (m, c) in monos.iter().zip(&self.coeffs) {
            if *c == 0.0 || m[axis] == 0 {
                continue;
            }
            let mut e = m.clone();
            e[axis] -= 1;
            let pos = target.iter().position(|t| *t == e).expect("lower-degree monomial exists");
            coeffs[pos] += c * m[axis] as f64;
        }
        Polynomial { dim: self.dim, coeffs }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + other.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Ok(Polynomial { dim: self.dim, coeffs })
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        Polynomial { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

/// Vector potential `A = (A_1, ..., A_d)` with polynomial components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorPotential {
    components: Vec<Polynomial>,
}

impl VectorPotential {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let dim = components.len();
        check_dim(dim)?;
        for c in &components {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
            }
            if c.degree() > MAX_POTENTIAL_DEGREE {
                return Err(Error::InvalidPolynomial(format!(
                    "component degree {} exceeds {MAX_POTENTIAL_DEGREE}",
                    c.degree()
                )));
            }
        }
        Ok(Self { components })
    }

    /// Builds a potential from graded-lex coefficient lists, one per component.
    pub fn from_coefficients(dim: usize, coeffs: &[Vec<f64>]) -> Result<Self> {
        if coeffs.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: coeffs.len() });
        }
        let comps = coeffs.iter().map(|c| Polynomial::new(dim, c.clone())).collect::<Result<_>>()?;
        Self::new(comps)
    }

    pub fn zero(dim: usize) -> Self {
        Self { components: (0..dim).map(|_| Polynomial::zero(dim)).collect() }
    }

    pub fn constant(a: &[f64]) -> Result<Self> {
        let dim = a.len();
        Self::new(a.iter().map(|v| Polynomial::constant(dim, *v)).collect())
    }

    /// Symmetric gauge `A = (-b x_2 / 2, b x_1 / 2)` of the constant field `B_12 = b`.
    pub fn symmetric_gauge(b: f64) -> Self {
        Self {
            components: vec![
                Polynomial::coordinate(2, 1).scaled(-0.5 * b),
                Polynomial::coordinate(2, 0).scaled(0.5 * b),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn degree(&self) -> usize {
        self.components.iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }
}

/// Antisymmetric matrix of polynomials `B_jk = d_j A_k - d_k A_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticField {
    dim: usize,
    components: Vec<Vec<Polynomial>>,
}

impl MagneticField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, j: usize, k: usize) -> &Polynomial {
        &self.components[j][k]
    }

    pub fn eval(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.components.iter().map(|row| row.iter().map(|p| p.eval(x)).collect()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().all(|p| p.is_zero())
    }
}

/// Exterior derivative of the potential, by exact polynomial differentiation.
pub fn field_from_potential(a: &VectorPotential) -> MagneticField {
    let dim = a.dim();
    let comps = a.components();
    let components = (0..dim)
        .map(|j| {
            (0..dim)
                .map(|k| {
                    comps[k]
                        .derivative(j)
                        .sub(&comps[j].derivative(k))
                        .expect("components share the dimension")
                })
                .collect()
        })
        .collect();
    MagneticField { dim, components }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Line-integral phase evaluator with Gauss-Legendre nodes sized to the potential.
#[derive(Debug, Clone)]
pub struct Circulation {
    potential: VectorPotential,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // Nonzero monomials per component: (coefficient, exponents).
    terms: Vec<Vec<(f64, [i32; 2])>>,
}

impl Circulation {
    pub fn new(a: &VectorPotential) -> Self {
        let deg = a.degree();
        // ceil((D+1)/2) + 1 nodes integrate degree D exactly.
        let n = (deg + 2) / 2 + 1;
        let (nodes, weights) = gauss_legendre(n);
        let terms = a
            .components()
            .iter()
            .map(|p| {
                monomials(p.dim, p.storage_degree())
                    .iter()
                    .zip(&p.coeffs)
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(m, c)| (*c, [m[0] as i32, *m.get(1).unwrap_or(&0) as i32]))
                    .collect()
            })
            .collect();
        Self { potential: a.clone(), nodes, weights, terms }
    }

    pub fn potential(&self) -> &VectorPotential {
        &self.potential
    }

    /// `int_{[x,y]} A`.
    pub fn line_integral(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = x.len();
        let mut total = 0.0;
        for (s, w) in self.nodes.iter().zip(&self.weights) {
            let p0 = x[0] + s * (y[0] - x[0]);
            let p1 = if d > 1 { x[1] + s * (y[1] - x[1]) } else { 0.0 };
            let mut dot = 0.0;
            for (k, comp) in self.terms.iter().enumerate() {
                let v: f64 = comp.iter().map(|(c, e)| c * p0.powi(e[0]) * p1.powi(e[1])).sum();
                dot += v * (y[k] - x[k]);
            }
            total += w * dot;
        }
        total
    }

    /// `Lambda^A(x, y) = exp(-i int_{[x,y]} A)`, unit modulus.
    pub fn phase(&self, x: &[f64], y: &[f64]) -> C64 {
        let t = self.line_integral(x, y);
        C64::new(t.cos(), -t.sin())
    }
}

/// `Lambda^A(x, y) = exp(-i int_{[x,y]} A)`.
pub fn circulation(a: &VectorPotential, x: &[f64], y: &[f64]) -> Result<C64> {
    if x.len() != a.dim() || y.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: x.len().min(y.len()) });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite endpoint".into()));
    }
    Ok(Circulation::new(a).phase(x, y))
}

/// A real polynomial gauge function `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeFunction(pub Polynomial);

impl GaugeFunction {
    pub fn new(p: Polynomial) -> Result<Self> {
        if p.degree() > MAX_POTENTIAL_DEGREE + 1 {
            return Err(Error::InvalidPolynomial(format!(
                "gauge degree {} exceeds {}",
                p.degree(),
                MAX_POTENTIAL_DEGREE + 1
            )));
        }
        Ok(Self(p))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.eval(x)
    }
}

/// `A + grad phi`.
pub fn gauge_shift(a: &VectorPotential, phi: &GaugeFunction) -> Result<VectorPotential> {
    if a.dim() != phi.0.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: phi.0.dim() });
    }
    let comps = a
        .components()
        .iter()
        .enumerate()
        .map(|(k, c)| c.add(&phi.0.derivative(k)))
        .collect::<Result<Vec<_>>>()?;
    VectorPotential::new(comps)
}
