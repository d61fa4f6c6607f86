use nalgebra::DVector;

use super::EdgeRule;
use crate::{Error, Result};

/// Orthonormal polynomial basis of P_k on one physical edge.
///
/// Functions are scaled shifted Legendre polynomials in the arclength
/// parameter s ∈ [0, 1] running along the edge's canonical direction, so
/// ∫_e φ_i φ_j dℓ = δ_ij and the basis is single-valued regardless of which
/// side the edge is seen from.
#[derive(Debug, Clone)]
pub struct EdgeBasis {
    degree: usize,
    a: [f64; 2],
    b: [f64; 2],
    len: f64,
}

impl EdgeBasis {
    /// `a` → `b` must be the edge's canonical direction.
    pub fn new(a: [f64; 2], b: [f64; 2], degree: usize) -> Result<Self> {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        if len <= 0.0 {
            return Err(Error::DegenerateElement("zero-length edge".into()));
        }
        Ok(Self { degree, a, b, len })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical point at arclength parameter s ∈ [0, 1].
    pub fn point(&self, s: f64) -> [f64; 2] {
        [
            self.a[0] + (self.b[0] - self.a[0]) * s,
            self.a[1] + (self.b[1] - self.a[1]) * s,
        ]
    }

    /// Unit tangent along the canonical direction.
    pub fn tangent(&self) -> [f64; 2] {
        [(self.b[0] - self.a[0]) / self.len, (self.b[1] - self.a[1]) / self.len]
    }

    /// Canonical unit normal: tangent rotated clockwise.
    pub fn normal(&self) -> [f64; 2] {
        let t = self.tangent();
        [t[1], -t[0]]
    }

    /// Values of all basis functions at arclength parameter s.
    pub fn eval(&self, s: f64) -> DVector<f64> {
        let x = 2.0 * s - 1.0;
        let mut v = DVector::zeros(self.dim());
        let mut p_prev = 0.0;
        let mut p = 1.0;
        for j in 0..=self.degree {
            v[j] = ((2 * j + 1) as f64 / self.len).sqrt() * p;
            let jf = j as f64;
            let p_next = ((2.0 * jf + 1.0) * x * p - jf * p_prev) / (jf + 1.0);
            p_prev = p;
            p = p_next;
        }
        v
    }
}

/// L² projection of `f` (given in physical coordinates) onto the edge basis.
pub fn project_edge(
    mut f: impl FnMut([f64; 2]) -> f64,
    basis: &EdgeBasis,
    rule: &EdgeRule,
) -> DVector<f64> {
    let mut c = DVector::zeros(basis.dim());
    for (&s, &w) in rule.points().iter().zip(rule.weights()) {
        c.axpy(w * basis.len() * f(basis.point(s)), &basis.eval(s), 1.0);
    }
    c
}

/// Componentwise projection of a vector field onto the edge basis.
pub fn project_edge_vector(
    mut f: impl FnMut([f64; 2]) -> [f64; 2],
    basis: &EdgeBasis,
    rule: &EdgeRule,
) -> [DVector<f64>; 2] {
    let mut cx = DVector::zeros(basis.dim());
    let mut cy = DVector::zeros(basis.dim());
    for (&s, &w) in rule.points().iter().zip(rule.weights()) {
        let v = f(basis.point(s));
        let phi = basis.eval(s);
        cx.axpy(w * basis.len() * v[0], &phi, 1.0);
        cy.axpy(w * basis.len() * v[1], &phi, 1.0);
    }
    [cx, cy]
}
