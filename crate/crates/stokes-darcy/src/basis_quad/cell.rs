use nalgebra::{DMatrix, DVector};

use super::QuadRule;
use crate::{Error, Result};

/// Orthonormal polynomial basis of P_k on one physical triangle.
///
/// Monomials in diameter-scaled, centroid-centered coordinates are
/// orthonormalized against the exact element mass matrix (Cholesky), so the
/// local mass matrix of the basis is the identity up to round-off and L²
/// projections reduce to moment evaluations.
#[derive(Debug, Clone)]
pub struct CellBasis {
    degree: usize,
    exps: Vec<(u32, u32)>,
    /// coeff[(i, j)] = coefficient of scaled monomial j in basis function i.
    coeff: DMatrix<f64>,
    cx: f64,
    cy: f64,
    h: f64,
}

/// Dimension of P_k on a triangle.
pub fn poly_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Monomial exponents of P_k in graded order.
fn graded_exponents(degree: usize) -> Vec<(u32, u32)> {
    let mut exps = Vec::with_capacity(poly_dim(degree));
    for d in 0..=degree as u32 {
        for q in 0..=d {
            exps.push((d - q, q));
        }
    }
    exps
}

impl CellBasis {
    /// Build the basis on the triangle `tri`. `rule` must be exact to degree 2k.
    pub fn new(tri: &[[f64; 2]; 3], degree: usize, rule: &QuadRule) -> Result<Self> {
        assert!(rule.exactness() >= 2 * degree, "mass-matrix rule too weak");
        let area2 = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
            - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
        let h = diameter(tri);
        if area2.abs() <= 1e-14 * h * h {
            return Err(Error::DegenerateElement(format!(
                "triangle with vertices {tri:?} has near-zero area"
            )));
        }
        let exps = graded_exponents(degree);
        let dim = exps.len();
        let cx = (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0;
        let cy = (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0;

        let (pts, wts) = rule.mapped(tri);
        let mut vals = DMatrix::<f64>::zeros(dim, pts.len());
        for (q, &[x, y]) in pts.iter().enumerate() {
            let xi = (x - cx) / h;
            let eta = (y - cy) / h;
            for (i, &(p, r)) in exps.iter().enumerate() {
                vals[(i, q)] = xi.powi(p as i32) * eta.powi(r as i32);
            }
        }
        let mut gram = DMatrix::<f64>::zeros(dim, dim);
        for q in 0..pts.len() {
            let col = vals.column(q).clone_owned();
            gram.ger(wts[q], &col, &col, 1.0);
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::DegenerateElement("singular element mass matrix".into()))?;
        let l = chol.l();
        let coeff = l
            .solve_lower_triangular(&DMatrix::identity(dim, dim))
            .expect("triangular solve after successful Cholesky");

        Ok(Self {
            degree,
            exps,
            coeff,
            cx,
            cy,
            h,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Values of all basis functions at a physical point.
    pub fn eval(&self, p: [f64; 2]) -> DVector<f64> {
        let m = self.monomials(p);
        &self.coeff * m
    }

    /// (∂/∂x, ∂/∂y) of all basis functions at a physical point.
    pub fn eval_grad(&self, p: [f64; 2]) -> (DVector<f64>, DVector<f64>) {
        let xi = (p[0] - self.cx) / self.h;
        let eta = (p[1] - self.cy) / self.h;
        let dim = self.dim();
        let mut dx = DVector::zeros(dim);
        let mut dy = DVector::zeros(dim);
        for (j, &(p, r)) in self.exps.iter().enumerate() {
            let (p, r) = (p as i32, r as i32);
            if p > 0 {
                dx[j] = p as f64 * xi.powi(p - 1) * eta.powi(r) / self.h;
            }
            if r > 0 {
                dy[j] = r as f64 * xi.powi(p) * eta.powi(r - 1) / self.h;
            }
        }
        (&self.coeff * dx, &self.coeff * dy)
    }

    /// Basis values at many points, as a dim × npts matrix.
    pub fn values(&self, pts: &[[f64; 2]]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), pts.len());
        for (q, &p) in pts.iter().enumerate() {
            m.set_column(q, &self.eval(p));
        }
        m
    }

    fn monomials(&self, p: [f64; 2]) -> DVector<f64> {
        let xi = (p[0] - self.cx) / self.h;
        let eta = (p[1] - self.cy) / self.h;
        DVector::from_iterator(
            self.dim(),
            self.exps
                .iter()
                .map(|&(p, r)| xi.powi(p as i32) * eta.powi(r as i32)),
        )
    }
}

fn diameter(tri: &[[f64; 2]; 3]) -> f64 {
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    d(tri[0], tri[1]).max(d(tri[1], tri[2])).max(d(tri[2], tri[0]))
}

/// L² projection of `f` onto the basis: with an orthonormal basis the
/// coefficients are plain moments. `pts`/`wts` must be a rule on the same
/// triangle, exact to degree ≥ 2k (plus the degree of `f` if polynomial).
pub fn project_cell(
    mut f: impl FnMut([f64; 2]) -> f64,
    basis: &CellBasis,
    pts: &[[f64; 2]],
    wts: &[f64],
) -> DVector<f64> {
    let mut c = DVector::zeros(basis.dim());
    for (&p, &w) in pts.iter().zip(wts) {
        c.axpy(w * f(p), &basis.eval(p), 1.0);
    }
    c
}

/// Componentwise projection of a vector field.
pub fn project_cell_vector(
    mut f: impl FnMut([f64; 2]) -> [f64; 2],
    basis: &CellBasis,
    pts: &[[f64; 2]],
    wts: &[f64],
) -> [DVector<f64>; 2] {
    let mut cx = DVector::zeros(basis.dim());
    let mut cy = DVector::zeros(basis.dim());
    for (&p, &w) in pts.iter().zip(wts) {
        let v = f(p);
        let phi = basis.eval(p);
        cx.axpy(w * v[0], &phi, 1.0);
        cy.axpy(w * v[1], &phi, 1.0);
    }
    [cx, cy]
}
