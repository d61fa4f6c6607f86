//! BDM mixed elements for the porous region.
//!
//! Velocities are full vector polynomials of degree k per triangle, glued into
//! H(div) by normal-moment edge DOFs taken against the canonical edge normal,
//! so shared DOFs are single-valued without per-element sign flips. Interior
//! DOFs for k ≥ 2 are the usual gradient and bubble-curl moments; the dual
//! basis is produced by inverting the DOF matrix over an orthonormal raw
//! basis, which reduces mass matrices and L² norms to coefficient algebra.

use nalgebra::{DMatrix, DVector};

use crate::basis_quad::{CellBasis, EdgeBasis, Rules};
use crate::mesh::{EdgeTag, Mesh, Region};
use crate::wg_stokes::DegreeProfile;
use crate::{Error, Result};

/// Global H(div) coefficients: per Darcy-side edge the k+1 normal moments
/// (single-valued), per Darcy triangle the k² − 1 interior DOFs.
#[derive(Debug, Clone)]
pub struct DivField {
    /// Darcy triangle ids, ascending.
    pub tris: Vec<usize>,
    /// Darcy-side edge ids (interior, Γ_d, interface), ascending.
    pub edges: Vec<usize>,
    pub edge: Vec<DVector<f64>>,
    pub interior: Vec<DVector<f64>>,
    /// True for Γ_d edges, whose moments hold prescribed normal-flux data.
    pub flux_bc: Vec<bool>,
}

impl DivField {
    pub fn zero(mesh: &Mesh, profile: &DegreeProfile) -> Self {
        let k = profile.alpha_d;
        let tris: Vec<usize> = mesh.tris_in(Region::Darcy).collect();
        let edges = mesh.darcy_side_edges();
        let edge = vec![DVector::zeros(k + 1); edges.len()];
        let interior = vec![DVector::zeros(k * k - 1); tris.len()];
        let flux_bc = edges
            .iter()
            .map(|&e| mesh.edges[e].tag == EdgeTag::GammaD)
            .collect();
        Self {
            tris,
            edges,
            edge,
            interior,
            flux_bc,
        }
    }

    pub fn tri_slot(&self, tri: usize) -> Option<usize> {
        self.tris.binary_search(&tri).ok()
    }

    pub fn edge_slot(&self, edge: usize) -> Option<usize> {
        self.edges.binary_search(&edge).ok()
    }

    /// Local DOF vector of one element: three edge blocks in local edge order,
    /// then the interior block.
    pub fn local_coeffs(&self, mesh: &Mesh, elem: &BdmElement) -> DVector<f64> {
        let ne = elem.n_edge_scalar();
        let mut v = DVector::zeros(elem.n_dofs());
        for j in 0..3 {
            let slot = self
                .edge_slot(mesh.tri_edges[elem.tri][j])
                .expect("field covers element edges");
            v.rows_mut(j * ne, ne).copy_from(&self.edge[slot]);
        }
        let slot = self.tri_slot(elem.tri).expect("field covers element");
        v.rows_mut(3 * ne, elem.n_interior()).copy_from(&self.interior[slot]);
        v
    }
}

/// One BDM triangle of degree k = α_d with its dual basis and local blocks.
#[derive(Debug, Clone)]
pub struct BdmElement {
    pub tri: usize,
    pub degree: usize,
    /// Orthonormal scalar P_k basis; raw vector basis is (φ_i, 0) ∪ (0, φ_i).
    pub scalar: CellBasis,
    /// Orthonormal P_{γ_d} pressure basis.
    pub pressure: CellBasis,
    pub edges: [EdgeBasis; 3],
    /// Dual basis in raw coordinates: column i is DOF i's basis function.
    coeffs: DMatrix<f64>,
    /// (𝕂⁻¹ u, v)_T in DOF coordinates.
    a_d: DMatrix<f64>,
    /// DOFs → divergence coefficients in the pressure basis.
    divmap: DMatrix<f64>,
    /// Max-norm residual of the DOF/dual-basis duality check.
    pub unisolvence_residual: f64,
}

impl BdmElement {
    pub fn new(
        mesh: &Mesh,
        t: usize,
        profile: &DegreeProfile,
        kappa: f64,
        rules: &Rules,
    ) -> Result<Self> {
        let k = profile.alpha_d;
        if k < 1 {
            return Err(Error::UnsupportedDegree {
                requested: k,
                min: 1,
                max: crate::wg_stokes::MAX_DEGREE,
            });
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "permeability must be positive and finite, got {kappa}"
            )));
        }
        let tri = mesh.tri_vertices(t);
        let scalar = CellBasis::new(&tri, k, &rules.cell)?;
        let pressure = CellBasis::new(&tri, profile.gamma_d, &rules.cell)?;
        let mut edge_bases = Vec::with_capacity(3);
        for j in 0..3 {
            let (a, b) = mesh.edge_endpoints(mesh.tri_edges[t][j]);
            edge_bases.push(EdgeBasis::new(a, b, k)?);
        }
        let edges: [EdgeBasis; 3] = edge_bases.try_into().expect("three edges");

        let npk = scalar.dim();
        let ndof = 2 * npk;
        let ne = k + 1;
        debug_assert_eq!(ndof, 3 * ne + (k * k - 1));

        // DOF matrix over the raw basis: rows are functionals, columns raw
        // coefficients (x block then y block)
        let mut m = DMatrix::<f64>::zeros(ndof, ndof);
        for (j, eb) in edges.iter().enumerate() {
            let n_e = eb.normal();
            for (&s, &w) in rules.edge.points().iter().zip(rules.edge.weights()) {
                let w = w * eb.len();
                let e_hat = eb.eval(s);
                let phi = scalar.eval(eb.point(s));
                for i in 0..ne {
                    let row = j * ne + i;
                    let c = w * e_hat[i];
                    for p in 0..npk {
                        m[(row, p)] += c * phi[p] * n_e[0];
                        m[(row, npk + p)] += c * phi[p] * n_e[1];
                    }
                }
            }
        }
        if k >= 2 {
            let grad_space = CellBasis::new(&tri, k - 1, &rules.cell)?;
            let curl_space = CellBasis::new(&tri, k - 2, &rules.cell)?;
            let bubble = Bubble::new(&tri);
            let (qp, qw) = rules.cell.mapped(&tri);
            let n_grad = grad_space.dim() - 1;
            for (q, &p) in qp.iter().enumerate() {
                let w = qw[q];
                let phi = scalar.eval(p);
                let (gx, gy) = grad_space.eval_grad(p);
                let (b, bx, by) = bubble.eval(p);
                let r = curl_space.eval(p);
                let (rx, ry) = curl_space.eval_grad(p);
                for i in 0..n_grad {
                    let row = 3 * ne + i;
                    for pp in 0..npk {
                        m[(row, pp)] += w * phi[pp] * gx[i + 1];
                        m[(row, npk + pp)] += w * phi[pp] * gy[i + 1];
                    }
                }
                for i in 0..curl_space.dim() {
                    let row = 3 * ne + n_grad + i;
                    // curl(b r) = (∂_y(b r), −∂_x(b r))
                    let cx = b * ry[i] + r[i] * by;
                    let cy = -(b * rx[i] + r[i] * bx);
                    for pp in 0..npk {
                        m[(row, pp)] += w * phi[pp] * cx;
                        m[(row, npk + pp)] += w * phi[pp] * cy;
                    }
                }
            }
        }

        let coeffs = m.clone().full_piv_lu().solve(&DMatrix::identity(ndof, ndof)).ok_or_else(
            || {
                Error::DegenerateElement(format!(
                    "BDM_{k} DOF set is not unisolvent on triangle {t}"
                ))
            },
        )?;
        let unisolvence_residual = (&m * &coeffs - DMatrix::<f64>::identity(ndof, ndof))
            .amax();

        let a_d = coeffs.tr_mul(&coeffs) / kappa;

        // divergence of the raw basis in the pressure basis, plus a Parseval
        // check that no divergence mass escapes P_{γ_d}
        let (qp, qw) = rules.cell.mapped(&tri);
        let npp = pressure.dim();
        let mut draw = DMatrix::<f64>::zeros(npp, ndof);
        let mut gdiv = DMatrix::<f64>::zeros(ndof, ndof);
        for (q, &p) in qp.iter().enumerate() {
            let w = qw[q];
            let (dx, dy) = scalar.eval_grad(p);
            let zeta = pressure.eval(p);
            for i in 0..npk {
                for mm in 0..npp {
                    draw[(mm, i)] += w * zeta[mm] * dx[i];
                    draw[(mm, npk + i)] += w * zeta[mm] * dy[i];
                }
                for i2 in 0..npk {
                    gdiv[(i, i2)] += w * dx[i] * dx[i2];
                    gdiv[(i, npk + i2)] += w * dx[i] * dy[i2];
                    gdiv[(npk + i, i2)] += w * dy[i] * dx[i2];
                    gdiv[(npk + i, npk + i2)] += w * dy[i] * dy[i2];
                }
            }
        }
        let leak = (&gdiv - draw.tr_mul(&draw)).amax();
        if leak > 1e-9 * (1.0 + gdiv.amax()) {
            return Err(Error::InvalidProfile(format!(
                "divergence of the BDM_{k} space escapes the degree-{} pressure space",
                profile.gamma_d
            )));
        }
        let divmap = &draw * &coeffs;

        Ok(Self {
            tri: t,
            degree: k,
            scalar,
            pressure,
            edges,
            coeffs,
            a_d,
            divmap,
            unisolvence_residual,
        })
    }

    pub fn n_edge_scalar(&self) -> usize {
        self.degree + 1
    }

    pub fn n_interior(&self) -> usize {
        self.degree * self.degree - 1
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.scalar.dim()
    }

    pub fn edge_dof(&self, local_edge: usize, i: usize) -> usize {
        local_edge * self.n_edge_scalar() + i
    }

    pub fn interior_dof(&self, i: usize) -> usize {
        3 * self.n_edge_scalar() + i
    }

    /// (𝕂⁻¹ u, v)_T in DOF coordinates.
    pub fn mass(&self) -> &DMatrix<f64> {
        &self.a_d
    }

    /// DOFs → divergence coefficients in the orthonormal pressure basis.
    pub fn divergence(&self) -> &DMatrix<f64> {
        &self.divmap
    }

    /// (A_d, B_d) with b_d(v, q) = −(∇·v, q)_T.
    pub fn local_darcy_blocks(&self) -> (&DMatrix<f64>, DMatrix<f64>) {
        (&self.a_d, -&self.divmap)
    }

    /// Raw (componentwise orthonormal) coefficients of a DOF vector.
    pub fn raw_coeffs(&self, dofs: &DVector<f64>) -> DVector<f64> {
        &self.coeffs * dofs
    }

    /// Velocity value at a physical point.
    pub fn eval(&self, dofs: &DVector<f64>, p: [f64; 2]) -> [f64; 2] {
        let raw = self.raw_coeffs(dofs);
        let phi = self.scalar.eval(p);
        let npk = self.scalar.dim();
        let mut v = [0.0; 2];
        for i in 0..npk {
            v[0] += raw[i] * phi[i];
            v[1] += raw[npk + i] * phi[i];
        }
        v
    }

    /// All DOF functionals applied to a smooth field: the local BDM
    /// interpolant Π of `f`.
    pub fn interpolate(
        &self,
        mesh: &Mesh,
        rules: &Rules,
        mut f: impl FnMut([f64; 2]) -> [f64; 2],
    ) -> DVector<f64> {
        let ne = self.n_edge_scalar();
        let mut dofs = DVector::zeros(self.n_dofs());
        for (j, eb) in self.edges.iter().enumerate() {
            let mom = edge_normal_moments(eb, &rules.edge_fine, &mut f);
            dofs.rows_mut(j * ne, ne).copy_from(&mom);
        }
        let k = self.degree;
        if k >= 2 {
            let tri = mesh.tri_vertices(self.tri);
            let grad_space = CellBasis::new(&tri, k - 1, &rules.cell).expect("valid element");
            let curl_space = CellBasis::new(&tri, k - 2, &rules.cell).expect("valid element");
            let bubble = Bubble::new(&tri);
            let (qp, qw) = rules.cell_fine.mapped(&tri);
            let n_grad = grad_space.dim() - 1;
            for (q, &p) in qp.iter().enumerate() {
                let w = qw[q];
                let v = f(p);
                let (gx, gy) = grad_space.eval_grad(p);
                let (b, bx, by) = bubble.eval(p);
                let r = curl_space.eval(p);
                let (rx, ry) = curl_space.eval_grad(p);
                for i in 0..n_grad {
                    dofs[self.interior_dof(i)] += w * (v[0] * gx[i + 1] + v[1] * gy[i + 1]);
                }
                for i in 0..curl_space.dim() {
                    let cx = b * ry[i] + r[i] * by;
                    let cy = -(b * rx[i] + r[i] * bx);
                    dofs[self.interior_dof(n_grad + i)] += w * (v[0] * cx + v[1] * cy);
                }
            }
        }
        dofs
    }
}

/// Normal moments ∫_e (f·n_e) ê_i dℓ against the canonical edge normal.
pub fn edge_normal_moments(
    eb: &EdgeBasis,
    rule: &crate::basis_quad::EdgeRule,
    mut f: impl FnMut([f64; 2]) -> [f64; 2],
) -> DVector<f64> {
    let n_e = eb.normal();
    let mut mom = DVector::zeros(eb.dim());
    for (&s, &w) in rule.points().iter().zip(rule.weights()) {
        let v = f(eb.point(s));
        let vn = v[0] * n_e[0] + v[1] * n_e[1];
        mom.axpy(w * eb.len() * vn, &eb.eval(s), 1.0);
    }
    mom
}

/// Elements for every Darcy triangle, in ascending triangle order.
pub fn build_darcy_elements(
    mesh: &Mesh,
    profile: &DegreeProfile,
    kappa: f64,
    rules: &Rules,
) -> Result<Vec<BdmElement>> {
    mesh.tris_in(Region::Darcy)
        .map(|t| BdmElement::new(mesh, t, profile, kappa, rules))
        .collect()
}

/// Global BDM interpolant Π_h of a smooth field: shared edge moments are
/// computed once per edge, so the result is single-valued by construction.
pub fn interpolate_hdiv(
    mesh: &Mesh,
    elems: &[BdmElement],
    profile: &DegreeProfile,
    rules: &Rules,
    mut f: impl FnMut([f64; 2]) -> [f64; 2],
) -> DivField {
    let mut field = DivField::zero(mesh, profile);
    for (slot, &e) in field.edges.iter().enumerate() {
        let (a, b) = mesh.edge_endpoints(e);
        let eb = EdgeBasis::new(a, b, profile.alpha_d).expect("mesh edges are non-degenerate");
        field.edge[slot] = edge_normal_moments(&eb, &rules.edge_fine, &mut f);
    }
    for (slot, elem) in elems.iter().enumerate() {
        debug_assert_eq!(field.tris[slot], elem.tri);
        let dofs = elem.interpolate(mesh, rules, &mut f);
        field.interior[slot] = dofs.rows(3 * elem.n_edge_scalar(), elem.n_interior()).into();
    }
    field
}

/// Cubic barycentric bubble λ₀λ₁λ₂ with its gradient.
struct Bubble {
    verts: [[f64; 2]; 3],
    grads: [[f64; 2]; 3],
    area2: f64,
}

impl Bubble {
    fn new(tri: &[[f64; 2]; 3]) -> Self {
        let area2 = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
            - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
        let mut grads = [[0.0; 2]; 3];
        for i in 0..3 {
            let a = tri[(i + 1) % 3];
            let b = tri[(i + 2) % 3];
            grads[i] = [(a[1] - b[1]) / area2, (b[0] - a[0]) / area2];
        }
        Self {
            verts: *tri,
            grads,
            area2,
        }
    }

    /// (b, ∂_x b, ∂_y b) at a physical point.
    fn eval(&self, p: [f64; 2]) -> (f64, f64, f64) {
        let mut lam = [0.0; 3];
        for i in 0..3 {
            let a = self.verts[(i + 1) % 3];
            let b = self.verts[(i + 2) % 3];
            lam[i] = ((a[0] - p[0]) * (b[1] - p[1]) - (b[0] - p[0]) * (a[1] - p[1])) / self.area2;
        }
        let b = lam[0] * lam[1] * lam[2];
        let mut bx = 0.0;
        let mut by = 0.0;
        for i in 0..3 {
            let prod = lam[(i + 1) % 3] * lam[(i + 2) % 3];
            bx += prod * self.grads[i][0];
            by += prod * self.grads[i][1];
        }
        (b, bx, by)
    }
}
