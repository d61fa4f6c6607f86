//! Weak Galerkin elements for the free-flow region.
//!
//! A discrete velocity is a weak function: an interior vector polynomial of
//! degree α_s per triangle plus an independent boundary vector polynomial of
//! degree β per edge. The weak gradient (valued in degree-β tensors) and weak
//! divergence (valued in the degree-γ_s pressure space) are defined by
//! integration by parts against the boundary polynomial, and a boundary
//! stabilizer penalizes the mismatch between interior traces and edge
//! unknowns.

use nalgebra::{DMatrix, DVector};

use crate::basis_quad::{
    project_cell_vector, project_edge_vector, CellBasis, EdgeBasis, Rules,
};
use crate::mesh::{EdgeTag, Mesh, Region};
use crate::{Error, Result};

/// Largest polynomial degree the quadrature tables support.
pub const MAX_DEGREE: usize = 7;

/// Polynomial degree tuple (α_s, β, γ_s, α_d, γ_d): Stokes interior, Stokes
/// edge, Stokes pressure, Darcy velocity, Darcy pressure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeProfile {
    pub alpha_s: usize,
    pub beta: usize,
    pub gamma_s: usize,
    pub alpha_d: usize,
    pub gamma_d: usize,
}

impl DegreeProfile {
    /// The "P_k" profile: α_s = β = k, γ_s = k − 1, BDM_k with P_{k−1} pressure.
    pub fn standard(k: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&k) {
            return Err(Error::UnsupportedDegree {
                requested: k,
                min: 1,
                max: MAX_DEGREE,
            });
        }
        Self::new(k, k, k - 1, k, k - 1)
    }

    pub fn new(
        alpha_s: usize,
        beta: usize,
        gamma_s: usize,
        alpha_d: usize,
        gamma_d: usize,
    ) -> Result<Self> {
        let profile = Self {
            alpha_s,
            beta,
            gamma_s,
            alpha_d,
            gamma_d,
        };
        profile.validate()?;
        Ok(profile)
    }

    fn validate(&self) -> Result<()> {
        let Self {
            alpha_s,
            beta,
            gamma_s,
            alpha_d,
            gamma_d,
        } = *self;
        if beta < 1 {
            return Err(Error::InvalidProfile(format!(
                "edge degree beta = {beta}; the lowest-order beta = 0 family is not supported"
            )));
        }
        if gamma_s + 1 < beta || gamma_s > beta {
            return Err(Error::InvalidProfile(format!(
                "need beta - 1 <= gamma_s <= beta, got beta = {beta}, gamma_s = {gamma_s}"
            )));
        }
        if alpha_s < beta || alpha_s > beta + 1 {
            return Err(Error::InvalidProfile(format!(
                "need beta <= alpha_s <= beta + 1, got beta = {beta}, alpha_s = {alpha_s}"
            )));
        }
        if alpha_s > gamma_s + 1 {
            return Err(Error::InvalidProfile(format!(
                "need alpha_s <= gamma_s + 1, got alpha_s = {alpha_s}, gamma_s = {gamma_s}"
            )));
        }
        if alpha_d < 1 {
            return Err(Error::UnsupportedDegree {
                requested: alpha_d,
                min: 1,
                max: MAX_DEGREE,
            });
        }
        if gamma_d + 1 < alpha_d || gamma_d > alpha_d {
            return Err(Error::InvalidProfile(format!(
                "need alpha_d - 1 <= gamma_d <= alpha_d, got alpha_d = {alpha_d}, gamma_d = {gamma_d}"
            )));
        }
        let top = alpha_s.max(alpha_d);
        if top > MAX_DEGREE {
            return Err(Error::UnsupportedDegree {
                requested: top,
                min: 1,
                max: MAX_DEGREE,
            });
        }
        Ok(())
    }

    pub fn max_degree(&self) -> usize {
        self.alpha_s.max(self.alpha_d)
    }

    /// Quadrature bundle strong enough for every bilinear form of this profile.
    pub fn rules(&self) -> Result<Rules> {
        Rules::for_max_degree(self.max_degree())
    }
}

/// Global weak-Galerkin velocity coefficients: one interior block per Stokes
/// triangle and one boundary block per Stokes-side edge, each storing the x
/// coefficients followed by the y coefficients in the orthonormal bases.
#[derive(Debug, Clone)]
pub struct WeakField {
    /// Stokes triangle ids, ascending.
    pub tris: Vec<usize>,
    /// Stokes-side edge ids (interior, Γ_s, interface), ascending.
    pub edges: Vec<usize>,
    pub cell: Vec<DVector<f64>>,
    pub edge: Vec<DVector<f64>>,
    /// True for Γ_s edges, whose blocks hold prescribed boundary projections.
    pub dirichlet: Vec<bool>,
}

impl WeakField {
    pub fn zero(mesh: &Mesh, profile: &DegreeProfile) -> Self {
        let n0 = crate::basis_quad::poly_dim(profile.alpha_s);
        let nb = profile.beta + 1;
        let tris: Vec<usize> = mesh.tris_in(Region::Stokes).collect();
        let edges = mesh.stokes_side_edges();
        let cell = vec![DVector::zeros(2 * n0); tris.len()];
        let edge = vec![DVector::zeros(2 * nb); edges.len()];
        let dirichlet = edges
            .iter()
            .map(|&e| mesh.edges[e].tag == EdgeTag::GammaS)
            .collect();
        Self {
            tris,
            edges,
            cell,
            edge,
            dirichlet,
        }
    }

    pub fn cell_slot(&self, tri: usize) -> Option<usize> {
        self.tris.binary_search(&tri).ok()
    }

    pub fn edge_slot(&self, edge: usize) -> Option<usize> {
        self.edges.binary_search(&edge).ok()
    }

    /// Local coefficient vector of one element: interior block then the three
    /// edge blocks in local edge order.
    pub fn local_coeffs(&self, mesh: &Mesh, elem: &StokesElement) -> DVector<f64> {
        let mut v = DVector::zeros(elem.n_loc());
        let c = &self.cell[self.cell_slot(elem.tri).expect("field covers element")];
        v.rows_mut(0, c.len()).copy_from(c);
        let n0 = elem.n_cell_scalar();
        let nb = elem.n_edge_scalar();
        for j in 0..3 {
            let slot = self
                .edge_slot(mesh.tri_edges[elem.tri][j])
                .expect("field covers element edges");
            v.rows_mut(2 * n0 + 2 * nb * j, 2 * nb).copy_from(&self.edge[slot]);
        }
        v
    }
}

/// One weak Galerkin triangle: orthonormal bases, the weak operator maps, and
/// the local stiffness/stabilizer blocks.
///
/// Local DOF layout: interior x coefficients, interior y coefficients, then
/// per local edge (x block, y block). Edge bases run along the canonical
/// global direction so local and global blocks coincide without sign flips.
#[derive(Debug, Clone)]
pub struct StokesElement {
    pub tri: usize,
    pub h: f64,
    pub cell: CellBasis,
    /// Basis of each weak-gradient tensor entry, degree β.
    pub grad: CellBasis,
    /// Basis of the weak divergence / pressure space, degree γ_s.
    pub div: CellBasis,
    pub edges: [EdgeBasis; 3],
    /// Weak gradient maps: coefficients of (∇_w v)_{rs} = g[2r + s] · dofs.
    g: [DMatrix<f64>; 4],
    /// Weak divergence map into the degree-γ_s basis.
    dmap: DMatrix<f64>,
    /// 2 (D_w u, D_w v)_T in DOF coordinates (multiply by ν for the scheme).
    a_visc: DMatrix<f64>,
    /// h_T⁻¹ ⟨Q_b u_0 − u_b, Q_b v_0 − v_b⟩_∂T.
    stab: DMatrix<f64>,
}

impl StokesElement {
    pub fn new(mesh: &Mesh, t: usize, profile: &DegreeProfile, rules: &Rules) -> Result<Self> {
        let tri = mesh.tri_vertices(t);
        let h = mesh.tri_diameter(t);
        let cell = CellBasis::new(&tri, profile.alpha_s, &rules.cell)?;
        let grad = CellBasis::new(&tri, profile.beta, &rules.cell)?;
        let div = CellBasis::new(&tri, profile.gamma_s, &rules.cell)?;
        let mut edge_bases = Vec::with_capacity(3);
        for j in 0..3 {
            let (a, b) = mesh.edge_endpoints(mesh.tri_edges[t][j]);
            edge_bases.push(EdgeBasis::new(a, b, profile.beta)?);
        }
        let edges: [EdgeBasis; 3] = edge_bases.try_into().expect("three edges");

        let n0 = cell.dim();
        let ng = grad.dim();
        let nd = div.dim();
        let nb = profile.beta + 1;
        let nloc = 2 * n0 + 6 * nb;

        let (qp, qw) = rules.cell.mapped(&tri);
        let nq = qp.len();
        let cell_vals = cell.values(&qp);
        let mut grad_dx = DMatrix::<f64>::zeros(ng, nq);
        let mut grad_dy = DMatrix::<f64>::zeros(ng, nq);
        let mut div_dx = DMatrix::<f64>::zeros(nd, nq);
        let mut div_dy = DMatrix::<f64>::zeros(nd, nq);
        for (q, &p) in qp.iter().enumerate() {
            let (dx, dy) = grad.eval_grad(p);
            grad_dx.set_column(q, &dx);
            grad_dy.set_column(q, &dy);
            let (dx, dy) = div.eval_grad(p);
            div_dx.set_column(q, &dx);
            div_dy.set_column(q, &dy);
        }

        // interior parts: -(v_0, ∇·τ)_T and -(v_0, ∇q)_T
        let mut g = [
            DMatrix::<f64>::zeros(ng, nloc),
            DMatrix::<f64>::zeros(ng, nloc),
            DMatrix::<f64>::zeros(ng, nloc),
            DMatrix::<f64>::zeros(ng, nloc),
        ];
        let mut dmap = DMatrix::<f64>::zeros(nd, nloc);
        for q in 0..nq {
            let w = qw[q];
            for m in 0..ng {
                let gx = w * grad_dx[(m, q)];
                let gy = w * grad_dy[(m, q)];
                for p in 0..n0 {
                    let psi = cell_vals[(p, q)];
                    g[0][(m, p)] -= psi * gx;
                    g[1][(m, p)] -= psi * gy;
                    g[2][(m, n0 + p)] -= psi * gx;
                    g[3][(m, n0 + p)] -= psi * gy;
                }
            }
            for m in 0..nd {
                let dx = w * div_dx[(m, q)];
                let dy = w * div_dy[(m, q)];
                for p in 0..n0 {
                    let psi = cell_vals[(p, q)];
                    dmap[(m, p)] -= psi * dx;
                    dmap[(m, n0 + p)] -= psi * dy;
                }
            }
        }

        // boundary parts: ⟨v_b, τ·n⟩ and ⟨v_b·n, q⟩, plus the stabilizer
        let mut stab = DMatrix::<f64>::zeros(nloc, nloc);
        for j in 0..3 {
            let eb = &edges[j];
            let n_out = mesh.outward_normal(t, j);
            let off = 2 * n0 + 2 * nb * j;
            let mut qb = DMatrix::<f64>::zeros(nb, n0);
            for (&s, &w) in rules.edge.points().iter().zip(rules.edge.weights()) {
                let w = w * eb.len();
                let p = eb.point(s);
                let phi = eb.eval(s);
                let chi = grad.eval(p);
                let zeta = div.eval(p);
                let psi = cell.eval(p);
                for i in 0..nb {
                    let wphi = w * phi[i];
                    for m in 0..ng {
                        let c = wphi * chi[m];
                        g[0][(m, off + i)] += c * n_out[0];
                        g[1][(m, off + i)] += c * n_out[1];
                        g[2][(m, off + nb + i)] += c * n_out[0];
                        g[3][(m, off + nb + i)] += c * n_out[1];
                    }
                    for m in 0..nd {
                        let c = wphi * zeta[m];
                        dmap[(m, off + i)] += c * n_out[0];
                        dmap[(m, off + nb + i)] += c * n_out[1];
                    }
                    for p in 0..n0 {
                        qb[(i, p)] += wphi * psi[p];
                    }
                }
            }
            // per component, rows of (Q_b v_0 − v_b) in the edge basis
            let mut r = DMatrix::<f64>::zeros(nb, nloc);
            for comp in 0..2 {
                r.fill(0.0);
                r.view_mut((0, comp * n0), (nb, n0)).copy_from(&qb);
                for i in 0..nb {
                    r[(i, off + comp * nb + i)] = -1.0;
                }
                stab.gemm_tr(1.0 / h, &r, &r, 1.0);
            }
        }

        // 2 (D_w u, D_w v) with D_12 = D_21 = (G_12 + G_21)/2
        let g12 = &g[1] + &g[2];
        let mut a_visc = DMatrix::<f64>::zeros(nloc, nloc);
        a_visc.gemm_tr(2.0, &g[0], &g[0], 0.0);
        a_visc.gemm_tr(2.0, &g[3], &g[3], 1.0);
        a_visc.gemm_tr(1.0, &g12, &g12, 1.0);

        Ok(Self {
            tri: t,
            h,
            cell,
            grad,
            div,
            edges,
            g,
            dmap,
            a_visc,
            stab,
        })
    }

    pub fn n_cell_scalar(&self) -> usize {
        self.cell.dim()
    }

    pub fn n_edge_scalar(&self) -> usize {
        self.edges[0].dim()
    }

    pub fn n_loc(&self) -> usize {
        2 * self.cell.dim() + 6 * self.edges[0].dim()
    }

    pub fn cell_dof(&self, comp: usize, i: usize) -> usize {
        comp * self.cell.dim() + i
    }

    pub fn edge_dof(&self, local_edge: usize, comp: usize, i: usize) -> usize {
        2 * self.cell.dim() + 2 * self.n_edge_scalar() * local_edge + comp * self.n_edge_scalar() + i
    }

    /// Map from local DOFs to the coefficients of entry (r, s) of the weak
    /// gradient in the degree-β orthonormal basis.
    pub fn weak_gradient(&self, r: usize, s: usize) -> &DMatrix<f64> {
        &self.g[2 * r + s]
    }

    /// Map from local DOFs to weak-divergence coefficients in the degree-γ_s
    /// orthonormal basis.
    pub fn weak_divergence(&self) -> &DMatrix<f64> {
        &self.dmap
    }

    pub fn stabilizer(&self) -> &DMatrix<f64> {
        &self.stab
    }

    /// 2ν (D_w u, D_w v)_T without the stabilizer.
    pub fn viscous(&self, nu: f64) -> DMatrix<f64> {
        nu * &self.a_visc
    }

    /// (A_s, B_s, S): viscous block, pressure-velocity block b_s(v, q) =
    /// −(∇_w·v, q)_T in the orthonormal pressure basis, stabilizer.
    pub fn local_stokes_blocks(&self, nu: f64) -> (DMatrix<f64>, DMatrix<f64>, &DMatrix<f64>) {
        (self.viscous(nu), -&self.dmap, &self.stab)
    }

    /// ν a_visc + stabilizer: the element's share of the energy inner product.
    pub fn energy_matrix(&self, nu: f64) -> DMatrix<f64> {
        let mut m = self.viscous(nu);
        m += &self.stab;
        m
    }

    /// L² projection Q_h of a smooth field onto the element's weak DOFs.
    pub fn interpolate(
        &self,
        mesh: &Mesh,
        rules: &Rules,
        mut f: impl FnMut([f64; 2]) -> [f64; 2],
    ) -> DVector<f64> {
        let tri = mesh.tri_vertices(self.tri);
        let (pts, wts) = rules.cell_fine.mapped(&tri);
        let [cx, cy] = project_cell_vector(&mut f, &self.cell, &pts, &wts);
        let n0 = self.cell.dim();
        let nb = self.n_edge_scalar();
        let mut v = DVector::zeros(self.n_loc());
        v.rows_mut(0, n0).copy_from(&cx);
        v.rows_mut(n0, n0).copy_from(&cy);
        for j in 0..3 {
            let [ex, ey] = project_edge_vector(&mut f, &self.edges[j], &rules.edge_fine);
            v.rows_mut(2 * n0 + 2 * nb * j, nb).copy_from(&ex);
            v.rows_mut(2 * n0 + 2 * nb * j + nb, nb).copy_from(&ey);
        }
        v
    }

    /// Load vector (f, v_0)_T against the interior DOFs only.
    pub fn load(
        &self,
        mesh: &Mesh,
        rules: &Rules,
        mut f: impl FnMut([f64; 2]) -> [f64; 2],
    ) -> DVector<f64> {
        let tri = mesh.tri_vertices(self.tri);
        let (pts, wts) = rules.cell_fine.mapped(&tri);
        let [cx, cy] = project_cell_vector(&mut f, &self.cell, &pts, &wts);
        let n0 = self.cell.dim();
        let mut v = DVector::zeros(self.n_loc());
        v.rows_mut(0, n0).copy_from(&cx);
        v.rows_mut(n0, n0).copy_from(&cy);
        v
    }

    /// Interior velocity value at a physical point.
    pub fn eval_interior(&self, coeffs: &DVector<f64>, p: [f64; 2]) -> [f64; 2] {
        let phi = self.cell.eval(p);
        let n0 = self.cell.dim();
        let mut v = [0.0; 2];
        for i in 0..n0 {
            v[0] += coeffs[i] * phi[i];
            v[1] += coeffs[n0 + i] * phi[i];
        }
        v
    }
}

/// Elements for every Stokes triangle, in ascending triangle order.
pub fn build_stokes_elements(
    mesh: &Mesh,
    profile: &DegreeProfile,
    rules: &Rules,
) -> Result<Vec<StokesElement>> {
    mesh.tris_in(Region::Stokes)
        .map(|t| StokesElement::new(mesh, t, profile, rules))
        .collect()
}

/// Discrete energy norm of a weak field:
/// (2ν‖D_w v‖² + Σ_T h_T⁻¹‖Q_b v_0 − v_b‖²_∂T + c_BJS‖v_b·τ‖²_Γ)^{1/2}.
pub fn stokes_energy_norm(
    mesh: &Mesh,
    elems: &[StokesElement],
    v: &WeakField,
    nu: f64,
    c_bjs: f64,
) -> f64 {
    let mut sq = 0.0;
    for elem in elems {
        let local = v.local_coeffs(mesh, elem);
        sq += (nu * (&elem.a_visc * &local) + &elem.stab * &local).dot(&local);
    }
    for e in mesh.interface_edges() {
        let slot = v.edge_slot(e).expect("interface edge in field");
        let c = &v.edge[slot];
        let nb = c.len() / 2;
        let (a, b) = mesh.edge_endpoints(e);
        let len = mesh.edge_length(e);
        let tau = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        for i in 0..nb {
            let ct = c[i] * tau[0] + c[nb + i] * tau[1];
            sq += c_bjs * ct * ct;
        }
    }
    sq.sqrt()
}
