//! Global saddle-point system: DOF numbering over the blocks
//! [u_s, u_d, p_s, p_d, λ, m], assembly from the local element blocks,
//! symmetric elimination of boundary data, and a sparse direct solve.
//!
//! The final block m is a single scalar Lagrange multiplier enforcing
//! ∫_Ω p = 0, which removes the constant-pressure kernel (and with it the
//! matching constant shift of the interface multiplier).

use std::time::Instant;

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};

use crate::basis_quad::{poly_dim, project_cell, project_edge_vector, Rules};
use crate::coupling::{bjs_matrix, mortar_matrix, MortarBlocks, MultiplierSpace};
use crate::mesh::{EdgeTag, Mesh};
use crate::mfem_darcy::{build_darcy_elements, edge_normal_moments, BdmElement, DivField};
use crate::wg_stokes::{build_stokes_elements, DegreeProfile, StokesElement, WeakField};
use crate::{Error, Result};

/// Scalar model coefficients: viscosity ν, BJS slip coefficient, permeability κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseCoefficients {
    pub nu: f64,
    pub c_bjs: f64,
    pub kappa: f64,
}

impl Default for CaseCoefficients {
    fn default() -> Self {
        Self {
            nu: 1.0,
            c_bjs: 1.0,
            kappa: 1.0,
        }
    }
}

/// Offsets of every DOF block and slot lookup tables.
#[derive(Debug, Clone)]
pub struct DofMap {
    /// Scalar sizes per entity: interior P_{α_s}, edge P_β, Darcy edge
    /// moments, Darcy interior, Stokes pressure, Darcy pressure.
    pub n0: usize,
    pub nb: usize,
    pub ne_d: usize,
    pub ni_d: usize,
    pub nps: usize,
    pub npd: usize,
    pub s_tris: Vec<usize>,
    pub s_edges: Vec<usize>,
    pub d_tris: Vec<usize>,
    pub d_edges: Vec<usize>,
    pub off_us_edge: usize,
    pub off_ud: usize,
    pub off_ud_int: usize,
    pub off_ps: usize,
    pub off_pd: usize,
    pub off_lam: usize,
    pub off_mean: usize,
    pub n_total: usize,
    pub n_lambda: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, profile: &DegreeProfile, n_lambda: usize) -> Self {
        let n0 = poly_dim(profile.alpha_s);
        let nb = profile.beta + 1;
        let ne_d = profile.alpha_d + 1;
        let ni_d = profile.alpha_d * profile.alpha_d - 1;
        let nps = poly_dim(profile.gamma_s);
        let npd = poly_dim(profile.gamma_d);
        let s_tris: Vec<usize> = mesh.tris_in(crate::mesh::Region::Stokes).collect();
        let s_edges = mesh.stokes_side_edges();
        let d_tris: Vec<usize> = mesh.tris_in(crate::mesh::Region::Darcy).collect();
        let d_edges = mesh.darcy_side_edges();

        let off_us_edge = 2 * n0 * s_tris.len();
        let off_ud = off_us_edge + 2 * nb * s_edges.len();
        let off_ud_int = off_ud + ne_d * d_edges.len();
        let off_ps = off_ud_int + ni_d * d_tris.len();
        let off_pd = off_ps + nps * s_tris.len();
        let off_lam = off_pd + npd * d_tris.len();
        let off_mean = off_lam + n_lambda;
        Self {
            n0,
            nb,
            ne_d,
            ni_d,
            nps,
            npd,
            s_tris,
            s_edges,
            d_tris,
            d_edges,
            off_us_edge,
            off_ud,
            off_ud_int,
            off_ps,
            off_pd,
            off_lam,
            off_mean,
            n_total: off_mean + 1,
            n_lambda,
        }
    }

    pub fn us_cell(&self, slot: usize) -> usize {
        2 * self.n0 * slot
    }

    pub fn us_edge(&self, slot: usize) -> usize {
        self.off_us_edge + 2 * self.nb * slot
    }

    pub fn ud_edge(&self, slot: usize) -> usize {
        self.off_ud + self.ne_d * slot
    }

    pub fn ud_int(&self, slot: usize) -> usize {
        self.off_ud_int + self.ni_d * slot
    }

    pub fn ps(&self, slot: usize) -> usize {
        self.off_ps + self.nps * slot
    }

    pub fn pd(&self, slot: usize) -> usize {
        self.off_pd + self.npd * slot
    }

    pub fn lam(&self, i: usize) -> usize {
        self.off_lam + i
    }

    pub fn mean(&self) -> usize {
        self.off_mean
    }

    /// Number of velocity unknowns (Stokes + Darcy blocks).
    pub fn n_velocity(&self) -> usize {
        self.off_ps
    }

    pub fn n_pressure(&self) -> usize {
        self.off_lam - self.off_ps
    }

    pub fn s_tri_slot(&self, t: usize) -> Option<usize> {
        self.s_tris.binary_search(&t).ok()
    }

    pub fn s_edge_slot(&self, e: usize) -> Option<usize> {
        self.s_edges.binary_search(&e).ok()
    }

    pub fn d_tri_slot(&self, t: usize) -> Option<usize> {
        self.d_tris.binary_search(&t).ok()
    }

    pub fn d_edge_slot(&self, e: usize) -> Option<usize> {
        self.d_edges.binary_search(&e).ok()
    }
}

/// Fields extracted from a solved coefficient vector.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u_s: WeakField,
    pub u_d: DivField,
    /// Pressure coefficients per Stokes triangle slot.
    pub p_s: Vec<DVector<f64>>,
    /// Pressure coefficients per Darcy triangle slot.
    pub p_d: Vec<DVector<f64>>,
    pub lambda: DVector<f64>,
    /// Multiplier of the mean-pressure constraint (≈ 0 for consistent data).
    pub mean_multiplier: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub n_total: usize,
    pub n_us: usize,
    pub n_ud: usize,
    pub n_ps: usize,
    pub n_pd: usize,
    pub n_lambda: usize,
    pub nnz: usize,
    pub rel_residual: f64,
    pub seconds: f64,
}

/// Assembled coupled system. Boundary constraints are recorded as DOF values
/// and eliminated symmetrically when the sparse matrix is materialized.
pub struct CoupledSystem {
    pub mesh: Mesh,
    pub profile: DegreeProfile,
    pub coeffs: CaseCoefficients,
    pub rules: Rules,
    pub stokes: Vec<StokesElement>,
    pub darcy: Vec<BdmElement>,
    pub multiplier: MultiplierSpace,
    pub mortar: MortarBlocks,
    pub bjs: Vec<DMatrix<f64>>,
    pub dofs: DofMap,
    pub rhs: DVector<f64>,
    pub constraint: Vec<Option<f64>>,
}

/// Build elements, interface blocks, DOF map, and the load vector.
pub fn assemble(
    mesh: &Mesh,
    profile: &DegreeProfile,
    coeffs: CaseCoefficients,
    mut f_s: impl FnMut([f64; 2]) -> [f64; 2],
    mut f_d: impl FnMut([f64; 2]) -> f64,
) -> Result<CoupledSystem> {
    if !(coeffs.nu > 0.0 && coeffs.nu.is_finite()) {
        return Err(Error::InvalidCoefficient(format!(
            "viscosity must be positive and finite, got {}",
            coeffs.nu
        )));
    }
    let rules = profile.rules()?;
    let stokes = build_stokes_elements(mesh, profile, &rules)?;
    let darcy = build_darcy_elements(mesh, profile, coeffs.kappa, &rules)?;
    let multiplier = MultiplierSpace::new(mesh, profile)?;
    let mortar = mortar_matrix(mesh, profile, &multiplier, &rules);
    let bjs = bjs_matrix(mesh, profile, coeffs.c_bjs)?;
    let dofs = DofMap::new(mesh, profile, multiplier.dim());

    let mut rhs = DVector::zeros(dofs.n_total);
    for (slot, elem) in stokes.iter().enumerate() {
        let load = elem.load(mesh, &rules, &mut f_s);
        rhs.rows_mut(dofs.us_cell(slot), 2 * dofs.n0)
            .copy_from(&load.rows(0, 2 * dofs.n0));
    }
    for (slot, elem) in darcy.iter().enumerate() {
        let tri = mesh.tri_vertices(elem.tri);
        let (pts, wts) = rules.cell_fine.mapped(&tri);
        let moments = project_cell(&mut f_d, &elem.pressure, &pts, &wts);
        rhs.rows_mut(dofs.pd(slot), dofs.npd).copy_from(&(-moments));
    }

    let constraint = vec![None; dofs.n_total];
    Ok(CoupledSystem {
        mesh: mesh.clone(),
        profile: *profile,
        coeffs,
        rules,
        stokes,
        darcy,
        multiplier,
        mortar,
        bjs,
        dofs,
        rhs,
        constraint,
    })
}

/// Record Dirichlet data: Γ_s edge blocks take the edgewise L² projection of
/// g_s, Γ_d edge blocks take the normal moments of g_d.
pub fn apply_boundary_data(
    sys: &mut CoupledSystem,
    mut g_s: impl FnMut([f64; 2]) -> [f64; 2],
    mut g_d: impl FnMut([f64; 2]) -> [f64; 2],
) -> Result<()> {
    let dofs = &sys.dofs;
    for (slot, &e) in dofs.s_edges.iter().enumerate() {
        if sys.mesh.edges[e].tag != EdgeTag::GammaS {
            continue;
        }
        let (a, b) = sys.mesh.edge_endpoints(e);
        let eb = crate::basis_quad::EdgeBasis::new(a, b, sys.profile.beta)?;
        let [cx, cy] = project_edge_vector(&mut g_s, &eb, &sys.rules.edge_fine);
        let base = dofs.us_edge(slot);
        for i in 0..dofs.nb {
            sys.constraint[base + i] = Some(cx[i]);
            sys.constraint[base + dofs.nb + i] = Some(cy[i]);
        }
    }
    for (slot, &e) in dofs.d_edges.iter().enumerate() {
        if sys.mesh.edges[e].tag != EdgeTag::GammaD {
            continue;
        }
        let (a, b) = sys.mesh.edge_endpoints(e);
        let eb = crate::basis_quad::EdgeBasis::new(a, b, sys.profile.alpha_d)?;
        let mom = edge_normal_moments(&eb, &sys.rules.edge_fine, &mut g_d);
        let base = dofs.ud_edge(slot);
        for i in 0..dofs.ne_d {
            sys.constraint[base + i] = Some(mom[i]);
        }
    }
    Ok(())
}

impl CoupledSystem {
    fn stokes_gids(&self, slot: usize) -> Vec<usize> {
        let t = self.dofs.s_tris[slot];
        let n0 = self.dofs.n0;
        let nb = self.dofs.nb;
        let mut gids = Vec::with_capacity(2 * n0 + 6 * nb);
        let base = self.dofs.us_cell(slot);
        gids.extend(base..base + 2 * n0);
        for j in 0..3 {
            let eslot = self
                .dofs
                .s_edge_slot(self.mesh.tri_edges[t][j])
                .expect("Stokes triangle edges are Stokes-side");
            let base = self.dofs.us_edge(eslot);
            gids.extend(base..base + 2 * nb);
        }
        gids
    }

    fn darcy_gids(&self, slot: usize) -> Vec<usize> {
        let t = self.dofs.d_tris[slot];
        let ne = self.dofs.ne_d;
        let mut gids = Vec::with_capacity(3 * ne + self.dofs.ni_d);
        for j in 0..3 {
            let eslot = self
                .dofs
                .d_edge_slot(self.mesh.tri_edges[t][j])
                .expect("Darcy triangle edges are Darcy-side");
            let base = self.dofs.ud_edge(eslot);
            gids.extend(base..base + ne);
        }
        let base = self.dofs.ud_int(slot);
        gids.extend(base..base + self.dofs.ni_d);
        gids
    }

    /// Raw symmetric triplets plus the constraint-corrected right-hand side.
    fn build_triplets(&self) -> (Vec<(usize, usize, f64)>, DVector<f64>) {
        self.triplets_with(&self.constraint)
    }

    fn triplets_with(&self, cons: &[Option<f64>]) -> (Vec<(usize, usize, f64)>, DVector<f64>) {
        let dofs = &self.dofs;
        let mut rhs = self.rhs.clone();
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        macro_rules! push {
            ($i:expr, $j:expr, $v:expr) => {{
                let (i, j, v) = ($i, $j, $v);
                if v != 0.0 {
                    match (cons[i], cons[j]) {
                        (None, None) => trip.push((i, j, v)),
                        (None, Some(g)) => rhs[i] -= v * g,
                        (Some(_), _) => {}
                    }
                }
            }};
        }

        for (slot, elem) in self.stokes.iter().enumerate() {
            let gids = self.stokes_gids(slot);
            let a = elem.energy_matrix(self.coeffs.nu);
            for i in 0..gids.len() {
                for j in 0..gids.len() {
                    push!(gids[i], gids[j], a[(i, j)]);
                }
            }
            let d = elem.weak_divergence();
            let prow = dofs.ps(slot);
            for m in 0..dofs.nps {
                for j in 0..gids.len() {
                    let v = -d[(m, j)];
                    push!(prow + m, gids[j], v);
                    push!(gids[j], prow + m, v);
                }
            }
        }

        for (slot, elem) in self.darcy.iter().enumerate() {
            let gids = self.darcy_gids(slot);
            let a = elem.mass();
            for i in 0..gids.len() {
                for j in 0..gids.len() {
                    push!(gids[i], gids[j], a[(i, j)]);
                }
            }
            let d = elem.divergence();
            let prow = dofs.pd(slot);
            for m in 0..dofs.npd {
                for j in 0..gids.len() {
                    let v = -d[(m, j)];
                    push!(prow + m, gids[j], v);
                    push!(gids[j], prow + m, v);
                }
            }
        }

        for (islot, &e) in self.multiplier.edges.iter().enumerate() {
            let eslot = self.dofs.s_edge_slot(e).expect("interface is Stokes-side");
            let sbase = self.dofs.us_edge(eslot);
            let bjs = &self.bjs[islot];
            for i in 0..2 * dofs.nb {
                for j in 0..2 * dofs.nb {
                    push!(sbase + i, sbase + j, bjs[(i, j)]);
                }
            }
            let lbase = dofs.lam(self.multiplier.offset(islot));
            let cs = &self.mortar.stokes[islot];
            for m in 0..self.multiplier.per_edge {
                for j in 0..2 * dofs.nb {
                    let v = cs[(m, j)];
                    push!(lbase + m, sbase + j, v);
                    push!(sbase + j, lbase + m, v);
                }
            }
            let dslot = self.dofs.d_edge_slot(e).expect("interface is Darcy-side");
            let dbase = self.dofs.ud_edge(dslot);
            let sigma = self.mortar.darcy_sign[islot];
            for m in 0..self.multiplier.per_edge {
                push!(lbase + m, dbase + m, -sigma);
                push!(dbase + m, lbase + m, -sigma);
            }
        }

        // mean-pressure constraint: ∫_T (orthonormal constant) = √|T|
        let mrow = dofs.mean();
        for (slot, &t) in dofs.s_tris.iter().enumerate() {
            let v = self.mesh.tri_area(t).sqrt();
            push!(mrow, dofs.ps(slot), v);
            push!(dofs.ps(slot), mrow, v);
        }
        for (slot, &t) in dofs.d_tris.iter().enumerate() {
            let v = self.mesh.tri_area(t).sqrt();
            push!(mrow, dofs.pd(slot), v);
            push!(dofs.pd(slot), mrow, v);
        }

        for (i, c) in cons.iter().enumerate() {
            if let Some(g) = c {
                trip.push((i, i, 1.0));
                rhs[i] = *g;
            }
        }
        (trip, rhs)
    }

    /// Dense copy of the constrained matrix and right-hand side (small meshes).
    pub fn dense_matrix(&self) -> (DMatrix<f64>, DVector<f64>) {
        let (trip, rhs) = self.build_triplets();
        let n = self.dofs.n_total;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for &(i, j, v) in &trip {
            a[(i, j)] += v;
        }
        (a, rhs)
    }

    /// Kernel of the system without the mean row: zero velocity, constant
    /// pressure, and the matching constant multiplier trace. In the
    /// orthonormal bases the coefficients are √|T| and √|e|.
    pub fn kernel_vector(&self) -> DVector<f64> {
        let dofs = &self.dofs;
        let mut z = DVector::zeros(dofs.n_total);
        for (slot, &t) in dofs.s_tris.iter().enumerate() {
            z[dofs.ps(slot)] = self.mesh.tri_area(t).sqrt();
        }
        for (slot, &t) in dofs.d_tris.iter().enumerate() {
            z[dofs.pd(slot)] = self.mesh.tri_area(t).sqrt();
        }
        for (islot, &e) in self.multiplier.edges.iter().enumerate() {
            z[dofs.lam(self.multiplier.offset(islot))] = self.mesh.edge_length(e).sqrt();
        }
        z
    }

    /// Mean-constraint row as a vector: √|T| at each leading pressure
    /// coefficient, zero elsewhere.
    fn mean_row(&self) -> DVector<f64> {
        let dofs = &self.dofs;
        let mut r = DVector::zeros(dofs.n_total);
        for (slot, &t) in dofs.s_tris.iter().enumerate() {
            r[dofs.ps(slot)] = self.mesh.tri_area(t).sqrt();
        }
        for (slot, &t) in dofs.d_tris.iter().enumerate() {
            r[dofs.pd(slot)] = self.mesh.tri_area(t).sqrt();
        }
        r
    }

    /// Factorize and solve. The factorization runs sequentially so repeated
    /// solves of the same system are bitwise identical.
    ///
    /// The mean-constraint row couples to every pressure DOF and would ruin
    /// the sparse factorization, so the solve works on the bordered form:
    /// with K the system without that row/column, z its one-dimensional
    /// kernel, and r the constraint row, the multiplier is m = zᵀb / zᵀr.
    /// A pinned copy of K (one pressure DOF fixed to zero) is factorized,
    /// and the kernel component is restored afterwards so that rᵀx = 0.
    /// The reported residual is measured against the full bordered system.
    pub fn solve(&self) -> Result<(Solution, SolveReport)> {
        faer::set_global_parallelism(faer::Par::Seq);
        let start = Instant::now();
        let n = self.dofs.n_total;
        let (full_trip, full_rhs) = self.build_triplets();
        let nnz = full_trip.len();

        let z = self.kernel_vector();
        let r = self.mean_row();
        let m_val = z.dot(&full_rhs) / z.dot(&r);

        let mut cons = self.constraint.clone();
        cons[self.dofs.mean()] = Some(m_val);
        cons[self.dofs.ps(0)] = Some(0.0);
        let (trip, rhs) = self.triplets_with(&cons);
        let trip: Vec<Triplet<usize, usize, f64>> = trip
            .into_iter()
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::SingularSystem(format!("matrix creation failed: {e:?}")))?;
        let lu = a
            .sp_lu()
            .map_err(|e| Error::SingularSystem(format!("sparse LU failed: {e:?}")))?;
        let b = faer::Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        let x = lu.solve(&b);
        let mut xv = DVector::from_fn(n, |i, _| x[(i, 0)]);
        let theta = -r.dot(&xv) / r.dot(&z);
        xv.axpy(theta, &z, 1.0);

        let full: Vec<Triplet<usize, usize, f64>> = full_trip
            .into_iter()
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let af = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &full)
            .map_err(|e| Error::SingularSystem(format!("matrix creation failed: {e:?}")))?;
        let xm = faer::Mat::<f64>::from_fn(n, 1, |i, _| xv[i]);
        let bf = faer::Mat::<f64>::from_fn(n, 1, |i, _| full_rhs[i]);
        let res = &af * &xm - &bf;
        let rel_residual = res.norm_l2() / bf.norm_l2().max(f64::MIN_POSITIVE);
        if !rel_residual.is_finite() || rel_residual > 1e-8 {
            return Err(Error::SingularSystem(format!(
                "direct solve residual {rel_residual:.3e} exceeds tolerance"
            )));
        }
        let seconds = start.elapsed().as_secs_f64();
        let report = SolveReport {
            n_total: n,
            n_us: self.dofs.off_ud,
            n_ud: self.dofs.off_ps - self.dofs.off_ud,
            n_ps: self.dofs.off_pd - self.dofs.off_ps,
            n_pd: self.dofs.off_lam - self.dofs.off_pd,
            n_lambda: self.dofs.n_lambda,
            nnz,
            rel_residual,
            seconds,
        };
        Ok((self.split(&xv), report))
    }

    /// Scatter a global coefficient vector into per-field containers.
    pub fn split(&self, x: &DVector<f64>) -> Solution {
        let dofs = &self.dofs;
        let mut u_s = WeakField::zero(&self.mesh, &self.profile);
        for slot in 0..dofs.s_tris.len() {
            u_s.cell[slot] = x.rows(dofs.us_cell(slot), 2 * dofs.n0).into();
        }
        for slot in 0..dofs.s_edges.len() {
            u_s.edge[slot] = x.rows(dofs.us_edge(slot), 2 * dofs.nb).into();
        }
        let mut u_d = DivField::zero(&self.mesh, &self.profile);
        for slot in 0..dofs.d_edges.len() {
            u_d.edge[slot] = x.rows(dofs.ud_edge(slot), dofs.ne_d).into();
        }
        for slot in 0..dofs.d_tris.len() {
            u_d.interior[slot] = x.rows(dofs.ud_int(slot), dofs.ni_d).into();
        }
        let p_s = (0..dofs.s_tris.len())
            .map(|slot| x.rows(dofs.ps(slot), dofs.nps).into())
            .collect();
        let p_d = (0..dofs.d_tris.len())
            .map(|slot| x.rows(dofs.pd(slot), dofs.npd).into())
            .collect();
        let lambda = x.rows(dofs.off_lam, dofs.n_lambda).into();
        Solution {
            u_s,
            u_d,
            p_s,
            p_d,
            lambda,
            mean_multiplier: x[dofs.mean()],
        }
    }

    /// Global mean of a discrete pressure (p_s, p_d given per-slot coefficients).
    pub fn pressure_mean(&self, p_s: &[DVector<f64>], p_d: &[DVector<f64>]) -> f64 {
        let area: f64 = (0..self.mesh.tris.len()).map(|t| self.mesh.tri_area(t)).sum();
        let mut integral = 0.0;
        for (slot, &t) in self.dofs.s_tris.iter().enumerate() {
            integral += self.mesh.tri_area(t).sqrt() * p_s[slot][0];
        }
        for (slot, &t) in self.dofs.d_tris.iter().enumerate() {
            integral += self.mesh.tri_area(t).sqrt() * p_d[slot][0];
        }
        integral / area
    }
}

/// Discrete inf-sup constant of the pressure-velocity pairing at desk scale:
/// the smallest nonzero generalized singular value of the B block over the
/// mortar-constrained, boundary-constrained velocity space, measured in the
/// discrete velocity norm and the L² pressure norm (mean-zero modes).
pub fn infsup_constant(
    mesh: &Mesh,
    profile: &DegreeProfile,
    coeffs: CaseCoefficients,
) -> Result<f64> {
    let sys = assemble(mesh, profile, coeffs, |_| [0.0, 0.0], |_| 0.0)?;
    let dofs = &sys.dofs;
    let nv = dofs.n_velocity();
    let np = dofs.n_pressure();

    // homogeneous essential constraints on Γ_s and Γ_d
    let mut fixed = vec![false; nv];
    for (slot, &e) in dofs.s_edges.iter().enumerate() {
        if sys.mesh.edges[e].tag == EdgeTag::GammaS {
            let base = dofs.us_edge(slot);
            for i in 0..2 * dofs.nb {
                fixed[base + i] = true;
            }
        }
    }
    for (slot, &e) in dofs.d_edges.iter().enumerate() {
        if sys.mesh.edges[e].tag == EdgeTag::GammaD {
            let base = dofs.ud_edge(slot);
            for i in 0..dofs.ne_d {
                fixed[base + i] = true;
            }
        }
    }
    let free: Vec<usize> = (0..nv).filter(|&i| !fixed[i]).collect();
    let col_of: Vec<Option<usize>> = {
        let mut m = vec![None; nv];
        for (c, &i) in free.iter().enumerate() {
            m[i] = Some(c);
        }
        m
    };
    let nf = free.len();

    // velocity-norm matrix X and pressure pairing B over free DOFs
    let mut x = DMatrix::<f64>::zeros(nf, nf);
    let mut b = DMatrix::<f64>::zeros(np, nf);
    let scatter_sym = |x: &mut DMatrix<f64>, gids: &[usize], m: &DMatrix<f64>| {
        for i in 0..gids.len() {
            let Some(ci) = col_of[gids[i]] else { continue };
            for j in 0..gids.len() {
                let Some(cj) = col_of[gids[j]] else { continue };
                x[(ci, cj)] += m[(i, j)];
            }
        }
    };
    for (slot, elem) in sys.stokes.iter().enumerate() {
        let gids = sys.stokes_gids(slot);
        scatter_sym(&mut x, &gids, &elem.energy_matrix(coeffs.nu));
        let d = elem.weak_divergence();
        let prow = dofs.ps(slot) - dofs.off_ps;
        for m in 0..dofs.nps {
            for j in 0..gids.len() {
                if let Some(cj) = col_of[gids[j]] {
                    b[(prow + m, cj)] += -d[(m, j)];
                }
            }
        }
    }
    for (slot, elem) in sys.darcy.iter().enumerate() {
        let gids = sys.darcy_gids(slot);
        // ‖v_d‖² + ‖∇·v_d‖²: plain mass plus divergence Gram
        let mass = elem.mass() * coeffs.kappa;
        scatter_sym(&mut x, &gids, &mass);
        let d = elem.divergence();
        scatter_sym(&mut x, &gids, &d.tr_mul(d));
        let prow = dofs.pd(slot) - dofs.off_ps;
        for m in 0..dofs.npd {
            for j in 0..gids.len() {
                if let Some(cj) = col_of[gids[j]] {
                    b[(prow + m, cj)] += -d[(m, j)];
                }
            }
        }
    }
    for (islot, &e) in sys.multiplier.edges.iter().enumerate() {
        let eslot = dofs.s_edge_slot(e).expect("interface is Stokes-side");
        let base = dofs.us_edge(eslot);
        let bjs = &sys.bjs[islot];
        for i in 0..2 * dofs.nb {
            let Some(ci) = col_of[base + i] else { continue };
            for j in 0..2 * dofs.nb {
                if let Some(cj) = col_of[base + j] {
                    x[(ci, cj)] += bjs[(i, j)];
                }
            }
        }
    }

    // mortar constraint over free DOFs; kernel basis via SVD
    let mut c = DMatrix::<f64>::zeros(sys.multiplier.dim(), nf);
    for (islot, &e) in sys.multiplier.edges.iter().enumerate() {
        let lrow = sys.multiplier.offset(islot);
        let sbase = dofs.us_edge(dofs.s_edge_slot(e).expect("stokes side"));
        let cs = &sys.mortar.stokes[islot];
        for m in 0..sys.multiplier.per_edge {
            for j in 0..2 * dofs.nb {
                if let Some(cj) = col_of[sbase + j] {
                    c[(lrow + m, cj)] += cs[(m, j)];
                }
            }
            let dbase = dofs.ud_edge(dofs.d_edge_slot(e).expect("darcy side"));
            if let Some(cj) = col_of[dbase + m] {
                c[(lrow + m, cj)] += -sys.mortar.darcy_sign[islot];
            }
        }
    }
    // kernel basis of C from the spectral decomposition of CᵀC; the mortar
    // rows are well separated from zero, so the cut is unambiguous
    let ctc = c.tr_mul(&c);
    let ceig = ctc.symmetric_eigen();
    let emax = ceig.eigenvalues.max().max(1.0);
    let kernel_cols: Vec<usize> = (0..nf)
        .filter(|&j| ceig.eigenvalues[j] <= 1e-12 * emax)
        .collect();
    let mut z = DMatrix::<f64>::zeros(nf, kernel_cols.len());
    for (zc, &j) in kernel_cols.iter().enumerate() {
        z.set_column(zc, &ceig.eigenvectors.column(j));
    }

    let xz = &x * &z;
    let zxz = z.tr_mul(&xz);
    let bz = &b * &z;
    let zxz_inv = zxz
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("velocity norm is singular on the kernel".into()))?;
    let k = &bz * zxz_inv.solve(&bz.transpose());

    // deflate the constant-pressure direction, which pairs to zero
    let mut r = DVector::<f64>::zeros(np);
    for (slot, &t) in dofs.s_tris.iter().enumerate() {
        r[dofs.ps(slot) - dofs.off_ps] = sys.mesh.tri_area(t).sqrt();
    }
    for (slot, &t) in dofs.d_tris.iter().enumerate() {
        r[dofs.pd(slot) - dofs.off_ps] = sys.mesh.tri_area(t).sqrt();
    }
    r /= r.norm();
    let eig = k.symmetric_eigen();
    let mut best_const = 0.0;
    let mut const_idx = 0;
    for j in 0..np {
        let align = eig.eigenvectors.column(j).dot(&r).abs();
        if align > best_const {
            best_const = align;
            const_idx = j;
        }
    }
    let beta_sq = (0..np)
        .filter(|&j| j != const_idx)
        .map(|j| eig.eigenvalues[j])
        .fold(f64::INFINITY, f64::min);
    Ok(beta_sq.max(0.0).sqrt())
}
