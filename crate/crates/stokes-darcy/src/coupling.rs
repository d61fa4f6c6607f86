//! Interface machinery: the Lagrange-multiplier space on the interface trace
//! mesh, the mortar constraint rows tying Stokes edge velocities to Darcy
//! normal fluxes, and the Beavers–Joseph–Saffman slip penalty.

use nalgebra::{DMatrix, DVector};

use crate::basis_quad::{project_edge, EdgeBasis, Rules};
use crate::mesh::Mesh;
use crate::mfem_darcy::DivField;
use crate::wg_stokes::{DegreeProfile, WeakField};
use crate::{Error, Result};

/// Scalar multiplier space Λ_h: P_{α_d} per interface edge, matching the
/// normal traces of the Darcy velocity space.
#[derive(Debug, Clone)]
pub struct MultiplierSpace {
    /// Interface edge ids, ascending.
    pub edges: Vec<usize>,
    pub bases: Vec<EdgeBasis>,
    /// DOFs per edge, α_d + 1.
    pub per_edge: usize,
}

impl MultiplierSpace {
    pub fn new(mesh: &Mesh, profile: &DegreeProfile) -> Result<Self> {
        let edges = mesh.interface_edges();
        if edges.is_empty() {
            return Err(Error::InvalidDomain(
                "mesh has no interface edges to carry the multiplier".into(),
            ));
        }
        let bases = edges
            .iter()
            .map(|&e| {
                let (a, b) = mesh.edge_endpoints(e);
                EdgeBasis::new(a, b, profile.alpha_d)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            edges,
            bases,
            per_edge: profile.alpha_d + 1,
        })
    }

    pub fn dim(&self) -> usize {
        self.per_edge * self.edges.len()
    }

    pub fn offset(&self, slot: usize) -> usize {
        self.per_edge * slot
    }

    pub fn edge_slot(&self, edge: usize) -> Option<usize> {
        self.edges.binary_search(&edge).ok()
    }

    /// Edgewise L² projection R_h^e of a scalar onto Λ_h.
    pub fn project(&self, rules: &Rules, mut f: impl FnMut([f64; 2]) -> f64) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        for (slot, eb) in self.bases.iter().enumerate() {
            c.rows_mut(self.offset(slot), self.per_edge)
                .copy_from(&project_edge(&mut f, eb, &rules.edge_fine));
        }
        c
    }

    /// Multiplier value at arclength parameter s on edge slot.
    pub fn eval(&self, coeffs: &DVector<f64>, slot: usize, s: f64) -> f64 {
        let phi = self.bases[slot].eval(s);
        let mut v = 0.0;
        for i in 0..self.per_edge {
            v += coeffs[self.offset(slot) + i] * phi[i];
        }
        v
    }
}

/// Per-interface-edge blocks of the mortar constraint
/// Σ_e ∫_e η (v_s − v_d)·n, with n the normal pointing out of the free-flow
/// region.
#[derive(Debug, Clone)]
pub struct MortarBlocks {
    /// Multiplier rows against the Stokes edge block [x coeffs | y coeffs].
    pub stokes: Vec<DMatrix<f64>>,
    /// The Darcy normal-moment block is −σ_e I with σ_e = n·n_e, the
    /// orientation of the canonical edge normal relative to n.
    pub darcy_sign: Vec<f64>,
}

/// Build the mortar blocks. Trace meshes from both sides coincide edge for
/// edge on the meshes produced here, so each common-refinement segment is a
/// whole interface edge; the quadrature is exact for the polynomial
/// integrands either way.
pub fn mortar_matrix(
    mesh: &Mesh,
    profile: &DegreeProfile,
    space: &MultiplierSpace,
    rules: &Rules,
) -> MortarBlocks {
    let nb = profile.beta + 1;
    let mut stokes = Vec::with_capacity(space.edges.len());
    let mut darcy_sign = Vec::with_capacity(space.edges.len());
    for (slot, &e) in space.edges.iter().enumerate() {
        let eta = &space.bases[slot];
        let (a, b) = mesh.edge_endpoints(e);
        let wg = EdgeBasis::new(a, b, profile.beta).expect("mesh edges are non-degenerate");
        let n = stokes_outward_normal(mesh, e);

        let mut c = DMatrix::<f64>::zeros(space.per_edge, 2 * nb);
        for (&s, &w) in rules.edge.points().iter().zip(rules.edge.weights()) {
            let w = w * eta.len();
            let em = eta.eval(s);
            let phi = wg.eval(s);
            for m in 0..space.per_edge {
                for i in 0..nb {
                    c[(m, i)] += w * em[m] * phi[i] * n[0];
                    c[(m, nb + i)] += w * em[m] * phi[i] * n[1];
                }
            }
        }
        stokes.push(c);

        let n_e = eta.normal();
        darcy_sign.push(n[0] * n_e[0] + n[1] * n_e[1]);
    }
    MortarBlocks { stokes, darcy_sign }
}

/// Mortar residual C·[u_s, u_d] for assembled fields, one entry per
/// multiplier DOF.
pub fn apply_mortar(
    space: &MultiplierSpace,
    blocks: &MortarBlocks,
    u_s: &WeakField,
    u_d: &DivField,
) -> DVector<f64> {
    let mut r = DVector::zeros(space.dim());
    for (slot, &e) in space.edges.iter().enumerate() {
        let sc = &u_s.edge[u_s.edge_slot(e).expect("interface edge in Stokes field")];
        let dc = &u_d.edge[u_d.edge_slot(e).expect("interface edge in Darcy field")];
        let mut seg = &blocks.stokes[slot] * sc;
        seg.axpy(-blocks.darcy_sign[slot], dc, 1.0);
        r.rows_mut(space.offset(slot), space.per_edge).copy_from(&seg);
    }
    r
}

/// Per-interface-edge BJS blocks c_BJS ⟨u_b·τ, v_b·τ⟩_e over the Stokes edge
/// block [x coeffs | y coeffs]. With the orthonormal edge basis the integral
/// collapses to coefficient algebra.
pub fn bjs_matrix(
    mesh: &Mesh,
    profile: &DegreeProfile,
    c_bjs: f64,
) -> Result<Vec<DMatrix<f64>>> {
    if c_bjs < 0.0 {
        return Err(Error::InvalidCoefficient(format!(
            "BJS coefficient must be nonnegative, got {c_bjs}"
        )));
    }
    let nb = profile.beta + 1;
    let mut blocks = Vec::new();
    for e in mesh.interface_edges() {
        let (a, b) = mesh.edge_endpoints(e);
        let len = mesh.edge_length(e);
        let tau = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let mut m = DMatrix::<f64>::zeros(2 * nb, 2 * nb);
        for i in 0..nb {
            m[(i, i)] = c_bjs * tau[0] * tau[0];
            m[(i, nb + i)] = c_bjs * tau[0] * tau[1];
            m[(nb + i, i)] = c_bjs * tau[1] * tau[0];
            m[(nb + i, nb + i)] = c_bjs * tau[1] * tau[1];
        }
        blocks.push(m);
    }
    Ok(blocks)
}

/// Unit normal on an interface edge pointing from the free-flow region into
/// the porous region.
pub fn stokes_outward_normal(mesh: &Mesh, e: usize) -> [f64; 2] {
    let t = mesh.edges[e].tris[0].expect("interface edge has a Stokes triangle");
    let j = (0..3)
        .find(|&j| mesh.tri_edges[t][j] == e)
        .expect("edge belongs to its triangle");
    mesh.outward_normal(t, j)
}
