//! Mortar constraint and interface slip blocks: rows measure the weighted
//! normal-velocity jump across the interface, matched traces yield a zero
//! residual, and the slip penalty block reproduces its defining integral.

use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stokes_darcy::basis_quad::{project_edge_vector, EdgeBasis};
use stokes_darcy::coupling::{
    apply_mortar, bjs_matrix, mortar_matrix, stokes_outward_normal, MultiplierSpace,
};
use stokes_darcy::mesh::{DomainSpec, Mesh, Rect};
use stokes_darcy::mfem_darcy::{
    build_darcy_elements, edge_normal_moments, interpolate_hdiv, DivField,
};
use stokes_darcy::wg_stokes::{build_stokes_elements, DegreeProfile, WeakField};

fn mesh(level: u32) -> Mesh {
    let spec =
        DomainSpec::new(Rect::new(0.0, 1.0, 1.0, 2.0), Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap();
    Mesh::at_level(spec, level).unwrap()
}

#[test]
fn interface_normal_points_into_the_porous_region() {
    let m = mesh(3);
    for e in m.interface_edges() {
        let n = stokes_outward_normal(&m, e);
        assert!((n[0]).abs() < 1e-15 && (n[1] + 1.0).abs() < 1e-15, "edge {e}: {n:?}");
    }
}

#[test]
fn multiplier_space_layout_and_projection() {
    let m = mesh(3);
    for k in [1usize, 3] {
        let profile = DegreeProfile::standard(k).unwrap();
        let rules = profile.rules().unwrap();
        let space = MultiplierSpace::new(&m, &profile).unwrap();
        assert_eq!(space.edges, m.interface_edges());
        assert_eq!(space.per_edge, k + 1);
        assert_eq!(space.dim(), (k + 1) * m.interface_edges().len());
        for slot in 0..space.edges.len() {
            assert_eq!(space.offset(slot), slot * (k + 1));
            assert_eq!(space.edge_slot(space.edges[slot]), Some(slot));
        }
        // projection reproduces a degree-k trace pointwise
        let f = |p: [f64; 2]| 0.3 + p[0] - 0.5 * p[0].powi(2.min(k as i32));
        let c = space.project(&rules, f);
        for (slot, eb) in space.bases.iter().enumerate() {
            for s in [0.0, 0.4, 1.0] {
                let got = space.eval(&c, slot, s);
                assert!((got - f(eb.point(s))).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn mortar_residual_vanishes_on_matching_traces() {
    let m = mesh(2);
    for k in 1..=3usize {
        let profile = DegreeProfile::standard(k).unwrap();
        let rules = profile.rules().unwrap();
        let space = MultiplierSpace::new(&m, &profile).unwrap();
        let blocks = mortar_matrix(&m, &profile, &space, &rules);

        // both sides carry the traces of one smooth polynomial field
        let f = |p: [f64; 2]| {
            [
                0.4 + p[0] * p[1] - 0.2 * p[1] * p[1],
                1.1 - 0.7 * p[0] + 0.3 * p[0] * p[0],
            ]
        };
        let stokes = build_stokes_elements(&m, &profile, &rules).unwrap();
        let mut u_s = WeakField::zero(&m, &profile);
        for (slot, &e) in u_s.edges.clone().iter().enumerate() {
            let (a, b) = m.edge_endpoints(e);
            let eb = EdgeBasis::new(a, b, profile.beta).unwrap();
            let [cx, cy] = project_edge_vector(f, &eb, &rules.edge_fine);
            let nb = profile.beta + 1;
            u_s.edge[slot].rows_mut(0, nb).copy_from(&cx);
            u_s.edge[slot].rows_mut(nb, nb).copy_from(&cy);
        }
        for (slot, elem) in stokes.iter().enumerate() {
            let qh = elem.interpolate(&m, &rules, f);
            u_s.cell[slot] = qh.rows(0, 2 * elem.n_cell_scalar()).into();
        }
        let darcy = build_darcy_elements(&m, &profile, 1.0, &rules).unwrap();
        let u_d = interpolate_hdiv(&m, &darcy, &profile, &rules, f);

        let r = apply_mortar(&space, &blocks, &u_s, &u_d);
        assert_eq!(r.len(), space.dim());
        assert!(
            r.abs().max() < 1e-12,
            "degree {k}: matched traces leave residual {:.3e}",
            r.abs().max()
        );
    }
}

#[test]
fn mortar_rows_integrate_the_weighted_normal_jump() {
    let mut rng = StdRng::seed_from_u64(41);
    let m = mesh(2);
    let profile = DegreeProfile::standard(2).unwrap();
    let rules = profile.rules().unwrap();
    let space = MultiplierSpace::new(&m, &profile).unwrap();
    let blocks = mortar_matrix(&m, &profile, &space, &rules);

    // random Stokes interface coefficients; Darcy side carries the normal
    // moments of a known polynomial field
    let g = |p: [f64; 2]| [0.2 * p[0] - p[1], 0.8 + p[0] * p[1]];
    let mut u_s = WeakField::zero(&m, &profile);
    for v in u_s.edge.iter_mut() {
        for x in v.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    let mut u_d = DivField::zero(&m, &profile);
    for (slot, &e) in u_d.edges.clone().iter().enumerate() {
        let (a, b) = m.edge_endpoints(e);
        let eb = EdgeBasis::new(a, b, profile.alpha_d).unwrap();
        u_d.edge[slot] = edge_normal_moments(&eb, &rules.edge_fine, g);
    }

    let r = apply_mortar(&space, &blocks, &u_s, &u_d);
    let nb = profile.beta + 1;
    for (slot, &e) in space.edges.iter().enumerate() {
        let n = stokes_outward_normal(&m, e);
        let (a, b) = m.edge_endpoints(e);
        let wg = EdgeBasis::new(a, b, profile.beta).unwrap();
        let sc = &u_s.edge[u_s.edge_slot(e).unwrap()];
        let eta = &space.bases[slot];
        for i in 0..space.per_edge {
            let mut want = 0.0;
            for (&s, &w) in rules.edge_fine.points().iter().zip(rules.edge_fine.weights()) {
                let phi = wg.eval(s);
                let us = [sc.rows(0, nb).dot(&phi), sc.rows(nb, nb).dot(&phi)];
                let ud = g(wg.point(s));
                let jump = (us[0] - ud[0]) * n[0] + (us[1] - ud[1]) * n[1];
                want += w * wg.len() * eta.eval(s)[i] * jump;
            }
            let got = r[space.offset(slot) + i];
            assert!(
                (got - want).abs() < 1e-12,
                "edge {e}, multiplier {i}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn bjs_blocks_reproduce_the_slip_integral() {
    let mut rng = StdRng::seed_from_u64(42);
    let m = mesh(2);
    let profile = DegreeProfile::standard(2).unwrap();
    let rules = profile.rules().unwrap();
    let c_bjs = 1.7;
    let blocks = bjs_matrix(&m, &profile, c_bjs).unwrap();
    let interface = m.interface_edges();
    assert_eq!(blocks.len(), interface.len());

    let nb = profile.beta + 1;
    for (slot, &e) in interface.iter().enumerate() {
        let c = DVector::from_fn(2 * nb, |_, _| rng.random_range(-1.0..1.0));
        let got = (&blocks[slot] * &c).dot(&c);
        let (a, b) = m.edge_endpoints(e);
        let eb = EdgeBasis::new(a, b, profile.beta).unwrap();
        let tau = eb.tangent();
        let mut want = 0.0;
        for (&s, &w) in rules.edge.points().iter().zip(rules.edge.weights()) {
            let phi = eb.eval(s);
            let ut = tau[0] * c.rows(0, nb).dot(&phi) + tau[1] * c.rows(nb, nb).dot(&phi);
            want += w * eb.len() * c_bjs * ut * ut;
        }
        assert!((got - want).abs() < 1e-12, "edge {e}: {got} vs {want}");
    }

    assert!(bjs_matrix(&m, &profile, -0.5).is_err());
    assert!(bjs_matrix(&m, &profile, 0.0).is_ok());
}
