//! Orthonormality and projection properties of the cell and edge bases.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stokes_darcy::basis_quad::{
    poly_dim, project_cell, project_cell_vector, project_edge, project_edge_vector, CellBasis,
    EdgeBasis, EdgeRule, QuadRule,
};

const TRI: [[f64; 2]; 3] = [[0.3, -0.2], [2.1, 0.4], [0.9, 1.8]];

fn tri_area(t: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
}

/// Random polynomial of total degree ≤ k as coefficients against monomials.
fn random_poly(rng: &mut StdRng, k: usize) -> impl Fn([f64; 2]) -> f64 {
    let coeffs: Vec<f64> = (0..poly_dim(k)).map(|_| rng.random_range(-1.0..1.0)).collect();
    move |[x, y]: [f64; 2]| {
        let mut v = 0.0;
        let mut i = 0;
        for d in 0..=k {
            for q in 0..=d {
                v += coeffs[i] * x.powi((d - q) as i32) * y.powi(q as i32);
                i += 1;
            }
        }
        v
    }
}

#[test]
fn poly_dim_matches_triangle_numbers() {
    assert_eq!(
        (0..5).map(poly_dim).collect::<Vec<_>>(),
        vec![1, 3, 6, 10, 15]
    );
}

#[test]
fn cell_basis_is_orthonormal() {
    for k in 0..=7usize {
        let rule = QuadRule::triangle(2 * k).unwrap();
        let basis = CellBasis::new(&TRI, k, &rule).unwrap();
        assert_eq!(basis.dim(), poly_dim(k));
        let (pts, wts) = rule.mapped(&TRI);
        let v = basis.values(&pts);
        let mut gram = DMatrix::<f64>::zeros(basis.dim(), basis.dim());
        for (q, &w) in wts.iter().enumerate() {
            let col = v.column(q).clone_owned();
            gram.ger(w, &col, &col, 1.0);
        }
        let err = (&gram - DMatrix::<f64>::identity(basis.dim(), basis.dim()))
            .abs()
            .max();
        // the Cholesky orthonormalization conditions like the monomial Gram,
        // so the achievable identity floor grows with the degree
        assert!(err < 1e-11, "degree {k}: Gram deviates by {err:.3e}");
    }
}

#[test]
fn cell_basis_leading_function_is_the_normalized_constant() {
    // the mean-value gauge machinery relies on φ₀ = 1/√|T| everywhere
    let rule = QuadRule::triangle(8).unwrap();
    let basis = CellBasis::new(&TRI, 4, &rule).unwrap();
    let want = 1.0 / tri_area(&TRI).sqrt();
    for p in [[0.5, 0.1], [1.2, 0.9], [0.35, -0.1]] {
        assert!((basis.eval(p)[0] - want).abs() < 1e-13);
    }
}

#[test]
fn cell_basis_gradient_matches_finite_differences() {
    let rule = QuadRule::triangle(6).unwrap();
    let basis = CellBasis::new(&TRI, 3, &rule).unwrap();
    let h = 1e-6;
    for p in [[0.8, 0.4], [1.1, 0.2], [0.6, 1.0]] {
        let (dx, dy) = basis.eval_grad(p);
        let fx = (basis.eval([p[0] + h, p[1]]) - basis.eval([p[0] - h, p[1]])) / (2.0 * h);
        let fy = (basis.eval([p[0], p[1] + h]) - basis.eval([p[0], p[1] - h])) / (2.0 * h);
        assert!((dx - fx).abs().max() < 1e-6, "point {p:?}");
        assert!((dy - fy).abs().max() < 1e-6, "point {p:?}");
    }
}

#[test]
fn cell_basis_values_agree_with_eval() {
    let rule = QuadRule::triangle(4).unwrap();
    let basis = CellBasis::new(&TRI, 2, &rule).unwrap();
    let pts = [[0.7, 0.3], [1.0, 0.8]];
    let v = basis.values(&pts);
    for (q, &p) in pts.iter().enumerate() {
        assert!((v.column(q) - basis.eval(p)).abs().max() < 1e-15);
    }
}

#[test]
fn cell_projection_reproduces_polynomials() {
    let mut rng = StdRng::seed_from_u64(11);
    for k in 1..=4usize {
        let rule = QuadRule::triangle(2 * k + 2).unwrap();
        let basis = CellBasis::new(&TRI, k, &rule).unwrap();
        let (pts, wts) = rule.mapped(&TRI);
        for _ in 0..20 {
            let f = random_poly(&mut rng, k);
            let c = project_cell(&f, &basis, &pts, &wts);
            for p in [[0.5, 0.2], [1.3, 0.6], [0.8, 1.1]] {
                let got = c.dot(&basis.eval(p));
                assert!(
                    (got - f(p)).abs() < 1e-11,
                    "degree {k} at {p:?}: {got} vs {}",
                    f(p)
                );
            }
        }
    }
}

#[test]
fn cell_projection_residual_is_orthogonal() {
    // for smooth non-polynomial data the residual f − Pf has zero moments
    let rule = QuadRule::triangle(12).unwrap();
    let basis = CellBasis::new(&TRI, 3, &rule).unwrap();
    let (pts, wts) = rule.mapped(&TRI);
    let f = |p: [f64; 2]| (p[0] * 1.3).sin() * (p[1] * 0.7).cos();
    let c = project_cell(f, &basis, &pts, &wts);
    let mut moments = DVector::<f64>::zeros(basis.dim());
    for (&p, &w) in pts.iter().zip(&wts) {
        let r = f(p) - c.dot(&basis.eval(p));
        moments.axpy(w * r, &basis.eval(p), 1.0);
    }
    assert!(moments.abs().max() < 1e-13);
}

#[test]
fn vector_projection_matches_componentwise_projection() {
    let rule = QuadRule::triangle(8).unwrap();
    let basis = CellBasis::new(&TRI, 2, &rule).unwrap();
    let (pts, wts) = rule.mapped(&TRI);
    let f = |p: [f64; 2]| [p[0] * p[1], (p[0] - p[1]).powi(2)];
    let [cx, cy] = project_cell_vector(f, &basis, &pts, &wts);
    let sx = project_cell(|p| f(p)[0], &basis, &pts, &wts);
    let sy = project_cell(|p| f(p)[1], &basis, &pts, &wts);
    assert!((cx - sx).abs().max() < 1e-14);
    assert!((cy - sy).abs().max() < 1e-14);

    let eb = EdgeBasis::new([0.0, 0.0], [2.0, 1.0], 2).unwrap();
    let er = EdgeRule::interval(8).unwrap();
    let [ex, ey] = project_edge_vector(f, &eb, &er);
    assert!((ex - project_edge(|p| f(p)[0], &eb, &er)).abs().max() < 1e-14);
    assert!((ey - project_edge(|p| f(p)[1], &eb, &er)).abs().max() < 1e-14);
}

#[test]
fn edge_basis_is_orthonormal() {
    let eb = EdgeBasis::new([0.5, -1.0], [3.5, 3.0], 5).unwrap();
    assert_eq!(eb.dim(), 6);
    assert!((eb.len() - 5.0).abs() < 1e-14);
    let rule = EdgeRule::interval(10).unwrap();
    let mut gram = DMatrix::<f64>::zeros(eb.dim(), eb.dim());
    for (&s, &w) in rule.points().iter().zip(rule.weights()) {
        let v = eb.eval(s);
        gram.ger(w * eb.len(), &v, &v, 1.0);
    }
    let err = (&gram - DMatrix::<f64>::identity(eb.dim(), eb.dim())).abs().max();
    assert!(err < 1e-12, "Gram deviates by {err:.3e}");
}

#[test]
fn edge_geometry_conventions() {
    let eb = EdgeBasis::new([1.0, 1.0], [4.0, 5.0], 1).unwrap();
    assert_eq!(eb.point(0.0), [1.0, 1.0]);
    assert_eq!(eb.point(1.0), [4.0, 5.0]);
    let t = eb.tangent();
    let n = eb.normal();
    assert!((t[0] - 0.6).abs() < 1e-15 && (t[1] - 0.8).abs() < 1e-15);
    // normal is the tangent rotated clockwise, so (t, n) is right-handed
    assert!((n[0] - 0.8).abs() < 1e-15 && (n[1] + 0.6).abs() < 1e-15);
    assert!((t[0] * n[0] + t[1] * n[1]).abs() < 1e-15);
    assert!(EdgeBasis::new([2.0, 2.0], [2.0, 2.0], 1).is_err());
}

#[test]
fn edge_projection_reproduces_polynomial_traces() {
    let mut rng = StdRng::seed_from_u64(12);
    let eb = EdgeBasis::new([0.0, 1.0], [2.0, 2.0], 3).unwrap();
    let rule = EdgeRule::interval(10).unwrap();
    for _ in 0..20 {
        let f = random_poly(&mut rng, 3);
        // restrict to the edge so the trace is degree ≤ 3 in arclength
        let c = project_edge(&f, &eb, &rule);
        for s in [0.0, 0.3, 0.77, 1.0] {
            let got = c.dot(&eb.eval(s));
            let want = f(eb.point(s));
            assert!((got - want).abs() < 1e-12, "s = {s}: {got} vs {want}");
        }
    }
}
