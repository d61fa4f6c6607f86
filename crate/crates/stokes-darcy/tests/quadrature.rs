//! Quadrature oracles: every rule is checked against closed-form monomial
//! moments, ∫_T̂ x^a y^b = a! b! / (a + b + 2)! on the reference triangle and
//! ∫₀¹ s^p = 1/(p + 1) on the interval.

use stokes_darcy::basis_quad::{EdgeRule, QuadRule, MAX_EXACTNESS};
use stokes_darcy::Error;

fn factorial(n: usize) -> f64 {
    (1..=n as u128).product::<u128>() as f64
}

/// ∫ over the reference triangle of x^a y^b.
fn tri_moment(a: usize, b: usize) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

#[test]
fn triangle_rules_integrate_monomials_exactly() {
    for d in 0..=MAX_EXACTNESS {
        let rule = QuadRule::triangle(d).unwrap();
        assert_eq!(rule.exactness(), d);
        for a in 0..=d {
            for b in 0..=(d - a) {
                let got: f64 = rule
                    .points()
                    .iter()
                    .zip(rule.weights())
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let want = tri_moment(a, b);
                assert!(
                    (got - want).abs() <= 1e-14 + 1e-12 * want.abs(),
                    "degree-{d} rule, moment x^{a} y^{b}: got {got:.17e}, want {want:.17e}"
                );
            }
        }
    }
}

#[test]
fn triangle_rule_weights_positive_and_sum_to_area() {
    for d in [0, 3, 8, 15, 20] {
        let rule = QuadRule::triangle(d).unwrap();
        assert!(rule.weights().iter().all(|&w| w > 0.0), "degree {d}");
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 0.5).abs() < 1e-14, "degree {d}: weights sum {total}");
        for p in rule.points() {
            assert!(
                p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0 + 1e-15,
                "degree {d}: point {p:?} outside reference triangle"
            );
        }
    }
}

#[test]
fn triangle_rule_rejects_degree_past_limit() {
    match QuadRule::triangle(MAX_EXACTNESS + 1) {
        Err(Error::UnsupportedDegree { requested, max, .. }) => {
            assert_eq!(requested, MAX_EXACTNESS + 1);
            assert_eq!(max, MAX_EXACTNESS);
        }
        other => panic!("expected UnsupportedDegree, got {other:?}"),
    }
    assert!(EdgeRule::interval(MAX_EXACTNESS + 1).is_err());
}

#[test]
fn mapped_triangle_rule_matches_affine_moments() {
    // skewed triangle; ∫ 1 = |T| and ∫ (x, y) = |T| · centroid
    let v = [[0.2, -0.4], [1.7, 0.1], [0.6, 1.3]];
    let area = 0.5
        * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
            - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
    let cx = (v[0][0] + v[1][0] + v[2][0]) / 3.0;
    let cy = (v[0][1] + v[1][1] + v[2][1]) / 3.0;

    let rule = QuadRule::triangle(4).unwrap();
    let one = rule.integrate(&v, |_| 1.0);
    let mx = rule.integrate(&v, |p| p[0]);
    let my = rule.integrate(&v, |p| p[1]);
    assert!((one - area).abs() < 1e-14);
    assert!((mx - area * cx).abs() < 1e-14);
    assert!((my - area * cy).abs() < 1e-14);

    let (pts, wts) = rule.mapped(&v);
    let direct: f64 = pts.iter().zip(&wts).map(|(p, w)| w * p[0] * p[1]).sum();
    assert!((direct - rule.integrate(&v, |p| p[0] * p[1])).abs() < 1e-15);
}

#[test]
fn edge_rules_integrate_monomials_exactly() {
    for d in 0..=MAX_EXACTNESS {
        let rule = EdgeRule::interval(d).unwrap();
        assert_eq!(rule.exactness(), d);
        assert!(rule.weights().iter().all(|&w| w > 0.0));
        for p in 0..=d {
            let got: f64 = rule
                .points()
                .iter()
                .zip(rule.weights())
                .map(|(s, w)| w * s.powi(p as i32))
                .sum();
            let want = 1.0 / (p as f64 + 1.0);
            assert!(
                (got - want).abs() < 1e-14,
                "degree-{d} rule, ∫ s^{p}: got {got}, want {want}"
            );
        }
    }
}

#[test]
fn mapped_edge_rule_carries_arclength() {
    let (a, b) = ([1.0, 2.0], [4.0, 6.0]); // length 5
    let rule = EdgeRule::interval(3).unwrap();
    let (pts, wts) = rule.mapped(a, b);
    let total: f64 = wts.iter().sum();
    assert!((total - 5.0).abs() < 1e-13);
    // ∫ x dℓ along the segment = length · midpoint x
    let mx: f64 = pts.iter().zip(&wts).map(|(p, w)| w * p[0]).sum();
    assert!((mx - 5.0 * 2.5).abs() < 1e-13);
}
