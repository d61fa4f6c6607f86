use nalgebra::DMatrix;

use crate::{Error, Result};

/// Largest exactness degree the rule constructors accept.
pub const MAX_EXACTNESS: usize = 20;

/// Gaussian rule on the reference triangle {x, y ≥ 0, x + y ≤ 1}.
///
/// Built as a conical product: Gauss–Legendre in the collapsed direction times
/// Gauss–Jacobi with weight (1 − v) absorbing the Duffy Jacobian, so all
/// weights are positive and exactness is certified for total degree ≤ d.
#[derive(Debug, Clone)]
pub struct QuadRule {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    exactness: usize,
}

impl QuadRule {
    pub fn triangle(d: usize) -> Result<Self> {
        if d > MAX_EXACTNESS {
            return Err(Error::UnsupportedDegree {
                requested: d,
                min: 0,
                max: MAX_EXACTNESS,
            });
        }
        let n = d / 2 + 1;
        let (gu, wu) = gauss_legendre_01(n);
        let (gv, wv) = gauss_jacobi10_01(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (v, wv) in gv.iter().zip(&wv) {
            for (u, wu) in gu.iter().zip(&wu) {
                points.push([u * (1.0 - v), *v]);
                weights.push(wu * wv);
            }
        }
        Ok(Self {
            points,
            weights,
            exactness: d,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rule mapped to the physical triangle with vertices `v`.
    pub fn mapped(&self, v: &[[f64; 2]; 3]) -> (Vec<[f64; 2]>, Vec<f64>) {
        let jac = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        let scale = jac.abs();
        let pts = self
            .points
            .iter()
            .map(|&[x, y]| {
                [
                    v[0][0] + (v[1][0] - v[0][0]) * x + (v[2][0] - v[0][0]) * y,
                    v[0][1] + (v[1][1] - v[0][1]) * x + (v[2][1] - v[0][1]) * y,
                ]
            })
            .collect();
        let wts = self.weights.iter().map(|w| w * scale).collect();
        (pts, wts)
    }

    /// Integrate `f` over the physical triangle `v`.
    pub fn integrate(&self, v: &[[f64; 2]; 3], mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
        let (pts, wts) = self.mapped(v);
        pts.iter().zip(&wts).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre rule on the reference interval [0, 1].
#[derive(Debug, Clone)]
pub struct EdgeRule {
    points: Vec<f64>,
    weights: Vec<f64>,
    exactness: usize,
}

impl EdgeRule {
    pub fn interval(d: usize) -> Result<Self> {
        if d > MAX_EXACTNESS {
            return Err(Error::UnsupportedDegree {
                requested: d,
                min: 0,
                max: MAX_EXACTNESS,
            });
        }
        let n = d / 2 + 1;
        let (points, weights) = gauss_legendre_01(n);
        Ok(Self {
            points,
            weights,
            exactness: d,
        })
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rule mapped to the segment from `a` to `b`; weights carry the arclength.
    pub fn mapped(&self, a: [f64; 2], b: [f64; 2]) -> (Vec<[f64; 2]>, Vec<f64>) {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let pts = self
            .points
            .iter()
            .map(|&s| [a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s])
            .collect();
        let wts = self.weights.iter().map(|w| w * len).collect();
        (pts, wts)
    }
}

/// Quadrature bundle sized for a polynomial degree bound: `cell`/`edge` for
/// assembling products of basis functions, `cell_fine`/`edge_fine` for
/// integrals against smooth data (loads, projections, error integrands).
#[derive(Debug, Clone)]
pub struct Rules {
    pub cell: QuadRule,
    pub cell_fine: QuadRule,
    pub edge: EdgeRule,
    pub edge_fine: EdgeRule,
}

impl Rules {
    pub fn for_max_degree(m: usize) -> Result<Self> {
        Ok(Self {
            cell: QuadRule::triangle(2 * m + 4)?,
            cell_fine: QuadRule::triangle(2 * m + 6)?,
            edge: EdgeRule::interval(2 * m + 4)?,
            edge_fine: EdgeRule::interval(2 * m + 6)?,
        })
    }
}

/// Nodes and weights of an n-point rule from the Jacobi matrix of the
/// orthogonal-polynomial recurrence (Golub–Welsch).
fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for (i, &a) in diag.iter().enumerate() {
        j[(i, i)] = a;
    }
    for (i, &b) in offdiag.iter().enumerate() {
        j[(i, i + 1)] = b;
        j[(i + 1, i)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule.into_iter().unzip()
}

/// n-point Gauss–Legendre rule on [0, 1].
fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (x, w) = golub_welsch(&diag, &offdiag, 2.0);
    (
        x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        w.iter().map(|w| 0.5 * w).collect(),
    )
}

/// n-point Gauss–Jacobi rule with weight (1 − v) on [0, 1].
fn gauss_jacobi10_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            let k = k as f64;
            -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0))
        })
        .collect();
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            (k * (k + 1.0)).sqrt() / (2.0 * k + 1.0)
        })
        .collect();
    let (x, w) = golub_welsch(&diag, &offdiag, 2.0);
    (
        x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        w.iter().map(|w| 0.25 * w).collect(),
    )
}
