//! Two-rectangle triangulations: a free-flow rectangle stacked on a porous
//! rectangle, meeting along one full horizontal interface edge. Level 1 cuts
//! each rectangle into two triangles along its north-west to south-east
//! diagonal; every further level is a regular (red) 4-way refinement, so the
//! two subdomain meshes stay matching along the interface.

use std::collections::HashMap;
use std::io::Write;

use crate::{Error, Result};

/// Axis-aligned rectangle (x0, x1) × (y0, y1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// The two subdomains and their shared interface segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub stokes: Rect,
    pub darcy: Rect,
}

impl DomainSpec {
    pub fn new(stokes: Rect, darcy: Rect) -> Result<Self> {
        let spec = Self { stokes, darcy };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let (s, d) = (self.stokes, self.darcy);
        if !(s.width() > 0.0 && s.height() > 0.0 && d.width() > 0.0 && d.height() > 0.0) {
            return Err(Error::InvalidDomain(
                "rectangles must have positive width and height".into(),
            ));
        }
        if s.x0 != d.x0 || s.x1 != d.x1 || s.y0 != d.y1 {
            return Err(Error::InvalidDomain(
                "free-flow rectangle must sit directly on top of the porous rectangle, \
                 sharing its full bottom edge"
                    .into(),
            ));
        }
        Ok(())
    }

    /// y-coordinate of the horizontal interface.
    pub fn interface_y(&self) -> f64 {
        self.stokes.y0
    }

    pub fn interface_length(&self) -> f64 {
        self.stokes.width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Stokes,
    Darcy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    /// Shared by two free-flow triangles.
    StokesInterior,
    /// Shared by two porous triangles.
    DarcyInterior,
    /// Outer free-flow boundary (velocity Dirichlet data).
    GammaS,
    /// Outer porous boundary (normal-flux data).
    GammaD,
    /// The Stokes–Darcy interface.
    Interface,
}

#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub v: [usize; 3],
    pub region: Region,
}

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    /// Endpoint vertex indices with v[0] < v[1]; the canonical direction
    /// (and with it the edge tangent/normal) runs from v[0] to v[1].
    pub v: [usize; 2],
    pub tag: EdgeTag,
    /// Adjacent triangles. Interface edges store the Stokes-side triangle
    /// first; boundary edges have exactly one entry.
    pub tris: [Option<usize>; 2],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub spec: DomainSpec,
    pub vertices: Vec<[f64; 2]>,
    pub tris: Vec<Triangle>,
    pub edges: Vec<Edge>,
    /// tri_edges[t][j] is the global edge joining local vertices j and (j+1)%3.
    pub tri_edges: Vec<[usize; 3]>,
    pub level: u32,
    /// Max element diameter per region.
    pub h_s: f64,
    pub h_d: f64,
}

/// Level-1 mesh: four triangles, one interface edge.
pub fn build_initial_mesh(spec: DomainSpec) -> Result<Mesh> {
    spec.validate()?;
    let (s, d) = (spec.stokes, spec.darcy);
    let vertices = vec![
        [d.x0, d.y0],
        [d.x1, d.y0],
        [s.x0, s.y0],
        [s.x1, s.y0],
        [s.x0, s.y1],
        [s.x1, s.y1],
    ];
    // north-west to south-east diagonal in each rectangle, all CCW
    let tris = vec![
        Triangle { v: [2, 3, 4], region: Region::Stokes },
        Triangle { v: [3, 5, 4], region: Region::Stokes },
        Triangle { v: [0, 1, 2], region: Region::Darcy },
        Triangle { v: [1, 3, 2], region: Region::Darcy },
    ];
    finish(spec, vertices, tris, 1)
}

/// Regular (red) refinement: each triangle splits into four congruent
/// children through the edge midpoints.
pub fn refine(m: &Mesh) -> Mesh {
    let mut vertices = m.vertices.clone();
    let base = vertices.len();
    for e in &m.edges {
        let a = m.vertices[e.v[0]];
        let b = m.vertices[e.v[1]];
        vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }
    let mid = |e: usize| base + e;
    let mut tris = Vec::with_capacity(4 * m.tris.len());
    for (t, tri) in m.tris.iter().enumerate() {
        let [a, b, c] = tri.v;
        let [eab, ebc, eca] = m.tri_edges[t];
        let (mab, mbc, mca) = (mid(eab), mid(ebc), mid(eca));
        for v in [
            [a, mab, mca],
            [mab, b, mbc],
            [mca, mbc, c],
            [mab, mbc, mca],
        ] {
            tris.push(Triangle { v, region: tri.region });
        }
    }
    finish(m.spec, vertices, tris, m.level + 1).expect("refinement preserves validity")
}

impl Mesh {
    /// Mesh at refinement level `level` ≥ 1 (level 1 = four triangles).
    pub fn at_level(spec: DomainSpec, level: u32) -> Result<Mesh> {
        if level == 0 {
            return Err(Error::InvalidDomain("mesh levels start at 1".into()));
        }
        let mut m = build_initial_mesh(spec)?;
        for _ in 1..level {
            m = refine(&m);
        }
        Ok(m)
    }

    pub fn tri_vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.tris[t].v;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn tri_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_vertices(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn tri_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_vertices(t);
        let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        d(a, b).max(d(b, c)).max(d(c, a))
    }

    pub fn edge_endpoints(&self, e: usize) -> ([f64; 2], [f64; 2]) {
        let edge = &self.edges[e];
        (self.vertices[edge.v[0]], self.vertices[edge.v[1]])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edge_endpoints(e);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    /// Outward unit normal of triangle `t` on its local edge `j`.
    pub fn outward_normal(&self, t: usize, j: usize) -> [f64; 2] {
        let v = self.tri_vertices(t);
        let a = v[j];
        let b = v[(j + 1) % 3];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
    }

    /// +1 if the outward normal of triangle `t` on local edge `j` coincides
    /// with the edge's canonical normal, −1 otherwise.
    pub fn edge_sign(&self, t: usize, j: usize) -> f64 {
        let edge = &self.edges[self.tri_edges[t][j]];
        if self.tris[t].v[j] == edge.v[0] {
            1.0
        } else {
            -1.0
        }
    }

    /// Triangle indices of one region, ascending.
    pub fn tris_in(&self, region: Region) -> impl Iterator<Item = usize> + '_ {
        self.tris
            .iter()
            .enumerate()
            .filter(move |(_, tri)| tri.region == region)
            .map(|(t, _)| t)
    }

    /// Edge indices with the given tag, ascending.
    pub fn edges_tagged(&self, tag: EdgeTag) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.tag == tag)
            .map(|(e, _)| e)
    }

    /// All edges carrying free-flow edge unknowns, ascending.
    pub fn stokes_side_edges(&self) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                matches!(
                    e.tag,
                    EdgeTag::StokesInterior | EdgeTag::GammaS | EdgeTag::Interface
                )
            })
            .map(|(e, _)| e)
            .collect()
    }

    /// All edges carrying porous normal-flux unknowns, ascending.
    pub fn darcy_side_edges(&self) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                matches!(
                    e.tag,
                    EdgeTag::DarcyInterior | EdgeTag::GammaD | EdgeTag::Interface
                )
            })
            .map(|(e, _)| e)
            .collect()
    }

    pub fn interface_edges(&self) -> Vec<usize> {
        self.edges_tagged(EdgeTag::Interface).collect()
    }

    /// Plain-text dump (`v x y` / `t i j k region` / `e i j tag`).
    pub fn dump(&self, w: &mut impl Write) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {}", v[0], v[1])?;
        }
        for t in &self.tris {
            let region = match t.region {
                Region::Stokes => "stokes",
                Region::Darcy => "darcy",
            };
            writeln!(w, "t {} {} {} {}", t.v[0], t.v[1], t.v[2], region)?;
        }
        for e in &self.edges {
            let tag = match e.tag {
                EdgeTag::StokesInterior => "stokes_interior",
                EdgeTag::DarcyInterior => "darcy_interior",
                EdgeTag::GammaS => "gamma_s",
                EdgeTag::GammaD => "gamma_d",
                EdgeTag::Interface => "interface",
            };
            writeln!(w, "e {} {} {}", e.v[0], e.v[1], tag)?;
        }
        Ok(())
    }
}

/// Assemble edge connectivity, classify edge tags, compute mesh sizes.
fn finish(spec: DomainSpec, vertices: Vec<[f64; 2]>, tris: Vec<Triangle>, level: u32) -> Result<Mesh> {
    let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut tri_edges = vec![[usize::MAX; 3]; tris.len()];

    for (t, tri) in tris.iter().enumerate() {
        for j in 0..3 {
            let a = tri.v[j];
            let b = tri.v[(j + 1) % 3];
            let key = (a.min(b), a.max(b));
            let idx = *edge_of.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    v: [key.0, key.1],
                    tag: EdgeTag::StokesInterior, // classified below
                    tris: [None, None],
                });
                edges.len() - 1
            });
            tri_edges[t][j] = idx;
            let slots = &mut edges[idx].tris;
            if slots[0].is_none() {
                slots[0] = Some(t);
            } else {
                debug_assert!(slots[1].is_none(), "edge shared by more than two triangles");
                slots[1] = Some(t);
            }
        }
    }

    let iy = spec.interface_y();
    let (s, d) = (spec.stokes, spec.darcy);
    for edge in &mut edges {
        let a = vertices[edge.v[0]];
        let b = vertices[edge.v[1]];
        // midpoint arithmetic reproduces boundary coordinates exactly, so
        // straight comparisons classify correctly at every level
        edge.tag = if a[1] == iy && b[1] == iy {
            EdgeTag::Interface
        } else if a[0] == b[0] && (a[0] == s.x0 || a[0] == s.x1) {
            if a[1].min(b[1]) >= iy {
                EdgeTag::GammaS
            } else {
                EdgeTag::GammaD
            }
        } else if a[1] == b[1] && a[1] == s.y1 {
            EdgeTag::GammaS
        } else if a[1] == b[1] && a[1] == d.y0 {
            EdgeTag::GammaD
        } else {
            match tris[edge.tris[0].expect("every edge has a triangle")].region {
                Region::Stokes => EdgeTag::StokesInterior,
                Region::Darcy => EdgeTag::DarcyInterior,
            }
        };
        if edge.tag == EdgeTag::Interface {
            // keep the Stokes-side triangle in slot 0
            if let [Some(t0), Some(t1)] = edge.tris {
                if tris[t0].region == Region::Darcy {
                    edge.tris = [Some(t1), Some(t0)];
                }
            }
        }
    }

    let mut mesh = Mesh {
        spec,
        vertices,
        tris,
        edges,
        tri_edges,
        level,
        h_s: 0.0,
        h_d: 0.0,
    };
    for t in 0..mesh.tris.len() {
        if mesh.tri_area(t) <= 0.0 {
            return Err(Error::InvalidDomain(format!(
                "triangle {t} is degenerate or inverted"
            )));
        }
        let h = mesh.tri_diameter(t);
        match mesh.tris[t].region {
            Region::Stokes => mesh.h_s = mesh.h_s.max(h),
            Region::Darcy => mesh.h_d = mesh.h_d.max(h),
        }
    }
    Ok(mesh)
}
