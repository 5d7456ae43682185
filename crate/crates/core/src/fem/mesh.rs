//! Structured triangle meshes on `[-1, 1]^2`, lowest-order edge-element
//! spaces with PEC elimination, and nested-mesh prolongation.
//!
//! Level `i` subdivides each side into `n = 2^i` cells; every cell splits
//! along the bottom-left-to-top-right diagonal, so each triangle of level `i`
//! is the union of four triangles of level `i + 1` and coarse edge functions
//! are exactly representable on finer meshes. Edges carry the global
//! orientation low-vertex-to-high-vertex; tangential DoFs on the boundary are
//! eliminated.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

/// A conforming triangle mesh with globally oriented edges.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Edges as `(a, b)` with `a < b`, sorted; orientation is `a -> b`.
    pub edges: Vec<(usize, usize)>,
    /// Per triangle: `(edge id, sign)` for the local edges
    /// `(v0,v1), (v1,v2), (v2,v0)`; the sign aligns the local traversal with
    /// the global edge orientation.
    pub tri_edges: Vec<[(usize, f64); 3]>,
    /// True for edges with a single incident triangle.
    pub boundary_edge: Vec<bool>,
}

impl TriMesh {
    /// Build connectivity from vertices and triangles.
    pub fn from_cells(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Self {
        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &triangles {
            for &(a, b) in &[(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (a.min(b), a.max(b));
                let next = edge_ids.len();
                edge_ids.entry(key).or_insert(next);
            }
        }
        // renumber edges in sorted key order for a deterministic banded profile
        let mut edges: Vec<(usize, usize)> = edge_ids.keys().copied().collect();
        edges.sort_unstable();
        for (i, e) in edges.iter().enumerate() {
            *edge_ids.get_mut(e).expect("edge present") = i;
        }
        let mut incidence = vec![0usize; edges.len()];
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut entry = [(0usize, 0.0f64); 3];
            for (k, &(a, b)) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
                .iter()
                .enumerate()
            {
                let key = (a.min(b), a.max(b));
                let id = edge_ids[&key];
                incidence[id] += 1;
                entry[k] = (id, if a < b { 1.0 } else { -1.0 });
            }
            tri_edges.push(entry);
        }
        let boundary_edge = incidence.iter().map(|&c| c == 1).collect();
        Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            boundary_edge,
        }
    }

    /// Uniform structured mesh with `n` cells per side on `[-1, 1]^2`.
    pub fn structured(n: usize) -> Self {
        assert!(n >= 1);
        let coord = |i: usize| -1.0 + 2.0 * i as f64 / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for iy in 0..=n {
            for ix in 0..=n {
                vertices.push([coord(ix), coord(iy)]);
            }
        }
        let v = |ix: usize, iy: usize| iy * (n + 1) + ix;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for iy in 0..n {
            for ix in 0..n {
                // diagonal from (ix, iy) to (ix+1, iy+1)
                triangles.push([v(ix, iy), v(ix + 1, iy), v(ix + 1, iy + 1)]);
                triangles.push([v(ix, iy), v(ix + 1, iy + 1), v(ix, iy + 1)]);
            }
        }
        Self::from_cells(vertices, triangles)
    }

    /// The image mesh under an affine map `x -> m x + shift` (connectivity
    /// preserved; `det m > 0` keeps orientations).
    pub fn mapped_affine(&self, m: [[f64; 2]; 2], shift: [f64; 2]) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|p| {
                [
                    m[0][0] * p[0] + m[0][1] * p[1] + shift[0],
                    m[1][0] * p[0] + m[1][1] * p[1] + shift[1],
                ]
            })
            .collect();
        Self {
            vertices,
            triangles: self.triangles.clone(),
            edges: self.edges.clone(),
            tri_edges: self.tri_edges.clone(),
            boundary_edge: self.boundary_edge.clone(),
        }
    }

    pub fn vertex(&self, i: usize) -> [f64; 2] {
        self.vertices[i]
    }

    /// Signed area and barycentric gradients of a triangle.
    pub fn geometry(&self, t: usize) -> TriGeometry {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let area = 0.5 * det;
        debug_assert!(area > 0.0, "triangles must be counterclockwise");
        let grads = [
            [(pb[1] - pc[1]) / det, (pc[0] - pb[0]) / det],
            [(pc[1] - pa[1]) / det, (pa[0] - pc[0]) / det],
            [(pa[1] - pb[1]) / det, (pb[0] - pa[0]) / det],
        ];
        TriGeometry {
            verts: [pa, pb, pc],
            area,
            grads,
        }
    }

    /// Serializable dump (vertices, triangles, oriented edges).
    pub fn dump(&self) -> MeshDump {
        MeshDump {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            edges: self.edges.clone(),
            boundary_edge: self.boundary_edge.clone(),
        }
    }
}

/// JSON-facing mesh snapshot.
#[derive(Serialize)]
pub struct MeshDump {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<(usize, usize)>,
    pub boundary_edge: Vec<bool>,
}

/// Per-triangle geometric data.
pub struct TriGeometry {
    pub verts: [[f64; 2]; 3],
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl TriGeometry {
    pub fn point(&self, bary: [f64; 3]) -> [f64; 2] {
        [
            bary[0] * self.verts[0][0] + bary[1] * self.verts[1][0] + bary[2] * self.verts[2][0],
            bary[0] * self.verts[0][1] + bary[1] * self.verts[1][1] + bary[2] * self.verts[2][1],
        ]
    }

    /// Value of the Whitney function of local edge `k` (before the
    /// orientation sign) at barycentric coordinates `bary`.
    pub fn whitney(&self, k: usize, bary: [f64; 3]) -> [f64; 2] {
        let (a, b) = LOCAL_EDGES[k];
        [
            bary[a] * self.grads[b][0] - bary[b] * self.grads[a][0],
            bary[a] * self.grads[b][1] - bary[b] * self.grads[a][1],
        ]
    }

    /// Constant curl of the Whitney function of local edge `k` (before sign).
    pub fn whitney_curl(&self, k: usize) -> f64 {
        let (a, b) = LOCAL_EDGES[k];
        2.0 * (self.grads[a][0] * self.grads[b][1] - self.grads[a][1] * self.grads[b][0])
    }
}

pub const LOCAL_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Lowest-order curl-conforming space with PEC (tangential-trace) boundary
/// DoFs eliminated.
#[derive(Clone, Debug)]
pub struct EdgeSpace {
    pub mesh: TriMesh,
    /// Free-DoF index per edge; `None` on the boundary.
    pub dof_of_edge: Vec<Option<usize>>,
    pub dim: usize,
    /// Subdivision count when the mesh is the structured one (enables O(1)
    /// point location); 0 otherwise.
    pub structured_n: usize,
    /// Hierarchy level (1-based) when part of a hierarchy; 0 otherwise.
    pub level: usize,
    /// Mesh size (longest edge).
    pub h: f64,
}

impl EdgeSpace {
    pub fn from_mesh(mesh: TriMesh) -> Self {
        let mut dof_of_edge = vec![None; mesh.edges.len()];
        let mut dim = 0;
        for (e, &is_boundary) in mesh.boundary_edge.iter().enumerate() {
            if !is_boundary {
                dof_of_edge[e] = Some(dim);
                dim += 1;
            }
        }
        let h = mesh
            .edges
            .iter()
            .map(|&(a, b)| {
                let pa = mesh.vertices[a];
                let pb = mesh.vertices[b];
                ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        Self {
            mesh,
            dof_of_edge,
            dim,
            structured_n: 0,
            level: 0,
            h,
        }
    }

    /// Structured space at hierarchy level `i` (with `n = 2^i` cells per side).
    pub fn structured_level(level: usize) -> Self {
        let n = 1usize << level;
        let mut space = Self::from_mesh(TriMesh::structured(n));
        space.structured_n = n;
        space.level = level;
        space
    }

    /// Locate the triangle containing `x` (structured meshes only, clamped
    /// to the domain). Points on the cell diagonal go to the lower triangle.
    pub fn locate(&self, x: [f64; 2]) -> usize {
        let n = self.structured_n;
        assert!(n > 0, "point location requires the structured mesh");
        let cell = |t: f64| -> usize {
            let u = (t + 1.0) * 0.5 * n as f64;
            (u.floor() as isize).clamp(0, n as isize - 1) as usize
        };
        let ix = cell(x[0]);
        let iy = cell(x[1]);
        // local coordinates within the cell
        let step = 2.0 / n as f64;
        let lx = (x[0] - (-1.0 + step * ix as f64)) / step;
        let ly = (x[1] - (-1.0 + step * iy as f64)) / step;
        let tri = 2 * (iy * n + ix);
        if lx >= ly {
            tri
        } else {
            tri + 1
        }
    }

    /// Evaluate the discrete field at `x` (structured meshes only).
    pub fn eval_field(&self, coeffs: &[Complex64], x: [f64; 2]) -> [Complex64; 2] {
        let t = self.locate(x);
        self.eval_field_in(coeffs, t, x)
    }

    /// Evaluate the discrete field at `x` inside triangle `t`.
    pub fn eval_field_in(&self, coeffs: &[Complex64], t: usize, x: [f64; 2]) -> [Complex64; 2] {
        let geom = self.mesh.geometry(t);
        let bary = barycentric(&geom, x);
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for k in 0..3 {
            let (edge, sign) = self.mesh.tri_edges[t][k];
            let c = match self.dof_of_edge[edge] {
                Some(d) => coeffs[d],
                None => continue,
            };
            let w = geom.whitney(k, bary);
            out[0] += c * (sign * w[0]);
            out[1] += c * (sign * w[1]);
        }
        out
    }

    /// Evaluate the (scalar) curl of the discrete field in triangle `t`.
    pub fn eval_curl_in(&self, coeffs: &[Complex64], t: usize) -> Complex64 {
        let geom = self.mesh.geometry(t);
        let mut out = Complex64::new(0.0, 0.0);
        for k in 0..3 {
            let (edge, sign) = self.mesh.tri_edges[t][k];
            if let Some(d) = self.dof_of_edge[edge] {
                out += coeffs[d] * (sign * geom.whitney_curl(k));
            }
        }
        out
    }

    /// Exact prolongation of a coarse discrete field into this (finer,
    /// nested) space: each free edge DoF is the edge integral of the coarse
    /// field, computed by the midpoint rule, which is exact because the
    /// coarse field is affine along every fine edge.
    pub fn prolong_from(&self, coarse: &EdgeSpace, coarse_coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (e, &(a, b)) in self.mesh.edges.iter().enumerate() {
            let Some(dof) = self.dof_of_edge[e] else { continue };
            let pa = self.mesh.vertex(a);
            let pb = self.mesh.vertex(b);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let dir = [pb[0] - pa[0], pb[1] - pa[1]];
            let val = coarse.eval_field(coarse_coeffs, mid);
            out[dof] = val[0] * dir[0] + val[1] * dir[1];
        }
        out
    }
}

pub fn barycentric(geom: &TriGeometry, x: [f64; 2]) -> [f64; 3] {
    let mut bary = [0.0; 3];
    for k in 0..3 {
        // lambda_k is affine with gradient grads[k] and value 1 at vertex k
        bary[k] = 1.0
            + geom.grads[k][0] * (x[0] - geom.verts[k][0])
            + geom.grads[k][1] * (x[1] - geom.verts[k][1]);
    }
    bary
}

/// Builds the nested structured hierarchy for levels `1..=levels`
/// (`n = 2, 4, ..., 2^levels`).
pub fn build_hierarchy(levels: usize) -> Vec<EdgeSpace> {
    assert!(levels >= 1);
    (1..=levels).map(EdgeSpace::structured_level).collect()
}

/// Closed-form dimension of the structured level-`i` space.
pub fn structured_dim(level: usize) -> usize {
    let n = 1usize << level;
    3 * n * n - 2 * n
}
