//! Structured tetrahedral mesh of the unit cube Ω = (0,1)³.
//!
//! The cube is divided into M³ subcubes, each split into 6 tetrahedra sharing
//! the subcube's main diagonal (Kuhn split). The split is translation
//! invariant, so faces of neighboring subcubes carry matching triangulations
//! and the mesh is conforming. Vertices are ordered lexicographically by
//! their (i, j, k) grid index with i most significant.

use std::fmt;

/// Outward face normals of the unit cube, encoded as a bit set per vertex.
///
/// Bit n (0..6) corresponds to the faces in the order
/// −e₁, +e₁, −e₂, +e₂, −e₃, +e₃.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct NormalSet(pub u8);

impl NormalSet {
    pub const EMPTY: NormalSet = NormalSet(0);

    /// Bit index for the face with normal `sign * e_axis`.
    fn bit(axis: usize, sign: i8) -> u8 {
        debug_assert!(axis < 3);
        (2 * axis + usize::from(sign > 0)) as u8
    }

    pub fn with(mut self, axis: usize, sign: i8) -> Self {
        self.0 |= 1 << Self::bit(axis, sign);
        self
    }

    pub fn contains(&self, axis: usize, sign: i8) -> bool {
        self.0 & (1 << Self::bit(axis, sign)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Axes that appear with either sign (the constrained directions for
    /// tangential boundary conditions derive from these).
    pub fn axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(|&a| self.contains(a, -1) || self.contains(a, 1))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }
}

impl fmt::Debug for NormalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for axis in 0..3 {
            if self.contains(axis, -1) {
                parts.push(format!("-e{}", axis + 1));
            }
            if self.contains(axis, 1) {
                parts.push(format!("+e{}", axis + 1));
            }
        }
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A boundary face of the mesh: which cell owns it, which of the cell's four
/// local faces it is, and the outward axis-aligned normal.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryFace {
    pub cell: usize,
    pub local_face: usize,
    /// Axis (0..3) of the outward normal.
    pub axis: usize,
    /// Sign of the outward normal along `axis`.
    pub sign: i8,
}

/// Per-cell affine geometry: x = p0 + J·x̂ for reference coords x̂.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    /// First vertex of the cell (the map's origin).
    pub origin: [f64; 3],
    /// Jacobian columns (p1−p0, p2−p0, p3−p0), stored row major.
    pub jac: [[f64; 3]; 3],
    /// Inverse transpose of the Jacobian, row major.
    pub inv_jac_t: [[f64; 3]; 3],
    /// det J = 6 |K| (positive by construction).
    pub det: f64,
}

/// Uniform tetrahedral partition of the unit cube.
pub struct Mesh {
    /// Subcube count per axis; h = 1/M.
    pub m: usize,
    /// Vertex coordinates, (M+1)³ entries, lexicographic by (i, j, k).
    pub vertices: Vec<[f64; 3]>,
    /// Tetrahedra as vertex index 4-tuples with positive orientation, 6M³ entries.
    pub cells: Vec<[usize; 4]>,
    /// Faces lying on ∂Ω.
    pub boundary_faces: Vec<BoundaryFace>,
    /// Affine map data per cell.
    pub geometry: Vec<CellGeometry>,
}

/// The 6 axis orderings of the Kuhn split. Each tet visits the subcube
/// corners 0 → e_a → e_a+e_b → (1,1,1).
const KUHN_PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Local faces of a tetrahedron (vertex index triples opposite each vertex).
const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Signed volume of the tetrahedron spanned by four points, times 6.
pub fn signed_volume_x6(p: &[[f64; 3]; 4]) -> f64 {
    let u = sub(p[1], p[0]);
    let v = sub(p[2], p[0]);
    let w = sub(p[3], p[0]);
    det3(u, v, w)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn det3(u: [f64; 3], v: [f64; 3], w: [f64; 3]) -> f64 {
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
}

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("mesh subdivision count M must be at least 1")]
    ZeroSubdivisions,
}

/// Build the uniform 6M³-tetrahedron mesh of the unit cube.
pub fn build_unit_cube_mesh(m: usize) -> Result<Mesh, MeshError> {
    if m == 0 {
        return Err(MeshError::ZeroSubdivisions);
    }
    let n = m + 1;
    let h = 1.0 / m as f64;
    let vidx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;

    let mut vertices = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }

    let mut cells = Vec::with_capacity(6 * m * m * m);
    for ci in 0..m {
        for cj in 0..m {
            for ck in 0..m {
                let corner = |d: [usize; 3]| vidx(ci + d[0], cj + d[1], ck + d[2]);
                for perm in KUHN_PERMS {
                    let mut d = [0usize; 3];
                    let v0 = corner(d);
                    d[perm[0]] = 1;
                    let v1 = corner(d);
                    d[perm[1]] = 1;
                    let v2 = corner(d);
                    d[perm[2]] = 1;
                    let v3 = corner(d);
                    let mut tet = [v0, v1, v2, v3];
                    let pts = [
                        vertices[tet[0]],
                        vertices[tet[1]],
                        vertices[tet[2]],
                        vertices[tet[3]],
                    ];
                    if signed_volume_x6(&pts) < 0.0 {
                        tet.swap(2, 3);
                    }
                    cells.push(tet);
                }
            }
        }
    }

    let geometry = cells
        .iter()
        .map(|tet| cell_geometry(&vertices, tet))
        .collect();

    let boundary_faces = find_boundary_faces(&vertices, &cells, m);

    Ok(Mesh {
        m,
        vertices,
        cells,
        boundary_faces,
        geometry,
    })
}

fn cell_geometry(vertices: &[[f64; 3]], tet: &[usize; 4]) -> CellGeometry {
    let p0 = vertices[tet[0]];
    let c0 = sub(vertices[tet[1]], p0);
    let c1 = sub(vertices[tet[2]], p0);
    let c2 = sub(vertices[tet[3]], p0);
    // jac[r][c] = component r of column c
    let jac = [
        [c0[0], c1[0], c2[0]],
        [c0[1], c1[1], c2[1]],
        [c0[2], c1[2], c2[2]],
    ];
    let det = det3(c0, c1, c2);
    debug_assert!(det > 0.0);
    // inverse via adjugate
    let a = jac;
    let inv = [
        [
            (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det,
            (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det,
            (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det,
        ],
        [
            (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det,
            (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det,
            (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det,
        ],
        [
            (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det,
            (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det,
            (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det,
        ],
    ];
    // inv_jac_t[r][c] = inv[c][r]
    let inv_jac_t = [
        [inv[0][0], inv[1][0], inv[2][0]],
        [inv[0][1], inv[1][1], inv[2][1]],
        [inv[0][2], inv[1][2], inv[2][2]],
    ];
    CellGeometry {
        origin: p0,
        jac,
        inv_jac_t,
        det,
    }
}

fn find_boundary_faces(
    vertices: &[[f64; 3]],
    cells: &[[usize; 4]],
    m: usize,
) -> Vec<BoundaryFace> {
    use std::collections::HashMap;
    let mut face_count: HashMap<[usize; 3], (usize, usize, usize)> = HashMap::new();
    for (c, tet) in cells.iter().enumerate() {
        for (lf, face) in TET_FACES.iter().enumerate() {
            let mut key = [tet[face[0]], tet[face[1]], tet[face[2]]];
            key.sort_unstable();
            face_count
                .entry(key)
                .and_modify(|e| e.0 += 1)
                .or_insert((1, c, lf));
        }
    }

    let mut result = Vec::new();
    for (key, (count, cell, local_face)) in face_count {
        if count != 1 {
            debug_assert_eq!(count, 2, "face shared by more than two cells");
            continue;
        }
        // All three face vertices share exactly one coordinate value 0 or 1.
        let mut normal = None;
        for axis in 0..3 {
            for (bound, sign) in [(0.0, -1i8), (1.0, 1i8)] {
                if key.iter().all(|&v| vertices[v][axis] == bound) {
                    normal = Some((axis, sign));
                }
            }
        }
        let (axis, sign) =
            normal.unwrap_or_else(|| panic!("boundary face {key:?} not axis aligned (M={m})"));
        result.push(BoundaryFace {
            cell,
            local_face,
            axis,
            sign,
        });
    }
    result.sort_by_key(|f| (f.cell, f.local_face));
    result
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Volume of a cell (det J / 6).
    pub fn cell_volume(&self, cell: usize) -> f64 {
        self.geometry[cell].det / 6.0
    }

    /// Classify every vertex by the set of boundary faces it lies on.
    ///
    /// A vertex on the face x_a = 0 carries −e_a, on x_a = 1 carries +e_a;
    /// edge and corner vertices carry the union. Interior vertices get the
    /// empty set. The classification uses grid indices, not float compares.
    pub fn boundary_vertex_classification(&self) -> Vec<NormalSet> {
        let n = self.m + 1;
        let mut out = vec![NormalSet::EMPTY; self.vertices.len()];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut set = NormalSet::EMPTY;
                    for (axis, idx) in [(0, i), (1, j), (2, k)] {
                        if idx == 0 {
                            set = set.with(axis, -1);
                        }
                        if idx == self.m {
                            set = set.with(axis, 1);
                        }
                    }
                    out[(i * n + j) * n + k] = set;
                }
            }
        }
        out
    }

    /// Map a physical point to (cell, reference coordinates).
    ///
    /// Points outside [0,1]³ are clamped to the boundary. Ties on cell
    /// interfaces resolve to an arbitrary containing cell.
    pub fn locate(&self, x: [f64; 3]) -> (usize, [f64; 3]) {
        let m = self.m;
        let mut cube = [0usize; 3];
        for d in 0..3 {
            let scaled = (x[d].clamp(0.0, 1.0) * m as f64).floor() as usize;
            cube[d] = scaled.min(m - 1);
        }
        let base = 6 * ((cube[0] * m + cube[1]) * m + cube[2]);
        let mut best = (base, [0.0; 3], f64::INFINITY);
        for t in 0..6 {
            let cell = base + t;
            let r = self.reference_coords(cell, x);
            let l0 = 1.0 - r[0] - r[1] - r[2];
            let violation = (-r[0]).max(-r[1]).max(-r[2]).max(-l0);
            if violation < best.2 {
                best = (cell, r, violation);
            }
            if violation <= 1e-12 {
                break;
            }
        }
        (best.0, best.1)
    }

    /// Reference coordinates of a physical point with respect to a cell.
    pub fn reference_coords(&self, cell: usize, x: [f64; 3]) -> [f64; 3] {
        let g = &self.geometry[cell];
        let d = sub(x, g.origin);
        // solve J r = d using the stored inverse transpose: J^{-1} = (invJt)^T
        [
            g.inv_jac_t[0][0] * d[0] + g.inv_jac_t[1][0] * d[1] + g.inv_jac_t[2][0] * d[2],
            g.inv_jac_t[0][1] * d[0] + g.inv_jac_t[1][1] * d[1] + g.inv_jac_t[2][1] * d[2],
            g.inv_jac_t[0][2] * d[0] + g.inv_jac_t[1][2] * d[1] + g.inv_jac_t[2][2] * d[2],
        ]
    }

    /// Physical coordinates of a reference point in a cell.
    pub fn map_point(&self, cell: usize, r: [f64; 3]) -> [f64; 3] {
        let g = &self.geometry[cell];
        let mut x = g.origin;
        for row in 0..3 {
            x[row] += g.jac[row][0] * r[0] + g.jac[row][1] * r[1] + g.jac[row][2] * r[2];
        }
        x
    }
}
