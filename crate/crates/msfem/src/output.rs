//! Output emission: legacy-VTK snapshots, density line samples and point
//! probes, and the per-step diagnostics CSV.

use crate::mesh::Mesh;
use crate::space::{ScalarField, VectorField};
use crate::stepper::DiagnosticsRow;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: String,
    #[source]
    pub source: std::io::Error,
}

fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    let wrap = |source: std::io::Error| OutputError {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(wrap)?;
        }
    }
    let mut f = std::fs::File::create(path).map_err(wrap)?;
    f.write_all(contents.as_bytes()).map_err(wrap)
}

/// Legacy ASCII VTK unstructured grid carrying ρ = |Ψ|², Re Ψ, Im Ψ and A
/// as point data at the mesh vertices (cell type 10 = tetrahedron).
pub fn emit_vtk(
    path: &Path,
    mesh: &Mesh,
    psi: &ScalarField,
    a: &VectorField,
    title: &str,
) -> Result<(), OutputError> {
    let degree = psi.space.degree;
    let nv = mesh.n_vertices();
    let n_axis = mesh.m * degree + 1;
    // vertex (i,j,k) of the mesh grid is node (i·r, j·r, k·r) of the dof grid
    let vert_node = |v: usize| {
        let nvx = mesh.m + 1;
        let i = v / (nvx * nvx);
        let j = (v / nvx) % nvx;
        let k = v % nvx;
        ((i * degree) * n_axis + j * degree) * n_axis + k * degree
    };

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{title}");
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {nv} double");
    for v in &mesh.vertices {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]);
    }
    let nc = mesh.n_cells();
    let _ = writeln!(out, "CELLS {nc} {}", 5 * nc);
    for tet in &mesh.cells {
        let _ = writeln!(out, "4 {} {} {} {}", tet[0], tet[1], tet[2], tet[3]);
    }
    let _ = writeln!(out, "CELL_TYPES {nc}");
    for _ in 0..nc {
        out.push_str("10\n");
    }
    let _ = writeln!(out, "POINT_DATA {nv}");
    out.push_str("SCALARS rho double 1\nLOOKUP_TABLE default\n");
    for v in 0..nv {
        let _ = writeln!(out, "{:.17e}", psi.coeffs[vert_node(v)].norm_sqr());
    }
    out.push_str("SCALARS psi_re double 1\nLOOKUP_TABLE default\n");
    for v in 0..nv {
        let _ = writeln!(out, "{:.17e}", psi.coeffs[vert_node(v)].re);
    }
    out.push_str("SCALARS psi_im double 1\nLOOKUP_TABLE default\n");
    for v in 0..nv {
        let _ = writeln!(out, "{:.17e}", psi.coeffs[vert_node(v)].im);
    }
    out.push_str("VECTORS A double\n");
    for v in 0..nv {
        let n = vert_node(v);
        let _ = writeln!(
            out,
            "{:.17e} {:.17e} {:.17e}",
            a.coeffs[3 * n],
            a.coeffs[3 * n + 1],
            a.coeffs[3 * n + 2]
        );
    }
    write_file(path, &out)
}

/// Density samples along the main diagonal x₁ = x₂ = x₃, parameterized by
/// arc length s ∈ [0, √3]. The paper-style probe points are fixed.
pub struct LineSampler {
    pub n_points: usize,
    pub probes: Vec<[f64; 3]>,
    line_rows: String,
    probe_rows: String,
}

pub const DEFAULT_PROBES: [[f64; 3]; 3] = [
    [0.25, 0.5, 0.75],
    [0.5, 0.5, 0.5],
    [0.4, 0.5, 0.6],
];

impl LineSampler {
    pub fn new(n_points: usize) -> Self {
        LineSampler {
            n_points,
            probes: DEFAULT_PROBES.to_vec(),
            line_rows: "t,s,rho\n".to_string(),
            probe_rows: "t,rho_p1,rho_p2,rho_p3\n".to_string(),
        }
    }

    /// Record the density of Ψ at one instant.
    pub fn sample(&mut self, t: f64, psi: &ScalarField) {
        let sqrt3 = 3.0f64.sqrt();
        for i in 0..self.n_points {
            let u = i as f64 / (self.n_points - 1).max(1) as f64;
            let x = [u, u, u];
            let rho = psi.eval_at(x).norm_sqr();
            let _ = writeln!(self.line_rows, "{t},{:.17e},{:.17e}", u * sqrt3, rho);
        }
        let vals: Vec<f64> = self
            .probes
            .iter()
            .map(|&p| psi.eval_at(p).norm_sqr())
            .collect();
        let _ = writeln!(
            self.probe_rows,
            "{t},{:.17e},{:.17e},{:.17e}",
            vals[0], vals[1], vals[2]
        );
    }

    pub fn write_line_csv(&self, path: &Path) -> Result<(), OutputError> {
        write_file(path, &self.line_rows)
    }

    pub fn write_probes_csv(&self, path: &Path) -> Result<(), OutputError> {
        write_file(path, &self.probe_rows)
    }
}

/// Diagnostics CSV: one row per step, full precision.
pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = String::from(
        "k,t,mass,energy,psi_h1,a_ht1,maxwell_iters,maxwell_residual,schrodinger_iters,schrodinger_residual\n",
    );
    for r in rows {
        let (mi, mr) = r
            .maxwell
            .map_or((String::new(), String::new()), |s| {
                (s.iterations.to_string(), format!("{:.17e}", s.relative_residual))
            });
        let (si, sr) = r
            .schrodinger
            .map_or((String::new(), String::new()), |s| {
                (s.iterations.to_string(), format!("{:.17e}", s.relative_residual))
            });
        let _ = writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{mi},{mr},{si},{sr}",
            r.k, r.t, r.mass, r.energy, r.psi_h1, r.a_ht1
        );
    }
    out
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticsRow]) -> Result<(), OutputError> {
    write_file(path, &diagnostics_csv(rows))
}

/// Write any text output (convergence tables, etc).
pub fn write_text(path: &Path, contents: &str) -> Result<(), OutputError> {
    write_file(path, contents)
}
