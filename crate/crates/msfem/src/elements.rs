//! Reference tetrahedron Lagrange elements (degrees 1 and 2) and quadrature.
//!
//! Reference tet: vertices (0,0,0), (1,0,0), (0,1,0), (0,0,1), volume 1/6.
//! Barycentric coordinates λ₀ = 1−x−y−z, λ₁ = x, λ₂ = y, λ₃ = z.
//! Degree-2 node order: 4 vertices, then the 6 edge midpoints with edges
//! ordered (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).

/// Edge endpoints of the reference tetrahedron in the canonical order.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Lagrange basis of degree 1 or 2 on the reference tetrahedron.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    pub degree: usize,
    pub nodes: Vec<[f64; 3]>,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Self {
        assert!(degree == 1 || degree == 2, "only degrees 1 and 2 supported");
        let verts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mut nodes: Vec<[f64; 3]> = verts.to_vec();
        if degree == 2 {
            for [a, b] in TET_EDGES {
                nodes.push([
                    0.5 * (verts[a][0] + verts[b][0]),
                    0.5 * (verts[a][1] + verts[b][1]),
                    0.5 * (verts[a][2] + verts[b][2]),
                ]);
            }
        }
        ReferenceElement { degree, nodes }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Values of all basis functions at a reference point.
    pub fn eval_basis(&self, p: [f64; 3]) -> Vec<f64> {
        let l = barycentric(p);
        match self.degree {
            1 => l.to_vec(),
            2 => {
                let mut out = Vec::with_capacity(10);
                for i in 0..4 {
                    out.push(l[i] * (2.0 * l[i] - 1.0));
                }
                for [a, b] in TET_EDGES {
                    out.push(4.0 * l[a] * l[b]);
                }
                out
            }
            _ => unreachable!(),
        }
    }

    /// Reference gradients of all basis functions at a reference point.
    pub fn eval_gradients(&self, p: [f64; 3]) -> Vec<[f64; 3]> {
        let l = barycentric(p);
        match self.degree {
            1 => GRAD_L.to_vec(),
            2 => {
                let mut out = Vec::with_capacity(10);
                for i in 0..4 {
                    out.push(scale(GRAD_L[i], 4.0 * l[i] - 1.0));
                }
                for [a, b] in TET_EDGES {
                    out.push(add(scale(GRAD_L[a], 4.0 * l[b]), scale(GRAD_L[b], 4.0 * l[a])));
                }
                out
            }
            _ => unreachable!(),
        }
    }
}

const GRAD_L: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

fn barycentric(p: [f64; 3]) -> [f64; 4] {
    [1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]]
}

fn scale(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Quadrature rule on the reference tetrahedron; weights sum to 1/6.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
#[error("no tetrahedron quadrature rule of degree {0} (supported: up to 6)")]
pub struct UnsupportedDegree(pub usize);

/// Smallest shipped rule exact for all polynomials of the given total degree.
pub fn quadrature_for(total_degree: usize) -> Result<QuadratureRule, UnsupportedDegree> {
    match total_degree {
        0 | 1 => Ok(centroid_rule()),
        2 => Ok(four_point_rule()),
        3..=5 => Ok(keast_degree5()),
        6 => Ok(keast_degree6()),
        d => Err(UnsupportedDegree(d)),
    }
}

fn centroid_rule() -> QuadratureRule {
    QuadratureRule {
        degree: 1,
        points: vec![[0.25, 0.25, 0.25]],
        weights: vec![1.0 / 6.0],
    }
}

fn four_point_rule() -> QuadratureRule {
    let a = 0.585_410_196_624_968_5; // (5 + 3√5)/20
    let b = 0.138_196_601_125_010_5; // (5 − √5)/20
    let mut points = Vec::new();
    for i in 0..4 {
        let mut l = [b; 4];
        l[i] = a;
        points.push([l[1], l[2], l[3]]);
    }
    QuadratureRule {
        degree: 2,
        points,
        weights: vec![1.0 / 24.0; 4],
    }
}

/// 14-point degree-5 rule (Keast); all weights positive.
fn keast_degree5() -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    push_s31(&mut points, &mut weights, 0.310_885_919_263_300_6, 0.112_687_925_718_015_7);
    push_s31(&mut points, &mut weights, 0.092_735_250_310_891_23, 0.073_493_043_116_361_95);
    push_s22(&mut points, &mut weights, 0.045_503_704_125_649_65, 0.042_546_020_777_081_47);
    QuadratureRule {
        degree: 5,
        points,
        weights,
    }
}

/// 24-point degree-6 rule (Keast); all weights positive.
fn keast_degree6() -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    push_s31(&mut points, &mut weights, 0.214_602_871_259_151_7, 0.039_922_750_258_167_49);
    push_s31(&mut points, &mut weights, 0.040_673_958_534_611_35, 0.010_077_211_055_320_64);
    push_s31(&mut points, &mut weights, 0.322_337_890_142_275_5, 0.055_357_181_543_654_72);
    push_s211(
        &mut points,
        &mut weights,
        0.063_661_001_875_017_53,
        0.269_672_331_458_315_9,
        0.048_214_285_714_285_71,
    );
    QuadratureRule {
        degree: 6,
        points,
        weights,
    }
}

/// Symmetry orbit (a,b,b,b) with a = 1−3b: 4 points.
fn push_s31(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, b: f64, w: f64) {
    let a = 1.0 - 3.0 * b;
    for i in 0..4 {
        let mut l = [b; 4];
        l[i] = a;
        points.push([l[1], l[2], l[3]]);
        weights.push(w / 6.0);
    }
}

/// Symmetry orbit (a,a,b,b) with a = 1/2−b: 6 points.
fn push_s22(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, b: f64, w: f64) {
    let a = 0.5 - b;
    let pairs = [
        [a, a, b, b],
        [a, b, a, b],
        [a, b, b, a],
        [b, a, a, b],
        [b, a, b, a],
        [b, b, a, a],
    ];
    for l in pairs {
        points.push([l[1], l[2], l[3]]);
        weights.push(w / 6.0);
    }
}

/// Symmetry orbit (a,a,b,c) with c = 1−2a−b: 12 points.
fn push_s211(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    let c = 1.0 - 2.0 * a - b;
    let mut seen = Vec::new();
    let vals = [a, a, b, c];
    permute_distinct(&vals, &mut seen);
    for l in seen {
        points.push([l[1], l[2], l[3]]);
        weights.push(w / 6.0);
    }
}

fn permute_distinct(vals: &[f64; 4], out: &mut Vec<[f64; 4]>) {
    let mut idx = [0, 1, 2, 3];
    // all 24 index permutations, deduplicated by value pattern
    let mut perms: Vec<[f64; 4]> = Vec::new();
    heap_permutations(&mut idx, 4, &mut |p| {
        perms.push([vals[p[0]], vals[p[1]], vals[p[2]], vals[p[3]]]);
    });
    for p in perms {
        if !out.iter().any(|q| q == &p) {
            out.push(p);
        }
    }
}

fn heap_permutations(idx: &mut [usize; 4], k: usize, f: &mut impl FnMut(&[usize; 4])) {
    if k == 1 {
        f(idx);
        return;
    }
    for i in 0..k {
        heap_permutations(idx, k - 1, f);
        if k % 2 == 0 {
            idx.swap(i, k - 1);
        } else {
            idx.swap(0, k - 1);
        }
    }
}
