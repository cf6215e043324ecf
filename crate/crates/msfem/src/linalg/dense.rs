//! Dense LU with partial pivoting, the direct fallback for small systems
//! (n ≤ 2000) and the oracle against which the iterative solvers are tested.

use num_complex::Complex64;

/// Solve a dense real system by LU with partial pivoting.
pub fn lu_solve_real(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let ac: Vec<Vec<Complex64>> = a
        .iter()
        .map(|row| row.iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .collect();
    let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let xc = lu_solve_complex(&ac, &bc)?;
    Some(xc.into_iter().take(n).map(|v| v.re).collect())
}

/// Solve a dense complex system by LU with partial pivoting.
pub fn lu_solve_complex(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.len();
    assert!(n <= 2000, "dense fallback limited to n <= 2000");
    assert_eq!(b.len(), n);
    let mut lu: Vec<Vec<Complex64>> = a.to_vec();
    let mut x = b.to_vec();

    for k in 0..n {
        // pivot
        let (pivot_row, pivot_mag) = (k..n)
            .map(|r| (r, lu[r][k].norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pivot_mag == 0.0 {
            return None; // singular
        }
        if pivot_row != k {
            lu.swap(k, pivot_row);
            x.swap(k, pivot_row);
        }
        let pivot = lu[k][k];
        for r in k + 1..n {
            let factor = lu[r][k] / pivot;
            lu[r][k] = factor;
            for c in k + 1..n {
                let sub = factor * lu[k][c];
                lu[r][c] -= sub;
            }
            let sub = factor * x[k];
            x[r] -= sub;
        }
    }
    // back substitution
    for k in (0..n).rev() {
        for c in k + 1..n {
            let sub = lu[k][c] * x[c];
            x[k] -= sub;
        }
        x[k] /= lu[k][k];
    }
    Some(x)
}
