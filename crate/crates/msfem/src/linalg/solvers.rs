//! Jacobi-preconditioned Krylov solvers for the two per-step systems.
//!
//! The Maxwell update produces a real symmetric positive definite matrix and
//! is solved with conjugate gradients. The Schrödinger update produces a
//! complex matrix with symmetric real part and mass-dominated imaginary part;
//! stabilized bi-conjugate gradients handles it (and any complex symmetric
//! system) without requiring Hermitian structure.

use super::csr::CsrMatrix;
use num_complex::Complex64;

/// Outcome of one linear solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    /// ‖b − Ax‖ / ‖b‖, recomputed from scratch at exit.
    pub relative_residual: f64,
    pub converged: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("solver did not converge: {0:?}")]
    NotConverged(SolveReport),
    #[error("solver breakdown (zero inner product) after {0:?}")]
    Breakdown(SolveReport),
    #[error("dimension mismatch: matrix is {n}×{n}, rhs has {rhs}")]
    Dimension { n: usize, rhs: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    pub rtol: f64,
    /// Iteration cap as a multiple of the system size.
    pub max_iter_factor: usize,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            rtol: 1e-10,
            max_iter_factor: 10,
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm2_c(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Preconditioned conjugate gradients for real SPD systems.
pub fn solve_spd(
    a: &CsrMatrix<f64>,
    b: &[f64],
    opts: SolveOpts,
) -> Result<(Vec<f64>, SolveReport), SolveError> {
    let n = a.n();
    if b.len() != n {
        return Err(SolveError::Dimension { n, rhs: b.len() });
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let max_iter = (opts.max_iter_factor * n).max(50);

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            let report = final_report_real(a, b, &x, bnorm, iterations, opts.rtol);
            return if report.converged {
                Ok((x, report))
            } else {
                Err(SolveError::Breakdown(report))
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= opts.rtol * bnorm {
            // recompute the true residual before accepting
            let report = final_report_real(a, b, &x, bnorm, iterations, opts.rtol);
            if report.converged {
                return Ok((x, report));
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolveError::NotConverged(final_report_real(
        a, b, &x, bnorm, iterations, opts.rtol,
    )))
}

fn final_report_real(
    a: &CsrMatrix<f64>,
    b: &[f64],
    x: &[f64],
    bnorm: f64,
    iterations: usize,
    rtol: f64,
) -> SolveReport {
    let ax = a.matvec_alloc(x);
    let res: f64 = b
        .iter()
        .zip(&ax)
        .map(|(bi, axi)| (bi - axi) * (bi - axi))
        .sum::<f64>()
        .sqrt();
    let relative_residual = res / bnorm;
    SolveReport {
        iterations,
        relative_residual,
        converged: relative_residual <= rtol,
    }
}

/// Preconditioned BiCGStab for the complex systems of the wave-function
/// step. Valid for complex symmetric matrices and, more generally, for any
/// nonsingular complex system; the step matrices here are mass dominated and
/// converge in a handful of iterations.
pub fn solve_complex(
    a: &CsrMatrix<Complex64>,
    b: &[Complex64],
    opts: SolveOpts,
) -> Result<(Vec<Complex64>, SolveReport), SolveError> {
    let n = a.n();
    if b.len() != n {
        return Err(SolveError::Dimension { n, rhs: b.len() });
    }
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm2_c(b);
    if bnorm == 0.0 {
        return Ok((
            vec![zero; n],
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }
    let inv_diag: Vec<Complex64> = a
        .diagonal()
        .iter()
        .map(|&d| {
            if d.norm_sqr() > 0.0 {
                d.inv()
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    let max_iter = (opts.max_iter_factor * n).max(50);

    let dot = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    };

    let mut x = vec![zero; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut rho = Complex64::new(1.0, 0.0);
    let mut alpha = Complex64::new(1.0, 0.0);
    let mut omega = Complex64::new(1.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() == 0.0 {
            let report = final_report_complex(a, b, &x, bnorm, iterations, opts.rtol);
            return if report.converged {
                Ok((x, report))
            } else {
                Err(SolveError::Breakdown(report))
            };
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat: Vec<Complex64> = p.iter().zip(&inv_diag).map(|(pi, di)| pi * di).collect();
        a.matvec(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.norm() == 0.0 {
            let report = final_report_complex(a, b, &x, bnorm, iterations, opts.rtol);
            return if report.converged {
                Ok((x, report))
            } else {
                Err(SolveError::Breakdown(report))
            };
        }
        alpha = rho / denom;
        let s: Vec<Complex64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm2_c(&s) <= opts.rtol * bnorm {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            let report = final_report_complex(a, b, &x, bnorm, iterations, opts.rtol);
            if report.converged {
                return Ok((x, report));
            }
            r = s;
            continue;
        }
        let s_hat: Vec<Complex64> = s.iter().zip(&inv_diag).map(|(si, di)| si * di).collect();
        let t = a.matvec_alloc(&s_hat);
        let tt = dot(&t, &t);
        if tt.norm() == 0.0 {
            let report = final_report_complex(a, b, &x, bnorm, iterations, opts.rtol);
            return if report.converged {
                Ok((x, report))
            } else {
                Err(SolveError::Breakdown(report))
            };
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm2_c(&r) <= opts.rtol * bnorm {
            let report = final_report_complex(a, b, &x, bnorm, iterations, opts.rtol);
            if report.converged {
                return Ok((x, report));
            }
        }
    }
    Err(SolveError::NotConverged(final_report_complex(
        a, b, &x, bnorm, iterations, opts.rtol,
    )))
}

fn final_report_complex(
    a: &CsrMatrix<Complex64>,
    b: &[Complex64],
    x: &[Complex64],
    bnorm: f64,
    iterations: usize,
    rtol: f64,
) -> SolveReport {
    let ax = a.matvec_alloc(x);
    let res: f64 = b
        .iter()
        .zip(&ax)
        .map(|(bi, axi)| (bi - axi).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let relative_residual = res / bnorm;
    SolveReport {
        iterations,
        relative_residual,
        converged: relative_residual <= rtol,
    }
}
