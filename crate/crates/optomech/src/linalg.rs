//! Dense linear-algebra utilities shared by the dynamics modules: matrix
//! exponential, Lyapunov steady-state solve, and the block-exponential
//! construction of discrete-time propagation pairs.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Residual tolerance for the Lyapunov steady-state solve, relative to the
/// magnitude of the terms the equation balances. The drift and solution
/// products A C and C A^T cancel against the diffusion matrix, so the
/// natural residual scale is the larger of |A||C| and |D|; normalizing by
/// |D| alone would reject healthy solves whenever the steady state
/// amplifies the noise strongly.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;

// Degree-13 Pade numerator coefficients for the matrix exponential.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the degree-13 approximant is accurate without
// scaling (Higham's theta_13).
const PADE13_THETA: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant. Accurate to machine precision for well-scaled inputs.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let s = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = a * 2.0_f64.powi(-(s as i32));
    let b = &PADE13;

    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
        + b[7] * &a6
        + b[5] * &a4
        + b[3] * &a2
        + b[1] * &id;
    let u = &a * u_inner;
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &id;

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lhs
        .lu()
        .solve(&rhs)
        .expect("Pade denominator is nonsingular for scaled matrices");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Largest real part among the eigenvalues of a real square matrix.
pub fn max_re_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Solves the continuous-time Lyapunov equation A C + C A^T + D = 0 for
/// symmetric C by Kronecker vectorization and LU factorization, then
/// verifies the residual against [`LYAPUNOV_RESIDUAL_TOL`].
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "drift must be square");
    assert_eq!((d.nrows(), d.ncols()), (n, n), "diffusion must match drift");

    // Column-major vectorization: vec(A C) = (I kron A) vec(C) and
    // vec(C A^T) = (A kron I) vec(C).
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(a) + a.kronecker(&id);
    let rhs = DMatrix::from_column_slice(n * n, 1, d.as_slice());
    let sol = k
        .lu()
        .solve(&(-rhs))
        .ok_or_else(|| Error::InvalidParameter {
            name: "drift",
            reason: "singular Lyapunov system (drift has an eigenvalue pair summing to zero)"
                .into(),
        })?;
    let c = DMatrix::from_column_slice(n, n, sol.as_slice());
    let c = (&c + c.transpose()) * 0.5;

    let residual = (a * &c + &c * a.transpose() + d).amax();
    let scale = d.amax().max(a.amax() * c.amax()).max(1.0);
    let tolerance = LYAPUNOV_RESIDUAL_TOL * scale;
    if residual > tolerance {
        return Err(Error::LyapunovResidual {
            residual,
            tolerance,
        });
    }
    Ok(c)
}

/// One-step propagation pair for the moment equation dC/dt = A C + C A^T + D
/// over a step `h`: returns (Phi, Q) with C(t + h) = Phi C(t) Phi^T + Q.
///
/// Both blocks come from one exponential of the block matrix
/// [[A, D], [0, -A^T]] h, whose upper-right block times Phi^T is the
/// accumulated noise Q. This is exact for constant A and D.
pub fn propagation_pair(a: &DMatrix<f64>, d: &DMatrix<f64>, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * h));
    block.view_mut((0, n), (n, n)).copy_from(&(d * h));
    block
        .view_mut((n, n), (n, n))
        .copy_from(&(-a.transpose() * h));
    let e = expm(&block);
    let phi = e.view((0, 0), (n, n)).into_owned();
    let f12 = e.view((0, n), (n, n)).into_owned();
    let q = &f12 * phi.transpose();
    let q = (&q + q.transpose()) * 0.5;
    (phi, q)
}
