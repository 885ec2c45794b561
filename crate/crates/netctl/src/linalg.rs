//! Hardware-precision dense linear algebra on top of the system LAPACK.
//!
//! Everything here is double precision; extended-precision work lives in
//! [`crate::mp`]. Matrices cross the FFI boundary in column-major buffers.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[link(name = "openblas")]
extern "C" {
    fn dgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        wr: *mut f64,
        wi: *mut f64,
        vl: *mut f64,
        ldvl: *const i32,
        vr: *mut f64,
        ldvr: *const i32,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );
    fn dsyev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );
    fn dgees_(
        jobvs: *const u8,
        sort: *const u8,
        select: Option<extern "C" fn(*const f64, *const f64) -> i32>,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        sdim: *mut i32,
        wr: *mut f64,
        wi: *mut f64,
        vs: *mut f64,
        ldvs: *const i32,
        work: *mut f64,
        lwork: *const i32,
        bwork: *mut i32,
        info: *mut i32,
    );
    fn dgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut f64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut f64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn zgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );
}

fn to_col_major(a: &Array2<f64>) -> Vec<f64> {
    a.t().iter().copied().collect()
}

fn to_col_major_c(a: &Array2<Complex64>) -> Vec<Complex64> {
    a.t().iter().copied().collect()
}

fn from_col_major(buf: &[f64], rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| buf[j * rows + i])
}

fn from_col_major_c(buf: &[Complex64], rows: usize, cols: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| buf[j * rows + i])
}

fn square_dim(a: &Array2<f64>, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Eigen(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// Eigenvalues of a general real matrix.
pub fn eigenvalues(a: &Array2<f64>) -> Result<Vec<Complex64>> {
    let (vals, _) = dgeev(a, false)?;
    Ok(vals)
}

/// Eigenvalues and right eigenvectors of a general real matrix.
///
/// Eigenvectors come back as the columns of a complex matrix; conjugate pairs
/// returned by LAPACK are expanded exactly, so for a real input the set of
/// eigenpairs is closed under conjugation.
pub fn eigen(a: &Array2<f64>) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    let (vals, vecs) = dgeev(a, true)?;
    Ok((vals, vecs.expect("eigenvectors requested")))
}

fn dgeev(a: &Array2<f64>, vectors: bool) -> Result<(Vec<Complex64>, Option<Array2<Complex64>>)> {
    let n = square_dim(a, "eigenproblem matrix")?;
    if n == 0 {
        return Err(Error::Eigen("empty matrix".into()));
    }
    let ni = n as i32;
    let mut buf = to_col_major(a);
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut vr = vec![0.0; if vectors { n * n } else { 1 }];
    let jobvr = if vectors { b"V" } else { b"N" };
    let mut info = 0i32;

    // workspace query
    let mut wkopt = 0.0f64;
    unsafe {
        dgeev_(
            b"N".as_ptr(),
            jobvr.as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            &mut wkopt,
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(format!("dgeev workspace query failed: info={info}")));
    }
    let lwork = wkopt as i32;
    let mut work = vec![0.0; lwork as usize];
    unsafe {
        dgeev_(
            b"N".as_ptr(),
            jobvr.as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(format!("dgeev failed: info={info}")));
    }

    let vals: Vec<Complex64> = wr
        .iter()
        .zip(&wi)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();

    if !vectors {
        return Ok((vals, None));
    }

    // Unpack LAPACK's packed real/imaginary eigenvector columns.
    let mut v = Array2::<Complex64>::zeros((n, n));
    let mut j = 0;
    while j < n {
        if wi[j] == 0.0 {
            for i in 0..n {
                v[(i, j)] = Complex64::new(vr[j * n + i], 0.0);
            }
            j += 1;
        } else {
            for i in 0..n {
                let re = vr[j * n + i];
                let im = vr[(j + 1) * n + i];
                v[(i, j)] = Complex64::new(re, im);
                v[(i, j + 1)] = Complex64::new(re, -im);
            }
            j += 2;
        }
    }
    Ok((vals, Some(v)))
}

/// Spectral decomposition of a real symmetric matrix.
///
/// Returns eigenvalues ascending and orthonormal eigenvectors as columns.
pub fn sym_eigen(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = square_dim(a, "symmetric eigenproblem matrix")?;
    let ni = n as i32;
    let mut buf = to_col_major(a);
    let mut w = vec![0.0; n];
    let mut info = 0i32;
    let mut wkopt = 0.0f64;
    unsafe {
        dsyev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wkopt,
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(format!("dsyev workspace query failed: info={info}")));
    }
    let lwork = wkopt as i32;
    let mut work = vec![0.0; lwork as usize];
    unsafe {
        dsyev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(format!("dsyev failed: info={info}")));
    }
    Ok((w, from_col_major(&buf, n, n)))
}

extern "C" fn select_stable(re: *const f64, _im: *const f64) -> i32 {
    unsafe {
        if *re < 0.0 {
            1
        } else {
            0
        }
    }
}

/// Real Schur decomposition with eigenvalues in the open left half-plane
/// ordered to the leading block.
///
/// Returns the orthogonal factor `Z` and the number of selected (stable)
/// eigenvalues; the first `sdim` columns of `Z` span the stable invariant
/// subspace.
pub fn ordered_schur_stable(a: &Array2<f64>) -> Result<(Array2<f64>, usize)> {
    let n = square_dim(a, "Schur matrix")?;
    let ni = n as i32;
    let mut buf = to_col_major(a);
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut vs = vec![0.0; n * n];
    let mut sdim = 0i32;
    let mut info = 0i32;
    let mut bwork = vec![0i32; n];
    let mut wkopt = 0.0f64;
    unsafe {
        dgees_(
            b"V".as_ptr(),
            b"S".as_ptr(),
            Some(select_stable),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            &mut sdim,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            vs.as_mut_ptr(),
            &ni,
            &mut wkopt,
            &-1,
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Riccati(format!("dgees workspace query failed: info={info}")));
    }
    let lwork = wkopt as i32;
    let mut work = vec![0.0; lwork as usize];
    unsafe {
        dgees_(
            b"V".as_ptr(),
            b"S".as_ptr(),
            Some(select_stable),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            &mut sdim,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            vs.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &lwork,
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Riccati(format!("dgees failed: info={info}")));
    }
    Ok((from_col_major(&vs, n, n), sdim as usize))
}

/// Solve `A X = B` for real square `A`.
pub fn solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a, "linear system matrix")?;
    if b.nrows() != n {
        return Err(Error::Eigen(format!(
            "rhs has {} rows, expected {n}",
            b.nrows()
        )));
    }
    let nrhs = b.ncols() as i32;
    let ni = n as i32;
    let mut abuf = to_col_major(a);
    let mut bbuf = to_col_major(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        dgesv_(
            &ni,
            &nrhs,
            abuf.as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            bbuf.as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(format!("dgesv failed: info={info} (singular matrix?)")));
    }
    Ok(from_col_major(&bbuf, n, b.ncols()))
}

/// Inverse of a real square matrix.
pub fn inverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a, "matrix")?;
    solve(a, &Array2::eye(n))
}

/// Solve `A X = B` for complex square `A`.
pub fn complex_solve(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Eigen("complex system matrix must be square".into()));
    }
    if b.nrows() != n {
        return Err(Error::Eigen(format!(
            "rhs has {} rows, expected {n}",
            b.nrows()
        )));
    }
    let nrhs = b.ncols() as i32;
    let ni = n as i32;
    let mut abuf = to_col_major_c(a);
    let mut bbuf = to_col_major_c(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgesv_(
            &ni,
            &nrhs,
            abuf.as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            bbuf.as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigen(format!("zgesv failed: info={info}")));
    }
    Ok(from_col_major_c(&bbuf, n, b.ncols()))
}

/// Inverse of a complex square matrix.
pub fn complex_inverse(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    let eye = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    complex_solve(a, &eye)
}

/// One-norm (max column sum) of a complex matrix.
pub fn one_norm_c(a: &Array2<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Frobenius norm of a real matrix.
pub fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve the Lyapunov equation `A^T X + X A = -R` through the
/// eigendecomposition of `A`; valid when no two eigenvalues of `A` sum to
/// zero (in particular for Hurwitz `A`). Returns the symmetrized real part.
pub fn lyapunov_transposed(a: &Array2<f64>, r: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a, "Lyapunov matrix")?;
    let (vals, v) = eigen(a)?;
    let vc = v.mapv(|z| z);
    let rt = r.mapv(|x| Complex64::new(x, 0.0));
    // R~ = V^T R V
    let vt = vc.t().to_owned();
    let rtil = vt.dot(&rt).dot(&vc);
    let mut xtil = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let s = vals[i] + vals[j];
            if s.norm() < 1e-300 {
                return Err(Error::Eigen(
                    "Lyapunov solve: eigenvalue pair sums to zero".into(),
                ));
            }
            xtil[(i, j)] = -rtil[(i, j)] / s;
        }
    }
    // X = V^{-T} X~ V^{-1}
    let vinv = complex_inverse(&vc)?;
    let x = vinv.t().to_owned().dot(&xtil).dot(&vinv);
    let mut out = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = 0.5 * (x[(i, j)].re + x[(j, i)].re);
        }
    }
    Ok(out)
}

/// Symmetric square root and inverse square root of an SPD matrix.
pub fn sym_sqrt_pair(r: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let n = square_dim(r, "SPD matrix")?;
    let (w, u) = sym_eigen(r)?;
    if w.iter().any(|&x| x <= 0.0) {
        return Err(Error::Config(format!(
            "matrix is not positive definite (min eigenvalue {:.3e})",
            w.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    let mut sq = Array2::<f64>::zeros((n, n));
    let mut isq = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            let mut si = 0.0;
            for k in 0..n {
                let f = u[(i, k)] * u[(j, k)];
                s += f * w[k].sqrt();
                si += f / w[k].sqrt();
            }
            sq[(i, j)] = s;
            isq[(i, j)] = si;
        }
    }
    Ok((sq, isq))
}

/// Max real part over the spectrum of a real matrix.
pub fn spectral_abscissa(a: &Array2<f64>) -> Result<f64> {
    let vals = eigenvalues(a)?;
    Ok(vals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Dense complex matrix-vector product `A x`.
pub fn matvec_c(a: &Array2<Complex64>, x: &Array1<Complex64>) -> Array1<Complex64> {
    let mut out = Array1::<Complex64>::zeros(a.nrows());
    for i in 0..a.nrows() {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..a.ncols() {
            acc += a[(i, j)] * x[j];
        }
        out[i] = acc;
    }
    out
}
