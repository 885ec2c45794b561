//! Cyclic Jacobi eigensolver for real symmetric matrices in extended
//! precision.
//!
//! The kernel is precision-agnostic: plane rotations annihilate off-diagonal
//! entries sweep by sweep until the off-diagonal norm falls below
//! `||W||_F * 10^-(digits+5)`. A hardware-precision spectral decomposition is
//! used as a warm start: its eigenvector basis, re-orthonormalized in
//! extended precision so the similarity stays exact, removes most of the
//! off-diagonal mass up front and leaves the sweeps to do the last
//! `digits - 16` decimal digits.

use rug::{Assign, Float};

use super::matrix::MpMat;
use super::PrecisionConfig;
use crate::error::{Error, Result};
use crate::linalg;

/// Spectral decomposition of a symmetric matrix: eigenvalues ascending,
/// eigenvectors as the corresponding columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<Float>,
    pub vectors: MpMat,
    pub sweeps: usize,
    pub off_norm: Float,
}

const WARM_START_MIN_DIM: usize = 12;

/// Full spectral decomposition by cyclic Jacobi.
pub fn jacobi_eigen(
    w: &MpMat,
    prec: &PrecisionConfig,
    max_sweeps: usize,
    warm_start: bool,
) -> Result<SymEigen> {
    assert_eq!(w.rows(), w.cols(), "Jacobi needs a square matrix");
    let n = w.rows();
    let bits = w.bits();

    if n == 0 {
        return Err(Error::Numerical("empty matrix in Jacobi eigensolver".into()));
    }
    if n == 1 {
        return Ok(SymEigen {
            values: vec![w.get(0, 0).clone()],
            vectors: MpMat::identity(1, bits),
            sweeps: 0,
            off_norm: Float::new(bits),
        });
    }

    let frob = w.frob();
    if frob.is_zero() {
        return Ok(SymEigen {
            values: (0..n).map(|_| Float::new(bits)).collect(),
            vectors: MpMat::identity(n, bits),
            sweeps: 0,
            off_norm: Float::new(bits),
        });
    }

    // stop when off(A) <= ||W|| * 10^-(digits+5)
    let mut stop_tol = prec.pow10(-(prec.digits() as i32 + 5));
    stop_tol *= &frob;
    // entries this small cannot move the off-norm past the stop threshold
    let mut skip_tol = stop_tol.clone();
    skip_tol /= 10 * n as u32;

    let (mut a, mut v) = if warm_start && n >= WARM_START_MIN_DIM {
        warm_start_basis(w, bits)?
    } else {
        (w.clone(), MpMat::identity(n, bits))
    };

    let mut t1 = Float::new(bits);
    let mut t2 = Float::new(bits);
    let mut t3 = Float::new(bits);
    let mut theta = Float::new(bits);
    let mut tan = Float::new(bits);
    let mut c = Float::new(bits);
    let mut s = Float::new(bits);
    let mut h = Float::new(bits);

    let mut sweeps = 0;
    let mut off = off_norm(&a, &mut t1);
    while off > stop_tol {
        if sweeps >= max_sweeps {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge in {max_sweeps} sweeps; off-diagonal norm {:.3e}",
                off.to_f64()
            )));
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                t1.assign(a.get(p, q));
                t1.abs_mut();
                if t1 <= skip_tol {
                    continue;
                }

                // rotation angle from the classic tangent formula
                theta.assign(a.get(q, q));
                theta -= a.get(p, p);
                t2.assign(a.get(p, q));
                t2 *= 2u32;
                theta /= &t2;

                tan.assign(&theta);
                tan.abs_mut();
                t2.assign(&theta);
                t2.square_mut();
                t2 += 1u32;
                t2.sqrt_mut();
                tan += &t2;
                tan.recip_mut();
                if theta.is_sign_negative() && !theta.is_zero() {
                    // tan carries theta's sign
                    tan = -tan;
                }

                c.assign(&tan);
                c.square_mut();
                c += 1u32;
                c.sqrt_mut();
                c.recip_mut();
                s.assign(&tan);
                s *= &c;

                // diagonal and pivot update: exact annihilation of a_pq
                h.assign(&tan);
                h *= a.get(p, q);
                *a.get_mut(p, p) -= &h;
                *a.get_mut(q, q) += &h;
                a.get_mut(p, q).assign(0);
                a.get_mut(q, p).assign(0);

                let cols = n;
                for j in 0..p {
                    a.rotate_pair(j * cols + p, j * cols + q, &c, &s, &mut t1, &mut t2, &mut t3);
                }
                for j in (p + 1)..q {
                    a.rotate_pair(p * cols + j, j * cols + q, &c, &s, &mut t1, &mut t2, &mut t3);
                }
                for j in (q + 1)..n {
                    a.rotate_pair(p * cols + j, q * cols + j, &c, &s, &mut t1, &mut t2, &mut t3);
                }
                for j in 0..n {
                    v.rotate_pair(j * cols + p, j * cols + q, &c, &s, &mut t1, &mut t2, &mut t3);
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a, &mut t1);
    }

    // sort ascending and permute eigenvector columns to match
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a.get(i, i).partial_cmp(a.get(j, j)).unwrap());
    let values: Vec<Float> = idx.iter().map(|&i| a.get(i, i).clone()).collect();
    let mut vectors = MpMat::zeros(n, n, bits);
    for (newj, &oldj) in idx.iter().enumerate() {
        for i in 0..n {
            vectors.get_mut(i, newj).assign(v.get(i, oldj));
        }
    }

    Ok(SymEigen {
        values,
        vectors,
        sweeps,
        off_norm: off,
    })
}

/// Hardware spectral basis, promoted and re-orthonormalized so that the
/// similarity transform preserves eigenvalues to working precision.
fn warm_start_basis(w: &MpMat, bits: u32) -> Result<(MpMat, MpMat)> {
    let demoted = w.to_array();
    if demoted.iter().any(|x| !x.is_finite()) {
        return Ok((w.clone(), MpMat::identity(w.rows(), bits)));
    }
    let (_, q) = match linalg::sym_eigen(&demoted) {
        Ok(r) => r,
        Err(_) => return Ok((w.clone(), MpMat::identity(w.rows(), bits))),
    };
    let mut qm = MpMat::from_array(&q, bits);
    qm.mgs_orthonormalize();
    let wq = w.matmul(&qm);
    let a = qm.t_matmul(&wq);
    Ok((a, qm))
}

fn off_norm(a: &MpMat, t: &mut Float) -> Float {
    let n = a.rows();
    let bits = a.bits();
    let mut acc = Float::new(bits);
    for i in 0..n {
        for j in (i + 1)..n {
            t.assign(a.get(i, j));
            t.square_mut();
            acc += &*t;
        }
    }
    acc *= 2u32;
    acc.sqrt()
}

/// Mean residual `<|W v_i - mu_i v_i|>` over all eigenpairs, in extended
/// precision.
pub fn mean_eigen_residual(w: &MpMat, eig: &SymEigen) -> Float {
    let n = w.rows();
    let bits = w.bits();
    let mut acc = Float::new(bits);
    let mut t = Float::new(bits);
    for (j, mu) in eig.values.iter().enumerate() {
        let mut norm2 = Float::new(bits);
        for i in 0..n {
            // r_i = (W v_j)_i - mu v_ij
            let mut r = Float::new(bits);
            for k in 0..n {
                t.assign(w.get(i, k));
                t *= eig.vectors.get(k, j);
                r += &t;
            }
            t.assign(mu);
            t *= eig.vectors.get(i, j);
            r -= &t;
            r.square_mut();
            norm2 += &r;
        }
        norm2.sqrt_mut();
        acc += &norm2;
    }
    acc /= n as u32;
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn prec(digits: u32) -> PrecisionConfig {
        PrecisionConfig::new(digits).unwrap()
    }

    #[test]
    fn diagonal_matrix_is_sorted() {
        let p = prec(50);
        let w = MpMat::from_array(&array![[2.0, 0.0], [0.0, 1.0]], p.bits());
        let eig = jacobi_eigen(&w, &p, 50, false).unwrap();
        assert_eq!(eig.values[0].to_f64(), 1.0);
        assert_eq!(eig.values[1].to_f64(), 2.0);
        // eigenvector of the smallest eigenvalue is e_2
        assert_eq!(eig.vectors.get(0, 0).to_f64().abs(), 0.0);
        assert_eq!(eig.vectors.get(1, 0).to_f64().abs(), 1.0);
    }

    #[test]
    fn two_by_two_analytic() {
        let p = prec(60);
        let w = MpMat::from_array(&array![[2.0, 1.0], [1.0, 2.0]], p.bits());
        let eig = jacobi_eigen(&w, &p, 50, false).unwrap();
        assert!((eig.values[0].to_f64() - 1.0).abs() < 1e-14);
        assert!((eig.values[1].to_f64() - 3.0).abs() < 1e-14);
        let res = mean_eigen_residual(&w, &eig);
        assert!(res < p.residual_bound());
    }

    #[test]
    fn residual_contract_random_spd() {
        let p = prec(60);
        // deterministic SPD matrix: G G^T + I
        let n = 14;
        let g = ndarray::Array2::from_shape_fn((n, n), |(i, j)| {
            ((i * 31 + j * 17 + 7) % 13) as f64 / 13.0 - 0.5
        });
        let spd = g.dot(&g.t()) + ndarray::Array2::<f64>::eye(n);
        let w = MpMat::from_array(&spd, p.bits());
        for warm in [false, true] {
            let eig = jacobi_eigen(&w, &p, 50, warm).unwrap();
            let res = mean_eigen_residual(&w, &eig);
            assert!(
                res < p.residual_bound(),
                "warm={warm}: residual {:.3e} exceeds bound",
                res.to_f64()
            );
            // ascending order
            for k in 1..n {
                assert!(eig.values[k - 1] <= eig.values[k]);
            }
        }
    }

    #[test]
    fn warm_and_cold_agree() {
        let p = prec(40);
        let n = 16;
        let g = ndarray::Array2::from_shape_fn((n, n), |(i, j)| {
            (((i * 7 + j * 3) % 11) as f64) / 11.0
        });
        let spd = g.dot(&g.t()) + ndarray::Array2::<f64>::eye(n) * 0.1;
        let w = MpMat::from_array(&spd, p.bits());
        let cold = jacobi_eigen(&w, &p, 50, false).unwrap();
        let warm = jacobi_eigen(&w, &p, 50, true).unwrap();
        for k in 0..n {
            let diff = Float::with_val(p.bits(), &cold.values[k] - &warm.values[k]);
            assert!(diff.to_f64().abs() < 1e-35);
        }
        assert!(warm.sweeps <= cold.sweeps);
    }
}
