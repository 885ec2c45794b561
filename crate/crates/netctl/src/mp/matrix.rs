//! Dense extended-precision matrices, real and complex.

use ndarray::Array2;
use num_complex::Complex64;
use rug::{Assign, Float};

use super::complex::MpComplex;

/// Dense real matrix of extended-precision floats, row-major.
#[derive(Clone, Debug)]
pub struct MpMat {
    rows: usize,
    cols: usize,
    data: Vec<Float>,
}

impl MpMat {
    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Self {
        MpMat {
            rows,
            cols,
            data: (0..rows * cols).map(|_| Float::new(bits)).collect(),
        }
    }

    pub fn identity(n: usize, bits: u32) -> Self {
        let mut m = MpMat::zeros(n, n, bits);
        for i in 0..n {
            m.data[i * n + i].assign(1);
        }
        m
    }

    pub fn from_array(a: &Array2<f64>, bits: u32) -> Self {
        MpMat {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().map(|&x| Float::with_val(bits, x)).collect(),
        }
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows, self.cols), |(i, j)| self.get(i, j).to_f64())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.data.first().map(|f| f.prec()).unwrap_or(64)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Float {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Float {
        &mut self.data[i * self.cols + j]
    }

    pub fn set_f64(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j].assign(v);
    }

    /// Two distinct mutable entries at flat indices.
    #[inline]
    fn pair_mut(&mut self, a: usize, b: usize) -> (&mut Float, &mut Float) {
        debug_assert!(a != b);
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b);
            (&mut lo[a], &mut hi[0])
        } else {
            let (lo, hi) = self.data.split_at_mut(a);
            (&mut hi[0], &mut lo[b])
        }
    }

    /// In-place plane rotation of entries at flat indices `ia`, `ib`:
    /// `x' = c x - s y`, `y' = s x + c y`.
    #[inline]
    pub(super) fn rotate_pair(
        &mut self,
        ia: usize,
        ib: usize,
        c: &Float,
        s: &Float,
        t1: &mut Float,
        t2: &mut Float,
        t3: &mut Float,
    ) {
        let (x, y) = self.pair_mut(ia, ib);
        t1.assign(&*x);
        *t1 *= c;
        t2.assign(&*y);
        *t2 *= s;
        *t1 -= &*t2; // c x - s y
        t2.assign(&*x);
        *t2 *= s;
        t3.assign(&*y);
        *t3 *= c;
        *t3 += &*t2; // s x + c y
        x.assign(&*t1);
        y.assign(&*t3);
    }

    pub fn frob(&self) -> Float {
        let bits = self.bits();
        let mut acc = Float::new(bits);
        let mut t = Float::new(bits);
        for f in &self.data {
            t.assign(f);
            t.square_mut();
            acc += &t;
        }
        acc.sqrt()
    }

    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let bits = self.bits();
        let mut t = Float::new(bits);
        for i in 0..n {
            for j in (i + 1)..n {
                t.assign(self.get(i, j));
                t += self.get(j, i);
                t /= 2u32;
                self.get_mut(i, j).assign(&t);
                self.get_mut(j, i).assign(&t);
            }
        }
    }

    /// Principal submatrix on the given (row = column) positions.
    pub fn principal(&self, keep: &[usize]) -> MpMat {
        let k = keep.len();
        let bits = self.bits();
        let mut out = MpMat::zeros(k, k, bits);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                out.get_mut(a, b).assign(self.get(i, j));
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &MpMat) -> MpMat {
        assert_eq!(self.cols, other.rows);
        let bits = self.bits();
        let mut out = MpMat::zeros(self.rows, other.cols, bits);
        let mut t = Float::new(bits);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let acc = &mut out.data[i * other.cols + j];
                for k in 0..self.cols {
                    t.assign(self.get(i, k));
                    t *= other.get(k, j);
                    *acc += &t;
                }
            }
        }
        out
    }

    /// `self^T * other`.
    pub fn t_matmul(&self, other: &MpMat) -> MpMat {
        assert_eq!(self.rows, other.rows);
        let bits = self.bits();
        let mut out = MpMat::zeros(self.cols, other.cols, bits);
        let mut t = Float::new(bits);
        for i in 0..self.cols {
            for j in 0..other.cols {
                let acc = &mut out.data[i * other.cols + j];
                for k in 0..self.rows {
                    t.assign(self.get(k, i));
                    t *= other.get(k, j);
                    *acc += &t;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[Float]) -> Vec<Float> {
        assert_eq!(self.cols, x.len());
        let bits = self.bits();
        let mut t = Float::new(bits);
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = Float::new(bits);
            for k in 0..self.cols {
                t.assign(self.get(i, k));
                t *= &x[k];
                acc += &t;
            }
            out.push(acc);
        }
        out
    }

    /// Dot product of column `j` with a vector.
    pub fn col_dot(&self, j: usize, x: &[Float]) -> Float {
        assert_eq!(self.rows, x.len());
        let bits = self.bits();
        let mut acc = Float::new(bits);
        let mut t = Float::new(bits);
        for i in 0..self.rows {
            t.assign(self.get(i, j));
            t *= &x[i];
            acc += &t;
        }
        acc
    }

    /// Modified Gram-Schmidt orthonormalization of the columns, in place.
    /// Intended for matrices that are already close to orthogonal.
    pub fn mgs_orthonormalize(&mut self) {
        let bits = self.bits();
        let (n, m) = (self.rows, self.cols);
        let mut t = Float::new(bits);
        for j in 0..m {
            for k in 0..j {
                // r = q_k . q_j
                let mut r = Float::new(bits);
                for i in 0..n {
                    t.assign(self.get(i, k));
                    t *= self.get(i, j);
                    r += &t;
                }
                for i in 0..n {
                    t.assign(self.get(i, k));
                    t *= &r;
                    *self.get_mut(i, j) -= &t;
                }
            }
            let mut norm = Float::new(bits);
            for i in 0..n {
                t.assign(self.get(i, j));
                t.square_mut();
                norm += &t;
            }
            norm.sqrt_mut();
            for i in 0..n {
                *self.get_mut(i, j) /= &norm;
            }
        }
    }

    pub fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

/// Dense complex matrix of extended-precision floats, row-major.
#[derive(Clone, Debug)]
pub struct MpCMat {
    rows: usize,
    cols: usize,
    data: Vec<MpComplex>,
}

impl MpCMat {
    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Self {
        MpCMat {
            rows,
            cols,
            data: (0..rows * cols).map(|_| MpComplex::zero(bits)).collect(),
        }
    }

    pub fn from_array(a: &Array2<Complex64>, bits: u32) -> Self {
        MpCMat {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().map(|&z| MpComplex::from_c64(bits, z)).collect(),
        }
    }

    pub fn from_real_array(a: &Array2<f64>, bits: u32) -> Self {
        MpCMat {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().map(|&x| MpComplex::from_f64(bits, x)).collect(),
        }
    }

    /// Rows of `self` at the given indices, as a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> MpCMat {
        let mut out = MpCMat {
            rows: rows.len(),
            cols: self.cols,
            data: Vec::with_capacity(rows.len() * self.cols),
        };
        for &i in rows {
            for j in 0..self.cols {
                out.data.push(self.get(i, j).clone());
            }
        }
        out
    }

    /// Columns of `self` at the given indices, as a new matrix.
    pub fn select_cols(&self, cols: &[usize]) -> MpCMat {
        let mut out = MpCMat {
            rows: self.rows,
            cols: cols.len(),
            data: Vec::with_capacity(self.rows * cols.len()),
        };
        for i in 0..self.rows {
            for &j in cols {
                out.data.push(self.get(i, j).clone());
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.data.first().map(|z| z.re.prec()).unwrap_or(64)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &MpComplex {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut MpComplex {
        &mut self.data[i * self.cols + j]
    }

    /// `self * other` (plain complex product).
    pub fn matmul(&self, other: &MpCMat) -> MpCMat {
        assert_eq!(self.cols, other.rows);
        let bits = self.bits();
        let mut out = MpCMat::zeros(self.rows, other.cols, bits);
        let mut t1 = Float::new(bits);
        let mut t2 = Float::new(bits);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = MpComplex::zero(bits);
                for k in 0..self.cols {
                    acc.acc_mul(self.get(i, k), other.get(k, j), &mut t1, &mut t2);
                }
                *out.get_mut(i, j) = acc;
            }
        }
        out
    }

    /// `self * other^T` with the plain (non-conjugating) transpose.
    pub fn matmul_bt(&self, other: &MpCMat) -> MpCMat {
        assert_eq!(self.cols, other.cols);
        let bits = self.bits();
        let mut out = MpCMat::zeros(self.rows, other.rows, bits);
        let mut t1 = Float::new(bits);
        let mut t2 = Float::new(bits);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let mut acc = MpComplex::zero(bits);
                for k in 0..self.cols {
                    acc.acc_mul(self.get(i, k), other.get(j, k), &mut t1, &mut t2);
                }
                *out.get_mut(i, j) = acc;
            }
        }
        out
    }

    /// Symmetric (not Hermitian) product `self * self^T`, exploiting symmetry.
    pub fn symmetric_square(&self) -> MpCMat {
        let bits = self.bits();
        let n = self.rows;
        let mut out = MpCMat::zeros(n, n, bits);
        let mut t1 = Float::new(bits);
        let mut t2 = Float::new(bits);
        for i in 0..n {
            for j in i..n {
                let mut acc = MpComplex::zero(bits);
                for k in 0..self.cols {
                    acc.acc_mul(self.get(i, k), self.get(j, k), &mut t1, &mut t2);
                }
                *out.get_mut(j, i) = acc.clone();
                *out.get_mut(i, j) = acc;
            }
        }
        out
    }

    /// Entry-wise (Hadamard) product, in place.
    pub fn hadamard_assign(&mut self, other: &MpCMat) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        let bits = self.bits();
        let mut t1 = Float::new(bits);
        let mut t2 = Float::new(bits);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            let mut prod = MpComplex::zero(bits);
            prod.acc_mul(a, b, &mut t1, &mut t2);
            *a = prod;
        }
    }

    /// Inverse by Gaussian elimination with partial pivoting on the
    /// augmented system. Used to invert the promoted eigenvector matrix:
    /// inverting in extended precision keeps the inverse exactly conjugate
    /// paired, which is what makes the assembled Gramian real to working
    /// precision.
    pub fn invert(&self) -> crate::error::Result<MpCMat> {
        use crate::error::Error;
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let bits = self.bits();
        let mut a = self.clone();
        let mut inv = MpCMat::zeros(n, n, bits);
        for i in 0..n {
            inv.get_mut(i, i).re.assign(1);
        }
        let mut t1 = Float::new(bits);
        let mut t2 = Float::new(bits);

        // forward elimination
        for k in 0..n {
            let mut pivot = k;
            let mut best = a.get(k, k).abs();
            for r in (k + 1)..n {
                let mag = a.get(r, k).abs();
                if mag > best {
                    best = mag;
                    pivot = r;
                }
            }
            if best.is_zero() {
                return Err(Error::Eigen("singular matrix in extended-precision inversion".into()));
            }
            if pivot != k {
                for j in 0..n {
                    a.data.swap(k * n + j, pivot * n + j);
                    inv.data.swap(k * n + j, pivot * n + j);
                }
            }
            for i in (k + 1)..n {
                let factor = a.get(i, k).div(a.get(k, k));
                let mut neg = factor.clone();
                neg.re = -neg.re;
                neg.im = -neg.im;
                for j in k..n {
                    let add = {
                        let mut prod = MpComplex::zero(bits);
                        prod.acc_mul(&neg, a.get(k, j), &mut t1, &mut t2);
                        prod
                    };
                    a.get_mut(i, j).add_assign(&add);
                }
                for j in 0..n {
                    let add = {
                        let mut prod = MpComplex::zero(bits);
                        prod.acc_mul(&neg, inv.get(k, j), &mut t1, &mut t2);
                        prod
                    };
                    inv.get_mut(i, j).add_assign(&add);
                }
            }
        }

        // back substitution
        for k in (0..n).rev() {
            let diag = a.get(k, k).clone();
            for j in 0..n {
                *inv.get_mut(k, j) = inv.get(k, j).div(&diag);
            }
            for i in 0..k {
                let factor = a.get(i, k).clone();
                let mut neg = factor;
                neg.re = -neg.re;
                neg.im = -neg.im;
                for j in 0..n {
                    let add = {
                        let mut prod = MpComplex::zero(bits);
                        prod.acc_mul(&neg, inv.get(k, j), &mut t1, &mut t2);
                        prod
                    };
                    inv.get_mut(i, j).add_assign(&add);
                }
            }
        }
        Ok(inv)
    }

    /// Real part, together with the largest absolute imaginary entry.
    pub fn real_part(&self) -> (MpMat, Float) {
        let bits = self.bits();
        let mut out = MpMat::zeros(self.rows, self.cols, bits);
        let mut worst = Float::new(bits);
        let mut t = Float::new(bits);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self.get(i, j);
                out.get_mut(i, j).assign(&z.re);
                t.assign(&z.im);
                t.abs_mut();
                if t > worst {
                    worst.assign(&t);
                }
            }
        }
        (out, worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    const BITS: u32 = 256;

    #[test]
    fn real_matmul_matches_hardware() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let b = array![[0.5, -1.0], [2.0, 0.25]];
        let ma = MpMat::from_array(&a, BITS);
        let mb = MpMat::from_array(&b, BITS);
        let c = ma.matmul(&mb).to_array();
        let expect = a.dot(&b);
        for i in 0..2 {
            for j in 0..2 {
                assert!((c[(i, j)] - expect[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mgs_produces_orthonormal_columns() {
        let a = array![[1.0, 1.0], [0.0, 1.0]];
        let mut m = MpMat::from_array(&a, BITS);
        m.mgs_orthonormalize();
        let g = m.t_matmul(&m);
        assert!((g.get(0, 0).to_f64() - 1.0).abs() < 1e-30);
        assert!((g.get(1, 1).to_f64() - 1.0).abs() < 1e-30);
        assert!(g.get(0, 1).to_f64().abs() < 1e-30);
    }

    #[test]
    fn complex_symmetric_square() {
        let a = array![
            [Complex64::new(1.0, 1.0)],
            [Complex64::new(0.0, 2.0)]
        ];
        let m = MpCMat::from_array(&a, BITS);
        let s = m.symmetric_square();
        // (1+i)^2 = 2i ; (1+i)(2i) = -2+2i ; (2i)^2 = -4
        assert!((s.get(0, 0).to_c64() - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((s.get(0, 1).to_c64() - Complex64::new(-2.0, 2.0)).norm() < 1e-14);
        assert!((s.get(1, 1).to_c64() - Complex64::new(-4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn principal_submatrix() {
        let a = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        let m = MpMat::from_array(&a, BITS);
        let s = m.principal(&[0, 2]);
        assert_eq!(s.get(0, 1).to_f64(), 3.0);
        assert_eq!(s.get(1, 0).to_f64(), 7.0);
        assert_eq!(s.get(1, 1).to_f64(), 9.0);
    }
}
