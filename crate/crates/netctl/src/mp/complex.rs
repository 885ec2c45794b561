//! Complex arithmetic over extended-precision floats.
//!
//! Only the handful of operations the Gramian assembly needs; transposes in
//! that formula are plain (not conjugate), so no conjugation creeps in
//! implicitly anywhere.

use num_complex::Complex64;
use rug::{Assign, Float};

#[derive(Clone, Debug)]
pub struct MpComplex {
    pub re: Float,
    pub im: Float,
}

impl MpComplex {
    pub fn zero(bits: u32) -> Self {
        MpComplex {
            re: Float::new(bits),
            im: Float::new(bits),
        }
    }

    pub fn from_c64(bits: u32, z: Complex64) -> Self {
        MpComplex {
            re: Float::with_val(bits, z.re),
            im: Float::with_val(bits, z.im),
        }
    }

    pub fn from_f64(bits: u32, x: f64) -> Self {
        MpComplex {
            re: Float::with_val(bits, x),
            im: Float::new(bits),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn set_zero(&mut self) {
        self.re.assign(0);
        self.im.assign(0);
    }

    pub fn add_assign(&mut self, other: &MpComplex) {
        self.re += &other.re;
        self.im += &other.im;
    }

    /// `self += a * b`, using the two scratch floats to avoid allocation.
    pub fn acc_mul(&mut self, a: &MpComplex, b: &MpComplex, t1: &mut Float, t2: &mut Float) {
        t1.assign(&a.re);
        *t1 *= &b.re;
        t2.assign(&a.im);
        *t2 *= &b.im;
        *t1 -= &*t2;
        self.re += &*t1;

        t1.assign(&a.re);
        *t1 *= &b.im;
        t2.assign(&a.im);
        *t2 *= &b.re;
        *t1 += &*t2;
        self.im += &*t1;
    }

    pub fn mul(&self, other: &MpComplex) -> MpComplex {
        let bits = self.re.prec();
        let mut out = MpComplex::zero(bits);
        let mut t1 = Float::new(bits);
        let mut t2 = Float::new(bits);
        out.acc_mul(self, other, &mut t1, &mut t2);
        out
    }

    /// Complex exponential `e^self`.
    pub fn exp(&self) -> MpComplex {
        let bits = self.re.prec();
        let mag = Float::with_val(bits, self.re.exp_ref());
        let mut sin = self.im.clone();
        let mut cos = Float::new(bits);
        sin.sin_cos_mut(&mut cos);
        cos *= &mag;
        sin *= &mag;
        MpComplex { re: cos, im: sin }
    }

    /// Complex division `self / other`.
    pub fn div(&self, other: &MpComplex) -> MpComplex {
        let bits = self.re.prec();
        let mut den = Float::with_val(bits, &other.re * &other.re);
        den += Float::with_val(bits, &other.im * &other.im);
        let mut re = Float::with_val(bits, &self.re * &other.re);
        re += Float::with_val(bits, &self.im * &other.im);
        re /= &den;
        let mut im = Float::with_val(bits, &self.im * &other.re);
        im -= Float::with_val(bits, &self.re * &other.im);
        im /= &den;
        MpComplex { re, im }
    }

    /// Modulus `|self|`.
    pub fn abs(&self) -> Float {
        let bits = self.re.prec();
        let mut s = Float::with_val(bits, &self.re * &self.re);
        s += Float::with_val(bits, &self.im * &self.im);
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BITS: u32 = 256;

    #[test]
    fn multiply_matches_hardware() {
        let a = MpComplex::from_c64(BITS, Complex64::new(1.5, -2.0));
        let b = MpComplex::from_c64(BITS, Complex64::new(-0.25, 3.0));
        let c = a.mul(&b);
        let expect = Complex64::new(1.5, -2.0) * Complex64::new(-0.25, 3.0);
        assert!((c.to_c64() - expect).norm() < 1e-14);
    }

    #[test]
    fn exp_of_imaginary_unit_circle() {
        let z = MpComplex::from_c64(BITS, Complex64::new(0.0, std::f64::consts::PI));
        let e = z.exp();
        assert!((e.re.to_f64() + 1.0).abs() < 1e-15);
        assert!(e.im.to_f64().abs() < 1e-15);
    }

    #[test]
    fn division_roundtrip() {
        let a = MpComplex::from_c64(BITS, Complex64::new(2.0, 1.0));
        let b = MpComplex::from_c64(BITS, Complex64::new(-1.0, 4.0));
        let q = a.div(&b);
        let back = q.mul(&b);
        assert!((back.to_c64() - Complex64::new(2.0, 1.0)).norm() < 1e-14);
    }
}
