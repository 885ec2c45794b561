//! Output-controllability Gramians from the eigendecomposition of the state
//! matrix, with extended-precision spectra.
//!
//! For a diagonalizable A = V L V^-1 and horizon [t0, tf], the reduced
//! Gramian over the target rows is
//!
//! ```text
//! W_p = (C V) ( Y o (V^-1 B B^T V^-T) ) (C V)^T,
//! Y_ij = (exp((l_i + l_j)(tf - t0)) - 1) / (l_i + l_j)
//! ```
//!
//! with `o` the entry-wise product and all transposes plain. The
//! eigendecomposition runs in hardware precision; the promoted eigenpairs are
//! treated exactly from then on, so the product above is formed and
//! diagonalized in software floats where the smallest eigenvalues -- the
//! worst-case energies -- stay resolvable far below hardware roundoff.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rug::{Assign, Float};
use serde::Serialize;

use crate::ctrlcfg::{InputSet, TargetSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mp::{
    decimal_string, jacobi_eigen, log10_f64, MpCMat, MpComplex, MpMat, PrecisionConfig,
};
use crate::netgen::Network;

/// Residual bound for the hardware eigendecomposition, relative to `||A||`.
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvector-matrix condition number above which A is treated as
/// numerically defective.
pub const EIG_CONDITION_CAP: f64 = 1e13;

/// Sweep cap for the extended-precision Jacobi eigensolver.
pub const JACOBI_SWEEP_CAP: usize = 50;

/// Hardware-precision eigendecomposition of the state matrix, kept together
/// with its inverse eigenvector matrix and quality diagnostics.
#[derive(Clone, Debug)]
pub struct EigDecomp {
    lambda: Vec<Complex64>,
    v: Array2<Complex64>,
    v_inv: Array2<Complex64>,
    residual: f64,
    cond_v: f64,
}

impl EigDecomp {
    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn v(&self) -> &Array2<Complex64> {
        &self.v
    }

    pub fn v_inv(&self) -> &Array2<Complex64> {
        &self.v_inv
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn cond_v(&self) -> f64 {
        self.cond_v
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Free response `e^{A dt} x`, evaluated through the eigendecomposition.
    pub fn propagate(&self, x: &Array1<f64>, dt: f64) -> Array1<f64> {
        let n = self.n();
        let xc = x.mapv(|v| Complex64::new(v, 0.0));
        let mut coeff = linalg::matvec_c(&self.v_inv, &xc);
        for (c, l) in coeff.iter_mut().zip(&self.lambda) {
            *c *= (l * dt).exp();
        }
        let out = linalg::matvec_c(&self.v, &coeff);
        Array1::from_iter((0..n).map(|i| out[i].re))
    }
}

/// Eigendecomposition of the stabilized network matrix.
pub fn eig_decompose(net: &Network) -> Result<EigDecomp> {
    eig_decompose_matrix(&net.matrix()?)
}

/// Eigendecomposition of an arbitrary square real matrix.
pub fn eig_decompose_matrix(a: &Array2<f64>) -> Result<EigDecomp> {
    let n = a.nrows();
    let (lambda, v) = linalg::eigen(a)?;
    let v_inv = linalg::complex_inverse(&v)?;

    // residual |A v_i - l_i v_i| against the scale of A
    let scale = linalg::frob(a).max(1e-300);
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut norm2 = 0.0;
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[(i, k)] * v[(k, j)];
            }
            acc -= lambda[j] * v[(i, j)];
            norm2 += acc.norm_sqr();
        }
        worst = worst.max(norm2.sqrt());
    }
    if worst > EIG_RESIDUAL_TOL * scale {
        return Err(Error::Eigen(format!(
            "eigendecomposition residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:.0e} * ||A||"
        )));
    }

    let cond_v = linalg::one_norm_c(&v) * linalg::one_norm_c(&v_inv);
    if !cond_v.is_finite() || cond_v > EIG_CONDITION_CAP {
        return Err(Error::Eigen(format!(
            "eigenvector matrix is near-defective (cond ~ {cond_v:.3e}); \
             re-noise the diagonal and retry"
        )));
    }

    Ok(EigDecomp {
        lambda,
        v,
        v_inv,
        residual: worst,
        cond_v,
    })
}

/// The horizon kernel matrix of the Gramian formula,
/// `Y_ij = (exp((l_i + l_j)(tf - t0)) - 1) / (l_i + l_j)`.
pub fn compute_y(decomp: &EigDecomp, t0: f64, tf: f64, prec: &PrecisionConfig) -> Result<MpCMat> {
    if !(tf > t0) {
        return Err(Error::Config(format!(
            "horizon must be positive, got [{t0}, {tf}]"
        )));
    }
    let n = decomp.n();
    let bits = prec.bits();
    let dt = Float::with_val(bits, tf) - Float::with_val(bits, t0);
    let floor = prec.controllability_floor();
    let mut y = MpCMat::zeros(n, n, bits);
    let lam: Vec<MpComplex> = decomp
        .lambda
        .iter()
        .map(|&l| MpComplex::from_c64(bits, l))
        .collect();
    for i in 0..n {
        for j in i..n {
            let mut s = lam[i].clone();
            s.add_assign(&lam[j]);
            if s.abs() < floor {
                return Err(Error::Eigen(format!(
                    "eigenvalue pair ({i}, {j}) sums to ~0; the matrix is not Hurwitz enough \
                     for the Gramian kernel"
                )));
            }
            let mut arg = s.clone();
            arg.re *= &dt;
            arg.im *= &dt;
            let mut num = arg.exp();
            num.re -= 1u32;
            let val = num.div(&s);
            *y.get_mut(i, j) = val.clone();
            *y.get_mut(j, i) = val;
        }
    }
    Ok(y)
}

/// How the input matrix enters the Gramian kernel: versor columns from driver
/// nodes, or a general dense matrix (used by the weighted closed-loop
/// Gramian).
pub enum InputMatrix<'a> {
    Versors(&'a InputSet),
    Dense(&'a Array2<f64>),
}

/// Reduced output-controllability Gramian with its extended-precision
/// spectrum.
#[derive(Clone, Debug)]
pub struct Gramian {
    matrix: MpMat,
    targets: TargetSet,
    values: Vec<Float>,
    vectors: MpMat,
    prec: PrecisionConfig,
    horizon: (f64, f64),
    imag_residue: f64,
    jacobi_sweeps: usize,
}

/// Worst-case (maximum) control energy `1/mu_1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WorstCaseEnergy {
    pub emax: f64,
    pub log10: f64,
}

/// Compute the reduced Gramian over the given targets.
pub fn compute_gramian(
    decomp: &EigDecomp,
    input: &InputMatrix,
    targets: &TargetSet,
    t0: f64,
    tf: f64,
    prec: &PrecisionConfig,
) -> Result<Gramian> {
    let n = decomp.n();
    let bits = prec.bits();
    if targets.nodes().iter().any(|&t| t >= n) {
        return Err(Error::Config("target index out of range".into()));
    }

    let y = compute_y(decomp, t0, tf, prec)?;
    // invert the promoted V rather than promoting the hardware inverse: the
    // hardware inverse is conjugate-paired only to ~1e-16, which would leak
    // into the imaginary part of W at that scale
    let v_mp = MpCMat::from_array(decomp.v(), bits);
    let v_inv_mp = v_mp.invert()?;

    // S = V^-1 B; for versor columns this is a column gather of V^-1
    let s = match input {
        InputMatrix::Versors(inputs) => {
            if inputs.nodes().iter().any(|&d| d >= n) {
                return Err(Error::Config("driver index out of range".into()));
            }
            v_inv_mp.select_cols(inputs.nodes())
        }
        InputMatrix::Dense(b) => {
            if b.nrows() != n {
                return Err(Error::Config(format!(
                    "input matrix has {} rows, expected {n}",
                    b.nrows()
                )));
            }
            v_inv_mp.matmul(&MpCMat::from_real_array(b, bits))
        }
    };

    // T = Y o (S S^T), then W_p = (CV) T (CV)^T
    let mut t = s.symmetric_square();
    t.hadamard_assign(&y);
    let v_rows = v_mp.select_rows(targets.nodes());
    let m1 = v_rows.matmul(&t);
    let w_complex = m1.matmul_bt(&v_rows);

    let (mut w, imag_worst) = w_complex.real_part();
    w.symmetrize();

    // conjugate pairing of the promoted eigendata keeps W real; anything
    // beyond rounding noise means the pairing was broken upstream
    let mut allowed = prec.residual_bound();
    let frob = w.frob();
    if frob > 1u32 {
        allowed *= &frob;
    }
    if imag_worst > allowed {
        return Err(Error::Numerical(format!(
            "Gramian imaginary residue {:.3e} exceeds 10^(-digits+10) scale",
            imag_worst.to_f64()
        )));
    }

    let eig = jacobi_eigen(&w, prec, JACOBI_SWEEP_CAP, true)?;
    Ok(Gramian {
        matrix: w,
        targets: targets.clone(),
        values: eig.values,
        vectors: eig.vectors,
        prec: *prec,
        horizon: (t0, tf),
        imag_residue: imag_worst.to_f64(),
        jacobi_sweeps: eig.sweeps,
    })
}

impl Gramian {
    pub fn p(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &TargetSet {
        &self.targets
    }

    pub fn matrix(&self) -> &MpMat {
        &self.matrix
    }

    pub fn horizon(&self) -> (f64, f64) {
        self.horizon
    }

    pub fn precision(&self) -> &PrecisionConfig {
        &self.prec
    }

    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn jacobi_sweeps(&self) -> usize {
        self.jacobi_sweeps
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> &[Float] {
        &self.values
    }

    /// Eigenvectors as columns, ordered like [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &MpMat {
        &self.vectors
    }

    pub fn smallest_eigenvalue(&self) -> &Float {
        &self.values[0]
    }

    pub fn log10_mu1(&self) -> f64 {
        log10_f64(self.smallest_eigenvalue())
    }

    fn require_positive(&self) -> Result<()> {
        let floor = self.prec.controllability_floor();
        if *self.smallest_eigenvalue() <= floor {
            return Err(Error::NotControllable {
                log10_mu1: self.log10_mu1(),
                floor_digits: self.prec.digits() / 2,
            });
        }
        Ok(())
    }

    /// Worst-case energy `1/mu_1` with its base-10 logarithm.
    pub fn worst_case_energy(&self) -> Result<WorstCaseEnergy> {
        self.require_positive()?;
        let mu1 = self.smallest_eigenvalue();
        let inv = Float::with_val(mu1.prec(), mu1.recip_ref());
        Ok(WorstCaseEnergy {
            emax: inv.to_f64(),
            log10: -log10_f64(mu1),
        })
    }

    /// Principal-submatrix reduction onto a subset of the targets; no
    /// integral is recomputed, only the spectrum of the submatrix.
    pub fn reduce(&self, keep: &TargetSet) -> Result<Gramian> {
        if !keep.is_subset_of(&self.targets) {
            return Err(Error::Config(
                "reduction target set is not a subset of the Gramian's targets".into(),
            ));
        }
        let positions: Vec<usize> = keep
            .nodes()
            .iter()
            .map(|v| {
                self.targets
                    .nodes()
                    .binary_search(v)
                    .expect("subset check passed")
            })
            .collect();
        let sub = self.matrix.principal(&positions);
        let eig = jacobi_eigen(&sub, &self.prec, JACOBI_SWEEP_CAP, true)?;
        Ok(Gramian {
            matrix: sub,
            targets: keep.clone(),
            values: eig.values,
            vectors: eig.vectors,
            prec: self.prec,
            horizon: self.horizon,
            imag_residue: self.imag_residue,
            jacobi_sweeps: eig.sweeps,
        })
    }

    /// `W^-1 beta` through the spectral decomposition.
    pub fn apply_inverse(&self, beta: &[Float]) -> Result<Vec<Float>> {
        self.require_positive()?;
        let p = self.p();
        assert_eq!(beta.len(), p);
        let bits = self.prec.bits();
        let mut out: Vec<Float> = (0..p).map(|_| Float::new(bits)).collect();
        let mut t = Float::new(bits);
        for k in 0..p {
            let mut coef = self.vectors.col_dot(k, beta);
            coef /= &self.values[k];
            for i in 0..p {
                t.assign(self.vectors.get(i, k));
                t *= &coef;
                out[i] += &t;
            }
        }
        Ok(out)
    }

    /// Quadratic form `beta^T W^-1 beta = sum_i (v_i^T beta)^2 / mu_i`.
    pub fn quadratic_form_inv(&self, beta: &[Float]) -> Result<Float> {
        self.require_positive()?;
        let p = self.p();
        assert_eq!(beta.len(), p);
        let bits = self.prec.bits();
        let mut acc = Float::new(bits);
        for k in 0..p {
            let mut coef = self.vectors.col_dot(k, beta);
            coef.square_mut();
            coef /= &self.values[k];
            acc += &coef;
        }
        Ok(acc)
    }

    /// Spectrum as CSV with full-precision decimal strings.
    pub fn spectrum_csv(&self) -> String {
        let digits = self.prec.digits();
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, decimal_string(v, digits)));
        }
        out
    }
}

/// One reduction step's energy ratio `eta_p = mu_1^(p) / mu_1^(p+1) >= 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EtaStep {
    pub eta: f64,
    pub ln_eta: f64,
}

/// Ratio of smallest eigenvalues across a reduction. The child must be a
/// reduction of the parent; Cauchy interlacing guarantees the ratio is at
/// least one, so a deficit beyond eigensolver tolerance is a numerical fault.
pub fn eta_step(parent: &Gramian, child: &Gramian) -> Result<EtaStep> {
    if !child.targets.is_subset_of(&parent.targets) || child.p() >= parent.p() {
        return Err(Error::Config(
            "eta step needs a strict reduction of the parent Gramian".into(),
        ));
    }
    let mu_parent = parent.smallest_eigenvalue();
    let mu_child = child.smallest_eigenvalue();
    let bits = mu_parent.prec();

    let mut tol = parent.prec.interlacing_tol();
    let frob = parent.matrix.frob();
    if frob > 1u32 {
        tol *= &frob;
    }
    let mut deficit = Float::with_val(bits, mu_parent - mu_child);
    if deficit > tol {
        deficit /= mu_parent;
        return Err(Error::Numerical(format!(
            "eta step ratio below 1 by relative {:.3e}: interlacing violated beyond tolerance",
            deficit.to_f64()
        )));
    }
    let ratio = Float::with_val(bits, mu_child / mu_parent);
    let ln = Float::with_val(bits, ratio.ln_ref());
    Ok(EtaStep {
        eta: ratio.to_f64(),
        ln_eta: ln.to_f64(),
    })
}

/// Interlacing audit over a nested chain of Gramians (sizes strictly
/// descending by one).
#[derive(Clone, Debug, Serialize)]
pub struct InterlacingReport {
    pub pairs: usize,
    pub comparisons: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub emax_nondecreasing_in_p: bool,
}

/// Verify `mu_k^(i) <= mu_k^(i-1) <= mu_{k+1}^(i)` for every adjacent pair of
/// the chain and every k, within `10^(-digits+12)`. Violations are data in
/// the report, not errors.
pub fn interlacing_audit(chain: &[Gramian]) -> Result<InterlacingReport> {
    if chain.len() < 2 {
        return Err(Error::Config("interlacing audit needs at least two Gramians".into()));
    }
    for w in chain.windows(2) {
        if w[1].p() + 1 != w[0].p() || !w[1].targets.is_subset_of(&w[0].targets) {
            return Err(Error::Config(
                "interlacing audit expects a nested chain with sizes descending by one".into(),
            ));
        }
    }
    let prec = chain[0].prec;
    let bits = prec.bits();
    let mut tol = prec.interlacing_tol();
    let frob = chain[0].matrix.frob();
    if frob > 1u32 {
        tol *= &frob;
    }

    let mut violations = 0usize;
    let mut comparisons = 0usize;
    let mut max_violation = Float::new(bits);
    let mut check = |lo: &Float, hi: &Float, max_violation: &mut Float| {
        comparisons += 1;
        let gap = Float::with_val(bits, lo - hi);
        if gap > tol {
            violations += 1;
        }
        if gap > *max_violation {
            max_violation.assign(&gap);
        }
    };
    for w in chain.windows(2) {
        let parent = &w[0].values; // size q
        let child = &w[1].values; // size q-1
        for k in 0..child.len() {
            check(&parent[k], &child[k], &mut max_violation);
            check(&child[k], &parent[k + 1], &mut max_violation);
        }
    }

    // E_max^(i) >= E_max^(i-1): mu_1 non-increasing as p grows
    let mut emax_ok = true;
    for w in chain.windows(2) {
        let gap = Float::with_val(bits, w[0].smallest_eigenvalue() - w[1].smallest_eigenvalue());
        if gap > tol {
            emax_ok = false;
        }
    }

    Ok(InterlacingReport {
        pairs: chain.len() - 1,
        comparisons,
        violations,
        max_violation: max_violation.to_f64(),
        emax_nondecreasing_in_p: emax_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctrlcfg::InputSet;
    use crate::netgen::{assign_weights, generate_static, stabilize, Network};
    use approx::assert_relative_eq;
    use ndarray::array;

    fn prec100() -> PrecisionConfig {
        PrecisionConfig::new(100).unwrap()
    }

    fn gramian_from_matrix(
        a: &Array2<f64>,
        drivers: Vec<usize>,
        targets: Vec<usize>,
        tf: f64,
        prec: &PrecisionConfig,
    ) -> Gramian {
        let n = a.nrows();
        let decomp = eig_decompose_matrix(a).unwrap();
        let inputs = InputSet::new(drivers, n).unwrap();
        let t = TargetSet::new(targets, n).unwrap();
        compute_gramian(&decomp, &InputMatrix::Versors(&inputs), &t, 0.0, tf, prec).unwrap()
    }

    #[test]
    fn eig_decompose_diagonal() {
        let a = array![[-1.0, 0.0], [0.0, -2.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        let mut re: Vec<f64> = d.lambda().iter().map(|l| l.re).collect();
        re.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_relative_eq!(re[0], -2.0);
        assert_relative_eq!(re[1], -1.0);
    }

    #[test]
    fn eig_decompose_triangular_vectors() {
        let a = array![[-1.0, 1.0], [0.0, -2.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        // eigenvector for -1 is e1; for -2 is (-1, 1)/sqrt(2)
        for (j, l) in d.lambda().iter().enumerate() {
            if (l.re + 2.0).abs() < 1e-12 {
                let v0 = d.v()[(0, j)];
                let v1 = d.v()[(1, j)];
                assert_relative_eq!((v0 / v1).re, -1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eig_residual_on_random_net() {
        let net = generate_static(30, 2.5, 2.5, 2.0, 3).unwrap();
        let net = stabilize(&assign_weights(&net, 3).unwrap()).unwrap();
        let d = eig_decompose(&net).unwrap();
        let scale = linalg::frob(&net.matrix().unwrap());
        assert!(d.residual() <= EIG_RESIDUAL_TOL * scale);
    }

    #[test]
    fn y_scalar_value() {
        // l_i = l_j = -1, dt = 1: (e^-2 - 1)/(-2)
        let a = array![[-1.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        let y = compute_y(&d, 0.0, 1.0, &prec100()).unwrap();
        let expect = (1.0 - (-2.0f64).exp()) / 2.0;
        assert_relative_eq!(y.get(0, 0).re.to_f64(), expect, max_relative = 1e-15);
        assert!(y.get(0, 0).im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn y_vanishes_at_zero_horizon() {
        let a = array![[-1.0, 0.5], [0.0, -2.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        let y = compute_y(&d, 0.0, 1e-13, &prec100()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(y.get(i, j).abs().to_f64() < 1e-12);
            }
        }
    }

    #[test]
    fn y_rejects_nonpositive_horizon() {
        let a = array![[-1.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        assert!(compute_y(&d, 1.0, 1.0, &prec100()).is_err());
    }

    #[test]
    fn scalar_gramian_closed_form() {
        let prec = prec100();
        let g = gramian_from_matrix(&array![[-1.0]], vec![0], vec![0], 1.0, &prec);
        let expect = (1.0 - (-2.0f64).exp()) / 2.0;
        assert_relative_eq!(
            g.smallest_eigenvalue().to_f64(),
            expect,
            max_relative = 1e-12
        );
        let e = g.worst_case_energy().unwrap();
        assert_relative_eq!(e.emax, 1.0 / expect, max_relative = 1e-12);
    }

    #[test]
    fn principal_submatrix_identity() {
        // C = I versus versor rows: reduced Gramian equals the principal
        // submatrix of the full one
        let net = generate_static(8, f64::INFINITY, f64::INFINITY, 2.0, 5).unwrap();
        let net = stabilize(&assign_weights(&net, 5).unwrap()).unwrap();
        let prec = PrecisionConfig::new(50).unwrap();
        let d = eig_decompose(&net).unwrap();
        let inputs = InputSet::new(vec![0, 1, 2, 3], 8).unwrap();
        let full = compute_gramian(
            &d,
            &InputMatrix::Versors(&inputs),
            &TargetSet::all(8),
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        let sub_targets = TargetSet::new(vec![1, 4, 6], 8).unwrap();
        let direct = compute_gramian(
            &d,
            &InputMatrix::Versors(&inputs),
            &sub_targets,
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        let reduced = full.reduce(&sub_targets).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let a = direct.matrix().get(i, j).to_f64();
                let b = reduced.matrix().get(i, j).to_f64();
                assert_relative_eq!(a, b, max_relative = 1e-25);
            }
        }
    }

    #[test]
    fn zero_input_matrix_gives_zero_gramian() {
        let a = array![[-1.0, 0.3], [0.0, -2.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        let b = Array2::<f64>::zeros((2, 1));
        let prec = PrecisionConfig::new(40).unwrap();
        let g = compute_gramian(
            &d,
            &InputMatrix::Dense(&b),
            &TargetSet::all(2),
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(g.matrix().get(i, j).to_f64().abs() < 1e-35);
            }
        }
        assert!(g.worst_case_energy().is_err());
    }

    #[test]
    fn spectrum_of_diagonal_gramian() {
        // diag(2, 1) -> mu = (1, 2), v1 = e2
        let m = MpMat::from_array(&array![[2.0, 0.0], [0.0, 1.0]], prec100().bits());
        let eig = jacobi_eigen(&m, &prec100(), JACOBI_SWEEP_CAP, false).unwrap();
        assert_eq!(eig.values[0].to_f64(), 1.0);
        assert_eq!(eig.values[1].to_f64(), 2.0);
    }

    #[test]
    fn eta_step_diagonal_cases() {
        let prec = PrecisionConfig::new(40).unwrap();
        let a = array![[-1.0, 0.0], [0.0, -2.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        let inputs = InputSet::new(vec![0, 1], 2).unwrap();
        let parent = compute_gramian(
            &d,
            &InputMatrix::Versors(&inputs),
            &TargetSet::all(2),
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        // diagonal A with full drivers: W = diag(w0, w1), w0 > w1
        let w0 = parent.matrix().get(0, 0).to_f64();
        let w1 = parent.matrix().get(1, 1).to_f64();
        assert!(parent.matrix().get(0, 1).to_f64().abs() < 1e-30);

        let keep0 = TargetSet::new(vec![0], 2).unwrap();
        let child0 = parent.reduce(&keep0).unwrap();
        let s0 = eta_step(&parent, &child0).unwrap();
        assert_relative_eq!(s0.eta, w0 / w1.min(w0), max_relative = 1e-12);

        let keep1 = TargetSet::new(vec![1], 2).unwrap();
        let child1 = parent.reduce(&keep1).unwrap();
        let s1 = eta_step(&parent, &child1).unwrap();
        assert_relative_eq!(s1.eta, w1 / w1.min(w0), max_relative = 1e-12);
    }

    #[test]
    fn eta_steps_are_at_least_one_for_random_spd() {
        let prec = PrecisionConfig::new(50).unwrap();
        let n = 5;
        let g = Array2::from_shape_fn((n, n), |(i, j)| ((i * 13 + j * 7 + 3) % 17) as f64 / 17.0);
        let spd = g.dot(&g.t()) + Array2::<f64>::eye(n) * 0.2;
        let w = MpMat::from_array(&spd, prec.bits());
        let eig = jacobi_eigen(&w, &prec, JACOBI_SWEEP_CAP, false).unwrap();
        let parent = Gramian {
            matrix: w,
            targets: TargetSet::all(n),
            values: eig.values,
            vectors: eig.vectors,
            prec,
            horizon: (0.0, 1.0),
            imag_residue: 0.0,
            jacobi_sweeps: eig.sweeps,
        };
        for drop in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&k| k != drop).collect();
            let child = parent.reduce(&TargetSet::new(keep, n).unwrap()).unwrap();
            let step = eta_step(&parent, &child).unwrap();
            assert!(step.eta >= 1.0 - 1e-12, "drop {drop}: eta = {}", step.eta);
        }
    }

    #[test]
    fn interlacing_audit_diagonal_chain() {
        let prec = PrecisionConfig::new(40).unwrap();
        let a = array![[-1.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, -3.0]];
        let d = eig_decompose_matrix(&a).unwrap();
        let inputs = InputSet::new(vec![0, 1, 2], 3).unwrap();
        let g3 = compute_gramian(
            &d,
            &InputMatrix::Versors(&inputs),
            &TargetSet::all(3),
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        let g2 = g3.reduce(&TargetSet::new(vec![0, 2], 3).unwrap()).unwrap();
        let g1 = g3.reduce(&TargetSet::new(vec![2], 3).unwrap()).unwrap();
        let report = interlacing_audit(&[g3, g2, g1]).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.emax_nondecreasing_in_p);
    }

    #[test]
    fn spectrum_csv_has_full_digits() {
        let g = gramian_from_matrix(&array![[-1.0]], vec![0], vec![0], 1.0, &prec100());
        let csv = g.spectrum_csv();
        let line = csv.lines().nth(1).unwrap();
        // 100-digit decimal string
        assert!(line.len() > 90, "line too short: {line}");
    }
}
