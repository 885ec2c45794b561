//! Finite-horizon linear-quadratic target control.
//!
//! Minimizes `J = 1/2 int [x^T Q x + 2 x^T M u + u^T R u] dt` subject to the
//! target boundary condition. Decoupling the Hamiltonian system splits the
//! optimal input into state feedback plus a feedforward term built on the
//! closed-loop matrix:
//!
//! ```text
//! u_c(t)  = -R^-1 (M^T + B^T S) x(t)
//!           + R^-1 B^T e^{~A^T (tf - t)} C^T (C ~W C^T)^-1 ~beta
//! ~A      = A - B R^-1 M^T - B R^-1 B^T S
//! ~W      = int e^{~A (tf - s)} B R^-1 B^T e^{~A^T (tf - s)} ds
//! ```
//!
//! where S is the stabilizing solution of the continuous algebraic Riccati
//! equation `S BB^T S - S A^bar - A^bar^T S - Q^bar = 0` in the barred
//! variables. With `(Q, M, R) = (0, 0, I)` everything reduces to the
//! minimum-energy input.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::ctrlcfg::build_input_matrix;
use crate::error::{Error, Result};
use crate::gramian::{compute_gramian, eig_decompose_matrix, EigDecomp, Gramian, InputMatrix};
use crate::linalg;
use crate::minenergy::{
    closed_loop_signal, modal_from_adjoint, ControlProblem, ControlSignal, ModalSignal, Trajectory,
};
use crate::mp::{log10_f64, PrecisionConfig};
use crate::ode;
use crate::quad::QuadratureRule;
use rug::Float;

/// CARE residual bound: `||R(S)||_F <= CARE_TOL * (1 + ||S||_F^2)`.
pub const CARE_TOL: f64 = 1e-8;

const PSD_TOL: f64 = 1e-10;

/// Weights of the quadratic cost. Q symmetric PSD, R symmetric PD.
#[derive(Clone, Debug)]
pub struct QuadraticCost {
    q: Array2<f64>,
    m: Array2<f64>,
    r: Array2<f64>,
}

impl QuadraticCost {
    /// `Q = zeta I`, `M = 0`, `R = I`.
    pub fn uniform_state_weight(n: usize, m_inputs: usize, zeta: f64) -> Result<Self> {
        if zeta < 0.0 {
            return Err(Error::Config(format!(
                "state weight must be nonnegative, got {zeta}"
            )));
        }
        Ok(QuadraticCost {
            q: Array2::eye(n) * zeta,
            m: Array2::zeros((n, m_inputs)),
            r: Array2::eye(m_inputs),
        })
    }

    pub fn new(q: Array2<f64>, m: Array2<f64>, r: Array2<f64>) -> Result<Self> {
        let n = q.nrows();
        let mi = r.nrows();
        if q.ncols() != n || r.ncols() != mi || m.nrows() != n || m.ncols() != mi {
            return Err(Error::Config("cost matrix dimensions are inconsistent".into()));
        }
        check_symmetric(&q, "Q")?;
        check_symmetric(&r, "R")?;
        let (qw, _) = linalg::sym_eigen(&q)?;
        let scale_q = qw.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
        if qw.iter().any(|&w| w < -PSD_TOL * scale_q) {
            return Err(Error::Config("Q must be positive semidefinite".into()));
        }
        let (rw, _) = linalg::sym_eigen(&r)?;
        if rw.iter().any(|&w| w <= 0.0) {
            return Err(Error::Config("R must be positive definite".into()));
        }
        Ok(QuadraticCost { q, m, r })
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn m(&self) -> &Array2<f64> {
        &self.m
    }

    pub fn r(&self) -> &Array2<f64> {
        &self.r
    }

    pub fn input_dim(&self) -> usize {
        self.r.nrows()
    }

    /// True when the cost reduces the LQ problem to minimum energy.
    pub fn is_minimum_energy(&self) -> bool {
        let eye = Array2::<f64>::eye(self.r.nrows());
        self.q.iter().all(|&x| x == 0.0)
            && self.m.iter().all(|&x| x == 0.0)
            && self.r == eye
    }
}

fn check_symmetric(a: &Array2<f64>, name: &str) -> Result<()> {
    let scale = linalg::frob(a).max(1.0);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Config(format!("{name} must be symmetric")));
            }
        }
    }
    Ok(())
}

/// Barred matrices entering the Riccati equation.
#[derive(Clone, Debug)]
pub struct BarMatrices {
    pub a_bar: Array2<f64>,
    pub b_bar: Array2<f64>,
    pub q_bar: Array2<f64>,
    /// `R^{-1/2}`, kept for building the closed-loop Gramian kernel.
    pub r_inv_sqrt: Array2<f64>,
}

/// `A_bar = A - B R^-1 M^T`, `B_bar = B R^-1/2`, `Q_bar = Q - M R^-1 M^T`.
pub fn bar_matrices(a: &Array2<f64>, b: &Array2<f64>, cost: &QuadraticCost) -> Result<BarMatrices> {
    let n = a.nrows();
    if b.nrows() != n || cost.q.nrows() != n || cost.m.nrows() != n || b.ncols() != cost.input_dim()
    {
        return Err(Error::Config("system/cost dimensions are inconsistent".into()));
    }
    let (_, r_inv_sqrt) = linalg::sym_sqrt_pair(&cost.r)?;
    // R^-1 M^T via linear solve
    let r_inv_mt = linalg::solve(&cost.r, &cost.m.t().to_owned())?;
    let a_bar = a - &b.dot(&r_inv_mt);
    let b_bar = b.dot(&r_inv_sqrt);
    let q_bar = &cost.q - &cost.m.dot(&r_inv_mt);

    let (qw, _) = linalg::sym_eigen(&q_bar)?;
    let scale = qw.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    if qw.iter().any(|&w| w < -PSD_TOL * scale) {
        return Err(Error::Config(
            "Q - M R^-1 M^T must be positive semidefinite for a valid cost".into(),
        ));
    }
    Ok(BarMatrices {
        a_bar,
        b_bar,
        q_bar,
        r_inv_sqrt,
    })
}

/// Stabilizing CARE solution with diagnostics.
#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    pub s: Array2<f64>,
    pub residual: f64,
    pub bars: BarMatrices,
}

/// Solve `S BB^T S - S A - A^T S - Q = 0` (barred variables) for the
/// stabilizing symmetric solution: ordered real Schur decomposition of the
/// Hamiltonian, stable-invariant-subspace extraction, then one Newton
/// (Kleinman) refinement step.
pub fn solve_care(bars: BarMatrices) -> Result<RiccatiSolution> {
    let n = bars.a_bar.nrows();
    let g = bars.b_bar.dot(&bars.b_bar.t()); // B R^-1 B^T

    let mut s = if linalg::frob(&bars.q_bar) == 0.0 {
        // S = 0 solves the equation; it is stabilizing iff A_bar is Hurwitz
        Array2::<f64>::zeros((n, n))
    } else {
        // Hamiltonian [[A, -G], [-Q, -A^T]]
        let mut h = Array2::<f64>::zeros((2 * n, 2 * n));
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = bars.a_bar[(i, j)];
                h[(i, n + j)] = -g[(i, j)];
                h[(n + i, j)] = -bars.q_bar[(i, j)];
                h[(n + i, n + j)] = -bars.a_bar[(j, i)];
            }
        }
        let (z, sdim) = linalg::ordered_schur_stable(&h)?;
        if sdim != n {
            return Err(Error::Riccati(format!(
                "Hamiltonian has {sdim} stable eigenvalues, expected {n}; \
                 no stabilizing solution"
            )));
        }
        let u11 = z.slice(ndarray::s![0..n, 0..n]).to_owned();
        let u21 = z.slice(ndarray::s![n..2 * n, 0..n]).to_owned();
        // S = U21 U11^-1  (solve U11^T S^T = U21^T)
        let st = linalg::solve(&u11.t().to_owned(), &u21.t().to_owned())?;
        let s0 = st.t().to_owned();
        let s0 = 0.5 * (&s0 + &s0.t());

        // one Kleinman step: A_0^T S + S A_0 = -(Q + S_0 G S_0)
        let a0 = &bars.a_bar - &g.dot(&s0);
        let rhs = &bars.q_bar + &s0.dot(&g).dot(&s0);
        linalg::lyapunov_transposed(&a0, &rhs)?
    };
    s = 0.5 * (&s + &s.t());

    // residual of the paper-form equation
    let sg = s.dot(&g);
    let res_mat = &sg.dot(&s) - &s.dot(&bars.a_bar) - &bars.a_bar.t().dot(&s) - &bars.q_bar;
    let s_frob = linalg::frob(&s);
    let residual = linalg::frob(&res_mat);
    if residual > CARE_TOL * (1.0 + s_frob * s_frob) {
        return Err(Error::Riccati(format!(
            "CARE residual {residual:.3e} exceeds tolerance (||S||_F = {s_frob:.3e})"
        )));
    }

    // the closed loop must be Hurwitz for the solution to be stabilizing
    let a_tilde = &bars.a_bar - &g.dot(&s);
    let abscissa = linalg::spectral_abscissa(&a_tilde)?;
    if abscissa >= 0.0 {
        return Err(Error::Riccati(format!(
            "closed-loop spectral abscissa {abscissa:.3e} is not negative; \
             solution is not stabilizing"
        )));
    }

    Ok(RiccatiSolution {
        s,
        residual,
        bars,
    })
}

/// Closed-loop system for the LQ feedforward term.
pub struct TildeSystem {
    pub a_tilde: Array2<f64>,
    pub decomp: EigDecomp,
    pub w_tilde: Gramian,
    pub beta_tilde: Array1<f64>,
    b_eff: Array2<f64>,
}

impl TildeSystem {
    pub fn b_eff(&self) -> &Array2<f64> {
        &self.b_eff
    }
}

/// Build the closed-loop matrix, its weighted Gramian over the problem's
/// targets, and the closed-loop maneuver.
pub fn tilde_system(
    prob: &ControlProblem,
    care: &RiccatiSolution,
    prec: &PrecisionConfig,
) -> Result<TildeSystem> {
    let g = care.bars.b_bar.dot(&care.bars.b_bar.t());
    let a_tilde = &care.bars.a_bar - &g.dot(&care.s);
    let decomp = eig_decompose_matrix(&a_tilde)?;

    let b = build_input_matrix(&prob.inputs, prob.n())?;
    let b_eff = b.dot(&care.bars.r_inv_sqrt);
    let w_tilde = compute_gramian(
        &decomp,
        &InputMatrix::Dense(&b_eff),
        &prob.targets,
        prob.t0,
        prob.tf,
        prec,
    )?;

    let free = decomp.propagate(&prob.x0, prob.tf - prob.t0);
    let beta_tilde = Array1::from_iter(
        prob.targets
            .nodes()
            .iter()
            .zip(prob.yf.iter())
            .map(|(&node, &y)| y - free[node]),
    );

    Ok(TildeSystem {
        a_tilde,
        decomp,
        w_tilde,
        beta_tilde,
        b_eff,
    })
}

/// The synthesized LQ control: combined sampled signal, realized trajectory,
/// and the two constituent parts for energy decomposition.
pub struct LqControl {
    pub signal: ControlSignal,
    pub trajectory: Trajectory,
    feedforward: ModalSignal,
    gain: Array2<f64>,
    dense: Arc<ode::DenseOutput>,
}

/// Synthesize the LQ optimal input by closed-loop integration.
///
/// The feedback part `-R^-1 (M^T + B^T S) x(t)` needs the realized state, so
/// the state equation is integrated with the feedforward injected; the
/// returned signal evaluates feedback against the stored trajectory.
pub fn lq_optimal_input(
    prob: &ControlProblem,
    cost: &QuadraticCost,
    care: &RiccatiSolution,
    tilde: &TildeSystem,
    points: usize,
) -> Result<LqControl> {
    let n = prob.n();
    let m = prob.m();
    if cost.input_dim() != m {
        return Err(Error::Config(format!(
            "cost is sized for {} inputs, problem has {m}",
            cost.input_dim()
        )));
    }

    // feedforward: R^-1 B^T e^{~A^T (tf-t)} C^T (C ~W C^T)^-1 ~beta
    let bits = tilde.w_tilde.precision().bits();
    let beta_mp: Vec<Float> = tilde
        .beta_tilde
        .iter()
        .map(|&x| Float::with_val(bits, x))
        .collect();
    let alpha = tilde.w_tilde.apply_inverse(&beta_mp)?;
    let mut gvec = Array1::<f64>::zeros(n);
    for (&node, a) in prob.targets.nodes().iter().zip(&alpha) {
        gvec[node] = a.to_f64();
    }
    let r_inv = linalg::inverse(cost.r())?;
    let feedforward = modal_from_adjoint(&tilde.decomp, &prob.inputs, &gvec, Some(&r_inv), prob.tf);

    // feedback gain K = R^-1 (M^T + B^T S): B^T S selects driver rows of S
    let mut mt_bts = cost.m().t().to_owned();
    for (j, &d) in prob.inputs.nodes().iter().enumerate() {
        for i in 0..n {
            mt_bts[(j, i)] += care.s[(d, i)];
        }
    }
    let gain = linalg::solve(cost.r(), &mt_bts)?;

    // closed loop: x' = A x + B (u2(t) - K x)
    let a = prob.net.matrix()?;
    let drivers = prob.inputs.nodes().to_vec();
    let mut ubuf = vec![0.0; m];
    let ff = feedforward.clone();
    let gain_rhs = gain.clone();
    let dense = ode::integrate(
        move |t, x, dx| {
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[(i, k)] * x[k];
                }
                dx[i] = acc;
            }
            ff.eval_into(t, &mut ubuf);
            for (j, &d) in drivers.iter().enumerate() {
                let mut fb = 0.0;
                for i in 0..n {
                    fb += gain_rhs[(j, i)] * x[i];
                }
                dx[d] += ubuf[j] - fb;
            }
        },
        prob.t0,
        prob.tf,
        prob.x0.as_slice().expect("contiguous state vector"),
        crate::minenergy::SIM_TOL,
        crate::minenergy::SIM_TOL,
    )?;
    let dense = Arc::new(dense);
    let trajectory = Trajectory::from_dense(&dense, &prob.targets, points);
    let signal = closed_loop_signal(
        feedforward.clone(),
        gain.clone(),
        Arc::clone(&dense),
        m,
        prob.t0,
        prob.tf,
        points,
    );

    Ok(LqControl {
        signal,
        trajectory,
        feedforward,
        gain,
        dense,
    })
}

/// Input-energy decomposition of the LQ control (Legendre-Gauss quadrature of
/// `int u_c^T u_c dt`): the pure feedforward term plus the state and cross
/// terms that involve the realized trajectory.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LqEnergy {
    pub total: f64,
    pub feedforward_term: f64,
    pub state_term: f64,
    pub cross_term: f64,
}

pub fn lq_energy(control: &LqControl, rule: &QuadratureRule) -> LqEnergy {
    let (t0, tf) = control.signal.horizon();
    let m = control.signal.channels();
    let n = control.gain.ncols();
    let mut u2 = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    let mut x = vec![0.0; n];
    let mut e_ff = 0.0;
    let mut e_state = 0.0;
    let mut e_cross = 0.0;
    for (&tau, &w) in rule
        .mapped_points(t0, tf)
        .iter()
        .zip(rule.weights().iter())
    {
        control.feedforward.eval_into(tau, &mut u2);
        control.dense.eval(tau, &mut x);
        for j in 0..m {
            let mut fb = 0.0;
            for i in 0..n {
                fb += control.gain[(j, i)] * x[i];
            }
            u1[j] = -fb;
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        e_ff += w * dot(&u2, &u2);
        e_state += w * dot(&u1, &u1);
        e_cross += w * 2.0 * dot(&u1, &u2);
    }
    let half = 0.5 * (tf - t0);
    LqEnergy {
        total: half * (e_ff + e_state + e_cross),
        feedforward_term: half * e_ff,
        state_term: half * e_state,
        cross_term: half * e_cross,
    }
}

/// Closed-form value of the feedforward quadratic form
/// `~beta^T ~W_p^-1 ~beta` (equals the pure feedforward energy when R = I).
pub fn feedforward_quadratic_form(tilde: &TildeSystem) -> Result<crate::minenergy::EnergyValue> {
    let bits = tilde.w_tilde.precision().bits();
    let beta_mp: Vec<Float> = tilde
        .beta_tilde
        .iter()
        .map(|&x| Float::with_val(bits, x))
        .collect();
    let e = tilde.w_tilde.quadratic_form_inv(&beta_mp)?;
    Ok(crate::minenergy::EnergyValue {
        value: e.to_f64(),
        log10: log10_f64(&e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctrlcfg::{select_drivers, InputSet, TargetSet};
    use crate::gramian::{compute_gramian, eig_decompose, InputMatrix};
    use crate::minenergy::{
        energy_closed_form, energy_quadrature, maneuver, min_energy_input, simulate,
    };
    use crate::netgen::{assign_weights, generate_static, stabilize, Network};
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn bar_matrices_identity_cost() {
        let a = array![[-1.0, 0.0], [1.0, -2.0]];
        let b = array![[1.0], [0.0]];
        let cost = QuadraticCost::uniform_state_weight(2, 1, 3.0).unwrap();
        let bars = bar_matrices(&a, &b, &cost).unwrap();
        assert_eq!(bars.a_bar, a);
        assert_eq!(bars.b_bar, b);
        assert_eq!(bars.q_bar, Array2::<f64>::eye(2) * 3.0);
    }

    #[test]
    fn bar_matrices_scaled_r() {
        let a = array![[-1.0]];
        let b = array![[1.0]];
        let cost = QuadraticCost::new(array![[0.0]], array![[0.0]], array![[4.0]]).unwrap();
        let bars = bar_matrices(&a, &b, &cost).unwrap();
        assert_relative_eq!(bars.b_bar[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn scalar_care_stabilizing_root() {
        // s^2 + 2s - 3 = 0 -> s = 1 (stabilizing), a_tilde = -2
        let bars = bar_matrices(
            &array![[-1.0]],
            &array![[1.0]],
            &QuadraticCost::new(array![[3.0]], array![[0.0]], array![[1.0]]).unwrap(),
        )
        .unwrap();
        let sol = solve_care(bars).unwrap();
        assert_relative_eq!(sol.s[(0, 0)], 1.0, epsilon = 1e-10);
        assert!(sol.residual <= CARE_TOL);
    }

    #[test]
    fn zero_state_weight_gives_zero_solution() {
        let a = array![[-1.0, 0.5], [0.0, -2.0]];
        let b = array![[1.0], [1.0]];
        let cost = QuadraticCost::uniform_state_weight(2, 1, 0.0).unwrap();
        let bars = bar_matrices(&a, &b, &cost).unwrap();
        let sol = solve_care(bars).unwrap();
        assert_eq!(linalg::frob(&sol.s), 0.0);
    }

    #[test]
    fn random_care_residual_and_stability() {
        let net = generate_static(10, 2.5, 2.5, 2.0, 13).unwrap();
        let net = stabilize(&assign_weights(&net, 13).unwrap()).unwrap();
        let a = net.matrix().unwrap();
        let inputs = select_drivers(&net, 5, 13).unwrap();
        let b = build_input_matrix(&inputs, 10).unwrap();
        // SPD Q via G G^T + I
        let g = Array2::from_shape_fn((10, 10), |(i, j)| ((i * 7 + j * 11 + 1) % 10) as f64 / 10.0);
        let q = g.dot(&g.t()) + Array2::<f64>::eye(10);
        let q = 0.5 * (&q + &q.t());
        let cost = QuadraticCost::new(q, Array2::zeros((10, 5)), Array2::eye(5)).unwrap();
        let bars = bar_matrices(&a, &b, &cost).unwrap();
        let sol = solve_care(bars).unwrap();
        let s_frob = linalg::frob(&sol.s);
        assert!(sol.residual <= CARE_TOL * (1.0 + s_frob * s_frob));
        let g_mat = sol.bars.b_bar.dot(&sol.bars.b_bar.t());
        let a_tilde = &sol.bars.a_bar - &g_mat.dot(&sol.s);
        assert!(linalg::spectral_abscissa(&a_tilde).unwrap() < 0.0);
        // symmetry
        let asym = linalg::frob(&(&sol.s - &sol.s.t()));
        assert!(asym < 1e-12 * (1.0 + s_frob));
    }

    fn scalar_problem(q: f64, x0: f64, yf: f64) -> (ControlProblem, QuadraticCost) {
        let net = Network::from_edges(1, [])
            .unwrap()
            .with_delta(vec![0.0])
            .unwrap();
        let net = stabilize(&net).unwrap(); // A = [-1]
        let prob = ControlProblem::new(
            net,
            InputSet::new(vec![0], 1).unwrap(),
            TargetSet::all(1),
            array![x0],
            array![yf],
            0.0,
            1.0,
        )
        .unwrap();
        let cost = QuadraticCost::new(array![[q]], array![[0.0]], array![[1.0]]).unwrap();
        (prob, cost)
    }

    #[test]
    fn scalar_tilde_gramian() {
        // a=-1, b=1, q=3, r=1: s=1, a_tilde=-2, W~ = (1 - e^-4)/4
        let (prob, cost) = scalar_problem(3.0, 0.0, 1.0);
        let a = prob.net.matrix().unwrap();
        let b = build_input_matrix(&prob.inputs, 1).unwrap();
        let care = solve_care(bar_matrices(&a, &b, &cost).unwrap()).unwrap();
        let prec = PrecisionConfig::new(60).unwrap();
        let tilde = tilde_system(&prob, &care, &prec).unwrap();
        assert_relative_eq!(tilde.a_tilde[(0, 0)], -2.0, epsilon = 1e-9);
        let expect = (1.0 - (-4.0f64).exp()) / 4.0;
        assert_relative_eq!(
            tilde.w_tilde.smallest_eigenvalue().to_f64(),
            expect,
            max_relative = 1e-9
        );
    }

    #[test]
    fn scalar_lq_reaches_target() {
        let (prob, cost) = scalar_problem(3.0, 0.5, 1.0);
        let a = prob.net.matrix().unwrap();
        let b = build_input_matrix(&prob.inputs, 1).unwrap();
        let care = solve_care(bar_matrices(&a, &b, &cost).unwrap()).unwrap();
        let prec = PrecisionConfig::new(60).unwrap();
        let tilde = tilde_system(&prob, &care, &prec).unwrap();
        let control = lq_optimal_input(&prob, &cost, &care, &tilde, 101).unwrap();
        assert_relative_eq!(control.trajectory.final_output[0], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn scalar_feedforward_energy_with_origin_start() {
        // x0 = 0: u_c2 quadratic form equals beta~^2 / W~
        let (prob, cost) = scalar_problem(3.0, 0.0, 1.0);
        let a = prob.net.matrix().unwrap();
        let b = build_input_matrix(&prob.inputs, 1).unwrap();
        let care = solve_care(bar_matrices(&a, &b, &cost).unwrap()).unwrap();
        let prec = PrecisionConfig::new(60).unwrap();
        let tilde = tilde_system(&prob, &care, &prec).unwrap();
        let w = tilde.w_tilde.smallest_eigenvalue().to_f64();
        let ff = feedforward_quadratic_form(&tilde).unwrap();
        assert_relative_eq!(ff.value, 1.0 / w, max_relative = 1e-9);
        // quadrature decomposition agrees on the feedforward term
        let control = lq_optimal_input(&prob, &cost, &care, &tilde, 101).unwrap();
        let rule = QuadratureRule::legendre_gauss(50).unwrap();
        let e = lq_energy(&control, &rule);
        assert_relative_eq!(e.feedforward_term, ff.value, max_relative = 1e-8);
        assert_relative_eq!(
            e.total,
            e.feedforward_term + e.state_term + e.cross_term,
            max_relative = 1e-12
        );
    }

    #[test]
    fn reduction_to_minimum_energy() {
        // (Q, M, R) = (0, 0, I): LQ input and energy match the minimum-energy
        // machinery to hardware accuracy
        let net = generate_static(12, 2.5, 2.5, 2.0, 31).unwrap();
        let net = stabilize(&assign_weights(&net, 32).unwrap()).unwrap();
        let inputs = select_drivers(&net, 6, 33).unwrap();
        let targets = TargetSet::new(vec![0, 3, 8], 12).unwrap();
        let x0 = Array1::from_shape_fn(12, |i| 0.1 * (i as f64 + 1.0).sin());
        let yf = array![1.0, -0.5, 0.25];
        let prob = ControlProblem::new(net, inputs, targets, x0, yf, 0.0, 1.0).unwrap();
        let prec = PrecisionConfig::new(60).unwrap();

        let decomp = eig_decompose(&prob.net).unwrap();
        let gram = compute_gramian(
            &decomp,
            &InputMatrix::Versors(&prob.inputs),
            &prob.targets,
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        let u_me = min_energy_input(&prob, &gram, &decomp, 101).unwrap();

        let cost = QuadraticCost::uniform_state_weight(12, 6, 0.0).unwrap();
        let a = prob.net.matrix().unwrap();
        let b = build_input_matrix(&prob.inputs, 12).unwrap();
        let care = solve_care(bar_matrices(&a, &b, &cost).unwrap()).unwrap();
        let tilde = tilde_system(&prob, &care, &prec).unwrap();
        let control = lq_optimal_input(&prob, &cost, &care, &tilde, 101).unwrap();

        // pointwise agreement of the inputs
        for &t in &[0.0, 0.21, 0.5, 0.83, 1.0] {
            let a = u_me.eval(t);
            let b = control.signal.eval(t);
            for j in 0..6 {
                assert_relative_eq!(a[j], b[j], epsilon = 1e-8, max_relative = 1e-8);
            }
        }

        // energy agreement between all routes
        let man = maneuver(&prob, &decomp);
        let e_cf = energy_closed_form(&man, &gram).unwrap();
        let rule = QuadratureRule::legendre_gauss(50).unwrap();
        let e_lq = lq_energy(&control, &rule);
        assert_relative_eq!(e_lq.total, e_cf.value, max_relative = 1e-8);
        assert!(e_lq.state_term.abs() <= 1e-8 * e_lq.total.max(1.0));
        assert!(e_lq.cross_term.abs() <= 1e-8 * e_lq.total.max(1.0));
        let e_q = energy_quadrature(&u_me, &rule);
        assert_relative_eq!(e_lq.total, e_q, max_relative = 1e-8);

        // and the closed loop reaches the target
        assert_relative_eq!(control.trajectory.final_output[0], 1.0, epsilon = 1e-6);
        let traj_me = simulate(&prob, &u_me, 101).unwrap();
        for j in 0..3 {
            assert_relative_eq!(
                control.trajectory.final_output[j],
                traj_me.final_output[j],
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn beta_tilde_zero_from_origin_gives_zero_input() {
        // x0 = 0 and yf equal to the free response (zero): both parts vanish
        let (prob0, cost) = scalar_problem(3.0, 0.0, 0.0);
        let a = prob0.net.matrix().unwrap();
        let b = build_input_matrix(&prob0.inputs, 1).unwrap();
        let care = solve_care(bar_matrices(&a, &b, &cost).unwrap()).unwrap();
        let prec = PrecisionConfig::new(60).unwrap();
        let tilde = tilde_system(&prob0, &care, &prec).unwrap();
        assert!(tilde.beta_tilde[0].abs() < 1e-14);
        let control = lq_optimal_input(&prob0, &cost, &care, &tilde, 51).unwrap();
        for &t in &[0.0, 0.4, 1.0] {
            assert!(control.signal.eval(t)[0].abs() < 1e-10);
        }
    }

    #[test]
    fn nonsymmetric_q_is_rejected() {
        let q = array![[1.0, 0.5], [0.0, 1.0]];
        assert!(QuadraticCost::new(q, Array2::zeros((2, 1)), Array2::eye(1)).is_err());
    }

    #[test]
    fn indefinite_cross_weight_is_rejected() {
        // Q - M R^-1 M^T indefinite
        let q = array![[0.1, 0.0], [0.0, 0.1]];
        let m = array![[1.0], [0.0]];
        let cost = QuadraticCost::new(q, m, Array2::eye(1)).unwrap();
        let a = array![[-1.0, 0.0], [0.0, -2.0]];
        let b = array![[1.0], [0.0]];
        assert!(bar_matrices(&a, &b, &cost).is_err());
    }
}
