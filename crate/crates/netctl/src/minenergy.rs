//! Minimum-energy target control: input synthesis, simulation and energy
//! evaluation.
//!
//! The minimum-energy input steering the targeted outputs to `y_f` is
//!
//! ```text
//! u*(t) = B^T e^{A^T (tf - t)} C^T W_p^-1 beta,
//! beta  = y_f - C e^{A (tf - t0)} x_0
//! ```
//!
//! The Gramian inverse is applied through its extended-precision spectral
//! decomposition; after that one ill-conditioned solve, the signal is a plain
//! sum of complex exponentials and evaluates cheaply anywhere on the horizon.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rug::Float;
use serde::Serialize;

use crate::ctrlcfg::{InputSet, TargetSet};
use crate::error::{Error, Result};
use crate::gramian::{EigDecomp, Gramian};
use crate::mp::log10_f64;
use crate::netgen::Network;
use crate::ode::{self, DenseOutput};
use crate::quad::QuadratureRule;

/// Default number of report-grid points for sampled signals and trajectories.
pub const DEFAULT_REPORT_POINTS: usize = 1001;

/// Integrator tolerances for trajectory simulation.
pub const SIM_TOL: f64 = 1e-10;

/// Boundary data for a target control task.
#[derive(Clone, Debug)]
pub struct ControlProblem {
    pub net: Network,
    pub inputs: InputSet,
    pub targets: TargetSet,
    pub x0: Array1<f64>,
    pub yf: Array1<f64>,
    pub t0: f64,
    pub tf: f64,
}

impl ControlProblem {
    pub fn new(
        net: Network,
        inputs: InputSet,
        targets: TargetSet,
        x0: Array1<f64>,
        yf: Array1<f64>,
        t0: f64,
        tf: f64,
    ) -> Result<Self> {
        let n = net.n();
        if x0.len() != n {
            return Err(Error::Config(format!(
                "x0 has {} entries, expected {n}",
                x0.len()
            )));
        }
        if yf.len() != targets.len() {
            return Err(Error::Config(format!(
                "yf has {} entries, expected {} (one per target)",
                yf.len(),
                targets.len()
            )));
        }
        if !(tf > t0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got [{t0}, {tf}]"
            )));
        }
        if inputs.nodes().iter().any(|&d| d >= n) || targets.nodes().iter().any(|&t| t >= n) {
            return Err(Error::Config("driver or target index out of range".into()));
        }
        Ok(ControlProblem {
            net,
            inputs,
            targets,
            x0,
            yf,
            t0,
            tf,
        })
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn m(&self) -> usize {
        self.inputs.len()
    }

    pub fn p(&self) -> usize {
        self.targets.len()
    }
}

/// The control maneuver `beta`: the displacement the input must produce on
/// top of the free response.
#[derive(Clone, Debug)]
pub struct Maneuver {
    pub beta: Array1<f64>,
}

impl Maneuver {
    pub fn magnitude(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.0)
    }
}

/// `beta = y_f - C e^{A (tf - t0)} x_0`, through the eigendecomposition.
pub fn maneuver(prob: &ControlProblem, decomp: &EigDecomp) -> Maneuver {
    let free = decomp.propagate(&prob.x0, prob.tf - prob.t0);
    let beta = Array1::from_iter(
        prob.targets
            .nodes()
            .iter()
            .zip(prob.yf.iter())
            .map(|(&node, &y)| y - free[node]),
    );
    Maneuver { beta }
}

/// Sum of complex exponentials `u_j(t) = Re sum_i c_ji e^{l_i (tf - t)}`.
#[derive(Clone, Debug)]
pub struct ModalSignal {
    coeff: Array2<Complex64>, // m x n
    lambda: Vec<Complex64>,
    tf: f64,
}

impl ModalSignal {
    pub fn zero(channels: usize, tf: f64) -> Self {
        ModalSignal {
            coeff: Array2::zeros((channels, 0)),
            lambda: Vec::new(),
            tf,
        }
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let s = self.tf - t;
        out.fill(0.0);
        if self.lambda.is_empty() {
            return;
        }
        let exps: Vec<Complex64> = self.lambda.iter().map(|l| (l * s).exp()).collect();
        for (j, mut_row) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, e) in exps.iter().enumerate() {
                let c = self.coeff[(j, i)];
                acc += c.re * e.re - c.im * e.im;
            }
            *mut_row = acc;
        }
    }
}

enum Evaluator {
    /// Open-loop modal form.
    Modal(ModalSignal),
    /// Feedforward modal part plus state feedback `-K x(t)` read from a
    /// stored trajectory.
    ClosedLoop {
        modal: ModalSignal,
        gain: Array2<f64>,
        trajectory: Arc<DenseOutput>,
    },
}

/// A synthesized control input: samples on a report grid plus an exact
/// evaluator for any time on the horizon.
pub struct ControlSignal {
    times: Vec<f64>,
    values: Array2<f64>, // len x m
    evaluator: Evaluator,
    t0: f64,
    tf: f64,
}

impl ControlSignal {
    fn from_evaluator(evaluator: Evaluator, m: usize, t0: f64, tf: f64, points: usize) -> Self {
        let pts = points.max(2);
        let times: Vec<f64> = (0..pts)
            .map(|k| t0 + (tf - t0) * k as f64 / (pts - 1) as f64)
            .collect();
        let mut values = Array2::<f64>::zeros((pts, m));
        let mut buf = vec![0.0; m];
        for (k, &t) in times.iter().enumerate() {
            eval_impl(&evaluator, t, &mut buf);
            for j in 0..m {
                values[(k, j)] = buf[j];
            }
        }
        ControlSignal {
            times,
            values,
            evaluator,
            t0,
            tf,
        }
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn horizon(&self) -> (f64, f64) {
        (self.t0, self.tf)
    }

    pub fn eval(&self, t: f64) -> Array1<f64> {
        let mut out = vec![0.0; self.channels()];
        eval_impl(&self.evaluator, t, &mut out);
        Array1::from_vec(out)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        eval_impl(&self.evaluator, t, out);
    }
}

fn eval_impl(evaluator: &Evaluator, t: f64, out: &mut [f64]) {
    match evaluator {
        Evaluator::Modal(m) => m.eval_into(t, out),
        Evaluator::ClosedLoop {
            modal,
            gain,
            trajectory,
        } => {
            modal.eval_into(t, out);
            let n = gain.ncols();
            let mut x = vec![0.0; n];
            trajectory.eval(t, &mut x);
            for (j, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    acc += gain[(j, i)] * xi;
                }
                *o -= acc;
            }
        }
    }
}

/// Build the open-loop modal signal `prefactor * B^T e^{A^T (tf - t)} g` for
/// an n-vector g, optionally left-multiplied by a constant matrix.
pub(crate) fn modal_from_adjoint(
    decomp: &EigDecomp,
    inputs: &InputSet,
    g: &Array1<f64>,
    prefactor: Option<&Array2<f64>>,
    tf: f64,
) -> ModalSignal {
    let n = decomp.n();
    let m = inputs.len();
    // h = V^T g
    let gc = g.mapv(|x| Complex64::new(x, 0.0));
    let h = linalg_vt_dot(decomp, &gc);
    // raw coefficients c_ji = (V^-1)_{i, d_j} h_i
    let mut coeff = Array2::<Complex64>::zeros((m, n));
    for (j, &d) in inputs.nodes().iter().enumerate() {
        for i in 0..n {
            coeff[(j, i)] = decomp.v_inv()[(i, d)] * h[i];
        }
    }
    let coeff = match prefactor {
        Some(r) => {
            // rows mix: out[j, i] = sum_k r[j, k] coeff[k, i]
            let mut out = Array2::<Complex64>::zeros((m, n));
            for j in 0..m {
                for i in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..m {
                        acc += r[(j, k)] * coeff[(k, i)];
                    }
                    out[(j, i)] = acc;
                }
            }
            out
        }
        None => coeff,
    };
    ModalSignal {
        coeff,
        lambda: decomp.lambda().to_vec(),
        tf,
    }
}

fn linalg_vt_dot(decomp: &EigDecomp, g: &Array1<Complex64>) -> Vec<Complex64> {
    let n = decomp.n();
    let v = decomp.v();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += v[(k, i)] * g[k];
            }
            acc
        })
        .collect()
}

/// Synthesize the minimum-energy input for an output-controllable problem.
///
/// The Gramian must have been computed for the problem's targets and horizon.
pub fn min_energy_input(
    prob: &ControlProblem,
    gram: &Gramian,
    decomp: &EigDecomp,
    points: usize,
) -> Result<ControlSignal> {
    if gram.targets() != &prob.targets {
        return Err(Error::Config(
            "Gramian targets do not match the problem's target set".into(),
        ));
    }
    if gram.horizon() != (prob.t0, prob.tf) {
        return Err(Error::Config(
            "Gramian horizon does not match the problem's horizon".into(),
        ));
    }
    let man = maneuver(prob, decomp);
    let bits = gram.precision().bits();
    let beta_mp: Vec<Float> = man.beta.iter().map(|&b| Float::with_val(bits, b)).collect();
    let alpha = gram.apply_inverse(&beta_mp)?;

    // g = C^T alpha: scatter the target-space coefficients into state space
    let mut g = Array1::<f64>::zeros(prob.n());
    for (&node, a) in prob.targets.nodes().iter().zip(&alpha) {
        g[node] = a.to_f64();
    }
    let modal = modal_from_adjoint(decomp, &prob.inputs, &g, None, prob.tf);
    Ok(ControlSignal::from_evaluator(
        Evaluator::Modal(modal),
        prob.m(),
        prob.t0,
        prob.tf,
        points,
    ))
}

pub(crate) fn closed_loop_signal(
    modal: ModalSignal,
    gain: Array2<f64>,
    trajectory: Arc<DenseOutput>,
    m: usize,
    t0: f64,
    tf: f64,
    points: usize,
) -> ControlSignal {
    ControlSignal::from_evaluator(
        Evaluator::ClosedLoop {
            modal,
            gain,
            trajectory,
        },
        m,
        t0,
        tf,
        points,
    )
}

/// Simulated state and output trajectories on a uniform report grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Array2<f64>,  // len x n
    pub outputs: Array2<f64>, // len x p
    pub final_state: Array1<f64>,
    pub final_output: Array1<f64>,
}

impl Trajectory {
    pub(crate) fn from_dense(
        dense: &DenseOutput,
        targets: &TargetSet,
        points: usize,
    ) -> Trajectory {
        let (times, states_v) = dense.sample_uniform(points);
        let n = dense.final_state().len();
        let len = times.len();
        let mut states = Array2::<f64>::zeros((len, n));
        let mut outputs = Array2::<f64>::zeros((len, targets.len()));
        for (k, row) in states_v.iter().enumerate() {
            for i in 0..n {
                states[(k, i)] = row[i];
            }
            for (c, &node) in targets.nodes().iter().enumerate() {
                outputs[(k, c)] = row[node];
            }
        }
        let final_state = Array1::from_vec(dense.final_state().to_vec());
        let final_output =
            Array1::from_iter(targets.nodes().iter().map(|&node| final_state[node]));
        Trajectory {
            times,
            states,
            outputs,
            final_state,
            final_output,
        }
    }
}

/// Integrate `x' = A x + B u(t)` for an arbitrary state matrix and driver
/// set; the network stability invariants are not required here.
pub fn simulate_system(
    a: &Array2<f64>,
    inputs: &InputSet,
    targets: &TargetSet,
    u: &ControlSignal,
    x0: &Array1<f64>,
    t0: f64,
    tf: f64,
    points: usize,
) -> Result<Trajectory> {
    let n = a.nrows();
    let m = inputs.len();
    let drivers = inputs.nodes().to_vec();
    let mut ubuf = vec![0.0; m];
    let dense = ode::integrate(
        move |t, x, dx| {
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[(i, k)] * x[k];
                }
                dx[i] = acc;
            }
            u.eval_into(t, &mut ubuf);
            for (j, &d) in drivers.iter().enumerate() {
                dx[d] += ubuf[j];
            }
        },
        t0,
        tf,
        x0.as_slice().expect("contiguous state vector"),
        SIM_TOL,
        SIM_TOL,
    )?;
    Ok(Trajectory::from_dense(&dense, targets, points))
}

/// Simulate the controlled network on the problem's horizon.
pub fn simulate(prob: &ControlProblem, u: &ControlSignal, points: usize) -> Result<Trajectory> {
    simulate_system(
        &prob.net.matrix()?,
        &prob.inputs,
        &prob.targets,
        u,
        &prob.x0,
        prob.t0,
        prob.tf,
        points,
    )
}

/// An energy value together with its base-10 logarithm (finite energies can
/// overflow f64 long before the logarithm does).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyValue {
    pub value: f64,
    pub log10: f64,
}

/// Closed-form minimum energy `beta^T W_p^-1 beta` in extended precision.
pub fn energy_closed_form(man: &Maneuver, gram: &Gramian) -> Result<EnergyValue> {
    let bits = gram.precision().bits();
    let beta_mp: Vec<Float> = man.beta.iter().map(|&b| Float::with_val(bits, b)).collect();
    let e = gram.quadratic_form_inv(&beta_mp)?;
    Ok(EnergyValue {
        value: e.to_f64(),
        log10: log10_f64(&e),
    })
}

/// Legendre-Gauss estimate of the input energy `int u^T u dt`.
pub fn energy_quadrature(u: &ControlSignal, rule: &QuadratureRule) -> f64 {
    let (t0, tf) = u.horizon();
    let m = u.channels();
    let mut buf = vec![0.0; m];
    let mut acc = 0.0;
    for (&x, &w) in rule
        .mapped_points(t0, tf)
        .iter()
        .zip(rule.weights().iter())
    {
        u.eval_into(x, &mut buf);
        let norm2: f64 = buf.iter().map(|v| v * v).sum();
        acc += w * norm2;
    }
    0.5 * (tf - t0) * acc
}

/// Min-max bounds on the energy: `(beta^2 / mu_p, beta^2 / mu_1)`.
pub fn energy_bounds(man: &Maneuver, gram: &Gramian) -> Result<(f64, f64)> {
    let (lo, hi) = energy_bounds_mp(man, gram)?;
    Ok((lo.to_f64(), hi.to_f64()))
}

/// Extended-precision variant of [`energy_bounds`].
pub fn energy_bounds_mp(man: &Maneuver, gram: &Gramian) -> Result<(Float, Float)> {
    let floor = gram.precision().controllability_floor();
    if *gram.smallest_eigenvalue() <= floor {
        return Err(Error::NotControllable {
            log10_mu1: gram.log10_mu1(),
            floor_digits: gram.precision().digits() / 2,
        });
    }
    let bits = gram.precision().bits();
    let mut beta2 = Float::new(bits);
    let mut t = Float::new(bits);
    for &b in man.beta.iter() {
        t.assign_f64(b);
        t.square_mut();
        beta2 += &t;
    }
    let values = gram.eigenvalues();
    let lo = Float::with_val(bits, &beta2 / values.last().expect("nonempty spectrum"));
    let hi = Float::with_val(bits, &beta2 / &values[0]);
    Ok((lo, hi))
}

trait AssignF64 {
    fn assign_f64(&mut self, v: f64);
}

impl AssignF64 for Float {
    fn assign_f64(&mut self, v: f64) {
        use rug::Assign;
        self.assign(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctrlcfg::{select_drivers, InputSet, TargetSet};
    use crate::gramian::{compute_gramian, eig_decompose, eig_decompose_matrix, InputMatrix};
    use crate::mp::PrecisionConfig;
    use crate::netgen::{assign_weights, generate_static, stabilize, Network};
    use approx::assert_relative_eq;
    use ndarray::array;

    fn scalar_problem(x0: f64, yf: f64) -> (ControlProblem, Gramian, EigDecomp) {
        let net = Network::from_edges(1, [])
            .unwrap()
            .with_delta(vec![0.0])
            .unwrap();
        let net = stabilize(&net).unwrap(); // A = [-1]
        let inputs = InputSet::new(vec![0], 1).unwrap();
        let targets = TargetSet::all(1);
        let prec = PrecisionConfig::new(60).unwrap();
        let decomp = eig_decompose(&net).unwrap();
        let gram = compute_gramian(
            &decomp,
            &InputMatrix::Versors(&inputs),
            &targets,
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        let prob = ControlProblem::new(
            net,
            inputs,
            targets,
            array![x0],
            array![yf],
            0.0,
            1.0,
        )
        .unwrap();
        (prob, gram, decomp)
    }

    #[test]
    fn maneuver_zero_initial_state() {
        let (prob, _, decomp) = scalar_problem(0.0, 1.0);
        let man = maneuver(&prob, &decomp);
        assert_relative_eq!(man.beta[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn maneuver_free_response_suffices() {
        // x0 = 1, yf = e^-1: beta = 0
        let yf = (-1.0f64).exp();
        let (prob, _, decomp) = scalar_problem(1.0, yf);
        let man = maneuver(&prob, &decomp);
        assert!(man.beta[0].abs() < 1e-14);
    }

    #[test]
    fn maneuver_scalar_decay() {
        // x0 = 1, yf = 0: beta = -e^-1
        let (prob, _, decomp) = scalar_problem(1.0, 0.0);
        let man = maneuver(&prob, &decomp);
        assert_relative_eq!(man.beta[0], -(-1.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn scalar_min_energy_input_closed_form() {
        // u*(t) = e^{-(1-t)} / W with W = (1 - e^-2)/2
        let (prob, gram, decomp) = scalar_problem(0.0, 1.0);
        let u = min_energy_input(&prob, &gram, &decomp, 11).unwrap();
        let w = (1.0 - (-2.0f64).exp()) / 2.0;
        for &t in &[0.0, 0.3, 0.77, 1.0] {
            let expect = (-(1.0 - t) as f64).exp() / w;
            assert_relative_eq!(u.eval(t)[0], expect, max_relative = 1e-12);
        }
        // evaluator matches samples at grid points exactly
        for (k, &t) in u.times().iter().enumerate() {
            assert_eq!(u.samples()[(k, 0)], u.eval(t)[0]);
        }
    }

    #[test]
    fn zero_maneuver_gives_zero_input() {
        let yf = (-1.0f64).exp();
        let (prob, gram, decomp) = scalar_problem(1.0, yf);
        let u = min_energy_input(&prob, &gram, &decomp, 11).unwrap();
        for &t in &[0.0, 0.5, 1.0] {
            assert!(u.eval(t)[0].abs() < 1e-13);
        }
        let man = maneuver(&prob, &decomp);
        let e = energy_closed_form(&man, &gram).unwrap();
        assert!(e.value < 1e-26);
    }

    #[test]
    fn scalar_energy_value() {
        let (prob, gram, decomp) = scalar_problem(0.0, 1.0);
        let man = maneuver(&prob, &decomp);
        let e = energy_closed_form(&man, &gram).unwrap();
        let w = (1.0 - (-2.0f64).exp()) / 2.0;
        assert_relative_eq!(e.value, 1.0 / w, max_relative = 1e-12);
    }

    #[test]
    fn free_decay_simulation() {
        let (prob, gram, decomp) = scalar_problem(1.0, (-1.0f64).exp());
        let u = min_energy_input(&prob, &gram, &decomp, 11).unwrap(); // ~zero
        let traj = simulate(&prob, &u, 11).unwrap();
        assert_relative_eq!(traj.final_state[0], (-1.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn pure_integration_with_zero_matrix() {
        // A = 0 (not Hurwitz; simulation-only path), B = I, u = 1, x(1) = 1
        let a = Array2::<f64>::zeros((2, 2));
        let inputs = InputSet::new(vec![0, 1], 2).unwrap();
        let targets = TargetSet::all(2);
        let modal = ModalSignal {
            coeff: array![
                [Complex64::new(1.0, 0.0)],
                [Complex64::new(1.0, 0.0)]
            ],
            lambda: vec![Complex64::new(0.0, 0.0)],
            tf: 1.0,
        };
        let u = ControlSignal::from_evaluator(Evaluator::Modal(modal), 2, 0.0, 1.0, 5);
        let traj = simulate_system(&a, &inputs, &targets, &u, &array![0.0, 0.0], 0.0, 1.0, 5)
            .unwrap();
        assert_relative_eq!(traj.final_state[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(traj.final_state[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn quadrature_of_constant_signal_is_exact() {
        let modal = ModalSignal {
            coeff: array![[Complex64::new(2.0, 0.0)]],
            lambda: vec![Complex64::new(0.0, 0.0)],
            tf: 3.0,
        };
        let u = ControlSignal::from_evaluator(Evaluator::Modal(modal), 1, 1.0, 3.0, 5);
        let rule = QuadratureRule::legendre_gauss(5).unwrap();
        // |c|^2 (tf - t0) = 4 * 2
        assert_relative_eq!(energy_quadrature(&u, &rule), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form_scalar() {
        let (prob, gram, decomp) = scalar_problem(0.0, 1.0);
        let u = min_energy_input(&prob, &gram, &decomp, 11).unwrap();
        let man = maneuver(&prob, &decomp);
        let e_cf = energy_closed_form(&man, &gram).unwrap();
        let rule = QuadratureRule::legendre_gauss(50).unwrap();
        let e_q = energy_quadrature(&u, &rule);
        assert_relative_eq!(e_q, e_cf.value, max_relative = 1e-10);
    }

    #[test]
    fn reachability_on_random_network() {
        let net = generate_static(12, 2.5, 2.5, 2.0, 21).unwrap();
        let net = stabilize(&assign_weights(&net, 22).unwrap()).unwrap();
        let inputs = select_drivers(&net, 6, 23).unwrap();
        let targets = TargetSet::new(vec![1, 4, 7, 10], 12).unwrap();
        let prec = PrecisionConfig::new(60).unwrap();
        let decomp = eig_decompose(&net).unwrap();
        let gram = compute_gramian(
            &decomp,
            &InputMatrix::Versors(&inputs),
            &targets,
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        let x0 = Array1::from_shape_fn(12, |i| (i as f64 * 0.37).sin());
        let yf = array![0.5, -0.25, 1.0, 0.75];
        let prob =
            ControlProblem::new(net, inputs, targets, x0, yf.clone(), 0.0, 1.0).unwrap();
        let u = min_energy_input(&prob, &gram, &decomp, 101).unwrap();
        let traj = simulate(&prob, &u, 101).unwrap();
        for (a, b) in traj.final_output.iter().zip(yf.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-7);
        }
        // energies agree between routes
        let man = maneuver(&prob, &decomp);
        let e_cf = energy_closed_form(&man, &gram).unwrap();
        let rule = QuadratureRule::legendre_gauss(50).unwrap();
        let e_q = energy_quadrature(&u, &rule);
        assert_relative_eq!(e_q, e_cf.value, max_relative = 1e-8);
        // and the closed form sits inside the min-max bounds
        let (lo, hi) = energy_bounds(&man, &gram).unwrap();
        assert!(e_cf.value >= lo * (1.0 - 1e-12));
        assert!(e_cf.value <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn bounds_collapse_for_scalar() {
        let (prob, gram, decomp) = scalar_problem(0.0, 1.0);
        let man = maneuver(&prob, &decomp);
        let (lo, hi) = energy_bounds(&man, &gram).unwrap();
        assert_relative_eq!(lo, hi, epsilon = 1e-25);
    }

    #[test]
    fn zero_beta_bounds_are_zero() {
        let yf = (-1.0f64).exp();
        let (prob, gram, decomp) = scalar_problem(1.0, yf);
        let man = Maneuver {
            beta: array![0.0],
        };
        let _ = (prob, decomp);
        let (lo, hi) = energy_bounds(&man, &gram).unwrap();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 0.0);
    }

    #[test]
    fn worst_direction_energy_is_emax() {
        // beta aligned with v1, |beta| = 1 -> E = 1/mu_1
        let a = array![[-1.0, 0.0], [0.4, -2.0]];
        let decomp = eig_decompose_matrix(&a).unwrap();
        let inputs = InputSet::new(vec![0], 2).unwrap();
        let targets = TargetSet::all(2);
        let prec = PrecisionConfig::new(60).unwrap();
        let gram = compute_gramian(
            &decomp,
            &InputMatrix::Versors(&inputs),
            &targets,
            0.0,
            1.0,
            &prec,
        )
        .unwrap();
        let v1 = gram.eigenvectors();
        let beta = Array1::from_iter((0..2).map(|i| v1.get(i, 0).to_f64()));
        let man = Maneuver { beta };
        let e = energy_closed_form(&man, &gram).unwrap();
        let emax = gram.worst_case_energy().unwrap();
        assert_relative_eq!(e.value, emax.emax, max_relative = 1e-10);
    }
}
