//! Adaptive Dormand-Prince 5(4) integrator with dense output.

use crate::error::{Error, Result};

// Dormand-Prince tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
// dense-output coefficients (Hairer's contd5)
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct Step {
    t: f64,
    h: f64,
    rcont: [Vec<f64>; 5],
}

/// Integration result supporting evaluation at any time in `[t0, tf]`.
pub struct DenseOutput {
    t0: f64,
    tf: f64,
    dim: usize,
    steps: Vec<Step>,
    final_state: Vec<f64>,
    pub n_steps: usize,
    pub n_rejected: usize,
}

impl DenseOutput {
    pub fn final_state(&self) -> &[f64] {
        &self.final_state
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.tf)
    }

    /// State at time `t`, clamped to the integration span.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim);
        let t = t.clamp(self.t0.min(self.tf), self.t0.max(self.tf));
        if t == self.tf {
            out.copy_from_slice(&self.final_state);
            return;
        }
        // binary search for the step containing t
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let s = &self.steps[mid];
            if t < s.t {
                hi = mid.saturating_sub(1).max(lo);
                if hi == mid {
                    break;
                }
            } else if t > s.t + s.h {
                lo = mid + 1;
            } else {
                lo = mid;
                break;
            }
        }
        let s = &self.steps[lo.min(self.steps.len() - 1)];
        let theta = ((t - s.t) / s.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        for i in 0..self.dim {
            out[i] = s.rcont[0][i]
                + theta
                    * (s.rcont[1][i]
                        + theta1
                            * (s.rcont[2][i]
                                + theta * (s.rcont[3][i] + theta1 * s.rcont[4][i])));
        }
    }

    /// States sampled on a uniform grid of `points` times including both ends.
    pub fn sample_uniform(&self, points: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let m = points.max(2);
        let mut times = Vec::with_capacity(m);
        let mut states = Vec::with_capacity(m);
        let mut buf = vec![0.0; self.dim];
        for k in 0..m {
            let t = self.t0 + (self.tf - self.t0) * (k as f64) / ((m - 1) as f64);
            self.eval(t, &mut buf);
            times.push(t);
            states.push(buf.clone());
        }
        (times, states)
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `tf` with absolute and relative
/// tolerance as given, recording dense output for every accepted step.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    tf: f64,
    y0: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<DenseOutput>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(tf > t0) {
        return Err(Error::Integrator(format!(
            "horizon must be positive, got [{t0}, {tf}]"
        )));
    }
    let dim = y0.len();
    let span = tf - t0;
    let h_min = span * 1e-14;
    let max_steps = 10_000_000usize;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: [Vec<f64>; 7] = Default::default();
    for stage in &mut k {
        *stage = vec![0.0; dim];
    }
    f(t, &y, &mut k[0]);

    let mut h = initial_step(&mut f, t, &y, &k[0], rtol, atol, span);
    let mut steps = Vec::new();
    let mut n_steps = 0usize;
    let mut n_rejected = 0usize;
    let mut ytmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];

    while t < tf {
        if n_steps + n_rejected > max_steps {
            return Err(Error::Integrator("step budget exhausted".into()));
        }
        if h < h_min {
            return Err(Error::Integrator(format!(
                "step size underflow at t = {t:.6e}"
            )));
        }
        let last = t + h >= tf;
        if last {
            h = tf - t;
        }

        for stage in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            f(t + C[stage] * h, &ytmp, &mut tail[0]);
        }

        // 5th-order solution and embedded error estimate
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for j in 0..7 {
                acc5 += B5[j] * k[j][i];
                acc4 += B4[j] * k[j][i];
            }
            y5[i] = y[i] + h * acc5;
            let sc = atol + rtol * y[i].abs().max(y5[i].abs());
            let e = h * (acc5 - acc4) / sc;
            err += e * e;
        }
        err = (err / dim as f64).sqrt();

        if err <= 1.0 {
            // accept: store dense output coefficients
            let mut rcont = [
                y.clone(),
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
            ];
            for i in 0..dim {
                let ydiff = y5[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k[6][i] - bspl;
                let mut acc = 0.0;
                for j in 0..7 {
                    if D[j] != 0.0 {
                        acc += D[j] * k[j][i];
                    }
                }
                rcont[4][i] = h * acc;
            }
            steps.push(Step { t, h, rcont });
            t += h;
            y.copy_from_slice(&y5);
            k[0] = k[6].clone(); // FSAL
            n_steps += 1;
        } else {
            n_rejected += 1;
        }

        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h = (h * fac).min(span);
    }

    Ok(DenseOutput {
        t0,
        tf,
        dim,
        steps,
        final_state: y,
        n_steps,
        n_rejected,
    })
}

fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    rtol: f64,
    atol: f64,
    span: f64,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let d0: f64 = y0
        .iter()
        .map(|&v| (v / (atol + rtol * v.abs())).powi(2))
        .sum::<f64>()
        .sqrt()
        / (dim as f64).sqrt();
    let d1: f64 = f0
        .iter()
        .zip(y0)
        .map(|(&fv, &yv)| (fv / (atol + rtol * yv.abs())).powi(2))
        .sum::<f64>()
        .sqrt()
        / (dim as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    // one Euler step to probe the second derivative
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(&y, &fv)| y + h0 * fv).collect();
    let mut f1 = vec![0.0; dim];
    f(t0 + h0, &y1, &mut f1);
    let d2: f64 = f1
        .iter()
        .zip(f0)
        .zip(y0)
        .map(|((&a, &b), &yv)| (((a - b) / h0) / (atol + rtol * yv.abs())).powi(2))
        .sum::<f64>()
        .sqrt()
        / (dim as f64).sqrt();
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}
