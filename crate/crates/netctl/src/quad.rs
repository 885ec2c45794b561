//! Legendre-Gauss quadrature.

use crate::error::{Error, Result};

/// Legendre-Gauss rule with `len` nodes on the reference interval [-1, 1].
/// Exact for polynomials of degree `2L - 1`; weights sum to 2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_NODES: usize = 50;

impl QuadratureRule {
    /// Compute nodes and weights by Newton iteration on the Legendre
    /// polynomial.
    pub fn legendre_gauss(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Config("quadrature rule needs at least one node".into()));
        }
        if len == 1 {
            return Ok(QuadratureRule {
                points: vec![0.0],
                weights: vec![2.0],
            });
        }
        let n = len;
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev-based initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_eval(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_eval(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Ok(QuadratureRule { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nodes mapped to `[a, b]`.
    pub fn mapped_points(&self, a: f64, b: f64) -> Vec<f64> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.points.iter().map(|&x| mid + half * x).collect()
    }

    pub fn reference_points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate a scalar function over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Legendre polynomial P_n and derivative at x, by recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
