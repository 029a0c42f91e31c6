//! Priority vectors by the eigenvalue (EV) and geometric mean (GM) methods.

use std::fmt;

use thiserror::Error;

use crate::pcm::PcMatrix;

pub const DEFAULT_EV_TOL: f64 = 1e-12;
pub const DEFAULT_EV_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ev,
    Gm,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Ev, Method::Gm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ev => "EV",
            Method::Gm => "GM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorityError {
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid eigen solver settings: tol = {tol}, max_iter = {max_iter}")]
    InvalidSettings { tol: f64, max_iter: usize },
}

/// Positive weights summing to one, tagged with the method that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityVector {
    weights: Vec<f64>,
    method: Method,
}

impl PriorityVector {
    /// Rescales positive raw scores to sum to one.
    fn normalized(raw: Vec<f64>, method: Method) -> Self {
        let s: f64 = raw.iter().sum();
        Self { weights: raw.into_iter().map(|v| v / s).collect(), method }
    }

    /// Wraps externally supplied weights (normalizing them). Returns `None` if
    /// any weight is not positive and finite.
    pub fn from_weights(raw: &[f64], method: Method) -> Option<Self> {
        if raw.is_empty() || raw.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return None;
        }
        Some(Self::normalized(raw.to_vec(), method))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Principal eigenpair estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda_max: f64,
    pub vector: PriorityVector,
    pub iterations: usize,
    /// Max componentwise relative change in the final iteration.
    pub residual: f64,
}

/// Power iteration from the uniform vector.
///
/// Each step computes `y = C x` and rescales it to sum to one. Iteration stops
/// once `max_i |y_i - x_i| / y_i <= tol`. `lambda_max` is the mean of
/// `(C w)_i / w_i` at the converged `w`.
pub fn ev_weights(c: &PcMatrix, tol: f64, max_iter: usize) -> Result<EigenResult, PriorityError> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(PriorityError::InvalidSettings { tol, max_iter });
    }
    let n = c.order();
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut residual = f64::INFINITY;

    for iter in 1..=max_iter {
        mat_vec(c, &x, &mut y);
        let s: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= s);
        residual = x
            .iter()
            .zip(&y)
            .map(|(old, new)| (new - old).abs() / new)
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut y);
        if residual <= tol {
            mat_vec(c, &x, &mut y);
            let lambda_max = y.iter().zip(&x).map(|(cw, w)| cw / w).sum::<f64>() / n as f64;
            return Ok(EigenResult {
                lambda_max,
                vector: PriorityVector { weights: x, method: Method::Ev },
                iterations: iter,
                residual,
            });
        }
    }
    Err(PriorityError::NoConvergence { iterations: max_iter, residual })
}

fn mat_vec(c: &PcMatrix, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = c.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Row geometric means, computed as `exp(mean(ln c_ir))`, rescaled to sum to one.
pub fn gm_weights(c: &PcMatrix) -> PriorityVector {
    let n = c.order();
    let raw = (0..n)
        .map(|i| (c.row(i).iter().map(|v| v.ln()).sum::<f64>() / n as f64).exp())
        .collect();
    PriorityVector::normalized(raw, Method::Gm)
}
