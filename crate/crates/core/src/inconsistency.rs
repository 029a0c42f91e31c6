//! Saaty's consistency index and Koczkodaj's triad inconsistency index.

use crate::pcm::PcMatrix;
use crate::priority::{ev_weights, EigenResult, PriorityError};

/// Conventional acceptability threshold for CI.
pub const CI_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InconsistencyReport {
    pub lambda_max: f64,
    pub ci: f64,
    pub ki: f64,
}

impl InconsistencyReport {
    /// Builds the report from an already computed eigen estimate.
    pub fn from_eigen(c: &PcMatrix, eigen: &EigenResult) -> Self {
        Self {
            lambda_max: eigen.lambda_max,
            ci: saaty_ci(eigen.lambda_max, c.order()),
            ki: koczkodaj_ki(c),
        }
    }

    pub fn compute(c: &PcMatrix, tol: f64, max_iter: usize) -> Result<Self, PriorityError> {
        let eigen = ev_weights(c, tol, max_iter)?;
        Ok(Self::from_eigen(c, &eigen))
    }
}

/// `(λ_max - n) / (n - 1)`, with values within 1e-12 of zero reported as 0.
pub fn saaty_ci(lambda_max: f64, n: usize) -> f64 {
    let n = n as f64;
    let ci = (lambda_max - n) / (n - 1.0);
    if ci.abs() <= 1e-12 {
        0.0
    } else {
        ci
    }
}

/// Worst triad deviation: max over distinct `(i, j, k)` of
/// `min(|1 - c_ij/(c_ik c_kj)|, |1 - (c_ik c_kj)/c_ij|)`.
pub fn koczkodaj_ki(c: &PcMatrix) -> f64 {
    let n = c.order();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let cij = c.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let path = c.get(i, k) * c.get(k, j);
                let term = (1.0 - cij / path).abs().min((1.0 - path / cij).abs());
                worst = worst.max(term);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priority::{DEFAULT_EV_MAX_ITER, DEFAULT_EV_TOL};

    fn sample() -> PcMatrix {
        PcMatrix::from_rows(&[[1.0, 2.0, 8.0], [0.5, 1.0, 2.0], [0.125, 0.5, 1.0]]).unwrap()
    }

    #[test]
    fn ci_arithmetic() {
        assert_eq!(saaty_ci(3.0, 3), 0.0);
        assert!((saaty_ci(3.2, 3) - 0.1).abs() < 1e-15);
        assert_eq!(saaty_ci(4.0 - 1e-13, 4), 0.0);
    }

    #[test]
    fn ki_of_sample_matrix() {
        // worst triad: c13 / (c12 c23) = 2 -> min(1, 0.5)
        assert_eq!(koczkodaj_ki(&sample()), 0.5);
    }

    #[test]
    fn ki_symmetries() {
        let c = sample();
        assert_eq!(koczkodaj_ki(&c.transpose()), koczkodaj_ki(&c));
        assert_eq!(koczkodaj_ki(&c.permuted(&[1, 2, 0])), koczkodaj_ki(&c));
    }

    #[test]
    fn consistent_matrix_has_zero_indices() {
        let c = PcMatrix::from_weights(&[3.0, 1.5, 7.0, 2.0]).unwrap();
        let r = InconsistencyReport::compute(&c, DEFAULT_EV_TOL, DEFAULT_EV_MAX_ITER).unwrap();
        assert!(r.ki <= 1e-12);
        assert!(r.ci.abs() <= 1e-10);
    }
}
