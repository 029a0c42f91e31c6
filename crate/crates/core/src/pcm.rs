//! Multiplicative pairwise comparison matrices and the random generation
//! procedure used by the simulator.
//!
//! A [`PcMatrix`] is square, strictly positive, has a unit diagonal and is
//! reciprocal (`c_ij * c_ji == 1` up to [`RECIPROCITY_TOL`]). Values are
//! immutable once validated.

use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Maximum tolerated `|c_ij * c_ji - 1|`.
pub const RECIPROCITY_TOL: f64 = 1e-12;

/// Threshold under which [`PcMatrix::consistency_defect`] is treated as zero.
pub const CONSISTENCY_TOL: f64 = 1e-10;

/// Smallest supported order; the triad index needs at least three objects.
pub const MIN_ORDER: usize = 3;

/// Bounds of the ground-truth utility scores.
pub const WEIGHT_RANGE: (f64, f64) = (1.0, 9.0);

/// Exclusive upper bound of the disturbance level.
pub const MAX_GAMMA: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcmError {
    #[error("matrix is not square: row {} has {len} entries, expected {expected}", .row + 1)]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({},{}) = {value} is not a positive finite number", .i + 1, .j + 1)]
    NonPositiveEntry { i: usize, j: usize, value: f64 },
    #[error("reciprocity violated at ({},{}): |c_ij * c_ji - 1| = {defect:e}", .i + 1, .j + 1)]
    ReciprocityViolation { i: usize, j: usize, defect: f64 },
    #[error("order {n} is too small, at least {MIN_ORDER} objects are required")]
    OrderTooSmall { n: usize },
    #[error("disturbance level {gamma} outside the open interval (1, {MAX_GAMMA})")]
    InvalidGamma { gamma: f64 },
    #[error("ground-truth weight {value} at index {index} outside [1, 9]")]
    WeightOutOfRange { index: usize, value: f64 },
}

impl PcmError {
    /// Variant name, used in user-facing diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            PcmError::NonSquare { .. } => "NonSquare",
            PcmError::NonPositiveEntry { .. } => "NonPositiveEntry",
            PcmError::ReciprocityViolation { .. } => "ReciprocityViolation",
            PcmError::OrderTooSmall { .. } => "OrderTooSmall",
            PcmError::InvalidGamma { .. } => "InvalidGamma",
            PcmError::WeightOutOfRange { .. } => "WeightOutOfRange",
        }
    }
}

/// Square, positive, reciprocal pairwise comparison matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PcMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PcMatrix {
    /// Validates `rows` and builds a matrix. The diagonal is forced to exactly 1.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, PcmError> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            let len = r.as_ref().len();
            if len != n {
                return Err(PcmError::NonSquare { row, len, expected: n });
            }
        }
        if n < MIN_ORDER {
            return Err(PcmError::OrderTooSmall { n });
        }
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            entries.extend_from_slice(r.as_ref());
        }
        Self::from_flat(n, entries)
    }

    /// Same as [`PcMatrix::from_rows`] for a row-major buffer of length `n * n`.
    pub fn from_flat(n: usize, mut entries: Vec<f64>) -> Result<Self, PcmError> {
        if n < MIN_ORDER {
            return Err(PcmError::OrderTooSmall { n });
        }
        if entries.len() != n * n {
            let row = entries.len() / n.max(1);
            return Err(PcmError::NonSquare { row, len: entries.len() % n, expected: n });
        }
        for i in 0..n {
            for j in 0..n {
                let value = entries[i * n + j];
                if !(value.is_finite() && value > 0.0) {
                    return Err(PcmError::NonPositiveEntry { i, j, value });
                }
            }
        }
        for i in 0..n {
            entries[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let defect = (entries[i * n + j] * entries[j * n + i] - 1.0).abs();
                if defect > RECIPROCITY_TOL {
                    return Err(PcmError::ReciprocityViolation { i, j, defect });
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Consistent matrix `c_ij = w_i / w_j` for arbitrary positive weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self, PcmError> {
        let n = weights.len();
        let mut entries = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries[i * n + j] = weights[i] / weights[j];
                }
            }
        }
        Self::from_flat(n, entries)
    }

    /// Matrix of all ones.
    pub fn uniform(n: usize) -> Result<Self, PcmError> {
        Self::from_flat(n, vec![1.0; n * n])
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Self { n, entries }
    }

    /// Simultaneous row/column relabeling: entry `(i, j)` of the result is
    /// `c[perm[i]][perm[j]]`.
    ///
    /// # Panics
    ///
    /// Panics if `perm` is not a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut seen = vec![false; n];
        for &p in perm {
            assert!(p < n && !seen[p], "not a permutation");
            seen[p] = true;
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Self { n, entries }
    }

    /// Largest `|c_ij * c_jk * c_ki - 1|` over all index triples.
    pub fn consistency_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let cij = self.get(i, j);
                for k in 0..n {
                    let d = (cij * self.get(j, k) * self.get(k, i) - 1.0).abs();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    pub fn is_consistent(&self) -> bool {
        self.consistency_defect() <= CONSISTENCY_TOL
    }

    /// Largest `|c_ij * c_ji - 1|`. Always within [`RECIPROCITY_TOL`] for a
    /// constructed matrix.
    pub fn reciprocity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) * self.get(j, i) - 1.0).abs());
            }
        }
        worst
    }
}

impl fmt::Display for PcMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Ground-truth utility scores, each in `[1, 9]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthWeights(Vec<f64>);

impl GroundTruthWeights {
    pub fn new(values: Vec<f64>) -> Result<Self, PcmError> {
        if values.len() < MIN_ORDER {
            return Err(PcmError::OrderTooSmall { n: values.len() });
        }
        let (lo, hi) = WEIGHT_RANGE;
        if let Some((index, &value)) =
            values.iter().enumerate().find(|(_, v)| !(lo..=hi).contains(*v))
        {
            return Err(PcmError::WeightOutOfRange { index, value });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Weights rescaled to sum to one.
    pub fn normalized(&self) -> Vec<f64> {
        let s: f64 = self.0.iter().sum();
        self.0.iter().map(|v| v / s).collect()
    }
}

/// How the multiplicative disturbance is sampled from `[1/γ, γ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DeltaScheme {
    /// Uniform on `[1/γ, γ]`.
    #[default]
    Uniform,
    /// `exp(u)` with `u` uniform on `[-ln γ, ln γ]`.
    LogUniform,
}

impl DeltaScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaScheme::Uniform => "uniform",
            DeltaScheme::LogUniform => "log-uniform",
        }
    }
}

impl fmt::Display for DeltaScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DeltaScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(DeltaScheme::Uniform),
            "log-uniform" | "log_uniform" | "loguniform" => Ok(DeltaScheme::LogUniform),
            other => Err(format!("unknown delta scheme '{other}' (expected uniform|log-uniform)")),
        }
    }
}

/// Disturbance level `γ ∈ (1, 4)` together with its sampling scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSpec {
    gamma: f64,
    scheme: DeltaScheme,
}

impl DisturbanceSpec {
    pub fn new(gamma: f64, scheme: DeltaScheme) -> Result<Self, PcmError> {
        if !(gamma > 1.0 && gamma < MAX_GAMMA) {
            return Err(PcmError::InvalidGamma { gamma });
        }
        Ok(Self { gamma, scheme })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scheme(&self) -> DeltaScheme {
        self.scheme
    }

    /// Draws one disturbance coefficient from `[1/γ, γ]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.scheme {
            DeltaScheme::Uniform => rng.gen_range(1.0 / self.gamma..=self.gamma),
            DeltaScheme::LogUniform => {
                let l = self.gamma.ln();
                rng.gen_range(-l..=l).exp()
            }
        }
    }
}

/// Draws weights uniformly on `[1, 9]` and returns them with the consistent
/// matrix `c_ij = w_i / w_j`.
///
/// # Panics
///
/// Panics if `n < 3`.
pub fn generate_consistent<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (GroundTruthWeights, PcMatrix) {
    assert!(n >= MIN_ORDER, "order must be at least {MIN_ORDER}");
    let (lo, hi) = WEIGHT_RANGE;
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    let c = PcMatrix::from_weights(&values).expect("ratios of weights in [1,9] form a valid matrix");
    (GroundTruthWeights(values), c)
}

/// Multiplies each upper-triangle entry by its own disturbance coefficient and
/// mirrors the exact reciprocal into the lower triangle. Coefficients are drawn
/// in row-major order of the pairs `i < j`.
pub fn perturb<R: Rng + ?Sized>(c: &PcMatrix, spec: &DisturbanceSpec, rng: &mut R) -> PcMatrix {
    let n = c.order();
    let mut entries = c.as_slice().to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = c.get(i, j) * spec.sample(rng);
            entries[i * n + j] = v;
            entries[j * n + i] = 1.0 / v;
        }
    }
    PcMatrix { n, entries }
}
