//! Monte Carlo grid over matrix order, disturbance level and replicate.
//!
//! Every cell `(n, γ-index, replicate)` owns a child seed derived from the
//! master seed, so cells can be evaluated in any order and on any number of
//! threads with identical results. Records are always returned in canonical
//! `(n, γ-index, replicate)` order.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cop::{check_theorems, pop_total, poip_total, CopReport, SoundnessReport};
use crate::inconsistency::{InconsistencyReport, CI_THRESHOLD};
use crate::pcm::{generate_consistent, perturb, DeltaScheme, DisturbanceSpec, PcMatrix, MIN_ORDER};
use crate::priority::{ev_weights, gm_weights, Method, PriorityError, DEFAULT_EV_MAX_ITER, DEFAULT_EV_TOL};

pub const MAX_ORDER: usize = 9;
/// First order for which the POIP guarantee count is skipped unless forced.
pub const TH2_SKIP_FROM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("order range {n_min}..{n_max} must satisfy 3 <= n_min <= n_max <= 9")]
    OrderRange { n_min: usize, n_max: usize },
    #[error("gamma_levels must be at least 1")]
    NoGammaLevels,
    #[error("matrices_per_cell must be at least 1")]
    NoReplicates,
    #[error("KI bin width {0} outside (0, 1)")]
    BinWidth(f64),
    #[error("invalid eigen solver settings: tol = {tol}, max_iter = {max_iter}")]
    EigenSettings { tol: f64, max_iter: usize },
    #[error("no records to aggregate")]
    EmptyInput,
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Number of disturbance levels spread evenly over the open interval (1, 4).
    pub gamma_levels: usize,
    pub matrices_per_cell: usize,
    pub delta_scheme: DeltaScheme,
    pub master_seed: u64,
    pub ev_tol: f64,
    pub ev_max_iter: usize,
    pub ki_bin_width: f64,
    /// Compute the POIP guarantee count for n >= 8 as well.
    pub force_th2: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Check both KI guarantees against the EV and GM vectors of every matrix.
    pub check_theorems: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_min: 3,
            n_max: MAX_ORDER,
            gamma_levels: 300,
            matrices_per_cell: 100,
            delta_scheme: DeltaScheme::Uniform,
            master_seed: 42,
            ev_tol: DEFAULT_EV_TOL,
            ev_max_iter: DEFAULT_EV_MAX_ITER,
            ki_bin_width: 0.05,
            force_th2: false,
            threads: None,
            check_theorems: cfg!(debug_assertions),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(MIN_ORDER <= self.n_min && self.n_min <= self.n_max && self.n_max <= MAX_ORDER) {
            return Err(SimError::OrderRange { n_min: self.n_min, n_max: self.n_max });
        }
        if self.gamma_levels == 0 {
            return Err(SimError::NoGammaLevels);
        }
        if self.matrices_per_cell == 0 {
            return Err(SimError::NoReplicates);
        }
        if !(self.ki_bin_width > 0.0 && self.ki_bin_width < 1.0) {
            return Err(SimError::BinWidth(self.ki_bin_width));
        }
        if !(self.ev_tol > 0.0) || self.ev_max_iter == 0 {
            return Err(SimError::EigenSettings { tol: self.ev_tol, max_iter: self.ev_max_iter });
        }
        Ok(())
    }

    /// `γ_k = 1 + 3k / (L + 1)` for `k = 1..=L`; `index` is zero-based.
    pub fn gamma(&self, index: usize) -> f64 {
        1.0 + 3.0 * (index + 1) as f64 / (self.gamma_levels + 1) as f64
    }

    pub fn matrix_count(&self) -> usize {
        (self.n_max - self.n_min + 1) * self.gamma_levels * self.matrices_per_cell
    }

    pub fn computes_th2(&self, n: usize) -> bool {
        self.force_th2 || n < TH2_SKIP_FROM
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed of one grid cell: the master seed folded with each coordinate
/// through [`mix64`].
pub fn child_seed(master: u64, n: usize, gamma_index: usize, replicate: usize) -> u64 {
    let mut h = mix64(master);
    h = mix64(h ^ n as u64);
    h = mix64(h ^ gamma_index as u64);
    mix64(h ^ replicate as u64)
}

/// Rebuilds the perturbed matrix of a record from its seed alone.
pub fn replay_matrix(n: usize, spec: &DisturbanceSpec, seed: u64) -> PcMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, c) = generate_consistent(n, &mut rng);
    perturb(&c, spec, &mut rng)
}

/// Outcome of one simulated matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRecord {
    pub n: usize,
    pub gamma: f64,
    pub replicate: usize,
    pub seed: u64,
    pub lambda_max: f64,
    pub ci: f64,
    pub ki: f64,
    pub pop_app: u64,
    pub pop_sat_ev: u64,
    pub pop_sat_gm: u64,
    pub poip_app: u64,
    pub poip_sat_ev: u64,
    pub poip_sat_gm: u64,
    pub th1: u64,
    pub th2: Option<u64>,
}

impl MatrixRecord {
    pub fn pop_sat(&self, method: Method) -> u64 {
        match method {
            Method::Ev => self.pop_sat_ev,
            Method::Gm => self.pop_sat_gm,
        }
    }

    pub fn poip_sat(&self, method: Method) -> u64 {
        match method {
            Method::Ev => self.poip_sat_ev,
            Method::Gm => self.poip_sat_gm,
        }
    }

    pub fn bucket(&self) -> CiBucket {
        CiBucket::of(self.ci)
    }
}

/// A matrix whose eigen solve failed; it is left out of the records.
#[derive(Debug, Clone, PartialEq)]
pub struct FailedMatrix {
    pub n: usize,
    pub gamma: f64,
    pub replicate: usize,
    pub seed: u64,
    pub error: PriorityError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<MatrixRecord>,
    pub failures: Vec<FailedMatrix>,
    /// Present when the configuration asked for theorem checks.
    pub soundness: Option<SoundnessReport>,
}

/// Generates, perturbs and evaluates a single matrix.
pub fn simulate_matrix(
    n: usize,
    spec: &DisturbanceSpec,
    seed: u64,
    ev_tol: f64,
    ev_max_iter: usize,
    with_th2: bool,
    check: bool,
) -> Result<(MatrixRecord, Option<SoundnessReport>), PriorityError> {
    let c = replay_matrix(n, spec, seed);
    let eigen = ev_weights(&c, ev_tol, ev_max_iter)?;
    let gm = gm_weights(&c);
    let inc = InconsistencyReport::from_eigen(&c, &eigen);
    let ev_report = CopReport::evaluate(&c, &eigen.vector, inc.ki, with_th2);
    let gm_report = CopReport::evaluate(&c, &gm, inc.ki, false);

    let soundness = check.then(|| {
        let mut r = check_theorems(&c, &eigen.vector, inc.ki);
        r.merge(&check_theorems(&c, &gm, inc.ki));
        r
    });

    let record = MatrixRecord {
        n,
        gamma: spec.gamma(),
        replicate: 0,
        seed,
        lambda_max: inc.lambda_max,
        ci: inc.ci,
        ki: inc.ki,
        pop_app: ev_report.pop_applicable,
        pop_sat_ev: ev_report.pop_satisfied,
        pop_sat_gm: gm_report.pop_satisfied,
        poip_app: ev_report.poip_applicable,
        poip_sat_ev: ev_report.poip_satisfied,
        poip_sat_gm: gm_report.poip_satisfied,
        th1: ev_report.th1_guaranteed,
        th2: ev_report.th2_guaranteed,
    };
    Ok((record, soundness))
}

/// Runs the full grid. Output does not depend on the degree of parallelism.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, SimError> {
    config.validate()?;
    match config.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| SimError::ThreadPool(e.to_string()))?;
            pool.install(|| run_grid(config))
        }
        None => run_grid(config),
    }
}

type CellResult = Result<(MatrixRecord, Option<SoundnessReport>), FailedMatrix>;

fn run_grid(config: &ExperimentConfig) -> Result<ExperimentOutput, SimError> {
    let levels = config.gamma_levels;
    let per_cell = config.matrices_per_cell;
    let specs: Vec<DisturbanceSpec> = (0..levels)
        .map(|k| DisturbanceSpec::new(config.gamma(k), config.delta_scheme))
        .collect::<Result<_, _>>()
        .expect("grid levels lie strictly inside (1, 4)");

    let per_n = levels * per_cell;
    let results: Vec<CellResult> = (0..config.matrix_count())
        .into_par_iter()
        .map(|idx| {
            let n = config.n_min + idx / per_n;
            let gamma_index = (idx % per_n) / per_cell;
            let replicate = idx % per_cell;
            let seed = child_seed(config.master_seed, n, gamma_index, replicate);
            let spec = &specs[gamma_index];
            simulate_matrix(
                n,
                spec,
                seed,
                config.ev_tol,
                config.ev_max_iter,
                config.computes_th2(n),
                config.check_theorems,
            )
            .map(|(mut rec, s)| {
                rec.replicate = replicate;
                (rec, s)
            })
            .map_err(|error| FailedMatrix { n, gamma: spec.gamma(), replicate, seed, error })
        })
        .collect();

    let mut out = ExperimentOutput {
        records: Vec::with_capacity(results.len()),
        failures: Vec::new(),
        soundness: config.check_theorems.then(SoundnessReport::default),
    };
    for r in results {
        match r {
            Ok((rec, s)) => {
                if let (Some(total), Some(s)) = (out.soundness.as_mut(), s) {
                    total.merge(&s);
                }
                out.records.push(rec);
            }
            Err(f) => out.failures.push(f),
        }
    }
    Ok(out)
}

/// Sorts records into canonical `(n, γ, replicate)` order.
pub fn sort_canonical(records: &mut [MatrixRecord]) {
    records.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.replicate.cmp(&b.replicate))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CiBucket {
    Below010,
    AtOrAbove010,
}

impl CiBucket {
    pub const ALL: [CiBucket; 2] = [CiBucket::Below010, CiBucket::AtOrAbove010];

    pub fn of(ci: f64) -> Self {
        if ci < CI_THRESHOLD {
            CiBucket::Below010
        } else {
            CiBucket::AtOrAbove010
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CiBucket::Below010 => "CI<0.10",
            CiBucket::AtOrAbove010 => "CI>=0.10",
        }
    }
}

impl fmt::Display for CiBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Running mean that skips undefined (0/0) terms.
#[derive(Debug, Clone, Copy, Default)]
struct MeanAcc {
    sum: f64,
    count: u64,
}

impl MeanAcc {
    fn push_ratio(&mut self, num: u64, den: u64) {
        if den > 0 {
            self.sum += num as f64 / den as f64 * 100.0;
            self.count += 1;
        }
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PooledAcc {
    num: u64,
    den: u64,
}

impl PooledAcc {
    fn push(&mut self, num: u64, den: u64) {
        self.num += num;
        self.den += den;
    }

    fn percent(&self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64 * 100.0)
    }
}

/// Percentages for one of the six table columns.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TableColumns {
    pub pop_ev: Option<f64>,
    pub pop_gm: Option<f64>,
    pub poip_ev: Option<f64>,
    pub poip_gm: Option<f64>,
    pub th1: Option<f64>,
    pub th2: Option<f64>,
}

/// One `(n, CI bucket)` row under three percentage conventions:
///
/// * `mean`: per-matrix `satisfied / applicable`, averaged over matrices with
///   at least one applicable condition;
/// * `pooled`: summed satisfied over summed applicable;
/// * `per_class`: per-matrix share of condition classes not violated, where a
///   class is a condition together with its reciprocal mirror (`(j, i)` for a
///   pair, `(j, i, l, k)` for a quadruple). There are `total / 2` classes, so
///   the POP and Th1 columns coincide with `mean` whenever no
///   off-diagonal entry equals 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub n: usize,
    pub bucket: CiBucket,
    pub matrix_count: usize,
    pub mean: TableColumns,
    pub pooled: TableColumns,
    pub per_class: TableColumns,
}

/// Per-matrix percentages under the mirror-class convention, in table column
/// order.
fn per_class_terms(r: &MatrixRecord) -> [Option<f64>; 6] {
    let pop_classes = pop_total(r.n) as f64 / 2.0;
    let poip_classes = poip_total(r.n) as f64 / 2.0;
    let kept = |app: u64, sat: u64, classes: f64| 100.0 * (1.0 - (app - sat) as f64 / classes);
    [
        Some(kept(r.pop_app, r.pop_sat_ev, pop_classes)),
        Some(kept(r.pop_app, r.pop_sat_gm, pop_classes)),
        Some(kept(r.poip_app, r.poip_sat_ev, poip_classes)),
        Some(kept(r.poip_app, r.poip_sat_gm, poip_classes)),
        Some(100.0 * r.th1 as f64 / pop_classes),
        r.th2.map(|t| 100.0 * t as f64 / poip_classes),
    ]
}

pub fn aggregate_tables(records: &[MatrixRecord]) -> Result<Vec<AggregateRow>, SimError> {
    if records.is_empty() {
        return Err(SimError::EmptyInput);
    }
    #[derive(Default)]
    struct Acc {
        count: usize,
        mean: [MeanAcc; 6],
        pooled: [PooledAcc; 6],
        per_class: [(f64, u64); 6],
    }

    let mut cells: BTreeMap<(usize, CiBucket), Acc> = BTreeMap::new();
    for r in records {
        let acc = cells.entry((r.n, r.bucket())).or_default();
        acc.count += 1;
        let mut terms = vec![
            (r.pop_sat_ev, r.pop_app),
            (r.pop_sat_gm, r.pop_app),
            (r.poip_sat_ev, r.poip_app),
            (r.poip_sat_gm, r.poip_app),
            (r.th1, r.pop_app),
        ];
        if let Some(th2) = r.th2 {
            terms.push((th2, r.poip_app));
        }
        for (k, (num, den)) in terms.into_iter().enumerate() {
            acc.mean[k].push_ratio(num, den);
            acc.pooled[k].push(num, den);
        }
        for (slot, term) in acc.per_class.iter_mut().zip(per_class_terms(r)) {
            if let Some(v) = term {
                slot.0 += v;
                slot.1 += 1;
            }
        }
    }

    let mut orders: Vec<usize> = records.iter().map(|r| r.n).collect();
    orders.sort_unstable();
    orders.dedup();

    let columns = |vals: [Option<f64>; 6]| TableColumns {
        pop_ev: vals[0],
        pop_gm: vals[1],
        poip_ev: vals[2],
        poip_gm: vals[3],
        th1: vals[4],
        th2: vals[5],
    };

    let mut rows = Vec::with_capacity(orders.len() * 2);
    for n in orders {
        for bucket in CiBucket::ALL {
            let row = match cells.get(&(n, bucket)) {
                Some(acc) => AggregateRow {
                    n,
                    bucket,
                    matrix_count: acc.count,
                    mean: columns(std::array::from_fn(|k| acc.mean[k].mean())),
                    pooled: columns(std::array::from_fn(|k| acc.pooled[k].percent())),
                    per_class: columns(std::array::from_fn(|k| {
                        let (sum, count) = acc.per_class[k];
                        (count > 0).then(|| sum / count as f64)
                    })),
                },
                None => AggregateRow {
                    n,
                    bucket,
                    matrix_count: 0,
                    mean: TableColumns::default(),
                    pooled: TableColumns::default(),
                    per_class: TableColumns::default(),
                },
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Mean figure-data values of one KI bin for one `(n, method)` series.
#[derive(Debug, Clone, PartialEq)]
pub struct KiBinPoint {
    pub n: usize,
    pub method: Method,
    pub bin: usize,
    pub bin_center: f64,
    pub matrices: usize,
    pub mean_pop_violations: f64,
    pub mean_poip_violations: f64,
    pub mean_th1: f64,
    /// `None` when no record in the bin carries a POIP guarantee count.
    pub mean_th2: Option<f64>,
}

/// Groups records into `[k w, (k+1) w)` KI bins per `(n, method)`. Empty bins
/// are omitted. Points come sorted by `(n, method, bin)`.
pub fn bin_by_ki(records: &[MatrixRecord], bin_width: f64) -> Result<Vec<KiBinPoint>, SimError> {
    if !(bin_width > 0.0 && bin_width < 1.0) {
        return Err(SimError::BinWidth(bin_width));
    }
    #[derive(Default)]
    struct Acc {
        count: usize,
        pop: u64,
        poip: u64,
        th1: u64,
        th2: u64,
        th2_count: usize,
    }

    let mut bins: BTreeMap<(usize, Method, usize), Acc> = BTreeMap::new();
    for r in records {
        let bin = (r.ki / bin_width).floor() as usize;
        for method in Method::ALL {
            let acc = bins.entry((r.n, method, bin)).or_default();
            acc.count += 1;
            acc.pop += r.pop_app - r.pop_sat(method);
            acc.poip += r.poip_app - r.poip_sat(method);
            acc.th1 += r.th1;
            if let Some(t) = r.th2 {
                acc.th2 += t;
                acc.th2_count += 1;
            }
        }
    }

    Ok(bins
        .into_iter()
        .map(|((n, method, bin), acc)| {
            let m = acc.count as f64;
            KiBinPoint {
                n,
                method,
                bin,
                bin_center: (bin as f64 + 0.5) * bin_width,
                matrices: acc.count,
                mean_pop_violations: acc.pop as f64 / m,
                mean_poip_violations: acc.poip as f64 / m,
                mean_th1: acc.th1 as f64 / m,
                mean_th2: (acc.th2_count > 0).then(|| acc.th2 as f64 / acc.th2_count as f64),
            }
        })
        .collect())
}

/// Spearman rank correlation with average ranks for ties. `None` for fewer
/// than two points or a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && v[idx[end + 1]] == v[idx[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &i in &idx[start..=end] {
            out[i] = rank;
        }
        start = end + 1;
    }
    out
}
