//! Command-line front end: `run` drives the simulation grid and writes the
//! CSV/summary bundle, `eval` audits a single matrix read from a text file.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::cop::{
    ki_threshold, poip_evaluate, poip_violations, pop_evaluate, pop_violations, theorem1_pairs,
    theorem2_count, theorem2_count_unrestricted,
};
use crate::inconsistency::InconsistencyReport;
use crate::pcm::{DeltaScheme, PcMatrix, PcmError};
use crate::priority::{ev_weights, gm_weights, Method, PriorityError, DEFAULT_EV_MAX_ITER, DEFAULT_EV_TOL};
use crate::reference;
use crate::simulator::{
    aggregate_tables, bin_by_ki, run_experiment, spearman, AggregateRow, CiBucket, ExperimentConfig,
    ExperimentOutput, KiBinPoint, MatrixRecord, SimError, TableColumns,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const RECORDS_HEADER: [&str; 15] = [
    "n",
    "gamma",
    "replicate",
    "seed",
    "lambda_max",
    "ci",
    "ki",
    "pop_app",
    "pop_sat_ev",
    "pop_sat_gm",
    "poip_app",
    "poip_sat_ev",
    "poip_sat_gm",
    "th1",
    "th2",
];

const COLUMN_NAMES: [&str; 6] = ["pop_ev", "pop_gm", "poip_ev", "poip_gm", "th1", "th2"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid matrix: {kind}: {source}", kind = .source.kind())]
    Matrix {
        #[from]
        source: PcmError,
    },
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("eigen solve failed: {0}")]
    Eigen(#[from] PriorityError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pcm-cop", version, about = "Order preservation in pairwise comparison matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Monte Carlo grid and write records, tables, figure data and a summary.
    Run(RunArgs),
    /// Evaluate a single matrix read from a text file.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderRange {
    pub min: usize,
    pub max: usize,
}

impl std::str::FromStr for OrderRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad order '{t}': {e}"));
        match s.split_once("..") {
            Some((a, b)) => Ok(OrderRange { min: parse(a)?, max: parse(b.trim_start_matches('='))? }),
            None => {
                let n = parse(s)?;
                Ok(OrderRange { min: n, max: n })
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Matrix orders, `A..B` (inclusive) or a single order.
    #[arg(long = "n", default_value = "3..9")]
    pub orders: OrderRange,
    #[arg(long, default_value_t = 300)]
    pub gamma_levels: usize,
    /// Matrices per (n, γ) cell.
    #[arg(long, default_value_t = 100)]
    pub per_cell: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// uniform | log-uniform
    #[arg(long, default_value = "uniform")]
    pub delta_scheme: DeltaScheme,
    #[arg(long, default_value_t = 0.05)]
    pub ki_bin_width: f64,
    /// Compute the POIP guarantee count for n >= 8 too.
    #[arg(long)]
    pub force_th2: bool,
    /// Check both KI guarantees on every matrix and report failures.
    #[arg(long)]
    pub check_theorems: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EV_TOL)]
    pub ev_tol: f64,
    #[arg(long, default_value_t = DEFAULT_EV_MAX_ITER)]
    pub ev_max_iter: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl RunArgs {
    pub fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            n_min: self.orders.min,
            n_max: self.orders.max,
            gamma_levels: self.gamma_levels,
            matrices_per_cell: self.per_cell,
            delta_scheme: self.delta_scheme,
            master_seed: self.seed,
            ev_tol: self.ev_tol,
            ev_max_iter: self.ev_max_iter,
            ki_bin_width: self.ki_bin_width,
            force_th2: self.force_th2,
            threads: self.threads,
            check_theorems: self.check_theorems,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Text file with one matrix row per line; entries separated by whitespace or commas.
    pub matrix_file: PathBuf,
    /// List every violated POIP quadruple and the unrestricted guarantee count.
    #[arg(long, short)]
    pub verbose: bool,
    #[arg(long, default_value_t = DEFAULT_EV_TOL)]
    pub ev_tol: f64,
    #[arg(long, default_value_t = DEFAULT_EV_MAX_ITER)]
    pub ev_max_iter: usize,
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, out),
        Command::Eval(args) => cmd_eval(args, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Paths of the files written by `run`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputBundle {
    pub records_csv: PathBuf,
    pub tables_csv: PathBuf,
    pub figures_csv: PathBuf,
    pub summary_text: PathBuf,
}

impl OutputBundle {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            records_csv: dir.join("records.csv"),
            tables_csv: dir.join("tables.csv"),
            figures_csv: dir.join("figures.csv"),
            summary_text: dir.join("summary.txt"),
        }
    }
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = args.to_config();
    config.validate()?;
    let result = run_experiment(&config)?;
    let bundle = write_bundle(&args.out, &config, &result)?;
    let _ = writeln!(
        out,
        "{} matrices evaluated ({} convergence failures); wrote {}, {}, {}, {}",
        result.records.len(),
        result.failures.len(),
        bundle.records_csv.display(),
        bundle.tables_csv.display(),
        bundle.figures_csv.display(),
        bundle.summary_text.display(),
    );
    if let Some(s) = result.soundness {
        let _ = writeln!(
            out,
            "theorem checks: {} pair / {} quadruple guarantees, {} failures",
            s.th1_flagged,
            s.th2_flagged,
            s.th1_failures + s.th2_failures + s.th2_unrestricted_failures
        );
    }
    Ok(())
}

/// Writes all four output files into `dir`, creating it if needed.
pub fn write_bundle(dir: &Path, config: &ExperimentConfig, result: &ExperimentOutput) -> Result<OutputBundle, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let bundle = OutputBundle::in_dir(dir);
    let rows = if result.records.is_empty() { Vec::new() } else { aggregate_tables(&result.records)? };
    let points = bin_by_ki(&result.records, config.ki_bin_width)?;

    write_atomic(&bundle.records_csv, &records_csv(&result.records))?;
    write_atomic(&bundle.tables_csv, &tables_csv(&rows))?;
    write_atomic(&bundle.figures_csv, &figures_csv(&points))?;
    write_atomic(&bundle.summary_text, summary_text(config, result, &rows, &points).as_bytes())?;
    Ok(bundle)
}

/// Writes through a temporary file in the target directory, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    w.into_inner().expect("in-memory flush")
}

/// `records.csv` contents. Floats use the shortest representation that
/// parses back to the same value.
pub fn records_csv(records: &[MatrixRecord]) -> Vec<u8> {
    csv_bytes(&RECORDS_HEADER, |w| {
        for r in records {
            w.write_record([
                r.n.to_string(),
                r.gamma.to_string(),
                r.replicate.to_string(),
                r.seed.to_string(),
                r.lambda_max.to_string(),
                r.ci.to_string(),
                r.ki.to_string(),
                r.pop_app.to_string(),
                r.pop_sat_ev.to_string(),
                r.pop_sat_gm.to_string(),
                r.poip_app.to_string(),
                r.poip_sat_ev.to_string(),
                r.poip_sat_gm.to_string(),
                r.th1.to_string(),
                r.th2.map(|t| t.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

pub fn parse_records(bytes: &[u8], path: &Path) -> Result<Vec<MatrixRecord>, CliError> {
    let bad = |message: String| CliError::Csv { path: path.to_path_buf(), message };
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(RECORDS_HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        macro_rules! num {
            ($k:expr) => {
                field($k)
                    .parse()
                    .map_err(|e| bad(format!("row {}: column {}: {e}", line + 1, RECORDS_HEADER[$k])))?
            };
        }
        out.push(MatrixRecord {
            n: num!(0),
            gamma: num!(1),
            replicate: num!(2),
            seed: num!(3),
            lambda_max: num!(4),
            ci: num!(5),
            ki: num!(6),
            pop_app: num!(7),
            pop_sat_ev: num!(8),
            pop_sat_gm: num!(9),
            poip_app: num!(10),
            poip_sat_ev: num!(11),
            poip_sat_gm: num!(12),
            th1: num!(13),
            th2: if field(14).is_empty() { None } else { Some(num!(14)) },
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<MatrixRecord>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_records(&bytes, path)
}

fn columns_vec(c: &TableColumns) -> [Option<f64>; 6] {
    [c.pop_ev, c.pop_gm, c.poip_ev, c.poip_gm, c.th1, c.th2]
}

/// `tables.csv` contents: one row per `(n, CI bucket)` with the three
/// percentage conventions side by side (`mean_`, `pooled_`, `class_`).
pub fn tables_csv(rows: &[AggregateRow]) -> Vec<u8> {
    let mut header = vec!["n".to_string(), "ci_bucket".to_string(), "matrices".to_string()];
    for prefix in ["mean", "pooled", "class"] {
        header.extend(COLUMN_NAMES.iter().map(|c| format!("{prefix}_{c}")));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_bytes(&header_refs, |w| {
        for r in rows {
            let mut fields = vec![r.n.to_string(), r.bucket.as_str().to_string(), r.matrix_count.to_string()];
            for cols in [&r.mean, &r.pooled, &r.per_class] {
                fields.extend(columns_vec(cols).into_iter().map(opt));
            }
            w.write_record(&fields)?;
        }
        Ok(())
    })
}

pub fn figures_csv(points: &[KiBinPoint]) -> Vec<u8> {
    let header = [
        "n",
        "method",
        "ki_bin",
        "ki_bin_center",
        "matrices",
        "mean_pop_violations",
        "mean_poip_violations",
        "mean_th1",
        "mean_th2",
    ];
    csv_bytes(&header, |w| {
        for p in points {
            w.write_record([
                p.n.to_string(),
                p.method.to_string(),
                p.bin.to_string(),
                p.bin_center.to_string(),
                p.matrices.to_string(),
                p.mean_pop_violations.to_string(),
                p.mean_poip_violations.to_string(),
                p.mean_th1.to_string(),
                opt(p.mean_th2),
            ])?;
        }
        Ok(())
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:6.2}")).unwrap_or_else(|| "    NA".to_string())
}

/// Spearman correlations of KI-binned series against bin centers for one
/// `(n, method)`: (POP violations, POIP violations, Th1 count).
pub fn ki_trends(points: &[KiBinPoint], n: usize, method: Method) -> (Option<f64>, Option<f64>, Option<f64>) {
    let series: Vec<&KiBinPoint> = points.iter().filter(|p| p.n == n && p.method == method).collect();
    let x: Vec<f64> = series.iter().map(|p| p.bin_center).collect();
    let pick = |f: fn(&KiBinPoint) -> f64| -> Vec<f64> { series.iter().map(|p| f(p)).collect() };
    (
        spearman(&x, &pick(|p| p.mean_pop_violations)),
        spearman(&x, &pick(|p| p.mean_poip_violations)),
        spearman(&x, &pick(|p| p.mean_th1)),
    )
}

pub fn summary_text(
    config: &ExperimentConfig,
    result: &ExperimentOutput,
    rows: &[AggregateRow],
    points: &[KiBinPoint],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Order preservation simulation summary");
    let _ = writeln!(s, "=====================================");
    let _ = writeln!(
        s,
        "orders {}..{}, {} disturbance levels in (1,4), {} matrices per cell, delta scheme {}, seed {}",
        config.n_min, config.n_max, config.gamma_levels, config.matrices_per_cell, config.delta_scheme, config.master_seed
    );
    let _ = writeln!(s, "matrices evaluated: {}", result.records.len());
    let _ = writeln!(s, "convergence failures: {}", result.failures.len());
    for f in &result.failures {
        let _ = writeln!(s, "  n={} gamma={} replicate={} seed={}: {}", f.n, f.gamma, f.replicate, f.seed, f.error);
    }
    if let Some(r) = result.soundness {
        let _ = writeln!(
            s,
            "theorem checks (EV and GM): pairs flagged {} failed {}; quadruples flagged {} failed {}; unrestricted quadruples flagged {} failed {}",
            r.th1_flagged, r.th1_failures, r.th2_flagged, r.th2_failures, r.th2_unrestricted_flagged, r.th2_unrestricted_failures
        );
    }

    for bucket in CiBucket::ALL {
        let _ = writeln!(s);
        let _ = writeln!(s, "Satisfaction of POP and POIP conditions (%), {bucket}; theorem columns use EV");
        let _ = writeln!(s, "Each cell: simulated [published]. Percentages count mirror classes of conditions.");
        let _ = writeln!(
            s,
            "{:>2} {:>8} | {:>16} {:>16} {:>16} {:>16} {:>16} {:>16}",
            "n", "matrices", "POP (EV)", "POP (GM)", "POIP (EV)", "POIP (GM)", "POP Th1", "POIP Th2"
        );
        for r in rows.iter().filter(|r| r.bucket == bucket) {
            let published = reference::lookup(r.n, bucket);
            let refs: [Option<f64>; 6] = match published {
                Some(p) => [Some(p.pop_ev), Some(p.pop_gm), Some(p.poip_ev), Some(p.poip_gm), Some(p.th1), p.th2],
                None => [None; 6],
            };
            let _ = write!(s, "{:>2} {:>8} |", r.n, r.matrix_count);
            for (ours, theirs) in columns_vec(&r.per_class).into_iter().zip(refs) {
                let _ = write!(s, " {} [{}]", cell(ours), cell(theirs));
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(s, "Applicable-only means (satisfied / applicable per matrix):");
        for r in rows.iter().filter(|r| r.bucket == bucket) {
            let _ = write!(s, "{:>2} {:>8} |", r.n, r.matrix_count);
            for v in columns_vec(&r.mean) {
                let _ = write!(s, " {}", cell(v));
            }
            let _ = writeln!(s);
        }
    }

    let _ = writeln!(s);
    let _ = writeln!(s, "KI trends (Spearman rank correlation with bin center, bin width {})", config.ki_bin_width);
    let mut orders: Vec<usize> = points.iter().map(|p| p.n).collect();
    orders.dedup();
    for n in orders {
        for method in Method::ALL {
            let (pop, poip, th1) = ki_trends(points, n, method);
            let f = |v: Option<f64>| v.map(|x| format!("{x:+.3}")).unwrap_or_else(|| "NA".into());
            let _ = writeln!(
                s,
                "n={n} {method}: POP violations {}, POIP violations {}, Th1 count {}",
                f(pop),
                f(poip),
                f(th1)
            );
        }
    }
    s
}

/// Parses a matrix text file: one row per line, entries separated by
/// whitespace and/or commas, `#` starts a comment, blank lines ignored.
pub fn parse_matrix_text(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if fields.is_empty() {
            continue;
        }
        let row = fields
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("line {}: cannot parse '{t}' as a number", lineno + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn one_based(pairs: &[(usize, usize)]) -> String {
    if pairs.is_empty() {
        return "none".into();
    }
    pairs.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).collect::<Vec<_>>().join(" ")
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.matrix_file).map_err(|e| CliError::io(&args.matrix_file, e))?;
    let report = eval_report(&parse_matrix_text(&text)?, args.ev_tol, args.ev_max_iter, args.verbose)?;
    out.write_all(report.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// Human-readable audit of a single matrix.
pub fn eval_report(rows: &[Vec<f64>], ev_tol: f64, ev_max_iter: usize, verbose: bool) -> Result<String, CliError> {
    let c = PcMatrix::from_rows(rows)?;
    let eigen = ev_weights(&c, ev_tol, ev_max_iter)?;
    let gm = gm_weights(&c);
    let inc = InconsistencyReport::from_eigen(&c, &eigen);
    let fmt_w = |w: &[f64]| w.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" ");

    let mut s = String::new();
    let _ = writeln!(s, "order: {}", c.order());
    let _ = writeln!(s, "lambda_max: {}", inc.lambda_max);
    let _ = writeln!(s, "CI: {}", inc.ci);
    let _ = writeln!(s, "KI: {}", inc.ki);
    let _ = writeln!(s, "EV weights: {}", fmt_w(eigen.vector.weights()));
    let _ = writeln!(s, "GM weights: {}", fmt_w(gm.weights()));

    for w in [&eigen.vector, &gm] {
        let pop = pop_evaluate(&c, w);
        let poip = poip_evaluate(&c, w);
        let pct = |v: Option<f64>| v.map(|p| format!("{p:.2}%")).unwrap_or_else(|| "NA".into());
        let _ = writeln!(
            s,
            "[{}] POP applicable {} satisfied {} violated {} ({})",
            w.method(),
            pop.applicable,
            pop.satisfied,
            pop.violated(),
            pct(pop.percent())
        );
        let _ = writeln!(s, "[{}] POP violated pairs: {}", w.method(), one_based(&pop_violations(&c, w)));
        let _ = writeln!(
            s,
            "[{}] POIP applicable {} satisfied {} violated {} ({})",
            w.method(),
            poip.applicable,
            poip.satisfied,
            poip.violated(),
            pct(poip.percent())
        );
        if verbose {
            for (i, j, k, l) in poip_violations(&c, w) {
                let _ = writeln!(s, "[{}]   POIP violated ({},{}) over ({},{})", w.method(), i + 1, j + 1, k + 1, l + 1);
            }
        }
    }

    let t = ki_threshold(inc.ki);
    let _ = writeln!(s, "KI pair guarantee, threshold {t}: guaranteed pairs {}", one_based(&theorem1_pairs(&c, inc.ki)));
    let _ = writeln!(
        s,
        "KI quadruple guarantee, threshold {}: guaranteed quadruples {}",
        t * t,
        theorem2_count(&c, inc.ki)
    );
    if verbose {
        let _ = writeln!(
            s,
            "KI quadruple guarantee, unrestricted (c_ij, c_kl not required > 1): {}",
            theorem2_count_unrestricted(&c, inc.ki)
        );
    }
    Ok(s)
}
