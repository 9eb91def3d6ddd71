use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::csv_io::{load_dataset, read_int_column, write_int_column, write_matrix_csv, ColumnRef, CsvFormat};
use super::report::{ConfigEcho, ModelSummary, RunReport};
use crate::clustering::{exact_kernel_kmeans, minkowski_kmeans, Dataset, Init, RunConfig};
use crate::diagnostics::{concentration_sweep, Generator};
use crate::error::{Error, Result};
use crate::evaluation::{default_p_grid, evaluate, select_p};
use crate::featmap::{approximation_report, FeatureMap, KernelKind, KernelSpec, MapConfig};
use crate::minkcore::{Exponent, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Environment variable capping worker threads (0 or unset = all cores).
pub const THREADS_ENV: &str = "KERNMINK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kernmink", version, about = "Explicit kernel maps and weighted Minkowski K-means")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the explicitly mapped dataset as CSV.
    Map(MapArgs),
    /// Cluster a dataset and write a JSON report.
    Cluster(ClusterArgs),
    /// Choose the Minkowski exponent from a labeled sample.
    #[command(name = "select-p")]
    SelectP(SelectArgs),
    /// Distance-concentration sweep on synthetic data.
    Diag(DiagArgs),
    /// NMI and purity of an assignment file against a label file.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file, one sample per row.
    #[arg(long)]
    pub input: PathBuf,
    /// First row is a header.
    #[arg(long)]
    pub header: bool,
    /// Label column, by header name or 0-based index.
    #[arg(long = "label-col")]
    pub label_col: Option<String>,
    /// Row id column, by header name or 0-based index.
    #[arg(long = "id-col")]
    pub id_col: Option<String>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// hellinger, chi2, intersection, js, hein_bousquet, or none.
    #[arg(long, default_value = "chi2")]
    pub kernel: String,
    /// Hein-Bousquet alpha.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Hein-Bousquet beta.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Spectrum samples per side.
    #[arg(long = "map-n", default_value_t = 1)]
    pub map_n: usize,
    /// Sampling period of the spectrum.
    #[arg(long = "map-period", default_value_t = 0.5)]
    pub map_period: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub k: usize,
    /// Feature weights per cluster.
    #[arg(long)]
    pub weighted: bool,
    /// random, warm2 or warm1 (default: random at p = 2, warm2 otherwise).
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Tolerance of the center solvers.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Kernel K-means on the full Gram matrix instead of the explicit map.
    #[arg(long = "exact-kernel")]
    pub exact_kernel: bool,
    /// Random pairs for the map approximation report (0 = skip).
    #[arg(long = "approx-pairs", default_value_t = 0)]
    pub approx_pairs: usize,
    /// Also write the assignments, one per line.
    #[arg(long = "assignments-out")]
    pub assignments_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated exponents (default 0.5, 0.7, 0.9, 1.0, 1.1, ..., 3.1).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long = "labeled-frac", default_value_t = 0.15)]
    pub labeled_frac: f64,
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Uniform,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    #[arg(long, value_enum, default_value_t = GeneratorKind::Uniform)]
    pub generator: GeneratorKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub low: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub high: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub std: f64,
    #[arg(long = "p-grid", value_delimiter = ',', default_value = "0.5,1,2,4")]
    pub p_grid: Vec<f64>,
    #[arg(long = "d-grid", value_delimiter = ',', default_value = "2,8,32,128,512")]
    pub d_grid: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One class label per line.
    #[arg(long)]
    pub labels: PathBuf,
    /// One cluster index per line.
    #[arg(long)]
    pub assignments: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs it with the thread cap from
/// `KERNMINK_THREADS`, and returns the process exit code. Errors go to
/// stderr.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| run(cli)));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::InvalidArgument(format!("{THREADS_ENV} must be a nonnegative integer, got '{v}'"))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Runs a parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Map(a) => run_map(a),
        Command::Cluster(a) => run_cluster(a),
        Command::SelectP(a) => run_select(a),
        Command::Diag(a) => run_diag(a),
        Command::Eval(a) => run_eval(a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(report: &RunReport, out: Option<&Path>) -> Result<()> {
    let mut w = output(out)?;
    w.write_all(report.to_json()?.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// `None` for `--kernel none`.
fn kernel_spec(a: &KernelArgs) -> Result<Option<KernelSpec>> {
    if a.kernel.eq_ignore_ascii_case("none") {
        if a.alpha.is_some() || a.beta.is_some() {
            return Err(Error::InvalidArgument("--alpha/--beta need --kernel hein_bousquet".into()));
        }
        return Ok(None);
    }
    let kind: KernelKind = a.kernel.parse()?;
    if kind != KernelKind::HeinBousquet && (a.alpha.is_some() || a.beta.is_some()) {
        return Err(Error::InvalidArgument("--alpha/--beta need --kernel hein_bousquet".into()));
    }
    KernelSpec::new(kind, a.alpha, a.beta).map(Some)
}

fn load(input: &InputArgs, nonnegative: bool) -> Result<Dataset> {
    let format = CsvFormat {
        has_header: input.header,
        label: input.label_col.as_deref().map(str::parse::<ColumnRef>).transpose()?,
        id: input.id_col.as_deref().map(str::parse::<ColumnRef>).transpose()?,
        require_nonnegative: nonnegative,
    };
    load_dataset(&input.input, &format)
}

fn echo_input(echo: &mut ConfigEcho, input: &InputArgs) {
    echo.input = Some(input.input.display().to_string());
    echo.header = Some(input.header);
    echo.label_column = input.label_col.clone();
    echo.id_column = input.id_col.clone();
}

fn echo_kernel(echo: &mut ConfigEcho, spec: Option<&KernelSpec>, map: &MapConfig) {
    match spec {
        Some(s) => {
            echo.kernel = Some(s.kind().name().to_string());
            echo.alpha = s.alpha();
            echo.beta = s.beta();
            echo.map_n = Some(map.n);
            echo.map_period = Some(map.period);
        }
        None => echo.kernel = Some("none".into()),
    }
}

fn run_config(run: &RunArgs, p: Exponent) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(run.k, p)
        .with_seed(run.seed)
        .with_restarts(run.restarts)
        .with_max_iter(run.max_iter);
    cfg.tol = run.tol;
    if let Some(init) = &run.init {
        cfg.init = init.parse::<Init>()?;
    }
    Ok(cfg)
}

fn echo_run(echo: &mut ConfigEcho, cfg: &RunConfig, weighted: bool) {
    echo.k = Some(cfg.k);
    echo.p = Some(cfg.p.value());
    echo.weighted = Some(weighted);
    echo.init = Some(cfg.init.name().to_string());
    echo.restarts = Some(cfg.restarts);
    echo.seed = Some(cfg.seed);
    echo.max_iter = Some(cfg.max_iter);
    echo.tol = Some(cfg.tol);
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn run_map(a: MapArgs) -> Result<()> {
    let spec = kernel_spec(&a.kernel)?
        .ok_or_else(|| Error::InvalidArgument("map needs a kernel other than none".into()))?;
    let map = MapConfig::new(a.kernel.map_n, a.kernel.map_period)?;
    let data = load(&a.input, true)?;
    let mapped = FeatureMap::new(spec, map)?.map_dataset(&data)?;
    write_matrix_csv(output(a.out.as_deref())?, &mapped.values, data.labels())
}

fn run_cluster(a: ClusterArgs) -> Result<()> {
    let spec = kernel_spec(&a.kernel)?;
    let map = MapConfig::new(a.kernel.map_n, a.kernel.map_period)?;
    if a.exact_kernel {
        if a.run.weighted {
            return Err(Error::InvalidArgument("--weighted cannot be combined with --exact-kernel".into()));
        }
        if spec.is_none() {
            return Err(Error::InvalidArgument("--exact-kernel needs a kernel other than none".into()));
        }
        if a.p != 2.0 {
            return Err(Error::InvalidArgument("--exact-kernel runs at --p 2 only".into()));
        }
        if a.run.init.as_deref().is_some_and(|i| i != "random") {
            return Err(Error::InvalidArgument("--exact-kernel supports --init random only".into()));
        }
    }
    if a.approx_pairs > 0 && spec.is_none() {
        return Err(Error::InvalidArgument("--approx-pairs needs a kernel other than none".into()));
    }
    let p = Exponent::new(a.p)?;
    let cfg = run_config(&a.run, p)?;
    let data = load(&a.input, spec.is_some())?;

    let mut echo = ConfigEcho::default();
    echo_input(&mut echo, &a.input);
    echo_kernel(&mut echo, spec.as_ref(), &map);
    echo_run(&mut echo, &cfg, a.run.weighted);
    echo.engine = Some(if a.exact_kernel { "exact" } else { "explicit" }.into());
    echo.approx_pairs = Some(a.approx_pairs);
    let mut report = RunReport::new("cluster", echo);

    let model = match (&spec, a.exact_kernel) {
        (Some(s), true) => {
            let t = Instant::now();
            let m = exact_kernel_kmeans(&data, s, &cfg)?;
            report.timing.cluster_ms = ms(t);
            m
        }
        (Some(s), false) => {
            let t = Instant::now();
            let mapped = FeatureMap::new(*s, map)?.map_dataset(&data)?;
            report.timing.map_ms = ms(t);
            let t = Instant::now();
            let m = minkowski_kmeans(mapped.values.view(), &cfg, a.run.weighted)?;
            report.timing.cluster_ms = ms(t);
            m
        }
        (None, _) => {
            let t = Instant::now();
            let m = minkowski_kmeans(data.values().view(), &cfg, a.run.weighted)?;
            report.timing.cluster_ms = ms(t);
            m
        }
    };
    if let Some(labels) = data.labels() {
        report.metrics = Some(evaluate(labels, &model.assignments)?);
    }
    if let (Some(s), true) = (&spec, a.approx_pairs > 0) {
        report.approximation = Some(approximation_report(s, &map, &data, a.approx_pairs, cfg.seed)?);
    }
    let map_echo = (spec.is_some() && !a.exact_kernel).then_some((map.n, map.period));
    report.model = Some(ModelSummary::new(
        &model,
        spec.map(|s| s.kind().name().to_string()),
        map_echo,
        cfg.restarts,
    ));
    if let Some(path) = &a.assignments_out {
        write_int_column(BufWriter::new(File::create(path)?), &model.assignments)?;
    }
    emit(&report, a.out.as_deref())
}

fn run_select(a: SelectArgs) -> Result<()> {
    let spec = kernel_spec(&a.kernel)?
        .ok_or_else(|| Error::InvalidArgument("select-p needs a kernel other than none".into()))?;
    let map = MapConfig::new(a.kernel.map_n, a.kernel.map_period)?;
    let mut cfg = run_config(&a.run, Exponent::TWO)?;
    if a.run.init.is_none() {
        cfg.init = Init::RandomPoints;
    }
    let grid = a.grid.clone().unwrap_or_else(default_p_grid);
    let data = load(&a.input, true)?;

    let mut echo = ConfigEcho::default();
    echo_input(&mut echo, &a.input);
    echo_kernel(&mut echo, Some(&spec), &map);
    echo_run(&mut echo, &cfg, a.run.weighted);
    echo.p = None;
    echo.engine = Some("explicit".into());
    echo.grid = Some(grid.clone());
    echo.labeled_fraction = Some(a.labeled_frac);
    echo.repeats = Some(a.repeats);
    let mut report = RunReport::new("select-p", echo);

    let t = Instant::now();
    let sel = select_p(&data, &spec, &map, &cfg, a.run.weighted, &grid, a.labeled_frac, a.repeats, cfg.seed)?;
    report.timing.cluster_ms = ms(t);
    report.selection = Some(sel);
    emit(&report, a.out.as_deref())
}

fn run_diag(a: DiagArgs) -> Result<()> {
    let generator = match a.generator {
        GeneratorKind::Uniform => Generator::Uniform { low: a.low, high: a.high },
        GeneratorKind::Gaussian => Generator::Gaussian { mean: a.mean, std: a.std },
    };
    let echo = ConfigEcho {
        grid: Some(a.p_grid.clone()),
        d_grid: Some(a.d_grid.clone()),
        n: Some(a.n),
        seed: Some(a.seed),
        repeats: Some(a.repeats),
        ..Default::default()
    };
    let mut report = RunReport::new("diag", echo);
    let t = Instant::now();
    report.diagnostics = Some(concentration_sweep(generator, &a.p_grid, &a.d_grid, a.n, a.seed, a.repeats)?);
    report.timing.cluster_ms = ms(t);
    emit(&report, a.out.as_deref())
}

fn run_eval(a: EvalArgs) -> Result<()> {
    let labels = read_int_column(&a.labels)?;
    let assignments = read_int_column(&a.assignments)?;
    let echo = ConfigEcho {
        labels: Some(a.labels.display().to_string()),
        assignments: Some(a.assignments.display().to_string()),
        ..Default::default()
    };
    let mut report = RunReport::new("eval", echo);
    report.metrics = Some(evaluate(&labels, &assignments)?);
    emit(&report, a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("kernmink").chain(args.iter().copied()))
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(parse(&["cluster", "--input", "x.csv", "--k", "2", "--bogus"]).is_err());
        assert!(parse(&["frobnicate"]).is_err());
        assert!(parse(&["cluster", "--input", "x.csv"]).is_err());
    }

    #[test]
    fn grids_parse() {
        let cli = parse(&["select-p", "--input", "x.csv", "--k", "2", "--grid", "1,1.5,2"]).unwrap();
        match cli.command {
            Command::SelectP(a) => assert_eq!(a.grid.unwrap(), vec![1.0, 1.5, 2.0]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn kernel_flags() {
        let mut k = KernelArgs {
            kernel: "none".into(),
            alpha: None,
            beta: None,
            map_n: 1,
            map_period: 0.5,
        };
        assert!(kernel_spec(&k).unwrap().is_none());
        k.alpha = Some(1.0);
        assert!(kernel_spec(&k).is_err());
        k.kernel = "chi2".into();
        assert!(kernel_spec(&k).is_err());
        k.kernel = "hb".into();
        k.beta = Some(0.5);
        assert_eq!(kernel_spec(&k).unwrap().unwrap().kind(), KernelKind::HeinBousquet);
    }

    #[test]
    fn inconsistent_cluster_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "0.1,0.9\n0.2,0.8\n0.9,0.1\n").unwrap();
        let p = path.to_str().unwrap();
        let base = ["kernmink", "cluster", "--input", p, "--k", "2"];
        let with = |extra: &[&str]| {
            let args: Vec<&str> = base.iter().chain(extra).copied().collect();
            run(Cli::try_parse_from(args).unwrap())
        };
        assert!(with(&["--weighted", "--exact-kernel"]).is_err());
        assert!(with(&["--exact-kernel", "--p", "1.5"]).is_err());
        assert!(with(&["--exact-kernel", "--kernel", "none"]).is_err());
        assert!(with(&["--exact-kernel", "--init", "warm2"]).is_err());
        assert!(with(&["--kernel", "none", "--approx-pairs", "5"]).is_err());
        let out = dir.path().join("r.json");
        assert!(with(&["--out", out.to_str().unwrap()]).is_ok());
    }
}
