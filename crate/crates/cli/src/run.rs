//! Argument parsing, dispatch and the output-directory layout
//! `<outdir>/<command>-<timestamp>/{*.csv, *.txt, manifest.txt}`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use phasecart::analysis::{fit_csv, fit_power_law, mu_critical_vs_n, mu_infinity, CriticalSearch, Method};
use phasecart::coherent::{critical_points_2level, energy_surface_2level, gamma_critical, Region, TwoLevelAngles};
use phasecart::eigen::lowest_eigenpairs;
use phasecart::model::{format_config, parse_config_with_overrides, Configuration, ModelConfig};
use phasecart::output::{csv, num};
use phasecart::phase::{detect_separatrix, label_regions, scan_with, Axis, Grid, ScanOptions, SolverKind, CHI_THRESHOLD};
use phasecart::reduced_basis::{build_reduced_basis, dimension_csv, error_surface, exact_basis, max_order, photon_cutoffs, E10};
use phasecart::reduction::{compose_diagram, reduction_tree, subsystems_csv, tree_csv, tree_text, two_level_subsystems};
use phasecart::solver::BlockSolver;
use phasecart::sweep::compare_sweep;
use phasecart::variational::xi_separatrix;
use phasecart::Error;

const USAGE_ERROR: i32 = 1;
const NUMERICAL_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "phasecart", version, about = "Ground-state phase diagrams of finite atom-field systems")]
struct Cli {
    /// Worker threads (default: PHASECART_THREADS, then available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Parent directory for run directories.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Model file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set N=6`; later overrides win and all
    /// of them win over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest eigenvalues of every symmetry block.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Two-level coherent energy surface over (q, θ), or the reduced-basis
    /// error surface over coupling axes.
    Surface {
        #[command(flatten)]
        model: ModelArgs,
        /// `energy` or `error`.
        #[arg(long, default_value = "energy")]
        kind: String,
        /// `lo:hi:step` for q (energy surface).
        #[arg(long, default_value = "-6:6:0.1", allow_hyphen_values = true)]
        q: String,
        /// `lo:hi:step` for θ (energy surface).
        #[arg(long, default_value = "0:3.1415926535897931:0.05")]
        theta: String,
        /// Comma-separated axes `name:lo:hi:step` (error surface).
        #[arg(long)]
        axes: Option<String>,
        /// Basis orders (error surface).
        #[arg(long, default_value = "0,1,2")]
        orders: String,
        /// Coupling ratio μ/μᶜ at which photon cutoffs are fixed.
        #[arg(long, default_value_t = 3.0)]
        x: f64,
        #[arg(long, default_value_t = E10)]
        eps: f64,
    },
    /// Closed-form separatrix and critical points, or a scanned separatrix.
    Separatrix {
        #[command(flatten)]
        model: ModelArgs,
        /// Scan these axes and extract the separatrix from the scan instead.
        #[arg(long)]
        axes: Option<String>,
        #[arg(long, default_value = "exact")]
        solver: String,
        /// Upper end of the sampled closed-form curve.
        #[arg(long, default_value_t = 2.5)]
        extent: f64,
    },
    /// Phase-diagram grid scan.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        axes: String,
        /// exact, coherent, sas or composed.
        #[arg(long, default_value = "exact")]
        solver: String,
        #[arg(long, default_value_t = 0.5)]
        photon_cut: f64,
    },
    /// Level-reduction tree and its 2-level subsystems.
    Reduce {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Reduced-basis dimension report.
    Basis {
        #[command(flatten)]
        model: ModelArgs,
        /// Highest order reported.
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, default_value_t = 3.0)]
        x: f64,
        #[arg(long, default_value_t = E10)]
        eps: f64,
    },
    /// Critical coupling against N and its power-law fit.
    Exponent {
        #[command(flatten)]
        model: ModelArgs,
        /// Coupling label, e.g. `mu12` or `gamma`.
        #[arg(long, default_value = "mu12")]
        coupling: String,
        #[arg(long, default_value = "8,16,32,64,128")]
        n: String,
        /// coherent, sas or exact.
        #[arg(long, default_value = "sas")]
        method: String,
        /// Search window `lo:hi`.
        #[arg(long, default_value = "0.5:0.8")]
        window: String,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Exact, coherent and SAS fidelities and photon fluctuations along one
    /// coupling.
    Fluctuation {
        #[command(flatten)]
        model: ModelArgs,
        /// `name:lo:hi:step`.
        #[arg(long)]
        axis: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Surface { .. } => "surface",
            Command::Separatrix { .. } => "separatrix",
            Command::Scan { .. } => "scan",
            Command::Reduce { .. } => "reduce",
            Command::Basis { .. } => "basis",
            Command::Exponent { .. } => "exponent",
            Command::Fluctuation { .. } => "fluctuation",
        }
    }

    fn model(&self) -> &ModelArgs {
        match self {
            Command::Spectrum { model, .. }
            | Command::Surface { model, .. }
            | Command::Separatrix { model, .. }
            | Command::Scan { model, .. }
            | Command::Reduce { model }
            | Command::Basis { model, .. }
            | Command::Exponent { model, .. }
            | Command::Fluctuation { model, .. } => model,
        }
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Configuration(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("i/o: {e}"))
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

/// Named output files of one command, in emission order.
type Files = Vec<(String, String)>;

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            0
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            USAGE_ERROR
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            NUMERICAL_ERROR
        }
    }
}

fn thread_count(flag: Option<usize>) -> Outcome<Option<usize>> {
    if let Some(n) = flag {
        return if n > 0 { Ok(Some(n)) } else { usage("--threads must be positive") };
    }
    match std::env::var("PHASECART_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => usage(format!("PHASECART_THREADS must be a positive integer, got `{v}`")),
        },
        Err(_) => Ok(None),
    }
}

fn load_model(m: &ModelArgs) -> Outcome<(ModelConfig, Vec<(String, String)>)> {
    let text = std::fs::read_to_string(&m.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", m.config.display())))?;
    let mut overrides = Vec::new();
    for s in &m.set {
        let (k, v) = s.split_once('=').ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
        overrides.retain(|(key, _): &(String, String)| key != k.trim());
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok((parse_config_with_overrides(&text, &overrides)?, overrides))
}

fn execute(cli: &Cli) -> Outcome<PathBuf> {
    let threads = thread_count(cli.threads)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Numerical(format!("thread pool: {e}")))?;
    let (cfg, overrides) = load_model(cli.command.model())?;
    let start = Instant::now();
    let files = pool.install(|| dispatch(&cli.command, &cfg))?;
    let wall = start.elapsed().as_secs_f64();
    let dir = run_dir(&cli.out, cli.command.name())?;
    let mut listed = Vec::new();
    for (name, body) in &files {
        std::fs::write(dir.join(name), body)?;
        listed.push((name.clone(), hex(&Sha256::digest(body.as_bytes()))));
    }
    std::fs::write(dir.join("model.cfg"), format_config(&cfg))?;
    listed.push(("model.cfg".into(), hex(&Sha256::digest(format_config(&cfg).as_bytes()))));
    let manifest = manifest_text(cli, &dir, &overrides, wall, pool.current_num_threads(), &listed);
    std::fs::write(dir.join("manifest.txt"), manifest)?;
    Ok(dir)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Fresh `<out>/<command>-<timestamp>[-k]` directory.
fn run_dir(out: &Path, command: &str) -> Outcome<PathBuf> {
    std::fs::create_dir_all(out)?;
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S").to_string();
    for k in 0.. {
        let name = if k == 0 { format!("{command}-{stamp}") } else { format!("{command}-{stamp}-{k}") };
        let p = out.join(name);
        match std::fs::create_dir(&p) {
            Ok(()) => return Ok(p),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

fn manifest_text(cli: &Cli, dir: &Path, overrides: &[(String, String)], wall: f64, threads: usize, files: &[(String, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command: {}", cli.command.name());
    let _ = writeln!(s, "config: {}", cli.command.model().config.display());
    let _ = writeln!(s, "output: {}", dir.display());
    let ov: Vec<String> = overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(s, "overrides: {}", ov.join(" "));
    let _ = writeln!(s, "threads: {threads}");
    let _ = writeln!(s, "wall_seconds: {wall:.3}");
    let _ = writeln!(s, "version: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "files:");
    for (name, sum) in files {
        let _ = writeln!(s, "  {sum}  {name}");
    }
    s
}

fn parse_axes(cfg: &ModelConfig, spec: &str) -> Outcome<Grid> {
    let axes = spec.split(',').map(|a| Axis::parse(cfg, a.trim())).collect::<phasecart::Result<Vec<_>>>()?;
    Ok(Grid::new(axes)?)
}

fn parse_range(s: &str, what: &str) -> Outcome<Vec<f64>> {
    let v: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad {what} `{s}`")))?;
    Ok(v)
}

fn samples(s: &str, what: &str) -> Outcome<Vec<f64>> {
    let v = parse_range(s, what)?;
    if v.len() != 3 || !(v[2] > 0.0) || !(v[1] >= v[0]) {
        return usage(format!("{what} must be lo:hi:step"));
    }
    let n = ((v[1] - v[0]) / v[2] + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| v[0] + v[2] * i as f64).collect())
}

fn dispatch(cmd: &Command, cfg: &ModelConfig) -> Outcome<Files> {
    match cmd {
        Command::Spectrum { k, .. } => spectrum(cfg, *k),
        Command::Surface { kind, q, theta, axes, orders, x, eps, .. } => match kind.as_str() {
            "energy" => energy_surface(cfg, q, theta),
            "error" => {
                let axes = axes.as_deref().ok_or_else(|| Failure::Usage("--kind error needs --axes".into()))?;
                error_map(cfg, axes, orders, *x, *eps)
            }
            _ => usage(format!("unknown surface kind `{kind}` (energy, error)")),
        },
        Command::Separatrix { axes, solver, extent, .. } => match axes {
            Some(a) => scanned_separatrix(cfg, a, solver),
            None => closed_separatrix(cfg, *extent),
        },
        Command::Scan { axes, solver, photon_cut, .. } => scan_cmd(cfg, axes, solver, *photon_cut),
        Command::Reduce { .. } => reduce(cfg),
        Command::Basis { order, x, eps, .. } => basis(cfg, *order, *x, *eps),
        Command::Exponent { coupling, n, method, window, step, delta, .. } => {
            exponent(cfg, coupling, n, method, window, *step, *delta)
        }
        Command::Fluctuation { axis, .. } => {
            let a = Axis::parse(cfg, axis)?;
            Ok(vec![("sweep.csv".into(), compare_sweep(cfg, &a)?.to_csv())])
        }
    }
}

fn spectrum(cfg: &ModelConfig, k: usize) -> Outcome<Files> {
    if k == 0 {
        return usage("--k must be positive");
    }
    let solver = BlockSolver::new(cfg)?;
    let header: Vec<String> = ["sector", "index", "energy", "residual", "block_dim"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for b in &solver.blocks {
        let h = b.parts.assemble(&cfg.mu())?;
        let r = lowest_eigenpairs(&h, k.min(b.basis.dim()), solver.tol)?;
        for (i, (e, res)) in r.energies.iter().zip(&r.residuals).enumerate() {
            rows.push(vec![b.sector.label(), i.to_string(), num(*e), num(*res), b.basis.dim().to_string()]);
        }
    }
    Ok(vec![("spectrum.csv".into(), csv(&header, &rows))])
}

fn energy_surface(cfg: &ModelConfig, q: &str, theta: &str) -> Outcome<Files> {
    if cfg.configuration != Configuration::TwoLevel {
        return usage("the energy surface is tabulated for the two-level model only");
    }
    let qs = samples(q, "--q")?;
    let ts = samples(theta, "--theta")?;
    let header: Vec<String> = ["q", "theta", "E"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::with_capacity(qs.len() * ts.len());
    for &qv in &qs {
        for &tv in &ts {
            let e = energy_surface_2level(&TwoLevelAngles::new(qv, 0.0, tv, 0.0), cfg)?;
            rows.push(vec![num(qv), num(tv), num(e)]);
        }
    }
    Ok(vec![("surface.csv".into(), csv(&header, &rows))])
}

fn error_map(cfg: &ModelConfig, axes: &str, orders: &str, x: f64, eps: f64) -> Outcome<Files> {
    let grid = parse_axes(cfg, axes)?;
    let orders: Vec<u32> = orders
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad --orders `{orders}`")))?;
    let cutoffs = photon_cutoffs(cfg, &vec![x; cfg.couplings.len()], eps)?;
    let surf = error_surface(cfg, &cutoffs, &orders, &grid)?;
    let bases = orders.iter().map(|&o| build_reduced_basis(cfg, o, &cutoffs)).collect::<phasecart::Result<Vec<_>>>()?;
    let exact = exact_basis(cfg, &cutoffs)?;
    Ok(vec![
        ("error_surface.csv".into(), surf.to_csv()),
        ("dimensions.csv".into(), dimension_csv(&bases, &exact, cfg.n_levels(), cfg.atoms)),
    ])
}

fn region_name(r: Region) -> &'static str {
    match r {
        Region::NormalNorth => "normal-north",
        Region::NormalSouth => "normal-south",
        Region::Collective => "collective",
    }
}

fn closed_separatrix(cfg: &ModelConfig, extent: f64) -> Outcome<Files> {
    if !(extent > 0.0) {
        return usage("--extent must be positive");
    }
    match cfg.configuration {
        Configuration::TwoLevel => {
            let gc = gamma_critical(cfg)?;
            let h: Vec<String> = ["region", "q", "p", "theta", "phi", "energy", "lambda_c"].iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = critical_points_2level(cfg)?
                .iter()
                .map(|c| {
                    let a = &c.angles;
                    vec![region_name(c.region).into(), num(a.q), num(a.p), num(a.theta), num(a.phi), num(c.energy), num(c.lambda_c)]
                })
                .collect();
            // γ_c as a function of ω_A at the model's field frequency
            let hs: Vec<String> = ["omega_A", "gamma_c"].iter().map(|s| s.to_string()).collect();
            let curve: Vec<Vec<String>> = (0..=200)
                .map(|i| {
                    let w = extent * i as f64 / 200.0;
                    let g = (cfg.modes[0] * w).sqrt() * if cfg.rwa { 1.0 } else { 0.5 };
                    vec![num(w), num(g)]
                })
                .collect();
            let gh: Vec<String> = vec!["gamma_c".into()];
            Ok(vec![
                ("gamma_c.csv".into(), csv(&gh, &[vec![num(gc)]])),
                ("critical_points.csv".into(), csv(&h, &rows)),
                ("separatrix.csv".into(), csv(&hs, &curve)),
            ])
        }
        Configuration::Xi if cfg.n_modes() == 1 => {
            let s = xi_separatrix(cfg)?;
            let h: Vec<String> = ["mu23", "mu12", "order"].iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = s
                .polyline(extent, 251)
                .into_iter()
                .map(|(m12, m23)| vec![num(m23), num(m12), s.order(m23).name().into()])
                .collect();
            Ok(vec![("separatrix.csv".into(), csv(&h, &rows))])
        }
        _ => usage("no closed-form separatrix for this configuration; pass --axes to scan"),
    }
}

fn diagram(cfg: &ModelConfig, grid: &Grid, solver: &str, photon_cut: f64) -> Outcome<phasecart::phase::PhaseDiagram> {
    let kind: SolverKind = solver.parse()?;
    if kind == SolverKind::Composed {
        let subs = two_level_subsystems(cfg)?;
        return Ok(compose_diagram(cfg, &subs, grid)?);
    }
    let opts = ScanOptions { photon_cut, ..ScanOptions::default() };
    Ok(label_regions(scan_with(cfg, grid, kind, &opts)?, photon_cut))
}

fn scanned_separatrix(cfg: &ModelConfig, axes: &str, solver: &str) -> Outcome<Files> {
    let grid = parse_axes(cfg, axes)?;
    let pd = diagram(cfg, &grid, solver, ScanOptions::default().photon_cut)?;
    let sep = detect_separatrix(&pd, CHI_THRESHOLD);
    Ok(vec![("phase.csv".into(), pd.to_csv()), ("separatrix.csv".into(), sep.to_csv(&grid))])
}

fn scan_cmd(cfg: &ModelConfig, axes: &str, solver: &str, photon_cut: f64) -> Outcome<Files> {
    if !(photon_cut >= 0.0) {
        return usage("--photon-cut must be nonnegative");
    }
    let grid = parse_axes(cfg, axes)?;
    let pd = diagram(cfg, &grid, solver, photon_cut)?;
    let mut files: Files = vec![("phase.csv".into(), pd.to_csv())];
    if pd.invalid > 0 {
        files.push(("invalid.txt".into(), format!("{} of {} points failed\n", pd.invalid, grid.len())));
    }
    Ok(files)
}

fn reduce(cfg: &ModelConfig) -> Outcome<Files> {
    let tree = reduction_tree(cfg)?;
    let subs = two_level_subsystems(cfg)?;
    Ok(vec![
        ("tree.txt".into(), tree_text(&tree)),
        ("tree.csv".into(), tree_csv(&tree)),
        ("subsystems.csv".into(), subsystems_csv(cfg, &subs)),
    ])
}

fn basis(cfg: &ModelConfig, order: u32, x: f64, eps: f64) -> Outcome<Files> {
    let cutoffs = photon_cutoffs(cfg, &vec![x; cfg.couplings.len()], eps)?;
    let top = max_order(&cutoffs);
    if order > top {
        return usage(format!("order {order} exceeds the saturating order {top}"));
    }
    let bases = (0..=order).map(|o| build_reduced_basis(cfg, o, &cutoffs)).collect::<phasecart::Result<Vec<_>>>()?;
    let exact = exact_basis(cfg, &cutoffs)?;
    let h: Vec<String> = ["coupling", "mode", "x", "m"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = cutoffs
        .iter()
        .map(|c| vec![cfg.couplings[c.coupling].label(), (c.mode + 1).to_string(), num(c.x), c.m.to_string()])
        .collect();
    Ok(vec![
        ("dimensions.csv".into(), dimension_csv(&bases, &exact, cfg.n_levels(), cfg.atoms)),
        ("cutoffs.csv".into(), csv(&h, &rows)),
    ])
}

fn exponent(
    cfg: &ModelConfig,
    coupling: &str,
    n: &str,
    method: &str,
    window: &str,
    step: Option<f64>,
    delta: Option<f64>,
) -> Outcome<Files> {
    let axis = Axis::new(cfg, coupling, 0.0, 0.0, 1.0)?;
    let method: Method = method.parse()?;
    let ns: Vec<u32> = n
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad --n `{n}`")))?;
    let w = parse_range(window, "--window")?;
    if w.len() != 2 {
        return usage("--window must be lo:hi");
    }
    let mut search = CriticalSearch::new(axis.coupling, w[0], w[1]);
    if let Some(s) = step {
        search.step = s;
    }
    if let Some(d) = delta {
        search.delta = d;
    }
    let series = mu_critical_vs_n(cfg, &ns, method, &search)?;
    let mu_inf = mu_infinity(cfg, axis.coupling)?;
    let fit = fit_power_law(&series, mu_inf)?;
    Ok(vec![("fit.csv".into(), fit_csv(&series, mu_inf, &fit))])
}
