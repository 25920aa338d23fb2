//! The `hitchin` command line: argument and config-file resolution, the
//! subcommands, and the files they write.
//!
//! Every command resolves its parameters (flag, then config file, then
//! default), writes `run-manifest.txt` echoing them into the output
//! directory, and only then starts computing. A manifest is itself a valid
//! config file, so `--config run-manifest.txt` repeats a run exactly.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};
use hitchin_core::asymptotics::{self, AsymptoticChart, Convergence};
use hitchin_core::elliptic::solve_psi;
use hitchin_core::geometry::{surface_scan, Extremum, ScanConfig, Surface, SurfaceScan};
use hitchin_core::grid::GridSpec;
use hitchin_core::model::factorize;
use hitchin_core::output::{fmt_sig, svg_heatmap, svg_line_plot, write_csv, write_manifest};
use hitchin_core::poly::ComplexPoly;
use hitchin_core::radial::{self, solve_radial};
use hitchin_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const OUT_DIR_ENV: &str = "HITCHIN_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hitchin_core::Error),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    /// 0 success, 1 usage or bad input, 2 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Core(_) => 1,
            CliError::Check(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "hitchin", version, about = "Hitchin equations on the plane: solvers and moduli geometry")]
pub struct Cli {
    /// Flat `key = value` file (# comments); command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print progress and diagnostics to stderr (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Radially symmetric solution for H = z^n (n = 2 allows a deformation B)
    #[command(allow_negative_numbers = true)]
    SolveRadial(RadialArgs),
    /// π⁻¹∫|F| of the n = 2 family over B ∈ [0, B-max]
    #[command(allow_negative_numbers = true)]
    ScanB(ScanArgs),
    /// Full-plane solution for one point of the plus or minus surface
    #[command(name = "solve-2d", allow_negative_numbers = true)]
    Solve2d(FieldArgs),
    /// Conformal factor and curvature over a square of the plus or minus surface
    #[command(allow_negative_numbers = true)]
    Surface(SurfaceArgs),
    /// Checks of the limiting configuration and its asymptotic metric
    #[command(group(ArgGroup::new("check").required(true).args(["check_c", "norm_pk", "upsilon_test"])))]
    Asymptotic(AsymptoticArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SolveRadial(_) => "solve-radial",
            Command::ScanB(_) => "scan-b",
            Command::Solve2d(_) => "solve-2d",
            Command::Surface(_) => "surface",
            Command::Asymptotic(_) => "asymptotic",
        }
    }
}

#[derive(Args, Debug)]
pub struct RadialArgs {
    /// Degree of H = z^n (1 or 2)
    #[arg(long)]
    pub n: Option<u32>,
    /// Deformation parameter, n = 2 only
    #[arg(long = "B")]
    pub b: Option<f64>,
    /// Outer radius
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Grid nodes on [0, R]
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long = "B-max")]
    pub b_max: Option<f64>,
    /// Number of equally spaced B values, including 0 and B-max
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Seed each solve with the previous one (sequential)
    #[arg(long)]
    pub continuation: Option<bool>,
    /// Worker threads when continuation is off
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    /// plus or minus
    #[arg(long)]
    pub sheet: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    /// Real part of the surface coordinate (K on plus, W on minus)
    #[arg(long = "coord-re")]
    pub coord_re: Option<f64>,
    #[arg(long = "coord-im")]
    pub coord_im: Option<f64>,
    #[arg(long = "grid-N")]
    pub grid_n: Option<usize>,
    /// Box half-width; chosen from the zeros of H when omitted
    #[arg(long = "grid-L")]
    pub grid_l: Option<f64>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub sheet: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    /// Half-width of the coordinate square
    #[arg(long)]
    pub radius: Option<f64>,
    /// Samples per side
    #[arg(long)]
    pub steps: Option<usize>,
    /// Displacement for the central differences
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "grid-N")]
    pub grid_n: Option<usize>,
    #[arg(long = "grid-L")]
    pub grid_l: Option<f64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct AsymptoticArgs {
    /// Compare the two evaluations of the constant c
    #[arg(long)]
    pub check_c: bool,
    /// Classify ‖∂Φ/∂p_k‖² for H = z^n − 1 and fit its growth
    #[arg(long, num_args = 2, value_names = ["N", "K"])]
    pub norm_pk: Option<Vec<usize>>,
    /// Monodromy checks over random charts
    #[arg(long)]
    pub upsilon_test: bool,
    /// Cutoff radius for --norm-pk
    #[arg(long = "R-cut")]
    pub r_cut: Option<f64>,
    /// Random samples for --upsilon-test
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<String>,
}

/// Parsed `key = value` file. Keys are matched case-insensitively with `_`
/// and `-` treated alike.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").to_ascii_lowercase().replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", lineno + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config key {key} given twice")));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize_key(key)).map(String::as_str)
    }
}

/// Flag → config → default resolution, recording every value for the manifest.
struct Resolver<'a> {
    file: &'a ConfigFile,
    params: Vec<(String, String)>,
}

impl<'a> Resolver<'a> {
    fn new(file: &'a ConfigFile) -> Self {
        Resolver { file, params: Vec::new() }
    }

    fn file_value<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|s| s.parse::<T>().map_err(|e| CliError::Usage(format!("config key {key} = {s:?}: {e}"))))
            .transpose()
    }

    fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.params.push((key.to_string(), v.to_string()));
        Ok(v)
    }

    /// Like `value` with no default; absent values are recorded as `auto`.
    fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some("auto") => None,
                _ => self.file_value(key)?,
            },
        };
        let shown = v.as_ref().map_or("auto".to_string(), |x| x.to_string());
        self.params.push((key.to_string(), shown));
        Ok(v)
    }

    fn out_dir(&mut self, command: &str, flag: Option<String>) -> CliResult<PathBuf> {
        let default = match std::env::var_os(OUT_DIR_ENV) {
            Some(root) => PathBuf::from(root).join(command),
            None => PathBuf::from("hitchin-out").join(command),
        };
        let dir = self.value("out", flag, default.to_string_lossy().into_owned())?;
        Ok(PathBuf::from(dir))
    }

    /// Rejects config keys this command does not know, then writes the manifest.
    fn finish(self, command: &str, dir: &Path) -> CliResult<()> {
        if let Some(c) = self.file.get("command") {
            if c != command {
                return Err(CliError::Usage(format!("config is for command {c}, not {command}")));
            }
        }
        for key in self.file.values.keys() {
            if key != "command" && !self.params.iter().any(|(k, _)| normalize_key(k) == *key) {
                return Err(CliError::Usage(format!("unknown config key {key} for {command}")));
            }
        }
        fs::create_dir_all(dir)?;
        write_manifest(dir, command, &self.params)?;
        Ok(())
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let name = cli.command.name();
    let res = Resolver::new(&file);
    let ctx = Context { verbose: cli.verbose };
    match cli.command {
        Command::SolveRadial(a) => cmd_solve_radial(a, res, name, &ctx, out, err),
        Command::ScanB(a) => cmd_scan_b(a, res, name, out),
        Command::Solve2d(a) => cmd_solve_2d(a, res, name, out),
        Command::Surface(a) => cmd_surface(a, res, name, &ctx, out, err),
        Command::Asymptotic(a) => cmd_asymptotic(a, res, name, out),
    }
}

struct Context {
    verbose: u8,
}

fn line(out: &mut dyn Write, key: &str, value: impl Display) -> CliResult<()> {
    writeln!(out, "{key} = {value}")?;
    Ok(())
}

fn cmd_solve_radial(
    args: RadialArgs,
    mut res: Resolver,
    name: &str,
    ctx: &Context,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let n = res.value("n", args.n, 1)?;
    let b = res.value("B", args.b, 0.0)?;
    let r = res.value("R", args.r, 20.0)?;
    let points = res.value("points", args.points, 2001)?;
    let dir = res.out_dir(name, args.out)?;
    res.finish(name, &dir)?;

    let prof = solve_radial(n, b, r, points)?;
    if ctx.verbose > 0 {
        writeln!(err, "newton converged in {} iterations", prof.newton_iters)?;
    }
    let flux = radial::flux(&prof)?;
    let dpsi = prof.dpsi_dr();
    let abs_f = prof.abs_f();
    write_csv(
        &dir.join("profile.csv"),
        &["r", "psi", "dpsi_dr", "absF"],
        (0..prof.r.len()).map(|i| vec![prof.r[i], prof.psi[i], dpsi[i], abs_f[i]]),
    )?;
    let curve: Vec<(f64, f64)> = prof.r.iter().copied().zip(abs_f.iter().copied()).collect();
    fs::write(dir.join("profile.svg"), svg_line_plot("|F| against r", "r", "|F|", &curve))?;

    line(out, "flux", fmt_sig(flux))?;
    line(out, "flux_over_pi", fmt_sig(flux / std::f64::consts::PI))?;
    line(out, "newton_iterations", prof.newton_iters)?;
    line(out, "residual", fmt_sig(prof.residual_sup))?;
    if n == 1 {
        let p = radial::painleve_residual(&prof)?;
        line(out, "painleve_residual", fmt_sig(p.residual_sup))?;
        line(out, "painleve_tail_error", fmt_sig(p.tail_error))?;
    }
    line(out, "output", dir.display())?;
    Ok(())
}

fn cmd_scan_b(args: ScanArgs, mut res: Resolver, name: &str, out: &mut dyn Write) -> CliResult<()> {
    let b_max = res.value("B-max", args.b_max, 10.0)?;
    let steps = res.value("steps", args.steps, 21)?;
    let r = res.value("R", args.r, 20.0)?;
    let points = res.value("points", args.points, 2001)?;
    let continuation = res.value("continuation", args.continuation, true)?;
    let jobs = res.value("jobs", args.jobs, 1)?;
    let dir = res.out_dir(name, args.out)?;
    res.finish(name, &dir)?;
    if steps < 2 || b_max.is_nan() || b_max <= 0.0 {
        return Err(CliError::Usage("need steps >= 2 and B-max > 0".into()));
    }
    if jobs == 0 {
        return Err(CliError::Usage("jobs must be at least 1".into()));
    }

    let b_values: Vec<f64> = (0..steps).map(|i| b_max * i as f64 / (steps - 1) as f64).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let scan = pool.install(|| radial::scan_b(&b_values, r, points, continuation))?;
    write_csv(
        &dir.join("scan.csv"),
        &["B", "flux_over_pi"],
        scan.iter().map(|p| vec![p.b, p.flux_over_pi]),
    )?;
    let curve: Vec<(f64, f64)> = scan.iter().map(|p| (p.b, p.flux_over_pi)).collect();
    fs::write(dir.join("scan.svg"), svg_line_plot("flux / pi against B", "B", "flux/pi", &curve))?;

    writeln!(out, "B,flux_over_pi")?;
    for p in &scan {
        writeln!(out, "{},{}", fmt_sig(p.b), fmt_sig(p.flux_over_pi))?;
    }
    let decreasing = scan.windows(2).all(|w| w[1].flux_over_pi < w[0].flux_over_pi);
    line(out, "strictly_decreasing", decreasing)?;
    line(out, "output", dir.display())?;
    Ok(())
}

fn parse_surface(s: &str) -> CliResult<Surface> {
    s.parse::<Surface>().map_err(|e| CliError::Usage(e.to_string()))
}

/// Every `stride`-th node per side, so heatmaps stay a few hundred kB.
fn thin(values: &[f64], n: usize, max_side: usize) -> (Vec<f64>, usize) {
    let stride = n.div_ceil(max_side).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let mut v = Vec::with_capacity(idx.len() * idx.len());
    for &i in &idx {
        for &j in &idx {
            v.push(values[i * n + j]);
        }
    }
    (v, idx.len())
}

fn cmd_solve_2d(args: FieldArgs, mut res: Resolver, name: &str, out: &mut dyn Write) -> CliResult<()> {
    let sheet = res.value("sheet", args.sheet, "plus".to_string())?;
    let a = res.value("a", args.a, 0.0)?;
    let re = res.value("coord-re", args.coord_re, 0.0)?;
    let im = res.value("coord-im", args.coord_im, 0.0)?;
    let n = res.value("grid-N", args.grid_n, GridSpec::DEFAULT_POINTS)?;
    let l = res.optional("grid-L", args.grid_l)?;
    let dir = res.out_dir(name, args.out)?;
    res.finish(name, &dir)?;
    let surface = parse_surface(&sheet)?;

    let (cubic, sh) = surface.cubic_and_sheet(a, C64::new(re, im))?;
    let fac = factorize(&cubic, sh)?;
    let roots = cubic.roots();
    let spec = match l {
        Some(l) => {
            let s = GridSpec::new(l, n)?;
            s.check_margin(&roots)?;
            s
        }
        None => GridSpec::for_roots(&roots, n)?,
    };
    let field = solve_psi(&fac, &spec, None)?;
    let abs_f = field.abs_f();
    write_csv(
        &dir.join("field.csv"),
        &["x", "y", "psi", "absF"],
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
            let k = spec.index(i, j);
            vec![spec.coord(i), spec.coord(j), field.psi[k], abs_f[k]]
        }),
    )?;
    let (map, side) = thin(&abs_f, n, 129);
    let lw = spec.half_width();
    fs::write(dir.join("absF.svg"), svg_heatmap("|F|", &map, side, side, [-lw, lw, -lw, lw]))?;

    let pi = std::f64::consts::PI;
    line(out, "flux", fmt_sig(field.flux()))?;
    line(out, "flux_over_pi", fmt_sig(field.flux() / pi))?;
    line(out, "signed_flux_over_pi", fmt_sig(field.signed_flux() / pi))?;
    line(out, "newton_iterations", field.newton_iters)?;
    line(out, "residual", fmt_sig(field.residual_sup))?;
    line(out, "half_width", fmt_sig(lw))?;
    line(out, "output", dir.display())?;
    Ok(())
}

fn fmt_coord(z: C64) -> String {
    format!("({}, {})", fmt_sig(z.re), fmt_sig(z.im))
}

fn fmt_extrema(list: &[Extremum]) -> String {
    let items: Vec<String> = list
        .iter()
        .map(|e| format!("{{ at = {}, C = {} }}", fmt_coord(e.coordinate), fmt_sig(e.curvature)))
        .collect();
    format!("[{}]", items.join(", "))
}

/// Plain-text summary of a scan: peak and trough locations, extremal
/// curvature values and the worst sample diagnostics.
pub fn summary_block(scan: &SurfaceScan) -> String {
    let valid: Vec<_> = scan.samples.iter().filter(|s| s.is_valid()).collect();
    let max_of = |f: fn(&hitchin_core::geometry::MetricSample) -> f64| {
        valid.iter().map(|s| f(s)).fold(0.0f64, f64::max)
    };
    let mut s = String::from("{\n");
    let mut kv = |k: &str, v: String| s.push_str(&format!("  {k} = {v}\n"));
    kv("surface", scan.config.surface.name().to_string());
    kv("a", fmt_sig(scan.config.a));
    kv("radius", fmt_sig(scan.config.radius));
    kv("steps", scan.config.steps.to_string());
    kv("grid_points", scan.spec.points().to_string());
    kv("grid_half_width", fmt_sig(scan.spec.half_width()));
    kv("samples", scan.samples.len().to_string());
    kv("failures", scan.failures.len().to_string());
    kv("peaks", fmt_extrema(&scan.peaks()));
    kv("troughs", fmt_extrema(&scan.troughs()));
    if let Some((max, min)) = scan.extremal() {
        kv("max_curvature", format!("{} at {}", fmt_sig(max.curvature), fmt_coord(max.coordinate)));
        kv("min_curvature", format!("{} at {}", fmt_sig(min.curvature), fmt_coord(min.coordinate)));
    }
    kv("max_iso_spread", fmt_sig(max_of(|m| m.iso_spread)));
    kv("max_resid_gauge", fmt_sig(max_of(|m| m.resid_gauge)));
    kv("max_resid_holo", fmt_sig(max_of(|m| m.resid_holo)));
    s.push_str("}\n");
    s
}

fn cmd_surface(
    args: SurfaceArgs,
    mut res: Resolver,
    name: &str,
    ctx: &Context,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let sheet = res.value("sheet", args.sheet, "plus".to_string())?;
    let a = res.value("a", args.a, 0.0)?;
    let radius = res.value("radius", args.radius, 3.0)?;
    let steps = res.value("steps", args.steps, 21)?;
    let delta = res.value("delta", args.delta, 0.02)?;
    let points = res.value("grid-N", args.grid_n, GridSpec::DEFAULT_POINTS)?;
    let half_width = res.optional("grid-L", args.grid_l)?;
    let jobs = res.value("jobs", args.jobs, 1)?;
    let dir = res.out_dir(name, args.out)?;
    res.finish(name, &dir)?;
    let surface = parse_surface(&sheet)?;
    if jobs == 0 {
        return Err(CliError::Usage("jobs must be at least 1".into()));
    }

    let config = ScanConfig { a, surface, radius, steps, delta, points, half_width, jobs };
    let scan = surface_scan(&config)?;
    if ctx.verbose > 0 {
        for (z, msg) in &scan.failures {
            writeln!(err, "sample {} failed: {msg}", fmt_coord(*z))?;
        }
    }
    write_csv(
        &dir.join("surface.csv"),
        &["coord_re", "coord_im", "omega", "curvature", "iso_spread", "resid_gauge"],
        scan.samples.iter().map(|s| {
            vec![s.coordinate.re, s.coordinate.im, s.omega, s.curvature, s.iso_spread, s.resid_gauge]
        }),
    )?;
    let summary = summary_block(&scan);
    fs::write(dir.join("summary.txt"), &summary)?;
    let curvature: Vec<f64> = scan.samples.iter().map(|s| s.curvature).collect();
    fs::write(
        dir.join("curvature.svg"),
        svg_heatmap("Gaussian curvature C", &curvature, steps, steps, [-radius, radius, -radius, radius]),
    )?;
    write!(out, "{summary}")?;
    line(out, "output", dir.display())?;
    Ok(())
}

/// Largest deviations found by [`upsilon_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpsilonReport {
    pub cube_is_identity: bool,
    /// Largest |Δη| after three applications, angles compared mod 2π.
    pub max_angle_error: f64,
    /// Largest relative change of the metric under the monodromy.
    pub max_metric_error: f64,
}

impl UpsilonReport {
    pub fn passed(&self) -> bool {
        self.cube_is_identity && self.max_angle_error <= 1e-12 && self.max_metric_error <= 1e-14
    }
}

/// Υ³ = 1 on the integer matrix and on random charts, and invariance of the
/// flat metric when chart and tangent are transformed together.
pub fn upsilon_check(samples: usize, seed: u64) -> UpsilonReport {
    let u = asymptotics::UPSILON;
    let cube = asymptotics::mat_mul(u, asymptotics::mat_mul(u, u));
    let c = asymptotics::constant_c();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut angle, mut metric) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let k = C64::from_polar(rng.gen_range(0.5..20.0), rng.gen_range(-3.0..3.0));
        let chart = AsymptoticChart::new(k, rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let back = asymptotics::upsilon(&asymptotics::upsilon(&asymptotics::upsilon(&chart)));
        angle = angle
            .max(asymptotics::wrap_angle(back.eta1 - chart.eta1).abs())
            .max(asymptotics::wrap_angle(back.eta2 - chart.eta2).abs());
        let dk = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (d1, d2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let g0 = asymptotics::singular_metric_with(c, &chart, dk, d1, d2).expect("K is nonzero");
        let g1 = asymptotics::singular_metric_with(c, &asymptotics::upsilon(&chart), dk, -d2, d1 - d2)
            .expect("K is nonzero");
        metric = metric.max((g1 - g0).abs() / g0);
    }
    UpsilonReport {
        cube_is_identity: cube == [[1, 0], [0, 1]],
        max_angle_error: angle,
        max_metric_error: metric,
    }
}

/// Expected radial growth exponent n − 2k + 1 of the ‖∂Φ/∂p_k‖² integrand.
pub fn expected_growth(n: usize, k: usize) -> f64 {
    n as f64 - 2.0 * k as f64 + 1.0
}

/// z^n − 1, whose zeros are simple and on the unit circle.
pub fn unit_roots_poly(n: usize) -> ComplexPoly {
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[0] = C64::new(1.0, 0.0);
    c[n] = C64::new(-1.0, 0.0);
    ComplexPoly::new(c).expect("leading coefficient is 1")
}

/// Convergence read off a fitted growth exponent p of the radial density.
/// p is an integer up to fitting error; p = −1 is the logarithmic borderline
/// and diverges.
pub fn fitted_convergence(p: f64) -> Convergence {
    if p.round() <= -2.0 {
        Convergence::Converges
    } else {
        Convergence::Diverges
    }
}

fn cmd_asymptotic(args: AsymptoticArgs, mut res: Resolver, name: &str, out: &mut dyn Write) -> CliResult<()> {
    let r_cut = res.value("R-cut", args.r_cut, 200.0)?;
    let samples = res.value("samples", args.samples, 1000)?;
    let seed = res.value("seed", args.seed, 0)?;
    let dir = res.out_dir(name, args.out)?;
    res.finish(name, &dir)?;

    if args.check_c {
        let c1 = asymptotics::constant_c();
        let c2 = asymptotics::constant_c_2d();
        line(out, "c", format!("{c1:.10}"))?;
        line(out, "c_plane_integral", format!("{c2:.10}"))?;
        line(out, "difference", fmt_sig((c1 - c2).abs()))?;
        let ok = (c1 - 2.554).abs() <= 1e-3 && (c1 - c2).abs() <= 1e-4;
        writeln!(out, "{}", if ok { "PASS" } else { "FAIL" })?;
        if !ok {
            return Err(CliError::Check("c disagrees with 2.554 or between routes".into()));
        }
    }
    if let Some(nk) = args.norm_pk {
        let (n, k) = (nk[0], nk[1]);
        if n == 0 {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        let h = unit_roots_poly(n);
        let r = asymptotics::norm_pk(n, k, &h, r_cut)?;
        let m = asymptotics::moduli_count(n)?;
        line(out, "n", n)?;
        line(out, "k", k)?;
        line(out, "classification", r.classification)?;
        line(out, "growth_exponent", format!("{:.4}", r.growth_exponent))?;
        line(out, "expected_exponent", expected_growth(n, k))?;
        line(out, "truncated_norm", fmt_sig(r.value))?;
        line(out, "moduli_real_dimension", m.real_dimension)?;
        let ok = fitted_convergence(r.growth_exponent) == r.classification && (r.growth_exponent - expected_growth(n, k)).abs() <= 0.05;
        writeln!(out, "{}", r.classification)?;
        if !ok {
            return Err(CliError::Check(format!(
                "fitted growth {:.4} contradicts the classification",
                r.growth_exponent
            )));
        }
    }
    if args.upsilon_test {
        let rep = upsilon_check(samples, seed);
        line(out, "upsilon_cubed_is_identity", rep.cube_is_identity)?;
        line(out, "max_angle_error", fmt_sig(rep.max_angle_error))?;
        line(out, "max_metric_error", fmt_sig(rep.max_metric_error))?;
        writeln!(out, "{}", if rep.passed() { "PASS" } else { "FAIL" })?;
        if !rep.passed() {
            return Err(CliError::Check("monodromy checks failed".into()));
        }
    }
    Ok(())
}
