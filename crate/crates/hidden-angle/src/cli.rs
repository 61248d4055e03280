//! Argument definitions and subcommand handlers.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hidden_angle_core::event_stats::virtual_velocity_pipeline;
use hidden_angle_core::hidden_angle::{box_cos_closed, ho_cos_closed};
use hidden_angle_core::moments::{variance_vectors, variance_vectors_quad};
use hidden_angle_core::verify::{self, RelationConstants, VerifyConfig};
use hidden_angle_core::{
    AxisState, Calibration, Error as CoreError, SeparableState3D, UncertaintyReport,
};

use crate::config::{OutputFormat, RuleArg, RunConfig, Settings, HBAR_ENV};
use crate::error::{AppError, Result};
use crate::events::{load_events, EventFormat};
use crate::report::{render, render_rows, StateReportJson, SweepRow, VelocityJson, VerifyJson};
use crate::table::load_axis_state;

#[derive(Debug, Parser)]
#[command(
    name = "hidden-angle",
    version,
    about = "Hidden-angle uncertainty relations and group-velocity bounds"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Reduced Planck constant.
    #[arg(long, global = true, env = HBAR_ENV)]
    pub hbar: Option<f64>,
    /// Optional `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Quadrature rule; defaults to the natural rule of each family.
    #[arg(long, global = true, value_enum)]
    pub rule: Option<RuleArg>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplier taking input energies to natural units.
    #[arg(long = "energy-scale", global = true)]
    pub energy_scale: Option<f64>,
    /// Multiplier taking input momenta to natural units.
    #[arg(long = "momentum-scale", global = true)]
    pub momentum_scale: Option<f64>,
}

impl GlobalArgs {
    fn settings(&self) -> Settings {
        Settings {
            hbar: self.hbar,
            delta: None,
            points: self.points,
            rel_tol: self.rel_tol,
            rule: self.rule,
            seed: self.seed,
            format: self.format,
            energy_scale: self.energy_scale,
            momentum_scale: self.momentum_scale,
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => Settings::load_file(path)?,
            None => Settings::default(),
        };
        RunConfig::from_settings(&self.settings().over(file))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Ho,
    Well,
    Gauss,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFamily {
    Ho,
    Well,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Variance vectors, hidden-angle cosines and relation checks for one separable state.
    StateReport(StateReportArgs),
    /// Closed-form versus computed saturation cosine for isotropic states n = 0..N (well: 1..N).
    Sweep(SweepArgs),
    /// Group-velocity estimate and bound from an event file.
    Velocity(VelocityArgs),
    /// Randomized property checks of the relation chain.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct StateReportArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Quantum numbers, one value or NX,NY,NZ.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub omega: Vec<f64>,
    #[arg(long = "L", value_delimiter = ',')]
    pub width: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    /// Tabulated wavefunction files (`x psi` per line), one or one per axis.
    #[arg(long, value_delimiter = ',')]
    pub file: Vec<PathBuf>,
    /// Compute every variance by quadrature, skipping closed forms.
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: SweepFamily,
    #[arg(long = "n-max")]
    pub n_max: u32,
    /// Take the numeric column from quadrature instead of closed-form variances.
    #[arg(long = "compare-quadrature")]
    pub compare_quadrature: bool,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long = "L", default_value_t = 1.0)]
    pub width: f64,
}

#[derive(Debug, Args)]
pub struct VelocityArgs {
    #[arg(long)]
    pub events: PathBuf,
    /// Overrides detection by file extension.
    #[arg(long = "events-format", value_enum)]
    pub events_format: Option<EventFormat>,
    /// On-shell reference sample used to fix A.
    #[arg(long)]
    pub calibrate: Option<PathBuf>,
    #[arg(long = "u-ref")]
    pub u_ref: Option<f64>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "cos-u")]
    pub cos_u: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    /// Per-axis relation constant in units of ħ²; only for exercising the checker.
    #[arg(long = "per-axis-constant", hide = true)]
    pub per_axis_constant: Option<f64>,
}

/// What a handler produced: text for stdout or stderr, and the exit code.
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }
}

fn per_axis<T: Copy>(values: &[T], name: &str) -> Result<[T; 3]> {
    match *values {
        [v] => Ok([v; 3]),
        [x, y, z] => Ok([x, y, z]),
        _ => Err(AppError::invalid(format!(
            "--{name} takes one value or three comma-separated values"
        ))),
    }
}

fn per_axis_or(values: &[f64], name: &str, default: f64) -> Result<[f64; 3]> {
    if values.is_empty() {
        Ok([default; 3])
    } else {
        per_axis(values, name)
    }
}

fn reject_unused(present: bool, flag: &str, family: &str) -> Result<()> {
    if present {
        return Err(AppError::invalid(format!(
            "--{flag} does not apply to family {family}"
        )));
    }
    Ok(())
}

fn build_state(args: &StateReportArgs, cfg: &RunConfig) -> Result<SeparableState3D> {
    let h = cfg.hbar;
    let axes: [AxisState; 3] = match args.family {
        FamilyArg::Ho => {
            reject_unused(!args.width.is_empty(), "L", "ho")?;
            reject_unused(!args.sigma.is_empty(), "sigma", "ho")?;
            reject_unused(!args.file.is_empty(), "file", "ho")?;
            let n = per_axis(&args.n, "n")?;
            let m = per_axis_or(&args.m, "m", 1.0)?;
            let w = per_axis_or(&args.omega, "omega", 1.0)?;
            collect_axes(
                [0, 1, 2]
                    .map(|i| AxisState::oscillator(n[i], m[i], w[i], h).map_err(AppError::from)),
            )?
        }
        FamilyArg::Well => {
            reject_unused(!args.m.is_empty(), "m", "well")?;
            reject_unused(!args.omega.is_empty(), "omega", "well")?;
            reject_unused(!args.sigma.is_empty(), "sigma", "well")?;
            reject_unused(!args.file.is_empty(), "file", "well")?;
            let n = per_axis(&args.n, "n")?;
            let l = per_axis_or(&args.width, "L", 1.0)?;
            collect_axes([0, 1, 2].map(|i| AxisState::well(n[i], l[i], h).map_err(AppError::from)))?
        }
        FamilyArg::Gauss => {
            reject_unused(!args.n.is_empty(), "n", "gauss")?;
            reject_unused(!args.m.is_empty(), "m", "gauss")?;
            reject_unused(!args.omega.is_empty(), "omega", "gauss")?;
            reject_unused(!args.width.is_empty(), "L", "gauss")?;
            reject_unused(!args.file.is_empty(), "file", "gauss")?;
            let s = per_axis_or(&args.sigma, "sigma", 1.0)?;
            collect_axes(s.map(|s| AxisState::gaussian(s, h).map_err(AppError::from)))?
        }
        FamilyArg::Table => {
            reject_unused(!args.n.is_empty(), "n", "table")?;
            reject_unused(!args.m.is_empty(), "m", "table")?;
            reject_unused(!args.omega.is_empty(), "omega", "table")?;
            reject_unused(!args.width.is_empty(), "L", "table")?;
            reject_unused(!args.sigma.is_empty(), "sigma", "table")?;
            if args.file.is_empty() {
                return Err(AppError::invalid("--family table requires --file"));
            }
            let files = per_axis(&args.file.iter().collect::<Vec<_>>(), "file")?;
            collect_axes(files.map(|p| load_axis_state(p, h)))?
        }
    };
    let [x, y, z] = axes;
    Ok(SeparableState3D::new(x, y, z)?)
}

fn collect_axes(results: [Result<AxisState>; 3]) -> Result<[AxisState; 3]> {
    let mut out = Vec::with_capacity(3);
    for (axis, r) in hidden_angle_core::Axis::ALL.into_iter().zip(results) {
        match r {
            Ok(s) => out.push(s),
            Err(AppError::Core(e)) => return Err(AppError::Core(e.on_axis(axis))),
            Err(e) => return Err(e),
        }
    }
    Ok(out.try_into().expect("three axes"))
}

pub fn state_report(args: &StateReportArgs, cfg: &RunConfig) -> Result<Outcome> {
    let state = build_state(args, cfg)?;
    let (r2, p2) = if args.numeric {
        variance_vectors_quad(&state, &cfg.quadrature)?
    } else {
        variance_vectors(&state, &cfg.quadrature)?
    };
    let report = UncertaintyReport::from_vectors(r2, p2, cfg.hbar)?;
    let closed = !args.numeric
        && state
            .axes()
            .iter()
            .all(|a| a.closed_form_variances().is_ok());
    let route = if closed { "closed_form" } else { "quadrature" };
    let quantum_numbers = state.axes().each_ref().map(AxisState::quantum_number);
    let json = StateReportJson::new(
        &report,
        state.axis(hidden_angle_core::Axis::X).family().name(),
        quantum_numbers,
        route,
    );
    let text = render(&json, cfg.format_or(OutputFormat::Json));
    Ok(Outcome {
        code: if report.aggregated_holds { 0 } else { 2 },
        stdout: text,
        stderr: String::new(),
    })
}

pub fn sweep(args: &SweepArgs, cfg: &RunConfig) -> Result<Outcome> {
    let first = match args.family {
        SweepFamily::Ho => 0,
        SweepFamily::Well => 1,
    };
    if args.n_max < first {
        return Err(AppError::invalid(format!(
            "--n-max must be at least {first} for this family"
        )));
    }
    let mut rows = Vec::new();
    for n in first..=args.n_max {
        let (axis, closed) = match args.family {
            SweepFamily::Ho => (
                AxisState::oscillator(n, args.m, args.omega, cfg.hbar)?,
                ho_cos_closed(n),
            ),
            SweepFamily::Well => (
                AxisState::well(n, args.width, cfg.hbar)?,
                box_cos_closed(n)?,
            ),
        };
        let state = SeparableState3D::isotropic(axis);
        let (r2, p2) = if args.compare_quadrature {
            variance_vectors_quad(&state, &cfg.quadrature)?
        } else {
            variance_vectors(&state, &cfg.quadrature)?
        };
        let numeric = UncertaintyReport::from_vectors(r2, p2, cfg.hbar)?.cos_saturation;
        rows.push(SweepRow {
            n,
            cos_closed: closed,
            cos_saturation_numeric: numeric,
            abs_diff: (numeric - closed).abs(),
        });
    }
    Ok(Outcome::ok(render_rows(
        &rows,
        &SweepRow::COLUMNS,
        cfg.format_or(OutputFormat::Csv),
    )))
}

pub fn velocity(args: &VelocityArgs, cfg: &RunConfig) -> Result<Outcome> {
    let direct = args.a.is_some();
    let parameters = args.delta.is_some() || args.cos_u.is_some();
    let reference = args.calibrate.is_some() || args.u_ref.is_some();
    if [direct, parameters, reference]
        .iter()
        .filter(|&&g| g)
        .count()
        != 1
    {
        return Err(CoreError::ConflictingCalibration.into());
    }
    let parameters = if parameters {
        let cos_u = args
            .cos_u
            .ok_or_else(|| AppError::invalid("--delta requires --cos-u"))?;
        Some((args.delta.unwrap_or(cfg.delta), cos_u))
    } else {
        None
    };
    let reference_records = match (&args.calibrate, args.u_ref) {
        (Some(path), Some(u)) => Some((load_events(path, None, cfg.units)?, u)),
        (Some(_), None) => return Err(AppError::invalid("--calibrate requires --u-ref")),
        (None, Some(_)) => return Err(AppError::invalid("--u-ref requires --calibrate")),
        (None, None) => None,
    };
    let records = load_events(&args.events, args.events_format, cfg.units)?;
    let calibration = Calibration::from_options(
        args.a,
        parameters,
        reference_records.as_ref().map(|(r, u)| (r.as_slice(), *u)),
    )?;
    let report = virtual_velocity_pipeline(&records, calibration)?;
    Ok(Outcome::ok(render(
        &VelocityJson::from(&report),
        cfg.format_or(OutputFormat::Json),
    )))
}

pub fn verify(args: &VerifyArgs, cfg: &RunConfig) -> Result<Outcome> {
    let mut vc = VerifyConfig::new(args.cases, cfg.seed);
    vc.hbar = cfg.hbar;
    vc.quadrature = cfg.quadrature;
    if let Some(c) = args.per_axis_constant {
        vc.constants = RelationConstants { per_axis_hur: c };
    }
    let summary = verify::run(&vc)?;
    let json = VerifyJson::from(&summary);
    let text = match cfg.format_or(OutputFormat::Json) {
        OutputFormat::Human => {
            let head = format!(
                "seed {}, {} cases per property, {}\n",
                json.seed,
                json.cases,
                if json.passed { "all passed" } else { "FAILED" }
            );
            head + &render_rows(&json.properties, &[], OutputFormat::Human)
        }
        format => render(&json, format),
    };
    match summary.first_failure() {
        None => Ok(Outcome::ok(text)),
        Some(failed) => {
            let mut stderr = text;
            stderr += &format!(
                "property failed: {} ({} of {} cases)\nfirst failing case: {}\nreproduce with: verify --cases {} --seed {}\n",
                failed.name,
                failed.failures,
                failed.cases,
                failed.first_failure.as_deref().unwrap_or("<none recorded>"),
                summary.cases,
                summary.seed,
            );
            Ok(Outcome {
                code: 2,
                stdout: String::new(),
                stderr,
            })
        }
    }
}

/// Exit status for an error: 3 for conflicting calibration groups, 1 otherwise.
pub fn exit_code(err: &AppError) -> u8 {
    match err {
        AppError::Core(e) if matches!(e.root(), CoreError::ConflictingCalibration) => 3,
        _ => 1,
    }
}

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    let cfg = cli.global.resolve()?;
    match &cli.command {
        Command::StateReport(a) => state_report(a, &cfg),
        Command::Sweep(a) => sweep(a, &cfg),
        Command::Velocity(a) => velocity(a, &cfg),
        Command::Verify(a) => verify(a, &cfg),
    }
}

/// Parses `args` (program name first), runs the subcommand and writes its output.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                1
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            let _ = stderr.write_all(out.stderr.as_bytes());
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
