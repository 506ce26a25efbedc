//! `bops`: count, measure and bound basic-operation performance.
//!
//! Exit codes: 0 success, 1 runtime or measurement failure, 2 bad input
//! (unreadable or malformed files, invalid arguments).

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bops_core::kernel::{self, InterpError, InterpOptions, Value};
use bops_core::perf::{self, EstimatorProfile, EventMapping};
use bops_core::report::{sig_si, ReportBundle, ReportOptions};
use bops_core::roofline::{
    self, emit_plot, CeilingChoice, PlotFormat, PlotOptions, RooflineModel, WorkloadPoint,
};
use bops_core::workloads::{self, Mode, RunConfig, WorkloadError};
use bops_core::{
    bops_rate, operation_intensity, peak_bops, peak_flops, BopsTally, MachineSpec, Measurement,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "bops",
    version,
    about = "Basic-operation counting, measurement and roofline bounds"
)]
struct Cli {
    /// Emit structured JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress warnings and informational messages.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count BOPs in a kernel file without running it.
    Count { kernel: PathBuf },
    /// Execute a kernel file and count every evaluated operation.
    Run {
        kernel: PathBuf,
        /// Bind a scalar before execution, e.g. `--input n=100`.
        #[arg(long = "input", value_name = "NAME=VALUE")]
        inputs: Vec<String>,
        /// Stop after this many evaluated BOPs.
        #[arg(long, default_value_t = 1_000_000_000)]
        max_ops: u64,
        /// Print final scalar values.
        #[arg(long)]
        state: bool,
    },
    /// Run a measuring tool and write a measurement record.
    Measure {
        #[command(subcommand)]
        tool: MeasureTool,
    },
    /// Estimate BOPs from a hardware-counter export.
    Estimate {
        #[arg(long)]
        counters: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Source-level BOPs of the same run, to report the deviation.
        #[arg(long)]
        source_level: Option<u64>,
    },
    /// Peak BOPS, ridge point and ceilings of a machine file.
    Peak {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Build a roofline model and write it as SVG and/or CSV.
    Roofline {
        #[arg(long)]
        spec: PathBuf,
        /// Measurement files plotted as workload points.
        #[arg(long, num_args = 1..)]
        points: Vec<PathBuf>,
        /// Comma-separated: `ilp`, `simd`, `prefetch=<bytes/s>`.
        #[arg(long, value_delimiter = ',')]
        ceilings: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        points_per_decade: u32,
    },
    /// Efficiency table for measurements on one machine.
    Report(ReportArgs),
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, required_unless_present = "bundle")]
    spec: Option<PathBuf>,
    /// Measurement files.
    measurements: Vec<PathBuf>,
    /// Re-render a saved structured report instead of building one.
    #[arg(long, conflicts_with_all = ["spec", "measurements"])]
    bundle: Option<PathBuf>,
    /// Compute ceiling for the ceiling-efficiency row (default: ILP ceiling).
    #[arg(long)]
    ceiling_rate: Option<f64>,
    /// Bandwidth ceiling for the ceiling-efficiency row (default: peak).
    #[arg(long)]
    ceiling_bandwidth: Option<f64>,
    /// Fail when a measurement has no byte count instead of printing n/a.
    #[arg(long)]
    require_attained: bool,
    /// Also write the structured report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MeasureTool {
    /// Parallel quicksort + merge over generated 64-bit integers.
    Sort {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Counting)]
        mode: ModeArg,
        /// Write the measurement here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RecordFormat::Kv)]
        format: RecordFormat,
    },
    /// Stream triad bandwidth probe.
    Stream {
        /// Elements per array. Derived from --cache-bytes when omitted.
        #[arg(long, required_unless_present = "cache_bytes")]
        n: Option<u64>,
        #[arg(long, default_value_t = 10)]
        iters: u32,
        #[arg(long, default_value_t = 1)]
        threads: u32,
        /// Last-level cache size; arrays are sized to --cache-factor times it.
        #[arg(long)]
        cache_bytes: Option<u64>,
        #[arg(long, default_value_t = workloads::DEFAULT_CACHE_FACTOR)]
        cache_factor: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RecordFormat::Kv)]
        format: RecordFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Counting,
    Timing,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecordFormat {
    Kv,
    Json,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn input<E: fmt::Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn runtime<E: fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(input(path))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<MachineSpec, CliError> {
    MachineSpec::from_toml_str(&read(path)?).map_err(input(path))
}

fn load_measurement(path: &Path) -> Result<Measurement, CliError> {
    Measurement::parse(&read(path)?).map_err(input(path))
}

struct Ctx {
    json: bool,
    quiet: bool,
}

impl Ctx {
    fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn emit(&self, value: serde_json::Value, text: impl FnOnce() -> String) {
        if self.json {
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("json value")
            );
        } else {
            print!("{}", text());
        }
    }
}

fn tally_text(t: &BopsTally) -> Result<String, CliError> {
    Ok(format!(
        "arithmetic={}\ncomparing={}\naddressing={}\ntotal={}\n",
        t.arithmetic,
        t.comparing,
        t.addressing,
        t.total().map_err(runtime)?
    ))
}

fn tally_json(t: &BopsTally) -> Result<serde_json::Value, CliError> {
    Ok(json!({
        "arithmetic": t.arithmetic,
        "comparing": t.comparing,
        "addressing": t.addressing,
        "total": t.total().map_err(runtime)?,
    }))
}

fn parse_kernel(path: &Path) -> Result<kernel::KernelProgram, CliError> {
    let src = read(path)?;
    kernel::parse(&src).map_err(|e| CliError::Input(format!("{}:{e}", path.display())))
}

fn cmd_count(ctx: &Ctx, path: &Path) -> Result<(), CliError> {
    let program = parse_kernel(path)?;
    let c = kernel::count_static(&program).map_err(runtime)?;
    let mut v = tally_json(&c.tally)?;
    v["exact"] = json!(c.exact);
    v["file"] = json!(path.display().to_string());
    let text = format!("{}exact={}\n", tally_text(&c.tally)?, c.exact);
    ctx.emit(v, || text);
    if !c.exact {
        ctx.warn(
            "count is an estimate: some trip counts or branches depend on inputs or array contents",
        );
    }
    Ok(())
}

fn parse_input(s: &str) -> Result<(String, Value), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("--input expects NAME=VALUE, got {s:?}")))?;
    let value = if let Ok(i) = v.parse::<i64>() {
        Value::Int(i)
    } else if let Ok(f) = v.parse::<f64>() {
        Value::Float(f)
    } else {
        return Err(CliError::Input(format!(
            "--input {k}: {v:?} is not a number"
        )));
    };
    Ok((k.to_string(), value))
}

fn cmd_run(
    ctx: &Ctx,
    path: &Path,
    inputs: &[String],
    max_ops: u64,
    state: bool,
) -> Result<(), CliError> {
    let program = parse_kernel(path)?;
    let inputs = inputs
        .iter()
        .map(|s| parse_input(s))
        .collect::<Result<HashMap<_, _>, _>>()?;
    let opts = InterpOptions {
        max_ops,
        ..InterpOptions::default()
    };
    let exec = kernel::interpret_with(&program, &inputs, opts).map_err(|e| match e {
        InterpError::UnknownInput(_) | InterpError::InputType(_) => CliError::Input(e.to_string()),
        _ => CliError::Runtime(format!("{}: {e}", path.display())),
    })?;
    let mut v = tally_json(&exec.tally)?;
    v["file"] = json!(path.display().to_string());
    if state {
        v["state"] = serde_json::to_value(&exec.state).expect("state serializes");
    }
    ctx.emit(v, || {
        let mut s = tally_text(&exec.tally).unwrap_or_default();
        if state {
            for (k, val) in &exec.state.scalars {
                s.push_str(&format!("{k}={val}\n"));
            }
        }
        s
    });
    Ok(())
}

fn workload_error(e: WorkloadError) -> CliError {
    match e {
        WorkloadError::Config(_) => CliError::Input(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

fn record_text(m: &Measurement, format: RecordFormat) -> String {
    match format {
        RecordFormat::Kv => m.to_kv_string(),
        RecordFormat::Json => m.to_json_string(),
    }
}

fn finish_measurement(
    ctx: &Ctx,
    m: &Measurement,
    out: Option<&Path>,
    format: RecordFormat,
    extra: serde_json::Value,
) -> Result<(), CliError> {
    if let Some(p) = out {
        write(p, &record_text(m, format))?;
    }
    let mut v: serde_json::Value = serde_json::from_str(&m.to_json_string()).expect("own json");
    if let serde_json::Value::Object(extra) = extra {
        for (k, x) in extra {
            v[k] = x;
        }
    }
    ctx.emit(v, || {
        let mut s = record_text(m, RecordFormat::Kv);
        if let Ok(rate) = bops_rate(m) {
            if m.tally_source != bops_core::TallySource::Absent {
                s.push_str(&format!("# rate: {} BOPS\n", sig_si(rate, 3)));
            }
        }
        s
    });
    Ok(())
}

fn cmd_measure(ctx: &Ctx, tool: &MeasureTool) -> Result<(), CliError> {
    match *tool {
        MeasureTool::Sort {
            n,
            seed,
            threads,
            mode,
            ref out,
            format,
        } => {
            let counting = workloads::run_sort(&RunConfig::sort(n, seed, threads, Mode::Counting))
                .map_err(workload_error)?;
            let m = match mode {
                ModeArg::Counting => counting,
                ModeArg::Timing => {
                    workloads::run_sort(&RunConfig::sort(n, seed, threads, Mode::Timing))
                        .map_err(workload_error)?
                        .with_counts_from(&counting)
                }
            };
            finish_measurement(ctx, &m, out.as_deref(), format, json!({}))
        }
        MeasureTool::Stream {
            n,
            iters,
            threads,
            cache_bytes,
            cache_factor,
            ref out,
            format,
        } => {
            let n = match (n, cache_bytes) {
                (Some(n), _) => n,
                (None, Some(c)) => workloads::elements_for_cache(c, cache_factor),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let r = workloads::run_stream_triad(&RunConfig::stream(n, iters, threads))
                .map_err(workload_error)?;
            if !ctx.json && !ctx.quiet {
                eprintln!(
                    "stream triad: n={n} best pass {:.6} s, bandwidth {:e} bytes/s",
                    r.best_pass_s, r.bandwidth_bytes_per_s
                );
            }
            finish_measurement(
                ctx,
                &r.measurement,
                out.as_deref(),
                format,
                json!({ "bandwidth_bytes_per_s": r.bandwidth_bytes_per_s }),
            )
        }
    }
}

fn cmd_estimate(
    ctx: &Ctx,
    counters: &Path,
    mapping: &Path,
    profile: Option<&Path>,
    source_level: Option<u64>,
) -> Result<(), CliError> {
    let map = EventMapping::parse(&read(mapping)?).map_err(input(mapping))?;
    let parsed = perf::parse_counter_export(&read(counters)?, &map).map_err(input(counters))?;
    for w in &parsed.warnings {
        ctx.warn(w);
    }
    let prof = match profile {
        Some(p) => EstimatorProfile::from_toml_str(&read(p)?).map_err(input(p))?,
        None => EstimatorProfile::default(),
    };
    let est = perf::estimate_bops(&parsed.dump, &prof).map_err(input(counters))?;
    let dev = source_level
        .map(|s| perf::deviation(est.bops, s))
        .transpose()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut v = serde_json::to_value(est).expect("estimate serializes");
    v["deviation"] = json!(dev);
    v["warnings"] = json!(parsed.warnings);
    ctx.emit(v, || {
        let mut s = format!(
            "bops={} (approximate)\ninteger_all={}\nfp_all={}\n",
            est.bops, est.integer_all, est.fp_all
        );
        if let Some(d) = dev {
            s.push_str(&format!("deviation={d}\n"));
        }
        s
    });
    Ok(())
}

fn cmd_peak(ctx: &Ctx, spec_path: &Path) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let peak = peak_bops(&spec);
    let flops = peak_flops(&spec);
    let ridge = roofline::ridge_oi(&spec);
    let ilp = roofline::ilp_ceiling(&spec);
    let simd = roofline::compute_ceiling(&spec);
    ctx.emit(
        json!({
            "machine": spec.name,
            "peak_bops": peak,
            "peak_flops": flops,
            "ridge_oi": ridge,
            "ilp_ceiling": ilp,
            "simd_ceiling": simd,
        }),
        || {
            let mut s = format!("machine={}\npeak_bops={peak:e}\n", spec.name);
            if let Some(f) = flops {
                s.push_str(&format!("peak_flops={f:e}\n"));
            }
            s.push_str(&format!(
                "ridge_oi={ridge}\nilp_ceiling={ilp:e}\nsimd_ceiling={simd:e}\n"
            ));
            s
        },
    );
    Ok(())
}

fn parse_ceiling(s: &str) -> Result<CeilingChoice, CliError> {
    let s = s.trim();
    match s {
        "ilp" => Ok(CeilingChoice::Ilp),
        "simd" => Ok(CeilingChoice::Simd),
        _ => match s.split_once('=') {
            Some(("prefetch", bw)) => bw
                .parse::<f64>()
                .ok()
                .filter(|b| b.is_finite() && *b > 0.0)
                .map(CeilingChoice::Prefetch)
                .ok_or_else(|| CliError::Input(format!("bad prefetch bandwidth {bw:?}"))),
            _ if s == "prefetch" => Err(CliError::Input(
                "prefetch ceiling needs the no-prefetch bandwidth: prefetch=<bytes/s>".into(),
            )),
            _ => Err(CliError::Input(format!(
                "unknown ceiling {s:?}; expected ilp, simd or prefetch=<bytes/s>"
            ))),
        },
    }
}

fn measurement_point(path: &Path) -> Result<WorkloadPoint, CliError> {
    let m = load_measurement(path)?;
    let oi = operation_intensity(&m).map_err(input(path))?;
    let rate = bops_rate(&m).map_err(input(path))?;
    if m.tally_source == bops_core::TallySource::Absent {
        return Err(CliError::Input(format!(
            "{}: measurement has no tally",
            path.display()
        )));
    }
    Ok(WorkloadPoint {
        name: m.workload,
        oi,
        rate,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_roofline(
    ctx: &Ctx,
    spec_path: &Path,
    points: &[PathBuf],
    ceilings: &[String],
    out: Option<&Path>,
    csv: Option<&Path>,
    points_per_decade: u32,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let choices = ceilings
        .iter()
        .filter(|c| !c.trim().is_empty())
        .map(|c| parse_ceiling(c))
        .collect::<Result<Vec<_>, _>>()?;
    let ceilings = choices.iter().map(|c| c.build(&spec)).collect();
    let points = points
        .iter()
        .map(|p| measurement_point(p))
        .collect::<Result<Vec<_>, _>>()?;
    let model =
        RooflineModel::new(spec, ceilings, points).map_err(|e| CliError::Input(e.to_string()))?;
    let opts = PlotOptions {
        points_per_decade,
        ..PlotOptions::default()
    };
    if let Some(p) = out {
        write(
            p,
            &emit_plot(&model, PlotFormat::Svg, &opts)
                .map_err(|e| CliError::Input(e.to_string()))?,
        )?;
    }
    if let Some(p) = csv {
        write(
            p,
            &emit_plot(&model, PlotFormat::Csv, &opts)
                .map_err(|e| CliError::Input(e.to_string()))?,
        )?;
    }
    let checks = model.check_points();
    for c in checks.iter().filter(|c| c.above_roof) {
        ctx.warn(&format!(
            "`{}` is above the roof at its operation intensity",
            c.name
        ));
    }
    ctx.emit(
        json!({
            "machine": model.spec.name,
            "peak_bops": model.peak(),
            "ridge_oi": model.ridge_oi(),
            "ceilings": model.ceilings,
            "points": model.points,
            "checks": checks,
        }),
        || {
            let mut s = format!(
                "machine={}\npeak_bops={:e}\nridge_oi={}\n",
                model.spec.name,
                model.peak(),
                model.ridge_oi()
            );
            for c in &model.ceilings {
                match c.kind {
                    roofline::CeilingKind::Compute { level } => {
                        s.push_str(&format!("ceiling {}: compute {level:e}\n", c.name))
                    }
                    roofline::CeilingKind::Memory { bandwidth } => {
                        s.push_str(&format!("ceiling {}: bandwidth {bandwidth:e}\n", c.name))
                    }
                }
            }
            for (p, c) in model.points.iter().zip(&checks) {
                s.push_str(&format!(
                    "point {}: oi={} rate={:e} attained={:e} {:?}{}\n",
                    p.name,
                    p.oi,
                    p.rate,
                    c.attained.rate,
                    c.attained.binding,
                    if c.above_roof { " ABOVE ROOF" } else { "" }
                ));
            }
            s
        },
    );
    Ok(())
}

fn cmd_report(ctx: &Ctx, a: &ReportArgs) -> Result<(), CliError> {
    let bundle = if let Some(b) = &a.bundle {
        ReportBundle::from_json_str(&read(b)?).map_err(input(b))?
    } else {
        let spec_path = a.spec.as_deref().expect("clap enforces --spec");
        let spec = load_spec(spec_path)?;
        if a.measurements.is_empty() {
            return Err(CliError::Input(
                "report needs at least one measurement file".into(),
            ));
        }
        let ms = a
            .measurements
            .iter()
            .map(|p| load_measurement(p))
            .collect::<Result<Vec<_>, _>>()?;
        let opts = ReportOptions {
            ceiling_rate: a.ceiling_rate,
            ceiling_bandwidth: a.ceiling_bandwidth,
            require_attained: a.require_attained,
        };
        ReportBundle::build(spec, ms, opts).map_err(|e| CliError::Input(e.to_string()))?
    };
    let json_text = bundle.to_json_string();
    if let Some(p) = &a.out {
        write(p, &json_text)?;
    }
    if ctx.json {
        print!("{json_text}");
    } else {
        print!("{}", bundle.render_text());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = Ctx {
        json: cli.json,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Count { kernel } => cmd_count(&ctx, kernel),
        Command::Run {
            kernel,
            inputs,
            max_ops,
            state,
        } => cmd_run(&ctx, kernel, inputs, *max_ops, *state),
        Command::Measure { tool } => cmd_measure(&ctx, tool),
        Command::Estimate {
            counters,
            mapping,
            profile,
            source_level,
        } => cmd_estimate(&ctx, counters, mapping, profile.as_deref(), *source_level),
        Command::Peak { spec } => cmd_peak(&ctx, spec),
        Command::Roofline {
            spec,
            points,
            ceilings,
            out,
            csv,
            points_per_decade,
        } => cmd_roofline(
            &ctx,
            spec,
            points,
            ceilings,
            out.as_deref(),
            csv.as_deref(),
            *points_per_decade,
        ),
        Command::Report(a) => cmd_report(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Warn
        })
        .format_target(false)
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
