use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use spingap::harness::{self, FitColumn, OutputFormat, Settings, SweepConfig};
use spingap::{Anisotropy, Error, FieldValue, Method, PrecisionPolicy, Result, SpinValue};

#[derive(Parser)]
#[command(
    name = "spingap",
    version,
    about = "Tunnelling splittings of S_z-anisotropic spins in a transverse field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one gap per (level, method).
    Gap(Common),
    /// Sweep the field over a grid and tabulate every method.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// All methods side by side at one field.
    Compare(Common),
    /// Fit log(value) against log(B) over a sweep or an existing CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// Sweep CSV to read instead of computing one.
        #[arg(long)]
        input: Option<PathBuf>,
        /// `gap:<method>` or `residual:<method>` (|method/exact - 1|).
        #[arg(long)]
        column: Option<String>,
    },
    /// Full spectrum with parity labels and doublet pairing.
    Spectrum(Common),
}

#[derive(Args, Default)]
struct Common {
    /// Spin quantum number: `3`, `5/2` or `2.5`.
    #[arg(long)]
    spin: Option<String>,
    /// Transverse field as a decimal.
    #[arg(long, allow_hyphen_values = true)]
    field: Option<String>,
    /// Doublet index, comma list, or `all`.
    #[arg(long)]
    level: Option<String>,
    /// exact, leading, corrected, bw, a comma list, or `all`.
    #[arg(long)]
    method: Option<String>,
    /// easy-axis or easy-plane.
    #[arg(long)]
    anisotropy: Option<String>,
    /// `auto` or `digits:N`.
    #[arg(long)]
    precision: Option<String>,
    /// Write primary output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Default)]
struct Grid {
    #[arg(long)]
    field_min: Option<String>,
    #[arg(long)]
    field_max: Option<String>,
    #[arg(long)]
    points: Option<String>,
    /// log or linear.
    #[arg(long)]
    spacing: Option<String>,
}

fn settings(common: &Common, grid: Option<&Grid>) -> Result<Settings> {
    let mut settings = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            harness::parse_settings(&text)?
        }
        None => Settings::new(),
    };
    let mut flags = vec![
        ("spin", &common.spin),
        ("field", &common.field),
        ("level", &common.level),
        ("method", &common.method),
        ("anisotropy", &common.anisotropy),
        ("precision", &common.precision),
        ("format", &common.format),
    ];
    if let Some(grid) = grid {
        flags.extend([
            ("field-min", &grid.field_min),
            ("field-max", &grid.field_max),
            ("points", &grid.points),
            ("spacing", &grid.spacing),
        ]);
    }
    for (key, value) in flags {
        if let Some(value) = value {
            settings.insert(key.to_string(), value.clone());
        }
    }
    Ok(settings)
}

fn out_path(common: &Common, settings: &Settings) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| settings.get("out").map(PathBuf::from))
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn render_rows(rows: &[harness::ComparisonRow], config: &SweepConfig) -> Result<String> {
    match config.format {
        OutputFormat::Csv => harness::render_csv(rows),
        OutputFormat::Json => Ok(harness::render_json(rows, config)),
    }
}

fn with_default(mut settings: Settings, key: &str, value: &str) -> Settings {
    settings
        .entry(key.to_string())
        .or_insert_with(|| value.to_string());
    settings
}

fn run_gap(common: &Common) -> Result<()> {
    let settings = settings(common, None)?;
    let structured = settings.contains_key("format");
    let settings = with_default(settings, "method", "exact");
    let config = SweepConfig::compare_from_settings(&settings)?;
    let field = &config.field_min;
    let mut rows = Vec::new();
    for level in config.levels.resolve(config.spin)? {
        let start = Instant::now();
        let mut outcomes = Vec::new();
        for &method in &config.methods {
            let result = harness::compute_gap(
                config.spin,
                level,
                field,
                method,
                config.anisotropy,
                config.policy,
            )?;
            let mut note = format!(
                "# n={} method={} digits={}",
                level.n(),
                method,
                result.digits_used
            );
            for (key, value) in &result.diagnostics {
                note.push_str(&format!(" {key}={value}"));
            }
            eprintln!("{note}");
            outcomes.push((method, Ok(result)));
        }
        rows.push(harness::assemble_row(
            &config,
            level,
            field,
            &outcomes,
            start.elapsed().as_millis() as u64,
        ));
    }
    let text = if structured {
        render_rows(&rows, &config)?
    } else if rows.len() == 1 && config.methods.len() == 1 {
        format!("{}\n", rows[0].gap(config.methods[0]).unwrap_or_default())
    } else {
        let mut text = String::new();
        for row in &rows {
            for (method, gap) in &row.gaps {
                text.push_str(&format!(
                    "{} {} {}\n",
                    row.n,
                    method,
                    gap.as_deref().unwrap_or("")
                ));
            }
        }
        text
    };
    emit(&text, out_path(common, &settings))
}

fn run_sweep(common: &Common, grid: &Grid) -> Result<()> {
    let settings = settings(common, Some(grid))?;
    let config = SweepConfig::from_settings(&settings)?;
    let rows = harness::run_sweep(&config)?;
    emit(&render_rows(&rows, &config)?, out_path(common, &settings))
}

fn run_compare(common: &Common) -> Result<()> {
    let settings = settings(common, None)?;
    let config = SweepConfig::compare_from_settings(&settings)?;
    let rows = harness::run_compare(&config)?;
    emit(&render_rows(&rows, &config)?, out_path(common, &settings))
}

fn parse_column(text: &str) -> Result<FitColumn> {
    let bad = || {
        Error::InvalidConfig(format!(
            "column `{text}` is not gap:<method> or residual:<method>"
        ))
    };
    let (kind, method) = text.split_once(':').ok_or_else(bad)?;
    let method: Method = method.parse()?;
    match kind {
        "gap" => Ok(FitColumn::Gap(method)),
        "residual" if method != Method::Exact => Ok(FitColumn::Residual(method)),
        _ => Err(bad()),
    }
}

fn run_fit(
    common: &Common,
    grid: &Grid,
    input: Option<&PathBuf>,
    column: Option<&str>,
) -> Result<()> {
    let settings = settings(common, Some(grid))?;
    let column = parse_column(
        column
            .or(settings.get("column").map(String::as_str))
            .unwrap_or("gap:exact"),
    )?;
    let mut rows = match input
        .cloned()
        .or_else(|| settings.get("input").map(PathBuf::from))
    {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            harness::parse_csv(&text)?
        }
        None => {
            let mut settings = settings.clone();
            let needed: &[Method] = match column {
                FitColumn::Gap(m) => &[m],
                FitColumn::Residual(m) => &[Method::Exact, m],
            };
            let names: Vec<&str> = needed.iter().map(|m| m.name()).collect();
            settings.insert("method".into(), names.join(","));
            harness::run_sweep(&SweepConfig::from_settings(&settings)?)?
        }
    };
    if let Some(level) = settings.get("level") {
        let n: u32 = level
            .parse()
            .map_err(|_| Error::InvalidConfig("fit takes a single --level".into()))?;
        rows.retain(|r| r.n == n);
    }
    if rows
        .windows(2)
        .any(|w| w[0].n != w[1].n || w[0].spin != w[1].spin)
    {
        return Err(Error::InvalidConfig(
            "rows mix levels or spins; pass --level".into(),
        ));
    }
    let fit = harness::fit_exponent(&rows, column)?;
    let format: OutputFormat = settings
        .get("format")
        .map(|f| f.parse())
        .transpose()?
        .unwrap_or_default();
    let text = match format {
        OutputFormat::Csv => format!(
            "slope,intercept,rms,points\n{:.6},{:.6},{:.3e},{}\n",
            fit.slope,
            fit.intercept,
            fit.rms,
            rows.len()
        ),
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "slope": format!("{:.6}", fit.slope),
                "intercept": format!("{:.6}", fit.intercept),
                "rms": format!("{:.3e}", fit.rms),
                "points": rows.len(),
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    emit(&text, out_path(common, &settings))
}

fn run_spectrum(common: &Common) -> Result<()> {
    let settings = settings(common, None)?;
    let get = |key: &str| settings.get(key).map(String::as_str);
    let spin = SpinValue::parse(
        get("spin").ok_or_else(|| Error::InvalidConfig("missing `spin`".into()))?,
    )?;
    let field = FieldValue::parse(
        get("field").ok_or_else(|| Error::InvalidConfig("missing `field`".into()))?,
    )?;
    let kind: Anisotropy = get("anisotropy").unwrap_or("easy-axis").parse()?;
    let policy = PrecisionPolicy::parse(get("precision").unwrap_or("auto"))?;
    let report = harness::run_spectrum(spin, &field, kind, policy)?;
    let text = match get("format") {
        Some("json") => format!("{}\n", serde_json::to_string_pretty(&report).expect("json")),
        Some("csv") => {
            let mut text = String::from("index,energy,parity,doublet\n");
            for level in &report.levels {
                let doublet = report
                    .doublets
                    .iter()
                    .find(|d| d.members.contains(&level.index))
                    .map(|d| d.n.to_string())
                    .unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    level.index, level.energy, level.parity, doublet
                ));
            }
            text
        }
        Some(other) => return Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        None => {
            let mut text = String::new();
            for level in &report.levels {
                text.push_str(&format!(
                    "{:>3}  {:<5} {}\n",
                    level.index, level.parity, level.energy
                ));
            }
            for d in &report.doublets {
                text.push_str(&format!(
                    "doublet n={} levels={},{} splitting={}{}\n",
                    d.n,
                    d.members[0],
                    d.members[1],
                    d.splitting,
                    if d.adjacent { "" } else { " (not adjacent)" }
                ));
            }
            if let Some(i) = report.singlet {
                text.push_str(&format!("singlet level={i}\n"));
            }
            text
        }
    };
    emit(&text, out_path(common, &settings))
}

fn error_line(kind: &str, code: u8, message: &str) {
    let line = serde_json::json!({ "error": kind, "exit_code": code, "message": message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            error_line("InvalidArguments", 2, first);
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::Gap(common) => run_gap(common),
        Command::Sweep { common, grid } => run_sweep(common, grid),
        Command::Compare(common) => run_compare(common),
        Command::Fit {
            common,
            grid,
            input,
            column,
        } => run_fit(common, grid, input.as_ref(), column.as_deref()),
        Command::Spectrum(common) => run_spectrum(common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code() as u8;
            error_line(e.kind(), code, &e.to_string());
            ExitCode::from(code)
        }
    }
}
