use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfeh::config::ConfigDocument;
use mfeh::format::{fmt_sig, parse_number};
use mfeh::harvester::{
    hysteresis_negligible, load_power, matched_load_power, open_circuit_voltage,
};
use mfeh::magnetics::{
    effective_radius, field_lab_loop, field_two_rail, FieldStrength, SourceCurrent,
};
use mfeh::optimize::lab_data::lab_model_coefficients;
use mfeh::optimize::tables::CoefficientTable;
use mfeh::optimize::{fit_loop_length, predict_coefficient, sweep};
use mfeh::plot::{line_chart, ChartSpec};
use mfeh::scenario::simulate_period;
use mfeh::traces::{detect_passes, envelope, power_trace, Trace, TraceKind};
use mfeh::{Error, Result};

/// Magnetic-field energy harvesting from railway return currents.
#[derive(Parser, Debug)]
#[command(name = "mfeh", version)]
struct Cli {
    /// Configuration file.
    #[arg(long, short, global = true, visible_alias = "meta")]
    config: Option<PathBuf>,
    /// Print the effective configuration (after flag overrides) and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Machine-readable CSV output path.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// SVG chart drawn from the CSV written to `--out`.
    #[arg(long, global = true, requires = "out")]
    plot: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ambient field of the two-rail return current.
    Field(FieldArgs),
    /// Coil voltage and power at one placement.
    Power(PowerArgs),
    /// Coefficient (and power) table over coils, frequencies and distances.
    Sweep(SweepArgs),
    /// Fit the lab conductor length to observed coefficients.
    Fit(FitArgs),
    /// Daily harvested energy for a timetable.
    Simulate(SimulateArgs),
    /// Power, energy and pass detection for a recorded load-voltage trace.
    Trace(TraceArgs),
}

#[derive(Args, Debug)]
struct SiteOverrides {
    /// Distance to the near rail, m.
    #[arg(long, value_parser = number)]
    at: Option<f64>,
    /// Total return current (RMS), A.
    #[arg(long, value_parser = number)]
    current_a: Option<f64>,
    /// Rail separation, m.
    #[arg(long, value_parser = number)]
    d_rr_m: Option<f64>,
    /// Fraction of the current in the near rail.
    #[arg(long, value_parser = number)]
    current_split: Option<f64>,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[command(flatten)]
    site: SiteOverrides,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Geometry {
    TwoRail,
    LabLoop,
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[command(flatten)]
    site: SiteOverrides,
    /// Source frequency, Hz (accepts `50/3`).
    #[arg(long, value_parser = number)]
    frequency_hz: Option<f64>,
    /// Coil preset.
    #[arg(long)]
    coil: Option<String>,
    /// Field model used for the placement.
    #[arg(long, value_enum, default_value = "two-rail")]
    geometry: Geometry,
    /// Lab conductor length, m (lab-loop geometry).
    #[arg(long, value_parser = number)]
    a_m: Option<f64>,
    /// Load resistance, Ω. Defaults to a matched load.
    #[arg(long, value_parser = number)]
    r_load_ohm: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Lab conductor length, m.
    #[arg(long, value_parser = number)]
    a_m: Option<f64>,
    /// Lab far-side separation, m.
    #[arg(long, value_parser = number)]
    b_m: Option<f64>,
    /// CSV path for the power table (needs `currents_a`).
    #[arg(long)]
    power_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Observed coefficients in `coil,f_hz,r_m,k_uw_per_a2` format.
    #[arg(required_unless_present = "lab_data", conflicts_with = "lab_data")]
    observed: Option<PathBuf>,
    /// Fit against the built-in laboratory model coefficients.
    #[arg(long)]
    lab_data: bool,
    #[arg(long, value_parser = number)]
    b_m: Option<f64>,
    #[arg(long, value_parser = number)]
    a_min_m: Option<f64>,
    #[arg(long, value_parser = number)]
    a_max_m: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Distance to the near rail, m.
    #[arg(long, value_parser = number)]
    at: Option<f64>,
    #[arg(long, value_parser = number)]
    frequency_hz: Option<f64>,
    #[arg(long)]
    coil: Option<String>,
    /// Daily energy requirement of the node, J.
    #[arg(long, value_parser = number)]
    budget_j: Option<f64>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    /// Trace CSV with header `t_s,v_load_V`.
    trace: PathBuf,
    #[arg(long, value_parser = number)]
    r_load_ohm: Option<f64>,
    #[arg(long, value_parser = number)]
    window_s: Option<f64>,
    #[arg(long, value_parser = number)]
    threshold_w: Option<f64>,
    #[arg(long, value_parser = number)]
    hold_s: Option<f64>,
    /// CSV path for the per-sample series `t_s,v_env_V,p_w`.
    #[arg(long)]
    series_out: Option<PathBuf>,
}

fn number(s: &str) -> std::result::Result<f64, String> {
    parse_number(s).ok_or_else(|| format!("'{s}' is not a number"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut doc = match &cli.config {
        Some(path) => ConfigDocument::read(path)?,
        None => ConfigDocument::default(),
    };
    apply_overrides(&mut doc, &cli.command)?;
    if cli.dump_config {
        print!("{}", doc.render());
        return Ok(());
    }
    let out = cli.out.as_deref();
    let plot = cli.plot.as_deref();
    match &cli.command {
        Command::Field(_) => cmd_field(&doc, out),
        Command::Power(args) => cmd_power(&doc, args, out),
        Command::Sweep(args) => cmd_sweep(&doc, args, out, plot),
        Command::Fit(args) => cmd_fit(&doc, args, out, plot),
        Command::Simulate(_) => cmd_simulate(&doc, out, plot),
        Command::Trace(args) => cmd_trace(&doc, args, out, plot),
    }
}

fn set_num(doc: &mut ConfigDocument, section: &str, key: &str, v: Option<f64>) -> Result<()> {
    match v {
        // shortest round-trip form keeps overrides exact
        Some(v) => doc.set(section, key, v.to_string()),
        None => Ok(()),
    }
}

fn set_coil(doc: &mut ConfigDocument, coil: &Option<String>) -> Result<()> {
    let Some(name) = coil else { return Ok(()) };
    if doc.section("coil").is_some() {
        doc.sections.retain(|s| s.name != "coil");
    }
    doc.set("site", "coil", name.clone())
}

fn apply_site(doc: &mut ConfigDocument, s: &SiteOverrides) -> Result<()> {
    set_num(doc, "site", "r_n_m", s.at)?;
    set_num(doc, "site", "current_a", s.current_a)?;
    set_num(doc, "site", "d_rr_m", s.d_rr_m)?;
    set_num(doc, "site", "current_split", s.current_split)
}

fn apply_overrides(doc: &mut ConfigDocument, cmd: &Command) -> Result<()> {
    match cmd {
        Command::Field(a) => apply_site(doc, &a.site),
        Command::Power(a) => {
            apply_site(doc, &a.site)?;
            set_num(doc, "site", "frequency_hz", a.frequency_hz)?;
            set_coil(doc, &a.coil)?;
            if matches!(a.geometry, Geometry::LabLoop) {
                set_num(doc, "lab_loop", "r_m", a.site.at)?;
            }
            set_num(doc, "lab_loop", "a_m", a.a_m)
        }
        Command::Sweep(a) => {
            set_num(doc, "lab_loop", "a_m", a.a_m)?;
            set_num(doc, "lab_loop", "b_m", a.b_m)
        }
        Command::Fit(a) => {
            set_num(doc, "fit", "b_m", a.b_m)?;
            set_num(doc, "fit", "a_min_m", a.a_min_m)?;
            set_num(doc, "fit", "a_max_m", a.a_max_m)
        }
        Command::Simulate(a) => {
            set_num(doc, "site", "r_n_m", a.at)?;
            set_num(doc, "site", "frequency_hz", a.frequency_hz)?;
            set_coil(doc, &a.coil)?;
            if let Some(j) = a.budget_j {
                doc.sections.retain(|s| s.name != "budget");
                doc.set("budget", "daily_requirement_j", j.to_string())?;
            }
            Ok(())
        }
        Command::Trace(a) => {
            set_num(doc, "trace", "r_load_ohm", a.r_load_ohm)?;
            set_num(doc, "trace", "window_s", a.window_s)?;
            set_num(doc, "trace", "threshold_w", a.threshold_w)?;
            set_num(doc, "trace", "hold_s", a.hold_s)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_plot(csv_path: &Path, svg_path: &Path, spec: &ChartSpec) -> Result<()> {
    let text = std::fs::read_to_string(csv_path)?;
    std::fs::write(svg_path, line_chart(&text, spec)?)?;
    Ok(())
}

fn require_current(doc: &ConfigDocument, frequency: Option<f64>) -> Result<SourceCurrent> {
    let site = doc.site()?;
    let i = site.current_a.ok_or_else(|| {
        Error::Validation("[site] is missing 'current_a' (or pass --current-a)".into())
    })?;
    // frequency does not enter the field magnitude
    SourceCurrent::new(i, frequency.or(site.frequency).unwrap_or(50.0 / 3.0))
}

fn cmd_field(doc: &ConfigDocument, out: Option<&Path>) -> Result<()> {
    let site = doc.site()?;
    let src = require_current(doc, None)?;
    let g = site.geometry;
    let re = effective_radius(g.r_n(), g.d_rr())?;
    let f = field_two_rail(&src, &g);
    println!("r_n_m         {}", fmt_sig(g.r_n()));
    println!("r_e_m         {}", fmt_sig(re));
    println!("h_rms_a_per_m {}", fmt_sig(f.h_rms));
    println!("b_rms_t       {}", fmt_sig(f.b_rms));
    if let Some(path) = out {
        let row = vec![
            fmt_sig(g.r_n()),
            fmt_sig(re),
            fmt_sig(f.h_rms),
            fmt_sig(f.b_rms),
        ];
        write_rows(path, &["r_m", "re_m", "h_a_per_m", "b_t"], &[row])?;
    }
    Ok(())
}

fn cmd_power(doc: &ConfigDocument, args: &PowerArgs, out: Option<&Path>) -> Result<()> {
    let (label, coil) = doc.require_coil()?;
    let site = doc.site_config()?;
    let src = require_current(doc, Some(site.frequency))?;
    let (r, field): (f64, FieldStrength) = match args.geometry {
        Geometry::TwoRail => (site.geometry.r_n(), field_two_rail(&src, &site.geometry)),
        Geometry::LabLoop => {
            let lab = doc.lab_loop()?.ok_or_else(|| {
                Error::Validation("lab-loop geometry needs a [lab_loop] section".into())
            })?;
            (lab.r(), field_lab_loop(&src, &lab))
        }
    };
    let v = open_circuit_voltage(&coil, &field, site.frequency);
    let p = match args.r_load_ohm {
        Some(rl) => load_power(v, coil.resistance, rl)?,
        None => matched_load_power(&coil, &field, site.frequency),
    };
    let hyst = hysteresis_negligible(&coil.material);
    println!("coil          {label}");
    println!("f_hz          {}", fmt_sig(site.frequency));
    println!("r_m           {}", fmt_sig(r));
    println!("i_a           {}", fmt_sig(src.i_rms()));
    println!("b_rms_t       {}", fmt_sig(field.b_rms));
    println!("v_oc_rms_v    {}", fmt_sig(v));
    println!("p_w           {}", fmt_sig(p));
    println!(
        "hysteresis    {}",
        if hyst.negligible {
            "negligible"
        } else {
            "not negligible"
        }
    );
    if let Some(path) = out {
        let row = vec![
            label,
            fmt_sig(site.frequency),
            fmt_sig(r),
            fmt_sig(src.i_rms()),
            fmt_sig(field.h_rms),
            fmt_sig(field.b_rms),
            fmt_sig(v),
            fmt_sig(p),
        ];
        write_rows(
            path,
            &[
                "coil",
                "f_hz",
                "r_m",
                "i_a",
                "h_a_per_m",
                "b_t",
                "voc_v",
                "p_w",
            ],
            &[row],
        )?;
    }
    Ok(())
}

fn cmd_sweep(
    doc: &ConfigDocument,
    args: &SweepArgs,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<()> {
    let spec = doc.sweep_spec()?;
    let tables = sweep(&spec)?;
    println!(
        "{:<10} {:>12} {:>8} {:>16}",
        "coil", "f_hz", "r_m", "k_uw_per_a2"
    );
    for r in &tables.coefficients.rows {
        println!(
            "{:<10} {:>12} {:>8} {:>16}",
            r.coil,
            fmt_sig(r.f_hz),
            fmt_sig(r.r_m),
            fmt_sig(r.k)
        );
    }
    if let Some(path) = out {
        let mut w = create(path)?;
        tables.coefficients.write_csv(&mut w)?;
        w.flush()?;
        if let Some(svg) = plot {
            let spec = ChartSpec {
                x: "r_m",
                y: "k_uw_per_a2",
                series: &["coil", "f_hz"],
                log_y: true,
                title: "Power coefficient vs distance",
            };
            write_plot(path, svg, &spec)?;
        }
    }
    if let Some(path) = &args.power_out {
        if tables.power.rows.is_empty() {
            return Err(Error::Validation(
                "--power-out needs currents_a in [sweep]".into(),
            ));
        }
        let mut w = create(path)?;
        tables.power.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_fit(
    doc: &ConfigDocument,
    args: &FitArgs,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<()> {
    let observed = match &args.observed {
        Some(path) => CoefficientTable::read_csv(BufReader::new(File::open(path)?))?,
        None => lab_model_coefficients(),
    };
    let catalog = doc.catalog()?;
    let (b, bounds) = doc.fit_settings()?;
    let fit = fit_loop_length(&observed, &catalog, b, bounds)?;
    println!("a_m              {}", fmt_sig(fit.a));
    println!("b_m              {}", fmt_sig(b));
    println!("rms_log_residual {}", fmt_sig(fit.rms_log_residual));
    let mut rows = Vec::with_capacity(observed.rows.len());
    let mut worst: f64 = 0.0;
    for row in &observed.rows {
        let coil = catalog
            .get(&row.coil)
            .ok_or_else(|| Error::Validation(format!("unknown coil '{}'", row.coil)))?;
        let lab = mfeh::magnetics::LabLoopGeometry::new(row.r_m, fit.a, b)?;
        let k = predict_coefficient(coil, &lab, row.f_hz)?;
        let dev = k / row.k - 1.0;
        worst = worst.max(dev.abs());
        rows.push((row, k, dev));
    }
    println!("max_rel_dev      {}", fmt_sig(worst));
    if let Some(path) = out {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|(r, k, d)| {
                vec![
                    r.coil.clone(),
                    fmt_sig(r.f_hz),
                    fmt_sig(r.r_m),
                    fmt_sig(r.k),
                    fmt_sig(*k),
                    fmt_sig(*d),
                ]
            })
            .collect();
        write_rows(
            path,
            &["coil", "f_hz", "r_m", "k_observed", "k_model", "rel_dev"],
            &table,
        )?;
        if let Some(svg) = plot {
            let spec = ChartSpec {
                x: "r_m",
                y: "k_model",
                series: &["coil", "f_hz"],
                log_y: true,
                title: "Fitted model coefficients",
            };
            write_plot(path, svg, &spec)?;
        }
    }
    Ok(())
}

fn cmd_simulate(doc: &ConfigDocument, out: Option<&Path>, plot: Option<&Path>) -> Result<()> {
    let site = doc.site_config()?;
    let timetable = doc.timetable(&site)?;
    let budget = doc.budget()?;
    let report = simulate_period(&site, &timetable, &budget)?;
    println!("events       {}", report.per_event.len());
    println!("period_s     {}", fmt_sig(timetable.period()));
    println!("daily_total  {} J", fmt_sig(report.daily_total));
    println!("budget       {} J", fmt_sig(budget.daily_requirement));
    println!("margin       {}", fmt_sig(report.margin));
    if let Some(path) = out {
        let mut cumulative = 0.0;
        let rows: Vec<Vec<String>> = report
            .per_event
            .iter()
            .map(|e| {
                cumulative += e.energy;
                vec![
                    e.label.clone(),
                    fmt_sig(e.start),
                    fmt_sig(e.energy),
                    fmt_sig(cumulative),
                ]
            })
            .collect();
        write_rows(
            path,
            &["label", "start_s", "energy_j", "cumulative_j"],
            &rows,
        )?;
        if let Some(svg) = plot {
            let spec = ChartSpec {
                x: "start_s",
                y: "cumulative_j",
                series: &[],
                log_y: false,
                title: "Cumulative harvested energy",
            };
            write_plot(path, svg, &spec)?;
        }
    }
    Ok(())
}

fn cmd_trace(
    doc: &ConfigDocument,
    args: &TraceArgs,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<()> {
    let meta = doc.trace_meta()?;
    let mut trace = Trace::read_csv(BufReader::new(File::open(&args.trace)?), meta.r_load)?;
    trace.coil_label = meta.coil.clone();
    trace.site_label = meta.site.clone();
    trace.kind = meta.kind;
    let power = power_trace(&trace);
    let total = power.total_energy();
    let detection = detect_passes(&power, meta.threshold, meta.hold)?;
    let peak = power.p.iter().cloned().fold(0.0, f64::max);
    println!("samples      {}", trace.samples().len());
    println!("kind         {}", trace.kind.as_str());
    println!("peak_w       {}", fmt_sig(peak));
    println!("total_j      {}", fmt_sig(total));
    println!("passes       {}", detection.intervals.len());
    for p in &detection.intervals {
        println!(
            "  {} .. {} s  peak {} W  energy {} J",
            fmt_sig(p.t_start),
            fmt_sig(p.t_end),
            fmt_sig(p.peak_power),
            fmt_sig(p.energy)
        );
    }
    if let Some(path) = out {
        let rows: Vec<Vec<String>> = detection
            .intervals
            .iter()
            .map(|p| {
                vec![
                    fmt_sig(p.t_start),
                    fmt_sig(p.t_end),
                    fmt_sig(p.peak_power),
                    fmt_sig(p.energy),
                ]
            })
            .collect();
        write_rows(path, &["t_start_s", "t_end_s", "peak_w", "energy_j"], &rows)?;
    }
    if let Some(path) = &args.series_out {
        let env = match trace.kind {
            TraceKind::Waveform => envelope(&trace, meta.window)?,
            TraceKind::Envelope => trace.samples().to_vec(),
        };
        let rows: Vec<Vec<String>> = env
            .iter()
            .zip(&power.p)
            .map(|(s, p)| vec![fmt_sig(s.t), fmt_sig(s.v.abs()), fmt_sig(*p)])
            .collect();
        write_rows(path, &["t_s", "v_env_V", "p_w"], &rows)?;
        if let Some(svg) = plot {
            let spec = ChartSpec {
                x: "t_s",
                y: "p_w",
                series: &[],
                log_y: false,
                title: "Load power",
            };
            write_plot(path, svg, &spec)?;
        }
    } else if plot.is_some() {
        return Err(Error::Validation(
            "trace --plot draws the series; pass --series-out".into(),
        ));
    }
    Ok(())
}
