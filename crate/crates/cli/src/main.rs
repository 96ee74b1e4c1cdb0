use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use mobility_core::geocode::load_gazetteer;
use mobility_core::pipeline::{self, compare_files, write_comparison, write_atomic, Format, PipelineConfig};
use mobility_core::synth::{self, ScaleChange, ScenarioSpec};
use mobility_core::{Error, GeoPoint, Result};

#[derive(Parser)]
#[command(name = "mobility", version, about = "Per-region daily mobility statistics from device position reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over one or more input datasets.
    Run(ConfigArgs),
    /// Print the effective configuration as JSON.
    ConfigDump(ConfigArgs),
    /// Join two output files on region and date and report index deltas.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Write the comparison here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic corpus, gazetteer and truth sidecar.
    Synth(SynthArgs),
    /// Reverse geocode one point.
    Geocode {
        #[arg(long)]
        gazetteer: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        /// Search radius for the nearest populated place.
        #[arg(long, default_value_t = 50.0)]
        max_place_km: f64,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input dataset as `name=glob` or a bare glob; repeat for several.
    #[arg(long = "inputs", visible_alias = "input")]
    inputs: Vec<String>,
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    accuracy_max_m: Option<f64>,
    #[arg(long)]
    min_reports: Option<usize>,
    #[arg(long)]
    min_span_hours: Option<f64>,
    #[arg(long)]
    trim_fraction: Option<f64>,
    #[arg(long)]
    baseline_start: Option<NaiveDate>,
    #[arg(long)]
    baseline_end: Option<NaiveDate>,
    #[arg(long)]
    date_from: Option<NaiveDate>,
    #[arg(long)]
    date_to: Option<NaiveDate>,
    /// 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    n_buckets: Option<usize>,
    #[arg(long)]
    scratch_dir: Option<PathBuf>,
    /// Add mean and quartile columns.
    #[arg(long)]
    verbose: bool,
}

impl ConfigArgs {
    fn resolve(self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::from_json_file(p)?,
            None => PipelineConfig::default(),
        };
        if !self.inputs.is_empty() {
            cfg.inputs = self.inputs;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(format, accuracy_max_m, min_reports, min_span_hours, trim_fraction);
        set!(baseline_start, baseline_end, workers, n_buckets);
        macro_rules! set_opt {
            ($($f:ident),*) => { $(if self.$f.is_some() { cfg.$f = self.$f; })* };
        }
        set_opt!(gazetteer, output_dir, date_from, date_to, scratch_dir);
        cfg.verbose |= self.verbose;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// JSON scenario file; flags override its values.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    devices: Option<usize>,
    #[arg(long)]
    start_date: Option<NaiveDate>,
    #[arg(long)]
    end_date: Option<NaiveDate>,
    /// Mobility scale from a date on, `DATE=FACTOR`; repeat for a schedule.
    #[arg(long, value_parser = parse_scale)]
    scale: Vec<ScaleChange>,
    #[arg(long)]
    base_radius_km: Option<f64>,
    #[arg(long)]
    shards: Option<usize>,
    #[arg(long)]
    malformed_fraction: Option<f64>,
    /// Write uncompressed shards.
    #[arg(long)]
    plain: bool,
    /// Skip the truth sidecar.
    #[arg(long)]
    no_truth: bool,
}

fn parse_scale(s: &str) -> std::result::Result<ScaleChange, String> {
    let (d, f) = s.split_once('=').ok_or("expected DATE=FACTOR")?;
    Ok(ScaleChange {
        from: d.parse().map_err(|e| format!("{d:?}: {e}"))?,
        factor: f.parse().map_err(|e| format!("{f:?}: {e}"))?,
    })
}

impl SynthArgs {
    fn resolve(self) -> Result<ScenarioSpec> {
        let mut spec = match &self.spec {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", p.display())))?
            }
            None => ScenarioSpec::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { spec.$f = v; })* };
        }
        set!(seed, devices, start_date, end_date, base_radius_km, shards, malformed_fraction);
        if !self.scale.is_empty() {
            spec.scale_changes = self.scale;
        }
        spec.gzip &= !self.plain;
        spec.with_truth &= !self.no_truth;
        Ok(spec)
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v).map_err(|e| Error::io("<stdout>", e.into()))?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let summary = pipeline::run(&cfg)?;
            for d in &summary.datasets {
                print_json(&d.report)?;
            }
            Ok(())
        }
        Command::ConfigDump(args) => {
            let cfg = args.resolve()?;
            let text = serde_json::to_string_pretty(&cfg).expect("config serialises");
            println!("{text}");
            Ok(())
        }
        Command::Compare { a, b, output } => {
            let rows = compare_files(&a, &b)?;
            match output {
                Some(p) => write_atomic(&p, |w| write_comparison(&rows, w)),
                None => write_comparison(&rows, std::io::stdout().lock()).map_err(|e| Error::io("<stdout>", e)),
            }
        }
        Command::Synth(args) => {
            let out = args.out_dir.clone();
            let spec = args.resolve()?;
            print_json(&synth::generate(&spec, out)?)
        }
        Command::Geocode {
            gazetteer,
            lat,
            lon,
            max_place_km,
        } => {
            let g = load_gazetteer(&gazetteer)?;
            let p = GeoPoint::new(lat, lon).map_err(|e| Error::config(e.to_string()))?;
            let region = g.reverse_geocode(p);
            let place = g.nearest_place(p, max_place_km);
            print_json(&serde_json::json!({
                "lat": lat,
                "lon": lon,
                "region": region,
                "admin_level": region.map(|r| r.level()),
                "place": place.map(|pl| pl.name.as_str()),
            }))
        }
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            return fail("config", first.trim_start_matches("error: "), 1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string(), e.exit_code() as u8),
    }
}
