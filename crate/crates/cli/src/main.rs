use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use anw_core::experiment::prepare_route;
use anw_core::io::{output_dir, read_kv_config, read_metrics_csv, read_run_json, MetricsCsvRow};
use anw_core::{
    emit, ingest_csv, run_dataset, run_route, run_simulation, Error, Estimator, ExperimentConfig,
    Ingested, KernelFamily, OutputFormat, Result, RunOutput, Scenario, Schema, SimConfig,
    TuningMode, WaypointMode,
};
use clap::{Args, Parser, Subcommand};

/// Kernel regression through fixed waypoints.
#[derive(Parser)]
#[command(name = "anw", version, about)]
struct Cli {
    /// key = value file with defaults for any flag; flags given on the command
    /// line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and fit it.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit a CSV dataset or route.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-validated search over (h, lambda), then fit with the winner.
    Tune {
        /// Simulated scenario to tune on, instead of --input.
        #[arg(long)]
        scenario: Option<String>,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sim: SimFlags,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print a metrics table from metrics.csv or run.json.
    Metrics {
        /// File written by a previous run.
        #[arg(long)]
        input: PathBuf,
        /// table or csv.
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Validate a CSV file and summarize it.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
    },
}

#[derive(Args)]
struct SimArgs {
    /// sharpen1d, case1, case2 or track2d.
    #[arg(long)]
    scenario: Option<String>,
    #[command(flatten)]
    flags: SimFlags,
}

#[derive(Args)]
struct SimFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Number of waypoints.
    #[arg(long)]
    q: Option<usize>,
    /// random, small or large.
    #[arg(long)]
    waypoint_mode: Option<String>,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// xy or lonlat.
    #[arg(long)]
    schema: Option<String>,
    /// Rotation in degrees applied to a lonlat route before fitting; curves are
    /// rotated back on output.
    #[arg(long)]
    rotate: Option<f64>,
}

#[derive(Args)]
struct ModelArgs {
    /// gaussian or epanechnikov.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Sharpening depths to fit, e.g. `--M 0,1,2`. Added to --methods.
    #[arg(long = "M", value_delimiter = ',')]
    m: Vec<usize>,
    /// nw, naive, anw, dsanw:M.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// off, shared or per-method.
    #[arg(long)]
    tuning: Option<String>,
    #[arg(long, value_delimiter = ',')]
    h_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Vec<f64>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bandwidth shrink of the naive baseline.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    penalty_weight: Option<f64>,
    #[arg(long)]
    interior_margin: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// csv, json or both.
    #[arg(long)]
    format: Option<String>,
    /// Output directory. Defaults to $ANW_OUTPUT_DIR, then ./anw-output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Command-line values backed by the config file.
struct Settings {
    file: BTreeMap<String, String>,
    /// Resolved values, echoed to `config.txt`.
    used: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        Ok(Self {
            file: match path {
                Some(p) => read_kv_config(p)?,
                None => BTreeMap::new(),
            },
            used: BTreeMap::new(),
        })
    }

    fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T> {
        raw.trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad value `{raw}` for {key}")))
    }

    /// The flag value, else the config file value.
    fn get<T: FromStr + Display + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self
                .file
                .get(key)
                .map(|raw| Self::parse(key, raw))
                .transpose()?,
        };
        if let Some(v) = &v {
            self.used.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    fn get_list<T: FromStr + Display>(&mut self, key: &str, flag: Vec<T>) -> Result<Vec<T>> {
        let v = if !flag.is_empty() {
            flag
        } else {
            match self.file.get(key) {
                Some(raw) if !raw.trim().is_empty() => raw
                    .split(',')
                    .map(|item| Self::parse(key, item))
                    .collect::<Result<Vec<T>>>()?,
                _ => Vec::new(),
            }
        };
        if !v.is_empty() {
            let joined: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            self.used.insert(key.to_string(), joined.join(","));
        }
        Ok(v)
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.used.insert(key.to_string(), value.to_string());
    }

    fn write(&self, dir: &Path) -> Result<PathBuf> {
        let mut text = String::new();
        for (k, v) in &self.used {
            text.push_str(&format!("{k} = {v}\n"));
        }
        let p = dir.join("config.txt");
        fs::write(&p, text)?;
        Ok(p)
    }
}

fn sim_config(
    settings: &mut Settings,
    scenario: Option<String>,
    flags: SimFlags,
    seed: u64,
) -> Result<SimConfig> {
    let scenario: Scenario = settings
        .get("scenario", scenario.map(|s| s.parse()).transpose()?)?
        .ok_or_else(|| Error::InvalidConfig("--scenario is required".into()))?;
    let preset = SimConfig::preset(scenario, seed);
    let waypoint_mode = flags
        .waypoint_mode
        .map(|s| s.parse::<WaypointMode>())
        .transpose()?;
    let sim = SimConfig {
        scenario,
        n: settings.get("n", flags.n)?.unwrap_or(preset.n),
        sigma: settings.get("sigma", flags.sigma)?.unwrap_or(preset.sigma),
        q: settings.get("q", flags.q)?.unwrap_or(preset.q),
        waypoint_mode: settings
            .get("waypoint_mode", waypoint_mode)?
            .unwrap_or(preset.waypoint_mode),
        seed,
    };
    settings.record("n", sim.n);
    settings.record("sigma", sim.sigma);
    settings.record("q", sim.q);
    settings.record("waypoint_mode", sim.waypoint_mode);
    Ok(sim)
}

fn experiment_config(
    settings: &mut Settings,
    model: ModelArgs,
    base: ExperimentConfig,
) -> Result<ExperimentConfig> {
    let kernel = model
        .kernel
        .map(|k| k.parse::<KernelFamily>())
        .transpose()?;
    let tuning = model.tuning.map(|t| t.parse::<TuningMode>()).transpose()?;
    let methods: Vec<Estimator> = model
        .methods
        .iter()
        .map(|m| m.parse::<Estimator>())
        .collect::<Result<_>>()?;
    let methods: Vec<String> = methods.iter().map(Estimator::slug).collect();
    let mut methods: Vec<Estimator> = settings
        .get_list::<String>("methods", methods)?
        .iter()
        .map(|m| m.parse())
        .collect::<Result<_>>()?;
    for m in settings.get_list("m", model.m)? {
        let e = if m == 0 {
            Estimator::Anw
        } else {
            Estimator::DsAnw(m)
        };
        if !methods.contains(&e) {
            methods.push(e);
        }
    }
    let h_grid = settings.get_list("h_grid", model.h_grid)?;
    let lambda_grid = settings.get_list("lambda_grid", model.lambda_grid)?;
    let exp = ExperimentConfig {
        kernel: settings.get("kernel", kernel)?.unwrap_or(base.kernel),
        h: settings.get("h", model.h)?.or(base.h),
        lambda: settings.get("lambda", model.lambda)?.or(base.lambda),
        methods: if methods.is_empty() {
            base.methods
        } else {
            methods
        },
        tuning: settings.get("tuning", tuning)?.unwrap_or(base.tuning),
        h_grid: if h_grid.is_empty() {
            base.h_grid
        } else {
            Some(h_grid)
        },
        lambda_grid: if lambda_grid.is_empty() {
            base.lambda_grid
        } else {
            Some(lambda_grid)
        },
        folds: settings.get("folds", model.folds)?.unwrap_or(base.folds),
        penalty_weight: settings
            .get("penalty_weight", model.penalty_weight)?
            .unwrap_or(base.penalty_weight),
        seed: base.seed,
        gamma: settings.get("gamma", model.gamma)?.unwrap_or(base.gamma),
        naive_radius: base.naive_radius,
        grid_size: settings
            .get("grid_size", model.grid_size)?
            .unwrap_or(base.grid_size),
        interior_margin: settings
            .get("interior_margin", model.interior_margin)?
            .unwrap_or(base.interior_margin),
    };
    // Echo everything that shapes the run so config.txt reproduces it.
    settings.record("kernel", exp.kernel);
    if let Some(h) = exp.h {
        settings.record("h", h);
    }
    if let Some(l) = exp.lambda {
        settings.record("lambda", l);
    }
    let slugs: Vec<String> = exp.methods.iter().map(Estimator::slug).collect();
    settings.record("methods", slugs.join(","));
    settings.used.remove("m");
    settings.record("tuning", exp.tuning);
    settings.record("folds", exp.folds);
    settings.record("penalty_weight", exp.penalty_weight);
    settings.record("gamma", exp.gamma);
    settings.record("grid_size", exp.grid_size);
    settings.record("interior_margin", exp.interior_margin);
    Ok(exp)
}

fn schema_for(settings: &mut Settings, input: &InputArgs, path: &Path) -> Result<Schema> {
    let flag = input.schema.as_deref().map(Schema::from_str).transpose()?;
    let schema = match flag {
        Some(s) => s,
        None => match settings.file.get("schema") {
            Some(raw) => raw.parse()?,
            None => sniff_schema(path)?,
        },
    };
    settings.record("schema", if schema == Schema::Xy { "xy" } else { "lonlat" });
    Ok(schema)
}

/// Picks the schema from the header row.
fn sniff_schema(path: &Path) -> Result<Schema> {
    let text = fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("").to_ascii_lowercase();
    Ok(if header.split(',').any(|c| c.trim() == "lon") {
        Schema::LonLat
    } else {
        Schema::Xy
    })
}

fn input_path(settings: &mut Settings, input: &InputArgs) -> Result<PathBuf> {
    settings
        .get(
            "input",
            input.input.as_ref().map(|p| p.display().to_string()),
        )?
        .map(PathBuf::from)
        .ok_or_else(|| Error::InvalidConfig("--input is required".into()))
}

fn run_input(
    settings: &mut Settings,
    input: InputArgs,
    model: ModelArgs,
    seed: u64,
    tune: bool,
) -> Result<RunOutput> {
    let path = input_path(settings, &input)?;
    let schema = schema_for(settings, &input, &path)?;
    let base = ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    };
    let mut exp = experiment_config(settings, model, base)?;
    force_tuning(settings, &mut exp, tune);
    let shown = path.display().to_string();
    match ingest_csv(&path, schema)? {
        Ingested::Dataset(data) => run_dataset(&data, &exp, &shown),
        Ingested::Track(track) => {
            let rotate = settings.get("rotate", input.rotate)?.unwrap_or(0.0);
            settings.record("rotate", rotate);
            run_route(&track, rotate, &exp, &shown)
        }
    }
}

fn force_tuning(settings: &mut Settings, exp: &mut ExperimentConfig, tune: bool) {
    if tune && exp.tuning == TuningMode::Off {
        exp.tuning = TuningMode::Shared;
        settings.record("tuning", exp.tuning);
    }
}

fn finish(settings: &mut Settings, mut out: RunOutput, output: OutputArgs) -> Result<()> {
    let format: OutputFormat = settings
        .get("format", output.format.map(|f| f.parse()).transpose()?)?
        .unwrap_or(OutputFormat::Both);
    let dir = output_dir(output.out.as_deref());
    out.record.timestamp = Some(utc_now());
    let mut written = emit(&out, &dir, format)?;
    written.push(settings.write(&dir)?);

    for t in &out.record.tuning {
        println!(
            "search {} [{}]: h = {}, lambda = {}, loss = {} ({} of {} cells infeasible)",
            t.label, t.target, t.best_h, t.best_lambda, t.total, t.infeasible_cells, t.cells
        );
    }
    let rows: Vec<MetricsCsvRow> = out
        .record
        .rows
        .iter()
        .map(MetricsCsvRow::from_row)
        .collect();
    print_table(&rows);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn print_table(rows: &[MetricsCsvRow]) {
    println!(
        "{:<18} {:>10} {:>8} {:>10} {:>14} {:>12} {:>8}",
        "Method", "h", "lambda", "RMSE", "WaypointError", "Smoothness", "CSS"
    );
    for r in rows {
        let lambda = r
            .lambda
            .map(|l| format!("{l}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<18} {:>10.4} {:>8} {:>10.4} {:>14.4} {:>12.4} {:>8.4}",
            r.method, r.h, lambda, r.rmse, r.waypoint_error, r.smoothness, r.css
        );
    }
}

fn print_csv(rows: &[MetricsCsvRow]) {
    println!("Method,h,lambda,RMSE,WaypointError,Smoothness,CSS");
    for r in rows {
        let lambda = r.lambda.map(|l| l.to_string()).unwrap_or_default();
        println!(
            "{},{},{},{},{},{},{}",
            r.method, r.h, lambda, r.rmse, r.waypoint_error, r.smoothness, r.css
        );
    }
}

/// Current UTC time as `YYYY-MM-DDTHH:MM:SSZ`.
fn utc_now() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs()) as i64;
    let (days, rem) = (secs.div_euclid(86_400), secs.rem_euclid(86_400));
    // Civil-from-days for the proleptic Gregorian calendar.
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = yoe + era * 400 + i64::from(month <= 2);
    format!(
        "{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}Z",
        rem / 3600,
        rem % 3600 / 60,
        rem % 60
    )
}

fn seed(settings: &mut Settings, flag: Option<u64>) -> Result<u64> {
    let s = settings.get("seed", flag)?.unwrap_or(0);
    settings.record("seed", s);
    Ok(s)
}

fn run(cli: Cli) -> Result<()> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate {
            sim,
            mut model,
            output,
        } => {
            let seed = seed(&mut settings, model.seed.take())?;
            let sim = sim_config(&mut settings, sim.scenario, sim.flags, seed)?;
            let base = ExperimentConfig::for_scenario(sim.scenario, seed);
            let exp = experiment_config(&mut settings, model, base)?;
            settings.record("command", "simulate");
            let out = run_simulation(&sim, &exp)?;
            finish(&mut settings, out, output)
        }
        Command::Fit {
            input,
            mut model,
            output,
        } => {
            let seed = seed(&mut settings, model.seed.take())?;
            settings.record("command", "fit");
            let out = run_input(&mut settings, input, model, seed, false)?;
            finish(&mut settings, out, output)
        }
        Command::Tune {
            scenario,
            input,
            sim,
            mut model,
            output,
        } => {
            let seed = seed(&mut settings, model.seed.take())?;
            settings.record("command", "tune");
            let from_file = input.input.is_some()
                || (scenario.is_none() && settings.file.contains_key("input"));
            let out = if from_file {
                run_input(&mut settings, input, model, seed, true)?
            } else {
                let sim = sim_config(&mut settings, scenario, sim, seed)?;
                let base = ExperimentConfig::for_scenario(sim.scenario, seed);
                let mut exp = experiment_config(&mut settings, model, base)?;
                force_tuning(&mut settings, &mut exp, true);
                run_simulation(&sim, &exp)?
            };
            finish(&mut settings, out, output)
        }
        Command::Metrics { input, format } => {
            let is_json = input.extension().is_some_and(|e| e == "json");
            let rows = if is_json {
                read_run_json(&input)?
                    .rows
                    .iter()
                    .map(MetricsCsvRow::from_row)
                    .collect()
            } else {
                read_metrics_csv(&input)?
            };
            match format.as_str() {
                "table" => print_table(&rows),
                "csv" => print_csv(&rows),
                other => return Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
            }
            Ok(())
        }
        Command::Ingest { input } => {
            let path = input_path(&mut settings, &input)?;
            let schema = schema_for(&mut settings, &input, &path)?;
            match ingest_csv(&path, schema)? {
                Ingested::Dataset(d) => {
                    let (lo, hi) = d.x_range();
                    println!(
                        "xy dataset: {} rows, {} waypoints, x in [{lo}, {hi}]",
                        d.len(),
                        d.constraints().len()
                    );
                }
                Ingested::Track(t) => {
                    let rotate = settings.get("rotate", input.rotate)?.unwrap_or(0.0);
                    let p = prepare_route(&t, rotate)?;
                    println!(
                        "lonlat track: {} points, {} waypoints, {} points after augmentation",
                        t.points.len(),
                        t.waypoints.len(),
                        p.len()
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
