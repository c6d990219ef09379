//! `threeclass` command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use threeclass::dataset::{load_csv, MarkerDataset};
use threeclass::estimators::Method;
use threeclass::inference::BootstrapConfig;
use threeclass::normality::DEFAULT_THRESHOLD;
use threeclass::report::{
    analyze_marker, density_grid, format_tests, normality_report, test_marker,
    write_density_grid_csv, AnalysisOptions,
};
use threeclass::simulation::{
    bias_rows_to_table, find_scenario, format_bias_rows, parse_scenarios, power_rows_to_table,
    reproduce_table, rows_to_json, run_bias_study, run_power_study, table_ids, write_rows_csv,
    KernelInput, Scale, ScenarioConfig, TableRow,
};
use threeclass::Error;

/// Environment variable supplying the default seed.
const SEED_ENV: &str = "THREECLASS_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "threeclass",
    version,
    about = "OVL and VUS estimation for three-class diagnostic markers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate OVL and VUS with percentile bootstrap intervals.
    Estimate(EstimateArgs),
    /// Pooled-null bootstrap tests of no differentiation between classes.
    Test(TestArgs),
    /// Run a power or bias study for a built-in scenario or a scenario file.
    Simulate(SimulateArgs),
    /// Reproduce a published simulation table.
    ReproduceTable(ReproduceArgs),
    /// Shapiro-Wilk test of each class.
    Normality(NormalityArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Comma-separated file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Column holding the marker values.
    #[arg(long)]
    value: String,
    /// Column holding the class labels.
    #[arg(long = "class")]
    class_column: String,
    /// The three class labels from lowest to highest, comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    order: Vec<String>,
}

impl InputArgs {
    fn load(&self) -> threeclass::Result<MarkerDataset> {
        let order: [String; 3] = self.order.clone().try_into().map_err(|o: Vec<String>| {
            Error::InvalidInput(format!(
                "--order needs exactly three labels, got {}",
                o.len()
            ))
        })?;
        load_csv(&self.input, &self.value, &self.class_column, &order)
    }
}

#[derive(Debug, Args)]
struct MethodArgs {
    /// Estimation methods: normal, boxcox, kernel, empirical.
    #[arg(long, value_delimiter = ',', default_value = "normal,kernel,empirical")]
    methods: Vec<String>,
    /// Shapiro-Wilk level below which the Box-Cox variant replaces the normal one.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    normality_threshold: f64,
    /// Use exactly the parametric methods listed instead of choosing by normality.
    #[arg(long)]
    no_auto_parametric: bool,
}

impl MethodArgs {
    fn options(&self, bootstrap: Option<BootstrapConfig>) -> threeclass::Result<AnalysisOptions> {
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<threeclass::Result<Vec<_>>>()?;
        Ok(AnalysisOptions {
            methods,
            bootstrap,
            normality_threshold: self.normality_threshold,
            auto_parametric: !self.no_auto_parametric,
        })
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    methods: MethodArgs,
    /// Bootstrap resamples.
    #[arg(long = "B", default_value_t = 500)]
    b: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Point estimates only.
    #[arg(long)]
    no_ci: bool,
    #[arg(long, conflicts_with = "table")]
    json: bool,
    #[arg(long)]
    table: bool,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    methods: MethodArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "B", default_value_t = 500)]
    b: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Study {
    Power,
    Bias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RowFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelInputArg {
    Raw,
    Boxcox,
}

#[derive(Debug, Args)]
struct ScaleArgs {
    /// Reduced scale: 400 replications, B = 200, three size triples.
    #[arg(long, conflicts_with = "full")]
    desk: bool,
    /// Full scale: 1000 replications, B = 500, all size triples.
    #[arg(long)]
    full: bool,
}

impl ScaleArgs {
    fn scale(&self, default: Scale) -> Scale {
        if self.desk {
            Scale::Desk
        } else if self.full {
            Scale::Full
        } else {
            default
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Built-in scenario id or path to a scenario file.
    #[arg(long)]
    scenario: String,
    #[command(flatten)]
    scale: ScaleArgs,
    #[arg(long, value_enum, default_value = "power")]
    study: Study,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Data seen by the kernel OVL estimator in the bias study.
    #[arg(long, value_enum, default_value = "boxcox")]
    bias_kernel: KernelInputArg,
    #[arg(long, value_enum, default_value = "table")]
    out: RowFormat,
    /// Run replications on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Table id, e.g. power/normal-location or bias/tt1.
    #[arg(required_unless_present = "list")]
    table_id: Option<String>,
    #[command(flatten)]
    scale: ScaleArgs,
    #[arg(long, value_enum, default_value = "table")]
    out: RowFormat,
    /// Print the valid table ids.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    serial: bool,
}

#[derive(Debug, Args)]
struct NormalityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    json: bool,
    /// Write per-class density and distribution-function grids to this CSV file.
    #[arg(long)]
    density_grid: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::Parse(_)
        | Error::UnknownId { .. }
        | Error::UnsupportedPair { .. } => 1,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut stdout = io::stdout().lock();
    match run(cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (e.g. `| head`) is not a failure.
        Err(Error::Io(m)) if m.contains("Broken pipe") => ExitCode::SUCCESS,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> threeclass::Result<()> {
    match command {
        Command::Estimate(a) => estimate(a, out),
        Command::Test(a) => test(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::ReproduceTable(a) => reproduce(a, out),
        Command::Normality(a) => normality(a, out),
    }
}

fn estimate(a: EstimateArgs, out: &mut dyn Write) -> threeclass::Result<()> {
    let bootstrap = (!a.no_ci).then_some(BootstrapConfig {
        b: a.b,
        level: a.level,
        seed: a.seed,
        ..Default::default()
    });
    let opts = a.methods.options(bootstrap)?;
    let report = analyze_marker(&a.input.load()?, &opts)?;
    if a.json {
        writeln!(out, "{}", report.to_json()?)?;
    } else {
        write!(out, "{report}")?;
    }
    Ok(())
}

fn test(a: TestArgs, out: &mut dyn Write) -> threeclass::Result<()> {
    let cfg = BootstrapConfig {
        b: a.b,
        alpha: a.alpha,
        seed: a.seed,
        ..Default::default()
    };
    cfg.validate()?;
    let opts = a.methods.options(None)?;
    let tests = test_marker(&a.input.load()?, &opts, &cfg)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&tests)?)?;
    } else {
        write!(out, "{}", format_tests(&tests))?;
    }
    Ok(())
}

fn load_scenarios(spec: &str) -> threeclass::Result<Vec<ScenarioConfig>> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{spec}: {e}")))?;
        let scenarios = parse_scenarios(&text)?;
        if scenarios.is_empty() {
            return Err(Error::Data(format!("{spec} defines no scenarios")));
        }
        Ok(scenarios)
    } else {
        Ok(vec![find_scenario(spec)?])
    }
}

fn emit_rows(
    rows: &[TableRow],
    text: &str,
    format: RowFormat,
    out: &mut dyn Write,
) -> threeclass::Result<()> {
    match format {
        RowFormat::Table => write!(out, "{text}")?,
        RowFormat::Csv => write_rows_csv(rows, out)?,
        RowFormat::Json => writeln!(out, "{}", rows_to_json(rows)?)?,
    }
    Ok(())
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> threeclass::Result<()> {
    let mut scenarios = load_scenarios(&a.scenario)?;
    let from_file = Path::new(&a.scenario).is_file();
    for s in &mut scenarios {
        if a.scale.desk || a.scale.full || !from_file {
            a.scale.scale(Scale::Desk).apply(s);
        }
        if let Some(r) = a.reps {
            s.reps = r;
        }
        if let Some(b) = a.b {
            s.boot.b = b;
        }
        if let Some(seed) = a.seed {
            s.seed = seed;
        }
    }
    let parallel = !a.serial;
    match a.study {
        Study::Power => {
            for s in &scenarios {
                let rows = run_power_study(s, &s.power_statistics(), parallel)?;
                let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
                emit_rows(&power_rows_to_table(&rows), &text, a.out, out)?;
            }
        }
        Study::Bias => {
            let input = match a.bias_kernel {
                KernelInputArg::Raw => KernelInput::Raw,
                KernelInputArg::Boxcox => KernelInput::BoxCox,
            };
            let rows = run_bias_study(&scenarios, input, parallel)?;
            emit_rows(
                &bias_rows_to_table(&rows, "bias"),
                &format_bias_rows(&rows),
                a.out,
                out,
            )?;
        }
    }
    Ok(())
}

fn reproduce(a: ReproduceArgs, out: &mut dyn Write) -> threeclass::Result<()> {
    if a.list {
        for id in table_ids() {
            writeln!(out, "{id}")?;
        }
        return Ok(());
    }
    let id = a.table_id.expect("clap enforces the table id");
    let table = reproduce_table(&id, a.scale.scale(Scale::Desk), !a.serial)?;
    emit_rows(&table.rows, &table.text, a.out, out)
}

fn normality(a: NormalityArgs, out: &mut dyn Write) -> threeclass::Result<()> {
    let ds = a.input.load()?;
    let report = normality_report(&ds, a.threshold)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(out, "{:<12} {:>5} {:>8} {:>10}", "class", "n", "W", "p")?;
        for c in &report.classes {
            writeln!(
                out,
                "{:<12} {:>5} {:>8.4} {:>10.4}",
                c.label, c.n, c.w, c.p_value
            )?;
        }
        writeln!(
            out,
            "all classes normal at level {}: {}",
            report.threshold,
            if report.overall_normal { "yes" } else { "no" }
        )?;
    }
    if let Some(path) = a.density_grid {
        let rows = density_grid(&ds.sample, a.points)?;
        let file = std::fs::File::create(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_density_grid_csv(&rows, file)?;
    }
    Ok(())
}
