use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use shrinkage_ure::baseball::{self, EvalOptions, Group};
use shrinkage_ure::estimators::{FitOptions, Objective, ObjectiveKind};
use shrinkage_ure::regularity::check_regularity;
use shrinkage_ure::sim::{self, RunConfig, ScenarioSpec};
use shrinkage_ure::{Dataset, Error, Estimator, FamilyKind, Rule};

#[derive(Parser, Debug)]
#[command(name = "shrinkage-ure", version, about = "Shrinkage estimation via unbiased risk estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate risk curves for a simulation scenario.
    Simulate(SimulateArgs),
    /// Fit an estimator to a `y,tau` CSV file.
    Fit(FitArgs),
    /// Score estimators on half-season batting records.
    EvalBaseball(BaseballArgs),
    /// Report regularity conditions for a `y,tau` CSV file.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Points in the location grid of the semiparametric fit.
    #[arg(long, default_value_t = shrinkage_ure::estimators::DEFAULT_MU_GRID)]
    mu_grid_size: usize,
    /// Use the literally printed James-Stein form μ̂ + c·Y for `js`.
    #[arg(long)]
    js_literal: bool,
}

impl Common {
    fn fit_options(&self) -> FitOptions {
        FitOptions {
            mu_grid_size: self.mu_grid_size,
        }
    }

    fn resolve(&self, e: Estimator) -> Estimator {
        if self.js_literal && e == Estimator::JamesStein {
            Estimator::JamesSteinLiteral
        } else {
            e
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    scenario: String,
    /// Comma-separated dimensions.
    #[arg(long = "p", value_delimiter = ',', required = true)]
    p: Vec<usize>,
    #[arg(long, default_value_t = sim::DEFAULT_REPS)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated estimator names; defaults depend on the scenario family.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "SHRINKAGE_URE_THREADS")]
    threads: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV with header `y,tau`.
    #[arg(long)]
    input: PathBuf,
    /// binomial, poisson, neg-binomial, gamma:<alpha>, ghs:<alpha>, normal,
    /// laplace, logistic, t:<df>, uniform:<var>.
    #[arg(long)]
    family: String,
    #[arg(long)]
    method: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BaseballArgs {
    /// CSV with header `player,pitcher,H1,N1,H2,N2`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "all,pitchers,nonpitchers")]
    groups: Vec<String>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "naive,grand-mean,js,eb-mm,eb-ml,pg,pm,sg,sm"
    )]
    estimators: Vec<String>,
    /// Minimum at-bats in each half.
    #[arg(long, default_value_t = baseball::DEFAULT_MIN_N1)]
    min_n1: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    family: String,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OptimizationFailed(_) | Error::Io(_) => Failure::Runtime(e.into()),
            other => Failure::Usage(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_estimators(names: &[String], common: &Common) -> CliResult<Vec<Estimator>> {
    names
        .iter()
        .filter(|n| !n.trim().is_empty())
        .map(|n| Ok(common.resolve(n.parse::<Estimator>()?)))
        .collect()
}

fn open_output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_input(path: &Path, family: FamilyKind) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| Failure::Usage(anyhow::anyhow!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(Error::from)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Usage(anyhow::anyhow!("{}: missing column '{name}'", path.display())))
    };
    let (iy, it) = (col("y")?, col("tau")?);
    let mut y = Vec::new();
    let mut tau = Vec::new();
    for row in reader.records() {
        let row = row.map_err(Error::from)?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> CliResult<f64> {
            row.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::Parse {
                    line,
                    message: format!("{name}: {e}"),
                }
                .into())
        };
        y.push(field(iy, "y")?);
        tau.push(field(it, "tau")?);
    }
    Ok(Dataset::new(y, tau, family)?)
}

fn default_estimators(spec: &ScenarioSpec) -> Vec<Estimator> {
    if spec.family.is_location_scale() {
        vec![Estimator::Naive, Estimator::JamesStein, Estimator::Semi]
    } else {
        vec![
            Estimator::Oracle,
            Estimator::Semi,
            Estimator::SemiGrand,
            Estimator::Param,
            Estimator::ParamGrand,
            Estimator::EbMm,
            Estimator::EbMl,
        ]
    }
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let spec = ScenarioSpec::by_id(&args.scenario)?;
    let estimators = match &args.estimators {
        Some(names) => parse_estimators(names, &args.common)?,
        None => default_estimators(&spec).into_iter().map(|e| args.common.resolve(e)).collect(),
    };
    if args.threads == Some(0) {
        return Err(Error::InvalidArgument("--threads must be at least 1".into()).into());
    }
    let mut config = RunConfig::new(args.p.clone(), args.reps, args.seed, estimators);
    config.fit_options = args.common.fit_options();
    config.threads = args.threads;
    let report = sim::run_scenario(&spec, &config)?;
    let mut out = open_output(&args.out)?;
    sim::write_csv(&report, &mut out)?;
    out.flush().context("cannot write output")?;
    Ok(())
}

fn fmt_objective(obj: &Objective) -> String {
    let kind = match obj.kind {
        ObjectiveKind::Ure => "ure",
        ObjectiveKind::UreGrand => "ure-grand",
        ObjectiveKind::UreParam => "ure-param",
        ObjectiveKind::UreParamGrand => "ure-param-grand",
        ObjectiveKind::OracleRisk => "oracle-risk",
    };
    format!("{kind},{}", obj.value)
}

fn fit(args: FitArgs) -> CliResult<()> {
    let family: FamilyKind = args.family.parse()?;
    let estimator = args.common.resolve(args.method.parse()?);
    let data = read_input(&args.input, family)?;
    let result = estimator.fit(&data, None, &args.common.fit_options())?;
    let mut out = open_output(&args.out)?;
    let b: Option<Vec<f64>> = match &result.rule {
        Rule::Identity => Some(vec![0.0; data.len()]),
        Rule::Semi(r) => Some(r.b.clone()),
        Rule::Param(r) => Some(r.induced_b(data.tau())),
        Rule::ShiftScale { .. } => None,
    };
    let mut text = format!("# method,{estimator}\n# family,{family}\n");
    match &result.rule {
        Rule::Identity => {}
        Rule::Semi(r) => text += &format!("# mu,{}\n", r.mu),
        Rule::Param(r) => text += &format!("# mu,{}\n# gamma,{}\n", r.mu, r.gamma),
        Rule::ShiftScale { shift, scale } => text += &format!("# shift,{shift}\n# scale,{scale}\n"),
    }
    if let Some(obj) = &result.objective {
        text += &format!("# objective,{}\n", fmt_objective(obj));
    }
    text += "index,y,tau,estimate,b\n";
    for i in 0..data.len() {
        let bi = b.as_ref().map(|b| b[i].to_string()).unwrap_or_default();
        text += &format!("{i},{},{},{},{bi}\n", data.y()[i], data.tau()[i], result.estimates[i]);
    }
    out.write_all(text.as_bytes()).context("cannot write output")?;
    out.flush().context("cannot write output")?;
    Ok(())
}

fn eval_baseball(args: BaseballArgs) -> CliResult<()> {
    let groups: Vec<Group> = args
        .groups
        .iter()
        .map(|g| g.parse::<Group>())
        .collect::<Result<_, _>>()?;
    let estimators = parse_estimators(&args.estimators, &args.common)?;
    let records = baseball::load_records(&args.input).map_err(|e| match e {
        Error::Io(msg) => Failure::Usage(anyhow::anyhow!("cannot read {}: {msg}", args.input.display())),
        other => other.into(),
    })?;
    let opts = EvalOptions {
        min_n1: args.min_n1,
        fit: args.common.fit_options(),
    };
    let rows = baseball::evaluate(&records, &groups, &estimators, &opts)?;
    let mut out = open_output(&args.out)?;
    baseball::write_ratio_table(&rows, &mut out)?;
    out.flush().context("cannot write output")?;
    Ok(())
}

fn check(args: CheckArgs) -> CliResult<()> {
    let family: FamilyKind = args.family.parse()?;
    let data = read_input(&args.input, family)?;
    let report = check_regularity(&data);
    print!("{report}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::EvalBaseball(a) => eval_baseball(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
