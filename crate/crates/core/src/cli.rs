//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on input, schema, partition or parameter
//! errors, 3 when estimation hits a degenerate tail-ratio system, 1 when the
//! output cannot be written.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{ingest_csv, LabelSet, Partition, Sample, TuningConstants};
use crate::error::{Error, Result};
use crate::mixture::{
    component_cdf_one_sided, component_cdfs, lambda_hat, ComponentCdfEstimate, ComponentCurve, EstimationOptions,
    MixingProportionEstimate,
};
use crate::monte_carlo::{published_designs, run_study, DesignSpec, StudyReport, CSV_HEADER};
use crate::skew_normal::SkewNormalParams;
use crate::spec_test::{run_spec_test, Component, SpecTestResult, Weight};
use crate::tail_ratio::TailSide;

#[derive(Debug, Parser)]
#[command(name = "tailmix", version, about = "Two-component mixture inference from tail ratios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mixing proportions for every label and component CDFs for a partition.
    Estimate(EstimateArgs),
    /// Over-identification test on a three-set partition.
    Spectest(SpecTestArgs),
    /// Skew-normal Monte Carlo study.
    Simulate(SimulateArgs),
    /// Skew-normal density, CDF and moments.
    Dist(DistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Uniform,
    Central,
    Gauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComponentArg {
    G,
    H,
    Both,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "y-col", default_value = "y")]
    pub y_col: String,
    #[arg(long = "x-col", default_value = "x")]
    pub x_col: String,
    /// Tuning constant of the cut rule.
    #[arg(long = "c", default_value_t = 0.5)]
    pub c: f64,
    /// Minimum number of observations in every subset.
    #[arg(long = "min-subset", default_value_t = 50)]
    pub min_subset: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `A|B`, each a comma-separated label list.
    #[arg(long)]
    pub partitions: Option<String>,
    #[arg(long = "one-sided", value_enum)]
    pub one_sided: Option<Side>,
    #[arg(long = "parallel-grid")]
    pub parallel_grid: bool,
    /// Sort component estimates along the grid.
    #[arg(long)]
    pub rearrange: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpecTestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `A|B|C`, each a comma-separated label list.
    #[arg(long)]
    pub partitions: String,
    #[arg(long, value_enum, default_value_t = WeightArg::Uniform)]
    pub weight: WeightArg,
    #[arg(long, value_enum, default_value_t = ComponentArg::Both)]
    pub component: ComponentArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1_000)]
    pub reps: usize,
    #[arg(long = "c", default_value_t = 0.5)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also produce figure grids for `G_n` and `H_n`.
    #[arg(long)]
    pub figures: bool,
    /// Run every published design instead of the one given by the flags.
    #[arg(long = "full-study")]
    pub full_study: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    pub at: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a subcommand together with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_degenerate() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn write_output(out: Option<&Path>, body: &str) -> std::result::Result<(), Failure> {
    let res = match out {
        Some(p) => std::fs::write(p, body),
        None => std::io::stdout().write_all(body.as_bytes()),
    };
    res.map_err(|e| Failure {
        code: 1,
        message: format!("cannot write output: {e}"),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load(input: &InputArgs) -> Result<(Sample, TuningConstants, EstimationOptions)> {
    let tuning = TuningConstants::new(input.c)?;
    let sample = ingest_csv(&input.input, &input.y_col, &input.x_col)?;
    let opts = EstimationOptions {
        min_subset_size: input.min_subset,
        ..Default::default()
    };
    Ok((sample, tuning, opts))
}

#[derive(Debug, Serialize)]
struct EstimateReport {
    n: usize,
    tuning: TuningConstants,
    lambdas: Vec<MixingProportionEstimate>,
    components: ComponentCdfEstimate,
}

fn grid_csv(est: &ComponentCdfEstimate) -> String {
    let mut cols = vec!["y".to_string()];
    let curves: Vec<(&str, &ComponentCurve)> = [("g", est.g.as_ref()), ("h", est.h.as_ref())]
        .into_iter()
        .filter_map(|(n, c)| c.map(|c| (n, c)))
        .collect();
    for (name, _) in &curves {
        for suffix in ["", "_se", "_low", "_high"] {
            cols.push(format!("{name}{suffix}"));
        }
    }
    let mut out = cols.join(",");
    out.push('\n');
    for (i, y) in est.grid.iter().enumerate() {
        out.push_str(&y.to_string());
        for (_, c) in &curves {
            for v in [c.values[i], c.se[i], c.band_low[i], c.band_high[i]] {
                out.push(',');
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

fn lambda_table(lambdas: &[MixingProportionEstimate]) -> String {
    let mut out = format!(
        "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}\n",
        "x", "lambda", "se", "ci_low", "ci_high", "n_x", "iota"
    );
    for l in lambdas {
        out.push_str(&format!(
            "{:<12} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8} {:>6}\n",
            l.x, l.lambda_hat, l.se, l.ci_low, l.ci_high, l.n_x, l.iota
        ));
    }
    out
}

pub fn cmd_estimate(args: &EstimateArgs) -> std::result::Result<(), Failure> {
    let (sample, tuning, mut opts) = load(&args.input)?;
    opts.parallel_grid = args.parallel_grid;
    opts.rearrange = args.rearrange;
    if sample.labels().len() < 2 {
        return Err(Error::Partition(format!(
            "the instrument takes a single value ({}); at least two labels are needed",
            sample.labels()[0]
        ))
        .into());
    }
    let partition = match &args.partitions {
        Some(spec) => Partition::parse(spec)?,
        None if sample.labels().len() == 2 => Partition::two(
            LabelSet::single(&sample.labels()[0]),
            LabelSet::single(&sample.labels()[1]),
        ),
        None => {
            return Err(Error::Partition(format!(
                "{} labels present; pass --partitions \"A|B\" for the component estimates",
                sample.labels().len()
            ))
            .into())
        }
    };
    if partition.c.is_some() {
        return Err(Error::Partition("estimate takes a two-set partition A|B".into()).into());
    }
    let lambdas = sample
        .labels()
        .iter()
        .map(|x| lambda_hat(&sample, x, &tuning, &opts))
        .collect::<Result<Vec<_>>>()?;
    let components = match args.one_sided {
        None => component_cdfs(&sample, &partition.a, &partition.b, &tuning, None, &opts)?,
        Some(side) => {
            let side = match side {
                Side::Left => TailSide::Left,
                Side::Right => TailSide::Right,
            };
            component_cdf_one_sided(&sample, &partition.a, &partition.b, &tuning, side, None, &opts)?
        }
    };
    let body = match args.output.format {
        Format::Json => to_json(&EstimateReport {
            n: sample.len(),
            tuning,
            lambdas: lambdas.clone(),
            components: components.clone(),
        }),
        Format::Csv => grid_csv(&components),
    };
    write_output(args.output.out.as_deref(), &body)?;
    if args.output.out.is_some() {
        print!("{}", lambda_table(&lambdas));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpecTestReport {
    n: usize,
    tuning: TuningConstants,
    weight: Weight,
    results: Vec<SpecTestResult>,
}

pub fn cmd_spectest(args: &SpecTestArgs) -> std::result::Result<(), Failure> {
    let (sample, tuning, opts) = load(&args.input)?;
    let partition = Partition::parse(&args.partitions)?;
    if partition.c.is_none() {
        return Err(Error::Partition("the specification test needs three label sets A|B|C".into()).into());
    }
    let weight = match args.weight {
        WeightArg::Uniform => Weight::Uniform,
        WeightArg::Central => Weight::central(),
        WeightArg::Gauss => Weight::gauss(),
    };
    let w = weight.bind(&sample);
    let comps: &[Component] = match args.component {
        ComponentArg::G => &[Component::G],
        ComponentArg::H => &[Component::H],
        ComponentArg::Both => &[Component::G, Component::H],
    };
    let results = comps
        .iter()
        .map(|&c| run_spec_test(&sample, &partition, &tuning, &*w, c, &opts))
        .collect::<Result<Vec<_>>>()?;
    let body = match args.output.format {
        Format::Json => to_json(&SpecTestReport {
            n: sample.len(),
            tuning,
            weight,
            results: results.clone(),
        }),
        Format::Csv => {
            let mut s = String::from("component,statistic,p_value,weighted_diff,variance_hat,scale_count\n");
            for r in &results {
                s.push_str(&format!(
                    "{:?},{},{},{},{},{}\n",
                    r.component, r.statistic, r.p_value, r.weighted_diff, r.variance_hat, r.scale_count
                ));
            }
            s
        }
    };
    write_output(args.output.out.as_deref(), &body)?;
    if args.output.out.is_some() {
        for r in &results {
            println!("{:?}: statistic = {:.4}, p-value = {:.4}", r.component, r.statistic, r.p_value);
        }
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> std::result::Result<(), Failure> {
    let designs = if args.full_study {
        published_designs(args.reps, args.seed)?
    } else {
        let mut d = DesignSpec::new(args.mu, args.beta, args.c, args.n, args.reps, args.seed)?;
        d.sigma = args.sigma;
        d.validate()?;
        vec![d]
    };
    let designs: Vec<DesignSpec> = designs
        .into_iter()
        .map(|mut d| {
            d.figures = args.figures;
            d
        })
        .collect();
    let mut reports: Vec<StudyReport> = Vec::with_capacity(designs.len());
    for d in &designs {
        reports.push(run_study(d)?);
    }
    let body = match args.output.format {
        Format::Json if reports.len() == 1 => to_json(&reports[0]),
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in &reports {
                for row in r.csv_rows() {
                    s.push_str(&row);
                    s.push('\n');
                }
            }
            s
        }
    };
    write_output(args.output.out.as_deref(), &body)?;
    for r in &reports {
        if args.output.out.is_some() {
            print!("{}", r.table());
        } else {
            eprint!("{}", r.table());
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct DistPoint {
    y: f64,
    pdf: f64,
    cdf: f64,
}

#[derive(Debug, Serialize)]
struct DistReport {
    params: SkewNormalParams,
    mean: f64,
    variance: f64,
    points: Vec<DistPoint>,
}

pub fn cmd_dist(args: &DistArgs) -> std::result::Result<(), Failure> {
    let p = SkewNormalParams::new(args.mu, args.sigma, args.beta)?;
    let (mean, variance) = p.moments();
    let points: Vec<DistPoint> = args
        .at
        .iter()
        .map(|&y| DistPoint {
            y,
            pdf: p.pdf(y),
            cdf: p.cdf(y),
        })
        .collect();
    let body = match args.output.format {
        Format::Json => to_json(&DistReport {
            params: p,
            mean,
            variance,
            points,
        }),
        Format::Csv => {
            let mut s = String::from("y,pdf,cdf\n");
            for pt in &points {
                s.push_str(&format!("{},{},{}\n", pt.y, pt.pdf, pt.cdf));
            }
            s
        }
    };
    write_output(args.output.out.as_deref(), &body)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let res = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Spectest(a) => cmd_spectest(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Dist(a) => cmd_dist(a),
    };
    match res {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
