use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bumpmoment::catalog;
use bumpmoment::certify::{archimedean_check, certify, DEFAULT_TOL};
use bumpmoment::decompose::{
    decompose, lambda_from, verify_lambda, FunctionalSource, LambdaTolerance,
};
use bumpmoment::formats;
use bumpmoment::measures::{Measure, Moments};
use bumpmoment::sampling::{support_points, to_csv, SamplingSpec};
use bumpmoment::scenario::Scenario;
use bumpmoment::sosearch::{find_certificate, verify_certificate, SearchOptions, SearchOutcome};

const DEFAULT_SOS_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "bumpmoment",
    version,
    about = "Moment problems on curves with bumps"
)]
struct Cli {
    /// Numerical tolerance (certify: PSD tolerance, default 1e-8; sos: residual, default 1e-6)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Random seed (sos: random PSD starting point)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScenarioArgs {
    /// Shipped scenario by name (see `catalog list`)
    #[arg(long)]
    catalog: Option<String>,
    /// Scenario JSON file
    #[arg(long)]
    scenario_file: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        if let Some(name) = &self.catalog {
            let entry = catalog::lookup(name).with_context(|| {
                format!(
                    "unknown catalog entry {name:?}; available: {}",
                    catalog::names().join(", ")
                )
            })?;
            return Ok(entry.scenario);
        }
        let path = self
            .scenario_file
            .as_ref()
            .expect("clap enforces one of the two");
        formats::scenario_from_json(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Moments of a measure up to a given order
    Moments {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        order: u32,
        /// Write the sequence here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a truncated sequence against the enhanced module
    Certify {
        #[arg(long)]
        sequence: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Split a measure (or a raw sequence with a given bump measure) into curve and bump parts
    Decompose {
        #[arg(long, conflicts_with = "sequence")]
        measure: Option<PathBuf>,
        /// Order of the moments to compare (measure input)
        #[arg(long, default_value_t = 4)]
        order: u32,
        /// Raw sequence input; needs --nu
        #[arg(long, requires = "nu")]
        sequence: Option<PathBuf>,
        /// Bump measure for raw sequence input
        #[arg(long)]
        nu: Option<PathBuf>,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Directory for nu.json, sigma.json and lambda.json
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Search for a sum-of-squares certificate of module membership
    Sos {
        /// Polynomial JSON file
        #[arg(long)]
        poly: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        degree_bound: u32,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        /// Write the certificate here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid points labelled curve / bump / outside, as CSV
    SupportPoints {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        /// `lo,hi` for every axis, or `lo1,hi1,lo2,hi2,...`
        #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
        bbox: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shipped scenarios
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Names and descriptions
    List,
    /// Print an entry as a scenario file
    Show { name: String },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_bbox(text: &str, dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let vals = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("bad --bbox {text:?}"))?;
    match vals.len() {
        2 => Ok((vec![vals[0]; dim], vec![vals[1]; dim])),
        n if n == 2 * dim => Ok(vals.chunks(2).map(|c| (c[0], c[1])).unzip()),
        n => bail!("--bbox needs 2 or {} numbers, got {n}", 2 * dim),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Moments {
            measure,
            order,
            out,
        } => {
            let mu = formats::measure_from_json(&read(&measure)?)?;
            let s = mu.moments(order)?;
            emit(&formats::sequence_to_json(&s), out.as_deref())?;
            Ok(0)
        }
        Command::Certify { sequence, scenario } => {
            let s = formats::sequence_from_json(&read(&sequence)?)?;
            let scenario = scenario.load()?;
            let report = certify(&s, &scenario, cli.tol.unwrap_or(DEFAULT_TOL))?;
            print!("{report}");
            println!("# {}", archimedean_check(&scenario));
            Ok(report.exit_code() as u8)
        }
        Command::Decompose {
            measure,
            order,
            sequence,
            nu,
            scenario,
            out_dir,
        } => {
            let scenario = scenario.load()?;
            let audit_tol = bumpmoment::measures::DEFAULT_AUDIT_TOL;
            fs::create_dir_all(&out_dir)?;
            let write = |name: &str, text: String| emit(&text, Some(&out_dir.join(name)));
            let report = match (measure, sequence, nu) {
                (Some(m), None, _) => {
                    let mu = formats::measure_from_json(&read(&m)?)?;
                    let d = decompose(&mu, &scenario, order, audit_tol)?;
                    write(
                        "nu.json",
                        formats::measure_to_json(&Measure::from(d.nu.clone())),
                    )?;
                    write("sigma.json", formats::measure_to_json(&d.sigma))?;
                    write("lambda.json", formats::sequence_to_json(&d.lambda))?;
                    println!("reconstruction error {:.6e}", d.reconstruction_error);
                    d.report
                }
                (None, Some(sp), Some(np)) => {
                    let l = formats::sequence_from_json(&read(&sp)?)?;
                    let nu = formats::measure_from_json(&read(&np)?)?;
                    if !nu.curves().is_empty() {
                        bail!("--nu must be an atomic measure");
                    }
                    let lambda = lambda_from(&l, nu.atomic(), scenario.q(), audit_tol)?;
                    let tol = LambdaTolerance {
                        scale: Some(1.0 + l.max_abs()),
                        ..LambdaTolerance::default()
                    };
                    let mut report = verify_lambda(&lambda, scenario.q(), &tol)?;
                    report.source = FunctionalSource::RawSequence;
                    write("lambda.json", formats::sequence_to_json(&lambda))?;
                    report
                }
                _ => bail!("give either --measure or --sequence with --nu"),
            };
            print!("{report}");
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Sos {
            poly,
            scenario,
            degree_bound,
            max_iters,
            out,
        } => {
            let scenario = scenario.load()?;
            let p = formats::polynomial_from_json(&read(&poly)?, scenario.dim())?;
            let tol = cli.tol.unwrap_or(DEFAULT_SOS_TOL);
            let opts = SearchOptions {
                degree_bound,
                max_iters,
                tol,
                seed: cli.seed,
            };
            match find_certificate(&p, &scenario, &opts)? {
                SearchOutcome::Found(c) => {
                    let v = verify_certificate(&c, &p, &scenario, tol)?;
                    emit(&formats::certificate_to_json(&c), out.as_deref())?;
                    eprint!("{c}");
                    eprintln!(
                        "verified: {} (residual {:e}, all blocks PSD: {})",
                        v.valid, v.residual, v.all_psd
                    );
                    Ok(if v.valid { 0 } else { 1 })
                }
                SearchOutcome::NotFound {
                    iterations,
                    residual,
                } => {
                    eprintln!("no certificate found after {iterations} iterations (residual {residual:e})");
                    Ok(1)
                }
            }
        }
        Command::SupportPoints {
            scenario,
            grid_step,
            bbox,
            out,
        } => {
            let scenario = scenario.load()?;
            let (lo, hi) = parse_bbox(&bbox, scenario.dim())?;
            let spec = SamplingSpec::new(lo, hi, grid_step)?;
            let pts = support_points(&scenario, &spec)?;
            emit(&to_csv(&pts), out.as_deref())?;
            Ok(0)
        }
        Command::Catalog { action } => {
            match action {
                CatalogAction::List => {
                    for e in catalog::catalog() {
                        println!("{:<10} {}", e.name, e.description);
                    }
                }
                CatalogAction::Show { name } => {
                    let e = catalog::lookup(&name)
                        .with_context(|| format!("unknown catalog entry {name:?}"))?;
                    print!("{}", formats::scenario_to_json(&e.scenario));
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
