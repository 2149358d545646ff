//! Command-line surface, validated experiment configuration and dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use selfish_cc_core::demands::{circular_demand, enumerate_circular_demands, UserPermutation};
use selfish_cc_core::fds::ensure_valid;
use selfish_cc_core::oracle::alpha_demand_with_acyclic_outside;
use selfish_cc_core::{Demand, Error, FdsStructure, Rational, UserSet, DEFAULT_CAP};

use crate::commands::{self, Scenario, SchemeKind, VerifyOptions};
use crate::decimal::{parse_rational, DEFAULT_PRECISION};
use crate::schemefile::{format_scheme, parse_users};
use crate::sweep::par_chunks;
use crate::table::{Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "selfish-cc", version, about = "Selfish coded caching: bounds, schemes and exhaustive checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format; `demo` prints text unless `json` is asked for.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Significant digits in decimal renderings.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Whitespace-separated columns with a `#` header.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    /// Maximum number of items an enumeration may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    /// Number of users.
    #[arg(long = "K")]
    pub k: u32,
    /// Users per class.
    #[arg(long)]
    pub alpha: u32,
    /// Files per class.
    #[arg(long, default_value_t = 1)]
    pub f: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Memory-load trade-off table for t = 0..=K.
    Tradeoff(StructureArgs),
    /// Coding-gain bounds over a grid of K at fixed gamma = M/N.
    Gains {
        /// Normalised memory, e.g. `1/20` or `0.05`.
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value_t = 20)]
        k_min: u32,
        #[arg(long, default_value_t = 400)]
        k_max: u32,
        #[arg(long, default_value_t = 20)]
        k_step: u32,
    },
    /// Build and check a delivery scheme for one demand.
    Demo {
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
        #[arg(long = "K")]
        k: Option<u32>,
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long, default_value_t = 1)]
        f: u32,
        #[arg(long)]
        t: Option<u32>,
        /// Which demand to run; `explicit` takes `--demand`.
        #[arg(long, value_enum)]
        demands: Option<DemandSelectorArg>,
        /// Requested classes, comma separated, e.g. `1234,2345,1345,1245,1235`.
        #[arg(long)]
        demand: Option<String>,
        /// Requested file indices, comma separated; defaults to all 1.
        #[arg(long)]
        files: Option<String>,
        /// Also write the scheme in text form to this file.
        #[arg(long)]
        scheme_out: Option<PathBuf>,
    },
    /// Exhaustive and sampled checks on one structure.
    Verify {
        #[command(flatten)]
        structure: StructureArgs,
        /// Random memory values for the LP comparison.
        #[arg(long, default_value_t = 100)]
        lp_samples: usize,
    },
    /// Closed-form and enumerated counts.
    Count(StructureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DemandSelectorArg {
    /// The circular demand of the identity ordering, all file indices 1.
    CanonicalCircular,
    /// Every circular demand, one summary line each.
    AllCircular,
    /// The alpha-demand on users 1..=alpha with an acyclic outside.
    AlphaDemand,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandSelector {
    CanonicalCircular,
    AllCircular,
    AlphaDemand,
    Explicit(#[serde(serialize_with = "ser_display")] Demand),
}

/// A validated experiment, ready to run.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    Tradeoff {
        #[serde(serialize_with = "ser_structure")]
        structure: FdsStructure,
    },
    Gains {
        #[serde(serialize_with = "ser_rational")]
        gamma: Rational,
        grid: Vec<u32>,
    },
    Demo {
        #[serde(serialize_with = "ser_structure")]
        structure: FdsStructure,
        t: u32,
        demands: DemandSelector,
        scheme_out: Option<PathBuf>,
    },
    Verify {
        #[serde(serialize_with = "ser_structure")]
        structure: FdsStructure,
        lp_samples: usize,
    },
    Count {
        #[serde(serialize_with = "ser_structure")]
        structure: FdsStructure,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(skip)]
    pub format: Option<Format>,
    pub precision: usize,
    pub out: Option<PathBuf>,
    pub gnuplot: bool,
    pub cap: u64,
    pub seed: u64,
}

fn ser_structure<S: serde::Serializer>(s: &FdsStructure, ser: S) -> Result<S::Ok, S::Error> {
    [s.users(), s.alpha(), s.files_per_class()].serialize(ser)
}

fn ser_rational<S: serde::Serializer>(r: &Rational, ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_str(r)
}

fn ser_display<S: serde::Serializer>(d: &Demand, ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_str(d)
}

fn structure(args: &StructureArgs) -> Result<FdsStructure> {
    Ok(FdsStructure::new(args.k, args.alpha, args.f)?)
}

fn parse_list<T>(text: &str, what: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',').map(|p| parse(p.trim()).with_context(|| format!("bad {what} entry {p:?}"))).collect()
}

impl ExperimentConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let o = cli.output;
        ensure!(o.precision >= 1, "precision must be at least 1");
        ensure!(o.cap >= 1, "cap must be at least 1");
        let experiment = match cli.command {
            Command::Tradeoff(a) => Experiment::Tradeoff { structure: structure(&a)? },
            Command::Count(a) => Experiment::Count { structure: structure(&a)? },
            Command::Verify { structure: a, lp_samples } => {
                Experiment::Verify { structure: structure(&a)?, lp_samples }
            }
            Command::Gains { gamma, k_min, k_max, k_step } => {
                let gamma = parse_rational(&gamma).with_context(|| format!("cannot parse gamma {gamma:?}"))?;
                ensure!((Rational::ZERO..=Rational::ONE).contains(&gamma), "gamma must lie in [0, 1]");
                ensure!(k_min >= 1 && k_step >= 1 && k_min <= k_max, "empty K grid");
                let grid = (k_min..=k_max).step_by(k_step as usize).collect();
                Experiment::Gains { gamma, grid }
            }
            Command::Demo { scenario, k, alpha, f, t, demands, demand, files, scheme_out } => {
                let (structure, t, demands) = if let Some(sc) = scenario {
                    ensure!(
                        k.is_none() && alpha.is_none() && t.is_none() && demands.is_none() && demand.is_none(),
                        "--scenario fixes the structure, t and the demand"
                    );
                    let (s, t, dm) = sc.instance();
                    (s, t, DemandSelector::Explicit(dm))
                } else {
                    let (Some(k), Some(alpha), Some(t)) = (k, alpha, t) else {
                        bail!("demo needs --scenario, or --K, --alpha and --t");
                    };
                    let s = FdsStructure::new(k, alpha, f)?;
                    ensure!(t <= alpha, "t must not exceed alpha");
                    let selector = match (demands, demand) {
                        (None | Some(DemandSelectorArg::Explicit), Some(text)) => {
                            let classes = parse_list(&text, "demand", parse_users)?;
                            let indices = match files {
                                Some(text) => parse_list(&text, "files", |p| Ok(p.parse::<u32>()?))?,
                                None => vec![1; classes.len()],
                            };
                            let dm = Demand::new(classes, indices)?;
                            ensure_valid(&s, &dm)?;
                            DemandSelector::Explicit(dm)
                        }
                        (Some(DemandSelectorArg::Explicit) | None, None) => bail!("explicit demands need --demand"),
                        (Some(_), Some(_)) => bail!("--demand only goes with --demands explicit"),
                        (Some(DemandSelectorArg::CanonicalCircular), None) => DemandSelector::CanonicalCircular,
                        (Some(DemandSelectorArg::AllCircular), None) => DemandSelector::AllCircular,
                        (Some(DemandSelectorArg::AlphaDemand), None) => DemandSelector::AlphaDemand,
                    };
                    (s, t, selector)
                };
                ensure!(
                    scheme_out.is_none() || matches!(demands, DemandSelector::Explicit(_) | DemandSelector::CanonicalCircular | DemandSelector::AlphaDemand),
                    "--scheme-out needs a single demand"
                );
                Experiment::Demo { structure, t, demands, scheme_out }
            }
        };
        Ok(ExperimentConfig {
            experiment,
            format: o.format,
            precision: o.precision,
            out: o.out,
            gnuplot: o.gnuplot,
            cap: o.cap,
            seed: o.seed,
        })
    }

    /// Advisory notes for the user, printed to stderr by the binary.
    pub fn warnings(&self) -> Vec<String> {
        let s = match &self.experiment {
            Experiment::Tradeoff { structure }
            | Experiment::Count { structure }
            | Experiment::Verify { structure, .. }
            | Experiment::Demo { structure, .. } => structure,
            Experiment::Gains { .. } => return Vec::new(),
        };
        let mut out = Vec::new();
        if s.alpha() == s.users() && s.files_per_class() < s.users() {
            out.push(format!(
                "alpha = K: a single class of {} files shared by everyone, so no demand has distinct files for all users",
                s.files_per_class()
            ));
        }
        out
    }
}

fn table_format(cfg: &ExperimentConfig) -> Format {
    cfg.format.unwrap_or(Format::Csv)
}

/// Runs the experiment, writing to `--out` or `stdout`, and returns the exit
/// code.
pub fn run(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<i32> {
    let mut file;
    let out: &mut dyn Write = match &cfg.out {
        Some(path) => {
            file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            &mut file
        }
        None => stdout,
    };
    let code = execute(cfg, out)?;
    out.flush()?;
    Ok(code)
}

fn execute(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<i32> {
    let p = cfg.precision;
    match &cfg.experiment {
        Experiment::Tradeoff { structure } => {
            commands::tradeoff(structure)?.write(out, table_format(cfg), p, cfg.gnuplot)?;
            Ok(EXIT_OK)
        }
        Experiment::Gains { gamma, grid } => {
            commands::gains(*gamma, grid)?.write(out, table_format(cfg), p, cfg.gnuplot)?;
            Ok(EXIT_OK)
        }
        Experiment::Count { structure } => {
            commands::count(structure, cfg.cap)?.write(out, table_format(cfg), p, cfg.gnuplot)?;
            Ok(EXIT_OK)
        }
        Experiment::Demo { structure, t, demands, scheme_out } => {
            let single = match demands {
                DemandSelector::Explicit(dm) => dm.clone(),
                DemandSelector::CanonicalCircular => {
                    circular_demand(structure, &UserPermutation::identity(structure.users()), vec![1; structure.users() as usize])?
                }
                DemandSelector::AlphaDemand => {
                    let a = structure.alpha();
                    alpha_demand_with_acyclic_outside(structure, UserSet::first(a), UserSet::first(a - 1))?
                }
                DemandSelector::AllCircular => return demo_all(cfg, structure, *t, out),
            };
            let report = commands::demo(structure, *t, &single)?;
            if cfg.format == Some(Format::Json) {
                serde_json::to_writer_pretty(&mut *out, &report.to_json(p))?;
                writeln!(out)?;
            } else {
                write!(out, "{}", report.render_text(p))?;
            }
            if let Some(path) = scheme_out {
                std::fs::write(path, format_scheme(&report.scheme))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Experiment::Verify { structure, lp_samples } => {
            let opts = VerifyOptions { cap: cfg.cap, seed: cfg.seed, lp_samples: *lp_samples };
            let report = commands::verify(structure, opts);
            if cfg.format == Some(Format::Json) && !cfg.gnuplot {
                let value = serde_json::json!({ "config": cfg, "report": report });
                serde_json::to_writer_pretty(&mut *out, &value)?;
                writeln!(out)?;
            } else {
                report.table().write(out, table_format(cfg), p, cfg.gnuplot)?;
            }
            Ok(if report.any_failed() {
                EXIT_VERIFY_FAILED
            } else if report.any_cap_exceeded() {
                EXIT_CAP
            } else {
                EXIT_OK
            })
        }
    }
}

fn demo_all(cfg: &ExperimentConfig, s: &FdsStructure, t: u32, out: &mut dyn Write) -> Result<i32> {
    let demands: Vec<Demand> = enumerate_circular_demands(s, cfg.cap)?.map(|(dm, _)| dm).collect();
    let reports = par_chunks(&demands, |chunk| {
        chunk.iter().map(|dm| commands::demo(s, t, dm)).collect::<Result<Vec<_>>>()
    });
    let mut table = Table::new(&["demand", "scheme", "load", "bound", "decodable", "tight"]);
    let mut all_pass = true;
    for chunk in reports {
        for r in chunk? {
            all_pass &= r.passed();
            let kind = match r.kind {
                SchemeKind::AlphaDemand { .. } => "alpha-demand",
                SchemeKind::Circular { .. } => "circular",
                SchemeKind::Uncoded => "uncoded",
            };
            table.push(vec![
                Cell::Text(r.demand.to_string()),
                Cell::from(kind),
                Cell::from(r.load),
                Cell::from(r.bound),
                Cell::from(r.decoding.decodable_count() as u128),
                Cell::from(if r.tight() { "yes" } else { "no" }),
            ]);
        }
    }
    table.write(out, table_format(cfg), cfg.precision, cfg.gnuplot)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Exit code for an error raised while configuring or running.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::CapExceeded { .. }) => EXIT_CAP,
        _ => EXIT_INVALID,
    }
}
