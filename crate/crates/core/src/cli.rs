//! Command-line front end. [`run`] parses arguments, writes results to the
//! given writers and returns the process exit code: 0 on success, 1 for
//! usage and configuration errors, 2 for data and validation errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bits::BitVector;
use crate::datagen::{planted_dataset_with, traffic_dataset, RandomWalk};
use crate::domains::DomainConfig;
use crate::enumerate::{formula_space, prune, shift_wrap};
use crate::eval::{frame_label_vector, Metrics};
use crate::parse::{parse_formula, parse_formula_unchecked, ParseError};
use crate::search::parameter_synthesis;
use crate::synthesis::{formula_synthesis, SynthesisError};
use crate::template::{Template, TemplateError};
use crate::trace::{load_dataset, write_dataset, Dataset};

#[derive(Debug, Parser)]
#[command(name = "ptstl", version, about = "Mine past-time STL formulas from labeled traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a formula on a dataset and print its metrics as JSON.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        formula: String,
        /// Write `trace,t,label` rows with the formula's labels.
        #[arg(long)]
        labels_out: Option<PathBuf>,
        /// Write `trace,t,label,formula` rows for plotting.
        #[arg(long)]
        report_plot_data: Option<PathBuf>,
    },
    /// Fit the parameters of one template and print the result as JSON.
    Optimize {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        template: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        fp_bound: u64,
    },
    /// Print the template space, one template per line.
    Enumerate {
        /// Comma-separated variable names.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        max_ops: usize,
        #[arg(long)]
        shift: Option<u32>,
        #[arg(long)]
        prune: bool,
    },
    /// Search a template space for a disjunction matching the labels.
    Synthesize {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        fp_bound: u64,
        #[arg(long)]
        max_disjuncts: usize,
        #[arg(long, conflicts_with = "templates")]
        max_ops: Option<usize>,
        /// File with one template per line; `#` starts a comment.
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        shift: Option<u32>,
        #[arg(long)]
        prune: bool,
        /// Overrides the worker count of the config file.
        #[arg(long)]
        workers: Option<usize>,
        /// Write the human-readable report here instead of standard error.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a synthetic dataset as CSV.
    #[command(subcommand)]
    Gen(Gen),
}

#[derive(Debug, Args)]
struct GenCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    traces: usize,
    #[arg(long)]
    length: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Gen {
    /// Random walks labeled by a planted formula.
    Planted {
        #[command(flatten)]
        common: GenCommon,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        max: f64,
        #[arg(long, default_value_t = 1.0)]
        max_step: f64,
    },
    /// Two-junction traffic network labeled by `x1 > 30`.
    Traffic {
        #[command(flatten)]
        common: GenCommon,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

/// Runs the command line `args` (including the program name) against the
/// process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Eval { data: path, formula, labels_out, report_plot_data } => {
            let f = parse_formula_unchecked(&formula).map_err(usage)?;
            let d = load(&path)?;
            if let Some(v) = f.variables().into_iter().find(|v| !d.variable_names().iter().any(|n| n == v)) {
                return Err(data(format!("formula uses `{v}`, which is not a column of {}", path.display())));
            }
            let bits = frame_label_vector(&f, d.frame()).map_err(data)?;
            let m = Metrics::from_bits(&bits, d.frame().labels());
            if let Some(p) = labels_out {
                write_labels(&p, &d, &bits, false)?;
            }
            if let Some(p) = report_plot_data {
                write_labels(&p, &d, &bits, true)?;
            }
            emit_json(out, &m)
        }
        Command::Optimize { data: path, template, config, fp_bound } => {
            let cfg = DomainConfig::load(&config).map_err(usage)?;
            Template::parse_unchecked(&template).map_err(usage)?;
            let d = load(&path)?;
            let tpl = Template::parse(&template, d.variable_names()).map_err(data)?;
            let domains = cfg.resolve(&tpl).map_err(usage)?;
            let r = parameter_synthesis(&tpl, fp_bound, &d, &domains).map_err(data)?;
            emit_json(out, &r)
        }
        Command::Enumerate { vars, max_ops, shift, prune: do_prune } => {
            let vars: Vec<String> = vars.into_iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            let templates = space(&vars, max_ops, shift, do_prune)?;
            for t in templates {
                match writeln!(out, "{t}") {
                    Ok(()) => {}
                    // The reader went away, e.g. `| head`.
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
                    Err(e) => return Err(data(e)),
                }
            }
            Ok(())
        }
        Command::Synthesize {
            data: path,
            config,
            fp_bound,
            max_disjuncts,
            max_ops,
            templates,
            shift,
            prune: do_prune,
            workers,
            report,
        } => {
            let mut cfg = DomainConfig::load(&config).map_err(usage)?;
            if workers.is_some() {
                cfg.workers = workers;
                cfg.validate().map_err(usage)?;
            }
            let d = load(&path)?;
            let vars = d.variable_names().to_vec();
            let tpls = match (templates, max_ops) {
                (Some(file), _) => {
                    let text = std::fs::read_to_string(&file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
                    let mut list = Vec::new();
                    for (i, line) in text.lines().enumerate() {
                        let line = line.split('#').next().unwrap_or("").trim();
                        if line.is_empty() {
                            continue;
                        }
                        let t = Template::parse(line, &vars).map_err(|e| match e {
                            TemplateError::Parse(ParseError::UnknownVariable { .. }) => {
                                data(format!("{}:{}: {e}", file.display(), i + 1))
                            }
                            e => usage(format!("{}:{}: {e}", file.display(), i + 1)),
                        })?;
                        list.push(t);
                    }
                    let list = if let Some(s) = shift { wrap(&list, s)? } else { list };
                    if do_prune {
                        prune(&list)
                    } else {
                        list
                    }
                }
                (None, Some(n)) => space(&vars, n, shift, do_prune)?,
                (None, None) => return Err(usage("one of --max-ops or --templates is required")),
            };
            let r = formula_synthesis(&tpls, fp_bound, &d, max_disjuncts, &cfg).map_err(|e| match e {
                SynthesisError::Config { .. } | SynthesisError::ZeroDisjuncts | SynthesisError::NoTemplates => usage(e),
                e => data(e),
            })?;
            match report {
                Some(p) => std::fs::write(&p, r.report()).map_err(|e| data(format!("{}: {e}", p.display())))?,
                None => write!(err, "{}", r.report()).map_err(data)?,
            }
            emit_json(out, &r)
        }
        Command::Gen(g) => {
            let (common, d) = match g {
                Gen::Planted { common, vars, formula, noise, min, max, max_step } => {
                    let f = parse_formula(&formula, &vars).map_err(usage)?;
                    let walk = RandomWalk { min, max, max_step };
                    let d = planted_dataset_with(common.seed, &vars, common.traces, common.length, &f, noise, walk)
                        .map_err(usage)?;
                    (common, d)
                }
                Gen::Traffic { common } => {
                    let d = traffic_dataset(common.seed, common.traces, common.length).map_err(usage)?;
                    (common, d)
                }
            };
            match common.out {
                Some(p) => {
                    let file = File::create(&p).map_err(|e| data(format!("{}: {e}", p.display())))?;
                    write_dataset(&d, BufWriter::new(file)).map_err(data)
                }
                None => write_dataset(&d, out).map_err(data),
            }
        }
    }
}

fn wrap(list: &[Template], s: u32) -> Result<Vec<Template>, Failure> {
    if s == 0 {
        return Err(usage("--shift must be at least 1"));
    }
    Ok(shift_wrap(list, s))
}

fn space(vars: &[String], max_ops: usize, shift: Option<u32>, do_prune: bool) -> Result<Vec<Template>, Failure> {
    let mut list = formula_space(vars, max_ops);
    if let Some(s) = shift {
        list = wrap(&list, s)?;
    }
    Ok(if do_prune { prune(&list) } else { list })
}

fn load(path: &Path) -> Result<Dataset, Failure> {
    load_dataset(path).map_err(data)
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(data)?;
    writeln!(out).map_err(data)
}

fn write_labels(path: &Path, d: &Dataset, bits: &BitVector, with_truth: bool) -> Result<(), Failure> {
    let io = |e: csv::Error| data(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    if with_truth {
        w.write_record(["trace", "t", "label", "formula"]).map_err(io)?;
    } else {
        w.write_record(["trace", "t", "label"]).map_err(io)?;
    }
    let bit = |b: bool| if b { "1" } else { "0" };
    for (tr, seg) in d.traces().iter().zip(d.frame().segments()) {
        for t in 0..tr.len() {
            let t_str = t.to_string();
            let predicted = bit(bits.get(seg.start + t));
            if with_truth {
                w.write_record([tr.id(), &t_str, bit(tr.label(t)), predicted]).map_err(io)?;
            } else {
                w.write_record([tr.id(), &t_str, predicted]).map_err(io)?;
            }
        }
    }
    w.flush().map_err(|e| data(format!("{}: {e}", path.display())))
}
