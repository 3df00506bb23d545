//! `erps` — decompose quantum experiments on odd-prime-power dimensions
//! into epistemically restricted classical descriptions over discrete
//! phase space, and recover the Born-rule prediction from framework sums.

mod examples;
mod manifest;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use erps::engine::{
    quantum_predict, ExperimentSpec, FrameworkFilter, PredictOptions,
};
use erps::error::Error;
use erps::field::FiniteField;
use erps::mrs;
use erps::ops::PhaseOps;
use erps::phase::{all_striations, legal_symplectics, SetMode};
use erps::quasi::{quasi_of_channel, quasi_of_measurement, state_from_wigner, wigner_of_state};
use erps::restricted::{
    reconstruct_channel, reconstruct_measurement, reconstruct_state, restrict_channel,
    restrict_measurement, restrict_state,
};
use erps::serial;

use manifest::Manifest;
use render::{point_grid, sig12};

#[derive(Parser)]
#[command(name = "erps", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    FullGroup,
    Mrs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FilterArg {
    All,
    Coherent,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum WhatArg {
    State,
    Channel,
    Measurement,
}

#[derive(Subcommand)]
enum Command {
    /// Predict the outcome probability of an experiment by summing
    /// nonrandom parts over frameworks.
    Predict {
        /// Experiment file: {field, state, channels, effect}.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::FullGroup)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = FilterArg::Coherent)]
        filter: FilterArg,
        /// Cap on per-framework rows kept in the report.
        #[arg(long, default_value_t = 64)]
        report_rows: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Node budget when an MRS search is required.
        #[arg(long, default_value_t = mrs::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Decompose a state, a channel, or a measurement effect into its
    /// restricted classical family.
    Decompose {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        what: WhatArg,
        /// Which channel of the experiment to decompose.
        #[arg(long, default_value_t = 0)]
        channel_index: usize,
    },
    /// Reconstruct the quasiprobability object (and operator) from a
    /// restricted family file.
    Reconstruct {
        #[arg(long)]
        family: PathBuf,
    },
    /// Run the structural pure-state / unitary / pure-measurement check on
    /// a restricted family file.
    Check {
        #[arg(long)]
        family: PathBuf,
    },
    /// Search for a minimal reconstructing set.
    Mrs {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Modulus coefficients, little-endian, e.g. 1,0,1 for x²+1.
        #[arg(long, value_delimiter = ',')]
        modulus: Option<Vec<u32>>,
        #[arg(long, default_value_t = mrs::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Partial-trace the experiment's state onto particle 1.
    Ptrace {
        #[arg(long)]
        spec: PathBuf,
        /// Base subfield degree s (particles live over F_{p^s}).
        #[arg(long, default_value_t = 1)]
        base_degree: u32,
        /// Semicolon-separated q-basis elements as coefficient lists,
        /// e.g. "1,0;0,1".
        #[arg(long)]
        basis: Option<String>,
    },
    /// Print a built-in annotated walkthrough.
    Example {
        #[arg(value_parser = ["mach-zehnder", "two-qutrit"])]
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            let kind = error_kind(&err);
            let payload = json!({ "error": { "kind": kind, "message": err.to_string() } });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
            ExitCode::from(2)
        }
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::NonPrimeCharacteristic(_) => "NonPrimeCharacteristic",
        Error::ReducibleModulus(_) => "ReducibleModulus",
        Error::UnsupportedEvenExtension => "UnsupportedEvenExtension",
        Error::DivisionByZero => "DivisionByZero",
        Error::NotASubfield(_, _) => "NotASubfield",
        Error::SingularGramMatrix => "SingularGramMatrix",
        Error::NotABasis => "NotABasis",
        Error::ZeroPointArgument => "ZeroPointArgument",
        Error::UnsupportedDimension(_) => "UnsupportedDimension",
        Error::IllegalSymplectic => "IllegalSymplectic",
        Error::InvalidState(_) => "InvalidState",
        Error::InvalidChannel(_) => "InvalidChannel",
        Error::NonUnitalChannel(_) => "NonUnitalChannel",
        Error::InvalidPovmElement(_) => "InvalidPovmElement",
        Error::NegativeMarginal(_) => "NegativeMarginal",
        Error::NegativeClassProbability(_) => "NegativeClassProbability",
        Error::OutOfRangeConditional(_) => "OutOfRangeConditional",
        Error::InconsistentMarginals(_) => "InconsistentMarginals",
        Error::IncompleteFrameworkSet(_) => "IncompleteFrameworkSet",
        Error::InconsistentConditionals(_) => "InconsistentConditionals",
        Error::IncompleteFamily(_) => "IncompleteFamily",
        Error::MrsUnavailable(_) => "MrsUnavailable",
        Error::WeightSumExceedsOne(_) => "WeightSumExceedsOne",
        Error::NonPositiveWeight(_) => "NonPositiveWeight",
        Error::ImaginaryResidue(_, _) => "ImaginaryResidue",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::FieldMismatch => "FieldMismatch",
        Error::Parse(_) => "Parse",
        Error::Json(_) => "Json",
        Error::Io(_) => "Io",
    }
}

fn read_spec(path: &std::path::Path, man: &mut Manifest) -> Result<ExperimentSpec, Error> {
    let bytes = std::fs::read(path)?;
    man.input(&path.display().to_string(), &bytes);
    let value: Value = serde_json::from_slice(&bytes)?;
    serial::experiment_from_json(&value)
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("ERPS_CACHE_DIR").map(PathBuf::from)
}

fn emit(format: Format, payload: &Value, table: impl FnOnce() -> String) -> ExitCode {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(payload).unwrap()),
        Format::Table => {
            println!(
                "# manifest {}",
                serde_json::to_string(&payload["manifest"]).unwrap()
            );
            print!("{}", table());
        }
    }
    ExitCode::SUCCESS
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Predict {
            spec,
            mode,
            filter,
            report_rows,
            threads,
            budget,
        } => {
            let mut man = Manifest::new("predict");
            let experiment = read_spec(spec, &mut man)?;
            man.field(&experiment.field);
            let mode = match mode {
                ModeArg::FullGroup => SetMode::FullGroup,
                ModeArg::Mrs => SetMode::Mrs,
            };
            let filter = match filter {
                FilterArg::All => FrameworkFilter::All,
                FilterArg::Coherent => FrameworkFilter::Coherent,
            };
            man.option(
                "mode",
                if mode == SetMode::Mrs { "mrs" } else { "full-group" },
            );
            man.option(
                "filter",
                if filter == FrameworkFilter::All { "all" } else { "coherent" },
            );
            man.option("report_rows", *report_rows as u64);
            let mrs_set = if mode == SetMode::Mrs {
                if let Some(dir) = cache_dir() {
                    let search = mrs::search_cached(&experiment.field, *budget, &dir)?;
                    search.set().map(|s| s.to_vec())
                } else {
                    None
                }
            } else {
                None
            };
            let opts = PredictOptions {
                mode,
                filter,
                mrs_set,
                mrs_budget: *budget,
                report_rows: *report_rows,
                threads: *threads,
                ..PredictOptions::default()
            };
            let out = quantum_predict(&experiment, &opts)?;
            let field = &experiment.field;
            let rows: Vec<Value> = out
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "framework": {
                            "meas": serial::slope_to_json(field, row.framework.meas),
                            "chain": row.framework.chain.iter()
                                .map(|s| serial::symplectic_to_json(field, s))
                                .collect::<Vec<_>>(),
                            "prep": serial::slope_to_json(field, row.framework.prep),
                        },
                        "classical": row.classical,
                        "delta": row.delta,
                    })
                })
                .collect();
            let payload = json!({
                "manifest": man.to_json(),
                "z": out.z,
                "frameworks": out.framework_count,
                "contributing": out.contributing,
                "delta_sum": out.delta_sum,
                "random_part": out.random_part,
                "raw_probability": out.raw,
                "probability": out.probability,
                "rows": rows,
                "rows_truncated": out.rows_truncated,
            });
            Ok(emit(cli.format, &payload, || {
                let mut s = String::new();
                s.push_str(&format!(
                    "frameworks    {} ({} contributing), Z = {}\n",
                    out.framework_count, out.contributing, out.z
                ));
                s.push_str(&format!("delta sum     {}\n", sig12(out.delta_sum)));
                s.push_str(&format!("random part   {}\n", sig12(out.random_part)));
                s.push_str(&format!("probability   {}\n", sig12(out.probability)));
                if !out.rows.is_empty() {
                    s.push_str("framework                          R^F            dR^F\n");
                    for row in &out.rows {
                        s.push_str(&format!(
                            "{:32}  {:>14}  {:>14}\n",
                            row.framework.label(field),
                            sig12(row.classical),
                            sig12(row.delta)
                        ));
                    }
                    if out.rows_truncated {
                        s.push_str("... (rows truncated)\n");
                    }
                }
                s
            }))
        }

        Command::Decompose {
            spec,
            what,
            channel_index,
        } => {
            let mut man = Manifest::new("decompose");
            let experiment = read_spec(spec, &mut man)?;
            let field = experiment.field.clone();
            man.field(&field);
            let ops = PhaseOps::new(&field);
            let (kind, members): (&str, Vec<Value>) = match what {
                WhatArg::State => {
                    man.option("what", "state");
                    let q = wigner_of_state(&ops, &experiment.state)?;
                    let members = all_striations(&field)
                        .iter()
                        .map(|b| {
                            restrict_state(&q, b)
                                .map(|r| serial::restricted_state_to_json(&field, &r))
                        })
                        .collect::<Result<_, _>>()?;
                    ("state", members)
                }
                WhatArg::Channel => {
                    man.option("what", "channel");
                    man.option("channel_index", *channel_index as u64);
                    let ch = experiment.channels.get(*channel_index).ok_or_else(|| {
                        Error::Parse(format!("experiment has no channel {channel_index}"))
                    })?;
                    let qe = quasi_of_channel(&ops, ch)?;
                    let members = legal_symplectics(&field)
                        .iter()
                        .map(|s| {
                            restrict_channel(&qe, s)
                                .map(|r| serial::restricted_channel_to_json(&field, &r))
                        })
                        .collect::<Result<_, _>>()?;
                    ("channel", members)
                }
                WhatArg::Measurement => {
                    man.option("what", "measurement");
                    let qm = quasi_of_measurement(&ops, &experiment.effect)?;
                    let members = all_striations(&field)
                        .iter()
                        .map(|b| {
                            restrict_measurement(&qm, b)
                                .map(|r| serial::restricted_measurement_to_json(&field, &r))
                        })
                        .collect::<Result<_, _>>()?;
                    ("measurement", members)
                }
            };
            let mut payload = serial::family_to_json(&field, kind, members);
            payload["manifest"] = man.to_json();
            Ok(emit(cli.format, &payload, || {
                let mut s = String::new();
                s.push_str(&format!(
                    "{} family with {} members\n",
                    kind,
                    payload["members"].as_array().unwrap().len()
                ));
                if kind != "channel" {
                    for member in payload["members"].as_array().unwrap() {
                        let slope = &member["striation"];
                        s.push_str(&format!("striation {slope}:\n"));
                        let values: Vec<f64> = member["values"]
                            .as_array()
                            .unwrap()
                            .iter()
                            .map(|v| v.as_f64().unwrap())
                            .collect();
                        s.push_str(&point_grid(&field, &values));
                    }
                } else {
                    s.push_str("(class distributions; render with --format json)\n");
                }
                s
            }))
        }

        Command::Reconstruct { family } => {
            let mut man = Manifest::new("reconstruct");
            let bytes = std::fs::read(family)?;
            man.input(&family.display().to_string(), &bytes);
            let value: Value = serde_json::from_slice(&bytes)?;
            let field = serial::field_from_json(
                value
                    .get("field")
                    .ok_or_else(|| Error::Parse("family file needs a field".into()))?,
            )?;
            man.field(&field);
            let kind = value
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("family file needs a kind".into()))?;
            let members = value
                .get("members")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("family file needs members".into()))?;
            let ops = PhaseOps::new(&field);
            let payload = match kind {
                "state" => {
                    let family: Vec<_> = members
                        .iter()
                        .map(|m| serial::restricted_state_from_json(&field, m))
                        .collect::<Result<_, _>>()?;
                    let q = reconstruct_state(&field, &family)?;
                    let w = state_from_wigner(&ops, &q);
                    let validation = erps::ops::validate_state(&w, erps::VALIDITY_TOL);
                    json!({
                        "manifest": man.to_json(),
                        "kind": "state",
                        "wigner": serial::state_quasi_to_json(&q),
                        "state": serial::matrix_to_json(&w),
                        "valid": validation.pass(),
                        "violations": validation.violations.iter()
                            .map(|v| json!({"condition": v.condition, "magnitude": v.magnitude}))
                            .collect::<Vec<_>>(),
                    })
                }
                "channel" => {
                    let family: Vec<_> = members
                        .iter()
                        .map(|m| serial::restricted_channel_from_json(&field, m))
                        .collect::<Result<_, _>>()?;
                    let q = reconstruct_channel(&field, &family)?;
                    json!({
                        "manifest": man.to_json(),
                        "kind": "channel",
                        "transition_quasi": serial::channel_quasi_to_json(&q),
                    })
                }
                "measurement" => {
                    let family: Vec<_> = members
                        .iter()
                        .map(|m| serial::restricted_measurement_from_json(&field, m))
                        .collect::<Result<_, _>>()?;
                    let q = reconstruct_measurement(&field, &family)?;
                    let d = field.order();
                    let mut e = erps::linalg::CMat::zeros(d);
                    for (idx, &v) in q.values().iter().enumerate() {
                        e = e.add(
                            &ops.a_by_index(idx)
                                .scale(num_c(v / d as f64)),
                        );
                    }
                    let validation = erps::ops::validate_povm_element(&e, erps::VALIDITY_TOL);
                    json!({
                        "manifest": man.to_json(),
                        "kind": "measurement",
                        "effect_quasi": serial::meas_quasi_to_json(&q),
                        "effect": serial::matrix_to_json(&e),
                        "valid": validation.pass(),
                        "violations": validation.violations.iter()
                            .map(|v| json!({"condition": v.condition, "magnitude": v.magnitude}))
                            .collect::<Vec<_>>(),
                    })
                }
                other => return Err(Error::Parse(format!("unknown family kind {other}"))),
            };
            Ok(emit(cli.format, &payload, || {
                format!("{}\n", serde_json::to_string_pretty(&payload).unwrap())
            }))
        }

        Command::Check { family } => {
            let mut man = Manifest::new("check");
            let bytes = std::fs::read(family)?;
            man.input(&family.display().to_string(), &bytes);
            let value: Value = serde_json::from_slice(&bytes)?;
            let field = serial::field_from_json(
                value
                    .get("field")
                    .ok_or_else(|| Error::Parse("family file needs a field".into()))?,
            )?;
            man.field(&field);
            let kind = value
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("family file needs a kind".into()))?;
            let members = value
                .get("members")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("family file needs members".into()))?;
            let report = match kind {
                "state" => {
                    let family: Vec<_> = members
                        .iter()
                        .map(|m| serial::restricted_state_from_json(&field, m))
                        .collect::<Result<_, _>>()?;
                    erps::constraint::check_pure_state(&field, &family)?
                }
                "channel" => {
                    let family: Vec<_> = members
                        .iter()
                        .map(|m| serial::restricted_channel_from_json(&field, m))
                        .collect::<Result<_, _>>()?;
                    erps::constraint::check_unitary_channel(&field, &family, None)?
                }
                "measurement" => {
                    let family: Vec<_> = members
                        .iter()
                        .map(|m| serial::restricted_measurement_from_json(&field, m))
                        .collect::<Result<_, _>>()?;
                    erps::constraint::check_pure_measurement(&field, &family)?
                }
                other => return Err(Error::Parse(format!("unknown family kind {other}"))),
            };
            let payload = json!({
                "manifest": man.to_json(),
                "check": report.check,
                "pass": report.pass,
                "max_residual": report.max_residual,
                "tolerance": report.tolerance,
                "samples": report.samples,
            });
            Ok(emit(cli.format, &payload, || {
                format!(
                    "{}: {} (max residual {}, tolerance {}, {} samples)\n",
                    report.check,
                    if report.pass { "PASS" } else { "FAIL" },
                    sig12(report.max_residual),
                    sig12(report.tolerance),
                    report.samples
                )
            }))
        }

        Command::Mrs {
            p,
            n,
            modulus,
            budget,
        } => {
            let mut man = Manifest::new("mrs");
            let field = FiniteField::new(*p, *n, modulus.as_deref())?;
            man.field(&field);
            man.option("budget", *budget);
            let result = match cache_dir() {
                Some(dir) => mrs::search_cached(&field, *budget, &dir)?,
                None => mrs::search(&field, *budget),
            };
            match &result.outcome {
                mrs::MrsOutcome::Found(set) => {
                    let payload = json!({
                        "manifest": man.to_json(),
                        "found": true,
                        "size": set.len(),
                        "nodes_searched": result.nodes,
                        "verified": mrs::verify(&field, set),
                        "set": set.iter()
                            .map(|s| serial::symplectic_to_json(&field, s))
                            .collect::<Vec<_>>(),
                    });
                    Ok(emit(cli.format, &payload, || {
                        let mut s = format!(
                            "found a minimal reconstructing set of {} matrices ({} nodes searched), certificate verified\n",
                            set.len(),
                            result.nodes
                        );
                        for m in set {
                            s.push_str(&format!("  {}\n", m.label(&field)));
                        }
                        s
                    }))
                }
                outcome => {
                    let reason = match outcome {
                        mrs::MrsOutcome::Exhausted => "search exhausted",
                        _ => "budget exceeded",
                    };
                    let payload = json!({
                        "manifest": man.to_json(),
                        "found": false,
                        "reason": reason,
                        "nodes_searched": result.nodes,
                    });
                    match cli.format {
                        Format::Json => {
                            println!("{}", serde_json::to_string_pretty(&payload).unwrap())
                        }
                        Format::Table => {
                            println!(
                                "# manifest {}",
                                serde_json::to_string(&payload["manifest"]).unwrap()
                            );
                            println!("not found: {reason} after {} nodes", result.nodes);
                        }
                    }
                    Ok(ExitCode::from(3))
                }
            }
        }

        Command::Ptrace {
            spec,
            base_degree,
            basis,
        } => {
            let mut man = Manifest::new("ptrace");
            let experiment = read_spec(spec, &mut man)?;
            let field = experiment.field.clone();
            man.field(&field);
            man.option("base_degree", *base_degree as u64);
            let q_basis = match basis {
                None => None,
                Some(text) => {
                    man.option("basis", text.clone());
                    let elements = text
                        .split(';')
                        .map(|part| {
                            let coeffs: Result<Vec<u32>, _> = part
                                .split(',')
                                .map(|c| {
                                    c.trim()
                                        .parse::<u32>()
                                        .map_err(|_| Error::Parse("bad basis coefficient".into()))
                                })
                                .collect();
                            coeffs.map(|c| field.from_coeffs(&c))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Some(elements)
                }
            };
            let dec = erps::composite::ParticleDecomposition::new(&field, *base_degree, q_basis)?;
            let base = dec.base().clone();
            let ops = PhaseOps::new(&field);
            let q = wigner_of_state(&ops, &experiment.state)?;
            let small_q = erps::composite::partial_trace_wigner(&dec, &q);
            let family: Vec<_> = all_striations(&field)
                .iter()
                .map(|b| restrict_state(&q, b))
                .collect::<Result<_, _>>()?;
            let small_family = erps::composite::partial_trace_restricted(&dec, &family)?;
            let classification: Vec<Value> = all_striations(&field)
                .iter()
                .map(|b| {
                    let verdict = match dec.classify_slope(b.slope()) {
                        erps::composite::SlopeClass::MapsTo(slope) => {
                            json!({ "maps_to": serial::slope_to_json(&base, slope) })
                        }
                        erps::composite::SlopeClass::UniformCovering => {
                            json!("uniform-covering")
                        }
                    };
                    json!({
                        "striation": serial::slope_to_json(&field, b.slope()),
                        "verdict": verdict,
                    })
                })
                .collect();
            let payload = json!({
                "manifest": man.to_json(),
                "base_field": serial::field_to_json(&base),
                "particles": dec.particles(),
                "classification": classification,
                "wigner": serial::state_quasi_to_json(&small_q),
                "family": small_family.iter()
                    .map(|r| serial::restricted_state_to_json(&base, r))
                    .collect::<Vec<_>>(),
            });
            Ok(emit(cli.format, &payload, || {
                let mut s = format!(
                    "traced {} particles over F_{} down to particle 1\n",
                    dec.particles(),
                    base.order()
                );
                s.push_str("single-particle Wigner function:\n");
                s.push_str(&point_grid(&base, small_q.values()));
                for r in &small_family {
                    s.push_str(&format!("restricted, slope {}:\n", r.slope().label(&base)));
                    s.push_str(&point_grid(&base, r.values()));
                }
                s
            }))
        }

        Command::Example { name } => {
            let text = match name.as_str() {
                "mach-zehnder" => examples::mach_zehnder(),
                "two-qutrit" => examples::two_qutrit(),
                _ => unreachable!("clap restricts the value"),
            };
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn num_c(v: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(v, 0.0)
}
