use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use specvar_core::block::{self, BlockOptions};
use specvar_core::harness::{self, BlockProfile, Perturbation, SMode, SweepConfig, Tolerances};
use specvar_core::io::{self, ReportFormat};
use specvar_core::jordan::{JordanBlock, JordanSpec, PerturbationInstance};
use specvar_core::random::random_with_condition;
use specvar_core::spectrum;
use specvar_core::C64;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exit codes: 0 pass, 1 bound violation found, 2 infrastructure or configuration error.
#[derive(Parser)]
#[command(name = "specvar", version, about = "Spectral variation bounds for arbitrary matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for random draws (block counts, generated instances).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Block-count tolerance, relative.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    StructuredText,
}

#[derive(Clone, Copy, ValueEnum)]
enum SModeArg {
    Computed,
    Pessimistic,
}

impl From<SModeArg> for SMode {
    fn from(m: SModeArg) -> Self {
        match m {
            SModeArg::Computed => SMode::Computed,
            SModeArg::Pessimistic => SMode::Pessimistic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Diagonalizable,
    SingleJordan,
    Mixed,
}

#[derive(Subcommand)]
enum Command {
    /// All bounds for one instance, with the true matching distance and slacks.
    Bound {
        /// Jordan data file.
        #[arg(long)]
        spec: PathBuf,
        /// Matrix file holding E.
        #[arg(long)]
        perturbation: PathBuf,
        #[arg(long, value_enum, default_value = "pessimistic")]
        s_mode: SModeArg,
    },
    /// Optimal matching distance between two spectrum files.
    Match {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Number of unitarily irreducible blocks of a matrix.
    SNumber {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Seeded verification sweep.
    Sweep {
        /// Sweep configuration as JSON; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, value_enum)]
        profile: Option<ProfileArg>,
        /// Jordan data file whose blocks are used for every trial.
        #[arg(long, conflicts_with = "profile")]
        blocks: Option<PathBuf>,
        /// Target κ₂(Q); repeat or separate with commas.
        #[arg(long, value_delimiter = ',')]
        kappa: Vec<f64>,
        /// gaussian:NORM, scalar:T, rank1:NORM or zero; repeat or separate with commas.
        #[arg(long, value_delimiter = ',')]
        perturbation: Vec<String>,
        #[arg(long, value_enum)]
        s_mode: Option<SModeArg>,
    },
    /// Bounds for E = tI in closed form beside their numeric values.
    Example {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        t: f64,
        /// Jordan data file; by default blocks λ = 1, 3, 5, … with a random Q of condition `--kappa`.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        kappa: f64,
        #[arg(long, value_enum, default_value = "computed")]
        s_mode: SModeArg,
    },
    /// δ(M) and the triangular split norms of a matrix.
    Delta {
        #[arg(long)]
        matrix: PathBuf,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn parse_perturbation(s: &str) -> Result<Perturbation> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let value = || -> Result<f64> { arg.parse().with_context(|| format!("bad number in perturbation {s:?}")) };
    Ok(match kind {
        "gaussian" => Perturbation::Gaussian { norm: value()? },
        "scalar" => Perturbation::Scalar { t: value()? },
        "rank1" => Perturbation::Rank1 { norm: value()? },
        "zero" if arg.is_empty() => Perturbation::Zero,
        _ => bail!("unknown perturbation {s:?}; expected gaussian:NORM, scalar:T, rank1:NORM or zero"),
    })
}

fn block_options(cli: &Cli) -> BlockOptions {
    cli.tol.map_or_else(BlockOptions::default, BlockOptions::with_tol)
}

/// Returns whether a bound violation was found.
fn run(cli: &Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Bound {
            spec,
            perturbation,
            s_mode,
        } => {
            let spec = io::read_jordan_spec(spec).with_context(|| format!("reading {}", spec.display()))?;
            let e = io::read_matrix(perturbation).with_context(|| format!("reading {}", perturbation.display()))?;
            let inst = PerturbationInstance::new(spec, e)?;
            let mut tol = Tolerances::default();
            if let Some(t) = cli.tol {
                tol.s_tol = t;
            }
            let eval = harness::evaluate_instance(&inst, (*s_mode).into(), &tol, seed)?;
            let text = match cli.format.unwrap_or(Format::Text) {
                Format::StructuredText => pretty(&eval),
                Format::Csv => {
                    let mut s = String::from("trial,bound_id,branch,value,d2,slack\n");
                    for b in &eval.bounds {
                        let num = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                        s += &format!(
                            "0,{},{},{},{},{}\n",
                            b.id,
                            b.branch,
                            num(b.value),
                            eval.d2,
                            num(b.value.map(|v| v - eval.d2))
                        );
                    }
                    s
                }
                Format::Text => {
                    let d = &eval.digest;
                    let mut s = format!(
                        "n = {}, p = {}, m = {}, ‖E_Q‖_F = {}, δ(E_Q) = {}, κ₂(Q)‖E‖_F = {}\nD2 = {}, D_inf = {}\n",
                        d.n, d.p, d.m, d.norm_eq, d.delta_eq, d.kappa_majorant, eval.d2, eval.d_inf
                    );
                    for b in &eval.bounds {
                        match b.value {
                            Some(v) => {
                                let flag = if eval.slacks.iter().any(|x| x.id == b.id && x.violated) { "  VIOLATED" } else { "" };
                                s += &format!("{:<13} {:<18} {:<24} slack {}{flag}\n", b.id, b.branch, v, v - eval.d2);
                            }
                            None => s += &format!("{:<13} n/a ({})\n", b.id, b.reason.as_deref().unwrap_or("")),
                        }
                    }
                    s
                }
            };
            emit(out, &text)?;
            let violated = eval.violations().next().is_some();
            Ok(violated)
        }
        Command::Match { a, b } => {
            let a = io::read_spectrum(a).with_context(|| format!("reading {}", a.display()))?;
            let b = io::read_spectrum(b).with_context(|| format!("reading {}", b.display()))?;
            let m = spectrum::optimal_match(&a, &b)?;
            let text = match cli.format.unwrap_or(Format::Text) {
                Format::Text => format!("D2 = {}\nD_inf = {}\npermutation = {:?}\n", m.d2, m.d_inf, m.permutation),
                _ => pretty(&m),
            };
            emit(out, &text)?;
            Ok(false)
        }
        Command::SNumber { matrix } => {
            let m = io::read_matrix(matrix).with_context(|| format!("reading {}", matrix.display()))?;
            let d = block::s_number_with(&m, &block_options(cli), seed)?;
            let text = match cli.format.unwrap_or(Format::Text) {
                Format::Text => format!("s = {}\nblock sizes = {:?}\n", d.s, d.block_sizes),
                _ => pretty(&json!({ "s": d.s, "block_sizes": d.block_sizes })),
            };
            emit(out, &text)?;
            Ok(false)
        }
        Command::Sweep {
            config,
            trials,
            n_min,
            n_max,
            profile,
            blocks,
            kappa,
            perturbation,
            s_mode,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<SweepConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => SweepConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = *t;
            }
            if let Some(lo) = n_min {
                cfg.n_range.0 = *lo;
            }
            if let Some(hi) = n_max {
                cfg.n_range.1 = *hi;
            }
            if let Some(p) = profile {
                cfg.block_profile = match p {
                    ProfileArg::Diagonalizable => BlockProfile::Diagonalizable,
                    ProfileArg::SingleJordan => BlockProfile::SingleJordan,
                    ProfileArg::Mixed => BlockProfile::Mixed,
                };
            }
            if let Some(path) = blocks {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let (blocks, _) = io::parse_jordan_parts(&text)?;
                cfg.block_profile = BlockProfile::UserFile { blocks };
            }
            if !kappa.is_empty() {
                cfg.kappas = kappa.clone();
            }
            if !perturbation.is_empty() {
                cfg.perturbations = perturbation.iter().map(|s| parse_perturbation(s)).collect::<Result<_>>()?;
            }
            if let Some(m) = s_mode {
                cfg.s_mode = (*m).into();
            }
            if let Some(t) = cli.tol {
                cfg.tolerances.s_tol = t;
            }
            let report = harness::run_sweep(&cfg)?;
            let s = &report.summary;
            let summary = format!(
                "trials {}, completed {}, infrastructure failures {}, violations {}, envelope failures {}, sharpness {}\n",
                s.trials,
                s.completed,
                s.failed_infrastructure,
                s.violations,
                s.lemma_failures,
                if s.sharpness.iter().all(|c| c.passed) { "ok" } else { "FAILED" }
            );
            match (cli.format.unwrap_or(Format::Csv), out) {
                (Format::Text, _) => emit(out, &(summary + &pretty(&report.summary)))?,
                (Format::Csv, Some(path)) => {
                    io::write_report(&report, path, ReportFormat::Csv)?;
                    print!("{summary}");
                }
                (Format::StructuredText, Some(path)) => {
                    io::write_report(&report, path, ReportFormat::StructuredText)?;
                    print!("{summary}");
                }
                (Format::Csv, None) => {
                    print!("{}", io::report_csv(&report, Some(&io::unix_timestamp()))?);
                    eprint!("{summary}");
                }
                (Format::StructuredText, None) => {
                    print!("{}", io::report_json(&report));
                    eprint!("{summary}");
                }
            }
            if s.found_violation() {
                Ok(true)
            } else if s.failed_infrastructure > 0 {
                bail!("{} trial(s) failed for infrastructure reasons", s.failed_infrastructure)
            } else {
                Ok(false)
            }
        }
        Command::Example {
            n,
            p,
            m,
            t,
            spec,
            kappa,
            s_mode,
        } => {
            let spec = match spec {
                Some(path) => io::read_jordan_spec(path).with_context(|| format!("reading {}", path.display()))?,
                None => default_example_spec(*n, *p, *m, *kappa, seed)?,
            };
            let table = harness::example_scalar_table(*n, *p, *m, *t, &spec, (*s_mode).into())?;
            let text = match cli.format.unwrap_or(Format::Text) {
                Format::Text => {
                    let mut s = format!(
                        "n = {}, p = {}, m = {}, t = {}, s1 = {}\nD2 closed form = {}, numeric = {}\n",
                        table.n, table.p, table.m, table.t, table.s_values.s1, table.d2_closed, table.d2_numeric
                    );
                    for r in &table.rows {
                        s += &format!("{:<8} closed {:<24} numeric {:<24} rel.err {:.2e}\n", r.id, r.closed_form, r.numeric, r.rel_error);
                    }
                    s
                }
                _ => pretty(&table),
            };
            emit(out, &text)?;
            Ok(table.max_rel_error() > 1e-10 || (table.d2_numeric - table.d2_closed).abs() > 1e-10)
        }
        Command::Delta { matrix } => {
            let mtx = io::read_matrix(matrix).with_context(|| format!("reading {}", matrix.display()))?;
            let split = mtx.split_dlu()?;
            let tr = mtx.trace()?;
            let v = json!({
                "delta": mtx.delta()?,
                "frobenius_norm": mtx.frobenius_norm(),
                "trace": [tr.re, tr.im],
                "strictly_lower_norm": split.strictly_lower.frobenius_norm(),
                "strictly_upper_norm": split.strictly_upper.frobenius_norm(),
            });
            let text = match cli.format.unwrap_or(Format::Text) {
                Format::Text => format!(
                    "δ = {}\n‖M‖_F = {}\ntr M = {} + {}i\n‖L‖_F = {}\n‖U‖_F = {}\n",
                    v["delta"], v["frobenius_norm"], tr.re, tr.im, v["strictly_lower_norm"], v["strictly_upper_norm"]
                ),
                _ => pretty(&v),
            };
            emit(out, &text)?;
            Ok(false)
        }
    }
}

/// `p` blocks with eigenvalues 1, 3, 5, …; the first has size `m`, the rest share `n − m`.
fn default_example_spec(n: usize, p: usize, m: usize, kappa: f64, seed: u64) -> Result<JordanSpec> {
    if p == 0 || m == 0 || m > n || (p == 1 && m != n) || (p > 1 && (n - m < p - 1 || n - m > (p - 1) * m)) {
        bail!("no Jordan structure with n = {n}, p = {p}, m = {m}");
    }
    let mut sizes = vec![m];
    let mut left = n - m;
    for k in 1..p {
        let remaining = p - k;
        let size = (left - (remaining - 1)).min(m);
        sizes.push(size);
        left -= size;
    }
    let blocks = sizes
        .iter()
        .enumerate()
        .map(|(k, &size)| JordanBlock::new(C64::new(2.0 * k as f64 + 1.0, 0.0), size))
        .collect();
    let q = random_with_condition(&mut ChaCha8Rng::seed_from_u64(seed), n, kappa);
    Ok(JordanSpec::new(blocks, q)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
