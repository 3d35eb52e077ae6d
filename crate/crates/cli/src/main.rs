use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use sislab::fourier::{classify_decay, combine_verdicts, decay_sequences, omegas};
use sislab::generation::{analytic_limit_audit, construct_schedule_with_offset};
use sislab::io as sio;
use sislab::shift::{is_invariant, minimal_invariant_subspace, BlockShiftOperator};
use sislab::{
    basic_limit, check_zero_conditions, h_lambda_basis, lagrange_bound, run, verify_generation,
    Error, ExponentialSpace, HBasisOptions, Interval, LaurentPolynomial, MaskSchedule,
};

#[derive(Parser)]
#[command(name = "sislab", version, about = "Subdivision and shift-invariant space laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the basic limit function at level R
    Phi {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=24))]
        levels: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run R levels from integer samples in a t,re,im CSV
    Run {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=24))]
        levels: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Classify the decay of the sampled Fourier derivatives
    Decay {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fourier coefficients of the periodic factors
    Omega {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Shifted sums of the basic limit, checked against the periodic factors
    Hbasis {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=24))]
        levels: u32,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
        /// Consistency report (JSON)
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Zero conditions of levels 1..=R at -exp(-lambda 2^-j)
    CheckZeros {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=16))]
        order: u32,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=24))]
        levels: u32,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        level_offset: i32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build a schedule generating the given exponential space
    Construct {
        #[command(flatten)]
        spectrum: SpectrumArg,
        /// Number of explicitly stored levels
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=24))]
        head: u32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        level_offset: i32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Check that the scheme reproduces the given exponential space
    VerifyGen {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[command(flatten)]
        spectrum: SpectrumArg,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=24))]
        levels: u32,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, default_value_t = 1e-6, value_parser = positive)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Invariance of a subspace under the block shift operator
    Invariant {
        /// Subspace JSON {"ambient": n, "basis": [[...], ...]}
        #[arg(long, required_unless_present = "vector", conflicts_with = "vector")]
        subspace: Option<PathBuf>,
        /// Print the smallest invariant subspace containing this vector
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vector: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=16))]
        order: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Bound |p| at given nodes against its sup norm
    Lagrange {
        /// Coefficients of 1, z, ..., z^N (re or re:im)
        #[arg(long, value_delimiter = ',', value_parser = parse_coeff, allow_hyphen_values = true, required = true)]
        coeffs: Vec<Complex64>,
        /// N+1 distinct nodes in [0, 1)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        points: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Classify decay over a grid of candidate lambdas
    Audit {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long = "lambda", value_parser = parse_complex, allow_hyphen_values = true, required = true)]
        lambdas: Vec<Complex64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=16))]
        order: u32,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(i64).range(4..=512))]
        range: i64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=128))]
        depth: Option<u32>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args)]
struct ScheduleArg {
    /// Schedule or single-mask JSON
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Args)]
struct OutArg {
    /// Output path; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0,0")]
    lambda: Complex64,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=16))]
    order: u32,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(i64).range(4..=512))]
    range: i64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=128))]
    depth: Option<u32>,
}

#[derive(Args)]
struct SpectrumArg {
    /// Spectrum entry RE,IM,K for t^a e^{lambda t}, a <= K (repeatable)
    #[arg(long = "spectrum", value_parser = parse_spectrum, allow_hyphen_values = true, required = true)]
    entries: Vec<(Complex64, u32)>,
}

impl SpectrumArg {
    fn space(&self) -> Result<ExponentialSpace, Error> {
        ExponentialSpace::new(self.entries.clone())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [re] => Ok(Complex64::new(parse_finite(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_finite(re)?, parse_finite(im)?)),
        _ => Err("expected RE or RE,IM".into()),
    }
}

fn parse_coeff(s: &str) -> Result<Complex64, String> {
    match s.split(':').collect::<Vec<_>>().as_slice() {
        [re] => Ok(Complex64::new(parse_finite(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_finite(re)?, parse_finite(im)?)),
        _ => Err("expected RE or RE:IM".into()),
    }
}

fn parse_spectrum(s: &str) -> Result<(Complex64, u32), String> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [re, im, k] => {
            let k: u32 = k.trim().parse().map_err(|e| format!("{k:?}: {e}"))?;
            if k > 8 {
                return Err("multiplicity index above 8".into());
            }
            Ok((Complex64::new(parse_finite(re)?, parse_finite(im)?), k))
        }
        _ => Err("expected RE,IM,K".into()),
    }
}

fn load_schedule(arg: &ScheduleArg) -> Result<MaskSchedule, Error> {
    sio::read_schedule(File::open(&arg.schedule)?)
}

fn sink(out: &OutArg) -> Result<Box<dyn Write>, Error> {
    Ok(match &out.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit_json(out: &OutArg, value: &Value) -> Result<(), Error> {
    let mut w = sink(out)?;
    sio::write_json(value, &mut w)?;
    w.flush()?;
    Ok(())
}

fn emit_json_to(path: &Path, value: &Value) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    sio::write_json(value, &mut w)?;
    w.flush()?;
    Ok(())
}

fn depth(d: Option<u32>) -> Option<usize> {
    d.map(|d| d as usize)
}

/// Runs a command and returns its verdict.
fn execute(cmd: Command) -> Result<bool, Error> {
    match cmd {
        Command::Phi {
            schedule,
            levels,
            out,
        } => {
            let phi = basic_limit(&load_schedule(&schedule)?, levels)?;
            let mut w = sink(&out)?;
            sio::write_samples_csv(&phi, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Run {
            schedule,
            input,
            levels,
            out,
        } => {
            let c1 = sio::read_samples_csv(0, File::open(input)?)?;
            let c = run(&load_schedule(&schedule)?, &c1, levels)?;
            let mut w = sink(&out)?;
            sio::write_samples_csv(&c, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Decay {
            schedule,
            spectral,
            out,
        } => {
            let s = load_schedule(&schedule)?;
            let seqs = decay_sequences(
                &s,
                spectral.lambda,
                spectral.order as usize,
                spectral.range,
                depth(spectral.depth),
            )?;
            let mut verdicts = Vec::with_capacity(seqs.len());
            let mut reports = Vec::with_capacity(seqs.len());
            let mut inconclusive = false;
            for seq in &seqs {
                match classify_decay(seq) {
                    Ok(v) => {
                        reports.push(sio::decay_report_json(seq, Some(&v)));
                        verdicts.push(v);
                    }
                    Err(Error::Inconclusive(msg)) => {
                        eprintln!("order {}: {msg}", seq.order);
                        inconclusive = true;
                        reports.push(sio::decay_report_json(seq, None));
                    }
                    Err(e) => return Err(e),
                }
            }
            let combined = if inconclusive {
                None
            } else {
                Some(combine_verdicts(&verdicts)?)
            };
            let verdict = combined.as_ref().is_some_and(|v| v.kind.decays());
            emit_json(
                &out,
                &json!({
                    "reports": reports,
                    "combined": combined.as_ref().map(sio::verdict_json),
                    "verdict": verdict,
                }),
            )?;
            Ok(verdict)
        }
        Command::Omega {
            schedule,
            spectral,
            out,
        } => {
            let s = load_schedule(&schedule)?;
            match omegas(
                &s,
                spectral.lambda,
                spectral.order as usize,
                spectral.range,
                depth(spectral.depth),
            ) {
                Ok(ws) => {
                    let list: Vec<Value> = ws
                        .iter()
                        .enumerate()
                        .map(|(k, w)| sio::periodic_json(spectral.lambda, k, w))
                        .collect();
                    emit_json(&out, &json!({"omegas": list, "verdict": true}))?;
                    Ok(true)
                }
                Err(e @ (Error::Precondition(_) | Error::Inconclusive(_))) => {
                    eprintln!("{e}");
                    emit_json(&out, &json!({"omegas": [], "error": e.to_string(), "verdict": false}))?;
                    Ok(false)
                }
                Err(e) => Err(e),
            }
        }
        Command::Hbasis {
            schedule,
            spectral,
            levels,
            t0,
            t1,
            tol,
            report,
            out,
        } => {
            let s = load_schedule(&schedule)?;
            let opts = HBasisOptions {
                range: spectral.range,
                depth: depth(spectral.depth),
                tol,
                ..HBasisOptions::default()
            };
            let basis = match h_lambda_basis(
                &s,
                spectral.lambda,
                spectral.order as usize,
                Interval::new(t0, t1),
                levels,
                HBasisOptions { tol: f64::INFINITY, ..opts },
            ) {
                Ok(b) => b,
                Err(e @ (Error::Precondition(_) | Error::Inconclusive(_))) => {
                    eprintln!("{e}");
                    return Ok(false);
                }
                Err(e) => return Err(e),
            };
            let mut w = sink(&out)?;
            sio::write_indexed_samples_csv("k", &basis.functions, &mut w)?;
            w.flush()?;
            if let Some(path) = report {
                emit_json_to(&path, &sio::hbasis_json(spectral.lambda, &basis, tol))?;
            }
            if basis.consistency > tol {
                eprintln!(
                    "{}",
                    Error::PoissonConsistency {
                        deviation: basis.consistency,
                        tol
                    }
                );
            }
            Ok(basis.consistency <= tol)
        }
        Command::CheckZeros {
            schedule,
            lambda,
            order,
            levels,
            tol,
            level_offset,
            out,
        } => {
            let s = load_schedule(&schedule)?;
            let table = check_zero_conditions(
                &s,
                lambda,
                order,
                1..=levels as usize,
                tol,
                level_offset,
            )?;
            emit_json(&out, &sio::zero_table_json(&table, tol))?;
            Ok(table.all_satisfied())
        }
        Command::Construct {
            spectrum,
            head,
            level_offset,
            out,
        } => {
            let s = construct_schedule_with_offset(&spectrum.space()?, head as usize, level_offset)?;
            let mut w = sink(&out)?;
            w.write_all(sio::schedule_to_json(&s)?.as_bytes())?;
            w.flush()?;
            Ok(true)
        }
        Command::VerifyGen {
            schedule,
            spectrum,
            levels,
            t0,
            t1,
            tol,
            out,
        } => {
            let s = load_schedule(&schedule)?;
            let space = spectrum.space()?;
            let rep = verify_generation(&s, &space, levels, Interval::new(t0, t1), tol)?;
            emit_json(&out, &sio::generation_json(&rep, &space, tol))?;
            Ok(rep.verdict)
        }
        Command::Invariant {
            subspace,
            vector,
            order,
            out,
        } => {
            let op = BlockShiftOperator::build(order as usize);
            if let Some(v) = vector {
                if v.len() != op.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: op.dim(),
                        found: v.len(),
                    });
                }
                let m = minimal_invariant_subspace(&op, &nalgebra_vector(&v))?;
                emit_json(&out, &sio::subspace_json(&m))?;
                return Ok(true);
            }
            let path = subspace.ok_or_else(|| Error::Invalid("--subspace is required".into()))?;
            let text = std::fs::read_to_string(path)?;
            let n = sio::parse_subspace(&text)?;
            let verdict = is_invariant(&n, &op)?;
            emit_json(
                &out,
                &json!({"subspace": sio::subspace_json(&n), "order": order, "verdict": verdict}),
            )?;
            Ok(verdict)
        }
        Command::Lagrange {
            coeffs,
            points,
            out,
        } => {
            let p = LaurentPolynomial::new(coeffs, 0);
            let b = lagrange_bound(&p, &points)?;
            emit_json(&out, &sio::lagrange_json(&b))?;
            Ok(b.holds)
        }
        Command::Audit {
            schedule,
            lambdas,
            order,
            range,
            depth: d,
            out,
        } => {
            let s = load_schedule(&schedule)?;
            let rep = analytic_limit_audit(&s, &lambdas, order as usize, range, depth(d))?;
            emit_json(&out, &sio::audit_json(&rep))?;
            let shape_ok = if rep.stationary {
                rep.polynomial_only()
            } else {
                rep.within_degree()
            };
            Ok(shape_ok && rep.inconclusive().is_empty())
        }
    }
}

fn nalgebra_vector(v: &[f64]) -> sislab::shift::DVector<f64> {
    sislab::shift::DVector::from_column_slice(v)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(2)
        }
    }
}
