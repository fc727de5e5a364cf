//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::integrate::{self, parse_coeff, parse_state, DEFAULT_DRIFT_TOL};
use crate::report::{self, Cache};
use crate::verify::{verify, Suite};
use crate::{CliError, Library, Result, Settings, DEFAULT_SEED, EXIT_FAIL, EXIT_PASS};

/// A comma separated state, kept whole so clap does not split it.
#[derive(Debug, Clone, PartialEq)]
pub struct State(pub Vec<f64>);

fn state(s: &str) -> std::result::Result<State, String> {
    parse_state(s).map(State)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "kslie", version, about = "Verify and integrate k-symplectic Lie systems")]
pub struct Cli {
    /// Seed for the randomized zero tests.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Sample points per zero test.
    #[arg(long, global = true, default_value_t = kslie::expr::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Zero-test tolerance, scaled by the magnitude of the terms.
    #[arg(long, global = true, default_value_t = kslie::expr::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Extra example records (JSON), one object or an array.
    #[arg(long, global = true)]
    pub load: Vec<PathBuf>,
    /// Where results are cached for `report`.
    #[arg(long, global = true, default_value = "kslie-out/cache.json")]
    pub cache: PathBuf,
    /// Do not read or write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List registered examples.
    List,
    /// Run verification suites on one example.
    Verify {
        id: String,
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Integrate the t-dependent system of one example.
    Integrate {
        id: String,
        /// Initial state of the first copy, comma separated.
        #[arg(long, allow_hyphen_values = true, value_parser = state)]
        x0: Option<State>,
        /// Initial state of a further copy; repeat for more copies.
        #[arg(long, allow_hyphen_values = true, value_parser = state)]
        x0b: Vec<State>,
        /// Number of copies of the diagonal prolongation.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=integrate::MAX_COPIES as u64))]
        prolong: Option<u64>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, default_value_t = kslie::motion::DEFAULT_STEP)]
        step: f64,
        /// Override a coefficient, `name=expr` in t.
        #[arg(long, value_parser = parse_coeff)]
        coeff: Vec<(String, String)>,
        /// Measure drift of the registered invariants.
        #[arg(long)]
        invariants: bool,
        #[arg(long, default_value_t = DEFAULT_DRIFT_TOL)]
        drift_tol: f64,
        /// Directory for the CSV trajectory and JSON drift report.
        #[arg(long, default_value = "kslie-out")]
        out: PathBuf,
    },
    /// Summarize cached results.
    Report {
        /// Run every suite on every example first.
        #[arg(long)]
        run_all: bool,
    },
}

/// Parses `argv` and runs the command, returning the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return e.exit_code();
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("writing output: {e}")))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let settings = Settings {
        seed: cli.seed,
        trials: cli.trials,
        tol: cli.tol,
    };
    settings.zero_test("").map_err(|e| CliError::Usage(e.to_string()))?;
    let mut lib = Library::new();
    for p in &cli.load {
        lib.load(p)?;
    }
    let load_cache = || -> Result<Cache> {
        if cli.no_cache {
            Ok(Cache::default())
        } else {
            Cache::load(&cli.cache)
        }
    };
    let save_cache = |c: &Cache| -> Result<()> {
        if cli.no_cache {
            Ok(())
        } else {
            c.save(&cli.cache)
        }
    };
    match &cli.command {
        Command::List => {
            let mut s = String::new();
            for id in lib.ids() {
                let rec = lib.get(&id)?;
                s.push_str(&format!("{id:<16} {}\n", rec.title()));
            }
            emit(out, &s)?;
            Ok(EXIT_PASS)
        }
        Command::Verify { id, suite } => {
            let rec = lib.get(id)?;
            let r = verify(&rec, &[*suite], &settings)?;
            match cli.format {
                Format::Text => emit(out, &r.to_text())?,
                Format::Json => emit(out, &json(&r))?,
            }
            let pass = r.pass();
            let mut cache = load_cache()?;
            cache.record_verify(r);
            save_cache(&cache)?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Integrate {
            id,
            x0,
            x0b,
            prolong,
            t1,
            step,
            coeff,
            invariants,
            drift_tol,
            out: dir,
        } => {
            let rec = lib.get(id)?;
            let mut states = Vec::new();
            match x0 {
                Some(x) => states.push(x.0.clone()),
                None if !x0b.is_empty() => return Err(CliError::Usage("--x0b needs --x0".into())),
                None => {}
            }
            states.extend(x0b.iter().map(|x| x.0.clone()));
            let req = integrate::Request {
                states,
                copies: prolong.map(|m| m as usize),
                t1: *t1,
                step: *step,
                coeffs: coeff.clone(),
                invariants: *invariants,
                drift_tol: *drift_tol,
                seed: Some(settings.seed),
            };
            let (r, traj) = integrate::run(&rec, &req)?;
            let written = integrate::write_outputs(dir, &r, &traj)?;
            match cli.format {
                Format::Text => {
                    emit(out, &r.to_text())?;
                    for p in &written {
                        let _ = writeln!(err, "wrote {}", p.display());
                    }
                }
                Format::Json => emit(out, &json(&r))?,
            }
            let pass = r.pass();
            let mut cache = load_cache()?;
            cache.record_integrate(r);
            save_cache(&cache)?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Report { run_all } => {
            let cache = if *run_all {
                let fresh = report::run_all(&lib, &settings)?;
                save_cache(&fresh)?;
                fresh
            } else {
                load_cache()?
            };
            let doc = report::build(&cache, &lib);
            match cli.format {
                Format::Text => emit(out, &doc.to_text())?,
                Format::Json => emit(out, &json(&doc))?,
            }
            Ok(if *run_all && !doc.pass() { EXIT_FAIL } else { EXIT_PASS })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_states_parse() {
        let cli = Cli::try_parse_from([
            "kslie",
            "integrate",
            "riccati4",
            "--x0",
            "-1,-2,-3,-4",
            "--x0b",
            "1,2,3,4",
        ])
        .unwrap();
        match cli.command {
            Command::Integrate { x0, x0b, .. } => {
                assert_eq!(x0, Some(State(vec![-1.0, -2.0, -3.0, -4.0])));
                assert_eq!(x0b.len(), 1);
            }
            _ => panic!("wrong command"),
        }
    }
}
