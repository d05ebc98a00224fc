mod trace;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsx_core::congruence::canonicalize;
use rsx_core::properties::{run_corpus, CorpusSpec, ProgramResult};
use rsx_core::semantics::{enumerate_forward, stuck_diagnostics, Direction};
use rsx_core::surface::load_config;
use rsx_core::Configuration;
use rsx_stepper::{Stepper, DEFAULT_PORT};

use trace::{read_trace, replay_trace, walk, write_trace, Policy, TraceRecord};

#[derive(Parser)]
#[command(name = "rsx", version, about = "Workbench for reversible monitored sessions")]
struct Cli {
    /// Colored output.
    #[arg(long, env = "RSX_COLOR", value_enum, default_value_t = ColorMode::Auto, global = true)]
    color: ColorMode,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColorMode {
    Auto,
    Never,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    First,
    Random,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and check a configuration, print its canonical form.
    Check { file: PathBuf },
    /// Run forward until stuck or for N steps.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PolicyArg::First)]
        policy: PolicyArg,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Undo steps from a configuration or from the end of a trace (.jsonl).
    Undo {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a trace by re-running its redex keys.
    Replay { file: PathBuf },
    /// Generate programs, explore them and run the property checks.
    Props {
        #[arg(long, default_value_t = 500)]
        corpus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Write per-program JSON reports here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the stepper protocol on loopback.
    Serve {
        #[arg(long, env = "RSX_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
    },
}

struct Style {
    on: bool,
}

impl Style {
    fn paint(&self, code: &str, s: &str) -> String {
        if self.on {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn good(&self, s: &str) -> String {
        self.paint("32", s)
    }

    fn bad(&self, s: &str) -> String {
        self.paint("31", s)
    }
}

enum Failure {
    Input(String),
    Violation,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style { on: matches!(cli.color, ColorMode::Auto) && io::stdout().is_terminal() };
    match execute(cli.cmd, &style) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("{} {msg}", style.bad("error:"));
            ExitCode::from(1)
        }
        Err(Failure::Violation) => ExitCode::from(2),
    }
}

fn execute(cmd: Cmd, style: &Style) -> Result<(), Failure> {
    match cmd {
        Cmd::Check { file } => {
            let m = load_file(&file)?;
            println!("{}", canonicalize(&m).text());
            Ok(())
        }
        Cmd::Run { file, steps, seed, policy, out } => {
            let m = load_file(&file)?;
            let policy = match policy {
                PolicyArg::First => Policy::First,
                PolicyArg::Random => Policy::Random,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (trace, end) = walk(m, Direction::Forward, steps, policy, &mut rng);
            emit(&trace, out.as_deref())?;
            report_end(&trace, &end, style);
            Ok(())
        }
        Cmd::Undo { file, steps, out } => {
            let m = if file.extension().is_some_and(|e| e == "jsonl") {
                let t = read_trace(BufReader::new(open(&file)?)).map_err(Failure::Input)?;
                replay_trace(&t).map_err(Failure::Input)?
            } else {
                load_file(&file)?
            };
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let (trace, end) = walk(m, Direction::Backward, steps, Policy::First, &mut rng);
            emit(&trace, out.as_deref())?;
            let tag = if end.is_initial() { "initial" } else { "not initial" };
            eprintln!("undid {}; configuration is {tag}", steps_text(trace.len() - 1));
            Ok(())
        }
        Cmd::Replay { file } => {
            let t = read_trace(BufReader::new(open(&file)?)).map_err(Failure::Input)?;
            let end = replay_trace(&t).map_err(Failure::Input)?;
            eprintln!("{} {} reproduced", style.good("ok:"), steps_text(t.len() - 1));
            println!("{}", canonicalize(&end).text());
            Ok(())
        }
        Cmd::Props { corpus, seed, budget, out } => {
            let results = run_corpus(&CorpusSpec { count: corpus, seed, budget, ..CorpusSpec::default() });
            if let Some(path) = out {
                let mut w = BufWriter::new(File::create(&path)?);
                for r in &results {
                    serde_json::to_writer(&mut w, r).map_err(|e| Failure::Input(e.to_string()))?;
                    w.write_all(b"\n")?;
                }
                w.flush()?;
            }
            if summarize(&results, style) {
                Ok(())
            } else {
                Err(Failure::Violation)
            }
        }
        Cmd::Serve { port } => {
            let addr = rsx_stepper::spawn(port, Arc::new(Stepper::new()))?;
            eprintln!("stepper listening on {addr}");
            loop {
                std::thread::park();
            }
        }
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_file(path: &Path) -> Result<Configuration, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    load_config(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(trace: &[TraceRecord], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => write_trace(&mut BufWriter::new(File::create(p)?), trace)?,
        None => write_trace(&mut io::stdout().lock(), trace)?,
    }
    Ok(())
}

fn report_end(trace: &[TraceRecord], end: &Configuration, style: &Style) {
    let n = steps_text(trace.len() - 1);
    let pending = enumerate_forward(end).len();
    if pending > 0 {
        eprintln!("stopped after {n}; {pending} forward redexes enabled");
        return;
    }
    eprintln!("stuck after {n}: no forward redex");
    for d in stuck_diagnostics(end) {
        eprintln!("  {} {d}", style.bad("blocked"));
    }
}

fn steps_text(n: usize) -> String {
    if n == 1 {
        "1 step".to_string()
    } else {
        format!("{n} steps")
    }
}

/// Prints one line per check and returns whether every check passed.
fn summarize(results: &[ProgramResult], style: &Style) -> bool {
    let names: Vec<String> = results.first().map(|r| r.reports.iter().map(|x| x.check.clone()).collect()).unwrap_or_default();
    let mut all_ok = true;
    for (i, name) in names.iter().enumerate() {
        let (mut checked, mut bad) = (0, 0);
        for r in results {
            let rep = &r.reports[i];
            checked += rep.checked;
            if !rep.passed() {
                bad += rep.violations.len();
                let v = &rep.violations[0];
                println!("  seed {}: {name} violation at {}", r.seed, v.node);
                for d in &v.redexes {
                    println!("    {d}");
                }
            }
        }
        all_ok &= bad == 0;
        let tag = if bad == 0 { style.good("PASS") } else { style.bad("FAIL") };
        println!("{tag} {name}: {} programs, {checked} checked, {bad} violations", results.len());
    }
    let nodes: usize = results.iter().map(|r| r.nodes).sum();
    let truncated = results.iter().filter(|r| r.truncated).count();
    println!("{} programs, {nodes} nodes, {truncated} truncated", results.len());
    all_ok
}
