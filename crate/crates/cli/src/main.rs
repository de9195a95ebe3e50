use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fftntt::engine::{self, Engine, Fault};
use fftntt::formats::{format_signal, parse_signal};
use fftntt::memory::unpack;
use fftntt::reference::golden_trace;
use fftntt::rng::random_signal;
use fftntt::twiddle;
use fftntt::validation::{self, verify_signal};
use fftntt::{Execution, Mode, Signal};

#[derive(Parser)]
#[command(
    name = "fftntt",
    version,
    about = "Unified FFT/NTT butterfly engine model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write fft_rom.hex and ntt_rom.hex into a directory.
    GenTwiddles {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Transform an input file (or a seeded random input).
    Run {
        #[command(flatten)]
        input: InputArgs,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the engine stage by stage with the golden trace and oracle.
    Verify {
        /// Mode to check; all modes when omitted.
        #[arg(long)]
        mode: Option<Mode>,
        /// Input file to check instead of seeded inputs.
        #[arg(long, requires = "mode", conflicts_with_all = ["seed", "count"])]
        r#in: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds to check.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Flip one output bit in the given stage.
        #[arg(long, value_name = "STAGE")]
        inject_fault: Option<usize>,
        #[arg(long)]
        sequential: bool,
    },
    /// Dump the input and golden per-stage memory images.
    Vectors {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        trace_dir: PathBuf,
    },
    /// Per-stage cycle breakdown.
    Cycles {
        #[arg(long)]
        mode: Option<Mode>,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    mode: Mode,
    /// Input file: one value per line.
    #[arg(long, conflicts_with = "seed")]
    r#in: Option<PathBuf>,
    /// Seed for a random input when no file is given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InputArgs {
    fn load(&self) -> Result<Signal> {
        match &self.r#in {
            Some(path) => read_signal(self.mode, path),
            None => Ok(random_signal(self.mode, self.seed)),
        }
    }
}

fn read_signal(mode: Mode, path: &Path) -> Result<Signal> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_signal(mode, &text).with_context(|| format!("{}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn gen_twiddles(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join("fft_rom.hex"), &twiddle::fft_rom().to_hex())?;
    write(&out.join("ntt_rom.hex"), &twiddle::ntt_rom().to_hex())?;
    Ok(())
}

fn run(input: &InputArgs, out: Option<&Path>) -> Result<()> {
    let mode = input.mode;
    let signal = input.load()?;
    let image = validation::load(mode, &signal)?;
    let (image, report) = engine::run(mode, image, &twiddle::rom_for(mode))?;
    let text = format_signal(&unpack(mode, &image)?);
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    println!("cycles: {}", report.total_cycles);
    Ok(())
}

fn verify(
    modes: &[Mode],
    file: Option<&Path>,
    seeds: std::ops::Range<u64>,
    fault: Option<Fault>,
    exec: Execution,
) -> Result<bool> {
    let mut ok = true;
    for &mode in modes {
        let outcomes = match file {
            Some(path) => {
                let engine = Engine {
                    fault,
                    ..Engine::default()
                };
                vec![verify_signal(mode, &read_signal(mode, path)?, &engine)]
            }
            None => validation::verify_sweep(mode, seeds.clone(), fault, exec),
        };
        let total = outcomes.len();
        let mut failed = 0;
        for outcome in outcomes {
            let outcome = outcome?;
            if !outcome.passed() {
                if failed == 0 {
                    println!("{outcome}");
                }
                failed += 1;
            }
        }
        println!("{mode}: {}/{total} passed", total - failed);
        ok &= failed == 0;
    }
    Ok(ok)
}

fn vectors(input: &InputArgs, dir: &Path) -> Result<()> {
    let mode = input.mode;
    let signal = input.load()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join("input.txt"), &format_signal(&signal))?;
    write(
        &dir.join("input.hex"),
        &validation::load(mode, &signal)?.to_hex(),
    )?;
    let trace = golden_trace(mode, &signal)?;
    for (stage, image) in trace.snapshots.iter().enumerate() {
        write(&dir.join(format!("stage_{stage:02}.hex")), &image.to_hex())?;
    }
    if let Some(last) = trace.snapshots.last() {
        write(
            &dir.join("output.txt"),
            &format_signal(&unpack(mode, last)?),
        )?;
    }
    println!(
        "{} stages written to {}",
        trace.snapshots.len(),
        dir.display()
    );
    Ok(())
}

fn cycles(modes: &[Mode]) {
    for &mode in modes {
        let report = engine::cycle_model(mode);
        println!("{mode}");
        println!("  stage  issues  overhead  cycles");
        for (i, s) in report.stages.iter().enumerate() {
            println!(
                "  {i:>5}  {:>6}  {:>8}  {:>6}",
                s.issues, s.overhead, s.cycles
            );
        }
        println!("cycles: {}", report.total_cycles);
    }
}

fn modes(mode: Option<Mode>) -> Vec<Mode> {
    mode.map_or_else(|| Mode::ALL.to_vec(), |m| vec![m])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenTwiddles { out } => gen_twiddles(&out).map(|_| true),
        Command::Run { input, out } => run(&input, out.as_deref()).map(|_| true),
        Command::Verify {
            mode,
            r#in,
            seed,
            count,
            inject_fault,
            sequential,
        } => {
            if count == 0 {
                Err(anyhow::anyhow!("--count must be at least 1"))
            } else {
                let exec = if sequential {
                    Execution::Sequential
                } else {
                    Execution::Parallel
                };
                check_fault(mode, inject_fault).and_then(|fault| {
                    verify(
                        &modes(mode),
                        r#in.as_deref(),
                        seed..seed + count,
                        fault,
                        exec,
                    )
                })
            }
        }
        Command::Vectors { input, trace_dir } => vectors(&input, &trace_dir).map(|_| true),
        Command::Cycles { mode } => {
            cycles(&modes(mode));
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn check_fault(mode: Option<Mode>, stage: Option<usize>) -> Result<Option<Fault>> {
    let Some(stage) = stage else {
        return Ok(None);
    };
    for m in modes(mode) {
        let stages = engine::stage_count(m);
        if stage >= stages {
            bail!("{m} has {stages} stages; cannot inject a fault in stage {stage}");
        }
    }
    Ok(Some(Fault::at_stage(stage)))
}
