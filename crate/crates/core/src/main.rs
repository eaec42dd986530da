use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leoloc::pipeline::evaluate::{evaluate, pass_capture, pass_observables, run_phase_offsets, simulate_pass};
use leoloc::pipeline::obsfile::{read_pass, write_pass, PassFile};
use leoloc::pipeline::report::{write_pass_csv, write_result, write_summary};
use leoloc::pipeline::scenario::{Mode, Scenario};
use leoloc::pipeline::truthfile::{read_truth, write_truth};
use leoloc::pipeline::{calibrate, localize, CalibrationOffsets};
use leoloc::signalproc::iqfile::{read_iq, write_iq};
use leoloc::signalproc::{frontend, DetectConfig, StftConfig};
use leoloc::{Error, Result};

/// Exit code for command-line usage errors.
const USAGE_EXIT: u8 = 64;

#[derive(Parser)]
#[command(name = "leoloc", version, about = "Passive localization of LEO satellites from a sparse three-antenna array")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario TOML file; defaults apply when omitted.
    #[arg(long, short)]
    scenario: Option<PathBuf>,
}

impl ScenarioArg {
    fn load(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(p) => Scenario::from_file(p),
            None => Ok(Scenario::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate passes and write observation and truth files.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Output directory, created if missing.
        #[arg(long, short)]
        out_dir: PathBuf,
        /// Number of scored passes to write (pass 0, the calibration pass, is always written).
        #[arg(long)]
        passes: Option<usize>,
        /// Also write an IQ capture of this pass.
        #[arg(long)]
        iq_pass: Option<usize>,
        /// Length of the IQ capture, s.
        #[arg(long, default_value_t = 2.0)]
        iq_seconds: f64,
    },
    /// Turn an IQ capture into a pass observation file.
    Frontend {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// IQ capture.
        #[arg(long)]
        iq: PathBuf,
        /// Output pass observation file.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Localize one pass observation file.
    Localize {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Pass observation file.
        #[arg(long)]
        obs: PathBuf,
        /// Output result file.
        #[arg(long, short)]
        out: PathBuf,
        /// Truth of a known pass used to calibrate phase offsets.
        #[arg(long, requires = "cal_obs")]
        cal_truth: Option<PathBuf>,
        /// Observations of the known pass.
        #[arg(long, requires = "cal_truth")]
        cal_obs: Option<PathBuf>,
    },
    /// Run the scenario's Monte Carlo evaluation and print percentile tables.
    Evaluate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Directory for summary.txt and passes.csv.
        #[arg(long, short)]
        out_dir: Option<PathBuf>,
    },
    /// Like evaluate, with one arm per spacing in `sweep.k`.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, short)]
        out_dir: Option<PathBuf>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn simulate(sc: &Scenario, out_dir: &Path, passes: usize, iq: Option<(usize, f64)>) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let earth = sc.localize_config().earth;
    let offsets = run_phase_offsets(sc);
    let gs = sc.station(sc.array.k)?;
    for p in 0..=passes {
        let pass = simulate_pass(sc, p, &earth)?;
        let obs = pass_observables(sc, &pass, sc.array.k, offsets)?;
        let pf = PassFile { station: gs, fc: sc.array.fc_hz, dt: sc.pass.dt_s, obs };
        write_pass(create(&out_dir.join(format!("pass_{p:04}.obs")))?, &pf)?;
        write_truth(create(&out_dir.join(format!("pass_{p:04}.truth")))?, &pass.truth)?;
        if let Some((ip, secs)) = iq.filter(|(ip, _)| *ip == p) {
            let cap = pass_capture(sc, &pass, sc.array.k, offsets, Some(secs))?;
            write_iq(create(&out_dir.join(format!("pass_{ip:04}.iq")))?, &cap)?;
        }
    }
    println!("wrote passes 0..={passes} to {} (pass 0 is the calibration pass)", out_dir.display());
    Ok(())
}

fn run_evaluation(sc: &Scenario, out_dir: Option<&Path>) -> Result<()> {
    let ev = evaluate(sc)?;
    write_summary(std::io::stdout().lock(), &ev)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        write_summary(create(&dir.join("summary.txt"))?, &ev)?;
        write_pass_csv(create(&dir.join("passes.csv"))?, &ev)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { scenario, out_dir, passes, iq_pass, iq_seconds } => {
            let sc = scenario.load()?;
            if !(iq_seconds > 0.0) {
                return Err(Error::InvalidInput(format!("--iq-seconds must be positive, got {iq_seconds}")));
            }
            simulate(&sc, &out_dir, passes.unwrap_or(sc.passes), iq_pass.map(|p| (p, iq_seconds)))
        }
        Command::Frontend { scenario, iq, out } => {
            let sc = scenario.load()?;
            let cap = read_iq(std::io::BufReader::new(open(&iq)?))?;
            let stft = StftConfig::default();
            let obs = frontend(&cap, &stft, &DetectConfig::default())?;
            let pf = PassFile { station: sc.station(sc.array.k)?, fc: cap.fc, dt: stft.window * (1.0 - stft.overlap), obs };
            write_pass(create(&out)?, &pf)?;
            println!("{} frames, {} with a detection", pf.obs.len(), pf.obs.valid_count());
            Ok(())
        }
        Command::Localize { scenario, obs, out, cal_truth, cal_obs } => {
            let mut cfg = scenario.load()?.localize_config();
            let pf = read_pass(open(&obs)?)?;
            cfg.fc = pf.fc;
            let cal = match (cal_truth, cal_obs) {
                (Some(t), Some(o)) => {
                    let truth = read_truth(open(&t)?)?;
                    let known = read_pass(open(&o)?)?;
                    calibrate(&truth, &known.obs, &pf.station, &o.display().to_string())?
                }
                _ => CalibrationOffsets::zero(),
            };
            let r = localize(&pf.obs, &pf.station, &cal, &cfg)?;
            write_result(create(&out)?, &r)?;
            println!(
                "winner=({}, {}) h_star_km={:.1} survivors={} samples={}",
                r.winner.0,
                r.winner.1,
                r.h_star / 1e3,
                r.survivors,
                r.times.len()
            );
            Ok(())
        }
        Command::Evaluate { scenario, out_dir } => run_evaluation(&scenario.load()?, out_dir.as_deref()),
        Command::Sweep { scenario, out_dir } => {
            let sc = Scenario { mode: Mode::Sweep, ..scenario.load()? };
            sc.validate()?;
            run_evaluation(&sc, out_dir.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error[usage]: {}", e.to_string().trim_start_matches("error: ").trim_end());
            return ExitCode::from(USAGE_EXIT);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
