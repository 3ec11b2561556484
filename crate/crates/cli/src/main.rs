use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qnsc_cli::commands::{self, cmd_attack, cmd_decrypt, cmd_encrypt, cmd_simulate, cmd_srm, cmd_sweep};
use qnsc_cli::config::{self, ExperimentConfig, ParsedConfig, SweepAxes};
use qnsc_cli::record::write_csv;
use qnsc_cli::CliError;

#[derive(Parser)]
#[command(name = "qnsc", version, about = "Phase-PPM quantum-noise stream cipher simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario (used when no config file is given).
    #[arg(long, global = true, value_enum)]
    scenario: Option<Scenario>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true, env = "QNSC_SEED", value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    shards: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    #[value(name = "paper-sec5")]
    PaperSec5,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct KeyArgs {
    /// Key as 64 lowercase hex digits.
    #[arg(long, conflicts_with = "key_file", required_unless_present = "key_file")]
    key: Option<String>,
    /// File holding the key in the same form.
    #[arg(long, value_name = "PATH")]
    key_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo and analytic error rates for one parameter set.
    Simulate {
        /// Include wall-clock time in the record (breaks byte-identical output).
        #[arg(long)]
        timing: bool,
    },
    /// Simulate the Cartesian grid of the J, M and alpha_sq lists.
    Sweep,
    /// Square-root-measurement error of a J-PSK constellation.
    Srm {
        #[arg(long)]
        j: u64,
        #[arg(long)]
        alpha_sq: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Encrypt a file into a ciphertext frame.
    Encrypt {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
    },
    /// Decrypt a ciphertext frame.
    Decrypt {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
        /// Homodyne noise standard deviation.
        #[arg(long, default_value_t = 0.0)]
        sigma_ho: f64,
    },
    /// Keyless heterodyne attack on a ciphertext frame.
    Attack {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Original plaintext, for scoring.
        #[arg(long, value_name = "PATH")]
        plain: PathBuf,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn resolve(c: &Common) -> Result<ParsedConfig, CliError> {
    let mut parsed = match &c.config {
        Some(path) => config::load(path)?,
        None => {
            let cfg = ExperimentConfig::paper_sec5();
            let p = cfg.params;
            ParsedConfig {
                config: cfg,
                axes: SweepAxes {
                    j: vec![p.j_phases],
                    m: vec![p.m_modes],
                    alpha_sq: vec![p.alpha_sq],
                },
            }
        }
    };
    let cfg = &mut parsed.config;
    if let Some(s) = c.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(s) = c.shards {
        cfg.shards = s;
    }
    Ok(parsed)
}

fn key_of(k: &KeyArgs) -> Result<qnsc_core::keystream::SecretKey, CliError> {
    match (&k.key, &k.key_file) {
        (Some(hex), _) => commands::parse_key(hex),
        (None, Some(path)) => {
            let text = String::from_utf8(read(path)?).map_err(|_| CliError::input("key file is not text"))?;
            commands::parse_key(&text)
        }
        (None, None) => Err(CliError::input("a key is required")),
    }
}

fn csv_bytes(records: &[qnsc_cli::record::ResultRecord]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records)?;
    Ok(buf)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let parsed = resolve(&cli.common)?;
    let cfg = &parsed.config;
    let out = &cli.common.out;
    match cli.command {
        Command::Simulate { timing } => {
            let record = cmd_simulate(cfg, timing)?;
            eprintln!("{}", commands::summary(&record));
            let records = [record];
            if let Some(p) = &cfg.json_out {
                write_file(p, records[0].to_json().as_bytes())?;
            }
            if let Some(p) = &cfg.csv_out {
                write_file(p, &csv_bytes(&records)?)?;
            }
            match cli.common.format {
                Format::Json => emit(out, records[0].to_json().as_bytes()),
                Format::Csv => emit(out, &csv_bytes(&records)?),
            }
        }
        Command::Sweep => {
            let records = cmd_sweep(&parsed)?;
            let csv = csv_bytes(&records)?;
            if let Some(p) = &cfg.csv_out {
                write_file(p, &csv)?;
            }
            match cli.common.format {
                Format::Csv => emit(out, &csv),
                Format::Json => {
                    let body: Vec<String> = records.iter().map(|r| r.to_json().trim_end().to_string()).collect();
                    emit(out, format!("[\n{}\n]\n", body.join(",\n")).as_bytes())
                }
            }
        }
        Command::Srm { j, alpha_sq, m } => emit(out, cmd_srm(j, alpha_sq, m)?.to_json().as_bytes()),
        Command::Encrypt { input, key } => {
            let frame = cmd_encrypt(&read(&input)?, cfg, &key_of(&key)?)?;
            emit(out, &frame)
        }
        Command::Decrypt { input, key, sigma_ho } => {
            let plain = cmd_decrypt(&read(&input)?, &key_of(&key)?, sigma_ho, cfg.master_seed)?;
            emit(out, &plain)
        }
        Command::Attack { input, plain } => {
            let report = cmd_attack(&read(&input)?, &read(&plain)?, cfg.params.sigma_he, cfg.master_seed)?;
            emit(out, report.to_json().as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qnsc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
