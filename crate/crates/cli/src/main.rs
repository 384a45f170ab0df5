use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flipdec_cli::commands::{self, DecodeRequest, SimulateRequest};
use flipdec_cli::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "flipdec",
    version,
    about = "Flip decoding over Rayleigh fading: decode, simulate, bound"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Grid {
    /// Comma-separated E_b/N_0 values in dB
    #[arg(long, conflicts_with_all = ["start", "stop", "step"])]
    ebno: Option<String>,
    #[arg(long, requires_all = ["stop", "step"])]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in code families with n, k, d_min and rate
    Codes,
    /// Decode one received word
    Decode {
        /// Code spec, e.g. bch:15,7
        #[arg(long)]
        code: String,
        /// Decoder spec: dfd, edfd:E, hdd, softml, grand, orbgrand, fading-grand:M,B
        #[arg(long, default_value = "dfd")]
        decoder: String,
        /// Hard decisions, comma-separated 0/1 (or @file)
        #[arg(long)]
        r: String,
        /// Fading magnitudes, comma-separated (or @file)
        #[arg(long)]
        h: String,
        /// In-phase channel outputs (or @file); defaults to h with the sign of r
        #[arg(long)]
        y: Option<String>,
        /// Operating E_b/N_0 in dB, needed by fading-grand
        #[arg(long, allow_hyphen_values = true)]
        ebno: Option<f64>,
    },
    /// Run a Monte-Carlo sweep described by a TOML manifest
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "FLIPDEC_WORKERS")]
        workers: Option<usize>,
    },
    /// Evaluate the flip-decoder word-error bound over an E_b/N_0 grid
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dmin: usize,
        /// Message length used for the rate; defaults to n
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coding gain between a sweep CSV and a reference CSV or `uncoded`
    Gain {
        #[arg(long)]
        coded: PathBuf,
        #[arg(long, default_value = "uncoded")]
        reference: String,
        #[arg(long, default_value_t = 1e-5)]
        target: f64,
        /// Decoder to select when the coded CSV holds several
        #[arg(long)]
        decoder: Option<String>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Codes => print!("{}", commands::cmd_codes()?),
        Command::Decode {
            code,
            decoder,
            r,
            h,
            y,
            ebno,
        } => {
            let report = commands::cmd_decode(&DecodeRequest {
                code,
                decoder,
                r,
                h,
                y,
                ebno_db: ebno,
            })?;
            print!("{report}");
        }
        Command::Simulate {
            config,
            seed,
            out,
            workers,
        } => {
            let (path, rows) = commands::cmd_simulate(&SimulateRequest {
                config,
                seed,
                out,
                workers,
            })?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::Bound {
            n,
            dmin,
            k,
            grid,
            out,
        } => {
            let range = match (grid.start, grid.stop, grid.step) {
                (Some(a), Some(b), Some(c)) => Some((a, b, c)),
                _ => None,
            };
            let ebno = commands::ebno_grid(grid.ebno.as_deref(), range)?;
            let rows = commands::cmd_bound(n, dmin, k, &ebno)?;
            if let Some(text) = commands::write_bound(out.as_deref(), &rows)? {
                print!("{text}");
            }
        }
        Command::Gain {
            coded,
            reference,
            target,
            decoder,
        } => {
            let g = commands::cmd_gain(&coded, &reference, target, decoder.as_deref())?;
            println!("coded_ebno_db: {:.3}", g.coded_ebno_db);
            println!("reference_ebno_db: {:.3}", g.reference_ebno_db);
            println!("gain_db: {:.3}", g.gain_db);
        }
    }
    Ok(())
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
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("run `flipdec --help` for usage");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
