use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lambda_spectra::fitting::fit_lineshape;
use lambda_spectra::hanle;
use lambda_spectra::scan::{self, io, presets, ScanConfig};
use lambda_spectra::units::to_khz;
use lambda_spectra::Error;

#[derive(Parser)]
#[command(name = "scan", version, about = "Simulate and fit lambda-system probe spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a one-photon detuning sweep and write CSV outputs.
    Run {
        config: PathBuf,
        /// Output directory, overriding [output] directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the lineshape to a spectrum CSV (`delta_mhz,transmission`).
    Fit { spectrum: PathBuf },
    /// List the named presets, or print one as a config document.
    Presets { name: Option<String> },
    /// Check a config file and print its resolved form.
    Validate { config: PathBuf },
    /// Print the Zeeman dark-state algebra.
    Hanle,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Io { .. } => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let mut cfg = ScanConfig::load(&config)?;
            if let Some(dir) = out {
                cfg.output.directory = dir;
            }
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            scan::configure_threads()?;
            let result = scan::run_scan(&cfg)?;
            let written = scan::write_outputs(&cfg, &result, &cfg.output.directory)?;
            let failed = result.curve.rows.iter().filter(|r| !r.converged).count();
            println!(
                "{} points, {} without a converged fit, {} files in {}",
                result.curve.rows.len(),
                failed,
                written.len(),
                cfg.output.directory.display()
            );
        }
        Command::Fit { spectrum } => {
            let s = io::load_spectrum_csv(&spectrum)?;
            let f = fit_lineshape(&s)?;
            let p = &f.params;
            println!("A = {}", io::format_number(p.a));
            println!("B = {}", io::format_number(p.b));
            println!("C = {}", io::format_number(p.c));
            println!("D = {}", io::format_number(f.polar.d));
            println!("phi_rad = {}", io::format_number(f.polar.phi));
            println!("phi_over_pi = {}", io::format_number(f.polar.phi / std::f64::consts::PI));
            println!("gamma_tilde_khz = {}", io::format_number(to_khz(p.gamma_tilde)));
            println!("delta0_khz = {}", io::format_number(to_khz(p.delta0)));
            println!("residual_rms = {}", io::format_number(f.residual_rms));
            println!("converged = {}", f.converged);
            println!("iterations = {}", f.iterations);
        }
        Command::Presets { name: None } => {
            for name in presets::NAMES {
                let cfg = ScanConfig::from_toml_str(&presets::text(name)?)?;
                let note = if presets::warning(name).is_some() { "  (outside model validity)" } else { "" };
                println!(
                    "{name:<12} gamma_deph = {} MHz, gamma_bc = {} kHz, sweep {}..{} MHz{note}",
                    cfg.rates.gamma_deph_mhz, cfg.rates.gamma_bc_khz, cfg.sweep.start_mhz, cfg.sweep.stop_mhz
                );
            }
        }
        Command::Presets { name: Some(name) } => {
            let cfg = ScanConfig::from_toml_str(&presets::text(&name)?)?;
            print!("{}", cfg.to_toml_string());
        }
        Command::Validate { config } => {
            let cfg = ScanConfig::load(&config)?;
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            print!("{}", cfg.to_toml_string());
        }
        Command::Hanle => print!("{}", hanle::report()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
