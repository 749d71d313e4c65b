use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wgpdc::cli::{self, Command, Invocation};
use wgpdc::dispersion::Polarization;
use wgpdc::fit::Arm;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Modes,
    Peaks,
    Spectrum,
    Jsa,
    Schmidt,
    Coinc,
    Render,
    Fit,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ArmArg {
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolArg {
    Y,
    Z,
}

/// Guided-mode PDC model of a PPKTP waveguide.
#[derive(Debug, Parser)]
#[command(name = "wgpdc", version)]
struct Args {
    command: Cmd,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Peak label (A..E, or H1.. for higher-order clusters).
    #[arg(long)]
    peak: Option<String>,
    #[arg(long, value_enum, default_value = "signal")]
    arm: ArmArg,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `modes`: wavelength in nm (default: degenerate wavelength).
    #[arg(long)]
    wavelength: Option<f64>,
    /// `modes`: polarization (default: y).
    #[arg(long, value_enum)]
    pol: Option<PolArg>,
    /// `fit`: measured peak CSV; overrides `fit.measured_peaks`.
    #[arg(long)]
    measured: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let command = match args.command {
        Cmd::Modes => Command::Modes,
        Cmd::Peaks => Command::Peaks,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Jsa => Command::Jsa,
        Cmd::Schmidt => Command::Schmidt,
        Cmd::Coinc => Command::Coinc,
        Cmd::Render => Command::Render,
        Cmd::Fit => Command::Fit,
        Cmd::All => Command::All,
    };
    let inv = Invocation {
        peak: args.peak,
        arm: match args.arm {
            ArmArg::Signal => Arm::Signal,
            ArmArg::Idler => Arm::Idler,
        },
        out: args.out,
        wavelength_nm: args.wavelength,
        polarization: args.pol.map(|p| match p {
            PolArg::Y => Polarization::Y,
            PolArg::Z => Polarization::Z,
        }),
        measured: args.measured,
        ..Invocation::new(command, args.config)
    };
    match cli::execute(&inv) {
        Ok(report) => {
            print!("{}", report.summary);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wgpdc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
