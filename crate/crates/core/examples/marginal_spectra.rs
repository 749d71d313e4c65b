//! Single-arm spectra of the calibrated guide, with and without the (0,1)
//! pump mode, printed as a coarse text plot.
//!
//!     cargo run --release --example marginal_spectra

use std::path::Path;

use wgpdc::cli::{Model, RunConfig};
use wgpdc::modesolver::ModeLabel;
use wgpdc::pdc::{self, PumpSpec};

fn plot(model: &Model, title: &str) -> wgpdc::Result<()> {
    let jsa = model.jsa(model.triplets()?)?;
    let m = pdc::marginal_spectra(&[jsa], &model.config.pump)?;
    let max = m.signal.iter().chain(&m.idler).copied().fold(0.0, f64::max);
    println!("-- {title} (signal | idler), 1 nm bins");
    // bins of 1 nm over the grid
    let lo = m.signal_nm[0].ceil();
    let hi = m.signal_nm[m.signal_nm.len() - 1].floor();
    let mut x = lo;
    while x < hi {
        let bin = |axis: &[f64], v: &[f64]| {
            axis.iter()
                .zip(v)
                .filter(|(w, _)| **w >= x && **w < x + 1.0)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max)
        };
        let s = bin(&m.signal_nm, &m.signal) / max;
        let i = bin(&m.idler_nm, &m.idler) / max;
        if s > 0.02 || i > 0.02 {
            println!(
                "{x:6.0} {:<30}|{:<30}",
                "#".repeat((30.0 * s) as usize),
                "#".repeat((30.0 * i) as usize)
            );
        }
        x += 1.0;
    }
    Ok(())
}

fn main() -> wgpdc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/calibrated.json");
    let config = RunConfig::load(&path)?;
    plot(&Model::new(config.clone())?, "pump 62.5 % (0,0) + 37.5 % (0,1)")?;

    // without the (0,1) pump mode the B and D peaks vanish
    let single = RunConfig {
        pump: PumpSpec::new(
            config.pump.center_nm,
            config.pump.fwhm_nm,
            &[(ModeLabel::new(0, 0), 1.0)],
        )?,
        ..config
    };
    plot(&Model::new(single)?, "pump 100 % (0,0)")
}
