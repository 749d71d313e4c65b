//! Generate synthetic peak positions at a known geometry, then recover the
//! geometry from a distant seed with the two-stage fit.
//!
//!     cargo run --release --example fit_roundtrip [-- --write peaks.csv]

use std::sync::Arc;

use wgpdc::dispersion::{PolingGrating, SellmeierModel};
use wgpdc::fit::{self, Arm, FitOptions, FitProblem, MeasuredPeak, Parameters};
use wgpdc::modesolver::{ModeLabel, Orientation, WaveguideSpec};
use wgpdc::pdc::PumpSpec;

fn main() -> wgpdc::Result<()> {
    let write_to = std::env::args().skip_while(|a| a != "--write").nth(1);

    let truth = Parameters {
        period_um: 8.92,
        width_um: 4.1,
        depth_um: 9.3,
        delta_n: 0.008,
    };
    let seed = Parameters {
        period_um: 8.72,
        width_um: 5.0,
        depth_um: 10.0,
        delta_n: 0.01,
    };
    let template = WaveguideSpec {
        width_um: seed.width_um,
        depth_um: seed.depth_um,
        delta_n: seed.delta_n,
        poling: PolingGrating::first_order(seed.period_um)?,
        length_mm: 10.0,
        orientation: Orientation::WidthHorizontal,
    };
    let pump = PumpSpec::new(
        403.3,
        0.8,
        &[(ModeLabel::new(0, 0), 0.625), (ModeLabel::new(0, 1), 0.375)],
    )?;

    // a placeholder measurement is enough to build the problem that generates the real one
    let placeholder = vec![
        MeasuredPeak {
            arm: Arm::Signal,
            wavelength_nm: 800.0,
            weight: 1.0,
        };
        2
    ];
    let mut problem = FitProblem::new(placeholder, template, Arc::new(SellmeierModel::bundled_ktp()), pump)?;
    problem.measured = fit::synthetic_peaks(&problem, &truth)?;
    println!("{} synthetic peaks:", problem.measured.len());
    for p in &problem.measured {
        println!("  {:6} {:.4} nm", p.arm, p.wavelength_nm);
    }
    if let Some(path) = write_to {
        std::fs::write(&path, fit::write_measured_csv(&problem.measured)).map_err(|source| wgpdc::Error::Io {
            path: path.clone(),
            source,
        })?;
        println!("wrote {path}");
    }

    let r = fit::fit_two_stage(&problem, &seed, &FitOptions::default())?;
    for s in &r.stages {
        println!(
            "stage {:8} {:4} evaluations, objective {:.3e}",
            s.name, s.evaluations, s.objective
        );
    }
    let p = r.parameters;
    println!(
        "recovered Λ = {:.5} µm  w = {:.4} µm  d = {:.4} µm  Δn = {:.6}  ({} evaluations)",
        p.period_um, p.width_um, p.depth_um, p.delta_n, r.evaluations
    );
    println!(
        "errors    {:+.5}       {:+.4}       {:+.4}       {:+.6}",
        p.period_um - truth.period_um,
        p.width_um - truth.width_um,
        p.depth_um - truth.depth_um,
        p.delta_n - truth.delta_n
    );
    Ok(())
}
