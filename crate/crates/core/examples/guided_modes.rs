//! Guided modes of the fitted waveguide at the pump and degenerate wavelengths.
//!
//!     cargo run --example guided_modes

use std::sync::Arc;

use wgpdc::dispersion::{Polarization, PolingGrating, SellmeierModel};
use wgpdc::modesolver::{ModeLabel, Orientation, Waveguide, WaveguideSpec};

fn main() -> wgpdc::Result<()> {
    let spec = WaveguideSpec {
        width_um: 4.1,
        depth_um: 9.3,
        delta_n: 0.008,
        poling: PolingGrating::first_order(8.92)?,
        length_mm: 10.0,
        orientation: Orientation::WidthHorizontal,
    };
    let wg = Waveguide::new(spec, Arc::new(SellmeierModel::bundled_ktp()))?;
    let cap = ModeLabel::new(16, 16);

    for (pol, lambda) in [
        (Polarization::Y, 403.3),
        (Polarization::Y, 806.6),
        (Polarization::Z, 806.6),
    ] {
        let modes = wg.solve_modes(pol, lambda, cap)?;
        println!("{pol}-polarized at {lambda} nm: {} guided modes", modes.len());
        for m in modes.iter().take(12) {
            println!(
                "  {}  n_eff = {:.7}  (substrate {:.7}, core {:.7})",
                m.label, m.n_eff, m.n_substrate, m.n_core
            );
        }
        if modes.len() > 12 {
            println!("  ...");
        }
    }

    // the same geometry rotated: width now runs vertically
    let rotated = wg.with_spec(WaveguideSpec {
        orientation: Orientation::WidthVertical,
        ..wg.spec().clone()
    })?;
    let n00 = rotated.n_eff(ModeLabel::new(0, 0), Polarization::Y, 806.6)?;
    println!("rotated guide, (0,0) y at 806.6 nm: n_eff = {n00:.7}");

    match wg.n_eff(ModeLabel::new(9, 0), Polarization::Y, 806.6) {
        Err(e) => println!("beyond cutoff: {e}"),
        Ok(n) => println!("(9,0) guided, n_eff = {n:.7}"),
    }
    Ok(())
}
