//! Refractive indices and group indices of KTP from the bundled Sellmeier data.
//!
//!     cargo run --example dispersion

use wgpdc::dispersion::{Polarization, PolingGrating, SellmeierModel};

fn main() -> wgpdc::Result<()> {
    let ktp = SellmeierModel::bundled_ktp();
    println!("source: {}", ktp.source());
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10}",
        "λ (nm)", "n_y", "n_z", "n_g,y", "n_g,z"
    );
    for lambda in [403.3, 500.0, 633.0, 766.0, 806.6, 846.0, 1064.0, 1550.0] {
        let mut row = format!("{lambda:8.1}");
        let mut ng = String::new();
        for pol in [Polarization::Y, Polarization::Z] {
            let n = ktp.refractive_index(pol, lambda)?;
            let group = n - lambda * ktp.dn_dlambda(pol, lambda)?;
            row += &format!(" {n:10.6}");
            ng += &format!(" {group:10.6}");
        }
        println!("{row}{ng}");
    }

    // bulk quasi-phase-matching period for degenerate type-II conversion of 403.3 nm
    let (p, s) = (403.3, 806.6);
    let mismatch = ktp.refractive_index(Polarization::PUMP, p)? / p
        - ktp.refractive_index(Polarization::SIGNAL, s)? / s
        - ktp.refractive_index(Polarization::IDLER, s)? / s;
    let period_um = 1e-3 / mismatch;
    let grating = PolingGrating::first_order(period_um)?;
    println!(
        "bulk degenerate QPM period: {period_um:.4} µm (K = {:.6} µm⁻¹)",
        grating.wavevector()?
    );

    match ktp.refractive_index(Polarization::Y, 5000.0) {
        Err(e) => println!("outside the fitted range: {e}"),
        Ok(n) => println!("unexpected value {n}"),
    }
    Ok(())
}
