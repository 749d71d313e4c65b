//! Enumerate the phase-matched processes and group them into spectral peaks,
//! for both bundled configurations.
//!
//!     cargo run --release --example process_table

use std::path::Path;

use wgpdc::cli::Model;

fn main() -> wgpdc::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["fitted.json", "calibrated.json"] {
        let model = Model::load(&dir.join(name))?;
        let spec = model.waveguide.spec();
        println!(
            "== {name}: Λ = {} µm, {} × {} µm, Δn = {}",
            spec.poling.period_um, spec.width_um, spec.depth_um, spec.delta_n
        );
        let triplets = model.triplets()?;
        println!("{} processes above the overlap threshold in the window", triplets.len());
        for c in model.clusters()? {
            println!(
                "{:3} λs = {:7.2} nm  λi = {:7.2} nm{}",
                c.label,
                c.signal_center_nm,
                c.idler_center_nm,
                if c.higher_order { "  (higher order)" } else { "" }
            );
            for t in &c.members {
                let pk = t.peak.expect("clustered processes are phase matched");
                println!(
                    "      {}   overlap {:.4} µm⁻¹   {:.3} / {:.3} nm",
                    t.labels(),
                    t.overlap,
                    pk.signal_nm,
                    pk.idler_nm
                );
            }
        }
        println!();
    }
    Ok(())
}
