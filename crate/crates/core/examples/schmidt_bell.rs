//! Schmidt decomposition of each filtered peak and the spatial Bell states
//! of the two-process peaks.
//!
//!     cargo run --release --example schmidt_bell

use std::path::Path;

use wgpdc::cli::Model;
use wgpdc::quantum::{self, BellKind};
use wgpdc::Error;

fn main() -> wgpdc::Result<()> {
    let model = Model::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/calibrated.json"))?;
    for c in model.clusters()?.into_iter().filter(|c| !c.higher_order) {
        let (fs, fi) = model.filters_for(&c);
        let filtered = quantum::apply_filters(&model.jsa(&c.members)?, &fs, &fi)?;
        let d = quantum::schmidt(&filtered)?;
        let lead: Vec<String> = d.coefficients.iter().take(3).map(|l| format!("{l:.4}")).collect();
        println!(
            "peak {}: K = {:.4}, leading λ = [{}], reconstruction error {:.1e}",
            c.label,
            d.schmidt_number(),
            lead.join(", "),
            d.reconstruction_error
        );
        match quantum::bell_state(&c, &filtered) {
            Ok(b) => {
                let name = match b.kind {
                    BellKind::PsiPlus => "|Ψ+⟩",
                    BellKind::PhiPlus => "|Φ+⟩",
                    BellKind::Other => "two-mode superposition",
                };
                let basis: Vec<String> = b.state.basis.iter().map(|(s, i)| format!("{s}{i}")).collect();
                println!(
                    "    {name} over {{{}}}, spectral overlap {:.4}, F ≈ {:.4}",
                    basis.join(", "),
                    b.spectral_overlap,
                    b.fidelity
                );
            }
            Err(Error::NotEntangled(why)) => println!("    no spatial entanglement: {why}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
