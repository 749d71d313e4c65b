//! Spatial intensity images of each peak's signal and idler modes, written
//! as PGM files and sketched in the terminal.
//!
//!     cargo run --release --example mode_images [-- <out dir>]

use std::path::{Path, PathBuf};

use wgpdc::cli::{self, Model};
use wgpdc::fit::Arm;

fn main() -> wgpdc::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let model = Model::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/calibrated.json"))?;
    for c in model.clusters()?.into_iter().filter(|c| !c.higher_order) {
        for arm in [Arm::Signal, Arm::Idler] {
            let img = cli::render_peak(&model, &c, arm)?;
            let path = out.join(format!("render_{}_{arm}.pgm", c.label));
            std::fs::write(&path, img.to_pgm()).map_err(|source| wgpdc::Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            println!(
                "peak {} {arm}: {}×{} → {}",
                c.label,
                img.width,
                img.height,
                path.display()
            );
            if arm == Arm::Signal {
                sketch(&img);
            }
        }
    }
    Ok(())
}

fn sketch(img: &cli::Image) {
    const SHADES: &[u8] = b" .:-=+*#%@";
    let (cols, rows) = (36, 18);
    for r in 0..rows {
        let line: String = (0..cols)
            .map(|c| {
                let v = img.at(c * img.width / cols, r * img.height / rows) as usize;
                SHADES[v * (SHADES.len() - 1) / 255] as char
            })
            .collect();
        println!("    {line}");
    }
}
