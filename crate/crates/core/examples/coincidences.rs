//! Coincidence matrix between filtered signal and idler peaks.
//!
//!     cargo run --release --example coincidences

use std::path::Path;

use wgpdc::cli::{self, Model};

fn main() -> wgpdc::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["calibrated.json", "fitted.json"] {
        let model = Model::load(&dir.join(name))?;
        println!("== {name}");
        match cli::coincidences(&model) {
            Ok((labels, m)) => {
                println!("s\\i  {}", labels.iter().map(|l| format!("{l:>9}")).collect::<String>());
                for (l, row) in labels.iter().zip(&m) {
                    println!("{l:4} {}", row.iter().map(|v| format!("{v:9.2e}")).collect::<String>());
                }
            }
            Err(e) => println!("skipped: {e}"),
        }
    }
    Ok(())
}
