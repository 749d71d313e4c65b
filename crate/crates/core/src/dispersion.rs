//! Material dispersion of KTP and the quasi-phase-matching grating.
//!
//! Sellmeier coefficients are loaded from a JSON data file; nothing here
//! hardcodes material constants. Wavelengths cross the public API in
//! nanometers and are converted to micrometers for the formula.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_KTP: &str = include_str!("../data/ktp_kato_takaoka_2002.json");

/// Field polarization in the crystal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Y,
    Z,
}

impl Polarization {
    /// Pump and signal are y-polarized, idler z-polarized (type-II).
    pub const PUMP: Polarization = Polarization::Y;
    pub const SIGNAL: Polarization = Polarization::Y;
    pub const IDLER: Polarization = Polarization::Z;
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::Y => f.write_str("y"),
            Polarization::Z => f.write_str("z"),
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "y" => Ok(Polarization::Y),
            "z" => Ok(Polarization::Z),
            other => Err(Error::validation(format!("unknown polarization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SellmeierEntry {
    pub polarization: Polarization,
    /// `[c0, c1, c2, c3, c4, ...]` for `n^2 = c0 + sum_i c(2i-1) / (L^2 - c(2i))`.
    pub coefficients: Vec<f64>,
    pub valid_range_nm: [f64; 2],
}

/// Contents of a Sellmeier coefficient file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SellmeierFile {
    pub schema: String,
    pub material: String,
    pub source: String,
    pub variant: String,
    pub formula: String,
    #[serde(default)]
    pub notes: String,
    pub entries: Vec<SellmeierEntry>,
}

/// Per-polarization Sellmeier dispersion `n^2 = c0 + sum c_b / (L^2 - c_pole)`.
#[derive(Debug, Clone)]
pub struct SellmeierModel {
    y: SellmeierEntry,
    z: SellmeierEntry,
    source: String,
}

impl SellmeierModel {
    pub fn from_file_contents(file: SellmeierFile) -> Result<Self> {
        let mut y = None;
        let mut z = None;
        for entry in file.entries {
            let c = &entry.coefficients;
            if c.len() < 3 || c.len() % 2 == 0 {
                return Err(Error::validation(format!(
                    "{} coefficients for polarization {}: expected 1 + 2k values",
                    c.len(),
                    entry.polarization
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation("non-finite Sellmeier coefficient"));
            }
            let [lo, hi] = entry.valid_range_nm;
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::validation(format!("bad valid_range_nm [{lo}, {hi}]")));
            }
            let slot = match entry.polarization {
                Polarization::Y => &mut y,
                Polarization::Z => &mut z,
            };
            if slot.is_some() {
                return Err(Error::validation(format!(
                    "duplicate entry for polarization {}",
                    entry.polarization
                )));
            }
            *slot = Some(entry);
        }
        match (y, z) {
            (Some(y), Some(z)) => Ok(Self {
                y,
                z,
                source: file.source,
            }),
            _ => Err(Error::validation(
                "coefficient file must define both y and z polarizations",
            )),
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: SellmeierFile = serde_json::from_str(json).map_err(|source| Error::Json {
            path: "<inline>".into(),
            source,
        })?;
        Self::from_file_contents(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: SellmeierFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_file_contents(file)
    }

    /// KTP coefficients shipped in `data/ktp_kato_takaoka_2002.json`.
    pub fn bundled_ktp() -> Self {
        Self::from_json_str(BUNDLED_KTP).expect("bundled coefficient file is valid")
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn entry(&self, pol: Polarization) -> &SellmeierEntry {
        match pol {
            Polarization::Y => &self.y,
            Polarization::Z => &self.z,
        }
    }

    pub fn valid_range_nm(&self, pol: Polarization) -> (f64, f64) {
        let [lo, hi] = self.entry(pol).valid_range_nm;
        (lo, hi)
    }

    fn check_range(&self, pol: Polarization, lambda_nm: f64) -> Result<&SellmeierEntry> {
        let entry = self.entry(pol);
        let [lo, hi] = entry.valid_range_nm;
        if !(lambda_nm >= lo && lambda_nm <= hi) {
            return Err(Error::OutOfRange {
                lambda_nm,
                min_nm: lo,
                max_nm: hi,
            });
        }
        Ok(entry)
    }

    /// Refractive index for `pol` at `lambda_nm`.
    pub fn refractive_index(&self, pol: Polarization, lambda_nm: f64) -> Result<f64> {
        let entry = self.check_range(pol, lambda_nm)?;
        let n2 = n_squared(&entry.coefficients, lambda_nm * 1e-3);
        if !(n2 > 1.0) {
            return Err(Error::Numerical(format!(
                "Sellmeier formula gives n^2 = {n2} at {lambda_nm} nm"
            )));
        }
        Ok(n2.sqrt())
    }

    /// Closed-form derivative dn/dλ in nm⁻¹.
    pub fn dn_dlambda(&self, pol: Polarization, lambda_nm: f64) -> Result<f64> {
        let entry = self.check_range(pol, lambda_nm)?;
        let l = lambda_nm * 1e-3;
        let c = &entry.coefficients;
        let n = n_squared(c, l).sqrt();
        // d(n^2)/dL = sum -2 L b / (L^2 - p)^2
        let dn2 = c[1..]
            .chunks_exact(2)
            .map(|bp| -2.0 * l * bp[0] / (l * l - bp[1]).powi(2))
            .sum::<f64>();
        Ok(dn2 / (2.0 * n) * 1e-3)
    }
}

fn n_squared(c: &[f64], lambda_um: f64) -> f64 {
    let l2 = lambda_um * lambda_um;
    c[0] + c[1..].chunks_exact(2).map(|bp| bp[0] / (l2 - bp[1])).sum::<f64>()
}

/// First- or higher-order poling grating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolingGrating {
    pub period_um: f64,
    pub order: u32,
}

impl PolingGrating {
    pub fn new(period_um: f64, order: u32) -> Result<Self> {
        let g = Self { period_um, order };
        g.validate()?;
        Ok(g)
    }

    pub fn first_order(period_um: f64) -> Result<Self> {
        Self::new(period_um, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period_um > 0.0 && self.period_um.is_finite()) {
            return Err(Error::validation(format!(
                "poling period must be positive, got {} um",
                self.period_um
            )));
        }
        if self.order == 0 || self.order.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "QPM order must be a positive odd integer, got {}",
                self.order
            )));
        }
        Ok(())
    }

    /// Grating wavevector `2π·order/Λ` in µm⁻¹.
    pub fn wavevector(&self) -> Result<f64> {
        self.validate()?;
        Ok(2.0 * PI * self.order as f64 / self.period_um)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent one-line evaluation of the published formula.
    fn hand_nz(lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        (4.59423 + 0.06206 / (l2 - 0.04763) + 110.80672 / (l2 - 86.12171)).sqrt()
    }

    fn hand_ny(lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        (3.45018 + 0.04341 / (l2 - 0.04597) + 16.98825 / (l2 - 39.43799)).sqrt()
    }

    #[test]
    fn matches_hand_evaluation_at_degeneracy() {
        let m = SellmeierModel::bundled_ktp();
        let nz = m.refractive_index(Polarization::Z, 806.6).unwrap();
        let ny = m.refractive_index(Polarization::Y, 806.6).unwrap();
        assert!((nz - hand_nz(0.8066)).abs() < 1e-14);
        assert!((ny - hand_ny(0.8066)).abs() < 1e-14);
        // frozen from the hand formula
        assert!((nz - 1.844_106_860_998_233).abs() < 1e-12);
        assert!(nz > ny);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let m = SellmeierModel::bundled_ktp();
        match m.refractive_index(Polarization::Z, 10_000.0) {
            Err(Error::OutOfRange { min_nm, max_nm, .. }) => {
                assert_eq!(min_nm, 380.0);
                assert_eq!(max_nm, 3540.0);
            }
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(m.refractive_index(Polarization::Y, 300.0).is_err());
        assert!(m.refractive_index(Polarization::Y, f64::NAN).is_err());
    }

    #[test]
    fn birefringence_nonzero_across_visible_nir() {
        let m = SellmeierModel::bundled_ktp();
        for l in 380..=900 {
            let l = l as f64;
            let ny = m.refractive_index(Polarization::Y, l).unwrap();
            let nz = m.refractive_index(Polarization::Z, l).unwrap();
            assert!(ny > 1.0 && nz > 1.0);
            assert!((nz - ny).abs() > 1e-3, "{l}");
        }
    }

    #[test]
    fn derivative_agrees_with_finite_difference() {
        let m = SellmeierModel::bundled_ktp();
        for pol in [Polarization::Y, Polarization::Z] {
            let mut l = 390.0;
            while l < 3000.0 {
                // five-point stencil
                let h = 0.05;
                let n = |x: f64| m.refractive_index(pol, x).unwrap();
                let fd = (n(l - 2.0 * h) - 8.0 * n(l - h) + 8.0 * n(l + h) - n(l + 2.0 * h)) / (12.0 * h);
                let an = m.dn_dlambda(pol, l).unwrap();
                assert!(((fd - an) / an).abs() < 1e-9, "{pol} {l}: {fd} vs {an}");
                l += 7.3;
            }
        }
    }

    #[test]
    fn grating_wavevector() {
        let k = PolingGrating::first_order(8.92).unwrap().wavevector().unwrap();
        assert!((k - 2.0 * PI / 8.92).abs() < 1e-15);
        // 2π/8.92 = 0.704393 µm⁻¹
        assert!((k - 0.704_393).abs() < 1e-6);
        let unit = PolingGrating::first_order(2.0 * PI).unwrap().wavevector().unwrap();
        assert!((unit - 1.0).abs() < 1e-15);
        let nominal = PolingGrating::first_order(8.72).unwrap().wavevector().unwrap();
        assert!((nominal - 2.0 * PI / 8.72).abs() < 1e-15);
        assert!(PolingGrating::first_order(0.0).is_err());
        assert!(PolingGrating::first_order(-1.0).is_err());
        assert!(PolingGrating::new(8.92, 2).is_err());
        let third = PolingGrating::new(8.92, 3).unwrap().wavevector().unwrap();
        assert!((third - 3.0 * k).abs() < 1e-14);
    }

    #[test]
    fn malformed_files_rejected() {
        let bad = r#"{"schema":"x","material":"x","source":"x","variant":"x","formula":"x",
            "entries":[{"polarization":"y","coefficients":[1.0,2.0],"valid_range_nm":[400,900]}]}"#;
        assert!(SellmeierModel::from_json_str(bad).is_err());
        let missing_z = r#"{"schema":"x","material":"x","source":"x","variant":"x","formula":"x",
            "entries":[{"polarization":"y","coefficients":[2.0,0.1,0.01],"valid_range_nm":[400,900]}]}"#;
        assert!(SellmeierModel::from_json_str(missing_z).is_err());
    }
}
