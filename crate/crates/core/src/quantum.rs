//! Two-photon state analysis: spectral filtering, spectral Schmidt
//! decomposition, spatial Bell states of two-process peaks and predicted
//! coincidence matrices between filter settings.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modesolver::ModeLabel;
use crate::pdc::{JointSpectralAmplitude, PeakCluster, PumpSpec, SpectralGrid, TripletLabels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterShape {
    Rectangular,
    Gaussian,
    AllPass,
}

/// Bandpass filter acting on the two-photon amplitude of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub shape: FilterShape,
}

impl SpectralFilter {
    pub fn rectangular(center_nm: f64, fwhm_nm: f64) -> Self {
        Self {
            center_nm,
            fwhm_nm,
            shape: FilterShape::Rectangular,
        }
    }

    pub fn gaussian(center_nm: f64, fwhm_nm: f64) -> Self {
        Self {
            center_nm,
            fwhm_nm,
            shape: FilterShape::Gaussian,
        }
    }

    pub fn all_pass() -> Self {
        Self {
            center_nm: 0.0,
            fwhm_nm: f64::INFINITY,
            shape: FilterShape::AllPass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape != FilterShape::AllPass && !(self.fwhm_nm > 0.0 && self.center_nm > 0.0) {
            return Err(Error::validation(format!("bad filter {self:?}")));
        }
        Ok(())
    }

    /// Transmission in [0, 1], equal to 1 at the center. The Gaussian shape
    /// has the given full width at half maximum of the transmission itself.
    pub fn transmission(&self, lambda_nm: f64) -> f64 {
        match self.shape {
            FilterShape::AllPass => 1.0,
            FilterShape::Rectangular => {
                if (lambda_nm - self.center_nm).abs() <= 0.5 * self.fwhm_nm {
                    1.0
                } else {
                    0.0
                }
            }
            FilterShape::Gaussian => {
                let x = (lambda_nm - self.center_nm) / self.fwhm_nm;
                (-4.0 * LN_2 * x * x).exp()
            }
        }
    }
}

fn filter_mask(grid: &SpectralGrid, fs: &SpectralFilter, fi: &SpectralFilter) -> Vec<f64> {
    let ts: Vec<f64> = grid.signal.values().iter().map(|&l| fs.transmission(l)).collect();
    let ti: Vec<f64> = grid.idler.values().iter().map(|&l| fi.transmission(l)).collect();
    let ni = ti.len();
    (0..grid.len()).map(|k| ts[k / ni] * ti[k % ni]).collect()
}

/// Multiply the amplitude (and every per-process component) by
/// `t_s(λs) · t_i(λi)`. A passband that misses the grid leaves an all-zero
/// amplitude, which is not an error here.
pub fn apply_filters(
    jsa: &JointSpectralAmplitude,
    fs: &SpectralFilter,
    fi: &SpectralFilter,
) -> Result<JointSpectralAmplitude> {
    fs.validate()?;
    fi.validate()?;
    let mask = filter_mask(&jsa.grid, fs, fi);
    let scale = |v: &[Complex64]| -> Vec<Complex64> { v.iter().zip(&mask).map(|(a, t)| a * t).collect() };
    Ok(JointSpectralAmplitude {
        grid: jsa.grid,
        amplitude: scale(&jsa.amplitude),
        processes: jsa.processes.clone(),
        components: jsa.components.iter().map(|c| scale(c)).collect(),
    })
}

/// Discrete spectral Schmidt decomposition `A = Σ λ_k ψ_k ⊗ φ_k` with
/// `Σ λ_k² = 1` and ψ_k, φ_k orthonormal as grid vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    /// Signal mode functions on the full signal axis.
    pub signal_modes: Vec<Vec<Complex64>>,
    /// Idler mode functions on the full idler axis.
    pub idler_modes: Vec<Vec<Complex64>>,
    /// ‖A − Σ λ_k ψ_k φ_k‖ / ‖A‖ with the normalization of `A` restored.
    pub reconstruction_error: f64,
}

impl SchmidtDecomposition {
    /// `K = 1 / Σ λ_k⁴`; 1 for a separable amplitude.
    pub fn schmidt_number(&self) -> f64 {
        1.0 / self.coefficients.iter().map(|l| l.powi(4)).sum::<f64>()
    }

    pub fn report(&self) -> SchmidtReport {
        SchmidtReport {
            coefficients: self.coefficients.clone(),
            schmidt_number: self.schmidt_number(),
            reconstruction_error: self.reconstruction_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    pub coefficients: Vec<f64>,
    pub schmidt_number: f64,
    pub reconstruction_error: f64,
}

/// Row-major amplitude matrix (rows × cols) to Schmidt form. Rows and
/// columns that are identically zero are cropped before the SVD.
pub fn schmidt_matrix(rows: usize, cols: usize, amplitude: &[Complex64]) -> Result<SchmidtDecomposition> {
    if amplitude.len() != rows * cols || rows == 0 || cols == 0 {
        return Err(Error::validation("amplitude does not match its shape"));
    }
    if amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::Numerical("non-finite amplitude".into()));
    }
    let live_rows: Vec<usize> = (0..rows)
        .filter(|&r| amplitude[r * cols..(r + 1) * cols].iter().any(|a| a.norm_sqr() > 0.0))
        .collect();
    let live_cols: Vec<usize> = (0..cols)
        .filter(|&c| (0..rows).any(|r| amplitude[r * cols + c].norm_sqr() > 0.0))
        .collect();
    if live_rows.is_empty() {
        return Err(Error::Degenerate("amplitude is identically zero".into()));
    }
    let a = DMatrix::from_fn(live_rows.len(), live_cols.len(), |i, j| {
        amplitude[live_rows[i] * cols + live_cols[j]]
    });
    let norm = a.norm();
    let a = a / Complex64::new(norm, 0.0);
    let svd = a
        .clone()
        .try_svd(true, true, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("requested u");
    let v_t = svd.v_t.as_ref().expect("requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let total = sigma.iter().map(|s| s * s).sum::<f64>().sqrt();

    let mut recon = DMatrix::<Complex64>::zeros(a.nrows(), a.ncols());
    let mut signal_modes = Vec::with_capacity(order.len());
    let mut idler_modes = Vec::with_capacity(order.len());
    for (&k, &s) in order.iter().zip(&sigma) {
        let uk = u.column(k);
        let vk = v_t.row(k);
        recon += uk * vk * Complex64::new(s, 0.0);
        let mut psi = vec![Complex64::new(0.0, 0.0); rows];
        for (i, &r) in live_rows.iter().enumerate() {
            psi[r] = uk[i];
        }
        let mut phi = vec![Complex64::new(0.0, 0.0); cols];
        for (j, &c) in live_cols.iter().enumerate() {
            phi[c] = vk[j];
        }
        signal_modes.push(psi);
        idler_modes.push(phi);
    }
    let reconstruction_error = (&a - &recon).norm() / a.norm();
    Ok(SchmidtDecomposition {
        coefficients: sigma.iter().map(|s| s / total).collect(),
        signal_modes,
        idler_modes,
        reconstruction_error,
    })
}

/// Schmidt decomposition of a (usually filtered) joint spectral amplitude.
pub fn schmidt(jsa: &JointSpectralAmplitude) -> Result<SchmidtDecomposition> {
    schmidt_matrix(jsa.grid.signal.count, jsa.grid.idler.count, &jsa.amplitude)
}

/// Spatial two-photon state over (signal mode, idler mode) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialTwoModeState {
    pub basis: Vec<(ModeLabel, ModeLabel)>,
    pub coefficients: Vec<Complex64>,
}

impl SpatialTwoModeState {
    pub fn new(basis: Vec<(ModeLabel, ModeLabel)>, coefficients: Vec<Complex64>) -> Result<Self> {
        let s = Self { basis, coefficients };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.basis.len() != self.coefficients.len() || self.basis.is_empty() {
            return Err(Error::validation("basis and coefficient counts differ"));
        }
        let n: f64 = self.coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!("state norm² {n} is not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    /// `(|a b⟩ + |b a⟩)/√2`
    PsiPlus,
    /// `(|a a⟩ + |b b⟩)/√2`
    PhiPlus,
    /// Equal superposition of two unrelated mode pairs.
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellStateEstimate {
    pub peak: String,
    pub kind: BellKind,
    pub state: SpatialTwoModeState,
    /// `|⟨A₁|A₂⟩| / (‖A₁‖ ‖A₂‖)` of the two filtered process amplitudes.
    pub spectral_overlap: f64,
    /// Diagnostic `F = (1 + O) / 2`; it is not a tomographic fidelity.
    pub fidelity: f64,
}

/// Normalized magnitude of the grid inner product of two amplitudes.
pub fn spectral_overlap(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation("amplitudes of different size"));
    }
    let na = a.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let nb = b.iter().map(|x| x.norm_sqr()).sum::<f64>();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate(
            "a process amplitude vanishes inside the filters".into(),
        ));
    }
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    // sqrt(na·nb) rather than sqrt(na)·sqrt(nb): exact 1 for identical inputs
    Ok((ip.norm() / (na * nb).sqrt()).min(1.0))
}

/// Spatial Bell state of a two-process peak. `filtered` must contain a
/// component for each of the cluster's processes (typically the output of
/// [`apply_filters`] on the cluster's joint spectrum).
pub fn bell_state(cluster: &PeakCluster, filtered: &JointSpectralAmplitude) -> Result<BellStateEstimate> {
    let labels: Vec<TripletLabels> = cluster.member_labels();
    match labels.len() {
        0 | 1 => return Err(Error::NotEntangled(cluster.label.clone())),
        2 => {}
        n => {
            return Err(Error::validation(format!(
                "peak {} has {n} processes; a two-mode state needs exactly two",
                cluster.label
            )))
        }
    }
    let component = |l: &TripletLabels| -> Result<&Vec<Complex64>> {
        filtered
            .processes
            .iter()
            .position(|p| p.triplet.labels() == *l)
            .map(|k| &filtered.components[k])
            .ok_or_else(|| Error::validation(format!("no amplitude for process {l}")))
    };
    let o = spectral_overlap(component(&labels[0])?, component(&labels[1])?)?;
    let mut basis: Vec<(ModeLabel, ModeLabel)> = labels.iter().map(|l| (l.signal, l.idler)).collect();
    basis.sort();
    let (a, b) = (basis[0], basis[1]);
    let kind = if a.0 == b.1 && a.1 == b.0 {
        BellKind::PsiPlus
    } else if a.0 == a.1 && b.0 == b.1 {
        BellKind::PhiPlus
    } else {
        BellKind::Other
    };
    let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(BellStateEstimate {
        peak: cluster.label.clone(),
        kind,
        state: SpatialTwoModeState::new(basis, vec![c, c])?,
        spectral_overlap: o,
        fidelity: 0.5 * (1.0 + o),
    })
}

/// Predicted coincidence rates between every (signal filter, idler filter)
/// pair: entry `(i, j) ∝ Σ_proc fraction(pump) ∫∫ |t_i t_j A_proc|²`,
/// normalized to a maximum of exactly 1.
pub fn coincidence_matrix(
    jsa: &JointSpectralAmplitude,
    pump: &PumpSpec,
    signal_filters: &[SpectralFilter],
    idler_filters: &[SpectralFilter],
) -> Result<Vec<Vec<f64>>> {
    let grid = jsa.grid;
    let ni = grid.idler.count;
    let ts: Vec<Vec<f64>> = signal_filters
        .iter()
        .map(|f| {
            f.validate()
                .map(|_| grid.signal.values().iter().map(|&l| f.transmission(l)).collect())
        })
        .collect::<Result<_>>()?;
    let ti: Vec<Vec<f64>> = idler_filters
        .iter()
        .map(|f| {
            f.validate()
                .map(|_| grid.idler.values().iter().map(|&l| f.transmission(l)).collect())
        })
        .collect::<Result<_>>()?;
    // pump-weighted intensity summed over processes
    let mut intensity = vec![0.0; grid.len()];
    for (p, comp) in jsa.processes.iter().zip(&jsa.components) {
        let frac = pump.fraction(p.triplet.pump.label);
        for (acc, a) in intensity.iter_mut().zip(comp) {
            *acc += frac * a.norm_sqr();
        }
    }
    let mut m: Vec<Vec<f64>> = ts
        .iter()
        .map(|t_s| {
            ti.iter()
                .map(|t_i| {
                    let mut sum = 0.0;
                    for (r, &a) in t_s.iter().enumerate() {
                        if a == 0.0 {
                            continue;
                        }
                        for (c, &b) in t_i.iter().enumerate() {
                            sum += (a * b).powi(2) * intensity[r * ni + c];
                        }
                    }
                    sum
                })
                .collect()
        })
        .collect();
    let max = m.iter().flatten().copied().fold(0.0, f64::max);
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::Degenerate("no coincidences pass any filter pair".into()));
    }
    for row in &mut m {
        for v in row.iter_mut() {
            *v /= max;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdc::Axis;

    fn grid(n: usize) -> SpectralGrid {
        SpectralGrid {
            signal: Axis {
                start_nm: 800.0,
                stop_nm: 810.0,
                count: n,
            },
            idler: Axis {
                start_nm: 800.0,
                stop_nm: 812.0,
                count: n + 1,
            },
        }
    }

    fn jsa_from(g: SpectralGrid, f: impl Fn(f64, f64) -> Complex64) -> JointSpectralAmplitude {
        let (ls, li) = (g.signal.values(), g.idler.values());
        let amp: Vec<Complex64> = (0..g.len()).map(|k| f(ls[k / li.len()], li[k % li.len()])).collect();
        JointSpectralAmplitude::from_components(g, Vec::new(), Vec::new())
            .map(|mut j| {
                j.amplitude = amp;
                j
            })
            .unwrap()
    }

    #[test]
    fn filter_transmission_bounds() {
        let r = SpectralFilter::rectangular(808.0, 3.0);
        assert_eq!(r.transmission(808.0), 1.0);
        assert_eq!(r.transmission(809.4), 1.0);
        assert_eq!(r.transmission(809.6), 0.0);
        let g = SpectralFilter::gaussian(808.0, 3.0);
        assert_eq!(g.transmission(808.0), 1.0);
        assert!((g.transmission(809.5) - 0.5).abs() < 1e-12);
        assert!(SpectralFilter::rectangular(808.0, 0.0).validate().is_err());
    }

    #[test]
    fn all_pass_is_identity() {
        let j = jsa_from(grid(8), |s, i| Complex64::new(s - i, 0.3 * s));
        let f = apply_filters(&j, &SpectralFilter::all_pass(), &SpectralFilter::all_pass()).unwrap();
        assert_eq!(f.amplitude, j.amplitude);
    }

    #[test]
    fn rectangular_filter_confines_support() {
        let g = grid(41);
        let j = jsa_from(g, |_, _| Complex64::new(1.0, 0.0));
        let f = apply_filters(
            &j,
            &SpectralFilter::rectangular(805.0, 3.0),
            &SpectralFilter::all_pass(),
        )
        .unwrap();
        let ls = g.signal.values();
        for (k, a) in f.amplitude.iter().enumerate() {
            let s = ls[k / g.idler.count];
            assert_eq!(a.norm() > 0.0, (s - 805.0).abs() <= 1.5);
        }
    }

    #[test]
    fn separable_amplitude_has_unit_coefficient() {
        let j = jsa_from(grid(30), |s, i| {
            Complex64::new((-(s - 805.0).powi(2)).exp(), 0.0) * Complex64::from_polar(1.0, 0.1 * i)
        });
        let d = schmidt(&j).unwrap();
        assert!(d.coefficients[0] > 1.0 - 1e-10);
        assert!(d.coefficients[1..].iter().all(|&l| l < 1e-10));
        assert!((d.schmidt_number() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bell_matrix_coefficients() {
        let a = [1.0, 0.0, 0.0, 1.0].map(|x| Complex64::new(x * FRAC_1_SQRT_2, 0.0));
        let d = schmidt_matrix(2, 2, &a).unwrap();
        for l in &d.coefficients {
            assert!((l - FRAC_1_SQRT_2).abs() < 1e-12);
        }
        assert!((d.schmidt_number() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_is_degenerate() {
        let a = vec![Complex64::new(0.0, 0.0); 6];
        assert!(matches!(schmidt_matrix(2, 3, &a), Err(Error::Degenerate(_))));
    }

    #[test]
    fn global_phase_invariance() {
        let j = jsa_from(grid(20), |s, i| {
            Complex64::new((s - 805.0) * (i - 806.0), (s * i).sin())
        });
        let mut k = j.clone();
        let c = Complex64::from_polar(3.7, 1.1);
        k.amplitude.iter_mut().for_each(|a| *a *= c);
        let (a, b) = (schmidt(&j).unwrap(), schmidt(&k).unwrap());
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn overlap_of_identical_amplitudes_is_one() {
        let a: Vec<Complex64> = (0..10).map(|k| Complex64::new(k as f64, 1.0)).collect();
        assert!((spectral_overlap(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let b: Vec<Complex64> = a.iter().map(|x| x * Complex64::new(0.0, 2.0)).collect();
        assert!((spectral_overlap(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }
}
