//! Phase matching and joint spectra of waveguided type-II down-conversion.
//!
//! A process is one (pump, signal, idler) mode triplet. Its strength is the
//! transverse overlap of the three unit-normalized profiles and its spectrum
//! is the product of a Gaussian pump envelope and the `sinc(Δβ L / 2)`
//! phase-matching function on the energy-conserving (λs, λi) plane.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::Polarization;
use crate::error::{Error, Result};
use crate::modesolver::{Frame, GuidedMode, ModeLabel, Profile2D, Waveguide};

/// Default signal search window in nm.
pub const DEFAULT_WINDOW_NM: (f64, f64) = (766.0, 846.0);
/// Default |overlap| threshold for keeping a process, µm⁻¹.
pub const DEFAULT_THRESHOLD: f64 = 0.05;
/// Default scan step for bracketing phase-matching roots, nm.
pub const DEFAULT_SCAN_STEP_NM: f64 = 0.25;
/// Peak roots are refined until the bracket is narrower than this, nm.
pub const PEAK_TOLERANCE_NM: f64 = 1e-8;
/// Grid points whose pump envelope amplitude falls below this are set to zero.
pub const ENVELOPE_FLOOR: f64 = 1e-16;

/// Modes whose labels appear in the five principal clusters; anything else is
/// reported as higher order.
pub const LOW_ORDER_LABELS: [ModeLabel; 4] = [
    ModeLabel::new(0, 0),
    ModeLabel::new(0, 1),
    ModeLabel::new(0, 2),
    ModeLabel::new(1, 0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub center_nm: f64,
    /// Intensity FWHM of the Gaussian pump spectrum.
    pub fwhm_nm: f64,
    pub mode_fractions: BTreeMap<ModeLabel, f64>,
}

impl PumpSpec {
    pub fn new(center_nm: f64, fwhm_nm: f64, fractions: &[(ModeLabel, f64)]) -> Result<Self> {
        let p = Self {
            center_nm,
            fwhm_nm,
            mode_fractions: fractions.iter().copied().collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_nm > 0.0 && self.center_nm.is_finite()) {
            return Err(Error::validation("pump center wavelength must be positive"));
        }
        if !(self.fwhm_nm > 0.0 && self.fwhm_nm.is_finite()) {
            return Err(Error::validation("pump bandwidth must be positive"));
        }
        if self.mode_fractions.is_empty() {
            return Err(Error::validation("pump needs at least one spatial mode"));
        }
        let mut total = 0.0;
        for (label, &f) in &self.mode_fractions {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::validation(format!("pump fraction {f} for {label} not in [0,1]")));
            }
            total += f;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("pump fractions sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn fraction(&self, label: ModeLabel) -> f64 {
        self.mode_fractions.get(&label).copied().unwrap_or(0.0)
    }

    /// Degenerate signal/idler wavelength `2 λp`.
    pub fn degenerate_nm(&self) -> f64 {
        2.0 * self.center_nm
    }

    /// Pump center and FWHM as wavenumbers `1/λ` in nm⁻¹.
    fn wavenumber_center_width(&self) -> (f64, f64) {
        let half = 0.5 * self.fwhm_nm;
        let width = 1.0 / (self.center_nm - half) - 1.0 / (self.center_nm + half);
        (1.0 / self.center_nm, width)
    }

    /// Gaussian field envelope at pump wavenumber `nu = 1/λs + 1/λi`;
    /// `|α|²` has the configured intensity FWHM.
    pub fn envelope(&self, nu: f64) -> f64 {
        let (nu0, width) = self.wavenumber_center_width();
        let x = (nu - nu0) / width;
        (-2.0 * LN_2 * x * x).exp()
    }
}

/// Idler wavelength fixed by energy conservation.
pub fn idler_wavelength(signal_nm: f64, pump_nm: f64) -> f64 {
    1.0 / (1.0 / pump_nm - 1.0 / signal_nm)
}

/// Sampling used for the transverse overlap integral: composite Simpson on
/// each of the three regions (cladding / core / cladding) of both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Intervals per region, rounded up to even.
    pub intervals_per_region: usize,
    /// Cladding extent in 1/e field decay lengths of the slowest-decaying mode.
    pub decay_lengths: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            intervals_per_region: 400,
            decay_lengths: 14.0,
        }
    }
}

impl Quadrature {
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            intervals_per_region: self.intervals_per_region * factor,
            ..*self
        }
    }
}

fn simpson_nodes(a: f64, b: f64, intervals: usize, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        nodes.push(a + i as f64 * h);
        weights.push(w * h / 3.0);
    }
}

fn region_rule(edges: [f64; 4], intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for k in 0..3 {
        simpson_nodes(edges[k], edges[k + 1], intervals, &mut nodes, &mut weights);
    }
    (nodes, weights)
}

/// Transverse overlap `∫∫ u_p u_s u_i dx dy` of three unit-normalized
/// profiles, in µm⁻¹.
///
/// The profiles are separable, so the integral is evaluated as the product
/// of two one-dimensional quadratures; this equals the tensor-product rule on
/// the common 2D grid. Horizontal nodes are mirror-symmetric about the
/// channel axis, so parity-forbidden triplets cancel to rounding.
pub fn overlap_coefficient(
    pump: &GuidedMode,
    signal: &GuidedMode,
    idler: &GuidedMode,
    quadrature: &Quadrature,
) -> Result<f64> {
    let (w, d) = (pump.width_um(), pump.depth_um());
    for m in [signal, idler] {
        if (m.width_um() - w).abs() > 1e-12 || (m.depth_um() - d).abs() > 1e-12 {
            return Err(Error::validation(
                "overlap requires modes of the same waveguide geometry",
            ));
        }
    }
    let frame = [pump, signal, idler]
        .iter()
        .map(|m| m.frame(quadrature.decay_lengths))
        .reduce(|a, b| a.union(&b))
        .expect("three modes")
        .symmetric_x();
    let (xs, wx) = region_rule(
        [frame.x_min, -0.5 * w, 0.5 * w, frame.x_max],
        quadrature.intervals_per_region,
    );
    let (ys, wy) = region_rule([frame.y_min, -d, 0.0, frame.y_max], quadrature.intervals_per_region);
    let ix: f64 = xs
        .iter()
        .zip(&wx)
        .map(|(&x, &wt)| wt * pump.x_profile(x) * signal.x_profile(x) * idler.x_profile(x))
        .sum();
    let iy: f64 = ys
        .iter()
        .zip(&wy)
        .map(|(&y, &wt)| wt * pump.y_profile(y) * signal.y_profile(y) * idler.y_profile(y))
        .sum();
    Ok(ix * iy)
}

/// Midpoint-rule overlap of three sampled profiles on one shared grid.
pub fn overlap_on_grid(pump: &Profile2D, signal: &Profile2D, idler: &Profile2D) -> Result<f64> {
    if pump.grid != signal.grid || pump.grid != idler.grid {
        return Err(Error::validation("overlap profiles sampled on mismatched grids"));
    }
    let area = pump.grid.dx() * pump.grid.dy();
    Ok(pump
        .values
        .iter()
        .zip(&signal.values)
        .zip(&idler.values)
        .map(|((p, s), i)| p * s * i)
        .sum::<f64>()
        * area)
}

/// Labels of one process, in pump / signal / idler order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripletLabels {
    pub pump: ModeLabel,
    pub signal: ModeLabel,
    pub idler: ModeLabel,
}

impl TripletLabels {
    pub const fn new(pump: ModeLabel, signal: ModeLabel, idler: ModeLabel) -> Self {
        Self { pump, signal, idler }
    }

    pub fn is_higher_order(&self) -> bool {
        [self.pump, self.signal, self.idler]
            .iter()
            .any(|l| !LOW_ORDER_LABELS.contains(l))
    }

    /// Horizontal node parity is conserved: `m_p ≡ m_s + m_i (mod 2)`.
    pub fn conserves_horizontal_parity(&self) -> bool {
        (self.pump.m + self.signal.m + self.idler.m).is_multiple_of(2)
    }
}

impl std::fmt::Display for TripletLabels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}p -> {}s + {}i", self.pump, self.signal, self.idler)
    }
}

/// Phase-matched signal/idler pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPair {
    pub signal_nm: f64,
    pub idler_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTriplet {
    /// Pump mode at the pump center wavelength.
    pub pump: GuidedMode,
    /// Signal and idler modes at the degenerate wavelength.
    pub signal: GuidedMode,
    pub idler: GuidedMode,
    pub overlap: f64,
    pub peak: Option<PeakPair>,
}

impl ModeTriplet {
    pub fn labels(&self) -> TripletLabels {
        TripletLabels::new(self.pump.label, self.signal.label, self.idler.label)
    }
}

/// Phase mismatch `Δβ = β_p(λp) − β_s(λs) − β_i(λi) − K` in µm⁻¹ with the
/// idler wavelength fixed by energy conservation.
pub fn phase_mismatch(wg: &Waveguide, labels: TripletLabels, signal_nm: f64, pump_nm: f64) -> Result<f64> {
    let idler_nm = idler_wavelength(signal_nm, pump_nm);
    if !(idler_nm > 0.0) {
        return Err(Error::validation(format!(
            "signal {signal_nm} nm leaves no energy for the idler at pump {pump_nm} nm"
        )));
    }
    let np = wg.n_eff(labels.pump, Polarization::PUMP, pump_nm)?;
    mismatch_from_pump(wg, labels, signal_nm, pump_nm, np)
}

fn mismatch_from_pump(wg: &Waveguide, labels: TripletLabels, signal_nm: f64, pump_nm: f64, n_pump: f64) -> Result<f64> {
    let idler_nm = idler_wavelength(signal_nm, pump_nm);
    let ns = wg.n_eff(labels.signal, Polarization::SIGNAL, signal_nm)?;
    let ni = wg.n_eff(labels.idler, Polarization::IDLER, idler_nm)?;
    let k = wg.spec().poling.wavevector()?;
    Ok(2.0 * PI * 1e3 * (n_pump / pump_nm - ns / signal_nm - ni / idler_nm) - k)
}

/// Scan grid of signal wavelengths covering `window` inclusively.
fn scan_grid(window: (f64, f64), step_nm: f64) -> Vec<f64> {
    let n = ((window.1 - window.0) / step_nm).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / n as f64)
        .collect()
}

fn refine_root(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    while b - a > PEAK_TOLERANCE_NM {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

fn roots_from_samples(lambdas: &[f64], values: &[Option<f64>], f: impl Fn(f64) -> Result<f64>) -> Vec<f64> {
    let mut roots = Vec::new();
    for k in 0..lambdas.len().saturating_sub(1) {
        let (Some(fa), Some(fb)) = (values[k], values[k + 1]) else {
            continue;
        };
        if fa == 0.0 {
            roots.push(lambdas[k]);
        } else if fa * fb < 0.0 {
            // a cutoff inside the bracket leaves it unresolved
            if let Ok(r) = refine_root(&f, lambdas[k], lambdas[k + 1], fa) {
                roots.push(r);
            }
        }
    }
    if let Some(&Some(last)) = values.last() {
        if last == 0.0 {
            roots.push(*lambdas.last().unwrap());
        }
    }
    roots
}

/// All phase-matched peaks of one triplet with the signal inside `window`.
/// Several roots are returned in ascending signal wavelength when present.
pub fn find_peak(wg: &Waveguide, labels: TripletLabels, window: (f64, f64), pump_nm: f64) -> Result<Vec<PeakPair>> {
    find_peak_with_step(wg, labels, window, pump_nm, DEFAULT_SCAN_STEP_NM)
}

pub fn find_peak_with_step(
    wg: &Waveguide,
    labels: TripletLabels,
    window: (f64, f64),
    pump_nm: f64,
    step_nm: f64,
) -> Result<Vec<PeakPair>> {
    check_window(wg, window, pump_nm)?;
    if !(step_nm > 0.0) {
        return Err(Error::validation("scan step must be positive"));
    }
    let np = wg.n_eff(labels.pump, Polarization::PUMP, pump_nm)?;
    let lambdas = scan_grid(window, step_nm);
    let f = |ls: f64| mismatch_from_pump(wg, labels, ls, pump_nm, np);
    let values: Vec<Option<f64>> = lambdas.iter().map(|&l| f(l).ok()).collect();
    Ok(roots_from_samples(&lambdas, &values, f)
        .into_iter()
        .map(|s| PeakPair {
            signal_nm: s,
            idler_nm: idler_wavelength(s, pump_nm),
        })
        .collect())
}

fn check_window(wg: &Waveguide, window: (f64, f64), pump_nm: f64) -> Result<()> {
    if !(window.1 > window.0) || !(window.0 > pump_nm) {
        return Err(Error::validation(format!("bad search window {window:?}")));
    }
    let m = wg.material();
    m.refractive_index(Polarization::SIGNAL, window.0)?;
    m.refractive_index(Polarization::SIGNAL, window.1)?;
    m.refractive_index(Polarization::IDLER, idler_wavelength(window.0, pump_nm))?;
    m.refractive_index(Polarization::IDLER, idler_wavelength(window.1, pump_nm))?;
    Ok(())
}

/// Settings for [`enumerate_triplets`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    pub threshold: f64,
    pub window_nm: (f64, f64),
    pub scan_step_nm: f64,
    pub max_label: ModeLabel,
    pub quadrature: Quadrature,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            window_nm: DEFAULT_WINDOW_NM,
            scan_step_nm: DEFAULT_SCAN_STEP_NM,
            max_label: ModeLabel::new(16, 16),
            quadrature: Quadrature::default(),
        }
    }
}

/// Every guided signal and idler mode at degeneracy, and every guided pump
/// mode that carries power.
pub struct GuidedSets {
    pub pump: Vec<GuidedMode>,
    pub signal: Vec<GuidedMode>,
    pub idler: Vec<GuidedMode>,
}

pub fn guided_sets(wg: &Waveguide, pump: &PumpSpec, max_label: ModeLabel) -> Result<GuidedSets> {
    let deg = pump.degenerate_nm();
    let mut pump_modes = Vec::new();
    for (&label, &frac) in &pump.mode_fractions {
        if frac <= 0.0 {
            continue;
        }
        match wg.mode(label, Polarization::PUMP, pump.center_nm) {
            Ok(m) => pump_modes.push(m),
            Err(Error::Cutoff { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(GuidedSets {
        pump: pump_modes,
        signal: wg.solve_modes(Polarization::SIGNAL, deg, max_label)?,
        idler: wg.solve_modes(Polarization::IDLER, deg, max_label)?,
    })
}

/// All processes with `|overlap| > threshold` and a phase-matched peak in
/// the search window, one entry per peak, sorted by signal wavelength.
pub fn enumerate_triplets(wg: &Waveguide, pump: &PumpSpec, settings: &SearchSettings) -> Result<Vec<ModeTriplet>> {
    pump.validate()?;
    if !(settings.threshold > 0.0 && settings.threshold < 1.0) {
        return Err(Error::validation("triplet threshold must lie in (0, 1)"));
    }
    check_window(wg, settings.window_nm, pump.center_nm)?;
    let sets = guided_sets(wg, pump, settings.max_label)?;
    let pump_nm = pump.center_nm;

    // candidate processes
    let mut candidates = Vec::new();
    for p in &sets.pump {
        for s in &sets.signal {
            for i in &sets.idler {
                let labels = TripletLabels::new(p.label, s.label, i.label);
                if !labels.conserves_horizontal_parity() {
                    continue;
                }
                let ov = overlap_coefficient(p, s, i, &settings.quadrature)?;
                if ov.abs() > settings.threshold {
                    candidates.push((p, s, i, ov));
                }
            }
        }
    }
    if candidates.is_empty() {
        return Ok(Vec::new());
    }

    // n_eff tables along the energy-conservation curve, shared by candidates
    let lambdas = scan_grid(settings.window_nm, settings.scan_step_nm);
    let idlers: Vec<f64> = lambdas.iter().map(|&l| idler_wavelength(l, pump_nm)).collect();
    let table = |label: ModeLabel, pol: Polarization, ls: &[f64]| -> Vec<Option<f64>> {
        ls.iter().map(|&l| wg.n_eff(label, pol, l).ok()).collect()
    };
    let mut signal_tables = BTreeMap::new();
    let mut idler_tables = BTreeMap::new();
    for (_, s, i, _) in &candidates {
        signal_tables
            .entry(s.label)
            .or_insert_with(|| table(s.label, Polarization::SIGNAL, &lambdas));
        idler_tables
            .entry(i.label)
            .or_insert_with(|| table(i.label, Polarization::IDLER, &idlers));
    }
    let k = wg.spec().poling.wavevector()?;

    let found: Vec<Vec<ModeTriplet>> = candidates
        .par_iter()
        .map(|&(p, s, i, ov)| {
            let labels = TripletLabels::new(p.label, s.label, i.label);
            let np = p.n_eff;
            let st = &signal_tables[&s.label];
            let it = &idler_tables[&i.label];
            let values: Vec<Option<f64>> = (0..lambdas.len())
                .map(|j| {
                    let (ns, ni) = (st[j]?, it[j]?);
                    Some(2.0 * PI * 1e3 * (np / pump_nm - ns / lambdas[j] - ni / idlers[j]) - k)
                })
                .collect();
            let roots = roots_from_samples(&lambdas, &values, |ls| mismatch_from_pump(wg, labels, ls, pump_nm, np));
            roots
                .into_iter()
                .map(|sig| ModeTriplet {
                    pump: p.clone(),
                    signal: s.clone(),
                    idler: i.clone(),
                    overlap: ov,
                    peak: Some(PeakPair {
                        signal_nm: sig,
                        idler_nm: idler_wavelength(sig, pump_nm),
                    }),
                })
                .collect()
        })
        .collect();
    let mut out: Vec<ModeTriplet> = found.into_iter().flatten().collect();
    out.sort_by(|a, b| {
        let pa = a.peak.map_or(f64::INFINITY, |p| p.signal_nm);
        let pb = b.peak.map_or(f64::INFINITY, |p| p.signal_nm);
        pa.total_cmp(&pb).then(a.labels().cmp(&b.labels()))
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakCluster {
    pub label: String,
    pub higher_order: bool,
    pub members: Vec<ModeTriplet>,
    pub signal_center_nm: f64,
    pub idler_center_nm: f64,
}

impl PeakCluster {
    pub fn member_labels(&self) -> Vec<TripletLabels> {
        self.members.iter().map(|t| t.labels()).collect()
    }
}

fn single_linkage(mut items: Vec<&ModeTriplet>, linkage_nm: f64) -> Vec<Vec<&ModeTriplet>> {
    items.sort_by(|a, b| a.peak.unwrap().signal_nm.total_cmp(&b.peak.unwrap().signal_nm));
    let mut groups: Vec<Vec<&ModeTriplet>> = Vec::new();
    for t in items {
        let s = t.peak.unwrap().signal_nm;
        match groups.last_mut() {
            Some(g) if s - g.last().unwrap().peak.unwrap().signal_nm <= linkage_nm => g.push(t),
            _ => groups.push(vec![t]),
        }
    }
    groups
}

/// Group peaks whose signal wavelengths chain within `linkage_nm` (single
/// linkage), separately for low-order and higher-order processes.
///
/// Low-order clusters are lettered A, B, C, ... by ascending signal
/// wavelength; clusters of higher-order processes (any mode beyond
/// [`LOW_ORDER_LABELS`]) follow as H1, H2, ... They are kept apart because
/// their spatial modes are distinguishable even where spectra overlap.
pub fn cluster_peaks(triplets: &[ModeTriplet], linkage_nm: f64) -> Vec<PeakCluster> {
    let (higher, low): (Vec<&ModeTriplet>, Vec<&ModeTriplet>) = triplets
        .iter()
        .filter(|t| t.peak.is_some())
        .partition(|t| t.labels().is_higher_order());
    let make = |label: String, higher_order: bool, g: Vec<&ModeTriplet>| {
        let n = g.len() as f64;
        PeakCluster {
            label,
            higher_order,
            signal_center_nm: g.iter().map(|t| t.peak.unwrap().signal_nm).sum::<f64>() / n,
            idler_center_nm: g.iter().map(|t| t.peak.unwrap().idler_nm).sum::<f64>() / n,
            members: g.into_iter().cloned().collect(),
        }
    };
    let mut out: Vec<PeakCluster> = single_linkage(low, linkage_nm)
        .into_iter()
        .enumerate()
        .map(|(k, g)| make(letter_label(k), false, g))
        .collect();
    out.extend(
        single_linkage(higher, linkage_nm)
            .into_iter()
            .enumerate()
            .map(|(k, g)| make(format!("H{}", k + 1), true, g)),
    );
    out
}

/// A..Z, then AA, AB, ...
fn letter_label(k: usize) -> String {
    let c = |i: usize| (b'A' + i as u8) as char;
    if k < 26 {
        c(k).to_string()
    } else {
        format!("{}{}", c(k / 26 - 1), c(k % 26))
    }
}

/// Uniform axis with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub count: usize,
}

impl Axis {
    pub fn step(&self) -> f64 {
        (self.stop_nm - self.start_nm) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start_nm + i as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Rectangular (λs, λi) sampling grid; rows follow the signal axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub signal: Axis,
    pub idler: Axis,
}

impl SpectralGrid {
    /// `count × count` over `[2λp − half_span, 2λp + half_span]` on both axes.
    pub fn around_degeneracy(pump_nm: f64, half_span_nm: f64, count: usize) -> Self {
        let axis = Axis {
            start_nm: 2.0 * pump_nm - half_span_nm,
            stop_nm: 2.0 * pump_nm + half_span_nm,
            count,
        };
        Self {
            signal: axis,
            idler: axis,
        }
    }

    pub fn default_for(pump: &PumpSpec) -> Self {
        Self::around_degeneracy(pump.center_nm, 40.0, 512)
    }

    pub fn validate(&self) -> Result<()> {
        for a in [&self.signal, &self.idler] {
            if a.count < 2 || !(a.stop_nm > a.start_nm) || !(a.start_nm > 0.0) {
                return Err(Error::validation(format!("bad spectral axis {a:?}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.signal.count * self.idler.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.signal.step() * self.idler.step()
    }
}

/// One process entering a joint spectral amplitude with an amplitude weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    pub triplet: ModeTriplet,
    pub weight: f64,
}

impl Process {
    pub fn new(triplet: ModeTriplet) -> Self {
        Self { triplet, weight: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralAmplitude {
    pub grid: SpectralGrid,
    /// Coherent sum of all components, row-major (signal rows).
    pub amplitude: Vec<Complex64>,
    pub processes: Vec<Process>,
    /// Per-process amplitudes in the order of `processes`.
    pub components: Vec<Vec<Complex64>>,
}

impl JointSpectralAmplitude {
    pub fn at(&self, signal_index: usize, idler_index: usize) -> Complex64 {
        self.amplitude[signal_index * self.grid.idler.count + idler_index]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn from_components(
        grid: SpectralGrid,
        processes: Vec<Process>,
        components: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        grid.validate()?;
        if processes.len() != components.len() || components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::validation("component arrays do not match the grid"));
        }
        let mut amplitude = vec![Complex64::new(0.0, 0.0); grid.len()];
        for c in &components {
            for (a, v) in amplitude.iter_mut().zip(c) {
                *a += v;
            }
        }
        Ok(Self {
            grid,
            amplitude,
            processes,
            components,
        })
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Build the joint spectral amplitude of `processes` on `grid`:
/// `Σ weight · overlap · α(1/λs + 1/λi) · sinc(Δβ L / 2)`.
///
/// The pump propagation constant is evaluated exactly at every grid point
/// with envelope above [`ENVELOPE_FLOOR`]; points below it are zero.
pub fn build_jsa(
    wg: &Waveguide,
    processes: &[Process],
    pump: &PumpSpec,
    grid: &SpectralGrid,
) -> Result<JointSpectralAmplitude> {
    grid.validate()?;
    pump.validate()?;
    if processes.iter().any(|p| !p.weight.is_finite()) {
        return Err(Error::validation("process weights must be finite"));
    }
    let m = wg.material();
    for l in [grid.signal.start_nm, grid.signal.stop_nm] {
        m.refractive_index(Polarization::SIGNAL, l)?;
    }
    for l in [grid.idler.start_nm, grid.idler.stop_nm] {
        m.refractive_index(Polarization::IDLER, l)?;
    }
    for (s, i) in [
        (grid.signal.start_nm, grid.idler.start_nm),
        (grid.signal.stop_nm, grid.idler.stop_nm),
    ] {
        m.refractive_index(Polarization::PUMP, 1.0 / (1.0 / s + 1.0 / i))?;
    }

    let k = wg.spec().poling.wavevector()?;
    let half_length = 0.5 * wg.spec().length_um();
    let ls = grid.signal.values();
    let li = grid.idler.values();
    let (ns, ni) = (ls.len(), li.len());

    let envelope: Vec<f64> = (0..grid.len())
        .map(|idx| pump.envelope(1.0 / ls[idx / ni] + 1.0 / li[idx % ni]))
        .collect();

    // pump β per distinct pump mode, NaN where the envelope is negligible
    let mut pump_beta: BTreeMap<ModeLabel, Vec<f64>> = BTreeMap::new();
    for p in processes {
        let label = p.triplet.pump.label;
        if pump_beta.contains_key(&label) {
            continue;
        }
        let betas: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                if envelope[idx] < ENVELOPE_FLOOR {
                    return f64::NAN;
                }
                let nu = 1.0 / ls[idx / ni] + 1.0 / li[idx % ni];
                let lp = 1.0 / nu;
                wg.n_eff(label, Polarization::PUMP, lp)
                    .map(|n| 2.0 * PI * 1e3 * n / lp)
                    .unwrap_or(f64::NAN)
            })
            .collect();
        pump_beta.insert(label, betas);
    }

    let mut components = Vec::with_capacity(processes.len());
    for p in processes {
        let t = &p.triplet;
        let beta_s: Vec<Option<f64>> = ls
            .iter()
            .map(|&l| {
                wg.n_eff(t.signal.label, Polarization::SIGNAL, l)
                    .ok()
                    .map(|n| 2.0 * PI * 1e3 * n / l)
            })
            .collect();
        let beta_i: Vec<Option<f64>> = li
            .iter()
            .map(|&l| {
                wg.n_eff(t.idler.label, Polarization::IDLER, l)
                    .ok()
                    .map(|n| 2.0 * PI * 1e3 * n / l)
            })
            .collect();
        let bp = &pump_beta[&t.pump.label];
        let scale = p.weight * t.overlap;
        let comp: Vec<Complex64> = (0..ns * ni)
            .into_par_iter()
            .map(|idx| {
                let (r, c) = (idx / ni, idx % ni);
                let env = envelope[idx];
                let pb = bp[idx];
                match (beta_s[r], beta_i[c]) {
                    (Some(b_s), Some(b_i)) if env >= ENVELOPE_FLOOR && pb.is_finite() => {
                        let dbeta = pb - b_s - b_i - k;
                        Complex64::new(scale * env * sinc(dbeta * half_length), 0.0)
                    }
                    _ => Complex64::new(0.0, 0.0),
                }
            })
            .collect();
        components.push(comp);
    }
    JointSpectralAmplitude::from_components(*grid, processes.to_vec(), components)
}

/// Single-arm spectra sampled on the grid axes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSpectra {
    pub signal_nm: Vec<f64>,
    pub signal: Vec<f64>,
    pub idler_nm: Vec<f64>,
    pub idler: Vec<f64>,
}

impl MarginalSpectra {
    pub fn signal_total(&self, step_nm: f64) -> f64 {
        self.signal.iter().sum::<f64>() * step_nm
    }

    pub fn idler_total(&self, step_nm: f64) -> f64 {
        self.idler.iter().sum::<f64>() * step_nm
    }
}

/// Marginal spectra: each process contributes `fraction(pump mode) · |A|²`
/// integrated over the conjugate wavelength. Distinct processes emit into
/// orthogonal spatial-mode pairs and add in intensity.
pub fn marginal_spectra(jsas: &[JointSpectralAmplitude], pump: &PumpSpec) -> Result<MarginalSpectra> {
    let Some(first) = jsas.first() else {
        return Err(Error::validation("no joint spectra given"));
    };
    let grid = first.grid;
    if jsas.iter().any(|j| j.grid != grid) {
        return Err(Error::validation("joint spectra on inconsistent grids"));
    }
    let (ns, ni) = (grid.signal.count, grid.idler.count);
    let mut signal = vec![0.0; ns];
    let mut idler = vec![0.0; ni];
    for jsa in jsas {
        for (proc_, comp) in jsa.processes.iter().zip(&jsa.components) {
            let frac = pump.fraction(proc_.triplet.pump.label);
            if frac == 0.0 {
                continue;
            }
            for r in 0..ns {
                for c in 0..ni {
                    let p = frac * comp[r * ni + c].norm_sqr();
                    signal[r] += p;
                    idler[c] += p;
                }
            }
        }
    }
    let di = grid.idler.step();
    let ds = grid.signal.step();
    signal.iter_mut().for_each(|v| *v *= di);
    idler.iter_mut().for_each(|v| *v *= ds);
    Ok(MarginalSpectra {
        signal_nm: grid.signal.values(),
        signal,
        idler_nm: grid.idler.values(),
        idler,
    })
}

/// Frame that holds every listed mode with `decay_lengths` of cladding.
pub fn common_frame(modes: &[&GuidedMode], decay_lengths: f64) -> Option<Frame> {
    modes.iter().map(|m| m.frame(decay_lengths)).reduce(|a, b| a.union(&b))
}
