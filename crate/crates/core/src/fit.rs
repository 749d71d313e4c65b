//! Recovery of poling period, channel dimensions and index contrast from
//! measured peak positions.
//!
//! The objective compares model peak wavelengths with measured ones per arm
//! (nearest neighbour, 5 nm gate). Minimization is a bounded Nelder-Mead
//! simplex in coordinates scaled to the unit box. The two-stage protocol
//! first fixes the grating period on the principal, most widely separated
//! pair, then frees all four parameters.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dispersion::{PolingGrating, SellmeierModel};
use crate::error::{Error, Result};
use crate::modesolver::{ModeLabel, Waveguide, WaveguideSpec};
use crate::pdc::{self, PeakPair, PumpSpec, SearchSettings, TripletLabels};

pub const DEFAULT_GATE_NM: f64 = 5.0;
/// Penalty for a measured peak without a model peak inside the gate, nm².
pub const DEFAULT_CEILING_NM2: f64 = 25.0;
/// Signal search window used while fitting: ±90 nm about degeneracy.
pub const FIT_WINDOW_HALF_SPAN_NM: f64 = 90.0;
/// Root-bracketing scan step while fitting; roots are still bisected to
/// [`pdc::PEAK_TOLERANCE_NM`].
pub const FIT_SCAN_STEP_NM: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Signal,
    Idler,
}

impl FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "signal" | "s" => Ok(Arm::Signal),
            "idler" | "i" => Ok(Arm::Idler),
            other => Err(Error::validation(format!("unknown arm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Arm::Signal => "signal",
            Arm::Idler => "idler",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPeak {
    pub arm: Arm,
    pub wavelength_nm: f64,
    pub weight: f64,
}

/// Parse `arm,wavelength_nm,weight` rows; a header line and `#` comments
/// are skipped.
pub fn parse_measured_csv(text: &str) -> Result<Vec<MeasuredPeak>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields.first().is_some_and(|f| f.eq_ignore_ascii_case("arm")) {
            continue;
        }
        let bad = |what: &str| Error::validation(format!("measured peaks line {}: {what}", lineno + 1));
        if fields.len() != 3 {
            return Err(bad("expected arm,wavelength_nm,weight"));
        }
        let peak = MeasuredPeak {
            arm: fields[0].parse()?,
            wavelength_nm: fields[1].parse().map_err(|_| bad("bad wavelength"))?,
            weight: fields[2].parse().map_err(|_| bad("bad weight"))?,
        };
        if !(peak.wavelength_nm > 0.0 && peak.weight >= 0.0 && peak.weight.is_finite()) {
            return Err(bad("wavelength must be positive and weight non-negative"));
        }
        out.push(peak);
    }
    Ok(out)
}

pub fn read_measured_csv(path: &Path) -> Result<Vec<MeasuredPeak>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_measured_csv(&text)
}

pub fn write_measured_csv(peaks: &[MeasuredPeak]) -> String {
    let mut s = String::from("arm,wavelength_nm,weight\n");
    for p in peaks {
        s.push_str(&format!("{},{:.9},{}\n", p.arm, p.wavelength_nm, p.weight));
    }
    s
}

/// The four free parameters of the forward model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub period_um: f64,
    pub width_um: f64,
    pub depth_um: f64,
    pub delta_n: f64,
}

impl Parameters {
    pub fn to_array(self) -> [f64; 4] {
        [self.period_um, self.width_um, self.depth_um, self.delta_n]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            period_um: a[0],
            width_um: a[1],
            depth_um: a[2],
            delta_n: a[3],
        }
    }

    pub fn of_spec(spec: &WaveguideSpec) -> Self {
        Self {
            period_um: spec.poling.period_um,
            width_um: spec.width_um,
            depth_um: spec.depth_um,
            delta_n: spec.delta_n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Parameters,
    pub upper: Parameters,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            lower: Parameters {
                period_um: 8.5,
                width_um: 2.0,
                depth_um: 6.0,
                delta_n: 0.002,
            },
            upper: Parameters {
                period_um: 9.5,
                width_um: 8.0,
                depth_um: 14.0,
                delta_n: 0.03,
            },
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite())
        {
            return Err(Error::validation("fit bounds must satisfy lower < upper"));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Parameters) -> bool {
        let (lo, hi, x) = (self.lower.to_array(), self.upper.to_array(), p.to_array());
        (0..4).all(|k| x[k] >= lo[k] && x[k] <= hi[k])
    }

    fn to_unit(self, p: &Parameters) -> [f64; 4] {
        let (lo, hi, x) = (self.lower.to_array(), self.upper.to_array(), p.to_array());
        std::array::from_fn(|k| (x[k] - lo[k]) / (hi[k] - lo[k]))
    }

    fn unit_to_parameters(self, u: &[f64; 4]) -> Parameters {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        Parameters::from_array(std::array::from_fn(|k| lo[k] + u[k].clamp(0.0, 1.0) * (hi[k] - lo[k])))
    }
}

/// Which model processes count as observable peaks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakSelection {
    /// Only processes built from the low-order modes; higher-order modes
    /// couple poorly into single-mode collection and go unobserved.
    #[default]
    LowOrder,
    All,
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    pub measured: Vec<MeasuredPeak>,
    pub bounds: Bounds,
    /// Fixed parts of the waveguide (length, orientation, grating order).
    pub template: WaveguideSpec,
    pub material: Arc<SellmeierModel>,
    pub pump: PumpSpec,
    pub search: SearchSettings,
    pub selection: PeakSelection,
    pub gate_nm: f64,
    pub ceiling_nm2: f64,
}

impl FitProblem {
    pub fn new(
        measured: Vec<MeasuredPeak>,
        template: WaveguideSpec,
        material: Arc<SellmeierModel>,
        pump: PumpSpec,
    ) -> Result<Self> {
        let deg = pump.degenerate_nm();
        let search = SearchSettings {
            window_nm: (deg - FIT_WINDOW_HALF_SPAN_NM, deg + FIT_WINDOW_HALF_SPAN_NM),
            scan_step_nm: FIT_SCAN_STEP_NM,
            ..SearchSettings::default()
        };
        let p = Self {
            measured,
            bounds: Bounds::default(),
            template,
            material,
            pump,
            search,
            selection: PeakSelection::default(),
            gate_nm: DEFAULT_GATE_NM,
            ceiling_nm2: DEFAULT_CEILING_NM2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        self.pump.validate()?;
        if self.measured.len() < 2 {
            return Err(Error::validation("a fit needs at least two measured peaks"));
        }
        if !(self.gate_nm > 0.0 && self.ceiling_nm2 > 0.0) {
            return Err(Error::validation("gate and penalty ceiling must be positive"));
        }
        Ok(())
    }

    pub fn waveguide(&self, p: &Parameters) -> Result<Waveguide> {
        let spec = WaveguideSpec {
            width_um: p.width_um,
            depth_um: p.depth_um,
            delta_n: p.delta_n,
            poling: PolingGrating::new(p.period_um, self.template.poling.order)?,
            ..self.template.clone()
        };
        Waveguide::new(spec, self.material.clone())
    }

    /// Phase-matched peaks of the selected model processes inside the fit
    /// window.
    pub fn model_peaks(&self, p: &Parameters) -> Result<Vec<PeakPair>> {
        let wg = self.waveguide(p)?;
        Ok(pdc::enumerate_triplets(&wg, &self.pump, &self.search)?
            .into_iter()
            .filter(|t| self.selection == PeakSelection::All || !t.labels().is_higher_order())
            .filter_map(|t| t.peak)
            .collect())
    }

    fn total_weight(&self) -> f64 {
        self.measured.iter().map(|m| m.weight).sum()
    }

    /// Weighted sum of squared nearest-neighbour distances in nm²; each
    /// measured peak contributes at most the penalty ceiling. A parameter
    /// point where the model fails to evaluate scores the full ceiling.
    pub fn objective(&self, p: &Parameters) -> Result<f64> {
        if !self.bounds.contains(p) {
            return Err(Error::validation(format!("parameters {p:?} outside the fit bounds")));
        }
        Ok(match self.model_peaks(p) {
            Ok(peaks) => self.score(&peaks),
            Err(_) => self.total_weight() * self.ceiling_nm2,
        })
    }

    pub fn score(&self, model: &[PeakPair]) -> f64 {
        self.measured
            .iter()
            .map(|m| {
                let nearest = model
                    .iter()
                    .map(|pk| match m.arm {
                        Arm::Signal => pk.signal_nm,
                        Arm::Idler => pk.idler_nm,
                    })
                    .map(|l| (l - m.wavelength_nm).abs())
                    .fold(f64::INFINITY, f64::min);
                let d2 = if nearest <= self.gate_nm {
                    nearest * nearest
                } else {
                    self.ceiling_nm2
                };
                m.weight * d2.min(self.ceiling_nm2)
            })
            .sum()
    }

    /// The measured signal and idler peaks farthest from degeneracy.
    pub fn principal_pair(&self) -> Result<(MeasuredPeak, MeasuredPeak)> {
        let deg = self.pump.degenerate_nm();
        let farthest = |arm: Arm| {
            self.measured
                .iter()
                .filter(|m| m.arm == arm)
                .max_by(|a, b| (a.wavelength_nm - deg).abs().total_cmp(&(b.wavelength_nm - deg).abs()))
                .copied()
                .ok_or_else(|| Error::validation(format!("no measured {arm} peak for the principal pair")))
        };
        Ok((farthest(Arm::Signal)?, farthest(Arm::Idler)?))
    }

    /// Grating period that phase-matches the fundamental triplet exactly at
    /// the principal measured signal peak, other parameters held.
    pub fn principal_period(&self, p: &Parameters) -> Result<f64> {
        let (ms, _) = self.principal_pair()?;
        let wg = self.waveguide(p)?;
        let f = ModeLabel::FUNDAMENTAL;
        let labels = TripletLabels::new(f, f, f);
        let k_now = wg.spec().poling.wavevector()?;
        let mismatch = pdc::phase_mismatch(&wg, labels, ms.wavelength_nm, self.pump.center_nm)?;
        let k = k_now + mismatch;
        if !(k > 0.0) {
            return Err(Error::Numerical(
                "no positive grating vector matches the principal pair".into(),
            ));
        }
        Ok(2.0 * std::f64::consts::PI * self.template.poling.order as f64 / k)
    }

    /// Stage-one objective: squared distance of the fundamental triplet's
    /// peak from the principal measured pair, not gated (only one process
    /// is compared, so there is no wrong-peak ambiguity).
    pub fn principal_objective(&self, p: &Parameters) -> Result<f64> {
        let (ms, mi) = self.principal_pair()?;
        let wg = self.waveguide(p)?;
        let f = ModeLabel::FUNDAMENTAL;
        let ceiling = (ms.weight + mi.weight) * self.ceiling_nm2 * 100.0;
        let peaks = match pdc::find_peak_with_step(
            &wg,
            TripletLabels::new(f, f, f),
            self.search.window_nm,
            self.pump.center_nm,
            self.search.scan_step_nm,
        ) {
            Ok(p) => p,
            Err(_) => return Ok(ceiling),
        };
        Ok(peaks
            .iter()
            .map(|pk| {
                ms.weight * (pk.signal_nm - ms.wavelength_nm).powi(2)
                    + mi.weight * (pk.idler_nm - mi.wavelength_nm).powi(2)
            })
            .fold(ceiling, f64::min))
    }
}

/// Measured-peak list generated from the model itself: every selected peak
/// in the fit window, both arms, unit weight.
pub fn synthetic_peaks(problem: &FitProblem, truth: &Parameters) -> Result<Vec<MeasuredPeak>> {
    let mut out = Vec::new();
    for pk in problem.model_peaks(truth)? {
        out.push(MeasuredPeak {
            arm: Arm::Signal,
            wavelength_nm: pk.signal_nm,
            weight: 1.0,
        });
        out.push(MeasuredPeak {
            arm: Arm::Idler,
            wavelength_nm: pk.idler_nm,
            weight: 1.0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Initial simplex edge in unit-box coordinates.
    pub initial_step: f64,
    /// Stop when the simplex spans less than this in every unit coordinate...
    pub x_tolerance: f64,
    /// ...and the objective spread across vertices is below this.
    pub f_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 440,
            initial_step: 0.1,
            x_tolerance: 1e-4,
            f_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective after each iteration.
    pub trace: Vec<f64>,
}

/// Nelder-Mead in the unit box: every trial point is clamped to `[0, 1]ⁿ`
/// before evaluation, so the objective is never called outside it.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> Result<f64>, x0: &[f64], opts: &NelderMeadOptions) -> Result<Minimum> {
    let n = x0.len();
    if n == 0 || x0.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::validation("simplex seed must lie in the unit box"));
    }
    let project = |x: Vec<f64>| -> Vec<f64> { x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect() };
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        if v.is_nan() {
            return Err(Error::Numerical("objective returned NaN".into()));
        }
        Ok(v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evaluations)?));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += if x[k] + opts.initial_step <= 1.0 {
            opts.initial_step
        } else {
            -opts.initial_step
        };
        let v = eval(&x, &mut evaluations)?;
        simplex.push((x, v));
    }

    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(simplex[0].1);
        let spread = simplex[n].1 - simplex[0].1;
        let size = (0..n)
            .map(|k| {
                let (lo, hi) = simplex
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
                        (lo.min(x[k]), hi.max(x[k]))
                    });
                hi - lo
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tolerance && size <= opts.x_tolerance {
            converged = true;
            break;
        }
        if evaluations + 2 > opts.max_evaluations {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            project(
                (0..n)
                    .map(|k| centroid[k] + t * (simplex[n].0[k] - centroid[k]))
                    .collect(),
            )
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evaluations)?;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evaluations)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evaluations)?;
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evaluations)?;
            (xc, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        if evaluations + n > opts.max_evaluations {
            break;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = (0..n).map(|k| best[k] + 0.5 * (v.0[k] - best[k])).collect();
            let fx = eval(&x, &mut evaluations)?;
            *v = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(Minimum {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        iterations,
        evaluations,
        converged,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub free: Vec<String>,
    pub start: Parameters,
    pub best: Parameters,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Index of the stage's first entry in the combined trace.
    pub trace_start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Parameters,
    /// Full objective (all measured peaks) at `parameters`, nm².
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub stages: Vec<StageReport>,
    /// Best value of each stage's own objective per iteration.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub stage1: NelderMeadOptions,
    pub stage2: NelderMeadOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            stage1: NelderMeadOptions {
                max_evaluations: 60,
                initial_step: 0.05,
                x_tolerance: 1e-4,
                f_tolerance: 1e-6,
            },
            stage2: NelderMeadOptions::default(),
        }
    }
}

const NAMES: [&str; 4] = ["period_um", "width_um", "depth_um", "delta_n"];

fn run_stage(
    problem: &FitProblem,
    name: &str,
    start: Parameters,
    free: &[usize],
    opts: &NelderMeadOptions,
    objective: impl Fn(&Parameters) -> Result<f64>,
    trace: &mut Vec<f64>,
) -> Result<(Parameters, StageReport)> {
    let base = problem.bounds.to_unit(&start);
    let point = |u: &[f64]| {
        let mut full = base;
        for (k, &i) in free.iter().enumerate() {
            full[i] = u[k];
        }
        problem.bounds.unit_to_parameters(&full)
    };
    let x0: Vec<f64> = free.iter().map(|&i| base[i]).collect();
    let m = nelder_mead(|u| objective(&point(u)), &x0, opts)?;
    let best = point(&m.x);
    let report = StageReport {
        name: name.to_string(),
        free: free.iter().map(|&i| NAMES[i].to_string()).collect(),
        start,
        best,
        objective: m.value,
        iterations: m.iterations,
        evaluations: m.evaluations,
        converged: m.converged,
        trace_start: trace.len(),
    };
    trace.extend(&m.trace);
    Ok((best, report))
}

fn check_seed(problem: &FitProblem, seed: &Parameters) -> Result<()> {
    problem.validate()?;
    if !problem.bounds.contains(seed) {
        return Err(Error::validation(format!("seed {seed:?} outside the fit bounds")));
    }
    Ok(())
}

fn finish(problem: &FitProblem, best: Parameters, stages: Vec<StageReport>, trace: Vec<f64>) -> Result<FitResult> {
    let objective = problem.objective(&best)?;
    Ok(FitResult {
        parameters: best,
        objective,
        iterations: stages.iter().map(|s| s.iterations).sum(),
        evaluations: stages.iter().map(|s| s.evaluations).sum(),
        converged: stages.last().is_some_and(|s| s.converged),
        stages,
        trace,
    })
}

/// Single-stage fit of all four parameters.
pub fn fit(problem: &FitProblem, seed: &Parameters, opts: &NelderMeadOptions) -> Result<FitResult> {
    check_seed(problem, seed)?;
    let mut trace = Vec::new();
    let (best, report) = run_stage(
        problem,
        "all",
        *seed,
        &[0, 1, 2, 3],
        opts,
        |p| problem.objective(p),
        &mut trace,
    )?;
    finish(problem, best, vec![report], trace)
}

/// Stage 1: period only, on the principal pair. Stage 2: all parameters on
/// every measured peak.
pub fn fit_two_stage(problem: &FitProblem, seed: &Parameters, opts: &FitOptions) -> Result<FitResult> {
    check_seed(problem, seed)?;
    let mut trace = Vec::new();
    let (p1, r1) = run_stage(
        problem,
        "principal_period",
        *seed,
        &[0],
        &opts.stage1,
        |p| problem.principal_objective(p),
        &mut trace,
    )?;
    let (p2, r2) = run_stage(
        problem,
        "all",
        p1,
        &[0, 1, 2, 3],
        &opts.stage2,
        |p| problem.objective(p),
        &mut trace,
    )?;
    finish(problem, p2, vec![r1, r2], trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let target = [0.3, 0.7, 0.55];
        let m = nelder_mead(
            |x| Ok(x.iter().zip(&target).map(|(a, b)| (a - b).powi(2) * 10.0).sum()),
            &[0.9, 0.1, 0.5],
            &NelderMeadOptions {
                max_evaluations: 2000,
                initial_step: 0.1,
                x_tolerance: 1e-8,
                f_tolerance: 1e-14,
            },
        )
        .unwrap();
        assert!(m.converged);
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6);
        }
        // trace is the running best, hence non-increasing
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nelder_mead_respects_box() {
        let mut seen_outside = false;
        let m = nelder_mead(
            |x| {
                seen_outside |= x.iter().any(|v| !(0.0..=1.0).contains(v));
                Ok((x[0] + 1.0).powi(2) + (x[1] - 2.0).powi(2))
            },
            &[0.5, 0.5],
            &NelderMeadOptions::default(),
        )
        .unwrap();
        assert!(!seen_outside);
        assert!(m.x[0].abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let m = nelder_mead(
            |x| Ok((x[0] - 0.123).powi(2)),
            &[0.9],
            &NelderMeadOptions {
                max_evaluations: 6,
                ..NelderMeadOptions::default()
            },
        )
        .unwrap();
        assert!(!m.converged);
        assert!(m.evaluations <= 6);
    }

    #[test]
    fn measured_csv_round_trip() {
        let peaks = vec![
            MeasuredPeak {
                arm: Arm::Signal,
                wavelength_nm: 795.5,
                weight: 1.0,
            },
            MeasuredPeak {
                arm: Arm::Idler,
                wavelength_nm: 818.25,
                weight: 0.5,
            },
        ];
        assert_eq!(parse_measured_csv(&write_measured_csv(&peaks)).unwrap(), peaks);
        assert!(parse_measured_csv("pump,800,1\n").is_err());
        assert!(parse_measured_csv("signal,800\n").is_err());
        assert!(parse_measured_csv("signal,-800,1\n").is_err());
    }

    #[test]
    fn bounds_unit_mapping() {
        let b = Bounds::default();
        let p = Parameters {
            period_um: 8.92,
            width_um: 4.1,
            depth_um: 9.3,
            delta_n: 0.008,
        };
        let q = b.unit_to_parameters(&b.to_unit(&p));
        for (x, y) in p.to_array().iter().zip(q.to_array()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(b.contains(&p));
        assert!(!b.contains(&Parameters {
            period_um: 8.72 - 0.3,
            ..p
        }));
    }
}
