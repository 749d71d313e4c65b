//! Run configuration and the file-producing commands behind the `wgpdc`
//! binary. Every command is a pure function of the configuration: outputs
//! carry no timestamps, so re-running reproduces them byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dispersion::{Polarization, PolingGrating, SellmeierModel};
use crate::error::{Error, Result};
use crate::fit::{self, Arm, FitOptions, FitProblem, Parameters, PeakSelection};
use crate::modesolver::{Frame, GuidedMode, ModeLabel, Orientation, ProfileGrid, Waveguide, WaveguideSpec};
use crate::pdc::{
    self, JointSpectralAmplitude, ModeTriplet, PeakCluster, Process, PumpSpec, SearchSettings, SpectralGrid,
};
use crate::quantum::{self, FilterShape, SpectralFilter};

/// Waveguide keys, read from the top level of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideConfig {
    pub width_um: f64,
    pub depth_um: f64,
    pub delta_n: f64,
    pub poling_period_um: f64,
    #[serde(default = "one")]
    pub poling_order: u32,
    pub length_mm: f64,
    #[serde(default)]
    pub orientation: Orientation,
}

fn one() -> u32 {
    1
}

impl WaveguideConfig {
    pub fn to_spec(&self) -> Result<WaveguideSpec> {
        let spec = WaveguideSpec {
            width_um: self.width_um,
            depth_um: self.depth_um,
            delta_n: self.delta_n,
            poling: PolingGrating::new(self.poling_period_um, self.poling_order)?,
            length_mm: self.length_mm,
            orientation: self.orientation,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_span_nm: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_span_nm: 40.0,
            points: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub window_nm: (f64, f64),
    pub threshold: f64,
    pub scan_step_nm: f64,
    pub linkage_nm: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            window_nm: pdc::DEFAULT_WINDOW_NM,
            threshold: pdc::DEFAULT_THRESHOLD,
            scan_step_nm: pdc::DEFAULT_SCAN_STEP_NM,
            linkage_nm: 3.0,
        }
    }
}

/// Filters centered on each peak when it is selected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub signal_fwhm_nm: f64,
    pub idler_fwhm_nm: f64,
    pub shape: FilterShape,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            signal_fwhm_nm: 3.0,
            idler_fwhm_nm: 3.0,
            shape: FilterShape::Rectangular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub pixel_um: f64,
    pub decay_lengths: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            pixel_um: 0.1,
            decay_lengths: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    /// Defaults to the degenerate wavelength.
    pub wavelength_nm: Option<f64>,
    pub polarization: Option<Polarization>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub measured_peaks: PathBuf,
    #[serde(default)]
    pub selection: PeakSelection,
    /// Starting point; the configured geometry when absent.
    #[serde(default)]
    pub seed: Option<Parameters>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub waveguide: WaveguideConfig,
    pub pump: PumpSpec,
    /// Sellmeier data file; the bundled KTP data when absent.
    #[serde(default)]
    pub dispersion_file: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub filters: FilterConfig,
    #[serde(default)]
    pub render: RenderConfig,
    #[serde(default)]
    pub modes: ModesConfig,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: RunConfig = serde_json::from_str(text).map_err(|source| Error::Json {
            path: base_dir.display().to_string(),
            source,
        })?;
        c.base_dir = base_dir.to_path_buf();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_json_str(&text, &base).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.waveguide.to_spec()?;
        self.pump.validate()?;
        self.grid_spec().validate()?;
        if self.grid.points < 2 || !(self.grid.half_span_nm > 0.0) {
            return Err(Error::validation("grid needs ≥ 2 points and a positive span"));
        }
        let s = &self.search;
        if !(s.threshold > 0.0 && s.threshold < 1.0) {
            return Err(Error::validation("search threshold must lie in (0, 1)"));
        }
        if !(s.scan_step_nm > 0.0 && s.linkage_nm >= 0.0 && s.window_nm.1 > s.window_nm.0) {
            return Err(Error::validation("bad search settings"));
        }
        for f in [self.filters.signal_fwhm_nm, self.filters.idler_fwhm_nm] {
            if !(f > 0.0) {
                return Err(Error::validation("filter bandwidths must be positive"));
            }
        }
        if !(self.render.pixel_um > 0.0 && self.render.decay_lengths >= 3.0) {
            return Err(Error::validation("render needs a positive pixel and ≥ 3 decay lengths"));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> SpectralGrid {
        SpectralGrid::around_degeneracy(self.pump.center_nm, self.grid.half_span_nm, self.grid.points)
    }

    pub fn search_settings(&self) -> SearchSettings {
        SearchSettings {
            threshold: self.search.threshold,
            window_nm: self.search.window_nm,
            scan_step_nm: self.search.scan_step_nm,
            ..SearchSettings::default()
        }
    }

    pub fn material(&self) -> Result<SellmeierModel> {
        match &self.dispersion_file {
            Some(p) => SellmeierModel::load(self.resolve(p)),
            None => Ok(SellmeierModel::bundled_ktp()),
        }
    }
}

/// A loaded configuration with its waveguide and cached process list.
pub struct Model {
    pub config: RunConfig,
    pub waveguide: Waveguide,
    triplets: std::sync::OnceLock<Vec<ModeTriplet>>,
}

impl Model {
    pub fn new(config: RunConfig) -> Result<Self> {
        let material = Arc::new(config.material()?);
        let waveguide = Waveguide::new(config.waveguide.to_spec()?, material)?;
        Ok(Self {
            config,
            waveguide,
            triplets: std::sync::OnceLock::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(RunConfig::load(path)?)
    }

    pub fn triplets(&self) -> Result<&[ModeTriplet]> {
        if let Some(t) = self.triplets.get() {
            return Ok(t);
        }
        let t = pdc::enumerate_triplets(&self.waveguide, &self.config.pump, &self.config.search_settings())?;
        Ok(self.triplets.get_or_init(|| t))
    }

    pub fn clusters(&self) -> Result<Vec<PeakCluster>> {
        Ok(pdc::cluster_peaks(self.triplets()?, self.config.search.linkage_nm))
    }

    pub fn cluster(&self, label: &str) -> Result<PeakCluster> {
        let clusters = self.clusters()?;
        let known: Vec<&str> = clusters.iter().map(|c| c.label.as_str()).collect();
        let known = known.join(", ");
        clusters
            .into_iter()
            .find(|c| c.label.eq_ignore_ascii_case(label))
            .ok_or_else(|| Error::validation(format!("unknown peak {label:?}; this model has {known}")))
    }

    /// Lettered clusters A–E in order; an error if the model resolves fewer.
    pub fn principal_clusters(&self) -> Result<Vec<PeakCluster>> {
        let lettered: Vec<PeakCluster> = self.clusters()?.into_iter().filter(|c| !c.higher_order).collect();
        if lettered.len() < 5 {
            return Err(Error::Degenerate(format!(
                "model resolves {} principal peaks in the search window, 5 are needed",
                lettered.len()
            )));
        }
        Ok(lettered.into_iter().take(5).collect())
    }

    pub fn filters_for(&self, cluster: &PeakCluster) -> (SpectralFilter, SpectralFilter) {
        let f = &self.config.filters;
        let make = |c, w| SpectralFilter {
            center_nm: c,
            fwhm_nm: w,
            shape: f.shape,
        };
        (
            make(cluster.signal_center_nm, f.signal_fwhm_nm),
            make(cluster.idler_center_nm, f.idler_fwhm_nm),
        )
    }

    pub fn jsa(&self, triplets: &[ModeTriplet]) -> Result<JointSpectralAmplitude> {
        let processes: Vec<Process> = triplets.iter().cloned().map(Process::new).collect();
        pdc::build_jsa(&self.waveguide, &processes, &self.config.pump, &self.config.grid_spec())
    }
}

/// File-producing commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Modes,
    Peaks,
    Spectrum,
    Jsa,
    Schmidt,
    Coinc,
    Render,
    Fit,
    All,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "modes" => Command::Modes,
            "peaks" => Command::Peaks,
            "spectrum" => Command::Spectrum,
            "jsa" => Command::Jsa,
            "schmidt" => Command::Schmidt,
            "coinc" => Command::Coinc,
            "render" => Command::Render,
            "fit" => Command::Fit,
            "all" => Command::All,
            other => return Err(Error::validation(format!("unknown command {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub peak: Option<String>,
    pub arm: Arm,
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    pub wavelength_nm: Option<f64>,
    pub polarization: Option<Polarization>,
    pub measured: Option<PathBuf>,
}

impl Invocation {
    pub fn new(command: Command, config: impl Into<PathBuf>) -> Self {
        Self {
            command,
            config: config.into(),
            peak: None,
            arm: Arm::Signal,
            out: None,
            wavelength_nm: None,
            polarization: None,
            measured: None,
        }
    }
}

/// Files written by a command plus a short human-readable summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Sink {
    dir: PathBuf,
    report: Report,
}

impl Sink {
    fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir,
            report: Report::default(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.report.files.push(path);
        Ok(())
    }

    fn note(&mut self, line: impl AsRef<str>) {
        self.report.summary.push_str(line.as_ref());
        self.report.summary.push('\n');
    }
}

fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

pub fn execute(inv: &Invocation) -> Result<Report> {
    let model = Model::load(&inv.config)?;
    let dir = match &inv.out {
        Some(d) => d.clone(),
        None => model.config.resolve(&model.config.output_dir),
    };
    let mut sink = Sink::new(dir)?;
    let peak = || -> Result<&str> {
        inv.peak
            .as_deref()
            .ok_or_else(|| Error::validation("this command needs --peak"))
    };
    match inv.command {
        Command::Modes => cmd_modes(&model, inv.wavelength_nm, inv.polarization, &mut sink)?,
        Command::Peaks => cmd_peaks(&model, &mut sink)?,
        Command::Spectrum => cmd_spectrum(&model, &mut sink)?,
        Command::Jsa => cmd_jsa(&model, inv.peak.as_deref(), &mut sink)?,
        Command::Schmidt => cmd_schmidt(&model, peak()?, &mut sink)?,
        Command::Coinc => cmd_coinc(&model, &mut sink)?,
        Command::Render => cmd_render(&model, peak()?, inv.arm, &mut sink)?,
        Command::Fit => cmd_fit(&model, inv.measured.as_deref(), &mut sink)?,
        Command::All => cmd_all(&model, &inv.config, &mut sink)?,
    }
    Ok(sink.report)
}

/// CSV of guided modes (label_m, label_n, n_eff), descending n_eff.
pub fn modes_csv(modes: &[GuidedMode]) -> String {
    let mut s = String::from("label_m,label_n,n_eff\n");
    for m in modes {
        let _ = writeln!(s, "{},{},{:.12}", m.label.m, m.label.n, m.n_eff);
    }
    s
}

fn cmd_modes(model: &Model, wavelength: Option<f64>, pol: Option<Polarization>, sink: &mut Sink) -> Result<()> {
    let c = &model.config;
    let lambda = wavelength.or(c.modes.wavelength_nm).unwrap_or(c.pump.degenerate_nm());
    let pol = pol.or(c.modes.polarization).unwrap_or(Polarization::Y);
    let modes = model.waveguide.solve_modes(pol, lambda, ModeLabel::new(64, 64))?;
    sink.note(format!("{} guided {pol} modes at {lambda} nm", modes.len()));
    for m in &modes {
        sink.note(format!("  {}  n_eff = {:.8}", m.label, m.n_eff));
    }
    sink.write("modes.csv", modes_csv(&modes).as_bytes())
}

/// Process-table CSV of every process with its cluster label.
pub fn peaks_csv(clusters: &[PeakCluster]) -> String {
    let mut rows: Vec<(&PeakCluster, &ModeTriplet)> = clusters
        .iter()
        .flat_map(|c| c.members.iter().map(move |t| (c, t)))
        .collect();
    rows.sort_by(|a, b| {
        let pa = a.1.peak.map_or(f64::INFINITY, |p| p.signal_nm);
        let pb = b.1.peak.map_or(f64::INFINITY, |p| p.signal_nm);
        pa.total_cmp(&pb).then(a.1.labels().cmp(&b.1.labels()))
    });
    let mut s = String::from(
        "pump_mode,signal_mode,idler_mode,overlap_per_um,signal_peak_nm,idler_peak_nm,cluster,higher_order\n",
    );
    for (c, t) in rows {
        let pk = t.peak.expect("clustered triplets have peaks");
        let l = t.labels();
        let _ = writeln!(
            s,
            "\"{}\",\"{}\",\"{}\",{:.9},{:.9},{:.9},{},{}",
            l.pump, l.signal, l.idler, t.overlap, pk.signal_nm, pk.idler_nm, c.label, c.higher_order
        );
    }
    s
}

fn cmd_peaks(model: &Model, sink: &mut Sink) -> Result<()> {
    let clusters = model.clusters()?;
    for c in &clusters {
        let members: Vec<String> = c.member_labels().iter().map(|l| l.to_string()).collect();
        sink.note(format!(
            "{:3} λs {:.2} nm  λi {:.2} nm  {}",
            c.label,
            c.signal_center_nm,
            c.idler_center_nm,
            members.join("  and  ")
        ));
    }
    sink.write("peaks.csv", peaks_csv(&clusters).as_bytes())
}

fn cmd_spectrum(model: &Model, sink: &mut Sink) -> Result<()> {
    let jsa = model.jsa(model.triplets()?)?;
    let m = pdc::marginal_spectra(&[jsa], &model.config.pump)?;
    let mut s = String::from("wavelength_nm,signal_intensity,idler_intensity\n");
    for k in 0..m.signal_nm.len() {
        let _ = writeln!(s, "{:.6},{:.9e},{:.9e}", m.signal_nm[k], m.signal[k], m.idler[k]);
    }
    sink.note(format!("marginal spectra on {} points", m.signal_nm.len()));
    sink.write("spectrum.csv", s.as_bytes())
}

fn process_json(t: &ModeTriplet, weight: f64) -> serde_json::Value {
    let l = t.labels();
    json!({
        "pump_mode": l.pump,
        "signal_mode": l.signal,
        "idler_mode": l.idler,
        "overlap_per_um": t.overlap,
        "weight": weight,
        "signal_peak_nm": t.peak.map(|p| p.signal_nm),
        "idler_peak_nm": t.peak.map(|p| p.idler_nm),
    })
}

fn write_jsa(model: &Model, jsa: &JointSpectralAmplitude, stem: &str, sink: &mut Sink) -> Result<()> {
    let mut bytes = Vec::with_capacity(jsa.amplitude.len() * 16);
    for a in &jsa.amplitude {
        bytes.extend_from_slice(&a.re.to_le_bytes());
        bytes.extend_from_slice(&a.im.to_le_bytes());
    }
    let sidecar = json!({
        "data_file": format!("{stem}.bin"),
        "layout": "row-major, rows follow the signal axis; each element is (re, im) as little-endian f64",
        "shape": [jsa.grid.signal.count, jsa.grid.idler.count],
        "signal_axis_nm": jsa.grid.signal,
        "idler_axis_nm": jsa.grid.idler,
        "pump": model.config.pump,
        "length_mm": model.config.waveguide.length_mm,
        "processes": jsa.processes.iter().map(|p| process_json(&p.triplet, p.weight)).collect::<Vec<_>>(),
    });
    sink.write(&format!("{stem}.bin"), &bytes)?;
    sink.write(&format!("{stem}.json"), &pretty(&sidecar))
}

fn cmd_jsa(model: &Model, peak: Option<&str>, sink: &mut Sink) -> Result<()> {
    let (triplets, stem) = match peak {
        Some(p) => {
            let c = model.cluster(p)?;
            (c.members, format!("jsa_{}", c.label))
        }
        None => (model.triplets()?.to_vec(), "jsa_all".to_string()),
    };
    let jsa = model.jsa(&triplets)?;
    sink.note(format!(
        "{stem}: {} processes on {} points",
        triplets.len(),
        jsa.grid.len()
    ));
    write_jsa(model, &jsa, &stem, sink)
}

/// Schmidt decomposition of a peak's filtered joint spectrum, plus the
/// spatial Bell state for two-process peaks.
pub fn schmidt_report(model: &Model, cluster: &PeakCluster) -> Result<serde_json::Value> {
    let (fs, fi) = model.filters_for(cluster);
    let jsa = model.jsa(&cluster.members)?;
    let filtered = quantum::apply_filters(&jsa, &fs, &fi)?;
    let d = quantum::schmidt(&filtered)?;
    let r = d.report();
    let bell = match quantum::bell_state(cluster, &filtered) {
        Ok(b) => json!({
            "kind": b.kind,
            "basis": b.state.basis.iter().map(|(s, i)| json!({"signal": s, "idler": i})).collect::<Vec<_>>(),
            "coefficients": b.state.coefficients.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            "spectral_overlap": b.spectral_overlap,
            "fidelity_estimate": b.fidelity,
            "fidelity_note": "diagnostic F = (1 + O)/2 from the normalized overlap O of the two filtered process amplitudes; not a tomographic fidelity",
        }),
        Err(Error::NotEntangled(_)) => serde_json::Value::Null,
        Err(e) => return Err(e),
    };
    Ok(json!({
        "peak": cluster.label,
        "signal_filter": fs,
        "idler_filter": fi,
        "processes": cluster.members.iter().map(|t| process_json(t, 1.0)).collect::<Vec<_>>(),
        "coefficients": r.coefficients,
        "schmidt_number": r.schmidt_number,
        "reconstruction_error": r.reconstruction_error,
        "bell_state": bell,
    }))
}

fn cmd_schmidt(model: &Model, peak: &str, sink: &mut Sink) -> Result<()> {
    let c = model.cluster(peak)?;
    let v = schmidt_report(model, &c)?;
    sink.note(format!("peak {}: Schmidt number {:.6}", c.label, v["schmidt_number"]));
    sink.write(&format!("schmidt_{}.json", c.label), &pretty(&v))
}

/// 5×5 coincidence matrix over the principal peaks, rows = signal filters.
pub fn coincidences(model: &Model) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let clusters = model.principal_clusters()?;
    let jsa = model.jsa(model.triplets()?)?;
    let (sf, idf): (Vec<SpectralFilter>, Vec<SpectralFilter>) = clusters.iter().map(|c| model.filters_for(c)).unzip();
    let m = quantum::coincidence_matrix(&jsa, &model.config.pump, &sf, &idf)?;
    Ok((clusters.into_iter().map(|c| c.label).collect(), m))
}

pub fn coincidence_csv(labels: &[String], m: &[Vec<f64>]) -> String {
    let mut s = String::from("signal\\idler");
    for l in labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    for (l, row) in labels.iter().zip(m) {
        s.push_str(l);
        for v in row {
            let _ = write!(s, ",{v:.9e}");
        }
        s.push('\n');
    }
    s
}

fn cmd_coinc(model: &Model, sink: &mut Sink) -> Result<()> {
    let (labels, m) = coincidences(model)?;
    sink.note(coincidence_csv(&labels, &m));
    sink.write("coincidences.csv", coincidence_csv(&labels, &m).as_bytes())
}

/// 8-bit grey image, row-major from the top.
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn at(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// `Σ weight·|u|²` over a peak's modes in one arm, with
/// `weight = pump fraction × overlap²`, scaled to a maximum of 255. The top
/// row is the air interface.
pub fn render_peak(model: &Model, cluster: &PeakCluster, arm: Arm) -> Result<Image> {
    let cfg = &model.config.render;
    let weighted: Vec<(&GuidedMode, f64)> = cluster
        .members
        .iter()
        .map(|t| {
            let mode = match arm {
                Arm::Signal => &t.signal,
                Arm::Idler => &t.idler,
            };
            (mode, model.config.pump.fraction(t.pump.label) * t.overlap * t.overlap)
        })
        .collect();
    let frame: Frame = weighted
        .iter()
        .map(|(m, _)| m.frame(cfg.decay_lengths))
        .reduce(|a, b| a.union(&b))
        .ok_or_else(|| Error::validation("peak has no processes"))?
        .symmetric_x();
    let nx = ((frame.x_max - frame.x_min) / cfg.pixel_um).ceil() as usize;
    let ny = ((frame.y_max - frame.y_min) / cfg.pixel_um).ceil() as usize;
    let frame = Frame {
        x_max: frame.x_min + nx as f64 * cfg.pixel_um,
        y_min: frame.y_max - ny as f64 * cfg.pixel_um,
        ..frame
    }
    .symmetric_x();
    let grid = ProfileGrid::new(frame, nx, ny);
    let mut intensity = vec![0.0; nx * ny];
    for (m, w) in &weighted {
        let p = m.profile(&grid)?;
        for (acc, v) in intensity.iter_mut().zip(&p.values) {
            *acc += w * v * v;
        }
    }
    let max = intensity.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Degenerate("rendered intensity is zero".into()));
    }
    let mut pixels = Vec::with_capacity(nx * ny);
    // profile rows run from the substrate upward; images start at the top
    for row in (0..ny).rev() {
        for col in 0..nx {
            pixels.push((255.0 * intensity[row * nx + col] / max).round() as u8);
        }
    }
    Ok(Image {
        width: nx,
        height: ny,
        pixels,
    })
}

fn cmd_render(model: &Model, peak: &str, arm: Arm, sink: &mut Sink) -> Result<()> {
    let c = model.cluster(peak)?;
    let img = render_peak(model, &c, arm)?;
    sink.note(format!("peak {} {arm}: {}×{} image", c.label, img.width, img.height));
    sink.write(&format!("render_{}_{arm}.pgm", c.label), &img.to_pgm())
}

fn cmd_fit(model: &Model, measured: Option<&Path>, sink: &mut Sink) -> Result<()> {
    let c = &model.config;
    let path = match (measured, &c.fit) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(f)) => c.resolve(&f.measured_peaks),
        (None, None) => return Err(Error::validation("fit needs --measured or a fit.measured_peaks entry")),
    };
    let selection = c.fit.as_ref().map(|f| f.selection).unwrap_or_default();
    let peaks = fit::read_measured_csv(&path)?;
    let mut problem = FitProblem::new(
        peaks,
        model.waveguide.spec().clone(),
        model.waveguide.material_arc(),
        c.pump.clone(),
    )?;
    problem.selection = selection;
    let seed = c
        .fit
        .as_ref()
        .and_then(|f| f.seed)
        .unwrap_or_else(|| Parameters::of_spec(model.waveguide.spec()));
    let opts = FitOptions::default();
    let r = fit::fit_two_stage(&problem, &seed, &opts)?;
    let p = r.parameters;
    sink.note(format!(
        "Λ = {:.5} µm, w = {:.4} µm, d = {:.4} µm, Δn = {:.6}; objective {:.3e} nm² after {} evaluations{}",
        p.period_um,
        p.width_um,
        p.depth_um,
        p.delta_n,
        r.objective,
        r.evaluations,
        if r.converged { "" } else { " (not converged)" }
    ));
    let report = json!({
        "measured_peaks": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "selection": selection,
        "gate_nm": problem.gate_nm,
        "ceiling_nm2": problem.ceiling_nm2,
        "window_nm": problem.search.window_nm,
        "bounds": problem.bounds,
        "seed": seed,
        "options": opts,
        "result": r,
    });
    sink.write("fit_report.json", &pretty(&report))
}

fn cmd_all(model: &Model, config_path: &Path, sink: &mut Sink) -> Result<()> {
    let mut skipped = BTreeMap::new();
    cmd_modes(model, None, Some(Polarization::Y), sink)?;
    cmd_peaks(model, sink)?;
    cmd_spectrum(model, sink)?;
    cmd_jsa(model, None, sink)?;
    for c in model.clusters()?.iter().filter(|c| !c.higher_order) {
        cmd_jsa(model, Some(&c.label), sink)?;
        cmd_schmidt(model, &c.label, sink)?;
        for arm in [Arm::Signal, Arm::Idler] {
            cmd_render(model, &c.label, arm, sink)?;
        }
    }
    match cmd_coinc(model, sink) {
        Ok(()) => {}
        Err(e @ Error::Degenerate(_)) => {
            skipped.insert("coinc", e.to_string());
        }
        Err(e) => return Err(e),
    }
    if model.config.fit.is_some() {
        cmd_fit(model, None, sink)?;
    } else {
        skipped.insert("fit", "no fit.measured_peaks in the configuration".to_string());
    }
    let mut outputs = Vec::new();
    for f in &sink.report.files {
        let bytes = std::fs::metadata(f).map(|m| m.len()).unwrap_or(0);
        outputs.push(json!({
            "file": f.file_name().map(|n| n.to_string_lossy().into_owned()),
            "bytes": bytes,
        }));
    }
    let manifest = json!({
        "tool": "wgpdc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config_path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "outputs": outputs,
        "skipped": skipped,
    });
    sink.write("manifest.json", &pretty(&manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "width_um": 4.1, "depth_um": 9.3, "delta_n": 0.008,
        "poling_period_um": 8.92, "length_mm": 10.0,
        "pump": {"center_nm": 403.3, "fwhm_nm": 0.8,
                 "mode_fractions": {"(0,0)": 0.625, "(0,1)": 0.375}}
    }"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::from_json_str(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(c.waveguide.orientation, Orientation::WidthHorizontal);
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.search.window_nm, (766.0, 846.0));
        assert_eq!(c.filters.shape, FilterShape::Rectangular);
        assert_eq!(c.pump.fraction(ModeLabel::new(0, 1)), 0.375);
        assert!(c.dispersion_file.is_none());
    }

    #[test]
    fn bad_configs_rejected() {
        let bad_sum = MINIMAL.replace("0.375", "0.3");
        assert!(RunConfig::from_json_str(&bad_sum, Path::new(".")).is_err());
        let bad_label = MINIMAL.replace("(0,1)", "(0;1)");
        assert!(RunConfig::from_json_str(&bad_label, Path::new(".")).is_err());
        let even_order = MINIMAL.replace("\"length_mm\"", "\"poling_order\": 2, \"length_mm\"");
        assert!(RunConfig::from_json_str(&even_order, Path::new(".")).is_err());
        assert!(RunConfig::from_json_str("{", Path::new(".")).is_err());
    }

    #[test]
    fn command_names() {
        assert_eq!("coinc".parse::<Command>().unwrap(), Command::Coinc);
        assert!("plot".parse::<Command>().is_err());
    }
}
