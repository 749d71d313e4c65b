//! Scalar guided modes of a rectangular step-index channel by the effective
//! index method.
//!
//! The channel sits in a uniform substrate on three sides with air above.
//! The vertical slab (substrate / core / air) is solved first; its effective
//! index becomes the core index of a symmetric horizontal slab clad by
//! substrate. Profiles are separable, `u(x, y) = X_m(x) · Y_n(y)`.
//!
//! Coordinates: `x` is centered on the channel, `y = 0` is the air
//! interface and the core occupies `-depth <= y <= 0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dispersion::{Polarization, PolingGrating, SellmeierModel};
use crate::error::{Error, Result};

pub const AIR_INDEX: f64 = 1.0;

/// Number of scan intervals used to bracket slab roots.
pub const SLAB_SCAN_POINTS: usize = 2000;

/// Node counts `(m, n)` along x (horizontal) and y (vertical).
/// Serialized as the string `"(m,n)"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ModeLabel {
    pub m: u32,
    pub n: u32,
}

impl ModeLabel {
    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    pub const FUNDAMENTAL: ModeLabel = ModeLabel::new(0, 0);
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

impl std::str::FromStr for ModeLabel {
    type Err = Error;

    /// Accepts `(m,n)` or `m,n`, whitespace tolerated.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(t);
        let bad = || Error::validation(format!("bad mode label {s:?}, expected \"(m,n)\""));
        let (m, n) = t.split_once(',').ok_or_else(bad)?;
        Ok(Self::new(
            m.trim().parse().map_err(|_| bad())?,
            n.trim().parse().map_err(|_| bad())?,
        ))
    }
}

impl From<ModeLabel> for String {
    fn from(l: ModeLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for ModeLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Which waveguide dimension lies along the horizontal (x) axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    WidthHorizontal,
    WidthVertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    pub width_um: f64,
    pub depth_um: f64,
    pub delta_n: f64,
    pub poling: PolingGrating,
    pub length_mm: f64,
    #[serde(default)]
    pub orientation: Orientation,
}

impl WaveguideSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("width_um", self.width_um),
            ("depth_um", self.depth_um),
            ("length_mm", self.length_mm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("{name} must be positive, got {v}")));
            }
        }
        // delta_n == 0 is accepted as the unguided limit: every mode list is empty.
        if !(self.delta_n >= 0.0 && self.delta_n < 0.1) {
            return Err(Error::validation(format!(
                "delta_n must lie in [0, 0.1), got {}",
                self.delta_n
            )));
        }
        self.poling.validate()
    }

    /// Extent along x in µm.
    pub fn horizontal_um(&self) -> f64 {
        match self.orientation {
            Orientation::WidthHorizontal => self.width_um,
            Orientation::WidthVertical => self.depth_um,
        }
    }

    /// Extent along y in µm.
    pub fn vertical_um(&self) -> f64 {
        match self.orientation {
            Orientation::WidthHorizontal => self.depth_um,
            Orientation::WidthVertical => self.width_um,
        }
    }

    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }
}

/// `a² − b²` in factored form, clamped at zero.
fn diff_sq(a: f64, b: f64) -> f64 {
    ((a - b) * (a + b)).max(0.0)
}

/// Pole-free slab dispersion function, normalized so that it equals
/// `sin(κt − atan(γ_lo/κ) − atan(γ_hi/κ))`. Guided modes are its zeros on
/// `(max(n_lo, n_hi), n_core)`.
pub fn slab_dispersion(n_lower: f64, n_core: f64, n_upper: f64, thickness_um: f64, k0: f64, n_eff: f64) -> f64 {
    let kappa = k0 * diff_sq(n_core, n_eff).sqrt();
    let g_lo = k0 * diff_sq(n_eff, n_lower).sqrt();
    let g_hi = k0 * diff_sq(n_eff, n_upper).sqrt();
    let (s, c) = (kappa * thickness_um).sin_cos();
    let num = (kappa * kappa - g_lo * g_hi) * s - kappa * (g_lo + g_hi) * c;
    let den = ((kappa * kappa + g_lo * g_lo) * (kappa * kappa + g_hi * g_hi)).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Effective indices of all guided modes of a three-layer slab, descending.
///
/// Roots are bracketed on a uniform scan of [`SLAB_SCAN_POINTS`] intervals
/// between the higher cladding index and the core index, then bisected to
/// machine precision.
pub fn solve_slab(n_left: f64, n_core: f64, n_right: f64, thickness_um: f64, lambda_nm: f64) -> Vec<f64> {
    let lo = n_left.max(n_right);
    if !(n_core > lo) || !(thickness_um > 0.0) || !(lambda_nm > 0.0) {
        return Vec::new();
    }
    let k0 = 2.0 * PI / (lambda_nm * 1e-3);
    let f = |ne: f64| slab_dispersion(n_left, n_core, n_right, thickness_um, k0, ne);
    let span = n_core - lo;
    // The function vanishes identically at n_core; stop just short of it.
    let sample = |i: usize| {
        if i == SLAB_SCAN_POINTS {
            n_core - span * 1e-9
        } else {
            lo + span * i as f64 / SLAB_SCAN_POINTS as f64
        }
    };

    let mut roots = Vec::new();
    let mut a = sample(0);
    let mut fa = f(a);
    for i in 1..=SLAB_SCAN_POINTS {
        let b = sample(i);
        let fb = f(b);
        if fb == 0.0 {
            roots.push(b);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    // Rounding can land samples on the interval ends, where the function is
    // zero without a mode.
    roots.retain(|&r| r > lo && r < n_core);
    roots.sort_by(|x, y| y.total_cmp(x));
    roots.dedup();
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Effective index of the `order`-th slab mode, or `None` when it is cut off.
///
/// Solves the single-branch phase condition
/// `κt − mπ − atan(γ_lo/κ) − atan(γ_hi/κ) = 0`, which is strictly
/// decreasing in `n_eff`, so no scan is needed. Used to track one labeled
/// mode across wavelength.
pub fn slab_branch(
    n_lower: f64,
    n_core: f64,
    n_upper: f64,
    thickness_um: f64,
    lambda_nm: f64,
    order: u32,
) -> Option<f64> {
    let lo = n_lower.max(n_upper);
    if !(n_core > lo) {
        return None;
    }
    let k0 = 2.0 * PI / (lambda_nm * 1e-3);
    let phase = |ne: f64| {
        let kappa = k0 * diff_sq(n_core, ne).sqrt();
        let g_lo = k0 * diff_sq(ne, n_lower).sqrt();
        let g_hi = k0 * diff_sq(ne, n_upper).sqrt();
        kappa * thickness_um - order as f64 * PI - g_lo.atan2(kappa) - g_hi.atan2(kappa)
    };
    let f_lo = phase(lo);
    if !(f_lo > 0.0) {
        return None;
    }
    Some(illinois(&phase, lo, n_core, f_lo, phase(n_core)))
}

/// Bracketed regula falsi with the Illinois modification; superlinear on
/// smooth monotone functions and never leaves `[a, b]`. Falls back to a
/// bisection step whenever the bracket fails to halve.
fn illinois(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fb == 0.0 {
        return b;
    }
    if fa * fb > 0.0 {
        return bisect(f, a, b, fa);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b - a;
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        if x <= a || x >= b {
            break;
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if b - a > 0.5 * width {
            // slow progress: force a bisection step
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = f(m);
            if fm == 0.0 {
                return m;
            }
            if fa * fm < 0.0 {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Mode-count prediction from the normalized frequency of an asymmetric slab.
pub fn slab_mode_count(n_left: f64, n_core: f64, n_right: f64, thickness_um: f64, lambda_nm: f64) -> usize {
    let hi_clad = n_left.max(n_right);
    let lo_clad = n_left.min(n_right);
    if !(n_core > hi_clad) {
        return 0;
    }
    let k0 = 2.0 * PI / (lambda_nm * 1e-3);
    let v = k0 * thickness_um * (n_core * n_core - hi_clad * hi_clad).sqrt();
    let asym = (hi_clad * hi_clad - lo_clad * lo_clad) / (n_core * n_core - hi_clad * hi_clad);
    let cut = asym.sqrt().atan();
    if v <= cut {
        0
    } else {
        ((v - cut) / PI).floor() as usize + 1
    }
}

/// Closed-form field of one slab mode: cosine in the core, exponential tails.
/// The coordinate `s` runs from the lower interface (`s = 0`) to the upper
/// one (`s = thickness`). Unit L2 norm over the whole line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabField {
    pub n_lower: f64,
    pub n_core: f64,
    pub n_upper: f64,
    pub thickness_um: f64,
    pub n_eff: f64,
    pub order: u32,
    pub kappa: f64,
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    phi: f64,
    amplitude: f64,
}

impl SlabField {
    pub fn new(
        n_lower: f64,
        n_core: f64,
        n_upper: f64,
        thickness_um: f64,
        lambda_nm: f64,
        n_eff: f64,
        order: u32,
    ) -> Self {
        let k0 = 2.0 * PI / (lambda_nm * 1e-3);
        let kappa = k0 * diff_sq(n_core, n_eff).sqrt();
        let gamma_lower = k0 * diff_sq(n_eff, n_lower).sqrt();
        let gamma_upper = k0 * diff_sq(n_eff, n_upper).sqrt();
        let phi = gamma_lower.atan2(kappa);
        let mut field = Self {
            n_lower,
            n_core,
            n_upper,
            thickness_um,
            n_eff,
            order,
            kappa,
            gamma_lower,
            gamma_upper,
            phi,
            amplitude: 1.0,
        };
        field.amplitude = 1.0 / field.raw_norm_squared().sqrt();
        field
    }

    fn raw_norm_squared(&self) -> f64 {
        let t = self.thickness_um;
        let c0 = self.phi.cos();
        let ct = (self.kappa * t - self.phi).cos();
        let core = if self.kappa > 0.0 {
            0.5 * t + ((2.0 * (self.kappa * t - self.phi)).sin() + (2.0 * self.phi).sin()) / (4.0 * self.kappa)
        } else {
            t
        };
        c0 * c0 / (2.0 * self.gamma_lower) + core + ct * ct / (2.0 * self.gamma_upper)
    }

    /// Analytic ∫ u² ds over the full line; 1 up to rounding.
    pub fn norm_squared(&self) -> f64 {
        self.amplitude * self.amplitude * self.raw_norm_squared()
    }

    pub fn value(&self, s: f64) -> f64 {
        let t = self.thickness_um;
        let a = self.amplitude;
        if s < 0.0 {
            a * self.phi.cos() * (self.gamma_lower * s).exp()
        } else if s > t {
            a * (self.kappa * t - self.phi).cos() * (-self.gamma_upper * (s - t)).exp()
        } else {
            a * (self.kappa * s - self.phi).cos()
        }
    }

    pub fn decay_length_lower(&self) -> f64 {
        1.0 / self.gamma_lower
    }

    pub fn decay_length_upper(&self) -> f64 {
        1.0 / self.gamma_upper
    }
}

/// A guided mode evaluated at one wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidedMode {
    pub label: ModeLabel,
    pub polarization: Polarization,
    pub wavelength_nm: f64,
    pub n_eff: f64,
    pub n_substrate: f64,
    pub n_core: f64,
    /// Field along x, `s = x + horizontal/2`.
    pub horizontal: SlabField,
    /// Field along y, `s = y + vertical`.
    pub vertical: SlabField,
}

impl GuidedMode {
    /// Propagation constant in nm⁻¹.
    pub fn beta(&self) -> f64 {
        2.0 * PI * self.n_eff / self.wavelength_nm
    }

    pub fn width_um(&self) -> f64 {
        self.horizontal.thickness_um
    }

    pub fn depth_um(&self) -> f64 {
        self.vertical.thickness_um
    }

    pub fn x_profile(&self, x_um: f64) -> f64 {
        self.horizontal.value(x_um + 0.5 * self.width_um())
    }

    pub fn y_profile(&self, y_um: f64) -> f64 {
        self.vertical.value(y_um + self.depth_um())
    }

    pub fn value(&self, x_um: f64, y_um: f64) -> f64 {
        self.x_profile(x_um) * self.y_profile(y_um)
    }

    /// Analytic ∫∫ u² dx dy.
    pub fn norm_squared(&self) -> f64 {
        self.horizontal.norm_squared() * self.vertical.norm_squared()
    }

    /// The smallest rectangle holding the core plus `decay_lengths` 1/e field
    /// decay lengths of cladding on every side.
    pub fn frame(&self, decay_lengths: f64) -> Frame {
        let hw = 0.5 * self.width_um();
        Frame {
            x_min: -hw - decay_lengths * self.horizontal.decay_length_lower(),
            x_max: hw + decay_lengths * self.horizontal.decay_length_upper(),
            y_min: -self.depth_um() - decay_lengths * self.vertical.decay_length_lower(),
            y_max: decay_lengths * self.vertical.decay_length_upper(),
        }
    }

    /// Sample the profile at pixel centers of `grid`.
    pub fn profile(&self, grid: &ProfileGrid) -> Result<Profile2D> {
        grid.validate()?;
        let need = self.frame(3.0);
        if !grid.frame.contains(&need) {
            return Err(Error::validation(format!(
                "grid {:?} does not cover mode {} core plus 3 decay lengths {:?}",
                grid.frame, self.label, need
            )));
        }
        let xs = grid.x_centers();
        let ys = grid.y_centers();
        let xv: Vec<f64> = xs.iter().map(|&x| self.x_profile(x)).collect();
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &y in &ys {
            let yv = self.y_profile(y);
            values.extend(xv.iter().map(|&x| x * yv));
        }
        Ok(Profile2D {
            grid: grid.clone(),
            values,
        })
    }
}

/// Axis-aligned rectangle in the transverse plane, µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Frame {
    pub fn contains(&self, other: &Frame) -> bool {
        self.x_min <= other.x_min && self.x_max >= other.x_max && self.y_min <= other.y_min && self.y_max >= other.y_max
    }

    pub fn union(&self, other: &Frame) -> Frame {
        Frame {
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
        }
    }

    /// Widen horizontally so the frame is symmetric about x = 0.
    pub fn symmetric_x(&self) -> Frame {
        let half = self.x_min.abs().max(self.x_max.abs());
        Frame {
            x_min: -half,
            x_max: half,
            ..*self
        }
    }
}

/// Pixel grid over a frame; samples sit at pixel centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileGrid {
    pub frame: Frame,
    pub nx: usize,
    pub ny: usize,
}

impl ProfileGrid {
    pub fn new(frame: Frame, nx: usize, ny: usize) -> Self {
        Self { frame, nx, ny }
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.frame;
        if self.nx < 2 || self.ny < 2 || !(f.x_max > f.x_min) || !(f.y_max > f.y_min) {
            return Err(Error::validation(format!("degenerate profile grid {self:?}")));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.frame.x_max - self.frame.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.frame.y_max - self.frame.y_min) / self.ny as f64
    }

    pub fn x_centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|i| self.frame.x_min + (i as f64 + 0.5) * dx).collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        let dy = self.dy();
        (0..self.ny).map(|j| self.frame.y_min + (j as f64 + 0.5) * dy).collect()
    }
}

/// Sampled real profile, row-major with rows along y (bottom row first).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile2D {
    pub grid: ProfileGrid,
    pub values: Vec<f64>,
}

impl Profile2D {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    /// Midpoint-rule ∑ u² ΔxΔy.
    pub fn discrete_norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx() * self.grid.dy()
    }
}

/// Effective-index solver bound to one waveguide and one dispersion model.
#[derive(Debug, Clone)]
pub struct Waveguide {
    spec: WaveguideSpec,
    material: Arc<SellmeierModel>,
}

impl Waveguide {
    pub fn new(spec: WaveguideSpec, material: Arc<SellmeierModel>) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec, material })
    }

    pub fn spec(&self) -> &WaveguideSpec {
        &self.spec
    }

    pub fn material(&self) -> &SellmeierModel {
        &self.material
    }

    pub fn material_arc(&self) -> Arc<SellmeierModel> {
        Arc::clone(&self.material)
    }

    /// Same material and orientation, different geometry.
    pub fn with_spec(&self, spec: WaveguideSpec) -> Result<Self> {
        Self::new(spec, self.material_arc())
    }

    /// `(n_substrate, n_core)` at `lambda_nm`.
    pub fn indices(&self, pol: Polarization, lambda_nm: f64) -> Result<(f64, f64)> {
        let n_sub = self.material.refractive_index(pol, lambda_nm)?;
        Ok((n_sub, n_sub + self.spec.delta_n))
    }

    /// All guided modes with `m <= max_label.m` and `n <= max_label.n`,
    /// sorted by descending effective index.
    pub fn solve_modes(&self, pol: Polarization, lambda_nm: f64, max_label: ModeLabel) -> Result<Vec<GuidedMode>> {
        let (n_sub, n_core) = self.indices(pol, lambda_nm)?;
        let h = self.spec.horizontal_um();
        let v = self.spec.vertical_um();
        let mut modes = Vec::new();
        for (n, &n_vert) in solve_slab(n_sub, n_core, AIR_INDEX, v, lambda_nm)
            .iter()
            .enumerate()
            .take(max_label.n as usize + 1)
        {
            let vertical = SlabField::new(n_sub, n_core, AIR_INDEX, v, lambda_nm, n_vert, n as u32);
            for (m, &n_eff) in solve_slab(n_sub, n_vert, n_sub, h, lambda_nm)
                .iter()
                .enumerate()
                .take(max_label.m as usize + 1)
            {
                let horizontal = SlabField::new(n_sub, n_vert, n_sub, h, lambda_nm, n_eff, m as u32);
                modes.push(GuidedMode {
                    label: ModeLabel::new(m as u32, n as u32),
                    polarization: pol,
                    wavelength_nm: lambda_nm,
                    n_eff,
                    n_substrate: n_sub,
                    n_core,
                    horizontal,
                    vertical,
                });
            }
        }
        modes.sort_by(|a, b| b.n_eff.total_cmp(&a.n_eff).then(a.label.cmp(&b.label)));
        Ok(modes)
    }

    /// Effective index of one labeled mode, tracked on its own dispersion
    /// branch. Fails with a cutoff error when the mode is not guided.
    pub fn n_eff(&self, label: ModeLabel, pol: Polarization, lambda_nm: f64) -> Result<f64> {
        let (n_sub, n_core) = self.indices(pol, lambda_nm)?;
        let cutoff = || Error::Cutoff {
            label,
            polarization: pol,
            lambda_nm,
        };
        let n_vert =
            slab_branch(n_sub, n_core, AIR_INDEX, self.spec.vertical_um(), lambda_nm, label.n).ok_or_else(cutoff)?;
        slab_branch(n_sub, n_vert, n_sub, self.spec.horizontal_um(), lambda_nm, label.m).ok_or_else(cutoff)
    }

    /// Like [`Waveguide::n_eff`] but returns the full mode with its fields.
    pub fn mode(&self, label: ModeLabel, pol: Polarization, lambda_nm: f64) -> Result<GuidedMode> {
        let (n_sub, n_core) = self.indices(pol, lambda_nm)?;
        let cutoff = || Error::Cutoff {
            label,
            polarization: pol,
            lambda_nm,
        };
        let v = self.spec.vertical_um();
        let h = self.spec.horizontal_um();
        let n_vert = slab_branch(n_sub, n_core, AIR_INDEX, v, lambda_nm, label.n).ok_or_else(cutoff)?;
        let n_eff = slab_branch(n_sub, n_vert, n_sub, h, lambda_nm, label.m).ok_or_else(cutoff)?;
        Ok(GuidedMode {
            label,
            polarization: pol,
            wavelength_nm: lambda_nm,
            n_eff,
            n_substrate: n_sub,
            n_core,
            horizontal: SlabField::new(n_sub, n_vert, n_sub, h, lambda_nm, n_eff, label.m),
            vertical: SlabField::new(n_sub, n_core, AIR_INDEX, v, lambda_nm, n_vert, label.n),
        })
    }

    /// Propagation constant `2π n_eff / λ` in nm⁻¹.
    pub fn beta(&self, label: ModeLabel, pol: Polarization, lambda_nm: f64) -> Result<f64> {
        Ok(2.0 * PI * self.n_eff(label, pol, lambda_nm)? / lambda_nm)
    }
}

/// Count sign changes of a sampled function, ignoring exact zeros.
pub fn sign_changes(samples: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for v in samples {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}
