mod common;

use wgpdc::modesolver::ModeLabel;
use wgpdc::pdc::{self, Axis, JointSpectralAmplitude, Process, PumpSpec, SpectralGrid};

fn local_grid(center_s: f64, center_i: f64, half: f64, count: usize) -> SpectralGrid {
    let axis = |c: f64| Axis {
        start_nm: c - half,
        stop_nm: c + half,
        count,
    };
    SpectralGrid {
        signal: axis(center_s),
        idler: axis(center_i),
    }
}

fn argmax(jsa: &JointSpectralAmplitude) -> (f64, f64) {
    let k = (0..jsa.amplitude.len())
        .max_by(|&a, &b| jsa.amplitude[a].norm().total_cmp(&jsa.amplitude[b].norm()))
        .unwrap();
    let n = jsa.grid.idler.count;
    (jsa.grid.signal.value(k / n), jsa.grid.idler.value(k % n))
}

#[test]
fn single_process_peaks_on_the_phase_matched_point() {
    let model = common::calibrated();
    for t in model.triplets().unwrap().iter().take(4) {
        let pk = t.peak.unwrap();
        let grid = local_grid(pk.signal_nm, pk.idler_nm, 4.0, 321);
        let jsa = pdc::build_jsa(&model.waveguide, &[Process::new(t.clone())], &model.config.pump, &grid).unwrap();
        let (s, i) = argmax(&jsa);
        assert!(
            (s - pk.signal_nm).abs() <= grid.signal.step(),
            "{}: {s} vs {pk:?}",
            t.labels()
        );
        assert!(
            (i - pk.idler_nm).abs() <= grid.idler.step(),
            "{}: {i} vs {pk:?}",
            t.labels()
        );
    }
}

/// Intensity-weighted RMS spread of `λs + λi`.
fn sum_spread(jsa: &JointSpectralAmplitude) -> f64 {
    let n = jsa.grid.idler.count;
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (k, a) in jsa.amplitude.iter().enumerate() {
        let x = jsa.grid.signal.value(k / n) + jsa.grid.idler.value(k % n);
        let p = a.norm_sqr();
        w += p;
        m1 += p * x;
        m2 += p * x * x;
    }
    (m2 / w - (m1 / w).powi(2)).sqrt()
}

#[test]
fn ridge_width_scales_with_pump_bandwidth() {
    let model = common::calibrated();
    let t = &model.triplets().unwrap()[0];
    let pk = t.peak.unwrap();
    let grid = local_grid(pk.signal_nm, pk.idler_nm, 8.0, 481);
    let width = |fwhm: f64| {
        let pump = PumpSpec {
            fwhm_nm: fwhm,
            ..model.config.pump.clone()
        };
        let jsa = pdc::build_jsa(&model.waveguide, &[Process::new(t.clone())], &pump, &grid).unwrap();
        sum_spread(&jsa)
    };
    // narrow pumps: the sinc is much wider along λs + λi than the envelope
    let ratio = width(0.2) / width(0.1);
    assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn marginals_carry_equal_total_flux() {
    let model = common::calibrated();
    let jsa = model.jsa(model.triplets().unwrap()).unwrap();
    let m = pdc::marginal_spectra(std::slice::from_ref(&jsa), &model.config.pump).unwrap();
    let s = m.signal_total(jsa.grid.signal.step());
    let i = m.idler_total(jsa.grid.idler.step());
    assert!(((s - i) / s).abs() < 1e-12, "{s} vs {i}");
    assert_eq!(m.signal_nm, jsa.grid.signal.values());
}

#[test]
fn removing_the_first_order_pump_mode_removes_b_and_d() {
    let model = common::calibrated();
    let triplets = model.triplets().unwrap();
    let jsa = model.jsa(triplets).unwrap();
    let only00 = PumpSpec::new(403.3, 0.8, &[(ModeLabel::new(0, 0), 1.0), (ModeLabel::new(0, 1), 0.0)]).unwrap();
    let full = pdc::marginal_spectra(std::slice::from_ref(&jsa), &model.config.pump).unwrap();
    let cut = pdc::marginal_spectra(&[jsa], &only00).unwrap();

    // the same as never having built the (0,1)-pumped processes
    let kept: Vec<_> = triplets
        .iter()
        .filter(|t| t.pump.label == ModeLabel::new(0, 0))
        .cloned()
        .collect();
    let reference = pdc::marginal_spectra(&[model.jsa(&kept).unwrap()], &only00).unwrap();
    for (a, b) in cut.signal.iter().zip(&reference.signal) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
    }

    let clusters = model.clusters().unwrap();
    let at = |m: &pdc::MarginalSpectra, nm: f64| {
        let k = m.signal_nm.iter().position(|&x| x >= nm).unwrap();
        m.signal[k]
    };
    // share of the full spectrum at each peak that comes from (0,0)-pumped processes
    let f00 = model.config.pump.fraction(ModeLabel::new(0, 0));
    for c in clusters.iter().filter(|c| !c.higher_order) {
        let x = c.members[0].peak.unwrap().signal_nm;
        let pumped_by_01 = c.members.iter().all(|t| t.pump.label == ModeLabel::new(0, 1));
        let share = f00 * at(&cut, x) / at(&full, x);
        // broad neighbouring peaks overlap, so a removed peak leaves their tails
        if pumped_by_01 {
            assert!(share < 0.5, "peak {} keeps {share}", c.label);
        } else {
            assert!(share > 0.5, "peak {} drops to {share}", c.label);
        }
    }
}

#[test]
fn coherent_field_is_the_sum_of_components() {
    let model = common::calibrated();
    let b = model.cluster("B").unwrap();
    let jsa = model.jsa(&b.members).unwrap();
    assert_eq!(jsa.components.len(), 2);
    for k in (0..jsa.amplitude.len()).step_by(97) {
        let sum = jsa.components[0][k] + jsa.components[1][k];
        assert!((jsa.amplitude[k] - sum).norm() <= 1e-15 * sum.norm().max(1e-300));
    }
}
