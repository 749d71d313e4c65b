//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use wgpdc::cli::Model;

pub fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn fitted() -> Model {
    Model::load(&config("fitted.json")).expect("fitted config")
}

pub fn calibrated() -> Model {
    Model::load(&config("calibrated.json")).expect("calibrated config")
}

/// Slab roots from the textbook form `tan(κt) = κ(γ₁+γ₂)/(κ² − γ₁γ₂)`,
/// cleared of the tangent's poles, on a dense uniform scan followed by
/// plain bisection.
pub fn slab_oracle(n1: f64, nc: f64, n2: f64, t_um: f64, lambda_nm: f64, scan: usize) -> Vec<f64> {
    let k0 = 2.0 * PI / (lambda_nm * 1e-3);
    let g = |ne: f64| {
        let kappa = k0 * (nc * nc - ne * ne).sqrt();
        let g1 = k0 * (ne * ne - n1 * n1).sqrt();
        let g2 = k0 * (ne * ne - n2 * n2).sqrt();
        (kappa * kappa - g1 * g2) * (kappa * t_um).sin() - kappa * (g1 + g2) * (kappa * t_um).cos()
    };
    let lo = n1.max(n2);
    let mut roots = Vec::new();
    let x = |i: usize| lo + (nc - lo) * i as f64 / scan as f64;
    // stay off both ends, where g vanishes without a mode
    let (first, last) = (x(0) + 1e-14, x(scan) - 1e-14);
    let mut a = first;
    let mut fa = g(a);
    for i in 1..=scan {
        let b = if i == scan { last } else { x(i) };
        let fb = g(b);
        if fa * fb < 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..300 {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                let fm = g(m);
                if fl * fm <= 0.0 {
                    r = m;
                } else {
                    l = m;
                    fl = fm;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    roots.sort_by(|p, q| q.total_cmp(p));
    roots
}

/// Guided-mode count from the normalized frequency of an asymmetric slab.
pub fn slab_count(n1: f64, nc: f64, n2: f64, t_um: f64, lambda_nm: f64) -> usize {
    let (hi, lo) = (n1.max(n2), n1.min(n2));
    let k0 = 2.0 * PI / (lambda_nm * 1e-3);
    let v = k0 * t_um * (nc * nc - hi * hi).sqrt();
    let asym = (hi * hi - lo * lo) / (nc * nc - hi * hi);
    let x = v - asym.sqrt().atan();
    if x <= 0.0 {
        0
    } else {
        (x / PI).ceil() as usize
    }
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn outer(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Schmidt number from the eigenvalues of the reduced signal density
/// matrix `ρ = A A† / tr(A A†)`: `K = 1 / tr(ρ²)`.
pub fn density_matrix_schmidt_number(rows: usize, cols: usize, amp: &[Complex64]) -> f64 {
    let a = DMatrix::from_row_slice(rows, cols, amp);
    let rho = &a * a.adjoint();
    let tr = rho.trace().re;
    let eig = (rho / Complex64::new(tr, 0.0)).symmetric_eigenvalues();
    1.0 / eig.iter().map(|p| p * p).sum::<f64>()
}

use wgpdc::modesolver::ModeLabel;
use wgpdc::pdc::{PeakCluster, TripletLabels};

fn t(p: (u32, u32), s: (u32, u32), i: (u32, u32)) -> TripletLabels {
    TripletLabels {
        pump: ModeLabel::new(p.0, p.1),
        signal: ModeLabel::new(s.0, s.1),
        idler: ModeLabel::new(i.0, i.1),
    }
}

/// The nine observed processes grouped into the five measured peaks.
pub fn observed_processes() -> Vec<(&'static str, Vec<TripletLabels>)> {
    vec![
        ("A", vec![t((0, 0), (0, 0), (0, 0))]),
        ("B", vec![t((0, 1), (0, 0), (0, 1)), t((0, 1), (0, 1), (0, 0))]),
        ("C", vec![t((0, 0), (0, 1), (0, 1))]),
        ("D", vec![t((0, 1), (0, 1), (0, 2)), t((0, 1), (0, 2), (0, 1))]),
        ("E", vec![t((0, 0), (1, 0), (1, 0)), t((0, 0), (0, 2), (0, 2))]),
    ]
}

/// `Ok` when the lettered clusters are exactly the table's peaks and every
/// other cluster is flagged higher-order.
pub fn check_observed_processes(clusters: &[PeakCluster]) -> Result<(), String> {
    let lettered: Vec<&PeakCluster> = clusters.iter().filter(|c| !c.higher_order).collect();
    let expected = observed_processes();
    if lettered.len() != expected.len() {
        let got: Vec<String> = lettered.iter().map(|c| describe(c)).collect();
        return Err(format!("{} principal clusters: {}", lettered.len(), got.join("; ")));
    }
    for (c, (letter, members)) in lettered.iter().zip(&expected) {
        let mut got = c.member_labels();
        let mut want = members.clone();
        got.sort();
        want.sort();
        if c.label != *letter || got != want {
            return Err(format!("peak {letter} expected {want:?}, got {}", describe(c)));
        }
    }
    for c in clusters.iter().filter(|c| c.higher_order) {
        if !c.member_labels().iter().all(|l| l.is_higher_order()) {
            return Err(format!(
                "higher-order cluster {} holds a low-order process",
                describe(c)
            ));
        }
    }
    Ok(())
}

pub fn describe(c: &PeakCluster) -> String {
    let m: Vec<String> = c.member_labels().iter().map(|l| l.to_string()).collect();
    format!("{} @ {:.2} nm [{}]", c.label, c.signal_center_nm, m.join(" and "))
}
