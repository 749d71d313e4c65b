//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

mod common;

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgpdc::cli::{self, Command, Invocation, Model};
use wgpdc::dispersion::{Polarization, SellmeierModel};
use wgpdc::fit::{self, Arm, FitOptions, FitProblem, MeasuredPeak, Parameters};
use wgpdc::modesolver::{slab_branch, solve_slab, ModeLabel, Orientation, WaveguideSpec};
use wgpdc::pdc::{self, Quadrature};
use wgpdc::quantum::{self, BellKind};

const LAPTOP_BUDGET: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn main() {
    let checks: [(&str, Check); 12] = [
        ("1 process table [fitted geometry]", c1_table),
        ("1 process table [calibrated geometry, reference only]", c1_calibrated),
        ("2 parity conservation", c2_parity),
        ("3 peak-window containment", c3_containment),
        ("4 diagonal coincidences [fitted geometry]", || {
            c4_coincidences("fitted.json")
        }),
        ("4 diagonal coincidences [calibrated geometry]", || {
            c4_coincidences("calibrated.json")
        }),
        ("5 Schmidt correctness", c5_schmidt),
        ("6 Bell states [fitted geometry]", || c6_bell("fitted.json")),
        ("6 Bell states [calibrated geometry]", || c6_bell("calibrated.json")),
        ("7 fit round trip", c7_fit),
        ("8 slab solver oracle", c8_solver),
        ("9 determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name} ({:.1} s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn table_check(config: &str) -> Outcome {
    let t = Instant::now();
    let model = match Model::load(&common::config(config)) {
        Ok(m) => m,
        Err(e) => return outcome(false, e.to_string()),
    };
    let clusters = match model.clusters() {
        Ok(c) => c,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = t.elapsed();
    let in_time = elapsed < LAPTOP_BUDGET;
    match common::check_observed_processes(&clusters) {
        Ok(()) => outcome(
            in_time,
            format!("five peaks with the tabulated processes in {elapsed:.2?}"),
        ),
        Err(e) => outcome(false, e),
    }
}

fn c1_table() -> Outcome {
    table_check("fitted.json")
}

fn c1_calibrated() -> Outcome {
    table_check("calibrated.json")
}

fn c2_parity() -> Outcome {
    let t = Instant::now();
    let model = common::fitted();
    let wg = &model.waveguide;
    let cap = ModeLabel::new(64, 64);
    let modes = |pol, l| wg.solve_modes(pol, l, cap).unwrap();
    let (pumps, signals, idlers) = (
        modes(Polarization::PUMP, 403.3),
        modes(Polarization::SIGNAL, 806.6),
        modes(Polarization::IDLER, 806.6),
    );
    let q = Quadrature::default();
    let (mut forbidden, mut violations, mut worst) = (0, 0, 0.0f64);
    for p in &pumps {
        for s in &signals {
            for i in &idlers {
                if (p.label.m + s.label.m + i.label.m) % 2 == 1 {
                    forbidden += 1;
                    let o = pdc::overlap_coefficient(p, s, i, &q).unwrap().abs();
                    worst = worst.max(o);
                    if o >= 1e-6 {
                        violations += 1;
                    }
                }
            }
        }
    }
    let elapsed = t.elapsed();
    outcome(
        violations == 0 && elapsed < LAPTOP_BUDGET,
        format!(
            "{} triplets, {forbidden} parity-forbidden, {violations} with |overlap| ≥ 1e-6 (max {worst:.1e})",
            pumps.len() * signals.len() * idlers.len()
        ),
    )
}

fn c3_containment() -> Outcome {
    let model = common::fitted();
    let lp = model.config.pump.center_nm;
    let triplets = model.triplets().unwrap();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for t in triplets {
        let pk = t.peak.unwrap();
        let e = (1.0 / pk.signal_nm + 1.0 / pk.idler_nm - 1.0 / lp).abs();
        worst = worst.max(e);
        if !(766.0..=846.0).contains(&pk.signal_nm) || !(766.0..=866.0).contains(&pk.idler_nm) || e > 1e-9 {
            bad.push(format!("{} at {:.3}/{:.3}", t.labels(), pk.signal_nm, pk.idler_nm));
        }
    }
    outcome(
        bad.is_empty() && !triplets.is_empty(),
        format!(
            "{} peaks, energy mismatch ≤ {worst:.1e} nm⁻¹{}",
            triplets.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; out of window: {}", bad.join(", "))
            }
        ),
    )
}

fn c4_coincidences(config: &str) -> Outcome {
    let model = Model::load(&common::config(config)).unwrap();
    let (labels, m) = match cli::coincidences(&model) {
        Ok(x) => x,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut worst = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                worst = worst.max(v / row[i]);
            }
        }
    }
    let max = m.iter().flatten().copied().fold(0.0, f64::max);
    outcome(
        worst < 0.05 && max == 1.0,
        format!(
            "peaks {}; largest off-diagonal / row diagonal = {worst:.2e}",
            labels.join("")
        ),
    )
}

fn c5_schmidt() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lambda1_min = 1.0f64;
    for _ in 0..50 {
        let (r, c) = (rng.gen_range(4..48), rng.gen_range(4..48));
        let a = common::random_vector(&mut rng, r);
        let b = common::random_vector(&mut rng, c);
        let d = quantum::schmidt_matrix(r, c, &common::outer(&a, &b)).unwrap();
        lambda1_min = lambda1_min.min(d.coefficients[0]);
    }
    let (mut sum_err, mut recon, mut k_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let (r, c) = (rng.gen_range(2..40), rng.gen_range(2..40));
        let amp = common::random_vector(&mut rng, r * c);
        let d = quantum::schmidt_matrix(r, c, &amp).unwrap();
        sum_err = sum_err.max((d.coefficients.iter().map(|l| l * l).sum::<f64>() - 1.0).abs());
        recon = recon.max(d.reconstruction_error);
        k_err = k_err.max((d.schmidt_number() - common::density_matrix_schmidt_number(r, c, &amp)).abs());
    }
    outcome(
        lambda1_min > 1.0 - 1e-10 && sum_err < 1e-9 && recon < 1e-8 && k_err < 1e-6,
        format!(
            "separable min λ₁ = 1 − {:.1e}; |Σλ² − 1| ≤ {sum_err:.1e}; reconstruction ≤ {recon:.1e}; |K − K_oracle| ≤ {k_err:.1e}",
            1.0 - lambda1_min
        ),
    )
}

fn c6_bell(config: &str) -> Outcome {
    let model = Model::load(&common::config(config)).unwrap();
    let l = |m, n| ModeLabel::new(m, n);
    let wanted = [
        ("B", BellKind::PsiPlus, [(l(0, 0), l(0, 1)), (l(0, 1), l(0, 0))]),
        ("E", BellKind::PhiPlus, [(l(0, 2), l(0, 2)), (l(1, 0), l(1, 0))]),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (peak, kind, basis) in wanted {
        let cluster = match model.cluster(peak) {
            Ok(c) if !c.higher_order => c,
            Ok(c) => {
                notes.push(format!("{peak}: is higher order ({})", common::describe(&c)));
                pass = false;
                continue;
            }
            Err(e) => {
                notes.push(format!("{peak}: {e}"));
                pass = false;
                continue;
            }
        };
        let (fs, fi) = model.filters_for(&cluster);
        let est = model
            .jsa(&cluster.members)
            .and_then(|j| quantum::apply_filters(&j, &fs, &fi))
            .and_then(|f| quantum::bell_state(&cluster, &f).map(|b| (b, f)));
        let (b, filtered) = match est {
            Ok(x) => x,
            Err(e) => {
                notes.push(format!("{peak}: {e}"));
                pass = false;
                continue;
            }
        };
        let mut got = b.state.basis.clone();
        got.sort();
        let ok = b.kind == kind && got == basis && (0.5..=1.0).contains(&b.fidelity);
        // identical process amplitudes by construction must give F = 1 exactly
        let twin = pdc::JointSpectralAmplitude::from_components(
            filtered.grid,
            filtered.processes.clone(),
            vec![filtered.components[0].clone(); 2],
        )
        .and_then(|j| quantum::bell_state(&cluster, &j));
        let twin_ok = matches!(&twin, Ok(t) if t.fidelity == 1.0);
        pass &= ok && twin_ok;
        let basis_str: Vec<String> = got.iter().map(|(s, i)| format!("{s}{i}")).collect();
        notes.push(format!(
            "{peak}: {:?} over {{{}}}, F = {:.4}, identical-amplitude F = {}",
            b.kind,
            basis_str.join(", "),
            b.fidelity,
            twin.map(|t| t.fidelity.to_string()).unwrap_or_else(|e| e.to_string())
        ));
    }
    outcome(pass, notes.join("; "))
}

fn c7_fit() -> Outcome {
    let truth = Parameters {
        period_um: 8.92,
        width_um: 4.1,
        depth_um: 9.3,
        delta_n: 0.008,
    };
    let seed = Parameters {
        period_um: 8.72,
        width_um: 5.0,
        depth_um: 10.0,
        delta_n: 0.01,
    };
    let model = common::fitted();
    let template = WaveguideSpec {
        orientation: Orientation::WidthHorizontal,
        ..model.waveguide.spec().clone()
    };
    let placeholder = vec![
        MeasuredPeak {
            arm: Arm::Signal,
            wavelength_nm: 800.0,
            weight: 1.0,
        };
        2
    ];
    let mut problem = FitProblem::new(
        placeholder,
        template,
        Arc::new(SellmeierModel::bundled_ktp()),
        model.config.pump.clone(),
    )
    .unwrap();
    problem.measured = fit::synthetic_peaks(&problem, &truth).unwrap();
    let r = match fit::fit_two_stage(&problem, &seed, &FitOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let p = r.parameters;
    let err = [
        (p.period_um - truth.period_um).abs(),
        (p.width_um - truth.width_um).abs(),
        (p.depth_um - truth.depth_um).abs(),
        (p.delta_n - truth.delta_n).abs(),
    ];
    let pass = err[0] < 0.005 && err[1] < 0.2 && err[2] < 0.2 && err[3] < 0.001 && r.evaluations < 500;
    outcome(
        pass,
        format!(
            "{} peaks; Λ {:.5} (±{:.1e}), w {:.4} (±{:.1e}), d {:.4} (±{:.1e}), Δn {:.6} (±{:.1e}); {} evaluations",
            problem.measured.len(),
            p.period_um,
            err[0],
            p.width_um,
            err[1],
            p.depth_um,
            err[2],
            p.delta_n,
            err[3],
            r.evaluations
        ),
    )
}

fn c8_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst, mut count_mismatch, mut total) = (0.0f64, 0, 0);
    for _ in 0..100 {
        let n_sub = rng.gen_range(1.45..2.2);
        let nc = n_sub + rng.gen_range(1e-3..0.05);
        let n_top = if rng.gen_bool(0.5) { 1.0 } else { n_sub };
        let t = rng.gen_range(1.0..15.0);
        let lambda = rng.gen_range(400.0..1600.0);
        let got = solve_slab(n_sub, nc, n_top, t, lambda);
        let want = common::slab_oracle(n_sub, nc, n_top, t, lambda, 200_000);
        if got.len() != want.len() {
            count_mismatch += 1;
            continue;
        }
        total += got.len();
        for (m, (g, w)) in got.iter().zip(&want).enumerate() {
            worst = worst.max((g - w).abs());
            match slab_branch(n_sub, nc, n_top, t, lambda, m as u32) {
                Some(b) => worst = worst.max((b - w).abs()),
                None => count_mismatch += 1,
            }
        }
    }
    outcome(
        worst < 1e-10 && count_mismatch == 0,
        format!("100 slabs, {total} roots, max |Δn_eff| = {worst:.1e}, {count_mismatch} missed/spurious"),
    )
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        let inv = Invocation {
            out: Some(dir.to_path_buf()),
            ..Invocation::new(Command::All, common::config("fitted.json"))
        };
        cli::execute(&inv)
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    if let Err(e) = run(&a).and_then(|_| run(&b)) {
        return outcome(false, e.to_string());
    }
    let listing = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
        v.sort();
        v
    };
    let names = listing(&a);
    let differing: Vec<String> = names
        .iter()
        .filter(|n| std::fs::read(a.join(n)).ok() != std::fs::read(b.join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    outcome(
        differing.is_empty() && names == listing(&b),
        format!("{} files per run, {} differ", names.len(), differing.len()),
    )
}
