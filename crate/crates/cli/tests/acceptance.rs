//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary so the report is always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_ns::induction::{advance_unit_interval, DecompositionState};
use torus_ns::operators::{duhamel_all, duhamel_integrate, identity_split, leray_project, TimeGrid, TimeSlicedField};
use torus_ns::{CVec3, Lattice, LatticeSpec, SpectralField, WaveVector};
use torus_ns_cli::config::{IcKind, RunConfig};
use torus_ns_cli::ic::generate_ic;
use torus_ns_cli::run::{simulate, RunReport, RunStatus, EXIT_FIXED_POINT_FAILURE};

const SAMPLES: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_site(rng: &mut ChaCha8Rng, radius: i32, allow_zero: bool) -> WaveVector {
    loop {
        let k = WaveVector::new(
            rng.random_range(-radius..=radius),
            rng.random_range(-radius..=radius),
            rng.random_range(-radius..=radius),
        );
        if k.norm_sq() <= (radius as i64).pow(2) && (allow_zero || !k.is_zero()) {
            return k;
        }
    }
}

fn random_cvec(rng: &mut ChaCha8Rng) -> CVec3 {
    let c = &mut || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    CVec3::new(c(), c(), c())
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn algebraic_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let (a1, a2) = (rng.random_range(0.0..=10.0), rng.random_range(0.0..=10.0));
        let k = random_site(&mut rng, 8, true);
        let l = random_site(&mut rng, 8, true);
        let s = identity_split(a1, a2, &k, &l).expect("a1 + a2 > 0 almost surely");
        let lhs = a1 * k.sub(&l).norm_sq() as f64 + a2 * l.norm_sq() as f64;
        let rhs = s.coeff_k * k.norm_sq() as f64 + s.residual;
        worst = worst.max((lhs - rhs).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && within(elapsed, Duration::from_secs(1)),
        format!("max |lhs - rhs| = {worst:.3e} (tol 1e-12) over {SAMPLES} samples, {elapsed:.2?}"),
    )
}

fn projector_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut idem, mut orth, mut annih, mut lin) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..SAMPLES {
        let k = random_site(&mut rng, 8, false);
        let x = random_cvec(&mut rng);
        let y = random_cvec(&mut rng);
        let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let p = leray_project(&k, &x).unwrap();
        idem = idem.max(leray_project(&k, &p).unwrap().max_abs_diff(&p));
        orth = orth.max(p.dot_real(&k.components()).norm());
        let [kx, ky, kz] = k.components();
        annih = annih.max(leray_project(&k, &CVec3::real(kx, ky, kz)).unwrap().norm());
        let combo = leray_project(&k, &(x.scale_c(a) + y)).unwrap();
        lin = lin.max(combo.max_abs_diff(&(p.scale_c(a) + leray_project(&k, &y).unwrap())));
    }
    let elapsed = start.elapsed();
    let worst = idem.max(orth).max(annih).max(lin);
    outcome(
        worst <= 1e-14 && within(elapsed, Duration::from_secs(1)),
        format!(
            "idempotence {idem:.1e}, orthogonality {orth:.1e}, annihilation {annih:.1e}, linearity {lin:.1e} (tol 1e-14), {elapsed:.2?}"
        ),
    )
}

fn config(kind: IcKind, k_max: u32, delta: f64) -> RunConfig {
    let mut cfg = RunConfig { ic_kind: kind, lattice: LatticeSpec::ball(k_max), ..RunConfig::default() };
    cfg.params.delta = delta;
    cfg
}

fn single_mode_exactness() -> Outcome {
    let start = Instant::now();
    let cfg = config(IcKind::SingleMode, 2, 1e-3);
    let lat = Lattice::new(cfg.lattice).unwrap();
    let v0 = generate_ic(&cfg, &lat).unwrap();
    let k0 = WaveVector::new(1, 0, 0);
    let mut state = DecompositionState::new(v0.clone());
    let mut worst = 0.0f64;
    let check = |state: &DecompositionState| {
        let m = state.m() as f64;
        let v = state.velocity(&cfg.params);
        let want = v0.get(&k0).scale((-m * k0.norm_sq() as f64).exp());
        let rel = v.get(&k0).max_abs_diff(&want) / want.norm();
        let off_support = v.support().all(|(k, _)| *k == k0);
        if off_support {
            rel
        } else {
            f64::INFINITY
        }
    };
    for _ in 0..10 {
        state = advance_unit_interval(&state, &cfg.params).unwrap().state;
        worst = worst.max(check(&state));
    }
    let zero_hist = state.h1_history().iter().chain(state.g_history()).all(SpectralField::is_zero);
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && zero_hist && within(elapsed, Duration::from_secs(5)),
        format!("max relative error {worst:.2e} (tol 1e-12), h and g identically zero: {zero_hist}, {elapsed:.2?}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut cfg = config(IcKind::TwoMode, 4, 1e-3);
    cfg.params.substeps = 8;
    let lat = Lattice::new(cfg.lattice).unwrap();
    let v0 = generate_ic(&cfg, &lat).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let report = pool.install(|| simulate(&cfg, v0, 3, true)).unwrap();
    let elapsed = start.elapsed();
    let Some(check) = report.oracle else {
        return outcome(false, format!("oracle did not run: {}", report.status.describe()));
    };
    outcome(
        check.max_diff <= 1e-9 && report.status == RunStatus::Success && within(elapsed, Duration::from_secs(120)),
        format!(
            "{} sites, max mode-wise difference at t = 0..3: {:.2e} (tol 1e-9), {} Picard iterations, one thread, {elapsed:.2?}",
            lat.len(),
            check.max_diff,
            check.iterations
        ),
    )
}

struct LongRun {
    label: &'static str,
    report: RunReport,
    elapsed: Duration,
}

fn long_runs() -> Vec<LongRun> {
    [(IcKind::RandomPhiBall, "random_phi_ball seed 0"), (IcKind::TwoMode, "two_mode")]
        .into_iter()
        .map(|(kind, label)| {
            let start = Instant::now();
            let cfg = config(kind, 4, 1e-3);
            let lat = Lattice::new(cfg.lattice).unwrap();
            let report = simulate(&cfg, generate_ic(&cfg, &lat).unwrap(), 20, false).unwrap();
            LongRun { label, report, elapsed: start.elapsed() }
        })
        .collect()
}

fn contraction_regime(runs: &[LongRun]) -> Outcome {
    let delta = 1e-3;
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let steps = &run.report.steps;
        let complete = run.report.status == RunStatus::Success && steps.len() == 20;
        let max_iter = steps.iter().map(|s| s.record.fp_iterations).max().unwrap_or(0);
        let max_ratio = steps.iter().filter_map(|s| s.max_ratio()).fold(0.0, f64::max);
        let c1 = |s: &torus_ns_cli::run::StepSummary| s.record.c1 / (delta * delta);
        let c2 = |s: &torus_ns_cli::run::StepSummary| s.record.c2.map(|c| c / delta);
        let (c1_first, c2_first) = (c1(&steps[0]), c2(&steps[0]).unwrap_or(0.0));
        let c1_growth = steps.iter().map(|s| c1(s) / c1_first).fold(0.0, f64::max);
        let c2_growth = steps.iter().filter_map(c2).map(|c| c / c2_first).fold(0.0, f64::max);
        let c1_drop = steps.iter().map(|s| c1(s) / c1_first).fold(f64::INFINITY, f64::min);
        let ok = complete
            && max_iter <= 8
            && max_ratio < 0.5
            && c1_first > 0.0
            && c2_first > 0.0
            && c1_growth <= 4.0
            && c2_growth <= 4.0
            && run.elapsed < Duration::from_secs(600);
        pass &= ok;
        parts.push(format!(
            "{}: max iterations {max_iter} (<= 8), max ratio {max_ratio:.2e} (< 0.5), \
             c1/d^2 at m=1 {c1_first:.3e} grows at most x{c1_growth:.2} (<= 4, falls to x{c1_drop:.1e}), \
             c2/d at m=1 {c2_first:.3e} grows at most x{c2_growth:.2} (<= 4), {:.2?}",
            run.label, run.elapsed
        ));
    }
    outcome(pass, parts.join("; "))
}

fn bound_stability(runs: &[LongRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let window: Vec<_> = run.report.steps.iter().filter(|s| (5..=20).contains(&s.record.m)).collect();
        let spread = |f: &dyn Fn(&torus_ns_cli::run::StepSummary) -> f64| {
            let vals: Vec<f64> = window.iter().map(|s| f(s)).collect();
            let hi = vals.iter().copied().fold(0.0, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            (hi, hi / lo)
        };
        let (dh, dh_spread) = spread(&|s| s.d_h_max);
        let (dg, dg_spread) = spread(&|s| s.d_g_max);
        let rates: Vec<Option<f64>> = run.report.steps.iter().map(|s| s.record.d_g_rate).collect();
        let all_positive = rates.iter().all(|r| r.is_some_and(|d| d > 0.0));
        let min_rate = rates.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let ok = window.len() == 16
            && dh.is_finite()
            && dg.is_finite()
            && dh_spread < 2.0
            && dg_spread < 2.0
            && all_positive;
        pass &= ok;
        parts.push(format!(
            "{}: max_j D_h {dh:.3e} varies x{dh_spread:.3}, max_j D_g {dg:.3e} varies x{dg_spread:.3} over m in [5,20] (< 2), \
             fitted decay rate positive at every j: {all_positive} (min {min_rate:.3})",
            run.label
        ));
    }
    outcome(pass, parts.join("; "))
}

fn phi_envelope(runs: &[LongRun]) -> Outcome {
    let delta = 1e-3;
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let sup = run.report.norm_series.iter().map(|r| r.phi_norm).fold(0.0, f64::max);
        let ok = sup <= 2.0 * delta && run.report.norm_series.len() == 1 + 20 * 8;
        pass &= ok;
        parts.push(format!("{}: sup_t Phi = {sup:.6e} (<= 2 delta = {:.1e})", run.label, 2.0 * delta));
    }
    outcome(pass, parts.join("; "))
}

/// Duhamel integral at t = 1 of f(s) = a + b·s for one mode, against the closed form.
fn quadrature_error(substeps: usize, a: f64, b: f64) -> f64 {
    let lat = Lattice::new(LatticeSpec::ball(1)).unwrap();
    let k = WaveVector::new(1, 0, 0);
    let grid = TimeGrid::unit(substeps);
    let source = TimeSlicedField::from_fn(grid, |i| {
        let s = grid.time(i);
        SpectralField::from_entries(&lat, [(k, CVec3::real(0.0, a + b * s, 0.0))]).unwrap()
    })
    .unwrap();
    let kappa = k.norm_sq() as f64;
    let decay = (-kappa).exp();
    // ∫₀¹ e^{−(1−s)κ}(a + b s) ds
    let exact = a * (1.0 - decay) / kappa + b * (1.0 / kappa - (1.0 - decay) / (kappa * kappa));
    let all = duhamel_all(&source).last().get(&k).0[1].re;
    let direct = duhamel_integrate(&source, 1.0).unwrap().get(&k).0[1].re;
    (all - exact).abs().max((direct - exact).abs())
}

fn quadrature_order() -> Outcome {
    let (e8, e16) = (quadrature_error(8, 0.3, 1.7), quadrature_error(16, 0.3, 1.7));
    let ratio = e8 / e16;
    let constant = [4usize, 8, 16, 32].iter().map(|&s| quadrature_error(s, 2.5, 0.0)).fold(0.0, f64::max);
    outcome(
        (3.5..=4.5).contains(&ratio) && constant <= 1e-14,
        format!(
            "s-linear source: error S=8 {e8:.3e}, S=16 {e16:.3e}, ratio {ratio:.3} (in [3.5, 4.5]); \
             s-constant source error {constant:.1e} (tol 1e-14)"
        ),
    )
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_torus-ns")
}

fn cli_run(dir: &Path, extra: &[&str]) -> std::process::Output {
    Command::new(binary())
        .args(["run", "--output-dir"])
        .arg(dir)
        .args(extra)
        .env_remove("TORUS_NS_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["--rng-seed", "12345", "--horizon-m", "3", "--threads", "1", "--emit", "norm_series,certificates"];
    let (ra, rb) = (cli_run(&a, &args), cli_run(&b, &args));
    if !(ra.status.success() && rb.status.success()) {
        return outcome(false, format!("runs failed: {:?} / {:?}", ra.status, rb.status));
    }
    let mut compared = Vec::new();
    let mut same = true;
    for name in ["norm_series.csv", "certificates.csv", "oracle_check.csv"] {
        let (x, y) = (std::fs::read(a.join(name)), std::fs::read(b.join(name)));
        match (x, y) {
            (Ok(x), Ok(y)) => {
                same &= x == y;
                compared.push(format!("{name} {} bytes", x.len()));
            }
            _ => same = false,
        }
    }
    outcome(same, format!("two runs, same seed: byte-identical {}", compared.join(", ")))
}

fn non_convergence() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let out = cli_run(tmp.path(), &["--delta", "1", "--k-max", "4", "--horizon-m", "3"]);
    let elapsed = start.elapsed();
    let stderr = String::from_utf8_lossy(&out.stderr);
    let code = out.status.code();

    let cfg = config(IcKind::RandomPhiBall, 4, 1.0);
    let lat = Lattice::new(cfg.lattice).unwrap();
    let report = simulate(&cfg, generate_ic(&cfg, &lat).unwrap(), 3, false).unwrap();
    let finite = report.velocities.iter().all(SpectralField::is_finite)
        && report.norm_series.iter().all(|r| r.phi_norm.is_finite());
    let failed = matches!(report.status, RunStatus::FixedPointFailure { .. });
    let line = stderr.lines().find(|l| l.contains("fixed-point failure")).unwrap_or("").trim().to_string();
    outcome(
        code == Some(EXIT_FIXED_POINT_FAILURE) && failed && finite && elapsed < Duration::from_secs(60),
        format!("exit status {code:?} (expected {EXIT_FIXED_POINT_FAILURE}), reported outputs finite: {finite}, \"{line}\", {elapsed:.2?}"),
    )
}

fn main() {
    let runs = long_runs();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "algebraic identity", algebraic_identity()),
        (2, "projector suite", projector_suite()),
        (3, "single-mode exactness", single_mode_exactness()),
        (4, "oracle equivalence", oracle_equivalence()),
        (5, "contraction regime", contraction_regime(&runs)),
        (6, "inductive bound stability", bound_stability(&runs)),
        (7, "phi envelope", phi_envelope(&runs)),
        (8, "quadrature order", quadrature_order()),
        (9, "determinism", determinism()),
        (10, "non-convergence detection", non_convergence()),
    ];
    let mut failures = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failures += usize::from(!o.pass);
        println!("{tag} [{n:>2}] {name}: {}", o.detail);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failures, results.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
