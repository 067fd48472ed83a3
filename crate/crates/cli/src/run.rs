//! Run orchestration for the four subcommands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use torus_ns::certificates::{g_bound_fit, h_bound_constant, CertificateRecord};
use torus_ns::induction::{advance_unit_interval, DecompositionState};
use torus_ns::reference::picard_solve;
use torus_ns::{fmc_norm, phi_norm, Lattice, SpectralField};

use crate::checkpoint;
use crate::config::{Emit, RunConfig};
use crate::error::{CliError, Result};
use crate::ic::generate_ic;
use crate::report::{float, opt_float, Table, CERTIFICATE_COLUMNS, NORM_SERIES_COLUMNS};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FIXED_POINT_FAILURE: i32 = 2;
pub const EXIT_ORACLE_MISMATCH: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Success,
    /// `stage` is "step <m>" for the induction step ending at time m, or "oracle".
    FixedPointFailure {
        stage: String,
        iterations: usize,
        last_ratio: Option<f64>,
    },
    OracleMismatch {
        max_diff: f64,
        tol: f64,
    },
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Success => EXIT_SUCCESS,
            RunStatus::FixedPointFailure { .. } => EXIT_FIXED_POINT_FAILURE,
            RunStatus::OracleMismatch { .. } => EXIT_ORACLE_MISMATCH,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RunStatus::Success => "success".into(),
            RunStatus::FixedPointFailure { stage, iterations, last_ratio } => format!(
                "fixed-point failure at {stage} after {iterations} iterations, last contraction ratio {}",
                last_ratio.map_or("n/a".into(), |r| format!("{r:e}"))
            ),
            RunStatus::OracleMismatch { max_diff, tol } => {
                format!("oracle mismatch: max difference {max_diff:e} exceeds {tol:e}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub m: u64,
    pub t: f64,
    pub phi_norm: f64,
    pub fmc_norm_g: f64,
    pub fp_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub record: CertificateRecord,
    pub ratios: Vec<f64>,
    /// Running maxima over j ≤ m of the fitted h and g constants.
    pub d_h_max: f64,
    pub d_g_max: f64,
}

impl StepSummary {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub iterations: usize,
    /// Mode-wise max difference at each integer time 0..=horizon.
    pub per_time: Vec<(u64, f64)>,
    pub max_diff: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: RunStatus,
    pub norm_series: Vec<NormRow>,
    pub steps: Vec<StepSummary>,
    pub oracle: Option<OracleCheck>,
    /// Velocity at every completed integer time, starting with the initial condition.
    pub velocities: Vec<SpectralField>,
    pub state: DecompositionState,
}

fn failure(stage: String, err: torus_ns::Error) -> Result<RunStatus> {
    match err {
        torus_ns::Error::NonConvergence { iterations, last_ratio, .. } => {
            Ok(RunStatus::FixedPointFailure { stage, iterations, last_ratio })
        }
        other => Err(other.into()),
    }
}

/// Runs `horizon` induction steps from `v0` without touching the filesystem.
/// The Picard cross-check runs when `oracle` is set.
pub fn simulate(cfg: &RunConfig, v0: SpectralField, horizon: u64, oracle: bool) -> Result<RunReport> {
    let params = &cfg.params;
    let mut state = DecompositionState::new(v0.clone());
    let mut norm_series =
        vec![NormRow { m: 0, t: 0.0, phi_norm: phi_norm(&v0, params.alpha), fmc_norm_g: 0.0, fp_iterations: 0 }];
    let mut steps: Vec<StepSummary> = Vec::new();
    let mut velocities = vec![v0.clone()];
    let mut status = RunStatus::Success;

    for _ in 0..horizon {
        let m = state.m();
        let out = match advance_unit_interval(&state, params) {
            Ok(out) => out,
            Err(e) => {
                status = failure(format!("step {}", m + 1), e)?;
                break;
            }
        };
        let interval = &out.interval;
        let grid = *interval.grid();
        for i in 1..grid.len() {
            norm_series.push(NormRow {
                m,
                t: m as f64 + grid.time(i),
                phi_norm: phi_norm(&interval.velocity(i), params.alpha),
                fmc_norm_g: fmc_norm(interval.g().slice(i), m + 1, params.decay_c, params.beta),
                fp_iterations: interval.fixed_point.iterations,
            });
        }
        let prev = steps.last();
        steps.push(StepSummary {
            d_h_max: prev.map_or(0.0, |p| p.d_h_max).max(out.record.d_h),
            d_g_max: prev.map_or(0.0, |p| p.d_g_max).max(out.record.d_g),
            ratios: interval.fixed_point.ratios.clone(),
            record: out.record,
        });
        state = out.state;
        velocities.push(state.velocity(params));
    }

    let mut oracle_check = None;
    if oracle && status == RunStatus::Success {
        match picard_solve(&v0, horizon as f64, params) {
            Ok(traj) => {
                let per_time: Vec<(u64, f64)> = velocities
                    .iter()
                    .enumerate()
                    .map(|(m, v)| Ok((m as u64, traj.at(m as f64)?.max_abs_diff(v)?)))
                    .collect::<torus_ns::Result<_>>()?;
                let max_diff = per_time.iter().map(|p| p.1).fold(0.0, f64::max);
                if !(max_diff <= cfg.oracle_tol) {
                    status = RunStatus::OracleMismatch { max_diff, tol: cfg.oracle_tol };
                }
                oracle_check = Some(OracleCheck { iterations: traj.iterations_used, per_time, max_diff });
            }
            Err(e) => status = failure("oracle".into(), e)?,
        }
    }

    Ok(RunReport { status, norm_series, steps, oracle: oracle_check, velocities, state })
}

pub fn norm_series_table(report: &RunReport) -> Table {
    let mut t = Table::new("norm_series", NORM_SERIES_COLUMNS);
    for r in &report.norm_series {
        t.push(vec![r.m.to_string(), float(r.t), float(r.phi_norm), float(r.fmc_norm_g), r.fp_iterations.to_string()]);
    }
    t
}

pub fn certificates_table(report: &RunReport, delta: f64) -> Table {
    let mut t = Table::new("certificates", CERTIFICATE_COLUMNS);
    for s in &report.steps {
        let r = &s.record;
        t.push(vec![
            r.m.to_string(),
            float(r.d_h),
            float(s.d_h_max),
            float(r.d_g),
            float(s.d_g_max),
            opt_float(r.d_g_rate),
            float(r.d_h1),
            float(r.d_h1 / delta),
            float(r.c1),
            float(r.c1 / (delta * delta)),
            opt_float(r.c2),
            opt_float(r.c2.map(|c| c / delta)),
            opt_float(r.c3),
            opt_float(s.max_ratio()),
            r.contracting.to_string(),
            r.fp_iterations.to_string(),
            float(r.phi_envelope),
        ]);
    }
    t
}

fn oracle_table(check: &OracleCheck) -> Table {
    let mut t = Table::new("oracle_check", &["m", "max_abs_diff"]);
    for (m, d) in &check.per_time {
        t.push(vec![m.to_string(), float(*d)]);
    }
    t
}

fn prepare_output(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let path = dir.join("config.resolved.txt");
    std::fs::write(&path, cfg.serialize()).map_err(CliError::io(path))?;
    Ok(dir)
}

fn write_fields(dir: &Path, report: &RunReport) -> Result<()> {
    let fields = dir.join("fields");
    std::fs::create_dir_all(&fields).map_err(CliError::io(&fields))?;
    for (m, v) in report.velocities.iter().enumerate() {
        checkpoint::save(&fields.join(format!("v_{m:04}.ckpt")), v)?;
    }
    let st = &report.state;
    for (i, (h, g)) in st.h1_history().iter().zip(st.g_history()).enumerate() {
        checkpoint::save(&fields.join(format!("h_{:04}.ckpt", i + 1)), h)?;
        checkpoint::save(&fields.join(format!("g_{:04}.ckpt", i + 1)), g)?;
    }
    Ok(())
}

fn build_lattice(cfg: &RunConfig) -> Result<Arc<Lattice>> {
    Ok(Lattice::new(cfg.lattice)?)
}

/// `run`: induction over `horizon_m` steps, optional oracle, artifacts on disk.
/// Outputs of completed steps are written even when a later step fails.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let lattice = build_lattice(cfg)?;
    let v0 = generate_ic(cfg, &lattice)?;
    let dir = prepare_output(cfg)?;
    let oracle = cfg.oracle_horizon > 0 && cfg.horizon_m <= cfg.oracle_horizon;
    let report = simulate(cfg, v0, cfg.horizon_m, oracle)?;
    if cfg.emit.contains(&Emit::NormSeries) {
        norm_series_table(&report).write(&dir)?;
    }
    if cfg.emit.contains(&Emit::Certificates) {
        certificates_table(&report, cfg.params.delta).write(&dir)?;
    }
    if cfg.emit.contains(&Emit::Fields) {
        write_fields(&dir, &report)?;
    }
    if let Some(check) = &report.oracle {
        oracle_table(check).write(&dir)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub status: RunStatus,
    pub iterations: usize,
    pub update_norms: Vec<f64>,
}

/// `oracle`: Picard iteration alone over `horizon_m`, writing the Φ(α) series.
pub fn oracle_only(cfg: &RunConfig) -> Result<OracleRun> {
    cfg.validate()?;
    let lattice = build_lattice(cfg)?;
    let v0 = generate_ic(cfg, &lattice)?;
    let dir = prepare_output(cfg)?;
    match picard_solve(&v0, cfg.horizon_m as f64, &cfg.params) {
        Ok(traj) => {
            let mut t = Table::new("oracle_series", &["t", "phi_norm"]);
            for (i, f) in traj.slices.slices().iter().enumerate() {
                t.push(vec![float(traj.grid().time(i)), float(phi_norm(f, cfg.params.alpha))]);
            }
            t.write(&dir)?;
            Ok(OracleRun {
                status: RunStatus::Success,
                iterations: traj.iterations_used,
                update_norms: traj.update_norms,
            })
        }
        Err(e) => {
            let status = failure("oracle".into(), e)?;
            let iterations = match &status {
                RunStatus::FixedPointFailure { iterations, .. } => *iterations,
                _ => 0,
            };
            Ok(OracleRun { status, iterations, update_norms: Vec::new() })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectProbe {
    pub delta: f64,
    pub converged: bool,
    pub max_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectResult {
    /// Largest probed δ that converged, and smallest that did not.
    pub lower: f64,
    pub upper: Option<f64>,
    pub probes: Vec<BisectProbe>,
}

fn probe(cfg: &RunConfig, lattice: &Arc<Lattice>, delta: f64) -> Result<BisectProbe> {
    let mut c = cfg.clone();
    c.params.delta = delta;
    let v0 = generate_ic(&c, lattice)?;
    let report = simulate(&c, v0, cfg.bisect_horizon, false)?;
    let max_ratio = report.steps.iter().filter_map(StepSummary::max_ratio).reduce(f64::max);
    let converged = report.status == RunStatus::Success && max_ratio.is_none_or(|r| r < 1.0);
    Ok(BisectProbe { delta, converged, max_ratio })
}

/// `bisect-delta`: bisection on δ ∈ (0, bisect_max_delta] for the empirical
/// contraction threshold. A probe succeeds when every fixed-point solve over
/// `bisect_horizon` steps converges with all measured ratios below 1.
pub fn bisect_delta(cfg: &RunConfig) -> Result<BisectResult> {
    cfg.validate()?;
    let lattice = build_lattice(cfg)?;
    let dir = prepare_output(cfg)?;
    let mut probes = Vec::new();
    let top = probe(cfg, &lattice, cfg.bisect_max_delta)?;
    probes.push(top.clone());
    let (mut lo, mut hi) = (0.0, cfg.bisect_max_delta);
    let upper = if top.converged {
        lo = hi;
        None
    } else {
        for _ in 0..cfg.bisect_steps {
            let mid = 0.5 * (lo + hi);
            let p = probe(cfg, &lattice, mid)?;
            if p.converged {
                lo = mid;
            } else {
                hi = mid;
            }
            probes.push(p);
        }
        Some(hi)
    };
    let mut t = Table::new("bisect", &["probe", "delta", "converged", "max_ratio"]);
    for (i, p) in probes.iter().enumerate() {
        t.push(vec![i.to_string(), float(p.delta), p.converged.to_string(), opt_float(p.max_ratio)]);
    }
    t.write(&dir)?;
    Ok(BisectResult { lower: lo, upper, probes })
}

fn numbered(dir: &Path, prefix: &str) -> Result<Vec<(u64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(CliError::io(dir))? {
        let path = entry.map_err(CliError::io(dir))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(j) = name.strip_prefix(prefix).and_then(|r| r.strip_suffix(".ckpt")).and_then(|n| n.parse().ok()) {
            out.push((j, path));
        }
    }
    out.sort();
    Ok(out)
}

/// `check`: refits the h and g bounds from saved `h_*.ckpt` / `g_*.ckpt`
/// history checkpoints, writing `certificates_check.csv`.
pub fn check(cfg: &RunConfig, fields_dir: &Path) -> Result<Table> {
    cfg.validate()?;
    let params = &cfg.params;
    let h = numbered(fields_dir, "h_")?;
    let g = numbered(fields_dir, "g_")?;
    if h.is_empty() || h.iter().map(|p| p.0).ne(g.iter().map(|p| p.0)) {
        return Err(CliError::Checkpoint(format!(
            "{}: expected matching h_NNNN.ckpt and g_NNNN.ckpt files",
            fields_dir.display()
        )));
    }
    let mut t = Table::new("certificates_check", &["j", "d_h", "d_h_max", "d_g", "d_g_max", "d_g_rate"]);
    let (mut h_max, mut g_max) = (0.0f64, 0.0f64);
    for ((j, hp), (_, gp)) in h.iter().zip(&g) {
        let hj = checkpoint::load_any(hp)?;
        let gj = checkpoint::load_any(gp)?;
        let d_h = h_bound_constant(&hj, *j, params);
        let fit = g_bound_fit(&gj, *j, params);
        h_max = h_max.max(d_h);
        g_max = g_max.max(fit.constant);
        t.push(vec![
            j.to_string(),
            float(d_h),
            float(h_max),
            float(fit.constant),
            float(g_max),
            opt_float(fit.decay.map(|d| d.rate)),
        ]);
    }
    let dir = prepare_output(cfg)?;
    t.write(&dir)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::IcKind;
    use torus_ns::LatticeSpec;

    fn small(kind: IcKind) -> RunConfig {
        RunConfig { ic_kind: kind, lattice: LatticeSpec::ball(2), ..RunConfig::default() }
    }

    #[test]
    fn zero_ic_gives_zero_series() {
        let cfg = small(IcKind::SingleMode);
        let lat = Lattice::new(cfg.lattice).unwrap();
        let report = simulate(&cfg, SpectralField::zeros(&lat), 4, true).unwrap();
        assert_eq!(report.status, RunStatus::Success);
        assert!(report.norm_series.iter().all(|r| r.phi_norm == 0.0 && r.fmc_norm_g == 0.0));
        assert_eq!(report.norm_series.len(), 1 + 4 * cfg.params.substeps);
        assert_eq!(report.oracle.unwrap().max_diff, 0.0);
    }

    #[test]
    fn single_mode_series_is_heat_decay() {
        let cfg = small(IcKind::SingleMode);
        let lat = Lattice::new(cfg.lattice).unwrap();
        let v0 = generate_ic(&cfg, &lat).unwrap();
        let report = simulate(&cfg, v0, 10, false).unwrap();
        for r in &report.norm_series {
            let want = 1e-3 * (-r.t).exp();
            assert!((r.phi_norm - want).abs() <= 1e-12 * want, "t = {}", r.t);
        }
        assert_eq!(report.steps.len(), 10);
    }

    #[test]
    fn running_maxima_never_decrease() {
        let cfg = small(IcKind::TwoMode);
        let lat = Lattice::new(cfg.lattice).unwrap();
        let report = simulate(&cfg, generate_ic(&cfg, &lat).unwrap(), 4, false).unwrap();
        for w in report.steps.windows(2) {
            assert!(w[1].d_h_max >= w[0].d_h_max && w[1].d_g_max >= w[0].d_g_max);
        }
        let t = certificates_table(&report, cfg.params.delta);
        assert_eq!(t.rows.len(), 4);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            RunStatus::Success.exit_code(),
            RunStatus::FixedPointFailure { stage: "step 1".into(), iterations: 3, last_ratio: None }.exit_code(),
            RunStatus::OracleMismatch { max_diff: 1.0, tol: 0.0 }.exit_code(),
        ];
        assert_eq!(codes, [0, 2, 3]);
    }
}
