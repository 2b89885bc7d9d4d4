//! Panel computations and file emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use strata_chern::geometry::{continuum_chern, filtered_chern_from_qgt, inequality_scan};
use strata_chern::mesh::{build_mesh, plaquette_curvature};
use strata_chern::model::analytic_chern;
use strata_chern::multi::{
    basis_vector, embed_mesh, lattice_sector_response_multi, reconstruction_error,
};
use strata_chern::witness::{
    mass_grid, sector_responses, sweep_mass, tomography_scan, weight_alpha, SweepResult,
    TomographyPoint,
};
use strata_chern::{
    CurvatureField, InequalityReport, ModelParams, MultiState, SectorReport, TorusMesh,
};

use crate::config::{MeshSection, ModelSection, RunConfig};
use crate::error::{CliError, CliResult};

/// Points in the witness-phase scans of panels (f) and (g).
pub const THETA_POINTS: usize = 64;

pub const PANELS: [char; 8] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
    rows: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
            rows: 0,
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PanelOutput {
    pub panel: char,
    /// File name relative to the output directory.
    pub csv: String,
    pub rows: usize,
    /// SHA-256 of the file contents.
    pub checksum: String,
}

pub fn panel_file_name(panel: char) -> String {
    format!("panel_{panel}.csv")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_panel(dir: &Path, panel: char, csv: &Csv) -> CliResult<PanelOutput> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = panel_file_name(panel);
    write_text(&dir.join(&name), csv.text())?;
    Ok(PanelOutput {
        panel,
        csv: name,
        rows: csv.rows(),
        checksum: format!("{:x}", Sha256::digest(csv.text().as_bytes())),
    })
}

/// Mesh, curvature and witness phase at the configured model point.
pub struct Prepared {
    pub params: ModelParams,
    pub chern_analytic: i32,
    pub mesh: TorusMesh,
    pub curvature: CurvatureField,
    pub theta: f64,
    pub report: SectorReport,
}

pub fn prepare(cfg: &RunConfig) -> CliResult<Prepared> {
    let params = cfg.model.params();
    let chern_analytic = analytic_chern(&params)?;
    let mesh = build_mesh(&params, cfg.mesh.nx, cfg.mesh.ny)?;
    let curvature = plaquette_curvature(&mesh)?;
    let theta = cfg.witness.theta.spec().resolve(&mesh);
    let report = sector_responses(&mesh, &curvature, theta)?;
    Ok(Prepared {
        params,
        chern_analytic,
        mesh,
        curvature,
        theta,
        report,
    })
}

fn field_panel(prep: &Prepared, column: &str, value: impl Fn(usize) -> f64) -> Csv {
    let grid = prep.mesh.grid();
    let mut csv = Csv::new(&["m", "n", "kx", "ky", column]);
    for idx in 0..grid.len() {
        let (m, n) = grid.coords(idx);
        let k = prep.mesh.kpoints()[idx];
        csv.row(&[
            m.to_string(),
            n.to_string(),
            fmt_float(k[0]),
            fmt_float(k[1]),
            fmt_float(value(idx)),
        ]);
    }
    csv
}

/// Plaquette curvature.
pub fn panel_a(prep: &Prepared) -> Csv {
    field_panel(prep, "F", |i| prep.curvature.values()[i])
}

/// Negative-sector weight.
pub fn panel_b(prep: &Prepared) -> Csv {
    field_panel(prep, "alpha", |i| {
        weight_alpha(&prep.mesh.states()[i], prep.theta).0
    })
}

/// Graded density `<S> F / 2pi`.
pub fn panel_c(prep: &Prepared) -> Csv {
    let two_pi = 2.0 * std::f64::consts::PI;
    field_panel(prep, "S_F", |i| {
        weight_alpha(&prep.mesh.states()[i], prep.theta).1 * prep.curvature.values()[i] / two_pi
    })
}

pub fn run_sweep(cfg: &RunConfig) -> CliResult<SweepResult<f64>> {
    let masses = mass_grid(cfg.sweep.m_min, cfg.sweep.m_max, cfg.sweep.steps);
    Ok(sweep_mass(
        &cfg.model.params(),
        &masses,
        cfg.mesh.nx,
        cfg.mesh.ny,
        cfg.witness.theta.spec(),
    )?)
}

pub fn panel_d(sweep: &SweepResult<f64>) -> Csv {
    let mut csv = Csv::new(&["M", "mu", "nu_plus", "nu_minus", "nu_S"]);
    for p in &sweep.points {
        let r = &p.report;
        csv.row(&[
            fmt_float(p.mass),
            r.mu.to_string(),
            fmt_float(r.nu_plus),
            fmt_float(r.nu_minus),
            fmt_float(r.nu_s),
        ]);
    }
    csv
}

pub fn panel_e(sweep: &SweepResult<f64>) -> Csv {
    let mut csv = Csv::new(&["M", "r_mu", "r_nu"]);
    for p in &sweep.points {
        csv.row(&[
            fmt_float(p.mass),
            fmt_float(p.report.r_mu),
            fmt_float(p.report.r_nu),
        ]);
    }
    csv
}

pub fn run_tomography(prep: &Prepared) -> CliResult<Vec<TomographyPoint<f64>>> {
    Ok(tomography_scan(&prep.mesh, &prep.curvature, THETA_POINTS)?.1)
}

pub fn tomography_max_err(points: &[TomographyPoint<f64>]) -> f64 {
    points
        .iter()
        .map(|p| (p.nu_direct - p.nu_reconstructed).abs())
        .fold(0.0, f64::max)
}

pub fn panel_f(points: &[TomographyPoint<f64>]) -> Csv {
    let mut csv = Csv::new(&["theta", "nu_direct", "nu_reconstructed"]);
    for p in points {
        csv.row(&[
            fmt_float(p.theta),
            fmt_float(p.nu_direct),
            fmt_float(p.nu_reconstructed),
        ]);
    }
    csv
}

/// Basis-probe scans of the embedded model plus the tomography check.
pub struct MultiRun {
    pub states: Vec<MultiState>,
    /// `(i, j, theta, nu-)` rows.
    pub scan: Vec<(usize, usize, f64, f64)>,
    pub reconstruction_max_err: f64,
    /// Largest `|x^dagger J y|` gap between direct and reconstructed `J_F`
    /// over the configured probe pairs.
    pub probe_max_err: f64,
}

pub fn run_multi(cfg: &RunConfig, prep: &Prepared) -> CliResult<MultiRun> {
    let seed = cfg.qfi_scan.seed;
    let (ex, ey) = cfg.multi.embedding_vectors(seed);
    let states = embed_mesh(&prep.mesh, &ex, &ey)?;
    let (m, n) = (cfg.multi.m, cfg.multi.n);
    let mut scan = Vec::with_capacity(m * n * THETA_POINTS);
    let two_pi = 2.0 * std::f64::consts::PI;
    for i in 0..m {
        let e = basis_vector::<f64>(m, i);
        for j in 0..n {
            let f = basis_vector::<f64>(n, j);
            for t in 0..THETA_POINTS {
                let theta = -std::f64::consts::PI + two_pi * t as f64 / THETA_POINTS as f64;
                let nu = lattice_sector_response_multi(&states, &prep.curvature, &e, &f, theta)?;
                scan.push((i, j, theta, nu));
            }
        }
    }
    let (direct, rebuilt, reconstruction_max_err) = reconstruction_error(&states, &prep.curvature)?;
    let mut probe_max_err: f64 = 0.0;
    for (x, y) in cfg.multi.probe_vectors(seed) {
        probe_max_err = probe_max_err.max((direct.probe(&x, &y)? - rebuilt.probe(&x, &y)?).norm());
    }
    Ok(MultiRun {
        states,
        scan,
        reconstruction_max_err,
        probe_max_err,
    })
}

pub fn panel_g(run: &MultiRun) -> Csv {
    let mut csv = Csv::new(&["i", "j", "theta", "nu_minus"]);
    for &(i, j, theta, nu) in &run.scan {
        csv.row(&[
            i.to_string(),
            j.to_string(),
            fmt_float(theta),
            fmt_float(nu),
        ]);
    }
    csv
}

pub fn run_inequalities(cfg: &RunConfig, prep: &Prepared) -> CliResult<InequalityReport> {
    Ok(inequality_scan(
        &prep.params,
        prep.theta,
        cfg.mesh.nx.min(cfg.mesh.ny),
        cfg.qfi_scan.samples,
        cfg.qfi_scan.seed,
    )?)
}

pub fn panel_h(report: &InequalityReport) -> Csv {
    let mut csv = Csv::new(&["FQ", "FQS", "k_x", "k_y", "theta"]);
    for s in &report.scatter {
        csv.row(&[
            fmt_float(s.fq),
            fmt_float(s.fqs),
            fmt_float(s.k[0]),
            fmt_float(s.k[1]),
            fmt_float(s.theta),
        ]);
    }
    csv
}

/// Computes one panel without writing it.
pub fn compute_panel(cfg: &RunConfig, panel: char) -> CliResult<Csv> {
    let with_prep = |f: &dyn Fn(&Prepared) -> CliResult<Csv>| prepare(cfg).and_then(|p| f(&p));
    match panel {
        'a' => with_prep(&|p| Ok(panel_a(p))),
        'b' => with_prep(&|p| Ok(panel_b(p))),
        'c' => with_prep(&|p| Ok(panel_c(p))),
        'd' => Ok(panel_d(&run_sweep(cfg)?)),
        'e' => Ok(panel_e(&run_sweep(cfg)?)),
        'f' => with_prep(&|p| Ok(panel_f(&run_tomography(p)?))),
        'g' => with_prep(&|p| Ok(panel_g(&run_multi(cfg, p)?))),
        'h' => with_prep(&|p| Ok(panel_h(&run_inequalities(cfg, p)?))),
        other => Err(CliError::Validation {
            field: "panel".into(),
            message: format!("unknown panel {other:?}, expected a-h"),
        }),
    }
}

/// Computes one panel and writes it to the output directory.
pub fn run_panel(cfg: &RunConfig, panel: char) -> CliResult<PanelOutput> {
    let csv = compute_panel(cfg, panel).map_err(|e| CliError::Panel {
        panel,
        source: Box::new(e),
    })?;
    write_panel(&cfg.output_dir, panel, &csv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpSummary {
    pub wall_location: f64,
    pub delta_mu: i32,
    pub delta_nu_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalitySummary {
    pub name: String,
    pub worst_margin: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub version: String,
    pub seed: u64,
    pub mesh: MeshSection,
    pub model: ModelSection,
    pub theta: f64,
    pub chern_fhs: i32,
    pub chern_analytic: i32,
    pub residual_max: f64,
    pub tomography_max_err: f64,
    pub multi_reconstruction_max_err: f64,
    pub multi_probe_max_err: f64,
    pub continuum_chern: f64,
    pub filtered_chern_continuum: f64,
    pub nu_s: f64,
    pub inequality_violations: usize,
    pub inequalities: Vec<InequalitySummary>,
    pub global_nu_s_bound: [f64; 2],
    pub jump_records: Vec<JumpSummary>,
    pub total_delta_mu: i32,
    pub panels: Vec<PanelOutput>,
}

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Emits every panel plus `summary.json`. Fails after writing if any panel
/// failed or any inequality was violated.
pub fn run_all(cfg: &RunConfig) -> CliResult<Summary> {
    let prep = prepare(cfg)?;
    let dir = cfg.output_dir.as_path();
    let mut failures = Vec::new();
    let mut panels = Vec::new();
    let mut emit =
        |panel: char, csv: CliResult<Csv>| match csv.and_then(|c| write_panel(dir, panel, &c)) {
            Ok(out) => panels.push(out),
            Err(e) => failures.push(CliError::Panel {
                panel,
                source: Box::new(e),
            }),
        };

    emit('a', Ok(panel_a(&prep)));
    emit('b', Ok(panel_b(&prep)));
    emit('c', Ok(panel_c(&prep)));

    let sweep = run_sweep(cfg);
    let (residual_sweep, jump_records, total_delta_mu) = match &sweep {
        Ok(s) => (
            s.points
                .iter()
                .map(|p| p.report.max_residual())
                .fold(0.0, f64::max),
            s.jumps
                .iter()
                .map(|j| JumpSummary {
                    wall_location: j.wall_location,
                    delta_mu: j.delta_mu,
                    delta_nu_s: j.delta_nu_s,
                })
                .collect(),
            s.total_delta_mu(),
        ),
        Err(_) => (f64::NAN, Vec::new(), 0),
    };
    match sweep {
        Ok(s) => {
            emit('d', Ok(panel_d(&s)));
            emit('e', Ok(panel_e(&s)));
        }
        Err(e) => {
            emit('d', Err(e));
        }
    }

    let tomography = run_tomography(&prep);
    let tomography_err = tomography
        .as_ref()
        .map(|t| tomography_max_err(t))
        .unwrap_or(f64::NAN);
    emit('f', tomography.map(|t| panel_f(&t)));

    let multi = run_multi(cfg, &prep);
    let (recon_err, probe_err) = multi
        .as_ref()
        .map(|m| (m.reconstruction_max_err, m.probe_max_err))
        .unwrap_or((f64::NAN, f64::NAN));
    emit('g', multi.map(|m| panel_g(&m)));

    let ineq = run_inequalities(cfg, &prep);
    let (violations, inequalities, global) = match &ineq {
        Ok(r) => (
            r.violation_count(),
            r.stats
                .iter()
                .map(|s| InequalitySummary {
                    name: s.name.into(),
                    worst_margin: s.worst_margin,
                    violations: s.violations.len(),
                })
                .collect(),
            [r.global_lhs, r.global_rhs],
        ),
        Err(_) => (0, Vec::new(), [f64::NAN; 2]),
    };
    emit('h', ineq.map(|r| panel_h(&r)));

    let (nx, ny) = (cfg.mesh.nx, cfg.mesh.ny);
    let continuum = continuum_chern(&prep.params, nx, ny)?;
    let filtered = filtered_chern_from_qgt(&prep.params, prep.theta, nx, ny)?;

    let summary = Summary {
        version: version_string(),
        seed: cfg.qfi_scan.seed,
        mesh: cfg.mesh,
        model: cfg.model.clone(),
        theta: prep.theta,
        chern_fhs: prep.report.mu,
        chern_analytic: prep.chern_analytic,
        residual_max: residual_sweep.max(prep.report.max_residual()),
        tomography_max_err: tomography_err,
        multi_reconstruction_max_err: recon_err,
        multi_probe_max_err: probe_err,
        continuum_chern: continuum,
        filtered_chern_continuum: filtered,
        nu_s: prep.report.nu_s,
        inequality_violations: violations,
        inequalities,
        global_nu_s_bound: global,
        jump_records,
        total_delta_mu,
        panels,
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_text(&dir.join("summary.json"), &summary_json(&summary))?;

    if let Some(first) = failures.into_iter().next() {
        return Err(first);
    }
    if violations > 0 {
        return Err(CliError::Violations(violations));
    }
    Ok(summary)
}

/// Pretty JSON with non-finite numbers rendered as `null`.
pub fn summary_json(summary: &Summary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes") + "\n"
}

/// Short human-readable digest of a summary.
pub fn describe(summary: &Summary) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "chern_fhs = {}, chern_analytic = {}",
        summary.chern_fhs, summary.chern_analytic
    );
    let _ = writeln!(
        s,
        "residual_max = {:e}, tomography_max_err = {:e}",
        summary.residual_max, summary.tomography_max_err
    );
    let _ = writeln!(
        s,
        "inequality_violations = {}",
        summary.inequality_violations
    );
    for j in &summary.jump_records {
        let _ = writeln!(
            s,
            "jump at M = {:.6}: delta_mu = {}",
            j.wall_location, j.delta_mu
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> RunConfig {
        let mut cfg = RunConfig {
            mesh: MeshSection { nx: 12, ny: 12 },
            ..RunConfig::default()
        };
        cfg.sweep.steps = 7;
        cfg.qfi_scan.samples = 50;
        cfg
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, std::f64::consts::PI, 6.02214076e23] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_layout() {
        let csv = panel_a(&prepare(&small_cfg()).unwrap());
        assert_eq!(csv.rows(), 144);
        assert!(csv.text().starts_with("m,n,kx,ky,F\n"));
        assert!(!csv.text().contains('\r'));
        assert_eq!(csv.text().lines().count(), 145);
    }

    #[test]
    fn zero_flux_sweep_has_zero_mu() {
        let mut cfg = small_cfg();
        cfg.model.phi = 0.0;
        cfg.model.mass = 0.5;
        cfg.sweep.steps = 6;
        let csv = compute_panel(&cfg, 'd').unwrap();
        for line in csv.text().lines().skip(1) {
            assert_eq!(line.split(',').nth(1), Some("0"));
        }
    }

    #[test]
    fn residual_panel_small() {
        let csv = compute_panel(&small_cfg(), 'e').unwrap();
        for line in csv.text().lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!(v[1] <= 1e-12 && v[2] <= 1e-12, "{line}");
        }
    }

    #[test]
    fn on_wall_model_is_rejected() {
        let mut cfg = small_cfg();
        cfg.model.mass = 3f64.sqrt() * 3.0 * cfg.model.t2;
        let err = compute_panel(&cfg, 'a').unwrap_err();
        assert_eq!(err.exit_code(), 4, "{err}");
        assert!(err.to_string().contains("OnWall"));
    }

    #[test]
    fn unknown_panel() {
        assert_eq!(compute_panel(&small_cfg(), 'z').unwrap_err().exit_code(), 2);
    }
}
