//! Sweeps, cross-checks and experiment runs over the three-arc path.
//!
//! Every runner returns a [`Report`]: a fixed set of columns, rows in grid
//! order, the tolerances applied and an overall pass flag. Reports render to
//! CSV (17 significant digits, LF line endings) or JSON.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;
use uhlmann::analytic::{
    compute_angles, discrete_holonomy, holonomy_trace, interferometric_phase, loglog_slope,
    phase_dominance_gap, uhlmann_phase, uhlmann_phase_unitary, PathSpec,
};
use uhlmann::experiment::{interference_scan, ExperimentConfig};
use uhlmann::transport::{transport, DensityPath};

pub const TRANSPORT_TOL: f64 = 1e-3;
pub const EXPERIMENT_PHASE_TOL: f64 = 1e-6;
pub const EXPERIMENT_VISIBILITY_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-12;
pub const FIG2_VANISHED: f64 = 0.05;
pub const SLOPE_TOL: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Core(#[from] uhlmann::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidRequest(_) => 3,
            CliError::Core(
                uhlmann::Error::InvalidParams(_)
                | uhlmann::Error::OutOfRange { .. }
                | uhlmann::Error::GridTooCoarse(_),
            ) => 3,
            CliError::Core(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fig2,
    UnitaryCompare,
    OracleCheck,
    Experiment,
    Slopes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub mode: Mode,
    pub phi: f64,
    /// Initial Bloch length. For `oracle-check` an absent value means both 1 and 0.5.
    pub r0: Option<f64>,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub points: usize,
    /// Discrete transport resolution.
    pub steps: usize,
    pub delta_samples: usize,
    pub r0_min: f64,
    pub r0_max: f64,
    pub r0_points: usize,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl SweepRequest {
    pub fn defaults(mode: Mode) -> Self {
        let (gamma_min, gamma_max, points) = match mode {
            Mode::Fig2 => (0.0, 2.0, 201),
            Mode::OracleCheck => (0.0, 2.0, 9),
            Mode::Slopes => (1e-4, 1e-2, 9),
            Mode::Experiment => (0.1, 0.1, 2),
            Mode::UnitaryCompare => (0.0, 0.0, 9),
        };
        Self {
            mode,
            phi: FRAC_PI_2,
            r0: None,
            gamma_min,
            gamma_max,
            points,
            steps: 100_000,
            delta_samples: 720,
            r0_min: 0.1,
            r0_max: 0.9,
            r0_points: 9,
            phi_min: 0.1,
            phi_max: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::InvalidRequest(msg));
        if self.points < 2 || self.r0_points < 2 {
            return bad("point counts must be at least 2".into());
        }
        if !(self.gamma_min <= self.gamma_max) || self.gamma_min < 0.0 {
            return bad(format!(
                "gamma bounds must satisfy 0 <= min <= max, got [{}, {}]",
                self.gamma_min, self.gamma_max
            ));
        }
        if !(self.r0_min <= self.r0_max) || !(self.phi_min <= self.phi_max) {
            return bad("grid bounds must be ordered".into());
        }
        if self.mode == Mode::Slopes && self.gamma_min <= 0.0 {
            return bad("slopes need a positive gamma range".into());
        }
        if self.mode == Mode::OracleCheck && self.steps < 2 {
            return bad("steps must be at least 2".into());
        }
        Ok(())
    }

    fn r0_or(&self, default: f64) -> f64 {
        self.r0.unwrap_or(default)
    }
}

/// Evenly spaced grid including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Logarithmically spaced grid including both ends.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    linspace(a, b, n)
        .into_iter()
        .enumerate()
        .map(|(k, x)| {
            if k == 0 {
                lo
            } else if k + 1 == n {
                hi
            } else {
                x.exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Missing(Option<()>),
}

impl Cell {
    const NONE: Cell = Cell::Missing(None);

    fn text(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Flag(b) => b.to_string(),
            Cell::Missing(_) => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    #[serde(skip)]
    pub angle: bool,
}

impl Column {
    fn plain(name: &str) -> Self {
        Self {
            name: name.into(),
            angle: false,
        }
    }

    fn angle(name: &str) -> Self {
        Self {
            name: format!("{name}_rad"),
            angle: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub params: BTreeMap<String, f64>,
    pub summary: BTreeMap<String, f64>,
    #[serde(serialize_with = "column_names")]
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub tolerances: BTreeMap<String, f64>,
    pub pass: bool,
}

fn column_names<S: serde::Serializer>(
    cols: &[Column],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(cols.iter().map(|c| c.name.as_str()))
}

impl Report {
    fn new(mode: Mode, columns: Vec<Column>) -> Self {
        Self {
            mode,
            params: BTreeMap::new(),
            summary: BTreeMap::new(),
            columns,
            rows: Vec::new(),
            tolerances: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Copy with angle columns converted to degrees and renamed `*_deg`.
    pub fn in_degrees(&self) -> Report {
        let mut out = self.clone();
        for (j, col) in self.columns.iter().enumerate() {
            if !col.angle {
                continue;
            }
            out.columns[j].name = col.name.trim_end_matches("_rad").to_string() + "_deg";
            for row in &mut out.rows {
                if let Cell::Num(x) = row[j] {
                    row[j] = Cell::Num(x.to_degrees());
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Gnuplot script plotting the first two columns of a CSV data file.
pub fn plot_script(report: &Report, data_path: &str) -> String {
    let x = &report.columns[0].name;
    let y = &report.columns[1].name;
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{x}'\nset ylabel '{y}'\nplot '{data_path}' using 1:2 with lines\n"
    )
}

/// φ_g against Γ/ω at fixed φ and r0.
pub fn run_fig2(req: &SweepRequest) -> Result<Report> {
    req.validate()?;
    let r0 = req.r0_or(1.0);
    let grid = linspace(req.gamma_min, req.gamma_max, req.points);
    let specs = grid
        .iter()
        .map(|&g| PathSpec::new(req.phi, g, r0))
        .collect::<uhlmann::Result<Vec<_>>>()?;
    let phases: Vec<f64> = specs.par_iter().map(uhlmann_phase).collect();

    let mut report = Report::new(
        Mode::Fig2,
        vec![Column::plain("gamma_over_omega"), Column::angle("phi_g")],
    );
    report.params = BTreeMap::from([
        ("phi".into(), req.phi),
        ("r0".into(), r0),
        ("gamma_min".into(), req.gamma_min),
        ("gamma_max".into(), req.gamma_max),
        ("points".into(), req.points as f64),
    ]);
    report.rows = grid
        .iter()
        .zip(&phases)
        .map(|(&g, &p)| vec![Cell::Num(g), Cell::Num(p)])
        .collect();
    let monotone = phases.windows(2).all(|w| w[1].abs() < w[0].abs());
    report.pass = monotone;
    report
        .summary
        .insert("monotone".into(), f64::from(u8::from(monotone)));
    if (req.gamma_min..=req.gamma_max).contains(&1.0) {
        let at_one = uhlmann_phase(&PathSpec::new(req.phi, 1.0, r0)?);
        report.summary.insert("phi_g_at_gamma_1".into(), at_one);
        report
            .tolerances
            .insert("vanished_at_gamma_1".into(), FIG2_VANISHED);
        report.pass &= at_one.abs() < FIG2_VANISHED;
    }
    Ok(report)
}

/// Uhlmann versus interferometric phase for the unitary loop.
pub fn run_unitary_compare(req: &SweepRequest) -> Result<Report> {
    req.validate()?;
    let r0s = linspace(req.r0_min, req.r0_max, req.r0_points);
    let phis = linspace(req.phi_min, req.phi_max, req.points);
    for &r0 in &r0s {
        if !(0.0..=1.0).contains(&r0) {
            return Err(CliError::InvalidRequest(format!("r0 {r0} outside [0, 1]")));
        }
    }
    for &phi in &phis {
        PathSpec::new(phi, 0.0, 0.5)?;
    }

    let mut report = Report::new(
        Mode::UnitaryCompare,
        vec![
            Column::plain("r0"),
            Column::angle("phi"),
            Column::angle("phi_g"),
            Column::angle("gamma_g"),
            Column::angle("gap"),
        ],
    );
    report.params = BTreeMap::from([
        ("r0_min".into(), req.r0_min),
        ("r0_max".into(), req.r0_max),
        ("r0_points".into(), req.r0_points as f64),
        ("phi_min".into(), req.phi_min),
        ("phi_max".into(), req.phi_max),
        ("points".into(), req.points as f64),
    ]);
    report.tolerances.insert("gap_floor".into(), UNITARY_TOL);
    let mut min_gap = f64::INFINITY;
    for &r0 in &r0s {
        for &phi in &phis {
            let gap = phase_dominance_gap(r0, phi);
            min_gap = min_gap.min(gap);
            report.rows.push(vec![
                Cell::Num(r0),
                Cell::Num(phi),
                Cell::Num(uhlmann_phase_unitary(r0, phi)),
                Cell::Num(interferometric_phase(r0, phi)),
                Cell::Num(gap),
            ]);
        }
    }
    report.summary.insert("min_gap".into(), min_gap);
    report.pass = min_gap >= -UNITARY_TOL;
    Ok(report)
}

struct OracleRow {
    r0: f64,
    gamma: f64,
    analytic: f64,
    transport: f64,
    experiment: f64,
    unitary: Option<f64>,
    resolved: bool,
}

/// Discrete transport at `m` samples. A path that trips the resolution guard
/// is still evaluated, but reported as unresolved.
fn transport_phase(spec: &PathSpec, m: usize) -> Result<(f64, bool)> {
    match discrete_holonomy(spec, m) {
        Ok(h) => Ok((h.phase, true)),
        Err(uhlmann::Error::UnderResolved { .. }) => {
            let path =
                DensityPath::sample_with_max_step(spec, 0.0, spec.duration(), m, f64::INFINITY)?;
            Ok((transport(&path)?.phase, false))
        }
        Err(e) => Err(e.into()),
    }
}

/// Closed form against discrete transport and the interferometer simulation.
pub fn run_oracle_check(req: &SweepRequest) -> Result<Report> {
    req.validate()?;
    let r0s = match req.r0 {
        Some(r0) => vec![r0],
        None => vec![1.0, 0.5],
    };
    let gammas = linspace(req.gamma_min, req.gamma_max, req.points);
    let mut specs = Vec::new();
    for &r0 in &r0s {
        for &g in &gammas {
            specs.push(PathSpec::new(req.phi, g, r0)?);
        }
    }
    let rows = specs
        .par_iter()
        .map(|spec| -> Result<OracleRow> {
            let analytic = uhlmann_phase(spec);
            let (transport, resolved) = transport_phase(spec, req.steps)?;
            let config = ExperimentConfig::new(*spec, req.delta_samples)?;
            let experiment = interference_scan(&config)?.phase;
            let unitary =
                (spec.gamma_over_omega == 0.0).then(|| uhlmann_phase_unitary(spec.r0, spec.phi));
            Ok(OracleRow {
                r0: spec.r0,
                gamma: spec.gamma_over_omega,
                analytic,
                transport,
                experiment,
                unitary,
                resolved,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        Mode::OracleCheck,
        vec![
            Column::plain("r0"),
            Column::plain("gamma_over_omega"),
            Column::angle("analytic"),
            Column::angle("transport"),
            Column::angle("experiment"),
            Column::angle("transport_error"),
            Column::angle("experiment_error"),
            Column::angle("unitary_error"),
            Column::plain("resolved"),
            Column::plain("transport_pass"),
            Column::plain("experiment_pass"),
            Column::plain("unitary_pass"),
        ],
    );
    report.params = BTreeMap::from([
        ("phi".into(), req.phi),
        ("gamma_min".into(), req.gamma_min),
        ("gamma_max".into(), req.gamma_max),
        ("points".into(), req.points as f64),
        ("steps".into(), req.steps as f64),
        ("delta_samples".into(), req.delta_samples as f64),
    ]);
    report.tolerances = BTreeMap::from([
        ("transport".into(), TRANSPORT_TOL),
        ("experiment".into(), EXPERIMENT_PHASE_TOL),
        ("unitary".into(), UNITARY_TOL),
    ]);
    let mut worst_transport = 0.0f64;
    let mut worst_experiment = 0.0f64;
    for row in rows {
        let t_err = (row.transport - row.analytic).abs();
        let e_err = (row.experiment - row.analytic).abs();
        let u_err = row.unitary.map(|u| (u - row.analytic).abs());
        let t_ok = row.resolved && t_err < TRANSPORT_TOL;
        let e_ok = e_err < EXPERIMENT_PHASE_TOL;
        let u_ok = u_err.map(|e| e < UNITARY_TOL);
        worst_transport = worst_transport.max(t_err);
        worst_experiment = worst_experiment.max(e_err);
        report.pass &= t_ok && e_ok && u_ok.unwrap_or(true);
        report.rows.push(vec![
            Cell::Num(row.r0),
            Cell::Num(row.gamma),
            Cell::Num(row.analytic),
            Cell::Num(row.transport),
            Cell::Num(row.experiment),
            Cell::Num(t_err),
            Cell::Num(e_err),
            u_err.map_or(Cell::NONE, Cell::Num),
            Cell::Flag(row.resolved),
            Cell::Flag(t_ok),
            Cell::Flag(e_ok),
            u_ok.map_or(Cell::NONE, Cell::Flag),
        ]);
    }
    report.summary = BTreeMap::from([
        ("max_transport_error".into(), worst_transport),
        ("max_experiment_error".into(), worst_experiment),
    ]);
    Ok(report)
}

/// Interference scan for one path; rows are the fringe samples.
pub fn run_experiment(req: &SweepRequest) -> Result<Report> {
    req.validate()?;
    let r0 = req.r0_or(1.0);
    let spec = PathSpec::new(req.phi, req.gamma_min, r0)?;
    let config = ExperimentConfig::new(spec, req.delta_samples)?;
    let scan = interference_scan(&config)?;
    let trace = holonomy_trace(&spec);

    let mut report = Report::new(
        Mode::Experiment,
        vec![Column::angle("delta"), Column::plain("intensity")],
    );
    report.params = BTreeMap::from([
        ("phi".into(), req.phi),
        ("gamma_over_omega".into(), req.gamma_min),
        ("r0".into(), r0),
        ("delta_samples".into(), req.delta_samples as f64),
    ]);
    report.summary = BTreeMap::from([
        ("phase".into(), scan.phase),
        ("visibility".into(), scan.visibility),
        ("direct_phase".into(), scan.direct_phase),
        ("direct_visibility".into(), scan.direct_visibility),
        ("analytic_phase".into(), uhlmann_phase(&spec)),
        ("trace_modulus".into(), trace.norm()),
    ]);
    report.tolerances = BTreeMap::from([
        ("phase".into(), EXPERIMENT_PHASE_TOL),
        ("visibility".into(), EXPERIMENT_VISIBILITY_TOL),
    ]);
    report.pass = (scan.phase - uhlmann_phase(&spec)).abs() < EXPERIMENT_PHASE_TOL
        && (scan.visibility - trace.norm()).abs() < EXPERIMENT_VISIBILITY_TOL;
    report.rows = scan
        .curve
        .iter()
        .map(|p| vec![Cell::Num(p.delta), Cell::Num(p.intensity)])
        .collect();
    Ok(report)
}

/// Expected log–log slopes of the phase deviation for a pure and a mixed start.
pub const EXPECTED_PURE_SLOPE: f64 = 0.5;
pub const EXPECTED_MIXED_SLOPE: f64 = 1.0;

/// Deviations of the phase and of the first transport angle from their
/// unitary values over a logarithmic Γ/ω grid, with fitted slopes.
pub fn run_slopes(req: &SweepRequest) -> Result<Report> {
    req.validate()?;
    let mixed = req.r0_or(0.5);
    let grid = logspace(req.gamma_min, req.gamma_max, req.points);
    let deviations = |r0: f64| -> Result<Vec<(f64, f64)>> {
        let base = PathSpec::new(req.phi, 0.0, r0)?;
        let (phase0, mu0) = (uhlmann_phase(&base), compute_angles(&base).mu);
        grid.iter()
            .map(|&g| {
                let s = PathSpec::new(req.phi, g, r0)?;
                Ok((
                    (uhlmann_phase(&s) - phase0).abs(),
                    (compute_angles(&s).mu - mu0).abs(),
                ))
            })
            .collect()
    };
    let pure = deviations(1.0)?;
    let mixed_dev = deviations(mixed)?;
    let column = |v: &[(f64, f64)], angle: bool| -> Vec<f64> {
        v.iter().map(|&(p, a)| if angle { a } else { p }).collect()
    };
    let pure_phase = loglog_slope(&grid, &column(&pure, false));
    let mixed_phase = loglog_slope(&grid, &column(&mixed_dev, false));
    let pure_angle = loglog_slope(&grid, &column(&pure, true));
    let mixed_angle = loglog_slope(&grid, &column(&mixed_dev, true));

    let mut report = Report::new(
        Mode::Slopes,
        vec![
            Column::plain("gamma_over_omega"),
            Column::angle("pure_phase_deviation"),
            Column::angle("mixed_phase_deviation"),
            Column::angle("pure_angle_deviation"),
            Column::angle("mixed_angle_deviation"),
        ],
    );
    report.params = BTreeMap::from([
        ("phi".into(), req.phi),
        ("mixed_r0".into(), mixed),
        ("gamma_min".into(), req.gamma_min),
        ("gamma_max".into(), req.gamma_max),
        ("points".into(), req.points as f64),
    ]);
    report.rows = grid
        .iter()
        .zip(pure.iter().zip(&mixed_dev))
        .map(|(&g, (p, m))| {
            vec![
                Cell::Num(g),
                Cell::Num(p.0),
                Cell::Num(m.0),
                Cell::Num(p.1),
                Cell::Num(m.1),
            ]
        })
        .collect();
    report.summary = BTreeMap::from([
        ("pure_phase_slope".into(), pure_phase),
        ("mixed_phase_slope".into(), mixed_phase),
        ("pure_angle_slope".into(), pure_angle),
        ("mixed_angle_slope".into(), mixed_angle),
    ]);
    report.tolerances = BTreeMap::from([
        ("expected_pure_slope".into(), EXPECTED_PURE_SLOPE),
        ("expected_mixed_slope".into(), EXPECTED_MIXED_SLOPE),
        ("slope".into(), SLOPE_TOL),
    ]);
    report.pass = (pure_phase - EXPECTED_PURE_SLOPE).abs() <= SLOPE_TOL
        && (mixed_phase - EXPECTED_MIXED_SLOPE).abs() <= SLOPE_TOL;
    Ok(report)
}

pub fn run(req: &SweepRequest) -> Result<Report> {
    match req.mode {
        Mode::Fig2 => run_fig2(req),
        Mode::UnitaryCompare => run_unitary_compare(req),
        Mode::OracleCheck => run_oracle_check(req),
        Mode::Experiment => run_experiment(req),
        Mode::Slopes => run_slopes(req),
    }
}
