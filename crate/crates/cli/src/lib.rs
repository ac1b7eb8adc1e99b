//! Command implementations for the `lrdrive` binary. Every command renders one CSV table;
//! nothing depends on wall-clock time or randomness, so identical flags give identical bytes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod table;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lrdrive::dynamics::{
    invariant_residual, lr_eigenstate, lr_phase, propagate_schrodinger, DEFAULT_PHASE_TOL,
};
use lrdrive::spectra::{
    adiabatic_level, find_crossings, lz_numeric, lz_probability, nonadiabatic_level, overlap_f,
    LZParams,
};
use lrdrive::{
    builtin_field, builtin_track, engineer, fidelity, literal_model3_track, tabulated_track,
    AngleTrack, DrivingField, ProtocolId, SpinRepresentation, TrackSamples,
};

pub use table::CsvTable;

#[derive(Parser, Debug)]
#[command(
    name = "lrdrive",
    version,
    about = "Exactly solvable driven spin-j systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Built-in driving field: t, omega_x, omega_z
    Fields(Common),
    /// Invariant angle track: t, theta, phi, alpha_x, alpha_y, alpha_z
    Track(Common),
    /// Field reverse-engineered from a track: t, omega_x, omega_z
    Engineer(Common),
    /// Invariant-equation residual of a track against the model field: t, residual
    Verify(Common),
    /// Overlap and energy levels: `t, f, E_ad_<m>..., E_<m>...`
    Levels(Common),
    /// Nonadiabatic level crossings: t_c, f_at_tc, iterations
    Crossings(Common),
    /// RK4 propagation of an LR eigenstate: `t, fidelity_vs_LR, norm, pop_<m>...`
    Propagate(PropagateArgs),
    /// Landau-Zener formula against numerical propagation
    Lz(LzArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Built-in protocol: model1, model2 or model3
    #[arg(long, default_value = "model1")]
    pub model: ProtocolId,
    /// Spin label (positive half-integer)
    #[arg(long, default_value_t = 0.5)]
    pub j: f64,
    /// Characteristic rate of the protocol
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Start of the time grid [default: -6, or the start of --track-file]
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    /// End of the time grid [default: 6, or the end of --track-file]
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of grid points (crossing scans: number of scan points)
    #[arg(long, default_value_t = 1201)]
    pub steps: usize,
    /// Bisection tolerance on t for crossings
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Use the opposite-sign model-3 track (not an invariant of the model-3 field)
    #[arg(long, conflicts_with = "track_file")]
    pub literal_track: bool,
    /// Tabulated track with header `t,theta,phi`
    #[arg(long)]
    pub track_file: Option<PathBuf>,
    /// Output path; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Initial LR eigenstate; defaults to m = j
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// RK4 steps between consecutive output rows
    #[arg(long, default_value_t = 20)]
    pub substeps: usize,
}

#[derive(Args, Debug, Clone)]
pub struct LzArgs {
    /// Coupling
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Sweep rate
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Propagation runs over [-horizon, horizon]; needs nu*horizon >= 50*delta
    #[arg(long, default_value_t = 100.0)]
    pub horizon: f64,
    /// RK4 steps
    #[arg(long, default_value_t = 400_000)]
    pub steps: usize,
    /// Output path; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Track {
        path: PathBuf,
        source: lrdrive::Error,
    },
    #[error(transparent)]
    Core(#[from] lrdrive::Error),
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for a track or field that breaks down at some `t`,
    /// 4 for numerical or output failures.
    pub fn exit_code(&self) -> u8 {
        use lrdrive::Error as E;
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Track { .. } => 2,
            CliError::Write(_) => 4,
            CliError::Core(e) => match e {
                E::SingularTrack { .. }
                | E::DomainError { .. }
                | E::ZeroField { .. }
                | E::NegativeXField { .. }
                | E::OutOfRange { .. } => 3,
                E::QuadratureNonConvergence { .. } | E::NotHermitian { .. } => 4,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl Command {
    pub fn out(&self) -> Option<&Path> {
        match self {
            Command::Propagate(a) => a.common.out.as_deref(),
            Command::Lz(a) => a.out.as_deref(),
            Command::Fields(c)
            | Command::Track(c)
            | Command::Engineer(c)
            | Command::Verify(c)
            | Command::Levels(c)
            | Command::Crossings(c) => c.out.as_deref(),
        }
    }
}

/// Reads and validates a tabulated track.
pub fn parse_track_file(path: &Path) -> CliResult<TrackSamples> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    TrackSamples::parse(&text).map_err(|source| CliError::Track {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(command: &Command) -> CliResult<CsvTable> {
    match command {
        Command::Fields(c) => fields(c),
        Command::Track(c) => track_table(c),
        Command::Engineer(c) => engineer_table(c),
        Command::Verify(c) => verify(c),
        Command::Levels(c) => levels(c),
        Command::Crossings(c) => crossings(c),
        Command::Propagate(a) => propagate(a),
        Command::Lz(a) => lz(a),
    }
}

struct Setup {
    track: Option<AngleTrack>,
    t_min: f64,
    t_max: f64,
}

impl Common {
    fn field(&self) -> CliResult<DrivingField> {
        Ok(builtin_field(self.model, self.epsilon)?)
    }

    fn rep(&self) -> CliResult<SpinRepresentation> {
        Ok(SpinRepresentation::new(self.j)?)
    }

    fn load_track(&self) -> CliResult<Option<AngleTrack>> {
        if let Some(path) = &self.track_file {
            return Ok(Some(tabulated_track(&parse_track_file(path)?)));
        }
        if self.literal_track {
            if self.model != ProtocolId::Model3 {
                return Err(CliError::Usage(
                    "--literal-track applies to model3 only".into(),
                ));
            }
            return Ok(Some(literal_model3_track(self.epsilon)?));
        }
        Ok(None)
    }

    /// Resolves the track and the time grid. `margin` shrinks a range taken from a
    /// track file, for commands that evaluate the track on both sides of each grid point.
    fn setup(&self, margin: f64) -> CliResult<Setup> {
        let track = self.load_track()?;
        let (lo, hi) = match &track {
            Some(t) if self.track_file.is_some() => {
                let (a, b) = t.domain();
                (a + margin, b - margin)
            }
            _ => (-6.0, 6.0),
        };
        let t_min = self.t_min.unwrap_or(lo);
        let t_max = self.t_max.unwrap_or(hi);
        if !(t_min < t_max) {
            return Err(CliError::Usage(format!(
                "--t-min ({t_min}) must be below --t-max ({t_max})"
            )));
        }
        if self.steps < 2 {
            return Err(CliError::Usage("--steps must be at least 2".into()));
        }
        Ok(Setup {
            track,
            t_min,
            t_max,
        })
    }

    /// The explicit track, or the model's own.
    fn track_or_builtin(&self, track: Option<AngleTrack>) -> CliResult<AngleTrack> {
        match track {
            Some(t) => Ok(t),
            None => Ok(builtin_track(self.model, self.epsilon)?),
        }
    }

    fn grid(&self, s: &Setup) -> impl Iterator<Item = f64> + Clone {
        lrdrive::grid(s.t_min, s.t_max, self.steps)
    }
}

fn fields(c: &Common) -> CliResult<CsvTable> {
    let s = c.setup(0.0)?;
    let field = c.field()?;
    let mut table = CsvTable::new(["t", "omega_x", "omega_z"]);
    for t in c.grid(&s) {
        let (x, z) = field.omega(t)?;
        table.push_values(&[t, x, z]);
    }
    Ok(table)
}

fn track_table(c: &Common) -> CliResult<CsvTable> {
    let s = c.setup(0.0)?;
    let track = c.track_or_builtin(s.track.clone())?;
    let mut table = CsvTable::new(["t", "theta", "phi", "alpha_x", "alpha_y", "alpha_z"]);
    for t in c.grid(&s) {
        let frame = track.frame(t)?;
        let [ax, ay, az] = frame.unit_vector();
        table.push_values(&[t, frame.point.theta, frame.point.phi, ax, ay, az]);
    }
    Ok(table)
}

fn engineer_table(c: &Common) -> CliResult<CsvTable> {
    let s = c.setup(0.0)?;
    let field = engineer(&c.track_or_builtin(s.track.clone())?);
    let mut table = CsvTable::new(["t", "omega_x", "omega_z"]);
    for t in c.grid(&s) {
        let (x, z) = field.omega(t)?;
        table.push_values(&[t, x, z]);
    }
    Ok(table)
}

fn verify(c: &Common) -> CliResult<CsvTable> {
    if !(c.epsilon > 0.0) {
        return Err(lrdrive::Error::InvalidParameter {
            name: "epsilon",
            value: c.epsilon,
        }
        .into());
    }
    let h = 1e-5 / c.epsilon;
    let s = c.setup(h)?;
    let field = c.field()?;
    let track = c.track_or_builtin(s.track.clone())?;
    let rep = c.rep()?;
    let mut table = CsvTable::new(["t", "residual"]);
    let mut worst: f64 = 0.0;
    for t in c.grid(&s) {
        let r = invariant_residual(&rep, &field, &track, t, h)?;
        worst = worst.max(r);
        table.push_values(&[t, r]);
    }
    table.set_trailer(format!("max_residual={}", table::number(worst)));
    Ok(table)
}

fn levels(c: &Common) -> CliResult<CsvTable> {
    let s = c.setup(0.0)?;
    let field = c.field()?;
    let track = c.track_or_builtin(s.track.clone())?;
    let ms = c.rep()?.spin().m_values();
    let mut header = vec!["t".to_string(), "f".to_string()];
    header.extend(ms.iter().map(|&m| format!("E_ad_{}", table::m_label(m))));
    header.extend(ms.iter().map(|&m| format!("E_{}", table::m_label(m))));
    let mut table = CsvTable::new(header);
    for t in c.grid(&s) {
        let mut row = vec![t, overlap_f(&field, &track, t)?];
        for &m in &ms {
            row.push(adiabatic_level(&field, m, t)?);
        }
        for &m in &ms {
            row.push(nonadiabatic_level(&field, &track, m, t)?);
        }
        table.push_values(&row);
    }
    Ok(table)
}

fn crossings(c: &Common) -> CliResult<CsvTable> {
    let s = c.setup(0.0)?;
    let field = c.field()?;
    let track = c.track_or_builtin(s.track.clone())?;
    let events = find_crossings(&field, &track, s.t_min, s.t_max, c.steps, c.tol)?;
    let mut table = CsvTable::new(["t_c", "f_at_tc", "iterations"]);
    for e in events {
        table.push(vec![
            table::number(e.t_c),
            table::number(e.f_at_tc),
            e.iterations.to_string(),
        ]);
    }
    Ok(table)
}

fn propagate(a: &PropagateArgs) -> CliResult<CsvTable> {
    let c = &a.common;
    if a.substeps == 0 {
        return Err(CliError::Usage("--substeps must be positive".into()));
    }
    let s = c.setup(0.0)?;
    let field = c.field()?;
    let track = c.track_or_builtin(s.track.clone())?;
    let rep = c.rep()?;
    let m = a.m.unwrap_or(c.j);
    let ms = rep.spin().m_values();

    let mut header = vec![
        "t".to_string(),
        "fidelity_vs_LR".to_string(),
        "norm".to_string(),
    ];
    header.extend(ms.iter().map(|&m| format!("pop_{}", table::m_label(m))));
    let mut table = CsvTable::new(header);

    let times: Vec<f64> = c.grid(&s).collect();
    let mut psi = lr_eigenstate(&rep, &track, m, times[0])?;
    let mut phase = 0.0;
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let prev = times[k - 1];
            psi = propagate_schrodinger(&rep, &field, &psi, prev, t, a.substeps)?.state;
            phase += lr_phase(&rep, &track, &field, m, prev, t, DEFAULT_PHASE_TOL)?;
        }
        let exact = lr_eigenstate(&rep, &track, m, t)?.with_phase(phase);
        let mut row = vec![t, fidelity(&psi, &exact)?, psi.norm()];
        row.extend(psi.populations());
        table.push_values(&row);
    }
    Ok(table)
}

fn lz(a: &LzArgs) -> CliResult<CsvTable> {
    let p = LZParams::new(a.delta, a.nu)?;
    if a.steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    let formula = lz_probability(p);
    let numeric = lz_numeric(p, a.horizon, a.steps)?;
    let mut table = CsvTable::new(["delta", "nu", "P_formula", "P_numeric", "abs_error"]);
    table.push_values(&[a.delta, a.nu, formula, numeric, (numeric - formula).abs()]);
    Ok(table)
}
