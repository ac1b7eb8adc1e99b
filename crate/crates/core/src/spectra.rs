//! Adiabatic and nonadiabatic energy levels, nonadiabatic level crossings, and the
//! Landau-Zener comparison.
//!
//! The nonadiabatic level of the exact dynamical basis is `E_m(t) = m Omega(t) . alpha(t)`,
//! so every level vanishes at once wherever the invariant direction `alpha` is
//! perpendicular to the field direction `alpha_h`. Crossings are located on the common
//! factor `g(t) = Omega . alpha`. Its zero is cubic for the symmetric built-in models, so
//! the location is only as sharp as `g` can be evaluated; the closed-form tracks supply
//! exact trigonometric values so that `g` vanishes exactly at their symmetry point.

use std::f64::consts::PI;

use crate::dynamics::{hamiltonian, invariant_operator, invariant_vector, propagate_schrodinger};
use crate::error::{Error, Result};
use crate::protocols::{builtin_field, field_orientation, AngleTrack, DrivingField, ProtocolId};
use crate::spin::{frobenius_inner, QuantumState, SpinRepresentation};

/// Whether a level curve belongs to `H(t)` eigenstates or to the exact dynamical basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    Adiabatic,
    Nonadiabatic,
}

/// Sampled `(t, E)` for one quantum number.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub m: f64,
    pub kind: LevelKind,
    pub samples: Vec<(f64, f64)>,
}

/// `m |Omega(t)|`.
pub fn adiabatic_level(field: &DrivingField, m: f64, t: f64) -> Result<f64> {
    let (x, z) = field.omega(t)?;
    Ok(m * x.hypot(z))
}

fn field_dot_alpha(field: &DrivingField, track: &AngleTrack, t: f64) -> Result<f64> {
    let omega = field.vector(t)?;
    Ok(invariant_vector(track, t)?.dot(&omega))
}

/// `m Omega(t) . alpha(t)`.
pub fn nonadiabatic_level(field: &DrivingField, track: &AngleTrack, m: f64, t: f64) -> Result<f64> {
    Ok(m * field_dot_alpha(field, track, t)?)
}

/// `f = alpha(t) . alpha_h(t)`.
pub fn overlap_f(field: &DrivingField, track: &AngleTrack, t: f64) -> Result<f64> {
    let dir = field_orientation(field, t)?;
    Ok(invariant_vector(track, t)?.dot(&dir))
}

/// `tr[I(t) H(t)]`, equal to `(Omega . alpha) j(j+1)(2j+1)/3`.
pub fn frobenius_certificate(
    rep: &SpinRepresentation,
    field: &DrivingField,
    track: &AngleTrack,
    t: f64,
) -> Result<f64> {
    let inv = invariant_operator(rep, track, t)?;
    let ham = hamiltonian(rep, field, t)?;
    Ok(frobenius_inner(&inv, &ham)?.re)
}

/// Samples adiabatic or nonadiabatic levels on `n` evenly spaced times.
pub fn level_curve(
    field: &DrivingField,
    track: Option<&AngleTrack>,
    kind: LevelKind,
    m: f64,
    t_min: f64,
    t_max: f64,
    n: usize,
) -> Result<LevelCurve> {
    let samples = crate::grid(t_min, t_max, n)
        .map(|t| {
            let e = match (kind, track) {
                (LevelKind::Adiabatic, _) => adiabatic_level(field, m, t)?,
                (LevelKind::Nonadiabatic, Some(track)) => nonadiabatic_level(field, track, m, t)?,
                (LevelKind::Nonadiabatic, None) => return Err(Error::NoExactTrack),
            };
            Ok((t, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelCurve { m, kind, samples })
}

/// A detected nonadiabatic level crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub t_c: f64,
    /// `overlap_f` at `t_c`; the orthogonality certificate.
    pub f_at_tc: f64,
    /// Final bracket; `g` has opposite signs (or a zero) at its ends.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

const MAX_BISECTIONS: usize = 200;

fn bisect<G>(
    g: &G,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    tol: f64,
) -> Result<(f64, (f64, f64), usize)>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        iterations += 1;
        if g_mid == 0.0 {
            return Ok((mid, (mid, mid), iterations));
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), (lo, hi), iterations))
}

/// Scans `g(t) = Omega . alpha` on `grid_points` evenly spaced times over `[t_min, t_max]`,
/// brackets every sign change and bisects it down to width `tol`.
pub fn find_crossings(
    field: &DrivingField,
    track: &AngleTrack,
    t_min: f64,
    t_max: f64,
    grid_points: usize,
    tol: f64,
) -> Result<Vec<CrossingEvent>> {
    if !(t_min < t_max) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_max,
        });
    }
    if grid_points < 16 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            value: grid_points as f64,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    let g = |t: f64| field_dot_alpha(field, track, t);
    let times: Vec<f64> = crate::grid(t_min, t_max, grid_points).collect();
    let values = times.iter().map(|&t| g(t)).collect::<Result<Vec<_>>>()?;

    let mut events = Vec::new();
    let mut push = |t_c: f64, bracket: (f64, f64), iterations: usize| -> Result<()> {
        let f_at_tc = overlap_f(field, track, t_c)?;
        events.push(CrossingEvent {
            t_c,
            f_at_tc,
            bracket,
            iterations,
        });
        Ok(())
    };
    for i in 0..times.len() {
        if values[i] == 0.0 {
            push(times[i], (times[i], times[i]), 0)?;
            continue;
        }
        if i + 1 < times.len() && values[i + 1] != 0.0 && (values[i] > 0.0) != (values[i + 1] > 0.0)
        {
            let (t_c, bracket, iterations) = bisect(&g, times[i], times[i + 1], values[i], tol)?;
            push(t_c, bracket, iterations)?;
        }
    }
    events.sort_by(|a, b| a.t_c.total_cmp(&b.t_c));
    Ok(events)
}

/// Scan resolution for [`classify_anomaly`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub grid_points: usize,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid_points: 4001,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyReport {
    pub f_minus: f64,
    pub f_plus: f64,
    pub crossings: Vec<CrossingEvent>,
    pub anomalous: bool,
    pub delta: f64,
}

/// Parallel-to-antiparallel test: `f(-T) > 1 - delta` and `f(T) < -(1 - delta)`.
pub fn classify_anomaly(
    field: &DrivingField,
    track: &AngleTrack,
    horizon: f64,
    delta: f64,
    scan: ScanOptions,
) -> Result<AnomalyReport> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
        });
    }
    let f_minus = overlap_f(field, track, -horizon)?;
    let f_plus = overlap_f(field, track, horizon)?;
    let crossings = find_crossings(field, track, -horizon, horizon, scan.grid_points, scan.tol)?;
    let anomalous = f_minus > 1.0 - delta && f_plus < -(1.0 - delta);
    Ok(AnomalyReport {
        f_minus,
        f_plus,
        crossings,
        anomalous,
        delta,
    })
}

/// Coupling and sweep rate of a linear Landau-Zener passage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LZParams {
    pub delta: f64,
    pub nu: f64,
}

impl LZParams {
    pub fn new(delta: f64, nu: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu,
            });
        }
        Ok(LZParams { delta, nu })
    }
}

/// `P = exp(-pi delta^2 / (2 nu))`.
pub fn lz_probability(p: LZParams) -> f64 {
    (-PI * p.delta * p.delta / (2.0 * p.nu)).exp()
}

/// Propagates `|+1/2>` under `Omega = (delta, 0, nu t)` over `[-T, T]` and returns the
/// population left in `|+1/2>`.
pub fn lz_numeric(p: LZParams, horizon: f64, steps: usize) -> Result<f64> {
    let sweep = p.nu * horizon;
    let required = 50.0 * p.delta;
    if !(sweep >= required) {
        return Err(Error::WindowTooSmall { sweep, required });
    }
    let rep = SpinRepresentation::new(0.5)?;
    let field = builtin_field(
        ProtocolId::Lz {
            delta: p.delta,
            nu: p.nu,
        },
        1.0,
    )?;
    let up = QuantumState::basis(rep.spin(), 0.5)?;
    let out = propagate_schrodinger(&rep, &field, &up, -horizon, horizon, steps)?;
    Ok(out.state.populations()[0])
}
