//! Driving fields, invariant angle tracks, and the reverse-engineering map between them.
//!
//! A field `Omega(t) = (omega_x, 0, omega_z)` drives `H(t) = omega_x J_x + omega_z J_z`.
//! An angle track `(theta(t), phi(t))` fixes the invariant `I(t) = alpha(t) . J` with
//! `alpha = (sin theta cos phi, sin theta sin phi, cos theta)`. Given a track, the
//! precession equation `d alpha/dt = Omega x alpha` determines the two field components
//! uniquely:
//!
//! ```text
//! omega_x = -theta' / sin(phi)
//! omega_z =  phi' + omega_x cot(theta) cos(phi)
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// `|sin(phi)|` below this is treated as a zero of the `omega_x` denominator.
const SINGULAR_SIN: f64 = 1e-12;

/// The built-in protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolId {
    /// `omega_x = eps/sqrt(x^2+1)`, `omega_z = eps(x^2-1)/(x^2+1)`, `x = eps t`.
    Model1,
    /// Constant `omega_x = eps` with an exponential sweep in `omega_z`.
    Model2,
    /// Sech-shaped pulse; `omega_z -> -2 eps` at both ends.
    Model3,
    /// Linear Landau-Zener sweep `omega_x = delta`, `omega_z = nu t`.
    Lz { delta: f64, nu: f64 },
}

impl ProtocolId {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolId::Model1 => "model1",
            ProtocolId::Model2 => "model2",
            ProtocolId::Model3 => "model3",
            ProtocolId::Lz { .. } => "lz",
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolId::Lz { delta, nu } => write!(f, "lz(delta={delta}, nu={nu})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses `model1`, `model2` and `model3`. The LZ protocol carries parameters and is
/// built with [`ProtocolId::Lz`] directly.
impl FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "model1" => Ok(ProtocolId::Model1),
            "model2" => Ok(ProtocolId::Model2),
            "model3" => Ok(ProtocolId::Model3),
            other => Err(format!(
                "unknown protocol '{other}' (expected model1, model2, model3)"
            )),
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

#[derive(Clone)]
enum FieldSource {
    Builtin(ProtocolId),
    Engineered(AngleTrack),
    Constant { x: f64, z: f64 },
}

/// A field lying in the x-z plane, evaluable at any time.
#[derive(Clone)]
pub struct DrivingField {
    source: FieldSource,
    epsilon: f64,
    label: String,
}

impl fmt::Debug for DrivingField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DrivingField")
            .field("label", &self.label)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

impl DrivingField {
    /// A time-independent field `(x, 0, z)`.
    pub fn constant(x: f64, z: f64) -> Self {
        DrivingField {
            source: FieldSource::Constant { x, z },
            epsilon: 1.0,
            label: format!("constant({x}, {z})"),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `(omega_x, omega_z)` at `t`.
    pub fn omega(&self, t: f64) -> Result<(f64, f64)> {
        match &self.source {
            FieldSource::Builtin(id) => Ok(builtin_omega(*id, self.epsilon, t)),
            FieldSource::Engineered(track) => engineered_omega(track, t),
            FieldSource::Constant { x, z } => Ok((*x, *z)),
        }
    }

    /// The full 3-vector `(omega_x, 0, omega_z)`.
    pub fn vector(&self, t: f64) -> Result<[f64; 3]> {
        let (x, z) = self.omega(t)?;
        Ok([x, 0.0, z])
    }
}

fn builtin_omega(id: ProtocolId, eps: f64, t: f64) -> (f64, f64) {
    let x = eps * t;
    match id {
        ProtocolId::Model1 => {
            let s = x * x + 1.0;
            (eps / s.sqrt(), eps * (x * x - 1.0) / s)
        }
        ProtocolId::Model2 => {
            // eps u (5 - u^2)/(1 + u^2) with u = e^{2x}, rewritten in v = 1/u for x > 0
            let z = if x <= 0.0 {
                let u = (2.0 * x).exp();
                eps * u * (5.0 - u * u) / (1.0 + u * u)
            } else {
                let v = (-2.0 * x).exp();
                eps * (5.0 * v * v - 1.0) / (v * (v * v + 1.0))
            };
            (eps, z)
        }
        ProtocolId::Model3 => (
            2.0 * eps * sech(x) * sech(2.0 * x).sqrt(),
            eps * (3.0 * sech(2.0 * x) - 2.0),
        ),
        ProtocolId::Lz { delta, nu } => (delta, nu * t),
    }
}

/// The closed-form field of a built-in protocol.
pub fn builtin_field(id: ProtocolId, epsilon: f64) -> Result<DrivingField> {
    check_positive("epsilon", epsilon)?;
    if let ProtocolId::Lz { delta, nu } = id {
        check_positive("delta", delta)?;
        check_positive("nu", nu)?;
    }
    Ok(DrivingField {
        source: FieldSource::Builtin(id),
        epsilon,
        label: id.to_string(),
    })
}

/// Angles and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub theta: f64,
    pub phi: f64,
    pub dtheta: f64,
    pub dphi: f64,
}

impl TrackPoint {
    /// `(sin theta cos phi, sin theta sin phi, cos theta)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// A track point together with the sines and cosines of its angles.
///
/// Closed-form tracks compute the trigonometric values algebraically, so that
/// e.g. `cos(phi)` is exactly zero where the track passes through `phi = 3 pi/2`
/// rather than the `-1.8e-16` that `cos` of the rounded angle gives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackFrame {
    pub point: TrackPoint,
    pub sin_theta: f64,
    pub cos_theta: f64,
    pub sin_phi: f64,
    pub cos_phi: f64,
}

impl TrackFrame {
    fn from_point(point: TrackPoint) -> Self {
        let (sin_theta, cos_theta) = point.theta.sin_cos();
        let (sin_phi, cos_phi) = point.phi.sin_cos();
        TrackFrame {
            point,
            sin_theta,
            cos_theta,
            sin_phi,
            cos_phi,
        }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        [
            self.sin_theta * self.cos_phi,
            self.sin_theta * self.sin_phi,
            self.cos_theta,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum AnalyticTrack {
    Model1,
    Model2,
    Model3,
    Model3Literal,
}

type TrackFn = dyn Fn(f64) -> TrackPoint + Send + Sync;

#[derive(Clone)]
enum TrackSource {
    Analytic(AnalyticTrack),
    Tabulated {
        theta: Arc<CubicSpline>,
        phi: Arc<CubicSpline>,
    },
    Custom(Arc<TrackFn>),
}

/// Whether a track is given in closed form or interpolated from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackKind {
    Analytic,
    Tabulated,
}

/// A time-parameterized pair of invariant angles with derivative access.
#[derive(Clone)]
pub struct AngleTrack {
    source: TrackSource,
    epsilon: f64,
    label: String,
}

impl fmt::Debug for AngleTrack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngleTrack")
            .field("label", &self.label)
            .field("kind", &self.kind())
            .finish()
    }
}

impl AngleTrack {
    /// A track from a user function returning angles and derivatives.
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> TrackPoint + Send + Sync + 'static,
    {
        AngleTrack {
            source: TrackSource::Custom(Arc::new(f)),
            epsilon: 1.0,
            label: label.into(),
        }
    }

    pub fn kind(&self) -> TrackKind {
        match self.source {
            TrackSource::Tabulated { .. } => TrackKind::Tabulated,
            _ => TrackKind::Analytic,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Characteristic rate; 1 for tabulated and user tracks.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Time range over which the track is defined.
    pub fn domain(&self) -> (f64, f64) {
        match &self.source {
            TrackSource::Tabulated { theta, .. } => theta.range(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn eval(&self, t: f64) -> Result<TrackPoint> {
        match &self.source {
            TrackSource::Analytic(kind) => Ok(analytic_frame(*kind, self.epsilon, t).point),
            TrackSource::Tabulated { theta, phi } => {
                let (min, max) = theta.range();
                if !(t >= min && t <= max) {
                    return Err(Error::OutOfRange { t, min, max });
                }
                let (th, dth, _) = theta.eval(t);
                let (ph, dph, _) = phi.eval(t);
                Ok(TrackPoint {
                    theta: th,
                    phi: ph,
                    dtheta: dth,
                    dphi: dph,
                })
            }
            TrackSource::Custom(f) => Ok(f(t)),
        }
    }

    /// The track point with its trigonometric values.
    pub fn frame(&self, t: f64) -> Result<TrackFrame> {
        match &self.source {
            TrackSource::Analytic(kind) => Ok(analytic_frame(*kind, self.epsilon, t)),
            _ => self.eval(t).map(TrackFrame::from_point),
        }
    }

    /// `alpha(t)`.
    pub fn unit_vector(&self, t: f64) -> Result<[f64; 3]> {
        self.frame(t).map(|f| f.unit_vector())
    }

    /// `d^2 theta/dt^2`, used only at zeros of `sin(phi)`.
    fn theta_curvature(&self, t: f64) -> Result<f64> {
        match &self.source {
            TrackSource::Tabulated { theta, .. } => {
                self.eval(t)?;
                Ok(theta.eval(t).2)
            }
            _ => {
                let h = 1e-5 / self.epsilon;
                Ok((self.eval(t + h)?.dtheta - self.eval(t - h)?.dtheta) / (2.0 * h))
            }
        }
    }
}

fn analytic_frame(kind: AnalyticTrack, eps: f64, t: f64) -> TrackFrame {
    let x = eps * t;
    match kind {
        AnalyticTrack::Model1 => {
            // theta = pi/2 + atan x, phi = 3pi/2 - atan x
            let rate = eps / (1.0 + x * x);
            let c = 1.0 / x.hypot(1.0);
            let point = TrackPoint {
                theta: FRAC_PI_2 + x.atan(),
                phi: 1.5 * PI - x.atan(),
                dtheta: rate,
                dphi: -rate,
            };
            TrackFrame {
                point,
                sin_theta: c,
                cos_theta: -x * c,
                sin_phi: -c,
                cos_phi: -x * c,
            }
        }
        AnalyticTrack::Model2 => {
            // pi/2 - atan(e^{2x}) == atan(e^{-2x}), which keeps precision as theta -> 0
            let s = sech(2.0 * x);
            let point = TrackPoint {
                theta: (-2.0 * x).exp().atan(),
                phi: 2.0 * (2.0 * x).exp().atan(),
                dtheta: -eps * s,
                dphi: 2.0 * eps * s,
            };
            // tan(theta) = e^{-2x}; pick the form that cannot overflow.
            let (sin_theta, cos_theta) = if x >= 0.0 {
                let u = (-2.0 * x).exp();
                let r = u.hypot(1.0);
                (u / r, 1.0 / r)
            } else {
                let w = (2.0 * x).exp();
                let r = w.hypot(1.0);
                (1.0 / r, w / r)
            };
            TrackFrame {
                point,
                sin_theta,
                cos_theta,
                sin_phi: s,
                cos_phi: -(2.0 * x).tanh(),
            }
        }
        AnalyticTrack::Model3 | AnalyticTrack::Model3Literal => {
            let sign = if kind == AnalyticTrack::Model3 {
                1.0
            } else {
                -1.0
            };
            let s = sech(2.0 * x);
            let tau = x.tanh();
            let point = TrackPoint {
                // arccos(tanh 2x) == 2 atan(e^{-2x})
                theta: 2.0 * (-2.0 * x).exp().atan(),
                phi: FRAC_PI_2 + sign * tau.atan(),
                dtheta: -2.0 * eps * s,
                dphi: sign * eps * s,
            };
            let r = tau.hypot(1.0);
            TrackFrame {
                point,
                sin_theta: s,
                cos_theta: (2.0 * x).tanh(),
                sin_phi: 1.0 / r,
                cos_phi: -sign * tau / r,
            }
        }
    }
}

/// The exact invariant track of a built-in protocol.
///
/// Model 3 uses `phi = pi/2 + atan(tanh(eps t))`, the sign that reproduces its closed-form
/// field; see [`literal_model3_track`] for the opposite sign.
pub fn builtin_track(id: ProtocolId, epsilon: f64) -> Result<AngleTrack> {
    check_positive("epsilon", epsilon)?;
    let kind = match id {
        ProtocolId::Model1 => AnalyticTrack::Model1,
        ProtocolId::Model2 => AnalyticTrack::Model2,
        ProtocolId::Model3 => AnalyticTrack::Model3,
        ProtocolId::Lz { .. } => return Err(Error::NoExactTrack),
    };
    Ok(AngleTrack {
        source: TrackSource::Analytic(kind),
        epsilon,
        label: id.name().to_string(),
    })
}

/// Model 3 with `phi = pi/2 - atan(tanh(eps t))`. This track is not an invariant of the
/// model-3 field; it exists as a negative control for the invariant checker.
pub fn literal_model3_track(epsilon: f64) -> Result<AngleTrack> {
    check_positive("epsilon", epsilon)?;
    Ok(AngleTrack {
        source: TrackSource::Analytic(AnalyticTrack::Model3Literal),
        epsilon,
        label: "model3-literal".to_string(),
    })
}

fn engineered_omega(track: &AngleTrack, t: f64) -> Result<(f64, f64)> {
    let TrackFrame {
        point: p,
        sin_theta,
        cos_theta,
        sin_phi,
        cos_phi,
    } = track.frame(t)?;

    let omega_x = if sin_phi.abs() > SINGULAR_SIN {
        -p.dtheta / sin_phi
    } else {
        // Both numerator and denominator vanish: -theta'' / (phi' cos phi).
        let scale = 1.0 + p.dphi.abs();
        if p.dtheta.abs() > 1e-9 * scale {
            return Err(Error::SingularTrack { t });
        }
        let limit = -track.theta_curvature(t)? / (p.dphi * cos_phi);
        if !limit.is_finite() {
            return Err(Error::SingularTrack { t });
        }
        limit
    };

    let coupling = omega_x * cos_phi;
    let omega_z = if sin_theta.abs() > SINGULAR_SIN {
        p.dphi + coupling * cos_theta / sin_theta
    } else if coupling.abs() <= 1e-12 * (1.0 + p.dphi.abs()) {
        p.dphi
    } else {
        return Err(Error::DomainError { t });
    };
    Ok((omega_x, omega_z))
}

/// The field whose dynamics keeps `I(t) = alpha(t) . J` invariant.
pub fn engineer(track: &AngleTrack) -> DrivingField {
    DrivingField {
        epsilon: track.epsilon,
        label: format!("engineered({})", track.label),
        source: FieldSource::Engineered(track.clone()),
    }
}

/// Unit vector along the field.
pub fn field_orientation(field: &DrivingField, t: f64) -> Result<[f64; 3]> {
    let (x, z) = field.omega(t)?;
    let norm = x.hypot(z);
    if !(norm > 0.0) {
        return Err(Error::ZeroField { t });
    }
    Ok([x / norm, 0.0, z / norm])
}

/// `theta_h = arccos(omega_z / |Omega|)`, meaningful for `omega_x >= 0`.
pub fn field_polar_angle(field: &DrivingField, t: f64) -> Result<f64> {
    let [_, _, z] = field_orientation(field, t)?;
    Ok(z.clamp(-1.0, 1.0).acos())
}

/// `|cot(theta_h) - cos(phi) cot(theta)|` at `-horizon` and `+horizon`.
pub fn asymptotic_relation_residual(
    track: &AngleTrack,
    field: &DrivingField,
    horizon: f64,
) -> Result<(f64, f64)> {
    check_positive("horizon", horizon)?;
    let at = |t: f64| -> Result<f64> {
        let [x, _, z] = field_orientation(field, t)?;
        let cot_h = z / x;
        let f = track.frame(t)?;
        Ok((cot_h - f.cos_phi * f.cos_theta / f.sin_theta).abs())
    };
    Ok((at(-horizon)?, at(horizon)?))
}

/// Validated `(t, theta, phi)` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSamples {
    t: Vec<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

pub const TRACK_HEADER: &str = "t,theta,phi";
const MIN_ROWS: usize = 5;

impl TrackSamples {
    /// Builds samples from rows, reporting line numbers as if the rows followed a header.
    pub fn new(rows: Vec<(f64, f64, f64)>) -> Result<Self> {
        if rows.len() < MIN_ROWS {
            return Err(Error::MalformedSamples {
                line: rows.len() + 1,
                reason: format!("need at least {MIN_ROWS} rows, found {}", rows.len()),
            });
        }
        for (i, (t, th, ph)) in rows.iter().enumerate() {
            if !(t.is_finite() && th.is_finite() && ph.is_finite()) {
                return Err(Error::MalformedSamples {
                    line: i + 2,
                    reason: "non-finite value".to_string(),
                });
            }
            if i > 0 && !(*t > rows[i - 1].0) {
                return Err(Error::NonMonotonic { line: i + 2 });
            }
        }
        Ok(TrackSamples {
            t: rows.iter().map(|r| r.0).collect(),
            theta: rows.iter().map(|r| r.1).collect(),
            phi: rows.iter().map(|r| r.2).collect(),
        })
    }

    /// Parses the `t,theta,phi` text format. A single trailing newline is allowed.
    /// Further columns after the first three (such as the `alpha_*` columns written by
    /// the CLI `track` command) are ignored, but every row must have the header's width.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut lines = body.split('\n');
        let header = lines.next().unwrap_or_default();
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 3 || columns[..3].join(",") != TRACK_HEADER {
            return Err(Error::MalformedSamples {
                line: 1,
                reason: format!("expected header '{TRACK_HEADER}', found '{header}'"),
            });
        }
        let mut rows = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::MalformedSamples {
                    line: line_no,
                    reason: format!("expected {} fields, found {}", columns.len(), fields.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse::<f64>().map_err(|_| Error::MalformedSamples {
                    line: line_no,
                    reason: format!("not a number: '{f}'"),
                })?;
            }
            rows.push((vals[0], vals[1], vals[2]));
        }
        TrackSamples::new(rows)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    /// Renders the text format, one row per line with a trailing newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACK_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e}\n",
                self.t[i], self.theta[i], self.phi[i]
            ));
        }
        out
    }
}

/// Piecewise-cubic interpolation (natural end conditions) of sampled angles.
pub fn tabulated_track(samples: &TrackSamples) -> AngleTrack {
    AngleTrack {
        source: TrackSource::Tabulated {
            theta: Arc::new(CubicSpline::natural(
                samples.t.clone(),
                samples.theta.clone(),
            )),
            phi: Arc::new(CubicSpline::natural(samples.t.clone(), samples.phi.clone())),
        },
        epsilon: 1.0,
        label: "tabulated".to_string(),
    }
}

/// Samples an angle track on `n` evenly spaced times over `[t_min, t_max]`.
pub fn sample_track(track: &AngleTrack, t_min: f64, t_max: f64, n: usize) -> Result<TrackSamples> {
    let rows = crate::grid(t_min, t_max, n)
        .map(|t| track.eval(t).map(|p| (t, p.theta, p.phi)))
        .collect::<Result<Vec<_>>>()?;
    TrackSamples::new(rows)
}
