//! The Lewis-Riesenfeld invariant, the exact solution it generates, and the numerical
//! propagators used to check it.
//!
//! For an angle track with unit vector `alpha(t)` the invariant is `I(t) = alpha . J`. Its
//! eigenstates are
//!
//! ```text
//! |phi_m(t)> = exp(i (pi - phi) J_z) exp(i theta J_y) |m>
//! ```
//!
//! and `exp(i Phi_m(t, t0)) |phi_m(t)>` solves the Schrodinger equation, where
//! `Phi_m = integral of <phi_m| i d/dt - H |phi_m>`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::protocols::{AngleTrack, DrivingField};
use crate::quadrature;
use crate::spin::{ComplexMatrix, QuantumState, SpinRepresentation};

/// Default absolute tolerance for the LR phase quadrature.
pub const DEFAULT_PHASE_TOL: f64 = 1e-11;

/// Step of the five-point central difference inside the phase integrand, in units of
/// `1/epsilon`.
pub const PHASE_DIFF_STEP: f64 = 1e-3;

/// A real 3-vector on (or near) the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector([x, y, z])
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn dot(&self, other: &[f64; 3]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `alpha(t) = (sin theta cos phi, sin theta sin phi, cos theta)`.
pub fn invariant_vector(track: &AngleTrack, t: f64) -> Result<BlochVector> {
    Ok(BlochVector(track.unit_vector(t)?))
}

/// `I(t) = alpha(t) . J`.
pub fn invariant_operator(
    rep: &SpinRepresentation,
    track: &AngleTrack,
    t: f64,
) -> Result<ComplexMatrix> {
    Ok(rep.spin_operator(invariant_vector(track, t)?.0))
}

/// `H(t) = omega_x J_x + omega_z J_z`.
pub fn hamiltonian(
    rep: &SpinRepresentation,
    field: &DrivingField,
    t: f64,
) -> Result<ComplexMatrix> {
    Ok(rep.spin_operator(field.vector(t)?))
}

/// Frobenius norm of `i (I(t+h) - I(t-h)) / 2h - [H(t), I(t)]`.
pub fn invariant_residual(
    rep: &SpinRepresentation,
    field: &DrivingField,
    track: &AngleTrack,
    t: f64,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
        });
    }
    let forward = invariant_operator(rep, track, t + h)?;
    let backward = invariant_operator(rep, track, t - h)?;
    let scale = Complex64::new(0.0, 1.0 / (2.0 * h));
    let derivative = (forward - backward).map(|z| z * scale);
    let h_t = hamiltonian(rep, field, t)?;
    let i_t = invariant_operator(rep, track, t)?;
    let comm = &h_t * &i_t - &i_t * &h_t;
    Ok((derivative - comm).norm())
}

/// `Omega x alpha = (-omega_z a_y, omega_z a_x - omega_x a_z, omega_x a_y)`.
pub fn precession_rhs(field: &DrivingField, a: &BlochVector, t: f64) -> Result<[f64; 3]> {
    Ok(cross(field.vector(t)?, a.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPropagation {
    pub vector: BlochVector,
    /// Largest `| |a| - |a0| |` seen over the run.
    pub norm_drift: f64,
    pub steps: usize,
}

/// Fixed-step classical RK4 for `d alpha/dt = Omega x alpha`.
pub fn propagate_bloch(
    field: &DrivingField,
    a0: BlochVector,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<BlochPropagation> {
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
        });
    }
    let dt = (t1 - t0) / steps as f64;
    let rhs = |t: f64, a: [f64; 3]| -> Result<[f64; 3]> { Ok(cross(field.vector(t)?, a)) };
    let axpy =
        |a: [f64; 3], k: [f64; 3], s: f64| [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2]];

    let start_norm = a0.norm();
    let mut a = a0.0;
    let mut drift: f64 = 0.0;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let k1 = rhs(t, a)?;
        let k2 = rhs(t + 0.5 * dt, axpy(a, k1, 0.5 * dt))?;
        let k3 = rhs(t + 0.5 * dt, axpy(a, k2, 0.5 * dt))?;
        let k4 = rhs(t + dt, axpy(a, k3, dt))?;
        for i in 0..3 {
            a[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        drift = drift.max((BlochVector(a).norm() - start_norm).abs());
    }
    Ok(BlochPropagation {
        vector: BlochVector(a),
        norm_drift: drift,
        steps,
    })
}

/// `exp(i (pi - phi) J_z) exp(i theta J_y) |m>`, with no further rephasing.
pub fn lr_eigenstate(
    rep: &SpinRepresentation,
    track: &AngleTrack,
    m: f64,
    t: f64,
) -> Result<QuantumState> {
    let k = rep.spin().index_of(m)?;
    let p = track.eval(t)?;
    Ok(rotated_basis_state(rep, p.theta, PI - p.phi, k))
}

fn rotated_basis_state(
    rep: &SpinRepresentation,
    y_angle: f64,
    z_angle: f64,
    k: usize,
) -> QuantumState {
    let column = rep.rotation_y(y_angle).column(k).into_owned();
    let jz = rep.jz();
    let amplitudes = DVector::from_fn(rep.dim(), |r, _| {
        column[r] * Complex64::from_polar(1.0, z_angle * jz[(r, r)].re)
    });
    QuantumState::from_amplitudes(amplitudes)
}

/// The integrand `<phi_m| i d/dt - H |phi_m>` at `t`.
pub fn lr_phase_rate(
    rep: &SpinRepresentation,
    track: &AngleTrack,
    field: &DrivingField,
    m: f64,
    t: f64,
) -> Result<f64> {
    let h = PHASE_DIFF_STEP / track.epsilon();
    let here = lr_eigenstate(rep, track, m, t)?;
    let at = |s: f64| lr_eigenstate(rep, track, m, s).map(QuantumState::into_amplitudes);
    let (ahead, behind) = (at(t + h)?, at(t - h)?);
    let (ahead2, behind2) = (at(t + 2.0 * h)?, at(t - 2.0 * h)?);
    let v = here.amplitudes();
    let derivative = ((ahead - behind) * Complex64::new(8.0, 0.0) - (ahead2 - behind2))
        / Complex64::new(12.0 * h, 0.0);
    // Re(i <phi|d phi>) = -Im <phi|d phi>
    let geometric = -v.dotc(&derivative).im;
    let energy = v.dotc(&rep.apply_spin_operator(field.vector(t)?, v)).re;
    Ok(geometric - energy)
}

/// The LR total phase `Phi_m(t, t0)` by adaptive quadrature to absolute error `tol`.
pub fn lr_phase(
    rep: &SpinRepresentation,
    track: &AngleTrack,
    field: &DrivingField,
    m: f64,
    t0: f64,
    t: f64,
    tol: f64,
) -> Result<f64> {
    rep.spin().index_of(m)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    if !(t >= t0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
        });
    }
    let integral = quadrature::integrate(|s| lr_phase_rate(rep, track, field, m, s), t0, t, tol)?;
    Ok(integral.value)
}

/// `exp(i Phi_m(t, t0)) |phi_m(t)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LRSolution {
    pub m: f64,
    pub phase: f64,
    pub state: QuantumState,
    pub t0: f64,
    pub t: f64,
}

pub fn lr_solution(
    rep: &SpinRepresentation,
    track: &AngleTrack,
    field: &DrivingField,
    m: f64,
    t0: f64,
    t: f64,
) -> Result<LRSolution> {
    let phase = lr_phase(rep, track, field, m, t0, t, DEFAULT_PHASE_TOL)?;
    let state = lr_eigenstate(rep, track, m, t)?.with_phase(phase);
    Ok(LRSolution {
        m,
        phase,
        state,
        t0,
        t,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Rescale to unit norm after every step.
    pub renormalize: bool,
    /// Estimate the local error of every step by step doubling (three times the work).
    pub estimate_error: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub state: QuantumState,
    /// Largest `| ||psi|| - 1 |` over all steps, measured before any renormalization.
    pub norm_drift: f64,
    pub steps: usize,
    pub max_local_error: Option<f64>,
}

struct Schrodinger<'a> {
    rep: &'a SpinRepresentation,
    field: &'a DrivingField,
}

impl Schrodinger<'_> {
    fn rhs(&self, t: f64, psi: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let h_psi = self.rep.apply_spin_operator(self.field.vector(t)?, psi);
        Ok(h_psi * Complex64::new(0.0, -1.0))
    }

    fn step(&self, t: f64, dt: f64, psi: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let half = Complex64::new(0.5 * dt, 0.0);
        let full = Complex64::new(dt, 0.0);
        let k1 = self.rhs(t, psi)?;
        let k2 = self.rhs(t + 0.5 * dt, &(psi + &k1 * half))?;
        let k3 = self.rhs(t + 0.5 * dt, &(psi + &k2 * half))?;
        let k4 = self.rhs(t + dt, &(psi + &k3 * full))?;
        let incr = (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
        Ok(psi + incr)
    }
}

/// Fixed-step classical RK4 for `i d psi/dt = H(t) psi`.
pub fn propagate_schrodinger(
    rep: &SpinRepresentation,
    field: &DrivingField,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<PropagationResult> {
    propagate_schrodinger_with(
        rep,
        field,
        psi0,
        t0,
        t1,
        steps,
        PropagationOptions::default(),
    )
}

pub fn propagate_schrodinger_with(
    rep: &SpinRepresentation,
    field: &DrivingField,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    steps: usize,
    options: PropagationOptions,
) -> Result<PropagationResult> {
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
        });
    }
    if psi0.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            left: psi0.dim(),
            right: rep.dim(),
        });
    }
    let system = Schrodinger { rep, field };
    let dt = (t1 - t0) / steps as f64;
    let mut psi = psi0.amplitudes().clone();
    let mut drift: f64 = 0.0;
    let mut local: Option<f64> = options.estimate_error.then_some(0.0);
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let next = system.step(t, dt, &psi)?;
        if let Some(worst) = local.as_mut() {
            let mid = system.step(t, 0.5 * dt, &psi)?;
            let fine = system.step(t + 0.5 * dt, 0.5 * dt, &mid)?;
            // Richardson estimate for a fourth-order method
            *worst = worst.max((&fine - &next).norm() / 15.0);
        }
        psi = next;
        let norm = psi.norm();
        drift = drift.max((norm - 1.0).abs());
        if options.renormalize {
            psi.unscale_mut(norm);
        }
    }
    Ok(PropagationResult {
        state: QuantumState::from_amplitudes(psi),
        norm_drift: drift,
        steps,
        max_local_error: local,
    })
}

/// `exp(-i theta_h J_y) |m>`, the eigenvector of `H(t)` with eigenvalue `m |Omega(t)|`.
pub fn adiabatic_state(
    rep: &SpinRepresentation,
    field: &DrivingField,
    m: f64,
    t: f64,
) -> Result<QuantumState> {
    let k = rep.spin().index_of(m)?;
    let (x, z) = field.omega(t)?;
    if x < 0.0 {
        return Err(Error::NegativeXField { t });
    }
    let norm = x.hypot(z);
    if !(norm > 0.0) {
        return Err(Error::ZeroField { t });
    }
    let theta_h = (z / norm).clamp(-1.0, 1.0).acos();
    Ok(rotated_basis_state(rep, -theta_h, 0.0, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{
        builtin_field, builtin_track, literal_model3_track, ProtocolId, TrackPoint,
    };
    use crate::spin::{fidelity, Spin};
    use approx::assert_abs_diff_eq;

    const EPS: f64 = 0.8;

    fn model(id: ProtocolId) -> (DrivingField, AngleTrack) {
        (
            builtin_field(id, EPS).unwrap(),
            builtin_track(id, EPS).unwrap(),
        )
    }

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn invariant_vector_examples() {
        let (_, t1) = model(ProtocolId::Model1);
        assert!(close(
            invariant_vector(&t1, 0.0).unwrap().0,
            [0.0, -1.0, 0.0],
            1e-15
        ));
        let (_, t3) = model(ProtocolId::Model3);
        assert!(close(
            invariant_vector(&t3, 60.0).unwrap().0,
            [0.0, 0.0, 1.0],
            1e-12
        ));
        assert!(close(
            invariant_vector(&t3, -60.0).unwrap().0,
            [0.0, 0.0, -1.0],
            1e-12
        ));
    }

    #[test]
    fn invariant_operator_examples() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let (_, track) = model(ProtocolId::Model1);
        let i0 = invariant_operator(&rep, &track, 0.0).unwrap();
        assert!((i0 + rep.jy()).norm() < 1e-15);
        // coefficients of the model-1 invariant at eps t = 1
        let i1 = invariant_operator(&rep, &track, 1.0 / EPS).unwrap();
        let expected = rep.spin_operator([-0.5, -0.5, -1.0 / 2f64.sqrt()]);
        assert!((i1 - expected).norm() < 1e-15);
        let eig = invariant_operator(&rep, &track, 0.37)
            .unwrap()
            .symmetric_eigen();
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(values[0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(values[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn invariant_residual_small_for_exact_pairs() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let (field, track) = model(ProtocolId::Model1);
        let h = 1e-5 / EPS;
        for x in [-2.0, 0.0, 2.0] {
            let r = invariant_residual(&rep, &field, &track, x / EPS, h).unwrap();
            assert!(r < 1e-8 * EPS, "{r}");
        }
    }

    #[test]
    fn invariant_residual_catches_literal_model3() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let field = builtin_field(ProtocolId::Model3, EPS).unwrap();
        let literal = literal_model3_track(EPS).unwrap();
        let r = invariant_residual(&rep, &field, &literal, 0.0, 1e-5 / EPS).unwrap();
        assert!(r >= 0.5 * EPS, "{r}");
    }

    #[test]
    fn precession_rhs_examples() {
        let (f3, _) = model(ProtocolId::Model3);
        let r = precession_rhs(&f3, &BlochVector::new(0.0, 1.0, 0.0), 0.0).unwrap();
        assert!(close(r, [-EPS, 0.0, 2.0 * EPS], 1e-15));
        let (f1, _) = model(ProtocolId::Model1);
        let r = precession_rhs(&f1, &BlochVector::new(0.0, -1.0, 0.0), 0.0).unwrap();
        assert!(close(r, [-EPS, 0.0, -EPS], 1e-15));
        let [x, _, z] = f1.vector(0.3).unwrap();
        let r = precession_rhs(&f1, &BlochVector::new(2.0 * x, 0.0, 2.0 * z), 0.3).unwrap();
        assert!(close(r, [0.0; 3], 1e-15));
    }

    #[test]
    fn bloch_zero_field_and_norm() {
        let a0 = BlochVector::new(0.6, 0.0, 0.8);
        let out = propagate_bloch(&DrivingField::constant(0.0, 0.0), a0, -1.0, 1.0, 10).unwrap();
        assert_eq!(out.vector, a0);
        let (f3, _) = model(ProtocolId::Model3);
        let out = propagate_bloch(&f3, a0, -5.0, 5.0, 4000).unwrap();
        assert!((out.vector.norm() - 1.0).abs() < 1e-9);
        assert!(out.norm_drift < 1e-9);
    }

    #[test]
    fn bloch_follows_invariant_vector() {
        for id in [ProtocolId::Model1, ProtocolId::Model2, ProtocolId::Model3] {
            let (field, track) = model(id);
            let (t0, t1) = (-3.0 / EPS, 2.0 / EPS);
            let a0 = invariant_vector(&track, t0).unwrap();
            let out = propagate_bloch(&field, a0, t0, t1, 20000).unwrap();
            let expected = invariant_vector(&track, t1).unwrap();
            assert!(
                close(out.vector.0, expected.0, 1e-9),
                "{id}: {:?} vs {:?}",
                out.vector,
                expected
            );
        }
    }

    #[test]
    fn lr_eigenstate_is_eigenvector() {
        for j in [0.5, 1.0, 1.5] {
            let rep = SpinRepresentation::new(j).unwrap();
            for id in [ProtocolId::Model1, ProtocolId::Model2, ProtocolId::Model3] {
                let (_, track) = model(id);
                for t in [-2.3, 0.0, 0.9] {
                    let inv = invariant_operator(&rep, &track, t).unwrap();
                    for m in rep.spin().m_values() {
                        let phi = lr_eigenstate(&rep, &track, m, t).unwrap();
                        let v = phi.amplitudes();
                        let defect = (&inv * v - v * Complex64::new(m, 0.0)).norm();
                        assert!(defect < 1e-10, "j={j} {id} t={t} m={m}: {defect}");
                    }
                }
            }
        }
    }

    #[test]
    fn lr_eigenstate_at_pole_is_basis_state() {
        let rep = SpinRepresentation::new(1.0).unwrap();
        let track = AngleTrack::from_fn("pole", |_| TrackPoint {
            theta: 0.0,
            phi: PI,
            dtheta: 0.0,
            dphi: 0.0,
        });
        for m in [1.0, 0.0, -1.0] {
            let phi = lr_eigenstate(&rep, &track, m, 0.0).unwrap();
            let basis = QuantumState::basis(rep.spin(), m).unwrap();
            assert_abs_diff_eq!(fidelity(&phi, &basis).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert!(matches!(
            lr_eigenstate(&rep, &track, 0.5, 0.0),
            Err(Error::InvalidM { .. })
        ));
    }

    #[test]
    fn model2_early_eigenstates_are_x_states() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let (_, track) = model(ProtocolId::Model2);
        let s = 0.5f64.sqrt();
        for (m, sign) in [(0.5, 1.0), (-0.5, -1.0)] {
            let phi = lr_eigenstate(&rep, &track, m, -40.0).unwrap();
            let target = QuantumState::from_amplitudes(DVector::from_vec(vec![
                Complex64::new(s, 0.0),
                Complex64::new(sign * s, 0.0),
            ]));
            assert_abs_diff_eq!(fidelity(&phi, &target).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn expectation_identity() {
        for j in [0.5, 1.0] {
            let rep = SpinRepresentation::new(j).unwrap();
            for id in [ProtocolId::Model1, ProtocolId::Model2, ProtocolId::Model3] {
                let (_, track) = model(id);
                for t in [-1.7, 0.2, 3.1] {
                    let alpha = invariant_vector(&track, t).unwrap().0;
                    for m in rep.spin().m_values() {
                        let phi = lr_eigenstate(&rep, &track, m, t).unwrap();
                        let e = rep.expectation(&phi);
                        assert!(close(e, alpha.map(|a| m * a), 1e-10));
                    }
                }
            }
        }
    }

    #[test]
    fn phase_rate_matches_connection_formula() {
        // i<phi_m|d phi_m> = m phi' cos(theta), so the rate is m (phi' cos theta - Omega . alpha)
        let rep = SpinRepresentation::new(1.5).unwrap();
        for id in [ProtocolId::Model1, ProtocolId::Model2, ProtocolId::Model3] {
            let (field, track) = model(id);
            for t in [-1.1, 0.0, 0.45] {
                let p = track.eval(t).unwrap();
                let dot: f64 = p
                    .unit_vector()
                    .iter()
                    .zip(field.vector(t).unwrap())
                    .map(|(a, b)| a * b)
                    .sum();
                for m in rep.spin().m_values() {
                    let rate = lr_phase_rate(&rep, &track, &field, m, t).unwrap();
                    let expected = m * (p.dphi * p.theta.cos() - dot);
                    assert!(
                        (rate - expected).abs() < 1e-8,
                        "{id} t={t} m={m}: {rate} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn lr_phase_argument_checks() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let (field, track) = model(ProtocolId::Model1);
        assert!(lr_phase(&rep, &track, &field, 0.5, 1.0, 0.0, 1e-10).is_err());
        assert!(lr_phase(&rep, &track, &field, 0.5, 0.0, 1.0, 0.0).is_err());
        assert!(lr_phase(&rep, &track, &field, 1.0, 0.0, 1.0, 1e-10).is_err());
        let one = SpinRepresentation::new(1.0).unwrap();
        let zero = lr_phase(&one, &track, &field, 0.0, -3.0, 2.0, 1e-10).unwrap();
        assert!(zero.abs() < 1e-12);
    }

    #[test]
    fn lr_solution_at_start() {
        let rep = SpinRepresentation::new(1.0).unwrap();
        let (field, track) = model(ProtocolId::Model3);
        let sol = lr_solution(&rep, &track, &field, 1.0, 0.4, 0.4).unwrap();
        assert_eq!(sol.phase, 0.0);
        assert_eq!(sol.state, lr_eigenstate(&rep, &track, 1.0, 0.4).unwrap());
    }

    #[test]
    fn lr_solution_carries_dynamical_phase() {
        // the exact solution must match the propagated state including its phase
        let rep = SpinRepresentation::new(0.5).unwrap();
        let (field, track) = model(ProtocolId::Model3);
        let (t0, t1) = (-1.0, 1.5);
        let psi0 = lr_eigenstate(&rep, &track, 0.5, t0).unwrap();
        let numeric = propagate_schrodinger(&rep, &field, &psi0, t0, t1, 20000).unwrap();
        let exact = lr_solution(&rep, &track, &field, 0.5, t0, t1).unwrap();
        let diff = (numeric.state.amplitudes() - exact.state.amplitudes()).norm();
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn schrodinger_trivial_cases() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let up = QuantumState::basis(rep.spin(), 0.5).unwrap();
        let psi = QuantumState::from_amplitudes(DVector::from_vec(vec![
            Complex64::new(0.6, 0.1),
            Complex64::new(0.0, (1.0f64 - 0.37).sqrt()),
        ]));
        let out =
            propagate_schrodinger(&rep, &DrivingField::constant(0.0, 0.0), &psi, 0.0, 3.0, 17)
                .unwrap();
        assert_eq!(out.state, psi);

        let tau = 2.5;
        let out =
            propagate_schrodinger(&rep, &DrivingField::constant(0.0, EPS), &up, 0.0, tau, 2000)
                .unwrap();
        let expected = Complex64::from_polar(1.0, -EPS * tau / 2.0);
        assert!((out.state.amplitudes()[0] - expected).norm() < 1e-12);
        assert_eq!(out.state.amplitudes()[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn schrodinger_options() {
        let rep = SpinRepresentation::new(1.0).unwrap();
        let (field, _) = model(ProtocolId::Model1);
        let psi0 = QuantumState::basis(rep.spin(), 1.0).unwrap();
        let opts = PropagationOptions {
            renormalize: true,
            estimate_error: true,
        };
        let out = propagate_schrodinger_with(&rep, &field, &psi0, -5.0, 5.0, 200, opts).unwrap();
        assert!((out.state.norm() - 1.0).abs() < 1e-14);
        let err = out.max_local_error.unwrap();
        assert!(err > 0.0 && err < 1e-4, "{err}");
        assert!(propagate_schrodinger(&rep, &field, &psi0, 0.0, 1.0, 0).is_err());
        let wrong = QuantumState::basis(Spin::new(0.5).unwrap(), 0.5).unwrap();
        assert!(propagate_schrodinger(&rep, &field, &wrong, 0.0, 1.0, 5).is_err());
    }

    #[test]
    fn adiabatic_state_is_eigenvector_of_h() {
        for j in [0.5, 1.0, 1.5] {
            let rep = SpinRepresentation::new(j).unwrap();
            for id in [ProtocolId::Model1, ProtocolId::Model2, ProtocolId::Model3] {
                let (field, _) = model(id);
                for t in [-2.0, -0.1, 0.0, 1.3] {
                    let h = hamiltonian(&rep, &field, t).unwrap();
                    let [x, _, z] = field.vector(t).unwrap();
                    for m in rep.spin().m_values() {
                        let v = adiabatic_state(&rep, &field, m, t)
                            .unwrap()
                            .into_amplitudes();
                        let defect = (&h * &v - &v * Complex64::new(m * x.hypot(z), 0.0)).norm();
                        assert!(defect < 1e-10 * (1.0 + x.hypot(z)), "{defect}");
                    }
                }
            }
        }
    }

    #[test]
    fn adiabatic_state_limits() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let (f1, _) = model(ProtocolId::Model1);
        for t in [-1e5, 1e5] {
            for m in [0.5, -0.5] {
                let s = adiabatic_state(&rep, &f1, m, t).unwrap();
                let basis = QuantumState::basis(rep.spin(), m).unwrap();
                assert_abs_diff_eq!(fidelity(&s, &basis).unwrap(), 1.0, epsilon = 1e-9);
            }
        }
        let (f2, _) = model(ProtocolId::Model2);
        let s = adiabatic_state(&rep, &f2, 0.5, -40.0).unwrap();
        let plus = QuantumState::from_amplitudes(DVector::from_element(
            2,
            Complex64::new(0.5f64.sqrt(), 0.0),
        ));
        assert_abs_diff_eq!(fidelity(&s, &plus).unwrap(), 1.0, epsilon = 1e-12);

        assert!(matches!(
            adiabatic_state(&rep, &DrivingField::constant(-1.0, 0.0), 0.5, 0.0),
            Err(Error::NegativeXField { .. })
        ));
        assert!(matches!(
            adiabatic_state(&rep, &DrivingField::constant(0.0, 0.0), 0.5, 0.0),
            Err(Error::ZeroField { .. })
        ));
    }
}
