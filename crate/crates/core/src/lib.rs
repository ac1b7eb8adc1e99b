//! Exactly solvable driven spin-j systems built by reverse engineering.
//!
//! A driving field `H(t) = omega_x(t) J_x + omega_z(t) J_z` is synthesized from a
//! prescribed track of the Lewis-Riesenfeld invariant `I(t) = alpha(t) . J`. The crate
//! then provides the exact nonadiabatic solution, a numerical propagator to check it
//! against, adiabatic and nonadiabatic energy levels, and detection of nonadiabatic
//! level crossings through the orthogonality of `alpha(t)` and the field direction.
//!
//! - [`spin`]: angular-momentum matrices, rotations and trace inner products.
//! - [`protocols`]: built-in fields and tracks, the track-to-field map, tabulated tracks.
//! - [`dynamics`]: invariant checks, LR eigenstates and phase, RK4 propagation.
//! - [`spectra`]: energy levels, crossing detection, anomaly classification, Landau-Zener.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod protocols;
pub mod quadrature;
pub mod spectra;
pub mod spin;
mod spline;

pub use error::{Error, Result};
pub use protocols::{
    builtin_field, builtin_track, engineer, literal_model3_track, tabulated_track, AngleTrack,
    DrivingField, ProtocolId, TrackFrame, TrackPoint, TrackSamples,
};
pub use spin::{fidelity, ComplexMatrix, QuantumState, Spin, SpinRepresentation};

pub use num_complex::Complex64;

/// `n` evenly spaced points from `start` to `end` inclusive.
///
/// Points are computed as a weighted mean of the endpoints, so a symmetric range with an
/// odd `n` hits zero exactly.
pub fn grid(start: f64, end: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    let last = n.saturating_sub(1).max(1) as f64;
    (0..n).map(move |i| {
        let k = i as f64;
        ((last - k) * start + k * end) / last
    })
}

#[cfg(test)]
mod tests {
    #[test]
    fn grid_is_symmetric() {
        let g: Vec<f64> = super::grid(-6.0, 6.0, 1201).collect();
        assert_eq!(g.len(), 1201);
        assert_eq!(g[0], -6.0);
        assert_eq!(g[600], 0.0);
        assert_eq!(g[1200], 6.0);
    }
}
