//! Spin-j angular-momentum matrices and the small dense linear algebra built on them.
//!
//! The basis is ordered by descending magnetic quantum number, so index `k`
//! carries `m = j - k` and `J_z = diag(j, j-1, ..., -j)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-10;

/// A half-integer spin label, stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !(j > 0.0) || !j.is_finite() || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Spin {
            twice: twice.round() as u32,
        })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin { twice })
    }

    pub fn j(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// `m = j, j-1, ..., -j`.
    pub fn m_values(self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.j() - k as f64).collect()
    }

    /// Basis index of `m`, rejecting values outside the multiplet.
    pub fn index_of(self, m: f64) -> Result<usize> {
        let k = self.j() - m;
        let kr = k.round();
        if !m.is_finite() || (k - kr).abs() > 1e-9 || kr < 0.0 || kr > self.twice as f64 {
            return Err(Error::InvalidM { m, j: self.j() });
        }
        Ok(kr as usize)
    }

    /// `tr(J_i J_i) = j(j+1)(2j+1)/3`.
    pub fn trace_metric(self) -> f64 {
        let j = self.j();
        j * (j + 1.0) * (2.0 * j + 1.0) / 3.0
    }
}

/// The `(2j+1)`-dimensional irreducible representation of the angular-momentum algebra.
///
/// The eigendecomposition of `J_y` is cached so that `y` rotations are cheap;
/// `J_z` is diagonal and needs none.
#[derive(Debug, Clone)]
pub struct SpinRepresentation {
    spin: Spin,
    jx: ComplexMatrix,
    jy: ComplexMatrix,
    jz: ComplexMatrix,
    jy_vectors: ComplexMatrix,
    jy_values: Vec<f64>,
}

impl SpinRepresentation {
    pub fn new(j: f64) -> Result<Self> {
        Ok(Self::from_spin(Spin::new(j)?))
    }

    pub fn from_spin(spin: Spin) -> Self {
        let j = spin.j();
        let n = spin.dim();
        let m = |k: usize| j - k as f64;

        // J_+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; |m+1> sits one index lower.
        let mut jp = ComplexMatrix::zeros(n, n);
        for k in 1..n {
            let mk = m(k);
            jp[(k - 1, k)] = Complex64::new((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm).map(|z| z * 0.5);
        let jy = (&jp - &jm).map(|z| z * Complex64::new(0.0, -0.5));
        let jz =
            ComplexMatrix::from_diagonal(&DVector::from_fn(n, |k, _| Complex64::new(m(k), 0.0)));

        let eig = jy.clone().symmetric_eigen();
        SpinRepresentation {
            spin,
            jx,
            jy,
            jz,
            jy_vectors: eig.eigenvectors,
            jy_values: eig.eigenvalues.iter().copied().collect(),
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn j(&self) -> f64 {
        self.spin.j()
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn jx(&self) -> &ComplexMatrix {
        &self.jx
    }

    pub fn jy(&self) -> &ComplexMatrix {
        &self.jy
    }

    pub fn jz(&self) -> &ComplexMatrix {
        &self.jz
    }

    /// `v_x J_x + v_y J_y + v_z J_z`.
    pub fn spin_operator(&self, v: [f64; 3]) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |r, c| {
            self.jx[(r, c)] * v[0] + self.jy[(r, c)] * v[1] + self.jz[(r, c)] * v[2]
        })
    }

    /// `(v . J) psi` without forming the matrix.
    pub fn apply_spin_operator(&self, v: [f64; 3], psi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = &self.jx * psi * Complex64::new(v[0], 0.0);
        if v[1] != 0.0 {
            out += &self.jy * psi * Complex64::new(v[1], 0.0);
        }
        // J_z is diagonal
        for (k, z) in out.iter_mut().enumerate() {
            *z += psi[k] * (self.jz[(k, k)].re * v[2]);
        }
        out
    }

    /// `exp(i c J_z)`, diagonal.
    pub fn rotation_z(&self, c: f64) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_diagonal(&DVector::from_fn(n, |k, _| {
            Complex64::from_polar(1.0, c * self.jz[(k, k)].re)
        }))
    }

    /// `exp(i c J_y)` from the cached spectral decomposition.
    pub fn rotation_y(&self, c: f64) -> ComplexMatrix {
        spectral_exp(&self.jy_vectors, &self.jy_values, c)
    }

    /// `<psi| J |psi>` as a real 3-vector.
    pub fn expectation(&self, psi: &QuantumState) -> [f64; 3] {
        let v = psi.amplitudes();
        let ev = |op: &ComplexMatrix| v.dotc(&(op * v)).re;
        [ev(&self.jx), ev(&self.jy), ev(&self.jz)]
    }

    /// Largest Frobenius-norm defect over the commutation, trace and Hermiticity identities.
    pub fn structural_defect(&self) -> f64 {
        let i = Complex64::i();
        let ops = [&self.jx, &self.jy, &self.jz];
        let mut worst: f64 = 0.0;
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let comm = commutator_unchecked(ops[a], ops[b]);
            worst = worst.max((comm - ops[c].map(|z| z * i)).norm());
        }
        let metric = self.spin.trace_metric();
        for (a, op) in ops.iter().enumerate() {
            worst = worst.max(op.trace().norm());
            worst = worst.max((*op - op.adjoint()).norm());
            for (b, other) in ops.iter().enumerate() {
                let expected = if a == b { metric } else { 0.0 };
                worst = worst.max(((*op * *other).trace() - expected).norm());
            }
        }
        worst
    }
}

fn spectral_exp(vectors: &ComplexMatrix, values: &[f64], c: f64) -> ComplexMatrix {
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::from_polar(1.0, c * l)),
    );
    let mut scaled = vectors.clone();
    for (col, p) in phases.iter().enumerate() {
        scaled.column_mut(col).scale_mut_complex(*p);
    }
    scaled * vectors.adjoint()
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, p: Complex64);
}

impl<S> ScaleComplex for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, p: Complex64) {
        for z in self.iter_mut() {
            *z *= p;
        }
    }
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: a.ncols(),
        });
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(())
}

fn commutator_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// `ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(commutator_unchecked(a, b))
}

/// `tr(a^dagger b)`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    check_dims(a, b)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `exp(i c g)` for Hermitian `g`, via its spectral decomposition.
pub fn unitary_from_generator(g: &ComplexMatrix, c: f64) -> Result<ComplexMatrix> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch {
            left: g.nrows(),
            right: g.ncols(),
        });
    }
    let defect = (g - g.adjoint()).norm();
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { defect });
    }
    let eig = g.clone().symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    Ok(spectral_exp(&eig.eigenvectors, &values, c))
}

/// A state vector in the `J_z` eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<Complex64>,
}

impl QuantumState {
    /// Wraps amplitudes as given; no normalization is applied.
    pub fn from_amplitudes(amplitudes: DVector<Complex64>) -> Self {
        QuantumState { amplitudes }
    }

    /// The coordinate vector `|m>`.
    pub fn basis(spin: Spin, m: f64) -> Result<Self> {
        let k = spin.index_of(m)?;
        let mut v = DVector::zeros(spin.dim());
        v[k] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes: v })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        self.amplitudes.unscale_mut(n);
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        QuantumState {
            amplitudes: self
                .amplitudes
                .map(|z| z * Complex64::from_polar(1.0, phase)),
        }
    }

    /// Populations `|<m|psi>|^2` in basis order.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `min over gamma of ||a - e^{i gamma} b||`, computed elementwise so it does not
/// lose precision the way `sqrt(1 - fidelity)` does.
pub fn phase_aligned_distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    let overlap = b.inner(a)?;
    let align = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok((a.amplitudes() - b.amplitudes() * align).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn spin_half_jz_is_diag() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        assert_eq!(rep.jz()[(0, 0)], c(0.5, 0.0));
        assert_eq!(rep.jz()[(1, 1)], c(-0.5, 0.0));
        assert_eq!(rep.jz()[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn spin_half_trace_metric() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        assert_abs_diff_eq!((rep.jx() * rep.jx()).trace().re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn spin_one_commutator_defect() {
        let rep = SpinRepresentation::new(1.0).unwrap();
        let comm = commutator(rep.jx(), rep.jy()).unwrap();
        let defect = (comm - rep.jz().map(|z| z * Complex64::i())).norm();
        assert!(defect < 1e-14, "{defect}");
    }

    #[test]
    fn rejects_bad_spin() {
        for j in [0.0, -0.5, 0.3, f64::NAN, 1.25] {
            assert!(
                matches!(SpinRepresentation::new(j), Err(Error::InvalidSpin(_))),
                "{j}"
            );
        }
    }

    #[test]
    fn spin_operator_axes() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        assert_eq!(rep.spin_operator([0.0, 0.0, 1.0]), *rep.jz());
        let x = rep.spin_operator([1.0, 0.0, 0.0]);
        assert_eq!(x[(0, 1)], c(0.5, 0.0));
        assert_eq!(x[(1, 0)], c(0.5, 0.0));
        assert_eq!(x[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn commutator_examples() {
        let half = SpinRepresentation::new(0.5).unwrap();
        let comm = commutator(half.jx(), half.jy()).unwrap();
        assert!((comm - half.jz().map(|z| z * Complex64::i())).norm() < 1e-15);
        assert!(commutator(half.jx(), half.jx()).unwrap().norm() == 0.0);

        let one = SpinRepresentation::new(1.0).unwrap();
        let comm = commutator(one.jy(), one.jz()).unwrap();
        assert!((comm - one.jx().map(|z| z * Complex64::i())).norm() < 1e-14);

        assert!(matches!(
            commutator(half.jx(), one.jx()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn frobenius_examples() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        assert_abs_diff_eq!(
            frobenius_inner(rep.jx(), rep.jx()).unwrap().re,
            0.5,
            epsilon = 1e-15
        );
        for j in [0.5, 1.0, 1.5, 2.0] {
            let rep = SpinRepresentation::new(j).unwrap();
            assert!(frobenius_inner(rep.jx(), rep.jz()).unwrap().norm() < 1e-14);
        }
        let a = [0.3, -0.4, 0.5];
        let w = [1.2, 0.0, -0.7];
        let dot: f64 = a.iter().zip(&w).map(|(x, y)| x * y).sum();
        let got = frobenius_inner(&rep.spin_operator(a), &rep.spin_operator(w)).unwrap();
        assert_abs_diff_eq!(got.re, dot / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn y_rotation_by_minus_pi_flips_spin_up() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let u = unitary_from_generator(rep.jy(), -PI).unwrap();
        let up = QuantumState::basis(rep.spin(), 0.5).unwrap();
        let out = &u * up.amplitudes();
        assert!((out[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let rep = SpinRepresentation::new(1.5).unwrap();
        let u = unitary_from_generator(rep.jy(), 0.0).unwrap();
        assert!((u - ComplexMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn z_rotation_is_diagonal_phase() {
        let rep = SpinRepresentation::new(0.5).unwrap();
        let u = unitary_from_generator(rep.jz(), PI).unwrap();
        let expected = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from_polar(1.0, PI / 2.0),
            Complex64::from_polar(1.0, -PI / 2.0),
        ]));
        assert!((u - expected).norm() < 1e-15);
        assert!(
            (rep.rotation_z(PI) - unitary_from_generator(rep.jz(), PI).unwrap()).norm() < 1e-15
        );
    }

    #[test]
    fn cached_y_rotation_agrees() {
        let rep = SpinRepresentation::new(2.0).unwrap();
        let a = rep.rotation_y(0.7);
        let b = unitary_from_generator(rep.jy(), 0.7).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian_generator() {
        let mut g = ComplexMatrix::zeros(2, 2);
        g[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            unitary_from_generator(&g, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn m_indexing() {
        let s = Spin::new(1.5).unwrap();
        assert_eq!(s.m_values(), vec![1.5, 0.5, -0.5, -1.5]);
        assert_eq!(s.index_of(-0.5).unwrap(), 2);
        assert!(s.index_of(1.0).is_err());
        assert!(s.index_of(2.5).is_err());
    }

    #[test]
    fn fidelity_basics() {
        let s = Spin::new(0.5).unwrap();
        let up = QuantumState::basis(s, 0.5).unwrap();
        let down = QuantumState::basis(s, -0.5).unwrap();
        let psi = QuantumState::from_amplitudes(DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]));
        assert_abs_diff_eq!(fidelity(&psi, &psi).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(fidelity(&up, &down).unwrap(), 0.0);
        assert_abs_diff_eq!(
            fidelity(&psi, &psi.with_phase(1.234)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(fidelity(&psi, &up).unwrap(), fidelity(&up, &psi).unwrap());
        assert!(phase_aligned_distance(&psi, &psi.with_phase(-2.0)).unwrap() < 1e-15);
        let three = QuantumState::basis(Spin::new(1.0).unwrap(), 0.0).unwrap();
        assert!(fidelity(&up, &three).is_err());
    }
}
