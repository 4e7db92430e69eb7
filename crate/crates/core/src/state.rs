//! Normalised state vectors and the observables computed from them.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::BasisIndex;
use crate::error::{invalid, Error, Result};
use crate::operator::SparseOperator;

#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<BasisIndex>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Normalises `amps`; fails on a zero vector or a length mismatch.
    pub fn new(basis: Arc<BasisIndex>, mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return invalid("cannot normalise a zero vector");
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(StateVector { basis, amps })
    }

    /// Basis state `i`.
    pub fn unit(basis: Arc<BasisIndex>, i: usize) -> Result<Self> {
        let mut a = vec![Complex64::new(0.0, 0.0); basis.dim()];
        *a.get_mut(i).ok_or_else(|| Error::InvalidParameter("index outside basis".into()))? = Complex64::new(1.0, 0.0);
        Self::new(basis, a)
    }

    pub fn basis(&self) -> &Arc<BasisIndex> {
        &self.basis
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    fn check_op(&self, a: &SparseOperator) -> Result<()> {
        if a.fingerprint() != self.basis.fingerprint() || a.dim() != self.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    /// Express the state in a larger basis containing every occupied state.
    pub fn embed(&self, target: &Arc<BasisIndex>) -> Result<StateVector> {
        let mut a = vec![Complex64::new(0.0, 0.0); target.dim()];
        for (i, &x) in self.amps.iter().enumerate() {
            match target.index_of(self.basis.state(i)) {
                Some(j) => a[j] = x,
                None if x.norm() > 1e-14 => return Err(Error::BasisMismatch),
                None => {}
            }
        }
        StateVector::new(target.clone(), a)
    }
}

pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.basis.fingerprint() != b.basis.fingerprint() || a.dim() != b.dim() {
        return Err(Error::BasisMismatch);
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Overlap of states on possibly different bases, matched state by state.
pub fn inner_across(a: &StateVector, b: &StateVector) -> Complex64 {
    if a.basis.fingerprint() == b.basis.fingerprint() {
        return a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    }
    let mut s = Complex64::new(0.0, 0.0);
    for (i, x) in a.amps.iter().enumerate() {
        if let Some(j) = b.basis.index_of(a.basis.state(i)) {
            s += x.conj() * b.amps[j];
        }
    }
    s
}

/// `⟨ψ|A|ψ⟩`; the imaginary part must vanish.
pub fn expectation(psi: &StateVector, a: &SparseOperator) -> Result<f64> {
    psi.check_op(a)?;
    let av = a.mul_vec(&psi.amps);
    let v: Complex64 = psi.amps.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
    if v.im.abs() > 1e-10 * v.re.abs().max(1.0) {
        return invalid(format!("expectation has imaginary part {:.3e}", v.im));
    }
    Ok(v.re)
}

/// `⟨A²⟩ - ⟨A⟩²`, clamped at zero.
pub fn fluctuation(psi: &StateVector, a: &SparseOperator) -> Result<f64> {
    psi.check_op(a)?;
    let av = a.mul_vec(&psi.amps);
    let m: Complex64 = psi.amps.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
    let sq: f64 = av.iter().map(|y| y.norm_sqr()).sum();
    Ok((sq - m.re * m.re).max(0.0))
}

/// Pure-state fidelity `|⟨ψ₁|ψ₂⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr().min(1.0))
}

/// Fidelity susceptibility `2(1 - F)/δλ²`.
pub fn susceptibility(f: f64, dlam: f64) -> Result<f64> {
    if dlam == 0.0 || !dlam.is_finite() {
        return invalid("parameter step must be nonzero");
    }
    Ok((2.0 * (1.0 - f) / (dlam * dlam)).max(0.0))
}
