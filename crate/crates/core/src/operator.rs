//! Sparse Hermitian operators over a [`BasisIndex`] and the Hamiltonian,
//! charge and parity builders.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::basis::{parity_of, BasisIndex};
use crate::error::{invalid, Error, Result};
use crate::model::ModelConfig;

/// Compressed sparse row matrix with complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    fingerprint: u64,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    /// Assemble from triplets; duplicates are summed and explicit zeros dropped.
    pub fn from_triplets(basis: &BasisIndex, triplets: Vec<(usize, usize, Complex64)>) -> Self {
        Self::from_triplets_raw(basis.dim(), basis.fingerprint(), triplets)
    }

    fn from_triplets_raw(dim: usize, fingerprint: u64, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                rows.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != Complex64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator { dim, fingerprint, row_ptr, cols: keep_cols, vals: keep_vals }
    }

    pub fn diagonal(basis: &BasisIndex, d: &[f64]) -> Self {
        let t = d.iter().enumerate().map(|(i, &x)| (i, i, Complex64::new(x, 0.0))).collect();
        Self::from_triplets(basis, t)
    }

    pub fn identity(basis: &BasisIndex) -> Self {
        Self::diagonal(basis, &vec![1.0; basis.dim()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        (0..self.dim).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => self.vals[lo + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k].re * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        y
    }

    /// Largest `|A_rc - conj(A_cr)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                err = err.max((v - self.get(c, r).conj()).norm());
            }
        }
        err
    }

    pub fn scaled(&self, s: f64) -> SparseOperator {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= s;
        }
        out
    }

    /// `Σ w_i A_i` over operators on the same basis.
    pub fn linear_combination(terms: &[(&SparseOperator, f64)]) -> Result<SparseOperator> {
        let first = terms.first().ok_or_else(|| Error::InvalidParameter("empty combination".into()))?.0;
        let mut t = Vec::new();
        for (op, w) in terms {
            if op.fingerprint != first.fingerprint || op.dim != first.dim {
                return Err(Error::BasisMismatch);
            }
            if *w == 0.0 {
                continue;
            }
            for r in 0..op.dim {
                for (c, v) in op.row(r) {
                    t.push((r, c, v * *w));
                }
            }
        }
        Ok(Self::from_triplets_raw(first.dim, first.fingerprint, t))
    }

    pub fn matmul(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.fingerprint != other.fingerprint || self.dim != other.dim {
            return Err(Error::BasisMismatch);
        }
        let mut t = Vec::new();
        for r in 0..self.dim {
            let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *acc.entry(c).or_insert(Complex64::new(0.0, 0.0)) += a * b;
                }
            }
            t.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        Ok(Self::from_triplets_raw(self.dim, self.fingerprint, t))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Frobenius norm of `[A, B]`.
pub fn commutator_norm(a: &SparseOperator, b: &SparseOperator) -> Result<f64> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(SparseOperator::linear_combination(&[(&ab, 1.0), (&ba, -1.0)])?.frobenius_norm())
}

/// Hamiltonian split as `H = H₀ + Σ_c μ_c V_c`, so that coupling scans reuse
/// one assembly per basis.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub free: SparseOperator,
    /// Unit-strength interaction per coupling, including sign and 1/√N.
    pub interactions: Vec<SparseOperator>,
}

impl HamiltonianParts {
    pub fn new(cfg: &ModelConfig, basis: &BasisIndex) -> Result<Self> {
        cfg.validate()?;
        if basis.n_modes() != cfg.n_modes() || basis.n_levels() != cfg.n_levels() || basis.atoms() != cfg.atoms {
            return Err(Error::BasisMismatch);
        }
        let free: Vec<f64> = (0..basis.dim())
            .map(|i| {
                let ph = basis.photons(i);
                let oc = basis.occupations(i);
                let f: f64 = cfg.modes.iter().zip(ph).map(|(w, &n)| w * n as f64).sum();
                let a: f64 = cfg.omega.iter().zip(oc).map(|(w, &n)| w * n as f64).sum();
                f + a
            })
            .collect();
        let free = SparseOperator::diagonal(basis, &free);
        let pref = cfg.configuration.interaction_sign() / (cfg.atoms as f64).sqrt();
        let l = cfg.n_modes();
        let mut interactions = Vec::with_capacity(cfg.couplings.len());
        for c in &cfg.couplings {
            let mut t = Vec::new();
            for i in 0..basis.dim() {
                let s = basis.state(i);
                let nj = s[l + c.lower];
                let nk = s[l + c.upper];
                if nj == 0 {
                    continue;
                }
                // A_kj raises lower -> upper
                let atom = ((nj as f64) * (nk as f64 + 1.0)).sqrt();
                let mut target = s.to_vec();
                target[l + c.lower] -= 1;
                target[l + c.upper] += 1;
                let nu = s[c.mode];
                // absorb a photon: a A_kj
                if nu > 0 {
                    let mut t2 = target.clone();
                    t2[c.mode] -= 1;
                    if let Some(j) = basis.index_of(&t2) {
                        let v = Complex64::new(pref * atom * (nu as f64).sqrt(), 0.0);
                        t.push((j, i, v));
                        t.push((i, j, v.conj()));
                    }
                }
                // emit a photon while raising: a† A_kj (counter-rotating)
                if !cfg.rwa {
                    let mut t2 = target.clone();
                    t2[c.mode] += 1;
                    if let Some(j) = basis.index_of(&t2) {
                        let v = Complex64::new(pref * atom * (nu as f64 + 1.0).sqrt(), 0.0);
                        t.push((j, i, v));
                        t.push((i, j, v.conj()));
                    }
                }
            }
            interactions.push(SparseOperator::from_triplets(basis, t));
        }
        Ok(HamiltonianParts { free, interactions })
    }

    pub fn assemble(&self, mu: &[f64]) -> Result<SparseOperator> {
        if mu.len() != self.interactions.len() {
            return invalid(format!("{} couplings given for {} terms", mu.len(), self.interactions.len()));
        }
        let mut terms = vec![(&self.free, 1.0)];
        terms.extend(self.interactions.iter().zip(mu).map(|(v, &m)| (v, m)));
        SparseOperator::linear_combination(&terms)
    }
}

/// Total Hamiltonian of `cfg` on `basis`.
pub fn build_hamiltonian(cfg: &ModelConfig, basis: &BasisIndex) -> Result<SparseOperator> {
    HamiltonianParts::new(cfg, basis)?.assemble(&cfg.mu())
}

/// Hamiltonian with every coupling multiplied by the matching entry of
/// `signs`; negative entries give the sign-flipped model.
pub fn build_hamiltonian_signed(cfg: &ModelConfig, basis: &BasisIndex, signs: &[f64]) -> Result<SparseOperator> {
    let mu: Vec<f64> = cfg.mu().iter().zip(signs).map(|(m, s)| m * s).collect();
    if mu.len() != cfg.couplings.len() {
        return invalid("one sign per coupling required");
    }
    HamiltonianParts::new(cfg, basis)?.assemble(&mu)
}

/// Conserved quantities of `cfg`: the atom number and the excitation charges.
pub fn constants_of_motion(cfg: &ModelConfig, basis: &BasisIndex) -> Vec<(String, SparseOperator)> {
    let mut out = vec![("N".to_string(), SparseOperator::diagonal(basis, &vec![cfg.atoms as f64; basis.dim()]))];
    for k in cfg.charges() {
        let d: Vec<f64> =
            (0..basis.dim()).map(|i| k.value(basis.photons(i), basis.occupations(i)) as f64).collect();
        out.push((k.name.clone(), SparseOperator::diagonal(basis, &d)));
    }
    out
}

/// Photon-number operator of one mode.
pub fn photon_number(basis: &BasisIndex, mode: usize) -> SparseOperator {
    let d: Vec<f64> = (0..basis.dim()).map(|i| basis.photons(i)[mode] as f64).collect();
    SparseOperator::diagonal(basis, &d)
}

/// Population operator `A_ii` of one level.
pub fn population(basis: &BasisIndex, level: usize) -> SparseOperator {
    let d: Vec<f64> = (0..basis.dim()).map(|i| basis.occupations(i)[level] as f64).collect();
    SparseOperator::diagonal(basis, &d)
}

/// `exp(iπK)` for one charge.
pub fn parity_operator(cfg: &ModelConfig, basis: &BasisIndex, charge: usize) -> Result<SparseOperator> {
    let k = cfg.charges();
    let k = k.get(charge).ok_or_else(|| Error::InvalidParameter(format!("no charge {charge}")))?;
    let d: Vec<f64> = (0..basis.dim())
        .map(|i| parity_of(k.value(basis.photons(i), basis.occupations(i))) as f64)
        .collect();
    Ok(SparseOperator::diagonal(basis, &d))
}

/// `Π_i ½(1 + σ_i exp(iπK_i))`.
pub fn parity_projector(cfg: &ModelConfig, basis: &BasisIndex, parities: &[i8]) -> Result<SparseOperator> {
    let k = cfg.charges();
    if parities.len() != k.len() {
        return invalid(format!("{} parities given for {} symmetries", parities.len(), k.len()));
    }
    if parities.iter().any(|&p| p != 1 && p != -1) {
        return invalid("parities must be ±1");
    }
    let d: Vec<f64> = (0..basis.dim())
        .map(|i| {
            let inside = k
                .iter()
                .zip(parities)
                .all(|(q, &s)| parity_of(q.value(basis.photons(i), basis.occupations(i))) == s);
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(SparseOperator::diagonal(basis, &d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_basis, Sector};

    #[test]
    fn linear_combination_and_get() {
        let cfg = ModelConfig::two_level(1.0, 1.0, 0.3, 2, false, 3).unwrap();
        let b = enumerate_basis(&cfg, &Sector::All).unwrap();
        let h = build_hamiltonian(&cfg, &b).unwrap();
        let parts = HamiltonianParts::new(&cfg, &b).unwrap();
        let h2 = parts.assemble(&[0.3]).unwrap();
        assert_eq!(h, h2);
        assert!(h.hermiticity_error() < 1e-15);
        let z = SparseOperator::linear_combination(&[(&h, 1.0), (&h2, -1.0)]).unwrap();
        assert_eq!(z.nnz(), 0);
    }
}
