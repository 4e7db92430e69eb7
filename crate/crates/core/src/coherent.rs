//! Coherent product states |α⟩ ⊗ |z} and their matrix elements.
//!
//! The field part is a Glauber state per mode. The matter part is the
//! symmetric U(n) coherent state ∝ (Σ zᵢ bᵢ†)^N |0⟩ with complex homogeneous
//! coordinates z; for two levels z = (cos θ/2, sin θ/2 e^{iφ}), so that
//! ζ = z₂/z₁ = tan(θ/2) e^{iφ}.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::BasisIndex;
use crate::error::{invalid, Error, Result};
use crate::model::{Configuration, ModelConfig};
use crate::state::StateVector;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Field amplitudes per mode and homogeneous matter coordinates per level.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentParams {
    pub field: Vec<Complex64>,
    pub matter: Vec<Complex64>,
}

/// Two-level parametrisation: field quadratures and Bloch angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelAngles {
    pub q: f64,
    pub p: f64,
    pub theta: f64,
    pub phi: f64,
}

impl TwoLevelAngles {
    pub fn new(q: f64, p: f64, theta: f64, phi: f64) -> Self {
        TwoLevelAngles { q, p, theta, phi }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.q, self.p) / std::f64::consts::SQRT_2
    }

    pub fn params(&self) -> CoherentParams {
        let (s, c) = (0.5 * self.theta).sin_cos();
        CoherentParams {
            field: vec![self.alpha()],
            matter: vec![Complex64::new(c, 0.0), Complex64::from_polar(s, self.phi)],
        }
    }
}

impl CoherentParams {
    pub fn new(field: Vec<Complex64>, matter: Vec<Complex64>) -> Result<Self> {
        let n: f64 = matter.iter().map(|z| z.norm_sqr()).sum();
        if !(n > 0.0) || !n.is_finite() || field.iter().any(|a| !a.is_finite()) {
            return invalid("coherent parameters must be finite with nonzero matter vector");
        }
        Ok(CoherentParams { field, matter })
    }

    /// Matter coordinates scaled to unit norm.
    pub fn unit_matter(&self) -> Vec<Complex64> {
        let n = self.matter.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        self.matter.iter().map(|z| z / n).collect()
    }

    /// Mean photon number per mode.
    pub fn photons(&self) -> Vec<f64> {
        self.field.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Mean level populations.
    pub fn populations(&self, atoms: u32) -> Vec<f64> {
        self.unit_matter().iter().map(|z| atoms as f64 * z.norm_sqr()).collect()
    }
}

/// Overlap and Hamiltonian matrix element between two coherent product states.
#[derive(Clone, Copy, Debug)]
pub struct Elements {
    pub overlap: Complex64,
    pub hamiltonian: Complex64,
}

fn check(cfg: &ModelConfig, a: &CoherentParams) -> Result<()> {
    if a.field.len() != cfg.n_modes() || a.matter.len() != cfg.n_levels() {
        return invalid("coherent parameters do not match the model's modes and levels");
    }
    Ok(())
}

fn field_overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut s = ZERO;
    for (x, y) in a.iter().zip(b) {
        s += -0.5 * x.norm_sqr() - 0.5 * y.norm_sqr() + x.conj() * y;
    }
    s.exp()
}

/// `⟨a|b⟩` and `⟨a|H|b⟩` in closed form for normalised product states.
pub fn elements(cfg: &ModelConfig, a: &CoherentParams, b: &CoherentParams) -> Result<Elements> {
    check(cfg, a)?;
    check(cfg, b)?;
    let za = a.unit_matter();
    let zb = b.unit_matter();
    let n = cfg.atoms;
    let nf = n as f64;
    let fo = field_overlap(&a.field, &b.field);
    let s: Complex64 = za.iter().zip(&zb).map(|(x, y)| x.conj() * y).sum();
    let s_n = s.powu(n);
    let s_n1 = s.powu(n - 1);
    let mut h = ZERO;
    for (m, w) in cfg.modes.iter().enumerate() {
        h += *w * a.field[m].conj() * b.field[m] * s_n;
    }
    let mut atom = ZERO;
    for (i, w) in cfg.omega.iter().enumerate() {
        atom += *w * za[i].conj() * zb[i];
    }
    h += nf * s_n1 * atom;
    let pref = cfg.configuration.interaction_sign() / nf.sqrt();
    for c in &cfg.couplings {
        let (j, k, m) = (c.lower, c.upper, c.mode);
        // A_jk = b_j† b_k, A_kj = b_k† b_j
        let a_jk = za[j].conj() * zb[k];
        let a_kj = za[k].conj() * zb[j];
        let ac = a.field[m].conj();
        let bf = b.field[m];
        let t = if cfg.rwa { ac * a_jk + bf * a_kj } else { (ac + bf) * (a_jk + a_kj) };
        h += pref * c.mu * nf * s_n1 * t;
    }
    Ok(Elements { overlap: fo * s_n, hamiltonian: fo * h })
}

/// `⟨a|D|b⟩` for a diagonal number operator `D = Σ c_m ν_m + Σ w_i A_ii`.
pub fn number_element(cfg: &ModelConfig, a: &CoherentParams, b: &CoherentParams, photon_w: &[f64], level_w: &[f64]) -> Complex64 {
    let za = a.unit_matter();
    let zb = b.unit_matter();
    let n = cfg.atoms;
    let fo = field_overlap(&a.field, &b.field);
    let s: Complex64 = za.iter().zip(&zb).map(|(x, y)| x.conj() * y).sum();
    let mut v = ZERO;
    for (m, c) in photon_w.iter().enumerate() {
        v += *c * a.field[m].conj() * b.field[m] * s.powu(n);
    }
    let mut at = ZERO;
    for (i, w) in level_w.iter().enumerate() {
        at += *w * za[i].conj() * zb[i];
    }
    v += n as f64 * s.powu(n - 1) * at;
    fo * v
}

/// Overlap `⟨a|b⟩` of two normalised product states of `atoms` atoms.
pub fn overlap(a: &CoherentParams, b: &CoherentParams, atoms: u32) -> Complex64 {
    let za = a.unit_matter();
    let zb = b.unit_matter();
    let s: Complex64 = za.iter().zip(&zb).map(|(x, y)| x.conj() * y).sum();
    field_overlap(&a.field, &b.field) * s.powu(atoms)
}

/// Energy `⟨a|H|a⟩` of a coherent product state.
pub fn coherent_energy(cfg: &ModelConfig, a: &CoherentParams) -> Result<f64> {
    Ok(elements(cfg, a, a)?.hamiltonian.re)
}

/// Table of ln k! for k ≤ n.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// Log-magnitude and phase of each amplitude on `basis`; `None` marks an
/// exact zero.
pub fn log_amplitudes(params: &CoherentParams, basis: &BasisIndex) -> Vec<Option<(f64, f64)>> {
    let z = params.unit_matter();
    let n = basis.atoms() as usize;
    let max_ph = (0..basis.dim()).flat_map(|i| basis.photons(i).iter().copied()).max().unwrap_or(0) as usize;
    let lf = ln_factorials(n.max(max_ph) + 1);
    let base: f64 = -0.5 * params.field.iter().map(|a| a.norm_sqr()).sum::<f64>() + 0.5 * lf[n];
    let mut out = Vec::with_capacity(basis.dim());
    'states: for i in 0..basis.dim() {
        let mut ln_mag = base;
        let mut phase = 0.0;
        let factors = basis.photons(i).iter().zip(&params.field).chain(basis.occupations(i).iter().zip(&z));
        for (&k, w) in factors {
            if k > 0 {
                if w.norm() == 0.0 {
                    out.push(None);
                    continue 'states;
                }
                ln_mag += k as f64 * w.norm().ln() - 0.5 * lf[k as usize];
                phase += k as f64 * w.arg();
            }
        }
        out.push(Some((ln_mag, phase)));
    }
    out
}

/// Amplitudes of the coherent product state on `basis` and the captured norm.
pub fn coherent_amplitudes(params: &CoherentParams, basis: &BasisIndex) -> (Vec<Complex64>, f64) {
    let amps: Vec<Complex64> = log_amplitudes(params, basis)
        .into_iter()
        .map(|a| a.map_or(ZERO, |(m, ph)| Complex64::from_polar(m.exp(), ph)))
        .collect();
    let captured = amps.iter().map(|c| c.norm_sqr()).sum();
    (amps, captured)
}

/// Largest tolerated norm lost to the photon cutoff.
pub const TRUNCATION_DEFICIT: f64 = 1e-10;

/// Truncated coherent product state on a full (unrestricted) basis.
pub fn coherent_state(params: &CoherentParams, cfg: &ModelConfig, basis: &Arc<BasisIndex>) -> Result<StateVector> {
    check(cfg, params)?;
    let (amps, captured) = coherent_amplitudes(params, basis);
    if 1.0 - captured > TRUNCATION_DEFICIT {
        return Err(Error::Truncation(format!("coherent state loses norm {:.3e} to the cutoff", 1.0 - captured)));
    }
    StateVector::new(basis.clone(), amps)
}

fn two_level_check(cfg: &ModelConfig) -> Result<()> {
    if cfg.configuration != Configuration::TwoLevel {
        return Err(Error::Configuration("closed forms need the two-level model".into()));
    }
    Ok(())
}

/// Closed-form energy surface of the two-level model,
/// `½Ω(p²+q²) - jω_A cos θ + 2√j γ q sin θ cos φ` (RWA:
/// `√j γ sin θ (q cos φ + p sin φ)`), plus the level midpoint `N(ω₁+ω₂)/2`.
pub fn energy_surface_2level(t: &TwoLevelAngles, cfg: &ModelConfig) -> Result<f64> {
    two_level_check(cfg)?;
    let j = 0.5 * cfg.atoms as f64;
    let w_a = cfg.omega[1] - cfg.omega[0];
    let mid = j * (cfg.omega[0] + cfg.omega[1]);
    let big_omega = cfg.modes[0];
    let gamma = cfg.couplings.first().map_or(0.0, |c| c.mu);
    let (st, ct) = t.theta.sin_cos();
    let inter = if cfg.rwa {
        j.sqrt() * gamma * st * (t.q * t.phi.cos() + t.p * t.phi.sin())
    } else {
        2.0 * j.sqrt() * gamma * t.q * st * t.phi.cos()
    };
    Ok(mid + 0.5 * big_omega * (t.p * t.p + t.q * t.q) - j * w_a * ct + inter)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    NormalNorth,
    NormalSouth,
    Collective,
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub angles: TwoLevelAngles,
    pub params: CoherentParams,
    /// Total energy.
    pub energy: f64,
    /// Expected total excitation ⟨Λ⟩.
    pub lambda_c: f64,
    pub region: Region,
}

/// Critical coupling of the two-level model: `½√(Ωω_A)` with counter-rotating
/// terms, `√(Ωω_A)` under the RWA.
pub fn gamma_critical(cfg: &ModelConfig) -> Result<f64> {
    two_level_check(cfg)?;
    let w_a = cfg.omega[1] - cfg.omega[0];
    let r = (cfg.modes[0] * w_a).sqrt();
    Ok(if cfg.rwa { r } else { 0.5 * r })
}

/// Closed-form critical points of the two-level surface, lowest energy first.
/// Both poles are always stationary; the collective pair (φ = 0, π) exists
/// when `γ > γ_c`.
pub fn critical_points_2level(cfg: &ModelConfig) -> Result<Vec<CriticalPoint>> {
    two_level_check(cfg)?;
    let n = cfg.atoms as f64;
    let j = 0.5 * n;
    let w_a = cfg.omega[1] - cfg.omega[0];
    let mid = j * (cfg.omega[0] + cfg.omega[1]);
    let om = cfg.modes[0];
    let gamma = cfg.couplings.first().map_or(0.0, |c| c.mu);
    let g = if cfg.rwa { gamma } else { 2.0 * gamma };
    let mk = |t: TwoLevelAngles, energy: f64, lambda_c: f64, region| CriticalPoint {
        angles: t,
        params: t.params(),
        energy,
        lambda_c,
        region,
    };
    let mut out = vec![
        mk(TwoLevelAngles::new(0.0, 0.0, 0.0, 0.0), mid - j * w_a, 0.0, Region::NormalNorth),
        mk(TwoLevelAngles::new(0.0, 0.0, std::f64::consts::PI, 0.0), mid + j * w_a, n, Region::NormalSouth),
    ];
    if g != 0.0 {
        let x = om * w_a / (g * g);
        if x.abs() < 1.0 {
            let theta = x.acos();
            let st = theta.sin();
            let amp = if cfg.rwa { j.sqrt() * gamma * st / om } else { 2.0 * j.sqrt() * gamma * st / om };
            let e = mid - n * (g.powi(4) + om * om * w_a * w_a) / (4.0 * om * g * g);
            for phi in [0.0, std::f64::consts::PI] {
                let q = -amp * phi.cos();
                let lam = 0.5 * q * q + j * (1.0 - x);
                out.push(mk(TwoLevelAngles::new(q, 0.0, theta, phi), e, lam, Region::Collective));
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_basis, Sector};
    use crate::operator::build_hamiltonian;
    use crate::state::expectation;

    #[test]
    fn surface_matches_state_vector_and_elements() {
        for rwa in [false, true] {
            let cfg = ModelConfig::two_level(0.8, 1.2, 0.45, 6, rwa, 40).unwrap();
            let b = Arc::new(enumerate_basis(&cfg, &Sector::All).unwrap());
            let h = build_hamiltonian(&cfg, &b).unwrap();
            let t = TwoLevelAngles::new(0.7, -0.4, 1.1, 0.6);
            let psi = coherent_state(&t.params(), &cfg, &b).unwrap();
            let e_vec = expectation(&psi, &h).unwrap();
            let e_cf = energy_surface_2level(&t, &cfg).unwrap();
            let e_el = coherent_energy(&cfg, &t.params()).unwrap();
            assert!((e_vec - e_cf).abs() < 1e-9, "rwa={rwa}: {e_vec} vs {e_cf}");
            assert!((e_el - e_cf).abs() < 1e-10);
        }
    }
}
