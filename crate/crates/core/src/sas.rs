//! Symmetry-adapted states: coherent product states projected onto a parity
//! sector, plus two related projections.
//!
//! A parity SAS is `Σ_g χ(g) |g·(α, z)⟩` over the group generated by the
//! charge parities `exp(iπK_i)`, which flip the sign of every field mode and
//! level coordinate carrying odd weight in `K_i`. The total-parity variant
//! uses only the single reflection `exp(iπ Σ_i K_i)`, giving the two-term
//! cat state used for the critical-coupling series; for one charge it
//! coincides with the parity SAS. Number projection onto a fixed charge sector is
//! provided for RWA models, where parity alone does not reach the exact
//! ground-state structure.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{enumerate_basis, BasisIndex, Sector};
use crate::coherent::{
    coherent_amplitudes, elements, log_amplitudes, number_element, overlap, CoherentParams, TwoLevelAngles, TRUNCATION_DEFICIT};
use crate::error::{invalid, Error, Result};
use crate::model::{Configuration, ModelConfig};
use crate::operator::{build_hamiltonian, SparseOperator};
use crate::state::{expectation, StateVector};
use crate::variational::{minimize_coherent, minimize_surface, TrialSpace, VARIATIONAL_TOL};

/// Smallest projected norm `⟨a|P|a⟩` accepted before reporting a degenerate
/// projection.
pub const MIN_PROJECTED_NORM: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SasKind {
    /// Projection onto a joint eigenspace of the charge parities.
    Parity,
    /// `(1 ± exp(iπM))|α, z⟩` with `M` the sum of all charges.
    TotalParity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SasParams {
    pub base: CoherentParams,
    /// ±1 per charge for `Parity`, a single sign for `TotalParity`.
    pub parity: Vec<i8>,
    pub kind: SasKind,
}

impl SasParams {
    pub fn new(base: CoherentParams, parity: Vec<i8>, kind: SasKind) -> Self {
        SasParams { base, parity, kind }
    }
}

/// Group elements as (character, transformed product state).
fn components(cfg: &ModelConfig, p: &SasParams) -> Result<Vec<(f64, CoherentParams)>> {
    if p.parity.iter().any(|&s| s != 1 && s != -1) {
        return invalid("parities must be ±1");
    }
    match p.kind {
        SasKind::TotalParity => {
            if p.parity.len() != 1 {
                return invalid("total parity takes a single sign");
            }
            let charges = cfg.charges();
            let mut r = p.base.clone();
            for (m, a) in r.field.iter_mut().enumerate() {
                if charges.iter().map(|k| k.photon_weights[m]).sum::<i64>() % 2 != 0 {
                    *a = -*a;
                }
            }
            for (l, z) in r.matter.iter_mut().enumerate() {
                if charges.iter().map(|k| k.level_weights[l]).sum::<i64>() % 2 != 0 {
                    *z = -*z;
                }
            }
            Ok(vec![(1.0, p.base.clone()), (p.parity[0] as f64, r)])
        }
        SasKind::Parity => {
            let charges = cfg.charges();
            if p.parity.len() != charges.len() {
                return invalid(format!("need {} parities, got {}", charges.len(), p.parity.len()));
            }
            let mut out = Vec::with_capacity(1 << charges.len());
            for g in 0..1usize << charges.len() {
                let mut chi = 1.0;
                let mut t = p.base.clone();
                for (i, k) in charges.iter().enumerate() {
                    if g >> i & 1 == 1 {
                        chi *= p.parity[i] as f64;
                        for (a, &w) in t.field.iter_mut().zip(&k.photon_weights) {
                            if w % 2 != 0 {
                                *a = -*a;
                            }
                        }
                        for (z, &w) in t.matter.iter_mut().zip(&k.level_weights) {
                            if w % 2 != 0 {
                                *z = -*z;
                            }
                        }
                    }
                }
                out.push((chi, t));
            }
            Ok(out)
        }
    }
}

/// Energy and projected norm `‖ψ‖²/|G|²` of the unnormalised superposition.
fn energy_and_norm(cfg: &ModelConfig, p: &SasParams) -> Result<(f64, f64)> {
    let comps = components(cfg, p)?;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for (ca, a) in &comps {
        for (cb, b) in &comps {
            let e = elements(cfg, a, b)?;
            num += ca * cb * e.hamiltonian;
            den += ca * cb * e.overlap;
        }
    }
    let g = comps.len() as f64;
    Ok((num.re / den.re, den.re / (g * g)))
}

/// Energy of a symmetry-adapted state from product-state matrix elements.
pub fn sas_energy(cfg: &ModelConfig, p: &SasParams) -> Result<f64> {
    let (e, norm) = energy_and_norm(cfg, p)?;
    if !(norm > MIN_PROJECTED_NORM) {
        return Err(Error::DegenerateProjection(norm));
    }
    Ok(e)
}

/// Normalised overlap `⟨a|b⟩` of two symmetry-adapted states.
pub fn sas_overlap(cfg: &ModelConfig, a: &SasParams, b: &SasParams) -> Result<Complex64> {
    let ca = components(cfg, a)?;
    let cb = components(cfg, b)?;
    let gram = |x: &[(f64, CoherentParams)], y: &[(f64, CoherentParams)]| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (cx, px) in x {
            for (cy, py) in y {
                s += cx * cy * overlap(px, py, cfg.atoms);
            }
        }
        s
    };
    let na = gram(&ca, &ca).re;
    let nb = gram(&cb, &cb).re;
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::DegenerateProjection(na.min(nb)));
    }
    Ok(gram(&ca, &cb) / (na * nb).sqrt())
}

/// Normalised overlap `⟨c|ψ⟩` of a plain product state with a SAS.
pub fn product_sas_overlap(cfg: &ModelConfig, c: &CoherentParams, b: &SasParams) -> Result<Complex64> {
    let cb = components(cfg, b)?;
    let mut nb = 0.0;
    let mut s = Complex64::new(0.0, 0.0);
    for (x, px) in &cb {
        s += x * overlap(c, px, cfg.atoms);
        for (y, py) in &cb {
            nb += x * y * overlap(px, py, cfg.atoms).re;
        }
    }
    if !(nb > 0.0) {
        return Err(Error::DegenerateProjection(nb));
    }
    Ok(s / nb.sqrt())
}

/// `⟨ψ|D|ψ⟩` for a diagonal number operator with the given weights.
pub fn sas_number(cfg: &ModelConfig, p: &SasParams, photon_w: &[f64], level_w: &[f64]) -> Result<f64> {
    let comps = components(cfg, p)?;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for (ca, a) in &comps {
        for (cb, b) in &comps {
            num += ca * cb * number_element(cfg, a, b, photon_w, level_w);
            den += ca * cb * overlap(a, b, cfg.atoms);
        }
    }
    Ok(num.re / den.re)
}

/// Normalised SAS vector on the full truncated basis of `cfg`.
pub fn sas_state(p: &SasParams, cfg: &ModelConfig, basis: &Arc<BasisIndex>) -> Result<StateVector> {
    let comps = components(cfg, p)?;
    let mut v = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for (c, t) in &comps {
        let (amps, captured) = coherent_amplitudes(t, basis);
        if 1.0 - captured > TRUNCATION_DEFICIT {
            return Err(Error::Truncation(format!("coherent state loses norm {:.3e} to the cutoff", 1.0 - captured)));
        }
        for (x, a) in v.iter_mut().zip(amps) {
            *x += c * a;
        }
    }
    let g = comps.len() as f64;
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>() / (g * g);
    if !(norm > MIN_PROJECTED_NORM) {
        return Err(Error::DegenerateProjection(norm));
    }
    StateVector::new(basis.clone(), v)
}

/// Closed-form parity-SAS energy of the two-level model with
/// counter-rotating terms. With `X = e^{-(p²+q²)} cos^N θ` and the upper sign
/// for the even sector,
/// `E± = [½Ω(p²+q²)(1∓X) - jω_A(cos θ ± X/cos θ) + √(2N)γ(q sin θ cos φ ∓ X p tan θ sin φ)]/(1±X)`,
/// evaluated with `X/cos θ` and `X tan θ` expanded so that `θ = π/2` is regular.
pub fn sas_energy_2level(t: &TwoLevelAngles, parity: i8, cfg: &ModelConfig) -> Result<f64> {
    if cfg.configuration != Configuration::TwoLevel || cfg.rwa {
        return Err(Error::Configuration("closed form needs the two-level model with counter-rotating terms".into()));
    }
    if parity != 1 && parity != -1 {
        return invalid("parity must be ±1");
    }
    let s = parity as f64;
    let n = cfg.atoms as i32;
    let j = 0.5 * cfg.atoms as f64;
    let w_a = cfg.omega[1] - cfg.omega[0];
    let mid = j * (cfg.omega[0] + cfg.omega[1]);
    let om = cfg.modes[0];
    let gamma = cfg.couplings.first().map_or(0.0, |c| c.mu);
    let r2 = t.p * t.p + t.q * t.q;
    let (st, ct) = t.theta.sin_cos();
    let e = (-r2).exp();
    let x = e * ct.powi(n);
    let x_over_cos = e * ct.powi(n - 1);
    let den = 1.0 + s * x;
    if !(0.5 * den > MIN_PROJECTED_NORM) {
        return Err(Error::DegenerateProjection(0.5 * den));
    }
    let field = 0.5 * om * r2 * (1.0 - s * x);
    let atom = -j * w_a * (ct + s * x_over_cos);
    let inter = (2.0 * cfg.atoms as f64).sqrt() * gamma * (t.q * st * t.phi.cos() - s * x_over_cos * t.p * st * t.phi.sin());
    Ok(mid + (field + atom + inter) / den)
}

/// Minimum of one sector.
#[derive(Clone, Debug)]
pub struct SectorMinimum {
    pub parity: Vec<i8>,
    pub params: CoherentParams,
    pub x: Vec<f64>,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct SasMinimum {
    pub kind: SasKind,
    pub sectors: Vec<SectorMinimum>,
    /// Index of the lowest sector; the earliest sector wins ties.
    pub ground: usize,
}

impl SasMinimum {
    pub fn ground(&self) -> &SectorMinimum {
        &self.sectors[self.ground]
    }

    /// Lowest sector of the opposite symmetry to the ground (first excited SAS).
    pub fn first_excited(&self) -> Option<&SectorMinimum> {
        self.sectors
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.ground)
            .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy))
            .map(|(_, s)| s)
    }
}

/// Sign tuples for `kind`: all parity tuples even-first, or (+, -).
pub fn sas_sectors(cfg: &ModelConfig, kind: SasKind) -> Vec<Vec<i8>> {
    match kind {
        SasKind::TotalParity => vec![vec![1], vec![-1]],
        SasKind::Parity => {
            let n = cfg.charges().len();
            (0..1usize << n).map(|b| (0..n).map(|i| if b >> i & 1 == 0 { 1 } else { -1 }).collect()).collect()
        }
    }
}

/// Minimum over one sector, seeded with the trial lattice and `extra`.
pub fn minimize_sas_sector(cfg: &ModelConfig, kind: SasKind, parity: &[i8], extra: &[Vec<f64>], tol: f64) -> Result<SectorMinimum> {
    let space = TrialSpace::new(cfg);
    let closed = cfg.configuration == Configuration::TwoLevel && !cfg.rwa && kind == SasKind::Parity;
    let f = |x: &[f64]| -> f64 {
        let r = if closed {
            let p = space.params(x);
            let theta = 2.0 * p.matter[1].re.atan2(p.matter[0].re);
            let q = std::f64::consts::SQRT_2 * p.field[0].re;
            sas_energy_2level(&TwoLevelAngles::new(q, 0.0, theta, 0.0), parity[0], cfg)
        } else {
            sas_energy(cfg, &SasParams::new(space.params(x), parity.to_vec(), kind))
        };
        r.unwrap_or(f64::INFINITY)
    };
    let mut seeds = space.seeds();
    seeds.extend(extra.iter().cloned());
    let m = minimize_surface(&f, &seeds, &space.step(), tol)?;
    Ok(SectorMinimum { parity: parity.to_vec(), params: space.params(&m.x), x: m.x, energy: m.value })
}

/// SAS minima in every sector. The coherent minimum and its mirror image
/// are added as seeds.
pub fn minimize_sas_kind(cfg: &ModelConfig, kind: SasKind) -> Result<SasMinimum> {
    let coh = minimize_coherent(cfg)?;
    let space = TrialSpace::new(cfg);
    let mut mirror = coh.x.clone();
    mirror[..space.n_modes].iter_mut().for_each(|v| *v = -*v);
    let extra = vec![coh.x.clone(), mirror];
    let mut sectors = Vec::new();
    for parity in sas_sectors(cfg, kind) {
        sectors.push(minimize_sas_sector(cfg, kind, &parity, &extra, VARIATIONAL_TOL)?);
    }
    let mut ground = 0;
    for (i, s) in sectors.iter().enumerate() {
        if s.energy < sectors[ground].energy - 1e-12 * s.energy.abs().max(1.0) {
            ground = i;
        }
    }
    Ok(SasMinimum { kind, sectors, ground })
}

pub fn minimize_sas(cfg: &ModelConfig) -> Result<SasMinimum> {
    minimize_sas_kind(cfg, SasKind::Parity)
}

/// Coherent trial states projected onto a fixed charge sector of an RWA
/// model. Cutoffs are raised to the largest charge value, so the sector basis
/// is complete.
#[derive(Clone, Debug)]
pub struct NumberProjection {
    pub cfg: ModelConfig,
    pub charges: Vec<i64>,
    pub basis: Arc<BasisIndex>,
    pub hamiltonian: SparseOperator,
}

impl NumberProjection {
    pub fn new(cfg: &ModelConfig, charges: &[i64]) -> Result<Self> {
        if !cfg.rwa {
            return Err(Error::Configuration("number projection needs an RWA model".into()));
        }
        let top = charges.iter().copied().max().unwrap_or(0).max(0) as u32;
        let c = cfg.with_cutoffs(&vec![top; cfg.n_modes()]);
        let basis = Arc::new(enumerate_basis(&c, &Sector::Charges(charges.to_vec()))?);
        if basis.is_empty() {
            return Err(Error::InvalidParameter(format!("charge sector {charges:?} is empty")));
        }
        let hamiltonian = build_hamiltonian(&c, &basis)?;
        Ok(NumberProjection { cfg: c, charges: charges.to_vec(), basis, hamiltonian })
    }

    /// Normalised projection of the coherent state; amplitudes are rescaled
    /// in log space, so a small projected weight is not an error.
    pub fn state(&self, params: &CoherentParams) -> Result<StateVector> {
        let logs = log_amplitudes(params, &self.basis);
        let top = logs.iter().flatten().map(|(m, _)| *m).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::DegenerateProjection(0.0));
        }
        let amps = logs
            .into_iter()
            .map(|a| a.map_or(Complex64::new(0.0, 0.0), |(m, ph)| Complex64::from_polar((m - top).exp(), ph)))
            .collect();
        StateVector::new(self.basis.clone(), amps)
    }

    pub fn energy(&self, params: &CoherentParams) -> Result<f64> {
        expectation(&self.state(params)?, &self.hamiltonian)
    }

    pub fn minimize(&self, tol: f64) -> Result<(CoherentParams, Vec<f64>, f64)> {
        let space = TrialSpace::new(&self.cfg);
        let f = |x: &[f64]| self.energy(&space.params(x)).unwrap_or(f64::INFINITY);
        let m = minimize_surface(&f, &space.seeds(), &space.step(), tol)?;
        Ok((space.params(&m.x), m.x, m.value))
    }
}
