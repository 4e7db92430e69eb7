//! Coherent-state variational minimisation, the Ξ separatrix and the
//! triple point.
//!
//! Trial states use real field amplitudes `α_m = √N x_m` and real matter
//! coordinates on the unit sphere in hyperspherical angles, so the normal
//! point (`x = 0`, all angles 0) is `|0⟩ ⊗ |N,0,…,0⟩`. For tree-shaped
//! coupling graphs the phases can be gauged away, so this loses nothing.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{enumerate_basis, Sector};
use crate::coherent::{coherent_energy, coherent_state, CoherentParams};
use crate::error::{Error, Result};
use crate::model::{Configuration, ModelConfig};
use crate::operator::build_hamiltonian;
use crate::optimize::{lattice_seeds, minimize_multistart, Minimum};
use crate::state::expectation;

/// Default simplex-diameter tolerance for variational minimisation.
pub const VARIATIONAL_TOL: f64 = 1e-8;
const MAX_EVALS: usize = 20_000;

/// Unit vector from `n - 1` hyperspherical angles.
pub fn hyperspherical(angles: &[f64]) -> Vec<f64> {
    let mut z = Vec::with_capacity(angles.len() + 1);
    let mut s = 1.0;
    for &t in angles {
        z.push(s * t.cos());
        s *= t.sin();
    }
    z.push(s);
    z
}

/// Parameter box and mapping for coherent trial states of one model.
#[derive(Clone, Debug)]
pub struct TrialSpace {
    pub n_modes: usize,
    pub n_levels: usize,
    pub atoms: u32,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl TrialSpace {
    pub fn new(cfg: &ModelConfig) -> Self {
        let l = cfg.n_modes();
        let n = cfg.n_levels();
        let mut lo = Vec::with_capacity(l + n - 1);
        let mut hi = Vec::with_capacity(l + n - 1);
        for m in 0..l {
            let load: f64 = cfg.couplings.iter().filter(|c| c.mode == m).map(|c| c.mu.abs()).sum();
            let x = load / cfg.modes[m].max(1e-12) + 0.1;
            lo.push(-x);
            hi.push(x);
        }
        for _ in 1..n {
            lo.push(0.0);
            hi.push(std::f64::consts::PI);
        }
        TrialSpace { n_modes: l, n_levels: n, atoms: cfg.atoms, lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn params(&self, x: &[f64]) -> CoherentParams {
        let s = (self.atoms as f64).sqrt();
        let field = x[..self.n_modes].iter().map(|v| Complex64::new(s * v, 0.0)).collect();
        let matter = hyperspherical(&x[self.n_modes..]).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        CoherentParams { field, matter }
    }

    pub fn normal_point(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    /// Normal point first, then the 3^d lattice of cell centres.
    pub fn seeds(&self) -> Vec<Vec<f64>> {
        let mut s = vec![self.normal_point()];
        s.extend(lattice_seeds(&self.lo, &self.hi));
        s
    }

    pub fn step(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.25 * (b - a)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct VariationalMinimum {
    pub params: CoherentParams,
    pub x: Vec<f64>,
    pub energy: f64,
}

/// Deterministic multistart minimisation of an energy function over seeds.
pub fn minimize_surface(
    energy: &(dyn Fn(&[f64]) -> f64 + Sync),
    seeds: &[Vec<f64>],
    step: &[f64],
    tol: f64,
) -> Result<Minimum> {
    let m = minimize_multistart(energy, seeds, step, tol, MAX_EVALS)?;
    if !m.converged {
        return Err(Error::Optimization(format!("simplex did not converge within {MAX_EVALS} evaluations")));
    }
    Ok(m)
}

/// Lowest coherent-state energy of `cfg`, seeded with the normal point, the
/// parameter lattice and any `extra` seeds.
pub fn minimize_coherent_seeded(cfg: &ModelConfig, extra: &[Vec<f64>], tol: f64) -> Result<VariationalMinimum> {
    let space = TrialSpace::new(cfg);
    let f = |x: &[f64]| coherent_energy(cfg, &space.params(x)).unwrap_or(f64::INFINITY);
    let mut seeds = space.seeds();
    seeds.extend(extra.iter().cloned());
    let m = minimize_surface(&f, &seeds, &space.step(), tol)?;
    Ok(VariationalMinimum { params: space.params(&m.x), x: m.x, energy: m.value })
}

pub fn minimize_coherent(cfg: &ModelConfig) -> Result<VariationalMinimum> {
    minimize_coherent_seeded(cfg, &[], VARIATIONAL_TOL)
}

/// `⟨ψ|H|ψ⟩` of the truncated coherent state vector (the second route to
/// the closed-form product-state energy).
pub fn coherent_energy_state_vector(cfg: &ModelConfig, params: &CoherentParams) -> Result<f64> {
    let basis = Arc::new(enumerate_basis(cfg, &Sector::All)?);
    let h = build_hamiltonian(cfg, &basis)?;
    let psi = coherent_state(params, cfg, &basis)?;
    expectation(&psi, &h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionOrder {
    First,
    Second,
    Unknown,
}

impl TransitionOrder {
    pub fn name(self) -> &'static str {
        match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
            TransitionOrder::Unknown => "unknown",
        }
    }
}

/// Closed-form separatrix of the single-mode Ξ model,
/// `Ω ω₂₁ = μ₁₂² + (|μ₂₃| - √(Ω ω₃₁))² Θ(|μ₂₃| - √(Ω ω₃₁))`, written in the
/// RWA couplings. With counter-rotating terms every coupling enters doubled,
/// so both coordinates of the curve are halved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiSeparatrix {
    pub field: f64,
    pub w21: f64,
    pub w31: f64,
    /// 1 under the RWA, ½ with counter-rotating terms.
    pub scale: f64,
}

fn require_xi(cfg: &ModelConfig) -> Result<()> {
    if cfg.configuration != Configuration::Xi || cfg.n_modes() != 1 {
        return Err(Error::Configuration("closed form needs the single-mode Ξ scheme".into()));
    }
    Ok(())
}

pub fn xi_separatrix(cfg: &ModelConfig) -> Result<XiSeparatrix> {
    require_xi(cfg)?;
    let w21 = cfg.omega[1] - cfg.omega[0];
    let w31 = cfg.omega[2] - cfg.omega[0];
    if !(w21 > 0.0) {
        return Err(Error::InvalidParameter("Ξ separatrix needs ω₂ > ω₁".into()));
    }
    Ok(XiSeparatrix { field: cfg.modes[0], w21, w31, scale: if cfg.rwa { 1.0 } else { 0.5 } })
}

impl XiSeparatrix {
    /// `μ₂₃` at the kink where the curve leaves the vertical segment.
    pub fn corner(&self) -> f64 {
        self.scale * (self.field * self.w31).sqrt()
    }

    /// Boundary value of `μ₁₂` at `μ₂₃`; `None` once the normal region has
    /// closed (the curve has reached `μ₁₂ = 0`).
    pub fn mu12(&self, mu23: f64) -> Option<f64> {
        let y = mu23.abs() / self.scale;
        let d = y - (self.field * self.w31).sqrt();
        let theta = if d > 0.0 { d * d } else { 0.0 };
        let r = self.field * self.w21 - theta;
        (r >= 0.0).then(|| self.scale * r.sqrt())
    }

    /// Transition order across the curve: second on the vertical segment,
    /// first beyond the corner.
    pub fn order(&self, mu23: f64) -> TransitionOrder {
        if mu23.abs() <= self.corner() {
            TransitionOrder::Second
        } else {
            TransitionOrder::First
        }
    }

    /// `(μ₁₂, μ₂₃)` samples of the curve on `[0, mu23_max]`.
    pub fn polyline(&self, mu23_max: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .filter_map(|i| {
                let y = mu23_max * i as f64 / (n.max(2) - 1) as f64;
                self.mu12(y).map(|x| (x, y))
            })
            .collect()
    }
}

/// Point where the normal, S₁₂ and S₂₃ regions of the Ξ scheme meet:
/// `(√(Ω ω₂₁), √(Ω ω₃₁))` under the RWA and half of it otherwise.
pub fn triple_point(cfg: &ModelConfig) -> Result<(f64, f64)> {
    let s = xi_separatrix(cfg)?;
    Ok((s.scale * (s.field * s.w21).sqrt(), s.scale * (s.field * s.w31).sqrt()))
}
