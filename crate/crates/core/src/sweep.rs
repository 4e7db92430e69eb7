//! One-coupling sweeps comparing the exact ground state with the coherent
//! and symmetry-adapted variational ones: energies, fidelities and
//! photon-number fluctuations.
//!
//! The symmetry-adapted state is the parity SAS for models with
//! counter-rotating terms and the number-projected coherent state under the
//! RWA, with the charge sector chosen variationally near the coherent
//! estimate.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{enumerate_basis, BasisIndex, Sector};
use crate::coherent::{coherent_state, CoherentParams};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::operator::{photon_number, SparseOperator};
use crate::output::{csv, num};
use crate::phase::Axis;
use crate::sas::{minimize_sas, sas_state, NumberProjection, SasKind, SasParams};
use crate::solver::BlockSolver;
use crate::state::{expectation, fluctuation, inner_across, StateVector};
use crate::variational::{minimize_coherent, VARIATIONAL_TOL};

/// Half-width of the charge window searched around the coherent estimate.
pub const SECTOR_WINDOW: i64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub mu: f64,
    pub e_exact: f64,
    pub e_coherent: f64,
    pub e_sas: f64,
    /// `|⟨sas|exact⟩|²`.
    pub fidelity_sas: f64,
    /// `|⟨coh|exact⟩|²`.
    pub fidelity_coherent: f64,
    pub nu_exact: f64,
    /// Variance of the total photon number.
    pub dnu2_exact: f64,
    pub dnu2_coherent: f64,
    pub dnu2_sas: f64,
    pub sector_exact: String,
    pub sector_sas: String,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub label: String,
    pub points: Vec<SweepPoint>,
}

fn total_photons(basis: &BasisIndex) -> Result<SparseOperator> {
    let ops: Vec<SparseOperator> = (0..basis.n_modes()).map(|m| photon_number(basis, m)).collect();
    let terms: Vec<(&SparseOperator, f64)> = ops.iter().map(|o| (o, 1.0)).collect();
    SparseOperator::linear_combination(&terms)
}

fn coherent_charges(cfg: &ModelConfig, p: &CoherentParams) -> Vec<f64> {
    let nu = p.photons();
    let pop = p.populations(cfg.atoms);
    cfg.charges()
        .iter()
        .map(|k| {
            let f: f64 = k.photon_weights.iter().zip(&nu).map(|(&w, n)| w as f64 * n).sum();
            let m: f64 = k.level_weights.iter().zip(&pop).map(|(&w, n)| w as f64 * n).sum();
            f + m
        })
        .collect()
}

/// Charge tuples within `SECTOR_WINDOW` of `centre` (one charge) or ±1
/// (several), all nonnegative.
fn candidate_sectors(centre: &[f64]) -> Vec<Vec<i64>> {
    let w = if centre.len() == 1 { SECTOR_WINDOW } else { 1 };
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for &c in centre {
        let c = c.round() as i64;
        out = out
            .into_iter()
            .flat_map(|s| {
                (c - w..=c + w).filter(|&v| v >= 0).map(move |v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

struct SasResult {
    energy: f64,
    state: StateVector,
    sector: String,
}

fn projected_ground(cfg: &ModelConfig, coh: &CoherentParams) -> Result<SasResult> {
    let mut best: Option<(f64, NumberProjection, CoherentParams)> = None;
    for charges in candidate_sectors(&coherent_charges(cfg, coh)) {
        let proj = match NumberProjection::new(cfg, &charges) {
            Ok(p) => p,
            Err(Error::InvalidParameter(_)) => continue,
            Err(e) => return Err(e),
        };
        let (params, _, e) = proj.minimize(VARIATIONAL_TOL)?;
        if best.as_ref().map_or(true, |b| e < b.0 - 1e-12 * e.abs().max(1.0)) {
            best = Some((e, proj, params));
        }
    }
    let (energy, proj, params) = best.ok_or_else(|| Error::Optimization("no charge sector to project on".into()))?;
    let state = proj.state(&params)?;
    Ok(SasResult { energy, state, sector: Sector::Charges(proj.charges.clone()).label() })
}

fn parity_ground(cfg: &ModelConfig, basis: &Arc<BasisIndex>) -> Result<SasResult> {
    let g = minimize_sas(cfg)?.ground().clone();
    let sector = Sector::Parities(g.parity.clone()).label();
    let state = sas_state(&SasParams::new(g.params, g.parity, SasKind::Parity), cfg, basis)?;
    Ok(SasResult { energy: g.energy, state, sector })
}

/// Sweep one coupling of `cfg` along `axis`. Exact states use the cutoffs of
/// `cfg`; the number projection raises them to its sector as needed.
pub fn compare_sweep(cfg: &ModelConfig, axis: &Axis) -> Result<Sweep> {
    let solver = BlockSolver::new(cfg)?;
    let full = Arc::new(enumerate_basis(cfg, &Sector::All)?);
    let points = (0..axis.n)
        .into_par_iter()
        .map(|i| {
            let mu_v = axis.value(i);
            let mut mu = cfg.mu();
            mu[axis.coupling] = mu_v;
            let c = cfg.with_mu(&mu);
            let g = solver.ground(&mu)?;
            let n_op = total_photons(g.state.basis())?;
            let coh = minimize_coherent(&c)?;
            let coh_state = coherent_state(&coh.params, &c, &full)?;
            let sas = if c.rwa { projected_ground(&c, &coh.params)? } else { parity_ground(&c, &full)? };
            let sas_op = total_photons(sas.state.basis())?;
            Ok(SweepPoint {
                mu: mu_v,
                e_exact: g.energy,
                e_coherent: coh.energy,
                e_sas: sas.energy,
                fidelity_sas: inner_across(&sas.state, &g.state).norm_sqr().min(1.0),
                fidelity_coherent: inner_across(&coh_state, &g.state).norm_sqr().min(1.0),
                nu_exact: expectation(&g.state, &n_op)?,
                dnu2_exact: fluctuation(&g.state, &n_op)?,
                dnu2_coherent: coh.params.photons().iter().sum(),
                dnu2_sas: fluctuation(&sas.state, &sas_op)?,
                sector_exact: g.sector.label(),
                sector_sas: sas.sector,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { label: axis.label.clone(), points })
}

impl Sweep {
    /// `<axis>,E_exact,E_coherent,E_sas,F_sas,F_coherent,nu_exact,dnu2_exact,dnu2_coherent,dnu2_sas,sector_exact,sector_sas`.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = [
            self.label.as_str(),
            "E_exact",
            "E_coherent",
            "E_sas",
            "F_sas",
            "F_coherent",
            "nu_exact",
            "dnu2_exact",
            "dnu2_coherent",
            "dnu2_sas",
            "sector_exact",
            "sector_sas",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    num(p.mu),
                    num(p.e_exact),
                    num(p.e_coherent),
                    num(p.e_sas),
                    num(p.fidelity_sas),
                    num(p.fidelity_coherent),
                    num(p.nu_exact),
                    num(p.dnu2_exact),
                    num(p.dnu2_coherent),
                    num(p.dnu2_sas),
                    p.sector_exact.clone(),
                    p.sector_sas.clone(),
                ]
            })
            .collect();
        csv(&header, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sectors_stay_nonnegative() {
        let s = candidate_sectors(&[1.2]);
        assert_eq!(s, vec![vec![0], vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(candidate_sectors(&[3.0, 0.0]).len(), 3 * 2);
    }

    #[test]
    fn normal_region_agrees_everywhere() {
        let cfg = ModelConfig::two_level(0.8, 1.0, 0.0, 4, true, 12).unwrap();
        let axis = Axis::parse(&cfg, "gamma:0:0.2:0.1").unwrap();
        let s = compare_sweep(&cfg, &axis).unwrap();
        for p in &s.points {
            assert!((p.fidelity_sas - 1.0).abs() < 1e-9 && (p.e_sas - p.e_exact).abs() < 1e-9, "{p:?}");
        }
        assert!(s.points[0].dnu2_exact.abs() < 1e-12);
    }
}
