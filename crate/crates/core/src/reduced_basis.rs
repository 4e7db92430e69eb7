//! Reduced bases B_σ(𝒪): photon boxes per monochromatic subregion joined
//! into one field basis, times a capped matter basis, with photon cutoffs
//! m_jk fixed by 2-level ground-state fidelity.
//!
//! Subregion of mode m at order 𝒪: `ν_m ≤ m_m` and `ν_n ≤ min{2𝒪+1, m_n}`
//! for every other mode n. Matter rule (our own): the number of atoms out
//! of the lowest level is at most `min{N, 2𝒪+1+max m}`.

use rayon::prelude::*;

use crate::basis::{enumerate_basis, occupations, photon_box, BasisIndex, Sector};
use crate::error::{invalid, Error, Result};
use crate::model::{Configuration, Coupling, ModelConfig};
use crate::output::{csv, num};
use crate::phase::{scan, Grid, PhaseDiagram, SolverKind};
use crate::reduction::two_level_subsystems;
use crate::solver::{BlockSolver, GroundState};
use crate::state::inner;

/// Fidelity tolerances named after their columns: `e^-10` and `e^-15`.
pub const E10: f64 = 4.539_992_976_248_485e-5;
pub const E15: f64 = 3.059_023_205_018_258e-7;

/// Largest Fock cutoff tried for a 2-level subsystem.
pub const MAX_SUBSYSTEM_CUTOFF: u32 = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct PhotonCutoff {
    /// Coupling index in the model.
    pub coupling: usize,
    pub mode: usize,
    /// `μ/μᶜ` of the 2-level subsystem.
    pub x: f64,
    pub m: u32,
}

fn subsystem_ground(s: &crate::reduction::TwoLevelSubsystem, mu: f64, cutoff: u32) -> Result<GroundState> {
    let cfg = ModelConfig::new(
        Configuration::TwoLevel,
        vec![s.omega_j, s.omega_j + s.omega_kj],
        vec![s.omega_mode],
        vec![Coupling::new(0, 1, 0, mu)],
        s.atoms,
        s.rwa,
        vec![cutoff],
    )?;
    BlockSolver::new(&cfg)?.ground(&[mu])
}

/// Smallest Fock cutoff per transition whose 2-level ground state, at
/// coupling `x·μᶜ`, has fidelity at least `1 - eps` with the ground state
/// at the next cutoff. `x` is indexed like `cfg.couplings`.
pub fn photon_cutoffs(cfg: &ModelConfig, x: &[f64], eps: f64) -> Result<Vec<PhotonCutoff>> {
    if !(eps > 0.0) {
        return invalid("eps must be positive");
    }
    if x.len() != cfg.couplings.len() || x.iter().any(|v| !(*v >= 0.0)) {
        return invalid("one nonnegative ratio per coupling is required");
    }
    let subs = two_level_subsystems(cfg)?;
    cfg.couplings
        .iter()
        .enumerate()
        .map(|(c, cp)| {
            let s = subs
                .iter()
                .find(|s| s.coupling == c)
                .ok_or_else(|| Error::Configuration(format!("coupling {} has no 2-level subsystem", cp.label())))?;
            let mu = x[c] * s.mu_c;
            let mut prev = subsystem_ground(s, mu, 0)?;
            for m in 0..MAX_SUBSYSTEM_CUTOFF {
                let next = subsystem_ground(s, mu, m + 1)?;
                let f = if prev.sector == next.sector {
                    inner(&prev.state.embed(next.state.basis())?, &next.state)?.norm_sqr()
                } else {
                    0.0
                };
                if f >= 1.0 - eps {
                    return Ok(PhotonCutoff { coupling: c, mode: cp.mode, x: x[c], m });
                }
                prev = next;
            }
            Err(Error::Truncation(format!("no cutoff up to {MAX_SUBSYSTEM_CUTOFF} for coupling {}", cp.label())))
        })
        .collect()
}

/// Cutoff per mode: the largest m over the couplings it drives.
pub fn mode_cutoffs(cfg: &ModelConfig, cutoffs: &[PhotonCutoff]) -> Vec<u32> {
    let mut m = vec![0u32; cfg.n_modes()];
    for c in cutoffs {
        m[c.mode] = m[c.mode].max(c.m);
    }
    m
}

/// Largest admissible order, `max ⌊m/2⌋`.
pub fn max_order(cutoffs: &[PhotonCutoff]) -> u32 {
    cutoffs.iter().map(|c| c.m / 2).max().unwrap_or(0)
}

#[derive(Clone, Debug)]
pub struct ReducedBasis {
    pub order: u32,
    /// Photon vectors of the joined subregion boxes, deduplicated.
    pub field: Vec<Vec<u32>>,
    /// Occupation vectors kept by the matter rule.
    pub matter: Vec<Vec<u32>>,
    pub basis: BasisIndex,
    pub mode_cutoffs: Vec<u32>,
    pub cutoffs: Vec<PhotonCutoff>,
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Model with the full box cutoffs, on which the basis lives.
    pub fn box_config(&self, cfg: &ModelConfig) -> ModelConfig {
        cfg.with_cutoffs(&self.mode_cutoffs)
    }
}

/// Atoms allowed outside the lowest level at order `order`.
pub fn matter_cap(atoms: u32, order: u32, mode_cutoffs: &[u32]) -> u32 {
    let m = mode_cutoffs.iter().copied().max().unwrap_or(0);
    atoms.min(2 * order + 1 + m)
}

pub fn build_reduced_basis(cfg: &ModelConfig, order: u32, cutoffs: &[PhotonCutoff]) -> Result<ReducedBasis> {
    if order > max_order(cutoffs) {
        return invalid(format!("order {order} outside 0..={}", max_order(cutoffs)));
    }
    let m = mode_cutoffs(cfg, cutoffs);
    let side = 2 * order + 1;
    let mut field: Vec<Vec<u32>> = Vec::new();
    for dominant in 0..cfg.n_modes() {
        let bounds: Vec<u32> = (0..cfg.n_modes()).map(|n| if n == dominant { m[n] } else { side.min(m[n]) }).collect();
        field.extend(photon_box(&bounds));
    }
    field.sort();
    field.dedup();
    let cap = matter_cap(cfg.atoms, order, &m);
    let matter: Vec<Vec<u32>> = occupations(cfg.n_levels(), cfg.atoms).into_iter().filter(|o| cfg.atoms - o[0] <= cap).collect();
    let mut states = Vec::with_capacity(field.len() * matter.len());
    for f in &field {
        for o in &matter {
            let mut s = f.clone();
            s.extend_from_slice(o);
            states.push(s);
        }
    }
    let basis = BasisIndex::from_states(cfg.n_modes(), cfg.n_levels(), cfg.atoms, states)?;
    Ok(ReducedBasis { order, field, matter, basis, mode_cutoffs: m, cutoffs: cutoffs.to_vec() })
}

/// Exact reference basis: the full photon box of the cutoffs times all
/// occupations.
pub fn exact_basis(cfg: &ModelConfig, cutoffs: &[PhotonCutoff]) -> Result<BasisIndex> {
    enumerate_basis(&cfg.with_cutoffs(&mode_cutoffs(cfg, cutoffs)), &Sector::All)
}

/// Dimension report: `order,field_dim,matter_dim,total_dim,exact_dim,ratio`
/// with one row per order and a final `exact` row.
pub fn dimension_csv(bases: &[ReducedBasis], exact: &BasisIndex, n_levels: usize, atoms: u32) -> String {
    let header: Vec<String> =
        ["order", "field_dim", "matter_dim", "total_dim", "exact_dim", "ratio"].iter().map(|s| s.to_string()).collect();
    let ed = exact.dim();
    let mut rows: Vec<Vec<String>> = bases
        .iter()
        .map(|b| {
            vec![
                b.order.to_string(),
                b.field.len().to_string(),
                b.matter.len().to_string(),
                b.dim().to_string(),
                ed.to_string(),
                num(b.dim() as f64 / ed as f64),
            ]
        })
        .collect();
    let matter = occupations(n_levels, atoms).len();
    rows.push(vec!["exact".into(), (ed / matter).to_string(), matter.to_string(), ed.to_string(), ed.to_string(), num(1.0)]);
    csv(&header, &rows)
}

/// Ground energies below this magnitude count as zero.
pub const ZERO_ENERGY: f64 = 1e-10;

/// `Δ = |(E_g - E)/E_g|`, zero when `E_g = 0` (to within `ZERO_ENERGY`).
pub fn relative_error(exact: f64, approx: f64) -> f64 {
    if exact.abs() < ZERO_ENERGY {
        0.0
    } else {
        ((exact - approx) / exact).abs()
    }
}

#[derive(Clone, Debug)]
pub struct ErrorSurface {
    /// Exact scan on the full box, with labels and susceptibilities.
    pub exact: PhaseDiagram,
    pub orders: Vec<u32>,
    pub dims: Vec<usize>,
    /// `energies[o][i]`: ground energy in the basis of `orders[o]` at point i.
    pub energies: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
}

impl ErrorSurface {
    pub fn max_delta(&self, o: usize) -> (usize, f64) {
        self.delta[o]
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_finite())
            .fold((0, f64::NEG_INFINITY), |b, (i, &d)| if d > b.1 { (i, d) } else { b })
    }

    /// `axes..., E_exact, E_O<o>..., Delta_O<o>..., label, valid`.
    pub fn to_csv(&self) -> String {
        let g = &self.exact.grid;
        let mut header: Vec<String> = g.axes.iter().map(|a| a.label.clone()).collect();
        header.push("E_exact".into());
        header.extend(self.orders.iter().map(|o| format!("E_O{o}")));
        header.extend(self.orders.iter().map(|o| format!("Delta_O{o}")));
        header.push("label".into());
        header.push("valid".into());
        let rows: Vec<Vec<String>> = (0..g.len())
            .map(|i| {
                let p = &self.exact.points[i];
                let mut r: Vec<String> = g.values(i).into_iter().map(num).collect();
                r.push(num(p.e0));
                r.extend(self.energies.iter().map(|e| num(e[i])));
                r.extend(self.delta.iter().map(|d| num(d[i])));
                r.push(p.label.clone());
                let ok = p.valid && self.energies.iter().all(|e| e[i].is_finite());
                r.push(if ok { "1" } else { "0" }.into());
                r
            })
            .collect();
        csv(&header, &rows)
    }
}

/// Relative ground-energy error of each order over `grid`, against the
/// exact solution on the full box of `cutoffs`.
pub fn error_surface(cfg: &ModelConfig, cutoffs: &[PhotonCutoff], orders: &[u32], grid: &Grid) -> Result<ErrorSurface> {
    let box_cfg = cfg.with_cutoffs(&mode_cutoffs(cfg, cutoffs));
    let exact = scan(&box_cfg, grid, SolverKind::Exact)?;
    let mut energies = Vec::new();
    let mut delta = Vec::new();
    let mut dims = Vec::new();
    for &o in orders {
        let rb = build_reduced_basis(cfg, o, cutoffs)?;
        dims.push(rb.dim());
        let solver = BlockSolver::from_basis(&box_cfg, &rb.basis)?;
        let e: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| solver.ground(&grid.mu_at(&box_cfg, i)).map_or(f64::NAN, |g| g.energy))
            .collect();
        let d = e
            .iter()
            .zip(&exact.points)
            .map(|(&eo, p)| if p.valid && eo.is_finite() { relative_error(p.e0, eo) } else { f64::NAN })
            .collect();
        energies.push(e);
        delta.push(d);
    }
    Ok(ErrorSurface { exact, orders: orders.to_vec(), dims, energies, delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi4() -> ModelConfig {
        ModelConfig::xi_two_mode([0.0, 0.25, 1.0], [0.25, 0.75], [0.0, 0.0], 4, false, [1, 1]).unwrap()
    }

    fn fixed(m: [u32; 2]) -> Vec<PhotonCutoff> {
        (0..2).map(|c| PhotonCutoff { coupling: c, mode: c, x: 1.0, m: m[c] }).collect()
    }

    #[test]
    fn zero_coupling_needs_no_photons() {
        let c = photon_cutoffs(&xi4(), &[0.0, 0.0], E10).unwrap();
        assert!(c.iter().all(|c| c.m == 0));
    }

    #[test]
    fn box_union_counts() {
        let rb = build_reduced_basis(&xi4(), 0, &fixed([6, 9])).unwrap();
        // (7·2) + (2·10) − (2·2)
        assert_eq!(rb.field.len(), 30);
        assert_eq!(rb.matter.len(), 15);
        assert_eq!(rb.dim(), 450);
    }

    #[test]
    fn top_order_saturates() {
        let cfg = xi4();
        let cut = fixed([6, 9]);
        let rb = build_reduced_basis(&cfg, max_order(&cut), &cut).unwrap();
        assert_eq!(rb.basis, exact_basis(&cfg, &cut).unwrap());
        assert!(build_reduced_basis(&cfg, max_order(&cut) + 1, &cut).is_err());
    }

    #[test]
    fn equal_bounds_dedup_to_one_box() {
        let rb = build_reduced_basis(&xi4(), 1, &fixed([3, 3])).unwrap();
        assert_eq!(rb.field.len(), 16);
    }

    #[test]
    fn tolerance_constants() {
        assert!((E10 / (-10.0f64).exp() - 1.0).abs() < 1e-15);
        assert!((E15 / (-15.0f64).exp() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_ground_energy_gives_zero_error() {
        assert_eq!(relative_error(0.0, 0.3), 0.0);
        assert_eq!(relative_error(-3e-17, 1e-15), 0.0);
        assert!((relative_error(-2.0, -1.99) - 0.005).abs() < 1e-15);
    }
}
