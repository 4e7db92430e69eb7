//! Independent oracles for derived quantities, with frozen reference values.

use std::sync::Arc;

use approx::assert_abs_diff_eq;
use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use phasecart::basis::{enumerate_basis, Sector};
use phasecart::coherent::{coherent_state, critical_points_2level, CoherentParams};
use phasecart::model::{from_dimensional, parse_config, DimensionalParams, ModelConfig};
use phasecart::operator::{build_hamiltonian, parity_projector, photon_number};
use phasecart::phase::{scan_with, Axis, Grid, ScanOptions, SolverKind};
use phasecart::reduced_basis::{error_surface, photon_cutoffs, E10};
use phasecart::reduction::{compose_diagram, two_level_subsystems};
use phasecart::sas::{minimize_sas, sas_energy, SasKind, SasParams};
use phasecart::solver::{converge_cutoff, ground_fidelity, ground_state, BlockSolver};
use phasecart::state::{expectation, susceptibility};
use phasecart::variational::{minimize_coherent, xi_separatrix};

fn config(name: &str) -> ModelConfig {
    let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_config(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn dimensional_coupling_matches_table_formula() {
    // ω̃/ω_F = 3/2, d = 1/2, 2πρ/ω_F = 1
    let p = DimensionalParams {
        omega_f: 2.0,
        omega_a_tilde: 3.0,
        dipole: 0.5,
        e_charge: 1.0,
        mass: 1.0,
        rho: 1.0 / std::f64::consts::PI,
        atoms: 4,
    };
    let cfg = from_dimensional(&p).unwrap();
    assert_abs_diff_eq!(cfg.couplings[0].mu, 0.75, epsilon = 1e-15);
    assert_abs_diff_eq!(cfg.omega[1] - cfg.omega[0], 1.5, epsilon = 1e-15);
    for (wf, wa, d, rho) in [(0.7, 1.3, 0.2, 5.0), (3.0, 0.1, 2.5, 0.01)] {
        let p = DimensionalParams { omega_f: wf, omega_a_tilde: wa, dipole: d, rho, ..p.clone() };
        let direct = (wa / wf) * d * (2.0 * std::f64::consts::PI * rho / wf).sqrt();
        assert_abs_diff_eq!(p.gamma(), direct, epsilon = 1e-14 * direct);
    }
}

#[test]
fn rwa_elements_follow_ladder_algebra() {
    let (n, gamma) = (3u32, 0.7);
    let cfg = ModelConfig::two_level(1.0, 1.0, gamma, n, true, 3).unwrap();
    let basis = enumerate_basis(&cfg, &Sector::All).unwrap();
    let h = build_hamiltonian(&cfg, &basis).unwrap();
    let j = 0.5 * n as f64;
    let mut checked = 0;
    for c in 0..basis.dim() {
        let s = basis.state(c);
        let (nu, lower, upper) = (s[0], s[1], s[2]);
        if nu == 0 || lower == 0 {
            continue;
        }
        let r = basis.index_of(&[nu - 1, lower - 1, upper + 1]).unwrap();
        let m = 0.5 * (upper as f64 - lower as f64);
        let want = gamma / (n as f64).sqrt() * (nu as f64).sqrt() * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        assert_abs_diff_eq!(h.get(r, c).re, want, epsilon = 1e-14);
        assert_abs_diff_eq!(h.get(r, c).im, 0.0);
        checked += 1;
    }
    assert_eq!(checked, 9);
    // ⟨0, m=-1/2| H |1, m=-3/2⟩ = (γ/√3)·√3
    let r = basis.index_of(&[0, 2, 1]).unwrap();
    let c = basis.index_of(&[1, 3, 0]).unwrap();
    assert_abs_diff_eq!(h.get(r, c).re, 0.7, epsilon = 1e-14);
}

#[test]
fn single_atom_rwa_doublet() {
    let gamma = 2.0;
    let cfg = ModelConfig::two_level(1.0, 1.0, gamma, 1, true, 1).unwrap();
    let basis = enumerate_basis(&cfg, &Sector::All).unwrap();
    let dense = build_hamiltonian(&cfg, &basis).unwrap().to_dense();
    let mut ev: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    // |0,g⟩ = -½, doublet ½ ± γ, |1,e⟩ = 3/2 (its partner |2,g⟩ is cut)
    let want = [0.5 - gamma, -0.5, 1.5, 0.5 + gamma];
    for (a, b) in ev.iter().zip(want) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
    }
    let g = ground_state(&cfg.with_cutoffs(&[6])).unwrap();
    assert_abs_diff_eq!(g.energy, -1.5, epsilon = 1e-10);
}

#[test]
fn glauber_number_is_poisson_mean() {
    let cfg = ModelConfig::two_level(1.0, 1.0, 0.0, 1, false, 40).unwrap();
    let basis = Arc::new(enumerate_basis(&cfg, &Sector::All).unwrap());
    let alpha = Complex64::new(0.9, 0.4);
    let p = CoherentParams::new(vec![alpha], vec![Complex64::new(1.0, 0.0), Complex64::new(0.3, -0.2)]).unwrap();
    let psi = coherent_state(&p, &cfg, &basis).unwrap();
    let n = expectation(&psi, &photon_number(&basis, 0)).unwrap();
    assert_abs_diff_eq!(n, alpha.norm_sqr(), epsilon = 1e-10);
    assert_abs_diff_eq!(n, 0.97, epsilon = 1e-10);
}

#[test]
fn susceptibility_is_finite_difference_limit() {
    let cfg = ModelConfig::two_level(1.0, 1.0, 0.3, 1, false, 20).unwrap();
    let solver = BlockSolver::new(&cfg).unwrap();
    let g0 = solver.ground(&[0.3]).unwrap();
    let chi = |d: f64| {
        let g = solver.ground(&[0.3 + d]).unwrap();
        susceptibility(ground_fidelity(&g0, &g).unwrap(), d).unwrap()
    };
    let (a, b) = (chi(1e-3), chi(2e-3));
    assert!(a > 0.0);
    assert!((a / b - 1.0).abs() < 1e-2, "{a} vs {b}");
    let g = solver.ground(&[0.3 + 1e-3]).unwrap();
    let f = ground_fidelity(&g0, &g).unwrap();
    assert_abs_diff_eq!(f, 1.0 - 0.5 * a * 1e-6, epsilon = 1e-12);
}

#[test]
fn cutoff_need_grows_with_coupling() {
    let need: Vec<u32> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&g| {
            let cfg = ModelConfig::two_level(1.0, 1.0, g, 2, false, 1).unwrap();
            converge_cutoff(&cfg, 1e-8).unwrap()[0]
        })
        .collect();
    assert_eq!(need[0], 0);
    assert!(need.windows(2).all(|w| w[0] <= w[1]), "{need:?}");
    assert_eq!(need, [0, 8, 8, 16, 16]);
}

#[test]
fn surface_minimum_matches_closed_form() {
    let cfg = ModelConfig::two_level(1.0, 1.0, 0.8, 10, false, 1).unwrap();
    let cps = critical_points_2level(&cfg).unwrap();
    let num = minimize_coherent(&cfg).unwrap();
    assert_abs_diff_eq!(num.energy, cps[0].energy, epsilon = 1e-6);
    // -N(Ω²ω_A² + g⁴)/(4Ωg²) with g = 2γ
    assert_abs_diff_eq!(cps[0].energy, -7.3765625, epsilon = 1e-12);
}

#[test]
fn xi_formula_evaluations() {
    let sep = xi_separatrix(&config("xi.cfg")).unwrap();
    let r2 = 2f64.sqrt();
    assert_abs_diff_eq!(sep.mu12(r2 + 0.5).unwrap(), 0.75f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(sep.mu12(0.7).unwrap(), 1.0, epsilon = 1e-12);
    assert!(sep.mu12(r2 + 1.0 + 1e-9).is_none());
}

#[test]
fn sas_sectors_decompose_coherent_energy() {
    let cfg = ModelConfig::two_level(0.8, 1.0, 0.8, 20, false, 100).unwrap();
    let coh = minimize_coherent(&cfg).unwrap();
    let basis = Arc::new(enumerate_basis(&cfg, &Sector::All).unwrap());
    let psi = coherent_state(&coh.params, &cfg, &basis).unwrap();
    let mut total = 0.0;
    for par in [1i8, -1] {
        let w = expectation(&psi, &parity_projector(&cfg, &basis, &[par]).unwrap()).unwrap();
        let e = sas_energy(&cfg, &SasParams::new(coh.params.clone(), vec![par], SasKind::Parity)).unwrap();
        total += w * e;
    }
    assert_abs_diff_eq!(total, coh.energy, epsilon = 1e-8 * coh.energy.abs());
    let sas = minimize_sas(&cfg).unwrap();
    assert!(sas.ground().energy <= coh.energy + 1e-10);
}

#[test]
fn cutoffs_grow_with_distance_from_transition() {
    let cfg = config("xi4.cfg");
    let m: Vec<Vec<u32>> = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0]
        .iter()
        .map(|&x| photon_cutoffs(&cfg, &[x, x], E10).unwrap().iter().map(|c| c.m).collect())
        .collect();
    for w in m.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b), "{m:?}");
    }
    assert!(m[3].iter().zip(&m[5]).all(|(a, b)| a < b));
}

#[test]
fn error_falls_with_order() {
    let cfg = config("xi4.cfg");
    let cut = photon_cutoffs(&cfg, &[1.5, 1.5], E10).unwrap();
    let g = Grid::new(vec![
        Axis::parse(&cfg, "mu23:0:1.2:0.3").unwrap(),
        Axis::parse(&cfg, "mu12:0:0.4:0.1").unwrap(),
    ])
    .unwrap();
    let s = error_surface(&cfg, &cut, &[0, 1, 2], &g).unwrap();
    for i in 0..g.len() {
        let d: Vec<f64> = s.delta.iter().map(|d| d[i]).collect();
        assert!(d[0] + 1e-12 >= d[1] && d[1] + 1e-12 >= d[2], "{:?}: {d:?}", g.values(i));
    }
}

#[test]
fn composed_boundary_matches_full_variational_scan() {
    let cfg = config("n4.cfg");
    let subs = two_level_subsystems(&cfg).unwrap();
    let g = Grid::new(vec![
        Axis::parse(&cfg, "mu23:0.3:1.3:0.05").unwrap(),
        Axis::parse(&cfg, "mu13:0.8:0.8:1").unwrap(),
        Axis::parse(&cfg, "mu24:0.2:0.2:1").unwrap(),
    ])
    .unwrap();
    let composed = compose_diagram(&cfg, &subs, &g).unwrap();
    let opts = ScanOptions { photon_cut: 1e-6 * cfg.atoms as f64, ..ScanOptions::default() };
    let full = scan_with(&cfg, &g, SolverKind::Coherent, &opts).unwrap();
    let edge = |labels: Vec<&str>| labels.windows(2).position(|w| w[0] != w[1]).unwrap();
    let a = edge(composed.points.iter().map(|p| p.label.as_str()).collect());
    let b = edge(full.points.iter().map(|p| p.label.as_str()).collect());
    assert_eq!(composed.points[0].label, full.points[0].label);
    assert_eq!(composed.points[g.len() - 1].label, full.points[g.len() - 1].label);
    assert!(a.abs_diff(b) <= 1, "composed edge {a}, full scan edge {b}");
}
