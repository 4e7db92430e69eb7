//! Critical coupling against atom number and power-law fits of its
//! approach to the thermodynamic value.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{enumerate_basis, Sector};
use crate::coherent::{coherent_state, overlap, CoherentParams};
use crate::error::{invalid, Error, Result};
use crate::model::ModelConfig;
use crate::output::{csv, num};
use crate::sas::{minimize_sas, minimize_sas_kind, product_sas_overlap, sas_overlap, sas_state, SasKind, SasParams};
use crate::solver::{ground_fidelity, BlockSolver};
use crate::state::fidelity;
use crate::variational::minimize_coherent;

/// Exponent of the exact quantum series in the large-N limit, reported for
/// comparison only.
pub const S_QUANT: f64 = -2.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Coherent,
    Sas,
    Exact,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Coherent => "coherent",
            Method::Sas => "sas",
            Method::Exact => "exact",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(Method::Coherent),
            "sas" => Ok(Method::Sas),
            "exact" => Ok(Method::Exact),
            _ => invalid(format!("unknown method '{s}' (coherent, sas, exact)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSeries {
    pub method: Method,
    pub n_values: Vec<u32>,
    pub mu_c: Vec<f64>,
}

/// Search window and resolution for one critical coupling.
#[derive(Clone, Debug)]
pub struct CriticalSearch {
    /// Index of the scanned coupling.
    pub coupling: usize,
    pub lo: f64,
    pub hi: f64,
    /// Coarse grid step for locating the susceptibility peak.
    pub step: f64,
    /// Finite difference used in χ = 2(1 - F)/δ².
    pub delta: f64,
    /// Final bracket width.
    pub tol: f64,
}

impl CriticalSearch {
    pub fn new(coupling: usize, lo: f64, hi: f64) -> Self {
        CriticalSearch { coupling, lo, hi, step: 0.002, delta: 2e-5, tol: 1e-5 }
    }
}

fn at(cfg: &ModelConfig, c: usize, mu: f64) -> ModelConfig {
    let mut m = cfg.mu();
    m[c] = mu;
    cfg.with_mu(&m)
}

/// The product state with every odd-charge coordinate negated: the image
/// of `p` under the first parity, degenerate with it.
fn parity_image(cfg: &ModelConfig, p: &CoherentParams) -> CoherentParams {
    let k = &cfg.charges()[0];
    let mut q = p.clone();
    for (a, &w) in q.field.iter_mut().zip(&k.photon_weights) {
        if w % 2 != 0 {
            *a = -*a;
        }
    }
    for (z, &w) in q.matter.iter_mut().zip(&k.level_weights) {
        if w % 2 != 0 {
            *z = -*z;
        }
    }
    q
}

fn sas_ground(cfg: &ModelConfig) -> Result<SasParams> {
    let m = minimize_sas_kind(cfg, SasKind::TotalParity)?;
    let g = m.ground();
    Ok(SasParams::new(g.params.clone(), g.parity.clone(), SasKind::TotalParity))
}

/// Fidelity susceptibility of the method's ground state at `mu` along one
/// coupling. Degenerate variational branches related by parity are matched
/// by taking the larger overlap.
pub fn susceptibility_at(cfg: &ModelConfig, method: Method, search: &CriticalSearch, mu: f64) -> Result<f64> {
    let solver = if method == Method::Exact { Some(BlockSolver::new(cfg)?) } else { None };
    chi_with(cfg, method, search, mu, solver.as_ref())
}

fn chi_with(cfg: &ModelConfig, method: Method, search: &CriticalSearch, mu: f64, solver: Option<&BlockSolver>) -> Result<f64> {
    let (a, b) = (at(cfg, search.coupling, mu), at(cfg, search.coupling, mu + search.delta));
    let f = match (method, solver) {
        (Method::Exact, Some(s)) => ground_fidelity(&s.ground(&a.mu())?, &s.ground(&b.mu())?)?,
        (Method::Exact, None) => {
            let s = BlockSolver::new(cfg)?;
            ground_fidelity(&s.ground(&a.mu())?, &s.ground(&b.mu())?)?
        }
        (Method::Coherent, _) => {
            let (x, y) = (minimize_coherent(&a)?.params, minimize_coherent(&b)?.params);
            overlap(&x, &y, cfg.atoms).norm_sqr().max(overlap(&x, &parity_image(cfg, &y), cfg.atoms).norm_sqr())
        }
        (Method::Sas, _) => {
            let (x, y) = (sas_ground(&a)?, sas_ground(&b)?);
            let y2 = SasParams::new(parity_image(cfg, &y.base), y.parity.clone(), y.kind);
            sas_overlap(cfg, &x, &y)?.norm_sqr().max(sas_overlap(cfg, &x, &y2)?.norm_sqr())
        }
    };
    Ok(2.0 * (1.0 - f.min(1.0)) / (search.delta * search.delta))
}

/// Coupling at which the coherent minimum leaves the vacuum, by bisection
/// on the photon number.
fn coherent_onset(cfg: &ModelConfig, s: &CriticalSearch) -> Result<f64> {
    let cut = 1e-6 * cfg.atoms as f64;
    let collective = |mu: f64| -> Result<bool> {
        let p = minimize_coherent(&at(cfg, s.coupling, mu))?.params;
        Ok(p.photons().iter().sum::<f64>() > cut)
    };
    let (mut lo, mut hi) = (s.lo, s.hi);
    if collective(lo)? || !collective(hi)? {
        return Err(Error::NoTransition(format!("no vacuum-to-collective change in [{lo}, {hi}]")));
    }
    while hi - lo > s.tol {
        let mid = 0.5 * (lo + hi);
        if collective(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Susceptibility peak: coarse grid, then golden-section refinement inside
/// the cells around the largest value.
fn chi_peak(cfg: &ModelConfig, method: Method, s: &CriticalSearch) -> Result<f64> {
    let n = ((s.hi - s.lo) / s.step).round() as usize;
    if n < 2 {
        return invalid("search window holds fewer than three points");
    }
    let solver = if method == Method::Exact { Some(BlockSolver::new(cfg)?) } else { None };
    let chi = |mu: f64| chi_with(cfg, method, s, mu, solver.as_ref());
    let vals = (0..=n).into_par_iter().map(|i| chi(s.lo + i as f64 * s.step)).collect::<Result<Vec<_>>>()?;
    let k = (0..=n).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    if k == 0 || k == n {
        return Err(Error::NoTransition(format!("susceptibility peaks at the window edge ({})", s.lo + k as f64 * s.step)));
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (s.lo + (k - 1) as f64 * s.step, s.lo + (k + 1) as f64 * s.step);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (chi(c)?, chi(d)?);
    while b - a > s.tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = chi(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = chi(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Critical coupling of `cfg` by `method`: the vacuum onset for coherent
/// states, the fidelity-susceptibility peak otherwise.
pub fn mu_critical(cfg: &ModelConfig, method: Method, search: &CriticalSearch) -> Result<f64> {
    if search.coupling >= cfg.couplings.len() {
        return invalid("coupling index out of range");
    }
    if !(search.hi > search.lo && search.step > 0.0 && search.delta > 0.0 && search.tol > 0.0) {
        return invalid("bad search window");
    }
    match method {
        Method::Coherent => coherent_onset(cfg, search),
        Method::Sas | Method::Exact => chi_peak(cfg, method, search),
    }
}

/// `μ_c(N)` over `n_values` (sorted ascending), one independent search per N.
pub fn mu_critical_vs_n(cfg: &ModelConfig, n_values: &[u32], method: Method, search: &CriticalSearch) -> Result<ScalingSeries> {
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mu_c = ns.par_iter().map(|&n| mu_critical(&cfg.with_atoms(n), method, search)).collect::<Result<Vec<_>>>()?;
    Ok(ScalingSeries { method, n_values: ns, mu_c })
}

/// Thermodynamic critical coupling of one transition, `½√(Ω ω_kj)`
/// (`√(Ω ω_kj)` under the RWA).
pub fn mu_infinity(cfg: &ModelConfig, coupling: usize) -> Result<f64> {
    let c = cfg.couplings.get(coupling).ok_or_else(|| Error::InvalidParameter("coupling index out of range".into()))?;
    let r = (cfg.modes[c.mode] * cfg.gap(c)).sqrt();
    Ok(if cfg.rwa { r } else { 0.5 * r })
}

/// `|⟨coh|sas⟩|²` between the coherent and parity-SAS variational ground
/// states, from state vectors on the truncated basis of `cfg`.
pub fn coherent_sas_fidelity(cfg: &ModelConfig) -> Result<f64> {
    let coh = minimize_coherent(cfg)?;
    let g = minimize_sas(cfg)?.ground().clone();
    let basis = Arc::new(enumerate_basis(cfg, &Sector::All)?);
    let a = coherent_state(&coh.params, cfg, &basis)?;
    let b = sas_state(&SasParams::new(g.params, g.parity, SasKind::Parity), cfg, &basis)?;
    fidelity(&a, &b)
}

/// Same quantity from product-state overlaps, without a basis.
pub fn coherent_sas_fidelity_closed(cfg: &ModelConfig) -> Result<f64> {
    let coh = minimize_coherent(cfg)?;
    let g = minimize_sas(cfg)?.ground().clone();
    Ok(product_sas_overlap(cfg, &coh.params, &SasParams::new(g.params, g.parity, SasKind::Parity))?.norm_sqr())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub s: f64,
    pub amplitude: f64,
    pub r2: f64,
}

/// Least-squares line through `(ln N, ln(μ_c - μ_∞))`: slope s, amplitude
/// `e^intercept`, coefficient of determination r².
pub fn fit_power_law(series: &ScalingSeries, mu_inf: f64) -> Result<PowerLaw> {
    if series.n_values.len() != series.mu_c.len() {
        return invalid("series lengths differ");
    }
    if series.n_values.len() < 3 {
        return invalid("a power-law fit needs at least three points");
    }
    if series.mu_c.iter().any(|&m| !(m > mu_inf)) {
        return invalid("every critical coupling must exceed the asymptote");
    }
    let mut pts: Vec<(f64, f64)> =
        series.n_values.iter().zip(&series.mu_c).map(|(&n, &m)| ((n as f64).ln(), (m - mu_inf).ln())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return invalid("all N values coincide");
    }
    let s = sxy / sxx;
    let intercept = my - s * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(PowerLaw { s, amplitude: intercept.exp(), r2 })
}

/// Fit report: `method,N,mu_c,ln_N,ln_mu_c_minus_mu_inf,s,A,r2,s_quant`.
pub fn fit_csv(series: &ScalingSeries, mu_inf: f64, fit: &PowerLaw) -> String {
    let header: Vec<String> = ["method", "N", "mu_c", "ln_N", "ln_mu_c_minus_mu_inf", "s", "A", "r2", "s_quant"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = series
        .n_values
        .iter()
        .zip(&series.mu_c)
        .map(|(&n, &m)| {
            vec![
                series.method.name().into(),
                n.to_string(),
                num(m),
                num((n as f64).ln()),
                num((m - mu_inf).ln()),
                num(fit.s),
                num(fit.amplitude),
                num(fit.r2),
                num(S_QUANT),
            ]
        })
        .collect();
    csv(&header, &rows)
}
