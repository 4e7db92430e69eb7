//! Grid scans over coupling space, region labels, separatrices from the
//! fidelity susceptibility and transition-order classification.

use std::str::FromStr;

use rayon::prelude::*;

use crate::coherent::{coherent_energy, overlap, CoherentParams};
use crate::error::{invalid, Error, Result};
use crate::model::{Configuration, ModelConfig};
use crate::output::{csv, num};
use crate::sas::{minimize_sas_kind, sas_energy, sas_number, sas_overlap, SasKind, SasParams};
use crate::solver::{ground_fidelity, BlockSolver, GroundState};
use crate::state::{expectation, susceptibility};
use crate::variational::{minimize_coherent_seeded, TransitionOrder, VARIATIONAL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Exact,
    Coherent,
    Sas,
    /// Assembled from 2-level subsystems (see `reduction`).
    Composed,
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "coherent" => Ok(SolverKind::Coherent),
            "sas" => Ok(SolverKind::Sas),
            "composed" => Ok(SolverKind::Composed),
            _ => invalid(format!("unknown solver '{s}' (exact, coherent, sas, composed)")),
        }
    }
}

/// One scanned coupling: `n` equally spaced values from `lo` to `hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub label: String,
    pub coupling: usize,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    /// `name` is a coupling label such as `mu12` or `12`; `gamma` names the
    /// coupling of the two-level model.
    pub fn new(cfg: &ModelConfig, name: &str, lo: f64, hi: f64, step: f64) -> Result<Self> {
        let key = if name == "gamma" && cfg.configuration == Configuration::TwoLevel {
            "12"
        } else {
            name.strip_prefix("mu").unwrap_or(name)
        };
        let coupling = cfg
            .coupling_index(key)
            .ok_or_else(|| Error::InvalidParameter(format!("no coupling '{name}' in the model")))?;
        if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return invalid(format!("bad axis range {lo}:{hi}:{step}"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok(Axis { label: name.to_string(), coupling, lo, hi: lo + step * (n - 1) as f64, n })
    }

    /// `name:lo:hi:step`.
    pub fn parse(cfg: &ModelConfig, spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 4 {
            return invalid(format!("axis '{spec}' must be name:lo:hi:step"));
        }
        let f = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number '{s}' in axis")));
        Self::new(cfg, parts[0].trim(), f(parts[1])?, f(parts[2])?, f(parts[3])?)
    }

    pub fn step(&self) -> f64 {
        if self.n > 1 {
            (self.hi - self.lo) / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }
}

/// Rectangular grid, last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return invalid("a grid needs one to three axes");
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.coupling == a.coupling) {
                return invalid(format!("coupling of axis '{}' scanned twice", a.label));
            }
        }
        Ok(Grid { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, mut flat: usize) -> Vec<usize> {
        let mut c = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            c[k] = flat % a.n;
            flat /= a.n;
        }
        c
    }

    pub fn flat(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.axes).fold(0, |acc, (&c, a)| acc * a.n + c)
    }

    /// Next point along `axis`, if any.
    pub fn forward(&self, flat: usize, axis: usize) -> Option<usize> {
        let mut c = self.coords(flat);
        (c[axis] + 1 < self.axes[axis].n).then(|| {
            c[axis] += 1;
            self.flat(&c)
        })
    }

    pub fn values(&self, flat: usize) -> Vec<f64> {
        self.coords(flat).iter().zip(&self.axes).map(|(&c, a)| a.value(c)).collect()
    }

    /// Couplings of `cfg` with the scanned ones replaced.
    pub fn mu_at(&self, cfg: &ModelConfig, flat: usize) -> Vec<f64> {
        let mut mu = cfg.mu();
        for (a, v) in self.axes.iter().zip(self.values(flat)) {
            mu[a.coupling] = v;
        }
        mu
    }

    /// Flat indices of the line through `flat` along `axis`.
    pub fn line(&self, flat: usize, axis: usize) -> Vec<usize> {
        let mut c = self.coords(flat);
        (0..self.axes[axis].n)
            .map(|i| {
                c[axis] = i;
                self.flat(&c)
            })
            .collect()
    }
}

/// Ground state of one grid point in the representation of its solver.
#[derive(Clone, Debug)]
pub enum GroundRepr {
    Vector(GroundState),
    Coherent(CoherentParams),
    Sas(SasParams),
}

#[derive(Clone, Debug)]
pub struct PointRecord {
    pub valid: bool,
    pub e0: f64,
    /// Mean photon number per mode.
    pub photons: Vec<f64>,
    /// Expectation of each conserved charge.
    pub charges: Vec<f64>,
    /// `μ_c ⟨V_c⟩` per coupling.
    pub coupling_energy: Vec<f64>,
    /// Fidelity susceptibility per axis.
    pub chi: Vec<f64>,
    pub label: String,
}

impl PointRecord {
    fn invalid(cfg: &ModelConfig, axes: usize) -> Self {
        PointRecord {
            valid: false,
            e0: f64::NAN,
            photons: vec![f64::NAN; cfg.n_modes()],
            charges: vec![f64::NAN; cfg.charges().len()],
            coupling_energy: vec![f64::NAN; cfg.couplings.len()],
            chi: vec![0.0; axes],
            label: "invalid".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PhaseDiagram {
    pub cfg: ModelConfig,
    pub grid: Grid,
    pub solver: SolverKind,
    pub points: Vec<PointRecord>,
    /// Number of points whose solve failed.
    pub invalid: usize,
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Photon expectation below which a point counts as normal.
    pub photon_cut: f64,
    pub sas_kind: SasKind,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { photon_cut: 0.5, sas_kind: SasKind::Parity, tol: VARIATIONAL_TOL }
    }
}

struct Solved {
    repr: GroundRepr,
    e0: f64,
    photons: Vec<f64>,
    charges: Vec<f64>,
    coupling_energy: Vec<f64>,
}

fn only(cfg: &ModelConfig, c: Option<usize>) -> ModelConfig {
    let mu: Vec<f64> = (0..cfg.couplings.len()).map(|i| if Some(i) == c { 1.0 } else { 0.0 }).collect();
    cfg.with_mu(&mu)
}

fn solve_exact(solver: &BlockSolver, mu: &[f64]) -> Result<Solved> {
    let (b, g) = solver.ground_indexed(mu)?;
    let block = &solver.blocks[b];
    let basis = &block.basis;
    let charges = solver.cfg.charges();
    let mut photons = vec![0.0; solver.cfg.n_modes()];
    let mut k = vec![0.0; charges.len()];
    for (i, a) in g.state.amps().iter().enumerate() {
        let w = a.norm_sqr();
        for (p, &n) in photons.iter_mut().zip(basis.photons(i)) {
            *p += w * n as f64;
        }
        for (kv, ch) in k.iter_mut().zip(&charges) {
            *kv += w * ch.value(basis.photons(i), basis.occupations(i)) as f64;
        }
    }
    let coupling_energy = block
        .parts
        .interactions
        .iter()
        .zip(mu)
        .map(|(v, m)| Ok(m * expectation(&g.state, v)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Solved { e0: g.energy, repr: GroundRepr::Vector(g), photons, charges: k, coupling_energy })
}

fn coherent_numbers(cfg: &ModelConfig, p: &CoherentParams) -> (Vec<f64>, Vec<f64>) {
    let photons = p.photons();
    let pops = p.populations(cfg.atoms);
    let charges = cfg
        .charges()
        .iter()
        .map(|k| {
            let a: f64 = k.photon_weights.iter().zip(&photons).map(|(&w, n)| w as f64 * n).sum();
            let b: f64 = k.level_weights.iter().zip(&pops).map(|(&w, n)| w as f64 * n).sum();
            a + b
        })
        .collect();
    (photons, charges)
}

fn solve_coherent(cfg: &ModelConfig, opts: &ScanOptions) -> Result<Solved> {
    let m = minimize_coherent_seeded(cfg, &[], opts.tol)?;
    let (photons, charges) = coherent_numbers(cfg, &m.params);
    let free = coherent_energy(&only(cfg, None), &m.params)?;
    let coupling_energy = (0..cfg.couplings.len())
        .map(|c| Ok(cfg.couplings[c].mu * (coherent_energy(&only(cfg, Some(c)), &m.params)? - free)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Solved { e0: m.energy, repr: GroundRepr::Coherent(m.params), photons, charges, coupling_energy })
}

fn solve_sas(cfg: &ModelConfig, opts: &ScanOptions) -> Result<Solved> {
    let m = minimize_sas_kind(cfg, opts.sas_kind)?;
    let g = m.ground();
    let p = SasParams::new(g.params.clone(), g.parity.clone(), opts.sas_kind);
    let l = cfg.n_modes();
    let n = cfg.n_levels();
    let photons = (0..l)
        .map(|mode| {
            let w: Vec<f64> = (0..l).map(|i| f64::from(i == mode)).collect();
            sas_number(cfg, &p, &w, &vec![0.0; n])
        })
        .collect::<Result<Vec<_>>>()?;
    let charges = cfg
        .charges()
        .iter()
        .map(|k| {
            let pw: Vec<f64> = k.photon_weights.iter().map(|&w| w as f64).collect();
            let lw: Vec<f64> = k.level_weights.iter().map(|&w| w as f64).collect();
            sas_number(cfg, &p, &pw, &lw)
        })
        .collect::<Result<Vec<_>>>()?;
    let free = sas_energy(&only(cfg, None), &p)?;
    let coupling_energy = (0..cfg.couplings.len())
        .map(|c| Ok(cfg.couplings[c].mu * (sas_energy(&only(cfg, Some(c)), &p)? - free)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Solved { e0: g.energy, repr: GroundRepr::Sas(p), photons, charges, coupling_energy })
}

fn fidelity_between(cfg: &ModelConfig, a: &GroundRepr, b: &GroundRepr) -> Result<f64> {
    match (a, b) {
        (GroundRepr::Vector(x), GroundRepr::Vector(y)) => ground_fidelity(x, y),
        (GroundRepr::Coherent(x), GroundRepr::Coherent(y)) => Ok(overlap(x, y, cfg.atoms).norm_sqr().min(1.0)),
        (GroundRepr::Sas(x), GroundRepr::Sas(y)) => Ok(sas_overlap(cfg, x, y)?.norm_sqr().min(1.0)),
        _ => invalid("fidelity between different representations"),
    }
}

/// Scan `grid` with the default options.
pub fn scan(cfg: &ModelConfig, grid: &Grid, solver: SolverKind) -> Result<PhaseDiagram> {
    scan_with(cfg, grid, solver, &ScanOptions::default())
}

/// Ground states on every grid point, susceptibilities along every axis and
/// region labels. Failed points are marked invalid and counted.
pub fn scan_with(cfg: &ModelConfig, grid: &Grid, solver: SolverKind, opts: &ScanOptions) -> Result<PhaseDiagram> {
    if grid.is_empty() {
        return invalid("empty grid");
    }
    let exact = match solver {
        SolverKind::Exact => Some(BlockSolver::new(cfg)?),
        SolverKind::Composed => return invalid("composed diagrams are built by reduction::compose_diagram"),
        _ => None,
    };
    let solved: Vec<Option<Solved>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mu = grid.mu_at(cfg, i);
            let r = match solver {
                SolverKind::Exact => solve_exact(exact.as_ref().unwrap(), &mu),
                SolverKind::Coherent => solve_coherent(&cfg.with_mu(&mu), opts),
                SolverKind::Sas => solve_sas(&cfg.with_mu(&mu), opts),
                SolverKind::Composed => unreachable!(),
            };
            r.ok()
        })
        .collect();
    let axes = grid.axes.len();
    let chi: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            (0..axes)
                .map(|a| {
                    let step = grid.axes[a].step();
                    let nb = grid.forward(i, a).or_else(|| {
                        let mut c = grid.coords(i);
                        (c[a] > 0).then(|| {
                            c[a] -= 1;
                            grid.flat(&c)
                        })
                    });
                    match (nb, &solved[i]) {
                        (Some(j), Some(x)) if step > 0.0 => match &solved[j] {
                            Some(y) => fidelity_between(cfg, &x.repr, &y.repr)
                                .and_then(|f| susceptibility(f, step))
                                .unwrap_or(0.0),
                            None => 0.0,
                        },
                        _ => 0.0,
                    }
                })
                .collect()
        })
        .collect();
    let mut invalid_count = 0;
    let points = solved
        .into_iter()
        .zip(chi)
        .map(|(s, chi)| match s {
            Some(s) => PointRecord {
                valid: true,
                e0: s.e0,
                photons: s.photons,
                charges: s.charges,
                coupling_energy: s.coupling_energy,
                chi,
                label: String::new(),
            },
            None => {
                invalid_count += 1;
                PointRecord::invalid(cfg, axes)
            }
        })
        .collect();
    let pd = PhaseDiagram { cfg: cfg.clone(), grid: grid.clone(), solver, points, invalid: invalid_count };
    Ok(label_regions(pd, opts.photon_cut))
}

/// Region tag of one point: `M=k` (or `K=a/b`) for exact RWA solutions,
/// where the charges are sharp; otherwise `N` when every mode holds fewer
/// than `photon_cut` photons and `S_jk` for the strongest coupling of the
/// most populated mode.
pub fn region_label(cfg: &ModelConfig, solver: SolverKind, p: &PointRecord, photon_cut: f64) -> String {
    if !p.valid {
        return "invalid".into();
    }
    if cfg.rwa && solver == SolverKind::Exact {
        let v: Vec<String> = p.charges.iter().map(|k| format!("{}", k.round() as i64)).collect();
        return if v.len() == 1 { format!("M={}", v[0]) } else { format!("K={}", v.join("/")) };
    }
    if p.photons.iter().all(|&n| n < photon_cut) {
        return "N".into();
    }
    let mode = (0..p.photons.len()).fold(0, |b, m| if p.photons[m] > p.photons[b] { m } else { b });
    let mut best: Option<usize> = None;
    for (c, cp) in cfg.couplings.iter().enumerate() {
        if cp.mode == mode && best.map_or(true, |b| p.coupling_energy[c].abs() > p.coupling_energy[b].abs()) {
            best = Some(c);
        }
    }
    best.map_or_else(|| "N".into(), |c| format!("S{}", cfg.couplings[c].label()))
}

pub fn label_regions(mut pd: PhaseDiagram, photon_cut: f64) -> PhaseDiagram {
    for i in 0..pd.points.len() {
        pd.points[i].label = region_label(&pd.cfg, pd.solver, &pd.points[i], photon_cut);
    }
    pd
}

impl PhaseDiagram {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.grid.axes.iter().map(|a| a.label.clone()).collect();
        h.push("E0".into());
        h.push("E0_per_N".into());
        h.extend((1..=self.cfg.n_modes()).map(|m| format!("nu_{m}")));
        h.extend(self.cfg.charges().into_iter().map(|k| k.name));
        h.extend(self.grid.axes.iter().map(|a| format!("chi_{}", a.label)));
        h.push("label".into());
        h.push("valid".into());
        h
    }

    pub fn to_csv(&self) -> String {
        let n = self.cfg.atoms as f64;
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut r: Vec<String> = self.grid.values(i).into_iter().map(num).collect();
                r.push(num(p.e0));
                r.push(num(p.e0 / n));
                r.extend(p.photons.iter().map(|&x| num(x)));
                r.extend(p.charges.iter().map(|&x| num(x)));
                r.extend(p.chi.iter().map(|&x| num(x)));
                r.push(p.label.clone());
                r.push(if p.valid { "1" } else { "0" }.into());
                r
            })
            .collect();
        csv(&self.header(), &rows)
    }

    /// Median of all valid susceptibilities.
    pub fn chi_median(&self) -> f64 {
        let mut v: Vec<f64> = self.points.iter().filter(|p| p.valid).flat_map(|p| p.chi.iter().copied()).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        if v.len() % 2 == 1 {
            v[m]
        } else {
            0.5 * (v[m - 1] + v[m])
        }
    }

    /// Position of the largest susceptibility along `axis` on the line
    /// through `flat`, at the midpoint of the edge it belongs to.
    pub fn chi_peak(&self, flat: usize, axis: usize) -> Option<f64> {
        let line = self.grid.line(flat, axis);
        let mut best: Option<(usize, f64)> = None;
        for (k, &i) in line.iter().enumerate().take(line.len().saturating_sub(1)) {
            let c = self.points[i].chi[axis];
            if self.points[i].valid && best.map_or(true, |b| c > b.1) {
                best = Some((k, c));
            }
        }
        let a = &self.grid.axes[axis];
        best.map(|(k, _)| a.value(k) + 0.5 * a.step())
    }
}

/// A flagged grid edge between points `a` and its forward neighbour `b`.
#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
    /// Midpoint of the edge in coupling space.
    pub point: Vec<f64>,
    pub chi: f64,
    pub label_change: bool,
}

#[derive(Clone, Debug)]
pub struct Polyline {
    pub points: Vec<Vec<f64>>,
    pub order: TransitionOrder,
    /// Index along the third axis for slices of 3D scans.
    pub slice: Option<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct Separatrix {
    pub edges: Vec<BoundaryEdge>,
    pub polylines: Vec<Polyline>,
}

impl Separatrix {
    /// `polyline,slice,point,<axes...>,order`, one row per polyline vertex;
    /// `slice` is -1 for planar scans.
    pub fn to_csv(&self, grid: &Grid) -> String {
        let mut header: Vec<String> = vec!["polyline".into(), "slice".into(), "point".into()];
        header.extend(grid.axes.iter().map(|a| a.label.clone()));
        header.push("order".into());
        let mut rows = Vec::new();
        for (i, pl) in self.polylines.iter().enumerate() {
            for (k, pt) in pl.points.iter().enumerate() {
                let mut r = vec![i.to_string(), pl.slice.map_or("-1".into(), |s| s.to_string()), k.to_string()];
                r.extend(pt.iter().map(|&x| num(x)));
                r.push(pl.order.name().into());
                rows.push(r);
            }
        }
        csv(&header, &rows)
    }
}

/// Default susceptibility threshold relative to the grid median.
pub const CHI_THRESHOLD: f64 = 10.0;

fn flagged(pd: &PhaseDiagram, i: usize, axis: usize, cut: f64) -> Option<BoundaryEdge> {
    let j = pd.grid.forward(i, axis)?;
    let (p, q) = (&pd.points[i], &pd.points[j]);
    if !p.valid || !q.valid {
        return None;
    }
    let label_change = p.label != q.label;
    let chi = p.chi[axis];
    if !(label_change || (chi > cut && chi > 0.0)) {
        return None;
    }
    let va = pd.grid.values(i);
    let vb = pd.grid.values(j);
    let point = va.iter().zip(&vb).map(|(x, y)| 0.5 * (x + y)).collect();
    Some(BoundaryEdge { a: i, b: j, axis, point, chi, label_change })
}

/// Edges where χ exceeds `thresh` times the grid median or where the region
/// label changes, joined into polylines (per slice of the third axis).
pub fn detect_separatrix(pd: &PhaseDiagram, thresh: f64) -> Separatrix {
    let cut = thresh * pd.chi_median();
    let planar = pd.grid.axes.len().min(2);
    let mut edges = Vec::new();
    for i in 0..pd.grid.len() {
        for axis in 0..planar {
            if let Some(e) = flagged(pd, i, axis, cut) {
                edges.push(e);
            }
        }
    }
    let steps: Vec<f64> = pd.grid.axes.iter().map(|a| a.step().max(1e-300)).collect();
    let slice_of = |e: &BoundaryEdge| (pd.grid.axes.len() == 3).then(|| pd.grid.coords(e.a)[2]);
    let mut polylines = Vec::new();
    let mut used = vec![false; edges.len()];
    let near = |x: &BoundaryEdge, y: &BoundaryEdge| {
        slice_of(x) == slice_of(y)
            && x.point.iter().zip(&y.point).zip(&steps).all(|((a, b), s)| (a - b).abs() <= s * (1.0 + 1e-9))
    };
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let mut comp = vec![start];
        used[start] = true;
        let mut k = 0;
        while k < comp.len() {
            for j in 0..edges.len() {
                if !used[j] && near(&edges[comp[k]], &edges[j]) {
                    used[j] = true;
                    comp.push(j);
                }
            }
            k += 1;
        }
        // walk from the member with the fewest neighbours
        let deg = |i: usize| comp.iter().filter(|&&j| j != i && near(&edges[i], &edges[j])).count();
        let mut cur = *comp.iter().min_by_key(|&&i| (deg(i), i)).unwrap();
        let mut left: Vec<usize> = comp.iter().copied().filter(|&i| i != cur).collect();
        let mut pts = vec![edges[cur].point.clone()];
        while !left.is_empty() {
            let d = |i: usize| {
                edges[i].point.iter().zip(&edges[cur].point).zip(&steps).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>()
            };
            let (pos, _) = left.iter().enumerate().min_by(|a, b| d(*a.1).total_cmp(&d(*b.1))).unwrap();
            cur = left.swap_remove(pos);
            pts.push(edges[cur].point.clone());
        }
        polylines.push(Polyline { points: pts, order: TransitionOrder::Unknown, slice: slice_of(&edges[start]) });
    }
    Separatrix { edges, polylines }
}

/// Order of the single transition crossed by `path` (consecutive grid
/// points along one axis): a jump in dE₀/ds larger than ten times the
/// off-boundary variation of the first differences means first order,
/// otherwise second.
pub fn classify_order(pd: &PhaseDiagram, path: &[usize]) -> Result<TransitionOrder> {
    if path.len() < 8 {
        return invalid("path too short to classify");
    }
    let axis = (0..pd.grid.axes.len())
        .find(|&a| pd.grid.forward(path[0], a) == Some(path[1]))
        .ok_or_else(|| Error::InvalidParameter("path must follow one grid axis".into()))?;
    if path.windows(2).any(|w| pd.grid.forward(w[0], axis) != Some(w[1])) {
        return invalid("path must follow one grid axis");
    }
    if path.iter().any(|&i| !pd.points[i].valid) {
        return Err(Error::NoTransition("path contains invalid points".into()));
    }
    let cut = CHI_THRESHOLD * pd.chi_median();
    let edges = path.len() - 1;
    let changes: Vec<bool> = path.windows(2).map(|w| pd.points[w[0]].label != pd.points[w[1]].label).collect();
    let peaks: Vec<bool> = path.windows(2).map(|w| flagged(pd, w[0], axis, cut).is_some()).collect();
    // label changes define the crossings; without any, isolated χ peaks do
    let use_labels = changes.iter().any(|&c| c);
    let flags = if use_labels { &changes } else { &peaks };
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (k, &f) in flags.iter().enumerate() {
        if f {
            match runs.last_mut() {
                Some(r) if r.1 + 1 == k => r.1 = k,
                _ => runs.push((k, k)),
            }
        }
    }
    if !use_labels {
        runs.retain(|r| r.0 > 0 && r.1 + 1 < edges);
    }
    match runs.len() {
        0 => return Err(Error::NoTransition("path crosses no boundary".into())),
        1 => {}
        n => return Err(Error::NoTransition(format!("path crosses {n} boundaries"))),
    }
    let (r0, r1) = runs[0];
    let k = (r0..=r1).max_by(|&a, &b| pd.points[path[a]].chi[axis].total_cmp(&pd.points[path[b]].chi[axis])).unwrap();
    let h = pd.grid.axes[axis].step();
    let e: Vec<f64> = path.iter().map(|&i| pd.points[i].e0).collect();
    let d1: Vec<f64> = e.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    if k == 0 || k + 1 >= d1.len() {
        return Err(Error::NoTransition("boundary too close to the path end".into()));
    }
    let jump = (d1[k + 1] - d1[k - 1]).abs();
    let mut noise: f64 = 0.0;
    for i in 1..d1.len() - 1 {
        if i + 2 < k || i > k + 2 {
            noise = noise.max((d1[i + 1] - d1[i - 1]).abs());
        }
    }
    let floor = 1e-9 * e.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    Ok(if jump > 10.0 * noise.max(floor) { TransitionOrder::First } else { TransitionOrder::Second })
}
