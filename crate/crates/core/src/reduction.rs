//! Level reduction: n-level configurations split into (n-1)-level ones at
//! the critical values of the matter variables ρ_i, down to 2-level Dicke
//! subsystems, and phase diagrams composed from those subsystems.
//!
//! The branch tables are fixed per configuration. A branch `ρ_b=0` drops
//! level b; a branch `ρ_b→∞` keeps level b as the new reference level and
//! rewrites the remaining variables as η_i = ρ_i/ρ_b.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::model::{Configuration, Coupling, ModelConfig};
use crate::output::{csv, num};
use crate::phase::{Grid, PhaseDiagram, PointRecord, SolverKind};

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionNode {
    pub cfg: ModelConfig,
    /// Parent-model levels (0-based) kept by this node, in order.
    pub levels: Vec<usize>,
    /// Critical-value condition that produced the node, e.g. `ρ4=0`.
    pub branch: String,
    /// `(parent expression, child variable)` pairs.
    pub variables: Vec<(String, String)>,
    /// Variable fixed to 1 for normalisation.
    pub normalization: String,
    pub children: Vec<ReductionNode>,
}

impl ReductionNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<&ReductionNode> {
        if self.is_leaf() {
            return vec![self];
        }
        self.children.iter().flat_map(|c| c.leaves()).collect()
    }

    /// Nested `(configuration, children)` shape, for comparing trees.
    pub fn shape(&self) -> String {
        let mut s = format!("{}[{}]", self.cfg.configuration, levels_label(&self.levels));
        if !self.children.is_empty() {
            let inner: Vec<String> = self.children.iter().map(|c| c.shape()).collect();
            let _ = write!(s, "({})", inner.join(","));
        }
        s
    }
}

fn levels_label(levels: &[usize]) -> String {
    levels.iter().map(|l| (l + 1).to_string()).collect::<Vec<_>>().join("")
}

enum Cond {
    Zero(usize),
    Infinite(usize),
}

/// Branch table: condition on a (0-based) parent level and the resulting
/// configuration with the levels it keeps.
fn branches(c: Configuration) -> Result<Vec<(Cond, Configuration, [usize; 4], usize)>> {
    use Configuration::*;
    Ok(match c {
        SmallLambda4 => vec![
            (Cond::Zero(3), Lambda, [0, 1, 2, 0], 3),
            (Cond::Infinite(1), Xi, [1, 2, 3, 0], 3),
        ],
        N4 => vec![
            (Cond::Infinite(1), V, [1, 2, 3, 0], 3),
            (Cond::Zero(3), Lambda, [0, 1, 2, 0], 3),
        ],
        Xi => vec![
            (Cond::Zero(2), TwoLevel, [0, 1, 0, 0], 2),
            (Cond::Infinite(1), TwoLevel, [1, 2, 0, 0], 2),
        ],
        Lambda => vec![
            (Cond::Zero(1), TwoLevel, [0, 2, 0, 0], 2),
            (Cond::Infinite(1), TwoLevel, [1, 2, 0, 0], 2),
        ],
        V => vec![
            (Cond::Zero(2), TwoLevel, [0, 1, 0, 0], 2),
            (Cond::Zero(1), TwoLevel, [0, 2, 0, 0], 2),
        ],
        TwoLevel => Vec::new(),
        Ladder4 => {
            return Err(Error::Configuration("no reduction table for the four-level ladder".into()));
        }
    })
}

/// Sub-model on the given levels: couplings between kept levels, the modes
/// they use, the level frequencies of the kept levels.
fn sub_config(cfg: &ModelConfig, conf: Configuration, keep: &[usize]) -> Result<ModelConfig> {
    let pos = |l: usize| keep.iter().position(|&k| k == l);
    let mut modes: Vec<usize> = Vec::new();
    let mut picked: Vec<Coupling> = Vec::new();
    for &(lo, hi) in conf.transitions() {
        let (plo, phi) = (keep[lo], keep[hi]);
        let c = cfg
            .couplings
            .iter()
            .find(|c| c.lower == plo && c.upper == phi)
            .ok_or_else(|| Error::Configuration(format!("reduction needs a coupling on transition {}{}", plo + 1, phi + 1)))?;
        if !modes.contains(&c.mode) {
            modes.push(c.mode);
        }
        picked.push(*c);
    }
    modes.sort_unstable();
    let couplings = picked
        .iter()
        .map(|c| {
            let m = modes.iter().position(|&m| m == c.mode).unwrap();
            Coupling::new(pos(c.lower).unwrap(), pos(c.upper).unwrap(), m, c.mu)
        })
        .collect();
    ModelConfig::new(
        conf,
        keep.iter().map(|&l| cfg.omega[l]).collect(),
        modes.iter().map(|&m| cfg.modes[m]).collect(),
        couplings,
        cfg.atoms,
        cfg.rwa,
        modes.iter().map(|&m| cfg.cutoffs[m]).collect(),
    )
}

fn expand(cfg: &ModelConfig, levels: &[usize], var: char) -> Result<Vec<ReductionNode>> {
    let mut out = Vec::new();
    for (cond, conf, keep, n) in branches(cfg.configuration)? {
        let keep = &keep[..n];
        let child_levels: Vec<usize> = keep.iter().map(|&l| levels[l]).collect();
        let name = |l: usize| format!("{var}{}", levels[l] + 1);
        let (branch, child_var, variables, normalization) = match cond {
            Cond::Zero(b) => {
                let vars = keep.iter().map(|&l| (name(l), name(l))).collect();
                (format!("{}=0", name(b)), var, vars, format!("{}=1", name(keep[0])))
            }
            Cond::Infinite(b) => {
                let vars = keep
                    .iter()
                    .map(|&l| {
                        let ratio = if l == b { "1".to_string() } else { format!("{}/{}", name(l), name(b)) };
                        (ratio, format!("η{}", levels[l] + 1))
                    })
                    .collect();
                (format!("{}→∞", name(b)), 'η', vars, format!("η{}=1", levels[b] + 1))
            }
        };
        let sub = sub_config(cfg, conf, keep)?;
        let children = expand(&sub, &child_levels, child_var)?;
        out.push(ReductionNode { cfg: sub, levels: child_levels, branch, variables, normalization, children });
    }
    Ok(out)
}

/// Children of `cfg` under its branch table, each carrying its own subtree.
/// Two-level models give an empty list.
pub fn reduce_once(cfg: &ModelConfig) -> Result<Vec<ReductionNode>> {
    cfg.validate()?;
    let levels: Vec<usize> = (0..cfg.n_levels()).collect();
    expand(cfg, &levels, 'ρ')
}

/// Whole reduction tree with `cfg` at the root (normalised by ρ1 = 1).
pub fn reduction_tree(cfg: &ModelConfig) -> Result<ReductionNode> {
    let children = reduce_once(cfg)?;
    let levels: Vec<usize> = (0..cfg.n_levels()).collect();
    let variables = levels.iter().map(|l| (format!("ρ{}", l + 1), format!("ρ{}", l + 1))).collect();
    Ok(ReductionNode {
        cfg: cfg.clone(),
        levels,
        branch: "root".into(),
        variables,
        normalization: "ρ1=1".into(),
        children,
    })
}

/// Indented text rendering, one node per line.
pub fn tree_text(root: &ReductionNode) -> String {
    fn rec(n: &ReductionNode, depth: usize, s: &mut String) {
        let vars: Vec<String> = n.variables.iter().filter(|(a, b)| a != b).map(|(a, b)| format!("{b}={a}")).collect();
        let _ = write!(
            s,
            "{}[{}] {} levels {}",
            "  ".repeat(depth),
            n.branch,
            n.cfg.configuration,
            n.levels.iter().map(|l| (l + 1).to_string()).collect::<Vec<_>>().join("-")
        );
        if !vars.is_empty() {
            let _ = write!(s, " ({})", vars.join(", "));
        }
        s.push('\n');
        for c in &n.children {
            rec(c, depth + 1, s);
        }
    }
    let mut s = String::new();
    rec(root, 0, &mut s);
    s
}

/// Adjacency table: `id,parent,depth,branch,configuration,levels,normalization`.
/// The root has parent -1; ids follow depth-first order.
pub fn tree_csv(root: &ReductionNode) -> String {
    fn rec(n: &ReductionNode, parent: i64, depth: usize, rows: &mut Vec<Vec<String>>) {
        let id = rows.len() as i64;
        rows.push(vec![
            id.to_string(),
            parent.to_string(),
            depth.to_string(),
            n.branch.clone(),
            n.cfg.configuration.name().into(),
            levels_label(&n.levels),
            n.normalization.clone(),
        ]);
        for c in &n.children {
            rec(c, id, depth + 1, rows);
        }
    }
    let mut rows = Vec::new();
    rec(root, -1, 0, &mut rows);
    let header: Vec<String> =
        ["id", "parent", "depth", "branch", "configuration", "levels", "normalization"].iter().map(|s| s.to_string()).collect();
    csv(&header, &rows)
}

/// A 2-level Dicke subsystem between parent levels `j < k` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelSubsystem {
    pub j: usize,
    pub k: usize,
    /// Index of the coupling in the parent model.
    pub coupling: usize,
    pub mode: usize,
    pub omega_mode: f64,
    pub omega_j: f64,
    pub omega_kj: f64,
    pub mu: f64,
    /// `½√(Ω ω_kj)` (`√(Ω ω_kj)` under the RWA); 0 when gapless.
    pub mu_c: f64,
    pub atoms: u32,
    pub rwa: bool,
}

impl TwoLevelSubsystem {
    pub fn label(&self) -> String {
        format!("{}{}", self.j + 1, self.k + 1)
    }

    pub fn gapless(&self) -> bool {
        self.omega_kj <= 0.0
    }

    /// Effective coupling `g` entering the closed forms.
    fn g(&self, mu: f64) -> f64 {
        if self.rwa {
            mu
        } else {
            2.0 * mu
        }
    }

    /// Variational ground energy at coupling `mu`: `Nω_j` below μᶜ, the
    /// collective branch above it.
    pub fn energy(&self, mu: f64) -> f64 {
        let n = self.atoms as f64;
        let (om, w) = (self.omega_mode, self.omega_kj.max(0.0));
        let g = self.g(mu);
        if g * g <= om * w {
            return n * self.omega_j;
        }
        n * (self.omega_j + 0.5 * w) - n * (g.powi(4) + om * om * w * w) / (4.0 * om * g * g)
    }

    /// Mean photon number of the variational ground state.
    pub fn photons(&self, mu: f64) -> f64 {
        let (om, w) = (self.omega_mode, self.omega_kj.max(0.0));
        let g = self.g(mu);
        if g * g <= om * w {
            return 0.0;
        }
        let x = om * w / (g * g);
        self.atoms as f64 * g * g * (1.0 - x * x) / (4.0 * om * om)
    }

    /// Coupling at which the collective branch drops below the energy
    /// `N·e_ref` of all atoms in a level at frequency `e_ref ≤ ω_j`. Equals
    /// μᶜ when `e_ref = ω_j`.
    pub fn onset(&self, e_ref: f64) -> f64 {
        let (om, w) = (self.omega_mode, self.omega_kj.max(0.0));
        let e0 = (self.omega_j - e_ref).max(0.0);
        let u = om * ((2.0 * e0 + w) + 2.0 * (e0 * (e0 + w)).sqrt());
        if self.rwa {
            u.sqrt()
        } else {
            0.5 * u.sqrt()
        }
    }
}

/// Distinct 2-level leaves of the reduction tree, in depth-first order.
pub fn two_level_subsystems(cfg: &ModelConfig) -> Result<Vec<TwoLevelSubsystem>> {
    let root = reduction_tree(cfg)?;
    let mut out: Vec<TwoLevelSubsystem> = Vec::new();
    for leaf in root.leaves() {
        if leaf.cfg.configuration != Configuration::TwoLevel {
            continue;
        }
        let (j, k) = (leaf.levels[0], leaf.levels[1]);
        if out.iter().any(|s| s.j == j && s.k == k) {
            continue;
        }
        let coupling = cfg
            .couplings
            .iter()
            .position(|c| c.lower == j && c.upper == k)
            .ok_or_else(|| Error::Configuration(format!("no coupling on transition {}{}", j + 1, k + 1)))?;
        let c = cfg.couplings[coupling];
        let om = cfg.modes[c.mode];
        let w = cfg.omega[k] - cfg.omega[j];
        let r = if w > 0.0 { (om * w).sqrt() } else { 0.0 };
        out.push(TwoLevelSubsystem {
            j,
            k,
            coupling,
            mode: c.mode,
            omega_mode: om,
            omega_j: cfg.omega[j],
            omega_kj: w,
            mu: c.mu,
            mu_c: if cfg.rwa { r } else { 0.5 * r },
            atoms: cfg.atoms,
            rwa: cfg.rwa,
        });
    }
    Ok(out)
}

/// Phase diagram assembled from 2-level subsystems by energy dominance.
///
/// The reference (normal) energy is `N·ω_1`. A point is normal when no
/// subsystem's collective energy lies below it; otherwise it is labelled
/// `S_jk` after the subsystem with the lowest energy, whose photons fill
/// its mode. Charges are not defined for composed states and are NaN.
pub fn compose_diagram(cfg: &ModelConfig, subsystems: &[TwoLevelSubsystem], grid: &Grid) -> Result<PhaseDiagram> {
    if subsystems.is_empty() {
        return invalid("no subsystems to compose");
    }
    for s in subsystems {
        if s.coupling >= cfg.couplings.len() || s.mode >= cfg.n_modes() {
            return invalid(format!("subsystem {} does not belong to the model", s.label()));
        }
    }
    for a in &grid.axes {
        if !subsystems.iter().any(|s| s.coupling == a.coupling) {
            return invalid(format!("axis {} drives no subsystem", a.label));
        }
    }
    let n = cfg.atoms as f64;
    let e_ref = cfg.omega[0];
    let normal = n * e_ref;
    let axes = grid.axes.len();
    let points = (0..grid.len())
        .map(|i| {
            let mu = grid.mu_at(cfg, i);
            let mut best: Option<(usize, f64)> = None;
            for (si, s) in subsystems.iter().enumerate() {
                let e = s.energy(mu[s.coupling]);
                if best.map_or(true, |(_, b)| e < b) {
                    best = Some((si, e));
                }
            }
            let (si, e) = best.unwrap();
            let tie = 1e-12 * normal.abs().max(1.0);
            let mut photons = vec![0.0; cfg.n_modes()];
            let mut coupling_energy = vec![0.0; cfg.couplings.len()];
            let (e0, label) = if e < normal - tie {
                let s = &subsystems[si];
                let nu = s.photons(mu[s.coupling]);
                photons[s.mode] = nu;
                coupling_energy[s.coupling] = -2.0 * s.omega_mode * nu;
                (e, format!("S{}", s.label()))
            } else {
                (normal, "N".to_string())
            };
            PointRecord {
                valid: true,
                e0,
                photons,
                charges: vec![f64::NAN; cfg.charges().len()],
                coupling_energy,
                chi: vec![0.0; axes],
                label,
            }
        })
        .collect();
    Ok(PhaseDiagram { cfg: cfg.clone(), grid: grid.clone(), solver: SolverKind::Composed, points, invalid: 0 })
}

/// Per-subsystem critical couplings as CSV:
/// `transition,mode,Omega,omega_kj,mu_c,onset,gapless`.
pub fn subsystems_csv(cfg: &ModelConfig, subsystems: &[TwoLevelSubsystem]) -> String {
    let header: Vec<String> =
        ["transition", "mode", "Omega", "omega_kj", "mu_c", "onset", "gapless"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = subsystems
        .iter()
        .map(|s| {
            vec![
                s.label(),
                (s.mode + 1).to_string(),
                num(s.omega_mode),
                num(s.omega_kj),
                num(s.mu_c),
                num(s.onset(cfg.omega[0])),
                if s.gapless() { "1" } else { "0" }.into(),
            ]
        })
        .collect();
    csv(&header, &rows)
}
