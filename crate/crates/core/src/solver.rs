//! Ground states of a model over its symmetry blocks, and photon-cutoff
//! convergence.

use std::sync::Arc;

use crate::basis::{enumerate_basis, symmetry_blocks, BasisIndex, Sector};
use crate::eigen::lowest_eigenpairs;
use crate::error::{invalid, Error, Result};
use crate::model::ModelConfig;
use crate::operator::HamiltonianParts;
use crate::state::{inner, StateVector};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub sector: Sector,
    pub residual: f64,
}

/// One block of a block-diagonal Hamiltonian.
#[derive(Clone, Debug)]
pub struct Block {
    pub sector: Sector,
    pub basis: Arc<BasisIndex>,
    pub parts: HamiltonianParts,
}

/// Bases and Hamiltonian pieces per symmetry block, reused across couplings.
#[derive(Clone, Debug)]
pub struct BlockSolver {
    pub cfg: ModelConfig,
    pub blocks: Vec<Block>,
    pub tol: f64,
}

impl BlockSolver {
    /// Split the full truncated basis of `cfg` into its symmetry blocks.
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        let full = enumerate_basis(cfg, &Sector::All)?;
        Self::from_basis(cfg, &full)
    }

    pub fn from_basis(cfg: &ModelConfig, basis: &BasisIndex) -> Result<Self> {
        let blocks = symmetry_blocks(cfg, basis)
            .into_iter()
            .map(|(sector, b)| {
                let parts = HamiltonianParts::new(cfg, &b)?;
                Ok(Block { sector, basis: Arc::new(b), parts })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockSolver { cfg: cfg.clone(), blocks, tol: DEFAULT_TOL })
    }

    /// Keep only the listed sectors.
    pub fn restrict(mut self, sectors: &[Sector]) -> Self {
        self.blocks.retain(|b| sectors.contains(&b.sector));
        self
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.dim()).sum()
    }

    /// Lowest state of one block at couplings `mu`.
    pub fn block_ground(&self, block: usize, mu: &[f64]) -> Result<GroundState> {
        let b = &self.blocks[block];
        let h = b.parts.assemble(mu)?;
        let r = lowest_eigenpairs(&h, 1, self.tol)?;
        let state = StateVector::new(b.basis.clone(), r.vectors[0].clone())?;
        Ok(GroundState { energy: r.energies[0], state, sector: b.sector.clone(), residual: r.residuals[0] })
    }

    /// Global ground state: lowest over blocks, earlier block on ties.
    pub fn ground(&self, mu: &[f64]) -> Result<GroundState> {
        Ok(self.ground_indexed(mu)?.1)
    }

    /// Global ground state together with the index of its block.
    pub fn ground_indexed(&self, mu: &[f64]) -> Result<(usize, GroundState)> {
        if self.blocks.is_empty() {
            return invalid("no symmetry blocks to solve");
        }
        let mut best: Option<(usize, GroundState)> = None;
        for i in 0..self.blocks.len() {
            let g = self.block_ground(i, mu)?;
            let tie = 1e-10 * g.energy.abs().max(1.0);
            if best.as_ref().map_or(true, |b| g.energy < b.1.energy - tie) {
                best = Some((i, g));
            }
        }
        Ok(best.unwrap())
    }
}

/// Ground state of `cfg` at its own couplings and cutoffs.
pub fn ground_state(cfg: &ModelConfig) -> Result<GroundState> {
    BlockSolver::new(cfg)?.ground(&cfg.mu())
}

/// Fidelity of ground states that may sit in different symmetry blocks.
pub fn ground_fidelity(a: &GroundState, b: &GroundState) -> Result<f64> {
    if a.sector != b.sector {
        return Ok(0.0);
    }
    Ok(inner(&a.state, &b.state)?.norm_sqr().min(1.0))
}

/// Largest Hilbert-space dimension the cutoff ladder may reach.
pub const LADDER_DIM_CAP: usize = 60_000;

/// Smallest cutoffs on the ladder 0, 1, 2, 4, 8, … (applied to every mode)
/// at which the ground state is stable against the next rung: fidelity
/// above `1 - eps` and energy change below `eps·max(1, |E₀|)`.
pub fn converge_cutoff(cfg: &ModelConfig, eps: f64) -> Result<Vec<u32>> {
    if !(eps > 0.0) {
        return invalid("eps must be positive");
    }
    let mut ladder = vec![0u32, 1];
    while *ladder.last().unwrap() < 1 << 16 {
        ladder.push(ladder.last().unwrap() * 2);
    }
    let solve = |c: u32| -> Result<(GroundState, usize)> {
        let cc = cfg.with_cutoffs(&vec![c; cfg.n_modes()]);
        let s = BlockSolver::new(&cc)?;
        let d = s.dim();
        Ok((s.ground(&cfg.mu())?, d))
    };
    let (mut prev, _) = solve(ladder[0])?;
    for w in ladder.windows(2) {
        let (next, dim) = solve(w[1])?;
        let e = prev.energy;
        let de = (next.energy - e).abs();
        let f = if prev.sector == next.sector {
            let embedded = prev.state.embed(next.state.basis())?;
            inner(&embedded, &next.state)?.norm_sqr()
        } else {
            0.0
        };
        if f >= 1.0 - eps && de < eps * e.abs().max(1.0) {
            return Ok(vec![w[0]; cfg.n_modes()]);
        }
        if dim > LADDER_DIM_CAP {
            break;
        }
        prev = next;
    }
    Err(Error::Truncation(format!("cutoff ladder exhausted below dimension {LADDER_DIM_CAP}")))
}
