//! Truncated product bases |ν₁…ν_ℓ⟩ ⊗ |n₁…n_n⟩ of photon numbers and
//! symmetric level occupations.
//!
//! States are ordered lexicographically by photon numbers and then by the
//! Gelfand-Tsetlin style atomic label `(n₁+…+n_{n-1}, …, n₁+n₂, n₁)`; for
//! three levels this is `(q, r)` with populations `(r, q-r, N-q)`.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::error::{invalid, Result};
use crate::model::{Charge, ModelConfig};

/// Restriction of a basis to a symmetry sector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    All,
    /// Fixed values of every conserved charge (RWA models).
    Charges(Vec<i64>),
    /// Fixed parity ±1 of every conserved charge.
    Parities(Vec<i8>),
}

impl Sector {
    pub fn contains(&self, charges: &[Charge], photons: &[u32], occ: &[u32]) -> bool {
        match self {
            Sector::All => true,
            Sector::Charges(v) => charges.iter().zip(v).all(|(k, &x)| k.value(photons, occ) == x),
            Sector::Parities(p) => charges
                .iter()
                .zip(p)
                .all(|(k, &s)| parity_of(k.value(photons, occ)) == s),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Sector::All => "all".into(),
            Sector::Charges(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("/"),
            Sector::Parities(p) => p.iter().map(|&s| if s > 0 { 'e' } else { 'o' }).collect(),
        }
    }
}

pub fn parity_of(k: i64) -> i8 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Enumerated basis with a reverse lookup table.
#[derive(Clone, Debug)]
pub struct BasisIndex {
    n_modes: usize,
    n_levels: usize,
    atoms: u32,
    states: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    fingerprint: u64,
}

impl PartialEq for BasisIndex {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.states == other.states
    }
}

impl BasisIndex {
    /// Build from arbitrary states `photons ++ occupations`; sorts into the
    /// canonical order and drops duplicates.
    pub fn from_states(n_modes: usize, n_levels: usize, atoms: u32, mut states: Vec<Vec<u32>>) -> Result<Self> {
        for s in &states {
            if s.len() != n_modes + n_levels {
                return invalid("state length does not match modes + levels");
            }
            if s[n_modes..].iter().map(|&x| x as u64).sum::<u64>() != atoms as u64 {
                return invalid("occupations must sum to the atom count");
            }
        }
        states.sort_by_cached_key(|s| sort_key(s, n_modes));
        states.dedup();
        let lookup = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut h = DefaultHasher::new();
        (n_modes, n_levels, atoms).hash(&mut h);
        states.hash(&mut h);
        Ok(BasisIndex { n_modes, n_levels, atoms, states, lookup, fingerprint: h.finish() })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn atoms(&self) -> u32 {
        self.atoms
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn photons(&self, i: usize) -> &[u32] {
        &self.states[i][..self.n_modes]
    }

    pub fn occupations(&self, i: usize) -> &[u32] {
        &self.states[i][self.n_modes..]
    }

    pub fn index_of(&self, state: &[u32]) -> Option<usize> {
        self.lookup.get(state).copied()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    /// Sub-basis of the states satisfying `keep`, in the same order.
    pub fn filter(&self, mut keep: impl FnMut(&[u32], &[u32]) -> bool) -> BasisIndex {
        let states: Vec<Vec<u32>> = self
            .states
            .iter()
            .filter(|s| keep(&s[..self.n_modes], &s[self.n_modes..]))
            .cloned()
            .collect();
        BasisIndex::from_states(self.n_modes, self.n_levels, self.atoms, states).expect("filtered states stay valid")
    }

    pub fn contains_all(&self, other: &BasisIndex) -> bool {
        other.states.iter().all(|s| self.lookup.contains_key(s))
    }
}

fn sort_key(s: &[u32], n_modes: usize) -> Vec<u32> {
    let occ = &s[n_modes..];
    let mut key: Vec<u32> = s[..n_modes].to_vec();
    // partial sums from the top level down: (n1+..+n_{n-1}, ..., n1)
    let n = occ.len();
    for top in (1..n).rev() {
        key.push(occ[..top].iter().sum());
    }
    key
}

/// All occupation vectors of `levels` levels summing to `atoms`.
pub fn occupations(levels: usize, atoms: u32) -> Vec<Vec<u32>> {
    fn rec(levels: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == levels {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for n in 0..=left {
            cur.push(n);
            rec(levels, left - n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(levels, atoms, &mut Vec::with_capacity(levels), &mut out);
    out
}

/// Photon-number vectors inside the box `ν_m ≤ cutoffs[m]`.
pub fn photon_box(cutoffs: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &c in cutoffs {
        let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
        for v in &out {
            for n in 0..=c {
                let mut w = v.clone();
                w.push(n);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Enumerate the truncated basis of `cfg` restricted to `sector`.
pub fn enumerate_basis(cfg: &ModelConfig, sector: &Sector) -> Result<BasisIndex> {
    cfg.validate()?;
    let charges = cfg.charges();
    if *sector != Sector::All && sector_len(sector) != charges.len() {
        return invalid(format!("sector needs {} entries, got {}", charges.len(), sector_len(sector)));
    }
    let occ = occupations(cfg.n_levels(), cfg.atoms);
    let mut states = Vec::new();
    for ph in photon_box(&cfg.cutoffs) {
        for o in &occ {
            if sector.contains(&charges, &ph, o) {
                let mut s = ph.clone();
                s.extend_from_slice(o);
                states.push(s);
            }
        }
    }
    BasisIndex::from_states(cfg.n_modes(), cfg.n_levels(), cfg.atoms, states)
}

fn sector_len(s: &Sector) -> usize {
    match s {
        Sector::All => 0,
        Sector::Charges(v) => v.len(),
        Sector::Parities(p) => p.len(),
    }
}

/// All parity tuples for `n` charges, even-first.
pub fn parity_sectors(n: usize) -> Vec<Sector> {
    (0..1usize << n)
        .map(|bits| Sector::Parities((0..n).map(|i| if bits >> i & 1 == 0 { 1 } else { -1 }).collect()))
        .collect()
}

/// Split a basis into blocks of equal conserved label: charge values under
/// the RWA, parities otherwise. Charge blocks are ordered by value, parity
/// blocks even-first (lexicographic in the charges).
pub fn symmetry_blocks(cfg: &ModelConfig, basis: &BasisIndex) -> Vec<(Sector, BasisIndex)> {
    let charges = cfg.charges();
    let mut groups: std::collections::BTreeMap<Sector, Vec<Vec<u32>>> = Default::default();
    for i in 0..basis.dim() {
        let ph = basis.photons(i);
        let oc = basis.occupations(i);
        let vals: Vec<i64> = charges.iter().map(|k| k.value(ph, oc)).collect();
        let key = if cfg.rwa {
            Sector::Charges(vals)
        } else {
            Sector::Parities(vals.into_iter().map(parity_of).collect())
        };
        groups.entry(key).or_default().push(basis.state(i).to_vec());
    }
    let mut out: Vec<(Sector, BasisIndex)> = groups
        .into_iter()
        .map(|(k, states)| {
            let b = BasisIndex::from_states(basis.n_modes(), basis.n_levels(), basis.atoms(), states)
                .expect("blocks of a valid basis are valid");
            (k, b)
        })
        .collect();
    out.sort_by_key(|(k, _)| match k {
        Sector::Parities(p) => (p.iter().map(|&s| s < 0).collect::<Vec<_>>(), Vec::new()),
        Sector::Charges(v) => (Vec::new(), v.clone()),
        Sector::All => (Vec::new(), Vec::new()),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Configuration;

    #[test]
    fn dimensions() {
        let cfg = ModelConfig::three_level(Configuration::Xi, [0.0, 1.0, 2.0], 1.0, [0.0, 0.0], 2, true, 0).unwrap();
        assert_eq!(enumerate_basis(&cfg, &Sector::All).unwrap().dim(), 6);
        let two = ModelConfig::two_level(1.0, 1.0, 0.0, 20, false, 0).unwrap();
        assert_eq!(enumerate_basis(&two, &Sector::All).unwrap().dim(), 21);
        let one = ModelConfig::two_level(1.0, 1.0, 0.0, 1, false, 7).unwrap();
        assert_eq!(enumerate_basis(&one, &Sector::All).unwrap().dim(), 16);
    }

    #[test]
    fn three_level_labels_order() {
        let cfg = ModelConfig::three_level(Configuration::Xi, [0.0, 1.0, 2.0], 1.0, [0.0, 0.0], 2, true, 0).unwrap();
        let b = enumerate_basis(&cfg, &Sector::All).unwrap();
        // (q, r) ascending: first state has q = r = 0, all atoms in level 3
        assert_eq!(b.occupations(0), &[0, 0, 2]);
        assert_eq!(b.occupations(b.dim() - 1), &[2, 0, 0]);
    }

    #[test]
    fn parity_blocks_partition() {
        let cfg = ModelConfig::xi_two_mode([0.0, 0.25, 1.0], [0.25, 0.75], [0.1, 0.1], 2, false, [3, 3]).unwrap();
        let b = enumerate_basis(&cfg, &Sector::All).unwrap();
        let blocks = symmetry_blocks(&cfg, &b);
        assert_eq!(blocks.len(), 4);
        assert_eq!(blocks.iter().map(|(_, x)| x.dim()).sum::<usize>(), b.dim());
        for (s, blk) in &blocks {
            assert_eq!(enumerate_basis(&cfg, s).unwrap(), *blk);
        }
    }
}
