//! Model configurations: level schemes, field modes, dipole couplings and
//! the conserved excitation charges they imply.
//!
//! Levels are indexed from 0 internally and printed from 1 (`mu12` couples
//! levels 0 and 1). All frequencies are in units of the field frequency.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Atomic level scheme. Fixes the level count and the allowed dipole transitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Configuration {
    TwoLevel,
    Xi,
    Lambda,
    V,
    Ladder4,
    SmallLambda4,
    N4,
}

impl Configuration {
    pub const ALL: [Configuration; 7] = [
        Configuration::TwoLevel,
        Configuration::Xi,
        Configuration::Lambda,
        Configuration::V,
        Configuration::Ladder4,
        Configuration::SmallLambda4,
        Configuration::N4,
    ];

    pub fn n_levels(self) -> usize {
        match self {
            Configuration::TwoLevel => 2,
            Configuration::Xi | Configuration::Lambda | Configuration::V => 3,
            Configuration::Ladder4 | Configuration::SmallLambda4 | Configuration::N4 => 4,
        }
    }

    /// Allowed transitions `(lower, upper)`, 0-based.
    pub fn transitions(self) -> &'static [(usize, usize)] {
        match self {
            Configuration::TwoLevel => &[(0, 1)],
            Configuration::Xi => &[(0, 1), (1, 2)],
            Configuration::Lambda => &[(0, 2), (1, 2)],
            Configuration::V => &[(0, 1), (0, 2)],
            Configuration::Ladder4 => &[(0, 1), (1, 2), (2, 3)],
            Configuration::SmallLambda4 => &[(0, 2), (1, 2), (2, 3)],
            Configuration::N4 => &[(0, 2), (1, 3), (1, 2)],
        }
    }

    pub fn allows(self, lower: usize, upper: usize) -> bool {
        self.transitions().contains(&(lower, upper))
    }

    /// Maximum number of independent dipole couplings, n(n-1)/2 - (n-2).
    pub fn max_couplings(self) -> usize {
        let n = self.n_levels();
        n * (n - 1) / 2 - (n - 2)
    }

    /// Sign in front of the interaction. The two-level model uses the Dicke
    /// form `+γ`, the multilevel Hamiltonians `-μ`.
    pub fn interaction_sign(self) -> f64 {
        if self == Configuration::TwoLevel {
            1.0
        } else {
            -1.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Configuration::TwoLevel => "two-level",
            Configuration::Xi => "xi",
            Configuration::Lambda => "lambda",
            Configuration::V => "v",
            Configuration::Ladder4 => "ladder4",
            Configuration::SmallLambda4 => "small-lambda4",
            Configuration::N4 => "n4",
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let c = match key.as_str() {
            "two-level" | "twolevel" | "2" | "dicke" => Configuration::TwoLevel,
            "xi" | "ladder3" => Configuration::Xi,
            "lambda" => Configuration::Lambda,
            "v" | "vee" => Configuration::V,
            "ladder4" | "xi4" => Configuration::Ladder4,
            "small-lambda4" | "smalllambda4" | "lambda4" => Configuration::SmallLambda4,
            "n4" | "n" => Configuration::N4,
            _ => return Err(Error::Configuration(format!("unknown configuration `{s}`"))),
        };
        Ok(c)
    }
}

/// A dipole coupling between two levels through one field mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub lower: usize,
    pub upper: usize,
    pub mode: usize,
    pub mu: f64,
}

impl Coupling {
    pub fn new(lower: usize, upper: usize, mode: usize, mu: f64) -> Self {
        Coupling { lower, upper, mode, mu }
    }

    /// Two-digit label with 1-based levels, e.g. `12`.
    pub fn label(&self) -> String {
        format!("{}{}", self.lower + 1, self.upper + 1)
    }
}

/// Full specification of an atom-field model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub configuration: Configuration,
    /// Level frequencies, nondecreasing.
    pub omega: Vec<f64>,
    /// Mode frequencies.
    pub modes: Vec<f64>,
    pub couplings: Vec<Coupling>,
    pub atoms: u32,
    pub rwa: bool,
    /// Maximum photon number per mode.
    pub cutoffs: Vec<u32>,
}

/// A conserved excitation charge `K = Σ c_m ν_m + Σ w_i A_ii`.
///
/// Under the rotating-wave approximation `K` commutes with H; without it
/// only the parity `exp(iπK)` does.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Charge {
    pub name: String,
    pub photon_weights: Vec<i64>,
    pub level_weights: Vec<i64>,
}

impl Charge {
    pub fn value(&self, photons: &[u32], occupations: &[u32]) -> i64 {
        let a: i64 = self
            .photon_weights
            .iter()
            .zip(photons)
            .map(|(&c, &n)| c * n as i64)
            .sum();
        let b: i64 = self
            .level_weights
            .iter()
            .zip(occupations)
            .map(|(&w, &n)| w * n as i64)
            .sum();
        a + b
    }
}

impl ModelConfig {
    pub fn new(
        configuration: Configuration,
        omega: Vec<f64>,
        modes: Vec<f64>,
        couplings: Vec<Coupling>,
        atoms: u32,
        rwa: bool,
        cutoffs: Vec<u32>,
    ) -> Result<Self> {
        let cfg = ModelConfig { configuration, omega, modes, couplings, atoms, rwa, cutoffs };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Two-level Dicke (or Tavis-Cummings when `rwa`) model
    /// `Ω a†a + ω_A J_z + (γ/√N)(a + a†)(J₊ + J₋)`.
    pub fn two_level(omega_a: f64, field: f64, gamma: f64, atoms: u32, rwa: bool, cutoff: u32) -> Result<Self> {
        Self::new(
            Configuration::TwoLevel,
            vec![-0.5 * omega_a, 0.5 * omega_a],
            vec![field],
            vec![Coupling::new(0, 1, 0, gamma)],
            atoms,
            rwa,
            vec![cutoff],
        )
    }

    /// Three-level model with a single mode driving every allowed transition.
    pub fn three_level(
        configuration: Configuration,
        omega: [f64; 3],
        field: f64,
        mu: [f64; 2],
        atoms: u32,
        rwa: bool,
        cutoff: u32,
    ) -> Result<Self> {
        if configuration.n_levels() != 3 {
            return Err(Error::Configuration(format!("{configuration} is not a three-level scheme")));
        }
        let t = configuration.transitions();
        Self::new(
            configuration,
            omega.to_vec(),
            vec![field],
            vec![Coupling::new(t[0].0, t[0].1, 0, mu[0]), Coupling::new(t[1].0, t[1].1, 0, mu[1])],
            atoms,
            rwa,
            vec![cutoff],
        )
    }

    /// Ξ scheme with one mode per transition.
    pub fn xi_two_mode(
        omega: [f64; 3],
        fields: [f64; 2],
        mu: [f64; 2],
        atoms: u32,
        rwa: bool,
        cutoffs: [u32; 2],
    ) -> Result<Self> {
        Self::new(
            Configuration::Xi,
            omega.to_vec(),
            fields.to_vec(),
            vec![Coupling::new(0, 1, 0, mu[0]), Coupling::new(1, 2, 1, mu[1])],
            atoms,
            rwa,
            cutoffs.to_vec(),
        )
    }

    pub fn n_levels(&self) -> usize {
        self.omega.len()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.configuration.n_levels();
        if self.omega.len() != n {
            return Err(Error::Configuration(format!(
                "{} needs {n} level frequencies, got {}",
                self.configuration,
                self.omega.len()
            )));
        }
        if self.omega.iter().any(|w| !w.is_finite()) || self.modes.iter().any(|w| !w.is_finite()) {
            return invalid("frequencies must be finite");
        }
        if self.omega.windows(2).any(|w| w[1] < w[0]) {
            return invalid("level frequencies must be nondecreasing");
        }
        if self.modes.is_empty() {
            return invalid("at least one field mode is required");
        }
        if self.modes.iter().any(|&w| w <= 0.0) {
            return invalid("mode frequencies must be positive");
        }
        if self.atoms == 0 {
            return invalid("atom count must be at least 1");
        }
        if self.cutoffs.len() != self.modes.len() {
            return invalid(format!(
                "{} cutoffs given for {} modes",
                self.cutoffs.len(),
                self.modes.len()
            ));
        }
        if self.couplings.len() > self.configuration.max_couplings() {
            return Err(Error::Configuration(format!(
                "{} couplings exceed the maximum {} for {}",
                self.couplings.len(),
                self.configuration.max_couplings(),
                self.configuration
            )));
        }
        for (i, c) in self.couplings.iter().enumerate() {
            if !self.configuration.allows(c.lower, c.upper) {
                return Err(Error::Configuration(format!(
                    "transition {} not allowed in {}",
                    c.label(),
                    self.configuration
                )));
            }
            if c.mode >= self.modes.len() {
                return Err(Error::Configuration(format!("coupling {} refers to missing mode {}", c.label(), c.mode + 1)));
            }
            if !(c.mu >= 0.0) || !c.mu.is_finite() {
                return invalid(format!("coupling {} must be finite and nonnegative", c.label()));
            }
            if self.couplings[..i].iter().any(|d| d.lower == c.lower && d.upper == c.upper) {
                return Err(Error::Configuration(format!("transition {} listed twice", c.label())));
            }
        }
        Ok(())
    }

    pub fn coupling_index(&self, label: &str) -> Option<usize> {
        let label = label.trim_start_matches("mu");
        self.couplings.iter().position(|c| c.label() == label)
    }

    pub fn mu(&self) -> Vec<f64> {
        self.couplings.iter().map(|c| c.mu).collect()
    }

    /// Copy with coupling strengths replaced.
    pub fn with_mu(&self, mu: &[f64]) -> ModelConfig {
        let mut c = self.clone();
        for (cp, &m) in c.couplings.iter_mut().zip(mu) {
            cp.mu = m;
        }
        c
    }

    pub fn with_cutoffs(&self, cutoffs: &[u32]) -> ModelConfig {
        let mut c = self.clone();
        c.cutoffs = cutoffs.to_vec();
        c
    }

    pub fn with_atoms(&self, atoms: u32) -> ModelConfig {
        let mut c = self.clone();
        c.atoms = atoms;
        c
    }

    /// Level gap `ω_k - ω_j` of a coupling.
    pub fn gap(&self, c: &Coupling) -> f64 {
        self.omega[c.upper] - self.omega[c.lower]
    }

    /// Conserved charges in cumulative form `K_i = Σ_{m ≥ i} Q_m`, where
    /// `Q_m` counts photons of mode m plus the level weights it induces.
    /// One mode gives the total excitation number (Λ for two levels, M for
    /// three); two modes give the pair (K₁, K₂).
    pub fn charges(&self) -> Vec<Charge> {
        let n = self.n_levels();
        let l = self.n_modes();
        let per_mode: Vec<Vec<i64>> = (0..l).map(|m| self.level_weights(m)).collect();
        let mut out = Vec::with_capacity(l);
        for i in 0..l {
            let mut photon_weights = vec![0i64; l];
            let mut level_weights = vec![0i64; n];
            for m in i..l {
                photon_weights[m] = 1;
                for (acc, w) in level_weights.iter_mut().zip(&per_mode[m]) {
                    *acc += w;
                }
            }
            let name = if l == 1 {
                if self.configuration == Configuration::TwoLevel {
                    "Lambda".to_string()
                } else {
                    "M".to_string()
                }
            } else {
                format!("K{}", i + 1)
            };
            out.push(Charge { name, photon_weights, level_weights });
        }
        out
    }

    /// Level weights for the charge of one mode: `w_upper - w_lower` is 1 on
    /// couplings through that mode and 0 otherwise, with the lowest level at 0.
    fn level_weights(&self, mode: usize) -> Vec<i64> {
        let n = self.n_levels();
        let mut w: Vec<Option<i64>> = vec![None; n];
        w[0] = Some(0);
        // the coupling graphs here are trees, so repeated relaxation settles
        for _ in 0..n {
            for c in &self.couplings {
                let step = i64::from(c.mode == mode);
                match (w[c.lower], w[c.upper]) {
                    (Some(a), None) => w[c.upper] = Some(a + step),
                    (None, Some(b)) => w[c.lower] = Some(b - step),
                    _ => {}
                }
            }
        }
        w.into_iter().map(|x| x.unwrap_or(0)).collect()
    }
}

/// Physical parameters of a two-level medium in a cavity.
///
/// The diamagnetic constant built from `e_charge` and `mass` is not used by
/// any Hamiltonian here; the fields are kept for completeness of the record.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionalParams {
    pub omega_f: f64,
    pub omega_a_tilde: f64,
    pub dipole: f64,
    pub e_charge: f64,
    pub mass: f64,
    pub rho: f64,
    pub atoms: u32,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_f > 0.0) || !(self.omega_a_tilde > 0.0) {
            return invalid("frequencies must be positive");
        }
        if !(self.rho > 0.0) {
            return invalid("density must be positive");
        }
        if self.atoms == 0 {
            return invalid("atom count must be at least 1");
        }
        if !self.dipole.is_finite() || self.dipole < 0.0 {
            return invalid("dipole moment must be finite and nonnegative");
        }
        Ok(())
    }

    pub fn omega_a(&self) -> f64 {
        self.omega_a_tilde / self.omega_f
    }

    /// Dimensionless coupling `ω_A d √(2πρ/ω_F)` with ħ = 1.
    pub fn gamma(&self) -> f64 {
        self.omega_a() * self.dipole * (2.0 * std::f64::consts::PI * self.rho / self.omega_f).sqrt()
    }
}

pub const DEFAULT_CUTOFF: u32 = 40;

/// Two-level full (non-RWA) model with unit field frequency.
pub fn from_dimensional(p: &DimensionalParams) -> Result<ModelConfig> {
    p.validate()?;
    ModelConfig::two_level(p.omega_a(), 1.0, p.gamma(), p.atoms, false, DEFAULT_CUTOFF)
}

/// Parse a `key = value` model file. Keys: `config`, `levels`, `omega`,
/// `Omega`, `mu`, `N`, `rwa`, `cutoffs`. `mu` entries read `jk:value` or
/// `jk:value:mode` with 1-based levels and modes; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<ModelConfig> {
    let mut keys: HashMap<String, (usize, String)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected key = value".into() })?;
        let k = k.trim().to_string();
        if !matches!(k.as_str(), "config" | "levels" | "omega" | "Omega" | "mu" | "N" | "rwa" | "cutoffs") {
            return Err(Error::Parse { line: i + 1, msg: format!("unknown key `{k}`") });
        }
        if keys.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
            return Err(Error::Parse { line: i + 1, msg: format!("duplicate key `{k}`") });
        }
    }
    config_from_keys(&keys)
}

pub fn load_config(path: &Path) -> Result<ModelConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Apply `key=value` overrides on top of a parsed file.
pub fn parse_config_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<ModelConfig> {
    let mut merged: Vec<String> = Vec::new();
    let over: HashMap<&str, &str> = overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some((k, _)) = line.split_once('=') {
            if over.contains_key(k.trim()) {
                continue;
            }
        }
        merged.push(raw.to_string());
    }
    for (k, v) in overrides {
        merged.push(format!("{k} = {v}"));
    }
    parse_config(&merged.join("\n"))
}

fn config_from_keys(keys: &HashMap<String, (usize, String)>) -> Result<ModelConfig> {
    let get = |k: &str| keys.get(k);
    let req = |k: &str| {
        keys.get(k).ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key `{k}`") })
    };
    let perr = |line: usize, msg: String| Error::Parse { line, msg };

    let (line, v) = req("config")?;
    let configuration: Configuration = v.parse().map_err(|e: Error| perr(*line, e.to_string()))?;
    if let Some((line, v)) = get("levels") {
        let n: usize = v.parse().map_err(|_| perr(*line, format!("bad level count `{v}`")))?;
        if n != configuration.n_levels() {
            return Err(perr(*line, format!("{configuration} has {} levels, not {n}", configuration.n_levels())));
        }
    }
    let (line, v) = req("omega")?;
    let omega = parse_floats(v).map_err(|m| perr(*line, m))?;
    let modes = match get("Omega") {
        Some((line, v)) => parse_floats(v).map_err(|m| perr(*line, m))?,
        None => vec![1.0],
    };
    let (line, v) = req("N")?;
    let atoms: u32 = v.parse().map_err(|_| perr(*line, format!("bad atom count `{v}`")))?;
    let rwa = match get("rwa") {
        Some((line, v)) => match v.to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            _ => return Err(perr(*line, format!("bad boolean `{v}`"))),
        },
        None => false,
    };
    let cutoffs = match get("cutoffs") {
        Some((line, v)) => {
            let mut out = Vec::new();
            for tok in v.split(',') {
                let t = tok.trim();
                let c: i64 = t.parse().map_err(|_| perr(*line, format!("bad cutoff `{t}`")))?;
                if c < 0 {
                    return Err(Error::InvalidParameter(format!("negative cutoff {c}")));
                }
                out.push(c as u32);
            }
            if out.len() == 1 && modes.len() > 1 {
                out = vec![out[0]; modes.len()];
            }
            out
        }
        None => vec![DEFAULT_CUTOFF; modes.len()],
    };
    let mut couplings = Vec::new();
    if let Some((line, v)) = get("mu") {
        for tok in v.split(',') {
            let t = tok.trim();
            if t.is_empty() {
                continue;
            }
            let parts: Vec<&str> = t.split(':').map(str::trim).collect();
            if parts.len() < 2 || parts.len() > 3 || parts[0].len() != 2 {
                return Err(perr(*line, format!("bad coupling `{t}`, expected jk:value[:mode]")));
            }
            let digits: Vec<u32> = parts[0].chars().filter_map(|c| c.to_digit(10)).collect();
            if digits.len() != 2 || digits[0] == 0 || digits[1] <= digits[0] {
                return Err(perr(*line, format!("bad transition `{}`", parts[0])));
            }
            let mu: f64 = parts[1].parse().map_err(|_| perr(*line, format!("bad coupling value `{}`", parts[1])))?;
            let mode = if parts.len() == 3 {
                let m: usize = parts[2].parse().map_err(|_| perr(*line, format!("bad mode `{}`", parts[2])))?;
                if m == 0 {
                    return Err(perr(*line, "modes are numbered from 1".into()));
                }
                m - 1
            } else if modes.len() == 1 {
                0
            } else {
                return Err(perr(*line, format!("coupling `{t}` needs a mode index with several modes")));
            };
            couplings.push(Coupling::new(digits[0] as usize - 1, digits[1] as usize - 1, mode, mu));
        }
    }
    ModelConfig::new(configuration, omega, modes, couplings, atoms, rwa, cutoffs)
}

fn parse_floats(v: &str) -> std::result::Result<Vec<f64>, String> {
    v.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", t.trim())))
        .collect()
}

/// Render a configuration in the file format read by [`parse_config`].
pub fn format_config(cfg: &ModelConfig) -> String {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
    let mu = cfg
        .couplings
        .iter()
        .map(|c| format!("{}:{}:{}", c.label(), c.mu, c.mode + 1))
        .collect::<Vec<_>>()
        .join(", ");
    let cut = cfg.cutoffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
    format!(
        "config = {}\nlevels = {}\nomega = {}\nOmega = {}\nmu = {}\nN = {}\nrwa = {}\ncutoffs = {}\n",
        cfg.configuration,
        cfg.n_levels(),
        join(&cfg.omega),
        join(&cfg.modes),
        mu,
        cfg.atoms,
        cfg.rwa,
        cut
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_single_mode_charge_is_total_excitations() {
        let cfg = ModelConfig::three_level(Configuration::Xi, [0.0, 1.0, 2.0], 1.0, [1.0, 1.0], 2, true, 4).unwrap();
        let k = cfg.charges();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].name, "M");
        assert_eq!(k[0].level_weights, vec![0, 1, 2]);
    }

    #[test]
    fn xi_two_mode_charges() {
        let cfg = ModelConfig::xi_two_mode([0.0, 0.25, 1.0], [0.25, 0.75], [0.1, 0.1], 4, false, [4, 4]).unwrap();
        let k = cfg.charges();
        assert_eq!(k[0].photon_weights, vec![1, 1]);
        assert_eq!(k[0].level_weights, vec![0, 1, 2]);
        assert_eq!(k[1].photon_weights, vec![0, 1]);
        assert_eq!(k[1].level_weights, vec![0, 0, 1]);
    }

    #[test]
    fn lambda_and_v_weights() {
        let l = ModelConfig::three_level(Configuration::Lambda, [0.0, 0.5, 1.0], 1.0, [1.0, 1.0], 2, true, 4).unwrap();
        assert_eq!(l.charges()[0].level_weights, vec![0, 0, 1]);
        let v = ModelConfig::three_level(Configuration::V, [0.0, 0.5, 1.0], 1.0, [1.0, 1.0], 2, true, 4).unwrap();
        assert_eq!(v.charges()[0].level_weights, vec![0, 1, 1]);
    }

    #[test]
    fn rejects_disallowed_transition() {
        let r = ModelConfig::new(
            Configuration::Xi,
            vec![0.0, 1.0, 2.0],
            vec![1.0],
            vec![Coupling::new(0, 2, 0, 1.0)],
            2,
            true,
            vec![3],
        );
        assert!(matches!(r, Err(Error::Configuration(_))));
    }

    #[test]
    fn parse_round_trip_and_unknown_keys() {
        let text = "config = xi\nlevels = 3\nomega = 0, 1, 2\nOmega = 1\nmu = 12:1.0, 23:1.5\nN = 2\nrwa = true\ncutoffs = 10\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.couplings.len(), 2);
        assert_eq!(parse_config(&format_config(&cfg)).unwrap(), cfg);
        let bad = format!("{text}colour = red\n");
        assert!(matches!(parse_config(&bad), Err(Error::Parse { line: 9, .. })));
        let neg = text.replace("cutoffs = 10", "cutoffs = -1");
        assert!(matches!(parse_config(&neg), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn overrides_replace_file_keys() {
        let text = "config = two-level\nomega = -0.5, 0.5\nmu = 12:0.3\nN = 4\n";
        let cfg = parse_config_with_overrides(text, &[("N".into(), "6".into())]).unwrap();
        assert_eq!(cfg.atoms, 6);
    }

    #[test]
    fn dimensional_rejects_nonpositive_frequency() {
        let p = DimensionalParams {
            omega_f: 0.0,
            omega_a_tilde: 1.0,
            dipole: 1.0,
            e_charge: 1.0,
            mass: 1.0,
            rho: 1.0,
            atoms: 1,
        };
        assert!(matches!(from_dimensional(&p), Err(Error::InvalidParameter(_))));
    }
}
