//! Scenario configuration, read from TOML and validated before any work.

use dilaton_np::conserved::ContinuityVariant;
use dilaton_np::opalg::{EntryPerturbation, MatrixKind};
use dilaton_np::{params_from_horizons, BlackHoleParams, ModeSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Gamma,
    Rho,
    Both,
}

impl VariantChoice {
    pub fn variants(&self) -> Vec<ContinuityVariant> {
        match self {
            VariantChoice::Gamma => vec![ContinuityVariant::Gamma],
            VariantChoice::Rho => vec![ContinuityVariant::Rho],
            VariantChoice::Both => ContinuityVariant::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub l: u32,
    #[serde(default)]
    pub m: i32,
    pub omega: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Domain {
    /// Inner radius is `r₊(1 + eps_h)`.
    pub eps_h: f64,
    /// Outer radius is `r_max_factor · r₊`.
    pub r_max_factor: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { eps_h: 0.05, r_max_factor: 20.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { rel_tol: 1e-10, abs_tol: 1e-12 }
    }
}

/// Additive probe on one matrix entry, for the identity checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeEntry {
    pub adjoint: bool,
    /// One-based labels as in `O_ij`.
    pub i: usize,
    pub j: usize,
    pub eps: f64,
}

impl ProbeEntry {
    pub fn perturbation(&self) -> EntryPerturbation {
        EntryPerturbation {
            kind: if self.adjoint { MatrixKind::Adjoint } else { MatrixKind::Decoupled },
            i: self.i,
            j: self.j,
            eps: self.eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub r_plus: f64,
    pub r_minus: f64,
    /// Dilaton couplings; every coupling is paired with every mode.
    pub couplings: Vec<f64>,
    pub modes: Vec<ModeEntry>,
    pub domain: Domain,
    pub solver: SolverSettings,
    pub seed: u64,
    pub identity_trials: usize,
    pub background_radii: usize,
    pub conservation_samples: usize,
    pub continuity_samples: usize,
    pub harmonics_l_max: u32,
    pub harmonics_grid: usize,
    pub continuity_variant: VariantChoice,
    /// Start every trace from zero data.
    pub zero_init: bool,
    /// Replace the charge by this value in the background check.
    pub charge_override: Option<f64>,
    pub probe: Option<ProbeEntry>,
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            r_plus: 2.0,
            r_minus: 1.0,
            couplings: vec![0.0, 1.0 / 3f64.sqrt(), 1.0],
            modes: [2, 3]
                .into_iter()
                .flat_map(|l| [0.0, 0.3, 1.0].map(|omega| ModeEntry { l, m: 0, omega }))
                .collect(),
            domain: Domain::default(),
            solver: SolverSettings::default(),
            seed: 20_240_917,
            identity_trials: 50,
            background_radii: 100,
            conservation_samples: 40,
            continuity_samples: 12,
            harmonics_l_max: 5,
            harmonics_grid: 64,
            continuity_variant: VariantChoice::Both,
            zero_init: false,
            charge_override: None,
            probe: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Grid below which the orthonormality check uses the coarse tolerance.
pub const FINE_GRID: usize = 32;

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Check every field against the preconditions of the library calls.
    pub fn validate(&self) -> Result<(), String> {
        for &a in &self.couplings {
            params_from_horizons(self.r_plus, self.r_minus, a).map_err(|e| e.to_string())?;
        }
        if self.couplings.is_empty() {
            return Err("couplings: at least one value required".into());
        }
        if self.modes.is_empty() {
            return Err("modes: at least one mode required".into());
        }
        for m in &self.modes {
            ModeSpec::new(m.l, m.m, m.omega).map_err(|e| format!("mode {m:?}: {e}"))?;
        }
        let d = self.domain;
        if !(d.eps_h > 0.0 && d.eps_h.is_finite()) {
            return Err(format!("domain.eps_h = {} must be positive", d.eps_h));
        }
        if !(d.r_max_factor > 1.0 + d.eps_h && d.r_max_factor.is_finite()) {
            return Err(format!("domain.r_max_factor = {} must exceed 1 + eps_h", d.r_max_factor));
        }
        let s = self.solver;
        if !(s.rel_tol > 0.0 && s.rel_tol < 1.0 && s.abs_tol > 0.0) {
            return Err(format!("solver tolerances out of range: {s:?}"));
        }
        let counts = [
            ("identity_trials", self.identity_trials),
            ("background_radii", self.background_radii),
            ("conservation_samples", self.conservation_samples),
            ("continuity_samples", self.continuity_samples),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        if self.conservation_samples < 2 {
            return Err("conservation_samples must be at least 2".into());
        }
        if self.harmonics_l_max < 2 {
            return Err(format!("harmonics_l_max = {} < 2", self.harmonics_l_max));
        }
        if self.harmonics_grid < 4 {
            return Err(format!("harmonics_grid = {} < 4", self.harmonics_grid));
        }
        if let Some(q) = self.charge_override {
            if !(q.is_finite() && q > 0.0) {
                return Err(format!("charge_override = {q} must be positive"));
            }
        }
        if let Some(p) = self.probe {
            if !(1..=5).contains(&p.i) || !(1..=5).contains(&p.j) || !p.eps.is_finite() {
                return Err(format!("probe {p:?}: labels must be in 1..=5"));
            }
        }
        Ok(())
    }

    pub fn params(&self, a: f64) -> BlackHoleParams {
        params_from_horizons(self.r_plus, self.r_minus, a).expect("validated")
    }

    pub fn mode_specs(&self) -> Vec<ModeSpec> {
        self.modes.iter().map(|m| ModeSpec::new(m.l, m.m, m.omega).expect("validated")).collect()
    }

    pub fn r_inner(&self) -> f64 {
        self.r_plus * (1.0 + self.domain.eps_h)
    }

    pub fn r_outer(&self) -> f64 {
        self.r_plus * self.domain.r_max_factor
    }

    /// `(coupling index, coupling, mode)` for every scenario cell, in a fixed
    /// order.
    pub fn cells(&self) -> Vec<(usize, f64, ModeSpec)> {
        let modes = self.mode_specs();
        self.couplings
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| modes.iter().map(move |m| (i, a, *m)))
            .collect()
    }

    pub fn orthonormality_tol(&self) -> f64 {
        if self.harmonics_grid >= FINE_GRID {
            1e-10
        } else {
            1e-6
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
        assert_eq!(ScenarioConfig::default().cells().len(), 18);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut c = ScenarioConfig { r_minus: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
        c = ScenarioConfig { identity_trials: 0, ..Default::default() };
        assert!(c.validate().is_err());
        c = ScenarioConfig { modes: vec![ModeEntry { l: 1, m: 0, omega: 0.3 }], ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let c: ScenarioConfig = toml::from_str("seed = 7\ncouplings = [1.0]\n[domain]\neps_h = 0.1\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.domain.r_max_factor, 20.0);
        assert_eq!(c.modes.len(), 6);
        assert!(toml::from_str::<ScenarioConfig>("bogus = 1").is_err());
    }
}
