//! JSON run configuration: schema, defaults, and resolution into core types.
//!
//! Every field is optional; the defaults reproduce the standard evaluation
//! setup (office and car-park environments, hand and pocket scenarios, 1 m
//! and 10 m AP distances, 100 MHz frame, 0.0625 ms coherence interval,
//! candidates mu in {2,3,4} and tau in {0.25, 5} ms). Unknown fields and
//! violated integrality preconditions are configuration errors.

use flexrate_core::blockage::BodyGeometry;
use flexrate_core::channel::{
    EnvironmentParams, FadingParams, LinkBudget, MRounding, PathLossParams, StateParams,
};
use flexrate_core::quad::QuadSettings;
use flexrate_core::radio::{numerology_lookup, EfficiencyModel};
use flexrate_core::timebase::TimeMs;
use flexrate_core::validation::ValidationSetup;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "d_schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub link_budget: LinkBudgetCfg,
    #[serde(default)]
    pub body: BodyCfg,
    #[serde(default = "d_scenarios")]
    pub scenarios: Vec<ScenarioCfg>,
    #[serde(default)]
    pub deployment: DeploymentCfg,
    #[serde(default = "d_delta_t")]
    pub delta_t_ms: f64,
    #[serde(default = "d_mu_candidates")]
    pub mu_candidates: Vec<u8>,
    #[serde(default = "d_tau_candidates")]
    pub tau_candidates_ms: Vec<f64>,
    #[serde(default = "d_fig4_tau")]
    pub fig4_tau_ms: f64,
    #[serde(default)]
    pub efficiency: EfficiencyCfg,
    #[serde(default = "d_environments")]
    pub environments: Vec<EnvironmentCfg>,
    #[serde(default)]
    pub m_rounding: MRoundingCfg,
    #[serde(default)]
    pub mc: McCfg,
    #[serde(default)]
    pub quadrature: QuadCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config must deserialize")
    }
}

fn d_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn d_delta_t() -> f64 {
    0.0625
}

fn d_mu_candidates() -> Vec<u8> {
    vec![2, 3, 4]
}

fn d_tau_candidates() -> Vec<f64> {
    vec![0.25, 5.0]
}

fn d_fig4_tau() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudgetCfg {
    #[serde(default = "d_tx_power")]
    pub tx_power_dbm: f64,
    #[serde(default = "d_noise_density")]
    pub noise_density_dbm_hz: f64,
    #[serde(default = "d_bandwidth")]
    pub bandwidth_hz: f64,
}

impl Default for LinkBudgetCfg {
    fn default() -> Self {
        LinkBudgetCfg {
            tx_power_dbm: d_tx_power(),
            noise_density_dbm_hz: d_noise_density(),
            bandwidth_hz: d_bandwidth(),
        }
    }
}

fn d_tx_power() -> f64 {
    20.0
}

fn d_noise_density() -> f64 {
    -174.0
}

fn d_bandwidth() -> f64 {
    1e8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyCfg {
    #[serde(default = "d_body_width")]
    pub width_m: f64,
    #[serde(default = "d_body_height")]
    pub height_m: f64,
}

impl Default for BodyCfg {
    fn default() -> Self {
        BodyCfg {
            width_m: d_body_width(),
            height_m: d_body_height(),
        }
    }
}

fn d_body_width() -> f64 {
    0.4
}

fn d_body_height() -> f64 {
    0.4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioCfg {
    pub name: String,
    pub body_distance_m: f64,
}

fn d_scenarios() -> Vec<ScenarioCfg> {
    vec![
        ScenarioCfg {
            name: "hand".to_string(),
            body_distance_m: 0.3,
        },
        ScenarioCfg {
            name: "pocket".to_string(),
            body_distance_m: 0.0,
        },
    ]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentCfg {
    #[serde(default = "d_ap_height")]
    pub ap_height_m: f64,
    #[serde(default = "d_distances")]
    pub distances_m: Vec<f64>,
}

impl Default for DeploymentCfg {
    fn default() -> Self {
        DeploymentCfg {
            ap_height_m: d_ap_height(),
            distances_m: d_distances(),
        }
    }
}

fn d_ap_height() -> f64 {
    5.0
}

fn d_distances() -> Vec<f64> {
    vec![1.0, 10.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyCfg {
    #[serde(default = "d_eta")]
    pub eta_by_mu: BTreeMap<u8, f64>,
    #[serde(default = "d_overhead")]
    pub overhead_symbols: u32,
    #[serde(default = "d_symbols")]
    pub symbols_per_slot: u32,
}

impl Default for EfficiencyCfg {
    fn default() -> Self {
        EfficiencyCfg {
            eta_by_mu: d_eta(),
            overhead_symbols: d_overhead(),
            symbols_per_slot: d_symbols(),
        }
    }
}

fn d_eta() -> BTreeMap<u8, f64> {
    let mut m = BTreeMap::new();
    m.insert(2u8, 1.00);
    m.insert(3u8, 0.95);
    m.insert(4u8, 0.90);
    m
}

fn d_overhead() -> u32 {
    3
}

fn d_symbols() -> u32 {
    14
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateCfg {
    pub path_loss: PathLossCfg,
    pub shadowing: ShadowingCfg,
    pub nakagami_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossCfg {
    pub attenuation_exponent: f64,
    pub ref_loss_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowingCfg {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentCfg {
    pub name: String,
    pub los: StateCfg,
    pub nlos: StateCfg,
}

fn d_environments() -> Vec<EnvironmentCfg> {
    EnvironmentParams::defaults()
        .into_iter()
        .map(|e| EnvironmentCfg {
            name: e.name.clone(),
            los: StateCfg {
                path_loss: PathLossCfg {
                    attenuation_exponent: e.los.path_loss.attenuation_exponent,
                    ref_loss_db: e.los.path_loss.ref_loss_db,
                },
                shadowing: ShadowingCfg {
                    alpha: e.los.fading.alpha,
                    beta: e.los.fading.beta,
                },
                nakagami_m: e.los.fading.m_raw,
            },
            nlos: StateCfg {
                path_loss: PathLossCfg {
                    attenuation_exponent: e.nlos.path_loss.attenuation_exponent,
                    ref_loss_db: e.nlos.path_loss.ref_loss_db,
                },
                shadowing: ShadowingCfg {
                    alpha: e.nlos.fading.alpha,
                    beta: e.nlos.fading.beta,
                },
                nakagami_m: e.nlos.fading.m_raw,
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
pub enum MRoundingCfg {
    #[default]
    #[serde(rename = "half-away-from-zero")]
    HalfAwayFromZero,
    #[serde(rename = "floor")]
    Floor,
    #[serde(rename = "ceil")]
    Ceil,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McCfg {
    #[serde(default = "d_trials")]
    pub trials: u64,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

impl Default for McCfg {
    fn default() -> Self {
        McCfg {
            trials: d_trials(),
            seed: d_seed(),
        }
    }
}

fn d_trials() -> u64 {
    100_000
}

fn d_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadCfg {
    #[serde(default = "d_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "d_max_depth")]
    pub max_depth: u32,
    #[serde(default = "d_tail_threshold")]
    pub tail_threshold: f64,
    #[serde(default = "d_max_doublings")]
    pub max_doublings: u32,
}

impl Default for QuadCfg {
    fn default() -> Self {
        QuadCfg {
            abs_tol: d_abs_tol(),
            max_depth: d_max_depth(),
            tail_threshold: d_tail_threshold(),
            max_doublings: d_max_doublings(),
        }
    }
}

fn d_abs_tol() -> f64 {
    1e-6
}

fn d_max_depth() -> u32 {
    48
}

fn d_tail_threshold() -> f64 {
    1e-10
}

fn d_max_doublings() -> u32 {
    64
}

/// A schema or precondition problem in the configuration; mapped to exit
/// code 2 by the CLI.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// The configuration resolved into validated core types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub environments: Vec<EnvironmentParams>,
    pub scenarios: Vec<(String, BodyGeometry)>,
    pub ap_height_m: f64,
    pub distances_m: Vec<f64>,
    pub budget: LinkBudget,
    pub delta_t: TimeMs,
    pub mu_candidates: Vec<u8>,
    pub tau_candidates: Vec<TimeMs>,
    pub fig4_tau: TimeMs,
    pub eta_by_mu: BTreeMap<u8, f64>,
    pub overhead_symbols: u32,
    pub symbols_per_slot: u32,
    pub quad: QuadSettings,
    pub m_rounding: MRounding,
    pub trials: u64,
    pub seed: u64,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
            let mut de = serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize(&mut de).map_err(|e| {
                ConfigError(format!(
                    "{} at schema path `{}`: {}",
                    p.display(),
                    e.path(),
                    e.inner()
                ))
            })
        }
    }
}

impl RunConfig {
    /// Schema validation plus conversion into core types: all referenced
    /// (mu, tau) pairs must satisfy the slots-per-interval and
    /// coherence-interval integrality preconditions before any computation.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let fail = |msg: String| Err(ConfigError(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.scenarios.is_empty() {
            return fail("scenarios: list must be non-empty".into());
        }
        if self.environments.is_empty() {
            return fail("environments: list must be non-empty".into());
        }
        if self.mu_candidates.is_empty() {
            return fail("mu_candidates: list must be non-empty".into());
        }
        if self.tau_candidates_ms.is_empty() {
            return fail("tau_candidates_ms: list must be non-empty".into());
        }
        if self.deployment.distances_m.is_empty() {
            return fail("deployment.distances_m: list must be non-empty".into());
        }
        if self.mc.trials == 0 {
            return fail("mc.trials: must be >= 1".into());
        }

        let mut names = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            if s.name.is_empty() || !names.insert(s.name.clone()) {
                return fail(format!("scenarios: duplicate or empty name `{}`", s.name));
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for e in &self.environments {
            if e.name.is_empty() || !names.insert(e.name.clone()) {
                return fail(format!("environments: duplicate or empty name `{}`", e.name));
            }
        }

        let budget = LinkBudget {
            tx_power_dbm: self.link_budget.tx_power_dbm,
            noise_density_dbm_hz: self.link_budget.noise_density_dbm_hz,
            bandwidth_hz: self.link_budget.bandwidth_hz,
        };
        budget
            .validate()
            .map_err(|e| ConfigError(format!("link_budget: {e}")))?;

        let delta_t = TimeMs::from_ms_f64(self.delta_t_ms)
            .map_err(|e| ConfigError(format!("delta_t_ms: {e}")))?;
        let fig4_tau = TimeMs::from_ms_f64(self.fig4_tau_ms)
            .map_err(|e| ConfigError(format!("fig4_tau_ms: {e}")))?;
        let mut tau_candidates = Vec::new();
        for &t in &self.tau_candidates_ms {
            tau_candidates.push(
                TimeMs::from_ms_f64(t)
                    .map_err(|e| ConfigError(format!("tau_candidates_ms: {e}")))?,
            );
        }

        // xi and k integrality over the full referenced grid
        for &mu in &self.mu_candidates {
            let n = numerology_lookup(mu)
                .map_err(|e| ConfigError(format!("mu_candidates: {e}")))?;
            n.tti.exact_multiple_of(&delta_t).map_err(|e| {
                ConfigError(format!(
                    "coherence-interval integrality (k = t_mu/delta_t) for mu={mu}: {e}"
                ))
            })?;
            for (tau, label) in tau_candidates
                .iter()
                .map(|t| (*t, "tau_candidates_ms"))
                .chain(std::iter::once((fig4_tau, "fig4_tau_ms")))
            {
                tau.exact_multiple_of(&n.tti).map_err(|e| {
                    ConfigError(format!(
                        "slots-per-interval (xi) integrality for (mu={mu}, {label}={tau}): {e}"
                    ))
                })?;
            }
        }

        let mut scenarios = Vec::new();
        for s in &self.scenarios {
            let body = BodyGeometry::new(self.body.width_m, s.body_distance_m, self.body.height_m)
                .map_err(|e| ConfigError(format!("scenario `{}`: {e}", s.name)))?;
            scenarios.push((s.name.clone(), body));
        }

        let mut environments = Vec::new();
        for e in &self.environments {
            let build_state = |st: &StateCfg, which: &str| -> Result<StateParams, ConfigError> {
                Ok(StateParams {
                    path_loss: PathLossParams::new(
                        st.path_loss.attenuation_exponent,
                        st.path_loss.ref_loss_db,
                    )
                    .map_err(|err| ConfigError(format!("environment `{}`.{which}: {err}", e.name)))?,
                    fading: FadingParams::new(st.nakagami_m, st.shadowing.alpha, st.shadowing.beta)
                        .map_err(|err| {
                            ConfigError(format!("environment `{}`.{which}: {err}", e.name))
                        })?,
                })
            };
            environments.push(EnvironmentParams {
                name: e.name.clone(),
                los: build_state(&e.los, "los")?,
                nlos: build_state(&e.nlos, "nlos")?,
            });
        }

        for &d in &self.deployment.distances_m {
            if !d.is_finite() || d < 0.0 {
                return fail(format!("deployment.distances_m: invalid distance {d}"));
            }
        }

        let quad = QuadSettings {
            abs_tol: self.quadrature.abs_tol,
            max_depth: self.quadrature.max_depth,
            tail_threshold: self.quadrature.tail_threshold,
            max_doublings: self.quadrature.max_doublings,
        };
        quad.validate()
            .map_err(|e| ConfigError(format!("quadrature: {e}")))?;

        Ok(Resolved {
            environments,
            scenarios,
            ap_height_m: self.deployment.ap_height_m,
            distances_m: self.deployment.distances_m.clone(),
            budget,
            delta_t,
            mu_candidates: self.mu_candidates.clone(),
            tau_candidates,
            fig4_tau,
            eta_by_mu: self.efficiency.eta_by_mu.clone(),
            overhead_symbols: self.efficiency.overhead_symbols,
            symbols_per_slot: self.efficiency.symbols_per_slot,
            quad,
            m_rounding: match self.m_rounding {
                MRoundingCfg::HalfAwayFromZero => MRounding::HalfAwayFromZero,
                MRoundingCfg::Floor => MRounding::Floor,
                MRoundingCfg::Ceil => MRounding::Ceil,
            },
            trials: self.mc.trials,
            seed: self.mc.seed,
        })
    }
}

impl Resolved {
    /// Builds the efficiency model; domain failures here are configuration
    /// errors for the compute commands but a named check for `validate`.
    pub fn efficiency_model(&self) -> flexrate_core::Result<EfficiencyModel> {
        EfficiencyModel::new(
            self.eta_by_mu.clone(),
            self.overhead_symbols,
            self.symbols_per_slot,
        )
    }

    pub fn validation_setup(&self) -> ValidationSetup {
        ValidationSetup {
            environments: self.environments.clone(),
            budget: self.budget,
            bodies: self.scenarios.clone(),
            ap_height_m: self.ap_height_m,
            distances_m: self.distances_m.clone(),
            delta_t: self.delta_t,
            mu_candidates: self.mu_candidates.clone(),
            tau_candidates: self.tau_candidates.clone(),
            eta_by_mu: self.eta_by_mu.clone(),
            overhead_symbols: self.overhead_symbols,
            symbols_per_slot: self.symbols_per_slot,
            quad: self.quad,
            m_rounding: self.m_rounding,
            trials: self.trials,
            seed: self.seed,
        }
    }

    pub fn environment(&self, name: &str) -> Result<&EnvironmentParams, ConfigError> {
        self.environments
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| {
                ConfigError(format!(
                    "unknown environment `{name}` (configured: {})",
                    self.environments
                        .iter()
                        .map(|e| e.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }

    pub fn scenario(&self, name: &str) -> Result<&BodyGeometry, ConfigError> {
        self.scenarios
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b)
            .ok_or_else(|| {
                ConfigError(format!(
                    "unknown scenario `{name}` (configured: {})",
                    self.scenarios
                        .iter()
                        .map(|(n, _)| n.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_resolves() {
        let cfg = RunConfig::default();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.environments.len(), 2);
        assert_eq!(r.scenarios.len(), 2);
        assert_eq!(r.mu_candidates, vec![2, 3, 4]);
        assert_eq!(r.trials, 100_000);
        assert_eq!(r.seed, 42);
        assert_eq!(r.fig4_tau.as_f64(), 1.0);
        assert!(r.efficiency_model().is_ok());
    }

    #[test]
    fn non_multiple_tau_is_named() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"tau_candidates_ms": [0.3], "mu_candidates": [2]}"#).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.0.contains("xi"), "{}", err.0);
        assert!(err.0.contains("not an integer multiple"), "{}", err.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<RunConfig, _> = serde_json::from_str(r#"{"bogus_field": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn eta_override_parses_with_integer_keys() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"efficiency": {"eta_by_mu": {"2": 0.98, "3": 0.93, "4": 0.88}}}"#,
        )
        .unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.eta_by_mu.get(&3), Some(&0.93));
    }

    #[test]
    fn bad_schema_version_rejected() {
        let cfg: RunConfig = serde_json::from_str(r#"{"schema_version": 9}"#).unwrap();
        assert!(cfg.resolve().is_err());
    }
}
