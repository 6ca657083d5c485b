//! Python bindings for the mmWave blockage / flexible-numerology engine.
//!
//! Exposes the numerology table, the self-body blockage model, the
//! composite-fading SNR ccdf with its expected-spectral-efficiency integral,
//! and the per-(numerology, scheduling-interval) expected-rate evaluation,
//! recommendation and Monte-Carlo simulation.

use flexrate_core::blockage;
use flexrate_core::channel;
use flexrate_core::error::Error as CoreError;
use flexrate_core::quad::QuadSettings;
use flexrate_core::radio;
use flexrate_core::rate;
use flexrate_core::timebase::TimeMs;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use std::collections::BTreeMap;

fn err(e: CoreError) -> PyErr {
    match e {
        CoreError::Numerical { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn time_ms(v: f64, what: &str) -> PyResult<TimeMs> {
    TimeMs::from_ms_f64(v).map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

/// One row of the numerology table.
#[pyclass(name = "Numerology", frozen)]
struct PyNumerology {
    inner: radio::Numerology,
}

#[pymethods]
impl PyNumerology {
    #[getter]
    fn mu(&self) -> u8 {
        self.inner.mu
    }

    #[getter]
    fn tti_ms(&self) -> f64 {
        self.inner.tti_ms_f64()
    }

    #[getter]
    fn cp_us(&self) -> f64 {
        self.inner.cp_us_f64()
    }

    #[getter]
    fn rb_bandwidth_khz(&self) -> u32 {
        self.inner.rb_bandwidth_khz
    }

    /// Usable in NR mmWave bands (mu > 2).
    #[getter]
    fn is_mmwave_band(&self) -> bool {
        self.inner.is_mmwave_band()
    }

    /// Member of the evaluated mmWave set {2, 3, 4}.
    #[getter]
    fn is_mmwave_eligible(&self) -> bool {
        self.inner.is_mmwave_eligible()
    }

    fn __repr__(&self) -> String {
        format!(
            "Numerology(mu={}, tti_ms={}, cp_us={}, rb_bandwidth_khz={})",
            self.inner.mu,
            self.inner.tti_ms_f64(),
            self.inner.cp_us_f64(),
            self.inner.rb_bandwidth_khz
        )
    }
}

/// User-body geometry (width, UE distance, height above UE level), metres.
#[pyclass(name = "BodyGeometry", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBodyGeometry {
    inner: blockage::BodyGeometry,
}

#[pymethods]
impl PyBodyGeometry {
    #[new]
    fn new(width_m: f64, distance_m: f64, height_m: f64) -> PyResult<Self> {
        Ok(PyBodyGeometry {
            inner: blockage::BodyGeometry::new(width_m, distance_m, height_m).map_err(err)?,
        })
    }

    #[getter]
    fn width_m(&self) -> f64 {
        self.inner.width_m
    }

    #[getter]
    fn distance_m(&self) -> f64 {
        self.inner.distance_m
    }

    #[getter]
    fn height_m(&self) -> f64 {
        self.inner.height_m
    }
}

/// Access-point placement: height above UE level and horizontal distance.
#[pyclass(name = "Deployment", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDeployment {
    inner: blockage::Deployment,
}

#[pymethods]
impl PyDeployment {
    #[new]
    fn new(ap_height_m: f64, ap_distance_m: f64) -> PyResult<Self> {
        Ok(PyDeployment {
            inner: blockage::Deployment::new(ap_height_m, ap_distance_m).map_err(err)?,
        })
    }

    #[getter]
    fn ap_height_m(&self) -> f64 {
        self.inner.ap_height_m
    }

    #[getter]
    fn ap_distance_m(&self) -> f64 {
        self.inner.ap_distance_m
    }

    #[getter]
    fn distance_3d_m(&self) -> f64 {
        self.inner.distance_3d_m()
    }
}

/// Transmit power, noise density and frame bandwidth.
#[pyclass(name = "LinkBudget", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLinkBudget {
    inner: channel::LinkBudget,
}

#[pymethods]
impl PyLinkBudget {
    #[new]
    #[pyo3(signature = (tx_power_dbm=20.0, noise_density_dbm_hz=-174.0, bandwidth_hz=1e8))]
    fn new(tx_power_dbm: f64, noise_density_dbm_hz: f64, bandwidth_hz: f64) -> PyResult<Self> {
        let inner = channel::LinkBudget {
            tx_power_dbm,
            noise_density_dbm_hz,
            bandwidth_hz,
        };
        inner.validate().map_err(err)?;
        Ok(PyLinkBudget { inner })
    }

    #[getter]
    fn tx_power_dbm(&self) -> f64 {
        self.inner.tx_power_dbm
    }

    #[getter]
    fn noise_density_dbm_hz(&self) -> f64 {
        self.inner.noise_density_dbm_hz
    }

    #[getter]
    fn bandwidth_hz(&self) -> f64 {
        self.inner.bandwidth_hz
    }

    #[getter]
    fn noise_power_dbm(&self) -> f64 {
        self.inner.noise_power_dbm()
    }

    #[getter]
    fn snr_budget_db(&self) -> f64 {
        self.inner.snr_budget_db()
    }
}

/// Per-environment path-loss and fading parameters for both blockage states.
#[pyclass(name = "Environment", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEnvironment {
    inner: channel::EnvironmentParams,
}

fn parse_state(state: &str) -> PyResult<channel::BlockageState> {
    match state.to_ascii_uppercase().as_str() {
        "LOS" => Ok(channel::BlockageState::Los),
        "NLOS" => Ok(channel::BlockageState::Nlos),
        other => Err(PyValueError::new_err(format!(
            "blockage state must be 'LOS' or 'NLOS', got '{other}'"
        ))),
    }
}

#[pymethods]
impl PyEnvironment {
    /// Measured indoor open-office parameters.
    #[staticmethod]
    fn office() -> Self {
        PyEnvironment {
            inner: channel::EnvironmentParams::office(),
        }
    }

    /// Measured outdoor car-park parameters.
    #[staticmethod]
    fn car_park() -> Self {
        PyEnvironment {
            inner: channel::EnvironmentParams::car_park(),
        }
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// (attenuation_exponent, ref_loss_db, nakagami_m, alpha, beta) of one state.
    fn state_params(&self, state: &str) -> PyResult<(f64, f64, f64, f64, f64)> {
        let s = self.inner.state(parse_state(state)?);
        Ok((
            s.path_loss.attenuation_exponent,
            s.path_loss.ref_loss_db,
            s.fading.m_raw,
            s.fading.alpha,
            s.fading.beta,
        ))
    }

    fn path_loss_db(&self, state: &str, deployment: &PyDeployment) -> PyResult<f64> {
        Ok(channel::path_loss_db(
            parse_state(state)?,
            &self.inner,
            &deployment.inner,
        ))
    }

    fn mean_snr(
        &self,
        state: &str,
        deployment: &PyDeployment,
        budget: &PyLinkBudget,
    ) -> PyResult<f64> {
        Ok(channel::mean_snr(
            parse_state(state)?,
            &self.inner,
            &deployment.inner,
            &budget.inner,
        ))
    }

    fn __repr__(&self) -> String {
        format!("Environment('{}')", self.inner.name)
    }
}

/// SNR ccdf of the composite-fading channel for one blockage state.
#[pyclass(name = "SnrCcdf", frozen)]
struct PySnrCcdf {
    spec: channel::CcdfSpec,
    quad: QuadSettings,
}

#[pymethods]
impl PySnrCcdf {
    /// Build from explicit fading parameters and a mean SNR.
    #[new]
    fn new(nakagami_m: f64, alpha: f64, beta: f64, mean_snr: f64) -> PyResult<Self> {
        let fading = channel::FadingParams::new(nakagami_m, alpha, beta).map_err(err)?;
        Ok(PySnrCcdf {
            spec: channel::CcdfSpec::build(&fading, mean_snr, channel::MRounding::default())
                .map_err(err)?,
            quad: QuadSettings::default(),
        })
    }

    /// Build for one (environment, state, deployment, budget) link.
    #[staticmethod]
    fn for_link(
        environment: &PyEnvironment,
        state: &str,
        deployment: &PyDeployment,
        budget: &PyLinkBudget,
    ) -> PyResult<Self> {
        let st = parse_state(state)?;
        let ybar = channel::mean_snr(st, &environment.inner, &deployment.inner, &budget.inner);
        let fading = environment.inner.state(st).fading;
        Ok(PySnrCcdf {
            spec: channel::CcdfSpec::build(&fading, ybar, channel::MRounding::default())
                .map_err(err)?,
            quad: QuadSettings::default(),
        })
    }

    /// P(Y > y); exactly 1 at y = 0.
    fn value(&self, y: f64) -> PyResult<f64> {
        channel::snr_ccdf(y, &self.spec).map_err(err)
    }

    /// E[log2(1 + Y)] in bit/s/Hz.
    fn expected_spectral_efficiency(&self) -> PyResult<f64> {
        channel::expected_spectral_efficiency(&self.spec, &self.quad).map_err(err)
    }

    #[getter]
    fn mean_snr(&self) -> f64 {
        self.spec.mean_snr()
    }

    #[getter]
    fn m_int(&self) -> u32 {
        self.spec.m_int()
    }

    /// Raw (pre-normalization) ccdf expression value at y = 0.
    #[getter]
    fn normalization(&self) -> f64 {
        self.spec.normalization().value()
    }
}

/// Full breakdown of one (mu, tau) evaluation.
#[pyclass(name = "RateReport", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRateReport {
    #[pyo3(get)]
    mu: u8,
    #[pyo3(get)]
    tau_ms: f64,
    #[pyo3(get)]
    xi: u64,
    #[pyo3(get)]
    intervals_per_slot: u64,
    #[pyo3(get)]
    zeta: f64,
    #[pyo3(get)]
    eta: f64,
    #[pyo3(get)]
    p: f64,
    #[pyo3(get)]
    q: f64,
    #[pyo3(get)]
    e_s_los: f64,
    #[pyo3(get)]
    e_s_nlos: f64,
    #[pyo3(get)]
    per_slot_los_prob: Vec<f64>,
    #[pyo3(get)]
    rate_aggregate_bps: f64,
    #[pyo3(get)]
    rate_time_avg_bps: f64,
}

impl From<rate::RateReport> for PyRateReport {
    fn from(r: rate::RateReport) -> Self {
        PyRateReport {
            mu: r.mu,
            tau_ms: r.tau.as_f64(),
            xi: r.xi,
            intervals_per_slot: r.intervals_per_slot,
            zeta: r.zeta,
            eta: r.eta,
            p: r.p,
            q: r.q,
            e_s_los: r.e_s_los,
            e_s_nlos: r.e_s_nlos,
            per_slot_los_prob: r.per_slot_los_prob,
            rate_aggregate_bps: r.rate_aggregate_bps,
            rate_time_avg_bps: r.rate_time_avg_bps,
        }
    }
}

#[pymethods]
impl PyRateReport {
    fn __repr__(&self) -> String {
        format!(
            "RateReport(mu={}, tau_ms={}, xi={}, rate_time_avg_mbps={:.3})",
            self.mu,
            self.tau_ms,
            self.xi,
            self.rate_time_avg_bps / 1e6
        )
    }
}

/// Ranking of every (mu, tau) candidate of a scenario.
#[pyclass(name = "Recommendation", frozen)]
struct PyRecommendation {
    #[pyo3(get)]
    best_mu: u8,
    #[pyo3(get)]
    best_tau_ms: f64,
    #[pyo3(get)]
    best_rate_bps: f64,
    #[pyo3(get)]
    ranked: Vec<PyRateReport>,
}

#[pymethods]
impl PyRecommendation {
    fn __repr__(&self) -> String {
        format!(
            "Recommendation(best_mu={}, best_tau_ms={}, best_rate_mbps={:.3})",
            self.best_mu,
            self.best_tau_ms,
            self.best_rate_bps / 1e6
        )
    }
}

/// Empirical statistics from the simulated blockage process.
#[pyclass(name = "SimulationResult", frozen)]
struct PySimulationResult {
    #[pyo3(get)]
    trials: u64,
    #[pyo3(get)]
    per_slot_los_freq: Vec<f64>,
    #[pyo3(get)]
    mean_los_slots: f64,
    #[pyo3(get)]
    mean_rate_bps: f64,
    #[pyo3(get)]
    rate_std_err_bps: f64,
}

/// One evaluated scenario: environment, body and AP geometry, link budget
/// and the blockage coherence interval.
#[pyclass(name = "Scenario")]
struct PyScenario {
    case: rate::ScenarioCase,
    model: radio::EfficiencyModel,
    quad: QuadSettings,
    expectations: Option<rate::ChannelExpectations>,
}

impl PyScenario {
    fn expectations(&mut self) -> PyResult<rate::ChannelExpectations> {
        if let Some(e) = self.expectations {
            return Ok(e);
        }
        let e = rate::channel_expectations(&self.case, &self.quad).map_err(err)?;
        self.expectations = Some(e);
        Ok(e)
    }
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (environment, body, deployment, budget=None, delta_t_ms=0.0625, eta_by_mu=None))]
    fn new(
        environment: &PyEnvironment,
        body: &PyBodyGeometry,
        deployment: &PyDeployment,
        budget: Option<&PyLinkBudget>,
        delta_t_ms: f64,
        eta_by_mu: Option<BTreeMap<u8, f64>>,
    ) -> PyResult<Self> {
        let model = match eta_by_mu {
            Some(map) => radio::EfficiencyModel::new(map, 3, 14).map_err(err)?,
            None => radio::EfficiencyModel::default(),
        };
        Ok(PyScenario {
            case: rate::ScenarioCase {
                environment: environment.inner.clone(),
                body: body.inner,
                deployment: deployment.inner,
                budget: budget.map(|b| b.inner).unwrap_or_default(),
                delta_t: time_ms(delta_t_ms, "delta_t_ms")?,
                mu_candidates: vec![2, 3, 4],
                tau_candidates: vec![
                    TimeMs::from_ms_f64(0.25).unwrap(),
                    TimeMs::from_ms_f64(5.0).unwrap(),
                ],
                m_rounding: channel::MRounding::default(),
            },
            model,
            quad: QuadSettings::default(),
            expectations: None,
        })
    }

    /// Per-coherence-interval blockage probability of this scenario.
    #[getter]
    fn blockage_probability(&self) -> PyResult<f64> {
        blockage::blockage_probability(&self.case.body, &self.case.deployment).map_err(err)
    }

    /// Closed-form expected rate for one (mu, tau) candidate.
    fn evaluate(&mut self, mu: u8, tau_ms: f64) -> PyResult<PyRateReport> {
        let tau = time_ms(tau_ms, "tau_ms")?;
        let exps = self.expectations()?;
        let report =
            rate::expected_rate(&self.case, &exps, &self.model, mu, tau).map_err(err)?;
        Ok(report.into())
    }

    /// Argmax of the time-averaged rate over the candidate grid
    /// (ties prefer lower mu, then longer tau).
    #[pyo3(signature = (mu_candidates=None, tau_candidates_ms=None))]
    fn recommend(
        &mut self,
        mu_candidates: Option<Vec<u8>>,
        tau_candidates_ms: Option<Vec<f64>>,
    ) -> PyResult<PyRecommendation> {
        let mut case = self.case.clone();
        if let Some(mus) = mu_candidates {
            case.mu_candidates = mus;
        }
        if let Some(taus) = tau_candidates_ms {
            case.tau_candidates = taus
                .into_iter()
                .map(|t| time_ms(t, "tau_candidates_ms"))
                .collect::<PyResult<Vec<_>>>()?;
        }
        let rec = rate::recommend(&case, &self.model, &self.quad, rate::RateMode::TimeAveraged)
            .map_err(err)?;
        Ok(PyRecommendation {
            best_mu: rec.best_mu,
            best_tau_ms: rec.best_tau.as_f64(),
            best_rate_bps: rec.best_rate_bps,
            ranked: rec.ranked.into_iter().map(PyRateReport::from).collect(),
        })
    }

    /// Seeded Monte-Carlo run of the absorbing blockage process.
    #[pyo3(signature = (mu, tau_ms, trials=100_000, seed=42))]
    fn simulate(
        &mut self,
        mu: u8,
        tau_ms: f64,
        trials: u64,
        seed: u64,
    ) -> PyResult<PySimulationResult> {
        let tau = time_ms(tau_ms, "tau_ms")?;
        let exps = self.expectations()?;
        let sim = rate::simulate_blockage(&self.case, &exps, &self.model, mu, tau, trials, seed)
            .map_err(err)?;
        Ok(PySimulationResult {
            trials: sim.trials,
            per_slot_los_freq: sim.per_slot_los_freq,
            mean_los_slots: sim.mean_los_slots,
            mean_rate_bps: sim.mean_rate_bps,
            rate_std_err_bps: sim.rate_std_err_bps,
        })
    }
}

/// Numerology table row for mu in {0..4}.
#[pyfunction]
fn numerology_lookup(mu: u8) -> PyResult<PyNumerology> {
    Ok(PyNumerology {
        inner: radio::numerology_lookup(mu).map_err(err)?,
    })
}

/// Self-body blockage-free zone radius z_B = r_B h_A / h_B, in metres.
#[pyfunction]
fn blockage_free_radius(body: &PyBodyGeometry, deployment: &PyDeployment) -> PyResult<f64> {
    blockage::blockage_free_radius(&body.inner, &deployment.inner).map_err(err)
}

/// Per-coherence-interval self-body blockage probability.
#[pyfunction]
fn blockage_probability(body: &PyBodyGeometry, deployment: &PyDeployment) -> PyResult<f64> {
    blockage::blockage_probability(&body.inner, &deployment.inner).map_err(err)
}

/// Shadow-cone width 2 atan(w_B / (2 r_B)), radians.
#[pyfunction]
fn shadow_cone_width(body: &PyBodyGeometry) -> PyResult<f64> {
    blockage::shadow_cone_width(&body.inner).map_err(err)
}

/// LOS probability of slot i (1-based): (1-p)^(i*k) for k coherence
/// intervals per slot.
#[pyfunction]
fn los_slot_probability(i: u64, p: f64, intervals_per_slot: u64) -> PyResult<f64> {
    if intervals_per_slot == 0 {
        return Err(PyValueError::new_err("intervals_per_slot must be >= 1"));
    }
    let dt = TimeMs::from_ms_f64(0.0625).unwrap();
    let tti = TimeMs::from_ratio(intervals_per_slot as i128, 16)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let proc = blockage::BlockageProcess::new(p, dt, tti, 1).map_err(err)?;
    blockage::los_slot_probability(i, &proc).map_err(err)
}

/// Slot-aggregation efficiency zeta = 1 - 3 t_mu / (14 tau) (default model).
#[pyfunction]
fn slot_aggregation_efficiency(mu: u8, tau_ms: f64) -> PyResult<f64> {
    let tau = time_ms(tau_ms, "tau_ms")?;
    radio::slot_aggregation_efficiency(mu, tau, &radio::EfficiencyModel::default()).map_err(err)
}

/// Slots per scheduling interval xi = tau / t_mu (exact).
#[pyfunction]
fn slots_per_interval(mu: u8, tau_ms: f64) -> PyResult<u64> {
    let tau = time_ms(tau_ms, "tau_ms")?;
    radio::slots_per_interval(mu, tau).map_err(err)
}

#[pymodule]
fn flexrate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNumerology>()?;
    m.add_class::<PyBodyGeometry>()?;
    m.add_class::<PyDeployment>()?;
    m.add_class::<PyLinkBudget>()?;
    m.add_class::<PyEnvironment>()?;
    m.add_class::<PySnrCcdf>()?;
    m.add_class::<PyRateReport>()?;
    m.add_class::<PyRecommendation>()?;
    m.add_class::<PySimulationResult>()?;
    m.add_class::<PyScenario>()?;

    m.add_function(wrap_pyfunction!(numerology_lookup, m)?)?;
    m.add_function(wrap_pyfunction!(blockage_free_radius, m)?)?;
    m.add_function(wrap_pyfunction!(blockage_probability, m)?)?;
    m.add_function(wrap_pyfunction!(shadow_cone_width, m)?)?;
    m.add_function(wrap_pyfunction!(los_slot_probability, m)?)?;
    m.add_function(wrap_pyfunction!(slot_aggregation_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(slots_per_interval, m)?)?;
    Ok(())
}
