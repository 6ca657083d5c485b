//! Channel model: path loss, mean SNR, the composite-fading SNR ccdf, and
//! the expected-spectral-efficiency integral per environment and blockage
//! state.
//!
//! The fading gain combines Nakagami-m multipath with shadowing; the SNR
//! ccdf has the closed form
//!
//! ```text
//! Fc(y) = A G(m) sum_{i=1}^{m} 2^i y^(m-i) / ((B^2 D)^i (m-i)!)
//!                  * K_{m-i+1/2}(B sqrt(C + D y)) / (B sqrt(C + D y))^(m-i+1/2)
//! ```
//!
//! with `A = (a ybar)^((1+2m)/4) / G(m) * sqrt(2 a b / pi) * exp(a b) * (m/ybar)^m`,
//! `B = b sqrt(a / ybar)`, `C = a ybar`, `D = 2 m / b`, where `(a, b)` are the
//! shadowing parameters and `m` the (integer) Nakagami parameter. Every term
//! is accumulated in log space: `exp(a b)` and the Bessel factor overflow or
//! underflow individually for extreme mean SNRs even though the products are
//! benign. The evaluated expression is normalized by its own value at
//! `y = 0`, which makes `Fc(0) = 1` exact regardless of any constant-factor
//! discrepancy in the prefactor `A`; the raw `y = 0` magnitude is kept and
//! reported.

use crate::blockage::Deployment;
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, doubling_tail_cutoff, QuadSettings};
use crate::specfun::{bessel_k_half, ln_gamma, ln_factorial, log_sum_exp, LogValue};
use std::f64::consts::{LN_2, PI};

/// The two blockage states of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockageState {
    Los,
    Nlos,
}

impl BlockageState {
    pub const ALL: [BlockageState; 2] = [BlockageState::Los, BlockageState::Nlos];

    pub fn label(&self) -> &'static str {
        match self {
            BlockageState::Los => "LOS",
            BlockageState::Nlos => "NLOS",
        }
    }
}

/// Distance-dependent attenuation: loss at one metre plus a power-law decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    /// Attenuation exponent `nu`.
    pub attenuation_exponent: f64,
    /// Path loss at one metre, in dB (positive = loss).
    pub ref_loss_db: f64,
}

impl PathLossParams {
    pub fn new(attenuation_exponent: f64, ref_loss_db: f64) -> Result<Self> {
        if !(attenuation_exponent > 0.0) || !attenuation_exponent.is_finite() {
            return Err(Error::domain(format!(
                "attenuation exponent must be > 0, got {attenuation_exponent}"
            )));
        }
        if !(ref_loss_db > 0.0) || !ref_loss_db.is_finite() {
            return Err(Error::domain(format!(
                "reference loss must be > 0 dB, got {ref_loss_db}"
            )));
        }
        Ok(PathLossParams {
            attenuation_exponent,
            ref_loss_db,
        })
    }
}

/// How a tabulated non-integer Nakagami `m` is mapped to the integer order
/// required by the finite-sum ccdf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MRounding {
    /// Round half away from zero (2.5 -> 3). The default.
    #[default]
    HalfAwayFromZero,
    Floor,
    Ceil,
}

impl MRounding {
    pub fn apply(&self, m_raw: f64) -> u32 {
        let v = match self {
            MRounding::HalfAwayFromZero => m_raw.round(),
            MRounding::Floor => m_raw.floor(),
            MRounding::Ceil => m_raw.ceil(),
        };
        (v.max(1.0)) as u32
    }
}

/// Composite-fading parameters of one blockage state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    /// Nakagami-m parameter as tabulated (possibly non-integer).
    pub m_raw: f64,
    /// Shadowing parameter alpha.
    pub alpha: f64,
    /// Shadowing parameter beta.
    pub beta: f64,
}

impl FadingParams {
    pub fn new(m_raw: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(m_raw >= 0.5) || !m_raw.is_finite() {
            return Err(Error::domain(format!(
                "Nakagami m must be >= 0.5, got {m_raw}"
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() || !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!(
                "shadowing parameters must be > 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(FadingParams { m_raw, alpha, beta })
    }

    pub fn m_int(&self, rounding: MRounding) -> u32 {
        rounding.apply(self.m_raw)
    }
}

/// Path-loss and fading parameters of one blockage state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateParams {
    pub path_loss: PathLossParams,
    pub fading: FadingParams,
}

/// Per-environment channel parameters for both blockage states.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentParams {
    pub name: String,
    pub los: StateParams,
    pub nlos: StateParams,
}

impl EnvironmentParams {
    pub fn state(&self, state: BlockageState) -> &StateParams {
        match state {
            BlockageState::Los => &self.los,
            BlockageState::Nlos => &self.nlos,
        }
    }

    /// Measured indoor open-office parameters.
    pub fn office() -> Self {
        EnvironmentParams {
            name: "office".to_string(),
            los: StateParams {
                path_loss: PathLossParams::new(1.18, 45.1).unwrap(),
                fading: FadingParams::new(2.64, 7.01, 0.15).unwrap(),
            },
            nlos: StateParams {
                path_loss: PathLossParams::new(1.07, 57.4).unwrap(),
                fading: FadingParams::new(2.35, 5.77, 0.20).unwrap(),
            },
        }
    }

    /// Measured outdoor car-park parameters.
    pub fn car_park() -> Self {
        EnvironmentParams {
            name: "car_park".to_string(),
            los: StateParams {
                path_loss: PathLossParams::new(1.53, 48.7).unwrap(),
                fading: FadingParams::new(8.50, 10.30, 0.11).unwrap(),
            },
            nlos: StateParams {
                path_loss: PathLossParams::new(1.98, 88.8).unwrap(),
                fading: FadingParams::new(2.74, 5.11, 0.23).unwrap(),
            },
        }
    }

    pub fn defaults() -> Vec<EnvironmentParams> {
        vec![Self::office(), Self::car_park()]
    }
}

/// Transmit power, noise density and frame bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for LinkBudget {
    /// 20 dBm transmit power, -174 dBm/Hz noise density, 100 MHz frame.
    fn default() -> Self {
        LinkBudget {
            tx_power_dbm: 20.0,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 1e8,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return Err(Error::domain(format!(
                "bandwidth must be > 0 Hz, got {}",
                self.bandwidth_hz
            )));
        }
        if !self.tx_power_dbm.is_finite() || !self.noise_density_dbm_hz.is_finite() {
            return Err(Error::domain("link budget powers must be finite"));
        }
        Ok(())
    }

    /// Noise power over the frame bandwidth, in dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + 10.0 * self.bandwidth_hz.log10()
    }

    /// Transmit-to-noise power ratio in dB.
    pub fn snr_budget_db(&self) -> f64 {
        self.tx_power_dbm - self.noise_power_dbm()
    }
}

/// Linear path gain `10^(-l/10) * d3d^(-nu)` for the given state; always < 1
/// for the tabulated losses.
pub fn path_gain(state: BlockageState, env: &EnvironmentParams, dep: &Deployment) -> f64 {
    let p = env.state(state).path_loss;
    10f64.powf(-p.ref_loss_db / 10.0) * dep.distance_3d_m().powf(-p.attenuation_exponent)
}

/// The same attenuation expressed as a dB loss,
/// `l_dB + 10 nu log10(d3d)`; the independent log-domain route used by the
/// validation suite.
pub fn path_loss_db(state: BlockageState, env: &EnvironmentParams, dep: &Deployment) -> f64 {
    let p = env.state(state).path_loss;
    p.ref_loss_db + 10.0 * p.attenuation_exponent * dep.distance_3d_m().log10()
}

/// Mean SNR without the fading component,
/// `ybar = 10^((tx - noise)/10) * path_gain`.
pub fn mean_snr(
    state: BlockageState,
    env: &EnvironmentParams,
    dep: &Deployment,
    budget: &LinkBudget,
) -> f64 {
    10f64.powf(budget.snr_budget_db() / 10.0) * path_gain(state, env, dep)
}

/// Frozen constants of the SNR ccdf for one (state, environment, mean SNR).
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfSpec {
    m: u32,
    m_raw: f64,
    alpha: f64,
    beta: f64,
    mean_snr: f64,
    /// Prefactor `A`, kept in log space.
    a: LogValue,
    b: f64,
    c: f64,
    d: f64,
    ln_b2d: f64,
    /// Raw (unnormalized) ccdf expression evaluated at `y = 0`.
    normalization: LogValue,
}

impl CcdfSpec {
    /// Builds the ccdf constants for the given fading parameters and mean
    /// SNR, checking the algebraic identity `B sqrt(C) = alpha * beta` and
    /// recording the raw expression value at `y = 0` as the normalization.
    pub fn build(fading: &FadingParams, mean_snr: f64, rounding: MRounding) -> Result<Self> {
        if !(mean_snr > 0.0) || !mean_snr.is_finite() {
            return Err(Error::domain(format!(
                "mean SNR must be > 0, got {mean_snr}"
            )));
        }
        let m = fading.m_int(rounding);
        if m > crate::specfun::MAX_HALF_ORDER {
            return Err(Error::domain(format!(
                "integerized Nakagami m = {m} exceeds the supported maximum"
            )));
        }
        let alpha = fading.alpha;
        let beta = fading.beta;
        let mf = f64::from(m);
        let ab = alpha * beta;

        let b = beta * (alpha / mean_snr).sqrt();
        let c = alpha * mean_snr;
        let d = 2.0 * mf / beta;
        let identity = b * c.sqrt();
        if (identity - ab).abs() > 1e-12 * ab {
            return Err(Error::domain(format!(
                "ccdf constant identity B*sqrt(C) = alpha*beta violated: {identity} vs {ab}"
            )));
        }
        let ln_a = 0.25 * (1.0 + 2.0 * mf) * (alpha * mean_snr).ln() - ln_gamma(mf)?
            + 0.5 * (2.0 * ab / PI).ln()
            + ab
            + mf * (mf.ln() - mean_snr.ln());
        let mut spec = CcdfSpec {
            m,
            m_raw: fading.m_raw,
            alpha,
            beta,
            mean_snr,
            a: LogValue::from_ln(ln_a),
            b,
            c,
            d,
            ln_b2d: (b * b * d).ln(),
            normalization: LogValue::ZERO,
        };
        let norm = spec.ln_raw(0.0)?;
        if !norm.is_finite() {
            return Err(Error::domain(format!(
                "ccdf normalization is not positive/finite (ln = {norm})"
            )));
        }
        spec.normalization = LogValue::from_ln(norm);
        Ok(spec)
    }

    pub fn m_int(&self) -> u32 {
        self.m
    }

    pub fn m_raw(&self) -> f64 {
        self.m_raw
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean_snr(&self) -> f64 {
        self.mean_snr
    }

    /// Raw ccdf expression value at `y = 0` (the normalization constant).
    pub fn normalization(&self) -> LogValue {
        self.normalization
    }

    pub fn constant_a(&self) -> LogValue {
        self.a
    }

    pub fn constant_b(&self) -> f64 {
        self.b
    }

    pub fn constant_c(&self) -> f64 {
        self.c
    }

    pub fn constant_d(&self) -> f64 {
        self.d
    }

    /// Log of the raw (unnormalized) ccdf expression at `y >= 0`.
    fn ln_raw(&self, y: f64) -> Result<f64> {
        let m = self.m;
        let mf = f64::from(m);
        let z = self.b * (self.c + self.d * y).sqrt();
        let ln_y = y.ln(); // -inf at y = 0; those terms vanish below
        let mut terms = Vec::with_capacity(m as usize);
        for i in 1..=m {
            let mi = m - i; // exponent of y and order offset of K
            let ln_power = if mi == 0 {
                0.0
            } else if y == 0.0 {
                continue; // y^(m-i) = 0: the term contributes nothing
            } else {
                f64::from(mi) * ln_y
            };
            let k = bessel_k_half(mi, z)?;
            let fi = f64::from(i);
            terms.push(
                fi * LN_2 + ln_power - fi * self.ln_b2d - ln_factorial(mi) + k.ln()
                    - (f64::from(mi) + 0.5) * z.ln(),
            );
        }
        Ok(self.a.ln() + ln_gamma(mf)? + log_sum_exp(&terms))
    }

    /// Raw (unnormalized) ccdf value in log space; exposed for the
    /// validation suite's pre-clamp bound checks.
    pub fn raw_ccdf(&self, y: f64) -> Result<LogValue> {
        if !(y >= 0.0) {
            return Err(Error::domain(format!(
                "SNR threshold must be >= 0, got {y}"
            )));
        }
        Ok(LogValue::from_ln(self.ln_raw(y)?))
    }
}

/// Normalized SNR ccdf `P(Y > y)`: the raw expression divided by its value
/// at `y = 0`, clamped to `[0, 1]`. Exactly 1 at `y = 0`.
pub fn snr_ccdf(y: f64, spec: &CcdfSpec) -> Result<f64> {
    let raw = spec.raw_ccdf(y)?;
    Ok(raw.ratio(spec.normalization()).clamp(0.0, 1.0))
}

/// Conditional expected spectral efficiency
/// `E[S] = integral_0^inf Fc(2^s - 1) ds` in bit/s/Hz, by adaptive
/// quadrature on `[0, s_max]` where `s_max` is found by doubling search for
/// the point where the integrand drops below the tail threshold.
pub fn expected_spectral_efficiency(spec: &CcdfSpec, quad: &QuadSettings) -> Result<f64> {
    quad.validate()?;
    let integrand = |s: f64| {
        let y = (s * LN_2).exp_m1();
        snr_ccdf(y, spec).unwrap_or(0.0)
    };
    let s_max = doubling_tail_cutoff(integrand, 1.0, quad.tail_threshold, quad.max_doublings)?;
    adaptive_simpson(integrand, 0.0, s_max, quad.abs_tol, quad.max_depth)
}
