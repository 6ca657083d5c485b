//! 5G NR numerology table and the frame-efficiency models: transmission
//! efficiency eta, slot-aggregation efficiency zeta, and slots-per-interval
//! xi.

use crate::error::{Error, Result};
use crate::timebase::{ExactRatio, TimeMs};
use num_traits::ToPrimitive;
use std::collections::BTreeMap;

/// Numerology indices evaluated for mmWave operation. NR Rel-15 restricts
/// mmWave bands to mu > 2, but mu = 2 is kept in the evaluated set.
pub const MMWAVE_EVALUATED_MU: [u8; 3] = [2, 3, 4];

/// One row of the resource-block numerology table: index mu with the derived
/// TTI, cyclic-prefix length and resource-block bandwidth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numerology {
    pub mu: u8,
    /// Slot duration, exactly `2^-mu` ms.
    pub tti: TimeMs,
    /// Cyclic-prefix length in microseconds, exactly `4.69 / 2^mu`.
    pub cp_us: ExactRatio,
    /// Resource-block bandwidth, exactly `2^mu * 15 * 12` kHz.
    pub rb_bandwidth_khz: u32,
}

impl Numerology {
    pub fn tti_ms_f64(&self) -> f64 {
        self.tti.as_f64()
    }

    pub fn cp_us_f64(&self) -> f64 {
        self.cp_us.to_f64().unwrap_or(f64::NAN)
    }

    /// True for the numerologies usable in NR Rel-15 mmWave bands (mu > 2).
    pub fn is_mmwave_band(&self) -> bool {
        self.mu > 2
    }

    /// True for the numerologies evaluated here for mmWave scheduling,
    /// mu in {2, 3, 4}.
    pub fn is_mmwave_eligible(&self) -> bool {
        MMWAVE_EVALUATED_MU.contains(&self.mu)
    }
}

/// Returns the numerology table row for `mu in {0..4}`, built from the exact
/// generating formulas.
pub fn numerology_lookup(mu: u8) -> Result<Numerology> {
    if mu > 4 {
        return Err(Error::domain(format!(
            "numerology index mu = {mu} outside the supported set {{0..4}}"
        )));
    }
    let pow = 1i128 << mu;
    Ok(Numerology {
        mu,
        tti: TimeMs::from_ratio(1, pow)?,
        cp_us: ExactRatio::new(469, 100 * pow),
        rb_bandwidth_khz: (1u32 << mu) * 15 * 12,
    })
}

/// Transmission-efficiency and overhead model for slot aggregation.
///
/// `eta_by_mu` maps each supported numerology to its transmission efficiency
/// (the spectral-efficiency penalty of the shorter cyclic prefix); the
/// overhead fields describe how many symbols per scheduling interval carry
/// control and reference signals instead of data.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyModel {
    eta_by_mu: BTreeMap<u8, f64>,
    pub overhead_symbols: u32,
    pub symbols_per_slot: u32,
}

impl Default for EfficiencyModel {
    /// Defaults: eta drops by 5% per numerology step (eta_2 = 1.00,
    /// eta_3 = 0.95, eta_4 = 0.90); 3 overhead symbols out of 14 per
    /// scheduling interval.
    fn default() -> Self {
        let mut eta = BTreeMap::new();
        eta.insert(2u8, 1.00);
        eta.insert(3u8, 0.95);
        eta.insert(4u8, 0.90);
        EfficiencyModel {
            eta_by_mu: eta,
            overhead_symbols: 3,
            symbols_per_slot: 14,
        }
    }
}

impl EfficiencyModel {
    /// Validates the invariants: every eta in (0, 1], eta strictly
    /// decreasing as mu increases, and overhead strictly smaller than the
    /// symbols per slot.
    pub fn new(
        eta_by_mu: BTreeMap<u8, f64>,
        overhead_symbols: u32,
        symbols_per_slot: u32,
    ) -> Result<Self> {
        if eta_by_mu.is_empty() {
            return Err(Error::domain("efficiency model has no eta entries"));
        }
        for (&mu, &eta) in &eta_by_mu {
            if !(eta > 0.0) || eta > 1.0 || !eta.is_finite() {
                return Err(Error::domain(format!(
                    "invariant 0 < eta <= 1 violated: eta_{mu} = {eta}"
                )));
            }
        }
        let mut prev: Option<(u8, f64)> = None;
        for (&mu, &eta) in &eta_by_mu {
            if let Some((pmu, peta)) = prev {
                if eta >= peta {
                    return Err(Error::domain(format!(
                        "invariant eta strictly decreasing in mu violated: eta_{pmu} = {peta}, eta_{mu} = {eta}"
                    )));
                }
            }
            prev = Some((mu, eta));
        }
        if symbols_per_slot == 0 || overhead_symbols >= symbols_per_slot {
            return Err(Error::domain(format!(
                "overhead_symbols ({overhead_symbols}) must be smaller than symbols_per_slot ({symbols_per_slot})"
            )));
        }
        Ok(EfficiencyModel {
            eta_by_mu,
            overhead_symbols,
            symbols_per_slot,
        })
    }

    pub fn eta(&self, mu: u8) -> Result<f64> {
        self.eta_by_mu.get(&mu).copied().ok_or_else(|| {
            Error::domain(format!(
                "no transmission efficiency configured for mu = {mu}"
            ))
        })
    }

    pub fn configured_mu(&self) -> impl Iterator<Item = u8> + '_ {
        self.eta_by_mu.keys().copied()
    }
}

/// Number of slots `xi = tau / t_mu` in one scheduling interval, exact.
pub fn slots_per_interval(mu: u8, tau: TimeMs) -> Result<u64> {
    let n = numerology_lookup(mu)?;
    tau.exact_multiple_of(&n.tti)
}

/// Slot-aggregation efficiency
/// `zeta = 1 - overhead * t_mu / (symbols_per_slot * tau)`, the fraction of
/// symbols in the scheduling interval that carry data. With the default
/// model this is `1 - 3 t_mu / (14 tau)`.
pub fn slot_aggregation_efficiency(mu: u8, tau: TimeMs, model: &EfficiencyModel) -> Result<f64> {
    slots_per_interval(mu, tau)?;
    let n = numerology_lookup(mu)?;
    let frac = n.tti.ratio() * ExactRatio::from_integer(i128::from(model.overhead_symbols))
        / (tau.ratio() * ExactRatio::from_integer(i128::from(model.symbols_per_slot)));
    Ok(1.0 - frac.to_f64().unwrap_or(f64::NAN))
}

/// Transmission efficiency eta for the given numerology.
pub fn transmission_efficiency(mu: u8, model: &EfficiencyModel) -> Result<f64> {
    model.eta(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_match_generating_formulas_exactly() {
        let expect = [
            (0u8, (1i128, 1i128), (469i128, 100i128), 180u32),
            (1, (1, 2), (469, 200), 360),
            (2, (1, 4), (469, 400), 720),
            (3, (1, 8), (469, 800), 1440),
            (4, (1, 16), (469, 1600), 2880),
        ];
        for (mu, tti, cp, bw) in expect {
            let n = numerology_lookup(mu).unwrap();
            assert_eq!(n.tti.ratio(), ExactRatio::new(tti.0, tti.1));
            assert_eq!(n.cp_us, ExactRatio::new(cp.0, cp.1));
            assert_eq!(n.rb_bandwidth_khz, bw);
        }
    }

    #[test]
    fn lookup_examples() {
        let n3 = numerology_lookup(3).unwrap();
        assert_eq!(n3.tti_ms_f64(), 0.125);
        assert_eq!(n3.rb_bandwidth_khz, 1440);
        // printed table value 0.586 is the exact 0.58625 rounded to 3 decimals
        assert_eq!(n3.cp_us_f64(), 0.58625);
        assert_eq!((n3.cp_us_f64() * 1000.0).round() / 1000.0, 0.586);

        let n0 = numerology_lookup(0).unwrap();
        assert_eq!(n0.tti_ms_f64(), 1.0);
        assert_eq!(n0.cp_us_f64(), 4.69);
        assert_eq!(n0.rb_bandwidth_khz, 180);

        assert!(numerology_lookup(5).is_err());
    }

    #[test]
    fn eligibility_flags_carry_both_facts() {
        assert!(!numerology_lookup(2).unwrap().is_mmwave_band());
        assert!(numerology_lookup(2).unwrap().is_mmwave_eligible());
        assert!(numerology_lookup(3).unwrap().is_mmwave_band());
        assert!(numerology_lookup(3).unwrap().is_mmwave_eligible());
        assert!(!numerology_lookup(1).unwrap().is_mmwave_eligible());
    }

    #[test]
    fn slots_per_interval_examples() {
        let tau = TimeMs::from_ms_f64(1.0).unwrap();
        assert_eq!(slots_per_interval(4, tau).unwrap(), 16);
        let tau = TimeMs::from_ms_f64(0.25).unwrap();
        assert_eq!(slots_per_interval(2, tau).unwrap(), 1);
        let tau = TimeMs::from_ms_f64(0.30).unwrap();
        assert!(matches!(
            slots_per_interval(2, tau),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn zeta_examples() {
        let model = EfficiencyModel::default();
        let z = slot_aggregation_efficiency(4, TimeMs::from_ms_f64(0.0625).unwrap(), &model).unwrap();
        assert!((z - (1.0 - 3.0 / 14.0)).abs() < 1e-15);
        let z = slot_aggregation_efficiency(2, TimeMs::from_ms_f64(1.0).unwrap(), &model).unwrap();
        assert!((z - (1.0 - 0.75 / 14.0)).abs() < 1e-15);
        let z = slot_aggregation_efficiency(2, TimeMs::from_ms_f64(5.0).unwrap(), &model).unwrap();
        assert!((z - (1.0 - 0.75 / 70.0)).abs() < 1e-15);
    }

    #[test]
    fn zeta_monotonicity_and_range_over_evaluation_grid() {
        let model = EfficiencyModel::default();
        // zeta strictly increases with tau for fixed mu
        for mu in MMWAVE_EVALUATED_MU {
            let mut prev = 0.0;
            for tau_ms in [0.25, 0.5, 1.0, 2.0, 5.0] {
                let tau = TimeMs::from_ms_f64(tau_ms).unwrap();
                if slots_per_interval(mu, tau).is_err() {
                    continue;
                }
                let z = slot_aggregation_efficiency(mu, tau, &model).unwrap();
                assert!(z > prev);
                assert!((0.78..1.0).contains(&z), "zeta {z} out of range");
                prev = z;
            }
        }
        // zeta strictly decreases with t_mu (larger mu => shorter TTI => larger zeta)
        let tau = TimeMs::from_ms_f64(1.0).unwrap();
        let mut prev = 0.0;
        for mu in MMWAVE_EVALUATED_MU {
            let z = slot_aggregation_efficiency(mu, tau, &model).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn eta_defaults_and_errors() {
        let model = EfficiencyModel::default();
        assert_eq!(transmission_efficiency(2, &model).unwrap(), 1.00);
        assert_eq!(transmission_efficiency(3, &model).unwrap(), 0.95);
        assert_eq!(transmission_efficiency(4, &model).unwrap(), 0.90);
        assert!(transmission_efficiency(1, &model).is_err());
    }

    #[test]
    fn efficiency_model_invariants_enforced() {
        let mut eta = BTreeMap::new();
        eta.insert(2u8, 1.0);
        eta.insert(3u8, 1.2);
        let err = EfficiencyModel::new(eta, 3, 14).unwrap_err();
        assert!(err.to_string().contains("eta <= 1"), "{err}");

        let mut eta = BTreeMap::new();
        eta.insert(2u8, 0.9);
        eta.insert(3u8, 0.95);
        assert!(EfficiencyModel::new(eta, 3, 14).is_err());

        let mut eta = BTreeMap::new();
        eta.insert(2u8, 1.0);
        assert!(EfficiencyModel::new(eta.clone(), 14, 14).is_err());
        assert!(EfficiencyModel::new(eta, 3, 14).is_ok());
    }
}
