//! Self-body blockage geometry: blockage-free zone, per-interval blockage
//! probability, shadow-cone width, and per-slot line-of-sight probability of
//! the absorbing blockage process.
//!
//! The body shadows the access point only when the AP lies outside the
//! blockage-free zone of radius `z_B = r_B * h_A / h_B` and its bearing falls
//! inside the shadow cone of width `phi_B = 2 atan(w_B / (2 r_B))`. Once any
//! coherence interval of a scheduling interval is blocked, all later slots of
//! that interval stay blocked; that absorbing behaviour lives in the rate
//! engine, this module only supplies per-interval survival.

use crate::error::{Error, Result};
use crate::timebase::TimeMs;
use std::f64::consts::PI;

/// User-body geometry relative to the UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyGeometry {
    /// Body width `w_B` in metres.
    pub width_m: f64,
    /// UE-to-body distance `r_B` in metres; 0 models a UE carried in a
    /// pocket flush against the body.
    pub distance_m: f64,
    /// Height of the body top above UE level, `h_B`, in metres.
    pub height_m: f64,
}

impl BodyGeometry {
    pub fn new(width_m: f64, distance_m: f64, height_m: f64) -> Result<Self> {
        if !(width_m > 0.0) || !width_m.is_finite() {
            return Err(Error::domain(format!("body width must be > 0, got {width_m}")));
        }
        if !(distance_m >= 0.0) || !distance_m.is_finite() {
            return Err(Error::domain(format!(
                "body distance must be >= 0, got {distance_m}"
            )));
        }
        if !(height_m > 0.0) || !height_m.is_finite() {
            return Err(Error::domain(format!(
                "body height must be > 0, got {height_m}"
            )));
        }
        Ok(BodyGeometry {
            width_m,
            distance_m,
            height_m,
        })
    }
}

/// Access-point placement relative to the UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deployment {
    /// AP height above UE level, `h_A`, in metres.
    pub ap_height_m: f64,
    /// Horizontal AP-to-UE distance `d_A` in metres.
    pub ap_distance_m: f64,
}

impl Deployment {
    pub fn new(ap_height_m: f64, ap_distance_m: f64) -> Result<Self> {
        if !(ap_height_m > 0.0) || !ap_height_m.is_finite() {
            return Err(Error::domain(format!(
                "AP height must be > 0, got {ap_height_m}"
            )));
        }
        if !(ap_distance_m >= 0.0) || !ap_distance_m.is_finite() {
            return Err(Error::domain(format!(
                "AP distance must be >= 0, got {ap_distance_m}"
            )));
        }
        Ok(Deployment {
            ap_height_m,
            ap_distance_m,
        })
    }

    /// Euclidean AP-to-UE distance `sqrt(d_A^2 + h_A^2)`.
    pub fn distance_3d_m(&self) -> f64 {
        self.ap_distance_m.hypot(self.ap_height_m)
    }
}

/// Discrete blockage process over one scheduling interval: a blockage event
/// may occur independently with probability `p` in each coherence interval,
/// and a slot spans `k` coherence intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageProcess {
    p: f64,
    intervals_per_slot: u64,
    slots: u64,
}

impl BlockageProcess {
    /// `tti` must be an exact positive integer multiple of `delta_t`.
    /// `p` accepts the full `[0, 1]` range even though the geometric model
    /// never exceeds 1/2.
    pub fn new(p: f64, delta_t: TimeMs, tti: TimeMs, slots: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::domain(format!(
                "blockage probability must be in [0, 1], got {p}"
            )));
        }
        if slots == 0 {
            return Err(Error::domain("slot count must be >= 1"));
        }
        let k = tti.exact_multiple_of(&delta_t)?;
        Ok(BlockageProcess {
            p,
            intervals_per_slot: k,
            slots,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Coherence intervals per slot, `k = t_mu / delta_t`.
    pub fn intervals_per_slot(&self) -> u64 {
        self.intervals_per_slot
    }

    pub fn slots(&self) -> u64 {
        self.slots
    }
}

/// Self-body blockage-free zone radius `z_B = r_B * h_A / h_B`.
pub fn blockage_free_radius(body: &BodyGeometry, dep: &Deployment) -> Result<f64> {
    if !(body.height_m > 0.0) {
        return Err(Error::domain(format!(
            "body height must be > 0, got {}",
            body.height_m
        )));
    }
    Ok(body.distance_m * dep.ap_height_m / body.height_m)
}

/// Probability that the body blocks the AP during one coherence interval:
/// 0 inside the blockage-free zone (`d_A < z_B`), otherwise
/// `atan(w_B / (2 r_B)) / pi`, with the `r_B = 0` case resolved to the
/// analytic limit 1/2 (`atan(inf) = pi/2`). The boundary `d_A = z_B` belongs
/// to the blocked branch.
pub fn blockage_probability(body: &BodyGeometry, dep: &Deployment) -> Result<f64> {
    let z_b = blockage_free_radius(body, dep)?;
    if dep.ap_distance_m < z_b {
        return Ok(0.0);
    }
    if body.distance_m == 0.0 {
        return Ok(0.5);
    }
    Ok((body.width_m / (2.0 * body.distance_m)).atan() / PI)
}

/// Angular width of the shadowed cone, `phi_B = 2 atan(w_B / (2 r_B))`.
/// Degenerate for `r_B = 0`; callers use the blockage-probability limit 1/2
/// there instead.
pub fn shadow_cone_width(body: &BodyGeometry) -> Result<f64> {
    if body.distance_m == 0.0 {
        return Err(Error::domain(
            "shadow cone is degenerate for a body touching the UE (r_B = 0); \
             the blockage probability limit 1/2 applies instead",
        ));
    }
    Ok(2.0 * (body.width_m / (2.0 * body.distance_m)).atan())
}

/// Probability that slot `i` (1-based) of the scheduling interval is in LOS:
/// `(1 - p)^(i k)`, i.e. survival of all `i * k` coherence intervals up to
/// and including the slot's own. Exact 1 for `p = 0` and exact 0 for `p = 1`.
pub fn los_slot_probability(i: u64, proc: &BlockageProcess) -> Result<f64> {
    if i == 0 {
        return Err(Error::precondition("slot index i must be >= 1"));
    }
    Ok(survival_probability(proc.p, i * proc.intervals_per_slot))
}

/// `(1 - p)^n` with the exact endpoints preserved.
pub(crate) fn survival_probability(p: f64, n: u64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return 0.0;
    }
    if n <= i32::MAX as u64 {
        (1.0 - p).powi(n as i32)
    } else {
        (1.0 - p).powf(n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand() -> BodyGeometry {
        BodyGeometry::new(0.4, 0.3, 0.4).unwrap()
    }

    fn pocket() -> BodyGeometry {
        BodyGeometry::new(0.4, 0.0, 0.4).unwrap()
    }

    #[test]
    fn blockage_free_radius_examples() {
        let dep = Deployment::new(5.0, 1.0).unwrap();
        assert_eq!(blockage_free_radius(&hand(), &dep).unwrap(), 3.75);
        assert_eq!(blockage_free_radius(&pocket(), &dep).unwrap(), 0.0);
        let dep = Deployment::new(2.5, 1.0).unwrap();
        assert_eq!(blockage_free_radius(&hand(), &dep).unwrap(), 1.875);
    }

    #[test]
    fn blockage_probability_branches() {
        // pocket: limit value 1/2 exactly, any distance
        for d in [0.0, 1.0, 10.0] {
            let dep = Deployment::new(5.0, d).unwrap();
            assert_eq!(blockage_probability(&pocket(), &dep).unwrap(), 0.5);
        }
        // hand close to the AP: inside the free zone
        let dep = Deployment::new(5.0, 1.0).unwrap();
        assert_eq!(blockage_probability(&hand(), &dep).unwrap(), 0.0);
        // hand far from the AP: atan(2/3)/pi
        let dep = Deployment::new(5.0, 10.0).unwrap();
        let p = blockage_probability(&hand(), &dep).unwrap();
        assert!((p - (2.0f64 / 3.0).atan() / PI).abs() < 1e-15);
        assert!((p - 0.187_167_041_810_958).abs() < 1e-9);
        // boundary d_A == z_B belongs to the blocked branch
        let dep = Deployment::new(5.0, 3.75).unwrap();
        assert!(blockage_probability(&hand(), &dep).unwrap() > 0.0);
    }

    #[test]
    fn blockage_probability_is_piecewise_constant_in_distance() {
        let blocked = (2.0f64 / 3.0).atan() / PI;
        for d in [0.0, 1.0, 2.0, 3.0, 3.74999] {
            let dep = Deployment::new(5.0, d).unwrap();
            assert_eq!(blockage_probability(&hand(), &dep).unwrap(), 0.0, "d = {d}");
        }
        for d in [3.75, 4.0, 10.0, 100.0] {
            let dep = Deployment::new(5.0, d).unwrap();
            let p = blockage_probability(&hand(), &dep).unwrap();
            assert!((p - blocked).abs() < 1e-15, "d = {d}");
        }
    }

    #[test]
    fn shadow_cone_examples() {
        let phi = shadow_cone_width(&hand()).unwrap();
        assert!((phi - 2.0 * (2.0f64 / 3.0).atan()).abs() < 1e-15);
        assert!((phi - 1.176_005_207_095_135).abs() < 1e-9);
        // consistency with the blocked branch of the blockage probability
        let dep = Deployment::new(5.0, 10.0).unwrap();
        let p = blockage_probability(&hand(), &dep).unwrap();
        assert!((phi / (2.0 * PI) - p).abs() < 1e-15);
        // vanishing body
        let thin = BodyGeometry::new(1e-12, 0.3, 0.4).unwrap();
        assert!(shadow_cone_width(&thin).unwrap() < 1e-11);
        assert!(shadow_cone_width(&pocket()).is_err());
    }

    #[test]
    fn monotonicity_in_body_geometry() {
        let dep = Deployment::new(5.0, 100.0).unwrap();
        let mut prev = 0.0;
        for w in [0.1, 0.2, 0.4, 0.8] {
            let b = BodyGeometry::new(w, 0.3, 0.4).unwrap();
            let p = blockage_probability(&b, &dep).unwrap();
            assert!(p > prev, "p not increasing in body width");
            prev = p;
        }
        let mut prev = 1.0;
        for r in [0.1, 0.2, 0.3, 0.5] {
            let b = BodyGeometry::new(0.4, r, 1000.0).unwrap();
            let p = blockage_probability(&b, &dep).unwrap();
            assert!(p < prev, "p not decreasing in body distance");
            prev = p;
        }
    }

    #[test]
    fn los_slot_probability_examples() {
        let dt = TimeMs::from_ms_f64(0.0625).unwrap();
        // k = 1, p = 0.5: (1/2)^3
        let proc = BlockageProcess::new(0.5, dt, dt, 8).unwrap();
        assert_eq!(los_slot_probability(3, &proc).unwrap(), 0.125);
        // p = 0: exact 1 for every slot
        let proc = BlockageProcess::new(0.0, dt, dt, 8).unwrap();
        assert_eq!(los_slot_probability(1, &proc).unwrap(), 1.0);
        assert_eq!(los_slot_probability(7, &proc).unwrap(), 1.0);
        // p = 1: exact 0
        let proc = BlockageProcess::new(1.0, dt, dt, 8).unwrap();
        assert_eq!(los_slot_probability(1, &proc).unwrap(), 0.0);
        // t_mu = 0.25 ms, delta_t = 0.0625 ms => k = 4; i = 2, p = 0.1
        let tti = TimeMs::from_ms_f64(0.25).unwrap();
        let proc = BlockageProcess::new(0.1, dt, tti, 4).unwrap();
        assert_eq!(proc.intervals_per_slot(), 4);
        let p2 = los_slot_probability(2, &proc).unwrap();
        assert!((p2 - 0.430_467_21).abs() < 1e-12);
    }

    #[test]
    fn process_rejects_non_integer_interval_ratio() {
        let dt = TimeMs::from_ms_f64(0.0625).unwrap();
        let tti = TimeMs::from_ms_f64(0.1).unwrap();
        assert!(matches!(
            BlockageProcess::new(0.1, dt, tti, 4),
            Err(Error::Precondition(_))
        ));
        assert!(BlockageProcess::new(1.5, dt, dt, 4).is_err());
        assert!(BlockageProcess::new(0.1, dt, dt, 0).is_err());
    }

    #[test]
    fn slot_probability_matches_brute_force_product() {
        let dt = TimeMs::from_ms_f64(0.0625).unwrap();
        let tti = TimeMs::from_ms_f64(0.25).unwrap();
        for &p in &[0.0, 0.05, 0.187167, 0.5, 0.93, 1.0] {
            let proc = BlockageProcess::new(p, dt, tti, 8).unwrap();
            for i in 1..=8u64 {
                let direct = los_slot_probability(i, &proc).unwrap();
                let mut product = 1.0;
                for _ in 0..(i * proc.intervals_per_slot()) {
                    product *= 1.0 - p;
                }
                assert!(
                    (direct - product).abs() <= 1e-12 * product.max(1e-300),
                    "p={p}, i={i}: {direct} vs {product}"
                );
                assert!((0.0..=1.0).contains(&direct));
            }
        }
    }
}
