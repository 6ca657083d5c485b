//! One-dimensional quadrature: an adaptive-bisection Simpson rule as the
//! production integrator and a fixed-refinement Romberg scheme kept as the
//! independent cross-check.

use crate::error::{Error, Result};

/// Settings for the expectation integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Absolute tolerance of the adaptive integrator.
    pub abs_tol: f64,
    /// Maximum bisection depth before giving up.
    pub max_depth: u32,
    /// Integrand threshold below which the upper limit is truncated.
    pub tail_threshold: f64,
    /// Cap on the doubling search for the truncation point.
    pub max_doublings: u32,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            abs_tol: 1e-6,
            max_depth: 48,
            tail_threshold: 1e-10,
            max_doublings: 64,
        }
    }
}

impl QuadSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::domain(format!(
                "quadrature abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_depth == 0 || self.max_doublings == 0 {
            return Err(Error::domain(
                "quadrature depth and doubling budgets must be >= 1",
            ));
        }
        if !(self.tail_threshold > 0.0) {
            return Err(Error::domain(format!(
                "quadrature tail threshold must be > 0, got {}",
                self.tail_threshold
            )));
        }
        Ok(())
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `abs_tol`. Each interval is bisected until the Richardson error estimate
/// of its Simpson rule meets its share of the tolerance; exceeding
/// `max_depth` yields a numerical error carrying the last two estimates of
/// the offending interval.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::domain(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    struct Segment {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }

    let fa = f(a);
    let fb = f(b);
    let m0 = 0.5 * (a + b);
    let fm = f(m0);
    let mut stack = vec![Segment {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(fa, fm, fb, b - a),
        tol: abs_tol,
        depth: 0,
    }];
    let mut total = 0.0;

    while let Some(seg) = stack.pop() {
        let m = 0.5 * (seg.a + seg.b);
        let lm = 0.5 * (seg.a + m);
        let rm = 0.5 * (m + seg.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(seg.fa, flm, seg.fm, m - seg.a);
        let right = simpson(seg.fm, frm, seg.fb, seg.b - m);
        let refined = left + right;
        let err = refined - seg.whole;
        if err.abs() <= 15.0 * seg.tol {
            total += refined + err / 15.0;
        } else if seg.depth >= max_depth {
            return Err(Error::Numerical {
                message: format!(
                    "adaptive quadrature did not converge on [{:.6e}, {:.6e}] within depth {max_depth}",
                    seg.a, seg.b
                ),
                last: refined,
                previous: seg.whole,
            });
        } else {
            stack.push(Segment {
                a: seg.a,
                b: m,
                fa: seg.fa,
                fm: flm,
                fb: seg.fm,
                whole: left,
                tol: 0.5 * seg.tol,
                depth: seg.depth + 1,
            });
            stack.push(Segment {
                a: m,
                b: seg.b,
                fa: seg.fm,
                fm: frm,
                fb: seg.fb,
                whole: right,
                tol: 0.5 * seg.tol,
                depth: seg.depth + 1,
            });
        }
    }
    Ok(total)
}

/// Romberg integration of `f` over `[a, b]`: trapezoid refinements with
/// Richardson extrapolation on a fixed halving schedule until successive
/// diagonal entries agree to `rel_tol` (relative to the integral scale) or
/// the level budget runs out.
pub fn romberg(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_level: u32,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::domain(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let max_level = max_level.max(2) as usize;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max_level + 1);
    let mut h = b - a;
    rows.push(vec![0.5 * h * (f(a) + f(b))]);

    for k in 1..=max_level {
        // trapezoid refinement with the midpoints of the previous level
        let points = 1usize << (k - 1);
        let mut mid_sum = 0.0;
        for j in 0..points {
            mid_sum += f(a + h * (j as f64 + 0.5));
        }
        let trap = 0.5 * (rows[k - 1][0] + h * mid_sum);
        let mut row = vec![trap];
        for m in 1..=k {
            let factor = 4f64.powi(m as i32);
            let extrap = (factor * row[m - 1] - rows[k - 1][m - 1]) / (factor - 1.0);
            row.push(extrap);
        }
        let diag = row[k];
        let prev_diag = rows[k - 1][k - 1];
        rows.push(row);
        h *= 0.5;
        if k >= 4 {
            let scale = diag.abs().max(1e-300);
            if (diag - prev_diag).abs() <= rel_tol * scale {
                return Ok(diag);
            }
        }
    }
    let last = rows[max_level][max_level];
    let previous = rows[max_level - 1][max_level - 1];
    Err(Error::Numerical {
        message: format!("Romberg refinement did not converge within {max_level} levels"),
        last,
        previous,
    })
}

/// Doubling search for a truncation point: the smallest `start * 2^j` at
/// which `f` drops below `threshold`. `f` must eventually decay.
pub fn doubling_tail_cutoff(
    f: impl Fn(f64) -> f64,
    start: f64,
    threshold: f64,
    max_doublings: u32,
) -> Result<f64> {
    if !(start > 0.0) {
        return Err(Error::domain(format!(
            "doubling search start must be > 0, got {start}"
        )));
    }
    let mut x = start;
    for _ in 0..=max_doublings {
        let v = f(x);
        if v < threshold {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(Error::Numerical {
        message: format!(
            "no decay below {threshold:e} found within {max_doublings} doublings from {start:e}"
        ),
        last: f(x / 2.0),
        previous: f(x / 4.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_integrated_to_tolerance() {
        let v = adaptive_simpson(|x| x * x, 0.0, 3.0, 1e-10, 40).unwrap();
        assert!((v - 9.0).abs() < 1e-9);
        let v = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-9, 40).unwrap();
        assert!((v - (1.0f64.exp() - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn romberg_matches_adaptive() {
        let f = |x: f64| (-x).exp() * x.cos();
        let a = adaptive_simpson(f, 0.0, 10.0, 1e-9, 48).unwrap();
        let r = romberg(f, 0.0, 10.0, 1e-10, 20).unwrap();
        assert!((a - r).abs() < 1e-7, "{a} vs {r}");
        // analytic: (1 - e^{-10}(cos 10 - sin 10)) / 2
        let exact = 0.5 * (1.0 - (-10.0f64).exp() * (10.0f64.cos() - 10.0f64.sin()));
        assert!((a - exact).abs() < 1e-7);
        assert!((r - exact).abs() < 1e-8);
    }

    #[test]
    fn depth_exhaustion_reports_last_two_estimates() {
        // the kink itself is fine, but an absurd tolerance with depth 2 cannot be met
        let err = adaptive_simpson(|x| (x - 0.37).abs().sqrt(), 0.0, 1.0, 1e-300, 2).unwrap_err();
        match err {
            Error::Numerical { last, previous, .. } => {
                assert!(last.is_finite() && previous.is_finite());
            }
            other => panic!("expected numerical error, got {other:?}"),
        }
    }

    #[test]
    fn doubling_search_finds_decay() {
        let cut = doubling_tail_cutoff(|x| (-x).exp(), 1.0, 1e-10, 60).unwrap();
        assert!((-cut).exp() < 1e-10);
        assert!((-(cut / 2.0)).exp() >= 1e-10);
        assert!(doubling_tail_cutoff(|_| 1.0, 1.0, 1e-10, 16).is_err());
    }
}
