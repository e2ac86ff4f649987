//! Extrapolation of convergent sequences from a handful of resolutions.

use crate::error::{LathomError, Result};
use crate::scalar::Scalar;

/// Result of an extrapolation with a crude error bar.
#[derive(Debug, Clone, Copy)]
pub struct Extrapolated<S> {
    pub value: S,
    /// spread between the last two model fits
    pub error: S,
    /// observed convergence order in the fitting variable, when measurable
    pub order: Option<S>,
}

/// Two-point Richardson step for a first-order model `v(y) = v0 + a y`.
fn richardson2<S: Scalar>(y1: S, v1: S, y2: S, v2: S) -> S {
    (v2 * y1 - v1 * y2) / (y1 - y2)
}

/// Fits `v(y) = v0 + a y + b y^2` through three points and returns `v0`.
fn quadratic_fit3<S: Scalar>(pts: &[(S, S)]) -> S {
    let [(y1, v1), (y2, v2), (y3, v3)] = [pts[0], pts[1], pts[2]];
    // Lagrange evaluation at y = 0
    let l1 = (y2 * y3) / ((y1 - y2) * (y1 - y3));
    let l2 = (y1 * y3) / ((y2 - y1) * (y2 - y3));
    let l3 = (y1 * y2) / ((y3 - y1) * (y3 - y2));
    v1 * l1 + v2 * l2 + v3 * l3
}

/// Extrapolates `v(y) -> v(0)` from samples at decreasing `y > 0` using a
/// quadratic-in-`y` model on the last three points; the error bar is the gap
/// to the plain two-point Richardson estimate on the last pair.
///
/// Also reports the observed order `q` from the last three residual ratios
/// (meaningful when the decay is close to a single power).
pub fn to_zero<S: Scalar>(samples: &[(S, S)]) -> Result<Extrapolated<S>> {
    if samples.len() < 3 {
        return Err(LathomError::InvalidParameter(
            "extrapolation needs at least three samples".into(),
        ));
    }
    for w in samples.windows(2) {
        if !(w[1].0 < w[0].0) || !(w[1].0 > S::zero()) {
            return Err(LathomError::InvalidParameter(
                "samples must come at strictly decreasing positive resolutions".into(),
            ));
        }
    }
    let tail = &samples[samples.len() - 3..];
    let value = quadratic_fit3(tail);
    let linear = richardson2(tail[1].0, tail[1].1, tail[2].0, tail[2].1);
    let error = (value - linear).abs();

    let order = {
        let d1 = tail[1].1 - tail[0].1;
        let d2 = tail[2].1 - tail[1].1;
        let r1 = tail[1].0 / tail[0].0;
        let r2 = tail[2].0 / tail[1].0;
        // constant-ratio ladders give q = log(d2/d1) / log(r)
        if d1 != S::zero() && d2 / d1 > S::zero() && (r1 - r2).abs() < S::from_f64(1e-9) {
            Some((d2 / d1).ln() / r1.ln())
        } else {
            None
        }
    };

    Ok(Extrapolated { value, error, order })
}

/// Detects a non-monotone tail (the last three values not ordered), which
/// the studies flag as an unreliable extrapolation.
pub fn tail_is_monotone<S: Scalar>(samples: &[(S, S)]) -> bool {
    if samples.len() < 3 {
        return true;
    }
    let tail = &samples[samples.len() - 3..];
    let (a, b, c) = (tail[0].1, tail[1].1, tail[2].1);
    (a <= b && b <= c) || (a >= b && b >= c)
}

/// Fits `v(y) = v0 + c y^q` on a geometric ladder of three samples, solving
/// for the rate from successive differences. Falls back to [`to_zero`] when
/// the ladder is not geometric or the differences change sign.
pub fn to_zero_power_fit<S: Scalar>(samples: &[(S, S)]) -> Result<Extrapolated<S>> {
    let base = to_zero(samples)?;
    let tail = &samples[samples.len() - 3..];
    let d1 = tail[1].1 - tail[0].1;
    let d2 = tail[2].1 - tail[1].1;
    let r1 = tail[1].0 / tail[0].0;
    let r2 = tail[2].0 / tail[1].0;
    if d1 == S::zero() || !(d2 / d1 > S::zero()) || (r1 - r2).abs() > S::from_f64(1e-9) {
        return Ok(base);
    }
    let r = r1;
    let q = (d2 / d1).ln() / r.ln();
    if !q.is_finite() || q <= S::zero() {
        return Ok(base);
    }
    // d2 = c y2^q (r^q - 1) and c y3^q = c y2^q r^q, so c y3^q = d2 r^q / (r^q - 1)
    let rq = r.powf(q);
    let cy3q = d2 * rq / (rq - S::one());
    let v0 = tail[2].1 - cy3q;
    Ok(Extrapolated {
        value: v0,
        error: (v0 - base.value).abs(),
        order: Some(q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_model_is_recovered_exactly() {
        let f = |y: f64| 7.0 - 3.0 * y + 0.5 * y * y;
        let samples: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&y| (y, f(y))).collect();
        let e = to_zero(&samples).unwrap();
        assert!((e.value - 7.0).abs() < 1e-12);
    }

    #[test]
    fn power_fit_recovers_fractional_order() {
        let f = |y: f64| 2.0 + 3.0 * y.powf(0.8);
        let samples: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&y| (y, f(y))).collect();
        let e = to_zero_power_fit(&samples).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10, "value {}", e.value);
        assert!((e.order.unwrap() - 0.8).abs() < 1e-9);
    }

    #[test]
    fn monotone_tail_detection() {
        let inc = [(0.4, 1.0), (0.2, 2.0), (0.1, 3.0)];
        let wig = [(0.4, 1.0), (0.2, 3.0), (0.1, 2.0)];
        assert!(tail_is_monotone(&inc));
        assert!(!tail_is_monotone(&wig));
    }

    #[test]
    fn needs_three_samples_and_decreasing_resolution() {
        assert!(to_zero(&[(0.1f64, 1.0), (0.05, 1.0)]).is_err());
        assert!(to_zero(&[(0.1f64, 1.0), (0.2, 1.0), (0.05, 1.0)]).is_err());
    }
}
