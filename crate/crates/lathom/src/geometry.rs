//! Axis-aligned boxes and exact box-to-index-range conversion.

use crate::error::{LathomError, Result};
use crate::scalar::Scalar;

/// Axis-aligned box with half-open extent `[lo_k, hi_k)` per axis.
///
/// Half-open boxes tile without double counting, matching the cell convention
/// `alpha + [0, eps)^d` for lattice functions.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBox<S> {
    pub lo: Vec<S>,
    pub hi: Vec<S>,
}

impl<S: Scalar> RealBox<S> {
    pub fn new(lo: Vec<S>, hi: Vec<S>) -> Result<Self> {
        assert_eq!(lo.len(), hi.len());
        for (axis, (&a, &b)) in lo.iter().zip(&hi).enumerate() {
            if !(a < b) {
                return Err(LathomError::EmptyBox {
                    axis,
                    lo: a.to_f64_lossy(),
                    hi: b.to_f64_lossy(),
                });
            }
        }
        Ok(Self { lo, hi })
    }

    /// Cube `(-side/2, side/2)^d` rendered as the equivalent half-open box.
    /// Used where a centered cube of given side is meant as a region of space;
    /// lattice site selection against open cubes goes through [`cube_sites`].
    pub fn centered_cube(dim: usize, side: S) -> Result<Self> {
        let h = side / S::from_f64(2.0);
        Self::new(vec![-h; dim], vec![h; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Half-open membership test for a point.
    pub fn contains(&self, x: &[S]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&xi, (&a, &b))| a <= xi && xi < b)
    }

    pub fn volume(&self) -> S {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| b - a)
            .fold(S::one(), |acc, w| acc * w)
    }

    /// Euclidean distance from an interior point to the box boundary
    /// (the minimum face distance); zero or negative outside.
    pub fn distance_to_boundary(&self, x: &[S]) -> S {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&xi, (&a, &b))| (xi - a).min(b - xi))
            .fold(S::infinity(), S::min)
    }
}

/// Smallest integer `i` with `i * eps >= a`, robust to rounding in `a / eps`.
pub fn first_index_at_or_above<S: Scalar>(a: S, eps: S) -> i64 {
    let mut i = (a / eps).ceil().to_f64_lossy() as i64;
    while S::from_f64(i as f64) * eps >= a {
        i -= 1;
    }
    while S::from_f64(i as f64) * eps < a {
        i += 1;
    }
    i
}

/// Index range `{ i : a <= i*eps < b }` returned as `lo..hi` (hi exclusive).
pub fn index_range<S: Scalar>(a: S, b: S, eps: S) -> (i64, i64) {
    let lo = first_index_at_or_above(a, eps);
    let hi = first_index_at_or_above(b, eps);
    (lo, hi)
}

/// Integer half-width of the site set of the open cube `(-side/2, side/2)`:
/// sites are `{ i : |i| <= w }` with `w = max{ i : i*eps < side/2 }`.
pub fn open_cube_halfwidth<S: Scalar>(side: S, eps: S) -> i64 {
    let half = side / S::from_f64(2.0);
    let mut w = (half / eps).floor().to_f64_lossy() as i64;
    while S::from_f64(w as f64) * eps < half {
        w += 1;
    }
    // now w*eps >= half; step back to the last strict site
    while w > 0 && S::from_f64(w as f64) * eps >= half {
        w -= 1;
    }
    w
}
