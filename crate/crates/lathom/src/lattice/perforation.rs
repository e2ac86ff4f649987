//! Periodic perforation arrays and their lattice masks.

use super::domain::LatticeDomain;
use crate::error::{LathomError, Result};
use crate::scalar::Scalar;
use std::sync::Arc;

/// A `delta`-periodic array of small closed cubes of side `r_delta` centered
/// on `delta * Z^d`, realized as a site mask on a lattice domain.
///
/// Commensurability is required: `delta = N * eps` and `r_delta = 2 * n * eps`
/// with integer `N >= 2`, `n >= 1`, and `r_delta < delta`. A site belongs to
/// the mask iff it lies within Chebyshev distance `r_delta / 2` of some center
/// (boundary ties included, the cubes being closed).
#[derive(Debug, Clone)]
pub struct PerforationGeometry<S> {
    delta: S,
    r_delta: S,
    /// period in lattice steps, `N = delta / eps`
    period: i64,
    /// half-side in lattice steps, `n = r_delta / (2 eps)`
    half_steps: i64,
    mask: Vec<bool>,
    masked: Vec<usize>,
}

fn integer_ratio(value: f64, unit: f64) -> Option<i64> {
    let q = value / unit;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * q.abs().max(1.0) {
        Some(r as i64)
    } else {
        None
    }
}

impl<S: Scalar> PerforationGeometry<S> {
    pub fn build(delta: S, r_delta: S, domain: &Arc<LatticeDomain<S>>) -> Result<Self> {
        let eps = domain.spacing().to_f64_lossy();
        let period = integer_ratio(delta.to_f64_lossy(), eps).ok_or(LathomError::NotCommensurate {
            quantity: "delta",
            value: delta.to_f64_lossy(),
            unit: "eps",
            unit_value: eps,
        })?;
        let half_steps =
            integer_ratio(r_delta.to_f64_lossy(), 2.0 * eps).ok_or(LathomError::NotCommensurate {
                quantity: "r_delta",
                value: r_delta.to_f64_lossy(),
                unit: "2*eps",
                unit_value: 2.0 * eps,
            })?;
        if period < 2 || half_steps < 1 {
            return Err(LathomError::InvalidParameter(format!(
                "perforation needs delta >= 2 eps and r_delta >= 2 eps, got N = {period}, n = {half_steps}"
            )));
        }
        if !(r_delta < delta) {
            return Err(LathomError::InvalidParameter(format!(
                "perforation side r_delta = {r_delta} must be smaller than the period delta = {delta}"
            )));
        }

        let mask: Vec<bool> = (0..domain.len())
            .map(|p| Self::index_in_mask(domain.site(p), period, half_steps))
            .collect();
        let masked = mask
            .iter()
            .enumerate()
            .filter_map(|(p, &b)| b.then_some(p))
            .collect();
        Ok(Self {
            delta,
            r_delta,
            period,
            half_steps,
            mask,
            masked,
        })
    }

    #[inline]
    fn index_in_mask(site: &[i64], period: i64, half_steps: i64) -> bool {
        site.iter().all(|&i| {
            let r = i.rem_euclid(period);
            r <= half_steps || period - r <= half_steps
        })
    }

    pub fn delta(&self) -> S {
        self.delta
    }

    pub fn r_delta(&self) -> S {
        self.r_delta
    }

    /// `N` with `delta = N * eps`.
    pub fn period_steps(&self) -> i64 {
        self.period
    }

    /// `n` with `r_delta = 2 * n * eps`.
    pub fn half_steps(&self) -> i64 {
        self.half_steps
    }

    #[inline]
    pub fn is_masked(&self, pos: usize) -> bool {
        self.mask[pos]
    }

    /// Enumeration positions of all masked sites.
    pub fn masked_sites(&self) -> &[usize] {
        &self.masked
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RealBox;

    fn domain(eps: f64, side: f64) -> Arc<LatticeDomain<f64>> {
        let b = RealBox::new(vec![0.0, 0.0], vec![side, side]).unwrap();
        Arc::new(LatticeDomain::from_box(&b, eps).unwrap())
    }

    #[test]
    fn five_by_five_block_per_period_cell() {
        // delta = 1, r = 0.25, eps = 1/16: n = 2 -> (2n+1)^2 = 25 per center
        let d = domain(0.0625, 1.0);
        let p = PerforationGeometry::build(1.0, 0.25, &d).unwrap();
        // the domain [0,1)^2 sees one full corner block quadrant per corner;
        // count masked sites with |i mod 16| <= 2 per axis by brute force
        let brute = (0..d.len())
            .filter(|&q| {
                d.site(q).iter().all(|&i| {
                    let r = i.rem_euclid(16);
                    r <= 2 || 16 - r <= 2
                })
            })
            .count();
        assert_eq!(p.masked_sites().len(), brute);
        // one full period cell worth of mask is 5x5
        let per_cell = (0..d.len())
            .filter(|&q| {
                let s = d.site(q);
                s.iter().all(|&i| (-2..=2).contains(&(i - 0)) || (14..16).contains(&i))
            })
            .count();
        // corner block at origin within [0, 1): rows 0,1,2 and 14,15 per axis
        assert_eq!(per_cell, 25);
    }

    #[test]
    fn three_by_three_for_minimal_side() {
        // r = 2*eps -> n = 1 -> 3x3 sites per center
        let d = domain(0.125, 1.0);
        let p = PerforationGeometry::build(0.5, 0.25, &d).unwrap();
        assert_eq!(p.half_steps(), 1);
        // center at (0.5, 0.5) = index (4,4): the block {3,4,5}^2
        let block = (0..d.len())
            .filter(|&q| d.site(q).iter().all(|&i| (3..=5).contains(&i)))
            .count();
        assert_eq!(block, 9);
        for q in 0..d.len() {
            if d.site(q).iter().all(|&i| (3..=5).contains(&i)) {
                assert!(p.is_masked(q));
            }
        }
    }

    #[test]
    fn non_commensurate_period_is_rejected() {
        let d = domain(0.3, 1.0);
        assert!(matches!(
            PerforationGeometry::build(1.0, 0.6, &d),
            Err(LathomError::NotCommensurate { .. })
        ));
    }

    #[test]
    fn mask_is_periodic_in_the_interior() {
        let d = domain(0.0625, 2.0);
        let p = PerforationGeometry::build(0.5, 0.25, &d).unwrap();
        let shift = p.period_steps();
        for q in 0..d.len() {
            for k in 0..2 {
                let mut off = [0i64; 2];
                off[k] = shift;
                if let Some(q2) = d.neighbor(q, &off) {
                    assert_eq!(p.is_masked(q), p.is_masked(q2));
                }
            }
        }
    }
}
