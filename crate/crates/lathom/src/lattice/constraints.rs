//! Pinned-value constraint sets for the minimum problems.

use super::domain::LatticeDomain;
use super::function::LatticeFunction;
use super::perforation::PerforationGeometry;
use crate::error::{LathomError, Result};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A set of sites pinned to fixed values; the complement are the solver's
/// degrees of freedom. No site may be pinned twice.
#[derive(Debug, Clone)]
pub struct ConstraintSet<S> {
    m: usize,
    /// pinned site position -> m pinned components
    pins: BTreeMap<usize, Vec<S>>,
}

impl<S: Scalar> ConstraintSet<S> {
    pub fn empty(m: usize) -> Self {
        Self {
            m,
            pins: BTreeMap::new(),
        }
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.pins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty()
    }

    pub fn pin(&mut self, pos: usize, value: &[S]) -> Result<()> {
        assert_eq!(value.len(), self.m);
        if self.pins.insert(pos, value.to_vec()).is_some() {
            return Err(LathomError::InvalidParameter(format!(
                "site {pos} pinned twice"
            )));
        }
        Ok(())
    }

    pub fn pinned_value(&self, pos: usize) -> Option<&[S]> {
        self.pins.get(&pos).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[S])> {
        self.pins.iter().map(|(&p, v)| (p, v.as_slice()))
    }

    /// Free (unpinned) site positions in enumeration order.
    pub fn free_sites(&self, domain: &LatticeDomain<S>) -> Vec<usize> {
        (0..domain.len()).filter(|p| !self.pins.contains_key(p)).collect()
    }

    /// Overwrites the pinned entries of `u` with their pinned values.
    pub fn apply(&self, u: &mut LatticeFunction<S>) {
        assert_eq!(u.components(), self.m);
        for (&p, v) in &self.pins {
            u.value_mut(p).copy_from_slice(v);
        }
    }

    /// True if every pinned entry of `u` equals its pinned value exactly.
    pub fn satisfied_by(&self, u: &LatticeFunction<S>) -> bool {
        self.pins.iter().all(|(&p, v)| u.value(p) == v.as_slice())
    }

    /// Pins `u = 0` on the perforation mask.
    pub fn zero_on_mask(
        domain: &Arc<LatticeDomain<S>>,
        m: usize,
        perforation: &PerforationGeometry<S>,
    ) -> Self {
        let zeros = vec![S::zero(); m];
        let mut c = Self::empty(m);
        for &p in perforation.masked_sites() {
            c.pins.insert(p, zeros.clone());
        }
        let _ = domain;
        c
    }

    /// The constraint class of the capacitary problems: `u = -z` on every cell
    /// meeting the unit cube `Q_1` and `u = 0` on every cell not contained in
    /// the closed cube of side `inner_side = R - eps*T`.
    pub fn capacity_pins(
        domain: &Arc<LatticeDomain<S>>,
        z: &[S],
        inner_side: S,
    ) -> Result<Self> {
        let m = z.len();
        let mut c = Self::empty(m);
        let minus_z: Vec<S> = z.iter().map(|&v| -v).collect();
        let core = domain.sites_with_cell_meeting_cube(S::one());
        if core.is_empty() {
            return Err(LathomError::Infeasible(
                "the unit cube Q_1 is not resolved by the lattice".into(),
            ));
        }
        for p in core {
            c.pins.insert(p, minus_z.clone());
        }
        let zeros = vec![S::zero(); m];
        for p in domain.sites_with_cell_escaping_cube(inner_side) {
            // Q_1 pins win on (degenerate) overlap; geometry should prevent it
            c.pins.entry(p).or_insert_with(|| zeros.clone());
        }
        Ok(c)
    }

    /// Pins `u(alpha) = M * alpha` on every site whose Chebyshev distance to
    /// the complement of the open cube of side `h` is at most `eps`
    /// (the one-cell-thick boundary frame of the cell problems).
    ///
    /// `matrix` is m x d, row-major.
    pub fn affine_frame(
        domain: &Arc<LatticeDomain<S>>,
        matrix: &[S],
        h: S,
    ) -> Result<Self> {
        let d = domain.dim();
        let m = matrix.len() / d;
        if matrix.len() != m * d || m == 0 {
            return Err(LathomError::InvalidParameter(
                "affine frame needs an m x d matrix".into(),
            ));
        }
        let eps = domain.spacing();
        let half = h / S::from_f64(2.0);
        let mut c = Self::empty(m);
        let mut x = vec![S::zero(); d];
        for p in 0..domain.len() {
            // distance from alpha to the complement of (-h/2, h/2)^d
            let dist = half - domain.chebyshev_norm(p);
            if dist <= eps {
                domain.coords_into(p, &mut x);
                let v: Vec<S> = (0..m)
                    .map(|i| (0..d).map(|k| matrix[i * d + k] * x[k]).sum())
                    .collect();
                c.pins.insert(p, v);
            }
        }
        Ok(c)
    }
}

/// Sites in the frame `{ (R - t)/2 <= |alpha|_inf < (R + t)/2 }` between two
/// concentric cubes of sides `R - t` and `R + t` (inner edge included, outer
/// excluded, so zero thickness yields the empty set).
pub fn boundary_frame<S: Scalar>(
    domain: &LatticeDomain<S>,
    side: S,
    thickness: S,
) -> Result<Vec<usize>> {
    if thickness < S::zero() {
        return Err(LathomError::InvalidParameter(
            "frame thickness must be nonnegative".into(),
        ));
    }
    if thickness >= side / S::from_f64(2.0) {
        return Err(LathomError::Infeasible(format!(
            "frame thickness {thickness} would swallow the cube of side {side}"
        )));
    }
    let two = S::from_f64(2.0);
    let inner = (side - thickness) / two;
    let outer = (side + thickness) / two;
    Ok((0..domain.len())
        .filter(|&p| {
            let r = domain.chebyshev_norm(p);
            r >= inner && r < outer
        })
        .collect())
}
