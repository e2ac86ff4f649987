//! Finite lattice domains `eps * Z^d` intersected with box regions.

use crate::error::{LathomError, Result};
use crate::geometry::{index_range, open_cube_halfwidth, RealBox};
use crate::scalar::Scalar;

/// Default cap on the number of sites a domain may hold.
pub const DEFAULT_SITE_BUDGET: usize = 1 << 26;

const ABSENT: u32 = u32::MAX;

/// A finite set of lattice sites `alpha in eps*Z^d` with O(1) neighbor lookup.
///
/// Sites are stored as integer multi-indices (coordinates are always derived
/// as `eps * index`, never stored), enumerated in lexicographic order. The
/// cell of a site is `alpha + [0, eps)^d`; cells tile the covered region.
#[derive(Debug)]
pub struct LatticeDomain<S> {
    dim: usize,
    spacing: S,
    /// Flat site indices, `dim` entries per site, lexicographically sorted.
    indices: Vec<i64>,
    /// Bounding index ranges per axis, `lo..hi` exclusive.
    bound_lo: Vec<i64>,
    bound_hi: Vec<i64>,
    /// Row-major strides over the bounding box.
    strides: Vec<usize>,
    /// rank within bounding box -> site position, `ABSENT` if not a site.
    grid: Vec<u32>,
    /// The generating region, kept for region-based constraint helpers.
    boxes: Vec<RealBox<S>>,
    /// True when the site set is exactly the full bounding index box.
    dense: bool,
}

impl<S: Scalar> PartialEq for LatticeDomain<S> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.spacing == other.spacing && self.indices == other.indices
    }
}

impl<S: Scalar> LatticeDomain<S> {
    /// All lattice sites inside a half-open box.
    pub fn from_box(bx: &RealBox<S>, spacing: S) -> Result<Self> {
        Self::from_boxes(std::slice::from_ref(bx), spacing, DEFAULT_SITE_BUDGET)
    }

    /// All lattice sites inside a finite union of half-open boxes.
    pub fn from_boxes(boxes: &[RealBox<S>], spacing: S, budget: usize) -> Result<Self> {
        if !(spacing > S::zero()) || !spacing.is_finite() {
            return Err(LathomError::InvalidSpacing(spacing.to_f64_lossy()));
        }
        if boxes.is_empty() {
            return Err(LathomError::InvalidParameter("no domain boxes given".into()));
        }
        let dim = boxes[0].dim();
        if dim == 0 || boxes.iter().any(|b| b.dim() != dim) {
            return Err(LathomError::InvalidParameter(
                "domain boxes must share a positive dimension".into(),
            ));
        }

        let ranges: Vec<Vec<(i64, i64)>> = boxes
            .iter()
            .map(|b| {
                (0..dim)
                    .map(|k| index_range(b.lo[k], b.hi[k], spacing))
                    .collect()
            })
            .collect();

        // Bounding index box across all member boxes.
        let mut bound_lo = vec![i64::MAX; dim];
        let mut bound_hi = vec![i64::MIN; dim];
        for r in &ranges {
            for k in 0..dim {
                bound_lo[k] = bound_lo[k].min(r[k].0);
                bound_hi[k] = bound_hi[k].max(r[k].1);
            }
        }
        for k in 0..dim {
            if bound_lo[k] >= bound_hi[k] {
                return Err(LathomError::EmptyBox {
                    axis: k,
                    lo: boxes[0].lo[k].to_f64_lossy(),
                    hi: boxes[0].hi[k].to_f64_lossy(),
                });
            }
        }

        let volume: u128 = (0..dim)
            .map(|k| (bound_hi[k] - bound_lo[k]) as u128)
            .product();
        if volume > budget as u128 {
            return Err(LathomError::BudgetExceeded {
                requested: volume,
                budget,
            });
        }
        let volume = volume as usize;

        // Walk the bounding box in lexicographic order, marking membership.
        let mut indices = Vec::new();
        let mut grid = vec![ABSENT; volume];
        let mut cursor = bound_lo.clone();
        let single = ranges.len() == 1;
        for rank in 0..volume {
            let inside = if single {
                (0..dim).all(|k| ranges[0][k].0 <= cursor[k] && cursor[k] < ranges[0][k].1)
            } else {
                ranges
                    .iter()
                    .any(|r| (0..dim).all(|k| r[k].0 <= cursor[k] && cursor[k] < r[k].1))
            };
            if inside {
                let pos = indices.len() / dim;
                if pos >= u32::MAX as usize {
                    return Err(LathomError::BudgetExceeded {
                        requested: volume as u128,
                        budget: u32::MAX as usize,
                    });
                }
                grid[rank] = pos as u32;
                indices.extend_from_slice(&cursor);
            }
            // lexicographic increment: last axis fastest
            for k in (0..dim).rev() {
                cursor[k] += 1;
                if cursor[k] < bound_hi[k] {
                    break;
                }
                cursor[k] = bound_lo[k];
            }
        }

        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (bound_hi[k + 1] - bound_lo[k + 1]) as usize;
        }
        let dense = indices.len() / dim == volume;

        Ok(Self {
            dim,
            spacing,
            indices,
            bound_lo,
            bound_hi,
            strides,
            grid,
            boxes: boxes.to_vec(),
            dense,
        })
    }

    /// Sites of the open cube `(-side/2, side/2)^d`: `|alpha|_inf < side/2`.
    pub fn open_cube(dim: usize, side: S, spacing: S) -> Result<Self> {
        if !(side > S::zero()) {
            return Err(LathomError::InvalidParameter(format!(
                "cube side must be positive, got {side}"
            )));
        }
        let w = open_cube_halfwidth(side, spacing);
        Self::centered_index_cube(dim, w, spacing)
    }

    /// Sites `{ |alpha|_inf <= halfwidth * eps }` (closed index cube).
    pub fn centered_index_cube(dim: usize, halfwidth: i64, spacing: S) -> Result<Self> {
        if !(spacing > S::zero()) || !spacing.is_finite() {
            return Err(LathomError::InvalidSpacing(spacing.to_f64_lossy()));
        }
        if dim == 0 || halfwidth < 0 {
            return Err(LathomError::InvalidParameter(
                "index cube needs dim >= 1 and halfwidth >= 0".into(),
            ));
        }
        let half = S::from_f64(halfwidth as f64 + 0.5) * spacing;
        let bx = RealBox::new(vec![-half; dim], vec![half; dim])?;
        Self::from_boxes(std::slice::from_ref(&bx), spacing, DEFAULT_SITE_BUDGET)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> S {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.indices.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Generating region (may be empty for index-cube constructions).
    pub fn region(&self) -> &[RealBox<S>] {
        &self.boxes
    }

    pub fn cell_volume(&self) -> S {
        let mut v = S::one();
        for _ in 0..self.dim {
            v = v * self.spacing;
        }
        v
    }

    /// Integer multi-index of the site at enumeration position `pos`.
    #[inline]
    pub fn site(&self, pos: usize) -> &[i64] {
        &self.indices[pos * self.dim..(pos + 1) * self.dim]
    }

    /// Real coordinates `eps * index` of a site, written into `out`.
    #[inline]
    pub fn coords_into(&self, pos: usize, out: &mut [S]) {
        for (o, &i) in out.iter_mut().zip(self.site(pos)) {
            *o = self.spacing * S::from_f64(i as f64);
        }
    }

    pub fn coords(&self, pos: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        self.coords_into(pos, &mut out);
        out
    }

    /// Per-axis bounding index ranges (lo inclusive, hi exclusive).
    pub fn bounds(&self) -> (&[i64], &[i64]) {
        (&self.bound_lo, &self.bound_hi)
    }

    /// True when the site set fills its bounding index box exactly.
    pub fn is_dense_box(&self) -> bool {
        self.dense
    }

    /// Enumeration position of the site with the given integer index.
    #[inline]
    pub fn position(&self, index: &[i64]) -> Option<usize> {
        let mut rank = 0usize;
        for k in 0..self.dim {
            let i = index[k];
            if i < self.bound_lo[k] || i >= self.bound_hi[k] {
                return None;
            }
            rank += (i - self.bound_lo[k]) as usize * self.strides[k];
        }
        match self.grid[rank] {
            ABSENT => None,
            pos => Some(pos as usize),
        }
    }

    /// Position of the neighbor `site(pos) + offset`, if it is a site.
    #[inline]
    pub fn neighbor(&self, pos: usize, offset: &[i64]) -> Option<usize> {
        let site = self.site(pos);
        let mut rank = 0usize;
        for k in 0..self.dim {
            let i = site[k] + offset[k];
            if i < self.bound_lo[k] || i >= self.bound_hi[k] {
                return None;
            }
            rank += (i - self.bound_lo[k]) as usize * self.strides[k];
        }
        match self.grid[rank] {
            ABSENT => None,
            pos => Some(pos as usize),
        }
    }

    /// Position of the site whose cell `alpha + [0, eps)^d` contains `x`.
    pub fn cell_containing(&self, x: &[S]) -> Option<usize> {
        let mut idx = vec![0i64; self.dim];
        for k in 0..self.dim {
            let i = (x[k] / self.spacing).floor().to_f64_lossy() as i64;
            // guard against rounding at cell faces
            let i = if S::from_f64(i as f64) * self.spacing > x[k] {
                i - 1
            } else if S::from_f64((i + 1) as f64) * self.spacing <= x[k] {
                i + 1
            } else {
                i
            };
            idx[k] = i;
        }
        self.position(&idx)
    }

    /// The interaction index set for offset `xi`: enumeration positions of all
    /// sites `alpha` such that both `alpha` and `alpha + eps*xi` are sites.
    pub fn interaction_sites(&self, xi: &[i64]) -> Vec<usize> {
        assert_eq!(xi.len(), self.dim);
        (0..self.len())
            .filter(|&p| self.neighbor(p, xi).is_some())
            .collect()
    }

    /// Sites whose half-open cell intersects the open cube `(-side/2, side/2)^d`
    /// centered at the origin.
    pub fn sites_with_cell_meeting_cube(&self, side: S) -> Vec<usize> {
        let half = side / S::from_f64(2.0);
        (0..self.len())
            .filter(|&p| {
                self.site(p).iter().all(|&i| {
                    let lo = S::from_f64(i as f64) * self.spacing;
                    let hi = S::from_f64((i + 1) as f64) * self.spacing;
                    lo < half && hi > -half
                })
            })
            .collect()
    }

    /// Sites whose cell is NOT contained in the closed cube `[-side/2, side/2]^d`.
    pub fn sites_with_cell_escaping_cube(&self, side: S) -> Vec<usize> {
        let half = side / S::from_f64(2.0);
        (0..self.len())
            .filter(|&p| {
                !self.site(p).iter().all(|&i| {
                    let lo = S::from_f64(i as f64) * self.spacing;
                    let hi = S::from_f64((i + 1) as f64) * self.spacing;
                    lo >= -half && hi <= half
                })
            })
            .collect()
    }

    /// Chebyshev norm of a site's real coordinates.
    pub fn chebyshev_norm(&self, pos: usize) -> S {
        self.site(pos)
            .iter()
            .map(|&i| (S::from_f64(i as f64) * self.spacing).abs())
            .fold(S::zero(), S::max)
    }
}
