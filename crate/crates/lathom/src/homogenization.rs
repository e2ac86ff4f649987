//! Homogenized bulk density from growing-cell minimum problems.
//!
//! The cell problem on the cube of side `h` minimizes the unit-spacing
//! interaction energy over functions pinned to the affine data `M alpha` on a
//! one-cell-thick boundary frame; the per-volume minimum converges to the
//! homogenized density as `h` grows. For convex families the limit is the
//! pointwise sum `sum_xi f(xi, M xi / |xi|)`, which serves as the exact
//! reference for the extrapolation.

use crate::density::InteractionDensity;
use crate::energy::EnergySpec;
use crate::error::{LathomError, Result};
use crate::extrapolate::{tail_is_monotone, to_zero, Extrapolated};
use crate::lattice::{offset_norm, ConstraintSet, LatticeDomain};
use crate::scalar::Scalar;
use crate::solver::{minimize, MinimizationResult, SolveOptions};
use std::sync::Arc;

/// One solved cell problem.
#[derive(Debug)]
pub struct CellProblemResult<S> {
    pub h: u32,
    /// m x d row-major boundary gradient
    pub matrix: Vec<S>,
    /// min / h^d
    pub value_per_volume: S,
    /// sites per axis of the cube (the extrapolation variable is 1/n)
    pub sites_per_axis: usize,
    pub solve: MinimizationResult<S>,
}

/// The convex-case closed form `sum_xi f(xi, M xi / |xi|)`.
pub fn convex_reference<S: Scalar>(density: &InteractionDensity<S>, matrix: &[S], m: usize) -> S {
    let d = density.dim();
    assert_eq!(matrix.len(), m * d);
    let mut z = vec![S::zero(); m];
    let terms: Vec<S> = density
        .coeffs()
        .iter()
        .map(|oc| {
            let norm = offset_norm::<S>(&oc.offset);
            for (i, zi) in z.iter_mut().enumerate() {
                let mut acc = S::zero();
                for k in 0..d {
                    acc += matrix[i * d + k] * S::from_f64(oc.offset[k] as f64);
                }
                *zi = acc / norm;
            }
            density.eval(&oc.offset, &z)
        })
        .collect();
    crate::sum::pairwise(&terms)
}

/// Solves the cell problem on `Q_h` with affine frame data `M`.
pub fn cell_problem<S: Scalar>(
    density: &InteractionDensity<S>,
    matrix: &[S],
    m: usize,
    h: u32,
    opts: &SolveOptions<S>,
) -> Result<CellProblemResult<S>> {
    let t = density.truncation().to_f64_lossy();
    if (h as f64) < 2.0 * t + 2.0 {
        return Err(LathomError::InvalidParameter(format!(
            "cube side h = {h} too small for truncation T = {t}: need h >= 2T + 2"
        )));
    }
    let d = density.dim();
    if matrix.len() != m * d {
        return Err(LathomError::InvalidParameter(
            "boundary matrix must be m x d".into(),
        ));
    }
    let domain = Arc::new(LatticeDomain::open_cube(d, S::from_f64(h as f64), S::one())?);
    let (lo, hi) = domain.bounds();
    let sites_per_axis = (hi[0] - lo[0]) as usize;
    let constraints = ConstraintSet::affine_frame(&domain, matrix, S::from_f64(h as f64))?;
    let spec = EnergySpec::new(density.clone(), domain.clone())?;
    let solve = minimize(&spec, &constraints, opts).map_err(LathomError::from)?;
    let volume = S::from_f64((h as f64).powi(d as i32));
    Ok(CellProblemResult {
        h,
        matrix: matrix.to_vec(),
        value_per_volume: solve.energy / volume,
        sites_per_axis,
        solve,
    })
}

/// Extrapolated homogenized density for one boundary matrix.
#[derive(Debug)]
pub struct FHomEstimate<S> {
    pub matrix: Vec<S>,
    pub samples: Vec<CellProblemResult<S>>,
    pub extrapolated: Extrapolated<S>,
    /// closed-form convex reference
    pub reference: S,
    pub monotone_tail: bool,
}

impl<S: Scalar> FHomEstimate<S> {
    pub fn relative_gap(&self) -> S {
        let denom = self.reference.abs().max(S::from_f64(1e-300));
        (self.extrapolated.value - self.reference).abs() / denom
    }
}

/// Runs the cell problem over increasing cube sides and extrapolates the
/// per-volume minima in `1/n` (`n` = sites per axis), which absorbs the
/// exact surface-to-volume pair-count deficit of the pinned frame.
pub fn f_hom_estimate<S: Scalar>(
    density: &InteractionDensity<S>,
    matrix: &[S],
    m: usize,
    h_list: &[u32],
    opts: &SolveOptions<S>,
) -> Result<FHomEstimate<S>> {
    if h_list.len() < 3 {
        return Err(LathomError::InvalidParameter(
            "homogenization estimate needs at least three cube sides".into(),
        ));
    }
    let mut sides = h_list.to_vec();
    sides.sort_unstable();
    let mut samples = Vec::new();
    for &h in &sides {
        samples.push(cell_problem(density, matrix, m, h, opts)?);
    }
    // fit min / n^d against 1/n rather than min / h^d: the pair count of
    // offset xi in the cube is prod_k (n - |xi_k|), so this normalization
    // turns the frame deficit into a low-order polynomial in 1/n
    let d = density.dim() as i32;
    let points: Vec<(S, S)> = samples
        .iter()
        .map(|s| {
            let n = S::from_usize(s.sites_per_axis);
            let min_total = s.value_per_volume * S::from_f64((s.h as f64).powi(d));
            (n.recip(), min_total / n.powi(d))
        })
        .collect();
    let monotone_tail = tail_is_monotone(&points);
    let extrapolated = to_zero(&points)?;
    let reference = convex_reference(density, matrix, m);
    Ok(FHomEstimate {
        matrix: matrix.to_vec(),
        samples,
        extrapolated,
        reference,
        monotone_tail,
    })
}
