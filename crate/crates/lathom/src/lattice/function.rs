//! Vector-valued lattice functions and difference quotients.

use super::domain::LatticeDomain;
use crate::error::{LathomError, Result};
use crate::scalar::Scalar;
use std::sync::Arc;

/// A function `u : sites -> R^m`, identified with its piecewise-constant
/// interpolation on the cells `alpha + [0, eps)^d`.
#[derive(Debug, Clone)]
pub struct LatticeFunction<S> {
    domain: Arc<LatticeDomain<S>>,
    values: Vec<S>,
    m: usize,
}

impl<S: Scalar> LatticeFunction<S> {
    pub fn zeros(domain: Arc<LatticeDomain<S>>, m: usize) -> Self {
        assert!(m >= 1);
        let n = domain.len();
        Self {
            domain,
            values: vec![S::zero(); n * m],
            m,
        }
    }

    pub fn from_values(domain: Arc<LatticeDomain<S>>, m: usize, values: Vec<S>) -> Result<Self> {
        if values.len() != domain.len() * m {
            return Err(LathomError::InvalidParameter(format!(
                "value count {} does not match {} sites x {} components",
                values.len(),
                domain.len(),
                m
            )));
        }
        Ok(Self { domain, values, m })
    }

    /// Samples a pointwise map of the site coordinates.
    pub fn from_fn(
        domain: Arc<LatticeDomain<S>>,
        m: usize,
        mut f: impl FnMut(&[S], &mut [S]),
    ) -> Self {
        let n = domain.len();
        let d = domain.dim();
        let mut values = vec![S::zero(); n * m];
        let mut x = vec![S::zero(); d];
        for p in 0..n {
            domain.coords_into(p, &mut x);
            f(&x, &mut values[p * m..(p + 1) * m]);
        }
        Self { domain, values, m }
    }

    pub fn domain(&self) -> &Arc<LatticeDomain<S>> {
        &self.domain
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    #[inline]
    pub fn value(&self, pos: usize) -> &[S] {
        &self.values[pos * self.m..(pos + 1) * self.m]
    }

    pub fn value_mut(&mut self, pos: usize) -> &mut [S] {
        &mut self.values[pos * self.m..(pos + 1) * self.m]
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    /// Piecewise-constant evaluation: the value of the cell containing `x`,
    /// and zero outside all cells.
    pub fn eval_point(&self, x: &[S], out: &mut [S]) {
        match self.domain.cell_containing(x) {
            Some(p) => out.copy_from_slice(self.value(p)),
            None => out.fill(S::zero()),
        }
    }

    /// Difference quotient `(u(alpha + eps*xi) - u(alpha)) / (eps |xi|)`
    /// along a nonzero integer offset, written into `out`.
    ///
    /// Both endpoints must be sites; a missing endpoint is a contract
    /// violation and panics.
    pub fn difference_quotient(&self, pos: usize, xi: &[i64], out: &mut [S]) {
        let norm = offset_norm::<S>(xi);
        assert!(norm > S::zero(), "difference quotient needs xi != 0");
        let q = self
            .domain
            .neighbor(pos, xi)
            .expect("difference quotient endpoint alpha + eps*xi is outside the domain");
        let inv = (self.domain.spacing() * norm).recip();
        let a = self.value(pos);
        let b = self.value(q);
        for i in 0..self.m {
            out[i] = (b[i] - a[i]) * inv;
        }
    }

    /// `L^p` norm of the piecewise-constant interpolation:
    /// `(sum_alpha eps^d |u(alpha)|^p)^(1/p)`.
    pub fn lp_norm(&self, p: S) -> S {
        let cell = self.domain.cell_volume();
        let m = self.m;
        let total = crate::sum::sum_indexed(self.domain.len(), |pos| {
            let v = &self.values[pos * m..(pos + 1) * m];
            let s2: S = v.iter().map(|&x| x * x).sum();
            cell * s2.powf(p / S::from_f64(2.0))
        });
        total.powf(p.recip())
    }

    pub fn scale(&mut self, t: S) {
        for v in &mut self.values {
            *v *= t;
        }
    }

    /// Piecewise-constant resampling onto another domain: each target site
    /// takes the value of the source cell containing it (zero where the
    /// source has no cell). Used to warm-start refined solves.
    pub fn resample_onto(&self, domain: &Arc<LatticeDomain<S>>) -> LatticeFunction<S> {
        let mut out = LatticeFunction::zeros(domain.clone(), self.m);
        let d = domain.dim();
        let mut x = vec![S::zero(); d];
        let half = self.domain.spacing() / S::from_f64(2.0);
        for p in 0..domain.len() {
            domain.coords_into(p, &mut x);
            // sample at the source-cell center to dodge face-rounding
            for xi in x.iter_mut() {
                *xi += half.min(domain.spacing() / S::from_f64(2.0));
            }
            if let Some(src) = self.domain.cell_containing(&x) {
                out.value_mut(p).copy_from_slice(self.value(src));
            }
        }
        out
    }
}

/// Euclidean norm of an integer offset.
pub fn offset_norm<S: Scalar>(xi: &[i64]) -> S {
    let s: f64 = xi.iter().map(|&k| (k * k) as f64).sum();
    S::from_f64(s.sqrt())
}
