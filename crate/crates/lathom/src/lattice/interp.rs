//! Operators linking lattice and continuum functions: cell-average sampling,
//! piecewise-affine interpolation in 2d, and Lipschitz value truncation.

use super::domain::LatticeDomain;
use super::function::LatticeFunction;
use crate::error::{LathomError, Result};
use crate::scalar::Scalar;
use std::sync::Arc;

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    match order {
        1 => (vec![0.5], vec![1.0]),
        2 => {
            let a = 0.5 / 3.0_f64.sqrt();
            (vec![0.5 - a, 0.5 + a], vec![0.5, 0.5])
        }
        3 => {
            let a = 0.5 * (3.0 / 5.0_f64).sqrt();
            (
                vec![0.5 - a, 0.5, 0.5 + a],
                vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
            )
        }
        4 => {
            let r1 = (3.0 / 7.0 - 2.0 / 7.0 * (6.0 / 5.0_f64).sqrt()).sqrt();
            let r2 = (3.0 / 7.0 + 2.0 / 7.0 * (6.0 / 5.0_f64).sqrt()).sqrt();
            let w1 = (18.0 + 30.0_f64.sqrt()) / 72.0;
            let w2 = (18.0 - 30.0_f64.sqrt()) / 72.0;
            (
                vec![0.5 - r2 / 2.0, 0.5 - r1 / 2.0, 0.5 + r1 / 2.0, 0.5 + r2 / 2.0],
                vec![w2, w1, w1, w2],
            )
        }
        5 => {
            let r1 = (5.0 - 2.0 * (10.0 / 7.0_f64).sqrt()).sqrt() / 3.0;
            let r2 = (5.0 + 2.0 * (10.0 / 7.0_f64).sqrt()).sqrt() / 3.0;
            let w0 = 128.0 / 450.0;
            let w1 = (322.0 + 13.0 * 70.0_f64.sqrt()) / 1800.0;
            let w2 = (322.0 - 13.0 * 70.0_f64.sqrt()) / 1800.0;
            (
                vec![
                    0.5 - r2 / 2.0,
                    0.5 - r1 / 2.0,
                    0.5,
                    0.5 + r1 / 2.0,
                    0.5 + r2 / 2.0,
                ],
                vec![w2, w1, w0, w1, w2],
            )
        }
        _ => panic!("Gauss rule of order {order} not tabulated (1..=5)"),
    }
}

pub const DEFAULT_QUADRATURE_ORDER: usize = 3;

/// Per-cell averages `(1/eps^d) \int_{cell} u(x) dx` of a continuum function,
/// integrated by a tensor Gauss rule (`order` points per axis).
pub fn cell_average_sample<S: Scalar>(
    domain: &Arc<LatticeDomain<S>>,
    m: usize,
    order: usize,
    mut u: impl FnMut(&[S], &mut [S]),
) -> LatticeFunction<S> {
    let d = domain.dim();
    let eps = domain.spacing();
    let (nodes, weights) = gauss_rule(order);
    let nodes: Vec<S> = nodes.into_iter().map(S::from_f64).collect();
    let weights: Vec<S> = weights.into_iter().map(S::from_f64).collect();

    let npts = nodes.len().pow(d as u32);
    let mut values = vec![S::zero(); domain.len() * m];
    let mut base = vec![S::zero(); d];
    let mut x = vec![S::zero(); d];
    let mut fx = vec![S::zero(); m];
    for p in 0..domain.len() {
        domain.coords_into(p, &mut base);
        let cell = &mut values[p * m..(p + 1) * m];
        for q in 0..npts {
            let mut w = S::one();
            let mut rem = q;
            for k in 0..d {
                let j = rem % nodes.len();
                rem /= nodes.len();
                x[k] = base[k] + eps * nodes[j];
                w *= weights[j];
            }
            u(&x, &mut fx);
            for i in 0..m {
                cell[i] += w * fx[i];
            }
        }
    }
    LatticeFunction::from_values(domain.clone(), m, values).expect("sizes agree")
}

/// Continuous piecewise-affine interpolation of 2d lattice data on the
/// standard two-triangle split of each cell.
///
/// On `alpha + eps*T-` (lower-left triangle, `x2 <= eps - x1` locally) the
/// interpolant matches the data at `alpha, alpha + eps e1, alpha + eps e2`;
/// on `alpha + eps*T+` it matches at the other three corners. Only cells with
/// all four corners in the domain are covered.
#[derive(Debug)]
pub struct AffineInterpolant2d<S> {
    domain: Arc<LatticeDomain<S>>,
    values: Vec<S>,
    m: usize,
    /// positions (p, p+e1, p+e2, p+e1+e2) per complete cell
    cells: Vec<[usize; 4]>,
}

/// One triangle of the interpolation with its constant gradient.
#[derive(Debug, Clone)]
pub struct Simplex<S> {
    pub area: S,
    /// m x 2 row-major gradient
    pub gradient: Vec<S>,
}

impl<S: Scalar> AffineInterpolant2d<S> {
    pub fn new(u: &LatticeFunction<S>) -> Result<Self> {
        let domain = u.domain().clone();
        if domain.dim() != 2 {
            return Err(LathomError::InvalidParameter(format!(
                "affine interpolation is implemented for d = 2 only, got d = {}",
                domain.dim()
            )));
        }
        let mut cells = Vec::new();
        for p in 0..domain.len() {
            let (e1, e2, e12) = (
                domain.neighbor(p, &[1, 0]),
                domain.neighbor(p, &[0, 1]),
                domain.neighbor(p, &[1, 1]),
            );
            if let (Some(a), Some(b), Some(c)) = (e1, e2, e12) {
                cells.push([p, a, b, c]);
            }
        }
        Ok(Self {
            domain,
            values: u.values().to_vec(),
            m: u.components(),
            cells,
        })
    }

    pub fn components(&self) -> usize {
        self.m
    }

    fn val(&self, p: usize) -> &[S] {
        &self.values[p * self.m..(p + 1) * self.m]
    }

    /// The two triangles of every complete cell, lower triangle first.
    pub fn simplices(&self) -> Vec<Simplex<S>> {
        let eps = self.domain.spacing();
        let inv = eps.recip();
        let half = eps * eps / S::from_f64(2.0);
        let mut out = Vec::with_capacity(self.cells.len() * 2);
        for &[p, pe1, pe2, pe12] in &self.cells {
            let (u0, u1, u2, u12) = (self.val(p), self.val(pe1), self.val(pe2), self.val(pe12));
            let mut lower = vec![S::zero(); self.m * 2];
            let mut upper = vec![S::zero(); self.m * 2];
            for i in 0..self.m {
                lower[i * 2] = (u1[i] - u0[i]) * inv;
                lower[i * 2 + 1] = (u2[i] - u0[i]) * inv;
                upper[i * 2] = (u12[i] - u2[i]) * inv;
                upper[i * 2 + 1] = (u12[i] - u1[i]) * inv;
            }
            out.push(Simplex {
                area: half,
                gradient: lower,
            });
            out.push(Simplex {
                area: half,
                gradient: upper,
            });
        }
        out
    }

    /// Evaluates the interpolant; zero on uncovered cells.
    pub fn eval(&self, x: &[S], out: &mut [S]) {
        out.fill(S::zero());
        let Some(p) = self.domain.cell_containing(x) else {
            return;
        };
        let Some(&[p0, pe1, pe2, pe12]) = self.cells.iter().find(|c| c[0] == p) else {
            return;
        };
        let eps = self.domain.spacing();
        let base = self.domain.coords(p0);
        let (lx, ly) = (x[0] - base[0], x[1] - base[1]);
        let inv = eps.recip();
        let (u0, u1, u2, u12) = (
            self.val(p0),
            self.val(pe1),
            self.val(pe2),
            self.val(pe12),
        );
        if lx + ly <= eps {
            for i in 0..self.m {
                out[i] = u0[i] + (u1[i] - u0[i]) * inv * lx + (u2[i] - u0[i]) * inv * ly;
            }
        } else {
            for i in 0..self.m {
                out[i] = u12[i]
                    + (u12[i] - u2[i]) * inv * (lx - eps)
                    + (u12[i] - u1[i]) * inv * (ly - eps);
            }
        }
    }
}

/// Radial truncation at level `L`: identity for `|z| <= L`, zero for
/// `|z| >= 2L`, and `z * (2L - |z|) / |z|` in between.
///
/// The map has Lipschitz constant exactly 1 (radial slope -1, tangential
/// factor at most 1) and never increases norms.
pub fn truncate_values<S: Scalar>(u: &LatticeFunction<S>, level: S) -> Result<LatticeFunction<S>> {
    if !(level > S::zero()) {
        return Err(LathomError::InvalidParameter(format!(
            "truncation level must be positive, got {level}"
        )));
    }
    let mut out = u.clone();
    let two_l = level + level;
    for p in 0..u.domain().len() {
        let v = out.value_mut(p);
        let norm = v.iter().map(|&x| x * x).sum::<S>().sqrt();
        if norm <= level {
            continue;
        }
        if norm >= two_l {
            v.fill(S::zero());
        } else {
            let factor = (two_l - norm) / norm;
            for x in v.iter_mut() {
                *x *= factor;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RealBox;
    use proptest::prelude::*;

    fn grid(eps: f64, n: f64) -> Arc<LatticeDomain<f64>> {
        let b = RealBox::new(vec![0.0, 0.0], vec![n, n]).unwrap();
        Arc::new(LatticeDomain::from_box(&b, eps).unwrap())
    }

    #[test]
    fn cell_average_of_constant_is_constant() {
        let d = grid(0.25, 1.0);
        let s = cell_average_sample(&d, 1, 3, |_, out| out[0] = 4.25);
        assert!(s.values().iter().all(|&v| (v - 4.25).abs() < 1e-14));
    }

    #[test]
    fn cell_average_of_linear_is_midpoint() {
        let d = grid(0.25, 1.0);
        let s = cell_average_sample(&d, 1, 3, |x, out| out[0] = x[0]);
        for p in 0..d.len() {
            let x = d.coords(p);
            assert!((s.value(p)[0] - (x[0] + 0.125)).abs() < 1e-14);
        }
    }

    #[test]
    fn cell_average_of_square_matches_closed_form() {
        // int_0^eps x^2 dx / eps = eps^2 / 3 on the cell at the origin
        let d = grid(0.5, 1.0);
        let s = cell_average_sample(&d, 1, 3, |x, out| out[0] = x[0] * x[0]);
        let origin = d.position(&[0, 0]).unwrap();
        assert!((s.value(origin)[0] - 0.25 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn affine_data_reproduces_gradient_on_every_simplex() {
        let d = grid(0.25, 1.01);
        let (m11, m12) = (1.5, -0.75);
        let u = LatticeFunction::from_fn(d.clone(), 1, |x, out| {
            out[0] = m11 * x[0] + m12 * x[1] + 0.3
        });
        let interp = AffineInterpolant2d::new(&u).unwrap();
        for s in interp.simplices() {
            assert!((s.gradient[0] - m11).abs() < 1e-12);
            assert!((s.gradient[1] - m12).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_data_has_zero_gradient() {
        let d = grid(0.5, 1.01);
        let u = LatticeFunction::from_fn(d.clone(), 2, |_, out| {
            out[0] = 1.0;
            out[1] = -2.0
        });
        let interp = AffineInterpolant2d::new(&u).unwrap();
        for s in interp.simplices() {
            assert!(s.gradient.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn dirichlet_energy_matches_strip_assembly() {
        // random 3x3 data: per-simplex integral of |grad|^2 regroups into the
        // strip sum, with half weights where only one of the two half-strips
        // is covered by a complete cell.
        let d = grid(1.0, 3.0);
        assert_eq!(d.len(), 9);
        let vals: Vec<f64> = vec![0.3, -1.2, 0.7, 2.0, 0.1, -0.5, 1.1, 0.9, -2.2];
        let u = LatticeFunction::from_values(d.clone(), 1, vals).unwrap();
        let interp = AffineInterpolant2d::new(&u).unwrap();
        let direct: f64 = interp
            .simplices()
            .iter()
            .map(|s| s.area * (s.gradient[0].powi(2) + s.gradient[1].powi(2)))
            .sum();

        // strip assembly: D^{e_k} u(alpha) holds on two triangle halves
        // (T- of the cell at alpha, T+ of the cell shifted back); each
        // half contributes eps^2/2 when its cell is complete.
        let mut strips = 0.0;
        let mut q = [0.0];
        for p in 0..d.len() {
            for (k, xi, back) in [(0, [1i64, 0], [0i64, -1]), (1, [0, 1], [-1, 0])] {
                let _ = k;
                if d.neighbor(p, &xi).is_none() {
                    continue;
                }
                u.difference_quotient(p, &xi, &mut q);
                let complete = |pos: usize| {
                    d.neighbor(pos, &[1, 0]).is_some()
                        && d.neighbor(pos, &[0, 1]).is_some()
                        && d.neighbor(pos, &[1, 1]).is_some()
                };
                if complete(p) {
                    strips += 0.5 * q[0] * q[0];
                }
                if let Some(pb) = d.neighbor(p, &back) {
                    if complete(pb) {
                        strips += 0.5 * q[0] * q[0];
                    }
                }
            }
        }
        assert!((direct - strips).abs() < 1e-12, "{direct} vs {strips}");
    }

    #[test]
    fn interpolation_rejects_other_dimensions() {
        let b = RealBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let d = Arc::new(LatticeDomain::from_box(&b, 0.5).unwrap());
        let u = LatticeFunction::zeros(d, 1);
        assert!(AffineInterpolant2d::new(&u).is_err());
    }

    #[test]
    fn truncation_fixed_points_and_kill_zone() {
        let d = grid(0.5, 1.0);
        let u = LatticeFunction::from_values(d.clone(), 1, vec![0.4, -0.9, 2.5, -3.0]).unwrap();
        let t = truncate_values(&u, 1.0).unwrap();
        assert_eq!(t.values()[0], 0.4); // |z| < L untouched
        assert_eq!(t.values()[1], -0.9);
        assert_eq!(t.values()[2], 0.0); // |z| > 2L killed
        assert_eq!(t.values()[3], 0.0);
        assert!(truncate_values(&u, 0.0).is_err());
    }

    #[test]
    fn truncation_midband_value() {
        // |z| = 1.5 L with L = 1, m = 2: factor (2L - |z|)/|z| = 1/3
        let d = grid(0.5, 0.4);
        let z = [1.5 * 0.6, 1.5 * 0.8]; // norm 1.5
        let u = LatticeFunction::from_values(d.clone(), 2, z.to_vec()).unwrap();
        let t = truncate_values(&u, 1.0).unwrap();
        assert!((t.values()[0] - z[0] / 3.0).abs() < 1e-14);
        assert!((t.values()[1] - z[1] / 3.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn truncation_is_1_lipschitz(
            a in proptest::collection::vec(-4.0f64..4.0, 2),
            b in proptest::collection::vec(-4.0f64..4.0, 2),
            level in 0.3f64..2.0,
        ) {
            let d = grid(0.5, 0.4);
            let ua = LatticeFunction::from_values(d.clone(), 2, a.clone()).unwrap();
            let ub = LatticeFunction::from_values(d.clone(), 2, b.clone()).unwrap();
            let ta = truncate_values(&ua, level).unwrap();
            let tb = truncate_values(&ub, level).unwrap();
            let dist = |x: &[f64], y: &[f64]| {
                x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
            };
            let before = dist(&a, &b);
            let after = dist(ta.values(), tb.values());
            prop_assert!(after <= before + 1e-12);
        }

        #[test]
        fn truncation_output_is_bounded(v in proptest::collection::vec(-10.0f64..10.0, 2), level in 0.2f64..3.0) {
            let d = grid(0.5, 0.4);
            let u = LatticeFunction::from_values(d.clone(), 2, v).unwrap();
            let t = truncate_values(&u, level).unwrap();
            let norm = t.values().iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(norm <= 2.0 * level + 1e-12);
        }
    }
}
