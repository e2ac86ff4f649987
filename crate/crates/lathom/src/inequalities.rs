//! Harness for the discrete functional inequalities: the Sobolev-type bound
//! for compactly supported lattice functions, the mean-deviation bound and
//! its rescaled variant, and the control of long-range difference quotients
//! by nearest-neighbor ones on shrunken interiors.
//!
//! Each check samples a family of lattice functions, computes both sides,
//! and reports ratio statistics. A harness cannot assert the existence of
//! scale-independent constants, so the pass criteria are finiteness,
//! degenerate consistency (vanishing right side forces vanishing left side),
//! and bounded drift of the worst ratio across scale refinement.

use crate::energy::nn_p_energy;
use crate::error::{LathomError, Result};
use crate::geometry::RealBox;
use crate::lattice::{offset_norm, LatticeDomain, LatticeFunction};
use crate::scalar::Scalar;
use crate::sum::sum_indexed;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One evaluated sample of an inequality.
#[derive(Debug, Clone)]
pub struct RatioRow<S> {
    pub sample: String,
    pub lhs: S,
    pub rhs: S,
    /// `lhs / rhs`, skipped (None) for degenerate `0 / 0` samples
    pub ratio: Option<S>,
}

/// Ratio statistics for one inequality at one scale.
#[derive(Debug, Clone)]
pub struct InequalityReport<S> {
    pub name: String,
    pub scale: S,
    pub rows: Vec<RatioRow<S>>,
    pub worst_ratio: S,
    /// every sample with vanishing right side also had vanishing left side
    pub degenerate_consistent: bool,
}

impl<S: Scalar> InequalityReport<S> {
    fn from_rows(name: String, scale: S, rows: Vec<RatioRow<S>>) -> Self {
        let worst_ratio = rows
            .iter()
            .filter_map(|r| r.ratio)
            .fold(S::zero(), S::max);
        let degenerate_consistent = rows
            .iter()
            .all(|r| r.rhs != S::zero() || r.lhs == S::zero());
        Self {
            name,
            scale,
            rows,
            worst_ratio,
            degenerate_consistent,
        }
    }

    pub fn passed(&self) -> bool {
        self.worst_ratio.is_finite() && self.degenerate_consistent
    }
}

/// Drift of the worst ratio across successive scale refinements.
pub fn worst_ratio_drift<S: Scalar>(reports: &[InequalityReport<S>]) -> S {
    let mut drift = S::zero();
    for w in reports.windows(2) {
        let (a, b) = (w[0].worst_ratio, w[1].worst_ratio);
        if a > S::zero() {
            drift = drift.max((b - a).abs() / a);
        }
    }
    drift
}

/// The sample families stressed by the harnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFamily {
    /// one unit value on a single interior cell, zero elsewhere
    SingleBump,
    /// a fixed smooth compactly supported profile sampled on the lattice
    SmoothBump,
    /// seeded i.i.d. values on an inner box, zero on the margin
    RandomField,
}

fn smooth_profile<S: Scalar>(x: &[S]) -> S {
    // C^1 bump supported on [0,1]^d
    let mut v = S::one();
    for &xi in x {
        let t = xi.to_f64_lossy();
        if !(0.0..=1.0).contains(&t) {
            return S::zero();
        }
        let c = (std::f64::consts::PI * (t - 0.5)).cos();
        v *= S::from_f64(c * c);
    }
    v
}

/// Builds a compactly supported sample on a padded domain. The support sits
/// in `[0,1)^d`; the domain pads it with `margin` cells of zeros so that all
/// interactions reaching outside the support are present.
fn build_sample<S: Scalar>(
    family: SampleFamily,
    d: usize,
    m: usize,
    eps: S,
    margin: i64,
    seed: u64,
) -> Result<LatticeFunction<S>> {
    let pad = S::from_f64(margin as f64) * eps;
    let lo = vec![-pad; d];
    let hi = vec![S::one() + pad; d];
    let bx = RealBox::new(lo, hi)?;
    let domain = Arc::new(LatticeDomain::from_box(&bx, eps)?);
    let n_inner = (S::one() / eps).round().to_f64_lossy() as i64;
    let inside = |site: &[i64]| site.iter().all(|&i| i >= 0 && i < n_inner);

    let mut u = LatticeFunction::zeros(domain.clone(), m);
    match family {
        SampleFamily::SingleBump => {
            let center = vec![n_inner / 2; d];
            let p = domain
                .position(&center)
                .ok_or_else(|| LathomError::InvalidParameter("bump center missing".into()))?;
            u.value_mut(p)[0] = S::one();
        }
        SampleFamily::SmoothBump => {
            let mut x = vec![S::zero(); d];
            for p in 0..domain.len() {
                if inside(domain.site(p)) {
                    domain.coords_into(p, &mut x);
                    u.value_mut(p)[0] = smooth_profile(&x);
                }
            }
        }
        SampleFamily::RandomField => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for p in 0..domain.len() {
                if inside(domain.site(p)) {
                    for v in u.value_mut(p) {
                        *v = S::from_f64(rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
    }
    Ok(u)
}

/// `(int |u|^{p*})^{p/p*}` of the piecewise-constant interpolation.
fn lhs_sobolev<S: Scalar>(u: &LatticeFunction<S>, p: S, p_star: S) -> S {
    let cell = u.domain().cell_volume();
    let total = sum_indexed(u.domain().len(), |pos| {
        let v = u.value(pos);
        let s2: S = v.iter().map(|&x| x * x).sum();
        cell * s2.powf(p_star / S::from_f64(2.0))
    });
    total.powf(p / p_star)
}

/// Sobolev-type check for compactly supported lattice functions:
/// `(int |u|^{p*})^{p/p*} <= C * (nearest-neighbor p-energy)`,
/// with `p* = p d / (d - p)`, run over every requested scale.
pub fn gns_check<S: Scalar>(
    d: usize,
    p: S,
    eps_list: &[S],
    families: &[SampleFamily],
    seed: u64,
) -> Result<Vec<InequalityReport<S>>> {
    if !(p >= S::one()) || !(p < S::from_usize(d)) {
        return Err(LathomError::InvalidParameter(format!(
            "Sobolev check needs 1 <= p < d, got p = {p}, d = {d}"
        )));
    }
    let p_star = p * S::from_usize(d) / (S::from_usize(d) - p);
    let mut out = Vec::new();
    for &eps in eps_list {
        let mut rows = Vec::new();
        for (fi, family) in families.iter().enumerate() {
            let u = build_sample(*family, d, 1, eps, 2, seed + fi as u64)?;
            let lhs = lhs_sobolev(&u, p, p_star);
            let rhs = nn_p_energy(&u, p, None);
            let ratio = if rhs == S::zero() { None } else { Some(lhs / rhs) };
            rows.push(RatioRow {
                sample: format!("{family:?}"),
                lhs,
                rhs,
                ratio,
            });
        }
        out.push(InequalityReport::from_rows(
            "sobolev".into(),
            eps,
            rows,
        ));
    }
    Ok(out)
}

/// The exact single-bump ratio of the Sobolev check: `1 / (2d)` at every
/// scale (`lhs = eps^{d-p}`, `rhs = 2 d eps^{d-p}`).
pub fn gns_single_bump_ratio<S: Scalar>(d: usize) -> S {
    (S::from_f64(2.0) * S::from_usize(d)).recip()
}

/// Mean-deviation check `sum eps^d |u - mean|^p <= C * (nn p-energy)` on a
/// box domain, with the mean over the whole domain or over a sub-box.
pub fn poincare_check<S: Scalar>(
    domain_box: &RealBox<S>,
    eps: S,
    p: S,
    subset: Option<&RealBox<S>>,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport<S>> {
    let d = domain_box.dim();
    let domain = Arc::new(LatticeDomain::from_box(domain_box, eps)?);
    let m = 1usize;
    let cell = domain.cell_volume();

    // subset site positions for the mean
    let mean_sites: Vec<usize> = match subset {
        None => (0..domain.len()).collect(),
        Some(e) => {
            let mut x = vec![S::zero(); d];
            let sites: Vec<usize> = (0..domain.len())
                .filter(|&q| {
                    domain.coords_into(q, &mut x);
                    e.contains(&x)
                })
                .collect();
            if sites.is_empty() {
                return Err(LathomError::InvalidParameter(
                    "mean subset holds no lattice sites".into(),
                ));
            }
            sites
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for si in 0..samples {
        let u = match si {
            0 => LatticeFunction::from_fn(domain.clone(), m, |_, out| out[0] = S::from_f64(2.5)),
            1 => LatticeFunction::from_fn(domain.clone(), m, |x, out| out[0] = x[0]),
            _ => {
                let vals: Vec<S> = (0..domain.len())
                    .map(|_| S::from_f64(rng.gen_range(-1.0..1.0)))
                    .collect();
                LatticeFunction::from_values(domain.clone(), m, vals)?
            }
        };
        let mean = sum_indexed(mean_sites.len(), |j| u.value(mean_sites[j])[0])
            / S::from_usize(mean_sites.len());
        let lhs = sum_indexed(domain.len(), |q| {
            let dv = (u.value(q)[0] - mean).abs();
            cell * dv.powf(p)
        });
        let rhs = nn_p_energy(&u, p, None);
        let ratio = if rhs == S::zero() { None } else { Some(lhs / rhs) };
        rows.push(RatioRow {
            sample: match si {
                0 => "constant".into(),
                1 => "linear".into(),
                _ => format!("random-{si}"),
            },
            lhs,
            rhs,
            ratio,
        });
    }
    Ok(InequalityReport::from_rows(
        match subset {
            None => "mean-deviation".into(),
            Some(_) => "mean-deviation-subset".into(),
        },
        eps,
        rows,
    ))
}

/// Rescaled mean-deviation sweep: a fixed profile is carried onto `delta *
/// [0,1)^d` with `eps = delta * eps_hat`, and the empirical constant
/// `lhs / (nn quotient sum)` is fitted against `delta^p`. Returns the fitted
/// exponent and the per-delta constants.
pub fn poincare_rescaled_sweep<S: Scalar>(
    d: usize,
    p: S,
    eps_hat: S,
    deltas: &[S],
    seed: u64,
) -> Result<(S, Vec<(S, S)>)> {
    if deltas.len() < 2 {
        return Err(LathomError::InvalidParameter(
            "rescaled sweep needs at least two scales".into(),
        ));
    }
    let mut rows = Vec::new();
    for &delta in deltas {
        let eps = delta * eps_hat;
        let lo = vec![S::zero(); d];
        let hi = vec![delta; d];
        let bx = RealBox::new(lo, hi)?;
        let domain = Arc::new(LatticeDomain::from_box(&bx, eps)?);
        // fixed profile carried by rescaling: u(x) = profile(x / delta)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let _ = &mut rng;
        let u = LatticeFunction::from_fn(domain.clone(), 1, |x, out| {
            let xs: Vec<S> = x.iter().map(|&v| v / delta).collect();
            out[0] = smooth_profile(&xs) + xs[0];
        });
        let cell = domain.cell_volume();
        let mean = sum_indexed(domain.len(), |q| u.value(q)[0]) / S::from_usize(domain.len());
        let lhs = sum_indexed(domain.len(), |q| {
            cell * (u.value(q)[0] - mean).abs().powf(p)
        });
        // plain quotient sum (unit offsets, difference over eps)
        let rhs = nn_p_energy(&u, p, None);
        if rhs == S::zero() {
            return Err(LathomError::InvalidParameter(
                "degenerate rescaled profile".into(),
            ));
        }
        rows.push((delta, lhs / rhs));
    }
    // fit log(constant) = q log(delta) + c by least squares
    let n = S::from_usize(rows.len());
    let (mut sx, mut sy, mut sxx, mut sxy) = (S::zero(), S::zero(), S::zero(), S::zero());
    for &(delta, c) in &rows {
        let x = delta.ln();
        let y = c.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok((exponent, rows))
}

/// Long-range control: for each offset `xi`,
/// `sum_{interior pairs} |D^xi u|^p <= C sum_k sum |D^{e_k} u|^p`,
/// where the interior drops everything within `2 sqrt(d) eps` of the
/// boundary of the region.
pub fn long_range_check<S: Scalar>(
    domain_box: &RealBox<S>,
    eps: S,
    p: S,
    offsets: &[Vec<i64>],
    families: &[SampleFamily],
    seed: u64,
) -> Result<Vec<InequalityReport<S>>> {
    let d = domain_box.dim();
    let domain = Arc::new(LatticeDomain::from_box(domain_box, eps)?);
    let shrink = S::from_f64(2.0) * S::from_usize(d).sqrt() * eps;

    // interior sites: dist(x, boundary) > 2 sqrt(d) eps
    let mut x = vec![S::zero(); d];
    let interior: Vec<bool> = (0..domain.len())
        .map(|q| {
            domain.coords_into(q, &mut x);
            domain_box.distance_to_boundary(&x) > shrink
        })
        .collect();

    let mut out = Vec::new();
    for xi in offsets {
        let norm = offset_norm::<S>(xi);
        let inv = (eps * norm).recip();
        let mut rows = Vec::new();
        for (fi, family) in families.iter().enumerate() {
            let u = match family {
                SampleFamily::RandomField => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed + fi as u64);
                    let vals: Vec<S> = (0..domain.len())
                        .map(|_| S::from_f64(rng.gen_range(-1.0..1.0)))
                        .collect();
                    LatticeFunction::from_values(domain.clone(), 1, vals)?
                }
                SampleFamily::SmoothBump => LatticeFunction::from_fn(domain.clone(), 1, |x, out| {
                    out[0] = smooth_profile(x)
                }),
                SampleFamily::SingleBump => {
                    let mut u = LatticeFunction::zeros(domain.clone(), 1);
                    if let Some(q) = (0..domain.len()).find(|&q| interior[q]) {
                        u.value_mut(q)[0] = S::one();
                    }
                    u
                }
            };
            let lhs = sum_indexed(domain.len(), |q| {
                if !interior[q] {
                    return S::zero();
                }
                let Some(nb) = domain.neighbor(q, xi) else {
                    return S::zero();
                };
                if !interior[nb] {
                    return S::zero();
                }
                let dv = (u.value(nb)[0] - u.value(q)[0]).abs() * inv;
                dv.powf(p)
            });
            let rhs = {
                let einv = eps.recip();
                let mut acc = S::zero();
                for k in 0..d {
                    let mut e = vec![0i64; d];
                    e[k] = 1;
                    acc += sum_indexed(domain.len(), |q| {
                        let Some(nb) = domain.neighbor(q, &e) else {
                            return S::zero();
                        };
                        let dv = (u.value(nb)[0] - u.value(q)[0]).abs() * einv;
                        dv.powf(p)
                    });
                }
                acc
            };
            let ratio = if rhs == S::zero() { None } else { Some(lhs / rhs) };
            rows.push(RatioRow {
                sample: format!("{family:?}"),
                lhs,
                rhs,
                ratio,
            });
        }
        out.push(InequalityReport::from_rows(
            format!("long-range{xi:?}"),
            eps,
            rows,
        ));
    }
    Ok(out)
}
