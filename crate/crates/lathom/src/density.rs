//! Pairwise interaction densities `f(xi, z) = c(xi) |z|^p` with the
//! structural assumptions used throughout: p-homogeneity in `z`, coordinate
//! coercivity, a summable upper-bound envelope, and a local Lipschitz
//! estimate (automatic here since every shipped density is convex in `z`).

use crate::error::{LathomError, Result};
use crate::lattice::offset_norm;
use crate::scalar::Scalar;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One interaction offset with its coefficient.
#[derive(Debug, Clone)]
pub struct OffsetCoeff<S> {
    pub offset: Vec<i64>,
    pub coeff: S,
}

/// The density family `f(xi, z) = c(xi) |z|^p` on offsets `0 < |xi| <= T`.
#[derive(Debug, Clone)]
pub struct InteractionDensity<S> {
    dim: usize,
    exponent: S,
    truncation: S,
    coeffs: Vec<OffsetCoeff<S>>,
}

/// Shipped coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum DensityFamily {
    /// `c = coeff` on the offsets `{ +-e_k }`, zero otherwise.
    NearestNeighbor {
        #[serde(default = "one")]
        coeff: f64,
    },
    /// `c(xi) = |xi|^(-s)` for `0 < |xi| <= T`; requires `s > d` so the
    /// envelope sum stays bounded as the truncation grows.
    PolyDecay { s: f64 },
}

fn one() -> f64 {
    1.0
}

/// Every integer offset with `0 < |xi| <= t`, lexicographically sorted.
pub fn offsets_in_ball(dim: usize, t: f64) -> Vec<Vec<i64>> {
    let r = t.floor() as i64;
    let mut out = Vec::new();
    let mut cursor = vec![-r; dim];
    loop {
        let norm2: i64 = cursor.iter().map(|&c| c * c).sum();
        if norm2 > 0 && (norm2 as f64) <= t * t {
            out.push(cursor.clone());
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cursor[k] += 1;
            if cursor[k] <= r {
                break;
            }
            cursor[k] = -r;
        }
    }
}

impl<S: Scalar> InteractionDensity<S> {
    /// Builds a power density from a coefficient list, validating the
    /// standing assumptions: `p > 1`, `T >= 2`, coercive coordinate
    /// directions, nonnegative coefficients, support inside `|xi| <= T`.
    pub fn power(dim: usize, exponent: S, truncation: S, coeffs: Vec<OffsetCoeff<S>>) -> Result<Self> {
        if !(exponent > S::one()) || !exponent.is_finite() {
            return Err(LathomError::InvalidParameter(format!(
                "exponent p must lie in (1, inf), got {exponent}"
            )));
        }
        if !(truncation >= S::from_f64(2.0)) {
            return Err(LathomError::InvalidParameter(format!(
                "truncation T must be >= 2, got {truncation}"
            )));
        }
        let t = truncation.to_f64_lossy();
        for oc in &coeffs {
            if oc.offset.len() != dim {
                return Err(LathomError::InvalidParameter(
                    "offset dimension mismatch".into(),
                ));
            }
            if oc.coeff < S::zero() {
                return Err(LathomError::InvalidParameter(
                    "coefficients must be nonnegative".into(),
                ));
            }
            let norm = offset_norm::<S>(&oc.offset).to_f64_lossy();
            if norm == 0.0 || norm > t {
                return Err(LathomError::InvalidParameter(format!(
                    "offset {:?} outside the support 0 < |xi| <= T",
                    oc.offset
                )));
            }
        }
        let density = Self::from_raw(dim, exponent, truncation, coeffs);
        for k in 0..dim {
            let mut e = vec![0i64; dim];
            e[k] = 1;
            if !(density.coefficient(&e) > S::zero()) {
                return Err(LathomError::InvalidParameter(format!(
                    "coordinate direction e_{} has zero coefficient (coercivity lost)",
                    k + 1
                )));
            }
        }
        Ok(density)
    }

    /// Unvalidated constructor; used by tests to inject assumption violations.
    pub fn from_raw(dim: usize, exponent: S, truncation: S, mut coeffs: Vec<OffsetCoeff<S>>) -> Self {
        coeffs.retain(|oc| oc.coeff != S::zero());
        coeffs.sort_by(|a, b| a.offset.cmp(&b.offset));
        Self {
            dim,
            exponent,
            truncation,
            coeffs,
        }
    }

    /// Builds a named family, truncated at `T`.
    pub fn from_family(dim: usize, family: &DensityFamily, exponent: S, truncation: S) -> Result<Self> {
        let coeffs = match family {
            DensityFamily::NearestNeighbor { coeff } => {
                if !(*coeff > 0.0) {
                    return Err(LathomError::InvalidParameter(
                        "nearest-neighbor coefficient must be positive".into(),
                    ));
                }
                let mut cs = Vec::new();
                for k in 0..dim {
                    for sign in [-1i64, 1] {
                        let mut off = vec![0i64; dim];
                        off[k] = sign;
                        cs.push(OffsetCoeff {
                            offset: off,
                            coeff: S::from_f64(*coeff),
                        });
                    }
                }
                cs
            }
            DensityFamily::PolyDecay { s } => {
                if !(*s > dim as f64) {
                    return Err(LathomError::InvalidParameter(format!(
                        "poly-decay needs s > d, got s = {s}, d = {dim}"
                    )));
                }
                offsets_in_ball(dim, truncation.to_f64_lossy())
                    .into_iter()
                    .map(|off| {
                        let norm = offset_norm::<f64>(&off);
                        OffsetCoeff {
                            offset: off,
                            coeff: S::from_f64(norm.powf(-s)),
                        }
                    })
                    .collect()
            }
        };
        Self::power(dim, exponent, truncation, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> S {
        self.exponent
    }

    pub fn truncation(&self) -> S {
        self.truncation
    }

    /// Supported offsets with their coefficients, lexicographically sorted.
    pub fn coeffs(&self) -> &[OffsetCoeff<S>] {
        &self.coeffs
    }

    pub fn coefficient(&self, xi: &[i64]) -> S {
        self.coeffs
            .binary_search_by(|oc| oc.offset.as_slice().cmp(xi))
            .map(|i| self.coeffs[i].coeff)
            .unwrap_or(S::zero())
    }

    /// `f(xi, z) = c(xi) |z|^p`.
    pub fn eval(&self, xi: &[i64], z: &[S]) -> S {
        let c = self.coefficient(xi);
        if c == S::zero() {
            return S::zero();
        }
        let s2: S = z.iter().map(|&v| v * v).sum();
        c * s2.powf(self.exponent / S::from_f64(2.0))
    }

    /// `grad_z f(xi, z) = p c(xi) |z|^(p-2) z`, zero at `z = 0`.
    pub fn grad(&self, xi: &[i64], z: &[S], out: &mut [S]) {
        let c = self.coefficient(xi);
        let s2: S = z.iter().map(|&v| v * v).sum();
        if c == S::zero() || s2 == S::zero() {
            out.fill(S::zero());
            return;
        }
        let factor = self.exponent * c * s2.powf((self.exponent - S::from_f64(2.0)) / S::from_f64(2.0));
        for (o, &v) in out.iter_mut().zip(z) {
            *o = factor * v;
        }
    }

    /// Coercivity bound on coordinate directions: `min_k c(e_k)` (over both
    /// orientations), so that `f(e_k, z) >= lambda0 |z|^p`.
    pub fn lambda0(&self) -> S {
        let mut best = S::infinity();
        for k in 0..self.dim {
            let mut e = vec![0i64; self.dim];
            e[k] = 1;
            best = best.min(self.coefficient(&e));
            e[k] = -1;
            best = best.min(self.coefficient(&e));
        }
        best
    }

    /// Envelope `M(xi) = sup_{|z|=1} f(xi, z) = c(xi)`.
    pub fn envelope(&self, xi: &[i64]) -> S {
        self.coefficient(xi)
    }

    /// `sum_xi M(xi)` over the support.
    pub fn envelope_sum(&self) -> S {
        crate::sum::pairwise(&self.coeffs.iter().map(|oc| oc.coeff).collect::<Vec<_>>())
    }

    /// The density restricted to `|xi| <= t`.
    pub fn truncated(&self, t: S) -> Self {
        let tt = t.to_f64_lossy();
        let coeffs = self
            .coeffs
            .iter()
            .filter(|oc| offset_norm::<f64>(&oc.offset) <= tt)
            .cloned()
            .collect();
        Self {
            dim: self.dim,
            exponent: self.exponent,
            truncation: t.min(self.truncation),
            coeffs,
        }
    }
}

/// Outcome of one randomized assumption check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// worst observed ratio for the check (see the per-check docs)
    pub worst: f64,
    pub violations: Vec<String>,
}

/// Report of [`validate_assumptions`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub samples: usize,
    pub homogeneity: CheckOutcome,
    pub coercivity: CheckOutcome,
    pub upper_bound: CheckOutcome,
    pub lipschitz: CheckOutcome,
    /// empirical constant for the Lipschitz estimate
    pub lipschitz_constant: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.homogeneity.passed
            && self.coercivity.passed
            && self.upper_bound.passed
            && self.lipschitz.passed
    }
}

const HOMOGENEITY_RTOL: f64 = 1e-10;

/// Randomized verification of the density assumptions over `samples` draws.
///
/// Violations are reported, not raised: injecting a broken density and
/// reading the report is the intended use in tests.
pub fn validate_assumptions<S: Scalar>(
    density: &InteractionDensity<S>,
    samples: usize,
    seed: u64,
) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = density.dim();
    let p = density.exponent().to_f64_lossy();
    let m = 2; // vector target exercises the radial structure
    let offsets = offsets_in_ball(d, density.truncation().to_f64_lossy());

    let mut homog = CheckOutcome {
        name: "homogeneity",
        passed: true,
        worst: 0.0,
        violations: vec![],
    };
    let mut coer = CheckOutcome {
        name: "coercivity",
        passed: true,
        worst: f64::INFINITY,
        violations: vec![],
    };
    let mut upper = CheckOutcome {
        name: "upper-bound",
        passed: true,
        worst: 0.0,
        violations: vec![],
    };
    let mut lip = CheckOutcome {
        name: "lipschitz",
        passed: true,
        worst: 0.0,
        violations: vec![],
    };

    let lambda0 = density.lambda0().to_f64_lossy();
    let draw_z = |rng: &mut ChaCha8Rng| -> Vec<S> {
        (0..m)
            .map(|_| S::from_f64(rng.gen_range(-2.0..2.0)))
            .collect()
    };

    for _ in 0..samples {
        let xi = &offsets[rng.gen_range(0..offsets.len())];
        let z = draw_z(&mut rng);
        let norm_z = z.iter().map(|&v| (v * v).to_f64_lossy()).sum::<f64>().sqrt();
        if norm_z < 1e-3 {
            continue;
        }
        let fz = density.eval(xi, &z).to_f64_lossy();

        // (H): f(xi, t z) = |t|^p f(xi, z)
        let t: f64 = rng.gen_range(-3.0..3.0);
        if t.abs() > 1e-3 {
            let tz: Vec<S> = z.iter().map(|&v| v * S::from_f64(t)).collect();
            let ftz = density.eval(xi, &tz).to_f64_lossy();
            let expected = t.abs().powf(p) * fz;
            let rel = (ftz - expected).abs() / expected.abs().max(1e-300);
            homog.worst = homog.worst.max(rel);
            if fz > 0.0 && rel > HOMOGENEITY_RTOL {
                homog.passed = false;
                if homog.violations.len() < 8 {
                    homog.violations.push(format!(
                        "xi={xi:?} t={t:.6} rel={rel:.3e}"
                    ));
                }
            }
        }

        // coordinate coercivity: f(e_k, z) >= lambda0 |z|^p with lambda0 > 0
        let k = rng.gen_range(0..d);
        let mut e = vec![0i64; d];
        e[k] = if rng.gen_bool(0.5) { 1 } else { -1 };
        let fe = density.eval(&e, &z).to_f64_lossy();
        let ratio = fe / norm_z.powf(p);
        coer.worst = coer.worst.min(ratio);
        if !(ratio > 0.0) || (lambda0 > 0.0 && ratio < lambda0 * (1.0 - 1e-9)) {
            coer.passed = false;
            if coer.violations.len() < 8 {
                coer.violations.push(format!("e={e:?} ratio={ratio:.3e}"));
            }
        }

        // upper bound: f(xi, z) <= M(xi) |z|^p
        let env = density.envelope(xi).to_f64_lossy();
        if env > 0.0 {
            let r = fz / (env * norm_z.powf(p));
            upper.worst = upper.worst.max(r);
            if r > 1.0 + 1e-9 {
                upper.passed = false;
                if upper.violations.len() < 8 {
                    upper.violations.push(format!("xi={xi:?} ratio={r:.3e}"));
                }
            }
        }

        // (L): |f(xi,z1) - f(xi,z2)| <= C M(xi) (|z1|^(p-1) + |z2|^(p-1)) |z1-z2|
        let w = draw_z(&mut rng);
        let norm_w = w.iter().map(|&v| (v * v).to_f64_lossy()).sum::<f64>().sqrt();
        let dist = z
            .iter()
            .zip(&w)
            .map(|(&a, &b)| ((a - b) * (a - b)).to_f64_lossy())
            .sum::<f64>()
            .sqrt();
        if env > 0.0 && dist > 1e-6 && norm_w > 1e-3 {
            let fw = density.eval(xi, &w).to_f64_lossy();
            let denom = env * (norm_z.powf(p - 1.0) + norm_w.powf(p - 1.0)) * dist;
            let q = (fz - fw).abs() / denom;
            lip.worst = lip.worst.max(q);
        }
    }
    if coer.worst == f64::INFINITY {
        coer.worst = 0.0;
        coer.passed = false;
    }
    // the empirical constant is reported; (L) fails only if the quotient is
    // unbounded, which shows up as non-finite
    lip.passed = lip.worst.is_finite();
    let lipschitz_constant = lip.worst;

    ValidationReport {
        samples,
        homogeneity: homog,
        coercivity: coer,
        upper_bound: upper,
        lipschitz: lip,
        lipschitz_constant,
    }
}
