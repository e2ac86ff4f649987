//! Fine-grid reference solves for the continuum limit functionals.
//!
//! The bulk term integrates `W(grad u)` with `W` the homogenized density of a
//! convex interaction family, `W(M) = sum_xi c(xi) |M xi / |xi||^p`, over a
//! grid of spacing `a` using forward differences. An optional zero-order term
//! adds `weight * phi(u)` with a p-homogeneous `phi` tabulated on the unit
//! sphere, and an optional forcing subtracts `a^d sum g . u`. The same
//! accelerated solver and smoothing continuation as the lattice problems
//! drive the minimization.

use crate::density::InteractionDensity;
use crate::energy::{RadialProfile, Smoothing};
use crate::error::{LathomError, Result};
use crate::lattice::{offset_norm, ConstraintSet, LatticeDomain, LatticeFunction};
use crate::scalar::Scalar;
use crate::solver::{
    run_continuation, Objective, SmoothableObjective, SolveOptions, StageTrace,
};
use crate::sum::{pairwise, sum_indexed};
use rayon::prelude::*;
use std::sync::Arc;

/// `W(M) = sum_xi c(xi) |M xi / |xi||^p` for an m x d matrix `M`.
///
/// For every convex interaction family this is the homogenized bulk density,
/// so the continuum functionals can be assembled directly from the lattice
/// density description.
#[derive(Debug, Clone)]
pub struct HomogenizedIntegrand<S> {
    /// unit directions `xi / |xi|` (d entries each) with coefficients
    directions: Vec<(Vec<S>, S)>,
    dim: usize,
    exponent: S,
}

impl<S: Scalar> HomogenizedIntegrand<S> {
    pub fn from_density(density: &InteractionDensity<S>) -> Self {
        let dim = density.dim();
        let directions = density
            .coeffs()
            .iter()
            .map(|oc| {
                let norm = offset_norm::<S>(&oc.offset);
                let dir: Vec<S> = oc
                    .offset
                    .iter()
                    .map(|&c| S::from_f64(c as f64) / norm)
                    .collect();
                (dir, oc.coeff)
            })
            .collect();
        Self {
            dim,
            directions,
            exponent: density.exponent(),
        }
    }

    pub fn exponent(&self) -> S {
        self.exponent
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `W(M)`; `matrix` is m x d row-major.
    pub fn eval(&self, matrix: &[S], m: usize) -> S {
        self.eval_profiled(matrix, m, &RadialProfile::new(self.exponent, Smoothing::Exact))
    }

    fn eval_profiled(&self, matrix: &[S], m: usize, profile: &RadialProfile<S>) -> S {
        let d = self.dim;
        let mut total = S::zero();
        for (dir, coeff) in &self.directions {
            let mut s2 = S::zero();
            for i in 0..m {
                let mut comp = S::zero();
                for k in 0..d {
                    comp += matrix[i * d + k] * dir[k];
                }
                s2 += comp * comp;
            }
            total += *coeff * profile.value(s2);
        }
        total
    }

    /// `dW/dM` accumulated into `out` (m x d row-major) with a prefactor.
    fn grad_profiled(
        &self,
        matrix: &[S],
        m: usize,
        profile: &RadialProfile<S>,
        prefactor: S,
        out: &mut [S],
    ) {
        let d = self.dim;
        for (dir, coeff) in &self.directions {
            let mut s2 = S::zero();
            let mut comps = [S::zero(); 4];
            debug_assert!(m <= 4, "target dimension too large for the scratch buffer");
            for i in 0..m {
                let mut comp = S::zero();
                for k in 0..d {
                    comp += matrix[i * d + k] * dir[k];
                }
                comps[i] = comp;
                s2 += comp * comp;
            }
            let f = *coeff * profile.grad_factor(s2) * prefactor;
            for i in 0..m {
                let fi = f * comps[i];
                for k in 0..d {
                    out[i * d + k] += fi * dir[k];
                }
            }
        }
    }

    /// The pointwise convex reference `sum_xi c(xi) |M xi / |xi||^p`.
    pub fn reference_value(&self, matrix: &[S], m: usize) -> S {
        self.eval(matrix, m)
    }
}

/// p-homogeneous zero-order density tabulated on the unit sphere.
///
/// For scalar targets two values suffice; for planar targets the table holds
/// equally spaced directions and evaluation interpolates linearly in angle.
#[derive(Debug, Clone)]
pub enum SphereTable<S> {
    Scalar { plus: S, minus: S },
    Planar { values: Vec<S> },
}

impl<S: Scalar> SphereTable<S> {
    pub fn isotropic(m: usize, value: S) -> Self {
        match m {
            1 => SphereTable::Scalar { plus: value, minus: value },
            2 => SphereTable::Planar { values: vec![value; 64] },
            _ => panic!("sphere tables cover m in {{1, 2}}"),
        }
    }

    /// Angular factor `phi(z / |z|)`.
    pub fn direction_value(&self, z: &[S]) -> S {
        match self {
            SphereTable::Scalar { plus, minus } => {
                if z[0] >= S::zero() {
                    *plus
                } else {
                    *minus
                }
            }
            SphereTable::Planar { values } => {
                let k = S::from_usize(values.len());
                let tau = S::from_f64(2.0) * S::PI();
                let mut theta = z[1].atan2(z[0]);
                if theta < S::zero() {
                    theta += tau;
                }
                let pos = theta / tau * k;
                let j = pos.floor().to_f64_lossy() as usize % values.len();
                let frac = pos - pos.floor();
                let a = values[j];
                let b = values[(j + 1) % values.len()];
                a + (b - a) * frac
            }
        }
    }
}

/// The zero-order capacitary term `weight * phi(u)`.
#[derive(Debug, Clone)]
pub struct ZeroOrderTerm<S> {
    pub table: SphereTable<S>,
    pub weight: S,
}

/// A continuum minimum problem on a fine grid.
pub struct ContinuumProblem<S> {
    pub domain: Arc<LatticeDomain<S>>,
    pub m: usize,
    pub integrand: HomogenizedIntegrand<S>,
    pub zero_order: Option<ZeroOrderTerm<S>>,
    /// full-length forcing values (`m` per site); the term subtracted is
    /// `a^d sum_x g(x) . u(x)`
    pub forcing: Option<Vec<S>>,
    pub constraints: ConstraintSet<S>,
}

struct ContinuumObjective<'a, S> {
    problem: &'a ContinuumProblem<S>,
    buffer: LatticeFunction<S>,
    free: &'a [usize],
    /// stencil base sites: all forward neighbors present
    stencils: Vec<bool>,
    profile: RadialProfile<S>,
    exponent: S,
    forward: Vec<Vec<i64>>,
}

impl<'a, S: Scalar> ContinuumObjective<'a, S> {
    fn new(problem: &'a ContinuumProblem<S>, free: &'a [usize]) -> Self {
        let domain = &problem.domain;
        let d = domain.dim();
        let forward: Vec<Vec<i64>> = (0..d)
            .map(|k| {
                let mut e = vec![0i64; d];
                e[k] = 1;
                e
            })
            .collect();
        let stencils = (0..domain.len())
            .map(|p| forward.iter().all(|e| domain.neighbor(p, e).is_some()))
            .collect();
        let mut buffer = LatticeFunction::zeros(domain.clone(), problem.m);
        problem.constraints.apply(&mut buffer);
        let exponent = problem.integrand.exponent();
        Self {
            problem,
            buffer,
            free,
            stencils,
            profile: RadialProfile::new(exponent, Smoothing::Exact),
            exponent,
            forward,
        }
    }

    fn load(&mut self, x: &[S]) {
        let m = self.problem.m;
        for (j, &p) in self.free.iter().enumerate() {
            self.buffer
                .value_mut(p)
                .copy_from_slice(&x[j * m..(j + 1) * m]);
        }
    }

    fn matrix_at(&self, p: usize, out: &mut [S]) {
        let domain = &self.problem.domain;
        let m = self.problem.m;
        let d = domain.dim();
        let inv = domain.spacing().recip();
        let values = self.buffer.values();
        let base = &values[p * m..(p + 1) * m];
        for (k, e) in self.forward.iter().enumerate() {
            let q = domain.neighbor(p, e).expect("stencil checked");
            let nb = &values[q * m..(q + 1) * m];
            for i in 0..m {
                out[i * d + k] = (nb[i] - base[i]) * inv;
            }
        }
    }

    fn zero_order_value(&self, z: &[S]) -> S {
        let Some(term) = &self.problem.zero_order else {
            return S::zero();
        };
        let s2: S = z.iter().map(|&v| v * v).sum();
        if s2 == S::zero() {
            return S::zero();
        }
        term.weight * self.profile.value(s2) * term.table.direction_value(z)
    }

    /// gradient of the zero-order term, accumulated with the cell volume
    fn zero_order_grad(&self, z: &[S], cell: S, g: &mut [S]) {
        let Some(term) = &self.problem.zero_order else {
            return;
        };
        let s2: S = z.iter().map(|&v| v * v).sum();
        if s2 == S::zero() {
            return;
        }
        // the angular factor is treated as locally constant; exact for
        // scalar targets away from the origin
        let f = term.weight * self.profile.grad_factor(s2) * term.table.direction_value(z) * cell;
        for (gi, &zi) in g.iter_mut().zip(z) {
            *gi += f * zi;
        }
    }

    fn total_value(&self) -> S {
        let domain = &self.problem.domain;
        let m = self.problem.m;
        let d = domain.dim();
        let cell = domain.cell_volume();
        let values = self.buffer.values();
        let n = domain.len();
        let bulk = sum_indexed(n, |p| {
            if !self.stencils[p] {
                return S::zero();
            }
            let mut mat = [S::zero(); 12];
            let mat = &mut mat[..m * d];
            self.matrix_at(p, mat);
            self.problem.integrand.eval_profiled(mat, m, &self.profile)
        });
        let zero = match &self.problem.zero_order {
            Some(_) => sum_indexed(n, |p| self.zero_order_value(&values[p * m..(p + 1) * m])),
            None => S::zero(),
        };
        let force = match &self.problem.forcing {
            Some(g) => sum_indexed(values.len(), |i| g[i] * values[i]),
            None => S::zero(),
        };
        cell * (bulk + zero - force)
    }
}

impl<'a, S: Scalar> Objective<S> for ContinuumObjective<'a, S> {
    fn dof_len(&self) -> usize {
        self.free.len() * self.problem.m
    }

    fn value(&mut self, x: &[S]) -> S {
        self.load(x);
        self.total_value()
    }

    fn value_and_grad(&mut self, x: &[S], grad: &mut [S]) -> S {
        self.load(x);
        let domain = &self.problem.domain;
        let m = self.problem.m;
        let d = domain.dim();
        let cell = domain.cell_volume();
        let inv = domain.spacing().recip();
        let values = self.buffer.values();

        grad.par_chunks_mut(m)
            .zip(self.free.par_iter())
            .for_each(|(g, &p)| {
                g.fill(S::zero());
                let mut gm = [S::zero(); 12];
                let gm = &mut gm[..m * d];
                let mut mat = [S::zero(); 12];
                let mat = &mut mat[..m * d];
                // own stencil: u(p) enters every column with weight -1/a
                if self.stencils[p] {
                    gm.fill(S::zero());
                    self.matrix_at(p, mat);
                    self.problem
                        .integrand
                        .grad_profiled(mat, m, &self.profile, cell, gm);
                    for i in 0..m {
                        for k in 0..d {
                            g[i] -= gm[i * d + k] * inv;
                        }
                    }
                }
                // neighbor stencils: u(p) is the forward value along e_k
                for (k, e) in self.forward.iter().enumerate() {
                    let back: Vec<i64> = e.iter().map(|&c| -c).collect();
                    let Some(q) = domain.neighbor(p, &back) else {
                        continue;
                    };
                    if !self.stencils[q] {
                        continue;
                    }
                    gm.fill(S::zero());
                    self.matrix_at(q, mat);
                    self.problem
                        .integrand
                        .grad_profiled(mat, m, &self.profile, cell, gm);
                    for i in 0..m {
                        g[i] += gm[i * d + k] * inv;
                    }
                }
                self.zero_order_grad(&values[p * m..(p + 1) * m], cell, g);
                if let Some(force) = &self.problem.forcing {
                    for i in 0..m {
                        g[i] -= cell * force[p * m + i];
                    }
                }
            });
        self.total_value()
    }
}

impl<'a, S: Scalar> SmoothableObjective<S> for ContinuumObjective<'a, S> {
    fn set_smoothing(&mut self, s: Smoothing<S>) {
        self.profile = RadialProfile::new(self.exponent, s);
    }
}

/// Result of a continuum reference solve.
#[derive(Debug, Clone)]
pub struct ContinuumSolution<S> {
    pub minimizer: LatticeFunction<S>,
    pub value: S,
    pub iterations: usize,
    pub grad_norm: S,
    pub trace: Vec<StageTrace<S>>,
}

/// Minimizes a continuum problem on its grid.
pub fn minimize_continuum<S: Scalar>(
    problem: &ContinuumProblem<S>,
    init: Option<&LatticeFunction<S>>,
    opts: &SolveOptions<S>,
) -> Result<ContinuumSolution<S>> {
    opts.validate()?;
    let m = problem.m;
    let free = problem.constraints.free_sites(&problem.domain);
    let mut x0 = vec![S::zero(); free.len() * m];
    if let Some(u0) = init {
        for (j, &p) in free.iter().enumerate() {
            x0[j * m..(j + 1) * m].copy_from_slice(u0.value(p));
        }
    }
    let mut obj = ContinuumObjective::new(problem, &free);
    let outcome = run_continuation(&mut obj, x0, problem.integrand.exponent(), opts, None);
    obj.set_smoothing(Smoothing::Exact);
    let value = obj.value(&outcome.x);
    obj.load(&outcome.x);
    let minimizer = obj.buffer.clone();
    if !outcome.converged {
        return Err(LathomError::NotConverged(format!(
            "continuum solve stalled at gradient norm {:.3e}",
            outcome.grad_norm.to_f64_lossy()
        )));
    }
    Ok(ContinuumSolution {
        minimizer,
        value,
        iterations: outcome.iterations,
        grad_norm: outcome.grad_norm,
        trace: outcome.trace,
    })
}
