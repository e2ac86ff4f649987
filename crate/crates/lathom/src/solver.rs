//! Constrained minimization of the discrete energies.
//!
//! The constraints are affine pins, so projection is reassignment of the
//! pinned values and the solver works on the free components only. The method
//! is an accelerated gradient (FISTA with function-value restart) with a
//! Barzilai-Borwein step estimate refined by backtracking. For `p < 2` the
//! radial profile `|z|^p` is smoothed to `(|z|^2 + kappa^2)^(p/2) - kappa^p`
//! and driven through a decreasing `kappa` continuation; convergence is
//! declared at the final smoothing level and the reported value is
//! re-evaluated with the exact density.

use crate::energy::{energy_total, gradient_for_sites, partial_sums, EnergySpec, Smoothing};
use crate::error::{LathomError, Result};
use crate::lattice::{ConstraintSet, LatticeFunction};
use crate::scalar::Scalar;
use crate::sum::{pairwise, sum_indexed};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct SolveOptions<S> {
    /// Convergence threshold on the max-norm of the free gradient, scaled by
    /// `1 + |E|` at the current iterate.
    pub grad_tol: S,
    /// Iteration cap per continuation stage.
    pub max_iterations: usize,
    /// First smoothing level of the continuation (`p < 2` only).
    pub kappa_init: S,
    /// Final smoothing level; convergence is judged here.
    pub kappa_final: S,
    /// Geometric decrease factor between levels.
    pub kappa_factor: S,
    /// Solve the `p = 2` analog first and warm-start from it when `p != 2`.
    pub warm_start_p2: bool,
    /// Seed for the random initialization strategy.
    pub seed: u64,
    /// Amplitude of the random initialization; zero initialization otherwise.
    pub random_init: Option<S>,
    /// Per-iteration CSV log (iteration, kappa, energy, grad_norm).
    pub log_path: Option<PathBuf>,
}

impl<S: Scalar> Default for SolveOptions<S> {
    fn default() -> Self {
        Self {
            grad_tol: S::from_f64(1e-8),
            max_iterations: 50_000,
            kappa_init: S::from_f64(1e-1),
            kappa_final: S::from_f64(1e-8),
            kappa_factor: S::from_f64(10.0),
            warm_start_p2: true,
            seed: 0,
            random_init: None,
            log_path: None,
        }
    }
}

impl<S: Scalar> SolveOptions<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > S::zero()) {
            return Err(LathomError::InvalidParameter("grad_tol must be positive".into()));
        }
        if !(self.kappa_factor > S::one()) || !(self.kappa_init > self.kappa_final) {
            return Err(LathomError::InvalidParameter(
                "kappa schedule must decrease strictly".into(),
            ));
        }
        if !(self.kappa_final < S::from_f64(1e-6)) {
            return Err(LathomError::InvalidParameter(
                "final smoothing level must fall below 1e-6".into(),
            ));
        }
        Ok(())
    }

    fn kappa_list(&self, p: S) -> Vec<Smoothing<S>> {
        if p >= S::from_f64(2.0) {
            return vec![Smoothing::Exact];
        }
        let mut list = Vec::new();
        let mut k = self.kappa_init;
        while k > self.kappa_final {
            list.push(Smoothing::Huberized(k));
            k = k / self.kappa_factor;
        }
        list.push(Smoothing::Huberized(self.kappa_final));
        list
    }
}

/// One continuation stage of a finished solve.
#[derive(Debug, Clone)]
pub struct StageTrace<S> {
    pub kappa: Option<S>,
    pub iterations: usize,
    pub value: S,
    pub grad_norm: S,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct MinimizationResult<S> {
    pub minimizer: LatticeFunction<S>,
    /// Objective at the minimizer with the exact (unsmoothed) density,
    /// including the linear forcing term when one was given.
    pub value: S,
    /// Pure interaction energy at the minimizer (exact density).
    pub energy: S,
    pub iterations: usize,
    pub final_grad_norm: S,
    pub trace: Vec<StageTrace<S>>,
}

#[derive(Debug)]
pub struct SolveFailure<S> {
    pub best: MinimizationResult<S>,
    pub message: String,
}

impl<S: Scalar> From<SolveFailure<S>> for LathomError {
    fn from(f: SolveFailure<S>) -> Self {
        LathomError::NotConverged(f.message)
    }
}

/// Objective over a flat vector of free degrees of freedom.
pub(crate) trait Objective<S> {
    fn dof_len(&self) -> usize;
    fn value(&mut self, x: &[S]) -> S;
    /// Returns the value and fills the gradient.
    fn value_and_grad(&mut self, x: &[S], grad: &mut [S]) -> S;
}

/// Objective whose radial profile can be smoothed for the continuation.
pub(crate) trait SmoothableObjective<S>: Objective<S> {
    fn set_smoothing(&mut self, s: Smoothing<S>);
}

/// Discrete pairwise energy (optionally smoothed) minus a linear forcing.
pub(crate) struct LatticeObjective<'a, S> {
    spec: &'a EnergySpec<S>,
    buffer: LatticeFunction<S>,
    free: &'a [usize],
    m: usize,
    smoothing: Smoothing<S>,
    /// per-site forcing, full length (`m` per site), already premultiplied
    /// by nothing; the linear term subtracted is `eps^d sum_alpha g . u`.
    forcing: Option<&'a [S]>,
}

impl<'a, S: Scalar> LatticeObjective<'a, S> {
    pub(crate) fn new(
        spec: &'a EnergySpec<S>,
        constraints: &ConstraintSet<S>,
        free: &'a [usize],
        m: usize,
        forcing: Option<&'a [S]>,
    ) -> Self {
        let mut buffer = LatticeFunction::zeros(spec.domain().clone(), m);
        constraints.apply(&mut buffer);
        Self {
            spec,
            buffer,
            free,
            m,
            smoothing: Smoothing::Exact,
            forcing,
        }
    }

    pub(crate) fn set_smoothing(&mut self, s: Smoothing<S>) {
        self.smoothing = s;
    }

    fn load(&mut self, x: &[S]) {
        let m = self.m;
        for (j, &p) in self.free.iter().enumerate() {
            self.buffer
                .value_mut(p)
                .copy_from_slice(&x[j * m..(j + 1) * m]);
        }
    }

    fn forcing_term(&self) -> S {
        match self.forcing {
            None => S::zero(),
            Some(g) => {
                let vals = self.buffer.values();
                let cell = self.buffer.domain().cell_volume();
                cell * sum_indexed(vals.len(), |i| g[i] * vals[i])
            }
        }
    }

    pub(crate) fn snapshot(&mut self, x: &[S]) -> LatticeFunction<S> {
        self.load(x);
        self.buffer.clone()
    }
}

impl<'a, S: Scalar> SmoothableObjective<S> for LatticeObjective<'a, S> {
    fn set_smoothing(&mut self, s: Smoothing<S>) {
        LatticeObjective::set_smoothing(self, s);
    }
}

impl<'a, S: Scalar> Objective<S> for LatticeObjective<'a, S> {
    fn dof_len(&self) -> usize {
        self.free.len() * self.m
    }

    fn value(&mut self, x: &[S]) -> S {
        self.load(x);
        let partials = partial_sums(self.spec, &self.buffer, self.smoothing);
        pairwise(&partials) - self.forcing_term()
    }

    fn value_and_grad(&mut self, x: &[S], grad: &mut [S]) -> S {
        self.load(x);
        let partials = partial_sums(self.spec, &self.buffer, self.smoothing);
        gradient_for_sites(self.spec, &self.buffer, self.free, self.smoothing, grad);
        if let Some(g) = self.forcing {
            let cell = self.buffer.domain().cell_volume();
            let m = self.m;
            for (j, &p) in self.free.iter().enumerate() {
                for i in 0..m {
                    grad[j * m + i] -= cell * g[p * m + i];
                }
            }
        }
        pairwise(&partials) - self.forcing_term()
    }
}

fn inf_norm<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |a, &b| a.max(b.abs()))
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    sum_indexed(a.len(), |i| a[i] * b[i])
}

pub(crate) struct StageOutcome<S> {
    pub x: Vec<S>,
    pub value: S,
    pub grad_norm: S,
    pub iterations: usize,
    pub converged: bool,
}

/// FISTA with restart and BB/backtracking step control on one objective.
pub(crate) fn fista_stage<S: Scalar, O: Objective<S>>(
    obj: &mut O,
    x0: Vec<S>,
    grad_tol: S,
    max_iterations: usize,
    mut log: Option<(&mut dyn Write, f64)>,
) -> StageOutcome<S> {
    let n = x0.len();
    if n == 0 {
        let value = obj.value(&x0);
        return StageOutcome {
            x: x0,
            value,
            grad_norm: S::zero(),
            iterations: 0,
            converged: true,
        };
    }

    let mut x = x0;
    let mut e_x = obj.value(&x);
    let mut y = x.clone();
    let mut g = vec![S::zero(); n];
    let mut t = S::one();
    let mut step_l = S::from_f64(1.0);
    let mut prev_y: Option<Vec<S>> = None;
    let mut prev_g: Option<Vec<S>> = None;
    let mut x_prev = x.clone();
    let half = S::from_f64(0.5);
    let four = S::from_f64(4.0);
    let mut converged = false;
    let mut grad_norm = S::infinity();
    let mut iterations = 0;

    // value comparisons are meaningful only above the rounding floor of the
    // assembled energy; below it the gradient alone drives acceptance
    let noise = |e: S| S::epsilon() * S::from_f64(64.0) * (S::one() + e.abs());

    for iter in 0..max_iterations {
        iterations = iter + 1;
        let e_y = obj.value_and_grad(&y, &mut g);
        grad_norm = inf_norm(&g);
        if grad_norm <= grad_tol * (S::one() + e_y.abs()) {
            x = y;
            e_x = e_y;
            converged = true;
            if let Some((w, kappa)) = log.as_mut() {
                let _ = writeln!(w, "{},{},{},{}", iter, kappa, e_x, grad_norm);
            }
            break;
        }

        // BB estimate of the local curvature to seed the step
        if let (Some(py), Some(pg)) = (&prev_y, &prev_g) {
            let dx: Vec<S> = y.iter().zip(py).map(|(&a, &b)| a - b).collect();
            let dg: Vec<S> = g.iter().zip(pg).map(|(&a, &b)| a - b).collect();
            let num = dot(&dg, &dx);
            let den = dot(&dx, &dx);
            if num > S::zero() && den > S::zero() {
                step_l = num / den;
            }
        }
        prev_y = Some(y.clone());
        prev_g = Some(g.clone());

        // backtracking on the quadratic upper model of the gradient step
        let g2 = dot(&g, &g);
        let mut candidate = vec![S::zero(); n];
        let mut e_c;
        let mut backtracks = 0;
        loop {
            let inv_l = step_l.recip();
            for i in 0..n {
                candidate[i] = y[i] - g[i] * inv_l;
            }
            e_c = obj.value(&candidate);
            let model = e_y - half * g2 * inv_l;
            if e_c <= model + noise(e_y) {
                break;
            }
            step_l = step_l * S::from_f64(2.0);
            backtracks += 1;
            if backtracks > 120 {
                break;
            }
        }

        if e_c > e_x + noise(e_x) {
            // the accelerated step overshot: drop momentum and retry from x
            y = x.clone();
            t = S::one();
            prev_y = None;
            prev_g = None;
            if let Some((w, kappa)) = log.as_mut() {
                let _ = writeln!(w, "{},{},{},{}", iter, kappa, e_x, grad_norm);
            }
            continue;
        }

        // gradient-based momentum restart
        let mut restart = S::zero();
        for i in 0..n {
            restart += g[i] * (candidate[i] - x[i]);
        }
        if restart > S::zero() {
            t = S::one();
        }

        x_prev.copy_from_slice(&x);
        x.copy_from_slice(&candidate);
        e_x = e_c.min(e_x);
        let t_next = (S::one() + (S::one() + four * t * t).sqrt()) * half;
        let beta = (t - S::one()) / t_next;
        for i in 0..n {
            y[i] = x[i] + beta * (x[i] - x_prev[i]);
        }
        t = t_next;
        if let Some((w, kappa)) = log.as_mut() {
            let _ = writeln!(w, "{},{},{},{}", iter, kappa, e_x, grad_norm);
        }
    }

    StageOutcome {
        x,
        value: e_x,
        grad_norm,
        iterations,
        converged,
    }
}

pub(crate) struct ContinuationOutcome<S> {
    pub x: Vec<S>,
    pub trace: Vec<StageTrace<S>>,
    pub iterations: usize,
    pub value: S,
    pub grad_norm: S,
    pub converged: bool,
}

/// Runs the `kappa` continuation of a smoothable objective. Intermediate
/// stages only warm up the final level, so they run at a loose tolerance and
/// are not required to converge; the final level is.
pub(crate) fn run_continuation<S: Scalar, O: SmoothableObjective<S>>(
    obj: &mut O,
    x0: Vec<S>,
    p: S,
    opts: &SolveOptions<S>,
    mut log_file: Option<&mut std::fs::File>,
) -> ContinuationOutcome<S> {
    let stages = opts.kappa_list(p);
    let last = stages.len() - 1;
    let mut x = x0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut final_outcome: Option<StageOutcome<S>> = None;
    for (si, stage) in stages.iter().enumerate() {
        obj.set_smoothing(*stage);
        let tol = if si == last {
            opts.grad_tol
        } else {
            opts.grad_tol * S::from_f64(30.0)
        };
        let kappa_f64 = match stage {
            Smoothing::Exact => f64::NAN,
            Smoothing::Huberized(k) => k.to_f64_lossy(),
        };
        let out = fista_stage(
            obj,
            x,
            tol,
            opts.max_iterations,
            log_file.as_mut().map(|f| (f as &mut dyn Write, kappa_f64)),
        );
        iterations += out.iterations;
        trace.push(StageTrace {
            kappa: match stage {
                Smoothing::Exact => None,
                Smoothing::Huberized(k) => Some(*k),
            },
            iterations: out.iterations,
            value: out.value,
            grad_norm: out.grad_norm,
            converged: out.converged,
        });
        x = out.x.clone();
        if si == last {
            final_outcome = Some(out);
        }
    }
    let out = final_outcome.expect("at least one stage runs");
    ContinuationOutcome {
        x,
        trace,
        iterations,
        value: out.value,
        grad_norm: out.grad_norm,
        converged: out.converged,
    }
}

/// Minimizes the energy of `spec` subject to pinned values.
///
/// `forcing` subtracts the linear term `eps^d sum_alpha g(alpha) . u(alpha)`
/// from the objective; `init` seeds the free components (pins always win).
pub fn minimize_with<S: Scalar>(
    spec: &EnergySpec<S>,
    constraints: &ConstraintSet<S>,
    forcing: Option<&LatticeFunction<S>>,
    init: Option<&LatticeFunction<S>>,
    opts: &SolveOptions<S>,
) -> std::result::Result<MinimizationResult<S>, SolveFailure<S>> {
    opts.validate().expect("invalid solve options");
    let m = constraints.components();
    let domain = spec.domain();
    let free = constraints.free_sites(domain);
    let p = spec.density().exponent();
    let two = S::from_f64(2.0);

    let forcing_values = forcing.map(|f| {
        assert_eq!(f.components(), m, "forcing component mismatch");
        f.values()
    });

    // initial free vector
    let mut x0 = vec![S::zero(); free.len() * m];
    if let Some(u0) = init {
        for (j, &psite) in free.iter().enumerate() {
            x0[j * m..(j + 1) * m].copy_from_slice(u0.value(psite));
        }
    } else if let Some(amp) = opts.random_init {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for v in &mut x0 {
            *v = amp * S::from_f64(rng.gen_range(-1.0..1.0));
        }
    }

    let mut log_file = match &opts.log_path {
        Some(path) => {
            let mut f = std::fs::File::create(path).expect("cannot create solver log");
            let _ = writeln!(f, "iteration,kappa,energy,grad_norm");
            Some(f)
        }
        None => None,
    };

    let mut trace = Vec::new();
    let mut total_iterations = 0;

    // warm start: quadratic analog first
    if p != two && opts.warm_start_p2 && init.is_none() {
        let spec2 = spec.reexponentiated(two);
        let mut obj = LatticeObjective::new(&spec2, constraints, &free, m, forcing_values);
        obj.set_smoothing(Smoothing::Exact);
        let out = fista_stage(
            &mut obj,
            x0,
            opts.grad_tol * S::from_f64(100.0),
            opts.max_iterations,
            log_file.as_mut().map(|f| (f as &mut dyn Write, f64::NAN)),
        );
        total_iterations += out.iterations;
        trace.push(StageTrace {
            kappa: None,
            iterations: out.iterations,
            value: out.value,
            grad_norm: out.grad_norm,
            converged: out.converged,
        });
        x0 = out.x;
    }

    let mut obj = LatticeObjective::new(spec, constraints, &free, m, forcing_values);
    let outcome = run_continuation(&mut obj, x0, p, opts, log_file.as_mut());
    total_iterations += outcome.iterations;
    trace.extend(outcome.trace.iter().cloned());
    let x = outcome.x;

    // exact (unsmoothed) evaluation at the iterate
    let minimizer = obj.snapshot(&x);
    let exact_energy = energy_total(spec, &minimizer)
        .expect("domain checked at construction")
        .total
        .finite()
        .expect("constraints keep the value finite");
    obj.set_smoothing(Smoothing::Exact);
    let exact_value = obj.value(&x);

    let result = MinimizationResult {
        minimizer,
        value: exact_value,
        energy: exact_energy,
        iterations: total_iterations,
        final_grad_norm: outcome.grad_norm,
        trace,
    };
    if outcome.converged {
        Ok(result)
    } else {
        let message = format!(
            "gradient norm {:.3e} above tolerance after {} iterations",
            outcome.grad_norm.to_f64_lossy(),
            result.iterations
        );
        Err(SolveFailure { best: result, message })
    }
}

/// Minimizes the energy subject to pinned values.
pub fn minimize<S: Scalar>(
    spec: &EnergySpec<S>,
    constraints: &ConstraintSet<S>,
    opts: &SolveOptions<S>,
) -> std::result::Result<MinimizationResult<S>, SolveFailure<S>> {
    minimize_with(spec, constraints, None, None, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{DensityFamily, InteractionDensity};
    use crate::geometry::RealBox;
    use crate::lattice::LatticeDomain;
    use std::sync::Arc;

    fn nn_density(p: f64) -> InteractionDensity<f64> {
        InteractionDensity::from_family(2, &DensityFamily::NearestNeighbor { coeff: 1.0 }, p, 2.0)
            .unwrap()
    }

    #[test]
    fn affine_boundary_data_extends_harmonically() {
        // 9x9 grid, quadratic NN energy, affine frame pins: the minimizer is
        // the affine function itself and the value matches the pair count.
        let eps = 1.0 / 9.0;
        let b = RealBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let domain = Arc::new(LatticeDomain::from_box(&b, eps).unwrap());
        let m_row = [2.0, -1.0];
        let mut constraints = ConstraintSet::empty(1);
        for q in 0..domain.len() {
            let s = domain.site(q);
            if s.iter().any(|&i| i == 0 || i == 8) {
                let x = domain.coords(q);
                constraints
                    .pin(q, &[m_row[0] * x[0] + m_row[1] * x[1]])
                    .unwrap();
            }
        }
        let spec = EnergySpec::new(nn_density(2.0), domain.clone()).unwrap();
        let opts = SolveOptions { grad_tol: 1e-11, ..Default::default() };
        let result = minimize(&spec, &constraints, &opts).unwrap();
        for q in 0..domain.len() {
            let x = domain.coords(q);
            let expected = m_row[0] * x[0] + m_row[1] * x[1];
            assert!(
                (result.minimizer.value(q)[0] - expected).abs() < 1e-7,
                "site {:?}",
                domain.site(q)
            );
        }
        // affine value: per direction k, pairs = 8*9 for +e_k and for -e_k,
        // quotient |M e_k|, energy = eps^2 * sum
        let pairs = (8 * 9) as f64;
        let expected = eps * eps * 2.0 * pairs * (m_row[0].powi(2) + m_row[1].powi(2));
        assert!((result.energy - expected).abs() < 1e-8 * expected);
        assert!(constraints.satisfied_by(&result.minimizer));
    }

    #[test]
    fn single_free_site_matches_weighted_average() {
        // all neighbors pinned, p = 2: stationarity gives the closed-form
        // weighted average of the pinned neighbor values.
        let domain = Arc::new(LatticeDomain::centered_index_cube(2, 1, 0.5).unwrap());
        let density = InteractionDensity::from_family(
            2,
            &DensityFamily::PolyDecay { s: 3.0 },
            2.0,
            2.0,
        )
        .unwrap();
        let center = domain.position(&[0, 0]).unwrap();
        let mut constraints = ConstraintSet::empty(1);
        let mut pins = std::collections::BTreeMap::new();
        for q in 0..domain.len() {
            if q != center {
                let v = (q as f64) * 0.37 - 1.1;
                constraints.pin(q, &[v]).unwrap();
                pins.insert(q, v);
            }
        }
        let spec = EnergySpec::new(density.clone(), domain.clone()).unwrap();
        let opts = SolveOptions { grad_tol: 1e-12, ..Default::default() };
        let result = minimize(&spec, &constraints, &opts).unwrap();

        // closed form: u* = sum_w w_xi v_neighbor / sum w, with the weight of
        // each incident pair c(xi)/|xi|^2 counted once per orientation
        let mut wsum = 0.0;
        let mut vsum = 0.0;
        for oc in density.coeffs() {
            if let Some(q) = domain.neighbor(center, &oc.offset) {
                let norm2: f64 = oc.offset.iter().map(|&c| (c * c) as f64).sum();
                let w = oc.coeff / norm2;
                wsum += 2.0 * w; // both orientations hit the pair
                vsum += 2.0 * w * pins[&q];
            }
        }
        let expected = vsum / wsum;
        assert!(
            (result.minimizer.value(center)[0] - expected).abs() < 1e-9,
            "{} vs {expected}",
            result.minimizer.value(center)[0]
        );
    }

    #[test]
    fn minimization_scales_p_homogeneously() {
        let eps = 0.25;
        let b = RealBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let domain = Arc::new(LatticeDomain::from_box(&b, eps).unwrap());
        let density = nn_density(1.5);
        let spec = EnergySpec::new(density, domain.clone()).unwrap();
        let opts = SolveOptions { grad_tol: 1e-11, ..Default::default() };

        let solve_for = |z: f64| {
            let mut constraints = ConstraintSet::empty(1);
            for q in 0..domain.len() {
                let s = domain.site(q);
                if s.iter().any(|&i| i == 0 || i == 3) {
                    let x = domain.coords(q);
                    constraints.pin(q, &[z * (x[0] - x[1] * 0.5)]).unwrap();
                }
            }
            minimize(&spec, &constraints, &opts).unwrap()
        };
        let base = solve_for(1.0);
        let scaled = solve_for(2.0);
        let ratio = scaled.energy / base.energy;
        assert!(
            (ratio - 2.0_f64.powf(1.5)).abs() < 1e-6 * ratio,
            "ratio {ratio}"
        );
        for q in 0..domain.len() {
            let a = 2.0 * base.minimizer.value(q)[0];
            let b = scaled.minimizer.value(q)[0];
            assert!((a - b).abs() < 1e-6 * a.abs().max(1e-3));
        }
    }

    #[test]
    fn descent_is_monotone_within_stages() {
        // run a small p = 1.5 solve with a log and check per-stage descent
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("solve.csv");
        let b = RealBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let domain = Arc::new(LatticeDomain::from_box(&b, 0.25).unwrap());
        let spec = EnergySpec::new(nn_density(1.5), domain.clone()).unwrap();
        let mut constraints = ConstraintSet::empty(1);
        for q in 0..domain.len() {
            let s = domain.site(q);
            if s.iter().any(|&i| i == 0 || i == 3) {
                constraints.pin(q, &[(q % 3) as f64 - 1.0]).unwrap();
            }
        }
        let opts = SolveOptions {
            log_path: Some(log.clone()),
            ..Default::default()
        };
        let result = minimize(&spec, &constraints, &opts).unwrap();
        assert!(result.final_grad_norm <= 1e-8 * (1.0 + result.value.abs()));

        let text = std::fs::read_to_string(&log).unwrap();
        let mut per_kappa: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            per_kappa
                .entry(cols[1].to_string())
                .or_default()
                .push(cols[2].parse().unwrap());
        }
        for (kappa, energies) in per_kappa {
            for w in energies.windows(2) {
                // restart iterations re-evaluate at the kept iterate, so the
                // recorded energies never increase beyond roundoff
                assert!(
                    w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()),
                    "stage {kappa}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn pinned_entries_are_bit_exact() {
        let domain = Arc::new(LatticeDomain::centered_index_cube(2, 2, 0.5).unwrap());
        let spec = EnergySpec::new(nn_density(2.0), domain.clone()).unwrap();
        let mut constraints = ConstraintSet::empty(1);
        constraints.pin(0, &[0.123456789123456789]).unwrap();
        constraints.pin(7, &[-3.25]).unwrap();
        let result = minimize(&spec, &constraints, &SolveOptions::default()).unwrap();
        assert_eq!(result.minimizer.value(0)[0], 0.123456789123456789);
        assert_eq!(result.minimizer.value(7)[0], -3.25);
    }
}
