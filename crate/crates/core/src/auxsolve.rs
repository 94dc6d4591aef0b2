//! Solves the auxiliary problem
//!
//! ```text
//! min_{u ∈ U^ad}  K(u) + ⟨φ, u⟩ + ε·j^a(u, w),     φ = ε(g + r) − ∇K(u_k)
//! ```
//!
//! Closed forms are used where they exist (projection, soft-thresholding,
//! exponentiated gradient); everything else goes to a deterministic
//! proximal-gradient inner loop.

use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::mirror::AuxiliaryFunction;
use crate::problem::AdditiveTerm;
use crate::rng::{uniform, StreamRng};
use crate::scalar::Scalar;
use crate::vector::{check_dim, check_finite, dot, DualVector, Norm, Vector};

/// Number of seeded random probes in the variational-inequality residual.
pub const RANDOM_PROBES: usize = 32;

/// One auxiliary problem, built from `(u_k, g_k + r_k, ε_k, w_{k+1})`.
#[derive(Debug, Clone, Copy)]
pub struct AuxiliaryInstance<'a, T> {
    pub aux: &'a AuxiliaryFunction<T>,
    pub set: &'a FeasibleSet<T>,
    /// Current iterate `u_k`.
    pub anchor: &'a Vector<T>,
    /// Perturbed subgradient `g_k + r_k`.
    pub direction: &'a DualVector<T>,
    pub epsilon: T,
    pub additive: &'a AdditiveTerm<T>,
    /// Scenario payload, forwarded to scenario-dependent additive terms.
    pub scenario: &'a [T],
}

impl<'a, T: Scalar> AuxiliaryInstance<'a, T> {
    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {}", self.epsilon)));
        }
        check_dim(self.set.dim(), self.anchor.dim())?;
        check_dim(self.anchor.dim(), self.direction.dim())?;
        check_finite(self.direction.as_slice(), "auxiliary direction")?;
        Ok(())
    }

    /// `φ = ε(g + r) − ∇K(u_k)`
    pub fn phi(&self) -> Result<Vec<T>> {
        let grad = self.aux.gradient_slice(self.anchor.as_slice())?;
        let phi: Vec<T> = self
            .direction
            .as_slice()
            .iter()
            .zip(&grad)
            .map(|(&d, &g)| self.epsilon * d - g)
            .collect();
        check_finite(&phi, "phi")?;
        Ok(phi)
    }

    /// Objective `K(u) + ⟨φ, u⟩ + ε j^a(u, w)`.
    pub fn objective(&self, u: &[T]) -> Result<T> {
        let phi = self.phi()?;
        Ok(self.aux.value_slice(u)? + dot(&phi, u) + self.epsilon * self.additive.value(u, self.scenario))
    }

    /// Explicit point `u_k − ε(g + r)`.
    fn gradient_step(&self) -> Vec<T> {
        self.anchor
            .as_slice()
            .iter()
            .zip(self.direction.as_slice())
            .map(|(&u, &d)| u - self.epsilon * d)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    /// Projection of the explicit gradient step.
    Projection,
    /// Soft-thresholding of the explicit gradient step.
    SoftThreshold,
    /// Exponentiated-gradient update on the simplex.
    Multiplicative,
    InnerIterative,
}

impl SolvePath {
    pub fn is_closed_form(self) -> bool {
        self != SolvePath::InnerIterative
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub solution: Vector<T>,
    pub path: SolvePath,
    pub inner_iterations: usize,
    /// Variational-inequality residual; `None` when verification was not requested.
    pub vi_residual: Option<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<T> {
    pub tol: T,
    pub max_iters: usize,
    /// Compute the VI residual even on closed-form paths.
    pub verify: bool,
    pub probe_seed: u64,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iters: 100_000,
            verify: false,
            probe_seed: 0,
        }
    }
}

/// Solves the auxiliary problem, dispatching to a closed form when one applies.
pub fn solve_auxiliary<T: Scalar>(inst: &AuxiliaryInstance<'_, T>, opts: &SolveOptions<T>) -> Result<SolveReport<T>> {
    inst.validate()?;
    let (solution, path, inner_iterations) = match closed_form(inst)? {
        Some((u, path)) => (u, path, 0),
        None => {
            let (u, iters) = inner_solve(inst, opts.tol, opts.max_iters)?;
            (u, SolvePath::InnerIterative, iters)
        }
    };
    check_finite(solution.as_slice(), "auxiliary solution")?;
    let vi_residual = if opts.verify || !path.is_closed_form() {
        Some(vi_residual(inst, &solution, opts.probe_seed)?)
    } else {
        None
    };
    Ok(SolveReport {
        solution,
        path,
        inner_iterations,
        vi_residual,
    })
}

/// Closed-form solution, or `None` when the instance has none.
pub fn closed_form<T: Scalar>(inst: &AuxiliaryInstance<'_, T>) -> Result<Option<(Vector<T>, SolvePath)>> {
    let norm = inst.anchor.norm_tag();
    match (inst.aux, inst.additive, inst.set) {
        (AuxiliaryFunction::Quadratic, AdditiveTerm::Zero, set) => {
            let y = Vector::raw(inst.gradient_step(), norm);
            Ok(Some((set.project(&y)?, SolvePath::Projection)))
        }
        (AuxiliaryFunction::Quadratic, AdditiveTerm::L1(_) | AdditiveTerm::WeightedL1(_), FeasibleSet::WholeSpace { .. }) => {
            let y = inst.gradient_step();
            let u = inst.additive.prox(&y, inst.epsilon, inst.scenario);
            Ok(Some((Vector::raw(u, norm), SolvePath::SoftThreshold)))
        }
        (AuxiliaryFunction::NegativeEntropy, AdditiveTerm::Zero, FeasibleSet::Simplex { .. }) => {
            let u = exponentiated_gradient(inst.anchor.as_slice(), inst.direction.as_slice(), inst.epsilon)?;
            Ok(Some((Vector::raw(u, norm), SolvePath::Multiplicative)))
        }
        _ => Ok(None),
    }
}

/// `u_i ∝ u_i · exp(−ε d_i)`, normalized to the simplex.
fn exponentiated_gradient<T: Scalar>(u: &[T], d: &[T], epsilon: T) -> Result<Vec<T>> {
    if let Some(i) = u.iter().position(|x| !(*x > T::zero())) {
        return Err(Error::DomainViolation(format!(
            "exponentiated gradient needs a strictly positive iterate, u[{i}] = {}",
            u[i]
        )));
    }
    let exponents: Vec<T> = d.iter().map(|&di| -epsilon * di).collect();
    let shift = exponents.iter().copied().fold(T::neg_infinity(), T::max);
    let weights: Vec<T> = u.iter().zip(&exponents).map(|(&ui, &e)| ui * (e - shift).exp()).collect();
    let total: T = weights.iter().copied().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Proximal map of `t·j^a + ι_{U^ad}`, for the combinations where it is exact.
fn prox_with_set<T: Scalar>(inst: &AuxiliaryInstance<'_, T>, y: &[T], t: T) -> Result<Vec<T>> {
    let norm = inst.anchor.norm_tag();
    match (inst.additive, inst.set) {
        (AdditiveTerm::Zero, set) => Ok(set.project(&Vector::raw(y.to_vec(), norm))?.into_vec()),
        (additive, FeasibleSet::WholeSpace { .. }) => Ok(additive.prox(y, t, inst.scenario)),
        (AdditiveTerm::L1(_) | AdditiveTerm::WeightedL1(_), FeasibleSet::Box { lower, upper }) => {
            // 1-D prox of a convex term plus an interval indicator is the clamped prox.
            let s = inst.additive.prox(y, t, inst.scenario);
            Ok(s.iter().zip(lower.iter().zip(upper)).map(|(&v, (&l, &h))| v.max(l).min(h)).collect())
        }
        (AdditiveTerm::L1(lambda), set @ FeasibleSet::Simplex { .. }) => {
            // λ‖u‖₁ is linear on the simplex.
            let shifted: Vec<T> = y.iter().map(|&v| v - t * *lambda).collect();
            Ok(set.project(&Vector::raw(shifted, norm))?.into_vec())
        }
        (AdditiveTerm::WeightedL1(weights), set @ FeasibleSet::Simplex { .. }) => {
            let shifted: Vec<T> = y.iter().zip(weights).map(|(&v, &l)| v - t * l).collect();
            Ok(set.project(&Vector::raw(shifted, norm))?.into_vec())
        }
        _ => Err(Error::NoClosedForm(
            "additive term combined with this feasible set has no supported proximal map".into(),
        )),
    }
}

/// Proximal-gradient inner solver started at the projected anchor.
pub fn inner_solve<T: Scalar>(inst: &AuxiliaryInstance<'_, T>, tol: T, max_iters: usize) -> Result<(Vector<T>, usize)> {
    let start = inst.set.project(inst.anchor)?;
    inner_solve_from(inst, &start, tol, max_iters)
}

/// Proximal-gradient inner solver: step `1/L_K` on the smooth part `K + ⟨φ,·⟩`, exact prox on
/// `ε j^a + ι_{U^ad}`. Stops once successive iterates differ by at most `tol·ε` in sup norm.
pub fn inner_solve_from<T: Scalar>(
    inst: &AuxiliaryInstance<'_, T>,
    start: &Vector<T>,
    tol: T,
    max_iters: usize,
) -> Result<(Vector<T>, usize)> {
    inst.validate()?;
    check_dim(inst.dim(), start.dim())?;
    if inst.aux.is_entropy_based() {
        return Err(Error::NoClosedForm(
            "entropy auxiliary function has an unbounded gradient Lipschitz constant".into(),
        ));
    }
    let lipschitz = inst
        .aux
        .gradient_lipschitz()
        .ok_or_else(|| Error::NoClosedForm("auxiliary gradient is not Lipschitz".into()))?;
    let step = T::one() / lipschitz;
    let phi = inst.phi()?;
    let threshold = tol * inst.epsilon;

    let mut u = start.as_slice().to_vec();
    let mut last_step = T::infinity();
    for iteration in 1..=max_iters {
        let grad = inst.aux.gradient_slice(&u)?;
        let y: Vec<T> = u
            .iter()
            .zip(grad.iter().zip(&phi))
            .map(|(&ui, (&gi, &pi))| ui - step * (gi + pi))
            .collect();
        let next = prox_with_set(inst, &y, step * inst.epsilon)?;
        check_finite(&next, "inner iterate")?;
        last_step = next.iter().zip(&u).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        let scale = T::one() + Norm::Linf.eval(&next);
        u = next;
        // Stagnation at rounding level also counts as convergence.
        if last_step <= threshold || last_step <= T::lit(8.0) * T::epsilon() * scale {
            return Ok((Vector::raw(u, inst.anchor.norm_tag()), iteration));
        }
    }
    Err(Error::InnerFailed {
        iterations: max_iters,
        last_step: last_step.to_f64_lossy(),
    })
}

/// Largest violation over a probe set of the optimality condition
///
/// ```text
/// ⟨∇K(u₊) − ∇K(u_k) + ε(g + r), v − u₊⟩ + ε(j^a(v,w) − j^a(u₊,w)) ≥ 0   ∀ v ∈ U^ad.
/// ```
///
/// Probes are the projections of `u₊ ± e_i` and of [`RANDOM_PROBES`] seeded points of
/// `u₊ + [−1, 1]^d`.
pub fn vi_residual<T: Scalar>(inst: &AuxiliaryInstance<'_, T>, candidate: &Vector<T>, probe_seed: u64) -> Result<T> {
    inst.validate()?;
    check_dim(inst.dim(), candidate.dim())?;
    inst.set.require(candidate)?;
    let phi = inst.phi()?;
    let grad_k = inst.aux.gradient_slice(candidate.as_slice())?;
    let slope: Vec<T> = grad_k.iter().zip(&phi).map(|(&a, &b)| a + b).collect();
    let c = candidate.as_slice();
    let base = inst.additive.value(c, inst.scenario);

    let violation = |probe: Vec<T>| -> Result<T> {
        let v = inst.set.project(&Vector::raw(probe, candidate.norm_tag()))?;
        let v = v.as_slice();
        let lin: T = slope.iter().zip(v.iter().zip(c)).map(|(&s, (&a, &b))| s * (a - b)).sum();
        let add = inst.epsilon * (inst.additive.value(v, inst.scenario) - base);
        Ok(-(lin + add))
    };

    let mut worst = T::zero();
    let d = inst.dim();
    for i in 0..d {
        for sign in [T::one(), -T::one()] {
            let mut p = c.to_vec();
            p[i] += sign;
            worst = worst.max(violation(p)?);
        }
    }
    let mut rng = StreamRng::seed_from_u64(probe_seed);
    for _ in 0..RANDOM_PROBES {
        let p: Vec<T> = c.iter().map(|&x| x + uniform(&mut rng, -T::one(), T::one())).collect();
        worst = worst.max(violation(p)?);
    }
    Ok(worst)
}
