//! The sampled problem `min_{u ∈ U^ad} E[j^c(u,W) + j^a(u,W)]` and its oracles.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::partition::BlockPartition;
use crate::rng::StreamRng;
use crate::scalar::Scalar;
use crate::scenario::{Scenario, ScenarioSampler};
use crate::vector::{check_dim, check_finite, DualVector, Norm, Vector};

/// Constants of the linear growth bounds `‖∂j^c‖_* ≤ c1‖u‖ + c2` and `‖∂j^a‖_* ≤ d1‖u‖ + d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants<T> {
    pub c1: T,
    pub c2: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Scalar> GrowthConstants<T> {
    /// Constants for the whole objective `j^c + j^a`.
    pub fn combined(&self) -> (T, T) {
        (self.c1 + self.d1, self.c2 + self.d2)
    }
}

/// A user-supplied additive term with its proximal map.
pub trait ProxTerm<T>: Send + Sync + Debug {
    fn value(&self, u: &[T], w: &[T]) -> T;
    /// `argmin_x step·j^a(x, w) + ½‖x − y‖²`.
    fn prox(&self, y: &[T], step: T, w: &[T]) -> Vec<T>;
}

/// Additive (possibly nonsmooth) part `j^a` of the sampled cost.
#[derive(Debug, Clone)]
pub enum AdditiveTerm<T> {
    Zero,
    /// `λ‖u‖₁`
    L1(T),
    /// `Σ λ_i |u_i|`
    WeightedL1(Vec<T>),
    Custom(Arc<dyn ProxTerm<T>>),
}

pub(crate) fn soft_threshold<T: Scalar>(x: T, t: T) -> T {
    // |x| == t maps to 0
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        T::zero()
    }
}

impl<T: Scalar> AdditiveTerm<T> {
    pub fn is_zero(&self) -> bool {
        matches!(self, AdditiveTerm::Zero)
    }

    pub fn value(&self, u: &[T], w: &[T]) -> T {
        match self {
            AdditiveTerm::Zero => T::zero(),
            AdditiveTerm::L1(lambda) => *lambda * u.iter().map(|v| v.abs()).sum::<T>(),
            AdditiveTerm::WeightedL1(weights) => weights.iter().zip(u).map(|(&l, v)| l * v.abs()).sum(),
            AdditiveTerm::Custom(f) => f.value(u, w),
        }
    }

    /// Proximal map of `step·j^a(·, w)` on the whole space.
    pub fn prox(&self, y: &[T], step: T, w: &[T]) -> Vec<T> {
        match self {
            AdditiveTerm::Zero => y.to_vec(),
            AdditiveTerm::L1(lambda) => y.iter().map(|&v| soft_threshold(v, step * *lambda)).collect(),
            AdditiveTerm::WeightedL1(weights) => {
                y.iter().zip(weights).map(|(&v, &l)| soft_threshold(v, step * l)).collect()
            }
            AdditiveTerm::Custom(f) => f.prox(y, step, w),
        }
    }

    /// True when the term is separable across coordinates.
    pub fn is_separable(&self) -> bool {
        !matches!(self, AdditiveTerm::Custom(_))
    }

    /// Restriction to each block of an additive decomposition.
    pub fn split(&self, partition: &BlockPartition) -> Result<Vec<AdditiveTerm<T>>> {
        match self {
            AdditiveTerm::Zero => Ok(vec![AdditiveTerm::Zero; partition.len()]),
            AdditiveTerm::L1(l) => Ok(vec![AdditiveTerm::L1(*l); partition.len()]),
            AdditiveTerm::WeightedL1(w) => {
                check_dim(partition.dim(), w.len())?;
                Ok(partition.blocks().map(|r| AdditiveTerm::WeightedL1(w[r].to_vec())).collect())
            }
            AdditiveTerm::Custom(_) if partition.len() == 1 => Ok(vec![self.clone()]),
            AdditiveTerm::Custom(_) => Err(Error::BlockMismatch("custom additive term cannot be split".into())),
        }
    }
}

/// Split objective with scenario sampler and admissible set.
pub trait SampledProblem<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn norm(&self) -> Norm {
        Norm::Euclidean
    }

    fn feasible_set(&self) -> &FeasibleSet<T>;

    fn sampler(&self) -> &ScenarioSampler<T>;

    /// `j^c(u, w)`
    fn coupling_cost(&self, u: &[T], w: &[T]) -> T;

    /// An element of `∂_u j^c(u, w)`.
    fn coupling_gradient(&self, u: &[T], w: &[T]) -> Vec<T>;

    fn additive(&self) -> &AdditiveTerm<T>;

    fn growth(&self) -> GrowthConstants<T>;

    /// Exact `J(u) = E[j^c(u,W) + j^a(u,W)]`, when available in closed form.
    fn expected_objective(&self, _u: &[T]) -> Option<T> {
        None
    }

    /// Known minimizer `u*` and optimal value `J*`.
    fn optimum(&self) -> Option<(&Vector<T>, T)> {
        None
    }
}

/// Draws `w_k` from the problem's distribution.
pub fn sample_scenario<T: Scalar, P: SampledProblem<T> + ?Sized>(
    problem: &P,
    index: usize,
    rng: &mut StreamRng,
) -> Scenario<T> {
    Scenario {
        payload: problem.sampler().draw(rng),
        index,
    }
}

/// Subgradient oracle `g ∈ ∂_u j^c(u, w)` with the feasibility precondition enforced.
pub fn coupling_subgradient<T: Scalar, P: SampledProblem<T> + ?Sized>(
    problem: &P,
    u: &Vector<T>,
    w: &Scenario<T>,
) -> Result<DualVector<T>> {
    check_dim(problem.dim(), u.dim())?;
    problem.feasible_set().require(u)?;
    let g = problem.coupling_gradient(u.as_slice(), w.as_slice());
    check_finite(&g, "coupling subgradient")?;
    Ok(DualVector::raw(g, problem.norm()))
}

/// `j^c(u,w) + j^a(u,w)`
pub fn sampled_cost<T: Scalar, P: SampledProblem<T> + ?Sized>(problem: &P, u: &[T], w: &[T]) -> T {
    problem.coupling_cost(u, w) + problem.additive().value(u, w)
}

/// Monte Carlo estimate of `J(u)`: mean and standard error.
pub fn estimate_objective<T: Scalar, P: SampledProblem<T> + ?Sized>(
    problem: &P,
    u: &[T],
    samples: usize,
    rng: &mut StreamRng,
) -> (T, T) {
    let values: Vec<T> = (0..samples)
        .map(|_| {
            let w = problem.sampler().draw(rng);
            sampled_cost(problem, u, &w)
        })
        .collect();
    mean_and_stderr(&values)
}

/// `J(u)`, exact when the problem provides it, otherwise a Monte Carlo mean.
pub fn objective<T: Scalar, P: SampledProblem<T> + ?Sized>(
    problem: &P,
    u: &[T],
    samples: usize,
    rng: &mut StreamRng,
) -> T {
    problem
        .expected_objective(u)
        .unwrap_or_else(|| estimate_objective(problem, u, samples, rng).0)
}

pub(crate) fn mean_and_stderr<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    (mean, (var / n).sqrt())
}
