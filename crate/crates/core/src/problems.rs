//! Problem zoo with known optima.
//!
//! Every problem has a quadratic expected coupling cost `½uᵀH̄u − b̄ᵀu + c₀` and a
//! deterministic additive term, so `J` is evaluated exactly. Scenario distributions are
//! bounded. Construction runs in `f64` and is converted to the working scalar at the end.

use crate::error::{Error, Result};
use crate::feasible::{project_simplex, FeasibleSet};
use crate::linalg::{cholesky, cholesky_solve, gershgorin_max, mat_vec, orthonormalize, Matrix};
use crate::mirror::AuxiliaryFunction;
use crate::partition::BlockPartition;
use crate::problem::{soft_threshold, AdditiveTerm, GrowthConstants, SampledProblem};
use crate::rng::{label, normal_vec, stream, uniform, StreamRng};
use crate::scalar::Scalar;
use crate::scenario::ScenarioSampler;
use crate::vector::{dot, Norm, Vector};

/// Half-width of the uniform Hessian scale noise, `s ∈ [1 − σ, 1 + σ]`.
pub const DEFAULT_SCALE_NOISE: f64 = 0.2;
/// Half-width of the uniform linear-term noise.
pub const DEFAULT_SHIFT_NOISE: f64 = 0.1;
/// Atoms of the empirical least-squares distribution.
pub const LEAST_SQUARES_SAMPLES: usize = 200;
/// Curvature of the simplex risk problem.
pub const SIMPLEX_RISK_RHO: f64 = 1.0;
/// Half-width of the loss noise of the simplex risk problem.
pub const SIMPLEX_LOSS_NOISE: f64 = 0.1;
/// Per-block l1 weights of the block-coupled problem.
pub const BLOCK_LAMBDAS: (f64, f64) = (0.1, 0.05);

const ORACLE_TOL: f64 = 1e-13;
const ORACLE_MAX_ITERS: usize = 2_000_000;

/// How a scenario payload enters `j^c`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioMap {
    /// `w = (s, δ)`: `½ s·uᵀH̄u − ⟨b̄ + δ, u⟩`.
    ScaledHessian,
    /// `w = (a, y)`: `½(⟨a,u⟩ − y)²`.
    LeastSquares,
    /// `w = ℓ`: `⟨ℓ, u⟩ + (ρ/2)‖u‖²`.
    LinearLoss { rho: f64 },
}

#[derive(Debug, Clone)]
pub struct ZooProblem<T> {
    name: &'static str,
    dim: usize,
    norm: Norm,
    set: FeasibleSet<T>,
    sampler: ScenarioSampler<T>,
    map: ScenarioMap,
    hessian: Matrix<T>,
    linear: Vec<T>,
    constant: T,
    additive: AdditiveTerm<T>,
    growth: GrowthConstants<T>,
    optimum: Vector<T>,
    optimal_value: T,
    partition: Option<BlockPartition>,
    coercive: bool,
}

fn cast<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

fn cast_matrix<T: Scalar>(m: &[Vec<f64>]) -> Matrix<T> {
    m.iter().map(|r| cast(r)).collect()
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Quadratic part `½uᵀHu − bᵀu + c`.
fn quadratic(h: &[Vec<f64>], b: &[f64], c: f64, u: &[f64]) -> f64 {
    0.5 * dot(u, &mat_vec(h, u)) - dot(b, u) + c
}

fn weighted_l1(lambdas: &[f64], u: &[f64]) -> f64 {
    lambdas.iter().zip(u).map(|(l, x)| l * x.abs()).sum()
}

/// Proximal gradient on `½uᵀHu − bᵀu + Σλ_i|u_i|` over the whole space, run until the
/// fixed-point residual is below `ORACLE_TOL` (relative to `‖u‖∞ + 1`).
fn prox_gradient_oracle(h: &[Vec<f64>], b: &[f64], lambdas: &[f64]) -> Result<Vec<f64>> {
    let step = 1.0 / gershgorin_max(h);
    let mut u = vec![0.0; b.len()];
    for _ in 0..ORACLE_MAX_ITERS {
        let g: Vec<f64> = mat_vec(h, &u).iter().zip(b).map(|(hu, b)| hu - b).collect();
        let next: Vec<f64> = u
            .iter()
            .zip(&g)
            .zip(lambdas)
            .map(|((&x, &g), &l)| soft_threshold(x - step * g, step * l))
            .collect();
        let scale = 1.0 + next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let moved = u.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        u = next;
        if moved <= ORACLE_TOL * scale {
            return Ok(u);
        }
    }
    Err(Error::InnerFailed {
        iterations: ORACLE_MAX_ITERS,
        last_step: step,
    })
}

/// Symmetric matrix with eigenvalues evenly spaced in `[1, κ]` and a random orthonormal basis.
fn conditioned_matrix(d: usize, kappa: f64, rng: &mut StreamRng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>>;
    loop {
        basis = orthonormalize((0..d).map(|_| normal_vec::<f64, _>(rng, d)).collect());
        if basis.iter().all(|r| r.iter().all(|x| x.is_finite())) {
            break;
        }
    }
    let eig: Vec<f64> = (0..d)
        .map(|i| if d == 1 { 1.0 } else { 1.0 + (kappa - 1.0) * i as f64 / (d - 1) as f64 })
        .collect();
    let mut a = vec![vec![0.0; d]; d];
    for (k, row) in basis.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += eig[k] * row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    a
}

fn scaled_hessian_sampler<T: Scalar>(d: usize, scale_noise: f64, shift_noise: f64) -> Result<ScenarioSampler<T>> {
    if scale_noise == 0.0 && shift_noise == 0.0 {
        let mut w = vec![T::zero(); d + 1];
        w[0] = T::one();
        return Ok(ScenarioSampler::PointMass(w));
    }
    let mut lower = vec![T::lit(-shift_noise); d + 1];
    let mut upper = vec![T::lit(shift_noise); d + 1];
    lower[0] = T::lit(1.0 - scale_noise);
    upper[0] = T::lit(1.0 + scale_noise);
    ScenarioSampler::uniform_box(lower, upper)
}

fn check_noise(scale_noise: f64, shift_noise: f64) -> Result<()> {
    if !(0.0..1.0).contains(&scale_noise) || !(shift_noise >= 0.0) || !shift_noise.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise half-widths must satisfy 0 <= scale < 1 and shift >= 0, got {scale_noise}, {shift_noise}"
        )));
    }
    Ok(())
}

impl<T: Scalar> ZooProblem<T> {
    /// Stochastic quadratic with prescribed moments `E[A] = H̄`, `E[b] = b̄` on the whole space.
    pub fn quadratic_from_moments(hessian: Vec<Vec<f64>>, linear: Vec<f64>, scale_noise: f64, shift_noise: f64) -> Result<Self> {
        check_noise(scale_noise, shift_noise)?;
        let d = linear.len();
        if d == 0 || hessian.len() != d || hessian.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: hessian.len(),
            });
        }
        let l = cholesky(&hessian).ok_or_else(|| Error::InvalidArgument("expected Hessian must be positive definite".into()))?;
        let ustar = cholesky_solve(&l, &linear);
        let jstar = -0.5 * dot(&linear, &ustar);
        let growth = GrowthConstants {
            c1: T::lit((1.0 + scale_noise) * gershgorin_max(&hessian)),
            c2: T::lit(euclid(&linear) + shift_noise * (d as f64).sqrt()),
            d1: T::zero(),
            d2: T::zero(),
        };
        Ok(Self {
            name: "stochastic_quadratic",
            dim: d,
            norm: Norm::Euclidean,
            set: FeasibleSet::whole_space(d)?,
            sampler: scaled_hessian_sampler(d, scale_noise, shift_noise)?,
            map: ScenarioMap::ScaledHessian,
            hessian: cast_matrix(&hessian),
            linear: cast(&linear),
            constant: T::zero(),
            additive: AdditiveTerm::Zero,
            growth,
            optimum: Vector::raw(cast(&ustar), Norm::Euclidean),
            optimal_value: T::lit(jstar),
            partition: None,
            coercive: true,
        })
    }

    /// l1-regularized least squares over an empirical distribution of `(a, y)` pairs.
    pub fn least_squares_from_samples(samples: Vec<Vec<f64>>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
        }
        let d = samples
            .first()
            .map(|s| s.len().saturating_sub(1))
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::InvalidArgument("need samples of the form (a_1..a_d, y)".into()))?;
        if samples.iter().any(|s| s.len() != d + 1 || s.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument("samples must be finite with equal length".into()));
        }
        let n = samples.len() as f64;
        let mut h = vec![vec![0.0; d]; d];
        let mut b = vec![0.0; d];
        let mut c = 0.0;
        let (mut a_max, mut ay_max) = (0.0f64, 0.0f64);
        for s in &samples {
            let (a, y) = (&s[..d], s[d]);
            for i in 0..d {
                for j in 0..d {
                    h[i][j] += a[i] * a[j] / n;
                }
                b[i] += y * a[i] / n;
            }
            c += 0.5 * y * y / n;
            a_max = a_max.max(dot(a, a));
            ay_max = ay_max.max(euclid(a) * y.abs());
        }
        if cholesky(&h).is_none() {
            return Err(Error::InvalidArgument("second moment of a must be positive definite".into()));
        }
        let lambdas = vec![lambda; d];
        let ustar = prox_gradient_oracle(&h, &b, &lambdas)?;
        let jstar = quadratic(&h, &b, c, &ustar) + weighted_l1(&lambdas, &ustar);
        let growth = GrowthConstants {
            c1: T::lit(a_max),
            c2: T::lit(ay_max),
            d1: T::zero(),
            d2: T::lit(lambda * (d as f64).sqrt()),
        };
        Ok(Self {
            name: "l1_least_squares",
            dim: d,
            norm: Norm::Euclidean,
            set: FeasibleSet::whole_space(d)?,
            sampler: ScenarioSampler::empirical(samples.iter().map(|s| cast(s)).collect())?,
            map: ScenarioMap::LeastSquares,
            hessian: cast_matrix(&h),
            linear: cast(&b),
            constant: T::lit(c),
            additive: AdditiveTerm::L1(T::lit(lambda)),
            growth,
            optimum: Vector::raw(cast(&ustar), Norm::Euclidean),
            optimal_value: T::lit(jstar),
            partition: None,
            coercive: true,
        })
    }

    /// `⟨ℓ, u⟩ + (ρ/2)‖u‖²` on the simplex with `ℓ` uniform in `ℓ̄ ± σ`.
    pub fn simplex_from_mean_loss(mean_loss: Vec<f64>, rho: f64, noise: f64) -> Result<Self> {
        let d = mean_loss.len();
        if d < 2 {
            return Err(Error::InvalidArgument("simplex risk needs d >= 2".into()));
        }
        if !(rho > 0.0) || !(noise >= 0.0) || mean_loss.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("need rho > 0, noise >= 0 and a finite mean loss".into()));
        }
        // the minimizer of ρ/2‖u + ℓ̄/ρ‖² over the simplex
        let shifted: Vec<f64> = mean_loss.iter().map(|l| -l / rho).collect();
        let ustar = project_simplex(&shifted);
        let h: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { rho } else { 0.0 }).collect())
            .collect();
        let b: Vec<f64> = mean_loss.iter().map(|l| -l).collect();
        let jstar = quadratic(&h, &b, 0.0, &ustar);
        let loss_max = mean_loss.iter().fold(0.0f64, |m, l| m.max(l.abs())) + noise;
        let sampler = if noise == 0.0 {
            ScenarioSampler::PointMass(cast(&mean_loss))
        } else {
            ScenarioSampler::uniform_box(
                mean_loss.iter().map(|l| T::lit(l - noise)).collect(),
                mean_loss.iter().map(|l| T::lit(l + noise)).collect(),
            )?
        };
        Ok(Self {
            name: "simplex_risk",
            dim: d,
            norm: Norm::L1,
            set: FeasibleSet::simplex(d)?,
            sampler,
            map: ScenarioMap::LinearLoss { rho },
            hessian: cast_matrix(&h),
            linear: cast(&b),
            constant: T::zero(),
            additive: AdditiveTerm::Zero,
            // ‖ℓ + ρu‖_∞ ≤ ρ‖u‖₁ + max|ℓ|
            growth: GrowthConstants {
                c1: T::lit(rho),
                c2: T::lit(loss_max),
                d1: T::zero(),
                d2: T::zero(),
            },
            optimum: Vector::raw(cast(&ustar), Norm::L1),
            optimal_value: T::lit(jstar),
            partition: None,
            coercive: true,
        })
    }

    /// Two-block quadratic `H̄ = [[D₁, ρM], [ρMᵀ, D₂]]` with `j^a = λ₁‖u¹‖₁ + λ₂‖u²‖₁`.
    pub fn block_from_parts(
        d1_diag: Vec<f64>,
        d2_diag: Vec<f64>,
        coupling: Vec<Vec<f64>>,
        rho: f64,
        linear: Vec<f64>,
        lambdas: (f64, f64),
        scale_noise: f64,
        shift_noise: f64,
    ) -> Result<Self> {
        check_noise(scale_noise, shift_noise)?;
        let (n1, n2) = (d1_diag.len(), d2_diag.len());
        let d = n1 + n2;
        if n1 == 0 || n2 == 0 || linear.len() != d || coupling.len() != n1 || coupling.iter().any(|r| r.len() != n2) {
            return Err(Error::BlockMismatch("block sizes disagree".into()));
        }
        if !(lambdas.0 >= 0.0 && lambdas.1 >= 0.0) {
            return Err(Error::InvalidArgument("l1 weights must be >= 0".into()));
        }
        let h = block_hessian(&d1_diag, &d2_diag, &coupling, rho);
        if cholesky(&h).is_none() {
            return Err(Error::IndefiniteCoupling {
                rho,
                limit: coupling_limit(&d1_diag, &d2_diag, &coupling),
            });
        }
        let weights: Vec<f64> = (0..d).map(|i| if i < n1 { lambdas.0 } else { lambdas.1 }).collect();
        let ustar = prox_gradient_oracle(&h, &linear, &weights)?;
        let jstar = quadratic(&h, &linear, 0.0, &ustar) + weighted_l1(&weights, &ustar);
        let lam_max = lambdas.0.max(lambdas.1);
        let growth = GrowthConstants {
            c1: T::lit((1.0 + scale_noise) * gershgorin_max(&h)),
            c2: T::lit(euclid(&linear) + shift_noise * (d as f64).sqrt()),
            d1: T::zero(),
            d2: T::lit(lam_max * (d as f64).sqrt()),
        };
        Ok(Self {
            name: "block_coupled",
            dim: d,
            norm: Norm::Euclidean,
            set: FeasibleSet::whole_space(d)?,
            sampler: scaled_hessian_sampler(d, scale_noise, shift_noise)?,
            map: ScenarioMap::ScaledHessian,
            hessian: cast_matrix(&h),
            linear: cast(&linear),
            constant: T::zero(),
            additive: AdditiveTerm::WeightedL1(cast(&weights)),
            growth,
            optimum: Vector::raw(cast(&ustar), Norm::Euclidean),
            optimal_value: T::lit(jstar),
            partition: Some(BlockPartition::new(&[n1, n2])?),
            coercive: true,
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn scenario_map(&self) -> &ScenarioMap {
        &self.map
    }

    /// `H̄`
    pub fn hessian(&self) -> &[Vec<T>] {
        &self.hessian
    }

    /// `b̄`
    pub fn linear(&self) -> &[T] {
        &self.linear
    }

    pub fn u_star(&self) -> &Vector<T> {
        &self.optimum
    }

    pub fn j_star(&self) -> T {
        self.optimal_value
    }

    pub fn partition(&self) -> Option<&BlockPartition> {
        self.partition.as_ref()
    }

    /// Strongly convex expected objective or compact feasible set.
    pub fn is_coercive(&self) -> bool {
        self.coercive
    }

    /// `∇J^c(u) = H̄u − b̄`
    pub fn expected_gradient(&self, u: &[T]) -> Vec<T> {
        mat_vec(&self.hessian, u).iter().zip(&self.linear).map(|(&hu, &b)| hu - b).collect()
    }

    /// Auxiliary functions that suit the geometry, preferred first.
    pub fn recommended_aux(&self) -> Vec<AuxiliaryFunction<T>> {
        match (&self.partition, &self.set) {
            (Some(p), _) => {
                let parts = vec![AuxiliaryFunction::Quadratic; p.len()];
                vec![
                    AuxiliaryFunction::additive(parts, p.clone()).expect("partition matches its own block count"),
                    AuxiliaryFunction::Quadratic,
                ]
            }
            (None, FeasibleSet::Simplex { .. }) => vec![AuxiliaryFunction::NegativeEntropy, AuxiliaryFunction::Quadratic],
            _ => vec![AuxiliaryFunction::Quadratic],
        }
    }
}

fn block_hessian(d1: &[f64], d2: &[f64], m: &[Vec<f64>], rho: f64) -> Vec<Vec<f64>> {
    let (n1, n2) = (d1.len(), d2.len());
    let mut h = vec![vec![0.0; n1 + n2]; n1 + n2];
    for i in 0..n1 {
        h[i][i] = d1[i];
        for j in 0..n2 {
            h[i][n1 + j] = rho * m[i][j];
            h[n1 + j][i] = rho * m[i][j];
        }
    }
    for j in 0..n2 {
        h[n1 + j][n1 + j] = d2[j];
    }
    h
}

/// Largest `|ρ|` keeping the block Hessian positive definite, by bisection.
fn coupling_limit(d1: &[f64], d2: &[f64], m: &[Vec<f64>]) -> f64 {
    let pd = |rho: f64| cholesky(&block_hessian(d1, d2, m, rho)).is_some();
    let mut hi = 1.0;
    while pd(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// d-dimensional stochastic quadratic with eigenvalues of `H̄` spread over `[1, κ]`,
/// `b̄ ~ U[−1,1]^d` and the default noise levels.
pub fn make_stochastic_quadratic<T: Scalar>(d: usize, seed: u64, kappa: f64) -> Result<ZooProblem<T>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("conditioning must be >= 1, got {kappa}")));
    }
    let mut rng = stream(seed, label::CONSTRUCTION);
    let h = conditioned_matrix(d, kappa, &mut rng);
    let b: Vec<f64> = (0..d).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    ZooProblem::quadratic_from_moments(h, b, DEFAULT_SCALE_NOISE, DEFAULT_SHIFT_NOISE)
}

/// l1 least squares on 200 atoms `a ~ U[−1,1]^d`, `y = ⟨a, ū⟩ + U[−0.1, 0.1]` with a sparse `ū`.
pub fn make_l1_least_squares<T: Scalar>(d: usize, lambda: f64, seed: u64) -> Result<ZooProblem<T>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let mut rng = stream(seed, label::CONSTRUCTION);
    let truth: Vec<f64> = (0..d)
        .map(|i| if i % 2 == 0 { uniform(&mut rng, -2.0, 2.0) } else { 0.0 })
        .collect();
    let samples = (0..LEAST_SQUARES_SAMPLES.max(2 * d))
        .map(|_| {
            let mut a: Vec<f64> = (0..d).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            let y = dot(&a, &truth) + uniform(&mut rng, -0.1, 0.1);
            a.push(y);
            a
        })
        .collect();
    ZooProblem::least_squares_from_samples(samples, lambda)
}

/// Expected loss `ℓ̄ ~ U[0,1]^d`, `ρ = 1`, loss noise ±0.1, on the probability simplex.
pub fn make_simplex_risk<T: Scalar>(d: usize, seed: u64) -> Result<ZooProblem<T>> {
    let mut rng = stream(seed, label::CONSTRUCTION);
    let mean_loss = (0..d).map(|_| uniform(&mut rng, 0.0, 1.0)).collect();
    ZooProblem::simplex_from_mean_loss(mean_loss, SIMPLEX_RISK_RHO, SIMPLEX_LOSS_NOISE)
}

/// Two blocks of sizes `d1`, `d2` with diagonal curvature in `[1, 2]`, coupling `ρ·M` with
/// `M ~ U[−1,1]`, `b̄ ~ U[−1,1]` and l1 weights [`BLOCK_LAMBDAS`].
pub fn make_block_coupled<T: Scalar>(d1: usize, d2: usize, rho: f64, seed: u64) -> Result<ZooProblem<T>> {
    make_block_coupled_with(d1, d2, rho, BLOCK_LAMBDAS, seed)
}

pub fn make_block_coupled_with<T: Scalar>(d1: usize, d2: usize, rho: f64, lambdas: (f64, f64), seed: u64) -> Result<ZooProblem<T>> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::BlockMismatch("both blocks need at least one coordinate".into()));
    }
    let mut rng = stream(seed, label::CONSTRUCTION);
    let diag1 = (0..d1).map(|_| uniform(&mut rng, 1.0, 2.0)).collect();
    let diag2 = (0..d2).map(|_| uniform(&mut rng, 1.0, 2.0)).collect();
    let m = (0..d1).map(|_| (0..d2).map(|_| uniform(&mut rng, -1.0, 1.0)).collect()).collect();
    let b = (0..d1 + d2).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    ZooProblem::block_from_parts(diag1, diag2, m, rho, b, lambdas, DEFAULT_SCALE_NOISE, DEFAULT_SHIFT_NOISE)
}

/// Largest admissible `|ρ|` for [`make_block_coupled`] with the same sizes and seed.
pub fn block_coupling_limit(d1: usize, d2: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, label::CONSTRUCTION);
    let diag1: Vec<f64> = (0..d1).map(|_| uniform(&mut rng, 1.0, 2.0)).collect();
    let diag2: Vec<f64> = (0..d2).map(|_| uniform(&mut rng, 1.0, 2.0)).collect();
    let m: Vec<Vec<f64>> = (0..d1).map(|_| (0..d2).map(|_| uniform(&mut rng, -1.0, 1.0)).collect()).collect();
    coupling_limit(&diag1, &diag2, &m)
}

impl<T: Scalar> SampledProblem<T> for ZooProblem<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn norm(&self) -> Norm {
        self.norm
    }

    fn feasible_set(&self) -> &FeasibleSet<T> {
        &self.set
    }

    fn sampler(&self) -> &ScenarioSampler<T> {
        &self.sampler
    }

    fn coupling_cost(&self, u: &[T], w: &[T]) -> T {
        let half = T::lit(0.5);
        match self.map {
            ScenarioMap::ScaledHessian => {
                let quad = dot(u, &mat_vec(&self.hessian, u));
                let lin: T = u.iter().zip(&self.linear).zip(&w[1..]).map(|((&x, &b), &s)| (b + s) * x).sum();
                half * w[0] * quad - lin
            }
            ScenarioMap::LeastSquares => {
                let r = dot(&w[..self.dim], u) - w[self.dim];
                half * r * r
            }
            ScenarioMap::LinearLoss { rho } => dot(w, u) + half * T::lit(rho) * dot(u, u),
        }
    }

    fn coupling_gradient(&self, u: &[T], w: &[T]) -> Vec<T> {
        match self.map {
            ScenarioMap::ScaledHessian => mat_vec(&self.hessian, u)
                .iter()
                .zip(&self.linear)
                .zip(&w[1..])
                .map(|((&hu, &b), &s)| w[0] * hu - b - s)
                .collect(),
            ScenarioMap::LeastSquares => {
                let r = dot(&w[..self.dim], u) - w[self.dim];
                w[..self.dim].iter().map(|&a| a * r).collect()
            }
            ScenarioMap::LinearLoss { rho } => w.iter().zip(u).map(|(&l, &x)| l + T::lit(rho) * x).collect(),
        }
    }

    fn additive(&self) -> &AdditiveTerm<T> {
        &self.additive
    }

    fn growth(&self) -> GrowthConstants<T> {
        self.growth
    }

    fn expected_objective(&self, u: &[T]) -> Option<T> {
        let half = T::lit(0.5);
        let quad = half * dot(u, &mat_vec(&self.hessian, u)) - dot(&self.linear, u) + self.constant;
        Some(quad + self.additive.value(u, &[]))
    }

    fn optimum(&self) -> Option<(&Vector<T>, T)> {
        Some((&self.optimum, self.optimal_value))
    }
}
