//! Convergence diagnostics: the Lyapunov one-step recursion checked on trajectory ensembles,
//! its coefficient sequences, a summation identity, the linear-growth Lipschitz bound, and
//! log-log rate fitting.

use crate::app::{StepSchedule, Trajectory};
use crate::bias::BiasSchedule;
use crate::error::{Error, Result};
use crate::mirror::AuxiliaryFunction;
use crate::problem::{mean_and_stderr, sampled_cost, GrowthConstants, SampledProblem};
use crate::rng::StreamRng;
use crate::scalar::Scalar;
use crate::vector::Vector;

/// Minimum number of points in a rate fit.
pub const MIN_FIT_POINTS: usize = 8;
/// Minimum span, in decades of `n`, of a rate fit.
pub const MIN_FIT_DECADES: f64 = 1.5;
/// Scenarios drawn when `J` has no closed form.
pub const LIPSCHITZ_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumIdentity<T> {
    pub lhs: T,
    pub rhs: T,
    pub discrepancy: T,
}

/// For `a_1..a_n` with `s_i = Σ_{k=n−i}^{n} a_k`, evaluates both sides of
/// `a_n = s_{n−1}/n + Σ_{i=1}^{n−1} (s_{i−1} − i·a_{n−i}) / (i(i+1))`.
pub fn sum_manip_identity<T: Scalar>(a: &[T]) -> Result<SumIdentity<T>> {
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("sequence needs at least 2 terms, got {n}")));
    }
    let at = |k: usize| a[k - 1];
    // direct evaluation of each partial sum, no running accumulation
    let s = |i: usize| (n - i..=n).map(at).sum::<T>();
    let lhs = at(n);
    let mut rhs = s(n - 1) / T::from_count(n);
    for i in 1..n {
        let fi = T::from_count(i);
        rhs += (s(i - 1) - fi * at(n - i)) / (fi * T::from_count(i + 1));
    }
    Ok(SumIdentity {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck<T> {
    /// `|J(u) − J(v)|`, estimated when `J` has no closed form.
    pub difference: T,
    /// `(c1·max(‖u‖,‖v‖) + c2)·‖u − v‖`
    pub bound: T,
    /// Three standard errors of the paired Monte Carlo estimate; zero when exact.
    pub slack: T,
    pub holds: bool,
}

/// Checks `|J(u) − J(v)| ≤ (c1·max(‖u‖,‖v‖) + c2)·‖u − v‖` in the problem's norm.
pub fn lipschitz_bound_report<T: Scalar, P: SampledProblem<T> + ?Sized>(
    problem: &P,
    u: &Vector<T>,
    v: &Vector<T>,
    c1: T,
    c2: T,
    rng: &mut StreamRng,
) -> Result<LipschitzCheck<T>> {
    let set = problem.feasible_set();
    set.require(u)?;
    set.require(v)?;
    let norm = problem.norm();
    let (us, vs) = (u.as_slice(), v.as_slice());
    let diff: Vec<T> = us.iter().zip(vs).map(|(&a, &b)| a - b).collect();
    let bound = (c1 * norm.eval(us).max(norm.eval(vs)) + c2) * norm.eval(&diff);
    let (difference, slack) = match (problem.expected_objective(us), problem.expected_objective(vs)) {
        (Some(ju), Some(jv)) => {
            let d = (ju - jv).abs();
            (d, T::lit(64.0) * T::epsilon() * (ju.abs() + jv.abs()))
        }
        _ => {
            let paired: Vec<T> = (0..LIPSCHITZ_SAMPLES)
                .map(|_| {
                    let w = problem.sampler().draw(rng);
                    sampled_cost(problem, us, &w) - sampled_cost(problem, vs, &w)
                })
                .collect();
            let (mean, se) = mean_and_stderr(&paired);
            (mean.abs(), T::lit(3.0) * se)
        }
    };
    Ok(LipschitzCheck {
        difference,
        bound,
        slack,
        holds: difference <= bound + slack,
    })
}

pub fn lipschitz_bound_check<T: Scalar, P: SampledProblem<T> + ?Sized>(
    problem: &P,
    u: &Vector<T>,
    v: &Vector<T>,
    c1: T,
    c2: T,
    rng: &mut StreamRng,
) -> Result<bool> {
    Ok(lipschitz_bound_report(problem, u, v, c1, c2, rng)?.holds)
}

/// Constants `α, β, γ, δ` of the one-step Lyapunov inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionConstants<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Scalar> RecursionConstants<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T) -> Result<Self> {
        for (name, x) in [("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta)] {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {x}")));
            }
        }
        Ok(Self { alpha, beta, gamma, delta })
    }

    /// Constants that come out of the standard proof from the growth bounds, the strong
    /// convexity modulus `b` and `‖v‖` for the reference point `v`. Zeros are floored to a
    /// tiny positive value.
    pub fn auto_estimate(growth: &GrowthConstants<T>, b: T, v_norm: T) -> Self {
        let e1 = growth.c1 + growth.d1;
        let e2 = growth.d1;
        let e3 = growth.c2 + growth.d2;
        let sixteen = T::lit(16.0);
        let floor = |x: T| x.max(T::lit(1e-12));
        Self {
            alpha: floor(sixteen * e1 * e1 / (b * b)),
            beta: floor(sixteen * e2 * e2 / (b * b)),
            gamma: floor(T::lit(4.0) / b * (e3 * e3 + T::lit(2.0) * (e1 * e1 + e2 * e2) * v_norm * v_norm)),
            delta: floor(T::lit(4.0) / b),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            alpha: self.alpha * s,
            beta: self.beta * s,
            gamma: self.gamma * s,
            delta: self.delta * s,
        }
    }
}

/// `α_k = αε_k² + (2/b)ε_kQ_k`, `β_k = βε_k²`, `γ_k = (γ + δQ_k²)ε_k² + Q_kε_k` for `k = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionCoefficients<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub gamma: Vec<T>,
    theta: T,
    nu: T,
    biased: bool,
}

impl<T: Scalar> RecursionCoefficients<T> {
    pub fn new(constants: &RecursionConstants<T>, b: T, steps: &StepSchedule<T>, bias: &BiasSchedule<T>, n: usize) -> Self {
        let two_over_b = T::lit(2.0) / b;
        let mut out = Self {
            alpha: Vec::with_capacity(n),
            beta: Vec::with_capacity(n),
            gamma: Vec::with_capacity(n),
            theta: steps.theta(),
            nu: bias.nu(),
            biased: bias.q() > T::zero(),
        };
        for k in 1..=n {
            let (e, q) = (steps.step(k), bias.magnitude(k));
            let (a, bt, g) = coefficients(constants, two_over_b, e, q);
            out.alpha.push(a);
            out.beta.push(bt);
            out.gamma.push(g);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `Σα_k < ∞`: every monomial `k^(−p)` in `α_k` has `p > 1`.
    pub fn alpha_summable(&self) -> bool {
        self.theta * T::lit(2.0) > T::one() && (!self.biased || self.theta + self.nu > T::one())
    }

    pub fn beta_summable(&self) -> bool {
        self.theta * T::lit(2.0) > T::one()
    }

    pub fn gamma_summable(&self) -> bool {
        self.alpha_summable()
    }

    pub fn all_summable(&self) -> bool {
        self.alpha_summable() && self.beta_summable() && self.gamma_summable()
    }

    /// Largest of the three partial sums over the last decade, `k ∈ (n/10, n]`.
    pub fn decade_tail(&self) -> T {
        let n = self.len();
        let from = n / 10;
        [&self.alpha, &self.beta, &self.gamma]
            .iter()
            .map(|c| c[from..].iter().copied().sum::<T>())
            .fold(T::zero(), T::max)
    }
}

fn coefficients<T: Scalar>(c: &RecursionConstants<T>, two_over_b: T, e: T, q: T) -> (T, T, T) {
    let e2 = e * e;
    (
        c.alpha * e2 + two_over_b * e * q,
        c.beta * e2,
        (c.gamma + c.delta * q * q) * e2 + q * e,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovStep<T> {
    pub k: usize,
    /// `ℓ̄_k`
    pub lhs: T,
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport<T> {
    /// Ensemble mean `ℓ̄_k = mean D_K(u*, u_k)`, `k = 0..n`.
    pub mean_trace: Vec<T>,
    pub steps: Vec<LyapunovStep<T>>,
    /// Share of `k ∈ 1..n` where the averaged inequality holds with the given constants.
    pub fraction_holding: f64,
    /// Smallest `s ≥ 0` such that constants scaled by `s` satisfy every step; infinite when
    /// no scaling does.
    pub min_scaling: T,
    pub alpha_summable: bool,
    pub beta_summable: bool,
    pub gamma_summable: bool,
}

/// Checks the ensemble-averaged one-step inequality
/// `ℓ̄_k ≤ (1 + α_k)ℓ̄_{k−1} + β_kℓ̄_k + γ_k − ε_k·mean(J(u_{k−1}) − J*)`
/// with `ε_k` and `Q_k = ‖r_k‖_*` taken from the trajectory records.
pub fn lyapunov_recursion_report<T: Scalar>(
    ensemble: &[Trajectory<T>],
    aux: &AuxiliaryFunction<T>,
    constants: &RecursionConstants<T>,
    steps: &StepSchedule<T>,
    bias: &BiasSchedule<T>,
) -> Result<LyapunovReport<T>> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory ensemble".into()))?;
    let n = first.iterations;
    let traces = |t: &Trajectory<T>| -> Result<(Vec<T>, Vec<T>)> {
        match (&t.lyapunov_trace, &t.gap_trace) {
            (Some(l), Some(g)) if t.iterations == n => Ok((l.clone(), g.clone())),
            (Some(_), Some(_)) => Err(Error::InvalidArgument("trajectories differ in length".into())),
            _ => Err(Error::InvalidArgument("trajectories carry no Lyapunov or gap trace".into())),
        }
    };
    let all: Vec<(Vec<T>, Vec<T>)> = ensemble.iter().map(traces).collect::<Result<_>>()?;
    let r = T::from_count(ensemble.len());
    let mean_at = |pick: &dyn Fn(&(Vec<T>, Vec<T>)) -> T| all.iter().map(pick).sum::<T>() / r;
    let ell: Vec<T> = (0..=n).map(|k| mean_at(&|t| t.0[k])).collect();
    let gap: Vec<T> = (0..=n).map(|k| mean_at(&|t| t.1[k])).collect();
    let eps: Vec<T> = (0..=n).map(|k| ensemble.iter().map(|t| t.records[k].epsilon).sum::<T>() / r).collect();
    let q: Vec<T> = (0..=n).map(|k| ensemble.iter().map(|t| t.records[k].bias_norm).sum::<T>() / r).collect();

    let two_over_b = T::lit(2.0) / aux.strong_convexity();
    let tol = |x: T| T::lit(1e-12) * x.abs().max(T::one());
    let mut holding = 0usize;
    let mut min_scaling = T::zero();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let (e, qk) = (eps[k], q[k]);
        let (a, b, g) = coefficients(constants, two_over_b, e, qk);
        let rhs = (T::one() + a) * ell[k - 1] + b * ell[k] + g - e * gap[k - 1];
        let lhs = ell[k];
        if lhs <= rhs + tol(rhs) {
            holding += 1;
        }
        // split rhs into the part scaled with the constants and the fixed remainder
        let fixed = (T::one() + two_over_b * e * qk) * ell[k - 1] + qk * e - e * gap[k - 1];
        let scaled = rhs - fixed;
        let excess = lhs - fixed - tol(rhs);
        if excess > T::zero() {
            let need = if scaled > T::zero() { excess / scaled } else { T::infinity() };
            min_scaling = min_scaling.max(need);
        }
        out.push(LyapunovStep { k, lhs, rhs });
    }
    let coeffs = RecursionCoefficients::new(constants, aux.strong_convexity(), steps, bias, 0);
    Ok(LyapunovReport {
        mean_trace: ell,
        steps: out,
        fraction_holding: holding as f64 / n as f64,
        min_scaling,
        alpha_summable: coeffs.alpha_summable(),
        beta_summable: coeffs.beta_summable(),
        gamma_summable: coeffs.gamma_summable(),
    })
}

/// Least-squares fit of `log gap = intercept + slope·log n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(ln n, ln gap)` of the points used.
    pub points: Vec<(f64, f64)>,
    /// Points discarded for a non-positive or non-finite gap.
    pub dropped: usize,
}

/// Fits a power law to `(n, gap)` pairs. Non-positive gaps are dropped; fewer than
/// [`MIN_FIT_POINTS`] survivors, or a span under [`MIN_FIT_DECADES`], is an error.
pub fn fit_rate(curve: &[(f64, f64)]) -> Result<RateFit> {
    let usable = log_points(curve);
    let dropped = curve.len() - usable.len();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit {
            usable: usable.len(),
            required: MIN_FIT_POINTS,
            dropped,
        });
    }
    let (lo, hi) = usable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| (lo.min(*x), hi.max(*x)));
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if decades < MIN_FIT_DECADES - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "fit window spans {decades:.3} decades, need {MIN_FIT_DECADES}"
        )));
    }
    fit_power_law(curve)
}

fn log_points(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    curve
        .iter()
        .filter(|(n, g)| *n > 0.0 && *g > 0.0 && g.is_finite() && n.is_finite())
        .map(|&(n, g)| (n.ln(), g.ln()))
        .collect()
}

/// Least squares of `ln g` on `ln n` without window requirements; needs two distinct `n`.
pub fn fit_power_law(curve: &[(f64, f64)]) -> Result<RateFit> {
    let usable = log_points(curve);
    let dropped = curve.len() - usable.len();
    if usable.len() < 2 {
        return Err(Error::DegenerateFit { usable: usable.len(), required: 2, dropped });
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct n".into()));
    }
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let (lo, hi) = usable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| (lo.min(*x), hi.max(*x)));
    Ok(RateFit {
        window: (lo.exp(), hi.exp()),
        slope,
        intercept,
        r2,
        points: usable,
        dropped,
    })
}

/// Indices of the shortest tail of `ns` (sorted ascending) that spans at least `decades`
/// and holds at least `min_points` points. Falls back to everything when `ns` is too short.
pub fn upper_window(ns: &[f64], decades: f64, min_points: usize) -> std::ops::Range<usize> {
    let Some(&top) = ns.last() else {
        return 0..0;
    };
    let cut = top / 10f64.powf(decades);
    let start = ns.iter().rposition(|&n| n <= cut * (1.0 + 1e-12)).unwrap_or(0);
    start.min(ns.len().saturating_sub(min_points))..ns.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::{default_initial_point, StochasticApp};
    use crate::feasible::FeasibleSet;
    use crate::problem::AdditiveTerm;
    use crate::problems::{make_l1_least_squares, make_stochastic_quadratic, ZooProblem};
    use crate::rng::{stream, uniform};
    use crate::scenario::ScenarioSampler;
    use proptest::prelude::*;

    #[test]
    fn identity_on_constant_and_zero_sequences() {
        let r = sum_manip_identity(&[1.0f64; 5]).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs - 1.0).abs() <= 1e-14);
        let r = sum_manip_identity(&[0.0f64; 7]).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(sum_manip_identity(&[1.0f64]).is_err());
    }

    #[test]
    fn identity_on_random_sequences() {
        let mut rng = stream(41, 0);
        for t in 0..100 {
            let n = 2 + t % 199;
            let a: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let r = sum_manip_identity(&a).unwrap();
            assert!(r.discrepancy <= 1e-10 * scale, "n={n}: {}", r.discrepancy);
        }
    }

    proptest! {
        #[test]
        fn identity_holds_for_arbitrary_sequences(a in prop::collection::vec(-1e3f64..1e3, 2..60)) {
            let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            prop_assert!(sum_manip_identity(&a).unwrap().discrepancy <= 1e-10 * scale);
        }
    }

    /// `J(u) = ½‖u‖²` with no randomness.
    #[derive(Debug)]
    struct HalfNorm {
        set: FeasibleSet<f64>,
        sampler: ScenarioSampler<f64>,
        additive: AdditiveTerm<f64>,
    }

    impl HalfNorm {
        fn new(d: usize) -> Self {
            Self {
                set: FeasibleSet::whole_space(d).unwrap(),
                sampler: ScenarioSampler::PointMass(vec![0.0]),
                additive: AdditiveTerm::Zero,
            }
        }
    }

    impl SampledProblem<f64> for HalfNorm {
        fn dim(&self) -> usize {
            self.set.dim()
        }
        fn feasible_set(&self) -> &FeasibleSet<f64> {
            &self.set
        }
        fn sampler(&self) -> &ScenarioSampler<f64> {
            &self.sampler
        }
        fn coupling_cost(&self, u: &[f64], _w: &[f64]) -> f64 {
            0.5 * u.iter().map(|x| x * x).sum::<f64>()
        }
        fn coupling_gradient(&self, u: &[f64], _w: &[f64]) -> Vec<f64> {
            u.to_vec()
        }
        fn additive(&self) -> &AdditiveTerm<f64> {
            &self.additive
        }
        fn growth(&self) -> GrowthConstants<f64> {
            GrowthConstants { c1: 1.0, c2: 0.0, d1: 0.0, d2: 0.0 }
        }
    }

    /// A zoo problem with its closed-form objective hidden, forcing the Monte Carlo path.
    struct Opaque(ZooProblem<f64>);

    impl SampledProblem<f64> for Opaque {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn feasible_set(&self) -> &FeasibleSet<f64> {
            self.0.feasible_set()
        }
        fn sampler(&self) -> &ScenarioSampler<f64> {
            self.0.sampler()
        }
        fn coupling_cost(&self, u: &[f64], w: &[f64]) -> f64 {
            self.0.coupling_cost(u, w)
        }
        fn coupling_gradient(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
            self.0.coupling_gradient(u, w)
        }
        fn additive(&self) -> &AdditiveTerm<f64> {
            self.0.additive()
        }
        fn growth(&self) -> GrowthConstants<f64> {
            self.0.growth()
        }
    }

    #[test]
    fn lipschitz_trivial_cases() {
        let p = HalfNorm::new(3);
        let mut rng = stream(0, 4);
        let u = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        assert!(lipschitz_bound_check(&p, &u, &u, 1.0, 0.0, &mut rng).unwrap());
        let set = FeasibleSet::whole_space(3).unwrap();
        for _ in 0..1000 {
            let a = set.sample_point(&mut rng, 10.0);
            let b = set.sample_point(&mut rng, 10.0);
            assert!(lipschitz_bound_check(&p, &a, &b, 1.0, 0.0, &mut rng).unwrap());
        }
    }

    #[test]
    fn lipschitz_detects_violations() {
        let p = HalfNorm::new(1);
        let mut rng = stream(0, 4);
        let (u, v) = (Vector::from_vec(vec![3.0]), Vector::from_vec(vec![1.0]));
        // |4.5 − 0.5| = 4 > (0.5·3)·2 = 3
        assert!(!lipschitz_bound_check(&p, &u, &v, 0.5, 0.0, &mut rng).unwrap());
    }

    #[test]
    fn lipschitz_on_l1_zoo_problem() {
        let p = make_l1_least_squares::<f64>(5, 0.1, 11).unwrap();
        let (c1, c2) = p.growth().combined();
        let mut rng = stream(3, 4);
        for _ in 0..1000 {
            let a = p.feasible_set().sample_point(&mut rng, 3.0);
            let b = p.feasible_set().sample_point(&mut rng, 3.0);
            assert!(lipschitz_bound_check(&p, &a, &b, c1, c2, &mut rng).unwrap());
        }
    }

    #[test]
    fn lipschitz_monte_carlo_path() {
        let p = Opaque(make_stochastic_quadratic::<f64>(3, 2, 4.0).unwrap());
        let (c1, c2) = p.growth().combined();
        let mut rng = stream(3, 4);
        for _ in 0..20 {
            let a = p.feasible_set().sample_point(&mut rng, 2.0);
            let b = p.feasible_set().sample_point(&mut rng, 2.0);
            let r = lipschitz_bound_report(&p, &a, &b, c1, c2, &mut rng).unwrap();
            assert!(r.slack > 0.0 && r.holds);
        }
    }

    #[test]
    fn summability_flags_match_exponent_conditions() {
        let c = RecursionConstants::new(1.0, 1.0, 1.0, 1.0).unwrap();
        for ti in 3..=9 {
            for ni in 0..=10 {
                let (theta, nu) = (ti as f64 / 10.0, ni as f64 / 10.0);
                let steps = StepSchedule::new(0.5, theta).unwrap();
                let bias = BiasSchedule::random_direction(0.1, nu).unwrap();
                let rc = RecursionCoefficients::new(&c, 1.0, &steps, &bias, 100);
                assert_eq!(rc.beta_summable(), theta > 0.5);
                assert_eq!(rc.all_summable(), theta > 0.5 && theta + nu > 1.0 + 1e-12, "{theta} {nu}");
                assert!(rc.alpha.iter().chain(&rc.beta).chain(&rc.gamma).all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn decade_tail_shrinks_only_when_summable() {
        let c = RecursionConstants::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let steps = StepSchedule::new(1.0, 0.9).unwrap();
        let tail = |bias: &BiasSchedule<f64>, n| RecursionCoefficients::new(&c, 1.0, &steps, bias, n).decade_tail();
        let good = BiasSchedule::random_direction(0.1, 0.5).unwrap();
        assert!(tail(&good, 100_000) < tail(&good, 1000));
        let bad = BiasSchedule::random_direction(1.0, 0.0).unwrap();
        assert!(tail(&bad, 100_000) > tail(&bad, 1000));
    }

    #[test]
    fn coefficient_values() {
        let c = RecursionConstants::<f64>::new(2.0, 3.0, 4.0, 5.0).unwrap();
        let steps = StepSchedule::new(0.5, 1.0).unwrap();
        let bias = BiasSchedule::random_direction(0.2, 1.0).unwrap();
        let rc = RecursionCoefficients::new(&c, 0.5, &steps, &bias, 2);
        // k = 2: ε = 0.25, Q = 0.1
        assert!((rc.alpha[1] - (2.0 * 0.0625 + 4.0 * 0.025)).abs() < 1e-15);
        assert!((rc.beta[1] - 3.0 * 0.0625).abs() < 1e-15);
        assert!((rc.gamma[1] - ((4.0 + 5.0 * 0.01) * 0.0625 + 0.025)).abs() < 1e-15);
    }

    #[test]
    fn report_at_optimum_is_trivial() {
        let p = ZooProblem::<f64>::quadratic_from_moments(vec![vec![2.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0], 0.0, 0.0).unwrap();
        let steps = StepSchedule::new(0.3, 0.7).unwrap();
        let app = StochasticApp::new(AuxiliaryFunction::Quadratic, steps, BiasSchedule::none());
        let ensemble: Vec<_> = (0..20).map(|s| app.run(&p, p.u_star(), 200, s).unwrap()).collect();
        let c = RecursionConstants::auto_estimate(&p.growth(), 1.0, p.u_star().norm());
        let rep = lyapunov_recursion_report(&ensemble, &AuxiliaryFunction::Quadratic, &c, &steps, &BiasSchedule::none()).unwrap();
        // u* itself carries the rounding of the linear solve
        assert!(rep.mean_trace.iter().all(|&l| l <= 1e-28), "{:?}", &rep.mean_trace[..3]);
        assert_eq!(rep.fraction_holding, 1.0);
        assert_eq!(rep.min_scaling, 0.0);
    }

    #[test]
    fn report_on_unbiased_sgd_with_generous_constants() {
        let p = make_stochastic_quadratic::<f64>(4, 0, 4.0).unwrap();
        let steps = StepSchedule::new(0.2, 0.6).unwrap();
        let app = StochasticApp::new(AuxiliaryFunction::Quadratic, steps, BiasSchedule::none());
        let u0 = default_initial_point(p.feasible_set()).unwrap();
        let ensemble: Vec<_> = (0..20).map(|s| app.run(&p, &u0, 2000, s).unwrap()).collect();
        let c = RecursionConstants::auto_estimate(&p.growth(), 1.0, p.u_star().norm()).scaled(1e3);
        let rep = lyapunov_recursion_report(&ensemble, &AuxiliaryFunction::Quadratic, &c, &steps, &BiasSchedule::none()).unwrap();
        assert!(rep.fraction_holding >= 0.99, "{}", rep.fraction_holding);
        assert!(rep.min_scaling <= 1.0);
        assert!(rep.gamma_summable);
    }

    #[test]
    fn constant_bias_raises_non_summable_flag() {
        let p = make_stochastic_quadratic::<f64>(2, 0, 2.0).unwrap();
        let steps = StepSchedule::new(0.2, 0.8).unwrap();
        let bias = BiasSchedule::random_direction(1.0, 0.0).unwrap();
        let app = StochasticApp::new(AuxiliaryFunction::Quadratic, steps, bias.clone());
        let ensemble = vec![app.run(&p, &Vector::from_vec(vec![0.0, 0.0]), 50, 0).unwrap()];
        let c = RecursionConstants::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let rep = lyapunov_recursion_report(&ensemble, &AuxiliaryFunction::Quadratic, &c, &steps, &bias).unwrap();
        assert!(!rep.gamma_summable);
        assert!(rep.beta_summable);
    }

    fn log_spaced(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect()
    }

    #[test]
    fn fit_recovers_exact_power_laws() {
        let ns = log_spaced(10.0, 1e4, 12);
        let f = fit_rate(&ns.iter().map(|&n| (n, n.powf(-0.4))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope + 0.4).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let f = fit_rate(&ns.iter().map(|&n| (n, 3.0 * n.powf(-0.25))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn fit_recovers_any_exponent(p in -2.0f64..0.5, c in 0.01f64..100.0) {
            let ns = log_spaced(3.0, 3e3, 10);
            let f = fit_rate(&ns.iter().map(|&n| (n, c * n.powf(p))).collect::<Vec<_>>()).unwrap();
            prop_assert!((f.slope - p).abs() < 1e-8);
        }
    }

    #[test]
    fn fit_drops_non_positive_gaps() {
        let ns = log_spaced(10.0, 1e4, 10);
        let mut pts: Vec<(f64, f64)> = ns.iter().map(|&n| (n, n.powf(-0.5))).collect();
        pts[3].1 = 0.0;
        let f = fit_rate(&pts).unwrap();
        assert_eq!(f.dropped, 1);
        assert_eq!(f.points.len(), 9);
        pts[4].1 = -1.0;
        pts[5].1 = f64::NAN;
        assert!(matches!(fit_rate(&pts), Err(Error::DegenerateFit { usable: 7, required: 8, dropped: 3 })));
    }

    #[test]
    fn fit_needs_enough_span() {
        let ns = log_spaced(100.0, 1000.0, 10);
        assert!(fit_rate(&ns.iter().map(|&n| (n, 1.0 / n)).collect::<Vec<_>>()).is_err());
    }

    #[test]
    fn upper_window_widens_to_minimum() {
        let ns = log_spaced(1.0, 1e4, 16);
        let w = upper_window(&ns, 1.5, 8);
        assert_eq!(w.len(), 8);
        let dense = log_spaced(1.0, 1e4, 41);
        let w = upper_window(&dense, 1.5, 8);
        assert!((dense[w.start] - 1e4 / 10f64.powf(1.5)).abs() < 1e-9);
        assert_eq!(w.len(), 16);
        // 316 sits just below 10^4 / 10^1.5, so the window starts there and spans 1.5003 decades
        let rounded = [100.0, 158.0, 251.0, 316.0, 398.0, 501.0, 631.0, 794.0, 1000.0, 1259.0, 10000.0];
        let w = upper_window(&rounded, 1.5, 3);
        assert_eq!(rounded[w.start], 316.0);
        assert!(upper_window(&[1.0, 2.0], 1.5, 8) == (0..2));
    }

    #[test]
    fn power_law_fit_without_window_rules() {
        let curve: [(f64, f64); 2] = [(10.0, 2.0 * 10f64.powf(-0.3)), (20.0, 2.0 * 20f64.powf(-0.3))];
        let f = fit_power_law(&curve).unwrap();
        assert!((f.slope + 0.3).abs() < 1e-12);
        assert!((f.intercept - 2f64.ln()).abs() < 1e-12);
        assert!(fit_power_law(&curve[..1]).is_err());
        assert!(fit_power_law(&[(5.0f64, 1.0f64), (5.0, 2.0)]).is_err());
        assert!(fit_rate(&curve).is_err());
    }
}
