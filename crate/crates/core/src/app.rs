//! The stochastic auxiliary-problem iteration, its step schedule and iterate averaging,
//! and the block-decomposed variant.
//!
//! Step `k ≥ 1` draws `w_k`, evaluates `g ∈ ∂j^c(u_{k−1}, w_k)` and `r_k`, and sets `u_k` to the
//! solution of the auxiliary problem built with step size `ε_k`. The weight of `u_k` in an
//! averaged iterate is the `ε_k` that produced it.

use rand::RngCore;
use rayon::prelude::*;

use crate::auxsolve::{solve_auxiliary, AuxiliaryInstance, SolveOptions, SolvePath};
use crate::bias::BiasSchedule;
use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::mirror::AuxiliaryFunction;
use crate::problem::{coupling_subgradient, sample_scenario, SampledProblem};
use crate::rng::TrajectoryRng;
use crate::scalar::Scalar;
use crate::scenario::Scenario;
use crate::vector::{check_dim, DualVector, Vector};

/// Iterates kept in memory when storage is automatic.
pub const AUTO_STORAGE_CAP: usize = 10_000;

/// `ε_k = c·k^(−θ)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule<T> {
    c: T,
    theta: T,
}

impl<T: Scalar> StepSchedule<T> {
    /// `c > 0`, `θ ∈ [0, 1]` (θ = 0 gives constant steps).
    pub fn new(c: T, theta: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("step constant c must be positive, got {c}")));
        }
        if !(theta >= T::zero() && theta <= T::one()) {
            return Err(Error::InvalidArgument(format!("step exponent theta must lie in [0, 1], got {theta}")));
        }
        Ok(Self { c, theta })
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn step(&self, k: usize) -> T {
        debug_assert!(k >= 1);
        self.c * T::from_count(k).powf(-self.theta)
    }

    /// Σε_k = ∞ and Σε_k² < ∞.
    pub fn conforms_a14(&self) -> bool {
        self.theta > T::lit(0.5) && self.theta <= T::one()
    }
}

/// `ε_k = c·k^(−θ)`
pub fn step_size<T: Scalar>(s: &StepSchedule<T>, k: usize) -> T {
    s.step(k)
}

/// Summability conditions of the step and bias schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conformance {
    /// Σε_k = ∞, Σε_k² < ∞ (θ > 1/2).
    pub steps: bool,
    /// Σ Q_k ε_k < ∞ (θ + ν > 1, or no bias).
    pub bias: bool,
}

impl Conformance {
    pub fn of<T: Scalar>(steps: &StepSchedule<T>, bias: &BiasSchedule<T>) -> Self {
        Self {
            steps: steps.conforms_a14(),
            bias: bias.summable_against(steps.theta()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    /// All iterates up to [`AUTO_STORAGE_CAP`], otherwise every ⌈n/cap⌉-th.
    Auto,
    All,
    Every(usize),
    /// Only `u_0`, `u_n` and checkpoint data.
    Endpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockExecution {
    Sequential,
    Reverse,
    Parallel,
}

#[derive(Debug, Clone)]
pub struct RunOptions<T> {
    pub storage: Storage,
    /// Window `[i, n]` that must survive striding.
    pub keep_window: Option<(usize, usize)>,
    /// Iterations at which `u_k` and the running average `ũ_1^k` are recorded.
    pub checkpoints: Vec<usize>,
    /// Record gap and Lyapunov traces when the problem knows its optimum.
    pub traces: bool,
    pub solve: SolveOptions<T>,
    pub blocks: BlockExecution,
}

impl<T: Scalar> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            storage: Storage::Auto,
            keep_window: None,
            checkpoints: Vec::new(),
            traces: true,
            solve: SolveOptions::default(),
            blocks: BlockExecution::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub k: usize,
    /// `ε_k`; zero for the initial point.
    pub epsilon: T,
    pub bias_norm: T,
    pub scenario_index: usize,
    pub path: Option<SolvePath>,
    pub inner_iterations: usize,
    pub vi_residual: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub n: usize,
    pub last: Vector<T>,
    /// `ũ_1^n`
    pub averaged: Vector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub seed: u64,
    pub iterations: usize,
    /// Stored `(k, u_k)`, increasing in `k`.
    pub iterates: Vec<(usize, Vector<T>)>,
    /// One record per iterate `u_0..u_n`.
    pub records: Vec<StepRecord<T>>,
    /// `J(u_k) − J*`
    pub gap_trace: Option<Vec<T>>,
    /// `D_K(u*, u_k)`
    pub lyapunov_trace: Option<Vec<T>>,
    pub checkpoints: Vec<Checkpoint<T>>,
    pub conformance: Conformance,
}

impl<T: Scalar> Trajectory<T> {
    pub fn iterate(&self, k: usize) -> Option<&Vector<T>> {
        self.iterates
            .binary_search_by_key(&k, |(i, _)| *i)
            .ok()
            .map(|pos| &self.iterates[pos].1)
    }

    pub fn last(&self) -> &Vector<T> {
        &self.iterates.last().expect("trajectory stores its last iterate").1
    }

    pub fn checkpoint(&self, n: usize) -> Option<&Checkpoint<T>> {
        self.checkpoints.iter().find(|c| c.n == n)
    }
}

/// `ũ_i^n = Σ_{k=i..n} η_k u_k` with `η_k = ε_k / Σ_{l=i..n} ε_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedIterate<T> {
    pub first: usize,
    pub last: usize,
    pub weights: Vec<T>,
    pub value: Vector<T>,
}

pub fn averaged_iterate<T: Scalar>(t: &Trajectory<T>, first: usize, last: usize) -> Result<AveragedIterate<T>> {
    if first < 1 || first > last || last > t.iterations {
        return Err(Error::InvalidArgument(format!(
            "averaging window {first}..={last} outside 1..={}",
            t.iterations
        )));
    }
    let total: T = (first..=last).map(|k| t.records[k].epsilon).sum();
    let weights: Vec<T> = (first..=last).map(|k| t.records[k].epsilon / total).collect();
    let mut acc: Option<Vec<T>> = None;
    for (k, &w) in (first..=last).zip(&weights) {
        let u = t.iterate(k).ok_or(Error::WindowNotStored { first, last })?;
        match acc.as_mut() {
            None => acc = Some(u.as_slice().iter().map(|&x| w * x).collect()),
            Some(a) => a.iter_mut().zip(u.as_slice()).for_each(|(a, &x)| *a += w * x),
        }
    }
    let norm = t.last().norm_tag();
    Ok(AveragedIterate {
        first,
        last,
        weights,
        value: Vector::raw(acc.expect("non-empty window"), norm),
    })
}

/// Centroid of the simplex; projection of the origin for every other set.
pub fn default_initial_point<T: Scalar>(set: &FeasibleSet<T>) -> Result<Vector<T>> {
    let d = set.dim();
    match set {
        FeasibleSet::Simplex { .. } => Ok(Vector::raw(vec![T::one() / T::from_count(d); d], Default::default())),
        _ => set.project(&Vector::zeros(d, Default::default())),
    }
}

/// Stochastic APP with a fixed auxiliary function, step schedule and bias model.
#[derive(Debug, Clone)]
pub struct StochasticApp<T> {
    pub aux: AuxiliaryFunction<T>,
    pub steps: StepSchedule<T>,
    pub bias: BiasSchedule<T>,
    pub options: RunOptions<T>,
}

struct StepOutcome<T> {
    next: Vector<T>,
    path: SolvePath,
    inner_iterations: usize,
    vi_residual: Option<T>,
}

impl<T: Scalar> StochasticApp<T> {
    pub fn new(aux: AuxiliaryFunction<T>, steps: StepSchedule<T>, bias: BiasSchedule<T>) -> Self {
        Self {
            aux,
            steps,
            bias,
            options: RunOptions::default(),
        }
    }

    pub fn with_options(mut self, options: RunOptions<T>) -> Self {
        self.options = options;
        self
    }

    pub fn conformance(&self) -> Conformance {
        Conformance::of(&self.steps, &self.bias)
    }

    /// Runs `n` iterations from `u0`; deterministic in `seed`.
    pub fn run<P: SampledProblem<T> + ?Sized>(&self, problem: &P, u0: &Vector<T>, n: usize, seed: u64) -> Result<Trajectory<T>> {
        let set = problem.feasible_set();
        let additive = problem.additive();
        self.drive(problem, u0, n, seed, |anchor, direction, epsilon, w, solve| {
            let inst = AuxiliaryInstance {
                aux: &self.aux,
                set,
                anchor,
                direction,
                epsilon,
                additive,
                scenario: w.as_slice(),
            };
            let report = solve_auxiliary(&inst, solve)?;
            Ok(StepOutcome {
                next: report.solution,
                path: report.path,
                inner_iterations: report.inner_iterations,
                vi_residual: report.vi_residual,
            })
        })
    }

    /// Block-decomposed run: one scenario, one full subgradient and one bias draw per
    /// iteration, then independent per-block auxiliary solves. Requires an additive `K`, a
    /// product feasible set and an additive `j^a` over the same partition.
    pub fn run_decomposed<P: SampledProblem<T> + ?Sized>(
        &self,
        problem: &P,
        u0: &Vector<T>,
        n: usize,
        seed: u64,
    ) -> Result<Trajectory<T>> {
        let (parts, partition) = self
            .aux
            .blocks()
            .ok_or_else(|| Error::BlockMismatch("decomposition needs an additive auxiliary function".into()))?;
        check_dim(problem.dim(), partition.dim()).map_err(|e| Error::BlockMismatch(e.to_string()))?;
        let sets = problem.feasible_set().split(partition)?;
        let additives = problem.additive().split(partition)?;
        let ranges: Vec<_> = partition.blocks().collect();
        let execution = self.options.blocks;

        self.drive(problem, u0, n, seed, |anchor, direction, epsilon, w, solve| {
            let solve_block = |i: usize| {
                let r = ranges[i].clone();
                let a = anchor.slice(r.clone());
                let d = direction.slice(r);
                let inst = AuxiliaryInstance {
                    aux: &parts[i],
                    set: &sets[i],
                    anchor: &a,
                    direction: &d,
                    epsilon,
                    additive: &additives[i],
                    scenario: w.as_slice(),
                };
                solve_auxiliary(&inst, solve)
            };
            let nb = ranges.len();
            let reports: Vec<_> = match execution {
                BlockExecution::Sequential => (0..nb).map(solve_block).collect::<Result<_>>()?,
                BlockExecution::Reverse => {
                    let mut out = (0..nb).rev().map(|i| solve_block(i).map(|r| (i, r))).collect::<Result<Vec<_>>>()?;
                    out.sort_by_key(|(i, _)| *i);
                    out.into_iter().map(|(_, r)| r).collect()
                }
                BlockExecution::Parallel => (0..nb).into_par_iter().map(solve_block).collect::<Result<_>>()?,
            };
            let path = if reports.iter().all(|r| r.path.is_closed_form()) {
                reports[0].path
            } else {
                SolvePath::InnerIterative
            };
            let inner_iterations = reports.iter().map(|r| r.inner_iterations).sum();
            let vi_residual = reports
                .iter()
                .map(|r| r.vi_residual)
                .try_fold(T::zero(), |m, v| v.map(|v| m + v));
            let blocks: Vec<Vector<T>> = reports.into_iter().map(|r| r.solution).collect();
            Ok(StepOutcome {
                next: Vector::concat(&blocks),
                path,
                inner_iterations,
                vi_residual,
            })
        })
    }

    fn drive<P, F>(&self, problem: &P, u0: &Vector<T>, n: usize, seed: u64, mut step: F) -> Result<Trajectory<T>>
    where
        P: SampledProblem<T> + ?Sized,
        F: FnMut(&Vector<T>, &DualVector<T>, T, &Scenario<T>, &SolveOptions<T>) -> Result<StepOutcome<T>>,
    {
        if n < 1 {
            return Err(Error::InvalidArgument("at least one iteration is required".into()));
        }
        let d = problem.dim();
        check_dim(d, u0.dim())?;
        problem.feasible_set().require(u0)?;
        let norm = problem.norm();
        let u0 = u0.clone().with_norm(norm);

        let stride = match self.options.storage {
            Storage::All => 1,
            Storage::Every(s) => s.max(1),
            Storage::Endpoints => usize::MAX,
            Storage::Auto if n <= AUTO_STORAGE_CAP => 1,
            Storage::Auto => n.div_ceil(AUTO_STORAGE_CAP),
        };
        let keep = |k: usize| {
            k == 0
                || k == n
                || (stride != usize::MAX && k % stride == 0)
                || self.options.keep_window.is_some_and(|(a, b)| (a..=b).contains(&k))
        };

        let optimum = problem.optimum();
        let want_traces = self.options.traces && optimum.is_some();
        let gap_of = |u: &Vector<T>| -> Option<T> {
            let (_, jstar) = optimum?;
            problem.expected_objective(u.as_slice()).map(|j| j - jstar)
        };
        let lyapunov_of = |u: &Vector<T>| -> Result<Option<T>> {
            match optimum {
                Some((ustar, _)) => Ok(Some(self.aux.bregman_slice(ustar.as_slice(), u.as_slice())?)),
                None => Ok(None),
            }
        };

        let mut gap_trace = want_traces.then(Vec::new).filter(|_| gap_of(&u0).is_some());
        let mut lyapunov_trace = want_traces.then(Vec::new);
        let push_traces = |u: &Vector<T>, gaps: &mut Option<Vec<T>>, lyap: &mut Option<Vec<T>>| -> Result<()> {
            if let Some(g) = gaps.as_mut() {
                g.push(gap_of(u).expect("gap availability fixed per problem"));
            }
            if let Some(l) = lyap.as_mut() {
                l.push(lyapunov_of(u)?.expect("optimum known"));
            }
            Ok(())
        };
        push_traces(&u0, &mut gap_trace, &mut lyapunov_trace)?;

        let mut checkpoints_wanted: Vec<usize> = self.options.checkpoints.iter().copied().filter(|&c| c >= 1 && c <= n).collect();
        checkpoints_wanted.sort_unstable();
        checkpoints_wanted.dedup();
        let mut next_checkpoint = checkpoints_wanted.iter().peekable();
        let mut checkpoints = Vec::with_capacity(checkpoints_wanted.len());
        let mut weighted_sum = vec![T::zero(); d];
        let mut weight_total = T::zero();

        let mut rng = TrajectoryRng::new(seed);
        let mut iterates = vec![(0, u0.clone())];
        let mut records = Vec::with_capacity(n + 1);
        records.push(StepRecord {
            k: 0,
            epsilon: T::zero(),
            bias_norm: T::zero(),
            scenario_index: 0,
            path: None,
            inner_iterations: 0,
            vi_residual: None,
        });

        let mut u = u0;
        let mut solve = self.options.solve;
        for k in 1..=n {
            let w = sample_scenario(problem, k, &mut rng.scenarios);
            let g = coupling_subgradient(problem, &u, &w).map_err(|e| Error::at_iteration(k, e))?;
            let r = self.bias.draw(k, d, norm, &mut rng.bias);
            let direction = g.add(&r)?;
            let epsilon = self.steps.step(k);
            if solve.verify {
                solve.probe_seed = rng.probes.next_u64();
            }
            let outcome = step(&u, &direction, epsilon, &w, &solve).map_err(|e| Error::at_iteration(k, e))?;
            if !outcome.next.is_finite() {
                return Err(Error::at_iteration(k, Error::NonFiniteValue("iterate".into())));
            }
            u = outcome.next.with_norm(norm);

            weight_total += epsilon;
            weighted_sum.iter_mut().zip(u.as_slice()).for_each(|(a, &x)| *a += epsilon * x);
            if next_checkpoint.peek() == Some(&&k) {
                next_checkpoint.next();
                checkpoints.push(Checkpoint {
                    n: k,
                    last: u.clone(),
                    averaged: Vector::raw(weighted_sum.iter().map(|&s| s / weight_total).collect(), norm),
                });
            }

            push_traces(&u, &mut gap_trace, &mut lyapunov_trace).map_err(|e| Error::at_iteration(k, e))?;
            records.push(StepRecord {
                k,
                epsilon,
                bias_norm: r.dual_norm(),
                scenario_index: w.index,
                path: Some(outcome.path),
                inner_iterations: outcome.inner_iterations,
                vi_residual: outcome.vi_residual,
            });
            if keep(k) {
                iterates.push((k, u.clone()));
            }
        }

        Ok(Trajectory {
            seed,
            iterations: n,
            iterates,
            records,
            gap_trace,
            lyapunov_trace,
            checkpoints,
            conformance: self.conformance(),
        })
    }
}
