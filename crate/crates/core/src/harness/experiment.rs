//! Replicated runs and gap estimation at checkpoints.

use rayon::prelude::*;

use crate::app::{default_initial_point, RunOptions, StepSchedule, StochasticApp, Storage};
use crate::bias::BiasSchedule;
use crate::diagnostics::{fit_rate, upper_window, RateFit, MIN_FIT_DECADES, MIN_FIT_POINTS};
use crate::error::{Error, Result};
use crate::mirror::AuxiliaryFunction;
use crate::problem::SampledProblem;
use crate::problems::{make_block_coupled, make_l1_least_squares, make_simplex_risk, make_stochastic_quadratic, ZooProblem};

use super::config::{AuxKind, BiasKind, ExperimentConfig, ProblemSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub n: usize,
    pub gap_avg_mean: f64,
    pub gap_avg_se: f64,
    pub gap_last_mean: f64,
    pub gap_last_se: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapTable {
    pub rows: Vec<GapRow>,
}

impl GapTable {
    /// Rows whose mean gap falls more than three standard errors below zero.
    pub fn sanity_violations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.gap_avg_mean < -3.0 * r.gap_avg_se || r.gap_last_mean < -3.0 * r.gap_last_se)
            .map(|r| r.n)
            .collect()
    }

    fn curve(&self, pick: impl Fn(&GapRow) -> f64) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.n as f64, pick(r))).collect()
    }

    pub fn averaged_curve(&self) -> Vec<(f64, f64)> {
        self.curve(|r| r.gap_avg_mean)
    }

    pub fn last_curve(&self) -> Vec<(f64, f64)> {
        self.curve(|r| r.gap_last_mean)
    }
}

/// Fit of one gap series, or the reason it could not be fitted.
pub type SeriesFit = std::result::Result<RateFit, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct RateFits {
    pub averaged: SeriesFit,
    pub last: SeriesFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub table: GapTable,
    pub fits: RateFits,
    /// First failing replication and its error; the table then pools the others.
    pub failure: Option<(usize, String)>,
}

/// Per-replication gaps `(J(ũ_1^n) − J*, J(u_n) − J*)` at each checkpoint.
pub type ReplicationGaps = Vec<(f64, f64)>;

pub fn build_problem(spec: &ProblemSpec) -> Result<ZooProblem<f64>> {
    match *spec {
        ProblemSpec::StochasticQuadratic { dim, kappa, seed } => make_stochastic_quadratic(dim, seed, kappa),
        ProblemSpec::L1LeastSquares { dim, lambda, seed } => make_l1_least_squares(dim, lambda, seed),
        ProblemSpec::SimplexRisk { dim, seed } => make_simplex_risk(dim, seed),
        ProblemSpec::BlockCoupled { d1, d2, rho, seed } => make_block_coupled(d1, d2, rho, seed),
    }
}

fn build_aux(cfg: &ExperimentConfig, problem: &ZooProblem<f64>) -> Result<AuxiliaryFunction<f64>> {
    let base = match cfg.aux {
        Some(AuxKind::Quadratic) => AuxiliaryFunction::Quadratic,
        Some(AuxKind::Entropy) => AuxiliaryFunction::NegativeEntropy,
        None => problem
            .recommended_aux()
            .into_iter()
            .find(|k| k.blocks().is_none())
            .unwrap_or(AuxiliaryFunction::Quadratic),
    };
    if !cfg.decomposed {
        return Ok(base);
    }
    let partition = problem
        .partition()
        .ok_or_else(|| Error::BlockMismatch(format!("problem {} has no block structure", problem.name())))?;
    AuxiliaryFunction::additive(vec![base; partition.len()], partition.clone())
}

fn build_bias(cfg: &ExperimentConfig, dim: usize) -> Result<BiasSchedule<f64>> {
    let b = &cfg.bias;
    match b.mode {
        BiasKind::None => Ok(BiasSchedule::none()),
        BiasKind::Random => BiasSchedule::random_direction(b.q, b.nu),
        BiasKind::Deterministic => {
            let direction = match &b.direction {
                Some(d) if d.len() != dim => return Err(Error::DimensionMismatch { expected: dim, found: d.len() }),
                Some(d) => d.clone(),
                None => {
                    let mut e1 = vec![0.0; dim];
                    e1[0] = 1.0;
                    e1
                }
            };
            BiasSchedule::deterministic(direction, b.q, b.nu)
        }
    }
}

/// The configured algorithm, ready to run on the configured problem.
pub fn build_app(cfg: &ExperimentConfig, problem: &ZooProblem<f64>) -> Result<StochasticApp<f64>> {
    let app = StochasticApp::new(
        build_aux(cfg, problem)?,
        StepSchedule::new(cfg.c, cfg.theta)?,
        build_bias(cfg, problem.dim())?,
    );
    Ok(app.with_options(RunOptions {
        storage: Storage::Endpoints,
        checkpoints: cfg.checkpoints.clone(),
        traces: false,
        ..RunOptions::default()
    }))
}

/// Runs replication `r` (seed `seed_base + r`) and evaluates the exact gap at every checkpoint.
pub fn run_replication(cfg: &ExperimentConfig, problem: &ZooProblem<f64>, app: &StochasticApp<f64>, r: usize) -> Result<ReplicationGaps> {
    let u0 = default_initial_point(problem.feasible_set())?;
    let seed = cfg.seed.wrapping_add(r as u64);
    let t = if cfg.decomposed {
        app.run_decomposed(problem, &u0, cfg.iterations, seed)?
    } else {
        app.run(problem, &u0, cfg.iterations, seed)?
    };
    let jstar = problem.j_star();
    let gap = |u: &[f64]| -> Result<f64> {
        problem
            .expected_objective(u)
            .map(|j| j - jstar)
            .ok_or_else(|| Error::InvalidArgument("problem has no closed-form objective".into()))
    };
    t.checkpoints
        .iter()
        .map(|c| Ok((gap(c.averaged.as_slice())?, gap(c.last.as_slice())?)))
        .collect()
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pools replications in index order.
pub fn aggregate(checkpoints: &[usize], replications: &[ReplicationGaps]) -> GapTable {
    if replications.is_empty() {
        return GapTable::default();
    }
    let rows = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let avg: Vec<f64> = replications.iter().map(|r| r[i].0).collect();
            let last: Vec<f64> = replications.iter().map(|r| r[i].1).collect();
            let (am, ase) = mean_se(&avg);
            let (lm, lse) = mean_se(&last);
            GapRow {
                n,
                gap_avg_mean: am,
                gap_avg_se: ase,
                gap_last_mean: lm,
                gap_last_se: lse,
                replications: replications.len(),
            }
        })
        .collect();
    GapTable { rows }
}

/// Power-law fit over the checkpoints in the upper 1.5 decades, widened to 8 points.
pub fn fit_upper(curve: &[(f64, f64)]) -> SeriesFit {
    let ns: Vec<f64> = curve.iter().map(|p| p.0).collect();
    let window = upper_window(&ns, MIN_FIT_DECADES, MIN_FIT_POINTS);
    fit_rate(&curve[window]).map_err(|e| e.to_string())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let problem = build_problem(&cfg.problem)?;
    let app = build_app(cfg, &problem)?;
    let results: Vec<Result<ReplicationGaps>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, &problem, &app, r))
        .collect();
    let mut failure = None;
    let mut good = Vec::with_capacity(results.len());
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(g) => good.push(g),
            Err(e) if failure.is_none() => failure = Some((r, e.to_string())),
            Err(_) => {}
        }
    }
    let table = aggregate(&cfg.checkpoints, &good);
    let fits = RateFits {
        averaged: fit_upper(&table.averaged_curve()),
        last: fit_upper(&table.last_curve()),
    };
    Ok(ExperimentOutcome { table, fits, failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;

    fn config(extra: &str) -> ExperimentConfig {
        parse_config(&format!(
            "[problem]\nname = stochastic_quadratic\ndim = 3\nkappa = 3\nseed = 1\n[algorithm]\nc = 0.3\ntheta = 0.6\niterations = 400\nreplications = 6\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn deterministic_problem_reproducible() {
        let mut cfg = config("");
        cfg.replications = 1;
        cfg.iterations = 10;
        cfg.checkpoints = vec![1, 5, 10];
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.table.rows.len(), 3);
        assert!(a.failure.is_none());
    }

    #[test]
    fn split_replications_pool_to_the_same_means() {
        let cfg = config("");
        let problem = build_problem(&cfg.problem).unwrap();
        let app = build_app(&cfg, &problem).unwrap();
        let all: Vec<_> = (0..6).map(|r| run_replication(&cfg, &problem, &app, r).unwrap()).collect();
        let mut shifted = cfg.clone();
        shifted.seed = 3;
        let second: Vec<_> = (0..3).map(|r| run_replication(&shifted, &problem, &app, r).unwrap()).collect();
        assert_eq!(&all[3..], &second[..]);
        let pooled = aggregate(&cfg.checkpoints, &all);
        let whole = run_experiment(&cfg).unwrap().table;
        for (p, w) in pooled.rows.iter().zip(&whole.rows) {
            assert!((p.gap_avg_mean - w.gap_avg_mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn gaps_are_sane_and_fits_exist() {
        let out = run_experiment(&config("checkpoint_count = 12\n")).unwrap();
        assert!(out.table.sanity_violations().is_empty());
        assert!(out.fits.averaged.is_ok());
        assert!(out.table.rows.iter().all(|r| r.replications == 6));
    }

    #[test]
    fn decomposed_needs_blocks() {
        let cfg = config("decomposed = true\n");
        assert!(matches!(run_experiment(&cfg), Err(Error::BlockMismatch(_))));
    }

    #[test]
    fn deterministic_bias_direction_dimension_checked() {
        let cfg = config("[bias]\nmode = deterministic\nq = 0.1\ndirection = 1, 0\n");
        assert!(matches!(run_experiment(&cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn failing_replications_are_reported() {
        // entropy K has no solver on the whole space
        let cfg = config("aux = entropy\n");
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.failure.as_ref().map(|f| f.0), Some(0));
        assert!(out.table.rows.is_empty());
    }
}
