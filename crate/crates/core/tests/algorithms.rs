use approx::assert_relative_eq;

use app_optim::app::{averaged_iterate, default_initial_point, RunOptions, Storage};
use app_optim::diagnostics::{lyapunov_recursion_report, RecursionConstants};
use app_optim::{
    bregman, make_block_coupled, make_l1_least_squares, make_simplex_risk, make_stochastic_quadratic, AuxiliaryFunction,
    AuxiliaryFunction64, BiasSchedule, SampledProblem, StepSchedule, StochasticApp, StochasticApp64, Vector, Vector32,
    Vector64,
};

fn app(aux: AuxiliaryFunction64, c: f64, theta: f64) -> StochasticApp64 {
    StochasticApp::new(aux, StepSchedule::new(c, theta).unwrap(), BiasSchedule::none())
}

#[test]
fn proximal_sgd_approaches_lasso_solution() {
    let p = make_l1_least_squares::<f64>(6, 0.1, 2).unwrap();
    let u0 = Vector64::from_vec(vec![0.0; 6]);
    let a = app(AuxiliaryFunction::Quadratic, 0.1, 0.6);
    let (mut start, mut end) = (0.0, 0.0);
    for seed in 0..10 {
        let t = a.run(&p, &u0, 5000, seed).unwrap();
        let gaps = t.gap_trace.unwrap();
        start += gaps[0];
        end += gaps[5000];
    }
    assert!(end < 0.01 * start, "{end} vs {start}");
}

#[test]
fn mirror_descent_stays_on_simplex_and_improves() {
    let p = make_simplex_risk::<f64>(8, 4).unwrap();
    let u0 = default_initial_point(p.feasible_set()).unwrap();
    let t = app(AuxiliaryFunction::NegativeEntropy, 0.5, 0.6).run(&p, &u0, 4000, 1).unwrap();
    for (_, u) in &t.iterates {
        assert_relative_eq!(u.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(u.as_slice().iter().all(|&x| x > 0.0));
    }
    let gaps = t.gap_trace.unwrap();
    assert!(gaps[4000] < gaps[0]);
}

#[test]
fn averaged_iterate_matches_checkpoint_average() {
    let p = make_stochastic_quadratic::<f64>(5, 1, 4.0).unwrap();
    let a = StochasticApp {
        options: RunOptions { checkpoints: vec![10, 100, 500], ..Default::default() },
        ..app(AuxiliaryFunction::Quadratic, 0.2, 0.7)
    };
    let t = a.run(&p, &Vector::from_vec(vec![1.0; 5]), 500, 3).unwrap();
    for n in [10, 100, 500] {
        let direct = averaged_iterate(&t, 1, n).unwrap();
        let cp = t.checkpoint(n).unwrap();
        assert!(cp.averaged.max_abs_diff(&direct.value) < 1e-12);
        assert_eq!(&cp.last, t.iterate(n).unwrap());
    }
}

#[test]
fn endpoint_storage_keeps_first_and_last() {
    let p = make_stochastic_quadratic::<f64>(3, 1, 2.0).unwrap();
    let a = StochasticApp {
        options: RunOptions { storage: Storage::Endpoints, ..Default::default() },
        ..app(AuxiliaryFunction::Quadratic, 0.2, 0.7)
    };
    let full = app(AuxiliaryFunction::Quadratic, 0.2, 0.7).run(&p, &Vector::from_vec(vec![0.0; 3]), 200, 0).unwrap();
    let t = a.run(&p, &Vector::from_vec(vec![0.0; 3]), 200, 0).unwrap();
    assert_eq!(t.iterates.len(), 2);
    assert_eq!(t.last(), full.last());
    assert_eq!(t.records.len(), 201);
}

#[test]
fn lyapunov_trace_is_bregman_to_optimum() {
    let p = make_block_coupled::<f64>(3, 3, 0.4, 2).unwrap();
    let aux = AuxiliaryFunction::additive(
        vec![AuxiliaryFunction::Quadratic, AuxiliaryFunction::Quadratic],
        p.partition().unwrap().clone(),
    )
    .unwrap();
    let t = app(aux.clone(), 0.3, 0.6).run_decomposed(&p, &Vector::from_vec(vec![0.0; 6]), 300, 4).unwrap();
    let lyap = t.lyapunov_trace.as_ref().unwrap();
    for k in [0, 1, 150, 300] {
        let expect = bregman(&aux, p.u_star(), t.iterate(k).unwrap()).unwrap();
        assert_relative_eq!(lyap[k], expect, max_relative = 1e-12);
    }
}

#[test]
fn lyapunov_report_on_unbiased_runs() {
    let p = make_stochastic_quadratic::<f64>(4, 2, 3.0).unwrap();
    let a = app(AuxiliaryFunction::Quadratic, 0.2, 0.6);
    let runs: Vec<_> = (0..10).map(|s| a.run(&p, &Vector::from_vec(vec![1.0; 4]), 400, s).unwrap()).collect();
    let v_norm = p.u_star().norm();
    let constants = RecursionConstants::auto_estimate(&p.growth(), 1.0, v_norm).scaled(1e3);
    let report = lyapunov_recursion_report(&runs, &a.aux, &constants, &a.steps, &a.bias).unwrap();
    assert_eq!(report.mean_trace.len(), 401);
    assert!(report.fraction_holding >= 0.99, "{}", report.fraction_holding);
}

#[test]
fn single_precision_run() {
    let p = make_stochastic_quadratic::<f32>(4, 1, 3.0).unwrap();
    let a = StochasticApp::new(
        AuxiliaryFunction::<f32>::Quadratic,
        StepSchedule::new(0.2f32, 0.6).unwrap(),
        BiasSchedule::none(),
    );
    let t = a.run(&p, &Vector32::from_vec(vec![1.0; 4]), 2000, 0).unwrap();
    let gaps = t.gap_trace.unwrap();
    assert!(gaps[2000] < 0.05 * gaps[0], "{} vs {}", gaps[2000], gaps[0]);
    let p64 = make_stochastic_quadratic::<f64>(4, 1, 3.0).unwrap();
    for (a, b) in p.u_star().as_slice().iter().zip(p64.u_star().as_slice()) {
        assert_relative_eq!(*a as f64, *b, max_relative = 1e-5, epsilon = 1e-6);
    }
}
