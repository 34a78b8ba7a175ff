//! Interior-point kernel checks against closed forms and grid oracles.

use iscsc_core::config::SolverOptions;
use iscsc_core::solver::{
    feasibility_init, solve, AffineConstraint, AffineMatrixExpr, BoxBound, ConicProblem,
    HermBasis, LinearObjective, NegTraceInverseObjective, PsdConstraint, QuadDiag,
    QuadDiagObjective, SolveStatus, SparseAffine,
};
use nalgebra::DVector;
use std::sync::Arc;

type RVec = DVector<f64>;

fn opts() -> SolverOptions<f64> {
    SolverOptions::default()
}

#[test]
fn box_quadratic_recovers_unconstrained_optimum() {
    // maximize -((x0 - 0.3)^2 + (x1 + 0.7)^2) over a box containing the peak
    let objective = QuadDiagObjective(QuadDiag {
        linear: SparseAffine::new(vec![(0, 0.6), (1, -1.4)], 0.0),
        diag: vec![(0, -2.0), (1, -2.0)],
    });
    let problem = ConicProblem {
        dim: 2,
        objective: Box::new(objective),
        psd: vec![],
        scalars: vec![],
        boxes: vec![
            BoxBound {
                index: 0,
                lo: -1.0,
                hi: 1.0,
            },
            BoxBound {
                index: 1,
                lo: -1.0,
                hi: 1.0,
            },
        ],
        initial: RVec::from_vec(vec![0.0, 0.0]),
    };
    let report = solve(&problem, &opts()).unwrap();
    assert_eq!(report.status, SolveStatus::Optimal);
    assert!((report.x[0] - 0.3).abs() < 1e-5, "x0 = {}", report.x[0]);
    assert!((report.x[1] + 0.7).abs() < 1e-5, "x1 = {}", report.x[1]);
}

fn herm2() -> Arc<HermBasis> {
    Arc::new(HermBasis::new(2))
}

/// trace functional of a Hermitian block: coefficients 1 on the diagonal
fn trace_affine(offset: usize, n: usize, scale: f64, constant: f64) -> SparseAffine<f64> {
    SparseAffine::new((0..n).map(|i| (offset + i, scale)).collect(), constant)
}

#[test]
fn trace_maximization_saturates_budget() {
    // maximize tr(W) s.t. W >= 0, tr(W) <= P
    let basis = herm2();
    let p = 3.7;
    let problem = ConicProblem {
        dim: basis.len(),
        objective: Box::new(LinearObjective(trace_affine(0, 2, 1.0, 0.0))),
        psd: vec![PsdConstraint {
            expr: AffineMatrixExpr::from_blocks(basis.clone(), vec![(0, 1.0)]),
        }],
        scalars: vec![Box::new(AffineConstraint(trace_affine(0, 2, -1.0, p)))],
        boxes: vec![],
        initial: {
            let mut x = RVec::zeros(basis.len());
            x[0] = 0.1;
            x[1] = 0.1;
            x
        },
    };
    let report = solve(&problem, &opts()).unwrap();
    assert_eq!(report.status, SolveStatus::Optimal);
    assert!((report.objective - p).abs() < 1e-4, "tr = {}", report.objective);
    // barrier path keeps every stage objective non-decreasing
    for w in report.stage_objectives.windows(2) {
        assert!(w[1] >= w[0] - 1e-8);
    }
}

#[test]
fn trace_inverse_minimization_matches_closed_form_and_grid() {
    // minimize tr(R^{-1}) s.t. tr(R) <= P over 2x2 Hermitian: R = (P/2) I, value 4/P
    let basis = herm2();
    let p = 1.3;
    let expr = AffineMatrixExpr::from_blocks(basis.clone(), vec![(0, 1.0)]);
    let problem = ConicProblem {
        dim: basis.len(),
        objective: Box::new(NegTraceInverseObjective::new(expr.clone())),
        psd: vec![PsdConstraint { expr }],
        scalars: vec![Box::new(AffineConstraint(trace_affine(0, 2, -1.0, p)))],
        boxes: vec![],
        initial: {
            let mut x = RVec::zeros(basis.len());
            x[0] = 0.2;
            x[1] = 0.3;
            x[2] = 0.05;
            x[3] = -0.04;
            x
        },
    };
    let report = solve(&problem, &opts()).unwrap();
    assert_eq!(report.status, SolveStatus::Optimal);
    let value = -report.objective;
    assert!((value - 4.0 / p).abs() < 1e-4, "tr inv = {value}");
    assert!((report.x[0] - p / 2.0).abs() < 1e-3);
    assert!((report.x[1] - p / 2.0).abs() < 1e-3);
    assert!(report.x[2].abs() < 1e-3 && report.x[3].abs() < 1e-3);

    // grid oracle over the eigenvalues: min 1/a + 1/b s.t. a + b <= P
    let mut best = f64::INFINITY;
    let steps = 4001;
    for i in 1..steps {
        let a = p * i as f64 / steps as f64;
        let b = p - a;
        if b <= 0.0 {
            continue;
        }
        best = best.min(1.0 / a + 1.0 / b);
    }
    assert!((value - best).abs() < 1e-4, "kernel {value} vs grid {best}");
}

#[test]
fn optimal_points_respect_all_constraints() {
    let basis = herm2();
    let p = 2.0;
    let expr = AffineMatrixExpr::from_blocks(basis.clone(), vec![(0, 1.0)]);
    let problem = ConicProblem {
        dim: basis.len(),
        objective: Box::new(LinearObjective(SparseAffine::new(vec![(2, 1.0)], 0.0))),
        psd: vec![PsdConstraint { expr }],
        scalars: vec![Box::new(AffineConstraint(trace_affine(0, 2, -1.0, p)))],
        boxes: vec![],
        initial: {
            let mut x = RVec::zeros(basis.len());
            x[0] = 0.5;
            x[1] = 0.5;
            x
        },
    };
    let report = solve(&problem, &opts()).unwrap();
    assert_eq!(report.status, SolveStatus::Optimal);
    assert!(report.constraint_violation <= 1e-8);
    assert!(report.kkt_residual <= 1e-6);
    // off-diagonal magnitude is capped by the diagonal at the PSD boundary
    let m = HermBasis::new(2).to_matrix(report.x.as_slice());
    let min_eig = m
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    assert!(min_eig >= -1e-8);
}

#[test]
fn feasibility_init_accepts_interior_and_rejects_empty() {
    let basis = herm2();
    let p = 1.0;
    let make = |bound: f64, start_scale: f64| -> ConicProblem<'static, f64> {
        let expr = AffineMatrixExpr::from_blocks(basis.clone(), vec![(0, 1.0)]);
        ConicProblem {
            dim: basis.len(),
            objective: Box::new(LinearObjective(SparseAffine::constant(0.0))),
            psd: vec![PsdConstraint { expr: expr.clone() }],
            scalars: vec![
                Box::new(AffineConstraint(trace_affine(0, 2, -1.0, p))),
                Box::new(iscsc_core::solver::TraceInverseBound { expr, bound }),
            ],
            boxes: vec![],
            initial: {
                let mut x = RVec::zeros(basis.len());
                x[0] = start_scale;
                x[1] = start_scale;
                x
            },
        }
    };

    // isotropic start is strictly feasible for a loose bound
    let problem = make(10.0, 0.45);
    let x = feasibility_init(&problem, &opts()).unwrap();
    assert!(problem.slater_margin(&x) >= 1e-8);

    // bound below the isotropic optimum 4/P: no interior exists
    let problem = make(0.9 * 4.0 / p, 0.45);
    assert!(feasibility_init(&problem, &opts()).is_err());

    // feasible problem, infeasible start: phase-I must recover a point
    let problem = make(10.0, 0.05); // tr inv = 40 > 10 at the start
    let x = feasibility_init(&problem, &opts()).unwrap();
    assert!(problem.slater_margin(&x) >= 1e-8);
}
