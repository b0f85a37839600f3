mod common;

use approx::assert_abs_diff_eq;
use dal_core::harness::{generate_logistic_data, generate_quadratic_data};
use dal_core::local_solve::*;
use dal_core::objective::{NodeCost, ObjectiveStack, QuadraticCost};
use dal_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use common::{dist, gauss_solve, norm, to_dense};

fn budget(eps: f64) -> SolverBudget {
    SolverBudget::new(eps, DEFAULT_PROX_MAX_ITERATIONS).unwrap()
}

#[test]
fn prox_of_shifted_square() {
    let cost = NodeCost::Quadratic(QuadraticCost::isotropic(&[3.0], 1.0).unwrap());
    let p = ProxProblem::new(&cost, 1.0, &[0.0]);
    let out = prox_local(&p, &budget(1e-14), &[0.0]).unwrap();
    assert_abs_diff_eq!(out.point[0], 1.5, epsilon = 1e-6);
    assert!(p.value(&out.point) - p.value(&[1.5]) <= 1e-14);
}

#[test]
fn optimal_warm_start_short_circuits() {
    let cost = NodeCost::Quadratic(QuadraticCost::isotropic(&[3.0], 1.0).unwrap());
    let p = ProxProblem::new(&cost, 1.0, &[0.0]);
    let out = prox_local(&p, &budget(1e-5), &[1.5]).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.point, vec![1.5]);
    assert_eq!(prox_iteration_count(1e-5, 0.0, 1.0, 2.0), None);
}

#[test]
fn iteration_count_formula() {
    // |log(2·1e-4 / (1·4)) / log(1 − √(1/4))| = log(2e4)/log 2 ≈ 14.29.
    assert_eq!(prox_iteration_count(1e-4, 1.0, 1.0, 4.0), Some(15.0));
}

#[test]
fn iteration_cap_is_reported() {
    let cost = NodeCost::Quadratic(QuadraticCost::isotropic(&[3.0, -1.0], 1.0).unwrap());
    let p = ProxProblem::new(&cost, 1e-6, &[0.0, 0.0]);
    let b = SolverBudget::new(1e-12, 3).unwrap();
    assert!(matches!(prox_local(&p, &b, &[0.0, 0.0]), Err(Error::IterationCapExceeded { cap: 3, .. })));
    assert!(SolverBudget::new(0.0, 10).is_err());
}

#[test]
fn prox_matches_linear_solve_on_quadratics() {
    let stack = generate_quadratic_data(4, 5, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (i, cost) in stack.costs().iter().enumerate() {
        let NodeCost::Quadratic(q) = cost else { unreachable!() };
        let rho = 0.3 + i as f64;
        let v: Vec<f64> = (0..5).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut a = to_dense(q.a());
        for (k, row) in a.iter_mut().enumerate() {
            row[k] += rho;
        }
        let rhs: Vec<f64> = (0..5).map(|k| -(q.b()[k] + v[k])).collect();
        let exact = gauss_solve(&a, &rhs);
        let p = ProxProblem::new(cost, rho, &v);
        let eps = 1e-10;
        let out = prox_local(&p, &budget(eps), &[0.0; 5]).unwrap();
        assert!(p.value(&out.point) - p.value(&exact) <= eps);
        assert!(dist(&out.point, &exact) <= (2.0 * eps / p.constants().0).sqrt());
    }
}

#[test]
fn prox_gradient_norm_bound() {
    let stack = generate_logistic_data(6, 8, 1.0, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for eps in [1e-3, 1e-5, 1e-8] {
        for cost in stack.costs() {
            for rho in [0.05, 0.5, 5.0] {
                let v: Vec<f64> = (0..8).map(|_| 2.0 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
                let warm: Vec<f64> = (0..8).map(|_| StandardNormal.sample(&mut rng)).collect();
                let p = ProxProblem::new(cost, rho, &v);
                let out = prox_local(&p, &budget(eps), &warm).unwrap();
                let mut g = vec![0.0; 8];
                p.gradient_into(&out.point, &mut g);
                let bound = (2.0 * (cost.hessian_bounds().1 + rho) * eps).sqrt();
                assert!(norm(&g) <= bound, "‖∇‖ = {:e} > {bound:e}", norm(&g));
            }
        }
    }
}

#[test]
fn gradient_step_examples() {
    let zero = NodeCost::Quadratic(QuadraticCost::isotropic(&[0.0, 0.0], 1.0).unwrap());
    // At the minimizer with x̄ = x and μ = 0 nothing moves.
    assert_eq!(gradient_step_local(&zero, &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 0.5, 1.0), vec![0.0, 0.0]);
    // f = ½y², ρ = 0, β = 1 jumps to −μ.
    let one = NodeCost::Quadratic(QuadraticCost::isotropic(&[0.0], 1.0).unwrap());
    assert_abs_diff_eq!(gradient_step_local(&one, &[4.0], &[7.0], &[2.0], 1.0, 0.0)[0], -2.0, epsilon = 1e-15);
    // βρ = 1 replaces x by x̄ before the gradient correction.
    assert_abs_diff_eq!(gradient_step_local(&one, &[1.0], &[3.0], &[0.0], 0.5, 2.0)[0], 2.5, epsilon = 1e-15);
}

fn al_system_oracle(stack: &ObjectiveStack, l: &common::Dense, mu: &[f64], rho: f64) -> Vec<f64> {
    let n = stack.node_count();
    let d = stack.dim();
    let mut m = vec![vec![0.0; n * d]; n * d];
    let mut rhs = vec![0.0; n * d];
    for i in 0..n {
        let NodeCost::Quadratic(q) = stack.cost(i) else { unreachable!() };
        for r in 0..d {
            for c in 0..d {
                m[i * d + r][i * d + c] += q.a()[(r, c)];
            }
            rhs[i * d + r] = -(q.b()[r] + mu[i * d + r]);
            for j in 0..n {
                m[i * d + r][j * d + r] += rho * l[i][j];
            }
        }
    }
    gauss_solve(&m, &rhs)
}

#[test]
fn exact_minimizer_matches_linear_solve() {
    let (stack, net) = common::five_node_quadratic();
    let l = to_dense(net.spectrum().laplacian());
    let mu: Vec<f64> = (0..15).map(|k| (k as f64 * 1.3).sin()).collect();
    for rho in [0.0, 0.4, 3.0] {
        let oracle = al_system_oracle(&stack, &l, &mu, rho);
        let direct = exact_al_minimizer_quadratic(&stack, &net, &mu, rho).unwrap();
        let iterative = exact_al_minimizer(&stack, &net, &mu, rho, 1e-12).unwrap();
        assert!(dist(&direct, &oracle) <= 1e-10);
        assert!(dist(&iterative, &oracle) <= 1e-10 / stack.h_min());
        let g = augmented_lagrangian_gradient(&stack, &net, &iterative, &mu, rho).unwrap();
        assert!(norm(&g) <= 1e-12);
    }
}

#[test]
fn zero_penalty_decouples_nodes() {
    let (stack, net) = common::chain_quadratic(4, 2, 3);
    let mu: Vec<f64> = (0..8).map(|k| k as f64 - 3.5).collect();
    let x = exact_al_minimizer_quadratic(&stack, &net, &mu, 0.0).unwrap();
    for i in 0..4 {
        let NodeCost::Quadratic(q) = stack.cost(i) else { unreachable!() };
        let rhs: Vec<f64> = (0..2).map(|r| -(q.b()[r] + mu[i * 2 + r])).collect();
        let xi = gauss_solve(&to_dense(q.a()), &rhs);
        assert!(dist(&xi, &x[i * 2..i * 2 + 2]) <= 1e-12);
    }
}

#[test]
fn optimal_dual_fixes_the_consensus_optimum() {
    // With μ• = −∇F(1⊗x*) the AL minimizer is the replicated optimum.
    let (stack, net) = common::five_node_quadratic();
    let x_star = common::quadratic_optimum(&stack);
    let x_bullet: Vec<f64> = (0..5).flat_map(|_| x_star.clone()).collect();
    let mu: Vec<f64> = stack.grad_stack(&x_bullet).unwrap().iter().map(|g| -g).collect();
    for rho in [0.0, 1.0] {
        let x = exact_al_minimizer_quadratic(&stack, &net, &mu, rho).unwrap();
        assert!(dist(&x, &x_bullet) <= 1e-10);
    }
}

#[test]
fn al_value_and_gradient_agree() {
    let stack = generate_logistic_data(5, 3, 1.0, 2).unwrap();
    let net = common::five_node_quadratic().1;
    let mu: Vec<f64> = (0..15).map(|k| (k as f64).cos()).collect();
    let x: Vec<f64> = (0..15).map(|k| (k as f64 * 0.4).sin()).collect();
    let g = augmented_lagrangian_gradient(&stack, &net, &x, &mu, 0.7).unwrap();
    let fd = common::central_difference(|y| augmented_lagrangian(&stack, &net, y, &mu, 0.7).unwrap(), &x, 1e-6);
    assert!(dist(&g, &fd) <= 1e-6 * norm(&g).max(1.0));
}

#[test]
fn dimension_errors() {
    let (stack, net) = common::five_node_quadratic();
    assert!(exact_al_minimizer(&stack, &net, &[0.0; 3], 1.0, 1e-8).is_err());
    assert!(exact_al_minimizer(&stack, &net, &[0.0; 15], -1.0, 1e-8).is_err());
    let p = ProxProblem::new(stack.cost(0), 1.0, &[0.0; 3]);
    assert!(prox_local(&p, &budget(1e-5), &[0.0; 2]).is_err());
}
