mod common;

use common::{rel_close, Instance};
use gtv_core::solver::{self, SolverConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exhaustive minimum of the dense energy over binary vectors.
fn dense_binary_min(inst: &Instance, lambda: f64) -> f64 {
    let n = inst.n();
    (0..(1u32 << n))
        .map(|mask| {
            let u: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
            inst.dense_energy(lambda, &u)
        })
        .fold(f64::INFINITY, f64::min)
}

fn log_lambda() -> impl Strategy<Value = f64> {
    (-3.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn energy_matches_dense(seed in any::<u64>(), n in 1usize..20, dim in 1usize..=2, lambda in log_lambda()) {
        let inst = Instance::random(seed, n, dim);
        let g = inst.graph();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        prop_assert!(rel_close(solver::energy(&g, &inst.labels, lambda, &u).unwrap(), inst.dense_energy(lambda, &u), 1e-10));
    }

    #[test]
    fn exact_solvers_agree(seed in any::<u64>(), n in 1usize..=10, dim in 1usize..=2, lambda in log_lambda()) {
        let inst = Instance::random(seed, n, dim);
        let g = inst.graph();
        let oracle = dense_binary_min(&inst, lambda);
        let bf = solver::solve_brute_force(&g, &inst.labels, lambda).unwrap();
        let mc = solver::solve_mincut(&g, &inst.labels, lambda).unwrap();
        prop_assert!(rel_close(bf.energy_binary, oracle, 1e-10));
        prop_assert!(rel_close(mc.energy_binary, oracle, 1e-10));
        prop_assert!(mc.u_binary.is_binary());
        prop_assert!(rel_close(mc.energy_binary, solver::energy(&g, &inst.labels, lambda, &mc.u_binary).unwrap(), 1e-14));
    }

    #[test]
    fn primal_dual_reaches_binary_minimum(seed in any::<u64>(), n in 1usize..=6, dim in 1usize..=2, lambda in log_lambda()) {
        let inst = Instance::random(seed, n, dim);
        let g = inst.graph();
        let oracle = dense_binary_min(&inst, lambda);
        let mut config = SolverConfig::new(lambda);
        config.tol = 1e-10;
        let pd = solver::solve_primal_dual(&g, &inst.labels, &config).unwrap();
        // coarea: no relaxed point beats the binary minimum
        prop_assert!(pd.energy_relaxed >= oracle * (1.0 - 1e-9) - 1e-12);
        prop_assert!(pd.energy_binary <= pd.energy_relaxed + config.tol * pd.energy_relaxed.max(1.0));
        prop_assert!(rel_close(pd.energy_binary, oracle, 1e-6));
        prop_assert!(pd.u.iter().all(|v| (0.0..=1.0).contains(v)));
        let start = solver::energy(&g, &inst.labels, lambda, &inst.labels.iter().map(|&y| f64::from(y)).collect::<Vec<_>>()).unwrap();
        prop_assert!(pd.energy_relaxed <= start);
    }

    #[test]
    fn binarize_never_increases_energy(seed in any::<u64>(), n in 1usize..30, dim in 1usize..=2, lambda in log_lambda()) {
        let inst = Instance::random(seed, n, dim);
        let g = inst.graph();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let u: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 4.0).floor() / 4.0).collect();
        let b = solver::binarize(&g, &inst.labels, lambda, &u, 0.5).unwrap();
        let eb = solver::energy(&g, &inst.labels, lambda, &b).unwrap();
        let eu = solver::energy(&g, &inst.labels, lambda, &u).unwrap();
        prop_assert!(b.is_binary());
        prop_assert!(eb <= eu + 1e-10);
    }

    #[test]
    fn certificate_is_sound(seed in any::<u64>(), n in 1usize..=40, dim in 1usize..=2, lambda in log_lambda()) {
        let inst = Instance::random(seed, n, dim);
        let g = inst.graph();
        let cert = solver::certify_overfit(&g, lambda);
        if cert.holds {
            let mc = solver::solve_mincut(&g, &inst.labels, lambda).unwrap();
            prop_assert_eq!(mc.u_binary.to_labels().unwrap(), inst.labels.clone());
        }
        prop_assert!(solver::certify_overfit(&g, lambda * 1e-9).holds);
    }

    #[test]
    fn gtv_of_minimizer_decreases_in_lambda(seed in any::<u64>(), n in 1usize..=40, dim in 1usize..=2) {
        let inst = Instance::random(seed, n, dim);
        let g = inst.graph();
        let mut last = f64::INFINITY;
        for k in -12..=4 {
            let lambda = 2f64.powi(k);
            let mc = solver::solve_mincut(&g, &inst.labels, lambda).unwrap();
            let tv = g.gtv(&mc.u_binary).unwrap();
            prop_assert!(tv <= last * (1.0 + 1e-9) + 1e-12);
            last = tv;
        }
    }

    #[test]
    fn huge_lambda_gives_best_constant(seed in any::<u64>(), n in 1usize..=40, dim in 1usize..=2) {
        let inst = Instance::random(seed, n, dim);
        let g = inst.graph();
        let ones = inst.labels.iter().filter(|&&y| y == 1).count();
        // every nonconstant cut of a connected graph costs at least
        // λ·2·min_w/(n²ε), which exceeds any fidelity gain at this λ
        let min_w = g.edges().iter().map(|e| e.weight).fold(f64::INFINITY, f64::min);
        let lambda = if min_w.is_finite() { 10.0 * (n * n) as f64 * inst.eps / min_w } else { 1e3 };
        let mc = solver::solve_mincut(&g, &inst.labels, lambda).unwrap();
        let e0 = solver::energy(&g, &inst.labels, lambda, &vec![0.0; n]).unwrap();
        let e1 = solver::energy(&g, &inst.labels, lambda, &vec![1.0; n]).unwrap();
        prop_assert!(mc.energy_binary <= e0.min(e1) + 1e-12);
        if g.components() == 1 && 2 * ones != n {
            let c = if 2 * ones > n { 1.0 } else { 0.0 };
            prop_assert!(mc.u_binary.iter().all(|&v| v == c));
        }
    }
}

