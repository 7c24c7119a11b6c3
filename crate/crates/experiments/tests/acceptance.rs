//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured values. Thresholds are fixed here, not
//! configurable.

use ridgekern_core::*;
use ridgekern_experiments::{run_experiment, RootConfig, RunOptions};
use serde_json::json;

fn parse(v: serde_json::Value) -> RootConfig {
    RootConfig::parse(&v.to_string()).expect("acceptance config parses")
}

fn opts(seed_unused: u64, jobs: usize) -> RunOptions {
    let mut o = RunOptions::new(seed_unused);
    o.jobs = jobs;
    o
}

fn components() -> serde_json::Value {
    json!({
        "kernels": {
            "gauss1": {"family": "gaussian", "params": {"bandwidth": 1.0}}
        },
        "random_kernels": {
            "gauss_det": {
                "family": "bounded_noise",
                "base": {"family": "gaussian", "params": {"bandwidth": 1.0}},
                "eta": 0.0
            },
            "gauss_wide_det": {
                "family": "bounded_noise",
                "base": {"family": "gaussian", "params": {"bandwidth": 0.45}},
                "eta": 0.0
            },
            "poly2_det": {
                "family": "bounded_noise",
                "base": {"family": "polynomial_slice",
                          "params": {"degree": 2, "scale": 1.0, "bound": 2.5}},
                "eta": 0.0
            },
            "sign_mix": {
                "family": "sign_mixture",
                "k1": {"family": "gaussian", "params": {"bandwidth": 1.0}},
                "w1": 0.5,
                "k2": {"family": "laplace", "params": {"scale": 1.0}},
                "w2": 0.5
            }
        },
        "measures": {
            "ball2": {"family": "uniform_product_ball", "d": 2}
        },
        "coefficients": {
            "one": {"form": "constant", "value": 1.0}
        }
    })
}

#[test]
fn criterion_01_monte_carlo_rate() {
    // gaussian sigma = 1, d = 2, uniform product ball, c = 1,
    // N in {16, 64, 256, 1024}, 200 trials: log-log slope in [-1.3, -0.7]
    // and mean MSE <= C^2/N (1 + 4 relative SE) at every N.
    let cfg = parse(json!({
        "schema_version": 1,
        "master_seed": 90_210,
        "components": components(),
        "experiment": "mc-rate",
        "params": {
            "kernel": "gauss_det",
            "measure": "ball2",
            "coefficient": "one",
            "n_sweep": [16, 64, 256, 1024],
            "trials": 200
        }
    }));
    let outcome = run_experiment(&cfg, &opts(0, 0)).unwrap();
    let slope = outcome.metrics["slope"].as_f64().unwrap();
    for v in &outcome.criteria {
        println!(
            "{} criterion 1 ({}): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
        assert!(v.passed, "{}: {}", v.name, v.detail);
    }
    assert!((-1.3..=-0.7).contains(&slope), "slope {slope}");
}

#[test]
fn criterion_02_unbiasedness() {
    // at 10 probe points, the mean of 2000 single-draw models sits within
    // 4 SE of the quadrature oracle.
    let kernel = RandomKernel::SignMixture {
        k1: BaseKernel::gaussian(1.0),
        w1: 0.5,
        k2: BaseKernel::laplace(1.0),
        w2: 0.5,
    };
    let rho = ParamMeasure::uniform_product_ball(2);
    let c = CoefficientFn::constant(1.0);
    let mean_kernel = kernel.mean_kernel();
    let seq = SeedSequence::new(424_242);
    let mut probe_rng = rng_from_seed(seq.child("probes", 0));
    use rand::Rng;
    let probes: Vec<Vec<f64>> = (0..10)
        .map(|_| vec![probe_rng.gen_range(-1.0..1.0), probe_rng.gen_range(-1.0..1.0)])
        .collect();

    let trials = 2000;
    let mut values = vec![Vec::with_capacity(trials); probes.len()];
    for t in 0..trials {
        let mut model = build_network(&kernel, &rho, 1, seq.child("model", t as u64)).unwrap();
        model.set_unbiased_weights(&c).unwrap();
        for (slot, x) in values.iter_mut().zip(&probes) {
            slot.push(model.predict(x).unwrap());
        }
    }
    let mut worst = 0.0f64;
    for (x, vals) in probes.iter().zip(&values) {
        let (oracle, _) = evaluate_f_c(
            &mean_kernel,
            &rho,
            &c,
            x,
            FcEval::Quadrature { nodes_per_axis: 20 },
        )
        .unwrap();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let sigmas = (mean - oracle).abs() / se;
        worst = worst.max(sigmas);
        assert!(
            sigmas <= 4.0,
            "probe {x:?}: mean {mean} vs oracle {oracle} ({sigmas:.2} SE)"
        );
    }
    println!("PASS criterion 2 (unbiasedness): worst deviation {worst:.2} SE over 10 probes");
}

#[test]
fn criterion_03_uniform_bound_coverage() {
    // delta = 0.1, N = 1024, sign mixture, 100 replicates: coverage >= 0.85.
    let cfg = parse(json!({
        "schema_version": 1,
        "master_seed": 777_001,
        "components": components(),
        "experiment": "uniform-bound",
        "params": {
            "kernel": "sign_mix",
            "measure": "ball2",
            "coefficient": "one",
            "n": 1024,
            "replicates": 100,
            "delta": 0.1
        }
    }));
    let outcome = run_experiment(&cfg, &opts(0, 0)).unwrap();
    for v in &outcome.criteria {
        println!(
            "{} criterion 3 ({}): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
        assert!(v.passed, "{}: {}", v.name, v.detail);
    }
    let coverage = outcome.metrics["coverage"].as_f64().unwrap();
    assert!(coverage >= 0.85, "coverage {coverage}");
}

#[test]
fn criterion_04_pathwise_indefinite_mean_psd() {
    // sign mixture on 20 spread points: indefinite fraction >= 0.4 at
    // tol 1e-6 while the empirical-mean Gram stays PSD at the same scale.
    let cfg = parse(json!({
        "schema_version": 1,
        "master_seed": 555_333,
        "components": components(),
        "experiment": "psd-contrast",
        "params": {
            "kernel": "sign_mix",
            "n_points": 20,
            "pathwise_draws": 200,
            "mean_draws": 2000,
            "tol": 1e-6,
            "indefinite_fraction_min": 0.4,
            "mean_gram_tol": 1e-6
        }
    }));
    let outcome = run_experiment(&cfg, &opts(0, 0)).unwrap();
    for v in &outcome.criteria {
        println!(
            "{} criterion 4 ({}): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
        assert!(v.passed, "{}: {}", v.name, v.detail);
    }
}

#[test]
fn criterion_05_conic_synthesis_convergence() {
    // conic approximations of the averaged kernel: median sup-grid error
    // over 5 seeds decreases across m in {16, 64, 256, 1024} with 10% slack
    // per doubling, final error < 0.05.
    let kernel = BaseKernel::gaussian(1.0);
    let rho = ParamMeasure::uniform_product_ball(2);
    let grid = tensor_grid(2, 21, -1.0, 1.0);
    let oracle = lifted_gram_quadrature(&kernel, &rho, &grid, 16).unwrap();

    let sizes = [16usize, 64, 256, 1024];
    let seq = SeedSequence::new(31_337);
    let mut medians = Vec::new();
    for (si, &m) in sizes.iter().enumerate() {
        let mut errors = Vec::new();
        for seed_idx in 0..5 {
            let conic = conic_from_measure(
                &kernel,
                &rho,
                m,
                seq.child("conic", (si * 5 + seed_idx) as u64),
            )
            .unwrap();
            let gram = conic.gram(&grid).unwrap();
            let sup = (&gram - &oracle).amax();
            errors.push(sup);
        }
        errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(errors[2]);
    }
    println!("criterion 5 medians over m {:?}: {:?}", sizes, medians);
    for (i, pair) in medians.windows(2).enumerate() {
        let doublings = ((sizes[i + 1] / sizes[i]) as f64).log2();
        let slack = 1.1f64.powf(doublings);
        assert!(
            pair[1] <= pair[0] * slack,
            "step {i}: {} !<= {} * {slack}",
            pair[1],
            pair[0]
        );
    }
    let last = *medians.last().unwrap();
    assert!(last < 0.05, "final error {last}");
    println!("PASS criterion 5 (conic synthesis): final median sup error {last:.4} < 0.05");
}

#[test]
fn criterion_06_nnls_planted_recovery() {
    // planted 3-atom conic kernel: weights recovered within 1e-6, Frobenius
    // residual within 1e-8.
    let kernel = BaseKernel::gaussian(1.0);
    let atoms = vec![
        RidgeParam::new(vec![0.8, 0.2], 0.1, 0.3),
        RidgeParam::new(vec![-0.3, 0.6], -0.2, -0.5),
        RidgeParam::new(vec![0.1, -0.7], 0.4, 0.0),
    ];
    let weights = [1.0, 0.5, 0.25];
    let conic = ConicKernel::new(kernel.clone(), atoms.iter().cloned().zip(weights).collect())
        .unwrap();
    let grid = tensor_grid(2, 11, -1.0, 1.0);
    let target = conic.gram(&grid).unwrap();
    let fit = nnls_fit(&target, &atoms, &kernel, &grid, &NnlsOptions::default()).unwrap();
    let mut max_weight_err = 0.0f64;
    for (got, want) in fit.weights.iter().zip(weights) {
        max_weight_err = max_weight_err.max((got - want).abs());
    }
    assert!(max_weight_err <= 1e-6, "weight error {max_weight_err}");
    assert!(
        fit.frobenius_residual <= 1e-8,
        "residual {}",
        fit.frobenius_residual
    );
    println!(
        "PASS criterion 6 (nnls recovery): weight error {max_weight_err:.2e}, residual {:.2e}",
        fit.frobenius_residual
    );
}

#[test]
fn criterion_07_dichotomy_polynomial_branch() {
    // degree-2 polynomial-slice networks: a degree-2 fit leaves relative
    // residual <= 1e-8, and the uniform error to sin(pi x1) stays above the
    // degree-2 floor oracle.
    let cfg = parse(json!({
        "schema_version": 1,
        "master_seed": 808,
        "components": components(),
        "experiment": "dichotomy",
        "params": {
            "branch": "polynomial",
            "poly_kernel": "poly2_det",
            "measure": "ball2",
            "n_poly": 50,
            "grid_per_axis": 21
        }
    }));
    let outcome = run_experiment(&cfg, &opts(0, 0)).unwrap();
    for v in &outcome.criteria {
        println!(
            "{} criterion 7 ({}): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
        assert!(v.passed, "{}: {}", v.name, v.detail);
    }
}

#[test]
fn criterion_08_dichotomy_universal_branch() {
    // trained gaussian-kernel networks, target sin(pi x1) cos(pi x2):
    // median uniform error strictly decreasing over N in {32, 128, 512}
    // (10 seeds).
    let cfg = parse(json!({
        "schema_version": 1,
        "master_seed": 20_240,
        "components": components(),
        "experiment": "dichotomy",
        "params": {
            "branch": "universal",
            "universal_kernel": "gauss_wide_det",
            "measure": "ball2",
            "n_sweep": [32, 128, 512],
            "seeds": 10,
            "lambda": 1e-6
        }
    }));
    let outcome = run_experiment(&cfg, &opts(0, 0)).unwrap();
    for v in &outcome.criteria {
        println!(
            "{} criterion 8 ({}): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
        assert!(v.passed, "{}: {}", v.name, v.detail);
    }
}

#[test]
fn criterion_09_ridge_training_contract() {
    // 20 random instances: normal-equation residual <= 1e-8 relative;
    // plant-and-recover at lambda = 0 within 1e-8; ||alpha|| monotone
    // decreasing across four decades of lambda.
    let kernel = RandomKernel::BoundedNoise {
        base: BaseKernel::gaussian(1.0),
        gain: 1.0,
        eta: 0.0,
        profile_frequency: 0.0,
    };
    let rho = ParamMeasure::uniform_product_ball(2);
    let seq = SeedSequence::new(5_150);
    use rand::Rng;

    for instance in 0..20u64 {
        let mut rng = rng_from_seed(seq.child("instance", instance));
        let n = rng.gen_range(5..40);
        let m = rng.gen_range(30..120);
        let lambda = 10f64.powf(rng.gen_range(-6.0..1.0));
        let mut model = build_network(&kernel, &rho, n, seq.child("net", instance)).unwrap();
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let y: Vec<f64> = points
            .iter()
            .map(|p| (2.0 * p[0]).sin() + rng.gen_range(-0.1..0.1))
            .collect();
        let report = model.train_ridge(&points, &y, lambda).unwrap();
        assert!(
            report.normal_eq_residual <= 1e-8 * (report.rhs_norm + 1.0),
            "instance {instance}: residual {} vs rhs {}",
            report.normal_eq_residual,
            report.rhs_norm
        );
    }

    // plant and recover at lambda = 0, full column rank
    let mut model = build_network(&kernel, &rho, 15, seq.child("plant", 0)).unwrap();
    let mut rng = rng_from_seed(seq.child("plant-data", 0));
    let points: Vec<Vec<f64>> = (0..80)
        .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let alpha_star: Vec<f64> = (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect();
    model.alpha = alpha_star.clone();
    let y = model.predict_many(&points).unwrap();
    model.alpha = vec![0.0; 15];
    model.train_ridge(&points, &y, 0.0).unwrap();
    for (got, want) in model.alpha.iter().zip(&alpha_star) {
        assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
    }

    // shrinkage across four decades
    let y2: Vec<f64> = points.iter().map(|p| (3.0 * p[0]).cos()).collect();
    let mut last = f64::INFINITY;
    for lambda in [1.0, 10.0, 100.0, 1000.0] {
        model.train_ridge(&points, &y2, lambda).unwrap();
        let norm = model.alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(norm < last, "lambda {lambda}: {norm} !< {last}");
        last = norm;
    }
    println!("PASS criterion 9 (ridge training contract): 20 instances + recovery + shrinkage");
}

#[test]
fn criterion_10_deterministic_outputs_at_any_jobs() {
    // identical config and seed give byte-identical CSVs at every jobs
    // setting, for a statistics-heavy and an eigen-heavy experiment.
    let mc = json!({
        "schema_version": 1,
        "master_seed": 11_213,
        "components": components(),
        "experiment": "mc-rate",
        "params": {
            "kernel": "sign_mix",
            "measure": "ball2",
            "coefficient": "one",
            "n_sweep": [8, 32],
            "trials": 12,
            "eval_grid_per_axis": 11,
            "oracle_nodes_per_axis": 8
        }
    });
    let psd = json!({
        "schema_version": 1,
        "master_seed": 11_213,
        "components": components(),
        "experiment": "psd-contrast",
        "params": { "kernel": "sign_mix", "n_points": 12, "pathwise_draws": 40, "mean_draws": 100 }
    });
    for config in [mc, psd] {
        let cfg = parse(config);
        let reference = run_experiment(&cfg, &opts(0, 1)).unwrap();
        assert!(!reference.csv_files.is_empty());
        for jobs in [1usize, 2, 4] {
            for _rerun in 0..2 {
                let outcome = run_experiment(&cfg, &opts(0, jobs)).unwrap();
                assert_eq!(outcome.csv_files.len(), reference.csv_files.len());
                for ((name_a, text_a), (name_b, text_b)) in
                    outcome.csv_files.iter().zip(&reference.csv_files)
                {
                    assert_eq!(name_a, name_b);
                    assert_eq!(
                        text_a, text_b,
                        "{}: jobs {jobs} changed bytes of {name_a}",
                        cfg.experiment
                    );
                }
            }
        }
    }
    println!("PASS criterion 10 (determinism): byte-identical CSVs at jobs 1, 2, 4 and reruns");
}
