//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them) and enforcing its
//! runtime budget. The criteria are serialized through a mutex so each gets
//! the whole machine and its budget is measured honestly.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};

use hrvfl::bench::{run_experiment, write_outputs, ExperimentSpec, ModelFamily};
use hrvfl::rng::{rng_from_seed, unit_f64};
use hrvfl::{
    hloss_grad, hloss_value, nag_minimize, objective, objective_grad, ridge_solve, sample_curve,
    two_gaussians, write_csv, BatchSize, FeatureMap, FeatureMapConfig, HLossParams, LossKind,
    NagConfig,
};

static GATE: Mutex<()> = Mutex::new(());

fn exclusive() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn report(criterion: &str, elapsed: Duration, budget: Duration, detail: &str) {
    println!(
        "{criterion}: PASS — {detail} ({:.2?} of {:.0?} budget)",
        elapsed, budget
    );
    assert!(
        elapsed < budget,
        "{criterion} exceeded its runtime budget: {elapsed:?} >= {budget:?}"
    );
}

// Criterion 1: insensitive zone, symmetry (<=1e-12), boundedness (strictly
// below lambda everywhere, within 1e-9 of lambda at |x| = 1e6), and gradient
// continuity at +-epsilon over 10,000 randomized parameter samples. < 1 s.
#[test]
fn criterion_1_loss_property_suite() {
    let _gate = exclusive();
    let start = Instant::now();
    let mut rng = rng_from_seed(0xACC1);
    let samples = 10_000;
    let mut violations = 0usize;
    for _ in 0..samples {
        let lambda = 0.1 + 9.9 * unit_f64(&mut rng);
        let a = 0.1 + 4.9 * unit_f64(&mut rng);
        let epsilon = 2.0 * unit_f64(&mut rng);
        let p = HLossParams::new(lambda, a, epsilon).unwrap();

        // magnitude spread over nine decades, either sign
        let exponent = -3.0 + 9.0 * unit_f64(&mut rng);
        let sign = if unit_f64(&mut rng) < 0.5 { -1.0 } else { 1.0 };
        let x = sign * 10f64.powf(exponent);

        // insensitive zone: exact zeros for |x| <= epsilon
        let inside = epsilon * (2.0 * unit_f64(&mut rng) - 1.0);
        if hloss_value(inside, &p).unwrap() != 0.0 || hloss_grad(inside, &p).unwrap() != 0.0 {
            violations += 1;
        }
        // symmetry
        let v_pos = hloss_value(x, &p).unwrap();
        let v_neg = hloss_value(-x, &p).unwrap();
        if (v_pos - v_neg).abs() > 1e-12 {
            violations += 1;
        }
        // boundedness: strictly below lambda, and saturated at huge residuals
        if !(v_pos < lambda) || v_pos < 0.0 {
            violations += 1;
        }
        let far = hloss_value(1e6, &p).unwrap();
        if !(far < lambda) || (lambda - far) > 1e-9 {
            violations += 1;
        }
        // gradient continuity at the zone boundary: 0 at +-eps, O(delta) just outside
        let delta = 1e-9;
        if hloss_grad(epsilon, &p).unwrap() != 0.0 || hloss_grad(-epsilon, &p).unwrap() != 0.0 {
            violations += 1;
        }
        let just_out = hloss_grad(epsilon + delta, &p).unwrap();
        if just_out.abs() > 2.0 * lambda * a * a * delta {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "{violations} loss property violations");
    report(
        "criterion 1 (loss property suite)",
        start.elapsed(),
        Duration::from_secs(1),
        &format!("{samples} randomized samples, zero violations"),
    );
}

fn fd_matches(grad: f64, fd: f64) -> bool {
    if grad.abs() < 1e-3 {
        (fd - grad).abs() <= 1e-8
    } else {
        ((fd - grad) / grad).abs() <= 1e-5
    }
}

// Criterion 2: hloss_grad and objective_grad match central finite differences
// (h = 1e-6) at relative error <= 1e-5 over 100 randomized small instances
// (dim <= 10, n <= 20). < 5 s.
#[test]
fn criterion_2_gradient_fidelity() {
    let _gate = exclusive();
    let start = Instant::now();
    let mut rng = rng_from_seed(0xACC2);
    let h = 1e-6;
    for instance in 0..100 {
        let lambda = 0.5 + 1.5 * unit_f64(&mut rng);
        let a = 0.5 + 1.5 * unit_f64(&mut rng);
        let epsilon = unit_f64(&mut rng);
        let p = HLossParams::new(lambda, a, epsilon).unwrap();

        // scalar loss gradient at scattered residuals
        for _ in 0..3 {
            let x = 40.0 * unit_f64(&mut rng) - 20.0;
            let fd =
                (hloss_value(x + h, &p).unwrap() - hloss_value(x - h, &p).unwrap()) / (2.0 * h);
            let g = hloss_grad(x, &p).unwrap();
            assert!(
                fd_matches(g, fd),
                "instance {instance}: hloss_grad {g} vs fd {fd} at x={x}"
            );
        }

        // objective gradient on a random small instance
        let dim = 1 + (unit_f64(&mut rng) * 10.0) as usize;
        let n = 2 + (unit_f64(&mut rng) * 19.0) as usize;
        let t = Array2::from_shape_fn((n, dim), |_| 2.0 * unit_f64(&mut rng) - 1.0);
        let y = Array1::from_shape_fn(n, |_| if unit_f64(&mut rng) < 0.5 { -1.0 } else { 1.0 });
        let beta = Array1::from_shape_fn(dim, |_| 2.0 * unit_f64(&mut rng) - 1.0);
        let c = 0.1 + 9.9 * unit_f64(&mut rng);
        let loss = LossKind::HawkEye(p);
        let g = objective_grad(&beta, &t, &y, c, &loss).unwrap();
        for i in 0..dim {
            let mut plus = beta.clone();
            plus[i] += h;
            let mut minus = beta.clone();
            minus[i] -= h;
            let fd = (objective(&plus, &t, &y, c, &loss).unwrap()
                - objective(&minus, &t, &y, c, &loss).unwrap())
                / (2.0 * h);
            assert!(
                fd_matches(g[i], fd),
                "instance {instance}: objective_grad[{i}] {} vs fd {fd}",
                g[i]
            );
        }
    }
    report(
        "criterion 2 (gradient fidelity)",
        start.elapsed(),
        Duration::from_secs(5),
        "100 randomized instances, all finite differences within tolerance",
    );
}

fn spectral_norm_estimate(m: &Array2<f64>, iters: usize) -> f64 {
    let d = m.ncols();
    let mut v = Array1::from_elem(d, 1.0 / (d as f64).sqrt());
    let mut norm = 1.0;
    for _ in 0..iters {
        let w = m.t().dot(&m.dot(&v));
        norm = w.dot(&w).sqrt().sqrt(); // ||M'Mv|| ~ sigma^2 => sigma ~ sqrt
        let len = w.dot(&w).sqrt();
        if len == 0.0 {
            return 0.0;
        }
        v = w / len;
    }
    norm * norm // lambda_max(M'M)
}

// Criterion 3: full-batch NAG on the squared-loss objective reaches the
// closed-form ridge solution within 1e-4 inf-norm on 20 random instances
// (n <= 100, m + h <= 60). < 30 s.
#[test]
fn criterion_3_oracle_equivalence() {
    let _gate = exclusive();
    let start = Instant::now();
    let mut rng = rng_from_seed(0xACC3);
    for instance in 0..20 {
        let m = 2 + (unit_f64(&mut rng) * 9.0) as usize;
        let hidden = 5 + (unit_f64(&mut rng) * (50 - m) as f64) as usize;
        let n = 20 + (unit_f64(&mut rng) * 81.0) as usize;
        let c = [0.1, 1.0, 10.0][(unit_f64(&mut rng) * 3.0) as usize];
        let x = Array2::from_shape_fn((n, m), |_| unit_f64(&mut rng));
        let y = Array1::from_shape_fn(n, |_| if unit_f64(&mut rng) < 0.5 { -1.0 } else { 1.0 });
        let fm = FeatureMap::<f64>::init(
            m,
            &FeatureMapConfig {
                hidden,
                seed: instance as u64,
                ..FeatureMapConfig::default()
            },
        )
        .unwrap();
        let t = fm.transform(&x, true).unwrap();

        let closed_form = ridge_solve(&t, &y, c).unwrap();

        // stable step size from the objective's curvature 1 + C lambda_max(T'T)
        let lipschitz = 1.0 + c * spectral_norm_estimate(&t, 60);
        let cfg = NagConfig {
            momentum: 0.9,
            initial_lr: 0.9 / lipschitz,
            decay: 0.0,
            max_iters: 5000,
            tol: 1e-10,
            batch: BatchSize::Full,
            seed: 0,
        };
        let loss = LossKind::Squared;
        let grad = |beta: &Array1<f64>, _batch: &[usize]| objective_grad(beta, &t, &y, c, &loss);
        let (beta, report) = nag_minimize(grad, Array1::zeros(t.ncols()), n, &cfg).unwrap();
        let gap = (&beta - &closed_form)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(
            gap <= 1e-4,
            "instance {instance}: inf-norm gap {gap} (n={n}, dim={}, C={c}, {report:?})",
            t.ncols()
        );
    }
    report(
        "criterion 3 (oracle equivalence)",
        start.elapsed(),
        Duration::from_secs(30),
        "20 instances of full-batch NAG vs closed-form ridge, gap <= 1e-4",
    );
}

fn synth_csv(dir: &std::path::Path) -> PathBuf {
    let ds = two_gaussians::<f64>(500, 2, 2.5631, 777); // Bayes accuracy ~ 0.9
    let path = dir.join("synth.csv");
    write_csv(&ds, &path).unwrap();
    path
}

fn robustness_spec(path: &std::path::Path, master_seed: u64) -> ExperimentSpec {
    ExperimentSpec::from_toml_str(&format!(
        r#"
        master_seed = {master_seed}
        warm_start = true
        folds = 5
        noise_rates = [0.0, 0.3]
        models = ["hrvfl", "rvfl"]

        [[datasets]]
        name = "synth"
        path = "{}"
        label_column = "label"

        [grid]
        c = [0.1, 1.0, 10.0]
        lambda = [0.5, 1.0, 2.0]
        a = [0.5, 1.0, 2.0]
        epsilon = [0.0, 0.1, 0.5, 1.0]
        hidden = [50]
        "#,
        path.display()
    ))
    .unwrap()
}

// Criterion 4: on a seeded two-Gaussian dataset (n=500, m=2, Bayes ~ 0.9)
// with 30% training-label flips, H-RVFL's 5-fold test accuracy is >= ridge
// RVFL's in >= 7 of 10 master seeds, and its accuracy drop from the 0%-noise
// run is <= the ridge model's drop in >= 7 of 10 seeds. < 2 min.
#[test]
fn criterion_4_bounded_influence_robustness() {
    let _gate = exclusive();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = synth_csv(dir.path());

    let mut wins = 0u32;
    let mut drop_wins = 0u32;
    for master_seed in 1..=10u64 {
        let outcome = run_experiment(&robustness_spec(&path, master_seed)).unwrap();
        assert!(outcome.errors.is_empty(), "{:?}", outcome.errors);
        let best = |family: ModelFamily, rate: f64| -> f64 {
            outcome
                .rows
                .iter()
                .find(|r| r.model == family && r.noise_rate == rate && r.selected)
                .map(|r| r.mean_accuracy)
                .expect("selected row")
        };
        let h_clean = best(ModelFamily::HRvfl, 0.0);
        let h_noisy = best(ModelFamily::HRvfl, 0.3);
        let r_clean = best(ModelFamily::Rvfl, 0.0);
        let r_noisy = best(ModelFamily::Rvfl, 0.3);
        if h_noisy >= r_noisy {
            wins += 1;
        }
        if (h_clean - h_noisy) <= (r_clean - r_noisy) {
            drop_wins += 1;
        }
    }
    assert!(wins >= 7, "H-RVFL won only {wins}/10 seeds at 30% noise");
    assert!(
        drop_wins >= 7,
        "H-RVFL's drop was smaller in only {drop_wins}/10 seeds"
    );
    report(
        "criterion 4 (bounded-influence robustness)",
        start.elapsed(),
        Duration::from_secs(120),
        &format!("accuracy wins {wins}/10, smaller-drop wins {drop_wins}/10"),
    );
}

fn breast_cancer_path() -> PathBuf {
    if let Ok(path) = std::env::var("HRVFL_BREAST_CANCER_CSV") {
        return PathBuf::from(path);
    }
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/breast_cancer.csv")
}

// Criterion 5: on the UCI breast-cancer dataset, H-RVFL with the default grid
// keeps mean 5-fold accuracy >= 0.90 at every noise rate in {5..40}% and
// varies by <= 3 points across rates. < 5 min.
#[test]
fn criterion_5_breast_cancer_spot_check() {
    let _gate = exclusive();
    let start = Instant::now();
    let path = breast_cancer_path();
    assert!(
        path.exists(),
        "breast-cancer CSV not found at {} (override with HRVFL_BREAST_CANCER_CSV)",
        path.display()
    );
    let spec = ExperimentSpec::from_toml_str(&format!(
        r#"
        master_seed = 42
        folds = 5
        noise_rates = [0.05, 0.10, 0.20, 0.30, 0.40]
        models = ["hrvfl"]

        [[datasets]]
        name = "breast_cancer"
        path = "{}"
        label_column = "target"
        "#,
        path.display()
    ))
    .unwrap();
    let outcome = run_experiment(&spec).unwrap();
    assert!(outcome.errors.is_empty(), "{:?}", outcome.errors);
    let winners: Vec<(f64, f64)> = outcome
        .rows
        .iter()
        .filter(|r| r.selected)
        .map(|r| (r.noise_rate, r.mean_accuracy))
        .collect();
    assert_eq!(winners.len(), 5);
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for &(rate, acc) in &winners {
        println!(
            "criterion 5 measurement: noise {:>2.0}% -> best-grid mean 5-fold accuracy {acc:.4}",
            rate * 100.0
        );
        lo = lo.min(acc);
        hi = hi.max(acc);
    }
    println!(
        "criterion 5 measurement: spread {:.4} across rates ({:.2?} elapsed)",
        hi - lo,
        start.elapsed()
    );
    for &(rate, acc) in &winners {
        assert!(
            acc >= 0.90,
            "mean accuracy {acc:.4} below 0.90 at noise rate {rate}"
        );
    }
    assert!(
        hi - lo <= 0.03,
        "accuracy varies by {:.4} (> 3 points) across noise rates",
        hi - lo
    );
    report(
        "criterion 5 (breast-cancer spot check)",
        start.elapsed(),
        Duration::from_secs(300),
        &format!(
            "min accuracy {:.4}, spread {:.4} across rates 5%..40%",
            lo,
            hi - lo
        ),
    );
}

// Criterion 6: two executions of the same spec with the same master seed
// produce byte-identical result files.
#[test]
fn criterion_6_byte_identical_reruns() {
    let _gate = exclusive();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = synth_csv(dir.path());
    let spec = robustness_spec(&path, 1);

    let out_a = dir.path().join("run_a");
    let out_b = dir.path().join("run_b");
    write_outputs(&run_experiment(&spec).unwrap(), &out_a).unwrap();
    write_outputs(&run_experiment(&spec).unwrap(), &out_b).unwrap();

    let stable = ["results.jsonl", "errors.jsonl", "summary.txt", "manifest.json"];
    for file in stable {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical reruns");
        assert!(!a.is_empty() || file == "errors.jsonl");
    }
    report(
        "criterion 6 (byte-identical reruns)",
        start.elapsed(),
        Duration::from_secs(120),
        "results.jsonl, errors.jsonl, summary.txt, manifest.json identical",
    );
}

// Criterion 7: loss-curve emission reproduces the qualitative loss shapes:
// zero plateau of width 2*epsilon, monotone rise, asymptote at lambda
// (within 1e-6*lambda at |x| = 50 for a >= 1). < 1 s.
#[test]
fn criterion_7_loss_curve_shapes() {
    let _gate = exclusive();
    let start = Instant::now();
    // varying a (lambda, eps fixed), varying lambda (a, eps fixed),
    // varying eps (lambda, a fixed)
    let triples = [
        (1.0, 0.5, 0.5),
        (1.0, 1.0, 0.5),
        (1.0, 2.0, 0.5),
        (0.5, 1.0, 0.5),
        (2.0, 1.0, 0.5),
        (1.0, 1.0, 0.0),
        (1.0, 1.0, 1.0),
    ];
    for &(lambda, a, epsilon) in &triples {
        let p = HLossParams::new(lambda, a, epsilon).unwrap();
        let curve = sample_curve(&p, -50.0, 50.0, 2001).unwrap();
        assert_eq!(curve.len(), 2001);
        let step = 0.05;
        for point in &curve {
            // plateau exactly on [-eps, eps], positive strictly outside a step
            if point.x.abs() <= epsilon {
                assert_eq!(point.value, 0.0, "nonzero inside zone at {}", point.x);
                assert_eq!(point.grad, 0.0);
            } else if point.x.abs() > epsilon + step {
                assert!(point.value > 0.0, "zero outside zone at {}", point.x);
            }
            assert!(point.value < lambda);
        }
        // monotone rise in |x| on each side
        let mid = curve.len() / 2;
        for i in mid..curve.len() - 1 {
            assert!(curve[i + 1].value >= curve[i].value - 4.0 * f64::EPSILON * lambda);
        }
        for i in 0..mid {
            assert!(curve[i].value >= curve[i + 1].value - 4.0 * f64::EPSILON * lambda);
        }
        // asymptote at lambda for a >= 1
        if a >= 1.0 {
            assert!(lambda - curve[0].value <= 1e-6 * lambda);
            assert!(lambda - curve[2000].value <= 1e-6 * lambda);
        }
        // gradients: odd, zero in the zone (already checked), finite peak
        for (left, right) in curve.iter().zip(curve.iter().rev()) {
            assert_eq!(left.grad, -right.grad);
        }
    }
    report(
        "criterion 7 (loss-curve shapes)",
        start.elapsed(),
        Duration::from_secs(1),
        "plateau width, monotone rise, and asymptote verified on 7 curves",
    );
}
