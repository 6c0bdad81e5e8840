//! End-to-end acceptance checks. Each test prints one `AC-n PASS|FAIL` line
//! and fails when its criterion is not met. Tests share a lock so that the
//! runtime limits are measured without contention.
//!
//! `cargo test -p strike --test acceptance -- --nocapture` shows the lines.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strike::bundle::ModelBundle;
use strike::commands::run_train;
use strike::config::{Overrides, RunConfig};
use strike::synth::{bayes_auc, generate, Fixture, FixtureKind, FixtureParams};
use strike::Threaded;
use strike_core::cmi::{cmi_matrix, CmiSettings};
use strike_core::grouping::{
    manual_partition, random_round_robin_partition, FeatureGroup, FeatureGroupPartition,
};
use strike_core::learners::{
    fit_gbdt_traced, fit_logistic_irls, logistic_objective, LearnerKind, LearnerSpec,
};
use strike_core::metrics::auc_roc;
use strike_core::stacking::{
    generate_group_oof_traced, predict_strike, train_strike, train_strike_detailed, MetaKind,
    StrikeConfig,
};
use strike_core::tabular::{stratified_kfold, TabularDataset};
use strike_core::{ColumnMatrix, Sequential};

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// Print the verdict line and fail the test when any check failed.
fn verdict(id: &str, checks: &[(bool, String)], elapsed: Duration, limit: Duration) {
    let in_time = elapsed <= limit;
    let pass = in_time && checks.iter().all(|(ok, _)| *ok);
    let details: Vec<String> = checks
        .iter()
        .map(|(ok, d)| if *ok { d.clone() } else { format!("{d} [not met]") })
        .collect();
    println!(
        "{id} {} ({:.1}s, limit {}s){}{}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if details.is_empty() { "" } else { ": " },
        details.join("; ")
    );
    assert!(pass, "{id} failed");
}

fn dataset(fx: &Fixture) -> TabularDataset {
    let x = ColumnMatrix::new(fx.n_rows(), fx.columns.clone()).unwrap();
    TabularDataset::new(fx.feature_names.clone(), x, fx.y.clone()).unwrap()
}

fn true_groups(fx: &Fixture) -> FeatureGroupPartition {
    manual_partition(&fx.groups, &fx.feature_names).unwrap()
}

fn pool(kinds: &[LearnerKind]) -> Vec<LearnerSpec> {
    kinds.iter().map(|&k| LearnerSpec::new(k)).collect()
}

fn config(master_seed: u64, meta_kind: MetaKind) -> StrikeConfig {
    StrikeConfig {
        master_seed,
        meta_kind,
        ..StrikeConfig::default()
    }
}

/// Quadratic-time AUC: share of (positive, negative) pairs ranked correctly,
/// ties counting one half.
fn pairwise_auc(scores: &[f64], y: &[u8]) -> f64 {
    let (mut good, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if y[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if y[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                good += 1.0;
            } else if si == sj {
                good += 0.5;
            }
        }
    }
    good / pairs
}

#[test]
fn ac1_auc_matches_pairwise_oracle() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=500);
        let levels = rng.random_range(1..=20);
        let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
        y[0] = 0;
        y[1] = 1;
        let scores: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.random_range(0..levels)) / f64::from(levels))
            .collect();
        let got = auc_roc(&scores, &y).unwrap();
        worst = worst.max((got - pairwise_auc(&scores, &y)).abs());
    }
    verdict(
        "AC-1",
        &[(worst < 1e-12, format!("max |auc - oracle| = {worst:.3e}"))],
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn ac2_no_leakage_over_random_configurations() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let all = [
        LearnerKind::Logreg,
        LearnerKind::Tree,
        LearnerKind::Forest,
        LearnerKind::ExtraTrees,
        LearnerKind::Gbdt,
        LearnerKind::AdaBoost,
    ];
    let mut violations = 0usize;
    let mut checked = 0usize;
    for _ in 0..50 {
        let n = rng.random_range(40..200);
        let groups = rng.random_range(1..=3);
        let k = rng.random_range(2..=5);
        let seed: u64 = rng.random();
        let params = FixtureParams {
            n,
            seed,
            groups,
            features_per_group: rng.random_range(1..=4),
        };
        let fx = generate(FixtureKind::ConditionalIndependent, &params).unwrap();
        if fx.y.iter().filter(|&&v| v == 1).count() < k
            || fx.y.iter().filter(|&&v| v == 0).count() < k
        {
            continue;
        }
        let ds = dataset(&fx);
        let mut specs: Vec<LearnerSpec> = all
            .iter()
            .filter(|_| rng.random_bool(0.5))
            .map(|&kind| {
                let mut s = LearnerSpec::new(kind);
                s.params.n_estimators = 5;
                s
            })
            .collect();
        if specs.is_empty() {
            specs.push(LearnerSpec::new(LearnerKind::Logreg));
        }
        let folds = stratified_kfold(ds.y(), k, seed).unwrap();
        let partition = true_groups(&fx);
        for (g, group) in partition.groups.iter().enumerate() {
            let x = ds.x().select_columns(&group.columns);
            let Ok((_, traces)) = generate_group_oof_traced(
                &x, ds.y(), &specs, &folds, &group.name, g, seed, &Sequential,
            ) else {
                // A fold without both classes is reported as an error, not leaked.
                continue;
            };
            let mut seen = vec![0usize; n];
            for t in &traces {
                for &r in &t.predicted_rows {
                    checked += 1;
                    seen[r] += 1;
                    if t.training_rows.contains(&r) || folds.fold_of(r) != t.fold {
                        violations += 1;
                    }
                }
            }
            violations += seen.iter().filter(|&&c| c != specs.len()).count();
        }
    }
    verdict(
        "AC-2",
        &[(
            violations == 0 && checked > 0,
            format!("{violations} violations over {checked} OOF entries"),
        )],
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn ac3_additive_structure_win() {
    let _g = serial();
    let start = Instant::now();
    let specs = pool(&[LearnerKind::Logreg, LearnerKind::Gbdt, LearnerKind::AdaBoost]);
    let mut checks = Vec::new();
    for seed in 0..5 {
        let params = FixtureParams::new(20_000, seed);
        let fx = generate(FixtureKind::ConditionalIndependent, &params).unwrap();
        let ds = dataset(&fx);
        let cfg = config(seed, MetaKind::Logistic);
        let (_, strike) = train_strike(&ds, &true_groups(&fx), &specs, &cfg, &Sequential).unwrap();
        let single = FeatureGroupPartition::single(ds.n_features(), "all").unwrap();
        let orthodox = train_strike_detailed(&ds, &single, &specs, &cfg, &Sequential).unwrap();
        let mono = orthodox.oof[0]
            .iter()
            .find(|c| c.kind == LearnerKind::Logreg)
            .unwrap()
            .mean_auc;
        let s = strike.meta.cv_auc_mean;
        let best_group = strike.best_base_auc();
        let orth = orthodox.report.meta.cv_auc_mean;
        let bayes = bayes_auc(FixtureKind::ConditionalIndependent, &params, 1_000_000);
        checks.push((
            s >= best_group + 0.01,
            format!("seed {seed}: strike {s:.4} vs best group {best_group:.4}"),
        ));
        checks.push((s >= mono - 0.005, format!("seed {seed}: monolithic logreg {mono:.4}")));
        checks.push((s >= orth - 0.003, format!("seed {seed}: orthodox {orth:.4}")));
        checks.push(((s - bayes).abs() <= 0.02, format!("seed {seed}: bayes {bayes:.4}")));
    }
    verdict("AC-3", &checks, start.elapsed(), Duration::from_secs(600));
}

#[test]
fn ac4_structured_grouping_beats_random() {
    let _g = serial();
    let start = Instant::now();
    let specs = pool(&[LearnerKind::Gbdt, LearnerKind::Logreg]);
    let mut checks = Vec::new();
    for seed in 0..5 {
        let fx = generate(FixtureKind::GroupNonlinear, &FixtureParams::new(5_000, seed)).unwrap();
        let ds = dataset(&fx);
        let cfg = config(seed, MetaKind::Logistic);
        let auc = |p: &FeatureGroupPartition| {
            train_strike(&ds, p, &specs, &cfg, &Sequential)
                .unwrap()
                .1
                .meta
                .cv_auc_mean
        };
        let structured = auc(&true_groups(&fx));
        let random: f64 = (0..5)
            .map(|r| auc(&random_round_robin_partition(ds.n_features(), 3, r).unwrap()))
            .sum::<f64>()
            / 5.0;
        checks.push((
            structured >= random + 0.01,
            format!("seed {seed}: structured {structured:.4} vs random mean {random:.4}"),
        ));
    }
    verdict("AC-4", &checks, start.elapsed(), Duration::from_secs(600));
}

#[test]
fn ac5_meta_capacity() {
    let _g = serial();
    let start = Instant::now();
    let specs = pool(&[LearnerKind::Logreg]);
    let meta_aucs = |kind: FixtureKind| {
        let fx = generate(kind, &FixtureParams::new(20_000, 0)).unwrap();
        let ds = dataset(&fx);
        let partition = true_groups(&fx);
        MetaKind::ALL.map(|m| {
            train_strike(&ds, &partition, &specs, &config(0, m), &Sequential)
                .unwrap()
                .1
                .meta
                .cv_auc_mean
        })
    };
    let [xor_lin, xor_add] = meta_aucs(FixtureKind::XorMeta);
    let [ci_lin, ci_add] = meta_aucs(FixtureKind::ConditionalIndependent);
    verdict(
        "AC-5",
        &[
            (
                xor_add >= xor_lin,
                format!("xor_meta: additive_binned {xor_add:.4} vs logistic {xor_lin:.4}"),
            ),
            (
                (ci_add - ci_lin).abs() < 0.01,
                format!("conditional_independent: additive_binned {ci_add:.4} vs logistic {ci_lin:.4}"),
            ),
        ],
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn ac6_cmi_estimator() {
    let _g = serial();
    let start = Instant::now();
    let fx = generate(FixtureKind::ConditionalIndependent, &FixtureParams::new(50_000, 0)).unwrap();
    let ds = dataset(&fx);
    let mut groups = true_groups(&fx).groups;
    let settings = CmiSettings::default();
    let independent = cmi_matrix(&ds, &groups, &settings, &Sequential).unwrap();
    let worst_off = (0..groups.len())
        .flat_map(|i| (0..groups.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| independent.values[i][j])
        .fold(0.0f64, f64::max);

    groups.push(FeatureGroup::new("g0_copy", groups[0].columns.clone()));
    let dup = cmi_matrix(&ds, &groups, &settings, &Sequential).unwrap();
    let last = groups.len() - 1;
    let dup_value = dup.values[0][last];
    let symmetric = [&independent, &dup].iter().all(|m| {
        (0..m.values.len()).all(|i| (0..m.values.len()).all(|j| m.values[i][j] == m.values[j][i]))
    });
    verdict(
        "AC-6",
        &[
            (worst_off < 0.02, format!("max off-diagonal {worst_off:.5} nats")),
            (dup_value >= 2.0, format!("duplicated group {dup_value:.4} nats")),
            (symmetric, format!("exact symmetry {symmetric}")),
        ],
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn ac7_optimizer_correctness() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_fd = 0.0f64;
    let mut worst_grad = 0.0f64;
    for _ in 0..5 {
        let n = rng.random_range(50..300);
        let d = rng.random_range(1..6);
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<u8> = (0..n)
            .map(|i| {
                let z: f64 = cols.iter().map(|c| c[i]).sum::<f64>() + rng.random_range(-1.5..1.5);
                u8::from(z > 0.0)
            })
            .collect();
        let x = ColumnMatrix::new(n, cols).unwrap();
        let l2 = 1e-6;
        for _ in 0..10 {
            let b = rng.random_range(-1.0..1.0);
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, grad) = logistic_objective(&x, &y, l2, b, &w);
            let h = 1e-6;
            for p in 0..=d {
                let shifted = |delta: f64| {
                    let (mut b2, mut w2) = (b, w.clone());
                    if p == 0 {
                        b2 += delta;
                    } else {
                        w2[p - 1] += delta;
                    }
                    logistic_objective(&x, &y, l2, b2, &w2).0
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                worst_fd = worst_fd.max((grad[p] - fd).abs() / fd.abs().max(1.0));
            }
        }
        let fit = fit_logistic_irls(&x, &y, l2).unwrap();
        let (_, grad) = logistic_objective(&x, &y, l2, fit.intercept, &fit.weights);
        worst_grad = worst_grad.max(grad.iter().fold(0.0f64, |m, g| m.max(g.abs())));
    }

    let mut increases = 0usize;
    let mut rounds = 0usize;
    for s in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
        let n = 400;
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<u8> = (0..n)
            .map(|i| u8::from(cols[0][i] * cols[1][i] + 0.3 * cols[2][i] + rng.random_range(-0.3..0.3) > 0.0))
            .collect();
        let x = ColumnMatrix::new(n, cols).unwrap();
        let spec = LearnerSpec::new(LearnerKind::Gbdt).with_seed(s);
        let (_, losses) = fit_gbdt_traced(&x, &y, &spec).unwrap();
        rounds += losses.len() - 1;
        increases += losses.windows(2).filter(|w| w[1] > w[0]).count();
    }
    verdict(
        "AC-7",
        &[
            (worst_fd < 1e-5, format!("max relative gradient error {worst_fd:.3e}")),
            (worst_grad < 1e-6, format!("max |grad| at solution {worst_grad:.3e}")),
            (
                increases == 0 && rounds == 300,
                format!("gbdt loss increases {increases} over {rounds} rounds"),
            ),
        ],
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn ac8_determinism_and_persistence() {
    let _g = serial();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    generate(FixtureKind::ConditionalIndependent, &FixtureParams::new(3_000, 8))
        .unwrap()
        .write(dir.path())
        .unwrap();
    let overrides = Overrides {
        dataset: Some(dir.path().join("data.csv")),
        label_column: Some("target".into()),
        group_config: Some(dir.path().join("groups.json")),
        seed: Some(8),
        output_dir: Some(dir.path().join("out")),
        ..Overrides::default()
    };
    let cfg = RunConfig::load(None, &overrides).unwrap();
    let mut bundles = Vec::new();
    let mut outcome = None;
    for workers in [1, 4, 8] {
        let out = run_train(&cfg, &Threaded::new(workers)).unwrap();
        bundles.push(std::fs::read(&out.bundle_path).unwrap());
        outcome = Some(out);
    }
    let out = outcome.unwrap();
    let identical = bundles.windows(2).all(|w| w[0] == w[1]);

    let loaded = ModelBundle::load(&out.bundle_path).unwrap();
    let test = strike::csv_io::load_csv(&out.test_path, "target").unwrap();
    let before = predict_strike(&out.bundle.model, &test).unwrap();
    let after = predict_strike(&loaded.model, &test).unwrap();
    let bitwise = before.len() == after.len()
        && before.iter().zip(&after).all(|(a, b)| a.to_bits() == b.to_bits());
    verdict(
        "AC-8",
        &[
            (identical, format!("bundles identical across workers 1/4/8: {identical}")),
            (bitwise, format!("reloaded predictions bit-identical: {bitwise}")),
            (loaded.model == out.bundle.model, "reloaded model equals trained model".into()),
        ],
        start.elapsed(),
        Duration::from_secs(120),
    );
}

fn polish_csv() -> Option<PathBuf> {
    std::env::var_os("STRIKE_POLISH_CSV")
        .map(PathBuf::from)
        .or_else(|| {
            let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/polish.csv");
            p.exists().then_some(p)
        })
        .filter(|p| p.exists())
}

#[test]
fn ac9_polish_bankruptcy_holdout() {
    let _g = serial();
    let Some(path) = polish_csv() else {
        println!("AC-9 SKIP: set STRIKE_POLISH_CSV or place tests/data/polish.csv");
        return;
    };
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cleaned = dir.path().join("polish.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&cleaned, text.replace('?', "")).unwrap();
    let overrides = Overrides {
        dataset: Some(cleaned),
        label_column: Some("class".into()),
        group_config: Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/polish_groups.json")),
        output_dir: Some(dir.path().join("out")),
        ..Overrides::default()
    };
    let cfg = RunConfig::load(None, &overrides).unwrap();
    let out = run_train(&cfg, &Sequential).unwrap();
    let auc = out.report.holdout.as_ref().map_or(0.0, |m| m.auc);
    verdict(
        "AC-9",
        &[(auc >= 0.93, format!("held-out AUC {auc:.4}"))],
        start.elapsed(),
        Duration::from_secs(600),
    );
}
