//! Experiment execution: the (dataset, rate, family, grid point) sweep with
//! per-fold noise injection and train-only normalization, plus result-file
//! output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    mean_std, summarize, DatasetSpec, ErrorRow, ExperimentSpec, GridPoint, ModelFamily,
    Normalization, ResultRow,
};
use crate::data::{
    inject_label_noise, kfold_split, load_csv, normalize, Dataset, DatasetManifest, Fold, KFold,
    ManifestEntry, NoiseSpec,
};
use crate::error::Result;
use crate::feature_map::FeatureMapConfig;
use crate::loss::{HLossParams, LossKind};
use crate::model::{accuracy, fit_dataset, ModelConfig, TrainedModel};
use crate::optimizer::NagConfig;
use crate::rng::derive_seed;

/// Size the global worker pool (e.g. from the `HRVFL_THREADS` env var).
/// `None` keeps the default (one worker per core). Calling this after the
/// pool already exists is a no-op.
pub fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Everything a run produced: result rows in canonical order, error rows for
/// recorded-and-skipped failures, and a manifest of the datasets consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<ErrorRow>,
    pub manifest: DatasetManifest,
}

/// Model configuration for one grid point of one family.
pub(crate) fn model_config_for(
    family: ModelFamily,
    point: &GridPoint,
    weight_scale: f64,
    nag_base: &NagConfig,
    warm_start: bool,
    feature_seed: u64,
    nag_seed: u64,
) -> ModelConfig<f64> {
    let loss = match family {
        ModelFamily::HRvfl => LossKind::HawkEye(HLossParams {
            lambda: point.lambda.expect("hrvfl grid point carries lambda"),
            a: point.a.expect("hrvfl grid point carries a"),
            epsilon: point.epsilon.expect("hrvfl grid point carries epsilon"),
        }),
        ModelFamily::Rvfl | ModelFamily::RvflWoDl => LossKind::Squared,
    };
    ModelConfig {
        c: point.c,
        loss,
        feature: FeatureMapConfig {
            hidden: point.hidden,
            activation: point.activation,
            weight_scale,
            seed: feature_seed,
        },
        direct_links: family != ModelFamily::RvflWoDl,
        nag: NagConfig {
            seed: nag_seed,
            ..nag_base.clone()
        },
        warm_start,
    }
}

/// Fit on the (already corrupted, already scaled) training fold and score the
/// clean test fold. The model is a pure function of the training fold and the
/// configuration; the test fold only enters the returned accuracy.
pub fn fit_and_score(
    train: &Dataset<f64>,
    test: &Dataset<f64>,
    cfg: &ModelConfig<f64>,
) -> Result<(TrainedModel<f64>, f64)> {
    let model = fit_dataset(train, cfg)?;
    let predictions = model.predict(&test.x)?;
    let acc = accuracy(&predictions, &test.y);
    Ok((model, acc))
}

/// Corrupt the training fold's labels (test labels are never touched) and
/// scale both parts with statistics fitted on the corrupted training fold.
pub(crate) fn prepare_fold(
    ds: &Dataset<f64>,
    fold: &Fold,
    rate: f64,
    noise_seed: u64,
    normalization: Normalization,
) -> Result<(Dataset<f64>, Dataset<f64>)> {
    let train = ds.subset(&fold.train);
    let test = ds.subset(&fold.test);
    let spec = NoiseSpec::new(rate, noise_seed)?;
    let (train_noisy, _flipped) = inject_label_noise(&train, &spec)?;
    match normalization {
        Normalization::MinMax => {
            let (train_scaled, mut others, _stats) = normalize(&train_noisy, &[&test])?;
            Ok((train_scaled, others.pop().expect("one test split")))
        }
        Normalization::None => Ok((train_noisy, test)),
    }
}

struct Unit<'a> {
    dataset: &'a str,
    rate: f64,
    family: ModelFamily,
    grid_index: usize,
    point: &'a GridPoint,
}

fn evaluate_unit(
    spec: &ExperimentSpec,
    ds: &Dataset<f64>,
    kfold: &KFold,
    unit: &Unit<'_>,
) -> Result<ResultRow> {
    let started = Instant::now();
    let rate_key = format!("{:?}", unit.rate);
    let grid_key = unit.point.key();
    let mut fold_accuracies = Vec::with_capacity(kfold.folds.len());
    for (fold_idx, fold) in kfold.folds.iter().enumerate() {
        let fold_key = fold_idx.to_string();
        let noise_seed = derive_seed(
            spec.master_seed,
            &["noise", unit.dataset, &rate_key, &fold_key],
        );
        let (train, test) = prepare_fold(ds, fold, unit.rate, noise_seed, spec.normalization)?;
        let feature_seed = derive_seed(
            spec.master_seed,
            &["featmap", unit.dataset, &rate_key, &grid_key, &fold_key],
        );
        let nag_seed = derive_seed(
            spec.master_seed,
            &["nagbatch", unit.dataset, &rate_key, &grid_key, &fold_key],
        );
        let cfg = model_config_for(
            unit.family,
            unit.point,
            spec.weight_scale,
            &spec.nag,
            spec.warm_start,
            feature_seed,
            nag_seed,
        );
        let (_model, acc) = fit_and_score(&train, &test, &cfg)?;
        fold_accuracies.push(acc);
    }
    let (mean_accuracy, std_accuracy) = mean_std(&fold_accuracies);
    Ok(ResultRow {
        dataset: unit.dataset.to_string(),
        model: unit.family,
        noise_rate: unit.rate,
        grid_index: unit.grid_index,
        grid: unit.point.clone(),
        fold_accuracies,
        mean_accuracy,
        std_accuracy,
        selected: false,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

fn load_dataset(ds_spec: &DatasetSpec) -> Result<Dataset<f64>> {
    let mut ds = load_csv::<f64>(&ds_spec.path, &ds_spec.csv_schema())?;
    ds.name = ds_spec.name.clone();
    Ok(ds)
}

/// Mark, within every (dataset, family, rate) group, the row with the best
/// mean CV accuracy; ties go to the smaller grid index (smaller C, then
/// smaller lambda, by the canonical enumeration order).
fn mark_selected(rows: &mut [ResultRow]) {
    use std::collections::HashMap;
    let mut best: HashMap<(String, ModelFamily, u64), usize> = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let key = (row.dataset.clone(), row.model, row.noise_rate.to_bits());
        match best.get(&key) {
            Some(&j) => {
                let champ = &rows[j];
                if row.mean_accuracy > champ.mean_accuracy
                    || (row.mean_accuracy == champ.mean_accuracy
                        && row.grid_index < champ.grid_index)
                {
                    best.insert(key, i);
                }
            }
            None => {
                best.insert(key, i);
            }
        }
    }
    for &i in best.values() {
        rows[i].selected = true;
    }
}

/// Run the full sweep. Grid points of one (dataset, rate) execute in parallel;
/// each is internally sequential and seeded, so results do not depend on the
/// worker count. Per-dataset and per-unit failures become [`ErrorRow`]s and
/// the run continues.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let spec = spec.normalized();
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut errors: Vec<ErrorRow> = Vec::new();
    let mut manifest = DatasetManifest::default();

    for ds_spec in &spec.datasets {
        let ds = match load_dataset(ds_spec) {
            Ok(ds) => ds,
            Err(e) => {
                errors.push(ErrorRow {
                    dataset: ds_spec.name.clone(),
                    context: "load".into(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        manifest
            .datasets
            .push(ManifestEntry::describe(&ds, &ds_spec.path));
        let kfold_seed = derive_seed(spec.master_seed, &["kfold", &ds_spec.name]);
        let kfold = match kfold_split(&ds, spec.folds, kfold_seed) {
            Ok(k) => k,
            Err(e) => {
                errors.push(ErrorRow {
                    dataset: ds_spec.name.clone(),
                    context: "kfold".into(),
                    message: e.to_string(),
                });
                continue;
            }
        };

        let grids: Vec<(ModelFamily, Vec<GridPoint>)> = spec
            .models
            .iter()
            .map(|&family| (family, spec.grid.enumerate(family)))
            .collect();
        let mut units: Vec<Unit<'_>> = Vec::new();
        for &rate in &spec.noise_rates {
            for (family, points) in &grids {
                for (grid_index, point) in points.iter().enumerate() {
                    units.push(Unit {
                        dataset: &ds_spec.name,
                        rate,
                        family: *family,
                        grid_index,
                        point,
                    });
                }
            }
        }

        let unit_results: Vec<std::result::Result<ResultRow, ErrorRow>> = units
            .par_iter()
            .map(|unit| {
                evaluate_unit(&spec, &ds, &kfold, unit).map_err(|e| ErrorRow {
                    dataset: unit.dataset.to_string(),
                    context: format!(
                        "rate={:?} model={} grid[{}]={}",
                        unit.rate,
                        unit.family,
                        unit.grid_index,
                        unit.point.key()
                    ),
                    message: e.to_string(),
                })
            })
            .collect();
        for result in unit_results {
            match result {
                Ok(row) => rows.push(row),
                Err(err) => errors.push(err),
            }
        }
    }

    rows.sort_by(|a, b| {
        a.dataset
            .cmp(&b.dataset)
            .then(a.noise_rate.partial_cmp(&b.noise_rate).unwrap())
            .then(a.model.cmp(&b.model))
            .then(a.grid_index.cmp(&b.grid_index))
    });
    mark_selected(&mut rows);
    Ok(ExperimentOutcome {
        rows,
        errors,
        manifest,
    })
}

#[derive(Serialize)]
struct TimingRecord<'a> {
    dataset: &'a str,
    model: ModelFamily,
    noise_rate: f64,
    grid_index: usize,
    wall_time_s: f64,
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Persist a run under `dir`:
///
/// * `results.jsonl` — one row per (dataset, rate, family, grid point)
/// * `errors.jsonl`  — recorded failures (possibly empty)
/// * `summary.txt`   — rendered accuracy±std table over the selected rows
/// * `manifest.json` — the datasets consumed
/// * `timings.jsonl` — wall times; hardware-dependent, NOT byte-stable
///
/// All files except `timings.jsonl` are byte-identical across reruns of the
/// same spec with the same master seed.
pub fn write_outputs(outcome: &ExperimentOutcome, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let results = dir.join("results.jsonl");
    write_jsonl(&results, outcome.rows.iter())?;
    let errors = dir.join("errors.jsonl");
    write_jsonl(&errors, outcome.errors.iter())?;
    let summary = dir.join("summary.txt");
    std::fs::write(&summary, summarize(&outcome.rows).render())?;
    let manifest = dir.join("manifest.json");
    std::fs::write(&manifest, outcome.manifest.to_json())?;
    let timings = dir.join("timings.jsonl");
    write_jsonl(
        &timings,
        outcome.rows.iter().map(|r| TimingRecord {
            dataset: &r.dataset,
            model: r.model,
            noise_rate: r.noise_rate,
            grid_index: r.grid_index,
            wall_time_s: r.wall_time_s,
        }),
    )?;
    Ok(vec![results, errors, summary, manifest, timings])
}
