//! Aggregation of result rows into the accuracy±std tables the benchmark
//! reports: per-(dataset, rate) winners, per-dataset averages across rates,
//! and per-family averages with average ranks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ModelFamily, ResultRow};

/// One family's averages on one dataset (across its noise rates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFamilySummary {
    pub dataset: String,
    pub model: ModelFamily,
    /// Mean over rates of the winning grid point's mean CV accuracy.
    pub avg_accuracy: f64,
    /// Mean over rates of the winning grid point's fold std.
    pub avg_std: f64,
    /// Rank among the families on this dataset (1 = best; ties averaged).
    pub rank: f64,
}

/// One family's averages across all datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub model: ModelFamily,
    /// Mean of the per-dataset average accuracies.
    pub avg_accuracy: f64,
    /// Mean of the per-dataset average stds.
    pub avg_std: f64,
    pub avg_rank: f64,
}

/// Winner of a (dataset, family, rate) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerRow {
    pub dataset: String,
    pub model: ModelFamily,
    pub noise_rate: f64,
    pub grid_index: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

/// The rendered benchmark summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub winners: Vec<WinnerRow>,
    pub per_dataset: Vec<DatasetFamilySummary>,
    pub families: Vec<FamilySummary>,
}

/// Collapse result rows into the summary. Within every (dataset, family,
/// rate) group the best grid point wins (highest mean CV accuracy; ties to
/// the smaller grid index). Per-dataset averages take the mean of winner
/// accuracies and the mean of winner stds across rates; ranks compare those
/// per-dataset averages (1 = best, ties share the average rank); family
/// averages are means of the per-dataset numbers.
pub fn summarize(rows: &[ResultRow]) -> Summary {
    // (dataset, rate-bits, family) -> winning row
    let mut groups: BTreeMap<(String, u64, ModelFamily), &ResultRow> = BTreeMap::new();
    for row in rows {
        let key = (row.dataset.clone(), row.noise_rate.to_bits(), row.model);
        match groups.get(&key) {
            Some(champ)
                if champ.mean_accuracy > row.mean_accuracy
                    || (champ.mean_accuracy == row.mean_accuracy
                        && champ.grid_index <= row.grid_index) => {}
            _ => {
                groups.insert(key, row);
            }
        }
    }
    let winners: Vec<WinnerRow> = groups
        .values()
        .map(|row| WinnerRow {
            dataset: row.dataset.clone(),
            model: row.model,
            noise_rate: row.noise_rate,
            grid_index: row.grid_index,
            mean_accuracy: row.mean_accuracy,
            std_accuracy: row.std_accuracy,
        })
        .collect();

    // (dataset, family) -> averages across rates
    let mut per_pair: BTreeMap<(String, ModelFamily), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for w in &winners {
        let entry = per_pair
            .entry((w.dataset.clone(), w.model))
            .or_default();
        entry.0.push(w.mean_accuracy);
        entry.1.push(w.std_accuracy);
    }
    let mut per_dataset: Vec<DatasetFamilySummary> = per_pair
        .into_iter()
        .map(|((dataset, model), (accs, stds))| DatasetFamilySummary {
            dataset,
            model,
            avg_accuracy: mean(&accs),
            avg_std: mean(&stds),
            rank: 0.0,
        })
        .collect();

    // ranks per dataset on avg_accuracy, 1 = best, ties averaged
    let datasets: Vec<String> = {
        let mut names: Vec<String> = per_dataset.iter().map(|s| s.dataset.clone()).collect();
        names.dedup();
        names
    };
    for name in &datasets {
        let mut idx: Vec<usize> = per_dataset
            .iter()
            .enumerate()
            .filter(|(_, s)| &s.dataset == name)
            .map(|(i, _)| i)
            .collect();
        idx.sort_by(|&a, &b| {
            per_dataset[b]
                .avg_accuracy
                .partial_cmp(&per_dataset[a].avg_accuracy)
                .unwrap()
        });
        let mut pos = 0;
        while pos < idx.len() {
            let mut end = pos + 1;
            while end < idx.len()
                && per_dataset[idx[end]].avg_accuracy == per_dataset[idx[pos]].avg_accuracy
            {
                end += 1;
            }
            // ranks pos+1 ..= end averaged over the tie group
            let avg_rank = (pos + 1..=end).sum::<usize>() as f64 / (end - pos) as f64;
            for &i in &idx[pos..end] {
                per_dataset[i].rank = avg_rank;
            }
            pos = end;
        }
    }

    // per-family averages over datasets
    let mut per_family: BTreeMap<ModelFamily, (Vec<f64>, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for s in &per_dataset {
        let entry = per_family.entry(s.model).or_default();
        entry.0.push(s.avg_accuracy);
        entry.1.push(s.avg_std);
        entry.2.push(s.rank);
    }
    let families = per_family
        .into_iter()
        .map(|(model, (accs, stds, ranks))| FamilySummary {
            model,
            avg_accuracy: mean(&accs),
            avg_std: mean(&stds),
            avg_rank: mean(&ranks),
        })
        .collect();

    Summary {
        winners,
        per_dataset,
        families,
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

impl Summary {
    /// Plain-text tables with accuracies as percentages (two decimals), in
    /// the shape of the benchmark's reported tables.
    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let pct = |v: f64| format!("{:.2}", v * 100.0);

        writeln!(out, "== winners per dataset / noise rate ==").unwrap();
        writeln!(
            out,
            "{:<20} {:<10} {:>6}  {:>14}  grid",
            "dataset", "model", "noise", "acc±std"
        )
        .unwrap();
        for w in &self.winners {
            writeln!(
                out,
                "{:<20} {:<10} {:>5.0}%  {:>14}  #{}",
                w.dataset,
                w.model.to_string(),
                w.noise_rate * 100.0,
                format!("{}±{}", pct(w.mean_accuracy), pct(w.std_accuracy)),
                w.grid_index
            )
            .unwrap();
        }

        writeln!(out, "\n== per-dataset averages across noise rates ==").unwrap();
        writeln!(
            out,
            "{:<20} {:<10} {:>14}  {:>5}",
            "dataset", "model", "avg acc±std", "rank"
        )
        .unwrap();
        for s in &self.per_dataset {
            writeln!(
                out,
                "{:<20} {:<10} {:>14}  {:>5.2}",
                s.dataset,
                s.model.to_string(),
                format!("{}±{}", pct(s.avg_accuracy), pct(s.avg_std)),
                s.rank
            )
            .unwrap();
        }

        writeln!(out, "\n== model averages across datasets ==").unwrap();
        writeln!(
            out,
            "{:<10} {:>14}  {:>8}",
            "model", "avg acc±std", "avg rank"
        )
        .unwrap();
        for f in &self.families {
            writeln!(
                out,
                "{:<10} {:>14}  {:>8.2}",
                f.model.to_string(),
                format!("{}±{}", pct(f.avg_accuracy), pct(f.avg_std)),
                f.avg_rank
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::GridPoint;
    use crate::feature_map::Activation;

    fn row(
        dataset: &str,
        model: ModelFamily,
        rate: f64,
        grid_index: usize,
        accs: &[f64],
    ) -> ResultRow {
        let (mean_accuracy, std_accuracy) = super::super::mean_std(accs);
        ResultRow {
            dataset: dataset.into(),
            model,
            noise_rate: rate,
            grid_index,
            grid: GridPoint {
                c: 1.0,
                lambda: None,
                a: None,
                epsilon: None,
                hidden: 10,
                activation: Activation::Sigmoid,
            },
            fold_accuracies: accs.to_vec(),
            mean_accuracy,
            std_accuracy,
            selected: false,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn single_row_summary_equals_that_row() {
        let rows = vec![row("d", ModelFamily::Rvfl, 0.0, 0, &[0.9, 0.8, 1.0])];
        let summary = summarize(&rows);
        assert_eq!(summary.winners.len(), 1);
        assert_eq!(summary.per_dataset.len(), 1);
        assert_eq!(summary.families.len(), 1);
        let f = &summary.families[0];
        assert!((f.avg_accuracy - rows[0].mean_accuracy).abs() < 1e-15);
        assert!((f.avg_std - rows[0].std_accuracy).abs() < 1e-15);
        assert_eq!(f.avg_rank, 1.0);
    }

    #[test]
    fn dominant_model_gets_rank_one_everywhere() {
        let mut rows = Vec::new();
        for ds in ["d1", "d2", "d3"] {
            rows.push(row(ds, ModelFamily::HRvfl, 0.0, 0, &[0.95, 0.95]));
            rows.push(row(ds, ModelFamily::Rvfl, 0.0, 0, &[0.80, 0.80]));
        }
        let summary = summarize(&rows);
        let h = summary
            .families
            .iter()
            .find(|f| f.model == ModelFamily::HRvfl)
            .unwrap();
        let r = summary
            .families
            .iter()
            .find(|f| f.model == ModelFamily::Rvfl)
            .unwrap();
        assert_eq!(h.avg_rank, 1.0);
        assert_eq!(r.avg_rank, 2.0);
    }

    #[test]
    fn winner_selection_prefers_accuracy_then_smaller_index() {
        let rows = vec![
            row("d", ModelFamily::Rvfl, 0.0, 0, &[0.7, 0.7]),
            row("d", ModelFamily::Rvfl, 0.0, 1, &[0.9, 0.9]),
            row("d", ModelFamily::Rvfl, 0.0, 2, &[0.9, 0.9]),
        ];
        let summary = summarize(&rows);
        assert_eq!(summary.winners.len(), 1);
        assert_eq!(summary.winners[0].grid_index, 1);
    }

    // Hand-computed fixture over 3 datasets, 2 rates, 2 families.
    //
    //            rate 0.0     rate 0.3    per-dataset avg
    //  d1  A     0.90         0.80        0.85
    //  d1  B     0.88         0.70        0.79
    //  d2  A     0.60         0.50        0.55
    //  d2  B     0.70         0.62        0.66
    //  d3  A     0.99         0.97        0.98
    //  d3  B     0.99         0.97        0.98      (tie: ranks 1.5 / 1.5)
    //
    //  A: avg acc (0.85+0.55+0.98)/3 = 0.793333..., ranks (1+2+1.5)/3 = 1.5
    //  B: avg acc (0.79+0.66+0.98)/3 = 0.81,        ranks (2+1+1.5)/3 = 1.5
    #[test]
    fn three_dataset_fixture_matches_hand_computation() {
        let a = ModelFamily::HRvfl;
        let b = ModelFamily::Rvfl;
        let rows = vec![
            row("d1", a, 0.0, 0, &[0.90, 0.90]),
            row("d1", a, 0.3, 0, &[0.80, 0.80]),
            row("d1", b, 0.0, 0, &[0.88, 0.88]),
            row("d1", b, 0.3, 0, &[0.70, 0.70]),
            row("d2", a, 0.0, 0, &[0.60, 0.60]),
            row("d2", a, 0.3, 0, &[0.50, 0.50]),
            row("d2", b, 0.0, 0, &[0.70, 0.70]),
            row("d2", b, 0.3, 0, &[0.62, 0.62]),
            row("d3", a, 0.0, 0, &[0.99, 0.99]),
            row("d3", a, 0.3, 0, &[0.97, 0.97]),
            row("d3", b, 0.0, 0, &[0.99, 0.99]),
            row("d3", b, 0.3, 0, &[0.97, 0.97]),
        ];
        let summary = summarize(&rows);
        let fa = summary.families.iter().find(|f| f.model == a).unwrap();
        let fb = summary.families.iter().find(|f| f.model == b).unwrap();
        assert!((fa.avg_accuracy - (0.85 + 0.55 + 0.98) / 3.0).abs() < 1e-12);
        assert!((fb.avg_accuracy - 0.81).abs() < 1e-12);
        assert!((fa.avg_rank - 1.5).abs() < 1e-12);
        assert!((fb.avg_rank - 1.5).abs() < 1e-12);
        let d3 = summary
            .per_dataset
            .iter()
            .filter(|s| s.dataset == "d3")
            .collect::<Vec<_>>();
        assert!(d3.iter().all(|s| s.rank == 1.5));
    }

    #[test]
    fn render_is_stable_text() {
        let rows = vec![row("demo", ModelFamily::HRvfl, 0.0, 0, &[0.9543, 0.9555])];
        let text = summarize(&rows).render();
        assert!(text.contains("95.49±0.08"));
        assert_eq!(text, summarize(&rows).render());
    }
}
