use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use octa_core::whitebox::{
    accuracy, apply_cuts, discretize_supervised, train_decision_tree, train_test_split, tree_rule_set, vote_name, Cuts,
    DecisionTree, Ensemble, EnsembleVerdict, RuleInput, RuleSet,
};
use octa_core::{BiomarkerRecord, Label};
use serde::{Deserialize, Serialize};

use crate::batch::{read_features, write_json, FeatureRow};
use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracies {
    pub dt: f64,
    pub svm: f64,
    pub dl: f64,
    pub ensemble: f64,
}

/// Share of test items on which each rule set voted at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub svm: f64,
    pub dl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifySummary {
    pub config_hash: String,
    pub seed: u64,
    pub split_ratio: f64,
    pub train: usize,
    pub test: usize,
    pub skipped_unlabeled: Vec<String>,
    pub dt_train_accuracy: f64,
    /// `None` when the test split is empty.
    pub test_accuracy: Option<Accuracies>,
    pub coverage: Option<Coverage>,
    pub cuts: Cuts,
    pub tree: DecisionTree,
    pub warnings: Vec<String>,
}

/// One test-set row of the classification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub image_id: String,
    #[serde(rename = "DT")]
    pub dt: String,
    #[serde(rename = "SVM")]
    pub svm: String,
    #[serde(rename = "DL")]
    pub dl: String,
    pub ensemble: Label,
    pub truth: Label,
}

/// `svm.json` and `dl.json` from `dir` when present, the built-in tables
/// otherwise.
pub fn load_rule_sets(dir: Option<&Path>) -> Result<(RuleSet, RuleSet)> {
    let pick = |name: &str, fallback: RuleSet| -> Result<RuleSet> {
        match dir.map(|d| d.join(name)) {
            Some(p) if p.is_file() => RuleSet::load(&p).with_context(|| format!("rule set {}", p.display())),
            _ => Ok(fallback),
        }
    };
    Ok((
        pick("svm.json", RuleSet::svm_table())?,
        pick("dl.json", RuleSet::description_logic_table())?,
    ))
}

fn record(row: &FeatureRow) -> BiomarkerRecord {
    let mut r = BiomarkerRecord::from_areas(row.image_id.clone(), row.mcnv_area_mm2, row.total_area_mm2);
    r.object_pixels = row.object_pixels;
    r.filled_pixels = row.filled_pixels;
    r
}

/// Trains the tree and the bin cuts on a seeded stratified split, then
/// scores the tree, the SVM and DL rules and their ensemble on the held-out
/// rows.
pub fn classify_rows(
    rows: &[FeatureRow],
    cfg: &RunConfig,
    rules_dir: Option<&Path>,
    seed: u64,
) -> Result<(ClassifySummary, Vec<Prediction>, Ensemble)> {
    let mut skipped = Vec::new();
    let mut records = Vec::new();
    let mut labels = Vec::new();
    for row in rows {
        match row.label {
            Some(l) => {
                records.push(record(row));
                labels.push(l);
            }
            None => {
                log::warn!("{}: no label, skipped", row.image_id);
                skipped.push(row.image_id.clone());
            }
        }
    }
    if records.is_empty() {
        bail!("no labeled rows to classify");
    }

    let split = train_test_split(&labels, cfg.classify.split_ratio, seed)?;
    let pick = |idx: &[usize]| -> (Vec<BiomarkerRecord>, Vec<Label>) {
        (idx.iter().map(|&i| records[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
    };
    let (train_x, train_y) = pick(&split.train);
    let (test_x, test_y) = pick(&split.test);

    let tree = train_decision_tree(&train_x, &train_y, cfg.classify.max_depth)?;
    let cuts = discretize_supervised(&train_x, &train_y)?;
    let (svm, dl) = load_rule_sets(rules_dir)?;
    let ensemble = Ensemble {
        dt: tree_rule_set(&tree),
        svm,
        dl,
    };

    let train_pred: Vec<Label> = train_x.iter().map(|r| tree.classify(r)).collect();
    let dt_train_accuracy = accuracy(&train_pred, &train_y)?;

    let mut predictions = Vec::with_capacity(test_x.len());
    for (r, &truth) in test_x.iter().zip(&test_y) {
        let bins = apply_cuts(r, &cuts);
        let v = ensemble.classify(&RuleInput::from_record(r, Some(bins)))?;
        predictions.push((v, truth, r.image_id.clone()));
    }

    let (test_accuracy, coverage) = if predictions.is_empty() {
        (None, None)
    } else {
        let n = predictions.len() as f64;
        // An abstention counts as a miss.
        let acc = |f: &dyn Fn(&EnsembleVerdict) -> Option<Label>| {
            predictions.iter().filter(|(v, t, _)| f(v) == Some(*t)).count() as f64 / n
        };
        let voted = |f: &dyn Fn(&EnsembleVerdict) -> Option<Label>| {
            predictions.iter().filter(|(v, _, _)| f(v).is_some()).count() as f64 / n
        };
        (
            Some(Accuracies {
                dt: acc(&|v| v.dt),
                svm: acc(&|v| v.svm),
                dl: acc(&|v| v.dl),
                ensemble: acc(&|v| Some(v.ensemble)),
            }),
            Some(Coverage {
                svm: voted(&|v| v.svm),
                dl: voted(&|v| v.dl),
            }),
        )
    };

    let rows_out = predictions
        .into_iter()
        .map(|(v, truth, image_id)| Prediction {
            image_id,
            dt: vote_name(v.dt),
            svm: vote_name(v.svm),
            dl: vote_name(v.dl),
            ensemble: v.ensemble,
            truth,
        })
        .collect();

    let summary = ClassifySummary {
        config_hash: cfg.hash(),
        seed,
        split_ratio: cfg.classify.split_ratio,
        train: split.train.len(),
        test: split.test.len(),
        skipped_unlabeled: skipped,
        dt_train_accuracy,
        test_accuracy,
        coverage,
        cuts,
        tree,
        warnings: split.warnings,
    };
    Ok((summary, rows_out, ensemble))
}

/// Reads a features CSV and writes `classification.csv`,
/// `classify_summary.json` and the three rule sets under `out/rules`.
pub fn cmd_classify(
    features: &Path,
    cfg: &RunConfig,
    rules_dir: Option<&Path>,
    seed: u64,
    out: &Path,
) -> Result<ClassifySummary> {
    let rows = read_features(features)?;
    let (summary, predictions, ensemble) = classify_rows(&rows, cfg, rules_dir, seed)?;

    let rules_out = out.join("rules");
    fs::create_dir_all(&rules_out).with_context(|| format!("creating {}", rules_out.display()))?;
    ensemble.dt.save(rules_out.join("dt.json"))?;
    ensemble.svm.save(rules_out.join("svm.json"))?;
    ensemble.dl.save(rules_out.join("dl.json"))?;

    let csv_path: PathBuf = out.join("classification.csv");
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&csv_path)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(["image_id", "DT", "SVM", "DL", "ensemble", "truth"])?;
    for p in &predictions {
        w.serialize(p)?;
    }
    w.flush()?;
    write_json(&out.join("classify_summary.json"), &summary)?;
    Ok(summary)
}
