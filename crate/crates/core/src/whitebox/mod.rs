//! Interpretable Sick/NotSick classification: fixed rule tables, a trainable
//! decision tree, supervised discretization and a majority-vote ensemble.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::biomarkers::BiomarkerRecord;
use crate::error::{Error, Result};

pub mod discretize;
pub mod rules;
pub mod tree;

pub use discretize::{apply_cuts, discretize_supervised, supervised_cuts, Cuts, DiscretizedFeatures, FeatureCuts, MBin, VBin};
pub use rules::{
    dl_rules_classify, dt_rules_classify, svm_rules_classify, Comparator, Condition, Feature, Rule, RuleInput, RuleSet,
    RuleSource,
};
pub use tree::{extract_dt_rules, train_decision_tree, tree_rule_set, AreaFeature, DecisionTree, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Sick,
    NotSick,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Sick => "Sick",
            Label::NotSick => "NotSick",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Sick" | "sick" | "nAMD" => Ok(Label::Sick),
            "NotSick" | "notsick" | "not_sick" | "Healthy" | "healthy" => Ok(Label::NotSick),
            other => Err(Error::InvalidParameter(format!("unknown label {other:?}"))),
        }
    }
}

/// Renders an abstaining vote as `Abstain`.
pub fn vote_name(vote: Option<Label>) -> String {
    vote.map_or_else(|| "Abstain".to_string(), |l| l.to_string())
}

/// Individual votes and the combined decision for one image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleVerdict {
    pub dt: Option<Label>,
    pub svm: Option<Label>,
    pub dl: Option<Label>,
    pub ensemble: Label,
}

/// Three rule sets voting together.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub dt: RuleSet,
    pub svm: RuleSet,
    pub dl: RuleSet,
}

impl Default for Ensemble {
    fn default() -> Self {
        Self {
            dt: RuleSet::decision_tree_table(),
            svm: RuleSet::svm_table(),
            dl: RuleSet::description_logic_table(),
        }
    }
}

impl Ensemble {
    /// Majority over the non-abstaining votes. A tie, or nobody voting,
    /// falls back to the decision tree, and to Sick if even that abstains.
    pub fn classify(&self, input: &RuleInput) -> Result<EnsembleVerdict> {
        let dt = self.dt.classify(input)?;
        let svm = self.svm.classify(input)?;
        let dl = self.dl.classify(input)?;
        let votes = [dt, svm, dl];
        let sick = votes.iter().filter(|v| **v == Some(Label::Sick)).count();
        let not_sick = votes.iter().filter(|v| **v == Some(Label::NotSick)).count();
        let ensemble = if sick > not_sick {
            Label::Sick
        } else if not_sick > sick {
            Label::NotSick
        } else {
            dt.unwrap_or(Label::Sick)
        };
        Ok(EnsembleVerdict { dt, svm, dl, ensemble })
    }
}

/// Ensemble of the three published rule tables.
pub fn ensemble_classify(record: &BiomarkerRecord, bins: &DiscretizedFeatures) -> Label {
    Ensemble::default()
        .classify(&RuleInput::from_record(record, Some(*bins)))
        .expect("record and bins supply every feature")
        .ensemble
}

/// Index sets of a stratified split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Seeded stratified split: within each class, a shuffled prefix of
/// `round(n_class * ratio)` items goes to training. Indices come back sorted.
pub fn train_test_split(labels: &[Label], ratio: f64, seed: u64) -> Result<Split> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!("split ratio {ratio} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut warnings = Vec::new();
    for class in [Label::Sick, Label::NotSick] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let n_train = (members.len() as f64 * ratio).round() as usize;
        if !members.is_empty() && (n_train == 0 || n_train == members.len()) {
            warnings.push(format!(
                "class {class} ({} items) is absent from the {} set",
                members.len(),
                if n_train == 0 { "training" } else { "test" }
            ));
        }
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    if test.is_empty() {
        warnings.push("test set is empty".into());
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test, warnings })
}

pub fn accuracy(preds: &[Label], truth: &[Label]) -> Result<f64> {
    if preds.len() != truth.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} labels",
            preds.len(),
            truth.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::InvalidParameter("accuracy of an empty set".into()));
    }
    let hits = preds.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    struct Fixed(Option<Label>);

    fn fixed_set(source: RuleSource, vote: Fixed) -> RuleSet {
        let rules = match vote.0 {
            None => vec![],
            Some(l) => vec![Rule::new("always", vec![Condition::new(Feature::McnvArea, Comparator::Ge, f64::MIN)], l)],
        };
        RuleSet { source, rules }
    }

    fn verdict(dt: Option<Label>, svm: Option<Label>, dl: Option<Label>) -> Label {
        let e = Ensemble {
            dt: fixed_set(RuleSource::DecisionTree, Fixed(dt)),
            svm: fixed_set(RuleSource::Svm, Fixed(svm)),
            dl: fixed_set(RuleSource::DescriptionLogic, Fixed(dl)),
        };
        e.classify(&RuleInput::areas(0.0, 0.0)).unwrap().ensemble
    }

    #[test]
    fn voting() {
        assert_eq!(verdict(Some(Sick), Some(Sick), None), Sick);
        assert_eq!(verdict(Some(NotSick), Some(Sick), Some(Sick)), Sick);
        assert_eq!(verdict(Some(NotSick), None, None), NotSick);
        assert_eq!(verdict(Some(NotSick), Some(Sick), None), NotSick);
        assert_eq!(verdict(None, None, None), Sick);
    }

    #[test]
    fn table_ensemble() {
        let bins = DiscretizedFeatures::from_bins(MBin::Small, VBin::Medium);
        // DT: NotSick (R1), SVM: abstain, DL: Sick -> tie -> DT
        let r = BiomarkerRecord::from_areas("a", 0.005, 0.015);
        assert_eq!(ensemble_classify(&r, &bins), NotSick);
    }

    #[test]
    fn split_counts() {
        let mut labels = vec![NotSick; 65];
        labels.extend(vec![Sick; 120]);
        let s = train_test_split(&labels, 0.8, 7).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (148, 37));
        let sick_test = s.test.iter().filter(|&&i| labels[i] == Sick).count();
        assert_eq!(sick_test, 24);
        assert!(s.warnings.is_empty());
        assert_eq!(train_test_split(&labels, 0.8, 7).unwrap(), s);
        assert_ne!(train_test_split(&labels, 0.8, 8).unwrap().train, s.train);

        let all = train_test_split(&labels, 1.0, 7).unwrap();
        assert!(all.test.is_empty());
        assert!(all.warnings.iter().any(|w| w.contains("test set is empty")));
        assert!(train_test_split(&labels, 1.5, 7).is_err());
    }

    #[test]
    fn accuracy_values() {
        assert_eq!(accuracy(&[Sick, NotSick], &[Sick, NotSick]).unwrap(), 1.0);
        assert_eq!(accuracy(&[Sick, Sick], &[Sick, NotSick]).unwrap(), 0.5);
        let mut p = vec![Sick; 25];
        p.extend(vec![NotSick; 12]);
        let t = vec![Sick; 37];
        assert!((accuracy(&p, &t).unwrap() - 0.6757).abs() < 5e-5);
        assert!(accuracy(&[Sick], &[]).is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!("Sick".parse::<Label>().unwrap(), Sick);
        assert_eq!("NotSick".parse::<Label>().unwrap(), NotSick);
        assert!("maybe".parse::<Label>().is_err());
    }
}
