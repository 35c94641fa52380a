//! Gini decision tree over the two area features and root-to-leaf rule
//! extraction.

use serde::{Deserialize, Serialize};

use super::rules::{Comparator, Condition, Feature, Rule, RuleSet, RuleSource};
use super::Label;
use crate::biomarkers::BiomarkerRecord;
use crate::error::{Error, Result};

/// Continuous feature a tree node can split on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaFeature {
    McnvArea,
    TotalArea,
}

impl AreaFeature {
    const ALL: [AreaFeature; 2] = [AreaFeature::McnvArea, AreaFeature::TotalArea];

    pub fn value(self, record: &BiomarkerRecord) -> f64 {
        match self {
            AreaFeature::McnvArea => record.mcnv_area_mm2,
            AreaFeature::TotalArea => record.total_area_mm2,
        }
    }

    fn rule_feature(self) -> Feature {
        match self {
            AreaFeature::McnvArea => Feature::McnvArea,
            AreaFeature::TotalArea => Feature::TotalArea,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: Label,
    },
    /// Values `<= threshold` go left.
    Split {
        feature: AreaFeature,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
    pub max_depth: usize,
}

impl DecisionTree {
    /// The published four-rule tree: mCNV at 0.01, vessel area at 0.02,
    /// mCNV again at 0.03.
    pub fn reference() -> Self {
        let leaf = |label| Box::new(Node::Leaf { label });
        let split = |feature, threshold, left, right| Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        let inner = split(AreaFeature::McnvArea, 0.03, leaf(Label::NotSick), leaf(Label::Sick));
        let vessel = split(AreaFeature::TotalArea, 0.02, leaf(Label::Sick), Box::new(inner));
        Self {
            root: split(AreaFeature::McnvArea, 0.01, leaf(Label::NotSick), Box::new(vessel)),
            max_depth: 3,
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves()
    }

    pub fn classify(&self, record: &BiomarkerRecord) -> Label {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if feature.value(record) <= *threshold { left } else { right };
                }
            }
        }
    }
}

/// Class counts `(sick, not_sick)`.
type Counts = (u64, u64);

fn count(labels: &[Label], idx: &[usize]) -> Counts {
    idx.iter().fold((0, 0), |(s, n), &i| match labels[i] {
        Label::Sick => (s + 1, n),
        Label::NotSick => (s, n + 1),
    })
}

fn majority(c: Counts) -> Label {
    if c.1 > c.0 {
        Label::NotSick
    } else {
        Label::Sick
    }
}

/// Purity of a partition as the exact fraction `num / den`, where
/// `num / den = sum over parts of (sum_k c_k^2) / n_part`. Weighted Gini
/// impurity is `1 - purity / n`, so higher purity means lower impurity.
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of_node(c: Counts) -> Self {
        let n = (c.0 + c.1) as u128;
        Self {
            num: (c.0 as u128).pow(2) + (c.1 as u128).pow(2),
            den: n,
        }
    }

    fn of_split(l: Counts, r: Counts) -> Self {
        let a = Self::of_node(l);
        let b = Self::of_node(r);
        Self {
            num: a.num * b.den + b.num * a.den,
            den: a.den * b.den,
        }
    }

    fn gt(&self, other: &Purity) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct Candidate {
    feature: AreaFeature,
    threshold: f64,
    purity: Purity,
}

fn best_split(records: &[BiomarkerRecord], labels: &[Label], idx: &[usize]) -> Option<Candidate> {
    let total = count(labels, idx);
    let mut best: Option<Candidate> = None;
    for feature in AreaFeature::ALL {
        let mut sorted: Vec<usize> = idx.to_vec();
        sorted.sort_by(|&a, &b| feature.value(&records[a]).total_cmp(&feature.value(&records[b])));
        let mut left: Counts = (0, 0);
        for k in 0..sorted.len() - 1 {
            match labels[sorted[k]] {
                Label::Sick => left.0 += 1,
                Label::NotSick => left.1 += 1,
            }
            let lo = feature.value(&records[sorted[k]]);
            let hi = feature.value(&records[sorted[k + 1]]);
            if lo == hi {
                continue;
            }
            let right = (total.0 - left.0, total.1 - left.1);
            let purity = Purity::of_split(left, right);
            let threshold = lo + (hi - lo) / 2.0;
            let better = match &best {
                None => true,
                Some(b) => {
                    purity.gt(&b.purity)
                        || (!b.purity.gt(&purity) && threshold < b.threshold)
                }
            };
            if better {
                best = Some(Candidate {
                    feature,
                    threshold,
                    purity,
                });
            }
        }
    }
    best
}

fn grow(records: &[BiomarkerRecord], labels: &[Label], idx: &[usize], depth_left: usize) -> Node {
    let counts = count(labels, idx);
    let leaf = Node::Leaf {
        label: majority(counts),
    };
    if depth_left == 0 || counts.0 == 0 || counts.1 == 0 {
        return leaf;
    }
    let Some(split) = best_split(records, labels, idx) else {
        return leaf;
    };
    if !split.purity.gt(&Purity::of_node(counts)) {
        return leaf;
    }
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| split.feature.value(&records[i]) <= split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(records, labels, &l, depth_left - 1)),
        right: Box::new(grow(records, labels, &r, depth_left - 1)),
    }
}

/// Greedy CART-style training with Gini impurity. Candidate thresholds are
/// midpoints between consecutive distinct values; equal impurity prefers the
/// smaller threshold, then mCNV over total area. Leaf ties go to Sick.
pub fn train_decision_tree(records: &[BiomarkerRecord], labels: &[Label], max_depth: usize) -> Result<DecisionTree> {
    if records.len() != labels.len() {
        return Err(Error::InvalidTrainingData(format!(
            "{} records but {} labels",
            records.len(),
            labels.len()
        )));
    }
    if records.len() < 2 {
        return Err(Error::InvalidTrainingData("need at least 2 records".into()));
    }
    if max_depth == 0 {
        return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
    }
    if records
        .iter()
        .any(|r| !r.mcnv_area_mm2.is_finite() || !r.total_area_mm2.is_finite())
    {
        return Err(Error::InvalidTrainingData("non-finite area".into()));
    }
    let idx: Vec<usize> = (0..records.len()).collect();
    Ok(DecisionTree {
        root: grow(records, labels, &idx, max_depth),
        max_depth,
    })
}

/// One rule per leaf, conditions collected along the root-to-leaf path,
/// named `R1..` in left-first order.
pub fn extract_dt_rules(tree: &DecisionTree) -> Vec<Rule> {
    fn walk(node: &Node, path: &mut Vec<Condition>, out: &mut Vec<Rule>) {
        match node {
            Node::Leaf { label } => {
                let name = format!("R{}", out.len() + 1);
                out.push(Rule::new(name, path.clone(), *label));
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let f = feature.rule_feature();
                path.push(Condition::new(f, Comparator::Le, *threshold));
                walk(left, path, out);
                path.pop();
                path.push(Condition::new(f, Comparator::Gt, *threshold));
                walk(right, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut Vec::new(), &mut out);
    // A single-leaf tree has an empty path; give it a condition that always
    // holds so the rule stays well formed.
    if let [only] = out.as_mut_slice() {
        if only.conditions.is_empty() {
            only.conditions
                .push(Condition::new(Feature::McnvArea, Comparator::Ge, f64::MIN));
        }
    }
    out
}

/// Extracted rules packaged as a decision-tree rule set.
pub fn tree_rule_set(tree: &DecisionTree) -> RuleSet {
    RuleSet {
        source: RuleSource::DecisionTree,
        rules: extract_dt_rules(tree),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitebox::rules::RuleInput;

    fn rec(m: f64, v: f64) -> BiomarkerRecord {
        BiomarkerRecord::from_areas("r", m, v)
    }

    #[test]
    fn separable_by_mcnv() {
        // total area does not separate the classes
        let recs = vec![
            rec(0.005, 0.05),
            rec(0.008, 0.02),
            rec(0.012, 0.03),
            rec(0.010, 0.04),
            rec(0.019, 0.025),
            rec(0.025, 0.045),
        ];
        let labels = vec![Label::NotSick, Label::NotSick, Label::NotSick, Label::NotSick, Label::Sick, Label::Sick];
        let t = train_decision_tree(&recs, &labels, 3).unwrap();
        assert_eq!(t.depth(), 1);
        match &t.root {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, AreaFeature::McnvArea);
                assert!(0.012 < *threshold && *threshold < 0.019);
            }
            leaf => panic!("expected a split, got {leaf:?}"),
        }
        assert_eq!(extract_dt_rules(&t).len(), 2);
    }

    #[test]
    fn single_label_is_a_leaf() {
        let recs = vec![rec(0.01, 0.02), rec(0.03, 0.04)];
        let t = train_decision_tree(&recs, &[Label::Sick, Label::Sick], 3).unwrap();
        assert_eq!(t.root, Node::Leaf { label: Label::Sick });
        let rules = extract_dt_rules(&t);
        assert_eq!(rules.len(), 1);
        assert!(rules[0].fires(&RuleInput::areas(0.0, 0.0)).unwrap());
    }

    #[test]
    fn leaf_tie_is_sick() {
        // Identical feature values cannot be split.
        let recs = vec![rec(0.01, 0.02), rec(0.01, 0.02)];
        let t = train_decision_tree(&recs, &[Label::Sick, Label::NotSick], 3).unwrap();
        assert_eq!(t.root, Node::Leaf { label: Label::Sick });
    }

    #[test]
    fn reference_tree_matches_table() {
        let rules = extract_dt_rules(&DecisionTree::reference());
        assert_eq!(rules.len(), 4);
        let table = RuleSet::decision_tree_table();
        for (got, want) in rules.iter().zip(&table.rules) {
            assert_eq!(got.label, want.label);
            let mut g = got.conditions.clone();
            let mut w = want.conditions.clone();
            let key = |c: &Condition| format!("{c}");
            g.sort_by_key(key);
            w.sort_by_key(key);
            assert_eq!(g, w);
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(train_decision_tree(&[rec(0.1, 0.1)], &[Label::Sick], 3).is_err());
        assert!(train_decision_tree(&[rec(0.1, 0.1), rec(0.2, 0.2)], &[Label::Sick], 3).is_err());
        assert!(train_decision_tree(&[rec(0.1, 0.1), rec(0.2, 0.2)], &[Label::Sick, Label::NotSick], 0).is_err());
    }
}
