//! Human-readable rule sets and their evaluation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::discretize::DiscretizedFeatures;
use super::Label;
use crate::biomarkers::BiomarkerRecord;
use crate::error::{Error, Result};

/// Quantity a rule condition tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    /// Lesion (object pixel) area, mm².
    McnvArea,
    /// Hole-filled vessel area, mm².
    TotalArea,
    MSmall,
    MMedium,
    MBig,
    VSmall,
    VMedium,
    VBig,
}

impl Feature {
    pub fn is_indicator(self) -> bool {
        !matches!(self, Feature::McnvArea | Feature::TotalArea)
    }

    fn label(self) -> &'static str {
        match self {
            Feature::McnvArea => "mCNV",
            Feature::TotalArea => "vessel",
            Feature::MSmall => "m_small",
            Feature::MMedium => "m_medium",
            Feature::MBig => "m_big",
            Feature::VSmall => "v_small",
            Feature::VMedium => "v_medium",
            Feature::VBig => "v_big",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: Feature,
    #[serde(rename = "op")]
    pub comparator: Comparator,
    pub value: f64,
}

impl Condition {
    pub fn new(feature: Feature, comparator: Comparator, value: f64) -> Self {
        Self {
            feature,
            comparator,
            value,
        }
    }

    /// The indicator is set.
    pub fn is(feature: Feature) -> Self {
        Self::new(feature, Comparator::Gt, 0.5)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.feature.label(), self.comparator.symbol(), self.value)
    }
}

/// Which learner a rule set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleSource {
    #[serde(rename = "DT")]
    DecisionTree,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "DL")]
    DescriptionLogic,
}

impl RuleSource {
    pub fn short_name(self) -> &'static str {
        match self {
            RuleSource::DecisionTree => "DT",
            RuleSource::Svm => "SVM",
            RuleSource::DescriptionLogic => "DL",
        }
    }
}

/// A conjunction of conditions implying a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub conditions: Vec<Condition>,
    pub label: Label,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " => {}", self.label)
    }
}

/// Everything a rule may look at for one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleInput {
    pub mcnv_area_mm2: f64,
    pub total_area_mm2: f64,
    pub bins: Option<DiscretizedFeatures>,
}

impl RuleInput {
    pub fn areas(mcnv_area_mm2: f64, total_area_mm2: f64) -> Self {
        Self {
            mcnv_area_mm2,
            total_area_mm2,
            bins: None,
        }
    }

    pub fn from_record(record: &BiomarkerRecord, bins: Option<DiscretizedFeatures>) -> Self {
        Self {
            mcnv_area_mm2: record.mcnv_area_mm2,
            total_area_mm2: record.total_area_mm2,
            bins,
        }
    }

    pub fn bins_only(bins: DiscretizedFeatures) -> Self {
        Self {
            mcnv_area_mm2: f64::NAN,
            total_area_mm2: f64::NAN,
            bins: Some(bins),
        }
    }

    fn value(&self, feature: Feature) -> Result<f64> {
        let area = |v: f64| {
            if v.is_nan() {
                Err(Error::InvalidParameter(format!("rule needs {} but no area was given", feature.label())))
            } else {
                Ok(v)
            }
        };
        let bins = || {
            self.bins.ok_or_else(|| {
                Error::InvalidParameter(format!("rule needs {} but the record was not discretized", feature.label()))
            })
        };
        Ok(match feature {
            Feature::McnvArea => area(self.mcnv_area_mm2)?,
            Feature::TotalArea => area(self.total_area_mm2)?,
            Feature::MSmall => bins()?.m_small as f64,
            Feature::MMedium => bins()?.m_medium as f64,
            Feature::MBig => bins()?.m_big as f64,
            Feature::VSmall => bins()?.v_small as f64,
            Feature::VMedium => bins()?.v_medium as f64,
            Feature::VBig => bins()?.v_big as f64,
        })
    }
}

impl Rule {
    pub fn new(name: impl Into<String>, conditions: Vec<Condition>, label: Label) -> Self {
        Self {
            name: name.into(),
            conditions,
            label,
        }
    }

    pub fn fires(&self, input: &RuleInput) -> Result<bool> {
        for c in &self.conditions {
            if !c.comparator.holds(input.value(c.feature)?, c.value) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn uses_only_indicators(&self) -> bool {
        self.conditions.iter().all(|c| c.feature.is_indicator())
    }
}

/// Ordered rules from one learner. The first rule that fires decides; no
/// firing rule means the set abstains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub source: RuleSource,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(source: RuleSource, rules: Vec<Rule>) -> Result<Self> {
        let set = Self { source, rules };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rules {
            if r.conditions.is_empty() {
                return Err(Error::InvalidParameter(format!("rule {} has no conditions", r.name)));
            }
            if r.conditions.iter().any(|c| !c.value.is_finite()) {
                return Err(Error::InvalidParameter(format!("rule {} has a non-finite constant", r.name)));
            }
        }
        Ok(())
    }

    /// The first rule that fires, if any.
    pub fn matching_rule(&self, input: &RuleInput) -> Result<Option<&Rule>> {
        for r in &self.rules {
            if r.fires(input)? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    /// `None` means abstain.
    pub fn classify(&self, input: &RuleInput) -> Result<Option<Label>> {
        Ok(self.matching_rule(input)?.map(|r| r.label))
    }

    /// Indicator-only rules that no one-hot bin assignment can satisfy.
    pub fn unsatisfiable_rules(&self) -> Vec<&Rule> {
        let all = DiscretizedFeatures::all_combinations();
        self.rules
            .iter()
            .filter(|r| r.uses_only_indicators())
            .filter(|r| {
                !all.iter()
                    .any(|b| r.fires(&RuleInput::bins_only(*b)).unwrap_or(false))
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let set: RuleSet = serde_json::from_str(json)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    /// Published decision-tree rules over the two areas (mm²).
    pub fn decision_tree_table() -> Self {
        use Comparator::*;
        use Feature::*;
        let c = Condition::new;
        Self {
            source: RuleSource::DecisionTree,
            rules: vec![
                Rule::new("R1", vec![c(McnvArea, Le, 0.01)], Label::NotSick),
                Rule::new("R2", vec![c(McnvArea, Gt, 0.01), c(TotalArea, Le, 0.02)], Label::Sick),
                Rule::new(
                    "R3",
                    vec![c(McnvArea, Gt, 0.01), c(TotalArea, Gt, 0.02), c(McnvArea, Le, 0.03)],
                    Label::NotSick,
                ),
                Rule::new(
                    "R4",
                    vec![c(McnvArea, Gt, 0.01), c(TotalArea, Gt, 0.02), c(McnvArea, Gt, 0.03)],
                    Label::Sick,
                ),
            ],
        }
    }

    /// Rules extracted from the RBF SVM, over bin indicators. The third
    /// published row repeats the second and is kept once.
    pub fn svm_table() -> Self {
        use Comparator::*;
        use Feature::*;
        let c = Condition::new;
        Self {
            source: RuleSource::Svm,
            rules: vec![
                Rule::new("R1", vec![c(MSmall, Le, 0.5), c(MMedium, Le, 0.5)], Label::Sick),
                Rule::new(
                    "R2",
                    vec![
                        c(MSmall, Le, 0.5),
                        c(MMedium, Gt, 0.5),
                        c(VMedium, Lt, 0.5),
                        c(VSmall, Lt, 0.5),
                    ],
                    Label::NotSick,
                ),
            ],
        }
    }

    /// Simplified description-logic axioms for the Sick class. Two of them
    /// pair bins of the same feature and can never fire on one-hot bins.
    pub fn description_logic_table() -> Self {
        use Feature::*;
        let both = |a, b| vec![Condition::is(a), Condition::is(b)];
        Self {
            source: RuleSource::DescriptionLogic,
            rules: vec![
                Rule::new("R1", both(VBig, VMedium), Label::Sick),
                Rule::new("R2", both(MBig, VMedium), Label::Sick),
                Rule::new("R3", both(MSmall, VMedium), Label::Sick),
                Rule::new("R4", both(VMedium, VSmall), Label::Sick),
                Rule::new("R5", both(MSmall, VMedium), Label::Sick),
            ],
        }
    }
}

/// Label from the published decision-tree rules.
pub fn dt_rules_classify(record: &BiomarkerRecord) -> Label {
    RuleSet::decision_tree_table()
        .classify(&RuleInput::from_record(record, None))
        .expect("area rules need no bins")
        .expect("the decision-tree rules cover the whole plane")
}

/// Label from the SVM rules, `None` when no rule covers the bins.
pub fn svm_rules_classify(bins: &DiscretizedFeatures) -> Option<Label> {
    RuleSet::svm_table()
        .classify(&RuleInput::bins_only(*bins))
        .expect("indicator rules always have bins")
}

/// Sick if any description-logic rule holds, `None` otherwise.
pub fn dl_rules_classify(bins: &DiscretizedFeatures) -> Option<Label> {
    RuleSet::description_logic_table()
        .classify(&RuleInput::bins_only(*bins))
        .expect("indicator rules always have bins")
}
