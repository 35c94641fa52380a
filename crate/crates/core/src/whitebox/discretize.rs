//! Supervised three-bin discretization of the two area features.

use serde::{Deserialize, Serialize};

use super::Label;
use crate::biomarkers::BiomarkerRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MBin {
    Small,
    Medium,
    Big,
}

pub type VBin = MBin;

/// One-hot bin indicators of the lesion area (`m_*`) and the filled vessel
/// area (`v_*`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscretizedFeatures {
    pub m_small: u8,
    pub m_medium: u8,
    pub m_big: u8,
    pub v_small: u8,
    pub v_medium: u8,
    pub v_big: u8,
}

impl DiscretizedFeatures {
    pub fn from_bins(m: MBin, v: VBin) -> Self {
        Self {
            m_small: (m == MBin::Small) as u8,
            m_medium: (m == MBin::Medium) as u8,
            m_big: (m == MBin::Big) as u8,
            v_small: (v == MBin::Small) as u8,
            v_medium: (v == MBin::Medium) as u8,
            v_big: (v == MBin::Big) as u8,
        }
    }

    /// The nine valid indicator vectors.
    pub fn all_combinations() -> Vec<Self> {
        let bins = [MBin::Small, MBin::Medium, MBin::Big];
        bins.iter()
            .flat_map(|&m| bins.iter().map(move |&v| Self::from_bins(m, v)))
            .collect()
    }

    /// Exactly one indicator per feature is set.
    pub fn is_one_hot(&self) -> bool {
        self.m_small + self.m_medium + self.m_big == 1 && self.v_small + self.v_medium + self.v_big == 1
    }

    pub fn m_bin(&self) -> MBin {
        if self.m_small == 1 {
            MBin::Small
        } else if self.m_medium == 1 {
            MBin::Medium
        } else {
            MBin::Big
        }
    }

    pub fn v_bin(&self) -> VBin {
        if self.v_small == 1 {
            MBin::Small
        } else if self.v_medium == 1 {
            MBin::Medium
        } else {
            MBin::Big
        }
    }
}

/// Bin edges in mm². A value equal to a cut belongs to the lower bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cuts {
    pub m_cut1: f64,
    pub m_cut2: f64,
    pub v_cut1: f64,
    pub v_cut2: f64,
}

impl Cuts {
    pub fn new(m_cut1: f64, m_cut2: f64, v_cut1: f64, v_cut2: f64) -> Result<Self> {
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && a < b;
        if !ok(m_cut1, m_cut2) || !ok(v_cut1, v_cut2) {
            return Err(Error::InvalidParameter(format!(
                "cuts must be finite and strictly ordered: m ({m_cut1}, {m_cut2}), v ({v_cut1}, {v_cut2})"
            )));
        }
        Ok(Self {
            m_cut1,
            m_cut2,
            v_cut1,
            v_cut2,
        })
    }
}

fn bin_of(value: f64, cut1: f64, cut2: f64) -> MBin {
    if value <= cut1 {
        MBin::Small
    } else if value <= cut2 {
        MBin::Medium
    } else {
        MBin::Big
    }
}

pub fn apply_cuts(record: &BiomarkerRecord, cuts: &Cuts) -> DiscretizedFeatures {
    DiscretizedFeatures::from_bins(
        bin_of(record.mcnv_area_mm2, cuts.m_cut1, cuts.m_cut2),
        bin_of(record.total_area_mm2, cuts.v_cut1, cuts.v_cut2),
    )
}

/// Cut pair chosen for one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureCuts {
    pub cut1: f64,
    pub cut2: f64,
    /// Weighted class entropy of the three bins (bits).
    pub entropy: f64,
    /// Too few distinct values; tertile cuts were used instead.
    pub fallback: bool,
}

fn entropy(sick: usize, not_sick: usize) -> f64 {
    let n = (sick + not_sick) as f64;
    [sick, not_sick]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

const ENTROPY_TIE: f64 = 1e-12;

/// Exhaustive search over pairs of midpoints between consecutive distinct
/// values for the 3-bin split with the lowest size-weighted class entropy.
/// Among equally good splits the one whose cuts sit in the widest value gaps
/// wins, then the lexicographically smallest pair.
pub fn supervised_cuts(values: &[f64], labels: &[Label]) -> Result<FeatureCuts> {
    if values.len() != labels.len() {
        return Err(Error::InvalidTrainingData(format!(
            "{} values but {} labels",
            values.len(),
            labels.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidTrainingData("non-finite feature value".into()));
    }
    let mut pairs: Vec<(f64, Label)> = values.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Per distinct value: (value, sick count, not-sick count).
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for (v, l) in pairs {
        match groups.last_mut() {
            Some(g) if g.0 == v => {}
            _ => groups.push((v, 0, 0)),
        }
        let g = groups.last_mut().expect("just pushed");
        match l {
            Label::Sick => g.1 += 1,
            Label::NotSick => g.2 += 1,
        }
    }

    if groups.len() < 3 {
        log::warn!(
            "only {} distinct feature values; falling back to tertile cuts",
            groups.len()
        );
        return Ok(tertile_cuts(values));
    }

    // prefix[i] = class counts of groups[..i]
    let mut prefix = vec![(0usize, 0usize); groups.len() + 1];
    for (i, g) in groups.iter().enumerate() {
        prefix[i + 1] = (prefix[i].0 + g.1, prefix[i].1 + g.2);
    }
    let n = prefix[groups.len()].0 + prefix[groups.len()].1;
    let span = |lo: usize, hi: usize| (prefix[hi].0 - prefix[lo].0, prefix[hi].1 - prefix[lo].1);
    let weighted = |(s, ns): (usize, usize)| (s + ns) as f64 / n as f64 * entropy(s, ns);

    // Cut i lies between groups[i] and groups[i + 1].
    let candidates = groups.len() - 1;
    let midpoint = |i: usize| groups[i].0 + (groups[i + 1].0 - groups[i].0) / 2.0;
    let gap = |i: usize| groups[i + 1].0 - groups[i].0;

    let mut best: Option<(f64, f64, usize, usize)> = None;
    for i in 0..candidates {
        for j in i + 1..candidates {
            let h = weighted(span(0, i + 1)) + weighted(span(i + 1, j + 1)) + weighted(span(j + 1, groups.len()));
            let g = gap(i) + gap(j);
            let better = match best {
                None => true,
                Some((bh, bg, _, _)) => h < bh - ENTROPY_TIE || (h <= bh + ENTROPY_TIE && g > bg),
            };
            if better {
                best = Some((h, g, i, j));
            }
        }
    }
    let (h, _, i, j) = best.expect("at least one candidate pair");
    Ok(FeatureCuts {
        cut1: midpoint(i),
        cut2: midpoint(j),
        entropy: h,
        fallback: false,
    })
}

fn tertile_cuts(values: &[f64]) -> FeatureCuts {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let cut1 = sorted[(n - 1) / 3];
    let mut cut2 = sorted[(2 * (n - 1)) / 3];
    if cut2 <= cut1 {
        cut2 = cut1 + (cut1.abs() * 1e-9).max(1e-12);
    }
    FeatureCuts {
        cut1,
        cut2,
        entropy: f64::NAN,
        fallback: true,
    }
}

/// Learns the small/medium/big edges of both area features against the
/// Sick/NotSick target.
pub fn discretize_supervised(records: &[BiomarkerRecord], labels: &[Label]) -> Result<Cuts> {
    if records.len() != labels.len() {
        return Err(Error::InvalidTrainingData(format!(
            "{} records but {} labels",
            records.len(),
            labels.len()
        )));
    }
    if records.len() < 3 {
        return Err(Error::InvalidTrainingData(format!(
            "discretization needs at least 3 records, got {}",
            records.len()
        )));
    }
    if !labels.contains(&Label::Sick) || !labels.contains(&Label::NotSick) {
        return Err(Error::InvalidTrainingData("both labels must be present".into()));
    }
    let m: Vec<f64> = records.iter().map(|r| r.mcnv_area_mm2).collect();
    let v: Vec<f64> = records.iter().map(|r| r.total_area_mm2).collect();
    let mc = supervised_cuts(&m, labels)?;
    let vc = supervised_cuts(&v, labels)?;
    Cuts::new(mc.cut1, mc.cut2, vc.cut1, vc.cut2)
}
