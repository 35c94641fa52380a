//! Overlap agreement between two masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::BinaryMask;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub intersection_px: usize,
    pub union_px: usize,
    pub a_px: usize,
    pub b_px: usize,
    pub jaccard_index: f64,
    pub jaccard_distance: f64,
    pub dice: f64,
    /// Both masks empty; the ratios are then defined as 1.
    pub both_empty: bool,
}

impl OverlapReport {
    fn from_counts(intersection_px: usize, a_px: usize, b_px: usize) -> Self {
        let union_px = a_px + b_px - intersection_px;
        let both_empty = union_px == 0;
        let (jaccard_index, dice) = if both_empty {
            (1.0, 1.0)
        } else {
            (
                intersection_px as f64 / union_px as f64,
                2.0 * intersection_px as f64 / (a_px + b_px) as f64,
            )
        };
        Self {
            intersection_px,
            union_px,
            a_px,
            b_px,
            jaccard_index,
            jaccard_distance: 1.0 - jaccard_index,
            dice,
            both_empty,
        }
    }
}

pub fn overlap(a: &BinaryMask, b: &BinaryMask) -> Result<OverlapReport> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (mut inter, mut na, mut nb) = (0, 0, 0);
    for (&pa, &pb) in a.pixels().iter().zip(b.pixels()) {
        na += pa as usize;
        nb += pb as usize;
        inter += (pa && pb) as usize;
    }
    Ok(OverlapReport::from_counts(inter, na, nb))
}

/// Batch summary: per-image means and pooled-pixel ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateOverlap {
    pub images: usize,
    pub mean_jaccard: f64,
    pub mean_dice: f64,
    pub pooled_jaccard: f64,
    pub pooled_dice: f64,
}

pub fn aggregate(reports: &[OverlapReport]) -> Option<AggregateOverlap> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let (mut inter, mut a, mut b) = (0, 0, 0);
    for r in reports {
        inter += r.intersection_px;
        a += r.a_px;
        b += r.b_px;
    }
    let pooled = OverlapReport::from_counts(inter, a, b);
    Some(AggregateOverlap {
        images: reports.len(),
        mean_jaccard: reports.iter().map(|r| r.jaccard_index).sum::<f64>() / n,
        mean_dice: reports.iter().map(|r| r.dice).sum::<f64>() / n,
        pooled_jaccard: pooled.jaccard_index,
        pooled_dice: pooled.dice,
    })
}
