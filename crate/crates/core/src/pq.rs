//! Panoptic quality: segment matching, PQ / SQ / RQ and per-image
//! aggregation, following the standard void and crowd conventions.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panoptic::{PanopticMap, VOID_ID};

/// IoU threshold; a match needs strictly more than this.
pub const MATCH_IOU: f64 = 0.5;
/// Unmatched predictions covered beyond this fraction by void or a
/// same-category crowd region are not counted as false positives.
pub const IGNORE_FRACTION: f64 = 0.5;

/// `|a ∩ b| / (|a ∪ b| - |void ∩ (a ∪ b) \ (a ∩ b)|)` over boolean pixel
/// masks; 0 when the denominator vanishes.
pub fn iou(a: &[bool], b: &[bool], void: &[bool]) -> f64 {
    assert!(a.len() == b.len() && a.len() == void.len(), "masks must share a grid");
    let (mut inter, mut union, mut void_only) = (0u64, 0u64, 0u64);
    for i in 0..a.len() {
        let both = a[i] && b[i];
        let any = a[i] || b[i];
        inter += both as u64;
        union += any as u64;
        void_only += (void[i] && any && !both) as u64;
    }
    let denom = union - void_only;
    if denom == 0 {
        0.0
    } else {
        inter as f64 / denom as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentMatch {
    pub pred_id: u32,
    pub gt_id: u32,
    pub category_id: u32,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matching {
    /// True positives, ordered by ground-truth id.
    pub matches: Vec<SegmentMatch>,
    /// Unmatched non-crowd ground-truth segments (false negatives).
    pub unmatched_gt: Vec<u32>,
    /// Unmatched predictions counted as false positives.
    pub unmatched_pred: Vec<u32>,
    /// Unmatched predictions mostly covering void or crowd regions.
    pub ignored_pred: Vec<u32>,
}

/// Pixel counts of every `(gt id, pred id)` pair, void included.
fn intersections(pred: &PanopticMap, gt: &PanopticMap) -> HashMap<(u32, u32), u64> {
    let mut out = HashMap::new();
    for (&g, &p) in gt.ids().iter().zip(pred.ids()) {
        *out.entry((g, p)).or_insert(0) += 1;
    }
    out
}

pub fn match_segments(pred: &PanopticMap, gt: &PanopticMap) -> Result<Matching> {
    pred.ensure_same_dims(gt)?;
    let inter = intersections(pred, gt);
    let pred_area = pred.areas();
    let gt_area = gt.areas();
    let void_pred = |p: u32| inter.get(&(VOID_ID, p)).copied().unwrap_or(0);

    let mut matches = Vec::new();
    let mut pred_matched = BTreeMap::new();
    let mut gt_matched = BTreeMap::new();
    let mut pairs: Vec<_> = inter.iter().filter(|((g, p), _)| *g != VOID_ID && *p != VOID_ID).collect();
    pairs.sort_unstable_by_key(|(k, _)| **k);
    for (&(g, p), &n) in pairs {
        let gs = gt.segment(g).expect("validated map");
        let ps = pred.segment(p).expect("validated map");
        if gs.is_crowd || gs.category_id != ps.category_id {
            continue;
        }
        let union = pred_area[&p] + gt_area[&g] - n - void_pred(p);
        let v = n as f64 / union as f64;
        if v > MATCH_IOU {
            matches.push(SegmentMatch {
                pred_id: p,
                gt_id: g,
                category_id: gs.category_id,
                iou: v,
            });
            pred_matched.insert(p, ());
            gt_matched.insert(g, ());
        }
    }
    matches.sort_by_key(|m| m.gt_id);

    let unmatched_gt = gt
        .segments()
        .iter()
        .filter(|s| !s.is_crowd && !gt_matched.contains_key(&s.id))
        .map(|s| s.id)
        .collect::<Vec<_>>();

    let mut crowd_of = HashMap::new();
    for s in gt.segments().iter().filter(|s| s.is_crowd) {
        crowd_of.insert(s.id, s.category_id);
    }
    let (mut unmatched_pred, mut ignored_pred) = (Vec::new(), Vec::new());
    let mut preds: Vec<_> = pred.segments().iter().filter(|s| !pred_matched.contains_key(&s.id)).collect();
    preds.sort_by_key(|s| s.id);
    for s in preds {
        let crowd: u64 = inter
            .iter()
            .filter(|((g, p), _)| *p == s.id && crowd_of.get(g) == Some(&s.category_id))
            .map(|(_, n)| *n)
            .sum();
        let covered = (void_pred(s.id) + crowd) as f64 / pred_area[&s.id] as f64;
        if covered > IGNORE_FRACTION {
            ignored_pred.push(s.id);
        } else {
            unmatched_pred.push(s.id);
        }
    }
    Ok(Matching {
        matches,
        unmatched_gt,
        unmatched_pred,
        ignored_pred,
    })
}

/// PQ terms of one category or of pooled counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PqCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub iou_sum: f64,
}

impl PqCounts {
    pub fn merge(&mut self, other: &PqCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.iou_sum += other.iou_sum;
    }

    pub fn is_empty(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }

    fn denom(&self) -> f64 {
        self.tp as f64 + 0.5 * self.fp as f64 + 0.5 * self.fn_ as f64
    }

    pub fn sq(&self) -> f64 {
        if self.tp == 0 {
            0.0
        } else {
            self.iou_sum / self.tp as f64
        }
    }

    pub fn rq(&self) -> f64 {
        let d = self.denom();
        if d == 0.0 {
            0.0
        } else {
            self.tp as f64 / d
        }
    }

    pub fn pq(&self) -> f64 {
        let d = self.denom();
        if d == 0.0 {
            0.0
        } else {
            self.iou_sum / d
        }
    }

    pub fn scores(&self) -> CategoryPq {
        CategoryPq {
            pq: self.pq(),
            sq: self.sq(),
            rq: self.rq(),
            counts: *self,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryPq {
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    #[serde(flatten)]
    pub counts: PqCounts,
}

/// How per-category counts are reduced to one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Mean of per-category PQ, SQ, RQ over categories with any TP, FP or FN.
    #[default]
    Category,
    /// PQ, SQ, RQ of the counts pooled over all categories.
    Global,
}

/// Per-category counts, accumulated over one image or a dataset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PqStats {
    pub categories: BTreeMap<u32, PqCounts>,
}

impl PqStats {
    pub fn from_matching(pred: &PanopticMap, gt: &PanopticMap, m: &Matching) -> Self {
        let mut categories: BTreeMap<u32, PqCounts> = BTreeMap::new();
        for s in m.matches.iter() {
            let c = categories.entry(s.category_id).or_default();
            c.tp += 1;
            c.iou_sum += s.iou;
        }
        for id in &m.unmatched_gt {
            categories.entry(gt.segment(*id).expect("gt id").category_id).or_default().fn_ += 1;
        }
        for id in &m.unmatched_pred {
            categories.entry(pred.segment(*id).expect("pred id").category_id).or_default().fp += 1;
        }
        Self { categories }
    }

    pub fn merge(&mut self, other: &PqStats) {
        for (cat, c) in &other.categories {
            self.categories.entry(*cat).or_default().merge(c);
        }
    }

    pub fn totals(&self) -> PqCounts {
        let mut t = PqCounts::default();
        for c in self.categories.values() {
            t.merge(c);
        }
        t
    }

    pub fn summarize(&self, averaging: Averaging) -> PqResult {
        let totals = self.totals();
        let per_category: BTreeMap<u32, CategoryPq> = self
            .categories
            .iter()
            .filter(|(_, c)| !c.is_empty())
            .map(|(k, c)| (*k, c.scores()))
            .collect();
        let (pq, sq, rq) = match averaging {
            Averaging::Global => (totals.pq(), totals.sq(), totals.rq()),
            Averaging::Category => {
                let n = per_category.len();
                if n == 0 {
                    (0.0, 0.0, 0.0)
                } else {
                    let mean = |f: fn(&CategoryPq) -> f64| per_category.values().map(f).sum::<f64>() / n as f64;
                    (mean(|c| c.pq), mean(|c| c.sq), mean(|c| c.rq))
                }
            }
        };
        PqResult {
            pq,
            sq,
            rq,
            tp: totals.tp,
            fp: totals.fp,
            fn_: totals.fn_,
            iou_sum: totals.iou_sum,
            per_category,
        }
    }
}

/// Scores in `[0, 1]`; reports multiply by 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqResult {
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub iou_sum: f64,
    pub per_category: BTreeMap<u32, CategoryPq>,
}

/// PQ of one prediction against its ground truth, averaged per category.
pub fn pq(pred: &PanopticMap, gt: &PanopticMap) -> Result<PqResult> {
    pq_with(pred, gt, Averaging::Category)
}

pub fn pq_with(pred: &PanopticMap, gt: &PanopticMap, averaging: Averaging) -> Result<PqResult> {
    let m = match_segments(pred, gt)?;
    Ok(PqStats::from_matching(pred, gt, &m).summarize(averaging))
}

/// Mean and population variance of the per-image PQ values.
pub fn aggregate_pq(per_image: &[PqResult]) -> Result<(f64, f64)> {
    aggregate_scores(&per_image.iter().map(|r| r.pq).collect::<Vec<_>>())
}

pub fn aggregate_scores(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot aggregate an empty PQ list".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panoptic::SegmentInfo;

    fn seg(id: u32, category_id: u32) -> SegmentInfo {
        SegmentInfo {
            id,
            category_id,
            is_crowd: false,
        }
    }

    fn map(w: usize, ids: Vec<u32>, segs: Vec<SegmentInfo>) -> PanopticMap {
        PanopticMap::new(w, ids.len() / w, ids, segs).unwrap()
    }

    /// Two 100-pixel segments overlapping in 80 pixels: |∩| = 80, |∪| = 120.
    /// The gt pixels outside segment 1 are a crowd region of another
    /// category, so no void shrinks the union.
    fn eighty_of_120() -> (PanopticMap, PanopticMap) {
        let (w, h) = (12, 10);
        let g = (0..w * h).map(|i| if i < 100 { 1 } else { 2 }).collect();
        let p = (0..w * h).map(|i| if i >= 20 { 1 } else { 0 }).collect();
        let crowd = SegmentInfo {
            id: 2,
            category_id: 8,
            is_crowd: true,
        };
        (map(w, p, vec![seg(1, 7)]), map(w, g, vec![seg(1, 7), crowd]))
    }

    #[test]
    fn iou_examples() {
        let a = vec![true; 10];
        let none = vec![false; 10];
        assert_eq!(iou(&a, &a, &none), 1.0);
        let mut b = vec![false; 10];
        let mut c = vec![false; 10];
        b[..5].fill(true);
        c[5..].fill(true);
        assert_eq!(iou(&b, &c, &none), 0.0);
        let a: Vec<bool> = (0..120).map(|i| i < 100).collect();
        let b: Vec<bool> = (0..120).map(|i| i >= 20).collect();
        assert!((iou(&a, &b, &vec![false; 120]) - 80.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn hand_counted_single_segment() {
        let (pred, gt) = eighty_of_120();
        let r = pq(&pred, &gt).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_), (1, 0, 0));
        assert!((r.pq - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.sq - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.rq, 1.0);
    }

    #[test]
    fn half_iou_is_not_a_match() {
        let g = vec![1, 1, 1, 1, 0, 0, 0, 0];
        let p = vec![0, 0, 1, 1, 1, 1, 0, 0];
        // |∩| = 2, |∪| = 6 minus 2 void-overlap pixels -> 0.5
        let r = pq(&map(8, p, vec![seg(1, 1)]), &map(8, g, vec![seg(1, 1)])).unwrap();
        assert_eq!(r.tp, 0);
        assert_eq!(r.fn_, 1);
    }

    #[test]
    fn perfect_and_empty() {
        let gt = map(4, vec![1, 1, 2, 2, 1, 1, 2, 2], vec![seg(1, 1), seg(2, 2)]);
        let r = pq(&gt, &gt).unwrap();
        assert_eq!((r.pq, r.sq, r.rq), (1.0, 1.0, 1.0));
        let empty = map(4, vec![0; 8], vec![]);
        let r = pq(&empty, &map(4, vec![1, 1, 0, 0, 0, 0, 0, 0], vec![seg(1, 1)])).unwrap();
        assert_eq!((r.tp, r.fn_, r.pq), (0, 1, 0.0));
    }

    #[test]
    fn crowd_and_void_predictions_are_ignored() {
        let crowd = SegmentInfo {
            id: 2,
            category_id: 3,
            is_crowd: true,
        };
        let gt = map(4, vec![2, 2, 2, 2, 0, 0, 0, 0], vec![crowd]);
        let pred = map(4, vec![1, 1, 1, 0, 5, 5, 5, 0], vec![seg(1, 3), seg(5, 4)]);
        let m = match_segments(&pred, &gt).unwrap();
        assert!(m.matches.is_empty());
        assert!(m.unmatched_gt.is_empty());
        assert_eq!(m.ignored_pred, vec![1, 5]);
        assert_eq!(pq(&pred, &gt).unwrap().fp, 0);
    }

    #[test]
    fn aggregation_examples() {
        let (a, v) = aggregate_scores(&[0.2, 0.4, 0.6]).unwrap();
        assert!((a - 0.4).abs() < 1e-12);
        assert!((v - 0.08 / 3.0).abs() < 1e-12);
        assert_eq!(aggregate_scores(&[0.7]).unwrap(), (0.7, 0.0));
        assert!(aggregate_scores(&[]).is_err());
    }

    #[test]
    fn global_pools_counts() {
        let gt = map(4, vec![1, 1, 2, 2, 1, 1, 2, 2], vec![seg(1, 1), seg(2, 2)]);
        let pred = map(4, vec![1, 1, 0, 0, 1, 1, 0, 0], vec![seg(1, 1)]);
        let cat = pq_with(&pred, &gt, Averaging::Category).unwrap();
        let glob = pq_with(&pred, &gt, Averaging::Global).unwrap();
        assert!((cat.pq - 0.5).abs() < 1e-12);
        assert!((glob.pq - 1.0 / 1.5).abs() < 1e-12);
    }
}
