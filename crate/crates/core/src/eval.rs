//! Class-wise precision, recall and F1 with their unweighted (macro) mean.
//!
//! Any ratio with a zero denominator is defined as 0, so a classifier that
//! never predicts a class scores F1 = 0 on it rather than NaN.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

/// Tolerance that absorbs mixed rounding in two-decimal results tables.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 0.0051;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("prediction count {preds} does not match gold count {golds}")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("cannot evaluate an empty prediction set")]
    Empty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub obj: ClassCounts,
    pub subj: ClassCounts,
}

impl ConfusionCounts {
    pub fn tally(preds: &[Label], golds: &[Label]) -> Self {
        let mut counts = ConfusionCounts::default();
        for (&pred, &gold) in preds.iter().zip(golds) {
            if pred == gold {
                counts.class_mut(gold).tp += 1;
            } else {
                counts.class_mut(pred).fp += 1;
                counts.class_mut(gold).fn_ += 1;
            }
        }
        counts
    }

    pub fn class(&self, label: Label) -> &ClassCounts {
        match label {
            Label::Obj => &self.obj,
            Label::Subj => &self.subj,
        }
    }

    fn class_mut(&mut self, label: Label) -> &mut ClassCounts {
        match label {
            Label::Obj => &mut self.obj,
            Label::Subj => &mut self.subj,
        }
    }

    pub fn gold_total(&self) -> usize {
        self.obj.tp + self.obj.fn_ + self.subj.tp + self.subj.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassScores {
    fn from_counts(c: &ClassCounts) -> Self {
        let precision = ratio(c.tp as f64, (c.tp + c.fp) as f64);
        let recall = ratio(c.tp as f64, (c.tp + c.fn_) as f64);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        Self {
            precision,
            recall,
            f1,
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub obj: ClassScores,
    pub subj: ClassScores,
    pub macro_f1: f64,
    pub counts: ConfusionCounts,
    pub n_classes: usize,
    pub n_samples: usize,
}

impl EvalReport {
    pub fn class(&self, label: Label) -> &ClassScores {
        match label {
            Label::Obj => &self.obj,
            Label::Subj => &self.subj,
        }
    }

    /// Aligned plain-text table with two-decimal, half-to-even rounding.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<7}{:>10}{:>8}{:>6}{:>6}{:>6}{:>6}", "class", "precision", "recall", "f1", "tp", "fp", "fn");
        for label in Label::ALL {
            let s = self.class(label);
            let c = self.counts.class(label);
            let _ = writeln!(
                out,
                "{:<7}{:>10}{:>8}{:>6}{:>6}{:>6}{:>6}",
                label.as_str(),
                fmt2(s.precision),
                fmt2(s.recall),
                fmt2(s.f1),
                c.tp,
                c.fp,
                c.fn_
            );
        }
        let _ = writeln!(out, "macro-F1 {} (n = {})", fmt2(self.macro_f1), self.n_samples);
        out
    }
}

pub fn evaluate(preds: &[Label], golds: &[Label]) -> Result<EvalReport, EvalError> {
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if golds.is_empty() {
        return Err(EvalError::Empty);
    }
    let counts = ConfusionCounts::tally(preds, golds);
    let obj = ClassScores::from_counts(&counts.obj);
    let subj = ClassScores::from_counts(&counts.subj);
    let n_classes = Label::ALL.len();
    Ok(EvalReport {
        obj,
        subj,
        macro_f1: (obj.f1 + subj.f1) / n_classes as f64,
        counts,
        n_classes,
        n_samples: golds.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Inconsistent { expected: f64 },
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent)
    }
}

/// Checks a reported macro score against the mean of its two class F1s.
pub fn check_row_consistency(f1_obj: f64, f1_subj: f64, reported_macro: f64, tol: f64) -> Consistency {
    let expected = (f1_obj + f1_subj) / 2.0;
    if (expected - reported_macro).abs() <= tol {
        Consistency::Consistent
    } else {
        Consistency::Inconsistent { expected }
    }
}

/// Rounds to two decimals, ties to even. Values within 1e-9 of a tie count as
/// ties so that e.g. 0.675 (stored as 0.67500000000000004) rounds to 0.68.
pub fn round2_half_even(value: f64) -> f64 {
    let scaled = value * 100.0;
    let floor = scaled.floor();
    let frac = scaled - floor;
    let rounded = if (frac - 0.5).abs() < 1e-9 {
        if floor % 2.0 == 0.0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        scaled.round()
    };
    rounded / 100.0
}

pub fn fmt2(value: f64) -> String {
    format!("{:.2}", round2_half_even(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Obj as O, Subj as S};

    #[test]
    fn worked_example() {
        let r = evaluate(&[O, S, S, S], &[O, O, S, S]).unwrap();
        assert_eq!(r.obj.precision, 1.0);
        assert_eq!(r.obj.recall, 0.5);
        assert!((r.obj.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.subj.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.subj.recall, 1.0);
        assert!((r.subj.f1 - 0.8).abs() < 1e-15);
        assert!((r.macro_f1 - 11.0 / 15.0).abs() < 1e-15);
        assert_eq!(r.counts.gold_total(), 4);
    }

    #[test]
    fn perfect_predictions() {
        let golds = [O, S, S, O, S];
        let r = evaluate(&golds, &golds).unwrap();
        assert_eq!((r.obj.f1, r.subj.f1, r.macro_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn zero_denominators_are_zero() {
        let r = evaluate(&[O, O], &[S, S]).unwrap();
        assert_eq!(r.obj, ClassScores { precision: 0.0, recall: 0.0, f1: 0.0 });
        assert_eq!(r.subj, ClassScores { precision: 0.0, recall: 0.0, f1: 0.0 });
        assert_eq!(r.macro_f1, 0.0);
    }

    #[test]
    fn input_errors() {
        assert_eq!(
            evaluate(&[O], &[O, S]).unwrap_err(),
            EvalError::LengthMismatch { preds: 1, golds: 2 }
        );
        assert_eq!(evaluate(&[], &[]).unwrap_err(), EvalError::Empty);
    }

    #[test]
    fn confusion_invariants() {
        let c = ConfusionCounts::tally(&[O, S, S, O, O], &[S, S, O, O, S]);
        assert_eq!(c.obj.fp, c.subj.fn_);
        assert_eq!(c.subj.fp, c.obj.fn_);
        assert_eq!(c.gold_total(), 5);
    }

    #[test]
    fn consistency_examples() {
        assert_eq!(check_row_consistency(0.72, 0.58, 0.65, 0.01), Consistency::Consistent);
        match check_row_consistency(0.68, 0.36, 0.75, 0.01) {
            Consistency::Inconsistent { expected } => assert!((expected - 0.52).abs() < 1e-12),
            other => panic!("expected inconsistent, got {other:?}"),
        }
        // 0.745 vs 0.75 sits right on the default tolerance edge.
        assert!(check_row_consistency(0.77, 0.72, 0.75, DEFAULT_CONSISTENCY_TOL).is_consistent());
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(fmt2(0.675), "0.68");
        assert_eq!(fmt2(0.685), "0.68");
        assert_eq!(fmt2(0.125), "0.12");
        assert_eq!(fmt2(11.0 / 15.0), "0.73");
        assert_eq!(fmt2(0.0), "0.00");
        assert_eq!(fmt2(1.0), "1.00");
    }

    #[test]
    fn table_render() {
        let r = evaluate(&[O, S, S, S], &[O, O, S, S]).unwrap();
        let table = r.to_table();
        assert!(table.contains("macro-F1 0.73 (n = 4)"), "{table}");
        assert!(table.lines().nth(1).unwrap().starts_with("OBJ"));
    }

    fn labels(n: usize) -> impl Strategy<Value = Vec<(Label, Label)>> {
        prop::collection::vec(
            (prop::bool::ANY, prop::bool::ANY).prop_map(|(p, g)| {
                (if p { S } else { O }, if g { S } else { O })
            }),
            1..n,
        )
    }

    proptest! {
        #[test]
        fn symmetric_consistency(x in 0.0f64..=1.0, tol in 0.0f64..0.1) {
            prop_assert!(check_row_consistency(x, x, x, tol).is_consistent());
        }

        #[test]
        fn permutation_invariance(pairs in labels(50), seed in any::<u64>()) {
            let (p, g): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
            let base = evaluate(&p, &g).unwrap();
            let mut shuffled = pairs.clone();
            // deterministic Fisher-Yates driven by an LCG
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let (p2, g2): (Vec<_>, Vec<_>) = shuffled.into_iter().unzip();
            prop_assert_eq!(base, evaluate(&p2, &g2).unwrap());
        }

        #[test]
        fn label_swap_symmetry(pairs in labels(50)) {
            let (p, g): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
            let swap = |v: &[Label]| v.iter().map(|l| l.opposite()).collect::<Vec<_>>();
            let a = evaluate(&p, &g).unwrap();
            let b = evaluate(&swap(&p), &swap(&g)).unwrap();
            prop_assert_eq!(a.obj, b.subj);
            prop_assert_eq!(a.subj, b.obj);
            prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-15);
        }

        #[test]
        fn scores_in_unit_interval(pairs in labels(50)) {
            let (p, g): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
            let r = evaluate(&p, &g).unwrap();
            for s in [r.obj, r.subj] {
                for v in [s.precision, s.recall, s.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            prop_assert_eq!(r.macro_f1, (r.obj.f1 + r.subj.f1) / 2.0);
        }
    }
}
