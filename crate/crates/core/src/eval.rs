//! Accuracy and macro-averaged precision, recall and F1.

use serde_json::{Map, Value};

use crate::corpus::DatasetSpec;
use crate::error::{Error, Result};

/// Counts indexed `[gold][predicted]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
    total: u64,
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, gold: usize, predicted: usize) -> u64 {
        self.counts[gold * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    pub fn row_sum(&self, gold: usize) -> u64 {
        (0..self.classes).map(|p| self.get(gold, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.classes).map(|g| self.get(g, predicted)).sum()
    }
}

pub fn confusion(golds: &[usize], preds: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if golds.len() != preds.len() {
        return Err(Error::DimensionMismatch {
            expected: golds.len(),
            actual: preds.len(),
        });
    }
    let mut counts = vec![0u64; classes * classes];
    for (&g, &p) in golds.iter().zip(preds) {
        for label in [g, p] {
            if label >= classes {
                return Err(Error::LabelOutOfRange { label, classes });
            }
        }
        counts[g * classes + p] += 1;
    }
    Ok(ConfusionMatrix {
        classes,
        counts,
        total: golds.len() as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// How the macro F1 is aggregated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MacroF1 {
    /// Unweighted mean of per-class F1.
    #[default]
    MeanOfClassF1,
    /// Harmonic mean of macro precision and macro recall.
    HarmonicOfMacro,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Metrics {
    compute_metrics_with(cm, MacroF1::default())
}

/// Undefined ratios (0/0) count as 0. Absent classes still take part in the
/// macro averages.
pub fn compute_metrics_with(cm: &ConfusionMatrix, aggregation: MacroF1) -> Metrics {
    let k = cm.classes();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.get(c, c);
            let precision = ratio(tp, cm.col_sum(c));
            let recall = ratio(tp, cm.row_sum(c));
            ClassMetrics {
                precision,
                recall,
                f1: harmonic(precision, recall),
            }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    let macro_precision = mean(|m| m.precision);
    let macro_recall = mean(|m| m.recall);
    let macro_f1 = match aggregation {
        MacroF1::MeanOfClassF1 => mean(|m| m.f1),
        MacroF1::HarmonicOfMacro => harmonic(macro_precision, macro_recall),
    };
    Metrics {
        accuracy: ratio(cm.trace(), cm.total()),
        per_class,
        macro_precision,
        macro_recall,
        macro_f1,
    }
}

impl Metrics {
    /// Report entries in output order.
    pub fn entries(&self, spec: &DatasetSpec) -> Vec<(String, f64)> {
        let mut out = vec![
            ("accuracy".to_string(), self.accuracy),
            ("macro_p".to_string(), self.macro_precision),
            ("macro_r".to_string(), self.macro_recall),
            ("macro_f1".to_string(), self.macro_f1),
        ];
        for (name, m) in spec.class_names().iter().zip(&self.per_class) {
            out.push((format!("p_{name}"), m.precision));
            out.push((format!("r_{name}"), m.recall));
            out.push((format!("f1_{name}"), m.f1));
        }
        out
    }

    pub fn to_tsv(&self, spec: &DatasetSpec) -> String {
        self.entries(spec)
            .into_iter()
            .map(|(k, v)| format!("{k}\t{v:.6}\n"))
            .collect()
    }

    pub fn to_json(&self, spec: &DatasetSpec) -> String {
        let map: Map<String, Value> = self
            .entries(spec)
            .into_iter()
            .map(|(k, v)| (k, Value::from(v)))
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("finite metrics");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_confusion() {
        let cm = confusion(&[0, 1], &[0, 1], 2).unwrap();
        assert_eq!(cm.trace(), 2);
        assert_eq!(cm.get(0, 1), 0);
    }

    #[test]
    fn single_error_is_off_diagonal() {
        let cm = confusion(&[0], &[1], 2).unwrap();
        assert_eq!(cm.get(0, 1), 1);
        assert_eq!(cm.trace(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(confusion(&[0, 1], &[0], 2).is_err());
        assert!(matches!(
            confusion(&[0, 2], &[0, 1], 2),
            Err(Error::LabelOutOfRange { label: 2, .. })
        ));
    }

    #[test]
    fn perfect_predictions() {
        let m = compute_metrics(&confusion(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap());
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn all_one_class_predicted() {
        // golds A A B B, preds A A A A
        let m = compute_metrics(&confusion(&[0, 0, 1, 1], &[0, 0, 0, 0], 2).unwrap());
        assert_eq!(m.per_class[0].precision, 0.5);
        assert_eq!(m.per_class[0].recall, 1.0);
        assert!((m.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            m.per_class[1],
            ClassMetrics {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0
            }
        );
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.accuracy, 0.5);

        let h = compute_metrics_with(
            &confusion(&[0, 0, 1, 1], &[0, 0, 0, 0], 2).unwrap(),
            MacroF1::HarmonicOfMacro,
        );
        // macro P = 0.25, macro R = 0.5
        assert!((h.macro_f1 - 2.0 * 0.25 * 0.5 / 0.75).abs() < 1e-15);
    }

    #[test]
    fn report_keys_follow_the_class_list() {
        let spec = DatasetSpec::new(["tech", "world"]).unwrap();
        let m = compute_metrics(&confusion(&[0, 1], &[0, 1], 2).unwrap());
        let keys: Vec<String> = m.entries(&spec).into_iter().map(|(k, _)| k).collect();
        assert_eq!(
            keys,
            [
                "accuracy", "macro_p", "macro_r", "macro_f1", "p_tech", "r_tech", "f1_tech",
                "p_world", "r_world", "f1_world"
            ]
        );
        assert!(m.to_tsv(&spec).starts_with("accuracy\t1.000000\n"));
        let json: Value = serde_json::from_str(&m.to_json(&spec)).unwrap();
        assert_eq!(json["macro_f1"], 1.0);
    }
}
