//! Prediction files: one line per input, `label<TAB>s_0 s_1 … s_{K-1}`.
//!
//! Neural models write softmax probabilities, the SVM writes squashed
//! per-class scores, and voted files write the winning confidence in the
//! winner's column and zeros elsewhere. In every case the value in the
//! label's column is the prediction's confidence.

use std::fs;
use std::path::Path;

use crate::corpus::DatasetSpec;
use crate::ensemble::Prediction;
use crate::error::{Error, Result};
use crate::textfmt::{parse_row, push_values};

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRow {
    pub label: usize,
    pub scores: Vec<f64>,
}

impl PredictionRow {
    pub fn confidence(&self) -> f64 {
        self.scores[self.label].clamp(0.0, 1.0)
    }

    pub fn to_prediction(&self) -> Prediction {
        Prediction {
            label: self.label,
            confidence: self.confidence(),
        }
    }

    /// A voted result: the confidence in the winner's column, zeros elsewhere.
    pub fn from_vote(p: Prediction, classes: usize) -> Self {
        let mut scores = vec![0.0; classes];
        scores[p.label] = p.confidence;
        PredictionRow {
            label: p.label,
            scores,
        }
    }
}

pub fn format_predictions(rows: &[PredictionRow], spec: &DatasetSpec) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(spec.class_name(row.label));
        out.push('\t');
        let mut values = String::new();
        push_values(&mut values, &row.scores);
        out.push_str(&values[1..]);
        out.push('\n');
    }
    out
}

pub fn parse_predictions(text: &str, spec: &DatasetSpec) -> Result<Vec<PredictionRow>> {
    let k = spec.num_classes();
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 1;
            let (label, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "missing TAB after label"))?;
            let label = spec
                .label_of(label)
                .ok_or_else(|| Error::parse(line_no, format!("unknown label `{label}`")))?;
            let scores = parse_row(rest.split(' '), k, line_no)?;
            Ok(PredictionRow { label, scores })
        })
        .collect()
}

pub fn load_predictions(path: impl AsRef<Path>, spec: &DatasetSpec) -> Result<Vec<PredictionRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text, spec).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let spec = DatasetSpec::new(["a", "b", "c"]).unwrap();
        let rows = vec![
            PredictionRow {
                label: 1,
                scores: vec![0.2, 0.7, 0.1],
            },
            PredictionRow::from_vote(
                Prediction {
                    label: 2,
                    confidence: 0.55,
                },
                3,
            ),
        ];
        let text = format_predictions(&rows, &spec);
        assert_eq!(
            text,
            "b\t0.200000 0.700000 0.100000\nc\t0.000000 0.000000 0.550000\n"
        );
        let back = parse_predictions(&text, &spec).unwrap();
        assert_eq!(back, rows);
        assert_eq!(format_predictions(&back, &spec), text);
        assert_eq!(
            back[1].to_prediction(),
            Prediction {
                label: 2,
                confidence: 0.55
            }
        );
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let spec = DatasetSpec::new(["a", "b"]).unwrap();
        assert!(matches!(
            parse_predictions("a\t0.5 0.5\nb\t1.0\n", &spec),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
