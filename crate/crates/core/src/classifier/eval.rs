use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{argmax, ClassifierError, ClassifierModel, DatasetItem};
use crate::generators::FamilyLabel;

/// Confusion matrix (`confusion[actual][predicted]`) and the per-class
/// metrics derived from it. Metrics with a zero denominator are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<FamilyLabel>,
    pub confusion: Vec<Vec<usize>>,
    pub precision: Vec<Option<f64>>,
    pub recall: Vec<Option<f64>>,
    pub accuracy: f64,
}

impl EvalReport {
    pub fn from_predictions(
        labels: &[FamilyLabel],
        pairs: impl IntoIterator<Item = (FamilyLabel, FamilyLabel)>,
    ) -> Self {
        let c = labels.len();
        let pos = |l: FamilyLabel| labels.iter().position(|&x| x == l).expect("known label");
        let mut confusion = vec![vec![0usize; c]; c];
        for (actual, predicted) in pairs {
            confusion[pos(actual)][pos(predicted)] += 1;
        }
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let precision = (0..c)
            .map(|j| ratio(confusion[j][j], (0..c).map(|i| confusion[i][j]).sum()))
            .collect();
        let recall = (0..c)
            .map(|i| ratio(confusion[i][i], confusion[i].iter().sum()))
            .collect();
        let total: usize = confusion.iter().flatten().sum();
        let correct: usize = (0..c).map(|i| confusion[i][i]).sum();
        Self {
            labels: labels.to_vec(),
            confusion,
            precision,
            recall,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        }
    }

    pub fn recall_of(&self, label: FamilyLabel) -> Option<f64> {
        self.labels.iter().position(|&l| l == label).and_then(|i| self.recall[i])
    }

    pub fn precision_of(&self, label: FamilyLabel) -> Option<f64> {
        self.labels.iter().position(|&l| l == label).and_then(|i| self.precision[i])
    }

    /// Mean of the defined per-class recalls.
    pub fn macro_recall(&self) -> f64 {
        let defined: Vec<f64> = self.recall.iter().flatten().copied().collect();
        if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        }
    }
}

pub fn evaluate(model: &ClassifierModel, test: &[DatasetItem]) -> Result<EvalReport, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyTestSplit);
    }
    let pairs = test
        .iter()
        .map(|it| {
            let probs = model.predict(&it.image)?;
            Ok((it.label, model.labels[argmax(&probs)]))
        })
        .collect::<Result<Vec<_>, ClassifierError>>()?;
    Ok(EvalReport::from_predictions(&model.labels, pairs))
}

/// Precision/recall table, one column per family:
///
/// ```text
/// Precision and recall (with VRA)
///               ER      NCN       WS       BA
/// Precision  100.0%   100.0%   100.0%   100.0%
/// Recall     100.0%   100.0%   100.0%   100.0%
/// ```
pub fn format_table(report: &EvalReport, title: &str) -> String {
    let cell = |v: Option<f64>| match v {
        Some(x) => format!("{:>8}", format!("{:.1}%", 100.0 * x)),
        None => format!("{:>8}", "n/a"),
    };
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "{:<10}", "");
    for l in &report.labels {
        let _ = write!(out, " {:>8}", l.as_str());
    }
    out.push('\n');
    for (name, row) in [("Precision", &report.precision), ("Recall", &report.recall)] {
        let _ = write!(out, "{name:<10}");
        for &v in row {
            let _ = write!(out, " {}", cell(v));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "Accuracy   {:.1}%", 100.0 * report.accuracy);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    const ALL: [FamilyLabel; 4] = FamilyLabel::ALL;

    #[test]
    fn perfect_predictor() {
        let pairs = ALL.iter().flat_map(|&l| std::iter::repeat_n((l, l), 5));
        let r = EvalReport::from_predictions(&ALL, pairs);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r.confusion[i][j], if i == j { 5 } else { 0 });
            }
        }
        assert!(r.precision.iter().chain(&r.recall).all(|&v| v == Some(1.0)));
        assert_eq!(r.accuracy, 1.0);
        let table = format_table(&r, "t");
        assert_eq!(table.matches("100.0%").count(), 9);
    }

    #[test]
    fn metrics_from_confusion() {
        use FamilyLabel::*;
        let pairs = [
            (ER, ER), (ER, ER), (ER, WS),
            (WS, WS), (WS, NCN),
            (NCN, NCN),
        ];
        let r = EvalReport::from_predictions(&ALL, pairs);
        assert_eq!(r.recall_of(ER), Some(2.0 / 3.0));
        assert_eq!(r.precision_of(WS), Some(0.5));
        assert_eq!(r.precision_of(NCN), Some(0.5));
        assert_eq!(r.recall_of(BA), None, "absent class is undefined, not zero");
        assert_eq!(r.precision_of(BA), None);
        for (i, row) in r.confusion.iter().enumerate() {
            let expected = pairs.iter().filter(|(a, _)| a.index() == i).count();
            assert_eq!(row.iter().sum::<usize>(), expected);
        }
        assert!((r.accuracy - 4.0 / 6.0).abs() < 1e-12);
        assert!(format_table(&r, "t").contains("n/a"));
    }

    #[test]
    fn uniform_random_predictor_is_near_chance() {
        // 4000 balanced items: accuracy ~ Binomial(4000, 1/4) / 4000, sd ≈ 0.00685.
        let mut rng = crate::rng::rng_from_seed(12);
        let pairs: Vec<_> = (0..4000)
            .map(|i| (ALL[i % 4], ALL[rng.random_range(0..4)]))
            .collect();
        let r = EvalReport::from_predictions(&ALL, pairs);
        let sd = (0.25f64 * 0.75 / 4000.0).sqrt();
        assert!((r.accuracy - 0.25).abs() < 4.0 * sd, "{}", r.accuracy);
    }
}
