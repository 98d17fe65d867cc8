//! Labelled sonar datasets and their CSV form.

use std::fmt::Write as _;

use crate::error::{FelmError, Result};

/// Column names of the five sonar beams, in feature order.
pub const SONAR_FEATURES: [&str; 5] = ["r180", "r172", "r164", "r156", "r148"];
pub const LABEL_COLUMN: &str = "label";

/// `P` samples of `N` features with binary targets (0 wall, 1 corner).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<u8>,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u8>, names: Vec<String>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(FelmError::DimensionMismatch { expected: features.len(), got: labels.len() });
        }
        if features.len() < 2 {
            return Err(FelmError::InvalidDataset(format!("need at least 2 samples, got {}", features.len())));
        }
        let n = names.len();
        if n == 0 {
            return Err(FelmError::InvalidDataset("no feature columns".into()));
        }
        if let Some((i, row)) = features.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(FelmError::InvalidDataset(format!("row {i} has {} features, expected {n}", row.len())));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FelmError::NonFinite("dataset features"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(FelmError::InvalidDataset(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self { features, labels, names })
    }

    /// Dataset with the five sonar beam columns.
    pub fn sonar(features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        Self::new(features, labels, SONAR_FEATURES.iter().map(|s| s.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn inputs(&self) -> usize {
        self.names.len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn targets(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| f64::from(l)).collect()
    }

    /// Samples per class `[wall, corner]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let corners = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - corners, corners]
    }

    /// Per-column `(min, max)`.
    pub fn feature_ranges(&self) -> Vec<(f64, f64)> {
        (0..self.inputs())
            .map(|k| {
                self.features.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| (lo.min(row[k]), hi.max(row[k])))
            })
            .collect()
    }

    /// Indices of columns whose values never change.
    pub fn constant_columns(&self) -> Vec<usize> {
        self.feature_ranges().iter().enumerate().filter(|(_, (lo, hi))| lo == hi).map(|(k, _)| k).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.features[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.names.clone(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.names.join(","));
        out.push(',');
        out.push_str(LABEL_COLUMN);
        out.push('\n');
        for (row, label) in self.features.iter().zip(&self.labels) {
            for v in row {
                // Display for f64 is the shortest string that parses back to the same bits
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{label}");
        }
        out
    }

    /// Parses CSV with a header row whose last column is `label`. Errors carry
    /// 1-based line numbers.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| FelmError::InvalidDataset("empty file".into()))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        if columns.len() < 2 || columns.last() != Some(&LABEL_COLUMN) {
            return Err(FelmError::InvalidDataset(format!(
                "line 1: header must end with `{LABEL_COLUMN}`, got `{header}`"
            )));
        }
        let names: Vec<String> = columns[..columns.len() - 1].iter().map(|s| s.to_string()).collect();

        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != columns.len() {
                return Err(FelmError::InvalidDataset(format!(
                    "line {lineno}: expected {} fields, got {}",
                    columns.len(),
                    cells.len()
                )));
            }
            let mut row = Vec::with_capacity(names.len());
            for (cell, name) in cells.iter().zip(&names) {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| FelmError::InvalidDataset(format!("line {lineno}: `{cell}` in column {name} is not a number")))?;
                if !v.is_finite() {
                    return Err(FelmError::InvalidDataset(format!("line {lineno}: non-finite value in column {name}")));
                }
                row.push(v);
            }
            let label = match cells[cells.len() - 1] {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(FelmError::InvalidDataset(format!("line {lineno}: label `{other}` must be 0 or 1")));
                }
            };
            features.push(row);
            labels.push(label);
        }
        Self::new(features, labels, names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_is_exact() {
        let d = Dataset::sonar(vec![vec![1.0; 5], vec![2.0; 5]], vec![0, 1]).unwrap();
        assert!(d.to_csv().starts_with("r180,r172,r164,r156,r148,label\n"));
        assert_eq!(d.class_counts(), [1, 1]);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = Dataset::from_csv("a,b,label\n1,2,0\n1,x,1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = Dataset::from_csv("a,b,label\n1,2,0\n1,2\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = Dataset::from_csv("a,b,label\n1,2,0\n1,2,7\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(Dataset::from_csv("a,b,c\n1,2,0\n").is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Dataset::sonar(vec![vec![1.0; 5]], vec![0]).is_err());
        assert!(Dataset::sonar(vec![vec![1.0; 4], vec![1.0; 5]], vec![0, 1]).is_err());
        assert!(Dataset::sonar(vec![vec![f64::NAN; 5], vec![1.0; 5]], vec![0, 1]).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(rows in proptest::collection::vec((proptest::collection::vec(-1e6..1e6f64, 5), 0u8..2), 2..20)) {
            let (features, labels): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
            let d = Dataset::sonar(features, labels).unwrap();
            let back = Dataset::from_csv(&d.to_csv()).unwrap();
            prop_assert_eq!(d, back);
        }
    }
}
