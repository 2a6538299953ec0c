use serde::{Deserialize, Serialize};

use crate::Result;

/// Mean and standard error of one reported quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub alpha: f64,
    /// `accuracy`, `sp`, `eop` or `calibration`; values are percentages.
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

/// Sample mean and `sd / sqrt(n)` with the `n - 1` denominator; a single
/// value has zero standard error.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl ResultsTable {
    pub fn push(&mut self, algorithm: &str, alpha: f64, metric: &str, values: &[f64]) {
        let (mean, stderr) = mean_stderr(values);
        self.rows.push(ResultRow {
            algorithm: algorithm.to_string(),
            alpha,
            metric: metric.to_string(),
            mean,
            stderr,
            replications: values.len(),
        });
    }

    pub fn get(&self, algorithm: &str, metric: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.metric == metric)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv_str(text: &str) -> Result<ResultsTable> {
        let rows = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(ResultsTable { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_value_standard_error() {
        // mean 2, sample variance ((1 + 0 + 1) / 2) = 1, stderr 1/sqrt(3)
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[4.5]), (4.5, 0.0));
    }

    #[test]
    fn csv_round_trip() {
        let mut t = ResultsTable::default();
        t.push("fedgft", 100.0, "sp", &[1.0, 2.0]);
        t.push("fedavg", 0.5, "accuracy", &[80.0]);
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("algorithm,alpha,metric,mean,stderr,replications\n"));
        assert_eq!(ResultsTable::from_csv_str(&text).unwrap(), t);
        assert_eq!(t.get("fedgft", "sp").unwrap().mean, 1.5);
    }
}
