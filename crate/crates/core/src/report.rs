//! Text exports: learned orders as TOML and benchmark matrices as CSV.

use std::io::Write;

use serde::Serialize;

use crate::cluster::FitOutcome;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::MetricReport;
use crate::metric::AttributeMetric;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEntry {
    pub attribute: String,
    pub kind: String,
    pub metric: AttributeMetric,
    pub learned: bool,
    /// Value literals from rank 1 upward.
    pub values_by_rank: Vec<String>,
    /// Consensus score of each listed value, same order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdersExport {
    pub attribute: Vec<OrderEntry>,
}

pub fn export_orders(d: &Dataset, fit: &FitOutcome) -> OrdersExport {
    let attribute = d
        .attributes()
        .iter()
        .enumerate()
        .map(|(r, attr)| {
            let by_rank = fit.orders.values_by_rank(r);
            let scores = fit.scores[r]
                .as_ref()
                .map(|s| by_rank.iter().map(|&g| s[g]).collect());
            OrderEntry {
                attribute: attr.name.clone(),
                kind: format!("{:?}", attr.kind).to_lowercase(),
                metric: fit.metrics[r],
                learned: fit.scores[r].is_some(),
                values_by_rank: by_rank.iter().map(|&g| attr.values[g].clone()).collect(),
                scores,
            }
        })
        .collect();
    OrdersExport { attribute }
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::InvalidArgument(format!("toml encoding: {e}")))
}

/// One dataset × method cell of a benchmark matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub method: String,
    pub runs: usize,
    pub ca_mean: Option<f64>,
    pub ca_std: Option<f64>,
    pub ari_mean: Option<f64>,
    pub ari_std: Option<f64>,
    pub nmi_mean: Option<f64>,
    pub nmi_std: Option<f64>,
    pub cmp_mean: Option<f64>,
    pub cmp_std: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn from_report(dataset: &str, method: &str, report: &MetricReport, seconds: f64) -> Self {
        Self {
            dataset: dataset.into(),
            method: method.into(),
            runs: report.per_seed.len(),
            ca_mean: Some(report.ca.mean),
            ca_std: Some(report.ca.std),
            ari_mean: Some(report.ari.mean),
            ari_std: Some(report.ari.std),
            nmi_mean: Some(report.nmi.mean),
            nmi_std: Some(report.nmi.std),
            cmp_mean: Some(report.cmp.mean),
            cmp_std: Some(report.cmp.std),
            seconds,
            error: None,
        }
    }

    pub fn failed(dataset: &str, method: &str, error: String) -> Self {
        Self {
            dataset: dataset.into(),
            method: method.into(),
            runs: 0,
            ca_mean: None,
            ca_std: None,
            ari_mean: None,
            ari_std: None,
            nmi_mean: None,
            nmi_std: None,
            cmp_mean: None,
            cmp_std: None,
            seconds: 0.0,
            error: Some(error),
        }
    }
}

pub fn write_csv_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{fit_ocl, FitConfig};

    #[test]
    fn orders_export_lists_values_by_rank() {
        let rows = vec![
            vec!["lo", "x"],
            vec!["lo", "x"],
            vec!["mid", "y"],
            vec!["hi", "y"],
            vec!["hi", "y"],
        ];
        let d = Dataset::from_string_rows(&["level", "flag"], &rows).unwrap();
        let fit = fit_ocl(&d, &FitConfig::new(2)).unwrap();
        let export = export_orders(&d, &fit);
        assert_eq!(export.attribute.len(), 2);
        assert!(!export.attribute[1].learned);
        let mut listed = export.attribute[0].values_by_rank.clone();
        listed.sort();
        assert_eq!(listed, vec!["hi", "lo", "mid"]);
        let text = to_toml(&export).unwrap();
        assert!(text.contains("[[attribute]]"));
    }

    #[test]
    fn failed_rows_serialize() {
        let mut buf = Vec::new();
        write_csv_rows(&mut buf, &[BenchRow::failed("x", "ocl", "boom".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with("boom"));
    }
}
