//! Disagreement between metrics, measured as the Frobenius norm of the
//! difference of their distance matrices.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{DistanceMatrix, View};

/// Row/column order of the comparison table.
pub const TABLE_ORDER: [View; 4] = [View::Embedding, View::Token, View::Pos, View::Dep];

fn table_rank(v: View) -> usize {
    TABLE_ORDER.iter().position(|&x| x == v).unwrap_or(TABLE_ORDER.len())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MetricComparison {
    pub metrics: Vec<View>,
    pub table: Vec<Vec<f64>>,
}

impl MetricComparison {
    pub fn get(&self, a: View, b: View) -> Option<f64> {
        let i = self.metrics.iter().position(|&m| m == a)?;
        let j = self.metrics.iter().position(|&m| m == b)?;
        Some(self.table[i][j])
    }
}

/// `sqrt(sum((a - b)^2))` over all entries.
pub fn frobenius_distance(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<f64> {
    if a.n != b.n || a.entries.len() != b.entries.len() {
        return Err(Error::DimensionMismatch { left: a.n, right: b.n });
    }
    let sum: f64 = a.entries.iter().zip(&b.entries).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(sum))
}

/// All pairwise Frobenius distances, laid out Embedding, Token, POS, Dep.
pub fn metric_table(matrices: &[&DistanceMatrix]) -> Result<MetricComparison> {
    if matrices.len() < 2 {
        return Err(Error::TooFewMetrics(matrices.len()));
    }
    let mut ordered: Vec<&DistanceMatrix> = matrices.to_vec();
    ordered.sort_by_key(|m| table_rank(m.metric));
    let k = ordered.len();
    let mut table = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = frobenius_distance(ordered[i], ordered[j])?;
            table[i][j] = d;
            table[j][i] = d;
        }
    }
    Ok(MetricComparison {
        metrics: ordered.iter().map(|m| m.metric).collect(),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(view: View, rows: &[&[f64]]) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        DistanceMatrix::from_rows(view, &rows)
    }

    #[test]
    fn two_unit_differences() {
        let a = m(View::Token, &[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = m(View::Pos, &[&[0.0, 0.0], &[0.0, 0.0]]);
        assert!((frobenius_distance(&a, &b).unwrap() - core::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(frobenius_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = m(View::Token, &[&[0.0]]);
        let b = m(View::Pos, &[&[0.0, 0.0], &[0.0, 0.0]]);
        assert!(frobenius_distance(&a, &b).is_err());
    }

    #[test]
    fn table_layout_and_identity() {
        let tok = m(View::Token, &[&[0.0, 0.5], &[0.5, 0.0]]);
        let mut pos = tok.clone();
        pos.metric = View::Pos;
        let emb = m(View::Embedding, &[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = metric_table(&[&pos, &tok, &emb]).unwrap();
        assert_eq!(t.metrics, vec![View::Embedding, View::Token, View::Pos]);
        assert_eq!(t.get(View::Token, View::Pos), Some(0.0));
        for i in 0..3 {
            assert_eq!(t.table[i][i], 0.0);
            for j in 0..3 {
                assert_eq!(t.table[i][j], t.table[j][i]);
            }
        }
        assert_eq!(t.get(View::Dep, View::Pos), None);
    }

    #[test]
    fn needs_two_metrics() {
        let tok = m(View::Token, &[&[0.0]]);
        assert_eq!(metric_table(&[&tok]), Err(Error::TooFewMetrics(1)));
    }
}
