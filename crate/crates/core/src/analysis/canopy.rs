use serde::{Deserialize, Serialize};

use super::{endpoint_set, hausdorff, PointSet};
use crate::error::{Error, Result};
use crate::frontend::{attractor_points, SimilarityMap};
use crate::scalar::Scalar;
use crate::tree::GeneratorTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CanopyRow<T> {
    pub k: usize,
    /// `d_H(E_k, A_ref)`
    pub hausdorff: T,
    /// Decay ratio fitted on rows up to and including this one.
    pub fitted_ratio: Option<T>,
}

/// How fast the branch endpoints approach the attractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CanopyReport<T> {
    pub reference_depth: usize,
    pub rows: Vec<CanopyRow<T>>,
    /// `exp` of the least-squares slope of `ln d_H` against `k`.
    pub fitted_ratio: Option<T>,
    pub lambda_max: T,
    /// Distances strictly decrease with `k`.
    pub monotone: bool,
}

impl<T: Scalar> CanopyReport<T> {
    /// Columns: `k, hausdorff, fitted_ratio`.
    pub fn to_csv(&self) -> Result<String> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "hausdorff", "fitted_ratio"])
            .map_err(io)?;
        for r in &self.rows {
            let ratio = r
                .fitted_ratio
                .map(|v| format!("{:.12e}", v.to_f64_lossy()))
                .unwrap_or_default();
            w.write_record([
                r.k.to_string(),
                format!("{:.12e}", r.hausdorff.to_f64_lossy()),
                ratio,
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

fn fit_ratio<T: Scalar>(rows: &[(usize, T)]) -> Option<T> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, d)| *d > T::zero())
        .map(|(k, d)| (*k as f64, d.to_f64_lossy().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| T::lit((sxy / sxx).exp()))
}

/// Reference point of the canopy: the end of the trunk branch.
pub(crate) fn apex_of<T: Scalar>(tree: &GeneratorTree<T>) -> Result<crate::geom::Point2<T>> {
    if tree.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(tree.root().end().position())
}

/// Hausdorff distances from the depth-`k` endpoints of `tree` to the
/// attractor approximant `A_{reference_depth}` seeded at the trunk end.
///
/// `reference_depth` must be at least every requested `k`.
pub fn canopy_equivalence_report<T: Scalar>(
    tree: &GeneratorTree<T>,
    maps: &[SimilarityMap<T>],
    ks: &[usize],
    reference_depth: usize,
) -> Result<CanopyReport<T>> {
    if let Some(&k) = ks.iter().find(|&&k| k > reference_depth) {
        return Err(Error::InvalidArgument(format!(
            "reference depth {reference_depth} is below requested depth {k}"
        )));
    }
    let apex = apex_of(tree)?;
    let reference: PointSet<T> = attractor_points(maps, reference_depth, apex)?;
    let mut raw = Vec::with_capacity(ks.len());
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let e = endpoint_set(tree, k)?;
        let d = hausdorff(&e, &reference)?;
        raw.push((k, d));
        rows.push(CanopyRow {
            k,
            hausdorff: d,
            fitted_ratio: fit_ratio(&raw),
        });
    }
    let monotone = raw.windows(2).all(|w| w[1].1 < w[0].1);
    let lambda_max = maps.iter().fold(T::zero(), |m, f| m.max(f.lambda));
    Ok(CanopyReport {
        reference_depth,
        fitted_ratio: fit_ratio(&raw),
        rows,
        lambda_max,
        monotone,
    })
}

/// `d_H(E_k, A_k)` with both sets seeded at the trunk end.
pub fn endpoint_agreement<T: Scalar>(
    tree: &GeneratorTree<T>,
    maps: &[SimilarityMap<T>],
    k: usize,
) -> Result<T> {
    let apex = apex_of(tree)?;
    hausdorff(&endpoint_set(tree, k)?, &attractor_points(maps, k, apex)?)
}
