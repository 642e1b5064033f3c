use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::wrap_angle;
use crate::scaffold::Scaffold;
use crate::scalar::Scalar;

/// Edges shorter than this cannot anchor a length ratio.
pub const MIN_EDGE_LENGTH: f64 = 1e-15;

/// Per-generation statistics of the estimated contraction and turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RecoveryRow<T> {
    pub generation: usize,
    pub sample_count: usize,
    pub lambda_hat_mean: T,
    pub theta_hat_mean: T,
    pub theta_hat_abs_mean: T,
    pub lambda_hat_max_dev: T,
    pub theta_hat_max_dev: T,
    /// Larger of the two deviations.
    pub max_dev: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RecoveryTable<T> {
    pub rows: Vec<RecoveryRow<T>>,
}

impl<T: Scalar> RecoveryTable<T> {
    pub fn row(&self, generation: usize) -> Option<&RecoveryRow<T>> {
        self.rows.iter().find(|r| r.generation == generation)
    }

    /// Columns: `g, lambda_hat_mean, theta_hat_abs_mean, max_dev`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["g", "lambda_hat_mean", "theta_hat_abs_mean", "max_dev"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.generation.to_string(),
                format!("{:.12e}", r.lambda_hat_mean.to_f64_lossy()),
                format!("{:.12e}", r.theta_hat_abs_mean.to_f64_lossy()),
                format!("{:.6e}", r.max_dev.to_f64_lossy()),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Estimates `lambda_hat = |e| / |parent(e)|` and the signed turn between an
/// edge and its parent, grouped by generation `g >= 2`. Terminal legs are
/// skipped.
pub fn recover_parameters<T: Scalar>(scaffold: &Scaffold<T>) -> Result<RecoveryTable<T>> {
    let max_g = scaffold
        .edges
        .iter()
        .filter(|e| !e.terminal)
        .map(|e| e.generation)
        .max();
    let available = max_g.map_or(0, |g| g + 1);
    if available < 3 {
        return Err(Error::DepthUnavailable {
            requested: 3,
            available,
        });
    }
    let max_g = available - 1;
    let incoming = scaffold.incoming();
    let min_len = T::lit(MIN_EDGE_LENGTH);
    let mut samples: Vec<Vec<(T, T)>> = vec![Vec::new(); max_g + 1];
    for (i, e) in scaffold.edges.iter().enumerate() {
        if e.terminal || e.generation < 2 {
            continue;
        }
        let Some(pi) = incoming[e.from] else { continue };
        let p = &scaffold.edges[pi];
        if p.length <= min_len {
            return Err(Error::DegenerateEdge { edge: pi });
        }
        if e.length <= min_len {
            return Err(Error::DegenerateEdge { edge: i });
        }
        samples[e.generation].push((e.length / p.length, wrap_angle(e.direction - p.direction)));
    }
    let mut rows = Vec::new();
    for (g, s) in samples.iter().enumerate().skip(2) {
        if s.is_empty() {
            continue;
        }
        let n = T::lit(s.len() as f64);
        let lam = s.iter().map(|v| v.0).sum::<T>() / n;
        let th = s.iter().map(|v| v.1).sum::<T>() / n;
        let th_abs = s.iter().map(|v| v.1.abs()).sum::<T>() / n;
        let lam_dev = s.iter().fold(T::zero(), |m, v| m.max((v.0 - lam).abs()));
        let th_dev = s
            .iter()
            .fold(T::zero(), |m, v| m.max((v.1.abs() - th_abs).abs()));
        rows.push(RecoveryRow {
            generation: g,
            sample_count: s.len(),
            lambda_hat_mean: lam,
            theta_hat_mean: th,
            theta_hat_abs_mean: th_abs,
            lambda_hat_max_dev: lam_dev,
            theta_hat_max_dev: th_dev,
            max_dev: lam_dev.max(th_dev),
        });
    }
    Ok(RecoveryTable { rows })
}
