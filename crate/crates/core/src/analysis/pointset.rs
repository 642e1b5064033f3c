use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::scalar::Scalar;
use crate::tree::GeneratorTree;

/// Points closer than this are treated as one.
pub const DEDUP_TOL: f64 = 1e-12;

/// Finite planar point set, deduplicated, order of first occurrence kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PointSet<T> {
    pub points: Vec<Point2<T>>,
    pub label: String,
}

impl<T: Scalar> PointSet<T> {
    pub fn new(points: Vec<Point2<T>>, label: impl Into<String>) -> Self {
        Self {
            points: dedup(points, T::lit(DEDUP_TOL)),
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn cell<T: Scalar>(p: Point2<T>, tol: T) -> (i64, i64) {
    let f = |v: T| (v / tol).floor().to_f64_lossy().clamp(-9.0e18, 9.0e18) as i64;
    (f(p.x), f(p.y))
}

fn dedup<T: Scalar>(points: Vec<Point2<T>>, tol: T) -> Vec<Point2<T>> {
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<Point2<T>> = Vec::with_capacity(points.len());
    'outer: for p in points {
        let (cx, cy) = cell(p, tol);
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if let Some(ids) = grid.get(&(cx.saturating_add(dx), cy.saturating_add(dy))) {
                    if ids.iter().any(|&k| kept[k].distance(p) <= tol) {
                        continue 'outer;
                    }
                }
            }
        }
        grid.entry((cx, cy)).or_default().push(kept.len());
        kept.push(p);
    }
    kept
}

/// `E_k`: endpoints of all depth-`k` branches, in branch order.
pub fn endpoint_set<T: Scalar>(tree: &GeneratorTree<T>, depth: usize) -> Result<PointSet<T>> {
    let available = tree.max_depth();
    if tree.is_empty() || depth > available {
        return Err(Error::DepthUnavailable {
            requested: depth,
            available,
        });
    }
    let pts = tree.at_depth(depth).map(|b| b.end().position()).collect();
    Ok(PointSet::new(pts, format!("E_{depth}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_keeps_first() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(5e-13, 0.0),
            Point2::new(1.0, 1.0 + 1e-9),
        ];
        let s = PointSet::new(pts, "t");
        assert_eq!(
            s.points,
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(1.0, 1.0 + 1e-9)
            ]
        );
    }
}
