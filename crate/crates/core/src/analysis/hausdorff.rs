use rayon::prelude::*;

use super::PointSet;
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::scalar::Scalar;

fn directed<T: Scalar>(a: &[Point2<T>], b: &[Point2<T>]) -> T {
    a.par_iter()
        .map(|p| b.iter().fold(T::infinity(), |m, q| m.min(p.distance(*q))))
        .reduce(T::zero, |x, y| x.max(y))
}

/// Exact Hausdorff distance between two finite sets.
pub fn hausdorff<T: Scalar>(a: &PointSet<T>, b: &PointSet<T>) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(directed(&a.points, &b.points).max(directed(&b.points, &a.points)))
}

/// Uniform bucket grid used for exact nearest-neighbour queries.
struct Buckets<'a, T> {
    pts: &'a [Point2<T>],
    origin: Point2<T>,
    cell: T,
    nx: i64,
    ny: i64,
    cells: Vec<Vec<usize>>,
}

impl<'a, T: Scalar> Buckets<'a, T> {
    fn new(pts: &'a [Point2<T>]) -> Self {
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in pts {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let side = (hi.x - lo.x).max(hi.y - lo.y);
        let per_axis = (pts.len() as f64).sqrt().ceil().max(1.0);
        let cell = if side > T::zero() {
            side / T::lit(per_axis)
        } else {
            T::one()
        };
        let count = |d: T| ((d / cell).floor().to_f64_lossy() as i64 + 1).max(1);
        let (nx, ny) = (count(hi.x - lo.x), count(hi.y - lo.y));
        let mut cells = vec![Vec::new(); (nx * ny) as usize];
        let mut b = Self {
            pts,
            origin: lo,
            cell,
            nx,
            ny,
            cells: Vec::new(),
        };
        for (i, p) in pts.iter().enumerate() {
            let (cx, cy) = b.cell_of(*p);
            cells[(cy * nx + cx) as usize].push(i);
        }
        b.cells = cells;
        b
    }

    fn cell_of(&self, p: Point2<T>) -> (i64, i64) {
        let f = |v: T, n: i64| {
            ((v / self.cell)
                .floor()
                .to_f64_lossy()
                .clamp(-1.0e15, 1.0e15) as i64)
                .clamp(0, n - 1)
        };
        (
            f(p.x - self.origin.x, self.nx),
            f(p.y - self.origin.y, self.ny),
        )
    }

    /// Distance from `p` to its nearest point, bit-identical to a full scan.
    fn nearest(&self, p: Point2<T>) -> T {
        let (cx, cy) = self.cell_of(p);
        let mut best = T::infinity();
        let max_r = self.nx.max(self.ny);
        for r in 0..=max_r {
            for gy in (cy - r)..=(cy + r) {
                if gy < 0 || gy >= self.ny {
                    continue;
                }
                for gx in (cx - r)..=(cx + r) {
                    if gx < 0 || gx >= self.nx || ((gx - cx).abs() != r && (gy - cy).abs() != r) {
                        continue;
                    }
                    for &i in &self.cells[(gy * self.nx + gx) as usize] {
                        best = best.min(p.distance(self.pts[i]));
                    }
                }
            }
            // ring r+1 and beyond lie at least r cells from p (projection onto
            // the grid box is non-expansive); one cell of slack covers rounding
            // in the cell index
            if best <= self.cell * T::lit(r.saturating_sub(1) as f64) {
                break;
            }
        }
        best
    }
}

/// Bucket-accelerated Hausdorff distance; returns exactly the same value as
/// [`hausdorff`].
pub fn hausdorff_bucketed<T: Scalar>(a: &PointSet<T>, b: &PointSet<T>) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let one_way = |from: &[Point2<T>], to: &[Point2<T>]| {
        let grid = Buckets::new(to);
        from.par_iter()
            .map(|p| grid.nearest(*p))
            .reduce(T::zero, |x, y| x.max(y))
    };
    Ok(one_way(&a.points, &b.points).max(one_way(&b.points, &a.points)))
}
