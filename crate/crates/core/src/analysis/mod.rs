//! Numerical analysis of trees: point sets, Hausdorff distances, canopy
//! convergence and parameter recovery from scaffolds.

mod canopy;
mod hausdorff;
mod pointset;
mod recovery;

pub use canopy::{canopy_equivalence_report, endpoint_agreement, CanopyReport, CanopyRow};
pub use hausdorff::{hausdorff, hausdorff_bucketed};
pub use pointset::{endpoint_set, PointSet, DEDUP_TOL};
pub use recovery::{recover_parameters, RecoveryRow, RecoveryTable, MIN_EDGE_LENGTH};
