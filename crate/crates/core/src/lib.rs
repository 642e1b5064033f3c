//! Analytic generator trees.
//!
//! A branch is the solution of the planar generator
//! `x' = rho cos(theta)`, `y' = rho sin(theta)`, `theta' = kappa`, `tau' = 1`
//! with analytic speed and turning profiles. Trees grow by branch events
//! that copy the parent's state exactly and rescale its profiles
//! symbolically. Discrete tree fractals (IFS and bracketed L-systems) compile
//! into such trees, and the analysis module certifies the result.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

// `!(x > 0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod compiler;
pub mod error;
pub mod export;
pub mod frontend;
pub mod generator;
pub mod geom;
pub mod profile;
pub mod render;
pub mod scaffold;
pub mod scalar;
pub mod tree;

pub use analysis::{
    canopy_equivalence_report, endpoint_agreement, endpoint_set, hausdorff, hausdorff_bucketed,
    recover_parameters, CanopyReport, PointSet, RecoveryTable,
};
pub use compiler::{
    certify, compile, curve_to_generator, AnalyticCurve, Certificate, CompileOptions, EdgePolicy,
};
pub use error::{Error, Result};
pub use export::{tree_from_json, tree_to_json};
pub use frontend::{
    attractor_points, expand_discrete, expand_discrete_with, parse_ifs, parse_lsystem,
    DiscreteSpec, DiscreteTree, EdgeLabel, ExpandOptions, LSystemSpec, SimilarityMap, SpecBody,
    SpecDocument,
};
pub use generator::{
    integrate, integrate_closed_form, integrate_rk4, realize, GeneratorField, GeneratorState,
    IntegrationOptions, IntegratorChoice, PhaseMode, Retention, Trajectory,
};
pub use geom::Point2;
pub use profile::{eval_profile, AnalyticProfile};
pub use render::{render_svg, RenderOptions};
pub use scaffold::{scaffold_of, tangent_scaffold, Scaffold};
pub use scalar::Scalar;
pub use tree::{
    check_branch_continuity, grow_tree, grow_tree_with, BranchEvent, GeneratorTree, GrowOptions,
    InheritanceRule, Schedule, Sign,
};

pub type Profile = AnalyticProfile<f64>;
pub type Field = GeneratorField<f64>;
pub type State = GeneratorState<f64>;
pub type Tree = GeneratorTree<f64>;
pub type DTree = DiscreteTree<f64>;
pub type Point = Point2<f64>;
pub type Map = SimilarityMap<f64>;
pub type ScaffoldF64 = Scaffold<f64>;
