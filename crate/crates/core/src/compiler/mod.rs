//! Compiles discrete tree fractals into generator trees and certifies the
//! correspondence between the two.

mod certificate;
mod curve;
mod policy;

pub use certificate::{certify, match_trees, Certificate, NodeGap};
pub use curve::{curve_to_generator, AnalyticCurve, CurveGenerator};
pub use policy::{
    fit_edge, EdgeFit, EdgePolicy, BISECTION_MAX_ITER, BISECTION_TOL, SPIRAL_TURN_RATIO,
    STRAIGHT_ANGLE_TOL,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frontend::DiscreteTree;
use crate::generator::{integrate, GeneratorState, IntegrationOptions};
use crate::geom::wrap_angle;
use crate::scalar::Scalar;
use crate::tree::{BranchRealization, GeneratorTree, DEFAULT_BRANCH_CAP};

/// Inherited and fitted start headings may differ by at most this (or by
/// 1000 ulps of the scalar type, whichever is larger).
pub const HEADING_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions<T> {
    pub policy: EdgePolicy<T>,
    /// Arc-length span of every compiled branch.
    pub span: T,
    pub integration: IntegrationOptions<T>,
    pub branch_cap: usize,
}

impl<T: Scalar> Default for CompileOptions<T> {
    fn default() -> Self {
        Self {
            policy: EdgePolicy::default(),
            span: T::one(),
            integration: IntegrationOptions::default(),
            branch_cap: DEFAULT_BRANCH_CAP,
        }
    }
}

/// Realizes every edge of `dtree` as a generator branch.
///
/// Branch `i` realizes the edge into discrete node `i + 1`. Each child
/// starts from an exact copy of its parent's end state (plus the policy's
/// heading offset, if it sets one) and aims at the absolute position of its
/// discrete node, so fitting errors do not accumulate down the tree.
pub fn compile<T: Scalar>(
    dtree: &DiscreteTree<T>,
    opts: &CompileOptions<T>,
) -> Result<GeneratorTree<T>> {
    dtree.validate()?;
    if !(opts.span > T::zero()) || !opts.span.is_finite() {
        return Err(Error::InvalidArgument("span must be positive".into()));
    }
    let n = dtree.edge_count();
    if n == 0 {
        return Err(Error::InvalidArgument("discrete tree has no edges".into()));
    }
    if n > opts.branch_cap {
        return Err(Error::BranchBudgetExceeded {
            requested: n as u128,
            cap: opts.branch_cap,
        });
    }
    let trunks = dtree.nodes.iter().filter(|v| v.parent == Some(0)).count();
    if trunks != 1 {
        return Err(Error::InvalidArgument(format!(
            "discrete tree must have exactly one trunk edge, found {trunks}"
        )));
    }

    // group branch ids by depth; parents always sit one level up
    let max_depth = dtree.max_depth();
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); max_depth];
    for node in dtree.nodes.iter().skip(1) {
        levels[node.depth - 1].push(node.id - 1);
    }

    let base = &dtree.nodes[0];
    let root_state = GeneratorState::new(
        base.position.x,
        base.position.y,
        dtree.root_heading,
        T::zero(),
    );
    let mut slots: Vec<Option<BranchRealization<T>>> = vec![None; n];
    let span = (T::zero(), opts.span);
    let heading_tol = T::lit(HEADING_CHECK_TOL).max(T::epsilon() * T::lit(1e3));
    for level in &levels {
        let built: Vec<Result<BranchRealization<T>>> = level
            .par_iter()
            .map(|&id| {
                let node = &dtree.nodes[id + 1];
                let parent_branch = node.parent.and_then(|p| p.checked_sub(1));
                let inherited = match parent_branch {
                    Some(p) => *slots[p].as_ref().expect("parent compiled first").end(),
                    None => root_state,
                };
                let label = node.label.clone();
                let sigma = label.as_ref().map_or(crate::tree::Sign::Plus, |l| l.sigma);
                let fit = fit_edge(
                    &opts.policy,
                    inherited.position(),
                    inherited.theta,
                    node.position,
                    opts.span,
                    sigma,
                    id,
                )?;
                let gen = curve_to_generator(&fit.curve, T::zero())?;
                let mut init = inherited;
                if let Some(off) = fit.heading_override {
                    init.theta += off;
                }
                if wrap_angle(gen.theta0 - init.theta).abs() > heading_tol {
                    return Err(Error::InvalidArgument(format!(
                        "fitted start heading of branch {id} disagrees with the inherited state"
                    )));
                }
                let trajectory = integrate(&gen.field, init, span, &opts.integration)?;
                Ok(BranchRealization {
                    id,
                    parent: parent_branch,
                    depth: node.depth - 1,
                    field: gen.field,
                    init,
                    span,
                    trajectory,
                    rule: None,
                    label,
                    heading_override: fit.heading_override,
                })
            })
            .collect();
        for b in built {
            let b = b?;
            let id = b.id;
            slots[id] = Some(b);
        }
    }
    let branches = slots
        .into_iter()
        .map(|b| b.expect("every branch compiled"))
        .collect();
    Ok(GeneratorTree {
        branches,
        schedule: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{expand_discrete, DiscreteSpec, LSystemSpec, SimilarityMap};
    use crate::geom::Point2;
    use crate::tree::check_branch_continuity;
    use std::f64::consts::PI;

    fn binary_ifs() -> Vec<SimilarityMap<f64>> {
        let t = Point2::new(0.0, 1.0);
        vec![
            SimilarityMap::new(0.6, PI / 5.0, t),
            SimilarityMap::new(0.6, -PI / 5.0, t),
        ]
    }

    #[test]
    fn compiled_ifs_has_one_branch_per_edge() {
        let d = expand_discrete(DiscreteSpec::Ifs(&binary_ifs()), 6, Point2::zero(), 1.0).unwrap();
        for policy in [EdgePolicy::StraightChord, EdgePolicy::MatchedHeadingSpiral] {
            let opts = CompileOptions {
                policy,
                ..CompileOptions::default()
            };
            let t = compile(&d, &opts).unwrap();
            assert_eq!(t.len(), 127);
            t.validate_structure().unwrap();
            assert!(check_branch_continuity(&t).is_exact());
            for (i, b) in t.branches.iter().enumerate() {
                assert!(b.end().position().distance(d.nodes[i + 1].position) < 1e-12);
            }
        }
    }

    #[test]
    fn lsystem_compiles_in_turtle_order() {
        let ls = LSystemSpec {
            axiom: "F".into(),
            rules: [('F', "F[+F]F[-F]F".to_string())].into_iter().collect(),
            angle: PI / 6.0,
            max_iterations: 6,
        };
        let d = expand_discrete(DiscreteSpec::LSystem(&ls), 3, Point2::zero(), 1.0).unwrap();
        let t = compile(&d, &CompileOptions::default()).unwrap();
        assert_eq!(t.len(), 125);
        assert!(check_branch_continuity(&t).is_exact());
    }

    #[test]
    fn multiple_trunks_rejected() {
        let ls = LSystemSpec::<f64> {
            axiom: "[F]F".into(),
            rules: Default::default(),
            angle: 0.3,
            max_iterations: 0,
        };
        let d = expand_discrete(DiscreteSpec::LSystem(&ls), 0, Point2::zero(), 1.0).unwrap();
        assert!(matches!(
            compile(&d, &CompileOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
