#![allow(dead_code)]

use std::f64::consts::PI;

use arbor_core::frontend::{
    expand_discrete, DiscreteSpec, DiscreteTree, LSystemSpec, SimilarityMap,
};
use arbor_core::generator::{
    GeneratorField, GeneratorState, IntegrationOptions, IntegratorChoice, PhaseMode, Retention,
};
use arbor_core::profile::AnalyticProfile;
use arbor_core::tree::{grow_tree, BranchEvent, GeneratorTree, GrowOptions, Schedule};
use arbor_core::Point2;

/// Exponential speed 0.88, turning pi/10, global phase.
pub fn decay_field() -> GeneratorField<f64> {
    GeneratorField::new(
        AnalyticProfile::exponential(0.88),
        AnalyticProfile::constant(PI / 10.0),
        PhaseMode::Global,
    )
}

pub fn upright() -> GeneratorState<f64> {
    GeneratorState::new(0.0, 0.0, PI / 2.0, 0.0)
}

pub fn opts(retention: Retention) -> GrowOptions<f64> {
    GrowOptions {
        integration: IntegrationOptions {
            method: IntegratorChoice::Auto,
            step: 1e-3,
            retention,
        },
        ..GrowOptions::default()
    }
}

/// Binary tree with unit inheritance ratio; the global phase supplies the
/// per-generation decay.
pub fn decay_tree(depth: usize, retention: Retention) -> GeneratorTree<f64> {
    grow_tree(
        &decay_field(),
        upright(),
        1.0,
        &Schedule::uniform(BranchEvent::binary(1.0)),
        depth,
        &opts(retention),
    )
    .expect("decay tree grows")
}

/// Two maps `0.6 R(+-pi/5) x + (0, 1)`.
pub fn binary_ifs_maps() -> Vec<SimilarityMap<f64>> {
    let t = Point2::new(0.0, 1.0);
    vec![
        SimilarityMap::new(0.6, PI / 5.0, t),
        SimilarityMap::new(0.6, -PI / 5.0, t),
    ]
}

pub fn binary_ifs_discrete(depth: usize) -> DiscreteTree<f64> {
    expand_discrete(
        DiscreteSpec::Ifs(&binary_ifs_maps()),
        depth,
        Point2::zero(),
        1.0,
    )
    .unwrap()
}

/// `F -> F[+F][-F]` with a 30 degree turn.
pub fn ternary_lsystem() -> LSystemSpec<f64> {
    LSystemSpec {
        axiom: "F".into(),
        rules: [('F', "F[+F][-F]".to_string())].into_iter().collect(),
        angle: PI / 6.0,
        max_iterations: 10,
    }
}

pub fn ternary_discrete(depth: usize) -> DiscreteTree<f64> {
    expand_discrete(
        DiscreteSpec::LSystem(&ternary_lsystem()),
        depth,
        Point2::zero(),
        0.6,
    )
    .unwrap()
}
