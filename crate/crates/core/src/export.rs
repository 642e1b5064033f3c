//! JSON export and import of generator trees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::EdgeLabel;
use crate::generator::{GeneratorField, GeneratorState, Sample, Trajectory};
use crate::scalar::Scalar;
use crate::tree::{BranchRealization, GeneratorTree, InheritanceRule, Schedule};

pub const TREE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct BranchRecord<T> {
    pub id: usize,
    pub parent_id: Option<usize>,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<InheritanceRule<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<EdgeLabel<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_override: Option<T>,
    pub field: GeneratorField<T>,
    pub span: (T, T),
    pub init: GeneratorState<T>,
    pub end: GeneratorState<T>,
    /// Rows of `[s, x, y, theta, tau]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[T; 5]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TreeDocument<T> {
    pub v: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule<T>>,
    pub branches: Vec<BranchRecord<T>>,
}

impl<T: Scalar> TreeDocument<T> {
    pub fn from_tree(tree: &GeneratorTree<T>, include_samples: bool) -> Self {
        let branches = tree
            .branches
            .iter()
            .map(|b| BranchRecord {
                id: b.id,
                parent_id: b.parent,
                depth: b.depth,
                rule: b.rule,
                label: b.label.clone(),
                heading_override: b.heading_override,
                field: b.field.clone(),
                span: b.span,
                init: b.init,
                end: *b.end(),
                samples: include_samples.then(|| {
                    b.trajectory
                        .samples
                        .iter()
                        .map(|s| [s.s, s.state.x, s.state.y, s.state.theta, s.state.tau])
                        .collect()
                }),
            })
            .collect();
        Self {
            v: TREE_VERSION,
            kind: "tree".into(),
            schedule: tree.schedule.clone(),
            branches,
        }
    }

    /// Rebuilds the tree; without samples each trajectory keeps only its
    /// start and end states.
    pub fn into_tree(self) -> Result<GeneratorTree<T>> {
        if self.v != TREE_VERSION || self.kind != "tree" {
            return Err(Error::InvalidArgument(format!(
                "expected a v{TREE_VERSION} tree document, got v{} {:?}",
                self.v, self.kind
            )));
        }
        let branches = self
            .branches
            .into_iter()
            .map(|r| {
                let samples = match r.samples {
                    Some(rows) if !rows.is_empty() => rows
                        .into_iter()
                        .map(|[s, x, y, theta, tau]| Sample {
                            s,
                            state: GeneratorState::new(x, y, theta, tau),
                        })
                        .collect(),
                    _ => vec![
                        Sample {
                            s: r.span.0,
                            state: r.init,
                        },
                        Sample {
                            s: r.span.1,
                            state: r.end,
                        },
                    ],
                };
                BranchRealization {
                    id: r.id,
                    parent: r.parent_id,
                    depth: r.depth,
                    trajectory: Trajectory {
                        samples,
                        span: r.span,
                        field_used: r.field.clone(),
                    },
                    field: r.field,
                    init: r.init,
                    span: r.span,
                    rule: r.rule,
                    label: r.label,
                    heading_override: r.heading_override,
                }
            })
            .collect();
        let tree = GeneratorTree {
            branches,
            schedule: self.schedule,
        };
        tree.validate_structure()?;
        Ok(tree)
    }
}

pub fn tree_to_json<T: Scalar>(tree: &GeneratorTree<T>, include_samples: bool) -> String {
    let mut s = serde_json::to_string(&TreeDocument::from_tree(tree, include_samples))
        .expect("tree documents always serialize");
    s.push('\n');
    s
}

pub fn tree_from_json<T: Scalar>(text: &str) -> Result<GeneratorTree<T>> {
    let doc: TreeDocument<T> = serde_json::from_str(text)?;
    doc.into_tree()
}
