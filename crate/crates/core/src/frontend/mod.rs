//! Discrete tree-fractal frontends: IFS similarity families and bracketed
//! D0L-systems, expanded into embedded discrete trees.

mod ifs;
mod lsystem;
mod spec;

pub use ifs::{attractor_points, parse_ifs, serialize_ifs, SimilarityMap};
pub use lsystem::{parse_lsystem, serialize_lsystem, LSystemSpec};
pub use spec::{GeneratorDoc, IfsDoc, LSystemDoc, SpecBody, SpecDocument, SPEC_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::scalar::Scalar;
use crate::tree::{Sign, DEFAULT_BRANCH_CAP};

/// Per-edge parameters of a discrete tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct EdgeLabel<T> {
    /// Edge length relative to the parent edge.
    pub lambda: T,
    pub sigma: Sign,
    /// Signed turn from the parent edge, radians.
    pub turn: T,
    pub rule: String,
}

impl<T: Scalar> EdgeLabel<T> {
    pub fn trunk() -> Self {
        Self {
            lambda: T::one(),
            sigma: Sign::Plus,
            turn: T::zero(),
            rule: "trunk".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DiscreteNode<T> {
    pub id: usize,
    pub parent: Option<usize>,
    pub position: Point2<T>,
    pub depth: usize,
    /// Parameters of the edge from the parent; `None` on the base node.
    pub label: Option<EdgeLabel<T>>,
    /// Composition word for IFS nodes (map indices, outermost first).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<Vec<usize>>,
}

/// Rooted tree with an embedding of its nodes in the plane.
///
/// Node 0 is the base of the trunk; every other node is the far end of the
/// edge from its parent. Ids are assigned so parents precede children and
/// siblings appear in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DiscreteTree<T> {
    pub nodes: Vec<DiscreteNode<T>>,
    /// Heading of the trunk at the base node.
    pub root_heading: T,
}

impl<T: Scalar> DiscreteTree<T> {
    pub fn edge_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for n in &self.nodes {
            if let Some(p) = n.parent {
                out[p].push(n.id);
            }
        }
        out
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() || self.nodes[0].parent.is_some() {
            return Err(Error::InvalidArgument(
                "discrete tree needs a base node with no parent".into(),
            ));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidArgument(format!("node {i} has id {}", n.id)));
            }
            if !n.position.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "node {i} has a non-finite position"
                )));
            }
            if i > 0 {
                match n.parent {
                    Some(p) if p < i => {}
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "node {i} has an invalid parent"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which frontend to expand.
#[derive(Debug, Clone, Copy)]
pub enum DiscreteSpec<'a, T> {
    Ifs(&'a [SimilarityMap<T>]),
    LSystem(&'a LSystemSpec<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpandOptions<T> {
    /// Trunk base.
    pub root: Point2<T>,
    /// Trunk heading at the base (turtle start heading for L-systems).
    pub heading: T,
    /// L-system segment contraction per bracket depth.
    pub scale_per_depth: T,
    pub branch_cap: usize,
}

impl<T: Scalar> Default for ExpandOptions<T> {
    fn default() -> Self {
        Self {
            root: Point2::zero(),
            heading: T::FRAC_PI_2(),
            scale_per_depth: T::one(),
            branch_cap: DEFAULT_BRANCH_CAP,
        }
    }
}

/// Expands a frontend specification into an embedded discrete tree.
///
/// IFS: the trunk runs from `root` to the apex (the common image of `root`
/// under the maps, or their centroid when they disagree); the node for word
/// `w = i1..ik` sits at `F_i1 o ... o F_ik (apex)`. L-system: the axiom is
/// rewritten `depth` times and turtle-interpreted from `root`.
pub fn expand_discrete<T: Scalar>(
    spec: DiscreteSpec<'_, T>,
    depth: usize,
    root: Point2<T>,
    scale_per_depth: T,
) -> Result<DiscreteTree<T>> {
    let opts = ExpandOptions {
        root,
        scale_per_depth,
        ..ExpandOptions::default()
    };
    expand_discrete_with(spec, depth, &opts)
}

pub fn expand_discrete_with<T: Scalar>(
    spec: DiscreteSpec<'_, T>,
    depth: usize,
    opts: &ExpandOptions<T>,
) -> Result<DiscreteTree<T>> {
    match spec {
        DiscreteSpec::Ifs(maps) => ifs::expand(maps, depth, opts),
        DiscreteSpec::LSystem(ls) => lsystem::expand(ls, depth, opts),
    }
}

/// 1-based line and column of the first occurrence of `needle`.
pub(crate) fn locate(text: &str, needle: &str) -> (usize, usize) {
    match text.find(needle) {
        Some(off) => {
            let before = &text[..off];
            let line = before.matches('\n').count() + 1;
            let col = before.rfind('\n').map_or(off, |nl| off - nl - 1) + 1;
            (line, col)
        }
        None => (1, 1),
    }
}
