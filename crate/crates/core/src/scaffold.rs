//! Polygonal scaffolds: discrete skeleton graphs read off a tree.

use serde::{Deserialize, Serialize};

use crate::frontend::{DiscreteTree, EdgeLabel};
use crate::geom::{line_intersection, Point2};
use crate::scalar::Scalar;
use crate::tree::GeneratorTree;

/// Cross-product threshold below which tangent lines count as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ScaffoldNode<T> {
    pub id: usize,
    pub parent: Option<usize>,
    pub position: Point2<T>,
    pub depth: usize,
    /// Branch this node was read from, if any.
    pub branch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ScaffoldEdge<T> {
    pub from: usize,
    pub to: usize,
    pub length: T,
    /// Direction angle in (-pi, pi].
    pub direction: T,
    pub generation: usize,
    /// Set on the final leg into a leaf endpoint.
    pub terminal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<EdgeLabel<T>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Scaffold<T> {
    pub nodes: Vec<ScaffoldNode<T>>,
    pub edges: Vec<ScaffoldEdge<T>>,
}

impl<T: Scalar> Scaffold<T> {
    fn push_node(
        &mut self,
        parent: Option<usize>,
        position: Point2<T>,
        depth: usize,
        branch: Option<usize>,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(ScaffoldNode {
            id,
            parent,
            position,
            depth,
            branch,
        });
        id
    }

    fn push_edge(
        &mut self,
        from: usize,
        to: usize,
        generation: usize,
        terminal: bool,
        label: Option<EdgeLabel<T>>,
    ) {
        let d = self.nodes[to].position - self.nodes[from].position;
        self.edges.push(ScaffoldEdge {
            from,
            to,
            length: d.norm(),
            direction: d.angle(),
            generation,
            terminal,
            label,
        });
    }

    /// Index of the edge ending at each node.
    pub fn incoming(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.to] = Some(i);
        }
        out
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

    pub fn max_generation(&self) -> Option<usize> {
        self.edges.iter().map(|e| e.generation).max()
    }

    /// Chord scaffold of a discrete tree: its nodes and edges as they are.
    pub fn from_discrete(tree: &DiscreteTree<T>) -> Self {
        let mut s = Scaffold::default();
        for n in &tree.nodes {
            s.push_node(n.parent, n.position, n.depth, None);
        }
        for n in tree.nodes.iter().skip(1) {
            if let Some(p) = n.parent {
                s.push_edge(p, n.id, n.depth.saturating_sub(1), false, n.label.clone());
            }
        }
        s
    }
}

/// Chord scaffold of a generator tree: the trunk base plus every branch
/// endpoint, with one straight edge per branch.
///
/// Node `i + 1` is the end of branch `i`, so for a compiled tree the result
/// lines up node-for-node with the source discrete tree.
pub fn scaffold_of<T: Scalar>(tree: &GeneratorTree<T>) -> Scaffold<T> {
    let mut s = Scaffold::default();
    if tree.is_empty() {
        return s;
    }
    s.push_node(None, tree.root().trajectory.start().position(), 0, None);
    for b in &tree.branches {
        let parent = b.parent.map_or(0, |p| p + 1);
        let id = s.push_node(Some(parent), b.end().position(), b.depth + 1, Some(b.id));
        s.push_edge(parent, id, b.depth, false, b.label.clone());
    }
    s
}

/// Tangent scaffold: one corner per branch where its start and end tangent
/// lines meet, joined corner to corner along the tree.
///
/// Edge generations: trunk leg 0, corner-to-corner edges take the child
/// branch depth, and the final leg into each leaf endpoint is terminal.
pub fn tangent_scaffold<T: Scalar>(tree: &GeneratorTree<T>) -> Scaffold<T> {
    let mut s = Scaffold::default();
    if tree.is_empty() {
        return s;
    }
    let tol = T::lit(PARALLEL_TOL);
    let corner = |i: usize| {
        let b = &tree.branches[i];
        let (p0, p1) = (b.trajectory.start(), b.end());
        line_intersection(
            p0.position(),
            p0.heading(),
            p1.position(),
            p1.heading(),
            tol,
        )
        .unwrap_or_else(|| p1.position())
    };
    s.push_node(None, tree.root().trajectory.start().position(), 0, None);
    for b in &tree.branches {
        let parent = b.parent.map_or(0, |p| p + 1);
        let id = s.push_node(Some(parent), corner(b.id), b.depth + 1, Some(b.id));
        s.push_edge(parent, id, b.depth, false, b.label.clone());
    }
    let children = tree.children();
    for b in &tree.branches {
        if children[b.id].is_empty() {
            let from = b.id + 1;
            let id = s.push_node(Some(from), b.end().position(), b.depth + 2, Some(b.id));
            s.push_edge(from, id, b.depth + 1, true, None);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{GeneratorField, GeneratorState, PhaseMode};
    use crate::profile::AnalyticProfile;
    use crate::tree::{grow_tree, BranchEvent, GrowOptions, Schedule};

    fn decay(depth: usize) -> GeneratorTree<f64> {
        let field = GeneratorField::new(
            AnalyticProfile::exponential(0.88),
            AnalyticProfile::constant(std::f64::consts::PI / 10.0),
            PhaseMode::Local,
        );
        let init = GeneratorState::new(0.0, 0.0, std::f64::consts::FRAC_PI_2, 0.0);
        grow_tree(
            &field,
            init,
            1.0,
            &Schedule::uniform(BranchEvent::binary(0.88)),
            depth,
            &GrowOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn chord_scaffold_shape() {
        let t = decay(3);
        let s = scaffold_of(&t);
        assert_eq!(s.nodes.len(), t.len() + 1);
        assert_eq!(s.edges.len(), t.len());
        for (i, b) in t.branches.iter().enumerate() {
            assert_eq!(s.nodes[i + 1].position, b.end().position());
            assert_eq!(s.edges[i].generation, b.depth);
        }
    }

    #[test]
    fn tangent_corner_of_quarter_arc() {
        // unit-speed arc, kappa = pi/2 over s in [0,1]: quarter circle radius 2/pi
        let field = GeneratorField::new(
            AnalyticProfile::constant(1.0),
            AnalyticProfile::constant(std::f64::consts::FRAC_PI_2),
            PhaseMode::Local,
        );
        let init = GeneratorState::new(0.0, 0.0, 0.0, 0.0);
        let t = grow_tree(
            &field,
            init,
            1.0,
            &Schedule::uniform(BranchEvent::binary(0.5)),
            0,
            &GrowOptions::default(),
        )
        .unwrap();
        let s = tangent_scaffold(&t);
        let r = 2.0 / std::f64::consts::PI;
        assert!(s.nodes[1].position.distance(Point2::new(r, 0.0)) < 1e-12);
        assert_eq!(s.edges.len(), 2);
        assert!(s.edges[1].terminal);
        assert!((s.edges[1].length - r).abs() < 1e-12);
    }

    #[test]
    fn tangent_scaffold_counts() {
        let t = decay(4);
        let s = tangent_scaffold(&t);
        let leaves = 16;
        assert_eq!(s.nodes.len(), 1 + t.len() + leaves);
        assert_eq!(s.edges.len(), t.len() + leaves);
        assert_eq!(s.edges.iter().filter(|e| e.terminal).count(), leaves);
    }
}
