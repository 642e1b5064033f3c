use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::DiscreteTree;
use crate::scaffold::{scaffold_of, Scaffold};
use crate::scalar::Scalar;
use crate::tree::{check_branch_continuity, GeneratorTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct NodeGap<T> {
    pub scaffold_node: usize,
    pub discrete_node: usize,
    pub gap: T,
}

/// Numerical evidence that a compiled tree realizes its discrete source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Certificate<T> {
    pub v: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    pub node_count: usize,
    pub edge_count: usize,
    pub isomorphic: bool,
    pub max_gap: T,
    pub mean_gap: T,
    pub worst_node: usize,
    /// Largest position jump between a parent's end and a child's start.
    pub continuity_position_gap: T,
    /// Largest unexplained heading jump at a branch point.
    pub continuity_heading_gap: T,
    pub heading_overrides: usize,
    pub tolerance: T,
    pub pass: bool,
    pub gaps: Vec<NodeGap<T>>,
}

impl<T: Scalar> Certificate<T> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates always serialize");
        s.push('\n');
        s
    }
}

/// Pairs the nodes of two scaffolds by a simultaneous breadth-first walk
/// from node 0, children in stored order. Fails at the first node whose
/// child count differs.
pub fn match_trees<T: Scalar>(a: &Scaffold<T>, b: &Scaffold<T>) -> Result<Vec<(usize, usize)>> {
    if a.nodes.is_empty() || b.nodes.is_empty() {
        return Err(Error::NotIsomorphic {
            scaffold_node: 0,
            discrete_node: 0,
            reason: "empty tree".into(),
        });
    }
    if a.nodes.len() != b.nodes.len() {
        return Err(Error::NotIsomorphic {
            scaffold_node: 0,
            discrete_node: 0,
            reason: format!("node counts differ: {} vs {}", a.nodes.len(), b.nodes.len()),
        });
    }
    let (ca, cb) = (a.children(), b.children());
    let mut pairs = Vec::with_capacity(a.nodes.len());
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    while let Some((u, v)) = queue.pop_front() {
        pairs.push((u, v));
        if ca[u].len() != cb[v].len() {
            return Err(Error::NotIsomorphic {
                scaffold_node: u,
                discrete_node: v,
                reason: format!("{} children vs {}", ca[u].len(), cb[v].len()),
            });
        }
        queue.extend(ca[u].iter().copied().zip(cb[v].iter().copied()));
    }
    if pairs.len() != a.nodes.len() {
        return Err(Error::NotIsomorphic {
            scaffold_node: 0,
            discrete_node: 0,
            reason: "trees are not connected from node 0".into(),
        });
    }
    Ok(pairs)
}

/// Checks that the chord scaffold of `tree` is isomorphic to `dtree` and
/// measures how far each matched node sits from its discrete counterpart.
pub fn certify<T: Scalar>(
    tree: &GeneratorTree<T>,
    dtree: &DiscreteTree<T>,
    tolerance: T,
) -> Result<Certificate<T>> {
    let sc = scaffold_of(tree);
    let ds = Scaffold::from_discrete(dtree);
    let pairs = match_trees(&sc, &ds)?;
    let gaps: Vec<NodeGap<T>> = pairs
        .iter()
        .map(|&(u, v)| NodeGap {
            scaffold_node: u,
            discrete_node: v,
            gap: sc.nodes[u].position.distance(ds.nodes[v].position),
        })
        .collect();
    let worst = gaps
        .iter()
        .copied()
        .fold(gaps[0], |w, g| if g.gap > w.gap { g } else { w });
    let mean = gaps.iter().map(|g| g.gap).sum::<T>() / T::lit(gaps.len() as f64);
    let cont = check_branch_continuity(tree);
    let cpos = cont
        .entries
        .iter()
        .fold(T::zero(), |m, e| m.max(e.position_gap));
    let chead = cont
        .entries
        .iter()
        .fold(T::zero(), |m, e| m.max(e.heading_gap));
    Ok(Certificate {
        v: 1,
        kind: "certificate".into(),
        policy: None,
        node_count: sc.nodes.len(),
        edge_count: sc.edges.len(),
        isomorphic: true,
        max_gap: worst.gap,
        mean_gap: mean,
        worst_node: worst.discrete_node,
        continuity_position_gap: cpos,
        continuity_heading_gap: chead,
        heading_overrides: tree
            .branches
            .iter()
            .filter(|b| b.heading_override.is_some())
            .count(),
        tolerance,
        pass: worst.gap < tolerance && cpos == T::zero() && chead == T::zero(),
        gaps,
    })
}
