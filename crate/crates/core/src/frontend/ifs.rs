use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{locate, DiscreteNode, DiscreteTree, EdgeLabel, ExpandOptions, SpecBody, SpecDocument};
use crate::analysis::PointSet;
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::scalar::Scalar;
use crate::tree::{Sign, DEFAULT_BRANCH_CAP};

/// `x -> lambda * R(theta) * x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SimilarityMap<T> {
    pub lambda: T,
    pub theta: T,
    pub t: Point2<T>,
}

impl<T: Scalar> SimilarityMap<T> {
    pub fn new(lambda: T, theta: T, t: Point2<T>) -> Self {
        Self { lambda, theta, t }
    }

    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        p.rotate(self.theta) * self.lambda + self.t
    }

    fn affine(&self) -> Affine<T> {
        Affine {
            a: Complex::from_polar(self.lambda, self.theta),
            b: Complex::new(self.t.x, self.t.y),
        }
    }
}

/// Complex-affine map `z -> a z + b`.
#[derive(Clone, Copy)]
struct Affine<T> {
    a: Complex<T>,
    b: Complex<T>,
}

impl<T: Scalar> Affine<T> {
    fn identity() -> Self {
        Self {
            a: Complex::new(T::one(), T::zero()),
            b: Complex::new(T::zero(), T::zero()),
        }
    }

    /// `self o inner`
    fn then_inner(&self, inner: &Affine<T>) -> Self {
        Self {
            a: self.a * inner.a,
            b: self.a * inner.b + self.b,
        }
    }

    fn apply(&self, p: Point2<T>) -> Point2<T> {
        let z = self.a * Complex::new(p.x, p.y) + self.b;
        Point2::new(z.re, z.im)
    }
}

pub(crate) fn validate_maps<T: Scalar>(maps: &[SimilarityMap<T>]) -> Result<()> {
    if maps.is_empty() {
        return Err(Error::InvalidArgument("at least one map required".into()));
    }
    for (i, m) in maps.iter().enumerate() {
        if !(m.lambda.is_finite() && m.theta.is_finite() && m.t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "map {i} has non-finite parameters"
            )));
        }
        if !(m.lambda > T::zero() && m.lambda < T::one()) {
            return Err(Error::Contractivity {
                index: i,
                lambda: m.lambda.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Parses an IFS spec document and returns its maps in declaration order.
pub fn parse_ifs<T: Scalar>(text: &str) -> Result<Vec<SimilarityMap<T>>> {
    let doc = SpecDocument::<T>::parse(text)?;
    match doc.body {
        SpecBody::Ifs(ifs) => {
            if ifs.maps.is_empty() {
                let (line, column) = locate(text, "\"maps\"");
                return Err(Error::Parse {
                    line,
                    column,
                    message: "at least one map required".into(),
                });
            }
            validate_maps(&ifs.maps)?;
            Ok(ifs.maps)
        }
        _ => Err(Error::Parse {
            line: 1,
            column: 1,
            message: "expected a document with \"kind\": \"ifs\"".into(),
        }),
    }
}

/// Canonical spec document for a list of maps.
pub fn serialize_ifs<T: Scalar>(maps: &[SimilarityMap<T>]) -> String {
    SpecDocument::new(SpecBody::Ifs(super::IfsDoc {
        maps: maps.to_vec(),
        root: None,
        heading: None,
        depth: None,
    }))
    .to_json()
}

fn apex<T: Scalar>(maps: &[SimilarityMap<T>], root: Point2<T>) -> Point2<T> {
    let n = T::lit(maps.len() as f64);
    let sum = maps
        .iter()
        .fold(Point2::zero(), |acc, m| acc + m.apply(root));
    sum * (T::one() / n)
}

pub(super) fn expand<T: Scalar>(
    maps: &[SimilarityMap<T>],
    depth: usize,
    opts: &ExpandOptions<T>,
) -> Result<DiscreteTree<T>> {
    validate_maps(maps)?;
    let m = maps.len() as u128;
    let mut requested: u128 = 1;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        requested = requested.saturating_add(level);
        level = level.saturating_mul(m);
    }
    if requested > opts.branch_cap as u128 {
        return Err(Error::BranchBudgetExceeded {
            requested,
            cap: opts.branch_cap,
        });
    }

    let apex = apex(maps, opts.root);
    let affines: Vec<Affine<T>> = maps.iter().map(|m| m.affine()).collect();
    let mut nodes = Vec::with_capacity(requested as usize);
    nodes.push(DiscreteNode {
        id: 0,
        parent: None,
        position: opts.root,
        depth: 0,
        label: None,
        word: None,
    });
    nodes.push(DiscreteNode {
        id: 1,
        parent: Some(0),
        position: apex,
        depth: 1,
        label: Some(EdgeLabel::trunk()),
        word: Some(Vec::new()),
    });

    // (node id, composed map F_w)
    let mut frontier = vec![(1usize, Affine::identity())];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * maps.len());
        for (pid, fw) in &frontier {
            for (i, fi) in affines.iter().enumerate() {
                let composed = fw.then_inner(fi);
                let id = nodes.len();
                let mut word = nodes[*pid].word.clone().unwrap_or_default();
                word.push(i);
                nodes.push(DiscreteNode {
                    id,
                    parent: Some(*pid),
                    position: composed.apply(apex),
                    depth: nodes[*pid].depth + 1,
                    label: Some(EdgeLabel {
                        lambda: maps[i].lambda,
                        sigma: Sign::of(maps[i].theta),
                        turn: maps[i].theta,
                        rule: format!("F{i}"),
                    }),
                    word: Some(word),
                });
                next.push((id, composed));
            }
        }
        frontier = next;
    }
    Ok(DiscreteTree {
        nodes,
        root_heading: opts.heading,
    })
}

/// `A_K`: images of `root` under all length-`K` compositions, in
/// lexicographic word order, deduplicated.
pub fn attractor_points<T: Scalar>(
    maps: &[SimilarityMap<T>],
    depth: usize,
    root: Point2<T>,
) -> Result<PointSet<T>> {
    attractor_points_capped(maps, depth, root, DEFAULT_BRANCH_CAP)
}

pub(crate) fn attractor_points_capped<T: Scalar>(
    maps: &[SimilarityMap<T>],
    depth: usize,
    root: Point2<T>,
    cap: usize,
) -> Result<PointSet<T>> {
    validate_maps(maps)?;
    let requested = (maps.len() as u128).saturating_pow(depth as u32);
    if requested > cap as u128 {
        return Err(Error::BranchBudgetExceeded { requested, cap });
    }
    let affines: Vec<Affine<T>> = maps.iter().map(|m| m.affine()).collect();
    let mut level = vec![Affine::identity()];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|fw| affines.iter().map(move |fi| fw.then_inner(fi)))
            .collect();
    }
    let pts = level.iter().map(|f| f.apply(root)).collect();
    Ok(PointSet::new(pts, format!("A_{depth}")))
}
