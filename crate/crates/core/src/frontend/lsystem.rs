use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{DiscreteNode, DiscreteTree, EdgeLabel, ExpandOptions, SpecBody, SpecDocument};
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::scalar::Scalar;
use crate::tree::Sign;

/// Bracketed D0L-system with turtle angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct LSystemSpec<T> {
    pub axiom: String,
    #[serde(
        serialize_with = "serialize_rules",
        deserialize_with = "deserialize_rules"
    )]
    pub rules: BTreeMap<char, String>,
    /// Turn angle for `+` and `-`, radians.
    pub angle: T,
    pub max_iterations: usize,
}

fn serialize_rules<S: Serializer>(
    rules: &BTreeMap<char, String>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let as_str: BTreeMap<String, &String> = rules.iter().map(|(k, v)| (k.to_string(), v)).collect();
    as_str.serialize(s)
}

fn deserialize_rules<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<BTreeMap<char, String>, D::Error> {
    struct RulesVisitor;
    impl<'de> Visitor<'de> for RulesVisitor {
        type Value = BTreeMap<char, String>;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an object mapping single symbols to replacement strings")
        }
        fn visit_map<A: MapAccess<'de>>(
            self,
            mut map: A,
        ) -> std::result::Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some((k, v)) = map.next_entry::<String, String>()? {
                let mut chars = k.chars();
                let c = match (chars.next(), chars.next()) {
                    (Some(c), None) => c,
                    _ => {
                        return Err(serde::de::Error::custom(format!(
                            "rule key {k:?} must be a single symbol"
                        )))
                    }
                };
                if out.insert(c, v).is_some() {
                    return Err(serde::de::Error::custom(format!(
                        "duplicate rule for symbol {c:?}"
                    )));
                }
            }
            Ok(out)
        }
    }
    d.deserialize_map(RulesVisitor)
}

fn check_brackets(s: &str, location: &str) -> Result<()> {
    let mut open = Vec::new();
    for (i, c) in s.chars().enumerate() {
        match c {
            '[' => open.push(i),
            ']' if open.pop().is_none() => {
                return Err(Error::UnbalancedBrackets {
                    location: location.into(),
                    position: i,
                });
            }
            _ => {}
        }
    }
    match open.first() {
        Some(&i) => Err(Error::UnbalancedBrackets {
            location: location.into(),
            position: i,
        }),
        None => Ok(()),
    }
}

impl<T: Scalar> LSystemSpec<T> {
    pub fn validate(&self) -> Result<()> {
        check_brackets(&self.axiom, "axiom")?;
        for (k, v) in &self.rules {
            check_brackets(v, &format!("rule {k}"))?;
        }
        if !self.angle.is_finite() {
            return Err(Error::InvalidArgument("angle must be finite".into()));
        }
        Ok(())
    }

    /// Symbol counts after `depth` rewrites, saturating.
    pub fn symbol_counts(&self, depth: usize) -> BTreeMap<char, u128> {
        let mut counts: BTreeMap<char, u128> = BTreeMap::new();
        for c in self.axiom.chars() {
            *counts.entry(c).or_default() += 1;
        }
        for _ in 0..depth {
            let mut next: BTreeMap<char, u128> = BTreeMap::new();
            for (&c, &n) in &counts {
                match self.rules.get(&c) {
                    Some(rhs) => {
                        for r in rhs.chars() {
                            let e = next.entry(r).or_default();
                            *e = e.saturating_add(n);
                        }
                    }
                    None => {
                        let e = next.entry(c).or_default();
                        *e = e.saturating_add(n);
                    }
                }
            }
            counts = next;
        }
        counts
    }

    /// Parallel rewriting applied `depth` times.
    pub fn rewrite(&self, depth: usize) -> String {
        let mut s = self.axiom.clone();
        for _ in 0..depth {
            let mut next = String::with_capacity(s.len() * 2);
            for c in s.chars() {
                match self.rules.get(&c) {
                    Some(rhs) => next.push_str(rhs),
                    None => next.push(c),
                }
            }
            s = next;
        }
        s
    }
}

/// Parses an L-system spec document.
pub fn parse_lsystem<T: Scalar>(text: &str) -> Result<LSystemSpec<T>> {
    let doc = SpecDocument::<T>::parse(text)?;
    match doc.body {
        SpecBody::Lsystem(ls) => {
            let spec = ls.spec();
            spec.validate()?;
            Ok(spec)
        }
        _ => Err(Error::Parse {
            line: 1,
            column: 1,
            message: "expected a document with \"kind\": \"lsystem\"".into(),
        }),
    }
}

pub fn serialize_lsystem<T: Scalar>(spec: &LSystemSpec<T>) -> String {
    SpecDocument::new(SpecBody::Lsystem(super::LSystemDoc::from_spec(
        spec.clone(),
    )))
    .to_json()
}

#[derive(Clone, Copy)]
struct Turtle<T> {
    pos: Point2<T>,
    heading: T,
    node: usize,
    bracket_depth: usize,
}

pub(super) fn expand<T: Scalar>(
    spec: &LSystemSpec<T>,
    depth: usize,
    opts: &ExpandOptions<T>,
) -> Result<DiscreteTree<T>> {
    spec.validate()?;
    if depth > spec.max_iterations {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} exceeds max_iterations {}",
            spec.max_iterations
        )));
    }
    let scale = opts.scale_per_depth;
    if !(scale > T::zero() && scale <= T::one()) {
        return Err(Error::InvalidArgument(
            "scale_per_depth must lie in (0, 1]".into(),
        ));
    }
    let counts = spec.symbol_counts(depth);
    let segments = counts.get(&'F').copied().unwrap_or(0);
    let total: u128 = counts.values().fold(0u128, |a, &b| a.saturating_add(b));
    if segments > opts.branch_cap as u128 || total > (opts.branch_cap as u128).saturating_mul(64) {
        return Err(Error::BranchBudgetExceeded {
            requested: segments.max(total / 64),
            cap: opts.branch_cap,
        });
    }
    let word = spec.rewrite(depth);

    let mut nodes = vec![DiscreteNode {
        id: 0,
        parent: None,
        position: opts.root,
        depth: 0,
        label: None,
        word: None,
    }];
    // per node: heading and length of the incoming edge
    let mut edge_heading = vec![opts.heading];
    let mut edge_len = vec![T::one()];

    let mut t = Turtle {
        pos: opts.root,
        heading: opts.heading,
        node: 0,
        bracket_depth: 0,
    };
    let mut stack: Vec<Turtle<T>> = Vec::new();
    for c in word.chars() {
        match c {
            'F' => {
                let len = scale.powi(t.bracket_depth as i32);
                let end = t.pos + Point2::from_angle(t.heading) * len;
                let parent = t.node;
                let turn = t.heading - edge_heading[parent];
                let id = nodes.len();
                nodes.push(DiscreteNode {
                    id,
                    parent: Some(parent),
                    position: end,
                    depth: nodes[parent].depth + 1,
                    label: Some(EdgeLabel {
                        lambda: len / edge_len[parent],
                        sigma: Sign::of(turn),
                        turn,
                        rule: "F".into(),
                    }),
                    word: None,
                });
                edge_heading.push(t.heading);
                edge_len.push(len);
                t.pos = end;
                t.node = id;
            }
            '+' => t.heading += spec.angle,
            '-' => t.heading -= spec.angle,
            '[' => {
                stack.push(t);
                t.bracket_depth += 1;
            }
            ']' => {
                // brackets were validated, so the stack is non-empty
                if let Some(saved) = stack.pop() {
                    t = saved;
                }
            }
            _ => {}
        }
    }
    Ok(DiscreteTree {
        nodes,
        root_heading: opts.heading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{expand_discrete, DiscreteSpec};

    fn plant() -> LSystemSpec<f64> {
        LSystemSpec {
            axiom: "F".into(),
            rules: [('F', "F[+F]F[-F]F".to_string())].into_iter().collect(),
            angle: 25.7f64.to_radians(),
            max_iterations: 8,
        }
    }

    #[test]
    fn segment_count_follows_recurrence() {
        let ls = LSystemSpec::<f64> {
            axiom: "F".into(),
            rules: [('F', "F[+F][-F]".to_string())].into_iter().collect(),
            angle: 0.5,
            max_iterations: 10,
        };
        for k in 0..6 {
            let t = expand_discrete(DiscreteSpec::LSystem(&ls), k, Point2::zero(), 0.5).unwrap();
            assert_eq!(t.edge_count(), 3usize.pow(k as u32));
            assert_eq!(ls.symbol_counts(k)[&'F'], 3u128.pow(k as u32));
        }
    }

    #[test]
    fn unbalanced_rule_reports_location() {
        let text = r#"{"v":1,"kind":"lsystem","axiom":"F","rules":{"F":"F[+F"},"angle":0.3,"max_iterations":4}"#;
        assert_eq!(
            parse_lsystem::<f64>(text),
            Err(Error::UnbalancedBrackets {
                location: "rule F".into(),
                position: 1
            })
        );
        let text =
            r#"{"v":1,"kind":"lsystem","axiom":"F]","rules":{},"angle":0.3,"max_iterations":4}"#;
        assert!(matches!(
            parse_lsystem::<f64>(text),
            Err(Error::UnbalancedBrackets { position: 1, .. })
        ));
    }

    #[test]
    fn duplicate_rule_rejected() {
        let text = r#"{"v":1,"kind":"lsystem","axiom":"F","rules":{"F":"FF","F":"F"},"angle":0.3,"max_iterations":4}"#;
        match parse_lsystem::<f64>(text) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("duplicate"), "{message}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let ls = plant();
        let text = serialize_lsystem(&ls);
        let back: LSystemSpec<f64> = parse_lsystem(&text).unwrap();
        assert_eq!(back, ls);
        assert_eq!(serialize_lsystem(&back), text);
    }

    #[test]
    fn turtle_geometry_and_labels() {
        let ls = LSystemSpec::<f64> {
            axiom: "F[+F]F".into(),
            rules: BTreeMap::new(),
            angle: std::f64::consts::FRAC_PI_2,
            max_iterations: 0,
        };
        let t = expand_discrete(DiscreteSpec::LSystem(&ls), 0, Point2::zero(), 0.5).unwrap();
        assert_eq!(t.nodes.len(), 4);
        assert!(t.nodes[1].position.distance(Point2::new(0.0, 1.0)) < 1e-15);
        // heading pi/2 + pi/2 points to -x, bracket depth 1 halves the length
        assert!(t.nodes[2].position.distance(Point2::new(-0.5, 1.0)) < 1e-15);
        assert_eq!(t.nodes[2].parent, Some(1));
        let l = t.nodes[2].label.as_ref().unwrap();
        assert_eq!(l.lambda, 0.5);
        assert_eq!(l.sigma, Sign::Plus);
        assert!(t.nodes[3].position.distance(Point2::new(0.0, 2.0)) < 1e-15);
        assert_eq!(t.nodes[3].parent, Some(1));
    }

    #[test]
    fn depth_beyond_cap_rejected() {
        let r = expand_discrete(DiscreteSpec::LSystem(&plant()), 9, Point2::zero(), 1.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
