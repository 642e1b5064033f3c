//! Generator trees: recursive branch events with exact state inheritance and
//! symbolic generator inheritance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::EdgeLabel;
use crate::generator::{integrate, GeneratorField, GeneratorState, IntegrationOptions, Trajectory};
use crate::scalar::Scalar;

/// Default upper bound on the number of branches a single build may create.
pub const DEFAULT_BRANCH_CAP: usize = 1 << 22;

/// Turning sign of a child branch. Serialized as `1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: Scalar>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    /// `Minus` for strictly negative input, `Plus` otherwise.
    pub fn of<T: Scalar>(v: T) -> Self {
        if v < T::zero() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be 1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// How a child field is derived from its parent's:
/// `rho_i = lambda * rho`, `kappa_i = sigma * extra_kappa_scale * kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct InheritanceRule<T> {
    pub lambda: T,
    pub sigma: Sign,
    #[serde(default = "Scalar::unit")]
    pub extra_kappa_scale: T,
}

impl<T: Scalar> InheritanceRule<T> {
    pub fn new(lambda: T, sigma: Sign) -> Self {
        Self {
            lambda,
            sigma,
            extra_kappa_scale: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero() && self.lambda <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "inheritance lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if !self.extra_kappa_scale.is_finite() {
            return Err(Error::InvalidArgument(
                "extra_kappa_scale must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// A branch event: where on the parent it fires (`None` = end of span) and
/// one rule per child, in child order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct BranchEvent<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_b: Option<T>,
    pub rules: Vec<InheritanceRule<T>>,
}

impl<T: Scalar> BranchEvent<T> {
    pub fn at_end(rules: Vec<InheritanceRule<T>>) -> Self {
        Self { s_b: None, rules }
    }

    /// Two children with unit speed scale and opposite turning.
    pub fn binary(lambda: T) -> Self {
        Self::at_end(vec![
            InheritanceRule::new(lambda, Sign::Plus),
            InheritanceRule::new(lambda, Sign::Minus),
        ])
    }

    pub fn multiplicity(&self) -> usize {
        self.rules.len()
    }
}

/// Branch events indexed by the depth of the parent; the last entry repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Schedule<T> {
    pub events: Vec<BranchEvent<T>>,
}

impl<T: Scalar> Schedule<T> {
    pub fn uniform(event: BranchEvent<T>) -> Self {
        Self {
            events: vec![event],
        }
    }

    pub fn per_depth(events: Vec<BranchEvent<T>>) -> Self {
        Self { events }
    }

    pub fn event_at(&self, depth: usize) -> &BranchEvent<T> {
        &self.events[depth.min(self.events.len() - 1)]
    }

    /// `sum_{k=0..=depth} prod_{j<k} m_j`, saturating.
    pub fn branch_count(&self, depth: usize) -> u128 {
        let mut total: u128 = 0;
        let mut level: u128 = 1;
        for k in 0..=depth {
            total = total.saturating_add(level);
            if k < depth {
                level = level.saturating_mul(self.event_at(k).multiplicity() as u128);
            }
        }
        total
    }

    fn validate(&self, span: T) -> Result<()> {
        if self.events.is_empty() {
            return Err(Error::InvalidArgument(
                "schedule has no branch events".into(),
            ));
        }
        for ev in &self.events {
            if ev.rules.is_empty() {
                return Err(Error::InvalidArgument("branch event without rules".into()));
            }
            for r in &ev.rules {
                r.validate()?;
            }
            if let Some(sb) = ev.s_b {
                if !(sb > T::zero() && sb <= span) {
                    return Err(Error::InvalidArgument(format!(
                        "branch parameter {sb} outside the branch span (0, {span}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One realized branch of a generator tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct BranchRealization<T> {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub field: GeneratorField<T>,
    pub init: GeneratorState<T>,
    pub span: (T, T),
    pub trajectory: Trajectory<T>,
    /// Inheritance rule that produced this branch's field (absent on roots
    /// and on compiled branches).
    pub rule: Option<InheritanceRule<T>>,
    /// Discrete edge parameters carried through compilation.
    pub label: Option<EdgeLabel<T>>,
    /// Set when a compile policy replaced the inherited heading; holds the
    /// applied offset in radians.
    pub heading_override: Option<T>,
}

impl<T: Scalar> BranchRealization<T> {
    pub fn end(&self) -> &GeneratorState<T> {
        self.trajectory.end()
    }
}

/// Rooted tree of branch realizations. Parents precede children; grown trees
/// are stored breadth-first with siblings in rule order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GeneratorTree<T> {
    pub branches: Vec<BranchRealization<T>>,
    pub schedule: Option<Schedule<T>>,
}

impl<T: Scalar> GeneratorTree<T> {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn root(&self) -> &BranchRealization<T> {
        &self.branches[0]
    }

    pub fn max_depth(&self) -> usize {
        self.branches.iter().map(|b| b.depth).max().unwrap_or(0)
    }

    /// Child ids per branch, in id order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.branches.len()];
        for b in &self.branches {
            if let Some(p) = b.parent {
                out[p].push(b.id);
            }
        }
        out
    }

    pub fn at_depth(&self, depth: usize) -> impl Iterator<Item = &BranchRealization<T>> {
        self.branches.iter().filter(move |b| b.depth == depth)
    }

    /// Checks that parent links form a single rooted tree with ids equal to
    /// positions and parents preceding children.
    pub fn validate_structure(&self) -> Result<()> {
        if self.branches.is_empty() {
            return Err(Error::InvalidArgument("empty generator tree".into()));
        }
        for (i, b) in self.branches.iter().enumerate() {
            if b.id != i {
                return Err(Error::InvalidArgument(format!(
                    "branch {i} has id {}",
                    b.id
                )));
            }
            match (i, b.parent) {
                (0, None) => {}
                (0, Some(_)) => return Err(Error::InvalidArgument("root has a parent".into())),
                (_, None) => {
                    return Err(Error::InvalidArgument(format!("branch {i} has no parent")))
                }
                (_, Some(p)) if p >= i => {
                    return Err(Error::InvalidArgument(format!(
                        "branch {i} lists parent {p} which does not precede it"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Derives the child initial states and fields for one branch event.
///
/// Every child starts from an exact copy of `parent_state`.
pub fn spawn_children<T: Scalar>(
    parent_state: &GeneratorState<T>,
    parent_field: &GeneratorField<T>,
    event: &BranchEvent<T>,
) -> Vec<(GeneratorState<T>, GeneratorField<T>)> {
    event
        .rules
        .iter()
        .map(|r| {
            let field = GeneratorField {
                rho: parent_field.rho.scaled(r.lambda),
                kappa: parent_field
                    .kappa
                    .scaled(r.sigma.value::<T>() * r.extra_kappa_scale),
                phase_mode: parent_field.phase_mode,
            };
            (*parent_state, field)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowOptions<T> {
    pub integration: IntegrationOptions<T>,
    pub branch_cap: usize,
}

impl<T: Scalar> Default for GrowOptions<T> {
    fn default() -> Self {
        Self {
            integration: IntegrationOptions::default(),
            branch_cap: DEFAULT_BRANCH_CAP,
        }
    }
}

struct Pending<T> {
    parent: Option<usize>,
    init: GeneratorState<T>,
    field: GeneratorField<T>,
    rule: Option<InheritanceRule<T>>,
}

/// Grows a generator tree breadth-first to `depth`.
///
/// Each branch is integrated over `(0, span_per_branch)`, or `(0, s_b)` when
/// the schedule fires an event inside the span.
pub fn grow_tree<T: Scalar>(
    root_field: &GeneratorField<T>,
    root_init: GeneratorState<T>,
    span_per_branch: T,
    schedule: &Schedule<T>,
    depth: usize,
    opts: &GrowOptions<T>,
) -> Result<GeneratorTree<T>> {
    grow_tree_with(
        root_field,
        root_init,
        span_per_branch,
        schedule,
        depth,
        opts,
        |_, _| None,
    )
}

/// Like [`grow_tree`], but `adjust(id, nominal)` may replace the field a
/// branch is integrated with. Children still inherit from the nominal field,
/// so an adjustment stays local to one branch.
pub fn grow_tree_with<T, F>(
    root_field: &GeneratorField<T>,
    root_init: GeneratorState<T>,
    span_per_branch: T,
    schedule: &Schedule<T>,
    depth: usize,
    opts: &GrowOptions<T>,
    adjust: F,
) -> Result<GeneratorTree<T>>
where
    T: Scalar,
    F: Fn(usize, &GeneratorField<T>) -> Option<GeneratorField<T>> + Sync,
{
    if !(span_per_branch > T::zero()) || !span_per_branch.is_finite() {
        return Err(Error::InvalidArgument(
            "span_per_branch must be positive".into(),
        ));
    }
    schedule.validate(span_per_branch)?;
    let requested = schedule.branch_count(depth);
    if requested > opts.branch_cap as u128 {
        return Err(Error::BranchBudgetExceeded {
            requested,
            cap: opts.branch_cap,
        });
    }

    let mut branches: Vec<BranchRealization<T>> = Vec::with_capacity(requested as usize);
    let mut nominal: Vec<GeneratorField<T>> = Vec::with_capacity(requested as usize);
    let mut frontier = vec![Pending {
        parent: None,
        init: root_init,
        field: root_field.clone(),
        rule: None,
    }];

    for level in 0..=depth {
        let s_end = if level < depth {
            schedule.event_at(level).s_b.unwrap_or(span_per_branch)
        } else {
            span_per_branch
        };
        let span = (T::zero(), s_end);
        let first_id = branches.len();
        let integrated: Vec<Result<(GeneratorField<T>, Trajectory<T>)>> = frontier
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let used = adjust(first_id + i, &p.field).unwrap_or_else(|| p.field.clone());
                let traj = integrate(&used, p.init, span, &opts.integration)?;
                Ok((used, traj))
            })
            .collect();

        for (p, res) in frontier.drain(..).zip(integrated) {
            let (used, trajectory) = res?;
            let id = branches.len();
            branches.push(BranchRealization {
                id,
                parent: p.parent,
                depth: level,
                field: used,
                init: p.init,
                span,
                trajectory,
                rule: p.rule,
                label: None,
                heading_override: None,
            });
            nominal.push(p.field);
        }

        if level < depth {
            let event = schedule.event_at(level);
            for id in first_id..branches.len() {
                let end = *branches[id].trajectory.end();
                for ((init, field), rule) in spawn_children(&end, &nominal[id], event)
                    .into_iter()
                    .zip(event.rules.iter())
                {
                    frontier.push(Pending {
                        parent: Some(id),
                        init,
                        field,
                        rule: Some(*rule),
                    });
                }
            }
        }
    }

    Ok(GeneratorTree {
        branches,
        schedule: Some(schedule.clone()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityEntry<T> {
    pub branch: usize,
    pub parent: usize,
    pub position_gap: T,
    pub heading_gap: T,
}

/// Per-branch gaps between a child's initial state and its parent's state at
/// the branch event. A recorded heading override counts as expected.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport<T> {
    pub entries: Vec<ContinuityEntry<T>>,
}

impl<T: Scalar> ContinuityReport<T> {
    pub fn violations(&self) -> Vec<&ContinuityEntry<T>> {
        self.entries
            .iter()
            .filter(|e| e.position_gap != T::zero() || e.heading_gap != T::zero())
            .collect()
    }

    pub fn is_exact(&self) -> bool {
        self.violations().is_empty()
    }
}

pub fn check_branch_continuity<T: Scalar>(tree: &GeneratorTree<T>) -> ContinuityReport<T> {
    let entries = tree
        .branches
        .iter()
        .filter_map(|b| {
            let parent = b.parent?;
            let at_event = tree.branches[parent].end();
            let start = b.trajectory.start();
            Some(ContinuityEntry {
                branch: b.id,
                parent,
                position_gap: start.position().distance(at_event.position()),
                heading_gap: (start.theta
                    - (at_event.theta + b.heading_override.unwrap_or_else(T::zero)))
                .abs(),
            })
        })
        .collect();
    ContinuityReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::PhaseMode;
    use crate::profile::AnalyticProfile;
    use std::f64::consts::PI;

    fn decay_field() -> GeneratorField<f64> {
        GeneratorField::new(
            AnalyticProfile::exponential(0.88),
            AnalyticProfile::constant(PI / 10.0),
            PhaseMode::Global,
        )
    }

    fn fast() -> GrowOptions<f64> {
        GrowOptions {
            integration: IntegrationOptions::endpoints_only(
                crate::generator::IntegratorChoice::Auto,
            ),
            ..GrowOptions::default()
        }
    }

    #[test]
    fn spawn_copies_state_and_flips_sign() {
        let st = GeneratorState::new(1.0, 2.0, PI / 4.0, 1.0);
        let f = decay_field();
        let kids = spawn_children(&st, &f, &BranchEvent::binary(1.0));
        assert_eq!(kids.len(), 2);
        for (s, _) in &kids {
            assert_eq!(*s, st);
        }
        assert_eq!(kids[0].1.kappa.eval(0.3), PI / 10.0);
        assert_eq!(kids[1].1.kappa.eval(0.3), -PI / 10.0);
    }

    #[test]
    fn identity_rule_preserves_field_values() {
        let f = GeneratorField::new(
            AnalyticProfile::sinusoid(1.0, 0.3, 2.0),
            AnalyticProfile::affine(0.1, -0.4),
            PhaseMode::Local,
        );
        let ev = BranchEvent::at_end(vec![InheritanceRule::new(1.0, Sign::Plus)]);
        let (_, child) = spawn_children(&GeneratorState::default(), &f, &ev).remove(0);
        for i in 0..100 {
            let s = i as f64 * 0.07 - 2.0;
            assert_eq!(child.rho.eval(s), f.rho.eval(s));
            assert_eq!(child.kappa.eval(s), f.kappa.eval(s));
        }
    }

    #[test]
    fn half_speed_rule() {
        let f = GeneratorField::new(
            AnalyticProfile::constant(2.0),
            AnalyticProfile::constant(0.0),
            PhaseMode::Local,
        );
        let ev = BranchEvent::at_end(vec![InheritanceRule::new(0.5, Sign::Plus)]);
        let (_, child) = spawn_children(&GeneratorState::default(), &f, &ev).remove(0);
        for i in 0..100 {
            assert_eq!(child.rho.eval(i as f64 * 0.1), 1.0);
        }
    }

    #[test]
    fn depth_zero_is_single_branch() {
        let t = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &Schedule::uniform(BranchEvent::binary(1.0)),
            0,
            &fast(),
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert!(check_branch_continuity(&t).entries.is_empty());
    }

    #[test]
    fn binary_depth_ten_count_and_exact_continuity() {
        let t = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &Schedule::uniform(BranchEvent::binary(1.0)),
            10,
            &fast(),
        )
        .unwrap();
        assert_eq!(t.len(), (1 << 11) - 1);
        t.validate_structure().unwrap();
        let rep = check_branch_continuity(&t);
        assert_eq!(rep.entries.len(), 2046);
        assert!(rep.is_exact());
    }

    #[test]
    fn ternary_count_law() {
        let ev = BranchEvent::at_end(vec![
            InheritanceRule::new(0.5, Sign::Plus),
            InheritanceRule::new(0.5, Sign::Minus),
            InheritanceRule::new(0.7, Sign::Plus),
        ]);
        let s = Schedule::uniform(ev);
        for k in 0..5 {
            // (m^{k+1} - 1) / (m - 1)
            let expected = (3usize.pow(k as u32 + 1) - 1) / 2;
            assert_eq!(s.branch_count(k), expected as u128);
        }
        let t = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &s,
            4,
            &fast(),
        )
        .unwrap();
        assert_eq!(t.len(), 121);
    }

    #[test]
    fn planted_offset_is_flagged() {
        let mut t = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &Schedule::uniform(BranchEvent::binary(1.0)),
            3,
            &fast(),
        )
        .unwrap();
        t.branches[5].trajectory.samples[0].state.x += 1e-3;
        t.branches[5].init.x += 1e-3;
        let rep = check_branch_continuity(&t);
        let v = rep.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].branch, 5);
        assert!((v[0].position_gap - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn budget_cap() {
        let opts = GrowOptions {
            branch_cap: 100,
            ..fast()
        };
        let r = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &Schedule::uniform(BranchEvent::binary(1.0)),
            8,
            &opts,
        );
        assert!(matches!(
            r,
            Err(Error::BranchBudgetExceeded {
                requested: 511,
                cap: 100
            })
        ));
    }

    #[test]
    fn global_phase_advances_by_span() {
        let t = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            0.75,
            &Schedule::uniform(BranchEvent::binary(1.0)),
            5,
            &fast(),
        )
        .unwrap();
        for b in &t.branches {
            assert!((b.init.tau - 0.75 * b.depth as f64).abs() < 1e-12);
            assert!((b.end().tau - b.init.tau - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_event_truncates_parent() {
        let mut ev = BranchEvent::binary(1.0);
        ev.s_b = Some(0.5);
        let t = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &Schedule::per_depth(vec![ev, BranchEvent::binary(1.0)]),
            2,
            &fast(),
        )
        .unwrap();
        assert_eq!(t.root().span, (0.0, 0.5));
        assert_eq!(t.branches[1].span, (0.0, 1.0));
        assert!(check_branch_continuity(&t).is_exact());
        let mut bad = BranchEvent::binary(1.0);
        bad.s_b = Some(1.5);
        assert!(grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &Schedule::uniform(bad),
            2,
            &fast()
        )
        .is_err());
    }

    #[test]
    fn adjustment_stays_local() {
        let s = Schedule::uniform(BranchEvent::binary(1.0));
        let base = grow_tree(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &s,
            3,
            &fast(),
        )
        .unwrap();
        let bumped = grow_tree_with(
            &decay_field(),
            GeneratorState::default(),
            1.0,
            &s,
            3,
            &fast(),
            |id, f| {
                (id == 1).then(|| GeneratorField {
                    kappa: f.kappa.scaled(1.1),
                    ..f.clone()
                })
            },
        )
        .unwrap();
        assert_ne!(base.branches[1].field, bumped.branches[1].field);
        // grandchildren of branch 1 inherit the nominal field
        assert_eq!(base.branches[3].field, bumped.branches[3].field);
        assert_ne!(base.branches[3].init, bumped.branches[3].init);
        assert_eq!(base.branches[2], bumped.branches[2]);
    }

    #[test]
    fn sign_serde() {
        assert_eq!(serde_json::to_string(&Sign::Minus).unwrap(), "-1");
        assert!(serde_json::from_str::<Sign>("2").is_err());
        let r: InheritanceRule<f64> = serde_json::from_str(r#"{"lambda":0.5,"sigma":-1}"#).unwrap();
        assert_eq!(r.extra_kappa_scale, 1.0);
    }
}
