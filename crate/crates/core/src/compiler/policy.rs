use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::curve::AnalyticCurve;
use crate::error::{Error, Result};
use crate::generator::expm1_over;
use crate::geom::{signed_angle, wrap_angle, Point2};
use crate::scalar::Scalar;
use crate::tree::Sign;

/// Turn angles within this of zero are fitted with a straight segment.
pub const STRAIGHT_ANGLE_TOL: f64 = 1e-12;
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;
/// Total turn of a matched spiral relative to the chord angle it must hit.
pub const SPIRAL_TURN_RATIO: f64 = 1.5;

/// How a discrete edge is realized by a generator branch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum EdgePolicy<T> {
    /// Constant speed, zero curvature, heading reset to the chord.
    StraightChord,
    /// Fixed total turn (signed by the edge label), heading reset so the arc
    /// spans the chord.
    ConstantCurvatureArc { total_turn: T },
    /// Circular arc leaving with the inherited heading.
    MatchedHeadingArc,
    /// Exponential spiral leaving with the inherited heading.
    #[default]
    MatchedHeadingSpiral,
}

impl<T: Scalar> EdgePolicy<T> {
    pub fn name(&self) -> &'static str {
        match self {
            EdgePolicy::StraightChord => "chord",
            EdgePolicy::ConstantCurvatureArc { .. } => "arc",
            EdgePolicy::MatchedHeadingArc => "matched",
            EdgePolicy::MatchedHeadingSpiral => "spiral",
        }
    }

    /// Parses `chord`, `arc`, `matched` or `spiral`; `arc` uses `arc_turn`.
    pub fn from_name(name: &str, arc_turn: T) -> Result<Self> {
        match name {
            "chord" => Ok(EdgePolicy::StraightChord),
            "arc" => Ok(EdgePolicy::ConstantCurvatureArc {
                total_turn: arc_turn,
            }),
            "matched" => Ok(EdgePolicy::MatchedHeadingArc),
            "spiral" => Ok(EdgePolicy::MatchedHeadingSpiral),
            other => Err(Error::InvalidArgument(format!("unknown policy {other:?}"))),
        }
    }
}

impl<T: Scalar> fmt::Display for EdgePolicy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl<T: Scalar> FromStr for EdgePolicy<T> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s, T::FRAC_PI_4())
    }
}

/// A fitted edge: the curve to trace and the heading offset applied to the
/// inherited state, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFit<T> {
    pub curve: AnalyticCurve<T>,
    pub heading_override: Option<T>,
}

/// Fits one edge from `start` (inherited heading `theta`) to `target` over
/// arc-length span `span`.
pub fn fit_edge<T: Scalar>(
    policy: &EdgePolicy<T>,
    start: Point2<T>,
    theta: T,
    target: Point2<T>,
    span: T,
    sigma: Sign,
    edge: usize,
) -> Result<EdgeFit<T>> {
    let chord = target - start;
    let len = chord.norm();
    if !(len > T::lit(1e-15)) {
        return Err(Error::DegenerateEdge { edge });
    }
    let chord_dir = chord.angle();
    let alpha = wrap_angle(chord_dir - theta);
    let straight = |heading: T| AnalyticCurve::Line {
        origin: start,
        velocity: Point2::from_angle(heading) * (len / span),
    };
    let small = T::lit(STRAIGHT_ANGLE_TOL);

    match policy {
        EdgePolicy::StraightChord => Ok(EdgeFit {
            curve: straight(theta + alpha),
            heading_override: Some(alpha),
        }),
        EdgePolicy::ConstantCurvatureArc { total_turn } => {
            let phi = sigma.value::<T>() * total_turn.abs();
            if phi.abs() < small {
                return Ok(EdgeFit {
                    curve: straight(theta + alpha),
                    heading_override: Some(alpha),
                });
            }
            let half = phi / T::lit(2.0);
            let offset = alpha - half;
            let speed = len * half / (span * half.sin());
            Ok(EdgeFit {
                curve: AnalyticCurve::arc_from(start, theta + offset, speed, phi / span),
                heading_override: Some(offset),
            })
        }
        EdgePolicy::MatchedHeadingArc => {
            if alpha.abs() < small {
                return Ok(EdgeFit {
                    curve: straight(theta),
                    heading_override: None,
                });
            }
            let phi = matched_arc_turn(alpha, span).ok_or(Error::NoSolution {
                edge,
                angle: alpha.to_f64_lossy(),
            })?;
            let kappa = phi / span;
            let unit = expm1_over(Complex::new(T::zero(), kappa), span);
            Ok(EdgeFit {
                curve: AnalyticCurve::arc_from(start, theta, len / unit.norm(), kappa),
                heading_override: None,
            })
        }
        EdgePolicy::MatchedHeadingSpiral => {
            if alpha.abs() < small {
                return Ok(EdgeFit {
                    curve: straight(theta),
                    heading_override: None,
                });
            }
            let (growth, kappa) = matched_spiral(alpha, span).ok_or(Error::NoSolution {
                edge,
                angle: alpha.to_f64_lossy(),
            })?;
            let unit = expm1_over(Complex::new(growth, kappa), span);
            Ok(EdgeFit {
                curve: AnalyticCurve::spiral_from(start, theta, len / unit.norm(), growth, kappa),
                heading_override: None,
            })
        }
    }
}

/// Chord direction of a unit-coefficient closed-form curve, measured from
/// the start heading, unwrapped around `reference`.
fn chord_angle<T: Scalar>(w: Complex<T>, span: T, reference: T) -> T {
    let e = expm1_over(w, span);
    reference + signed_angle(Point2::from_angle(reference), Point2::new(e.re, e.im))
}

/// Total turn of the constant-curvature arc whose chord leaves at `alpha`
/// from the start heading, by bisection on `(-2pi, 2pi)`.
fn matched_arc_turn<T: Scalar>(alpha: T, span: T) -> Option<T> {
    let eps = T::lit(1e-9);
    let two_pi = T::PI() + T::PI();
    // the chord leaves at half the turn, so the bracket ends bound |alpha|
    if alpha.abs() >= T::PI() - eps / T::lit(2.0) {
        return None;
    }
    let f =
        |phi: T| chord_angle(Complex::new(T::zero(), phi / span), span, phi / T::lit(2.0)) - alpha;
    bisect(f, -two_pi + eps, two_pi - eps)
}

/// Growth rate and turning rate of the exponential spiral with total turn
/// `1.5 * alpha` whose chord leaves at `alpha` from the start heading.
fn matched_spiral<T: Scalar>(alpha: T, span: T) -> Option<(T, T)> {
    if alpha.abs() >= T::PI() {
        return None;
    }
    let phi = T::lit(SPIRAL_TURN_RATIO) * alpha;
    let kappa = phi / span;
    let half = phi / T::lit(2.0);
    // the chord angle moves from phi/2 (circle) towards phi as growth rises
    let f = |g: T| (chord_angle(Complex::new(g, kappa), span, half) - alpha) * alpha.signum();
    let mut hi = T::one() / span;
    let mut tries = 0;
    while f(hi) < T::zero() {
        hi *= T::lit(2.0);
        tries += 1;
        if tries > 60 || !hi.is_finite() {
            return None;
        }
    }
    let g = bisect(f, T::zero(), hi)?;
    Some((g, kappa))
}

/// Root of a function that changes sign on `[lo, hi]`, or `None` when the
/// bracket is invalid or the residual stays above tolerance.
fn bisect<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> Option<T> {
    let tol = T::lit(BISECTION_TOL).max(T::epsilon() * T::lit(1e3));
    let (mut flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return None;
    }
    let mut mid = lo;
    for _ in 0..BISECTION_MAX_ITER {
        mid = (lo + hi) / T::lit(2.0);
        let fm = f(mid);
        if fm == T::zero() || hi - lo <= T::epsilon() * (lo.abs() + hi.abs()) {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if f(mid).abs() <= tol {
        Some(mid)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::curve_to_generator;
    use crate::generator::{integrate_closed_form, GeneratorState};
    use std::f64::consts::PI;

    fn run(
        policy: EdgePolicy<f64>,
        theta: f64,
        target: Point2<f64>,
    ) -> (GeneratorState<f64>, EdgeFit<f64>) {
        let start = Point2::new(0.3, -0.2);
        let fit = fit_edge(&policy, start, theta, target, 1.0, Sign::Plus, 0).unwrap();
        let g = curve_to_generator(&fit.curve, 0.0).unwrap();
        let expected_theta = theta + fit.heading_override.unwrap_or(0.0);
        assert!((wrap_angle(g.theta0 - expected_theta)).abs() < 1e-12);
        let init = GeneratorState::new(start.x, start.y, expected_theta, 0.0);
        let t = integrate_closed_form(&g.field, init, (0.0, 1.0)).unwrap();
        (*t.end(), fit)
    }

    #[test]
    fn every_policy_hits_the_target() {
        let target = Point2::new(1.1, 0.9);
        for policy in [
            EdgePolicy::StraightChord,
            EdgePolicy::ConstantCurvatureArc { total_turn: 0.7 },
            EdgePolicy::MatchedHeadingArc,
            EdgePolicy::MatchedHeadingSpiral,
        ] {
            for theta in [0.0, 0.5, PI / 2.0, -1.0] {
                let (end, _) = run(policy, theta, target);
                assert!(
                    end.position().distance(target) < 1e-12,
                    "{policy:?} theta={theta}: {:?}",
                    end
                );
            }
        }
    }

    #[test]
    fn matched_policies_keep_heading() {
        let (_, fit) = run(EdgePolicy::MatchedHeadingSpiral, 0.2, Point2::new(1.0, 1.0));
        assert!(fit.heading_override.is_none());
        let (_, fit) = run(EdgePolicy::MatchedHeadingArc, 0.2, Point2::new(1.0, 1.0));
        assert!(fit.heading_override.is_none());
    }

    #[test]
    fn matched_arc_turn_is_twice_chord_angle() {
        for alpha in [-2.5f64, -0.3, 0.01, 1.0, 3.0] {
            let phi = matched_arc_turn(alpha, 1.0).unwrap();
            assert!((phi - 2.0 * alpha).abs() < 1e-9, "{alpha} -> {phi}");
        }
    }

    #[test]
    fn spiral_end_heading_is_one_and_a_half_alpha() {
        let start = Point2::new(0.3, -0.2);
        let target = Point2::new(1.3, 0.5);
        let theta = 0.1;
        let alpha = wrap_angle((target - start).angle() - theta);
        let (end, _) = run(EdgePolicy::MatchedHeadingSpiral, theta, target);
        assert!((end.theta - theta - 1.5 * alpha).abs() < 1e-12);
    }

    #[test]
    fn backwards_chord_has_no_matched_solution() {
        let r = fit_edge(
            &EdgePolicy::<f64>::MatchedHeadingSpiral,
            Point2::zero(),
            0.0,
            Point2::new(-1.0, 0.0),
            1.0,
            Sign::Plus,
            4,
        );
        assert!(matches!(r, Err(Error::NoSolution { edge: 4, .. })));
        let r = fit_edge(
            &EdgePolicy::<f64>::MatchedHeadingArc,
            Point2::zero(),
            0.0,
            Point2::new(-1.0, 0.0),
            1.0,
            Sign::Plus,
            4,
        );
        assert!(matches!(r, Err(Error::NoSolution { .. })), "{r:?}");
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let r = fit_edge(
            &EdgePolicy::<f64>::StraightChord,
            Point2::zero(),
            0.0,
            Point2::zero(),
            1.0,
            Sign::Plus,
            2,
        );
        assert_eq!(r, Err(Error::DegenerateEdge { edge: 2 }));
    }

    #[test]
    fn names_round_trip() {
        for n in ["chord", "arc", "matched", "spiral"] {
            let p: EdgePolicy<f64> = n.parse().unwrap();
            assert_eq!(p.name(), n);
        }
        assert!("bogus".parse::<EdgePolicy<f64>>().is_err());
    }
}
