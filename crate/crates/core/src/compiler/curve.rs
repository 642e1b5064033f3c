use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{GeneratorField, PhaseMode};
use crate::geom::Point2;
use crate::profile::AnalyticProfile;
use crate::scalar::Scalar;

/// Analytic plane curves with a known generator representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum AnalyticCurve<T> {
    /// `origin + velocity * s`
    Line {
        origin: Point2<T>,
        velocity: Point2<T>,
    },
    /// `center + radius * e^{i(phase0 + rate*s)}`
    CircularArc {
        center: Point2<T>,
        radius: T,
        phase0: T,
        rate: T,
    },
    /// `center + scale * e^{growth*s} * e^{i(phase0 + rate*s)}`
    ExpSpiral {
        center: Point2<T>,
        scale: T,
        growth: T,
        phase0: T,
        rate: T,
    },
    /// `(x(s), y(s))` given by profiles.
    Parametric {
        x: AnalyticProfile<T>,
        y: AnalyticProfile<T>,
    },
}

/// Generator data reproducing a curve from parameter `s0` on: the field is
/// written in the local parameter `u = s - s0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGenerator<T> {
    pub field: GeneratorField<T>,
    pub start: Point2<T>,
    pub theta0: T,
}

/// `(p(0), p'(s))` when the profile is affine in `s`.
fn affine_parts<T: Scalar>(p: &AnalyticProfile<T>) -> Option<(T, T)> {
    match p {
        AnalyticProfile::Constant { value } => Some((*value, T::zero())),
        AnalyticProfile::Affine { a, b } => Some((*a, *b)),
        AnalyticProfile::Scaled { factor, inner } => {
            affine_parts(inner).map(|(a, b)| (*factor * a, *factor * b))
        }
        _ => None,
    }
}

impl<T: Scalar> AnalyticCurve<T> {
    pub fn eval(&self, s: T) -> Point2<T> {
        match self {
            Self::Line { origin, velocity } => *origin + *velocity * s,
            Self::CircularArc {
                center,
                radius,
                phase0,
                rate,
            } => *center + Point2::from_angle(*phase0 + *rate * s) * *radius,
            Self::ExpSpiral {
                center,
                scale,
                growth,
                phase0,
                rate,
            } => *center + Point2::from_angle(*phase0 + *rate * s) * (*scale * (*growth * s).exp()),
            Self::Parametric { x, y } => Point2::new(x.eval(s), y.eval(s)),
        }
    }

    /// Spiral through `start` with initial heading `theta`, speed
    /// `c * e^{growth*u}` and turning rate `rate`.
    pub fn spiral_from(start: Point2<T>, theta: T, c: T, growth: T, rate: T) -> Self {
        let w = Complex::new(growth, rate);
        // z(u) = start + c e^{i theta} (e^{wu} - 1) / w
        let k = Complex::from_polar(c, theta) / w;
        Self::ExpSpiral {
            center: start - Point2::new(k.re, k.im),
            scale: k.norm(),
            growth,
            phase0: k.arg(),
            rate,
        }
    }

    /// Circle through `start` with heading `theta`, speed `speed` and
    /// turning rate `rate != 0`.
    pub fn arc_from(start: Point2<T>, theta: T, speed: T, rate: T) -> Self {
        let radius = speed / rate.abs();
        let side = if rate > T::zero() {
            T::FRAC_PI_2()
        } else {
            -T::FRAC_PI_2()
        };
        Self::CircularArc {
            center: start + Point2::from_angle(theta + side) * radius,
            radius,
            phase0: theta - side,
            rate,
        }
    }
}

/// Converts an analytic curve into the generator `(rho, kappa, theta0)`
/// that traces it from parameter `s0`.
pub fn curve_to_generator<T: Scalar>(curve: &AnalyticCurve<T>, s0: T) -> Result<CurveGenerator<T>> {
    let local = |rho, kappa| GeneratorField::new(rho, kappa, PhaseMode::Local);
    let start = curve.eval(s0);
    let out = match curve {
        AnalyticCurve::Line { velocity, .. } => {
            let speed = velocity.norm();
            if !(speed > T::zero()) {
                return Err(Error::IrregularCurve);
            }
            CurveGenerator {
                field: local(
                    AnalyticProfile::constant(speed),
                    AnalyticProfile::constant(T::zero()),
                ),
                start,
                theta0: velocity.angle(),
            }
        }
        AnalyticCurve::CircularArc {
            radius,
            phase0,
            rate,
            ..
        } => {
            let speed = radius.abs() * rate.abs();
            if !(speed > T::zero()) {
                return Err(Error::IrregularCurve);
            }
            let side = if *rate > T::zero() {
                T::FRAC_PI_2()
            } else {
                -T::FRAC_PI_2()
            };
            let side = if *radius < T::zero() { -side } else { side };
            CurveGenerator {
                field: local(
                    AnalyticProfile::constant(speed),
                    AnalyticProfile::constant(*rate),
                ),
                start,
                theta0: *phase0 + *rate * s0 + side,
            }
        }
        AnalyticCurve::ExpSpiral {
            scale,
            growth,
            phase0,
            rate,
            ..
        } => {
            let c = *scale * growth.hypot(*rate) * (*growth * s0).exp();
            if !(c > T::zero()) {
                return Err(Error::IrregularCurve);
            }
            CurveGenerator {
                field: local(
                    AnalyticProfile::exponential(growth.exp()).scaled(c),
                    AnalyticProfile::constant(*rate),
                ),
                start,
                theta0: *phase0 + *rate * s0 + rate.atan2(*growth),
            }
        }
        AnalyticCurve::Parametric { x, y } => {
            let (Some((_, vx)), Some((_, vy))) = (affine_parts(x), affine_parts(y)) else {
                return Err(Error::UnsupportedFamily(
                    "parametric curves are supported only when both coordinates are affine".into(),
                ));
            };
            return curve_to_generator(
                &AnalyticCurve::Line {
                    origin: Point2::new(x.eval(T::zero()), y.eval(T::zero())),
                    velocity: Point2::new(vx, vy),
                },
                s0,
            );
        }
    };
    Ok(out)
}
