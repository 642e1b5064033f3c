//! Closed family of analytic scalar profiles used as speed and turning-rate
//! carriers of the planar generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An analytic scalar function of the generator phase.
///
/// Serialized as a tagged object, e.g. `{"kind":"exponential","base":0.88}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum AnalyticProfile<T> {
    Constant {
        value: T,
    },
    /// `base^s`
    Exponential {
        base: T,
    },
    /// `a + b*s`
    Affine {
        a: T,
        b: T,
    },
    /// `k0 + eps*sin(omega*s)`
    Sinusoid {
        k0: T,
        eps: T,
        omega: T,
    },
    Scaled {
        factor: T,
        inner: Box<AnalyticProfile<T>>,
    },
}

impl<T: Scalar> AnalyticProfile<T> {
    pub fn constant(value: T) -> Self {
        Self::Constant { value }
    }

    pub fn exponential(base: T) -> Self {
        Self::Exponential { base }
    }

    pub fn affine(a: T, b: T) -> Self {
        Self::Affine { a, b }
    }

    pub fn sinusoid(k0: T, eps: T, omega: T) -> Self {
        Self::Sinusoid { k0, eps, omega }
    }

    /// Multiplies the profile by `factor`. Nested factors are folded into a
    /// single `Scaled` wrapper.
    pub fn scaled(&self, factor: T) -> Self {
        match self {
            Self::Scaled { factor: f, inner } => Self::Scaled {
                factor: factor * *f,
                inner: inner.clone(),
            },
            other => Self::Scaled {
                factor,
                inner: Box::new(other.clone()),
            },
        }
    }

    pub fn eval(&self, s: T) -> T {
        match self {
            Self::Constant { value } => *value,
            Self::Exponential { base } => base.powf(s),
            Self::Affine { a, b } => *a + *b * s,
            Self::Sinusoid { k0, eps, omega } => *k0 + *eps * (*omega * s).sin(),
            Self::Scaled { factor, inner } => *factor * inner.eval(s),
        }
    }

    /// Exact definite integral over `[a, b]`.
    pub fn integral(&self, a: T, b: T) -> T {
        let half = T::lit(0.5);
        match self {
            Self::Constant { value } => *value * (b - a),
            Self::Exponential { base } => {
                let ln = base.ln();
                if ln == T::zero() {
                    b - a
                } else {
                    (base.powf(b) - base.powf(a)) / ln
                }
            }
            Self::Affine { a: c0, b: c1 } => *c0 * (b - a) + *c1 * half * (b * b - a * a),
            Self::Sinusoid { k0, eps, omega } => {
                let lin = *k0 * (b - a);
                if *omega == T::zero() {
                    lin
                } else {
                    lin + *eps * ((*omega * a).cos() - (*omega * b).cos()) / *omega
                }
            }
            Self::Scaled { factor, inner } => *factor * inner.integral(a, b),
        }
    }

    /// `Some(c)` if the profile is the constant `c` by construction.
    pub fn as_constant(&self) -> Option<T> {
        match self {
            Self::Constant { value } => Some(*value),
            Self::Scaled { factor, inner } => inner.as_constant().map(|c| *factor * c),
            _ => None,
        }
    }

    /// `Some((c, A))` if the profile is `c * A^s` by construction
    /// (constants have `A = 1`).
    pub fn as_exponential(&self) -> Option<(T, T)> {
        match self {
            Self::Constant { value } => Some((*value, T::one())),
            Self::Exponential { base } => Some((T::one(), *base)),
            Self::Scaled { factor, inner } => inner.as_exponential().map(|(c, a)| (*factor * c, a)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &T, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "profile parameter {what} is not finite"
                )))
            }
        };
        match self {
            Self::Constant { value } => finite(value, "value"),
            Self::Exponential { base } => {
                finite(base, "base")?;
                if *base <= T::zero() {
                    return Err(Error::InvalidArgument(format!(
                        "exponential base must be positive, got {base}"
                    )));
                }
                Ok(())
            }
            Self::Affine { a, b } => finite(a, "a").and(finite(b, "b")),
            Self::Sinusoid { k0, eps, omega } => finite(k0, "k0")
                .and(finite(eps, "eps"))
                .and(finite(omega, "omega")),
            Self::Scaled { factor, inner } => {
                finite(factor, "factor")?;
                inner.validate()
            }
        }
    }
}

/// Evaluates `p` at `s`.
pub fn eval_profile<T: Scalar>(p: &AnalyticProfile<T>, s: T) -> T {
    p.eval(s)
}
