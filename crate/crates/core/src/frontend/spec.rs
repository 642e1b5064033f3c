//! Versioned JSON spec documents accepted by the tools.

use serde::{Deserialize, Serialize};

use super::{LSystemSpec, SimilarityMap};
use crate::error::{Error, Result};
use crate::generator::{GeneratorField, GeneratorState, PhaseMode};
use crate::geom::Point2;
use crate::profile::AnalyticProfile;
use crate::scalar::Scalar;
use crate::tree::Schedule;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SpecDocument<T> {
    pub v: u32,
    #[serde(flatten)]
    pub body: SpecBody<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum SpecBody<T> {
    Ifs(IfsDoc<T>),
    Lsystem(LSystemDoc<T>),
    Generator(GeneratorDoc<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct IfsDoc<T> {
    pub maps: Vec<SimilarityMap<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<Point2<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct LSystemDoc<T> {
    #[serde(flatten)]
    pub system: LSystemSpec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_per_depth: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<Point2<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

impl<T: Scalar> LSystemDoc<T> {
    pub fn from_spec(system: LSystemSpec<T>) -> Self {
        Self {
            system,
            scale_per_depth: None,
            root: None,
            heading: None,
            depth: None,
        }
    }

    pub fn spec(&self) -> LSystemSpec<T> {
        self.system.clone()
    }
}

/// A generator tree given directly by its root profiles and branch schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GeneratorDoc<T> {
    pub rho: AnalyticProfile<T>,
    pub kappa: AnalyticProfile<T>,
    #[serde(default)]
    pub phase: PhaseMode,
    /// Arc-length span of every branch.
    pub span: T,
    /// Root state; defaults to the origin heading up.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<GeneratorState<T>>,
    pub schedule: Schedule<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

impl<T: Scalar> GeneratorDoc<T> {
    pub fn field(&self) -> GeneratorField<T> {
        GeneratorField::new(self.rho.clone(), self.kappa.clone(), self.phase)
    }

    pub fn init_state(&self) -> GeneratorState<T> {
        self.init
            .unwrap_or_else(|| GeneratorState::new(T::zero(), T::zero(), T::FRAC_PI_2(), T::zero()))
    }
}

impl<T: Scalar> SpecDocument<T> {
    pub fn new(body: SpecBody<T>) -> Self {
        Self {
            v: SPEC_VERSION,
            body,
        }
    }

    /// Parses a document; syntax and schema errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.v != SPEC_VERSION {
            let (line, column) = super::locate(text, "\"v\"");
            return Err(Error::Parse {
                line,
                column,
                message: format!("unsupported spec version {}", doc.v),
            });
        }
        Ok(doc)
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            SpecBody::Ifs(_) => "ifs",
            SpecBody::Lsystem(_) => "lsystem",
            SpecBody::Generator(_) => "generator",
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec documents always serialize");
        s.push('\n');
        s
    }
}
