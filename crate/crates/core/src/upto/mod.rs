//! Bisimulation up-to convex hull and congruence on the belief-state
//! transformer: closure membership, certificate checking, a bounded refuter
//! and a certificate search.

mod certfile;
mod check;
mod closure;
mod refute;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Dist, Label};
use crate::transformer::TransformerError;

pub use check::check_certificate;
pub use closure::{closure_member, equivalence_closure, generator_pairs, ClosureWitness};
pub use refute::{refute_bounded, RefuteOutcome, Trace};
pub use search::{search_witness, SearchOutcome};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UptoError {
    #[error("input error: {0}")]
    Input(String),
    #[error("certificate format: {0}")]
    Format(String),
    #[error(transparent)]
    Transformer(#[from] TransformerError),
}

/// Which closure of the candidate relation successor pairs must land in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    /// The relation itself.
    Plain,
    /// Its convex hull.
    Cvx,
    /// The convex hull of its equivalence closure.
    CvxE,
}

impl Base {
    pub fn name(self) -> &'static str {
        match self {
            Base::Plain => "plain",
            Base::Cvx => "cvx",
            Base::CvxE => "cvx_e",
        }
    }
}

impl std::str::FromStr for Base {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plain" => Ok(Base::Plain),
            "cvx" => Ok(Base::Cvx),
            "cvx_e" => Ok(Base::CvxE),
            other => Err(format!("unknown technique `{other}` (expected plain, cvx or cvx_e)")),
        }
    }
}

/// Up-to technique: a base closure plus optional identity slack, which adds
/// a shared diagonal pair `(φ, φ)` to every membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TechniqueConfig {
    pub base: Base,
    pub identity_slack: bool,
}

impl TechniqueConfig {
    pub const fn new(base: Base, identity_slack: bool) -> Self {
        TechniqueConfig { base, identity_slack }
    }
}

impl Default for TechniqueConfig {
    fn default() -> Self {
        TechniqueConfig::new(Base::CvxE, true)
    }
}

/// A finite relation on distributions together with the technique it is
/// claimed to be a bisimulation up-to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub pairs: Vec<(Dist, Dist)>,
    pub config: TechniqueConfig,
}

impl Certificate {
    /// Repeated pairs are dropped, keeping first occurrences.
    pub fn new(pairs: Vec<(Dist, Dist)>, config: TechniqueConfig) -> Self {
        let mut out: Vec<(Dist, Dist)> = Vec::with_capacity(pairs.len());
        for p in pairs {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Certificate { pairs: out, config }
    }
}

/// Which side of a pair plays the spoiler's move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    /// Exactly one side can step on the label.
    CanStepMismatch { left: bool, right: bool },
    /// No defender response lands the pair in the closure.
    Unmatched,
}

/// A failed proof obligation of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Obligation {
    pub pair_index: usize,
    pub label: Label,
    pub spoiler: Side,
    pub generator: Option<Dist>,
    pub reason: Reason,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pair {} label {}: ", self.pair_index, self.label)?;
        match &self.reason {
            Reason::CanStepMismatch { left, right } => {
                write!(f, "can-step mismatch (left {left}, right {right})")
            }
            Reason::Unmatched => write!(
                f,
                "{} move to {} has no matching response",
                self.spoiler,
                self.generator.as_ref().map(Dist::to_string).unwrap_or_default()
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(Vec<Obligation>),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }

    pub fn obligations(&self) -> &[Obligation] {
        match self {
            Verdict::Accepted => &[],
            Verdict::Rejected(obs) => obs,
        }
    }
}

pub use certfile::{certificate_from_json, certificate_to_json, CertificateFile};
