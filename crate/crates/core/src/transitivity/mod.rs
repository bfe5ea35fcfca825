//! Moving finitely many points of the regular locus of `xy = z^2` to
//! prescribed targets with shears `f(x) Xi` and `g(y) Theta`.

mod lemma;
mod planner;
mod verify;

pub use lemma::{lemma_approx_field, sample_ball, Ball, LemmaField, MAX_POWER, SAMPLES_PER_BALL};
pub use planner::{genericize, plan_multi, plan_single_move, Genericized, GENERICIZE_RETRIES};
pub use verify::{verify_certificate, VerifyReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{same_ring, CoordinateRing};
use crate::fields::{parse_complex, FieldError, Point};
use crate::flows::{FlowError, FlowProgram};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransitivityError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no generic position after {retries} attempts: {detail}")]
    Genericity { retries: usize, detail: String },
    #[error("point {index} misses its target by {residual:e}")]
    Residual { index: usize, residual: f64 },
    #[error("no approximation below {delta:e} up to power {max_power} (best {best:e})")]
    Unachievable {
        delta: f64,
        max_power: u32,
        best: f64,
    },
}

/// Sources and targets on the quadric's regular locus.
#[derive(Clone, Debug, PartialEq)]
pub struct MoveRequest {
    pub sources: Vec<Point>,
    pub targets: Vec<Point>,
    pub tolerance: f64,
}

/// Points far below this relative distance count as equal.
const COINCIDENCE: f64 = 1e-12;

pub(crate) fn coincide(a: &Point, b: &Point) -> bool {
    a.distance(b) <= COINCIDENCE * a.norm().max(b.norm()).max(1.0)
}

impl MoveRequest {
    pub fn new(
        sources: Vec<Point>,
        targets: Vec<Point>,
        tolerance: f64,
    ) -> Result<Self, TransitivityError> {
        let pre = |m: String| Err(TransitivityError::Precondition(m));
        if sources.len() != targets.len() {
            return pre(format!(
                "{} sources but {} targets",
                sources.len(),
                targets.len()
            ));
        }
        let quadric = CoordinateRing::quadric();
        for (label, pts) in [("source", &sources), ("target", &targets)] {
            for (i, p) in pts.iter().enumerate() {
                if !same_ring(p.ring(), &quadric) {
                    return pre(format!("{label} {i} is not on the quadric"));
                }
                if p.norm() <= COINCIDENCE {
                    return pre(format!("{label} {i} is the singular point"));
                }
                for (j, q) in pts.iter().enumerate().take(i) {
                    if coincide(p, q) {
                        return pre(format!("{label}s {j} and {i} coincide"));
                    }
                }
            }
        }
        Ok(Self {
            sources,
            targets,
            tolerance,
        })
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn to_json(&self) -> MoveRequestJson {
        MoveRequestJson {
            sources: self.sources.iter().map(Point::to_json).collect(),
            targets: self.targets.iter().map(Point::to_json).collect(),
            tolerance: self.tolerance,
        }
    }

    pub fn from_json(j: &MoveRequestJson) -> Result<Self, TransitivityError> {
        let quadric = CoordinateRing::quadric();
        let read = |pts: &[Vec<String>]| -> Result<Vec<Point>, TransitivityError> {
            pts.iter()
                .map(|p| {
                    let coords = p
                        .iter()
                        .map(|s| {
                            parse_complex(s).ok_or_else(|| {
                                TransitivityError::Precondition(format!("bad coordinate '{s}'"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if coords.len() != 3 {
                        return Err(TransitivityError::Precondition(format!(
                            "expected 3 coordinates, found {}",
                            coords.len()
                        )));
                    }
                    Ok(Point::new(&quadric, coords)?)
                })
                .collect()
        };
        Self::new(read(&j.sources)?, read(&j.targets)?, j.tolerance)
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRequestJson {
    pub sources: Vec<Vec<String>>,
    pub targets: Vec<Vec<String>>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

/// One point moved while every other tracked point stays put.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub index: usize,
    pub program: FlowProgram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveCertificate {
    pub pre_conjugation: FlowProgram,
    pub stages: Vec<Stage>,
    pub post_conjugation: FlowProgram,
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub genericity_retries: usize,
    /// Whether sources were first routed through random intermediate points.
    #[serde(default)]
    pub routed: bool,
}

impl MoveCertificate {
    /// `pre`, then every stage, then `post`.
    pub fn program(&self) -> FlowProgram {
        let mut p = self.pre_conjugation.clone();
        for s in &self.stages {
            p = p.then(&s.program);
        }
        p.then(&self.post_conjugation)
    }
}
