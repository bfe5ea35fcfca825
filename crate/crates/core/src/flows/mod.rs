//! Closed-form flows of the complete fields in the catalogs, programs of
//! flow steps, exact polynomial flows and the commutator-flow scheme.

mod shear;
mod symbolic;
mod trotter;

pub use shear::ShearPoly;
pub use symbolic::{
    flow_exact_point, flow_exact_symbolic, polynomial_flow, preserves_relation, pullback_check,
    pullback_check_theta, pushforward, symbolic_ring,
};
pub use trotter::{bracket_flow_kind, log_log_slope, trotter_bracket_flow, TrotterResult};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{same_ring, Variety};
use crate::fields::{evaluate, format_complex, generator, parse_complex, FieldError, Point};

/// Below this modulus, `(e^{ut} - 1)/u` is replaced by its three-term series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("flow {kind} acts on {expected}, point is on {found}")]
    WrongVariety {
        kind: String,
        expected: String,
        found: String,
    },
    #[error("flow {kind} leaves every bounded set before time {time}")]
    Singular { kind: String, time: String },
    #[error("flow {0} overflowed to a non-finite point")]
    NonFinite(String),
    #[error("{0} has no polynomial flow")]
    NotPolynomial(String),
    #[error("{0}")]
    Parse(String),
}

/// A flow in closed form; shear kinds carry their coefficient polynomial.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowKind {
    Theta,
    Xi,
    XXi,
    /// `f(x) Xi`.
    ShearFXi(ShearPoly),
    /// `g(y) Theta`.
    ShearGTheta(ShearPoly),
    ZXi,
    ZH,
    HQuadric,
    VSl2,
    WSl2,
    BcW,
    DW,
    /// `d H`; not complete, its flow escapes at `t = 1/d`.
    DH,
    HSl2,
}

impl FlowKind {
    pub const SIMPLE_NAMES: [&'static str; 12] = [
        "THETA",
        "XI",
        "X_XI",
        "Z_XI",
        "Z_H",
        "H_QUADRIC",
        "V_SL2",
        "W_SL2",
        "BC_W",
        "D_W",
        "D_H",
        "H_SL2",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FlowKind::Theta => "THETA",
            FlowKind::Xi => "XI",
            FlowKind::XXi => "X_XI",
            FlowKind::ShearFXi(_) => "SHEAR_F_XI",
            FlowKind::ShearGTheta(_) => "SHEAR_G_THETA",
            FlowKind::ZXi => "Z_XI",
            FlowKind::ZH => "Z_H",
            FlowKind::HQuadric => "H_QUADRIC",
            FlowKind::VSl2 => "V_SL2",
            FlowKind::WSl2 => "W_SL2",
            FlowKind::BcW => "BC_W",
            FlowKind::DW => "D_W",
            FlowKind::DH => "D_H",
            FlowKind::HSl2 => "H_SL2",
        }
    }

    /// Kinds without a coefficient polynomial, by name.
    pub fn simple(name: &str) -> Result<Self, FlowError> {
        Ok(match name.to_ascii_uppercase().as_str() {
            "THETA" => FlowKind::Theta,
            "XI" => FlowKind::Xi,
            "X_XI" => FlowKind::XXi,
            "Z_XI" => FlowKind::ZXi,
            "Z_H" => FlowKind::ZH,
            "H_QUADRIC" => FlowKind::HQuadric,
            "V_SL2" => FlowKind::VSl2,
            "W_SL2" => FlowKind::WSl2,
            "BC_W" => FlowKind::BcW,
            "D_W" => FlowKind::DW,
            "D_H" => FlowKind::DH,
            "H_SL2" => FlowKind::HSl2,
            "SHEAR_F_XI" | "SHEAR_G_THETA" => {
                return Err(FlowError::Parse(format!(
                    "{name} needs a coefficient polynomial"
                )))
            }
            _ => return Err(FlowError::Parse(format!("unknown flow kind '{name}'"))),
        })
    }

    pub fn variety(&self) -> Variety {
        match self {
            FlowKind::Theta
            | FlowKind::Xi
            | FlowKind::XXi
            | FlowKind::ShearFXi(_)
            | FlowKind::ShearGTheta(_)
            | FlowKind::ZXi
            | FlowKind::ZH
            | FlowKind::HQuadric => Variety::Quadric,
            _ => Variety::Sl2,
        }
    }

    /// Flows that are polynomial in the point and the time.
    pub fn is_polynomial(&self) -> bool {
        matches!(
            self,
            FlowKind::Theta
                | FlowKind::Xi
                | FlowKind::XXi
                | FlowKind::ShearFXi(_)
                | FlowKind::ShearGTheta(_)
                | FlowKind::VSl2
                | FlowKind::WSl2
        )
    }

    pub fn is_complete(&self) -> bool {
        !matches!(self, FlowKind::DH)
    }

    /// Catalog name of the generating field, for kinds without a shear polynomial.
    pub fn field_name(&self) -> Option<&'static str> {
        Some(match self {
            FlowKind::Theta => "THETA",
            FlowKind::Xi => "XI",
            FlowKind::XXi => "X_XI",
            FlowKind::ZXi => "Z_XI",
            FlowKind::ZH => "Z_H",
            FlowKind::HQuadric | FlowKind::HSl2 => "H",
            FlowKind::VSl2 => "V",
            FlowKind::WSl2 => "W",
            FlowKind::BcW => "BCW",
            FlowKind::DW => "DW",
            FlowKind::DH => "DH",
            FlowKind::ShearFXi(_) | FlowKind::ShearGTheta(_) => return None,
        })
    }

    /// The generating field evaluated at `p`.
    pub fn velocity(&self, p: &Point) -> Result<Vec<Complex64>, FlowError> {
        self.check_point(p)?;
        let c = p.coords();
        match self {
            FlowKind::ShearFXi(f) => {
                let s = f.eval(c[0]);
                Ok(vec![Complex64::new(0.0, 0.0), s * 2.0 * c[2], s * c[0]])
            }
            FlowKind::ShearGTheta(g) => {
                let s = g.eval(c[1]);
                Ok(vec![s * 2.0 * c[2], Complex64::new(0.0, 0.0), s * c[1]])
            }
            _ => {
                let name = self.field_name().expect("catalog kind");
                Ok(evaluate(&generator(self.variety(), name)?, p)?)
            }
        }
    }

    fn check_point(&self, p: &Point) -> Result<(), FlowError> {
        let ring = self.variety().ring();
        if same_ring(p.ring(), &ring) {
            Ok(())
        } else {
            Err(FlowError::WrongVariety {
                kind: self.name().to_string(),
                expected: ring.name().to_string(),
                found: p.ring().name().to_string(),
            })
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowKind::ShearFXi(p) => write!(f, "SHEAR_F_XI[{}]", p.to_text("x")),
            FlowKind::ShearGTheta(p) => write!(f, "SHEAR_G_THETA[{}]", p.to_text("y")),
            k => f.write_str(k.name()),
        }
    }
}

/// `(e^{ut} - 1)/u`, continuous through `u = 0`.
pub fn expm1_over(u: Complex64, t: Complex64) -> Complex64 {
    if u.norm() < SERIES_THRESHOLD {
        return t + u * t * t / 2.0 + u * u * t * t * t / 6.0;
    }
    let z = u * t;
    if z.norm() < 0.5 {
        // Taylor series avoids the cancellation in exp(z) - 1
        let mut term = z;
        let mut sum = z;
        for k in 2..40 {
            term *= z / k as f64;
            sum += term;
            if term.norm() <= f64::EPSILON * sum.norm() {
                break;
            }
        }
        sum / u
    } else {
        (z.exp() - 1.0) / u
    }
}

/// The time-`t` map of `kind` applied to `p`.
pub fn flow(kind: &FlowKind, t: Complex64, p: &Point) -> Result<Point, FlowError> {
    kind.check_point(p)?;
    let c = p.coords();
    let out: Vec<Complex64> = match kind {
        FlowKind::Theta => theta_shear(Complex64::new(1.0, 0.0), t, c),
        FlowKind::Xi => xi_shear(Complex64::new(1.0, 0.0), t, c),
        FlowKind::XXi => xi_shear(c[0], t, c),
        FlowKind::ShearFXi(f) => xi_shear(f.eval(c[0]), t, c),
        FlowKind::ShearGTheta(g) => theta_shear(g.eval(c[1]), t, c),
        FlowKind::ZXi => {
            let (x, y, z) = (c[0], c[1], c[2]);
            vec![
                x,
                y + z * z * 2.0 * expm1_over(2.0 * x, t),
                z * (x * t).exp(),
            ]
        }
        FlowKind::ZH => {
            let (x, y, z) = (c[0], c[1], c[2]);
            vec![x * (-2.0 * z * t).exp(), y * (2.0 * z * t).exp(), z]
        }
        FlowKind::HQuadric => vec![c[0] * (-2.0 * t).exp(), c[1] * (2.0 * t).exp(), c[2]],
        FlowKind::VSl2 => vec![c[0] + t * c[2], c[1] + t * c[3], c[2], c[3]],
        FlowKind::WSl2 => vec![c[0], c[1], c[2] + t * c[0], c[3] + t * c[1]],
        FlowKind::HSl2 => {
            let (e, ei) = (t.exp(), (-t).exp());
            vec![c[0] * ei, c[1] * ei, c[2] * e, c[3] * e]
        }
        FlowKind::BcW => {
            let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
            let s = cc + b;
            let em = expm1_over(a, t);
            // (c + b) e^{at} - b = c + (c + b)(e^{at} - 1)
            vec![a, b, cc + s * a * em, d + b * s * em]
        }
        FlowKind::DW => {
            let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
            vec![a, b, cc + a * d * expm1_over(b, t), d * (b * t).exp()]
        }
        FlowKind::DH => {
            let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
            let w = 1.0 - d * t;
            if w.norm() < 1e-12 {
                return Err(FlowError::Singular {
                    kind: kind.name().to_string(),
                    time: format_complex(t),
                });
            }
            vec![a * w, b * w, cc / w, d / w]
        }
    };
    if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(FlowError::NonFinite(kind.name().to_string()));
    }
    Ok(Point::unchecked(p.ring(), out))
}

/// Time-`t` map of `s * Xi` where `s` is constant along the orbit.
fn xi_shear(s: Complex64, t: Complex64, c: &[Complex64]) -> Vec<Complex64> {
    let (x, y, z) = (c[0], c[1], c[2]);
    let st = s * t;
    vec![x, y + 2.0 * st * z + st * st * x, z + st * x]
}

/// Time-`t` map of `s * Theta` where `s` is constant along the orbit.
fn theta_shear(s: Complex64, t: Complex64, c: &[Complex64]) -> Vec<Complex64> {
    let (x, y, z) = (c[0], c[1], c[2]);
    let st = s * t;
    vec![x + 2.0 * st * z + st * st * y, y, z + st * y]
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowStep {
    pub kind: FlowKind,
    pub t: Complex64,
}

/// Steps applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<StepJson>", try_from = "Vec<StepJson>")]
pub struct FlowProgram {
    pub steps: Vec<FlowStep>,
}

impl FlowProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_steps(steps: Vec<FlowStep>) -> Self {
        Self { steps }
    }

    pub fn push(&mut self, kind: FlowKind, t: Complex64) {
        self.steps.push(FlowStep { kind, t });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn run(&self, p: &Point) -> Result<Point, FlowError> {
        self.steps
            .iter()
            .try_fold(p.clone(), |q, s| flow(&s.kind, s.t, &q))
    }

    /// `p` followed by the image after each step.
    pub fn trace(&self, p: &Point) -> Result<Vec<Point>, FlowError> {
        let mut out = vec![p.clone()];
        for s in &self.steps {
            let next = flow(&s.kind, s.t, out.last().expect("nonempty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Reverse order, negated times. Inverts programs of complete kinds whose
    /// coefficient is constant along orbits, which covers every kind here.
    pub fn inverse(&self) -> Self {
        Self::from_steps(
            self.steps
                .iter()
                .rev()
                .map(|s| FlowStep {
                    kind: s.kind.clone(),
                    t: -s.t,
                })
                .collect(),
        )
    }

    pub fn then(&self, other: &Self) -> Self {
        Self::from_steps(self.steps.iter().chain(&other.steps).cloned().collect())
    }
}

/// One step of the JSON program format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    pub t: String,
}

impl From<FlowStep> for StepJson {
    fn from(s: FlowStep) -> Self {
        let (f, g) = match &s.kind {
            FlowKind::ShearFXi(p) => (Some(p.to_text("x")), None),
            FlowKind::ShearGTheta(p) => (None, Some(p.to_text("y"))),
            _ => (None, None),
        };
        StepJson {
            kind: s.kind.name().to_string(),
            f,
            g,
            t: format_complex(s.t),
        }
    }
}

impl TryFrom<StepJson> for FlowStep {
    type Error = FlowError;

    fn try_from(j: StepJson) -> Result<Self, FlowError> {
        let t =
            parse_complex(&j.t).ok_or_else(|| FlowError::Parse(format!("bad time '{}'", j.t)))?;
        let kind = match (j.kind.to_ascii_uppercase().as_str(), j.f, j.g) {
            ("SHEAR_F_XI", Some(f), None) => FlowKind::ShearFXi(ShearPoly::parse(&f, "x")?),
            ("SHEAR_G_THETA", None, Some(g)) => FlowKind::ShearGTheta(ShearPoly::parse(&g, "y")?),
            (name, None, None) => FlowKind::simple(name)?,
            (name, _, _) => {
                return Err(FlowError::Parse(format!(
                    "{name}: 'f' goes with SHEAR_F_XI and 'g' with SHEAR_G_THETA"
                )))
            }
        };
        Ok(FlowStep { kind, t })
    }
}

impl From<FlowProgram> for Vec<StepJson> {
    fn from(p: FlowProgram) -> Self {
        p.steps.into_iter().map(StepJson::from).collect()
    }
}

impl TryFrom<Vec<StepJson>> for FlowProgram {
    type Error = FlowError;

    fn try_from(v: Vec<StepJson>) -> Result<Self, FlowError> {
        Ok(Self::from_steps(
            v.into_iter()
                .map(FlowStep::try_from)
                .collect::<Result<_, _>>()?,
        ))
    }
}

impl FromStr for FlowKind {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, FlowError> {
        Self::simple(s)
    }
}
