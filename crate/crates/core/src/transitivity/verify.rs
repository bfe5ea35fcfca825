use serde::{Deserialize, Serialize};

use super::{MoveCertificate, MoveRequest};
use crate::algebra::GaussRational;
use crate::fields::Point;
use crate::flows::{flow_exact_point, FlowProgram};

/// Bound on `|xy - z^2| / max(1, |p|^2)` along every trajectory.
pub const RELATION_BOUND: f64 = 1e-10;
/// Bound on the relative displacement of points a stage must fix.
pub const FIXING_BOUND: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub max_relation_defect: f64,
    pub max_fixed_displacement: f64,
    /// Fixed-point checks redone in exact Q(i) arithmetic.
    pub exact_fixing_checks: usize,
    pub exact_fixing_failures: usize,
    pub pass: bool,
}

fn relative_defect(p: &Point) -> f64 {
    p.relation_defect() / p.norm().powi(2).max(1.0)
}

/// Whether every step maps `p` to itself in exact arithmetic.
fn fixed_exactly(program: &FlowProgram, p: &Point) -> bool {
    let Some(start) = p
        .coords()
        .iter()
        .map(|&c| GaussRational::from_complex(c))
        .collect::<Option<Vec<_>>>()
    else {
        return false;
    };
    let mut cur = start.clone();
    for step in &program.steps {
        let Some(t) = GaussRational::from_complex(step.t) else {
            return false;
        };
        match flow_exact_point(&step.kind, &t, &cur) {
            Ok(next) => cur = next,
            Err(_) => return false,
        }
        if cur != start {
            return false;
        }
    }
    true
}

/// Runs `program` on every tracked point; `moving` names the one point the
/// program may move. Returns `false` if some flow fails.
fn advance(
    program: &FlowProgram,
    cur: &mut [Option<Point>],
    moving: Option<usize>,
    report: &mut VerifyReport,
) -> bool {
    let mut ok = true;
    for (j, slot) in cur.iter_mut().enumerate() {
        let Some(p) = slot.take() else { continue };
        let Ok(trace) = program.trace(&p) else {
            ok = false;
            continue;
        };
        for q in &trace {
            report.max_relation_defect = report.max_relation_defect.max(relative_defect(q));
        }
        if moving.is_some() && moving != Some(j) {
            let scale = p.norm().max(1.0);
            for q in &trace {
                report.max_fixed_displacement =
                    report.max_fixed_displacement.max(q.distance(&p) / scale);
            }
            report.exact_fixing_checks += 1;
            if !fixed_exactly(program, &p) {
                report.exact_fixing_failures += 1;
            }
        }
        *slot = trace.last().cloned();
    }
    ok
}

/// Re-runs the whole certificate from the request alone.
pub fn verify_certificate(cert: &MoveCertificate, req: &MoveRequest) -> VerifyReport {
    let mut report = VerifyReport {
        residuals: vec![f64::INFINITY; req.len()],
        max_residual: f64::INFINITY,
        tolerance: req.tolerance,
        max_relation_defect: 0.0,
        max_fixed_displacement: 0.0,
        exact_fixing_checks: 0,
        exact_fixing_failures: 0,
        pass: false,
    };
    let mut failed = false;
    let mut cur: Vec<Option<Point>> = req.sources.iter().cloned().map(Some).collect();

    failed |= !advance(&cert.pre_conjugation, &mut cur, None, &mut report);
    for stage in &cert.stages {
        if stage.index >= req.len() {
            failed = true;
            continue;
        }
        failed |= !advance(&stage.program, &mut cur, Some(stage.index), &mut report);
    }
    failed |= !advance(&cert.post_conjugation, &mut cur, None, &mut report);

    for (i, (p, q)) in cur.iter().zip(&req.targets).enumerate() {
        if let Some(p) = p {
            report.residuals[i] = p.distance(q);
        }
    }
    report.max_residual = report.residuals.iter().cloned().fold(0.0, f64::max);
    report.pass = !failed
        && report.residuals.iter().all(|r| *r <= req.tolerance)
        && report.max_relation_defect <= RELATION_BOUND
        && report.max_fixed_displacement <= FIXING_BOUND
        && report.exact_fixing_failures == 0;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CoordinateRing;
    use crate::transitivity::plan_multi;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(c: &[f64]) -> Point {
        Point::real(&CoordinateRing::quadric(), c).unwrap()
    }

    fn request() -> MoveRequest {
        MoveRequest::new(
            vec![
                pt(&[1.0, 1.0, 1.0]),
                pt(&[4.0, 1.0, -2.0]),
                pt(&[2.0, 8.0, 4.0]),
            ],
            vec![
                pt(&[1.0, 4.0, 2.0]),
                pt(&[9.0, 1.0, 3.0]),
                pt(&[0.5, 2.0, -1.0]),
            ],
            1e-8,
        )
        .unwrap()
    }

    #[test]
    fn planned_certificates_verify() {
        let req = request();
        let cert = plan_multi(&req, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let r = verify_certificate(&cert, &req);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.exact_fixing_checks, 6);
        assert_eq!(r.max_fixed_displacement, 0.0);
    }

    #[test]
    fn perturbed_time_is_flagged() {
        let req = request();
        let mut cert = plan_multi(&req, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        cert.stages[1].program.steps[0].t += Complex64::new(0.1, 0.0);
        let r = verify_certificate(&cert, &req);
        assert!(!r.pass);
        assert!(r.max_residual > req.tolerance);
    }

    #[test]
    fn empty_certificate_on_identical_points() {
        let p = pt(&[1.0, 1.0, 1.0]);
        let req = MoveRequest::new(vec![p.clone()], vec![p], 1e-8).unwrap();
        let cert = MoveCertificate {
            pre_conjugation: FlowProgram::new(),
            stages: Vec::new(),
            post_conjugation: FlowProgram::new(),
            residuals: vec![0.0],
            seed: None,
            genericity_retries: 0,
            routed: false,
        };
        let r = verify_certificate(&cert, &req);
        assert!(r.pass);
        assert_eq!(r.residuals, vec![0.0]);
    }
}
