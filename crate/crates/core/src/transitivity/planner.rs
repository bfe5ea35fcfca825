use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use super::{coincide, MoveCertificate, MoveRequest, Stage, TransitivityError, COINCIDENCE};
use crate::algebra::CoordinateRing;
use crate::fields::{format_complex, Point};
use crate::flows::{flow, FlowKind, FlowProgram, ShearPoly};

pub const GENERICIZE_RETRIES: usize = 64;

/// Relative margin kept from `S = {x = 0} u {y = 0}` and between fiber coordinates.
const MARGIN: f64 = 1e-3;

/// Candidate intermediate heights tried per move.
const CANDIDATES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Genericized {
    pub program: FlowProgram,
    pub images: Vec<Point>,
    pub retries: usize,
}

fn scale_of(points: &[Point]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.coords().iter().map(|c| c.norm()))
        .fold(1.0, f64::max)
}

/// Describes the first violation of generic position, if any.
fn genericity_defect(points: &[Point], margin: f64) -> Option<String> {
    for (i, p) in points.iter().enumerate() {
        let c = p.coords();
        if c[0].norm() < margin || c[1].norm() < margin {
            return Some(format!("point {i} is within {margin:e} of S"));
        }
        for (j, q) in points.iter().enumerate().take(i) {
            let d = q.coords();
            if (c[0] - d[0]).norm() < margin {
                return Some(format!(
                    "points {j} and {i} share x = {}",
                    format_complex(c[0])
                ));
            }
            if (c[1] - d[1]).norm() < margin {
                return Some(format!(
                    "points {j} and {i} share y = {}",
                    format_complex(c[1])
                ));
            }
        }
    }
    None
}

fn annulus<R: Rng + ?Sized>(rng: &mut R, inner: f64, outer: f64) -> Complex64 {
    Complex64::from_polar(rng.random_range(inner..=outer), rng.random_range(0.0..TAU))
}

/// Flows of `Theta` then `Xi` with random times in `0.1 <= |t| <= 1` until
/// all images have distinct nonzero `x` and distinct nonzero `y`.
pub fn genericize<R: Rng + ?Sized>(
    points: &[Point],
    rng: &mut R,
) -> Result<Genericized, TransitivityError> {
    for (i, p) in points.iter().enumerate() {
        if p.norm() <= COINCIDENCE {
            return Err(TransitivityError::Precondition(format!(
                "point {i} is the singular point"
            )));
        }
    }
    if genericity_defect(points, MARGIN * scale_of(points)).is_none() {
        return Ok(Genericized {
            program: FlowProgram::new(),
            images: points.to_vec(),
            retries: 0,
        });
    }
    let mut detail = String::new();
    for attempt in 1..=GENERICIZE_RETRIES {
        let mut program = FlowProgram::new();
        program.push(FlowKind::Theta, annulus(rng, 0.1, 1.0));
        program.push(FlowKind::Xi, annulus(rng, 0.1, 1.0));
        let images = points
            .iter()
            .map(|p| program.run(p))
            .collect::<Result<Vec<_>, _>>()?;
        match genericity_defect(&images, MARGIN * scale_of(&images)) {
            None => {
                return Ok(Genericized {
                    program,
                    images,
                    retries: attempt,
                })
            }
            Some(d) => detail = d,
        }
    }
    Err(TransitivityError::Genericity {
        retries: GENERICIZE_RETRIES,
        detail,
    })
}

fn check_distinct_fibers(fixed: &[Point], p: &Point, role: &str) -> Result<(), TransitivityError> {
    let scale = scale_of(fixed).max(scale_of(std::slice::from_ref(p)));
    let tol = COINCIDENCE * scale;
    let c = p.coords();
    if c[0].norm() <= tol || c[1].norm() <= tol {
        return Err(TransitivityError::Precondition(format!("{role} lies on S")));
    }
    for (j, q) in fixed.iter().enumerate() {
        let d = q.coords();
        if (c[0] - d[0]).norm() <= tol {
            return Err(TransitivityError::Precondition(format!(
                "{role} shares its x-coordinate with fixed point {j}"
            )));
        }
        if (c[1] - d[1]).norm() <= tol {
            return Err(TransitivityError::Precondition(format!(
                "{role} shares its y-coordinate with fixed point {j}"
            )));
        }
    }
    Ok(())
}

/// Three shears moving `p` to `q` along the fibers `x = x_p`, `y = y_1`,
/// `x = x_q`; every coefficient vanishes on the fibers of the fixed points,
/// which therefore stay exactly where they are.
pub fn plan_single_move<R: Rng + ?Sized>(
    fixed: &[Point],
    p: &Point,
    q: &Point,
    rng: &mut R,
) -> Result<FlowProgram, TransitivityError> {
    if coincide(p, q) {
        return Ok(FlowProgram::new());
    }
    for (j, f) in fixed.iter().enumerate() {
        check_distinct_fibers(&fixed[..j], f, &format!("fixed point {j}"))?;
    }
    check_distinct_fibers(fixed, p, "source")?;
    check_distinct_fibers(fixed, q, "target")?;
    let fixed_x: Vec<Complex64> = fixed.iter().map(|f| f.coords()[0]).collect();
    let fixed_y: Vec<Complex64> = fixed.iter().map(|f| f.coords()[1]).collect();
    let (xp, zp) = (p.coords()[0], p.coords()[2]);
    let (xq, zq) = (q.coords()[0], q.coords()[2]);

    // intermediate height z1 on the fiber x = xp, kept away from z = 0 and
    // from heights whose y = z1^2/xp meets a fixed fiber
    let reach = zp.norm().max(zq.norm()).max(1.0);
    let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
    for _ in 0..CANDIDATES {
        let z1 = zp + annulus(rng, 0.5 * reach, reach);
        let y1 = z1 * z1 / xp;
        let clearance = fixed_y
            .iter()
            .map(|y| (y1 - y).norm())
            .fold(y1.norm().min(z1.norm()), f64::min);
        if clearance > best.0 {
            best = (clearance, z1);
        }
    }
    let z1 = best.1;

    let mut program = FlowProgram::new();
    let mut cur = p.clone();

    let f1 = ShearPoly::lagrange(&fixed_x, xp, Complex64::new(1.0, 0.0));
    let c = cur.coords();
    let t1 = (z1 - c[2]) / (f1.eval(c[0]) * c[0]);
    let k1 = FlowKind::ShearFXi(f1);
    cur = flow(&k1, t1, &cur)?;
    program.push(k1, t1);

    let c = cur.coords().to_vec();
    let root = (xq * c[1]).sqrt();
    let z2 = if (root - zq).norm() <= (-root - zq).norm() {
        root
    } else {
        -root
    };
    let g = ShearPoly::lagrange(&fixed_y, c[1], Complex64::new(1.0, 0.0));
    let t2 = (z2 - c[2]) / (g.eval(c[1]) * c[1]);
    let k2 = FlowKind::ShearGTheta(g);
    cur = flow(&k2, t2, &cur)?;
    program.push(k2, t2);

    let c = cur.coords();
    let f3 = ShearPoly::lagrange(&fixed_x, xq, Complex64::new(1.0, 0.0));
    let t3 = (zq - c[2]) / (f3.eval(c[0]) * c[0]);
    program.push(FlowKind::ShearFXi(f3), t3);
    Ok(program)
}

fn random_regular_point<R: Rng + ?Sized>(rng: &mut R) -> Point {
    let x = annulus(rng, 0.5, 1.5);
    let z = annulus(rng, 0.5, 1.5);
    Point::unchecked(&CoordinateRing::quadric(), vec![x, z * z / x, z])
}

/// Conjugated sequence of single moves. Points already at their targets
/// stay fixed throughout; if a source sits on another point's target, all
/// moving points are first routed through random intermediate points.
pub fn plan_multi<R: Rng + ?Sized>(
    req: &MoveRequest,
    rng: &mut R,
) -> Result<MoveCertificate, TransitivityError> {
    let m = req.len();
    let moving: Vec<usize> = (0..m)
        .filter(|&i| !coincide(&req.sources[i], &req.targets[i]))
        .collect();
    let routed = moving.iter().any(|&i| {
        moving
            .iter()
            .any(|&j| j != i && coincide(&req.sources[i], &req.targets[j]))
    });

    // goals[pass][i]: where point i must be after the pass
    let mut goals: Vec<Vec<Point>> = Vec::new();
    if routed {
        let mut mids = req.sources.clone();
        for &i in &moving {
            mids[i] = loop {
                let r = random_regular_point(rng);
                let clash = req
                    .sources
                    .iter()
                    .chain(&req.targets)
                    .chain(&mids)
                    .any(|p| coincide(p, &r));
                if !clash {
                    break r;
                }
            };
        }
        goals.push(mids);
    }
    goals.push(req.targets.clone());

    let mut unique: Vec<Point> = Vec::new();
    let slot = |p: &Point, unique: &mut Vec<Point>| -> usize {
        match unique.iter().position(|u| coincide(u, p)) {
            Some(k) => k,
            None => {
                unique.push(p.clone());
                unique.len() - 1
            }
        }
    };
    let source_slots: Vec<usize> = req.sources.iter().map(|p| slot(p, &mut unique)).collect();
    let goal_slots: Vec<Vec<usize>> = goals
        .iter()
        .map(|g| g.iter().map(|p| slot(p, &mut unique)).collect())
        .collect();

    let generic = genericize(&unique, rng)?;
    let mut cur: Vec<Point> = source_slots
        .iter()
        .map(|&k| generic.images[k].clone())
        .collect();
    let mut stages = Vec::new();
    for slots in &goal_slots {
        for &i in &moving {
            let fixed: Vec<Point> = (0..m).filter(|&j| j != i).map(|j| cur[j].clone()).collect();
            let goal = &generic.images[slots[i]];
            let program = plan_single_move(&fixed, &cur[i], goal, rng)?;
            for c in cur.iter_mut() {
                *c = program.run(c)?;
            }
            stages.push(Stage { index: i, program });
        }
    }

    let mut cert = MoveCertificate {
        post_conjugation: generic.program.inverse(),
        pre_conjugation: generic.program,
        stages,
        residuals: Vec::new(),
        seed: None,
        genericity_retries: generic.retries,
        routed,
    };
    let full = cert.program();
    for (i, (p, q)) in req.sources.iter().zip(&req.targets).enumerate() {
        let residual = full.run(p)?.distance(q);
        if residual.is_nan() || residual > req.tolerance {
            return Err(TransitivityError::Residual { index: i, residual });
        }
        cert.residuals.push(residual);
    }
    Ok(cert)
}
