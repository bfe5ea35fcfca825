//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria 1 and 9 cannot hold as written: some published identities and
//! the nonzero divergence of `zH` are false. They are run in full and print
//! FAIL; the process exits nonzero only if an attainable criterion fails or
//! an unattainable one fails differently from the documented way.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use liegen_core::algebra::{CoordinateRing, Polynomial, Rational, Variety};
use liegen_core::bracket::ledger::{verify_ledger, Form};
use liegen_core::bracket::{closure, decompose_in_frame, recombine, vectorize, ClosureBasis};
use liegen_core::fields::{
    catalog, euler_field, evaluate, generator, omega_divergence, omega_divergence_y_chart, Point,
    VectorField,
};
use liegen_core::flows::{
    flow, log_log_slope, preserves_relation, pullback_check, trotter_bracket_flow, FlowKind,
    ShearPoly,
};
use liegen_core::transitivity::{
    lemma_approx_field, plan_multi, sample_ball, verify_certificate, Ball, MoveRequest,
    TransitivityError,
};

struct Outcome {
    pass: bool,
    detail: String,
    /// What went wrong, compared against the documented failures.
    signature: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
            signature: Vec::new(),
        }
    }
}

struct Criterion {
    number: u32,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
    /// Signature of the documented failure, for criteria that fail as written.
    known_failure: Option<&'static [&'static str]>,
}

fn one() -> Rational {
    Rational::one()
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn generators(variety: Variety, names: &[&str]) -> Vec<(String, VectorField)> {
    let c = catalog(variety);
    names
        .iter()
        .map(|n| (n.to_string(), c[*n].clone()))
        .collect()
}

/// Checks that `target` is a member with a certificate that re-evaluates exactly.
fn certified(cb: &ClosureBasis, target: &VectorField) -> bool {
    match cb.member(target) {
        Ok(Some(cert)) => cert
            .evaluate(cb.generators())
            .map(|v| &v == target)
            .unwrap_or(false),
        _ => false,
    }
}

/// `m * F` for every normal monomial `m` of degree `<= d` and every frame field `F`.
fn monomial_targets(variety: Variety, frame: &[&str], d: u32) -> Vec<(String, VectorField)> {
    let ring = variety.ring();
    let c = catalog(variety);
    let mut out = Vec::new();
    for m in ring.normal_monomials(d) {
        let p = Polynomial::monomial(&ring, m, one());
        for f in frame {
            out.push((
                format!("{} * {f}", p.to_text()),
                c[*f].mul_poly(&p).unwrap(),
            ));
        }
    }
    out
}

/// Groups whose published forms do not hold; their corrected forms do.
const LEDGER_FAILURES: &[&str] = &[
    "stated: all coefficients: powers of z",
    "stated: monomials in front of H",
    "stated: moving H coefficients to V",
];

fn identity_ledger() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut failing_groups = BTreeSet::new();
    for v in [Variety::Quadric, Variety::Sl2] {
        let r = match verify_ledger(v) {
            Ok(r) => r,
            Err(e) => return Outcome::new(false, format!("{}: {e}", v.name())),
        };
        let (sp, st) = r.count(Form::Stated);
        let (cp, ct) = r.count(Form::Corrected);
        parts.push(format!(
            "{} stated {sp}/{st}, corrected {cp}/{ct}",
            v.name()
        ));
        pass &= sp == st && cp == ct;
        for f in r.failures() {
            let form = if f.form == Form::Stated {
                "stated"
            } else {
                "corrected"
            };
            failing_groups.insert(format!("{form}: {}", f.group));
        }
    }
    let signature: Vec<String> = failing_groups.into_iter().collect();
    let mut detail = parts.join("; ");
    if !signature.is_empty() {
        detail.push_str(&format!("; failing groups {signature:?}"));
    }
    Outcome {
        pass,
        detail,
        signature,
    }
}

fn sl2_closure() -> Outcome {
    let cb = closure(&generators(Variety::Sl2, &["V", "W", "BCW", "DW"]), 4, 2).unwrap();
    let verified = cb.verify_certificates();
    let targets = monomial_targets(Variety::Sl2, &["V", "W", "H"], 4);
    let missing: Vec<&str> = targets
        .iter()
        .filter(|(_, t)| !certified(&cb, t))
        .map(|(n, _)| n.as_str())
        .collect();
    Outcome::new(
        verified.is_ok() && missing.is_empty(),
        format!(
            "basis {} ({} certificates re-evaluated), {}/{} targets certified{}",
            cb.len(),
            verified.as_ref().map_or(0, |n| *n),
            targets.len() - missing.len(),
            targets.len(),
            if missing.is_empty() {
                String::new()
            } else {
                format!(", missing {:?}", &missing[..missing.len().min(5)])
            }
        ),
    )
}

fn quadric_closure() -> Outcome {
    let frame_names = ["XI", "THETA", "H"];
    let cb = closure(
        &generators(Variety::Quadric, &["XI", "THETA", "Z_XI", "Z_H"]),
        4,
        2,
    )
    .unwrap();
    let verified = cb.verify_certificates().is_ok();
    let targets = monomial_targets(Variety::Quadric, &frame_names, 4);
    let missing = targets.iter().filter(|(_, t)| !certified(&cb, t)).count();

    let c = catalog(Variety::Quadric);
    let frame: Vec<VectorField> = frame_names.iter().map(|n| c[*n].clone()).collect();
    let outside = cb
        .basis()
        .iter()
        .filter(|b| {
            let d = b.field.degree().saturating_sub(1);
            match decompose_in_frame(&b.field, &frame, d) {
                Ok(Some(coeffs)) => {
                    coeffs.iter().any(|p| p.degree() > d)
                        || recombine(&coeffs, &frame).ok().as_ref() != Some(&b.field)
                }
                _ => true,
            }
        })
        .count();

    let lemma = closure(
        &generators(Variety::Quadric, &["XI", "THETA", "X_XI"]),
        5,
        2,
    )
    .unwrap();
    let ring = Variety::Quadric.ring();
    let mut lemma_targets = vec![c["H"].clone()];
    for k in 0..=5 {
        lemma_targets.push(c["XI"].mul_poly(&Polynomial::var(&ring, 0).pow(k)).unwrap());
        lemma_targets.push(
            c["THETA"]
                .mul_poly(&Polynomial::var(&ring, 1).pow(k))
                .unwrap(),
        );
    }
    let lemma_missing = lemma_targets
        .iter()
        .filter(|t| !certified(&lemma, t))
        .count();

    Outcome::new(
        verified && missing == 0 && outside == 0 && lemma_missing == 0,
        format!(
            "basis {}: {}/{} targets certified, {} basis elements outside the frame span; \
             Xi, Theta, xXi closure: {}/{} of H, x^k Xi, y^k Theta certified",
            cb.len(),
            targets.len() - missing,
            targets.len(),
            outside,
            lemma_targets.len() - lemma_missing,
            lemma_targets.len()
        ),
    )
}

/// Whether `A u = b` has a solution, by exact elimination on the augmented matrix.
fn consistent(columns: &[BTreeMap<String, Rational>], b: &BTreeMap<String, Rational>) -> bool {
    let keys: BTreeSet<&String> = columns
        .iter()
        .flat_map(|c| c.keys())
        .chain(b.keys())
        .collect();
    let n = columns.len();
    let mut rows: Vec<Vec<Rational>> = keys
        .iter()
        .map(|k| {
            let mut row: Vec<Rational> = columns
                .iter()
                .map(|c| c.get(*k).cloned().unwrap_or_else(Rational::zero))
                .collect();
            row.push(b.get(*k).cloned().unwrap_or_else(Rational::zero));
            row
        })
        .collect();
    let mut r = 0;
    for col in 0..=n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        if col == n {
            // a pivot in the right-hand side column
            return false;
        }
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        let lead: Vec<Rational> = rows[r].iter().map(|v| v / &pivot).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, l) in row.iter_mut().zip(&lead) {
                    *x -= &f * l;
                }
            }
        }
        rows[r] = lead;
        r += 1;
    }
    true
}

fn keyed(f: &VectorField) -> BTreeMap<String, Rational> {
    vectorize(f)
        .into_iter()
        .map(|(k, v)| (format!("{k:?}"), v))
        .collect()
}

fn euler_exclusion() -> Outcome {
    let ring = Variety::Quadric.ring();
    let c = catalog(Variety::Quadric);
    let frame: Vec<VectorField> = ["XI", "THETA", "H"].iter().map(|n| c[*n].clone()).collect();
    let columns: Vec<BTreeMap<String, Rational>> = ring
        .normal_monomials(6)
        .into_iter()
        .flat_map(|m| {
            let p = Polynomial::monomial(&ring, m, one());
            frame.iter().map(move |f| keyed(&f.mul_poly(&p).unwrap()))
        })
        .collect();
    let e = euler_field();
    // a module element the solver must find
    let control = c["XI"]
        .mul_poly(&Polynomial::var(&ring, 0))
        .unwrap()
        .checked_add(&c["H"].mul_poly(&Polynomial::var(&ring, 2).pow(3)).unwrap())
        .unwrap();
    let oracle_absent = !consistent(&columns, &keyed(&e));
    let control_found = consistent(&columns, &keyed(&control));
    let engine_absent = matches!(decompose_in_frame(&e, &frame, 6), Ok(None));
    Outcome::new(
        e.is_tangent() && oracle_absent && control_found && engine_absent,
        format!(
            "tangent {}, independent solve over {} unknowns: E {}, control xXi + z^3 H {}; frame decomposition agrees: {}",
            e.is_tangent(),
            columns.len(),
            if oracle_absent { "absent" } else { "PRESENT" },
            if control_found { "found" } else { "NOT FOUND" },
            engine_absent
        ),
    )
}

fn random_point(variety: Variety, rng: &mut ChaCha8Rng) -> Point {
    let mut c =
        |r: f64| Complex64::from_polar(rng.random_range(0.0..r), rng.random_range(0.0..TAU));
    match variety {
        Variety::Quadric => {
            let x = Complex64::from_polar(0.5, 0.0) + c(1.5);
            let z = c(1.5);
            Point::new(&CoordinateRing::quadric(), vec![x, z * z / x, z]).unwrap()
        }
        Variety::Sl2 => {
            let a = Complex64::new(0.75, 0.0) + c(0.5);
            let (b, cc) = (c(1.5), c(1.5));
            Point::new(&CoordinateRing::sl2(), vec![a, b, cc, (1.0 + b * cc) / a]).unwrap()
        }
    }
}

fn flow_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_group: f64 = 0.0;
    let mut worst_relation: f64 = 0.0;
    let mut worst_derivative: f64 = 0.0;
    let mut escapes = 0usize;
    for name in FlowKind::SIMPLE_NAMES {
        let kind = FlowKind::simple(name).unwrap();
        let field = generator(kind.variety(), kind.field_name().unwrap()).unwrap();
        for _ in 0..100 {
            let p = random_point(kind.variety(), &mut rng);
            let (s, t) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (s, t) = (Complex64::new(s, 0.0), Complex64::new(t, 0.0));
            match (
                flow(&kind, s + t, &p),
                flow(&kind, t, &p).and_then(|q| flow(&kind, s, &q)),
            ) {
                (Ok(a), Ok(b)) => worst_group = worst_group.max(a.distance(&b) / a.norm().max(1.0)),
                _ if !kind.is_complete() => escapes += 1,
                _ => worst_group = f64::INFINITY,
            }
            let t2 = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
            match flow(&kind, t2, &p) {
                Ok(q) => {
                    worst_relation =
                        worst_relation.max(q.relation_defect() / p.norm().powi(2).max(1.0))
                }
                Err(_) if !kind.is_complete() => escapes += 1,
                Err(_) => worst_relation = f64::INFINITY,
            }
            let h = 1e-5;
            let fwd = flow(&kind, Complex64::new(h, 0.0), &p).unwrap();
            let back = flow(&kind, Complex64::new(-h, 0.0), &p).unwrap();
            let v = evaluate(&field, &p).unwrap();
            for ((f, b), vi) in fwd.coords().iter().zip(back.coords()).zip(&v) {
                let d = (f - b) / (2.0 * h);
                worst_derivative = worst_derivative.max((d - vi).norm() / vi.norm().max(1.0));
            }
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let polynomial_kinds = [
        FlowKind::Theta,
        FlowKind::Xi,
        FlowKind::XXi,
        FlowKind::ShearFXi(ShearPoly::new(
            Complex64::new(3.0, 0.0),
            vec![one, -one, 2.0 * one],
        )),
        FlowKind::ShearGTheta(ShearPoly::new(
            Complex64::new(-0.5, 0.0),
            vec![one, one, 0.0 * one],
        )),
        FlowKind::VSl2,
        FlowKind::WSl2,
    ];
    let symbolic_ok = polynomial_kinds
        .iter()
        .all(|k| preserves_relation(k) == Ok(true));
    let times = [
        int(0),
        int(1),
        int(2),
        int(-1),
        Rational::new(1.into(), 2.into()),
    ];
    let pullback_ok = times
        .iter()
        .all(|t| matches!(pullback_check(t), Ok((a, b)) if a == b));
    Outcome::new(
        worst_group <= 1e-10 && worst_relation <= 1e-10 && worst_derivative <= 1e-6 && symbolic_ok && pullback_ok,
        format!(
            "group law {worst_group:.1e}, relation {worst_relation:.1e}, derivative {worst_derivative:.1e} \
             ({escapes} D_H escapes skipped); symbolic relation preserved by {} polynomial kinds: {symbolic_ok}; \
             pullback Xi - tH - t^2 Theta exact for t in {{0, 1, 2, -1, 1/2}}: {pullback_ok}",
            polynomial_kinds.len()
        ),
    )
}

fn trotter() -> Outcome {
    let p = Point::real(&CoordinateRing::quadric(), &[1.0, 1.0, 1.0]).unwrap();
    let ns = [4usize, 16, 64, 256];
    let total = 0.1;
    let errors: Vec<f64> = ns
        .iter()
        .map(|&n| {
            trotter_bracket_flow(&FlowKind::Theta, &FlowKind::Xi, total, n, &p)
                .unwrap()
                .error
        })
        .collect();
    // error(4n) / error(n) = 2^-alpha, i.e. the slope against s = sqrt(T / n)
    let steps: Vec<f64> = ns.iter().map(|&n| (total / n as f64).sqrt()).collect();
    let alpha = log_log_slope(&steps, &errors);
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    Outcome::new(
        decreasing && alpha >= 0.9,
        format!(
            "errors {:?}, order {alpha:.3} (needs >= 0.9)",
            errors
                .iter()
                .map(|e| format!("{e:.4e}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn transitivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut verified, mut genericity, mut wrong) = (0, 0, 0);
    let (mut worst_residual, mut worst_relation, mut worst_fixed): (f64, f64, f64) =
        (0.0, 0.0, 0.0);
    let mut exact_checks = 0;
    for _ in 0..100 {
        let pts: Vec<Point> = (0..10)
            .map(|_| random_point(Variety::Quadric, &mut rng))
            .collect();
        let req = MoveRequest::new(pts[..5].to_vec(), pts[5..].to_vec(), 1e-8).unwrap();
        match plan_multi(&req, &mut rng) {
            Ok(cert) => {
                let r = verify_certificate(&cert, &req);
                worst_residual = worst_residual.max(r.max_residual);
                worst_relation = worst_relation.max(r.max_relation_defect);
                worst_fixed = worst_fixed.max(r.max_fixed_displacement);
                exact_checks += r.exact_fixing_checks;
                if r.pass {
                    verified += 1;
                } else {
                    wrong += 1;
                }
            }
            Err(TransitivityError::Genericity { .. }) => genericity += 1,
            Err(_) => wrong += 1,
        }
    }
    Outcome::new(
        verified >= 99 && wrong == 0,
        format!(
            "{verified}/100 verified, {genericity} genericity failures, {wrong} other failures; \
             residual {worst_residual:.1e}, relation {worst_relation:.1e}, fixed-point drift {worst_fixed:.1e}, \
             {exact_checks} exact fixing checks"
        ),
    )
}

fn lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (radius, delta) = (0.05, 1e-3);
    let mut met = 0;
    let mut powers = Vec::new();
    let mut failures = Vec::new();
    for case in 0..20 {
        let m = rng.random_range(1..=4);
        let mut centers: Vec<Point> = Vec::new();
        while centers.len() < m {
            let p = random_point(Variety::Quadric, &mut rng);
            let c = p.coords();
            let separated = centers.iter().all(|q| {
                (q.coords()[0] - c[0]).norm() >= 0.5 && (q.coords()[1] - c[1]).norm() >= 0.5
            });
            if c[2].norm() >= 0.5 && c[1].norm() >= 0.5 && separated {
                centers.push(p);
            }
        }
        let last = centers.last().unwrap().clone();
        let xi = evaluate(&generator(Variety::Quadric, "XI").unwrap(), &last).unwrap();
        let theta = evaluate(&generator(Variety::Quadric, "THETA").unwrap(), &last).unwrap();
        let (a, b) = (
            Complex64::from_polar(1.0, rng.random_range(0.0..TAU)),
            Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..TAU)),
        );
        let raw: Vec<Complex64> = (0..3).map(|i| a * xi[i] + b * theta[i]).collect();
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let v0: Vec<Complex64> = raw.iter().map(|c| c * (2.0 * delta / norm)).collect();
        let balls: Vec<Ball> = centers
            .into_iter()
            .map(|center| Ball { center, radius })
            .collect();
        match lemma_approx_field(&balls, &v0, delta, &mut rng) {
            Ok(field) => {
                // re-check on fresh samples
                let others = balls[..m - 1]
                    .iter()
                    .flat_map(|b| sample_ball(b, 200, &mut rng))
                    .map(|p| {
                        field
                            .eval(&p)
                            .iter()
                            .map(|c| c.norm_sqr())
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(0.0, f64::max);
                let near = sample_ball(&balls[m - 1], 200, &mut rng)
                    .iter()
                    .map(|p| {
                        let v = field.eval(p);
                        (0..3)
                            .map(|i| (v[i] - v0[i]).norm_sqr())
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(0.0, f64::max);
                if others < delta && near < delta {
                    met += 1;
                    powers.push(field.power);
                } else {
                    failures.push(format!(
                        "case {case}: fresh samples {others:.1e}, {near:.1e}"
                    ));
                }
            }
            Err(e) => failures.push(format!("case {case} (m = {m}): {e}")),
        }
    }
    Outcome::new(
        met == 20,
        format!(
            "{met}/20 configurations meet both bounds on fresh samples, powers {powers:?}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {failures:?}")
            }
        ),
    )
}

fn divergence() -> Outcome {
    let c = catalog(Variety::Quadric);
    let div = |n: &str| omega_divergence(&c[n]).unwrap();
    let zero: Vec<&str> = ["XI", "THETA", "X_XI"]
        .into_iter()
        .filter(|n| div(n).is_zero())
        .collect();
    let charts_agree = ["XI", "THETA", "X_XI", "Z_H"]
        .iter()
        .all(|n| div(n).is_zero() == omega_divergence_y_chart(&c[*n]).unwrap().is_zero());
    let zh = div("Z_H");
    let mut signature = Vec::new();
    if zero.len() != 3 {
        signature.push("an LND has nonzero divergence".to_string());
    }
    if zh.is_zero() {
        signature.push("Z_H divergence is zero".to_string());
    }
    if !charts_agree {
        signature.push("charts disagree".to_string());
    }
    Outcome {
        pass: signature.is_empty(),
        detail: format!(
            "zero for {zero:?}; Z_H divergence = {}; charts agree: {charts_agree}",
            if zh.is_zero() {
                "0".to_string()
            } else {
                zh.to_text()
            }
        ),
        signature,
    }
}

/// `div(zH) = z div(H) + H(z) = 0`, so `zH` preserves the form too.
const DIVERGENCE_FAILURES: &[&str] = &["Z_H divergence is zero"];

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            number: 1,
            title: "identity ledger",
            limit: Duration::from_secs(10),
            run: identity_ledger,
            known_failure: Some(LEDGER_FAILURES),
        },
        Criterion {
            number: 2,
            title: "SL2 closure at D=4",
            limit: Duration::from_secs(300),
            run: sl2_closure,
            known_failure: None,
        },
        Criterion {
            number: 3,
            title: "quadric closure at D=4 and the Xi, Theta, xXi lemma",
            limit: Duration::from_secs(300),
            run: quadric_closure,
            known_failure: None,
        },
        Criterion {
            number: 4,
            title: "Euler field outside the frame module",
            limit: Duration::from_secs(300),
            run: euler_exclusion,
            known_failure: None,
        },
        Criterion {
            number: 5,
            title: "flow suite",
            limit: Duration::from_secs(30),
            run: flow_suite,
            known_failure: None,
        },
        Criterion {
            number: 6,
            title: "commutator splitting",
            limit: Duration::from_secs(5),
            run: trotter,
            known_failure: None,
        },
        Criterion {
            number: 7,
            title: "infinite transitivity, m = 5",
            limit: Duration::from_secs(60),
            run: transitivity,
            known_failure: None,
        },
        Criterion {
            number: 8,
            title: "approximation lemma",
            limit: Duration::from_secs(30),
            run: lemma,
            known_failure: None,
        },
        Criterion {
            number: 9,
            title: "volume-form divergence",
            limit: Duration::from_secs(1),
            run: divergence,
            known_failure: Some(DIVERGENCE_FAILURES),
        },
    ];
    let mut unexpected = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = outcome.pass && in_time;
        let status = if pass { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{status} criterion {}: {} [{:.2}s, limit {}s] {}",
            c.number,
            c.title,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            outcome.detail
        );
        match (pass, c.known_failure) {
            (true, _) => {}
            (false, Some(documented)) if in_time && outcome.signature == documented => {
                line.push_str(" (fails as written; see README)");
            }
            _ => unexpected += 1,
        }
        println!("{line}");
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    }
}
