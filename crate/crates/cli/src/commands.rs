use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use liegen_core::algebra::{parse_polynomial, parse_rational, Polynomial, Rational, Variety};
use liegen_core::bracket::ledger::{verify_ledger, Form};
use liegen_core::bracket::{decompose_in_frame, recombine, BracketError};
use liegen_core::fields::{format_complex, generator, parse_complex, Point, VectorField};
use liegen_core::flows::{
    bracket_flow_kind, flow, log_log_slope, pullback_check, pullback_check_theta,
    trotter_bracket_flow, FlowKind, ShearPoly,
};
use liegen_core::transitivity::{
    lemma_approx_field, plan_multi, verify_certificate, Ball, MoveRequest, MoveRequestJson,
    TransitivityError,
};

use crate::cache;
use crate::output::{failure, usage, CliError, Report};
use crate::Global;

fn variety(text: &str) -> Result<Variety, CliError> {
    text.parse().map_err(usage)
}

fn names(list: &str) -> Vec<String> {
    list.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn default_frame(v: Variety) -> &'static str {
    match v {
        Variety::Sl2 => "V,W,H",
        Variety::Quadric => "XI,THETA,H",
    }
}

fn catalog_fields(v: Variety, list: &str) -> Result<Vec<(String, VectorField)>, CliError> {
    let out = names(list)
        .into_iter()
        .map(|n| {
            let f = generator(v, &n).map_err(usage)?;
            Ok((n.to_ascii_uppercase(), f))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if out.is_empty() {
        return Err(usage("no fields named"));
    }
    Ok(out)
}

/// A catalog name, a polynomial times one (`b*c*H`), or a field in the
/// `p d/dx + ...` text form.
fn field(v: Variety, text: &str) -> Result<VectorField, CliError> {
    if let Ok(f) = generator(v, text.trim()) {
        return Ok(f);
    }
    if let Some((coeff, name)) = text.rsplit_once('*') {
        if let (Ok(f), Ok(p)) = (
            generator(v, name.trim()),
            parse_polynomial(&v.ring(), coeff),
        ) {
            return f.mul_poly(&p).map_err(failure);
        }
    }
    VectorField::parse(&v.ring(), text).map_err(usage)
}

fn complex_list(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(',')
        .map(|s| {
            parse_complex(s).ok_or_else(|| usage(format!("bad complex number '{}'", s.trim())))
        })
        .collect()
}

fn point(v: Variety, text: &str) -> Result<Point, CliError> {
    Point::new(&v.ring(), complex_list(text)?).map_err(usage)
}

fn bracket_error(e: BracketError) -> CliError {
    match e {
        BracketError::DegreeOverflow { .. } | BracketError::CertificateMismatch(_) => failure(e),
        e => usage(e),
    }
}

#[derive(Args, Debug)]
pub struct VerifyIdentities {
    /// `quadric` or `sl2`.
    #[arg(long)]
    variety: String,
    /// Require the published forms too, not only their corrections.
    #[arg(long)]
    strict: bool,
}

impl VerifyIdentities {
    pub fn run(&self) -> Result<Report, CliError> {
        let v = variety(&self.variety)?;
        let report = verify_ledger(v).map_err(failure)?;
        let mut groups: BTreeMap<(String, Form), (usize, usize)> = BTreeMap::new();
        let mut order = Vec::new();
        for r in &report.results {
            let key = (r.group.clone(), r.form);
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            let e = groups.entry(key).or_insert((0, 0));
            e.0 += r.pass as usize;
            e.1 += 1;
        }
        let errata: Vec<&str> = report.errata().map(|r| r.name.as_str()).collect();
        let unexplained: Vec<&str> = report
            .failures()
            .filter(|r| !errata.contains(&r.name.as_str()))
            .map(|r| r.name.as_str())
            .collect();
        let pass = if self.strict {
            report.all_pass()
        } else {
            report.holds_with_corrections()
        };

        let mut summary: Vec<String> = order
            .iter()
            .map(|key| {
                let (p, t) = groups[key];
                let form = if key.1 == Form::Stated {
                    ""
                } else {
                    " (corrected)"
                };
                format!("{:>5}/{:<5} {}{}", p, t, key.0, form)
            })
            .collect();
        if !errata.is_empty() {
            summary.push(format!(
                "{} published forms fail and are replaced by verified corrections, e.g. {}",
                errata.len(),
                errata[0]
            ));
        }
        for name in unexplained.iter().take(10) {
            summary.push(format!("FAILS: {name}"));
        }
        let (sp, st) = report.count(Form::Stated);
        let (cp, ct) = report.count(Form::Corrected);
        Ok(Report::new(
            pass,
            summary,
            json!({
                "variety": v,
                "strict": self.strict,
                "stated": { "passed": sp, "total": st },
                "corrected": { "passed": cp, "total": ct },
                "errata": errata,
                "uncorrected_failures": unexplained,
                "results": report.results,
            }),
        ))
    }
}

#[derive(Args, Debug)]
pub struct Closure {
    /// `quadric` or `sl2`.
    #[arg(long)]
    variety: String,
    /// Comma-separated catalog names, e.g. `V,W,BCW,DW`.
    #[arg(long)]
    generators: String,
    /// Degree cap `D` for basis elements.
    #[arg(long)]
    degree: u32,
    /// Extra degrees allowed for intermediate brackets.
    #[arg(long, default_value_t = 2)]
    slack: u32,
    /// Frame whose monomial multiples are checked for membership
    /// (default `V,W,H` or `XI,THETA,H`).
    #[arg(long)]
    frame: Option<String>,
    /// Highest monomial degree in the member checks (default `D`).
    #[arg(long)]
    check_degree: Option<u32>,
    /// Only compute and store the closure.
    #[arg(long)]
    skip_member_checks: bool,
}

impl Closure {
    pub fn run(&self, global: &Global) -> Result<Report, CliError> {
        let v = variety(&self.variety)?;
        let gens = catalog_fields(v, &self.generators)?;
        let (cb, path, source) =
            cache::load_or_compute(&global.cache_dir, v, &gens, self.degree, self.slack)?;
        let verified = cb.verify_certificates();
        let mut summary = vec![
            format!(
                "closure of {} at D = {}, slack = {}: {} basis elements, {} brackets",
                names(&self.generators).join(", "),
                self.degree,
                self.slack,
                cb.len(),
                cb.pairs_bracketed()
            ),
            format!("dimension by degree: {:?}", cb.dimension_by_degree()),
            format!(
                "certificates re-evaluated: {}",
                match &verified {
                    Ok(n) => format!("{n} exact"),
                    Err(e) => e.to_string(),
                }
            ),
            format!("closure file: {}", path.display()),
        ];
        let mut pass = verified.is_ok();
        let mut checks = json!(null);
        if !self.skip_member_checks {
            let frame_names = self
                .frame
                .clone()
                .unwrap_or_else(|| default_frame(v).to_string());
            let frame = catalog_fields(v, &frame_names)?;
            let d = self.check_degree.unwrap_or(self.degree);
            let ring = v.ring();
            let (mut passed, mut total, mut missing) = (0, 0, Vec::new());
            for m in ring.normal_monomials(d) {
                let p = Polynomial::monomial(&ring, m, Rational::from_integer(1.into()));
                for (name, f) in &frame {
                    let target = f.mul_poly(&p).map_err(failure)?;
                    total += 1;
                    let cert = cb.member(&target).map_err(bracket_error)?;
                    match cert.map(|c| c.evaluate(cb.generators())) {
                        Some(Ok(value)) if value == target => passed += 1,
                        _ => missing.push(format!("{}*{}", p.to_text(), name)),
                    }
                }
            }
            pass &= missing.is_empty();
            summary.push(format!(
                "member checks m*F for F in {{{}}}, deg m <= {d}: {passed}/{total} certified",
                frame
                    .iter()
                    .map(|(n, _)| n.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            if !missing.is_empty() {
                summary.push(format!("missing: {}", missing.join(", ")));
            }
            checks = json!({
                "frame": frame.iter().map(|(n, _)| n).collect::<Vec<_>>(),
                "degree": d,
                "passed": passed,
                "total": total,
                "missing": missing,
            });
        }
        let mut report = Report::new(
            pass,
            summary,
            json!({
                "variety": v,
                "generators": gens.iter().map(|(n, _)| n).collect::<Vec<_>>(),
                "degree": self.degree,
                "slack": self.slack,
                "key": cache::key(v, &gens, self.degree, self.slack),
                "closure_file": path.display().to_string(),
                "basis_size": cb.len(),
                "pairs_bracketed": cb.pairs_bracketed(),
                "dimension_by_degree": cb.dimension_by_degree(),
                "certificates_verified": verified.is_ok(),
                "member_checks": checks,
            }),
        );
        report.cache = Some(source.label());
        Ok(report)
    }
}

#[derive(Args, Debug)]
pub struct Member {
    /// A file written by `closure`.
    #[arg(long)]
    closure_file: PathBuf,
    /// Catalog name or field text such as `2*x*z d/dy + x^2 d/dz`.
    #[arg(long)]
    target: String,
}

impl Member {
    pub fn run(&self) -> Result<Report, CliError> {
        let (file, cb) = cache::read(&self.closure_file)?;
        let target = field(file.variety, &self.target)?;
        let cert = cb.member(&target).map_err(bracket_error)?;
        let verified = match &cert {
            Some(c) => c.evaluate(cb.generators()).map_err(failure)? == target,
            None => false,
        };
        let summary = match &cert {
            Some(c) => vec![
                format!("{} is a member", target.to_text()),
                format!("certificate: {c}"),
                format!("certificate re-evaluates exactly: {verified}"),
            ],
            None => vec![format!("{} is not in the closure", target.to_text())],
        };
        Ok(Report::new(
            verified,
            summary,
            json!({
                "variety": file.variety,
                "key": file.key,
                "target": target.to_text(),
                "member": cert.is_some(),
                "certificate": cert.map(|c| c.to_sexpr()),
                "verified": verified,
            }),
        ))
    }
}

#[derive(Args, Debug)]
pub struct Decompose {
    /// `quadric` or `sl2`.
    #[arg(long)]
    variety: String,
    /// Catalog name or field text.
    #[arg(long)]
    field: String,
    /// Comma-separated catalog names (default `V,W,H` or `XI,THETA,H`).
    #[arg(long)]
    frame: Option<String>,
    /// Coefficient degree beyond the degree the target forces.
    #[arg(long, default_value_t = 0)]
    slack: u32,
}

impl Decompose {
    pub fn run(&self) -> Result<Report, CliError> {
        let v = variety(&self.variety)?;
        let target = field(v, &self.field)?;
        let frame = catalog_fields(v, self.frame.as_deref().unwrap_or(default_frame(v)))?;
        let fields: Vec<VectorField> = frame.iter().map(|(_, f)| f.clone()).collect();
        let lowest = fields.iter().map(VectorField::degree).min().unwrap_or(0);
        let coeff_degree = target.degree().saturating_sub(lowest) + self.slack;
        let found = decompose_in_frame(&target, &fields, coeff_degree).map_err(bracket_error)?;
        let (pass, summary, coeffs) = match &found {
            Some(c) => {
                let ok = recombine(c, &fields).map_err(bracket_error)? == target;
                let terms: Vec<String> = c
                    .iter()
                    .zip(&frame)
                    .filter(|(p, _)| !p.is_zero())
                    .map(|(p, (n, _))| format!("({}) {n}", p.to_text()))
                    .collect();
                (
                    ok,
                    vec![
                        format!(
                            "{} = {}",
                            target.to_text(),
                            if terms.is_empty() { "0".to_string() } else { terms.join(" + ") }
                        ),
                        format!("recombination is exact: {ok}"),
                    ],
                    json!(c.iter().map(Polynomial::to_text).collect::<Vec<_>>()),
                )
            }
            None => (
                false,
                vec![format!(
                    "no decomposition with coefficient degree <= {coeff_degree}; larger slack may still succeed"
                )],
                json!(null),
            ),
        };
        Ok(Report::new(
            pass,
            summary,
            json!({
                "variety": v,
                "target": target.to_text(),
                "frame": frame.iter().map(|(n, _)| n).collect::<Vec<_>>(),
                "coeff_degree": coeff_degree,
                "present": found.is_some(),
                "coefficients": coeffs,
            }),
        ))
    }
}

fn flow_kind(name: &str, coeff: Option<&str>) -> Result<FlowKind, CliError> {
    match (name.to_ascii_uppercase().as_str(), coeff) {
        ("SHEAR_F_XI", Some(f)) => Ok(FlowKind::ShearFXi(ShearPoly::parse(f, "x").map_err(usage)?)),
        ("SHEAR_G_THETA", Some(g)) => Ok(FlowKind::ShearGTheta(
            ShearPoly::parse(g, "y").map_err(usage)?,
        )),
        (n, None) => FlowKind::simple(n).map_err(usage),
        (n, Some(_)) => Err(usage(format!("{n} takes no coefficient"))),
    }
}

#[derive(Args, Debug)]
pub struct Flow {
    /// One of THETA, XI, X_XI, Z_XI, Z_H, H_QUADRIC, SHEAR_F_XI, SHEAR_G_THETA
    /// on the quadric, or V_SL2, W_SL2, BC_W, D_W, D_H, H_SL2 on SL2.
    #[arg(long)]
    kind: String,
    /// Complex time such as `0.5` or `1-2i`.
    #[arg(long, allow_hyphen_values = true)]
    time: String,
    /// Comma-separated complex coordinates.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Shear coefficient in factored form, e.g. `2*(x-1)^2` (shear kinds only).
    #[arg(long)]
    coeff: Option<String>,
}

impl Flow {
    pub fn run(&self) -> Result<Report, CliError> {
        let kind = flow_kind(&self.kind, self.coeff.as_deref())?;
        let t =
            parse_complex(&self.time).ok_or_else(|| usage(format!("bad time '{}'", self.time)))?;
        let p = point(kind.variety(), &self.point)?;
        let q = flow(&kind, t, &p).map_err(failure)?;
        let defect = q.relation_defect();
        let bound = 1e-10 * q.norm().powi(2).max(1.0);
        Ok(Report::new(
            defect <= bound,
            vec![
                format!(
                    "{kind} for time {}: ({})",
                    format_complex(t),
                    q.to_json().join(", ")
                ),
                format!("relation defect {defect:e}"),
            ],
            json!({
                "kind": kind.to_string(),
                "time": format_complex(t),
                "point": p.to_json(),
                "image": q.to_json(),
                "relation_defect": defect,
            }),
        ))
    }
}

#[derive(Args, Debug)]
pub struct PullbackCheck {
    /// Rational time such as `1/2`.
    #[arg(long, allow_hyphen_values = true)]
    time: String,
}

impl PullbackCheck {
    pub fn run(&self) -> Result<Report, CliError> {
        let t = parse_rational(&self.time).map_err(usage)?;
        let (moved, expected) = pullback_check(&t).map_err(failure)?;
        let (moved_theta, expected_theta) = pullback_check_theta(&t).map_err(failure)?;
        let (xi_ok, theta_ok) = (moved == expected, moved_theta == expected_theta);
        Ok(Report::new(
            xi_ok && theta_ok,
            vec![
                format!("Xi moved by the Theta flow: {}", moved.to_text()),
                format!(
                    "Xi - tH - t^2 Theta:        {} (equal: {xi_ok})",
                    expected.to_text()
                ),
                format!("Theta moved by the Xi flow: {}", moved_theta.to_text()),
                format!(
                    "Theta + tH - t^2 Xi:        {} (equal: {theta_ok})",
                    expected_theta.to_text()
                ),
            ],
            json!({
                "time": t.to_string(),
                "xi": { "transported": moved.to_text(), "expected": expected.to_text(), "equal": xi_ok },
                "theta": { "transported": moved_theta.to_text(), "expected": expected_theta.to_text(), "equal": theta_ok },
            }),
        ))
    }
}

#[derive(Args, Debug)]
pub struct Trotter {
    /// Total time.
    #[arg(long = "T", default_value_t = 0.1)]
    total: f64,
    /// Comma-separated numbers of commutator rounds.
    #[arg(long, default_value = "4,16,64,256")]
    steps: String,
    /// Starting point, comma-separated.
    #[arg(long, default_value = "1,1,1", allow_hyphen_values = true)]
    point: String,
    /// First flow kind.
    #[arg(long, default_value = "THETA")]
    a: String,
    /// Second flow kind; the target is the flow of `[A, B]`.
    #[arg(long, default_value = "XI")]
    b: String,
    /// Smallest acceptable order in the step size `sqrt(T/n)`.
    #[arg(long, default_value_t = 0.9)]
    min_order: f64,
}

impl Trotter {
    pub fn run(&self) -> Result<Report, CliError> {
        let (a, b) = (flow_kind(&self.a, None)?, flow_kind(&self.b, None)?);
        if a.variety() != b.variety() {
            return Err(usage(format!("{a} and {b} live on different varieties")));
        }
        let p = point(a.variety(), &self.point)?;
        let steps: Vec<usize> = names(&self.steps)
            .iter()
            .map(|s| {
                s.parse()
                    .ok()
                    .filter(|&n: &usize| n > 0)
                    .ok_or_else(|| usage(format!("bad step count '{s}'")))
            })
            .collect::<Result<_, _>>()?;
        if steps.is_empty() {
            return Err(usage("no step counts"));
        }
        let target = bracket_flow_kind(&a, &b).map_err(failure)?;
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        let mut summary = vec![format!(
            "[{a}, {b}] flows as {}",
            target
                .as_ref()
                .map_or("the identity".to_string(), |k| k.to_string())
        )];
        for &n in &steps {
            let r = trotter_bracket_flow(&a, &b, self.total, n, &p).map_err(failure)?;
            summary.push(format!("n = {n:>5}: error {:.6e}", r.error));
            errors.push(r.error);
            rows.push(json!({ "n": n, "error": r.error, "point": r.point.to_json() }));
        }
        let sizes: Vec<f64> = steps
            .iter()
            .map(|&n| (self.total / n as f64).sqrt())
            .collect();
        let order = (steps.len() > 1).then(|| log_log_slope(&sizes, &errors));
        let pass = match order {
            Some(o) => o >= self.min_order && errors.windows(2).all(|w| w[1] < w[0]),
            None => errors[0].is_finite(),
        };
        if let Some(o) = order {
            summary.push(format!(
                "order in sqrt(T/n): {o:.4} (needs >= {})",
                self.min_order
            ));
        }
        Ok(Report::new(
            pass,
            summary,
            json!({
                "a": a.to_string(),
                "b": b.to_string(),
                "bracket_flow": target.map(|k| k.to_string()),
                "total_time": self.total,
                "point": p.to_json(),
                "rows": rows,
                "order": order,
            }),
        ))
    }
}

#[derive(Args, Debug)]
pub struct MovePoints {
    /// JSON with `sources`, `targets` (complex coordinate triples as strings)
    /// and optional `tolerance`.
    #[arg(long)]
    request_file: PathBuf,
}

impl MovePoints {
    pub fn run(&self, global: &Global) -> Result<Report, CliError> {
        let path = &self.request_file;
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let json: MoveRequestJson =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let req = MoveRequest::from_json(&json).map_err(usage)?;
        let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
        let mut cert = plan_multi(&req, &mut rng).map_err(|e| match e {
            TransitivityError::Precondition(_) => usage(e),
            e => failure(e),
        })?;
        cert.seed = Some(global.seed);
        let report = verify_certificate(&cert, &req);
        Ok(Report::new(
            report.pass,
            vec![
                format!(
                    "{} points moved in {} stages, {} flow steps in total{}",
                    req.len(),
                    cert.stages.len(),
                    cert.program().len(),
                    if cert.routed {
                        " (routed through intermediate points)"
                    } else {
                        ""
                    }
                ),
                format!(
                    "largest residual {:e} (tolerance {:e}), relation defect {:e}",
                    report.max_residual, report.tolerance, report.max_relation_defect
                ),
                format!(
                    "fixed points: drift {:e}, {} exact checks, {} failures",
                    report.max_fixed_displacement,
                    report.exact_fixing_checks,
                    report.exact_fixing_failures
                ),
            ],
            json!({ "request": json, "certificate": cert, "verification": report }),
        ))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallJson {
    center: Vec<String>,
    radius: f64,
}

#[derive(Args, Debug)]
pub struct LemmaApprox {
    /// JSON list of `{"center": [...], "radius": r}`; the last ball is the one to match.
    #[arg(long)]
    balls_file: PathBuf,
    /// Tangent vector at the last center, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    v0: String,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
}

impl LemmaApprox {
    pub fn run(&self, global: &Global) -> Result<Report, CliError> {
        let path = &self.balls_file;
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let raw: Vec<BallJson> =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let balls = raw
            .iter()
            .map(|b| {
                Ok(Ball {
                    center: point(Variety::Quadric, &b.center.join(","))?,
                    radius: b.radius,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let v0 = complex_list(&self.v0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
        let field = lemma_approx_field(&balls, &v0, self.delta, &mut rng).map_err(|e| match e {
            TransitivityError::Precondition(_) => usage(e),
            e => failure(e),
        })?;
        let pass = field.sup_others < self.delta && field.sup_last < self.delta;
        Ok(Report::new(
            pass,
            vec![
                format!("f(x) = {}", field.f.to_text("x")),
                format!("g(y) = {}", field.g.to_text("y")),
                format!(
                    "power {}: sup |V| on other balls {:e}, sup |V - v0| on the last {:e} (delta {:e})",
                    field.power, field.sup_others, field.sup_last, self.delta
                ),
            ],
            json!({ "delta": self.delta, "field": field }),
        ))
    }
}
