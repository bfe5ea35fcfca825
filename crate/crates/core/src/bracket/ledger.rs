//! Catalogue of bracket identities on both varieties, checked by exact
//! evaluation of both sides.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{BracketError, BracketExpr, Evaluator, Node};
use crate::algebra::Variety;
use crate::fields::{catalog, VectorField};

/// Index values used to instantiate parametrized families.
pub const FAMILY_INDICES: std::ops::RangeInclusive<u32> = 0..=4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// Transcribed as published.
    Stated,
    /// Re-derived replacement for a published identity that does not hold.
    Corrected,
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub group: String,
    pub form: Form,
    pub lhs: BracketExpr,
    pub rhs: BracketExpr,
}

impl Identity {
    pub fn name(&self) -> String {
        format!("{} = {}", pretty(&self.lhs), pretty(&self.rhs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub group: String,
    pub name: String,
    /// Left side alone; a corrected form shares it with the published one.
    pub lhs: String,
    pub form: Form,
    pub pass: bool,
    /// `lhs - rhs` when the identity fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub variety: Variety,
    pub results: Vec<IdentityResult>,
}

impl LedgerReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn count(&self, form: Form) -> (usize, usize) {
        let of_form = self.results.iter().filter(|r| r.form == form);
        let total = of_form.clone().count();
        (of_form.filter(|r| r.pass).count(), total)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResult> + '_ {
        self.results.iter().filter(|r| !r.pass)
    }

    /// Failing published forms whose left side has a passing corrected form.
    pub fn errata(&self) -> impl Iterator<Item = &IdentityResult> + '_ {
        let fixed: BTreeSet<(&str, &str)> = self
            .results
            .iter()
            .filter(|r| r.form == Form::Corrected && r.pass)
            .map(|r| (r.group.as_str(), r.lhs.as_str()))
            .collect();
        self.failures().filter(move |r| {
            r.form == Form::Stated && fixed.contains(&(r.group.as_str(), r.lhs.as_str()))
        })
    }

    /// Every identity holds, published forms replaced by their corrections
    /// where those exist.
    pub fn holds_with_corrections(&self) -> bool {
        self.failures().count() == self.errata().count()
    }
}

/// Readable infix form: `[THETA, x*XI]`, `2*z*XI + x*H`.
pub fn pretty(e: &BracketExpr) -> String {
    fn atomic(e: &BracketExpr) -> String {
        match e.node() {
            Node::Sum(_) | Node::Scl(..) => format!("({})", pretty(e)),
            _ => pretty(e),
        }
    }
    match e.node() {
        Node::Gen(n) => n.clone(),
        Node::Brk(a, b) => format!("[{}, {}]", pretty(a), pretty(b)),
        Node::Scl(c, a) => format!("{c}*{}", atomic(a)),
        Node::Sum(parts) => {
            let mut out = String::new();
            for (i, p) in parts.iter().enumerate() {
                let s = pretty(p);
                match (i, s.strip_prefix('-')) {
                    (0, _) => out.push_str(&s),
                    (_, Some(rest)) => {
                        out.push_str(" - ");
                        out.push_str(rest);
                    }
                    _ => {
                        out.push_str(" + ");
                        out.push_str(&s);
                    }
                }
            }
            if parts.is_empty() {
                out.push('0');
            }
            out
        }
        Node::Mul(p, a) => {
            let t = p.to_text();
            if p.n_terms() == 1 {
                if t == "1" {
                    atomic(a)
                } else if t == "-1" {
                    format!("-{}", atomic(a))
                } else {
                    format!("{t}*{}", atomic(a))
                }
            } else {
                format!("({t})*{}", atomic(a))
            }
        }
    }
}

/// `v1^e1*v2^e2*...`, or `1`.
fn mono(parts: &[(&str, u32)]) -> String {
    let s: Vec<String> = parts
        .iter()
        .filter(|(_, e)| *e > 0)
        .map(|(v, e)| {
            if *e == 1 {
                v.to_string()
            } else {
                format!("{v}^{e}")
            }
        })
        .collect();
    if s.is_empty() {
        "1".into()
    } else {
        s.join("*")
    }
}

struct Builder {
    variety: Variety,
    out: Vec<Identity>,
}

impl Builder {
    fn add(&mut self, group: &str, form: Form, lhs: &str, rhs: &str) {
        let ring = self.variety.ring();
        let parse = |s: &str| {
            BracketExpr::parse(s, &ring).unwrap_or_else(|e| panic!("ledger entry '{s}': {e}"))
        };
        self.out.push(Identity {
            group: group.to_string(),
            form,
            lhs: parse(lhs),
            rhs: parse(rhs),
        });
    }

    fn stated(&mut self, group: &str, lhs: &str, rhs: &str) {
        self.add(group, Form::Stated, lhs, rhs);
    }

    fn corrected(&mut self, group: &str, lhs: &str, rhs: &str) {
        self.add(group, Form::Corrected, lhs, rhs);
    }
}

fn g(name: &str) -> String {
    format!("(gen {name})")
}

fn m(poly: &str, e: &str) -> String {
    format!("(mul \"{poly}\" {e})")
}

fn b(x: &str, y: &str) -> String {
    format!("(brk {x} {y})")
}

fn s(parts: &[String]) -> String {
    format!("(sum {})", parts.join(" "))
}

fn c(q: i64, e: &str) -> String {
    format!("(scl {q} {e})")
}

/// `coef * poly * field`, written so a zero coefficient still parses.
fn cm(coef: i64, poly: &str, field: &str) -> String {
    m(&format!("{coef}*{poly}"), &g(field))
}

fn quadric_identities() -> Vec<Identity> {
    let mut l = Builder {
        variety: Variety::Quadric,
        out: Vec::new(),
    };
    let (th, xi, h) = (g("THETA"), g("XI"), g("H"));
    let grp = "sl2 relations";
    l.stated(grp, &b(&th, &xi), &h);
    l.stated(grp, &b(&h, &th), &c(2, &th));
    l.stated(grp, &b(&h, &xi), &c(-2, &xi));

    let grp = "iterated action of THETA on x*XI";
    let mut w = m("x", &xi);
    let rhs = [
        s(&[m("2*z", &xi), m("x", &h)]),
        s(&[m("2*y", &xi), m("4*z", &h), m("-2*x", &th)]),
        s(&[m("6*y", &h), m("-12*z", &th)]),
        m("-24*y", &th),
    ];
    for r in &rhs {
        w = b(&th, &w);
        l.stated(grp, &w, r);
    }
    let grp = "iterated action of XI on y*THETA";
    let mut w = m("y", &th);
    let rhs = [
        s(&[m("2*z", &th), m("-y", &h)]),
        s(&[m("2*x", &th), m("-4*z", &h), m("-2*y", &xi)]),
        s(&[m("-6*x", &h), m("-12*z", &xi)]),
        m("-24*x", &xi),
    ];
    for r in &rhs {
        w = b(&xi, &w);
        l.stated(grp, &w, r);
    }

    let grp = "powers of x in front of XI";
    for k in FAMILY_INDICES {
        let xk = mono(&[("x", k)]);
        if k >= 1 {
            let lower = format!("{}*z", mono(&[("x", k - 1)]));
            l.stated(
                grp,
                &b(&th, &m(&xk, &xi)),
                &s(&[m(&format!("{}*{lower}", 2 * k), &xi), m(&xk, &h)]),
            );
        }
        l.stated(
            grp,
            &b(&b(&th, &m(&xk, &xi)), &m("x", &xi)),
            &cm(-(2 * k as i64 + 4), &mono(&[("x", k + 1)]), "XI"),
        );
    }
    let grp = "powers of y in front of THETA";
    for k in FAMILY_INDICES {
        l.stated(
            grp,
            &b(&b(&xi, &m(&mono(&[("y", k)]), &th)), &m("y", &th)),
            &cm(-(2 * k as i64 + 4), &mono(&[("y", k + 1)]), "THETA"),
        );
    }

    let grp = "degree-one coefficients";
    l.stated(grp, &b(&th, &m("z", &xi)), &s(&[m("y", &xi), m("z", &h)]));
    l.stated(
        grp,
        &b(&th, &s(&[m("y", &xi), m("z", &h)])),
        &s(&[m("2*y", &h), m("-2*z", &th)]),
    );
    l.stated(
        grp,
        &b(&th, &s(&[m("2*y", &h), m("-2*z", &th)])),
        &m("-6*y", &th),
    );
    l.stated(grp, &b(&xi, &m("z", &th)), &s(&[m("x", &th), m("-z", &h)]));

    let grp = "all coefficients: products with z";
    for k in FAMILY_INDICES {
        let xk = mono(&[("x", k)]);
        let yk = mono(&[("y", k)]);
        l.stated(
            grp,
            &b(&m("y", &xi), &m(&xk, &xi)),
            &m(&format!("-2*z*{xk}"), &xi),
        );
        l.stated(
            grp,
            &b(&m("x", &th), &m(&yk, &th)),
            &m(&format!("-2*z*{yk}"), &th),
        );
    }
    let grp = "all coefficients: powers of z";
    for k in FAMILY_INDICES {
        l.stated(
            grp,
            &b(&m(&mono(&[("z", k)]), &xi), &m("y", &xi)),
            &cm(2 - k as i64, &mono(&[("z", k + 1)]), "XI"),
        );
    }
    l.stated(
        grp,
        &s(&[
            b(&m("z", &xi), &m("y", &h)),
            c(-1, &b(&th, &b(&m("z", &xi), &m("y", &xi)))),
        ]),
        &m("z^2", &h),
    );
    l.stated(
        grp,
        &b(&th, &m("z^2", &xi)),
        &s(&[m("2*x*y", &xi), m("-z^2", &h)]),
    );
    l.corrected(
        grp,
        &b(&th, &m("z^2", &xi)),
        &s(&[m("2*y*z", &xi), m("z^2", &h)]),
    );
    l.stated(grp, &b(&m("z", &xi), &m("y*z", &xi)), &m("2*z^3", &xi));
    for k in FAMILY_INDICES {
        let zk = mono(&[("z", k)]);
        let zk1 = mono(&[("z", k + 1)]);
        l.stated(
            grp,
            &s(&[
                c(k as i64 + 1, &b(&m(&zk, &xi), &m("y", &h))),
                c(-2, &b(&th, &m(&zk1, &xi))),
            ]),
            &cm(2 * k as i64, &zk1, "H"),
        );
    }

    let grp = "all coefficients: products f(y) g(x) h(z)";
    for i in FAMILY_INDICES {
        for j in FAMILY_INDICES {
            for k in FAMILY_INDICES {
                let f = mono(&[("y", i)]);
                let gx = mono(&[("x", j)]);
                let hz = mono(&[("z", k)]);
                l.stated(
                    grp,
                    &s(&[
                        b(&m(&format!("z*{f}"), &th), &m(&hz, &h)),
                        c(-1, &b(&m(&f, &th), &m(&format!("z*{hz}"), &h))),
                    ]),
                    &m(&format!("-{f}*{hz}*y"), &h),
                );
                l.stated(
                    grp,
                    &s(&[
                        b(&m(&format!("z*{gx}"), &xi), &m(&format!("-{f}*{hz}*y"), &h)),
                        c(-1, &b(&m(&gx, &xi), &m(&format!("-z*{f}*{hz}*y"), &h))),
                    ]),
                    &m(&format!("x*y*{gx}*{f}*{hz}"), &h),
                );
                l.stated(
                    grp,
                    &s(&[
                        b(&m(&format!("z*{gx}"), &xi), &m(&hz, &h)),
                        c(-1, &b(&m(&gx, &xi), &m(&format!("z*{hz}"), &h))),
                    ]),
                    &m(&format!("-{gx}*{hz}*x"), &h),
                );
                let gh = format!("{gx}*{hz}");
                l.stated(
                    grp,
                    &s(&[
                        b(&m(&format!("y*{f}"), &th), &m(&gh, &h)),
                        c(-1, &b(&m(&f, &th), &m(&format!("y*{gh}"), &h))),
                    ]),
                    &m(&format!("-2*y*{f}*{gh}"), &th),
                );
                l.stated(
                    grp,
                    &s(&[
                        b(&m(&format!("x*{f}"), &th), &m(&gh, &h)),
                        c(-1, &b(&m(&f, &th), &m(&format!("x*{gh}"), &h))),
                    ]),
                    &s(&[
                        m(&format!("2*x*{f}*{gh}"), &th),
                        m(&format!("-2*z*{f}*{gh}"), &h),
                    ]),
                );
            }
        }
    }
    l.out
}

fn sl2_identities() -> Vec<Identity> {
    let mut l = Builder {
        variety: Variety::Sl2,
        out: Vec::new(),
    };
    let (v, w, h) = (g("V"), g("W"), g("H"));
    let grp = "sl2 relations";
    l.stated(grp, &b(&v, &w), &h);
    l.stated(grp, &b(&h, &v), &c(2, &v));
    l.stated(grp, &b(&h, &w), &c(-2, &w));

    let grp = "actions of V and W";
    let chains = [
        (
            &v,
            m("b", &w),
            [
                s(&[m("d", &w), m("b", &h)]),
                s(&[m("2*d", &h), m("-2*b", &v)]),
                m("-6*d", &v),
            ],
        ),
        (
            &v,
            m("a", &w),
            [
                s(&[m("c", &w), m("a", &h)]),
                s(&[m("2*c", &h), m("-2*a", &v)]),
                m("-6*c", &v),
            ],
        ),
        (
            &w,
            m("d", &v),
            [
                s(&[m("b", &v), m("-d", &h)]),
                s(&[m("-2*b", &h), m("-2*d", &w)]),
                m("-6*b", &w),
            ],
        ),
    ];
    for (actor, start, rhs) in &chains {
        // each step brackets with the previous right-hand side, as displayed
        let mut arg = start.clone();
        for r in rhs {
            l.stated(grp, &b(actor, &arg), r);
            arg = r.clone();
        }
    }

    let grp = "powers in front of V and W";
    for k in FAMILY_INDICES {
        for (actor, var, field) in [
            ("V", "b", "W"),
            ("V", "a", "W"),
            ("W", "c", "V"),
            ("W", "d", "V"),
        ] {
            l.stated(
                grp,
                &b(
                    &b(&g(actor), &m(&mono(&[(var, k)]), &g(field))),
                    &m(var, &g(field)),
                ),
                &cm(-(k as i64 + 3), &mono(&[(var, k + 1)]), field),
            );
        }
    }

    let grp = "degree-one coefficients";
    l.stated(grp, &b(&w, &g("BCW")), &m("a", &w));
    l.stated(grp, &b(&v, &b(&v, &b(&v, &m("a", &w)))), &m("-6*c", &v));
    l.stated(grp, &b(&v, &b(&v, &b(&v, &g("BCW")))), &m("-6*d", &v));
    l.stated(grp, &b(&w, &g("DW")), &m("b", &w));
    l.stated(grp, &b(&v, &m("c", &w)), &m("c", &h));
    l.stated(grp, &b(&w, &m("c", &h)), &s(&[m("a", &h), m("2*c", &w)]));
    l.stated(grp, &b(&v, &m("d", &w)), &m("d", &h));
    l.stated(grp, &b(&w, &m("d", &h)), &s(&[m("b", &h), m("2*d", &w)]));
    l.stated(grp, &b(&v, &m("a", &h)), &s(&[m("c", &h), m("-2*a", &v)]));
    l.stated(grp, &b(&v, &m("b", &h)), &s(&[m("d", &h), m("-2*b", &v)]));

    let grp = "combination formula instances";
    for k in FAMILY_INDICES {
        let ck = mono(&[("c", k)]);
        let ck1 = mono(&[("c", k + 1)]);
        l.stated(
            grp,
            &b(&m("c", &w), &m(&ck, &v)),
            &s(&[m(&format!("{k}*a*{ck}"), &v), m(&format!("-{ck1}"), &h)]),
        );
        l.stated(
            grp,
            &s(&[b(&m("c", &w), &m(&ck, &v)), c(-1, &b(&w, &m(&ck1, &v)))]),
            &m(&format!("-a*{ck}"), &v),
        );
    }

    let grp = "monomials in front of H";
    for k in FAMILY_INDICES {
        for mm in FAMILY_INDICES {
            let lhs = b(&m(&mono(&[("c", mm)]), &h), &m(&mono(&[("a", k)]), &h));
            let prod = mono(&[("a", k), ("c", mm)]);
            l.stated(grp, &lhs, &cm(k as i64 + mm as i64, &prod, "H"));
            l.corrected(grp, &lhs, &cm(-(k as i64 + mm as i64), &prod, "H"));
        }
    }
    for k in FAMILY_INDICES {
        for ll in FAMILY_INDICES {
            for mm in FAMILY_INDICES {
                for n in FAMILY_INDICES {
                    let (k_, l_, m_, n_) = (k as i64, ll as i64, mm as i64, n as i64);
                    let p = mono(&[("a", k), ("c", mm)]);
                    let q = mono(&[("b", ll), ("d", n)]);
                    let lhs = b(&m(&p, &h), &m(&q, &h));
                    let prod = mono(&[("a", k), ("b", ll), ("c", mm), ("d", n)]);
                    l.stated(grp, &lhs, &cm(-k_ + m_ - l_ + n_, &prod, "H"));
                    l.corrected(grp, &lhs, &cm(k_ - m_ - l_ + n_, &prod, "H"));

                    // multiplying one side by a or b and subtracting
                    let ap = mono(&[("a", k + 1), ("c", mm)]);
                    let aq = mono(&[("a", 1), ("b", ll), ("d", n)]);
                    let lhs_a = s(&[
                        b(&m(&ap, &h), &m(&q, &h)),
                        c(-1, &b(&m(&p, &h), &m(&aq, &h))),
                    ]);
                    if -l_ + n_ - 1 != 0 {
                        let typo = mono(&[("a", k), ("b", ll), ("c", ll), ("d", n)]);
                        l.stated(grp, &lhs_a, &cm(2, &typo, "H"));
                    }
                    let prod_a = mono(&[("a", k + 1), ("b", ll), ("c", mm), ("d", n)]);
                    l.corrected(grp, &lhs_a, &cm(2, &prod_a, "H"));

                    let bp = mono(&[("a", k), ("b", 1), ("c", mm)]);
                    let bq = mono(&[("b", ll + 1), ("d", n)]);
                    let lhs_b = s(&[
                        b(&m(&bp, &h), &m(&q, &h)),
                        c(-1, &b(&m(&p, &h), &m(&bq, &h))),
                    ]);
                    if -k_ + m_ - 1 != 0 {
                        let typo = mono(&[("a", k), ("b", ll), ("c", ll), ("d", n)]);
                        l.stated(grp, &lhs_b, &cm(2, &typo, "H"));
                    }
                    let prod_b = mono(&[("a", k), ("b", ll + 1), ("c", mm), ("d", n)]);
                    l.corrected(grp, &lhs_b, &cm(2, &prod_b, "H"));
                }
            }
        }
    }

    let grp = "moving H coefficients to V";
    let ring = Variety::Sl2.ring();
    let vf = &catalog(Variety::Sl2)["V"];
    for k in FAMILY_INDICES {
        for ll in FAMILY_INDICES {
            for mm in FAMILY_INDICES {
                for n in FAMILY_INDICES {
                    let p = mono(&[("a", k), ("b", ll), ("c", mm), ("d", n)]);
                    let pp = crate::algebra::parse_polynomial(&ring, &p).expect("monomial");
                    let vp = vf.apply(&pp).expect("same ring").to_text();
                    let lhs = b(&v, &m(&p, &h));
                    l.stated(grp, &lhs, &s(&[m(&vp, &h), m(&format!("2*{p}"), &v)]));
                    l.corrected(grp, &lhs, &s(&[m(&vp, &h), m(&format!("-2*{p}"), &v)]));
                }
            }
        }
    }
    l.out
}

pub fn identities(variety: Variety) -> Vec<Identity> {
    match variety {
        Variety::Quadric => quadric_identities(),
        Variety::Sl2 => sl2_identities(),
    }
}

/// Evaluates both sides of every identity exactly.
pub fn verify_ledger(variety: Variety) -> Result<LedgerReport, BracketError> {
    let env: BTreeMap<String, VectorField> = catalog(variety);
    let mut ev = Evaluator::new(&env);
    let mut results = Vec::new();
    for id in identities(variety) {
        let lhs = ev.eval(&id.lhs)?;
        let rhs = ev.eval(&id.rhs)?;
        let diff = lhs.checked_sub(&rhs)?;
        results.push(IdentityResult {
            group: id.group.clone(),
            name: id.name(),
            lhs: pretty(&id.lhs),
            form: id.form,
            pass: diff.is_zero(),
            difference: (!diff.is_zero()).then(|| diff.to_text()),
        });
    }
    Ok(LedgerReport { variety, results })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_readable() {
        let ids = identities(Variety::Quadric);
        let names: Vec<String> = ids.iter().map(Identity::name).collect();
        assert!(
            names.contains(&"[THETA, x*XI] = 2*z*XI + x*H".to_string()),
            "{:?}",
            &names[..8]
        );
        assert!(
            names.contains(&"[THETA, [THETA, [THETA, [THETA, x*XI]]]] = -24*y*THETA".to_string())
        );
    }

    #[test]
    fn single_identities() {
        let r = verify_ledger(Variety::Quadric).unwrap();
        let find = |n: &str| {
            r.results
                .iter()
                .find(|x| x.name == n)
                .unwrap_or_else(|| panic!("{n}"))
        };
        assert!(find("[THETA, [THETA, [THETA, [THETA, x*XI]]]] = -24*y*THETA").pass);
        assert!(find("[[THETA, x^2*XI], x*XI] = -8*x^3*XI").pass);
    }

    #[test]
    fn published_errors_have_passing_corrections() {
        let r = verify_ledger(Variety::Quadric).unwrap();
        let errata: Vec<&str> = r.errata().map(|e| e.name.as_str()).collect();
        assert_eq!(errata, ["[THETA, x*y*XI] = 2*x*y*XI - x*y*H"]);
        assert!(r.holds_with_corrections());
        assert!(!r.all_pass());
    }
}
