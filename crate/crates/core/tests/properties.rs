use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use liegen_core::algebra::{
    parse_polynomial, reduce, CoordinateRing, GaussRational, Monomial, Polynomial, Rational, Ring,
    Variety,
};
use liegen_core::fields::{bracket, catalog, evaluate, generator, shear_xi, Point, VectorField};
use liegen_core::flows::{
    flow, flow_exact_point, polynomial_flow, FlowKind, FlowProgram, ShearPoly,
};
use liegen_core::transitivity::{plan_multi, verify_certificate, MoveCertificate, MoveRequest};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Terms `(exponents, numerator, denominator)` with exponents `<= 3`.
fn terms(n_vars: usize) -> impl Strategy<Value = Vec<(Vec<u32>, i64, i64)>> {
    prop::collection::vec(
        (prop::collection::vec(0u32..=3, n_vars), -5i64..=5, 1i64..=4),
        0..6,
    )
}

/// Drops exponents beyond the first `n` variables.
fn cut(t: Vec<(Vec<u32>, i64, i64)>, n: usize) -> Vec<(Vec<u32>, i64, i64)> {
    t.into_iter()
        .map(|(mut e, c, d)| {
            e.truncate(n);
            (e, c, d)
        })
        .collect()
}

fn build(ring: &Ring, t: &[(Vec<u32>, i64, i64)]) -> Polynomial {
    Polynomial::from_terms(
        ring,
        t.iter()
            .map(|(e, n, d)| (Monomial::from_exponents(e), rat(*n, *d))),
    )
}

fn relation(ring: &Ring) -> Polynomial {
    Polynomial::from_terms(&ring.ambient(), ring.relation_terms().iter().cloned())
}

fn variety() -> impl Strategy<Value = Variety> {
    prop_oneof![Just(Variety::Quadric), Just(Variety::Sl2)]
}

fn quadric_point(x: (f64, f64), z: (f64, f64)) -> Point {
    let x = c64(x.0, x.1);
    let z = c64(z.0, z.1);
    Point::new(&CoordinateRing::quadric(), vec![x, z * z / x, z]).unwrap()
}

fn sl2_point(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Point {
    let (a, b, c) = (c64(a.0, a.1), c64(b.0, b.1), c64(c.0, c.1));
    Point::new(&CoordinateRing::sl2(), vec![a, b, c, (1.0 + b * c) / a]).unwrap()
}

/// A complex number with modulus in `[0.5, 2]`.
fn unit_scale() -> impl Strategy<Value = (f64, f64)> {
    (0.5f64..2.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, th)| (r * th.cos(), r * th.sin()))
}

fn small() -> impl Strategy<Value = (f64, f64)> {
    (-1.5f64..1.5, -1.5f64..1.5)
}

fn point_for(v: Variety) -> BoxedStrategy<Point> {
    match v {
        Variety::Quadric => (unit_scale(), small())
            .prop_map(|(x, z)| quadric_point(x, z))
            .boxed(),
        Variety::Sl2 => (unit_scale(), small(), small())
            .prop_map(|(a, b, c)| sl2_point(a, b, c))
            .boxed(),
    }
}

fn simple_kind() -> impl Strategy<Value = FlowKind> {
    prop::sample::select(FlowKind::SIMPLE_NAMES.to_vec()).prop_map(|n| FlowKind::simple(n).unwrap())
}

fn rel_err(a: &Point, b: &Point) -> f64 {
    a.distance(b) / a.norm().max(1.0)
}

/// `D_H` escapes at `t = 1/d`; keep away from it.
fn well_inside(kind: &FlowKind, p: &Point, t: f64) -> bool {
    *kind != FlowKind::DH || (p.coords()[3] * t).norm() < 0.5
}

/// Bracket of ambient coefficient tuples with no reduction until the end.
fn ambient_bracket(ring: &Ring, a: &[Polynomial], b: &[Polynomial]) -> Vec<Polynomial> {
    let apply = |f: &[Polynomial], p: &Polynomial| {
        f.iter()
            .enumerate()
            .fold(Polynomial::zero(p.ring()), |acc, (j, fj)| {
                &acc + &(fj * &p.derivative(j))
            })
    };
    (0..a.len())
        .map(|i| reduce(&(&apply(a, &b[i]) - &apply(b, &a[i])), ring).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn reduce_is_idempotent(v in variety(), t in terms(4)) {
        let ring = v.ring();
        let t = cut(t, ring.n_vars());
        let p = build(&ring.ambient(), &t);
        let r = reduce(&p, &ring).unwrap();
        prop_assert_eq!(reduce(&r.to_ring(&ring.ambient()).unwrap(), &ring).unwrap(), r.clone());
        prop_assert!(r.degree() <= p.degree());
    }

    #[test]
    fn reduce_is_a_ring_morphism(v in variety(), s in terms(4), t in terms(4)) {
        let ring = v.ring();
        let amb = ring.ambient();
        let (p, q) = (build(&amb, &cut(s, ring.n_vars())), build(&amb, &cut(t, ring.n_vars())));
        let (rp, rq) = (reduce(&p, &ring).unwrap(), reduce(&q, &ring).unwrap());
        prop_assert_eq!(reduce(&(&p + &q), &ring).unwrap(), &rp + &rq);
        prop_assert_eq!(reduce(&(&p * &q), &ring).unwrap(), &rp * &rq);
    }

    #[test]
    fn multiples_of_the_relation_reduce_to_zero(v in variety(), t in terms(4)) {
        let ring = v.ring();
        let t = cut(t, ring.n_vars());
        let s = build(&ring.ambient(), &t);
        prop_assert!(reduce(&(&relation(&ring) * &s), &ring).unwrap().is_zero());
    }

    #[test]
    fn text_round_trips(v in variety(), t in terms(4)) {
        let ring = v.ring();
        let t = cut(t, ring.n_vars());
        for r in [ring.ambient(), ring.clone()] {
            let p = build(&r, &t);
            prop_assert_eq!(parse_polynomial(&r, &p.to_text()).unwrap(), p);
        }
    }
}

/// A catalog field times a normal-form monomial of degree `<= 3`.
fn multiple(v: Variety) -> impl Strategy<Value = VectorField> {
    let ring = v.ring();
    let names: Vec<String> = catalog(v).keys().cloned().collect();
    let monos = ring.normal_monomials(3);
    (
        prop::sample::select(names),
        prop::sample::select(monos),
        -3i64..=3,
    )
        .prop_map(move |(n, m, c)| {
            let p = Polynomial::monomial(&ring, m, rat(if c == 0 { 1 } else { c }, 1));
            catalog(v)[&n].mul_poly(&p).unwrap()
        })
}

fn triple() -> impl Strategy<Value = (VectorField, VectorField, VectorField)> {
    variety().prop_flat_map(|v| (multiple(v), multiple(v), multiple(v)))
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn jacobi_identity((a, b, c) in triple()) {
        let abc = bracket(&a, &bracket(&b, &c).unwrap()).unwrap();
        let bca = bracket(&b, &bracket(&c, &a).unwrap()).unwrap();
        let cab = bracket(&c, &bracket(&a, &b).unwrap()).unwrap();
        prop_assert!(abc.checked_add(&bca).unwrap().checked_add(&cab).unwrap().is_zero());
    }

    #[test]
    fn tangency_is_closed((a, b, _) in triple(), t in terms(4)) {
        let ring = a.ring().clone();
        let t = cut(t, ring.n_vars());
        prop_assert!(bracket(&a, &b).unwrap().is_tangent());
        prop_assert!(a.mul_poly(&build(&ring, &t)).unwrap().is_tangent());
    }

    #[test]
    fn bracket_ignores_the_ideal((a, b, _) in triple(), shifts in prop::collection::vec(terms(4), 4)) {
        let ring = a.ring().clone();
        let amb = ring.ambient();
        let n = ring.n_vars();
        let lift = |f: &VectorField| -> Vec<Polynomial> {
            f.coeffs().iter().map(|c| c.to_ring(&amb).unwrap()).collect()
        };
        let (la, lb) = (lift(&a), lift(&b));
        let rel = relation(&ring);
        let shifted: Vec<Polynomial> = la
            .iter()
            .zip(&shifts)
            .map(|(c, t)| {
                c + &(&rel * &build(&amb, &cut(t.clone(), n)))
            })
            .collect();
        let expected = bracket(&a, &b).unwrap();
        prop_assert_eq!(ambient_bracket(&ring, &la, &lb), expected.coeffs().to_vec());
        prop_assert_eq!(ambient_bracket(&ring, &shifted, &lb), expected.coeffs().to_vec());
    }
}

fn kind_and_point() -> impl Strategy<Value = (FlowKind, Point)> {
    simple_kind().prop_flat_map(|k| {
        let v = k.variety();
        (Just(k), point_for(v))
    })
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn flows_form_a_group(((kind, p), s, t) in (kind_and_point(), -1.0f64..1.0, -1.0f64..1.0)) {
        prop_assume!(well_inside(&kind, &p, s.abs() + t.abs()));
        let once = flow(&kind, c64(s + t, 0.0), &p).unwrap();
        let twice = flow(&kind, c64(s, 0.0), &flow(&kind, c64(t, 0.0), &p).unwrap()).unwrap();
        prop_assert!(rel_err(&once, &twice) <= 1e-10, "{} {:e}", kind, rel_err(&once, &twice));
    }

    #[test]
    fn flows_stay_on_the_variety(((kind, p), t) in (kind_and_point(), -2.0f64..2.0)) {
        prop_assume!(well_inside(&kind, &p, t));
        let q = flow(&kind, c64(t, 0.0), &p).unwrap();
        prop_assert!(q.relation_defect() <= 1e-10 * p.norm().powi(2).max(1.0), "{} {:e}", kind, q.relation_defect());
    }

    #[test]
    fn flow_derivative_is_the_field((kind, p) in kind_and_point()) {
        let h = 1e-5;
        let fwd = flow(&kind, c64(h, 0.0), &p).unwrap();
        let back = flow(&kind, c64(-h, 0.0), &p).unwrap();
        let v = evaluate(&generator(kind.variety(), kind.field_name().unwrap()).unwrap(), &p).unwrap();
        for (i, vi) in v.iter().enumerate() {
            let d = (fwd.coords()[i] - back.coords()[i]) / (2.0 * h);
            prop_assert!((d - vi).norm() <= 1e-6 * vi.norm().max(1.0), "{} {}", kind, i);
        }
    }

    #[test]
    fn polynomial_flows_compose_exactly(
        kind in prop::sample::select(vec![FlowKind::Theta, FlowKind::Xi, FlowKind::XXi, FlowKind::VSl2, FlowKind::WSl2]),
        coords in prop::collection::vec((-9i64..=9, 1i64..=5), 3),
        s in (-6i64..=6, 1i64..=4),
        t in (-6i64..=6, 1i64..=4),
    ) {
        let g = |(n, d): (i64, i64)| GaussRational::new(rat(n, d), Rational::from_integer(0.into()));
        let a = g(coords[0]);
        prop_assume!(!a.is_zero());
        let p = match kind.variety() {
            Variety::Quadric => vec![a.clone(), &(&g(coords[1]) * &g(coords[1])) * &inv(&a), g(coords[1])],
            Variety::Sl2 => {
                let (b, c) = (g(coords[1]), g(coords[2]));
                let d = &(&GaussRational::from_integer(1) + &(&b * &c)) * &inv(&a);
                vec![a, b, c, d]
            }
        };
        let (s, t) = (g(s), g(t));
        let once = flow_exact_point(&kind, &(&s + &t), &p).unwrap();
        let twice = flow_exact_point(&kind, &s, &flow_exact_point(&kind, &t, &p).unwrap()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn shears_fix_their_fibers_exactly(
        x0 in (-9i64..=9, 1i64..=5),
        other in prop::collection::vec(-5i64..=5, 0..3),
        z in (-9i64..=9, 1i64..=5),
        t in (-6i64..=6, 1i64..=4),
    ) {
        prop_assume!(x0.0 != 0);
        let x0 = rat(x0.0, x0.1);
        let mut zeros = vec![c64(x0.to_f64().unwrap(), 0.0)];
        zeros.extend(other.iter().map(|&r| c64(r as f64, 0.0)));
        let f = ShearPoly::lagrange(&zeros, c64(0.5, 0.25), c64(1.0, 0.0));
        let x = GaussRational::from_complex(zeros[0]).unwrap();
        let z = GaussRational::new(rat(z.0, z.1), Rational::from_integer(0.into()));
        let p = vec![x.clone(), &(&z * &z) * &inv(&x), z];
        let t = GaussRational::new(rat(t.0, t.1), Rational::from_integer(0.into()));
        let kind = FlowKind::ShearFXi(f);
        prop_assert_eq!(flow_exact_point(&kind, &t, &p).unwrap(), p.clone());
        let numeric = Point::unchecked(&CoordinateRing::quadric(), p.iter().map(|c| c.to_complex()).collect());
        prop_assert_eq!(flow(&kind, t.to_complex(), &numeric).unwrap(), numeric);
    }

    #[test]
    fn shear_flows_have_unit_jacobian(roots in prop::collection::vec(-4i64..=4, 0..4), scale in -3i64..=3) {
        // (x, z) -> (x, z + t f(x) x) in the chart x != 0
        let ring = CoordinateRing::affine(&["x", "y", "z", "t"]);
        let f = ShearPoly::new(c64(scale as f64, 0.0), roots.iter().map(|&r| c64(r as f64, 0.0)).collect());
        let coords: Vec<Polynomial> = (0..3).map(|i| Polynomial::var(&ring, i)).collect();
        let img = polynomial_flow(&FlowKind::ShearFXi(f), &coords, &Polynomial::var(&ring, 3)).unwrap();
        let (x, z) = (&img[0], &img[2]);
        let det = &(&x.derivative(0) * &z.derivative(2)) - &(&x.derivative(2) * &z.derivative(0));
        prop_assert!(det.is_one());
    }
}

fn inv(a: &GaussRational) -> GaussRational {
    let n = &(&a.re * &a.re) + &(&a.im * &a.im);
    GaussRational::new(&a.re / &n, -(&a.im / &n))
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn random_requests_are_planned_and_verified(
        pts in prop::collection::vec((unit_scale(), small()), 2..=8),
        seed in any::<u64>(),
    ) {
        let m = pts.len() / 2;
        let all: Vec<Point> = pts.iter().map(|&(x, z)| quadric_point(x, z)).collect();
        let req = MoveRequest::new(all[..m].to_vec(), all[m..2 * m].to_vec(), 1e-8);
        prop_assume!(req.is_ok());
        let req = req.unwrap();
        let cert = plan_multi(&req, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let report = verify_certificate(&cert, &req);
        prop_assert!(report.pass, "{:?}", report);

        let text = serde_json::to_string(&cert).unwrap();
        let back: MoveCertificate = serde_json::from_str(&text).unwrap();
        prop_assert!(verify_certificate(&back, &req).pass);
        let prog: FlowProgram = serde_json::from_str(&serde_json::to_string(&cert.program()).unwrap()).unwrap();
        prop_assert_eq!(prog, cert.program());
    }
}

#[test]
fn shear_of_a_constant_is_the_catalog_field() {
    let ring = CoordinateRing::quadric();
    let f = ShearPoly::constant(c64(3.0, 0.0));
    let p = quadric_point((1.5, 0.0), (0.5, -0.25));
    let v = FlowKind::ShearFXi(f).velocity(&p).unwrap();
    let expected = evaluate(&shear_xi(&Polynomial::integer(&ring, 3)).unwrap(), &p).unwrap();
    assert_eq!(v, expected);
}
