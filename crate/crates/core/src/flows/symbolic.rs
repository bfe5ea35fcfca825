use super::{FlowError, FlowKind};
use crate::algebra::{CoordinateRing, GaussRational, Polynomial, Rational, Ring, Variety};
use crate::fields::{generator, VectorField};

/// Ambient variables of the variety followed by the time `t`.
pub fn symbolic_ring(variety: Variety) -> Ring {
    match variety {
        Variety::Quadric => CoordinateRing::affine(&["x", "y", "z", "t"]),
        Variety::Sl2 => CoordinateRing::affine(&["a", "b", "c", "d", "t"]),
    }
}

fn not_polynomial(kind: &FlowKind) -> FlowError {
    FlowError::NotPolynomial(kind.to_string())
}

/// The polynomial flow formula with polynomial arguments in any ring.
pub fn polynomial_flow(
    kind: &FlowKind,
    coords: &[Polynomial],
    t: &Polynomial,
) -> Result<Vec<Polynomial>, FlowError> {
    let ring = t.ring();
    let two = Polynomial::integer(ring, 2);
    let xi = |s: &Polynomial| {
        let (x, y, z) = (&coords[0], &coords[1], &coords[2]);
        let st = s * t;
        vec![
            x.clone(),
            &(y + &(&(&two * &st) * z)) + &(&(&st * &st) * x),
            z + &(&st * x),
        ]
    };
    let theta = |s: &Polynomial| {
        let (x, y, z) = (&coords[0], &coords[1], &coords[2]);
        let st = s * t;
        vec![
            &(x + &(&(&two * &st) * z)) + &(&(&st * &st) * y),
            y.clone(),
            z + &(&st * y),
        ]
    };
    let one = Polynomial::one(ring);
    Ok(match kind {
        FlowKind::Theta => theta(&one),
        FlowKind::Xi => xi(&one),
        FlowKind::XXi => xi(&coords[0]),
        FlowKind::ShearFXi(f) => xi(&f
            .eval_polynomial(&coords[0])
            .ok_or_else(|| not_polynomial(kind))?),
        FlowKind::ShearGTheta(g) => theta(
            &g.eval_polynomial(&coords[1])
                .ok_or_else(|| not_polynomial(kind))?,
        ),
        FlowKind::VSl2 => vec![
            &coords[0] + &(t * &coords[2]),
            &coords[1] + &(t * &coords[3]),
            coords[2].clone(),
            coords[3].clone(),
        ],
        FlowKind::WSl2 => vec![
            coords[0].clone(),
            coords[1].clone(),
            &coords[2] + &(t * &coords[0]),
            &coords[3] + &(t * &coords[1]),
        ],
        _ => return Err(not_polynomial(kind)),
    })
}

/// Flow components as polynomials in the coordinates and `t`, in
/// [`symbolic_ring`].
pub fn flow_exact_symbolic(kind: &FlowKind) -> Result<Vec<Polynomial>, FlowError> {
    let ring = symbolic_ring(kind.variety());
    let n = ring.n_vars() - 1;
    let coords: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(&ring, i)).collect();
    polynomial_flow(kind, &coords, &Polynomial::var(&ring, n))
}

/// Whether the defining relation composed with the flow is identically the
/// relation, as polynomials in the coordinates and `t`.
pub fn preserves_relation(kind: &FlowKind) -> Result<bool, FlowError> {
    let comps = flow_exact_symbolic(kind)?;
    let ring = comps[0].ring().clone();
    let relation = Polynomial::from_terms(
        &ring,
        kind.variety().ring().relation_terms().iter().cloned(),
    );
    let mut images = comps;
    images.push(Polynomial::var(&ring, ring.n_vars() - 1));
    Ok(relation
        .substitute(&images)
        .map_err(crate::fields::FieldError::from)?
        == relation)
}

/// Exact image in Q(i) of a polynomial flow.
pub fn flow_exact_point(
    kind: &FlowKind,
    t: &GaussRational,
    p: &[GaussRational],
) -> Result<Vec<GaussRational>, FlowError> {
    let two = GaussRational::from_integer(2);
    let one = GaussRational::from_integer(1);
    let inexact = || FlowError::Parse(format!("{kind}: coefficient is not a finite double"));
    let xi = |s: &GaussRational| {
        let st = s * t;
        vec![
            p[0].clone(),
            &(&p[1] + &(&(&two * &st) * &p[2])) + &(&(&st * &st) * &p[0]),
            &p[2] + &(&st * &p[0]),
        ]
    };
    let theta = |s: &GaussRational| {
        let st = s * t;
        vec![
            &(&p[0] + &(&(&two * &st) * &p[2])) + &(&(&st * &st) * &p[1]),
            p[1].clone(),
            &p[2] + &(&st * &p[1]),
        ]
    };
    Ok(match kind {
        FlowKind::Theta => theta(&one),
        FlowKind::Xi => xi(&one),
        FlowKind::XXi => xi(&p[0]),
        FlowKind::ShearFXi(f) => xi(&f.eval_exact(&p[0]).ok_or_else(inexact)?),
        FlowKind::ShearGTheta(g) => theta(&g.eval_exact(&p[1]).ok_or_else(inexact)?),
        FlowKind::VSl2 => vec![
            &p[0] + &(t * &p[2]),
            &p[1] + &(t * &p[3]),
            p[2].clone(),
            p[3].clone(),
        ],
        FlowKind::WSl2 => vec![
            p[0].clone(),
            p[1].clone(),
            &p[2] + &(t * &p[0]),
            &p[3] + &(t * &p[1]),
        ],
        _ => return Err(not_polynomial(kind)),
    })
}

/// Transport of `field` by the time-`t` map `phi` of a polynomial flow:
/// component `i` is `field(phi_i)` composed with `phi_{-t}`.
pub fn pushforward(
    kind: &FlowKind,
    t: &Rational,
    field: &VectorField,
) -> Result<VectorField, FlowError> {
    let ring = field.ring();
    let coords: Vec<Polynomial> = (0..ring.n_vars())
        .map(|i| Polynomial::var(ring, i))
        .collect();
    let forward = polynomial_flow(kind, &coords, &Polynomial::constant(ring, t.clone()))?;
    let backward = polynomial_flow(kind, &coords, &Polynomial::constant(ring, -t))?;
    let mut comps = Vec::with_capacity(forward.len());
    for phi in &forward {
        let d = field.apply(phi)?;
        comps.push(
            d.substitute(&backward)
                .map_err(crate::fields::FieldError::from)?,
        );
    }
    Ok(VectorField::new(ring, comps)?)
}

fn combo(terms: &[(&str, Rational)]) -> Result<VectorField, FlowError> {
    let mut acc = VectorField::zero(&Variety::Quadric.ring());
    for (name, c) in terms {
        acc = acc.checked_add(&generator(Variety::Quadric, name)?.scale(c))?;
    }
    Ok(acc)
}

/// `Xi` transported by the time-`t` flow of `Theta`, paired with `Xi - tH - t^2 Theta`.
pub fn pullback_check(t: &Rational) -> Result<(VectorField, VectorField), FlowError> {
    let moved = pushforward(&FlowKind::Theta, t, &generator(Variety::Quadric, "XI")?)?;
    let one = Rational::from_integer(1.into());
    let expected = combo(&[("XI", one), ("H", -t), ("THETA", -(t * t))])?;
    Ok((moved, expected))
}

/// `Theta` transported by the time-`t` flow of `Xi`, paired with `Theta + tH - t^2 Xi`.
pub fn pullback_check_theta(t: &Rational) -> Result<(VectorField, VectorField), FlowError> {
    let moved = pushforward(&FlowKind::Xi, t, &generator(Variety::Quadric, "THETA")?)?;
    let one = Rational::from_integer(1.into());
    let expected = combo(&[("THETA", one), ("H", t.clone()), ("XI", -(t * t))])?;
    Ok((moved, expected))
}
