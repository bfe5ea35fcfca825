use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TransitivityError;
use crate::algebra::{same_ring, CoordinateRing};
use crate::fields::Point;
use crate::flows::ShearPoly;

pub const SAMPLES_PER_BALL: usize = 200;
pub const MAX_POWER: u32 = 32;

/// Rejection-sampling attempts allowed per requested sample.
const ATTEMPTS_PER_SAMPLE: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

/// `V = f(x) Xi + g(y) Theta`, with the sampled sup norms it achieved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaField {
    #[serde(with = "shear_text_x")]
    pub f: ShearPoly,
    #[serde(with = "shear_text_y")]
    pub g: ShearPoly,
    pub power: u32,
    /// Sampled sup of `|V|` over all balls but the last.
    pub sup_others: f64,
    /// Sampled sup of `|V - v0|` over the last ball.
    pub sup_last: f64,
}

macro_rules! shear_text {
    ($name:ident, $var:literal) => {
        mod $name {
            use crate::flows::ShearPoly;
            use serde::{de::Error, Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(p: &ShearPoly, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&p.to_text($var))
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ShearPoly, D::Error> {
                let text = String::deserialize(d)?;
                ShearPoly::parse(&text, $var).map_err(D::Error::custom)
            }
        }
    };
}
shear_text!(shear_text_x, "x");
shear_text!(shear_text_y, "y");

impl LemmaField {
    /// `V(p) = (2z g(y), 2z f(x), x f(x) + y g(y))`.
    pub fn eval(&self, p: &Point) -> [Complex64; 3] {
        let c = p.coords();
        let (f, g) = (self.f.eval(c[0]), self.g.eval(c[1]));
        [2.0 * c[2] * g, 2.0 * c[2] * f, c[0] * f + c[1] * g]
    }
}

fn disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex64 {
    Complex64::from_polar(
        radius * rng.random::<f64>().sqrt(),
        rng.random_range(0.0..TAU),
    )
}

/// The center followed by `n - 1` quadric points within the ball, drawn by
/// perturbing `(x, z)` and solving for `y`.
pub fn sample_ball<R: Rng + ?Sized>(ball: &Ball, n: usize, rng: &mut R) -> Vec<Point> {
    let c = ball.center.coords();
    let mut out = vec![ball.center.clone()];
    let mut attempts = 0;
    while out.len() < n && attempts < n * ATTEMPTS_PER_SAMPLE {
        attempts += 1;
        let x = c[0] + disk(rng, ball.radius);
        let z = c[2] + disk(rng, ball.radius);
        if x.norm() == 0.0 {
            continue;
        }
        let p = Point::unchecked(ball.center.ring(), vec![x, z * z / x, z]);
        if p.distance(&ball.center) <= ball.radius {
            out.push(p);
        }
    }
    out
}

fn norm3(v: &[Complex64; 3]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Polynomial shears whose field nearly vanishes on every ball but the last
/// and is close to `v0` on the last: `f = alpha * prod ((x - x_j)/(x_m - x_j))^k`,
/// `g` likewise in `y`, with `k` raised until the sampled bounds drop below `delta`.
pub fn lemma_approx_field<R: Rng + ?Sized>(
    balls: &[Ball],
    v0: &[Complex64],
    delta: f64,
    rng: &mut R,
) -> Result<LemmaField, TransitivityError> {
    let pre = |m: String| Err(TransitivityError::Precondition(m));
    let Some(last) = balls.last() else {
        return pre("no balls".into());
    };
    if v0.len() != 3 {
        return pre(format!(
            "tangent vector needs 3 entries, found {}",
            v0.len()
        ));
    }
    let quadric = CoordinateRing::quadric();
    for (i, b) in balls.iter().enumerate() {
        let c = b.center.coords();
        if !same_ring(b.center.ring(), &quadric) {
            return pre(format!("center {i} is not on the quadric"));
        }
        if c[0].norm() == 0.0 || c[1].norm() == 0.0 {
            return pre(format!("center {i} lies on S"));
        }
        for (j, o) in balls.iter().enumerate().take(i) {
            let d = o.center.coords();
            if c[0] == d[0] {
                return pre(format!("centers {j} and {i} share x"));
            }
            if c[1] == d[1] {
                return pre(format!("centers {j} and {i} share y"));
            }
        }
    }
    let c = last.center.coords();
    let (xm, ym, zm) = (c[0], c[1], c[2]);
    // tangent space at the center: y dx + x dy - 2z dz = 0
    let defect = (v0[0] * ym + v0[1] * xm - 2.0 * v0[2] * zm).norm();
    let v0_norm = v0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if defect > 1e-8 * v0_norm * last.center.norm().max(1.0) {
        return pre(format!(
            "v0 is not tangent at the last center (defect {defect:e})"
        ));
    }
    // f(xm) Xi + g(ym) Theta = v0 reads (2 z g, 2 z f, x f + y g) = v0
    let alpha = v0[1] / (2.0 * zm);
    let beta = v0[0] / (2.0 * zm);
    let v0 = [v0[0], v0[1], v0[2]];

    let others = &balls[..balls.len() - 1];
    let other_samples: Vec<Point> = others
        .iter()
        .flat_map(|b| sample_ball(b, SAMPLES_PER_BALL, rng))
        .collect();
    let last_samples = sample_ball(last, SAMPLES_PER_BALL, rng);
    let xs: Vec<Complex64> = others.iter().map(|b| b.center.coords()[0]).collect();
    let ys: Vec<Complex64> = others.iter().map(|b| b.center.coords()[1]).collect();

    let build = |k: u32| {
        let shear = |zeros: &[Complex64], at: Complex64, value: Complex64| {
            let mut roots = Vec::with_capacity(zeros.len() * k as usize);
            let mut denom = Complex64::new(1.0, 0.0);
            for r in zeros {
                for _ in 0..k {
                    roots.push(*r);
                    denom *= at - r;
                }
            }
            ShearPoly::new(value / denom, roots)
        };
        let mut field = LemmaField {
            f: shear(&xs, xm, alpha),
            g: shear(&ys, ym, beta),
            power: k,
            sup_others: 0.0,
            sup_last: 0.0,
        };
        field.sup_others = other_samples
            .iter()
            .map(|p| norm3(&field.eval(p)))
            .fold(0.0, f64::max);
        field.sup_last = last_samples
            .iter()
            .map(|p| {
                let v = field.eval(p);
                norm3(&[v[0] - v0[0], v[1] - v0[1], v[2] - v0[2]])
            })
            .fold(0.0, f64::max);
        field
    };

    let powers = if others.is_empty() {
        0..=0
    } else {
        1..=MAX_POWER
    };
    let mut best = f64::INFINITY;
    for k in powers {
        let field = build(k);
        if field.sup_others < delta && field.sup_last < delta {
            return Ok(field);
        }
        best = best.min(field.sup_others.max(field.sup_last));
    }
    Err(TransitivityError::Unachievable {
        delta,
        max_power: MAX_POWER,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ball(c: &[f64], r: f64) -> Ball {
        Ball {
            center: Point::real(&CoordinateRing::quadric(), c).unwrap(),
            radius: r,
        }
    }

    #[test]
    fn samples_stay_in_the_ball_and_on_the_quadric() {
        let b = ball(&[1.0, 4.0, 2.0], 0.05);
        let pts = sample_ball(&b, 200, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(pts.len(), 200);
        for p in &pts {
            assert!(p.distance(&b.center) <= 0.05);
            assert!(p.relation_defect() < 1e-12);
        }
    }

    #[test]
    fn single_ball_matches_at_the_center() {
        let b = ball(&[1.0, 4.0, 2.0], 0.05);
        // Xi at the center is (0, 4, 1)
        let v0 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(4e-4, 0.0),
            Complex64::new(1e-4, 0.0),
        ];
        let r = lemma_approx_field(
            std::slice::from_ref(&b),
            &v0,
            1e-3,
            &mut ChaCha8Rng::seed_from_u64(2),
        )
        .unwrap();
        let at = r.eval(&b.center);
        assert!((0..3).all(|i| (at[i] - v0[i]).norm() < 1e-15));
        assert!(r.sup_last < 1e-3);
    }

    #[test]
    fn zero_vector_gives_zero_field() {
        let balls = [ball(&[1.0, 1.0, 1.0], 0.05), ball(&[4.0, 4.0, 4.0], 0.05)];
        let zero = [Complex64::new(0.0, 0.0); 3];
        let r = lemma_approx_field(&balls, &zero, 1e-3, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(r.sup_others, 0.0);
        assert_eq!(r.sup_last, 0.0);
    }

    #[test]
    fn colliding_y_is_rejected() {
        let balls = [ball(&[1.0, 1.0, 1.0], 0.05), ball(&[4.0, 1.0, -2.0], 0.05)];
        let zero = [Complex64::new(0.0, 0.0); 3];
        assert!(matches!(
            lemma_approx_field(&balls, &zero, 1e-3, &mut ChaCha8Rng::seed_from_u64(4)),
            Err(TransitivityError::Precondition(_))
        ));
    }

    #[test]
    fn two_balls_from_the_example() {
        let balls = [ball(&[1.0, 1.0, 1.0], 0.05), ball(&[4.0, 4.0, 4.0], 0.05)];
        // 2e-4 * Xi + 1e-4 * Theta at (4, 4, 4)
        let v0 = [
            Complex64::new(8e-4, 0.0),
            Complex64::new(16e-4, 0.0),
            Complex64::new(12e-4, 0.0),
        ];
        let r = lemma_approx_field(&balls, &v0, 1e-3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(r.power <= 8);
        assert!(r.sup_others < 1e-3 && r.sup_last < 1e-3);
    }
}
