use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Check, ComparisonReport};
use crate::error::Result;
use crate::quadrature::{self, Domain};
use crate::superalg::{
    berezin, lift_scalar, random_invertible, GrassmannElement, RectSuperMatrix, SuperMatrix,
};

const SHAPES: [(usize, usize); 6] = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)];

/// Largest |str(AB) − str(BA)| over random pairs of each shape up to (2|2).
pub fn supertrace_cyclicity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (p, q) in SHAPES {
        let a = random_invertible(p, q, 4, rng);
        let b = random_invertible(p, q, 4, rng);
        let d = a.mul(&b)?.str().distance(&b.mul(&a)?.str());
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Largest relative |sdet(AB) − sdet A sdet B| over shapes up to (2|2).
pub fn sdet_multiplicativity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (p, q) in SHAPES {
        let a = random_invertible(p, q, 4, rng);
        let b = random_invertible(p, q, 4, rng);
        let lhs = a.mul(&b)?.sdet()?;
        let rhs = &a.sdet()? * &b.sdet()?;
        worst = worst.max(lhs.distance(&rhs) / rhs.max_abs());
    }
    Ok(worst)
}

/// Deviation from the conventions ∫dη η = 1, ∫dη 1 = 0, ∫dη̄dη η̄η = 1 and
/// ∫dη̄dη e^{aη̄η} = a.
pub fn berezin_conventions() -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let eta = GrassmannElement::generator(2, 0);
    let bar = GrassmannElement::generator(2, 1);
    let a = Complex64::new(0.7, -0.3);
    let gauss = (&bar * &eta).scale(a).exp()?;
    let cases = [
        (berezin(&eta, &[0])?.body(), one),
        (berezin(&GrassmannElement::one(2), &[0])?.body(), Complex64::new(0.0, 0.0)),
        (berezin(&(&bar * &eta), &[1, 0])?.body(), one),
        (berezin(&gauss, &[1, 0])?.body(), a),
    ];
    Ok(cases.iter().map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Largest |str((VV†)^m) − str((V†V)^m)| for m = 1..=4 over random V of
/// the given shape; generators come in conjugate pairs.
pub fn duality_deviation(rows: (usize, usize), cols: (usize, usize), pairs: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let v = RectSuperMatrix::random(rows, cols, 2 * pairs, rng);
    let vd = v.adjoint(pairs)?;
    let left = v.mul(&vd)?.into_square()?;
    let right = vd.mul(&v)?.into_square()?;
    let mut worst: f64 = 0.0;
    for m in 1..=4 {
        let d = left.powi(m)?.str().distance(&right.powi(m)?.str());
        worst = worst.max(d);
    }
    Ok(worst)
}

fn test_profile(t: Complex64, k: usize) -> Vec<Complex64> {
    // F(t) = (1 + t + t²)e^{−t}; F^{(j)} = P_j e^{−t} with P_{j+1} = P_j' − P_j
    let mut poly = vec![1.0, 1.0, 1.0];
    let mut out = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        let val: Complex64 = poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c);
        out.push(val * (-t).exp());
        let deriv: Vec<f64> = (1..poly.len()).map(|i| i as f64 * poly[i]).chain([0.0]).collect();
        poly = poly.iter().zip(&deriv).map(|(p, d)| d - p).collect();
    }
    out
}

/// Cauchy-like theorem for the (1|1)×(1|0) supervector V = (z, η):
/// ∫d²z/π dη dη̄ F(V†V) = F(0), with F(t) = (1+t+t²)e^{−t}. Returns
/// (left side by Berezin integration and 2D quadrature, right side).
pub fn cauchy_instance() -> Result<(Complex64, Complex64)> {
    let fail = std::cell::RefCell::new(None);
    let integrand = |rho: f64, th: f64| -> Result<Complex64> {
        let z = Complex64::from_polar(rho, th);
        let v = RectSuperMatrix::new(
            (1, 1),
            (1, 0),
            2,
            vec![GrassmannElement::scalar(2, z), GrassmannElement::generator(2, 0)],
        )?;
        let norm = v.adjoint(1)?.mul(&v)?.into_square()?;
        let f = lift_scalar(test_profile, norm.get(0, 0))?;
        Ok(berezin(&f, &[0, 1])?.body() * 2.0 * rho)
    };
    let lhs = quadrature::integrate_2d(
        |rho, th| {
            integrand(rho, th).unwrap_or_else(|e| {
                fail.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            })
        },
        Domain::HalfLine,
        1e-10,
        quadrature::NODE_CAP,
    );
    if let Some(e) = fail.into_inner() {
        return Err(e);
    }
    Ok((lhs?.value, test_profile(Complex64::new(0.0, 0.0), 0)[0]))
}

/// Checks that a random square supermatrix satisfies sdet(e^M) = e^{str M}
/// through the exact algebra; used as an extra consistency line.
fn sdet_exp_trace(rng: &mut ChaCha8Rng) -> Result<f64> {
    let m = random_invertible(1, 1, 4, rng).scale(Complex64::new(0.2, 0.0));
    let mut term = SuperMatrix::identity(1, 1, 4);
    let mut sum = term.clone();
    for k in 1..30 {
        term = term.mul(&m)?.scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term)?;
    }
    Ok(sum.sdet()?.distance(&m.str().exp()?))
}

/// The algebraic identity suite with randomized inputs.
pub fn identity_suite(seed: u64) -> Result<ComparisonReport> {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        Check::deterministic("str cyclicity, shapes up to (2|2)", supertrace_cyclicity(&mut rng)?, 1e-12),
        Check::deterministic("sdet multiplicativity, shapes up to (2|2)", sdet_multiplicativity(&mut rng)?, 1e-12),
        Check::deterministic("Berezin conventions", berezin_conventions()?, 1e-15),
        Check::deterministic("sdet exp = exp str, (1|1)", sdet_exp_trace(&mut rng)?, 1e-12),
    ];
    checks.push(Check::deterministic(
        "duality m ≤ 4, (2|1)×(2|0)",
        duality_deviation((2, 1), (2, 0), 3, &mut rng)?,
        1e-10,
    ));
    checks.push(Check::deterministic(
        "duality m ≤ 4, (1|2)×(3|0)",
        duality_deviation((1, 2), (3, 0), 3, &mut rng)?,
        1e-10,
    ));
    let (lhs, rhs) = cauchy_instance()?;
    checks.push(Check::relative("Cauchy-like theorem, (1|1)×(1|0)", lhs, rhs, 1e-6));
    Ok(ComparisonReport::new("identities", checks, vec![seed], start))
}
