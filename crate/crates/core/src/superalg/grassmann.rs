use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of generators a monomial bit set can hold.
pub const MAX_GENERATORS: usize = 32;

/// Element of the Grassmann algebra over `num_generators` generators with
/// complex coefficients.
///
/// A monomial is a set of generators stored as a bit mask; the canonical
/// order of a monomial is increasing generator index, i.e. mask `0b101`
/// stands for η₀η₂.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannElement {
    num_generators: usize,
    terms: BTreeMap<u32, Complex64>,
}

/// Sign picked up when the monomial `a` is multiplied from the right by `b`
/// and the product is brought into canonical order.
fn product_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += ((a as u64) >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl GrassmannElement {
    pub fn zero(num_generators: usize) -> Self {
        assert!(
            num_generators <= MAX_GENERATORS,
            "at most {MAX_GENERATORS} generators are supported"
        );
        Self {
            num_generators,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(num_generators: usize, c: Complex64) -> Self {
        let mut g = Self::zero(num_generators);
        g.insert(0, c);
        g
    }

    pub fn real(num_generators: usize, x: f64) -> Self {
        Self::scalar(num_generators, Complex64::new(x, 0.0))
    }

    pub fn one(num_generators: usize) -> Self {
        Self::real(num_generators, 1.0)
    }

    /// The generator η_i.
    pub fn generator(num_generators: usize, i: usize) -> Self {
        assert!(i < num_generators, "generator index out of range");
        let mut g = Self::zero(num_generators);
        g.insert(1 << i, Complex64::new(1.0, 0.0));
        g
    }

    pub fn from_terms(
        num_generators: usize,
        terms: impl IntoIterator<Item = (u32, Complex64)>,
    ) -> Result<Self> {
        if num_generators > MAX_GENERATORS {
            return Err(Error::Capability(format!(
                "{num_generators} generators exceed the capacity of {MAX_GENERATORS}"
            )));
        }
        let limit = if num_generators == 32 {
            u64::MAX
        } else {
            (1u64 << num_generators) - 1
        };
        let mut g = Self::zero(num_generators);
        for (mask, c) in terms {
            if mask as u64 > limit {
                return Err(Error::Structure(format!(
                    "monomial {mask:#b} uses generators beyond {num_generators}"
                )));
            }
            g.insert(mask, c);
        }
        Ok(g)
    }

    fn insert(&mut self, mask: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(mask).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&mask);
        }
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, mask: u32) -> Complex64 {
        self.terms.get(&mask).copied().unwrap_or_default()
    }

    /// Coefficient of the empty monomial.
    pub fn body(&self) -> Complex64 {
        self.coeff(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn even_part(&self) -> Self {
        self.filtered(|m| m.count_ones() % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filtered(|m| m.count_ones() % 2 == 1)
    }

    /// Everything except the body.
    pub fn soul(&self) -> Self {
        self.filtered(|m| m != 0)
    }

    fn filtered(&self, keep: impl Fn(u32) -> bool) -> Self {
        Self {
            num_generators: self.num_generators,
            terms: self
                .terms
                .iter()
                .filter(|(&m, _)| keep(m))
                .map(|(&m, &c)| (m, c))
                .collect(),
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.num_generators);
        for (&m, &c) in &self.terms {
            out.insert(m, c * s);
        }
        out
    }

    pub fn add_scalar(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.insert(0, s);
        out
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.num_generators != other.num_generators {
            return Err(Error::Structure(format!(
                "operands over {} and {} generators",
                self.num_generators, other.num_generators
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.insert(m, c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zero(self.num_generators);
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                out.insert(a | b, ca * cb * product_sign(a, b));
            }
        }
        Ok(out)
    }

    /// Inverse of an even element with non-zero body, via the terminating
    /// geometric series in the nilpotent part.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::input("only even elements are inverted"));
        }
        let b = self.body();
        if b == Complex64::new(0.0, 0.0) {
            return Err(Error::Singular("element has zero body".into()));
        }
        let inv_b = b.inv();
        let x = self.soul().scale(-inv_b);
        let mut sum = Self::one(self.num_generators);
        let mut power = Self::one(self.num_generators);
        loop {
            power = &power * &x;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(inv_b))
    }

    /// Integer power of an even element (negative powers need an
    /// invertible body).
    pub fn powi(&self, k: i32) -> Result<Self> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut result = Self::one(self.num_generators);
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(result)
    }

    /// Power with real exponent of an even element, principal branch at the
    /// body. Integer exponents fall back to [`Self::powi`].
    pub fn powf(&self, p: f64) -> Result<Self> {
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            return self.powi(p as i32);
        }
        lift_scalar(|z, k| power_derivatives(z, p, k), self)
    }

    pub fn exp(&self) -> Result<Self> {
        lift_scalar(|z, k| vec![z.exp(); k + 1], self)
    }

    /// Applies `f` coefficient-wise to the complex coefficients.
    pub fn map_coeffs(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = Self::zero(self.num_generators);
        for (&m, &c) in &self.terms {
            out.insert(m, f(c));
        }
        out
    }

    /// Re-embeds the element into an algebra with more generators.
    pub fn extend(&self, num_generators: usize) -> Result<Self> {
        if num_generators < self.num_generators {
            return Err(Error::Structure("cannot shrink the generator set".into()));
        }
        Self::from_terms(num_generators, self.terms())
    }

    /// Debug dump, one `mask: re,im` line per monomial in increasing mask
    /// order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (&m, &c) in &self.terms {
            s.push_str(&format!("{m:#b}: {:.17e},{:.17e}\n", c.re, c.im));
        }
        s
    }

    /// Distance in the max norm of coefficients.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (&m, &c) in &self.terms {
            d = d.max((c - other.coeff(m)).norm());
        }
        for (&m, &c) in &other.terms {
            if !self.terms.contains_key(&m) {
                d = d.max(c.norm());
            }
        }
        d
    }
}

/// Product of two elements; fails when the generator sets differ.
pub fn gmul(a: &GrassmannElement, b: &GrassmannElement) -> Result<GrassmannElement> {
    a.try_mul(b)
}

/// Iterated Berezin integral ∫dη_{g1} … ∫dη_{gk} f.
///
/// The last listed generator is integrated first. A single integral acts as
/// a derivative from the right, so ∫dη η = 1, ∫dη 1 = 0 and
/// ∫dη̄ dη η̄η = 1.
pub fn berezin(f: &GrassmannElement, generators: &[usize]) -> Result<GrassmannElement> {
    for (i, &g) in generators.iter().enumerate() {
        if g >= f.num_generators {
            return Err(Error::input(format!("generator {g} out of range")));
        }
        if generators[..i].contains(&g) {
            return Err(Error::input(format!("generator {g} listed twice")));
        }
    }
    let mut current = f.clone();
    for &g in generators.iter().rev() {
        let bit = 1u32 << g;
        let mut next = GrassmannElement::zero(f.num_generators);
        for (m, c) in current.terms() {
            if m & bit == 0 {
                continue;
            }
            let after = ((m as u64) >> (g + 1)).count_ones();
            let sign = if after % 2 == 0 { 1.0 } else { -1.0 };
            next.insert(m & !bit, c * sign);
        }
        current = next;
    }
    Ok(current)
}

/// Evaluates a scalar function on an even element through its Taylor
/// series around the body.
///
/// `f(z, k)` must return the derivatives f(z), f'(z), …, f^{(k)}(z). The
/// series terminates because the soul is nilpotent; when fewer derivatives
/// are supplied than the nilpotency order requires a capability error is
/// returned.
pub fn lift_scalar<F>(f: F, x: &GrassmannElement) -> Result<GrassmannElement>
where
    F: Fn(Complex64, usize) -> Vec<Complex64>,
{
    if !x.is_even() {
        return Err(Error::input("lift_scalar needs an even argument"));
    }
    let n = x.num_generators;
    let body = x.body();
    let soul = x.soul();
    let mut powers = vec![GrassmannElement::one(n)];
    loop {
        let next = powers.last().unwrap() * &soul;
        if next.is_zero() {
            break;
        }
        powers.push(next);
    }
    let order = powers.len() - 1;
    let derivs = f(body, order);
    if derivs.len() < order + 1 {
        return Err(Error::Capability(format!(
            "{} derivatives supplied, {} needed",
            derivs.len(),
            order + 1
        )));
    }
    let mut out = GrassmannElement::zero(n);
    let mut factorial = 1.0;
    for (k, p) in powers.iter().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        out = &out + &p.scale(derivs[k] / factorial);
    }
    Ok(out)
}

/// Derivatives of z ↦ z^p up to order `k`.
pub fn power_derivatives(z: Complex64, p: f64, k: usize) -> Vec<Complex64> {
    let integer = p.fract() == 0.0;
    let mut out = Vec::with_capacity(k + 1);
    let mut coeff = 1.0;
    for j in 0..=k {
        let e = p - j as f64;
        let value = if integer {
            if coeff == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z.powi(e as i32)
            }
        } else {
            z.powf(e)
        };
        out.push(value * coeff);
        coeff *= e;
    }
    out
}

impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_add(rhs).expect("Grassmann addition")
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_add(&-rhs).expect("Grassmann subtraction")
    }
}

impl Mul for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_mul(rhs).expect("Grassmann product")
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl AddAssign<&GrassmannElement> for GrassmannElement {
    fn add_assign(&mut self, rhs: &GrassmannElement) {
        assert_eq!(self.num_generators, rhs.num_generators);
        for (&m, &c) in &rhs.terms {
            self.insert(m, c);
        }
    }
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&m, &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for i in 0..self.num_generators {
                if m & (1 << i) != 0 {
                    write!(f, "η{i}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn anticommutation() {
        let e1 = GrassmannElement::generator(2, 0);
        let e2 = GrassmannElement::generator(2, 1);
        let a = &e1 * &e2;
        let b = &e2 * &e1;
        assert_eq!(a.coeff(0b11), c(1.0));
        assert_eq!(b.coeff(0b11), c(-1.0));
        assert!((&e1 * &e1).is_zero());
    }

    #[test]
    fn nilpotent_product_is_one() {
        let e1 = GrassmannElement::generator(1, 0);
        let one = GrassmannElement::one(1);
        let a = &one + &e1;
        let b = &one - &e1;
        assert_eq!(&a * &b, one);
    }

    #[test]
    fn expansion_of_two_even_factors() {
        let g = |i| GrassmannElement::generator(4, i);
        let a = (&g(0) * &g(1)).add_scalar(c(2.0));
        let b = (&g(2) * &g(3)).add_scalar(c(3.0));
        let p = &a * &b;
        assert_eq!(p.body(), c(6.0));
        assert_eq!(p.coeff(0b0011), c(3.0));
        assert_eq!(p.coeff(0b1100), c(2.0));
        assert_eq!(p.coeff(0b1111), c(1.0));
        assert_eq!(p.num_terms(), 4);
    }

    #[test]
    fn mismatched_generators_error() {
        let a = GrassmannElement::one(2);
        let b = GrassmannElement::one(3);
        assert!(matches!(gmul(&a, &b), Err(Error::Structure(_))));
    }

    #[test]
    fn berezin_conventions() {
        let eta = GrassmannElement::generator(1, 0);
        let f = eta.scale(c(5.0)).add_scalar(c(3.0));
        assert_eq!(berezin(&f, &[0]).unwrap().body(), c(5.0));
        // generators: 0 = η̄, 1 = η
        let a = c(2.5);
        let bar = GrassmannElement::generator(2, 0);
        let eta = GrassmannElement::generator(2, 1);
        let expo = (&bar * &eta).scale(a).exp().unwrap();
        assert_eq!(berezin(&expo, &[0, 1]).unwrap().body(), a);
        let constant = GrassmannElement::real(2, 7.0);
        assert!(berezin(&constant, &[0, 1]).unwrap().is_zero());
    }

    #[test]
    fn lift_exp_and_identity() {
        let bar = GrassmannElement::generator(2, 0);
        let eta = GrassmannElement::generator(2, 1);
        let x = (&bar * &eta).add_scalar(c(0.7));
        let e = x.exp().unwrap();
        assert!((e.body() - c(0.7f64.exp())).norm() < 1e-15);
        assert!((e.coeff(0b11) - c(0.7f64.exp())).norm() < 1e-15);
        let id = lift_scalar(|z, k| {
            let mut v = vec![z, c(1.0)];
            v.resize(k + 1, c(0.0));
            v
        }, &x)
        .unwrap();
        assert_eq!(id, x);
    }

    #[test]
    fn lift_needs_enough_derivatives() {
        let g = |i| GrassmannElement::generator(4, i);
        let x = (&(&g(0) * &g(1)) + &(&g(2) * &g(3))).add_scalar(c(1.0));
        let r = lift_scalar(|z, _| vec![z, c(1.0)], &x);
        assert!(matches!(r, Err(Error::Capability(_))));
    }

    #[test]
    fn inverse_of_even_element() {
        let g = |i| GrassmannElement::generator(4, i);
        let x = (&(&g(0) * &g(1)).scale(c(0.3)) + &(&g(2) * &g(3)).scale(c(-1.1)))
            .add_scalar(Complex64::new(2.0, 1.0));
        let inv = x.inverse().unwrap();
        let one = &x * &inv;
        assert!(one.distance(&GrassmannElement::one(4)) < 1e-15);
    }
}
