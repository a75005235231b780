//! Superspace representations of characteristic-polynomial ratios for
//! β = 2 in the three smallest cosets (0|1), (1|0) and (1|1).
//!
//! Every evaluator here returns the reduced partition function
//! Z = E[∏det(WW†−κ2²)/∏det(WW†−κ1²)] as the ratio I/N of two coset
//! integrals: I carries the sources, N is its large-|κ| limit
//! ∫dμ(Û) Q(Û) sdet^{n+ν}Û. The ratio is free of the measure constant and
//! of the normalization of Q.

mod micro;
mod radius;
mod unquenched;
mod weights;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyson::DysonIndex;
use crate::ensembles::{lorentz_bound, EnsembleSpec, RadialWeight};
use crate::error::{Error, Result};
use crate::quadrature::{self, Domain, Integral};
use crate::sources::SourcePack;
use crate::special::factorial;
use crate::superalg::{berezin, GrassmannElement, SuperMatrix};

pub use micro::{chiral_lagrangian_split, z_micro, z_micro_unquenched, MicroWeight};
pub use radius::adapted_radius;
pub use unquenched::{q_unquenched, z_unquenched_super};
pub use weights::{q_gaussian, q_lorentz, q_norm_dependent, q_quartic, MAX_QUARTIC_N};

/// The coset menu, labelled by (k1|k2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coset {
    /// (0|1): one fermionic source, FF block on a circle.
    Fermionic,
    /// (1|0): one bosonic source, BB block on the positive half-line.
    Bosonic,
    /// (1|1): one source of each kind.
    Mixed,
}

impl Coset {
    pub fn from_counts(k1: usize, k2: usize) -> Result<Self> {
        match (k1, k2) {
            (0, 1) => Ok(Self::Fermionic),
            (1, 0) => Ok(Self::Bosonic),
            (1, 1) => Ok(Self::Mixed),
            _ => Err(Error::Capability(format!(
                "superspace quadrature covers (0|1), (1|0), (1|1); got ({k1}|{k2})"
            ))),
        }
    }

    /// (k1, k2).
    pub fn counts(self) -> (usize, usize) {
        match self {
            Self::Fermionic => (0, 1),
            Self::Bosonic => (1, 0),
            Self::Mixed => (1, 1),
        }
    }

    /// k2 − k1.
    pub fn excess(self) -> isize {
        let (k1, k2) = self.counts();
        k2 as isize - k1 as isize
    }
}

/// A point of the integration domain of Û.
///
/// The compact FF entry is stored as the complex number on its circle, so
/// that the circle radius can be chosen per integral. The (1|1) point
/// carries the odd entries implicitly as the generators η₀ (BF) and η₁ (FB)
/// of a two-generator algebra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CosetPoint {
    Fermionic { u: Complex64 },
    Bosonic { x: f64 },
    Mixed { x: f64, y: Complex64 },
}

impl CosetPoint {
    pub fn coset(&self) -> Coset {
        match self {
            Self::Fermionic { .. } => Coset::Fermionic,
            Self::Bosonic { .. } => Coset::Bosonic,
            Self::Mixed { .. } => Coset::Mixed,
        }
    }

    pub fn num_generators(&self) -> usize {
        match self {
            Self::Mixed { .. } => 2,
            _ => 0,
        }
    }

    /// Û as a supermatrix.
    pub fn matrix(&self) -> SuperMatrix {
        let s = |ng, z: Complex64| GrassmannElement::scalar(ng, z);
        match *self {
            Self::Fermionic { u } => SuperMatrix::new(0, 1, 0, vec![s(0, u)]),
            Self::Bosonic { x } => SuperMatrix::new(1, 0, 0, vec![s(0, Complex64::new(x, 0.0))]),
            Self::Mixed { x, y } => SuperMatrix::new(
                1,
                1,
                2,
                vec![
                    s(2, Complex64::new(x, 0.0)),
                    GrassmannElement::generator(2, 0),
                    GrassmannElement::generator(2, 1),
                    s(2, y),
                ],
            ),
        }
        .expect("coset matrices are graded by construction")
    }
}

/// diag(bb; ff) over an algebra with `ng` generators.
pub(crate) fn diagonal(bb: &[Complex64], ff: &[Complex64], ng: usize) -> SuperMatrix {
    let p = bb.len();
    let d = p + ff.len();
    let entries = (0..d * d)
        .map(|k| {
            let (i, j) = (k / d, k % d);
            if i != j {
                GrassmannElement::zero(ng)
            } else if i < p {
                GrassmannElement::scalar(ng, bb[i])
            } else {
                GrassmannElement::scalar(ng, ff[i - p])
            }
        })
        .collect();
    SuperMatrix::new(p, ff.len(), ng, entries).expect("diagonal is graded")
}

/// Superfunction Q of a probability weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuperWeight {
    /// exp(−scale·str Û).
    Gaussian { scale: f64 },
    /// One-fold radial integral of a norm-dependent profile.
    NormDependent { p: RadialWeight },
    /// sdet^{n + (k2−k1) − μ}(Γ² + Û).
    Lorentz { gamma: f64, mu: f64 },
    /// Quartic potential through an auxiliary Hermitian matrix integral.
    Quartic { alpha: f64, alpha_hat: f64 },
    /// Gaussian weight with one massive flavor, inner contour in U.
    Unquenched { mass: f64 },
}

impl SuperWeight {
    /// The superfunction of an ordinary-space weight. Correlated and
    /// fixed-trace weights have dedicated entry points.
    pub fn from_ensemble(spec: &EnsembleSpec, n: usize) -> Result<Self> {
        match spec {
            EnsembleSpec::Gaussian { scale } => Ok(Self::Gaussian {
                scale: scale.unwrap_or(n as f64),
            }),
            EnsembleSpec::Lorentz { gamma, mu } => Ok(Self::Lorentz {
                gamma: *gamma,
                mu: *mu,
            }),
            EnsembleSpec::Quartic { alpha, alpha_hat } => Ok(Self::Quartic {
                alpha: *alpha,
                alpha_hat: *alpha_hat,
            }),
            EnsembleSpec::NormDependent { p } => Ok(Self::NormDependent { p: p.clone() }),
            EnsembleSpec::FixedTrace { .. } => Err(Error::Capability(
                "fixed trace has no analytic profile; use a norm-dependent narrow_gaussian".into(),
            )),
            EnsembleSpec::Correlated { .. } => Err(Error::Capability(
                "correlated weights go through z_correlated_left / z_correlated_right".into(),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::NormDependent { .. } => "norm_dependent",
            Self::Lorentz { .. } => "lorentz",
            Self::Quartic { .. } => "quartic",
            Self::Unquenched { .. } => "unquenched",
        }
    }

    pub fn validate(&self, n: usize, nu: usize, coset: Coset) -> Result<()> {
        match self {
            Self::Gaussian { scale } if *scale <= 0.0 => Err(Error::input("Gaussian scale must be positive")),
            Self::NormDependent { p } => p.validate(),
            Self::Lorentz { gamma, mu } => {
                if *gamma <= 0.0 {
                    return Err(Error::input("Lorentz width must be positive"));
                }
                let (k1, k2) = coset.counts();
                let bound = lorentz_bound(DysonIndex::Unitary, n, nu, k1, k2);
                if *mu <= bound {
                    return Err(Error::input(format!(
                        "Lorentz exponent μ = {mu} must exceed {bound} for convergence"
                    )));
                }
                Ok(())
            }
            Self::Quartic { alpha, .. } if *alpha <= 0.0 => Err(Error::input("quartic α must be positive")),
            Self::Unquenched { mass } => {
                if coset != Coset::Fermionic {
                    return Err(Error::Capability("the unquenched weight is evaluated in (0|1) only".into()));
                }
                if *mass <= 0.0 {
                    return Err(Error::input("mass must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Q(Û) at a coset point.
    pub fn evaluate(&self, pt: &CosetPoint, n: usize, nu: usize, cfg: &QuadConfig) -> Result<GrassmannElement> {
        let dyson = DysonIndex::Unitary;
        match self {
            Self::Gaussian { scale } => q_gaussian(pt, *scale),
            Self::NormDependent { p } => q_norm_dependent(p, pt, dyson, n, nu, cfg.inner_tol),
            Self::Lorentz { gamma, mu } => q_lorentz(pt, dyson, n, nu, *gamma, *mu),
            Self::Quartic { alpha, alpha_hat } => q_quartic(pt, dyson, n, nu, *alpha, *alpha_hat, cfg.inner_tol),
            Self::Unquenched { mass } => q_unquenched(pt, n, nu, *mass, cfg.inner_tol),
        }
    }

    /// Radius below which Q is analytic in the compact FF entry.
    pub fn analytic_radius(&self, n: usize, coset: Coset) -> f64 {
        match self {
            Self::Lorentz { gamma, mu } => {
                let e = mu - n as f64 - coset.excess() as f64;
                if coset == Coset::Fermionic && e >= 0.0 && e.fract() == 0.0 {
                    f64::INFINITY
                } else {
                    gamma * gamma
                }
            }
            Self::NormDependent {
                p: RadialWeight::Power { shift, .. },
            } => *shift,
            _ => f64::INFINITY,
        }
    }
}

/// How the circle radius of the compact FF entry is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusChoice {
    /// Minimizes the maximum modulus of the integrand on the circle.
    Adapted,
    Fixed(f64),
}

/// Quadrature settings of the coset integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    /// Relative tolerance of the outer coset integrals.
    pub rel_tol: f64,
    /// Tolerance of inner integrals (radial profile, auxiliary matrix, U).
    pub inner_tol: f64,
    /// Node cap per axis.
    pub max_nodes: usize,
    pub radius: RadiusChoice,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            inner_tol: 1e-12,
            max_nodes: 1 << 14,
            radius: RadiusChoice::Adapted,
        }
    }
}

/// Result of a superspace evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperValue {
    /// Z = raw / norm.
    pub value: Complex64,
    /// Propagated quadrature error estimate of `value`.
    pub err: f64,
    pub raw: Integral,
    pub norm: Integral,
}

impl SuperValue {
    fn from_parts(raw: Integral, norm: Integral) -> Result<Self> {
        if norm.value.norm() == 0.0 {
            return Err(Error::numeric("normalization integral vanishes"));
        }
        let value = raw.value / norm.value;
        let err = value.norm() * (raw.err / raw.value.norm().max(f64::MIN_POSITIVE) + norm.err / norm.value.norm());
        Ok(Self { value, err, raw, norm })
    }
}

/// Source-dependent factor sdet^{−1}(Û − κ²) for each source slot, raised
/// to the power n, times sdet^{n+ν}Û. `None` sources give the large-|κ|
/// normalization integrand.
fn source_factor(
    u: &SuperMatrix,
    sources: Option<(&[Complex64], &[Complex64])>,
    n: usize,
    nu: usize,
) -> Result<GrassmannElement> {
    let sdet = u.sdet()?;
    match sources {
        None => sdet.powi((n + nu) as i32),
        Some((k1, k2)) => {
            // (sdet Û / sdet(Û−κ²))^n stays representable where the two
            // factors separately would under- and overflow
            let ng = u.num_generators();
            let shifted = u.add(&diagonal(k1, k2, ng).scale(Complex64::new(-1.0, 0.0)))?;
            let ratio = &sdet * &shifted.sdet()?.inverse()?;
            Ok(&ratio.powi(n as i32)? * &sdet.powi(nu as i32)?)
        }
    }
}

/// Coset integral ∫dμ(Û) g(Û) where `g` returns an even element; the
/// Berezin integral over the (1|1) odd pair is taken inside.
pub(crate) fn coset_integral<G>(coset: Coset, g: G, radius: f64, cfg: &QuadConfig) -> Result<Integral>
where
    G: Fn(&CosetPoint) -> Result<GrassmannElement>,
{
    let fail = std::sync::Mutex::new(None::<Error>);
    let record = |e: Error| {
        let mut slot = fail.lock().unwrap();
        if slot.is_none() {
            *slot = Some(e);
        }
        Complex64::new(0.0, 0.0)
    };
    let result = match coset {
        Coset::Fermionic => quadrature::integrate_capped(
            |th| {
                let pt = CosetPoint::Fermionic {
                    u: Complex64::from_polar(radius, th),
                };
                g(&pt).map(|e| e.body()).unwrap_or_else(&record)
            },
            Domain::Circle,
            cfg.rel_tol,
            cfg.max_nodes,
        ),
        Coset::Bosonic => quadrature::integrate_capped(
            |x| {
                if x == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                g(&CosetPoint::Bosonic { x }).map(|e| e.body() / x).unwrap_or_else(&record)
            },
            Domain::HalfLine,
            cfg.rel_tol,
            cfg.max_nodes,
        ),
        Coset::Mixed => quadrature::integrate_2d(
            |x, th| {
                let y = Complex64::from_polar(radius, th);
                let pt = CosetPoint::Mixed { x, y };
                g(&pt)
                    .and_then(|e| berezin(&e, &[0, 1]))
                    .map(|b| b.body() * y)
                    .unwrap_or_else(&record)
            },
            Domain::HalfLine,
            cfg.rel_tol,
            cfg.max_nodes,
        ),
    };
    if let Some(e) = fail.into_inner().unwrap() {
        return Err(e);
    }
    result
}

/// Chooses the FF circle radius for an integrand, honouring the analytic
/// radius of the weight.
pub(crate) fn pick_radius<G>(coset: Coset, g: &G, r_max: f64, cfg: &QuadConfig) -> f64
where
    G: Fn(&CosetPoint) -> Result<GrassmannElement>,
{
    let cap = if r_max.is_finite() { 0.9 * r_max } else { 1e4 };
    match (cfg.radius, coset) {
        (RadiusChoice::Fixed(r), _) => r,
        (_, Coset::Bosonic) => 1.0,
        (_, Coset::Mixed) => cap.min(1.0),
        (_, Coset::Fermionic) => {
            let f = |u: Complex64| {
                g(&CosetPoint::Fermionic { u })
                    .map(|e| e.body())
                    .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
            };
            adapted_radius(&f, 1e-8, cap)
        }
    }
}

fn check_request(dyson: DysonIndex, n: usize, src: &SourcePack) -> Result<Coset> {
    if dyson != DysonIndex::Unitary {
        return Err(Error::Capability(format!(
            "superspace quadrature is implemented for β = 2 only (got β = {})",
            dyson.beta()
        )));
    }
    src.validate_for_superspace(dyson, n)?;
    let coset = Coset::from_counts(src.k1(), src.k2())?;
    for k in src.squared1() {
        if k.im == 0.0 && k.re >= 0.0 {
            return Err(Error::input(format!("bosonic source κ² = {k} lies on the integration contour")));
        }
    }
    Ok(coset)
}

/// The pair (I, N) of source and normalization integrals for the
/// integrand Q(Û)·extra(Û)·sdet^{−n}(Û−κ²)·sdet^{n+ν}Û.
fn integrate_pair<E>(
    weight: &SuperWeight,
    coset: Coset,
    n: usize,
    nu: usize,
    src: &SourcePack,
    extra: E,
    cfg: &QuadConfig,
) -> Result<SuperValue>
where
    E: Fn(&SuperMatrix, bool) -> Result<GrassmannElement>,
{
    weight.validate(n, nu, coset)?;
    let (k1, k2) = (src.squared1(), src.squared2());
    let make = |with_sources: bool| {
        let k1 = k1.clone();
        let k2 = k2.clone();
        let extra = &extra;
        move |pt: &CosetPoint| -> Result<GrassmannElement> {
            let u = pt.matrix();
            let q = weight.evaluate(pt, n, nu, cfg)?;
            let s = source_factor(&u, with_sources.then_some((&k1[..], &k2[..])), n, nu)?;
            Ok(&(&q * &s) * &extra(&u, with_sources)?)
        }
    };
    let r_max = weight.analytic_radius(n, coset);
    let gi = make(true);
    let gn = make(false);
    let ri = pick_radius(coset, &gi, r_max, cfg);
    let rn = pick_radius(coset, &gn, r_max, cfg);
    let raw = coset_integral(coset, gi, ri, cfg)?;
    let norm = coset_integral(coset, gn, rn, cfg)?;
    SuperValue::from_parts(raw, norm)
}

/// Reduced partition function Z = E[∏det(WW†−κ2²)/∏det(WW†−κ1²)] from
/// its superspace representation (β = 2, cosets (0|1), (1|0), (1|1)).
pub fn z_super(
    weight: &SuperWeight,
    dyson: DysonIndex,
    n: usize,
    nu: usize,
    src: &SourcePack,
    cfg: &QuadConfig,
) -> Result<SuperValue> {
    let coset = check_request(dyson, n, src)?;
    integrate_pair(weight, coset, n, nu, src, |u, _| Ok(GrassmannElement::one(u.num_generators())), cfg)
}

/// Left-correlated weight P(C^{−1/2}W) with an n×n correlation matrix given
/// by its eigenvalues: sdet^{−n}(Û−κ²) is replaced by
/// ∏_i sdet^{−1}(Û − κ²/c_i) and the result multiplied by det C^{k2−k1}.
pub fn z_correlated_left(
    weight: &SuperWeight,
    n: usize,
    nu: usize,
    c_eigenvalues: &[f64],
    src: &SourcePack,
    cfg: &QuadConfig,
) -> Result<SuperValue> {
    let coset = check_request(DysonIndex::Unitary, n, src)?;
    if c_eigenvalues.len() != n || c_eigenvalues.iter().any(|&c| c <= 0.0) {
        return Err(Error::input(format!("need {n} positive correlation eigenvalues")));
    }
    let (k1, k2) = (src.squared1(), src.squared2());
    // Undo the plain source factor and put the dressed one in its place.
    let extra = |u: &SuperMatrix, with_sources: bool| -> Result<GrassmannElement> {
        let ng = u.num_generators();
        if !with_sources {
            return Ok(GrassmannElement::one(ng));
        }
        let minus = Complex64::new(-1.0, 0.0);
        let plain = u.add(&diagonal(&k1, &k2, ng).scale(minus))?.sdet()?;
        let mut acc = plain.powi(n as i32)?;
        for &c in c_eigenvalues {
            let inv_c = Complex64::new(1.0 / c, 0.0);
            let d = diagonal(&k1, &k2, ng).scale(minus * inv_c);
            acc = &acc * &u.add(&d)?.sdet()?.inverse()?;
        }
        Ok(acc)
    };
    let mut out = integrate_pair(weight, coset, n, nu, src, extra, cfg)?;
    let det_c: f64 = c_eigenvalues.iter().product();
    let f = det_c.powi(coset.excess() as i32);
    out.value *= f;
    out.err *= f;
    Ok(out)
}

/// Right-correlated Gaussian weight exp(−n tr W C^{−1} W†) with an
/// (n+ν)×(n+ν) matrix C, one fermionic source, through the dual one-fold
/// representation
///
/// Z = n! ∮dθ/2π exp(str κ²Û) ∏_j sdet^{−1}(1 + c_j Û/n) sdet^{n}Û,
///
/// i.e. n!∮ u^{−n} e^{−κ²u} ∏_j(1 + c_j u/n). The constant n! is the
/// large-|κ| normalization.
pub fn z_correlated_right(
    n: usize,
    nu: usize,
    c_eigenvalues: &[f64],
    src: &SourcePack,
    cfg: &QuadConfig,
) -> Result<SuperValue> {
    if Coset::from_counts(src.k1(), src.k2())? != Coset::Fermionic {
        return Err(Error::Capability("right-correlated evaluation needs one fermionic source".into()));
    }
    if c_eigenvalues.len() != n + nu || c_eigenvalues.iter().any(|&c| c <= 0.0) {
        return Err(Error::input(format!("need {} positive correlation eigenvalues", n + nu)));
    }
    let k2 = src.squared2()[0];
    let nf = n as f64;
    let g = |pt: &CosetPoint| -> Result<GrassmannElement> {
        let u = pt.matrix();
        let ng = u.num_generators();
        let mut acc = (&diagonal(&[], &[k2], ng).mul(&u)?.str()).exp()?;
        for &c in c_eigenvalues {
            let d = u.scale(Complex64::new(c / nf, 0.0)).shift(Complex64::new(1.0, 0.0));
            acc = &acc * &d.sdet()?.inverse()?;
        }
        Ok(&acc * &u.sdet()?.powi(n as i32)?)
    };
    let r = pick_radius(Coset::Fermionic, &g, f64::INFINITY, cfg);
    let raw = coset_integral(Coset::Fermionic, g, r, cfg)?;
    let norm = Integral {
        value: Complex64::new(1.0 / factorial(n), 0.0),
        err: 0.0,
        nodes: 0,
    };
    SuperValue::from_parts(raw, norm)
}

#[cfg(test)]
mod tests;
