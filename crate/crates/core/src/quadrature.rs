//! Deterministic quadrature: Gauss rules, composite Gauss–Legendre on
//! intervals and the half-line, periodic trapezoid on the circle, and node
//! doubling with relative-error control.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::gamma;

/// Largest number of nodes per axis the doubling ladder will use.
pub const NODE_CAP: usize = 1 << 16;

const PANEL: usize = 16;
const START: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RuleKind {
    Legendre,
    Hermite,
    Laguerre { alpha: f64 },
    PeriodicTrapezoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mapping {
    /// Affine map of [−1, 1] onto [a, b].
    Interval { a: f64, b: f64 },
    /// x = t/(1−t) after mapping [−1, 1] onto [0, 1).
    HalfLine,
}

/// Nodes and weights of a one-dimensional rule.
///
/// Gauss rules integrate against their classical weight (1 on [−1, 1],
/// e^{−x²} on ℝ, x^α e^{−x} on ℝ₊); the periodic trapezoid rule integrates
/// over θ ∈ [0, 2π) with the normalized measure dθ/2π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub mapping: Option<Mapping>,
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn golub_welsch(diag: Vec<f64>, off: Vec<f64>, mass: f64) -> (Vec<f64>, Vec<f64>) {
    let m = diag.len();
    let mut j = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        j[(i, i)] = diag[i];
        if i + 1 < m {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

impl QuadratureRule {
    /// m-point Gauss–Legendre rule on [−1, 1], nodes by Newton iteration.
    pub fn gauss_legendre(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..(m + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(m, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(m, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self {
            kind: RuleKind::Legendre,
            nodes,
            weights,
            mapping: None,
        }
    }

    /// m-point Gauss–Hermite rule for the weight e^{−x²}.
    pub fn gauss_hermite(m: usize) -> Self {
        let diag = vec![0.0; m];
        let off = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let (nodes, weights) = golub_welsch(diag, off, PI.sqrt());
        Self {
            kind: RuleKind::Hermite,
            nodes,
            weights,
            mapping: None,
        }
    }

    /// m-point generalized Gauss–Laguerre rule for x^α e^{−x} on ℝ₊.
    pub fn gauss_laguerre(m: usize, alpha: f64) -> Self {
        let diag = (0..m).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
        let off = (1..m).map(|k| (k as f64 * (k as f64 + alpha)).sqrt()).collect();
        let (nodes, weights) = golub_welsch(diag, off, gamma(alpha + 1.0));
        Self {
            kind: RuleKind::Laguerre { alpha },
            nodes,
            weights,
            mapping: None,
        }
    }

    /// m-point trapezoid rule on the circle with weights 1/m.
    pub fn periodic_trapezoid(m: usize) -> Self {
        Self {
            kind: RuleKind::PeriodicTrapezoid,
            nodes: (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect(),
            weights: vec![1.0 / m as f64; m],
            mapping: None,
        }
    }

    /// Transforms a Legendre rule so that it integrates with dx over the
    /// mapped domain.
    pub fn mapped(mut self, mapping: Mapping) -> Result<Self> {
        if self.kind != RuleKind::Legendre || self.mapping.is_some() {
            return Err(Error::input("only plain Legendre rules can be mapped"));
        }
        for (x, w) in self.nodes.iter_mut().zip(self.weights.iter_mut()) {
            match mapping {
                Mapping::Interval { a, b } => {
                    *w *= 0.5 * (b - a);
                    *x = a + 0.5 * (b - a) * (*x + 1.0);
                }
                Mapping::HalfLine => {
                    let t = 0.5 * (*x + 1.0);
                    *w *= 0.5 / ((1.0 - t) * (1.0 - t));
                    *x = t / (1.0 - t);
                }
            }
        }
        self.mapping = Some(mapping);
        Ok(self)
    }

    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// Integration domain for the adaptive drivers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// θ ∈ [0, 2π) with the normalized measure dθ/2π.
    Circle,
    /// [a, b] with dx.
    Interval(f64, f64),
    /// [0, ∞) with dx.
    HalfLine,
    /// ℝ with dx, truncated to [−half_width, half_width]; the integrand must
    /// be negligible beyond.
    Line { half_width: f64 },
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: Complex64,
    /// Change between the last two ladder levels.
    pub err: f64,
    pub nodes: usize,
}

fn composite_legendre(domain: Domain, panels: usize, base: &QuadratureRule) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi, half_line) = match domain {
        Domain::Interval(a, b) => (a, b, false),
        Domain::HalfLine => (0.0, 1.0, true),
        _ => unreachable!("composite rule only on intervals"),
    };
    let h = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * base.nodes.len());
    let mut weights = Vec::with_capacity(panels * base.nodes.len());
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            let t = a + 0.5 * h * (x + 1.0);
            let wt = 0.5 * h * w;
            if half_line {
                nodes.push(t / (1.0 - t));
                weights.push(wt / ((1.0 - t) * (1.0 - t)));
            } else {
                nodes.push(t);
                weights.push(wt);
            }
        }
    }
    (nodes, weights)
}

struct Ladder {
    domain: Domain,
    base: QuadratureRule,
    level: usize,
    // trapezoid state for the nested rules
    sums: Vec<Complex64>,
    abs_sum: Vec<f64>,
    count: usize,
}

impl Ladder {
    fn new(domain: Domain) -> Self {
        Self {
            domain,
            base: QuadratureRule::gauss_legendre(PANEL),
            level: 0,
            sums: Vec::new(),
            abs_sum: Vec::new(),
            count: 0,
        }
    }

    /// Advances one level and returns (estimate, L1 norms, nodes used).
    fn step<F: Fn(f64) -> Vec<Complex64>>(&mut self, f: &F) -> (Vec<Complex64>, Vec<f64>, usize) {
        let level = self.level;
        self.level += 1;
        match self.domain {
            Domain::Circle | Domain::Line { .. } => {
                let (new_nodes, m) = if level == 0 {
                    ((0..START).collect::<Vec<_>>(), START)
                } else {
                    let m = 2 * self.count;
                    ((0..m).filter(|j| j % 2 == 1).collect(), m)
                };
                let (x0, span) = match self.domain {
                    Domain::Circle => (0.0, 2.0 * PI),
                    Domain::Line { half_width } => (-half_width, 2.0 * half_width),
                    _ => unreachable!(),
                };
                let periodic = matches!(self.domain, Domain::Circle);
                for j in new_nodes {
                    let x = x0 + span * j as f64 / m as f64;
                    let v = f(x);
                    if self.sums.is_empty() {
                        self.sums = vec![Complex64::new(0.0, 0.0); v.len()];
                        self.abs_sum = vec![0.0; v.len()];
                    }
                    for (k, z) in v.iter().enumerate() {
                        self.sums[k] += z;
                        self.abs_sum[k] += z.norm();
                    }
                }
                if !periodic && level == 0 {
                    // endpoint x0 + span is the only extra node of the closed rule
                    let v = f(x0 + span);
                    for (k, z) in v.iter().enumerate() {
                        self.sums[k] += z;
                        self.abs_sum[k] += z.norm();
                    }
                }
                self.count = m;
                let (scale, used) = if periodic {
                    (1.0 / m as f64, m)
                } else {
                    (span / m as f64, m + 1)
                };
                let mut est: Vec<Complex64> = self.sums.iter().map(|s| s * scale).collect();
                if !periodic {
                    // trapezoid end corrections, endpoints carry half weight
                    let a = f(x0);
                    let b = f(x0 + span);
                    for k in 0..est.len() {
                        est[k] -= (a[k] + b[k]) * (0.5 * scale);
                    }
                }
                let l1 = self.abs_sum.iter().map(|s| s * scale).collect();
                (est, l1, used)
            }
            Domain::Interval(..) | Domain::HalfLine => {
                let panels = 1usize << level;
                let (nodes, weights) = composite_legendre(self.domain, panels, &self.base);
                let mut est: Vec<Complex64> = Vec::new();
                let mut l1: Vec<f64> = Vec::new();
                for (&x, &w) in nodes.iter().zip(&weights) {
                    let v = f(x);
                    if est.is_empty() {
                        est = vec![Complex64::new(0.0, 0.0); v.len()];
                        l1 = vec![0.0; v.len()];
                    }
                    for (k, z) in v.iter().enumerate() {
                        est[k] += z * w;
                        l1[k] += z.norm() * w;
                    }
                }
                (est, l1, nodes.len())
            }
        }
    }
}

fn converged(prev: &[Complex64], cur: &[Complex64], l1: &[f64], rel_tol: f64) -> (bool, f64) {
    let diff = prev
        .iter()
        .zip(cur)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale = cur.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let l1max = l1.iter().copied().fold(0.0, f64::max);
    let ok = diff <= rel_tol * scale || diff <= 64.0 * f64::EPSILON * l1max;
    (ok, diff)
}

/// Vector-valued adaptive integration: doubles the node count until the
/// sup-norm change between two levels is below `rel_tol` relative to the
/// result, or at the rounding floor of the integrand's L1 norm.
pub fn integrate_vec<F>(f: F, domain: Domain, rel_tol: f64, max_nodes: usize) -> Result<(Vec<Complex64>, Integral)>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    let cap = max_nodes.min(NODE_CAP);
    let mut ladder = Ladder::new(domain);
    let (mut prev, _, _) = ladder.step(&f);
    loop {
        let (cur, l1, used) = ladder.step(&f);
        if cur.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numeric("integrand produced a non-finite value"));
        }
        let (ok, diff) = converged(&prev, &cur, &l1, rel_tol);
        let summary = Integral {
            value: cur.first().copied().unwrap_or_default(),
            err: diff,
            nodes: used,
        };
        if ok {
            return Ok((cur, summary));
        }
        if 2 * used > cap {
            return Err(Error::Convergence {
                msg: format!("node cap {cap} reached on {domain:?}"),
                best: summary.value,
                err: diff,
            });
        }
        prev = cur;
    }
}

/// Scalar adaptive integration with the default node cap.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, domain: Domain, rel_tol: f64) -> Result<Integral> {
    integrate_capped(f, domain, rel_tol, NODE_CAP)
}

pub fn integrate_capped<F: Fn(f64) -> Complex64>(
    f: F,
    domain: Domain,
    rel_tol: f64,
    max_nodes: usize,
) -> Result<Integral> {
    integrate_vec(|x| vec![f(x)], domain, rel_tol, max_nodes).map(|(_, i)| i)
}

/// Nested integration of f(x, θ) with x on an interval or the half-line
/// (composite Gauss–Legendre, panels doubled) and θ on the circle (dθ/2π).
/// The θ rule is refined separately at every x node by nested trapezoid
/// doubling, so smooth periodic directions stay cheap.
pub fn integrate_2d<F>(f: F, x_domain: Domain, rel_tol: f64, max_nodes_per_axis: usize) -> Result<Integral>
where
    F: Fn(f64, f64) -> Complex64,
{
    if !matches!(x_domain, Domain::Interval(..) | Domain::HalfLine) {
        return Err(Error::input("first axis must be an interval or the half-line"));
    }
    let base = QuadratureRule::gauss_legendre(PANEL);
    let cap = max_nodes_per_axis.min(NODE_CAP);
    let circle = |x: f64| -> Result<(Complex64, f64, usize)> {
        let mut m = START;
        let mut sum: Complex64 = (0..m).map(|j| f(x, 2.0 * PI * j as f64 / m as f64)).sum();
        let mut l1: f64 = 0.0;
        loop {
            let fresh: Vec<Complex64> = (0..m).map(|j| f(x, PI * (2 * j + 1) as f64 / m as f64)).collect();
            let prev = sum / m as f64;
            sum += fresh.iter().sum::<Complex64>();
            l1 = l1.max(fresh.iter().map(|z| z.norm()).sum::<f64>() / m as f64);
            m *= 2;
            let cur = sum / m as f64;
            let (ok, _) = converged(&[prev], &[cur], &[l1], rel_tol);
            if ok {
                return Ok((cur, l1, m));
            }
            if 2 * m > cap {
                return Err(Error::Convergence {
                    msg: format!("circle node cap {cap} reached at x = {x}"),
                    best: cur,
                    err: (cur - prev).norm(),
                });
            }
        }
    };
    let mut prev: Option<Complex64> = None;
    let mut level = 0;
    loop {
        let (xs, wx) = composite_legendre(x_domain, 1 << level, &base);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut l1 = 0.0;
        let mut nodes = 0;
        for (&x, &w) in xs.iter().zip(&wx) {
            let (v, a, m) = circle(x)?;
            sum += v * w;
            l1 += a * w;
            nodes += m;
        }
        if !sum.re.is_finite() || !sum.im.is_finite() {
            return Err(Error::numeric("integrand produced a non-finite value"));
        }
        if let Some(p) = prev {
            let (ok, diff) = converged(&[p], &[sum], &[l1], rel_tol);
            if ok {
                return Ok(Integral { value: sum, err: diff, nodes });
            }
            if 2 * xs.len() > cap {
                return Err(Error::Convergence {
                    msg: format!("2D node cap {cap} reached"),
                    best: sum,
                    err: diff,
                });
            }
        }
        prev = Some(sum);
        level += 1;
    }
}
