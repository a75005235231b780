use num_complex::Complex64;

use super::grassmann::GrassmannElement;
use crate::error::{Error, Result};

/// Square supermatrix of dimensions (p|q) over a Grassmann algebra.
///
/// Entries are stored row-major over the full (p+q)×(p+q) grid; the first
/// p rows/columns form the boson sector. Diagonal blocks hold even
/// elements, off-diagonal blocks odd ones.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix {
    p: usize,
    q: usize,
    num_generators: usize,
    entries: Vec<GrassmannElement>,
}

pub(crate) fn check_grading(
    entries: &[GrassmannElement],
    num_generators: usize,
    rows: (usize, usize),
    cols: (usize, usize),
) -> Result<()> {
    let width = cols.0 + cols.1;
    if entries.len() != (rows.0 + rows.1) * width {
        return Err(Error::Structure(format!(
            "{} entries for a ({}|{})×({}|{}) supermatrix",
            entries.len(),
            rows.0,
            rows.1,
            cols.0,
            cols.1
        )));
    }
    for (k, e) in entries.iter().enumerate() {
        if e.num_generators() != num_generators {
            return Err(Error::Structure("entries over different generator sets".into()));
        }
        let (i, j) = (k / width, k % width);
        let even = (i < rows.0) == (j < cols.0);
        if even && !e.is_even() {
            return Err(Error::Structure(format!("entry ({i},{j}) must be even")));
        }
        if !even && !e.is_odd() && !e.is_zero() {
            return Err(Error::Structure(format!("entry ({i},{j}) must be odd")));
        }
    }
    Ok(())
}

/// Row-major product of two grids of Grassmann elements.
pub(crate) fn grid_mul(
    a: &[GrassmannElement],
    b: &[GrassmannElement],
    rows: usize,
    inner: usize,
    cols: usize,
    num_generators: usize,
) -> Vec<GrassmannElement> {
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = GrassmannElement::zero(num_generators);
            for k in 0..inner {
                acc += &(&a[i * inner + k] * &b[k * cols + j]);
            }
            out.push(acc);
        }
    }
    out
}

impl SuperMatrix {
    pub fn new(p: usize, q: usize, num_generators: usize, entries: Vec<GrassmannElement>) -> Result<Self> {
        check_grading(&entries, num_generators, (p, q), (p, q))?;
        Ok(Self {
            p,
            q,
            num_generators,
            entries,
        })
    }

    /// Assembles a supermatrix from its four blocks given as rows.
    pub fn from_blocks(
        bb: Vec<Vec<GrassmannElement>>,
        bf: Vec<Vec<GrassmannElement>>,
        fb: Vec<Vec<GrassmannElement>>,
        ff: Vec<Vec<GrassmannElement>>,
        num_generators: usize,
    ) -> Result<Self> {
        let p = bb.len();
        let q = ff.len();
        let bad = bb.iter().any(|r| r.len() != p)
            || ff.iter().any(|r| r.len() != q)
            || bf.len() != p
            || bf.iter().any(|r| r.len() != q)
            || fb.len() != q
            || fb.iter().any(|r| r.len() != p);
        if bad {
            return Err(Error::Structure("block shapes do not fit".into()));
        }
        let mut entries = Vec::with_capacity((p + q) * (p + q));
        for (left, right) in bb.into_iter().zip(bf) {
            entries.extend(left);
            entries.extend(right);
        }
        for (left, right) in fb.into_iter().zip(ff) {
            entries.extend(left);
            entries.extend(right);
        }
        Self::new(p, q, num_generators, entries)
    }

    pub fn identity(p: usize, q: usize, num_generators: usize) -> Self {
        let d = p + q;
        let entries = (0..d * d)
            .map(|k| {
                if k / d == k % d {
                    GrassmannElement::one(num_generators)
                } else {
                    GrassmannElement::zero(num_generators)
                }
            })
            .collect();
        Self {
            p,
            q,
            num_generators,
            entries,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn get(&self, i: usize, j: usize) -> &GrassmannElement {
        &self.entries[i * (self.p + self.q) + j]
    }

    pub fn entries(&self) -> &[GrassmannElement] {
        &self.entries
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<Vec<GrassmannElement>> {
        rows.map(|i| cols.clone().map(|j| self.get(i, j).clone()).collect())
            .collect()
    }

    pub fn bb(&self) -> Vec<Vec<GrassmannElement>> {
        self.block(0..self.p, 0..self.p)
    }

    pub fn bf(&self) -> Vec<Vec<GrassmannElement>> {
        self.block(0..self.p, self.p..self.p + self.q)
    }

    pub fn fb(&self) -> Vec<Vec<GrassmannElement>> {
        self.block(self.p..self.p + self.q, 0..self.p)
    }

    pub fn ff(&self) -> Vec<Vec<GrassmannElement>> {
        self.block(self.p..self.p + self.q, self.p..self.p + self.q)
    }

    /// tr BB − tr FF.
    pub fn str(&self) -> GrassmannElement {
        let mut s = GrassmannElement::zero(self.num_generators);
        for i in 0..self.p + self.q {
            if i < self.p {
                s += self.get(i, i);
            } else {
                s += &-self.get(i, i);
            }
        }
        s
    }

    /// Berezinian det(BB − BF·FF⁻¹·FB) / det FF.
    pub fn sdet(&self) -> Result<GrassmannElement> {
        let ng = self.num_generators;
        let ff = self.ff();
        if self.q == 0 {
            return even_det(&self.bb(), ng);
        }
        let ff_inv = even_inverse(&ff, ng)?;
        let det_ff = even_det(&ff, ng)?;
        if self.p == 0 {
            return det_ff.inverse();
        }
        let bf = self.bf();
        let fb = self.fb();
        let mut schur = self.bb();
        for i in 0..self.p {
            for j in 0..self.p {
                let mut corr = GrassmannElement::zero(ng);
                for k in 0..self.q {
                    for l in 0..self.q {
                        corr += &(&(&bf[i][k] * &ff_inv[k][l]) * &fb[l][j]);
                    }
                }
                schur[i][j] = &schur[i][j] - &corr;
            }
        }
        let det_schur = even_det(&schur, ng)?;
        Ok(&det_schur * &det_ff.inverse()?)
    }

    /// Block inverse through the boson-sector Schur complement.
    pub fn inverse(&self) -> Result<Self> {
        let ng = self.num_generators;
        let (p, q) = (self.p, self.q);
        let d_inv = even_inverse(&self.ff(), ng)?;
        if p == 0 {
            return Self::from_blocks(vec![], vec![], vec![vec![]; q], d_inv, ng);
        }
        if q == 0 {
            return Self::from_blocks(even_inverse(&self.bb(), ng)?, vec![vec![]; p], vec![], vec![], ng);
        }
        let (a, b, c) = (self.bb(), self.bf(), self.fb());
        let bd = block_mul(&b, &d_inv, ng);
        let s = block_sub(&a, &block_mul(&bd, &c, ng));
        let s_inv = even_inverse(&s, ng)?;
        let dc = block_mul(&d_inv, &c, ng);
        let top_right = block_neg(&block_mul(&s_inv, &bd, ng));
        let bottom_left = block_neg(&block_mul(&dc, &s_inv, ng));
        let bottom_right = block_sub(&d_inv, &block_mul(&bottom_left, &bd, ng));
        Self::from_blocks(s_inv, top_right, bottom_left, bottom_right, ng)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() || self.num_generators != other.num_generators {
            return Err(Error::Structure("supermatrix product of mismatched shapes".into()));
        }
        let d = self.p + self.q;
        Ok(Self {
            p: self.p,
            q: self.q,
            num_generators: self.num_generators,
            entries: grid_mul(&self.entries, &other.entries, d, d, d, self.num_generators),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() || self.num_generators != other.num_generators {
            return Err(Error::Structure("supermatrix sum of mismatched shapes".into()));
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.scale(s)).collect(),
            ..self.clone()
        }
    }

    /// M + c·1.
    pub fn shift(&self, c: Complex64) -> Self {
        let d = self.p + self.q;
        let mut out = self.clone();
        for i in 0..d {
            out.entries[i * d + i] = out.entries[i * d + i].add_scalar(c);
        }
        out
    }

    pub fn powi(&self, m: u32) -> Result<Self> {
        let mut out = Self::identity(self.p, self.q, self.num_generators);
        for _ in 0..m {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

type Block = Vec<Vec<GrassmannElement>>;

fn block_mul(x: &Block, y: &Block, ng: usize) -> Block {
    let inner = y.len();
    let cols = y.first().map_or(0, Vec::len);
    x.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = GrassmannElement::zero(ng);
                    for k in 0..inner {
                        acc += &(&row[k] * &y[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn block_sub(x: &Block, y: &Block) -> Block {
    x.iter().zip(y).map(|(r, t)| r.iter().zip(t).map(|(a, b)| a - b).collect()).collect()
}

fn block_neg(x: &Block) -> Block {
    x.iter().map(|r| r.iter().map(|a| -a).collect()).collect()
}

fn pivot_row(m: &[Vec<GrassmannElement>], col: usize) -> Option<usize> {
    (col..m.len())
        .map(|r| (r, m[r][col].body().norm()))
        .filter(|&(_, b)| b > 0.0)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(r, _)| r)
}

/// Determinant of a square matrix with even (hence mutually commuting)
/// entries by elimination pivoted on the bodies.
pub fn even_det(m: &[Vec<GrassmannElement>], num_generators: usize) -> Result<GrassmannElement> {
    let n = m.len();
    let mut a: Vec<Vec<GrassmannElement>> = m.to_vec();
    let mut det = GrassmannElement::one(num_generators);
    for col in 0..n {
        let Some(piv) = pivot_row(&a, col) else {
            return Err(Error::Singular(format!("zero body pivot in column {col}")));
        };
        if piv != col {
            a.swap(piv, col);
            det = det.scale(Complex64::new(-1.0, 0.0));
        }
        det = &det * &a[col][col];
        let inv = a[col][col].inverse()?;
        for r in col + 1..n {
            let factor = &a[r][col] * &inv;
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &sub;
            }
        }
    }
    Ok(det)
}

/// Inverse of a square matrix with even entries by Gauss–Jordan elimination
/// pivoted on the bodies.
pub fn even_inverse(
    m: &[Vec<GrassmannElement>],
    num_generators: usize,
) -> Result<Vec<Vec<GrassmannElement>>> {
    let n = m.len();
    let mut a: Vec<Vec<GrassmannElement>> = m.to_vec();
    let mut inv: Vec<Vec<GrassmannElement>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        GrassmannElement::one(num_generators)
                    } else {
                        GrassmannElement::zero(num_generators)
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let Some(piv) = pivot_row(&a, col) else {
            return Err(Error::Singular(format!("zero body pivot in column {col}")));
        };
        a.swap(piv, col);
        inv.swap(piv, col);
        let p = a[col][col].inverse()?;
        for c in 0..n {
            a[col][c] = &a[col][c] * &p;
            inv[col][c] = &inv[col][c] * &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let s1 = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &s1;
                let s2 = &factor * &inv[col][c];
                inv[r][c] = &inv[r][c] - &s2;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn supertrace_of_identity() {
        let id = SuperMatrix::identity(2, 3, 0);
        assert_eq!(id.str().body(), c(-1.0));
    }

    #[test]
    fn sdet_block_diagonal() {
        let g = |x| GrassmannElement::real(0, x);
        let m = SuperMatrix::from_blocks(
            vec![vec![g(2.0)]],
            vec![vec![g(0.0)]],
            vec![vec![g(0.0)]],
            vec![vec![g(4.0)]],
            0,
        )
        .unwrap();
        assert_eq!(m.sdet().unwrap().body(), c(0.5));
    }

    #[test]
    fn sdet_one_step_expansion() {
        let ng = 2;
        let a = c(1.5);
        let d = Complex64::new(0.5, 0.25);
        let alpha = GrassmannElement::generator(ng, 0);
        let beta = GrassmannElement::generator(ng, 1);
        let m = SuperMatrix::from_blocks(
            vec![vec![GrassmannElement::scalar(ng, a)]],
            vec![vec![alpha.clone()]],
            vec![vec![beta.clone()]],
            vec![vec![GrassmannElement::scalar(ng, d)]],
            ng,
        )
        .unwrap();
        let expect = &GrassmannElement::scalar(ng, a / d) - &(&alpha * &beta).scale(1.0 / (d * d));
        assert!(m.sdet().unwrap().distance(&expect) < 1e-15);
    }

    #[test]
    fn grading_is_enforced() {
        let ng = 1;
        let eta = GrassmannElement::generator(ng, 0);
        let r = SuperMatrix::new(1, 1, ng, vec![eta.clone(), eta.clone(), eta.clone(), eta]);
        assert!(matches!(r, Err(Error::Structure(_))));
    }

    #[test]
    fn singular_fermion_block() {
        let z = GrassmannElement::zero(0);
        let m = SuperMatrix::from_blocks(
            vec![vec![GrassmannElement::one(0)]],
            vec![vec![z.clone()]],
            vec![vec![z.clone()]],
            vec![vec![z]],
            0,
        )
        .unwrap();
        assert!(matches!(m.sdet(), Err(Error::Singular(_))));
    }

    #[test]
    fn even_det_matches_scalar_formula() {
        let g = |x: f64, y: f64| GrassmannElement::scalar(0, Complex64::new(x, y));
        let m = vec![vec![g(1.0, 2.0), g(0.5, 0.0)], vec![g(-1.0, 0.0), g(3.0, -1.0)]];
        let d = even_det(&m, 0).unwrap().body();
        let expect = Complex64::new(1.0, 2.0) * Complex64::new(3.0, -1.0) + 0.5;
        assert!((d - expect).norm() < 1e-14);
    }

    #[test]
    fn inverse_round_trip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (p, q) in [(1, 1), (2, 1), (1, 2), (0, 2), (2, 0), (2, 2)] {
            let m = super::super::random_invertible(p, q, 4, &mut rng);
            let id = SuperMatrix::identity(p, q, 4);
            let inv = m.inverse().unwrap();
            assert!(m.mul(&inv).unwrap().max_distance(&id) < 1e-11, "({p}|{q})");
            assert!(inv.mul(&m).unwrap().max_distance(&id) < 1e-11, "({p}|{q})");
        }
    }
}
