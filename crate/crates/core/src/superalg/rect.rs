use num_complex::Complex64;
use rand::Rng;

use super::grassmann::GrassmannElement;
use super::supermatrix::{check_grading, grid_mul, SuperMatrix};
use crate::error::{Error, Result};

/// Complex conjugation of the second kind on an algebra whose generators
/// come in pairs (η_i, η_{i+k}) with η_{i+k} = η_i^*.
///
/// Conjugation is antilinear, keeps the order of factors and squares to the
/// parity operator: (η_i^*)^* = −η_i.
pub fn conjugate(x: &GrassmannElement, pairs: usize) -> Result<GrassmannElement> {
    let ng = x.num_generators();
    if ng != 2 * pairs {
        return Err(Error::Structure(format!(
            "conjugation needs 2·{pairs} generators, algebra has {ng}"
        )));
    }
    let mut out = GrassmannElement::zero(ng);
    for (mask, c) in x.terms() {
        let mut term = GrassmannElement::scalar(ng, c.conj());
        for i in 0..ng {
            if mask & (1 << i) == 0 {
                continue;
            }
            let image = if i < pairs {
                GrassmannElement::generator(ng, i + pairs)
            } else {
                -&GrassmannElement::generator(ng, i - pairs)
            };
            term = &term * &image;
        }
        out += &term;
    }
    Ok(out)
}

/// Rectangular supermatrix of shape (p1|q1)×(p2|q2). Entries joining two
/// boson or two fermion sectors are even, the others odd.
#[derive(Clone, Debug, PartialEq)]
pub struct RectSuperMatrix {
    rows: (usize, usize),
    cols: (usize, usize),
    num_generators: usize,
    entries: Vec<GrassmannElement>,
}

impl RectSuperMatrix {
    pub fn new(
        rows: (usize, usize),
        cols: (usize, usize),
        num_generators: usize,
        entries: Vec<GrassmannElement>,
    ) -> Result<Self> {
        check_grading(&entries, num_generators, rows, cols)?;
        Ok(Self {
            rows,
            cols,
            num_generators,
            entries,
        })
    }

    pub fn rows(&self) -> (usize, usize) {
        self.rows
    }

    pub fn cols(&self) -> (usize, usize) {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GrassmannElement {
        &self.entries[i * (self.cols.0 + self.cols.1) + j]
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows || self.num_generators != other.num_generators {
            return Err(Error::Structure("rectangular supermatrix shapes do not chain".into()));
        }
        let r = self.rows.0 + self.rows.1;
        let k = self.cols.0 + self.cols.1;
        let c = other.cols.0 + other.cols.1;
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            num_generators: self.num_generators,
            entries: grid_mul(&self.entries, &other.entries, r, k, c, self.num_generators),
        })
    }

    /// Conjugate transpose using [`conjugate`] with the given generator
    /// pairing.
    pub fn adjoint(&self, pairs: usize) -> Result<Self> {
        let r = self.rows.0 + self.rows.1;
        let c = self.cols.0 + self.cols.1;
        let mut entries = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                entries.push(conjugate(self.get(i, j), pairs)?);
            }
        }
        Self::new(self.cols, self.rows, self.num_generators, entries)
    }

    /// Reinterprets a square-shaped matrix as a [`SuperMatrix`].
    pub fn into_square(self) -> Result<SuperMatrix> {
        if self.rows != self.cols {
            return Err(Error::Structure("matrix is not square".into()));
        }
        SuperMatrix::new(self.rows.0, self.rows.1, self.num_generators, self.entries)
    }

    /// Random matrix with Gaussian bodies on even entries, random even
    /// nilpotent parts, and random odd entries.
    pub fn random<R: Rng + ?Sized>(
        rows: (usize, usize),
        cols: (usize, usize),
        num_generators: usize,
        rng: &mut R,
    ) -> Self {
        let width = cols.0 + cols.1;
        let entries = (0..(rows.0 + rows.1) * width)
            .map(|k| {
                let even = ((k / width) < rows.0) == ((k % width) < cols.0);
                if even {
                    random_even(num_generators, rng)
                } else {
                    random_odd(num_generators, rng)
                }
            })
            .collect();
        Self {
            rows,
            cols,
            num_generators,
            entries,
        }
    }
}

fn random_coeff<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_with_parity<R: Rng + ?Sized>(num_generators: usize, odd: bool, rng: &mut R) -> GrassmannElement {
    let mut terms = Vec::new();
    for m in 0u32..1 << num_generators {
        if (m.count_ones() % 2 == 1) != odd {
            continue;
        }
        if m.count_ones() <= 2 || rng.random_bool(0.5) {
            terms.push((m, random_coeff(rng)));
        }
    }
    GrassmannElement::from_terms(num_generators, terms).expect("random element")
}

/// Random even element with body of order one.
pub fn random_even<R: Rng + ?Sized>(num_generators: usize, rng: &mut R) -> GrassmannElement {
    random_with_parity(num_generators, false, rng)
}

/// Random odd element.
pub fn random_odd<R: Rng + ?Sized>(num_generators: usize, rng: &mut R) -> GrassmannElement {
    random_with_parity(num_generators, true, rng)
}

/// Random square supermatrix whose diagonal blocks have bodies close to the
/// identity, so that it is invertible.
pub fn random_invertible<R: Rng + ?Sized>(
    p: usize,
    q: usize,
    num_generators: usize,
    rng: &mut R,
) -> SuperMatrix {
    let m = RectSuperMatrix::random((p, q), (p, q), num_generators, rng)
        .into_square()
        .expect("square shape");
    let d = p + q;
    let entries = m
        .entries()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            if k / d == k % d {
                e.add_scalar(Complex64::new(2.5, 0.0))
            } else {
                e.clone()
            }
        })
        .collect();
    SuperMatrix::new(p, q, num_generators, entries).expect("graded")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conjugation_squares_to_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = &random_even(4, &mut rng) + &random_odd(4, &mut rng);
        let twice = conjugate(&conjugate(&x, 2).unwrap(), 2).unwrap();
        let parity = &x.even_part() - &x.odd_part();
        assert!(twice.distance(&parity) < 1e-15);
    }

    #[test]
    fn bilinear_is_real_body() {
        // η^* η has real Berezin coefficient structure: (η^*η)^* = η^*η
        let eta = GrassmannElement::generator(2, 0);
        let bar = conjugate(&eta, 1).unwrap();
        let b = &bar * &eta;
        assert_eq!(conjugate(&b, 1).unwrap(), b);
    }

    #[test]
    fn adjoint_product_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = RectSuperMatrix::random((2, 1), (2, 0), 4, &mut rng);
        let vd = v.adjoint(2).unwrap();
        assert_eq!(vd.rows(), (2, 0));
        let sq = v.mul(&vd).unwrap().into_square().unwrap();
        assert_eq!(sq.dims(), (2, 1));
    }
}
