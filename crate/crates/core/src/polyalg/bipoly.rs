use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::rational::{format_rational, int, Rational};
use super::unipoly::{monomial_name, write_term, FloatPoly, UniPoly};

/// Bivariate polynomial in `x` and `y`, stored sparsely by `(x-degree, y-degree)`.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rational)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    /// The monomial `y`.
    pub fn y() -> Self {
        Self::from_terms([((0, 1), int(1))])
    }

    /// Embeds `p(x)`.
    pub fn from_x(p: &UniPoly) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| ((i as u32, 0), c.clone())),
        )
    }

    /// `p(x) * y^j`.
    pub fn from_x_times_y(p: &UniPoly, j: u32) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| ((i as u32, j), c.clone())),
        )
    }

    fn add_term(&mut self, key: (u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Rational> {
        &self.terms
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn degree_in_y(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, v)| (k, v * c)))
    }

    pub fn partial_x(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c * int(i as i64))),
        )
    }

    pub fn partial_y(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c * int(j as i64))),
        )
    }

    /// Coefficient of `y^j` as a polynomial in `x`.
    pub fn y_coefficient(&self, j: u32) -> UniPoly {
        let n = self
            .terms
            .keys()
            .filter(|k| k.1 == j)
            .map(|k| k.0 as usize + 1)
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![Rational::zero(); n];
        for (&(i, jj), c) in &self.terms {
            if jj == j {
                coeffs[i as usize] = c.clone();
            }
        }
        UniPoly::new(coeffs)
    }

    /// The restriction `self(x, 0)`.
    pub fn at_y_zero(&self) -> UniPoly {
        self.y_coefficient(0)
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        let dy = self.degree_in_y().unwrap_or(0);
        (0..=dy).rev().fold(Rational::zero(), |acc, j| {
            acc * y + self.y_coefficient(j).eval(x)
        })
    }

    /// `self(-x, -y)`.
    pub fn antipodal(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(i, j), c)| {
            if (i + j) % 2 == 1 {
                ((i, j), -c)
            } else {
                ((i, j), c.clone())
            }
        }))
    }

    pub fn to_f64(&self) -> FloatBiPoly {
        let dy = self.degree_in_y().unwrap_or(0);
        FloatBiPoly((0..=dy).map(|j| self.y_coefficient(j).to_f64()).collect())
    }

    /// Sorted `(i, j, coefficient)` triples with rational strings.
    pub fn to_string_terms(&self) -> Vec<(u32, u32, String)> {
        self.terms
            .iter()
            .map(|(&(i, j), c)| (i, j, format_rational(c)))
            .collect()
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiPoly({self})")
    }
}

/// Terms ordered by ascending `y` power, then ascending `x` power.
impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(i, j)| (j, i));
        for (n, (i, j)) in keys.into_iter().enumerate() {
            write_term(
                f,
                &self.terms[&(i, j)],
                &monomial_name(i as usize, j as usize),
                n == 0,
            )?;
        }
        Ok(())
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, c.clone());
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, -c);
        }
        out
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &rhs.terms {
                out.add_term((i1 + i2, j1 + j2), a * b);
            }
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly::from_terms(self.terms.iter().map(|(&k, c)| (k, -c)))
    }
}

impl Add for BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: BiPoly) -> BiPoly {
        &self + &rhs
    }
}

impl Sub for BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: BiPoly) -> BiPoly {
        &self - &rhs
    }
}

impl Mul for BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: BiPoly) -> BiPoly {
        &self * &rhs
    }
}

impl Neg for BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        -&self
    }
}

/// Double-precision bivariate polynomial as a list of `x`-polynomials, one per power of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatBiPoly(pub Vec<FloatPoly>);

impl FloatBiPoly {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * y + row.eval(x))
    }
}

/// `P f_x + Q f_y - k f`. Zero exactly when `f` is invariant with cofactor `k`.
pub fn invariance_residual(p: &BiPoly, q: &BiPoly, f: &BiPoly, k: &BiPoly) -> BiPoly {
    &(&(p * &f.partial_x()) + &(q * &f.partial_y())) - &(k * f)
}
