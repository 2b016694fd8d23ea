use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rational::{format_rational, int, parse_rational, to_f64, Rational};
use crate::error::AlgError;

/// Univariate polynomial with exact rational coefficients, ascending degree.
///
/// The zero polynomial has an empty coefficient list; otherwise the last
/// coefficient is nonzero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// Parses an ascending list of rational strings such as `["1", "0", "-1"]`.
    pub fn parse<S: AsRef<str>>(coeffs: &[S]) -> Result<Self, AlgError> {
        coeffs
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    /// Ascending coefficient strings; inverse of [`UniPoly::parse`].
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn to_f64(&self) -> FloatPoly {
        FloatPoly(self.coeffs.iter().map(to_f64).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &UniPoly) -> Self {
        self.coeffs.iter().rev().fold(Self::zero(), |acc, c| {
            &(&acc * inner) + &Self::constant(c.clone())
        })
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &UniPoly) -> Result<(UniPoly, UniPoly), AlgError> {
        let dd = divisor.degree().ok_or(AlgError::DivisionByZero)?;
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * d;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Divide by a leading-coefficient magnitude, keeping the sign pattern.
    pub fn normalize_positive(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.abs().recip()),
            None => Self::zero(),
        }
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r.normalize_positive();
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same distinct roots, all simple.
    pub fn squarefree_part(&self) -> UniPoly {
        if self.is_constant() {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).expect("gcd of nonzero polynomial").0
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> UniPoly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| i % 2 == 0 || c.is_zero())
    }

    pub fn is_odd(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| i % 2 == 1 || c.is_zero())
    }

    /// Integer coefficients with the same sign at every point (positive multiple).
    pub(crate) fn integer_coeffs(&self) -> Vec<BigInt> {
        super::rational::clear_denominators(&self.coeffs)
    }

    /// Cauchy bound strictly exceeding the magnitude of every real root.
    pub fn root_bound(&self) -> Rational {
        let Some(lead) = self.leading() else {
            return Rational::one();
        };
        let max = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| (c / lead).abs())
            .max()
            .unwrap_or_else(Rational::zero);
        (max + int(2)).ceil()
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly({self})")
    }
}

/// Human-readable form, e.g. `1 - x^2`.
impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            write_term(f, c, &monomial_name(i, 0), first)?;
            first = false;
        }
        Ok(())
    }
}

pub(crate) fn monomial_name(i: usize, j: usize) -> String {
    let part = |v: &str, e: usize| match e {
        0 => String::new(),
        1 => v.to_string(),
        _ => format!("{v}^{e}"),
    };
    let xs = part("x", i);
    let ys = part("y", j);
    match (xs.is_empty(), ys.is_empty()) {
        (true, true) => String::new(),
        (false, true) => xs,
        (true, false) => ys,
        (false, false) => format!("{xs}*{ys}"),
    }
}

pub(crate) fn write_term(
    f: &mut fmt::Formatter<'_>,
    c: &Rational,
    mono: &str,
    first: bool,
) -> fmt::Result {
    let neg = c.is_negative();
    let mag = c.abs();
    match (first, neg) {
        (true, true) => write!(f, "-")?,
        (true, false) => {}
        (false, true) => write!(f, " - ")?,
        (false, false) => write!(f, " + ")?,
    }
    if mono.is_empty() {
        write!(f, "{}", format_rational(&mag))
    } else if mag.is_one() {
        write!(f, "{mono}")
    } else {
        write!(f, "{}*{mono}", format_rational(&mag))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<UniPoly> for UniPoly {
            type Output = UniPoly;
            fn $method(self, rhs: UniPoly) -> UniPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&UniPoly> for UniPoly {
            type Output = UniPoly;
            fn $method(self, rhs: &UniPoly) -> UniPoly {
                (&self).$method(rhs)
            }
        }
    };
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        -&self
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

/// Double-precision copy of a polynomial for fast nested evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPoly(pub Vec<f64>);

impl FloatPoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::rational::ratio;

    fn three_roots() -> UniPoly {
        UniPoly::from_ints(&[1, 0, -1])
            * UniPoly::from_ints(&[4, 0, -1])
            * UniPoly::from_ints(&[9, 0, -1])
    }

    #[test]
    fn eval_examples() {
        let p = UniPoly::from_ints(&[1, 0, -1]);
        assert_eq!(p.eval(&int(0)), int(1));
        assert_eq!(p.eval(&int(1)), int(0));
        assert_eq!(three_roots().eval(&int(0)), int(36));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(
            UniPoly::from_ints(&[1, 0, -1]).derivative(),
            UniPoly::from_ints(&[0, -2])
        );
        assert!(UniPoly::from_ints(&[7]).derivative().is_zero());
        assert_eq!(
            UniPoly::from_ints(&[0, -1, 0, 1]).derivative(),
            UniPoly::from_ints(&[-1, 0, 3])
        );
    }

    #[test]
    fn gcd_examples() {
        let a = UniPoly::from_ints(&[-1, 0, 1]);
        let b = UniPoly::from_ints(&[-1, 1]);
        assert_eq!(a.gcd(&b), b);
        let p = UniPoly::from_ints(&[1, 0, -1]);
        assert_eq!(p.gcd(&p.derivative()), UniPoly::one());
        let sq = UniPoly::from_ints(&[1, -2, 1]);
        assert_eq!(sq.gcd(&sq.derivative()), b);
        assert_eq!(sq.squarefree_part(), b);
    }

    #[test]
    fn arithmetic_cancels() {
        let x = UniPoly::x();
        assert!((&x * &x - UniPoly::from_ints(&[0, 0, 1])).is_zero());
        assert_eq!(UniPoly::new(vec![int(0), int(0)]), UniPoly::zero());
    }

    #[test]
    fn division_with_remainder() {
        let a = UniPoly::from_ints(&[1, 2, 3, 4]);
        let b = UniPoly::new(vec![ratio(1, 2), int(-3)]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree().unwrap_or(0) < 1);
        assert_eq!(a.div_rem(&UniPoly::zero()), Err(AlgError::DivisionByZero));
    }

    #[test]
    fn compose_and_pow() {
        let p = UniPoly::from_ints(&[1, 0, -1]);
        let shift = UniPoly::from_ints(&[1, 1]);
        // 1 - (x+1)^2 = -2x - x^2
        assert_eq!(p.compose(&shift), UniPoly::from_ints(&[0, -2, -1]));
        assert_eq!(shift.pow(3), UniPoly::from_ints(&[1, 3, 3, 1]));
        assert_eq!(shift.pow(0), UniPoly::one());
    }

    #[test]
    fn parity_and_parse_roundtrip() {
        assert!(three_roots().is_even());
        assert!(UniPoly::from_ints(&[0, 1, 0, 5]).is_odd());
        assert!(!UniPoly::from_ints(&[0, 0, 1]).is_odd());
        let p = UniPoly::parse(&["1/2", "0", "-3/7", "0"]).unwrap();
        assert_eq!(p.degree(), Some(2));
        assert_eq!(UniPoly::parse(&p.to_strings()).unwrap(), p);
        assert_eq!(p.to_string(), "1/2 - 3/7*x^2");
    }
}
