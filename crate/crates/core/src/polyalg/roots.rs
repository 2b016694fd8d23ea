//! Sturm sequences and real-root isolation over the rationals.
//!
//! Signs are evaluated on integer-scaled copies of each polynomial at
//! `a/b` via homogeneous evaluation, so no rational normalization happens
//! inside the bisection loops.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Zero};

use super::rational::{format_rational, int, simplest_in, to_f64, Rational};
use super::unipoly::UniPoly;
use crate::error::AlgError;

/// Isolating interval `[lo, hi]` holding exactly one real root of its polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootEnclosure {
    pub lo: Rational,
    pub hi: Rational,
    pub multiplicity_is_one: bool,
}

impl RootEnclosure {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// The root as an exact rational, when it is one with a small enough
    /// denominator to be pinned down by this enclosure.
    pub fn exact_root(&self, p: &UniPoly) -> Option<Rational> {
        let cand = simplest_in(&self.lo, &self.hi);
        p.eval(&cand).is_zero().then_some(cand)
    }
}

/// Sign of an integer polynomial at `a/b` (b > 0): sign of `sum c_i a^i b^(d-i)`.
fn sign_at(coeffs: &[BigInt], a: &BigInt, b: &BigInt) -> Sign {
    if coeffs.is_empty() {
        return Sign::NoSign;
    }
    // Homogeneous Horner: acc = acc * a + c_i * b^(d-i)
    let d = coeffs.len() - 1;
    let mut powers = Vec::with_capacity(d + 1);
    let mut bpow = BigInt::one();
    for _ in 0..=d {
        powers.push(bpow.clone());
        bpow *= b;
    }
    let mut acc = BigInt::zero();
    for (idx, c) in coeffs.iter().enumerate().rev() {
        acc = acc * a + c * &powers[d - idx];
    }
    acc.sign()
}

fn sign_of(p: &[BigInt], x: &Rational) -> Sign {
    sign_at(p, x.numer(), x.denom())
}

/// Sign of `p(x)` as -1, 0 or 1.
pub fn sign_at_rational(p: &UniPoly, x: &Rational) -> i8 {
    match sign_of(&p.integer_coeffs(), x) {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Precomputed Sturm chain of a polynomial.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    chain: Vec<Vec<BigInt>>,
}

impl SturmSequence {
    pub fn new(p: &UniPoly) -> Self {
        let mut polys = Vec::new();
        if !p.is_zero() {
            let mut a = p.normalize_positive();
            let mut b = p.derivative().normalize_positive();
            polys.push(a.clone());
            while !b.is_zero() {
                polys.push(b.clone());
                let (_, r) = a.div_rem(&b).expect("nonzero divisor");
                a = b;
                b = (-r).normalize_positive();
            }
        }
        Self {
            chain: polys.iter().map(UniPoly::integer_coeffs).collect(),
        }
    }

    pub fn sign_at(&self, x: &Rational) -> Sign {
        self.chain.first().map_or(Sign::NoSign, |p| sign_of(p, x))
    }

    fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = Sign::NoSign;
        for p in &self.chain {
            let s = sign_of(p, x);
            if s == Sign::NoSign {
                continue;
            }
            if last != Sign::NoSign && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`.
    pub fn count(&self, lo: &Rational, hi: &Rational) -> Result<usize, AlgError> {
        if lo >= hi {
            return Err(AlgError::EmptyInterval {
                lo: format_rational(lo),
                hi: format_rational(hi),
            });
        }
        for e in [lo, hi] {
            if self.sign_at(e) == Sign::NoSign {
                return Err(AlgError::EndpointIsRoot(format_rational(e)));
            }
        }
        Ok(self.variations(lo) - self.variations(hi))
    }
}

/// Distinct real roots of `p` in `(lo, hi)`; both endpoints must be non-roots.
pub fn sturm_count(p: &UniPoly, lo: &Rational, hi: &Rational) -> Result<usize, AlgError> {
    if p.is_zero() {
        return Err(AlgError::ZeroPolynomial);
    }
    SturmSequence::new(p).count(lo, hi)
}

/// Non-root split point near the middle of `(lo, hi)`.
fn split_point(seq: &SturmSequence, lo: &Rational, hi: &Rational) -> Rational {
    let mid = (lo + hi) / int(2);
    if seq.sign_at(&mid) != Sign::NoSign {
        return mid;
    }
    let w = hi - lo;
    let mut k = 3u32;
    loop {
        let off = &w / Rational::from_integer(BigInt::one() << k as usize);
        for cand in [&mid + &off, &mid - &off] {
            if seq.sign_at(&cand) != Sign::NoSign {
                return cand;
            }
        }
        k += 1;
    }
}

/// Isolates every distinct real root of `p` into an interval of width at most
/// `width`, sorted ascending.
pub fn isolate_real_roots(p: &UniPoly, width: &Rational) -> Result<Vec<RootEnclosure>, AlgError> {
    if p.is_zero() {
        return Err(AlgError::ZeroPolynomial);
    }
    if p.is_constant() {
        return Ok(Vec::new());
    }
    let sqf = p.squarefree_part();
    let seq = SturmSequence::new(&sqf);
    let repeated = p.gcd(&p.derivative());
    let repeated_seq = (!repeated.is_constant()).then(|| SturmSequence::new(&repeated));

    let bound = p.root_bound();
    let mut out = Vec::new();
    // Depth-first over (lo, hi, count) keeping left intervals first.
    let mut stack = vec![(-bound.clone(), bound.clone())];
    while let Some((lo, hi)) = stack.pop() {
        let n = seq.count(&lo, &hi)?;
        if n == 0 {
            continue;
        }
        if n == 1 {
            let (lo, hi) = shrink_single(&seq, lo, hi, width);
            let simple = match &repeated_seq {
                None => true,
                Some(rs) => rs.count(&lo, &hi)? == 0,
            };
            out.push(RootEnclosure {
                lo,
                hi,
                multiplicity_is_one: simple,
            });
            continue;
        }
        let m = split_point(&seq, &lo, &hi);
        stack.push((m.clone(), hi));
        stack.push((lo, m));
    }
    Ok(out)
}

fn shrink_single(
    seq: &SturmSequence,
    mut lo: Rational,
    mut hi: Rational,
    width: &Rational,
) -> (Rational, Rational) {
    // A simple root of the squarefree part: the sign flips across it.
    let lo_sign = seq.sign_at(&lo);
    while &(&hi - &lo) > width {
        let m = split_point(seq, &lo, &hi);
        if seq.sign_at(&m) == lo_sign {
            lo = m;
        } else {
            hi = m;
        }
    }
    (lo, hi)
}

/// Narrows an enclosure of a root of `p` to width at most `width`.
pub fn refine_enclosure(p: &UniPoly, enc: &RootEnclosure, width: &Rational) -> RootEnclosure {
    let seq = SturmSequence::new(&p.squarefree_part());
    let (lo, hi) = shrink_single(&seq, enc.lo.clone(), enc.hi.clone(), width);
    RootEnclosure {
        lo,
        hi,
        multiplicity_is_one: enc.multiplicity_is_one,
    }
}

/// The enclosed root as the nearest double, refined by exact bisection until
/// the interval collapses to a single floating-point value.
pub fn root_to_f64(p: &UniPoly, enc: &RootEnclosure) -> f64 {
    if let Some(r) = enc.exact_root(p) {
        return to_f64(&r);
    }
    let sqf = p.squarefree_part();
    let coeffs = sqf.integer_coeffs();
    let mut lo = enc.lo.clone();
    let mut hi = enc.hi.clone();
    let lo_sign = sign_of(&coeffs, &lo);
    for _ in 0..400 {
        let (a, b) = (to_f64(&lo), to_f64(&hi));
        if a == b || (b - a).abs() <= f64::EPSILON * a.abs().max(b.abs()) * 0.5 {
            break;
        }
        let m = (&lo + &hi) / int(2);
        match sign_of(&coeffs, &m) {
            Sign::NoSign => return to_f64(&m),
            s if s == lo_sign => lo = m,
            _ => hi = m,
        }
    }
    to_f64(&((&lo + &hi) / int(2)))
}

/// Whether `p` has a root in the closed enclosure (endpoints are assumed non-roots
/// of `p` unless the enclosure is degenerate).
pub fn has_root_in(p: &UniPoly, lo: &Rational, hi: &Rational) -> Result<bool, AlgError> {
    if p.is_zero() {
        return Ok(true);
    }
    if p.eval(lo).is_zero() || p.eval(hi).is_zero() {
        return Ok(true);
    }
    Ok(sturm_count(p, lo, hi)? > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::rational::{pow2_neg, ratio};

    fn three_roots() -> UniPoly {
        UniPoly::from_ints(&[1, 0, -1])
            * UniPoly::from_ints(&[4, 0, -1])
            * UniPoly::from_ints(&[9, 0, -1])
    }

    #[test]
    fn sturm_examples() {
        assert_eq!(
            sturm_count(&UniPoly::from_ints(&[-1, 0, 1]), &int(-2), &int(2)).unwrap(),
            2
        );
        assert_eq!(
            sturm_count(&UniPoly::from_ints(&[1, 0, 1]), &int(-10), &int(10)).unwrap(),
            0
        );
        assert_eq!(sturm_count(&three_roots(), &int(0), &int(10)).unwrap(), 3);
    }

    #[test]
    fn sturm_endpoint_root_is_error() {
        let p = UniPoly::from_ints(&[-1, 0, 1]);
        assert!(matches!(
            sturm_count(&p, &int(1), &int(3)),
            Err(AlgError::EndpointIsRoot(_))
        ));
        assert!(matches!(
            sturm_count(&p, &int(3), &int(2)),
            Err(AlgError::EmptyInterval { .. })
        ));
    }

    #[test]
    fn sturm_counts_distinct_roots_of_non_squarefree() {
        // (x-1)^2 (x+2)
        let p = UniPoly::from_ints(&[1, -2, 1]) * UniPoly::from_ints(&[2, 1]);
        assert_eq!(sturm_count(&p, &int(-5), &int(5)).unwrap(), 2);
    }

    #[test]
    fn isolate_unit_circle_roots() {
        let p = UniPoly::from_ints(&[1, 0, -1]);
        let w = pow2_neg(10);
        let roots = isolate_real_roots(&p, &w).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots[0].contains(&int(-1)) && roots[1].contains(&int(1)));
        assert!(roots
            .iter()
            .all(|r| r.multiplicity_is_one && r.width() <= w));
        assert_eq!(roots[1].exact_root(&p), Some(int(1)));
    }

    #[test]
    fn isolate_double_root() {
        let p = UniPoly::from_ints(&[1, -2, 1]);
        let roots = isolate_real_roots(&p, &pow2_neg(10)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].contains(&int(1)));
        assert!(!roots[0].multiplicity_is_one);
    }

    #[test]
    fn isolate_six_roots() {
        let roots = isolate_real_roots(&three_roots(), &pow2_neg(40)).unwrap();
        let expected = [-3, -2, -1, 1, 2, 3];
        assert_eq!(roots.len(), 6);
        for (r, e) in roots.iter().zip(expected) {
            assert!(r.contains(&int(e)), "{r:?} vs {e}");
            assert!(r.multiplicity_is_one);
            assert!(r.width() <= pow2_neg(40));
        }
        for w in roots.windows(2) {
            assert!(w[0].hi < w[1].lo);
        }
    }

    #[test]
    fn irrational_root_to_double() {
        let p = UniPoly::from_ints(&[-2, 0, 1]);
        let roots = isolate_real_roots(&p, &pow2_neg(20)).unwrap();
        let r = root_to_f64(&p, &roots[1]);
        assert_eq!(r, std::f64::consts::SQRT_2);
        let refined = refine_enclosure(&p, &roots[1], &pow2_neg(50));
        assert!(refined.width() <= pow2_neg(50));
        assert!(
            refined.lo < ratio(14142135623731, 10000000000000)
                && refined.hi > ratio(14142135623730, 10000000000000)
        );
    }
}
