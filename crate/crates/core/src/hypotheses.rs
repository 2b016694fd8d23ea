//! Band discovery and exact certification of the cycle hypotheses.
//!
//! A band is a maximal interval `(x_e, x_d)` between consecutive simple real
//! roots of `p` on which `p > 0`. On a band the curve `(y - p q)^2 = p` closes
//! into an oval, which is a hyperbolic limit cycle of the `(p, q)` system when
//! `p q^2 - 1` and `q'` have no root inside the band. Every check here is an
//! exact Sturm count or sign evaluation over the rationals.

use std::fmt;

use num_traits::Zero;

use crate::error::{AlgError, CertifyError};
use crate::polyalg::{
    format_rational, has_root_in, int, isolate_real_roots, pow2_neg, refine_enclosure,
    sign_at_rational, sturm_count, Rational, RootEnclosure, UniPoly,
};

/// Default isolation width `2^-40`.
pub fn default_root_width() -> Rational {
    pow2_neg(40)
}

/// Shrink-and-retry rounds for conditions whose roots sit inside an endpoint enclosure.
pub const DEFAULT_RETRIES: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub left: RootEnclosure,
    pub right: RootEnclosure,
    pub contains_origin: bool,
    /// `[left.hi, right.lo]`, strictly inside `(x_e, x_d)`.
    pub inner: (Rational, Rational),
}

impl Band {
    fn from_enclosures(p: &UniPoly, mut left: RootEnclosure, mut right: RootEnclosure) -> Self {
        let zero = Rational::zero();
        let contains_origin = if p.eval(&zero).is_zero() {
            false
        } else {
            // p(0) != 0, so refining eventually pushes 0 out of each enclosure.
            while left.contains(&zero) {
                left = refine_enclosure(p, &left, &(left.width() / int(2)));
            }
            while right.contains(&zero) {
                right = refine_enclosure(p, &right, &(right.width() / int(2)));
            }
            left.hi < zero && zero < right.lo
        };
        let inner = (left.hi.clone(), right.lo.clone());
        Self {
            left,
            right,
            contains_origin,
            inner,
        }
    }

    pub fn inner_midpoint(&self) -> Rational {
        (&self.inner.0 + &self.inner.1) / int(2)
    }

    /// Whether the band matches the literal hypothesis `x_e < 0 < x_d`.
    pub fn is_literal(&self) -> bool {
        self.contains_origin
    }

    /// Same band with both endpoint enclosures narrowed to `width`.
    pub fn refined(&self, p: &UniPoly, width: &Rational) -> Band {
        let left = refine_enclosure(p, &self.left, width);
        let right = refine_enclosure(p, &self.right, width);
        let inner = (left.hi.clone(), right.lo.clone());
        Band {
            left,
            right,
            contains_origin: self.contains_origin,
            inner,
        }
    }

    /// Larger of the two endpoint enclosure widths.
    pub fn enclosure_width(&self) -> Rational {
        self.left.width().max(self.right.width())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Positivity,
    SimpleEndpoints,
    Pq2NotOne,
    QPrimeNonzero,
    NoSingularPointsOnOval,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Positivity => "positivity",
            Condition::SimpleEndpoints => "simple_endpoints",
            Condition::Pq2NotOne => "pq2_not_one",
            Condition::QPrimeNonzero => "qprime_nonzero",
            Condition::NoSingularPointsOnOval => "no_singular_points_on_oval",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// Where a condition breaks: an exact rational point or an isolating interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Exact(Rational),
    Enclosure { lo: Rational, hi: Rational },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Exact(x) => write!(f, "x = {}", format_rational(x)),
            Witness::Enclosure { lo, hi } => {
                write!(f, "x in [{}, {}]", format_rational(lo), format_rational(hi))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub condition: Condition,
    pub message: String,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandCertificate {
    pub positivity: Status,
    pub simple_endpoints: Status,
    pub pq2_not_one: Status,
    pub qprime_nonzero: Status,
    pub no_singular_points_on_oval: Status,
    pub diagnostics: Vec<Diagnostic>,
}

impl BandCertificate {
    pub fn passes(&self) -> bool {
        self.statuses().iter().all(|(_, s)| *s == Status::Pass)
    }

    pub fn statuses(&self) -> [(Condition, Status); 5] {
        [
            (Condition::Positivity, self.positivity),
            (Condition::SimpleEndpoints, self.simple_endpoints),
            (Condition::Pq2NotOne, self.pq2_not_one),
            (Condition::QPrimeNonzero, self.qprime_nonzero),
            (
                Condition::NoSingularPointsOnOval,
                self.no_singular_points_on_oval,
            ),
        ]
    }

    /// Hypotheses needed for the characteristic integrals to be finite.
    pub fn integrals_defined(&self) -> bool {
        self.positivity == Status::Pass
            && self.simple_endpoints == Status::Pass
            && self.pq2_not_one == Status::Pass
    }
}

/// A positive region of `p` that was not accepted as a band.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedBand {
    pub left: RootEnclosure,
    pub right: RootEnclosure,
    pub diagnostic: Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandScan {
    pub bands: Vec<Band>,
    pub rejected: Vec<RejectedBand>,
}

/// Bands together with positive regions rejected for a multiple endpoint.
pub fn scan_bands(p: &UniPoly, width: &Rational) -> Result<BandScan, AlgError> {
    let mut scan = BandScan::default();
    if p.is_constant() {
        return Ok(scan);
    }
    let roots = isolate_real_roots(p, width)?;
    for pair in roots.windows(2) {
        let (left, right) = (&pair[0], &pair[1]);
        let mid = (&left.hi + &right.lo) / int(2);
        if sign_at_rational(p, &mid) <= 0 {
            continue;
        }
        if left.multiplicity_is_one && right.multiplicity_is_one {
            scan.bands
                .push(Band::from_enclosures(p, left.clone(), right.clone()));
        } else {
            let witnesses = [left, right]
                .into_iter()
                .filter(|e| !e.multiplicity_is_one)
                .map(|e| enclosure_witness(p, e))
                .collect();
            scan.rejected.push(RejectedBand {
                left: left.clone(),
                right: right.clone(),
                diagnostic: Diagnostic {
                    condition: Condition::SimpleEndpoints,
                    message: "p is positive between these roots but an endpoint is a multiple root"
                        .into(),
                    witnesses,
                },
            });
        }
    }
    Ok(scan)
}

/// One band per pair of consecutive simple roots of `p` with `p > 0` between them.
pub fn find_bands(p: &UniPoly, width: &Rational) -> Result<Vec<Band>, AlgError> {
    Ok(scan_bands(p, width)?.bands)
}

fn enclosure_witness(poly: &UniPoly, e: &RootEnclosure) -> Witness {
    match e.exact_root(poly) {
        Some(x) => Witness::Exact(x),
        None => Witness::Enclosure {
            lo: e.lo.clone(),
            hi: e.hi.clone(),
        },
    }
}

/// Removes from `cond` every factor shared with `p`, so that its remaining
/// roots never coincide with a root of `p`.
fn strip_common_factors(cond: &UniPoly, p: &UniPoly) -> UniPoly {
    let mut c = cond.clone();
    loop {
        let g = c.gcd(p);
        if g.is_constant() {
            return c;
        }
        c = c.div_rem(&g).expect("nonzero gcd").0;
    }
}

/// Outcome of checking that `cond` has no root in the open band.
struct RootFreeCheck {
    status: Status,
    witnesses: Vec<Witness>,
    band: Band,
}

/// `cond != 0` on `(x_e, x_d)`, with shrink-and-retry on the endpoint
/// enclosures while a root of `cond` might sit between a true endpoint and the
/// inner interval.
fn check_root_free(
    cond: &UniPoly,
    p: &UniPoly,
    band: &Band,
    root_width: &Rational,
    retries: u32,
) -> Result<RootFreeCheck, AlgError> {
    if cond.is_zero() {
        return Ok(RootFreeCheck {
            status: Status::Fail,
            witnesses: vec![Witness::Exact(band.inner_midpoint())],
            band: band.clone(),
        });
    }
    let reduced = strip_common_factors(cond, p);
    let mut band = band.clone();
    for attempt in 0..=retries {
        let (a, b) = band.inner.clone();
        let mut witnesses = Vec::new();
        for e in [&a, &b] {
            if cond.eval(e).is_zero() {
                witnesses.push(Witness::Exact(e.clone()));
            }
        }
        if witnesses.is_empty() && sturm_count(cond, &a, &b)? > 0 {
            witnesses = interior_witnesses(cond, &a, &b, root_width)?;
        }
        if !witnesses.is_empty() {
            return Ok(RootFreeCheck {
                status: Status::Fail,
                witnesses,
                band,
            });
        }
        let ambiguous: Vec<&RootEnclosure> = [&band.left, &band.right]
            .into_iter()
            .filter(|e| {
                !reduced.is_constant() && has_root_in(&reduced, &e.lo, &e.hi).unwrap_or(true)
            })
            .collect();
        if ambiguous.is_empty() {
            return Ok(RootFreeCheck {
                status: Status::Pass,
                witnesses,
                band,
            });
        }
        if attempt == retries {
            let witnesses = ambiguous
                .into_iter()
                .map(|e| Witness::Enclosure {
                    lo: e.lo.clone(),
                    hi: e.hi.clone(),
                })
                .collect();
            return Ok(RootFreeCheck {
                status: Status::Inconclusive,
                witnesses,
                band,
            });
        }
        band = band.refined(p, &(band.enclosure_width() / int(2)));
    }
    unreachable!("loop returns on its last attempt")
}

fn interior_witnesses(
    cond: &UniPoly,
    a: &Rational,
    b: &Rational,
    width: &Rational,
) -> Result<Vec<Witness>, AlgError> {
    Ok(isolate_real_roots(cond, width)?
        .iter()
        .filter(|e| {
            let m = e.midpoint();
            &m > a && &m < b
        })
        .map(|e| enclosure_witness(cond, e))
        .collect())
}

fn validate_band(p: &UniPoly, band: &Band) -> Result<(), CertifyError> {
    let mismatch = |m: &str| Err(CertifyError::BandMismatch(m.to_string()));
    if band.left.hi >= band.right.lo {
        return mismatch("enclosures overlap");
    }
    for (name, e) in [("left", &band.left), ("right", &band.right)] {
        match sturm_count(p, &e.lo, &e.hi) {
            Ok(1) => {}
            Ok(n) => return mismatch(&format!("{name} enclosure holds {n} roots of p")),
            Err(err) => return mismatch(&format!("{name} enclosure: {err}")),
        }
    }
    if sign_at_rational(p, &band.inner_midpoint()) <= 0 {
        return mismatch("p is not positive at the band midpoint");
    }
    Ok(())
}

/// Certifies every hypothesis on one band, returning the (possibly refined)
/// band the certificate refers to.
pub fn certify_band_with(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
    root_width: &Rational,
    retries: u32,
) -> Result<(Band, BandCertificate), CertifyError> {
    validate_band(p, band)?;
    let alg = |e: AlgError| CertifyError::BandMismatch(e.to_string());
    let mut diagnostics = Vec::new();

    let positivity = if sturm_count(p, &band.left.lo, &band.right.hi).map_err(alg)? == 2 {
        Status::Pass
    } else {
        diagnostics.push(Diagnostic {
            condition: Condition::Positivity,
            message: "p has additional roots inside the band".into(),
            witnesses: Vec::new(),
        });
        Status::Fail
    };

    let simple_endpoints = if band.left.multiplicity_is_one && band.right.multiplicity_is_one {
        Status::Pass
    } else {
        diagnostics.push(Diagnostic {
            condition: Condition::SimpleEndpoints,
            message: "a band endpoint is a multiple root of p".into(),
            witnesses: [&band.left, &band.right]
                .into_iter()
                .filter(|e| !e.multiplicity_is_one)
                .map(|e| enclosure_witness(p, e))
                .collect(),
        });
        Status::Fail
    };

    let g = &(p * &(q * q)) - &UniPoly::one();
    let pq2 = check_root_free(&g, p, band, root_width, retries).map_err(alg)?;
    let mut band = pq2.band.clone();
    let mut pq2_status = pq2.status;
    if pq2_status == Status::Pass && sign_at_rational(&g, &band.inner_midpoint()) >= 0 {
        pq2_status = Status::Fail;
    }
    if pq2_status != Status::Pass {
        diagnostics.push(Diagnostic {
            condition: Condition::Pq2NotOne,
            message: match pq2_status {
                Status::Inconclusive => {
                    "a root of p q^2 - 1 lies inside an endpoint enclosure".into()
                }
                _ => "p q^2 - 1 vanishes inside the band".into(),
            },
            witnesses: pq2.witnesses,
        });
    }

    let dq = q.derivative();
    let qp = check_root_free(&dq, p, &band, root_width, retries).map_err(alg)?;
    if qp.band.enclosure_width() < band.enclosure_width() {
        band = qp.band.clone();
    }
    if qp.status != Status::Pass {
        diagnostics.push(Diagnostic {
            condition: Condition::QPrimeNonzero,
            message: match (qp.status, dq.is_zero()) {
                (_, true) => "q' vanishes identically".into(),
                (Status::Inconclusive, _) => {
                    "a root of q' lies inside an endpoint enclosure".into()
                }
                _ => "q' vanishes inside the band".into(),
            },
            witnesses: qp.witnesses,
        });
    }

    let (on_oval, on_oval_witnesses) = singular_points_on_oval(p, q, &band).map_err(alg)?;
    let no_singular = if on_oval {
        diagnostics.push(Diagnostic {
            condition: Condition::NoSingularPointsOnOval,
            message: "a singular point (a, 0) of the system lies on the oval".into(),
            witnesses: on_oval_witnesses,
        });
        Status::Fail
    } else {
        Status::Pass
    };
    debug_assert!(
        !(positivity == Status::Pass
            && simple_endpoints == Status::Pass
            && pq2_status == Status::Pass)
            || no_singular == Status::Pass
    );

    let cert = BandCertificate {
        positivity,
        simple_endpoints,
        pq2_not_one: pq2_status,
        qprime_nonzero: qp.status,
        no_singular_points_on_oval: no_singular,
        diagnostics,
    };
    Ok((band, cert))
}

/// Singular points are `(a, 0)` with `p'(a)(p(a) q(a)^2 - 1) = 0`, and such a
/// point lies on the curve iff `p(a)(p(a) q(a)^2 - 1) = 0`. Both hold exactly
/// at the roots of the gcd of the two polynomials; report those in the closed band.
fn singular_points_on_oval(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
) -> Result<(bool, Vec<Witness>), AlgError> {
    let g = &(p * &(q * q)) - &UniPoly::one();
    let singular = &p.derivative() * &g;
    let on_axis = p * &g;
    let common = singular.gcd(&on_axis);
    if common.is_zero() {
        return Ok((true, Vec::new()));
    }
    if common.is_constant() {
        return Ok((false, Vec::new()));
    }
    let (lo, hi) = (&band.left.lo, &band.right.hi);
    let hits: Vec<Witness> = isolate_real_roots(&common, &band.enclosure_width())?
        .iter()
        .filter(|e| &e.hi >= lo && &e.lo <= hi)
        .map(|e| enclosure_witness(&common, e))
        .collect();
    Ok((!hits.is_empty(), hits))
}

pub fn certify_band(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
) -> Result<BandCertificate, CertifyError> {
    certify_band_with(p, q, band, &default_root_width(), DEFAULT_RETRIES).map(|(_, c)| c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedBand {
    pub band: Band,
    pub certificate: BandCertificate,
}

impl CertifiedBand {
    pub fn passes(&self) -> bool {
        self.certificate.passes()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandCheck {
    pub bands: Vec<CertifiedBand>,
    pub rejected: Vec<RejectedBand>,
}

impl BandCheck {
    pub fn certified(&self) -> impl Iterator<Item = &CertifiedBand> {
        self.bands.iter().filter(|b| b.passes())
    }
}

/// Finds all bands of `p` and certifies each against `q`.
pub fn check_bands(
    p: &UniPoly,
    q: &UniPoly,
    root_width: &Rational,
) -> Result<BandCheck, CertifyError> {
    let scan = scan_bands(p, root_width)?;
    let mut bands = Vec::with_capacity(scan.bands.len());
    for band in &scan.bands {
        let (band, certificate) = certify_band_with(p, q, band, root_width, DEFAULT_RETRIES)?;
        bands.push(CertifiedBand { band, certificate });
    }
    Ok(BandCheck {
        bands,
        rejected: scan.rejected,
    })
}

/// Sign of `q'` on a band where it has no roots, read at the inner midpoint.
pub fn q_prime_sign(q: &UniPoly, band: &Band) -> i8 {
    sign_at_rational(&q.derivative(), &band.inner_midpoint())
}

/// Sign of `p'` at the right endpoint, decided on the enclosure: `p'` must not
/// vanish anywhere in `[lo, hi]`.
pub fn p_prime_sign_on(p: &UniPoly, e: &RootEnclosure) -> Option<i8> {
    let dp = p.derivative();
    if dp.is_zero() || has_root_in(&dp, &e.lo, &e.hi).unwrap_or(true) {
        return None;
    }
    Some(sign_at_rational(&dp, &e.midpoint()))
}
