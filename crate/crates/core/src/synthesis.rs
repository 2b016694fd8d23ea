//! Construction of Liénard systems carrying a prescribed invariant oval.
//!
//! Two families are supported:
//!
//! * the `(p, q)` family: `x' = y`, `y' = (3/2 q p' + p q') y - (p'/2)(p q^2 - 1)`
//!   with invariant curve `(y - p q)^2 - p` and cofactor `q p'`;
//! * the `(p, q, h, n, r)` family with `m = n + 1/2`, curve
//!   `(y - h p^r - q p)^2 - p^(2n+1)` and cofactor `(2n+1) p' (h p^(r-1) + q)`.
//!
//! For `n = 0` the second family collapses onto the first with
//! `q~ = q + h p^(r-1)`; [`reduce_even_odd`] performs that reduction.

use crate::error::SynthesisError;
use crate::polyalg::{int, invariance_residual, ratio, BiPoly, Rational, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqInput {
    pub p: UniPoly,
    pub q: UniPoly,
}

impl PqInput {
    pub fn new(p: UniPoly, q: UniPoly) -> Self {
        Self { p, q }
    }
}

/// Inputs of the even/odd family. `m = n + 1/2` is never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenOddInput {
    pub p: UniPoly,
    pub q: UniPoly,
    pub h: UniPoly,
    pub n: u32,
    pub r: u32,
}

impl EvenOddInput {
    /// Validates parities and ranges; `n` and `r` arrive as signed integers
    /// straight from user input.
    pub fn new(p: UniPoly, q: UniPoly, h: UniPoly, n: i64, r: i64) -> Result<Self, SynthesisError> {
        if !p.is_even() {
            return Err(SynthesisError::Parity {
                name: "p",
                expected: "even",
            });
        }
        if !q.is_odd() {
            return Err(SynthesisError::Parity {
                name: "q",
                expected: "odd",
            });
        }
        if !h.is_odd() {
            return Err(SynthesisError::Parity {
                name: "h",
                expected: "odd",
            });
        }
        if n < 0 {
            return Err(SynthesisError::NegativeN(n));
        }
        if r < 2 {
            return Err(SynthesisError::ExponentRange(r));
        }
        let n = u32::try_from(n).map_err(|_| SynthesisError::NegativeN(n))?;
        let r = u32::try_from(r).map_err(|_| SynthesisError::ExponentRange(r))?;
        Ok(Self { p, q, h, n, r })
    }

    /// `m = n + 1/2` as an exact rational.
    pub fn m(&self) -> Rational {
        ratio(2 * self.n as i64 + 1, 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Pq(PqInput),
    EvenOdd(EvenOddInput),
}

/// A planar system `x' = P, y' = Q` with its invariant curve and cofactor.
///
/// `Q = -lienard_f(x) y - lienard_g(x)`, i.e. the system is the Liénard
/// equation `x'' + lienard_f(x) x' + lienard_g(x) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesizedSystem {
    pub p_field: BiPoly,
    pub q_field: BiPoly,
    pub curve_f: BiPoly,
    pub cofactor_k: BiPoly,
    pub lienard_f: UniPoly,
    pub lienard_g: UniPoly,
    pub provenance: Provenance,
}

impl SynthesizedSystem {
    fn from_lienard(
        lienard_f: UniPoly,
        lienard_g: UniPoly,
        curve_f: BiPoly,
        cofactor_k: BiPoly,
        provenance: Provenance,
    ) -> Self {
        let q_field = &BiPoly::from_x_times_y(&-&lienard_f, 1) - &BiPoly::from_x(&lienard_g);
        Self {
            p_field: BiPoly::y(),
            q_field,
            curve_f,
            cofactor_k,
            lienard_f,
            lienard_g,
            provenance,
        }
    }

    /// `max(deg P, deg Q)`.
    pub fn degree(&self) -> u32 {
        self.p_field
            .total_degree()
            .unwrap_or(0)
            .max(self.q_field.total_degree().unwrap_or(0))
    }

    pub fn cofactor_degree(&self) -> Option<u32> {
        self.cofactor_k.total_degree()
    }

    /// `P = y` and `Q` share a factor exactly when `y | Q`, i.e. `Q(x, 0) = 0`.
    pub fn is_coprime(&self) -> bool {
        !self.q_field.at_y_zero().is_zero()
    }

    pub fn divergence(&self) -> BiPoly {
        &self.p_field.partial_x() + &self.q_field.partial_y()
    }

    /// Restriction of `curve_f` to `y = 0`.
    pub fn curve_on_axis(&self) -> UniPoly {
        self.curve_f.at_y_zero()
    }

    /// The `x`-polynomial whose roots are the singular points `(a, 0)`.
    pub fn singular_polynomial(&self) -> UniPoly {
        self.q_field.at_y_zero()
    }

    /// The polynomial `p` defining the band structure of the oval.
    pub fn band_polynomial(&self) -> UniPoly {
        match &self.provenance {
            Provenance::Pq(i) => i.p.clone(),
            Provenance::EvenOdd(i) => i.p.clone(),
        }
    }

    /// The curve written as `(y - center(x))^2 - radicand(x)`.
    pub fn oval_form(&self) -> OvalForm {
        match &self.provenance {
            Provenance::Pq(PqInput { p, q }) => OvalForm {
                center: p * q,
                radicand: p.clone(),
            },
            Provenance::EvenOdd(EvenOddInput { p, q, h, n, r }) => OvalForm {
                center: &(h * &p.pow(*r)) + &(q * p),
                radicand: p.pow(2 * n + 1),
            },
        }
    }

    /// The equivalent `(p, q)` input, when the system belongs to that family.
    pub fn pq_form(&self) -> Option<PqInput> {
        match &self.provenance {
            Provenance::Pq(i) => Some(i.clone()),
            Provenance::EvenOdd(i) => reduce_even_odd(i).ok(),
        }
    }
}

/// Branches `y = center(x) ± sqrt(radicand(x))` of the invariant curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OvalForm {
    pub center: UniPoly,
    pub radicand: UniPoly,
}

/// Builds the `(p, q)` system, its curve `(y - p q)^2 - p` and cofactor `q p'`.
pub fn synthesize_pq(input: &PqInput) -> Result<SynthesizedSystem, SynthesisError> {
    let PqInput { p, q } = input;
    if p.is_constant() {
        return Err(SynthesisError::ConstantP);
    }
    let dp = p.derivative();
    let dq = q.derivative();
    let three_halves = ratio(3, 2);
    let half = ratio(1, 2);

    let lienard_f = -(&(q * &dp).scale(&three_halves) + &(p * &dq));
    let pq2_minus_one = &(p * &(q * q)) - &UniPoly::one();
    let lienard_g = (&dp * &pq2_minus_one).scale(&half);

    let pq = p * q;
    let shifted = &BiPoly::y() - &BiPoly::from_x(&pq);
    let curve_f = &(&shifted * &shifted) - &BiPoly::from_x(p);
    let cofactor_k = BiPoly::from_x(&(q * &dp));

    Ok(SynthesizedSystem::from_lienard(
        lienard_f,
        lienard_g,
        curve_f,
        cofactor_k,
        Provenance::Pq(input.clone()),
    ))
}

/// Builds the even/odd family system with `m = n + 1/2` substituted exactly.
///
/// The `y`-free part `m p p' ([h p^(r-1) + q]^2 - p^(2m-2))` is expanded as
/// `m p' (p S^2 - p^(2n))` with `S = h p^(r-1) + q`, which stays polynomial
/// for every `n >= 0`.
pub fn synthesize_even_odd(input: &EvenOddInput) -> Result<SynthesizedSystem, SynthesisError> {
    let EvenOddInput { p, q, h, n, r } = input;
    if p.is_constant() {
        return Err(SynthesisError::ConstantP);
    }
    let m = input.m();
    let dp = p.derivative();
    let p_r1 = p.pow(r - 1);
    let p_r = &p_r1 * p;
    let s = &(h * &p_r1) + q;

    let bracket = &(h * &p_r1).scale(&(&m + int(*r as i64))) + &q.scale(&(&m + int(1)));
    let y_coeff = &(&(&dp * &bracket) + &(&h.derivative() * &p_r)) + &(p * &q.derivative());
    let lienard_f = -y_coeff;
    let lienard_g = (&dp * &(&(p * &(&s * &s)) - &p.pow(2 * n))).scale(&m);

    let shifted = &(&BiPoly::y() - &BiPoly::from_x(&(h * &p_r))) - &BiPoly::from_x(&(q * p));
    let curve_f = &(&shifted * &shifted) - &BiPoly::from_x(&p.pow(2 * n + 1));
    let cofactor_k = BiPoly::from_x(&(&dp * &s).scale(&int(2 * *n as i64 + 1)));

    Ok(SynthesizedSystem::from_lienard(
        lienard_f,
        lienard_g,
        curve_f,
        cofactor_k,
        Provenance::EvenOdd(input.clone()),
    ))
}

/// Maps an `n = 0` even/odd input onto `(p, q + h p^(r-1))`.
///
/// The postcondition (coefficient-exact equality of the two syntheses) is
/// checked before returning.
pub fn reduce_even_odd(input: &EvenOddInput) -> Result<PqInput, SynthesisError> {
    if input.n != 0 {
        return Err(SynthesisError::NonzeroN(input.n));
    }
    let q_tilde = &input.q + &(&input.h * &input.p.pow(input.r - 1));
    let reduced = PqInput::new(input.p.clone(), q_tilde);
    let a = synthesize_pq(&reduced)?;
    let b = synthesize_even_odd(input)?;
    assert!(same_system(&a, &b), "n = 0 reduction changed the system");
    Ok(reduced)
}

/// Coefficient-exact equality of vector field, curve and cofactor.
pub fn same_system(a: &SynthesizedSystem, b: &SynthesizedSystem) -> bool {
    a.p_field == b.p_field
        && a.q_field == b.q_field
        && a.curve_f == b.curve_f
        && a.cofactor_k == b.cofactor_k
        && a.lienard_f == b.lienard_f
        && a.lienard_g == b.lienard_g
}

/// Returns whether `curve_f` is invariant with cofactor `cofactor_k`, plus the
/// residual `P f_x + Q f_y - k f`.
pub fn verify_invariance(sys: &SynthesizedSystem) -> (bool, BiPoly) {
    let res = invariance_residual(&sys.p_field, &sys.q_field, &sys.curve_f, &sys.cofactor_k);
    (res.is_zero(), res)
}
