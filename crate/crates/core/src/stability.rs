//! Characteristic integrals over a band and stability classification.
//!
//! Along the oval `y = p q ± sqrt(p)` the period integrals of the divergence
//! and of the cofactor become integrals in `tau` over `(x_e, x_d)` of
//!
//! ```text
//!     (a q p' + b p q') / ((p q^2 - 1) sqrt(p))
//! ```
//!
//! with `(a, b) = (-3, -2)` for the divergence, `(-2, 0)` for the cofactor and
//! `(-(w + 3), -2 (1 + w))` for the combination `I_div + w (I_div - I_k)`.
//! Taking `w = -3` leaves `4 p q'` in the numerator, whose sign is fixed on a
//! certified band.
//!
//! The `1/sqrt` endpoint singularity is absorbed by `tau = c + h cos(theta)`:
//! `p = h^2 sin^2(theta) r(tau)` with `r > 0` on the closed band, and the
//! integral becomes `int_0^pi (a q p' + b p q') / ((p q^2 - 1) sqrt(r)) dtheta`,
//! a smooth periodic integrand handled by the midpoint rule in `theta`
//! (Gauss-Chebyshev quadrature of the first kind in `tau`).

use std::f64::consts::PI;

use crate::error::StabilityError;
use crate::hypotheses::{
    certify_band_with, default_root_width, q_prime_sign, Band, DEFAULT_RETRIES,
};
use crate::polyalg::{root_to_f64, FloatPoly, UniPoly};

/// Node budget for the doubling loop.
pub const MAX_NODES: usize = 1 << 21;
const START_NODES: usize = 16;

/// Default `w` values for [`StabilityContext::w_shift_check`].
pub const DEFAULT_W_VALUES: [f64; 5] = [-3.0, -1.0, 0.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub estimated_error: f64,
    pub node_count: usize,
}

/// Numerator `qp_coeff * q p' + pq_coeff * p q'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrand {
    pub qp_coeff: f64,
    pub pq_coeff: f64,
}

impl Integrand {
    pub const DIVERGENCE: Integrand = Integrand {
        qp_coeff: -3.0,
        pq_coeff: -2.0,
    };
    pub const COFACTOR: Integrand = Integrand {
        qp_coeff: -2.0,
        pq_coeff: 0.0,
    };
    pub const REDUCED: Integrand = Integrand {
        qp_coeff: 0.0,
        pq_coeff: 4.0,
    };

    /// Integrand of `I_div + w (I_div - I_k)`.
    pub fn shifted(w: f64) -> Integrand {
        Integrand {
            qp_coeff: -(w + 3.0),
            pq_coeff: -2.0 * (1.0 + w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    Unstable,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub reduced_value: f64,
    pub hyperbolicity_margin: f64,
    /// `(|I_div - I_k|, |I_div - I_reduced|)`.
    pub consistency_residuals: (f64, f64),
    /// Sign of `q'` on the band (constant by certification).
    pub q_prime_sign: i8,
    pub reduced: QuadratureResult,
    pub divergence: QuadratureResult,
    pub cofactor: QuadratureResult,
}

/// Taylor coefficients of `p(anchor + sign * d)` in powers of `d`, in double precision.
fn taylor_shift(p: &FloatPoly, anchor: f64, sign: f64) -> Vec<f64> {
    let mut c = p.0.clone();
    let n = c.len();
    // Repeated synthetic division by (x - anchor).
    for k in 0..n {
        for j in (k..n - 1).rev() {
            c[j] += anchor * c[j + 1];
        }
    }
    let mut s = 1.0;
    for v in c.iter_mut() {
        *v *= s;
        s *= sign;
    }
    c
}

/// Float data for quadrature on one band, built from exact certificates.
#[derive(Debug, Clone)]
pub struct StabilityContext {
    p: UniPoly,
    q: UniPoly,
    band: Band,
    full_pass: bool,
    pub x_e: f64,
    pub x_d: f64,
    dpf: FloatPoly,
    qf: FloatPoly,
    dqf: FloatPoly,
    /// `p(x_e + d) / d` and `p(x_d - d) / d` as polynomials in `d`.
    left_quot: FloatPoly,
    right_quot: FloatPoly,
    zero_qp: bool,
    zero_pq: bool,
}

impl StabilityContext {
    /// Certifies the band and prepares the quadrature. Requires the hypotheses
    /// that make the integrals finite: positivity, simple endpoints and
    /// `p q^2 != 1`.
    pub fn new(p: &UniPoly, q: &UniPoly, band: &Band) -> Result<Self, StabilityError> {
        let (band, cert) = certify_band_with(p, q, band, &default_root_width(), DEFAULT_RETRIES)
            .map_err(|e| StabilityError::Uncertified(e.to_string()))?;
        if !cert.integrals_defined() {
            let failed: Vec<String> = cert
                .statuses()
                .iter()
                .filter(|(_, s)| *s != crate::hypotheses::Status::Pass)
                .map(|(c, s)| format!("{c}: {}", s.as_str()))
                .collect();
            return Err(StabilityError::Uncertified(failed.join(", ")));
        }
        Ok(Self::from_certified(p, q, &band, cert.passes()))
    }

    fn from_certified(p: &UniPoly, q: &UniPoly, band: &Band, full_pass: bool) -> Self {
        let x_e = root_to_f64(p, &band.left);
        let x_d = root_to_f64(p, &band.right);
        let pf = p.to_f64();
        let left = taylor_shift(&pf, x_e, 1.0);
        let right = taylor_shift(&pf, x_d, -1.0);
        let dp = p.derivative();
        let dq = q.derivative();
        Self {
            p: p.clone(),
            q: q.clone(),
            band: band.clone(),
            full_pass,
            x_e,
            x_d,
            dpf: dp.to_f64(),
            qf: q.to_f64(),
            dqf: dq.to_f64(),
            left_quot: FloatPoly(left[1..].to_vec()),
            right_quot: FloatPoly(right[1..].to_vec()),
            zero_qp: (q * &dp).is_zero(),
            zero_pq: (p * &dq).is_zero(),
        }
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    pub fn is_fully_certified(&self) -> bool {
        self.full_pass
    }

    /// `(tau, p(tau), r(tau))` at angle `theta`, with `p` and `r` computed from
    /// the Taylor expansion about the nearer endpoint.
    fn node(&self, theta: f64) -> (f64, f64, f64) {
        let h = 0.5 * (self.x_d - self.x_e);
        let half = 0.5 * theta;
        // tau - x_e = h (1 + cos) = 2 h cos^2(theta/2); x_d - tau = 2 h sin^2(theta/2)
        let from_left = 2.0 * h * half.cos().powi(2);
        let from_right = 2.0 * h * half.sin().powi(2);
        let (tau, r) = if from_left <= from_right {
            (
                self.x_e + from_left,
                self.left_quot.eval(from_left) / from_right,
            )
        } else {
            (
                self.x_d - from_right,
                self.right_quot.eval(from_right) / from_left,
            )
        };
        (tau, r * from_left * from_right, r)
    }

    fn integrand_at(&self, f: Integrand, theta: f64) -> Result<f64, StabilityError> {
        let (tau, p, r) = self.node(theta);
        let q = self.qf.eval(tau);
        let num = f.qp_coeff * q * self.dpf.eval(tau) + f.pq_coeff * p * self.dqf.eval(tau);
        let val = num / ((p * q * q - 1.0) * r.sqrt());
        if val.is_finite() {
            Ok(val)
        } else {
            Err(StabilityError::NonFinite(tau))
        }
    }

    fn midpoint_rule(&self, f: Integrand, n: usize) -> Result<f64, StabilityError> {
        let step = PI / n as f64;
        let mut sum = 0.0;
        for k in 0..n {
            sum += self.integrand_at(f, (k as f64 + 0.5) * step)?;
        }
        Ok(sum * step)
    }

    /// Integral of `f` over the band, doubling the node count until two
    /// successive values agree to `tol`.
    pub fn integrate(&self, f: Integrand, tol: f64) -> Result<QuadratureResult, StabilityError> {
        let qp_dead = f.qp_coeff == 0.0 || self.zero_qp;
        let pq_dead = f.pq_coeff == 0.0 || self.zero_pq;
        if qp_dead && pq_dead {
            return Ok(QuadratureResult {
                value: 0.0,
                estimated_error: 0.0,
                node_count: 0,
            });
        }
        let mut n = START_NODES;
        let mut prev = self.midpoint_rule(f, n)?;
        loop {
            let n2 = 2 * n;
            let cur = self.midpoint_rule(f, n2)?;
            let err = (cur - prev).abs();
            if err <= tol {
                return Ok(QuadratureResult {
                    value: cur,
                    estimated_error: err,
                    node_count: n2,
                });
            }
            if n2 >= MAX_NODES {
                return Err(StabilityError::NoConvergence {
                    nodes: n2,
                    estimate: err,
                });
            }
            prev = cur;
            n = n2;
        }
    }

    pub fn reduced_integral(&self, tol: f64) -> Result<QuadratureResult, StabilityError> {
        self.integrate(Integrand::REDUCED, tol)
    }

    pub fn div_time_integral(&self, tol: f64) -> Result<QuadratureResult, StabilityError> {
        self.integrate(Integrand::DIVERGENCE, tol)
    }

    pub fn cofactor_time_integral(&self, tol: f64) -> Result<QuadratureResult, StabilityError> {
        self.integrate(Integrand::COFACTOR, tol)
    }

    /// For each `w`, compares the quadrature of the combined integrand with
    /// `I_div + w (I_div - I_k)`. The comparison threshold is `tol` scaled by
    /// `max(1, |I_div|)` and by the number of quadratures that enter it.
    pub fn w_shift_check(&self, w_values: &[f64], tol: f64) -> Result<bool, StabilityError> {
        Ok(self
            .w_shift_residuals(w_values, tol)?
            .iter()
            .all(|&(_, residual, bound)| residual <= bound))
    }

    /// `(w, |combined - (I_div + w (I_div - I_k))|, bound)` per `w`.
    pub fn w_shift_residuals(
        &self,
        w_values: &[f64],
        tol: f64,
    ) -> Result<Vec<(f64, f64, f64)>, StabilityError> {
        let div = self.div_time_integral(tol)?;
        let k = self.cofactor_time_integral(tol)?;
        let scale = div.value.abs().max(1.0);
        w_values
            .iter()
            .map(|&w| {
                let combined = self.integrate(Integrand::shifted(w), tol)?;
                let predicted = div.value + w * (div.value - k.value);
                let bound = tol * scale * (2.0 + 2.0 * w.abs());
                Ok((w, (combined.value - predicted).abs(), bound))
            })
            .collect()
    }

    /// Stability from the sign of the reduced integral, cross-checked against
    /// the divergence and cofactor integrals and the sign of `q'`.
    pub fn classify(&self, tol: f64) -> Result<StabilityVerdict, StabilityError> {
        if !self.full_pass {
            return Err(StabilityError::Uncertified(
                "q' is not certified nonzero on the band".into(),
            ));
        }
        let reduced = self.reduced_integral(tol)?;
        let divergence = self.div_time_integral(tol)?;
        let cofactor = self.cofactor_time_integral(tol)?;
        let residuals = (
            (divergence.value - cofactor.value).abs(),
            (divergence.value - reduced.value).abs(),
        );
        let margin = reduced.value.abs();
        let worst = residuals.0.max(residuals.1).max(reduced.estimated_error);
        if margin <= worst {
            return Err(StabilityError::MarginTooSmall {
                margin,
                residual: worst,
            });
        }
        let class = if reduced.value < 0.0 {
            StabilityClass::Stable
        } else {
            StabilityClass::Unstable
        };
        let sign = q_prime_sign(&self.q, &self.band);
        let expected = if sign > 0 {
            StabilityClass::Stable
        } else {
            StabilityClass::Unstable
        };
        if class != expected {
            return Err(StabilityError::SignLaw {
                q_prime_sign: sign,
                value: reduced.value,
            });
        }
        Ok(StabilityVerdict {
            class,
            reduced_value: reduced.value,
            hyperbolicity_margin: margin,
            consistency_residuals: residuals,
            q_prime_sign: sign,
            reduced,
            divergence,
            cofactor,
        })
    }

    pub fn p(&self) -> &UniPoly {
        &self.p
    }

    pub fn q(&self) -> &UniPoly {
        &self.q
    }
}

pub fn reduced_integral(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
    tol: f64,
) -> Result<QuadratureResult, StabilityError> {
    StabilityContext::new(p, q, band)?.reduced_integral(tol)
}

pub fn div_time_integral(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
    tol: f64,
) -> Result<QuadratureResult, StabilityError> {
    StabilityContext::new(p, q, band)?.div_time_integral(tol)
}

pub fn cofactor_time_integral(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
    tol: f64,
) -> Result<QuadratureResult, StabilityError> {
    StabilityContext::new(p, q, band)?.cofactor_time_integral(tol)
}

pub fn w_shift_check(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
    w_values: &[f64],
    tol: f64,
) -> Result<bool, StabilityError> {
    StabilityContext::new(p, q, band)?.w_shift_check(w_values, tol)
}

pub fn classify(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
    tol: f64,
) -> Result<StabilityVerdict, StabilityError> {
    StabilityContext::new(p, q, band)?.classify(tol)
}
