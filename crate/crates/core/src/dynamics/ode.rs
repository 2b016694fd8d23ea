//! Dormand-Prince 5(4) with continuous (dense) output.

use crate::error::DynamicsError;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub type Vec2 = [f64; 2];

fn axpy(y: Vec2, terms: &[(f64, &Vec2)], h: f64) -> Vec2 {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Quartic interpolant over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    pub coeffs: [Vec2; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Vec2 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = self.coeffs;
        let f = |i: usize| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        [f(0), f(1)]
    }
}

/// Adaptive stepper with mixed absolute/relative error control at `tol`.
pub struct Dopri5<F: Fn(Vec2) -> Vec2> {
    field: F,
    pub t: f64,
    pub y: Vec2,
    h: f64,
    k1: Vec2,
    tol: f64,
    pub steps: usize,
    pub max_steps: usize,
}

impl<F: Fn(Vec2) -> Vec2> Dopri5<F> {
    pub fn new(field: F, t0: f64, y0: Vec2, tol: f64) -> Result<Self, DynamicsError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(DynamicsError::BadTolerance(tol));
        }
        let k1 = field(y0);
        let mut s = Self {
            field,
            t: t0,
            y: y0,
            h: 0.0,
            k1,
            tol,
            steps: 0,
            max_steps: 5_000_000,
        };
        s.h = s.initial_step();
        Ok(s)
    }

    fn scale(&self, y: f64) -> f64 {
        self.tol + self.tol * y.abs()
    }

    fn initial_step(&self) -> f64 {
        let d0 = norm2(self.y, |i| self.scale(self.y[i]));
        let d1 = norm2(self.k1, |i| self.scale(self.y[i]));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = axpy(self.y, &[(1.0, &self.k1)], h0);
        let f1 = (self.field)(y1);
        let diff = [f1[0] - self.k1[0], f1[1] - self.k1[1]];
        let d2 = norm2(diff, |i| self.scale(self.y[i])) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Takes one accepted step, never beyond `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<DenseSegment, DynamicsError> {
        loop {
            if self.steps >= self.max_steps {
                return Err(DynamicsError::TooManySteps { t: self.t });
            }
            let remaining = t_stop - self.t;
            let h = self.h.min(remaining);
            if h <= 1e-14 * self.t.abs().max(1.0) && remaining > h {
                return Err(DynamicsError::StepUnderflow {
                    t: self.t,
                    x: self.y[0],
                    y: self.y[1],
                });
            }
            let f = &self.field;
            let y = self.y;
            let k1 = self.k1;
            let k2 = f(axpy(y, &[(A21, &k1)], h));
            let k3 = f(axpy(y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(axpy(
                y,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
                h,
            ));
            let k6 = f(axpy(
                y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ));
            let y_new = axpy(
                y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                h,
            );
            let k7 = f(y_new);
            self.steps += 1;

            let err_vec = axpy(
                [0.0, 0.0],
                &[
                    (E1, &k1),
                    (E3, &k3),
                    (E4, &k4),
                    (E5, &k5),
                    (E6, &k6),
                    (E7, &k7),
                ],
                h,
            );
            let err = norm2(err_vec, |i| {
                self.tol + self.tol * y[i].abs().max(y_new[i].abs())
            });
            if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                if h < 1e-300 {
                    return Err(DynamicsError::NonFinite { t: self.t });
                }
                self.h = h * FAC_MIN;
                continue;
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if err <= 1.0 {
                let ydiff = [y_new[0] - y[0], y_new[1] - y[1]];
                let bspl = [h * k1[0] - ydiff[0], h * k1[1] - ydiff[1]];
                let r4 = [
                    ydiff[0] - h * k7[0] - bspl[0],
                    ydiff[1] - h * k7[1] - bspl[1],
                ];
                let r5 = axpy(
                    [0.0, 0.0],
                    &[
                        (D1, &k1),
                        (D3, &k3),
                        (D4, &k4),
                        (D5, &k5),
                        (D6, &k6),
                        (D7, &k7),
                    ],
                    h,
                );
                let seg = DenseSegment {
                    t0: self.t,
                    h,
                    coeffs: [y, ydiff, bspl, r4, r5],
                };
                self.t = if h == remaining { t_stop } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                self.h = h * fac;
                return Ok(seg);
            }
            self.h = h * fac.min(1.0);
        }
    }
}

fn norm2(v: Vec2, scale: impl Fn(usize) -> f64) -> f64 {
    let a = v[0] / scale(0);
    let b = v[1] / scale(1);
    ((a * a + b * b) / 2.0).sqrt()
}
