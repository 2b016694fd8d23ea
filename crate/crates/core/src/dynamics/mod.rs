//! Numerical flow of a synthesized system: oval sampling, orientation,
//! trajectories, first-return maps and Floquet multipliers.

mod ode;

use std::fmt::Write as _;

pub use ode::{DenseSegment, Dopri5, Vec2};

use crate::error::DynamicsError;
use crate::hypotheses::{p_prime_sign_on, Band};
use crate::polyalg::{
    isolate_real_roots, root_to_f64, sturm_count, to_f64, FloatBiPoly, FloatPoly, Rational,
    RootEnclosure, UniPoly,
};
use crate::stability::StabilityContext;
use crate::synthesis::SynthesizedSystem;
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn from_vec(v: Vec2) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

/// Double-precision copy of a system's vector field and curve.
#[derive(Debug, Clone)]
pub struct FloatField {
    p: FloatBiPoly,
    q: FloatBiPoly,
    curve: FloatBiPoly,
}

impl FloatField {
    pub fn new(sys: &SynthesizedSystem) -> Self {
        Self {
            p: sys.p_field.to_f64(),
            q: sys.q_field.to_f64(),
            curve: sys.curve_f.to_f64(),
        }
    }

    pub fn eval(&self, s: State) -> (f64, f64) {
        (self.p.eval(s.x, s.y), self.q.eval(s.x, s.y))
    }

    pub fn curve(&self, s: State) -> f64 {
        self.curve.eval(s.x, s.y)
    }

    fn as_fn(&self) -> impl Fn(Vec2) -> Vec2 + '_ {
        move |v: Vec2| [self.p.eval(v[0], v[1]), self.q.eval(v[0], v[1])]
    }
}

/// `(P(x, y), Q(x, y))` in double precision.
pub fn vector_field(sys: &SynthesizedSystem, s: State) -> (f64, f64) {
    FloatField::new(sys).eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Float endpoints `(x_e, x_d)` of a band, refined to roundoff.
pub fn band_endpoints(p: &UniPoly, band: &Band) -> (f64, f64) {
    (root_to_f64(p, &band.left), root_to_f64(p, &band.right))
}

/// Point `(tau, p q ± sqrt(p))` on the oval over the band.
pub fn sample_oval(
    p: &UniPoly,
    q: &UniPoly,
    band: &Band,
    tau: f64,
    branch: Branch,
) -> Result<State, DynamicsError> {
    let (x_e, x_d) = band_endpoints(p, band);
    if !(tau > x_e && tau < x_d) {
        return Err(DynamicsError::OutsideBand(tau));
    }
    let pv = p.to_f64().eval(tau);
    if pv.is_nan() || pv <= 0.0 {
        return Err(DynamicsError::OutsideBand(tau));
    }
    let root = pv.sqrt();
    let center = pv * q.to_f64().eval(tau);
    let y = match branch {
        Branch::Plus => center + root,
        Branch::Minus => center - root,
    };
    Ok(State::new(tau, y))
}

/// Samples of the curve `(y - center)^2 = radicand` over an interval.
#[derive(Debug, Clone)]
pub struct OvalSampler {
    center: FloatPoly,
    radicand: FloatPoly,
}

impl OvalSampler {
    pub fn new(sys: &SynthesizedSystem) -> Self {
        let form = sys.oval_form();
        Self {
            center: form.center.to_f64(),
            radicand: form.radicand.to_f64(),
        }
    }

    /// `None` where the radicand is negative.
    pub fn at(&self, tau: f64, branch: Branch) -> Option<State> {
        let r = self.radicand.eval(tau);
        if r < 0.0 {
            return None;
        }
        let c = self.center.eval(tau);
        let y = match branch {
            Branch::Plus => c + r.sqrt(),
            Branch::Minus => c - r.sqrt(),
        };
        Some(State::new(tau, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::Clockwise => "clockwise",
            Orientation::CounterClockwise => "counterclockwise",
        }
    }
}

/// At `(x_d, 0)` the field is `(0, p'(x_d)/2)`; a certified band has
/// `p'(x_d) < 0` and `p'(x_e) > 0`, hence the flow runs clockwise.
pub fn flow_orientation(
    sys: &SynthesizedSystem,
    band: &Band,
) -> Result<Orientation, DynamicsError> {
    let p = sys.band_polynomial();
    if !band.left.multiplicity_is_one || !band.right.multiplicity_is_one {
        return Err(DynamicsError::Orientation(
            "band endpoint is a multiple root of p".into(),
        ));
    }
    let right = p_prime_sign_on(&p, &band.right);
    let left = p_prime_sign_on(&p, &band.left);
    match (left, right) {
        (Some(1), Some(-1)) => Ok(Orientation::Clockwise),
        (Some(-1), Some(1)) => Ok(Orientation::CounterClockwise),
        (l, r) => Err(DynamicsError::Orientation(format!(
            "sign of p' not strictly determined at the band endpoints (left {l:?}, right {r:?})"
        ))),
    }
}

/// Accepted steps of an integration with their interpolants.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub dense: Vec<DenseSegment>,
}

impl Trajectory {
    /// State at time `t` from the dense output.
    pub fn at(&self, t: f64) -> Option<State> {
        let idx = self.dense.partition_point(|s| s.t1() < t);
        let seg = self.dense.get(idx)?;
        (t >= seg.t0).then(|| State::from_vec(seg.eval(t)))
    }

    pub fn last(&self) -> Option<State> {
        self.samples.last().map(|s| s.1)
    }

    /// Largest `|f|` over the accepted steps.
    pub fn max_curve_residual(&self, field: &FloatField) -> f64 {
        self.samples
            .iter()
            .map(|(_, s)| field.curve(*s).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,x,y,f`, one row per accepted step.
    pub fn to_csv(&self, field: &FloatField) -> String {
        let mut out = String::from("t,x,y,f\n");
        for (t, s) in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(s.x),
                fmt_f64(s.y),
                fmt_f64(field.curve(*s))
            );
        }
        out
    }

    /// `1/2 ∮ (x dy - y dx)` along the accepted steps; negative for clockwise motion.
    pub fn signed_area(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].1, w[1].1);
                0.5 * (a.x * b.y - b.x * a.y)
            })
            .sum()
    }
}

/// 17 significant digits, scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Integrates from `s0` over `[0, t_end]` with local error control at `tol`.
pub fn integrate(
    sys: &SynthesizedSystem,
    s0: State,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory, DynamicsError> {
    let field = FloatField::new(sys);
    integrate_field(&field, s0, t_end, tol)
}

pub fn integrate_field(
    field: &FloatField,
    s0: State,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory, DynamicsError> {
    match integrate_partial(field, s0, t_end, tol) {
        (traj, None) => Ok(traj),
        (_, Some(err)) => Err(err),
    }
}

/// Like [`integrate_field`], but keeps the steps accepted before a failure.
pub fn integrate_partial(
    field: &FloatField,
    s0: State,
    t_end: f64,
    tol: f64,
) -> (Trajectory, Option<DynamicsError>) {
    let mut traj = Trajectory {
        samples: vec![(0.0, s0)],
        dense: Vec::new(),
    };
    if !(s0.x.is_finite() && s0.y.is_finite()) {
        return (traj, Some(DynamicsError::NonFinite { t: 0.0 }));
    }
    let mut stepper = match Dopri5::new(field.as_fn(), 0.0, [s0.x, s0.y], tol) {
        Ok(s) => s,
        Err(e) => return (traj, Some(e)),
    };
    while stepper.t < t_end {
        match stepper.step(t_end) {
            Ok(seg) => {
                traj.dense.push(seg);
                traj.samples.push((stepper.t, State::from_vec(stepper.y)));
            }
            Err(e) => return (traj, Some(e)),
        }
    }
    (traj, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMapSample {
    pub section_coordinate_in: f64,
    pub section_coordinate_out: f64,
    pub time_of_flight: f64,
}

/// Time budget for one return to the section.
pub const RETURN_TIME_BUDGET: f64 = 1.0e4;
const SECTION_TOL: f64 = 1e-12;

/// Section `{x = x_mid, y > 0}` with `x_mid` the midpoint of the band's inner interval.
pub fn section_abscissa(band: &Band) -> f64 {
    to_f64(&band.inner_midpoint())
}

/// First return to the section `{x = x_mid, y > 0}` starting from `(x_mid, y0)`.
pub fn poincare_return(
    sys: &SynthesizedSystem,
    band: &Band,
    y0: f64,
    tol: f64,
) -> Result<ReturnMapSample, DynamicsError> {
    let field = FloatField::new(sys);
    poincare_return_at(&field, section_abscissa(band), y0, tol)
}

pub fn poincare_return_at(
    field: &FloatField,
    x_mid: f64,
    y0: f64,
    tol: f64,
) -> Result<ReturnMapSample, DynamicsError> {
    if y0.is_nan() || y0 <= 0.0 {
        return Err(DynamicsError::NonPositiveSection(y0));
    }
    let mut stepper = Dopri5::new(field.as_fn(), 0.0, [x_mid, y0], tol)?;
    let mut g_prev = 0.0;
    while stepper.t < RETURN_TIME_BUDGET {
        let seg = stepper.step(RETURN_TIME_BUDGET)?;
        let g = stepper.y[0] - x_mid;
        if stepper.y[0].abs() > 1e8 || stepper.y[1].abs() > 1e8 {
            return Err(DynamicsError::NoReturn(stepper.t));
        }
        if g_prev < 0.0 && g >= 0.0 {
            let t_cross = locate_crossing(&seg, x_mid);
            let s = seg.eval(t_cross);
            if s[1] > 0.0 {
                return Ok(ReturnMapSample {
                    section_coordinate_in: y0,
                    section_coordinate_out: s[1],
                    time_of_flight: t_cross,
                });
            }
        }
        g_prev = g;
    }
    Err(DynamicsError::NoReturn(RETURN_TIME_BUDGET))
}

/// Root of `x(t) - x_mid` on one dense segment (sign change assumed), by
/// Illinois-modified regula falsi with a bisection fallback.
fn locate_crossing(seg: &DenseSegment, x_mid: f64) -> f64 {
    let g = |t: f64| seg.eval(t)[0] - x_mid;
    let (mut a, mut b) = (seg.t0, seg.t1());
    let (mut ga, mut gb) = (g(a), g(b));
    if gb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut t = (a * gb - b * ga) / (gb - ga);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        let gt = g(t);
        if gt.abs() <= SECTION_TOL * 1e-2 || (b - a) <= f64::EPSILON * b.abs().max(1.0) {
            return t;
        }
        if (gt < 0.0) == (ga < 0.0) {
            a = t;
            ga = gt;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            gb = gt;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Floquet multiplier of the oval from two independent routes.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetEstimate {
    /// `exp` of the reduced characteristic integral.
    pub multiplier_from_divergence: f64,
    /// Central difference of the return map at the oval, Richardson-extrapolated.
    pub multiplier_from_return_map: f64,
    /// Central differences with step `delta` and `delta / 2`.
    pub central_differences: (f64, f64),
    pub delta: f64,
    pub reduced_value: f64,
    /// Time of flight of the oval itself.
    pub period: f64,
    /// `|P(y*) - y*|` at the oval's section coordinate.
    pub fixed_point_residual: f64,
    pub section_x: f64,
    pub section_y: f64,
}

/// Relative step of the return-map central difference.
pub const FD_RELATIVE_STEP: f64 = 1e-6;
/// Loosest integrator tolerance used for return-map probes.
pub const PROBE_TOL_CAP: f64 = 1e-12;

pub fn floquet_multiplier(
    sys: &SynthesizedSystem,
    band: &Band,
    quad_tol: f64,
    ode_tol: f64,
) -> Result<FloquetEstimate, DynamicsError> {
    let input = sys
        .pq_form()
        .ok_or_else(|| DynamicsError::Orientation("system has no (p, q) form".into()))?;
    let ctx = StabilityContext::new(&input.p, &input.q, band)?;
    let reduced = ctx.reduced_integral(quad_tol)?;

    let field = FloatField::new(sys);
    let ode_tol = ode_tol.min(PROBE_TOL_CAP);
    let x_mid = section_abscissa(band);
    let y_star = sample_oval(&input.p, &input.q, band, x_mid, Branch::Plus)?.y;
    let fixed = poincare_return_at(&field, x_mid, y_star, ode_tol)?;

    let delta = FD_RELATIVE_STEP * y_star.abs();
    let central = |d: f64| -> Result<f64, DynamicsError> {
        let up = poincare_return_at(&field, x_mid, y_star + d, ode_tol)?;
        let down = poincare_return_at(&field, x_mid, y_star - d, ode_tol)?;
        Ok((up.section_coordinate_out - down.section_coordinate_out) / (2.0 * d))
    };
    let coarse = central(delta)?;
    let fine = central(0.5 * delta)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;

    Ok(FloquetEstimate {
        multiplier_from_divergence: reduced.value.exp(),
        multiplier_from_return_map: extrapolated,
        central_differences: (coarse, fine),
        delta,
        reduced_value: reduced.value,
        period: fixed.time_of_flight,
        fixed_point_residual: (fixed.section_coordinate_out - y_star).abs(),
        section_x: x_mid,
        section_y: y_star,
    })
}

/// Singular point `(a, 0)` with its exact root enclosure.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPoint {
    pub state: State,
    pub enclosure: RootEnclosure,
    /// Whether `(a, 0)` lies on the invariant curve, decided exactly.
    pub on_curve: bool,
}

/// Singular points of a system with `P = y`: `(a, 0)` for every real root `a`
/// of `Q(x, 0)`. A point is on the curve iff `a` is also a root of `f(x, 0)`,
/// i.e. a root of `gcd(Q(x, 0), f(x, 0))` inside the enclosure.
pub fn find_singular_points(sys: &SynthesizedSystem, width: &Rational) -> Vec<SingularPoint> {
    let q0 = sys.singular_polynomial();
    if q0.is_zero() || q0.is_constant() {
        return Vec::new();
    }
    let f0 = sys.curve_on_axis();
    let common = q0.gcd(&f0);
    let Ok(roots) = isolate_real_roots(&q0, width) else {
        return Vec::new();
    };
    roots
        .into_iter()
        .map(|enc| {
            let on_curve = if common.is_zero() {
                true
            } else if common.is_constant() {
                false
            } else {
                common.eval(&enc.lo).is_zero()
                    || common.eval(&enc.hi).is_zero()
                    || sturm_count(&common, &enc.lo, &enc.hi).unwrap_or(0) > 0
            };
            SingularPoint {
                state: State::new(root_to_f64(&q0, &enc), 0.0),
                enclosure: enc,
                on_curve,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::{default_root_width, find_bands};
    use crate::polyalg::int;
    use crate::synthesis::{synthesize_even_odd, synthesize_pq, EvenOddInput, PqInput};

    fn unit() -> UniPoly {
        UniPoly::from_ints(&[1, 0, -1])
    }

    fn unit_system(q: UniPoly) -> (SynthesizedSystem, Band) {
        let sys = synthesize_pq(&PqInput::new(unit(), q)).unwrap();
        let band = find_bands(&unit(), &default_root_width())
            .unwrap()
            .remove(0);
        (sys, band)
    }

    #[test]
    fn field_at_right_endpoint() {
        let (sys, _) = unit_system(UniPoly::x());
        assert_eq!(vector_field(&sys, State::new(1.0, 0.0)), (0.0, -1.0));
        assert_eq!(vector_field(&sys, State::new(0.0, 0.0)), (0.0, 0.0));
    }

    #[test]
    fn oval_samples() {
        let (sys, band) = unit_system(UniPoly::x());
        let s = sample_oval(&unit(), &UniPoly::x(), &band, 0.0, Branch::Plus).unwrap();
        assert_eq!(s, State::new(0.0, 1.0));
        let s = sample_oval(&unit(), &UniPoly::x(), &band, 0.0, Branch::Minus).unwrap();
        assert_eq!(s, State::new(0.0, -1.0));
        assert!(sample_oval(&unit(), &UniPoly::x(), &band, 1.0, Branch::Plus).is_err());
        // Tangency: grad f . field = k f = 0 on the curve.
        let field = FloatField::new(&sys);
        let s = sample_oval(&unit(), &UniPoly::x(), &band, 0.3, Branch::Plus).unwrap();
        assert!(field.curve(s).abs() < 1e-15);
        let (u, v) = field.eval(s);
        let fx = sys.curve_f.partial_x().to_f64().eval(s.x, s.y);
        let fy = sys.curve_f.partial_y().to_f64().eval(s.x, s.y);
        assert!((u * fx + v * fy).abs() < 1e-14);
    }

    #[test]
    fn orientation_clockwise() {
        let (sys, band) = unit_system(UniPoly::x());
        assert_eq!(
            flow_orientation(&sys, &band).unwrap(),
            Orientation::Clockwise
        );
    }

    #[test]
    fn stationary_at_singular_point() {
        let (sys, _) = unit_system(UniPoly::x());
        let traj = integrate(&sys, State::new(0.0, 0.0), 5.0, 1e-10).unwrap();
        assert!(traj.samples.iter().all(|(_, s)| *s == State::new(0.0, 0.0)));
    }

    #[test]
    fn drift_on_oval_is_tolerance_bounded() {
        let (sys, band) = unit_system(UniPoly::x());
        let field = FloatField::new(&sys);
        let s0 = sample_oval(&unit(), &UniPoly::x(), &band, 0.0, Branch::Plus).unwrap();
        let tol = 1e-10;
        let traj = integrate(&sys, s0, 50.0, tol).unwrap();
        assert!(traj.max_curve_residual(&field) <= 1e3 * tol);
    }

    #[test]
    fn outside_start_is_attracted() {
        let (sys, _) = unit_system(UniPoly::x());
        let field = FloatField::new(&sys);
        let s0 = State::new(0.0, 1.2);
        let traj = integrate(&sys, s0, 50.0, 1e-10).unwrap();
        assert!(field.curve(traj.last().unwrap()).abs() < field.curve(s0).abs());
    }

    #[test]
    fn return_map_fixed_point_and_monotone_approach() {
        let (sys, band) = unit_system(UniPoly::x());
        let y_star = sample_oval(
            &unit(),
            &UniPoly::x(),
            &band,
            section_abscissa(&band),
            Branch::Plus,
        )
        .unwrap()
        .y;
        let fixed = poincare_return(&sys, &band, y_star, 1e-10).unwrap();
        assert!((fixed.section_coordinate_out - y_star).abs() < 1e-8);
        assert!(fixed.time_of_flight > 0.0);
        let out = poincare_return(&sys, &band, 1.1 * y_star, 1e-10).unwrap();
        assert!(out.section_coordinate_out > y_star && out.section_coordinate_out < 1.1 * y_star);
        assert!(matches!(
            poincare_return(&sys, &band, 0.0, 1e-10),
            Err(DynamicsError::NonPositiveSection(_))
        ));
    }

    #[test]
    fn singular_points_of_unit_system() {
        let (sys, _) = unit_system(UniPoly::x());
        let pts = find_singular_points(&sys, &default_root_width());
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].state.x, 0.0);
        assert!(!pts[0].on_curve);
    }

    #[test]
    fn singular_points_with_zero_q_are_roots_of_p_prime() {
        let (sys, _) = unit_system(UniPoly::zero());
        let pts = find_singular_points(&sys, &default_root_width());
        assert_eq!(pts.len(), 1);
        assert!(pts[0].enclosure.contains(&int(0)));
    }

    #[test]
    fn even_odd_n1_singular_points_on_curve() {
        let input = EvenOddInput::new(unit(), UniPoly::x(), UniPoly::x(), 1, 2).unwrap();
        let sys = synthesize_even_odd(&input).unwrap();
        let pts = find_singular_points(&sys, &default_root_width());
        let on: Vec<f64> = pts
            .iter()
            .filter(|s| s.on_curve)
            .map(|s| s.state.x)
            .collect();
        assert!(on.contains(&-1.0) && on.contains(&1.0), "{on:?}");
        // The lower branch also meets the axis where x^2 (2 - x^2)^2 = 1 - x^2.
        assert_eq!(on.len(), 4);
    }

    #[test]
    fn floquet_routes_agree() {
        for q in [UniPoly::x(), UniPoly::from_ints(&[0, 1, 1])] {
            let (sys, band) = unit_system(q);
            let est = floquet_multiplier(&sys, &band, 1e-10, 1e-10).unwrap();
            assert!(est.multiplier_from_divergence > 0.0 && est.multiplier_from_divergence < 1.0);
            let log_gap = (est.multiplier_from_return_map.ln() - est.reduced_value).abs();
            assert!(
                log_gap <= 1e-3 * est.reduced_value.abs().max(1.0),
                "{est:?}"
            );
            assert!(est.fixed_point_residual < 1e-8);
        }
    }

    #[test]
    fn reversed_q_gives_reciprocal_multiplier() {
        let (a, band) = unit_system(UniPoly::x());
        let (b, _) = unit_system(UniPoly::from_ints(&[0, -1]));
        let ma = floquet_multiplier(&a, &band, 1e-10, 1e-10).unwrap();
        let mb = floquet_multiplier(&b, &band, 1e-10, 1e-10).unwrap();
        assert!((ma.multiplier_from_divergence * mb.multiplier_from_divergence - 1.0).abs() < 1e-9);
        assert!(mb.multiplier_from_return_map > 1.0);
        let product = ma.multiplier_from_return_map * mb.multiplier_from_return_map;
        assert!((product - 1.0).abs() < 1e-3, "{product}");
    }
}
