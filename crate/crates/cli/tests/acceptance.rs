//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use algcycle::dynamics::{
    floquet_multiplier, flow_orientation, integrate_field, poincare_return, sample_oval,
    section_abscissa, vector_field, Branch, FloatField, Orientation, State,
};
use algcycle::hypotheses::{check_bands, default_root_width, Band, Status, Witness};
use algcycle::polyalg::{int, ratio, root_to_f64, sturm_count, Rational, UniPoly};
use algcycle::stability::{classify, reduced_integral, StabilityContext, DEFAULT_W_VALUES};
use algcycle::synthesis::{synthesize_pq, verify_invariance, PqInput};
use algcycle_cli::commands;
use algcycle_cli::job::JobSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QUAD_TOL: f64 = 1e-10;
const ODE_TOL: f64 = 1e-10;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn unit() -> UniPoly {
    UniPoly::from_ints(&[1, 0, -1])
}

fn three_band_p() -> UniPoly {
    &(&unit() * &UniPoly::from_ints(&[4, 0, -1])) * &UniPoly::from_ints(&[9, 0, -1])
}

fn hundredth_x() -> UniPoly {
    UniPoly::new(vec![int(0), ratio(1, 100)])
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> UniPoly {
    let d = rng.gen_range(0..=max_degree);
    UniPoly::new(
        (0..=d)
            .map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4)))
            .collect(),
    )
}

fn certified_bands(p: &UniPoly, q: &UniPoly) -> Vec<Band> {
    check_bands(p, q, &default_root_width())
        .map(|c| c.certified().map(|b| b.band.clone()).collect())
        .unwrap_or_default()
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

fn exact_invariance() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut count = 0;
    while count < 100 {
        let p = random_poly(&mut rng, 8);
        if p.is_constant() {
            continue;
        }
        let q = random_poly(&mut rng, 5);
        let sys = synthesize_pq(&PqInput::new(p.clone(), q.clone())).map_err(|e| e.to_string())?;
        let (ok, residual) = verify_invariance(&sys);
        ensure(
            ok && residual.is_zero(),
            format!("nonzero residual for p = {p}, q = {q}"),
        )?;
        count += 1;
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "100 systems, residual identically zero, {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

fn golden_example() -> Verdict {
    let start = Instant::now();
    let p = three_band_p();
    let q = hundredth_x();
    let check = check_bands(&p, &q, &default_root_width()).map_err(|e| e.to_string())?;
    let bands: Vec<&Band> = check.certified().map(|b| &b.band).collect();
    ensure(bands.len() == 3, format!("{} certified bands", bands.len()))?;
    let mut values = Vec::new();
    for (band, (lo, hi)) in bands.iter().zip([(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]) {
        let (x_e, x_d) = (root_to_f64(&p, &band.left), root_to_f64(&p, &band.right));
        ensure(
            (x_e - lo).abs() < 1e-12 && (x_d - hi).abs() < 1e-12,
            format!("band ({x_e}, {x_d})"),
        )?;
        let v = classify(&p, &q, band, QUAD_TOL).map_err(|e| e.to_string())?;
        ensure(
            v.class.as_str() == "stable" && v.q_prime_sign > 0,
            "not stable",
        )?;
        let residual = v
            .consistency_residuals
            .0
            .max(v.consistency_residuals.1)
            .max(v.reduced.estimated_error);
        ensure(v.reduced_value < 0.0, "reduced value not negative")?;
        ensure(
            v.hyperbolicity_margin > 10.0 * residual,
            format!("margin {} vs residual {residual}", v.hyperbolicity_margin),
        )?;
        values.push(format!("{:.6}", v.reduced_value));
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("3 stable bands, values [{}]", values.join(", ")))
}

/// `-(x - a)(x - b)(1 + s x^2)` with a linear `q`.
fn random_band_pair(rng: &mut ChaCha8Rng) -> (UniPoly, UniPoly) {
    let a = ratio(rng.gen_range(-24..=8), 8);
    let b = &a + ratio(rng.gen_range(2..=24), 8);
    let s = ratio(rng.gen_range(0..=4), 4);
    let p =
        &UniPoly::new(vec![-(&a * &b), &a + &b, int(-1)]) * &UniPoly::new(vec![int(1), int(0), s]);
    let mut c = int(0);
    while c == int(0) {
        c = ratio(rng.gen_range(-6..=6), 8);
    }
    (p, UniPoly::new(vec![ratio(rng.gen_range(-4..=4), 8), c]))
}

fn integral_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut done = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        if done == 20 {
            break;
        }
        let (p, q) = random_band_pair(&mut rng);
        for band in certified_bands(&p, &q) {
            if done == 20 {
                break;
            }
            let ctx = StabilityContext::new(&p, &q, &band).map_err(|e| e.to_string())?;
            let div = ctx
                .div_time_integral(QUAD_TOL)
                .map_err(|e| e.to_string())?
                .value;
            let k = ctx
                .cofactor_time_integral(QUAD_TOL)
                .map_err(|e| e.to_string())?
                .value;
            let reduced = ctx
                .reduced_integral(QUAD_TOL)
                .map_err(|e| e.to_string())?
                .value;
            let scale = div.abs().max(1.0);
            let mut rel = [(div - k).abs(), (div - reduced).abs()]
                .map(|r| r / scale)
                .to_vec();
            for (_, r, _) in ctx
                .w_shift_residuals(&DEFAULT_W_VALUES, QUAD_TOL)
                .map_err(|e| e.to_string())?
            {
                rel.push(r / scale);
            }
            let m = rel.iter().copied().fold(0.0, f64::max);
            ensure(
                m <= 1e-8,
                format!("relative residual {m:e} for p = {p}, q = {q}"),
            )?;
            worst = worst.max(m);
            done += 1;
        }
    }
    ensure(done == 20, format!("only {done} certified bands generated"))?;
    Ok(format!("20 bands, worst relative residual {worst:.1e}"))
}

fn dynamics_cross_validation() -> Verdict {
    let start = Instant::now();
    let band = certified_bands(&unit(), &UniPoly::x()).remove(0);
    let forward = synthesize_pq(&PqInput::new(unit(), UniPoly::x())).map_err(|e| e.to_string())?;
    let backward = synthesize_pq(&PqInput::new(unit(), UniPoly::from_ints(&[0, -1])))
        .map_err(|e| e.to_string())?;
    let a = floquet_multiplier(&forward, &band, QUAD_TOL, ODE_TOL).map_err(|e| e.to_string())?;
    let b = floquet_multiplier(&backward, &band, QUAD_TOL, ODE_TOL).map_err(|e| e.to_string())?;
    let ma = a.multiplier_from_return_map;
    let mb = b.multiplier_from_return_map;
    let gap = (ma.ln() - a.reduced_value).abs();
    ensure(
        gap <= 1e-3 * a.reduced_value.abs().max(1.0),
        format!("log gap {gap:e}"),
    )?;
    ensure(ma > 0.0 && ma < 1.0, format!("multiplier {ma}"))?;
    let reciprocal = ((mb - 1.0 / ma) * ma).abs();
    ensure(
        reciprocal <= 1e-3,
        format!("reciprocal mismatch {reciprocal:e}"),
    )?;
    ensure(mb > 1.0, format!("reversed multiplier {mb}"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "multiplier {ma:.6e}, log gap {gap:.1e}, reversed {mb:.6e}"
    ))
}

fn product_condition_necessity() -> Verdict {
    let p = unit();
    let q = UniPoly::from_ints(&[1, 1]);
    let check = check_bands(&p, &q, &default_root_width()).map_err(|e| e.to_string())?;
    ensure(check.certified().count() == 0, "a band was certified")?;
    let cert = &check.bands.first().ok_or("no band found")?.certificate;
    ensure(
        cert.pq2_not_one == Status::Fail,
        format!("pq2_not_one is {}", cert.pq2_not_one.as_str()),
    )?;
    let zero = Rational::from_integer(0.into());
    let witnessed = cert
        .diagnostics
        .iter()
        .flat_map(|d| &d.witnesses)
        .any(|w| *w == Witness::Exact(zero.clone()));
    ensure(witnessed, "no exact witness at x = 0")?;
    let g = &(&p * &q) * &q - UniPoly::one();
    ensure(g.eval(&zero) == zero, "p q^2 - 1 is not zero at 0")?;
    Ok("certification fails, exact witness x = 0".into())
}

fn even_odd_audit() -> Verdict {
    let job = |n: i64| {
        JobSpec::from_json(&format!(
            r#"{{"p": ["1", "0", "-1"], "q": ["0", "1"], "h": ["0", "1"], "n": {n}, "r": 2}}"#
        ))
        .map_err(|e| e.to_string())
    };
    let high = commands::audit_family(&job(1)?);
    ensure(high.exit_code == 0, "audit did not complete for n = 1")?;
    ensure(
        high.report["verdict"] == "not a limit cycle",
        format!("verdict {}", high.report["verdict"]),
    )?;
    let points = high.report["bands"][0]["on_oval_singular_points"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    for x in ["-1", "1"] {
        ensure(
            points
                .iter()
                .any(|s| s["x_exact"] == x && s["on_curve"] == true),
            format!("({x}, 0) not reported on the oval"),
        )?;
    }
    let low = commands::audit_family(&job(0)?);
    ensure(low.exit_code == 0, "audit did not complete for n = 0")?;
    ensure(
        low.report["identical_to_p_q_synthesis"] == true,
        "reduction differs from direct synthesis",
    )?;
    let reduced: Vec<String> =
        serde_json::from_value(low.report["reduced_q"]["coefficients"].clone())
            .map_err(|e| e.to_string())?;
    ensure(
        reduced == ["0", "2", "0", "-1"],
        format!("reduced q = {reduced:?}"),
    )?;
    Ok("n = 1: (-1, 0) and (1, 0) on the oval; n = 0: reduced q = 2x - x^3, identical".into())
}

fn clockwise_orientation() -> Verdict {
    let mut n = 0;
    for (p, q) in [(unit(), UniPoly::x()), (three_band_p(), hundredth_x())] {
        let sys = synthesize_pq(&PqInput::new(p.clone(), q.clone())).map_err(|e| e.to_string())?;
        for band in certified_bands(&p, &q) {
            let o = flow_orientation(&sys, &band).map_err(|e| e.to_string())?;
            ensure(o == Orientation::Clockwise, "counterclockwise band")?;
            let x_d = root_to_f64(&p, &band.right);
            let (u, v) = vector_field(&sys, State::new(x_d, 0.0));
            let want = p.derivative().to_f64().eval(x_d) / 2.0;
            ensure(
                u == 0.0 && (v - want).abs() <= 1e-12 * want.abs(),
                format!("field ({u}, {v}) vs (0, {want})"),
            )?;
            n += 1;
        }
    }
    Ok(format!("{n} bands clockwise, field at (x_d, 0) matches"))
}

fn sampled_sign_changes(p: &UniPoly, lo: f64, hi: f64) -> usize {
    let fp = p.to_f64();
    let step = 1.0 / 1024.0;
    let mut x = lo + step / 3.0;
    let mut prev = fp.eval(x).signum();
    let mut count = 0;
    while x < hi {
        x += step;
        let s = fp.eval(x).signum();
        count += usize::from(s != prev);
        prev = s;
    }
    count
}

fn property_suite() -> Verdict {
    // Curve drift over ten returns at two tolerances.
    let p = unit();
    let q = UniPoly::x();
    let sys = synthesize_pq(&PqInput::new(p.clone(), q.clone())).map_err(|e| e.to_string())?;
    let band = certified_bands(&p, &q).remove(0);
    let field = FloatField::new(&sys);
    let s0 = sample_oval(&p, &q, &band, section_abscissa(&band), Branch::Plus)
        .map_err(|e| e.to_string())?;
    let mut drifts = Vec::new();
    for tol in [ODE_TOL * 1e2, ODE_TOL] {
        let period = poincare_return(&sys, &band, s0.y, tol)
            .map_err(|e| e.to_string())?
            .time_of_flight;
        let traj = integrate_field(&field, s0, 10.0 * period, tol).map_err(|e| e.to_string())?;
        let drift = traj.max_curve_residual(&field);
        ensure(
            drift <= 1e3 * tol,
            format!("drift {drift:e} at tol {tol:e}"),
        )?;
        drifts.push(format!("{drift:.1e}"));
    }

    // Reversing q negates the reduced integral.
    for (p, q) in [(unit(), UniPoly::x()), (three_band_p(), hundredth_x())] {
        for band in certified_bands(&p, &q) {
            let a = reduced_integral(&p, &q, &band, QUAD_TOL)
                .map_err(|e| e.to_string())?
                .value;
            let b = reduced_integral(&p, &-q.clone(), &band, QUAD_TOL)
                .map_err(|e| e.to_string())?
                .value;
            ensure((a + b).abs() <= 1e-12 * a.abs(), format!("{a} vs {b}"))?;
        }
    }

    // Sturm counts against sign sampling on polynomials with roots k/4.
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for _ in 0..100 {
        let mut poly = UniPoly::constant(ratio(rng.gen_range(1..=5), rng.gen_range(1..=3)));
        let mut roots: Vec<i64> = Vec::new();
        let budget = rng.gen_range(1..=8usize);
        let mut degree = 0;
        while degree < budget {
            if rng.gen_bool(0.3) && degree + 2 <= budget {
                poly = &poly * &UniPoly::from_ints(&[rng.gen_range(1..=4), 0, 1]);
                degree += 2;
            } else {
                let k = rng.gen_range(-12..=12);
                if !roots.contains(&k) {
                    roots.push(k);
                    poly = &poly * &UniPoly::new(vec![ratio(-k, 4), int(1)]);
                    degree += 1;
                }
            }
        }
        let a = rng.gen_range(-16..0) as f64 / 4.0 + 0.1;
        let b = rng.gen_range(0..16) as f64 / 4.0 + 0.1;
        let (lo, hi) = (
            Rational::from_float(a).ok_or("bad bound")?,
            Rational::from_float(b).ok_or("bad bound")?,
        );
        let oracle = sampled_sign_changes(&poly, a, b);
        let sturm = sturm_count(&poly, &lo, &hi).map_err(|e| e.to_string())?;
        ensure(
            oracle == sturm,
            format!("{poly} on ({a}, {b}): sturm {sturm}, sampled {oracle}"),
        )?;
    }
    Ok(format!(
        "drift [{}], antisymmetry exact to 1e-12, 100 Sturm counts agree",
        drifts.join(", ")
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("exact invariance", exact_invariance),
        ("golden three-band example", golden_example),
        ("characteristic integral identities", integral_identities),
        ("dynamics cross-validation", dynamics_cross_validation),
        ("necessity of p q^2 != 1", product_condition_necessity),
        ("even/odd family audit", even_odd_audit),
        ("clockwise orientation", clockwise_orientation),
        ("property suite", property_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
