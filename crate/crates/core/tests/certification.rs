use algcycle::hypotheses::{
    certify_band, certify_band_with, check_bands, default_root_width, find_bands, Band, Status,
};
use algcycle::polyalg::{has_root_in, int, isolate_real_roots, pow2_neg, ratio, Rational, UniPoly};
use algcycle::stability::{StabilityContext, DEFAULT_W_VALUES};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn golden_p() -> UniPoly {
    &(&UniPoly::from_ints(&[1, 0, -1]) * &UniPoly::from_ints(&[4, 0, -1]))
        * &UniPoly::from_ints(&[9, 0, -1])
}

fn golden_q() -> UniPoly {
    UniPoly::new(vec![int(0), ratio(1, 100)])
}

/// `-(x - a)(x - b)(1 + s x^2)` with `a < b`, and a linear `q`.
fn random_pair(rng: &mut ChaCha8Rng) -> (UniPoly, UniPoly) {
    let a = ratio(rng.gen_range(-24..=8), 8);
    let b = &a + ratio(rng.gen_range(2..=24), 8);
    let s = ratio(rng.gen_range(0..=4), 4);
    let factor = UniPoly::new(vec![-(&a * &b), &a + &b, int(-1)]);
    let p = &factor * &UniPoly::new(vec![int(1), int(0), s]);
    let mut c = int(0);
    while c.is_zero() {
        c = ratio(rng.gen_range(-6..=6), 8);
    }
    let q = UniPoly::new(vec![ratio(rng.gen_range(-4..=4), 8), c]);
    (p, q)
}

/// Twenty fully certified random bands.
fn certified_random_bands() -> Vec<(UniPoly, UniPoly, Band)> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut out = Vec::new();
    for _ in 0..1000 {
        if out.len() == 20 {
            break;
        }
        let (p, q) = random_pair(&mut rng);
        let check = check_bands(&p, &q, &default_root_width()).unwrap();
        for b in check.certified() {
            out.push((p.clone(), q.clone(), b.band.clone()));
        }
    }
    assert_eq!(out.len(), 20);
    out
}

#[test]
fn golden_example_has_three_certified_bands() {
    let check = check_bands(&golden_p(), &golden_q(), &default_root_width()).unwrap();
    assert_eq!(check.bands.len(), 3);
    assert_eq!(check.certified().count(), 3);
    let centers: Vec<f64> = check
        .bands
        .iter()
        .map(|b| algcycle::polyalg::to_f64(&b.band.inner_midpoint()))
        .collect();
    for (c, want) in centers.iter().zip([-2.5, 0.0, 2.5]) {
        assert!((c - want).abs() < 1e-9, "{centers:?}");
    }
}

#[test]
fn certified_bands_survive_dense_sampling() {
    let mut cases = certified_random_bands();
    for b in find_bands(&golden_p(), &default_root_width()).unwrap() {
        cases.push((golden_p(), golden_q(), b));
    }
    for (p, q, band) in cases {
        let pq2 = &(&p * &q) * &q - UniPoly::one();
        let dq = q.derivative();
        let (lo, hi) = band.inner.clone();
        let step = (&hi - &lo) / int(1001);
        for i in 1..=1000 {
            let x = &lo + &step * int(i);
            assert!(p.eval(&x).is_positive());
            assert!(pq2.eval(&x).is_negative());
            assert!(!dq.eval(&x).is_zero());
        }
    }
}

#[test]
fn shrinking_enclosures_never_turns_pass_into_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut inputs: Vec<(UniPoly, UniPoly)> = (0..15).map(|_| random_pair(&mut rng)).collect();
    inputs.push((golden_p(), golden_q()));
    inputs.push((UniPoly::from_ints(&[1, 0, -1]), UniPoly::from_ints(&[1, 1])));
    for (p, q) in inputs {
        for band in find_bands(&p, &ratio(1, 4)).unwrap() {
            let mut previous: Option<[Status; 5]> = None;
            for k in [2u32, 6, 12, 24, 40] {
                let refined = band.refined(&p, &pow2_neg(k));
                let (_, cert) = certify_band_with(&p, &q, &refined, &pow2_neg(k), 0).unwrap();
                let now = cert.statuses().map(|(_, s)| s);
                if let Some(prev) = previous {
                    for (a, b) in prev.iter().zip(now.iter()) {
                        assert!(
                            !(*a == Status::Pass && *b == Status::Fail),
                            "pass flipped to fail for p = {p}, q = {q}"
                        );
                        if *a != Status::Inconclusive {
                            assert_eq!(a, b);
                        }
                    }
                }
                previous = Some(now);
            }
        }
    }
}

#[test]
fn no_singular_point_on_a_certified_oval() {
    let mut cases = certified_random_bands();
    for b in find_bands(&golden_p(), &default_root_width()).unwrap() {
        cases.push((golden_p(), golden_q(), b));
    }
    for (p, q, band) in cases {
        assert!(certify_band(&p, &q, &band).unwrap().passes());
        let pq2 = &(&p * &q) * &q - UniPoly::one();
        let singular = &p.derivative() * &pq2;
        let on_axis = &p * &pq2;
        let (lo, hi) = (band.left.lo.clone(), band.right.hi.clone());
        for enc in isolate_real_roots(&singular, &pow2_neg(60)).unwrap() {
            if enc.hi < lo || enc.lo > hi {
                continue;
            }
            assert!(
                !has_root_in(&on_axis, &enc.lo, &enc.hi).unwrap(),
                "p = {p}, q = {q}"
            );
        }
    }
}

#[test]
fn characteristic_integrals_agree_on_random_bands() {
    let tol = 1e-10;
    for (p, q, band) in certified_random_bands() {
        let ctx = StabilityContext::new(&p, &q, &band).unwrap();
        let div = ctx.div_time_integral(tol).unwrap().value;
        let k = ctx.cofactor_time_integral(tol).unwrap().value;
        let reduced = ctx.reduced_integral(tol).unwrap().value;
        let bound = 1e-8 * div.abs().max(1.0);
        assert!(
            (div - k).abs() <= bound,
            "div {div} k {k} for p = {p}, q = {q}"
        );
        assert!(
            (div - reduced).abs() <= bound,
            "div {div} reduced {reduced} for p = {p}, q = {q}"
        );
        for (w, residual, _) in ctx.w_shift_residuals(&DEFAULT_W_VALUES, tol).unwrap() {
            assert!(residual <= bound, "w = {w}: {residual}");
        }
        assert!(ctx.w_shift_check(&DEFAULT_W_VALUES, tol).unwrap());
    }
}

#[test]
fn equal_product_condition_is_witnessed_exactly() {
    let p = UniPoly::from_ints(&[1, 0, -1]);
    let q = UniPoly::from_ints(&[1, 1]);
    let check = check_bands(&p, &q, &default_root_width()).unwrap();
    assert_eq!(check.certified().count(), 0);
    let cert = &check.bands[0].certificate;
    assert_eq!(cert.pq2_not_one, Status::Fail);
    let witness = cert
        .diagnostics
        .iter()
        .flat_map(|d| d.witnesses.iter())
        .any(|w| matches!(w, algcycle::hypotheses::Witness::Exact(x) if *x == Rational::zero()));
    assert!(witness);
}
