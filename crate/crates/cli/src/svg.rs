//! Static phase portraits.

use std::fmt::Write as _;

use algcycle::dynamics::{
    integrate_partial, poincare_return, sample_oval, section_abscissa, Branch, FloatField,
    OvalSampler, SingularPoint, State,
};
use algcycle::hypotheses::CertifiedBand;
use algcycle::polyalg::root_to_f64;
use algcycle::synthesis::SynthesizedSystem;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 32.0;
const OVAL_SAMPLES: usize = 256;
const PALETTE: [&str; 4] = ["#1f5fa8", "#b8461b", "#2e7d32", "#6a3d9a"];

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: &[State]) -> Self {
        let (mut xl, mut xh, mut yl, mut yh) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for s in points.iter().filter(|s| s.x.is_finite() && s.y.is_finite()) {
            xl = xl.min(s.x);
            xh = xh.max(s.x);
            yl = yl.min(s.y);
            yh = yh.max(s.y);
        }
        if !xl.is_finite() {
            (xl, xh, yl, yh) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (xh - xl).max(yh - yl).max(1e-9) * 1.1;
        let (cx, cy) = (0.5 * (xl + xh), 0.5 * (yl + yh));
        Self {
            x0: cx - 0.5 * span,
            y0: cy + 0.5 * span,
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, s: State) -> (f64, f64) {
        (
            MARGIN + (s.x - self.x0) * self.scale,
            MARGIN + (self.y0 - s.y) * self.scale,
        )
    }
}

fn oval_points(sampler: &OvalSampler, lo: f64, hi: f64) -> Vec<State> {
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let tau = |i: usize| c - h * (std::f64::consts::PI * i as f64 / OVAL_SAMPLES as f64).cos();
    let upper = (0..=OVAL_SAMPLES).filter_map(|i| sampler.at(tau(i), Branch::Plus));
    let lower = (0..=OVAL_SAMPLES)
        .rev()
        .filter_map(|i| sampler.at(tau(i), Branch::Minus));
    upper.chain(lower).collect()
}

fn spiral(sys: &SynthesizedSystem, band: &CertifiedBand, tol: f64) -> Vec<State> {
    let Some(input) = sys.pq_form() else {
        return Vec::new();
    };
    let x_mid = section_abscissa(&band.band);
    let (Ok(up), Ok(down)) = (
        sample_oval(&input.p, &input.q, &band.band, x_mid, Branch::Plus),
        sample_oval(&input.p, &input.q, &band.band, x_mid, Branch::Minus),
    ) else {
        return Vec::new();
    };
    let start = State::new(x_mid, up.y + 0.25 * (up.y - down.y));
    let field = FloatField::new(sys);
    let period = poincare_return(sys, &band.band, up.y, tol).map_or(20.0, |r| r.time_of_flight);
    let (traj, _) = integrate_partial(&field, start, 3.0 * period, tol);
    traj.samples.into_iter().map(|(_, s)| s).collect()
}

fn path(frame: &Frame, points: &[State], close: bool) -> String {
    let mut d = String::new();
    for (i, s) in points.iter().enumerate() {
        let (u, v) = frame.map(*s);
        let _ = write!(d, "{}{u:.3},{v:.3}", if i == 0 { "M" } else { " L" });
    }
    if close {
        d.push_str(" Z");
    }
    d
}

/// SVG with the certified ovals, the singular points and one outer trajectory per oval.
pub fn portrait(
    sys: &SynthesizedSystem,
    bands: &[CertifiedBand],
    singular: &[SingularPoint],
    tol: f64,
) -> String {
    let sampler = OvalSampler::new(sys);
    let p = sys.band_polynomial();
    let ovals: Vec<Vec<State>> = bands
        .iter()
        .map(|b| {
            oval_points(
                &sampler,
                root_to_f64(&p, &b.band.left),
                root_to_f64(&p, &b.band.right),
            )
        })
        .collect();
    let spirals: Vec<Vec<State>> = bands.iter().map(|b| spiral(sys, b, tol)).collect();

    let mut all: Vec<State> = ovals.iter().flatten().copied().collect();
    if all.is_empty() {
        all.extend(singular.iter().map(|s| s.state));
    }
    let frame = Frame::fit(&all);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    let (ax0, ay) = frame.map(State::new(frame.x0 - MARGIN / frame.scale, 0.0));
    let (ax1, _) = frame.map(State::new(frame.x0 + (SIZE - MARGIN) / frame.scale, 0.0));
    let _ = writeln!(
        out,
        "<line x1=\"{ax0:.3}\" y1=\"{ay:.3}\" x2=\"{ax1:.3}\" y2=\"{ay:.3}\" stroke=\"#bbbbbb\" stroke-width=\"0.8\"/>"
    );
    if bands.is_empty() {
        out.push_str("<text x=\"32\" y=\"32\" font-family=\"monospace\" font-size=\"14\">no certified band</text>\n");
    }
    for (i, pts) in spirals.iter().enumerate() {
        let clipped: Vec<State> = pts
            .iter()
            .copied()
            .filter(|s| s.x.is_finite() && s.y.is_finite())
            .collect();
        if clipped.len() > 1 {
            let _ = writeln!(
                out,
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"0.7\" stroke-opacity=\"0.6\"/>",
                path(&frame, &clipped, false),
                PALETTE[i % PALETTE.len()]
            );
        }
    }
    for (i, pts) in ovals.iter().enumerate() {
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>",
            path(&frame, pts, true),
            PALETTE[i % PALETTE.len()]
        );
    }
    for s in singular {
        let (u, v) = frame.map(s.state);
        let fill = if s.on_curve { "#d62728" } else { "#000000" };
        let _ = writeln!(
            out,
            "<circle cx=\"{u:.3}\" cy=\"{v:.3}\" r=\"3.5\" fill=\"{fill}\"/>"
        );
    }
    out.push_str("</svg>\n");
    out
}
