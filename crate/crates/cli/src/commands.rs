//! One function per verb. Each returns a report plus any artifacts; nothing
//! here touches the filesystem.

use algcycle::dynamics::{
    find_singular_points, floquet_multiplier, flow_orientation, integrate_partial, poincare_return,
    sample_oval, section_abscissa, Branch, FloatField, SingularPoint, State, Trajectory,
};
use algcycle::hypotheses::{
    check_bands, Band, BandCertificate, BandCheck, CertifiedBand, Diagnostic, Witness,
};
use algcycle::polyalg::{format_rational, root_to_f64, BiPoly, RootEnclosure, UniPoly};
use algcycle::stability::{StabilityContext, DEFAULT_W_VALUES};
use algcycle::synthesis::{
    reduce_even_odd, same_system, synthesize_pq, verify_invariance, Provenance, SynthesizedSystem,
};
use serde_json::Value;

use crate::job::{JobSpec, Tolerances};
use crate::json::{float, object};
use crate::svg;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
    pub trajectory_csv: Option<String>,
    pub portrait_svg: Option<String>,
}

impl Outcome {
    fn report(report: Value, exit_code: i32) -> Self {
        Self {
            report,
            exit_code,
            trajectory_csv: None,
            portrait_svg: None,
        }
    }
}

fn diagnostic(kind: &str, message: impl Into<String>) -> Value {
    object([
        ("kind", Value::from(kind)),
        ("message", Value::from(message.into())),
    ])
}

fn failure(command: &str, kind: &str, message: impl Into<String>) -> Outcome {
    Outcome::report(
        object([
            ("command", Value::from(command)),
            ("diagnostics", Value::Array(vec![diagnostic(kind, message)])),
        ]),
        1,
    )
}

pub fn uni_json(p: &UniPoly) -> Value {
    object([
        ("coefficients", Value::from(p.to_strings())),
        ("text", Value::from(p.to_string())),
    ])
}

pub fn bi_json(p: &BiPoly) -> Value {
    let terms = p
        .to_string_terms()
        .into_iter()
        .map(|(i, j, c)| {
            object([
                ("x", Value::from(i)),
                ("y", Value::from(j)),
                ("c", Value::from(c)),
            ])
        })
        .collect();
    object([
        ("terms", Value::Array(terms)),
        ("text", Value::from(p.to_string())),
    ])
}

fn enclosure_json(p: &UniPoly, e: &RootEnclosure) -> Value {
    let mut fields = vec![
        ("lo", Value::from(format_rational(&e.lo))),
        ("hi", Value::from(format_rational(&e.hi))),
        ("simple", Value::from(e.multiplicity_is_one)),
        ("value", float(root_to_f64(p, e))),
    ];
    if let Some(r) = e.exact_root(p) {
        fields.push(("exact", Value::from(format_rational(&r))));
    }
    object(fields)
}

fn input_json(sys: &SynthesizedSystem) -> Value {
    match &sys.provenance {
        Provenance::Pq(i) => object([
            ("family", Value::from("p_q")),
            ("p", uni_json(&i.p)),
            ("q", uni_json(&i.q)),
        ]),
        Provenance::EvenOdd(i) => object([
            ("family", Value::from("even_odd")),
            ("p", uni_json(&i.p)),
            ("q", uni_json(&i.q)),
            ("h", uni_json(&i.h)),
            ("n", Value::from(i.n)),
            ("r", Value::from(i.r)),
        ]),
    }
}

pub fn system_json(sys: &SynthesizedSystem) -> Value {
    let (exact_zero, residual) = verify_invariance(sys);
    object([
        ("input", input_json(sys)),
        ("P", bi_json(&sys.p_field)),
        ("Q", bi_json(&sys.q_field)),
        ("curve", bi_json(&sys.curve_f)),
        ("cofactor", bi_json(&sys.cofactor_k)),
        ("lienard_f", uni_json(&sys.lienard_f)),
        ("lienard_g", uni_json(&sys.lienard_g)),
        ("degree", Value::from(sys.degree())),
        (
            "cofactor_degree",
            sys.cofactor_degree().map_or(Value::Null, Value::from),
        ),
        ("coprime", Value::from(sys.is_coprime())),
        (
            "invariance",
            object([
                ("exact_zero", Value::from(exact_zero)),
                ("residual", bi_json(&residual)),
            ]),
        ),
    ])
}

fn tolerances_json(t: &Tolerances) -> Value {
    object([
        ("root_width", Value::from(format_rational(&t.root_width))),
        ("quad_tol", float(t.quad_tol)),
        ("ode_tol", float(t.ode_tol)),
    ])
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Exact(x) => object([("exact", Value::from(format_rational(x)))]),
        Witness::Enclosure { lo, hi } => object([
            ("lo", Value::from(format_rational(lo))),
            ("hi", Value::from(format_rational(hi))),
        ]),
    }
}

fn diagnostic_json(d: &Diagnostic) -> Value {
    object([
        ("condition", Value::from(d.condition.to_string())),
        ("message", Value::from(d.message.clone())),
        (
            "witnesses",
            Value::Array(d.witnesses.iter().map(witness_json).collect()),
        ),
    ])
}

fn certificate_json(c: &BandCertificate) -> Value {
    let mut fields: Vec<(String, Value)> = c
        .statuses()
        .iter()
        .map(|(cond, s)| (cond.to_string(), Value::from(s.as_str())))
        .collect();
    fields.push(("passes".into(), Value::from(c.passes())));
    fields.push((
        "diagnostics".into(),
        Value::Array(c.diagnostics.iter().map(diagnostic_json).collect()),
    ));
    object(fields)
}

fn stability_json(p: &UniPoly, q: &UniPoly, band: &CertifiedBand, tol: f64) -> Value {
    let ctx = match StabilityContext::new(p, q, &band.band) {
        Ok(ctx) => ctx,
        Err(e) => return object([("error", Value::from(e.to_string()))]),
    };
    match ctx.classify(tol) {
        Ok(v) => object([
            ("class", Value::from(v.class.as_str())),
            ("reduced_value", float(v.reduced_value)),
            ("reduced_estimated_error", float(v.reduced.estimated_error)),
            ("reduced_nodes", Value::from(v.reduced.node_count)),
            ("divergence_integral", float(v.divergence.value)),
            ("cofactor_integral", float(v.cofactor.value)),
            ("hyperbolicity_margin", float(v.hyperbolicity_margin)),
            (
                "residual_divergence_cofactor",
                float(v.consistency_residuals.0),
            ),
            (
                "residual_divergence_reduced",
                float(v.consistency_residuals.1),
            ),
            ("q_prime_sign", Value::from(v.q_prime_sign)),
        ]),
        Err(e) => object([("error", Value::from(e.to_string()))]),
    }
}

fn band_json(index: usize, p: &UniPoly, b: &CertifiedBand) -> Value {
    object([
        ("index", Value::from(index)),
        ("left", enclosure_json(p, &b.band.left)),
        ("right", enclosure_json(p, &b.band.right)),
        ("contains_origin", Value::from(b.band.contains_origin)),
        (
            "inner",
            Value::from(vec![
                format_rational(&b.band.inner.0),
                format_rational(&b.band.inner.1),
            ]),
        ),
        ("certificate", certificate_json(&b.certificate)),
    ])
}

/// The `(p, q)` pair a job certifies: its own, or the reduction of an `n = 0` family member.
fn pq_system(job: &JobSpec, command: &str) -> Result<SynthesizedSystem, Outcome> {
    match job.family_input() {
        None => {
            synthesize_pq(&job.pq_input()).map_err(|e| failure(command, "synthesis", e.to_string()))
        }
        Some(Err(e)) => Err(failure(command, "synthesis", e.to_string())),
        Some(Ok(input)) => match reduce_even_odd(&input) {
            Ok(reduced) => {
                synthesize_pq(&reduced).map_err(|e| failure(command, "synthesis", e.to_string()))
            }
            Err(e) => Err(failure(
                command,
                "family",
                format!("{e}; the oval of this family is examined by audit"),
            )),
        },
    }
}

fn pq_of(sys: &SynthesizedSystem) -> (UniPoly, UniPoly) {
    let input = sys.pq_form().expect("system in the (p, q) family");
    (input.p, input.q)
}

pub fn synthesize(job: &JobSpec) -> Outcome {
    match job.system() {
        Ok(sys) => {
            let exact = verify_invariance(&sys).0;
            Outcome::report(
                object([
                    ("command", Value::from("synthesize")),
                    ("system", system_json(&sys)),
                ]),
                if exact { 0 } else { 1 },
            )
        }
        Err(e) => failure("synthesize", "synthesis", e.to_string()),
    }
}

fn run_check(job: &JobSpec, command: &str) -> Result<(SynthesizedSystem, BandCheck), Outcome> {
    let sys = pq_system(job, command)?;
    let (p, q) = pq_of(&sys);
    let check = check_bands(&p, &q, &job.tolerances.root_width)
        .map_err(|e| failure(command, "certification", e.to_string()))?;
    Ok((sys, check))
}

fn check_report(
    command: &str,
    job: &JobSpec,
    sys: &SynthesizedSystem,
    check: &BandCheck,
) -> (Vec<(String, Value)>, i32) {
    let (p, q) = pq_of(sys);
    let mut diagnostics = Vec::new();
    if check.bands.is_empty() && check.rejected.is_empty() {
        diagnostics.push(diagnostic(
            "bands",
            "no bands: p is nowhere positive between simple real roots",
        ));
    }
    let bands: Vec<Value> = check
        .bands
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut v = band_json(i, &p, b);
            if b.passes() {
                v["stability"] = stability_json(&p, &q, b, job.tolerances.quad_tol);
            }
            v
        })
        .collect();
    let rejected: Vec<Value> = check
        .rejected
        .iter()
        .map(|r| {
            object([
                ("left", enclosure_json(&p, &r.left)),
                ("right", enclosure_json(&p, &r.right)),
                ("diagnostic", diagnostic_json(&r.diagnostic)),
            ])
        })
        .collect();
    let certified = check.certified().count();
    let fields = vec![
        ("command".to_string(), Value::from(command)),
        ("system".into(), system_json(sys)),
        ("tolerances".into(), tolerances_json(&job.tolerances)),
        ("bands".into(), Value::Array(bands)),
        ("rejected_bands".into(), Value::Array(rejected)),
        ("certified_count".into(), Value::from(certified)),
        ("diagnostics".into(), Value::Array(diagnostics)),
    ];
    (fields, if certified > 0 { 0 } else { 1 })
}

pub fn check(job: &JobSpec) -> Outcome {
    match run_check(job, "check") {
        Ok((sys, check)) => {
            let (fields, code) = check_report("check", job, &sys, &check);
            Outcome::report(object(fields), code)
        }
        Err(o) => o,
    }
}

fn dynamics_json(sys: &SynthesizedSystem, b: &CertifiedBand, t: &Tolerances) -> Value {
    let mut fields = Vec::new();
    match flow_orientation(sys, &b.band) {
        Ok(o) => fields.push(("orientation", Value::from(o.as_str()))),
        Err(e) => fields.push(("orientation_error", Value::from(e.to_string()))),
    }
    match floquet_multiplier(sys, &b.band, t.quad_tol, t.ode_tol) {
        Ok(est) => {
            let log_gap = (est.multiplier_from_return_map.ln() - est.reduced_value).abs();
            fields.extend([
                (
                    "multiplier_from_divergence",
                    float(est.multiplier_from_divergence),
                ),
                (
                    "multiplier_from_return_map",
                    float(est.multiplier_from_return_map),
                ),
                (
                    "central_differences",
                    Value::Array(vec![
                        float(est.central_differences.0),
                        float(est.central_differences.1),
                    ]),
                ),
                ("finite_difference_step", float(est.delta)),
                ("log_multiplier_gap", float(log_gap)),
                ("period", float(est.period)),
                ("fixed_point_residual", float(est.fixed_point_residual)),
                (
                    "section",
                    Value::Array(vec![float(est.section_x), float(est.section_y)]),
                ),
            ]);
        }
        Err(e) => fields.push(("multiplier_error", Value::from(e.to_string()))),
    }
    let (p, q) = pq_of(sys);
    if let Ok(ctx) = StabilityContext::new(&p, &q, &b.band) {
        match ctx.w_shift_residuals(&DEFAULT_W_VALUES, t.quad_tol) {
            Ok(rows) => {
                let passes = rows.iter().all(|&(_, r, bound)| r <= bound);
                let rows = rows
                    .into_iter()
                    .map(|(w, r, bound)| {
                        object([
                            ("w", float(w)),
                            ("residual", float(r)),
                            ("bound", float(bound)),
                        ])
                    })
                    .collect();
                fields.push((
                    "w_shift",
                    object([
                        ("rows", Value::Array(rows)),
                        ("passes", Value::from(passes)),
                    ]),
                ));
            }
            Err(e) => fields.push(("w_shift_error", Value::from(e.to_string()))),
        }
    }
    object(fields)
}

pub fn stability(job: &JobSpec) -> Outcome {
    let (sys, check) = match run_check(job, "stability") {
        Ok(v) => v,
        Err(o) => return o,
    };
    let (mut fields, code) = check_report("stability", job, &sys, &check);
    if let Some((_, Value::Array(bands))) = fields.iter_mut().find(|(k, _)| k == "bands") {
        for (v, b) in bands.iter_mut().zip(&check.bands) {
            if b.passes() {
                v["dynamics"] = dynamics_json(&sys, b, &job.tolerances);
            }
        }
    }
    Outcome::report(object(fields), code)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    /// Point of the oval over the chosen band at abscissa `tau`; `None` means the band's section.
    Oval {
        tau: Option<f64>,
        branch: Branch,
    },
    State(State),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub start: Start,
    /// Defaults to ten returns when starting on the oval, otherwise 50.
    pub t_end: Option<f64>,
    pub band: usize,
    pub return_map: bool,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            start: Start::Oval {
                tau: None,
                branch: Branch::Plus,
            },
            t_end: None,
            band: 0,
            return_map: false,
        }
    }
}

/// Time of flight of the oval over `band` from its section point.
pub fn oval_period(
    p: &UniPoly,
    q: &UniPoly,
    sys: &SynthesizedSystem,
    band: &Band,
    tol: f64,
) -> Option<f64> {
    let y = sample_oval(p, q, band, section_abscissa(band), Branch::Plus)
        .ok()?
        .y;
    poincare_return(sys, band, y, tol)
        .ok()
        .map(|r| r.time_of_flight)
}

fn state_json(s: State) -> Value {
    Value::Array(vec![float(s.x), float(s.y)])
}

pub fn simulate(job: &JobSpec, opts: &SimulateOptions) -> Outcome {
    let (sys, check) = match run_check(job, "simulate") {
        Ok(v) => v,
        Err(o) => return o,
    };
    let (p, q) = pq_of(&sys);
    let field = FloatField::new(&sys);
    let tol = job.tolerances.ode_tol;
    let band = check.certified().nth(opts.band).map(|b| b.band.clone());

    let mut summary: Vec<(&str, Value)> = Vec::new();
    let s0 = match opts.start {
        Start::State(s) => s,
        Start::Oval { tau, branch } => {
            let Some(band) = band.as_ref() else {
                return failure(
                    "simulate",
                    "band",
                    format!("no certified band with index {}", opts.band),
                );
            };
            let tau = tau.unwrap_or_else(|| section_abscissa(band));
            match sample_oval(&p, &q, band, tau, branch) {
                Ok(s) => s,
                Err(e) => return failure("simulate", "start", e.to_string()),
            }
        }
    };
    let t_end = match (opts.t_end, opts.start, band.as_ref()) {
        (Some(t), _, _) => t,
        (None, Start::Oval { .. }, Some(b)) => {
            oval_period(&p, &q, &sys, b, tol).map_or(50.0, |t| 10.0 * t)
        }
        _ => 50.0,
    };
    summary.push(("start", state_json(s0)));
    summary.push(("t_end", float(t_end)));

    let (traj, error): (Trajectory, _) = integrate_partial(&field, s0, t_end, tol);
    let last = traj.samples.last().copied().unwrap_or((0.0, s0));
    summary.push(("accepted_steps", Value::from(traj.samples.len() - 1)));
    summary.push(("initial_abs_f", float(field.curve(s0).abs())));
    summary.push(("final_abs_f", float(field.curve(last.1).abs())));
    summary.push(("max_abs_f", float(traj.max_curve_residual(&field))));
    summary.push(("final_state", state_json(last.1)));
    summary.push(("final_time", float(last.0)));
    summary.push(("signed_area", float(traj.signed_area())));
    let mut diagnostics = Vec::new();
    if let Some(e) = &error {
        diagnostics.push(object([
            ("kind", Value::from("integration")),
            ("message", Value::from(e.to_string())),
            ("last_good_time", float(last.0)),
            ("last_good_state", state_json(last.1)),
        ]));
    }
    if opts.return_map {
        match check.certified().nth(opts.band) {
            Some(cb) => summary.push(("return_map", dynamics_json(&sys, cb, &job.tolerances))),
            None => diagnostics.push(diagnostic(
                "return_map",
                "no certified band for the return map",
            )),
        }
    }
    let report = object([
        ("command", Value::from("simulate")),
        ("system", system_json(&sys)),
        ("tolerances", tolerances_json(&job.tolerances)),
        ("trajectory", object(summary)),
        ("diagnostics", Value::Array(diagnostics)),
    ]);
    Outcome {
        report,
        exit_code: if error.is_some() { 1 } else { 0 },
        trajectory_csv: Some(traj.to_csv(&field)),
        portrait_svg: None,
    }
}

fn singular_json(p: &UniPoly, s: &SingularPoint) -> Value {
    let mut fields = vec![
        ("x", float(s.state.x)),
        ("y", float(0.0)),
        ("on_curve", Value::from(s.on_curve)),
        ("enclosure", enclosure_json(p, &s.enclosure)),
    ];
    if let Some(r) = s.enclosure.exact_root(p) {
        fields.push(("x_exact", Value::from(format_rational(&r))));
    }
    object(fields)
}

pub fn portrait(job: &JobSpec) -> Outcome {
    let sys = match job.system() {
        Ok(s) => s,
        Err(e) => return failure("portrait", "synthesis", e.to_string()),
    };
    let certified: Vec<CertifiedBand> = match sys.pq_form() {
        Some(input) => match check_bands(&input.p, &input.q, &job.tolerances.root_width) {
            Ok(c) => c.certified().cloned().collect(),
            Err(e) => return failure("portrait", "certification", e.to_string()),
        },
        None => Vec::new(),
    };
    let singular = find_singular_points(&sys, &job.tolerances.root_width);
    let mut diagnostics = Vec::new();
    if certified.is_empty() {
        diagnostics.push(diagnostic("portrait", "empty portrait: no certified band"));
    }
    let figure = svg::portrait(&sys, &certified, &singular, job.tolerances.ode_tol);
    let q0 = sys.singular_polynomial();
    let report = object([
        ("command", Value::from("portrait")),
        ("system", system_json(&sys)),
        ("ovals", Value::from(certified.len())),
        (
            "singular_points",
            Value::Array(singular.iter().map(|s| singular_json(&q0, s)).collect()),
        ),
        ("diagnostics", Value::Array(diagnostics)),
    ]);
    Outcome {
        report,
        exit_code: 0,
        trajectory_csv: None,
        portrait_svg: Some(figure),
    }
}

pub fn audit_family(job: &JobSpec) -> Outcome {
    let input = match job.family_input() {
        None => return failure("audit", "family", "audit needs h, n and r"),
        Some(Err(e)) => return failure("audit", "synthesis", e.to_string()),
        Some(Ok(i)) => i,
    };
    let sys = match algcycle::synthesis::synthesize_even_odd(&input) {
        Ok(s) => s,
        Err(e) => return failure("audit", "synthesis", e.to_string()),
    };
    let mut fields = vec![
        ("command", Value::from("audit")),
        ("system", system_json(&sys)),
        ("m", Value::from(format_rational(&input.m()))),
    ];
    if input.n == 0 {
        let reduced = reduce_even_odd(&input).expect("n = 0");
        let direct = synthesize_pq(&reduced).expect("nonconstant p");
        let identical = same_system(&direct, &sys);
        fields.push(("reduced_q", uni_json(&reduced.q)));
        fields.push(("identical_to_p_q_synthesis", Value::from(identical)));
        fields.push((
            "verdict",
            Value::from(if identical {
                "reduces to the (p, q) family: not a more general limit cycle"
            } else {
                "reduction mismatch"
            }),
        ));
    } else {
        let p = &input.p;
        let q0 = sys.singular_polynomial();
        let points = find_singular_points(&sys, &job.tolerances.root_width);
        let bands =
            algcycle::hypotheses::find_bands(p, &job.tolerances.root_width).unwrap_or_default();
        let mut any = false;
        let band_rows: Vec<Value> = bands
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let (lo, hi) = (root_to_f64(p, &b.left), root_to_f64(p, &b.right));
                let on_oval: Vec<Value> = points
                    .iter()
                    .filter(|s| s.on_curve && s.state.x >= lo && s.state.x <= hi)
                    .map(|s| singular_json(&q0, s))
                    .collect();
                let disqualified = !on_oval.is_empty();
                any |= disqualified;
                object([
                    ("index", Value::from(i)),
                    ("left", enclosure_json(p, &b.left)),
                    ("right", enclosure_json(p, &b.right)),
                    ("on_oval_singular_points", Value::Array(on_oval)),
                    (
                        "verdict",
                        Value::from(if disqualified {
                            "not a limit cycle"
                        } else {
                            "no singular point found on the oval"
                        }),
                    ),
                ])
            })
            .collect();
        fields.push(("bands", Value::Array(band_rows)));
        fields.push((
            "singular_points",
            Value::Array(points.iter().map(|s| singular_json(&q0, s)).collect()),
        ));
        fields.push((
            "verdict",
            Value::from(if any {
                "not a limit cycle"
            } else {
                "no singular point found on any oval"
            }),
        ));
    }
    Outcome::report(object(fields), 0)
}
