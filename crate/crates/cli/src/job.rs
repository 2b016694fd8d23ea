//! JSON job files.

use std::fmt;
use std::path::Path;

use algcycle::hypotheses::default_root_width;
use algcycle::polyalg::{int, parse_rational, Rational, UniPoly};
use algcycle::synthesis::{
    synthesize_even_odd, synthesize_pq, EvenOddInput, PqInput, SynthesizedSystem,
};
use algcycle::SynthesisError;
use serde::de::{self, Deserializer};
use serde::Deserialize;

/// Ascending coefficient list of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyText(pub UniPoly);

impl<'de> Deserialize<'de> for PolyText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        UniPoly::parse(&raw)
            .map(PolyText)
            .map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw)
            .map(RationalText)
            .map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceText {
    pub root_width: Option<RationalText>,
    pub quad_tol: Option<f64>,
    pub ode_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Artifact {
    #[serde(rename = "report.json")]
    Report,
    #[serde(rename = "trajectory.csv")]
    Trajectory,
    #[serde(rename = "portrait.svg")]
    Portrait,
}

impl Artifact {
    pub fn file_name(&self) -> &'static str {
        match self {
            Artifact::Report => "report.json",
            Artifact::Trajectory => "trajectory.csv",
            Artifact::Portrait => "portrait.svg",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJob {
    p: PolyText,
    q: PolyText,
    h: Option<PolyText>,
    n: Option<i64>,
    r: Option<i64>,
    #[serde(default)]
    tolerances: ToleranceText,
    outputs: Option<Vec<Artifact>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub root_width: Rational,
    pub quad_tol: f64,
    pub ode_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_width: default_root_width(),
            quad_tol: 1e-10,
            ode_tol: 1e-10,
        }
    }
}

/// Members of the even/odd family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyText {
    pub h: UniPoly,
    pub n: i64,
    pub r: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub p: UniPoly,
    pub q: UniPoly,
    pub family: Option<FamilyText>,
    pub tolerances: Tolerances,
    pub outputs: Option<Vec<Artifact>>,
}

#[derive(Debug)]
pub enum JobError {
    Io(std::io::Error),
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(String),
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobError::Io(e) => write!(f, "cannot read job file: {e}"),
            JobError::Syntax {
                line,
                column,
                message,
            } => {
                write!(
                    f,
                    "job file error at line {line}, column {column}: {message}"
                )
            }
            JobError::Invalid(m) => write!(f, "invalid job: {m}"),
        }
    }
}

impl std::error::Error for JobError {}

impl JobSpec {
    pub fn from_path(path: &Path) -> Result<Self, JobError> {
        let text = std::fs::read_to_string(path).map_err(JobError::Io)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, JobError> {
        let raw: RawJob = serde_json::from_str(text).map_err(|e| JobError::Syntax {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
        let family = match (raw.h, raw.n, raw.r) {
            (None, None, None) => None,
            (Some(h), Some(n), Some(r)) => Some(FamilyText { h: h.0, n, r }),
            _ => {
                return Err(JobError::Invalid(
                    "h, n and r must be given together".into(),
                ))
            }
        };
        let defaults = Tolerances::default();
        let t = raw.tolerances;
        let job = JobSpec {
            p: raw.p.0,
            q: raw.q.0,
            family,
            tolerances: Tolerances {
                root_width: t.root_width.map(|r| r.0).unwrap_or(defaults.root_width),
                quad_tol: t.quad_tol.unwrap_or(defaults.quad_tol),
                ode_tol: t.ode_tol.unwrap_or(defaults.ode_tol),
            },
            outputs: raw.outputs,
        };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), JobError> {
        let t = &self.tolerances;
        if t.root_width <= int(0) {
            return Err(JobError::Invalid("root_width must be positive".into()));
        }
        for (name, v) in [("quad_tol", t.quad_tol), ("ode_tol", t.ode_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(JobError::Invalid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn wants(&self, artifact: Artifact) -> bool {
        self.outputs.as_ref().is_none_or(|o| o.contains(&artifact))
    }

    pub fn pq_input(&self) -> PqInput {
        PqInput::new(self.p.clone(), self.q.clone())
    }

    pub fn family_input(&self) -> Option<Result<EvenOddInput, SynthesisError>> {
        self.family
            .as_ref()
            .map(|f| EvenOddInput::new(self.p.clone(), self.q.clone(), f.h.clone(), f.n, f.r))
    }

    /// The system the job describes: the even/odd family when `h, n, r` are set.
    pub fn system(&self) -> Result<SynthesizedSystem, SynthesisError> {
        match self.family_input() {
            Some(input) => synthesize_even_odd(&input?),
            None => synthesize_pq(&self.pq_input()),
        }
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}
