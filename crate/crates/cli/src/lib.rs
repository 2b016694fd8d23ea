//! Command-line front end for `algcycle`: job files in, reports and figures out.

pub mod commands;
pub mod job;
pub mod json;
pub mod svg;
pub mod text;

use std::path::Path;

use anyhow::Context;

use commands::Outcome;
use job::{Artifact, JobSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

/// Renders the report for stdout.
pub fn render(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => json::to_canonical_string(&outcome.report),
        Format::Text => text::render(&outcome.report),
    }
}

/// Writes the requested artifacts into `dir`, returning the written paths.
pub fn write_artifacts(
    job: &JobSpec,
    outcome: &Outcome,
    dir: &Path,
) -> anyhow::Result<Vec<String>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let mut put = |artifact: Artifact, body: &str| -> anyhow::Result<()> {
        if job.wants(artifact) {
            let path = dir.join(artifact.file_name());
            std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            written.push(path.display().to_string());
        }
        Ok(())
    };
    put(
        Artifact::Report,
        &json::to_canonical_string(&outcome.report),
    )?;
    if let Some(csv) = &outcome.trajectory_csv {
        put(Artifact::Trajectory, csv)?;
    }
    if let Some(svg) = &outcome.portrait_svg {
        put(Artifact::Portrait, svg)?;
    }
    Ok(written)
}
