//! Output directory bookkeeping: summary rows, field snapshots, manifest and
//! failure report.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::Scenario;

/// How a summary row is judged.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Measured and reported without a threshold.
    Record,
}

impl Verdict {
    fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "true",
            Verdict::Fail => "false",
            Verdict::Record => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub measured: f64,
    pub bound: String,
    pub verdict: Verdict,
    /// Stable identifier of the invariant the row instantiates.
    pub invariant: &'static str,
}

#[derive(Debug, Serialize)]
struct FailureEntry<'a> {
    name: &'a str,
    invariant: &'a str,
    measured: f64,
    bound: &'a str,
}

pub struct Run {
    dir: PathBuf,
    rows: Vec<Row>,
    artifacts: Vec<String>,
}

impl Run {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            rows: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    /// Row that passes when `measured <= bound`.
    pub fn at_most(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        bound: f64,
        invariant: &'static str,
    ) {
        self.check(
            name,
            measured,
            format!("<= {bound:e}"),
            measured <= bound,
            invariant,
        );
    }

    /// Row that passes when `measured >= bound`.
    pub fn at_least(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        bound: f64,
        invariant: &'static str,
    ) {
        self.check(
            name,
            measured,
            format!(">= {bound:e}"),
            measured >= bound,
            invariant,
        );
    }

    pub fn check(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        bound: String,
        pass: bool,
        invariant: &'static str,
    ) {
        let verdict = if pass { Verdict::Pass } else { Verdict::Fail };
        self.rows.push(Row {
            name: name.into(),
            measured,
            bound,
            verdict,
            invariant,
        });
    }

    pub fn record(&mut self, name: impl Into<String>, measured: f64, invariant: &'static str) {
        self.rows.push(Row {
            name: name.into(),
            measured,
            bound: String::new(),
            verdict: Verdict::Record,
            invariant,
        });
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    /// Opens `name` in the output directory and registers it as an artifact.
    pub fn file(&mut self, name: &str) -> io::Result<BufWriter<File>> {
        self.artifacts.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    /// Writes an artifact through `body` and flushes it.
    pub fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    ) -> io::Result<()> {
        let mut f = self.file(name)?;
        body(&mut f)?;
        f.flush()
    }

    pub fn write_summary(&mut self) -> io::Result<()> {
        let rows = std::mem::take(&mut self.rows);
        let res = self.write("summary.csv", |f| {
            writeln!(f, "name,measured,bound,pass,invariant")?;
            for r in &rows {
                writeln!(
                    f,
                    "{},{:e},{},{},{}",
                    r.name,
                    r.measured,
                    r.bound,
                    r.verdict.label(),
                    r.invariant
                )?;
            }
            Ok(())
        });
        self.rows = rows;
        res
    }

    pub fn write_failures(&mut self, scenario: &Scenario, error: Option<&str>) -> io::Result<()> {
        let failures: Vec<FailureEntry> = self
            .failures()
            .map(|r| FailureEntry {
                name: &r.name,
                invariant: r.invariant,
                measured: r.measured,
                bound: &r.bound,
            })
            .collect();
        let doc = json!({
            "scenario": scenario.name.as_str(),
            "error": error,
            "failures": failures,
        });
        let text = serde_json::to_string_pretty(&doc)?;
        self.write("failures.json", |f| writeln!(f, "{text}"))
    }

    /// Writes `manifest.json`, listing every artifact including itself.
    pub fn write_manifest(&mut self, scenario: &Scenario) -> io::Result<()> {
        self.artifacts.push("manifest.json".to_string());
        let s = scenario;
        let doc = json!({
            "scenario": s.name.as_str(),
            "params": {
                "alpha": s.params.alpha(),
                "beta": s.params.beta(),
                "epsilon": s.params.epsilon(),
                "k": s.k,
            },
            "profile": {
                "delta": s.profile.delta(),
                "t_star": s.profile.t_star(),
            },
            "grid": {
                "dim": s.grid.dim(),
                "half_width": s.grid.half_width(),
                "points": s.grid.points_per_axis(),
                "spacing": s.grid.spacing(),
                "radius": s.radius,
            },
            "solver": {
                "dt": s.solver.dt,
                "dt_explicit": s.dt_explicit,
                "t_end": s.solver.t_end,
                "boundary": s.solver.boundary.label(),
                "blowup_threshold": s.solver.blowup_threshold,
            },
            "git_describe": git_describe(),
            "artifacts": self.artifacts,
        });
        let text = serde_json::to_string_pretty(&doc)?;
        fs::write(self.dir.join("manifest.json"), text + "\n")
    }
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args([
            "-C",
            env!("CARGO_MANIFEST_DIR"),
            "describe",
            "--always",
            "--dirty",
        ])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}
