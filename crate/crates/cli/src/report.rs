//! Reports: what was run, with which parameters, and what came out.
//!
//! The JSON form embeds the problem and every blocking certificate with
//! the profile and concept it refers to, so `verify` can re-check them by
//! recomputing margins without searching.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use interim_core::blocking::{verify_certificate, BlockingCertificate, CoreConcept, CoreVerdict, ScanReport};
use interim_core::derived::SolveOutcome;
use interim_core::games::{Problem, Profile};
use serde::{Deserialize, Serialize};

pub const TOOL: &str = "interim";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub concepts: Vec<CoreConcept>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

/// A certificate together with everything needed to re-check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedCertificate {
    pub label: String,
    pub concept: CoreConcept,
    pub status_quo: Profile,
    pub certificate: BlockingCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub profile: String,
    /// One verdict per concept, in parameter order.
    pub member: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleItem {
    pub name: String,
    pub reproduced: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Body {
    Check {
        profile: String,
        verdict: CoreVerdict,
    },
    Scan {
        scan: ScanReport,
    },
    Solve {
        outcome: Box<SolveOutcome>,
        lifted: String,
    },
    Compare {
        rows: Vec<CompareRow>,
        /// Member counts per concept.
        members: Vec<usize>,
        violations: Vec<String>,
    },
    PaperExample {
        items: Vec<ExampleItem>,
    },
    Verify {
        checked: usize,
        failures: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub parameters: Parameters,
    pub problem: Problem,
    pub body: Body,
    pub certificates: Vec<EmbeddedCertificate>,
    pub summary: Vec<String>,
    pub exit_status: i32,
    pub elapsed_ms: f64,
}

/// The part of a report `verify` reads back.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Verifiable {
    pub problem: Problem,
    pub certificates: Vec<EmbeddedCertificate>,
}

impl Verifiable {
    pub fn from_json(text: &str) -> Result<Verifiable, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Re-checks every certificate; returns the failures.
    pub fn check(&self) -> Vec<String> {
        self.certificates
            .iter()
            .filter_map(|c| {
                let recomputed = verify_certificate(&self.problem, &c.status_quo, &c.concept, &c.certificate);
                match recomputed {
                    Err(e) => Some(format!("{}: {e}", c.label)),
                    Ok(m) if !margins_agree(&m, &c.certificate.margins) => {
                        Some(format!("{}: recomputed margins {m:?} differ from the recorded ones", c.label))
                    }
                    Ok(_) => None,
                }
            })
            .collect()
    }
}

/// Recorded and recomputed margins agree to rounding.
pub const MARGIN_AGREEMENT: f64 = 1e-9;

fn margins_agree(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).abs() <= MARGIN_AGREEMENT * (1.0 + q.abs()))
        })
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Human-readable form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}: {}", self.tool, self.version, self.command.join(" "));
        let p = &self.parameters;
        if !p.concepts.is_empty() {
            let names: Vec<&str> = p.concepts.iter().map(|c| c.name()).collect();
            let _ = writeln!(s, "concepts: {}", names.join(", "));
        }
        if let Some(e) = p.epsilon {
            let _ = writeln!(s, "epsilon: {e}");
        }
        if let Some(r) = p.resolution {
            let _ = writeln!(s, "resolution: {r}");
        }
        if let Some(b) = p.budget {
            let _ = writeln!(s, "budget: {b}");
        }
        for line in &self.summary {
            let _ = writeln!(s, "{line}");
        }
        for c in &self.certificates {
            let _ = writeln!(s, "certificate [{}]", c.label);
            let _ = write!(s, "{}", describe_certificate(&self.problem, &c.certificate));
        }
        let _ = writeln!(s, "exit status {} ({:.1} ms)", self.exit_status, self.elapsed_ms);
        s
    }

    /// Writes the JSON report atomically: a temporary file in the target
    /// directory is renamed over `path`.
    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(self.to_json().as_bytes())?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }
}

pub fn describe_certificate(problem: &Problem, cert: &BlockingCertificate) -> String {
    let labels: Vec<&str> = cert.event.members().iter().map(|&w| problem.space().label(w)).collect();
    let mut s = String::new();
    let _ = writeln!(s, "  coalition {} blocks on {{{}}} (ε = {})", cert.coalition, labels.join(", "), cert.epsilon);
    for (k, i) in cert.coalition.members().enumerate() {
        let strategy = cert.profile.member(i).expect("certificate covers its coalition");
        let values: Vec<String> = (0..problem.n_states())
            .map(|w| {
                let b: Vec<String> = strategy.at(w).iter().map(|v| format!("{v}")).collect();
                format!("{}:{}", problem.space().label(w), b.join(","))
            })
            .collect();
        let worst = cert.margins[k].iter().copied().fold(f64::INFINITY, f64::min);
        let _ = writeln!(s, "    player {}: y = {}  (worst margin {worst:.6})", i + 1, values.join("|"));
    }
    s
}

pub fn embed(label: impl Into<String>, concept: &CoreConcept, x: &Profile, cert: &BlockingCertificate) -> EmbeddedCertificate {
    EmbeddedCertificate {
        label: label.into(),
        concept: concept.clone(),
        status_quo: x.clone(),
        certificate: cert.clone(),
    }
}

