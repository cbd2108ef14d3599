//! The subcommands. Each returns a [`Report`] whose `exit_status` is 0 on
//! membership or success and 1 when a profile is blocked or a run fails;
//! input errors are [`CliError::Input`] and exit with 2.

use std::time::Instant;

use interim_core::blocking::{
    blocks_weak_interim_private, core_grid_scan, in_core, BlockingCertificate, CoreConcept,
};
use interim_core::derived::{solve, CertificationLevel, SolveOptions};
use interim_core::fixtures::two_state_allocation;
use interim_core::games::{profile_grid, Problem, Profile};
use interim_core::probability::{Event, Partition};
use interim_core::{Coalition, Error};

use crate::number::Number;
use crate::problem_file::{load_problem, TWO_STATE_EXCHANGE};
use crate::profile_spec::{format_profile, ProfileSpec};
use crate::report::{embed, Body, CompareRow, ExampleItem, Parameters, Report, Verifiable, TOOL};

pub const DEFAULT_RESOLUTION: f64 = 0.25;
pub const DEFAULT_BUDGET: usize = 100_000;
/// Sample members and certificates kept by `scan` and `compare`.
pub const KEEP: usize = 5;
/// Tolerance for matching the worked example's blocking strategies.
pub const EXAMPLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or invalid input: exit status 2.
    #[error("{0}")]
    Input(String),
    /// A computation that could not be completed: exit status 1.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_status(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn computed(e: Error) -> CliError {
    match e {
        Error::BudgetExceeded { .. }
        | Error::InvalidProblem(_)
        | Error::InvalidProfile(_)
        | Error::InvalidField(_)
        | Error::Unsupported(_) => CliError::Input(e.to_string()),
        e => CliError::Failed(e.to_string()),
    }
}

/// Solver settings shared by the subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Concept names, optionally `name@epsilon`.
    pub concepts: Vec<String>,
    pub epsilon: Option<Number>,
    pub resolution: Number,
    pub budget: usize,
    /// Information-sharing groups for the `fine` concept, e.g. `1,2;3`.
    pub share: Option<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            concepts: Vec::new(),
            epsilon: None,
            resolution: Number::from_f64(DEFAULT_RESOLUTION).expect("finite"),
            budget: DEFAULT_BUDGET,
            share: None,
        }
    }
}

impl Settings {
    fn resolution(&self) -> Result<f64, CliError> {
        let r = self.resolution.to_f64();
        if r > 0.0 && r <= 1.0 {
            Ok(r)
        } else {
            Err(CliError::Input(format!("resolution must lie in (0, 1], got {}", self.resolution)))
        }
    }

    fn parameters(&self, concepts: &[CoreConcept]) -> Result<Parameters, CliError> {
        Ok(Parameters {
            concepts: concepts.to_vec(),
            epsilon: self.epsilon.map(Number::to_f64),
            resolution: Some(self.resolution()?),
            budget: Some(self.budget),
        })
    }

    fn concepts(&self, problem: &Problem, default: &str) -> Result<Vec<CoreConcept>, CliError> {
        if self.concepts.is_empty() {
            return Ok(vec![parse_concept(default, problem, self.epsilon, self.share.as_deref())?]);
        }
        self.concepts
            .iter()
            .map(|c| parse_concept(c, problem, self.epsilon, self.share.as_deref()))
            .collect()
    }
}

/// Information fields for `fine`: every member of a sharing group sees the
/// join of the group's partitions. Players in no group keep their own.
pub fn sharing_fields(problem: &Problem, share: Option<&str>) -> Result<Vec<Partition>, CliError> {
    let n = problem.n_players();
    let groups: Vec<Vec<usize>> = match share {
        None => vec![(0..n).collect()],
        Some(text) => {
            let mut seen = vec![false; n];
            let mut groups = Vec::new();
            for g in text.split(';').map(str::trim).filter(|g| !g.is_empty()) {
                let mut members = Vec::new();
                for t in g.split(',') {
                    let i: usize = t
                        .trim()
                        .parse()
                        .map_err(|_| CliError::Input(format!("bad player '{}' in --share", t.trim())))?;
                    if i == 0 || i > n || seen[i - 1] {
                        return Err(CliError::Input(format!("player {i} is out of range or repeated in --share")));
                    }
                    seen[i - 1] = true;
                    members.push(i - 1);
                }
                groups.push(members);
            }
            groups
        }
    };
    let mut fields: Vec<Partition> = problem.info().partitions().to_vec();
    for g in &groups {
        let mut pooled = problem.info().partition(g[0]).clone();
        for &i in &g[1..] {
            pooled = pooled.join(problem.info().partition(i)).map_err(computed)?;
        }
        for &i in g {
            fields[i] = pooled.clone();
        }
    }
    Ok(fields)
}

/// `interim`, `private`, `weak-interim-private`, `fine` or `weak-core`,
/// with an optional `@epsilon`. Economies default to ε = 0; games must
/// give ε for concepts that use it.
pub fn parse_concept(
    text: &str,
    problem: &Problem,
    epsilon: Option<Number>,
    share: Option<&str>,
) -> Result<CoreConcept, CliError> {
    let (name, eps) = match text.split_once('@') {
        Some((n, e)) => (n.trim(), Some(e.trim().parse::<Number>().map_err(input)?)),
        None => (text.trim(), epsilon),
    };
    let eps = || -> Result<f64, CliError> {
        match eps {
            Some(e) if e.0 < 0.into() => Err(CliError::Input(format!("epsilon must be nonnegative, got {e}"))),
            Some(e) => Ok(e.to_f64()),
            None if problem.is_economy() => Ok(0.0),
            None => Err(CliError::Input(format!(
                "the {name} concept needs an explicit --epsilon for games"
            ))),
        }
    };
    Ok(match name {
        "interim" => CoreConcept::InterimCore { epsilon: eps()? },
        "private" => CoreConcept::PrivateCore,
        "weak-interim-private" | "wip" => CoreConcept::WeakInterimPrivate,
        "fine" => CoreConcept::InterimFine {
            fields: sharing_fields(problem, share)?,
            epsilon: eps()?,
        },
        "weak-core" | "ex-ante" => CoreConcept::WeakCoreFlat { epsilon: eps()? },
        other => return Err(CliError::Input(format!("unknown concept '{other}'"))),
    })
}

/// Parses and validates the contents of a problem file.
pub fn read_problem(source: &str) -> Result<Problem, CliError> {
    load_problem(source).map(|(_, p)| p).map_err(input)
}

/// A profile given inline, or read from a file when `text` is a path.
pub fn read_profile(problem: &Problem, text: &str) -> Result<Profile, CliError> {
    let body = match std::fs::read_to_string(text) {
        Ok(contents) => contents,
        Err(_) => text.to_string(),
    };
    ProfileSpec::parse(&body).and_then(|s| s.to_profile(problem)).map_err(input)
}

#[allow(clippy::too_many_arguments)]
fn report(
    command: &[String],
    parameters: Parameters,
    problem: &Problem,
    body: Body,
    certificates: Vec<crate::report::EmbeddedCertificate>,
    summary: Vec<String>,
    exit_status: i32,
    started: Instant,
) -> Report {
    Report {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.to_vec(),
        parameters,
        problem: problem.clone(),
        body,
        certificates,
        summary,
        exit_status,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

fn verdict_line(name: &str, member: bool, cert: Option<&BlockingCertificate>) -> String {
    match cert {
        Some(c) if !member => format!(
            "{name}: blocked by coalition {} on {} state(s), worst margin {:.6}",
            c.coalition,
            c.event.len(),
            c.min_margin()
        ),
        _ => format!("{name}: member"),
    }
}

pub fn cmd_check(command: &[String], problem: &Problem, profile: &Profile, settings: &Settings) -> Result<Report, CliError> {
    let started = Instant::now();
    let concepts = settings.concepts(problem, "interim")?;
    let [concept] = concepts.as_slice() else {
        return Err(CliError::Input("check takes exactly one concept".into()));
    };
    let verdict = in_core(problem, profile, concept).map_err(computed)?;
    let mut summary = vec![
        format!("profile: {}", format_profile(problem, profile)),
        verdict_line(concept.name(), verdict.member, verdict.certificate.as_ref()),
        format!("search: {}", verdict.search),
    ];
    let certificates = verdict
        .certificate
        .iter()
        .map(|c| embed("check", concept, profile, c))
        .collect();
    if verdict.member {
        summary.push("no coalition blocks".into());
    }
    let exit = if verdict.member { 0 } else { 1 };
    let body = Body::Check {
        profile: format_profile(problem, profile),
        verdict,
    };
    Ok(report(command, settings.parameters(&concepts)?, problem, body, certificates, summary, exit, started))
}

pub fn cmd_scan(command: &[String], problem: &Problem, settings: &Settings) -> Result<Report, CliError> {
    let started = Instant::now();
    let concepts = settings.concepts(problem, "interim")?;
    let [concept] = concepts.as_slice() else {
        return Err(CliError::Input("scan takes exactly one concept".into()));
    };
    let scan = core_grid_scan(problem, concept, settings.resolution()?, settings.budget, KEEP).map_err(computed)?;
    let mut summary = vec![format!(
        "{}: {} of {} grid profiles are members at resolution {}",
        concept.name(),
        scan.members,
        scan.profiles,
        settings.resolution
    )];
    summary.extend(scan.sample_members.iter().map(|x| format!("member: {}", format_profile(problem, x))));
    let certificates = scan
        .sample_blocked
        .iter()
        .map(|(k, x, c)| {
            summary.push(format!("blocked #{k}: {}", format_profile(problem, x)));
            embed(format!("grid profile {k}"), concept, x, c)
        })
        .collect();
    let body = Body::Scan { scan };
    Ok(report(command, settings.parameters(&concepts)?, problem, body, certificates, summary, 0, started))
}

pub fn cmd_solve(command: &[String], problem: &Problem, settings: &Settings) -> Result<Report, CliError> {
    let started = Instant::now();
    let options = SolveOptions {
        resolution: settings.resolution()?,
        ..SolveOptions::default()
    };
    let outcome = solve(problem, &options).map_err(|e| CliError::Failed(e.to_string()))?;
    let lifted = format_profile(problem, &outcome.lift.profile);
    let cert = &outcome.certification;
    let mut summary = vec![
        format!(
            "auxiliary game: {} players, {} admissible coalitions, {} generators (coarsest step {})",
            outcome.aux_players.len(),
            outcome.admissible_coalitions,
            outcome.generators,
            outcome.coarsest_resolution
        ),
        match &outcome.conditions {
            Some(c) => format!("balancedness conditions hold: {}", c.all_hold()),
            None => "balancedness conditions: skipped for this many auxiliary players".into(),
        },
        format!("scarf: {} pivots over {} round(s), achievable: {}", outcome.pivots, outcome.rounds, outcome.achievable),
        format!("lifted profile: {lifted}"),
        format!("certification: {:?} (grid tolerance {})", cert.level, cert.grid_epsilon),
    ];
    let mut certificates = Vec::new();
    let exact = CoreConcept::interim(0.0);
    if let Some(c) = &cert.exact.certificate {
        summary.push(verdict_line("interim at ε = 0", false, Some(c)));
        certificates.push(embed("lifted profile at ε = 0", &exact, &outcome.lift.profile, c));
    }
    if let Some(c) = cert.at_grid.as_ref().and_then(|v| v.certificate.as_ref()) {
        let grid = CoreConcept::interim(cert.grid_epsilon);
        certificates.push(embed("lifted profile at the grid tolerance", &grid, &outcome.lift.profile, c));
    }
    let exit = if cert.level == CertificationLevel::Failed { 1 } else { 0 };
    let body = Body::Solve {
        outcome: Box::new(outcome),
        lifted,
    };
    let parameters = Parameters {
        concepts: vec![exact],
        ..settings.parameters(&[])?
    };
    Ok(report(command, parameters, problem, body, certificates, summary, exit, started))
}

/// Expected inclusions `core(a) ⊆ core(b)` between two concepts.
fn nested(a: &CoreConcept, b: &CoreConcept) -> bool {
    use CoreConcept::*;
    match (a, b) {
        (WeakInterimPrivate, InterimCore { epsilon }) => *epsilon >= 0.0,
        (InterimCore { epsilon }, PrivateCore) => *epsilon == 0.0,
        (WeakInterimPrivate, PrivateCore) => true,
        (InterimCore { epsilon: e }, InterimCore { epsilon: f }) => e <= f,
        (WeakCoreFlat { epsilon: e }, WeakCoreFlat { epsilon: f }) => e <= f,
        (InterimFine { fields: h, epsilon: e }, InterimFine { fields: k, epsilon: f }) => h == k && e <= f,
        _ => false,
    }
}

/// Verdicts for each profile (the given one, or the whole grid) under each
/// concept; flags every violated inclusion among the concepts.
pub fn cmd_compare(
    command: &[String],
    problem: &Problem,
    profile: Option<&Profile>,
    settings: &Settings,
) -> Result<Report, CliError> {
    let started = Instant::now();
    let concepts = settings.concepts(problem, "interim")?;
    if concepts.len() < 2 {
        return Err(CliError::Input("compare needs at least two concepts".into()));
    }
    let profiles = match profile {
        Some(x) => vec![x.clone()],
        None => profile_grid(problem, settings.resolution()?, settings.budget).map_err(computed)?,
    };
    let mut rows = Vec::with_capacity(profiles.len());
    let mut certificates = Vec::new();
    let mut violations = Vec::new();
    for (k, x) in profiles.iter().enumerate() {
        let mut member = Vec::with_capacity(concepts.len());
        for (ci, c) in concepts.iter().enumerate() {
            let v = in_core(problem, x, c).map_err(computed)?;
            if let Some(cert) = &v.certificate {
                if certificates.len() < KEEP * concepts.len() {
                    certificates.push(embed(format!("profile {k} under concept {}", ci + 1), c, x, cert));
                }
            }
            member.push(v.member);
        }
        for (a, ca) in concepts.iter().enumerate() {
            for (b, cb) in concepts.iter().enumerate() {
                if a != b && nested(ca, cb) && member[a] && !member[b] {
                    violations.push(format!(
                        "profile {k} ({}) is in the {} core but not the {} core",
                        format_profile(problem, x),
                        ca.name(),
                        cb.name()
                    ));
                }
            }
        }
        rows.push(CompareRow {
            profile: format_profile(problem, x),
            member,
        });
    }
    let members: Vec<usize> = (0..concepts.len()).map(|c| rows.iter().filter(|r| r.member[c]).count()).collect();
    let mut summary: Vec<String> = concepts
        .iter()
        .zip(&members)
        .map(|(c, m)| format!("{} (ε = {}): {m} of {} members", c.name(), c.epsilon(), rows.len()))
        .collect();
    summary.push(format!("inclusion violations: {}", violations.len()));
    summary.extend(violations.iter().cloned());
    let exit = if violations.is_empty() { 0 } else { 1 };
    let body = Body::Compare {
        rows,
        members,
        violations,
    };
    Ok(report(command, settings.parameters(&concepts)?, problem, body, certificates, summary, exit, started))
}

fn matches_constant(cert: &BlockingCertificate, player: usize, value: f64) -> bool {
    cert.profile
        .member(player)
        .is_some_and(|s| s.state_values().iter().flatten().all(|&v| (v - value).abs() <= EXAMPLE_TOLERANCE))
}

/// Reproduces the three-player, two-state example: the weak interim private
/// core is empty on the grid, `(1,1,1)` is in the interim core, and the two
/// hand-made blocking arguments are found by the blocking program.
pub fn cmd_paper_example(command: &[String], settings: &Settings) -> Result<Report, CliError> {
    let started = Instant::now();
    let problem = read_problem(TWO_STATE_EXCHANGE)?;
    let resolution = settings.resolution()?;
    let wip = CoreConcept::WeakInterimPrivate;
    let interim = CoreConcept::interim(0.0);
    let mut items = Vec::new();
    let mut certificates = Vec::new();

    let scan = core_grid_scan(&problem, &wip, resolution, settings.budget, KEEP).map_err(computed)?;
    items.push(ExampleItem {
        name: "weak interim private core is empty on the grid".into(),
        reproduced: scan.members == 0,
        detail: format!("{} of {} grid allocations are members", scan.members, scan.profiles),
    });

    let autarky = two_state_allocation(&problem, 1.0, 1.0, 1.0, 1.0);
    let verdict = in_core(&problem, &autarky, &interim).map_err(computed)?;
    items.push(ExampleItem {
        name: "(1,1,1) is in the interim core".into(),
        reproduced: verdict.member,
        detail: verdict.search.clone(),
    });
    if let Some(c) = &verdict.certificate {
        certificates.push(embed("(1,1,1) under the interim core", &interim, &autarky, c));
    }

    // Case 1 with α = (1/2, 1/2, 0): {2,3} blocks at a with y2 = x2 + α1/2, y3 = x3 + α1/2.
    let x1 = two_state_allocation(&problem, 1.5, 0.5, 0.5, 1.0);
    let c1 = blocks_weak_interim_private(&problem, &x1, Coalition::from_members([1, 2]), 0).map_err(computed)?;
    let ok1 = c1
        .as_ref()
        .is_some_and(|c| c.event == Event::single(0) && matches_constant(c, 1, 0.75) && matches_constant(c, 2, 1.25));
    items.push(ExampleItem {
        name: "{2,3} blocks (3/2, 1/2, 1) at a with y2 = 3/4, y3 = 5/4".into(),
        reproduced: ok1,
        detail: c1.as_ref().map_or("no block found".into(), |c| format!("worst margin {:.6}", c.min_margin())),
    });
    if let Some(c) = &c1 {
        certificates.push(embed("case 1: {2,3} at a", &wip, &x1, c));
    }

    // Case 2: x = (1,1,1); {1,2} blocks at b with y1 = 3/2, y2 = 1/2.
    let c2 = blocks_weak_interim_private(&problem, &autarky, Coalition::from_members([0, 1]), 1).map_err(computed)?;
    let ok2 = c2
        .as_ref()
        .is_some_and(|c| c.event == Event::single(1) && matches_constant(c, 0, 1.5) && matches_constant(c, 1, 0.5));
    items.push(ExampleItem {
        name: "{1,2} blocks (1,1,1) at b with y1 = 3/2, y2 = 1/2".into(),
        reproduced: ok2,
        detail: c2.as_ref().map_or("no block found".into(), |c| format!("worst margin {:.6}", c.min_margin())),
    });
    if let Some(c) = &c2 {
        certificates.push(embed("case 2: {1,2} at b", &wip, &autarky, c));
    }

    let all = items.iter().all(|i| i.reproduced);
    let summary = items
        .iter()
        .map(|i| format!("[{}] {} — {}", if i.reproduced { "ok" } else { "FAILED" }, i.name, i.detail))
        .collect();
    let parameters = Parameters {
        concepts: vec![wip, interim],
        epsilon: Some(0.0),
        resolution: Some(resolution),
        budget: Some(settings.budget),
    };
    let body = Body::PaperExample { items };
    Ok(report(command, parameters, &problem, body, certificates, summary, if all { 0 } else { 1 }, started))
}

/// Re-checks the certificates embedded in a JSON report.
pub fn cmd_verify(command: &[String], report_json: &str) -> Result<Report, CliError> {
    let started = Instant::now();
    let v = Verifiable::from_json(report_json).map_err(|e| CliError::Input(format!("not a report: {e}")))?;
    v.problem.validate().violations.first().map_or(Ok(()), |e| Err(CliError::Input(e.clone())))?;
    let failures = v.check();
    let mut summary = vec![format!(
        "{} certificate(s) checked, {} failed",
        v.certificates.len(),
        failures.len()
    )];
    summary.extend(failures.iter().cloned());
    let exit = if failures.is_empty() { 0 } else { 1 };
    let body = Body::Verify {
        checked: v.certificates.len(),
        failures,
    };
    let parameters = Parameters {
        concepts: Vec::new(),
        epsilon: None,
        resolution: None,
        budget: None,
    };
    Ok(report(command, parameters, &v.problem, body, v.certificates, summary, exit, started))
}
