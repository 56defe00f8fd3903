//! The `foliate` command-line front end. [`run`] does all the work and returns the exit
//! code with both output streams, so the binary only forwards them.

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::fibration::{
    build_atlas_with, kaplan_certificates, kaplan_decomposition, verify_atlas, FibrationError, TowerParams, TrivAtlas,
};
use crate::fixtures;
use crate::leafspace::{build_leaf_space, export_graph, hypothesis_report, special_points, ExportFormat};
use crate::model::{parse_model, validate_model, StripModel};
use crate::numeric::{GridReport, DEFAULT_TOL};
use crate::rational::{parse_q, Q};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Version of every JSON document the CLI writes.
pub const JSON_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    /// Check a model and list its defects.
    Validate,
    /// Leaf-space hypotheses, special points and the strip decomposition.
    Analyze,
    /// The leaf space as DOT or JSON.
    Leafspace,
    /// Build a trivializing atlas (JSON).
    Trivialize,
    /// Verify an atlas, or the atlas of a model, on grids.
    Verify,
    /// Double a model along its boundary.
    Double,
    /// Convert a model between the text format and JSON.
    Export,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
    Csv,
    Model,
}

fn parse_grid(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (2..=1001).contains(&n) {
        Ok(n)
    } else {
        Err("grid must be between 2 and 1001".into())
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err("tolerance must be positive and finite".into())
    }
}

fn parse_positive(s: &str) -> Result<Q, String> {
    let v = parse_q(s).map_err(|e| e.to_string())?;
    if v > Q::from_integer(0.into()) {
        Ok(v)
    } else {
        Err("must be a positive rational".into())
    }
}

fn parse_collar(s: &str) -> Result<Q, String> {
    let v = parse_positive(s)?;
    if v <= Q::from_integer(1.into()) {
        Ok(v)
    } else {
        Err("collar must lie in (0, 1]".into())
    }
}

/// One invocation of the tool.
#[derive(Debug, Clone, Parser)]
#[command(name = "foliate", version, about = "Leaf spaces of striped foliated surfaces and their trivializations")]
pub struct CommandSpec {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// Model file, atlas JSON for `verify`, `-` for stdin, or a fixture name (M0 to M4).
    #[arg(default_value = "-")]
    pub input: String,
    /// Write the result here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Output format. Defaults: text for validate and analyze, dot for leafspace, json
    /// for trivialize, verify and export, model for double.
    #[arg(short, long, value_enum)]
    pub format: Option<Format>,
    /// Samples per axis in grid verification.
    #[arg(long, default_value = "101", value_parser = parse_grid)]
    pub grid: usize,
    /// Tolerance for floating-point checks.
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = parse_tol)]
    pub tol: f64,
    /// Tower spacing M (positive rational).
    #[arg(long, value_parser = parse_positive)]
    pub spacing: Option<Q>,
    /// Collar depth (rational in (0, 1]).
    #[arg(long, value_parser = parse_collar)]
    pub collar: Option<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Outcome {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome { code, stdout: String::new(), stderr }
    }
}

/// Parses arguments (without the program name handling of clap's `exit`). Help and
/// version requests come back as a successful outcome; usage errors exit with 3.
pub fn parse_args<I, T>(args: I) -> Result<CommandSpec, Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    CommandSpec::try_parse_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        let text = e.render().to_string();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::ok(text),
            _ => Outcome::fail(EXIT_IO, text),
        }
    })
}

fn read_input(input: &str, stdin: Option<&str>) -> Result<String, Outcome> {
    if input == "-" {
        return match stdin {
            Some(text) => Ok(text.to_string()),
            None => {
                let mut buf = String::new();
                std::io::stdin()
                    .read_to_string(&mut buf)
                    .map_err(|e| Outcome::fail(EXIT_IO, format!("error: reading stdin: {e}")))?;
                Ok(buf)
            }
        };
    }
    match std::fs::read_to_string(input) {
        Ok(text) => Ok(text),
        Err(e) => fixtures::source(input)
            .map(str::to_string)
            .ok_or_else(|| Outcome::fail(EXIT_IO, format!("error: cannot read {input}: {e}"))),
    }
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// Parses a model from the text format or its JSON form; syntax errors exit with 3.
fn parse_any(text: &str) -> Result<StripModel, Outcome> {
    if looks_like_json(text) {
        serde_json::from_str(text).map_err(|e| Outcome::fail(EXIT_IO, format!("error: model JSON: {e}")))
    } else {
        parse_model(text).map_err(|e| Outcome::fail(EXIT_IO, format!("error: {e}")))
    }
}

/// Parses and validates; validation failures exit with 1.
fn load(text: &str) -> Result<StripModel, Outcome> {
    let model = parse_any(text)?;
    let report = validate_model(&model);
    if report.is_valid() {
        Ok(model)
    } else {
        Err(Outcome::fail(EXIT_INVALID, format!("invalid model:\n{report}")))
    }
}

fn fibration_error(e: FibrationError) -> Outcome {
    Outcome::fail(EXIT_IO, format!("error: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn unsupported(cmd: Subcommand, f: Format) -> Outcome {
    Outcome::fail(EXIT_IO, format!("error: format {f:?} is not available for {cmd:?}").to_lowercase())
}

#[derive(Serialize)]
struct ValidateJson {
    version: u32,
    valid: bool,
    issues: Vec<String>,
}

fn validate(cmd: &CommandSpec, text: &str) -> Outcome {
    let model = match parse_any(text) {
        Ok(m) => m,
        Err(o) => return o,
    };
    let report = validate_model(&model);
    let code = if report.is_valid() { EXIT_OK } else { EXIT_INVALID };
    let stdout = match cmd.format.unwrap_or(Format::Text) {
        Format::Text if report.is_valid() => "valid\n".to_string(),
        Format::Text => report.to_string(),
        Format::Json => to_json(&ValidateJson {
            version: JSON_SCHEMA_VERSION,
            valid: report.is_valid(),
            issues: report.issues.iter().map(|i| i.to_string()).collect(),
        }),
        f => return unsupported(cmd.subcommand, f),
    };
    let stderr = if report.is_valid() { String::new() } else { format!("{} issue(s)\n", report.issues.len()) };
    Outcome { code, stdout, stderr }
}

#[derive(Serialize)]
struct ComponentJson {
    strips: Vec<String>,
    joints: Vec<String>,
    boundary: Vec<String>,
    shape: crate::fibration::ComponentShape,
}

#[derive(Serialize)]
struct AnalyzeJson {
    version: u32,
    strips: usize,
    gluings: usize,
    special_points: Vec<String>,
    nonseparated: Vec<(String, String)>,
    hypotheses: crate::leafspace::HypothesisReport,
    components: Vec<ComponentJson>,
}

fn analyze(cmd: &CommandSpec, model: &StripModel) -> Outcome {
    let graph = build_leaf_space(model);
    let label = |id| graph.vertex(id).map(|v| v.label.clone()).unwrap_or_default();
    let hyp = hypothesis_report(model, &graph);
    let kaplan = match kaplan_decomposition(model) {
        Ok(k) => k,
        Err(e) => return fibration_error(e),
    };
    let name = |s| model.strip_name(s).to_string();
    let doc = AnalyzeJson {
        version: JSON_SCHEMA_VERSION,
        strips: model.strips.len(),
        gluings: model.gluings.len(),
        special_points: special_points(&graph).into_iter().map(label).collect(),
        nonseparated: graph.nonseparated.iter().map(|(a, b)| (label(*a), label(*b))).collect(),
        hypotheses: hyp,
        components: kaplan
            .components
            .iter()
            .map(|c| ComponentJson {
                strips: c.strips.iter().map(|s| name(*s)).collect(),
                joints: c.joints.iter().map(|g| format!("g{}", g.0)).collect(),
                boundary: c.boundary.iter().map(|e| format!("{}.{}", name(e.strip), e.side)).collect(),
                shape: c.shape,
            })
            .collect(),
    };
    match cmd.format.unwrap_or(Format::Text) {
        Format::Json => Outcome::ok(to_json(&doc)),
        Format::Text => {
            let mut out = String::new();
            let h = &doc.hypotheses;
            let _ = writeln!(out, "strips: {}", doc.strips);
            let _ = writeln!(out, "gluings: {}", doc.gluings);
            let _ = writeln!(out, "special points: {} [{}]", doc.special_points.len(), doc.special_points.join(", "));
            for (a, b) in &doc.nonseparated {
                let _ = writeln!(out, "nonseparated: {a} ~ {b}");
            }
            for (key, c) in [
                ("all leaves noncompact", &h.all_leaves_noncompact),
                ("special family locally finite", &h.special_family_locally_finite),
                ("t1", &h.t1),
                ("hausdorff", &h.hausdorff),
                ("locally euclidean", &h.locally_euclidean),
            ] {
                let _ = writeln!(out, "{key}: {} ({})", c.holds, c.certificate);
            }
            let _ = writeln!(out, "components: {}", doc.components.len());
            for c in &doc.components {
                let _ = writeln!(
                    out,
                    "  {:?}: strips [{}] joints [{}] boundary [{}]",
                    c.shape,
                    c.strips.join(", "),
                    c.joints.join(", "),
                    c.boundary.join(", ")
                );
            }
            Outcome::ok(out)
        }
        f => unsupported(cmd.subcommand, f),
    }
}

fn params(cmd: &CommandSpec, model: &StripModel) -> Result<TowerParams, Outcome> {
    let defaults = TowerParams::for_model(model);
    TowerParams::new(cmd.spacing.clone().unwrap_or(defaults.spacing), cmd.collar.clone().unwrap_or(defaults.collar))
        .map_err(fibration_error)
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    version: u32,
    passed: bool,
    #[serde(flatten)]
    report: &'a GridReport,
}

fn verify(cmd: &CommandSpec, text: &str) -> Outcome {
    let atlas = if looks_like_json(text) {
        match TrivAtlas::from_json(text) {
            Ok(a) => a,
            Err(e) => return fibration_error(e),
        }
    } else {
        let model = match load(text) {
            Ok(m) => m,
            Err(o) => return o,
        };
        match params(cmd, &model).and_then(|p| build_atlas_with(&model, p).map_err(fibration_error)) {
            Ok(a) => a,
            Err(o) => return o,
        }
    };
    let mut report = verify_atlas(&atlas, cmd.grid);
    match kaplan_decomposition(&atlas.model) {
        Ok(k) => report.merge(kaplan_certificates(&atlas.model, &k, cmd.grid.min(51), cmd.tol).prefixed("kaplan/")),
        Err(e) => report.fail("kaplan/build", "decomposition", e.to_string()),
    }
    let stdout = match cmd.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&VerifyJson { version: JSON_SCHEMA_VERSION, passed: report.passed(), report: &report }),
        Format::Text => {
            let mut out = report.summary();
            for f in &report.failures {
                let _ = writeln!(out, "FAIL {} at {}: {}", f.check, f.at, f.detail);
            }
            let _ = writeln!(out, "{}", if report.passed() { "passed" } else { "failed" });
            out
        }
        Format::Csv => report.to_csv(),
        f => return unsupported(cmd.subcommand, f),
    };
    if report.passed() {
        Outcome::ok(stdout)
    } else {
        let failed: usize = report.checks.iter().map(|c| c.failed).sum();
        Outcome { code: EXIT_VERIFY_FAILED, stdout, stderr: format!("verification failed: {failed} sample(s)\n") }
    }
}

/// Runs one command. `stdin` stands in for standard input when given.
pub fn run(cmd: &CommandSpec, stdin: Option<&str>) -> Outcome {
    let text = match read_input(&cmd.input, stdin) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let outcome = match cmd.subcommand {
        Subcommand::Validate => validate(cmd, &text),
        Subcommand::Verify => verify(cmd, &text),
        sub => {
            let model = match load(&text) {
                Ok(m) => m,
                Err(o) => return o,
            };
            match sub {
                Subcommand::Analyze => analyze(cmd, &model),
                Subcommand::Leafspace => {
                    let graph = build_leaf_space(&model);
                    match cmd.format.unwrap_or(Format::Dot) {
                        Format::Dot => Outcome::ok(export_graph(&graph, ExportFormat::Dot)),
                        Format::Json => Outcome::ok(export_graph(&graph, ExportFormat::Json)),
                        f => unsupported(sub, f),
                    }
                }
                Subcommand::Trivialize => match cmd.format.unwrap_or(Format::Json) {
                    Format::Json => match params(cmd, &model).and_then(|p| build_atlas_with(&model, p).map_err(fibration_error)) {
                        Ok(atlas) => Outcome::ok(atlas.to_json() + "\n"),
                        Err(o) => o,
                    },
                    f => unsupported(sub, f),
                },
                Subcommand::Double => match model.double() {
                    Ok((doubled, _)) => match cmd.format.unwrap_or(Format::Model) {
                        Format::Model => Outcome::ok(doubled.to_string()),
                        Format::Json => Outcome::ok(to_json(&doubled)),
                        f => unsupported(sub, f),
                    },
                    Err(e) => Outcome::fail(EXIT_IO, format!("error: {e}")),
                },
                Subcommand::Export => match cmd.format.unwrap_or(Format::Json) {
                    Format::Json => Outcome::ok(to_json(&model)),
                    Format::Model => Outcome::ok(model.to_string()),
                    f => unsupported(sub, f),
                },
                Subcommand::Validate | Subcommand::Verify => unreachable!("handled above"),
            }
        }
    };
    match (&cmd.output, outcome.code) {
        (Some(path), EXIT_OK | EXIT_VERIFY_FAILED) => match std::fs::write(path, &outcome.stdout) {
            Ok(()) => Outcome { stdout: String::new(), ..outcome },
            Err(e) => Outcome::fail(EXIT_IO, format!("error: cannot write {}: {e}", path.display())),
        },
        _ => outcome,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I, stdin: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(args) {
        Ok(cmd) => run(&cmd, stdin),
        Err(o) => o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> Outcome {
        main_with_args(std::iter::once("foliate").chain(args.iter().copied()), None)
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["validate", "M0"]).code, EXIT_OK);
        let bad = call(&["validate", "M4"]);
        assert_eq!(bad.code, EXIT_INVALID);
        assert!(bad.stdout.contains("overlapping arcs"), "{}", bad.stdout);
        assert_eq!(call(&["analyze", "M4"]).code, EXIT_INVALID);
        assert_eq!(call(&["validate", "/nonexistent/file.model"]).code, EXIT_IO);
        assert_eq!(call(&["validate", "M0", "--grid", "0"]).code, EXIT_IO);
        assert_eq!(call(&["bogus"]).code, EXIT_IO);
        assert_eq!(call(&["--help"]).code, EXIT_OK);
    }

    #[test]
    fn analyze_m1() {
        let out = call(&["analyze", "M1"]);
        assert_eq!(out.code, EXIT_OK);
        assert!(out.stdout.contains("special points: 2"), "{}", out.stdout);
        assert!(out.stdout.contains("hausdorff: false"), "{}", out.stdout);
    }

    #[test]
    fn trivialize_then_verify() {
        let atlas = call(&["trivialize", "M0"]);
        assert_eq!(atlas.code, EXIT_OK);
        let cmd = parse_args(["foliate", "verify", "-", "--grid", "11"]).unwrap();
        let out = run(&cmd, Some(&atlas.stdout));
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        assert!(out.stdout.contains("\"failures\": []"));
    }

    #[test]
    fn stdin_parse_errors_exit_3() {
        let cmd = parse_args(["foliate", "analyze"]).unwrap();
        assert_eq!(run(&cmd, Some("strip\n")).code, EXIT_IO);
    }
}
