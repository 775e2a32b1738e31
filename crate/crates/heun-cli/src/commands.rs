//! The five CLI commands: expand, find-q, solve, verify, catalog.
//!
//! Exit codes: 0 success, 2 usage/validation error, 3 computational
//! breakdown, 4 verification failure. Computation errors on valid inputs
//! additionally produce a JSON document with a machine-readable `error`
//! field; pure usage errors go to stderr only.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use heun::accessory::{
    q_polynomial, solve_q, validate_termination_class, AccessoryPolynomial, AccessoryRoot,
};
use heun::params::{derive_delta, derive_epsilon, ExpansionSpec};
use heun::recurrence::{generate_coefficients, poincare_perron_candidates, RecurrenceContext};
use heun::solutions::{build_finite_solution, build_second_solution, SolutionForm};
use heun::verification::{
    verify_solution, verify_solution_with_thresholds, wronskian, Verdict, VerificationReport,
    DEVIATION_PASS_THRESHOLD, RESIDUAL_PASS_THRESHOLD,
};
use heun::{Gamma0Choice, HeunError, HeunParameters};

use crate::jsonfmt;
use crate::sampling;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BREAKDOWN: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "heun",
    version,
    about = "Hypergeometric-series solutions of the general Heun equation: \
             expansions, terminating accessory parameters, closed-form assembly \
             and ODE-residual verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate expansion coefficients a_0..a_K via the three-term recurrence
    Expand(ExpandArgs),
    /// Build the accessory polynomial for a termination class and solve for
    /// the terminating q values
    #[command(name = "find-q")]
    FindQ(FindQArgs),
    /// Assemble a finite-sum solution at a terminating q and verify it
    Solve(SolveArgs),
    /// Re-verify a solution document produced by `solve`
    Verify(VerifyArgs),
    /// Sweep the termination classes over seeded random parameter sets (CSV)
    Catalog(CatalogArgs),
}

/// The seven equation parameters, as flags or a JSON file (flags win).
#[derive(Args, Debug, Default, Clone)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// JSON document with the seven parameter fields
    #[arg(long)]
    pub params_file: Option<PathBuf>,
    /// Derive epsilon from the Fuchsian condition (needs the other four
    /// exponents)
    #[arg(long)]
    pub derive_epsilon: bool,
    /// Derive delta from the Fuchsian condition (needs the other four
    /// exponents)
    #[arg(long)]
    pub derive_delta: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Gamma0Flag {
    Gamma,
    Alpha,
    Beta,
}

impl From<Gamma0Flag> for Gamma0Choice {
    fn from(f: Gamma0Flag) -> Self {
        match f {
            Gamma0Flag::Gamma => Gamma0Choice::Gamma,
            Gamma0Flag::Alpha => Gamma0Choice::Alpha,
            Gamma0Flag::Beta => Gamma0Choice::Beta,
        }
    }
}

impl std::fmt::Display for Gamma0Flag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        Gamma0Choice::from(*self).fmt(f)
    }
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// gamma0 choice: gamma, alpha or beta
    #[arg(long)]
    pub gamma0: Gamma0Flag,
    /// Number of recurrence steps (coefficients a_0..a_K)
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ExpandFormat::Json)]
    pub format: ExpandFormat,
    /// Write the document here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpandFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct FindQArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub gamma0: Gamma0Flag,
    /// Termination order: last nonzero coefficient index
    #[arg(long = "N")]
    pub n: usize,
    /// Skip the per-root solution assembly and verification
    #[arg(long)]
    pub no_verify: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub gamma0: Gamma0Flag,
    /// Termination order; inferred from the class condition when omitted
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Pick the accessory parameter as the i-th root (ascending) of the
    /// accessory polynomial instead of passing --q
    #[arg(long)]
    pub root_index: Option<usize>,
    /// Also build the complementary 1-z-frame solution and report the
    /// Wronskian at z = 0.5
    #[arg(long)]
    pub second_solution: bool,
    /// Sample the solution at these z values (comma-separated)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub grid: Vec<f64>,
    /// Normalized-residual bound for a Pass verdict
    #[arg(long, default_value_t = RESIDUAL_PASS_THRESHOLD)]
    pub residual_threshold: f64,
    /// Series-vs-integration absolute deviation bound for a Pass verdict
    #[arg(long, default_value_t = DEVIATION_PASS_THRESHOLD)]
    pub deviation_threshold: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// A JSON document produced by `solve`
    #[arg(long)]
    pub from_json: PathBuf,
    /// Normalized-residual bound for a Pass verdict
    #[arg(long, default_value_t = RESIDUAL_PASS_THRESHOLD)]
    pub residual_threshold: f64,
    /// Series-vs-integration absolute deviation bound for a Pass verdict
    #[arg(long, default_value_t = DEVIATION_PASS_THRESHOLD)]
    pub deviation_threshold: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// Termination classes to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [Gamma0Flag::Gamma, Gamma0Flag::Alpha, Gamma0Flag::Beta])]
    pub classes: Vec<Gamma0Flag>,
    #[arg(long, default_value_t = 0)]
    pub n_min: usize,
    #[arg(long, default_value_t = 2)]
    pub n_max: usize,
    /// Number of random parameter sets per (class, N)
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Base random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (output order is independent of this)
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// What a command produced: the exit code, an optional document for stdout
/// (or --output), and an optional stderr message.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: u8,
    pub document: Option<String>,
    pub error_message: Option<String>,
    pub output_path: Option<PathBuf>,
}

impl Outcome {
    fn usage(message: String) -> Self {
        Outcome {
            exit_code: EXIT_USAGE,
            document: None,
            error_message: Some(message),
            output_path: None,
        }
    }
}

fn error_slug(e: &HeunError) -> &'static str {
    match e {
        HeunError::FuchsianViolation { .. } => "fuchsian_violation",
        HeunError::SingularA { .. } => "singular_a",
        HeunError::ComplexExponents { .. } => "complex_exponents",
        HeunError::PoleAtC { .. } => "pole_at_c",
        HeunError::NoConvergence { .. } => "no_convergence",
        HeunError::DomainError { .. } => "domain_error",
        HeunError::DivisionByZero { .. } => "division_by_zero",
        HeunError::RecurrenceBreakdown { .. } => "recurrence_breakdown",
        HeunError::NotTerminated { .. } => "not_terminated",
        HeunError::WrongGamma0 => "wrong_gamma0",
        HeunError::ZeroDenominator { .. } => "zero_denominator",
        HeunError::TerminationClassMismatch { .. } => "termination_class_mismatch",
        HeunError::StepFailure { .. } => "step_failure",
        HeunError::InvalidInput(_) => "invalid_input",
    }
}

fn exit_code_for(e: &HeunError) -> u8 {
    match e {
        HeunError::FuchsianViolation { .. }
        | HeunError::SingularA { .. }
        | HeunError::TerminationClassMismatch { .. }
        | HeunError::WrongGamma0
        | HeunError::InvalidInput(_) => EXIT_USAGE,
        _ => EXIT_BREAKDOWN,
    }
}

#[derive(Serialize)]
struct ErrorField {
    code: String,
    message: String,
}

#[derive(Serialize)]
struct Document<I: Serialize, O: Serialize> {
    command: &'static str,
    inputs: I,
    #[serde(skip_serializing_if = "Option::is_none")]
    outputs: Option<O>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorField>,
}

fn emit<I: Serialize, O: Serialize>(
    doc: &Document<I, O>,
    exit_code: u8,
    output_path: Option<PathBuf>,
    error_message: Option<String>,
) -> Outcome {
    match jsonfmt::to_string(doc) {
        Ok(text) => Outcome {
            exit_code,
            document: Some(text),
            error_message,
            output_path,
        },
        Err(e) => Outcome {
            exit_code: EXIT_BREAKDOWN,
            document: None,
            error_message: Some(format!("serialization failed: {e}")),
            output_path: None,
        },
    }
}

#[derive(Deserialize, Default)]
struct ParamsFile {
    gamma: Option<f64>,
    delta: Option<f64>,
    epsilon: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    q: Option<f64>,
    a: Option<f64>,
}

/// Merge file + flags + derive-* into a validated parameter record.
pub fn resolve_params(args: &ParamArgs, q_required: bool) -> Result<HeunParameters, Outcome> {
    let file: ParamsFile = match &args.params_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Outcome::usage(format!("cannot read --params-file {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                Outcome::usage(format!("cannot parse --params-file {}: {e}", path.display()))
            })?
        }
        None => ParamsFile::default(),
    };
    let pick = |flag: Option<f64>, from_file: Option<f64>, name: &str| {
        flag.or(from_file)
            .ok_or_else(|| Outcome::usage(format!("missing required parameter --{name}")))
    };
    let gamma = pick(args.gamma, file.gamma, "gamma")?;
    let alpha = pick(args.alpha, file.alpha, "alpha")?;
    let beta = pick(args.beta, file.beta, "beta")?;
    let a = pick(args.a, file.a, "a")?;
    if args.derive_epsilon && args.derive_delta {
        return Err(Outcome::usage(
            "--derive-epsilon and --derive-delta are mutually exclusive".into(),
        ));
    }
    let (delta, epsilon) = if args.derive_epsilon {
        let delta = pick(args.delta, file.delta, "delta")?;
        (delta, derive_epsilon(gamma, delta, alpha, beta))
    } else if args.derive_delta {
        let epsilon = pick(args.epsilon, file.epsilon, "epsilon")?;
        (derive_delta(gamma, epsilon, alpha, beta), epsilon)
    } else {
        (
            pick(args.delta, file.delta, "delta")?,
            pick(args.epsilon, file.epsilon, "epsilon")?,
        )
    };
    let q = match args.q.or(file.q) {
        Some(q) => q,
        None if q_required => {
            return Err(Outcome::usage("missing required parameter --q".into()))
        }
        None => 0.0,
    };
    HeunParameters::new(gamma, delta, epsilon, alpha, beta, q, a)
        .map_err(|e| Outcome::usage(format!("invalid parameters: {e}")))
}

// ---------------------------------------------------------------------
// find-q

#[derive(Serialize)]
struct FindQInputs {
    params: HeunParameters,
    gamma0: String,
    n: usize,
}

#[derive(Serialize)]
struct RootReport {
    index: usize,
    root: AccessoryRoot,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct FindQOutputs {
    polynomial: AccessoryPolynomial,
    roots: Vec<RootReport>,
}

/// Report for one accessory root: assemble the solution when the root is
/// real and verify it against the equation.
fn report_root(
    p: &HeunParameters,
    gamma0: Gamma0Choice,
    n: usize,
    index: usize,
    root: AccessoryRoot,
    verify: bool,
) -> RootReport {
    if !root.is_real {
        return RootReport {
            index,
            root,
            verification: None,
            note: Some("complex root: exempted from real solution assembly".into()),
        };
    }
    if !verify {
        return RootReport {
            index,
            root,
            verification: None,
            note: None,
        };
    }
    let spec = ExpansionSpec::terminating(gamma0, n);
    match build_finite_solution(p, &spec, root.re) {
        Ok(form) => RootReport {
            index,
            root,
            verification: Some(verify_solution(&form, &form.params)),
            note: None,
        },
        Err(e) => RootReport {
            index,
            root,
            verification: None,
            note: Some(format!("assembly failed: {e}")),
        },
    }
}

pub fn cmd_find_q(args: &FindQArgs) -> Outcome {
    let p = match resolve_params(&args.params, false) {
        Ok(p) => p,
        Err(out) => return out,
    };
    let gamma0: Gamma0Choice = args.gamma0.into();
    let inputs = FindQInputs {
        params: p,
        gamma0: gamma0.to_string(),
        n: args.n,
    };
    let poly = match q_polynomial(&p, gamma0, args.n) {
        Ok(poly) => poly,
        Err(e) => {
            let doc: Document<_, FindQOutputs> = Document {
                command: "find-q",
                inputs,
                outputs: None,
                error: Some(ErrorField {
                    code: error_slug(&e).into(),
                    message: e.to_string(),
                }),
            };
            return emit(&doc, exit_code_for(&e), args.output.clone(), Some(e.to_string()));
        }
    };
    let roots = solve_q(&poly);
    let reports: Vec<RootReport> = roots
        .into_iter()
        .enumerate()
        .map(|(i, r)| report_root(&p, gamma0, args.n, i, r, !args.no_verify))
        .collect();
    let doc = Document {
        command: "find-q",
        inputs,
        outputs: Some(FindQOutputs {
            polynomial: poly,
            roots: reports,
        }),
        error: None,
    };
    emit(&doc, EXIT_OK, args.output.clone(), None)
}

// ---------------------------------------------------------------------
// solve

#[derive(Serialize)]
struct SolveInputs {
    params: HeunParameters,
    gamma0: String,
    n: usize,
    q: f64,
}

#[derive(Serialize)]
struct SamplePoint {
    z: f64,
    u: f64,
    u_prime: f64,
    u_double_prime: f64,
}

#[derive(Serialize)]
struct SolveOutputs {
    solution: SolutionForm,
    verification: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<SamplePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_solution: Option<SolutionForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wronskian_at_half: Option<f64>,
}

/// N from the class condition when not given explicitly.
fn infer_n(p: &HeunParameters, gamma0: Gamma0Choice) -> Result<usize, Outcome> {
    let value = match gamma0 {
        Gamma0Choice::Gamma => -p.epsilon(),
        Gamma0Choice::Alpha => -(p.epsilon() + p.gamma() - p.alpha()),
        Gamma0Choice::Beta => -(p.epsilon() + p.gamma() - p.beta()),
    };
    let rounded = value.round();
    if (value - rounded).abs() > 1e-9 || rounded < 0.0 {
        return Err(Outcome::usage(format!(
            "cannot infer --N: class value {value} is not a nonnegative integer"
        )));
    }
    Ok(rounded as usize)
}

pub fn cmd_solve(args: &SolveArgs) -> Outcome {
    let p = match resolve_params(&args.params, false) {
        Ok(p) => p,
        Err(out) => return out,
    };
    let gamma0: Gamma0Choice = args.gamma0.into();
    let n = match args.n {
        Some(n) => n,
        None => match infer_n(&p, gamma0) {
            Ok(n) => n,
            Err(out) => return out,
        },
    };
    if !validate_termination_class(&p, gamma0, n) {
        return Outcome::usage(format!(
            "termination class for gamma0 = {gamma0} and N = {n} does not hold \
             (epsilon/exponent flags inconsistent)"
        ));
    }
    let q = match (args.params.q.is_some(), args.root_index) {
        (true, Some(_)) => {
            return Outcome::usage("--q and --root-index are mutually exclusive".into())
        }
        (true, None) => p.q(),
        (false, Some(i)) => {
            let poly = match q_polynomial(&p, gamma0, n) {
                Ok(poly) => poly,
                Err(e) => return Outcome::usage(format!("accessory polynomial failed: {e}")),
            };
            let roots = solve_q(&poly);
            match roots.get(i) {
                Some(r) if r.is_real => r.re,
                Some(r) => {
                    return Outcome::usage(format!(
                        "root {i} is complex ({} + {}i); pick a real root",
                        r.re, r.im
                    ))
                }
                None => {
                    return Outcome::usage(format!(
                        "--root-index {i} out of range: polynomial has {} roots",
                        roots.len()
                    ))
                }
            }
        }
        (false, None) => {
            return Outcome::usage("provide --q or --root-index".into());
        }
    };
    let inputs = SolveInputs {
        params: p,
        gamma0: gamma0.to_string(),
        n,
        q,
    };
    let spec = ExpansionSpec::terminating(gamma0, n);
    let form = match build_finite_solution(&p, &spec, q) {
        Ok(form) => form,
        Err(e) => {
            let doc: Document<_, SolveOutputs> = Document {
                command: "solve",
                inputs,
                outputs: None,
                error: Some(ErrorField {
                    code: error_slug(&e).into(),
                    message: e.to_string(),
                }),
            };
            return emit(&doc, exit_code_for(&e), args.output.clone(), Some(e.to_string()));
        }
    };
    let mut verification = verify_solution_with_thresholds(
        &form,
        &form.params,
        args.residual_threshold,
        args.deviation_threshold,
    );

    let samples = if args.grid.is_empty() {
        None
    } else {
        let mut points = Vec::with_capacity(args.grid.len());
        for &z in &args.grid {
            match form.evaluate(z) {
                Ok((u, up, upp)) => points.push(SamplePoint {
                    z,
                    u,
                    u_prime: up,
                    u_double_prime: upp,
                }),
                Err(e) => {
                    return Outcome::usage(format!("grid point z = {z} not evaluable: {e}"))
                }
            }
        }
        Some(points)
    };

    let (second_solution, second_verification, wronskian_at_half) = if args.second_solution {
        match build_second_solution(&p, q) {
            Ok(second) => {
                let report = verify_solution_with_thresholds(
                    &second,
                    &second.params,
                    args.residual_threshold,
                    args.deviation_threshold,
                );
                let w = wronskian(&form, &second, 0.5).ok();
                verification.wronskian_at_half = w;
                (Some(second), Some(report), w)
            }
            Err(e) => {
                let doc: Document<_, SolveOutputs> = Document {
                    command: "solve",
                    inputs,
                    outputs: None,
                    error: Some(ErrorField {
                        code: error_slug(&e).into(),
                        message: e.to_string(),
                    }),
                };
                return emit(&doc, exit_code_for(&e), args.output.clone(), Some(e.to_string()));
            }
        }
    } else {
        (None, None, None)
    };

    let doc = Document {
        command: "solve",
        inputs,
        outputs: Some(SolveOutputs {
            solution: form,
            verification,
            samples,
            second_solution,
            second_verification,
            wronskian_at_half,
        }),
        error: None,
    };
    emit(&doc, EXIT_OK, args.output.clone(), None)
}

// ---------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct VerifyInputs {
    from_json: String,
}

#[derive(Serialize)]
struct VerifyOutputs {
    verification: VerificationReport,
}

pub fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let text = match std::fs::read_to_string(&args.from_json) {
        Ok(text) => text,
        Err(e) => {
            return Outcome::usage(format!(
                "cannot read --from-json {}: {e}",
                args.from_json.display()
            ))
        }
    };
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return Outcome::usage(format!("invalid JSON: {e}")),
    };
    let solution_value = value
        .get("outputs")
        .and_then(|o| o.get("solution"))
        .cloned();
    let Some(solution_value) = solution_value else {
        return Outcome::usage("document has no outputs.solution field".into());
    };
    let form: SolutionForm = match serde_json::from_value(solution_value) {
        Ok(f) => f,
        Err(e) => return Outcome::usage(format!("cannot decode solution form: {e}")),
    };
    let report = verify_solution_with_thresholds(
        &form,
        &form.params,
        args.residual_threshold,
        args.deviation_threshold,
    );
    let exit_code = match report.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_VERIFICATION,
        Verdict::Inconclusive => EXIT_BREAKDOWN,
    };
    let doc = Document {
        command: "verify",
        inputs: VerifyInputs {
            from_json: args.from_json.display().to_string(),
        },
        outputs: Some(VerifyOutputs {
            verification: report,
        }),
        error: None,
    };
    emit(&doc, exit_code, args.output.clone(), None)
}

// ---------------------------------------------------------------------
// expand

#[derive(Serialize)]
struct ExpandInputs {
    params: HeunParameters,
    gamma0: String,
    k: usize,
}

#[derive(Serialize)]
struct ExpandOutputs {
    coefficients: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terminated_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_ratio: Option<f64>,
    /// Candidate asymptotic ratios 1 and |(a-1)/a|.
    pp_candidates: [f64; 2],
    dominant_candidate: f64,
}

pub fn cmd_expand(args: &ExpandArgs) -> Outcome {
    if args.k < 1 {
        return Outcome::usage("--K must be at least 1".into());
    }
    let p = match resolve_params(&args.params, true) {
        Ok(p) => p,
        Err(out) => return out,
    };
    let gamma0: Gamma0Choice = args.gamma0.into();
    let inputs = ExpandInputs {
        params: p,
        gamma0: gamma0.to_string(),
        k: args.k,
    };
    let ctx = RecurrenceContext::from_choice(p, gamma0);
    let seq = match generate_coefficients(&ctx, args.k) {
        Ok(seq) => seq,
        Err(e) => {
            let doc: Document<_, ExpandOutputs> = Document {
                command: "expand",
                inputs,
                outputs: None,
                error: Some(ErrorField {
                    code: error_slug(&e).into(),
                    message: e.to_string(),
                }),
            };
            return emit(&doc, exit_code_for(&e), args.output.clone(), Some(e.to_string()));
        }
    };
    match args.format {
        ExpandFormat::Csv => {
            let mut csv = String::from("n,coefficient\n");
            for (i, c) in seq.coefficients.iter().enumerate() {
                csv.push_str(&format!("{i},{}\n", jsonfmt::fmt_f64(*c)));
            }
            Outcome {
                exit_code: EXIT_OK,
                document: Some(csv),
                error_message: None,
                output_path: args.output.clone(),
            }
        }
        ExpandFormat::Json => {
            let candidates = poincare_perron_candidates(&p);
            let doc = Document {
                command: "expand",
                inputs,
                outputs: Some(ExpandOutputs {
                    coefficients: seq.coefficients.clone(),
                    terminated_at: seq.terminated_at,
                    tail_ratio: seq.tail_ratio(10),
                    pp_candidates: candidates,
                    dominant_candidate: candidates.into_iter().fold(f64::MIN, f64::max),
                }),
                error: None,
            };
            emit(&doc, EXIT_OK, args.output.clone(), None)
        }
    }
}

// ---------------------------------------------------------------------
// catalog

/// Fixed CSV header of the catalog sweep.
pub const CATALOG_HEADER: &str =
    "class,N,seed,gamma,delta,epsilon,alpha,beta,a,root_index,q,residual_sup,verdict";

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "Pass",
        Verdict::Fail => "Fail",
        Verdict::Inconclusive => "Inconclusive",
    }
}

fn catalog_rows_for_item(
    base_seed: u64,
    class_idx: usize,
    class: Gamma0Choice,
    n: usize,
    seed: u64,
) -> Vec<String> {
    let mut rng = sampling::item_rng(base_seed, class_idx as u64, n as u64, seed);
    let p = sampling::sample_class_params(&mut rng, class, n);
    let prefix = |root_index: usize| {
        format!(
            "{class},{n},{seed},{},{},{},{},{},{},{root_index}",
            jsonfmt::fmt_f64(p.gamma()),
            jsonfmt::fmt_f64(p.delta()),
            jsonfmt::fmt_f64(p.epsilon()),
            jsonfmt::fmt_f64(p.alpha()),
            jsonfmt::fmt_f64(p.beta()),
            jsonfmt::fmt_f64(p.a()),
        )
    };
    let poly = match q_polynomial(&p, class, n) {
        Ok(poly) => poly,
        Err(_) => {
            // Breakdown rows are reported, never dropped.
            return vec![format!("{},nan,nan,Inconclusive", prefix(0))];
        }
    };
    let spec = ExpansionSpec::terminating(class, n);
    solve_q(&poly)
        .into_iter()
        .enumerate()
        .map(|(i, root)| {
            let q_text = jsonfmt::fmt_f64(root.re);
            if !root.is_real {
                return format!("{},{q_text},nan,Inconclusive", prefix(i));
            }
            match build_finite_solution(&p, &spec, root.re) {
                Ok(form) => {
                    let report = verify_solution(&form, &form.params);
                    format!(
                        "{},{q_text},{},{}",
                        prefix(i),
                        jsonfmt::fmt_f64(report.residual_sup),
                        verdict_name(report.verdict)
                    )
                }
                Err(_) => format!("{},{q_text},nan,Inconclusive", prefix(i)),
            }
        })
        .collect()
}

pub fn cmd_catalog(args: &CatalogArgs) -> Outcome {
    if args.n_max < args.n_min {
        return Outcome::usage("--n-max must be >= --n-min".into());
    }
    if args.jobs == 0 {
        return Outcome::usage("--jobs must be at least 1".into());
    }
    // Work items in deterministic output order.
    let items: Vec<(usize, Gamma0Choice, usize, u64)> = args
        .classes
        .iter()
        .enumerate()
        .flat_map(|(ci, class)| {
            let class: Gamma0Choice = (*class).into();
            (args.n_min..=args.n_max)
                .flat_map(move |n| (0..args.seeds).map(move |seed| (ci, class, n, seed)))
        })
        .collect();

    let base = args.seed;
    let mut rows_by_item: Vec<Vec<String>> = vec![Vec::new(); items.len()];
    if args.jobs <= 1 {
        for (idx, (ci, class, n, seed)) in items.iter().enumerate() {
            rows_by_item[idx] = catalog_rows_for_item(base, *ci, *class, *n, *seed);
        }
    } else {
        let chunk = items.len().div_ceil(args.jobs);
        let results: Vec<(usize, Vec<String>)> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (chunk_idx, slice) in items.chunks(chunk).enumerate() {
                let offset = chunk_idx * chunk;
                handles.push(scope.spawn(move || {
                    slice
                        .iter()
                        .enumerate()
                        .map(|(j, (ci, class, n, seed))| {
                            (offset + j, catalog_rows_for_item(base, *ci, *class, *n, *seed))
                        })
                        .collect::<Vec<_>>()
                }));
            }
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("catalog worker panicked"))
                .collect()
        });
        for (idx, rows) in results {
            rows_by_item[idx] = rows;
        }
    }

    let mut csv = String::from(CATALOG_HEADER);
    csv.push('\n');
    for rows in rows_by_item {
        for row in rows {
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    Outcome {
        exit_code: EXIT_OK,
        document: Some(csv),
        error_message: None,
        output_path: args.output.clone(),
    }
}

/// Dispatch a parsed command line.
pub fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Expand(args) => cmd_expand(args),
        Command::FindQ(args) => cmd_find_q(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Catalog(args) => cmd_catalog(args),
    }
}
