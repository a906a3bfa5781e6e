//! Command dispatch and JSON reports for the `dnorm` binary.

pub mod parse;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::birkhoff::{beta_and_residue, birkhoff_decompose, check_locality};
use crate::coeff::fmt_rational;
use crate::diffeo::{log_d_magnus, Diffeo};
use crate::error::Error;
use crate::normalforms::{
    check_conjugacy, correction, correction_additive, exp_d_solve, linearize, normal_form_direct,
    normal_form_ecalle_vallet, renormalized_normal_form, ConjugacyCertificate,
};
use crate::regularize::{i_eps, image_part, validate_scheme, Check, Derivation, Diagonal, Scheme};
use crate::series::Monomial;
use crate::vfield::{render_basis, VectorField};

pub use parse::{parse_coeff, parse_problem, serialize, DeltaSpec, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RESONANCE: i32 = 3;
pub const EXIT_VALIDITY: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::TooManyVariables(_) | Error::LowDegree(_) => EXIT_PARSE,
        Error::Resonance(_) => EXIT_RESONANCE,
        Error::ValidityExhausted { .. } => EXIT_VALIDITY,
        _ => EXIT_INVARIANT,
    }
}

#[derive(Parser, Debug)]
#[command(name = "dnorm", version, about = "Exact normal forms of formal vector fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct Flags {
    /// Override the grade order N.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Override the e-validity target K.
    #[arg(long = "eps-order", global = true)]
    pub eps_order: Option<i32>,
    /// Override the twist truncation T.
    #[arg(long = "tau-order", global = true)]
    pub tau_order: Option<u8>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Print nothing on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Compute a normal form.
    Normalize {
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        scheme: Method,
        file: PathBuf,
    },
    /// Compute the correction.
    Correct { file: PathBuf },
    /// Solve the homological equation; fails on resonance.
    Linearize { file: PathBuf },
    /// Birkhoff-decompose the regularized solution.
    Birkhoff { file: PathBuf },
    /// Run the full invariant suite.
    Check { file: PathBuf },
}

impl Command {
    pub fn file(&self) -> &PathBuf {
        match self {
            Command::Normalize { file, .. }
            | Command::Correct { file }
            | Command::Linearize { file }
            | Command::Birkhoff { file }
            | Command::Check { file } => file,
        }
    }

    pub fn action(&self) -> Action {
        match self {
            Command::Normalize { scheme, .. } => Action::Normalize(*scheme),
            Command::Correct { .. } => Action::Correct,
            Command::Linearize { .. } => Action::Linearize,
            Command::Birkhoff { .. } => Action::Birkhoff,
            Command::Check { .. } => Action::Check,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    Renorm,
    Ev,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Renorm => "renorm",
            Method::Ev => "ev",
        }
    }
}

/// A command detached from its input file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Normalize(Method),
    Correct,
    Linearize,
    Birkhoff,
    Check,
}

impl Action {
    fn name(self) -> &'static str {
        match self {
            Action::Normalize(_) => "normalize",
            Action::Correct => "correct",
            Action::Linearize => "linearize",
            Action::Birkhoff => "birkhoff",
            Action::Check => "check",
        }
    }
}

/// Orders that override the problem file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub order: Option<usize>,
    pub eps_order: Option<i32>,
    pub tau_order: Option<u8>,
}

impl From<&Flags> for Overrides {
    fn from(f: &Flags) -> Self {
        Overrides {
            order: f.order,
            eps_order: f.eps_order,
            tau_order: f.tau_order,
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct SchemeEcho {
    pub method: Option<String>,
    pub vars: Vec<String>,
    pub lambda: Vec<String>,
    pub delta: String,
    pub order: usize,
    pub eps_order: i32,
    pub tau_order: u8,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub var: String,
    pub terms: Vec<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Conjugator {
    pub components: Vec<Component>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct BirkhoffBlock {
    pub minus: Vec<Component>,
    pub plus: Vec<Component>,
    pub beta: Vec<String>,
    pub residue: Vec<String>,
    pub local: bool,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct ErrorBlock {
    pub kind: String,
    pub message: String,
    pub terms: Vec<String>,
}

/// The JSON document emitted by every run.
#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub scheme: Option<SchemeEcho>,
    pub normal_form: Option<Vec<String>>,
    pub conjugator: Option<Conjugator>,
    pub birkhoff: Option<BirkhoffBlock>,
    pub correction: Option<Vec<String>>,
    pub checks: Vec<Check>,
    pub error: Option<ErrorBlock>,
    pub exit: i32,
}

impl Report {
    fn new(action: Action) -> Self {
        Report {
            command: action.name().to_string(),
            scheme: None,
            normal_form: None,
            conjugator: None,
            birkhoff: None,
            correction: None,
            checks: Vec::new(),
            error: None,
            exit: EXIT_OK,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn fail(&mut self, e: &Error, names: &[String]) {
        let (kind, terms) = match e {
            Error::Resonance(t) => ("resonance", t.clone()),
            Error::KernelComponent(t) => ("kernel_component", t.clone()),
            Error::Parse { .. } => ("parse", Vec::new()),
            Error::ValidityExhausted { .. } => ("validity", Vec::new()),
            _ => ("invariant", Vec::new()),
        };
        self.error = Some(ErrorBlock {
            kind: kind.to_string(),
            message: render_error(e, names),
            terms: terms.iter().map(|(m, j)| render_basis(m, *j, names)).collect(),
        });
        self.exit = exit_code(e);
    }
}

fn render_error(e: &Error, names: &[String]) -> String {
    let list = |t: &[(Monomial, usize)]| {
        t.iter()
            .map(|(m, j)| render_basis(m, *j, names))
            .collect::<Vec<_>>()
            .join(", ")
    };
    match e {
        Error::Resonance(t) => format!("resonant terms obstruct the solve: {}", list(t)),
        Error::KernelComponent(t) => format!("input has a nonzero kernel component: {}", list(t)),
        other => other.to_string(),
    }
}

fn components(phi: &Diffeo, names: &[String]) -> Vec<Component> {
    phi.components()
        .iter()
        .zip(names)
        .map(|(s, n)| Component {
            var: n.clone(),
            terms: s.render(names),
        })
        .collect()
}

fn echo(p: &ProblemFile, s: &Scheme, action: Action) -> SchemeEcho {
    SchemeEcho {
        method: match action {
            Action::Normalize(m) => Some(m.name().to_string()),
            _ => None,
        },
        vars: p.vars.clone(),
        lambda: p.lambda.iter().map(fmt_rational).collect(),
        delta: match &p.delta {
            DeltaSpec::Grading => "grading".to_string(),
            DeltaSpec::Diag(mu) => format!(
                "diag {}",
                mu.iter().map(fmt_rational).collect::<Vec<_>>().join(" ")
            ),
        },
        order: s.order,
        eps_order: s.eps_order,
        tau_order: s.tau_order,
    }
}

fn certificate_check(name: &str, cert: &ConjugacyCertificate) -> Check {
    let r = check_conjugacy(cert);
    Check::new(
        name,
        r.pass,
        if r.pass {
            "Lie and operator identities hold".to_string()
        } else {
            r.violations.join("; ")
        },
    )
}

/// Applies overrides to a parsed problem.
pub fn apply_overrides(mut p: ProblemFile, o: Overrides) -> ProblemFile {
    if let Some(n) = o.order {
        p.order = n;
    }
    if let Some(k) = o.eps_order {
        p.eps_order = Some(k);
    }
    if let Some(t) = o.tau_order {
        p.tau_order = Some(t);
    }
    p
}

/// Runs `action` on the text of a problem file.
pub fn run_text(action: Action, text: &str, overrides: Overrides) -> Report {
    let mut report = Report::new(action);
    let problem = match parse_problem(text) {
        Ok(p) => apply_overrides(p, overrides),
        Err(e) => {
            report.fail(&e, &[]);
            return report;
        }
    };
    run_problem(action, &problem, report)
}

/// Runs `action` on a parsed problem.
pub fn run(action: Action, problem: &ProblemFile) -> Report {
    run_problem(action, problem, Report::new(action))
}

fn run_problem(action: Action, problem: &ProblemFile, mut report: Report) -> Report {
    let s = problem.scheme();
    let names = &problem.vars;
    report.scheme = Some(echo(problem, &s, action));
    let u = problem.vector_field();
    let outcome = match action {
        Action::Normalize(Method::Direct) => normalize_plain(&u, &s, false, names, &mut report),
        Action::Normalize(Method::Ev) => normalize_plain(&u, &s, true, names, &mut report),
        Action::Normalize(Method::Renorm) => normalize_renorm(&u, &s, names, &mut report),
        Action::Correct => correct(&u, &s, names, &mut report),
        Action::Linearize => linearize_cmd(&u, &s, names, &mut report),
        Action::Birkhoff => birkhoff_cmd(&u, &s, names, &mut report),
        Action::Check => check_all(&u, &s, &mut report),
    };
    if let Err(e) = outcome {
        report.fail(&e, names);
    } else if report.checks.iter().any(|c| !c.pass) {
        report.exit = EXIT_INVARIANT;
    }
    report
}

type Step = std::result::Result<(), Error>;

fn normalize_plain(u: &VectorField, s: &Scheme, ev: bool, names: &[String], r: &mut Report) -> Step {
    let cert = if ev {
        r.checks.extend(validate_scheme(s));
        normal_form_ecalle_vallet(u, s)?
    } else {
        normal_form_direct(u, s)?
    };
    r.normal_form = Some(cert.v.render(names));
    r.conjugator = Some(Conjugator {
        components: components(&cert.phi, names),
    });
    r.checks.push(certificate_check("conjugacy", &cert));
    Ok(())
}

fn normalize_renorm(u: &VectorField, s: &Scheme, names: &[String], r: &mut Report) -> Step {
    r.checks.extend(validate_scheme(s));
    let out = renormalized_normal_form(u, s)?;
    let local = check_locality(&out.regularized, s)?;
    r.normal_form = Some(out.certificate.v.render(names));
    r.conjugator = Some(Conjugator {
        components: components(&out.certificate.phi, names),
    });
    r.birkhoff = Some(BirkhoffBlock {
        minus: components(&out.pair.minus, names),
        plus: components(&out.pair.plus, names),
        beta: out.counterterm.beta.render(names),
        residue: out.counterterm.residue.render(names),
        local: local.local,
    });
    r.checks.push(certificate_check("conjugacy", &out.certificate));
    r.checks.push(Check::new(
        "beta e-free and in ker d",
        true,
        "delta(residue) = beta",
    ));
    r.checks.push(locality_check(&local.offending, names));
    Ok(())
}

fn locality_check(offending: &[(Monomial, usize)], names: &[String]) -> Check {
    Check::new(
        "locality",
        offending.is_empty(),
        if offending.is_empty() {
            "counterterm independent of tau".to_string()
        } else {
            offending
                .iter()
                .map(|(m, i)| format!("{} in component {}", m.render(names), names[*i]))
                .collect::<Vec<_>>()
                .join(", ")
        },
    )
}

fn correct(u: &VectorField, s: &Scheme, names: &[String], r: &mut Report) -> Step {
    let c = correction(u, s)?;
    r.correction = Some(c.u_c.render(names));
    r.conjugator = Some(Conjugator {
        components: components(&c.phi, names),
    });
    r.checks.push(certificate_check("u - u_c conjugate to 0", &c.certificate(u)));
    let in_kernel = image_part(&c.u_c, s).is_zero();
    r.checks.push(Check::new("correction in ker d", in_kernel, ""));
    Ok(())
}

fn linearize_cmd(u: &VectorField, s: &Scheme, names: &[String], r: &mut Report) -> Step {
    let cert = linearize(u, s)?;
    r.normal_form = Some(Vec::new());
    r.conjugator = Some(Conjugator {
        components: components(&cert.phi, names),
    });
    r.checks.push(certificate_check("conjugacy", &cert));
    Ok(())
}

fn birkhoff_cmd(u: &VectorField, s: &Scheme, names: &[String], r: &mut Report) -> Step {
    r.checks.extend(validate_scheme(s));
    crate::regularize::ensure_valid(s)?;
    let phi = exp_d_solve(u, s, true)?;
    let pair = birkhoff_decompose(&phi)?;
    let ct = beta_and_residue(&pair, s)?;
    let local = check_locality(&phi, s)?;
    r.checks.push(Check::new(
        "factorization reproduces input",
        pair.recompose().agrees_with(&phi),
        "",
    ));
    r.checks.push(locality_check(&local.offending, names));
    r.birkhoff = Some(BirkhoffBlock {
        minus: components(&pair.minus, names),
        plus: components(&pair.plus, names),
        beta: ct.beta.render(names),
        residue: ct.residue.render(names),
        local: local.local,
    });
    Ok(())
}

fn outcome_check(name: &str, f: impl FnOnce() -> std::result::Result<bool, Error>) -> Check {
    match f() {
        Ok(true) => Check::new(name, true, ""),
        Ok(false) => Check::new(name, false, "identity fails"),
        Err(e) => Check::new(name, false, e.to_string()),
    }
}

fn check_all(u: &VectorField, s: &Scheme, r: &mut Report) -> Step {
    r.checks.extend(validate_scheme(s));
    let valid = r.checks.iter().all(|c| c.pass);
    let alpha_round = Diffeo::exp_field(u).log() == *u;
    r.checks.push(Check::new("log(exp(u)) = u", alpha_round, ""));
    r.checks.push(outcome_check("direct normal form", || {
        let c = normal_form_direct(u, s)?;
        Ok(check_conjugacy(&c).pass)
    }));
    let corr = correction(u, s);
    r.checks.push(outcome_check("correction", || {
        let c = corr.clone()?;
        Ok(check_conjugacy(&c.certificate(u)).pass && image_part(&c.u_c, s).is_zero())
    }));
    r.checks.push(outcome_check("N(u - u_c) = 0", || {
        let c = corr.clone()?;
        Ok(normal_form_direct(&u.sub(&c.u_c), s)?.v.is_zero())
    }));
    if valid {
        r.checks.push(outcome_check("I_e two-sided inverse", || {
            let dd = s.regularized();
            let w = i_eps(u, s)?;
            Ok(dd.apply(&w).agrees_with(u) && i_eps(&dd.apply(u), s)?.agrees_with(u))
        }));
        r.checks.push(outcome_check("Ecalle-Vallet normal form", || {
            let c = normal_form_ecalle_vallet(u, s)?;
            Ok(check_conjugacy(&c).pass)
        }));
        r.checks.push(outcome_check("renormalized normal form", || {
            let out = renormalized_normal_form(u, s)?;
            let local = check_locality(&out.regularized, s)?;
            Ok(out.pair.recompose().agrees_with(&out.regularized) && local.local)
        }));
        r.checks.push(outcome_check("additive correction", || {
            Ok(correction_additive(u, s)? == corr.clone()?.u_c)
        }));
        r.checks.push(outcome_check("Dynkin round trip", || {
            let y = Derivation::plain(Diagonal::Grading);
            Ok(log_d_magnus(&crate::normalforms::dynkin_exp(u), &y) == *u)
        }));
    }
    Ok(())
}
