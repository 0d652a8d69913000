use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pkcap::aux::{max_aux_info_thm3, Thm3Options, DEFAULT_FEAS_TOL, DEFAULT_RESTARTS, DEFAULT_SEED};
use pkcap::dist::DEFAULT_SUM_TOL;
use pkcap::io::{
    parse_distribution, parse_protocol, write_atomic, Body, CheckReport, ConfigEcho, Conditions, ReportDoc,
    SimulateReport, REPORT_SCHEMA, TOOL_VERSION,
};
use pkcap::protocol::{check_eps_pk, evaluate_protocol, rate_point, EnumOptions, DEFAULT_BUDGET, PROTOCOL_SCHEMA};
use pkcap::region::{analyze, outer_region, AnalysisOptions};
use pkcap::stats::{is_deterministically_correlated, DEFAULT_CI_TOL};
use pkcap::{Error, Exec, JointPmf};

/// Private-key capacity region bounds for three-terminal sources.
///
/// Every flag can also be set through an environment variable with the
/// PKCAP_ prefix (e.g. PKCAP_SEED); flags take precedence.
#[derive(Parser)]
#[command(name = "pkcap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute all information quantities and the outer, inner and exact regions.
    Compute(Common),
    /// Report the common-function structure and the tightness conditions.
    Check(Common),
    /// Evaluate a protocol file exactly against the source.
    Simulate(SimulateArgs),
    /// Print tool and schema versions.
    Version,
}

#[derive(Args, Clone)]
struct Common {
    /// Distribution file (JSON).
    #[arg(long, env = "PKCAP_INPUT")]
    input: PathBuf,
    /// Report destination; stdout when omitted.
    #[arg(long, env = "PKCAP_OUTPUT")]
    output: Option<PathBuf>,
    #[arg(long = "tol-sum", env = "PKCAP_TOL_SUM", default_value_t = DEFAULT_SUM_TOL)]
    tol_sum: f64,
    #[arg(long = "tol-ci", env = "PKCAP_TOL_CI", default_value_t = DEFAULT_CI_TOL)]
    tol_ci: f64,
    #[arg(long = "tol-feas", env = "PKCAP_TOL_FEAS", default_value_t = DEFAULT_FEAS_TOL)]
    tol_feas: f64,
    #[arg(long, env = "PKCAP_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, env = "PKCAP_RESTARTS", default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// Auxiliary alphabet size for the constrained search (default: number of components).
    #[arg(long = "aux-card", env = "PKCAP_AUX_CARD")]
    aux_card: Option<usize>,
    /// Maximum number of joint sequences enumerated by `simulate`.
    #[arg(long, env = "PKCAP_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Protocol file (JSON).
    #[arg(long, env = "PKCAP_PROTOCOL")]
    protocol: PathBuf,
    /// Threshold for the eps-PK verdicts.
    #[arg(long, env = "PKCAP_EPS", default_value_t = 0.01)]
    eps: f64,
}

struct Failure {
    exit: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = if matches!(e, Error::BudgetExceeded { .. }) { 3 } else { 2 };
        Failure {
            exit,
            message: format!("error[{}]: {e}", e.code()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error, exit: u8) -> Failure {
    Failure {
        exit,
        message: format!("error[IO]: {}: {e}", path.display()),
    }
}

impl Common {
    fn validate(&self) -> Result<(), Failure> {
        for (name, v) in [("tol-sum", self.tol_sum), ("tol-ci", self.tol_ci), ("tol-feas", self.tol_feas)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("--{name} must be positive")).into());
            }
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("--restarts must be at least 1".into()).into());
        }
        if self.aux_card == Some(0) {
            return Err(Error::InvalidParameter("--aux-card must be at least 1".into()).into());
        }
        Ok(())
    }

    fn load(&self) -> Result<JointPmf, Failure> {
        self.validate()?;
        let text = std::fs::read_to_string(&self.input).map_err(|e| io_failure(&self.input, e, 2))?;
        Ok(parse_distribution(&text, self.tol_sum)?)
    }

    fn echo(&self, protocol: Option<&Path>, eps: Option<f64>) -> ConfigEcho {
        ConfigEcho {
            input: self.input.display().to_string(),
            protocol: protocol.map(|p| p.display().to_string()),
            sum_tol: self.tol_sum,
            ci_tol: self.tol_ci,
            feas_tol: self.tol_feas,
            seed: self.seed,
            restarts: self.restarts,
            aux_card: self.aux_card,
            budget: self.budget,
            eps,
        }
    }

    fn thm3(&self) -> Thm3Options {
        Thm3Options {
            aux_card: self.aux_card,
            restarts: self.restarts,
            seed: self.seed,
            feas_tol: self.tol_feas,
            exec: Exec::default(),
        }
    }

    fn emit(&self, doc: &ReportDoc) -> Result<(), Failure> {
        let text = doc.to_json();
        match &self.output {
            Some(path) => write_atomic(path, text.as_bytes()).map_err(|e| io_failure(path, e, 1)),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn compute(c: &Common) -> Result<(), Failure> {
    let p = c.load()?;
    let report = analyze(
        &p,
        &AnalysisOptions {
            ci_tol: c.tol_ci,
            thm3: c.thm3(),
        },
    )?;
    c.emit(&ReportDoc::new(c.echo(None, None), Body::Compute((&report).into())))
}

fn check(c: &Common) -> Result<(), Failure> {
    let p = c.load()?;
    let [_, y, z] = p.terminals()?;
    let det = is_deterministically_correlated(&p, y, z, c.tol_ci)?;
    let thm3 = max_aux_info_thm3(&p, &c.thm3())?;
    println!("components: {}", det.common.components);
    println!("det-correlated: {} (residual {:e})", det.holds, det.residual);
    println!("thm3-feasible: {} (residual {:e}, value {})", thm3.converged, thm3.residual, thm3.value);
    println!("best channel: {:?}", thm3.channel.rows());
    if c.output.is_some() {
        let body = Body::Check(CheckReport {
            conditions: Conditions {
                components: det.common.components,
                det_correlated: det.holds,
                det_residual: det.residual,
                thm3_feasible: thm3.converged,
            },
            thm3: (&thm3).into(),
        });
        c.emit(&ReportDoc::new(c.echo(None, None), body))?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let c = &a.common;
    let p = c.load()?;
    if a.eps.is_nan() || a.eps < 0.0 {
        return Err(Error::InvalidParameter("--eps must be non-negative".into()).into());
    }
    let text = std::fs::read_to_string(&a.protocol).map_err(|e| io_failure(&a.protocol, e, 2))?;
    let spec = parse_protocol(&text)?;
    let rep = evaluate_protocol(
        &p,
        &spec,
        &EnumOptions {
            budget: c.budget,
            exec: Exec::default(),
        },
    )?;
    let (eps_pk_xy, eps_pk_xz) = check_eps_pk(&rep, a.eps);
    let outer = outer_region(&p)?;
    let point = rate_point(&rep);
    let inside = outer.contains(point, 1e-9);
    eprintln!(
        "rates ({}, {}), eps-PK at {}: ({eps_pk_xy}, {eps_pk_xz}), inside outer region: {inside}",
        point[0], point[1], a.eps
    );
    let body = Body::Simulate(SimulateReport {
        evaluation: rep,
        eps: a.eps,
        eps_pk_xy,
        eps_pk_xz,
        rate_point: point,
        outer,
        rate_point_in_outer: inside,
    });
    c.emit(&ReportDoc::new(c.echo(Some(&a.protocol), Some(a.eps)), body))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(c) => compute(c),
        Command::Check(c) => check(c),
        Command::Simulate(a) => simulate(a),
        Command::Version => {
            println!("pkcap {TOOL_VERSION}");
            println!("report schema: {REPORT_SCHEMA}");
            println!("protocol schema: {PROTOCOL_SCHEMA}");
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.exit)
        }
    }
}
