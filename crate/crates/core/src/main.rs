use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use vpstokes::io::{run, ExitStatus, Overrides, RunConfig, RunError};
use vpstokes::mesh::Diagonal;
use vpstokes::nonlinear::{LineSearch, Method};
use vpstokes::problems::ProblemKind;
use vpstokes::rheology::Law;

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Example1,
    Example2,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Ideal,
    Composite,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Picard,
    Newton,
    Svnewton,
}

#[derive(Clone, Copy, ValueEnum)]
enum LineSearchArg {
    Energy,
    Residual,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagonalArg {
    Right,
    Crossed,
}

/// Viscoplastic Stokes benchmark solver.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    #[arg(long, value_enum)]
    law: Option<LawArg>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long, value_enum)]
    diagonal: Option<DiagonalArg>,
    /// Coarsest-to-finest cell ratio toward the notch or inclusion.
    #[arg(long)]
    grading: Option<f64>,
    /// Velocity polynomial degree (pressure uses one less).
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
    degree: Option<u8>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum)]
    line_search: Option<LineSearchArg>,
    #[arg(long)]
    depth_dependent_yield: bool,
    /// Viscosity floor for the ideal law in Pa s.
    #[arg(long)]
    mu_min: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            problem: self.problem.map(|p| match p {
                ProblemArg::Example1 => ProblemKind::Example1,
                ProblemArg::Example2 => ProblemKind::Example2,
            }),
            law: self.law.map(|l| match l {
                LawArg::Ideal => Law::Ideal,
                LawArg::Composite => Law::Composite,
            }),
            method: self.method.map(|m| match m {
                MethodArg::Picard => Method::Picard,
                MethodArg::Newton => Method::Newton,
                MethodArg::Svnewton => Method::SvNewton,
            }),
            nx: self.nx,
            ny: self.ny,
            diagonal: self.diagonal.map(|d| match d {
                DiagonalArg::Right => Diagonal::Right,
                DiagonalArg::Crossed => Diagonal::Crossed,
            }),
            grading: self.grading,
            degree: self.degree.map(usize::from),
            quad_order: self.quad_order,
            rel_tol: self.rel_tol,
            max_iters: self.max_iters,
            line_search: self.line_search.map(|l| match l {
                LineSearchArg::Energy => LineSearch::EnergyDescent,
                LineSearchArg::Residual => LineSearch::ResidualDescent,
                LineSearchArg::None => LineSearch::None,
            }),
            depth_dependent_yield: self.depth_dependent_yield,
            mu_min: self.mu_min,
            out: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match RunConfig::from_file(cli.config.as_deref(), &cli.overrides()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ExitStatus::ConfigError.code() as u8);
        }
    };
    match run(&config) {
        Ok(summary) => {
            let last = summary.outcome.record.last().copied();
            println!(
                "{} {} on {} elements ({} dofs): {} after {} iterations, rel_residual {:.3e}, {:.1} s",
                config.solver.method,
                config.solver.law,
                summary.num_elements,
                summary.num_dofs,
                summary.outcome.termination,
                summary.outcome.record.iterations(),
                last.map_or(f64::NAN, |r| r.rel_residual),
                summary.elapsed
            );
            ExitCode::from(summary.status().code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let status: ExitStatus = ExitStatus::from_error(&e);
            if let RunError::Solver(_) = e {
                eprintln!("partial convergence log kept in {}", config.output.dir.display());
            }
            ExitCode::from(status.code() as u8)
        }
    }
}
