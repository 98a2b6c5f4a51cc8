use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scatcub::harness::{
    self, exit, format_csv, format_pointwise, integrate_once, parse_grid, points_text, pointwise,
    rulecheck, run_convergence, ExperimentConfig, MethodFlags,
};
use scatcub::moving::MovingInterpConfig;
use scatcub::testfns::TestFunction;
use scatcub::{Domain, Error, Result};

/// Cubature on scattered data by resampling interpolants at the nodes of
/// positive-interior algebraic rules.
#[derive(Parser, Debug)]
#[command(name = "scatcub", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate once with a single rule and print one CSV record.
    Integrate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Rule degree when it is not fixed by --rule.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Sweep rule degrees and write one CSV record per degree.
    Convergence {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Degree sweep start:step:stop.
        #[arg(long, default_value = "2:2:30")]
        degrees: String,
    },
    /// Check a rule file for positivity, interiority and moment exactness.
    Rulecheck {
        path: PathBuf,
        /// Domain used when the file has no domain line.
        #[arg(long)]
        domain: Option<String>,
    },
    /// Dump the sample points that fall inside a domain.
    Points {
        #[arg(long, default_value = "halton:800")]
        points: String,
        #[arg(long, default_value = "rect:0,1,0,1")]
        domain: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pointwise errors and estimates of moving interpolation.
    Pointwise {
        #[arg(long, default_value = "f1")]
        function: String,
        #[arg(long, default_value = "halton:800")]
        points: String,
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 10)]
        dmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// rect:ax,bx,ay,by | disk:cx,cy,r | diskdiff:cx,cy,r,cx,cy,r
    #[arg(long)]
    domain: Option<String>,
    /// halton:N[:skip] | file:<path>
    #[arg(long, default_value = "halton:800")]
    points: String,
    /// f1 | f2 | f3 | f4 | file:<path> with `x y f` rows
    #[arg(long)]
    function: String,
    /// disc | mq | pum | mshep9 | lscf | exactf
    #[arg(long)]
    method: String,
    /// gauss | gauss:<n> | file:<path>, where {n} in the path is the degree
    #[arg(long, default_value = "gauss")]
    rule: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shepard exponent.
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    /// Extra nearest-neighbor candidates for Shepard subsets.
    #[arg(long)]
    q: Option<usize>,
    /// Local degree for mshep9, working degree for lscf.
    #[arg(long)]
    local_degree: Option<usize>,
    /// Oversampling factor of moving interpolation.
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    /// Largest degree tried by moving interpolation.
    #[arg(long, default_value_t = 10)]
    dmax: usize,
    /// Shape parameters, lo:hi:n log-spaced or a comma list.
    #[arg(long)]
    eps_grid: Option<String>,
    /// PUM radius multipliers as a comma list.
    #[arg(long)]
    delta_grid: Option<String>,
    /// Reference integral; required for sampled-value input.
    #[arg(long)]
    reference: Option<f64>,
    /// Rule file for the reference integral on curved domains.
    #[arg(long)]
    reference_rule: Option<PathBuf>,
    /// Rule file for LS-CF moments on curved domains.
    #[arg(long)]
    moment_rule: Option<PathBuf>,
    /// Fill the wall_time_ms column (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.function.parse()?, self.method.parse()?);
        cfg.domain = self.domain.as_deref().map(str::parse).transpose()?;
        cfg.points = self.points.parse()?;
        cfg.rule = self.rule.parse()?;
        cfg.flags = MethodFlags {
            mu: self.mu,
            q: self.q,
            local_degree: self.local_degree,
            theta: self.theta,
            d_max: self.dmax,
            eps_grid: self.eps_grid.as_deref().map(parse_grid).transpose()?,
            delta_grid: self.delta_grid.as_deref().map(parse_grid).transpose()?,
        };
        cfg.reference = self.reference;
        cfg.reference_rule = self.reference_rule.clone();
        cfg.moment_rule = self.moment_rule.clone();
        cfg.timing = self.timing;
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Integrate { exp, degree } => {
            let rec = integrate_once(&exp.config()?, degree)?;
            emit(&format_csv(&[rec]), exp.out.as_deref())?;
            Ok(exit::OK)
        }
        Command::Convergence { exp, degrees } => {
            let mut cfg = exp.config()?;
            cfg.degrees = degrees.parse()?;
            let records = run_convergence(&cfg)?;
            emit(&format_csv(&records), exp.out.as_deref())?;
            let failed: Vec<_> = records.iter().filter_map(|r| r.error.as_ref()).collect();
            if let Some(first) = failed.first() {
                eprintln!(
                    "{} of {} records failed; first: {first}",
                    failed.len(),
                    records.len()
                );
                return Ok(exit::NUMERICAL);
            }
            Ok(exit::OK)
        }
        Command::Rulecheck { path, domain } => {
            let domain: Option<Domain> = domain.as_deref().map(str::parse).transpose()?;
            let check = rulecheck(&path, domain)?;
            print!("{}", check.report());
            Ok(if check.passed() {
                exit::OK
            } else {
                exit::VALIDATION
            })
        }
        Command::Points {
            points,
            domain,
            out,
        } => {
            let text = points_text(&points.parse()?, &domain.parse()?)?;
            emit(&text, out.as_deref())?;
            Ok(exit::OK)
        }
        Command::Pointwise {
            function,
            points,
            theta,
            dmax,
            out,
        } => {
            let f: TestFunction = function.parse()?;
            let cfg = MovingInterpConfig {
                d_max: dmax,
                theta,
                ..Default::default()
            };
            let rows = pointwise(f, &points.parse()?, cfg)?;
            emit(&format_pointwise(&rows), out.as_deref())?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::OK
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        harness::exit_code(&e)
    });
    ExitCode::from(code as u8)
}
