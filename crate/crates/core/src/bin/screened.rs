use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use screened::bounds::worked_example_report;
use screened::harness::config::{ExperimentConfig, OutputKind};
use screened::harness::output::{self, num, object};
use screened::harness::{self, rates_csv, rates_table};
use screened::par::Pool;
use screened::rates;
use screened::screen::run_trajectory;
use screened::{Error, RandomStream, Result};

#[derive(Parser)]
#[command(name = "screened", version, about = "Screened Monte Carlo: bounds, rates and validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trial count; overrides the configuration.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Directory for outputs; relative output paths resolve against it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write screened trajectories as CSV.
    Simulate,
    /// Explicit bounds for the configured screen.
    Bound,
    /// Rate-function table, including the covariance gap.
    Rates,
    /// Entropy-duality suite on random finite-support instances.
    Sanov,
    /// Monte Carlo frequencies checked against every applicable bound.
    Validate,
    /// Reproduce the worked example's five bound values.
    Prop11,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Bound => "bound",
            Command::Rates => "rates",
            Command::Sanov => "sanov",
            Command::Validate => "validate",
            Command::Prop11 => "prop11",
        }
    }
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let path = self.config.as_deref().ok_or_else(|| Error::Config("--config is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.out {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Writes `text` to every configured output of `kind`, else to
    /// `--out/<fallback>`, else to stdout.
    fn emit(&self, cfg: Option<&ExperimentConfig>, kind: OutputKind, fallback: &str, text: &str) -> Result<()> {
        let targets: Vec<PathBuf> = cfg.map_or(Vec::new(), |c| c.output(kind).map(|p| self.resolve(p)).collect());
        if !targets.is_empty() {
            return targets.iter().try_for_each(|p| output::write_text(text, p));
        }
        match &self.out {
            Some(dir) => output::write_text(text, &dir.join(fallback)),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// (ε, n, quoted bound): the variance-only constant serves ε = 0.2 and the
/// covariance constant ε = 0.1.
const GOLDEN: [(f64, u64, f64); 5] = [
    (0.2, 5000, 0.368),
    (0.2, 10_000, 0.136),
    (0.2, 15_000, 0.0498),
    (0.1, 5000, 0.1596),
    (0.1, 10_000, 0.025),
];
const GOLDEN_TOL: f64 = 1e-3;

fn prop11(common: &Common) -> Result<bool> {
    let mut rows = Vec::new();
    let mut ok = true;
    for (eps, n, quoted) in GOLDEN {
        let r = worked_example_report(eps, eps / 20.0, n)?;
        let (variant, part) =
            if eps > 0.15 { ("variance_only", &r.variance_only) } else { ("with_covariance", &r.with_covariance) };
        let within = (part.bound - quoted).abs() <= GOLDEN_TOL;
        ok &= within;
        eprintln!("eps={eps} n={n} {variant}: {:.4} (quoted {quoted}) {}", part.bound, if within { "ok" } else { "MISMATCH" });
        rows.push(object([
            ("epsilon", num(eps)),
            ("n", Value::from(n)),
            ("variant", Value::from(variant)),
            ("bound", num(part.bound)),
            ("quoted", num(quoted)),
            ("within_tolerance", Value::from(within)),
            ("report", harness::example_report_json(&r)),
        ]));
    }
    let doc = object([("rows", Value::Array(rows)), ("passed", Value::from(ok))]);
    let cfg = common.config.as_ref().map(|_| common.load()).transpose()?;
    common.emit(cfg.as_ref(), OutputKind::Report, "prop11.json", &output::report_text(&doc))?;
    Ok(ok)
}

fn simulate(common: &Common) -> Result<bool> {
    let cfg = common.load()?;
    let screen = cfg.screen_config();
    let count = common.trials.unwrap_or(1);
    let targets: Vec<PathBuf> = cfg.output(OutputKind::TrajectoryCsv).map(|p| common.resolve(p)).collect();
    for i in 0..count {
        let recs = run_trajectory(&cfg.model, &cfg.pair(), &screen, &mut RandomStream::substream(cfg.seed, i))?;
        let text = output::trajectory_csv(&recs);
        let suffixed = |p: &Path| {
            if count == 1 {
                return p.to_path_buf();
            }
            let stem = p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            p.with_file_name(format!("{stem}-{i}.csv"))
        };
        if !targets.is_empty() {
            for t in &targets {
                output::write_text(&text, &suffixed(t))?;
            }
        } else if let Some(dir) = &common.out {
            output::write_text(&text, &suffixed(&dir.join("trajectory.csv")))?;
        } else {
            print!("{text}");
        }
    }
    Ok(true)
}

fn bound(common: &Common) -> Result<bool> {
    let cfg = common.load()?;
    let s = cfg.screen_config();
    let entries: Vec<Value> = harness::applicable_bounds(&cfg)
        .into_iter()
        .map(|(name, r)| match r {
            Ok(b) => object([
                ("name", Value::from(name)),
                ("bound", harness::bound_report_json(&b)),
                ("value", num(b.bound_at(s.n as u64))),
            ]),
            Err(why) => object([("name", Value::from(name)), ("skipped", Value::from(why))]),
        })
        .collect();
    let mut doc = vec![("screen", harness::screen_json(&s)), ("bounds", Value::Array(entries))];
    if let Ok(r) = worked_example_report(s.epsilon, s.u, s.n as u64) {
        if cfg.pair() == screened::ObservablePair::heavy_tail_example() {
            doc.push(("worked_example", harness::example_report_json(&r)));
        }
    }
    common.emit(Some(&cfg), OutputKind::Report, "bound.json", &output::report_text(&object(doc)))?;
    Ok(true)
}

fn rates_cmd(common: &Common) -> Result<bool> {
    let cfg = common.load()?;
    let s = cfg.screen_config();
    let pair = cfg.pair();
    let rows = rates_table(&cfg.model, &pair, s.epsilon, s.u)?;
    let point = match rates::delta_exponent(&cfg.model, &pair, s.epsilon, s.u) {
        Ok(p) => harness::rate_point_json(&p),
        Err(Error::Capability(why)) => object([("skipped", Value::from(why))]),
        Err(e) => return Err(e),
    };
    let doc = object([
        ("screen", harness::screen_json(&s)),
        ("rate_point", point),
        (
            "table",
            Value::Array(
                rows.iter()
                    .map(|r| {
                        object([
                            ("epsilon", num(r.epsilon)),
                            ("u", num(r.u)),
                            ("lambda_star", output::opt_num(r.lambda_star)),
                            ("lambda_plus_star", output::opt_num(r.variants[0])),
                            ("gamma_plus_star", output::opt_num(r.variants[1])),
                            ("lambda_minus_star", output::opt_num(r.variants[2])),
                            ("gamma_minus_star", output::opt_num(r.variants[3])),
                            ("delta", output::opt_num(r.delta)),
                        ])
                    })
                    .collect(),
            ),
        ),
    ]);
    common.emit(Some(&cfg), OutputKind::RatesTable, "rates.csv", &rates_csv(&rows))?;
    if cfg.output(OutputKind::Report).next().is_some() || common.out.is_some() {
        common.emit(Some(&cfg), OutputKind::Report, "rates.json", &output::report_text(&doc))?;
    }
    Ok(true)
}

fn sanov(common: &Common, pool: &Pool) -> Result<bool> {
    let cfg = common.config.as_ref().map(|_| common.load()).transpose()?;
    let seed = common.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let count = common.trials.unwrap_or(50) as usize;
    let suite = harness::run_duality_suite(seed, count, pool)?;
    eprintln!(
        "{} instances: max gap {:.3e}, primal/dual {:.3e}",
        suite.rows.len(),
        suite.max_gap,
        suite.max_primal_dual
    );
    let doc = object([("seed", Value::from(seed)), ("suite", suite.to_json())]);
    common.emit(cfg.as_ref(), OutputKind::Report, "sanov.json", &output::report_text(&doc))?;
    Ok(suite.passed())
}

fn validate(common: &Common, pool: &Pool) -> Result<bool> {
    let cfg = common.load()?;
    let start = Instant::now();
    let report = harness::run_validation(&cfg, pool)?;
    eprintln!(
        "{} trials on {} workers in {:.2?}: screened {} / unscreened {}",
        cfg.trials,
        pool.workers(),
        start.elapsed(),
        report.screened.count,
        report.unscreened.count
    );
    for c in &report.checks {
        match c.value {
            Some(v) => eprintln!("  {:<28} {:<7} bound {v:.6}", c.name, format!("{:?}", c.status).to_lowercase()),
            None => eprintln!("  {:<28} skipped ({})", c.name, c.note.as_deref().unwrap_or("")),
        }
    }
    common.emit(Some(&cfg), OutputKind::Report, "validate.json", &output::report_text(&report.to_json()))?;
    Ok(report.passed())
}

fn run(cli: &Cli) -> Result<bool> {
    let c = &cli.common;
    match cli.command {
        Command::Prop11 => prop11(c),
        Command::Simulate => simulate(c),
        Command::Bound => bound(c),
        Command::Rates => rates_cmd(c),
        Command::Sanov => sanov(c, &Pool::new(c.jobs)?),
        Command::Validate => validate(c, &Pool::new(c.jobs)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: soundness check failed", cli.command.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            ExitCode::from(2)
        }
    }
}
