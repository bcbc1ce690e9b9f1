use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use l2mult_core::character_table::character_table;
use l2mult_core::finite_group::parse_group_spec;
use l2mult_core::group_ring::GroupRingMatrix;
use l2mult_core::quotient::QuotientMap;
use l2mult_core::runner::{
    emit, farber_diagnostic, rel_farber_diagnostic, run, seed_from_env, Experiment, ExperimentConfig, OutputFormat,
};
use l2mult_core::spectral::{fk_det, luck_bound_check, moments_check, rank_nullity, spectral_measure, FiniteRep};
use l2mult_core::words::BuiltinGroup;
use l2mult_core::Error;

#[derive(Parser)]
#[command(name = "l2mult", version, about = "L2-multiplicities along finite quotient chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Character table of a finite group, e.g. `dihedral:8`
    Table { group: String },
    /// Spectral measure of A A* (or A when self-adjoint) in the regular
    /// representation of a finite group; letters a, b, ... are its generators
    Spectral {
        a: String,
        quotient: String,
        #[arg(long, default_value_t = 6)]
        kmax: u32,
    },
    /// Farber and relative Farber diagnostics of a configured chain
    Farber { config: PathBuf },
    /// Runs an experiment
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        parallel: Option<usize>,
    },
}

fn print_json(v: &serde_json::Value) {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).unwrap());
}

fn load(config: &Path) -> Result<Experiment, Error> {
    let cfg = ExperimentConfig::from_file(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    Experiment::resolve(cfg, base)
}

fn table(spec: &str) -> Result<(), Error> {
    let g = Arc::new(parse_group_spec(spec)?);
    let t = character_table(&g)?;
    print_json(&t.to_json());
    Ok(())
}

fn spectral(a: &str, quotient: &str, kmax: u32) -> Result<(), Error> {
    let q = Arc::new(parse_group_spec(quotient)?);
    let free = BuiltinGroup::free(q.generators().len());
    let map = QuotientMap::new(free.clone(), q.clone(), q.generators().to_vec())?;
    let a = map.push_matrix(&GroupRingMatrix::parse(&free, a)?);
    let adj = a.adjoint();
    let self_adjoint =
        a.rows() == a.cols() && (0..a.rows()).all(|i| (0..a.cols()).all(|j| a.get(i, j) == adj.get(i, j)));
    let op = if self_adjoint { a.clone() } else { a.mul(&adj) };
    let rho = FiniteRep::regular(&q);
    let mu = spectral_measure(&op, &rho)?;
    let rn = rank_nullity(&a, &rho);
    let moments = moments_check(&op, &rho, kmax)?;
    let luck = if op.is_integral() { Some(luck_bound_check(&op, &rho, 1)?) } else { None };
    let out = json!({
        "operator": if self_adjoint { "A" } else { "A A*" },
        "measure": mu,
        "fk_det": fk_det(&mu),
        "rank": rn.rank.to_string(),
        "nullity": rn.nullity.to_string(),
        "moments": moments,
        "luck": luck,
    });
    print_json(&out);
    Ok(())
}

fn farber(config: &Path) -> Result<(), Error> {
    let exp = load(config)?;
    let rows = farber_diagnostic(&exp.chain, &exp.probes);
    let rel = rel_farber_diagnostic(&exp.chain, &exp.h, &exp.probes, exp.config.limits.infinite_centralizers);
    let out = json!({
        "farber": rows,
        "rel_farber": rel.as_ref().ok(),
        "rel_farber_error": rel.as_ref().err().map(|e| e.to_string()),
    });
    print_json(&out);
    Ok(())
}

fn run_cmd(
    config: &Path,
    out: Option<PathBuf>,
    format: Option<Format>,
    levels: Option<usize>,
    parallel: Option<usize>,
) -> Result<bool, Error> {
    let mut exp = load(config)?;
    eprintln!("seed {}", seed_from_env());
    if let Some(n) = levels {
        exp.truncate(n);
    }
    let report = run(&exp, parallel)?;
    let format = match format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        Some(Format::Both) => OutputFormat::Both,
        None => exp.config.output.format.unwrap_or_default(),
    };
    let dir = out.or_else(|| exp.config.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    for path in emit(&report, &dir, format)? {
        eprintln!("wrote {}", path.display());
    }
    for f in &report.failures {
        eprintln!("level {} failed: {}", f.level, f.reason);
    }
    Ok(!report.has_failures())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Table { group } => table(&group).map(|_| true),
        Command::Spectral { a, quotient, kmax } => spectral(&a, &quotient, kmax).map(|_| true),
        Command::Farber { config } => farber(&config).map(|_| true),
        Command::Run { config, out, format, levels, parallel } => run_cmd(&config, out, format, levels, parallel),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
