//! `mum`: build, verify and use mutually unbiased measurements from the shell.
//!
//! Reports go to standard output; documents are written only to `--out`
//! style paths. Exit status: 0 success, 1 verification failure, 2 usage or
//! input error, 3 numerical validation error.

mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

use args::{KappaRange, StateSpec};
use mum_core::basis::validate_operator_basis;
use mum_core::document::{
    counts_to_csv, grid_from_json, grid_to_json, mum_from_json, mum_from_json_unverified,
    mum_to_json, operator_to_json, read_text, scan_to_csv, write_text,
};
use mum_core::mum::{
    build_mum_from_f, f_spectra, gm_analytic_oracle, kappa_of_t, t_of_kappa, t_range,
    MumVerificationReport,
};
use mum_core::operator::validate_density;
use mum_core::tomography::{
    born_probabilities, build_square_povm, reconstruct_state, sample_counts, sample_outcomes,
};
use mum_core::uncertainty::{kappa_scan, uncertainty_report, EntropyConfig, SCAN_RANK_RULE};
use mum_core::{
    arrange_grid, build_f_operators, gellmann_basis, verify_mum, GridMapping, MumError, MumSet,
    OperatorGrid,
};

#[derive(Parser)]
#[command(
    name = "mum",
    version,
    about = "Mutually unbiased measurements toolkit"
)]
struct Cli {
    /// Worker threads for parallel loops (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mapping {
    /// Gell-Mann families assigned to cells by label.
    Gellmann,
    /// Gell-Mann basis in its canonical order, filled row by row.
    RowMajor,
}

impl Mapping {
    fn grid_mapping(self) -> GridMapping {
        match self {
            Mapping::Gellmann => GridMapping::GellMann,
            Mapping::RowMajor => GridMapping::RowMajor,
        }
    }
}

#[derive(clap::Args)]
struct GridSource {
    /// Dimension of the Hilbert space.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=64))]
    dim: Option<u32>,
    /// Operator grid document to start from instead of the Gell-Mann grid.
    #[arg(long, conflicts_with_all = ["dim", "mapping"])]
    grid: Option<PathBuf>,
    /// Arrangement of the Gell-Mann basis on the grid.
    #[arg(long, value_enum)]
    mapping: Option<Mapping>,
}

impl GridSource {
    fn load(&self) -> Result<OperatorGrid, Failure> {
        match (&self.grid, self.dim) {
            (Some(path), _) => Ok(grid_from_json(&read_text(path)?)?),
            (None, Some(d)) => {
                let d = d as usize;
                let mapping = self.mapping.unwrap_or(Mapping::Gellmann).grid_mapping();
                Ok(arrange_grid(&gellmann_basis(d)?, d, &mapping)?)
            }
            (None, None) => Err(Failure::Usage("one of --dim or --grid is required".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the generalized Gell-Mann operator grid.
    Gm {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=64))]
        dim: u32,
        #[arg(long, value_enum, default_value = "gellmann")]
        mapping: Mapping,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a measurement set and verify it.
    #[command(group(ArgGroup::new("scale").required(true).args(["t", "kappa", "optimal"])))]
    Build {
        #[command(flatten)]
        source: GridSource,
        /// Scale parameter t.
        #[arg(long, allow_negative_numbers = true)]
        t: Option<f64>,
        /// Target kappa; mapped to the positive t.
        #[arg(long)]
        kappa: Option<f64>,
        /// Largest-magnitude admissible t.
        #[arg(long)]
        optimal: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Measurement set document.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Verification report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check every pairwise trace condition of a measurement set document.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare the Gell-Mann closed forms with the numerical optimum.
    Oracle {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=64))]
        dim: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Simulate measurement statistics and reconstruct the state.
    Tomo {
        #[arg(long = "in")]
        input: PathBuf,
        /// `mixed`, `random:RANK:SEED` or a density-matrix document.
        #[arg(long, value_parser = StateSpec::parse)]
        state: StateSpec,
        /// Sample this many shots per setting instead of using exact probabilities.
        #[arg(long, requires = "seed", value_parser = clap::value_parser!(u64).range(1..))]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the single d²-outcome measurement.
        #[arg(long)]
        square: bool,
        /// Reconstructed operator document.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sampled counts as CSV.
        #[arg(long, requires = "shots", conflicts_with = "square")]
        counts: Option<PathBuf>,
    },
    /// Entropic uncertainty figures along a range of kappa.
    Scan {
        #[command(flatten)]
        source: GridSource,
        /// `A:B:STEPS`: STEPS values evenly spaced in (A, B]. A may be `min` (1/d), B may be `opt`.
        #[arg(long, value_parser = KappaRange::parse, default_value = "min:opt:10")]
        kappas: KappaRange,
        /// Random states per kappa.
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        states: u64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: u64,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        iterations: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        /// Scan CSV; metadata goes to `<out>.meta.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Average entropy of a state against the entropic bound.
    Entropy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = StateSpec::parse)]
        state: StateSpec,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        /// Also estimate each setting's intrinsic uncertainty and the unbiasedness measure.
        #[arg(long, requires = "seed")]
        deltas: bool,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: u64,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        iterations: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum Failure {
    Verification,
    Usage(String),
    Numerical(MumError),
}

impl From<MumError> for Failure {
    fn from(e: MumError) -> Self {
        match e {
            MumError::Document(msg) => Failure::Usage(msg),
            e => Failure::Numerical(e),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Gm { dim, mapping, out } => gm(dim as usize, mapping, out.as_deref()),
        Command::Build {
            source,
            t,
            kappa,
            optimal,
            tol,
            out,
            report,
        } => build(
            &source,
            t,
            kappa,
            optimal,
            tol,
            out.as_deref(),
            report.as_deref(),
        ),
        Command::Verify { input, tol, report } => verify(&input, tol, report.as_deref()),
        Command::Oracle { dim, tol } => oracle(dim as usize, tol),
        Command::Tomo {
            input,
            state,
            shots,
            seed,
            square,
            out,
            counts,
        } => tomo(
            &input,
            &state,
            shots,
            seed,
            square,
            out.as_deref(),
            counts.as_deref(),
        ),
        Command::Scan {
            source,
            kappas,
            states,
            restarts,
            iterations,
            seed,
            base,
            out,
        } => {
            let cfg = EntropyConfig {
                base,
                restarts: restarts as usize,
                iterations: iterations as usize,
                samples: states as usize,
                seed,
            };
            scan(&source, &kappas, &cfg, &out)
        }
        Command::Entropy {
            input,
            state,
            base,
            deltas,
            restarts,
            iterations,
            seed,
        } => {
            let cfg = EntropyConfig {
                base,
                restarts: restarts as usize,
                iterations: iterations as usize,
                seed: seed.unwrap_or(0),
                ..EntropyConfig::default()
            };
            entropy(&input, &state, &cfg, deltas)
        }
    }
}

fn gm(dim: usize, mapping: Mapping, out: Option<&Path>) -> Outcome {
    let basis = gellmann_basis(dim)?;
    let report = validate_operator_basis(&basis, 1e-10);
    let grid = arrange_grid(&basis, dim, &mapping.grid_mapping())?;
    println!("Gell-Mann grid, d = {dim}, mapping {}", grid.mapping());
    println!("{report}");
    if let Some(path) = out {
        write_text(path, &grid_to_json(&grid))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn report_json(m: &MumSet, r: &MumVerificationReport) -> String {
    let clauses: Vec<_> = r
        .clauses()
        .iter()
        .map(|(name, c)| {
            let ((b, n), (bp, np)) = c.at;
            json!({
                "clause": name,
                "residual": c.residual,
                "passed": c.residual < r.tol,
                "at": [{"b": b + 1, "n": n + 1}, {"b": bp + 1, "n": np + 1}],
            })
        })
        .collect();
    let doc = json!({
        "d": r.dim,
        "t": m.t(),
        "kappa": r.kappa,
        "mapping": m.mapping(),
        "tol": r.tol,
        "max_residual": r.max_residual(),
        "passed": r.passed,
        "clauses": clauses,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn finish_verification(m: &MumSet, tol: f64, report: Option<&Path>) -> Outcome {
    let r = verify_mum(m, tol);
    println!("{r}");
    if let Some(path) = report {
        write_text(path, &report_json(m, &r))?;
    }
    if r.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn build(
    source: &GridSource,
    t: Option<f64>,
    kappa: Option<f64>,
    optimal: bool,
    tol: f64,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Outcome {
    let grid = source.load()?;
    let d = grid.dim();
    let f = build_f_operators(&grid)?;
    let range = t_range(&f)?;
    let t = match (t, kappa, optimal) {
        (Some(t), _, _) => t,
        (_, Some(k), _) => t_of_kappa(d, k)?,
        _ => range.t_opt(),
    };
    let m = build_mum_from_f(&f, t)?;
    println!(
        "d = {d}, mapping {}, t = {:.17e}, kappa = {:.17e}",
        grid.mapping(),
        m.t(),
        m.kappa()
    );
    println!(
        "admissible t in [{:.17e}, {:.17e}], kappa max {:.17e}",
        range.t_lo,
        range.t_hi,
        kappa_of_t(d, range.t_opt())
    );
    let (lmin, (b, n)) = m.min_eigenvalue()?;
    println!("min eigenvalue {lmin:.3e} at P(b={}, n={})", b + 1, n + 1);
    if let Some(path) = out {
        write_text(path, &mum_to_json(&m))?;
        println!("wrote {}", path.display());
    }
    finish_verification(&m, tol, report)
}

fn verify(input: &Path, tol: f64, report: Option<&Path>) -> Outcome {
    let m = mum_from_json_unverified(&read_text(input)?)?;
    finish_verification(&m, tol, report)
}

fn oracle(dim: usize, tol: f64) -> Outcome {
    let closed = gm_analytic_oracle(dim)?;
    let grid = arrange_grid(&gellmann_basis(dim)?, dim, &GridMapping::GellMann)?;
    let f = build_f_operators(&grid)?;
    let t_num = t_range(&f)?.t_opt();
    let kappa_num = kappa_of_t(dim, t_num);
    let lam_num = f_spectra(&f)?
        .iter()
        .filter(|(b, _, _)| *b < dim)
        .flat_map(|(_, _, ev)| ev.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    println!("d = {dim}, Gell-Mann grid");
    println!(
        "{:<26} {:>24} {:>24} {:>12}",
        "quantity", "closed form", "numeric", "difference"
    );
    let mut worst: f64 = 0.0;
    for (name, a, b) in [
        (
            "|eigenvalue| of F, b <= d",
            closed.eigenvalue_magnitude,
            lam_num,
        ),
        ("t_opt", closed.t_opt, t_num),
        ("kappa_opt", closed.kappa_opt, kappa_num),
    ] {
        let diff = (a - b).abs();
        worst = worst.max(diff);
        println!("{name:<26} {a:>24.17e} {b:>24.17e} {diff:>12.3e}");
    }
    println!("kappa_opt = {kappa_num:.15}");
    if worst < tol {
        println!("agreement within {tol:e}: yes");
        Ok(())
    } else {
        println!("agreement within {tol:e}: NO");
        Err(Failure::Verification)
    }
}

fn tomo(
    input: &Path,
    state: &StateSpec,
    shots: Option<u64>,
    seed: Option<u64>,
    square: bool,
    out: Option<&Path>,
    counts_out: Option<&Path>,
) -> Outcome {
    let m = mum_from_json(&read_text(input)?)?;
    let rho = state.load(m.dim())?;
    let seed = seed.unwrap_or(0);
    let estimate = if square {
        let povm = build_square_povm(&m)?;
        let q = povm.probabilities(&rho)?;
        let q = match shots {
            Some(n) => sample_outcomes(&q, n, seed)?
                .into_iter()
                .map(|c| c as f64 / n as f64)
                .collect(),
            None => q,
        };
        povm.reconstruct(&q)?
    } else {
        let p = born_probabilities(&m, &rho)?;
        let p = match shots {
            Some(n) => {
                let counts = sample_counts(&p, n, seed)?;
                if let Some(path) = counts_out {
                    write_text(path, &counts_to_csv(&counts))?;
                }
                counts.frequencies()?
            }
            None => p,
        };
        reconstruct_state(&m, &p)?
    };
    let err = estimate.sub(rho.operator());
    println!(
        "route: {}, d = {}, kappa = {:.15}",
        if square {
            "d^2-outcome measurement"
        } else {
            "d+1 measurements"
        },
        m.dim(),
        m.kappa()
    );
    match shots {
        Some(n) => println!(
            "statistics: {n} shots{}, seed {seed}",
            if square { "" } else { " per setting" }
        ),
        None => println!("statistics: exact probabilities"),
    }
    println!("max-abs error      {:.6e}", err.matrix().max_abs());
    println!("Frobenius error    {:.6e}", err.matrix().frobenius_norm());
    let report = validate_density(&estimate);
    println!(
        "estimate is a density matrix: {}",
        if report.passed() { "yes" } else { "no" }
    );
    if let Some(path) = out {
        write_text(path, &operator_to_json(&estimate))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn scan(source: &GridSource, kappas: &KappaRange, cfg: &EntropyConfig, out: &Path) -> Outcome {
    let grid = source.load()?;
    let d = grid.dim();
    let range = t_range(&build_f_operators(&grid)?)?;
    let values = kappas.values(d, kappa_of_t(d, range.t_hi));
    let rows = kappa_scan(&grid, &values, cfg)?;
    let csv = scan_to_csv(&rows);
    print!("{csv}");
    write_text(out, &csv)?;
    let meta = json!({
        "d": d,
        "mapping": grid.mapping(),
        "kappa_count": rows.len(),
        "states_per_kappa": cfg.samples,
        "rank_rule": SCAN_RANK_RULE,
        "state_construction": "rank 1: Haar-random vector; rank k > 1: G G^H / Tr(G G^H), G a d x k complex Gaussian matrix",
        "shared_states_across_kappa": true,
        "minimizer": {
            "restarts": cfg.restarts,
            "iterations": cfg.iterations,
            "value": "upper bound on the minimum entropy",
        },
        "log_base": cfg.base,
        "seed": cfg.seed,
    });
    let meta_path = PathBuf::from(format!("{}.meta.json", out.display()));
    let mut text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    text.push('\n');
    write_text(&meta_path, &text)?;
    println!("wrote {} and {}", out.display(), meta_path.display());
    Ok(())
}

fn entropy(input: &Path, state: &StateSpec, cfg: &EntropyConfig, deltas: bool) -> Outcome {
    let m = mum_from_json(&read_text(input)?)?;
    let rho = state.load(m.dim())?;
    let r = uncertainty_report(&m, &rho, cfg, deltas)?;
    if deltas {
        println!("{r}");
    } else {
        println!(
            "d = {}, t = {:.12}, kappa = {:.12}, log base {}",
            r.dim, r.t, r.kappa, r.base
        );
        println!("average entropy      {:.12}", r.average_entropy);
        println!("entropic bound       {:.12}", r.bound);
        println!("margin               {:.6e}", r.average_entropy - r.bound);
    }
    Ok(())
}
