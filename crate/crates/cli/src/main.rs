use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eigenlimit_core::construction::{median_successive_ratio, ROUNDING_FLOOR};
use eigenlimit_core::{
    build_state, convergence_table, cross_terms, is_ortho_symplectic, random_orbit, transporter, BumpSymbol,
    PhasePoint,
};
use eigenlimit_cli::report::{fmt_f64, write_table};
use eigenlimit_cli::suites::microlocal_sweep;
use eigenlimit_cli::{resolve_family, run_suites, CliError, Config, ConvergenceReport, Metadata, Result, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "eigenlimit", version, about = "Oscillator eigenfunctions with prescribed semiclassical limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Measure description or run configuration (TOML).
    #[arg(long, visible_alias = "config")]
    measure: Option<PathBuf>,
    /// Phase-space half dimension, when no measure file is given.
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated levels, e.g. 8,16,32.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    /// `graded`, `graded:K`, `degree:N`, or a family file.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Threshold override; its meaning depends on the subcommand.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the measure's orbits and validate their transporters.
    Orbit(Common),
    /// Fock coefficients of the eigenfunction for each level.
    BuildState(Common),
    /// Expectations against measure integrals; `--tol` is the final-error threshold.
    Converge(Common),
    /// Cross terms between the first two orbits; `--tol` bounds the final magnitude.
    CrossTerms(Common),
    /// Norms of a Gaussian bump applied to the eigenfunctions; `--tol` bounds the final norm.
    Microlocal {
        #[command(flatten)]
        common: Common,
        /// Comma-separated phase-space center (x then xi).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Vec<f64>,
        #[arg(long, default_value_t = 0.2)]
        width: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Run every property suite; `--tol` replaces every tolerance.
    Suites(Common),
}

fn load_config(c: &Common) -> Result<Config> {
    let mut config = match &c.measure {
        Some(path) => {
            let config = Config::load(path)?;
            if let Some(d) = c.dim.filter(|d| *d != config.dim) {
                return Err(CliError::Argument(format!("--dim {d} conflicts with dim = {} in {}", config.dim, path.display())));
            }
            config
        }
        None => Config::default_for(c.dim.unwrap_or(2), c.seed.unwrap_or(0))?,
    };
    if let Some(seed) = c.seed {
        config.seed = seed;
    }
    if let Some(ns) = &c.n_list {
        if ns.is_empty() {
            return Err(CliError::Argument("--n-list is empty".into()));
        }
        config.n_list = ns.clone();
    }
    if let Some(f) = &c.family {
        config.family = f.clone();
    }
    Ok(config)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn orbit(c: &Common) -> Result<bool> {
    let config = load_config(c)?;
    let mu = config.measure()?;
    let tol = c.tol.unwrap_or(config.tolerances.group);
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, (weight, m)) in mu.components().iter().enumerate() {
        let g = transporter(m.orbit());
        let valid = is_ortho_symplectic(&g.to_matrix(), tol)?;
        let hits = eigenlimit_core::orbit_through(&g.apply(&PhasePoint::basis(config.dim, 0)))? == *m.orbit();
        ok &= valid && hits;
        let gen: Vec<String> = m.orbit().generator().to_vec().iter().map(|x| fmt_f64(*x)).collect();
        rows.push(vec![
            i.to_string(),
            fmt_f64(*weight),
            gen.join(" "),
            fmt_f64(g.deviation()),
            valid.to_string(),
            hits.to_string(),
        ]);
    }
    let header = ["component", "weight", "generator", "transporter_deviation", "ortho_symplectic", "maps_reference_orbit"];
    write_table(&mut output(&c.out)?, &Metadata::for_config(&config, "orbit"), &header, &rows)?;
    Ok(ok)
}

fn build(c: &Common) -> Result<bool> {
    let config = load_config(c)?;
    let mu = config.measure()?;
    let mut meta = Metadata::for_config(&config, "build-state");
    let mut rows = Vec::new();
    for &n in &config.n_list {
        let b = build_state(&mu, n)?;
        meta.push(&format!("raw_norm[n={n}]"), fmt_f64(b.raw_norm));
        for (alpha, z) in b.state.coeffs() {
            let idx: Vec<String> = alpha.entries().iter().map(u32::to_string).collect();
            rows.push(vec![n.to_string(), fmt_f64(b.state.hbar()), idx.join(" "), fmt_f64(z.re), fmt_f64(z.im)]);
        }
    }
    write_table(&mut output(&c.out)?, &meta, &["n", "hbar", "alpha", "re", "im"], &rows)?;
    Ok(true)
}

fn converge(c: &Common) -> Result<bool> {
    let config = load_config(c)?;
    let mu = config.measure()?;
    let family = resolve_family(&config.family, config.dim)?;
    let threshold = c.tol.unwrap_or(config.tolerances.final_error);
    let rows = convergence_table(&mu, family.entries(), &config.n_list)?;
    let mut metadata = Metadata::for_config(&config, "converge");
    metadata.push("hbar_slack", fmt_f64(0.0));
    metadata.push("family", &config.family);
    metadata.push("final_error_threshold", fmt_f64(threshold));
    let report = ConvergenceReport { metadata, dim: config.dim, hbar_slack: 0.0, rows };
    report.write(&mut output(&c.out)?)?;
    let verdicts = report.assess(threshold);
    for v in verdicts.iter().filter(|v| !v.passed) {
        eprintln!("not converging: {} (final error {:e}, median ratio {})", v.symbol, v.final_error, v.median_ratio);
    }
    Ok(verdicts.iter().all(|v| v.passed))
}

fn cross(c: &Common) -> Result<bool> {
    let config = load_config(c)?;
    let threshold = c.tol.unwrap_or(config.tolerances.cross_term);
    let (first, second) = if config.components.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        (random_orbit(config.dim, &mut rng), random_orbit(config.dim, &mut rng))
    } else {
        let mu = config.measure()?;
        if mu.len() < 2 {
            return Err(CliError::Argument("cross terms need a measure with two components".into()));
        }
        (mu.components()[0].1.orbit().clone(), mu.components()[1].1.orbit().clone())
    };
    let family = resolve_family(&config.family, config.dim)?;
    let rows = cross_terms(&first, &second, &family, &config.n_list)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.symbol.clone(), fmt_f64(r.value.norm()), fmt_f64(r.value.re), fmt_f64(r.value.im)])
        .collect();
    let mut meta = Metadata::for_config(&config, "cross-terms");
    meta.push("family", &config.family);
    meta.push("final_threshold", fmt_f64(threshold));
    write_table(&mut output(&c.out)?, &meta, &["n", "symbol", "abs", "re", "im"], &table)?;

    // final value below threshold; growth within a factor 2 tolerated
    let mut ok = true;
    for (name, _) in family.entries() {
        let col: Vec<f64> = rows.iter().filter(|r| &r.symbol == name).map(|r| r.value.norm()).collect();
        let last = *col.last().unwrap_or(&0.0);
        let trend_ok = col.windows(2).all(|w| w[1] <= 2.0 * w[0] || w[1] <= ROUNDING_FLOOR);
        if last > threshold || !trend_ok {
            eprintln!("cross term not decaying: {name} (final {last:e}, median ratio {})", median_successive_ratio(&col));
            ok = false;
        }
    }
    Ok(ok)
}

fn microlocal(c: &Common, center: &[f64], width: f64, amplitude: f64) -> Result<bool> {
    let mut config = load_config(c)?;
    if c.n_list.is_none() {
        config.n_list = config.microlocal.n_list.clone();
    }
    let threshold = c.tol.unwrap_or(config.tolerances.microlocal);
    let center = if center.is_empty() { vec![0.0; 2 * config.dim] } else { center.to_vec() };
    let bump = BumpSymbol::new(PhasePoint::from_slice(&center)?, width, amplitude)?;
    let mu = config.measure()?;
    let (norms, decreasing) = microlocal_sweep(&bump, &mu, &config.n_list)?;
    let rows: Vec<Vec<String>> = config
        .n_list
        .iter()
        .zip(&norms)
        .map(|(n, v)| vec![n.to_string(), fmt_f64(eigenlimit_core::hbar_schedule(*n, config.dim)), fmt_f64(*v)])
        .collect();
    let mut meta = Metadata::for_config(&config, "microlocal");
    let cs: Vec<String> = center.iter().map(|x| x.to_string()).collect();
    meta.push("bump", format!("center [{}] width {width} amplitude {amplitude}", cs.join(" ")));
    write_table(&mut output(&c.out)?, &meta, &["n", "hbar", "norm"], &rows)?;
    let last = *norms.last().unwrap_or(&0.0);
    if !decreasing {
        eprintln!("microlocal norms are not strictly decreasing");
    }
    if last >= threshold {
        eprintln!("final microlocal norm {last:e} is not below {threshold:e}");
    }
    Ok(decreasing && last < threshold)
}

fn suites(c: &Common) -> Result<bool> {
    let mut config = load_config(c)?;
    if let Some(t) = c.tol {
        config.tolerances = Tolerances::uniform(t);
    }
    let report = run_suites(&config)?;
    report.write(&mut output(&c.out)?)?;
    for f in report.failures() {
        eprintln!("violated: {} (observed {:e}, expected {:e}, tolerance {:e})", f.name(), f.observed, f.expected, f.tolerance);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Orbit(c) => orbit(c),
        Command::BuildState(c) => build(c),
        Command::Converge(c) => converge(c),
        Command::CrossTerms(c) => cross(c),
        Command::Microlocal { common, center, width, amplitude } => microlocal(common, center, *width, *amplitude),
        Command::Suites(c) => suites(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
