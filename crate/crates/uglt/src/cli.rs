//! Command-line interface: thin wrappers over the library entry points.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiment::{builtin_coefficient, model_sequence, ExperimentConfig};
use crate::generators::{builtin_table, reduced_toeplitz_real};
use crate::grid::{domain_grid, DomainSpec, MultiIndex};
use crate::selection::{gram_identities, SelectionMap};
use crate::sequence::{gacs_decompose, isometry_check, unbounded_diag};
use crate::spectral::sym_eigenvalues;

#[derive(Parser, Debug)]
#[command(
    name = "uglt",
    about = "Grids, selection operators, symbol-tracked matrix-sequences and \
             spectral-distribution experiments over bounded and unbounded domains",
    version
)]
pub struct Cli {
    /// TOML run configuration (defaults are built in)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed override for pseudo-random draws
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Output directory override
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker count (currently only validated; execution is single-threaded)
    #[arg(long, global = true, value_name = "INT")]
    pub jobs: Option<usize>,
    /// Also write SVG quantile plots where applicable
    #[arg(long, global = true)]
    pub emit_svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Grid cardinalities d_n and their measure ratios
    Dims,
    /// Assemble the reduced Toeplitz matrices of the configured symbol and
    /// write their spectra
    Toeplitz,
    /// Check the restriction/extension operator identities on the
    /// configured domain against its exhaustion steps
    RestrictCheck,
    /// Run the model-problem distribution experiment
    Experiment,
    /// Compare the sequence pseudo-metric with the symbol pseudo-metric
    Isometry,
    /// Print g.a.c.s. certificates of the model-problem sequence
    Gacs,
    /// Run the full acceptance suite and report one verdict per criterion
    Verify,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run a parsed command line; the caller maps errors to exit codes.
/// Returns the process exit code (0 success, 4 acceptance failure).
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Dims => cmd_dims(&cfg),
        Command::Toeplitz => cmd_toeplitz(&cfg),
        Command::RestrictCheck => cmd_restrict_check(&cfg),
        Command::Experiment => cmd_experiment(&cfg, cli.emit_svg),
        Command::Isometry => cmd_isometry(&cfg),
        Command::Gacs => cmd_gacs(&cfg),
        Command::Verify => cmd_verify(&cfg),
    }
}

fn cmd_dims(cfg: &RunConfig) -> Result<i32> {
    let dom = DomainSpec::builtin(&cfg.domain)?;
    println!("m,dim,ratio,measure");
    for &m in &cfg.n_list {
        let n = MultiIndex::square(dom.d(), m);
        let grid = domain_grid(&n, &dom)?;
        let ratio = grid.dim() as f64 / n.n_total() as f64;
        println!("{m},{},{ratio},{}", grid.dim(), dom.measure);
    }
    Ok(0)
}

fn cmd_toeplitz(cfg: &RunConfig) -> Result<i32> {
    let dom = DomainSpec::builtin(&cfg.domain)?;
    let table = builtin_table(&cfg.symbol, 1)?;
    if table.d() != dom.d() {
        return Err(Error::Config(format!(
            "symbol '{}' is {}-dimensional but domain '{}' is {}-dimensional",
            cfg.symbol,
            table.d(),
            cfg.domain,
            dom.d()
        )));
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    for &m in &cfg.n_list {
        let n = MultiIndex::square(dom.d(), m);
        let grid = domain_grid(&n, &dom)?;
        let t = reduced_toeplitz_real(&grid, &table)?;
        let eigs = sym_eigenvalues(&t, cfg.caps.eig_dim)?;
        let path = cfg.output_dir.join(format!("toeplitz_eigs_{m}.csv"));
        eigs.to_csv(std::fs::File::create(&path)?)?;
        println!(
            "m={m} dim={} written {}",
            grid.dim(),
            path.display()
        );
    }
    Ok(0)
}

fn cmd_restrict_check(cfg: &RunConfig) -> Result<i32> {
    let dom = DomainSpec::builtin(&cfg.domain)?;
    let mut all_ok = true;
    for &m in &cfg.n_list {
        let n = MultiIndex::square(dom.d(), m);
        let big = Arc::new(domain_grid(&n, &dom)?);
        for &t in &cfg.t_list {
            let omega_t = crate::grid::exhaustion_domain(&dom, t)?;
            let small = Arc::new(domain_grid(&n, &omega_t)?);
            let map = SelectionMap::new(small.clone(), big.clone())?;
            let rep = gram_identities(&map);
            let ok = rep.left_identity;
            all_ok &= ok;
            println!(
                "m={m} t={t} dim={}->{} gram_left_identity={} right_defect={}",
                big.dim(),
                small.dim(),
                rep.left_identity,
                rep.right_diag_defect
            );
        }
    }
    if all_ok {
        println!("all selection identities hold");
    }
    Ok(0)
}

fn cmd_experiment(cfg: &RunConfig, emit_svg: bool) -> Result<i32> {
    let ex = ExperimentConfig {
        m_list: cfg.n_list.clone(),
        t_list: cfg.t_list.clone(),
        theta_per_axis: cfg.theta_per_axis,
        eig_cap: cfg.caps.eig_dim,
        emit_svg,
    };
    let report = crate::experiment::run_experiment(&cfg.output_dir, &ex)?;
    println!("m,t,dim,dim_defect,zero_fraction,w1");
    for r in &report.rows {
        println!(
            "{},{},{},{},{:.6},{:.6}",
            r.m, r.t, r.dim, r.dim_defect, r.zero_fraction, r.w1_eigs_vs_symbol
        );
    }
    println!("{} files written to {}", report.files.len(), cfg.output_dir.display());
    Ok(0)
}

fn cmd_isometry(cfg: &RunConfig) -> Result<i32> {
    let dom = DomainSpec::builtin(&cfg.domain)?;
    if !dom.bounded {
        return Err(Error::Config(
            "isometry diagnostic needs a bounded domain (try unit_square)".into(),
        ));
    }
    let base = builtin_coefficient();
    let a: crate::generators::SpaceFn = Arc::new(move |x: &[f64]| base(x) / 10.0);
    let seq = unbounded_diag(a, "a10", &dom, f64::INFINITY)?;
    let ns: Vec<MultiIndex> = cfg
        .n_list
        .iter()
        .map(|&m| MultiIndex::square(dom.d(), m))
        .collect();
    let rep = isometry_check(&seq, &ns, cfg.caps.svd_dim, 256, 1)?;
    println!("n,p_sequence,gap");
    for (n, p) in &rep.d_acs_profile {
        println!("{n},{p:.6},{:.6}", (p - rep.d_m_value).abs());
    }
    println!("d_m(symbol)={:.6} final_gap={:.6}", rep.d_m_value, rep.gap);
    Ok(0)
}

fn cmd_gacs(cfg: &RunConfig) -> Result<i32> {
    let seq = model_sequence();
    let m = *cfg.n_list.iter().max().unwrap();
    let n = MultiIndex::square(2, m);
    let mut certs = Vec::new();
    for &t in &cfg.t_list {
        let (_, cert) = gacs_decompose(&seq, t, &n)?;
        certs.push(cert);
    }
    println!("{}", serde_json::to_string_pretty(&certs)?);
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let results = crate::acceptance::run_all()?;
    for r in &results {
        println!("{}", r.line());
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join("verify.json");
    std::fs::write(&path, serde_json::to_string_pretty(&results)?)?;
    println!("verdicts written to {}", path.display());
    if results.iter().all(|r| r.passed()) {
        Ok(0)
    } else {
        Ok(4)
    }
}
