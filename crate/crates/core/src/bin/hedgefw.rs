use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hedgefw::baseline::{cv_lasso, lambda_path};
use hedgefw::datagen::{child_seed, gen_instance, read_instance, write_instance};
use hedgefw::harness::experiment::{read_records, ExperimentSummary, RECORDS_FILE, SUMMARY_FILE};
use hedgefw::harness::{emit_svg_histograms, run_experiment, ExperimentConfig};
use hedgefw::metrics::{prediction_error, time_block};
use hedgefw::{default_grid, run_hedge_fw, FwConfig, HedgeConfig};

#[derive(Parser)]
#[command(
    name = "hedgefw",
    version,
    about = "Hedge-weighted stochastic Frank-Wolfe vs cross-validated LASSO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write records.csv, summary.txt and SVGs.
    Run(RunArgs),
    /// Write one synthetic instance file.
    Gen(GenArgs),
    /// Fit both methods on an instance file and print the estimates.
    Solve(SolveArgs),
    /// Render histograms from an existing records.csv.
    Plot(PlotArgs),
}

/// Per-key overrides; each maps to the config key of the same name.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    s0: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// gaussian_iid or toeplitz_correlated
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    grid_size: Option<String>,
    /// Hedge rate, or `auto`.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    dirac_tolerance: Option<String>,
    /// Cap on per-step squared errors, or `off`.
    #[arg(long)]
    loss_cap: Option<String>,
    #[arg(long)]
    k_step: Option<String>,
    #[arg(long)]
    cv_folds: Option<String>,
    #[arg(long)]
    cv_standardize: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    emit_svg: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Generic `key=value` override; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let named = [
            ("n", &self.n),
            ("p", &self.p),
            ("s0", &self.s0),
            ("sigma", &self.sigma),
            ("design", &self.design),
            ("rho", &self.rho),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("grid_size", &self.grid_size),
            ("eta", &self.eta),
            ("dirac_tolerance", &self.dirac_tolerance),
            ("loss_cap", &self.loss_cap),
            ("k_step", &self.k_step),
            ("cv_folds", &self.cv_folds),
            ("cv_standardize", &self.cv_standardize),
            ("output_dir", &self.output_dir),
            ("emit_svg", &self.emit_svg),
            ("threads", &self.threads),
        ];
        let mut out = Vec::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        for (k, v) in named {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        Ok(out)
    }
}

#[derive(Args)]
struct RunArgs {
    /// key=value config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
    /// Use 1000 trials unless --trials is given.
    #[arg(long, alias = "paper-scale")]
    full_scale: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Generate the instance of this Monte Carlo trial instead of using the
    /// master seed directly.
    #[arg(long)]
    trial: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file written by `gen`.
    input: PathBuf,
    #[arg(long, default_value_t = 20)]
    grid_size: usize,
    /// Hedge rate; defaults to sqrt(8 ln G / n).
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    k_step: f64,
    #[arg(long, default_value_t = HedgeConfig::DEFAULT_DIRAC_TOLERANCE)]
    dirac_tolerance: f64,
    #[arg(long, default_value_t = 5)]
    cv_folds: usize,
    /// Fold seed; defaults to the seed stored in the instance file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlotArgs {
    /// records.csv, or a directory containing it.
    records: PathBuf,
    /// Where to write the SVGs; defaults to the records directory.
    #[arg(long, short)]
    out_dir: Option<PathBuf>,
}

fn load_config(path: Option<&PathBuf>, full_scale: bool, overrides: &Overrides) -> Result<ExperimentConfig> {
    let text = match path {
        Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    Ok(ExperimentConfig::resolve(
        text.as_deref(),
        full_scale,
        &overrides.pairs()?,
    )?)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = load_config(args.config.as_ref(), args.full_scale, &args.overrides)?;
    if args.print_config {
        print!("{}", config.to_config_text());
        return Ok(());
    }
    eprintln!(
        "running {} trials (n={}, p={}, sigma={}, {}) with {} thread(s) into {}",
        config.trials,
        config.spec.n,
        config.spec.p,
        config.spec.sigma,
        config.spec.design,
        config.threads,
        config.output_dir.display()
    );
    let records = run_experiment(&config)?;
    print!("{}", ExperimentSummary::from_records(&records).render(&config));
    eprintln!(
        "wrote {} and {}",
        config.output_dir.join(RECORDS_FILE).display(),
        config.output_dir.join(SUMMARY_FILE).display()
    );
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let config = load_config(args.config.as_ref(), false, &args.overrides)?;
    let seed = match args.trial {
        Some(t) => child_seed(config.spec.seed, t),
        None => config.spec.seed,
    };
    let (inst, truth) = gen_instance(&config.spec.with_seed(seed))?;
    match args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            write_instance(&mut w, &inst, &truth, seed)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_instance(&mut w, &inst, &truth, seed)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn print_vector(label: &str, v: &[f64]) {
    let body: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    println!("{label}: {}", body.join(" "));
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let data = read_instance(BufReader::new(file))?;
    let inst = &data.instance;
    if args.grid_size < 2 {
        bail!("--grid-size must be at least 2");
    }
    let eta = args
        .eta
        .unwrap_or_else(|| HedgeConfig::tuned_eta(args.grid_size, inst.n()));
    let hedge_cfg = HedgeConfig::new(eta, args.dirac_tolerance)?;
    let fw = FwConfig::new(args.k_step)?;

    let (out, hedge_time) = time_block(|| -> hedgefw::Result<_> {
        let grid = default_grid(inst, args.grid_size)?;
        run_hedge_fw(inst, &grid, &hedge_cfg, &fw)
    });
    let out = out?;
    let agg = out.aggregate();
    let sel = out.select(args.dirac_tolerance)?;

    let (cv, cv_time) = time_block(|| -> hedgefw::Result<_> {
        let path = lambda_path(inst, args.grid_size)?;
        cv_lasso(inst, &path, args.cv_folds, args.seed.unwrap_or(data.seed))
    });
    let cv = cv?;

    println!("n={} p={} eta={eta:?}", inst.n(), inst.p());
    print_vector("radii", &out.radii);
    print_vector("hedge_weights", &out.weights);
    println!(
        "selected_expert={} radius={:?} dirac={}",
        sel.expert, out.radii[sel.expert], sel.is_dirac
    );
    print_vector("hedge_fw_aggregate", &agg);
    print_vector("hedge_fw_select", &sel.beta);
    println!("cv_best_lambda={:?}", cv.best_lambda);
    print_vector("cv_lasso", &cv.final_beta);
    println!(
        "pred_error hedge_fw_aggregate={:?}",
        prediction_error(inst, &data.truth, &agg)?
    );
    println!(
        "pred_error hedge_fw_select={:?}",
        prediction_error(inst, &data.truth, &sel.beta)?
    );
    println!(
        "pred_error cv_lasso={:?}",
        prediction_error(inst, &data.truth, &cv.final_beta)?
    );
    println!("wall_time_s hedge_fw={hedge_time:?} cv_lasso={cv_time:?}");
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let records = read_records(&args.records)?;
    let dir = match args.out_dir {
        Some(d) => d,
        None if args.records.is_dir() => args.records.clone(),
        None => args
            .records
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    for path in emit_svg_histograms(&records, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run(a) => cmd_run(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
