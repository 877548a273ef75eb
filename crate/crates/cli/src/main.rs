use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use certmap::certify::{certify, CertifyConfig, RouteRequest};
use certmap::experiments::{
    build_store, central_qq, level_experiment, power_experiment, qq_correlation, t1_validation, ExperimentConfig,
    StoreConfig,
};
use certmap::invariants::InvariantKind;
use certmap::io::{load_point_cloud, parse_values};
use certmap::mapper::{build_mapper, CutoffRule, FilterKind, FilterSpec, MapperOptions};
use certmap::nullmodel::InvariantStore;
use certmap::plot;
use certmap::testing::{Fwer, Method};

#[derive(Parser)]
#[command(name = "certmap", version, about = "Mapper covers with nerve-lemma certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Mapper and certify it, writing a JSON certificate.
    Certify(CertifyArgs),
    /// Build a Mapper and export its structure only.
    Mapper(MapperArgs),
    /// Simulation experiments.
    #[command(subcommand)]
    Simulate(Simulate),
}

#[derive(Args)]
struct CoverArgs {
    /// Point cloud, CSV (header optional) or JSON array of points.
    #[arg(long)]
    input: PathBuf,
    /// `coord:K` for coordinate K, or `values:PATH` for one value per line.
    #[arg(long, default_value = "coord:0")]
    filter: String,
    #[arg(long, default_value_t = 10)]
    intervals: usize,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    /// Fixed single-linkage cutoff instead of the histogram-gap rule.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Override the nerve dimension cap.
    #[arg(long)]
    max_nerve_dim: Option<usize>,
}

impl CoverArgs {
    fn filter(&self) -> Result<FilterSpec> {
        let kind = if let Some(k) = self.filter.strip_prefix("coord:") {
            FilterKind::Coordinate(k.parse().context("coordinate filter index")?)
        } else if let Some(p) = self.filter.strip_prefix("values:") {
            FilterKind::Custom(parse_values(
                &fs::read_to_string(p).with_context(|| format!("reading {p}"))?,
            )?)
        } else {
            bail!("filter must be coord:K or values:PATH, got {:?}", self.filter);
        };
        Ok(FilterSpec::new(kind, self.intervals, self.overlap)?)
    }

    fn options(&self) -> MapperOptions {
        MapperOptions {
            cutoff: self.cutoff.map_or_else(CutoffRule::default, CutoffRule::Fixed),
            max_nerve_dim: self.max_nerve_dim,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Statistical,
}

#[derive(Clone, Copy, ValueEnum)]
enum FwerArg {
    Bonferroni,
    Holm,
    Hochberg,
}

#[derive(Clone, Copy, ValueEnum)]
enum InvariantArg {
    MaxDiff,
    MaxRatio,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    cover: CoverArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Simulations per simplex.
    #[arg(long, default_value_t = 99)]
    sims: usize,
    /// generic, normal, log-normal, quantile-t, global-z, global-logz or global-histeq.
    #[arg(long, default_value = "global-logz")]
    method: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    #[arg(long, value_enum, default_value_t = InvariantArg::MaxDiff)]
    invariant: InvariantArg,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    route: RouteArg,
    #[arg(long, value_enum, default_value_t = FwerArg::Hochberg)]
    fwer: FwerArg,
    /// Use 2T in the quantile ratio test.
    #[arg(long)]
    doubled_t: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dot: Option<PathBuf>,
    /// SVG of the simulated maxima with the data score marked (global methods).
    #[arg(long)]
    score_plot: Option<PathBuf>,
}

#[derive(Args)]
struct MapperArgs {
    #[command(flatten)]
    cover: CoverArgs,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct StoreArgs {
    /// Invariant store CSV from `simulate build-store`; built in memory when absent.
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Use 2T in the quantile ratio test.
    #[arg(long)]
    doubled_t: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Simulate {
    /// Rejection rates on pure null families.
    Level(StoreArgs),
    /// Rejection rates with one planted noisy circle.
    Power {
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        args: StoreArgs,
    },
    /// Quantile ratio statistic against the Cauchy distribution.
    T1Validate {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Precompute the invariant store.
    BuildStore {
        /// Clouds per null population (box shape and point count).
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Clouds per noisy-circle population.
        #[arg(long, default_value_t = 200)]
        circle_count: usize,
        #[arg(long, default_value_t = 20_160_000)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run_certify(a: &CertifyArgs) -> Result<i32> {
    let (cloud, _) = load_point_cloud(&a.cover.input)?;
    let filter = a.cover.filter()?;
    let config = CertifyConfig {
        alpha: a.alpha,
        n_total: a.sims + 1,
        method: Method::parse(&a.method)?,
        max_dim: a.max_dim,
        seed: a.seed,
        invariant: match a.invariant {
            InvariantArg::MaxDiff => InvariantKind::MaxDiff,
            InvariantArg::MaxRatio => InvariantKind::MaxRatio,
        },
        route: match a.route {
            RouteArg::Auto => RouteRequest::Auto,
            RouteArg::Statistical => RouteRequest::Statistical,
        },
        fwer: match a.fwer {
            FwerArg::Bonferroni => Fwer::Bonferroni,
            FwerArg::Holm => Fwer::Holm,
            FwerArg::Hochberg => Fwer::Hochberg,
        },
        doubled_t: a.doubled_t,
        mapper: a.cover.options(),
        ..CertifyConfig::default()
    };
    let c = certify(&cloud, &filter, &config)?;
    write(&a.out, &c.certificate.to_json()?)?;
    if let Some(p) = &a.dot {
        write(p, &c.mapper.to_dot())?;
    }
    if let Some(p) = &a.score_plot {
        match &c.global {
            Some(g) => write(p, &plot::score_plot(&g.sim_maxima, g.data_max, 20))?,
            None => log::warn!("no global test was run; score plot skipped"),
        }
    }
    println!("{}", c.certificate.verdict.name());
    Ok(c.certificate.verdict.exit_code())
}

fn run_mapper(a: &MapperArgs) -> Result<()> {
    let (cloud, _) = load_point_cloud(&a.cover.input)?;
    let m = build_mapper(&cloud, &a.cover.filter()?, &a.cover.options())?;
    if let Some(p) = &a.dot {
        write(p, &m.to_dot())?;
    }
    if let Some(p) = &a.json {
        write(p, &serde_json::to_string_pretty(&m.to_json())?)?;
    }
    println!(
        "{} vertices, {} simplices, dimension {}",
        m.num_vertices(),
        m.simplices.len(),
        m.dim()
    );
    Ok(())
}

fn load_store(path: Option<&Path>) -> Result<InvariantStore> {
    match path {
        Some(p) => Ok(InvariantStore::read_csv(
            fs::File::open(p).with_context(|| format!("opening {}", p.display()))?,
        )?),
        None => {
            log::info!("building the default invariant store");
            Ok(build_store(&StoreConfig::default())?)
        }
    }
}

fn run_simulate(s: &Simulate) -> Result<()> {
    let experiment = |a: &StoreArgs| ExperimentConfig {
        n_trials: a.trials,
        seed: a.seed,
        doubled_t: a.doubled_t,
        ..ExperimentConfig::default()
    };
    let emit = |table: certmap::experiments::RateTable, out: &Option<PathBuf>| -> Result<()> {
        match out {
            Some(p) => table.write_csv(fs::File::create(p)?)?,
            None => table.write_csv(std::io::stdout().lock())?,
        }
        Ok(())
    };
    match s {
        Simulate::Level(a) => emit(
            level_experiment(&load_store(a.store.as_deref())?, &experiment(a))?,
            &a.out,
        ),
        Simulate::Power { sigma, args } => emit(
            power_experiment(&load_store(args.store.as_deref())?, &experiment(args), *sigma)?,
            &args.out,
        ),
        Simulate::T1Validate {
            store,
            samples,
            seed,
            out_dir,
        } => {
            let store = load_store(store.as_deref())?;
            fs::create_dir_all(out_dir)?;
            let n_total = ExperimentConfig::default().sims_per_test;
            for v in t1_validation(&store, *samples, n_total, *seed)? {
                let doubled: Vec<f64> = v.t.iter().map(|t| 2.0 * t).collect();
                let (qq_t, qq_2t) = (central_qq(&v.t), central_qq(&doubled));
                let mut csv = String::from("statistic,empirical,cauchy\n");
                for (name, pairs) in [("T", &qq_t), ("2T", &qq_2t)] {
                    for (e, c) in pairs.iter() {
                        csv.push_str(&format!("{name},{e},{c}\n"));
                    }
                }
                let k = v.hom_dim;
                write(&out_dir.join(format!("qq_dim{k}.csv")), &csv)?;
                write(
                    &out_dir.join(format!("qq_dim{k}.svg")),
                    &plot::qq_plot(
                        &format!("Quantile ratio vs Cauchy, H{k}"),
                        &[("T", &qq_t), ("2T", &qq_2t)],
                    ),
                )?;
                write(
                    &out_dir.join(format!("ecdf_dim{k}.svg")),
                    &plot::ecdf_plot(&format!("Quantile ratio ECDF, H{k}"), &[("T", &v.t), ("2T", &doubled)]),
                )?;
                println!(
                    "H{k}: {} draws, {} undefined, QQ correlation T {:.4}, 2T {:.4}",
                    v.t.len(),
                    v.undefined,
                    qq_correlation(&qq_t),
                    qq_correlation(&qq_2t)
                );
            }
            Ok(())
        }
        Simulate::BuildStore {
            count,
            circle_count,
            seed,
            out,
        } => {
            let config = StoreConfig {
                null_per_combo: *count,
                circle_per_combo: *circle_count,
                seed: *seed,
                ..StoreConfig::default()
            };
            let store = build_store(&config)?;
            store.write_csv(fs::File::create(out)?, true)?;
            println!("{} invariants written", store.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Certify(a) => run_certify(a),
        Command::Mapper(a) => run_mapper(a).map(|()| 0),
        Command::Simulate(s) => run_simulate(s).map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
