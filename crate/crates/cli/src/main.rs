use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fluidc::diversity::{similarity_matrix, Detector, FluidcDetector, LpaDetector};
use fluidc::graph::{read_edge_list_file, write_edge_list_with_meta};
use fluidc::harness::{
    bench_sweep, format_sig9, parse_mu_list, summarize, write_records, write_summary, Algorithm,
    BenchConfig, KPolicy,
};
use fluidc::lfr::{lfr_generate, multi_ground_truth, LfrParams, MultiGroundTruth};
use fluidc::partition::{read_partition_file, write_partition, write_partition_with_meta};
use fluidc::seed::rng_from_seed;
use fluidc::{
    best_k_by_modularity, modularity, nmi_geometric, run_fluidc_disconnected, run_lpa,
    BestKOptions, Graph, Partition,
};

#[derive(Parser)]
#[command(name = "fluidc", version, about = "Fluid Communities toolkit")]
struct Cli {
    /// Master seed [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps [default: 1].
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output path (a file prefix for `gen` and `gen-multi`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark graph with one planted partition.
    Gen(GenArgs),
    /// Generate a graph carrying two unrelated planted partitions.
    GenMulti {
        #[arg(long)]
        n: usize,
    },
    /// Run one detector on a graph.
    Detect {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgoArg::Fluidc)]
        algo: AlgoArg,
        /// Number of communities (FluidC only).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = fluidc::fluidc::DEFAULT_MAX_SUPERSTEPS)]
        max_supersteps: usize,
    },
    /// Run FluidC over a range of k and keep the highest-modularity result.
    BestK {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = fluidc::fluidc::DEFAULT_MAX_SUPERSTEPS)]
        max_supersteps: usize,
    },
    /// Score a partition.
    Eval {
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Sweep sizes, mixing values and replicates, writing one CSV row per run.
    Bench(BenchArgs),
    /// Similarity of detectors over multi-truth graphs.
    Diversity {
        /// Directory of `NAME.edges` files with `NAME.t1.cmty` and `NAME.t2.cmty` beside them.
        #[arg(long)]
        graphs: PathBuf,
        /// Comma-separated detectors; `fluidc@b` gives a second FluidC with its own seeds.
        #[arg(long, default_value = "fluidc,lpa")]
        algos: String,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Communities requested from FluidC.
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    min_community: Option<usize>,
    #[arg(long)]
    max_community: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Key-value (TOML) file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sizes: Option<String>,
    /// `0.1,0.3` or `start:stop:step`.
    #[arg(long)]
    mus: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    algos: Option<String>,
    #[arg(long, value_enum)]
    k_policy: Option<KPolicyArg>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    max_supersteps: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Also write per-group means and deviations here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Fluidc,
    Lpa,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Nmi,
    Modularity,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KPolicyArg {
    Truth,
    Best,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchFile {
    sizes: Option<Vec<usize>>,
    mus: Option<MuSpec>,
    reps: Option<usize>,
    algos: Option<Vec<String>>,
    k_policy: Option<KPolicyArg>,
    k_min: Option<usize>,
    k_max: Option<usize>,
    trials: Option<usize>,
    max_supersteps: Option<usize>,
    cache_dir: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MuSpec {
    List(Vec<f64>),
    Text(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Gen(args) => gen(&args, seed, out),
        Command::GenMulti { n } => gen_multi(n, seed, out),
        Command::Detect {
            graph,
            algo,
            k,
            max_supersteps,
        } => {
            let g = load_graph(&graph)?;
            let mut rng = rng_from_seed(seed);
            let result = match (algo, k) {
                (AlgoArg::Fluidc, Some(k)) => {
                    run_fluidc_disconnected(&g, k, &mut rng, max_supersteps)?
                }
                (AlgoArg::Fluidc, None) => bail!("--k is required for fluidc"),
                (AlgoArg::Lpa, _) => run_lpa(&g, &mut rng, max_supersteps)?,
            };
            eprintln!(
                "communities {} supersteps {} converged {}",
                result.partition.community_count(),
                result.supersteps,
                result.converged
            );
            emit_partition(&result.partition, out)
        }
        Command::BestK {
            graph,
            k_min,
            k_max,
            trials,
            max_supersteps,
        } => {
            let g = load_graph(&graph)?;
            let defaults = BestKOptions::default_for(g.vertex_count());
            let k_min = k_min.unwrap_or(defaults.k_min);
            let opts = BestKOptions {
                k_min,
                k_max: k_max.unwrap_or(defaults.k_max).max(k_min),
                trials_per_k: trials,
            };
            let best = best_k_by_modularity(&g, opts, seed, max_supersteps)?;
            eprintln!("k {} modularity {:.6}", best.k, best.modularity);
            emit_partition(&best.result.partition, out)
        }
        Command::Eval {
            metric,
            pred,
            truth,
            graph,
        } => {
            let pred = load_partition(&pred)?;
            let value = match metric {
                MetricArg::Nmi => {
                    let truth = truth.context("--truth is required for nmi")?;
                    nmi_geometric(&pred, &load_partition(&truth)?)?
                }
                MetricArg::Modularity => {
                    let graph = graph.context("--graph is required for modularity")?;
                    modularity(&load_graph(&graph)?, &pred)?
                }
            };
            println!("{value:.6}");
            Ok(())
        }
        Command::Bench(args) => bench(&args, cli.seed, cli.workers, out),
        Command::Diversity {
            graphs,
            algos,
            runs,
            alpha,
            k,
        } => diversity(&graphs, &algos, runs, alpha, k, seed, out),
    }
}

fn load_graph(path: &Path) -> Result<Graph> {
    read_edge_list_file(path).with_context(|| format!("reading graph {}", path.display()))
}

fn load_partition(path: &Path) -> Result<Partition> {
    read_partition_file(path).with_context(|| format!("reading communities {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Runs `f` on the `--out` file, or on standard output.
fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_partition(p: &Partition, out: Option<&Path>) -> Result<()> {
    with_output(out, |w| Ok(write_partition(p, w)?))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn gen(args: &GenArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let prefix = out.context("--out PREFIX is required")?;
    let mut params = LfrParams::benchmark(args.n, args.mu, seed);
    if let Some(d) = args.avg_degree {
        params.avg_degree = d;
    }
    if let Some(d) = args.max_degree {
        params.max_degree = d;
    }
    if let Some(s) = args.min_community {
        params.min_community = s;
    }
    if let Some(s) = args.max_community {
        params.max_community = s;
    }
    let inst = lfr_generate(&params)?;
    let meta = [
        ("realized_mu", format_sig9(inst.realized_mu)),
        ("communities", inst.truth.community_count().to_string()),
    ];
    let mut w = create(&with_suffix(prefix, ".edges"))?;
    write_edge_list_with_meta(&inst.graph, &meta, &mut w)?;
    w.flush()?;
    let mut w = create(&with_suffix(prefix, ".cmty"))?;
    write_partition_with_meta(&inst.truth, &meta, &mut w)?;
    w.flush()?;
    eprintln!(
        "vertices {} edges {} communities {} realized_mu {}",
        inst.graph.vertex_count(),
        inst.graph.edge_count(),
        inst.truth.community_count(),
        format_sig9(inst.realized_mu)
    );
    Ok(())
}

fn gen_multi(n: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let prefix = out.context("--out PREFIX is required")?;
    let inst = multi_ground_truth(&LfrParams::multi_truth(n, seed))?;
    let nmi = nmi_geometric(&inst.t1, &inst.t2)?;
    let mut w = create(&with_suffix(prefix, ".edges"))?;
    write_edge_list_with_meta(&inst.graph, &[("truth_nmi", format_sig9(nmi))], &mut w)?;
    w.flush()?;
    for (suffix, truth) in [(".t1.cmty", &inst.t1), (".t2.cmty", &inst.t2)] {
        let meta = [("communities", truth.community_count().to_string())];
        let mut w = create(&with_suffix(prefix, suffix))?;
        write_partition_with_meta(truth, &meta, &mut w)?;
        w.flush()?;
    }
    eprintln!(
        "vertices {} edges {} truth_nmi {}",
        inst.graph.vertex_count(),
        inst.graph.edge_count(),
        format_sig9(nmi)
    );
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .ok()
                .with_context(|| format!("bad {what} `{t}`"))
        })
        .collect()
}

fn bench(
    args: &BenchArgs,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let file: BenchFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => BenchFile::default(),
    };
    let defaults = BenchConfig::default();

    let sizes = match &args.sizes {
        Some(s) => parse_list(s, "size")?,
        None => file.sizes.unwrap_or(defaults.sizes),
    };
    let mus = match (&args.mus, file.mus) {
        (Some(s), _) => parse_mu_list(s)?,
        (None, Some(MuSpec::Text(s))) => parse_mu_list(&s)?,
        (None, Some(MuSpec::List(v))) => v,
        (None, None) => defaults.mus,
    };
    let algorithms: Vec<Algorithm> = match (&args.algos, file.algos) {
        (Some(s), _) => parse_list(s, "algorithm")?,
        (None, Some(v)) => v.iter().map(|a| a.parse()).collect::<Result<_, _>>()?,
        (None, None) => defaults.algorithms,
    };
    let k_policy = match args.k_policy.or(file.k_policy).unwrap_or(KPolicyArg::Truth) {
        KPolicyArg::Truth => KPolicy::GroundTruth,
        KPolicyArg::Best => KPolicy::BestK {
            k_min: args.k_min.or(file.k_min),
            k_max: args.k_max.or(file.k_max),
            trials: args.trials.or(file.trials).unwrap_or(5),
        },
    };
    let config = BenchConfig {
        sizes,
        mus,
        replicates: args.reps.or(file.reps).unwrap_or(defaults.replicates),
        algorithms,
        k_policy,
        master_seed: seed.or(file.seed).unwrap_or(0),
        workers: workers.or(file.workers).unwrap_or(1),
        max_supersteps: args
            .max_supersteps
            .or(file.max_supersteps)
            .unwrap_or(defaults.max_supersteps),
        cache_dir: args.cache_dir.clone().or(file.cache_dir),
    };

    let records = bench_sweep(&config)?;
    let failures = records.iter().filter(|r| r.is_failure()).count();
    with_output(out, |w| Ok(write_records(&records, w)?))?;
    if let Some(path) = &args.summary {
        write_summary(&summarize(&records), create(path)?)?;
    }
    eprintln!("records {} failed {failures}", records.len());
    Ok(())
}

fn load_instances(dir: &Path) -> Result<Vec<MultiGroundTruth>> {
    let mut edges: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    edges.retain(|p| p.extension().is_some_and(|e| e == "edges"));
    edges.sort();
    if edges.is_empty() {
        bail!("no .edges files in {}", dir.display());
    }
    edges
        .iter()
        .map(|path| {
            let prefix = path.with_extension("");
            let graph = load_graph(path)?;
            let t1 = load_partition(&with_suffix(&prefix, ".t1.cmty"))?;
            let t2 = load_partition(&with_suffix(&prefix, ".t2.cmty"))?;
            for t in [&t1, &t2] {
                if t.len() != graph.vertex_count() {
                    bail!(
                        "{}: community file covers {} of {} vertices",
                        path.display(),
                        t.len(),
                        graph.vertex_count()
                    );
                }
            }
            Ok(MultiGroundTruth { graph, t1, t2 })
        })
        .collect()
}

fn diversity(
    dir: &Path,
    algos: &str,
    runs: usize,
    alpha: f64,
    k: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let instances = load_instances(dir)?;
    let detectors: Vec<Box<dyn Detector>> = algos
        .split(',')
        .map(|name| {
            let name = name.trim();
            let base = name.split('@').next().unwrap_or(name);
            Ok(match base.parse::<Algorithm>()? {
                Algorithm::Fluidc => {
                    Box::new(FluidcDetector::new(k).named(name)) as Box<dyn Detector>
                }
                Algorithm::Lpa => Box::new(LpaDetector::default().named(name)),
            })
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&dyn Detector> = detectors.iter().map(|d| d.as_ref()).collect();
    let matrix = similarity_matrix(&refs, &instances, runs, alpha, seed)?;
    with_output(out, |w| Ok(matrix.write_csv(w)?))
}
