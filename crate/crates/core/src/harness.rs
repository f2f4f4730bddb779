//! Experiment sweeps over generated benchmark graphs, with per-run timing of
//! the superstep loop, summaries, and a linear fit of superstep cost against
//! edge count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluidc::{
    best_k_by_modularity_timed, run_fluidc_disconnected_timed, BestKOptions, FluidResult,
};
use crate::graph::{connected_components, read_edge_list_file, write_edge_list_with_meta, Graph};
use crate::lfr::{lfr_generate, realized_mixing, LfrParams};
use crate::lpa::run_lpa_timed;
use crate::metrics::{modularity, nmi_geometric};
use crate::partition::{read_partition_file, write_partition_with_meta, Partition};
use crate::seed::{derive_seed, hash_str, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Fluidc,
    Lpa,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fluidc => "fluidc",
            Algorithm::Lpa => "lpa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fluidc" => Ok(Algorithm::Fluidc),
            "lpa" => Ok(Algorithm::Lpa),
            other => Err(Error::param(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// How FluidC picks `k` in a sweep. LPA ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPolicy {
    /// The number of planted communities.
    GroundTruth,
    /// Highest modularity over a range; unset bounds default to
    /// `[2, ceil(sqrt(n))]`, raised to the component count when needed.
    BestK {
        k_min: Option<usize>,
        k_max: Option<usize>,
        trials: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub mus: Vec<f64>,
    pub replicates: usize,
    pub algorithms: Vec<Algorithm>,
    pub k_policy: KPolicy,
    pub master_seed: u64,
    pub workers: usize,
    pub max_supersteps: usize,
    /// Generated instances are stored here and reused when present.
    pub cache_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![1000],
            mus: vec![0.3],
            replicates: 1,
            algorithms: vec![Algorithm::Fluidc, Algorithm::Lpa],
            k_policy: KPolicy::GroundTruth,
            master_seed: 0,
            workers: 1,
            max_supersteps: crate::fluidc::DEFAULT_MAX_SUPERSTEPS,
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub mu_requested: f64,
    pub mu_realized: f64,
    pub replicate: usize,
    pub seed: u64,
    pub k_used: usize,
    pub nmi: f64,
    pub modularity: f64,
    pub supersteps: usize,
    pub converged: bool,
    pub wall_time_total: f64,
    pub wall_time_per_superstep: f64,
    /// Empty on success; the failure message otherwise.
    pub error: String,
}

pub const RECORD_HEADER: [&str; 15] = [
    "algorithm",
    "n",
    "m",
    "mu_requested",
    "mu_realized",
    "replicate",
    "seed",
    "k_used",
    "nmi",
    "modularity",
    "supersteps",
    "converged",
    "wall_time_total",
    "wall_time_per_superstep",
    "error",
];

impl BenchRecord {
    pub fn is_failure(&self) -> bool {
        !self.error.is_empty()
    }

    fn failed(
        algorithm: &str,
        n: usize,
        mu: f64,
        replicate: usize,
        seed: u64,
        err: &Error,
    ) -> Self {
        BenchRecord {
            algorithm: algorithm.to_string(),
            n,
            m: 0,
            mu_requested: mu,
            mu_realized: f64::NAN,
            replicate,
            seed,
            k_used: 0,
            nmi: f64::NAN,
            modularity: f64::NAN,
            supersteps: 0,
            converged: false,
            wall_time_total: 0.0,
            wall_time_per_superstep: 0.0,
            error: err.to_string(),
        }
    }

    fn to_row(&self) -> Vec<String> {
        vec![
            self.algorithm.clone(),
            self.n.to_string(),
            self.m.to_string(),
            format_sig9(self.mu_requested),
            format_sig9(self.mu_realized),
            self.replicate.to_string(),
            self.seed.to_string(),
            self.k_used.to_string(),
            format_sig9(self.nmi),
            format_sig9(self.modularity),
            self.supersteps.to_string(),
            self.converged.to_string(),
            format_sig9(self.wall_time_total),
            format_sig9(self.wall_time_per_superstep),
            self.error.clone(),
        ]
    }

    fn from_row(row: &csv::StringRecord, line: usize) -> Result<Self> {
        if row.len() != RECORD_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    RECORD_HEADER.len(),
                    row.len()
                ),
            });
        }
        fn field<T: FromStr>(row: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
            row[i].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad value `{}` for {}", &row[i], RECORD_HEADER[i]),
            })
        }
        Ok(BenchRecord {
            algorithm: row[0].to_string(),
            n: field(row, 1, line)?,
            m: field(row, 2, line)?,
            mu_requested: field(row, 3, line)?,
            mu_realized: field(row, 4, line)?,
            replicate: field(row, 5, line)?,
            seed: field(row, 6, line)?,
            k_used: field(row, 7, line)?,
            nmi: field(row, 8, line)?,
            modularity: field(row, 9, line)?,
            supersteps: field(row, 10, line)?,
            converged: field(row, 11, line)?,
            wall_time_total: field(row, 12, line)?,
            wall_time_per_superstep: field(row, 13, line)?,
            error: row[14].to_string(),
        })
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros removed,
/// scientific notation outside `[1e-5, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_records<W: Write>(records: &[BenchRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record(r.to_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected CSV header".into(),
        });
    }
    rdr.records()
        .enumerate()
        .map(|(i, row)| BenchRecord::from_row(&row?, i + 2))
        .collect()
}

/// Parses `0.1,0.2` lists or inclusive `start:stop:step` ranges.
pub fn parse_mu_list(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::param(format!("cannot parse mu list `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) = (
                start.trim().parse().map_err(|_| bad())?,
                stop.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if step <= 0.0 || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect())
        }
        [list] => list
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

struct Instance {
    graph: Graph,
    truth: Partition,
    realized_mu: f64,
}

fn instance_seed(master: u64, n: usize, mu: f64, replicate: usize) -> u64 {
    derive_seed(master, &[n as u64, mu.to_bits(), replicate as u64])
}

/// Seed of one (instance, algorithm) run; independent of sweep order.
pub fn record_seed(master: u64, n: usize, mu: f64, replicate: usize, algorithm: Algorithm) -> u64 {
    derive_seed(
        master,
        &[
            n as u64,
            mu.to_bits(),
            replicate as u64,
            hash_str(algorithm.name()),
        ],
    )
}

fn cache_paths(dir: &Path, n: usize, mu: f64, seed: u64) -> (PathBuf, PathBuf) {
    let stem = format!("lfr_n{n}_mu{}_s{seed:016x}", format_sig9(mu));
    (
        dir.join(format!("{stem}.edges")),
        dir.join(format!("{stem}.cmty")),
    )
}

fn load_or_generate(n: usize, mu: f64, seed: u64, cache: Option<&Path>) -> Result<Instance> {
    if let Some(dir) = cache {
        let (edges, cmty) = cache_paths(dir, n, mu, seed);
        if edges.exists() && cmty.exists() {
            let graph = read_edge_list_file(&edges)?;
            let truth = read_partition_file(&cmty)?;
            if truth.len() != graph.vertex_count() {
                return Err(Error::SizeMismatch {
                    left: graph.vertex_count(),
                    right: truth.len(),
                });
            }
            let realized_mu = realized_mixing(&graph, &truth);
            return Ok(Instance {
                graph,
                truth,
                realized_mu,
            });
        }
    }
    let inst = lfr_generate(&LfrParams::benchmark(n, mu, seed))?;
    if let Some(dir) = cache {
        std::fs::create_dir_all(dir)?;
        let (edges, cmty) = cache_paths(dir, n, mu, seed);
        let meta = [
            ("realized_mu", format_sig9(inst.realized_mu)),
            ("communities", inst.truth.community_count().to_string()),
        ];
        write_edge_list_with_meta(&inst.graph, &meta, std::fs::File::create(edges)?)?;
        write_partition_with_meta(&inst.truth, &meta[1..], std::fs::File::create(cmty)?)?;
    }
    Ok(Instance {
        graph: inst.graph,
        truth: inst.truth,
        realized_mu: inst.realized_mu,
    })
}

fn run_algorithm(
    inst: &Instance,
    algorithm: Algorithm,
    config: &BenchConfig,
    seed: u64,
) -> Result<(FluidResult, Duration)> {
    let g = &inst.graph;
    match algorithm {
        Algorithm::Lpa => run_lpa_timed(g, &mut rng_from_seed(seed), config.max_supersteps),
        Algorithm::Fluidc => match config.k_policy {
            KPolicy::GroundTruth => run_fluidc_disconnected_timed(
                g,
                inst.truth.community_count(),
                &mut rng_from_seed(seed),
                config.max_supersteps,
            ),
            KPolicy::BestK {
                k_min,
                k_max,
                trials,
            } => {
                let defaults = BestKOptions::default_for(g.vertex_count());
                let components = connected_components(g).component_count();
                let k_min = k_min.unwrap_or(defaults.k_min).max(components);
                let k_max = k_max
                    .unwrap_or(defaults.k_max)
                    .max(k_min)
                    .min(g.vertex_count());
                let opts = BestKOptions {
                    k_min,
                    k_max,
                    trials_per_k: trials,
                };
                best_k_by_modularity_timed(g, opts, seed, config.max_supersteps)
                    .map(|(best, t)| (best.result, t))
            }
        },
    }
}

fn evaluate(
    inst: &Instance,
    algorithm: Algorithm,
    config: &BenchConfig,
    n: usize,
    mu: f64,
    replicate: usize,
) -> BenchRecord {
    let seed = record_seed(config.master_seed, n, mu, replicate, algorithm);
    let outcome = run_algorithm(inst, algorithm, config, seed).and_then(|(res, elapsed)| {
        let nmi = nmi_geometric(&res.partition, &inst.truth)?;
        Ok((res, elapsed, nmi))
    });
    match outcome {
        Ok((res, elapsed, nmi)) => {
            let total = elapsed.as_secs_f64();
            BenchRecord {
                algorithm: algorithm.name().to_string(),
                n,
                m: inst.graph.edge_count(),
                mu_requested: mu,
                mu_realized: inst.realized_mu,
                replicate,
                seed,
                k_used: res.partition.community_count(),
                nmi,
                modularity: modularity(&inst.graph, &res.partition).unwrap_or(f64::NAN),
                supersteps: res.supersteps,
                converged: res.converged,
                wall_time_total: total,
                wall_time_per_superstep: if res.supersteps > 0 {
                    total / res.supersteps as f64
                } else {
                    0.0
                },
                error: String::new(),
            }
        }
        Err(e) => BenchRecord::failed(algorithm.name(), n, mu, replicate, seed, &e),
    }
}

/// Runs every algorithm on every `(size, mu, replicate)` instance.
///
/// Records come back ordered by size, then mu, then replicate, then the
/// order of `config.algorithms`, however many workers ran them. Failures
/// become records with a non-empty `error`.
pub fn bench_sweep(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if config.replicates == 0 || config.algorithms.is_empty() {
        return Err(Error::param(
            "sweep needs at least one replicate and one algorithm",
        ));
    }
    if let KPolicy::BestK { trials: 0, .. } = config.k_policy {
        return Err(Error::param("best-k trials must be positive"));
    }
    let tasks: Vec<(usize, f64, usize)> = config
        .sizes
        .iter()
        .flat_map(|&n| {
            config
                .mus
                .iter()
                .flat_map(move |&mu| (0..config.replicates).map(move |r| (n, mu, r)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    let per_instance: Vec<Vec<BenchRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, mu, rep)| {
                let seed = instance_seed(config.master_seed, n, mu, rep);
                match load_or_generate(n, mu, seed, config.cache_dir.as_deref()) {
                    Ok(inst) => config
                        .algorithms
                        .iter()
                        .map(|&a| evaluate(&inst, a, config, n, mu, rep))
                        .collect(),
                    Err(e) => config
                        .algorithms
                        .iter()
                        .map(|&a| {
                            let s = record_seed(config.master_seed, n, mu, rep, a);
                            BenchRecord::failed(a.name(), n, mu, rep, s, &e)
                        })
                        .collect(),
                }
            })
            .collect()
    });
    Ok(per_instance.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub n: usize,
    pub mu: f64,
    pub count: usize,
    /// Only one record in the group; the deviations are 0 by convention.
    pub degenerate: bool,
    pub nmi: MeanStd,
    pub supersteps: MeanStd,
    pub wall_time_total: MeanStd,
    pub wall_time_per_superstep: MeanStd,
}

/// Groups successful records by `(algorithm, n, mu)`, in that order.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, usize, u64), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_failure()) {
        // mu values are non-negative, so their bit patterns sort like the values
        groups
            .entry((r.algorithm.clone(), r.n, r.mu_requested.to_bits()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, n, mu_bits), rs)| {
            let col = |f: fn(&BenchRecord) -> f64| {
                MeanStd::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            SummaryRow {
                algorithm,
                n,
                mu: f64::from_bits(mu_bits),
                count: rs.len(),
                degenerate: rs.len() == 1,
                nmi: col(|r| r.nmi),
                supersteps: col(|r| r.supersteps as f64),
                wall_time_total: col(|r| r.wall_time_total),
                wall_time_per_superstep: col(|r| r.wall_time_per_superstep),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "algorithm",
        "n",
        "mu",
        "count",
        "degenerate",
        "nmi_mean",
        "nmi_std",
        "supersteps_mean",
        "supersteps_std",
        "wall_time_total_mean",
        "wall_time_total_std",
        "wall_time_per_superstep_mean",
        "wall_time_per_superstep_std",
    ])?;
    for r in rows {
        let mut row = vec![
            r.algorithm.clone(),
            r.n.to_string(),
            format_sig9(r.mu),
            r.count.to_string(),
            r.degenerate.to_string(),
        ];
        for ms in [
            r.nmi,
            r.supersteps,
            r.wall_time_total,
            r.wall_time_per_superstep,
        ] {
            row.push(format_sig9(ms.mean));
            row.push(format_sig9(ms.std));
        }
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`. A perfect fit of constant `y` has
/// `r_squared = 1`.
pub fn ols(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Fits per-superstep wall time against edge count over the successful
/// records. Needs at least three distinct edge counts.
pub fn linearity_check(records: &[BenchRecord]) -> Result<LinearFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| !r.is_failure())
        .map(|r| (r.m as f64, r.wall_time_per_superstep))
        .collect();
    let mut distinct: Vec<u64> = points.iter().map(|p| p.0 as u64).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Degenerate(format!(
            "linear fit needs at least 3 distinct edge counts, found {}",
            distinct.len()
        )));
    }
    ols(&points)
}
