//! Which of two planted ground truths does an algorithm recover, and how
//! alike are two algorithms in that respect?
//!
//! Each run of an algorithm on a graph with truths `T1` and `T2` is reduced to
//! a categorical outcome θ (+1: closer to `T1`, -1: closer to `T2`, 0:
//! neither by more than `alpha` NMI). Repeated runs give a θ series; two
//! series are compared with a chi-square homogeneity test, and the p-values
//! over a set of graphs are averaged into a similarity matrix.

use std::io::Write;
use std::ops::Neg;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluidc::{run_fluidc_disconnected, DEFAULT_MAX_SUPERSTEPS};
use crate::gamma::chi_square_sf;
use crate::graph::Graph;
use crate::lfr::MultiGroundTruth;
use crate::lpa::run_lpa;
use crate::metrics::nmi_geometric;
use crate::partition::Partition;
use crate::seed::{derive_seed, hash_str, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theta {
    SecondTruth,
    Neither,
    FirstTruth,
}

impl Theta {
    pub const ALL: [Theta; 3] = [Theta::FirstTruth, Theta::Neither, Theta::SecondTruth];

    pub fn value(self) -> i8 {
        match self {
            Theta::SecondTruth => -1,
            Theta::Neither => 0,
            Theta::FirstTruth => 1,
        }
    }

    fn index(self) -> usize {
        (self.value() + 1) as usize
    }
}

impl Neg for Theta {
    type Output = Theta;

    fn neg(self) -> Theta {
        match self {
            Theta::SecondTruth => Theta::FirstTruth,
            Theta::Neither => Theta::Neither,
            Theta::FirstTruth => Theta::SecondTruth,
        }
    }
}

pub fn theta(nmi_t1: f64, nmi_t2: f64, alpha: f64) -> Result<Theta> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::param(format!(
            "alpha must be non-negative, got {alpha}"
        )));
    }
    Ok(if nmi_t1 - nmi_t2 > alpha {
        Theta::FirstTruth
    } else if nmi_t2 - nmi_t1 > alpha {
        Theta::SecondTruth
    } else {
        Theta::Neither
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ThetaSeries {
    // indexed by θ + 1
    counts: [usize; 3],
}

impl ThetaSeries {
    pub fn from_counts(first: usize, neither: usize, second: usize) -> Self {
        ThetaSeries {
            counts: [second, neither, first],
        }
    }

    pub fn record(&mut self, t: Theta) {
        self.counts[t.index()] += 1;
    }

    pub fn count(&self, t: Theta) -> usize {
        self.counts[t.index()]
    }

    pub fn runs(&self) -> usize {
        self.counts.iter().sum()
    }
}

impl FromIterator<Theta> for ThetaSeries {
    fn from_iter<I: IntoIterator<Item = Theta>>(iter: I) -> Self {
        let mut s = ThetaSeries::default();
        for t in iter {
            s.record(t);
        }
        s
    }
}

/// A community detection algorithm driven by an integer seed.
///
/// The name doubles as the identity of the seed stream in
/// [`similarity_matrix`]: two entries with the same name see the same seeds.
pub trait Detector: Sync {
    fn name(&self) -> &str;
    fn detect(&self, g: &Graph, seed: u64) -> Result<Partition>;
}

#[derive(Debug, Clone)]
pub struct FluidcDetector {
    pub name: String,
    pub k: usize,
    pub max_supersteps: usize,
}

impl FluidcDetector {
    pub fn new(k: usize) -> Self {
        FluidcDetector {
            name: "fluidc".into(),
            k,
            max_supersteps: DEFAULT_MAX_SUPERSTEPS,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Detector for FluidcDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, g: &Graph, seed: u64) -> Result<Partition> {
        let mut rng = rng_from_seed(seed);
        run_fluidc_disconnected(g, self.k, &mut rng, self.max_supersteps).map(|r| r.partition)
    }
}

#[derive(Debug, Clone)]
pub struct LpaDetector {
    pub name: String,
    pub max_supersteps: usize,
}

impl Default for LpaDetector {
    fn default() -> Self {
        LpaDetector {
            name: "lpa".into(),
            max_supersteps: crate::lpa::DEFAULT_MAX_SUPERSTEPS,
        }
    }
}

impl LpaDetector {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Detector for LpaDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, g: &Graph, seed: u64) -> Result<Partition> {
        run_lpa(g, &mut rng_from_seed(seed), self.max_supersteps).map(|r| r.partition)
    }
}

/// Wraps a closure as a [`Detector`].
pub struct FnDetector<F> {
    name: String,
    f: F,
}

impl<F> FnDetector<F>
where
    F: Fn(&Graph, u64) -> Result<Partition> + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnDetector {
            name: name.into(),
            f,
        }
    }
}

impl<F> Detector for FnDetector<F>
where
    F: Fn(&Graph, u64) -> Result<Partition> + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, g: &Graph, seed: u64) -> Result<Partition> {
        (self.f)(g, seed)
    }
}

/// Runs `detector` `runs` times (run `i` with seed `derive_seed(seed, [i])`)
/// and tallies θ against the two truths.
pub fn theta_series(
    detector: &dyn Detector,
    graph: &Graph,
    t1: &Partition,
    t2: &Partition,
    runs: usize,
    alpha: f64,
    seed: u64,
) -> Result<ThetaSeries> {
    if runs == 0 {
        return Err(Error::param("runs must be positive"));
    }
    for t in [t1, t2] {
        if t.len() != graph.vertex_count() {
            return Err(Error::SizeMismatch {
                left: graph.vertex_count(),
                right: t.len(),
            });
        }
    }
    theta(0.0, 0.0, alpha)?;
    let thetas = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let found = detector.detect(graph, derive_seed(seed, &[i]))?;
            theta(
                nmi_geometric(&found, t1)?,
                nmi_geometric(&found, t2)?,
                alpha,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(thetas.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Chi-square homogeneity test on the 2×3 table of two θ series, without
/// continuity correction. Categories empty in both series are dropped; with
/// a single remaining category the series are identical in distribution and
/// `p = 1`.
pub fn chi_square_homogeneity(a: &ThetaSeries, b: &ThetaSeries) -> Result<ChiSquare> {
    let (na, nb) = (a.runs(), b.runs());
    if na == 0 || nb == 0 {
        return Err(Error::param("chi-square test needs two non-empty series"));
    }
    let total = (na + nb) as f64;
    let mut statistic = 0.0;
    let mut kept = 0;
    for t in Theta::ALL {
        let pooled = (a.count(t) + b.count(t)) as f64;
        if pooled == 0.0 {
            continue;
        }
        kept += 1;
        for (series, n) in [(a, na), (b, nb)] {
            let expected = pooled * n as f64 / total;
            let diff = series.count(t) as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    if kept <= 1 {
        return Ok(ChiSquare {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
        });
    }
    let df = kept - 1;
    Ok(ChiSquare {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df).clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub algorithms: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Header row of algorithm names, then one row of probabilities per
    /// algorithm.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.algorithms)?;
        for row in &self.values {
            w.write_record(row.iter().map(|v| format!("{v:.9}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean over `instances` of the pairwise chi-square p-values between the θ
/// series of `detectors`. Diagonal entries are 1 by convention.
///
/// On instance `i`, a detector named `name` uses the master seed
/// `derive_seed(seed, [i, hash(name)])` for its θ series.
pub fn similarity_matrix(
    detectors: &[&dyn Detector],
    instances: &[MultiGroundTruth],
    runs: usize,
    alpha: f64,
    seed: u64,
) -> Result<SimilarityMatrix> {
    if detectors.len() < 2 {
        return Err(Error::param(
            "similarity matrix needs at least two algorithms",
        ));
    }
    if instances.is_empty() {
        return Err(Error::param("similarity matrix needs at least one graph"));
    }
    let d = detectors.len();
    let mut sum = vec![vec![0.0; d]; d];
    for (i, inst) in instances.iter().enumerate() {
        let series = detectors
            .iter()
            .map(|det| {
                let stream = derive_seed(seed, &[i as u64, hash_str(det.name())]);
                theta_series(*det, &inst.graph, &inst.t1, &inst.t2, runs, alpha, stream)
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..d {
            for b in a + 1..d {
                let p = chi_square_homogeneity(&series[a], &series[b])?.p_value;
                sum[a][b] += p;
                sum[b][a] += p;
            }
        }
    }
    let count = instances.len() as f64;
    let values = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| if a == b { 1.0 } else { sum[a][b] / count })
                .collect()
        })
        .collect();
    Ok(SimilarityMatrix {
        algorithms: detectors.iter().map(|d| d.name().to_string()).collect(),
        values,
    })
}
