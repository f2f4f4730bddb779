//! LFR-style benchmark graphs with planted communities.
//!
//! Degrees and community sizes follow truncated discrete power laws. Each
//! vertex splits its degree into `ceil((1 - mu) * degree)` internal stubs and
//! the rest external; internal stubs are matched inside the vertex's
//! community and external stubs across communities. Matching conflicts are
//! repaired by edge swaps, and whatever cannot be repaired is dropped. This is
//! not a bit-compatible port of the reference LFR program; its fidelity is
//! judged by the realized mixing parameter and degree statistics.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};
use crate::partition::Partition;
use crate::seed::{rng_from_seed, SeededRng};

/// Edge-swap sweeps attempted before conflicting stubs are dropped.
pub const REWIRE_SWEEPS: usize = 10;
const SWAP_ATTEMPTS_PER_SWEEP: usize = 20;
const SIZE_RESAMPLES: usize = 200;
const TRUTH_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct LfrParams {
    pub n: usize,
    /// Mixing parameter: the average fraction of a vertex's edges that leave
    /// its community.
    pub mu: f64,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub degree_exponent: f64,
    pub community_exponent: f64,
    pub min_community: usize,
    pub max_community: usize,
    pub seed: u64,
}

impl LfrParams {
    /// The standard evaluation setting: average degree 20, maximum degree and
    /// maximum community size `0.1 n`, exponents -2 (degrees) and -1
    /// (community sizes), minimum community size `max(10, ceil(avg / 2))`.
    pub fn benchmark(n: usize, mu: f64, seed: u64) -> Self {
        let avg_degree = 20.0;
        let tenth = n / 10;
        LfrParams {
            n,
            mu,
            avg_degree,
            max_degree: tenth,
            degree_exponent: -2.0,
            community_exponent: -1.0,
            min_community: 10usize.max((avg_degree / 2.0).ceil() as usize),
            max_community: tenth,
            seed,
        }
    }

    /// One overlay of a multi-ground-truth graph: no mixing and community
    /// sizes between `0.2 n` and `0.3 n`, so a truth has about four blocks.
    pub fn multi_truth(n: usize, seed: u64) -> Self {
        LfrParams {
            mu: 0.0,
            min_community: (n as f64 * 0.2).ceil() as usize,
            max_community: (n as f64 * 0.3).floor() as usize,
            ..Self::benchmark(n, 0.0, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::param(msg));
        if !(0.0..1.0).contains(&self.mu) {
            return fail(format!("mu must lie in [0, 1), got {}", self.mu));
        }
        if !(self.avg_degree > 0.0 && self.avg_degree < self.max_degree as f64) {
            return fail(format!(
                "need 0 < avg_degree < max_degree (got {} and {})",
                self.avg_degree, self.max_degree
            ));
        }
        if self.max_degree >= self.n {
            return fail(format!(
                "max_degree {} must be below n = {}",
                self.max_degree, self.n
            ));
        }
        if !(self.degree_exponent < 0.0 && self.community_exponent < 0.0) {
            return fail("power-law exponents must be negative".into());
        }
        if !(1 <= self.min_community
            && self.min_community <= self.max_community
            && self.max_community <= self.n)
        {
            return fail(format!(
                "need 1 <= min_community <= max_community <= n (got {}, {}, {})",
                self.min_community, self.max_community, self.n
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthGraph {
    pub graph: Graph,
    pub truth: Partition,
    pub realized_mu: f64,
    /// The degree sequence before wiring; realized degrees fall short of it
    /// by dropped stubs only.
    pub sampled_degrees: Vec<usize>,
    pub dropped_stubs: usize,
}

/// A graph carrying two independent planted partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGroundTruth {
    pub graph: Graph,
    pub t1: Partition,
    pub t2: Partition,
}

/// `P(x) ∝ x^exponent` on the integers `x_min..=x_max`, sampled by inverting
/// the cumulative distribution.
#[derive(Debug, Clone)]
pub struct DiscretePowerLaw {
    x_min: usize,
    cdf: Vec<f64>,
}

impl DiscretePowerLaw {
    pub fn new(exponent: f64, x_min: usize, x_max: usize) -> Result<Self> {
        if x_min == 0 || x_min > x_max {
            return Err(Error::param(format!(
                "power-law support [{x_min}, {x_max}] must satisfy 1 <= x_min <= x_max"
            )));
        }
        if !exponent.is_finite() {
            return Err(Error::param("power-law exponent must be finite"));
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (x_min..=x_max)
            .map(|x| {
                acc += (x as f64).powf(exponent);
                acc
            })
            .collect();
        for c in &mut cdf {
            *c /= acc;
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(DiscretePowerLaw { x_min, cdf })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.x_min
            + self
                .cdf
                .partition_point(|&c| c <= u)
                .min(self.cdf.len() - 1)
    }

    pub fn cdf(&self, x: usize) -> f64 {
        if x < self.x_min {
            0.0
        } else {
            self.cdf[(x - self.x_min).min(self.cdf.len() - 1)]
        }
    }
}

pub fn sample_power_law<R: Rng + ?Sized>(
    count: usize,
    exponent: f64,
    x_min: usize,
    x_max: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let dist = DiscretePowerLaw::new(exponent, x_min, x_max)?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Mean of the truncated power law on `x_min..=x_max`.
pub fn truncated_mean(exponent: f64, x_min: usize, x_max: usize) -> f64 {
    let (num, den) = (x_min..=x_max).fold((0.0, 0.0), |(num, den), x| {
        let w = (x as f64).powf(exponent);
        (num + x as f64 * w, den + w)
    });
    num / den
}

/// Smallest `x_min` whose truncated power-law mean on `[x_min, max_degree]`
/// reaches `avg_degree`.
pub fn solve_min_degree(avg_degree: f64, exponent: f64, max_degree: usize) -> Result<usize> {
    if !(avg_degree < max_degree as f64) || max_degree == 0 {
        return Err(Error::param(format!(
            "average degree {avg_degree} must be below the maximum degree {max_degree}"
        )));
    }
    (1..=max_degree)
        .find(|&x_min| truncated_mean(exponent, x_min, max_degree) >= avg_degree)
        .ok_or_else(|| Error::Generation {
            stage: "minimum degree",
            message: format!("no x_min reaches mean {avg_degree} below {max_degree}"),
        })
}

/// Draws community sizes until they cover `n`, then trims the last one so the
/// total is exactly `n`.
///
/// A trimmed remainder below `min_size` is folded into the largest blocks
/// that still have room under `max_size`; failing that, the largest blocks
/// give up vertices to lift it to `min_size`. Only when neither is possible
/// does an undersized block remain.
pub fn sample_community_sizes<R: Rng + ?Sized>(
    n: usize,
    exponent: f64,
    min_size: usize,
    max_size: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n < min_size || max_size > n {
        return Err(Error::param(format!(
            "community sizes [{min_size}, {max_size}] are infeasible for n = {n}"
        )));
    }
    let dist = DiscretePowerLaw::new(exponent, min_size, max_size)?;
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < n {
        let s = dist.sample(rng);
        sizes.push(s);
        total += s;
    }
    let last = sizes.pop().unwrap();
    let mut rest = n - (total - last);
    if rest >= min_size {
        sizes.push(rest);
        return Ok(sizes);
    }

    let mut by_size: Vec<usize> = (0..sizes.len()).collect();
    by_size.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let room: usize = sizes.iter().map(|&s| max_size - s).sum();
    if room >= rest {
        for &i in &by_size {
            let add = (max_size - sizes[i]).min(rest);
            sizes[i] += add;
            rest -= add;
            if rest == 0 {
                break;
            }
        }
        return Ok(sizes);
    }
    let spare: usize = sizes.iter().map(|&s| s - min_size).sum();
    if spare >= min_size - rest {
        let mut need = min_size - rest;
        for &i in &by_size {
            let take = (sizes[i] - min_size).min(need);
            sizes[i] -= take;
            need -= take;
            if need == 0 {
                break;
            }
        }
        sizes.push(min_size);
    } else {
        sizes.push(rest);
    }
    Ok(sizes)
}

/// Mean over vertices with at least one edge of the fraction of their edges
/// that leave their community.
pub fn realized_mixing(g: &Graph, truth: &Partition) -> f64 {
    let mut sum = 0.0;
    let mut counted = 0usize;
    for v in 0..g.vertex_count() {
        let d = g.degree(v);
        if d == 0 {
            continue;
        }
        let c = truth.label(v);
        let out = g
            .neighbors(v)
            .iter()
            .filter(|&&w| truth.label(w) != c)
            .count();
        sum += out as f64 / d as f64;
        counted += 1;
    }
    if counted == 0 {
        0.0
    } else {
        sum / counted as f64
    }
}

fn internal_stubs(degree: usize, mu: f64) -> usize {
    // the small offset keeps exact products like 0.9 * 10 from rounding up
    (((1.0 - mu) * degree as f64) - 1e-9).ceil().max(0.0) as usize
}

// Every vertex fits when, for each need level, the vertices needing at least
// that much internal room do not outnumber the seats in communities offering
// it. `needs` and `sizes` must be sorted in descending order.
fn assignment_feasible(needs: &[usize], sizes: &[usize]) -> bool {
    let mut seats = 0;
    let mut next = 0;
    for (placed, &need) in needs.iter().enumerate() {
        while next < sizes.len() && sizes[next] > need {
            seats += sizes[next];
            next += 1;
        }
        if seats < placed + 1 {
            return false;
        }
    }
    true
}

/// Places vertices into communities, largest internal need first, choosing
/// among communities that can host the vertex with probability proportional
/// to their free seats. Returns the membership and the per-vertex internal
/// degree, capped at community size - 1 where no community could host it.
fn assign_members<R: Rng + ?Sized>(
    needs: &[usize],
    sizes: &[usize],
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    let n = needs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| needs[b].cmp(&needs[a]));

    // open communities, largest first
    let mut open: Vec<usize> = (0..sizes.len()).collect();
    open.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut free = sizes.to_vec();
    let mut member = vec![0usize; n];
    let mut internal = needs.to_vec();

    for v in order {
        let hosts = open.partition_point(|&c| sizes[c] > needs[v]);
        let slot = if hosts == 0 {
            internal[v] = sizes[open[0]] - 1;
            0
        } else {
            loop {
                let i = rng.random_range(0..hosts);
                let c = open[i];
                if rng.random_range(0..sizes[c]) < free[c] {
                    break i;
                }
            }
        };
        let c = open[slot];
        member[v] = c;
        free[c] -= 1;
        if free[c] == 0 {
            open.remove(slot);
        }
    }
    (member, internal)
}

fn norm(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Random stub matching within one pool. Self-loops, repeated edges and pairs
/// rejected by `allowed` are repaired by swapping endpoints with random good
/// edges for up to [`REWIRE_SWEEPS`] sweeps, then dropped. Returns the edges
/// and the number of dropped stubs.
fn wire_pool<R, F>(mut stubs: Vec<usize>, allowed: F, rng: &mut R) -> (Vec<(usize, usize)>, usize)
where
    R: Rng + ?Sized,
    F: Fn(usize, usize) -> bool,
{
    stubs.shuffle(rng);
    let mut dropped = 0;
    if stubs.len() % 2 == 1 {
        stubs.pop();
        dropped += 1;
    }
    let mut edges: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    let mut present = HashSet::with_capacity(edges.len());
    let mut good = vec![false; edges.len()];
    let mut bad = Vec::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        if a != b && allowed(a, b) && present.insert(norm(a, b)) {
            good[i] = true;
        } else {
            bad.push(i);
        }
    }

    for _ in 0..REWIRE_SWEEPS {
        if bad.is_empty() {
            break;
        }
        let mut unresolved = Vec::new();
        for &i in &bad {
            let (a, b) = edges[i];
            let mut fixed = false;
            for _ in 0..SWAP_ATTEMPTS_PER_SWEEP {
                let j = rng.random_range(0..edges.len());
                if !good[j] {
                    continue;
                }
                let (mut c, mut d) = edges[j];
                if rng.random::<bool>() {
                    std::mem::swap(&mut c, &mut d);
                }
                let (e1, e2) = (norm(a, c), norm(b, d));
                if a == c
                    || b == d
                    || e1 == e2
                    || !allowed(a, c)
                    || !allowed(b, d)
                    || present.contains(&e1)
                    || present.contains(&e2)
                {
                    continue;
                }
                present.remove(&norm(c, d));
                present.insert(e1);
                present.insert(e2);
                edges[i] = (a, c);
                edges[j] = (b, d);
                good[i] = true;
                fixed = true;
                break;
            }
            if !fixed {
                unresolved.push(i);
            }
        }
        bad = unresolved;
    }

    dropped += 2 * bad.len();
    let wired = edges
        .into_iter()
        .zip(good)
        .filter_map(|(e, ok)| ok.then_some(e))
        .collect();
    (wired, dropped)
}

/// Generates one benchmark graph with its planted partition.
pub fn lfr_generate(params: &LfrParams) -> Result<GroundTruthGraph> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let n = params.n;

    let x_min = solve_min_degree(params.avg_degree, params.degree_exponent, params.max_degree)?;
    let degrees = sample_power_law(
        n,
        params.degree_exponent,
        x_min,
        params.max_degree,
        &mut rng,
    )?;
    let needs: Vec<usize> = degrees
        .iter()
        .map(|&d| internal_stubs(d, params.mu))
        .collect();

    let mut sorted_needs = needs.clone();
    sorted_needs.sort_unstable_by(|a, b| b.cmp(a));
    let mut sizes = Vec::new();
    for _ in 0..SIZE_RESAMPLES {
        sizes = sample_community_sizes(
            n,
            params.community_exponent,
            params.min_community,
            params.max_community,
            &mut rng,
        )?;
        let mut sorted = sizes.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        if assignment_feasible(&sorted_needs, &sorted) {
            break;
        }
    }

    let (member, internal) = assign_members(&needs, &sizes, &mut rng);

    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    let mut external_stubs = Vec::new();
    for v in 0..n {
        pools[member[v]].extend(std::iter::repeat_n(v, internal[v]));
        external_stubs.extend(std::iter::repeat_n(v, degrees[v] - internal[v]));
    }

    let mut edges = Vec::new();
    let mut dropped_stubs = 0;
    for pool in pools {
        let (wired, dropped) = wire_pool(pool, |_, _| true, &mut rng);
        edges.extend(wired);
        dropped_stubs += dropped;
    }
    let (wired, dropped) = wire_pool(external_stubs, |a, b| member[a] != member[b], &mut rng);
    edges.extend(wired);
    dropped_stubs += dropped;

    let graph = Graph::from_edges(n, edges)?;
    let truth = Partition::from_labels(member);
    let realized_mu = realized_mixing(&graph, &truth);
    Ok(GroundTruthGraph {
        graph,
        truth,
        realized_mu,
        sampled_degrees: degrees,
        dropped_stubs,
    })
}

/// Union of the edges of `a` and of `b` relabeled by `perm` (vertex `v` of
/// `b` becomes `perm[v]`).
pub fn overlay(a: &Graph, b: &Graph, perm: &[usize]) -> Result<Graph> {
    let n = a.vertex_count();
    if b.vertex_count() != n || perm.len() != n {
        return Err(Error::param(
            "overlay needs equal vertex counts and a full permutation",
        ));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::param("overlay relabeling is not a permutation"));
        }
    }
    Graph::from_edges(
        n,
        a.edges().chain(b.edges().map(|(u, v)| (perm[u], perm[v]))),
    )
}

fn four_block_truth(params: &LfrParams, rng: &mut SeededRng) -> Result<GroundTruthGraph> {
    for _ in 0..TRUTH_RESAMPLES {
        let inst = lfr_generate(&LfrParams {
            seed: rng.next_u64(),
            ..params.clone()
        })?;
        if inst.truth.community_count() == 4 {
            return Ok(inst);
        }
    }
    Err(Error::Generation {
        stage: "multi-ground-truth",
        message: format!("no 4-community instance in {TRUTH_RESAMPLES} draws"),
    })
}

/// Two independent four-community graphs without mixing, the second under a
/// uniformly random relabeling, merged into one graph carrying both truths.
pub fn multi_ground_truth(params: &LfrParams) -> Result<MultiGroundTruth> {
    params.validate()?;
    if params.mu != 0.0 {
        return Err(Error::param("multi-ground-truth overlays need mu = 0"));
    }
    let mut rng = rng_from_seed(params.seed);
    let a = four_block_truth(params, &mut rng)?;
    let b = four_block_truth(params, &mut rng)?;
    let mut perm: Vec<usize> = (0..params.n).collect();
    perm.shuffle(&mut rng);

    let graph = overlay(&a.graph, &b.graph, &perm)?;
    let mut t2 = vec![0usize; params.n];
    for (v, &p) in perm.iter().enumerate() {
        t2[p] = b.truth.label(v);
    }
    Ok(MultiGroundTruth {
        graph,
        t1: a.truth,
        t2: Partition::from_labels(t2),
    })
}

/// True when the graph has a single connected component.
pub fn is_connected(g: &Graph) -> bool {
    connected_components(g).component_count() <= 1
}
