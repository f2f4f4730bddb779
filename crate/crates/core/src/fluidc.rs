//! Fluid Communities.
//!
//! `k` communities are seeded on distinct random vertices and expand by
//! asynchronous propagation. Each community `c` carries a density
//! `1 / |c|`; a vertex moves to the community with the largest summed density
//! over its ego network (itself plus its neighbors), keeping its current
//! community whenever that community is among the maxima. A community reduced
//! to a single vertex has density 1 on that vertex, which no other community
//! can exceed, so no community is ever eliminated.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{connected_components, induced_subgraph, Graph};
use crate::metrics::modularity;
use crate::partition::Partition;
use crate::seed::{derive_seed, rng_from_seed};

pub const UNASSIGNED: usize = usize::MAX;

pub const DEFAULT_MAX_SUPERSTEPS: usize = 100;

/// Relative tolerance under which two summed densities count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FluidState {
    k: usize,
    community_of: Vec<usize>,
    community_size: Vec<usize>,
    assigned: usize,
    // Scratch buffers reused across updates. `ego_count` is all zeros
    // between calls.
    ego_count: Vec<usize>,
    touched: Vec<usize>,
    candidates: Vec<usize>,
    order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidResult {
    pub partition: Partition,
    pub supersteps: usize,
    pub converged: bool,
}

/// Seeds `k` communities on distinct vertices drawn uniformly without
/// replacement. Everything else starts unassigned.
pub fn init_communities<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Result<FluidState> {
    FluidState::new(g, k, rng)
}

impl FluidState {
    pub fn new<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Result<Self> {
        let n = g.vertex_count();
        if k == 0 || k > n {
            return Err(Error::param(format!(
                "k must satisfy 0 < k <= |V| (k = {k}, |V| = {n})"
            )));
        }
        let mut community_of = vec![UNASSIGNED; n];
        for (c, v) in rand::seq::index::sample(rng, n, k).into_iter().enumerate() {
            community_of[v] = c;
        }
        Ok(FluidState {
            k,
            community_of,
            community_size: vec![1; k],
            assigned: k,
            ego_count: vec![0; k],
            touched: Vec::new(),
            candidates: Vec::new(),
            order: (0..n).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.community_of.len()
    }

    pub fn community(&self, v: usize) -> Option<usize> {
        match self.community_of[v] {
            UNASSIGNED => None,
            c => Some(c),
        }
    }

    pub fn community_size(&self, c: usize) -> usize {
        self.community_size[c]
    }

    /// `1 / |c|`, derived from the live size table.
    pub fn density(&self, c: usize) -> f64 {
        1.0 / self.community_size[c] as f64
    }

    pub fn assigned_count(&self) -> usize {
        self.assigned
    }

    pub fn is_fully_assigned(&self) -> bool {
        self.assigned == self.community_of.len()
    }

    /// Moves `v` to community `c` (or unassigns it when `c` is `None`) and
    /// updates the size table. Meant for tests and external drivers; the
    /// algorithm itself only moves vertices through [`update_vertex`].
    ///
    /// [`update_vertex`]: FluidState::update_vertex
    pub fn set_community(&mut self, v: usize, c: Option<usize>) {
        let old = self.community_of[v];
        if old != UNASSIGNED {
            self.community_size[old] -= 1;
            self.assigned -= 1;
        }
        match c {
            Some(c) => {
                assert!(c < self.k, "community {c} out of range");
                self.community_of[v] = c;
                self.community_size[c] += 1;
                self.assigned += 1;
            }
            None => self.community_of[v] = UNASSIGNED,
        }
    }

    // Fills `self.candidates` with the communities of maximal summed density
    // over the ego network of `v`, in first-encountered order (v first, then
    // neighbors ascending).
    fn collect_candidates(&mut self, g: &Graph, v: usize) {
        self.touched.clear();
        self.candidates.clear();

        let own = self.community_of[v];
        if own != UNASSIGNED {
            self.ego_count[own] += 1;
            self.touched.push(own);
        }
        for &w in g.neighbors(v) {
            let c = self.community_of[w];
            if c == UNASSIGNED {
                continue;
            }
            if self.ego_count[c] == 0 {
                self.touched.push(c);
            }
            self.ego_count[c] += 1;
        }

        // Summed density is count / size, rounded once.
        let mut best = 0.0f64;
        for &c in &self.touched {
            let sum = self.ego_count[c] as f64 / self.community_size[c] as f64;
            if sum > best {
                best = sum;
            }
        }
        let floor = best - best * TIE_TOLERANCE;
        for &c in &self.touched {
            let sum = self.ego_count[c] as f64 / self.community_size[c] as f64;
            if sum >= floor {
                self.candidates.push(c);
            }
            self.ego_count[c] = 0;
        }
    }

    /// The candidate set of `v`: communities maximizing the summed density
    /// over `{v} ∪ Γ(v)`. Empty when nothing in the ego network is assigned.
    pub fn candidates(&mut self, g: &Graph, v: usize) -> Vec<usize> {
        self.collect_candidates(g, v);
        self.candidates.clone()
    }

    /// Applies the update rule to `v`. Returns whether its community changed.
    pub fn update_vertex<R: Rng + ?Sized>(&mut self, g: &Graph, v: usize, rng: &mut R) -> bool {
        self.collect_candidates(g, v);
        let current = self.community_of[v];
        if self.candidates.is_empty() || self.candidates.contains(&current) {
            return false;
        }
        let next = self.candidates[rng.random_range(0..self.candidates.len())];
        if current != UNASSIGNED {
            self.community_size[current] -= 1;
            debug_assert!(
                self.community_size[current] >= 1,
                "community {current} eliminated by moving vertex {v}"
            );
        } else {
            self.assigned += 1;
        }
        self.community_of[v] = next;
        self.community_size[next] += 1;
        true
    }

    /// One pass over all vertices in a fresh uniformly random order. Returns
    /// the number of vertices whose community changed.
    pub fn superstep<R: Rng + ?Sized>(&mut self, g: &Graph, rng: &mut R) -> usize {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(rng);
        let changed = order
            .iter()
            .filter(|&&v| self.update_vertex(g, v, rng))
            .count();
        self.order = order;
        changed
    }

    /// Checks the size table against the assignment and that every community
    /// is non-empty.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut sizes = vec![0usize; self.k];
        let mut assigned = 0;
        for &c in &self.community_of {
            if c != UNASSIGNED {
                if c >= self.k {
                    return Err(format!("label {c} outside 0..{}", self.k));
                }
                sizes[c] += 1;
                assigned += 1;
            }
        }
        if sizes != self.community_size {
            return Err(format!(
                "size table {:?} disagrees with assignment {:?}",
                self.community_size, sizes
            ));
        }
        if assigned != self.assigned {
            return Err(format!("assigned count {} != {}", self.assigned, assigned));
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(format!("community {c} is empty"));
        }
        Ok(())
    }

    /// The current assignment as a partition, if every vertex is assigned.
    pub fn to_partition(&self) -> Option<Partition> {
        self.is_fully_assigned()
            .then(|| Partition::from_labels(self.community_of.iter().copied()))
    }

    pub fn raw_labels(&self) -> &[usize] {
        &self.community_of
    }
}

/// Runs Fluid Communities on a connected graph.
///
/// Supersteps repeat until one of them changes no vertex or `max_supersteps`
/// is reached. Supersteps that end with unassigned vertices never count as
/// converged and are not cut short by the cap; on a connected graph every
/// vertex is reached within (diameter) supersteps.
pub fn run_fluidc<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    rng: &mut R,
    max_supersteps: usize,
) -> Result<FluidResult> {
    run_fluidc_timed(g, k, rng, max_supersteps).map(|(r, _)| r)
}

/// Like [`run_fluidc`], also returning the wall time of the superstep loop.
pub fn run_fluidc_timed<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    rng: &mut R,
    max_supersteps: usize,
) -> Result<(FluidResult, Duration)> {
    if max_supersteps == 0 {
        return Err(Error::param("max_supersteps must be positive"));
    }
    let components = connected_components(g).component_count();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let mut state = FluidState::new(g, k, rng)?;

    let start = Instant::now();
    let mut supersteps = 0;
    let mut converged = false;
    loop {
        let changed = state.superstep(g, rng);
        supersteps += 1;
        if state.is_fully_assigned() {
            if changed == 0 {
                converged = true;
                break;
            }
            if supersteps >= max_supersteps {
                break;
            }
        }
    }
    let elapsed = start.elapsed();

    let partition = state
        .to_partition()
        .expect("connected graph is fully assigned when the loop exits");
    Ok((
        FluidResult {
            partition,
            supersteps,
            converged,
        },
        elapsed,
    ))
}

/// Splits `k` over components proportionally to their sizes (largest
/// remainder), giving every component at least one and at most its size.
pub fn allocate_k(component_sizes: &[usize], k: usize) -> Result<Vec<usize>> {
    let parts = component_sizes.len();
    let n: usize = component_sizes.iter().sum();
    if k < parts {
        return Err(Error::param(format!(
            "k = {k} is smaller than the number of connected components ({parts})"
        )));
    }
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds |V| = {n}")));
    }
    let quota = |i: usize| -> (usize, u128) {
        let num = k as u128 * component_sizes[i] as u128;
        ((num / n as u128) as usize, num % n as u128)
    };
    let mut alloc: Vec<usize> = (0..parts)
        .map(|i| quota(i).0.max(1).min(component_sizes[i]))
        .collect();
    let mut total: usize = alloc.iter().sum();

    let mut by_remainder: Vec<usize> = (0..parts).collect();
    by_remainder.sort_by(|&a, &b| quota(b).1.cmp(&quota(a).1).then(a.cmp(&b)));

    while total < k {
        for &i in &by_remainder {
            if total == k {
                break;
            }
            if alloc[i] < component_sizes[i] {
                alloc[i] += 1;
                total += 1;
            }
        }
    }
    while total > k {
        for &i in by_remainder.iter().rev() {
            if total == k {
                break;
            }
            if alloc[i] > 1 {
                alloc[i] -= 1;
                total -= 1;
            }
        }
    }
    Ok(alloc)
}

/// Runs Fluid Communities independently on each connected component, with
/// `k` split by [`allocate_k`], and concatenates the label ranges.
/// `supersteps` is the maximum over components.
pub fn run_fluidc_disconnected<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    rng: &mut R,
    max_supersteps: usize,
) -> Result<FluidResult> {
    run_fluidc_disconnected_timed(g, k, rng, max_supersteps).map(|(r, _)| r)
}

pub fn run_fluidc_disconnected_timed<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    rng: &mut R,
    max_supersteps: usize,
) -> Result<(FluidResult, Duration)> {
    let cc = connected_components(g);
    if cc.component_count() <= 1 {
        return run_fluidc_timed(g, k, rng, max_supersteps);
    }
    let alloc = allocate_k(&cc.component_sizes, k)?;

    let mut labels = vec![0usize; g.vertex_count()];
    let mut offset = 0;
    let mut supersteps = 0;
    let mut converged = true;
    let mut elapsed = Duration::ZERO;
    for (members, &k_part) in cc.members().iter().zip(&alloc) {
        let sub = induced_subgraph(g, members)?;
        let (res, t) = run_fluidc_timed(&sub.graph, k_part, rng, max_supersteps)?;
        for (local, &global) in sub.original.iter().enumerate() {
            labels[global] = offset + res.partition.label(local);
        }
        offset += k_part;
        supersteps = supersteps.max(res.supersteps);
        converged &= res.converged;
        elapsed += t;
    }
    Ok((
        FluidResult {
            partition: Partition::from_labels(labels),
            supersteps,
            converged,
        },
        elapsed,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BestKOptions {
    pub k_min: usize,
    pub k_max: usize,
    pub trials_per_k: usize,
}

impl BestKOptions {
    /// `k` in `[2, ceil(sqrt(n))]` with five trials each.
    pub fn default_for(vertex_count: usize) -> Self {
        let k_max = (vertex_count as f64).sqrt().ceil() as usize;
        BestKOptions {
            k_min: 2.min(vertex_count.max(1)),
            k_max: k_max.max(2).min(vertex_count.max(1)),
            trials_per_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestK {
    pub result: FluidResult,
    pub k: usize,
    pub modularity: f64,
}

/// Tries every `k` in the range `trials_per_k` times and keeps the partition
/// with the highest modularity. Ties go to the smaller `k`, then the earlier
/// trial. Trial `t` for a given `k` uses the seed
/// `derive_seed(seed, [k, t])`, so trials may run in parallel.
pub fn best_k_by_modularity(
    g: &Graph,
    opts: BestKOptions,
    seed: u64,
    max_supersteps: usize,
) -> Result<BestK> {
    best_k_by_modularity_timed(g, opts, seed, max_supersteps).map(|(b, _)| b)
}

/// Returns the superstep-loop time of the winning run alongside the result.
pub fn best_k_by_modularity_timed(
    g: &Graph,
    opts: BestKOptions,
    seed: u64,
    max_supersteps: usize,
) -> Result<(BestK, Duration)> {
    let BestKOptions {
        k_min,
        k_max,
        trials_per_k,
    } = opts;
    if k_min == 0 || k_min > k_max || k_max > g.vertex_count() {
        return Err(Error::param(format!(
            "k range [{k_min}, {k_max}] invalid for |V| = {}",
            g.vertex_count()
        )));
    }
    if trials_per_k == 0 {
        return Err(Error::param("trials_per_k must be positive"));
    }
    let jobs: Vec<(usize, usize)> = (k_min..=k_max)
        .flat_map(|k| (0..trials_per_k).map(move |t| (k, t)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(k, t)| {
            let mut rng = rng_from_seed(derive_seed(seed, &[k as u64, t as u64]));
            let (result, elapsed) = run_fluidc_disconnected_timed(g, k, &mut rng, max_supersteps)?;
            let q = modularity(g, &result.partition)?;
            Ok((k, result, q, elapsed))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(BestK, Duration)> = None;
    for (k, result, q, elapsed) in runs {
        if best.as_ref().is_none_or(|(b, _)| q > b.modularity) {
            best = Some((
                BestK {
                    result,
                    k,
                    modularity: q,
                },
                elapsed,
            ));
        }
    }
    Ok(best.expect("at least one trial"))
}
