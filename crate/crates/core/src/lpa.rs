//! Asynchronous label propagation (Raghavan, Albert and Kumara, 2007).
//!
//! Every vertex starts with its own label and repeatedly adopts the label
//! carried by most of its neighbors, visiting vertices in a fresh random
//! order each superstep. A vertex already holding one of the most frequent
//! labels keeps it. The run stops once every vertex holds a most frequent
//! label of its neighborhood.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fluidc::FluidResult;
use crate::graph::Graph;
use crate::partition::Partition;

pub const DEFAULT_MAX_SUPERSTEPS: usize = 100;

struct LabelCounter {
    counts: Vec<usize>,
    touched: Vec<usize>,
}

impl LabelCounter {
    fn new(n: usize) -> Self {
        LabelCounter {
            counts: vec![0; n],
            touched: Vec::new(),
        }
    }

    /// Counts neighbor labels of `v`, returning the maximum count. Leaves the
    /// per-label counts in place until [`clear`](Self::clear).
    fn tally(&mut self, g: &Graph, labels: &[usize], v: usize) -> usize {
        let mut max = 0;
        for &w in g.neighbors(v) {
            let l = labels[w];
            if self.counts[l] == 0 {
                self.touched.push(l);
            }
            self.counts[l] += 1;
            max = max.max(self.counts[l]);
        }
        max
    }

    fn clear(&mut self) {
        for &l in &self.touched {
            self.counts[l] = 0;
        }
        self.touched.clear();
    }
}

/// True when every vertex's label is among the most frequent labels of its
/// neighbors. Vertices without neighbors always qualify.
pub fn is_label_equilibrium(g: &Graph, labels: &[usize]) -> bool {
    equilibrium_with(&mut LabelCounter::new(g.vertex_count()), g, labels)
}

fn equilibrium_with(counter: &mut LabelCounter, g: &Graph, labels: &[usize]) -> bool {
    (0..g.vertex_count()).all(|v| {
        let max = counter.tally(g, labels, v);
        let ok = g.degree(v) == 0 || counter.counts[labels[v]] == max;
        counter.clear();
        ok
    })
}

pub fn run_lpa<R: Rng + ?Sized>(
    g: &Graph,
    rng: &mut R,
    max_supersteps: usize,
) -> Result<FluidResult> {
    run_lpa_timed(g, rng, max_supersteps).map(|(r, _)| r)
}

/// Like [`run_lpa`], also returning the wall time of the superstep loop.
pub fn run_lpa_timed<R: Rng + ?Sized>(
    g: &Graph,
    rng: &mut R,
    max_supersteps: usize,
) -> Result<(FluidResult, Duration)> {
    if max_supersteps == 0 {
        return Err(Error::param("max_supersteps must be positive"));
    }
    let n = g.vertex_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut counter = LabelCounter::new(n);
    let mut candidates = Vec::new();

    let start = Instant::now();
    let mut supersteps = 0;
    let mut converged = false;
    while supersteps < max_supersteps {
        order.shuffle(rng);
        let mut changed = 0usize;
        for &v in &order {
            if g.degree(v) == 0 {
                continue;
            }
            let max = counter.tally(g, &labels, v);
            if counter.counts[labels[v]] != max {
                candidates.clear();
                candidates.extend(
                    counter
                        .touched
                        .iter()
                        .copied()
                        .filter(|&l| counter.counts[l] == max),
                );
                labels[v] = candidates[rng.random_range(0..candidates.len())];
                changed += 1;
            }
            counter.clear();
        }
        supersteps += 1;
        if changed == 0 || equilibrium_with(&mut counter, g, &labels) {
            converged = true;
            break;
        }
    }
    let elapsed = start.elapsed();

    Ok((
        FluidResult {
            partition: Partition::from_labels(labels),
            supersteps,
            converged,
        },
        elapsed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::graph;
    use crate::seed::rng_from_seed;

    #[test]
    fn disjoint_triangles() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let expected = Partition::from_labels([0, 0, 0, 1, 1, 1]);
        for seed in 0..100 {
            let r = run_lpa(&g, &mut rng_from_seed(seed), 100).unwrap();
            assert!(r.converged);
            assert_eq!(r.partition, expected, "seed {seed}");
        }
    }

    #[test]
    fn clique_collapses_to_one_label() {
        let edges: Vec<_> = (0..10)
            .flat_map(|u| (u + 1..10).map(move |v| (u, v)))
            .collect();
        let g = graph(10, &edges);
        for seed in 0..100 {
            let r = run_lpa(&g, &mut rng_from_seed(seed), 100).unwrap();
            assert!(r.converged);
            assert_eq!(r.partition.community_count(), 1, "seed {seed}");
        }
    }

    #[test]
    fn edgeless_graph_keeps_singletons() {
        let g = Graph::empty(5);
        let r = run_lpa(&g, &mut rng_from_seed(0), 100).unwrap();
        assert!(r.converged);
        assert_eq!(r.supersteps, 1);
        assert_eq!(r.partition, Partition::singletons(5));
    }

    #[test]
    fn converged_labels_are_neighborhood_maxima() {
        let g = graph(
            8,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 0),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 4),
                (1, 3),
            ],
        );
        for seed in 0..30 {
            let r = run_lpa(&g, &mut rng_from_seed(seed), 100).unwrap();
            assert!(r.converged);
            assert!(is_label_equilibrium(&g, r.partition.labels()));
        }
    }

    #[test]
    fn rejects_zero_cap() {
        assert!(run_lpa(&Graph::empty(1), &mut rng_from_seed(0), 0).is_err());
    }
}
