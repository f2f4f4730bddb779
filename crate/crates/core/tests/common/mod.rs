//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use fluidc::Graph;
use rand::Rng;

/// A random connected graph: a random spanning tree plus extra edges with
/// probability `p`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, blocks: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..blocks)).collect()
}

/// `Q = (1/2m) Σ_{u,v} [A_uv − d_u d_v / 2m] δ(c_u, c_v)` over all ordered
/// pairs, self-pairs included.
pub fn modularity_pairwise(g: &Graph, labels: &[usize]) -> f64 {
    let n = g.vertex_count();
    let two_m = 2.0 * g.edge_count() as f64;
    let mut q = 0.0;
    for u in 0..n {
        for v in 0..n {
            if labels[u] != labels[v] {
                continue;
            }
            let a = if g.has_edge(u, v) { 1.0 } else { 0.0 };
            q += a - (g.degree(u) * g.degree(v)) as f64 / two_m;
        }
    }
    q / two_m
}

fn entropy_direct(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    -distinct
        .iter()
        .map(|&l| {
            let p = labels.iter().filter(|&&x| x == l).count() as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Geometric NMI straight from the definition, scanning raw label vectors.
pub fn nmi_direct(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut la: Vec<usize> = a.to_vec();
    la.sort_unstable();
    la.dedup();
    let mut lb: Vec<usize> = b.to_vec();
    lb.sort_unstable();
    lb.dedup();
    let (ha, hb) = (entropy_direct(a), entropy_direct(b));
    if la.len() == 1 && lb.len() == 1 {
        return 1.0;
    }
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for &x in &la {
        for &y in &lb {
            let nxy = (0..a.len()).filter(|&i| a[i] == x && b[i] == y).count() as f64;
            if nxy == 0.0 {
                continue;
            }
            let nx = a.iter().filter(|&&l| l == x).count() as f64;
            let ny = b.iter().filter(|&&l| l == y).count() as f64;
            mi += nxy / n * (n * nxy / (nx * ny)).ln();
        }
    }
    (mi / (ha * hb).sqrt()).clamp(0.0, 1.0)
}

/// Component count by union-find.
pub fn component_count_union_find(g: &Graph) -> usize {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut x = x;
        while parent[x] != r {
            let next = parent[x];
            parent[x] = r;
            x = next;
        }
        r
    }
    for (u, v) in g.edges() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
        }
    }
    (0..n).filter(|&v| find(&mut parent, v) == v).count()
}

/// Union-find "same component" relation as root labels.
pub fn union_find_roots(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &[usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    for (u, v) in g.edges() {
        let (ru, rv) = (root(&parent, u), root(&parent, v));
        if ru != rv {
            parent[ru] = rv;
        }
    }
    (0..n).map(|v| root(&parent, v)).collect()
}

/// Pearson chi-square of a 2-row table with the textbook expected counts
/// `row_total * col_total / grand_total`, skipping all-zero columns.
pub fn chi_square_direct(a: &[usize], b: &[usize]) -> (f64, usize) {
    let ra: f64 = a.iter().sum::<usize>() as f64;
    let rb: f64 = b.iter().sum::<usize>() as f64;
    let total = ra + rb;
    let mut stat = 0.0;
    let mut kept = 0usize;
    for j in 0..a.len() {
        let col = (a[j] + b[j]) as f64;
        if col == 0.0 {
            continue;
        }
        kept += 1;
        for (obs, row) in [(a[j] as f64, ra), (b[j] as f64, rb)] {
            let expected = row * col / total;
            stat += (obs - expected).powi(2) / expected;
        }
    }
    (stat, kept.saturating_sub(1))
}

fn gamma_half_integer(k: usize) -> f64 {
    // Γ(k/2) by Γ(x + 1) = x Γ(x) from Γ(1/2) = √π or Γ(1) = 1
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    let mut g = if k.is_multiple_of(2) {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    while x < k as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Chi-square survival function by Simpson integration of the density after
/// the substitution `t = u²`, which removes the singularity at zero.
pub fn chi_square_sf_simpson(x: f64, df: usize) -> f64 {
    let k = df as f64;
    let norm = 2.0 / (2f64.powf(k / 2.0) * gamma_half_integer(df));
    let f = |u: f64| norm * u.powf(k - 1.0) * (-u * u / 2.0).exp();
    let upper = x.sqrt();
    let steps = 200_000;
    let h = upper / steps as f64;
    let mut s = f(0.0) + f(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    1.0 - s * h / 3.0
}

/// Two-sample Kolmogorov–Smirnov distance between discrete samples.
pub fn ks_distance(a: &[usize], b: &[usize]) -> f64 {
    let mut points: Vec<usize> = a.iter().chain(b).copied().collect();
    points.sort_unstable();
    points.dedup();
    let cdf = |s: &[usize], x: usize| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    points
        .iter()
        .map(|&x| (cdf(a, x) - cdf(b, x)).abs())
        .fold(0.0, f64::max)
}

/// Inverse-CDF reference sampler for `P(x) ∝ x^exponent` on `[lo, hi]`,
/// built from an explicit table.
pub fn reference_power_law<R: Rng>(
    rng: &mut R,
    exponent: f64,
    lo: usize,
    hi: usize,
    count: usize,
) -> Vec<usize> {
    let weights: Vec<f64> = (lo..=hi).map(|x| (x as f64).powf(exponent)).collect();
    let total: f64 = weights.iter().sum();
    (0..count)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    return lo + i;
                }
                u -= w;
            }
            hi
        })
        .collect()
}

/// Sizes of label blocks.
pub fn block_sizes(labels: &[usize]) -> Vec<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    counts.into_values().collect()
}
