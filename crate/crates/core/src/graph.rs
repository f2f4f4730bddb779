//! Immutable undirected simple graphs in compressed adjacency form.
//!
//! Vertex ids are dense `0..vertex_count`. Neighbor lists are sorted, free of
//! duplicates and self-loops, and stored back to back in a single array so a
//! full pass over all adjacency lists is a linear scan.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// A graph with `vertex_count` isolated vertices.
    pub fn empty(vertex_count: usize) -> Self {
        Graph {
            offsets: vec![0; vertex_count + 1],
            neighbors: Vec::new(),
        }
    }

    /// Builds a simple graph from an edge list. Self-loops and repeated edges
    /// (in either orientation) are dropped.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: w,
                        vertex_count,
                    });
                }
            }
            if u != v {
                pairs.push((u.min(v), u.max(v)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::from_sorted_unique(vertex_count, &pairs))
    }

    // `pairs` must be sorted, deduplicated, in range and hold u < v.
    fn from_sorted_unique(vertex_count: usize, pairs: &[(usize, usize)]) -> Self {
        let mut degree = vec![0usize; vertex_count];
        for &(u, v) in pairs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..vertex_count].to_vec();
        let mut neighbors = vec![0usize; 2 * pairs.len()];
        // Visiting pairs in (u, v) order fills every list in ascending order:
        // for a vertex w, lower neighbors arrive as the `v` side of earlier
        // pairs, higher neighbors as the `u` side of later ones.
        for &(u, v) in pairs {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        let g = Graph { offsets, neighbors };
        debug_assert!((0..vertex_count).all(|w| g.neighbors(w).windows(2).all(|p| p[0] < p[1])));
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count() == 0
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Every undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.degree(v)).collect()
    }
}

/// Parses the edge-list text format: one `u v` pair per line, `#` comments,
/// and an optional `# vertices N` header that extends the vertex range.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut declared = 0usize;
    let mut max_id: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("vertices") {
                let n = words.next().and_then(|w| w.parse::<usize>().ok());
                match (n, words.next()) {
                    (Some(n), None) => declared = declared.max(n),
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("malformed vertices header `{trimmed}`"),
                        })
                    }
                }
            }
            continue;
        }
        let (u, v) = parse_pair(trimmed, line_no)?;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }

    let n = declared.max(max_id.map_or(0, |m| m + 1));
    Graph::from_edges(n, edges)
}

pub fn read_edge_list_file(path: impl AsRef<Path>) -> Result<Graph> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file))
}

pub(crate) fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut tokens = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = tokens.next().ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected two integers, missing {what}"),
        })?;
        tok.parse::<usize>().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("`{tok}` is not a non-negative integer"),
        })
    };
    let a = next("first id")?;
    let b = next("second id")?;
    if tokens.next().is_some() {
        return Err(Error::Parse {
            line: line_no,
            message: "expected exactly two integers".into(),
        });
    }
    Ok((a, b))
}

/// Writes `g` in the edge-list format, always emitting the `# vertices` header
/// so isolated trailing vertices survive a reload.
pub fn write_edge_list<W: Write>(g: &Graph, writer: W) -> io::Result<()> {
    write_edge_list_with_meta(g, &[], writer)
}

pub fn write_edge_list_with_meta<W: Write>(
    g: &Graph,
    meta: &[(&str, String)],
    writer: W,
) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "# vertices {}", g.vertex_count())?;
    for (key, value) in meta {
        writeln!(w, "# {key} {value}")?;
    }
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub component_of: Vec<usize>,
    pub component_sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    /// Vertices of each component, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .component_sizes
            .iter()
            .map(|&s| Vec::with_capacity(s))
            .collect();
        for (v, &c) in self.component_of.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Connected components by BFS; ids follow the smallest vertex id in each
/// component.
pub fn connected_components(g: &Graph) -> ComponentLabeling {
    const UNSEEN: usize = usize::MAX;
    let n = g.vertex_count();
    let mut component_of = vec![UNSEEN; n];
    let mut component_sizes = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..n {
        if component_of[start] != UNSEEN {
            continue;
        }
        let id = component_sizes.len();
        component_of[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(u) {
                if component_of[w] == UNSEEN {
                    component_of[w] = id;
                    queue.push_back(w);
                }
            }
        }
        component_sizes.push(size);
    }

    ComponentLabeling {
        component_of,
        component_sizes,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: Graph,
    /// `original[new_id]` is the id of the vertex in the parent graph.
    pub original: Vec<usize>,
}

impl InducedSubgraph {
    /// Inverse of `original`; `None` for vertices outside the subgraph.
    pub fn local_id(&self, parent_id: usize) -> Option<usize> {
        self.original.binary_search(&parent_id).ok()
    }
}

/// Subgraph induced by `vertices`, re-indexed densely in ascending order of
/// the parent ids. Repeated ids are ignored.
pub fn induced_subgraph(g: &Graph, vertices: &[usize]) -> Result<InducedSubgraph> {
    let n = g.vertex_count();
    if let Some(&bad) = vertices.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange {
            vertex: bad,
            vertex_count: n,
        });
    }
    let mut original = vertices.to_vec();
    original.sort_unstable();
    original.dedup();

    let mut local = vec![usize::MAX; n];
    for (new, &old) in original.iter().enumerate() {
        local[old] = new;
    }
    let mut pairs = Vec::new();
    for (new_u, &old_u) in original.iter().enumerate() {
        for &old_w in g.neighbors(old_u) {
            let new_w = local[old_w];
            if new_w != usize::MAX && new_u < new_w {
                pairs.push((new_u, new_w));
            }
        }
    }
    pairs.sort_unstable();
    Ok(InducedSubgraph {
        graph: Graph::from_sorted_unique(original.len(), &pairs),
        original,
    })
}
