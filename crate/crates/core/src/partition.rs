use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::parse_pair;

/// A total assignment of vertices to communities.
///
/// Labels are always compact: `0..community_count()`, numbered in order of
/// first appearance when scanning vertices by id. Two partitions that differ
/// only by a renaming of labels therefore compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    pub fn from_labels<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut remap = std::collections::HashMap::new();
        let mut sizes = Vec::new();
        let labels = raw
            .into_iter()
            .map(|l| {
                let next = remap.len();
                let id = *remap.entry(l).or_insert(next);
                if id == sizes.len() {
                    sizes.push(0);
                }
                sizes[id] += 1;
                id
            })
            .collect();
        Partition { labels, sizes }
    }

    pub fn single_block(n: usize) -> Self {
        Self::from_labels(std::iter::repeat_n(0, n))
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(0..n)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn largest_block(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (v, &l) in self.labels.iter().enumerate() {
            out[l].push(v);
        }
        out
    }
}

/// Reads a community file (`v c` per line, `#` comments). Every vertex in
/// `0..=max_id` must appear exactly once.
pub fn load_partition<R: BufRead>(reader: R) -> Result<Partition> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        pairs.push((parse_pair(trimmed, idx + 1)?, idx + 1));
    }
    let n = pairs.iter().map(|((v, _), _)| v + 1).max().unwrap_or(0);
    let mut labels = vec![None; n];
    for ((v, c), line) in pairs {
        if labels[v].replace(c).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("vertex {v} assigned twice"),
            });
        }
    }
    if let Some(missing) = labels.iter().position(Option::is_none) {
        return Err(Error::Parse {
            line: 0,
            message: format!("vertex {missing} has no community"),
        });
    }
    Ok(Partition::from_labels(
        labels.into_iter().map(Option::unwrap),
    ))
}

pub fn read_partition_file(path: impl AsRef<Path>) -> Result<Partition> {
    load_partition(BufReader::new(File::open(path)?))
}

pub fn write_partition<W: Write>(p: &Partition, writer: W) -> io::Result<()> {
    write_partition_with_meta(p, &[], writer)
}

pub fn write_partition_with_meta<W: Write>(
    p: &Partition,
    meta: &[(&str, String)],
    writer: W,
) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    for (key, value) in meta {
        writeln!(w, "# {key} {value}")?;
    }
    for (v, c) in p.labels().iter().enumerate() {
        writeln!(w, "{v} {c}")?;
    }
    w.flush()
}
