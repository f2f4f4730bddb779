//! Partition comparison (geometric NMI) and partition quality (modularity).
//!
//! Logarithms are natural throughout. NMI divides by the geometric mean of
//! the two entropies, so the choice of base does not affect its value.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

/// Sparse co-occurrence counts between the blocks of two partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    cells: HashMap<(usize, usize), usize>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    n: usize,
}

impl ContingencyTable {
    pub fn count(&self, row: usize, col: usize) -> usize {
        self.cells.get(&(row, col)).copied().unwrap_or(0)
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn total(&self) -> usize {
        self.n
    }

    /// Nonzero cells as `((row, col), count)`, in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        let mut cells: Vec<_> = self.cells.iter().map(|(&k, &c)| (k, c)).collect();
        cells.sort_unstable();
        cells.into_iter()
    }

    /// Dense copy, rows indexed by `x` labels.
    pub fn to_dense(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![0; self.col_sums.len()]; self.row_sums.len()];
        for (&(i, j), &c) in &self.cells {
            out[i][j] = c;
        }
        out
    }
}

fn check_same_len(x: &Partition, y: &Partition) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

pub fn contingency(x: &Partition, y: &Partition) -> Result<ContingencyTable> {
    check_same_len(x, y)?;
    let mut cells = HashMap::new();
    for (&a, &b) in x.labels().iter().zip(y.labels()) {
        *cells.entry((a, b)).or_insert(0) += 1;
    }
    Ok(ContingencyTable {
        cells,
        row_sums: x.block_sizes().to_vec(),
        col_sums: y.block_sizes().to_vec(),
        n: x.len(),
    })
}

fn entropy_of_sizes(sizes: &[usize], n: usize) -> f64 {
    let n = n as f64;
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Shannon entropy of the block-size distribution, in nats.
pub fn entropy(p: &Partition) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::EmptyPartition);
    }
    Ok(entropy_of_sizes(p.block_sizes(), p.len()))
}

pub fn mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.n as f64;
    table
        .nonzero()
        .map(|((i, j), c)| {
            let c = c as f64;
            let expected = table.row_sums[i] as f64 * table.col_sums[j] as f64;
            (c / n) * (n * c / expected).ln()
        })
        .sum()
}

/// `I(X;Y) / sqrt(H(X) H(Y))`.
///
/// When both partitions are a single block the result is 1; when only one
/// entropy vanishes it is 0.
pub fn nmi_geometric(x: &Partition, y: &Partition) -> Result<f64> {
    let table = contingency(x, y)?;
    if x.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let hx = entropy_of_sizes(x.block_sizes(), x.len());
    let hy = entropy_of_sizes(y.block_sizes(), y.len());
    match (x.community_count() == 1, y.community_count() == 1) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    if hx <= 0.0 || hy <= 0.0 {
        return Ok(0.0);
    }
    // a one-to-one table means identical partitions
    if table.cells.len() == x.community_count() && table.cells.len() == y.community_count() {
        return Ok(1.0);
    }
    let nmi = mutual_information(&table) / (hx * hy).sqrt();
    Ok(nmi.clamp(0.0, 1.0))
}

/// Newman modularity `Q = sum_c [ e_c/m - (d_c/2m)^2 ]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    if p.len() != g.vertex_count() {
        return Err(Error::SizeMismatch {
            left: g.vertex_count(),
            right: p.len(),
        });
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EdgelessGraph);
    }
    let k = p.community_count();
    let mut internal = vec![0usize; k];
    let mut degree_sum = vec![0usize; k];
    for v in 0..g.vertex_count() {
        let c = p.label(v);
        degree_sum[c] += g.degree(v);
        internal[c] += g
            .neighbors(v)
            .iter()
            .filter(|&&w| w > v && p.label(w) == c)
            .count();
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree_sum)
        .map(|(&e, &d)| {
            let share = d as f64 / (2.0 * m);
            e as f64 / m - share * share
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::graph;
    use proptest::prelude::*;

    fn part(labels: &[usize]) -> Partition {
        Partition::from_labels(labels.iter().copied())
    }

    fn two_triangles() -> Graph {
        graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    }

    #[test]
    fn contingency_examples() {
        let x = part(&[0, 0, 1, 1]);
        assert_eq!(
            contingency(&x, &x).unwrap().to_dense(),
            vec![vec![2, 0], vec![0, 2]]
        );
        let y = part(&[0, 1, 0, 1]);
        assert_eq!(
            contingency(&x, &y).unwrap().to_dense(),
            vec![vec![1, 1], vec![1, 1]]
        );
        let t = contingency(&part(&[0, 0, 0]), &part(&[0, 1, 2])).unwrap();
        assert_eq!(t.to_dense(), vec![vec![1, 1, 1]]);
        assert_eq!(t.total(), 3);
        assert!(matches!(
            contingency(&x, &part(&[0, 1])),
            Err(Error::SizeMismatch { left: 4, right: 2 })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&part(&[0, 0, 0])).unwrap(), 0.0);
        assert!((entropy(&part(&[0, 0, 1, 1])).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((entropy(&part(&[0, 1, 2, 3])).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert!(matches!(entropy(&part(&[])), Err(Error::EmptyPartition)));
    }

    #[test]
    fn nmi_examples() {
        let x = part(&[0, 0, 1, 1, 2, 2, 2]);
        let relabeled = part(&[5, 5, 0, 0, 9, 9, 9]);
        assert!((nmi_geometric(&x, &relabeled).unwrap() - 1.0).abs() < 1e-12);

        let nested = nmi_geometric(&part(&[0, 0, 1, 1]), &part(&[0, 1, 2, 3])).unwrap();
        assert!((nested - 0.5f64.sqrt()).abs() < 1e-12);

        assert_eq!(nmi_geometric(&x, &part(&[0; 7])).unwrap(), 0.0);
        assert_eq!(nmi_geometric(&part(&[0; 7]), &x).unwrap(), 0.0);
        assert_eq!(nmi_geometric(&part(&[0; 3]), &part(&[4; 3])).unwrap(), 1.0);
    }

    #[test]
    fn modularity_examples() {
        let g = two_triangles();
        assert!(modularity(&g, &part(&[0; 6])).unwrap().abs() < 1e-15);
        let q = modularity(&g, &part(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!((q - 0.5).abs() < 1e-12);

        let tri = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let q = modularity(&tri, &part(&[0, 1, 2])).unwrap();
        assert!((q + 1.0 / 3.0).abs() < 1e-12);

        assert!(matches!(
            modularity(&Graph::empty(3), &part(&[0, 0, 0])),
            Err(Error::EdgelessGraph)
        ));
    }

    fn pair_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (1usize..200).prop_flat_map(|n| {
            (
                prop::collection::vec(0usize..12, n),
                prop::collection::vec(0usize..12, n),
            )
        })
    }

    proptest! {
        #[test]
        fn nmi_is_symmetric_and_bounded((a, b) in pair_strategy()) {
            let (x, y) = (part(&a), part(&b));
            let xy = nmi_geometric(&x, &y).unwrap();
            let yx = nmi_geometric(&y, &x).unwrap();
            prop_assert!((xy - yx).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&xy));
        }

        #[test]
        fn nmi_ignores_label_names((a, b) in pair_strategy(), shift in 1usize..50) {
            let renamed: Vec<usize> = a.iter().map(|&l| (l * 7 + shift) % 97).collect();
            let base = nmi_geometric(&part(&a), &part(&b)).unwrap();
            let other = nmi_geometric(&part(&renamed), &part(&b)).unwrap();
            prop_assert!((base - other).abs() < 1e-12);
        }
    }
}
