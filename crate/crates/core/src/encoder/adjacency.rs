use ndarray::Array2;

use crate::graph::{Sign, SignedGraph};

/// Sparse row-normalised adjacency for one sign: row `i` holds weight
/// `1 / deg_i` on each neighbour of that sign, or nothing if `deg_i = 0`.
#[derive(Clone, Debug)]
pub struct RowNormalized {
    offsets: Vec<usize>,
    columns: Vec<usize>,
    row_weight: Vec<f64>,
}

impl RowNormalized {
    fn from_graph(graph: &SignedGraph, sign: Sign) -> Self {
        let n = graph.num_nodes();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut columns = Vec::new();
        let mut row_weight = Vec::with_capacity(n);
        offsets.push(0);
        for v in 0..n {
            let before = columns.len();
            columns.extend(
                graph
                    .neighbors(v)
                    .iter()
                    .filter(|(_, s)| *s == sign)
                    .map(|&(w, _)| w),
            );
            let deg = columns.len() - before;
            row_weight.push(if deg == 0 { 0.0 } else { 1.0 / deg as f64 });
            offsets.push(columns.len());
        }
        RowNormalized {
            offsets,
            columns,
            row_weight,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.row_weight.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.columns[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `A · x`: each row becomes the mean of its neighbours' rows.
    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.num_rows(), x.ncols()));
        for i in 0..self.num_rows() {
            let w = self.row_weight[i];
            let mut target = out.row_mut(i);
            for &j in self.row(i) {
                target.scaled_add(w, &x.row(j));
            }
        }
        out
    }

    /// `Aᵀ · g`.
    pub fn apply_transpose(&self, g: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.num_rows(), g.ncols()));
        for i in 0..self.num_rows() {
            let w = self.row_weight[i];
            let source = g.row(i);
            for &j in self.row(i) {
                out.row_mut(j).scaled_add(w, &source);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.num_rows();
        let mut dense = Array2::zeros((n, n));
        for i in 0..n {
            for &j in self.row(i) {
                dense[[i, j]] += self.row_weight[i];
            }
        }
        dense
    }
}

/// Positive and negative row-normalised adjacency of a signed graph.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency {
    pub positive: RowNormalized,
    pub negative: RowNormalized,
}

impl NormalizedAdjacency {
    pub fn new(graph: &SignedGraph) -> Self {
        NormalizedAdjacency {
            positive: RowNormalized::from_graph(graph, Sign::Positive),
            negative: RowNormalized::from_graph(graph, Sign::Negative),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.positive.num_rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sign::{Negative as N, Positive as P};

    #[test]
    fn rows_sum_to_one_or_zero() {
        let g = SignedGraph::load(&[(0, 1, P), (0, 2, P), (0, 3, N), (2, 3, N), (1, 3, P)]).unwrap();
        let g = {
            let mut samples = g.edges();
            samples.push(crate::graph::EdgeSample::new(4, 5, N));
            SignedGraph::from_samples(7, &samples).unwrap()
        };
        let adj = NormalizedAdjacency::new(&g);
        for dense in [adj.positive.to_dense(), adj.negative.to_dense()] {
            for (i, row) in dense.rows().into_iter().enumerate() {
                let sum: f64 = row.sum();
                assert!(row.iter().all(|&x| x >= 0.0));
                assert!(sum.abs() < 1e-12 || (sum - 1.0).abs() < 1e-12, "row {i} sums to {sum}");
            }
        }
        // node 6 is isolated
        assert!(adj.positive.row(6).is_empty() && adj.negative.row(6).is_empty());
    }

    #[test]
    fn sparse_products_match_dense() {
        let g = SignedGraph::load(&[(0, 1, P), (0, 2, N), (1, 2, P), (2, 3, N), (3, 4, P)]).unwrap();
        let adj = NormalizedAdjacency::new(&g);
        let x = Array2::from_shape_fn((5, 3), |(i, j)| (i * 3 + j) as f64 * 0.1 - 0.4);
        for part in [&adj.positive, &adj.negative] {
            let dense = part.to_dense();
            let forward = part.apply(&x) - dense.dot(&x);
            let backward = part.apply_transpose(&x) - dense.t().dot(&x);
            assert!(forward.iter().all(|d| d.abs() < 1e-12));
            assert!(backward.iter().all(|d| d.abs() < 1e-12));
        }
    }
}
