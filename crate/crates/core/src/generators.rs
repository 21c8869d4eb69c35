//! Random graph and frequency generators for experiments and property tests.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;

/// Edge weights: all ones, or uniform in `[lo, hi)`.
#[derive(Debug, Clone, Copy)]
pub enum Weights {
    Unit,
    Uniform(f64, f64),
}

impl Weights {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Weights::Unit => 1.0,
            Weights::Uniform(lo, hi) => rng.gen_range(lo..hi),
        }
    }
}

/// Uniform random recursive tree: node `k` attaches to a random earlier node,
/// then labels are shuffled.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize, weights: Weights) -> Graph {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let edges: Vec<_> = (1..n)
        .map(|k| {
            let parent = rng.gen_range(0..k);
            (labels[parent], labels[k], weights.draw(rng))
        })
        .collect();
    Graph::new(n, &edges).expect("a random tree is connected and simple")
}

/// Random spanning tree plus each remaining pair independently with
/// probability `extra`.
pub fn random_connected<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    extra: f64,
    weights: Weights,
) -> Graph {
    let tree = random_tree(rng, n, weights);
    let mut edges: Vec<_> = tree
        .edges()
        .iter()
        .map(|e| (e.source, e.sink, e.weight))
        .collect();
    let mut present = vec![vec![false; n]; n];
    for e in tree.edges() {
        present[e.source][e.sink] = true;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !present[i][j] && rng.gen_bool(extra) {
                edges.push((i, j, weights.draw(rng)));
            }
        }
    }
    Graph::new(n, &edges).expect("spanning tree keeps the graph connected")
}

/// Random zero-mean frequency vector with entries drawn from `[-1, 1)` and
/// then centered.
pub fn random_frequencies<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    let mut w = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)));
    crate::linalg::center(&mut w);
    w
}
