//! Simple undirected graphs and bipartite graphs used by the gadget
//! constructions and the planted-clique instances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {0} out of range for {1} vertices")]
    VertexRange(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
}

/// Simple undirected graph on vertices `0..n`. Edges are stored sorted with
/// `u < v` and deduplicated, so equal graphs serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut es: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= n {
                return Err(GraphError::VertexRange(a, n));
            }
            if b >= n {
                return Err(GraphError::VertexRange(b, n));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            es.push((a.min(b), a.max(b)));
        }
        es.sort_unstable();
        es.dedup();
        Ok(UndirectedGraph { n, edges: es })
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        UndirectedGraph { n, edges }
    }

    pub fn cycle(n: usize) -> Self {
        let edges = (0..n).map(|i| (i, (i + 1) % n));
        UndirectedGraph::new(n, edges).expect("cycle edges are valid")
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for &(u, v) in &self.edges {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
        a
    }

    pub fn adjacency_sets(&self) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; self.n]; self.n];
        for &(u, v) in &self.edges {
            a[u][v] = true;
            a[v][u] = true;
        }
        a
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// Bipartite graph with sides `0..left` and `0..right`; edges pair a left
/// vertex with a right vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(
        left: usize,
        right: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut es: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= left {
                return Err(GraphError::VertexRange(a, left));
            }
            if b >= right {
                return Err(GraphError::VertexRange(b, right));
            }
            es.push((a, b));
        }
        es.sort_unstable();
        es.dedup();
        Ok(BipartiteGraph {
            left,
            right,
            edges: es,
        })
    }

    pub fn complete(left: usize, right: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..left {
            for b in 0..right {
                edges.push((a, b));
            }
        }
        BipartiteGraph { left, right, edges }
    }

    pub fn num_vertices(&self) -> usize {
        self.left + self.right
    }

    /// Flatten into a single graph: left vertices keep their indices, right
    /// vertices are shifted up by `left`.
    pub fn to_graph(&self) -> UndirectedGraph {
        let n = self.left + self.right;
        UndirectedGraph::new(n, self.edges.iter().map(|&(a, b)| (a, self.left + b)))
            .expect("bipartite edges are valid")
    }
}
