use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::graph::VertexId;
use crate::percolation::EdgeStatus;

/// An explicit, relabeled copy of one open cluster.
///
/// Local vertex `i` corresponds to `vertices[i]` in the host graph.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterGraph {
    vertices: Vec<VertexId>,
    adjacency: Vec<Vec<u32>>,
    edge_count: u64,
}

impl ClusterGraph {
    /// Induced open subgraph on `vertices`. Duplicates are rejected.
    pub fn from_vertices<S: EdgeStatus + ?Sized>(status: &S, vertices: &[VertexId]) -> Result<Self> {
        let spec = status.spec();
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            spec.check_vertex(v)?;
            if index.insert(v, i as u32).is_some() {
                return Err(domain(format!("vertex {v} listed twice")));
            }
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut edge_count = 0;
        for (i, &u) in vertices.iter().enumerate() {
            for dir in 0..spec.degree() {
                let w = spec.neighbor(u, dir);
                if let Some(&j) = index.get(&w) {
                    if status.is_open(spec.edge_via(u, dir)) {
                        adjacency[i].push(j);
                        if u < w {
                            edge_count += 1;
                        }
                    }
                }
            }
        }
        Ok(ClusterGraph {
            vertices: vertices.to_vec(),
            adjacency,
            edge_count,
        })
    }

    pub(crate) fn from_parts(vertices: Vec<VertexId>, adjacency: Vec<Vec<u32>>, edge_count: u64) -> Self {
        ClusterGraph {
            vertices,
            adjacency,
            edge_count,
        }
    }

    /// Builds a graph on `0..n` from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b || a as usize >= n || b as usize >= n {
                return Err(domain(format!("bad edge ({a}, {b}) for {n} vertices")));
            }
            if adjacency[a as usize].contains(&b) {
                return Err(domain(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        Ok(ClusterGraph {
            vertices: (0..n as u64).map(VertexId).collect(),
            adjacency,
            edge_count: edges.len() as u64,
        })
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// BFS distances from local vertex `src`; `u32::MAX` marks unreachable.
    pub fn distances_from(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.size()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.size() == 0 || self.distances_from(0).iter().all(|&d| d != u32::MAX)
    }

    /// Eccentricity of every vertex via BFS from each source.
    pub fn eccentricities(&self) -> Result<Vec<u32>> {
        let mut ecc = Vec::with_capacity(self.size());
        let mut dist = vec![u32::MAX; self.size()];
        let mut queue = VecDeque::new();
        for src in 0..self.size() {
            dist.fill(u32::MAX);
            dist[src] = 0;
            queue.push_back(src);
            let mut seen = 1;
            let mut far = 0;
            while let Some(u) = queue.pop_front() {
                far = dist[u];
                for &w in &self.adjacency[u] {
                    if dist[w as usize] == u32::MAX {
                        dist[w as usize] = dist[u] + 1;
                        seen += 1;
                        queue.push_back(w as usize);
                    }
                }
            }
            if seen != self.size() {
                return Err(domain("vertex set is not a single connected open cluster"));
            }
            ecc.push(far);
        }
        Ok(ecc)
    }

    /// Exact diameter; errors if the graph is disconnected.
    pub fn diameter(&self) -> Result<u32> {
        Ok(self.eccentricities()?.into_iter().max().unwrap_or(0))
    }
}
