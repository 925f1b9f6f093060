//! Whole-configuration cluster census.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::cluster::ClusterGraph;
use crate::error::{resource, Result};
use crate::graph::{GraphSpec, VertexId};
use crate::percolation::{EdgeStatus, PercolationSample};
use crate::unionfind::UnionFind;

pub const DEFAULT_CENSUS_BUDGET: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusOptions {
    pub diameters: bool,
    /// Thresholds `k` for `Z_{>=k}`.
    pub z_thresholds: Vec<u64>,
    /// Radii `r` for the `D_r` count.
    pub d_radii: Vec<u32>,
    /// Clusters above this size are excluded from `D_r`. Typically
    /// `5 eps^-2 log(eps^3 V)`; see [`d_size_limit`].
    pub d_size_limit: Option<f64>,
    pub max_vertices: u64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            diameters: false,
            z_thresholds: Vec::new(),
            d_radii: Vec::new(),
            d_size_limit: None,
            max_vertices: DEFAULT_CENSUS_BUDGET,
        }
    }
}

/// `5 eps^-2 log(eps^3 V)`, the cluster-size filter used by `D_r`.
pub fn d_size_limit(epsilon: f64, vertex_count: u64) -> f64 {
    5.0 / (epsilon * epsilon) * (epsilon.powi(3) * vertex_count as f64).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusSummary {
    pub spec: GraphSpec,
    pub p: f64,
    pub seed: u64,
    /// All cluster sizes, non-increasing. Serialized as `[size, count]` runs.
    #[serde(serialize_with = "serialize_runs")]
    pub sizes: Vec<u64>,
    pub cluster_count: u64,
    /// Largest cluster diameter; present when diameters were requested.
    pub delta_max: Option<u32>,
    /// Size of the first (largest) cluster attaining `delta_max`.
    pub delta_max_cluster_size: Option<u64>,
    pub z_geq: BTreeMap<u64, u64>,
    pub d_r: BTreeMap<u32, u64>,
    pub max_edge_count: u64,
}

impl CensusSummary {
    /// Size of the `j`-th largest cluster, 0 when there are fewer than `j`
    /// clusters (or `j == 0`).
    pub fn jth_largest(&self, j: usize) -> u64 {
        if j == 0 {
            return 0;
        }
        self.sizes.get(j - 1).copied().unwrap_or(0)
    }

    /// `(1/V) sum |C|^2`, the mean cluster size seen from a uniform vertex.
    pub fn mean_root_cluster_size(&self) -> f64 {
        let total: u64 = self.sizes.iter().sum();
        let sq: f64 = self.sizes.iter().map(|&s| (s as f64) * (s as f64)).sum();
        sq / total as f64
    }
}

fn serialize_runs<S: Serializer>(sizes: &[u64], ser: S) -> std::result::Result<S::Ok, S::Error> {
    let mut runs: Vec<(u64, u64)> = Vec::new();
    for &s in sizes {
        match runs.last_mut() {
            Some((size, count)) if *size == s => *count += 1,
            _ => runs.push((s, 1)),
        }
    }
    runs.serialize(ser)
}

/// Decomposition of one configuration into clusters.
///
/// Clusters are indexed by decreasing size, ties broken by smallest vertex,
/// so index 0 is a largest cluster.
pub struct Partition {
    spec: GraphSpec,
    label: Vec<u32>,
    local: Vec<u32>,
    offsets: Vec<usize>,
    members: Vec<u32>,
    edge_offsets: Vec<usize>,
    edges: Vec<(u32, u32)>,
}

impl Partition {
    pub fn build<S: EdgeStatus + ?Sized>(status: &S, max_vertices: u64) -> Result<Self> {
        let spec = *status.spec();
        let v_count = spec.vertex_count();
        if v_count > max_vertices || v_count > u64::from(u32::MAX) {
            return Err(resource(format!(
                "census of {spec} needs {v_count} vertices, budget is {max_vertices}; \
                 use the root-sampled estimators instead"
            )));
        }
        let n = v_count as usize;
        let mut uf = UnionFind::new(n);
        let mut open = Vec::new();
        for x in 0..v_count {
            let u = VertexId(x);
            for dir in 0..spec.degree() {
                let w = spec.neighbor(u, dir);
                if w > u && status.is_open(spec.edge_via(u, dir)) {
                    uf.union(x as u32, w.0 as u32);
                    open.push((x as u32, w.0 as u32));
                }
            }
        }

        // Order clusters by (size desc, smallest member asc).
        let mut root_rank = vec![u32::MAX; n];
        let mut roots: Vec<(u32, u32)> = Vec::new();
        for x in 0..n as u32 {
            let r = uf.find(x);
            if root_rank[r as usize] == u32::MAX {
                root_rank[r as usize] = roots.len() as u32;
                roots.push((uf.set_size(r), r));
            }
        }
        let mut order: Vec<usize> = (0..roots.len()).collect();
        order.sort_by(|&a, &b| roots[b].0.cmp(&roots[a].0).then(a.cmp(&b)));
        let mut relabel = vec![0u32; roots.len()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new as u32;
        }

        let mut label = vec![0u32; n];
        let mut offsets = vec![0usize; roots.len() + 1];
        for x in 0..n as u32 {
            let c = relabel[root_rank[uf.find(x) as usize] as usize];
            label[x as usize] = c;
            offsets[c as usize + 1] += 1;
        }
        for i in 0..roots.len() {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut members = vec![0u32; n];
        let mut local = vec![0u32; n];
        for x in 0..n as u32 {
            let c = label[x as usize] as usize;
            local[x as usize] = (cursor[c] - offsets[c]) as u32;
            members[cursor[c]] = x;
            cursor[c] += 1;
        }

        let mut edge_offsets = vec![0usize; roots.len() + 1];
        for &(a, _) in &open {
            edge_offsets[label[a as usize] as usize + 1] += 1;
        }
        for i in 0..roots.len() {
            edge_offsets[i + 1] += edge_offsets[i];
        }
        let mut cursor = edge_offsets.clone();
        let mut edges = vec![(0, 0); open.len()];
        for &(a, b) in &open {
            let c = label[a as usize] as usize;
            edges[cursor[c]] = (a, b);
            cursor[c] += 1;
        }

        Ok(Partition {
            spec,
            label,
            local,
            offsets,
            members,
            edge_offsets,
            edges,
        })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn cluster_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn cluster_size(&self, c: usize) -> u64 {
        (self.offsets[c + 1] - self.offsets[c]) as u64
    }

    pub fn cluster_edge_count(&self, c: usize) -> u64 {
        (self.edge_offsets[c + 1] - self.edge_offsets[c]) as u64
    }

    pub fn cluster_of(&self, v: VertexId) -> usize {
        self.label[v.0 as usize] as usize
    }

    /// Members of cluster `c` in increasing vertex order.
    pub fn members(&self, c: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.members[self.offsets[c]..self.offsets[c + 1]]
            .iter()
            .map(|&x| VertexId(u64::from(x)))
    }

    pub fn cluster_graph(&self, c: usize) -> ClusterGraph {
        let size = self.cluster_size(c) as usize;
        let mut adjacency = vec![Vec::new(); size];
        for &(a, b) in &self.edges[self.edge_offsets[c]..self.edge_offsets[c + 1]] {
            let (la, lb) = (self.local[a as usize], self.local[b as usize]);
            adjacency[la as usize].push(lb);
            adjacency[lb as usize].push(la);
        }
        ClusterGraph::from_parts(self.members(c).collect(), adjacency, self.cluster_edge_count(c))
    }
}

/// Exhaustive cluster decomposition of one sample.
pub fn census(sample: &PercolationSample, options: &CensusOptions) -> Result<CensusSummary> {
    let partition = Partition::build(sample, options.max_vertices)?;
    summarize(sample, &partition, options)
}

pub fn summarize(
    sample: &PercolationSample,
    partition: &Partition,
    options: &CensusOptions,
) -> Result<CensusSummary> {
    let count = partition.cluster_count();
    let sizes: Vec<u64> = (0..count).map(|c| partition.cluster_size(c)).collect();
    let max_edge_count = (0..count)
        .map(|c| partition.cluster_edge_count(c))
        .max()
        .unwrap_or(0);

    let z_geq = options
        .z_thresholds
        .iter()
        .map(|&k| (k, sizes.iter().filter(|&&s| s >= k).sum()))
        .collect();

    let d_limit = options.d_size_limit.unwrap_or(f64::INFINITY);
    let mut d_r: BTreeMap<u32, u64> = options.d_radii.iter().map(|&r| (r, 0)).collect();
    let mut delta_max = options.diameters.then_some(0u32);
    let mut delta_max_cluster_size = options.diameters.then(|| sizes.first().copied().unwrap_or(0));
    // singletons: ∂B(0) = {v}, nothing further
    if let Some(n) = d_r.get_mut(&0) {
        *n = sizes
            .iter()
            .filter(|&&s| (s as f64) <= d_limit)
            .sum();
    }
    for (c, &size) in sizes.iter().enumerate() {
        if size < 2 {
            break;
        }
        let want_d = !options.d_radii.is_empty() && (size as f64) <= d_limit;
        if !options.diameters && !want_d {
            continue;
        }
        let ecc = partition.cluster_graph(c).eccentricities()?;
        if let Some(best) = delta_max.as_mut() {
            let diam = ecc.iter().copied().max().unwrap_or(0);
            if diam > *best {
                *best = diam;
                delta_max_cluster_size = Some(size);
            }
        }
        if want_d {
            for (&r, n) in d_r.iter_mut() {
                if r > 0 {
                    *n += ecc.iter().filter(|&&e| e >= r).count() as u64;
                }
            }
        }
    }

    Ok(CensusSummary {
        spec: sample.spec,
        p: sample.p,
        seed: sample.seed,
        sizes,
        cluster_count: count as u64,
        delta_max,
        delta_max_cluster_size,
        z_geq,
        d_r,
        max_edge_count,
    })
}
