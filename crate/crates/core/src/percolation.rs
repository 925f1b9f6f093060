//! Percolation configurations and intrinsic-metric cluster exploration.
//!
//! A configuration is never materialized. Edge `e` is open in
//! `PercolationSample { spec, p, seed }` iff the keyed uniform `U(seed, e)`
//! is below `p`; the same seed at two values of `p` therefore gives nested
//! open-edge sets.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::cluster::ClusterGraph;
use crate::error::{domain, Result};
use crate::graph::{EdgeId, GraphSpec, VertexId};
use crate::rng::{hash2, to_unit};

/// Dense visited bitmaps are used up to this many vertices.
pub const DENSE_VISIT_LIMIT: u64 = 1 << 27;

/// Anything that can say whether an edge is open.
pub trait EdgeStatus {
    fn spec(&self) -> &GraphSpec;
    fn is_open(&self, e: EdgeId) -> bool;
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct PercolationSample {
    pub spec: GraphSpec,
    pub p: f64,
    pub seed: u64,
}

impl PercolationSample {
    pub fn new(spec: GraphSpec, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("retention probability {p} outside [0, 1]")));
        }
        Ok(PercolationSample { spec, p, seed })
    }

    /// The shared uniform behind edge `e`; identical for every `p`.
    #[inline]
    pub fn edge_uniform(&self, e: EdgeId) -> f64 {
        to_unit(hash2(self.seed, self.spec.edge_key(e)))
    }

    pub fn edge_open(&self, u: VertexId, v: VertexId) -> Result<bool> {
        Ok(self.is_open(self.spec.canonical_edge(u, v)?))
    }

    /// Same seed, different retention probability.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.spec, p, self.seed)
    }
}

impl EdgeStatus for PercolationSample {
    #[inline]
    fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    #[inline]
    fn is_open(&self, e: EdgeId) -> bool {
        self.edge_uniform(e) < self.p
    }
}

/// Edges forced closed regardless of the configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AvoidSet {
    edges: HashSet<EdgeId>,
}

impl AvoidSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = EdgeId>) -> Self {
        AvoidSet {
            edges: edges.into_iter().collect(),
        }
    }

    /// Every edge touching one of `vertices`, which is how a vertex set is
    /// avoided.
    pub fn around_vertices(spec: &GraphSpec, vertices: &[VertexId]) -> Result<Self> {
        let mut edges = HashSet::new();
        for &v in vertices {
            spec.check_vertex(v)?;
            for dir in 0..spec.degree() {
                edges.insert(spec.edge_via(v, dir));
            }
        }
        Ok(AvoidSet { edges })
    }

    pub fn insert(&mut self, e: EdgeId) {
        self.edges.insert(e);
    }

    #[inline]
    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Endpoints of the listed edges.
    pub fn touched_vertices(&self, spec: &GraphSpec) -> HashSet<VertexId> {
        self.edges
            .iter()
            .flat_map(|&e| [e.low, spec.edge_high(e)])
            .collect()
    }
}

/// `inner` with the edges of `avoid` closed.
pub struct Off<'a, S: ?Sized> {
    pub inner: &'a S,
    pub avoid: &'a AvoidSet,
}

impl<S: EdgeStatus + ?Sized> EdgeStatus for Off<'_, S> {
    fn spec(&self) -> &GraphSpec {
        self.inner.spec()
    }

    #[inline]
    fn is_open(&self, e: EdgeId) -> bool {
        (self.avoid.is_empty() || !self.avoid.contains(e)) && self.inner.is_open(e)
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExploreOptions {
    /// Vertices at this distance are recorded but not expanded.
    pub max_radius: Option<u32>,
    /// Exploration stops rather than admit a vertex beyond this count.
    pub max_size: Option<u64>,
    /// Compute the exact diameter when the cluster is fully explored.
    pub diameter: bool,
}

impl ExploreOptions {
    pub fn radius(r: u32) -> Self {
        ExploreOptions {
            max_radius: Some(r),
            ..Self::default()
        }
    }

    pub fn size(k: u64) -> Self {
        ExploreOptions {
            max_size: Some(k),
            ..Self::default()
        }
    }
}

/// One explored cluster (or the explored part of it).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub root: VertexId,
    pub size: u64,
    pub edge_count: u64,
    /// `layers[r] = |∂B(r)|`.
    pub layers: Vec<u64>,
    pub diameter: Option<u32>,
    /// A cap stopped exploration; the cluster extends beyond what is recorded.
    pub truncated: bool,
    /// Largest `r` for which the ball `B(r)` is completely recorded;
    /// `None` when the whole cluster was explored.
    pub complete_radius: Option<u32>,
    /// Vertices in BFS order, so level boundaries follow from `layers`.
    pub vertices: Vec<VertexId>,
}

impl ClusterReport {
    /// Intrinsic distance from the root of each recorded vertex.
    pub fn levels(&self) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(r, &n)| std::iter::repeat(r as u32).take(n as usize))
            .zip(self.vertices.iter())
            .map(|(r, &v)| (v, r))
    }

    /// Whether `∂B(r)` is non-empty; only meaningful for `r` within the
    /// complete radius.
    pub fn reaches(&self, r: u32) -> bool {
        (r as usize) < self.layers.len() && self.layers[r as usize] > 0
    }

    pub fn boundary(&self, r: u32) -> u64 {
        self.layers.get(r as usize).copied().unwrap_or(0)
    }
}

enum VisitSet {
    Dense(Vec<u64>),
    Sparse(HashSet<u64>),
}

impl VisitSet {
    fn for_spec(spec: &GraphSpec) -> Self {
        if spec.vertex_count() <= DENSE_VISIT_LIMIT {
            VisitSet::Dense(vec![0; spec.vertex_count().div_ceil(64) as usize])
        } else {
            VisitSet::Sparse(HashSet::new())
        }
    }

    #[inline]
    fn insert(&mut self, x: u64) -> bool {
        match self {
            VisitSet::Dense(bits) => {
                let word = &mut bits[(x >> 6) as usize];
                let mask = 1u64 << (x & 63);
                let fresh = *word & mask == 0;
                *word |= mask;
                fresh
            }
            VisitSet::Sparse(set) => set.insert(x),
        }
    }

    #[inline]
    fn contains(&self, x: u64) -> bool {
        match self {
            VisitSet::Dense(bits) => bits[(x >> 6) as usize] & (1u64 << (x & 63)) != 0,
            VisitSet::Sparse(set) => set.contains(&x),
        }
    }

    fn clear(&mut self, touched: &[(VertexId, u32)]) {
        match self {
            VisitSet::Dense(bits) => {
                for &(v, _) in touched {
                    bits[(v.0 >> 6) as usize] = 0;
                }
            }
            VisitSet::Sparse(set) => set.clear(),
        }
    }
}

/// Reusable BFS scratch space for one graph.
///
/// Monte Carlo loops keep one explorer per worker so the visited set is
/// allocated once and cleared in time proportional to the last cluster.
pub struct Explorer {
    spec: GraphSpec,
    visited: VisitSet,
    order: Vec<(VertexId, u32)>,
    layers: Vec<u64>,
    edge_count: u64,
    truncated: bool,
    complete_radius: Option<u32>,
}

impl Explorer {
    pub fn new(spec: GraphSpec) -> Self {
        Explorer {
            spec,
            visited: VisitSet::for_spec(&spec),
            order: Vec::new(),
            layers: Vec::new(),
            edge_count: 0,
            truncated: false,
            complete_radius: None,
        }
    }

    /// Breadth-first exploration of the open cluster of `root`.
    pub fn run<S: EdgeStatus + ?Sized>(
        &mut self,
        status: &S,
        root: VertexId,
        options: &ExploreOptions,
    ) -> Result<()> {
        let spec = *status.spec();
        if spec != self.spec {
            return Err(domain(format!("explorer built for {} used on {spec}", self.spec)));
        }
        spec.check_vertex(root)?;
        self.visited.clear(&self.order);
        self.order.clear();
        self.layers.clear();
        self.truncated = false;
        self.complete_radius = None;

        let max_size = options.max_size.unwrap_or(u64::MAX).max(1);
        self.visited.insert(root.0);
        self.order.push((root, 0));
        self.layers.push(1);
        let mut half_edges = 0u64;
        let mut head = 0;
        'bfs: while head < self.order.len() {
            let (u, level) = self.order[head];
            head += 1;
            let frontier = options.max_radius == Some(level);
            for dir in 0..spec.degree() {
                if !status.is_open(spec.edge_via(u, dir)) {
                    continue;
                }
                let w = spec.neighbor(u, dir);
                if self.visited.contains(w.0) {
                    half_edges += 1;
                    continue;
                }
                if frontier {
                    self.truncated = true;
                    self.complete_radius = Some(level);
                    continue;
                }
                if self.order.len() as u64 >= max_size {
                    self.truncated = true;
                    self.complete_radius = Some(level);
                    break 'bfs;
                }
                self.visited.insert(w.0);
                self.order.push((w, level + 1));
                if self.layers.len() <= level as usize + 1 {
                    self.layers.push(0);
                }
                self.layers[level as usize + 1] += 1;
                half_edges += 1;
            }
        }
        self.edge_count = half_edges / 2;
        Ok(())
    }

    pub fn size(&self) -> u64 {
        self.order.len() as u64
    }

    pub fn layers(&self) -> &[u64] {
        &self.layers
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// Vertices with their distance from the root, in BFS order.
    pub fn visited(&self) -> &[(VertexId, u32)] {
        &self.order
    }

    pub fn report<S: EdgeStatus + ?Sized>(&self, status: &S, diameter: bool) -> Result<ClusterReport> {
        let vertices: Vec<VertexId> = self.order.iter().map(|&(v, _)| v).collect();
        let diameter = if diameter && !self.truncated {
            Some(ClusterGraph::from_vertices(status, &vertices)?.diameter()?)
        } else {
            None
        };
        Ok(ClusterReport {
            root: self.order[0].0,
            size: self.size(),
            edge_count: self.edge_count,
            layers: self.layers.clone(),
            diameter,
            truncated: self.truncated,
            complete_radius: self.complete_radius,
            vertices,
        })
    }
}

/// Explores the cluster of `v` off `avoid`.
pub fn explore_cluster<S: EdgeStatus + ?Sized>(
    status: &S,
    v: VertexId,
    options: &ExploreOptions,
    avoid: &AvoidSet,
) -> Result<ClusterReport> {
    let off = Off { inner: status, avoid };
    let mut explorer = Explorer::new(*status.spec());
    explorer.run(&off, v, options)?;
    explorer.report(&off, options.diameter)
}

/// Exact diameter of a connected open cluster given by its vertex set.
pub fn cluster_diameter<S: EdgeStatus + ?Sized>(status: &S, vertices: &[VertexId]) -> Result<u32> {
    if vertices.is_empty() {
        return Err(domain("empty vertex set"));
    }
    ClusterGraph::from_vertices(status, vertices)?.diameter()
}

/// Lane counts for `(v, r')` read off one exploration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaneCensus {
    /// `lanes[j - 1]` is the number of lanes at level `j`, for `0 < j < r'`.
    pub lanes: Vec<u64>,
    pub k: u32,
    pub reach: u32,
    pub threshold: u64,
    /// More than half the levels `j ∈ [k/2, k]` carry at least `threshold`
    /// lanes.
    pub lane_rich: bool,
}

impl LaneCensus {
    pub fn at_level(&self, j: u32) -> u64 {
        if j == 0 {
            return 0;
        }
        self.lanes.get(j as usize - 1).copied().unwrap_or(0)
    }
}

/// Counts lanes: edges from `∂B(j-1)` to `∂B(j)` whose upper endpoint
/// reaches `∂B(r')` through levels `>= j` only.
pub fn lane_census<S: EdgeStatus + ?Sized>(
    status: &S,
    report: &ClusterReport,
    k: u32,
    reach: u32,
    threshold: u64,
) -> Result<LaneCensus> {
    if k >= reach {
        return Err(domain(format!("level bound k = {k} must be below r' = {reach}")));
    }
    if let Some(r) = report.complete_radius {
        if reach > r {
            return Err(domain(format!(
                "r' = {reach} exceeds the explored radius {r} of this exploration"
            )));
        }
    }
    let spec = status.spec();
    let level: HashMap<VertexId, u32> = report.levels().filter(|&(_, r)| r <= reach).collect();
    let mut by_level: Vec<Vec<VertexId>> = vec![Vec::new(); reach as usize + 1];
    for (&v, &r) in &level {
        by_level[r as usize].push(v);
    }
    for bucket in &mut by_level {
        bucket.sort_unstable();
    }

    let mut lanes = Vec::with_capacity(reach as usize - 1);
    let mut reaches: HashSet<VertexId> = HashSet::new();
    let mut stack = Vec::new();
    for j in 1..reach {
        // vertices at levels >= j connected to ∂B(r') inside levels >= j
        reaches.clear();
        stack.clear();
        for &t in &by_level[reach as usize] {
            reaches.insert(t);
            stack.push(t);
        }
        while let Some(u) = stack.pop() {
            for dir in 0..spec.degree() {
                let w = spec.neighbor(u, dir);
                match level.get(&w) {
                    Some(&r) if r >= j && !reaches.contains(&w) => {
                        if status.is_open(spec.edge_via(u, dir)) {
                            reaches.insert(w);
                            stack.push(w);
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut count = 0;
        for &a in &by_level[j as usize - 1] {
            for dir in 0..spec.degree() {
                let b = spec.neighbor(a, dir);
                if level.get(&b) == Some(&j)
                    && reaches.contains(&b)
                    && status.is_open(spec.edge_via(a, dir))
                {
                    count += 1;
                }
            }
        }
        lanes.push(count);
    }

    let window: Vec<u32> = (k.div_ceil(2)..=k).collect();
    let rich_levels = window
        .iter()
        .filter(|&&j| j > 0 && lanes.get(j as usize - 1).copied().unwrap_or(0) >= threshold)
        .count();
    Ok(LaneCensus {
        lanes,
        k,
        reach,
        threshold,
        lane_rich: 2 * rich_levels > window.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{below, hash2};

    fn q(m: u32) -> GraphSpec {
        GraphSpec::hypercube(m).unwrap()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    /// Opens exactly the listed edges.
    struct Fixed {
        spec: GraphSpec,
        open: HashSet<EdgeId>,
    }

    impl EdgeStatus for Fixed {
        fn spec(&self) -> &GraphSpec {
            &self.spec
        }
        fn is_open(&self, e: EdgeId) -> bool {
            self.open.contains(&e)
        }
    }

    fn fixed_path(spec: GraphSpec, path: &[u64]) -> Fixed {
        let open = path
            .windows(2)
            .map(|w| spec.canonical_edge(VertexId(w[0]), VertexId(w[1])).unwrap())
            .collect();
        Fixed { spec, open }
    }

    #[test]
    fn degenerate_p() {
        let spec = q(6);
        let closed = PercolationSample::new(spec, 0.0, 1).unwrap();
        let open = PercolationSample::new(spec, 1.0, 1).unwrap();
        for e in spec.edges() {
            assert!(!closed.is_open(e));
            assert!(open.is_open(e));
        }
        assert!(PercolationSample::new(spec, 1.5, 0).is_err());
        assert!(PercolationSample::new(spec, -0.1, 0).is_err());
    }

    #[test]
    fn edge_open_symmetric_and_checked() {
        let s = PercolationSample::new(q(4), 0.5, 9).unwrap();
        for x in 0..16 {
            for w in s.spec.neighbor_iter(VertexId(x)) {
                assert_eq!(s.edge_open(VertexId(x), w).unwrap(), s.edge_open(w, VertexId(x)).unwrap());
            }
        }
        assert!(s.edge_open(VertexId(0), VertexId(3)).is_err());
    }

    #[test]
    fn open_fraction_on_q20() {
        // 3.3 sigma of a Binomial(10^6, 0.1) frequency is ~0.001
        let spec = q(20);
        let s = PercolationSample::new(spec, 0.1, 2024).unwrap();
        let n = 1_000_000;
        let open = spec.edges().take(n).filter(|&e| s.is_open(e)).count();
        let frac = open as f64 / n as f64;
        assert!((frac - 0.1).abs() < 0.001, "{frac}");
    }

    #[test]
    fn full_hypercube_layers_are_binomial() {
        for m in 1..=8 {
            let s = PercolationSample::new(q(m), 1.0, 0).unwrap();
            let opts = ExploreOptions { diameter: true, ..Default::default() };
            let rep = explore_cluster(&s, VertexId(0), &opts, &AvoidSet::new()).unwrap();
            assert_eq!(rep.size, 1 << m);
            let expect: Vec<u64> = (0..=u64::from(m)).map(|r| binomial(u64::from(m), r)).collect();
            assert_eq!(rep.layers, expect);
            assert_eq!(rep.edge_count, q(m).edge_count());
            assert_eq!(rep.diameter, Some(m));
            assert!(!rep.truncated);
        }
    }

    #[test]
    fn isolated_vertex() {
        let s = PercolationSample::new(q(5), 0.0, 0).unwrap();
        let opts = ExploreOptions { diameter: true, ..Default::default() };
        let rep = explore_cluster(&s, VertexId(7), &opts, &AvoidSet::new()).unwrap();
        assert_eq!((rep.size, rep.edge_count, rep.layers.clone(), rep.diameter), (1, 0, vec![1], Some(0)));
    }

    #[test]
    fn radius_cap_sets_truncation() {
        let s = PercolationSample::new(q(6), 1.0, 0).unwrap();
        let rep = explore_cluster(&s, VertexId(0), &ExploreOptions::radius(2), &AvoidSet::new()).unwrap();
        assert_eq!(rep.layers, vec![1, 6, 15]);
        assert!(rep.truncated);
        assert_eq!(rep.complete_radius, Some(2));
        // induced edges of B(2): 6 + 15 * 2
        assert_eq!(rep.edge_count, 36);
        let full = explore_cluster(&s, VertexId(0), &ExploreOptions::radius(6), &AvoidSet::new()).unwrap();
        assert!(!full.truncated);
    }

    #[test]
    fn size_cap() {
        let s = PercolationSample::new(q(6), 1.0, 0).unwrap();
        let rep = explore_cluster(&s, VertexId(0), &ExploreOptions::size(10), &AvoidSet::new()).unwrap();
        assert_eq!(rep.size, 10);
        assert!(rep.truncated);
        let exact = explore_cluster(&s, VertexId(0), &ExploreOptions::size(64), &AvoidSet::new()).unwrap();
        assert!(!exact.truncated);
        assert_eq!(exact.size, 64);
    }

    #[test]
    fn one_step_probabilities_on_q3() {
        // E|∂B(1)| = m p = 1.5, P(∂B(1) ≠ ∅) = 1 - (1-p)^m = 0.875
        let spec = q(3);
        let trials = 200_000u64;
        let mut hits = 0u64;
        let mut total = 0u64;
        let mut explorer = Explorer::new(spec);
        for i in 0..trials {
            let s = PercolationSample::new(spec, 0.5, hash2(77, i)).unwrap();
            explorer.run(&s, VertexId(0), &ExploreOptions::radius(1)).unwrap();
            let b1 = explorer.layers().get(1).copied().unwrap_or(0);
            total += b1;
            hits += u64::from(b1 > 0);
        }
        let mean = total as f64 / trials as f64;
        let freq = hits as f64 / trials as f64;
        assert!((mean - 1.5).abs() < 0.01, "{mean}");
        assert!((freq - 0.875).abs() < 0.003, "{freq}");
    }

    #[test]
    fn avoid_set_blocks_edges() {
        let spec = q(3);
        let s = PercolationSample::new(spec, 1.0, 0).unwrap();
        let avoid = AvoidSet::around_vertices(&spec, &[VertexId(1), VertexId(2), VertexId(4)]).unwrap();
        let rep = explore_cluster(&s, VertexId(0), &ExploreOptions::default(), &avoid).unwrap();
        assert_eq!(rep.size, 1);
        assert_eq!(avoid.touched_vertices(&spec).len(), 7);
        let single = AvoidSet::from_edges([spec.canonical_edge(VertexId(0), VertexId(1)).unwrap()]);
        let rep = explore_cluster(&s, VertexId(0), &ExploreOptions::default(), &single).unwrap();
        assert_eq!(rep.size, 8);
        assert_eq!(rep.edge_count, 11);
        assert_eq!(rep.layers[1], 2);
    }

    #[test]
    fn diameter_examples() {
        let spec = q(4);
        let path = fixed_path(spec, &[0, 1, 3, 7, 15]);
        let vs: Vec<VertexId> = [0, 1, 3, 7, 15].map(VertexId).to_vec();
        assert_eq!(cluster_diameter(&path, &vs).unwrap(), 4);
        assert_eq!(cluster_diameter(&path, &[VertexId(3)]).unwrap(), 0);
        assert!(cluster_diameter(&path, &[VertexId(0), VertexId(7)]).is_err());
        let full = PercolationSample::new(spec, 1.0, 0).unwrap();
        let all: Vec<VertexId> = (0..16).map(VertexId).collect();
        assert_eq!(cluster_diameter(&full, &all).unwrap(), 4);
    }

    #[test]
    fn lanes_on_a_path() {
        let spec = q(5);
        let path = fixed_path(spec, &[0, 1, 3, 7, 15, 31]);
        let rep = explore_cluster(&path, VertexId(0), &ExploreOptions::default(), &AvoidSet::new()).unwrap();
        let lanes = lane_census(&path, &rep, 2, 5, 1).unwrap();
        assert_eq!(lanes.lanes, vec![1, 1, 1, 1]);
        assert!(lanes.lane_rich);
        let lanes = lane_census(&path, &rep, 2, 5, 2).unwrap();
        assert!(!lanes.lane_rich);
    }

    #[test]
    fn lanes_vanish_without_reach() {
        let spec = q(5);
        let path = fixed_path(spec, &[0, 1, 3]);
        let rep = explore_cluster(&path, VertexId(0), &ExploreOptions::default(), &AvoidSet::new()).unwrap();
        let lanes = lane_census(&path, &rep, 2, 4, 1).unwrap();
        assert!(lanes.lanes.iter().all(|&c| c == 0));
        assert!(!lanes.lane_rich);
    }

    #[test]
    fn lane_census_errors() {
        let s = PercolationSample::new(q(6), 1.0, 0).unwrap();
        let rep = explore_cluster(&s, VertexId(0), &ExploreOptions::radius(3), &AvoidSet::new()).unwrap();
        assert!(lane_census(&s, &rep, 2, 4, 1).is_err());
        assert!(lane_census(&s, &rep, 3, 3, 1).is_err());
        assert!(lane_census(&s, &rep, 1, 3, 1).is_ok());
    }

    #[test]
    fn explorer_reuse_matches_fresh() {
        let spec = q(10);
        let mut explorer = Explorer::new(spec);
        for i in 0..200 {
            let s = PercolationSample::new(spec, 0.12, i).unwrap();
            let root = VertexId(below(hash2(i, 1), 1024));
            explorer.run(&s, root, &ExploreOptions::default()).unwrap();
            let reused = explorer.report(&s, true).unwrap();
            let opts = ExploreOptions { diameter: true, ..Default::default() };
            let fresh = explore_cluster(&s, root, &opts, &AvoidSet::new()).unwrap();
            assert_eq!(reused, fresh);
        }
    }

    #[test]
    fn levels_follow_layers() {
        let s = PercolationSample::new(q(4), 1.0, 0).unwrap();
        let rep = explore_cluster(&s, VertexId(0), &ExploreOptions::default(), &AvoidSet::new()).unwrap();
        for (v, r) in rep.levels() {
            assert_eq!(v.0.count_ones(), r);
        }
    }
}
