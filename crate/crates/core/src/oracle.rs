//! Exact laws by enumerating every configuration of a tiny graph.
//!
//! Each of the `2^|E|` edge assignments is weighted by
//! `p^open (1-p)^closed` and explored with the same BFS the Monte Carlo code
//! uses, fed from a bitmask instead of the keyed hash.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{domain, resource, Result};
use crate::graph::{EdgeId, GraphSpec, VertexId};
use crate::percolation::{ClusterReport, EdgeStatus, ExploreOptions, Explorer};
use crate::stats::CompensatedSum;
use crate::unionfind::UnionFind;

pub const MAX_ORACLE_EDGES: u64 = 20;

pub const FIXTURES_HEADER: &str = "# perc-lab exact fixtures v1";

/// Edge assignment read from a bitmask over the canonical edge order.
#[derive(Clone, Debug)]
pub struct ForcedAssignment {
    spec: GraphSpec,
    index: Vec<u32>,
    mask: u64,
}

impl ForcedAssignment {
    pub fn new(spec: GraphSpec, mask: u64) -> Result<Self> {
        let edges = spec.edge_count();
        if edges > 64 {
            return Err(resource(format!("{spec} has {edges} edges; bitmasks hold at most 64")));
        }
        let mut index = vec![u32::MAX; (spec.vertex_count() * u64::from(spec.degree())) as usize];
        for (i, e) in spec.edges().enumerate() {
            index[spec.edge_key(e) as usize] = i as u32;
        }
        Ok(ForcedAssignment { spec, index, mask })
    }

    pub fn set_mask(&mut self, mask: u64) {
        self.mask = mask;
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Bit position of `e` in the mask.
    pub fn bit_of(&self, e: EdgeId) -> u32 {
        self.index[self.spec.edge_key(e) as usize]
    }
}

impl EdgeStatus for ForcedAssignment {
    fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    #[inline]
    fn is_open(&self, e: EdgeId) -> bool {
        self.mask >> self.index[self.spec.edge_key(e) as usize] & 1 == 1
    }
}

/// Cluster exploration under an explicit edge assignment; bit `i` of `mask`
/// opens the `i`-th edge of [`GraphSpec::edges`].
pub fn forced_assignment_bfs(
    spec: GraphSpec,
    mask: u64,
    root: VertexId,
    r_max: Option<u32>,
) -> Result<ClusterReport> {
    let forced = ForcedAssignment::new(spec, mask)?;
    let mut explorer = Explorer::new(spec);
    let options = ExploreOptions {
        max_radius: r_max,
        ..Default::default()
    };
    explorer.run(&forced, root, &options)?;
    explorer.report(&forced, false)
}

/// Exact observables of one `(spec, p, root)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactLaw {
    pub spec: GraphSpec,
    pub p: f64,
    pub root: VertexId,
    pub r_max: u32,
    /// `E|C(root)|`.
    pub chi: f64,
    /// `P(|C(root)| = k)` for `k = 0..=V`.
    pub size_dist: Vec<f64>,
    /// `P(∂B(r) ≠ ∅)` for `r = 0..=r_max`.
    pub onearm: Vec<f64>,
    /// `E|∂B(r)|` for `r = 0..=r_max`.
    pub boundary: Vec<f64>,
    /// `E|C_1|`.
    pub largest_mean: f64,
    /// `τ(x, y) = P(x ↔ y)`, row-major `V x V`.
    pub two_point: Vec<Vec<f64>>,
    /// Largest diagonal entry of `τ^3`.
    pub triangle_same: f64,
    /// Largest off-diagonal entry of `τ^3`.
    pub triangle_other: f64,
}

impl ExactLaw {
    /// `P(|C| >= k)`.
    pub fn tail(&self, k: u64) -> f64 {
        self.size_dist.iter().skip(k as usize).sum()
    }
}

fn config_weights(edges: u32, p: f64) -> Vec<f64> {
    (0..=edges)
        .map(|open| {
            let closed = edges - open;
            if p == 0.0 {
                f64::from(u8::from(open == 0))
            } else if p == 1.0 {
                f64::from(u8::from(closed == 0))
            } else {
                (f64::from(open) * p.ln() + f64::from(closed) * (1.0 - p).ln()).exp()
            }
        })
        .collect()
}

pub fn enumerate_exact(spec: GraphSpec, p: f64, root: VertexId, r_max: u32) -> Result<ExactLaw> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("retention probability {p} outside [0, 1]")));
    }
    spec.check_vertex(root)?;
    let edge_total = spec.edge_count();
    if edge_total > MAX_ORACLE_EDGES {
        return Err(resource(format!(
            "{spec} has {edge_total} edges; exact enumeration is limited to {MAX_ORACLE_EDGES}"
        )));
    }
    let n = spec.vertex_count() as usize;
    let edges: Vec<(u32, u32)> = spec
        .edges()
        .map(|e| (e.low.0 as u32, spec.edge_high(e).0 as u32))
        .collect();
    let weights = config_weights(edge_total as u32, p);

    let mut forced = ForcedAssignment::new(spec, 0)?;
    let mut explorer = Explorer::new(spec);
    let full = ExploreOptions::default();

    let mut size_dist = vec![CompensatedSum::default(); n + 1];
    let mut onearm = vec![CompensatedSum::default(); r_max as usize + 1];
    let mut boundary = vec![CompensatedSum::default(); r_max as usize + 1];
    let mut largest = CompensatedSum::default();
    let mut tau = vec![vec![CompensatedSum::default(); n]; n];
    let mut label = vec![0u32; n];

    for mask in 0..(1u64 << edge_total) {
        let w = weights[mask.count_ones() as usize];
        if w == 0.0 {
            continue;
        }
        forced.set_mask(mask);
        explorer.run(&forced, root, &full)?;
        size_dist[explorer.size() as usize].add(w);
        for (r, &count) in explorer.layers().iter().enumerate().take(r_max as usize + 1) {
            if count > 0 {
                onearm[r].add(w);
                boundary[r].add(w * count as f64);
            }
        }

        let mut uf = UnionFind::new(n);
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                uf.union(a, b);
            }
        }
        let mut biggest = 0;
        for x in 0..n as u32 {
            label[x as usize] = uf.find(x);
            biggest = biggest.max(uf.set_size(x));
        }
        largest.add(w * f64::from(biggest));
        for x in 0..n {
            for y in 0..n {
                if label[x] == label[y] {
                    tau[x][y].add(w);
                }
            }
        }
    }

    let size_dist: Vec<f64> = size_dist.iter().map(CompensatedSum::value).collect();
    let chi = size_dist
        .iter()
        .enumerate()
        .map(|(k, &q)| k as f64 * q)
        .collect::<CompensatedSum>()
        .value();
    let two_point: Vec<Vec<f64>> = tau
        .iter()
        .map(|row| row.iter().map(CompensatedSum::value).collect())
        .collect();
    let cube = mat_mul(&mat_mul(&two_point, &two_point), &two_point);
    let mut triangle_same = f64::NEG_INFINITY;
    let mut triangle_other = f64::NEG_INFINITY;
    for (x, row) in cube.iter().enumerate() {
        for (y, &val) in row.iter().enumerate() {
            if x == y {
                triangle_same = triangle_same.max(val);
            } else {
                triangle_other = triangle_other.max(val);
            }
        }
    }
    if n == 1 {
        triangle_other = 0.0;
    }

    Ok(ExactLaw {
        spec,
        p,
        root,
        r_max,
        chi,
        size_dist,
        onearm: onearm.iter().map(CompensatedSum::value).collect(),
        boundary: boundary.iter().map(CompensatedSum::value).collect(),
        largest_mean: largest.value(),
        two_point,
        triangle_same,
        triangle_other,
    })
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Renders laws as `key = value` lines keyed `<spec>/<p>/<observable>[/<index>]`.
pub fn emit_fixtures(laws: &[ExactLaw]) -> String {
    let mut out = String::new();
    out.push_str(FIXTURES_HEADER);
    out.push('\n');
    for law in laws {
        let prefix = format!("{}/{}", law.spec, law.p);
        let mut line = |key: String, value: f64| {
            let _ = writeln!(out, "{prefix}/{key} = {value:?}");
        };
        line("root".into(), law.root.0 as f64);
        line("chi".into(), law.chi);
        line("largest_mean".into(), law.largest_mean);
        for (k, &q) in law.size_dist.iter().enumerate() {
            line(format!("size_dist/{k}"), q);
        }
        for (r, &q) in law.onearm.iter().enumerate() {
            line(format!("onearm/{r}"), q);
        }
        for (r, &q) in law.boundary.iter().enumerate() {
            line(format!("boundary/{r}"), q);
        }
        for (y, &q) in law.two_point[law.root.0 as usize].iter().enumerate() {
            line(format!("tau/{y}"), q);
        }
        line("triangle_same".into(), law.triangle_same);
        line("triangle_other".into(), law.triangle_other);
    }
    out
}

/// Parses a fixtures file back into a key/value map.
pub fn parse_fixtures(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == FIXTURES_HEADER => {}
        other => return Err(domain(format!("unsupported fixtures header {other:?}"))),
    }
    let mut out = BTreeMap::new();
    for (no, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| domain(format!("fixtures line {}: missing '='", no + 2)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| domain(format!("fixtures line {}: bad number", no + 2)))?;
        out.insert(key.trim().to_string(), value);
    }
    Ok(out)
}
