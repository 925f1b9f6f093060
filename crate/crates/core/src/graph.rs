//! Transitive graph families with implicit adjacency.
//!
//! Vertices are dense integers in `[0, V)`. Nothing about a graph is stored
//! besides its descriptor: neighbors are computed by bit flips (hypercube) or
//! mixed-radix digit arithmetic (torus, products of complete graphs), so
//! iterating a neighborhood never allocates.
//!
//! Neighbor order is fixed by the direction index and is part of the public
//! contract; BFS tie-breaking everywhere else relies on it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};

/// Largest vertex count any descriptor may describe.
pub const MAX_VERTICES: u64 = 1 << 48;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Orientation-free edge name: the smaller endpoint plus the direction index
/// leading from it to the other endpoint.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId {
    pub low: VertexId,
    pub dir: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// `{0,1}^m`, edges between words at Hamming distance 1.
    Hypercube { m: u32 },
    /// `Z_n^d` with nearest-neighbor edges; requires `n >= 3`.
    Torus { n: u64, d: u32 },
    /// `K_n`.
    Complete { n: u64 },
    /// `K_n^d`: vertices are words in `[n]^d`, adjacent when they differ in
    /// exactly one coordinate.
    CompleteProduct { n: u64, d: u32 },
}

/// Immutable descriptor of one graph instance.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GraphSpec {
    kind: GraphKind,
    vertex_count: u64,
    degree: u32,
}

impl GraphSpec {
    pub fn new(kind: GraphKind) -> Result<Self> {
        let (vertex_count, degree) = match kind {
            GraphKind::Hypercube { m } => {
                if m == 0 || m > 48 {
                    return Err(domain(format!("hypercube dimension {m} outside 1..=48")));
                }
                (1u64 << m, m)
            }
            GraphKind::Torus { n, d } => {
                if n < 3 {
                    return Err(domain(format!(
                        "torus side {n} < 3 is not a simple 2d-regular graph"
                    )));
                }
                if d == 0 {
                    return Err(domain("torus needs at least one dimension"));
                }
                (checked_power(n, d)?, 2 * d)
            }
            GraphKind::Complete { n } => {
                if n < 2 {
                    return Err(domain(format!("complete graph needs n >= 2, got {n}")));
                }
                if n > MAX_VERTICES {
                    return Err(domain("complete graph too large"));
                }
                let degree = u32::try_from(n - 1).map_err(|_| domain("degree overflow"))?;
                (n, degree)
            }
            GraphKind::CompleteProduct { n, d } => {
                if n < 2 || d == 0 {
                    return Err(domain(format!(
                        "complete product needs n >= 2 and d >= 1, got n={n} d={d}"
                    )));
                }
                let v = checked_power(n, d)?;
                let degree = u64::from(d) * (n - 1);
                let degree = u32::try_from(degree).map_err(|_| domain("degree overflow"))?;
                (v, degree)
            }
        };
        Ok(GraphSpec {
            kind,
            vertex_count,
            degree,
        })
    }

    pub fn hypercube(m: u32) -> Result<Self> {
        Self::new(GraphKind::Hypercube { m })
    }

    pub fn torus(n: u64, d: u32) -> Result<Self> {
        Self::new(GraphKind::Torus { n, d })
    }

    pub fn complete(n: u64) -> Result<Self> {
        Self::new(GraphKind::Complete { n })
    }

    pub fn complete_product(n: u64, d: u32) -> Result<Self> {
        Self::new(GraphKind::CompleteProduct { n, d })
    }

    #[inline]
    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// Number of vertices `V`.
    #[inline]
    pub fn vertex_count(&self) -> u64 {
        self.vertex_count
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `V * degree / 2`.
    pub fn edge_count(&self) -> u64 {
        self.vertex_count * u64::from(self.degree) / 2
    }

    /// Graph diameter of the (unpercolated) graph.
    pub fn diameter(&self) -> u64 {
        match self.kind {
            GraphKind::Hypercube { m } => u64::from(m),
            GraphKind::Torus { n, d } => u64::from(d) * (n / 2),
            GraphKind::Complete { .. } => 1,
            GraphKind::CompleteProduct { d, .. } => u64::from(d),
        }
    }

    pub fn hypercube_dimension(&self) -> Option<u32> {
        match self.kind {
            GraphKind::Hypercube { m } => Some(m),
            _ => None,
        }
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.0 < self.vertex_count {
            Ok(())
        } else {
            Err(domain(format!(
                "vertex {} out of range for {} (V = {})",
                v.0, self, self.vertex_count
            )))
        }
    }

    /// Neighbor of `v` in direction `dir`. Both must be in range.
    #[inline]
    pub fn neighbor(&self, v: VertexId, dir: u32) -> VertexId {
        debug_assert!(dir < self.degree);
        let x = v.0;
        VertexId(match self.kind {
            GraphKind::Hypercube { .. } => x ^ (1u64 << dir),
            GraphKind::Torus { n, .. } => {
                let stride = n.pow(dir / 2);
                let digit = (x / stride) % n;
                if dir % 2 == 0 {
                    if digit + 1 == n {
                        x - digit * stride
                    } else {
                        x + stride
                    }
                } else if digit == 0 {
                    x + (n - 1) * stride
                } else {
                    x - stride
                }
            }
            GraphKind::Complete { .. } => {
                let j = u64::from(dir);
                if j < x {
                    j
                } else {
                    j + 1
                }
            }
            GraphKind::CompleteProduct { n, .. } => {
                let coord = u64::from(dir) / (n - 1);
                let j = u64::from(dir) % (n - 1);
                let stride = n.pow(coord as u32);
                let digit = (x / stride) % n;
                let target = if j < digit { j } else { j + 1 };
                x - digit * stride + target * stride
            }
        })
    }

    /// Allocation-free neighbor iterator in direction order.
    #[inline]
    pub fn neighbor_iter(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.degree).map(move |dir| self.neighbor(v, dir))
    }

    pub fn neighbors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        Ok(self.neighbor_iter(v).collect())
    }

    /// Direction index leading from `u` to `v`, if they are adjacent.
    pub fn direction_to(&self, u: VertexId, v: VertexId) -> Option<u32> {
        if u == v || u.0 >= self.vertex_count || v.0 >= self.vertex_count {
            return None;
        }
        match self.kind {
            GraphKind::Hypercube { .. } => {
                let x = u.0 ^ v.0;
                x.is_power_of_two().then(|| x.trailing_zeros())
            }
            GraphKind::Torus { n, d } => {
                let coord = single_differing_digit(u.0, v.0, n, d)?;
                let stride = n.pow(coord);
                let a = (u.0 / stride) % n;
                let b = (v.0 / stride) % n;
                if (a + 1) % n == b {
                    Some(2 * coord)
                } else if (b + 1) % n == a {
                    Some(2 * coord + 1)
                } else {
                    None
                }
            }
            GraphKind::Complete { .. } => Some(if v.0 < u.0 { v.0 } else { v.0 - 1 } as u32),
            GraphKind::CompleteProduct { n, d } => {
                let coord = single_differing_digit(u.0, v.0, n, d)?;
                let stride = n.pow(coord);
                let a = (u.0 / stride) % n;
                let b = (v.0 / stride) % n;
                let j = if b < a { b } else { b - 1 };
                Some((u64::from(coord) * (n - 1) + j) as u32)
            }
        }
    }

    /// Direction index leading back from `neighbor(u, dir)` to `u`.
    #[inline]
    pub fn reverse_direction(&self, u: VertexId, dir: u32) -> u32 {
        match self.kind {
            GraphKind::Hypercube { .. } => dir,
            GraphKind::Torus { .. } => dir ^ 1,
            GraphKind::Complete { .. } => {
                let w = self.neighbor(u, dir);
                (if u.0 < w.0 { u.0 } else { u.0 - 1 }) as u32
            }
            GraphKind::CompleteProduct { n, .. } => {
                let coord = u64::from(dir) / (n - 1);
                let j = u64::from(dir) % (n - 1);
                let stride = n.pow(coord as u32);
                let a = (u.0 / stride) % n;
                let b = if j < a { j } else { j + 1 };
                let back = if a < b { a } else { a - 1 };
                (coord * (n - 1) + back) as u32
            }
        }
    }

    /// Edge reached from `u` along `dir`, in canonical form.
    #[inline]
    pub fn edge_via(&self, u: VertexId, dir: u32) -> EdgeId {
        let w = self.neighbor(u, dir);
        if u < w {
            EdgeId { low: u, dir }
        } else {
            EdgeId {
                low: w,
                dir: self.reverse_direction(u, dir),
            }
        }
    }

    pub fn canonical_edge(&self, u: VertexId, v: VertexId) -> Result<EdgeId> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let dir = self
            .direction_to(u, v)
            .ok_or_else(|| domain(format!("vertices {u} and {v} are not adjacent in {self}")))?;
        Ok(self.edge_via(u, dir))
    }

    /// Dense integer key of an edge, unique within this graph.
    #[inline]
    pub fn edge_key(&self, e: EdgeId) -> u64 {
        e.low.0 * u64::from(self.degree) + u64::from(e.dir)
    }

    /// The other endpoint of a canonical edge.
    #[inline]
    pub fn edge_high(&self, e: EdgeId) -> VertexId {
        self.neighbor(e.low, e.dir)
    }

    /// All edges in canonical order: by low endpoint, then direction.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.vertex_count).flat_map(move |x| {
            let u = VertexId(x);
            (0..self.degree).filter_map(move |dir| {
                (self.neighbor(u, dir) > u).then_some(EdgeId { low: u, dir })
            })
        })
    }

    /// Group element `g` with `compose(u, g) == v`. All four families are
    /// Cayley graphs of abelian groups (`Z_2^m`, `Z_n^d`, `Z_n`, `Z_n^d`),
    /// and translations act as graph automorphisms.
    pub fn difference(&self, u: VertexId, v: VertexId) -> VertexId {
        match self.kind {
            GraphKind::Hypercube { .. } => VertexId(u.0 ^ v.0),
            GraphKind::Complete { n } => VertexId((v.0 + n - u.0) % n),
            GraphKind::Torus { n, d } | GraphKind::CompleteProduct { n, d } => {
                digitwise(u.0, v.0, n, d, |a, b| (b + n - a) % n)
            }
        }
    }

    pub fn compose(&self, u: VertexId, g: VertexId) -> VertexId {
        match self.kind {
            GraphKind::Hypercube { .. } => VertexId(u.0 ^ g.0),
            GraphKind::Complete { n } => VertexId((u.0 + g.0) % n),
            GraphKind::Torus { n, d } | GraphKind::CompleteProduct { n, d } => {
                digitwise(u.0, g.0, n, d, |a, b| (a + b) % n)
            }
        }
    }
}

fn checked_power(n: u64, d: u32) -> Result<u64> {
    n.checked_pow(d)
        .filter(|&v| v <= MAX_VERTICES)
        .ok_or_else(|| domain(format!("{n}^{d} vertices exceeds the supported maximum")))
}

fn single_differing_digit(a: u64, b: u64, n: u64, d: u32) -> Option<u32> {
    let (mut a, mut b) = (a, b);
    let mut found = None;
    for coord in 0..d {
        if a % n != b % n {
            if found.is_some() {
                return None;
            }
            found = Some(coord);
        }
        a /= n;
        b /= n;
    }
    found
}

fn digitwise(a: u64, b: u64, n: u64, d: u32, f: impl Fn(u64, u64) -> u64) -> VertexId {
    let (mut a, mut b) = (a, b);
    let mut out = 0;
    let mut stride = 1;
    for _ in 0..d {
        out += f(a % n, b % n) * stride;
        a /= n;
        b /= n;
        stride *= n;
    }
    VertexId(out)
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GraphKind::Hypercube { m } => write!(f, "Q{m}"),
            GraphKind::Torus { n, d } => write!(f, "T{n}^{d}"),
            GraphKind::Complete { n } => write!(f, "K{n}"),
            GraphKind::CompleteProduct { n, d } => write!(f, "K{n}^{d}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = LabError;

    /// Parses `Q<m>`, `T<n>^<d>`, `K<n>` and `K<n>^<d>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || domain(format!("unrecognized graph spec {s:?}"));
        let s = s.trim();
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(bad)?;
        let rest = chars.as_str();
        let (base, exp) = match rest.split_once('^') {
            Some((b, e)) => (b, Some(e)),
            None => (rest, None),
        };
        let base: u64 = base.parse().map_err(|_| bad())?;
        let exp: Option<u32> = exp.map(|e| e.parse().map_err(|_| bad())).transpose()?;
        match (head, exp) {
            ('Q', None) => GraphSpec::hypercube(u32::try_from(base).map_err(|_| bad())?),
            ('T', Some(d)) => GraphSpec::torus(base, d),
            ('K', None) => GraphSpec::complete(base),
            ('K', Some(d)) => GraphSpec::complete_product(base, d),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = LabError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GraphSpec> for String {
    fn from(spec: GraphSpec) -> String {
        spec.to_string()
    }
}
