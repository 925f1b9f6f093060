//! Mixing-time machinery: lazy-walk `T_mix` on extracted clusters, the
//! `8|E| diam` bound, non-backtracking kernels and `t_mix`, and the triangle
//! and assumption diagnostic sums.
//!
//! Every graph family here is a Cayley graph of an abelian group, so a
//! kernel or two-point function from the root determines the whole matrix:
//! `K(x, y) = k(y - x)`. Matrix products become group convolutions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterGraph;
use crate::error::{domain, resource, LabError, Result};
use crate::estimators::{trial, PSource};
use crate::graph::{GraphKind, GraphSpec, VertexId};
use crate::oracle::enumerate_exact;
use crate::percolation::{ExploreOptions, Explorer};

/// Largest cluster handed to [`lazy_tmix_exact`], and largest graph for
/// the Monte Carlo triangle.
pub const DENSE_BUDGET: usize = 4000;
/// Largest `V * degree` for the generic non-backtracking kernel.
pub const DIRECTED_EDGE_BUDGET: u64 = 1 << 24;
/// Largest `V` for a quadratic-time group convolution.
pub const CONVOLUTION_BUDGET: u64 = 1 << 13;
/// Default step cap for [`nb_tmix`].
pub const NB_TMIX_CAP: u64 = 100_000;

/// Slack on the `1/4` threshold so that exact ties survive rounding.
const TV_SLACK: f64 = 1e-12;

/// Lazy-walk transition applied to one distribution.
fn lazy_step(cluster: &ClusterGraph, cur: &[f64], next: &mut [f64]) {
    for (v, slot) in next.iter_mut().enumerate() {
        let moved: f64 = cluster
            .neighbors(v)
            .iter()
            .map(|&u| cur[u as usize] / cluster.degree(u as usize) as f64)
            .sum();
        *slot = 0.5 * cur[v] + 0.5 * moved;
    }
}

fn stationary(cluster: &ClusterGraph) -> Vec<f64> {
    let total = 2.0 * cluster.edge_count() as f64;
    (0..cluster.size()).map(|v| cluster.degree(v) as f64 / total).collect()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn check_dense(cluster: &ClusterGraph, budget: usize) -> Result<()> {
    if cluster.size() > budget {
        return Err(resource(format!(
            "cluster of {} vertices exceeds the dense budget of {budget}; use lazy_tmix_bound",
            cluster.size()
        )));
    }
    if !cluster.is_connected() {
        return Err(domain("lazy walk mixing needs a connected cluster"));
    }
    Ok(())
}

/// Worst-start total-variation distance of the lazy walk at `t = 0..=t_max`.
pub fn lazy_tv_trajectory(cluster: &ClusterGraph, t_max: u64) -> Result<Vec<f64>> {
    check_dense(cluster, DENSE_BUDGET)?;
    let n = cluster.size();
    if n == 1 {
        return Ok(vec![0.0; t_max as usize + 1]);
    }
    let pi = stationary(cluster);
    let per_start: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut cur = vec![0.0; n];
            let mut next = vec![0.0; n];
            cur[s] = 1.0;
            let mut out = vec![tv(&cur, &pi)];
            for _ in 0..t_max {
                lazy_step(cluster, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
                out.push(tv(&cur, &pi));
            }
            out
        })
        .collect();
    Ok((0..=t_max as usize)
        .map(|t| per_start.iter().map(|d| d[t]).fold(0.0, f64::max))
        .collect())
}

/// Exact `T_mix(1/4)` of the lazy walk (hold probability 1/2).
///
/// Every start is iterated independently until its distance drops to 1/4;
/// each distance is non-increasing in `t`, so the worst start's hitting time
/// is the mixing time.
pub fn lazy_tmix_exact(cluster: &ClusterGraph) -> Result<u64> {
    lazy_tmix_exact_with_budget(cluster, DENSE_BUDGET)
}

pub fn lazy_tmix_exact_with_budget(cluster: &ClusterGraph, budget: usize) -> Result<u64> {
    check_dense(cluster, budget)?;
    let n = cluster.size();
    if n == 1 {
        return Ok(0);
    }
    let pi = stationary(cluster);
    let cap = lazy_tmix_bound(cluster)?;
    let times: Vec<Option<u64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut cur = vec![0.0; n];
            let mut next = vec![0.0; n];
            cur[s] = 1.0;
            let mut t = 0;
            while tv(&cur, &pi) > 0.25 + TV_SLACK {
                if t == cap {
                    return None;
                }
                lazy_step(cluster, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
                t += 1;
            }
            Some(t)
        })
        .collect();
    let mut worst = 0;
    for t in times {
        worst = worst.max(t.ok_or_else(|| LabError::Divergence {
            message: "lazy walk did not reach distance 1/4 within 8|E| diam steps".into(),
            best_t: cap,
        })?);
    }
    Ok(worst)
}

/// `8 |E| diam`, an upper bound on the lazy-walk mixing time.
pub fn lazy_tmix_bound(cluster: &ClusterGraph) -> Result<u64> {
    Ok(8 * cluster.edge_count() * u64::from(cluster.diameter()?))
}

/// `P^t(x, ·)` of the non-backtracking walk from a fixed start.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NbKernel {
    /// Mass on hypercube classes: Hamming weight `w` and whether the last
    /// flipped bit is currently set.
    HypercubeClasses { m: u32, t: u64, set: Vec<f64>, unset: Vec<f64> },
    /// Mass on every vertex.
    Vertices { t: u64, probs: Vec<f64> },
}

fn binomials(m: u32) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for _ in 0..m {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

impl NbKernel {
    pub fn t(&self) -> u64 {
        match self {
            NbKernel::HypercubeClasses { t, .. } | NbKernel::Vertices { t, .. } => *t,
        }
    }

    /// Total probability at every distance class (hypercube) or the vertex
    /// vector itself.
    fn class_mass(&self) -> Vec<f64> {
        match self {
            NbKernel::HypercubeClasses { set, unset, .. } => set.iter().zip(unset).map(|(a, b)| a + b).collect(),
            NbKernel::Vertices { probs, .. } => probs.clone(),
        }
    }

    /// Per-vertex probability of each class (hypercube) or of each vertex.
    fn class_probs(&self) -> Vec<f64> {
        match self {
            NbKernel::HypercubeClasses { m, .. } => self
                .class_mass()
                .into_iter()
                .zip(binomials(*m))
                .map(|(mass, c)| mass / c)
                .collect(),
            NbKernel::Vertices { probs, .. } => probs.clone(),
        }
    }

    /// `P^t(x, x + y)`.
    pub fn at(&self, y: VertexId) -> f64 {
        match self {
            NbKernel::HypercubeClasses { m, set, unset, .. } => {
                let w = y.0.count_ones() as usize;
                (set[w] + unset[w]) / binomials(*m)[w]
            }
            NbKernel::Vertices { probs, .. } => probs[y.0 as usize],
        }
    }

    pub fn to_vertices(&self) -> Vec<f64> {
        match self {
            NbKernel::HypercubeClasses { m, .. } => {
                let probs = self.class_probs();
                (0..1u64 << m).map(|y| probs[y.count_ones() as usize]).collect()
            }
            NbKernel::Vertices { probs, .. } => probs.clone(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.class_mass().iter().sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.class_probs().into_iter().fold(0.0, f64::max)
    }
}

enum NbState {
    Classes { set: Vec<f64>, unset: Vec<f64> },
    /// Mass on `(vertex, direction back to the previous vertex)`.
    Edges(Vec<f64>),
}

/// Step-by-step non-backtracking walk from vertex 0.
pub struct NbWalk {
    spec: GraphSpec,
    t: u64,
    state: NbState,
}

impl NbWalk {
    /// Class dynamic program on hypercubes, directed-edge kernel otherwise.
    pub fn new(spec: GraphSpec) -> Result<Self> {
        match spec.kind() {
            GraphKind::Hypercube { m } if m >= 2 => {
                let m = m as usize;
                Ok(NbWalk {
                    spec,
                    t: 0,
                    state: NbState::Classes {
                        set: vec![0.0; m + 1],
                        unset: vec![0.0; m + 1],
                    },
                })
            }
            _ => Self::generic(spec),
        }
    }

    /// The directed-edge kernel regardless of family.
    pub fn generic(spec: GraphSpec) -> Result<Self> {
        if spec.degree() < 2 {
            return Err(domain(format!("{spec}: non-backtracking walks need degree at least 2")));
        }
        let states = spec.vertex_count().saturating_mul(u64::from(spec.degree()));
        if states > DIRECTED_EDGE_BUDGET {
            return Err(resource(format!(
                "{spec}: {states} directed edges exceed the kernel budget of {DIRECTED_EDGE_BUDGET}"
            )));
        }
        Ok(NbWalk {
            spec,
            t: 0,
            state: NbState::Edges(vec![0.0; states as usize]),
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self) {
        let spec = self.spec;
        let deg = spec.degree() as usize;
        match &mut self.state {
            NbState::Classes { set, unset } => {
                let m = deg;
                let mut ns = vec![0.0; m + 1];
                let mut nu = vec![0.0; m + 1];
                if self.t == 0 {
                    ns[1] = 1.0;
                } else {
                    let share = 1.0 / (m - 1) as f64;
                    for w in 0..=m {
                        if set[w] != 0.0 {
                            if w < m {
                                ns[w + 1] += set[w] * (m - w) as f64 * share;
                            }
                            if w >= 2 {
                                nu[w - 1] += set[w] * (w - 1) as f64 * share;
                            }
                        }
                        if unset[w] != 0.0 {
                            if w + 1 < m {
                                ns[w + 1] += unset[w] * (m - w - 1) as f64 * share;
                            }
                            if w >= 1 {
                                nu[w - 1] += unset[w] * w as f64 * share;
                            }
                        }
                    }
                }
                *set = ns;
                *unset = nu;
            }
            NbState::Edges(mass) => {
                let mut next = vec![0.0; mass.len()];
                if self.t == 0 {
                    for dir in 0..deg as u32 {
                        let w = spec.neighbor(VertexId(0), dir);
                        let back = spec.reverse_direction(VertexId(0), dir);
                        next[w.0 as usize * deg + back as usize] = 1.0 / deg as f64;
                    }
                } else {
                    let share = 1.0 / (deg - 1) as f64;
                    let at_vertex: Vec<f64> = mass.chunks(deg).map(|c| c.iter().sum()).collect();
                    next.par_chunks_mut(deg).enumerate().for_each(|(w, row)| {
                        let w = VertexId(w as u64);
                        for (back, slot) in row.iter_mut().enumerate() {
                            // arrived from u = neighbor(w, back) along dir d
                            let u = spec.neighbor(w, back as u32);
                            let d = spec.reverse_direction(w, back as u32) as usize;
                            let ui = u.0 as usize;
                            *slot = (at_vertex[ui] - mass[ui * deg + d]) * share;
                        }
                    });
                }
                *mass = next;
            }
        }
        self.t += 1;
    }

    pub fn kernel(&self) -> NbKernel {
        let t = self.t;
        match &self.state {
            NbState::Classes { set, unset } => {
                let m = self.spec.degree();
                if t == 0 {
                    let mut unset = vec![0.0; m as usize + 1];
                    unset[0] = 1.0;
                    return NbKernel::HypercubeClasses {
                        m,
                        t,
                        set: vec![0.0; m as usize + 1],
                        unset,
                    };
                }
                NbKernel::HypercubeClasses {
                    m,
                    t,
                    set: set.clone(),
                    unset: unset.clone(),
                }
            }
            NbState::Edges(mass) => {
                let deg = self.spec.degree() as usize;
                let mut probs: Vec<f64> = mass.chunks(deg).map(|c| c.iter().sum()).collect();
                if t == 0 {
                    probs[0] = 1.0;
                }
                NbKernel::Vertices { t, probs }
            }
        }
    }
}

/// `P^t(0, ·)`; `t = 0` is the point mass at the start.
pub fn nb_kernel(spec: GraphSpec, t: u64) -> Result<NbKernel> {
    let mut walk = NbWalk::new(spec)?;
    for _ in 0..t {
        walk.step();
    }
    Ok(walk.kernel())
}

/// `min { t : max_y (P^t(0,y) + P^{t+1}(0,y)) / 2 <= (1 + α) / V }`.
pub fn nb_tmix(spec: GraphSpec, alpha: f64) -> Result<u64> {
    nb_tmix_capped(spec, alpha, NB_TMIX_CAP)
}

pub fn nb_tmix_capped(spec: GraphSpec, alpha: f64, cap: u64) -> Result<u64> {
    if !(alpha > 0.0) {
        return Err(domain("alpha must be positive"));
    }
    let level = (1.0 + alpha) / spec.vertex_count() as f64;
    let mut walk = NbWalk::new(spec)?;
    let mut cur = walk.kernel().class_probs();
    let mut best = (f64::INFINITY, 0);
    for t in 0..=cap {
        walk.step();
        let next = walk.kernel().class_probs();
        let worst = cur
            .iter()
            .zip(&next)
            .map(|(a, b)| 0.5 * (a + b))
            .fold(0.0, f64::max);
        if worst <= level {
            return Ok(t);
        }
        if worst < best.0 {
            best = (worst, t);
        }
        cur = next;
    }
    Err(LabError::Divergence {
        message: format!("{spec}: no t <= {cap} meets the non-backtracking mixing criterion"),
        best_t: best.1,
    })
}

/// In-place Walsh-Hadamard transform (unnormalized).
fn fwht(a: &mut [f64]) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
}

/// `(f * g)(y) = Σ_u f(u) g(y - u)` by direct summation.
pub fn convolve_direct(spec: &GraphSpec, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let v = spec.vertex_count();
    if v > CONVOLUTION_BUDGET {
        return Err(resource(format!("{spec}: convolution over {v} vertices exceeds {CONVOLUTION_BUDGET}")));
    }
    Ok((0..v)
        .into_par_iter()
        .map(|y| {
            (0..v)
                .filter(|&u| f[u as usize] != 0.0)
                .map(|u| f[u as usize] * g[spec.difference(VertexId(u), VertexId(y)).0 as usize])
                .sum()
        })
        .collect())
}

/// Group convolution; Walsh-Hadamard on hypercubes, direct otherwise.
pub fn convolve(spec: &GraphSpec, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if spec.hypercube_dimension().is_none() {
        return convolve_direct(spec, f, g);
    }
    let (mut a, mut b) = (f.to_vec(), g.to_vec());
    fwht(&mut a);
    fwht(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fwht(&mut a);
    let scale = 1.0 / f.len() as f64;
    Ok(a.into_iter().map(|x| x * scale).collect())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleMode {
    Exact,
    Mc,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleValue {
    pub spec: GraphSpec,
    pub p: f64,
    pub mode: TriangleMode,
    /// `max_x ∇(x, x)`.
    pub same: f64,
    /// `max_{x ≠ y} ∇(x, y)`.
    pub other: f64,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

/// `τ(0, ·)` estimated from uniformly rooted clusters: every vertex `y` of
/// `C(r)` contributes to `τ(0, y - r)`.
pub fn two_point_mc(spec: GraphSpec, p: f64, trials: u64, seed: u64) -> Result<Vec<f64>> {
    let v = spec.vertex_count();
    if v as usize > DENSE_BUDGET {
        return Err(resource(format!("{spec}: {v} vertices exceed the dense budget of {DENSE_BUDGET}")));
    }
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    trial(spec, p, seed, 0)?;
    let counts = (0..trials)
        .into_par_iter()
        .map_init(
            || Explorer::new(spec),
            |explorer, i| -> Result<Vec<u64>> {
                let (sample, root) = trial(spec, p, seed, i)?;
                explorer.run(&sample, root, &ExploreOptions::default())?;
                Ok(explorer
                    .visited()
                    .iter()
                    .map(|&(y, _)| spec.difference(root, y).0)
                    .collect())
            },
        )
        .try_fold(
            || vec![0u64; v as usize],
            |mut acc, hits| {
                for g in hits? {
                    acc[g as usize] += 1;
                }
                Ok::<_, LabError>(acc)
            },
        )
        .try_reduce(
            || vec![0u64; v as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(counts.into_iter().map(|c| c as f64 / trials as f64).collect())
}

/// Worst-pair `∇_p(x, y) = Σ_{u,v} τ(x,u) τ(u,v) τ(v,y)`, with `x` fixed at
/// the origin by transitivity.
pub fn triangle_sum(spec: GraphSpec, p: f64, mode: TriangleMode, trials: u64, seed: u64) -> Result<TriangleValue> {
    let tau = match mode {
        TriangleMode::Exact => {
            let law = enumerate_exact(spec, p, VertexId(0), 0)?;
            law.two_point[0].clone()
        }
        TriangleMode::Mc => two_point_mc(spec, p, trials, seed)?,
    };
    let tri = convolve_direct(&spec, &convolve_direct(&spec, &tau, &tau)?, &tau)?;
    let other = tri[1..].iter().copied().fold(0.0, f64::max);
    let (trials, seed) = match mode {
        TriangleMode::Exact => (None, None),
        TriangleMode::Mc => (Some(trials), Some(seed)),
    };
    Ok(TriangleValue {
        spec,
        p,
        mode,
        same: tri[0],
        other,
        trials,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionSums {
    pub spec: GraphSpec,
    /// `None` when the horizon was given directly.
    pub alpha: Option<f64>,
    /// Kernel horizon: `t_mix(spec; α)` or the supplied horizon.
    pub horizon: u64,
    pub p_hat: f64,
    pub p_source: PSource,
    /// `|(p_hat (degree - 1))^horizon - 1|`.
    pub a1: f64,
    /// `max_y Σ_{u,v} Σ_{t1+t2+t3 >= 3, t_i <= horizon} P^t1(0,u) P^t2(u,v) P^t3(v,y)`.
    pub a2: f64,
    /// `Σ_v Σ_{t in [2, horizon]} Σ_{s in [1, t]} s P^s(0,v) P^t(0,v)`.
    pub heat: f64,
}

/// The three assumption diagnostics at horizon `nb_tmix(spec, alpha)`.
pub fn assumption_sums(spec: GraphSpec, alpha: f64, p_hat: f64, p_source: PSource) -> Result<AssumptionSums> {
    let horizon = nb_tmix(spec, alpha)?;
    let mut sums = assumption_sums_at(spec, horizon, p_hat, p_source)?;
    sums.alpha = Some(alpha);
    Ok(sums)
}

pub fn assumption_sums_at(spec: GraphSpec, horizon: u64, p_hat: f64, p_source: PSource) -> Result<AssumptionSums> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(domain(format!("p_hat = {p_hat} is not a probability")));
    }
    let v = spec.vertex_count();
    if spec.hypercube_dimension().is_none() && v > CONVOLUTION_BUDGET {
        return Err(resource(format!("{spec}: convolution over {v} vertices exceeds {CONVOLUTION_BUDGET}")));
    }
    let mut walk = NbWalk::new(spec)?;
    let n = v as usize;
    let mut partial = vec![0.0; n];
    let mut k = vec![0.0; n];
    let mut p1 = vec![0.0; n];
    let mut p2 = vec![0.0; n];
    let mut heat = 0.0;
    for t in 0..=horizon {
        if t > 0 {
            walk.step();
        }
        let pt = walk.kernel().to_vertices();
        if t >= 1 {
            for (acc, &x) in partial.iter_mut().zip(&pt) {
                *acc += t as f64 * x;
            }
        }
        if t >= 2 {
            heat += pt.iter().zip(&partial).map(|(a, b)| a * b).sum::<f64>();
        }
        for (acc, &x) in k.iter_mut().zip(&pt) {
            *acc += x;
        }
        match t {
            1 => p1 = pt,
            2 => p2 = pt,
            _ => {}
        }
    }
    let kkk = convolve(&spec, &convolve(&spec, &k, &k)?, &k)?;
    let p11 = convolve(&spec, &p1, &p1)?;
    let a2 = (0..n)
        .map(|y| {
            let low = f64::from(u8::from(y == 0)) + 3.0 * (p1[y] + p2[y] + p11[y]);
            kkk[y] - low
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let a1 = ((p_hat * f64::from(spec.degree() - 1)).powf(horizon as f64) - 1.0).abs();
    Ok(AssumptionSums {
        spec,
        alpha: None,
        horizon,
        p_hat,
        p_source,
        a1,
        a2,
        heat,
    })
}
