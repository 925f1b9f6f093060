//! Root-sampled Monte Carlo estimators and the critical-point finder.
//!
//! Trial `i` under master seed `s` uses configuration seed
//! `trial_seed(s, i)` and a uniform root drawn from a sub-stream of that
//! seed. Per-trial values are integers and are aggregated as exact `u128`
//! sums, so a result is bit-identical whatever the thread count, and the
//! estimates at two values of `p` share their configurations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::graph::{GraphSpec, VertexId};
use crate::percolation::{AvoidSet, ExploreOptions, Explorer, Off, PercolationSample};
use crate::rng::{below, substream, trial_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// `E|C(v)|`.
    Susceptibility,
    /// `P(∂B(r) ≠ ∅)`.
    OneArm { r: u32 },
    /// `E|∂B(r)|`.
    BoundaryVolume { r: u32 },
    /// `P(|C| >= k)`.
    ClusterTail { k: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub observable: Observable,
    pub spec: GraphSpec,
    pub p: f64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl EstimatorResult {
    /// Whether `value` lies within `z` standard errors of the mean.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.stderr
    }
}

/// Exact running moments of integer samples.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
struct Moments {
    n: u64,
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn push(&mut self, x: u64) {
        self.n += 1;
        self.sum += u128::from(x);
        self.sum_sq += u128::from(x) * u128::from(x);
    }

    fn merge(self, other: Moments) -> Moments {
        Moments {
            n: self.n + other.n,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    fn mean_stderr(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum as f64 / n;
        if self.n < 2 {
            return (mean, 0.0);
        }
        // n * sum_sq - sum^2 is exact in u128 for every workload here
        let spread = u128::from(self.n) * self.sum_sq - self.sum * self.sum;
        let var = spread as f64 / (n * (n - 1.0));
        (mean, (var / n).sqrt())
    }
}

/// The configuration and root of trial `index`.
pub fn trial(spec: GraphSpec, p: f64, master_seed: u64, index: u64) -> Result<(PercolationSample, VertexId)> {
    let seed = trial_seed(master_seed, index);
    let root = VertexId(below(substream(seed, 0), spec.vertex_count()));
    Ok((PercolationSample::new(spec, p, seed)?, root))
}

/// Runs `trials` independent explorations and sums the `width` integer
/// values each one reports.
fn run_trials<F>(
    spec: GraphSpec,
    p: f64,
    trials: u64,
    master_seed: u64,
    avoid: &AvoidSet,
    options: ExploreOptions,
    width: usize,
    observe: F,
) -> Result<Vec<Moments>>
where
    F: Fn(&Explorer, &mut [u64]) + Sync,
{
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    PercolationSample::new(spec, p, master_seed)?;
    (0..trials)
        .into_par_iter()
        .map_init(
            || (Explorer::new(spec), vec![0u64; width]),
            |(explorer, buf), i| -> Result<Vec<Moments>> {
                let (sample, root) = trial(spec, p, master_seed, i)?;
                explorer.run(&Off { inner: &sample, avoid }, root, &options)?;
                buf.fill(0);
                observe(explorer, buf);
                Ok(buf
                    .iter()
                    .map(|&x| {
                        let mut m = Moments::default();
                        m.push(x);
                        m
                    })
                    .collect())
            },
        )
        .try_reduce(
            || vec![Moments::default(); width],
            |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
        )
}

fn result(observable: Observable, spec: GraphSpec, p: f64, m: Moments, master_seed: u64) -> EstimatorResult {
    let (mean, stderr) = m.mean_stderr();
    EstimatorResult {
        observable,
        spec,
        p,
        mean,
        stderr,
        trials: m.n,
        master_seed,
    }
}

/// `χ(p) = E|C(v)|` over independent (configuration, uniform root) pairs.
pub fn estimate_susceptibility(spec: GraphSpec, p: f64, trials: u64, seed: u64) -> Result<EstimatorResult> {
    let m = run_trials(spec, p, trials, seed, &AvoidSet::new(), ExploreOptions::default(), 1, |ex, out| {
        out[0] = ex.size();
    })?;
    Ok(result(Observable::Susceptibility, spec, p, m[0], seed))
}

/// `P(∂B(r) ≠ ∅)` off `avoid`, exploring no further than radius `r`.
pub fn estimate_onearm(
    spec: GraphSpec,
    p: f64,
    r: u32,
    trials: u64,
    seed: u64,
    avoid: &AvoidSet,
) -> Result<EstimatorResult> {
    let curve = estimate_onearm_curve(spec, p, r, trials, seed, avoid)?;
    Ok(curve.into_iter().last().expect("curve has r + 1 points"))
}

/// One-arm estimates for every radius `0..=r_max` from a single exploration
/// per trial.
pub fn estimate_onearm_curve(
    spec: GraphSpec,
    p: f64,
    r_max: u32,
    trials: u64,
    seed: u64,
    avoid: &AvoidSet,
) -> Result<Vec<EstimatorResult>> {
    let width = r_max as usize + 1;
    let m = run_trials(spec, p, trials, seed, avoid, ExploreOptions::radius(r_max), width, |ex, out| {
        for (slot, &n) in out.iter_mut().zip(ex.layers()) {
            *slot = u64::from(n > 0);
        }
    })?;
    Ok(m.into_iter()
        .enumerate()
        .map(|(r, m)| result(Observable::OneArm { r: r as u32 }, spec, p, m, seed))
        .collect())
}

/// `E|∂B(r)|`.
pub fn estimate_boundary_volume(spec: GraphSpec, p: f64, r: u32, trials: u64, seed: u64) -> Result<EstimatorResult> {
    let curve = estimate_boundary_curve(spec, p, r, trials, seed)?;
    Ok(curve.into_iter().last().expect("curve has r + 1 points"))
}

pub fn estimate_boundary_curve(
    spec: GraphSpec,
    p: f64,
    r_max: u32,
    trials: u64,
    seed: u64,
) -> Result<Vec<EstimatorResult>> {
    let width = r_max as usize + 1;
    let m = run_trials(
        spec,
        p,
        trials,
        seed,
        &AvoidSet::new(),
        ExploreOptions::radius(r_max),
        width,
        |ex, out| {
            for (slot, &n) in out.iter_mut().zip(ex.layers()) {
                *slot = n;
            }
        },
    )?;
    Ok(m.into_iter()
        .enumerate()
        .map(|(r, m)| result(Observable::BoundaryVolume { r: r as u32 }, spec, p, m, seed))
        .collect())
}

/// `P(|C| >= k)`, stopping each exploration as soon as `k` vertices are found.
pub fn estimate_cluster_tail(spec: GraphSpec, p: f64, k: u64, trials: u64, seed: u64) -> Result<EstimatorResult> {
    if k == 0 {
        return Err(domain("tail threshold k must be at least 1"));
    }
    let m = run_trials(spec, p, trials, seed, &AvoidSet::new(), ExploreOptions::size(k), 1, |ex, out| {
        out[0] = u64::from(ex.size() >= k);
    })?;
    Ok(result(Observable::ClusterTail { k }, spec, p, m[0], seed))
}

/// Where a working value of `p_c` came from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PSource {
    /// The closed-form anchor `1 / (degree - 1)`.
    Anchor,
    /// Output of [`find_pc`].
    FindPc,
    /// Supplied by the caller.
    Explicit,
}

/// The anchor `1 / (degree - 1)`.
pub fn anchor_pc(spec: &GraphSpec) -> Result<f64> {
    if spec.degree() < 2 {
        return Err(domain(format!("{spec} has degree below 2")));
    }
    Ok(1.0 / f64::from(spec.degree() - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcOptions {
    pub lambda: f64,
    pub tol: f64,
    /// Trials at the first attempt of every probe.
    pub trials_per_probe: u64,
    /// A probe doubles its trials until the target leaves the
    /// `mean ± band_z * stderr` band; beyond this cap it is ambiguous.
    pub max_trials_per_probe: u64,
    pub band_z: f64,
    pub seed: u64,
}

impl PcOptions {
    pub fn new(lambda: f64, tol: f64, trials_per_probe: u64, seed: u64) -> Self {
        PcOptions {
            lambda,
            tol,
            trials_per_probe,
            max_trials_per_probe: trials_per_probe.saturating_mul(256),
            band_z: 2.0,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcProbe {
    pub p: f64,
    pub chi: f64,
    pub stderr: f64,
    pub trials: u64,
    /// `true` when `χ(p)` was resolved below the target.
    pub below_target: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub spec: GraphSpec,
    pub lambda: f64,
    /// `λ V^{1/3}`.
    pub target: f64,
    pub p_hat: f64,
    pub bracket: (f64, f64),
    pub chi_at_p_hat: EstimatorResult,
    pub probes: Vec<PcProbe>,
}

/// Solves `χ(p) = λ V^{1/3}` by bisection on `[0, 1]` with a
/// confidence-aware probe rule.
pub fn find_pc(spec: GraphSpec, options: &PcOptions) -> Result<PcEstimate> {
    if !(options.lambda > 0.0) || !(options.tol > 0.0) {
        return Err(domain("lambda and tol must be positive"));
    }
    if options.trials_per_probe == 0 || options.max_trials_per_probe < options.trials_per_probe {
        return Err(domain("trial budget per probe must be positive and below its cap"));
    }
    let v = spec.vertex_count() as f64;
    let target = options.lambda * v.cbrt();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(target > 1.0 && target < v) {
        return Err(LabError::Precision {
            message: format!("target λV^(1/3) = {target} is not bracketed by χ(0) = 1 and χ(1) = {v}"),
            lo,
            hi,
        });
    }
    let mut probes = Vec::new();
    while hi - lo > options.tol {
        let mid = 0.5 * (lo + hi);
        let mut n = options.trials_per_probe;
        loop {
            let est = estimate_susceptibility(spec, mid, n, options.seed)?;
            let band = options.band_z * est.stderr;
            let verdict = if est.mean + band < target {
                Some(true)
            } else if est.mean - band > target {
                Some(false)
            } else {
                None
            };
            if let Some(below) = verdict {
                probes.push(PcProbe {
                    p: mid,
                    chi: est.mean,
                    stderr: est.stderr,
                    trials: n,
                    below_target: below,
                });
                if below {
                    lo = mid;
                } else {
                    hi = mid;
                }
                break;
            }
            if n >= options.max_trials_per_probe {
                return Err(LabError::Precision {
                    message: format!(
                        "probe p = {mid}: χ = {} ± {} cannot be separated from target {target} \
                         within {n} trials",
                        est.mean, est.stderr
                    ),
                    lo,
                    hi,
                });
            }
            n = (n * 2).min(options.max_trials_per_probe);
        }
    }
    let p_hat = 0.5 * (lo + hi);
    let chi_at_p_hat = estimate_susceptibility(spec, p_hat, options.trials_per_probe, options.seed)?;
    Ok(PcEstimate {
        spec,
        lambda: options.lambda,
        target,
        p_hat,
        bracket: (lo, hi),
        chi_at_p_hat,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> GraphSpec {
        s.parse().unwrap()
    }

    #[test]
    fn degenerate_p_zero() {
        let r = estimate_susceptibility(spec("Q8"), 0.0, 500, 1).unwrap();
        assert_eq!((r.mean, r.stderr), (1.0, 0.0));
        let r = estimate_boundary_volume(spec("Q8"), 0.3, 0, 500, 1).unwrap();
        assert_eq!((r.mean, r.stderr), (1.0, 0.0));
        let r = estimate_onearm(spec("Q8"), 0.3, 0, 500, 1, &AvoidSet::new()).unwrap();
        assert_eq!(r.mean, 1.0);
        let r = estimate_cluster_tail(spec("Q8"), 0.3, 1, 500, 1).unwrap();
        assert_eq!(r.mean, 1.0);
    }

    #[test]
    fn one_step_values() {
        let (m, p) = (10u32, 0.07f64);
        let s = spec("Q10");
        let q = 1.0 - (1.0 - p).powi(m as i32);
        let arm = estimate_onearm(s, p, 1, 100_000, 3, &AvoidSet::new()).unwrap();
        assert!(arm.covers(q, 4.0), "{arm:?} vs {q}");
        let tail = estimate_cluster_tail(s, p, 2, 100_000, 3).unwrap();
        assert!(tail.covers(q, 4.0), "{tail:?} vs {q}");
        let b1 = estimate_boundary_volume(s, p, 1, 100_000, 3).unwrap();
        assert!(b1.covers(f64::from(m) * p, 4.0), "{b1:?}");
        // shared seeds: the r = 1 one-arm event and |C| >= 2 are the same event
        assert_eq!(arm.mean, tail.mean);
    }

    #[test]
    fn four_cycle_susceptibility() {
        let r = estimate_susceptibility(spec("Q2"), 0.5, 100_000, 17).unwrap();
        assert!(r.covers(2.5625, 3.0), "{r:?}");
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let a = estimate_susceptibility(spec("Q12"), 0.09, 20_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_susceptibility(spec("Q12"), 0.09, 20_000, 5).unwrap());
        assert_eq!(a, b);
        let c = estimate_susceptibility(spec("Q12"), 0.09, 20_000, 6).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn chi_monotone_under_shared_seeds() {
        let s = spec("Q10");
        let mut last = 0.0;
        for i in 0..12 {
            let p = 0.02 * f64::from(i);
            let r = estimate_susceptibility(s, p, 3000, 99).unwrap();
            assert!(r.mean >= last, "p = {p}");
            last = r.mean;
        }
    }

    #[test]
    fn onearm_curve_monotone_in_r() {
        let curve = estimate_onearm_curve(spec("Q12"), 0.1, 12, 20_000, 8, &AvoidSet::new()).unwrap();
        assert!(curve.windows(2).all(|w| w[1].mean <= w[0].mean));
        let single = estimate_onearm(spec("Q12"), 0.1, 5, 20_000, 8, &AvoidSet::new()).unwrap();
        assert_eq!(single.mean, curve[5].mean);
    }

    #[test]
    fn avoiding_edges_never_helps() {
        let s = spec("Q8");
        let avoid = AvoidSet::around_vertices(&s, &[VertexId(0), VertexId(255), VertexId(17)]).unwrap();
        let free = estimate_onearm_curve(s, 0.2, 8, 20_000, 4, &AvoidSet::new()).unwrap();
        let off = estimate_onearm_curve(s, 0.2, 8, 20_000, 4, &avoid).unwrap();
        assert_eq!(off[0].mean, 1.0);
        for (f, o) in free.iter().zip(&off) {
            assert!(o.mean <= f.mean);
        }
        assert!(off[3].mean < free[3].mean);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(estimate_susceptibility(spec("Q4"), 0.5, 0, 1).is_err());
        assert!(estimate_susceptibility(spec("Q4"), 1.5, 10, 1).is_err());
        assert!(estimate_cluster_tail(spec("Q4"), 0.5, 0, 10, 1).is_err());
        assert!(find_pc(spec("Q4"), &PcOptions::new(0.0, 1e-3, 100, 1)).is_err());
        assert!(find_pc(spec("Q4"), &PcOptions::new(1.0, 0.0, 100, 1)).is_err());
    }

    #[test]
    fn find_pc_brackets_target() {
        let s = spec("Q10");
        let est = find_pc(s, &PcOptions::new(1.0, 1e-3, 20_000, 1)).unwrap();
        assert!(est.bracket.1 - est.bracket.0 <= 1e-3);
        assert!((est.target - 1024f64.cbrt()).abs() < 1e-12);
        let below = estimate_susceptibility(s, est.bracket.0 - 0.02, 20_000, 2).unwrap();
        let above = estimate_susceptibility(s, est.bracket.1 + 0.02, 20_000, 2).unwrap();
        assert!(below.mean < est.target && above.mean > est.target);
        let band = 3.0 * est.chi_at_p_hat.stderr;
        assert!((est.chi_at_p_hat.mean - est.target).abs() <= band + 0.5);
    }

    #[test]
    fn find_pc_decreases_with_complete_graph_size() {
        let mut last = 1.0;
        for n in [16u64, 32, 64] {
            let est = find_pc(GraphSpec::complete(n).unwrap(), &PcOptions::new(1.0, 2e-3, 10_000, 3)).unwrap();
            assert!(est.p_hat < last, "K{n}: {}", est.p_hat);
            last = est.p_hat;
        }
    }

    #[test]
    fn find_pc_reports_ambiguity() {
        // a single trial can never resolve anything beyond the trivial probes
        let mut opts = PcOptions::new(1.0, 1e-6, 2, 1);
        opts.max_trials_per_probe = 4;
        match find_pc(spec("Q10"), &opts) {
            Err(LabError::Precision { lo, hi, .. }) => assert!(lo < hi),
            other => panic!("expected precision error, got {other:?}"),
        }
    }
}
