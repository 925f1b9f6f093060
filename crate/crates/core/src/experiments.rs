//! Scaling-law sweeps over `(graph, ε)` cells, ratio fitting, and report
//! emission.
//!
//! Working point: `p = p_hat (1 - ε)`, with `p_hat` either the anchor
//! `1/(degree - 1)` or a [`find_pc`] output; or an explicit `p`. The three
//! normalizations fitted below are
//!
//! * volume: `ε^-2 log(ε^3 V)`,
//! * diameter: `ε^-1 log(ε^3 V)`,
//! * lazy mixing: `ε^-3 log(ε^3 V)^2`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::{summarize, CensusOptions, Partition, DEFAULT_CENSUS_BUDGET};
use crate::error::{domain, Result};
use crate::estimators::{
    anchor_pc, estimate_boundary_curve, estimate_onearm_curve, find_pc, EstimatorResult, PSource, PcOptions,
};
use crate::graph::GraphSpec;
use crate::percolation::{AvoidSet, PercolationSample};
use crate::rng::trial_seed;
use crate::stats::{linear_fit, median, Summary};
use crate::walks::{lazy_tmix_bound, lazy_tmix_exact, DENSE_BUDGET};

/// Version tag written into every CSV row and JSON report.
pub const SWEEP_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub spec: GraphSpec,
    pub epsilon: f64,
    /// Required when the plan's source is [`PSource::Explicit`].
    #[serde(default)]
    pub p: Option<f64>,
}

/// Settings for [`find_pc`] when it supplies `p_hat`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcSettings {
    pub lambda: f64,
    pub tol: f64,
    pub trials_per_probe: u64,
}

/// One-arm and boundary curves from root-sampled estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePlan {
    pub r_max: u32,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepPlan {
    pub cells: Vec<SweepCell>,
    pub p_source: PSource,
    pub pc: Option<PcSettings>,
    /// Census seeds per cell.
    pub seeds: u64,
    /// Ranks `j` of `|C_j|` recorded besides `|C_1|`.
    pub ranks: Vec<u64>,
    pub diameters: bool,
    pub tmix: bool,
    /// Number of largest clusters examined for `T_mix`.
    pub tmix_top: usize,
    pub onearm: Option<CurvePlan>,
    pub boundary: Option<CurvePlan>,
    pub master_seed: u64,
    pub epsilon_max: f64,
    /// Minimum `ε^3 V`.
    pub regime_floor: f64,
    pub c1_band: (f64, f64),
    pub delta_band: (f64, f64),
    pub census_budget: u64,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            cells: Vec::new(),
            p_source: PSource::Anchor,
            pc: None,
            seeds: 10,
            ranks: Vec::new(),
            diameters: true,
            tmix: false,
            tmix_top: 10,
            onearm: None,
            boundary: None,
            master_seed: 0,
            epsilon_max: 0.5,
            regime_floor: 20.0,
            c1_band: (0.5, 4.0),
            delta_band: (0.6, 1.4),
            census_budget: DEFAULT_CENSUS_BUDGET,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(domain("sweep plan has no cells"));
        }
        if self.seeds == 0 {
            return Err(domain("sweep plan needs at least one seed per cell"));
        }
        if self.p_source == PSource::FindPc && self.pc.is_none() {
            return Err(domain("p_source find_pc needs pc settings"));
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if !(0.0..1.0).contains(&cell.epsilon) {
                return Err(domain(format!("cell {i}: epsilon {} not in [0, 1)", cell.epsilon)));
            }
            match (self.p_source, cell.p) {
                (PSource::Explicit, None) => return Err(domain(format!("cell {i}: explicit p missing"))),
                (PSource::Explicit, Some(p)) if !(0.0..=1.0).contains(&p) => {
                    return Err(domain(format!("cell {i}: p = {p} is not a probability")))
                }
                _ => {}
            }
        }
        if self.tmix && self.tmix_top == 0 {
            return Err(domain("tmix_top must be positive"));
        }
        Ok(())
    }

    /// `(in regime, reason if not)`.
    pub fn regime(&self, cell: &SweepCell) -> (bool, Option<String>) {
        let e3v = eps3v(cell.epsilon, cell.spec.vertex_count());
        if !(cell.epsilon > 0.0) {
            (false, Some("epsilon is zero".into()))
        } else if cell.epsilon > self.epsilon_max {
            (false, Some(format!("epsilon {} above {}", cell.epsilon, self.epsilon_max)))
        } else if e3v < self.regime_floor {
            (false, Some(format!("eps^3 V = {e3v:.3} below {}", self.regime_floor)))
        } else {
            (true, None)
        }
    }
}

pub fn eps3v(epsilon: f64, vertex_count: u64) -> f64 {
    epsilon.powi(3) * vertex_count as f64
}

/// Raw per-seed values together with their summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub values: Vec<f64>,
    pub summary: Summary,
}

impl Series {
    fn new(values: Vec<f64>) -> Self {
        let summary = Summary::of(&values);
        Series { values, summary }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub spec: GraphSpec,
    pub vertices: u64,
    pub epsilon: f64,
    pub p: f64,
    pub p_source: PSource,
    /// The `p_c` estimate `p` was derived from.
    pub p_hat: Option<f64>,
    pub eps3v: f64,
    pub in_regime: bool,
    pub regime_note: Option<String>,
    pub cell_seed: u64,
    /// Configuration seed of every census, in order.
    pub seeds: Vec<u64>,
    pub c1: Option<Series>,
    pub cj: BTreeMap<u64, Series>,
    pub delta_max: Option<Series>,
    pub tmix_max: Option<Series>,
    /// Rank (1 = largest) of the cluster achieving `T_mix^max`, per seed.
    pub tmix_rank: Vec<u32>,
    /// Whether `T_mix^max` was computed exactly (else it is the bound).
    pub tmix_exact: Vec<bool>,
    /// Clusters where both `T_mix` and `8|E| diam` were computed.
    pub tmix_bound_checked: u64,
    pub tmix_bound_violations: u64,
    pub onearm: Vec<EstimatorResult>,
    pub boundary: Vec<EstimatorResult>,
    pub errors: Vec<String>,
}

/// Plan plus rows, the provenance-complete sweep document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub plan: SweepPlan,
    pub rows: Vec<SweepRow>,
}

struct SeedOutcome {
    c1: f64,
    cj: Vec<f64>,
    delta_max: Option<f64>,
    tmix: Option<(u64, u32, bool)>,
    bound_checked: u64,
    bound_violations: u64,
}

fn run_seed(plan: &SweepPlan, spec: GraphSpec, p: f64, seed: u64) -> Result<SeedOutcome> {
    let sample = PercolationSample::new(spec, p, seed)?;
    let partition = Partition::build(&sample, plan.census_budget)?;
    let options = CensusOptions {
        diameters: plan.diameters,
        max_vertices: plan.census_budget,
        ..CensusOptions::default()
    };
    let summary = summarize(&sample, &partition, &options)?;
    let mut outcome = SeedOutcome {
        c1: summary.jth_largest(1) as f64,
        cj: plan.ranks.iter().map(|&j| summary.jth_largest(j as usize) as f64).collect(),
        delta_max: summary.delta_max.map(f64::from),
        tmix: None,
        bound_checked: 0,
        bound_violations: 0,
    };
    if plan.tmix {
        let mut best: Option<(u64, u32, bool)> = None;
        for c in 0..partition.cluster_count().min(plan.tmix_top) {
            let graph = partition.cluster_graph(c);
            let bound = lazy_tmix_bound(&graph)?;
            let (value, exact) = if graph.size() <= DENSE_BUDGET {
                let exact = lazy_tmix_exact(&graph)?;
                outcome.bound_checked += 1;
                outcome.bound_violations += u64::from(bound < exact);
                (exact, true)
            } else {
                (bound, false)
            };
            if best.map_or(true, |(b, _, _)| value > b) {
                best = Some((value, c as u32 + 1, exact));
            }
        }
        outcome.tmix = best;
    }
    Ok(outcome)
}

fn run_cell(plan: &SweepPlan, index: usize) -> SweepRow {
    let cell = &plan.cells[index];
    let spec = cell.spec;
    let cell_seed = trial_seed(plan.master_seed, index as u64);
    let (in_regime, regime_note) = plan.regime(cell);
    let mut row = SweepRow {
        cell: index,
        spec,
        vertices: spec.vertex_count(),
        epsilon: cell.epsilon,
        p: f64::NAN,
        p_source: plan.p_source,
        p_hat: None,
        eps3v: eps3v(cell.epsilon, spec.vertex_count()),
        in_regime,
        regime_note,
        cell_seed,
        seeds: Vec::new(),
        c1: None,
        cj: BTreeMap::new(),
        delta_max: None,
        tmix_max: None,
        tmix_rank: Vec::new(),
        tmix_exact: Vec::new(),
        tmix_bound_checked: 0,
        tmix_bound_violations: 0,
        onearm: Vec::new(),
        boundary: Vec::new(),
        errors: Vec::new(),
    };
    let p = match plan.p_source {
        PSource::Explicit => cell.p.expect("validated"),
        PSource::Anchor => match anchor_pc(&spec) {
            Ok(pc) => {
                row.p_hat = Some(pc);
                pc * (1.0 - cell.epsilon)
            }
            Err(e) => {
                row.errors.push(e.to_string());
                return row;
            }
        },
        PSource::FindPc => {
            let pc = plan.pc.as_ref().expect("validated");
            match find_pc(spec, &PcOptions::new(pc.lambda, pc.tol, pc.trials_per_probe, cell_seed)) {
                Ok(est) => {
                    row.p_hat = Some(est.p_hat);
                    est.p_hat * (1.0 - cell.epsilon)
                }
                Err(e) => {
                    row.errors.push(e.to_string());
                    return row;
                }
            }
        }
    };
    row.p = p;

    if spec.vertex_count() <= plan.census_budget {
        row.seeds = (0..plan.seeds).map(|k| trial_seed(cell_seed, k)).collect();
        let outcomes: Vec<Result<SeedOutcome>> =
            row.seeds.par_iter().map(|&seed| run_seed(plan, spec, p, seed)).collect();
        let mut good = Vec::new();
        for (seed, outcome) in row.seeds.iter().zip(outcomes) {
            match outcome {
                Ok(o) => good.push(o),
                Err(e) => row.errors.push(format!("seed {seed}: {e}")),
            }
        }
        if !good.is_empty() {
            row.c1 = Some(Series::new(good.iter().map(|o| o.c1).collect()));
            for (i, &j) in plan.ranks.iter().enumerate() {
                row.cj.insert(j, Series::new(good.iter().map(|o| o.cj[i]).collect()));
            }
            if plan.diameters {
                row.delta_max = Some(Series::new(good.iter().filter_map(|o| o.delta_max).collect()));
            }
            if plan.tmix {
                let best: Vec<_> = good.iter().filter_map(|o| o.tmix).collect();
                row.tmix_max = Some(Series::new(best.iter().map(|b| b.0 as f64).collect()));
                row.tmix_rank = best.iter().map(|b| b.1).collect();
                row.tmix_exact = best.iter().map(|b| b.2).collect();
                row.tmix_bound_checked = good.iter().map(|o| o.bound_checked).sum();
                row.tmix_bound_violations = good.iter().map(|o| o.bound_violations).sum();
            }
        }
    } else {
        row.errors.push(format!(
            "census skipped: V = {} exceeds budget {}; root-sampled curves only",
            spec.vertex_count(),
            plan.census_budget
        ));
    }

    if let Some(curve) = &plan.onearm {
        match estimate_onearm_curve(spec, p, curve.r_max, curve.trials, cell_seed, &AvoidSet::new()) {
            Ok(c) => row.onearm = c,
            Err(e) => row.errors.push(format!("onearm: {e}")),
        }
    }
    if let Some(curve) = &plan.boundary {
        match estimate_boundary_curve(spec, p, curve.r_max, curve.trials, cell_seed) {
            Ok(c) => row.boundary = c,
            Err(e) => row.errors.push(format!("boundary: {e}")),
        }
    }
    row
}

/// Runs every cell; per-cell failures are recorded in the row.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>> {
    plan.validate()?;
    Ok((0..plan.cells.len()).into_par_iter().map(|i| run_cell(plan, i)).collect())
}

pub const CSV_HEADER: &str = "schema_version,cell,spec,vertices,epsilon,p,p_source,p_hat,eps3v,in_regime,\
master_seed,cell_seed,seeds,c1_mean,c1_stderr,c1_median,delta_max_mean,delta_max_stderr,delta_max_median,\
tmix_max_mean,tmix_max_median,tmix_bound_checked,tmix_bound_violations,cj,onearm,boundary,errors";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn curve(points: &[EstimatorResult]) -> String {
    points.iter().map(|r| r.mean.to_string()).collect::<Vec<_>>().join(";")
}

/// One line per row under [`CSV_HEADER`]. Curves and `|C_j|` medians are
/// `;`-separated inside their column.
pub fn rows_to_csv(rows: &[SweepRow], master_seed: u64) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let stat = |s: &Option<Series>, f: fn(&Summary) -> f64| opt(s.as_ref().map(|s| f(&s.summary)));
        let p_source = match row.p_source {
            PSource::Anchor => "anchor",
            PSource::FindPc => "find_pc",
            PSource::Explicit => "explicit",
        };
        let cj = row
            .cj
            .iter()
            .map(|(j, s)| format!("{j}:{}", s.summary.median))
            .collect::<Vec<_>>()
            .join(";");
        let errors = row.errors.join(" | ").replace([',', '\n'], " ");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            SWEEP_SCHEMA_VERSION,
            row.cell,
            row.spec,
            row.vertices,
            row.epsilon,
            row.p,
            p_source,
            opt(row.p_hat),
            row.eps3v,
            row.in_regime,
            master_seed,
            row.cell_seed,
            row.seeds.len(),
            stat(&row.c1, |s| s.mean),
            stat(&row.c1, |s| s.stderr),
            stat(&row.c1, |s| s.median),
            stat(&row.delta_max, |s| s.mean),
            stat(&row.delta_max, |s| s.stderr),
            stat(&row.delta_max, |s| s.median),
            stat(&row.tmix_max, |s| s.mean),
            stat(&row.tmix_max, |s| s.median),
            row.tmix_bound_checked,
            row.tmix_bound_violations,
            cj,
            curve(&row.onearm),
            curve(&row.boundary),
            errors,
        );
    }
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitLaw {
    C1Volume,
    DeltaMax,
    Tmix,
    OnearmProfile,
}

impl std::str::FromStr for FitLaw {
    type Err = crate::error::LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c1_volume" | "C1_volume" => Ok(FitLaw::C1Volume),
            "delta_max" => Ok(FitLaw::DeltaMax),
            "tmix" => Ok(FitLaw::Tmix),
            "onearm_profile" => Ok(FitLaw::OnearmProfile),
            other => Err(domain(format!("unknown law {other:?}"))),
        }
    }
}

/// Normalization of a law at `(ε, V)`; `None` for the one-arm profile.
pub fn law_scale(law: FitLaw, epsilon: f64, vertex_count: u64) -> Option<f64> {
    let log = eps3v(epsilon, vertex_count).ln();
    match law {
        FitLaw::C1Volume => Some(log / (epsilon * epsilon)),
        FitLaw::DeltaMax => Some(log / epsilon),
        FitLaw::Tmix => Some(log * log / epsilon.powi(3)),
        FitLaw::OnearmProfile => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowRatio {
    pub cell: usize,
    pub eps3v: f64,
    /// Per-seed ratios (volume, diameter, mixing laws).
    pub per_seed: Vec<f64>,
    /// Median per-seed ratio; for the one-arm profile, the largest absolute
    /// residual of the two-piece fit.
    pub ratio: f64,
    pub onearm: Option<OnearmFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub law: FitLaw,
    pub rows: Vec<RowRatio>,
    /// Slope of the row ratio against `ln(ε^3 V)`.
    pub trend_slope: f64,
    /// Largest row ratio over the smallest.
    pub dispersion: f64,
    /// Cells left out because they were out of regime or had no data.
    pub excluded: Vec<usize>,
}

impl FitReport {
    /// Fraction of all per-seed ratios inside `[lo, hi]`.
    pub fn band_fraction(&self, lo: f64, hi: f64) -> f64 {
        let all: Vec<f64> = self.rows.iter().flat_map(|r| r.per_seed.iter().copied()).collect();
        all.iter().filter(|&&x| (lo..=hi).contains(&x)).count() as f64 / all.len() as f64
    }
}

/// Least-squares fit of `log P(∂B(r) ≠ ∅)` to
/// `c_1 - log r` for `r <= 1/ε` and `c_2 + log ε + r log(1 - ε)` beyond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnearmFit {
    pub epsilon: f64,
    pub points: usize,
    pub c_short: Option<f64>,
    pub c_long: Option<f64>,
    /// `log P - model` at every fitted point, as `(r, residual)`.
    pub residuals: Vec<(u32, f64)>,
    pub max_abs_residual: f64,
    pub residual_norm: f64,
    /// Free least-squares slope of `log P` against `r` for `r > 1/ε`.
    pub long_slope: Option<f64>,
    /// `log(1 - ε)`.
    pub model_slope: f64,
}

/// Points `(r, P(∂B(r) ≠ ∅))` of a curve whose hit count is at least
/// `min_hits`, restricted to `r_lo..=r_hi`.
pub fn curve_points(curve: &[EstimatorResult], min_hits: f64, r_lo: u32, r_hi: u32) -> Vec<(u32, f64)> {
    curve
        .iter()
        .enumerate()
        .filter(|&(r, est)| {
            let r = r as u32;
            r >= r_lo.max(1) && r <= r_hi && est.mean * est.trials as f64 >= min_hits && est.mean > 0.0
        })
        .map(|(r, est)| (r as u32, est.mean))
        .collect()
}

pub fn onearm_profile_fit(points: &[(u32, f64)], epsilon: f64) -> Result<OnearmFit> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain("onearm profile needs 0 < epsilon < 1"));
    }
    let points: Vec<(u32, f64)> = points.iter().copied().filter(|&(r, p)| r >= 1 && p > 0.0).collect();
    if points.is_empty() {
        return Err(domain("onearm profile has no usable points"));
    }
    let cut = 1.0 / epsilon;
    let model_slope = (1.0 - epsilon).ln();
    let shape = |r: f64| {
        if r <= cut {
            -r.ln()
        } else {
            epsilon.ln() + r * model_slope
        }
    };
    let offset = |short: bool| {
        let d: Vec<f64> = points
            .iter()
            .filter(|&&(r, _)| (f64::from(r) <= cut) == short)
            .map(|&(r, p)| p.ln() - shape(f64::from(r)))
            .collect();
        (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
    };
    let (c_short, c_long) = (offset(true), offset(false));
    let residuals: Vec<(u32, f64)> = points
        .iter()
        .map(|&(r, p)| {
            let rf = f64::from(r);
            let c = if rf <= cut { c_short } else { c_long };
            (r, p.ln() - shape(rf) - c.expect("piece has points"))
        })
        .collect();
    let max_abs_residual = residuals.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let residual_norm = residuals.iter().map(|r| r.1 * r.1).sum::<f64>().sqrt();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|&&(r, _)| f64::from(r) > cut)
        .map(|&(r, p)| (f64::from(r), p.ln()))
        .unzip();
    let long_slope = linear_fit(&xs, &ys).map(|(_, b)| b);
    Ok(OnearmFit {
        epsilon,
        points: points.len(),
        c_short,
        c_long,
        residuals,
        max_abs_residual,
        residual_norm,
        long_slope,
        model_slope,
    })
}

/// Ratio fit of one law across in-regime rows. Needs at least three.
///
/// The one-arm profile uses one-arm points with at least `min_hits` hits,
/// over `r in [2, 3 ε^-1 log(ε^3 V)]`.
pub fn fit_ratios(rows: &[SweepRow], law: FitLaw) -> Result<FitReport> {
    fit_ratios_with(rows, law, 30.0)
}

pub fn fit_ratios_with(rows: &[SweepRow], law: FitLaw, min_hits: f64) -> Result<FitReport> {
    let mut fitted = Vec::new();
    let mut excluded = Vec::new();
    for row in rows {
        if !row.in_regime {
            excluded.push(row.cell);
            continue;
        }
        let series = match law {
            FitLaw::C1Volume => row.c1.as_ref(),
            FitLaw::DeltaMax => row.delta_max.as_ref(),
            FitLaw::Tmix => row.tmix_max.as_ref(),
            FitLaw::OnearmProfile => None,
        };
        let entry = match (law_scale(law, row.epsilon, row.vertices), series) {
            (Some(scale), Some(series)) if !series.values.is_empty() => {
                let per_seed: Vec<f64> = series.values.iter().map(|x| x / scale).collect();
                Some(RowRatio {
                    cell: row.cell,
                    eps3v: row.eps3v,
                    ratio: median(&per_seed),
                    per_seed,
                    onearm: None,
                })
            }
            (None, _) if !row.onearm.is_empty() => {
                let r_hi = (3.0 / row.epsilon * row.eps3v.ln()).floor() as u32;
                let points = curve_points(&row.onearm, min_hits, 2, r_hi);
                onearm_profile_fit(&points, row.epsilon).ok().map(|fit| RowRatio {
                    cell: row.cell,
                    eps3v: row.eps3v,
                    per_seed: Vec::new(),
                    ratio: fit.max_abs_residual,
                    onearm: Some(fit),
                })
            }
            _ => None,
        };
        match entry {
            Some(e) => fitted.push(e),
            None => excluded.push(row.cell),
        }
    }
    if fitted.len() < 3 {
        return Err(domain(format!(
            "{} usable in-regime rows; at least 3 are needed",
            fitted.len()
        )));
    }
    let xs: Vec<f64> = fitted.iter().map(|r| r.eps3v.ln()).collect();
    let ys: Vec<f64> = fitted.iter().map(|r| r.ratio).collect();
    let trend_slope = linear_fit(&xs, &ys).map_or(0.0, |(_, b)| b);
    let (lo, hi) = ys.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &y| (a.min(y), b.max(y)));
    Ok(FitReport {
        law,
        rows: fitted,
        trend_slope,
        dispersion: hi / lo,
        excluded,
    })
}
