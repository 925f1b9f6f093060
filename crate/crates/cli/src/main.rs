//! `perc-lab`: command-line front end for the percolation laboratory.
//!
//! Every subcommand prints a JSON document `{command, seed, result}` (or CSV
//! for tables) and exits 0 on success, 2 on usage or domain errors, 3 on
//! resource errors and 4 on precision or divergence errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perc_lab_core::census::{d_size_limit, DEFAULT_CENSUS_BUDGET};
use perc_lab_core::experiments::{rows_to_csv, SWEEP_SCHEMA_VERSION};
use perc_lab_core::oracle::emit_fixtures;
use perc_lab_core::walks::{assumption_sums_at, nb_tmix_capped, NB_TMIX_CAP};
use perc_lab_core::{
    anchor_pc, assumption_sums, census, enumerate_exact, estimate_boundary_curve, estimate_cluster_tail,
    estimate_onearm_curve, estimate_susceptibility, explore_cluster, find_pc, fit_ratios, lazy_tmix_bound,
    lazy_tmix_exact, run_sweep, triangle_sum, AvoidSet, CensusOptions, EstimatorResult, ExploreOptions, FitLaw,
    GraphSpec, LabError, PSource, Partition, PcOptions, PercolationSample, SweepPlan, SweepReport, TriangleMode,
    VertexId,
};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "perc-lab", version, about = "Bond percolation laboratory")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "PERC_LAB_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Graph descriptor: Q<m>, T<n>^<d>, K<n> or K<n>^<d>.
    #[arg(long)]
    spec: GraphSpec,
    /// Master seed; generated and echoed when absent.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Mc {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Whole-configuration cluster census.
    Census {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        diameters: bool,
        /// Thresholds for Z_{>=k}.
        #[arg(long = "k")]
        k: Vec<u64>,
        /// Radii for D_r.
        #[arg(long = "r")]
        r: Vec<u32>,
        /// Sets the D_r size filter to 5 eps^-2 log(eps^3 V).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Also report |C_j| for these ranks.
        #[arg(long = "j")]
        j: Vec<usize>,
    },
    /// Explore one cluster in the intrinsic metric.
    Explore {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        root: u64,
        /// Radius cap.
        #[arg(long)]
        r: Option<u32>,
        /// Size cap.
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        diameters: bool,
        /// Close every edge at these vertices first.
        #[arg(long = "avoid")]
        avoid: Vec<u64>,
    },
    /// P(∂B(r) ≠ ∅) for r = 0..=R.
    Onearm {
        #[command(flatten)]
        mc: Mc,
        #[arg(long)]
        r: u32,
        #[arg(long = "avoid")]
        avoid: Vec<u64>,
    },
    /// E|∂B(r)| for r = 0..=R.
    Boundary {
        #[command(flatten)]
        mc: Mc,
        #[arg(long)]
        r: u32,
    },
    /// P(|C| >= k).
    Tail {
        #[command(flatten)]
        mc: Mc,
        #[arg(long)]
        k: u64,
    },
    /// Susceptibility E|C|.
    Chi {
        #[command(flatten)]
        mc: Mc,
    },
    /// Solve χ(p) = λ V^(1/3) by bisection.
    Pc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        /// Cap on trials per probe; defaults to 256 times --trials.
        #[arg(long)]
        max_trials: Option<u64>,
    },
    /// Exact lazy-walk mixing time of the j-th largest cluster.
    TmixLazy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
    /// Non-backtracking uniform mixing time.
    TmixNb {
        #[arg(long)]
        spec: GraphSpec,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = NB_TMIX_CAP)]
        cap: u64,
    },
    /// Worst-pair triangle sum.
    Triangle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Mc)]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Assumption diagnostics a1, a2 and the heat-kernel sum.
    Assumptions {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: f64,
        /// Explicit p_hat; otherwise the anchor 1/(degree - 1).
        #[arg(long)]
        p: Option<f64>,
        /// Estimate p_hat with find_pc using this many trials per probe.
        #[arg(long)]
        pc_trials: Option<u64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Fix the kernel horizon instead of using t_mix.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Exact enumeration over all edge configurations.
    Oracle {
        #[arg(long, required = true)]
        spec: Vec<GraphSpec>,
        #[arg(long, required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        root: u64,
        #[arg(long, default_value_t = 3)]
        r: u32,
        /// Write a `key = value` fixtures file.
        #[arg(long)]
        emit_fixtures: Option<PathBuf>,
    },
    /// Run a sweep plan (JSON file).
    Sweep {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a scaling law to the rows of a sweep report.
    Fit {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        law: FitLaw,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

enum Output {
    Json(Value),
    Text(String),
}

struct Failure {
    code: u8,
    message: String,
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let code = match e {
            LabError::Domain(_) => 2,
            LabError::Resource(_) => 3,
            LabError::Precision { .. } | LabError::Divergence { .. } => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn wrap(command: &str, seed: Option<u64>, result: Value) -> Output {
    Output::Json(json!({ "command": command, "seed": seed, "result": result }))
}

fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn curve_csv(seed: u64, curve: &[EstimatorResult]) -> String {
    let mut out = format!("# seed = {seed}\nr,mean,stderr,trials\n");
    for (r, est) in curve.iter().enumerate() {
        let _ = writeln!(out, "{r},{},{},{}", est.mean, est.stderr, est.trials);
    }
    out
}

fn curve_output(command: &str, format: Format, seed: u64, curve: Vec<EstimatorResult>) -> Output {
    match format {
        Format::Csv => Output::Text(curve_csv(seed, &curve)),
        Format::Json => wrap(command, Some(seed), to_value(&curve)),
    }
}

fn scalar_output(command: &str, format: Format, seed: u64, est: EstimatorResult) -> Output {
    match format {
        Format::Csv => Output::Text(format!(
            "# seed = {seed}\nmean,stderr,trials\n{},{},{}\n",
            est.mean, est.stderr, est.trials
        )),
        Format::Json => wrap(command, Some(seed), to_value(&est)),
    }
}

fn vertices(spec: &GraphSpec, ids: &[u64]) -> Result<Vec<VertexId>, Failure> {
    ids.iter()
        .map(|&v| {
            spec.check_vertex(VertexId(v))?;
            Ok(VertexId(v))
        })
        .collect()
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Census {
            common,
            p,
            diameters,
            k,
            r,
            epsilon,
            j,
        } => {
            let seed = seed_or_fresh(common.seed);
            let sample = PercolationSample::new(common.spec, *p, seed)?;
            let options = CensusOptions {
                diameters: *diameters,
                z_thresholds: k.clone(),
                d_radii: r.clone(),
                d_size_limit: epsilon.map(|e| d_size_limit(e, common.spec.vertex_count())),
                max_vertices: DEFAULT_CENSUS_BUDGET,
            };
            let summary = census(&sample, &options)?;
            match format {
                Format::Csv => {
                    let mut out = format!("# seed = {seed}\nsize,count\n");
                    let mut sizes = summary.sizes.clone();
                    sizes.dedup();
                    for s in sizes {
                        let count = summary.sizes.iter().filter(|&&x| x == s).count();
                        let _ = writeln!(out, "{s},{count}");
                    }
                    Ok(Output::Text(out))
                }
                Format::Json => {
                    let mut value = to_value(&summary);
                    let ranks: serde_json::Map<String, Value> =
                        j.iter().map(|&j| (j.to_string(), json!(summary.jth_largest(j)))).collect();
                    value["jth_largest"] = Value::Object(ranks);
                    Ok(wrap("census", Some(seed), value))
                }
            }
        }
        Command::Explore {
            common,
            p,
            root,
            r,
            k,
            diameters,
            avoid,
        } => {
            let seed = seed_or_fresh(common.seed);
            let spec = common.spec;
            let sample = PercolationSample::new(spec, *p, seed)?;
            let avoid = AvoidSet::around_vertices(&spec, &vertices(&spec, avoid)?)?;
            let options = ExploreOptions {
                max_radius: *r,
                max_size: *k,
                diameter: *diameters,
            };
            let report = explore_cluster(&sample, VertexId(*root), &options, &avoid)?;
            match format {
                Format::Csv => {
                    let mut out = format!("# seed = {seed}\nr,layer\n");
                    for (r, n) in report.layers.iter().enumerate() {
                        let _ = writeln!(out, "{r},{n}");
                    }
                    Ok(Output::Text(out))
                }
                Format::Json => Ok(wrap("explore", Some(seed), to_value(&report))),
            }
        }
        Command::Onearm { mc, r, avoid } => {
            let seed = seed_or_fresh(mc.common.seed);
            let spec = mc.common.spec;
            let avoid = AvoidSet::around_vertices(&spec, &vertices(&spec, avoid)?)?;
            let curve = estimate_onearm_curve(spec, mc.p, *r, mc.trials, seed, &avoid)?;
            Ok(curve_output("onearm", format, seed, curve))
        }
        Command::Boundary { mc, r } => {
            let seed = seed_or_fresh(mc.common.seed);
            let curve = estimate_boundary_curve(mc.common.spec, mc.p, *r, mc.trials, seed)?;
            Ok(curve_output("boundary", format, seed, curve))
        }
        Command::Tail { mc, k } => {
            let seed = seed_or_fresh(mc.common.seed);
            let est = estimate_cluster_tail(mc.common.spec, mc.p, *k, mc.trials, seed)?;
            Ok(scalar_output("tail", format, seed, est))
        }
        Command::Chi { mc } => {
            let seed = seed_or_fresh(mc.common.seed);
            let est = estimate_susceptibility(mc.common.spec, mc.p, mc.trials, seed)?;
            Ok(scalar_output("chi", format, seed, est))
        }
        Command::Pc {
            common,
            lambda,
            tol,
            trials,
            max_trials,
        } => {
            let seed = seed_or_fresh(common.seed);
            let mut options = PcOptions::new(*lambda, *tol, *trials, seed);
            if let Some(cap) = max_trials {
                options.max_trials_per_probe = *cap;
            }
            let est = find_pc(common.spec, &options)?;
            Ok(wrap("pc", Some(seed), to_value(&est)))
        }
        Command::TmixLazy { common, p, j } => {
            let seed = seed_or_fresh(common.seed);
            let sample = PercolationSample::new(common.spec, *p, seed)?;
            let partition = Partition::build(&sample, DEFAULT_CENSUS_BUDGET)?;
            if *j == 0 || *j > partition.cluster_count() {
                return Err(usage(format!("rank j = {j} out of 1..={}", partition.cluster_count())));
            }
            let graph = partition.cluster_graph(j - 1);
            let bound = lazy_tmix_bound(&graph)?;
            let (exact, note) = match lazy_tmix_exact(&graph) {
                Ok(t) => (Some(t), None),
                Err(e @ LabError::Resource(_)) => (None, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let result = json!({
                "rank": j,
                "size": graph.size(),
                "edge_count": graph.edge_count(),
                "diameter": graph.diameter()?,
                "tmix_exact": exact,
                "tmix_bound": bound,
                "note": note,
            });
            Ok(wrap("tmix-lazy", Some(seed), result))
        }
        Command::TmixNb { spec, alpha, cap } => {
            let t = nb_tmix_capped(*spec, *alpha, *cap)?;
            Ok(wrap(
                "tmix-nb",
                None,
                json!({ "spec": spec, "alpha": alpha, "t_mix": t }),
            ))
        }
        Command::Triangle {
            common,
            p,
            mode,
            trials,
        } => {
            let (mode, seed) = match mode {
                ModeArg::Exact => (TriangleMode::Exact, common.seed),
                ModeArg::Mc => (TriangleMode::Mc, Some(seed_or_fresh(common.seed))),
            };
            let value = triangle_sum(common.spec, *p, mode, *trials, seed.unwrap_or(0))?;
            Ok(wrap("triangle", seed, to_value(&value)))
        }
        Command::Assumptions {
            common,
            alpha,
            p,
            pc_trials,
            lambda,
            tol,
            horizon,
        } => {
            let spec = common.spec;
            let mut seed = None;
            let (p_hat, source) = match (p, pc_trials) {
                (Some(_), Some(_)) => return Err(usage("--p and --pc-trials are exclusive")),
                (Some(p), None) => (*p, PSource::Explicit),
                (None, Some(trials)) => {
                    let s = seed_or_fresh(common.seed);
                    seed = Some(s);
                    let est = find_pc(spec, &PcOptions::new(*lambda, *tol, *trials, s))?;
                    (est.p_hat, PSource::FindPc)
                }
                (None, None) => (anchor_pc(&spec)?, PSource::Anchor),
            };
            let sums = match horizon {
                Some(h) => assumption_sums_at(spec, *h, p_hat, source)?,
                None => assumption_sums(spec, *alpha, p_hat, source)?,
            };
            Ok(wrap("assumptions", seed, to_value(&sums)))
        }
        Command::Oracle {
            spec,
            p,
            root,
            r,
            emit_fixtures: fixtures,
        } => {
            let mut laws = Vec::new();
            for s in spec {
                for &p in p {
                    laws.push(enumerate_exact(*s, p, VertexId(*root), *r)?);
                }
            }
            if let Some(path) = fixtures {
                std::fs::write(path, emit_fixtures(&laws)).map_err(io_failure)?;
            }
            Ok(wrap("oracle", None, to_value(&laws)))
        }
        Command::Sweep { plan, seed } => {
            let text = std::fs::read_to_string(plan).map_err(io_failure)?;
            let mut plan: SweepPlan =
                serde_json::from_str(&text).map_err(|e| usage(format!("bad sweep plan: {e}")))?;
            if let Some(seed) = seed {
                plan.master_seed = *seed;
            }
            let rows = run_sweep(&plan)?;
            match format {
                Format::Csv => Ok(Output::Text(format!(
                    "# seed = {}\n{}",
                    plan.master_seed,
                    rows_to_csv(&rows, plan.master_seed)
                ))),
                Format::Json => {
                    let seed = plan.master_seed;
                    let report = SweepReport {
                        schema_version: SWEEP_SCHEMA_VERSION,
                        plan,
                        rows,
                    };
                    Ok(wrap("sweep", Some(seed), to_value(&report)))
                }
            }
        }
        Command::Fit { rows, law } => {
            let text = std::fs::read_to_string(rows).map_err(io_failure)?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| usage(format!("bad rows file: {e}")))?;
            // accept either the sweep command's wrapper or a bare report
            let report = doc.get("result").unwrap_or(&doc);
            let report: SweepReport =
                serde_json::from_value(report.clone()).map_err(|e| usage(format!("bad rows file: {e}")))?;
            let fit = fit_ratios(&report.rows, *law)?;
            Ok(wrap("fit", Some(report.plan.master_seed), to_value(&fit)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(output) => {
            let text = match output {
                Output::Json(v) => serde_json::to_string_pretty(&v).expect("json renders") + "\n",
                Output::Text(t) => t,
            };
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                    // keep the seed echo on stdout
                    if let Some(line) = text.lines().find(|l| l.starts_with("# seed") || l.starts_with("  \"seed\"")) {
                        println!("{}", line.trim().trim_end_matches(','));
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
