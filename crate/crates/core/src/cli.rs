//! Command-line front end. Output is `key value` lines, floats with 17
//! significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{invalid, Error, Result};
use crate::flows::{commute_flow, validate_flow, FlowContext, FLOW_TOL};
use crate::geometry::{ModelParams, PolarPoint};
use crate::harness::{fit_scaling, read_rows_csv_file, run_experiment, ExperimentConfig, ScalingModel, SizeBasis};
use crate::hrg::{components_and_center, degree_summary, sample_graph, HrgGraph, SampleMode};
use crate::io::{fmt_f64, read_graph, write_graph_csv, write_graph_json};
use crate::resistance::{
    default_omega, effective_resistance, nash_williams_lower, phi_r, resistance_matrix, sampled_average, sector_cut,
    LaplacianSystem, MATRIX_CAP,
};
use crate::tiling::{
    build_tiling, calibrate_c, classify_occupancy, validate_spacing, TilingSpec, DEFAULT_C, DEFAULT_C_PRIME,
    DEFAULT_EPSILON,
};
use crate::walks::{simulate_commute, simulate_cover, simulate_hitting, WalkConfig, DEFAULT_MAX_STEPS};

#[derive(Debug, Parser)]
#[command(name = "hyperwalk", version, about = "Hyperbolic random graphs, flows, resistances and random walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a hyperbolic random graph.
    Sample(SampleArgs),
    /// Inspect a graph file.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Build the tiling and optionally classify a graph's occupancy.
    Tiling(TilingArgs),
    /// Effective resistances.
    Resist(ResistArgs),
    /// Construct and validate a unit flow.
    Flow(FlowArgs),
    /// Monte Carlo random walks.
    Walk(WalkArgs),
    /// Run a scaling sweep and write its CSV.
    Experiment(ExperimentArgs),
    /// Fit a scaling law to an experiment CSV.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 0.7)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long)]
    pub n: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exactly this many points instead of a Poisson number.
    #[arg(long)]
    pub binomial: Option<usize>,
    /// `.json` file, or a directory for CSV output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Degrees, components and center size.
    Stats { graph: PathBuf },
}

#[derive(Debug, Args)]
pub struct TilingArgs {
    /// Spacing constant, or `auto` to calibrate.
    #[arg(long, default_value = "auto")]
    pub c: String,
    /// Graph whose half-tile occupancy is classified.
    #[arg(long)]
    pub classify: Option<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Required without `--classify`.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long = "C", default_value_t = DEFAULT_C)]
    pub c_big: f64,
    #[arg(long = "Cprime", default_value_t = DEFAULT_C_PRIME)]
    pub c_prime: f64,
}

#[derive(Debug, Args)]
pub struct ResistArgs {
    pub graph: PathBuf,
    /// Average over this many random ordered pairs.
    #[arg(long, group = "mode")]
    pub pairs: Option<usize>,
    /// Print the full resistance matrix (small graphs only).
    #[arg(long, group = "mode")]
    pub exact_matrix: bool,
    /// Nash-Williams bound from a sector cut around a vertex.
    #[arg(long, group = "mode")]
    pub cut: bool,
    /// Resistance between two vertices.
    #[arg(long, num_args = 2, value_names = ["U", "V"], group = "mode")]
    pub between: Option<Vec<usize>>,
    /// Cut apex: the vertex whose radius is closest to this value.
    #[arg(long)]
    pub apex_r: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Build the commute flow out of a vertex added at radius `--r`.
    #[arg(long, requires = "r")]
    pub commute: bool,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value = "auto")]
    pub c: String,
    #[arg(long = "C", default_value_t = DEFAULT_C)]
    pub c_big: f64,
    /// Write the flow as `u,v,value` rows.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    pub graph: PathBuf,
    #[arg(long, num_args = 2, value_names = ["U", "V"], group = "kind")]
    pub hit: Option<Vec<usize>>,
    #[arg(long, group = "kind")]
    pub cover: bool,
    #[arg(long, num_args = 2, value_names = ["U", "V"], group = "kind")]
    pub commute: Option<Vec<usize>>,
    /// Start vertex for `--cover`; the walk covers its component.
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub nu: Option<String>,
    /// Comma list or doubling range such as `2^11..2^15`.
    #[arg(long)]
    pub n_values: Option<String>,
    #[arg(long)]
    pub seeds_per_n: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub quantities: Option<String>,
    #[arg(long)]
    pub mc_reps: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub timings: bool,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub quantity: String,
    /// `1`, `n`, `nlogn`, `nlog2n` or `n2`.
    #[arg(long, default_value = "n")]
    pub model: String,
    /// Use the center component size instead of `n`.
    #[arg(long)]
    pub center_size: bool,
}

fn kv(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{key} {value}")?;
    Ok(())
}

fn kf(out: &mut dyn Write, key: &str, x: f64) -> Result<()> {
    kv(out, key, fmt_f64(x))
}

fn tiling_spec(params: &ModelParams, c: &str) -> Result<TilingSpec> {
    if c == "auto" {
        calibrate_c(params, DEFAULT_EPSILON)
    } else {
        let c: f64 = c.parse().map_err(|_| Error::Parse(format!("bad value '{c}' for --c")))?;
        build_tiling(params, c)
    }
}

fn write_graph(g: &HrgGraph, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "json") {
        write_graph_json(g, path)
    } else {
        write_graph_csv(g, path)
    }
}

fn pair(v: &[usize]) -> (usize, usize) {
    (v[0], v[1])
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Sample(a) => {
            let params = ModelParams::new(a.alpha, a.nu, a.n)?;
            let mode = a.binomial.map_or(SampleMode::Poissonized, SampleMode::Binomial);
            let g = sample_graph(&params, mode, a.seed);
            write_graph(&g, &a.out)?;
            kv(out, "vertices", g.vertex_count())?;
            kv(out, "edges", g.edge_count())?;
            kf(out, "R", params.radius())?;
        }
        Command::Graph(GraphCommand::Stats { graph }) => {
            let g = read_graph(&graph)?;
            kv(out, "vertices", g.vertex_count())?;
            kv(out, "edges", g.edge_count())?;
            kf(out, "R", g.radius())?;
            kf(out, "mean_degree_limit", g.params().mean_degree_limit())?;
            if let Ok(d) = degree_summary(g.graph()) {
                kf(out, "mean_degree", d.mean)?;
                kv(out, "max_degree", d.max)?;
                if let Some(gamma) = d.tail_exponent {
                    kf(out, "tail_exponent", gamma)?;
                }
            }
            let (comps, center) = components_and_center(&g);
            kv(out, "components", comps.count())?;
            kv(out, "largest_component", comps.largest().map_or(0, |c| comps.size(c)))?;
            match center {
                Some(c) => {
                    let sub = g.graph().induced_subgraph(&comps.members(c));
                    kv(out, "center_vertices", sub.graph.vertex_count())?;
                    kv(out, "center_edges", sub.graph.edge_count())?;
                }
                None => kv(out, "center_vertices", 0)?,
            }
        }
        Command::Tiling(a) => {
            let g = a.classify.as_deref().map(read_graph).transpose()?;
            let params = match (&g, a.n) {
                (Some(g), _) => *g.params(),
                (None, Some(n)) => ModelParams::new(a.alpha, a.nu, n)?,
                (None, None) => return invalid("give --n or --classify"),
            };
            let spec = tiling_spec(&params, &a.c)?;
            kf(out, "c", spec.c())?;
            kv(out, "N0", spec.n0())?;
            kv(out, "levels", spec.level_count())?;
            for (i, h) in spec.radii().iter().enumerate() {
                writeln!(out, "h {i} {} tiles {} theta {}", fmt_f64(*h), spec.tiles_at(i), fmt_f64(spec.theta(i)))?;
            }
            let rep = validate_spacing(&spec, DEFAULT_EPSILON);
            kv(out, "spacing_passed", rep.passed)?;
            if let Some(g) = g {
                let occ = classify_occupancy(&g, &spec, a.c_big, a.c_prime)?;
                kf(out, "rho", occ.rho)?;
                kf(out, "rho_prime", occ.rho_prime)?;
                kv(out, "ell", occ.ell.map_or("none".into(), |l| l.to_string()))?;
                kv(out, "ell_prime", occ.ell_prime.map_or("none".into(), |l| l.to_string()))?;
                for s in occ.summaries(&spec) {
                    writeln!(
                        out,
                        "level {} tiles {} vertices {} expected_per_half {} sparse_halves {} faulty {} robust {}",
                        s.level,
                        s.tiles,
                        s.vertices,
                        fmt_f64(s.expected_per_half),
                        s.sparse_halves,
                        s.faulty_tiles,
                        s.robust_tiles
                    )?;
                }
            }
        }
        Command::Resist(a) => {
            let g = read_graph(&a.graph)?;
            if let Some(p) = a.between {
                let (u, v) = pair(&p);
                kf(out, "resistance", effective_resistance(g.graph(), u, v)?)?;
            } else if a.exact_matrix {
                let m = resistance_matrix(g.graph(), MATRIX_CAP)?;
                for i in 0..m.nrows() {
                    let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
                    writeln!(out, "{}", row.join(" "))?;
                }
            } else if a.cut {
                let center = g.center_component().ok_or_else(|| Error::InsufficientData("no center component".into()))?;
                let target_r = a.apex_r.unwrap_or(0.75 * g.radius());
                let apex = center
                    .global_ids
                    .iter()
                    .copied()
                    .min_by(|&x, &y| (g.point(x).r() - target_r).abs().total_cmp(&(g.point(y).r() - target_r).abs()))
                    .expect("center component is nonempty");
                let p = g.point(apex);
                let omega = a.omega.unwrap_or_else(|| default_omega(g.params().n()));
                let phi = phi_r(p.r(), g.params(), omega)?;
                let cut = sector_cut(&g, p, phi)?;
                kv(out, "apex", apex)?;
                kf(out, "apex_r", p.r())?;
                kf(out, "phi", phi)?;
                kv(out, "inside", cut.inside.len())?;
                kv(out, "cut_edges", cut.len())?;
                kf(out, "nash_williams_lower", nash_williams_lower(&cut)?)?;
            } else {
                let center = g.center_component().ok_or_else(|| Error::InsufficientData("no center component".into()))?;
                let sys = LaplacianSystem::new(&center.graph)?;
                let est = sampled_average(&sys, a.pairs.unwrap_or(1000), a.seed)?;
                kv(out, "center_vertices", center.graph.vertex_count())?;
                kf(out, "avg_resist", est.average)?;
                kf(out, "avg_resist_ci", est.average_ci)?;
                kf(out, "kirchhoff_est", est.kirchhoff)?;
            }
        }
        Command::Flow(a) => {
            let g = read_graph(&a.graph)?;
            let spec = tiling_spec(g.params(), &a.c)?;
            if a.commute {
                let r = a.r.expect("clap enforces --r");
                let cf = commute_flow(&g, &spec, PolarPoint::try_new(r, a.theta)?, a.c_big)?;
                let rep = validate_flow(cf.graph.graph(), &cf.flow, FLOW_TOL);
                kv(out, "w", cf.w)?;
                kv(out, "h_w", cf.h_w)?;
                kv(out, "k_w", cf.levels.k_w)?;
                kv(out, "ell_prime_w", cf.levels.ell_prime_w)?;
                report_flow(out, &rep)?;
                if let Some(p) = &a.out {
                    cf.flow.write_csv(std::fs::File::create(p)?)?;
                }
            } else {
                let (Some(s), Some(t)) = (a.s, a.t) else {
                    return invalid("give --s and --t, or --commute --r");
                };
                let ctx = FlowContext::new(&g, &spec)?;
                let f = ctx.st_flow(s, t)?;
                let rep = validate_flow(g.graph(), &f, FLOW_TOL);
                report_flow(out, &rep)?;
                if let Ok(r) = effective_resistance(g.graph(), s, t) {
                    kf(out, "resistance", r)?;
                }
                if let Some(p) = &a.out {
                    f.write_csv(std::fs::File::create(p)?)?;
                }
            }
        }
        Command::Walk(a) => {
            let g = read_graph(&a.graph)?;
            let cfg = WalkConfig { seed: a.seed, max_steps: a.max_steps, repetitions: a.reps };
            let stats = if let Some(p) = a.hit {
                let (u, v) = pair(&p);
                simulate_hitting(g.graph(), u, v, &cfg)?
            } else if let Some(p) = a.commute {
                let (u, v) = pair(&p);
                simulate_commute(g.graph(), u, v, &cfg)?
            } else if a.cover {
                let sub = g.graph().component_of(a.start)?;
                kv(out, "component_size", sub.graph.vertex_count())?;
                let start = sub.local_id(a.start).expect("start lies in its own component");
                simulate_cover(&sub.graph, start, &cfg)?
            } else {
                return invalid("give --hit, --cover or --commute");
            };
            kf(out, "mean", stats.mean)?;
            kf(out, "std_error", stats.std_error)?;
            kv(out, "reps", stats.reps)?;
        }
        Command::Experiment(a) => {
            let mut cfg = match &a.config {
                Some(p) => ExperimentConfig::from_file(p)?,
                None => ExperimentConfig::default(),
            };
            let flags = [
                ("alpha", &a.alpha),
                ("nu", &a.nu),
                ("n_values", &a.n_values),
                ("seeds_per_n", &a.seeds_per_n),
                ("seed", &a.seed),
                ("quantities", &a.quantities),
                ("mc_reps", &a.mc_reps),
                ("workers", &a.workers),
            ];
            for (k, v) in flags {
                if let Some(v) = v {
                    cfg.set(k, v)?;
                }
            }
            for kvp in &a.set {
                let (k, v) = kvp.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got '{kvp}'")))?;
                cfg.set(k.trim(), v.trim())?;
            }
            if a.timings {
                cfg.timings = true;
            }
            if let Some(p) = a.out {
                cfg.out = Some(p);
            }
            cfg.validate()?;
            let rows = run_experiment(&cfg)?;
            kv(out, "rows", rows.len())?;
            kv(out, "failed_rows", rows.iter().filter(|r| !r.notes.is_empty()).count())?;
            if cfg.out.is_none() {
                crate::harness::write_rows_csv(&rows, &mut *out)?;
            }
        }
        Command::Fit(a) => {
            let rows = read_rows_csv_file(&a.csv)?;
            let model: ScalingModel = a.model.parse()?;
            let basis = if a.center_size { SizeBasis::Center } else { SizeBasis::Nominal };
            let fit = fit_scaling(&rows, &a.quantity, model, basis)?;
            for (n, r) in &fit.per_n {
                writeln!(out, "ratio {} {}", fmt_f64(*n), fmt_f64(*r))?;
            }
            kf(out, "band", fit.band)?;
            kf(out, "exponent", fit.exponent)?;
            kf(out, "exponent_se", fit.exponent_se)?;
        }
    }
    Ok(())
}

fn report_flow(out: &mut dyn Write, rep: &crate::flows::FlowReport) -> Result<()> {
    kf(out, "strength", rep.strength)?;
    kf(out, "max_node_residual", rep.max_node_residual)?;
    kf(out, "energy", rep.energy)?;
    kv(out, "off_graph_edges", rep.off_graph_edges)?;
    kv(out, "valid", rep.is_unit(FLOW_TOL))?;
    Ok(())
}
