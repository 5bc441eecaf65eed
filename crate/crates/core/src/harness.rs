//! Scaling sweeps: sample, measure, write one CSV row per trial, fit.
//!
//! A trial is identified by `(n, trial index)`; its seed is derived from the
//! master seed and that pair, so the output does not depend on the worker
//! count. Rows are written in `(n, trial)` order. Wall-clock columns are only
//! filled when `timings` is on, which keeps default output byte-identical
//! across reruns.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flows::FlowContext;
use crate::geometry::ModelParams;
use crate::hrg::{build_graph_bucketed, sample_points, HrgGraph, SampleMode};
use crate::io::fmt_f64;
use crate::resistance::{kirchhoff_and_average, KirchhoffOptions, LaplacianSystem, MATRIX_CAP};
use crate::rng::{derive_seed, derive_seed_path, rng_from_seed};
use crate::stats;
use crate::tiling::{build_tiling, calibrate_c, classify_occupancy, TilingSpec, DEFAULT_C, DEFAULT_C_PRIME, DEFAULT_EPSILON};
use crate::walks::{
    find_dangling_paths, max_hitting_estimate, simulate_cover, target_time, HittingStrategy, TargetMethod, WalkConfig,
    DEFAULT_MAX_STEPS,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HYPERWALK_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantity {
    Thit,
    Tcov,
    Ttarget,
    Kirchhoff,
    AvgResist,
    FlowEnergy,
    Dangling,
    Degree,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::Thit,
        Quantity::Tcov,
        Quantity::Ttarget,
        Quantity::Kirchhoff,
        Quantity::AvgResist,
        Quantity::FlowEnergy,
        Quantity::Dangling,
        Quantity::Degree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Thit => "thit",
            Quantity::Tcov => "tcov",
            Quantity::Ttarget => "ttarget",
            Quantity::Kirchhoff => "kirchhoff",
            Quantity::AvgResist => "avg_resist",
            Quantity::FlowEnergy => "flow_energy",
            Quantity::Dangling => "dangling",
            Quantity::Degree => "degree",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown quantity '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub nu: f64,
    pub n_values: Vec<f64>,
    pub seeds_per_n: usize,
    pub master_seed: u64,
    pub quantities: BTreeSet<Quantity>,
    /// Cover walks per trial.
    pub mc_reps: usize,
    pub max_steps: u64,
    /// Ordered pairs for the sampled average resistance.
    pub resist_pairs: usize,
    /// Below this size resistances are computed exactly.
    pub resist_cap: usize,
    /// Targets for the sampled target time.
    pub target_samples: usize,
    /// Candidate targets for the max hitting time.
    pub hit_candidates: usize,
    /// `(s, t)` pairs attempted for the flow energy.
    pub flow_pairs: usize,
    pub dangling_min_len: usize,
    pub c_big: f64,
    pub c_prime: f64,
    /// Tiling spacing constant; calibrated when absent.
    pub c: Option<f64>,
    pub omega: Option<f64>,
    pub timings: bool,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: 0.7,
            nu: 1.0,
            n_values: vec![2048.0, 4096.0, 8192.0, 16384.0, 32768.0],
            seeds_per_n: 10,
            master_seed: 1,
            quantities: [Quantity::Degree].into_iter().collect(),
            mc_reps: 20,
            max_steps: DEFAULT_MAX_STEPS,
            resist_pairs: 1000,
            resist_cap: MATRIX_CAP,
            target_samples: 200,
            hit_candidates: 20,
            flow_pairs: 20,
            dangling_min_len: 2,
            c_big: DEFAULT_C,
            c_prime: DEFAULT_C_PRIME,
            c: None,
            omega: None,
            timings: false,
            workers: None,
            out: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("bad value '{v}' for {key}")))
}

/// `2048`, `2^11` or `1e4`.
fn parse_n(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((b, e)) = s.split_once('^') {
        let b: f64 = parse_num("n_values", b)?;
        let e: f64 = parse_num("n_values", e)?;
        return Ok(b.powf(e));
    }
    parse_num("n_values", s)
}

/// `a,b,c` or an inclusive doubling range `2^11..2^15`.
fn parse_n_list(v: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = v.split_once("..") {
        let (lo, hi) = (parse_n(lo)?, parse_n(hi)?);
        let mut out = Vec::new();
        let mut x = lo;
        while x <= hi * (1.0 + 1e-12) {
            out.push(x);
            x *= 2.0;
        }
        return Ok(out);
    }
    v.split(',').filter(|s| !s.trim().is_empty()).map(parse_n).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("bad value '{v}' for {key}"))),
    }
}

fn parse_opt_f64(key: &str, v: &str) -> Result<Option<f64>> {
    if v.trim() == "auto" {
        Ok(None)
    } else {
        parse_num(key, v).map(Some)
    }
}

impl ExperimentConfig {
    /// Reads `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key = value", no + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key. Keys match the CLI flags with dashes replaced by
    /// underscores.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "alpha" => self.alpha = parse_num(key, v)?,
            "nu" => self.nu = parse_num(key, v)?,
            "n_values" | "n" => self.n_values = parse_n_list(v)?,
            "seeds_per_n" | "seeds" => self.seeds_per_n = parse_num(key, v)?,
            "seed" | "master_seed" => self.master_seed = parse_num(key, v)?,
            "quantities" => {
                self.quantities = v.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?
            }
            "mc_reps" => self.mc_reps = parse_num(key, v)?,
            "max_steps" => self.max_steps = parse_num(key, v)?,
            "resist_pairs" => self.resist_pairs = parse_num(key, v)?,
            "resist_cap" => self.resist_cap = parse_num(key, v)?,
            "target_samples" => self.target_samples = parse_num(key, v)?,
            "hit_candidates" => self.hit_candidates = parse_num(key, v)?,
            "flow_pairs" => self.flow_pairs = parse_num(key, v)?,
            "dangling_min_len" => self.dangling_min_len = parse_num(key, v)?,
            "C" | "c_big" => self.c_big = parse_num(key, v)?,
            "Cprime" | "c_prime" => self.c_prime = parse_num(key, v)?,
            "c" => self.c = parse_opt_f64(key, v)?,
            "omega" => self.omega = parse_opt_f64(key, v)?,
            "timings" => self.timings = parse_bool(key, v)?,
            "workers" => self.workers = Some(parse_num(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            other => return Err(Error::Parse(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.alpha, self.nu, self.nu * 2.0)?;
        if let Some(&n) = self.n_values.iter().find(|&&n| n <= self.nu) {
            return invalid(format!("n = {n} must exceed nu = {}", self.nu));
        }
        if self.n_values.is_empty() {
            return invalid("n_values is empty");
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("n_values must be strictly increasing");
        }
        if self.seeds_per_n == 0 {
            return invalid("seeds_per_n must be at least 1");
        }
        if self.quantities.contains(&Quantity::Tcov) && self.mc_reps == 0 {
            return invalid("mc_reps must be at least 1");
        }
        Ok(())
    }
}

/// One trial. Quantities that were not requested or failed are `None`; the
/// reason for a failure is in `notes`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: f64,
    pub seed: u64,
    pub v: usize,
    pub vc: usize,
    pub ec: usize,
    pub mean_deg: Option<f64>,
    pub thit_est: Option<f64>,
    pub tcov_mean: Option<f64>,
    pub tcov_se: Option<f64>,
    pub ttarget: Option<f64>,
    pub ttarget_se: Option<f64>,
    pub kirchhoff_est: Option<f64>,
    pub avg_resist: Option<f64>,
    pub avg_resist_ci: Option<f64>,
    pub flow_energy_med: Option<f64>,
    pub dangling_count: Option<usize>,
    pub dangling_maxlen: Option<usize>,
    pub t_sample_s: Option<f64>,
    pub t_build_s: Option<f64>,
    pub t_solve_s: Option<f64>,
    pub t_walk_s: Option<f64>,
    pub notes: String,
}

pub const CSV_COLUMNS: [&str; 22] = [
    "n",
    "seed",
    "V",
    "Vc",
    "Ec",
    "mean_deg",
    "thit_est",
    "tcov_mean",
    "tcov_se",
    "ttarget",
    "ttarget_se",
    "kirchhoff_est",
    "avg_resist",
    "avg_resist_ci",
    "flow_energy_med",
    "dangling_count",
    "dangling_maxlen",
    "t_sample_s",
    "t_build_s",
    "t_solve_s",
    "t_walk_s",
    "notes",
];

impl ExperimentRow {
    fn note(&mut self, what: &str, e: impl fmt::Display) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(&format!("{what}: {e}"));
    }

    /// Numeric column by CSV name.
    pub fn get(&self, column: &str) -> Option<f64> {
        match column {
            "n" => Some(self.n),
            "V" => Some(self.v as f64),
            "Vc" => Some(self.vc as f64),
            "Ec" => Some(self.ec as f64),
            "mean_deg" => self.mean_deg,
            "thit_est" => self.thit_est,
            "tcov_mean" => self.tcov_mean,
            "tcov_se" => self.tcov_se,
            "ttarget" => self.ttarget,
            "ttarget_se" => self.ttarget_se,
            "kirchhoff_est" => self.kirchhoff_est,
            "avg_resist" => self.avg_resist,
            "avg_resist_ci" => self.avg_resist_ci,
            "flow_energy_med" => self.flow_energy_med,
            "dangling_count" => self.dangling_count.map(|x| x as f64),
            "dangling_maxlen" => self.dangling_maxlen.map(|x| x as f64),
            "t_sample_s" => self.t_sample_s,
            "t_build_s" => self.t_build_s,
            "t_solve_s" => self.t_solve_s,
            "t_walk_s" => self.t_walk_s,
            _ => None,
        }
    }

    fn record(&self) -> Vec<String> {
        let f = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        let u = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            fmt_f64(self.n),
            self.seed.to_string(),
            self.v.to_string(),
            self.vc.to_string(),
            self.ec.to_string(),
            f(self.mean_deg),
            f(self.thit_est),
            f(self.tcov_mean),
            f(self.tcov_se),
            f(self.ttarget),
            f(self.ttarget_se),
            f(self.kirchhoff_est),
            f(self.avg_resist),
            f(self.avg_resist_ci),
            f(self.flow_energy_med),
            u(self.dangling_count),
            u(self.dangling_maxlen),
            f(self.t_sample_s),
            f(self.t_build_s),
            f(self.t_solve_s),
            f(self.t_walk_s),
            self.notes.clone(),
        ]
    }
}

pub fn write_rows_csv<W: Write>(rows: &[ExperimentRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_COLUMNS)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_rows_csv<R: Read>(r: R) -> Result<Vec<ExperimentRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(Error::Parse("unexpected CSV header".into()));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<Option<f64>> {
            let s = &rec[i];
            if s.is_empty() {
                Ok(None)
            } else {
                parse_num(CSV_COLUMNS[i], s).map(Some)
            }
        };
        let u = |i: usize| -> Result<Option<usize>> {
            let s = &rec[i];
            if s.is_empty() {
                Ok(None)
            } else {
                parse_num(CSV_COLUMNS[i], s).map(Some)
            }
        };
        rows.push(ExperimentRow {
            n: f(0)?.unwrap_or(f64::NAN),
            seed: parse_num("seed", &rec[1])?,
            v: parse_num("V", &rec[2])?,
            vc: parse_num("Vc", &rec[3])?,
            ec: parse_num("Ec", &rec[4])?,
            mean_deg: f(5)?,
            thit_est: f(6)?,
            tcov_mean: f(7)?,
            tcov_se: f(8)?,
            ttarget: f(9)?,
            ttarget_se: f(10)?,
            kirchhoff_est: f(11)?,
            avg_resist: f(12)?,
            avg_resist_ci: f(13)?,
            flow_energy_med: f(14)?,
            dangling_count: u(15)?,
            dangling_maxlen: u(16)?,
            t_sample_s: f(17)?,
            t_build_s: f(18)?,
            t_solve_s: f(19)?,
            t_walk_s: f(20)?,
            notes: rec[21].to_string(),
        });
    }
    Ok(rows)
}

pub fn read_rows_csv_file(path: &Path) -> Result<Vec<ExperimentRow>> {
    read_rows_csv(std::fs::File::open(path)?)
}

/// Seed of trial `i` at intensity `n`.
pub fn trial_seed(master: u64, n: f64, i: usize) -> u64 {
    derive_seed_path(master, &[n.round() as u64, i as u64])
}

fn tiling_for(cfg: &ExperimentConfig, params: &ModelParams) -> Result<TilingSpec> {
    match cfg.c {
        Some(c) => build_tiling(params, c),
        None => calibrate_c(params, DEFAULT_EPSILON),
    }
}

/// Median energy of `f_{s,t}` over random pairs of center vertices lying in
/// robust tiles; pairs whose construction fails are skipped.
fn flow_energy_median(cfg: &ExperimentConfig, g: &HrgGraph, center: &[usize], seed: u64) -> Result<f64> {
    let spec = tiling_for(cfg, g.params())?;
    let occ = classify_occupancy(g, &spec, cfg.c_big, cfg.c_prime)?;
    let ctx = FlowContext::new(g, &spec)?;
    let pool: Vec<usize> = center.iter().copied().filter(|&v| occ.is_robust(ctx.index().location(v).tile)).collect();
    if pool.len() < 2 {
        return Err(Error::InsufficientData("fewer than two center vertices in robust tiles".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut energies = Vec::new();
    for _ in 0..cfg.flow_pairs {
        let pick: Vec<usize> = pool.choose_multiple(&mut rng, 2).copied().collect();
        if let Ok(f) = ctx.st_flow(pick[0], pick[1]) {
            energies.push(f.energy());
        }
    }
    if energies.is_empty() {
        return Err(Error::InsufficientData("no pair admitted a flow".into()));
    }
    Ok(stats::median(&energies))
}

fn secs(t: Instant, on: bool) -> Option<f64> {
    on.then(|| t.elapsed().as_secs_f64())
}

/// Runs one trial; never panics out, failures land in `notes`.
pub fn run_trial(cfg: &ExperimentConfig, n: f64, trial: usize) -> ExperimentRow {
    let seed = trial_seed(cfg.master_seed, n, trial);
    let mut row = ExperimentRow { n, seed, ..Default::default() };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| measure(cfg, &mut row)));
    match result {
        Ok(Ok(())) => {}
        Ok(Err(e)) => row.note("trial", e),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            row.note("trial", msg);
        }
    }
    row
}

fn measure(cfg: &ExperimentConfig, row: &mut ExperimentRow) -> Result<()> {
    let q = |x: Quantity| cfg.quantities.contains(&x);
    let params = ModelParams::new(cfg.alpha, cfg.nu, row.n)?;
    let trial_seed = row.seed;
    let sub = |k: u64| derive_seed(trial_seed, k);

    let t = Instant::now();
    let points = sample_points(&params, SampleMode::Poissonized, sub(0));
    row.t_sample_s = secs(t, cfg.timings);

    let t = Instant::now();
    let g = build_graph_bucketed(points, &params);
    row.v = g.vertex_count();
    if q(Quantity::Degree) && row.v > 0 {
        row.mean_deg = Some(2.0 * g.edge_count() as f64 / row.v as f64);
    }
    let center = g.center_component();
    row.t_build_s = secs(t, cfg.timings);
    let Some(center) = center else {
        row.note("center", "no vertex in B_O(R/2)");
        return Ok(());
    };
    let cg = &center.graph;
    row.vc = cg.vertex_count();
    row.ec = cg.edge_count();
    if row.vc < 2 {
        row.note("center", "center component has fewer than two vertices");
        return Ok(());
    }

    if q(Quantity::Dangling) {
        let paths = find_dangling_paths(cg, cfg.dangling_min_len);
        row.dangling_count = Some(paths.len());
        row.dangling_maxlen = Some(paths.iter().map(Vec::len).max().unwrap_or(0));
    }

    let t = Instant::now();
    let needs_solver = [Quantity::Thit, Quantity::Ttarget, Quantity::Kirchhoff, Quantity::AvgResist].into_iter().any(q);
    if needs_solver {
        match LaplacianSystem::new(cg) {
            Err(e) => row.note("solver", e),
            Ok(sys) => {
                if q(Quantity::Thit) {
                    let radii: Vec<f64> = center.global_ids.iter().map(|&v| g.point(v).r()).collect();
                    match max_hitting_estimate(&sys, Some(&radii), HittingStrategy::Auto(cfg.hit_candidates)) {
                        Ok(m) => row.thit_est = Some(m.value),
                        Err(e) => row.note("thit", e),
                    }
                }
                if q(Quantity::Ttarget) {
                    match target_time(&sys, TargetMethod::Sampled(cfg.target_samples), sub(1)) {
                        Ok(t) => {
                            row.ttarget = Some(t.value);
                            row.ttarget_se = Some(t.std_error);
                        }
                        Err(e) => row.note("ttarget", e),
                    }
                }
                if q(Quantity::Kirchhoff) || q(Quantity::AvgResist) {
                    let res = if row.vc <= cfg.resist_cap {
                        kirchhoff_and_average(cg, &KirchhoffOptions { cap: cfg.resist_cap, pairs: cfg.resist_pairs, seed: sub(2) })
                    } else {
                        crate::resistance::sampled_average(&sys, cfg.resist_pairs, sub(2))
                    };
                    match res {
                        Ok(k) => {
                            if q(Quantity::Kirchhoff) {
                                row.kirchhoff_est = Some(k.kirchhoff);
                            }
                            if q(Quantity::AvgResist) {
                                row.avg_resist = Some(k.average);
                                row.avg_resist_ci = Some(k.average_ci);
                            }
                        }
                        Err(e) => row.note("resistance", e),
                    }
                }
            }
        }
    }
    if q(Quantity::FlowEnergy) {
        match flow_energy_median(cfg, &g, &center.global_ids, sub(3)) {
            Ok(e) => row.flow_energy_med = Some(e),
            Err(e) => row.note("flow_energy", e),
        }
    }
    row.t_solve_s = secs(t, cfg.timings);

    if q(Quantity::Tcov) {
        let t = Instant::now();
        // start from the vertex closest to the origin
        let start = (0..row.vc)
            .min_by(|&a, &b| g.point(center.global_ids[a]).r().total_cmp(&g.point(center.global_ids[b]).r()))
            .unwrap_or(0);
        let wc = WalkConfig { seed: sub(4), max_steps: cfg.max_steps, repetitions: cfg.mc_reps };
        match simulate_cover(cg, start, &wc) {
            Ok(s) => {
                row.tcov_mean = Some(s.mean);
                row.tcov_se = Some(s.std_error);
            }
            Err(e) => row.note("tcov", e),
        }
        row.t_walk_s = secs(t, cfg.timings);
    }
    Ok(())
}

fn worker_count(cfg: &ExperimentConfig) -> Option<usize> {
    let env = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&k| k > 0);
    match (cfg.workers, env) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Runs every `(n, trial)` pair and returns rows in that order. Writes the
/// CSV to `cfg.out` when set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let jobs: Vec<(f64, usize)> =
        cfg.n_values.iter().flat_map(|&n| (0..cfg.seeds_per_n).map(move |i| (n, i))).collect();
    let run = || jobs.par_iter().map(|&(n, i)| run_trial(cfg, n, i)).collect::<Vec<_>>();
    let rows = match worker_count(cfg) {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run),
        None => run(),
    };
    if let Some(path) = &cfg.out {
        write_rows_csv(&rows, std::fs::File::create(path)?)?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingModel {
    Constant,
    N,
    NLogN,
    NLog2N,
    N2,
}

impl ScalingModel {
    pub fn eval(self, n: f64) -> f64 {
        match self {
            ScalingModel::Constant => 1.0,
            ScalingModel::N => n,
            ScalingModel::NLogN => n * n.ln(),
            ScalingModel::NLog2N => n * n.ln().powi(2),
            ScalingModel::N2 => n * n,
        }
    }
}

impl FromStr for ScalingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "1" | "const" | "constant" => ScalingModel::Constant,
            "n" => ScalingModel::N,
            "nlogn" | "n_ln_n" | "n*ln(n)" => ScalingModel::NLogN,
            "nlog2n" | "n_ln2_n" | "n*ln(n)^2" => ScalingModel::NLog2N,
            "n2" | "n^2" => ScalingModel::N2,
            other => return Err(Error::Parse(format!("unknown model '{other}'"))),
        })
    }
}

/// Which size plays the role of `n` in a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizeBasis {
    /// The intensity `n` of the trial.
    Nominal,
    /// The center component size `|V_c|`.
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `(n, mean of quantity / model(size))` per intensity.
    pub per_n: Vec<(f64, f64)>,
    /// Largest over smallest per-n mean ratio.
    pub band: f64,
    /// Least-squares slope of `ln quantity` against `ln size`.
    pub exponent: f64,
    pub exponent_se: f64,
}

/// Maps a quantity name to its CSV column (`thit` -> `thit_est`, ...).
pub fn column_for(quantity: &str) -> &str {
    match quantity {
        "thit" => "thit_est",
        "tcov" => "tcov_mean",
        "kirchhoff" => "kirchhoff_est",
        "flow_energy" => "flow_energy_med",
        "degree" => "mean_deg",
        "dangling" => "dangling_count",
        other => other,
    }
}

pub fn fit_scaling(rows: &[ExperimentRow], quantity: &str, model: ScalingModel, basis: SizeBasis) -> Result<ScalingFit> {
    let column = column_for(quantity);
    if !CSV_COLUMNS.contains(&column) || column == "notes" {
        return Err(Error::Parse(format!("unknown quantity '{quantity}'")));
    }
    let mut by_n: Vec<(f64, Vec<f64>)> = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in rows {
        let Some(val) = r.get(column) else { continue };
        let size = match basis {
            SizeBasis::Nominal => r.n,
            SizeBasis::Center => r.vc as f64,
        };
        if !(val > 0.0 && size > 1.0 && val.is_finite()) {
            continue;
        }
        xs.push(size.ln());
        ys.push(val.ln());
        let ratio = val / model.eval(size);
        match by_n.iter_mut().find(|(n, _)| *n == r.n) {
            Some((_, v)) => v.push(ratio),
            None => by_n.push((r.n, vec![ratio])),
        }
    }
    if by_n.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} distinct n values with '{column}' present, need 3",
            by_n.len()
        )));
    }
    by_n.sort_by(|a, b| a.0.total_cmp(&b.0));
    let per_n: Vec<(f64, f64)> = by_n.iter().map(|(n, v)| (*n, stats::mean(v))).collect();
    let hi = per_n.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = per_n.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let fit = stats::least_squares(&xs, &ys)
        .ok_or_else(|| Error::InsufficientData("degenerate sizes in log-log fit".into()))?;
    Ok(ScalingFit { per_n, band: hi / lo, exponent: fit.slope, exponent_se: fit.slope_se })
}
