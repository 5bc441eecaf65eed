//! Acceptance checks at desk scale. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng as _;

use hyperwalk::flows::{validate_flow, FlowContext, FLOW_TOL};
use hyperwalk::geometry::{hyperbolic_distance, ModelParams, PolarPoint};
use hyperwalk::graph::{named, Graph};
use hyperwalk::harness::{
    fit_scaling, run_experiment, trial_seed, write_rows_csv, ExperimentConfig, ExperimentRow, Quantity, ScalingModel,
    SizeBasis,
};
use hyperwalk::hrg::{build_graph_bucketed, build_graph_naive, sample_graph, sample_points, HrgGraph, SampleMode};
use hyperwalk::resistance::{default_omega, nash_williams_lower, phi_r, sector_cut, LaplacianSystem};
use hyperwalk::rng::{derive_seed, rng_from_seed};
use hyperwalk::stats::{harmonic, least_squares, median, spearman};
use hyperwalk::tiling::{calibrate_c, classify_occupancy, validate_spacing, TileId, TilingSpec, DEFAULT_EPSILON};
use hyperwalk::walks::{
    calibrate_target_constant, exact_hitting_vector, find_dangling_paths, kklv_lower, max_hitting_estimate,
    simulate_commute, simulate_cover, simulate_hitting, target_time, target_time_resistance_form, HittingStrategy,
    TargetMethod, WalkConfig, TARGET_TIME_CONSTANT,
};

const ALPHA: f64 = 0.7;
const NU: f64 = 1.0;

fn verdict(id: u32, name: &str, pass: bool, start: Instant, detail: String) {
    println!(
        "{} criterion {id:>2} {name}: {detail} [{:.1} s]",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn params(n: f64) -> ModelParams {
    ModelParams::new(ALPHA, NU, n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Center component of an HRG sample, with its own points.
fn center_hrg(g: &HrgGraph) -> Option<HrgGraph> {
    let c = g.center_component()?;
    let pts: Vec<PolarPoint> = c.global_ids.iter().map(|&v| g.point(v)).collect();
    HrgGraph::from_parts(*g.params(), pts, c.graph).ok()
}

/// Twenty connected graphs with at most 200 vertices: HRG center
/// components and random trees with extra chords.
fn small_graphs() -> Vec<Graph> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < 12 {
        seed += 1;
        let n = 40.0 + 15.0 * (seed % 10) as f64;
        let g = sample_graph(&params(n), SampleMode::Poissonized, seed);
        if let Some(c) = g.center_component() {
            if (3..=200).contains(&c.graph.vertex_count()) {
                out.push(c.graph);
            }
        }
    }
    let mut rng = rng_from_seed(99);
    while out.len() < 20 {
        let n = rng.gen_range(5..=200);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
        for _ in 0..rng.gen_range(0..n) {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v && !edges.contains(&(u.min(v), u.max(v))) && !edges.contains(&(u.max(v), u.min(v))) {
                edges.push((u, v));
            }
        }
        out.push(Graph::from_edges(n, &edges).unwrap());
    }
    out
}

#[test]
fn c01_small_graph_exactness() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut ok = true;
    let k3 = named::complete(3);
    let p3 = named::path(3);
    let sk = LaplacianSystem::new(&k3).unwrap();
    let sp = LaplacianSystem::new(&p3).unwrap();
    let exact = [
        (sk.effective_resistance(0, 1).unwrap(), 2.0 / 3.0),
        (exact_hitting_vector(&sk, 1).unwrap()[0] + exact_hitting_vector(&sk, 0).unwrap()[1], 4.0),
        (exact_hitting_vector(&sk, 1).unwrap()[0], 2.0),
        (target_time(&sk, TargetMethod::Exact, 0).unwrap().value, 4.0 / 3.0),
        (sp.effective_resistance(0, 2).unwrap(), 2.0),
        (exact_hitting_vector(&sp, 2).unwrap()[0], 4.0),
        (exact_hitting_vector(&sp, 2).unwrap()[0] + exact_hitting_vector(&sp, 0).unwrap()[2], 8.0),
    ];
    for (got, want) in exact {
        worst = worst.max((got - want).abs());
    }
    ok &= worst <= 1e-8;
    // cover time of K3 from any start: 1 + 2 = 3
    let cfg = WalkConfig::new(2024, 10_000);
    let mc = [
        (simulate_hitting(&k3, 0, 1, &cfg).unwrap(), 2.0),
        (simulate_commute(&k3, 0, 1, &cfg).unwrap(), 4.0),
        (simulate_cover(&k3, 0, &cfg).unwrap(), 3.0),
        (simulate_hitting(&p3, 0, 2, &cfg).unwrap(), 4.0),
        (simulate_commute(&p3, 0, 2, &cfg).unwrap(), 8.0),
    ];
    let mut worst_z = 0.0f64;
    for (s, want) in mc {
        worst_z = worst_z.max((s.mean - want).abs() / s.std_error);
    }
    ok &= worst_z <= 3.0;
    ok &= start.elapsed().as_secs_f64() < 10.0;
    verdict(1, "small-graph exactness", ok, start, format!("max exact error {worst:.2e}, max MC z-score {worst_z:.2}"));
}

#[test]
fn c02_commute_time_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rng = rng_from_seed(7);
    for g in small_graphs() {
        let sys = LaplacianSystem::new(&g).unwrap();
        let n = g.vertex_count();
        let two_m = 2.0 * g.edge_count() as f64;
        for _ in 0..50 {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n);
            while v == u {
                v = rng.gen_range(0..n);
            }
            let commute = exact_hitting_vector(&sys, v).unwrap()[u] + exact_hitting_vector(&sys, u).unwrap()[v];
            worst = worst.max(rel(commute, two_m * sys.effective_resistance(u, v).unwrap()));
        }
    }
    let ok = worst <= 1e-8 && start.elapsed().as_secs_f64() < 60.0;
    verdict(2, "commute-time identity", ok, start, format!("20 graphs x 50 pairs, max relative error {worst:.2e}"));
}

#[test]
fn c03_target_time_forms_agree() {
    let start = Instant::now();
    let k3 = LaplacianSystem::new(&named::complete(3)).unwrap();
    let constant = calibrate_target_constant(&k3, 10).unwrap();
    let mut ok = rel(constant, TARGET_TIME_CONSTANT) <= 1e-12;
    let mut worst = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    for g in small_graphs() {
        let sys = LaplacianSystem::new(&g).unwrap();
        let def = target_time(&sys, TargetMethod::Exact, 0).unwrap().value;
        let res = target_time_resistance_form(&g, constant, 1000).unwrap();
        worst = worst.max(rel(res, def));
        min_ratio = min_ratio.min(def / g.vertex_count() as f64);
    }
    ok &= worst <= 1e-8 && min_ratio >= 0.125 && start.elapsed().as_secs_f64() < 60.0;
    verdict(
        3,
        "target-time calibration and agreement",
        ok,
        start,
        format!("constant {constant:.12}, max relative gap {worst:.2e}, min t/|V| {min_ratio:.3}"),
    );
}

/// Vertices of `g` sitting in robust tiles, optionally only those whose
/// tile lies inside `B_O(rho')`.
fn robust_vertices(g: &HrgGraph, spec: &TilingSpec, c_prime: f64, inside_rho_prime: bool) -> Vec<usize> {
    let occ = classify_occupancy(g, spec, 20.0, c_prime).unwrap();
    let ctx = FlowContext::new(g, spec).unwrap();
    let bound = inside_rho_prime.then_some(occ.rho_prime);
    (0..g.vertex_count())
        .filter(|&v| {
            let t: TileId = ctx.index().location(v).tile;
            occ.is_robust(t) && bound.is_none_or(|b| spec.outer_radius(t.level) <= b)
        })
        .collect()
}

/// `(energy, resistance)` of `f_{s,t}` for up to `pairs` random pairs drawn
/// from `pool`; pairs whose flow cannot be built are skipped.
fn flow_pairs(g: &HrgGraph, spec: &TilingSpec, pool: &[usize], pairs: usize, seed: u64) -> (Vec<(f64, f64)>, usize) {
    let ctx = FlowContext::new(g, spec).unwrap();
    let comps = g.graph().components();
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::new();
    let mut invalid = 0;
    let mut systems: std::collections::HashMap<usize, (LaplacianSystem, Vec<usize>)> = Default::default();
    for _ in 0..pairs {
        let s = pool[rng.gen_range(0..pool.len())];
        let t = pool[rng.gen_range(0..pool.len())];
        if s == t || comps.label(s) != comps.label(t) {
            continue;
        }
        let Ok(f) = ctx.st_flow(s, t) else { continue };
        let rep = validate_flow(g.graph(), &f, FLOW_TOL);
        if !rep.is_unit(FLOW_TOL) {
            invalid += 1;
        }
        let (sys, ids) = systems.entry(comps.label(s)).or_insert_with(|| {
            let sub = g.graph().component_of(s).unwrap();
            (LaplacianSystem::new(&sub.graph).unwrap(), sub.global_ids)
        });
        let local = |v: usize| ids.iter().position(|&x| x == v).unwrap();
        out.push((rep.energy, sys.effective_resistance(local(s), local(t)).unwrap()));
    }
    (out, invalid)
}

#[test]
fn c04_flow_validity_and_duality() {
    let start = Instant::now();
    let mut built = 0;
    let mut invalid = 0;
    let mut duality_gap = f64::INFINITY;
    let p = params(2000.0);
    let spec = calibrate_c(&p, DEFAULT_EPSILON).unwrap();
    for i in 0..50 {
        let g = sample_graph(&p, SampleMode::Poissonized, derive_seed(404, i));
        let pool = robust_vertices(&g, &spec, 32.0 * std::f64::consts::LN_2, false);
        if pool.len() < 2 {
            continue;
        }
        let (pairs, bad) = flow_pairs(&g, &spec, &pool, 20, derive_seed(405, i));
        built += pairs.len();
        invalid += bad;
        for (e, r) in pairs {
            duality_gap = duality_gap.min(e - r);
        }
    }
    let mut ok = built > 0 && invalid == 0 && duality_gap >= -1e-8;

    // energies inside B_O(rho'), with C' small enough that the ball reaches
    // past R/2 at these sizes; the energy is the bounded quantity, the
    // ratio to the resistance is reported alongside
    let c_prime = 1.0;
    let (mut xs, mut ys_e, mut ys_ratio) = (Vec::new(), Vec::new(), Vec::new());
    let mut per_n = Vec::new();
    for k in 10..=13 {
        let n = (1u64 << k) as f64;
        let p = params(n);
        let spec = calibrate_c(&p, DEFAULT_EPSILON).unwrap();
        let mut energies = Vec::new();
        let mut ratios = Vec::new();
        for i in 0..10 {
            let g = sample_graph(&p, SampleMode::Poissonized, derive_seed(k, i));
            let pool = robust_vertices(&g, &spec, c_prime, true);
            if pool.len() < 2 {
                continue;
            }
            let (pairs, _) = flow_pairs(&g, &spec, &pool, 20, derive_seed(k + 100, i));
            energies.extend(pairs.iter().map(|(e, _)| *e));
            ratios.extend(pairs.iter().map(|(e, r)| e / r));
        }
        if !energies.is_empty() {
            let (me, mr) = (median(&energies), median(&ratios));
            xs.push(n.ln());
            ys_e.push(me.ln());
            ys_ratio.push(mr.ln());
            per_n.push(format!("{me:.3}/{mr:.1}"));
        }
    }
    let slope = |ys: &[f64]| least_squares(&xs, ys).map(|f| f.slope).unwrap_or(f64::NAN);
    let (slope_e, slope_ratio) = (slope(&ys_e), slope(&ys_ratio));
    ok &= xs.len() == 4 && slope_e.abs() <= 0.15 && start.elapsed().as_secs_f64() < 600.0;
    verdict(
        4,
        "flow validity and duality",
        ok,
        start,
        format!(
            "{built} flows, {invalid} invalid, min E - R_eff {duality_gap:.3e}; median E / median E/R_eff per n [{}], energy slope {slope_e:.3}, ratio slope {slope_ratio:.3}",
            per_n.join(", ")
        ),
    );
}

/// The shared sweep over `n = 2^11 .. 2^15`, 10 trials each.
fn main_sweep() -> &'static Vec<ExperimentRow> {
    static ROWS: OnceLock<Vec<ExperimentRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let cfg = ExperimentConfig {
            alpha: ALPHA,
            nu: NU,
            n_values: (11..=15).map(|k| (1u64 << k) as f64).collect(),
            seeds_per_n: 10,
            master_seed: 2,
            quantities: [Quantity::Thit, Quantity::Ttarget, Quantity::AvgResist, Quantity::Kirchhoff, Quantity::Degree]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        let rows = run_experiment(&cfg).unwrap();
        for r in &rows {
            assert!(r.notes.is_empty(), "trial failed: {}", r.notes);
        }
        rows
    })
}

#[test]
fn c05_target_time_linear() {
    let start = Instant::now();
    let rows = main_sweep();
    let band = fit_scaling(rows, "ttarget", ScalingModel::N, SizeBasis::Center).unwrap();
    let fit = fit_scaling(rows, "ttarget", ScalingModel::N, SizeBasis::Nominal).unwrap();
    let ok = band.band <= 3.0 && (fit.exponent - 1.0).abs() <= 0.15;
    verdict(
        5,
        "target time linear",
        ok,
        start,
        format!("band of t/|V_c| {:.3}, exponent {:.3} +- {:.3}", band.band, fit.exponent, fit.exponent_se),
    );
}

#[test]
fn c06_max_hitting_n_log_n() {
    let start = Instant::now();
    let rows = main_sweep();
    let fit = fit_scaling(rows, "thit", ScalingModel::NLogN, SizeBasis::Nominal).unwrap();
    let ok = fit.band <= 4.0 && (1.0..=1.2).contains(&fit.exponent);
    verdict(
        6,
        "max hitting n log n",
        ok,
        start,
        format!("band of t_hit/(n ln n) {:.3}, exponent {:.3} +- {:.3}", fit.band, fit.exponent, fit.exponent_se),
    );
}

#[test]
fn c07_cover_n_log2_n() {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut matthews_bad = 0;
    let mut kklv_bad = 0;
    let mut kklv_checked = 0;
    let mut trials = 0;
    for k in 11..=14u32 {
        let n = (1u64 << k) as f64;
        let p = params(n);
        for i in 0..10 {
            let seed = trial_seed(7, n, i);
            let g = build_graph_bucketed(sample_points(&p, SampleMode::Poissonized, seed), &p);
            let c = g.center_component().unwrap();
            let radii: Vec<f64> = c.global_ids.iter().map(|&v| g.point(v).r()).collect();
            let sys = LaplacianSystem::new(&c.graph).unwrap();
            let hit = max_hitting_estimate(&sys, Some(&radii), HittingStrategy::Auto(20)).unwrap();
            let start_v = (0..radii.len()).min_by(|&a, &b| radii[a].total_cmp(&radii[b])).unwrap();
            let cover = simulate_cover(&c.graph, start_v, &WalkConfig::new(derive_seed(seed, 4), 20)).unwrap();
            trials += 1;
            if cover.mean > 1.05 * harmonic(c.graph.vertex_count()) * hit.value {
                matthews_bad += 1;
            }
            let ends: Vec<usize> = find_dangling_paths(&c.graph, 1).iter().map(|p| p[0]).collect();
            if ends.len() >= 2 {
                kklv_checked += 1;
                if kklv_lower(&sys, &ends).unwrap() > cover.mean + 3.0 * cover.std_error {
                    kklv_bad += 1;
                }
            }
            rows.push(ExperimentRow {
                n,
                seed,
                vc: c.graph.vertex_count(),
                tcov_mean: Some(cover.mean),
                tcov_se: Some(cover.std_error),
                ..Default::default()
            });
        }
    }
    let fit = fit_scaling(&rows, "tcov", ScalingModel::NLog2N, SizeBasis::Nominal).unwrap();
    let ok = fit.band <= 4.0 && matthews_bad == 0 && kklv_bad == 0 && start.elapsed().as_secs_f64() < 1800.0;
    verdict(
        7,
        "cover n log^2 n",
        ok,
        start,
        format!(
            "band of t_cov/(n ln^2 n) {:.3}, exponent {:.3}; Matthews violations {matthews_bad}/{trials}, KKLV violations {kklv_bad}/{kklv_checked}",
            fit.band, fit.exponent
        ),
    );
}

#[test]
fn c08_average_resistance_constant() {
    let start = Instant::now();
    let rows = main_sweep();
    let avg = fit_scaling(rows, "avg_resist", ScalingModel::Constant, SizeBasis::Nominal).unwrap();
    let kir = fit_scaling(rows, "kirchhoff", ScalingModel::N2, SizeBasis::Nominal).unwrap();
    let ok = avg.exponent.abs() <= 0.1 && kir.band <= 3.0;
    verdict(
        8,
        "average resistance constant",
        ok,
        start,
        format!("avg resistance slope {:.4} +- {:.4}, band of K/n^2 {:.3}", avg.exponent, avg.exponent_se, kir.band),
    );
}

#[test]
fn c09_mean_degree() {
    let start = Instant::now();
    let p = params(32768.0);
    let limit = p.mean_degree_limit();
    let degs: Vec<f64> = (0..4)
        .map(|i| {
            let g = sample_graph(&p, SampleMode::Poissonized, derive_seed(9, i));
            2.0 * g.edge_count() as f64 / g.vertex_count() as f64
        })
        .collect();
    let mean = degs.iter().sum::<f64>() / degs.len() as f64;
    let ok = rel(mean, limit) <= 0.1 && start.elapsed().as_secs_f64() < 60.0;
    verdict(9, "mean degree", ok, start, format!("empirical {mean:.4} vs limit {limit:.4}, gap {:.2}%", 100.0 * rel(mean, limit)));
}

fn sample_in(spec: &TilingSpec, (a, b): (f64, f64), level: usize, rng: &mut hyperwalk::rng::Rng) -> PolarPoint {
    let big_r = spec.params().radius();
    let r = rng.gen_range(spec.inner_radius(level)..spec.outer_radius(level).min(big_r));
    PolarPoint::new(r, rng.gen_range(a..b))
}

#[test]
fn c10_tiling_geometry() {
    let start = Instant::now();
    let mut violations = 0;
    let mut spacing_ok = true;
    let mut cs = Vec::new();
    let mut rng = rng_from_seed(10);
    for k in [10u32, 13, 15, 18] {
        let p = params((1u64 << k) as f64);
        let spec = calibrate_c(&p, DEFAULT_EPSILON).unwrap();
        let rep = validate_spacing(&spec, DEFAULT_EPSILON);
        spacing_ok &= rep.spacing_passed;
        cs.push(format!("{}", spec.c()));
        let big_r = p.radius();
        for _ in 0..25_000 {
            let level = rng.gen_range(0..spec.level_count());
            let t = TileId::new(level, rng.gen_range(0..spec.tiles_at(level)));
            let x = sample_in(&spec, spec.tile_interval(t), level, &mut rng);
            let y = sample_in(&spec, spec.tile_interval(t), level, &mut rng);
            if hyperbolic_distance(x, y) > big_r {
                violations += 1;
            }
            if let Some(ph) = t.parent_half() {
                let z = sample_in(&spec, spec.half_interval(ph), level - 1, &mut rng);
                if hyperbolic_distance(x, z) > big_r {
                    violations += 1;
                }
            }
        }
    }
    let ok = violations == 0 && spacing_ok && start.elapsed().as_secs_f64() < 60.0;
    verdict(
        10,
        "tiling geometry",
        ok,
        start,
        format!("10^5 tile samples, {violations} distance violations; spacing passed {spacing_ok} with c = [{}]", cs.join(", ")),
    );
}

#[test]
fn c11_nash_williams() {
    let start = Instant::now();
    let p = params(8192.0);
    let g = sample_graph(&p, SampleMode::Poissonized, 1111);
    let c = center_hrg(&g).unwrap();
    let sys = LaplacianSystem::new(c.graph()).unwrap();
    let big_r = p.radius();
    let omega = default_omega(p.n());
    let lower = (1.0 - 1.0 / (2.0 * ALPHA)) * big_r;
    let mut rng = rng_from_seed(11);
    let n = c.vertex_count();
    let (mut sizes, mut predicted) = (Vec::new(), Vec::new());
    let mut violations = 0;
    while sizes.len() < 100 {
        let s = rng.gen_range(0..n);
        let ps = c.point(s);
        let Ok(phi) = phi_r(ps.r(), &p, omega) else { continue };
        if ps.r() <= lower || phi >= std::f64::consts::PI {
            continue;
        }
        let cut = sector_cut(&c, ps, phi).unwrap();
        let outside: Vec<usize> = (0..n).filter(|v| cut.inside.binary_search(v).is_err()).collect();
        if cut.is_empty() || outside.is_empty() {
            continue;
        }
        let t = outside[rng.gen_range(0..outside.len())];
        if nash_williams_lower(&cut).unwrap() > sys.effective_resistance(s, t).unwrap() + 1e-12 {
            violations += 1;
        }
        sizes.push(cut.len() as f64);
        predicted.push((2.0 * ALPHA * (1.0 - ALPHA) * (big_r - ps.r())).exp());
    }
    let rho = spearman(&sizes, &predicted);
    let ok = violations == 0 && rho > 0.5 && start.elapsed().as_secs_f64() < 600.0;
    verdict(11, "Nash-Williams cuts", ok, start, format!("100 cuts, {violations} violations, Spearman {rho:.3}"));
}

#[test]
fn c12_builder_equivalence_and_determinism() {
    let start = Instant::now();
    let p = params(4000.0);
    let mut mismatches = 0;
    for seed in 0..100 {
        let pts = sample_points(&p, SampleMode::Poissonized, seed);
        let a = build_graph_bucketed(pts.clone(), &p);
        let b = build_graph_naive(pts, &p);
        if a.graph() != b.graph() {
            mismatches += 1;
        }
    }
    let cfg = ExperimentConfig {
        n_values: vec![256.0, 512.0, 1024.0],
        seeds_per_n: 2,
        quantities: Quantity::ALL.into_iter().collect(),
        mc_reps: 3,
        target_samples: 10,
        resist_pairs: 50,
        flow_pairs: 5,
        ..Default::default()
    };
    let csv = |cfg: &ExperimentConfig| {
        let mut buf = Vec::new();
        write_rows_csv(&run_experiment(cfg).unwrap(), &mut buf).unwrap();
        buf
    };
    let identical = csv(&cfg) == csv(&cfg);
    let ok = mismatches == 0 && identical && start.elapsed().as_secs_f64() < 300.0;
    verdict(
        12,
        "builder equivalence and determinism",
        ok,
        start,
        format!("{mismatches}/100 edge-set mismatches, byte-identical CSV {identical}"),
    );
}
