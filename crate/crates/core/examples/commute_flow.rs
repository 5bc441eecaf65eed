//! Add a vertex at a chosen radius and push one unit of flow from it onto
//! a half-tile deeper in the disk.
//!
//! At sizes that fit on a desk most half-tiles away from the center are
//! empty, so the sampled graph is topped up with a few points in every
//! half-tile the flow passes through.

use hyperwalk::flows::{commute_flow, commute_levels, fact_ratio, validate_flow, FLOW_TOL};
use hyperwalk::geometry::{ModelParams, PolarPoint};
use hyperwalk::hrg::{build_graph_bucketed, sample_points, SampleMode};
use hyperwalk::tiling::{build_tiling, locate_on_ray, rho, HalfTileId, TileId, TilingSpec};

fn fill(spec: &TilingSpec, h: HalfTileId, k: usize) -> Vec<PolarPoint> {
    let (a, b) = spec.half_interval(h);
    let lo = spec.inner_radius(h.level());
    let hi = spec.outer_radius(h.level()).min(spec.params().radius());
    (0..k)
        .map(|i| {
            let x = 0.1 + 0.8 * (i as f64 + 0.5) / k as f64;
            PolarPoint::new(lo + x * (hi - lo), a + x * (b - a))
        })
        .collect()
}

fn main() -> hyperwalk::Result<()> {
    // C must be small for rho(C) to clear R/2 at this size
    let c_big = 0.15;
    let params = ModelParams::new(0.75, 1.0, 1e5)?;
    let spec = build_tiling(&params, 2.0)?;
    let big_r = params.radius();
    println!("R = {big_r:.3}, rho(C) = {:.3}", rho(&params, c_big));

    for frac in [0.36, 0.44, 0.52, 0.6, 0.68] {
        let w = PolarPoint::new(frac * big_r, 1.0);
        let levels = match commute_levels(&spec, w.r(), c_big) {
            Ok(l) => l,
            Err(e) => {
                println!("r_w = {:.3}: {e}", w.r());
                continue;
            }
        };
        let base = levels.anchor_level();
        let h_w = locate_on_ray(w.theta(), base, &spec);
        let mut points = sample_points(&params, SampleMode::Poissonized, 9);
        points.extend(fill(&spec, h_w, 3));
        for s in 1..=levels.k_w {
            let first = h_w.half_index() << (s - 1);
            for j in first..first + (1 << (s - 1)) {
                let t = TileId::new(base + s, j);
                points.extend(fill(&spec, t.half(0), 3));
                points.extend(fill(&spec, t.half(1), 3));
            }
        }
        let g = build_graph_bucketed(points, &params);
        match commute_flow(&g, &spec, w, c_big) {
            Ok(cf) => {
                let rep = validate_flow(cf.graph.graph(), &cf.flow, FLOW_TOL);
                println!(
                    "r_w = {:.3}: k_w = {}, H_w = {}, valid {}, energy {:.5}, degree {}, scale ratio {:.3}",
                    w.r(),
                    cf.levels.k_w,
                    cf.h_w,
                    rep.is_unit(FLOW_TOL),
                    rep.energy,
                    cf.graph.graph().degree(cf.w),
                    fact_ratio(&spec, w.r(), &cf.levels)
                );
            }
            Err(e) => println!("r_w = {:.3}: {e}", w.r()),
        }
    }
    Ok(())
}
