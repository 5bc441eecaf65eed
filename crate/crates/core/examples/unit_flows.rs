//! Construct tiling-compatible unit flows between vertices in robust tiles
//! and compare their energy with the effective resistance.

use hyperwalk::flows::{validate_flow, FlowContext, FLOW_TOL};
use hyperwalk::geometry::ModelParams;
use hyperwalk::hrg::{sample_graph, SampleMode};
use hyperwalk::resistance::LaplacianSystem;
use hyperwalk::tiling::{calibrate_c, classify_occupancy, DEFAULT_C, DEFAULT_C_PRIME, DEFAULT_EPSILON};

fn main() -> hyperwalk::Result<()> {
    let params = ModelParams::new(0.7, 1.0, 4096.0)?;
    let spec = calibrate_c(&params, DEFAULT_EPSILON)?;
    let g = sample_graph(&params, SampleMode::Poissonized, 5);
    let occ = classify_occupancy(&g, &spec, DEFAULT_C, DEFAULT_C_PRIME)?;
    let ctx = FlowContext::new(&g, &spec)?;

    let center = g.center_component().expect("center component");
    let sys = LaplacianSystem::new(&center.graph)?;
    let robust: Vec<usize> = center
        .global_ids
        .iter()
        .copied()
        .filter(|&v| occ.is_robust(ctx.index().location(v).tile))
        .collect();
    println!("{} center vertices, {} in robust tiles", center.global_ids.len(), robust.len());

    for w in robust.windows(2).step_by(3).take(8) {
        let (s, t) = (w[0], w[1]);
        match ctx.st_flow(s, t) {
            Ok(f) => {
                let rep = validate_flow(g.graph(), &f, FLOW_TOL);
                let r = sys.effective_resistance(center.local_id(s).unwrap(), center.local_id(t).unwrap())?;
                println!(
                    "{s:>5} -> {t:<5} valid {} energy {:.4} >= R_eff {:.4}  ({} edges)",
                    rep.is_unit(FLOW_TOL),
                    rep.energy,
                    r,
                    f.support_len()
                );
            }
            Err(e) => println!("{s:>5} -> {t:<5} not constructible: {e}"),
        }
    }
    Ok(())
}
