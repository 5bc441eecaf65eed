//! Average effective resistance and Nash-Williams lower bounds from sector
//! cuts.

use hyperwalk::geometry::{ModelParams, PolarPoint};
use hyperwalk::hrg::{sample_graph, HrgGraph, SampleMode};
use hyperwalk::resistance::{default_omega, nash_williams_lower, phi_r, sampled_average, sector_cut, LaplacianSystem};

fn main() -> hyperwalk::Result<()> {
    let params = ModelParams::new(0.7, 1.0, 8192.0)?;
    let full = sample_graph(&params, SampleMode::Poissonized, 2);
    let c = full.center_component().expect("center component");
    let pts: Vec<PolarPoint> = c.global_ids.iter().map(|&v| full.point(v)).collect();
    let g = HrgGraph::from_parts(params, pts, c.graph)?;
    let sys = LaplacianSystem::new(g.graph())?;

    let avg = sampled_average(&sys, 500, 1)?;
    println!("average resistance {:.4} +- {:.4}, Kirchhoff estimate {:.4e}", avg.average, avg.average_ci, avg.kirchhoff);

    let omega = default_omega(params.n());
    let far = (0..g.vertex_count()).min_by(|&a, &b| g.point(a).r().total_cmp(&g.point(b).r())).unwrap();
    for s in (0..g.vertex_count()).step_by(g.vertex_count() / 8) {
        let p = g.point(s);
        let Ok(phi) = phi_r(p.r(), &params, omega) else { continue };
        if phi >= std::f64::consts::PI || s == far {
            continue;
        }
        let cut = sector_cut(&g, p, phi)?;
        if cut.is_empty() || cut.inside.contains(&far) {
            continue;
        }
        println!(
            "s = {s:>5} r = {:.3} phi = {:.2e}: |cut| = {:>4}, 1/|cut| = {:.4} <= R_eff = {:.4}",
            p.r(),
            phi,
            cut.len(),
            nash_williams_lower(&cut)?,
            sys.effective_resistance(s, far)?
        );
    }
    Ok(())
}
