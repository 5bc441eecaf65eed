//! Hitting, commute, target and cover times on a small sampled graph, exact
//! where possible and by simulation otherwise.

use hyperwalk::geometry::ModelParams;
use hyperwalk::hrg::{sample_graph, SampleMode};
use hyperwalk::resistance::LaplacianSystem;
use hyperwalk::stats::harmonic;
use hyperwalk::walks::{
    exact_hitting_vector, find_dangling_paths, kklv_lower, matthews_upper, max_hitting_estimate, simulate_commute,
    simulate_cover, simulate_hitting, target_time, HittingStrategy, TargetMethod, WalkConfig,
};

fn main() -> hyperwalk::Result<()> {
    let params = ModelParams::new(0.7, 1.0, 600.0)?;
    let g = sample_graph(&params, SampleMode::Poissonized, 4);
    let c = g.center_component().expect("center component").graph;
    let sys = LaplacianSystem::new(&c)?;
    let n = c.vertex_count();
    println!("center component: {n} vertices, {} edges", c.edge_count());

    let (u, v) = (0, n - 1);
    let cfg = WalkConfig::new(11, 2000);
    let h = exact_hitting_vector(&sys, v)?[u];
    let sim = simulate_hitting(&c, u, v, &cfg)?;
    println!("hitting {u}->{v}: exact {h:.2}, simulated {:.2} +- {:.2}", sim.mean, sim.std_error);
    let commute = 2.0 * c.edge_count() as f64 * sys.effective_resistance(u, v)?;
    let sim = simulate_commute(&c, u, v, &cfg)?;
    println!("commute: 2|E| R_eff {commute:.2}, simulated {:.2} +- {:.2}", sim.mean, sim.std_error);

    let t = target_time(&sys, TargetMethod::Exact, 0)?;
    println!("target time {:.2} ({:.3} per vertex)", t.value, t.value / n as f64);

    let hit = max_hitting_estimate(&sys, None, HittingStrategy::Exact)?;
    let cover = simulate_cover(&c, hit.target, &WalkConfig::new(12, 200))?;
    let ends: Vec<usize> = find_dangling_paths(&c, 1).iter().map(|p| p[0]).collect();
    println!("max hitting {:.1} ({} -> {})", hit.value, hit.source, hit.target);
    println!("cover {:.1} +- {:.1}, Matthews bound {:.1} (H_n = {:.3})", cover.mean, cover.std_error, matthews_upper(hit.value, n), harmonic(n));
    if ends.len() >= 2 {
        println!("{} dangling ends, lower bound {:.1}", ends.len(), kklv_lower(&sys, &ends)?);
    }
    Ok(())
}
