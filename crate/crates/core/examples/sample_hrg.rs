//! Sample a hyperbolic random graph and print its basic statistics.
//!
//! `cargo run --release --example sample_hrg -- 8192 7`

use hyperwalk::geometry::ModelParams;
use hyperwalk::hrg::{components_and_center, degree_summary, sample_graph, SampleMode};

fn main() -> hyperwalk::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(8192.0);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let params = ModelParams::new(0.7, 1.0, n)?;
    let g = sample_graph(&params, SampleMode::Poissonized, seed);
    let d = degree_summary(g.graph())?;
    let (comps, center) = components_and_center(&g);

    println!("R = {:.4}, vertices = {}, edges = {}", params.radius(), g.vertex_count(), g.edge_count());
    println!("mean degree {:.3} (limit {:.3}), max degree {}", d.mean, params.mean_degree_limit(), d.max);
    if let Some(gamma) = d.tail_exponent {
        println!("degree tail exponent {gamma:.3} (model: {:.3})", 2.0 * params.alpha() + 1.0);
    }
    println!("{} components", comps.count());
    if let Some(c) = center {
        println!("center component: {} vertices", comps.size(c));
    }
    for bin in d.histogram.iter().take(8) {
        println!("  degree [{:>4}, {:>4}): {}", bin.lo, bin.hi, bin.count);
    }
    Ok(())
}
