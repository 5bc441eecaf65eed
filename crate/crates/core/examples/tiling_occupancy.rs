//! Build the tiling for a sampled graph and classify its tiles.

use hyperwalk::geometry::ModelParams;
use hyperwalk::hrg::{sample_graph, SampleMode};
use hyperwalk::tiling::{calibrate_c, classify_occupancy, validate_spacing, DEFAULT_C, DEFAULT_C_PRIME, DEFAULT_EPSILON};

fn main() -> hyperwalk::Result<()> {
    let n: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16384.0);
    let params = ModelParams::new(0.7, 1.0, n)?;
    let spec = calibrate_c(&params, DEFAULT_EPSILON)?;
    let spacing = validate_spacing(&spec, DEFAULT_EPSILON);
    println!("c = {}, N0 = {}, {} levels, spacing ok: {}", spec.c(), spec.n0(), spec.level_count(), spacing.passed);

    let g = sample_graph(&params, SampleMode::Poissonized, 3);
    let occ = classify_occupancy(&g, &spec, DEFAULT_C, DEFAULT_C_PRIME)?;
    println!("rho = {:.3}, rho' = {:.3}, R/2 = {:.3}", occ.rho, occ.rho_prime, params.radius() / 2.0);
    println!("{:>5} {:>9} {:>9} {:>7} {:>9} {:>7} {:>7}", "level", "h", "tiles", "verts", "exp/half", "faulty", "robust");
    for s in occ.summaries(&spec) {
        println!(
            "{:>5} {:>9.4} {:>9} {:>7} {:>9.3} {:>7} {:>7}",
            s.level, s.outer, s.tiles, s.vertices, s.expected_per_half, s.faulty_tiles, s.robust_tiles
        );
    }
    Ok(())
}
