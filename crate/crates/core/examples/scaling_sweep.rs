//! A small scaling sweep: run trials, write the CSV, fit the growth laws.
//!
//! `cargo run --release --example scaling_sweep -- results.csv`

use hyperwalk::harness::{fit_scaling, run_experiment, write_rows_csv, ExperimentConfig, ScalingModel, SizeBasis};

fn main() -> hyperwalk::Result<()> {
    let mut cfg = ExperimentConfig::parse(
        "n_values = 2^10..2^13\n\
         seeds_per_n = 4\n\
         quantities = degree, thit, ttarget, avg_resist, kirchhoff, tcov, dangling\n\
         mc_reps = 10\n\
         resist_pairs = 300\n\
         target_samples = 100\n",
    )?;
    cfg.timings = true;
    let rows = run_experiment(&cfg)?;
    match std::env::args().nth(1) {
        Some(path) => write_rows_csv(&rows, std::fs::File::create(&path)?)?,
        None => write_rows_csv(&rows, std::io::stdout().lock())?,
    }

    for (q, model) in [
        ("ttarget", ScalingModel::N),
        ("thit", ScalingModel::NLogN),
        ("tcov", ScalingModel::NLog2N),
        ("avg_resist", ScalingModel::Constant),
        ("kirchhoff", ScalingModel::N2),
    ] {
        let fit = fit_scaling(&rows, q, model, SizeBasis::Nominal)?;
        eprintln!("{q:>10} vs {model:?}: band {:.3}, exponent {:.3} +- {:.3}", fit.band, fit.exponent, fit.exponent_se);
    }
    Ok(())
}
