//! Small Monte Carlo comparison of all four trackers.

use rgpo_track::metrics::{run_monte_carlo, TrackerKind, TrackerParams};
use rgpo_track::sim::preset;

fn main() -> rgpo_track::Result<()> {
    let runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let out = run_monte_carlo(&preset(1)?, &TrackerKind::ALL, &TrackerParams::default(), runs, 1)?;
    let t = &out.table;
    print!("   k  bias");
    for s in &t.series {
        print!(" {:>12}", s.kind.name());
    }
    println!();
    for k in (10..=t.n_steps).step_by(10) {
        print!("{k:4} {:5.1}", t.bias_true[k - 1]);
        for s in &t.series {
            print!(" {:12.2}", s.rmse[k - 1]);
        }
        println!();
    }
    Ok(())
}
