//! Generate a preset trajectory and inspect a few scans.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgpo_track::sim::{generate_scans, generate_trajectory, preset, Provenance};

fn main() -> rgpo_track::Result<()> {
    let id = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let cfg = preset(id)?;
    let truth = generate_trajectory(&cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scans = generate_scans(&truth, &cfg, &mut rng)?;
    for k in (10..=cfg.n_steps).step_by(15) {
        let s = &scans[k - 1];
        let jam = s.provenance.iter().filter(|p| matches!(p, Provenance::Jammer(_))).count();
        let p = truth.position(k);
        println!(
            "k={k:3} target=({:7.1}, {:7.1}) points={:2} jammer={} biases={:?}",
            p.x,
            p.y,
            s.len(),
            jam,
            truth.biases[k]
        );
    }
    Ok(())
}
