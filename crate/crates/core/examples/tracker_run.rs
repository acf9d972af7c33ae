//! Track one replica of Scenario 1 with the adaptive tracker.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgpo_track::sim::{generate_scans, generate_trajectory, preset};
use rgpo_track::tracker::{LifecycleMode, RfsTracker, RfsTrackerConfig};

fn main() -> rgpo_track::Result<()> {
    let cfg = preset(1)?;
    let truth = generate_trajectory(&cfg)?;
    let scans = generate_scans(&truth, &cfg, &mut ChaCha8Rng::seed_from_u64(3))?;
    let mut tracker = RfsTracker::new(RfsTrackerConfig::adaptive(LifecycleMode::Single));
    for (i, scan) in scans.iter().enumerate() {
        let k = i + 1;
        let r = tracker.step(&scan.points)?;
        if k % 10 == 0 {
            let err = (r.position - truth.position(k)).norm();
            let bias = r.biases.first().map_or(f64::NAN, |b| b.mean);
            println!(
                "k={k:3} err={err:5.2} m p_jam={:.2} bias={bias:6.2} awake={} comps={}",
                r.p_jam, r.awake, r.n_components
            );
        }
    }
    Ok(())
}
