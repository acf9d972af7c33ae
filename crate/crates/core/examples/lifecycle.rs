//! Count awake jammer components through Scenario 3's overlapping attacks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgpo_track::sim::{generate_scans, generate_trajectory, preset};
use rgpo_track::tracker::{LifecycleMode, RfsTracker, RfsTrackerConfig};

fn main() -> rgpo_track::Result<()> {
    let cfg = preset(3)?;
    let truth = generate_trajectory(&cfg)?;
    let scans = generate_scans(&truth, &cfg, &mut ChaCha8Rng::seed_from_u64(5))?;
    let mut tracker = RfsTracker::new(RfsTrackerConfig::adaptive(LifecycleMode::Multi));
    let mut line = String::new();
    for (i, scan) in scans.iter().enumerate() {
        let r = tracker.step(&scan.points)?;
        line.push(char::from(b'0' + r.awake.min(9) as u8));
        if (i + 1) % 25 == 0 {
            println!("k {:3}-{:3}: {line}", i - 23, i + 1);
            line.clear();
        }
    }
    Ok(())
}
