//! The top-m projection on a few priority vectors, and how sampling follows it.

use rand::SeedableRng;
use sdn_dispatch::dispatch::{project, sample_action};
use sdn_dispatch::SimRng;

fn main() -> anyhow::Result<()> {
    for (o, m) in [(vec![3.0, 1.0], 1), (vec![3.0, 1.0], 2), (vec![0.5, 0.3, 0.2], 2), (vec![1.0, 4.0, 2.0, 3.0], 2)] {
        let d = project(&o, m)?;
        println!("priorities {o:?}, m = {m}");
        println!("  rank order {:?}  probabilities {:.4?}", d.permutation, d.probabilities);
    }

    let d = project(&[1.0, 4.0, 2.0, 3.0], 2)?;
    let mut rng = SimRng::seed_from_u64(0);
    let mut counts = [0usize; 4];
    for _ in 0..100_000 {
        counts[sample_action(&d, &mut rng)] += 1;
    }
    println!("100000 samples: {counts:?} (controllers 0 and 2 are outside the support)");
    Ok(())
}
