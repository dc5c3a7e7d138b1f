//! Compares the analytic gradient of a dispatch probability with central
//! finite differences for a random network and state.

use rand::{Rng, SeedableRng};
use sdn_dispatch::dispatch::{
    action_probability, action_probability_and_gradient, scheduler_spec, ControllerFeatures, FeatureConfig,
};
use sdn_dispatch::{ParamStore, SimRng};

fn main() -> anyhow::Result<()> {
    let cfg = FeatureConfig::default();
    let mut rng = SimRng::seed_from_u64(42);
    let net = ParamStore::init(scheduler_spec(), 42);
    let features: Vec<ControllerFeatures> = (0..4)
        .map(|c| {
            ControllerFeatures([
                [0.4, 0.6, 0.8, 1.0][c],
                rng.random_range(0.002..0.04),
                rng.random_range(0.0..1.0),
                0.0,
                rng.random_range(0.005..0.05),
                0.0,
                5000.0,
            ])
        })
        .collect();
    let m = 2;
    let (_, dist) = action_probability(&net, &features, m, 0, &cfg)?;
    let action = dist.support()[0];
    let g = action_probability_and_gradient(&net, &features, m, action, &cfg)?;
    println!("pi(action {action}) = {:.6}, distribution {:.4?}", g.probability, dist.probabilities);

    let h = 1e-6;
    let mut worst = 0.0f64;
    let scale = g.gradient.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for i in (0..net.len()).step_by(97) {
        let mut plus = net.clone();
        plus.params[i] += h;
        let mut minus = net.clone();
        minus.params[i] -= h;
        let fd = (action_probability(&plus, &features, m, action, &cfg)?.0
            - action_probability(&minus, &features, m, action, &cfg)?.0)
            / (2.0 * h);
        worst = worst.max((fd - g.gradient[i]).abs() / scale);
        if i % 970 == 0 {
            println!("  param {i:>5}: analytic {:+.6e}  finite difference {fd:+.6e}", g.gradient[i]);
        }
    }
    println!("largest error relative to the gradient scale: {worst:.2e}");
    Ok(())
}
