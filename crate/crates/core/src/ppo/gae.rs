//! Generalized advantage estimation.

use crate::error::TrainError;

/// GAE(γ, λ) advantages and the matching return targets `A_t + V_t`.
///
/// `bootstrap` is the value of the state following the last step: `V` of the
/// next state when the trajectory was cut mid-episode, 0 at episode end.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), TrainError> {
    if rewards.is_empty() {
        return Err(TrainError::EmptyTrajectory);
    }
    assert_eq!(rewards.len(), values.len(), "one value per reward");
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { bootstrap };
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// Shifts and scales to zero mean and unit (population) variance. A single
/// entry or a constant vector is only centred.
pub fn normalize(adv: &mut [f64]) {
    let n = adv.len();
    if n == 0 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    for a in adv.iter_mut() {
        *a -= mean;
        if n > 1 && std > 1e-12 {
            *a /= std;
        }
    }
}
