use crate::model::ModelParams;

pub const DEFAULT_STEP: f64 = 1e-6;

/// Central-difference gradient of `objective`, one coordinate at a time.
pub fn finite_diff_gradient<F>(objective: F, params: &ModelParams, h: f64) -> ModelParams
where
    F: Fn(&ModelParams) -> f64,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let mut probe = params.clone();
    let grad = (0..params.len())
        .map(|i| {
            let x = params.as_slice()[i];
            probe.as_mut_slice()[i] = x + h;
            let up = objective(&probe);
            probe.as_mut_slice()[i] = x - h;
            let down = objective(&probe);
            probe.as_mut_slice()[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect();
    ModelParams::from_flat(grad)
}
