use crate::rng::RngStream;

/// Uniform point in the `d`-ball of radius `r`: `r u^{1/d} v/‖v‖` with `v`
/// standard normal and `u` uniform on `[0, 1)`.
pub fn muller_ball_sample(d: usize, r: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut out = vec![0.0; d];
    muller_ball_sample_into(r, rng, &mut out);
    out
}

pub fn muller_ball_sample_into(r: f64, rng: &mut RngStream, out: &mut [f64]) {
    let d = out.len();
    let norm = unit_direction_into(rng, out);
    let scale = r * rng.uniform().powf(1.0 / d as f64) / norm;
    out.iter_mut().for_each(|x| *x *= scale);
}

/// Fills `out` with a standard normal vector whose norm exceeds `1e-300` and
/// returns that norm.
pub(crate) fn unit_direction_into(rng: &mut RngStream, out: &mut [f64]) -> f64 {
    loop {
        rng.fill_normal(out);
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm >= 1e-300 {
            return norm;
        }
    }
}
