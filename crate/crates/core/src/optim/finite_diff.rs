/// Step used by the quasi-Newton stage.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Central-difference gradient with a fixed per-coordinate step.
pub fn central_gradient<F>(f: &mut F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Richardson extrapolation of central differences at `h` and `h/2`;
/// fourth-order accurate.
pub fn richardson_gradient<F>(f: &mut F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let coarse = central_gradient(f, x, h);
    let fine = central_gradient(f, x, h / 2.0);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quadratic() {
        let mut f = |x: &[f64]| 3.0 * x[0] * x[0] - x[0] * x[1] + 0.5 * x[1] * x[1];
        let g = central_gradient(&mut f, &[1.0, -2.0], DEFAULT_STEP);
        assert!((g[0] - 8.0).abs() < 1e-8);
        assert!((g[1] + 3.0).abs() < 1e-8);
    }

    #[test]
    fn richardson_beats_plain_on_sine() {
        let mut f = |x: &[f64]| x[0].sin();
        let plain = central_gradient(&mut f, &[0.7], 1e-2)[0];
        let rich = richardson_gradient(&mut f, &[0.7], 1e-2)[0];
        let exact = 0.7f64.cos();
        assert!((rich - exact).abs() < (plain - exact).abs());
    }
}
