use crate::error::{LavaError, Result};
use crate::normal;

/// A function that is linear on each of `z > w`, `|z| <= w` and `z < -w`:
///
/// ```text
/// F(z) = h z + d   for z > w
///        e z + m   for |z| <= w
///        f z + g   for z < -w
/// ```
///
/// `w = +∞` is allowed and leaves only the middle piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiecewiseLinear {
    pub h: f64,
    pub d: f64,
    pub e: f64,
    pub m: f64,
    pub f: f64,
    pub g: f64,
    pub w: f64,
}

impl PiecewiseLinear {
    /// A single line `a z + b` everywhere.
    pub fn line(a: f64, b: f64) -> Self {
        Self { h: a, d: b, e: a, m: b, f: a, g: b, w: 1.0 }
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z > self.w {
            self.h * z + self.d
        } else if z < -self.w {
            self.f * z + self.g
        } else {
            self.e * z + self.m
        }
    }
}

/// Closed-form `E[F(Z)²]` for `Z ~ N(θ, σ²)`, obtained by integrating each
/// linear piece by parts against the normal density.
pub fn piecewise_sq_expectation(spec: &PiecewiseLinear, theta: f64, sigma: f64) -> Result<f64> {
    let PiecewiseLinear { h, d, e, m, f, g, w } = *spec;
    let finite = [h, d, e, m, f, g, theta].iter().all(|v| v.is_finite());
    if !finite || !(w >= 0.0) || !(sigma > 0.0 && sigma.is_finite()) {
        return Err(LavaError::InvalidInput(format!(
            "piecewise kernel needs finite coefficients, w >= 0, sigma > 0: {spec:?}, theta={theta}, sigma={sigma}"
        )));
    }
    let s2 = sigma * sigma;
    let middle_moment = (e * theta + m).powi(2) + e * e * s2;
    if w.is_infinite() {
        return Ok(middle_moment);
    }

    let phi_w = normal::pdf_scaled(w, theta, sigma);
    let phi_mw = normal::pdf_scaled(-w, theta, sigma);
    let upper = normal::sf((w - theta) / sigma);
    let lower = normal::cdf((-w - theta) / sigma);
    let inner = normal::prob_between((-w - theta) / sigma, (w - theta) / sigma);

    let at_w = s2 * (h * h * w + h * h * theta + 2.0 * d * h) - s2 * (e * e * w + e * e * theta + 2.0 * m * e);
    let at_mw = s2 * (-e * e * w + e * e * theta + 2.0 * m * e) - s2 * (-f * f * w + f * f * theta + 2.0 * g * f);

    Ok(at_w * phi_w
        + at_mw * phi_mw
        + ((h * theta + d).powi(2) + h * h * s2) * upper
        + ((f * theta + g).powi(2) + f * f * s2) * lower
        + middle_moment * inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_function() {
        let c = 1.7;
        let spec = PiecewiseLinear { h: 0.0, d: c, e: 0.0, m: c, f: 0.0, g: c, w: 0.8 };
        let v = piecewise_sq_expectation(&spec, 0.3, 1.4).unwrap();
        assert!((v - c * c).abs() < 1e-12);
    }

    #[test]
    fn centred_identity_has_variance() {
        for w in [0.0, 0.1, 1.0, 5.0, f64::INFINITY] {
            let theta = -0.7;
            let mut spec = PiecewiseLinear::line(1.0, -theta);
            spec.w = w;
            let v = piecewise_sq_expectation(&spec, theta, 2.0).unwrap();
            assert!((v - 4.0).abs() < 1e-12, "w={w}: {v}");
        }
    }

    #[test]
    fn merged_line_matches_second_moment() {
        let mut rng = crate::rng::stream(11, 0);
        for _ in 0..200 {
            let a: f64 = rng.random_range(-3.0..3.0);
            let b: f64 = rng.random_range(-3.0..3.0);
            let theta: f64 = rng.random_range(-4.0..4.0);
            let sigma: f64 = rng.random_range(0.05..3.0);
            let mut spec = PiecewiseLinear::line(a, b);
            spec.w = rng.random_range(0.0..5.0);
            let v = piecewise_sq_expectation(&spec, theta, sigma).unwrap();
            let exact = (a * theta + b).powi(2) + a * a * sigma * sigma;
            assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
        }
    }

    #[test]
    fn lava_residual_matches_monte_carlo() {
        // F(z) = d_lava(z) - z at θ = 0, σ = 1, λ₁ = λ₂ = 1 (k = 1/2, w = 1).
        let spec = PiecewiseLinear { h: 0.0, d: -0.5, e: -0.5, m: 0.0, f: 0.0, g: 0.5, w: 1.0 };
        let exact = piecewise_sq_expectation(&spec, 0.0, 1.0).unwrap();
        let mut rng = crate::rng::stream(2024, 0);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                spec.eval(z).powi(2)
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn rejects_non_finite() {
        let mut spec = PiecewiseLinear::line(1.0, 0.0);
        spec.d = f64::NAN;
        assert!(piecewise_sq_expectation(&spec, 0.0, 1.0).is_err());
        assert!(piecewise_sq_expectation(&PiecewiseLinear::line(1.0, 0.0), 0.0, 0.0).is_err());
    }
}
