//! Standard normal density, distribution and quantile functions.
//!
//! The distribution function is evaluated through `erfc` so that both tails
//! keep full relative accuracy; the risk formulas subtract large terms and
//! cannot tolerate the usual single-precision-grade approximations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Density of `N(mean, sd^2)` at `x`.
pub fn pdf_scaled(x: f64, mean: f64, sd: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    pdf((x - mean) / sd) / sd
}

pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`, accurate for large positive `x`.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `Pr(a < N(0,1) < b)` for `a <= b`, choosing the tail that avoids cancellation.
pub fn prob_between(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let p = if a >= 0.0 {
        sf(a) - sf(b)
    } else if b <= 0.0 {
        cdf(b) - cdf(a)
    } else {
        1.0 - sf(b) - cdf(a)
    };
    p.max(0.0)
}

/// Inverse of the standard normal distribution function.
///
/// Acklam's rational approximation (relative error about 1e-9) followed by
/// one Halley step against the `erfc`-based distribution function.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }

    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement; work in the tail that carries the precision.
    let e = if x > 0.0 { (1.0 - p) - sf(x) } else { cdf(x) - p };
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        // Values from a 50-digit evaluation of 0.5*erfc(-x/sqrt 2).
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((sf(5.0) - 2.866_515_718_791_939e-7).abs() / 2.866_515_718_791_939e-7 < 1e-12);
        assert!((sf(10.0) - 7.619_853_024_160_526e-24).abs() / 7.619_853_024_160_526e-24 < 1e-12);
    }

    #[test]
    fn quantile_reference_values() {
        assert!((quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-13);
        assert!((quantile(0.5)).abs() < 1e-15);
        assert!((quantile(1.0 - 0.000_25) - 3.480_756_404_346_212_8).abs() < 1e-12);
        assert!((quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-11);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = quantile(p);
            assert!((cdf(x) - p).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn prob_between_is_complement_of_tails() {
        for &(a, b) in &[(-1.0, 2.0), (3.0, 4.0), (-6.0, -5.5), (-0.1, 0.1)] {
            let direct = prob_between(a, b);
            let tails = 1.0 - cdf(a) - sf(b);
            assert!((direct - tails).abs() < 1e-15);
        }
        assert_eq!(prob_between(1.0, 1.0), 0.0);
    }
}
