//! Modified Bessel functions K₀/K₁ and modified Struve functions L₋₁/L₀.
//!
//! K uses the power series up to x = 2 and Steed's continued fraction above.
//! L uses its power series, which has only positive terms and therefore no
//! cancellation.

use crate::error::{Error, Result};
use crate::units::EULER_GAMMA;
use std::f64::consts::PI;

/// Largest argument for which K is evaluated; beyond it the result underflows.
pub const BESSEL_K_UNDERFLOW: f64 = 700.0;

const SERIES_SWITCH: f64 = 2.0;
const MAX_TERMS: usize = 10_000;

/// Order of the modified Bessel function of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

/// Order of the modified Struve function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StruveOrder {
    MinusOne,
    Zero,
}

/// Value of K with an explicit underflow marker for x beyond [`BESSEL_K_UNDERFLOW`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub value: f64,
    pub underflow: bool,
}

/// K₀(x) or K₁(x) for x > 0.
pub fn bessel_k(order: BesselOrder, x: f64) -> Result<BesselValue> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain { what: "bessel_k", value: x });
    }
    if x > BESSEL_K_UNDERFLOW {
        return Ok(BesselValue { value: 0.0, underflow: true });
    }
    let (k0, k1) = k0_k1(x);
    let value = match order {
        BesselOrder::Zero => k0,
        BesselOrder::One => k1,
    };
    Ok(BesselValue { value, underflow: false })
}

/// Both K₀(x) and K₁(x); caller guarantees 0 < x ≤ 700.
pub fn k0_k1(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_SWITCH {
        k_series(x)
    } else {
        k_steed(x)
    }
}

fn k_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;

    // term_k = t^k / (k!)^2 and t^k / (k! (k+1)!)
    let mut a = 1.0;
    let mut b = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 0.0;
    let mut s0 = 0.0;
    let mut i1 = 0.0;
    let mut s1 = 0.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let h_next = harmonic + 1.0 / (kf + 1.0);
        i0 += a;
        s0 += harmonic * a;
        i1 += b;
        s1 += (harmonic + h_next) * b;
        if a < 1e-18 * i0 && b < 1e-18 * i1 {
            break;
        }
        a *= t / ((kf + 1.0) * (kf + 1.0));
        b *= t / ((kf + 1.0) * (kf + 2.0));
        harmonic = h_next;
    }
    let i1 = 0.5 * x * i1;
    let k0 = -log_term * i0 + s0;
    let k1 = 1.0 / x + log_term * i1 - 0.25 * x * s1;
    (k0, k1)
}

// Steed's method on the second continued fraction (Temme/Thompson–Barnett).
fn k_steed(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Modified Struve function L₋₁(x) or L₀(x) for x > 0.
pub fn struve_l(order: StruveOrder, x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain { what: "struve_l", value: x });
    }
    Ok(match order {
        StruveOrder::MinusOne => struve_series(x, -1.0),
        StruveOrder::Zero => struve_series(x, 0.0),
    })
}

/// L₋₁(x) and L₀(x) by direct summation; valid for x ≥ 0.
pub fn struve_lm1_l0(x: f64) -> (f64, f64) {
    (struve_series(x, -1.0), struve_series(x, 0.0))
}

// L_ν(x) = Σ_m (x/2)^{2m+ν+1} / [Γ(m+3/2) Γ(m+ν+3/2)], ν ∈ {-1, 0}.
fn struve_series(x: f64, nu: f64) -> f64 {
    let half = 0.5 * x;
    let h2 = half * half;
    let sqrt_pi = PI.sqrt();
    // Γ(3/2) = √π/2, Γ(1/2) = √π.
    let mut term = if nu == 0.0 { half / (0.25 * PI) } else { 1.0 / (0.5 * sqrt_pi * sqrt_pi) };
    let mut sum = 0.0;
    for m in 0..MAX_TERMS {
        sum += term;
        let mf = m as f64;
        let ratio = h2 / ((mf + 1.5) * (mf + nu + 1.5));
        term *= ratio;
        if term < 1e-17 * sum && ratio < 0.5 {
            break;
        }
    }
    sum
}

/// ∫₀^a K₀(q|s|) ds expressed through K and L (odd in a):
/// (π a / 2) [K₀(q|a|) L₋₁(q|a|) + K₁(q|a|) L₀(q|a|)].
pub fn k0_cell_antiderivative(q: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let x = q * a.abs();
    if x > BESSEL_K_UNDERFLOW {
        // The bracket tends to 1/x; the integral saturates at π/(2q).
        return a.signum() * 0.5 * PI / q;
    }
    let (k0, k1) = k0_k1(x);
    let (lm1, l0) = struve_lm1_l0(x);
    0.5 * PI * a * (k0 * lm1 + k1 * l0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // K_ν(x) = ∫₀^∞ e^{-x cosh t} cosh(νt) dt by the trapezoidal rule, which
    // converges geometrically for this doubly-exponentially decaying integrand.
    fn k_quadrature(nu: f64, x: f64) -> f64 {
        let h: f64 = 1.0 / 64.0;
        let mut sum = 0.5 * (-x).exp();
        let mut t = h;
        loop {
            let v = (-x * t.cosh()).exp() * (nu * t).cosh();
            sum += v;
            if v < 1e-300 || (x * t.cosh() > 745.0) {
                break;
            }
            t += h;
        }
        sum * h
    }

    fn i0_series(x: f64) -> f64 {
        let t = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..400 {
            sum += term;
            term *= t / ((k as f64 + 1.0).powi(2));
        }
        sum
    }

    #[test]
    fn k0_at_one_matches_integral_representation() {
        let reference = k_quadrature(0.0, 1.0);
        let v = bessel_k(BesselOrder::Zero, 1.0).unwrap().value;
        assert!((reference - 0.421_024_438_240_708_3).abs() < 1e-14);
        assert!(((v - reference) / reference).abs() < 1e-12, "{v} vs {reference}");
    }

    #[test]
    fn k_matches_quadrature_over_log_grid() {
        for i in 0..=60 {
            let x = 10f64.powf(-3.0 + 5.5 * i as f64 / 60.0);
            if x > 200.0 {
                continue;
            }
            for (order, nu) in [(BesselOrder::Zero, 0.0), (BesselOrder::One, 1.0)] {
                let want = k_quadrature(nu, x);
                let got = bessel_k(order, x).unwrap().value;
                assert!(((got - want) / want).abs() < 1e-10, "nu={nu} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn k0_small_argument_log_asymptote() {
        let x = 1e-6;
        let asym = -(x / 2.0f64).ln() - EULER_GAMMA;
        let v = bessel_k(BesselOrder::Zero, x).unwrap().value;
        assert!(((v - asym) / asym).abs() < 1e-6);
        let tiny = bessel_k(BesselOrder::Zero, 1e-8).unwrap().value;
        let asym = -(0.5e-8f64).ln() - EULER_GAMMA;
        assert!(((tiny - asym) / asym).abs() < 1e-10);
    }

    #[test]
    fn k1_large_argument_asymptote() {
        let x = 10.0;
        let lead = (PI / (2.0 * x)).sqrt() * (-x).exp();
        let v = bessel_k(BesselOrder::One, x).unwrap().value;
        // The two-term truncation is off by 1.04e-3 at x = 10; the next term
        // brings it to 1e-4.
        let two = lead * (1.0 + 3.0 / (8.0 * x));
        assert!(((v - two) / two).abs() < 1.1e-3);
        let three = lead * (1.0 + 3.0 / (8.0 * x) - 15.0 / (128.0 * x * x));
        assert!(((v - three) / three).abs() < 2e-4);
    }

    #[test]
    fn k_continuous_across_series_switch() {
        let below = k_series(2.0);
        let above = k_steed(2.0);
        assert!(((below.0 - above.0) / above.0).abs() < 1e-13);
        assert!(((below.1 - above.1) / above.1).abs() < 1e-13);
    }

    #[test]
    fn k_positive_and_decreasing() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 0..100 {
            let x = 10f64.powf(-8.0 + 10.8 * i as f64 / 99.0);
            let (k0, k1) = k0_k1(x);
            assert!(k0 > 0.0 && k1 > 0.0);
            assert!(k0 < prev.0 && k1 < prev.1, "not decreasing at x={x}");
            prev = (k0, k1);
        }
    }

    #[test]
    fn k_domain_and_underflow() {
        assert!(bessel_k(BesselOrder::Zero, 0.0).is_err());
        assert!(bessel_k(BesselOrder::One, -1.0).is_err());
        let v = bessel_k(BesselOrder::One, 701.0).unwrap();
        assert!(v.underflow && v.value == 0.0);
        assert!(!bessel_k(BesselOrder::One, 699.0).unwrap().underflow);
    }

    // Independent summation of the defining series with explicit Γ values.
    fn struve_reference(nu: f64, x: f64, terms: usize) -> f64 {
        fn gamma_half_integer(n2: i64) -> f64 {
            // Γ(n2/2) for odd positive n2
            let mut g = PI.sqrt();
            let mut k = 1;
            while k < n2 {
                g *= k as f64 / 2.0;
                k += 2;
            }
            g
        }
        (0..terms)
            .map(|m| {
                let m = m as i64;
                let p = 2 * m as i32 + nu as i32 + 1;
                (x / 2.0).powi(p) / (gamma_half_integer(2 * m + 3) * gamma_half_integer(2 * m + 2 * nu as i64 + 3))
            })
            .sum()
    }

    #[test]
    fn l0_at_one_matches_series_oracle() {
        let want = struve_reference(0.0, 1.0, 20);
        let got = struve_l(StruveOrder::Zero, 1.0).unwrap();
        assert!(((got - want) / want).abs() < 1e-13, "{got} vs {want}");
        // Tabulated L₀(1) = 0.710243185937...
        assert!((got - 0.710_243_185_937_8).abs() < 1e-11);
    }

    #[test]
    fn lm1_small_argument_leading_terms() {
        let x = 1e-3;
        let three_terms = struve_reference(-1.0, x, 3);
        let got = struve_l(StruveOrder::MinusOne, x).unwrap();
        assert!(((got - three_terms) / three_terms).abs() < 1e-9);
        assert!((got - 2.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn l0_below_i0() {
        let x = 5.0;
        let l0 = struve_l(StruveOrder::Zero, x).unwrap();
        assert!(l0 < i0_series(x));
        assert!((i0_series(x) - l0) < 1.0);
    }

    #[test]
    fn struve_matches_reference_up_to_fifty() {
        for &x in &[0.01, 0.3, 1.0, 4.0, 8.0] {
            for nu in [-1.0, 0.0] {
                let want = struve_reference(nu, x, 80);
                let got = struve_series(x, nu);
                assert!(((got - want) / want).abs() < 1e-12, "nu={nu} x={x}: {got} vs {want}");
            }
        }
        // 30-digit values from an arbitrary-precision library.
        let frozen = [
            (12.0, 18_141.353_308_258_450_085, 18_948.871_899_874_867_772),
            (30.0, 768_532_038_938.957_709_25, 781_672_297_823.956_245_24),
            (50.0, 2.903_078_590_103_556_796_75e20, 2.932_553_783_849_336_326_65e20),
        ];
        for (x, lm1, l0) in frozen {
            let (got_m1, got_0) = struve_lm1_l0(x);
            assert!(((got_m1 - lm1) / lm1).abs() < 1e-9, "x={x}: {got_m1}");
            assert!(((got_0 - l0) / l0).abs() < 1e-9, "x={x}: {got_0}");
        }
        assert!(struve_l(StruveOrder::Zero, 0.0).is_err());
    }

    #[test]
    fn cell_antiderivative_matches_quadrature() {
        // ∫₀^a K₀(q s) ds by composite Gauss–Legendre after a log substitution.
        let q = 1.3;
        let a = 0.37;
        let n = 20_000;
        let mut acc = 0.0;
        // s = a e^{-u}, ds = a e^{-u} du, u ∈ [0, 40]
        let umax = 40.0;
        let du = umax / n as f64;
        for i in 0..n {
            let u = (i as f64 + 0.5) * du;
            let s = a * (-u).exp();
            acc += k0_k1(q * s).0 * s * du;
        }
        let got = k0_cell_antiderivative(q, a);
        assert!(((got - acc) / acc).abs() < 1e-7, "{got} vs {acc}");
        assert_eq!(k0_cell_antiderivative(q, -a), -got);
    }
}
