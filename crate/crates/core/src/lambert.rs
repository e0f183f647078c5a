//! Principal branch W0 of the Lambert W function, w e^w = z.
//!
//! Halley iteration from one of three seeds: the branch-point series near
//! z = -1/e, the identity near 0, and the asymptotic log expansion far out.
//! Real arguments z >= -1/e take a purely real path so the result has an
//! exactly zero imaginary part.

use num_complex::Complex64;
use std::f64::consts::{E, PI};

const MAX_ITER: usize = 64;

/// W0 on the real interval [-1/e, inf). `None` below the branch point.
pub fn lambert_w0_real(x: f64) -> Option<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch {
        return None;
    }
    if x == 0.0 {
        return Some(0.0);
    }
    if x == f64::INFINITY {
        return Some(f64::INFINITY);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        (1.0 + x).ln()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    if w == -1.0 {
        return Some(w);
    }
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let w1 = w + 1.0;
        if w1 == 0.0 {
            break;
        }
        let step = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1));
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            break;
        }
    }
    Some(w)
}

/// True when `w` lies in the range of the principal branch. The boundary
/// u = -v cot v is the image of the cut and counts as inside.
pub fn in_principal_range(w: Complex64) -> bool {
    let (u, v) = (w.re, w.im);
    if v == 0.0 {
        return u >= -1.0;
    }
    if v.abs() >= PI {
        return false;
    }
    u >= -v / v.tan() - 1e-9 * (1.0 + w.norm())
}

/// W0(z) for complex z. On the cut z < -1/e the value continuous from
/// above (Im W > 0) is returned.
pub fn lambert_w0(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        if let Some(w) = lambert_w0_real(z.re) {
            return Complex64::new(w, 0.0);
        }
        // On the cut: the value continuous from above.
        let w = complex_w0(Complex64::new(z.re, 0.0));
        return if w.im < 0.0 { w.conj() } else { w };
    }
    complex_w0(z)
}

fn complex_w0(z: Complex64) -> Complex64 {
    let seeds = [branch_seed(z), asymptotic_seed(z), z];
    let mut best: Option<(f64, Complex64)> = None;
    for seed in seeds {
        if !(seed.re.is_finite() && seed.im.is_finite()) {
            continue;
        }
        let w = halley(z, seed);
        if !in_principal_range(w) {
            continue;
        }
        let res = ((w * w.exp() - z).norm()) / z.norm().max(1e-300);
        if res <= 1e-12 {
            return w;
        }
        if best.map_or(true, |(r, _)| res < r) {
            best = Some((res, w));
        }
    }
    match best {
        Some((res, w)) if res <= 1e-9 => w,
        _ => Complex64::new(f64::NAN, f64::NAN),
    }
}

fn branch_seed(z: Complex64) -> Complex64 {
    let p = (2.0 * (E * z + 1.0)).sqrt();
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

fn asymptotic_seed(z: Complex64) -> Complex64 {
    let l1 = z.ln();
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

fn halley(z: Complex64, mut w: Complex64) -> Complex64 {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let w1 = w + 1.0;
        let step = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1));
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        w -= step;
        if step.norm() <= 4.0 * f64::EPSILON * w.norm().max(1.0) {
            break;
        }
    }
    w
}

/// W0 given log z instead of z, for |z| too large to represent.
/// Solves w + ln w = log_z by Newton; valid once |log_z| is well above 1.
pub fn lambert_w0_from_log(log_z: Complex64) -> Complex64 {
    let mut w = log_z - log_z.ln();
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - log_z;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.norm() <= 4.0 * f64::EPSILON * w.norm() {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn known_values() {
        let omega = 0.567_143_290_409_783_8;
        assert!((lambert_w0_real(1.0).unwrap() - omega).abs() < 1e-15);
        assert!((lambert_w0_real(E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lambert_w0_real(-1.0 / E), Some(-1.0));
        let w = lambert_w0(c(-PI / 2.0, 0.0));
        assert!((w - c(0.0, PI / 2.0)).norm() < 1e-14, "{w}");
        assert!(lambert_w0_real(-0.5).is_none());
    }

    #[test]
    fn real_argument_gives_zero_imaginary_part() {
        for x in [-0.36, -0.1, 0.0, 0.3, 2.0, 1e5] {
            assert_eq!(lambert_w0(c(x, 0.0)).im, 0.0);
        }
    }

    #[test]
    fn log_form_agrees_with_direct() {
        for z in [c(-1e6, 0.0), c(3e4, 2e5), c(-50.0, -7.0)] {
            let direct = lambert_w0(z);
            let via_log = lambert_w0_from_log(z.ln());
            assert!((direct - via_log).norm() < 1e-12 * direct.norm(), "{z}: {direct} vs {via_log}");
        }
    }
}
