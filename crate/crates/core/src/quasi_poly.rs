//! Roots of real quasi-polynomials F(lam) with exponential terms e^(-lam tau).
//!
//! Newton iterations are seeded on a rectangle Re in [-5s, s], Im in [0, 10s]
//! where s is the problem's rate scale. Seeds are spaced finer than the
//! asymptotic root spacing 2 pi / tau along the imaginary axis. Coefficients
//! are real, so roots come in conjugate pairs and only Im >= 0 is searched.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::{self, Execution};

pub trait QuasiPolynomial: Sync {
    /// F(lam) and F'(lam).
    fn eval(&self, lam: Complex64) -> (Complex64, Complex64);
    /// Rate scale sizing the seed rectangle (1/s).
    fn scale(&self) -> f64;
    /// Largest delay in the exponentials.
    fn delay(&self) -> f64;
    /// Polynomial degree in lam; normalizes the residual check.
    fn degree(&self) -> i32;
}

#[derive(Debug, Clone, Copy)]
pub struct GridOptions {
    pub re_cells: usize,
    /// Seeds per asymptotic root spacing along Im.
    pub im_oversample: f64,
    pub max_seeds: usize,
    pub max_iter: usize,
    pub exec: Execution,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { re_cells: 16, im_oversample: 2.5, max_seeds: 400_000, max_iter: 80, exec: Execution::available() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub lambda: Complex64,
    pub residual: f64,
}

/// Residual tolerance |F| <= 1e-10 max(1, s)^degree.
pub fn residual_tolerance<F: QuasiPolynomial + ?Sized>(f: &F) -> f64 {
    1e-10 * f.scale().max(1.0).powi(f.degree())
}

pub fn newton<F: QuasiPolynomial + ?Sized>(f: &F, seed: Complex64, max_iter: usize) -> Option<Root> {
    let s = f.scale().max(f64::MIN_POSITIVE);
    let mut lam = seed;
    for _ in 0..max_iter {
        let (v, dv) = f.eval(lam);
        if !(v.re.is_finite() && v.im.is_finite() && dv.norm() > 0.0) {
            return None;
        }
        let mut step = v / dv;
        let len = step.norm();
        if !len.is_finite() {
            return None;
        }
        if len > s {
            step *= s / len;
        }
        lam -= step;
        if len <= 1e-14 * lam.norm().max(s) {
            let residual = f.eval(lam).0.norm();
            return residual.is_finite().then_some(Root { lambda: lam, residual });
        }
    }
    None
}

/// Distinct roots reached from the seed grid, rightmost first.
pub fn grid_roots<F: QuasiPolynomial + ?Sized>(f: &F, opts: &GridOptions) -> Vec<Root> {
    let s = f.scale();
    if !(s.is_finite() && s > 0.0) {
        return Vec::new();
    }
    let tau = f.delay();
    // Keep e^(-lam tau) representable at the left edge.
    let re_lo = (-5.0 * s).max(if tau > 0.0 { -600.0 / tau } else { f64::NEG_INFINITY });
    let re_hi = s;
    let im_hi = 10.0 * s;
    let spacing = if tau > 0.0 { 2.0 * std::f64::consts::PI / tau } else { im_hi };
    let mut im_cells = ((im_hi / spacing) * opts.im_oversample).ceil().max(40.0) as usize;
    let re_cells = opts.re_cells.max(2);
    im_cells = im_cells.min((opts.max_seeds / re_cells).max(1));
    let seeds: Vec<Complex64> = (0..re_cells)
        .flat_map(|i| {
            let x = re_lo + (re_hi - re_lo) * (i as f64 + 0.5) / re_cells as f64;
            (0..=im_cells).map(move |j| Complex64::new(x, im_hi * j as f64 / im_cells as f64))
        })
        .collect();
    let tol = residual_tolerance(f);
    let found = par::map(opts.exec, &seeds, |&z| newton(f, z, opts.max_iter));
    let mut roots: Vec<Root> = found
        .into_iter()
        .flatten()
        .filter(|r| r.residual <= tol)
        .map(|r| Root { lambda: Complex64::new(r.lambda.re, r.lambda.im.abs()), ..r })
        .collect();
    roots.sort_by(|x, y| y.lambda.re.total_cmp(&x.lambda.re).then(x.lambda.im.total_cmp(&y.lambda.im)));
    let merge = 1e-7 * s.max(1.0);
    let mut distinct: Vec<Root> = Vec::new();
    for r in roots {
        if !distinct.iter().any(|d| (d.lambda - r.lambda).norm() <= merge) {
            distinct.push(r);
        }
    }
    distinct
}

pub fn grid_rightmost<F: QuasiPolynomial + ?Sized>(f: &F, opts: &GridOptions) -> Result<Root> {
    grid_roots(f, opts)
        .into_iter()
        .next()
        .ok_or(Error::NoConvergence { what: "grid-seeded Newton", iterations: opts.max_iter })
}

/// lam + a + b e^(-lam tau).
#[derive(Debug, Clone, Copy)]
pub struct ScalarQuasi {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
}

impl QuasiPolynomial for ScalarQuasi {
    fn eval(&self, lam: Complex64) -> (Complex64, Complex64) {
        let e = (-lam * self.tau).exp();
        (lam + self.a + self.b * e, 1.0 - self.b * self.tau * e)
    }
    fn scale(&self) -> f64 {
        self.a.abs().max(self.b.abs())
    }
    fn delay(&self) -> f64 {
        self.tau
    }
    fn degree(&self) -> i32 {
        1
    }
}

/// (lam + a + b E)^2 - c^2 E^2 with E = e^(-lam tau): the symmetric two-flow system.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricPairQuasi {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub tau: f64,
}

impl QuasiPolynomial for SymmetricPairQuasi {
    fn eval(&self, lam: Complex64) -> (Complex64, Complex64) {
        let e = (-lam * self.tau).exp();
        let u = lam + self.a + self.b * e;
        let du = 1.0 - self.b * self.tau * e;
        let ce = self.c * e;
        (u * u - ce * ce, 2.0 * u * du + 2.0 * self.tau * ce * ce)
    }
    fn scale(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
    fn delay(&self) -> f64 {
        self.tau
    }
    fn degree(&self) -> i32 {
        2
    }
}

/// lam^2 + a lam + b lam E + c E + d with E = e^(-lam tau).
#[derive(Debug, Clone, Copy)]
pub struct QuadQuasi {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub tau: f64,
}

impl QuasiPolynomial for QuadQuasi {
    fn eval(&self, lam: Complex64) -> (Complex64, Complex64) {
        let e = (-lam * self.tau).exp();
        let v = lam * lam + self.a * lam + (self.b * lam + self.c) * e + self.d;
        let dv = 2.0 * lam + self.a + self.b * e - self.tau * (self.b * lam + self.c) * e;
        (v, dv)
    }
    fn scale(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs().sqrt()).max(self.d.abs().sqrt())
    }
    fn delay(&self) -> f64 {
        self.tau
    }
    fn degree(&self) -> i32 {
        2
    }
}
