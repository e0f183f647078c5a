//! Case II: tau_1 >> tau_2 ~ 0. The second flow's delay is regularized to
//! tau_2 = eps tau_1 and the determinant reduces to
//! lam^2 + a lam + b lam E + c E + d with E = e^(-lam tau_1).

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

use super::{multi_coefficients, multi_equilibrium, CoeffVariant, MultiCoefficients, MultiEquilibrium, MultiTopology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl QuadCoefficients {
    /// Expansion of det [[lam + M1 + N1 E, P1], [P2 E, lam + M2 + N2]].
    pub fn from_multi(mc: &MultiCoefficients) -> Self {
        let x = mc.m2 + mc.n2;
        QuadCoefficients { a: mc.m1 + x, b: mc.n1, c: mc.n1 * x - mc.p1 * mc.p2, d: mc.m1 * x }
    }

    /// The mapping as printed, which does not match the determinant.
    pub fn from_multi_as_printed(mc: &MultiCoefficients) -> Self {
        let x = mc.m2 + mc.n2;
        QuadCoefficients { a: mc.m1 + x, b: mc.n2, c: mc.m1 * x, d: mc.n1 * x - mc.p1 * mc.p2 }
    }

    /// Coefficients of the kappa-scaled system (kappa a, kappa b, kappa^2 c, kappa^2 d).
    pub fn scaled(&self, kappa: f64) -> Self {
        let k2 = kappa * kappa;
        QuadCoefficients { a: kappa * self.a, b: kappa * self.b, c: k2 * self.c, d: k2 * self.d }
    }

    /// 2d - a^2 + b^2: the sum of the two omega^2 roots.
    pub fn omega_sq_sum(&self) -> f64 {
        2.0 * self.d - self.a * self.a + self.b * self.b
    }

    /// d^2 - c^2: the product of the two omega^2 roots.
    pub fn omega_sq_product(&self) -> f64 {
        (self.d - self.c) * (self.d + self.c)
    }

    /// (cos, sin) of omega tau_1 at a root lam = i omega.
    pub fn crossing_phase(&self, omega: f64) -> (f64, f64) {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let w2 = omega * omega;
        let den = b * b * w2 + c * c;
        ((w2 * (c - a * b) - c * d) / den, omega * (b * (w2 - d) + a * c) / den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case2Reduction {
    pub epsilon: f64,
    pub tau1: f64,
    pub equilibrium: MultiEquilibrium,
    pub multi: MultiCoefficients,
    pub coefficients: QuadCoefficients,
    pub coefficients_as_printed: QuadCoefficients,
    /// Largest relative change of (a, b, c, d) when eps is halved.
    pub eps_sensitivity: f64,
}

fn reduce_at(top: &MultiTopology, variant: CoeffVariant, tau2: f64) -> Result<(MultiEquilibrium, MultiCoefficients)> {
    let mut t = top.clone();
    t.tau2 = tau2;
    let eq = multi_equilibrium(&t, variant)?;
    let mc = multi_coefficients(&t, &eq)?;
    Ok((eq, mc))
}

pub fn case2_reduce(top: &MultiTopology, variant: CoeffVariant, eps_fraction: f64) -> Result<Case2Reduction> {
    if !(eps_fraction > 0.0 && eps_fraction < 1.0) {
        return Err(Error::parameter("eps_fraction", format!("must lie in (0, 1), got {eps_fraction}")));
    }
    let eps = eps_fraction * top.tau1;
    let (eq, mc) = reduce_at(top, variant, eps)?;
    let (_, mc_half) = reduce_at(top, variant, 0.5 * eps)?;
    let q = QuadCoefficients::from_multi(&mc);
    let qh = QuadCoefficients::from_multi(&mc_half);
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    let eps_sensitivity = rel(q.a, qh.a).max(rel(q.b, qh.b)).max(rel(q.c, qh.c)).max(rel(q.d, qh.d));
    Ok(Case2Reduction {
        epsilon: eps,
        tau1: top.tau1,
        equilibrium: eq,
        multi: mc,
        coefficients: q,
        coefficients_as_printed: QuadCoefficients::from_multi_as_printed(&mc),
        eps_sensitivity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case2Class {
    /// Exactly one positive omega^2: a single destabilizing crossing.
    Condition1,
    /// Two positive omega^2: crossings in both directions are possible.
    Condition2,
    /// No positive omega^2: stable for every tau_1.
    StableAllTau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub omega: f64,
    pub tau1: f64,
    /// Roots move into the right half-plane as tau_1 increases.
    pub destabilizing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case2Verdict {
    Stable,
    Unstable,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case2Report {
    pub coefficients: QuadCoefficients,
    pub omega_sq: Vec<f64>,
    pub classification: Case2Class,
    pub crossings: Vec<Crossing>,
    pub tau1c: Option<f64>,
    /// Printed Condition 1, and Condition 2 read with the squared sum.
    pub condition1_as_printed: bool,
    pub condition2_squared: bool,
    /// Printed Condition 2 taken literally (sum compared unsquared).
    pub condition2_literal: bool,
}

impl Case2Report {
    pub fn verdict(&self, tau1: f64) -> Case2Verdict {
        match (self.classification, self.tau1c) {
            (Case2Class::StableAllTau, _) => Case2Verdict::Stable,
            (_, Some(tc)) if tau1 < tc => Case2Verdict::Stable,
            (Case2Class::Condition1, _) => Case2Verdict::Unstable,
            _ => Case2Verdict::Undetermined,
        }
    }
}

const CONDITION2_BRANCHES: usize = 4;

pub fn case2_analyze(q: &QuadCoefficients) -> Result<Case2Report> {
    for (name, v) in [("a", q.a), ("b", q.b), ("c", q.c), ("d", q.d)] {
        if !v.is_finite() {
            return Err(Error::parameter(name, "must be finite"));
        }
    }
    if !(q.a + q.b > 0.0 && q.c + q.d > 0.0) {
        return Err(Error::Domain(format!(
            "unstable at zero delay: need a + b > 0 and c + d > 0 (a + b = {}, c + d = {})",
            q.a + q.b,
            q.c + q.d
        )));
    }
    if q.b == 0.0 && q.c == 0.0 {
        return Err(Error::parameter("b", "b and c cannot both vanish"));
    }
    let sum = q.omega_sq_sum();
    let prod = q.omega_sq_product();
    let disc = sum * sum - 4.0 * prod;
    let mut omega_sq: Vec<f64> = Vec::new();
    if disc >= 0.0 {
        let r = disc.sqrt();
        // Larger root first; the smaller root via the product avoids cancellation.
        let big = 0.5 * (sum + sum.signum() * r);
        let (hi, lo) = if big != 0.0 { (big.max(prod / big), big.min(prod / big)) } else { (0.0, 0.0) };
        for x in [hi, lo] {
            if x > 0.0 && !omega_sq.iter().any(|&y| (y - x).abs() <= 1e-14 * y) {
                omega_sq.push(x);
            }
        }
    }
    let classification = match omega_sq.len() {
        0 => Case2Class::StableAllTau,
        1 => Case2Class::Condition1,
        _ => Case2Class::Condition2,
    };
    let branches = if classification == Case2Class::Condition2 { CONDITION2_BRANCHES } else { 1 };
    let mut crossings = Vec::new();
    for &x in &omega_sq {
        let omega = x.sqrt();
        let (cos, sin) = q.crossing_phase(omega);
        let theta = sin.atan2(cos).rem_euclid(TAU);
        let destabilizing = 2.0 * x - sum > 0.0;
        for n in 0..branches {
            crossings.push(Crossing { omega, tau1: (theta + TAU * n as f64) / omega, destabilizing });
        }
    }
    crossings.sort_by(|x, y| x.tau1.total_cmp(&y.tau1));
    let tau1c = crossings.iter().find(|c| c.destabilizing).map(|c| c.tau1);
    Ok(Case2Report {
        coefficients: *q,
        omega_sq,
        classification,
        crossings,
        tau1c,
        condition1_as_printed: (sum > 0.0 && sum * sum == 4.0 * prod) || prod < 0.0,
        condition2_squared: sum > 0.0 && sum * sum > 4.0 * prod && prod > 0.0,
        condition2_literal: sum > 0.0 && sum > 4.0 * prod && prod > 0.0,
    })
}

/// Third term of (d lam / d kappa)^(-1) = kappa/lam + kappa tau_1 + term3,
/// valid at roots of the kappa-scaled quasi-polynomial.
pub fn term3(q: &QuadCoefficients, lam: Complex64, kappa: f64, tau1: f64) -> Complex64 {
    let (a, b, c, d) = (q.a, q.b, q.c, q.d);
    let k = kappa;
    let l2 = lam * lam;
    let num = (l2 * (a * b * tau1) - l2 * (c * tau1) + lam * (2.0 * k * b * d * tau1) + k * k * c * d * tau1) * (k * k);
    let den = lam * (l2 * b + k * k * a * c + lam * (2.0 * k * c) - k * k * b * d);
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case2Transversality {
    /// Re(term3) at lam = i omega.
    pub term3_real: f64,
    pub term3_real_as_printed: f64,
    /// abc - c^2 - b^2 d; fixes the sign of `term3_real` when d > 0.
    pub sign_factor: f64,
    /// abc - c^2 - b d^2 as printed.
    pub sign_factor_as_printed: f64,
    /// Re((d lam / d kappa)^(-1)) = kappa tau_1 + Re(term3).
    pub inverse_real: f64,
    pub d_nonpositive: bool,
}

pub fn transversality_case2(q: &QuadCoefficients, omega: f64, kappa: f64, tau1: f64) -> Case2Transversality {
    let (a, b, c, d) = (q.a, q.b, q.c, q.d);
    let (w, k) = (omega, kappa);
    let (w2, k2) = (w * w, k * k);
    let sign_factor = a * b * c - c * c - b * b * d;
    let sign_factor_as_printed = a * b * c - c * c - b * d * d;
    let inner = k2 * a * c - w2 * b - k2 * b * d;
    let term3_real = 2.0 * k * k2 * w2 * tau1 * sign_factor * (w2 + k2 * d)
        / (4.0 * k2 * w2 * w2 * c * c + w2 * inner * inner);
    let printed_inner = k2 * w * a * c - w2 * w * b - k2 * w * b * d;
    let term3_real_as_printed = 2.0 * w2 * k * k2 * tau1 * sign_factor_as_printed * (w2 + k2 * d)
        / (4.0 * w2 * w2 * k2 * c + printed_inner * printed_inner);
    Case2Transversality {
        term3_real,
        term3_real_as_printed,
        sign_factor,
        sign_factor_as_printed,
        inverse_real: k * tau1 + term3_real,
        d_nonpositive: d <= 0.0,
    }
}

/// abc - c^2 - b^2 d written as P1 P2 (N1 N2 - P1 P2) + N1 P1 P2 (M2 - M1).
pub fn sign_factor_decomposition(mc: &MultiCoefficients) -> (f64, f64) {
    let pp = mc.p1 * mc.p2;
    (pp * (mc.n1 * mc.n2 - pp), mc.n1 * pp * (mc.m2 - mc.m1))
}

/// The printed decomposition P1 P2 (N1 N2 - P1 P2) + N1 P1 P2 (N2 - M1).
pub fn decomposition_as_printed(mc: &MultiCoefficients) -> f64 {
    let pp = mc.p1 * mc.p2;
    pp * (mc.n1 * mc.n2 - pp) + mc.n1 * pp * (mc.n2 - mc.m1)
}
