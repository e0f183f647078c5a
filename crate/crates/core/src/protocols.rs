//! Increase/decrease gain laws i(w), d(w) and their derivatives.
//!
//! A protocol is `w <- w + i(w)` per ack and `w <- w - d(w)` per loss event.
//! Compound: i = alpha w^(k-1), d = beta w. Reno: i = 1/w, d = w/2.
//! HSTCP: i = f1(w)/w, d = f2(w) w with f1, f2 log-linear in log w.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gains {
    pub i: f64,
    pub di: f64,
    pub d: f64,
    pub dd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compound {
    alpha: f64,
    beta: f64,
    k: f64,
}

impl Compound {
    pub const DEFAULT_ALPHA: f64 = 0.125;
    pub const DEFAULT_BETA: f64 = 0.5;
    pub const DEFAULT_K: f64 = 0.75;

    pub fn new(alpha: f64, beta: f64, k: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("beta", beta)?;
        if !(beta < 1.0) {
            return Err(Error::parameter("beta", format!("must be < 1, got {beta}")));
        }
        if !(k.is_finite() && k > 0.0 && k < 2.0) {
            return Err(Error::parameter("k", format!("must lie in (0, 2), got {k}")));
        }
        Ok(Compound { alpha, beta, k })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Compound::new(alpha, self.beta, self.k)
    }
}

impl Default for Compound {
    fn default() -> Self {
        Compound { alpha: Self::DEFAULT_ALPHA, beta: Self::DEFAULT_BETA, k: Self::DEFAULT_K }
    }
}

/// Piecewise log-linear function through breakpoints `(w_j, f_j)`.
///
/// No extrapolation: evaluation outside `[w_0, w_n]` is a domain error.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearTable {
    points: Vec<[f64; 2]>,
}

impl LogLinearTable {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::checked("table", points, f64::INFINITY)
    }

    fn checked(field: &'static str, points: Vec<[f64; 2]>, upper: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::parameter(field, "needs at least two breakpoints"));
        }
        for (j, p) in points.iter().enumerate() {
            if !(p[0].is_finite() && p[0] > 0.0) {
                return Err(Error::parameter(field, format!("breakpoint {j}: w must be > 0")));
            }
            if !(p[1].is_finite() && p[1] > 0.0 && p[1] < upper) {
                return Err(Error::parameter(
                    field,
                    format!("breakpoint {j}: value {} outside (0, {upper})", p[1]),
                ));
            }
            if j > 0 && !(p[0] > points[j - 1][0]) {
                return Err(Error::parameter(field, "breakpoints must be strictly increasing in w"));
            }
        }
        Ok(LogLinearTable { points })
    }

    pub fn constant(value: f64, w_lo: f64, w_hi: f64) -> Result<Self> {
        Self::new(vec![[w_lo, value], [w_hi, value]])
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.points[0][0], self.points[self.points.len() - 1][0])
    }

    /// Value and derivative; right-hand derivative at interior breakpoints.
    pub fn eval(&self, w: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain();
        if !(w >= lo && w <= hi) {
            return Err(Error::Domain(format!("w = {w} outside table domain [{lo}, {hi}]")));
        }
        // Segment whose left end is the largest breakpoint <= w; the final
        // breakpoint borrows the last segment.
        let last = self.points.len() - 2;
        let seg = self.points.partition_point(|p| p[0] <= w).saturating_sub(1).min(last);
        let [w0, f0] = self.points[seg];
        let [w1, f1] = self.points[seg + 1];
        let slope = (f1.ln() - f0.ln()) / (w1.ln() - w0.ln());
        let f = if slope == 0.0 { f0 } else { f0 * (w / w0).powf(slope) };
        Ok((f, slope * f / w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hstcp {
    f1: LogLinearTable,
    f2: LogLinearTable,
}

impl Hstcp {
    pub fn new(f1: Vec<[f64; 2]>, f2: Vec<[f64; 2]>) -> Result<Self> {
        Ok(Hstcp {
            f1: LogLinearTable::checked("f1", f1, f64::INFINITY)?,
            f2: LogLinearTable::checked("f2", f2, 1.0)?,
        })
    }

    pub fn f1(&self) -> &LogLinearTable {
        &self.f1
    }
    pub fn f2(&self) -> &LogLinearTable {
        &self.f2
    }

    /// Intersection of the two table domains.
    pub fn domain(&self) -> (f64, f64) {
        let (a0, a1) = self.f1.domain();
        let (b0, b1) = self.f2.domain();
        (a0.max(b0), a1.min(b1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProtocolRaw", into = "ProtocolRaw")]
pub enum ProtocolSpec {
    Compound(Compound),
    Reno,
    Hstcp(Hstcp),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ProtocolRaw {
    Compound { alpha: f64, beta: f64, k: f64 },
    Reno {},
    Hstcp { f1: Vec<[f64; 2]>, f2: Vec<[f64; 2]> },
}

impl TryFrom<ProtocolRaw> for ProtocolSpec {
    type Error = Error;
    fn try_from(raw: ProtocolRaw) -> Result<Self> {
        Ok(match raw {
            ProtocolRaw::Compound { alpha, beta, k } => {
                ProtocolSpec::Compound(Compound::new(alpha, beta, k)?)
            }
            ProtocolRaw::Reno {} => ProtocolSpec::Reno,
            ProtocolRaw::Hstcp { f1, f2 } => ProtocolSpec::Hstcp(Hstcp::new(f1, f2)?),
        })
    }
}

impl From<ProtocolSpec> for ProtocolRaw {
    fn from(spec: ProtocolSpec) -> Self {
        match spec {
            ProtocolSpec::Compound(c) => ProtocolRaw::Compound { alpha: c.alpha, beta: c.beta, k: c.k },
            ProtocolSpec::Reno => ProtocolRaw::Reno {},
            ProtocolSpec::Hstcp(h) => ProtocolRaw::Hstcp { f1: h.f1.points, f2: h.f2.points },
        }
    }
}

impl ProtocolSpec {
    pub fn compound_default() -> Self {
        ProtocolSpec::Compound(Compound::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolSpec::Compound(_) => "compound",
            ProtocolSpec::Reno => "reno",
            ProtocolSpec::Hstcp(_) => "hstcp",
        }
    }

    /// Window range where the gains are defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ProtocolSpec::Hstcp(h) => h.domain(),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// `(i(w), i'(w))`.
    pub fn increase(&self, w: f64) -> Result<(f64, f64)> {
        check_window(w)?;
        Ok(match self {
            ProtocolSpec::Compound(c) => {
                let i = c.alpha * w.powf(c.k - 1.0);
                (i, (c.k - 1.0) * i / w)
            }
            ProtocolSpec::Reno => (1.0 / w, -1.0 / (w * w)),
            ProtocolSpec::Hstcp(h) => {
                let (f, df) = h.f1.eval(w)?;
                (f / w, df / w - f / (w * w))
            }
        })
    }

    /// `(d(w), d'(w))`.
    pub fn decrease(&self, w: f64) -> Result<(f64, f64)> {
        check_window(w)?;
        Ok(match self {
            ProtocolSpec::Compound(c) => (c.beta * w, c.beta),
            ProtocolSpec::Reno => (0.5 * w, 0.5),
            ProtocolSpec::Hstcp(h) => {
                let (f, df) = h.f2.eval(w)?;
                (f * w, df * w + f)
            }
        })
    }

    pub fn gains(&self, w: f64) -> Result<Gains> {
        let (i, di) = self.increase(w)?;
        let (d, dd) = self.decrease(w)?;
        Ok(Gains { i, di, d, dd })
    }
}

fn check_window(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("window must be finite and > 0, got {w}")))
    }
}
