//! Stationary occupancy of finite-buffer queues, time-average convention.
//!
//! M/M/1/B: pi_n proportional to rho^n.
//! M/D/1/B: departure-epoch chain with Poisson arrivals per unit service,
//! solved by GTH elimination and converted to time-average probabilities.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueDist {
    pub rho: f64,
    pub buffer: usize,
    /// P(N = n), n = 0..=buffer.
    pub pmf: Vec<f64>,
}

impl QueueDist {
    /// P(N > n).
    pub fn ccdf(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.pmf.len()];
        let mut tail = 0.0;
        for n in (0..self.pmf.len()).rev() {
            out[n] = tail;
            tail += self.pmf[n];
        }
        out
    }

    /// Probability an arrival finds the buffer full (PASTA).
    pub fn blocking(&self) -> f64 {
        self.pmf[self.buffer]
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// CSV with header `n,pmf,ccdf`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        use crate::format::sig12;
        writeln!(out, "n,pmf,ccdf")?;
        for (n, (p, c)) in self.pmf.iter().zip(self.ccdf()).enumerate() {
            writeln!(out, "{n},{},{}", sig12(*p), sig12(c))?;
        }
        Ok(())
    }
}

fn check(rho: f64, buffer: usize) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::parameter("rho", format!("must be finite and > 0, got {rho}")));
    }
    if buffer < 1 {
        return Err(Error::parameter("buffer", "must be >= 1"));
    }
    Ok(())
}

pub fn mm1b_dist(rho: f64, buffer: usize) -> Result<QueueDist> {
    check(rho, buffer)?;
    // Weights normalized at the larger end to avoid overflow for rho > 1.
    let w: Vec<f64> = if rho <= 1.0 {
        (0..=buffer).map(|n| rho.powi(n as i32)).collect()
    } else {
        (0..=buffer).map(|n| (1.0 / rho).powi((buffer - n) as i32)).collect()
    };
    let total: f64 = w.iter().sum();
    Ok(QueueDist { rho, buffer, pmf: w.into_iter().map(|x| x / total).collect() })
}

/// rho^B - pi_B: how far the infinite-buffer tail misstates M/M/1/B blocking.
pub fn mm1b_tail_gap(rho: f64, buffer: usize) -> Result<f64> {
    Ok(rho.powi(buffer as i32) - mm1b_dist(rho, buffer)?.blocking())
}


/// P(N >= m) for N ~ Poisson(rho), without the 1 - cdf cancellation in the far tail.
fn poisson_tail(rho: f64, m: usize) -> f64 {
    let mut a = (-rho).exp();
    if (m as f64) <= rho {
        let mut below = 0.0;
        for j in 0..m {
            below += a;
            a *= rho / (j + 1) as f64;
        }
        return (1.0 - below).max(0.0);
    }
    for j in 1..=m {
        a *= rho / j as f64;
    }
    let mut sum = a;
    for j in m + 1.. {
        a *= rho / j as f64;
        sum += a;
        if a <= sum * 1e-17 || a == 0.0 {
            break;
        }
    }
    sum
}

/// E[(N - m)^+] for N ~ Poisson(rho), as a sum of nonnegative terms.
fn poisson_excess(rho: f64, m: usize) -> f64 {
    let mut a = (-rho).exp();
    if (m as f64) < rho {
        // rho - m + E[(m - N)^+]
        let mut below = 0.0;
        for j in 0..m {
            below += (m - j) as f64 * a;
            a *= rho / (j + 1) as f64;
        }
        return rho - m as f64 + below;
    }
    for j in 1..=m {
        a *= rho / j as f64;
    }
    let mut sum = 0.0;
    for j in m + 1.. {
        a *= rho / j as f64;
        let term = (j - m) as f64 * a;
        sum += term;
        if term <= sum * 1e-17 || a == 0.0 {
            break;
        }
    }
    sum
}

pub fn md1b_dist(rho: f64, buffer: usize) -> Result<QueueDist> {
    check(rho, buffer)?;
    let k = buffer; // departure epochs leave 0..k-1 behind
    // Arrivals during one unit service: Poisson(rho).
    let mut arrivals = vec![0.0; k + 1];
    arrivals[0] = (-rho).exp();
    for j in 1..=k {
        arrivals[j] = arrivals[j - 1] * rho / j as f64;
    }
    let row = |i: usize| -> Vec<f64> {
        let base = i.saturating_sub(1); // an empty system waits for the next arrival
        let mut r = vec![0.0; k];
        for (j, slot) in r.iter_mut().enumerate().take(k - 1).skip(base) {
            *slot = arrivals[j - base];
        }
        r[k - 1] += poisson_tail(rho, k - 1 - base);
        r
    };
    let mut p: Vec<Vec<f64>> = (0..k).map(row).collect();
    // Grassmann-Taksar-Heyman elimination: no subtractions, so every state
    // keeps full relative precision.
    let mut out = vec![0.0; k];
    for n in (1..k).rev() {
        out[n] = p[n][..n].iter().sum::<f64>();
        if !(out[n] > 0.0) {
            return Err(Error::Domain(format!("M/D/1/B chain is reducible at rho = {rho}")));
        }
        for i in 0..n {
            let f = p[i][n] / out[n];
            let (head, tail) = p.split_at_mut(n);
            for (x, y) in head[i][..n].iter_mut().zip(&tail[0][..n]) {
                *x += f * y;
            }
        }
    }
    let mut pi = vec![1.0; k];
    for n in 1..k {
        pi[n] = (0..n).map(|i| pi[i] * p[i][n]).sum::<f64>() / out[n];
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    let norm = pi[0] + rho;
    let mut pmf: Vec<f64> = pi.iter().map(|x| x / norm).collect();
    // Time at the full level: a service starting with n in the system reaches
    // B after m = B - n arrivals and then spends E[(N - m)^+] / rho there.
    // Summing these positive terms avoids 1 - 1/norm, which cancels at light load.
    let full: f64 = pi.iter().enumerate().map(|(i, x)| x * poisson_excess(rho, k - i.max(1))).sum();
    pmf.push(full / norm);
    Ok(QueueDist { rho, buffer, pmf })
}
