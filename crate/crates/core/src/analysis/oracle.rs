//! Closed-form reference solutions.

use super::probe::OdeTrajectory;

/// Circle-arc solution of `-(psi(u'))' = lam` on (0, 1) with zero Dirichlet data,
/// for `0 < lam <= 2`.
pub fn circle_arc(lam: f64, x: f64) -> f64 {
    let r = 1.0 / lam;
    (r * r - (x - 0.5).powi(2)).max(0.0).sqrt() - (r * r - 0.25).max(0.0).sqrt()
}

/// Momentum `lam (1/2 - x)` of the circle arc.
pub fn circle_momentum(lam: f64, x: f64) -> f64 {
    lam * (0.5 - x)
}

/// The semicircle `sqrt(1/4 - (x - 1/2)^2)`, the arc at `lam = 2`; its slope is
/// infinite at both ends.
pub fn semicircle(x: f64) -> f64 {
    circle_arc(2.0, x)
}

/// Dead-core profile `v(t) = k (t - t0)_+^m` of `v'' = c v^q`, `0 < q < 1`, with
/// `m = 2/(1-q)` and `k = (c/(m(m-1)))^(1/(1-q))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadCore {
    pub c: f64,
    pub q: f64,
    pub t0: f64,
}

impl DeadCore {
    pub fn exponent(&self) -> f64 {
        2.0 / (1.0 - self.q)
    }

    pub fn coefficient(&self) -> f64 {
        let m = self.exponent();
        (self.c / (m * (m - 1.0))).powf(1.0 / (1.0 - self.q))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.coefficient() * (t - self.t0).max(0.0).powf(self.exponent())
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let m = self.exponent();
        self.coefficient() * m * (t - self.t0).max(0.0).powf(m - 1.0)
    }

    pub fn trajectory(&self, interval: (f64, f64), n: usize) -> OdeTrajectory {
        OdeTrajectory::sample(interval, n, |t| self.value(t), |t| self.derivative(t))
    }
}

/// Largest primitive magnitude `A (1/2)^(alpha+1) / (alpha+1)` of
/// `A |x - 1/2|^alpha sgn(x - 1/2)` over one half of (0, 1). The Dirichlet problem
/// needs it below 1.
pub fn power_sign_peak(a: f64, alpha: f64) -> f64 {
    a.abs() * 0.5f64.powf(alpha + 1.0) / (alpha + 1.0)
}
