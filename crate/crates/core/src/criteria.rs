//! Divergence criteria guaranteeing regularity and strong positivity.
//!
//! Every criterion reduces to the divergence of an integral of the form
//! `int_0 d^(-gamma) |log d|^(-kappa) dd`, which diverges iff `gamma > 1`, or
//! `gamma = 1` and `kappa <= 1`. Verdicts are closed-form over the power-log envelope
//! family `C d^alpha |log d|^beta`. For the antiderivative
//! `M(d) = int_0^d mu ~ C d^(alpha+1) |log d|^beta / (alpha+1)` the neglected
//! lower-order terms never change the divergence of `int 1/sqrt(M)`.
//!
//! Tabulated envelopes only get a heuristic verdict ([`heuristic_endpoint_verdict`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("envelope power alpha = {alpha} <= -1 is not locally integrable")]
    NotLocallyIntegrable { alpha: f64 },
    #[error("criterion shape error: {0}")]
    CriterionShape(String),
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Whether the envelope bounds `f(., u(.))` from above (`mu`) or below (`nu`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    UpperMu,
    LowerNu,
}

/// One-sided power-log envelope at `point`: `mu(x) = C d^alpha |log d|^beta` or
/// `nu(x) = -C d^alpha |log d|^beta` with `d = |x - point|`, valid on `(0, delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub point: f64,
    pub side: Side,
    pub c: f64,
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub bound: Bound,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    0.5
}

impl Envelope {
    pub fn new(point: f64, side: Side, c: f64, alpha: f64, beta: f64, bound: Bound) -> Self {
        Self { point, side, c, alpha, beta, bound, delta: default_delta() }
    }

    pub fn validate(&self) -> Result<(), CriteriaError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(CriteriaError::InvalidEnvelope(format!("amplitude C = {} must be > 0", self.c)));
        }
        if !self.beta.is_finite() || !self.point.is_finite() {
            return Err(CriteriaError::InvalidEnvelope("point and beta must be finite".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CriteriaError::InvalidEnvelope(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.alpha > -1.0) {
            return Err(CriteriaError::NotLocallyIntegrable { alpha: self.alpha });
        }
        Ok(())
    }

    /// Signed envelope value at `x` (`mu` or `nu`).
    pub fn value(&self, x: f64) -> f64 {
        let d = (x - self.point).abs();
        let m = self.c * d.powf(self.alpha) * d.ln().abs().powf(self.beta);
        match self.bound {
            Bound::UpperMu => m,
            Bound::LowerNu => -m,
        }
    }

    /// Image under `x -> a + b - x`.
    pub fn reflected(&self, a: f64, b: f64) -> Envelope {
        let side = match self.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        Envelope { point: a + b - self.point, side, ..*self }
    }

    /// Image under `u -> -u`, `f -> -f` (upper bounds become lower bounds).
    pub fn sign_flipped(&self) -> Envelope {
        let bound = match self.bound {
            Bound::UpperMu => Bound::LowerNu,
            Bound::LowerNu => Bound::UpperMu,
        };
        Envelope { bound, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Holds {
    Guaranteed,
    NotGuaranteed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub holds: Holds,
    pub divergent: bool,
    pub antiderivative_positive: bool,
    #[serde(default)]
    pub heuristic: bool,
    pub detail: String,
}

impl CriterionVerdict {
    fn decide(divergent: bool, antiderivative_positive: bool, heuristic: bool, detail: String) -> Self {
        let holds = if divergent && antiderivative_positive { Holds::Guaranteed } else { Holds::NotGuaranteed };
        Self { holds, divergent, antiderivative_positive, heuristic, detail }
    }

    pub fn is_guaranteed(&self) -> bool {
        self.holds == Holds::Guaranteed
    }
}

/// Divergence of `int_0 d^(-gamma) |log d|^(-kappa) dd`.
pub fn powerlog_integral_diverges(gamma: f64, kappa: f64) -> bool {
    gamma > 1.0 || (gamma == 1.0 && kappa <= 1.0)
}

/// Whether `int_0 1/sqrt(M)` diverges for `M(d) ~ C d^(alpha+1) |log d|^beta`:
/// true iff `alpha > 1`, or `alpha = 1` and `beta <= 2`.
pub fn powerlog_sqrt_divergence(alpha: f64, beta: f64) -> Result<bool, CriteriaError> {
    if !(alpha > -1.0) {
        return Err(CriteriaError::NotLocallyIntegrable { alpha });
    }
    Ok(powerlog_integral_diverges((alpha + 1.0) / 2.0, beta / 2.0))
}

/// Endpoint criteria for an interval where `f(., u(.))` has one sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointCase {
    /// `f >= 0`, upper bound `mu` at `a`.
    J,
    /// `f >= 0`, upper bound `mu` at `b`.
    Jj,
    /// `f <= 0`, lower bound `nu` at `a`.
    Jjj,
    /// `f <= 0`, lower bound `nu` at `b`.
    Jjjj,
}

/// Interior criteria at a sign-change point `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteriorCase {
    /// `f >= 0` on the left of `c`, `f <= 0` on the right.
    H,
    /// `f <= 0` on the left of `c`, `f >= 0` on the right.
    Hh,
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0)
}

fn verdict_for(env: &Envelope, label: &str) -> Result<CriterionVerdict, CriteriaError> {
    let divergent = powerlog_sqrt_divergence(env.alpha, env.beta)?;
    // within the family, C > 0 makes M > 0 (resp. N < 0) on the punctured neighbourhood
    let positive = env.c > 0.0;
    let which = match env.bound {
        Bound::UpperMu => "M",
        Bound::LowerNu => "-N",
    };
    let detail = format!(
        "{label}: {which}(d) ~ {c} d^{p} |log d|^{beta}/{a1}; int 1/sqrt({which}) {} (alpha = {alpha}, beta = {beta})",
        if divergent { "diverges" } else { "converges" },
        c = env.c,
        p = env.alpha + 1.0,
        a1 = env.alpha + 1.0,
        alpha = env.alpha,
        beta = env.beta,
    );
    Ok(CriterionVerdict::decide(divergent, positive, false, detail))
}

/// Regularity at an endpoint of a one-signed interval `(a, b)`.
pub fn endpoint_regularity(
    case: EndpointCase,
    env: &Envelope,
    domain: (f64, f64),
) -> Result<CriterionVerdict, CriteriaError> {
    env.validate()?;
    let (a, b) = domain;
    let scale = a.abs().max(b.abs());
    let (anchor, side, bound, anchor_name) = match case {
        EndpointCase::J => (a, Side::Right, Bound::UpperMu, "a"),
        EndpointCase::Jj => (b, Side::Left, Bound::UpperMu, "b"),
        EndpointCase::Jjj => (a, Side::Right, Bound::LowerNu, "a"),
        EndpointCase::Jjjj => (b, Side::Left, Bound::LowerNu, "b"),
    };
    if !close(env.point, anchor, scale) {
        return Err(CriteriaError::CriterionShape(format!(
            "case {case:?} needs the envelope anchored at {anchor_name} = {anchor}, got {}",
            env.point
        )));
    }
    if env.side != side {
        return Err(CriteriaError::CriterionShape(format!("case {case:?} needs a {side:?}-sided envelope")));
    }
    if env.bound != bound {
        return Err(CriteriaError::CriterionShape(format!("case {case:?} needs a {bound:?} envelope")));
    }
    verdict_for(env, &format!("case {case:?} at {anchor_name}"))
}

/// Regularity at an interior sign-change point. Exactly the side provided is
/// evaluated; one side sufficing is the contract.
pub fn interior_regularity(
    case: InteriorCase,
    env: &Envelope,
    domain: (f64, f64),
) -> Result<CriterionVerdict, CriteriaError> {
    env.validate()?;
    let (a, b) = domain;
    let scale = a.abs().max(b.abs());
    if close(env.point, a, scale) || close(env.point, b, scale) || env.point < a || env.point > b {
        return Err(CriteriaError::CriterionShape(format!(
            "interior criterion needs a point strictly inside ({a}, {b}), got {}",
            env.point
        )));
    }
    // (h): mu on the left (f >= 0 there) or nu on the right (f <= 0 there);
    // (hh): nu on the left or mu on the right.
    let expected = match (case, env.side) {
        (InteriorCase::H, Side::Left) | (InteriorCase::Hh, Side::Right) => Bound::UpperMu,
        (InteriorCase::H, Side::Right) | (InteriorCase::Hh, Side::Left) => Bound::LowerNu,
    };
    if env.bound != expected {
        return Err(CriteriaError::CriterionShape(format!(
            "case {case:?} on the {:?} side needs a {expected:?} envelope",
            env.side
        )));
    }
    verdict_for(env, &format!("case {case:?} at c = {} ({:?} side)", env.point, env.side))
}

/// Comparison function of the strong maximum principle near `s = 0`:
/// `G'(s) ~ C s^(p-1) |log s|^q`, so `G(s) ~ C' s^p |log s|^q` on `(0, eps]`, or
/// `G = 0` there when `zero_case` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonG {
    pub c: f64,
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    pub eps: f64,
    #[serde(default)]
    pub zero_case: bool,
}

impl ComparisonG {
    pub fn power(c: f64, p: f64, eps: f64) -> Self {
        Self { c, p, q: 0.0, eps, zero_case: false }
    }

    pub fn zero(eps: f64) -> Self {
        Self { c: 0.0, p: 1.0, q: 0.0, eps, zero_case: true }
    }

    /// `G'(s)` for the power-log form (0 in the zero case).
    pub fn g_prime(&self, s: f64) -> f64 {
        if self.zero_case || s <= 0.0 {
            return 0.0;
        }
        let l = s.ln().abs();
        // d/ds [C s^p |log s|^q] for s < 1
        self.c * s.powf(self.p - 1.0) * l.powf(self.q) * (self.p - self.q / l)
    }
}

/// Condition (G): `G = 0` near 0, or `G > 0` with `int_0 1/sqrt(G) = +inf`
/// (`p > 2`, or `p = 2` and `q <= 2`).
pub fn smp_check(g: &ComparisonG) -> CriterionVerdict {
    if g.zero_case {
        return CriterionVerdict::decide(true, true, false, "G = 0 on (0, eps]".into());
    }
    let positive = g.c > 0.0 && g.p > 0.0 && g.eps > 0.0 && g.eps < 1.0;
    let divergent = g.p > 0.0 && powerlog_integral_diverges(g.p / 2.0, g.q / 2.0);
    let detail = format!(
        "G(s) ~ {} s^{} |log s|^{}; int 1/sqrt(G) {}{}",
        g.c,
        g.p,
        g.q,
        if divergent { "diverges" } else { "converges" },
        if positive { "" } else { "; G not positive on (0, eps]" }
    );
    CriterionVerdict::decide(divergent, positive, false, detail)
}

/// One side of an Osgood bound `H(s) = C |s|^q |log |s||^r` on `0 < |s| <= eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEnvelope {
    pub c: f64,
    pub q: f64,
    #[serde(default)]
    pub r: f64,
    pub eps: f64,
}

impl StateEnvelope {
    pub fn power(c: f64, q: f64, eps: f64) -> Self {
        Self { c, q, r: 0.0, eps }
    }

    pub fn value(&self, s: f64) -> f64 {
        let a = s.abs();
        if a == 0.0 {
            return 0.0;
        }
        let l = if self.r == 0.0 { 1.0 } else { a.ln().abs().powf(self.r) };
        self.c * a.powf(self.q) * l
    }
}

/// Condition (H): both one-sided integrals of `1/H` diverge.
pub fn osgood_check(left: &StateEnvelope, right: &StateEnvelope) -> CriterionVerdict {
    let side = |e: &StateEnvelope| {
        let positive = e.c > 0.0 && e.eps > 0.0 && e.eps < 1.0;
        (powerlog_integral_diverges(e.q, e.r), positive)
    };
    let (dl, pl) = side(left);
    let (dr, pr) = side(right);
    let detail = format!(
        "left: H ~ {}|s|^{}|log|s||^{} ({}); right: H ~ {}|s|^{}|log|s||^{} ({})",
        left.c,
        left.q,
        left.r,
        if dl { "diverges" } else { "converges" },
        right.c,
        right.q,
        right.r,
        if dr { "diverges" } else { "converges" },
    );
    CriterionVerdict::decide(dl && dr, pl && pr, false, detail)
}

/// Heuristic verdict for a tabulated upper envelope `mu(d)` sampled at increasing
/// distances `d` from the anchor. Fits the local power of the cumulative integral
/// `M` over the smallest fifth of the samples; the result is labelled heuristic.
pub fn heuristic_endpoint_verdict(d: &[f64], mu: &[f64]) -> Result<CriterionVerdict, CriteriaError> {
    if d.len() != mu.len() || d.len() < 10 {
        return Err(CriteriaError::InvalidEnvelope("need at least 10 paired samples".into()));
    }
    if d[0] <= 0.0 || d.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CriteriaError::InvalidEnvelope("distances must be positive and increasing".into()));
    }
    // cumulative integral M, taking mu ~ const on (0, d_0]
    let mut m = Vec::with_capacity(d.len());
    let mut acc = 0.5 * mu[0] * d[0];
    m.push(acc);
    for i in 1..d.len() {
        acc += 0.5 * (mu[i] + mu[i - 1]) * (d[i] - d[i - 1]);
        m.push(acc);
    }
    let positive = m.iter().all(|v| *v > 0.0);
    // local power of mu near the anchor; M then behaves like d^(alpha + 1)
    let k = (d.len() / 5).max(5);
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    let mut used = 0.0;
    for i in 0..k {
        if mu[i] > 0.0 {
            let (lx, ly) = (d[i].ln(), mu[i].ln());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            used += 1.0;
        }
    }
    let alpha = if used >= 2.0 { (used * sxy - sx * sy) / (used * sxx - sx * sx) } else { f64::NAN };
    let slope = alpha + 1.0;
    // int 1/sqrt(M) with M ~ d^slope diverges for slope >= 2 (log corrections unknown)
    let divergent = slope.is_finite() && slope >= 2.0 - 1e-3;
    let detail = format!("heuristic: fitted M ~ d^{slope:.4} over {used} samples");
    Ok(CriterionVerdict::decide(divergent, positive, true, detail))
}
