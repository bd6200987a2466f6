//! Independent oracles for integration tests. Nothing here calls into the crate's
//! numerics; closed forms are checked against the equation where they are defined.

#![allow(dead_code)]

/// Circle-arc solution of `-(u'/sqrt(1+u'^2))' = lam` on (0, 1) with zero Dirichlet
/// data, valid for `0 < lam < 2`.
pub fn circle_arc(lam: f64, x: f64) -> f64 {
    let r = 1.0 / lam;
    (r * r - (x - 0.5).powi(2)).sqrt() - (r * r - 0.25).sqrt()
}

/// Momentum of the circle arc: `lam (1/2 - x)`.
pub fn circle_momentum(lam: f64, x: f64) -> f64 {
    lam * (0.5 - x)
}

/// Composite Simpson rule with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    assert!(m % 2 == 0);
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `q / sqrt(1 - q^2)`, written out locally.
pub fn slope_of(q: f64) -> f64 {
    q / (1.0 - q * q).sqrt()
}

/// Classical RK4 for `u'' = -g(x, u) (1 + u'^2)^(3/2)` from `(0, u0, s0)` to `x = 1`,
/// returning nodal values on `n` cells (with `sub` substeps per cell).
pub fn rk4_curvature(g: impl Fn(f64, f64) -> f64, u0: f64, s0: f64, n: usize, sub: usize) -> Vec<f64> {
    let h = 1.0 / (n * sub) as f64;
    let rhs = |x: f64, y: [f64; 2]| [y[1], -g(x, y[0]) * (1.0 + y[1] * y[1]).powf(1.5)];
    let mut y = [u0, s0];
    let mut out = vec![u0];
    let mut x = 0.0;
    for _ in 0..n {
        for _ in 0..sub {
            let k1 = rhs(x, y);
            let k2 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = rhs(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for c in 0..2 {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            x += h;
        }
        out.push(y[0]);
    }
    out
}

/// Shooting on the initial slope so that the RK4 solution ends at `target`.
pub fn shoot_dirichlet(g: impl Fn(f64, f64) -> f64 + Copy, u0: f64, target: f64, n: usize) -> Vec<f64> {
    let end = |s: f64| *rk4_curvature(g, u0, s, n, 8).last().unwrap() - target;
    let (mut lo, mut hi) = (-5.0, 5.0);
    assert!(end(lo) < 0.0 && end(hi) > 0.0, "shooting bracket");
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if end(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    rk4_curvature(g, u0, 0.5 * (lo + hi), n, 8)
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn circle_arc_satisfies_the_equation() {
    // second derivative by central differences, curvature against lam
    for lam in [0.5, 1.0, 1.9] {
        assert!(circle_arc(lam, 0.0).abs() < 1e-15 && circle_arc(lam, 1.0).abs() < 1e-15);
        for x in [0.1, 0.3, 0.5, 0.8] {
            let d = 1e-4;
            let u1 = (circle_arc(lam, x + d) - circle_arc(lam, x - d)) / (2.0 * d);
            let u2 = (circle_arc(lam, x + d) - 2.0 * circle_arc(lam, x) + circle_arc(lam, x - d)) / (d * d);
            let curvature = -u2 / (1.0 + u1 * u1).powf(1.5);
            assert!((curvature - lam).abs() < 1e-5 * lam.max(1.0) * 10.0, "{lam} {x} {curvature}");
            let p = u1 / (1.0 + u1 * u1).sqrt();
            assert!((p - circle_momentum(lam, x)).abs() < 1e-6);
        }
    }
}
