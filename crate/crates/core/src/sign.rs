//! Sign profiles of `x -> f(x, u(x))`.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::field::CurvatureField;
use crate::grid::{Grid, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
}

impl Sign {
    fn of(v: f64, tol: f64) -> Sign {
        if v > tol {
            Sign::Positive
        } else if v < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignInterval {
    pub lo: f64,
    pub hi: f64,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignProfile {
    pub intervals: Vec<SignInterval>,
    pub change_points: Vec<f64>,
}

impl SignProfile {
    /// Signs of the nonzero intervals, in order.
    pub fn signed_sequence(&self) -> Vec<Sign> {
        self.intervals.iter().map(|i| i.sign).filter(|s| *s != Sign::Zero).collect()
    }

    /// Sign of the interval containing `x` (the left one at a shared endpoint).
    pub fn sign_at(&self, x: f64) -> Sign {
        self.intervals
            .iter()
            .find(|i| x <= i.hi)
            .or(self.intervals.last())
            .map(|i| i.sign)
            .unwrap_or(Sign::Zero)
    }
}

/// Default zero band: `1e-12 * max |g|`.
pub fn default_tol(g: &[f64]) -> f64 {
    1e-12 * g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Evaluates `g_i = f(x_i, u(x_i))` at the nodes (left-continuous rendering).
pub fn load_values(f: &CurvatureField, u: &GridFunction) -> Result<Vec<f64>, CoreError> {
    let grid = u.grid();
    u.rendered().iter().enumerate().map(|(i, &s)| f.eval(grid.x(i), s)).collect()
}

/// Sign profile of `f(., u(.))`; `tol = None` selects [`default_tol`].
pub fn sign_profile(f: &CurvatureField, u: &GridFunction, tol: Option<f64>) -> Result<SignProfile, CoreError> {
    let g = load_values(f, u)?;
    let tol = tol.unwrap_or_else(|| default_tol(&g));
    Ok(sign_profile_from_values(u.grid(), &g, tol))
}

#[derive(Debug, Clone, Copy)]
struct Run {
    sign: Sign,
    first: usize,
    last: usize,
}

/// Sign profile of tabulated nodal values.
pub fn sign_profile_from_values(grid: &Grid, g: &[f64], tol: f64) -> SignProfile {
    let mut runs: Vec<Run> = Vec::new();
    for (i, &v) in g.iter().enumerate() {
        let s = Sign::of(v, tol);
        match runs.last_mut() {
            Some(r) if r.sign == s => r.last = i,
            _ => runs.push(Run { sign: s, first: i, last: i }),
        }
    }

    // Zero runs at the ends join their signed neighbour.
    if runs.len() > 1 && runs[0].sign == Sign::Zero {
        let z = runs.remove(0);
        runs[0].first = z.first;
    }
    if runs.len() > 1 && runs.last().unwrap().sign == Sign::Zero {
        let z = runs.pop().unwrap();
        runs.last_mut().unwrap().last = z.last;
    }

    // Interior zero runs: merge when both flanks agree; collapse single nodes between
    // opposite flanks into a change point.
    let mut collapsed: Vec<Option<usize>> = Vec::new(); // per boundary between merged runs
    let mut merged: Vec<Run> = Vec::new();
    let mut i = 0;
    while i < runs.len() {
        let r = runs[i];
        if r.sign == Sign::Zero && i > 0 && i + 1 < runs.len() {
            let prev = merged.last().copied().unwrap();
            let next = runs[i + 1];
            if prev.sign == next.sign {
                merged.last_mut().unwrap().last = next.last;
                i += 2;
                continue;
            }
            if r.first == r.last {
                merged.push(next);
                collapsed.push(Some(r.first));
                i += 2;
                continue;
            }
        }
        if !merged.is_empty() {
            collapsed.push(None);
        }
        merged.push(r);
        i += 1;
    }

    let mut intervals = Vec::with_capacity(merged.len());
    let mut change_points = Vec::new();
    let mut lo = grid.a();
    for (k, r) in merged.iter().enumerate() {
        let hi = if k + 1 == merged.len() {
            grid.b()
        } else {
            let next = merged[k + 1];
            match collapsed[k] {
                Some(node) => grid.x(node),
                None if r.sign == Sign::Zero => grid.x(r.last),
                None if next.sign == Sign::Zero => grid.x(next.first),
                None => {
                    // linear root of g between the last node of r and the first of next
                    let (i0, i1) = (r.last, next.first);
                    let (g0, g1) = (g[i0], g[i1]);
                    let t = g0 / (g0 - g1);
                    grid.x(i0) + t.clamp(0.0, 1.0) * (grid.x(i1) - grid.x(i0))
                }
            }
        };
        if k + 1 < merged.len() {
            let next = merged[k + 1];
            if r.sign != Sign::Zero && next.sign != Sign::Zero {
                change_points.push(hi);
            }
        }
        intervals.push(SignInterval { lo, hi, sign: r.sign });
        lo = hi;
    }

    SignProfile { intervals, change_points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn constant_sign() {
        let g = grid(10);
        let u = GridFunction::from_fn(g, |x| x * x).unwrap();
        let p = sign_profile(&CurvatureField::Constant(1.0), &u, None).unwrap();
        assert_eq!(p.intervals, vec![SignInterval { lo: 0.0, hi: 1.0, sign: Sign::Positive }]);
        assert!(p.change_points.is_empty());
    }

    #[test]
    fn step_sign() {
        for n in [10, 11, 1000] {
            let g = grid(n);
            let u = GridFunction::zeros(g);
            let f = CurvatureField::Step { z: 0.5, left: 1.0, right: -1.0 };
            let p = sign_profile(&f, &u, None).unwrap();
            assert_eq!(p.intervals.len(), 2, "n = {n}");
            assert_eq!(p.intervals[0].sign, Sign::Positive);
            assert_eq!(p.intervals[1].sign, Sign::Negative);
            assert_eq!(p.change_points.len(), 1);
            assert!((p.change_points[0] - 0.5).abs() <= g.h(), "n = {n}: {:?}", p.change_points);
            if n % 2 == 0 {
                assert_eq!(p.change_points[0], 0.5);
            }
        }
    }

    // Independent root of cos(pi x) on (0, 1) by bisection.
    fn bisect_cos_root() -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (std::f64::consts::PI * mid).cos() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cosine_change_point() {
        let root = bisect_cos_root();
        for n in [7, 64, 333] {
            let g = grid(n);
            let u = GridFunction::zeros(g);
            let f = CurvatureField::parse("cos(3.141592653589793*x)").unwrap();
            let p = sign_profile(&f, &u, None).unwrap();
            assert_eq!(p.change_points.len(), 1);
            assert!((p.change_points[0] - root).abs() <= g.h());
        }
    }

    #[test]
    fn zero_runs() {
        let g = grid(8);
        // + 0 0 + + - - 0 0 : inner zeros merge, trailing zeros join the last run
        let vals = [1.0, 0.0, 0.0, 1.0, 1.0, -1.0, -1.0, 0.0, 0.0];
        let p = sign_profile_from_values(&g, &vals, 0.0);
        assert_eq!(p.intervals.len(), 2);
        assert_eq!(p.change_points.len(), 1);
        assert!((p.change_points[0] - 0.5625).abs() < 1e-15);

        // + 0 0 0 - : a wide zero band between opposite signs stays
        let g = grid(4);
        let p = sign_profile_from_values(&g, &[1.0, 0.0, 0.0, 0.0, -1.0], 0.0);
        assert_eq!(p.intervals.iter().map(|i| i.sign).collect::<Vec<_>>(), vec![
            Sign::Positive,
            Sign::Zero,
            Sign::Negative
        ]);
        assert!(p.change_points.is_empty());

        let p = sign_profile_from_values(&g, &[0.0; 5], 0.0);
        assert_eq!(p.intervals, vec![SignInterval { lo: 0.0, hi: 1.0, sign: Sign::Zero }]);
    }

    proptest! {
        #[test]
        fn intervals_partition(vals in proptest::collection::vec(-2i32..=2, 3..40)) {
            let n = vals.len() - 1;
            let g = Grid::new(0.0, 1.0, n).unwrap();
            let gv: Vec<f64> = vals.iter().map(|v| *v as f64).collect();
            let p = sign_profile_from_values(&g, &gv, 0.5);
            prop_assert_eq!(p.intervals[0].lo, 0.0);
            prop_assert_eq!(p.intervals.last().unwrap().hi, 1.0);
            for w in p.intervals.windows(2) {
                prop_assert_eq!(w[0].hi, w[1].lo);
                prop_assert!(w[0].sign != w[1].sign);
                prop_assert!(w[0].lo <= w[0].hi);
            }
        }

        #[test]
        fn change_points_stable_when_tol_halves(
            vals in proptest::collection::vec(-3.0f64..3.0, 3..40),
            tol in 0.01f64..0.5,
        ) {
            let n = vals.len() - 1;
            let g = Grid::new(0.0, 1.0, n).unwrap();
            let coarse = sign_profile_from_values(&g, &vals, tol);
            let fine = sign_profile_from_values(&g, &vals, tol / 2.0);
            // change points flanked by values exceeding 2 tol survive
            for (k, cp) in coarse.change_points.iter().enumerate() {
                let i = ((cp - 0.0) / g.h()).floor() as usize;
                let left = vals[..=i.min(n)].iter().rev().find(|v| v.abs() > tol).copied();
                let right = vals[(i + 1).min(n)..].iter().find(|v| v.abs() > tol).copied();
                if let (Some(l), Some(r)) = (left, right) {
                    if l.abs() > 2.0 * tol && r.abs() > 2.0 * tol {
                        prop_assert!(
                            fine.change_points.iter().any(|c| (c - cp).abs() <= g.h()),
                            "change point {} ({}) lost: coarse {:?} fine {:?}", cp, k,
                            coarse.change_points, fine.change_points
                        );
                    }
                }
            }
        }
    }
}
