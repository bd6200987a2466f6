//! Regularity taxonomy of a computed solution.
//!
//! On an interval where `f(., u) >= 0` the solution is concave, where `f <= 0` it is
//! convex; slopes may blow up at the ends, and at a sign change from `+` to `-` the
//! solution may drop (from `-` to `+`, rise). Near-jumps show up as cells with
//! `|p| >= 1 - max(p_tol, h |g| / 2)` next to a change point; at most the two steepest such cells are
//! replaced by an atom, the replacement increment taken from the neighbouring slopes.

use serde::{Deserialize, Serialize};

use crate::criteria::{
    endpoint_regularity, interior_regularity, Bound, CriterionVerdict, EndpointCase, Envelope, InteriorCase, Side,
};
use crate::field::CurvatureField;
use crate::grid::{GridFunction, Jump};
use crate::psi::psi_inv;
use crate::sign::{default_tol, sign_profile_from_values, Sign, SignProfile};

use super::{cell_momenta, endpoint_momenta, nodal_load, AnalysisError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Concave,
    Convex,
    Affine,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalShape {
    pub lo: f64,
    pub hi: f64,
    pub sign: Sign,
    pub shape: Shape,
    /// Largest second difference against the mandate (0 when none is violated).
    pub max_violation: f64,
    pub nodes_checked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointStatus {
    FiniteSlope { value: f64 },
    PlusInfinity,
    MinusInfinity,
}

impl EndpointStatus {
    pub fn is_finite(&self) -> bool {
        matches!(self, EndpointStatus::FiniteSlope { .. })
    }

    fn from_momentum(p: f64, p_tol: f64) -> Self {
        if p >= 1.0 - p_tol {
            EndpointStatus::PlusInfinity
        } else if p <= -(1.0 - p_tol) {
            EndpointStatus::MinusInfinity
        } else {
            EndpointStatus::FiniteSlope { value: psi_inv(p).unwrap_or(f64::NAN) }
        }
    }

    fn mirrored(self) -> Self {
        match self {
            EndpointStatus::PlusInfinity => EndpointStatus::MinusInfinity,
            EndpointStatus::MinusInfinity => EndpointStatus::PlusInfinity,
            EndpointStatus::FiniteSlope { value } => EndpointStatus::FiniteSlope { value: -value },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpDirection {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub location: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub height: f64,
    pub direction: JumpDirection,
    /// Cell holding the atom.
    pub cell: usize,
    /// Number of steep cells merged into the atom.
    pub cells_merged: usize,
}

/// A saturated momentum at a change point whose atomised height is at most `10 h`:
/// read as a gradient blow-up of a continuous solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub location: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxonomyCase {
    I,
    Ii,
    Iii,
    Iiii,
    Composite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachedVerdict {
    pub criterion: String,
    pub location: f64,
    pub verdict: CriterionVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub sign_intervals: SignProfile,
    pub shapes: Vec<IntervalShape>,
    pub endpoint_a: EndpointStatus,
    pub endpoint_b: EndpointStatus,
    pub jumps: Vec<JumpRecord>,
    pub blowups: Vec<BlowUp>,
    pub taxonomy_case: TaxonomyCase,
    pub criteria_verdicts: Vec<AttachedVerdict>,
    pub w21_claim: bool,
    pub shape_tol: f64,
    /// The solution with detected jumps replaced by atoms.
    pub atomized: GridFunction,
}

impl RegularityReport {
    /// The report expected for the sign-flipped problem (`u -> -u`, `f -> -f`).
    pub fn mirrored_summary(&self) -> (Vec<Shape>, EndpointStatus, EndpointStatus) {
        let shapes = self
            .shapes
            .iter()
            .map(|s| match s.shape {
                Shape::Concave => Shape::Convex,
                Shape::Convex => Shape::Concave,
                other => other,
            })
            .collect();
        (shapes, self.endpoint_a.mirrored(), self.endpoint_b.mirrored())
    }
}

fn taxonomy(seq: &[Sign]) -> TaxonomyCase {
    match seq {
        [] | [Sign::Positive] => TaxonomyCase::I,
        [Sign::Negative] => TaxonomyCase::Ii,
        [Sign::Positive, Sign::Negative] => TaxonomyCase::Iii,
        [Sign::Negative, Sign::Positive] => TaxonomyCase::Iiii,
        _ => TaxonomyCase::Composite,
    }
}

struct Atom {
    cell: usize,
    height: f64,
    merged: usize,
    replacement: f64,
}

struct Atomization {
    values: Vec<f64>,
    atoms: Vec<Atom>,
    blowups: Vec<BlowUp>,
    /// Cells whose increments were replaced.
    removed: Vec<usize>,
}

fn atomize(u: &GridFunction, p: &[f64], profile: &SignProfile, p_tol: f64) -> Atomization {
    let grid = *u.grid();
    let n = grid.n();
    let h = grid.h();
    let mut inc: Vec<f64> = u.values().windows(2).map(|w| w[1] - w[0]).collect();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut blowups = Vec::new();
    let mut removed = Vec::new();
    let saturated = |k: usize| p[k].abs() >= 1.0 - p_tol;
    let existing: Vec<usize> = u.jumps().iter().map(|j| j.index).collect();

    for &c in &profile.change_points {
        let centre = grid.cell_of(c) as isize;
        let window: Vec<usize> = (centre - 2..=centre + 2)
            .filter(|k| *k >= 0 && (*k as usize) < n)
            .map(|k| k as usize)
            .filter(|k| saturated(*k) && !existing.contains(k) && !removed.contains(k))
            .collect();
        let Some(&steep) = window.iter().max_by(|a, b| inc[**a].abs().total_cmp(&inc[**b].abs())) else {
            continue;
        };
        // the steeper saturated neighbour joins when its increment has the same sign
        let partner = [steep.wrapping_sub(1), steep + 1]
            .into_iter()
            .filter(|k| window.contains(k) && inc[*k].signum() == inc[steep].signum())
            .max_by(|a, b| inc[*a].abs().total_cmp(&inc[*b].abs()));
        let first = partner.map_or(steep, |q| q.min(steep));
        let count = if partner.is_some() { 2 } else { 1 };
        if first == 0 || first >= n {
            continue;
        }
        let total: f64 = inc[first..first + count].iter().sum();
        // neighbouring slopes outside the block
        let mut neighbours = Vec::new();
        if first > 0 {
            neighbours.push(inc[first - 1]);
        }
        if first + count < n {
            neighbours.push(inc[first + count]);
        }
        let replacement = neighbours.iter().sum::<f64>() / neighbours.len().max(1) as f64;
        let height = total - replacement * count as f64;
        if height.abs() <= 10.0 * h {
            blowups.push(BlowUp { location: c, height });
            continue;
        }
        for k in first..first + count {
            inc[k] = replacement;
            removed.push(k);
        }
        atoms.push(Atom { cell: first, height, merged: count, replacement });
    }

    let mut values = Vec::with_capacity(n + 1);
    let mut acc = u.values()[0];
    values.push(acc);
    for d in &inc {
        acc += d;
        values.push(acc);
    }
    atoms.sort_by_key(|a| a.cell);
    Atomization { values, atoms, blowups, removed }
}

fn attached_verdicts(f: &CurvatureField, profile: &SignProfile, a: f64, b: f64) -> Vec<AttachedVerdict> {
    let mut out = Vec::new();
    let dom = (a, b);
    let mut push = |criterion: &str, location: f64, r: Result<CriterionVerdict, crate::criteria::CriteriaError>| {
        if let Ok(verdict) = r {
            out.push(AttachedVerdict { criterion: criterion.to_string(), location, verdict });
        }
    };
    match *f {
        CurvatureField::Constant(v) if v != 0.0 => {
            let bound = if v > 0.0 { Bound::UpperMu } else { Bound::LowerNu };
            let (ca, cb) = if v > 0.0 { (EndpointCase::J, EndpointCase::Jj) } else { (EndpointCase::Jjj, EndpointCase::Jjjj) };
            let ea = Envelope::new(a, Side::Right, v.abs(), 0.0, 0.0, bound);
            let eb = Envelope::new(b, Side::Left, v.abs(), 0.0, 0.0, bound);
            push(&format!("{ca:?}").to_lowercase(), a, endpoint_regularity(ca, &ea, dom));
            push(&format!("{cb:?}").to_lowercase(), b, endpoint_regularity(cb, &eb, dom));
        }
        CurvatureField::Step { z, left, right } if z > a && z < b && left * right < 0.0 => {
            let near = profile.change_points.iter().any(|c| (c - z).abs() <= (b - a) * 1e-2);
            if near {
                let (case, bound) = if left > 0.0 { (InteriorCase::H, Bound::UpperMu) } else { (InteriorCase::Hh, Bound::LowerNu) };
                let env = Envelope::new(z, Side::Left, left.abs(), 0.0, 0.0, bound);
                push(&format!("{case:?}").to_lowercase(), z, interior_regularity(case, &env, dom));
            }
        }
        CurvatureField::PowerSign { z, amplitude, alpha } if z > a && z < b && amplitude != 0.0 => {
            // f = A sgn(z - x) |x - z|^alpha: on the left of z it has the sign of A
            let (case, bound) =
                if amplitude > 0.0 { (InteriorCase::H, Bound::UpperMu) } else { (InteriorCase::Hh, Bound::LowerNu) };
            let env = Envelope::new(z, Side::Left, amplitude.abs(), alpha, 0.0, bound);
            push(&format!("{case:?}").to_lowercase(), z, interior_regularity(case, &env, dom));
        }
        _ => {}
    }
    out
}

/// Classifies `u` against the regularity taxonomy for the load `f(., u(.))`.
pub fn classify_solution(
    u: &GridFunction,
    f: &CurvatureField,
    p_tol: f64,
) -> Result<RegularityReport, AnalysisError> {
    let grid = *u.grid();
    let n = grid.n();
    let g = nodal_load(u, f)?;
    let profile = sign_profile_from_values(&grid, &g, default_tol(&g));
    let p = cell_momenta(u);
    // a cell straddling a jump only gets within h |g| / 2 of saturation
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let at = atomize(u, &p, &profile, p_tol.max(0.5 * grid.h() * gmax));

    let umax = u.sup_norm();
    let shape_tol = 1e-8 * umax;
    let v = &at.values;
    let touches = |i: usize| at.removed.contains(&(i - 1)) || at.removed.contains(&i)
        || u.jumps().iter().any(|j| j.index == i - 1 || j.index == i);
    let mut shapes = Vec::with_capacity(profile.intervals.len());
    for iv in &profile.intervals {
        let (mut max_d2, mut min_d2, mut count) = (f64::NEG_INFINITY, f64::INFINITY, 0usize);
        for i in 1..n {
            let x = grid.x(i);
            if x <= iv.lo || x >= iv.hi || touches(i) {
                continue;
            }
            let d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
            max_d2 = max_d2.max(d2);
            min_d2 = min_d2.min(d2);
            count += 1;
        }
        let (shape, violation) = if count == 0 {
            (Shape::Affine, 0.0)
        } else {
            let shape = if max_d2 <= shape_tol && min_d2 >= -shape_tol {
                Shape::Affine
            } else if max_d2 <= shape_tol {
                Shape::Concave
            } else if min_d2 >= -shape_tol {
                Shape::Convex
            } else {
                Shape::Mixed
            };
            let violation = match iv.sign {
                Sign::Positive => max_d2.max(0.0),
                Sign::Negative => (-min_d2).max(0.0),
                Sign::Zero => 0.0,
            };
            (shape, violation)
        };
        if violation > shape_tol {
            return Err(AnalysisError::ShapeViolation {
                lo: iv.lo,
                hi: iv.hi,
                value: if iv.sign == Sign::Positive { max_d2 } else { min_d2 },
                expected: if iv.sign == Sign::Positive { "concave".into() } else { "convex".into() },
            });
        }
        shapes.push(IntervalShape { lo: iv.lo, hi: iv.hi, sign: iv.sign, shape, max_violation: violation, nodes_checked: count });
    }

    let (pa, pb) = endpoint_momenta(u, &g);
    let endpoint_a = EndpointStatus::from_momentum(pa, p_tol);
    let endpoint_b = EndpointStatus::from_momentum(pb, p_tol);

    let mut jump_list: Vec<Jump> = u.jumps().to_vec();
    jump_list.extend(at.atoms.iter().map(|a| Jump { index: a.cell, height: a.height }));
    jump_list.sort_by_key(|j| j.index);
    let atomized = GridFunction::with_jumps(grid, at.values.clone(), jump_list)?;
    let rendered = atomized.rendered();
    let jumps: Vec<JumpRecord> = at
        .atoms
        .iter()
        .map(|a| {
            let u_left = rendered[a.cell] + 0.5 * a.replacement;
            JumpRecord {
                location: grid.mid(a.cell),
                u_left,
                u_right: u_left + a.height,
                height: a.height,
                direction: if a.height < 0.0 { JumpDirection::Down } else { JumpDirection::Up },
                cell: a.cell,
                cells_merged: a.merged,
            }
        })
        .collect();

    // direction mandates at each change point
    for j in &jumps {
        let left = profile.sign_at(j.location - grid.h());
        let right = profile.sign_at(j.location + grid.h());
        let bad = matches!(
            (left, right, j.direction),
            (Sign::Positive, Sign::Negative, JumpDirection::Up) | (Sign::Negative, Sign::Positive, JumpDirection::Down)
        );
        if bad {
            return Err(AnalysisError::JumpDirection { x: j.location, found: j.direction });
        }
    }

    let interior_saturated = p
        .iter()
        .enumerate()
        .any(|(k, q)| q.abs() >= 1.0 - p_tol && !at.removed.contains(&k) && !u.jumps().iter().any(|j| j.index == k));
    let w21_claim = jumps.is_empty()
        && !u.has_jumps()
        && at.blowups.is_empty()
        && endpoint_a.is_finite()
        && endpoint_b.is_finite()
        && !interior_saturated;

    let taxonomy_case = taxonomy(&profile.signed_sequence());
    let criteria_verdicts = attached_verdicts(f, &profile, grid.a(), grid.b());
    Ok(RegularityReport {
        sign_intervals: profile,
        shapes,
        endpoint_a,
        endpoint_b,
        jumps,
        blowups: at.blowups,
        taxonomy_case,
        criteria_verdicts,
        w21_claim,
        shape_tol,
        atomized,
    })
}
