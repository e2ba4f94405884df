//! Exhaustive ground truth for small boxed instances.
//!
//! Two independent constructions of the bilevel feasible region are offered.
//! [`enumerate_direct`] walks the `(x, y)` lattice twice per `x` and never
//! touches an LP; [`enumerate_via_phi`] computes the follower value with the
//! MILP oracle, keyed by the linking part, and filters the lattice against it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bilevel::{self, phi_slack, OracleError};
use crate::milp::{solve_milp, MilpLimits, MilpProblem, MilpStatus};
use crate::model::{dot, MiblpInstance, Point};

pub const DEFAULT_CAP: u64 = 1_000_000;

/// Tolerance for row satisfaction on lattice points.
const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EnumerationError {
    #[error("lattice has {size} points, above the cap of {cap}")]
    CapExceeded { size: u64, cap: u64 },
    #[error("every leader variable must be integer for enumeration")]
    ContinuousLeader,
    #[error("follower has continuous variables; use the representative enumeration")]
    ContinuousFollower,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationResult {
    /// Bilevel feasible points with their leader values, ordered by `x` then `y`.
    /// With continuous follower variables, one representative per integer part.
    pub feasible_set: Vec<(Point, f64)>,
    pub optimum: Option<(Point, f64)>,
    /// Follower optimum per linking assignment; `None` when infeasible.
    pub phi_table: BTreeMap<Vec<i64>, Option<f64>>,
}

/// Integer points of a box, in lexicographic order with the last index fastest.
pub fn lattice(lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let lo: Vec<i64> = lower.iter().map(|v| v.ceil() as i64).collect();
    let hi: Vec<i64> = upper.iter().map(|v| v.floor() as i64).collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        out.push(cur.iter().map(|v| *v as f64).collect());
        let mut k = cur.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
        }
    }
}

fn box_size(lower: &[f64], upper: &[f64]) -> u64 {
    lower
        .iter()
        .zip(upper)
        .map(|(l, u)| ((u.floor() - l.ceil()) as i64 + 1).max(0) as u64)
        .fold(1u64, |a, b| a.saturating_mul(b))
}

/// Number of lattice points that enumeration would visit.
pub fn lattice_size(inst: &MiblpInstance) -> u64 {
    let y_size = box_size(&inst.ly[..inst.r2], &inst.uy[..inst.r2]);
    box_size(&inst.lx, &inst.ux).saturating_mul(y_size)
}

fn check_cap(inst: &MiblpInstance, cap: u64) -> Result<(), EnumerationError> {
    if inst.r1 != inst.n1 {
        return Err(EnumerationError::ContinuousLeader);
    }
    let size = lattice_size(inst);
    if size > cap {
        return Err(EnumerationError::CapExceeded { size, cap });
    }
    Ok(())
}

fn follower_ok(inst: &MiblpInstance, x: &[f64], y: &[f64]) -> bool {
    (0..inst.m2()).all(|i| dot(&inst.a2[i], x) + dot(&inst.g2[i], y) >= inst.b2[i] - ROW_TOL)
}

fn leader_ok(inst: &MiblpInstance, x: &[f64], y: &[f64]) -> bool {
    (0..inst.m1()).all(|i| dot(&inst.a1[i], x) + dot(&inst.g1[i], y) >= inst.b1[i] - ROW_TOL)
}

fn finish(feasible_set: Vec<(Point, f64)>, phi_table: BTreeMap<Vec<i64>, Option<f64>>) -> EnumerationResult {
    let optimum = feasible_set
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned();
    EnumerationResult {
        feasible_set,
        optimum,
        phi_table,
    }
}

/// Lattice-only construction for pure-integer instances.
pub fn enumerate_direct(inst: &MiblpInstance, cap: u64) -> Result<EnumerationResult, EnumerationError> {
    check_cap(inst, cap)?;
    if inst.r2 != inst.n2 {
        return Err(EnumerationError::ContinuousFollower);
    }
    let ys = lattice(&inst.ly, &inst.uy);
    let per_x: Vec<(Vec<i64>, Option<f64>, Vec<(Point, f64)>)> = lattice(&inst.lx, &inst.ux)
        .into_par_iter()
        .map(|x| {
            let responses: Vec<&Vec<f64>> = ys.iter().filter(|y| follower_ok(inst, &x, y)).collect();
            let phi = responses.iter().map(|y| inst.follower_value(y)).fold(None, |m: Option<f64>, v| {
                Some(m.map_or(v, |m| m.min(v)))
            });
            let mut pts = Vec::new();
            if let Some(best) = phi {
                for y in responses {
                    if inst.follower_value(y) <= best + ROW_TOL && leader_ok(inst, &x, y) {
                        let p = Point::new(x.clone(), y.clone());
                        let v = inst.leader_value(&p);
                        pts.push((p, v));
                    }
                }
            }
            (inst.linking_values(&x), phi, pts)
        })
        .collect();
    let mut table = BTreeMap::new();
    let mut feasible = Vec::new();
    for (gamma, phi, pts) in per_x {
        table.insert(gamma, phi);
        feasible.extend(pts);
    }
    Ok(finish(feasible, table))
}

/// Construction through the follower value function computed by the MILP
/// oracle. Continuous follower variables are handled with one representative
/// per integer part, chosen by a lexicographic LP.
pub fn enumerate_via_phi(inst: &MiblpInstance, cap: u64) -> Result<EnumerationResult, EnumerationError> {
    check_cap(inst, cap)?;
    let limits = MilpLimits::default();
    let xs = lattice(&inst.lx, &inst.ux);
    let mut table: BTreeMap<Vec<i64>, Option<f64>> = BTreeMap::new();
    for x in &xs {
        let gamma = inst.linking_values(x);
        if let std::collections::btree_map::Entry::Vacant(e) = table.entry(gamma) {
            e.insert(bilevel::phi(inst, x, &limits)?);
        }
    }
    let y_int = lattice(&inst.ly[..inst.r2], &inst.uy[..inst.r2]);
    let per_x: Result<Vec<Vec<(Point, f64)>>, EnumerationError> = xs
        .par_iter()
        .map(|x| {
            let Some(phi) = table[&inst.linking_values(x)] else {
                return Ok(Vec::new());
            };
            let mut pts = Vec::new();
            for yi in &y_int {
                if let Some(y) = complete(inst, x, yi, phi, &limits)? {
                    let p = Point::new(x.clone(), y);
                    let v = inst.leader_value(&p);
                    pts.push((p, v));
                }
            }
            Ok(pts)
        })
        .collect();
    let feasible = per_x?.into_iter().flatten().collect();
    Ok(finish(feasible, table))
}

/// Best completion of the integer follower part `yi` that is follower
/// optimal and leader feasible, or `None`.
fn complete(inst: &MiblpInstance, x: &[f64], yi: &[f64], phi: f64, limits: &MilpLimits) -> Result<Option<Vec<f64>>, EnumerationError> {
    let r2 = inst.r2;
    if r2 == inst.n2 {
        let ok = follower_ok(inst, x, yi)
            && inst.follower_value(yi) <= phi + phi_slack(phi)
            && leader_ok(inst, x, yi);
        return Ok(ok.then(|| yi.to_vec()));
    }
    let mut p = bilevel::follower_problem(inst, x);
    for (j, v) in yi.iter().enumerate() {
        p.lp.lower[j] = *v;
        p.lp.upper[j] = *v;
    }
    p.integer.clear();
    let best = run_lp(&p, limits)?;
    let Some((_, value)) = best else {
        return Ok(None);
    };
    if value > phi + phi_slack(phi) {
        return Ok(None);
    }
    let mut lex = p.clone();
    lex.lp.objective = inst.d1.clone();
    lex.lp.rows.push(inst.d2.iter().map(|v| -v).collect());
    lex.lp.rhs.push(-(phi + phi_slack(phi)));
    for i in 0..inst.m1() {
        lex.lp.rows.push(inst.g1[i].clone());
        lex.lp.rhs.push(inst.b1[i] - dot(&inst.a1[i], x));
    }
    Ok(run_lp(&lex, limits)?.map(|(y, _)| y))
}

fn run_lp(p: &MilpProblem, limits: &MilpLimits) -> Result<Option<(Vec<f64>, f64)>, EnumerationError> {
    let r = solve_milp(p, limits).map_err(OracleError::from)?;
    match r.status {
        MilpStatus::Optimal => Ok(r.x.map(|x| (x, r.objective))),
        MilpStatus::Limit => Err(OracleError::Limit.into()),
        _ => Ok(None),
    }
}

/// Ground truth for `inst`: the direct lattice walk for pure-integer
/// followers and the value-function route otherwise.
pub fn enumerate(inst: &MiblpInstance, cap: u64) -> Result<EnumerationResult, EnumerationError> {
    if inst.r2 == inst.n2 {
        enumerate_direct(inst, cap)
    } else {
        enumerate_via_phi(inst, cap)
    }
}

/// Minimum of `coef . (x, y)` over a set of points; `+inf` when empty.
pub fn min_over(points: &[(Point, f64)], coef: &[f64]) -> f64 {
    points
        .iter()
        .map(|(p, _)| dot(coef, &p.stacked()))
        .fold(f64::INFINITY, f64::min)
}
