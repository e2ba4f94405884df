//! Right-hand-side strength of a single cut, measured against the exact
//! feasible region of a small instance.

use serde::Serialize;

use super::FrontendError;
use crate::bruteforce::enumerate;
use crate::cuts::Cut;
use crate::model::{MiblpInstance, Point};
use crate::simplex::{solve_lp, LpProblem, LpStatus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhsDiagnosis {
    pub orig_rhs: f64,
    /// Smallest cut left-hand side over the feasible points in the cut's
    /// scope; infinite when the scope holds no feasible point.
    pub best_rhs: f64,
    pub obj_before: f64,
    pub obj_after_orig: f64,
    pub obj_after_best: f64,
}

fn root_lp(inst: &MiblpInstance) -> LpProblem {
    let (rows, rhs) = inst.relaxation_rows();
    LpProblem {
        objective: inst.c.iter().chain(&inst.d1).copied().collect(),
        rows,
        rhs,
        lower: inst.lower_bounds(),
        upper: inst.upper_bounds(),
    }
}

fn lp_value(lp: &LpProblem) -> Result<f64, FrontendError> {
    let res = solve_lp(lp)?;
    Ok(match res.status {
        LpStatus::Optimal => res.objective,
        LpStatus::Infeasible => f64::INFINITY,
    })
}

fn with_cut(lp: &LpProblem, cut: &Cut, rhs: f64) -> LpProblem {
    let mut out = lp.clone();
    out.rows.push(cut.coefficients());
    out.rhs.push(rhs);
    out
}

/// Compares `cut`'s right-hand side with the best one valid for its scope
/// and reports the root relaxation value under each.
pub fn diagnose_rhs_strength(inst: &MiblpInstance, cut: &Cut, cap: u64) -> Result<RhsDiagnosis, FrontendError> {
    let region = enumerate(inst, cap)?;
    let best_rhs = region
        .feasible_set
        .iter()
        .map(|(p, _): &(Point, f64)| p)
        .filter(|p| cut.scope.covers(inst, p))
        .map(|p| cut.lhs(&p.x, &p.y))
        .fold(f64::INFINITY, f64::min);
    let lp = root_lp(inst);
    let obj_after_best = if best_rhs.is_finite() {
        lp_value(&with_cut(&lp, cut, best_rhs))?
    } else {
        f64::INFINITY
    };
    Ok(RhsDiagnosis {
        orig_rhs: cut.beta,
        best_rhs,
        obj_before: lp_value(&lp)?,
        obj_after_orig: lp_value(&with_cut(&lp, cut, cut.beta))?,
        obj_after_best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::{CutClass, CutScope};
    use crate::model::moore_bard;

    fn cut(ax: f64, ay: f64, beta: f64, scope: CutScope) -> Cut {
        Cut {
            alpha_x: vec![ax],
            alpha_y: vec![ay],
            beta,
            scope,
            origin: CutClass::IntegerNoGood,
            geometry: None,
        }
    }

    #[test]
    fn no_good_on_mb() {
        let d = diagnose_rhs_strength(&moore_bard(), &cut(2.0, -3.0, -7.0, CutScope::Global), 10_000).unwrap();
        assert_eq!(d.orig_rhs, -7.0);
        assert_eq!(d.best_rhs, -4.0);
        assert!(d.obj_after_orig >= d.obj_before - 1e-9);
        assert!(d.obj_after_best >= d.obj_after_orig - 1e-9);
    }

    #[test]
    fn empty_scope_prunes() {
        let d = diagnose_rhs_strength(&moore_bard(), &cut(0.0, 1.0, 0.0, CutScope::Improving { incumbent: -22.0 }), 10_000).unwrap();
        assert_eq!(d.best_rhs, f64::INFINITY);
        assert_eq!(d.obj_after_best, f64::INFINITY);
    }

    #[test]
    fn linking_excluding_may_exceed_best() {
        // (1,2) is feasible and in scope, so the tightest valid bound is y <= 2.
        let c = cut(0.0, -1.0, -1.0, CutScope::LinkingExcluding(vec![2]));
        let d = diagnose_rhs_strength(&moore_bard(), &c, 10_000).unwrap();
        assert_eq!(d.best_rhs, -2.0);
        assert!(d.orig_rhs > d.best_rhs);
    }
}
