//! Follower value function, optimistic reaction, feasibility verdicts and
//! the auxiliary problems that certify bilevel infeasibility.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{solve_milp, MilpLimits, MilpProblem, MilpStatus};
use crate::model::{dot, is_integral, MiblpInstance, Point, EPS};
use crate::simplex::{LpError, LpProblem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle hit its node or time limit")]
    Limit,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Proof that a point is not bilevel feasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    /// A follower solution strictly better than the point's `y`.
    ImprovingSolution { y: Vec<f64> },
    /// A step from the point's `y` that stays follower feasible and improves
    /// the follower objective. The flags mark constraints that the step
    /// cannot violate and that can be left out of the associated convex set.
    ImprovingDirection {
        dy: Vec<f64>,
        drop_rows: Vec<bool>,
        drop_lower: Vec<bool>,
        drop_upper: Vec<bool>,
    },
}

/// Result of [`check_feasibility`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    /// `x` is not integral on its integer indices or leaves its box.
    pub violates_c1: bool,
    /// `y` violates a first-level row.
    pub violates_2a: bool,
    /// `y` is not integral on its integer indices.
    pub violates_2b: bool,
    /// `y` is not an optimal follower response.
    pub violates_2c: bool,
    /// `y` violates a second-level row or its box.
    pub violates_follower_rows: bool,
    /// Follower optimum at `x`; `None` when the follower is infeasible.
    pub phi: Option<f64>,
    pub certificate: Option<Certificate>,
}

impl FeasibilityVerdict {
    pub fn is_bilevel_feasible(&self) -> bool {
        !(self.violates_c1
            || self.violates_2a
            || self.violates_2b
            || self.violates_2c
            || self.violates_follower_rows)
    }
}

/// Category of a relaxation vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    Feasible,
    /// Fractional, follower part optimal.
    C1,
    /// Fractional, follower part suboptimal.
    C2,
    /// Integral, follower part suboptimal.
    C3,
}

/// Proof that the fixed-linking problem was solved for `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct UbEvidence {
    gamma: Vec<i64>,
    value: Option<f64>,
}

impl UbEvidence {
    pub fn gamma(&self) -> &[i64] {
        &self.gamma
    }

    /// Best bilevel value with `x_L = gamma`, `None` if there is none.
    pub fn value(&self) -> Option<f64> {
        self.value
    }
}

/// Outcome of the fixed-linking problem.
#[derive(Debug, Clone, PartialEq)]
pub struct UbOutcome {
    pub solution: Option<(Point, f64)>,
    pub evidence: UbEvidence,
}

/// Slack added to `phi` when it is used as an upper bound on `d2 y`.
pub fn phi_slack(phi: f64) -> f64 {
    EPS * phi.abs().max(1.0)
}

fn run(p: &MilpProblem, limits: &MilpLimits) -> Result<Option<(Vec<f64>, f64)>, OracleError> {
    let r = solve_milp(p, limits)?;
    match r.status {
        MilpStatus::Optimal => Ok(r.x.map(|x| (x, r.objective))),
        MilpStatus::Infeasible | MilpStatus::CutoffExceeded => Ok(None),
        MilpStatus::Limit => Err(OracleError::Limit),
    }
}

/// Follower MILP at `x`: `min d2 y` over `g2 y >= b2 - a2 x`, the `y` box and `Y`.
pub fn follower_problem(inst: &MiblpInstance, x: &[f64]) -> MilpProblem {
    let rhs = (0..inst.m2()).map(|i| inst.b2[i] - dot(&inst.a2[i], x)).collect();
    MilpProblem {
        lp: LpProblem {
            objective: inst.d2.clone(),
            rows: inst.g2.clone(),
            rhs,
            lower: inst.ly.clone(),
            upper: inst.uy.clone(),
        },
        integer: (0..inst.r2).collect(),
        cutoff: None,
    }
}

/// Follower optimum and one optimal response at `x`, or `None` if infeasible.
pub fn solve_follower(inst: &MiblpInstance, x: &[f64], limits: &MilpLimits) -> Result<Option<(Vec<f64>, f64)>, OracleError> {
    run(&follower_problem(inst, x), limits)
}

/// Value function of the follower at `x`; `None` stands for `+inf`.
pub fn phi(inst: &MiblpInstance, x: &[f64], limits: &MilpLimits) -> Result<Option<f64>, OracleError> {
    Ok(solve_follower(inst, x, limits)?.map(|(_, v)| v))
}

/// Optimistic reaction with a known follower optimum `phi_value`.
pub fn reaction_given_phi(
    inst: &MiblpInstance,
    x: &[f64],
    phi_value: f64,
    limits: &MilpLimits,
) -> Result<Option<Vec<f64>>, OracleError> {
    let mut p = follower_problem(inst, x);
    p.lp.objective = inst.d1.clone();
    p.lp.rows.push(inst.d2.iter().map(|v| -v).collect());
    p.lp.rhs.push(-(phi_value + phi_slack(phi_value)));
    for i in 0..inst.m1() {
        p.lp.rows.push(inst.g1[i].clone());
        p.lp.rhs.push(inst.b1[i] - dot(&inst.a1[i], x));
    }
    Ok(run(&p, limits)?.map(|(y, _)| y))
}

/// Leader-preferred follower response at `x`, or `None` if there is none.
pub fn reaction(inst: &MiblpInstance, x: &[f64], limits: &MilpLimits) -> Result<Option<Vec<f64>>, OracleError> {
    match phi(inst, x, limits)? {
        None => Ok(None),
        Some(v) => reaction_given_phi(inst, x, v, limits),
    }
}

/// Checks the bilevel feasibility conditions for `p`.
///
/// The follower value is always evaluated, also at fractional `x`, so that
/// condition 2c and a certificate are available for any point.
pub fn check_feasibility(inst: &MiblpInstance, p: &Point, limits: &MilpLimits) -> Result<FeasibilityVerdict, OracleError> {
    let violates_c1 = (0..inst.n1).any(|j| {
        (j < inst.r1 && !is_integral(p.x[j])) || p.x[j] < inst.lx[j] - EPS || p.x[j] > inst.ux[j] + EPS
    });
    let violates_2a = inst.leader_slacks(&p.x, &p.y).iter().any(|s| *s < -EPS);
    let violates_2b = (0..inst.r2).any(|j| !is_integral(p.y[j]));
    let violates_follower_rows = inst.follower_slacks(&p.x, &p.y).iter().any(|s| *s < -EPS)
        || (0..inst.n2).any(|j| p.y[j] < inst.ly[j] - EPS || p.y[j] > inst.uy[j] + EPS);
    let follower = solve_follower(inst, &p.x, limits)?;
    let phi_value = follower.as_ref().map(|(_, v)| *v);
    let dy = inst.follower_value(&p.y);
    let violates_2c = phi_value.is_some_and(|v| dy > v + phi_slack(v) + 1e-9);
    let certificate = if violates_2c {
        let (y_opt, v) = follower.expect("phi is finite");
        let preferred = if violates_c1 {
            None
        } else {
            reaction_given_phi(inst, &p.x, v, limits)?
        };
        Some(Certificate::ImprovingSolution {
            y: preferred.unwrap_or(y_opt),
        })
    } else {
        None
    };
    Ok(FeasibilityVerdict {
        violates_c1,
        violates_2a,
        violates_2b,
        violates_2c,
        violates_follower_rows,
        phi: phi_value,
        certificate,
    })
}

/// Assigns a relaxation vertex to one of the categories C1, C2, C3.
pub fn classify_relaxation_solution(inst: &MiblpInstance, p: &Point, limits: &MilpLimits) -> Result<Category, OracleError> {
    let integral = (0..inst.r1).all(|j| is_integral(p.x[j])) && (0..inst.r2).all(|j| is_integral(p.y[j]));
    let suboptimal = match phi(inst, &p.x, limits)? {
        Some(v) => inst.follower_value(&p.y) > v + EPS,
        None => false,
    };
    Ok(match (integral, suboptimal) {
        (true, false) => Category::Feasible,
        (false, false) => Category::C1,
        (false, true) => Category::C2,
        (true, true) => Category::C3,
    })
}

/// `x` with linking part `gamma` and every other entry at its lower bound.
pub fn x_with_linking(inst: &MiblpInstance, gamma: &[i64]) -> Vec<f64> {
    let mut x = inst.lx.clone();
    for (&j, &g) in inst.linking.iter().zip(gamma) {
        x[j] = g as f64;
    }
    x
}

/// The relaxation `S` of the bilevel problem as an MILP over `(x, y)`.
pub fn relaxation_milp(inst: &MiblpInstance, objective: Vec<f64>) -> MilpProblem {
    let (rows, rhs) = inst.relaxation_rows();
    let mask = inst.integer_mask();
    MilpProblem {
        lp: LpProblem {
            objective,
            rows,
            rhs,
            lower: inst.lower_bounds(),
            upper: inst.upper_bounds(),
        },
        integer: (0..mask.len()).filter(|&j| mask[j]).collect(),
        cutoff: None,
    }
}

/// Best bilevel feasible solution with linking part fixed to `gamma`.
pub fn best_ub(inst: &MiblpInstance, gamma: &[i64], limits: &MilpLimits) -> Result<UbOutcome, OracleError> {
    let infeasible = |gamma: &[i64]| UbOutcome {
        solution: None,
        evidence: UbEvidence {
            gamma: gamma.to_vec(),
            value: None,
        },
    };
    let in_box = inst
        .linking
        .iter()
        .zip(gamma)
        .all(|(&j, &g)| (g as f64) >= inst.lx[j] - EPS && (g as f64) <= inst.ux[j] + EPS);
    if !in_box {
        return Ok(infeasible(gamma));
    }
    let x_fixed = x_with_linking(inst, gamma);
    let Some(phi_value) = phi(inst, &x_fixed, limits)? else {
        return Ok(infeasible(gamma));
    };
    let objective: Vec<f64> = inst.c.iter().chain(&inst.d1).copied().collect();
    let mut p = relaxation_milp(inst, objective);
    for (&j, &g) in inst.linking.iter().zip(gamma) {
        p.lp.lower[j] = g as f64;
        p.lp.upper[j] = g as f64;
    }
    let mut row = vec![0.0; inst.n1];
    row.extend(inst.d2.iter().map(|v| -v));
    p.lp.rows.push(row);
    p.lp.rhs.push(-(phi_value + phi_slack(phi_value)));
    match run(&p, limits)? {
        None => Ok(infeasible(gamma)),
        Some((z, v)) => Ok(UbOutcome {
            solution: Some((Point::from_stacked(&z, inst.n1), v)),
            evidence: UbEvidence {
                gamma: gamma.to_vec(),
                value: Some(v),
            },
        }),
    }
}

/// Searches for an integral improving direction at `p`, maximising the
/// number of constraints that the step leaves untouched.
///
/// Columns: `dy` (n2), `w` (m2), `v` (n2, lower-bound drops), `u` (n2,
/// upper-bound drops). The objective maximises `sum w + sum v + sum u`.
pub fn find_improving_direction(inst: &MiblpInstance, p: &Point, limits: &MilpLimits) -> Result<Option<Certificate>, OracleError> {
    let n2 = inst.n2;
    let m2 = inst.m2();
    let nv = n2 + m2 + 2 * n2;
    let (w0, v0, u0) = (n2, n2 + m2, n2 + m2 + n2);
    let lo: Vec<f64> = (0..n2).map(|j| inst.ly[j] - p.y[j]).collect();
    let hi: Vec<f64> = (0..n2).map(|j| inst.uy[j] - p.y[j]).collect();
    let mut lower = vec![0.0; nv];
    let mut upper = vec![0.0; nv];
    for j in 0..n2 {
        lower[j] = lo[j];
        upper[j] = hi[j];
        lower[v0 + j] = lo[j].min(0.0);
        lower[u0 + j] = (-hi[j]).min(0.0);
    }
    for i in 0..m2 {
        let least: f64 = (0..n2).map(|j| (inst.g2[i][j] * lo[j]).min(inst.g2[i][j] * hi[j])).sum();
        lower[w0 + i] = least.min(0.0);
    }
    let mut objective = vec![0.0; nv];
    for v in objective.iter_mut().skip(w0) {
        *v = -1.0;
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut row = vec![0.0; nv];
    for j in 0..n2 {
        row[j] = -inst.d2[j];
    }
    rows.push(row);
    rhs.push(1.0);
    let slacks = inst.follower_slacks(&p.x, &p.y);
    for i in 0..m2 {
        let mut row = vec![0.0; nv];
        row[..n2].copy_from_slice(&inst.g2[i]);
        rows.push(row.clone());
        rhs.push(-slacks[i]);
        row[w0 + i] = -1.0;
        rows.push(row);
        rhs.push(0.0);
    }
    for j in 0..n2 {
        let mut row = vec![0.0; nv];
        row[j] = 1.0;
        row[v0 + j] = -1.0;
        rows.push(row);
        rhs.push(0.0);
        let mut row = vec![0.0; nv];
        row[j] = -1.0;
        row[u0 + j] = -1.0;
        rows.push(row);
        rhs.push(0.0);
    }
    let problem = MilpProblem {
        lp: LpProblem {
            objective,
            rows,
            rhs,
            lower,
            upper,
        },
        integer: (0..inst.r2).collect(),
        cutoff: None,
    };
    let Some((z, _)) = run(&problem, limits)? else {
        return Ok(None);
    };
    let dy: Vec<f64> = z[..n2].to_vec();
    let drop_rows = (0..m2).map(|i| dot(&inst.g2[i], &dy) >= -1e-9).collect();
    let drop_lower = dy.iter().map(|v| *v >= -1e-9).collect();
    let drop_upper = dy.iter().map(|v| *v <= 1e-9).collect();
    Ok(Some(Certificate::ImprovingDirection {
        dy,
        drop_rows,
        drop_lower,
        drop_upper,
    }))
}

/// Maximum of `coef_x . x + coef_y . y` over the relaxation `S`, `None` if empty.
pub fn max_over_relaxation(inst: &MiblpInstance, coef_x: &[f64], coef_y: &[f64], limits: &MilpLimits) -> Result<Option<f64>, OracleError> {
    let objective = coef_x.iter().chain(coef_y).map(|v| -v).collect();
    Ok(run(&relaxation_milp(inst, objective), limits)?.map(|(_, v)| -v))
}

/// Big-M for the binary Benders cut: `max{d2 y : (x,y) in S} - d2 y*`, at least 0.
pub fn compute_big_m(inst: &MiblpInstance, y_star: &[f64], limits: &MilpLimits) -> Result<f64, OracleError> {
    let top = max_over_relaxation(inst, &vec![0.0; inst.n1], &inst.d2, limits)?;
    Ok(big_m_from_max(top, inst.follower_value(y_star)))
}

/// Big-M from a precomputed maximum of the follower objective over `S`.
pub fn big_m_from_max(max_value: Option<f64>, follower_value: f64) -> f64 {
    max_value.map_or(0.0, |t| (t - follower_value).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{knapsack_interdiction_toy, moore_bard, moore_bard_with_leader};
    use proptest::prelude::*;

    fn lim() -> MilpLimits {
        MilpLimits::default()
    }

    #[test]
    fn phi_examples() {
        let mb = moore_bard();
        assert_eq!(phi(&mb, &[2.0], &lim()).unwrap(), Some(2.0));
        assert_eq!(phi(&mb, &[3.0], &lim()).unwrap(), Some(1.0));
        assert_eq!(phi(&mb, &[0.0], &lim()).unwrap(), None);
    }

    #[test]
    fn reaction_examples() {
        let mb = moore_bard();
        assert_eq!(reaction(&mb, &[2.0], &lim()).unwrap(), Some(vec![2.0]));
        assert_eq!(reaction(&mb, &[0.0], &lim()).unwrap(), None);
    }

    #[test]
    fn reaction_breaks_ties_for_the_leader() {
        let mut inst = moore_bard();
        // Two follower variables with equal follower value; y0 + y1 >= 1.
        inst.n2 = 2;
        inst.r2 = 2;
        inst.d1 = vec![1.0, 2.0];
        inst.d2 = vec![0.0, 0.0];
        inst.a2 = vec![vec![1.0]];
        inst.g2 = vec![vec![1.0, 1.0]];
        inst.b2 = vec![1.0];
        inst.ly = vec![0.0, 0.0];
        inst.uy = vec![1.0, 1.0];
        inst.a2 = vec![vec![0.0]];
        inst.linking = vec![];
        let y = reaction(&inst, &[0.0], &lim()).unwrap().unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
    }

    #[test]
    fn feasibility_examples() {
        let mb = moore_bard();
        let v = check_feasibility(&mb, &Point::new(vec![2.0], vec![4.0]), &lim()).unwrap();
        assert!(v.violates_2c && !v.violates_c1);
        assert_eq!(v.phi, Some(2.0));
        assert_eq!(v.certificate, Some(Certificate::ImprovingSolution { y: vec![2.0] }));
        let v = check_feasibility(&mb, &Point::new(vec![2.0], vec![2.0]), &lim()).unwrap();
        assert!(v.is_bilevel_feasible());
        let v = check_feasibility(&mb, &Point::new(vec![1.5], vec![2.0]), &lim()).unwrap();
        assert!(v.violates_c1);
        // At x = 1.5 the follower needs 10y >= 12, 4y <= 13.5, so y = 2 is optimal.
        assert_eq!(v.phi, Some(2.0));
        assert!(!v.violates_2c);
    }

    #[test]
    fn classification_examples() {
        let mb = moore_bard();
        assert_eq!(classify_relaxation_solution(&mb, &Point::new(vec![2.0], vec![4.0]), &lim()).unwrap(), Category::C3);
        assert_eq!(classify_relaxation_solution(&mb, &Point::new(vec![2.0], vec![2.0]), &lim()).unwrap(), Category::Feasible);
        let modified = moore_bard_with_leader(3.0, -1.0);
        assert_eq!(
            classify_relaxation_solution(&modified, &Point::new(vec![0.0], vec![1.5]), &lim()).unwrap(),
            Category::C1
        );
    }

    #[test]
    fn best_ub_examples() {
        let mb = moore_bard();
        let out = best_ub(&mb, &[2], &lim()).unwrap();
        assert_eq!(out.solution, Some((Point::new(vec![2.0], vec![2.0]), -22.0)));
        let out = best_ub(&mb, &[8], &lim()).unwrap();
        assert_eq!(out.solution, Some((Point::new(vec![8.0], vec![1.0]), -18.0)));
        let out = best_ub(&mb, &[0], &lim()).unwrap();
        assert_eq!(out.solution, None);
        assert_eq!(out.evidence.gamma(), &[0]);
    }

    #[test]
    fn improving_direction_examples() {
        let mb = moore_bard();
        let cert = find_improving_direction(&mb, &Point::new(vec![2.0], vec![4.0]), &lim()).unwrap();
        match cert {
            Some(Certificate::ImprovingDirection { dy, drop_rows, drop_lower, drop_upper }) => {
                assert_eq!(dy, vec![-1.0]);
                assert_eq!(drop_rows, vec![true, true, false, false]);
                assert_eq!(drop_lower, vec![false]);
                assert_eq!(drop_upper, vec![true]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let modified = moore_bard_with_leader(3.0, -1.0);
        assert_eq!(find_improving_direction(&modified, &Point::new(vec![0.0], vec![1.5]), &lim()).unwrap(), None);
        let mut flat = moore_bard();
        flat.d2 = vec![0.0];
        assert_eq!(find_improving_direction(&flat, &Point::new(vec![2.0], vec![4.0]), &lim()).unwrap(), None);
    }

    #[test]
    fn big_m_examples() {
        let mb = moore_bard();
        assert_eq!(compute_big_m(&mb, &[2.0], &lim()).unwrap(), 2.0);
        let mut flat = moore_bard();
        flat.d2 = vec![0.0];
        assert_eq!(compute_big_m(&flat, &[2.0], &lim()).unwrap(), 0.0);
        assert_eq!(big_m_from_max(Some(5.0), 3.0), 2.0);
    }

    #[test]
    fn interdiction_toy_follower() {
        let toy = knapsack_interdiction_toy();
        assert_eq!(phi(&toy, &[0.0, 0.0], &lim()).unwrap(), Some(-3.0));
        assert_eq!(phi(&toy, &[1.0, 0.0], &lim()).unwrap(), Some(-2.0));
        assert_eq!(reaction(&toy, &[1.0, 0.0], &lim()).unwrap(), Some(vec![0.0, 1.0]));
    }

    fn random_instance() -> impl Strategy<Value = MiblpInstance> {
        (
            prop::collection::vec((-4i32..=4, -4i32..=4, -4i32..=4, -6i32..=6), 2..4),
            prop::collection::vec(-3i32..=3, 2),
        )
            .prop_map(|(rows, d2)| {
                let mut inst = moore_bard();
                inst.n1 = 2;
                inst.r1 = 1;
                inst.n2 = 2;
                inst.r2 = 2;
                inst.c = vec![1.0, 1.0];
                inst.d1 = vec![1.0, -1.0];
                inst.d2 = d2.into_iter().map(f64::from).collect();
                inst.a2 = rows.iter().map(|r| vec![f64::from(r.0), 0.0]).collect();
                inst.g2 = rows.iter().map(|r| vec![f64::from(r.1), f64::from(r.2)]).collect();
                inst.b2 = rows.iter().map(|r| f64::from(r.3)).collect();
                inst.lx = vec![0.0, 0.0];
                inst.ux = vec![3.0, 3.0];
                inst.ly = vec![0.0, 0.0];
                inst.uy = vec![3.0, 3.0];
                inst.linking = crate::model::linking_set(&inst);
                inst
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn phi_depends_only_on_linking_part(inst in random_instance(), x0 in 0i32..=3, a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let v1 = phi(&inst, &[f64::from(x0), a], &lim()).unwrap();
            let v2 = phi(&inst, &[f64::from(x0), b], &lim()).unwrap();
            prop_assert_eq!(v1, v2);
        }

        #[test]
        fn certificates_satisfy_their_definitions(inst in random_instance(), x0 in 0i32..=3, y0 in 0i32..=6, y1 in 0i32..=6) {
            let p = Point::new(vec![f64::from(x0), 0.0], vec![f64::from(y0) / 2.0, f64::from(y1) / 2.0]);
            let verdict = check_feasibility(&inst, &p, &lim()).unwrap();
            if let Some(Certificate::ImprovingSolution { y }) = &verdict.certificate {
                prop_assert!(inst.follower_slacks(&p.x, y).iter().all(|s| *s >= -EPS));
                prop_assert!(y.iter().all(|v| is_integral(*v)));
                prop_assert!(inst.follower_value(&p.y) > inst.follower_value(y));
            }
            if verdict.violates_2c && verdict.phi.is_some() {
                prop_assert!(verdict.certificate.is_some());
            }
            if let Some(Certificate::ImprovingDirection { dy, .. }) = find_improving_direction(&inst, &p, &lim()).unwrap() {
                prop_assert!(inst.follower_value(&dy) <= -1.0 + 1e-9);
                let moved: Vec<f64> = p.y.iter().zip(&dy).map(|(a, b)| a + b).collect();
                prop_assert!(inst.follower_slacks(&p.x, &moved).iter().all(|s| *s >= -1e-7));
                prop_assert!(moved.iter().zip(&inst.ly).all(|(v, l)| *v >= l - 1e-9));
                prop_assert!(moved.iter().zip(&inst.uy).all(|(v, u)| *v <= u + 1e-9));
            }
        }
    }
}
