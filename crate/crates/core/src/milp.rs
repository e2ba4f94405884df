//! Depth-first branch and bound over the dense simplex.
//!
//! Used as the oracle for every auxiliary problem. Branching picks the most
//! fractional integer variable, breaking ties by the lowest index.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::model::EPS;
use crate::simplex::{solve_lp, LpError, LpProblem, LpStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem {
    pub lp: LpProblem,
    /// Indices of integer-constrained variables.
    pub integer: Vec<usize>,
    /// Only solutions with objective at most `cutoff - EPS` are of interest.
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilpLimits {
    pub max_nodes: usize,
    pub time_limit: Option<Duration>,
}

impl Default for MilpLimits {
    fn default() -> Self {
        MilpLimits {
            max_nodes: 200_000,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    CutoffExceeded,
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpResult {
    pub status: MilpStatus,
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    pub nodes: usize,
}

impl MilpResult {
    /// Solution and value when optimal.
    pub fn optimum(&self) -> Option<(&[f64], f64)> {
        match (self.status, &self.x) {
            (MilpStatus::Optimal, Some(x)) => Some((x, self.objective)),
            _ => None,
        }
    }
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn most_fractional(x: &[f64], integer: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in integer {
        let f = x[j] - x[j].floor();
        let dist = f.min(1.0 - f);
        if dist > EPS && best.is_none_or(|(bj, bd)| dist > bd + 1e-12 || (dist >= bd - 1e-12 && j < bj)) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

/// Solves the MILP to global optimality (or reports a limit).
pub fn solve_milp(p: &MilpProblem, limits: &MilpLimits) -> Result<MilpResult, LpError> {
    let start = Instant::now();
    let n = p.lp.num_vars();
    let mut lower = p.lp.lower.clone();
    let mut upper = p.lp.upper.clone();
    for &j in &p.integer {
        lower[j] = (lower[j] - EPS).ceil();
        upper[j] = (upper[j] + EPS).floor();
    }
    let mut stack = vec![Node { lower, upper }];
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut nodes = 0usize;
    let mut pruned_by_cutoff = false;
    let mut hit_limit = false;
    let threshold = p.cutoff.map(|k| k - EPS);
    let mut lp = p.lp.clone();

    while let Some(node) = stack.pop() {
        if nodes >= limits.max_nodes || limits.time_limit.is_some_and(|t| start.elapsed() > t) {
            hit_limit = true;
            break;
        }
        nodes += 1;
        if (0..n).any(|j| node.lower[j] > node.upper[j]) {
            continue;
        }
        lp.lower.clone_from(&node.lower);
        lp.upper.clone_from(&node.upper);
        let res = solve_lp(&lp)?;
        if res.status == LpStatus::Infeasible {
            continue;
        }
        if let Some((_, best)) = &incumbent {
            if res.objective >= best - 1e-9 {
                continue;
            }
        }
        if let Some(k) = threshold {
            if res.objective > k + 1e-9 {
                pruned_by_cutoff = true;
                continue;
            }
        }
        match most_fractional(&res.x, &p.integer) {
            None => {
                let mut x = res.x.clone();
                for &j in &p.integer {
                    x[j] = x[j].round();
                }
                let value = p.lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
                if incumbent.as_ref().is_none_or(|(_, b)| value < *b) {
                    incumbent = Some((x, value));
                }
            }
            Some(j) => {
                let v = res.x[j];
                let mut down = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                };
                down.upper[j] = v.floor();
                let mut up = node;
                up.lower[j] = v.ceil();
                // The child nearer to the LP value is explored first.
                if v - v.floor() < 0.5 {
                    stack.push(up);
                    stack.push(down);
                } else {
                    stack.push(down);
                    stack.push(up);
                }
            }
        }
    }

    let status = match (&incumbent, hit_limit) {
        (_, true) => MilpStatus::Limit,
        (Some(_), false) => MilpStatus::Optimal,
        (None, false) if pruned_by_cutoff => MilpStatus::CutoffExceeded,
        (None, false) => MilpStatus::Infeasible,
    };
    let (x, objective) = match incumbent {
        Some((x, v)) => (Some(x), v),
        None => (None, f64::INFINITY),
    };
    Ok(MilpResult {
        status,
        x,
        objective,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn problem(obj: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, integer: Vec<usize>) -> MilpProblem {
        MilpProblem {
            lp: LpProblem { objective: obj, rows, rhs, lower, upper },
            integer,
            cutoff: None,
        }
    }

    #[test]
    fn moore_bard_follower_at_two() {
        // Rows of the follower with x = 2 substituted.
        let p = problem(
            vec![1.0],
            vec![vec![-4.0], vec![-2.0], vec![1.0], vec![10.0]],
            vec![-16.0, -8.0, -11.0, 11.0],
            vec![0.0],
            vec![10.0],
            vec![0],
        );
        let r = solve_milp(&p, &MilpLimits::default()).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert_eq!(r.x.unwrap(), vec![2.0]);
        assert_eq!(r.objective, 2.0);
    }

    #[test]
    fn rounding_down_forced() {
        let p = problem(vec![-1.0], vec![vec![-1.0]], vec![-0.5], vec![0.0], vec![1.0], vec![0]);
        let r = solve_milp(&p, &MilpLimits::default()).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn integer_infeasible() {
        let p = problem(vec![0.0], vec![], vec![], vec![0.2], vec![0.8], vec![0]);
        assert_eq!(solve_milp(&p, &MilpLimits::default()).unwrap().status, MilpStatus::Infeasible);
    }

    #[test]
    fn node_limit_reported() {
        let p = problem(
            vec![-1.0, -1.0],
            vec![vec![-2.0, -2.0]],
            vec![-7.0],
            vec![0.0, 0.0],
            vec![5.0, 5.0],
            vec![0, 1],
        );
        let r = solve_milp(&p, &MilpLimits { max_nodes: 1, time_limit: None }).unwrap();
        assert_eq!(r.status, MilpStatus::Limit);
    }

    /// Exhaustive minimum over the integer lattice of the box.
    fn enumerate(p: &MilpProblem) -> Option<f64> {
        let n = p.lp.num_vars();
        let mut best: Option<f64> = None;
        let mut z: Vec<f64> = p.lp.lower.clone();
        loop {
            let ok = p.lp.rows.iter().zip(&p.lp.rhs).all(|(r, b)| r.iter().zip(&z).map(|(a, v)| a * v).sum::<f64>() >= b - 1e-9);
            if ok {
                let v: f64 = p.lp.objective.iter().zip(&z).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
            let mut k = 0;
            loop {
                if k == n {
                    return best;
                }
                if z[k] < p.lp.upper[k] {
                    z[k] += 1.0;
                    break;
                }
                z[k] = p.lp.lower[k];
                k += 1;
            }
        }
    }

    fn small_ip() -> impl Strategy<Value = MilpProblem> {
        (1usize..=5, 0usize..=5).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(-6i32..=6, n),
                prop::collection::vec(prop::collection::vec(-5i32..=5, n), m),
                prop::collection::vec(-15i32..=10, m),
                prop::collection::vec((0i32..=3, 0i32..=7), n),
            )
                .prop_map(move |(obj, rows, rhs, bounds)| MilpProblem {
                    lp: LpProblem {
                        objective: obj.into_iter().map(f64::from).collect(),
                        rows: rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect(),
                        rhs: rhs.into_iter().map(f64::from).collect(),
                        lower: bounds.iter().map(|b| f64::from(b.0)).collect(),
                        upper: bounds.iter().map(|b| f64::from((b.0 + b.1).min(10))).collect(),
                    },
                    integer: (0..n).collect(),
                    cutoff: None,
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn matches_enumeration(p in small_ip()) {
            let r = solve_milp(&p, &MilpLimits::default()).unwrap();
            match enumerate(&p) {
                None => prop_assert_eq!(r.status, MilpStatus::Infeasible),
                Some(v) => {
                    prop_assert_eq!(r.status, MilpStatus::Optimal);
                    prop_assert!((r.objective - v).abs() < 1e-7);
                    let x = r.x.unwrap();
                    prop_assert!(x.iter().all(|v| (v - v.round()).abs() < EPS));
                }
            }
        }

        #[test]
        fn cutoff_semantics(p in small_ip(), k in -20i32..20) {
            let mut q = p.clone();
            q.cutoff = Some(f64::from(k));
            let r = solve_milp(&q, &MilpLimits::default()).unwrap();
            let truth = enumerate(&p).unwrap_or(f64::INFINITY);
            let exceeded = truth > f64::from(k) - EPS;
            prop_assert_eq!(exceeded, r.status != MilpStatus::Optimal);
            if truth.is_finite() && exceeded {
                prop_assert_eq!(r.status, MilpStatus::CutoffExceeded);
            }
        }
    }
}
