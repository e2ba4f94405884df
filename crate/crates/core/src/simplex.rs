//! Dense two-phase tableau simplex for box-bounded LPs with `>=` rows.
//!
//! Each structural variable `z_j` is shifted to `z'_j = z_j - l_j >= 0` and
//! gets an explicit upper-bound row `z'_j + t_j = u_j - l_j`. Every `>=` row
//! gets a surplus `s_i`. The nonbasic columns of an optimal tableau therefore
//! correspond one-to-one with binding inequalities: a lower bound (`z'_j`),
//! a constraint row (`s_i`) or an upper bound (`t_j`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const PHASE_ONE_TOL: f64 = 1e-7;
const DEGENERATE_SWITCH: usize = 30;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("bound of variable {0} is not finite")]
    InfiniteBound(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// `min objective . z` subject to `rows z >= rhs` and `lower <= z <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension("bounds".into()));
        }
        if self.rows.len() != self.rhs.len() || self.rows.iter().any(|r| r.len() != n) {
            return Err(LpError::Dimension("rows".into()));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || !self.upper[j].is_finite() {
                return Err(LpError::InfiniteBound(j));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// The binding inequality represented by a nonbasic column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nonbasic {
    /// `z_j >= lower_j` is binding.
    AtLower(usize),
    /// `z_j <= upper_j` is binding.
    AtUpper(usize),
    /// Row `i` holds with equality.
    Row(usize),
}

/// Basic/nonbasic partition of an optimal tableau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    /// Standard-form column index basic in each tableau row.
    pub basic: Vec<usize>,
    /// Nonbasic columns, each naming the inequality it keeps binding.
    pub nonbasic: Vec<Nonbasic>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Option<Basis>,
    /// For each nonbasic column, the change of `z` per unit increase of that
    /// column's slack. Aligned with `basis.nonbasic`.
    pub directions: Vec<Vec<f64>>,
}

impl LpResult {
    fn infeasible(n: usize) -> Self {
        LpResult {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::INFINITY,
            basis: None,
            directions: Vec::new(),
        }
    }
}

/// One binding inequality `coef . z >= rhs` of a cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingRow {
    pub coef: Vec<f64>,
    pub rhs: f64,
    pub kind: Nonbasic,
}

impl BindingRow {
    /// Value of the slack `coef . z - rhs`.
    pub fn slack(&self, z: &[f64]) -> f64 {
        self.coef.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() - self.rhs
    }
}

/// Simplicial cone at an LP vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeRays {
    pub vertex: Vec<f64>,
    /// One direction per binding row, scaled to unit infinity norm.
    pub rays: Vec<Vec<f64>>,
    pub binding_rows: Vec<BindingRow>,
}

impl ConeRays {
    pub fn dim(&self) -> usize {
        self.vertex.len()
    }

    /// Increase of binding row `k`'s slack per unit step along ray `k`.
    pub fn ray_rate(&self, k: usize) -> f64 {
        let row = &self.binding_rows[k];
        row.coef.iter().zip(&self.rays[k]).map(|(a, b)| a * b).sum()
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                    if v.abs() < 1e-13 {
                        *v = 0.0;
                    }
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs primal simplex on the current cost row over `allowed` columns.
    fn optimize(&mut self, allowed: &[bool]) -> Result<(), LpError> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        for _ in 0..MAX_ITERATIONS {
            let entering = if bland {
                (0..self.width).find(|&c| allowed[c] && self.cost[c] < -COST_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for c in 0..self.width {
                    if allowed[c] && self.cost[c] < -COST_TOL && best.is_none_or(|(_, v)| self.cost[c] < v) {
                        best = Some((c, self.cost[c]));
                    }
                }
                best.map(|(c, _)| c)
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - 1e-12 || (ratio <= bv + 1e-12 && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Numerical("unbounded direction in a bounded problem".into()));
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_SWITCH {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
        Err(LpError::Numerical("iteration limit reached".into()))
    }
}

/// Solves an LP and returns an optimal basic solution with its basis.
pub fn solve_lp(p: &LpProblem) -> Result<LpResult, LpError> {
    p.validate()?;
    let n = p.num_vars();
    let m = p.rows.len();
    if (0..n).any(|j| p.lower[j] > p.upper[j] + 1e-12) {
        return Ok(LpResult::infeasible(n));
    }

    // Column layout: z' (n) | s (m) | t (n) | artificials.
    let s0 = n;
    let t0 = n + m;
    let shifted: Vec<f64> = (0..m)
        .map(|i| p.rhs[i] - p.rows[i].iter().zip(&p.lower).map(|(a, l)| a * l).sum::<f64>())
        .collect();
    let needs_art: Vec<usize> = (0..m).filter(|&i| shifted[i] > 0.0).collect();
    let art0 = n + m + n;
    let width = art0 + needs_art.len();
    let mut rows = Vec::with_capacity(m + n);
    let mut basis = Vec::with_capacity(m + n);
    let mut art_of_row = vec![None; m];
    for (k, &i) in needs_art.iter().enumerate() {
        art_of_row[i] = Some(art0 + k);
    }
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        match art_of_row[i] {
            Some(a) => {
                row[..n].copy_from_slice(&p.rows[i]);
                row[s0 + i] = -1.0;
                row[a] = 1.0;
                row[width] = shifted[i];
                basis.push(a);
            }
            None => {
                for j in 0..n {
                    row[j] = -p.rows[i][j];
                }
                row[s0 + i] = 1.0;
                row[width] = -shifted[i];
                basis.push(s0 + i);
            }
        }
        rows.push(row);
    }
    for j in 0..n {
        let mut row = vec![0.0; width + 1];
        row[j] = 1.0;
        row[t0 + j] = 1.0;
        row[width] = (p.upper[j] - p.lower[j]).max(0.0);
        rows.push(row);
        basis.push(t0 + j);
    }
    let mut tab = Tableau {
        rows,
        cost: vec![0.0; width + 1],
        basis,
        width,
    };

    if !needs_art.is_empty() {
        for c in art0..width {
            tab.cost[c] = 1.0;
        }
        for (r, &b) in tab.basis.clone().iter().enumerate() {
            if b >= art0 {
                let row = tab.rows[r].clone();
                for (v, rv) in tab.cost.iter_mut().zip(&row) {
                    *v -= rv;
                }
            }
        }
        let all = vec![true; width];
        tab.optimize(&all)?;
        let infeasibility: f64 = (0..tab.rows.len())
            .filter(|&r| tab.basis[r] >= art0)
            .map(|r| tab.rhs(r))
            .sum();
        if infeasibility > PHASE_ONE_TOL {
            return Ok(LpResult::infeasible(n));
        }
        for r in 0..tab.rows.len() {
            if tab.basis[r] >= art0 {
                let col = (0..art0)
                    .filter(|&c| tab.rows[r][c].abs() > PIVOT_TOL)
                    .max_by(|&a, &b| tab.rows[r][a].abs().total_cmp(&tab.rows[r][b].abs()));
                match col {
                    Some(c) => tab.pivot(r, c),
                    None => return Err(LpError::Numerical("artificial column stuck in basis".into())),
                }
            }
        }
    }

    // Phase two.
    let mut cost = vec![0.0; width + 1];
    cost[..n].copy_from_slice(&p.objective);
    for r in 0..tab.rows.len() {
        let b = tab.basis[r];
        let cb = if b < n { p.objective[b] } else { 0.0 };
        if cb != 0.0 {
            for (v, rv) in cost.iter_mut().zip(&tab.rows[r]) {
                *v -= cb * rv;
            }
        }
    }
    for &b in &tab.basis {
        cost[b] = 0.0;
    }
    tab.cost = cost;
    let allowed: Vec<bool> = (0..width).map(|c| c < art0).collect();
    tab.optimize(&allowed)?;

    let mut shifted_x = vec![0.0; n];
    let mut row_of = vec![None; width];
    for (r, &b) in tab.basis.iter().enumerate() {
        row_of[b] = Some(r);
        if b < n {
            shifted_x[b] = tab.rhs(r).max(0.0);
        }
    }
    let x: Vec<f64> = (0..n)
        .map(|j| (p.lower[j] + shifted_x[j]).clamp(p.lower[j], p.upper[j]))
        .collect();
    let objective = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    let mut nonbasic = Vec::with_capacity(n);
    let mut directions = Vec::with_capacity(n);
    for c in 0..art0 {
        if row_of[c].is_some() {
            continue;
        }
        let kind = if c < n {
            Nonbasic::AtLower(c)
        } else if c < t0 {
            Nonbasic::Row(c - s0)
        } else {
            Nonbasic::AtUpper(c - t0)
        };
        let mut d = vec![0.0; n];
        if c < n {
            d[c] = 1.0;
        }
        for j in 0..n {
            if let Some(r) = row_of[j] {
                d[j] = -tab.rows[r][c];
            }
        }
        nonbasic.push(kind);
        directions.push(d);
    }
    if nonbasic.len() != n {
        return Err(LpError::Numerical("basis does not have the expected size".into()));
    }
    Ok(LpResult {
        status: LpStatus::Optimal,
        x,
        objective,
        basis: Some(Basis {
            basic: tab.basis.clone(),
            nonbasic,
        }),
        directions,
    })
}

/// Builds the simplicial cone of binding inequalities at an optimal vertex.
pub fn extract_cone(p: &LpProblem, r: &LpResult) -> Option<ConeRays> {
    let basis = r.basis.as_ref()?;
    let n = p.num_vars();
    let mut rays = Vec::with_capacity(n);
    let mut binding_rows = Vec::with_capacity(n);
    for (kind, dir) in basis.nonbasic.iter().zip(&r.directions) {
        let norm = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ray: Vec<f64> = dir
            .iter()
            .map(|v| {
                let s = v / norm;
                if s.abs() < 1e-12 {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        let row = match *kind {
            Nonbasic::AtLower(j) => {
                let mut coef = vec![0.0; n];
                coef[j] = 1.0;
                BindingRow { coef, rhs: p.lower[j], kind: *kind }
            }
            Nonbasic::AtUpper(j) => {
                let mut coef = vec![0.0; n];
                coef[j] = -1.0;
                BindingRow { coef, rhs: -p.upper[j], kind: *kind }
            }
            Nonbasic::Row(i) => BindingRow {
                coef: p.rows[i].clone(),
                rhs: p.rhs[i],
                kind: *kind,
            },
        };
        rays.push(ray);
        binding_rows.push(row);
    }
    Some(ConeRays {
        vertex: r.x.clone(),
        rays,
        binding_rows,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mb_relaxation() -> LpProblem {
        LpProblem {
            objective: vec![-1.0, -10.0],
            rows: vec![
                vec![5.0, -4.0],
                vec![-1.0, -2.0],
                vec![-2.0, 1.0],
                vec![2.0, 10.0],
            ],
            rhs: vec![-6.0, -10.0, -15.0, 15.0],
            lower: vec![0.0, 0.0],
            upper: vec![10.0, 10.0],
        }
    }

    #[test]
    fn moore_bard_vertex() {
        let p = mb_relaxation();
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 2.0).abs() < 1e-9 && (r.x[1] - 4.0).abs() < 1e-9);
        assert!((r.objective + 42.0).abs() < 1e-9);
    }

    #[test]
    fn moore_bard_cone() {
        let p = mb_relaxation();
        let r = solve_lp(&p).unwrap();
        let cone = extract_cone(&p, &r).unwrap();
        assert_eq!(cone.rays.len(), 2);
        let expected = [[-4.0, -5.0], [2.0, -1.0]];
        for e in expected {
            let found = cone.rays.iter().any(|ray| {
                let cross = ray[0] * e[1] - ray[1] * e[0];
                let same_dir = ray[0] * e[0] + ray[1] * e[1] > 0.0;
                cross.abs() < 1e-9 && same_dir
            });
            assert!(found, "ray {e:?} missing from {:?}", cone.rays);
        }
        for ray in &cone.rays {
            let norm = ray.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_lower_row() {
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![vec![1.0]],
            rhs: vec![3.0],
            lower: vec![0.0],
            upper: vec![10.0],
        };
        let r = solve_lp(&p).unwrap();
        assert!((r.x[0] - 3.0).abs() < 1e-12);
        let cone = extract_cone(&p, &r).unwrap();
        assert_eq!(cone.rays, vec![vec![1.0]]);
    }

    #[test]
    fn infeasible_detected() {
        let p = LpProblem {
            objective: vec![0.0],
            rows: vec![vec![1.0], vec![-1.0]],
            rhs: vec![1.0, 0.0],
            lower: vec![0.0],
            upper: vec![10.0],
        };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unit_box_origin_cone() {
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![],
            rhs: vec![],
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
        };
        let r = solve_lp(&p).unwrap();
        let cone = extract_cone(&p, &r).unwrap();
        let mut rays = cone.rays.clone();
        rays.sort_by(|a, b| b[0].total_cmp(&a[0]));
        assert_eq!(rays, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    /// Solves a square linear system by Gaussian elimination with partial pivoting.
    pub(crate) fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
            if a[piv][col].abs() < 1e-9 {
                return None;
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    /// Minimum over all feasible vertices found by solving every square subsystem.
    fn vertex_enumeration(p: &LpProblem) -> Option<f64> {
        let n = p.num_vars();
        let mut ineqs: Vec<(Vec<f64>, f64)> = p.rows.iter().cloned().zip(p.rhs.iter().copied()).collect();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            ineqs.push((e.clone(), p.lower[j]));
            e[j] = -1.0;
            ineqs.push((e, -p.upper[j]));
        }
        let total = ineqs.len();
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let a: Vec<Vec<f64>> = idx.iter().map(|&i| ineqs[i].0.clone()).collect();
            let b: Vec<f64> = idx.iter().map(|&i| ineqs[i].1).collect();
            if let Some(z) = solve_square(a, b) {
                if ineqs.iter().all(|(c, r)| c.iter().zip(&z).map(|(u, v)| u * v).sum::<f64>() >= r - 1e-7) {
                    let v: f64 = p.objective.iter().zip(&z).map(|(c, x)| c * x).sum();
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            let mut k = n;
            loop {
                if k == 0 {
                    return best;
                }
                k -= 1;
                if idx[k] < total - (n - k) {
                    idx[k] += 1;
                    for t in k + 1..n {
                        idx[t] = idx[t - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn small_lp() -> impl Strategy<Value = LpProblem> {
        (1usize..=6, 0usize..=8).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(-5i32..=5, n),
                prop::collection::vec(prop::collection::vec(-4i32..=4, n), m),
                prop::collection::vec(-8i32..=8, m),
                prop::collection::vec(0i32..=4, n),
            )
                .prop_map(move |(obj, rows, rhs, ub)| LpProblem {
                    objective: obj.into_iter().map(f64::from).collect(),
                    rows: rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect(),
                    rhs: rhs.into_iter().map(f64::from).collect(),
                    lower: vec![0.0; n],
                    upper: ub.into_iter().map(|u| f64::from(u) + 1.0).collect(),
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn matches_vertex_enumeration(p in small_lp()) {
            let r = solve_lp(&p).unwrap();
            match vertex_enumeration(&p) {
                None => prop_assert_eq!(r.status, LpStatus::Infeasible),
                Some(v) => {
                    prop_assert_eq!(r.status, LpStatus::Optimal);
                    prop_assert!((r.objective - v).abs() <= 1e-7 * v.abs().max(1.0), "{} vs {}", r.objective, v);
                }
            }
        }

        #[test]
        fn cone_rays_leave_exactly_one_binding_row(p in small_lp()) {
            let r = solve_lp(&p).unwrap();
            if r.status == LpStatus::Optimal {
                let cone = extract_cone(&p, &r).unwrap();
                prop_assert_eq!(cone.rays.len(), p.num_vars());
                for (k, ray) in cone.rays.iter().enumerate() {
                    let t = 1e-3;
                    let z: Vec<f64> = cone.vertex.iter().zip(ray).map(|(v, d)| v + t * d).collect();
                    for (i, row) in cone.binding_rows.iter().enumerate() {
                        let s = row.slack(&z);
                        if i == k {
                            prop_assert!(s > 1e-9);
                        } else {
                            prop_assert!(s.abs() < 1e-7, "row {} slack {}", i, s);
                        }
                    }
                }
            }
        }
    }
}
