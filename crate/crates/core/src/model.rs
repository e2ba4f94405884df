//! Canonical problem data, input normalisation and assumption checks.
//!
//! Every constraint is stored in `>=` form and both objectives are minimised.
//! Integer variables occupy the leading indices of each level.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simplex::{self, LpProblem, LpStatus};

/// Global integrality and feasibility tolerance.
pub const EPS: f64 = 1e-6;

/// Errors raised while building or validating an instance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable `{0}` has an infinite or non-finite bound")]
    UnboundedVariable(String),
    #[error("variable `{0}` has lower bound above upper bound")]
    EmptyDomain(String),
    #[error("linking variable `{0}` is not integer")]
    ContinuousLinking(String),
    #[error("the second level has no constraint rows")]
    NoFollowerRows,
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("stored linking set {stored:?} differs from the computed one {computed:?}")]
    LinkingMismatch {
        stored: Vec<usize>,
        computed: Vec<usize>,
    },
    #[error("invalid interdiction structure: {0}")]
    Interdiction(String),
}

/// A candidate solution `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Point { x, y }
    }

    /// Stacked vector `(x, y)`.
    pub fn stacked(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    pub fn from_stacked(z: &[f64], n1: usize) -> Self {
        Point {
            x: z[..n1].to_vec(),
            y: z[n1..].to_vec(),
        }
    }
}

/// Extra structure of an interdiction instance.
///
/// The leader removes items (sets `x_i = 1`), which forces `y_i <= u_i (1 - x_i)`.
/// The follower maximises `profit . y` over `follower_rows y >= follower_rhs`
/// and the leader minimises the same quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interdiction {
    /// Budget rows over `x`, `>=` form.
    pub budget_rows: Vec<Vec<f64>>,
    pub budget_rhs: Vec<f64>,
    /// Follower rows over `y`, `>=` form, not counting the interdiction rows.
    pub follower_rows: Vec<Vec<f64>>,
    pub follower_rhs: Vec<f64>,
    /// Upper bound `u_i` of each interdictable follower variable.
    pub upper: Vec<f64>,
    /// Follower profit vector (maximised by the follower).
    pub profit: Vec<f64>,
}

/// Canonical mixed integer bilevel linear program.
///
/// ```text
/// min  c x + d1 y
/// s.t. a1 x + g1 y >= b1
///      x in [lx, ux], x_0..x_{r1-1} integer
///      y in argmin { d2 y : g2 y >= b2 - a2 x, y in [ly, uy], y_0..y_{r2-1} integer }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiblpInstance {
    #[serde(default)]
    pub name: String,
    pub n1: usize,
    pub n2: usize,
    pub r1: usize,
    pub r2: usize,
    pub c: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub a1: Vec<Vec<f64>>,
    pub g1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub a2: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
    pub lx: Vec<f64>,
    pub ux: Vec<f64>,
    pub ly: Vec<f64>,
    pub uy: Vec<f64>,
    /// Indices of first-level columns with a nonzero entry in `a2`.
    pub linking: Vec<usize>,
    #[serde(default)]
    pub interdiction: Option<Interdiction>,
    #[serde(default)]
    pub x_names: Vec<String>,
    #[serde(default)]
    pub y_names: Vec<String>,
}

/// Outcome of the assumption checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub bounded: bool,
    pub no_unbounded_ray: bool,
    pub linking_integer: bool,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.bounded && self.no_unbounded_ray && self.linking_integer
    }
}

/// Row sense in a raw (user supplied) description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

/// Which level owns a raw row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Leader,
    Follower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawVar {
    pub name: String,
    pub integer: bool,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub level: Level,
    pub coef_x: Vec<f64>,
    pub coef_y: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Mixed-sense problem description accepted by [`canonicalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub name: String,
    pub x_vars: Vec<RawVar>,
    pub y_vars: Vec<RawVar>,
    /// Leader objective on `x`.
    pub c: Vec<f64>,
    /// Leader objective on `y`.
    pub d1: Vec<f64>,
    /// Follower objective on `y`.
    pub d2: Vec<f64>,
    pub leader_maximize: bool,
    pub follower_maximize: bool,
    pub rows: Vec<RawRow>,
    pub interdiction: Option<Interdiction>,
}

impl RawInstance {
    /// Canonical position of each raw first-level variable.
    pub fn x_permutation(&self) -> Vec<usize> {
        integer_first_order(&self.x_vars)
    }

    /// Canonical position of each raw second-level variable.
    pub fn y_permutation(&self) -> Vec<usize> {
        integer_first_order(&self.y_vars)
    }

    /// Whether `(x, y)` in raw variable order satisfies every raw row and bound.
    pub fn satisfies(&self, x: &[f64], y: &[f64], tol: f64) -> bool {
        let bounds_ok = self
            .x_vars
            .iter()
            .zip(x)
            .chain(self.y_vars.iter().zip(y))
            .all(|(v, &val)| val >= v.lower - tol && val <= v.upper + tol);
        bounds_ok
            && self.rows.iter().all(|row| {
                let lhs = dot(&row.coef_x, x) + dot(&row.coef_y, y);
                match row.sense {
                    Sense::Ge => lhs >= row.rhs - tol,
                    Sense::Le => lhs <= row.rhs + tol,
                    Sense::Eq => (lhs - row.rhs).abs() <= tol,
                }
            })
    }
}

/// Maps canonical position -> raw index, integers first, stable otherwise.
fn integer_first_order(vars: &[RawVar]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vars.len()).filter(|&i| vars[i].integer).collect();
    order.extend((0..vars.len()).filter(|&i| !vars[i].integer));
    order
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub(crate) fn is_integral(v: f64) -> bool {
    (v - v.round()).abs() <= EPS
}

fn check_finite(label: &str, values: &[f64]) -> Result<(), ModelError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite(label.to_string()))
    }
}

/// Normalises a raw description into the canonical `>=`/minimisation form.
pub fn canonicalize(raw: &RawInstance) -> Result<MiblpInstance, ModelError> {
    let n1 = raw.x_vars.len();
    let n2 = raw.y_vars.len();
    if raw.c.len() != n1 || raw.d1.len() != n2 || raw.d2.len() != n2 {
        return Err(ModelError::Dimension("objective length".into()));
    }
    for (k, row) in raw.rows.iter().enumerate() {
        if row.coef_x.len() != n1 || row.coef_y.len() != n2 {
            return Err(ModelError::Dimension(format!("row {k}")));
        }
        check_finite(&format!("row {k}"), &row.coef_x)?;
        check_finite(&format!("row {k}"), &row.coef_y)?;
        check_finite(&format!("row {k}"), &[row.rhs])?;
    }
    check_finite("objective", &raw.c)?;
    check_finite("objective", &raw.d1)?;
    check_finite("objective", &raw.d2)?;
    for v in raw.x_vars.iter().chain(&raw.y_vars) {
        if !v.lower.is_finite() || !v.upper.is_finite() {
            return Err(ModelError::UnboundedVariable(v.name.clone()));
        }
        if v.lower > v.upper {
            return Err(ModelError::EmptyDomain(v.name.clone()));
        }
    }

    let px = raw.x_permutation();
    let py = raw.y_permutation();
    let permute = |values: &[f64], perm: &[usize]| -> Vec<f64> { perm.iter().map(|&i| values[i]).collect() };
    let leader_sign = if raw.leader_maximize { -1.0 } else { 1.0 };
    let follower_sign = if raw.follower_maximize { -1.0 } else { 1.0 };

    let mut a1 = Vec::new();
    let mut g1 = Vec::new();
    let mut b1 = Vec::new();
    let mut a2 = Vec::new();
    let mut g2 = Vec::new();
    let mut b2 = Vec::new();
    for row in &raw.rows {
        let ax = permute(&row.coef_x, &px);
        let gy = permute(&row.coef_y, &py);
        let signs: &[f64] = match row.sense {
            Sense::Ge => &[1.0],
            Sense::Le => &[-1.0],
            Sense::Eq => &[1.0, -1.0],
        };
        for &s in signs {
            let (a, g, b) = match row.level {
                Level::Leader => (&mut a1, &mut g1, &mut b1),
                Level::Follower => (&mut a2, &mut g2, &mut b2),
            };
            a.push(ax.iter().map(|v| flip(s, *v)).collect());
            g.push(gy.iter().map(|v| flip(s, *v)).collect());
            b.push(flip(s, row.rhs));
        }
    }

    let xv: Vec<&RawVar> = px.iter().map(|&i| &raw.x_vars[i]).collect();
    let yv: Vec<&RawVar> = py.iter().map(|&i| &raw.y_vars[i]).collect();
    let mut inst = MiblpInstance {
        name: raw.name.clone(),
        n1,
        n2,
        r1: xv.iter().filter(|v| v.integer).count(),
        r2: yv.iter().filter(|v| v.integer).count(),
        c: permute(&raw.c, &px).into_iter().map(|v| flip(leader_sign, v)).collect(),
        d1: permute(&raw.d1, &py).into_iter().map(|v| flip(leader_sign, v)).collect(),
        d2: permute(&raw.d2, &py).into_iter().map(|v| flip(follower_sign, v)).collect(),
        a1,
        g1,
        b1,
        a2,
        g2,
        b2,
        lx: xv.iter().map(|v| v.lower).collect(),
        ux: xv.iter().map(|v| v.upper).collect(),
        ly: yv.iter().map(|v| v.lower).collect(),
        uy: yv.iter().map(|v| v.upper).collect(),
        linking: Vec::new(),
        interdiction: raw.interdiction.clone(),
        x_names: xv.iter().map(|v| v.name.clone()).collect(),
        y_names: yv.iter().map(|v| v.name.clone()).collect(),
    };
    inst.linking = linking_set(&inst);
    inst.validate()?;
    Ok(inst)
}

/// Multiplies by a sign without producing negative zeros.
fn flip(sign: f64, v: f64) -> f64 {
    let r = sign * v;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Indices of first-level columns that appear in the second-level rows.
pub fn linking_set(inst: &MiblpInstance) -> Vec<usize> {
    (0..inst.n1)
        .filter(|&j| inst.a2.iter().any(|row| row[j] != 0.0))
        .collect()
}

/// Reports boundedness, the follower ray condition and linking integrality.
pub fn check_assumptions(inst: &MiblpInstance) -> AssumptionReport {
    let bounded = inst
        .lx
        .iter()
        .chain(&inst.ux)
        .chain(&inst.ly)
        .chain(&inst.uy)
        .all(|v| v.is_finite())
        && inst.lx.iter().zip(&inst.ux).all(|(l, u)| l <= u)
        && inst.ly.iter().zip(&inst.uy).all(|(l, u)| l <= u);
    let linking_integer = linking_set(inst).iter().all(|&j| j < inst.r1);
    let ray_lp = LpProblem {
        objective: inst.d2.clone(),
        rows: inst.g2.clone(),
        rhs: vec![0.0; inst.g2.len()],
        lower: vec![0.0; inst.n2],
        upper: vec![1.0; inst.n2],
    };
    let no_unbounded_ray = match simplex::solve_lp(&ray_lp) {
        Ok(res) => res.status != LpStatus::Optimal || res.objective >= -EPS,
        Err(_) => false,
    };
    AssumptionReport {
        bounded,
        no_unbounded_ray,
        linking_integer,
    }
}

impl MiblpInstance {
    /// Builds the canonical form of an interdiction instance.
    ///
    /// Item `i` of the leader interdicts follower variable `i`; both levels are
    /// integer and the follower variables range over `[0, upper_i]`.
    pub fn from_interdiction(name: &str, data: Interdiction) -> Result<Self, ModelError> {
        let k = data.upper.len();
        if data.profit.len() != k {
            return Err(ModelError::Interdiction("profit length".into()));
        }
        if data.budget_rows.len() != data.budget_rhs.len()
            || data.budget_rows.iter().any(|r| r.len() != k)
        {
            return Err(ModelError::Interdiction("budget rows".into()));
        }
        if data.follower_rows.len() != data.follower_rhs.len()
            || data.follower_rows.iter().any(|r| r.len() != k)
        {
            return Err(ModelError::Interdiction("follower rows".into()));
        }
        let mut a2 = Vec::new();
        let mut g2 = Vec::new();
        let mut b2 = Vec::new();
        for (row, rhs) in data.follower_rows.iter().zip(&data.follower_rhs) {
            a2.push(vec![0.0; k]);
            g2.push(row.clone());
            b2.push(*rhs);
        }
        for i in 0..k {
            let mut ax = vec![0.0; k];
            ax[i] = -data.upper[i];
            let mut gy = vec![0.0; k];
            gy[i] = -1.0;
            a2.push(ax);
            g2.push(gy);
            b2.push(-data.upper[i]);
        }
        let mut inst = MiblpInstance {
            name: name.to_string(),
            n1: k,
            n2: k,
            r1: k,
            r2: k,
            c: vec![0.0; k],
            d1: data.profit.clone(),
            d2: data.profit.iter().map(|p| flip(-1.0, *p)).collect(),
            a1: data.budget_rows.clone(),
            g1: vec![vec![0.0; k]; data.budget_rows.len()],
            b1: data.budget_rhs.clone(),
            a2,
            g2,
            b2,
            lx: vec![0.0; k],
            ux: vec![1.0; k],
            ly: vec![0.0; k],
            uy: data.upper.clone(),
            linking: Vec::new(),
            interdiction: Some(data),
            x_names: (0..k).map(|i| format!("x{i}")).collect(),
            y_names: (0..k).map(|i| format!("y{i}")).collect(),
        };
        inst.linking = linking_set(&inst);
        inst.validate()?;
        Ok(inst)
    }

    /// Checks dimensions, bounds and the linking-set invariant.
    pub fn validate(&self) -> Result<(), ModelError> {
        let (n1, n2) = (self.n1, self.n2);
        let dim = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(ModelError::Dimension(what.to_string()))
            }
        };
        dim(self.r1 <= n1 && self.r2 <= n2, "integer counts")?;
        dim(self.c.len() == n1 && self.d1.len() == n2 && self.d2.len() == n2, "objectives")?;
        dim(
            self.lx.len() == n1 && self.ux.len() == n1 && self.ly.len() == n2 && self.uy.len() == n2,
            "bounds",
        )?;
        dim(
            self.a1.len() == self.b1.len() && self.g1.len() == self.b1.len(),
            "first-level block",
        )?;
        dim(
            self.a2.len() == self.b2.len() && self.g2.len() == self.b2.len(),
            "second-level block",
        )?;
        dim(
            self.a1.iter().chain(&self.a2).all(|r| r.len() == n1)
                && self.g1.iter().chain(&self.g2).all(|r| r.len() == n2),
            "row length",
        )?;
        for (label, v) in [("c", &self.c), ("d1", &self.d1), ("d2", &self.d2), ("b1", &self.b1), ("b2", &self.b2)] {
            check_finite(label, v)?;
        }
        for row in self.a1.iter().chain(&self.g1).chain(&self.a2).chain(&self.g2) {
            check_finite("constraint matrix", row)?;
        }
        if self.b2.is_empty() {
            return Err(ModelError::NoFollowerRows);
        }
        let name_x = |j: usize| self.x_names.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
        let name_y = |j: usize| self.y_names.get(j).cloned().unwrap_or_else(|| format!("y{j}"));
        for j in 0..n1 {
            if !self.lx[j].is_finite() || !self.ux[j].is_finite() {
                return Err(ModelError::UnboundedVariable(name_x(j)));
            }
            if self.lx[j] > self.ux[j] {
                return Err(ModelError::EmptyDomain(name_x(j)));
            }
        }
        for j in 0..n2 {
            if !self.ly[j].is_finite() || !self.uy[j].is_finite() {
                return Err(ModelError::UnboundedVariable(name_y(j)));
            }
            if self.ly[j] > self.uy[j] {
                return Err(ModelError::EmptyDomain(name_y(j)));
            }
        }
        let computed = linking_set(self);
        if computed != self.linking {
            return Err(ModelError::LinkingMismatch {
                stored: self.linking.clone(),
                computed,
            });
        }
        if let Some(&j) = computed.iter().find(|&&j| j >= self.r1) {
            return Err(ModelError::ContinuousLinking(name_x(j)));
        }
        if let Some(data) = &self.interdiction {
            let k = data.upper.len();
            if k != n1 || k != n2 || computed != (0..k).collect::<Vec<_>>() {
                return Err(ModelError::Interdiction("linking set must be all of x".into()));
            }
            if self.lx.iter().any(|&l| l < 0.0) || self.ux.iter().any(|&u| u > 1.0) {
                return Err(ModelError::Interdiction("interdiction variables must be binary".into()));
            }
            if self.d1.iter().zip(&self.d2).any(|(a, b)| (a + b).abs() > 0.0) {
                return Err(ModelError::Interdiction("leader and follower objectives must be opposed".into()));
            }
        }
        Ok(())
    }

    /// Inverse of [`canonicalize`] for an already canonical instance.
    pub fn to_raw(&self) -> RawInstance {
        let var = |name: String, integer: bool, lower: f64, upper: f64| RawVar {
            name,
            integer,
            lower,
            upper,
        };
        let x_vars = (0..self.n1)
            .map(|j| var(self.x_name(j), j < self.r1, self.lx[j], self.ux[j]))
            .collect();
        let y_vars = (0..self.n2)
            .map(|j| var(self.y_name(j), j < self.r2, self.ly[j], self.uy[j]))
            .collect();
        let mut rows = Vec::new();
        for i in 0..self.m1() {
            rows.push(RawRow {
                level: Level::Leader,
                coef_x: self.a1[i].clone(),
                coef_y: self.g1[i].clone(),
                sense: Sense::Ge,
                rhs: self.b1[i],
            });
        }
        for i in 0..self.m2() {
            rows.push(RawRow {
                level: Level::Follower,
                coef_x: self.a2[i].clone(),
                coef_y: self.g2[i].clone(),
                sense: Sense::Ge,
                rhs: self.b2[i],
            });
        }
        RawInstance {
            name: self.name.clone(),
            x_vars,
            y_vars,
            c: self.c.clone(),
            d1: self.d1.clone(),
            d2: self.d2.clone(),
            leader_maximize: false,
            follower_maximize: false,
            rows,
            interdiction: self.interdiction.clone(),
        }
    }

    pub fn x_name(&self, j: usize) -> String {
        self.x_names.get(j).cloned().unwrap_or_else(|| format!("x{j}"))
    }

    pub fn y_name(&self, j: usize) -> String {
        self.y_names.get(j).cloned().unwrap_or_else(|| format!("y{j}"))
    }

    pub fn m1(&self) -> usize {
        self.b1.len()
    }

    pub fn m2(&self) -> usize {
        self.b2.len()
    }

    /// Number of structural columns `n1 + n2`.
    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }

    /// Integrality flag for each stacked column.
    pub fn integer_mask(&self) -> Vec<bool> {
        (0..self.n1)
            .map(|j| j < self.r1)
            .chain((0..self.n2).map(|j| j < self.r2))
            .collect()
    }

    pub fn is_pure_integer(&self) -> bool {
        self.r1 == self.n1 && self.r2 == self.n2
    }

    pub fn leader_value(&self, p: &Point) -> f64 {
        dot(&self.c, &p.x) + dot(&self.d1, &p.y)
    }

    pub fn follower_value(&self, y: &[f64]) -> f64 {
        dot(&self.d2, y)
    }

    /// Stacked `>=` rows of the relaxation (first level, then second level).
    pub fn relaxation_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows = self
            .a1
            .iter()
            .zip(&self.g1)
            .chain(self.a2.iter().zip(&self.g2))
            .map(|(a, g)| a.iter().chain(g.iter()).copied().collect())
            .collect();
        let rhs = self.b1.iter().chain(&self.b2).copied().collect();
        (rows, rhs)
    }

    pub fn lower_bounds(&self) -> Vec<f64> {
        self.lx.iter().chain(&self.ly).copied().collect()
    }

    pub fn upper_bounds(&self) -> Vec<f64> {
        self.ux.iter().chain(&self.uy).copied().collect()
    }

    /// Whether every linking variable ranges within `{0, 1}`.
    pub fn linking_binary(&self) -> bool {
        self.linking
            .iter()
            .all(|&j| self.lx[j] >= 0.0 && self.ux[j] <= 1.0)
    }

    /// Whether `a2 x + g2 y - b2` is integral for every point of the relaxation
    /// with integral linking part and integral `y` on integer indices.
    pub fn follower_rows_integral(&self) -> bool {
        let ints = |v: &[f64]| v.iter().all(|&a| a == a.round());
        self.a2.iter().all(|r| ints(r))
            && self.g2.iter().all(|r| ints(r))
            && ints(&self.b2)
            && (self.r2..self.n2).all(|j| self.g2.iter().all(|r| r[j] == 0.0))
    }

    /// Whether the follower objective takes integral values on integer points.
    pub fn follower_objective_integral(&self) -> bool {
        self.d2.iter().all(|v| *v == v.round()) && (self.r2..self.n2).all(|j| self.d2[j] == 0.0)
    }

    /// Whether every datum entering the constraint system is integral.
    pub fn constraint_data_integral(&self) -> bool {
        let ints = |v: &[f64]| v.iter().all(|&a| a == a.round());
        self.a1.iter().chain(&self.g1).chain(&self.a2).chain(&self.g2).all(|r| ints(r))
            && ints(&self.b1)
            && ints(&self.b2)
            && ints(&self.lx)
            && ints(&self.ux)
            && ints(&self.ly)
            && ints(&self.uy)
    }

    /// Slack `g2 y - (b2 - a2 x)` per second-level row.
    pub fn follower_slacks(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (0..self.m2())
            .map(|i| dot(&self.a2[i], x) + dot(&self.g2[i], y) - self.b2[i])
            .collect()
    }

    /// Slack per first-level row.
    pub fn leader_slacks(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (0..self.m1())
            .map(|i| dot(&self.a1[i], x) + dot(&self.g1[i], y) - self.b1[i])
            .collect()
    }

    /// Linking part of `x` rounded to integers.
    pub fn linking_values(&self, x: &[f64]) -> Vec<i64> {
        self.linking.iter().map(|&j| x[j].round() as i64).collect()
    }

    /// Whether the linking part of `x` is integral within tolerance.
    pub fn linking_integral(&self, x: &[f64]) -> bool {
        self.linking.iter().all(|&j| is_integral(x[j]))
    }
}

/// The example instance from Moore and Bard used throughout the tests.
///
/// `min -x - 10y` subject to the follower problem `min y` over
/// `-5x + 4y <= 6`, `x + 2y <= 10`, `2x - y <= 15`, `2x + 10y >= 15`,
/// with both variables integer in `[0, 10]`.
pub fn moore_bard() -> MiblpInstance {
    moore_bard_with_leader(-1.0, -10.0)
}

/// The Moore-Bard instance with a custom leader objective `cx x + dy y`.
pub fn moore_bard_with_leader(cx: f64, dy: f64) -> MiblpInstance {
    let var = |name: &str| RawVar {
        name: name.into(),
        integer: true,
        lower: 0.0,
        upper: 10.0,
    };
    let row = |a: f64, g: f64, sense: Sense, rhs: f64| RawRow {
        level: Level::Follower,
        coef_x: vec![a],
        coef_y: vec![g],
        sense,
        rhs,
    };
    let raw = RawInstance {
        name: "moore_bard".into(),
        x_vars: vec![var("x")],
        y_vars: vec![var("y")],
        c: vec![cx],
        d1: vec![dy],
        d2: vec![1.0],
        leader_maximize: false,
        follower_maximize: false,
        rows: vec![
            row(-5.0, 4.0, Sense::Le, 6.0),
            row(1.0, 2.0, Sense::Le, 10.0),
            row(2.0, -1.0, Sense::Le, 15.0),
            row(2.0, 10.0, Sense::Ge, 15.0),
        ],
        interdiction: None,
    };
    canonicalize(&raw).expect("static instance is well formed")
}

/// Two-item knapsack interdiction instance used as a unit example.
///
/// The follower maximises `3 y1 + 2 y2` with `y1 + y2 <= 1`; the leader may
/// interdict one item.
pub fn knapsack_interdiction_toy() -> MiblpInstance {
    MiblpInstance::from_interdiction(
        "knapsack_toy",
        Interdiction {
            budget_rows: vec![vec![-1.0, -1.0]],
            budget_rhs: vec![-1.0],
            follower_rows: vec![vec![-1.0, -1.0]],
            follower_rhs: vec![-1.0],
            upper: vec![1.0, 1.0],
            profit: vec![3.0, 2.0],
        },
    )
    .expect("static instance is well formed")
}
