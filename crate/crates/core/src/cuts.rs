//! Valid inequalities for the bilevel feasible region and the
//! intersection-cut engine shared by several of them.
//!
//! All cuts are stored as `alpha_x . x + alpha_y . y >= beta`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::bilevel::{self, Certificate, UbEvidence};
use crate::milp::{MilpLimits, MilpProblem};
use crate::model::{dot, is_integral, MiblpInstance, Point, EPS};
use crate::simplex::{ConeRays, LpProblem};

/// Minimum margin by which a cone vertex must lie inside a bilevel-free set.
pub const INTERIOR_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CutClass {
    IntegerNoGood,
    BendersBinary,
    BendersInterdiction,
    IsicType1,
    IsicType2,
    Idic,
    HypercubeIc,
    GeneralizedNoGood,
    /// Rounding cuts from tableau rows, valid for the single-level relaxation.
    Integrality,
}

impl CutClass {
    pub const ALL: [CutClass; 9] = [
        CutClass::IntegerNoGood,
        CutClass::BendersBinary,
        CutClass::BendersInterdiction,
        CutClass::IsicType1,
        CutClass::IsicType2,
        CutClass::Idic,
        CutClass::HypercubeIc,
        CutClass::GeneralizedNoGood,
        CutClass::Integrality,
    ];

    /// Classes whose generation is gated by an intersection-cut strategy.
    pub fn strategy_gated(self) -> bool {
        matches!(self, CutClass::IsicType1 | CutClass::IsicType2 | CutClass::Idic)
    }

    pub fn is_intersection_cut(self) -> bool {
        matches!(self, CutClass::IsicType1 | CutClass::IsicType2 | CutClass::Idic | CutClass::HypercubeIc)
    }

    pub fn name(self) -> &'static str {
        match self {
            CutClass::IntegerNoGood => "int-no-good",
            CutClass::BendersBinary => "benders-binary",
            CutClass::BendersInterdiction => "benders-interdiction",
            CutClass::IsicType1 => "isic1",
            CutClass::IsicType2 => "isic2",
            CutClass::Idic => "idic",
            CutClass::HypercubeIc => "hypercube",
            CutClass::GeneralizedNoGood => "gen-no-good",
            CutClass::Integrality => "integrality",
        }
    }

    pub fn from_name(s: &str) -> Option<CutClass> {
        CutClass::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Points of the bilevel feasible region for which a cut is guaranteed valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CutScope {
    /// Every bilevel feasible point.
    Global,
    /// Every bilevel feasible point with leader value below the incumbent.
    Improving { incumbent: f64 },
    /// Every bilevel feasible point whose linking part differs from `gamma`.
    LinkingExcluding(Vec<i64>),
}

impl CutScope {
    /// Whether the feasible point `p` belongs to this scope.
    pub fn covers(&self, inst: &MiblpInstance, p: &Point) -> bool {
        match self {
            CutScope::Global => true,
            CutScope::Improving { incumbent } => inst.leader_value(p) < *incumbent - EPS,
            CutScope::LinkingExcluding(gamma) => inst.linking_values(&p.x) != *gamma,
        }
    }
}

/// Geometry recorded for intersection cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcGeometry {
    /// Finite intersection points of the cone rays with the set boundary.
    pub intersections: Vec<Vec<f64>>,
    /// Smallest slack of the cone vertex in the set's rows.
    pub interior_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub alpha_x: Vec<f64>,
    pub alpha_y: Vec<f64>,
    pub beta: f64,
    pub scope: CutScope,
    pub origin: CutClass,
    pub geometry: Option<IcGeometry>,
}

impl Cut {
    pub fn lhs(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.alpha_x, x) + dot(&self.alpha_y, y)
    }

    pub fn lhs_stacked(&self, z: &[f64]) -> f64 {
        let n1 = self.alpha_x.len();
        self.lhs(&z[..n1], &z[n1..])
    }

    /// Amount by which `z` violates the cut (negative when satisfied).
    pub fn violation(&self, z: &[f64]) -> f64 {
        self.beta - self.lhs_stacked(z)
    }

    pub fn is_satisfied(&self, p: &Point, tol: f64) -> bool {
        self.lhs(&p.x, &p.y) >= self.beta - tol
    }

    /// Stacked coefficient vector.
    pub fn coefficients(&self) -> Vec<f64> {
        self.alpha_x.iter().chain(&self.alpha_y).copied().collect()
    }
}

/// Why a generator produced no cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutFailure {
    /// No certificate of bilevel infeasibility was available or found.
    NoCertificate,
    /// No ray of the cone leaves the bilevel-free set.
    ConeContained,
    /// The generator's structural preconditions do not hold.
    NotApplicable,
    /// The inequality obtained does not separate the vertex by the tolerance.
    NotViolated,
}

/// Polyhedron `{z : rows z >= rhs}` over stacked `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfsSet {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl BfsSet {
    pub fn margin(&self, z: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, h)| dot(r, z) - h)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_interior(&self, z: &[f64]) -> bool {
        self.margin(z) > 0.0
    }
}

/// Rescales `alpha . z >= beta` in place. Rows whose coefficient ratios are
/// rationals with small denominators become coprime integers; all others are
/// scaled to unit infinity norm.
const MAX_DENOMINATOR: i64 = 1000;

/// Denominator of the continued-fraction convergent of `v` that matches it to
/// within a relative 1e-9, if one exists with denominator at most `MAX_DENOMINATOR`.
fn small_denominator(v: f64) -> Option<i64> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut rest = v;
    for _ in 0..32 {
        let a = rest.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let a = a as i64;
        (h0, h1) = (h1, a.checked_mul(h1)?.checked_add(h0)?);
        (k0, k1) = (k1, a.checked_mul(k1)?.checked_add(k0)?);
        if k1 > MAX_DENOMINATOR {
            return None;
        }
        if (h1 as f64 / k1 as f64 - v).abs() <= 1e-9 * v.abs().max(1.0) {
            return Some(k1);
        }
        let frac = rest - a as f64;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

pub fn normalize(alpha: &mut [f64], beta: &mut f64) {
    let max = alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return;
    }
    for v in alpha.iter_mut() {
        *v /= max;
        if v.abs() < 1e-11 {
            *v = 0.0;
        }
    }
    *beta /= max;
    let smallest = alpha.iter().filter(|v| **v != 0.0).fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let common_denominator = alpha
        .iter()
        .filter(|v| **v != 0.0)
        .try_fold(1i64, |acc, v| small_denominator(v.abs() / smallest).map(|q| acc.lcm(&q)))
        .filter(|d| *d <= MAX_DENOMINATOR);
    if let Some(mult) = common_denominator {
        let scaled: Vec<f64> = alpha.iter().map(|v| v / smallest * mult as f64).collect();
        let near_int = scaled.iter().all(|v| (v - v.round()).abs() <= 1e-9 * v.abs().max(1.0) && v.abs() <= 1e6);
        if !near_int {
            return;
        }
        let ints: Vec<i64> = scaled.iter().map(|v| v.round() as i64).collect();
        let g = ints.iter().fold(0i64, |g, v| g.gcd(v)).max(1);
        let factor = smallest * g as f64 / mult as f64;
        for (v, i) in alpha.iter_mut().zip(&ints) {
            *v = (*i / g) as f64;
        }
        *beta /= factor;
        if (*beta - beta.round()).abs() <= 1e-9 * beta.abs().max(1.0) {
            *beta = beta.round();
        }
    }
}

pub(crate) fn make_cut(inst: &MiblpInstance, mut alpha: Vec<f64>, mut beta: f64, scope: CutScope, origin: CutClass, vertex: &[f64]) -> Result<Cut, CutFailure> {
    if alpha.iter().any(|v| !v.is_finite()) || !beta.is_finite() {
        return Err(CutFailure::NotViolated);
    }
    normalize(&mut alpha, &mut beta);
    let cut = Cut {
        alpha_x: alpha[..inst.n1].to_vec(),
        alpha_y: alpha[inst.n1..].to_vec(),
        beta,
        scope,
        origin,
        geometry: None,
    };
    if cut.violation(vertex) < EPS {
        return Err(CutFailure::NotViolated);
    }
    Ok(cut)
}

/// Intersection cut from a simplicial cone and a convex set containing its
/// vertex in the interior. Returns the raw `(alpha, beta)` and geometry.
pub fn intersection_cut_raw(cone: &ConeRays, bfs: &BfsSet) -> Result<(Vec<f64>, f64, IcGeometry), CutFailure> {
    let v = &cone.vertex;
    let margin = bfs.margin(v);
    if margin < INTERIOR_TOL {
        return Err(CutFailure::NoCertificate);
    }
    let n = cone.dim();
    let mut alpha = vec![0.0; n];
    let mut beta = 1.0;
    let mut intersections = Vec::new();
    for (k, ray) in cone.rays.iter().enumerate() {
        let mut step = f64::INFINITY;
        for (row, h) in bfs.rows.iter().zip(&bfs.rhs) {
            let rate = dot(row, ray);
            if rate < -1e-12 {
                step = step.min((dot(row, v) - h) / -rate);
            }
        }
        if !step.is_finite() {
            continue;
        }
        // Slack of the k-th binding row equals `rate * t` along the ray.
        let rate = cone.ray_rate(k);
        let row = &cone.binding_rows[k];
        let weight = 1.0 / (rate * step);
        for (a, c) in alpha.iter_mut().zip(&row.coef) {
            *a += weight * c;
        }
        beta += weight * row.rhs;
        intersections.push(v.iter().zip(ray).map(|(a, b)| a + step * b).collect());
    }
    if intersections.is_empty() {
        return Err(CutFailure::ConeContained);
    }
    Ok((alpha, beta, IcGeometry { intersections, interior_margin: margin }))
}

/// Intersection cut wrapped as a [`Cut`] with the given class and scope.
pub fn intersection_cut(inst: &MiblpInstance, cone: &ConeRays, bfs: &BfsSet, origin: CutClass, scope: CutScope) -> Result<Cut, CutFailure> {
    let (alpha, beta, geometry) = intersection_cut_raw(cone, bfs)?;
    let mut cut = make_cut(inst, alpha, beta, scope, origin, &cone.vertex)?;
    cut.geometry = Some(geometry);
    Ok(cut)
}

/// Set of points for which `y_star` is a strictly better follower response.
///
/// `drop_rows[i]` removes row `i` when `y_star` satisfies it for every `x` in the box.
pub fn bfs_improving_solution(inst: &MiblpInstance, y_star: &[f64], drop_rows: Option<&[bool]>) -> BfsSet {
    let (n1, n2) = (inst.n1, inst.n2);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut first = vec![0.0; n1];
    first.extend_from_slice(&inst.d2);
    rows.push(first);
    rhs.push(inst.follower_value(y_star));
    for i in 0..inst.m2() {
        if drop_rows.is_some_and(|d| d[i]) {
            continue;
        }
        let mut row = inst.a2[i].clone();
        row.extend(std::iter::repeat_n(0.0, n2));
        rows.push(row);
        rhs.push(inst.b2[i] - dot(&inst.g2[i], y_star) - 1.0);
    }
    BfsSet { rows, rhs }
}

/// Set of points from which the direction `dy` leads to a strictly better
/// follower response.
pub fn bfs_improving_direction(inst: &MiblpInstance, cert: &Certificate) -> Option<BfsSet> {
    let Certificate::ImprovingDirection { dy, drop_rows, drop_lower, drop_upper } = cert else {
        return None;
    };
    let (n1, n2) = (inst.n1, inst.n2);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..inst.m2() {
        if drop_rows[i] {
            continue;
        }
        let mut row = inst.a2[i].clone();
        row.extend_from_slice(&inst.g2[i]);
        rows.push(row);
        rhs.push(inst.b2[i] - dot(&inst.g2[i], dy) - 1.0);
    }
    for j in 0..n2 {
        if !drop_lower[j] {
            let mut row = vec![0.0; n1 + n2];
            row[n1 + j] = 1.0;
            rows.push(row);
            rhs.push(inst.ly[j] - 1.0 - dy[j]);
        }
        if !drop_upper[j] {
            let mut row = vec![0.0; n1 + n2];
            row[n1 + j] = -1.0;
            rows.push(row);
            rhs.push(dy[j] - inst.uy[j] - 1.0);
        }
    }
    Some(BfsSet { rows, rhs })
}

fn vertex_point(inst: &MiblpInstance, cone: &ConeRays) -> Point {
    Point::from_stacked(&cone.vertex, inst.n1)
}

/// Whether the instance satisfies the integrality premise behind the
/// improving-solution sets.
pub fn improving_solution_sets_apply(inst: &MiblpInstance) -> bool {
    inst.follower_rows_integral()
}

/// Whether the instance satisfies the premises of the improving-direction set.
pub fn improving_direction_sets_apply(inst: &MiblpInstance) -> bool {
    inst.follower_rows_integral()
        && inst.r2 == inst.n2
        && inst.ly.iter().chain(&inst.uy).all(|v| *v == v.round())
}

/// Intersection cut from a known improving follower solution.
pub fn gen_isic_type1(inst: &MiblpInstance, cone: &ConeRays, y_star: Option<&[f64]>) -> Result<Cut, CutFailure> {
    if !improving_solution_sets_apply(inst) {
        return Err(CutFailure::NotApplicable);
    }
    let y_star = y_star.ok_or(CutFailure::NoCertificate)?;
    let p = vertex_point(inst, cone);
    if inst.follower_value(&p.y) <= inst.follower_value(y_star) + EPS {
        return Err(CutFailure::NoCertificate);
    }
    let bfs = bfs_improving_solution(inst, y_star, None);
    intersection_cut(inst, cone, &bfs, CutClass::IsicType1, CutScope::Global)
}

/// Constant `sum_j min(a2_ij lx_j, a2_ij ux_j)` per second-level row.
pub fn linking_row_minimum(inst: &MiblpInstance) -> Vec<f64> {
    (0..inst.m2())
        .map(|i| (0..inst.n1).map(|j| (inst.a2[i][j] * inst.lx[j]).min(inst.a2[i][j] * inst.ux[j])).sum())
        .collect()
}

/// Improving solution chosen to keep as many second-level rows out of the
/// bilevel-free set as possible. Returns `y*` and the rows that may be dropped.
pub fn type2_improving_solution(
    inst: &MiblpInstance,
    p: &Point,
    limits: &MilpLimits,
) -> Result<Option<(Vec<f64>, Vec<bool>)>, bilevel::OracleError> {
    let (n2, m2) = (inst.n2, inst.m2());
    let low = linking_row_minimum(inst);
    let nv = n2 + m2;
    let mut objective = vec![0.0; nv];
    for v in objective.iter_mut().skip(n2) {
        *v = 1.0;
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut row: Vec<f64> = inst.d2.iter().map(|v| -v).collect();
    row.extend(std::iter::repeat_n(0.0, m2));
    rows.push(row);
    rhs.push(-(inst.follower_value(&p.y) - 1.0 - 1e-9).ceil());
    for i in 0..m2 {
        let mut row = inst.g2[i].clone();
        row.extend(std::iter::repeat_n(0.0, m2));
        row[n2 + i] = dot(&inst.a2[i], &p.x) - low[i];
        rows.push(row);
        rhs.push(inst.b2[i] - low[i]);
    }
    let mut lower = inst.ly.clone();
    lower.extend(std::iter::repeat_n(0.0, m2));
    let mut upper = inst.uy.clone();
    upper.extend(std::iter::repeat_n(1.0, m2));
    let problem = MilpProblem {
        lp: LpProblem { objective, rows, rhs, lower, upper },
        integer: (0..inst.r2).chain(n2..nv).collect(),
        cutoff: None,
    };
    let r = crate::milp::solve_milp(&problem, limits)?;
    match r.status {
        crate::milp::MilpStatus::Limit => Err(bilevel::OracleError::Limit),
        _ => Ok(r.x.map(|z| {
            let y = z[..n2].to_vec();
            let drops = (0..m2).map(|i| dot(&inst.g2[i], &y) >= inst.b2[i] - low[i] - 1e-9).collect();
            (y, drops)
        })),
    }
}

/// Intersection cut from an improving solution that maximises dropped rows.
pub fn gen_isic_type2(inst: &MiblpInstance, cone: &ConeRays, limits: &MilpLimits) -> Result<Cut, CutFailure> {
    if !improving_solution_sets_apply(inst) || !inst.follower_objective_integral() {
        return Err(CutFailure::NotApplicable);
    }
    let p = vertex_point(inst, cone);
    let (y_star, drops) = match type2_improving_solution(inst, &p, limits) {
        Ok(Some(found)) => found,
        Ok(None) | Err(_) => return Err(CutFailure::NoCertificate),
    };
    let bfs = bfs_improving_solution(inst, &y_star, Some(&drops));
    intersection_cut(inst, cone, &bfs, CutClass::IsicType2, CutScope::Global)
}

/// Intersection cut from an improving direction at the cone vertex.
pub fn gen_idic(inst: &MiblpInstance, cone: &ConeRays, limits: &MilpLimits) -> Result<Cut, CutFailure> {
    if !improving_direction_sets_apply(inst) {
        return Err(CutFailure::NotApplicable);
    }
    let p = vertex_point(inst, cone);
    let cert = match bilevel::find_improving_direction(inst, &p, limits) {
        Ok(Some(c)) => c,
        Ok(None) | Err(_) => return Err(CutFailure::NoCertificate),
    };
    let bfs = bfs_improving_direction(inst, &cert).ok_or(CutFailure::NoCertificate)?;
    intersection_cut(inst, cone, &bfs, CutClass::Idic, CutScope::Global)
}

/// Intersection cut from the unit box around the vertex's linking part.
///
/// The fixed-linking problem must have been solved for that linking part,
/// which the evidence token certifies.
pub fn gen_hypercube_ic(inst: &MiblpInstance, cone: &ConeRays, evidence: &UbEvidence) -> Result<Cut, CutFailure> {
    let p = vertex_point(inst, cone);
    if inst.linking.is_empty() || !inst.linking_integral(&p.x) {
        return Err(CutFailure::NotApplicable);
    }
    let gamma = inst.linking_values(&p.x);
    if evidence.gamma() != gamma.as_slice() {
        return Err(CutFailure::NotApplicable);
    }
    let n = inst.dim();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (&j, &g) in inst.linking.iter().zip(&gamma) {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        rows.push(row.clone());
        rhs.push(g as f64 - 1.0);
        row[j] = -1.0;
        rows.push(row);
        rhs.push(-(g as f64) - 1.0);
    }
    intersection_cut(
        inst,
        cone,
        &BfsSet { rows, rhs },
        CutClass::HypercubeIc,
        CutScope::LinkingExcluding(gamma),
    )
}

fn to_integer(v: f64) -> Option<i64> {
    if v.is_finite() && v == v.round() && v.abs() < 1e15 {
        Some(v as i64)
    } else if (v - v.round()).abs() <= 1e-9 && v.abs() < 1e15 {
        Some(v.round() as i64)
    } else {
        None
    }
}

/// Nonnegative integer combination of `>=` rows, divided by the gcd of the
/// combined coefficients, with the right-hand side raised by one.
///
/// Valid whenever the combined row is tight at exactly one integer point of
/// the polyhedron. Returns `None` if any datum is not integral.
pub fn generalized_chvatal(rows: &[(Vec<f64>, f64)], weights: &[i64]) -> Option<(Vec<i64>, i64)> {
    let n = rows.first()?.0.len();
    let mut alpha = vec![0i128; n];
    let mut beta = 0i128;
    for ((coef, rhs), &u) in rows.iter().zip(weights) {
        for (a, c) in alpha.iter_mut().zip(coef) {
            *a += i128::from(u) * i128::from(to_integer(*c)?);
        }
        beta += i128::from(u) * i128::from(to_integer(*rhs)?);
    }
    let g = alpha.iter().fold(0i128, |g, a| g.gcd(a));
    if g == 0 {
        return None;
    }
    let alpha: Vec<i64> = alpha.iter().map(|a| (a / g) as i64).collect();
    let beta = Integer::div_floor(&beta, &g) as i64 + 1;
    Some((alpha, beta))
}

/// Cut removing the single integer vertex of the relaxation cone.
pub fn gen_integer_no_good(inst: &MiblpInstance, cone: &ConeRays) -> Result<Cut, CutFailure> {
    if !inst.is_pure_integer() || !inst.constraint_data_integral() {
        return Err(CutFailure::NotApplicable);
    }
    if !cone.vertex.iter().all(|v| is_integral(*v)) {
        return Err(CutFailure::NotApplicable);
    }
    let rows: Vec<(Vec<f64>, f64)> = cone.binding_rows.iter().map(|r| (r.coef.clone(), r.rhs)).collect();
    let weights = vec![1i64; rows.len()];
    let (alpha, beta) = generalized_chvatal(&rows, &weights).ok_or(CutFailure::NotApplicable)?;
    make_cut(
        inst,
        alpha.iter().map(|a| *a as f64).collect(),
        beta as f64,
        CutScope::Global,
        CutClass::IntegerNoGood,
        &cone.vertex,
    )
}

/// Column sign classes of a matrix over the linking set:
/// `(nonpositive, nonnegative)` membership flags per linking index.
fn column_signs(rows: &[Vec<f64>], cols: &[usize]) -> (Vec<bool>, Vec<bool>) {
    let nonpos = cols.iter().map(|&j| rows.iter().all(|r| r[j] <= 0.0)).collect();
    let nonneg = cols.iter().map(|&j| rows.iter().all(|r| r[j] >= 0.0)).collect();
    (nonpos, nonneg)
}

fn binary_linking_point(inst: &MiblpInstance, x: &[f64]) -> bool {
    inst.linking_binary() && inst.linking.iter().all(|&j| (x[j] - x[j].round()).abs() <= EPS)
}

/// Benders-type cut for instances whose linking variables are binary.
pub fn gen_benders_binary(inst: &MiblpInstance, point: &Point, y_star: Option<&[f64]>, big_m: f64) -> Result<Cut, CutFailure> {
    if !binary_linking_point(inst, &point.x) {
        return Err(CutFailure::NotApplicable);
    }
    let y_star = y_star.ok_or(CutFailure::NoCertificate)?;
    let (nonpos, nonneg) = column_signs(&inst.a2, &inst.linking);
    let mut alpha_x = vec![0.0; inst.n1];
    let mut beta = -inst.follower_value(y_star);
    for (k, &j) in inst.linking.iter().enumerate() {
        let at_one = point.x[j].round() == 1.0;
        if at_one && !nonpos[k] {
            // M (1 - x_j) on the left-hand side.
            alpha_x[j] = -big_m;
            beta -= big_m;
        } else if !at_one && !nonneg[k] {
            alpha_x[j] = big_m;
        }
    }
    let mut alpha = alpha_x;
    alpha.extend(inst.d2.iter().map(|v| -v));
    make_cut(inst, alpha, beta, CutScope::Global, CutClass::BendersBinary, &point.stacked())
}

/// Big-M making the interdiction cut redundant whenever the leader
/// interdicts an item used by `y_star`.
pub fn interdiction_big_m(inst: &MiblpInstance, y_star: &[f64], limits: &MilpLimits) -> Result<f64, bilevel::OracleError> {
    let (coef_x, coef_y, _) = interdiction_terms(inst, y_star).expect("interdiction structure checked by caller");
    let top = bilevel::max_over_relaxation(inst, &coef_x, &coef_y, limits)?;
    Ok(bilevel::big_m_from_max(top, inst.follower_value(y_star)))
}

/// Left-hand side of the interdiction cut without its big-M term, as
/// coefficient vectors over `x` and `y`, plus the M-term index mask.
fn interdiction_terms(inst: &MiblpInstance, y_star: &[f64]) -> Option<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    let data = inst.interdiction.as_ref()?;
    let k = data.upper.len();
    let cols: Vec<usize> = (0..k).collect();
    let (nonpos, nonneg) = column_signs(&data.follower_rows, &cols);
    let mut coef_x = vec![0.0; inst.n1];
    let mut coef_y = inst.d2.clone();
    let mut m_term = vec![false; k];
    for i in 0..k {
        if nonpos[i] {
            coef_x[i] += inst.d2[i] * y_star[i];
        }
        if nonneg[i] && y_star[i].abs() <= EPS {
            coef_y[i] -= inst.d2[i];
        }
        if !nonpos[i] && y_star[i] > EPS {
            m_term[i] = true;
        }
    }
    Some((coef_x, coef_y, m_term))
}

/// Benders-type cut for interdiction instances.
pub fn gen_benders_interdiction(inst: &MiblpInstance, point: &Point, y_star: Option<&[f64]>, big_m: f64) -> Result<Cut, CutFailure> {
    if inst.interdiction.is_none() || !binary_linking_point(inst, &point.x) {
        return Err(CutFailure::NotApplicable);
    }
    let y_star = y_star.ok_or(CutFailure::NoCertificate)?;
    let (coef_x, coef_y, m_term) = interdiction_terms(inst, y_star).ok_or(CutFailure::NotApplicable)?;
    // coef . (x, y) - M sum_{m_term} x_i <= d2 y*, negated into >= form.
    let mut alpha: Vec<f64> = coef_x
        .iter()
        .enumerate()
        .map(|(i, c)| -c + if m_term[i] { big_m } else { 0.0 })
        .collect();
    alpha.extend(coef_y.iter().map(|v| -v));
    let beta = -inst.follower_value(y_star);
    make_cut(inst, alpha, beta, CutScope::Global, CutClass::BendersInterdiction, &point.stacked())
}

/// No-good cut on binary linking variables excluding `x_L = gamma`.
pub fn gen_generalized_no_good(inst: &MiblpInstance, point: &Point, evidence: &UbEvidence) -> Result<Cut, CutFailure> {
    if inst.linking.is_empty() || !binary_linking_point(inst, &point.x) {
        return Err(CutFailure::NotApplicable);
    }
    let gamma = inst.linking_values(&point.x);
    if evidence.gamma() != gamma.as_slice() {
        return Err(CutFailure::NotApplicable);
    }
    let mut alpha = vec![0.0; inst.dim()];
    let mut beta = 1.0;
    for (&j, &g) in inst.linking.iter().zip(&gamma) {
        if g == 0 {
            alpha[j] = 1.0;
        } else {
            alpha[j] = -1.0;
            beta -= 1.0;
        }
    }
    make_cut(
        inst,
        alpha,
        beta,
        CutScope::LinkingExcluding(gamma),
        CutClass::GeneralizedNoGood,
        &point.stacked(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilevel::best_ub;
    use crate::model::{knapsack_interdiction_toy, moore_bard, moore_bard_with_leader};
    use crate::simplex::{extract_cone, solve_lp};

    fn lim() -> MilpLimits {
        MilpLimits::default()
    }

    fn root_cone(inst: &MiblpInstance) -> ConeRays {
        let (rows, rhs) = inst.relaxation_rows();
        let objective: Vec<f64> = inst.c.iter().chain(&inst.d1).copied().collect();
        let lp = LpProblem {
            objective,
            rows,
            rhs,
            lower: inst.lower_bounds(),
            upper: inst.upper_bounds(),
        };
        let r = solve_lp(&lp).unwrap();
        extract_cone(&lp, &r).unwrap()
    }

    /// Checks `cut` is a positive multiple of `alpha . z >= beta`.
    fn same_cut(cut: &Cut, alpha: &[f64], beta: f64) {
        let coef = cut.coefficients();
        let k = alpha.iter().zip(&coef).find(|(a, _)| **a != 0.0).map(|(a, c)| c / a).unwrap();
        assert!(k > 0.0);
        for (a, c) in alpha.iter().zip(&coef) {
            assert!((a * k - c).abs() < 1e-7, "{coef:?} vs {alpha:?}");
        }
        assert!((beta * k - cut.beta).abs() < 1e-6, "{} vs {}", cut.beta, beta * k);
    }

    #[test]
    fn isic_on_moore_bard() {
        let mb = moore_bard();
        let cone = root_cone(&mb);
        assert_eq!(cone.vertex, vec![2.0, 4.0]);
        let cut = gen_isic_type1(&mb, &cone, Some(&[2.0])).unwrap();
        assert_eq!((cut.alpha_x.clone(), cut.alpha_y.clone(), cut.beta), (vec![0.0], vec![-1.0], -2.0));
        let mut pts = cut.geometry.unwrap().intersections;
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!((pts[0][0] - 0.4).abs() < 1e-9 && (pts[0][1] - 2.0).abs() < 1e-9);
        assert!((pts[1][0] - 6.0).abs() < 1e-9 && (pts[1][1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn improving_solution_set_rows() {
        let bfs = bfs_improving_solution(&moore_bard(), &[2.0], None);
        assert_eq!(
            bfs.rows,
            vec![vec![0.0, 1.0], vec![5.0, 0.0], vec![-1.0, 0.0], vec![-2.0, 0.0], vec![2.0, 0.0]]
        );
        assert_eq!(bfs.rhs, vec![2.0, 1.0, -7.0, -18.0, -6.0]);
    }

    #[test]
    fn boundary_certificate_rejected() {
        let mb = moore_bard();
        let mut cone = root_cone(&mb);
        // A solution exactly as good as the vertex is not a certificate.
        assert_eq!(gen_isic_type1(&mb, &cone, Some(&[4.0])), Err(CutFailure::NoCertificate));
        cone.vertex = vec![2.0, 3.0];
        let bfs = bfs_improving_solution(&mb, &[3.0], None);
        assert_eq!(intersection_cut_raw(&cone, &bfs).unwrap_err(), CutFailure::NoCertificate);
    }

    #[test]
    fn improving_direction_set_rows() {
        let cert = Certificate::ImprovingDirection {
            dy: vec![-1.0],
            drop_rows: vec![false; 4],
            drop_lower: vec![false],
            drop_upper: vec![true],
        };
        let bfs = bfs_improving_direction(&moore_bard(), &cert).unwrap();
        assert_eq!(
            bfs.rows,
            vec![vec![5.0, -4.0], vec![-1.0, -2.0], vec![-2.0, 1.0], vec![2.0, 10.0], vec![0.0, 1.0]]
        );
        assert_eq!(bfs.rhs, vec![-11.0, -13.0, -15.0, 24.0, 0.0]);
        let all_dropped = Certificate::ImprovingDirection {
            dy: vec![-1.0],
            drop_rows: vec![true; 4],
            drop_lower: vec![true],
            drop_upper: vec![true],
        };
        assert!(bfs_improving_direction(&moore_bard(), &all_dropped).unwrap().rows.is_empty());
    }

    #[test]
    fn idic_on_moore_bard() {
        let mb = moore_bard();
        let cone = root_cone(&mb);
        let cut = gen_idic(&mb, &cone, &lim()).unwrap();
        same_cut(&cut, &[-37.0, -214.0], -510.0);
        assert!(cut.is_satisfied(&Point::new(vec![2.0], vec![2.0]), 1e-9));
        assert!(!cut.is_satisfied(&Point::new(vec![2.0], vec![4.0]), 1e-9));
        let geometry = cut.geometry.unwrap();
        let mut pts = geometry.intersections;
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!((pts[0][0] - 18.0 / 29.0).abs() < 1e-9 && (pts[0][1] - 66.0 / 29.0).abs() < 1e-9);
        assert!((pts[1][0] - 8.0).abs() < 1e-9 && (pts[1][1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn idic_without_follower_objective_fails() {
        let mut mb = moore_bard();
        mb.d2 = vec![0.0];
        let cone = root_cone(&moore_bard());
        assert_eq!(gen_idic(&mb, &cone, &lim()), Err(CutFailure::NoCertificate));
    }

    #[test]
    fn isic_type2_on_moore_bard() {
        let mb = moore_bard();
        let cone = root_cone(&mb);
        let p = Point::new(vec![2.0], vec![4.0]);
        let (y, drops) = type2_improving_solution(&mb, &p, &lim()).unwrap().unwrap();
        assert!(mb.follower_value(&y) <= 3.0);
        let type1 = bfs_improving_solution(&mb, &[2.0], None);
        let type2 = bfs_improving_solution(&mb, &y, Some(&drops));
        assert!(type2.rows.len() <= type1.rows.len());
        let cut2 = gen_isic_type2(&mb, &cone, &lim()).unwrap();
        let cut1 = gen_isic_type1(&mb, &cone, Some(&[2.0])).unwrap();
        // Along the y axis the type II cut is at least as deep.
        assert!(cut2.violation(&cone.vertex) / cut2.alpha_y[0].abs() >= cut1.violation(&cone.vertex) / cut1.alpha_y[0].abs() - 1e-9);
    }

    #[test]
    fn hypercube_on_moore_bard() {
        let mb = moore_bard();
        let cone = root_cone(&mb);
        let ub = best_ub(&mb, &[2], &lim()).unwrap();
        assert_eq!(ub.evidence.value(), Some(-22.0));
        let cut = gen_hypercube_ic(&mb, &cone, &ub.evidence).unwrap();
        same_cut(&cut, &[3.0, -8.0], -19.0);
        assert_eq!(cut.scope, CutScope::LinkingExcluding(vec![2]));
        let wrong = best_ub(&mb, &[3], &lim()).unwrap();
        assert_eq!(gen_hypercube_ic(&mb, &cone, &wrong.evidence), Err(CutFailure::NotApplicable));
    }

    #[test]
    fn hypercube_emitted_when_fixed_problem_infeasible() {
        let mb = moore_bard_with_leader(3.0, -1.0);
        let cone = root_cone(&mb);
        assert!(cone.vertex[0].abs() < 1e-9);
        let ub = best_ub(&mb, &[0], &lim()).unwrap();
        assert!(ub.solution.is_none());
        assert!(gen_hypercube_ic(&mb, &cone, &ub.evidence).is_ok());
    }

    #[test]
    fn whole_space_is_cone_contained() {
        let mb = moore_bard();
        let cone = root_cone(&mb);
        let bfs = BfsSet { rows: vec![], rhs: vec![] };
        // An empty description has infinite margin and no boundary.
        assert_eq!(intersection_cut_raw(&cone, &bfs).unwrap_err(), CutFailure::ConeContained);
    }

    #[test]
    fn integer_no_good_on_moore_bard() {
        let mb = moore_bard();
        let cone = root_cone(&mb);
        let cut = gen_integer_no_good(&mb, &cone).unwrap();
        assert_eq!((cut.alpha_x.clone(), cut.alpha_y.clone(), cut.beta), (vec![2.0], vec![-3.0], -7.0));
        let rows: Vec<(Vec<f64>, f64)> = cone.binding_rows.iter().map(|r| (r.coef.clone(), r.rhs)).collect();
        let mut weights = vec![0i64; 2];
        for (k, r) in rows.iter().enumerate() {
            weights[k] = if r.0 == vec![5.0, -4.0] { 14 } else { 70 };
        }
        assert_eq!(generalized_chvatal(&rows, &weights), Some((vec![0, -1], -3)));
    }

    #[test]
    fn integer_no_good_needs_integral_vertex() {
        let mb = moore_bard();
        let mut cone = root_cone(&mb);
        cone.vertex = vec![1.5, 2.0];
        assert_eq!(gen_integer_no_good(&mb, &cone), Err(CutFailure::NotApplicable));
    }

    fn benders_toy() -> MiblpInstance {
        let mut inst = moore_bard();
        inst.ux = vec![1.0];
        inst.uy = vec![3.0];
        inst.a2 = vec![vec![1.0]];
        inst.g2 = vec![vec![1.0]];
        inst.b2 = vec![1.0];
        inst
    }

    #[test]
    fn benders_binary_toy() {
        let inst = benders_toy();
        let p = Point::new(vec![0.0], vec![2.0]);
        let m = bilevel::compute_big_m(&inst, &[1.0], &lim()).unwrap();
        let cut = gen_benders_binary(&inst, &p, Some(&[1.0]), m).unwrap();
        assert_eq!((cut.alpha_x.clone(), cut.alpha_y.clone(), cut.beta), (vec![0.0], vec![-1.0], -1.0));
        for q in [Point::new(vec![0.0], vec![1.0]), Point::new(vec![1.0], vec![0.0])] {
            assert!(cut.is_satisfied(&q, 1e-9));
        }
    }

    #[test]
    fn benders_binary_mixed_sign_column() {
        let mut inst = benders_toy();
        inst.a2 = vec![vec![1.0], vec![-1.0]];
        inst.g2 = vec![vec![1.0], vec![0.0]];
        inst.b2 = vec![1.0, -1.0];
        let p = Point::new(vec![1.0], vec![2.0]);
        let cut = gen_benders_binary(&inst, &p, Some(&[0.0]), 3.0).unwrap();
        // -y - 3 (1 - x) >= 0 after moving terms: alpha_x = -3, beta = -3.
        same_cut(&cut, &[-3.0, -1.0], -3.0);
    }

    #[test]
    fn benders_interdiction_toy() {
        let toy = knapsack_interdiction_toy();
        let p = Point::new(vec![0.0, 0.0], vec![0.0, 0.0]);
        let cut = gen_benders_interdiction(&toy, &p, Some(&[1.0, 0.0]), 10.0).unwrap();
        same_cut(&cut, &[3.0, 0.0, 3.0, 2.0], 3.0);
        let feasible = [
            Point::new(vec![0.0, 0.0], vec![1.0, 0.0]),
            Point::new(vec![1.0, 0.0], vec![0.0, 1.0]),
            Point::new(vec![0.0, 1.0], vec![1.0, 0.0]),
        ];
        for q in &feasible {
            assert!(cut.is_satisfied(q, 1e-9));
        }
        assert!(!cut.is_satisfied(&p, 1e-9));
        assert_eq!(
            gen_benders_interdiction(&moore_bard(), &p, Some(&[1.0]), 1.0),
            Err(CutFailure::NotApplicable)
        );
    }

    #[test]
    fn generalized_no_good_examples() {
        let toy = knapsack_interdiction_toy();
        let ub = best_ub(&toy, &[1, 0], &lim()).unwrap();
        let cut = gen_generalized_no_good(&toy, &Point::new(vec![1.0, 0.0], vec![0.0, 0.0]), &ub.evidence).unwrap();
        assert_eq!((cut.alpha_x.clone(), cut.beta), (vec![-1.0, 1.0], 0.0));
        let ub = best_ub(&toy, &[0, 0], &lim()).unwrap();
        let cut = gen_generalized_no_good(&toy, &Point::new(vec![0.0, 0.0], vec![1.0, 0.0]), &ub.evidence).unwrap();
        assert_eq!((cut.alpha_x.clone(), cut.beta), (vec![1.0, 1.0], 1.0));
        let mb = moore_bard();
        let ub = best_ub(&mb, &[2], &lim()).unwrap();
        assert_eq!(
            gen_generalized_no_good(&mb, &Point::new(vec![2.0], vec![4.0]), &ub.evidence),
            Err(CutFailure::NotApplicable)
        );
    }

    #[test]
    fn modified_leader_point_yields_no_cut() {
        let inst = moore_bard_with_leader(3.0, -1.0);
        let cone = root_cone(&inst);
        assert!((cone.vertex[0]).abs() < 1e-9 && (cone.vertex[1] - 1.5).abs() < 1e-9);
        assert_eq!(bilevel::phi(&inst, &[0.0], &lim()).unwrap(), None);
        assert_eq!(gen_isic_type1(&inst, &cone, None), Err(CutFailure::NoCertificate));
        assert!(gen_isic_type2(&inst, &cone, &lim()).is_err());
        assert!(gen_idic(&inst, &cone, &lim()).is_err());
        assert_eq!(gen_integer_no_good(&inst, &cone), Err(CutFailure::NotApplicable));
    }

    #[test]
    fn normalization_rules() {
        let mut a = vec![4.0, -6.0];
        let mut b = -15.0;
        normalize(&mut a, &mut b);
        assert_eq!((a, b), (vec![2.0, -3.0], -7.5));
        let mut a = vec![0.5, 2.0_f64.sqrt()];
        let mut b = 1.0;
        normalize(&mut a, &mut b);
        assert!((a[1] - 1.0).abs() < 1e-12);
        let mut a = vec![-37.0 / 214.0, -1.0];
        let mut b = -510.0 / 214.0;
        normalize(&mut a, &mut b);
        assert_eq!((a, b), (vec![-37.0, -214.0], -510.0));
        let mut a = vec![2.0 / 3.0, -1.0];
        let mut b = 0.5;
        normalize(&mut a, &mut b);
        assert_eq!((a, b), (vec![2.0, -3.0], 1.5));
    }
}
