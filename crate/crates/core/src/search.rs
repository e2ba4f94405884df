//! Branch-and-cut driver.
//!
//! Nodes are chosen best-bound first with plunging into one child after each
//! branching. Cuts live in a store indexed by id; a node's pool lists the ids
//! added on its path from the root, and globally valid Benders and no-good
//! cuts sit in a pool shared by every node.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bilevel::{self, OracleError, UbEvidence};
use crate::cuts::{self, Cut, CutClass, CutFailure, CutScope};
use crate::milp::MilpLimits;
use crate::model::{check_assumptions, is_integral, AssumptionReport, MiblpInstance, ModelError, Point, EPS};
use crate::simplex::{extract_cone, solve_lp, LpError, LpProblem, LpResult, LpStatus};

/// When an intersection-cut class may be separated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IcStrategy {
    Always,
    AlwaysRoot,
    /// Only at vertices integral on every integer variable.
    XYInt,
    /// Only when the linking part is integral.
    LInt,
    /// Only when the follower part is integral.
    YInt,
    /// When either the linking or the follower part is integral.
    YLInt,
}

impl IcStrategy {
    pub const ALL: [IcStrategy; 6] = [
        IcStrategy::Always,
        IcStrategy::AlwaysRoot,
        IcStrategy::XYInt,
        IcStrategy::LInt,
        IcStrategy::YInt,
        IcStrategy::YLInt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IcStrategy::Always => "always",
            IcStrategy::AlwaysRoot => "always-root",
            IcStrategy::XYInt => "xyint",
            IcStrategy::LInt => "lint",
            IcStrategy::YInt => "yint",
            IcStrategy::YLInt => "ylint",
        }
    }

    pub fn from_name(s: &str) -> Option<IcStrategy> {
        IcStrategy::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branching {
    /// Any integer variable with a fractional value.
    Fractional,
    /// Unfixed linking variables first, integer-valued ones included.
    Linking,
    /// Fractional follower variables before fractional leader variables.
    SecondLevel,
}

impl Branching {
    pub const ALL: [Branching; 3] = [Branching::Fractional, Branching::Linking, Branching::SecondLevel];

    pub fn name(self) -> &'static str {
        match self {
            Branching::Fractional => "frac",
            Branching::Linking => "link",
            Branching::SecondLevel => "second",
        }
    }

    pub fn from_name(s: &str) -> Option<Branching> {
        Branching::ALL.into_iter().find(|b| b.name() == s)
    }
}

/// Turns IDIC separation off when it rarely succeeds early in the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdicSwitchOff {
    /// Number of processed nodes after which the success rate is judged.
    pub after_nodes: usize,
    /// Minimum fraction of IDIC calls that must have produced a cut.
    pub min_success_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub enabled: BTreeSet<CutClass>,
    /// Strategy per gated class; missing entries mean [`IcStrategy::Always`].
    pub ic_strategy: BTreeMap<CutClass, IcStrategy>,
    pub branching: Branching,
    pub tailoff_threshold: f64,
    pub milp_integrality_cuts: bool,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub eps: f64,
    /// Cut rounds per node outside the mandatory case.
    pub max_cut_rounds: usize,
    /// Cut rounds per node while the vertex is integral but infeasible.
    pub max_mandatory_rounds: usize,
    pub idic_switch_off: Option<IdicSwitchOff>,
    pub oracle_limits: MilpLimits,
    /// Keep every emitted cut with its generation context.
    pub keep_cut_log: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("tailoff threshold {0} must lie strictly between 0 and 1")]
    Tailoff(f64),
    #[error("tolerance {0} must be positive")]
    Eps(f64),
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::no_cuts()
    }
}

impl SolverConfig {
    /// Branching only; no bilevel or integrality cuts.
    pub fn no_cuts() -> Self {
        SolverConfig {
            enabled: BTreeSet::new(),
            ic_strategy: BTreeMap::new(),
            branching: Branching::Fractional,
            tailoff_threshold: 0.05,
            milp_integrality_cuts: false,
            time_limit: None,
            node_limit: None,
            eps: EPS,
            max_cut_rounds: 20,
            max_mandatory_rounds: 100,
            idic_switch_off: None,
            oracle_limits: MilpLimits::default(),
            keep_cut_log: false,
        }
    }

    /// A single class with the given strategy.
    pub fn only(class: CutClass, strategy: IcStrategy) -> Self {
        let mut c = SolverConfig::no_cuts();
        c.enable(class, strategy);
        c
    }

    pub fn enable(&mut self, class: CutClass, strategy: IcStrategy) {
        if class == CutClass::Integrality {
            self.milp_integrality_cuts = true;
        }
        self.enabled.insert(class);
        if class.strategy_gated() {
            self.ic_strategy.insert(class, strategy);
        }
    }

    pub fn pure_integer() -> Self {
        let mut c = SolverConfig::no_cuts();
        c.enable(CutClass::Idic, IcStrategy::Always);
        c.enable(CutClass::IsicType1, IcStrategy::LInt);
        c.milp_integrality_cuts = true;
        c
    }

    pub fn binary_first_level() -> Self {
        let mut c = SolverConfig::no_cuts();
        c.enable(CutClass::BendersBinary, IcStrategy::Always);
        c.enable(CutClass::GeneralizedNoGood, IcStrategy::Always);
        c.enable(CutClass::IsicType1, IcStrategy::XYInt);
        c.enable(CutClass::Idic, IcStrategy::Always);
        c.milp_integrality_cuts = true;
        c
    }

    pub fn interdiction() -> Self {
        let mut c = SolverConfig::no_cuts();
        c.enable(CutClass::BendersBinary, IcStrategy::Always);
        c.enable(CutClass::BendersInterdiction, IcStrategy::Always);
        c.enable(CutClass::IsicType1, IcStrategy::LInt);
        c.branching = Branching::Linking;
        c
    }

    /// Named default bundles.
    pub fn bundles() -> Vec<(&'static str, SolverConfig)> {
        vec![
            ("pure-integer", SolverConfig::pure_integer()),
            ("binary-first-level", SolverConfig::binary_first_level()),
            ("interdiction", SolverConfig::interdiction()),
        ]
    }

    /// Bundle matching the structure of `inst`.
    pub fn default_for(inst: &MiblpInstance) -> Self {
        if inst.interdiction.is_some() {
            SolverConfig::interdiction()
        } else if !inst.linking.is_empty() && inst.linking_binary() {
            SolverConfig::binary_first_level()
        } else {
            SolverConfig::pure_integer()
        }
    }

    pub fn strategy(&self, class: CutClass) -> IcStrategy {
        self.ic_strategy.get(&class).copied().unwrap_or(IcStrategy::Always)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tailoff_threshold > 0.0 && self.tailoff_threshold < 1.0) {
            return Err(ConfigError::Tailoff(self.tailoff_threshold));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(ConfigError::Eps(self.eps));
        }
        Ok(())
    }
}

/// Integrality structure of a relaxation vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexStructure {
    pub linking_integral: bool,
    pub x_integral: bool,
    pub y_integral: bool,
}

impl VertexStructure {
    pub fn of(inst: &MiblpInstance, p: &Point) -> Self {
        VertexStructure {
            linking_integral: inst.linking_integral(&p.x),
            x_integral: (0..inst.r1).all(|j| is_integral(p.x[j])),
            y_integral: (0..inst.r2).all(|j| is_integral(p.y[j])),
        }
    }

    /// Whether the vertex satisfies every integrality requirement.
    pub fn in_s(&self) -> bool {
        self.x_integral && self.y_integral
    }
}

/// Structural and strategy gate for running a generator at a vertex.
pub fn should_generate(class: CutClass, vs: &VertexStructure, strategy: IcStrategy, depth: usize) -> bool {
    match class {
        CutClass::IntegerNoGood => vs.in_s(),
        CutClass::BendersBinary | CutClass::BendersInterdiction | CutClass::GeneralizedNoGood | CutClass::HypercubeIc => {
            vs.linking_integral
        }
        CutClass::Integrality => !vs.in_s(),
        CutClass::IsicType1 | CutClass::IsicType2 | CutClass::Idic => match strategy {
            IcStrategy::Always => true,
            IcStrategy::AlwaysRoot => depth == 0,
            IcStrategy::XYInt => vs.in_s(),
            IcStrategy::LInt => vs.linking_integral,
            IcStrategy::YInt => vs.y_integral,
            IcStrategy::YLInt => vs.y_integral || vs.linking_integral,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OraclePolicy {
    pub solve_second_level: bool,
    pub solve_ub: bool,
}

/// Which auxiliary problems to solve at a vertex.
pub fn oracle_policy(vs: &VertexStructure, config: &SolverConfig, depth: usize, linking_fixed: bool) -> OraclePolicy {
    let gate = |class: CutClass| config.enabled.contains(&class) && should_generate(class, vs, config.strategy(class), depth);
    let needs_follower = [CutClass::IsicType1, CutClass::BendersBinary, CutClass::BendersInterdiction]
        .into_iter()
        .any(gate);
    let needs_ub = [CutClass::HypercubeIc, CutClass::GeneralizedNoGood].into_iter().any(gate);
    OraclePolicy {
        solve_second_level: vs.in_s() || linking_fixed || needs_follower,
        solve_ub: linking_fixed || needs_ub,
    }
}

/// Running per-variable average of objective gain per unit of bound change.
#[derive(Debug, Clone, Default)]
pub struct Pseudocosts {
    down: Vec<(f64, usize)>,
    up: Vec<(f64, usize)>,
}

impl Pseudocosts {
    pub fn new(n: usize) -> Self {
        Pseudocosts {
            down: vec![(0.0, 0); n],
            up: vec![(0.0, 0); n],
        }
    }

    pub fn record(&mut self, var: usize, up: bool, gain_per_unit: f64) {
        let slot = if up { &mut self.up[var] } else { &mut self.down[var] };
        slot.0 += gain_per_unit.max(0.0);
        slot.1 += 1;
    }

    fn estimate(&self, var: usize, up: bool) -> f64 {
        let table = if up { &self.up } else { &self.down };
        let (sum, count) = table[var];
        if count > 0 {
            return sum / count as f64;
        }
        let (total, seen) = table.iter().fold((0.0, 0usize), |(s, c), (v, k)| if *k > 0 { (s + v / *k as f64, c + 1) } else { (s, c) });
        if seen > 0 {
            total / seen as f64
        } else {
            1.0
        }
    }

    /// Product score of the estimated down and up gains.
    pub fn score(&self, var: usize, frac: f64) -> f64 {
        let down = (self.estimate(var, false) * frac).max(1e-6);
        let up = (self.estimate(var, true) * (1.0 - frac)).max(1e-6);
        down * up
    }
}

/// A branching variable (index into stacked `(x, y)`) and its LP value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDecision {
    pub var: usize,
    pub value: f64,
}

impl BranchDecision {
    /// Bounds `(down_upper, up_lower)` of the two children.
    pub fn split(&self, upper: f64) -> (f64, f64) {
        if is_integral(self.value) {
            let v = self.value.round();
            if v < upper {
                (v, v + 1.0)
            } else {
                (v - 1.0, v)
            }
        } else {
            (self.value.floor(), self.value.ceil())
        }
    }

    fn frac(&self) -> f64 {
        if is_integral(self.value) {
            0.5
        } else {
            self.value - self.value.floor()
        }
    }
}

/// Picks the branching variable at vertex `z` within bounds `lower..upper`.
///
/// Returns `None` when the strategy has no candidate, which happens at
/// integral vertices under fractional or second-level branching.
pub fn select_branching(
    inst: &MiblpInstance,
    lower: &[f64],
    upper: &[f64],
    z: &[f64],
    strategy: Branching,
    pseudocosts: &Pseudocosts,
) -> Option<BranchDecision> {
    let n1 = inst.n1;
    let fractional_x: Vec<usize> = (0..inst.r1).filter(|&j| !is_integral(z[j])).collect();
    let fractional_y: Vec<usize> = (0..inst.r2).map(|j| n1 + j).filter(|&k| !is_integral(z[k])).collect();
    let unfixed_linking: Vec<usize> = inst.linking.iter().copied().filter(|&j| lower[j] < upper[j]).collect();
    let candidates = match strategy {
        Branching::Fractional => fractional_x.into_iter().chain(fractional_y).collect::<Vec<_>>(),
        Branching::Linking if !unfixed_linking.is_empty() => unfixed_linking,
        Branching::Linking => fractional_x.into_iter().chain(fractional_y).collect(),
        Branching::SecondLevel if !fractional_y.is_empty() => fractional_y,
        Branching::SecondLevel => fractional_x,
    };
    let mut best: Option<(BranchDecision, f64)> = None;
    for var in candidates {
        let d = BranchDecision { var, value: z[var] };
        let score = pseudocosts.score(var, d.frac());
        if best.as_ref().is_none_or(|(_, s)| score > *s * (1.0 + 1e-12)) {
            best = Some((d, score));
        }
    }
    best.map(|(d, _)| d)
}

/// Whether another cut round is worthwhile given the bounds seen so far.
pub fn tailoff_check(history: &[f64], threshold: f64) -> bool {
    match history {
        [.., prev, last] => (last - prev).abs() / prev.abs().max(1.0) >= threshold,
        _ => true,
    }
}

fn integral_row(coef: &[f64], rhs: f64, mask: &[bool]) -> bool {
    let int = |v: f64| (v - v.round()).abs() <= 1e-9;
    int(rhs) && coef.iter().zip(mask).all(|(c, m)| *c == 0.0 || (*m && int(*c)))
}

fn fractional_part(v: f64) -> f64 {
    let f = v - v.floor();
    if !(1e-9..=1.0 - 1e-9).contains(&f) {
        0.0
    } else {
        f
    }
}

/// One rounding attempt per fractional basic integer variable.
pub fn integrality_cut_attempts(inst: &MiblpInstance, lp: &LpProblem, res: &LpResult) -> Vec<Result<Cut, CutFailure>> {
    let mask = inst.integer_mask();
    let Some(cone) = extract_cone(lp, res) else {
        return Vec::new();
    };
    let slacks_integral = cone.binding_rows.iter().all(|r| integral_row(&r.coef, r.rhs, &mask));
    let n = inst.dim();
    (0..n)
        .filter(|&j| mask[j] && !is_integral(res.x[j]))
        .map(|j| {
            if !slacks_integral {
                return Err(CutFailure::NotApplicable);
            }
            let f0 = fractional_part(res.x[j]);
            let mut alpha = vec![0.0; n];
            let mut beta = f0;
            for (row, dir) in cone.binding_rows.iter().zip(&res.directions) {
                let fk = fractional_part(-dir[j]);
                if fk == 0.0 {
                    continue;
                }
                for (a, c) in alpha.iter_mut().zip(&row.coef) {
                    *a += fk * c;
                }
                beta += fk * row.rhs;
            }
            cuts::make_cut(inst, alpha, beta, CutScope::Global, CutClass::Integrality, &res.x)
        })
        .collect()
}

/// Rounding cuts from the optimal tableau at a fractional vertex.
pub fn simple_integrality_cuts(inst: &MiblpInstance, lp: &LpProblem, res: &LpResult) -> Vec<Cut> {
    integrality_cut_attempts(inst, lp, res).into_iter().filter_map(Result::ok).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Limit,
    Infeasible,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub cg_calls: usize,
    pub cuts_added: usize,
    pub no_certificate: usize,
    pub cone_contained: usize,
    pub not_applicable: usize,
    pub not_violated: usize,
}

impl ClassStats {
    fn record(&mut self, outcome: &Result<Cut, CutFailure>) {
        self.cg_calls += 1;
        match outcome {
            Ok(_) => self.cuts_added += 1,
            Err(CutFailure::NoCertificate) => self.no_certificate += 1,
            Err(CutFailure::ConeContained) => self.cone_contained += 1,
            Err(CutFailure::NotApplicable) => self.not_applicable += 1,
            Err(CutFailure::NotViolated) => self.not_violated += 1,
        }
    }

    pub fn failures(&self) -> usize {
        self.no_certificate + self.cone_contained + self.not_applicable + self.not_violated
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleCalls {
    pub second_level: usize,
    pub ub: usize,
    pub big_m: usize,
    pub type2: usize,
    pub idic: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvent {
    pub nodes: usize,
    pub lower: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: usize,
    pub oracle: OracleCalls,
    pub per_class: BTreeMap<CutClass, ClassStats>,
    pub lp_seconds: f64,
    pub oracle_seconds: f64,
    pub cut_seconds: f64,
    pub total_seconds: f64,
    pub root_bound_before_cuts: Option<f64>,
    pub root_bound_after_cuts: Option<f64>,
    pub root_gap_before_cuts: Option<f64>,
    pub root_gap_after_cuts: Option<f64>,
    pub incumbents_from_reaction: usize,
    /// Linking assignments for which the fixed-linking problem was solved, in order.
    pub ub_log: Vec<Vec<i64>>,
    pub bound_trace: Vec<BoundEvent>,
}

impl SolveStats {
    pub fn class(&self, class: CutClass) -> ClassStats {
        self.per_class.get(&class).cloned().unwrap_or_default()
    }

    /// Fraction of intersection-cut calls that produced no cut.
    pub fn ic_failure_rate(&self) -> Option<f64> {
        let (calls, failures) = self
            .per_class
            .iter()
            .filter(|(c, _)| c.is_intersection_cut())
            .fold((0, 0), |(c, f), (_, s)| (c + s.cg_calls, f + s.failures()));
        (calls > 0).then(|| failures as f64 / calls as f64)
    }
}

/// Generation context of an emitted cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub id: usize,
    pub node: usize,
    pub depth: usize,
    pub vertex: Vec<f64>,
    pub node_lower: Vec<f64>,
    pub node_upper: Vec<f64>,
    /// Ids of cuts present in the node LP when this cut was derived.
    pub pool: Vec<usize>,
    /// For linking-excluding cuts, whether the fixed-linking problem at the
    /// excluded assignment had been solved before emission.
    pub ub_recorded_first: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub incumbent: Option<(Point, f64)>,
    pub lower_bound: f64,
    pub gap: f64,
    pub stats: SolveStats,
    /// All cuts emitted, indexed by id (empty unless the log is kept).
    pub cuts: Vec<Cut>,
    pub cut_log: Vec<CutRecord>,
}

impl SolveResult {
    pub fn value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(_, v)| *v)
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance violates the solver assumptions: {0:?}")]
    Assumptions(AssumptionReport),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("auxiliary problem failed: {0}")]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("final incumbent failed the feasibility re-check")]
    IncumbentRejected,
}

/// Relative gap `(upper - lower) / max(1, |upper|)`.
pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    if upper.is_finite() && lower.is_finite() {
        ((upper - lower) / upper.abs().max(1.0)).max(0.0)
    } else {
        f64::INFINITY
    }
}

struct Node {
    id: usize,
    depth: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    pool: Vec<usize>,
    bound: f64,
    /// Variable, direction (true for up) and distance moved by the last branching.
    branched: Option<(usize, bool, f64)>,
}

struct Open(Node);

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: smaller bound, then smaller id, ranks higher.
        other.0.bound.total_cmp(&self.0.bound).then(other.0.id.cmp(&self.0.id))
    }
}

enum NodeOutcome {
    Pruned,
    Branch(Node, Node),
}

fn key(values: impl Iterator<Item = f64>) -> Vec<u64> {
    values.map(|v| (v + 0.0).to_bits()).collect()
}

struct Solver<'a> {
    inst: &'a MiblpInstance,
    config: &'a SolverConfig,
    applicable: BTreeSet<CutClass>,
    base_rows: Vec<Vec<f64>>,
    base_rhs: Vec<f64>,
    objective: Vec<f64>,
    stats: SolveStats,
    incumbent: Option<(Point, f64)>,
    store: Vec<Cut>,
    global_pool: Vec<usize>,
    log: Vec<CutRecord>,
    pseudocosts: Pseudocosts,
    follower_cache: HashMap<Vec<u64>, Option<(Vec<f64>, f64)>>,
    reaction_cache: HashMap<Vec<u64>, Option<Vec<f64>>>,
    ub_cache: HashMap<Vec<i64>, UbEvidence>,
    big_m_cache: HashMap<(CutClass, Vec<u64>), f64>,
    idic_disabled: bool,
    next_id: usize,
}

/// Whether `class` can ever apply to `inst`.
pub fn class_applies(inst: &MiblpInstance, class: CutClass) -> bool {
    let binary_linking = !inst.linking.is_empty() && inst.linking_binary();
    match class {
        CutClass::IntegerNoGood => inst.is_pure_integer() && inst.constraint_data_integral(),
        CutClass::BendersBinary | CutClass::GeneralizedNoGood => binary_linking,
        CutClass::BendersInterdiction => inst.interdiction.is_some() && binary_linking,
        CutClass::IsicType1 => cuts::improving_solution_sets_apply(inst),
        CutClass::IsicType2 => cuts::improving_solution_sets_apply(inst) && inst.follower_objective_integral(),
        CutClass::Idic => cuts::improving_direction_sets_apply(inst),
        CutClass::HypercubeIc => !inst.linking.is_empty(),
        CutClass::Integrality => inst.r1 + inst.r2 > 0,
    }
}

impl<'a> Solver<'a> {
    fn new(inst: &'a MiblpInstance, config: &'a SolverConfig) -> Self {
        let (base_rows, base_rhs) = inst.relaxation_rows();
        let applicable = config
            .enabled
            .iter()
            .copied()
            .filter(|c| *c != CutClass::Integrality && class_applies(inst, *c))
            .collect();
        Solver {
            inst,
            config,
            applicable,
            base_rows,
            base_rhs,
            objective: inst.c.iter().chain(&inst.d1).copied().collect(),
            stats: SolveStats::default(),
            incumbent: None,
            store: Vec::new(),
            global_pool: Vec::new(),
            log: Vec::new(),
            pseudocosts: Pseudocosts::new(inst.dim()),
            follower_cache: HashMap::new(),
            reaction_cache: HashMap::new(),
            ub_cache: HashMap::new(),
            big_m_cache: HashMap::new(),
            idic_disabled: false,
            next_id: 0,
        }
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(_, v)| *v)
    }

    fn prunable(&self, bound: f64) -> bool {
        bound >= self.incumbent_value() - self.config.eps
    }

    fn offer(&mut self, p: Point, value: f64) {
        if value < self.incumbent_value() - 1e-12 {
            self.incumbent = Some((p, value));
        }
    }

    fn node_lp(&self, node: &Node) -> LpProblem {
        let mut rows = self.base_rows.clone();
        let mut rhs = self.base_rhs.clone();
        for &id in self.global_pool.iter().chain(&node.pool) {
            rows.push(self.store[id].coefficients());
            rhs.push(self.store[id].beta);
        }
        LpProblem {
            objective: self.objective.clone(),
            rows,
            rhs,
            lower: node.lower.clone(),
            upper: node.upper.clone(),
        }
    }

    fn follower_at(&mut self, x: &[f64]) -> Result<Option<(Vec<f64>, f64)>, OracleError> {
        let k = key(self.inst.linking.iter().map(|&j| x[j]));
        if let Some(hit) = self.follower_cache.get(&k) {
            return Ok(hit.clone());
        }
        let t = Instant::now();
        self.stats.oracle.second_level += 1;
        let r = bilevel::solve_follower(self.inst, x, &self.config.oracle_limits)?;
        self.stats.oracle_seconds += t.elapsed().as_secs_f64();
        self.follower_cache.insert(k, r.clone());
        Ok(r)
    }

    fn try_reaction(&mut self, x: &[f64], phi: f64) -> Result<(), OracleError> {
        let k = key(x.iter().copied());
        let y = match self.reaction_cache.get(&k) {
            Some(hit) => hit.clone(),
            None => {
                let t = Instant::now();
                self.stats.oracle.second_level += 1;
                let r = bilevel::reaction_given_phi(self.inst, x, phi, &self.config.oracle_limits)?;
                self.stats.oracle_seconds += t.elapsed().as_secs_f64();
                self.reaction_cache.insert(k, r.clone());
                r
            }
        };
        if let Some(y) = y {
            let p = Point::new(x.to_vec(), y);
            let v = self.inst.leader_value(&p);
            if v < self.incumbent_value() - 1e-12 {
                self.stats.incumbents_from_reaction += 1;
                self.offer(p, v);
            }
        }
        Ok(())
    }

    fn ub_at(&mut self, gamma: &[i64]) -> Result<UbEvidence, OracleError> {
        if let Some(hit) = self.ub_cache.get(gamma) {
            return Ok(hit.clone());
        }
        let t = Instant::now();
        self.stats.oracle.ub += 1;
        self.stats.ub_log.push(gamma.to_vec());
        let out = bilevel::best_ub(self.inst, gamma, &self.config.oracle_limits)?;
        self.stats.oracle_seconds += t.elapsed().as_secs_f64();
        if let Some((p, v)) = out.solution {
            self.offer(p, v);
        }
        self.ub_cache.insert(gamma.to_vec(), out.evidence.clone());
        Ok(out.evidence)
    }

    fn big_m(&mut self, class: CutClass, y_star: &[f64]) -> Result<f64, OracleError> {
        let k = (class, key(y_star.iter().copied()));
        if let Some(m) = self.big_m_cache.get(&k) {
            return Ok(*m);
        }
        self.stats.oracle.big_m += 1;
        let m = if class == CutClass::BendersInterdiction {
            cuts::interdiction_big_m(self.inst, y_star, &self.config.oracle_limits)?
        } else {
            bilevel::compute_big_m(self.inst, y_star, &self.config.oracle_limits)?
        };
        self.big_m_cache.insert(k, m);
        Ok(m)
    }

    /// Runs one generator; oracle failures count as missing certificates.
    fn attempt(
        &mut self,
        class: CutClass,
        lp: &LpProblem,
        res: &LpResult,
        follower: &Option<(Vec<f64>, f64)>,
    ) -> Result<Cut, CutFailure> {
        let inst = self.inst;
        let limits = self.config.oracle_limits;
        let p = Point::from_stacked(&res.x, inst.n1);
        let cone = extract_cone(lp, res);
        let y_star = follower.as_ref().map(|(y, _)| y.as_slice());
        let need_cone = || cone.as_ref().ok_or(CutFailure::NotApplicable);
        match class {
            CutClass::IntegerNoGood => cuts::gen_integer_no_good(inst, need_cone()?),
            CutClass::IsicType1 => cuts::gen_isic_type1(inst, need_cone()?, y_star),
            CutClass::IsicType2 => {
                self.stats.oracle.type2 += 1;
                cuts::gen_isic_type2(inst, need_cone()?, &limits)
            }
            CutClass::Idic => {
                self.stats.oracle.idic += 1;
                cuts::gen_idic(inst, need_cone()?, &limits)
            }
            CutClass::HypercubeIc => {
                let cone = need_cone()?;
                if !inst.linking_integral(&p.x) {
                    return Err(CutFailure::NotApplicable);
                }
                let ev = self.ub_at(&inst.linking_values(&p.x)).map_err(|_| CutFailure::NoCertificate)?;
                cuts::gen_hypercube_ic(inst, cone, &ev)
            }
            CutClass::GeneralizedNoGood => {
                if !inst.linking_integral(&p.x) {
                    return Err(CutFailure::NotApplicable);
                }
                let ev = self.ub_at(&inst.linking_values(&p.x)).map_err(|_| CutFailure::NoCertificate)?;
                cuts::gen_generalized_no_good(inst, &p, &ev)
            }
            CutClass::BendersBinary | CutClass::BendersInterdiction => {
                let y = y_star.ok_or(CutFailure::NoCertificate)?;
                if inst.follower_value(&p.y) <= inst.follower_value(y) + EPS {
                    return Err(CutFailure::NoCertificate);
                }
                let m = self.big_m(class, y).map_err(|_| CutFailure::NoCertificate)?;
                if class == CutClass::BendersBinary {
                    cuts::gen_benders_binary(inst, &p, Some(y), m)
                } else {
                    cuts::gen_benders_interdiction(inst, &p, Some(y), m)
                }
            }
            CutClass::Integrality => Err(CutFailure::NotApplicable),
        }
    }

    fn idic_allowed(&mut self) -> bool {
        if let Some(sw) = self.config.idic_switch_off {
            if !self.idic_disabled && self.stats.nodes >= sw.after_nodes {
                let s = self.stats.class(CutClass::Idic);
                if s.cg_calls > 0 && (s.cuts_added as f64) < sw.min_success_rate * s.cg_calls as f64 {
                    self.idic_disabled = true;
                }
            }
        }
        !self.idic_disabled
    }

    fn generate(
        &mut self,
        lp: &LpProblem,
        res: &LpResult,
        vs: &VertexStructure,
        depth: usize,
        follower: &Option<(Vec<f64>, f64)>,
    ) -> Vec<Cut> {
        let t = Instant::now();
        let mut found = Vec::new();
        let mut tried = BTreeSet::new();
        let classes: Vec<CutClass> = self.applicable.iter().copied().collect();
        for ignore_strategy in [false, true] {
            if ignore_strategy && (!found.is_empty() || !vs.in_s()) {
                break;
            }
            for &class in &classes {
                if tried.contains(&class) || (class == CutClass::Idic && !self.idic_allowed()) {
                    continue;
                }
                let strategy = if ignore_strategy { IcStrategy::Always } else { self.config.strategy(class) };
                if !should_generate(class, vs, strategy, depth) {
                    continue;
                }
                tried.insert(class);
                let outcome = self.attempt(class, lp, res, follower);
                self.stats.per_class.entry(class).or_default().record(&outcome);
                if let Ok(cut) = outcome {
                    found.push(cut);
                }
            }
        }
        if self.config.milp_integrality_cuts && !vs.in_s() {
            for outcome in integrality_cut_attempts(self.inst, lp, res) {
                self.stats.per_class.entry(CutClass::Integrality).or_default().record(&outcome);
                if let Ok(cut) = outcome {
                    found.push(cut);
                }
            }
        }
        self.stats.cut_seconds += t.elapsed().as_secs_f64();
        found
    }

    fn add_cut(&mut self, cut: Cut, node: &mut Node, vertex: &[f64]) {
        let id = self.store.len();
        if self.config.keep_cut_log {
            let ub_recorded_first = match &cut.scope {
                CutScope::LinkingExcluding(g) => self.stats.ub_log.contains(g),
                _ => true,
            };
            self.log.push(CutRecord {
                id,
                node: node.id,
                depth: node.depth,
                vertex: vertex.to_vec(),
                node_lower: node.lower.clone(),
                node_upper: node.upper.clone(),
                pool: self.global_pool.iter().chain(&node.pool).copied().collect(),
                ub_recorded_first,
            });
        }
        let global = matches!(
            cut.origin,
            CutClass::BendersBinary | CutClass::BendersInterdiction | CutClass::GeneralizedNoGood
        );
        self.store.push(cut);
        if global {
            self.global_pool.push(id);
        } else {
            node.pool.push(id);
        }
    }

    fn linking_fixed(&self, node: &Node) -> bool {
        self.inst.linking.iter().all(|&j| node.lower[j] == node.upper[j])
    }

    fn process(&mut self, mut node: Node) -> Result<NodeOutcome, SolveError> {
        let inst = self.inst;
        let mut history = Vec::new();
        let mut rounds = 0usize;
        let vertex = loop {
            let lp = self.node_lp(&node);
            let t = Instant::now();
            let res = solve_lp(&lp)?;
            self.stats.lp_seconds += t.elapsed().as_secs_f64();
            if res.status == LpStatus::Infeasible {
                return Ok(NodeOutcome::Pruned);
            }
            if history.is_empty() {
                if let Some((var, up, dist)) = node.branched {
                    let gain = (res.objective - node.bound) / dist.max(1e-9);
                    self.pseudocosts.record(var, up, gain);
                }
            }
            node.bound = node.bound.max(res.objective);
            history.push(res.objective);
            if node.depth == 0 {
                self.stats.root_bound_before_cuts.get_or_insert(res.objective);
                self.stats.root_bound_after_cuts = Some(res.objective);
            }
            if self.prunable(res.objective) {
                return Ok(NodeOutcome::Pruned);
            }
            let linking_fixed = self.linking_fixed(&node);
            if linking_fixed {
                let gamma: Vec<i64> = inst.linking.iter().map(|&j| node.lower[j].round() as i64).collect();
                self.ub_at(&gamma)?;
                return Ok(NodeOutcome::Pruned);
            }
            let p = Point::from_stacked(&res.x, inst.n1);
            let vs = VertexStructure::of(inst, &p);
            let policy = oracle_policy(&vs, self.config, node.depth, linking_fixed);
            let follower = if policy.solve_second_level { self.follower_at(&p.x)? } else { None };
            if vs.in_s() {
                let phi = follower.as_ref().map(|(_, v)| *v);
                if phi.is_some_and(|v| inst.follower_value(&p.y) <= v + bilevel::phi_slack(v) + 1e-9) {
                    let value = inst.leader_value(&p);
                    self.offer(p, value);
                    return Ok(NodeOutcome::Pruned);
                }
            }
            if vs.x_integral {
                if let Some((_, phi)) = follower {
                    self.try_reaction(&p.x, phi)?;
                }
            }
            if self.prunable(res.objective) {
                return Ok(NodeOutcome::Pruned);
            }
            let mandatory = vs.in_s();
            let cap = if mandatory { self.config.max_mandatory_rounds } else { self.config.max_cut_rounds };
            if rounds >= cap || (!mandatory && !tailoff_check(&history, self.config.tailoff_threshold)) {
                break res.x;
            }
            let found = self.generate(&lp, &res, &vs, node.depth, &follower);
            if found.is_empty() {
                break res.x;
            }
            for cut in found {
                self.add_cut(cut, &mut node, &res.x);
            }
            rounds += 1;
        };
        let decision = select_branching(inst, &node.lower, &node.upper, &vertex, self.config.branching, &self.pseudocosts)
            .or_else(|| {
                inst.linking
                    .iter()
                    .copied()
                    .find(|&j| node.lower[j] < node.upper[j])
                    .map(|var| BranchDecision { var, value: vertex[var].round() })
            });
        let Some(d) = decision else {
            // All linking variables fixed is handled above; reaching here
            // means no progress is possible, so close the node by its UB.
            let gamma = inst.linking_values(&vertex[..inst.n1]);
            self.ub_at(&gamma)?;
            return Ok(NodeOutcome::Pruned);
        };
        let (down_upper, up_lower) = d.split(node.upper[d.var]);
        let frac = d.frac();
        let mut down = Node {
            id: 0,
            depth: node.depth + 1,
            lower: node.lower.clone(),
            upper: node.upper.clone(),
            pool: node.pool.clone(),
            bound: node.bound,
            branched: Some((d.var, false, frac.max(1e-6))),
        };
        down.upper[d.var] = down_upper;
        let mut up = Node {
            branched: Some((d.var, true, (1.0 - frac).max(1e-6))),
            ..node
        };
        up.depth = down.depth;
        up.lower[d.var] = up_lower;
        down.id = self.fresh_id();
        up.id = self.fresh_id();
        if frac <= 0.5 {
            Ok(NodeOutcome::Branch(down, up))
        } else {
            Ok(NodeOutcome::Branch(up, down))
        }
    }

    fn fresh_id(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }
}

/// Solves `inst` to optimality by branch and cut.
pub fn solve(inst: &MiblpInstance, config: &SolverConfig) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    config.validate()?;
    inst.validate()?;
    let report = check_assumptions(inst);
    if !report.all_pass() {
        return Err(SolveError::Assumptions(report));
    }
    let mut solver = Solver::new(inst, config);
    let mut lower = inst.lower_bounds();
    let mut upper = inst.upper_bounds();
    let mask = inst.integer_mask();
    for j in 0..inst.dim() {
        if mask[j] {
            lower[j] = (lower[j] - EPS).ceil();
            upper[j] = (upper[j] + EPS).floor();
        }
    }
    let root = Node {
        id: 0,
        depth: 0,
        lower,
        upper,
        pool: Vec::new(),
        bound: f64::NEG_INFINITY,
        branched: None,
    };
    let mut open: BinaryHeap<Open> = BinaryHeap::new();
    let mut next = Some(root);
    let mut limit_hit = false;
    while let Some(node) = next.take().or_else(|| open.pop().map(|o| o.0)) {
        if solver.prunable(node.bound) {
            continue;
        }
        let out_of_time = config.time_limit.is_some_and(|t| start.elapsed() > t);
        let out_of_nodes = config.node_limit.is_some_and(|n| solver.stats.nodes >= n);
        if out_of_time || out_of_nodes {
            open.push(Open(node));
            limit_hit = true;
            break;
        }
        solver.stats.nodes += 1;
        if let NodeOutcome::Branch(first, second) = solver.process(node)? {
            open.push(Open(second));
            next = Some(first);
        }
        let open_min = next
            .iter()
            .map(|n| n.bound)
            .chain(open.peek().map(|o| o.0.bound))
            .fold(f64::INFINITY, f64::min);
        let inc = solver.incumbent_value();
        solver.stats.bound_trace.push(BoundEvent {
            nodes: solver.stats.nodes,
            lower: open_min.min(inc),
            incumbent: inc,
        });
    }
    if let Some(n) = next {
        open.push(Open(n));
    }
    let inc = solver.incumbent_value();
    let open_min = open
        .iter()
        .map(|o| o.0.bound)
        .filter(|b| *b < inc - config.eps)
        .fold(f64::INFINITY, f64::min);
    let lower_bound = open_min.min(inc);
    let status = if limit_hit && open_min < f64::INFINITY {
        SolveStatus::Limit
    } else if solver.incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    if let Some((p, _)) = &solver.incumbent {
        let verdict = bilevel::check_feasibility(inst, p, &config.oracle_limits)?;
        if !verdict.is_bilevel_feasible() {
            return Err(SolveError::IncumbentRejected);
        }
    }
    let gap = match status {
        SolveStatus::Optimal => 0.0,
        SolveStatus::Infeasible => 0.0,
        SolveStatus::Limit => relative_gap(inc, lower_bound),
    };
    let mut stats = solver.stats;
    if let Some(best) = solver.incumbent.as_ref().map(|(_, v)| *v) {
        stats.root_gap_before_cuts = stats.root_bound_before_cuts.map(|b| relative_gap(best, b));
        stats.root_gap_after_cuts = stats.root_bound_after_cuts.map(|b| relative_gap(best, b));
    }
    stats.total_seconds = start.elapsed().as_secs_f64();
    Ok(SolveResult {
        status,
        incumbent: solver.incumbent,
        lower_bound: if status == SolveStatus::Optimal { inc } else { lower_bound },
        gap,
        stats,
        cuts: if config.keep_cut_log { solver.store } else { Vec::new() },
        cut_log: solver.log,
    })
}

/// Checks a logged cut against a list of bilevel feasible points.
///
/// A point is relevant when it lies in the node box, satisfies every cut in
/// the node's pool, and is covered by the cut's own scope. Pool cuts may drop
/// points outside their own scope, since those points were already accounted
/// for when the cut was made, so such points need no protection afterwards.
/// Cuts from the global pool are checked against every point in their scope.
/// Returns the first relevant point violating the cut by more than `tol`.
pub fn find_cut_violation<'p>(
    inst: &MiblpInstance,
    record: &CutRecord,
    cuts: &[Cut],
    feasible: &'p [(Point, f64)],
    tol: f64,
) -> Option<&'p Point> {
    let cut = &cuts[record.id];
    let covers = |c: &Cut, p: &Point| c.scope.covers(inst, p);
    let global_cut = matches!(
        cut.origin,
        CutClass::BendersBinary | CutClass::BendersInterdiction | CutClass::GeneralizedNoGood
    );
    feasible.iter().map(|(p, _)| p).find(|p| {
        let z = p.stacked();
        let in_node = global_cut
            || (z.iter().zip(&record.node_lower).all(|(v, l)| *v >= l - tol)
                && z.iter().zip(&record.node_upper).all(|(v, u)| *v <= u + tol)
                && record.pool.iter().all(|&id| cuts[id].is_satisfied(p, tol)));
        in_node && covers(cut, p) && !cut.is_satisfied(p, tol)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{knapsack_interdiction_toy, moore_bard, moore_bard_with_leader};

    fn mb_vs(x: f64, y: f64) -> VertexStructure {
        VertexStructure::of(&moore_bard(), &Point::new(vec![x], vec![y]))
    }

    #[test]
    fn gates() {
        let frac = mb_vs(1.5, 2.0);
        assert!(should_generate(CutClass::Idic, &frac, IcStrategy::Always, 3));
        assert!(!should_generate(CutClass::HypercubeIc, &frac, IcStrategy::Always, 0));
        assert!(should_generate(CutClass::IsicType1, &mb_vs(2.0, 4.0), IcStrategy::XYInt, 5));
        assert!(!should_generate(CutClass::IsicType1, &frac, IcStrategy::XYInt, 0));
        assert!(!should_generate(CutClass::Idic, &frac, IcStrategy::AlwaysRoot, 1));
        assert!(should_generate(CutClass::Idic, &mb_vs(1.5, 2.0), IcStrategy::YInt, 1));
        assert!(should_generate(CutClass::Idic, &mb_vs(2.0, 2.5), IcStrategy::YLInt, 1));
        assert!(!should_generate(CutClass::Idic, &mb_vs(2.5, 2.5), IcStrategy::YLInt, 1));
        assert!(!should_generate(CutClass::IntegerNoGood, &frac, IcStrategy::Always, 0));
    }

    #[test]
    fn oracle_policies() {
        let frac_link_int = mb_vs(2.0, 2.5);
        let isic_lint = SolverConfig::only(CutClass::IsicType1, IcStrategy::LInt);
        let p = oracle_policy(&frac_link_int, &isic_lint, 2, false);
        assert!(p.solve_second_level && !p.solve_ub);
        let none = oracle_policy(&mb_vs(1.5, 2.5), &SolverConfig::no_cuts(), 0, false);
        assert_eq!(none, OraclePolicy { solve_second_level: false, solve_ub: false });
        let fixed = oracle_policy(&mb_vs(1.5, 2.5), &SolverConfig::no_cuts(), 0, true);
        assert!(fixed.solve_ub && fixed.solve_second_level);
    }

    #[test]
    fn branching_choices() {
        let mb = moore_bard();
        let (lo, up) = (vec![0.0, 0.0], vec![10.0, 10.0]);
        let pc = Pseudocosts::new(2);
        assert_eq!(select_branching(&mb, &lo, &up, &[2.0, 4.0], Branching::Fractional, &pc), None);
        let d = select_branching(&mb, &lo, &up, &[2.0, 4.0], Branching::Linking, &pc).unwrap();
        assert_eq!((d.var, d.split(10.0)), (0, (2.0, 3.0)));
        let d = select_branching(&mb, &lo, &up, &[1.5, 2.0], Branching::Fractional, &pc).unwrap();
        assert_eq!((d.var, d.split(10.0)), (0, (1.0, 2.0)));
        let d = select_branching(&mb, &lo, &up, &[1.5, 2.5], Branching::SecondLevel, &pc).unwrap();
        assert_eq!(d.var, 1);
        let at_top = BranchDecision { var: 0, value: 10.0 };
        assert_eq!(at_top.split(10.0), (9.0, 10.0));
    }

    #[test]
    fn tailoff_examples() {
        assert!(tailoff_check(&[-42.0, -36.0], 0.05));
        assert!(!tailoff_check(&[-36.0, -35.9], 0.05));
        assert!(tailoff_check(&[-36.0], 0.05));
    }

    #[test]
    fn rounding_cut_from_tableau_row() {
        // max x subject to 2x <= 3: the row x = 1.5 - 0.5 s rounds to x <= 1.
        let mut inst = moore_bard();
        inst.a1 = vec![vec![-2.0]];
        inst.g1 = vec![vec![0.0]];
        inst.b1 = vec![-3.0];
        inst.c = vec![-1.0];
        inst.d1 = vec![0.0];
        let (rows, rhs) = inst.relaxation_rows();
        let lp = LpProblem {
            objective: vec![-1.0, 0.0],
            rows,
            rhs,
            lower: inst.lower_bounds(),
            upper: inst.upper_bounds(),
        };
        let res = solve_lp(&lp).unwrap();
        assert!((res.x[0] - 1.5).abs() < 1e-9);
        let cuts = simple_integrality_cuts(&inst, &lp, &res);
        assert!(!cuts.is_empty());
        let best = cuts.iter().map(|c| c.violation(&res.x) / c.coefficients().iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max);
        assert!(best >= 0.5 - 1e-9);
        let integral = solve_lp(&LpProblem { objective: vec![-1.0, -10.0], ..lp.clone() }).unwrap();
        if integral.x.iter().all(|v| is_integral(*v)) {
            assert!(simple_integrality_cuts(&inst, &lp, &integral).is_empty());
        }
    }

    fn check_mb(config: &SolverConfig) {
        let mb = moore_bard();
        let r = solve(&mb, config).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let (p, v) = r.incumbent.unwrap();
        assert_eq!(v, -22.0);
        assert_eq!((p.x, p.y), (vec![2.0], vec![2.0]));
        let s = &r.stats;
        for cs in s.per_class.values() {
            assert_eq!(cs.cuts_added + cs.failures(), cs.cg_calls);
        }
    }

    #[test]
    fn moore_bard_under_all_bundles_and_branchings() {
        let mut configs: Vec<SolverConfig> = SolverConfig::bundles().into_iter().map(|(_, c)| c).collect();
        configs.push(SolverConfig::no_cuts());
        for class in CutClass::ALL {
            configs.push(SolverConfig::only(class, IcStrategy::Always));
        }
        for base in configs {
            for b in Branching::ALL {
                let mut c = base.clone();
                c.branching = b;
                check_mb(&c);
            }
        }
    }

    #[test]
    fn moore_bard_root_cut_is_idic() {
        let mut c = SolverConfig::only(CutClass::Idic, IcStrategy::Always);
        c.keep_cut_log = true;
        let r = solve(&moore_bard(), &c).unwrap();
        let first = &r.cuts[r.cut_log[0].id];
        assert_eq!(r.cut_log[0].vertex, vec![2.0, 4.0]);
        let k = first.alpha_x[0] / -37.0;
        assert!((first.alpha_y[0] - k * -214.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_instance() {
        let mut mb = moore_bard();
        mb.a1 = vec![vec![-1.0]];
        mb.g1 = vec![vec![0.0]];
        mb.b1 = vec![1.0];
        let r = solve(&mb, &SolverConfig::pure_integer()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.incumbent.is_none());
    }

    #[test]
    fn interdiction_toy_solves() {
        let toy = knapsack_interdiction_toy();
        for c in [SolverConfig::interdiction(), SolverConfig::no_cuts(), SolverConfig::binary_first_level()] {
            let r = solve(&toy, &c).unwrap();
            assert_eq!(r.value(), Some(2.0));
        }
    }

    #[test]
    fn node_limit_reports_bound() {
        let mut c = SolverConfig::no_cuts();
        c.node_limit = Some(1);
        let r = solve(&moore_bard(), &c).unwrap();
        assert!(r.lower_bound <= -22.0 + 1e-9);
        if r.status == SolveStatus::Limit {
            assert!(r.gap >= 0.0);
        }
    }

    #[test]
    fn bound_trace_is_monotone() {
        let r = solve(&moore_bard_with_leader(-1.0, -10.0), &SolverConfig::pure_integer()).unwrap();
        for w in r.stats.bound_trace.windows(2) {
            assert!(w[1].lower >= w[0].lower - 1e-9);
            assert!(w[1].incumbent <= w[0].incumbent);
        }
    }

    #[test]
    fn bad_config_rejected() {
        let mut c = SolverConfig::no_cuts();
        c.tailoff_threshold = 1.5;
        assert!(matches!(solve(&moore_bard(), &c), Err(SolveError::Config(_))));
    }
}
