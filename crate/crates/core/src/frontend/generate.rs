//! Seeded random instance families at desk scale.
//!
//! All data are drawn as integers from a ChaCha stream, so an instance is a
//! pure function of its family, sizes and seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FrontendError;
use crate::model::{check_assumptions, linking_set, Interdiction, MiblpInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `>=` rows whose coefficients are all nonpositive.
    DenLike,
    /// Mixed-sign coefficients.
    Den2Like,
    /// Binary leader, positive `<=` rows, partially aligned objectives.
    ZhangLike,
    /// Knapsack interdiction.
    KnapsackInterdiction,
    /// Mixed-sign rows with continuous follower variables.
    XuLike,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::DenLike,
        Family::Den2Like,
        Family::ZhangLike,
        Family::KnapsackInterdiction,
        Family::XuLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::DenLike => "den_like",
            Family::Den2Like => "den2_like",
            Family::ZhangLike => "zhang_like",
            Family::KnapsackInterdiction => "knapsack_interdiction",
            Family::XuLike => "xu_like",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Size parameters. `bound` is the upper bound of general integer variables;
/// `items` is the item count of interdiction instances; `r2` is the number
/// of integer follower variables in the mixed family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizeParams {
    pub n1: usize,
    pub n2: usize,
    pub m1: usize,
    pub m2: usize,
    pub bound: i64,
    pub items: usize,
    pub r2: usize,
}

impl Default for SizeParams {
    fn default() -> Self {
        SizeParams {
            n1: 2,
            n2: 2,
            m1: 0,
            m2: 2,
            bound: 5,
            items: 4,
            r2: 1,
        }
    }
}

const MAX_ATTEMPTS: usize = 1000;

fn ints(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi) as f64).collect()
}

fn matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, lo: i64, hi: i64) -> Vec<Vec<f64>> {
    (0..m).map(|_| ints(rng, n, lo, hi)).collect()
}

/// Smallest and largest value of `a . x + g . y` over the box.
fn row_range(a: &[f64], ux: &[f64], g: &[f64], uy: &[f64]) -> (i64, i64) {
    let (mut lo, mut hi) = (0i64, 0i64);
    for (c, u) in a.iter().zip(ux).chain(g.iter().zip(uy)) {
        let v = (c * u) as i64;
        lo += v.min(0);
        hi += v.max(0);
    }
    (lo, hi)
}

/// Right-hand side `lo + (hi - lo) * num / den`, rounded down.
fn rhs_between(lo: i64, hi: i64, num: i64, den: i64) -> f64 {
    (lo + (hi - lo) * num / den) as f64
}

fn leader_rows(rng: &mut ChaCha8Rng, p: &SizeParams, ux: &[f64], uy: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let a1 = matrix(rng, p.m1, ux.len(), -5, 5);
    let g1 = matrix(rng, p.m1, uy.len(), -5, 5);
    let b1 = a1
        .iter()
        .zip(&g1)
        .map(|(a, g)| {
            let (lo, hi) = row_range(a, ux, g, uy);
            rhs_between(lo, hi, 1, 4)
        })
        .collect();
    (a1, g1, b1)
}

/// Makes sure every leader column enters some second-level row.
fn force_linking(rng: &mut ChaCha8Rng, a2: &mut [Vec<f64>], lo: i64, hi: i64) {
    let n1 = a2.first().map_or(0, |r| r.len());
    for j in 0..n1 {
        if a2.iter().all(|r| r[j] == 0.0) {
            let i = rng.gen_range(0..a2.len());
            let mut v = 0;
            while v == 0 {
                v = rng.gen_range(lo..=hi);
            }
            a2[i][j] = v as f64;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    name: String,
    p: &SizeParams,
    r2: usize,
    c: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    leader: (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>),
    follower: (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>),
    ux: Vec<f64>,
    uy: Vec<f64>,
) -> MiblpInstance {
    let mut inst = MiblpInstance {
        name,
        n1: p.n1,
        n2: p.n2,
        r1: p.n1,
        r2,
        c,
        d1,
        d2,
        a1: leader.0,
        g1: leader.1,
        b1: leader.2,
        a2: follower.0,
        g2: follower.1,
        b2: follower.2,
        lx: vec![0.0; p.n1],
        ux,
        ly: vec![0.0; p.n2],
        uy,
        linking: Vec::new(),
        interdiction: None,
        x_names: Vec::new(),
        y_names: Vec::new(),
    };
    inst.linking = linking_set(&inst);
    inst
}

fn den_like(rng: &mut ChaCha8Rng, p: &SizeParams, name: String) -> MiblpInstance {
    let ux = vec![p.bound as f64; p.n1];
    let uy = vec![p.bound as f64; p.n2];
    let mut a2 = matrix(rng, p.m2, p.n1, -10, 0);
    force_linking(rng, &mut a2, -10, -1);
    let mut g2 = matrix(rng, p.m2, p.n2, -10, 0);
    for j in 0..p.n2 {
        if g2.iter().all(|r| r[j] == 0.0) {
            let i = rng.gen_range(0..p.m2);
            g2[i][j] = rng.gen_range(-10..=-1) as f64;
        }
    }
    let b2 = a2
        .iter()
        .zip(&g2)
        .map(|(a, g)| {
            let (lo, hi) = row_range(a, &ux, g, &uy);
            rhs_between(lo, hi, 1, 2)
        })
        .collect();
    let c = ints(rng, p.n1, -10, 10);
    let d1 = ints(rng, p.n2, -10, 10);
    let d2 = ints(rng, p.n2, -10, 5);
    let leader = leader_rows(rng, p, &ux, &uy);
    assemble(name, p, p.n2, c, d1, d2, leader, (a2, g2, b2), ux, uy)
}

fn mixed_sign(rng: &mut ChaCha8Rng, p: &SizeParams, name: String, r2: usize) -> MiblpInstance {
    let ux = vec![p.bound as f64; p.n1];
    let uy = vec![p.bound as f64; p.n2];
    let mut a2 = matrix(rng, p.m2, p.n1, -20, 20);
    force_linking(rng, &mut a2, 1, 20);
    let g2 = matrix(rng, p.m2, p.n2, -20, 20);
    let b2 = a2
        .iter()
        .zip(&g2)
        .map(|(a, g)| {
            let (lo, hi) = row_range(a, &ux, g, &uy);
            rhs_between(lo, hi, 1, 3)
        })
        .collect();
    let c = ints(rng, p.n1, -20, 20);
    let d1 = ints(rng, p.n2, -20, 20);
    let d2 = ints(rng, p.n2, -20, 20);
    let leader = leader_rows(rng, p, &ux, &uy);
    assemble(name, p, r2, c, d1, d2, leader, (a2, g2, b2), ux, uy)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Cosine between the leader and follower objectives on `y`.
pub fn objective_alignment(inst: &MiblpInstance) -> f64 {
    cosine(&inst.d1, &inst.d2)
}

fn zhang_like(rng: &mut ChaCha8Rng, p: &SizeParams, name: String) -> Result<MiblpInstance, FrontendError> {
    if p.n2 < 2 {
        return Err(FrontendError::Invalid("zhang_like needs at least two follower variables".into()));
    }
    let ux = vec![1.0; p.n1];
    let uy = vec![p.bound as f64; p.n2];
    let a2 = matrix(rng, p.m2, p.n1, 1, 10);
    let g2 = matrix(rng, p.m2, p.n2, 1, 10);
    // Rows read `a2 x + g2 y <= cap`, stored negated.
    let b2: Vec<f64> = a2
        .iter()
        .zip(&g2)
        .map(|(a, g)| {
            let (_, hi) = row_range(a, &ux, g, &uy);
            -((hi / 2) as f64)
        })
        .collect();
    let neg = |m: Vec<Vec<f64>>| -> Vec<Vec<f64>> { m.into_iter().map(|r| r.into_iter().map(|v| -v).collect()).collect() };
    let profit = ints(rng, p.n2, 1, 10);
    let d2: Vec<f64> = profit.iter().map(|v| -v).collect();
    let aligned = |d1: &[f64]| {
        let a = cosine(d1, &d2);
        a > 0.6 && a < 0.8
    };
    let mut d1 = ints(rng, p.n2, -10, 10);
    let mut tries = 0;
    while !aligned(&d1) {
        d1 = ints(rng, p.n2, -10, 10);
        tries += 1;
        if tries > 100_000 {
            return Err(FrontendError::Invalid("could not reach the requested alignment".into()));
        }
    }
    let c = ints(rng, p.n1, -10, 10);
    let leader = leader_rows(rng, p, &ux, &uy);
    Ok(assemble(name, p, p.n2, c, d1, d2, leader, (neg(a2), neg(g2), b2), ux, uy))
}

fn knapsack_interdiction(rng: &mut ChaCha8Rng, k: usize, name: &str) -> Result<MiblpInstance, FrontendError> {
    let weights = ints(rng, k, 1, 10);
    let profit = ints(rng, k, 1, 10);
    let capacity = (weights.iter().sum::<f64>() / 2.0).floor();
    let budget = (k / 2) as f64;
    let data = Interdiction {
        budget_rows: vec![vec![-1.0; k]],
        budget_rhs: vec![-budget],
        follower_rows: vec![weights.iter().map(|w| -w).collect()],
        follower_rhs: vec![-capacity],
        upper: vec![1.0; k],
        profit,
    };
    Ok(MiblpInstance::from_interdiction(name, data)?)
}

/// Draws an instance of `family`. Draws are repeated from the same stream
/// until the instance passes the solver assumptions.
pub fn generate(family: Family, size: &SizeParams, seed: u64) -> Result<MiblpInstance, FrontendError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = format!("{}_{}x{}_s{}", family.name(), size.n1, size.n2, seed);
    if family == Family::KnapsackInterdiction {
        let name = format!("{}_k{}_s{}", family.name(), size.items, seed);
        return knapsack_interdiction(&mut rng, size.items, &name);
    }
    if size.n1 == 0 || size.n2 == 0 || size.m2 == 0 || size.bound < 1 {
        return Err(FrontendError::Invalid("sizes must be positive".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let inst = match family {
            Family::DenLike => den_like(&mut rng, size, name.clone()),
            Family::Den2Like => mixed_sign(&mut rng, size, name.clone(), size.n2),
            Family::XuLike => mixed_sign(&mut rng, size, name.clone(), size.r2.min(size.n2)),
            Family::ZhangLike => zhang_like(&mut rng, size, name.clone())?,
            Family::KnapsackInterdiction => unreachable!(),
        };
        let integral = family == Family::XuLike || inst.follower_rows_integral();
        if inst.validate().is_ok() && integral && check_assumptions(&inst).all_pass() {
            return Ok(inst);
        }
    }
    Err(FrontendError::Invalid(format!("no valid {} instance after {MAX_ATTEMPTS} draws", family.name())))
}
