//! Benchmark records and the empirical-CDF profile tables built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::FrontendError;

/// One solve of one instance under one named configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub config: String,
    /// `optimal`, `infeasible`, `limit` or `error`.
    pub status: String,
    pub cpu_seconds: f64,
    pub nodes: usize,
    /// Relative final gap; infinite when no incumbent was found.
    pub gap: f64,
    pub root_gap_before: f64,
    pub root_gap_after: f64,
    pub stats_json: String,
}

impl BenchRecord {
    pub fn solved(&self) -> bool {
        self.status == "optimal" || self.status == "infeasible"
    }

    /// Whether the run ended with a feasible solution (or a proof there is none).
    pub fn has_solution(&self) -> bool {
        self.solved() || self.gap.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Performance,
    Baseline,
    Cumulative,
}

impl ProfileKind {
    pub fn from_name(s: &str) -> Option<ProfileKind> {
        match s {
            "performance" => Some(ProfileKind::Performance),
            "baseline" => Some(ProfileKind::Baseline),
            "cumulative" => Some(ProfileKind::Cumulative),
            _ => None,
        }
    }
}

/// The quantity compared by performance and baseline profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Time,
    Nodes,
    RootGap,
}

impl Measure {
    pub fn from_name(s: &str) -> Option<Measure> {
        match s {
            "time" => Some(Measure::Time),
            "nodes" => Some(Measure::Nodes),
            "root-gap" => Some(Measure::RootGap),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Measure::Time => "time",
            Measure::Nodes => "nodes",
            Measure::RootGap => "root-gap",
        }
    }

    fn of(self, r: &BenchRecord) -> f64 {
        match self {
            Measure::Time => r.cpu_seconds,
            Measure::Nodes => r.nodes as f64,
            Measure::RootGap => r.root_gap_after,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub measure: Measure,
    /// Instances solved faster than this by every configuration are dropped.
    pub easy_threshold: f64,
    /// Instances solved faster than this by any configuration are dropped.
    pub time_floor: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            measure: Measure::Time,
            easy_threshold: 1.0,
            time_floor: 0.01,
        }
    }
}

/// A point of a step CDF: `fraction` of the included instances have a value
/// at most `x` on `axis` for `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub config: String,
    pub axis: String,
    pub x: f64,
    pub fraction: f64,
}

type Grid<'a> = BTreeMap<&'a str, BTreeMap<&'a str, &'a BenchRecord>>;

fn grid(records: &[BenchRecord]) -> (Grid<'_>, Vec<&str>) {
    let mut by_instance: Grid = BTreeMap::new();
    let mut configs = BTreeSet::new();
    for r in records {
        by_instance.entry(&r.instance).or_default().insert(&r.config, r);
        configs.insert(r.config.as_str());
    }
    (by_instance, configs.into_iter().collect())
}

fn too_easy(runs: &BTreeMap<&str, &BenchRecord>, configs: &[&str], opts: &ProfileOptions) -> bool {
    let all_fast = configs
        .iter()
        .all(|c| runs.get(c).is_some_and(|r| r.solved() && r.cpu_seconds < opts.easy_threshold));
    let any_instant = runs.values().any(|r| r.solved() && r.cpu_seconds < opts.time_floor);
    all_fast || any_instant
}

/// Step CDF over `values` (infinite entries never count), scaled by `total`.
fn cdf(config: &str, axis: &str, values: &[f64], total: usize, offset: usize) -> Vec<ProfileRow> {
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    finite.dedup();
    finite
        .into_iter()
        .map(|x| {
            let count = values.iter().filter(|v| **v <= x).count() + offset;
            ProfileRow {
                config: config.to_string(),
                axis: axis.to_string(),
                x,
                fraction: count as f64 / total as f64,
            }
        })
        .collect()
}

fn ratio(value: f64, reference: f64) -> f64 {
    if value <= 0.0 && reference <= 0.0 {
        1.0
    } else if reference <= 0.0 {
        f64::INFINITY
    } else {
        value / reference
    }
}

/// Builds the profile table for `records`.
pub fn profiles(
    records: &[BenchRecord],
    kind: ProfileKind,
    baseline: Option<&str>,
    opts: &ProfileOptions,
) -> Result<Vec<ProfileRow>, FrontendError> {
    let (by_instance, configs) = grid(records);
    let kept: Vec<&BTreeMap<&str, &BenchRecord>> = by_instance
        .values()
        .filter(|runs| !too_easy(runs, &configs, opts))
        .filter(|runs| match kind {
            ProfileKind::Performance | ProfileKind::Baseline => runs.values().any(|r| r.solved()),
            ProfileKind::Cumulative => runs.values().any(|r| r.has_solution()),
        })
        .collect();
    let total = kept.len();
    let mut out = Vec::new();
    if total == 0 {
        return Ok(out);
    }
    let axis = format!("{}-ratio", opts.measure.name());
    match kind {
        ProfileKind::Performance => {
            for c in &configs {
                let ratios: Vec<f64> = kept
                    .iter()
                    .map(|runs| {
                        let best = runs
                            .values()
                            .filter(|r| r.solved())
                            .map(|r| opts.measure.of(r))
                            .fold(f64::INFINITY, f64::min);
                        match runs.get(c) {
                            Some(r) if r.solved() => ratio(opts.measure.of(r), best),
                            _ => f64::INFINITY,
                        }
                    })
                    .collect();
                out.extend(cdf(c, &axis, &ratios, total, 0));
            }
        }
        ProfileKind::Baseline => {
            let base = baseline.ok_or_else(|| FrontendError::Invalid("baseline profile needs a baseline name".into()))?;
            if !configs.contains(&base) {
                return Err(FrontendError::Invalid(format!("baseline `{base}` has no records")));
            }
            for c in &configs {
                let ratios: Vec<f64> = kept
                    .iter()
                    .map(|runs| match (runs.get(c), runs.get(base)) {
                        (Some(r), Some(b)) if r.solved() && b.solved() => ratio(opts.measure.of(r), opts.measure.of(b)),
                        _ => f64::INFINITY,
                    })
                    .collect();
                out.extend(cdf(c, &axis, &ratios, total, 0));
            }
        }
        ProfileKind::Cumulative => {
            for c in &configs {
                let runs: Vec<Option<&&BenchRecord>> = kept.iter().map(|m| m.get(c)).collect();
                let times: Vec<f64> = runs
                    .iter()
                    .map(|r| match r {
                        Some(r) if r.solved() => r.cpu_seconds,
                        _ => f64::INFINITY,
                    })
                    .collect();
                let solved = times.iter().filter(|t| t.is_finite()).count();
                out.extend(cdf(c, "time", &times, total, 0));
                let gaps: Vec<f64> = runs
                    .iter()
                    .filter_map(|r| match r {
                        Some(r) if r.solved() => None,
                        Some(r) => Some(r.gap),
                        None => Some(f64::INFINITY),
                    })
                    .collect();
                out.push(ProfileRow {
                    config: c.to_string(),
                    axis: "gap".into(),
                    x: 0.0,
                    fraction: solved as f64 / total as f64,
                });
                out.extend(cdf(c, "gap", &gaps, total, solved).into_iter().filter(|r| r.x > 0.0));
            }
        }
    }
    Ok(out)
}

pub fn write_records<W: Write>(records: &[BenchRecord], sink: W) -> Result<(), FrontendError> {
    let mut w = csv::Writer::from_writer(sink);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records<R: Read>(source: R) -> Result<Vec<BenchRecord>, FrontendError> {
    let mut rd = csv::Reader::from_reader(source);
    Ok(rd.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_profile<W: Write>(rows: &[ProfileRow], sink: W) -> Result<(), FrontendError> {
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rec(instance: &str, config: &str, status: &str, t: f64, nodes: usize, gap: f64) -> BenchRecord {
        BenchRecord {
            instance: instance.into(),
            config: config.into(),
            status: status.into(),
            cpu_seconds: t,
            nodes,
            gap,
            root_gap_before: 0.5,
            root_gap_after: 0.25,
            stats_json: "{}".into(),
        }
    }

    fn points(rows: &[ProfileRow], config: &str, axis: &str) -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.config == config && r.axis == axis)
            .map(|r| (r.x, r.fraction))
            .collect()
    }

    #[test]
    fn two_config_performance() {
        let recs = vec![rec("i", "a", "optimal", 1.0, 3, 0.0), rec("i", "b", "optimal", 2.0, 5, 0.0)];
        let rows = profiles(&recs, ProfileKind::Performance, None, &ProfileOptions::default()).unwrap();
        assert_eq!(points(&rows, "a", "time-ratio"), vec![(1.0, 1.0)]);
        assert_eq!(points(&rows, "b", "time-ratio"), vec![(2.0, 1.0)]);
    }

    #[test]
    fn baseline_against_itself() {
        let recs = vec![
            rec("i", "a", "optimal", 3.0, 3, 0.0),
            rec("j", "a", "optimal", 5.0, 9, 0.0),
            rec("i", "b", "optimal", 2.0, 6, 0.0),
            rec("j", "b", "optimal", 2.0, 3, 0.0),
        ];
        let opts = ProfileOptions {
            measure: Measure::Nodes,
            ..ProfileOptions::default()
        };
        let rows = profiles(&recs, ProfileKind::Baseline, Some("a"), &opts).unwrap();
        assert_eq!(points(&rows, "a", "nodes-ratio"), vec![(1.0, 1.0)]);
        assert_eq!(points(&rows, "b", "nodes-ratio"), vec![(1.0 / 3.0, 0.5), (2.0, 1.0)]);
        assert!(profiles(&recs, ProfileKind::Baseline, None, &opts).is_err());
        assert!(profiles(&recs, ProfileKind::Baseline, Some("zz"), &opts).is_err());
    }

    #[test]
    fn unsolved_everywhere_dropped() {
        let recs = vec![
            rec("i", "a", "optimal", 2.0, 1, 0.0),
            rec("i", "b", "optimal", 4.0, 1, 0.0),
            rec("u", "a", "limit", 60.0, 1, 0.3),
            rec("u", "b", "limit", 60.0, 1, 0.1),
        ];
        let rows = profiles(&recs, ProfileKind::Performance, None, &ProfileOptions::default()).unwrap();
        assert_eq!(points(&rows, "b", "time-ratio"), vec![(2.0, 1.0)]);
        let cum = profiles(&recs, ProfileKind::Cumulative, None, &ProfileOptions::default()).unwrap();
        assert_eq!(points(&cum, "a", "time"), vec![(2.0, 0.5)]);
        assert_eq!(points(&cum, "a", "gap"), vec![(0.0, 0.5), (0.3, 1.0)]);
        assert_eq!(points(&cum, "b", "gap"), vec![(0.0, 0.5), (0.1, 1.0)]);
    }

    #[test]
    fn easy_instances_filtered() {
        let recs = vec![
            rec("easy", "a", "optimal", 0.5, 1, 0.0),
            rec("easy", "b", "optimal", 0.7, 1, 0.0),
            rec("instant", "a", "optimal", 0.001, 1, 0.0),
            rec("instant", "b", "optimal", 9.0, 1, 0.0),
            rec("kept", "a", "optimal", 0.5, 1, 0.0),
            rec("kept", "b", "optimal", 3.0, 1, 0.0),
        ];
        let rows = profiles(&recs, ProfileKind::Performance, None, &ProfileOptions::default()).unwrap();
        assert_eq!(points(&rows, "b", "time-ratio"), vec![(6.0, 1.0)]);
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![rec("i", "a", "limit", 1.5, 7, f64::INFINITY), rec("j", "b", "optimal", 0.25, 1, 0.0)];
        let mut buf = Vec::new();
        write_records(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("instance,config,status"));
        assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cdfs_are_monotone(cells in proptest::collection::vec((0u8..3, 0.0f64..5.0, 1usize..50, 0.0f64..1.0), 6..24)) {
                let recs: Vec<BenchRecord> = cells.iter().enumerate().map(|(k, (st, t, n, g))| {
                    let status = ["optimal", "limit", "infeasible"][*st as usize];
                    rec(&format!("i{}", k / 2), if k % 2 == 0 { "a" } else { "b" }, status, *t, *n, if *st == 1 { *g } else { 0.0 })
                }).collect();
                let opts = ProfileOptions { easy_threshold: 0.0, time_floor: 0.0, measure: Measure::Time };
                for kind in [ProfileKind::Performance, ProfileKind::Baseline, ProfileKind::Cumulative] {
                    let rows = profiles(&recs, kind, Some("a"), &opts).unwrap();
                    for c in ["a", "b"] {
                        for axis in ["time-ratio", "time", "gap"] {
                            let pts = points(&rows, c, axis);
                            prop_assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
                            prop_assert!(pts.iter().all(|p| p.1 <= 1.0 + 1e-12));
                            if kind == ProfileKind::Performance {
                                prop_assert!(pts.iter().all(|p| p.0 >= 1.0));
                            }
                        }
                    }
                }
            }
        }
    }
}
