use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use miblp::bilevel::check_feasibility;
use miblp::bruteforce::{enumerate, DEFAULT_CAP};
use miblp::frontend::bench::{run_bench, ConfigSpec, Manifest};
use miblp::frontend::generate::{generate, Family, SizeParams};
use miblp::frontend::profiles::{profiles, read_records, write_profile, write_records, Measure, ProfileKind, ProfileOptions};
use miblp::frontend::{json as json_io, load_instance, mps};
use miblp::milp::MilpLimits;
use miblp::search::solve;
use miblp::{MiblpInstance, Point};

#[derive(Parser)]
#[command(name = "miblp", version, about = "Branch-and-cut solver for mixed integer bilevel linear programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file: `.json`, or MPS with an AUX file.
    instance: PathBuf,
    /// AUX file; defaults to the MPS path with extension `.aux`.
    #[arg(long)]
    aux: Option<PathBuf>,
    /// Read AUX column and row indices as one-based.
    #[arg(long)]
    aux_one_based: bool,
}

impl InstanceArgs {
    fn load(&self) -> Result<MiblpInstance> {
        load_instance(&self.instance, self.aux.as_deref(), self.aux_one_based)
            .with_context(|| format!("loading {}", self.instance.display()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance by branch and cut.
    Solve {
        #[command(flatten)]
        input: InstanceArgs,
        /// Comma-separated cut classes added on top of the bundle.
        #[arg(long, value_delimiter = ',')]
        cuts: Vec<String>,
        /// Base bundle: none, default, pure-integer, binary-first-level, interdiction.
        /// Defaults to `default` without --cuts and to `none` with it.
        #[arg(long)]
        bundle: Option<String>,
        /// Cut strategy: always, always-root, xyint, lint, yint, ylint.
        #[arg(long)]
        ic_strategy: Option<String>,
        /// Branching strategy: frac, link or second.
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        tailoff: Option<f64>,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<usize>,
        /// Write the result and statistics as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Check bilevel feasibility of a point.
    Check {
        #[command(flatten)]
        input: InstanceArgs,
        /// Comma-separated values of x followed by y, or a file holding them.
        #[arg(long)]
        point: String,
    },
    /// Enumerate a small instance and report its exact optimum.
    Oracle {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Also list every bilevel feasible point.
        #[arg(long)]
        list: bool,
    },
    /// Generate a random instance.
    Gen {
        /// den_like, den2_like, zhang_like, knapsack_interdiction or xu_like.
        family: String,
        #[arg(long)]
        seed: u64,
        /// Output file; `.json` or `.mps` (an `.aux` file is written next to it).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        n1: usize,
        #[arg(long, default_value_t = 2)]
        n2: usize,
        #[arg(long, default_value_t = 0)]
        m1: usize,
        #[arg(long, default_value_t = 2)]
        m2: usize,
        #[arg(long, default_value_t = 5)]
        bound: i64,
        /// Item count for knapsack interdiction.
        #[arg(long, default_value_t = 4)]
        items: usize,
        /// Integer follower variables for the mixed family.
        #[arg(long, default_value_t = 1)]
        r2: usize,
    },
    /// Run a benchmark manifest and write one CSV record per solve.
    Bench {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Build a profile table from benchmark records.
    Profile {
        records: PathBuf,
        /// performance, baseline or cumulative.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        baseline: Option<String>,
        /// time, nodes or root-gap.
        #[arg(long, default_value = "time")]
        measure: String,
        #[arg(long, default_value_t = 1.0)]
        easy_threshold: f64,
        #[arg(long, default_value_t = 0.01)]
        time_floor: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_point(inst: &MiblpInstance, spec: &str) -> Result<Point> {
    let text = if Path::new(spec).is_file() {
        std::fs::read_to_string(spec)?
    } else {
        spec.to_string()
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad number `{t}`")))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != inst.dim() {
        bail!("expected {} values (x then y), got {}", inst.dim(), values.len());
    }
    Ok(Point::from_stacked(&values, inst.n1))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            input,
            cuts,
            bundle,
            ic_strategy,
            branch,
            tailoff,
            time_limit,
            node_limit,
            json_out,
        } => {
            let inst = input.load()?;
            let bundle = bundle.or_else(|| cuts.is_empty().then(|| "default".to_string()));
            let spec = ConfigSpec {
                name: "cli".into(),
                bundle,
                cuts,
                ic_strategy,
                branching: branch,
                tailoff,
                time_limit,
                node_limit,
            };
            let config = spec.to_config(&inst)?;
            let res = solve(&inst, &config)?;
            println!("status: {:?}", res.status);
            match &res.incumbent {
                Some((p, v)) => {
                    println!("objective: {v}");
                    println!("x: {}", fmt_vec(&p.x));
                    println!("y: {}", fmt_vec(&p.y));
                }
                None => println!("objective: none"),
            }
            println!("lower bound: {}", res.lower_bound);
            println!("gap: {}", res.gap);
            println!("nodes: {}", res.stats.nodes);
            println!("cuts: {}", res.cuts.len());
            if let Some(path) = json_out {
                let doc = json!({
                    "instance": inst.name,
                    "status": res.status,
                    "objective": res.value(),
                    "solution": res.incumbent.as_ref().map(|(p, _)| p),
                    "lower_bound": if res.lower_bound.is_finite() { Some(res.lower_bound) } else { None },
                    "gap": if res.gap.is_finite() { Some(res.gap) } else { None },
                    "stats": res.stats,
                });
                std::fs::write(&path, serde_json::to_string_pretty(&doc)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Check { input, point } => {
            let inst = input.load()?;
            let p = parse_point(&inst, &point)?;
            let v = check_feasibility(&inst, &p, &MilpLimits::default())?;
            println!("bilevel feasible: {}", v.is_bilevel_feasible());
            println!("leader integrality or bounds violated: {}", v.violates_c1);
            println!("leader rows violated: {}", v.violates_2a);
            println!("follower integrality violated: {}", v.violates_2b);
            println!("follower rows violated: {}", v.violates_follower_rows);
            println!("follower not optimal: {}", v.violates_2c);
            match v.phi {
                Some(phi) => println!("follower optimum: {phi}"),
                None => println!("follower optimum: infeasible"),
            }
            println!("leader value: {}", inst.leader_value(&p));
        }
        Command::Oracle { input, cap, list } => {
            let inst = input.load()?;
            let r = enumerate(&inst, cap)?;
            println!("feasible points: {}", r.feasible_set.len());
            match &r.optimum {
                Some((p, v)) => {
                    println!("optimum: {v}");
                    println!("x: {}", fmt_vec(&p.x));
                    println!("y: {}", fmt_vec(&p.y));
                }
                None => println!("optimum: infeasible"),
            }
            if list {
                for (p, v) in &r.feasible_set {
                    println!("{} {} {v}", fmt_vec(&p.x), fmt_vec(&p.y));
                }
            }
        }
        Command::Gen {
            family,
            seed,
            out,
            n1,
            n2,
            m1,
            m2,
            bound,
            items,
            r2,
        } => {
            let family = Family::from_name(&family).with_context(|| format!("unknown family `{family}`"))?;
            let size = SizeParams { n1, n2, m1, m2, bound, items, r2 };
            let inst = generate(family, &size, seed)?;
            match out.extension().and_then(|e| e.to_str()) {
                Some("json") => json_io::write_json(&inst, &out)?,
                Some("mps") => mps::write_mps_aux(&inst, &out, &out.with_extension("aux"))?,
                _ => bail!("output must end in .json or .mps"),
            }
            println!("wrote {}", out.display());
        }
        Command::Bench { manifest, out, jobs } => {
            let m = Manifest::load(&manifest)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let records = run_bench(&m, base, jobs)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_records(&records, BufWriter::new(file))?;
            println!("wrote {} records to {}", records.len(), out.display());
        }
        Command::Profile {
            records,
            kind,
            baseline,
            measure,
            easy_threshold,
            time_floor,
            out,
        } => {
            let kind = ProfileKind::from_name(&kind).with_context(|| format!("unknown profile kind `{kind}`"))?;
            let measure = Measure::from_name(&measure).with_context(|| format!("unknown measure `{measure}`"))?;
            let file = File::open(&records).with_context(|| format!("opening {}", records.display()))?;
            let recs = read_records(file)?;
            let opts = ProfileOptions {
                measure,
                easy_threshold,
                time_floor,
            };
            let rows = profiles(&recs, kind, baseline.as_deref(), &opts)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_profile(&rows, BufWriter::new(file))?;
            println!("wrote {} profile points to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn main() {
    env_logger::init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
