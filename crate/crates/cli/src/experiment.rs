//! Seed sweeps over one or both protocols, written out as CSV.
//!
//! Files in the output directory:
//! - `<protocol>_seed<seed>.csv`: one row per round.
//! - `<protocol>_seed<seed>_plans.csv`: the ranked head plans of the first
//!   epoch (FTTC only).
//! - `summary.csv`: lifetime milestones per run plus one `seed=mean` row per
//!   protocol.
//! - `metadata.txt`: the effective config, RNG and modelling assumptions.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use fttc::{
    lifetime_summary, FaultScript, LifetimeSummary, Milestone, NetworkConfig, PriorityPlanList,
    Protocol, RoundMetrics, Simulation, RNG_ALGORITHM,
};

use crate::config::to_config_string;
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub config: NetworkConfig,
    pub protocols: Vec<Protocol>,
    pub seeds: Vec<u64>,
    pub fault_script_path: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl RunSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Usage("at least one seed is required".into()));
        }
        if self.protocols.is_empty() {
            return Err(CliError::Usage("at least one protocol is required".into()));
        }
        if self.config.max_rounds == 0 {
            return Err(CliError::Usage("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one (protocol, seed) run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub protocol: Protocol,
    pub seed: u64,
    pub summary: LifetimeSummary,
    pub metrics_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunRecord>,
    pub summary_path: PathBuf,
}

pub fn metrics_file_name(protocol: Protocol, seed: u64) -> String {
    format!("{protocol}_seed{seed}.csv")
}

pub fn plans_file_name(protocol: Protocol, seed: u64) -> String {
    format!("{protocol}_seed{seed}_plans.csv")
}

pub fn run_experiment(spec: &RunSpec) -> Result<ExperimentReport, CliError> {
    spec.validate()?;
    spec.config
        .validate()
        .map_err(|v| CliError::Config(crate::error::ConfigError::InvalidValue(v)))?;
    let faults = match &spec.fault_script_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Some((text.parse::<FaultScript>()?, text))
        }
        None => None,
    };
    let out = &spec.output_dir;
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.clone(),
        source,
    })?;

    let jobs: Vec<(Protocol, u64)> = spec
        .protocols
        .iter()
        .flat_map(|&p| spec.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let script = faults.as_ref().map(|(s, _)| s);
    let results = run_parallel(&jobs, |&(protocol, seed)| {
        run_one(&spec.config, protocol, seed, script, out)
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let summary_path = out.join("summary.csv");
    write_atomic(&summary_path, &summary_csv(&spec.protocols, &runs))?;
    let metadata = metadata_text(spec, faults.as_ref().map(|(_, t)| t.as_str()));
    write_atomic(&out.join("metadata.txt"), &metadata)?;
    Ok(ExperimentReport { runs, summary_path })
}

/// Map `f` over `jobs` on a small worker pool, keeping job order.
fn run_parallel<J: Sync, R: Send>(jobs: &[J], f: impl Fn(&J) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let result = f(job);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every job ran"))
        .collect()
}

fn run_one(
    base: &NetworkConfig,
    protocol: Protocol,
    seed: u64,
    faults: Option<&FaultScript>,
    out: &Path,
) -> Result<RunRecord, CliError> {
    let config = NetworkConfig {
        rng_seed: seed,
        ..base.clone()
    };
    let mut sim = Simulation::new(config, protocol)?;
    if let Some(script) = faults {
        sim = sim.with_faults(script.clone())?;
    }
    let mut first_plans = None;
    while sim.step()?.is_some() {
        if first_plans.is_none() && protocol == Protocol::Fttc {
            first_plans = Some(sim.priority_plans().clone());
        }
    }
    let metrics = sim.metrics();
    let metrics_path = out.join(metrics_file_name(protocol, seed));
    write_atomic(&metrics_path, &metrics_csv(metrics))?;
    if let Some(plans) = first_plans {
        write_atomic(
            &out.join(plans_file_name(protocol, seed)),
            &plans_csv(&plans),
        )?;
    }
    Ok(RunRecord {
        protocol,
        seed,
        summary: lifetime_summary(metrics, sim.config().n_nodes),
        metrics_path,
    })
}

fn join_ids<T: ToString>(ids: impl IntoIterator<Item = T>) -> String {
    ids.into_iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn render<const N: usize>(
    header: [&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("ascii output")
}

pub fn metrics_csv(metrics: &[RoundMetrics]) -> String {
    render(
        ["round", "alive", "packets_cum", "residual_j", "heads"],
        metrics.iter().map(|m| {
            [
                m.round.to_string(),
                m.alive.to_string(),
                m.packets_cum.to_string(),
                format!("{:.8e}", m.residual_j),
                join_ids(&m.heads),
            ]
        }),
    )
}

/// `members` lists `head:count` pairs; counts include the head.
pub fn plans_csv(plans: &PriorityPlanList) -> String {
    render(
        ["rank", "heads", "members", "expected_lifetime"],
        plans.plans.iter().map(|p| {
            [
                p.rank.to_string(),
                join_ids(&p.heads),
                join_ids(p.members_per_head.iter().map(|(h, c)| format!("{h}:{c}"))),
                p.expected_lifetime_rounds.to_string(),
            ]
        }),
    )
}

/// Mean of per-seed milestones. Censored runs contribute their horizon and
/// turn the mean into a lower bound, printed with a leading `>`.
fn mean_milestone(values: &[Milestone]) -> String {
    let mut sum: u128 = 0;
    let mut censored = false;
    for v in values {
        match *v {
            Milestone::Round(r) => sum += u128::from(r),
            Milestone::Beyond(h) => {
                sum += u128::from(h);
                censored = true;
            }
        }
    }
    let mean = exact_mean(sum, values.len() as u128);
    if censored {
        format!(">{mean}")
    } else {
        mean
    }
}

/// `sum / n` as a decimal string: exact when it terminates within 6 places,
/// otherwise rounded half-up to 6 places.
fn exact_mean(sum: u128, n: u128) -> String {
    let whole = sum / n;
    let mut rem = sum % n;
    if rem == 0 {
        return whole.to_string();
    }
    let mut digits = Vec::new();
    for _ in 0..6 {
        rem *= 10;
        digits.push((rem / n) as u8);
        rem %= n;
        if rem == 0 {
            break;
        }
    }
    let mut whole = whole;
    if rem * 2 >= n {
        let mut i = digits.len();
        loop {
            if i == 0 {
                whole += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    while digits.last() == Some(&0) {
        digits.pop();
    }
    if digits.is_empty() {
        return whole.to_string();
    }
    let frac: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    format!("{whole}.{frac}")
}

pub fn summary_csv(protocols: &[Protocol], runs: &[RunRecord]) -> String {
    let mut rows: Vec<[String; 6]> = runs
        .iter()
        .map(|r| {
            let m = &r.summary;
            [
                r.protocol.to_string(),
                r.seed.to_string(),
                m.first_death.to_string(),
                m.half_death.to_string(),
                m.last_death.to_string(),
                m.packets_total.to_string(),
            ]
        })
        .collect();
    for &p in protocols {
        let mine: Vec<&LifetimeSummary> = runs
            .iter()
            .filter(|r| r.protocol == p)
            .map(|r| &r.summary)
            .collect();
        if mine.is_empty() {
            continue;
        }
        let pick = |f: fn(&LifetimeSummary) -> Milestone| {
            mean_milestone(&mine.iter().map(|m| f(m)).collect::<Vec<_>>())
        };
        let packets: u128 = mine.iter().map(|m| u128::from(m.packets_total)).sum();
        rows.push([
            p.to_string(),
            "mean".to_string(),
            pick(|m| m.first_death),
            pick(|m| m.half_death),
            pick(|m| m.last_death),
            exact_mean(packets, mine.len() as u128),
        ]);
    }
    render(
        [
            "protocol",
            "seed",
            "first_death",
            "half_death",
            "last_death",
            "packets_total",
        ],
        rows,
    )
}

fn metadata_text(spec: &RunSpec, faults: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rng = {RNG_ALGORITHM}");
    let protocols: Vec<&str> = spec.protocols.iter().map(|p| p.name()).collect();
    let _ = writeln!(s, "protocols = {}", protocols.join(","));
    let seeds: Vec<String> = spec.seeds.iter().map(ToString::to_string).collect();
    let _ = writeln!(s, "seeds = {}", seeds.join(","));
    s.push_str("\n[config]\n");
    s.push_str(&to_config_string(&spec.config));
    s.push_str("\n[assumptions]\n");
    for line in ASSUMPTIONS {
        let _ = writeln!(s, "- {line}");
    }
    if let Some(text) = faults {
        s.push_str("\n[faults]\n");
        s.push_str(text);
        if !text.ends_with('\n') {
            s.push('\n');
        }
    }
    s
}

const ASSUMPTIONS: &[&str] = &[
    "hello and broadcast phases cost no energy",
    "members send one message per round straight to their head",
    "heads fuse all received messages plus their own and uplink one packet directly",
    "a node dies when its battery reaches exactly 0 J; an unaffordable action drains it and fails",
    "packets count source readings delivered inside fused packets",
    "milestones are rounds completed before the k-th death",
    "residual_j is the total battery left at the end of the round",
];

/// Write through a temporary sibling, then rename over the target.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).map_err(io_err)?;
    file.write_all(contents.as_bytes()).map_err(io_err)?;
    file.sync_all().map_err(io_err)?;
    drop(file);
    fs::rename(&tmp, path).map_err(io_err)
}
