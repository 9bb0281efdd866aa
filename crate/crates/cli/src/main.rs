//! `loomlab`: command-line front end for the workbench.
//!
//! Exit codes: 0 success, 1 internal error, 2 precondition, 3 budget or
//! timeout, 4 parse error, 5 I/O error.

mod experiment;
mod output;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use loomlab_core::alloc::{self, AllocParams, BlowupSpec, CoverSpec, PlantedSizes};
use loomlab_core::framework::{self, Family, HamMode, Registry, Selector};
use loomlab_core::lattice;
use loomlab_core::squash::{self, BlockPartition};
use loomlab_core::tiling::{self, TilingOptions};
use loomlab_core::{cycwalk, hcore, Error, Hypergraph};
use serde::Serialize;
use serde_json::{json, Value};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "loomlab", version, about = "Hypergraph Hamiltonicity workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the report here (atomically).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Node/column budget; overrides LOOMLAB_BUDGET and the defaults.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Wall-clock limit; exceeding it exits with code 3.
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Input {
    /// Graph JSON file; stdin when absent or "-".
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// λ and the degree thresholds for (k, ℓ).
    Thresholds {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
    },
    /// Minimum d-degree of a graph.
    Degree {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        input: Input,
    },
    /// ℓ-components of a graph.
    Components {
        #[arg(long)]
        l: usize,
        #[command(flatten)]
        input: Input,
    },
    /// The canonical ℓ-cycle with t edges, and its graph.
    Cycle {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        t: usize,
    },
    /// The canonical ℓ-path with t edges, and its graph.
    Path {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        t: usize,
    },
    /// A closed ℓ-walk through two ℓ-tuples.
    Walk {
        #[arg(long)]
        l: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        from: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        to: Vec<usize>,
        #[arg(long, default_value_t = 64)]
        max_len: usize,
        #[command(flatten)]
        input: Input,
    },
    /// Exhaustive Hamilton ℓ-cycle (or path with --from/--to) search.
    Hamilton {
        #[arg(long)]
        l: usize,
        #[arg(long, value_delimiter = ',')]
        from: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        to: Option<Vec<usize>>,
        #[command(flatten)]
        input: Input,
    },
    /// Fractional ℓ-cycle tiling, or a dual certificate.
    Tiling {
        #[arg(long)]
        l: usize,
        /// Order cap for seed columns.
        #[arg(long)]
        max_verts: Option<usize>,
        #[command(flatten)]
        input: Input,
    },
    /// Lattice completeness of F = C(k, ℓ, t) (or the divisor cycle) in a graph.
    Lattice {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        divisor: bool,
        #[command(flatten)]
        input: Input,
    },
    /// gcd of C(k, ℓ, t), the divisor cycle, or an input graph.
    Gcd {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        divisor: bool,
        #[command(flatten)]
        input: Input,
    },
    /// Hamilton ℓ-path of a blow-up.
    AllocPath {
        #[command(flatten)]
        blowup: BlowupArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        from: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        to: Vec<usize>,
    },
    /// Perfect ℓ-cycle tiling of a blow-up.
    AllocTiling {
        #[command(flatten)]
        blowup: BlowupArgs,
    },
    /// Hamilton ℓ-cycle from a cover (planted by default).
    Assemble {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Length of the shape cycle of a planted cover.
        #[arg(long, default_value_t = 3)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cover JSON; the graph comes from --input.
        #[arg(long)]
        cover: Option<PathBuf>,
        #[command(flatten)]
        input: Input,
    },
    /// Framework checks (F1)–(F3) on a family of graphs.
    Framework {
        #[arg(long)]
        l: usize,
        /// Membership property, e.g. "and(edge,dcon:1)".
        #[arg(long, default_value = "true")]
        membership: String,
        /// identity | largest-component
        #[arg(long, default_value = "identity")]
        selector: String,
        #[arg(long, default_value_t = 10_000)]
        max_candidates: u64,
        /// JSON array of member graphs (or one graph).
        #[command(flatten)]
        input: Input,
    },
    /// Space-barrier graph: all k-sets meeting {0, …, a−1}.
    Barrier {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: usize,
    },
    /// Squashing: one squash, the exact expectation, or an experiment.
    Squash {
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = SquashMode::Squash)]
        mode: SquashMode,
        /// Blocks "0,1;2,3;…"; random from --seed when absent.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        input: Input,
    },
    /// Run an experiment suite into a fresh run directory.
    Experiment {
        /// threshold-constants | barrier-sweep | framework-smalln | squash-suite | alloc-smoke
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "runs")]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct BlowupArgs {
    /// BlowupSpec JSON; otherwise the complete bounded reduced graph on --sizes.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    exceptional: Option<usize>,
    /// Reservoir copies per generator.
    #[arg(long)]
    q: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SquashMode {
    Squash,
    Expectation,
    Concentration,
    Degree,
}

fn parse_tuple(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse().map_err(|_| format!("bad integer {x:?}"))).collect()
}

/// Failures with their exit codes.
#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
    Parse(String),
    Timeout(u64),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::BudgetExceeded(_)) | Failure::Timeout(_) => 3,
            Failure::Core(Error::Parse { .. }) | Failure::Parse(_) => 4,
            Failure::Core(_) => 2,
            Failure::Io(_) => 5,
            Failure::Internal(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            2 => "precondition",
            3 => "budget",
            4 => "parse",
            5 => "io",
            _ => "internal",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) | Failure::Parse(m) | Failure::Internal(m) => m.clone(),
            Failure::Timeout(ms) => format!("timed out after {ms} ms"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Out<T> = std::result::Result<T, Failure>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn read_text(input: &Input) -> Out<String> {
    match &input.input {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Io(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

/// A graph, or any report carrying one under "graph".
fn read_graph(input: &Input) -> Out<Hypergraph> {
    let text = read_text(input)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    let g = v.get("graph").cloned().unwrap_or(v);
    Ok(Hypergraph::from_json(&g.to_string())?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Out<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
}

/// Budget from the flag, then LOOMLAB_BUDGET, then the command default.
fn budget(flag: Option<u64>, default: u64) -> Out<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("LOOMLAB_BUDGET") {
        Ok(s) => s.trim().parse().map_err(|_| Failure::Parse(format!("LOOMLAB_BUDGET={s:?} is not an integer"))),
        Err(_) => Ok(default),
    }
}

fn blowup(args: &BlowupArgs) -> Out<BlowupSpec> {
    if let Some(p) = &args.spec {
        return read_json(p);
    }
    let sizes = args.sizes.clone().ok_or_else(|| Failure::Core(Error::InvalidInput("give --spec or --sizes".into())))?;
    let r = Hypergraph::complete_bounded(sizes.len(), args.k);
    Ok(BlowupSpec { exceptional: args.exceptional, ..BlowupSpec::consecutive(r, &sizes) })
}

fn alloc_params(args: &BlowupArgs, flag: Option<u64>) -> Out<AllocParams> {
    let mut p = AllocParams::default();
    if let Some(q) = args.q {
        p.q = q;
    }
    p.enum_budget = budget(flag, p.enum_budget)?;
    Ok(p)
}

fn run(cmd: &Cmd, flag: Option<u64>) -> Out<Value> {
    Ok(match cmd {
        Cmd::Thresholds { k, l } => to_value(&framework::thresholds(*k, *l)?),
        Cmd::Degree { d, input } => to_value(&hcore::min_degree(&read_graph(input)?, *d)?),
        Cmd::Components { l, input } => to_value(&cycwalk::components(&read_graph(input)?, *l)?),
        Cmd::Cycle { k, l, t } | Cmd::Path { k, l, t } => {
            let c = if matches!(cmd, Cmd::Cycle { .. }) { cycwalk::build_cycle(*k, *l, *t)? } else { cycwalk::build_path(*k, *l, *t)? };
            let edges = c.windows().into_iter().map(|mut w| {
                w.sort_unstable();
                w
            });
            let g = Hypergraph::from_edges_dedup(c.order(), hcore::Uniformity::Uniform(*k), edges.collect())?;
            json!({ "kind": c.kind, "verts": c.verts, "windows": c.windows(), "graph": g })
        }
        Cmd::Walk { l, from, to, max_len, input } => {
            to_value(&cycwalk::walk_between(&read_graph(input)?, *l, from, to, *max_len)?)
        }
        Cmd::Hamilton { l, from, to, input } => {
            let g = read_graph(input)?;
            let mode = match (from, to) {
                (Some(a), Some(b)) => HamMode::Path { f1: a.clone(), f2: b.clone() },
                (None, None) => HamMode::Cycle,
                _ => return Err(Failure::Core(Error::InvalidInput("give both --from and --to, or neither".into()))),
            };
            let b = budget(flag, framework::BRUTE_BUDGET)?;
            match framework::brute_hamilton(&g, *l, &mode, framework::BRUTE_CAP, b)? {
                Some(c) => json!({ "found": true, "verts": c.verts }),
                None => json!({ "found": false }),
            }
        }
        Cmd::Tiling { l, max_verts, input } => {
            let g = read_graph(input)?;
            let mut opts = TilingOptions::for_graph(&g, *l);
            if let Some(m) = max_verts {
                opts.max_verts = *m;
            }
            opts.enum_budget = budget(flag, opts.enum_budget)?;
            to_value(&tiling::frac_tiling(&g, *l, &opts)?)
        }
        Cmd::Lattice { l, t, divisor, input } => {
            let g = read_graph(input)?;
            let k = g.k();
            let f = if *divisor {
                lattice::divisor_cycle(k, *l)?.cycle
            } else {
                let t = t.ok_or_else(|| Failure::Core(Error::InvalidInput("give --t or --divisor".into())))?;
                cycwalk::build_cycle(k, *l, t)?
            };
            let lb = lattice::lattice_complete(&f, &g, budget(flag, 10_000_000)?)?;
            let mut v = to_value(&lb);
            v["f_order"] = f.order().into();
            v
        }
        Cmd::Gcd { k, l, t, divisor, input } => {
            let b = budget(flag, 10_000_000)?;
            let rep = match (k, l) {
                (Some(k), Some(l)) if *divisor => lattice::divisor_cycle(*k, *l)?.gcd,
                (Some(k), Some(l)) => {
                    let t = t.ok_or_else(|| Failure::Core(Error::InvalidInput("give --t or --divisor".into())))?;
                    lattice::gcd_of_cycle(&cycwalk::build_cycle(*k, *l, t)?, b)?
                }
                (None, None) => lattice::gcd_of_graph(&read_graph(input)?, b)?,
                _ => return Err(Failure::Core(Error::InvalidInput("give both --k and --l, or an input graph".into()))),
            };
            let mut v = to_value(&rep);
            v["gcd"] = rep.gcd_string().into();
            v
        }
        Cmd::AllocPath { blowup: args, from, to } => {
            let spec = blowup(args)?;
            to_value(&alloc::hamilton_path_allocation(&spec, args.l, from, to, &alloc_params(args, flag)?)?)
        }
        Cmd::AllocTiling { blowup: args } => {
            let spec = blowup(args)?;
            to_value(&alloc::perfect_tiling_allocation(&spec, args.l, &alloc_params(args, flag)?)?)
        }
        Cmd::Assemble { k, l, b, seed, cover, input } => {
            let (g, cov) = match cover {
                Some(p) => (read_graph(input)?, read_json::<CoverSpec>(p)?),
                None => alloc::planted_cover(*k, *l, *b, PlantedSizes::default(), *seed)?,
            };
            let mut params = AllocParams { q: 0, ..AllocParams::default() };
            params.enum_budget = budget(flag, params.enum_budget)?;
            let a = alloc::assemble_chain(&g, &cov, *l, &params)?;
            json!({ "n": g.n(), "order": a.cycle.order(), "trimmed": a.trimmed, "cycle": a.cycle, "ledger": a.ledger })
        }
        Cmd::Framework { l, membership, selector, max_candidates, input } => {
            let text = read_text(input)?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Parse(e.to_string()))?;
            let list = match v {
                Value::Array(a) => a,
                Value::Object(ref m) if m.contains_key("members") => m["members"].as_array().cloned().unwrap_or_default(),
                other => vec![other],
            };
            let members = list.iter().map(|g| Hypergraph::from_json(&g.to_string())).collect::<loomlab_core::Result<Vec<_>>>()?;
            let s = members.first().map(|g| g.n()).ok_or_else(|| Failure::Core(Error::InvalidInput("no members".into())))?;
            let sel = match selector.as_str() {
                "identity" => Selector::Identity,
                "largest-component" => Selector::LargestComponent(*l),
                other => return Err(Failure::Parse(format!("unknown selector {other:?}"))),
            };
            let fam = Family { s, members, membership: Registry::default().parse(membership)? };
            let v = framework::check_framework(&fam, &sel, *l, *max_candidates)?;
            let mut out = to_value(&v);
            out["pass"] = v.pass().into();
            out
        }
        Cmd::Barrier { k, l, n, a } => {
            let sb = framework::space_barrier(*k, *l, *n, *a)?;
            let mut v = to_value(&sb);
            v["counting_allows"] = sb.counting_allows().into();
            v
        }
        Cmd::Squash { q, mode, partition, eps, trials, d, seed, input } => {
            let h = read_graph(input)?;
            match mode {
                SquashMode::Squash => {
                    let p = match partition {
                        Some(s) => {
                            let blocks = s.split(';').map(parse_tuple).collect::<Result<Vec<_>, _>>().map_err(Failure::Parse)?;
                            BlockPartition::new(*q, blocks)?
                        }
                        None => {
                            if *q == 0 || h.n() % q != 0 {
                                return Err(Failure::Core(Error::InvalidInput(format!("q={q} must divide v(H)={}", h.n()))));
                            }
                            BlockPartition::random(*q, h.n() / q, &mut squash::trial_rng(*seed, 0))
                        }
                    };
                    json!({ "partition": p, "graph": squash::squash(&h, &p)? })
                }
                SquashMode::Expectation => to_value(&squash::expectation_exact(&h, *q)?),
                SquashMode::Concentration => {
                    let mut r = squash::concentration_experiment(&h, *q, *eps, *trials, *seed)?;
                    let sizes = std::mem::take(&mut r.sizes);
                    let mut v = to_value(&r);
                    v["consistent"] = r.consistent().into();
                    v["rows"] = sizes.iter().enumerate().map(|(t, s)| json!({ "trial": t, "edges": s })).collect();
                    v
                }
                SquashMode::Degree => {
                    let mut r = squash::degree_preservation_experiment(&h, *q, *d, *eps, *trials, *seed)?;
                    let ratios = std::mem::take(&mut r.ratios);
                    let mut v = to_value(&r);
                    v["rows"] = ratios.iter().enumerate().map(|(t, x)| json!({ "trial": t, "min_ratio": x })).collect();
                    v
                }
            }
        }
        Cmd::Experiment { suite, seed, out_dir } => experiment::run(suite, *seed, out_dir)?,
    })
}

fn report_failure(f: &Failure) -> ExitCode {
    eprintln!("{}", json!({ "schema_version": output::SCHEMA_VERSION, "error": f.kind(), "message": f.message() }));
    ExitCode::from(f.code())
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|_| {}));
    let parsed = std::panic::catch_unwind(Cli::try_parse)
        .unwrap_or_else(|_| return Err(clap::Error::raw(clap::error::ErrorKind::InvalidValue, "malformed arguments\n")));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(4);
        }
    };
    let cmd = cli.cmd.clone();
    let flag = cli.budget;
    let (tx, rx) = mpsc::channel();
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || {
            let r = std::panic::catch_unwind(|| run(&cmd, flag))
                .unwrap_or_else(|p| {
                    let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
                    Err(Failure::Internal(msg.unwrap_or_else(|| "panic".into())))
                });
            let _ = tx.send(r);
        })
        .expect("spawn worker");
    let result = match cli.timeout_ms {
        Some(ms) => rx.recv_timeout(Duration::from_millis(ms)).unwrap_or(Err(Failure::Timeout(ms))),
        None => rx.recv().unwrap_or_else(|_| Err(Failure::Internal("worker vanished".into()))),
    };
    let value = match result {
        Ok(v) => v,
        Err(f) => return report_failure(&f),
    };
    let config = json!({
        "args": to_value(&cli.cmd),
        "budget": cli.budget.or_else(|| std::env::var("LOOMLAB_BUDGET").ok().and_then(|s| s.trim().parse().ok())),
        "timeout_ms": cli.timeout_ms,
        "format": format!("{:?}", cli.format).to_lowercase(),
    });
    let name = match &cli.cmd {
        Cmd::Experiment { .. } => "experiment",
        other => to_value(other).as_object().and_then(|m| m.keys().next().cloned()).map_or("unknown", |k| Box::leak(k.into_boxed_str())),
    };
    let report = output::envelope(name, config, value);
    let text = output::render(&report, cli.format);
    if let Some(p) = &cli.out {
        if let Err(e) = output::persist(p, &text) {
            return report_failure(&Failure::Io(format!("{}: {e}", p.display())));
        }
    }
    print!("{text}");
    ExitCode::SUCCESS
}
