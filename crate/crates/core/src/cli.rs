//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 invalid input or
//! violated precondition, 3 conflict in a strict-mode simulation,
//! 4 failed verification.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::embedding::{build_embedding, maintenance_view, parse_table_csv, EmbeddingSpec, Removal};
use crate::error::{Error, Result};
use crate::primitives::{
    schedule_all_to_all, schedule_all_to_one, schedule_broadcast, schedule_one_to_all, schedule_permutation,
    Permutation, Plan, PrimitiveKind, PrimitiveOptions,
};
use crate::routing::{deflect_path, header_for, path_of, DeflectionPolicy, Path as RoutePath, SourceVectorHeader};
use crate::sim::{run_traced, verify_delivery, Discipline, Metrics, Mode};
use crate::topology::{cut_size, export_graph, wiring_csv, wiring_plan, GraphFormat, NetParams, RouterAddr};
use crate::verify::{check_embedding, verify, Suite};

#[derive(Debug, Parser)]
#[command(name = "d3net", version, about = "Swapped Dragonfly D3(K,M) toolkit and simulator")]
pub struct Cli {
    /// JSON file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NetArgs {
    /// Number of cabinets.
    #[arg(short = 'K')]
    pub k: Option<u32>,
    /// Drawers per cabinet and routers per drawer.
    #[arg(short = 'M')]
    pub m: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export the graph, the ribbon wiring plan, or a cabinet cut.
    Topo {
        #[command(flatten)]
        net: NetArgs,
        /// edges or dot.
        #[arg(long)]
        format: Option<GraphFormat>,
        /// Emit the wiring plan instead of the graph.
        #[arg(long)]
        wiring: bool,
        /// Comma-separated cabinets forming one side of a cut.
        #[arg(long, value_delimiter = ',')]
        cut_cabinets: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show the header and hop-by-hop path between two routers.
    Route {
        #[command(flatten)]
        net: NetArgs,
        src: RouterAddr,
        dst: RouterAddr,
        /// sv3, sv4, dest or deflect.
        #[arg(long, default_value = "sv3")]
        style: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Print the path as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Simulate a primitive: broadcast, one2all, all2one, all2all or perm.
    Sim {
        primitive: PrimitiveKind,
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        root: Option<RouterAddr>,
        #[arg(long)]
        sink: Option<RouterAddr>,
        /// Number of broadcasts.
        #[arg(long)]
        count: Option<usize>,
        /// Permutation file of `c.d.p -> c.d.p` lines.
        #[arg(long)]
        perm: Option<PathBuf>,
        /// Seed for a random permutation when no file is given.
        #[arg(long)]
        perm_seed: Option<u64>,
        /// strict or queued.
        #[arg(long)]
        mode: Option<Mode>,
        /// lifo or fifo.
        #[arg(long)]
        discipline: Option<Discipline>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_steps: Option<u32>,
        /// Literal published loops instead of the corrected defaults.
        #[arg(long)]
        paper_exact: bool,
        /// Drop the all-to-all delay rounds.
        #[arg(long)]
        no_delays: bool,
        /// Directory for metrics.json, links.csv and config.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the self-check suites.
    Verify {
        #[command(flatten)]
        net: NetArgs,
        /// diameter, conflict, parallel, embedding or all.
        #[arg(long)]
        suite: Option<Suite>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Port tables and maintenance views of an embedded sub-network.
    Embed {
        /// Host parameters.
        #[command(flatten)]
        net: NetArgs,
        /// Host cabinets of the sub-network (default: all).
        #[arg(long, value_delimiter = ',')]
        kappa: Vec<u32>,
        /// Host local indices of the sub-network (default: all).
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<u32>,
        /// Check a table CSV against the computed one.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Show the network left after taking a cabinet offline.
        #[arg(long, conflicts_with_all = ["remove_local", "kappa", "lambda"])]
        remove_cabinet: Option<u32>,
        /// Show the network left after taking a local index offline.
        #[arg(long, conflicts_with_all = ["kappa", "lambda"])]
        remove_local: Option<u32>,
        /// Also run the isomorphism and translation checks.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Conflict,
    VerifyFailed,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Conflict => 3,
            Outcome::VerifyFailed => 4,
        }
    }
}

pub fn error_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::StepLimit { .. } => 1,
        _ => 2,
    }
}

/// Parses `args` and runs the command, writing reports to `out`. Returns
/// the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_code(&e)
        }
    }
}

fn net_config(net: &NetArgs) -> RunConfig {
    RunConfig {
        k: net.k,
        m: net.m,
        ..Default::default()
    }
}

fn flag(on: bool) -> Option<bool> {
    on.then_some(true)
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<Outcome> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Topo {
            net,
            format,
            wiring,
            cut_cabinets,
            out: dir,
        } => {
            let cfg = file.merge(RunConfig {
                format,
                out: dir,
                command: Some("topo".into()),
                ..net_config(&net)
            });
            cmd_topo(&cfg, wiring, &cut_cabinets, out)
        }
        Command::Route {
            net,
            src,
            dst,
            style,
            seed,
            json,
        } => {
            let cfg = file.merge(RunConfig {
                seed,
                command: Some("route".into()),
                ..net_config(&net)
            });
            cmd_route(&cfg, src, dst, &style, json, out)
        }
        Command::Sim {
            primitive,
            net,
            root,
            sink,
            count,
            perm,
            perm_seed,
            mode,
            discipline,
            seed,
            max_steps,
            paper_exact,
            no_delays,
            out: dir,
        } => {
            let cfg = file.merge(RunConfig {
                command: Some("sim".into()),
                primitive: Some(primitive),
                root,
                sink,
                count,
                perm_file: perm,
                perm_seed,
                mode,
                discipline,
                seed,
                max_steps,
                paper_exact: flag(paper_exact),
                no_delays: flag(no_delays),
                out: dir,
                ..net_config(&net)
            });
            cmd_sim(&cfg, out)
        }
        Command::Verify {
            net,
            suite,
            seed,
            out: dir,
        } => {
            let cfg = file.merge(RunConfig {
                command: Some("verify".into()),
                suite,
                seed,
                out: dir,
                ..net_config(&net)
            });
            cmd_verify(&cfg, out)
        }
        Command::Embed {
            net,
            kappa,
            lambda,
            table,
            remove_cabinet,
            remove_local,
            check,
            out: dir,
        } => {
            let cfg = file.merge(RunConfig {
                command: Some("embed".into()),
                out: dir,
                ..net_config(&net)
            });
            let removal = match (remove_cabinet, remove_local) {
                (Some(c), _) => Some(Removal::Cabinet(c)),
                (None, Some(d)) => Some(Removal::LocalIndex(d)),
                (None, None) => None,
            };
            cmd_embed(&cfg, &kappa, &lambda, removal, table.as_deref(), check, out)
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

pub fn cmd_topo(cfg: &RunConfig, wiring: bool, cut_cabinets: &[u32], out: &mut dyn Write) -> Result<Outcome> {
    let params = cfg.params()?;
    if !cut_cabinets.is_empty() {
        let side: BTreeSet<RouterAddr> = params.routers().filter(|r| cut_cabinets.contains(&r.c)).collect();
        let cut = cut_size(&params, &side)?;
        writeln!(
            out,
            "cut {:?}: global {} local {} total {}",
            cut_cabinets,
            cut.global,
            cut.local,
            cut.total()
        )?;
        return Ok(Outcome::Ok);
    }
    let (name, text) = if wiring {
        ("plan.csv".to_string(), wiring_csv(&wiring_plan(&params))?)
    } else {
        let format = cfg.format.unwrap_or(GraphFormat::EdgeList);
        (format!("graph.{}", format.extension()), export_graph(&params, format))
    };
    match &cfg.out {
        Some(dir) => {
            write_file(dir, &name, &text)?;
            writeln!(out, "wrote {}", dir.join(&name).display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(Outcome::Ok)
}

pub fn route_path(params: &NetParams, src: RouterAddr, dst: RouterAddr, style: &str, seed: u64) -> Result<(String, RoutePath)> {
    params.check(src)?;
    params.check(dst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match style {
        "sv3" => {
            let h = header_for(params, src, dst)?;
            Ok((format!("(3;{},{},{})", h.global_port, h.last_local, h.first_local), path_of(params, src, h)?))
        }
        "sv4" => {
            let h = SourceVectorHeader { b: 4, ..header_for(params, src, dst)? };
            Ok((format!("(4;{},{},{})", h.global_port, h.last_local, h.first_local), path_of(params, src, h)?))
        }
        "dest" => Ok((
            format!("(3;{dst},{src})"),
            deflect_path(params, src, dst, DeflectionPolicy::FixedC, 3, &mut rng)?,
        )),
        "deflect" => Ok((
            format!("(5;{dst},{src})"),
            deflect_path(params, src, dst, DeflectionPolicy::Random, 5, &mut rng)?,
        )),
        other => Err(Error::Parse(format!("unknown route style `{other}` (sv3, sv4, dest, deflect)"))),
    }
}

pub fn cmd_route(cfg: &RunConfig, src: RouterAddr, dst: RouterAddr, style: &str, json: bool, out: &mut dyn Write) -> Result<Outcome> {
    let params = cfg.params()?;
    let (header, path) = route_path(&params, src, dst, style, cfg.seed.unwrap_or(0))?;
    if json {
        let doc = serde_json::json!({ "header": header, "path": path.to_json() });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "header {header}")?;
        writeln!(out, "path {path}")?;
        writeln!(out, "hops {} (links {})", path.steps.len(), path.links().count())?;
    }
    Ok(Outcome::Ok)
}

fn require_addr(addr: Option<RouterAddr>, what: &str) -> Result<RouterAddr> {
    addr.ok_or_else(|| Error::InvalidParams(format!("--{what} is required for this primitive")))
}

/// Builds the plan for the configured primitive together with summary
/// lines that spell out the expected counts.
pub fn plan_for(cfg: &RunConfig) -> Result<(Plan, Vec<String>)> {
    let params = cfg.params()?;
    let (k, m) = (params.k(), params.m());
    let opts = PrimitiveOptions {
        paper_exact: cfg.paper_exact.unwrap_or(false),
        insert_delays: !cfg.no_delays.unwrap_or(false),
    };
    let kind = cfg
        .primitive
        .ok_or_else(|| Error::InvalidParams("no primitive given".into()))?;
    let mut lines = Vec::new();
    let plan = match kind {
        PrimitiveKind::Broadcast => {
            let root = require_addr(cfg.root, "root")?;
            let n = cfg.count.unwrap_or(1);
            lines.push(format!("rounds = N = {n}"));
            if root.is_fixed_point() {
                lines.push(format!("delays = N = {n} (root has d = p)"));
            } else {
                lines.push("delays = 0".into());
            }
            schedule_broadcast(&params, root, n)?
        }
        PrimitiveKind::One2all => {
            let root = require_addr(cfg.root, "root")?;
            if opts.paper_exact {
                lines.push(format!("rounds = KM - 1 = {}", k * m - 1));
            } else {
                lines.push(format!("rounds = KM = {}", k * m));
            }
            if root.is_fixed_point() {
                lines.push(format!("delays = M = {m} (root has d = p)"));
                // the looser bound quoted elsewhere for this case
                lines.push(format!("at most 2KM = {} rounds (KM + M = {} used)", 2 * k * m, k * m + m));
            }
            schedule_one_to_all(&params, root, opts)?
        }
        PrimitiveKind::All2one => {
            let sink = require_addr(cfg.sink, "sink")?;
            lines.push(format!("rounds = KM = {}", k * m));
            lines.push(format!("completion = KM + 6 = {}", k * m + 6));
            schedule_all_to_one(&params, sink, opts)?
        }
        PrimitiveKind::All2all => {
            lines.push(format!("rounds = KM^2 = {}", k * m * m));
            if opts.insert_delays {
                lines.push(format!("delays = KM = {}", k * m));
            }
            schedule_all_to_all(&params, opts)?
        }
        PrimitiveKind::Perm => {
            let perm = match &cfg.perm_file {
                Some(path) => Permutation::parse(&params, &fs::read_to_string(path)?)?,
                None => Permutation::random(&params, cfg.perm_seed.unwrap_or(0)),
            };
            lines.push(format!("completion bound = M + 4 = {}", m + 4));
            schedule_permutation(&params, &perm)?
        }
    };
    Ok((plan, lines))
}

pub fn cmd_sim(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let params = cfg.params()?;
    let (plan, lines) = plan_for(cfg)?;
    let mut sim = cfg.sim_config();
    if cfg.mode.is_none() {
        sim.mode = plan.mode;
    }
    let (metrics, trace) = run_traced(&params, &plan.schedule, &sim)?;
    let check = verify_delivery(&metrics, &plan.expected);

    writeln!(
        out,
        "{} on D3({},{}), {} mode",
        cfg.primitive.expect("checked by plan_for"),
        params.k(),
        params.m(),
        sim.mode
    )?;
    for l in &lines {
        writeln!(out, "expected {l}")?;
    }
    write_summary(out, &metrics)?;
    writeln!(
        out,
        "deliveries {} of {} expected ({})",
        metrics.deliveries.len(),
        check.expected,
        if check.ok { "ok" } else { "MISMATCH" }
    )?;

    if let Some(dir) = &cfg.out {
        write_file(dir, "metrics.json", &metrics.to_json()?)?;
        write_file(dir, "links.csv", &trace.link_loads_csv()?)?;
        write_file(dir, "config.json", &cfg.to_json()?)?;
        if !metrics.conflicts.is_empty() {
            let report = serde_json::to_string_pretty(&trace.conflict_report(&metrics))?;
            write_file(dir, "conflicts.json", &report)?;
        }
    }
    if sim.mode == Mode::Strict && !metrics.conflicts.is_empty() {
        return Ok(Outcome::Conflict);
    }
    if !check.ok {
        return Ok(Outcome::VerifyFailed);
    }
    Ok(Outcome::Ok)
}

fn write_summary(out: &mut dyn Write, m: &Metrics) -> Result<()> {
    writeln!(out, "rounds {}", m.rounds_launched)?;
    writeln!(out, "delays {}", m.delay_rounds)?;
    writeln!(out, "total steps {}", m.total_steps)?;
    writeln!(out, "total hops {}", m.total_hops)?;
    writeln!(out, "conflicts {}", m.conflicts.len())?;
    if m.queue_wait_steps > 0 {
        writeln!(out, "queue wait steps {}", m.queue_wait_steps)?;
    }
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let params = cfg.params()?;
    let report = verify(&params, cfg.suite.unwrap_or(Suite::All), cfg.seed.unwrap_or(0))?;
    for s in &report.suites {
        writeln!(
            out,
            "{} {}: {} cases {}",
            if s.passed { "PASS" } else { "FAIL" },
            s.suite,
            s.cases,
            s.detail
        )?;
        for f in &s.failures {
            writeln!(out, "  {f}")?;
        }
    }
    if let Some(dir) = &cfg.out {
        write_file(dir, "verify.json", &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if report.passed { Outcome::Ok } else { Outcome::VerifyFailed })
}

pub fn cmd_embed(
    cfg: &RunConfig,
    kappa: &[u32],
    lambda: &[u32],
    removal: Option<Removal>,
    table: Option<&Path>,
    check: bool,
    out: &mut dyn Write,
) -> Result<Outcome> {
    let host = cfg.params()?;
    let spec: EmbeddingSpec = match removal {
        Some(r) => maintenance_view(&host, r)?,
        None => {
            let all_k: Vec<u32> = (0..host.k()).collect();
            let all_m: Vec<u32> = (0..host.m()).collect();
            let kappa = if kappa.is_empty() { &all_k[..] } else { kappa };
            let lambda = if lambda.is_empty() { &all_m[..] } else { lambda };
            build_embedding(&host, kappa, lambda)?
        }
    };
    let logical = spec.logical();
    writeln!(
        out,
        "D3({},{}) inside D3({},{}): kappa {:?} lambda {:?}, {} routers offline",
        logical.k(),
        logical.m(),
        host.k(),
        host.m(),
        spec.kappa(),
        spec.lambda(),
        spec.offline().len()
    )?;
    let csv = spec.table_csv()?;
    out.write_all(csv.as_bytes())?;
    let mut outcome = Outcome::Ok;
    if let Some(path) = table {
        let rows = parse_table_csv(&fs::read_to_string(path)?)?;
        for row in &rows {
            let want = spec.table_row(row.i as usize);
            if row.ports != want || spec.kappa().get(row.i as usize) != Some(&row.k) {
                writeln!(out, "table row {} differs: given {:?}, computed {:?}", row.i, row.ports, want)?;
                outcome = Outcome::VerifyFailed;
            }
        }
    }
    if check {
        let (cases, failures) = check_embedding(&spec)?;
        writeln!(out, "{} embedding check: {cases} cases", if failures.is_empty() { "PASS" } else { "FAIL" })?;
        for f in &failures {
            writeln!(out, "  {f}")?;
        }
        if !failures.is_empty() {
            outcome = Outcome::VerifyFailed;
        }
    }
    if let Some(dir) = &cfg.out {
        write_file(dir, "table.csv", &csv)?;
        write_file(dir, "plan.csv", &wiring_csv(&spec.wiring_plan())?)?;
    }
    Ok(outcome)
}
