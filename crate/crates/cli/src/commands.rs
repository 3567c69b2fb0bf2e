use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use hforge_core::boolfn::ProbeMode;
use hforge_core::digraph::{PlainDigraph, TwoTypeDigraph};
use hforge_core::experiment::{dvd_deadline_equiv, subcube_stats, ExperimentReport, FnSpec};
use hforge_core::formats::{self, GraphDoc};
use hforge_core::gadget::{
    build_dvd_gadget, build_fvs_gadget, dictator_partition, layer_advisory, verify_completeness, CompletenessMode,
    CompletenessReport, GadgetParams,
};
use hforge_core::reduction::{
    decode_labeling, partition_from_labeling, ug_to_dvd, ug_to_fvs, DecoderParams, ReductionParams,
};
use hforge_core::solvers::{brute_force_dvd, brute_force_fvs, dvd_k_approx, SolverBudget};
use hforge_core::timecost::{brute_force_deadline, default_gamma, dvd_to_deadline, earliest_schedule};
use hforge_core::unique_games::{brute_force_opt, generate, GenKind, GenParams};
use hforge_core::{rational, Rational};
use serde_json::{json, Value};

use crate::{Cli, Command, ExperimentCmd, ExportCmd, GadgetCmd, ReduceCmd, SolveCmd, VerifyCmd, WitnessCmd};

#[derive(Debug)]
pub enum CliError {
    Core(hforge_core::Error),
    Io(PathBuf, std::io::Error),
    Csv(csv::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Csv(e) => write!(f, "csv: {e}"),
        }
    }
}

impl From<hforge_core::Error> for CliError {
    fn from(e: hforge_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl CliError {
    /// 1 for a failed verification, 3 for an exceeded budget, 2 otherwise.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(hforge_core::Error::BudgetExceeded { .. }) => ExitCode::from(3),
            CliError::Core(hforge_core::Error::InconsistentWitness(_)) => ExitCode::from(1),
            _ => ExitCode::from(2),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.clone(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cli: &Cli, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    emit(cli, &s)
}

fn pq(r: &Rational) -> Value {
    json!({ "value": rational::to_pq(r), "decimal": rational::to_decimal(r) })
}

fn parse_rational(s: &str) -> Result<Rational> {
    Ok(rational::parse(s)?)
}

fn two_type(path: &Path) -> Result<TwoTypeDigraph> {
    Ok(formats::two_type_from_json(&read(path)?)?)
}

fn plain(path: &Path) -> Result<PlainDigraph> {
    Ok(formats::plain_from_json(&read(path)?)?)
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Gadget(cmd) => {
            let g = match *cmd {
                GadgetCmd::Fvs(c) => build_fvs_gadget(&GadgetParams::fvs(c.k, c.r, c.s_len).with_budget(cli.budget))?,
                GadgetCmd::Dvd { cube: c, layers } => {
                    build_dvd_gadget(&GadgetParams::dvd(c.k, c.r, c.s_len, layers).with_budget(cli.budget))?
                }
            };
            emit(cli, &formats::two_type_to_json(&g))?;
        }
        Command::Ug(a) => {
            let kind = if a.random { GenKind::Random } else { GenKind::Satisfiable };
            let (inst, planted) = generate(kind, GenParams { nv: a.nv, nw: a.nw, deg: a.deg, r: a.r }, a.seed)?;
            emit(cli, &formats::ug_to_json(&inst, planted.as_ref()))?;
        }
        Command::Reduce(cmd) => reduce(cli, cmd)?,
        Command::Witness(cmd) => witness(cli, cmd)?,
        Command::Verify(cmd) => return verify(cli, cmd),
        Command::Decode(a) => {
            let g = two_type(&a.graph)?;
            let (inst, _) = formats::ug_from_json(&read(&a.ug)?)?;
            let w = formats::witness_from_json(&read(&a.witness)?)?;
            let survivors = w
                .classes
                .get(a.class)
                .cloned()
                .ok_or(hforge_core::Error::IndexOutOfRange { index: a.class, limit: w.classes.len() })?;
            let dp = DecoderParams { d: a.d, eta: parse_rational(&a.eta)?, trials: a.trials, seed: a.seed };
            let dec = decode_labeling(&inst, &g, &survivors, &dp)?;
            emit_json(
                cli,
                &json!({
                    "command": "decode",
                    "params": { "d": a.d, "eta": rational::to_pq(&dp.eta), "trials": a.trials, "class": a.class },
                    "seed": a.seed,
                    "survivors": dec.survivors,
                    "val": pq(&dec.draw.val),
                    "labeling": dec.draw.labeling,
                    "trial": dec.draw.trial,
                    "plurality": dec.draw.plurality,
                    "lists": dec.lists,
                    "empty_lists": dec.empty_lists,
                    "list_bound_holds": dec.list_bound_holds,
                    "forced_fraction": pq(&dec.forced_fraction),
                    "min_forced_slots": dec.min_forced_slots,
                }),
            )?;
        }
        Command::Solve(cmd) => solve(cli, cmd)?,
        Command::Experiment(cmd) => experiment(cli, cmd)?,
        Command::Export(ExportCmd::Dot { input }) => {
            let dot = match formats::graph_from_json(&read(input)?)? {
                GraphDoc::Plain(g) => g.to_dot(),
                GraphDoc::TwoType(g) => g.to_dot(),
            };
            emit(cli, &dot)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn reduce(cli: &Cli, cmd: &ReduceCmd) -> Result<()> {
    let text = match cmd {
        ReduceCmd::UgToFvs { p, input } => {
            let (inst, _) = formats::ug_from_json(&read(input)?)?;
            let g = ug_to_fvs(&inst, &ReductionParams::fvs(p.k, p.s_len, p.t).with_budget(cli.budget))?;
            formats::two_type_to_json(&g)
        }
        ReduceCmd::UgToDvd { p, layers, input } => {
            let (inst, _) = formats::ug_from_json(&read(input)?)?;
            let g = ug_to_dvd(&inst, &ReductionParams::dvd(p.k, p.s_len, p.t, *layers).with_budget(cli.budget))?;
            formats::two_type_to_json(&g)
        }
        ReduceCmd::DvdToDeadline { k, gamma, input } => {
            let g = plain(input)?;
            let gamma = gamma.as_deref().map(parse_rational).transpose()?.unwrap_or_else(|| default_gamma(*k));
            formats::deadline_to_json(&dvd_to_deadline(&g, *k, &gamma)?)
        }
    };
    emit(cli, &text)
}

fn witness(cli: &Cli, cmd: &WitnessCmd) -> Result<()> {
    let w = match cmd {
        WitnessCmd::Dictator { graph, s } => dictator_partition(&two_type(graph)?, *s)?,
        WitnessCmd::Labeling { graph, ug, labeling } => {
            let g = two_type(graph)?;
            let (inst, planted) = formats::ug_from_json(&read(ug)?)?;
            let rho = match labeling {
                Some(p) => formats::labeling_from_json(&read(p)?)?,
                None => planted.ok_or_else(|| {
                    hforge_core::Error::PartialLabeling("instance has no planted labeling; pass --labeling".into())
                })?,
            };
            partition_from_labeling(&inst, &g, &rho)?.0
        }
    };
    emit(cli, &formats::witness_to_json(&w))
}

fn completeness_json(r: &CompletenessReport) -> Value {
    json!({
        "class": r.class,
        "ok": r.ok,
        "detail": r.detail,
        "deleted": r.deleted,
        "remaining_tests": r.remaining_tests,
        "collapsed_arcs": r.collapsed_arcs,
        "longest_test_path": r.longest_test_path,
        "cycle": r.cycle,
    })
}

fn verify(cli: &Cli, cmd: &VerifyCmd) -> Result<ExitCode> {
    match cmd {
        VerifyCmd::Completeness { witness, graph, class, delta } => {
            let g = two_type(graph)?;
            let w = formats::witness_from_json(&read(witness)?)?;
            let mode = CompletenessMode::for_graph(&g);
            let classes: Vec<usize> = match class {
                Some(j) => vec![*j],
                None => (0..w.classes.len()).collect(),
            };
            let reports =
                classes.iter().map(|&j| verify_completeness(&g, &w, j, mode)).collect::<hforge_core::Result<Vec<_>>>();
            let reports = match reports {
                Ok(r) => r,
                Err(e @ hforge_core::Error::InconsistentWitness(_)) => {
                    emit_json(cli, &json!({ "command": "verify completeness", "ok": false, "detail": e.to_string() }))?;
                    return Ok(ExitCode::from(1));
                }
                Err(e) => return Err(e.into()),
            };
            let ok = reports.iter().all(|r| r.ok);
            let mut report = json!({
                "command": "verify completeness",
                "kind": g.kind().as_str(),
                "ok": ok,
                "classes": reports.iter().map(completeness_json).collect::<Vec<_>>(),
            });
            if g.kind().is_layered() {
                let delta = parse_rational(delta)?;
                let a = layer_advisory(&g, &delta)?;
                report["layer_advisory"] = json!({
                    "delta": rational::to_pq(&delta),
                    "layers": a.layers,
                    "tests_per_layer": a.tests_per_layer,
                    "lhs": pq(&a.lhs),
                    "holds": a.holds,
                });
            }
            emit_json(cli, &report)?;
            Ok(exit(ok))
        }
        VerifyCmd::Deadline { instance, realization } => {
            let inst = formats::deadline_from_json(&read(instance)?)?;
            let x = formats::realization_from_json(&inst, &read(realization)?)?;
            let sched = earliest_schedule(&inst, &x)?;
            let ok = sched.makespan <= *inst.deadline();
            emit_json(
                cli,
                &json!({
                    "command": "verify deadline",
                    "ok": ok,
                    "feasible": ok,
                    "makespan": pq(&sched.makespan),
                    "deadline": pq(inst.deadline()),
                    "cost": pq(&inst.cost(&x)),
                }),
            )?;
            Ok(exit(ok))
        }
    }
}

fn solve(cli: &Cli, cmd: &SolveCmd) -> Result<()> {
    let sb = SolverBudget { max_subsets: cli.budget, ..SolverBudget::default() };
    let report = match cmd {
        SolveCmd::Fvs { input } => {
            let del = brute_force_fvs(&plain(input)?, sb)?;
            json!({ "command": "solve fvs", "size": del.len(), "deleted": del })
        }
        SolveCmd::Dvd { k, approx, input } => {
            let g = plain(input)?;
            let del = if *approx { dvd_k_approx(&g, *k)? } else { brute_force_dvd(&g, *k, sb)? };
            let method = if *approx { "k-approx" } else { "exact" };
            json!({ "command": "solve dvd", "k": k, "method": method, "size": del.len(), "deleted": del })
        }
        SolveCmd::Deadline { input } => {
            let inst = formats::deadline_from_json(&read(input)?)?;
            let (cost, x) = brute_force_deadline(&inst, cli.budget)?;
            let choice: serde_json::Map<String, Value> =
                inst.activities().iter().zip(&x.choice).map(|(a, &c)| (a.id.clone(), json!(c))).collect();
            json!({ "command": "solve deadline", "cost": pq(&cost), "choice": choice })
        }
        SolveCmd::Ug { input } => {
            let (inst, _) = formats::ug_from_json(&read(input)?)?;
            let (opt, rho) = brute_force_opt(&inst, cli.budget)?;
            json!({ "command": "solve ug", "opt": pq(&opt), "labeling": rho })
        }
    };
    emit_json(cli, &report)
}

fn write_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&report.columns)?;
    for row in &report.rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn experiment(cli: &Cli, cmd: &ExperimentCmd) -> Result<()> {
    let (report, csv_path) = match cmd {
        ExperimentCmd::SubcubeStats { k, r, s_len, function, sampled, seed, csv } => {
            let f: FnSpec = function.parse()?;
            let mode = match sampled {
                Some(trials) => ProbeMode::Sampled { seed: *seed, trials: *trials as u64 },
                None => ProbeMode::Exact,
            };
            (subcube_stats(*k, *r, *s_len, f, mode, *seed)?, csv)
        }
        ExperimentCmd::DvdDeadlineEquiv { max_n, k, gamma, csv } => {
            let gamma = gamma.as_deref().map(parse_rational).transpose()?;
            (dvd_deadline_equiv(*max_n, *k, gamma, cli.budget)?, csv)
        }
    };
    if let Some(p) = csv_path {
        write_csv(p, &report)?;
    }
    emit(cli, &report.to_json())
}
