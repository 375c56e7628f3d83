use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use coverage_core::render::{render_plan, render_run};
use coverage_core::report::{group_order_csv, metrics_csv, trajectory_csv};
use coverage_core::{
    plan_scenario, simulate_plan, Controller, Error, PlanDocument, ReportError, Run, Scenario, ScenarioError,
    SearchError, SimError,
};

#[derive(Parser)]
#[command(name = "coverplan", version, about = "Plan and simulate budgeted multi-vehicle area coverage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search the cell size and write the plan.
    Plan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Simulate the team along an existing plan.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Plan JSON written by `plan`.
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Plan, then simulate.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchFlags,
        #[command(flatten)]
        sim: SimFlags,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, env = "COVERPLAN_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SearchFlags {
    /// Turnaround time budget in seconds.
    #[arg(long)]
    budget_time: Option<f64>,
    /// Path length budget in meters.
    #[arg(long)]
    budget_length: Option<f64>,
    #[arg(long)]
    cs_min: Option<f64>,
    #[arg(long)]
    cs_max: Option<f64>,
    #[arg(long)]
    cs_step: Option<f64>,
}

#[derive(Args)]
struct SimFlags {
    #[arg(long, value_parser = parse_controller)]
    controller: Option<Controller>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_controller(s: &str) -> Result<Controller, String> {
    match s.to_ascii_lowercase().as_str() {
        "cppf" => Ok(Controller::Cppf),
        "cpps" => Ok(Controller::Cpps),
        _ => Err(format!("unknown controller `{s}`, expected cppf or cpps")),
    }
}

enum Failure {
    Io(String),
    Schema(String),
    Infeasible(String),
    Setup(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Schema(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Setup(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Schema(m) | Failure::Infeasible(m) | Failure::Setup(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Scenario(ScenarioError::Io { .. }) => Failure::Io(msg),
            Error::Scenario(_) | Error::Report(ReportError::Json(_)) => Failure::Schema(msg),
            Error::Report(ReportError::Csv(_)) => Failure::Io(msg),
            Error::Search(SearchError::Infeasible { coarsest, .. }) => {
                let detail = coarsest.map_or_else(
                    || "no plan could be built at any size".to_string(),
                    |c| {
                        format!(
                            "coarsest size predicts length {:.2} m, time {:.2} s, coverage {:.2} %",
                            c.path_length,
                            c.turnaround_time,
                            c.coverage_percent * 100.0
                        )
                    },
                );
                Failure::Infeasible(format!("{msg}; {detail}"))
            }
            Error::Search(SearchError::ExceedsSensingRange { .. }) => Failure::Infeasible(msg),
            Error::Search(_) => Failure::Schema(msg),
            Error::Sim(SimError::Config(_)) => Failure::Schema(msg),
            Error::Sim(_) | Error::Plan(_) => Failure::Setup(msg),
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    Ok(Scenario::load(&common.scenario).map_err(Error::from)?)
}

fn apply_search_flags(s: &mut Scenario, f: &SearchFlags) -> Result<(), Failure> {
    if let Some(t) = f.budget_time {
        s.budgets.max_time = t;
    }
    if let Some(l) = f.budget_length {
        s.budgets.max_path_length = l;
    }
    if f.cs_min.is_some() || f.cs_max.is_some() || f.cs_step.is_some() {
        s.planner.cell_sizes = None;
        s.planner.cs_min = f.cs_min.unwrap_or(s.planner.cs_min);
        s.planner.cs_max = f.cs_max.unwrap_or(s.planner.cs_max);
        s.planner.cs_step = f.cs_step.unwrap_or(s.planner.cs_step);
    }
    s.validate().map_err(|e| Failure::from(Error::from(e)))
}

fn apply_sim_flags(s: &mut Scenario, f: &SimFlags) {
    if let Some(c) = f.controller {
        s.simulation.controller = c;
    }
    if let Some(seed) = f.seed {
        s.simulation.seed = seed;
    }
}

fn cmd_plan(scenario: &Scenario, out: &Path) -> Result<PlanDocument, Failure> {
    let started = Instant::now();
    let doc = plan_scenario(scenario)?;
    let elapsed = started.elapsed();
    let p = &doc.plan.prediction;
    println!(
        "cell size {} m (candidate {} of {}), {} blocks, {} waypoints",
        doc.plan.cell_size,
        doc.chosen_index + 1,
        doc.ladder.len(),
        doc.plan.graph.len(),
        doc.plan.path.len()
    );
    println!(
        "predicted length {:.2} m, time {:.2} s, coverage {:.2} %",
        p.path_length,
        p.turnaround_time,
        p.coverage_percent * 100.0
    );
    println!("planning wall clock {:.3} s ({} evaluations)", elapsed.as_secs_f64(), doc.search.len());
    let json = doc.to_json().map_err(Error::from)?;
    let a = write(out, "plan.json", &json)?;
    let b = write(out, "plan.svg", &render_plan(&doc))?;
    println!("wrote {} and {}", a.display(), b.display());
    Ok(doc)
}

fn cmd_simulate(scenario: &Scenario, doc: &PlanDocument, out: &Path) -> Result<(), Failure> {
    let Run { result, row } = simulate_plan(scenario, doc)?;
    println!(
        "{} {}: CP {:.2} %, PL {:.2} m, TT {:.2} s, CR {:.2} %, G {:.3}, O {:.3}",
        row.controller,
        if row.completed { "completed" } else { "timed out" },
        row.coverage_percent * 100.0,
        row.path_length,
        row.turnaround_time,
        row.redundancy_percent * 100.0,
        row.final_group,
        row.final_order
    );
    let csv_err = |e: ReportError| Failure::from(Error::from(e));
    let written = [
        write(out, "metrics.csv", &metrics_csv(&row).map_err(csv_err)?)?,
        write(out, "group_order.csv", &group_order_csv(&result.report).map_err(csv_err)?)?,
        write(out, "trajectory.csv", &trajectory_csv(&result).map_err(csv_err)?)?,
        write(out, "run.svg", &render_run(doc, &result.trajectory))?,
    ];
    let names: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    println!("wrote {}", names.join(", "));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan { common, search } => {
            let mut s = load(&common)?;
            apply_search_flags(&mut s, &search)?;
            cmd_plan(&s, &common.out).map(|_| ())
        }
        Command::Simulate { common, plan, sim } => {
            let mut s = load(&common)?;
            apply_sim_flags(&mut s, &sim);
            let text = fs::read_to_string(&plan).map_err(|e| Failure::Io(format!("cannot read {}: {e}", plan.display())))?;
            let doc = PlanDocument::from_json(&text).map_err(Error::from)?;
            cmd_simulate(&s, &doc, &common.out)
        }
        Command::Pipeline { common, search, sim } => {
            let mut s = load(&common)?;
            apply_search_flags(&mut s, &search)?;
            apply_sim_flags(&mut s, &sim);
            let doc = cmd_plan(&s, &common.out)?;
            cmd_simulate(&s, &doc, &common.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
