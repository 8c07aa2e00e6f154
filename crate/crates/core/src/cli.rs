//! Command-line surface.
//!
//! Exit status: 0 on success, 1 on bad input (usage, parse or validation
//! errors), 2 when the solver does not converge. Diagnostics go to the
//! error stream.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{self, BreakEven, SavingsSeries};
use crate::calibration::{self, DEFAULT_PRESET};
use crate::costs;
use crate::error::{Error, Result};
use crate::io::{self, Provenance, RunReport};
use crate::planner::{InitialGuess, SolverConfig};
use crate::types::{BreakEvenSpec, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fistrans", version, about = "Fiscal transition paths under nonlinear adjustment costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the planner problem and report the path.
    Simulate {
        #[command(flatten)]
        input: ScenarioInput,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the trajectory CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full JSON run report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Break-even time and windowed cumulative net savings.
    Breakeven {
        #[command(flatten)]
        input: ScenarioInput,
        /// Use a scenario-table row of the preset instead of the file's [breakeven] section.
        #[arg(long)]
        row: Option<String>,
    },
    /// Reproduce the administrative-savings scenario table.
    ScenarioTable {
        #[arg(long, default_value = DEFAULT_PRESET)]
        preset: String,
    },
    /// Solve, classify effective expenditure and check the initial-rise condition.
    Jshape {
        #[command(flatten)]
        input: ScenarioInput,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[command(flatten)]
        input: ScenarioInput,
    },
    /// Print a preset as a scenario file.
    ExportPreset {
        #[arg(long, default_value = DEFAULT_PRESET)]
        preset: String,
    },
}

#[derive(Debug, Args)]
struct ScenarioInput {
    /// Scenario file. Without one, the preset's default scenario is used.
    scenario: Option<PathBuf>,
    /// Preset supplying defaults when the file names none.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    max_iterations: usize,
    #[arg(long, default_value_t = SolverConfig::default().terminal_weight)]
    terminal_weight: f64,
    /// Start from the baseline instead of a ramp to the target.
    #[arg(long)]
    hold_start: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            terminal_weight: self.terminal_weight,
            initial_guess: if self.hold_start {
                InitialGuess::Hold
            } else {
                InitialGuess::LinearRamp
            },
            ..SolverConfig::default()
        }
    }
}

impl ScenarioInput {
    fn load(&self) -> Result<(Scenario, Provenance)> {
        match &self.scenario {
            Some(path) => {
                let text = read(path)?;
                io::parse_scenario_with(&text, self.preset.as_deref())
            }
            None => {
                let preset = self.preset.as_deref().unwrap_or(DEFAULT_PRESET);
                Ok((io::preset_scenario(preset)?, Provenance::preset_only(preset)))
            }
        }
    }

    fn preset_name(&self, provenance: &Provenance) -> String {
        self.preset.clone().unwrap_or_else(|| provenance.preset.clone())
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Run the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Simulate {
            input,
            solver,
            out: csv_path,
            report,
        } => {
            let (scenario, provenance) = input.load()?;
            let cfg = solver.config();
            let run = RunReport::build(&scenario, &cfg, provenance)?;
            let csv = io::emit_trajectory_csv(&run);
            match csv_path {
                Some(p) => {
                    write_file(&p, &csv)?;
                    print_summary(out, &run)?;
                }
                None => emit(out, &csv)?,
            }
            if let Some(p) = report {
                write_file(&p, &run.to_json())?;
            }
            Ok(convergence_code(&run, err))
        }
        Command::Breakeven { input, row } => {
            let (scenario, provenance) = input.load()?;
            let (label, spec) = match row {
                Some(r) => {
                    let preset_name = input.preset_name(&provenance);
                    let preset = calibration::builtin_preset(&preset_name)
                        .unwrap_or_else(calibration::load_default_preset);
                    let found = preset.breakeven_scenario(&r).ok_or_else(|| {
                        Error::validation(format!("row {r:?} is not in preset {:?}", preset.name))
                    })?;
                    (found.label.clone(), found.spec)
                }
                None => (
                    scenario.name.clone(),
                    scenario.breakeven.ok_or_else(|| {
                        Error::validation("scenario has no [breakeven] section (or pass --row)")
                    })?,
                ),
            };
            print_breakeven(out, &label, &spec, scenario.discount)?;
            Ok(EXIT_OK)
        }
        Command::ScenarioTable { preset } => {
            let preset = calibration::builtin_preset(&preset)
                .ok_or_else(|| Error::validation(format!("unknown preset {preset:?}")))?;
            emit(out, &scenario_table(&preset)?)?;
            Ok(EXIT_OK)
        }
        Command::Jshape { input, solver } => {
            let (scenario, provenance) = input.load()?;
            let cfg = solver.config();
            let run = RunReport::build(&scenario, &cfg, provenance)?;
            print_jshape(out, &scenario, &run)?;
            Ok(convergence_code(&run, err))
        }
        Command::Validate { input } => {
            let (scenario, provenance) = input.load()?;
            let mut text = format!(
                "ok: {} (preset {}, horizon {}, beta {}, {} rigidity",
                scenario.name,
                provenance.preset,
                scenario.horizon,
                scenario.discount,
                scenario.rigidity.mode().name()
            );
            if scenario.bounds.is_some() {
                text.push_str(", bounded changes");
            }
            if scenario.breakeven.is_some() {
                text.push_str(", break-even block");
            }
            text.push_str(")\n");
            if !provenance.assumed.is_empty() {
                text.push_str(&format!("not from the preset tables: {}\n", provenance.assumed.join(", ")));
            }
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::ExportPreset { preset } => {
            let scenario = io::preset_scenario(&preset)?;
            emit(out, &io::serialize_scenario(&scenario))?;
            Ok(EXIT_OK)
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Io(e.to_string()))
}

fn convergence_code(run: &RunReport, err: &mut dyn Write) -> i32 {
    if run.solve.converged {
        EXIT_OK
    } else {
        let _ = writeln!(
            err,
            "error: solver did not converge after {} iterations (gradient norm {:e}, max Euler residual {:e})",
            run.solve.iterations, run.solve.gradient_norm, run.solve.max_euler_residual
        );
        EXIT_NOT_CONVERGED
    }
}

fn print_summary(out: &mut dyn Write, run: &RunReport) -> Result<()> {
    let s = &run.solve;
    let mut text = format!(
        "scenario: {}\nconverged: {}\niterations: {}\nobjective: {:.6}\ngradient norm: {:e}\nmax Euler residual: {:e}\n",
        run.scenario.name, s.converged, s.iterations, s.objective, s.gradient_norm, s.max_euler_residual
    );
    if let Some(j) = &run.jshape {
        text.push_str(&format!(
            "J-shaped: {} (peak {:.6} at t={})\n",
            j.is_j_shaped, j.peak_value, j.peak_index
        ));
    }
    if let Some(sv) = &run.savings {
        text.push_str(&format!("{}\n", breakeven_line(sv)));
    }
    emit(out, &text)
}

fn breakeven_line(s: &SavingsSeries) -> String {
    let t = match s.breakeven {
        BreakEven::At(t) => format!("t* = {t}"),
        BreakEven::BeyondWindow(w) => format!("t* > {w}"),
    };
    format!(
        "{t}; cumulative net savings t=0..{}: {:.2}",
        s.window(),
        s.total_net()
    )
}

fn print_breakeven(out: &mut dyn Write, label: &str, spec: &BreakEvenSpec, discount: f64) -> Result<()> {
    let equal = analytics::equal_step_savings(spec)?;
    let mut text = format!(
        "scenario: {label}\ntarget: rho = {:.2}, H = {}\nequal-step path: {}\n",
        spec.target_fraction,
        spec.target_horizon,
        breakeven_line(&equal)
    );
    text.push_str("year  F_adj  S_gross  Phi  S_net  cumulative\n");
    let path = analytics::equal_step_path(spec);
    for t in 0..equal.net.len() {
        text.push_str(&format!(
            "{t:>4}  {:.4}  {:.4}  {:.4}  {:.4}  {:.4}\n",
            path[t], equal.gross[t], equal.outlay[t], equal.net[t], equal.cumulative[t]
        ));
    }
    // Planner-derived path for comparison; the equal-step path is canonical.
    let planner = analytics::planner_path(spec, discount, &SolverConfig::default())
        .and_then(|p| analytics::savings_series(&p, spec));
    match planner {
        Ok(s) => text.push_str(&format!("planner path (beta = {discount}): {}\n", breakeven_line(&s))),
        Err(e) => text.push_str(&format!("planner path unavailable: {e}\n")),
    }
    emit(out, &text)
}

/// Text table of every break-even row of a preset, recomputed under the
/// equal-step convention next to the published values.
pub fn scenario_table(preset: &calibration::CalibrationPreset) -> Result<String> {
    let mut text = String::from("scenario  target(rho,H)  regime  gamma_F  eta_F  t*  cum_net_0_5  reported_t*  reported_cum\n");
    for row in &preset.breakeven_scenarios {
        let s = analytics::equal_step_savings(&row.spec)?;
        let spec = &row.spec;
        let reported_t = row
            .reported_breakeven
            .map_or_else(|| format!(">{}", spec.window), |t| t.to_string());
        text.push_str(&format!(
            "{}  ({:.2}, {})  {}  {:.2}  {:.2}  {}  {:.2}  {}  {:.2}\n",
            row.label,
            spec.target_fraction,
            spec.target_horizon,
            row.regime,
            spec.rigidity.curvature.gamma_up,
            spec.rigidity.curvature.eta,
            s.breakeven,
            s.total_net(),
            reported_t,
            row.reported_cumulative
        ));
    }
    Ok(text)
}

fn print_jshape(out: &mut dyn Write, scenario: &Scenario, run: &RunReport) -> Result<()> {
    let c0 = costs::stage_cost(&scenario.baseline, &scenario.cost).value;
    let long_run = costs::stage_cost_raw(&scenario.cost.long_run_allocation(), &scenario.cost).value;
    let phi1 = run.adjustment_costs.get(1).copied().unwrap_or(0.0);
    let mut text = format!("scenario: {}\n", scenario.name);
    match &run.jshape {
        Some(j) => text.push_str(&format!(
            "J-shaped: {}\npeak: {:.6} at t={}\nterminal: {:.6}\n",
            j.is_j_shaped, j.peak_value, j.peak_index, j.terminal_value
        )),
        None => text.push_str("J-shaped: undetermined (horizon < 2)\n"),
    }
    match analytics::jshape_condition(phi1, c0, long_run) {
        Ok(holds) => text.push_str(&format!(
            "initial-rise condition Phi(dx_1) > C(x_0) - C(x_lr): {holds} ({phi1:.6} vs {:.6})\n",
            c0 - long_run
        )),
        Err(e) => text.push_str(&format!("initial-rise condition not applicable: {e}\n")),
    }
    text.push_str(&format!(
        "G_eff[0..=1]: {:.6} -> {:.6}\n",
        run.effective[0],
        run.effective.get(1).copied().unwrap_or(f64::NAN)
    ));
    emit(out, &text)
}
