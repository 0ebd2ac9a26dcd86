//! Scenario dispatch: runs a validated [`RunConfig`] and renders its primary output.
//!
//! Every output carries the tool version and the SHA-256 of the normalized config; CSV
//! outputs put them in leading `#` lines, JSON outputs in top-level fields.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::budget::full_budget;
use crate::config::{Format, RunConfig, Scenario};
use crate::error::{invalid, Result};
use crate::gates::{run_cz_single_atom, run_cz_three_atom, run_cz_two_atom, run_initialization, run_readout_stirap, GateResult, InitResult, QUBIT_STATES};
use crate::model::ProtocolKind;
use crate::motion::{run_motion_sqrt_scan, run_motion_thermal, MotionResult};
use crate::scaling::{error_vs_frequency_curve, longrange_error_vs_distance, write_distance_csv, write_frequency_csv};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result of one scenario in memory.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Gate(Box<GateResult>),
    Budget(Box<crate::budget::ErrorBudget>),
    Frequency(Vec<crate::scaling::FrequencyRow>),
    Distance { protocol: ProtocolKind, rows: Vec<crate::scaling::DistanceRow> },
    Motion(Box<MotionResult>),
    MotionScan(crate::motion::SqrtScan),
    Readout(crate::gates::ReadoutResult),
    Init(InitResult),
}

fn missing(block: &str) -> crate::Error {
    invalid(format!("config lacks the {block} block"))
}

/// Runs the scenario; errors carry the scenario name as context.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let opts = cfg.solver;
    let out = (|| -> Result<Outcome> {
        Ok(match cfg.scenario {
            Scenario::Gate => Outcome::Gate(Box::new(run_cz_single_atom(cfg.gate.as_ref().ok_or_else(|| missing("gate"))?, &opts)?)),
            Scenario::Longrange => {
                let g = cfg.gate.as_ref().ok_or_else(|| missing("gate"))?;
                let p = cfg.protocol.as_ref().ok_or_else(|| missing("protocol"))?;
                let r = match p.kind {
                    ProtocolKind::CzThreeAtom => run_cz_three_atom(g, p, &opts)?,
                    _ => run_cz_two_atom(g, p, &opts)?,
                };
                Outcome::Gate(Box::new(r))
            }
            Scenario::Budget => {
                let g = cfg.gate.as_ref().ok_or_else(|| missing("gate"))?;
                Outcome::Budget(Box::new(full_budget(g, &cfg.budget.clone().unwrap_or_default())?))
            }
            Scenario::Optimize | Scenario::ScanFrequency => {
                let s = cfg.scaling.as_ref().ok_or_else(|| missing("scaling"))?;
                Outcome::Frequency(error_vs_frequency_curve(&s.anchors, &s.f, s.d_m, s.environment, s.dx_over_x)?)
            }
            Scenario::ScanDistance => {
                let (spec, protocol) = cfg.distance.as_ref().ok_or_else(|| missing("distance"))?;
                Outcome::Distance { protocol: *protocol, rows: longrange_error_vs_distance(spec, *protocol)? }
            }
            Scenario::Motion => {
                let g = cfg.gate.as_ref().ok_or_else(|| missing("gate"))?;
                let m = cfg.motion.as_ref().ok_or_else(|| missing("motion"))?;
                match &m.nbar_grid {
                    Some(grid) => Outcome::MotionScan(run_motion_sqrt_scan(g, &m.spec, grid)?),
                    None => Outcome::Motion(Box::new(run_motion_thermal(g, &m.spec)?)),
                }
            }
            Scenario::Readout => {
                let g = cfg.gate.as_ref().ok_or_else(|| missing("gate"))?;
                Outcome::Readout(run_readout_stirap(g, &cfg.readout.unwrap_or_default(), &opts)?)
            }
            Scenario::Init => {
                let g = cfg.gate.as_ref().ok_or_else(|| missing("gate"))?;
                Outcome::Init(run_initialization(g, &cfg.init.clone().unwrap_or_default(), &opts)?)
            }
        })
    })();
    out.map_err(|e| e.context(format!("scenario {}", cfg.scenario.name())))
}

const INPUTS: [&str; 4] = ["00", "01", "10", "11"];

fn kv(rows: &[(String, f64)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        writeln!(s, "{k},{v:.11e}").expect("writing to a String");
    }
    s
}

fn gate_csv(r: &GateResult) -> String {
    let mut rows = vec![
        ("superposition_error".to_string(), r.superposition_error),
        ("projected_error".to_string(), r.projected_error),
        ("lost_population".to_string(), r.lost_population),
    ];
    for (k, name) in INPUTS.iter().enumerate() {
        rows.push((format!("phase_{name}_rad"), r.acquired_phases[k]));
        rows.push((format!("truth_table_fidelity_{name}"), r.truth_table_fidelities[k]));
        rows.push((format!("ground_population_{name}"), r.ground_populations[k]));
        for (a, x) in r.max_excitation[k].iter().enumerate() {
            rows.push((format!("max_rydberg_{name}_atom{}", a + 1), *x));
        }
    }
    debug_assert_eq!(QUBIT_STATES.len(), INPUTS.len());
    kv(&rows)
}

fn csv_body(outcome: &Outcome) -> Result<String> {
    use std::io::Write;
    let mut buf = Vec::new();
    match outcome {
        Outcome::Gate(r) => return Ok(gate_csv(r)),
        Outcome::Budget(b) => b.write_csv(&mut buf)?,
        Outcome::Frequency(rows) => write_frequency_csv(rows, &mut buf)?,
        Outcome::Distance { protocol, rows } => write_distance_csv(rows, *protocol, &mut buf)?,
        Outcome::Motion(m) => {
            return Ok(kv(&[
                ("nbar".into(), m.nbar),
                ("eps_motion".into(), m.eps_motion),
                ("delta_nbar".into(), m.delta_nbar),
                ("frozen_error".into(), m.frozen_error),
                ("thermal_error".into(), m.thermal_error),
                ("thermal_cutoff".into(), m.thermal_cutoff as f64),
                ("tail_mass".into(), m.tail_mass),
            ]))
        }
        Outcome::MotionScan(s) => {
            writeln!(buf, "# exponent {:.11e}", s.exponent)?;
            s.write_csv(&mut buf)?
        }
        Outcome::Readout(r) => {
            return Ok(kv(&[
                ("p_transfer_given_0".into(), r.p_transfer_given_0),
                ("p_stay_given_1".into(), r.p_stay_given_1),
                ("p_transfer_given_1".into(), r.p_transfer_given_1),
            ]))
        }
        Outcome::Init(r) => {
            writeln!(buf, "# effective_rabi_rad_s {:.11e}", r.effective_rabi)?;
            writeln!(buf, "# predicted_time_constant_us {:.11e}", r.predicted_time_constant * 1e6)?;
            match r.fitted_time_constant {
                Some(t) => writeln!(buf, "# fitted_time_constant_us {:.11e}", t * 1e6)?,
                None => writeln!(buf, "# fitted_time_constant_us none")?,
            }
            writeln!(buf, "duration_us,p_pumped_from_0,p_pumped_from_1,p_pumped_from_2")?;
            for (d, p) in r.durations.iter().zip(&r.p_pumped) {
                writeln!(buf, "{:.11e},{:.11e},{:.11e},{:.11e}", d * 1e6, p[0], p[1], p[2])?;
            }
        }
    }
    Ok(String::from_utf8(buf).expect("CSV writers emit UTF-8"))
}

/// Renders the primary output in the configured format.
pub fn render(cfg: &RunConfig, outcome: &Outcome, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# rydmol {VERSION}").expect("writing to a String");
            writeln!(s, "# scenario {}", cfg.scenario.name()).expect("writing to a String");
            writeln!(s, "# config_sha256 {}", cfg.hash()).expect("writing to a String");
            writeln!(s, "# config {}", serde_json::to_string(&cfg.normalized)?).expect("writing to a String");
            s.push_str(&csv_body(outcome)?);
            Ok(s)
        }
        Format::Json => {
            let doc: Value = json!({
                "tool": "rydmol",
                "version": VERSION,
                "scenario": cfg.scenario.name(),
                "config_sha256": cfg.hash(),
                "config": cfg.normalized,
                "result": serde_json::to_value(outcome)?,
            });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Parses, runs and renders in one call.
pub fn run_text(config_text: &str, format: Option<Format>) -> Result<String> {
    let cfg = crate::config::parse_config(config_text)?;
    let outcome = execute(&cfg)?;
    render(&cfg, &outcome, format.unwrap_or(cfg.format))
}
