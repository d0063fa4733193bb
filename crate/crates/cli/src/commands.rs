//! Experiment orchestration: runs one command against a validated
//! [`Experiment`] and writes its CSV (and optional SVG) outputs. All writes
//! happen here, after computation has finished.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hyperfin_core::{
    attractor_trace, bifurcation_scan, classify_regime, integrate, lyapunov_spectrum,
    spectrum_scan, Regime,
};

use crate::config::{Experiment, ScanKind};
use crate::error::CliError;
use crate::output;
use crate::plot::{self, Panel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Lyapunov,
    Scan,
    Attractor,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// The orbit escaped the guard; results are truncated.
    pub diverged: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl Outcome {
    /// 0 on success, 3 for a divergence-truncated result.
    pub fn exit_code(&self) -> i32 {
        if self.diverged {
            3
        } else {
            0
        }
    }
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(self.dir).map_err(io(self.dir))?;
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(io(&path))?;
        self.files.push(path);
        Ok(())
    }
}

pub fn run(command: Command, exp: &Experiment) -> Result<Outcome, CliError> {
    let mut writer = Writer {
        dir: &exp.out_dir,
        files: Vec::new(),
    };
    let (diverged, summary) = match command {
        Command::Simulate => simulate(exp, &mut writer)?,
        Command::Lyapunov => lyapunov(exp, &mut writer)?,
        Command::Scan => scan(exp, &mut writer)?,
        Command::Attractor => attractor(exp, &mut writer)?,
    };
    Ok(Outcome {
        diverged,
        files: writer.files,
        summary,
    })
}

fn simulate(exp: &Experiment, w: &mut Writer) -> Result<(bool, String), CliError> {
    let s = &exp.scenario;
    let traj = integrate(&s.model, &s.x0, &s.orders, &exp.grid, exp.guard)?;
    let names = exp.component_names();
    w.write("trajectory.csv", &output::trajectory_csv(&traj, names))?;
    if exp.plot {
        let panels: Vec<Panel> = names
            .iter()
            .enumerate()
            .map(|(i, n)| Panel {
                title: format!("{n}(t)"),
                x_label: "t".into(),
                y_label: n.to_string(),
                lines: vec![traj
                    .states()
                    .enumerate()
                    .map(|(k, st)| (k as f64 * exp.grid.h, st[i]))
                    .collect()],
                ..Default::default()
            })
            .collect();
        w.write("trajectory.svg", &plot::render(&panels))?;
    }
    let summary = match traj.diverged_at() {
        Some(step) => format!("orbit diverged at step {step}; wrote {} rows", traj.len()),
        None => format!("wrote {} rows", traj.len()),
    };
    Ok((traj.diverged(), summary))
}

fn lyapunov(exp: &Experiment, w: &mut Writer) -> Result<(bool, String), CliError> {
    let map = exp.scenario.map()?;
    let spec = lyapunov_spectrum(&map, &exp.scenario.x0, &exp.lyapunov)?;
    let regime = classify_regime(&spec, exp.lyapunov.eps_positive);
    w.write("spectrum.csv", &output::spectrum_csv(&spec))?;

    let mut summary = String::new();
    for (i, v) in spec.exponents.iter().enumerate() {
        writeln!(summary, "lambda_{} = {v:+.6}", i + 1).unwrap();
    }
    writeln!(summary, "converged: {}", spec.converged).unwrap();
    if spec.degenerate {
        writeln!(summary, "warning: tangent frame degenerated").unwrap();
    }
    if let Some(at) = spec.diverged_at {
        writeln!(summary, "orbit diverged after {at} iterations").unwrap();
    }
    write!(summary, "regime: {regime}").unwrap();
    Ok((regime == Regime::Divergent, summary))
}

fn scan(exp: &Experiment, w: &mut Writer) -> Result<(bool, String), CliError> {
    let spec = exp.scan_spec()?;
    let parameter = spec.plan.parameter.to_string();
    match spec.kind {
        ScanKind::Spectrum => {
            let result = spectrum_scan(&spec.plan)?;
            let dim = exp.dim();
            w.write("scan.csv", &output::spectrum_scan_csv(&result, dim))?;
            if exp.plot {
                let lines = (0..dim)
                    .map(|i| {
                        result
                            .records
                            .iter()
                            .filter_map(|r| Some((r.param_value, r.spectrum.as_ref()?.exponents[i])))
                            .collect()
                    })
                    .collect();
                let panel = Panel {
                    title: format!("Lyapunov exponents vs {parameter}"),
                    x_label: parameter.clone(),
                    y_label: "lambda".into(),
                    lines,
                    ..Default::default()
                };
                w.write("scan.svg", &plot::render(&[panel]))?;
            }
            let mut counts = std::collections::BTreeMap::new();
            for r in &result.records {
                *counts.entry(r.regime.map(|g| g.as_str()).unwrap_or("divergent")).or_insert(0) += 1;
            }
            let tally: Vec<String> = counts.iter().map(|(k, v)| format!("{k}: {v}")).collect();
            Ok((false, format!("{} points over {parameter}; {}", result.records.len(), tally.join(", "))))
        }
        ScanKind::Bifurcation => {
            let result = bifurcation_scan(&spec.plan, spec.component)?;
            w.write("bifurcation.csv", &output::bifurcation_csv(&result))?;
            let name = exp.component_names()[spec.component];
            if exp.plot {
                let points = result
                    .records
                    .iter()
                    .flat_map(|r| r.samples.iter().map(move |v| (r.param_value, *v)))
                    .collect();
                let panel = Panel {
                    title: format!("Bifurcation of {name} vs {parameter}"),
                    x_label: parameter.clone(),
                    y_label: name.into(),
                    points,
                    ..Default::default()
                };
                w.write("bifurcation.svg", &plot::render(&[panel]))?;
            }
            let diverged = result.records.iter().filter(|r| r.diverged).count();
            Ok((
                false,
                format!("{} points over {parameter}; {diverged} divergent", result.records.len()),
            ))
        }
    }
}

fn attractor(exp: &Experiment, w: &mut Writer) -> Result<(bool, String), CliError> {
    let projection = exp.projection()?;
    let trace = attractor_trace(&exp.scenario, exp.grid.n_steps, exp.transient, projection, exp.guard)?;
    let names = exp.projection_names();
    w.write("attractor.csv", &output::attractor_csv(&trace, &names))?;
    if exp.plot {
        let panels: Vec<Panel> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(a, b)| Panel {
                title: format!("({}, {})", names[a], names[b]),
                x_label: names[a].clone(),
                y_label: names[b].clone(),
                points: trace.points.iter().map(|p| (p[a], p[b])).collect(),
                ..Default::default()
            })
            .collect();
        w.write("attractor.svg", &plot::render(&panels))?;
    }
    let ext = trace.extent();
    let mut summary = format!(
        "{} points; max state norm {:.6}; extent {}={:.4} {}={:.4} {}={:.4}",
        trace.points.len(),
        trace.max_norm,
        names[0],
        ext[0],
        names[1],
        ext[1],
        names[2],
        ext[2]
    );
    if let Some(step) = trace.diverged_at {
        write!(summary, "; orbit diverged at step {step}").unwrap();
    }
    Ok((trace.diverged_at.is_some(), summary))
}
