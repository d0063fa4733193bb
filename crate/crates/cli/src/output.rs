//! CSV rendering. Floats are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fmt::Write as _;

use hyperfin_core::{AttractorTrace, LyapunovSpectrum, SweepResult, Trajectory};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `step,t,<components>` with one row per recorded state, step 0 included.
pub fn trajectory_csv(traj: &Trajectory, names: &[&str]) -> String {
    let mut out = String::from("step,t");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (step, state) in traj.states().enumerate() {
        let t = step as f64 * traj.step_size();
        write!(out, "{step},{}", fmt_f64(t)).unwrap();
        for v in state {
            write!(out, ",{}", fmt_f64(*v)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn spectrum_csv(spec: &LyapunovSpectrum) -> String {
    let mut out = String::from("exponent_rank,value\n");
    for (i, v) in spec.exponents.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, fmt_f64(*v)).unwrap();
    }
    out
}

/// `param_value,lambda_1..lambda_n,regime`.
pub fn spectrum_scan_csv(result: &SweepResult, dim: usize) -> String {
    let mut out = String::from("param_value");
    for i in 1..=dim {
        write!(out, ",lambda_{i}").unwrap();
    }
    out.push_str(",regime\n");
    for rec in &result.records {
        out.push_str(&fmt_f64(rec.param_value));
        match &rec.spectrum {
            Some(s) => s.exponents.iter().for_each(|v| write!(out, ",{}", fmt_f64(*v)).unwrap()),
            None => (0..dim).for_each(|_| out.push_str(",NaN")),
        }
        let regime = rec.regime.map(|r| r.as_str()).unwrap_or("divergent");
        writeln!(out, ",{regime}").unwrap();
    }
    out
}

/// `param_value,sample_index,component_value`, one row per sample.
pub fn bifurcation_csv(result: &SweepResult) -> String {
    let mut out = String::from("param_value,sample_index,component_value\n");
    for rec in &result.records {
        let p = fmt_f64(rec.param_value);
        for (i, v) in rec.samples.iter().enumerate() {
            writeln!(out, "{p},{i},{}", fmt_f64(*v)).unwrap();
        }
    }
    out
}

/// One row per projected point, headed by the projected component names.
pub fn attractor_csv(trace: &AttractorTrace, names: &[String]) -> String {
    let mut out = String::with_capacity(64 * (trace.points.len() + 1));
    writeln!(out, "{}", names.join(",")).unwrap();
    for p in &trace.points {
        writeln!(out, "{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2])).unwrap();
    }
    out
}

/// Parses a trajectory CSV back into `(step, state)` rows; the time column
/// is dropped.
pub fn parse_trajectory_csv(text: &str) -> Option<Vec<(usize, Vec<f64>)>> {
    let mut lines = text.lines();
    lines.next()?;
    lines
        .map(|line| {
            let mut fields = line.split(',');
            let step = fields.next()?.parse().ok()?;
            fields.next()?;
            let state = fields.map(|f| f.parse().ok()).collect::<Option<Vec<f64>>>()?;
            Some((step, state))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        for v in [0.1, 1.0 / 3.0, -1.2345678901234567e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
