//! Parameter sweeps over the discretized systems: Lyapunov spectra and
//! regime labels per grid point, bifurcation sample columns, and projected
//! attractor traces.
//!
//! Grid points are independent, so scans fan out on a rayon pool of the
//! requested width. Records always come back in grid order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::conformable::{escaped, euler_step_into, OrderVector, StepCoefficients, VectorField, DEFAULT_GUARD};
use crate::error::{Error, Result};
use crate::lyapunov::{classify_regime, lyapunov_spectrum, LyapunovSettings, LyapunovSpectrum, Regime};
use crate::models::{ConformableMap, FinanceParams, Model};

pub const COMPONENT_NAMES: [&str; 5] = ["x", "y", "z", "w", "u"];

/// Index of a state component by its conventional letter.
pub fn component_index(name: &str) -> Option<usize> {
    COMPONENT_NAMES.iter().position(|c| *c == name)
}

/// The quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    /// Zero-based index into the order vector; `alpha1` is `Alpha(0)`.
    Alpha(usize),
    A,
    B,
    C,
    D,
    K,
    P,
    H,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParameter::Alpha(i) => write!(f, "alpha{}", i + 1),
            SweepParameter::A => f.write_str("a"),
            SweepParameter::B => f.write_str("b"),
            SweepParameter::C => f.write_str("c"),
            SweepParameter::D => f.write_str("d"),
            SweepParameter::K => f.write_str("k"),
            SweepParameter::P => f.write_str("p"),
            SweepParameter::H => f.write_str("h"),
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a" => SweepParameter::A,
            "b" => SweepParameter::B,
            "c" => SweepParameter::C,
            "d" => SweepParameter::D,
            "k" => SweepParameter::K,
            "p" => SweepParameter::P,
            "h" => SweepParameter::H,
            _ => match s.strip_prefix("alpha").and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if (1..=5).contains(&n) => SweepParameter::Alpha(n - 1),
                _ => return Err(Error::InvalidPlan(format!("unknown sweep parameter `{s}`"))),
            },
        })
    }
}

/// Everything needed to iterate one discretized system.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: Model,
    pub orders: OrderVector,
    pub x0: Vec<f64>,
    pub h: f64,
}

impl Scenario {
    pub fn new(model: Model, orders: OrderVector, x0: Vec<f64>, h: f64) -> Result<Self> {
        let dim = model.dim();
        if orders.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "orders vs model",
                expected: dim,
                got: orders.len(),
            });
        }
        if x0.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "initial state vs model",
                expected: dim,
                got: x0.len(),
            });
        }
        if let Some(component) = x0.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { component });
        }
        // validates h
        StepCoefficients::new(&orders, h)?;
        Ok(Scenario { model, orders, x0, h })
    }

    /// The 5D setting used for hyperchaos detection: h = 0.002,
    /// a = 0.8, b = 0.6, c = 1, d = 2, alpha = (0.3, 0.5, 0.6, 0.24, alpha5),
    /// x0 = (0.4, 0.6, 0.8, 0.3, 0.4).
    pub fn baseline(alpha5: f64, k: f64, p: f64) -> Result<Self> {
        let params = FinanceParams { k, p, ..FinanceParams::default() };
        Scenario::new(
            Model::finance_5d(params)?,
            OrderVector::new(vec![0.3, 0.5, 0.6, 0.24, alpha5])?,
            vec![0.4, 0.6, 0.8, 0.3, 0.4],
            0.002,
        )
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn coefficients(&self) -> Result<StepCoefficients> {
        StepCoefficients::new(&self.orders, self.h)
    }

    pub fn map(&self) -> Result<ConformableMap<Model>> {
        ConformableMap::new(self.model, self.coefficients()?)
    }

    /// Copy of this scenario with one parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut next = self.clone();
        let params = &mut next.model.params;
        match parameter {
            SweepParameter::Alpha(i) => next.orders = self.orders.with(i, value)?,
            SweepParameter::A => params.a = value,
            SweepParameter::B => params.b = value,
            SweepParameter::C => params.c = value,
            SweepParameter::D => params.d = value,
            SweepParameter::K => params.k = value,
            SweepParameter::P => params.p = value,
            SweepParameter::H => next.h = value,
        }
        next.model = Model::new(next.model.kind, next.model.params, next.dim())?;
        Scenario::new(next.model, next.orders, next.x0, next.h)
    }
}

/// How a bifurcation column is sampled at each grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationSettings {
    pub transient: usize,
    /// Successive post-transient values recorded per point.
    pub samples: usize,
    pub guard: f64,
}

impl Default for BifurcationSettings {
    fn default() -> Self {
        BifurcationSettings {
            transient: 10_000,
            samples: 200,
            guard: DEFAULT_GUARD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    pub base: Scenario,
    pub lyapunov: LyapunovSettings,
    pub bifurcation: BifurcationSettings,
    /// Worker-pool width; `None` uses rayon's default (all cores).
    pub workers: Option<usize>,
}

impl SweepPlan {
    /// A plan with default Lyapunov and bifurcation settings and 97 points.
    pub fn new(parameter: SweepParameter, lo: f64, hi: f64, base: Scenario) -> Self {
        SweepPlan {
            parameter,
            lo,
            hi,
            grid_points: 97,
            base,
            lyapunov: LyapunovSettings::default(),
            bifurcation: BifurcationSettings::default(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidPlan(format!(
                "range [{}, {}] must satisfy lo < hi",
                self.lo, self.hi
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidPlan("grid_points must be at least 2".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidPlan("workers must be at least 1".into()));
        }
        if let SweepParameter::Alpha(i) = self.parameter {
            if i >= self.base.dim() {
                return Err(Error::InvalidPlan(format!(
                    "{} does not exist for a {}-dimensional model",
                    self.parameter,
                    self.base.dim()
                )));
            }
        }
        self.lyapunov.validate()
    }

    /// Evenly spaced values including both endpoints.
    pub fn values(&self) -> Vec<f64> {
        let last = self.grid_points - 1;
        (0..self.grid_points)
            .map(|i| {
                if i == last {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last as f64
                }
            })
            .collect()
    }

    fn scenarios(&self) -> Result<Vec<(f64, Scenario)>> {
        self.validate()?;
        self.values()
            .into_iter()
            .map(|v| Ok((v, self.base.with_parameter(self.parameter, v)?)))
            .collect()
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub param_value: f64,
    pub spectrum: Option<LyapunovSpectrum>,
    pub regime: Option<Regime>,
    /// Bifurcation samples of the selected component.
    pub samples: Vec<f64>,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    /// Selected component for bifurcation scans.
    pub component: Option<usize>,
    pub records: Vec<SweepRecord>,
}

fn run_points<T, F>(workers: Option<usize>, items: Vec<(f64, Scenario)>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64, &Scenario) -> Result<T> + Sync + Send,
{
    let job = || {
        items
            .par_iter()
            .map(|(v, s)| f(*v, s))
            .collect::<Result<Vec<T>>>()
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidPlan(format!("worker pool: {e}")))?
            .install(job),
        None => job(),
    }
}

/// Spectrum and regime label at every grid point. Divergent points are
/// recorded, never fatal.
pub fn spectrum_scan(plan: &SweepPlan) -> Result<SweepResult> {
    let points = plan.scenarios()?;
    let settings = plan.lyapunov;
    let records = run_points(plan.workers, points, |value, scenario| {
        let map = scenario.map()?;
        let spectrum = lyapunov_spectrum(&map, &scenario.x0, &settings)?;
        let regime = classify_regime(&spectrum, settings.eps_positive);
        Ok(SweepRecord {
            param_value: value,
            diverged: spectrum.diverged(),
            spectrum: Some(spectrum),
            regime: Some(regime),
            samples: Vec::new(),
        })
    })?;
    Ok(SweepResult {
        parameter: plan.parameter,
        component: None,
        records,
    })
}

/// Post-transient orbit values of `component`, truncated on divergence.
pub fn bifurcation_samples(
    scenario: &Scenario,
    component: usize,
    settings: &BifurcationSettings,
) -> Result<(Vec<f64>, bool)> {
    if component >= scenario.dim() {
        return Err(Error::DimensionMismatch {
            what: "component index",
            expected: scenario.dim(),
            got: component + 1,
        });
    }
    let coeffs = scenario.coefficients()?;
    let mut state = scenario.x0.clone();
    let mut next = vec![0.0; state.len()];
    let mut samples = Vec::with_capacity(settings.samples);
    for i in 0..settings.transient + settings.samples {
        euler_step_into(&scenario.model, coeffs.as_slice(), &state, &mut next);
        if escaped(&next, settings.guard) {
            return Ok((samples, true));
        }
        std::mem::swap(&mut state, &mut next);
        if i >= settings.transient {
            samples.push(state[component]);
        }
    }
    Ok((samples, false))
}

/// Bifurcation column of `component` at every grid point.
pub fn bifurcation_scan(plan: &SweepPlan, component: usize) -> Result<SweepResult> {
    let points = plan.scenarios()?;
    let settings = plan.bifurcation;
    let records = run_points(plan.workers, points, |value, scenario| {
        let (samples, diverged) = bifurcation_samples(scenario, component, &settings)?;
        Ok(SweepRecord {
            param_value: value,
            spectrum: None,
            regime: diverged.then_some(Regime::Divergent),
            samples,
            diverged,
        })
    })?;
    Ok(SweepResult {
        parameter: plan.parameter,
        component: Some(component),
        records,
    })
}

/// Post-transient orbit projected onto three components.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorTrace {
    pub projection: [usize; 3],
    pub points: Vec<[f64; 3]>,
    pub max_norm: f64,
    /// Step at which the orbit escaped the guard, if it did.
    pub diverged_at: Option<usize>,
}

impl AttractorTrace {
    /// `max - min` along each projected axis.
    pub fn extent(&self) -> [f64; 3] {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]]
    }
}

/// Iterates `n_steps` from the scenario's initial state and keeps steps
/// `transient + 1 ..= n_steps`, so `n_steps - transient` points on success.
/// `max_norm` is the largest full-state norm among the kept points.
pub fn attractor_trace(
    scenario: &Scenario,
    n_steps: usize,
    transient: usize,
    projection: [usize; 3],
    guard: f64,
) -> Result<AttractorTrace> {
    if transient >= n_steps {
        return Err(Error::InvalidPlan(format!(
            "transient {transient} must be smaller than the step count {n_steps}"
        )));
    }
    if let Some(&bad) = projection.iter().find(|&&c| c >= scenario.dim()) {
        return Err(Error::DimensionMismatch {
            what: "projection component",
            expected: scenario.dim(),
            got: bad + 1,
        });
    }
    let coeffs = scenario.coefficients()?;
    let mut state = scenario.x0.clone();
    let mut next = vec![0.0; state.len()];
    let mut points = Vec::with_capacity(n_steps - transient);
    let mut max_norm = 0.0_f64;
    let mut diverged_at = None;
    for step in 1..=n_steps {
        euler_step_into(&scenario.model, coeffs.as_slice(), &state, &mut next);
        if escaped(&next, guard) {
            diverged_at = Some(step);
            break;
        }
        std::mem::swap(&mut state, &mut next);
        if step > transient {
            max_norm = max_norm.max(state.iter().map(|v| v * v).sum::<f64>().sqrt());
            points.push(projection.map(|c| state[c]));
        }
    }
    Ok(AttractorTrace {
        projection,
        points,
        max_norm,
        diverged_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn parameter_names_roundtrip() {
        for name in ["alpha1", "alpha5", "a", "b", "c", "d", "k", "p", "h"] {
            assert_eq!(name.parse::<SweepParameter>().unwrap().to_string(), name);
        }
        assert!("alpha0".parse::<SweepParameter>().is_err());
        assert!("alpha6".parse::<SweepParameter>().is_err());
        assert!("m1".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn grid_values_include_endpoints() {
        let base = Scenario::baseline(0.24, 2.0, 1.0).unwrap();
        let mut plan = SweepPlan::new(SweepParameter::Alpha(4), 0.232, 0.328, base);
        plan.grid_points = 13;
        let v = plan.values();
        assert_eq!(v.len(), 13);
        assert_eq!(v[0], 0.232);
        assert_eq!(v[12], 0.328);
        assert!((v[1] - 0.240).abs() < 1e-15);
    }

    #[test]
    fn plan_validation() {
        let base = Scenario::baseline(0.24, 2.0, 1.0).unwrap();
        let mut plan = SweepPlan::new(SweepParameter::P, 2.0, 1.0, base.clone());
        assert!(plan.validate().is_err());
        plan.lo = 1.0;
        plan.hi = 2.0;
        plan.grid_points = 1;
        assert!(plan.validate().is_err());
        plan.grid_points = 2;
        assert!(plan.validate().is_ok());
        plan.workers = Some(0);
        assert!(plan.validate().is_err());

        // alpha leaves (0, 1] inside the range
        let plan = SweepPlan::new(SweepParameter::Alpha(0), 0.5, 1.5, base);
        assert!(spectrum_scan(&plan).is_err());
    }

    #[test]
    fn with_parameter_touches_only_target() {
        let base = Scenario::baseline(0.24, 2.0, 1.0).unwrap();
        let s = base.with_parameter(SweepParameter::K, 1.5).unwrap();
        assert_eq!(s.model.params.k, 1.5);
        assert_eq!(s.model.params.p, base.model.params.p);
        assert_eq!(s.orders, base.orders);
        let s = base.with_parameter(SweepParameter::H, 0.001).unwrap();
        assert_eq!(s.h, 0.001);
        assert!(base.with_parameter(SweepParameter::H, -0.001).is_err());
        assert!(base.with_parameter(SweepParameter::A, -1.0).is_err());
        let s = base.with_parameter(SweepParameter::Alpha(4), 0.3).unwrap();
        assert_eq!(s.orders.as_slice()[4], 0.3);
    }

    #[test]
    fn fixed_point_collapses() {
        let model = Model::new(ModelKind::Zero, FinanceParams::default(), 3).unwrap();
        let scenario = Scenario::new(model, OrderVector::new(vec![0.5; 3]).unwrap(), vec![1.0, -2.0, 0.5], 0.01).unwrap();
        let trace = attractor_trace(&scenario, 50, 10, [0, 1, 2], DEFAULT_GUARD).unwrap();
        assert_eq!(trace.points.len(), 40);
        assert!(trace.points.iter().all(|p| *p == [1.0, -2.0, 0.5]));
        assert_eq!(trace.extent(), [0.0; 3]);

        let settings = BifurcationSettings { transient: 5, samples: 20, ..Default::default() };
        let (samples, diverged) = bifurcation_samples(&scenario, 1, &settings).unwrap();
        assert!(!diverged);
        assert_eq!(samples, vec![-2.0; 20]);
    }

    #[test]
    fn attractor_argument_checks() {
        let base = Scenario::baseline(0.24, 2.0, 1.0).unwrap();
        assert!(attractor_trace(&base, 10, 10, [0, 1, 2], DEFAULT_GUARD).is_err());
        assert!(attractor_trace(&base, 10, 0, [0, 1, 5], DEFAULT_GUARD).is_err());
        assert!(bifurcation_samples(&base, 5, &BifurcationSettings::default()).is_err());
    }

    #[test]
    fn components() {
        assert_eq!(component_index("u"), Some(4));
        assert_eq!(component_index("x"), Some(0));
        assert_eq!(component_index("q"), None);
    }
}
