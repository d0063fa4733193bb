//! Conformable calculus primitives and the piecewise-constant (conformable
//! Euler) integrator.
//!
//! Freezing the right-hand side at `x(nh)` on every subinterval
//! `[nh, (n+1)h)` makes `dx/dt = (t - nh)^(alpha - 1) f(x(nh))` exactly
//! integrable, which yields the explicit update
//!
//! ```text
//! x_{n+1} = x_n + h^alpha / alpha * f(x_n)
//! ```
//!
//! applied componentwise with one order per state dimension.

use crate::error::{Error, Result};

/// Default state-norm bound past which an orbit is considered divergent.
pub const DEFAULT_GUARD: f64 = 1e8;

/// Default step for the limit-definition finite difference.
pub const DEFAULT_FD_EPS: f64 = 1e-6;

fn check_alpha(name: &'static str, alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(name, alpha, "order must lie in (0, 1]"))
    }
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("h", h, "step size must be positive and finite"))
    }
}

/// Per-dimension fractional orders, each in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderVector(Vec<f64>);

impl OrderVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "order vector",
                expected: 1,
                got: 0,
            });
        }
        for &a in &alphas {
            check_alpha("alpha", a)?;
        }
        Ok(OrderVector(alphas))
    }

    /// All orders equal to one: the classical integer-order system.
    pub fn classical(dim: usize) -> Self {
        OrderVector(vec![1.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replace one order, re-validating it.
    pub fn with(&self, index: usize, alpha: f64) -> Result<Self> {
        check_alpha("alpha", alpha)?;
        if index >= self.0.len() {
            return Err(Error::DimensionMismatch {
                what: "order index",
                expected: self.0.len(),
                got: index + 1,
            });
        }
        let mut v = self.0.clone();
        v[index] = alpha;
        Ok(OrderVector(v))
    }
}

/// Uniform time grid starting at `t0 = 0` with horizon `T = n_steps * h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub n_steps: usize,
}

impl GridSpec {
    pub fn new(h: f64, n_steps: usize) -> Result<Self> {
        check_step(h)?;
        if n_steps == 0 {
            return Err(Error::domain("n_steps", 0.0, "need at least one step"));
        }
        Ok(GridSpec { h, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.h
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.h
    }
}

/// `h^alpha / alpha`, the increment weight of the conformable Euler step.
pub fn step_coefficient(alpha: f64, h: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    check_step(h)?;
    if alpha == 1.0 {
        // keep the classical case exact regardless of libm's powf
        return Ok(h);
    }
    Ok(h.powf(alpha) / alpha)
}

/// Componentwise weights `h^alpha_i / alpha_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCoefficients(Vec<f64>);

impl StepCoefficients {
    pub fn new(orders: &OrderVector, h: f64) -> Result<Self> {
        orders
            .as_slice()
            .iter()
            .map(|&a| step_coefficient(a, h))
            .collect::<Result<Vec<_>>>()
            .map(StepCoefficients)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Autonomous right-hand side `f: R^n -> R^n`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(state)` into `out`. Both slices have length `dim()`.
    fn eval(&self, state: &[f64], out: &mut [f64]);
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        (**self).eval(state, out)
    }
}

/// Adapts a closure into a [`VectorField`] of fixed dimension.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        (self.f)(state, out)
    }
}

fn check_dims(field: usize, state: usize, coeffs: usize) -> Result<()> {
    if state != field {
        return Err(Error::DimensionMismatch {
            what: "state vs field",
            expected: field,
            got: state,
        });
    }
    if coeffs != field {
        return Err(Error::DimensionMismatch {
            what: "coefficients vs field",
            expected: field,
            got: coeffs,
        });
    }
    Ok(())
}

/// One explicit conformable Euler step `x_n + coeffs * f(x_n)`.
pub fn euler_step<F: VectorField>(
    field: &F,
    x_n: &[f64],
    coeffs: &StepCoefficients,
) -> Result<Vec<f64>> {
    check_dims(field.dim(), x_n.len(), coeffs.len())?;
    let mut f = vec![0.0; x_n.len()];
    field.eval(x_n, &mut f);
    if let Some(component) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { component });
    }
    Ok(x_n
        .iter()
        .zip(coeffs.as_slice())
        .zip(&f)
        .map(|((x, c), fx)| x + c * fx)
        .collect())
}

/// Allocation-free step used by the iteration loops. `out` receives the new
/// state; no finiteness check is performed.
#[inline]
pub(crate) fn euler_step_into<F: VectorField>(
    field: &F,
    coeffs: &[f64],
    x_n: &[f64],
    out: &mut [f64],
) {
    field.eval(x_n, out);
    for ((o, x), c) in out.iter_mut().zip(x_n).zip(coeffs) {
        *o = x + c * *o;
    }
}

/// True when the state has escaped: a non-finite component or a Euclidean
/// norm above `guard`.
#[inline]
pub fn escaped(state: &[f64], guard: f64) -> bool {
    let mut sq = 0.0;
    for v in state {
        if !v.is_finite() {
            return true;
        }
        sq += v * v;
    }
    !(sq.sqrt() <= guard)
}

/// Orbit `x_0 .. x_N` of the conformable Euler map.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    h: f64,
    states: Vec<f64>,
    diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Number of recorded states, including `x_0`.
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, step: usize) -> &[f64] {
        &self.states[step * self.dim..(step + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    /// Index of the first step whose state escaped the guard. The trajectory
    /// holds every state before it.
    pub fn diverged_at(&self) -> Option<usize> {
        self.diverged_at
    }

    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Repeats [`euler_step`] `grid.n_steps` times from `x0`.
///
/// Divergence is data: when a state turns non-finite or its norm exceeds
/// `guard` the orbit is truncated before that state and the index recorded.
pub fn integrate<F: VectorField>(
    field: &F,
    x0: &[f64],
    orders: &OrderVector,
    grid: &GridSpec,
    guard: f64,
) -> Result<Trajectory> {
    let dim = field.dim();
    check_dims(dim, x0.len(), orders.len())?;
    if !(guard > 0.0) {
        return Err(Error::domain("guard", guard, "must be positive"));
    }
    let coeffs = StepCoefficients::new(orders, grid.h)?;
    let mut states = Vec::with_capacity((grid.n_steps + 1) * dim);
    states.extend_from_slice(x0);
    let mut diverged_at = escaped(x0, guard).then_some(0);
    if diverged_at.is_some() {
        states.clear();
    }
    let mut next = vec![0.0; dim];
    if diverged_at.is_none() {
        for step in 1..=grid.n_steps {
            let prev = &states[(step - 1) * dim..step * dim];
            euler_step_into(field, coeffs.as_slice(), prev, &mut next);
            if escaped(&next, guard) {
                diverged_at = Some(step);
                break;
            }
            states.extend_from_slice(&next);
        }
    }
    Ok(Trajectory {
        dim,
        h: grid.h,
        states,
        diverged_at,
    })
}

/// Limit-definition estimate of the left conformable derivative,
/// `(f(t + eps (t - t0)^(1 - alpha)) - f(t)) / eps`.
pub fn conformable_derivative_at<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    t0: f64,
    alpha: f64,
    eps: f64,
) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    if !(t > t0) {
        return Err(Error::domain("t", t, "must exceed the base point t0"));
    }
    if !(eps > 0.0) {
        return Err(Error::domain("eps", eps, "must be positive"));
    }
    let shift = (t - t0).powf(1.0 - alpha);
    Ok((f(t + eps * shift) - f(t)) / eps)
}

/// Richardson-refined variant: `2 D(eps/2) - D(eps)` cancels the leading
/// O(eps) error of the one-sided difference.
pub fn conformable_derivative_refined<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    t0: f64,
    alpha: f64,
    eps: f64,
) -> Result<f64> {
    let coarse = conformable_derivative_at(&f, t, t0, alpha, eps)?;
    let fine = conformable_derivative_at(&f, t, t0, alpha, 0.5 * eps)?;
    Ok(2.0 * fine - coarse)
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Left conformable integral `int_{t0}^{t} (s - t0)^(alpha - 1) f(s) ds`.
///
/// Substituting `v = (s - t0)^alpha` turns it into
/// `(1/alpha) int_0^{(t - t0)^alpha} f(t0 + v^(1/alpha)) dv`, which has a
/// bounded integrand; that is evaluated with `n_quad` panels of 5-point
/// Gauss-Legendre.
pub fn conformable_integral<F: Fn(f64) -> f64>(
    f: F,
    t0: f64,
    t: f64,
    alpha: f64,
    n_quad: usize,
) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    if !(t > t0) {
        return Err(Error::domain("t", t, "must exceed the base point t0"));
    }
    if n_quad == 0 {
        return Err(Error::domain("n_quad", 0.0, "need at least one panel"));
    }
    let upper = (t - t0).powf(alpha);
    let inv_alpha = 1.0 / alpha;
    let width = upper / n_quad as f64;
    let mut total = 0.0;
    for panel in 0..n_quad {
        let mid = (panel as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for (node, weight) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            let v = mid + half * node;
            acc += weight * f(t0 + v.powf(inv_alpha));
        }
        total += acc * half;
    }
    Ok(total * inv_alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_examples() {
        assert_eq!(step_coefficient(1.0, 0.002).unwrap(), 0.002);
        assert!((step_coefficient(0.5, 0.01).unwrap() - 0.2).abs() < 1e-15);
        // exp(0.3 ln 0.002) / 0.3, evaluated at 30 digits with mpmath
        let expected = 0.516_639_662_516_112_4;
        let got = step_coefficient(0.3, 0.002).unwrap();
        assert!((got - expected).abs() < 1e-14, "{got}");
    }

    #[test]
    fn coefficient_rejects_bad_domain() {
        assert!(step_coefficient(0.0, 0.1).is_err());
        assert!(step_coefficient(1.2, 0.1).is_err());
        assert!(step_coefficient(f64::NAN, 0.1).is_err());
        assert!(step_coefficient(0.5, 0.0).is_err());
        assert!(step_coefficient(0.5, -1.0).is_err());
    }

    #[test]
    fn order_vector_validation() {
        assert!(OrderVector::new(vec![0.3, 1.0]).is_ok());
        assert!(OrderVector::new(vec![0.3, 0.0]).is_err());
        assert!(OrderVector::new(vec![]).is_err());
        let o = OrderVector::new(vec![0.3, 0.5]).unwrap();
        assert_eq!(o.with(1, 0.7).unwrap().as_slice(), &[0.3, 0.7]);
        assert!(o.with(2, 0.7).is_err());
        assert!(o.with(0, 1.5).is_err());
    }

    #[test]
    fn zero_field_step_is_identity() {
        let zero = FnField::new(3, |_: &[f64], out: &mut [f64]| out.fill(0.0));
        let c = StepCoefficients::new(&OrderVector::new(vec![0.3, 0.5, 0.9]).unwrap(), 0.1)
            .unwrap();
        let x = [1.5, -2.0, 3.25];
        assert_eq!(euler_step(&zero, &x, &c).unwrap(), x.to_vec());
    }

    #[test]
    fn constant_field_classical_step() {
        let field = FnField::new(1, |_: &[f64], out: &mut [f64]| out[0] = 7.0);
        let c = StepCoefficients::new(&OrderVector::classical(1), 0.1).unwrap();
        assert_eq!(euler_step(&field, &[0.0], &c).unwrap(), vec![0.1 * 7.0]);
    }

    #[test]
    fn euler_step_errors() {
        let field = FnField::new(2, |_: &[f64], out: &mut [f64]| out.fill(1.0));
        let c2 = StepCoefficients::new(&OrderVector::classical(2), 0.1).unwrap();
        let c3 = StepCoefficients::new(&OrderVector::classical(3), 0.1).unwrap();
        assert!(matches!(
            euler_step(&field, &[0.0], &c2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            euler_step(&field, &[0.0, 0.0], &c3),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = FnField::new(2, |_: &[f64], out: &mut [f64]| {
            out[0] = 0.0;
            out[1] = f64::INFINITY;
        });
        assert_eq!(
            euler_step(&bad, &[0.0, 0.0], &c2),
            Err(Error::NonFinite { component: 1 })
        );
    }

    #[test]
    fn classical_decay_single_step() {
        let field = FnField::new(1, |s: &[f64], out: &mut [f64]| out[0] = -s[0]);
        let traj = integrate(
            &field,
            &[1.0],
            &OrderVector::classical(1),
            &GridSpec::new(0.1, 1).unwrap(),
            DEFAULT_GUARD,
        )
        .unwrap();
        assert_eq!(traj.len(), 2);
        assert!((traj.last()[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn blow_up_is_flagged() {
        let field = FnField::new(1, |s: &[f64], out: &mut [f64]| out[0] = s[0] * s[0]);
        let traj = integrate(
            &field,
            &[2.0],
            &OrderVector::classical(1),
            &GridSpec::new(1.0, 50).unwrap(),
            1e6,
        )
        .unwrap();
        // 2, 6, 42, 1806, 3263442 > 1e6
        assert_eq!(traj.diverged_at(), Some(4));
        assert_eq!(traj.len(), 4);
        assert_eq!(traj.last(), &[1806.0]);
    }

    #[test]
    fn grid_spec() {
        let g = GridSpec::new(0.002, 1000).unwrap();
        assert!((g.horizon() - 2.0).abs() < 1e-12);
        assert!(GridSpec::new(0.0, 10).is_err());
        assert!(GridSpec::new(0.1, 0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let id = |t: f64| t;
        let d = conformable_derivative_at(id, 3.0, 0.0, 1.0, DEFAULT_FD_EPS).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
        let d = conformable_derivative_at(id, 4.0, 0.0, 0.5, DEFAULT_FD_EPS).unwrap();
        assert!((d - 2.0).abs() < 1e-6);
        let d = conformable_derivative_at(|_| 5.0, 2.0, 0.0, 0.4, DEFAULT_FD_EPS).unwrap();
        assert_eq!(d, 0.0);
        assert!(conformable_derivative_at(id, 0.0, 0.0, 0.5, 1e-6).is_err());
        assert!(conformable_derivative_at(id, 1.0, 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn integral_examples() {
        for &alpha in &[0.2, 0.5, 0.9] {
            let got = conformable_integral(|_| 1.0, 0.0, 3.0, alpha, 8).unwrap();
            let exact = 3.0_f64.powf(alpha) / alpha;
            assert!((got - exact).abs() < 1e-12 * exact);
        }
        assert_eq!(conformable_integral(|_| 0.0, 0.0, 2.0, 0.3, 4).unwrap(), 0.0);
        let got = conformable_integral(|s| s, 0.0, 2.0, 1.0, 4).unwrap();
        assert!((got - 2.0).abs() < 1e-13);
        assert!(conformable_integral(|s| s, 2.0, 2.0, 0.5, 4).is_err());
        assert!(conformable_integral(|s| s, 0.0, 2.0, 0.5, 0).is_err());
    }

    #[test]
    fn integral_with_shifted_base() {
        // int_1^3 (s-1)^(-1/2) s ds = [2/3 v^3 + 2 v]_{v=0}^{sqrt 2}
        let v = 2.0_f64.sqrt();
        let exact = 2.0 / 3.0 * v.powi(3) + 2.0 * v;
        let got = conformable_integral(|s| s, 1.0, 3.0, 0.5, 16).unwrap();
        assert!((got - exact).abs() < 1e-12);
    }
}
