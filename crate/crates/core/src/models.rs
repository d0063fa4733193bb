//! Financial vector fields with market confidence and ethics risk, their
//! conformable discretizations, and analytic Jacobians.
//!
//! State components are `x` (interest rate), `y` (investment demand),
//! `z` (price index), `w` (market confidence) and `u` (ethics risk).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::conformable::{euler_step_into, StepCoefficients, VectorField};
use crate::error::{Error, Result};
use crate::lyapunov::TangentMap;

/// Model constants. `m1..m3` only enter the 4D system; `d`, `k`, `p` only
/// the 5D one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinanceParams {
    /// Saving amount.
    pub a: f64,
    /// Cost per investment.
    pub b: f64,
    /// Demand elasticity of commercial markets.
    pub c: f64,
    pub d: f64,
    pub k: f64,
    pub p: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl Default for FinanceParams {
    /// The hyperchaos-detection baseline: a=0.8, b=0.6, c=1, d=2, k=2, p=1.
    fn default() -> Self {
        FinanceParams {
            a: 0.8,
            b: 0.6,
            c: 1.0,
            d: 2.0,
            k: 2.0,
            p: 1.0,
            m1: 0.0,
            m2: 0.0,
            m3: 0.0,
        }
    }
}

impl FinanceParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(name, v, "must be finite and non-negative"));
            }
        }
        for (name, v) in [
            ("d", self.d),
            ("k", self.k),
            ("p", self.p),
            ("m1", self.m1),
            ("m2", self.m2),
            ("m3", self.m3),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(name, v, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Basic interest-rate / investment / price-index system.
pub fn field_3d(s: &[f64], p: &FinanceParams) -> [f64; 3] {
    let (x, y, z) = (s[0], s[1], s[2]);
    [z + (y - p.a) * x, 1.0 - p.b * y - x * x, -x - p.c * z]
}

/// Adds market confidence `w` with impact factors `m1..m3`.
pub fn field_4d(s: &[f64], p: &FinanceParams) -> [f64; 4] {
    let (x, y, z, w) = (s[0], s[1], s[2], s[3]);
    [
        z + (y - p.a) * x + p.m1 * w,
        1.0 - p.b * y - x * x + p.m2 * w,
        -x - p.c * z + p.m3 * w,
        -x * y * z,
    ]
}

/// The confidence/ethics-risk coupling `k (w - p u)` shared by four rows of
/// the 5D system.
#[inline]
pub fn ethics_coupling(w: f64, u: f64, p: &FinanceParams) -> f64 {
    p.k * (w - p.p * u)
}

/// Adds ethics risk `u`, offsetting confidence through `k (w - p u)`.
pub fn field_5d(s: &[f64], p: &FinanceParams) -> [f64; 5] {
    let (x, y, z, w, u) = (s[0], s[1], s[2], s[3], s[4]);
    let g = ethics_coupling(w, u, p);
    [
        z + (y - p.a) * x + g,
        1.0 - p.b * y - x * x + g,
        -x - p.c * z + g,
        -p.d * x * y * z,
        g,
    ]
}

pub fn jacobian_3d(s: &[f64], p: &FinanceParams) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(3, 3);
    fill_jacobian_3d(s, p, &mut m);
    m
}

fn fill_jacobian_3d(s: &[f64], p: &FinanceParams, m: &mut DMatrix<f64>) {
    let (x, y) = (s[0], s[1]);
    #[rustfmt::skip]
    let rows = [
        [y - p.a,  x,    1.0 ],
        [-2.0 * x, -p.b, 0.0 ],
        [-1.0,     0.0,  -p.c],
    ];
    copy_rows(&rows, m);
}

pub fn jacobian_4d(s: &[f64], p: &FinanceParams) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    fill_jacobian_4d(s, p, &mut m);
    m
}

fn fill_jacobian_4d(s: &[f64], p: &FinanceParams, m: &mut DMatrix<f64>) {
    let (x, y, z) = (s[0], s[1], s[2]);
    #[rustfmt::skip]
    let rows = [
        [y - p.a,  x,      1.0,    p.m1],
        [-2.0 * x, -p.b,   0.0,    p.m2],
        [-1.0,     0.0,    -p.c,   p.m3],
        [-y * z,   -x * z, -x * y, 0.0 ],
    ];
    copy_rows(&rows, m);
}

pub fn jacobian_5d(s: &[f64], p: &FinanceParams) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(5, 5);
    fill_jacobian_5d(s, p, &mut m);
    m
}

fn fill_jacobian_5d(s: &[f64], p: &FinanceParams, m: &mut DMatrix<f64>) {
    let (x, y, z) = (s[0], s[1], s[2]);
    let (k, kp, d) = (p.k, p.k * p.p, p.d);
    #[rustfmt::skip]
    let rows = [
        [y - p.a,    x,          1.0,        k,   -kp],
        [-2.0 * x,   -p.b,       0.0,        k,   -kp],
        [-1.0,       0.0,        -p.c,       k,   -kp],
        [-d * y * z, -d * x * z, -d * x * y, 0.0, 0.0],
        [0.0,        0.0,        0.0,        k,   -kp],
    ];
    copy_rows(&rows, m);
}

fn copy_rows<const N: usize>(rows: &[[f64; N]; N], m: &mut DMatrix<f64>) {
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
}

/// One step of the discretized 5D system: `s + coeffs * field_5d(s)`.
pub fn discrete_map_5d(s: &[f64], p: &FinanceParams, coeffs: &StepCoefficients) -> Result<[f64; 5]> {
    if s.len() != 5 || coeffs.len() != 5 {
        return Err(Error::DimensionMismatch {
            what: "5D map input",
            expected: 5,
            got: if s.len() != 5 { s.len() } else { coeffs.len() },
        });
    }
    let f = field_5d(s, p);
    let c = coeffs.as_slice();
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = s[i] + c[i] * f[i];
    }
    if let Some(component) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { component });
    }
    Ok(out)
}

/// Tangent map of the discretized 5D system: `I + diag(coeffs) J_f(s)`.
pub fn map_jacobian_5d(s: &[f64], p: &FinanceParams, coeffs: &StepCoefficients) -> DMatrix<f64> {
    let mut m = jacobian_5d(s, p);
    scale_rows_add_identity(&mut m, coeffs.as_slice());
    m
}

fn scale_rows_add_identity(m: &mut DMatrix<f64>, coeffs: &[f64]) {
    for (i, c) in coeffs.iter().enumerate() {
        m.row_mut(i).scale_mut(*c);
        m[(i, i)] += 1.0;
    }
}

/// A vector field that can also report its Jacobian.
pub trait JacobianField: VectorField {
    /// Writes `Df(state)` into `out`, a `dim x dim` matrix.
    fn jacobian_into(&self, state: &[f64], out: &mut DMatrix<f64>);
}

/// Which system a [`Model`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Finance3d,
    Finance4d,
    Finance5d,
    /// `f = 0` in any dimension. Every state is a fixed point and the
    /// discrete map is the identity.
    Zero,
}

impl ModelKind {
    /// State dimension, or `None` for the dimension-agnostic zero field.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            ModelKind::Finance3d => Some(3),
            ModelKind::Finance4d => Some(4),
            ModelKind::Finance5d => Some(5),
            ModelKind::Zero => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Finance3d => "3d",
            ModelKind::Finance4d => "4d",
            ModelKind::Finance5d => "5d",
            ModelKind::Zero => "zero",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3d" => Ok(ModelKind::Finance3d),
            "4d" => Ok(ModelKind::Finance4d),
            "5d" => Ok(ModelKind::Finance5d),
            "zero" => Ok(ModelKind::Zero),
            other => Err(Error::InvalidPlan(format!("unknown model `{other}`"))),
        }
    }
}

/// Runtime-selected vector field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub params: FinanceParams,
    dim: usize,
}

impl Model {
    /// `dim` is only consulted for [`ModelKind::Zero`].
    pub fn new(kind: ModelKind, params: FinanceParams, dim: usize) -> Result<Self> {
        params.validate()?;
        let dim = kind.fixed_dim().unwrap_or(dim);
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                what: "model dimension",
                expected: 1,
                got: 0,
            });
        }
        Ok(Model { kind, params, dim })
    }

    pub fn finance_5d(params: FinanceParams) -> Result<Self> {
        Model::new(ModelKind::Finance5d, params, 5)
    }
}

impl VectorField for Model {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, s: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::Finance3d => out.copy_from_slice(&field_3d(s, &self.params)),
            ModelKind::Finance4d => out.copy_from_slice(&field_4d(s, &self.params)),
            ModelKind::Finance5d => out.copy_from_slice(&field_5d(s, &self.params)),
            ModelKind::Zero => out.fill(0.0),
        }
    }
}

impl JacobianField for Model {
    fn jacobian_into(&self, s: &[f64], out: &mut DMatrix<f64>) {
        match self.kind {
            ModelKind::Finance3d => fill_jacobian_3d(s, &self.params, out),
            ModelKind::Finance4d => fill_jacobian_4d(s, &self.params, out),
            ModelKind::Finance5d => fill_jacobian_5d(s, &self.params, out),
            ModelKind::Zero => out.fill(0.0),
        }
    }
}

/// The conformable Euler map `s -> s + coeffs * f(s)` of a vector field.
#[derive(Debug, Clone)]
pub struct ConformableMap<F> {
    field: F,
    coeffs: StepCoefficients,
}

impl<F: VectorField> ConformableMap<F> {
    pub fn new(field: F, coeffs: StepCoefficients) -> Result<Self> {
        if coeffs.len() != field.dim() {
            return Err(Error::DimensionMismatch {
                what: "coefficients vs field",
                expected: field.dim(),
                got: coeffs.len(),
            });
        }
        Ok(ConformableMap { field, coeffs })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn coeffs(&self) -> &StepCoefficients {
        &self.coeffs
    }
}

impl<F: JacobianField> TangentMap for ConformableMap<F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn apply(&self, state: &[f64], out: &mut [f64]) {
        euler_step_into(&self.field, self.coeffs.as_slice(), state, out);
    }

    fn jacobian_into(&self, state: &[f64], out: &mut DMatrix<f64>) {
        self.field.jacobian_into(state, out);
        scale_rows_add_identity(out, self.coeffs.as_slice());
    }
}
