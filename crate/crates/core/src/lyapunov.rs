//! Lyapunov spectra of discrete maps by tangent-frame propagation with
//! periodic Gram-Schmidt re-orthonormalization, and regime labels derived
//! from the spectrum.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::conformable::{escaped, DEFAULT_GUARD};
use crate::error::{Error, Result};

/// A map together with its Jacobian, both evaluated at the same state.
pub trait TangentMap {
    fn dim(&self) -> usize;

    fn apply(&self, state: &[f64], out: &mut [f64]);

    /// Writes the `dim x dim` Jacobian at `state` into `out`.
    fn jacobian_into(&self, state: &[f64], out: &mut DMatrix<f64>);
}

impl<T: TangentMap + ?Sized> TangentMap for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, state: &[f64], out: &mut [f64]) {
        (**self).apply(state, out)
    }

    fn jacobian_into(&self, state: &[f64], out: &mut DMatrix<f64>) {
        (**self).jacobian_into(state, out)
    }
}

/// Closure-backed [`TangentMap`].
pub struct FnMap<A, J> {
    dim: usize,
    apply: A,
    jacobian: J,
}

impl<A, J> FnMap<A, J>
where
    A: Fn(&[f64], &mut [f64]),
    J: Fn(&[f64], &mut DMatrix<f64>),
{
    pub fn new(dim: usize, apply: A, jacobian: J) -> Self {
        FnMap {
            dim,
            apply,
            jacobian,
        }
    }
}

impl<A, J> TangentMap for FnMap<A, J>
where
    A: Fn(&[f64], &mut [f64]),
    J: Fn(&[f64], &mut DMatrix<f64>),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, state: &[f64], out: &mut [f64]) {
        (self.apply)(state, out)
    }

    fn jacobian_into(&self, state: &[f64], out: &mut DMatrix<f64>) {
        (self.jacobian)(state, out)
    }
}

/// Fraction of the run whose running estimates decide convergence.
const TAIL_FRACTION: usize = 10;
const TAIL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSettings {
    /// Map iterations discarded before the tangent frame starts.
    pub transient: usize,
    pub iterations: usize,
    pub reorth_every: usize,
    /// Threshold separating positive exponents from zero.
    pub eps_positive: f64,
    pub guard: f64,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        LyapunovSettings {
            transient: 10_000,
            iterations: 200_000,
            reorth_every: 1,
            eps_positive: 0.01,
            guard: DEFAULT_GUARD,
        }
    }
}

impl LyapunovSettings {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::domain("iterations", 0.0, "need at least one iteration"));
        }
        if self.reorth_every == 0 {
            return Err(Error::domain("reorth_every", 0.0, "must be at least 1"));
        }
        if !(self.eps_positive > 0.0) {
            return Err(Error::domain("eps", self.eps_positive, "must be positive"));
        }
        if !(self.guard > 0.0) {
            return Err(Error::domain("guard", self.guard, "must be positive"));
        }
        Ok(())
    }
}

/// Exponents in nats per map iteration, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpectrum {
    pub exponents: Vec<f64>,
    pub n_iterations: usize,
    pub transient_skipped: usize,
    /// Running estimates over the last tenth of the run moved by less than
    /// `1e-3` per exponent.
    pub converged: bool,
    /// A stretch factor collapsed to zero; the matching exponent is `-inf`.
    pub degenerate: bool,
    /// Total map iterations (transient included) after which the orbit
    /// escaped the guard. Exponents are NaN in that case.
    pub diverged_at: Option<usize>,
}

impl LyapunovSpectrum {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    fn divergent(dim: usize, settings: &LyapunovSettings, at: usize) -> Self {
        LyapunovSpectrum {
            exponents: vec![f64::NAN; dim],
            n_iterations: settings.iterations,
            transient_skipped: settings.transient,
            converged: false,
            degenerate: false,
            diverged_at: Some(at),
        }
    }
}

/// Modified Gram-Schmidt on the columns of `q` (column-major, `n x n`).
/// Adds `ln ||column||` to `acc` and returns false if a column collapsed.
fn orthonormalize(q: &mut DMatrix<f64>, acc: &mut [f64]) -> bool {
    let n = q.nrows();
    let data = q.as_mut_slice();
    let mut ok = true;
    for j in 0..n {
        for i in 0..j {
            let (head, tail) = data.split_at_mut(j * n);
            let qi = &head[i * n..(i + 1) * n];
            let qj = &mut tail[..n];
            let r: f64 = qi.iter().zip(qj.iter()).map(|(a, b)| a * b).sum();
            for (b, a) in qj.iter_mut().zip(qi) {
                *b -= r * a;
            }
        }
        let col = &mut data[j * n..(j + 1) * n];
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            acc[j] += norm.ln();
            let inv = 1.0 / norm;
            col.iter_mut().for_each(|v| *v *= inv);
        } else {
            acc[j] = f64::NEG_INFINITY;
            col.fill(0.0);
            ok = false;
        }
    }
    ok
}

/// Full Lyapunov spectrum of `map` started at `x0`.
///
/// The orbit first runs `transient` iterations. Then the standard basis is
/// carried along by the Jacobian for `iterations` steps and re-orthonormalized
/// every `reorth_every` steps (and after the last one); exponent `i` is the
/// accumulated `ln R_ii` divided by `iterations`.
pub fn lyapunov_spectrum<M: TangentMap>(
    map: &M,
    x0: &[f64],
    settings: &LyapunovSettings,
) -> Result<LyapunovSpectrum> {
    settings.validate()?;
    let n = map.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            what: "initial state vs map",
            expected: n,
            got: x0.len(),
        });
    }

    let mut state = x0.to_vec();
    let mut next = vec![0.0; n];
    if escaped(&state, settings.guard) {
        return Ok(LyapunovSpectrum::divergent(n, settings, 0));
    }
    for i in 0..settings.transient {
        map.apply(&state, &mut next);
        if escaped(&next, settings.guard) {
            return Ok(LyapunovSpectrum::divergent(n, settings, i + 1));
        }
        std::mem::swap(&mut state, &mut next);
    }

    let mut frame = DMatrix::<f64>::identity(n, n);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut scratch = DMatrix::<f64>::zeros(n, n);
    let mut acc = vec![0.0; n];
    let mut degenerate = false;

    let total = settings.iterations;
    let tail_start = total - total / TAIL_FRACTION;
    let mut tail_lo = vec![f64::INFINITY; n];
    let mut tail_hi = vec![f64::NEG_INFINITY; n];

    for it in 1..=total {
        map.jacobian_into(&state, &mut jac);
        jac.mul_to(&frame, &mut scratch);
        std::mem::swap(&mut frame, &mut scratch);

        map.apply(&state, &mut next);
        if escaped(&next, settings.guard) {
            return Ok(LyapunovSpectrum::divergent(n, settings, settings.transient + it));
        }
        std::mem::swap(&mut state, &mut next);

        if it % settings.reorth_every == 0 || it == total {
            degenerate |= !orthonormalize(&mut frame, &mut acc);
            if it >= tail_start {
                for j in 0..n {
                    let est = acc[j] / it as f64;
                    tail_lo[j] = tail_lo[j].min(est);
                    tail_hi[j] = tail_hi[j].max(est);
                }
            }
        }
    }

    let mut exponents: Vec<f64> = acc.iter().map(|a| a / total as f64).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    let converged = tail_lo
        .iter()
        .zip(&tail_hi)
        .all(|(lo, hi)| hi - lo < TAIL_TOLERANCE);

    Ok(LyapunovSpectrum {
        exponents,
        n_iterations: total,
        transient_skipped: settings.transient,
        converged,
        degenerate,
        diverged_at: None,
    })
}

/// Dynamical regime read off a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Divergent,
    /// Every exponent below `-eps`.
    Stable,
    /// No exponent above `eps`, leading exponent within `[-eps, eps]`.
    PeriodicOrQuasi,
    /// Exactly one exponent above `eps`.
    Chaotic,
    /// Two or more exponents above `eps`.
    Hyperchaotic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Divergent => "divergent",
            Regime::Stable => "stable",
            Regime::PeriodicOrQuasi => "periodic_or_quasi",
            Regime::Chaotic => "chaotic",
            Regime::Hyperchaotic => "hyperchaotic",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Regime::Divergent,
            Regime::Stable,
            Regime::PeriodicOrQuasi,
            Regime::Chaotic,
            Regime::Hyperchaotic,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| Error::InvalidPlan(format!("unknown regime `{s}`")))
    }
}

/// Number of exponents strictly above `eps`.
pub fn count_positive(exponents: &[f64], eps: f64) -> usize {
    exponents.iter().filter(|&&l| l > eps).count()
}

pub fn classify_regime(spectrum: &LyapunovSpectrum, eps: f64) -> Regime {
    if spectrum.diverged() || spectrum.exponents.iter().any(|l| l.is_nan()) {
        return Regime::Divergent;
    }
    match count_positive(&spectrum.exponents, eps) {
        0 => {
            let leading = spectrum.exponents.first().copied().unwrap_or(f64::NEG_INFINITY);
            if leading >= -eps {
                Regime::PeriodicOrQuasi
            } else {
                Regime::Stable
            }
        }
        1 => Regime::Chaotic,
        _ => Regime::Hyperchaotic,
    }
}
