//! Homogeneous kernels of degree zero and their norms on the unit sphere.
//!
//! The sphere carries its unnormalized surface measure: arc length on the
//! circle (total mass 2π) and counting measure on `{-1, +1}` (total mass 2).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use thiserror::Error;

use crate::grid::Point;
use crate::tolerances::ANGULAR_NODES;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("kernel evaluated at the origin")]
    Origin,
    #[error("kernel is unbounded at direction {0:?}")]
    Singular(Point),
    #[error("Ω ∉ L^{0}")]
    NotInLs(f64),
    #[error("kernel integrability exponent must lie in [1, ∞], got {0}")]
    Exponent(f64),
    #[error("invalid kernel: {0}")]
    Invalid(String),
    #[error("cannot parse kernel descriptor {0:?}")]
    Parse(String),
    #[error("kernel vector must hold 1 to 3 kernels of one dimension")]
    Vector,
}

/// Shape of Ω on the unit sphere. Axes are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelForm {
    Constant(f64),
    /// `|x'·e_axis|^(-exponent)`.
    AngularPower { exponent: f64, axis: usize },
    /// `sign(x'·e_axis)`, zero on the equator.
    SignAxis { axis: usize },
    /// Samples at angles `2πj/M` on the circle, linearly interpolated.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    dim: usize,
    form: KernelForm,
}

impl Kernel {
    pub fn new(dim: usize, form: KernelForm) -> Result<Self, KernelError> {
        if dim != 1 && dim != 2 {
            return Err(KernelError::Invalid(format!("dimension {dim}")));
        }
        match &form {
            KernelForm::Constant(c) if !c.is_finite() => {
                return Err(KernelError::Invalid("non-finite constant".into()))
            }
            KernelForm::AngularPower { exponent, axis } => {
                if !(*exponent >= 0.0) || !exponent.is_finite() {
                    return Err(KernelError::Invalid(format!("exponent {exponent}")));
                }
                if *axis >= dim {
                    return Err(KernelError::Invalid(format!("axis {} in dimension {dim}", axis + 1)));
                }
            }
            KernelForm::SignAxis { axis } if *axis >= dim => {
                return Err(KernelError::Invalid(format!("axis {} in dimension {dim}", axis + 1)))
            }
            KernelForm::Table(v) => {
                if dim != 2 || v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(KernelError::Invalid("angular tables need n = 2 and finite samples".into()));
                }
            }
            _ => {}
        }
        Ok(Self { dim, form })
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self, KernelError> {
        Self::new(dim, KernelForm::Constant(c))
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, 1.0).expect("valid dimension")
    }

    /// Parses `const:c`, `angpow:beta:axis` or `sign:axis` (axes counted from 1).
    pub fn parse(descriptor: &str, dim: usize) -> Result<Self, KernelError> {
        let err = || KernelError::Parse(descriptor.to_string());
        let parts: Vec<&str> = descriptor.trim().split(':').collect();
        let axis = |s: &str| -> Result<usize, KernelError> {
            let a: usize = s.parse().map_err(|_| err())?;
            a.checked_sub(1).ok_or_else(err)
        };
        let form = match parts.as_slice() {
            ["const", c] => KernelForm::Constant(c.parse().map_err(|_| err())?),
            ["angpow", b, a] => {
                KernelForm::AngularPower { exponent: b.parse().map_err(|_| err())?, axis: axis(a)? }
            }
            ["sign", a] => KernelForm::SignAxis { axis: axis(a)? },
            _ => return Err(err()),
        };
        Self::new(dim, form)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    pub fn is_constant_one(&self) -> bool {
        self.form == KernelForm::Constant(1.0)
    }

    /// Ω(x) for `x ≠ 0`; only the direction of `x` matters.
    pub fn eval(&self, x: Point) -> Result<f64, KernelError> {
        let x1 = if self.dim == 2 { x[1] } else { 0.0 };
        if x[0] == 0.0 && x1 == 0.0 {
            return Err(KernelError::Origin);
        }
        match &self.form {
            KernelForm::Constant(c) => Ok(*c),
            KernelForm::SignAxis { axis } => {
                let v = if *axis == 0 { x[0] } else { x1 };
                Ok(if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                })
            }
            KernelForm::AngularPower { exponent, axis } => {
                if *exponent == 0.0 {
                    return Ok(1.0);
                }
                let (along, across) = if *axis == 0 { (x[0], x1) } else { (x1, x[0]) };
                if along == 0.0 {
                    return Err(KernelError::Singular(x));
                }
                // |cos| from the component ratio, which is invariant under scaling.
                let ratio = across / along;
                let cos = 1.0 / (1.0 + ratio * ratio).sqrt();
                Ok(cos.powf(-exponent))
            }
            KernelForm::Table(samples) => Ok(table_value(samples, direction_angle(x[0], x1))),
        }
    }

    /// `‖Ω‖_{L^s(S^{n-1})}` for `1 ≤ s ≤ ∞`, with the default angular resolution.
    pub fn sphere_norm(&self, s: f64) -> Result<f64, KernelError> {
        self.sphere_norm_with(s, ANGULAR_NODES)
    }

    /// As [`Kernel::sphere_norm`], with `nodes` angular points for tabulated kernels.
    pub fn sphere_norm_with(&self, s: f64, nodes: usize) -> Result<f64, KernelError> {
        if !(s >= 1.0) {
            return Err(KernelError::Exponent(s));
        }
        if self.dim == 1 {
            let a = self.eval([1.0, 0.0])?.abs();
            let b = self.eval([-1.0, 0.0])?.abs();
            return Ok(if s.is_infinite() { a.max(b) } else { (a.powf(s) + b.powf(s)).powf(1.0 / s) });
        }
        let circle = 2.0 * PI;
        match &self.form {
            KernelForm::Constant(c) => {
                Ok(if s.is_infinite() { c.abs() } else { c.abs() * circle.powf(1.0 / s) })
            }
            KernelForm::SignAxis { .. } => Ok(if s.is_infinite() { 1.0 } else { circle.powf(1.0 / s) }),
            KernelForm::AngularPower { exponent, .. } => {
                if *exponent == 0.0 {
                    return Ok(if s.is_infinite() { 1.0 } else { circle.powf(1.0 / s) });
                }
                if s.is_infinite() || exponent * s >= 1.0 {
                    return Err(KernelError::NotInLs(s));
                }
                Ok(cos_power_integral(exponent * s).powf(1.0 / s))
            }
            KernelForm::Table(samples) => {
                let nodes = nodes.max(1);
                let dt = circle / nodes as f64;
                if s.is_infinite() {
                    return Ok((0..nodes)
                        .map(|j| table_value(samples, (j as f64 + 0.5) * dt).abs())
                        .fold(0.0, f64::max));
                }
                let sum: f64 =
                    (0..nodes).map(|j| table_value(samples, (j as f64 + 0.5) * dt).abs().powf(s)).sum();
                Ok((sum * dt).powf(1.0 / s))
            }
        }
    }

    /// Total mass of the sphere, `|S^{n-1}|`.
    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.dim)
    }

    /// `‖Ω‖_{L^s}` against the probability measure on the sphere.
    pub fn normalized_sphere_norm(&self, s: f64) -> Result<f64, KernelError> {
        let norm = self.sphere_norm(s)?;
        Ok(if s.is_infinite() { norm } else { norm / self.sphere_measure().powf(1.0 / s) })
    }

    /// Average of Ω over the sphere.
    pub fn spherical_mean(&self) -> Result<f64, KernelError> {
        if self.dim == 1 {
            return Ok(0.5 * (self.eval([1.0, 0.0])? + self.eval([-1.0, 0.0])?));
        }
        match &self.form {
            KernelForm::Constant(c) => Ok(*c),
            KernelForm::SignAxis { .. } => Ok(0.0),
            KernelForm::AngularPower { .. } => Ok(self.sphere_norm(1.0)? / (2.0 * PI)),
            KernelForm::Table(samples) => Ok(samples.iter().sum::<f64>() / samples.len() as f64),
        }
    }

    /// Average of |Ω| over the sphere.
    pub fn spherical_abs_mean(&self) -> Result<f64, KernelError> {
        Ok(self.sphere_norm(1.0)? / self.sphere_measure())
    }

    /// `(∫_{|y|<R} |Ω(y)|^s dy)^{1/s} = (1/n)^{1/s} ‖Ω‖_{L^s(S^{n-1})} R^{n/s}`;
    /// for `s = ∞` the sup of |Ω|.
    pub fn ball_kernel_norm(&self, s: f64, radius: f64) -> Result<f64, KernelError> {
        if !(radius > 0.0) {
            return Err(KernelError::Invalid(format!("radius {radius}")));
        }
        let norm = self.sphere_norm(s)?;
        if s.is_infinite() {
            return Ok(norm);
        }
        let n = self.dim as f64;
        Ok((1.0 / n).powf(1.0 / s) * norm * radius.powf(n / s))
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            KernelForm::Constant(c) => write!(f, "const:{c}"),
            KernelForm::AngularPower { exponent, axis } => write!(f, "angpow:{exponent}:{}", axis + 1),
            KernelForm::SignAxis { axis } => write!(f, "sign:{}", axis + 1),
            KernelForm::Table(v) => write!(f, "table:{}", v.len()),
        }
    }
}

/// `|S^{n-1}|` for n = 1, 2.
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

/// Angle of `(x, y)` in `[0, 2π)`, computed from the component ratio.
fn direction_angle(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return if y > 0.0 { FRAC_PI_2 } else { 3.0 * FRAC_PI_2 };
    }
    let base = (y / x).atan();
    if x > 0.0 {
        if base < 0.0 {
            base + 2.0 * PI
        } else {
            base
        }
    } else {
        base + PI
    }
}

fn table_value(samples: &[f64], theta: f64) -> f64 {
    let m = samples.len();
    let t = theta / (2.0 * PI) * m as f64;
    let j = (t.floor() as usize) % m;
    let frac = t - t.floor();
    samples[j] * (1.0 - frac) + samples[(j + 1) % m] * frac
}

/// `∫_0^{2π} |cos θ|^{-γ} dθ` for `0 ≤ γ < 1`.
///
/// Equals `4 ∫_0^{π/2} sin^{-γ} φ dφ`; the integral is split into dyadic
/// panels shrinking toward the singular endpoint, each integrated by
/// Gauss–Legendre, and the innermost piece `[0, ε]` is integrated in closed
/// form from `sin φ ≈ φ`.
pub(crate) fn cos_power_integral(gamma: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(12);
    let mut total = 0.0;
    let mut hi = FRAC_PI_2;
    for _ in 0..60 {
        let lo = 0.5 * hi;
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let panel: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * (mid + half * t).sin().powf(-gamma))
            .sum();
        total += half * panel;
        hi = lo;
    }
    // sin φ = φ (1 - φ²/6 + ...); the correction is below rounding at ε ~ 1e-18.
    total += hi.powf(1.0 - gamma) / (1.0 - gamma);
    4.0 * total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 1 { x } else { p1 };
            let pm1 = if order == 1 { 1.0 } else { p0 };
            dp = n * (x * p - pm1) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Ω_1..Ω_m sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector {
    kernels: Vec<Kernel>,
}

impl KernelVector {
    pub fn new(kernels: Vec<Kernel>) -> Result<Self, KernelError> {
        if kernels.is_empty() || kernels.len() > 3 || kernels.iter().any(|k| k.dim != kernels[0].dim) {
            return Err(KernelError::Vector);
        }
        Ok(Self { kernels })
    }

    /// Ω_i ≡ 1 for i = 1..m.
    pub fn ones(dim: usize, m: usize) -> Result<Self, KernelError> {
        Self::new(vec![Kernel::one(dim); m])
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.kernels[0].dim
    }

    pub fn all_constant_one(&self) -> bool {
        self.kernels.iter().all(Kernel::is_constant_one)
    }

    /// Kernels with absolute values taken, `|Ω_i|`.
    pub fn abs(&self) -> Self {
        let kernels = self
            .kernels
            .iter()
            .map(|k| {
                let form = match &k.form {
                    KernelForm::Constant(c) => KernelForm::Constant(c.abs()),
                    KernelForm::SignAxis { .. } => KernelForm::Constant(1.0),
                    KernelForm::AngularPower { .. } => k.form.clone(),
                    KernelForm::Table(v) => KernelForm::Table(v.iter().map(|x| x.abs()).collect()),
                };
                Kernel { dim: k.dim, form }
            })
            .collect();
        Self { kernels }
    }
}
