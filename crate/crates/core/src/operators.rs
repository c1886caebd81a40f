//! Midpoint-quadrature evaluation of multilinear fractional integrals,
//! fractional maximal functions (centered and non-centered), Lerner's
//! multi-sublinear maximal function and the bilinear fractional integral.
//!
//! All kernels are tabulated in cell units and the result is multiplied by
//! `h^α` at the end, so dilating the domain rescales outputs exactly.
//! Every output point is computed independently with a fixed summation
//! order, which makes results independent of the number of worker threads.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{radius_ladder, unit_ball_volume, BallFamily, Domain, GridBall, GridError, GridFunction, Point};
use crate::kernel::{gauss_legendre, Kernel, KernelError, KernelVector};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("order α = {alpha} outside the admissible range {range}")]
    Alpha { alpha: f64, range: String },
    #[error("operator takes {expected} functions, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("inputs, kernels and output live on different domains")]
    DomainMismatch,
    #[error("power s' = {0} must be at least 1")]
    Power(f64),
    #[error("wrong operator kind for this evaluation routine")]
    Kind,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    FractionalIntegral,
    FractionalMaximalCentered,
    FractionalMaximalNoncentered,
    LernerMaximal,
    BilinearGrafakos,
}

/// Operator, order, kernels and power for the `M_{s'}` variant.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    kind: OperatorKind,
    alpha: f64,
    kernels: KernelVector,
    power: f64,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, alpha: f64, kernels: KernelVector, power: f64) -> Result<Self, OperatorError> {
        let m = kernels.len();
        let mn = (m * kernels.dim()) as f64;
        let ok = match kind {
            OperatorKind::FractionalIntegral => alpha > 0.0 && alpha < mn,
            OperatorKind::BilinearGrafakos => m == 2 && alpha > 0.0 && alpha < kernels.dim() as f64,
            OperatorKind::LernerMaximal => alpha == 0.0,
            _ => alpha >= 0.0 && alpha < mn,
        };
        if !ok {
            let range = match kind {
                OperatorKind::FractionalIntegral => format!("(0, {mn})"),
                OperatorKind::BilinearGrafakos => format!("(0, {}) with m = 2", kernels.dim()),
                OperatorKind::LernerMaximal => "{0}".to_string(),
                _ => format!("[0, {mn})"),
            };
            return Err(OperatorError::Alpha { alpha, range });
        }
        if !(power >= 1.0) || !power.is_finite() {
            return Err(OperatorError::Power(power));
        }
        Ok(Self { kind, alpha, kernels, power })
    }

    pub fn fractional_integral(alpha: f64, kernels: KernelVector) -> Result<Self, OperatorError> {
        Self::new(OperatorKind::FractionalIntegral, alpha, kernels, 1.0)
    }

    pub fn fractional_maximal(alpha: f64, kernels: KernelVector) -> Result<Self, OperatorError> {
        Self::new(OperatorKind::FractionalMaximalCentered, alpha, kernels, 1.0)
    }

    pub fn noncentered_maximal(alpha: f64, kernels: KernelVector) -> Result<Self, OperatorError> {
        Self::new(OperatorKind::FractionalMaximalNoncentered, alpha, kernels, 1.0)
    }

    pub fn lerner(dim: usize, m: usize) -> Result<Self, OperatorError> {
        Self::new(OperatorKind::LernerMaximal, 0.0, KernelVector::ones(dim, m)?, 1.0)
    }

    pub fn bilinear(dim: usize, alpha: f64) -> Result<Self, OperatorError> {
        Self::new(OperatorKind::BilinearGrafakos, alpha, KernelVector::ones(dim, 2)?, 1.0)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kernels(&self) -> &KernelVector {
        &self.kernels
    }

    pub fn m(&self) -> usize {
        self.kernels.len()
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub output: GridFunction,
    /// Output points where the diagonal node carried a nonzero weight and was
    /// replaced by the local correction.
    pub skipped_singular_nodes: usize,
    pub wall_time: Duration,
    pub h: f64,
}

fn check_inputs(spec: &OperatorSpec, inputs: &[&GridFunction]) -> Result<Domain, OperatorError> {
    if inputs.len() != spec.m() {
        return Err(OperatorError::Arity { expected: spec.m(), got: inputs.len() });
    }
    let domain = *inputs[0].domain();
    if inputs.iter().any(|f| *f.domain() != domain) || spec.kernels.dim() != domain.dim() {
        return Err(OperatorError::DomainMismatch);
    }
    Ok(domain)
}

/// `∫_{[-1/2,1/2]^D} |z|^{α-D} dz` for `0 < α`, cached per `(D, α)`.
///
/// The cube splits into 3^D sub-cubes; the central one contributes
/// `3^{-α}` times the whole, so the integral equals the sum over the ring of
/// non-central sub-cubes divided by `1 - 3^{-α}`. The ring integrand is
/// smooth and is integrated by tensor Gauss–Legendre, using the symmetry of
/// the integrand under sign changes and coordinate permutations.
pub fn singular_cell_integral(dim: usize, alpha: f64) -> f64 {
    assert!(dim >= 1 && alpha > 0.0);
    let e = alpha - dim as f64;
    if dim == 1 {
        return 2.0 * 0.5f64.powf(alpha) / alpha;
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().expect("cache lock").get(&(dim, alpha.to_bits())) {
        return v;
    }
    let order = match dim {
        2 => 24,
        3 => 16,
        4 => 12,
        _ => 8,
    };
    let (nodes, weights) = gauss_legendre(order);
    let third = 1.0 / 3.0;
    let mut ring = 0.0;
    // Sub-cubes with j offset coordinates (in [1/6, 1/2]) and dim - j centered
    // coordinates (in [-1/6, 1/6]); multiplicity C(dim, j) 2^j.
    for j in 1..=dim {
        let multiplicity = binomial(dim, j) as f64 * 2f64.powi(j as i32);
        let centers: Vec<f64> = (0..dim).map(|a| if a < j { third } else { 0.0 }).collect();
        let mut sum = 0.0;
        let mut idx = vec![0usize; dim];
        loop {
            let mut w = 1.0;
            let mut r2 = 0.0;
            for a in 0..dim {
                let z = centers[a] + 0.5 * third * nodes[idx[a]];
                r2 += z * z;
                w *= weights[idx[a]];
            }
            sum += w * r2.powf(0.5 * e);
            let mut a = 0;
            while a < dim {
                idx[a] += 1;
                if idx[a] < order {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == dim {
                break;
            }
        }
        ring += multiplicity * sum * (0.5 * third).powi(dim as i32);
    }
    let value = ring / (1.0 - 3f64.powf(-alpha));
    cache.lock().expect("cache lock").insert((dim, alpha.to_bits()), value);
    value
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Ω at an integer cell offset. At the zero offset the spherical mean stands
/// in for the undefined value; where Ω is unbounded on a lattice direction
/// its average over the cell is used.
pub(crate) fn offset_value(kernel: &Kernel, d: [i64; 2], absolute: bool) -> Result<f64, KernelError> {
    if d == [0, 0] {
        return if absolute { kernel.spherical_abs_mean() } else { kernel.spherical_mean() };
    }
    let x: Point = [d[0] as f64, d[1] as f64];
    let v = match kernel.eval(x) {
        Ok(v) => v,
        Err(KernelError::Singular(_)) => {
            const SUB: usize = 16;
            let mut acc = 0.0;
            for a in 0..SUB {
                for b in 0..SUB {
                    let y = [
                        x[0] + (a as f64 + 0.5) / SUB as f64 - 0.5,
                        x[1] + (b as f64 + 0.5) / SUB as f64 - 0.5,
                    ];
                    acc += kernel.eval(y)?;
                }
            }
            acc / (SUB * SUB) as f64
        }
        Err(e) => return Err(e),
    };
    Ok(if absolute { v.abs() } else { v })
}

/// Ω over all cell offsets `[-(G-1), G-1]^n`, row-major.
fn offset_table(kernel: &Kernel, g: usize, absolute: bool) -> Result<Vec<f64>, KernelError> {
    let w = 2 * g - 1;
    let gi = g as i64 - 1;
    if kernel.dim() == 1 {
        let plus = offset_value(kernel, [1, 0], absolute)?;
        let minus = offset_value(kernel, [-1, 0], absolute)?;
        let zero = offset_value(kernel, [0, 0], absolute)?;
        return Ok((0..w as i64)
            .map(|u| {
                let d = u - gi;
                if d > 0 {
                    plus
                } else if d < 0 {
                    minus
                } else {
                    zero
                }
            })
            .collect());
    }
    let mut table = Vec::with_capacity(w * w);
    for u0 in 0..w as i64 {
        for u1 in 0..w as i64 {
            table.push(offset_value(kernel, [u0 - gi, u1 - gi], absolute)?);
        }
    }
    Ok(table)
}

/// Dot product with eight interleaved partial sums combined in a fixed tree.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    for (l, (x, y)) in ra.iter().zip(rb).enumerate() {
        acc[l] += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

fn sign_index(d: i64) -> usize {
    if d < 0 {
        0
    } else if d == 0 {
        1
    } else {
        2
    }
}

/// Precomputed tables for one fractional-integral evaluation.
enum IntegralPlan {
    /// m = 1, n = 1: weights by |offset| for positive and negative offsets.
    Linear1 { plus: Vec<f64>, minus: Vec<f64>, zero: f64 },
    /// m = 1, n = 2: full offset table with the second axis reversed.
    Linear2 { table: Vec<f64> },
    /// m = 2, n = 1: radial table over (|d1|, |d2|) and per-sign kernel values.
    Bilinear1 { radial: Vec<f64>, om1: [f64; 3], om2: [f64; 3] },
    /// Any m, n: radial table over squared offsets and per-slot kernel tables.
    Generic { radial: Vec<f64>, omega: Vec<Vec<f64>> },
}

struct IntegralEval<'a> {
    domain: Domain,
    plan: IntegralPlan,
    inputs: Vec<&'a [f64]>,
    reversed: Vec<f64>,
    supports: Vec<Vec<usize>>,
    ranges: Vec<(usize, usize)>,
}

impl<'a> IntegralEval<'a> {
    fn new(spec: &OperatorSpec, inputs: &[&'a GridFunction]) -> Result<Self, OperatorError> {
        let domain = *inputs[0].domain();
        let (n, g, m) = (domain.dim(), domain.points_per_axis(), spec.m());
        let alpha = spec.alpha;
        let c = singular_cell_integral(m * n, alpha);
        let kernels = spec.kernels.kernels();
        let plan = match (m, n) {
            (1, 1) => {
                let k = &kernels[0];
                let (p, q) = (offset_value(k, [1, 0], false)?, offset_value(k, [-1, 0], false)?);
                let radial: Vec<f64> = (0..g).map(|t| (t as f64).powf(alpha - 1.0)).collect();
                IntegralPlan::Linear1 {
                    plus: radial.iter().map(|r| p * r).collect(),
                    minus: radial.iter().map(|r| q * r).collect(),
                    zero: offset_value(k, [0, 0], false)? * c,
                }
            }
            (1, 2) => {
                let omega = offset_table(&kernels[0], g, false)?;
                let w = 2 * g - 1;
                let gi = g as i64 - 1;
                let mut table = vec![0.0; w * w];
                for u0 in 0..w {
                    let d0 = u0 as i64 - gi;
                    for u1 in 0..w {
                        let d1 = u1 as i64 - gi;
                        let s = (d0 * d0 + d1 * d1) as f64;
                        let r = if s == 0.0 { c } else { s.powf(0.5 * (alpha - 2.0)) };
                        // second axis stored reversed: column (G-1) - d1
                        table[u0 * w + (w - 1 - u1)] = omega[u0 * w + u1] * r;
                    }
                }
                IntegralPlan::Linear2 { table }
            }
            (2, 1) => {
                let mut radial = vec![0.0; g * g];
                for t1 in 0..g {
                    for t2 in 0..g {
                        let s = (t1 * t1 + t2 * t2) as f64;
                        radial[t1 * g + t2] = if s == 0.0 { c } else { s.powf(0.5 * (alpha - 2.0)) };
                    }
                }
                let signs = |k: &Kernel| -> Result<[f64; 3], KernelError> {
                    Ok([
                        offset_value(k, [-1, 0], false)?,
                        offset_value(k, [0, 0], false)?,
                        offset_value(k, [1, 0], false)?,
                    ])
                };
                IntegralPlan::Bilinear1 { radial, om1: signs(&kernels[0])?, om2: signs(&kernels[1])? }
            }
            _ => {
                let smax = m * n * (g - 1) * (g - 1);
                let e = 0.5 * (alpha - (m * n) as f64);
                let radial = (0..=smax).map(|s| if s == 0 { c } else { (s as f64).powf(e) }).collect();
                let omega = kernels.iter().map(|k| offset_table(k, g, false)).collect::<Result<_, _>>()?;
                IntegralPlan::Generic { radial, omega }
            }
        };
        let values: Vec<&[f64]> = inputs.iter().map(|f| f.values()).collect();
        let supports: Vec<Vec<usize>> =
            values.iter().map(|v| (0..v.len()).filter(|&k| v[k] != 0.0).collect()).collect();
        let ranges = supports
            .iter()
            .map(|s| if s.is_empty() { (1, 0) } else { (s[0], *s.last().expect("nonempty")) })
            .collect();
        let reversed = match plan {
            IntegralPlan::Linear1 { .. } => values[0].iter().rev().copied().collect(),
            IntegralPlan::Bilinear1 { .. } => values[1].iter().rev().copied().collect(),
            _ => Vec::new(),
        };
        Ok(Self { domain, plan, inputs: values, reversed, supports, ranges })
    }

    /// Unscaled quadrature sum at output cell `i` (multiply by `h^α`).
    fn value(&self, i: usize) -> f64 {
        let g = self.domain.points_per_axis();
        match &self.plan {
            IntegralPlan::Linear1 { plus, minus, zero } => {
                let f = self.inputs[0];
                let (lo, hi) = self.ranges[0];
                if lo > hi {
                    return 0.0;
                }
                let mut total = zero * f[i];
                // sources below i: offset t = i - k in [max(1, i - hi), i - lo]
                if i > lo {
                    let t0 = if i > hi { i - hi } else { 1 };
                    let t1 = i - lo;
                    total += dot(&plus[t0..=t1], &self.reversed[g - 1 - i + t0..=g - 1 - i + t1]);
                }
                // sources above i: offset t = k - i in [max(1, lo - i), hi - i]
                if hi > i {
                    let t0 = if lo > i { lo - i } else { 1 };
                    let t1 = hi - i;
                    total += dot(&minus[t0..=t1], &f[i + t0..=i + t1]);
                }
                total
            }
            IntegralPlan::Linear2 { table } => {
                let f = self.inputs[0];
                let w = 2 * g - 1;
                let [i0, i1] = self.domain.coords(i);
                let mut total = 0.0;
                for k0 in 0..g {
                    let row = &f[k0 * g..(k0 + 1) * g];
                    if row.iter().all(|&v| v == 0.0) {
                        continue;
                    }
                    let u0 = (i0 as i64 - k0 as i64 + g as i64 - 1) as usize;
                    let start = u0 * w + (g - 1 - i1);
                    total += dot(&table[start..start + g], row);
                }
                total
            }
            IntegralPlan::Bilinear1 { radial, om1, om2 } => {
                let (f1, f2) = (self.inputs[0], self.inputs[1]);
                let (lo, hi) = self.ranges[1];
                if lo > hi {
                    return 0.0;
                }
                let mut total = 0.0;
                for &k1 in &self.supports[0] {
                    let d1 = i as i64 - k1 as i64;
                    let t1 = d1.unsigned_abs() as usize;
                    let row = &radial[t1 * g..(t1 + 1) * g];
                    let mut inner = 0.0;
                    if i >= lo && i <= hi {
                        inner += om2[1] * row[0] * f2[i];
                    }
                    if i > lo {
                        let t0 = if i > hi { i - hi } else { 1 };
                        let t1 = i - lo;
                        inner += om2[2] * dot(&row[t0..=t1], &self.reversed[g - 1 - i + t0..=g - 1 - i + t1]);
                    }
                    if hi > i {
                        let t0 = if lo > i { lo - i } else { 1 };
                        let t1 = hi - i;
                        inner += om2[0] * dot(&row[t0..=t1], &f2[i + t0..=i + t1]);
                    }
                    total += om1[sign_index(d1)] * f1[k1] * inner;
                }
                total
            }
            IntegralPlan::Generic { radial, omega } => self.generic_value(i, radial, omega),
        }
    }

    fn generic_value(&self, i: usize, radial: &[f64], omega: &[Vec<f64>]) -> f64 {
        let dom = &self.domain;
        let g = dom.points_per_axis() as i64;
        let w = 2 * g - 1;
        let ci = dom.coords(i);
        let two_d = dom.dim() == 2;
        let offset = |k: usize| -> (usize, usize) {
            let ck = dom.coords(k);
            let d0 = ci[0] as i64 - ck[0] as i64;
            let d1 = if two_d { ci[1] as i64 - ck[1] as i64 } else { 0 };
            let flat = if two_d { (d0 + g - 1) * w + (d1 + g - 1) } else { d0 + g - 1 };
            (flat as usize, (d0 * d0 + d1 * d1) as usize)
        };
        let m = self.inputs.len();
        // Recursion over slots with running kernel weight and squared distance.
        fn rec(
            ev: &IntegralEval<'_>,
            slot: usize,
            m: usize,
            weight: f64,
            s: usize,
            radial: &[f64],
            omega: &[Vec<f64>],
            offset: &dyn Fn(usize) -> (usize, usize),
        ) -> f64 {
            let f = ev.inputs[slot];
            let mut total = 0.0;
            if slot + 1 == m {
                for &k in &ev.supports[slot] {
                    let (flat, sk) = offset(k);
                    total += radial[s + sk] * omega[slot][flat] * f[k];
                }
                return weight * total;
            }
            for &k in &ev.supports[slot] {
                let (flat, sk) = offset(k);
                let wk = omega[slot][flat] * f[k];
                total += rec(ev, slot + 1, m, wk, s + sk, radial, omega, offset);
            }
            weight * total
        }
        rec(self, 0, m, 1.0, 0, radial, omega, &offset)
    }
}

/// `T_{Ω,α;m}(f_1, …, f_m)` at every cell of `output_domain` (which must be
/// the input domain).
pub fn eval_fractional_integral(
    spec: &OperatorSpec,
    inputs: &[&GridFunction],
    output_domain: &Domain,
) -> Result<EvalReport, OperatorError> {
    let start = Instant::now();
    if spec.kind != OperatorKind::FractionalIntegral {
        return Err(OperatorError::Kind);
    }
    let domain = check_inputs(spec, inputs)?;
    if *output_domain != domain {
        return Err(OperatorError::DomainMismatch);
    }
    let ev = IntegralEval::new(spec, inputs)?;
    let scale = domain.spacing().powf(spec.alpha);
    let values: Vec<f64> = (0..domain.len()).into_par_iter().map(|i| scale * ev.value(i)).collect();
    let skipped = (0..domain.len()).filter(|&i| inputs.iter().all(|f| f.values()[i] != 0.0)).count();
    Ok(EvalReport {
        output: GridFunction::new(domain, values)?,
        skipped_singular_nodes: skipped,
        wall_time: start.elapsed(),
        h: domain.spacing(),
    })
}

/// `T_{Ω,α;m}` at selected output cells only.
pub fn eval_fractional_integral_at(
    spec: &OperatorSpec,
    inputs: &[&GridFunction],
    cells: &[usize],
) -> Result<Vec<f64>, OperatorError> {
    if spec.kind != OperatorKind::FractionalIntegral {
        return Err(OperatorError::Kind);
    }
    let domain = check_inputs(spec, inputs)?;
    let ev = IntegralEval::new(spec, inputs)?;
    let scale = domain.spacing().powf(spec.alpha);
    Ok(cells.par_iter().map(|&i| scale * ev.value(i)).collect())
}

/// Kernel weights `|Ω_j(x - y)|` used inside maximal averages.
enum AbsWeight {
    Constant(f64),
    Table(Vec<f64>),
}

struct MaximalEval {
    domain: Domain,
    alpha: f64,
    weights: Vec<AbsWeight>,
    abs_inputs: Vec<Vec<f64>>,
}

impl MaximalEval {
    fn new(alpha: f64, kernels: &KernelVector, inputs: &[&GridFunction]) -> Result<Self, OperatorError> {
        let domain = *inputs[0].domain();
        let g = domain.points_per_axis();
        let weights = kernels
            .kernels()
            .iter()
            .map(|k| match k.form() {
                crate::kernel::KernelForm::Constant(c) => Ok(AbsWeight::Constant(c.abs())),
                _ => offset_table(k, g, true).map(AbsWeight::Table),
            })
            .collect::<Result<_, KernelError>>()?;
        let abs_inputs = inputs.iter().map(|f| f.values().iter().map(|v| v.abs()).collect()).collect();
        Ok(Self { domain, alpha, weights, abs_inputs })
    }

    /// `Σ_{y ∈ B} |Ω_j(x - y)| |f_j(y)|` in cell units.
    fn ball_sum(&self, j: usize, ball: &GridBall, x: [usize; 2]) -> f64 {
        let f = &self.abs_inputs[j];
        let runs = ball.runs(&self.domain);
        match &self.weights[j] {
            AbsWeight::Constant(c) => {
                let s: f64 = runs.into_iter().map(|r| f[r].iter().sum::<f64>()).sum();
                c * s
            }
            AbsWeight::Table(t) => {
                let g = self.domain.points_per_axis() as i64;
                let w = 2 * g - 1;
                let mut s = 0.0;
                for r in runs {
                    for k in r {
                        let ck = self.domain.coords(k);
                        let d0 = x[0] as i64 - ck[0] as i64;
                        let flat = if self.domain.dim() == 2 {
                            (d0 + g - 1) * w + (x[1] as i64 - ck[1] as i64 + g - 1)
                        } else {
                            d0 + g - 1
                        };
                        s += t[flat as usize] * f[k];
                    }
                }
                s
            }
        }
    }

    /// `m(B)^{α/n} ∏_j (1/m(B)) ∫_B |Ω_j f_j|` from the cell sums.
    fn average_product(&self, sums: impl Iterator<Item = f64>, measure: f64) -> f64 {
        let cv = self.domain.cell_volume();
        let mut v = 1.0;
        for s in sums {
            v *= cv * s / measure;
        }
        if self.alpha != 0.0 {
            v *= measure.powf(self.alpha / self.domain.dim() as f64);
        }
        v
    }

    fn ball_value(&self, ball: &GridBall, x: [usize; 2]) -> f64 {
        let measure = ball.measure(&self.domain);
        self.average_product((0..self.weights.len()).map(|j| self.ball_sum(j, ball, x)), measure)
    }

    fn centered(&self, i: usize, ladder: &[f64]) -> f64 {
        let x = self.domain.coords(i);
        ladder.iter().map(|&r| self.ball_value(&GridBall::new(x, r), x)).fold(0.0, f64::max)
    }
}

fn maximal_report(domain: Domain, values: Vec<f64>, start: Instant) -> Result<EvalReport, OperatorError> {
    Ok(EvalReport {
        output: GridFunction::new(domain, values)?,
        skipped_singular_nodes: 0,
        wall_time: start.elapsed(),
        h: domain.spacing(),
    })
}

/// Centered `M_{Ω,α;m}` (or Lerner's `M` for that kind) over the dyadic radius ladder.
pub fn eval_fractional_maximal(
    spec: &OperatorSpec,
    inputs: &[&GridFunction],
    output_domain: &Domain,
) -> Result<EvalReport, OperatorError> {
    let start = Instant::now();
    if !matches!(spec.kind, OperatorKind::FractionalMaximalCentered | OperatorKind::LernerMaximal) {
        return Err(OperatorError::Kind);
    }
    let domain = check_inputs(spec, inputs)?;
    if *output_domain != domain {
        return Err(OperatorError::DomainMismatch);
    }
    let ev = MaximalEval::new(spec.alpha, &spec.kernels, inputs)?;
    let ladder = radius_ladder(&domain);
    let values = (0..domain.len()).into_par_iter().map(|i| ev.centered(i, &ladder)).collect();
    maximal_report(domain, values, start)
}

/// Non-centered maximal function: supremum over the family balls that contain each cell.
pub fn eval_noncentered_maximal(
    spec: &OperatorSpec,
    inputs: &[&GridFunction],
    family: &BallFamily,
) -> Result<EvalReport, OperatorError> {
    let start = Instant::now();
    let domain = check_inputs(spec, inputs)?;
    if *family.domain() != domain {
        return Err(OperatorError::DomainMismatch);
    }
    let ev = MaximalEval::new(spec.alpha, &spec.kernels, inputs)?;
    let constant = ev.weights.iter().all(|w| matches!(w, AbsWeight::Constant(_)));
    let values = if constant {
        let cache: Vec<f64> = family.balls().par_iter().map(|b| ev.ball_value(b, b.center_cell())).collect();
        (0..domain.len())
            .into_par_iter()
            .map(|i| {
                let x = domain.coords(i);
                family
                    .balls()
                    .iter()
                    .zip(&cache)
                    .filter(|(b, _)| b.contains(&domain, x))
                    .fold(0.0, |m, (_, &v)| f64::max(m, v))
            })
            .collect()
    } else {
        (0..domain.len())
            .into_par_iter()
            .map(|i| {
                let x = domain.coords(i);
                family
                    .balls()
                    .iter()
                    .filter(|b| b.contains(&domain, x))
                    .fold(0.0, |m, b| f64::max(m, ev.ball_value(b, x)))
            })
            .collect()
    };
    maximal_report(domain, values, start)
}

/// Centered maximal function at an arbitrary point, with balls `B(x, r)` for
/// the ladder radii and membership decided by cell-center distance.
pub fn eval_fractional_maximal_at_point(
    spec: &OperatorSpec,
    inputs: &[&GridFunction],
    x: Point,
) -> Result<f64, OperatorError> {
    let domain = check_inputs(spec, inputs)?;
    let n = domain.dim();
    let h = domain.spacing();
    let kernels = spec.kernels.kernels();
    let mut best: f64 = 0.0;
    for r in radius_ladder(&domain).into_iter().map(|r| r * h) {
        let measure = unit_ball_volume(n) * r.powi(n as i32);
        let mut v = 1.0;
        for (j, f) in inputs.iter().enumerate() {
            let mut s = 0.0;
            for k in 0..domain.len() {
                let y = domain.center(k);
                let d = [x[0] - y[0], x[1] - y[1]];
                if d[0] * d[0] + d[1] * d[1] < r * r && f.values()[k] != 0.0 {
                    let om = if d == [0.0, 0.0] {
                        kernels[j].spherical_abs_mean()?
                    } else {
                        kernels[j].eval(d)?.abs()
                    };
                    s += om * f.values()[k].abs();
                }
            }
            v *= domain.cell_volume() * s / measure;
        }
        if spec.alpha != 0.0 {
            v *= measure.powf(spec.alpha / n as f64);
        }
        best = best.max(v);
    }
    Ok(best)
}

/// Lerner's multi-sublinear maximal function `M(f_1, …, f_m)`.
pub fn eval_lerner_maximal(inputs: &[&GridFunction]) -> Result<GridFunction, OperatorError> {
    let first = inputs.first().ok_or(OperatorError::Arity { expected: 1, got: 0 })?;
    let spec = OperatorSpec::lerner(first.domain().dim(), inputs.len())?;
    Ok(eval_fractional_maximal(&spec, inputs, first.domain())?.output)
}

/// `M_{s'}(f⃗) = [M(|f_1|^{s'}, …, |f_m|^{s'})]^{1/s'}`.
pub fn eval_power_maximal(inputs: &[&GridFunction], s_prime: f64) -> Result<GridFunction, OperatorError> {
    if !(s_prime >= 1.0) || !s_prime.is_finite() {
        return Err(OperatorError::Power(s_prime));
    }
    if s_prime == 1.0 {
        return eval_lerner_maximal(inputs);
    }
    let powered: Vec<GridFunction> = inputs.iter().map(|f| f.abs_pow(s_prime)).collect();
    let refs: Vec<&GridFunction> = powered.iter().collect();
    let m = eval_lerner_maximal(&refs)?;
    Ok(m.map(|v| v.powf(1.0 / s_prime))?)
}

/// `B_α(f, g)(x) = ∫ f(x + t) g(x - t) |t|^{α - n} dt`; the node `t = 0`
/// carries the local cell integral.
pub fn eval_bilinear_grafakos(f: &GridFunction, g: &GridFunction, alpha: f64) -> Result<GridFunction, OperatorError> {
    let domain = *f.domain();
    if *g.domain() != domain {
        return Err(OperatorError::DomainMismatch);
    }
    let n = domain.dim();
    OperatorSpec::bilinear(n, alpha)?;
    let pts = domain.points_per_axis() as i64;
    let c = singular_cell_integral(n, alpha);
    let e = 0.5 * (alpha - n as f64);
    let scale = domain.spacing().powf(alpha);
    let (fv, gv) = (f.values(), g.values());
    let values: Vec<f64> = (0..domain.len())
        .into_par_iter()
        .map(|i| {
            let ci = domain.coords(i);
            let (x0, x1) = (ci[0] as i64, ci[1] as i64);
            let inside = |a: i64, b: i64| a >= 0 && a < pts && (n == 1 || (b >= 0 && b < pts));
            let idx = |a: i64, b: i64| domain.index([a as usize, b as usize]);
            let mut total = c * (fv[i] * gv[i]);
            if n == 1 {
                for t in 1..pts {
                    let w = ((t * t) as f64).powf(e);
                    let mut pair = 0.0;
                    if inside(x0 + t, 0) && inside(x0 - t, 0) {
                        pair = fv[(x0 + t) as usize] * gv[(x0 - t) as usize]
                            + fv[(x0 - t) as usize] * gv[(x0 + t) as usize];
                    }
                    total += w * pair;
                }
            } else {
                // Offsets in the half plane (t0 > 0) or (t0 = 0, t1 > 0), paired with their negatives.
                for t0 in 0..pts {
                    let t1_start = if t0 == 0 { 1 } else { -(pts - 1) };
                    for t1 in t1_start..pts {
                        let (a, b) = ((x0 + t0, x1 + t1), (x0 - t0, x1 - t1));
                        if !inside(a.0, a.1) || !inside(b.0, b.1) {
                            continue;
                        }
                        let w = ((t0 * t0 + t1 * t1) as f64).powf(e);
                        let (ia, ib) = (idx(a.0, a.1), idx(b.0, b.1));
                        total += w * (fv[ia] * gv[ib] + fv[ib] * gv[ia]);
                    }
                }
            }
            scale * total
        })
        .collect();
    Ok(GridFunction::new(domain, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;

    fn brute_cell_integral(dim: usize, alpha: f64, k: usize) -> f64 {
        // midpoint rule on k^dim points; even k keeps the origin off the nodes
        let mut total = 0.0;
        let step = 1.0 / k as f64;
        let mut idx = vec![0usize; dim];
        loop {
            let r2: f64 = idx.iter().map(|&j| (-0.5 + (j as f64 + 0.5) * step).powi(2)).sum();
            total += r2.powf(0.5 * (alpha - dim as f64));
            let mut a = 0;
            while a < dim {
                idx[a] += 1;
                if idx[a] < k {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == dim {
                break;
            }
        }
        total * step.powi(dim as i32)
    }

    #[test]
    fn singular_cell_integral_matches_closed_forms() {
        // D = 2, exponent -1: 4 ln(1 + √2) on [-1/2, 1/2]^2
        let want = 4.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((singular_cell_integral(2, 1.0) - want).abs() < 1e-12);
        // exponent 0: volume 1
        for d in 1..=4 {
            assert!((singular_cell_integral(d, d as f64) - 1.0).abs() < 1e-12, "D={d}");
        }
        // exponent 2 over [-1/2,1/2]^D: D/12
        assert!((singular_cell_integral(3, 5.0) - 0.25).abs() < 1e-12);
        // mild singularity against a fine midpoint rule (error O(k^{-α}))
        let got = singular_cell_integral(3, 2.5);
        let brute = brute_cell_integral(3, 2.5, 200);
        assert!((got - brute).abs() / got < 1e-4, "{got} vs {brute}");
    }

    #[test]
    fn dot_is_exact_on_small_integers() {
        let a: Vec<f64> = (0..37).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..37).map(|i| (i % 5) as f64).collect();
        let want: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert_eq!(dot(&a, &b), want);
    }

    fn brute_integral(spec: &OperatorSpec, fs: &[&GridFunction], i: usize) -> f64 {
        // direct nested sum over all source tuples, kernel evaluated from scratch
        let d = *fs[0].domain();
        let m = fs.len();
        let n = d.dim();
        let c = singular_cell_integral(m * n, spec.alpha());
        let x = d.coords(i);
        let mut total = 0.0;
        let mut idx = vec![0usize; m];
        loop {
            let mut w = 1.0;
            let mut s = 0.0;
            for j in 0..m {
                let y = d.coords(idx[j]);
                let off = [x[0] as i64 - y[0] as i64, x[1] as i64 - y[1] as i64];
                s += (off[0] * off[0] + off[1] * off[1]) as f64;
                w *= offset_value(&spec.kernels().kernels()[j], off, false).unwrap() * fs[j].values()[idx[j]];
            }
            total += w * if s == 0.0 { c } else { s.powf(0.5 * (spec.alpha() - (m * n) as f64)) };
            let mut a = 0;
            while a < m {
                idx[a] += 1;
                if idx[a] < d.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == m {
                break;
            }
        }
        total * d.spacing().powf(spec.alpha())
    }

    #[test]
    fn fast_paths_agree_with_direct_sums() {
        let cases: Vec<(usize, usize, usize, f64, Vec<&str>)> = vec![
            (1, 1, 16, 0.5, vec!["sign:1"]),
            (1, 2, 8, 1.2, vec!["angpow:0.3:2"]),
            (2, 1, 16, 0.7, vec!["sign:1", "const:2"]),
            (2, 2, 4, 1.5, vec!["const:1", "sign:2"]),
            (3, 1, 8, 1.0, vec!["const:1", "sign:1", "const:-1"]),
        ];
        for (m, n, g, alpha, descs) in cases {
            let d = Domain::new(n, 1.0, g).unwrap();
            let ks = KernelVector::new(descs.iter().map(|s| Kernel::parse(s, n).unwrap()).collect()).unwrap();
            let spec = OperatorSpec::fractional_integral(alpha, ks).unwrap();
            let fs: Vec<GridFunction> = (0..m)
                .map(|j| {
                    GridFunction::sample(d, |x| {
                        let t = x[0] + 0.3 * x[1];
                        if t > -0.6 + 0.1 * j as f64 { (3.0 * t + j as f64).sin() } else { 0.0 }
                    })
                    .unwrap()
                })
                .collect();
            let refs: Vec<&GridFunction> = fs.iter().collect();
            let out = eval_fractional_integral(&spec, &refs, &d).unwrap().output;
            for i in 0..d.len() {
                let want = brute_integral(&spec, &refs, i);
                let got = out.values()[i];
                assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "m={m} n={n} i={i}: {got} vs {want}");
            }
            let some = eval_fractional_integral_at(&spec, &refs, &[0, d.len() - 1]).unwrap();
            assert_eq!(some, vec![out.values()[0], out.values()[d.len() - 1]]);
        }
    }

    #[test]
    fn zero_slot_gives_zero() {
        let d = Domain::new(1, 1.0, 32).unwrap();
        let f = GridFunction::constant(d, 1.0);
        let z = GridFunction::zeros(d);
        let spec = OperatorSpec::fractional_integral(0.5, KernelVector::ones(1, 2).unwrap()).unwrap();
        let out = eval_fractional_integral(&spec, &[&f, &z], &d).unwrap();
        assert!(out.output.values().iter().all(|&v| v == 0.0));
        assert_eq!(out.skipped_singular_nodes, 0);
        let out = eval_fractional_integral(&spec, &[&f, &f], &d).unwrap();
        assert_eq!(out.skipped_singular_nodes, 32);
    }

    #[test]
    fn argument_validation() {
        let d = Domain::new(1, 1.0, 8).unwrap();
        let f = GridFunction::constant(d, 1.0);
        assert!(OperatorSpec::fractional_integral(2.0, KernelVector::ones(1, 2).unwrap()).is_err());
        assert!(OperatorSpec::fractional_integral(0.0, KernelVector::ones(1, 1).unwrap()).is_err());
        assert!(OperatorSpec::fractional_maximal(0.0, KernelVector::ones(1, 1).unwrap()).is_ok());
        let spec = OperatorSpec::fractional_integral(0.5, KernelVector::ones(1, 2).unwrap()).unwrap();
        assert!(matches!(eval_fractional_integral(&spec, &[&f], &d), Err(OperatorError::Arity { .. })));
        let other = GridFunction::constant(Domain::new(1, 2.0, 8).unwrap(), 1.0);
        assert!(matches!(eval_fractional_integral(&spec, &[&f, &other], &d), Err(OperatorError::DomainMismatch)));
        assert!(matches!(eval_power_maximal(&[&f], 0.5), Err(OperatorError::Power(_))));
        assert!(eval_bilinear_grafakos(&f, &f, 1.0).is_err());
    }

    #[test]
    fn maximal_of_indicator_off_grid() {
        let d = Domain::new(1, 4.0, 64).unwrap();
        let f = GridFunction::sample(d, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let spec = OperatorSpec::lerner(1, 1).unwrap();
        let v = eval_fractional_maximal_at_point(&spec, &[&f], [2.0, 0.0]).unwrap();
        assert!((v - 0.25).abs() < 1e-12, "{v}");
        let spec2 = OperatorSpec::lerner(1, 2).unwrap();
        let v2 = eval_fractional_maximal_at_point(&spec2, &[&f, &f], [2.0, 0.0]).unwrap();
        assert!((v2 - 0.0625).abs() < 1e-12, "{v2}");
    }

    #[test]
    fn bilinear_is_symmetric() {
        for n in [1, 2] {
            let d = Domain::new(n, 1.0, if n == 1 { 64 } else { 12 }).unwrap();
            let f = GridFunction::sample(d, |x| (2.0 * x[0] + x[1]).cos()).unwrap();
            let g = GridFunction::sample(d, |x| x[0] - x[1] * x[1]).unwrap();
            let a = eval_bilinear_grafakos(&f, &g, 0.4).unwrap();
            let b = eval_bilinear_grafakos(&g, &f, 0.4).unwrap();
            assert_eq!(a, b);
        }
    }
}
