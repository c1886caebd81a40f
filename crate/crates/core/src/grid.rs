//! Midpoint grids on boxes, sampled functions, discretized balls and
//! deterministic test-function corpora.

use std::f64::consts::PI;
use std::io::{self, BufRead, Read, Write};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A point of the plane; the second coordinate is zero in one dimension.
pub type Point = [f64; 2];

/// Largest supported number of cells per axis.
pub const MAX_POINTS_PER_AXIS: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dimension {0} is not supported (expected 1 or 2)")]
    Dimension(usize),
    #[error("points per axis must be even and within [2, 65536], got {0}")]
    PointsPerAxis(usize),
    #[error("half width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("non-finite value {value} at cell {index} (center {center:?})")]
    NonFinite { index: usize, center: Point, value: f64 },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("grid functions live on different domains")]
    DomainMismatch,
    #[error("ball center stride must be at least 1")]
    Stride,
    #[error("a ball family needs at least one ball")]
    EmptyFamily,
    #[error("corpus size must be at least 1")]
    EmptyCorpus,
    #[error("malformed MFL1 header: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Volume of the unit ball in dimension 1 or 2.
pub fn unit_ball_volume(n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        PI
    }
}

/// Euclidean norm of a point.
pub fn norm(x: Point) -> f64 {
    x[0].hypot(x[1])
}

/// The box `[-L, L]^n` split into `G` equal cells per axis, sampled at cell centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl Domain {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::Dimension(dim));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(GridError::HalfWidth(half_width));
        }
        if points_per_axis < 2 || points_per_axis % 2 != 0 || points_per_axis > MAX_POINTS_PER_AXIS
        {
            return Err(GridError::PointsPerAxis(points_per_axis));
        }
        Ok(Self { dim, half_width, points: points_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    /// Cell width `h = 2L / G`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Number of cells, `G^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lebesgue measure of the whole box.
    pub fn measure(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Center of cell `k` along one axis.
    pub fn axis_center(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.spacing()
    }

    /// Per-axis cell indices of a flat index (row-major, last axis fastest).
    pub fn coords(&self, index: usize) -> [usize; 2] {
        if self.dim == 1 {
            [index, 0]
        } else {
            [index / self.points, index % self.points]
        }
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        if self.dim == 1 {
            coords[0]
        } else {
            coords[0] * self.points + coords[1]
        }
    }

    pub fn center(&self, index: usize) -> Point {
        let c = self.coords(index);
        if self.dim == 1 {
            [self.axis_center(c[0]), 0.0]
        } else {
            [self.axis_center(c[0]), self.axis_center(c[1])]
        }
    }

    /// Same cell count on `[-λL, λL]^n`.
    pub fn dilated(&self, factor: f64) -> Result<Self, GridError> {
        Self::new(self.dim, self.half_width * factor, self.points)
    }

    /// Same box with twice as many cells per axis.
    pub fn refined(&self) -> Result<Self, GridError> {
        Self::new(self.dim, self.half_width, self.points * 2)
    }
}

/// Finite samples on the cell centers of a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != domain.len() {
            return Err(GridError::Length { expected: domain.len(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite {
                index,
                center: domain.center(index),
                value: values[index],
            });
        }
        Ok(Self { domain, values })
    }

    pub fn zeros(domain: Domain) -> Self {
        Self::constant(domain, 0.0)
    }

    pub fn constant(domain: Domain, value: f64) -> Self {
        assert!(value.is_finite());
        Self { domain, values: vec![value; domain.len()] }
    }

    /// Evaluates `f` at every cell center.
    pub fn sample(domain: Domain, f: impl Fn(Point) -> f64) -> Result<Self, GridError> {
        let values = (0..domain.len()).map(|i| f(domain.center(i))).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The same values placed on another domain with the same cell layout.
    pub fn with_domain(&self, domain: Domain) -> Result<Self, GridError> {
        if domain.dim != self.domain.dim || domain.points != self.domain.points {
            return Err(GridError::DomainMismatch);
        }
        Ok(Self { domain, values: self.values.clone() })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::new(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self { domain: self.domain, values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        assert!(c.is_finite());
        Self { domain: self.domain, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `|f|^p` for `p > 0`.
    pub fn abs_pow(&self, p: f64) -> Self {
        assert!(p > 0.0);
        let values = self
            .values
            .iter()
            .map(|v| if p == 1.0 { v.abs() } else { v.abs().powf(p) })
            .collect();
        Self { domain: self.domain, values }
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self, GridError> {
        if self.domain != other.domain {
            return Err(GridError::DomainMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::new(self.domain, values)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self, GridError> {
        if self.domain != other.domain {
            return Err(GridError::DomainMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Self::new(self.domain, values)
    }

    /// Zero outside the ball.
    pub fn restricted(&self, ball: &GridBall) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for run in ball.runs(&self.domain) {
            values[run.clone()].copy_from_slice(&self.values[run]);
        }
        Self { domain: self.domain, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Writes the MFL1 format: a text header line and little-endian doubles.
    pub fn write_mfl1<W: Write>(&self, mut w: W) -> Result<(), GridError> {
        writeln!(
            w,
            "MFL1 n={} L={} G={}",
            self.domain.dim, self.domain.half_width, self.domain.points
        )?;
        let mut bytes = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_mfl1<R: Read>(r: R) -> Result<Self, GridError> {
        let mut reader = io::BufReader::new(r);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let header = header.trim_end_matches('\n');
        let mut fields = header.split(' ');
        if fields.next() != Some("MFL1") {
            return Err(GridError::Header(header.to_string()));
        }
        let mut field = |key: &str| -> Result<String, GridError> {
            let item = fields.next().ok_or_else(|| GridError::Header(header.to_string()))?;
            item.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| GridError::Header(header.to_string()))
        };
        let bad = |_| GridError::Header(header.to_string());
        let n: usize = field("n")?.parse().map_err(bad)?;
        let half_width: f64 = field("L")?.parse().map_err(|_| GridError::Header(header.to_string()))?;
        let g: usize = field("G")?.parse().map_err(bad)?;
        let domain = Domain::new(n, half_width, g)?;
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * domain.len() {
            return Err(GridError::Length { expected: domain.len(), got: bytes.len() / 8 });
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Self::new(domain, values)
    }
}

/// An open ball centered at a cell center with radius measured in cells.
///
/// Membership is decided on integer cell offsets, so it is exact and
/// invariant under dilation of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBall {
    center: [usize; 2],
    radius_cells: f64,
}

impl GridBall {
    pub fn new(center: [usize; 2], radius_cells: f64) -> Self {
        assert!(radius_cells > 0.0);
        Self { center, radius_cells }
    }

    pub fn center_cell(&self) -> [usize; 2] {
        self.center
    }

    pub fn radius_cells(&self) -> f64 {
        self.radius_cells
    }

    pub fn radius(&self, domain: &Domain) -> f64 {
        self.radius_cells * domain.spacing()
    }

    pub fn center_point(&self, domain: &Domain) -> Point {
        domain.center(domain.index(self.center))
    }

    /// Continuum measure `v_n r^n`.
    pub fn measure(&self, domain: &Domain) -> f64 {
        unit_ball_volume(domain.dim()) * self.radius(domain).powi(domain.dim() as i32)
    }

    pub fn contains(&self, domain: &Domain, coords: [usize; 2]) -> bool {
        let d0 = coords[0] as f64 - self.center[0] as f64;
        let d1 = if domain.dim() == 2 { coords[1] as f64 - self.center[1] as f64 } else { 0.0 };
        d0 * d0 + d1 * d1 < self.radius_cells * self.radius_cells
    }

    /// Contiguous index runs of the cells whose centers lie in the ball, ascending.
    pub fn runs(&self, domain: &Domain) -> Vec<Range<usize>> {
        let g = domain.points_per_axis() as i64;
        let r2 = self.radius_cells * self.radius_cells;
        // Largest integer offset strictly inside the radius.
        let reach = (self.radius_cells.ceil() as i64 - 1).max(0);
        let axis_range = |c: usize, reach: i64| -> (i64, i64) {
            ((c as i64 - reach).max(0), (c as i64 + reach).min(g - 1))
        };
        if domain.dim() == 1 {
            let (lo, hi) = axis_range(self.center[0], reach);
            return if lo <= hi { vec![lo as usize..hi as usize + 1] } else { Vec::new() };
        }
        let (lo0, hi0) = axis_range(self.center[0], reach);
        let mut runs = Vec::new();
        for k0 in lo0..=hi0 {
            let d0 = (k0 - self.center[0] as i64) as f64;
            let rest = r2 - d0 * d0;
            if rest <= 0.0 {
                continue;
            }
            let mut reach1 = rest.sqrt().ceil() as i64;
            while reach1 > 0 && (reach1 * reach1) as f64 >= rest {
                reach1 -= 1;
            }
            let (lo1, hi1) = axis_range(self.center[1], reach1);
            if lo1 <= hi1 {
                let base = k0 as usize * domain.points_per_axis();
                runs.push(base + lo1 as usize..base + hi1 as usize + 1);
            }
        }
        runs
    }

    /// Number of cells inside the ball (and inside the domain).
    pub fn cell_count(&self, domain: &Domain) -> usize {
        self.runs(domain).iter().map(|r| r.len()).sum()
    }
}

/// Dyadic radii in cells: 1, 2, 4, ... below `G`, then `G` itself (`2L`).
pub fn radius_ladder(domain: &Domain) -> Vec<f64> {
    let g = domain.points_per_axis();
    let mut radii = Vec::new();
    let mut r = 1usize;
    while r < g {
        radii.push(r as f64);
        r *= 2;
    }
    radii.push(g as f64);
    radii
}

/// The finite set of balls over which Morrey, BMO and similar suprema are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct BallFamily {
    domain: Domain,
    balls: Vec<GridBall>,
}

impl BallFamily {
    /// Centers at every `stride`-th cell per axis (offset `stride / 2`), each
    /// carrying the full dyadic radius ladder. Centers vary slowest.
    pub fn new(domain: Domain, center_stride: usize) -> Result<Self, GridError> {
        if center_stride == 0 {
            return Err(GridError::Stride);
        }
        let g = domain.points_per_axis();
        let axis: Vec<usize> = (center_stride / 2..g).step_by(center_stride).collect();
        let ladder = radius_ladder(&domain);
        let mut balls = Vec::new();
        let second: &[usize] = if domain.dim() == 2 { &axis } else { &[0] };
        for &c0 in &axis {
            for &c1 in second {
                for &r in &ladder {
                    balls.push(GridBall::new([c0, c1], r));
                }
            }
        }
        Ok(Self { domain, balls })
    }

    pub fn from_balls(domain: Domain, balls: Vec<GridBall>) -> Result<Self, GridError> {
        if balls.is_empty() {
            return Err(GridError::EmptyFamily);
        }
        Ok(Self { domain, balls })
    }

    /// A single ball containing every cell of the domain.
    pub fn covering(domain: Domain) -> Self {
        let c = domain.points_per_axis() / 2;
        let center = if domain.dim() == 2 { [c, c] } else { [c, 0] };
        Self { domain, balls: vec![GridBall::new(center, domain.points_per_axis() as f64)] }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn balls(&self) -> &[GridBall] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// The same balls (in cell units) over another domain with the same layout.
    pub fn on_domain(&self, domain: Domain) -> Self {
        Self { domain, balls: self.balls.clone() }
    }
}

/// Parametric family a corpus member is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Indicator,
    PowerLaw,
    Gaussian,
    Steps,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Indicator, Family::PowerLaw, Family::Gaussian, Family::Steps];
}

/// Continuum description of a corpus member, independent of the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum MemberSpec {
    /// `amplitude` on the box `[lo, hi]`.
    Indicator { lo: Point, hi: Point, amplitude: f64 },
    /// `amplitude · max(|x-c|, h/2)^(-exponent)` on the ball of radius `radius`.
    PowerLaw { center: Point, radius: f64, exponent: f64, amplitude: f64 },
    /// Gaussian bump cut off outside the support window `[-window, window]^n`.
    Gaussian { center: Point, width: f64, amplitude: f64, window: f64 },
    /// Piecewise constant on a regular split of the box `[lo, hi]`; `levels`
    /// holds `pieces^n` values, row-major.
    Steps { lo: Point, hi: Point, pieces: usize, levels: Vec<f64> },
}

impl MemberSpec {
    pub fn family(&self) -> Family {
        match self {
            MemberSpec::Indicator { .. } => Family::Indicator,
            MemberSpec::PowerLaw { .. } => Family::PowerLaw,
            MemberSpec::Gaussian { .. } => Family::Gaussian,
            MemberSpec::Steps { .. } => Family::Steps,
        }
    }

    /// Value at `x` on a grid of spacing `h` in dimension `n`.
    pub fn value(&self, x: Point, n: usize, h: f64) -> f64 {
        let in_box = |lo: &Point, hi: &Point| (0..n).all(|a| x[a] >= lo[a] && x[a] <= hi[a]);
        match self {
            MemberSpec::Indicator { lo, hi, amplitude } => {
                if in_box(lo, hi) {
                    *amplitude
                } else {
                    0.0
                }
            }
            MemberSpec::PowerLaw { center, radius, exponent, amplitude } => {
                let d = norm([x[0] - center[0], x[1] - center[1]]);
                if d < *radius {
                    amplitude * d.max(0.5 * h).powf(-exponent)
                } else {
                    0.0
                }
            }
            MemberSpec::Gaussian { center, width, amplitude, window } => {
                if (0..n).any(|a| x[a].abs() > *window) {
                    return 0.0;
                }
                let d2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                amplitude * (-d2 / (2.0 * width * width)).exp()
            }
            MemberSpec::Steps { lo, hi, pieces, levels } => {
                if !in_box(lo, hi) {
                    return 0.0;
                }
                let slot = |a: usize| {
                    let t = (x[a] - lo[a]) / (hi[a] - lo[a]);
                    ((t * *pieces as f64) as usize).min(pieces - 1)
                };
                let k = if n == 1 { slot(0) } else { slot(0) * pieces + slot(1) };
                levels[k]
            }
        }
    }

    pub fn sample(&self, domain: &Domain) -> GridFunction {
        let (n, h) = (domain.dim(), domain.spacing());
        GridFunction::sample(*domain, |x| self.value(x, n, h))
            .expect("corpus members are finite by construction")
    }

    fn draw(family: Family, n: usize, window: f64, rng: &mut ChaCha8Rng) -> Self {
        let point = |rng: &mut ChaCha8Rng, half: f64| -> Point {
            let mut p = [0.0; 2];
            for c in p.iter_mut().take(n) {
                *c = rng.gen_range(-half..half);
            }
            p
        };
        let interval_box = |rng: &mut ChaCha8Rng| -> (Point, Point) {
            let (mut lo, mut hi) = ([0.0; 2], [0.0; 2]);
            for a in 0..n {
                let w = rng.gen_range(window / 8.0..window);
                lo[a] = rng.gen_range(-window..window - w);
                hi[a] = lo[a] + w;
            }
            (lo, hi)
        };
        match family {
            Family::Indicator => {
                let (lo, hi) = interval_box(rng);
                MemberSpec::Indicator { lo, hi, amplitude: rng.gen_range(0.5..2.0) }
            }
            Family::PowerLaw => {
                let center = point(rng, window / 2.0);
                let radius = rng.gen_range(window / 4.0..window / 2.0);
                let exponent = rng.gen_range(0.05..0.2) * n as f64;
                MemberSpec::PowerLaw { center, radius, exponent, amplitude: rng.gen_range(0.5..2.0) }
            }
            Family::Gaussian => {
                let center = point(rng, window / 2.0);
                let width = rng.gen_range(window / 16.0..window / 4.0);
                MemberSpec::Gaussian { center, width, amplitude: rng.gen_range(0.5..2.0), window }
            }
            Family::Steps => {
                let (lo, hi) = interval_box(rng);
                let pieces: usize = if n == 1 { rng.gen_range(3..=8) } else { rng.gen_range(2..=4) };
                let levels = (0..pieces.pow(n as u32)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                MemberSpec::Steps { lo, hi, pieces, levels }
            }
        }
    }

    /// A nearby member of the same family, still supported in `[-window, window]^n`.
    pub fn perturbed(&self, n: usize, window: f64, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let jitter = |rng: &mut ChaCha8Rng, v: f64, span: f64| v + scale * span * rng.gen_range(-1.0..1.0);
        let clamp_box = |lo: &mut Point, hi: &mut Point| {
            for a in 0..n {
                lo[a] = lo[a].clamp(-window, window);
                hi[a] = hi[a].clamp(-window, window);
                if hi[a] - lo[a] < window / 64.0 {
                    let mid = (0.5 * (lo[a] + hi[a])).clamp(-window + window / 128.0, window - window / 128.0);
                    lo[a] = mid - window / 128.0;
                    hi[a] = mid + window / 128.0;
                }
            }
        };
        match self {
            MemberSpec::Indicator { lo, hi, amplitude } => {
                let (mut lo, mut hi) = (*lo, *hi);
                for a in 0..n {
                    lo[a] = jitter(rng, lo[a], window);
                    hi[a] = jitter(rng, hi[a], window);
                }
                clamp_box(&mut lo, &mut hi);
                let amplitude = (amplitude * (1.0 + scale * rng.gen_range(-1.0..1.0))).max(1e-3);
                MemberSpec::Indicator { lo, hi, amplitude }
            }
            MemberSpec::PowerLaw { center, radius, exponent, amplitude } => {
                let mut center = *center;
                for c in center.iter_mut().take(n) {
                    *c = jitter(rng, *c, window).clamp(-window / 2.0, window / 2.0);
                }
                let radius = jitter(rng, *radius, window).clamp(window / 16.0, window / 2.0);
                let exponent = jitter(rng, *exponent, 0.2 * n as f64).clamp(0.01, 0.24 * n as f64);
                let amplitude = (amplitude * (1.0 + scale * rng.gen_range(-1.0..1.0))).max(1e-3);
                MemberSpec::PowerLaw { center, radius, exponent, amplitude }
            }
            MemberSpec::Gaussian { center, width, amplitude, window: w } => {
                let mut center = *center;
                for c in center.iter_mut().take(n) {
                    *c = jitter(rng, *c, window).clamp(-window / 2.0, window / 2.0);
                }
                let width = jitter(rng, *width, window / 4.0).clamp(window / 64.0, window / 2.0);
                let amplitude = (amplitude * (1.0 + scale * rng.gen_range(-1.0..1.0))).max(1e-3);
                MemberSpec::Gaussian { center, width, amplitude, window: *w }
            }
            MemberSpec::Steps { lo, hi, pieces, levels } => {
                let (mut lo, mut hi) = (*lo, *hi);
                for a in 0..n {
                    lo[a] = jitter(rng, lo[a], window);
                    hi[a] = jitter(rng, hi[a], window);
                }
                clamp_box(&mut lo, &mut hi);
                let levels = levels.iter().map(|&v| jitter(rng, v, 1.0).clamp(-2.0, 2.0)).collect();
                MemberSpec::Steps { lo, hi, pieces: *pieces, levels }
            }
        }
    }
}

/// Deterministic list of test functions drawn from the parametric families.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    seed: u64,
    window: f64,
    specs: Vec<MemberSpec>,
    members: Vec<GridFunction>,
}

impl Corpus {
    /// All four families, cycled in a fixed order.
    pub fn new(domain: &Domain, seed: u64, size: usize) -> Result<Self, GridError> {
        Self::with_families(domain, seed, size, &Family::ALL)
    }

    /// Members cycle through `families`; supports lie in `[-L/2, L/2]^n`.
    pub fn with_families(
        domain: &Domain,
        seed: u64,
        size: usize,
        families: &[Family],
    ) -> Result<Self, GridError> {
        if size == 0 || families.is_empty() {
            return Err(GridError::EmptyCorpus);
        }
        let window = domain.half_width() / 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs: Vec<MemberSpec> = (0..size)
            .map(|i| MemberSpec::draw(families[i % families.len()], domain.dim(), window, &mut rng))
            .collect();
        Ok(Self::from_specs(domain, seed, window, specs))
    }

    pub fn from_specs(domain: &Domain, seed: u64, window: f64, specs: Vec<MemberSpec>) -> Self {
        let members = specs.iter().map(|s| s.sample(domain)).collect();
        Self { seed, window, specs, members }
    }

    /// The same continuum members sampled on another domain.
    pub fn resampled(&self, domain: &Domain) -> Self {
        Self::from_specs(domain, self.seed, self.window, self.specs.clone())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn specs(&self) -> &[MemberSpec] {
        &self.specs
    }

    pub fn members(&self) -> &[GridFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_centers() {
        let d = Domain::new(1, 1.0, 4).unwrap();
        let c: Vec<f64> = (0..4).map(|i| d.center(i)[0]).collect();
        assert_eq!(c, vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(d.spacing(), 0.5);
    }

    #[test]
    fn two_dimensional_layout() {
        let d = Domain::new(2, 2.0, 8).unwrap();
        assert_eq!(d.len(), 64);
        assert_eq!(d.spacing(), 0.5);
        assert_eq!(d.coords(9), [1, 1]);
        assert_eq!(d.center(1), [-1.75, -1.25]);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(matches!(Domain::new(3, 1.0, 4), Err(GridError::Dimension(3))));
        assert!(matches!(Domain::new(1, 1.0, 5), Err(GridError::PointsPerAxis(5))));
        assert!(matches!(Domain::new(1, 1.0, 0), Err(GridError::PointsPerAxis(0))));
        assert!(Domain::new(1, 1.0, 1 << 17).is_err());
        assert!(Domain::new(1, -1.0, 4).is_err());
    }

    #[test]
    fn sample_reports_offending_cell() {
        let d = Domain::new(1, 1.0, 8).unwrap();
        let c0 = d.center(5)[0];
        match GridFunction::sample(d, |x| 1.0 / (x[0] - c0)) {
            Err(GridError::NonFinite { index, .. }) => assert_eq!(index, 5),
            other => panic!("expected failure, got {other:?}"),
        }
        let ok = GridFunction::sample(d, |x| x[0].abs().powf(-0.5)).unwrap();
        assert!(ok.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ladder_and_family() {
        let d = Domain::new(1, 1.0, 8).unwrap();
        assert_eq!(radius_ladder(&d), vec![1.0, 2.0, 4.0, 8.0]);
        let fam = BallFamily::new(d, 4).unwrap();
        let got: Vec<(usize, f64)> = fam.balls().iter().map(|b| (b.center_cell()[0], b.radius(&d))).collect();
        let h = 0.25;
        let want = vec![
            (2, h), (2, 2.0 * h), (2, 4.0 * h), (2, 2.0),
            (6, h), (6, 2.0 * h), (6, 4.0 * h), (6, 2.0),
        ];
        assert_eq!(got, want);
        assert_eq!(BallFamily::new(d, 8).unwrap().len(), 4);
        assert_eq!(BallFamily::new(d, 1).unwrap().len(), 8 * 4);
        assert!(BallFamily::new(d, 0).is_err());
    }

    #[test]
    fn ball_cells_match_bruteforce() {
        for &(n, g) in &[(1usize, 16usize), (2, 16)] {
            let d = Domain::new(n, 1.0, g).unwrap();
            for center in [[0, 0], [3, 7], [15, 15], [8, 2]] {
                let center = if n == 1 { [center[0], 0] } else { center };
                for r in [0.5, 1.0, 1.5, 2.0, 3.7, 5.0, 16.0, 40.0] {
                    let ball = GridBall::new(center, r);
                    let mut from_runs: Vec<usize> = ball.runs(&d).into_iter().flatten().collect();
                    from_runs.sort_unstable();
                    let brute: Vec<usize> = (0..d.len()).filter(|&i| ball.contains(&d, d.coords(i))).collect();
                    assert_eq!(from_runs, brute, "n={n} center={center:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn discrete_ball_never_exceeds_continuum() {
        for n in [1, 2] {
            let d = Domain::new(n, 1.0, 64).unwrap();
            for &r in &radius_ladder(&d) {
                let ball = GridBall::new([32, if n == 2 { 32 } else { 0 }], r);
                let discrete = ball.cell_count(&d) as f64 * d.cell_volume();
                assert!(discrete <= ball.measure(&d), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn mfl1_roundtrip() {
        let d = Domain::new(2, 0.3, 4).unwrap();
        let f = GridFunction::sample(d, |x| x[0] * 3.0 - x[1]).unwrap();
        let mut buf = Vec::new();
        f.write_mfl1(&mut buf).unwrap();
        assert!(buf.starts_with(b"MFL1 n=2 L=0.3 G=4\n"));
        assert_eq!(buf.len(), 19 + 16 * 8);
        let g = GridFunction::read_mfl1(&buf[..]).unwrap();
        assert_eq!(f, g);
        assert!(GridFunction::read_mfl1(&b"MFL2 n=1 L=1 G=2\n"[..]).is_err());
        assert!(GridFunction::read_mfl1(&b"MFL1 n=1 L=1 G=2\n1234"[..]).is_err());
    }

    #[test]
    fn corpus_is_deterministic_and_finite() {
        let d = Domain::new(1, 4.0, 128).unwrap();
        let a = Corpus::new(&d, 7, 12).unwrap();
        let b = Corpus::new(&d, 7, 12).unwrap();
        assert_eq!(a, b);
        let c = Corpus::new(&d, 8, 12).unwrap();
        assert_ne!(a.members(), c.members());
        for (spec, f) in a.specs().iter().zip(a.members()) {
            assert!(f.values().iter().all(|v| v.is_finite()));
            // supports stay inside [-L/2, L/2]
            for i in 0..d.len() {
                if d.center(i)[0].abs() > 2.0 {
                    assert_eq!(f.values()[i], 0.0, "{spec:?}");
                }
            }
        }
        assert_eq!(a.specs()[0].family(), Family::Indicator);
        assert_eq!(a.specs()[5].family(), Family::PowerLaw);
        assert!(Corpus::new(&d, 7, 0).is_err());
    }
}
