//! Lebesgue, weak Lebesgue, Morrey, weak Morrey, Luxemburg `L^p log L`,
//! `(L log L)^{p,κ}` and BMO functionals of grid functions.
//!
//! Integrals are midpoint sums with weight `h^n`. Morrey-type prefactors use
//! the continuum ball measure `v_n r^n`; BMO averages use cell counts.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{BallFamily, GridBall, GridFunction};
use crate::tolerances::LUXEMBURG_BRACKET;

#[derive(Debug, Error, PartialEq)]
pub enum NormError {
    #[error("integrability exponent p = {0} out of range")]
    Exponent(f64),
    #[error("Morrey parameter κ = {0} outside [0, 1]")]
    Kappa(f64),
    #[error("region contains no cells")]
    EmptyRegion,
    #[error("ball family and function live on different domains")]
    DomainMismatch,
    #[error("Luxemburg functional is not finite")]
    NonFinite,
}

/// Where a norm is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Whole,
    Ball(GridBall),
}

/// Indices of the cells of a region, as contiguous runs.
fn region_runs(f: &GridFunction, region: &Region) -> Vec<std::ops::Range<usize>> {
    match region {
        Region::Whole => vec![0..f.len()],
        Region::Ball(b) => b.runs(f.domain()),
    }
}

/// Discrete measure `h^n · #cells` of a region.
pub fn region_measure(f: &GridFunction, region: &Region) -> f64 {
    let count: usize = region_runs(f, region).iter().map(|r| r.len()).sum();
    count as f64 * f.domain().cell_volume()
}

fn check_p(p: f64, allow_inf: bool) -> Result<(), NormError> {
    if p >= 1.0 && (p.is_finite() || allow_inf) {
        Ok(())
    } else {
        Err(NormError::Exponent(p))
    }
}

fn check_family(f: &GridFunction, family: &BallFamily) -> Result<(), NormError> {
    if family.domain() != f.domain() {
        return Err(NormError::DomainMismatch);
    }
    Ok(())
}

fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else {
        v.abs().powf(p)
    }
}

/// `(h^n Σ_region |f|^p)^{1/p}`, or the maximum of |f| for `p = ∞`.
pub fn lp_norm(f: &GridFunction, p: f64, region: &Region) -> Result<f64, NormError> {
    check_p(p, true)?;
    let runs = region_runs(f, region);
    if runs.iter().all(|r| r.is_empty()) {
        return Err(NormError::EmptyRegion);
    }
    let v = f.values();
    if p.is_infinite() {
        return Ok(runs.into_iter().flat_map(|r| v[r].iter()).fold(0.0, |m, x| m.max(x.abs())));
    }
    let sum: f64 = runs.into_iter().map(|r| v[r].iter().map(|&x| pow_abs(x, p)).sum::<f64>()).sum();
    Ok((f.domain().cell_volume() * sum).powf(1.0 / p))
}

/// `sup_λ λ m({|f| > λ})^{1/p}` over the region, by exact enumeration of levels.
pub fn weak_lp_norm(f: &GridFunction, p: f64, region: &Region) -> Result<f64, NormError> {
    check_p(p, false)?;
    let runs = region_runs(f, region);
    if runs.iter().all(|r| r.is_empty()) {
        return Err(NormError::EmptyRegion);
    }
    let v = f.values();
    let mut levels: Vec<f64> =
        runs.into_iter().flat_map(|r| v[r].iter().map(|x| x.abs())).filter(|&x| x > 0.0).collect();
    Ok(weak_from_levels(&mut levels, f.domain().cell_volume(), p))
}

/// As λ increases to a level `v`, the set `{|f| > λ}` is every cell at or above `v`.
fn weak_from_levels(levels: &mut [f64], cell_volume: f64, p: f64) -> f64 {
    levels.sort_unstable_by(|a, b| b.total_cmp(a));
    levels
        .iter()
        .enumerate()
        .map(|(j, &v)| v * ((j + 1) as f64 * cell_volume).powf(1.0 / p))
        .fold(0.0, f64::max)
}

fn ball_power_sum(powered: &[f64], ball: &GridBall, f: &GridFunction) -> f64 {
    ball.runs(f.domain()).into_iter().map(|r| powered[r].iter().sum::<f64>()).sum()
}

/// `max_B (m(B)^{-κ} ∫_B |f|^p)^{1/p}` over the family.
pub fn morrey_norm(f: &GridFunction, p: f64, kappa: f64, family: &BallFamily) -> Result<f64, NormError> {
    check_p(p, false)?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(NormError::Kappa(kappa));
    }
    check_family(f, family)?;
    let powered: Vec<f64> = f.values().iter().map(|&x| pow_abs(x, p)).collect();
    let cv = f.domain().cell_volume();
    Ok(family
        .balls()
        .par_iter()
        .map(|b| {
            let mb = b.measure(f.domain());
            (mb.powf(-kappa) * cv * ball_power_sum(&powered, b, f)).powf(1.0 / p)
        })
        .reduce(|| 0.0, f64::max))
}

/// `max_B m(B)^{-κ/p} ‖f χ_B‖_{L^{p,∞}}` over the family.
pub fn weak_morrey_norm(f: &GridFunction, p: f64, kappa: f64, family: &BallFamily) -> Result<f64, NormError> {
    check_p(p, false)?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(NormError::Kappa(kappa));
    }
    check_family(f, family)?;
    let balls = family.balls();
    let values: Result<Vec<f64>, NormError> = balls
        .par_iter()
        .map(|b| Ok(b.measure(f.domain()).powf(-kappa / p) * weak_lp_norm(f, p, &Region::Ball(*b))?))
        .collect();
    Ok(values?.into_iter().fold(0.0, f64::max))
}

/// `inf{λ > 0 : ∫_region (|f|/λ)^p (1 + log⁺(|f|/λ)) ≤ 1}` by bisection.
///
/// The returned value is the upper end of the final bracket, so the
/// functional is at most one there.
pub fn luxemburg_norm(f: &GridFunction, p: f64, region: &Region) -> Result<f64, NormError> {
    check_p(p, false)?;
    let runs = region_runs(f, region);
    let v = f.values();
    let vals: Vec<f64> = runs.into_iter().flat_map(|r| v[r].iter().map(|x| x.abs())).filter(|&x| x > 0.0).collect();
    let cv = f.domain().cell_volume();
    let max = vals.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    let phi = |lambda: f64| -> f64 {
        cv * vals
            .iter()
            .map(|&x| {
                let t = x / lambda;
                let tp = if p == 1.0 { t } else { t.powf(p) };
                if t > 1.0 {
                    tp * (1.0 + t.ln())
                } else {
                    tp
                }
            })
            .sum::<f64>()
    };
    let measure = region_measure(f, region);
    let mut hi = max * (1.0 + measure);
    let mut lo = f64::MIN_POSITIVE + max * 1e-16;
    if !phi(hi).is_finite() {
        return Err(NormError::NonFinite);
    }
    while hi - lo > LUXEMBURG_BRACKET * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `max_B m(B)^{-κ/p} ‖f‖_{L^p log L(B)}` over the family.
pub fn llogl_morrey_norm(f: &GridFunction, p: f64, kappa: f64, family: &BallFamily) -> Result<f64, NormError> {
    check_p(p, false)?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(NormError::Kappa(kappa));
    }
    check_family(f, family)?;
    let values: Result<Vec<f64>, NormError> = family
        .balls()
        .par_iter()
        .map(|b| Ok(b.measure(f.domain()).powf(-kappa / p) * luxemburg_norm(f, p, &Region::Ball(*b))?))
        .collect();
    Ok(values?.into_iter().fold(0.0, f64::max))
}

/// Mean oscillation of `f` over one ball, with cell-count averages.
pub fn mean_oscillation(f: &GridFunction, ball: &GridBall) -> f64 {
    let v = f.values();
    let runs = ball.runs(f.domain());
    let count: usize = runs.iter().map(|r| r.len()).sum();
    if count == 0 {
        return 0.0;
    }
    // Averaging deviations from a reference value keeps constants exact.
    let reference = v[runs[0].start];
    let shift: f64 = runs.iter().map(|r| v[r.clone()].iter().map(|x| x - reference).sum::<f64>()).sum();
    let mean = reference + shift / count as f64;
    runs.into_iter().map(|r| v[r].iter().map(|x| (x - mean).abs()).sum::<f64>()).sum::<f64>() / count as f64
}

/// `max_B (1/|B|) Σ_B |f - f_B|` over the family.
pub fn bmo_norm(f: &GridFunction, family: &BallFamily) -> Result<f64, NormError> {
    check_family(f, family)?;
    Ok(family.balls().par_iter().map(|b| mean_oscillation(f, b)).reduce(|| 0.0, f64::max))
}

/// A norm together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Lp { p: f64, region: Region },
    WeakLp { p: f64, region: Region },
    Morrey { p: f64, kappa: f64, family: BallFamily },
    WeakMorrey { p: f64, kappa: f64, family: BallFamily },
    Luxemburg { p: f64, region: Region },
    LlogLMorrey { p: f64, kappa: f64, family: BallFamily },
    Bmo { family: BallFamily },
}

impl NormSpec {
    pub fn eval(&self, f: &GridFunction) -> Result<f64, NormError> {
        match self {
            NormSpec::Lp { p, region } => lp_norm(f, *p, region),
            NormSpec::WeakLp { p, region } => weak_lp_norm(f, *p, region),
            NormSpec::Morrey { p, kappa, family } => morrey_norm(f, *p, *kappa, family),
            NormSpec::WeakMorrey { p, kappa, family } => weak_morrey_norm(f, *p, *kappa, family),
            NormSpec::Luxemburg { p, region } => luxemburg_norm(f, *p, region),
            NormSpec::LlogLMorrey { p, kappa, family } => llogl_morrey_norm(f, *p, *kappa, family),
            NormSpec::Bmo { family } => bmo_norm(f, family),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn indicator(d: Domain, lo: f64, hi: f64, c: f64) -> GridFunction {
        GridFunction::sample(d, |x| if x[0] >= lo && x[0] < hi { c } else { 0.0 }).unwrap()
    }

    #[test]
    fn lebesgue_examples() {
        let d = Domain::new(1, 1.0, 64).unwrap();
        let one = GridFunction::constant(d, 1.0);
        assert!((lp_norm(&one, 2.0, &Region::Whole).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let f = GridFunction::sample(d, |x| x[0]).unwrap();
        assert_eq!(lp_norm(&f.scaled(2.0), 3.0, &Region::Whole).unwrap(), 2.0 * lp_norm(&f, 3.0, &Region::Whole).unwrap());
        assert_eq!(lp_norm(&f, f64::INFINITY, &Region::Whole).unwrap(), 1.0 - 1.0 / 64.0);
        assert!(lp_norm(&f, 0.5, &Region::Whole).is_err());
    }

    #[test]
    fn weak_norm_of_indicator() {
        let d = Domain::new(1, 1.0, 64).unwrap();
        let f = indicator(d, 0.0, 0.5, 1.0);
        let w = weak_lp_norm(&f, 2.0, &Region::Whole).unwrap();
        assert!((w - 0.5f64.sqrt()).abs() < 1e-15);
        // a two-level function: the sup is at one of the levels
        let g = GridFunction::sample(d, |x| if x[0] < 0.0 { 1.0 } else { 3.0 }).unwrap();
        let w = weak_lp_norm(&g, 1.0, &Region::Whole).unwrap();
        assert!((w - 3.0).abs() < 1e-14); // max(3·1, 1·2)
    }

    #[test]
    fn morrey_constant_and_covering() {
        let d = Domain::new(1, 1.0, 32).unwrap();
        let one = GridFunction::constant(d, 1.0);
        let fam = BallFamily::new(d, 4).unwrap();
        let got = morrey_norm(&one, 2.0, 0.5, &fam).unwrap();
        // constant: each ball gives (m(B)^{-κ} |B ∩ domain|)^{1/p}; checked ball by ball
        let want = fam
            .balls()
            .iter()
            .map(|b| (b.measure(&d).powf(-0.5) * b.cell_count(&d) as f64 * d.cell_volume()).sqrt())
            .fold(0.0, f64::max);
        assert_eq!(got, want);
        let f = GridFunction::sample(d, |x| x[0].sin()).unwrap();
        let cover = BallFamily::covering(d);
        let ball = cover.balls()[0];
        assert_eq!(
            morrey_norm(&f, 3.0, 0.0, &cover).unwrap(),
            lp_norm(&f, 3.0, &Region::Ball(ball)).unwrap()
        );
        assert_eq!(
            weak_morrey_norm(&f, 3.0, 0.0, &cover).unwrap(),
            weak_lp_norm(&f, 3.0, &Region::Whole).unwrap()
        );
    }

    #[test]
    fn luxemburg_indicator_of_unit_measure() {
        let d = Domain::new(1, 2.0, 64).unwrap();
        let f = indicator(d, 0.0, 1.0, 3.0);
        let lux = luxemburg_norm(&f, 2.0, &Region::Whole).unwrap();
        assert!((lux - 3.0).abs() < 1e-9 * 3.0, "{lux}");
        assert_eq!(luxemburg_norm(&GridFunction::zeros(d), 2.0, &Region::Whole).unwrap(), 0.0);
    }

    #[test]
    fn bmo_of_constant_is_exactly_zero() {
        let d = Domain::new(2, 1.0, 16).unwrap();
        let c = GridFunction::constant(d, 0.1);
        let fam = BallFamily::new(d, 3).unwrap();
        assert_eq!(bmo_norm(&c, &fam).unwrap(), 0.0);
    }

    #[test]
    fn bmo_of_sign() {
        let d = Domain::new(1, 1.0, 64).unwrap();
        let f = GridFunction::sample(d, |x| x[0].signum()).unwrap();
        let ball = GridBall::new([32, 0], 16.0);
        let osc = mean_oscillation(&f, &ball);
        // 31 cells: 16 on the right, 15 on the left
        let count = ball.cell_count(&d) as f64;
        assert!((osc - (1.0 - 1.0 / (count * count))).abs() < 1e-14, "{osc}");
    }
}
