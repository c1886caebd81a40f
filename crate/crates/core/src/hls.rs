//! Hardy–Littlewood–Sobolev bilinear forms, Lieb's sharp constant and its
//! extremals, and the Olsen products `f · T(g⃗)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::exponents::{validate_with_kernels, ExponentSet, TheoremId, Violation};
use crate::grid::{BallFamily, Domain, GridError, GridFunction, Point};
use crate::kernel::{gauss_legendre, Kernel, KernelError, KernelVector};
use crate::norms::{lp_norm, morrey_norm, weak_lp_norm, weak_morrey_norm, NormError, Region};
use crate::operators::{
    eval_fractional_integral, offset_value, singular_cell_integral, OperatorError, OperatorSpec,
};
use crate::special::ln_gamma;

#[derive(Debug, Error)]
pub enum HlsError {
    #[error("λ = {lambda} outside (0, {n})")]
    Lambda { lambda: f64, n: usize },
    #[error("γ must be nonzero")]
    Gamma,
    #[error("functions live on different domains")]
    DomainMismatch,
    #[error("hypotheses of {theorem} fail: {}", .violations.iter().map(|v| v.explanation.as_str()).collect::<Vec<_>>().join("; "))]
    Hypotheses { theorem: TheoremId, violations: Vec<Violation> },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn check_lambda(n: usize, lambda: f64) -> Result<(), HlsError> {
    if lambda > 0.0 && lambda < n as f64 {
        Ok(())
    } else {
        Err(HlsError::Lambda { lambda, n })
    }
}

/// `∫∫ Ω(x - y) f(x) g(y) |x - y|^{-λ} dx dy` by a direct double midpoint sum.
///
/// The node `x = y` carries `Ω̄ ∫_{cell} |z|^{-λ} dz` with `Ω̄` the spherical
/// mean, as in the operator quadrature. `kernel = None` means Ω ≡ 1.
pub fn hls_form(f: &GridFunction, g: &GridFunction, lambda: f64, kernel: Option<&Kernel>) -> Result<f64, HlsError> {
    let domain = *f.domain();
    if *g.domain() != domain {
        return Err(HlsError::DomainMismatch);
    }
    let n = domain.dim();
    check_lambda(n, lambda)?;
    let one = Kernel::one(n);
    let kernel = kernel.unwrap_or(&one);
    let diagonal = singular_cell_integral(n, n as f64 - lambda) * offset_value(kernel, [0, 0], false)?;
    let (fv, gv) = (f.values(), g.values());
    let len = domain.len();
    // Ω(d) |d|^{-λ} for every offset, in cell units.
    let g_axis = domain.points_per_axis() as i64;
    let w = 2 * g_axis - 1;
    let weight: Vec<f64> = if n == 1 {
        (0..w)
            .map(|u| {
                let d = u - (g_axis - 1);
                if d == 0 {
                    Ok(diagonal)
                } else {
                    Ok(offset_value(kernel, [d, 0], false)? * (d.abs() as f64).powf(-lambda))
                }
            })
            .collect::<Result<_, KernelError>>()?
    } else {
        (0..w * w)
            .map(|u| {
                let d = [u / w - (g_axis - 1), u % w - (g_axis - 1)];
                if d == [0, 0] {
                    Ok(diagonal)
                } else {
                    let r2 = (d[0] * d[0] + d[1] * d[1]) as f64;
                    Ok(offset_value(kernel, d, false)? * r2.powf(-0.5 * lambda))
                }
            })
            .collect::<Result<_, KernelError>>()?
    };
    let offset = |i: usize, j: usize| -> usize {
        let (xi, yj) = (domain.coords(i), domain.coords(j));
        let d0 = xi[0] as i64 - yj[0] as i64 + g_axis - 1;
        let k = if n == 1 { d0 } else { d0 * w + (xi[1] as i64 - yj[1] as i64 + g_axis - 1) };
        k as usize
    };
    // Unordered pairs {i, j}, each contributing both orientations, so swapping
    // f and g only reorders commutative operations when Ω is even.
    let rows: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|i| {
            let mut s = weight[offset(i, i)] * (fv[i] * gv[i]);
            for j in i + 1..len {
                let a = fv[i] * gv[j];
                let b = fv[j] * gv[i];
                if a != 0.0 || b != 0.0 {
                    s += weight[offset(i, j)] * a + weight[offset(j, i)] * b;
                }
            }
            s
        })
        .collect();
    let h = domain.spacing();
    Ok(rows.iter().sum::<f64>() * h.powi(n as i32) * h.powf(n as f64 - lambda))
}

/// `C(n, λ) = π^{λ/2} Γ(n/2 - λ/2)/Γ(n - λ/2) · (Γ(n/2)/Γ(n))^{-1 + λ/n}`.
pub fn lieb_constant(n: usize, lambda: f64) -> Result<f64, HlsError> {
    check_lambda(n, lambda)?;
    let nf = n as f64;
    let ln = 0.5 * lambda * PI.ln() + ln_gamma(0.5 * (nf - lambda)) - ln_gamma(nf - 0.5 * lambda)
        + (lambda / nf - 1.0) * (ln_gamma(0.5 * nf) - ln_gamma(nf));
    Ok(ln.exp())
}

/// `A (γ² + |x - x₀|²)^{(λ - 2n)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremal {
    pub amplitude: f64,
    pub gamma: f64,
    pub center: Point,
}

impl Extremal {
    pub fn new(amplitude: f64, gamma: f64, center: Point) -> Result<Self, HlsError> {
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(HlsError::Gamma);
        }
        Ok(Self { amplitude, gamma, center })
    }

    /// The standard profile `(1 + |x|²)^{(λ - 2n)/2}`.
    pub fn standard() -> Self {
        Self { amplitude: 1.0, gamma: 1.0, center: [0.0, 0.0] }
    }

    pub fn value(&self, x: Point, n: usize, lambda: f64) -> f64 {
        let d2 = (x[0] - self.center[0]).powi(2) + if n == 2 { (x[1] - self.center[1]).powi(2) } else { 0.0 };
        self.amplitude * (self.gamma * self.gamma + d2).powf(0.5 * (lambda - 2.0 * n as f64))
    }
}

/// Samples an extremal on `domain`.
pub fn extremal(params: &Extremal, lambda: f64, domain: &Domain) -> Result<GridFunction, HlsError> {
    let n = domain.dim();
    check_lambda(n, lambda)?;
    Ok(GridFunction::sample(*domain, |x| params.value(x, n, lambda))?)
}

/// Gauss–Legendre rule mapped to `[a, b]`, split into panels that refine
/// geometrically towards `b`.
fn graded_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(order);
    let mut cuts = vec![a];
    for k in 1..panels {
        cuts.push(b - (b - a) * 10f64.powi(-(k as i32)));
    }
    cuts.push(b);
    let mut rule = Vec::new();
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (t, w) in nodes.iter().zip(&weights) {
            rule.push((mid + half * t, half * w));
        }
    }
    rule
}

/// `form(u, u, λ) / ‖u‖²_{L^{2n/(2n-λ)}}` for the standard extremal on
/// `[-L, L]^n`, with the parts of both integrals outside the box added back.
///
/// Outside the box `u` is replaced by its power tail where that is accurate
/// to `O(L^{-2})`. In one dimension the cross term (one variable inside, one
/// outside) is integrated numerically against the sampled profile; in two
/// dimensions it uses the far-field approximation `|x - y|^{-λ} ≈ |x|^{-λ}`
/// and the outside-outside term is dropped (it is `O(L^{λ-2n})`).
pub fn hls_sharpness_ratio(n: usize, lambda: f64, half_width: f64, points: usize) -> Result<f64, HlsError> {
    check_lambda(n, lambda)?;
    let domain = Domain::new(n, half_width, points)?;
    let u = extremal(&Extremal::standard(), lambda, &domain)?;
    let p = 2.0 * n as f64 / (2.0 * n as f64 - lambda);
    let l = half_width;
    let h = domain.spacing();
    let cell = h.powi(n as i32);

    let inside = hls_form(&u, &u, lambda, None)?;
    // u^p = (1 + |x|²)^{-n}
    let box_p: f64 = u.values().iter().map(|v| v.powf(p)).sum::<f64>() * cell;

    let (tail_p, cross, outer) = if n == 1 {
        let tail_p = 2.0 * (0.5 * PI - l.atan());
        // Cross term: 2 ∫_{|x| > L} u(x) V(x) dx with V(x) = ∫_box u(y) |x - y|^{-λ} dy,
        // by symmetry 4 ∫_L^∞, substituted x = L/t.
        let centers: Vec<f64> = (0..points).map(|k| domain.axis_center(k)).collect();
        let uv = u.values();
        let v_at = |x: f64| -> f64 { centers.iter().zip(uv).map(|(y, w)| w * (x - y).abs().powf(-lambda)).sum::<f64>() * h };
        let rule = graded_rule(0.0, 1.0, 5, 32);
        let half: f64 = rule
            .par_iter()
            .map(|&(t, w)| {
                let x = l / t;
                w * Extremal::standard().value([x, 0.0], 1, lambda) * v_at(x) * l / (t * t)
            })
            .sum();
        let cross = 2.0 * 2.0 * half;
        // Outside-outside with the power tail |x|^{λ-2}: same-side and
        // opposite-side pairs reduce to ∫∫_{[0,1]²} |a - b|^{-λ} and (a + b)^{-λ}.
        let denom = (1.0 - lambda) * (2.0 - lambda);
        let same = 2.0 / denom;
        let opposite = (2f64.powf(2.0 - lambda) - 2.0) / denom;
        let outer = l.powf(lambda - 2.0) * 2.0 * (same + opposite);
        (tail_p, cross, outer)
    } else {
        // Outside the square [-L, L]^2 in polar form, radius from ρ(θ) = L / max(|cos|, |sin|).
        let rule = graded_rule(0.0, 0.25 * PI, 1, 64);
        let radial = graded_rule(0.0, 1.0, 5, 24);
        let mut tail_p = 0.0;
        let mut far = 0.0;
        for &(theta, w) in &rule {
            let rho = l / theta.cos();
            tail_p += w * 0.5 / (1.0 + rho * rho);
            // ∫_ρ^∞ (1 + r²)^{(λ-4)/2} r^{1-λ} dr with r = ρ/t
            let inner: f64 = radial
                .iter()
                .map(|&(t, wt)| {
                    let r = rho / t;
                    wt * (1.0 + r * r).powf(0.5 * (lambda - 4.0)) * r.powf(1.0 - lambda) * rho / (t * t)
                })
                .sum();
            far += w * inner;
        }
        // Eight symmetric octants.
        let mass: f64 = u.values().iter().sum::<f64>() * cell;
        (8.0 * tail_p, 2.0 * 8.0 * far * mass, 0.0)
    };

    let numerator = inside + cross + outer;
    let norm_p = (box_p + tail_p).powf(1.0 / p);
    Ok(numerator / (norm_p * norm_p))
}

/// `f · T_{Ω,α;m}(g⃗)` after checking the Olsen hypotheses of `theorem`.
pub fn olsen_product(
    theorem: TheoremId,
    f: &GridFunction,
    g: &[&GridFunction],
    exps: &ExponentSet,
    kernels: &KernelVector,
) -> Result<GridFunction, HlsError> {
    let verdict = validate_with_kernels(theorem, exps, kernels);
    if !verdict.violated.is_empty() {
        return Err(HlsError::Hypotheses { theorem, violations: verdict.violated });
    }
    let spec = OperatorSpec::fractional_integral(exps.alpha(), kernels.clone())?;
    let t = eval_fractional_integral(&spec, g, f.domain())?.output;
    Ok(f.product(&t)?)
}

/// Lebesgue and Morrey functionals of an Olsen product at exponent `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsenNorms {
    pub lebesgue: f64,
    pub weak_lebesgue: f64,
    pub morrey: f64,
    pub weak_morrey: f64,
}

pub fn olsen_norms(product: &GridFunction, r: f64, kappa: f64, family: &BallFamily) -> Result<OlsenNorms, HlsError> {
    Ok(OlsenNorms {
        lebesgue: lp_norm(product, r, &Region::Whole)?,
        weak_lebesgue: weak_lp_norm(product, r, &Region::Whole)?,
        morrey: morrey_norm(product, r, kappa, family)?,
        weak_morrey: weak_morrey_norm(product, r, kappa, family)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn lieb_closed_forms() {
        let c = lieb_constant(2, 1.0).unwrap();
        assert!((c - 2.0 * PI.sqrt()).abs() < 1e-12, "{c}");
        let c = lieb_constant(1, 0.5).unwrap();
        assert!((c - gamma(0.25) / gamma(0.75)).abs() < 1e-12);
        assert!(lieb_constant(1, 1.0).is_err());
    }

    #[test]
    fn extremal_profile() {
        let e = Extremal::standard();
        assert_eq!(e.value([0.0, 0.0], 1, 0.5), 1.0);
        assert_eq!(e.value([0.7, 0.0], 1, 0.5), e.value([-0.7, 0.0], 1, 0.5));
        assert!(Extremal::new(1.0, 0.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn form_of_zero_is_zero() {
        let d = Domain::new(1, 2.0, 32).unwrap();
        let f = GridFunction::sample(d, |x| (-x[0] * x[0]).exp()).unwrap();
        assert_eq!(hls_form(&f, &GridFunction::zeros(d), 0.5, None).unwrap(), 0.0);
    }

    #[test]
    fn duality_with_operator() {
        for (n, g, kernel) in [(1, 48, "const:1"), (1, 40, "sign:1"), (2, 12, "angpow:0.5:1")] {
            let d = Domain::new(n, 2.0, g).unwrap();
            let f = GridFunction::sample(d, |x| (-(x[0] - 0.3).powi(2) - x[1] * x[1]).exp()).unwrap();
            let h = GridFunction::sample(d, |x| if x[0].abs() < 1.0 { 1.0 + x[0] } else { 0.0 }).unwrap();
            let k = Kernel::parse(kernel, n).unwrap();
            let lambda = 0.6 * n as f64;
            let form = hls_form(&f, &h, lambda, Some(&k)).unwrap();
            let spec = OperatorSpec::fractional_integral(n as f64 - lambda, KernelVector::new(vec![k]).unwrap()).unwrap();
            let t = eval_fractional_integral(&spec, &[&h], &d).unwrap().output;
            let dual: f64 = f.values().iter().zip(t.values()).map(|(a, b)| a * b).sum::<f64>() * d.cell_volume();
            assert!((form - dual).abs() <= 1e-10 * form.abs().max(1.0), "{kernel}: {form} vs {dual}");
        }
    }

    #[test]
    fn symmetric_for_even_kernel() {
        let d = Domain::new(1, 2.0, 40).unwrap();
        let f = GridFunction::sample(d, |x| (-x[0] * x[0]).exp()).unwrap();
        let g = GridFunction::sample(d, |x| if x[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(hls_form(&f, &g, 0.4, None).unwrap(), hls_form(&g, &f, 0.4, None).unwrap());
    }

    #[test]
    fn small_sharpness_ratio_is_below_constant() {
        let r = hls_sharpness_ratio(1, 0.5, 6.0, 256).unwrap();
        let c = lieb_constant(1, 0.5).unwrap();
        assert!(r < c && r > 0.9 * c, "{r} vs {c}");
    }
}

