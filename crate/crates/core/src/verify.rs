//! Theorem checkers: left and right sides of each registered inequality on
//! concrete inputs, empirical constants over corpora, adversarial search,
//! and the suite of inequalities that hold exactly in the discrete model.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::exponents::{validate_with_kernels, ExponentError, ExponentSet, OperatorFamily, TheoremId, Violation};
use crate::grid::{BallFamily, Corpus, Domain, GridBall, GridError, GridFunction, MemberSpec};
use crate::hls::{hls_form, HlsError};
use crate::kernel::{KernelError, KernelVector};
use crate::norms::{
    bmo_norm, llogl_morrey_norm, lp_norm, luxemburg_norm, morrey_norm, weak_lp_norm, weak_morrey_norm, NormError,
    Region,
};
use crate::operators::{
    eval_fractional_integral, eval_fractional_maximal, eval_lerner_maximal, OperatorError, OperatorSpec,
};
use crate::tolerances::{within_exact, REFINEMENT_DRIFT};

/// A check declined because the exponents or kernels break the statement's hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Refusal {
    pub theorem: TheoremId,
    pub violations: Vec<Violation>,
}

impl Refusal {
    pub fn constraint_names(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.constraint.name()).collect()
    }
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} refused:", self.theorem)?;
        for v in &self.violations {
            write!(f, " [{}] {};", v.constraint, v.explanation)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{0}")]
    Refused(Refusal),
    #[error("{theorem} needs {expected} functions, got {got}")]
    Arity { theorem: TheoremId, expected: usize, got: usize },
    #[error("{0} needs the extra function f")]
    MissingOuter(TheoremId),
    #[error("kernel vector has {got} kernels, expected {expected}")]
    KernelCount { expected: usize, got: usize },
    #[error("corpus has {got} members, need at least {needed}")]
    EmptyCorpus { needed: usize, got: usize },
    #[error("every corpus tuple has a zero right-hand side")]
    AllZero,
    #[error("right-hand side vanishes while the left-hand side is {lhs}")]
    DegenerateRhs { lhs: f64 },
    #[error("budget must be at least 1")]
    Budget,
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Hls(#[from] HlsError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Shared discretization for a batch of checks.
#[derive(Debug, Clone)]
pub struct CheckSetup {
    domain: Domain,
    kernels: KernelVector,
    stride: usize,
    family: BallFamily,
    local_ball: GridBall,
    region: Region,
}

impl CheckSetup {
    /// Ball family with centers every `stride` cells; the local ball for the
    /// `L log L` statements is centered mid-box with radius `L/2`.
    pub fn new(domain: Domain, kernels: KernelVector, stride: usize) -> Result<Self, VerifyError> {
        if kernels.dim() != domain.dim() {
            return Err(OperatorError::DomainMismatch.into());
        }
        let family = BallFamily::new(domain, stride)?;
        let g = domain.points_per_axis();
        let c = g / 2;
        let center = if domain.dim() == 2 { [c, c] } else { [c, 0] };
        let local_ball = GridBall::new(center, (g / 4).max(1) as f64);
        Ok(Self { domain, kernels, stride, family, local_ball, region: Region::Whole })
    }

    /// Lebesgue norms (strong and weak) are taken over `region` instead of the whole box.
    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub fn with_kernels(mut self, kernels: KernelVector) -> Self {
        self.kernels = kernels;
        self
    }

    pub fn with_local_ball(mut self, ball: GridBall) -> Self {
        self.local_ball = ball;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kernels(&self) -> &KernelVector {
        &self.kernels
    }

    pub fn family(&self) -> &BallFamily {
        &self.family
    }

    pub fn local_ball(&self) -> &GridBall {
        &self.local_ball
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Twice as many cells on the same box; balls keep their physical centers and radii.
    pub fn refined(&self) -> Result<Self, VerifyError> {
        let domain = self.domain.refined()?;
        let double = |b: &GridBall| {
            let c = b.center_cell();
            let c1 = if domain.dim() == 2 { 2 * c[1] + 1 } else { 0 };
            GridBall::new([2 * c[0] + 1, c1], 2.0 * b.radius_cells())
        };
        let region = match &self.region {
            Region::Whole => Region::Whole,
            Region::Ball(b) => Region::Ball(double(b)),
        };
        Ok(Self {
            domain,
            kernels: self.kernels.clone(),
            stride: 2 * self.stride,
            family: BallFamily::new(domain, 2 * self.stride)?,
            local_ball: double(&self.local_ball),
            region,
        })
    }

    /// Same cells on `[-tL, tL]^n`.
    pub fn dilated(&self, factor: f64) -> Result<Self, VerifyError> {
        let domain = self.domain.dilated(factor)?;
        Ok(Self {
            domain,
            kernels: self.kernels.clone(),
            stride: self.stride,
            family: self.family.on_domain(domain),
            local_ball: self.local_ball,
            region: self.region.clone(),
        })
    }
}

/// Functions fed to one check: `inner` are `f_1..f_m` (or `g_1..g_m` in
/// product statements), `outer` the extra `f` of product and HLS statements.
#[derive(Debug, Clone, Copy)]
pub struct Operands<'a> {
    pub inner: &'a [&'a GridFunction],
    pub outer: Option<&'a GridFunction>,
}

/// One inequality instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub theorem: TheoremId,
    pub exps: ExponentSet,
    pub function_ids: Vec<usize>,
    pub lhs: f64,
    pub rhs_without_constant: f64,
    /// `lhs / rhs`; 0 when both sides vanish.
    pub ratio: f64,
    pub h: f64,
    pub notes: String,
}

/// Empirical constant of a statement over a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimate {
    pub theorem: TheoremId,
    pub exps: ExponentSet,
    pub c_emp: f64,
    /// Both sides at the argmax tuple.
    pub lhs: f64,
    pub rhs: f64,
    pub argmax_ids: Vec<usize>,
    pub argmax_specs: Vec<MemberSpec>,
    /// Ratio of every tuple, in tuple order.
    pub ratios: Vec<f64>,
    pub h: f64,
    pub refinement: Option<Refinement>,
    /// Accepted ratios of an adversarial search, starting from the corpus maximum.
    pub trajectory: Vec<f64>,
}

/// The argmax tuple re-evaluated at half the spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub h: f64,
    pub ratio_h: f64,
    pub h_half: f64,
    pub ratio_h_half: f64,
}

impl Refinement {
    /// `ratio(h/2) / ratio(h)`.
    pub fn drift(&self) -> f64 {
        self.ratio_h_half / self.ratio_h
    }

    pub fn is_stable(&self) -> bool {
        (self.drift() - 1.0).abs() <= REFINEMENT_DRIFT
    }
}

/// The explicit constant chained through the proofs of the critical
/// sup-norm statements, in the discrete model with a stride-1 family.
///
/// 3.2 and 5.2: `∏ ‖Ω_i‖_{L^s(S)}` (normalized sphere measure), from Hölder
/// in each average. 5.5 additionally passes through the weak-to-Morrey
/// embedding at `p̃_i = (1 - κ̃) p_i`, with `κ̃ = 1 - s'/min p_i` the choice
/// minimizing `∏ (1/κ̃)^{1/p̃_i}`.
pub fn explicit_constant(theorem: TheoremId, exps: &ExponentSet, kernels: &KernelVector) -> Result<Option<f64>, VerifyError> {
    let chain = || -> Result<f64, VerifyError> {
        let mut c = 1.0;
        for k in kernels.kernels() {
            c *= k.normalized_sphere_norm(exps.s())?;
        }
        Ok(c)
    };
    Ok(match theorem {
        TheoremId::MaximalCritical | TheoremId::MaximalMorreyCritical => Some(chain()?),
        TheoremId::MaximalCriticalWeakData => {
            let kt = 1.0 - exps.s_prime() / exps.min_p();
            if kt <= 0.0 {
                return Ok(None);
            }
            let embed: f64 = exps.p_list().iter().map(|p| (1.0 / kt).powf(1.0 / ((1.0 - kt) * p))).product();
            Some(chain()? * embed)
        }
        _ => None,
    })
}

/// `check` without the hypothesis audit: evaluates both sides as stated.
pub fn evaluate_sides(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    ops: Operands<'_>,
) -> Result<(f64, f64), VerifyError> {
    let m = exps.m();
    if ops.inner.len() != m {
        return Err(VerifyError::Arity { theorem, expected: m, got: ops.inner.len() });
    }
    let family_kind = theorem.operator();
    let needs_kernels = !matches!(family_kind, OperatorFamily::LernerMaximal);
    let expected_kernels = if family_kind == OperatorFamily::HlsForm { 1 } else { m };
    if needs_kernels && setup.kernels.len() != expected_kernels {
        return Err(VerifyError::KernelCount { expected: expected_kernels, got: setup.kernels.len() });
    }
    let outer = match (theorem.takes_outer_function(), ops.outer) {
        (true, Some(f)) => Some(f),
        (true, None) => return Err(VerifyError::MissingOuter(theorem)),
        (false, _) => None,
    };
    let domain = setup.domain;
    let g = ops.inner;
    let p = exps.p_list();
    let kappa = exps.kappa();
    let fam = &setup.family;
    let region = &setup.region;
    let endpoints = exps.endpoint_indices();
    let ball = Region::Ball(setup.local_ball);

    let lebesgue = |fs: &[&GridFunction], region: &Region| -> Result<f64, VerifyError> {
        let mut prod = 1.0;
        for (f, &pi) in fs.iter().zip(p) {
            prod *= lp_norm(f, pi, region)?;
        }
        Ok(prod)
    };
    let weak_lebesgue = |fs: &[&GridFunction]| -> Result<f64, VerifyError> {
        let mut prod = 1.0;
        for (f, &pi) in fs.iter().zip(p) {
            prod *= weak_lp_norm(f, pi, region)?;
        }
        Ok(prod)
    };
    let morrey = |fs: &[&GridFunction]| -> Result<f64, VerifyError> {
        let mut prod = 1.0;
        for (f, &pi) in fs.iter().zip(p) {
            prod *= morrey_norm(f, pi, kappa, fam)?;
        }
        Ok(prod)
    };
    // L log L factors at the endpoint indices, plain factors elsewhere.
    let local_log = |fs: &[&GridFunction]| -> Result<f64, VerifyError> {
        let mut prod = 1.0;
        for (i, (f, &pi)) in fs.iter().zip(p).enumerate() {
            prod *= if endpoints.contains(&i) { luxemburg_norm(f, pi, &ball)? } else { lp_norm(f, pi, &ball)? };
        }
        Ok(prod)
    };
    let morrey_log = |fs: &[&GridFunction]| -> Result<f64, VerifyError> {
        let mut prod = 1.0;
        for (i, (f, &pi)) in fs.iter().zip(p).enumerate() {
            prod *= if endpoints.contains(&i) {
                llogl_morrey_norm(f, pi, kappa, fam)?
            } else {
                morrey_norm(f, pi, kappa, fam)?
            };
        }
        Ok(prod)
    };
    let integral = |fs: &[&GridFunction]| -> Result<GridFunction, VerifyError> {
        let spec = OperatorSpec::fractional_integral(exps.alpha(), setup.kernels.clone())?;
        Ok(eval_fractional_integral(&spec, fs, &domain)?.output)
    };
    let maximal = |fs: &[&GridFunction]| -> Result<GridFunction, VerifyError> {
        let spec = OperatorSpec::fractional_maximal(exps.alpha(), setup.kernels.clone())?;
        Ok(eval_fractional_maximal(&spec, fs, &domain)?.output)
    };
    let restricted: Vec<GridFunction> = g.iter().map(|f| f.restricted(&setup.local_ball)).collect();
    let restricted: Vec<&GridFunction> = restricted.iter().collect();
    let q = || exps.q().finite().ok_or(NormError::Exponent(f64::INFINITY));
    let r = || exps.r().finite().ok_or(NormError::Exponent(f64::INFINITY));

    use TheoremId as T;
    let sides = match theorem {
        T::LebesgueStrong => (lp_norm(&integral(g)?, q()?, region)?, lebesgue(g, region)?),
        T::LebesgueWeak => (weak_lp_norm(&integral(g)?, q()?, region)?, lebesgue(g, region)?),
        T::LocalLogEndpoint => (lp_norm(&integral(&restricted)?, q()?, &ball)?, local_log(g)?),
        T::MaximalStrong => (lp_norm(&maximal(g)?, q()?, region)?, lebesgue(g, region)?),
        T::MaximalWeak => (weak_lp_norm(&maximal(g)?, q()?, region)?, lebesgue(g, region)?),
        T::MaximalLocalLog => (lp_norm(&maximal(&restricted)?, q()?, &ball)?, local_log(g)?),
        T::MaximalCritical => (maximal(g)?.max_abs(), lebesgue(g, region)?),
        T::IntegralBmo => (bmo_norm(&integral(g)?, fam)?, lebesgue(g, region)?),
        T::LernerStrong => (lp_norm(&eval_lerner_maximal(g)?, exps.p(), region)?, lebesgue(g, region)?),
        T::LernerWeak => (weak_lp_norm(&eval_lerner_maximal(g)?, exps.p(), region)?, lebesgue(g, region)?),
        T::HardyLittlewoodMorrey | T::LernerMorrey => {
            (morrey_norm(&eval_lerner_maximal(g)?, exps.p(), kappa, fam)?, morrey(g)?)
        }
        T::HardyLittlewoodMorreyEndpoint | T::LernerMorreyWeak => {
            (weak_morrey_norm(&eval_lerner_maximal(g)?, exps.p(), kappa, fam)?, morrey(g)?)
        }
        T::MorreyStrong => (morrey_norm(&integral(g)?, q()?, kappa, fam)?, morrey(g)?),
        T::MorreyWeak => (weak_morrey_norm(&integral(g)?, q()?, kappa, fam)?, morrey(g)?),
        T::MorreyLogEndpoint => (morrey_norm(&integral(g)?, q()?, kappa, fam)?, morrey_log(g)?),
        T::MaximalMorreyStrong => (morrey_norm(&maximal(g)?, q()?, kappa, fam)?, morrey(g)?),
        T::MaximalMorreyWeak => (weak_morrey_norm(&maximal(g)?, q()?, kappa, fam)?, morrey(g)?),
        T::MaximalMorreyLog => (morrey_norm(&maximal(g)?, q()?, kappa, fam)?, morrey_log(g)?),
        T::MaximalMorreyCritical => (maximal(g)?.max_abs(), morrey(g)?),
        T::IntegralMorreyBmo => (bmo_norm(&integral(g)?, fam)?, morrey(g)?),
        T::MaximalCriticalWeakData => (maximal(g)?.max_abs(), weak_lebesgue(g)?),
        T::IntegralBmoWeakData => (bmo_norm(&integral(g)?, fam)?, weak_lebesgue(g)?),
        T::HlsKernel => {
            let f = outer.expect("checked above");
            let po = exps.outer_p().ok_or(NormError::Exponent(f64::NAN))?;
            let lambda = exps.n() as f64 - exps.alpha();
            let form = hls_form(f, g[0], lambda, Some(&setup.kernels.kernels()[0]))?;
            (form.abs(), lp_norm(f, po, region)? * lebesgue(g, region)?)
        }
        T::OlsenStrong | T::OlsenWeak | T::OlsenLocalLog | T::OlsenMorreyStrong | T::OlsenMorreyWeak
        | T::OlsenMorreyLog => {
            let f = outer.expect("checked above");
            let po = exps.outer_p().ok_or(NormError::Exponent(f64::NAN))?;
            if theorem == T::OlsenLocalLog {
                let fb = f.restricted(&setup.local_ball);
                let prod = fb.product(&integral(&restricted)?)?;
                (lp_norm(&prod, r()?, &ball)?, lp_norm(&fb, po, &ball)? * local_log(g)?)
            } else {
                let prod = f.product(&integral(g)?)?;
                match theorem {
                    T::OlsenStrong => (lp_norm(&prod, r()?, region)?, lp_norm(f, po, region)? * lebesgue(g, region)?),
                    T::OlsenWeak => {
                        (weak_lp_norm(&prod, r()?, region)?, lp_norm(f, po, region)? * lebesgue(g, region)?)
                    }
                    T::OlsenMorreyStrong => {
                        (morrey_norm(&prod, r()?, kappa, fam)?, morrey_norm(f, po, kappa, fam)? * morrey(g)?)
                    }
                    T::OlsenMorreyWeak => {
                        (weak_morrey_norm(&prod, r()?, kappa, fam)?, morrey_norm(f, po, kappa, fam)? * morrey(g)?)
                    }
                    _ => (morrey_norm(&prod, r()?, kappa, fam)?, morrey_norm(f, po, kappa, fam)? * morrey_log(g)?),
                }
            }
        }
    };
    Ok(sides)
}

/// Audits the hypotheses, then evaluates both sides of `theorem`.
pub fn check(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    ops: Operands<'_>,
    function_ids: Vec<usize>,
) -> Result<CheckResult, VerifyError> {
    let verdict = validate_with_kernels(theorem, exps, &setup.kernels);
    if !verdict.violated.is_empty() {
        return Err(VerifyError::Refused(Refusal { theorem, violations: verdict.violated }));
    }
    let (lhs, rhs) = evaluate_sides(theorem, exps, setup, ops)?;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        return Err(VerifyError::DegenerateRhs { lhs });
    };
    let notes = match explicit_constant(theorem, exps, &setup.kernels)? {
        Some(c) => format!("explicit constant {c}"),
        None => String::new(),
    };
    Ok(CheckResult {
        theorem,
        exps: exps.clone(),
        function_ids,
        lhs,
        rhs_without_constant: rhs,
        ratio,
        h: setup.domain.spacing(),
        notes,
    })
}

/// Number of functions a statement consumes.
pub fn slots(theorem: TheoremId, exps: &ExponentSet) -> usize {
    exps.m() + usize::from(theorem.takes_outer_function())
}

/// Consecutive windows `[k, k + slots)` of the corpus; the first `m` members
/// are the inner functions, the last one the outer function when present.
/// Appending members only appends tuples.
pub fn corpus_tuples(len: usize, slots: usize) -> Vec<Vec<usize>> {
    if len < slots {
        return Vec::new();
    }
    (0..=len - slots).map(|k| (k..k + slots).collect()).collect()
}

fn check_tuple(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    members: &[GridFunction],
    ids: &[usize],
) -> Result<CheckResult, VerifyError> {
    let m = exps.m();
    let inner: Vec<&GridFunction> = ids[..m].iter().map(|&i| &members[i]).collect();
    let outer = ids.get(m).map(|&i| &members[i]);
    check(theorem, exps, setup, Operands { inner: &inner, outer }, ids.to_vec())
}

/// Picks the largest ratio, lowest tuple index on ties.
fn argmax(ratios: &[f64]) -> usize {
    let mut best = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if r > ratios[best] {
            best = i;
        }
    }
    best
}

/// `c_emp = max ratio` over the corpus tuples, optionally re-evaluating the
/// argmax tuple at `h/2`.
pub fn estimate_constant(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    corpus: &Corpus,
    refine: bool,
) -> Result<ConstantEstimate, VerifyError> {
    let verdict = validate_with_kernels(theorem, exps, &setup.kernels);
    if !verdict.violated.is_empty() {
        return Err(VerifyError::Refused(Refusal { theorem, violations: verdict.violated }));
    }
    let slots = slots(theorem, exps);
    let tuples = corpus_tuples(corpus.len(), slots);
    if tuples.is_empty() {
        return Err(VerifyError::EmptyCorpus { needed: slots, got: corpus.len() });
    }
    let members = corpus.members();
    let results: Vec<CheckResult> = tuples
        .par_iter()
        .map(|ids| check_tuple(theorem, exps, setup, members, ids))
        .collect::<Result<_, _>>()?;
    if results.iter().all(|r| r.rhs_without_constant == 0.0) {
        return Err(VerifyError::AllZero);
    }
    let ratios: Vec<f64> = results.iter().map(|r| r.ratio).collect();
    let best = argmax(&ratios);
    let ids = tuples[best].clone();
    let specs: Vec<MemberSpec> = ids.iter().map(|&i| corpus.specs()[i].clone()).collect();
    let refinement = if refine { Some(refine_specs(theorem, exps, setup, &specs, ratios[best])?) } else { None };
    Ok(ConstantEstimate {
        theorem,
        exps: exps.clone(),
        c_emp: ratios[best],
        lhs: results[best].lhs,
        rhs: results[best].rhs_without_constant,
        argmax_ids: ids,
        argmax_specs: specs,
        ratios,
        h: setup.domain.spacing(),
        refinement,
        trajectory: Vec::new(),
    })
}

fn check_specs(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    specs: &[MemberSpec],
) -> Result<CheckResult, VerifyError> {
    let members: Vec<GridFunction> = specs.iter().map(|s| s.sample(&setup.domain)).collect();
    let ids: Vec<usize> = (0..specs.len()).collect();
    check_tuple(theorem, exps, setup, &members, &ids)
}

fn ratio_of_specs(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    specs: &[MemberSpec],
) -> Result<f64, VerifyError> {
    Ok(check_specs(theorem, exps, setup, specs)?.ratio)
}

fn refine_specs(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    specs: &[MemberSpec],
    ratio_h: f64,
) -> Result<Refinement, VerifyError> {
    let fine = setup.refined()?;
    let ratio_h_half = ratio_of_specs(theorem, exps, &fine, specs)?;
    Ok(Refinement { h: setup.domain.spacing(), ratio_h, h_half: fine.domain.spacing(), ratio_h_half })
}

/// Hill climbing over member parameters, maximizing `objective`.
///
/// Each step perturbs one member of the current best tuple; the step scale
/// halves after eight consecutive rejections and resets on acceptance.
/// Returns the best tuple, its value and the accepted values in order.
pub fn hill_climb<F>(
    start: Vec<MemberSpec>,
    start_value: f64,
    n: usize,
    window: f64,
    seed: u64,
    budget: usize,
    objective: F,
) -> Result<(Vec<MemberSpec>, f64, Vec<f64>), VerifyError>
where
    F: Fn(&[MemberSpec]) -> Result<f64, VerifyError>,
{
    if budget == 0 {
        return Err(VerifyError::Budget);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut best, mut value) = (start, start_value);
    let mut trajectory = vec![value];
    let mut scale = 0.25;
    let mut rejections = 0;
    for step in 0..budget {
        let slot = step % best.len();
        let mut candidate = best.clone();
        candidate[slot] = best[slot].perturbed(n, window, scale, &mut rng);
        let v = objective(&candidate)?;
        if v > value {
            best = candidate;
            value = v;
            trajectory.push(v);
            scale = 0.25;
            rejections = 0;
        } else {
            rejections += 1;
            if rejections % 8 == 0 {
                scale = (scale * 0.5).max(1e-4);
            }
        }
    }
    Ok((best, value, trajectory))
}

/// Starts from the corpus argmax and climbs the statement's ratio.
pub fn adversarial_search(
    theorem: TheoremId,
    exps: &ExponentSet,
    setup: &CheckSetup,
    corpus: &Corpus,
    seed: u64,
    budget: usize,
) -> Result<ConstantEstimate, VerifyError> {
    if budget == 0 {
        return Err(VerifyError::Budget);
    }
    let start = estimate_constant(theorem, exps, setup, corpus, false)?;
    let objective = |specs: &[MemberSpec]| match ratio_of_specs(theorem, exps, setup, specs) {
        // A perturbation that zeroes the right side is just a rejected move.
        Err(VerifyError::DegenerateRhs { .. }) => Ok(0.0),
        other => other,
    };
    let (specs, value, trajectory) = hill_climb(
        start.argmax_specs.clone(),
        start.c_emp,
        setup.domain.dim(),
        corpus.window(),
        seed,
        budget,
        objective,
    )?;
    let best = check_specs(theorem, exps, setup, &specs)?;
    debug_assert_eq!(best.ratio, value);
    Ok(ConstantEstimate {
        c_emp: value,
        lhs: best.lhs,
        rhs: best.rhs_without_constant,
        argmax_specs: specs,
        trajectory,
        ..start
    })
}

/// The Lerner-type statements (2.2, 4.1, 4.2) whose hypotheses `exps`
/// satisfies, checked on every corpus tuple.
pub fn lerner_maximal_checks(
    exps: &ExponentSet,
    setup: &CheckSetup,
    corpus: &Corpus,
) -> Result<Vec<CheckResult>, VerifyError> {
    let theorems: Vec<TheoremId> = TheoremId::ALL
        .iter()
        .copied()
        .filter(|t| t.operator() == OperatorFamily::LernerMaximal)
        .filter(|t| validate_with_kernels(*t, exps, &setup.kernels).violated.is_empty())
        .collect();
    let tuples = corpus_tuples(corpus.len(), exps.m());
    if tuples.is_empty() {
        return Err(VerifyError::EmptyCorpus { needed: exps.m(), got: corpus.len() });
    }
    let mut out = Vec::new();
    for t in theorems {
        let rows: Vec<CheckResult> = tuples
            .par_iter()
            .map(|ids| check_tuple(t, exps, setup, corpus.members(), ids))
            .collect::<Result<_, _>>()?;
        out.extend(rows);
    }
    Ok(out)
}

/// An inequality `lhs <= rhs` expected to hold exactly in the discrete model.
pub trait ExactOracle: Sync {
    fn name(&self) -> &str;

    /// Number of exponent configurations the oracle cycles through.
    fn cases(&self) -> usize;

    /// `(lhs, rhs)` for the pair `(f, g)` in configuration `case`.
    fn evaluate(&self, f: &GridFunction, g: &GridFunction, family: &BallFamily, case: usize)
        -> Result<(f64, f64), NormError>;
}

/// The discrete Hölder and embedding inequalities with explicit constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardOracle {
    /// `‖fg‖_{L^r} ≤ ‖f‖_{L^p} ‖g‖_{L^q}`, `1/r = 1/p + 1/q`.
    Holder,
    /// `‖fg‖_{L^{r,∞}} ≤ C ‖f‖_{L^{p,∞}} ‖g‖_{L^{q,∞}}`, `C = min_t (t^{-p} + t^q)^{1/r}`.
    WeakHolder,
    /// `‖f g f‖_{L^{r,κ}} ≤ ‖f‖_{L^{2p,κ}} ‖g‖_{L^{2q,κ}} ‖f‖_{L^{2r,κ}}`.
    MultiMorreyHolder,
    /// `‖fg‖_{L^{r,κ}} ≤ ‖f‖_{L^{p,κ}} ‖g‖_{L^{q,κ}}`.
    MorreyHolder,
    /// `‖fg‖_{WL^{r,κ}} ≤ C ‖f‖_{L^{p,κ}} ‖g‖_{WL^{q,κ}}` with the weak Hölder `C`.
    WeakMorreyHolder,
    /// `‖f‖_{L^{q*,κ*}} ≤ ‖f‖_{L^{q,κ}}`, `q* < q`, `1 - κ* = (1 - κ) q*/q`.
    MorreyInclusion,
    /// The same inclusion between weak Morrey spaces.
    WeakMorreyInclusion,
    /// `‖f‖_{L^{q, 1-q/p}} ≤ (p/(p-q))^{1/q} ‖f‖_{L^{p,∞}}`, `q < p`.
    WeakToMorrey,
}

impl StandardOracle {
    pub const ALL: [StandardOracle; 8] = [
        StandardOracle::Holder,
        StandardOracle::WeakHolder,
        StandardOracle::MultiMorreyHolder,
        StandardOracle::MorreyHolder,
        StandardOracle::WeakMorreyHolder,
        StandardOracle::MorreyInclusion,
        StandardOracle::WeakMorreyInclusion,
        StandardOracle::WeakToMorrey,
    ];
}

/// `(p, q)` pairs and Morrey parameters shared by the standard oracles.
const PAIRS: [(f64, f64, f64); 3] = [(2.0, 2.0, 0.2), (3.0, 6.0, 0.4), (4.0, 1.5, 0.1)];

/// `(min, max)` of the pair, with `max` doubled when they coincide.
fn spread(p: f64, q: f64) -> (f64, f64) {
    let (lo, hi) = (p.min(q), p.max(q));
    if hi > lo {
        (lo, hi)
    } else {
        (lo, 2.0 * lo)
    }
}

/// `min_t (t^{-p} + t^q)^{1/r}` with `1/r = 1/p + 1/q`.
pub fn weak_holder_constant(p: f64, q: f64) -> f64 {
    let r = 1.0 / (1.0 / p + 1.0 / q);
    let t = (p / q).powf(1.0 / (p + q));
    (t.powf(-p) + t.powf(q)).powf(1.0 / r)
}

impl ExactOracle for StandardOracle {
    fn name(&self) -> &str {
        match self {
            StandardOracle::Holder => "holder",
            StandardOracle::WeakHolder => "weak-holder",
            StandardOracle::MultiMorreyHolder => "multi-morrey-holder",
            StandardOracle::MorreyHolder => "morrey-holder",
            StandardOracle::WeakMorreyHolder => "weak-morrey-holder",
            StandardOracle::MorreyInclusion => "morrey-inclusion",
            StandardOracle::WeakMorreyInclusion => "weak-morrey-inclusion",
            StandardOracle::WeakToMorrey => "weak-to-morrey",
        }
    }

    fn cases(&self) -> usize {
        PAIRS.len()
    }

    fn evaluate(
        &self,
        f: &GridFunction,
        g: &GridFunction,
        family: &BallFamily,
        case: usize,
    ) -> Result<(f64, f64), NormError> {
        let (p, q, kappa) = PAIRS[case % PAIRS.len()];
        let r = 1.0 / (1.0 / p + 1.0 / q);
        let whole = Region::Whole;
        let fg = f.product(g).map_err(|_| NormError::DomainMismatch)?;
        Ok(match self {
            StandardOracle::Holder => (
                lp_norm(&fg, r, &whole)?,
                lp_norm(f, p, &whole)? * lp_norm(g, q, &whole)?,
            ),
            StandardOracle::WeakHolder => (
                weak_lp_norm(&fg, r, &whole)?,
                weak_holder_constant(p, q) * weak_lp_norm(f, p, &whole)? * weak_lp_norm(g, q, &whole)?,
            ),
            StandardOracle::MultiMorreyHolder => {
                let fgf = fg.product(f).map_err(|_| NormError::DomainMismatch)?;
                (
                    morrey_norm(&fgf, r, kappa, family)?,
                    morrey_norm(f, 2.0 * p, kappa, family)?
                        * morrey_norm(g, 2.0 * q, kappa, family)?
                        * morrey_norm(f, 2.0 * r, kappa, family)?,
                )
            }
            StandardOracle::MorreyHolder => (
                morrey_norm(&fg, r, kappa, family)?,
                morrey_norm(f, p, kappa, family)? * morrey_norm(g, q, kappa, family)?,
            ),
            StandardOracle::WeakMorreyHolder => (
                weak_morrey_norm(&fg, r, kappa, family)?,
                weak_holder_constant(p, q) * morrey_norm(f, p, kappa, family)? * weak_morrey_norm(g, q, kappa, family)?,
            ),
            StandardOracle::MorreyInclusion | StandardOracle::WeakMorreyInclusion => {
                // Inclusion from the larger exponent down to the smaller, applied to f + g.
                let (lo, hi) = spread(p, q);
                let k_star = 1.0 - (1.0 - kappa) * lo / hi;
                let s = f.combine(1.0, g, 1.0).map_err(|_| NormError::DomainMismatch)?;
                if *self == StandardOracle::MorreyInclusion {
                    (morrey_norm(&s, lo, k_star, family)?, morrey_norm(&s, hi, kappa, family)?)
                } else {
                    (weak_morrey_norm(&s, lo, k_star, family)?, weak_morrey_norm(&s, hi, kappa, family)?)
                }
            }
            StandardOracle::WeakToMorrey => {
                let (lo, hi) = spread(p, q);
                let c = (hi / (hi - lo)).powf(1.0 / lo);
                (morrey_norm(&fg, lo, 1.0 - lo / hi, family)?, c * weak_lp_norm(&fg, hi, &whole)?)
            }
        })
    }
}

/// One evaluation of an exact oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCase {
    pub oracle: String,
    pub case: usize,
    pub pair: [usize; 2],
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Runs every oracle on the first `pairs` consecutive corpus pairs, in every configuration.
pub fn run_exact_suite(
    oracles: &[&dyn ExactOracle],
    corpus: &Corpus,
    family: &BallFamily,
    pairs: usize,
) -> Result<Vec<ExactCase>, VerifyError> {
    let tuples: Vec<Vec<usize>> = corpus_tuples(corpus.len(), 2).into_iter().take(pairs).collect();
    if tuples.is_empty() {
        return Err(VerifyError::EmptyCorpus { needed: 2, got: corpus.len() });
    }
    let members = corpus.members();
    let mut jobs = Vec::new();
    for (o, oracle) in oracles.iter().enumerate() {
        for case in 0..oracle.cases() {
            for t in &tuples {
                jobs.push((o, case, [t[0], t[1]]));
            }
        }
    }
    jobs.par_iter()
        .map(|&(o, case, pair)| {
            let oracle = oracles[o];
            let (lhs, rhs) = oracle.evaluate(&members[pair[0]], &members[pair[1]], family, case)?;
            Ok(ExactCase { oracle: oracle.name().to_string(), case, pair, lhs, rhs, holds: within_exact(lhs, rhs) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::Constraint;
    use crate::kernel::Kernel;

    fn setup(g: usize) -> CheckSetup {
        let d = Domain::new(1, 2.0, g).unwrap();
        CheckSetup::new(d, KernelVector::ones(1, 2).unwrap(), 1).unwrap()
    }

    fn indicator(d: Domain, lo: f64, hi: f64) -> GridFunction {
        GridFunction::sample(d, |x| if x[0] >= lo && x[0] <= hi { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn zero_inputs_give_zero_ratio() {
        let s = setup(64);
        let z = GridFunction::zeros(*s.domain());
        let e = ExponentSet::new(1, 0.5, f64::INFINITY, &[3.0, 3.0], 0.0).unwrap();
        let r = check(TheoremId::LebesgueStrong, &e, &s, Operands { inner: &[&z, &z], outer: None }, vec![0, 0]).unwrap();
        assert_eq!((r.lhs, r.ratio), (0.0, 0.0));
    }

    #[test]
    fn refusal_names_constraint() {
        let s = setup(64);
        let f = indicator(*s.domain(), 0.0, 1.0);
        // p = n/alpha: the Lebesgue target degenerates
        let e = ExponentSet::new(1, 0.5, f64::INFINITY, &[4.0, 4.0], 0.0).unwrap();
        match check(TheoremId::LebesgueStrong, &e, &s, Operands { inner: &[&f, &f], outer: None }, vec![]) {
            Err(VerifyError::Refused(r)) => {
                assert_eq!(r.violations[0].constraint, Constraint::PLtNOverAlpha);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn critical_chain_bound() {
        let s = setup(512);
        let f = indicator(*s.domain(), 0.0, 1.0);
        let e = ExponentSet::new(1, 0.5, f64::INFINITY, &[4.0, 4.0], 0.0).unwrap();
        let r = check(TheoremId::MaximalCritical, &e, &s, Operands { inner: &[&f, &f], outer: None }, vec![0, 0]).unwrap();
        let c = explicit_constant(TheoremId::MaximalCritical, &e, s.kernels()).unwrap().unwrap();
        assert_eq!(c, 1.0);
        assert!(r.ratio <= c && r.ratio > 0.5, "{}", r.ratio);
    }

    #[test]
    fn weak_holder_constant_at_balance() {
        // p = q: t = 1 and C = 2^{1/r} = 2^{2/p}
        assert!((weak_holder_constant(2.0, 2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn corpus_tuples_only_grow() {
        let a = corpus_tuples(5, 2);
        let b = corpus_tuples(6, 2);
        assert_eq!(a.len(), 4);
        assert_eq!(&b[..4], &a[..]);
        assert!(corpus_tuples(1, 2).is_empty());
    }

    #[test]
    fn hls_check_uses_outer() {
        let d = Domain::new(1, 2.0, 64).unwrap();
        let s = CheckSetup::new(d, KernelVector::new(vec![Kernel::one(1)]).unwrap(), 1).unwrap();
        let f = indicator(d, -0.5, 0.5);
        // lambda = 1/2, p = q = 4/3
        let e = ExponentSet::new(1, 0.5, f64::INFINITY, &[4.0 / 3.0], 0.0).unwrap().with_outer_p(4.0 / 3.0).unwrap();
        let r = check(TheoremId::HlsKernel, &e, &s, Operands { inner: &[&f], outer: Some(&f) }, vec![0, 0]).unwrap();
        assert!(r.ratio > 0.0 && r.ratio < crate::hls::lieb_constant(1, 0.5).unwrap());
    }
}
