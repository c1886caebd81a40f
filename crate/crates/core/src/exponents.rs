//! Exponent algebra and per-theorem hypothesis validation.

use std::fmt;

use thiserror::Error;

use crate::kernel::KernelVector;
use crate::tolerances::EXPONENT_EQ;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("multilinearity m = {0} outside 1..=3")]
    Multilinearity(usize),
    #[error("dimension n = {0} outside {{1, 2}}")]
    Dimension(usize),
    #[error("expected {expected} integrability exponents, got {got}")]
    ListLength { expected: usize, got: usize },
    #[error("order α = {alpha} outside (0, {bound})")]
    Alpha { alpha: f64, bound: f64 },
    #[error("p_{index} = {value} < 1")]
    PBelowOne { index: usize, value: f64 },
    #[error("kernel exponent s = {0} must exceed 1")]
    S(f64),
    #[error("Morrey parameter κ = {0} outside [0, 1)")]
    Kappa(f64),
    #[error("outer exponent p = {0} must be finite and at least 1")]
    OuterP(f64),
    #[error("exponents are not critical: Σ 1/p*_i = {sum} but α/n = {target}")]
    NotCritical { sum: f64, target: f64 },
    #[error("need p_i < p*_i for every i (index {0})")]
    NotBelowCritical(usize),
    #[error("p_i / p*_i must be the same for every i")]
    UnevenChain,
    #[error("unknown theorem id {0:?}")]
    UnknownTheorem(String),
}

/// A derived exponent that may degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    /// `1/q = 0` within tolerance: the target space is L^∞ or BMO.
    Critical,
    /// `1/q < 0`.
    Invalid,
}

impl Exponent {
    fn from_inverse(inv: f64) -> Self {
        if inv.abs() <= EXPONENT_EQ {
            Exponent::Critical
        } else if inv < 0.0 {
            Exponent::Invalid
        } else {
            Exponent::Finite(1.0 / inv)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Critical => write!(f, "critical"),
            Exponent::Invalid => write!(f, "invalid"),
        }
    }
}

/// Raw parameters before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentInputs {
    pub n: usize,
    pub alpha: f64,
    /// Kernel integrability; `f64::INFINITY` allowed.
    pub s: f64,
    pub p_list: Vec<f64>,
    pub kappa: f64,
    /// Exponent of the extra factor `f` in product (Olsen and HLS type) estimates.
    pub outer_p: Option<f64>,
}

/// Validated exponents; derived quantities are computed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSet {
    n: usize,
    alpha: f64,
    s: f64,
    p_list: Vec<f64>,
    kappa: f64,
    outer_p: Option<f64>,
}

impl ExponentSet {
    /// Checks the field ranges and the identity `Σ n/p_i' + n/p = mn`.
    pub fn derive(inputs: ExponentInputs) -> Result<Self, ExponentError> {
        let m = inputs.p_list.len();
        if !(1..=3).contains(&m) {
            return Err(ExponentError::Multilinearity(m));
        }
        if inputs.n != 1 && inputs.n != 2 {
            return Err(ExponentError::Dimension(inputs.n));
        }
        let bound = (m * inputs.n) as f64;
        if !(inputs.alpha > 0.0 && inputs.alpha < bound) {
            return Err(ExponentError::Alpha { alpha: inputs.alpha, bound });
        }
        for (i, &p) in inputs.p_list.iter().enumerate() {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(ExponentError::PBelowOne { index: i + 1, value: p });
            }
        }
        if !(inputs.s > 1.0) {
            return Err(ExponentError::S(inputs.s));
        }
        if !(inputs.kappa >= 0.0 && inputs.kappa < 1.0) {
            return Err(ExponentError::Kappa(inputs.kappa));
        }
        if let Some(p) = inputs.outer_p {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(ExponentError::OuterP(p));
            }
        }
        let set = Self {
            n: inputs.n,
            alpha: inputs.alpha,
            s: inputs.s,
            p_list: inputs.p_list,
            kappa: inputs.kappa,
            outer_p: inputs.outer_p,
        };
        debug_assert!(
            (set.sum_conjugate_dims() + set.n as f64 / set.p() - bound).abs() < 1e-12 * bound
        );
        Ok(set)
    }

    /// Convenience constructor without the outer exponent.
    pub fn new(n: usize, alpha: f64, s: f64, p_list: &[f64], kappa: f64) -> Result<Self, ExponentError> {
        Self::derive(ExponentInputs { n, alpha, s, p_list: p_list.to_vec(), kappa, outer_p: None })
    }

    pub fn with_outer_p(mut self, p: f64) -> Result<Self, ExponentError> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(ExponentError::OuterP(p));
        }
        self.outer_p = Some(p);
        Ok(self)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self, ExponentError> {
        Self::derive(ExponentInputs { kappa, ..self.inputs() })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ExponentError> {
        Self::derive(ExponentInputs { alpha, ..self.inputs() })
    }

    pub fn inputs(&self) -> ExponentInputs {
        ExponentInputs {
            n: self.n,
            alpha: self.alpha,
            s: self.s,
            p_list: self.p_list.clone(),
            kappa: self.kappa,
            outer_p: self.outer_p,
        }
    }

    pub fn m(&self) -> usize {
        self.p_list.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p_list(&self) -> &[f64] {
        &self.p_list
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn outer_p(&self) -> Option<f64> {
        self.outer_p
    }

    /// `Σ 1/p_i`.
    pub fn inv_p(&self) -> f64 {
        self.p_list.iter().map(|p| 1.0 / p).sum()
    }

    /// `p` with `1/p = Σ 1/p_i`.
    pub fn p(&self) -> f64 {
        1.0 / self.inv_p()
    }

    /// Conjugate of `s`; 1 when `s = ∞`.
    pub fn s_prime(&self) -> f64 {
        if self.s.is_infinite() {
            1.0
        } else {
            self.s / (self.s - 1.0)
        }
    }

    pub fn min_p(&self) -> f64 {
        self.p_list.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ n/p_i'`.
    pub fn sum_conjugate_dims(&self) -> f64 {
        self.p_list.iter().map(|p| self.n as f64 * (1.0 - 1.0 / p)).sum()
    }

    /// `1/q = 1/p - α/n`.
    pub fn q_lebesgue(&self) -> Exponent {
        Exponent::from_inverse(self.inv_p() - self.alpha / self.n as f64)
    }

    /// `1/q = 1/p - α/(n(1-κ))`.
    pub fn q_adams(&self) -> Exponent {
        Exponent::from_inverse(self.inv_p() - self.alpha / (self.n as f64 * (1.0 - self.kappa)))
    }

    /// The Morrey exponent when κ > 0, else the Lebesgue one.
    pub fn q(&self) -> Exponent {
        if self.kappa > 0.0 {
            self.q_adams()
        } else {
            self.q_lebesgue()
        }
    }

    /// `1 - αp/n`, the κ of the critical Morrey case.
    pub fn critical_kappa(&self) -> f64 {
        1.0 - self.alpha * self.p() / self.n as f64
    }

    /// `r` with `1/r = 1/p_outer + 1/q`.
    pub fn r(&self) -> Exponent {
        let Some(po) = self.outer_p else { return Exponent::Invalid };
        match self.q() {
            Exponent::Finite(q) => Exponent::from_inverse(1.0 / po + 1.0 / q),
            _ => Exponent::Invalid,
        }
    }

    /// Indices `i` with `p_i = s'`.
    pub fn endpoint_indices(&self) -> Vec<usize> {
        let sp = self.s_prime();
        (0..self.m()).filter(|&i| (self.p_list[i] - sp).abs() <= EXPONENT_EQ * sp.max(1.0)).collect()
    }
}

/// Solves `κ/p = Σ (1/p_i - 1/p*_i)` for a critical `p*` and a chosen `p < p*`.
///
/// Requires `Σ 1/p*_i = α/n`, `p_i < p*_i` and a common ratio `p_i / p*_i`,
/// then returns `κ = 1 - αp/n`.
pub fn kappa_chain(p_star: &[f64], p: &[f64], alpha: f64, n: usize) -> Result<f64, ExponentError> {
    if p_star.len() != p.len() || p.is_empty() {
        return Err(ExponentError::ListLength { expected: p_star.len(), got: p.len() });
    }
    let sum: f64 = p_star.iter().map(|x| 1.0 / x).sum();
    let target = alpha / n as f64;
    if (sum - target).abs() > EXPONENT_EQ {
        return Err(ExponentError::NotCritical { sum, target });
    }
    for (i, (a, b)) in p.iter().zip(p_star).enumerate() {
        if !(a < b) || (b - a).abs() <= EXPONENT_EQ * b {
            return Err(ExponentError::NotBelowCritical(i + 1));
        }
    }
    let ratio = p[0] / p_star[0];
    if p.iter().zip(p_star).any(|(a, b)| (a / b - ratio).abs() > EXPONENT_EQ) {
        return Err(ExponentError::UnevenChain);
    }
    let inv_p: f64 = p.iter().map(|x| 1.0 / x).sum();
    Ok(1.0 - alpha / (n as f64 * inv_p))
}

/// Registered statements that can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    LebesgueStrong,
    LebesgueWeak,
    LernerStrong,
    LernerWeak,
    LocalLogEndpoint,
    MaximalStrong,
    MaximalWeak,
    MaximalLocalLog,
    MaximalCritical,
    IntegralBmo,
    HardyLittlewoodMorrey,
    HardyLittlewoodMorreyEndpoint,
    LernerMorrey,
    LernerMorreyWeak,
    MorreyStrong,
    MorreyWeak,
    MorreyLogEndpoint,
    MaximalMorreyStrong,
    MaximalMorreyWeak,
    MaximalMorreyLog,
    MaximalMorreyCritical,
    IntegralMorreyBmo,
    MaximalCriticalWeakData,
    IntegralBmoWeakData,
    HlsKernel,
    OlsenStrong,
    OlsenWeak,
    OlsenLocalLog,
    OlsenMorreyStrong,
    OlsenMorreyWeak,
    OlsenMorreyLog,
}

/// One hypothesis of a registered statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    SPrimeLtP,
    SPrimeLeP,
    SPrimeEqMinP,
    PLtNOverAlpha,
    CriticalAlpha,
    PGtOne,
    MinPEqOne,
    KappaPositive,
    KappaLtAdamsBound,
    KappaCritical,
    MEqualsOne,
    OuterPPresent,
    SPrimeLtOuterP,
    RLtMinPQ,
    HlsBalance,
    OmegaIdenticallyOne,
    OmegaInLs,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::SPrimeLtP => "s' < p_i",
            Constraint::SPrimeLeP => "s' <= p_i",
            Constraint::SPrimeEqMinP => "s' = min p_i",
            Constraint::PLtNOverAlpha => "p < n/alpha",
            Constraint::CriticalAlpha => "alpha/n = sum 1/p_i",
            Constraint::PGtOne => "1 < p_i",
            Constraint::MinPEqOne => "min p_i = 1",
            Constraint::KappaPositive => "0 < kappa",
            Constraint::KappaLtAdamsBound => "kappa < 1 - alpha*p/n",
            Constraint::KappaCritical => "kappa = 1 - alpha*p/n",
            Constraint::MEqualsOne => "m = 1",
            Constraint::OuterPPresent => "outer exponent p given",
            Constraint::SPrimeLtOuterP => "s' < p",
            Constraint::RLtMinPQ => "0 < r < min(p, q)",
            Constraint::HlsBalance => "1/p + 1/q + lambda/n = 2",
            Constraint::OmegaIdenticallyOne => "Omega_i = 1",
            Constraint::OmegaInLs => "Omega_i in L^s(S^(n-1))",
        }
    }

    /// Whether the constraint is about kernels rather than exponents.
    pub fn is_kernel_constraint(self) -> bool {
        matches!(self, Constraint::OmegaIdenticallyOne | Constraint::OmegaInLs)
    }

    /// `None` when satisfied, otherwise an explanation with the offending values.
    fn audit(self, e: &ExponentSet) -> Option<String> {
        let tol = EXPONENT_EQ;
        let sp = e.s_prime();
        let n = e.n as f64;
        match self {
            Constraint::SPrimeLtP => e
                .p_list
                .iter()
                .position(|&p| !(sp < p - tol * p))
                .map(|i| format!("s' < p_{} fails: s' = {sp}, p_{} = {}", i + 1, i + 1, e.p_list[i])),
            Constraint::SPrimeLeP => e
                .p_list
                .iter()
                .position(|&p| p < sp - tol * p)
                .map(|i| format!("s' <= p_{} fails: s' = {sp}, p_{} = {}", i + 1, i + 1, e.p_list[i])),
            Constraint::SPrimeEqMinP => {
                let mp = e.min_p();
                ((mp - sp).abs() > tol * mp).then(|| format!("s' = min p_i fails: s' = {sp}, min p_i = {mp}"))
            }
            Constraint::PLtNOverAlpha => {
                let inv_q = e.inv_p() - e.alpha / n;
                (inv_q <= tol).then(|| format!("p < n/alpha fails: p = {}, n/alpha = {}", e.p(), n / e.alpha))
            }
            Constraint::CriticalAlpha => {
                let gap = e.inv_p() - e.alpha / n;
                (gap.abs() > tol).then(|| {
                    format!("alpha/n = sum 1/p_i fails: alpha/n = {}, sum 1/p_i = {}", e.alpha / n, e.inv_p())
                })
            }
            Constraint::PGtOne => e
                .p_list
                .iter()
                .position(|&p| p <= 1.0 + tol)
                .map(|i| format!("1 < p_{} fails: p_{} = {}", i + 1, i + 1, e.p_list[i])),
            Constraint::MinPEqOne => {
                let mp = e.min_p();
                ((mp - 1.0).abs() > tol).then(|| format!("min p_i = 1 fails: min p_i = {mp}"))
            }
            Constraint::KappaPositive => (e.kappa <= tol).then(|| format!("0 < kappa fails: kappa = {}", e.kappa)),
            Constraint::KappaLtAdamsBound => {
                let bound = e.critical_kappa();
                (e.kappa >= bound - tol)
                    .then(|| format!("kappa < 1 - alpha*p/n = {bound} fails: kappa = {}", e.kappa))
            }
            Constraint::KappaCritical => {
                let required = e.critical_kappa();
                ((e.kappa - required).abs() > tol)
                    .then(|| format!("kappa must equal 1 - alpha*p/n = {required} (got {})", e.kappa))
            }
            Constraint::MEqualsOne => (e.m() != 1).then(|| format!("m = 1 fails: m = {}", e.m())),
            Constraint::OuterPPresent => e.outer_p.is_none().then(|| "no exponent given for f".to_string()),
            Constraint::SPrimeLtOuterP => match e.outer_p {
                Some(p) if sp < p - tol * p => None,
                Some(p) => Some(format!("s' < p fails: s' = {sp}, p = {p}")),
                None => Some("s' < p undefined without an exponent for f".to_string()),
            },
            Constraint::RLtMinPQ => match (e.outer_p, e.q()) {
                (Some(_), Exponent::Finite(_)) => None,
                (None, _) => Some("r undefined without an exponent for f".to_string()),
                (Some(_), q) => Some(format!("0 < r < min(p, q) fails: q is {q}")),
            },
            Constraint::HlsBalance => match e.outer_p {
                Some(p) => {
                    let lambda = n - e.alpha;
                    let total = 1.0 / p + e.inv_p() + lambda / n;
                    ((total - 2.0).abs() > tol)
                        .then(|| format!("1/p + 1/q + lambda/n = 2 fails: sum = {total}"))
                }
                None => Some("balance undefined without an exponent for f".to_string()),
            },
            Constraint::OmegaIdenticallyOne | Constraint::OmegaInLs => None,
        }
    }

    fn audit_kernels(self, e: &ExponentSet, kernels: &KernelVector) -> Option<String> {
        match self {
            Constraint::OmegaIdenticallyOne => {
                (!kernels.all_constant_one()).then(|| "Omega_i = 1 fails: a kernel is not identically one".into())
            }
            Constraint::OmegaInLs => kernels
                .kernels()
                .iter()
                .enumerate()
                .find_map(|(i, k)| k.sphere_norm(e.s).err().map(|err| format!("Omega_{}: {err}", i + 1))),
            _ => self.audit(e),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub explanation: String,
}

/// Outcome of auditing an exponent set against a statement's hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisVerdict {
    pub theorem: TheoremId,
    pub satisfied: Vec<Constraint>,
    pub violated: Vec<Violation>,
    /// Kernel hypotheses left open when no kernels were supplied.
    pub unchecked: Vec<Constraint>,
}

impl HypothesisVerdict {
    pub fn is_satisfied(&self) -> bool {
        self.violated.is_empty() && self.unchecked.is_empty()
    }

    pub fn violated_constraints(&self) -> Vec<Constraint> {
        self.violated.iter().map(|v| v.constraint).collect()
    }
}

/// What the left-hand operator of a statement is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorFamily {
    FractionalIntegral,
    FractionalMaximal,
    LernerMaximal,
    /// `f · T(g)` products.
    OlsenProduct,
    /// The bilinear form `∫ f · T(g)`.
    HlsForm,
}

use Constraint as C;
use TheoremId as T;

impl TheoremId {
    pub const ALL: [TheoremId; 31] = [
        T::LebesgueStrong,
        T::LebesgueWeak,
        T::LernerStrong,
        T::LernerWeak,
        T::LocalLogEndpoint,
        T::MaximalStrong,
        T::MaximalWeak,
        T::MaximalLocalLog,
        T::MaximalCritical,
        T::IntegralBmo,
        T::HardyLittlewoodMorrey,
        T::HardyLittlewoodMorreyEndpoint,
        T::LernerMorrey,
        T::LernerMorreyWeak,
        T::MorreyStrong,
        T::MorreyWeak,
        T::MorreyLogEndpoint,
        T::MaximalMorreyStrong,
        T::MaximalMorreyWeak,
        T::MaximalMorreyLog,
        T::MaximalMorreyCritical,
        T::IntegralMorreyBmo,
        T::MaximalCriticalWeakData,
        T::IntegralBmoWeakData,
        T::HlsKernel,
        T::OlsenStrong,
        T::OlsenWeak,
        T::OlsenLocalLog,
        T::OlsenMorreyStrong,
        T::OlsenMorreyWeak,
        T::OlsenMorreyLog,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            T::LebesgueStrong => "2.1i",
            T::LebesgueWeak => "2.1ii",
            T::LernerStrong => "2.2i",
            T::LernerWeak => "2.2ii",
            T::LocalLogEndpoint => "2.3",
            T::MaximalStrong => "3.1i",
            T::MaximalWeak => "3.1ii",
            T::MaximalLocalLog => "3.1iii",
            T::MaximalCritical => "3.2",
            T::IntegralBmo => "3.3",
            T::HardyLittlewoodMorrey => "4.1i",
            T::HardyLittlewoodMorreyEndpoint => "4.1ii",
            T::LernerMorrey => "4.2i",
            T::LernerMorreyWeak => "4.2ii",
            T::MorreyStrong => "4.3i",
            T::MorreyWeak => "4.3ii",
            T::MorreyLogEndpoint => "4.4",
            T::MaximalMorreyStrong => "5.1i",
            T::MaximalMorreyWeak => "5.1ii",
            T::MaximalMorreyLog => "5.1iii",
            T::MaximalMorreyCritical => "5.2",
            T::IntegralMorreyBmo => "5.3",
            T::MaximalCriticalWeakData => "5.5",
            T::IntegralBmoWeakData => "5.6",
            T::HlsKernel => "6.1",
            T::OlsenStrong => "6.3i",
            T::OlsenWeak => "6.3ii",
            T::OlsenLocalLog => "6.4",
            T::OlsenMorreyStrong => "6.6i",
            T::OlsenMorreyWeak => "6.6ii",
            T::OlsenMorreyLog => "6.7",
        }
    }

    pub fn parse(id: &str) -> Result<Self, ExponentError> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == id.trim())
            .ok_or_else(|| ExponentError::UnknownTheorem(id.to_string()))
    }

    pub fn description(self) -> &'static str {
        match self {
            T::LebesgueStrong => "T: prod L^{p_i} -> L^q",
            T::LebesgueWeak => "T: prod L^{p_i} -> L^{q,inf}, endpoint s' = min p_i",
            T::LernerStrong => "Lerner M: prod L^{p_i} -> L^p, p_i > 1",
            T::LernerWeak => "Lerner M: prod L^{p_i} -> L^{p,inf}, min p_i = 1",
            T::LocalLogEndpoint => "T on a ball: L^{s'} log L factors -> L^q(B)",
            T::MaximalStrong => "M_{Omega,alpha}: prod L^{p_i} -> L^q",
            T::MaximalWeak => "M_{Omega,alpha}: prod L^{p_i} -> L^{q,inf}, endpoint",
            T::MaximalLocalLog => "M_{Omega,alpha} on a ball: L log L factors -> L^q(B)",
            T::MaximalCritical => "M_{Omega,alpha}: prod L^{p_i} -> L^inf, p = n/alpha",
            T::IntegralBmo => "I_{alpha}: prod L^{p_i} -> BMO, p = n/alpha",
            T::HardyLittlewoodMorrey => "M: L^{p,kappa} -> L^{p,kappa}, p > 1",
            T::HardyLittlewoodMorreyEndpoint => "M: L^{1,kappa} -> WL^{1,kappa}",
            T::LernerMorrey => "Lerner M: prod L^{p_i,kappa} -> L^{p,kappa}",
            T::LernerMorreyWeak => "Lerner M: prod L^{p_i,kappa} -> WL^{p,kappa}, min p_i = 1",
            T::MorreyStrong => "T: prod L^{p_i,kappa} -> L^{q,kappa}",
            T::MorreyWeak => "T: prod L^{p_i,kappa} -> WL^{q,kappa}, endpoint",
            T::MorreyLogEndpoint => "T: prod (L log L)^{p_i,kappa} -> L^{q,kappa}",
            T::MaximalMorreyStrong => "M_{Omega,alpha}: prod L^{p_i,kappa} -> L^{q,kappa}",
            T::MaximalMorreyWeak => "M_{Omega,alpha}: prod L^{p_i,kappa} -> WL^{q,kappa}, endpoint",
            T::MaximalMorreyLog => "M_{Omega,alpha}: prod (L log L)^{p_i,kappa} -> L^{q,kappa}",
            T::MaximalMorreyCritical => "M_{Omega,alpha}: prod L^{p_i,kappa} -> L^inf, kappa = 1 - alpha p/n",
            T::IntegralMorreyBmo => "I_{alpha}: prod L^{p_i,kappa} -> BMO, kappa = 1 - alpha p/n",
            T::MaximalCriticalWeakData => "M_{Omega,alpha}: prod L^{p_i,inf} -> L^inf, alpha/n = sum 1/p_i",
            T::IntegralBmoWeakData => "I_{alpha}: prod L^{p_i,inf} -> BMO, alpha/n = sum 1/p_i",
            T::HlsKernel => "|<f, T_{Omega,n-lambda} g>| <= C ||f||_p ||g||_q",
            T::OlsenStrong => "||f T(g)||_{L^r} <= C ||f||_{L^p} prod ||g_i||_{L^{p_i}}",
            T::OlsenWeak => "||f T(g)||_{L^{r,inf}} <= C ||f||_{L^p} prod ||g_i||_{L^{p_i}}, endpoint",
            T::OlsenLocalLog => "||f T(g)||_{L^r(B)} <= C ||f||_{L^p(B)} with L log L factors on B",
            T::OlsenMorreyStrong => "||f T(g)||_{L^{r,kappa}} <= C ||f||_{L^{p,kappa}} prod ||g_i||_{L^{p_i,kappa}}",
            T::OlsenMorreyWeak => "||f T(g)||_{WL^{r,kappa}} <= C ||f||_{L^{p,kappa}} prod ||g_i||_{L^{p_i,kappa}}, endpoint",
            T::OlsenMorreyLog => "||f T(g)||_{L^{r,kappa}} with (L log L)^{p_i,kappa} factors",
        }
    }

    /// The hypotheses audited by [`validate`].
    pub fn hypotheses(self) -> &'static [Constraint] {
        match self {
            T::LebesgueStrong | T::MaximalStrong => &[C::SPrimeLtP, C::PLtNOverAlpha, C::OmegaInLs],
            T::LebesgueWeak | T::LocalLogEndpoint | T::MaximalWeak | T::MaximalLocalLog => {
                &[C::SPrimeEqMinP, C::PLtNOverAlpha, C::OmegaInLs]
            }
            T::LernerStrong => &[C::PGtOne],
            T::LernerWeak => &[C::MinPEqOne],
            T::MaximalCritical => &[C::SPrimeLeP, C::CriticalAlpha, C::OmegaInLs],
            T::IntegralBmo => &[C::OmegaIdenticallyOne, C::CriticalAlpha],
            T::HardyLittlewoodMorrey => &[C::MEqualsOne, C::PGtOne, C::KappaPositive],
            T::HardyLittlewoodMorreyEndpoint => &[C::MEqualsOne, C::MinPEqOne, C::KappaPositive],
            T::LernerMorrey => &[C::PGtOne, C::KappaPositive],
            T::LernerMorreyWeak => &[C::MinPEqOne, C::KappaPositive],
            T::MorreyStrong | T::MaximalMorreyStrong => {
                &[C::SPrimeLtP, C::KappaPositive, C::KappaLtAdamsBound, C::OmegaInLs]
            }
            T::MorreyWeak | T::MorreyLogEndpoint | T::MaximalMorreyWeak | T::MaximalMorreyLog => {
                &[C::SPrimeEqMinP, C::KappaPositive, C::KappaLtAdamsBound, C::OmegaInLs]
            }
            T::MaximalMorreyCritical => &[C::SPrimeLeP, C::KappaCritical, C::OmegaInLs],
            T::IntegralMorreyBmo => &[C::OmegaIdenticallyOne, C::KappaCritical],
            T::MaximalCriticalWeakData => &[C::SPrimeLtP, C::CriticalAlpha, C::OmegaInLs],
            T::IntegralBmoWeakData => &[C::OmegaIdenticallyOne, C::PGtOne, C::CriticalAlpha],
            T::HlsKernel => &[C::MEqualsOne, C::OuterPPresent, C::SPrimeLtOuterP, C::SPrimeLtP, C::HlsBalance, C::OmegaInLs],
            T::OlsenStrong => &[C::OuterPPresent, C::SPrimeLtP, C::RLtMinPQ, C::OmegaInLs],
            T::OlsenWeak | T::OlsenLocalLog => &[C::OuterPPresent, C::SPrimeEqMinP, C::RLtMinPQ, C::OmegaInLs],
            T::OlsenMorreyStrong => &[C::OuterPPresent, C::SPrimeLtP, C::KappaPositive, C::RLtMinPQ, C::OmegaInLs],
            T::OlsenMorreyWeak | T::OlsenMorreyLog => {
                &[C::OuterPPresent, C::SPrimeEqMinP, C::KappaPositive, C::RLtMinPQ, C::OmegaInLs]
            }
        }
    }

    pub fn operator(self) -> OperatorFamily {
        match self {
            T::LebesgueStrong | T::LebesgueWeak | T::LocalLogEndpoint | T::MorreyStrong | T::MorreyWeak
            | T::MorreyLogEndpoint | T::IntegralBmo | T::IntegralMorreyBmo | T::IntegralBmoWeakData => {
                OperatorFamily::FractionalIntegral
            }
            T::MaximalStrong | T::MaximalWeak | T::MaximalLocalLog | T::MaximalCritical | T::MaximalMorreyStrong
            | T::MaximalMorreyWeak | T::MaximalMorreyLog | T::MaximalMorreyCritical | T::MaximalCriticalWeakData => {
                OperatorFamily::FractionalMaximal
            }
            T::LernerStrong | T::LernerWeak | T::HardyLittlewoodMorrey | T::HardyLittlewoodMorreyEndpoint
            | T::LernerMorrey | T::LernerMorreyWeak => OperatorFamily::LernerMaximal,
            T::HlsKernel => OperatorFamily::HlsForm,
            T::OlsenStrong | T::OlsenWeak | T::OlsenLocalLog | T::OlsenMorreyStrong | T::OlsenMorreyWeak
            | T::OlsenMorreyLog => OperatorFamily::OlsenProduct,
        }
    }

    /// Whether the statement needs an extra function `f` besides `g_1..g_m`.
    pub fn takes_outer_function(self) -> bool {
        matches!(self.operator(), OperatorFamily::OlsenProduct | OperatorFamily::HlsForm)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Audits the exponent hypotheses of `theorem`; kernel hypotheses are left unchecked.
pub fn validate(theorem: TheoremId, exps: &ExponentSet) -> HypothesisVerdict {
    let mut verdict =
        HypothesisVerdict { theorem, satisfied: Vec::new(), violated: Vec::new(), unchecked: Vec::new() };
    for &c in theorem.hypotheses() {
        if c.is_kernel_constraint() {
            verdict.unchecked.push(c);
        } else if let Some(explanation) = c.audit(exps) {
            verdict.violated.push(Violation { constraint: c, explanation });
        } else {
            verdict.satisfied.push(c);
        }
    }
    verdict
}

/// Audits every hypothesis of `theorem`, including those on the kernels.
pub fn validate_with_kernels(theorem: TheoremId, exps: &ExponentSet, kernels: &KernelVector) -> HypothesisVerdict {
    let mut verdict =
        HypothesisVerdict { theorem, satisfied: Vec::new(), violated: Vec::new(), unchecked: Vec::new() };
    for &c in theorem.hypotheses() {
        match c.audit_kernels(exps, kernels) {
            Some(explanation) => verdict.violated.push(Violation { constraint: c, explanation }),
            None => verdict.satisfied.push(c),
        }
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(alpha: f64, s: f64, p: &[f64], kappa: f64) -> ExponentSet {
        ExponentSet::new(1, alpha, s, p, kappa).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let e = set(0.5, f64::INFINITY, &[3.0, 3.0], 0.0);
        assert!((e.p() - 1.5).abs() < 1e-15);
        assert!((e.q_lebesgue().finite().unwrap() - 6.0).abs() < 1e-12);
        let e = set(0.5, f64::INFINITY, &[3.0, 3.0], 0.2);
        assert!((e.q_adams().finite().unwrap() - 24.0).abs() < 1e-9);
        let e = set(0.5, f64::INFINITY, &[4.0, 4.0], 0.0);
        assert_eq!(e.q_lebesgue(), Exponent::Critical);
        assert_eq!(set(0.5, 4.0, &[6.0, 6.0], 0.0).q_lebesgue(), Exponent::Invalid);
        assert!((set(0.5, 4.0, &[3.0], 0.0).s_prime() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derive_rejects_out_of_range() {
        assert!(matches!(ExponentSet::new(1, 2.0, 2.0, &[2.0, 2.0], 0.0), Err(ExponentError::Alpha { .. })));
        assert!(matches!(ExponentSet::new(1, 0.0, 2.0, &[2.0], 0.0), Err(ExponentError::Alpha { .. })));
        assert!(matches!(ExponentSet::new(1, 0.5, 2.0, &[0.5], 0.0), Err(ExponentError::PBelowOne { .. })));
        assert!(matches!(ExponentSet::new(1, 0.5, 1.0, &[2.0], 0.0), Err(ExponentError::S(_))));
        assert!(matches!(ExponentSet::new(1, 0.5, 2.0, &[2.0], 1.0), Err(ExponentError::Kappa(_))));
        assert!(matches!(ExponentSet::new(3, 0.5, 2.0, &[2.0], 0.0), Err(ExponentError::Dimension(3))));
        assert!(matches!(ExponentSet::new(1, 0.5, 2.0, &[2.0; 4], 0.0), Err(ExponentError::Multilinearity(4))));
    }

    #[test]
    fn validate_examples() {
        let e = set(0.5, 4.0, &[3.0, 3.0], 0.0);
        let v = validate(T::LebesgueStrong, &e);
        assert!(v.violated.is_empty());
        assert_eq!(v.satisfied, vec![C::SPrimeLtP, C::PLtNOverAlpha]);
        assert_eq!(v.unchecked, vec![C::OmegaInLs]);

        let e = set(0.5, 4.0, &[4.0 / 3.0, 3.0], 0.0);
        let v = validate(T::LebesgueStrong, &e);
        assert_eq!(v.violated_constraints(), vec![C::SPrimeLtP]);
        assert!(v.violated[0].explanation.contains("p_1"));
    }

    #[test]
    fn critical_morrey_reports_required_kappa() {
        let e = set(0.5, 4.0, &[2.0, 2.0], 0.0);
        let v = validate(T::MaximalMorreyCritical, &e);
        assert_eq!(v.violated_constraints(), vec![C::KappaCritical]);
        assert!(v.violated[0].explanation.contains("= 0.5"), "{}", v.violated[0].explanation);
        // with p = (4, 4) the identity forces kappa = 0, the Lebesgue critical case
        let e = set(0.5, 4.0, &[4.0, 4.0], 0.0);
        assert!(validate(T::MaximalMorreyCritical, &e).violated.is_empty());
    }

    #[test]
    fn kappa_chain_examples() {
        assert!((kappa_chain(&[4.0, 4.0], &[2.0, 2.0], 0.5, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((kappa_chain(&[4.0, 4.0], &[8.0 / 3.0, 8.0 / 3.0], 1.0, 2).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(kappa_chain(&[4.0, 4.0], &[4.0, 4.0], 0.5, 1), Err(ExponentError::NotBelowCritical(1)));
        assert!(matches!(kappa_chain(&[3.0, 3.0], &[2.0, 2.0], 0.5, 1), Err(ExponentError::NotCritical { .. })));
        assert_eq!(kappa_chain(&[4.0, 4.0], &[2.0, 3.0], 0.5, 1), Err(ExponentError::UnevenChain));
    }

    #[test]
    fn olsen_r() {
        let e = set(0.5, f64::INFINITY, &[3.0, 3.0], 0.0).with_outer_p(3.0).unwrap();
        // 1/q = 1/6, 1/r = 1/3 + 1/6
        assert!((e.r().finite().unwrap() - 2.0).abs() < 1e-12);
        assert!(validate(T::OlsenStrong, &e).violated.is_empty());
        let bad = set(0.5, f64::INFINITY, &[6.0, 6.0], 0.0).with_outer_p(3.0).unwrap();
        assert_eq!(validate(T::OlsenStrong, &bad).violated_constraints(), vec![C::RLtMinPQ]);
    }

    #[test]
    fn theorem_ids_roundtrip() {
        for t in TheoremId::ALL {
            assert_eq!(TheoremId::parse(t.as_str()).unwrap(), t);
        }
        assert!(TheoremId::parse("9.9").is_err());
    }
}
