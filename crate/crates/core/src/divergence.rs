//! Divergence families on distributions and channels.
//!
//! All logarithms are natural. The convention `0·ln(0/x) = 0` applies: only
//! symbols in the support of the first argument contribute, and a symbol with
//! `p(x) > 0 = q(x)` makes the log-based divergences infinite.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::finstoch::{joint, Channel, Distribution};
use crate::scalar::{Ext, ExtReal, Rational, Scalar};

/// Selector for one of the supported divergence families.
///
/// `Kl`, `Renyi(1.0)` and `Tsallis(1.0)` evaluate identically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Kl,
    /// Rényi divergence of order `α ∈ [0, +∞]`.
    Renyi(f64),
    /// Total variation distance.
    Tv,
    /// Tsallis divergence of order `q > 0`.
    Tsallis(f64),
}

impl Family {
    pub fn renyi(alpha: f64) -> Result<Self> {
        let family = Family::Renyi(alpha);
        family.validate()?;
        Ok(family)
    }

    pub fn tsallis(q: f64) -> Result<Self> {
        let family = Family::Tsallis(q);
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Renyi(alpha) if alpha.is_nan() || alpha < 0.0 => Err(Error::InvalidParameter(format!(
                "Rényi order must lie in [0, inf], got {alpha}"
            ))),
            Family::Tsallis(q) if !(q.is_finite() && q > 0.0) => Err(Error::InvalidParameter(format!(
                "Tsallis order must be a positive real, got {q}"
            ))),
            _ => Ok(()),
        }
    }

    /// Short name used in reports: `kl`, `tv`, `renyi:2`, `renyi:inf`, `tsallis:2`.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Kl => f.write_str("kl"),
            Family::Tv => f.write_str("tv"),
            Family::Renyi(a) if a.is_infinite() => f.write_str("renyi:inf"),
            Family::Renyi(a) => write!(f, "renyi:{a}"),
            Family::Tsallis(q) => write!(f, "tsallis:{q}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => (k, Some(p)),
            None => (s.as_str(), None),
        };
        let parse_param = |p: Option<&str>| -> Result<f64> {
            let p = p.ok_or_else(|| Error::InvalidParameter(format!("{kind} needs an order, e.g. {kind}:2")))?;
            match p {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => p
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse order {p:?}"))),
            }
        };
        match kind {
            "kl" => Ok(Family::Kl),
            "tv" => Ok(Family::Tv),
            "renyi" => Family::renyi(parse_param(param)?),
            "tsallis" => Family::tsallis(parse_param(param)?),
            _ => Err(Error::InvalidParameter(format!("unknown divergence family {kind:?}"))),
        }
    }
}

/// A backend that can evaluate divergence families on probability vectors.
pub trait DivergenceScalar: Scalar {
    /// Divergence between two probability vectors of equal length.
    fn evaluate(family: &Family, p: &[Self], q: &[Self]) -> Result<Ext<Self>>;
}

fn total_variation<S: Scalar>(p: &[S], q: &[S]) -> S {
    let sum = p
        .iter()
        .zip(q)
        .fold(S::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    sum / (S::one() + S::one())
}

fn support_violated<S: Scalar>(p: &[S], q: &[S]) -> bool {
    p.iter().zip(q).any(|(a, b)| !a.is_zero() && b.is_zero())
}

/// `ln Σ exp(t)`, with `-∞` for an empty sum.
pub(crate) fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn nonneg(x: f64) -> ExtReal {
    ExtReal::from_f64(x.max(0.0))
}

fn kl_f64(p: &[f64], q: &[f64]) -> ExtReal {
    if support_violated(p, q) {
        return Ext::Infinite;
    }
    let sum: f64 = p
        .iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a.ln() - b.ln()))
        .sum();
    nonneg(sum)
}

fn renyi_f64(alpha: f64, p: &[f64], q: &[f64]) -> ExtReal {
    if alpha == 1.0 {
        return kl_f64(p, q);
    }
    if support_violated(p, q) {
        return Ext::Infinite;
    }
    let support = || p.iter().zip(q).filter(|(a, _)| **a > 0.0);
    if alpha == 0.0 {
        let mass: f64 = support().map(|(_, b)| b).sum();
        return nonneg(-mass.ln());
    }
    if alpha.is_infinite() {
        let max_log_ratio = support()
            .map(|(a, b)| a.ln() - b.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        return nonneg(max_log_ratio);
    }
    let lse = log_sum_exp(support().map(|(a, b)| alpha * a.ln() + (1.0 - alpha) * b.ln()));
    nonneg(lse / (alpha - 1.0))
}

fn tsallis_f64(order: f64, p: &[f64], q: &[f64]) -> ExtReal {
    if order == 1.0 {
        return kl_f64(p, q);
    }
    if order > 1.0 && support_violated(p, q) {
        return Ext::Infinite;
    }
    let sum: f64 = p
        .iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| {
            if *b == 0.0 {
                0.0
            } else {
                (order * a.ln() + (1.0 - order) * b.ln()).exp()
            }
        })
        .sum();
    nonneg((sum - 1.0) / (order - 1.0))
}

impl DivergenceScalar for f64 {
    fn evaluate(family: &Family, p: &[f64], q: &[f64]) -> Result<ExtReal> {
        family.validate()?;
        if p == q {
            return Ok(Ext::zero());
        }
        Ok(match *family {
            Family::Kl => kl_f64(p, q),
            Family::Renyi(alpha) => renyi_f64(alpha, p, q),
            Family::Tv => Ext::Finite(total_variation(p, q)),
            Family::Tsallis(order) => tsallis_f64(order, p, q),
        })
    }
}

impl DivergenceScalar for Rational {
    fn evaluate(family: &Family, p: &[Rational], q: &[Rational]) -> Result<Ext<Rational>> {
        family.validate()?;
        if p == q {
            return Ok(Ext::zero());
        }
        match *family {
            Family::Tv => Ok(Ext::Finite(total_variation(p, q))),
            Family::Tsallis(order) if order >= 2.0 && order.fract() == 0.0 => {
                if support_violated(p, q) {
                    return Ok(Ext::Infinite);
                }
                let k = order
                    .to_usize()
                    .ok_or_else(|| Error::InvalidParameter(format!("Tsallis order {order} is too large")))?;
                let sum = p
                    .iter()
                    .zip(q)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| {
                        acc + num_traits::pow(a.clone(), k) / num_traits::pow(b.clone(), k - 1)
                    });
                let denom = Rational::from_integer((k - 1).into());
                Ok(Ext::Finite((sum - Rational::one()) / denom))
            }
            _ => Err(Error::Unsupported {
                family: family.name(),
                backend: Rational::BACKEND,
            }),
        }
    }
}

/// `D(p ‖ q)` for two distributions on the same alphabet.
pub fn divergence<S: DivergenceScalar>(family: &Family, p: &Distribution<S>, q: &Distribution<S>) -> Result<Ext<S>> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: p.alphabet().labels().to_vec(),
            right: q.alphabet().labels().to_vec(),
        });
    }
    S::evaluate(family, p.probs(), q.probs())
}

/// Result of [`channel_divergence`]: the largest column divergence and the
/// first column attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelDivergence<S = f64> {
    pub value: Ext<S>,
    pub argmax: usize,
}

pub(crate) fn ensure_same_shape<S: Scalar>(f: &Channel<S>, g: &Channel<S>) -> Result<()> {
    if f.source() != g.source() || f.target() != g.target() {
        return Err(Error::ShapeMismatch(format!(
            "channels {}→{} and {}→{} symbols differ in source or target",
            f.source().len(),
            f.target().len(),
            g.source().len(),
            g.target().len()
        )));
    }
    Ok(())
}

/// `max_x D(f_x ‖ g_x)`, ties going to the lowest column.
pub fn channel_divergence<S: DivergenceScalar>(
    family: &Family,
    f: &Channel<S>,
    g: &Channel<S>,
) -> Result<ChannelDivergence<S>> {
    ensure_same_shape(f, g)?;
    let mut best = ChannelDivergence {
        value: S::evaluate(family, &f.column(0), &g.column(0))?,
        argmax: 0,
    };
    for x in 1..f.source().len() {
        let value = S::evaluate(family, &f.column(x), &g.column(x))?;
        if value > best.value {
            best = ChannelDivergence { value, argmax: x };
        }
    }
    Ok(best)
}

/// `D(f ‖ g | p) = D(fp ‖ gp)`, the divergence between the two joints.
pub fn conditional_divergence<S: DivergenceScalar>(
    family: &Family,
    f: &Channel<S>,
    g: &Channel<S>,
    p: &Distribution<S>,
) -> Result<Ext<S>> {
    ensure_same_shape(f, g)?;
    divergence(family, &joint(p, f)?, &joint(p, g)?)
}

/// The conditional divergence assembled from per-column divergences.
///
/// KL, TV and Tsallis average the columns under `p`; Rényi takes the
/// `p`-weighted exponential mean in the log domain. Used to cross-check
/// [`conditional_divergence`].
pub fn conditional_divergence_by_columns(
    family: &Family,
    f: &Channel,
    g: &Channel,
    p: &Distribution,
) -> Result<ExtReal> {
    ensure_same_shape(f, g)?;
    if p.alphabet() != f.source() {
        return Err(Error::AlphabetMismatch {
            left: p.alphabet().labels().to_vec(),
            right: f.source().labels().to_vec(),
        });
    }
    let mut columns = Vec::new();
    for (x, &px) in p.probs().iter().enumerate() {
        if px > 0.0 {
            columns.push((px, f64::evaluate(family, &f.column(x), &g.column(x))?));
        }
    }
    let weighted_mean = |cols: &[(f64, ExtReal)]| -> ExtReal {
        if cols.iter().any(|(_, d)| d.is_infinite()) {
            return Ext::Infinite;
        }
        ExtReal::from_f64(cols.iter().map(|(w, d)| w * d.to_f64()).sum())
    };
    Ok(match *family {
        Family::Kl | Family::Tv | Family::Tsallis(_) => weighted_mean(&columns),
        Family::Renyi(1.0) => weighted_mean(&columns),
        Family::Renyi(alpha) if alpha.is_infinite() => {
            columns.into_iter().map(|(_, d)| d).fold(Ext::zero(), Ext::max_of)
        }
        Family::Renyi(alpha) => {
            if columns.iter().any(|(_, d)| d.is_infinite()) {
                Ext::Infinite
            } else {
                let lse = log_sum_exp(columns.iter().map(|(w, d)| w.ln() + (alpha - 1.0) * d.to_f64()));
                nonneg(lse / (alpha - 1.0))
            }
        }
    })
}

/// Both sides of a chain-rule identity and their distance.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRuleCheck {
    /// Divergence between the joints.
    pub lhs: ExtReal,
    /// The decomposed right-hand side.
    pub rhs: ExtReal,
    /// `|lhs − rhs|`; zero when both are infinite, infinite when exactly one is.
    pub residual: f64,
    pub passed: bool,
}

impl ChainRuleCheck {
    fn new(lhs: ExtReal, rhs: ExtReal, tol: f64) -> Self {
        let residual = match (&lhs, &rhs) {
            (Ext::Infinite, Ext::Infinite) => 0.0,
            (Ext::Finite(a), Ext::Finite(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        ChainRuleCheck {
            lhs,
            rhs,
            residual,
            passed: residual < tol,
        }
    }
}

fn ensure_chain_shapes(p: &Distribution, p2: &Distribution, f: &Channel, f2: &Channel) -> Result<()> {
    ensure_same_shape(f, f2)?;
    if p.alphabet() != p2.alphabet() || p.alphabet() != f.source() {
        return Err(Error::ShapeMismatch(
            "sources must share the channels' input alphabet".into(),
        ));
    }
    Ok(())
}

/// Residual of `D(fp ‖ f′p′) = D(p ‖ p′) + Σ_x p(x)·D(f_x ‖ f′_x)` for KL.
pub fn kl_chain_rule_check(
    p: &Distribution,
    p2: &Distribution,
    f: &Channel,
    f2: &Channel,
    tol: f64,
) -> Result<ChainRuleCheck> {
    ensure_chain_shapes(p, p2, f, f2)?;
    let lhs = divergence(&Family::Kl, &joint(p, f)?, &joint(p2, f2)?)?;
    let mut rhs = divergence(&Family::Kl, p, p2)?;
    for (x, &px) in p.probs().iter().enumerate() {
        if px > 0.0 {
            let d = kl_f64(&f.column(x), &f2.column(x));
            rhs = rhs
                + match d {
                    Ext::Finite(v) => Ext::Finite(px * v),
                    Ext::Infinite => Ext::Infinite,
                };
        }
    }
    Ok(ChainRuleCheck::new(lhs, rhs, tol))
}

/// Residual of the logarithmic chain rule for the Rényi divergence,
/// `D_α(fp ‖ f′p′) = (α−1)⁻¹ ln Σ_x (p(x)/p′(x))^{α−1} e^{(α−1) D_α(f_x ‖ f′_x)} p(x)`.
///
/// Requires `α ∈ (0, ∞) \ {1}`, `p ≪ p′` and `f_x ≪ f′_x` on the support of `p`.
pub fn renyi_log_chain_rule_check(
    alpha: f64,
    p: &Distribution,
    p2: &Distribution,
    f: &Channel,
    f2: &Channel,
    tol: f64,
) -> Result<ChainRuleCheck> {
    if !(alpha > 0.0 && alpha.is_finite() && alpha != 1.0) {
        return Err(Error::InvalidParameter(format!(
            "logarithmic chain rule needs α in (0, inf) without 1, got {alpha}"
        )));
    }
    ensure_chain_shapes(p, p2, f, f2)?;
    if support_violated(p.probs(), p2.probs()) {
        return Err(Error::SupportViolation(
            "p is not absolutely continuous w.r.t. p′".into(),
        ));
    }
    let family = Family::Renyi(alpha);
    let lhs = divergence(&family, &joint(p, f)?, &joint(p2, f2)?)?;
    let mut log_terms = Vec::new();
    for (x, (&px, &px2)) in p.probs().iter().zip(p2.probs()).enumerate() {
        if px == 0.0 {
            continue;
        }
        let (fx, fx2) = (f.column(x), f2.column(x));
        if support_violated(&fx, &fx2) {
            return Err(Error::SupportViolation(format!(
                "column {x} of f is not absolutely continuous w.r.t. f′"
            )));
        }
        let d = renyi_f64(alpha, &fx, &fx2).to_f64();
        log_terms.push((alpha - 1.0) * (px.ln() - px2.ln()) + (alpha - 1.0) * d + px.ln());
    }
    let rhs = ExtReal::from_f64(log_sum_exp(log_terms) / (alpha - 1.0));
    Ok(ChainRuleCheck::new(lhs, rhs, tol))
}
