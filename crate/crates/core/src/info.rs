//! Mutual information and entropy derived from a divergence.
//!
//! Every measure is computed from its definition, as the divergence between
//! the two sides of an equation that holds exactly in the degenerate case
//! (independence, determinism). Where a discrete closed form is known it is
//! evaluated separately and reported next to the definitional value.

use crate::divergence::{channel_divergence, divergence, DivergenceScalar, Family};
use crate::error::Result;
use crate::finstoch::{compose, joint, marginals, tensor, Channel, Distribution, JointDistribution};
use crate::scalar::{Ext, ExtReal, Scalar};

/// A measure computed from its definition, with the closed form when one applies.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureReport<S = f64> {
    pub value: Ext<S>,
    pub family: Family,
    pub closed_form: Option<Ext<S>>,
    /// `|value − closed_form|`: zero when both are infinite, infinite when exactly one is.
    pub residual: Option<f64>,
    /// The maximizing input for channel measures.
    pub argmax: Option<usize>,
}

impl<S: Scalar> MeasureReport<S> {
    fn new(family: &Family, value: Ext<S>, closed_form: Option<Ext<S>>) -> Self {
        let residual = closed_form.as_ref().map(|c| match (&value, c) {
            (Ext::Finite(v), Ext::Finite(c)) => (v.clone() - c.clone()).abs().to_f64_lossy(),
            (Ext::Infinite, Ext::Infinite) => 0.0,
            _ => f64::INFINITY,
        });
        MeasureReport {
            value,
            family: *family,
            closed_form,
            residual,
            argmax: None,
        }
    }

    fn with_argmax(mut self, argmax: usize) -> Self {
        self.argmax = Some(argmax);
        self
    }
}

fn to_f64s<S: Scalar>(values: &[S]) -> Vec<f64> {
    values.iter().map(Scalar::to_f64_lossy).collect()
}

/// Uses the exact polynomial form for TV and the float form otherwise;
/// log-based closed forms are unavailable in exact backends.
fn lift<S: Scalar>(family: &Family, tv: impl FnOnce() -> S, float: impl FnOnce() -> Option<ExtReal>) -> Option<Ext<S>> {
    match family {
        Family::Tv => Some(Ext::Finite(tv())),
        _ if S::EXACT => None,
        _ => float().map(|v| match v {
            Ext::Finite(x) => Ext::Finite(S::from_f64(x).expect("finite float converts")),
            Ext::Infinite => Ext::Infinite,
        }),
    }
}

fn nonneg(x: f64) -> ExtReal {
    ExtReal::from_f64(x.max(0.0))
}

/// Closed form of the conditional mutual information for joints `h(·,·|a)`
/// weighted by `p(a)`; a single unit-weight column gives plain mutual information.
fn mi_closed_form_f64(family: &Family, weights: &[f64], joints: &[Vec<f64>], ny: usize) -> Option<ExtReal> {
    // (weight, h, h_x·h_y) over the support of weight·h
    let mut terms = Vec::new();
    for (w, h) in weights.iter().zip(joints) {
        if *w == 0.0 {
            continue;
        }
        let nx = h.len() / ny;
        let hx: Vec<f64> = (0..nx).map(|i| h[i * ny..(i + 1) * ny].iter().sum()).collect();
        let hy: Vec<f64> = (0..ny).map(|j| (0..nx).map(|i| h[i * ny + j]).sum()).collect();
        for i in 0..nx {
            for j in 0..ny {
                let v = h[i * ny + j];
                if v > 0.0 {
                    terms.push((*w, v, hx[i] * hy[j]));
                }
            }
        }
    }
    let kl = |terms: &[(f64, f64, f64)]| nonneg(terms.iter().map(|(w, v, m)| w * v * (v / m).ln()).sum());
    match *family {
        Family::Kl => Some(kl(&terms)),
        Family::Renyi(1.0) => Some(kl(&terms)),
        Family::Renyi(0.0) => Some(nonneg(-terms.iter().map(|(w, _, m)| w * m).sum::<f64>().ln())),
        Family::Renyi(a) if a.is_infinite() => Some(nonneg(
            terms
                .iter()
                .map(|(_, v, m)| (v / m).ln())
                .fold(f64::NEG_INFINITY, f64::max),
        )),
        Family::Renyi(a) => {
            let s: f64 = terms.iter().map(|(w, v, m)| w * v.powf(a) * m.powf(1.0 - a)).sum();
            Some(nonneg(s.ln() / (a - 1.0)))
        }
        Family::Tv | Family::Tsallis(_) => None,
    }
}

fn mi_closed_form_tv<S: Scalar>(weights: &[S], joints: &[Vec<S>], ny: usize) -> S {
    let mut total = S::zero();
    for (w, h) in weights.iter().zip(joints) {
        let nx = h.len() / ny;
        let hx: Vec<S> = (0..nx)
            .map(|i| h[i * ny..(i + 1) * ny].iter().cloned().fold(S::zero(), |a, b| a + b))
            .collect();
        let hy: Vec<S> = (0..ny)
            .map(|j| (0..nx).map(|i| h[i * ny + j].clone()).fold(S::zero(), |a, b| a + b))
            .collect();
        for i in 0..nx {
            for j in 0..ny {
                let d = (h[i * ny + j].clone() - hx[i].clone() * hy[j].clone()).abs();
                total = total + w.clone() * d;
            }
        }
    }
    total / (S::one() + S::one())
}

fn mi_closed_form<S: Scalar>(family: &Family, weights: &[S], joints: &[Vec<S>], ny: usize) -> Option<Ext<S>> {
    lift(
        family,
        || mi_closed_form_tv(weights, joints, ny),
        || {
            let joints: Vec<Vec<f64>> = joints.iter().map(|h| to_f64s(h)).collect();
            mi_closed_form_f64(family, &to_f64s(weights), &joints, ny)
        },
    )
}

/// Closed form of the conditional entropy of the columns `f(·|x)` weighted by
/// `p(x)`; a single unit-weight column gives the entropy of a distribution.
fn entropy_closed_form_f64(family: &Family, weights: &[f64], columns: &[Vec<f64>]) -> Option<ExtReal> {
    let terms: Vec<(f64, f64)> = weights
        .iter()
        .zip(columns)
        .filter(|(w, _)| **w > 0.0)
        .flat_map(|(w, col)| col.iter().filter(|v| **v > 0.0).map(move |v| (*w, *v)))
        .collect();
    let shannon = |terms: &[(f64, f64)]| nonneg(-terms.iter().map(|(w, v)| w * v * v.ln()).sum::<f64>());
    // Σ w·v^e over the support
    let power_sum = |e: f64| terms.iter().map(|(w, v)| w * v.powf(e)).sum::<f64>();
    Some(match *family {
        Family::Kl => shannon(&terms),
        Family::Renyi(1.0) => shannon(&terms),
        Family::Renyi(a) if a.is_infinite() => {
            nonneg(-terms.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min).ln())
        }
        Family::Renyi(a) => nonneg(power_sum(2.0 - a).ln() / (a - 1.0)),
        Family::Tsallis(1.0) => shannon(&terms),
        Family::Tsallis(q) => nonneg((power_sum(2.0 - q) - 1.0) / (q - 1.0)),
        Family::Tv => Ext::Finite(1.0 - power_sum(2.0)),
    })
}

fn entropy_closed_form_tv<S: Scalar>(weights: &[S], columns: &[Vec<S>]) -> S {
    let collision = weights.iter().zip(columns).fold(S::zero(), |acc, (w, col)| {
        acc + col.iter().fold(S::zero(), |a, v| a + w.clone() * v.clone() * v.clone())
    });
    S::one() - collision
}

fn entropy_closed_form_generic<S: Scalar>(family: &Family, weights: &[S], columns: &[Vec<S>]) -> Option<Ext<S>> {
    lift(
        family,
        || entropy_closed_form_tv(weights, columns),
        || {
            let columns: Vec<Vec<f64>> = columns.iter().map(|c| to_f64s(c)).collect();
            entropy_closed_form_f64(family, &to_f64s(weights), &columns)
        },
    )
}

/// Closed-form entropy of a probability vector: Shannon for KL, the Rényi
/// entropy of order `2 − α` for Rényi-α, Gini-Simpson for TV, and the Tsallis
/// entropy of order `2 − q` for Tsallis-q.
pub fn entropy_closed_form(family: &Family, p: &[f64]) -> ExtReal {
    entropy_closed_form_f64(family, &[1.0], &[p.to_vec()]).expect("every family has an entropy closed form")
}

/// `I_D(r) = D(r ‖ r_X ⊗ r_Y)`.
pub fn mutual_information<S: DivergenceScalar>(family: &Family, r: &JointDistribution<S>) -> Result<MeasureReport<S>> {
    let (rx, ry) = marginals(r)?;
    let value = divergence(family, r, &rx.tensor(&ry))?;
    let closed = mi_closed_form(family, &[S::one()], &[r.probs().to_vec()], ry.len());
    Ok(MeasureReport::new(family, value, closed))
}

/// `I_D(h) = D(h ‖ (h_X ⊗ h_Y) ∘ copy_A)`, the largest per-input mutual information.
pub fn channel_mutual_information<S: DivergenceScalar>(family: &Family, h: &Channel<S>) -> Result<MeasureReport<S>> {
    let independent = h.independent_part()?;
    let d = channel_divergence(family, h, &independent)?;
    let ny = h.marginals()?.1.target().len();
    let mut closed: Option<Ext<S>> = Some(Ext::zero());
    for a in 0..h.source().len() {
        let col = mi_closed_form(family, &[S::one()], &[h.column(a)], ny);
        closed = closed.zip(col).map(|(best, c)| best.max_of(c));
    }
    Ok(MeasureReport::new(family, d.value, closed).with_argmax(d.argmax))
}

/// `I_D(h | p)`: divergence between `h` and its conditionally independent part,
/// both joined with the input source `p`.
pub fn conditional_mutual_information<S: DivergenceScalar>(
    family: &Family,
    h: &Channel<S>,
    p: &Distribution<S>,
) -> Result<MeasureReport<S>> {
    let independent = h.independent_part()?;
    let value = divergence(family, &joint(p, h)?, &joint(p, &independent)?)?;
    let ny = h.marginals()?.1.target().len();
    let columns: Vec<Vec<S>> = (0..h.source().len()).map(|a| h.column(a)).collect();
    let closed = mi_closed_form(family, p.probs(), &columns, ny);
    Ok(MeasureReport::new(family, value, closed))
}

/// `H_D(p) = D(copy ∘ p ‖ p ⊗ p)`.
pub fn entropy<S: DivergenceScalar>(family: &Family, p: &Distribution<S>) -> Result<MeasureReport<S>> {
    let diagonal = p.push(&Channel::copy(p.alphabet()))?;
    let value = divergence(family, &diagonal, &p.tensor(p))?;
    let closed = entropy_closed_form_generic(family, &[S::one()], &[p.probs().to_vec()]);
    Ok(MeasureReport::new(family, value, closed))
}

/// `H_D(f) = D(copy ∘ f ‖ (f ⊗ f) ∘ copy)`, the largest per-input entropy.
pub fn channel_entropy<S: DivergenceScalar>(family: &Family, f: &Channel<S>) -> Result<MeasureReport<S>> {
    let lhs = compose(&Channel::copy(f.target()), f)?;
    let rhs = compose(&tensor(f, f), &Channel::copy(f.source()))?;
    let d = channel_divergence(family, &lhs, &rhs)?;
    let mut closed: Option<Ext<S>> = Some(Ext::zero());
    for x in 0..f.source().len() {
        let col = entropy_closed_form_generic(family, &[S::one()], &[f.column(x)]);
        closed = closed.zip(col).map(|(best, c)| best.max_of(c));
    }
    Ok(MeasureReport::new(family, d.value, closed).with_argmax(d.argmax))
}

/// `H_D(f | p)`: divergence between the two sides of `p`-almost-sure
/// determinism, realized as joints on `X ⊗ (Y ⊗ Y)`.
pub fn conditional_entropy<S: DivergenceScalar>(
    family: &Family,
    f: &Channel<S>,
    p: &Distribution<S>,
) -> Result<MeasureReport<S>> {
    let copied = compose(&Channel::copy(f.target()), f)?;
    let independent = compose(&tensor(f, f), &Channel::copy(f.source()))?;
    let value = divergence(family, &joint(p, &copied)?, &joint(p, &independent)?)?;
    let columns: Vec<Vec<S>> = (0..f.source().len()).map(|x| f.column(x)).collect();
    let closed = entropy_closed_form_generic(family, p.probs(), &columns);
    Ok(MeasureReport::new(family, value, closed))
}

/// `1 − Σ p(x)²`, the probability that two independent draws differ.
pub fn gini_simpson<S: Scalar>(p: &Distribution<S>) -> S {
    let collision = p.probs().iter().fold(S::zero(), |acc, v| acc + v.clone() * v.clone());
    S::one() - collision
}
