//! Property checks for the enrichment inequalities, seeded instance
//! generation, and randomized counterexample search.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; instance
//! `i` of a sweep or search uses stream `i`, so every instance can be
//! regenerated on its own and results never depend on thread scheduling.

use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::divergence::{channel_divergence, divergence, DivergenceScalar, Family};
use crate::error::{Error, Result};
use crate::finstoch::{compose, joint, marginals, tensor, Alphabet, Channel, Distribution, JointDistribution};
use crate::scalar::{Ext, Rational, Scalar};

/// Default tolerance for float-mode inequality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest alphabet size drawn by sweeps.
pub const MAX_SWEEP_SIZE: usize = 5;

/// Instances handled per parallel batch during counterexample search.
const SEARCH_CHUNK: usize = 4096;

/// Deterministic per-instance random stream.
pub fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Flat-Dirichlet weights: i.i.d. unit exponentials, each zeroed with
/// probability `sparsity` (one randomly chosen entry is always kept).
fn sample_weights(rng: &mut impl Rng, n: usize, sparsity: f64) -> Vec<f64> {
    let keep = if sparsity > 0.0 { rng.random_range(0..n) } else { 0 };
    (0..n)
        .map(|i| {
            let w = -(1.0 - rng.random::<f64>()).ln();
            let dropped = sparsity > 0.0 && i != keep && rng.random::<f64>() < sparsity;
            if dropped {
                0.0
            } else if w > 0.0 {
                w
            } else {
                f64::MIN_POSITIVE
            }
        })
        .collect()
}

fn sample_distribution<S: Scalar>(rng: &mut impl Rng, alphabet: Alphabet, sparsity: f64) -> Result<Distribution<S>> {
    let weights = sample_weights(rng, alphabet.len(), sparsity);
    Distribution::new(alphabet, S::from_weights(&weights))
}

fn sample_channel<S: Scalar>(
    rng: &mut impl Rng,
    source: Alphabet,
    target: Alphabet,
    sparsity: f64,
) -> Result<Channel<S>> {
    let columns = (0..source.len())
        .map(|_| S::from_weights(&sample_weights(rng, target.len(), sparsity)))
        .collect();
    Channel::from_columns(source, target, columns)
}

fn indexed(n: usize) -> Result<Alphabet> {
    if n == 0 {
        return Err(Error::InvalidParameter("alphabet size must be at least 1".into()));
    }
    Alphabet::indexed(n)
}

/// A uniformly random distribution on `n` symbols.
pub fn gen_distribution<S: Scalar>(n: usize, seed: u64) -> Result<Distribution<S>> {
    gen_distribution_sparse(n, seed, 0.0)
}

/// Like [`gen_distribution`], with each entry zeroed with probability `sparsity`.
pub fn gen_distribution_sparse<S: Scalar>(n: usize, seed: u64, sparsity: f64) -> Result<Distribution<S>> {
    let alphabet = indexed(n)?;
    sample_distribution(&mut instance_rng(seed, 0), alphabet, sparsity)
}

/// A random channel from `n` source symbols to `m` target symbols, each column
/// uniform on the simplex.
pub fn gen_channel<S: Scalar>(n: usize, m: usize, seed: u64) -> Result<Channel<S>> {
    gen_channel_sparse(n, m, seed, 0.0)
}

pub fn gen_channel_sparse<S: Scalar>(n: usize, m: usize, seed: u64, sparsity: f64) -> Result<Channel<S>> {
    let (source, target) = (indexed(n)?, indexed(m)?);
    sample_channel(&mut instance_rng(seed, 0), source, target, sparsity)
}

/// The inequality a [`CheckResult`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    Sequential,
    Tensor,
    MarginalMonotone,
    ChainBound,
    DataProcessing,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::Sequential,
        CheckKind::Tensor,
        CheckKind::MarginalMonotone,
        CheckKind::ChainBound,
        CheckKind::DataProcessing,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Sequential => "sequential",
            CheckKind::Tensor => "tensor",
            CheckKind::MarginalMonotone => "marginal_monotone",
            CheckKind::ChainBound => "chain_bound",
            CheckKind::DataProcessing => "data_processing",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of checking `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult<S = f64> {
    pub check: CheckKind,
    pub passed: bool,
    pub lhs: Ext<S>,
    pub rhs: Ext<S>,
    /// `rhs − lhs` when both sides are finite.
    pub slack: Option<S>,
}

impl<S: Scalar> CheckResult<S> {
    fn judge(check: CheckKind, lhs: Ext<S>, rhs: Ext<S>, tol: f64) -> Self {
        CheckResult {
            check,
            passed: lhs.le_within(&rhs, tol),
            slack: lhs.gap_to(&rhs),
            lhs,
            rhs,
        }
    }

    /// `lhs − rhs` as a float: infinite when only `lhs` is, `None` when `rhs` is infinite.
    pub fn excess(&self) -> Option<f64> {
        match (&self.lhs, &self.rhs) {
            (_, Ext::Infinite) => None,
            (Ext::Infinite, _) => Some(f64::INFINITY),
            (Ext::Finite(l), Ext::Finite(r)) => Some((l.clone() - r.clone()).to_f64_lossy()),
        }
    }
}

/// `D(g∘f ‖ g′∘f′) ≤ D(f ‖ f′) + D(g ‖ g′)` for channel divergences.
pub fn check_sequential<S: DivergenceScalar>(
    family: &Family,
    f: &Channel<S>,
    f2: &Channel<S>,
    g: &Channel<S>,
    g2: &Channel<S>,
    tol: f64,
) -> Result<CheckResult<S>> {
    let lhs = channel_divergence(family, &compose(g, f)?, &compose(g2, f2)?)?.value;
    let rhs = channel_divergence(family, f, f2)?.value + channel_divergence(family, g, g2)?.value;
    Ok(CheckResult::judge(CheckKind::Sequential, lhs, rhs, tol))
}

/// `D(f⊗h ‖ f′⊗h′) ≤ D(f ‖ f′) + D(h ‖ h′)`.
pub fn check_tensor<S: DivergenceScalar>(
    family: &Family,
    f: &Channel<S>,
    f2: &Channel<S>,
    h: &Channel<S>,
    h2: &Channel<S>,
    tol: f64,
) -> Result<CheckResult<S>> {
    let lhs = channel_divergence(family, &tensor(f, h), &tensor(f2, h2))?.value;
    let rhs = channel_divergence(family, f, f2)?.value + channel_divergence(family, h, h2)?.value;
    Ok(CheckResult::judge(CheckKind::Tensor, lhs, rhs, tol))
}

/// `D(r_X ‖ r′_X) ≤ D(r ‖ r′)`.
pub fn check_marginal_monotone<S: DivergenceScalar>(
    family: &Family,
    r: &JointDistribution<S>,
    r2: &JointDistribution<S>,
    tol: f64,
) -> Result<CheckResult<S>> {
    let lhs = divergence(family, &marginals(r)?.0, &marginals(r2)?.0)?;
    let rhs = divergence(family, r, r2)?;
    Ok(CheckResult::judge(CheckKind::MarginalMonotone, lhs, rhs, tol))
}

/// `D(fp ‖ f′p′) ≤ D(p ‖ p′) + max_x D(f_x ‖ f′_x)` with `fp` the joint.
pub fn check_chain_bound<S: DivergenceScalar>(
    family: &Family,
    p: &Distribution<S>,
    p2: &Distribution<S>,
    f: &Channel<S>,
    f2: &Channel<S>,
    tol: f64,
) -> Result<CheckResult<S>> {
    let lhs = divergence(family, &joint(p, f)?, &joint(p2, f2)?)?;
    let rhs = divergence(family, p, p2)? + channel_divergence(family, f, f2)?.value;
    Ok(CheckResult::judge(CheckKind::ChainBound, lhs, rhs, tol))
}

/// `D(g∘p ‖ g∘p′) ≤ D(p ‖ p′)`.
pub fn check_data_processing<S: DivergenceScalar>(
    family: &Family,
    p: &Distribution<S>,
    p2: &Distribution<S>,
    g: &Channel<S>,
    tol: f64,
) -> Result<CheckResult<S>> {
    let lhs = divergence(family, &p.push(g)?, &p2.push(g)?)?;
    let rhs = divergence(family, p, p2)?;
    Ok(CheckResult::judge(CheckKind::DataProcessing, lhs, rhs, tol))
}

/// Sparsity used for sweep instance `index`: every fourth instance has zeros,
/// so support violations and infinite divergences are exercised too.
fn sweep_sparsity(index: u64) -> f64 {
    if index % 4 == 3 {
        0.3
    } else {
        0.0
    }
}

/// Runs all five checks on the random instance `index` of a sweep.
pub fn sweep_instance<S: DivergenceScalar>(
    family: &Family,
    seed: u64,
    index: u64,
    tol: f64,
) -> Result<[CheckResult<S>; 5]> {
    let rng = &mut instance_rng(seed, index);
    let s = sweep_sparsity(index);
    let mut size = || rng.random_range(1..=MAX_SWEEP_SIZE);
    let (nx, ny, nz, na, nb) = (size(), size(), size(), size(), size());
    let (x, y, z, a, b) = (indexed(nx)?, indexed(ny)?, indexed(nz)?, indexed(na)?, indexed(nb)?);

    let f = sample_channel::<S>(rng, x.clone(), y.clone(), s)?;
    let f2 = sample_channel::<S>(rng, x.clone(), y.clone(), s)?;
    let g = sample_channel::<S>(rng, y.clone(), z.clone(), s)?;
    let g2 = sample_channel::<S>(rng, y.clone(), z.clone(), s)?;
    let h = sample_channel::<S>(rng, a.clone(), b.clone(), s)?;
    let h2 = sample_channel::<S>(rng, a, b, s)?;
    let xy = Alphabet::product(&x, &y);
    let r = sample_distribution::<S>(rng, xy.clone(), s)?;
    let r2 = sample_distribution::<S>(rng, xy, s)?;
    let p = sample_distribution::<S>(rng, x.clone(), s)?;
    let p2 = sample_distribution::<S>(rng, x, s)?;

    Ok([
        check_sequential(family, &f, &f2, &g, &g2, tol)?,
        check_tensor(family, &f, &f2, &h, &h2, tol)?,
        check_marginal_monotone(family, &r, &r2, tol)?,
        check_chain_bound(family, &p, &p2, &f, &f2, tol)?,
        check_data_processing(family, &p, &p2, &f, tol)?,
    ])
}

/// Failure counts of a sweep, per check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckTally {
    pub check: CheckKind,
    pub failures: usize,
    /// Lowest failing instance index.
    pub first_failure: Option<u64>,
}

/// Aggregate result of [`sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub family: Family,
    pub seed: u64,
    pub instances: u64,
    pub checks: Vec<CheckTally>,
    /// Largest `lhs − rhs` over all comparisons with a finite right-hand side.
    pub max_violation: Option<f64>,
}

impl SweepSummary {
    pub fn total_failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

/// Evaluates every check on `instances` seeded random instances in parallel.
pub fn sweep<S: DivergenceScalar>(family: &Family, instances: u64, seed: u64, tol: f64) -> Result<SweepSummary> {
    family.validate()?;
    let outcomes: Vec<[(bool, Option<f64>); 5]> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let results = sweep_instance::<S>(family, seed, i, tol)?;
            Ok(results.map(|r| (r.passed, r.excess())))
        })
        .collect::<Result<_>>()?;

    let mut checks: Vec<CheckTally> = CheckKind::ALL
        .iter()
        .map(|&check| CheckTally {
            check,
            failures: 0,
            first_failure: None,
        })
        .collect();
    let mut max_violation: Option<f64> = None;
    for (i, outcome) in outcomes.iter().enumerate() {
        for (tally, (passed, excess)) in checks.iter_mut().zip(outcome) {
            if !passed {
                tally.failures += 1;
                tally.first_failure.get_or_insert(i as u64);
            }
            if let Some(e) = excess {
                max_violation = Some(max_violation.map_or(*e, |m| m.max(*e)));
            }
        }
    }
    Ok(SweepSummary {
        family: *family,
        seed,
        instances,
        checks,
        max_violation,
    })
}

/// Sizes for counterexample search: `p` on `source` symbols, `f: source → target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub source: usize,
    pub target: usize,
}

impl Shape {
    pub fn new(source: usize, target: usize) -> Result<Self> {
        if source == 0 || target == 0 {
            return Err(Error::InvalidParameter("shape sizes must be at least 1".into()));
        }
        Ok(Shape { source, target })
    }
}

/// A search instance `(p, p′, f, f′)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<S = f64> {
    pub p: Distribution<S>,
    pub p2: Distribution<S>,
    pub f: Channel<S>,
    pub f2: Channel<S>,
}

impl<S: DivergenceScalar> Instance<S> {
    /// The sequential check on `f∘p` against `f′∘p′` and the chain bound on the joints.
    pub fn evaluate(&self, family: &Family, tol: f64) -> Result<(CheckResult<S>, CheckResult<S>)> {
        let sequential = check_sequential(
            family,
            &self.p.as_channel(),
            &self.p2.as_channel(),
            &self.f,
            &self.f2,
            tol,
        )?;
        let chain = check_chain_bound(family, &self.p, &self.p2, &self.f, &self.f2, tol)?;
        Ok((sequential, chain))
    }
}

/// Produces search instances; random sampling is the only built-in strategy.
pub trait SearchStrategy: Sync {
    fn instance<S: Scalar>(&self, shape: Shape, seed: u64, index: u64) -> Result<Instance<S>>;
}

/// Independent uniform draws per instance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RandomSampling {
    pub sparsity: f64,
}

impl SearchStrategy for RandomSampling {
    fn instance<S: Scalar>(&self, shape: Shape, seed: u64, index: u64) -> Result<Instance<S>> {
        let rng = &mut instance_rng(seed, index);
        let (x, y) = (indexed(shape.source)?, indexed(shape.target)?);
        Ok(Instance {
            p: sample_distribution(rng, x.clone(), self.sparsity)?,
            p2: sample_distribution(rng, x.clone(), self.sparsity)?,
            f: sample_channel(rng, x.clone(), y.clone(), self.sparsity)?,
            f2: sample_channel(rng, x, y, self.sparsity)?,
        })
    }
}

/// An instance violating at least one of the two searched inequalities.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness<S = f64> {
    pub family: Family,
    pub seed: u64,
    pub index: u64,
    pub shape: Shape,
    pub instance: Instance<S>,
    pub sequential: CheckResult<S>,
    pub chain_bound: CheckResult<S>,
}

impl<S: DivergenceScalar> Witness<S> {
    /// Largest excess among the failing checks.
    pub fn violation(&self) -> f64 {
        [&self.sequential, &self.chain_bound]
            .into_iter()
            .filter(|r| !r.passed)
            .filter_map(CheckResult::excess)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether both inequalities fail on this instance.
    pub fn co_occurs(&self) -> bool {
        !self.sequential.passed && !self.chain_bound.passed
    }

    /// Re-evaluates both checks on the stored instance.
    pub fn replay(&self, tol: f64) -> Result<(CheckResult<S>, CheckResult<S>)> {
        self.instance.evaluate(&self.family, tol)
    }

    /// Regenerates the instance from `(seed, index)` with random sampling.
    pub fn regenerate(&self, strategy: &impl SearchStrategy) -> Result<Instance<S>> {
        strategy.instance(self.shape, self.seed, self.index)
    }
}

/// Options for [`search_counterexample`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub tol: f64,
    /// Scan the whole budget and keep the largest violation instead of the first.
    pub max_violation: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: DEFAULT_TOL,
            max_violation: false,
        }
    }
}

fn try_witness<S: DivergenceScalar>(
    family: &Family,
    shape: Shape,
    seed: u64,
    index: u64,
    strategy: &impl SearchStrategy,
    tol: f64,
) -> Result<Option<Witness<S>>> {
    let instance = strategy.instance::<S>(shape, seed, index)?;
    let (sequential, chain_bound) = instance.evaluate(family, tol)?;
    if sequential.passed && chain_bound.passed {
        return Ok(None);
    }
    Ok(Some(Witness {
        family: *family,
        seed,
        index,
        shape,
        instance,
        sequential,
        chain_bound,
    }))
}

/// Draws `budget` instances and returns the lowest-index witness (or the
/// largest violation, ties to the lowest index), or `None` if every instance passes.
pub fn search_counterexample<S: DivergenceScalar>(
    family: &Family,
    shape: Shape,
    budget: u64,
    seed: u64,
    strategy: &impl SearchStrategy,
    options: SearchOptions,
) -> Result<Option<Witness<S>>> {
    family.validate()?;
    let mut best: Option<Witness<S>> = None;
    let mut start = 0;
    while start < budget {
        let end = budget.min(start + SEARCH_CHUNK as u64);
        let found: Vec<Witness<S>> = (start..end)
            .into_par_iter()
            .map(|i| try_witness(family, shape, seed, i, strategy, options.tol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        for w in found {
            if !options.max_violation {
                return Ok(Some(w));
            }
            if best.as_ref().is_none_or(|b| w.violation() > b.violation()) {
                best = Some(w);
            }
        }
        start = end;
    }
    Ok(best)
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The two-symbol Tsallis(2) counterexample with exact rational entries.
pub fn tsallis_counterexample() -> Instance<Rational> {
    let x = Alphabet::indexed(2).expect("two symbols");
    let dist = |a, b| Distribution::new(x.clone(), vec![a, b]).expect("valid distribution");
    let chan = |cols: [[Rational; 2]; 2]| {
        Channel::from_columns(x.clone(), x.clone(), cols.into_iter().map(Vec::from).collect()).expect("valid channel")
    };
    Instance {
        p: dist(q(1, 2), q(1, 2)),
        p2: dist(q(3, 4), q(1, 4)),
        f: chan([[q(1, 4), q(3, 4)], [q(9, 10), q(1, 10)]]),
        f2: chan([[q(1, 20), q(19, 20)], [q(1, 2), q(1, 2)]]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP_FAMILIES: [Family; 8] = [
        Family::Kl,
        Family::Tv,
        Family::Renyi(0.0),
        Family::Renyi(0.5),
        Family::Renyi(1.0),
        Family::Renyi(1.5),
        Family::Renyi(2.0),
        Family::Renyi(f64::INFINITY),
    ];

    #[test]
    fn generators_are_deterministic_and_stochastic() {
        let p: Distribution = gen_distribution(1, 3).unwrap();
        assert_eq!(p.probs(), &[1.0]);
        let a: Channel = gen_channel(3, 2, 11).unwrap();
        assert_eq!(a, gen_channel(3, 2, 11).unwrap());
        assert_ne!(a, gen_channel(3, 2, 12).unwrap());
        for x in 0..3 {
            assert!((a.column(x).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let exact: Distribution<Rational> = gen_distribution(4, 5).unwrap();
        assert_eq!(exact.probs().iter().cloned().sum::<Rational>(), q(1, 1));
        assert!(gen_distribution::<f64>(0, 1).is_err());
        assert!(gen_channel::<f64>(2, 0, 1).is_err());
    }

    #[test]
    fn sparse_generator_keeps_one_entry() {
        for seed in 0..50 {
            let p: Distribution = gen_distribution_sparse(5, seed, 0.99).unwrap();
            assert!(p.probs().iter().any(|v| *v > 0.0));
        }
    }

    #[test]
    fn tsallis_counterexample_fails_exactly() {
        let family = Family::Tsallis(2.0);
        let inst = tsallis_counterexample();
        let (seq, chain) = inst.evaluate(&family, 0.0).unwrap();
        assert!(!seq.passed);
        assert_eq!(seq.lhs, Ext::Finite(q(1089, 871)));
        assert_eq!(seq.rhs, Ext::Finite(q(67, 57)));
        assert_eq!(seq.slack, Some(-q(3716, 49647)));
        assert!(!chain.passed);
        assert_eq!(chain.lhs, Ext::Finite(q(1787, 1425)));
        assert_eq!(chain.rhs, Ext::Finite(q(67, 57)));
    }

    #[test]
    fn trivial_cases_pass() {
        let f: Channel = gen_channel(3, 2, 1).unwrap();
        let g: Channel = gen_channel(2, 4, 2).unwrap();
        let p: Distribution = gen_distribution(3, 3).unwrap();
        let p2: Distribution = gen_distribution(3, 4).unwrap();
        for family in SWEEP_FAMILIES {
            let r = check_sequential(&family, &f, &f, &g, &g, DEFAULT_TOL).unwrap();
            assert!(r.passed && r.lhs == Ext::zero());
            let id = Channel::identity(p.alphabet());
            let r = check_data_processing(&family, &p, &p2, &id, DEFAULT_TOL).unwrap();
            assert!(r.passed);
            assert!((r.lhs.to_f64() - r.rhs.to_f64()).abs() < 1e-12);
            let constant = Channel::constant(p.alphabet(), &gen_distribution(2, 9).unwrap());
            let r = check_data_processing(&family, &p, &p2, &constant, DEFAULT_TOL).unwrap();
            assert!(r.lhs.to_f64() < 1e-14, "{family}: {r:?}");
        }
    }

    #[test]
    fn kl_tensor_is_additive_on_sources() {
        for seed in 0..20 {
            let f = gen_distribution::<f64>(3, seed).unwrap().as_channel();
            let f2 = gen_distribution::<f64>(3, seed + 100).unwrap().as_channel();
            let h = gen_distribution::<f64>(4, seed + 200).unwrap().as_channel();
            let h2 = gen_distribution::<f64>(4, seed + 300).unwrap().as_channel();
            let r = check_tensor(&Family::Kl, &f, &f2, &h, &h2, DEFAULT_TOL).unwrap();
            assert!(r.passed);
            assert!(r.slack.unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn small_sweeps_have_no_failures() {
        for family in SWEEP_FAMILIES {
            let summary = sweep::<f64>(&family, 300, 7, DEFAULT_TOL).unwrap();
            assert_eq!(summary.total_failures(), 0, "{family}: {summary:?}");
        }
    }

    #[test]
    fn sweep_is_reproducible() {
        let a = sweep::<f64>(&Family::Tsallis(2.0), 200, 3, DEFAULT_TOL).unwrap();
        let b = sweep::<f64>(&Family::Tsallis(2.0), 200, 3, DEFAULT_TOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn search_finds_tsallis_witness_and_replays() {
        let shape = Shape::new(2, 2).unwrap();
        let strategy = RandomSampling::default();
        let w = search_counterexample::<f64>(
            &Family::Tsallis(2.0),
            shape,
            100_000,
            7,
            &strategy,
            SearchOptions::default(),
        )
        .unwrap()
        .expect("witness");
        assert!(!w.sequential.passed || !w.chain_bound.passed);
        assert_eq!(
            w.replay(DEFAULT_TOL).unwrap(),
            (w.sequential.clone(), w.chain_bound.clone())
        );
        assert_eq!(w.regenerate(&strategy).unwrap(), w.instance);
        // sequential failure implies chain-bound failure by data processing
        if !w.sequential.passed {
            assert!(w.co_occurs());
        }
    }

    #[test]
    fn search_first_and_max_agree_on_existence() {
        let shape = Shape::new(2, 2).unwrap();
        let strategy = RandomSampling::default();
        let first = search_counterexample::<f64>(
            &Family::Tsallis(2.0),
            shape,
            5000,
            1,
            &strategy,
            SearchOptions::default(),
        )
        .unwrap()
        .unwrap();
        let max = search_counterexample::<f64>(
            &Family::Tsallis(2.0),
            shape,
            5000,
            1,
            &strategy,
            SearchOptions {
                max_violation: true,
                ..SearchOptions::default()
            },
        )
        .unwrap()
        .unwrap();
        assert!(max.index >= first.index);
        assert!(max.violation() >= first.violation());
    }

    #[test]
    fn kl_search_finds_nothing() {
        let shape = Shape::new(2, 2).unwrap();
        let found = search_counterexample::<f64>(
            &Family::Kl,
            shape,
            20_000,
            7,
            &RandomSampling::default(),
            SearchOptions::default(),
        )
        .unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn rational_search_replays_exactly() {
        let shape = Shape::new(2, 2).unwrap();
        let strategy = RandomSampling::default();
        let w = search_counterexample::<Rational>(
            &Family::Tsallis(2.0),
            shape,
            20_000,
            5,
            &strategy,
            SearchOptions::default(),
        )
        .unwrap()
        .expect("witness");
        assert_eq!(w.regenerate(&strategy).unwrap(), w.instance);
        assert_eq!(w.replay(0.0).unwrap(), (w.sequential.clone(), w.chain_bound.clone()));
    }
}
