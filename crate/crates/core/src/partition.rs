//! Discretization of continuous models on an interval by finite partitions,
//! and refinement scans of divergences and entropies.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::divergence::{divergence, Family};
use crate::error::{Error, Result};
use crate::finstoch::{Alphabet, Distribution};
use crate::info::entropy_closed_form;
use crate::scalar::{Ext, ExtReal};

/// Deepest dyadic partition a scan may request (2^24 cells).
pub const MAX_DEPTH: usize = 24;

/// Mass a model must place on its support hint.
const MASS_FLOOR: f64 = 1.0 - 1e-12;

/// Tolerated decrease of a cdf between consecutive boundaries.
const MONOTONE_TOL: f64 = 1e-12;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A probability distribution on the real line given by closed-form functions.
#[derive(Clone)]
pub struct ContinuousModel {
    name: String,
    cdf: RealFn,
    sf: Option<RealFn>,
    quantile: Option<RealFn>,
    support: (f64, f64),
}

impl fmt::Debug for ContinuousModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousModel")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl ContinuousModel {
    /// A model from a cdf; `support` must carry at least `1 − 1e-12` of the mass.
    pub fn custom(
        name: impl Into<String>,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Result<Self> {
        ContinuousModel {
            name: name.into(),
            cdf: Arc::new(cdf),
            sf: None,
            quantile: None,
            support,
        }
        .validated()
    }

    /// Adds an inverse cdf, enabling quantile partitions.
    pub fn with_quantile(mut self, quantile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.quantile = Some(Arc::new(quantile));
        self
    }

    /// Adds a survival function, used for accurate cell masses in the upper tail.
    pub fn with_survival(mut self, sf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.sf = Some(Arc::new(sf));
        self
    }

    fn validated(self) -> Result<Self> {
        let (a, b) = self.support;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Model(format!(
                "{}: support [{a}, {b}] is not a bounded interval",
                self.name
            )));
        }
        let mass = self.mass(a, b);
        if mass.is_nan() || mass < MASS_FLOOR {
            return Err(Error::Model(format!(
                "{}: support [{a}, {b}] holds mass {mass}",
                self.name
            )));
        }
        Ok(self)
    }

    /// Normal with mean `mu` and standard deviation `sigma`, supported on `mu ± 8σ`.
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        let n = Normal::new(mu, sigma).map_err(|e| Error::Model(format!("normal({mu}, {sigma}): {e}")))?;
        let support = (mu - 8.0 * sigma, mu + 8.0 * sigma);
        Ok(
            ContinuousModel::custom(format!("normal:{mu},{sigma}"), move |x| n.cdf(x), support)?
                .with_survival(move |x| n.sf(x))
                .with_quantile(move |u| n.inverse_cdf(u)),
        )
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::Model(format!("uniform({a}, {b}): empty interval")));
        }
        Ok(ContinuousModel::custom(
            format!("uniform:{a},{b}"),
            move |x| ((x - a) / (b - a)).clamp(0.0, 1.0),
            (a, b),
        )?
        .with_quantile(move |u| a + u * (b - a)))
    }

    /// Kumaraswamy(a, b) on `[0, 1]`, a Beta-like density with closed-form cdf.
    pub fn kumaraswamy(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Model(format!("kumaraswamy({a}, {b}): shapes must be positive")));
        }
        let sf = move |x: f64| (1.0 - x.clamp(0.0, 1.0).powf(a)).powf(b);
        Ok(
            ContinuousModel::custom(format!("kumaraswamy:{a},{b}"), move |x| 1.0 - sf(x), (0.0, 1.0))?
                .with_survival(sf)
                .with_quantile(move |u| (1.0 - (1.0 - u).powf(1.0 / b)).powf(1.0 / a)),
        )
    }

    /// A unit atom at `x0`, supported on `[x0 − 1, x0 + 1]`.
    pub fn point_mass(x0: f64) -> Result<Self> {
        ContinuousModel::custom(
            format!("point:{x0}"),
            move |x| if x >= x0 { 1.0 } else { 0.0 },
            (x0 - 1.0, x0 + 1.0),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    /// Mass of `(lo, hi]`, computed from the survival function in the upper tail.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        let c = self.cdf(lo);
        match &self.sf {
            Some(sf) if c > 0.5 => sf(lo) - sf(hi),
            _ => self.cdf(hi) - c,
        }
    }

    pub fn quantile(&self, u: f64) -> Option<f64> {
        self.quantile.as_ref().map(|q| q(u))
    }
}

impl FromStr for ContinuousModel {
    type Err = Error;

    /// Parses `normal:μ,σ`, `uniform:a,b`, `kumaraswamy:a,b` or `point:x`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let params: Vec<f64> = args
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Model(format!("{s}: {e}")))?;
        match (kind.trim().to_ascii_lowercase().as_str(), params.as_slice()) {
            ("normal", [mu, sigma]) => ContinuousModel::normal(*mu, *sigma),
            ("uniform", [a, b]) => ContinuousModel::uniform(*a, *b),
            ("kumaraswamy", [a, b]) => ContinuousModel::kumaraswamy(*a, *b),
            ("point", [x]) => ContinuousModel::point_mass(*x),
            _ => Err(Error::Model(format!("unknown model {s:?}"))),
        }
    }
}

/// Cells `[b_i, b_{i+1})` given by strictly increasing boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    boundaries: Vec<f64>,
}

impl Partition {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidParameter(
                "a partition needs at least two boundaries".into(),
            ));
        }
        if boundaries.iter().any(|b| !b.is_finite()) || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "partition boundaries must be finite and strictly increasing".into(),
            ));
        }
        Ok(Partition { boundaries })
    }

    /// `cells` equal-width cells on `[a, b]`.
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidParameter("a partition needs at least one cell".into()));
        }
        let width = (b - a) / cells as f64;
        let mut boundaries: Vec<f64> = (0..cells).map(|i| a + i as f64 * width).collect();
        boundaries.push(b);
        Partition::new(boundaries)
    }

    /// `2^depth` equal cells, the result of `depth` midpoint refinements of `[a, b]`.
    pub fn dyadic(a: f64, b: f64, depth: usize) -> Result<Self> {
        check_depth(depth)?;
        Partition::uniform(a, b, 1 << depth)
    }

    /// `cells` cells of equal model mass, truncated to `[a, b]`.
    pub fn quantile(model: &ContinuousModel, window: (f64, f64), cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidParameter("a partition needs at least one cell".into()));
        }
        let mut boundaries = vec![window.0];
        for i in 1..cells {
            let x = model
                .quantile(i as f64 / cells as f64)
                .ok_or_else(|| Error::Model(format!("{} has no quantile function", model.name())))?;
            if x > window.0 && x < window.1 {
                boundaries.push(x);
            }
        }
        boundaries.push(window.1);
        boundaries.dedup();
        Partition::new(boundaries)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn cells(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Splits every cell at its midpoint.
    pub fn refine(&self) -> Partition {
        let mut boundaries = Vec::with_capacity(2 * self.boundaries.len() - 1);
        for w in self.boundaries.windows(2) {
            boundaries.push(w[0]);
            boundaries.push(w[0] + (w[1] - w[0]) / 2.0);
        }
        boundaries.push(self.boundaries[self.boundaries.len() - 1]);
        Partition { boundaries }
    }

    /// For a partition produced by [`Partition::refine`]: the coarse cell of each fine cell.
    pub fn coarsen_map(&self) -> Vec<usize> {
        (0..self.cells()).map(|i| i / 2).collect()
    }
}

/// Pushes a distribution on fine cells forward along a cell map.
pub fn coarse_grain(p: &Distribution, map: &[usize], cells: usize) -> Result<Distribution> {
    if map.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: map.len(),
        });
    }
    let mut probs = vec![0.0; cells];
    for (v, &j) in p.probs().iter().zip(map) {
        *probs
            .get_mut(j)
            .ok_or_else(|| Error::InvalidParameter(format!("cell {j} out of range")))? += v;
    }
    Distribution::new(Alphabet::indexed(cells)?, probs)
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::Resource(format!(
            "depth {depth} exceeds the maximum of {MAX_DEPTH}"
        )));
    }
    Ok(())
}

/// Cell masses of `model`, renormalized by the mass captured by the partition.
pub fn bin(model: &ContinuousModel, part: &Partition) -> Result<Distribution> {
    let b = part.boundaries();
    let cdfs: Vec<f64> = b.iter().map(|&x| model.cdf(x)).collect();
    if let Some(i) = cdfs
        .windows(2)
        .position(|w| w[1] < w[0] - MONOTONE_TOL || w[0].is_nan())
    {
        return Err(Error::Model(format!(
            "{}: cdf decreases between {} and {}",
            model.name(),
            b[i],
            b[i + 1]
        )));
    }
    let masses: Vec<f64> = b.windows(2).map(|w| model.mass(w[0], w[1]).max(0.0)).collect();
    let total: f64 = masses.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Model(format!(
            "{} places no mass on the partition",
            model.name()
        )));
    }
    let probs = masses.into_iter().map(|m| m / total).collect();
    Distribution::new(Alphabet::indexed(part.cells())?, probs)
}

/// How scan partitions are built at each depth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Binning {
    /// `2^d` equal-width cells.
    #[default]
    Dyadic,
    /// `2^d` cells of equal model mass.
    Quantile,
}

/// Values of a quantity on a sequence of refining partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementScan {
    pub depths: Vec<usize>,
    pub cells: Vec<usize>,
    pub values: Vec<ExtReal>,
}

impl RefinementScan {
    /// First depth index whose value drops below its predecessor by more than `slack`.
    pub fn first_decrease(&self, slack: f64) -> Option<usize> {
        (1..self.values.len()).find(|&i| match (&self.values[i - 1], &self.values[i]) {
            (Ext::Infinite, Ext::Finite(_)) => true,
            (Ext::Finite(a), Ext::Finite(b)) => *b < a - slack,
            _ => false,
        })
    }

    /// Nondecreasing within `slack`; once infinite, stays infinite.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.first_decrease(slack).is_none()
    }

    pub fn last(&self) -> Option<&ExtReal> {
        self.values.last()
    }
}

fn scan_depths(
    max_depth: usize,
    eval: impl Fn(usize) -> Result<(usize, ExtReal)> + Sync + Send,
) -> Result<RefinementScan> {
    check_depth(max_depth)?;
    let rows: Vec<(usize, ExtReal)> = (0..=max_depth).into_par_iter().map(eval).collect::<Result<_>>()?;
    let (cells, values) = rows.into_iter().unzip();
    Ok(RefinementScan {
        depths: (0..=max_depth).collect(),
        cells,
        values,
    })
}

/// Convex hull of the two support hints.
pub fn shared_window(p: &ContinuousModel, q: &ContinuousModel) -> (f64, f64) {
    let (a, b) = (p.support(), q.support());
    (a.0.min(b.0), a.1.max(b.1))
}

/// `D(bin(p) ‖ bin(q))` on dyadic partitions of `window` (default: both supports'
/// hull) at depths `0..=max_depth`.
pub fn divergence_scan(
    family: &Family,
    p: &ContinuousModel,
    q: &ContinuousModel,
    max_depth: usize,
    window: Option<(f64, f64)>,
) -> Result<RefinementScan> {
    family.validate()?;
    let (a, b) = window.unwrap_or_else(|| shared_window(p, q));
    scan_depths(max_depth, |d| {
        let part = Partition::dyadic(a, b, d)?;
        let value = divergence(family, &bin(p, &part)?, &bin(q, &part)?)?;
        Ok((part.cells(), value))
    })
}

/// Entropy of `bin(p)` at depths `0..=max_depth`. Uses the closed form of the
/// family's entropy, which agrees with the definitional value but avoids the
/// quadratic `p ⊗ p` joint on fine partitions.
pub fn entropy_scan(
    family: &Family,
    p: &ContinuousModel,
    max_depth: usize,
    binning: Binning,
    window: Option<(f64, f64)>,
) -> Result<RefinementScan> {
    family.validate()?;
    let (a, b) = window.unwrap_or(p.support());
    scan_depths(max_depth, |d| {
        let part = match binning {
            Binning::Dyadic => Partition::dyadic(a, b, d)?,
            Binning::Quantile => Partition::quantile(p, (a, b), 1 << d)?,
        };
        let binned = bin(p, &part)?;
        Ok((part.cells(), entropy_closed_form(family, binned.probs())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::entropy;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    #[test]
    fn bins_simple_models() {
        let n = ContinuousModel::normal(0.0, 1.0).unwrap();
        let half = bin(&n, &Partition::new(vec![-8.0, 0.0, 8.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(half.probs()[0], 0.5, epsilon = 1e-15);
        let u = ContinuousModel::uniform(0.0, 1.0).unwrap();
        assert_eq!(
            bin(&u, &Partition::dyadic(0.0, 1.0, 2).unwrap()).unwrap().probs(),
            &[0.25; 4]
        );
    }

    #[test]
    fn normal_bins_match_quadrature() {
        let n = ContinuousModel::normal(0.0, 1.0).unwrap();
        let part = Partition::uniform(-8.0, 8.0, 4).unwrap();
        let binned = bin(&n, &part).unwrap();
        let density = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for (i, w) in part.boundaries().windows(2).enumerate() {
            // composite Simpson with 2000 panels
            let k = 2000;
            let h = (w[1] - w[0]) / k as f64;
            let mut s = density(w[0]) + density(w[1]);
            for j in 1..k {
                s += density(w[0] + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            assert_abs_diff_eq!(binned.probs()[i], s * h / 3.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn non_monotone_cdf_is_rejected() {
        let bad = ContinuousModel::custom(
            "bad",
            |x: f64| if x < 0.5 { (2.0 * x).clamp(0.0, 1.0) } else { 1.5 - x },
            (0.0, 1.0),
        );
        assert!(matches!(bad, Err(Error::Model(_))));
        let wobbly = ContinuousModel::custom(
            "wobbly",
            |x: f64| (x + 0.2 * (20.0 * x).sin()).clamp(0.0, 1.0),
            (0.0, 1.0),
        )
        .unwrap();
        assert!(matches!(
            bin(&wobbly, &Partition::dyadic(0.0, 1.0, 6).unwrap()),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn support_must_hold_the_mass() {
        let cut = ContinuousModel::custom("cut", |x: f64| x.clamp(0.0, 1.0), (0.0, 0.5));
        assert!(matches!(cut, Err(Error::Model(_))));
    }

    #[test]
    fn refinement_structure() {
        let p = Partition::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(p.refine().boundaries(), &[0.0, 0.5, 1.0]);
        let twice = p.refine().refine();
        assert_eq!(twice.cells(), 4);
        assert_eq!(twice, Partition::dyadic(0.0, 1.0, 2).unwrap());
        assert_eq!(twice.coarsen_map(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn binning_is_compatible_with_coarsening() {
        let model = ContinuousModel::normal(0.3, 0.7).unwrap();
        let coarse = Partition::dyadic(-6.0, 6.0, 5).unwrap();
        let fine = coarse.refine();
        let grained = coarse_grain(&bin(&model, &fine).unwrap(), &fine.coarsen_map(), coarse.cells()).unwrap();
        let direct = bin(&model, &coarse).unwrap();
        for (a, b) in grained.probs().iter().zip(direct.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn identical_models_scan_to_zero() {
        let m = ContinuousModel::kumaraswamy(2.0, 5.0).unwrap();
        let scan = divergence_scan(&Family::Kl, &m, &m, 8, None).unwrap();
        assert!(scan.values.iter().all(|v| *v == Ext::zero()));
    }

    #[test]
    fn gaussian_divergence_scans_converge() {
        let p = ContinuousModel::normal(0.0, 1.0).unwrap();
        let q = ContinuousModel::normal(1.0, 1.0).unwrap();
        let tv = divergence_scan(&Family::Tv, &p, &q, 12, Some((-8.0, 8.0))).unwrap();
        assert!(tv.is_monotone(1e-12));
        assert_abs_diff_eq!(tv.last().unwrap().to_f64(), 0.382_924_922_548_026, epsilon = 1e-3);
        let kl = divergence_scan(&Family::Kl, &p, &q, 12, Some((-8.0, 8.0))).unwrap();
        assert!(kl.is_monotone(1e-12));
        assert_abs_diff_eq!(kl.last().unwrap().to_f64(), 0.5, epsilon = 1e-2);
    }

    #[test]
    fn depth_cap_is_enforced() {
        let u = ContinuousModel::uniform(0.0, 1.0).unwrap();
        assert!(matches!(
            divergence_scan(&Family::Kl, &u, &u, 25, None),
            Err(Error::Resource(_))
        ));
        assert!(matches!(Partition::dyadic(0.0, 1.0, 30), Err(Error::Resource(_))));
    }

    #[test]
    fn uniform_entropy_scans_are_exact() {
        let u = ContinuousModel::uniform(0.0, 1.0).unwrap();
        let tv = entropy_scan(&Family::Tv, &u, 10, Binning::Dyadic, None).unwrap();
        assert_eq!(tv.last().unwrap().to_f64(), 0.9990234375);
        let kl = entropy_scan(&Family::Kl, &u, 12, Binning::Dyadic, None).unwrap();
        for (d, v) in kl.values.iter().enumerate() {
            assert_abs_diff_eq!(v.to_f64(), d as f64 * LN_2, epsilon = 1e-10);
        }
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        let atom = ContinuousModel::point_mass(0.3).unwrap();
        for family in [Family::Kl, Family::Tv, Family::Renyi(0.5)] {
            let scan = entropy_scan(&family, &atom, 10, Binning::Dyadic, None).unwrap();
            assert!(scan.values.iter().all(|v| v.to_f64() == 0.0), "{family}");
        }
    }

    #[test]
    fn closed_form_scan_matches_definition() {
        let m = ContinuousModel::normal(0.0, 1.0).unwrap();
        for family in [Family::Kl, Family::Tv, Family::Renyi(0.0), Family::Renyi(2.0)] {
            let scan = entropy_scan(&family, &m, 8, Binning::Dyadic, None).unwrap();
            for d in 0..=8 {
                let part = Partition::dyadic(-8.0, 8.0, d).unwrap();
                let direct = entropy(&family, &bin(&m, &part).unwrap()).unwrap().value.to_f64();
                assert_abs_diff_eq!(scan.values[d].to_f64(), direct, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn quantile_bins_push_tv_entropy_to_one() {
        let m = ContinuousModel::normal(0.0, 1.0).unwrap();
        let scan = entropy_scan(&Family::Tv, &m, 12, Binning::Quantile, None).unwrap();
        assert!(scan.is_monotone(1e-12));
        assert!(scan.last().unwrap().to_f64() >= 0.999);
    }

    #[test]
    fn parses_model_specs() {
        assert_eq!("normal:0,1".parse::<ContinuousModel>().unwrap().support(), (-8.0, 8.0));
        assert!("uniform:0,1".parse::<ContinuousModel>().is_ok());
        assert!("kumaraswamy:2,5".parse::<ContinuousModel>().is_ok());
        assert!("point:0.5".parse::<ContinuousModel>().is_ok());
        assert!("cauchy:0,1".parse::<ContinuousModel>().is_err());
        assert!("normal:0".parse::<ContinuousModel>().is_err());
        assert!("normal:0,-1".parse::<ContinuousModel>().is_err());
    }

    #[test]
    fn monotonicity_detection() {
        let scan = RefinementScan {
            depths: vec![0, 1, 2],
            cells: vec![1, 2, 4],
            values: vec![Ext::Finite(0.1), Ext::Infinite, Ext::Finite(0.2)],
        };
        assert_eq!(scan.first_decrease(1e-12), Some(2));
        let ok = RefinementScan {
            values: vec![Ext::Finite(0.1), Ext::Finite(0.1 - 1e-13), Ext::Infinite],
            ..scan
        };
        assert!(ok.is_monotone(1e-12));
    }
}
