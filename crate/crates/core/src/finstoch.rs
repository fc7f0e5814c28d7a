//! Finite alphabets, distributions and column-stochastic channels.
//!
//! A [`Channel`] from `X` to `Y` is an `|Y| × |X|` matrix whose column `x` is
//! the conditional distribution `f(·|x)`. Product alphabets `X ⊗ Y` use the
//! row-major pairing `index = x·|Y| + y` everywhere in the crate.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ordered list of distinct symbol names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    labels: Vec<String>,
    factors: Option<Box<(Alphabet, Alphabet)>>,
}

impl Alphabet {
    pub fn new<I, T>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidAlphabet("an alphabet needs at least one symbol".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidAlphabet(format!("duplicate label {label:?}")));
            }
        }
        Ok(Alphabet { labels, factors: None })
    }

    /// Symbols `"0"`, `"1"`, …, `"n-1"`.
    pub fn indexed(n: usize) -> Result<Self> {
        Alphabet::new((0..n).map(|i| i.to_string()))
    }

    /// The one-point alphabet, the monoidal unit.
    pub fn unit() -> Self {
        Alphabet {
            labels: vec!["*".to_string()],
            factors: None,
        }
    }

    /// `X ⊗ Y` with labels `"(x,y)"` in row-major order.
    pub fn product(x: &Alphabet, y: &Alphabet) -> Self {
        let labels = x
            .labels
            .iter()
            .flat_map(|a| y.labels.iter().map(move |b| format!("({a},{b})")))
            .collect();
        Alphabet {
            labels,
            factors: Some(Box::new((x.clone(), y.clone()))),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The two factors when this is a product alphabet.
    pub fn factors(&self) -> Option<(&Alphabet, &Alphabet)> {
        self.factors.as_deref().map(|(x, y)| (x, y))
    }

    fn factors_or_err(&self) -> Result<(&Alphabet, &Alphabet)> {
        self.factors().ok_or_else(|| Error::NotProduct(self.labels.clone()))
    }
}

fn ensure_same(left: &Alphabet, right: &Alphabet) -> Result<()> {
    if left != right {
        return Err(Error::AlphabetMismatch {
            left: left.labels.clone(),
            right: right.labels.clone(),
        });
    }
    Ok(())
}

/// Validates nonnegativity and the total, renormalizing deviations below the
/// backend's tolerance and rejecting larger ones.
fn normalize<S: Scalar>(mut values: Vec<S>, offset: usize, what: impl FnOnce() -> String) -> Result<Vec<S>> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_valid() || v.is_negative() {
            return Err(Error::InvalidEntry {
                index: offset + i,
                value: v.to_string(),
            });
        }
    }
    let total = values.iter().cloned().fold(S::zero(), |a, b| a + b);
    if (total.clone() - S::one()).abs() > S::stoch_eps() {
        return Err(Error::NotStochastic {
            what: what(),
            sum: total.to_string(),
        });
    }
    if !total.is_one() {
        for v in values.iter_mut() {
            *v = v.clone() / total.clone();
        }
    }
    Ok(values)
}

/// A probability vector over an alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<S = f64> {
    alphabet: Alphabet,
    probs: Vec<S>,
}

/// A distribution on a product alphabet `X ⊗ Y`.
pub type JointDistribution<S = f64> = Distribution<S>;

impl<S: Scalar> Distribution<S> {
    pub fn new(alphabet: Alphabet, probs: Vec<S>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::LengthMismatch {
                expected: alphabet.len(),
                got: probs.len(),
            });
        }
        let probs = normalize(probs, 0, || "distribution".to_string())?;
        Ok(Distribution { alphabet, probs })
    }

    /// A distribution over the indexed alphabet of matching size.
    pub fn from_probs(probs: Vec<S>) -> Result<Self> {
        Distribution::new(Alphabet::indexed(probs.len())?, probs)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = S::from_usize(alphabet.len()).expect("alphabet size fits the backend");
        let probs = vec![S::one() / n; alphabet.len()];
        Distribution { alphabet, probs }
    }

    /// The point mass at symbol `index`.
    pub fn point(alphabet: Alphabet, index: usize) -> Result<Self> {
        if index >= alphabet.len() {
            return Err(Error::LengthMismatch {
                expected: alphabet.len(),
                got: index + 1,
            });
        }
        let mut probs = vec![S::zero(); alphabet.len()];
        probs[index] = S::one();
        Ok(Distribution { alphabet, probs })
    }

    pub(crate) fn from_parts(alphabet: Alphabet, probs: Vec<S>) -> Self {
        debug_assert_eq!(alphabet.len(), probs.len());
        Distribution { alphabet, probs }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Same probabilities over another alphabet of equal size.
    pub fn relabel(self, alphabet: Alphabet) -> Result<Self> {
        if alphabet.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: alphabet.len(),
            });
        }
        Ok(Distribution {
            alphabet,
            probs: self.probs,
        })
    }

    /// The source `I → X`.
    pub fn as_channel(&self) -> Channel<S> {
        Channel {
            source: Alphabet::unit(),
            target: self.alphabet.clone(),
            matrix: self.probs.clone(),
        }
    }

    /// The independent product `p ⊗ q`.
    pub fn tensor(&self, other: &Distribution<S>) -> Distribution<S> {
        let probs = self
            .probs
            .iter()
            .flat_map(|a| other.probs.iter().map(move |b| a.clone() * b.clone()))
            .collect();
        Distribution {
            alphabet: Alphabet::product(&self.alphabet, &other.alphabet),
            probs,
        }
    }

    /// Pushforward along a channel, `f ∘ p`.
    pub fn push(&self, f: &Channel<S>) -> Result<Distribution<S>> {
        let out = compose(f, &self.as_channel())?;
        Ok(out.into_distribution())
    }

    /// Converts to an exactly representable distribution in another backend,
    /// renormalizing exactly where conversion shifts the total.
    pub fn convert<T: Scalar>(&self) -> Result<Distribution<T>> {
        let probs = convert_values(&self.probs)?;
        Distribution::new(self.alphabet.clone(), probs)
    }
}

fn convert_values<S: Scalar, T: Scalar>(values: &[S]) -> Result<Vec<T>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.to_f64().and_then(T::from_f64).ok_or_else(|| Error::InvalidEntry {
                index: i,
                value: v.to_string(),
            })
        })
        .collect()
}

/// Marginals `(r_X, r_Y)` of a joint distribution.
pub fn marginals<S: Scalar>(r: &JointDistribution<S>) -> Result<(Distribution<S>, Distribution<S>)> {
    let (x, y) = r.alphabet.factors_or_err()?;
    let (nx, ny) = (x.len(), y.len());
    let mut px = vec![S::zero(); nx];
    let mut py = vec![S::zero(); ny];
    for (i, row) in r.probs.chunks(ny).enumerate() {
        for (j, v) in row.iter().enumerate() {
            px[i] = px[i].clone() + v.clone();
            py[j] = py[j].clone() + v.clone();
        }
    }
    Ok((
        Distribution::from_parts(x.clone(), px),
        Distribution::from_parts(y.clone(), py),
    ))
}

/// The joint `p(x)·f(y|x)` on `X ⊗ Y`.
pub fn joint<S: Scalar>(p: &Distribution<S>, f: &Channel<S>) -> Result<JointDistribution<S>> {
    ensure_same(&p.alphabet, &f.source)?;
    let (nx, ny) = (f.source.len(), f.target.len());
    let mut probs = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            probs.push(p.probs[x].clone() * f.entry(y, x).clone());
        }
    }
    Ok(Distribution {
        alphabet: Alphabet::product(&f.source, &f.target),
        probs,
    })
}

/// The joint morphism `A → X ⊗ Y` with entries `p(x|a)·f(y|x,a)`.
pub fn joint_channel<S: Scalar>(p: &Channel<S>, f: &Channel<S>) -> Result<Channel<S>> {
    let expected = Alphabet::product(&p.target, &p.source);
    if f.source != expected {
        return Err(Error::Composition {
            produced: f.source.labels.clone(),
            expected: expected.labels,
        });
    }
    let (na, nx, ny) = (p.source.len(), p.target.len(), f.target.len());
    let target = Alphabet::product(&p.target, &f.target);
    let mut matrix = vec![S::zero(); nx * ny * na];
    for a in 0..na {
        for x in 0..nx {
            let pa = p.entry(x, a);
            for y in 0..ny {
                matrix[(x * ny + y) * na + a] = pa.clone() * f.entry(y, x * na + a).clone();
            }
        }
    }
    Ok(Channel {
        source: p.source.clone(),
        target,
        matrix,
    })
}

/// A column-stochastic matrix: rows indexed by the target, columns by the source.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<S = f64> {
    source: Alphabet,
    target: Alphabet,
    /// Row-major `|target| × |source|`.
    matrix: Vec<S>,
}

impl<S: Scalar> Channel<S> {
    /// Builds a channel from its rows (one row per target symbol).
    pub fn new(source: Alphabet, target: Alphabet, rows: Vec<Vec<S>>) -> Result<Self> {
        let (n, m) = (source.len(), target.len());
        if rows.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: rows.len(),
            });
        }
        let mut columns = vec![Vec::with_capacity(m); n];
        for row in rows {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (x, v) in row.into_iter().enumerate() {
                columns[x].push(v);
            }
        }
        Channel::from_columns(source, target, columns)
    }

    /// Builds a channel from its columns (one conditional distribution per source symbol).
    pub fn from_columns(source: Alphabet, target: Alphabet, columns: Vec<Vec<S>>) -> Result<Self> {
        let (n, m) = (source.len(), target.len());
        if columns.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: columns.len(),
            });
        }
        let mut matrix = vec![S::zero(); m * n];
        for (x, col) in columns.into_iter().enumerate() {
            if col.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    got: col.len(),
                });
            }
            let col = normalize(col, x * m, || format!("column {x}"))?;
            for (y, v) in col.into_iter().enumerate() {
                matrix[y * n + x] = v;
            }
        }
        Ok(Channel { source, target, matrix })
    }

    /// The deterministic channel `x ↦ map[x]`.
    pub fn deterministic(source: Alphabet, target: Alphabet, map: &[usize]) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::LengthMismatch {
                expected: source.len(),
                got: map.len(),
            });
        }
        let (n, m) = (source.len(), target.len());
        let mut matrix = vec![S::zero(); m * n];
        for (x, &y) in map.iter().enumerate() {
            if y >= m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    got: y + 1,
                });
            }
            matrix[y * n + x] = S::one();
        }
        Ok(Channel { source, target, matrix })
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        let map: Vec<usize> = (0..alphabet.len()).collect();
        Channel::deterministic(alphabet.clone(), alphabet.clone(), &map).expect("identity map is total")
    }

    /// `X → X ⊗ X`, `x ↦ (x, x)`.
    pub fn copy(alphabet: &Alphabet) -> Self {
        let n = alphabet.len();
        let map: Vec<usize> = (0..n).map(|x| x * n + x).collect();
        Channel::deterministic(alphabet.clone(), Alphabet::product(alphabet, alphabet), &map)
            .expect("copy map is total")
    }

    /// `X → I`, the all-ones row.
    pub fn discard(alphabet: &Alphabet) -> Self {
        Channel::deterministic(alphabet.clone(), Alphabet::unit(), &vec![0; alphabet.len()])
            .expect("discard map is total")
    }

    /// `X ⊗ Y → Y ⊗ X`.
    pub fn swap(x: &Alphabet, y: &Alphabet) -> Self {
        let (nx, ny) = (x.len(), y.len());
        let map: Vec<usize> = (0..nx * ny).map(|i| (i % ny) * nx + i / ny).collect();
        Channel::deterministic(Alphabet::product(x, y), Alphabet::product(y, x), &map).expect("swap map is total")
    }

    /// Ignores the input and emits `p`.
    pub fn constant(source: &Alphabet, p: &Distribution<S>) -> Self {
        let n = source.len();
        let mut matrix = Vec::with_capacity(n * p.len());
        for v in &p.probs {
            matrix.extend(std::iter::repeat_n(v.clone(), n));
        }
        Channel {
            source: source.clone(),
            target: p.alphabet.clone(),
            matrix,
        }
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    /// `f(y|x)`.
    pub fn entry(&self, y: usize, x: usize) -> &S {
        &self.matrix[y * self.source.len() + x]
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.matrix.chunks(self.source.len()).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, x: usize) -> Vec<S> {
        (0..self.target.len()).map(|y| self.entry(y, x).clone()).collect()
    }

    /// Column `x` as a distribution on the target alphabet.
    pub fn column_distribution(&self, x: usize) -> Distribution<S> {
        Distribution::from_parts(self.target.clone(), self.column(x))
    }

    /// A channel out of the unit as the distribution it emits.
    pub fn into_distribution(self) -> Distribution<S> {
        debug_assert_eq!(self.source.len(), 1);
        Distribution::from_parts(self.target, self.matrix)
    }

    /// Marginal channels `(h_X, h_Y)` of a channel into a product alphabet.
    pub fn marginals(&self) -> Result<(Channel<S>, Channel<S>)> {
        let (x, y) = self.target.factors_or_err()?;
        let (na, nx, ny) = (self.source.len(), x.len(), y.len());
        let mut hx = vec![S::zero(); nx * na];
        let mut hy = vec![S::zero(); ny * na];
        for i in 0..nx {
            for j in 0..ny {
                for a in 0..na {
                    let v = self.entry(i * ny + j, a);
                    hx[i * na + a] = hx[i * na + a].clone() + v.clone();
                    hy[j * na + a] = hy[j * na + a].clone() + v.clone();
                }
            }
        }
        Ok((
            Channel {
                source: self.source.clone(),
                target: x.clone(),
                matrix: hx,
            },
            Channel {
                source: self.source.clone(),
                target: y.clone(),
                matrix: hy,
            },
        ))
    }

    /// `(h_X ⊗ h_Y) ∘ copy_A`, the conditionally independent channel with the
    /// same marginals.
    pub fn independent_part(&self) -> Result<Channel<S>> {
        let (hx, hy) = self.marginals()?;
        compose(&tensor(&hx, &hy), &Channel::copy(&self.source)).map(|c| Channel {
            target: self.target.clone(),
            ..c
        })
    }

    /// Converts entries to another backend, renormalizing each column exactly.
    pub fn convert<T: Scalar>(&self) -> Result<Channel<T>> {
        let columns = (0..self.source.len())
            .map(|x| convert_values(&self.column(x)))
            .collect::<Result<Vec<_>>>()?;
        Channel::from_columns(self.source.clone(), self.target.clone(), columns)
    }
}

/// `g ∘ f`, the Chapman-Kolmogorov sum `Σ_y g(z|y) f(y|x)`.
pub fn compose<S: Scalar>(g: &Channel<S>, f: &Channel<S>) -> Result<Channel<S>> {
    if f.target != g.source {
        return Err(Error::Composition {
            produced: f.target.labels.clone(),
            expected: g.source.labels.clone(),
        });
    }
    let (nx, ny, nz) = (f.source.len(), f.target.len(), g.target.len());
    let mut matrix = vec![S::zero(); nz * nx];
    for z in 0..nz {
        for y in 0..ny {
            let gzy = g.entry(z, y);
            if gzy.is_zero() {
                continue;
            }
            for x in 0..nx {
                let cell = &mut matrix[z * nx + x];
                *cell = cell.clone() + gzy.clone() * f.entry(y, x).clone();
            }
        }
    }
    Ok(Channel {
        source: f.source.clone(),
        target: g.target.clone(),
        matrix,
    })
}

/// `f ⊗ h` with entries `f(y|x)·h(b|a)`.
pub fn tensor<S: Scalar>(f: &Channel<S>, h: &Channel<S>) -> Channel<S> {
    let (nx, ny) = (f.source.len(), f.target.len());
    let (na, nb) = (h.source.len(), h.target.len());
    let ncols = nx * na;
    let mut matrix = vec![S::zero(); ny * nb * ncols];
    for y in 0..ny {
        for b in 0..nb {
            for x in 0..nx {
                let fyx = f.entry(y, x);
                for a in 0..na {
                    matrix[(y * nb + b) * ncols + x * na + a] = fyx.clone() * h.entry(b, a).clone();
                }
            }
        }
    }
    Channel {
        source: Alphabet::product(&f.source, &h.source),
        target: Alphabet::product(&f.target, &h.target),
        matrix,
    }
}

fn entrywise_close<S: Scalar>(a: &Channel<S>, b: &Channel<S>, tol: f64) -> bool {
    let tol = S::from_f64(tol).unwrap_or_else(S::zero);
    a.matrix.len() == b.matrix.len()
        && a.matrix
            .iter()
            .zip(&b.matrix)
            .all(|(u, v)| (u.clone() - v.clone()).abs() <= tol)
}

/// Determinism through the copy law `copy ∘ f = (f ⊗ f) ∘ copy`.
pub fn is_deterministic<S: Scalar>(f: &Channel<S>, tol: f64) -> bool {
    let lhs = compose(&Channel::copy(&f.target), f).expect("copy source matches target");
    let rhs = compose(&tensor(f, f), &Channel::copy(&f.source)).expect("copy target matches f ⊗ f");
    entrywise_close(&lhs, &rhs, tol)
}

/// Determinism through the entrywise criterion: every entry is 0 or 1.
pub fn is_zero_one<S: Scalar>(f: &Channel<S>, tol: f64) -> bool {
    let tol = S::from_f64(tol).unwrap_or_else(S::zero);
    f.matrix
        .iter()
        .all(|v| v.abs() <= tol || (v.clone() - S::one()).abs() <= tol)
}

/// `f =_p g`: `p(x)·f(y|x) = p(x)·g(y|x)` for all `x, y`.
pub fn as_equal<S: Scalar>(f: &Channel<S>, g: &Channel<S>, p: &Distribution<S>, tol: f64) -> Result<bool> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::ShapeMismatch("channels must share source and target".into()));
    }
    ensure_same(&p.alphabet, &f.source)?;
    let tol = S::from_f64(tol).unwrap_or_else(S::zero);
    for x in 0..f.source.len() {
        for y in 0..f.target.len() {
            let diff = p.probs[x].clone() * (f.entry(y, x).clone() - g.entry(y, x).clone());
            if diff.abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn alpha(n: usize) -> Alphabet {
        Alphabet::indexed(n).unwrap()
    }

    fn chan(cols: Vec<Vec<f64>>) -> Channel {
        let n = cols.len();
        let m = cols[0].len();
        Channel::from_columns(alpha(n), alpha(m), cols).unwrap()
    }

    fn assert_close(a: &Channel, b: &Channel, tol: f64) {
        assert_eq!(a.source(), b.source());
        assert_eq!(a.target(), b.target());
        for (u, v) in a.matrix.iter().zip(&b.matrix) {
            assert_abs_diff_eq!(u, v, epsilon = tol);
        }
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::indexed(0).is_err());
    }

    #[test]
    fn constructors_renormalize_small_deviations_only() {
        let p = Distribution::from_probs(vec![0.5, 0.5 + 1e-12]).unwrap();
        assert_abs_diff_eq!(p.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            Distribution::from_probs(vec![0.5, 0.6]),
            Err(Error::NotStochastic { .. })
        ));
        assert!(matches!(
            Distribution::from_probs(vec![1.5, -0.5]),
            Err(Error::InvalidEntry { index: 1, .. })
        ));
        assert!(Distribution::from_probs(vec![f64::NAN, 1.0]).is_err());
        assert!(Channel::from_columns(alpha(1), alpha(2), vec![vec![0.3, 0.3]]).is_err());
    }

    #[test]
    fn compose_matches_double_sum() {
        let f = chan(vec![vec![0.3, 0.7], vec![0.6, 0.4]]);
        let g = chan(vec![vec![0.5, 0.5], vec![0.2, 0.8]]);
        let gf = compose(&g, &f).unwrap();
        // 0.3·0.5 + 0.7·0.2 and 0.3·0.5 + 0.7·0.8
        assert_abs_diff_eq!(gf.column(0)[0], 0.29, epsilon = 1e-15);
        assert_abs_diff_eq!(gf.column(0)[1], 0.71, epsilon = 1e-15);
        assert_eq!(compose(&g, &Channel::identity(&alpha(2))).unwrap(), g);
    }

    #[test]
    fn compose_rejects_mismatched_alphabets() {
        let f = chan(vec![vec![1.0, 0.0, 0.0]]);
        let g = chan(vec![vec![1.0], vec![1.0]]);
        assert!(matches!(compose(&g, &f), Err(Error::Composition { .. })));
    }

    #[test]
    fn discard_after_any_channel_is_discard() {
        let f = chan(vec![vec![0.3, 0.7], vec![0.6, 0.4], vec![1.0, 0.0]]);
        let d = compose(&Channel::discard(f.target()), &f).unwrap();
        assert_close(&d, &Channel::discard(f.source()), 1e-15);
    }

    #[test]
    fn tensor_of_sources_is_entrywise_product() {
        let p = Distribution::from_probs(vec![0.5, 0.5]).unwrap();
        let q = Distribution::from_probs(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let pq = tensor(&p.as_channel(), &q.as_channel());
        let expected = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0];
        for (v, e) in pq.column(0).iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-15);
        }
        assert_eq!(p.tensor(&q).probs(), pq.column(0).as_slice());
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let t = tensor(&Channel::<f64>::identity(&alpha(2)), &Channel::identity(&alpha(2)));
        assert!(is_zero_one(&t, 0.0));
        for i in 0..4 {
            assert_eq!(*t.entry(i, i), 1.0);
        }
    }

    #[test]
    fn tensor_with_discard_ignores_extra_input() {
        let f = chan(vec![vec![0.3, 0.7], vec![0.6, 0.4]]);
        let t = tensor(&f, &Channel::discard(&alpha(3)));
        for x in 0..2 {
            for a in 0..3 {
                assert_eq!(t.column(x * 3 + a), f.column(x));
            }
        }
    }

    #[test]
    fn comonoid_laws() {
        for n in 1..=4 {
            let x = alpha(n);
            let copy = Channel::<f64>::copy(&x);
            let id = Channel::identity(&x);
            let counit = compose(&tensor(&id, &Channel::discard(&x)), &copy).unwrap();
            let counit_matrix: Vec<f64> = counit.matrix.clone();
            assert_eq!(counit_matrix, id.matrix);
            let left = compose(&tensor(&copy, &id), &copy).unwrap();
            let right = compose(&tensor(&id, &copy), &copy).unwrap();
            assert_eq!(left.matrix, right.matrix);
            let swapped = compose(&Channel::swap(&x, &x), &copy).unwrap();
            assert_eq!(swapped, copy);
        }
    }

    #[test]
    fn copy_on_two_symbols() {
        let c = Channel::<f64>::copy(&alpha(2));
        assert_eq!(
            c.rows(),
            vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]]
        );
        let d = compose(&Channel::discard(c.target()), &c).unwrap();
        assert_eq!(d.matrix, vec![1.0, 1.0]);
    }

    #[test]
    fn unit_copy_and_discard_are_identities() {
        let i = Alphabet::unit();
        assert_eq!(Channel::<f64>::copy(&i).matrix, vec![1.0]);
        assert_eq!(Channel::<f64>::discard(&i).matrix, vec![1.0]);
    }

    #[test]
    fn joint_and_marginals() {
        let p = Distribution::from_probs(vec![0.4, 0.6]).unwrap();
        let f = chan(vec![vec![0.5, 0.5], vec![0.25, 0.75]]);
        let r = joint(&p, &f).unwrap();
        for (v, e) in r.probs().iter().zip([0.2, 0.2, 0.15, 0.45]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-15);
        }
        let (rx, ry) = marginals(&r).unwrap();
        assert_abs_diff_eq!(rx.probs()[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(ry.probs()[0], 0.35, epsilon = 1e-15);
        assert_abs_diff_eq!(ry.probs()[1], 0.65, epsilon = 1e-15);
        let pushed = p.push(&f).unwrap();
        assert_abs_diff_eq!(pushed.probs()[0], ry.probs()[0], epsilon = 1e-15);
    }

    #[test]
    fn joint_with_identity_is_diagonal() {
        let p = Distribution::from_probs(vec![0.5, 0.5]).unwrap();
        let r = joint(&p, &Channel::identity(p.alphabet())).unwrap();
        assert_eq!(r.probs(), &[0.5, 0.0, 0.0, 0.5]);
        let (a, b) = marginals(&r).unwrap();
        assert_eq!(a.probs(), p.probs());
        assert_eq!(b.probs(), p.probs());
    }

    #[test]
    fn joint_with_constant_channel_is_product() {
        let p = Distribution::from_probs(vec![0.4, 0.6]).unwrap();
        let q = Distribution::from_probs(vec![0.1, 0.2, 0.7]).unwrap();
        let r = joint(&p, &Channel::constant(p.alphabet(), &q)).unwrap();
        assert_eq!(r, p.tensor(&q));
        assert!(marginals(&p).is_err());
    }

    #[test]
    fn joint_channel_on_unit_reduces_to_joint() {
        let p = Distribution::from_probs(vec![0.4, 0.6]).unwrap();
        let f = chan(vec![vec![0.5, 0.5], vec![0.25, 0.75]]);
        let unit = Alphabet::unit();
        let f_with_unit = Channel::from_columns(
            Alphabet::product(p.alphabet(), &unit),
            f.target().clone(),
            (0..2).map(|x| f.column(x)).collect(),
        )
        .unwrap();
        let h = joint_channel(&p.as_channel(), &f_with_unit).unwrap();
        assert_eq!(h.column(0), joint(&p, &f).unwrap().probs());
    }

    #[test]
    fn joint_channel_with_identity_and_input_independent_kernel() {
        // p = id_X, f(y|x,a) = k(y|x): result(x,y|a) = δ_{x,a} k(y|x)
        let x = alpha(2);
        let k = chan(vec![vec![0.1, 0.9], vec![0.7, 0.3]]);
        let f = tensor(&k, &Channel::discard(&x));
        let f = Channel::from_columns(
            Alphabet::product(&x, &x),
            k.target().clone(),
            (0..4).map(|i| f.column(i)).collect(),
        )
        .unwrap();
        let h = joint_channel(&Channel::identity(&x), &f).unwrap();
        for a in 0..2 {
            for xi in 0..2 {
                for y in 0..2 {
                    let expected = if xi == a { *k.entry(y, xi) } else { 0.0 };
                    assert_abs_diff_eq!(*h.entry(xi * 2 + y, a), expected, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn joint_channel_rejects_wrong_kernel_source() {
        let p = Channel::<f64>::identity(&alpha(2));
        let f = Channel::identity(&alpha(4));
        assert!(joint_channel(&p, &f).is_err());
    }

    #[test]
    fn determinism_checks_agree_on_examples() {
        let perm = Channel::<f64>::deterministic(alpha(3), alpha(3), &[2, 0, 1]).unwrap();
        assert!(is_deterministic(&perm, 1e-12));
        assert!(is_zero_one(&perm, 1e-12));
        let coin = chan(vec![vec![0.5, 0.5]]);
        assert!(!is_deterministic(&coin, 1e-12));
        assert!(!is_zero_one(&coin, 1e-12));
    }

    #[test]
    fn almost_sure_equality() {
        let f = chan(vec![vec![0.2, 0.8], vec![0.5, 0.5]]);
        let g = chan(vec![vec![0.2, 0.8], vec![0.9, 0.1]]);
        let point = Distribution::point(alpha(2), 0).unwrap();
        let full = Distribution::from_probs(vec![0.5, 0.5]).unwrap();
        assert!(as_equal(&f, &f, &full, 1e-12).unwrap());
        assert!(as_equal(&f, &g, &point, 1e-12).unwrap());
        assert!(!as_equal(&f, &g, &full, 1e-12).unwrap());
        let other = chan(vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]);
        assert!(as_equal(&f, &other, &full, 1e-12).is_err());
    }

    #[test]
    fn swap_permutes_pairs() {
        let s = Channel::<f64>::swap(&alpha(2), &alpha(3));
        // (x=1, y=2) is index 5 in X⊗Y and (y=2, x=1) is index 5 in Y⊗X
        assert_eq!(*s.entry(2 * 2 + 1, 3 + 2), 1.0);
        assert!(is_deterministic(&s, 0.0));
    }

    #[test]
    fn independent_part_has_product_columns() {
        let x = alpha(2);
        let h = Channel::from_columns(
            alpha(2),
            Alphabet::product(&x, &x),
            vec![vec![0.5, 0.0, 0.0, 0.5], vec![0.1, 0.2, 0.3, 0.4]],
        )
        .unwrap();
        let ind = h.independent_part().unwrap();
        assert_eq!(ind.target(), h.target());
        let col = ind.column(0);
        for (v, e) in col.iter().zip([0.25, 0.25, 0.25, 0.25]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-15);
        }
    }
}
