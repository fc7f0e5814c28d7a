//! Finite divergence spaces and divergence-nonincreasing maps: the box
//! tensor, the internal hom and currying.

use std::collections::HashMap;

use rand::Rng;

use crate::enrichment::instance_rng;
use crate::error::{Error, Result};
use crate::scalar::{Ext, ExtReal};

/// Largest number of functions `hom_space` will enumerate.
pub const MAX_HOM_FUNCTIONS: usize = 10_000;

/// A finite set with a divergence table: zero diagonal, entries in `[0, +∞]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceSpace {
    points: Vec<String>,
    table: Vec<Vec<ExtReal>>,
}

impl DivergenceSpace {
    pub fn new(points: Vec<String>, table: Vec<Vec<ExtReal>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "a divergence space needs at least one point".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = points.iter().find(|p| !seen.insert(p.as_str())) {
            return Err(Error::InvalidParameter(format!("duplicate point {dup:?}")));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch(format!("divergence table must be {n}×{n}")));
        }
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let bad = match v {
                    Ext::Finite(x) => !(*x >= 0.0 && x.is_finite()) || (i == j && *x != 0.0),
                    Ext::Infinite => i == j,
                };
                if bad {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) = {v} is not a valid divergence"
                    )));
                }
            }
        }
        Ok(DivergenceSpace { points, table })
    }

    /// Points labelled `"0".."n-1"`, entries given by `d(i, j)` off the diagonal.
    pub fn from_fn(n: usize, d: impl Fn(usize, usize) -> ExtReal) -> Result<Self> {
        let points = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Ext::zero() } else { d(i, j) }).collect())
            .collect();
        DivergenceSpace::new(points, table)
    }

    /// The monoidal unit.
    pub fn one_point() -> Self {
        DivergenceSpace {
            points: vec!["*".into()],
            table: vec![vec![Ext::zero()]],
        }
    }

    /// A space on `n` points whose off-diagonal entries are drawn uniformly from `values`.
    pub fn random(n: usize, values: &[ExtReal], seed: u64, stream: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("no entry values to draw from".into()));
        }
        let mut rng = instance_rng(seed, stream);
        let draws: Vec<ExtReal> = (0..n * n)
            .map(|_| values[rng.random_range(0..values.len())].clone())
            .collect();
        DivergenceSpace::from_fn(n, |i, j| draws[i * n + j].clone())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn table(&self) -> &[Vec<ExtReal>] {
        &self.table
    }

    /// `D(i ‖ j)`.
    pub fn d(&self, i: usize, j: usize) -> &ExtReal {
        &self.table[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p == label)
    }
}

/// A total function between the points of two spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct DivMap {
    domain: DivergenceSpace,
    codomain: DivergenceSpace,
    mapping: Vec<usize>,
}

impl DivMap {
    /// `mapping[i]` is the image of domain point `i`.
    pub fn new(domain: DivergenceSpace, codomain: DivergenceSpace, mapping: Vec<usize>) -> Result<Self> {
        if mapping.len() != domain.len() {
            return Err(Error::LengthMismatch {
                expected: domain.len(),
                got: mapping.len(),
            });
        }
        if let Some(&bad) = mapping.iter().find(|&&j| j >= codomain.len()) {
            return Err(Error::DanglingLabel(bad.to_string()));
        }
        Ok(DivMap {
            domain,
            codomain,
            mapping,
        })
    }

    /// Builds a map from `(point, image)` label pairs covering the whole domain.
    pub fn from_pairs(domain: DivergenceSpace, codomain: DivergenceSpace, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut mapping = vec![None; domain.len()];
        for (from, to) in pairs {
            let i = domain
                .index_of(from)
                .ok_or_else(|| Error::DanglingLabel(from.to_string()))?;
            let j = codomain
                .index_of(to)
                .ok_or_else(|| Error::DanglingLabel(to.to_string()))?;
            mapping[i] = Some(j);
        }
        let mapping = mapping
            .into_iter()
            .enumerate()
            .map(|(i, j)| j.ok_or_else(|| Error::DanglingLabel(domain.points[i].clone())))
            .collect::<Result<_>>()?;
        DivMap::new(domain, codomain, mapping)
    }

    pub fn identity(space: &DivergenceSpace) -> Self {
        DivMap {
            domain: space.clone(),
            codomain: space.clone(),
            mapping: (0..space.len()).collect(),
        }
    }

    pub fn constant(domain: &DivergenceSpace, codomain: &DivergenceSpace, point: usize) -> Result<Self> {
        DivMap::new(domain.clone(), codomain.clone(), vec![point; domain.len()])
    }

    pub fn domain(&self) -> &DivergenceSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &DivergenceSpace {
        &self.codomain
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &DivMap) -> Result<DivMap> {
        if self.codomain != g.domain {
            return Err(Error::ShapeMismatch("codomain and domain differ".into()));
        }
        DivMap::new(
            self.domain.clone(),
            g.codomain.clone(),
            self.mapping.iter().map(|&j| g.mapping[j]).collect(),
        )
    }
}

/// Whether `mapping` never increases divergences; `∞ ≤ ∞` holds.
pub fn is_morphism_mapping(domain: &DivergenceSpace, codomain: &DivergenceSpace, mapping: &[usize]) -> bool {
    (0..domain.len()).all(|i| (0..domain.len()).all(|j| codomain.d(mapping[i], mapping[j]) <= domain.d(i, j)))
}

/// `D(m(x) ‖ m(x′)) ≤ D(x ‖ x′)` for all `x, x′`.
pub fn is_div_morphism(m: &DivMap) -> bool {
    is_morphism_mapping(&m.domain, &m.codomain, &m.mapping)
}

/// `X ⊠ Y`: pairs in row-major order with summed divergences.
pub fn box_tensor(x: &DivergenceSpace, y: &DivergenceSpace) -> DivergenceSpace {
    let (nx, ny) = (x.len(), y.len());
    let points = x
        .points
        .iter()
        .flat_map(|a| y.points.iter().map(move |b| format!("({a},{b})")))
        .collect();
    let table = (0..nx * ny)
        .map(|i| {
            (0..nx * ny)
                .map(|j| x.d(i / ny, j / ny).clone() + y.d(i % ny, j % ny).clone())
                .collect()
        })
        .collect();
    DivergenceSpace { points, table }
}

/// Value of the hom divergence with the number of `∞ − ∞` terms skipped.
#[derive(Clone, Debug, PartialEq)]
pub struct HomDivergence {
    pub value: ExtReal,
    pub skipped: usize,
}

/// `max{0, max_{x,x′} D(f(x) ‖ g(x′)) − D(x ‖ x′)}` on raw mappings. Terms with
/// `D(x ‖ x′) = ∞` contribute nothing; those whose numerator is also `∞` are counted.
pub fn hom_divergence_mapping(
    domain: &DivergenceSpace,
    codomain: &DivergenceSpace,
    f: &[usize],
    g: &[usize],
) -> HomDivergence {
    let mut value = 0.0f64;
    let mut skipped = 0;
    for (i, &fi) in f.iter().enumerate().take(domain.len()) {
        for (j, &gj) in g.iter().enumerate().take(domain.len()) {
            match (codomain.d(fi, gj), domain.d(i, j)) {
                (Ext::Infinite, Ext::Infinite) => skipped += 1,
                (_, Ext::Infinite) => {}
                (Ext::Infinite, Ext::Finite(_)) => {
                    return HomDivergence {
                        value: Ext::Infinite,
                        skipped,
                    }
                }
                (Ext::Finite(num), Ext::Finite(den)) => value = value.max(num - den),
            }
        }
    }
    HomDivergence {
        value: Ext::Finite(value),
        skipped,
    }
}

fn ensure_parallel_morphisms(f: &DivMap, g: &DivMap) -> Result<()> {
    if f.domain != g.domain || f.codomain != g.codomain {
        return Err(Error::ShapeMismatch("maps have different domains or codomains".into()));
    }
    for m in [f, g] {
        if !is_div_morphism(m) {
            return Err(Error::NotMorphism(format!("{:?}", m.mapping)));
        }
    }
    Ok(())
}

pub fn hom_divergence_detailed(f: &DivMap, g: &DivMap) -> Result<HomDivergence> {
    ensure_parallel_morphisms(f, g)?;
    Ok(hom_divergence_mapping(&f.domain, &f.codomain, &f.mapping, &g.mapping))
}

/// The divergence between two morphisms in the internal hom.
pub fn hom_divergence(f: &DivMap, g: &DivMap) -> Result<ExtReal> {
    Ok(hom_divergence_detailed(f, g)?.value)
}

/// `[Y, Z]`: every morphism `Y → Z` as a point, with the hom divergence.
#[derive(Clone, Debug, PartialEq)]
pub struct HomSpace {
    pub space: DivergenceSpace,
    pub domain: DivergenceSpace,
    pub codomain: DivergenceSpace,
    /// The mapping of each point, in enumeration order.
    pub maps: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl HomSpace {
    pub fn index_of_map(&self, mapping: &[usize]) -> Option<usize> {
        self.lookup.get(mapping).copied()
    }

    /// Number of `∞ − ∞` terms skipped while filling the table.
    pub fn skipped_terms(&self) -> usize {
        let mut total = 0;
        for f in &self.maps {
            for g in &self.maps {
                total += hom_divergence_mapping(&self.domain, &self.codomain, f, g).skipped;
            }
        }
        total
    }
}

/// Enumerates all morphisms `Y → Z` in lexicographic order of their mappings.
pub fn hom_space(y: &DivergenceSpace, z: &DivergenceSpace) -> Result<HomSpace> {
    let total = (z.len() as f64).powi(y.len() as i32);
    if total > MAX_HOM_FUNCTIONS as f64 {
        return Err(Error::Resource(format!(
            "{}^{} functions exceed the enumeration cap of {MAX_HOM_FUNCTIONS}",
            z.len(),
            y.len()
        )));
    }
    let mut maps = Vec::new();
    let mut current = vec![0usize; y.len()];
    for _ in 0..total as usize {
        if is_morphism_mapping(y, z, &current) {
            maps.push(current.clone());
        }
        // odometer with the last position fastest
        for slot in current.iter_mut().rev() {
            *slot += 1;
            if *slot < z.len() {
                break;
            }
            *slot = 0;
        }
    }
    let points = maps
        .iter()
        .map(|m| {
            format!(
                "[{}]",
                m.iter().map(|&j| z.points[j].as_str()).collect::<Vec<_>>().join(",")
            )
        })
        .collect();
    let table = maps
        .iter()
        .map(|f| maps.iter().map(|g| hom_divergence_mapping(y, z, f, g).value).collect())
        .collect();
    let lookup = maps.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    Ok(HomSpace {
        space: DivergenceSpace::new(points, table)?,
        domain: y.clone(),
        codomain: z.clone(),
        maps,
        lookup,
    })
}

/// The slices `f(x, −)` of a mapping on `X ⊠ Y`, as indices into `hom`.
pub fn curry_mapping(mapping: &[usize], nx: usize, hom: &HomSpace) -> std::result::Result<Vec<usize>, usize> {
    let ny = hom.domain.len();
    (0..nx)
        .map(|x| hom.index_of_map(&mapping[x * ny..(x + 1) * ny]).ok_or(x))
        .collect()
}

fn ensure_box_domain(f: &DivMap, x: &DivergenceSpace, y: &DivergenceSpace) -> Result<()> {
    if f.domain != box_tensor(x, y) {
        return Err(Error::ShapeMismatch(
            "domain is not the box tensor of the given spaces".into(),
        ));
    }
    Ok(())
}

/// `f♯ : X → [Y, Z]`, `x ↦ f(x, −)`. Fails when a slice is not a morphism.
pub fn curry(f: &DivMap, x: &DivergenceSpace, y: &DivergenceSpace) -> Result<(DivMap, HomSpace)> {
    ensure_box_domain(f, x, y)?;
    let hom = hom_space(y, &f.codomain)?;
    let mapping = curry_mapping(&f.mapping, x.len(), &hom).map_err(|i| Error::Curry(x.points[i].clone()))?;
    let curried = DivMap::new(x.clone(), hom.space.clone(), mapping)?;
    Ok((curried, hom))
}

/// Inverse of [`curry`]: `(x, y) ↦ g(x)(y)`.
pub fn uncurry(g: &DivMap, hom: &HomSpace) -> Result<DivMap> {
    if g.codomain != hom.space {
        return Err(Error::ShapeMismatch("codomain is not the given hom space".into()));
    }
    let mapping = g.mapping.iter().flat_map(|&k| hom.maps[k].iter().copied()).collect();
    DivMap::new(box_tensor(&g.domain, &hom.domain), hom.codomain.clone(), mapping)
}
