//! The free abelian group over the non-basepoint points, its word metric
//! induced by optimal transport, integer optimality witnesses, and the
//! 1-Lipschitz homomorphism extension into finite bi-invariant metric
//! groups.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::free_norm;
use crate::rational::{format_rational, parse_rational, rat_int, Rat};
use crate::space::{Chain, PointedMetricSpace, SpaceRef};
use crate::transport::{round_to_integer_plan, solve_min_cost, TransportPlan};

/// An element of the free abelian group on the non-basepoint points:
/// a finitely supported integer combination. Zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    coeffs: BTreeMap<String, i64>,
}

impl Word {
    pub fn zero() -> Self {
        Word {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn new<I>(space: &PointedMetricSpace, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, i64)>,
    {
        let mut map: BTreeMap<String, i64> = BTreeMap::new();
        for (point, coeff) in coeffs {
            let idx = space.index_of(&point)?;
            if idx == space.basepoint_index() {
                return Err(Error::BasepointCoefficient(point));
            }
            *map.entry(point).or_insert(0) += coeff;
        }
        map.retain(|_, c| *c != 0);
        Ok(Word { coeffs: map })
    }

    /// The generator word `1 · p`.
    pub fn generator(space: &PointedMetricSpace, p: &str) -> Result<Self> {
        Self::new(space, vec![(p.to_string(), 1)])
    }

    pub fn coeffs(&self) -> &BTreeMap<String, i64> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Word) -> Word {
        let mut coeffs = self.coeffs.clone();
        for (point, coeff) in &other.coeffs {
            *coeffs.entry(point.clone()).or_insert(0) += coeff;
        }
        coeffs.retain(|_, c| *c != 0);
        Word { coeffs }
    }

    pub fn neg(&self) -> Word {
        Word {
            coeffs: self.coeffs.iter().map(|(p, c)| (p.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Word) -> Word {
        self.add(&other.neg())
    }

    /// The word as a rational chain.
    pub fn to_chain(&self, space: &PointedMetricSpace) -> Result<Chain> {
        Chain::new(
            space,
            self.coeffs
                .iter()
                .map(|(p, c)| (p.clone(), rat_int(*c))),
        )
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.coeffs.len()))?;
        for (point, coeff) in &self.coeffs {
            map.serialize_entry(point, coeff)?;
        }
        map.end()
    }
}

/// Raw word coefficients as parsed from JSON; resolve with [`Word::new`].
#[derive(Debug, Clone, Default)]
pub struct RawWord(pub BTreeMap<String, i64>);

impl<'de> Deserialize<'de> for RawWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RawVisitor;
        impl<'de> Visitor<'de> for RawVisitor {
            type Value = RawWord;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from point identifiers to integers")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<RawWord, A::Error> {
                let mut coeffs = BTreeMap::new();
                while let Some((point, value)) = access.next_entry::<String, i64>()? {
                    coeffs.insert(point, value);
                }
                Ok(RawWord(coeffs))
            }
        }
        deserializer.deserialize_map(RawVisitor)
    }
}

impl RawWord {
    pub fn resolve(self, space: &PointedMetricSpace) -> Result<Word> {
        Word::new(space, self.0)
    }
}

/// The word metric: the transport norm of `u - v`. By the integer value
/// property this rational optimum is attained by an integer plan, so no
/// separate integer solver is needed for the value.
pub fn graev_distance(space: &SpaceRef, u: &Word, v: &Word) -> Result<Rat> {
    free_norm(space, &u.sub(v).to_chain(space)?)
}

/// An all-integer optimal plan realizing `w` as a divergence; its cost
/// equals `graev_distance(w, 0)` exactly.
pub fn integer_witness(space: &SpaceRef, w: &Word) -> Result<TransportPlan> {
    let (plan, cost) = solve_min_cost(space, &w.to_chain(space)?)?;
    let witness = round_to_integer_plan(&plan)?;
    debug_assert_eq!(witness.cost(), cost);
    Ok(witness)
}

/// A finite abelian group with explicit operation tables and a bi-invariant
/// rational metric. Construction validates the group axioms, the metric
/// axioms, and bi-invariance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricAbelianGroup {
    elements: Vec<String>,
    op: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
    dist: Vec<Vec<Rat>>,
}

impl MetricAbelianGroup {
    pub fn from_tables(
        elements: Vec<String>,
        op: Vec<Vec<usize>>,
        dist: Vec<Vec<Rat>>,
    ) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::InvalidGroup("element list is empty".into()));
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            for e in &elements {
                if !seen.insert(e) {
                    return Err(Error::InvalidGroup(format!("duplicate element `{e}`")));
                }
            }
        }
        if op.len() != n || op.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup("operation table is not n x n".into()));
        }
        if op.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidGroup("operation table index out of range".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup("distance table is not n x n".into()));
        }

        for i in 0..n {
            for j in 0..n {
                if op[i][j] != op[j][i] {
                    return Err(Error::InvalidGroup(format!(
                        "operation is not commutative at ({i}, {j})"
                    )));
                }
                for k in 0..n {
                    if op[op[i][j]][k] != op[i][op[j][k]] {
                        return Err(Error::InvalidGroup(format!(
                            "operation is not associative at ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }

        let identity = (0..n)
            .find(|&e| (0..n).all(|x| op[e][x] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for x in 0..n {
            inverse[x] = (0..n)
                .find(|&y| op[x][y] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {x} has no inverse")))?;
        }

        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidGroup(format!("dist({i}, {i}) is nonzero")));
            }
            for j in 0..n {
                if i != j && dist[i][j] <= Rat::zero() {
                    return Err(Error::InvalidGroup(format!("dist({i}, {j}) is not positive")));
                }
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidGroup(format!("dist is asymmetric at ({i}, {j})")));
                }
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(Error::InvalidGroup(format!(
                            "triangle inequality fails at ({i}, {j}, {k})"
                        )));
                    }
                    if dist[op[i][k]][op[j][k]] != dist[i][j] {
                        return Err(Error::InvalidGroup(format!(
                            "metric is not bi-invariant at ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }

        Ok(Self {
            elements,
            op,
            inverse,
            identity,
            dist,
        })
    }

    /// The cyclic group of order `n` with the bi-invariant metric induced by
    /// a length table: `dist(i, j) = lengths[(i - j) mod n]`.
    pub fn cyclic(n: usize, lengths: &[Rat]) -> Result<Self> {
        if lengths.len() != n {
            return Err(Error::InvalidGroup(format!(
                "need {n} lengths, got {}",
                lengths.len()
            )));
        }
        let elements = (0..n).map(|i| i.to_string()).collect();
        let op = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| lengths[(n + i - j) % n].clone())
                    .collect()
            })
            .collect();
        Self::from_tables(elements, op, dist)
    }

    /// The one-element group.
    pub fn trivial() -> Self {
        Self::from_tables(
            vec!["e".to_string()],
            vec![vec![0]],
            vec![vec![Rat::zero()]],
        )
        .expect("the trivial group is valid")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn op(&self, x: usize, y: usize) -> usize {
        self.op[x][y]
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn dist(&self, x: usize, y: usize) -> &Rat {
        &self.dist[x][y]
    }

    /// Integer multiple `k · g`, computed by doubling.
    pub fn multiple(&self, g: usize, k: i64) -> usize {
        if k < 0 {
            return self.multiple(self.inverse[g], -k);
        }
        let mut acc = self.identity;
        let mut base = g;
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.op[acc][base];
            }
            base = self.op[base][base];
            k >>= 1;
        }
        acc
    }

    /// The group's element set as a pointed metric space with the identity
    /// as basepoint.
    pub fn as_pointed_space(&self) -> PointedMetricSpace {
        PointedMetricSpace::from_parts(
            self.elements.clone(),
            &self.elements[self.identity],
            self.dist.clone(),
        )
        .expect("group tables form a valid space")
    }
}

impl Serialize for MetricAbelianGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("MetricAbelianGroup", 3)?;
        s.serialize_field("elements", &self.elements)?;
        s.serialize_field("op", &self.op)?;
        let dist: Vec<Vec<String>> = self
            .dist
            .iter()
            .map(|row| row.iter().map(format_rational).collect())
            .collect();
        s.serialize_field("dist", &dist)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for MetricAbelianGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            elements: Vec<String>,
            op: Vec<Vec<usize>>,
            dist: Vec<Vec<String>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let dist = raw
            .dist
            .iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        MetricAbelianGroup::from_tables(raw.elements, raw.op, dist).map_err(de::Error::custom)
    }
}

/// The unique homomorphism extending a 1-Lipschitz generator assignment.
#[derive(Debug, Clone)]
pub struct LipschitzExtension {
    space: SpaceRef,
    target: MetricAbelianGroup,
    images: Vec<usize>,
}

impl LipschitzExtension {
    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn target(&self) -> &MetricAbelianGroup {
        &self.target
    }

    /// Image of a point.
    pub fn image_of_point(&self, p: &str) -> Result<usize> {
        Ok(self.images[self.space.index_of(p)?])
    }

    /// Image of a word: the coefficient-weighted sum of generator images.
    pub fn apply(&self, w: &Word) -> Result<usize> {
        let mut acc = self.target.identity();
        for (point, coeff) in w.coeffs() {
            let g = self.image_of_point(point)?;
            acc = self.target.op(acc, self.target.multiple(g, *coeff));
        }
        Ok(acc)
    }
}

/// Observed comparison of the pulled-back metric against the word metric on
/// sampled word pairs.
#[derive(Debug, Clone)]
pub struct LipschitzReport {
    /// Number of (u, v) pairs checked.
    pub pairs_checked: usize,
    /// Whether the sampling was exhaustive over small words.
    pub exhaustive: bool,
    /// Largest observed ratio `ς(hom u, hom v) / d(u, v)`, if any pair had
    /// positive distance.
    pub max_ratio: Option<Rat>,
    /// Pairs where the pulled-back distance exceeded the word metric.
    pub violations: Vec<(Word, Word)>,
}

impl LipschitzReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Small-word enumeration: all words with support at most `max_support` and
/// nonzero coefficients bounded by `max_coeff` in absolute value.
pub fn enumerate_words(
    space: &PointedMetricSpace,
    max_support: usize,
    max_coeff: i64,
) -> Vec<Word> {
    let generators: Vec<&String> = space
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != space.basepoint_index())
        .map(|(_, p)| p)
        .collect();
    let mut words = vec![Word::zero()];
    let coeff_choices: Vec<i64> = (-max_coeff..=max_coeff).filter(|c| *c != 0).collect();

    fn extend(
        generators: &[&String],
        coeff_choices: &[i64],
        start: usize,
        remaining: usize,
        current: &BTreeMap<String, i64>,
        out: &mut Vec<Word>,
    ) {
        if remaining == 0 {
            return;
        }
        for gi in start..generators.len() {
            for &c in coeff_choices {
                let mut next = current.clone();
                next.insert(generators[gi].clone(), c);
                out.push(Word { coeffs: next.clone() });
                extend(generators, coeff_choices, gi + 1, remaining - 1, &next, out);
            }
        }
    }

    let root = BTreeMap::new();
    extend(
        &generators,
        &coeff_choices,
        0,
        max_support.min(generators.len()),
        &root,
        &mut words,
    );
    words
}

/// Extend a generator assignment to the whole free abelian group.
///
/// `images` maps every point of the space to a target element index; the
/// basepoint must map to the identity and the assignment must be
/// 1-Lipschitz from the space metric to the group metric (checked exactly,
/// errors otherwise). The returned report compares the pulled-back metric
/// with the word metric, exhaustively over words with support ≤ 3 and
/// coefficients ≤ 2 when the space has at most 5 points, and on seeded
/// random word pairs (seed 0) otherwise.
pub fn extend_hom(
    space: &SpaceRef,
    target: &MetricAbelianGroup,
    images: &BTreeMap<String, usize>,
) -> Result<(LipschitzExtension, LipschitzReport)> {
    let n = space.len();
    let mut by_index = vec![usize::MAX; n];
    for (point, &g) in images {
        let idx = space.index_of(point)?;
        if g >= target.order() {
            return Err(Error::InvalidGroup(format!(
                "image {g} of `{point}` is out of range"
            )));
        }
        by_index[idx] = g;
    }
    if by_index.contains(&usize::MAX) {
        return Err(Error::Structural(
            "images must be defined on every point".into(),
        ));
    }
    if by_index[space.basepoint_index()] != target.identity() {
        return Err(Error::BasepointNotIdentity);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let pulled = target.dist(by_index[i], by_index[j]);
            if pulled > space.dist(i, j) {
                return Err(Error::NotLipschitz {
                    a: space.name(i).to_string(),
                    b: space.name(j).to_string(),
                    dist: format_rational(space.dist(i, j)),
                    target_dist: format_rational(pulled),
                });
            }
        }
    }

    let extension = LipschitzExtension {
        space: space.clone(),
        target: target.clone(),
        images: by_index,
    };

    let exhaustive = space.len() <= 5;
    let words: Vec<Word> = if exhaustive {
        enumerate_words(space, 3, 2)
    } else {
        random_words(space, 200, 0)
    };

    let mut norm_cache: HashMap<Word, Rat> = HashMap::new();
    let mut max_ratio: Option<Rat> = None;
    let mut violations = Vec::new();
    let mut pairs_checked = 0usize;

    for u in &words {
        let hu = extension.apply(u)?;
        for v in &words {
            if u == v {
                continue;
            }
            pairs_checked += 1;
            let hv = extension.apply(v)?;
            let pulled = target.dist(hu, hv).clone();
            let diff = u.sub(v);
            let word_dist = match norm_cache.get(&diff) {
                Some(d) => d.clone(),
                None => {
                    let d = free_norm(space, &diff.to_chain(space)?)?;
                    norm_cache.insert(diff, d.clone());
                    d
                }
            };
            if pulled > word_dist {
                violations.push((u.clone(), v.clone()));
                continue;
            }
            if !word_dist.is_zero() {
                let ratio = pulled / &word_dist;
                if max_ratio.as_ref().is_none_or(|m| ratio > *m) {
                    max_ratio = Some(ratio);
                }
            }
        }
    }

    let report = LipschitzReport {
        pairs_checked,
        exhaustive,
        max_ratio,
        violations,
    };
    Ok((extension, report))
}

/// Seeded random words for the non-exhaustive report path.
fn random_words(space: &PointedMetricSpace, count: usize, seed: u64) -> Vec<Word> {
    let mut rng = StdRng::seed_from_u64(seed);
    let generators: Vec<String> = space
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != space.basepoint_index())
        .map(|(_, p)| p.clone())
        .collect();
    let mut words = vec![Word::zero()];
    for _ in 0..count {
        let support = rng.random_range(1..=3usize.min(generators.len()));
        let picks = sample(&mut rng, generators.len(), support);
        let mut coeffs = BTreeMap::new();
        for gi in picks {
            let c = loop {
                let c = rng.random_range(-2i64..=2);
                if c != 0 {
                    break c;
                }
            };
            coeffs.insert(generators[gi].clone(), c);
        }
        words.push(Word { coeffs });
    }
    words
}
