//! Finite pointed metric spaces, formal chains over them, and the
//! basepoint-change and one-point augmentation constructions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rat};

/// Name given to the point added by [`dagger_augment`].
pub const DAGGER: &str = "\u{2020}";

/// A finite metric space with a distinguished basepoint.
///
/// Point identifiers are opaque strings; the matrix rows and columns follow
/// the order of `points`. Distances are exact rationals. Construction checks
/// structure only (shape, uniqueness, basepoint membership); the metric
/// axioms are checked by [`validate_space`], which reports violations rather
/// than failing, so that invalid inputs can still be inspected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedMetricSpace {
    points: Vec<String>,
    basepoint: usize,
    dist: Vec<Vec<Rat>>,
    index: BTreeMap<String, usize>,
}

impl PointedMetricSpace {
    /// Build a space from its parts, checking structure only.
    pub fn from_parts(
        points: Vec<String>,
        basepoint: &str,
        dist: Vec<Vec<Rat>>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Structural("point list is empty".into()));
        }
        let mut index = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::Structural(format!("duplicate point `{p}`")));
            }
        }
        let basepoint = *index
            .get(basepoint)
            .ok_or_else(|| Error::Structural(format!("basepoint `{basepoint}` not in points")))?;
        let n = points.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::Structural(format!(
                "distance matrix must be {n}x{n} to match the point list"
            )));
        }
        Ok(Self {
            points,
            basepoint,
            dist,
            index,
        })
    }

    /// Convenience constructor from string distances.
    pub fn from_str_parts(points: &[&str], basepoint: &str, dist: &[&[&str]]) -> Result<Self> {
        let dist = dist
            .iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(points.iter().map(|s| s.to_string()).collect(), basepoint, dist)
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

    pub fn basepoint_index(&self) -> usize {
        self.basepoint
    }

    pub fn basepoint(&self) -> &str {
        &self.points[self.basepoint]
    }

    pub fn index_of(&self, point: &str) -> Result<usize> {
        self.index
            .get(point)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(point.to_string()))
    }

    pub fn name(&self, index: usize) -> &str {
        &self.points[index]
    }

    /// Distance between two points by index.
    pub fn dist(&self, i: usize, j: usize) -> &Rat {
        &self.dist[i][j]
    }

    /// Distance between two points by name.
    pub fn dist_by_name(&self, a: &str, b: &str) -> Result<&Rat> {
        Ok(self.dist(self.index_of(a)?, self.index_of(b)?))
    }

    /// Largest pairwise distance, with a witnessing pair.
    pub fn diameter(&self) -> (Rat, usize, usize) {
        let mut best = (Rat::zero(), 0, 0);
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if self.dist[i][j] > best.0 {
                    best = (self.dist[i][j].clone(), i, j);
                }
            }
        }
        best
    }

    /// The space restricted to a subset of point indices (which must include
    /// the basepoint). Point order is preserved.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        if !keep.contains(&self.basepoint) {
            return Err(Error::Structural(
                "restriction must keep the basepoint".into(),
            ));
        }
        let points: Vec<String> = keep.iter().map(|&i| self.points[i].clone()).collect();
        let dist: Vec<Vec<Rat>> = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        Self::from_parts(points, self.basepoint(), dist)
    }
}

/// One metric axiom violation: the axiom name, the first witnessing index
/// tuple in lexicographic order, and the offending values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: String,
    pub indices: Vec<usize>,
    pub values: Vec<String>,
}

/// Outcome of checking the metric axioms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Check the metric axioms, reporting the first witness per violated axiom.
///
/// Axioms checked, in report order: zero diagonal, positivity off the
/// diagonal, symmetry, and the triangle inequality over distinct triples.
pub fn validate_space(space: &PointedMetricSpace) -> ValidationReport {
    let n = space.len();
    let mut violations = Vec::new();

    'diag: for i in 0..n {
        if !space.dist(i, i).is_zero() {
            violations.push(Violation {
                axiom: "zero_diagonal".into(),
                indices: vec![i],
                values: vec![format_rational(space.dist(i, i))],
            });
            break 'diag;
        }
    }

    'pos: for i in 0..n {
        for j in 0..n {
            if i != j && *space.dist(i, j) <= Rat::zero() {
                violations.push(Violation {
                    axiom: "positivity".into(),
                    indices: vec![i, j],
                    values: vec![format_rational(space.dist(i, j))],
                });
                break 'pos;
            }
        }
    }

    'sym: for i in 0..n {
        for j in 0..n {
            if space.dist(i, j) != space.dist(j, i) {
                violations.push(Violation {
                    axiom: "symmetry".into(),
                    indices: vec![i, j],
                    values: vec![
                        format_rational(space.dist(i, j)),
                        format_rational(space.dist(j, i)),
                    ],
                });
                break 'sym;
            }
        }
    }

    'tri: for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let via = space.dist(i, j) + space.dist(j, k);
                if *space.dist(i, k) > via {
                    violations.push(Violation {
                        axiom: "triangle".into(),
                        indices: vec![i, j, k],
                        values: vec![
                            format_rational(space.dist(i, k)),
                            format_rational(space.dist(i, j)),
                            format_rational(space.dist(j, k)),
                        ],
                    });
                    break 'tri;
                }
            }
        }
    }

    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// A finitely supported formal rational combination of non-basepoint points.
///
/// Zero coefficients are never stored, and the basepoint never appears as a
/// key. The zero chain is the empty map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Chain {
    coeffs: BTreeMap<String, Rat>,
}

impl Chain {
    /// The zero chain.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Build a chain over `space`, rejecting unknown points, the basepoint,
    /// and dropping zero coefficients.
    pub fn new<I>(space: &PointedMetricSpace, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Rat)>,
    {
        let mut map: BTreeMap<String, Rat> = BTreeMap::new();
        for (point, coeff) in coeffs {
            let idx = space.index_of(&point)?;
            if idx == space.basepoint_index() {
                return Err(Error::BasepointCoefficient(point));
            }
            *map.entry(point).or_insert_with(Rat::zero) += coeff;
        }
        map.retain(|_, value| !value.is_zero());
        Ok(Self { coeffs: map })
    }

    /// The chain `1 * p`, or the zero chain when `p` is the basepoint.
    pub fn of_point(space: &PointedMetricSpace, p: &str) -> Result<Self> {
        let idx = space.index_of(p)?;
        if idx == space.basepoint_index() {
            return Ok(Self::zero());
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(p.to_string(), Rat::from_integer(1.into()));
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Rat> {
        &self.coeffs
    }

    pub fn coeff(&self, point: &str) -> Rat {
        self.coeffs.get(point).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of all coefficients.
    pub fn total(&self) -> Rat {
        self.coeffs.values().fold(Rat::zero(), |acc, c| acc + c)
    }

    /// Check that every key is a non-basepoint point of `space`.
    pub fn validate_against(&self, space: &PointedMetricSpace) -> Result<()> {
        for point in self.coeffs.keys() {
            let idx = space.index_of(point)?;
            if idx == space.basepoint_index() {
                return Err(Error::BasepointCoefficient(point.clone()));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Chain {
        let mut coeffs = self.coeffs.clone();
        for (point, coeff) in &other.coeffs {
            let entry = coeffs.entry(point.clone()).or_insert_with(Rat::zero);
            *entry += coeff;
        }
        coeffs.retain(|_, value| !value.is_zero());
        Chain { coeffs }
    }

    pub fn sub(&self, other: &Chain) -> Chain {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Chain {
        Chain {
            coeffs: self
                .coeffs
                .iter()
                .map(|(point, coeff)| (point.clone(), -coeff.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Rat) -> Chain {
        if factor.is_zero() {
            return Chain::zero();
        }
        Chain {
            coeffs: self
                .coeffs
                .iter()
                .map(|(point, coeff)| (point.clone(), coeff * factor))
                .collect(),
        }
    }
}

/// The chain substitution induced by moving the basepoint from
/// `old_basepoint` to `new_basepoint`.
///
/// Applying the transform rewrites a chain over the old basepoint as the
/// chain over the new one describing the same signed measure: the old
/// basepoint picks up minus the sum of all coefficients, and the new
/// basepoint's coordinate is dropped.
#[derive(Debug, Clone)]
pub struct RebaseTransform {
    old_basepoint: String,
    new_basepoint: String,
}

impl RebaseTransform {
    pub fn apply(&self, chain: &Chain) -> Chain {
        let mut coeffs = chain.coeffs.clone();
        let total = chain.total();
        // the old basepoint (never a key of the input) picks up minus the
        // total, then the new basepoint's coordinate is dropped
        if !total.is_zero() {
            coeffs.insert(self.old_basepoint.clone(), -total);
        }
        coeffs.remove(&self.new_basepoint);
        coeffs.retain(|_, value| !value.is_zero());
        Chain { coeffs }
    }

    /// The transform going back.
    pub fn inverse(&self) -> RebaseTransform {
        RebaseTransform {
            old_basepoint: self.new_basepoint.clone(),
            new_basepoint: self.old_basepoint.clone(),
        }
    }
}

/// Distinguish a different point of the same metric, returning the rebased
/// space together with the induced chain substitution.
pub fn rebase(
    space: &PointedMetricSpace,
    new_basepoint: &str,
) -> Result<(PointedMetricSpace, RebaseTransform)> {
    let idx = space.index_of(new_basepoint)?;
    let rebased = PointedMetricSpace {
        points: space.points.clone(),
        basepoint: idx,
        dist: space.dist.clone(),
        index: space.index.clone(),
    };
    let transform = RebaseTransform {
        old_basepoint: space.basepoint().to_string(),
        new_basepoint: new_basepoint.to_string(),
    };
    Ok((rebased, transform))
}

/// Add one point at distance 1 from everything and make it the basepoint.
///
/// Requires diameter at most 1; the augmented matrix then satisfies the
/// triangle inequality. Errors name the offending pair otherwise.
pub fn dagger_augment(space: &PointedMetricSpace) -> Result<PointedMetricSpace> {
    let (diam, i, j) = space.diameter();
    if diam > Rat::from_integer(1.into()) {
        return Err(Error::DiameterExceeded(
            space.name(i).to_string(),
            space.name(j).to_string(),
            format_rational(&diam),
        ));
    }
    if space.index.contains_key(DAGGER) {
        return Err(Error::Structural(format!(
            "point name `{DAGGER}` is reserved for the augmentation"
        )));
    }
    let n = space.len();
    let mut points = space.points.clone();
    points.push(DAGGER.to_string());
    let one = Rat::from_integer(1.into());
    let mut dist = space.dist.clone();
    for row in dist.iter_mut() {
        row.push(one.clone());
    }
    let mut last = vec![one; n];
    last.push(Rat::zero());
    dist.push(last);
    PointedMetricSpace::from_parts(points, DAGGER, dist)
}

/// Image of a chain under the embedding of the original space into its
/// augmentation: the old basepoint becomes a regular point and picks up
/// minus the sum of the coefficients.
pub fn dagger_chain(space: &PointedMetricSpace, chain: &Chain) -> Chain {
    let mut coeffs = chain.coeffs.clone();
    let total = chain.total();
    if !total.is_zero() {
        coeffs.insert(space.basepoint().to_string(), -total);
    }
    Chain { coeffs }
}

// ---------------------------------------------------------------------------
// serde: the on-disk formats use rational strings throughout
// ---------------------------------------------------------------------------

impl Serialize for PointedMetricSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PointedMetricSpace", 3)?;
        s.serialize_field("points", &self.points)?;
        s.serialize_field("basepoint", self.basepoint())?;
        let dist: Vec<Vec<String>> = self
            .dist
            .iter()
            .map(|row| row.iter().map(format_rational).collect())
            .collect();
        s.serialize_field("dist", &dist)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for PointedMetricSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            points: Vec<String>,
            basepoint: String,
            dist: Vec<Vec<String>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let dist = raw
            .dist
            .iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        PointedMetricSpace::from_parts(raw.points, &raw.basepoint, dist).map_err(de::Error::custom)
    }
}

impl Serialize for Chain {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.coeffs.len()))?;
        for (point, coeff) in &self.coeffs {
            map.serialize_entry(point, &format_rational(coeff))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Chain {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ChainVisitor;
        impl<'de> Visitor<'de> for ChainVisitor {
            type Value = Chain;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from point identifiers to rational strings")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Chain, A::Error> {
                let mut coeffs = BTreeMap::new();
                while let Some((point, value)) = access.next_entry::<String, String>()? {
                    let coeff = parse_rational(&value).map_err(de::Error::custom)?;
                    if !coeff.is_zero() {
                        coeffs.insert(point, coeff);
                    }
                }
                Ok(Chain { coeffs })
            }
        }
        deserializer.deserialize_map(ChainVisitor)
    }
}

/// Shared handle to a space; chains are plain data validated against one.
pub type SpaceRef = Arc<PointedMetricSpace>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    pub(crate) fn three_point_space(ab: &str) -> PointedMetricSpace {
        PointedMetricSpace::from_str_parts(
            &["*", "a", "b"],
            "*",
            &[&["0", "1", "1"], &["1", "0", ab], &["1", ab, "0"]],
        )
        .unwrap()
    }

    #[test]
    fn valid_three_point_space_passes() {
        let report = validate_space(&three_point_space("3/2"));
        assert!(report.ok);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn broken_triangle_reports_first_witness() {
        let report = validate_space(&three_point_space("5/2"));
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.axiom, "triangle");
        // first witnessing triple in lexicographic index order: (a, *, b)
        assert_eq!(v.indices, vec![1, 0, 2]);
        assert_eq!(v.values, vec!["5/2", "1", "1"]);
    }

    #[test]
    fn degenerate_pair_reports_positivity() {
        let report = validate_space(&three_point_space("0"));
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| v.axiom == "positivity"));
    }

    #[test]
    fn asymmetry_and_nonzero_diagonal_are_reported() {
        let space = PointedMetricSpace::from_str_parts(
            &["*", "a"],
            "*",
            &[&["1", "2"], &["1", "0"]],
        )
        .unwrap();
        let report = validate_space(&space);
        let axioms: Vec<&str> = report.violations.iter().map(|v| v.axiom.as_str()).collect();
        assert!(axioms.contains(&"zero_diagonal"));
        assert!(axioms.contains(&"symmetry"));
    }

    #[test]
    fn dimension_mismatch_is_a_structural_error() {
        let err = PointedMetricSpace::from_str_parts(&["*", "a"], "*", &[&["0", "1"]]);
        assert!(matches!(err, Err(Error::Structural(_))));
        let err = PointedMetricSpace::from_str_parts(&["*", "a"], "c", &[&["0", "1"], &["1", "0"]]);
        assert!(matches!(err, Err(Error::Structural(_))));
    }

    #[test]
    fn chain_drops_zeros_and_rejects_basepoint() {
        let space = three_point_space("3/2");
        let chain = Chain::new(
            &space,
            vec![
                ("a".to_string(), rat_int(2)),
                ("b".to_string(), rat_int(0)),
            ],
        )
        .unwrap();
        assert_eq!(chain.support_len(), 1);
        assert!(Chain::new(&space, vec![("*".to_string(), rat_int(1))]).is_err());
        assert!(Chain::new(&space, vec![("zz".to_string(), rat_int(1))]).is_err());
    }

    #[test]
    fn rebase_at_current_basepoint_is_identity() {
        let space = three_point_space("3/2");
        let (rebased, transform) = rebase(&space, "*").unwrap();
        assert_eq!(rebased, space);
        let chain = Chain::new(&space, vec![("a".to_string(), rat(3, 2))]).unwrap();
        assert_eq!(transform.apply(&chain), chain);
    }

    #[test]
    fn rebase_moves_mass_to_old_basepoint() {
        let space = three_point_space("3/2");
        // (a: 1) rebased at a becomes (*: -1)
        let chain = Chain::of_point(&space, "a").unwrap();
        let (rebased, transform) = rebase(&space, "a").unwrap();
        assert_eq!(rebased.basepoint(), "a");
        let image = transform.apply(&chain);
        assert_eq!(image.coeff("*"), rat_int(-1));
        assert_eq!(image.support_len(), 1);

        // balanced chains keep a zero old-basepoint coefficient
        let balanced = Chain::new(
            &space,
            vec![("a".to_string(), rat_int(1)), ("b".to_string(), rat_int(-1))],
        )
        .unwrap();
        let (_, to_b) = rebase(&space, "b").unwrap();
        let image = to_b.apply(&balanced);
        assert_eq!(image.coeff("a"), rat_int(1));
        assert!(image.coeff("*").is_zero());
        assert_eq!(image.support_len(), 1);
    }

    #[test]
    fn rebase_round_trip_is_identity_on_chains() {
        let space = three_point_space("3/2");
        let (_, transform) = rebase(&space, "b").unwrap();
        let back = transform.inverse();
        let chain = Chain::new(
            &space,
            vec![("a".to_string(), rat(2, 3)), ("b".to_string(), rat(-5, 7))],
        )
        .unwrap();
        assert_eq!(back.apply(&transform.apply(&chain)), chain);
    }

    #[test]
    fn dagger_augment_adds_unit_distances() {
        let space = PointedMetricSpace::from_str_parts(
            &["*", "a"],
            "*",
            &[&["0", "1"], &["1", "0"]],
        )
        .unwrap();
        let augmented = dagger_augment(&space).unwrap();
        assert_eq!(augmented.len(), 3);
        assert_eq!(augmented.basepoint(), DAGGER);
        assert_eq!(*augmented.dist_by_name(DAGGER, "*").unwrap(), rat_int(1));
        assert_eq!(*augmented.dist_by_name(DAGGER, "a").unwrap(), rat_int(1));
        assert_eq!(*augmented.dist_by_name("*", "a").unwrap(), rat_int(1));
        assert!(validate_space(&augmented).ok);
    }

    #[test]
    fn dagger_augment_rejects_large_diameter() {
        let space = three_point_space("3/2");
        match dagger_augment(&space) {
            Err(Error::DiameterExceeded(a, b, d)) => {
                assert_eq!((a.as_str(), b.as_str(), d.as_str()), ("a", "b", "3/2"));
            }
            other => panic!("expected diameter error, got {other:?}"),
        }
    }

    #[test]
    fn dagger_point_name_collision_is_structural() {
        let space = PointedMetricSpace::from_str_parts(
            &["*", DAGGER],
            "*",
            &[&["0", "1"], &["1", "0"]],
        )
        .unwrap();
        assert!(matches!(dagger_augment(&space), Err(Error::Structural(_))));
    }

    #[test]
    fn dagger_chain_balances_through_old_basepoint() {
        let space = three_point_space("1");
        let chain = Chain::new(
            &space,
            vec![("a".to_string(), rat_int(1)), ("b".to_string(), rat_int(-1))],
        )
        .unwrap();
        // balanced chain maps to itself
        assert_eq!(dagger_chain(&space, &chain), chain);
        let unbalanced = Chain::of_point(&space, "a").unwrap();
        let image = dagger_chain(&space, &unbalanced);
        assert_eq!(image.coeff("*"), rat_int(-1));
        assert_eq!(image.coeff("a"), rat_int(1));
    }

    #[test]
    fn space_json_round_trip() {
        let space = three_point_space("3/2");
        let json = serde_json::to_string(&space).unwrap();
        assert_eq!(
            json,
            r#"{"points":["*","a","b"],"basepoint":"*","dist":[["0","1","1"],["1","0","3/2"],["1","3/2","0"]]}"#
        );
        let back: PointedMetricSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, space);
    }

    #[test]
    fn chain_json_round_trip() {
        let space = three_point_space("3/2");
        let chain = Chain::new(
            &space,
            vec![("a".to_string(), rat_int(2)), ("b".to_string(), rat_int(-1))],
        )
        .unwrap();
        let json = serde_json::to_string(&chain).unwrap();
        assert_eq!(json, r#"{"a":"2","b":"-1"}"#);
        let back: Chain = serde_json::from_str(&json).unwrap();
        assert_eq!(back, chain);
    }
}
