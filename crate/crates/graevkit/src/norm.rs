//! The norm induced on chains by optimal transport, the distance it
//! generates, and the matching distance between finitely supported
//! probability measures.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rat};
use crate::space::{Chain, SpaceRef};
use crate::transport::solve_min_cost;

/// A finitely supported probability measure on the points of a space.
///
/// Unlike chains, measures may charge the basepoint. Weights are positive
/// and sum to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbMeasure {
    space: SpaceRef,
    weights: BTreeMap<usize, Rat>,
}

impl ProbMeasure {
    pub fn new<I>(space: SpaceRef, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Rat)>,
    {
        let mut map: BTreeMap<usize, Rat> = BTreeMap::new();
        for (point, weight) in weights {
            let idx = space.index_of(&point)?;
            if weight <= Rat::zero() {
                return Err(Error::InvalidMeasure(format!(
                    "weight {} at `{point}` is not positive",
                    format_rational(&weight)
                )));
            }
            *map.entry(idx).or_insert_with(Rat::zero) += weight;
        }
        let total: Rat = map.values().fold(Rat::zero(), |acc, w| acc + w);
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {}, not 1",
                format_rational(&total)
            )));
        }
        Ok(Self {
            space,
            weights: map,
        })
    }

    /// The point mass at `p`.
    pub fn dirac(space: SpaceRef, p: &str) -> Result<Self> {
        let idx = space.index_of(p)?;
        let mut weights = BTreeMap::new();
        weights.insert(idx, Rat::one());
        Ok(Self { space, weights })
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn weights(&self) -> &BTreeMap<usize, Rat> {
        &self.weights
    }

    /// The chain of this measure: its coefficients off the basepoint.
    pub fn to_chain(&self) -> Chain {
        let bp = self.space.basepoint_index();
        Chain::new(
            &self.space,
            self.weights
                .iter()
                .filter(|(idx, _)| **idx != bp)
                .map(|(idx, w)| (self.space.name(*idx).to_string(), w.clone())),
        )
        .expect("measure weights live on space points")
    }

    /// Weights keyed by point name.
    pub fn to_named_weights(&self) -> BTreeMap<String, String> {
        self.weights
            .iter()
            .map(|(idx, w)| (self.space.name(*idx).to_string(), format_rational(w)))
            .collect()
    }
}

impl Serialize for ProbMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let named = self.to_named_weights();
        let mut map = serializer.serialize_map(Some(named.len()))?;
        for (point, weight) in named {
            map.serialize_entry(&point, &weight)?;
        }
        map.end()
    }
}

/// Raw measure weights as parsed from JSON; resolve against a space with
/// [`ProbMeasure::new`].
#[derive(Debug, Clone, Default)]
pub struct RawMeasure(pub BTreeMap<String, Rat>);

impl<'de> Deserialize<'de> for RawMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RawVisitor;
        impl<'de> Visitor<'de> for RawVisitor {
            type Value = RawMeasure;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from point identifiers to rational strings")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<RawMeasure, A::Error> {
                let mut weights = BTreeMap::new();
                while let Some((point, value)) = access.next_entry::<String, String>()? {
                    let weight = parse_rational(&value).map_err(de::Error::custom)?;
                    weights.insert(point, weight);
                }
                Ok(RawMeasure(weights))
            }
        }
        deserializer.deserialize_map(RawVisitor)
    }
}

impl RawMeasure {
    pub fn resolve(self, space: &SpaceRef) -> Result<ProbMeasure> {
        ProbMeasure::new(space.clone(), self.0)
    }
}

/// The transport norm of a chain: the minimal cost of realizing it as a
/// divergence, with the basepoint free.
///
/// ```
/// use std::sync::Arc;
/// use graevkit::rational::{parse_rational, rat_int};
/// use graevkit::{free_norm, Chain, PointedMetricSpace};
///
/// // star geometry: every generator sits at distance 1 from the basepoint
/// // and at distance 2 from every other generator, so the norm is the sum
/// // of absolute coefficients
/// let space = Arc::new(PointedMetricSpace::from_str_parts(
///     &["*", "x", "y"],
///     "*",
///     &[&["0", "1", "1"], &["1", "0", "2"], &["1", "2", "0"]],
/// )?);
/// let chain = Chain::new(&space, [("x".to_string(), parse_rational("3")?),
///                                 ("y".to_string(), parse_rational("-2")?)])?;
/// assert_eq!(free_norm(&space, &chain)?, rat_int(5));
/// # Ok::<(), graevkit::Error>(())
/// ```
pub fn free_norm(space: &SpaceRef, chain: &Chain) -> Result<Rat> {
    let (_, cost) = solve_min_cost(space, chain)?;
    Ok(cost)
}

/// Distance induced by the norm: `‖x - y‖`.
pub fn free_distance(space: &SpaceRef, x: &Chain, y: &Chain) -> Result<Rat> {
    free_norm(space, &x.sub(y))
}

/// Minimal transport cost between two probability measures: optimize over
/// couplings with the two prescribed marginals (balanced transportation,
/// no free node; mass may stay in place at zero cost).
pub fn kantorovich_distance(space: &SpaceRef, mu1: &ProbMeasure, mu2: &ProbMeasure) -> Result<Rat> {
    if mu1.space().as_ref() != space.as_ref() || mu2.space().as_ref() != space.as_ref() {
        return Err(Error::SpaceMismatch);
    }
    let sources: Vec<(usize, Rat)> = mu1.weights.iter().map(|(i, w)| (*i, w.clone())).collect();
    let sinks: Vec<(usize, Rat)> = mu2.weights.iter().map(|(i, w)| (*i, w.clone())).collect();
    Ok(crate::transport::balanced_transport_cost(
        space, &sources, &sinks,
    ))
}
