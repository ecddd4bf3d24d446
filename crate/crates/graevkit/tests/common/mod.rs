//! Shared generators and independent reference computations for the
//! integration suites. Everything here deliberately avoids the library's
//! solver internals: costs are recomputed by exhaustive enumeration or by
//! successive shortest paths over the full node set.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::Rng;

use graevkit::rational::{rat, rat_int, Rat};
use graevkit::{Chain, MetricAbelianGroup, PointedMetricSpace, SpaceRef, Word};

// ---------------------------------------------------------------------------
// random instances
// ---------------------------------------------------------------------------

/// Random valid metric space: positive rational entries pushed through a
/// shortest-path closure. `max_num`/`max_den` bound the raw entry draws;
/// closure replaces entries by sums of such values, so denominators stay
/// small.
pub fn random_space(rng: &mut StdRng, n: usize, max_num: i64, max_den: i64) -> SpaceRef {
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let num = rng.random_range(1..=max_num);
            let den = rng.random_range(1..=max_den);
            dist[i][j] = rat(num, den);
            dist[j][i] = dist[i][j].clone();
        }
    }
    metric_closure(&mut dist);
    Arc::new(space_from_matrix(n, dist))
}

/// Random valid metric space of diameter at most 1 (raw entries in (0, 1]).
pub fn random_small_diameter_space(rng: &mut StdRng, n: usize, max_den: i64) -> SpaceRef {
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let den = rng.random_range(1..=max_den);
            let num = rng.random_range(1..=den);
            dist[i][j] = rat(num, den);
            dist[j][i] = dist[i][j].clone();
        }
    }
    metric_closure(&mut dist);
    Arc::new(space_from_matrix(n, dist))
}

/// Shortest-path closure: enforces the triangle inequality exactly while
/// keeping entries positive and symmetric.
pub fn metric_closure(dist: &mut [Vec<Rat>]) {
    let n = dist.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let via = &dist[i][k] + &dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
}

pub fn space_from_matrix(n: usize, dist: Vec<Vec<Rat>>) -> PointedMetricSpace {
    let points: Vec<String> = (0..n)
        .map(|i| if i == 0 { "*".to_string() } else { format!("p{i}") })
        .collect();
    PointedMetricSpace::from_parts(points, "*", dist).expect("generated matrix is well formed")
}

/// The star space over `k` generators: d(x, *) = 1 and d(x, y) = 2, the
/// geometry in which the transport norm is exactly the sum of absolute
/// coefficients.
pub fn star_space(k: usize) -> SpaceRef {
    let n = k + 1;
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i][j] = if i == 0 || j == 0 { rat_int(1) } else { rat_int(2) };
            }
        }
    }
    Arc::new(space_from_matrix(n, dist))
}

/// Random chain with support of at most `max_support` non-basepoint points
/// and rational coefficients with numerators up to `max_num` and
/// denominators up to `max_den` (integers when `max_den == 1`).
pub fn random_chain(
    rng: &mut StdRng,
    space: &SpaceRef,
    max_support: usize,
    max_num: i64,
    max_den: i64,
) -> Chain {
    let candidates: Vec<String> = space
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != space.basepoint_index())
        .map(|(_, p)| p.clone())
        .collect();
    let support = rng.random_range(0..=max_support.min(candidates.len()));
    let picks = rand::seq::index::sample(rng, candidates.len(), support);
    let mut coeffs = Vec::new();
    for idx in picks {
        let num = loop {
            let v = rng.random_range(-max_num..=max_num);
            if v != 0 {
                break v;
            }
        };
        let den = rng.random_range(1..=max_den);
        coeffs.push((candidates[idx].clone(), rat(num, den)));
    }
    Chain::new(space, coeffs).expect("generated chain is valid")
}

/// Random word with small support and coefficients in ±1..=max_coeff.
pub fn random_word(rng: &mut StdRng, space: &SpaceRef, max_support: usize, max_coeff: i64) -> Word {
    let candidates: Vec<String> = space
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != space.basepoint_index())
        .map(|(_, p)| p.clone())
        .collect();
    let support = rng.random_range(0..=max_support.min(candidates.len()));
    let picks = rand::seq::index::sample(rng, candidates.len(), support);
    let mut coeffs = Vec::new();
    for idx in picks {
        let v = loop {
            let v = rng.random_range(-max_coeff..=max_coeff);
            if v != 0 {
                break v;
            }
        };
        coeffs.push((candidates[idx].clone(), v));
    }
    Word::new(space, coeffs).expect("generated word is valid")
}

// ---------------------------------------------------------------------------
// random bi-invariant metric groups
// ---------------------------------------------------------------------------

/// Random finite abelian group of order at most 12 with a random
/// bi-invariant metric: a symmetric positive length table on the cyclic
/// product, closed under subadditivity, pushed through `dist(x, y) =
/// len(x - y)`.
pub fn random_metric_group(rng: &mut StdRng) -> MetricAbelianGroup {
    const SHAPES: &[&[usize]] = &[
        &[2],
        &[3],
        &[4],
        &[5],
        &[6],
        &[7],
        &[8],
        &[9],
        &[10],
        &[11],
        &[12],
        &[2, 2],
        &[2, 3],
        &[2, 4],
        &[3, 3],
        &[2, 5],
        &[2, 6],
        &[3, 4],
        &[2, 2, 2],
        &[2, 2, 3],
    ];
    let factors = SHAPES[rng.random_range(0..SHAPES.len())];
    let n: usize = factors.iter().product();

    let digits = |mut e: usize| -> Vec<usize> {
        factors
            .iter()
            .map(|&f| {
                let d = e % f;
                e /= f;
                d
            })
            .collect()
    };
    let from_digits = |ds: &[usize]| -> usize {
        let mut e = 0;
        let mut stride = 1;
        for (&d, &f) in ds.iter().zip(factors) {
            e += d * stride;
            stride *= f;
        }
        e
    };
    let add = |a: usize, b: usize| -> usize {
        let (da, db) = (digits(a), digits(b));
        let sum: Vec<usize> = da
            .iter()
            .zip(&db)
            .zip(factors)
            .map(|((&x, &y), &f)| (x + y) % f)
            .collect();
        from_digits(&sum)
    };
    let neg = |a: usize| -> usize {
        let da = digits(a);
        let ds: Vec<usize> = da.iter().zip(factors).map(|(&x, &f)| (f - x) % f).collect();
        from_digits(&ds)
    };

    // symmetric positive lengths, then subadditive closure
    let mut len = vec![Rat::zero(); n];
    for g in 1..n {
        if len[g].is_zero() {
            let v = rat(rng.random_range(1..=12), rng.random_range(1..=6));
            len[g] = v.clone();
            len[neg(g)] = v;
        }
    }
    loop {
        let mut changed = false;
        for g in 1..n {
            for h in 1..n {
                let rest = add(g, neg(h));
                if rest == 0 {
                    continue;
                }
                let via = &len[h] + &len[rest];
                if via < len[g] {
                    len[g] = via.clone();
                    len[neg(g)] = via;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let elements: Vec<String> = (0..n).map(|e| format!("g{e}")).collect();
    let op: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| add(a, b)).collect()).collect();
    let dist: Vec<Vec<Rat>> = (0..n)
        .map(|a| (0..n).map(|b| len[add(a, neg(b))].clone()).collect())
        .collect();
    MetricAbelianGroup::from_tables(elements, op, dist).expect("closure yields a metric group")
}

/// A random space together with a 1-Lipschitz assignment into the group:
/// the space metric is the pulled-back group metric plus nonnegative slack,
/// re-closed under the triangle inequality (which keeps it above the
/// pullback).
pub fn random_lipschitz_instance(
    rng: &mut StdRng,
    group: &MetricAbelianGroup,
    n_points: usize,
) -> (SpaceRef, BTreeMap<String, usize>) {
    let n = n_points;
    let images: Vec<usize> = (0..n)
        .map(|i| {
            if i == 0 {
                group.identity()
            } else {
                rng.random_range(0..group.order())
            }
        })
        .collect();
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let pulled = group.dist(images[i], images[j]).clone();
            let slack = if pulled.is_zero() {
                rat(rng.random_range(1..=6), rng.random_range(1..=4))
            } else {
                rat(rng.random_range(0..=6), rng.random_range(1..=4))
            };
            dist[i][j] = pulled + slack;
            dist[j][i] = dist[i][j].clone();
        }
    }
    metric_closure(&mut dist);
    let space = Arc::new(space_from_matrix(n, dist));
    let assignment: BTreeMap<String, usize> = space
        .points()
        .iter()
        .cloned()
        .zip(images.iter().copied())
        .collect();
    (space, assignment)
}

// ---------------------------------------------------------------------------
// reference computations
// ---------------------------------------------------------------------------

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn rat_denom_i64(r: &Rat) -> i64 {
    r.denom().to_i64().expect("test denominators fit in i64")
}

fn rat_numer_i64(r: &Rat) -> i64 {
    r.numer().to_i64().expect("test numerators fit in i64")
}

/// Exhaustive minimum cost over all integral direct shipment matrices from
/// excess to deficit nodes (the basepoint absorbing the imbalance), after
/// scaling the chain to integers. Valid as an oracle because any plan can
/// be shortcut to direct shipments without increasing metric cost, and the
/// optimum over real plans with integer data is attained at an integral
/// vertex.
pub fn brute_force_min_cost(space: &SpaceRef, chain: &Chain) -> Rat {
    // scale the chain to integers
    let mut scale = 1i64;
    for c in chain.coeffs().values() {
        scale = lcm(scale, rat_denom_i64(c));
    }
    let scale_rat = rat_int(scale);

    let n = space.len();
    let bp = space.basepoint_index();
    let mut net = vec![0i64; n];
    for (p, c) in chain.coeffs() {
        let scaled = c * &scale_rat;
        net[space.index_of(p).unwrap()] = rat_numer_i64(&scaled);
    }
    net[bp] = -net.iter().enumerate().filter(|(i, _)| *i != bp).map(|(_, v)| v).sum::<i64>();

    let sources: Vec<(usize, i64)> = (0..n).filter(|&i| net[i] > 0).map(|i| (i, net[i])).collect();
    let sinks: Vec<(usize, i64)> = (0..n).filter(|&i| net[i] < 0).map(|i| (i, -net[i])).collect();
    if sources.is_empty() {
        return Rat::zero();
    }

    // scale distances to a common integer denominator
    let mut den = 1i64;
    for i in 0..n {
        for j in 0..n {
            den = lcm(den, rat_denom_i64(space.dist(i, j)));
        }
    }
    let cost: Vec<Vec<i128>> = sources
        .iter()
        .map(|&(a, _)| {
            sinks
                .iter()
                .map(|&(b, _)| {
                    let d = space.dist(a, b);
                    (rat_numer_i64(d) as i128) * ((den / rat_denom_i64(d)) as i128)
                })
                .collect()
        })
        .collect();

    let demands: Vec<i64> = sinks.iter().map(|&(_, t)| t).collect();
    let mut best: Option<i128> = None;

    // enumerate contingency tables source by source
    fn place(
        si: usize,
        supplies: &[i64],
        demands: &mut [i64],
        cost: &[Vec<i128>],
        so_far: i128,
        best: &mut Option<i128>,
    ) {
        if best.is_some_and(|b| so_far >= b) {
            return;
        }
        if si == supplies.len() {
            *best = Some(so_far);
            return;
        }
        #[allow(clippy::too_many_arguments)]
        fn alloc(
            si: usize,
            tj: usize,
            remaining: i64,
            supplies: &[i64],
            demands: &mut [i64],
            cost: &[Vec<i128>],
            so_far: i128,
            best: &mut Option<i128>,
        ) {
            if best.is_some_and(|b| so_far >= b) {
                return;
            }
            if tj == demands.len() {
                if remaining == 0 {
                    place(si + 1, supplies, demands, cost, so_far, best);
                }
                return;
            }
            let tail: i64 = demands[tj + 1..].iter().sum();
            let lo = (remaining - tail).max(0);
            let hi = remaining.min(demands[tj]);
            for x in lo..=hi {
                demands[tj] -= x;
                alloc(
                    si,
                    tj + 1,
                    remaining - x,
                    supplies,
                    demands,
                    cost,
                    so_far + (x as i128) * cost[si][tj],
                    best,
                );
                demands[tj] += x;
            }
        }
        alloc(si, 0, supplies[si], supplies, demands, cost, so_far, best);
    }

    let supplies: Vec<i64> = sources.iter().map(|&(_, s)| s).collect();
    let mut demands = demands;
    place(0, &supplies, &mut demands, &cost, 0, &mut best);

    let total = best.expect("a feasible shipment always exists");
    // undo both scalings
    Rat::new(total.into(), (i128::from(den) * i128::from(scale)).into())
}

/// Successive-shortest-paths transshipment over the *full* node set with
/// the basepoint carrying the free imbalance. Independent of the library
/// solver: Bellman-Ford labels, explicit residual arcs, rational
/// arithmetic.
pub fn reference_transshipment_cost(space: &SpaceRef, chain: &Chain) -> Rat {
    let n = space.len();
    let bp = space.basepoint_index();
    let mut balance = vec![Rat::zero(); n];
    for (p, c) in chain.coeffs() {
        balance[space.index_of(p).unwrap()] = c.clone();
    }
    balance[bp] = -chain.total();

    let mut flow: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        assert!(rounds < 10_000, "reference solver failed to terminate");
        let Some(source) = (0..n).find(|&i| balance[i] > Rat::zero()) else {
            break;
        };

        // Bellman-Ford over residual arcs; an arc u→v is the reverse of
        // recorded flow when flow(v, u) > 0 (cost -d), else the forward
        // metric arc (cost d).
        let mut dist: Vec<Option<Rat>> = vec![None; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        dist[source] = Some(Rat::zero());
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u].clone() else { continue };
                for v in 0..n {
                    if v == u {
                        continue;
                    }
                    let reverse = flow.get(&(v, u)).is_some_and(|f| *f > Rat::zero());
                    let cost = if reverse {
                        -space.dist(v, u).clone()
                    } else {
                        space.dist(u, v).clone()
                    };
                    let cand = &du + &cost;
                    if dist[v].as_ref().is_none_or(|dv| cand < *dv) {
                        dist[v] = Some(cand);
                        parent[v] = Some(u);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let sink = (0..n)
            .filter(|&i| balance[i] < Rat::zero() && dist[i].is_some())
            .min_by(|&x, &y| {
                (dist[x].clone().unwrap(), x).cmp(&(dist[y].clone().unwrap(), y))
            })
            .expect("imbalances stay balanced");

        // bottleneck along the path
        let mut delta = balance[source].clone().min(-balance[sink].clone());
        let mut node = sink;
        while let Some(prev) = parent[node] {
            if flow.get(&(node, prev)).is_some_and(|f| *f > Rat::zero()) {
                delta = delta.min(flow[&(node, prev)].clone());
            }
            node = prev;
        }
        assert!(delta > Rat::zero());

        let mut node = sink;
        while let Some(prev) = parent[node] {
            if flow.get(&(node, prev)).is_some_and(|f| *f > Rat::zero()) {
                let entry = flow.get_mut(&(node, prev)).unwrap();
                *entry -= &delta;
            } else {
                *flow.entry((prev, node)).or_insert_with(Rat::zero) += &delta;
            }
            node = prev;
        }
        balance[source] -= &delta;
        balance[sink] += &delta;
    }

    flow.iter().fold(Rat::zero(), |acc, ((u, v), f)| {
        acc + f * space.dist(*u, *v)
    })
}

/// Convenience: chain from (name, rational) pairs.
pub fn chain_of(space: &SpaceRef, coeffs: &[(&str, Rat)]) -> Chain {
    Chain::new(
        space,
        coeffs.iter().map(|(p, c)| (p.to_string(), c.clone())),
    )
    .expect("chain fits the space")
}

/// Convenience: chain from (name, integer) pairs.
pub fn int_chain(space: &SpaceRef, coeffs: &[(&str, i64)]) -> Chain {
    Chain::new(
        space,
        coeffs.iter().map(|(p, c)| (p.to_string(), rat_int(*c))),
    )
    .expect("chain fits the space")
}
