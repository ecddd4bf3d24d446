//! Exact min-cost transport over a finite pointed metric space.
//!
//! The solver computes optimal plans for a prescribed divergence chain, with
//! the basepoint acting as a free source/sink. Because the costs form a
//! metric, an optimal solution never needs an intermediate stop: the problem
//! reduces to a balanced transportation problem between the excess and
//! deficit nodes of `supp(divergence) ∪ {basepoint}`. That reduction is what
//! keeps plans at tree size and makes the dual potentials exact.
//!
//! The transportation problem itself is solved by the classical simplex on
//! the bipartite tableau with Bland's rule (first negative reduced cost in
//! lexicographic (source, sink) order enters; lexicographically least
//! minimum-ratio cell leaves). Bland's rule makes the pivot sequence, and
//! hence the emitted plan, deterministic, and rules out cycling.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, fract, Rat};
use crate::space::{Chain, PointedMetricSpace, SpaceRef};

/// A nonnegative rational measure on ordered point pairs.
///
/// Entries are keyed by `(source index, sink index)`; all masses are
/// positive and no entry sits on the diagonal. The plan's divergence (net
/// outflow per node) is what ties it to a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportPlan {
    space: SpaceRef,
    entries: BTreeMap<(usize, usize), Rat>,
}

impl TransportPlan {
    /// Build a plan from `(source, sink, mass)` triples given by index.
    pub fn new<I>(space: SpaceRef, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), Rat)>,
    {
        let n = space.len();
        let mut map: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        for ((a, b), mass) in entries {
            if a >= n || b >= n {
                return Err(Error::InvalidPlan(format!(
                    "entry ({a}, {b}) is out of range for a space of {n} points"
                )));
            }
            if a == b {
                return Err(Error::InvalidPlan(format!(
                    "diagonal entry at `{}`",
                    space.name(a)
                )));
            }
            if mass <= Rat::zero() {
                return Err(Error::InvalidPlan(format!(
                    "mass {} on ({}, {}) is not positive",
                    format_rational(&mass),
                    space.name(a),
                    space.name(b)
                )));
            }
            *map.entry((a, b)).or_insert_with(Rat::zero) += mass;
        }
        Ok(Self {
            space,
            entries: map,
        })
    }

    /// Build a plan from `(source, sink, mass)` triples given by name, with
    /// masses in rational text form.
    pub fn from_named_triples(
        space: SpaceRef,
        triples: &[(String, String, String)],
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(triples.len());
        for (a, b, mass) in triples {
            let i = space.index_of(a)?;
            let j = space.index_of(b)?;
            let mass = crate::rational::parse_rational(mass)?;
            entries.push(((i, j), mass));
        }
        Self::new(space, entries)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Rat> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total cost `Σ mass · d(source, sink)`.
    pub fn cost(&self) -> Rat {
        self.entries
            .iter()
            .fold(Rat::zero(), |acc, ((a, b), mass)| {
                acc + mass * self.space.dist(*a, *b)
            })
    }

    /// Net outflow per node; nodes with zero net flow are omitted.
    pub fn divergence(&self) -> BTreeMap<usize, Rat> {
        let mut div: BTreeMap<usize, Rat> = BTreeMap::new();
        for ((a, b), mass) in &self.entries {
            *div.entry(*a).or_insert_with(Rat::zero) += mass;
            *div.entry(*b).or_insert_with(Rat::zero) -= mass;
        }
        div.retain(|_, v| !v.is_zero());
        div
    }

    /// The chain realized by this plan: its divergence off the basepoint.
    pub fn divergence_chain(&self) -> Chain {
        let bp = self.space.basepoint_index();
        let coeffs = self
            .divergence()
            .into_iter()
            .filter(|(node, _)| *node != bp)
            .map(|(node, v)| (self.space.name(node).to_string(), v));
        Chain::new(&self.space, coeffs).expect("divergence nodes are space points")
    }

    pub fn is_integral(&self) -> bool {
        self.entries.values().all(|m| m.is_integer())
    }

    /// Entries as `(source name, sink name, mass)` triples in index order.
    pub fn to_named_triples(&self) -> Vec<(String, String, String)> {
        self.entries
            .iter()
            .map(|((a, b), mass)| {
                (
                    self.space.name(*a).to_string(),
                    self.space.name(*b).to_string(),
                    format_rational(mass),
                )
            })
            .collect()
    }
}

/// A rational 1-Lipschitz function vanishing at the basepoint.
///
/// Values are stored for every point; the constructor enforces both
/// invariants exactly, so a value of this type is always a feasible
/// Kantorovich potential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPotential {
    space: SpaceRef,
    values: Vec<Rat>,
}

impl DualPotential {
    pub fn new(space: SpaceRef, values: Vec<Rat>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Structural(format!(
                "potential has {} values for {} points",
                values.len(),
                space.len()
            )));
        }
        let candidate = Self { space, values };
        candidate.check_feasible()?;
        Ok(candidate)
    }

    fn check_feasible(&self) -> Result<()> {
        if !self.values[self.space.basepoint_index()].is_zero() {
            return Err(Error::Structural(
                "potential does not vanish at the basepoint".into(),
            ));
        }
        for i in 0..self.space.len() {
            for j in (i + 1)..self.space.len() {
                let gap = (&self.values[i] - &self.values[j]).abs();
                if gap > *self.space.dist(i, j) {
                    return Err(Error::NotLipschitz {
                        a: self.space.name(i).to_string(),
                        b: self.space.name(j).to_string(),
                        dist: format_rational(self.space.dist(i, j)),
                        target_dist: format_rational(&gap),
                    });
                }
            }
        }
        Ok(())
    }

    /// Re-run the feasibility check (used by verification paths).
    pub fn is_feasible(&self) -> bool {
        self.check_feasible().is_ok()
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn value(&self, index: usize) -> &Rat {
        &self.values[index]
    }

    pub fn value_by_name(&self, point: &str) -> Result<&Rat> {
        Ok(&self.values[self.space.index_of(point)?])
    }

    /// Dual objective `Σ f(p) · divergence(p)` over non-basepoint points.
    pub fn objective(&self, divergence: &Chain) -> Result<Rat> {
        divergence.validate_against(&self.space)?;
        let mut total = Rat::zero();
        for (point, coeff) in divergence.coeffs() {
            total += &self.values[self.space.index_of(point)?] * coeff;
        }
        Ok(total)
    }

    /// Values keyed by point name, basepoint omitted (it is pinned to 0).
    pub fn to_named_values(&self) -> BTreeMap<String, String> {
        let bp = self.space.basepoint_index();
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != bp)
            .map(|(i, v)| (self.space.name(i).to_string(), format_rational(v)))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Balanced transportation simplex
// ---------------------------------------------------------------------------

struct BipartiteSolution {
    flow: Vec<Vec<Rat>>,
    row_potential: Vec<Rat>,
    col_potential: Vec<Rat>,
    cost: Rat,
}

/// Solve the balanced transportation problem `min Σ cost·flow` with the
/// given positive supplies and demands (sums must agree). Returns a basic
/// solution together with the optimal dual potentials.
fn transportation_simplex(
    supplies: &[Rat],
    demands: &[Rat],
    cost: &[Vec<Rat>],
) -> BipartiteSolution {
    let m = supplies.len();
    let n = demands.len();
    debug_assert!(m > 0 && n > 0);

    let mut flow = vec![vec![Rat::zero(); n]; m];
    let mut basic = vec![vec![false; n]; m];

    // Northwest-corner start: a deterministic spanning staircase.
    {
        let mut s = supplies.to_vec();
        let mut t = demands.to_vec();
        let (mut i, mut j) = (0, 0);
        while i < m && j < n {
            let q = s[i].clone().min(t[j].clone());
            flow[i][j] = q.clone();
            basic[i][j] = true;
            s[i] -= &q;
            t[j] -= &q;
            if s[i].is_zero() && t[j].is_zero() {
                if i + 1 < m {
                    i += 1;
                } else {
                    j += 1;
                }
            } else if s[i].is_zero() {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(
            basic.iter().flatten().filter(|b| **b).count(),
            m + n - 1
        );
    }

    let mut row_potential = vec![Rat::zero(); m];
    let mut col_potential = vec![Rat::zero(); n];

    let mut pivots = 0usize;
    loop {
        pivots += 1;
        assert!(pivots < 1_000_000, "transportation simplex failed to terminate");

        compute_potentials(&basic, cost, &mut row_potential, &mut col_potential);

        // Bland entering rule: first cell with negative reduced cost.
        let mut entering = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if !basic[i][j] {
                    let reduced = &cost[i][j] - &row_potential[i] - &col_potential[j];
                    if reduced < Rat::zero() {
                        entering = Some((i, j));
                        break 'scan;
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else { break };

        // The unique cycle: tree path from row ei to column ej, plus (ei, ej).
        let path = tree_path(&basic, m, n, ei, ej);
        // Cells along the path alternate -θ, +θ, ... starting from the row end.
        let mut minus_cells: Vec<(usize, usize)> = Vec::new();
        let mut plus_cells: Vec<(usize, usize)> = vec![(ei, ej)];
        for (step, cell) in path.iter().enumerate() {
            if step % 2 == 0 {
                minus_cells.push(*cell);
            } else {
                plus_cells.push(*cell);
            }
        }

        let theta = minus_cells
            .iter()
            .map(|&(i, j)| flow[i][j].clone())
            .min()
            .expect("cycle has at least one decreasing cell");
        let leaving = *minus_cells
            .iter()
            .filter(|&&(i, j)| flow[i][j] == theta)
            .min()
            .expect("some cell attains the minimum ratio");

        for &(i, j) in &plus_cells {
            flow[i][j] += &theta;
        }
        for &(i, j) in &minus_cells {
            flow[i][j] -= &theta;
        }
        basic[leaving.0][leaving.1] = false;
        basic[ei][ej] = true;
    }

    let mut total = Rat::zero();
    for i in 0..m {
        for j in 0..n {
            if !flow[i][j].is_zero() {
                total += &flow[i][j] * &cost[i][j];
            }
        }
    }

    BipartiteSolution {
        flow,
        row_potential,
        col_potential,
        cost: total,
    }
}

/// Solve `u_i + v_j = c_ij` over the basis tree, rooted at `u_0 = 0`.
fn compute_potentials(
    basic: &[Vec<bool>],
    cost: &[Vec<Rat>],
    row_potential: &mut [Rat],
    col_potential: &mut [Rat],
) {
    let m = row_potential.len();
    let n = col_potential.len();
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    row_potential[0] = Rat::zero();
    row_done[0] = true;
    // nodes: rows 0..m, then columns m..m+n
    let mut queue = vec![0usize];
    while let Some(node) = queue.pop() {
        if node < m {
            let i = node;
            for j in 0..n {
                if basic[i][j] && !col_done[j] {
                    col_potential[j] = &cost[i][j] - &row_potential[i];
                    col_done[j] = true;
                    queue.push(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                if basic[i][j] && !row_done[i] {
                    row_potential[i] = &cost[i][j] - &col_potential[j];
                    row_done[i] = true;
                    queue.push(i);
                }
            }
        }
    }
    debug_assert!(row_done.iter().all(|d| *d) && col_done.iter().all(|d| *d));
}

/// Cells of the unique basis-tree path from row `ri` to column `cj`,
/// in order starting with a cell in row `ri`.
fn tree_path(basic: &[Vec<bool>], m: usize, n: usize, ri: usize, cj: usize) -> Vec<(usize, usize)> {
    // BFS over the bipartite tree; nodes: rows 0..m, cols m..m+n.
    let total = m + n;
    let start = ri;
    let goal = m + cj;
    let mut parent: Vec<Option<(usize, (usize, usize))>> = vec![None; total];
    let mut seen = vec![false; total];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == goal {
            break;
        }
        if node < m {
            let i = node;
            for j in 0..n {
                if basic[i][j] && !seen[m + j] {
                    seen[m + j] = true;
                    parent[m + j] = Some((node, (i, j)));
                    queue.push_back(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                if basic[i][j] && !seen[i] {
                    seen[i] = true;
                    parent[i] = Some((node, (i, j)));
                    queue.push_back(i);
                }
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = goal;
    while node != start {
        let (prev, cell) = parent[node].expect("basis tree is spanning");
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

struct Imbalances {
    /// `(node, supply)` with positive supply, ascending node order.
    sources: Vec<(usize, Rat)>,
    /// `(node, demand)` with positive demand, ascending node order.
    sinks: Vec<(usize, Rat)>,
}

fn imbalances(space: &PointedMetricSpace, divergence: &Chain) -> Result<Imbalances> {
    divergence.validate_against(space)?;
    let mut net: BTreeMap<usize, Rat> = BTreeMap::new();
    for (point, coeff) in divergence.coeffs() {
        net.insert(space.index_of(point)?, coeff.clone());
    }
    let total = divergence.total();
    if !total.is_zero() {
        net.insert(space.basepoint_index(), -total);
    }
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for (node, value) in net {
        if value > Rat::zero() {
            sources.push((node, value));
        } else if value < Rat::zero() {
            sinks.push((node, -value));
        }
    }
    Ok(Imbalances { sources, sinks })
}

fn solve_internal(
    space: &SpaceRef,
    divergence: &Chain,
) -> Result<(TransportPlan, Rat, DualPotential)> {
    let Imbalances { sources, sinks } = imbalances(space, divergence)?;

    if sources.is_empty() {
        debug_assert!(sinks.is_empty());
        let plan = TransportPlan::new(space.clone(), Vec::new())?;
        let potential = DualPotential::new(space.clone(), vec![Rat::zero(); space.len()])?;
        return Ok((plan, Rat::zero(), potential));
    }

    let cost: Vec<Vec<Rat>> = sources
        .iter()
        .map(|&(a, _)| sinks.iter().map(|&(b, _)| space.dist(a, b).clone()).collect())
        .collect();
    let supplies: Vec<Rat> = sources.iter().map(|(_, s)| s.clone()).collect();
    let demands: Vec<Rat> = sinks.iter().map(|(_, t)| t.clone()).collect();

    let solution = transportation_simplex(&supplies, &demands, &cost);

    let mut entries = Vec::new();
    for (si, &(a, _)) in sources.iter().enumerate() {
        for (tj, &(b, _)) in sinks.iter().enumerate() {
            let f = &solution.flow[si][tj];
            if !f.is_zero() {
                entries.push(((a, b), f.clone()));
            }
        }
    }
    let plan = TransportPlan::new(space.clone(), entries)?;

    // Kantorovich potential: dual values on participating nodes, extended to
    // the rest of the space by the largest 1-Lipschitz extension, then
    // shifted to vanish at the basepoint. Optimality of the simplex duals
    // plus the triangle inequality make the participant values 1-Lipschitz,
    // and the extension preserves that.
    let mut partial: BTreeMap<usize, Rat> = BTreeMap::new();
    for (si, &(a, _)) in sources.iter().enumerate() {
        partial.insert(a, solution.row_potential[si].clone());
    }
    for (tj, &(b, _)) in sinks.iter().enumerate() {
        partial.insert(b, -solution.col_potential[tj].clone());
    }
    let values: Vec<Rat> = (0..space.len())
        .map(|q| match partial.get(&q) {
            Some(v) => v.clone(),
            None => partial
                .iter()
                .map(|(&s, v)| v + space.dist(q, s))
                .min()
                .expect("participants are nonempty"),
        })
        .collect();
    let mut values = values;
    let shift = values[space.basepoint_index()].clone();
    for v in values.iter_mut() {
        *v -= &shift;
    }
    let potential = DualPotential::new(space.clone(), values)?;

    debug_assert_eq!(potential.objective(divergence)?, solution.cost);
    debug_assert_eq!(plan.cost(), solution.cost);

    Ok((plan, solution.cost, potential))
}

/// Minimal-cost plan realizing `divergence` off the basepoint, with the
/// basepoint free to absorb or emit the imbalance. Returns the plan and its
/// exact cost. The computation is restricted to the divergence support plus
/// the basepoint; the plan is a basic solution, hence tree-sized.
///
/// ```
/// use std::sync::Arc;
/// use graevkit::rational::{parse_rational, rat};
/// use graevkit::{solve_min_cost, Chain, PointedMetricSpace};
///
/// let space = Arc::new(PointedMetricSpace::from_str_parts(
///     &["*", "a", "b"],
///     "*",
///     &[&["0", "1", "1"], &["1", "0", "3/2"], &["1", "3/2", "0"]],
/// )?);
/// let chain = Chain::new(&space, [("a".to_string(), parse_rational("1")?),
///                                 ("b".to_string(), parse_rational("-1")?)])?;
/// let (plan, cost) = solve_min_cost(&space, &chain)?;
/// assert_eq!(cost, rat(3, 2)); // shipping a -> b directly beats the basepoint route
/// assert_eq!(plan.len(), 1);
/// # Ok::<(), graevkit::Error>(())
/// ```
pub fn solve_min_cost(space: &SpaceRef, divergence: &Chain) -> Result<(TransportPlan, Rat)> {
    let (plan, cost, _) = solve_internal(space, divergence)?;
    Ok((plan, cost))
}

/// A Kantorovich potential certifying the optimum for `divergence`:
/// 1-Lipschitz, zero at the basepoint, with dual objective equal to the
/// optimal cost exactly.
pub fn dual_potentials(space: &SpaceRef, divergence: &Chain) -> Result<DualPotential> {
    let (_, _, potential) = solve_internal(space, divergence)?;
    Ok(potential)
}

/// Solve and certify in one pass.
pub fn solve_with_certificate(
    space: &SpaceRef,
    divergence: &Chain,
) -> Result<(TransportPlan, Rat, DualPotential)> {
    solve_internal(space, divergence)
}

/// Minimal cost of a coupling with the two prescribed marginals. Sources
/// and sinks may share nodes; mass kept in place costs nothing. Callers
/// guarantee positive weights and equal totals.
pub(crate) fn balanced_transport_cost(
    space: &PointedMetricSpace,
    sources: &[(usize, Rat)],
    sinks: &[(usize, Rat)],
) -> Rat {
    if sources.is_empty() {
        return Rat::zero();
    }
    let cost: Vec<Vec<Rat>> = sources
        .iter()
        .map(|&(a, _)| sinks.iter().map(|&(b, _)| space.dist(a, b).clone()).collect())
        .collect();
    let supplies: Vec<Rat> = sources.iter().map(|(_, s)| s.clone()).collect();
    let demands: Vec<Rat> = sinks.iter().map(|(_, t)| t.clone()).collect();
    transportation_simplex(&supplies, &demands, &cost).cost
}

/// Complementary-slackness check: true iff `potential` is feasible and
/// `f(a) - f(b) = d(a, b)` exactly on every plan entry. A `true` answer
/// certifies the plan optimal for its own divergence.
pub fn verify_optimality(
    space: &SpaceRef,
    plan: &TransportPlan,
    potential: &DualPotential,
) -> Result<bool> {
    if plan.space().as_ref() != space.as_ref() || potential.space().as_ref() != space.as_ref() {
        return Err(Error::SpaceMismatch);
    }
    if !potential.is_feasible() {
        return Ok(false);
    }
    for (a, b) in plan.entries().keys() {
        if &(potential.value(*a) - potential.value(*b)) != space.dist(*a, *b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Round a plan with integer divergences to an all-integer plan with the
/// same divergence at every node, support inside the input support, and
/// cost not above the input cost.
///
/// Fractional entries always contain a cycle in the undirected incidence
/// multigraph (a node with a single incident fractional entry would have a
/// fractional divergence). Each round pushes mass around one such cycle, in
/// the orientation whose unit cost is nonpositive, by exactly enough to make
/// at least one entry integral; fractional entries strictly decrease.
pub fn round_to_integer_plan(plan: &TransportPlan) -> Result<TransportPlan> {
    let space = plan.space().clone();
    for (node, value) in plan.divergence() {
        if !value.is_integer() {
            return Err(Error::NonIntegerDivergence(
                space.name(node).to_string(),
                format_rational(&value),
            ));
        }
    }

    let mut masses: BTreeMap<(usize, usize), Rat> = plan.entries().clone();

    loop {
        // Edges of the fractional multigraph, in deterministic key order.
        let edges: Vec<(usize, usize)> = masses
            .iter()
            .filter(|(_, m)| !m.is_integer())
            .map(|(k, _)| *k)
            .collect();
        if edges.is_empty() {
            break;
        }
        let cycle = fractional_cycle(&edges);

        // Cost of pushing one unit along the traversal orientation.
        let mut gamma = Rat::zero();
        for &(edge, forward) in &cycle {
            let (a, b) = edges[edge];
            if forward {
                gamma += space.dist(a, b);
            } else {
                gamma -= space.dist(a, b);
            }
        }
        let flip = gamma > Rat::zero();

        let mut delta: Option<Rat> = None;
        for &(edge, forward) in &cycle {
            let mass = &masses[&edges[edge]];
            let increases = forward != flip;
            let step = if increases {
                Rat::one() - fract(mass)
            } else {
                fract(mass)
            };
            delta = Some(match delta {
                Some(d) => d.min(step),
                None => step,
            });
        }
        let delta = delta.expect("cycle is nonempty");
        debug_assert!(delta > Rat::zero());

        for &(edge, forward) in &cycle {
            let key = edges[edge];
            let increases = forward != flip;
            let entry = masses.get_mut(&key).expect("edge keys are live entries");
            if increases {
                *entry += &delta;
            } else {
                *entry -= &delta;
            }
            debug_assert!(*entry >= Rat::zero());
        }
        masses.retain(|_, m| !m.is_zero());
    }

    let rounded = TransportPlan::new(space, masses)?;
    debug_assert_eq!(rounded.divergence(), plan.divergence());
    debug_assert!(rounded.cost() <= plan.cost());
    Ok(rounded)
}

/// Find a cycle in the multigraph given by undirected `edges` (each edge is
/// an ordered pair whose orientation is remembered). Returns the traversed
/// edges as `(edge id, traversed-along-orientation)` pairs.
///
/// Every vertex incident to an edge has degree at least two, so a walk that
/// never reuses an edge must revisit a vertex; the walk is deterministic
/// (lowest vertex start, lowest edge id continuation).
fn fractional_cycle(edges: &[(usize, usize)]) -> Vec<(usize, bool)> {
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (id, &(a, b)) in edges.iter().enumerate() {
        incident.entry(a).or_default().push(id);
        incident.entry(b).or_default().push(id);
    }
    let start = *incident.keys().next().expect("at least one edge");

    let mut used = vec![false; edges.len()];
    // (vertex, edge we arrived by with its direction)
    let mut path: Vec<(usize, Option<(usize, bool)>)> = vec![(start, None)];
    let mut on_path: BTreeMap<usize, usize> = BTreeMap::new();
    on_path.insert(start, 0);

    loop {
        let (here, _) = *path.last().expect("path is nonempty");
        let next_edge = incident[&here]
            .iter()
            .copied()
            .find(|&e| !used[e])
            .expect("fractional vertices have degree at least two");
        used[next_edge] = true;
        let (a, b) = edges[next_edge];
        let forward = a == here;
        let there = if forward { b } else { a };
        if let Some(&pos) = on_path.get(&there) {
            // Close the cycle: edges from position pos+1 onward, plus this one.
            let mut cycle: Vec<(usize, bool)> = path[pos + 1..]
                .iter()
                .map(|(_, via)| via.expect("non-root path nodes record their edge"))
                .collect();
            cycle.push((next_edge, forward));
            return cycle;
        }
        on_path.insert(there, path.len());
        path.push((there, Some((next_edge, forward))));
    }
}
