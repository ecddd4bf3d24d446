//! Optimality certificates: a plan, its cost, and a dual potential, in a
//! stable JSON form that can be re-checked without re-solving.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::Result;
use crate::rational::{format_rational, parse_rational, Rat};
use crate::space::SpaceRef;
use crate::transport::{DualPotential, TransportPlan};

/// On-disk certificate: `{"cost": "5/2", "plan": [["a","b","1"], ...],
/// "potential": {"a": "1", ...}}`. Rationals are canonical strings; plan
/// entries are ordered by (source, sink) point index; the potential omits
/// the basepoint, whose value is pinned to 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub cost: String,
    pub plan: Vec<(String, String, String)>,
    pub potential: BTreeMap<String, String>,
}

impl Certificate {
    /// Package a solved instance.
    pub fn new(plan: &TransportPlan, cost: &Rat, potential: &DualPotential) -> Self {
        Certificate {
            cost: format_rational(cost),
            plan: plan.to_named_triples(),
            potential: potential.to_named_values(),
        }
    }
}

/// Re-check a certificate against a space, independently of the solver:
/// recompute the plan cost, the potential's feasibility (1-Lipschitz, zero
/// at the basepoint), and complementary slackness on the plan support.
/// Passing all checks proves the plan optimal for its own divergence.
///
/// Returns the list of failed checks; empty means verified.
pub fn verify_certificate(space: &SpaceRef, cert: &Certificate) -> Result<Vec<String>> {
    let mut failures = Vec::new();

    let plan = match TransportPlan::from_named_triples(space.clone(), &cert.plan) {
        Ok(plan) => Some(plan),
        Err(e) => {
            failures.push(format!("plan is invalid: {e}"));
            None
        }
    };

    let stated_cost = parse_rational(&cert.cost)?;

    // Resolve the potential: listed points must exist; the basepoint may
    // only appear with value 0.
    let mut values = vec![None; space.len()];
    values[space.basepoint_index()] = Some(Rat::zero());
    for (point, value) in &cert.potential {
        let idx = space.index_of(point)?;
        let v = parse_rational(value)?;
        if idx == space.basepoint_index() && !v.is_zero() {
            failures.push(format!(
                "potential assigns {} to the basepoint; it must vanish there",
                value
            ));
            continue;
        }
        values[idx] = Some(v);
    }

    // 1-Lipschitz over every pair of defined points.
    for i in 0..space.len() {
        for j in (i + 1)..space.len() {
            if let (Some(fi), Some(fj)) = (&values[i], &values[j]) {
                let gap = fi - fj;
                let gap = if gap < Rat::zero() { -gap } else { gap };
                if gap > *space.dist(i, j) {
                    failures.push(format!(
                        "potential is not 1-Lipschitz on ({}, {}): gap {} exceeds distance {}",
                        space.name(i),
                        space.name(j),
                        format_rational(&gap),
                        format_rational(space.dist(i, j)),
                    ));
                }
            }
        }
    }

    if let Some(plan) = &plan {
        let recomputed = plan.cost();
        if recomputed != stated_cost {
            failures.push(format!(
                "stated cost {} differs from plan cost {}",
                cert.cost,
                format_rational(&recomputed)
            ));
        }
        for (a, b) in plan.entries().keys() {
            match (&values[*a], &values[*b]) {
                (Some(fa), Some(fb)) => {
                    if &(fa - fb) != space.dist(*a, *b) {
                        failures.push(format!(
                            "slackness fails on ({}, {}): f gap {} but distance {}",
                            space.name(*a),
                            space.name(*b),
                            format_rational(&(fa - fb)),
                            format_rational(space.dist(*a, *b)),
                        ));
                    }
                }
                _ => failures.push(format!(
                    "potential is undefined on plan entry ({}, {})",
                    space.name(*a),
                    space.name(*b)
                )),
            }
        }

        // Dual objective must meet the cost; implied by slackness and
        // feasibility, checked anyway so a doctored certificate cannot
        // sneak through with an inconsistent divergence.
        if failures.is_empty() {
            let mut objective = Rat::zero();
            for (node, coeff) in plan.divergence() {
                if node != space.basepoint_index() {
                    match &values[node] {
                        Some(f) => objective += f * &coeff,
                        None => failures.push(format!(
                            "potential is undefined on divergence node `{}`",
                            space.name(node)
                        )),
                    }
                }
            }
            if failures.is_empty() && objective != stated_cost {
                failures.push(format!(
                    "dual objective {} differs from cost {}",
                    format_rational(&objective),
                    cert.cost
                ));
            }
        }
    }

    Ok(failures)
}

/// Convenience: emit a certificate for a divergence chain.
pub fn certificate_for(space: &SpaceRef, divergence: &crate::space::Chain) -> Result<Certificate> {
    let (plan, cost, potential) = crate::transport::solve_with_certificate(space, divergence)?;
    Ok(Certificate::new(&plan, &cost, &potential))
}
