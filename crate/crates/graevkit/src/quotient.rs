//! Greedy preimages under the canonical norm-one operator from the space of
//! summable coefficient sequences over a finite net of the radius-1/2
//! sphere of a small normed space.
//!
//! A target of norm at most 1/2 is peeled off geometrically: each step
//! subtracts `2‖r‖ · u` for the net vector `u` that best matches the
//! current residual direction. With a net of covering radius `ε` on the
//! sphere the residual shrinks by a factor of at most `2ε` per step, so a
//! mesh of 1/8 forces at least halving; the collected coefficients are a
//! summable preimage certificate with mass at most `8/3 · ‖x‖`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// Hard cap on net enumeration size.
const MAX_NET_POINTS: usize = 20_000_000;

/// Which norm a [`NormedSpaceSpec`] carries.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    /// `(Σ |x_i|^p)^(1/p)` with `p ≥ 1`.
    P(f64),
    /// `max |x_i|`.
    Max,
    /// `max w_i |x_i|` with positive rational weights.
    WeightedMax(Vec<Rat>),
}

/// A small finite-dimensional normed space.
#[derive(Debug, Clone, PartialEq)]
pub struct NormedSpaceSpec {
    pub dimension: usize,
    pub kind: NormKind,
}

impl NormedSpaceSpec {
    pub fn new(dimension: usize, kind: NormKind) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::BadParameter("dimension must be positive".into()));
        }
        match &kind {
            NormKind::P(p) => {
                if !p.is_finite() || *p < 1.0 {
                    return Err(Error::BadParameter(format!(
                        "p-norm needs p >= 1, got {p}"
                    )));
                }
            }
            NormKind::Max => {}
            NormKind::WeightedMax(weights) => {
                if weights.len() != dimension {
                    return Err(Error::BadParameter(format!(
                        "{} weights for dimension {dimension}",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| *w <= Rat::from_integer(0.into())) {
                    return Err(Error::BadParameter("weights must be positive".into()));
                }
            }
        }
        Ok(Self { dimension, kind })
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        match &self.kind {
            NormKind::P(p) => {
                if *p == 1.0 {
                    x.iter().map(|v| v.abs()).sum()
                } else if *p == 2.0 {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt()
                } else {
                    x.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(1.0 / p)
                }
            }
            NormKind::Max => x.iter().map(|v| v.abs()).fold(0.0, f64::max),
            NormKind::WeightedMax(weights) => x
                .iter()
                .zip(weights)
                .map(|(v, w)| rat_to_f64(w) * v.abs())
                .fold(0.0, f64::max),
        }
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    let numer: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let denom: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    numer / denom
}

/// A finite set of vectors of norm 1/2 covering the sphere to a recorded
/// mesh. The mesh is the analytic covering bound of the grid construction;
/// [`SphereNet::spot_check`] probes it statistically.
#[derive(Debug, Clone)]
pub struct SphereNet {
    pub spec: NormedSpaceSpec,
    pub vectors: Vec<Vec<f64>>,
    /// Claimed covering radius on the radius-1/2 sphere.
    pub mesh: f64,
    /// Bound on `|‖v‖ - 1/2|` over the net.
    pub net_tol: f64,
}

/// Build a sphere net by projecting the integer grid points on the surface
/// of the cube `[-m, m]^k` onto the radius-1/2 sphere. The grid resolution
/// `m` is chosen per norm kind so that the projected points cover the
/// sphere within the requested mesh.
pub fn build_net(spec: &NormedSpaceSpec, mesh: f64) -> Result<SphereNet> {
    if !mesh.is_finite() || mesh <= 0.0 {
        return Err(Error::BadParameter(format!("mesh {mesh} must be positive")));
    }
    if spec.dimension > 8 {
        return Err(Error::BadParameter(format!(
            "dimension {} exceeds the supported cap of 8",
            spec.dimension
        )));
    }
    let k = spec.dimension;

    if k == 1 {
        // The sphere has exactly two points.
        return Ok(SphereNet {
            spec: spec.clone(),
            vectors: vec![vec![0.5], vec![-0.5]],
            mesh,
            net_tol: 1e-12,
        });
    }

    // Rounding a sphere point to the nearest grid point on the cube surface
    // of radius m moves it by at most 1/2 per free coordinate; dividing by
    // the norm of the surface point (at least m, scaled by the smallest
    // weight for weighted norms) bounds the covering radius.
    let m = match &spec.kind {
        NormKind::P(p) => ((k as f64 - 1.0).powf(1.0 / p) / (2.0 * mesh)).ceil() as usize,
        NormKind::Max => (1.0 / (2.0 * mesh)).ceil() as usize,
        NormKind::WeightedMax(weights) => {
            let wmax = weights.iter().map(rat_to_f64).fold(0.0, f64::max);
            let wmin = weights.iter().map(rat_to_f64).fold(f64::INFINITY, f64::min);
            (wmax / (wmin * 2.0 * mesh)).ceil() as usize
        }
    };
    let m = m.max(1);

    let side = 2 * m + 1;
    let total = side.checked_pow(k as u32).filter(|t| *t <= MAX_NET_POINTS);
    if total.is_none() {
        return Err(Error::BadParameter(format!(
            "mesh {mesh} is too fine for dimension {k}"
        )));
    }

    let mut vectors = Vec::new();
    let mut net_tol = 0.0f64;
    let mut digits = vec![0usize; k];
    loop {
        // keep only points on the cube surface
        if digits.iter().any(|&d| d == 0 || d == side - 1) {
            let v: Vec<f64> = digits.iter().map(|&d| d as f64 - m as f64).collect();
            let n = spec.norm(&v);
            if n > 0.0 {
                let scaled: Vec<f64> = v.iter().map(|x| x / (2.0 * n)).collect();
                net_tol = net_tol.max((spec.norm(&scaled) - 0.5).abs());
                vectors.push(scaled);
            }
        }
        // advance mixed-radix counter
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(SphereNet {
                    spec: spec.clone(),
                    vectors,
                    mesh,
                    net_tol,
                });
            }
            digits[pos] += 1;
            if digits[pos] < side {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

impl SphereNet {
    /// Statistical probe of the covering claim: the largest observed
    /// distance from a random sphere point to the net over `samples`
    /// seeded draws.
    pub fn spot_check(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let k = self.spec.dimension;
        let mut worst = 0.0f64;
        let mut drawn = 0;
        while drawn < samples {
            let x: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = self.spec.norm(&x);
            if n < 1e-6 {
                continue;
            }
            drawn += 1;
            let point: Vec<f64> = x.iter().map(|v| v / (2.0 * n)).collect();
            let nearest = self
                .vectors
                .iter()
                .map(|u| {
                    let diff: Vec<f64> =
                        point.iter().zip(u).map(|(a, b)| a - b).collect();
                    self.spec.norm(&diff)
                })
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
        worst
    }
}

/// Result of a greedy run: chosen `(net index, coefficient)` pairs and the
/// residual norm after each step.
#[derive(Debug, Clone)]
pub struct GreedyRun {
    pub coeffs: Vec<(usize, f64)>,
    pub residual_norms: Vec<f64>,
}

/// Peel a target of norm at most 1/2 into nonnegative multiples of net
/// vectors. At each step the coefficient is `2‖r‖`, so the subtracted term
/// has the residual's own norm; the best-matching net vector then leaves a
/// residual of at most `2‖r‖ · mesh`. Stops early once the residual
/// vanishes exactly.
pub fn greedy_preimage(net: &SphereNet, x: &[f64], steps: usize) -> Result<GreedyRun> {
    if x.len() != net.spec.dimension {
        return Err(Error::BadParameter(format!(
            "target has dimension {}, net expects {}",
            x.len(),
            net.spec.dimension
        )));
    }
    let norm_x = net.spec.norm(x);
    if norm_x > 0.5 + 1e-12 {
        return Err(Error::BadParameter(format!(
            "target norm {norm_x} exceeds 1/2"
        )));
    }

    let k = net.spec.dimension;
    let mut coeffs: Vec<(usize, f64)> = Vec::new();
    let mut residual_norms: Vec<f64> = Vec::new();
    // running sum of chosen terms; the residual is recomputed as x - sum so
    // that replaying the coefficients reproduces the same floats
    let mut sum = vec![0.0f64; k];
    let mut residual: Vec<f64> = x.to_vec();

    for _ in 0..steps {
        let r_norm = net.spec.norm(&residual);
        if r_norm == 0.0 {
            break;
        }
        let lambda = 2.0 * r_norm;
        let mut best: Option<(usize, f64)> = None;
        for (idx, u) in net.vectors.iter().enumerate() {
            let candidate: Vec<f64> = residual
                .iter()
                .zip(u)
                .map(|(r, ui)| r - lambda * ui)
                .collect();
            let gap = net.spec.norm(&candidate);
            if best.as_ref().is_none_or(|(_, b)| gap < *b) {
                best = Some((idx, gap));
            }
        }
        let (chosen, _) = best.expect("net is nonempty");
        for (s, ui) in sum.iter_mut().zip(&net.vectors[chosen]) {
            *s += lambda * ui;
        }
        for (r, (xi, si)) in residual.iter_mut().zip(x.iter().zip(&sum)) {
            *r = xi - si;
        }
        coeffs.push((chosen, lambda));
        residual_norms.push(net.spec.norm(&residual));
    }

    Ok(GreedyRun {
        coeffs,
        residual_norms,
    })
}

/// Replay coefficients: the reconstructed vector `Σ λ_i · net[k_i]` and the
/// summable mass `Σ |λ_i|`. Accumulation order matches [`greedy_preimage`],
/// so replaying its output reproduces the recorded residuals exactly.
pub fn evaluate_preimage(net: &SphereNet, coeffs: &[(usize, f64)]) -> Result<(Vec<f64>, f64)> {
    let k = net.spec.dimension;
    let mut sum = vec![0.0f64; k];
    let mut mass = 0.0f64;
    for &(idx, lambda) in coeffs {
        let u = net
            .vectors
            .get(idx)
            .ok_or_else(|| Error::BadParameter(format!("net index {idx} out of range")))?;
        for (s, ui) in sum.iter_mut().zip(u) {
            *s += lambda * ui;
        }
        mass += lambda.abs();
    }
    Ok((sum, mass))
}
